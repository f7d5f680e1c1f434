//! Feature streams with per-frame labels: the synthetic generator and
//! dataset file formats.

mod csv_import;
mod format;
mod generator;

pub use csv_import::{import_csv, read_csv};
pub use format::{decode, encode, load_dataset, save_dataset, MAGIC, VERSION};
pub use generator::{default_transition, generate, stationary_distribution, GeneratorConfig};

use crate::error::{Error, Result};

/// One video: `T` feature rows and `T` labels (0 = background).
#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub id: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Video {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamDataset {
    pub num_actions: usize,
    pub feature_dim: usize,
    pub videos: Vec<Video>,
}

impl StreamDataset {
    pub fn num_classes(&self) -> usize {
        self.num_actions + 1
    }

    pub fn total_frames(&self) -> usize {
        self.videos.iter().map(Video::len).sum()
    }

    /// Frame count per class, indices `0..=K`.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.num_classes()];
        for v in &self.videos {
            for &l in &v.labels {
                h[l] += 1;
            }
        }
        h
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.videos {
            if v.features.len() != v.labels.len() {
                return Err(Error::contract(format!(
                    "video '{}' has {} feature rows and {} labels",
                    v.id,
                    v.features.len(),
                    v.labels.len()
                )));
            }
            if let Some(&l) = v.labels.iter().find(|&&l| l > self.num_actions) {
                return Err(Error::Index(format!(
                    "video '{}' has label {l} with only {} actions",
                    v.id, self.num_actions
                )));
            }
            for row in &v.features {
                if row.len() != self.feature_dim {
                    return Err(Error::shape(format!(
                        "video '{}' has a {}-wide feature row, expected {}",
                        v.id,
                        row.len(),
                        self.feature_dim
                    )));
                }
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Numeric(format!(
                        "video '{}' has a non-finite feature",
                        v.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Splits off the first `n` videos.
    pub fn split_at(&self, n: usize) -> (StreamDataset, StreamDataset) {
        let n = n.min(self.videos.len());
        let part = |videos: &[Video]| StreamDataset {
            num_actions: self.num_actions,
            feature_dim: self.feature_dim,
            videos: videos.to_vec(),
        };
        (part(&self.videos[..n]), part(&self.videos[n..]))
    }
}
