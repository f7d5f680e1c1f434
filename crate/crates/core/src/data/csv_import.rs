//! CSV ingestion for externally extracted features.
//!
//! One row per frame: `video_id, frame, label, f_1, ..., f_D`. An optional
//! header row whose first field is `video_id` is skipped. Frames of a video
//! must appear in order starting at 0; videos keep their first-seen order.

use std::io::Read;
use std::path::Path;

use crate::data::{StreamDataset, Video};
use crate::error::{Error, Result};

pub fn read_csv<R: Read>(reader: R, num_actions: usize) -> Result<StreamDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut videos: Vec<Video> = Vec::new();
    let mut feature_dim: Option<usize> = None;
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::format(format!("csv: {e}")))?;
        let row = line + 1;
        if line == 0 && record.get(0) == Some("video_id") {
            continue;
        }
        if record.len() < 4 {
            return Err(Error::format(format!(
                "csv row {row}: need video_id, frame, label and at least one feature"
            )));
        }
        let dim = record.len() - 3;
        match feature_dim {
            None => feature_dim = Some(dim),
            Some(d) if d != dim => {
                return Err(Error::format(format!(
                    "csv row {row}: {dim} feature columns, earlier rows have {d}"
                )))
            }
            _ => {}
        }
        let id = &record[0];
        let frame: usize = record[1]
            .parse()
            .map_err(|_| Error::format(format!("csv row {row}: bad frame index '{}'", &record[1])))?;
        let label: usize = record[2]
            .parse()
            .map_err(|_| Error::format(format!("csv row {row}: bad label '{}'", &record[2])))?;
        if label > num_actions {
            return Err(Error::format(format!(
                "csv row {row}: label {label} exceeds {num_actions} actions"
            )));
        }
        let features = record
            .iter()
            .skip(3)
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::format(format!("csv row {row}: bad feature '{f}'")))
            })
            .collect::<Result<Vec<f64>>>()?;

        let idx = match videos.iter().position(|v| v.id == id) {
            Some(i) => i,
            None => {
                videos.push(Video {
                    id: id.to_string(),
                    features: Vec::new(),
                    labels: Vec::new(),
                });
                videos.len() - 1
            }
        };
        let video = &mut videos[idx];
        if frame != video.len() {
            return Err(Error::format(format!(
                "csv row {row}: video '{id}' frame {frame} out of order, expected {}",
                video.len()
            )));
        }
        video.features.push(features);
        video.labels.push(label);
    }
    let feature_dim = feature_dim.ok_or_else(|| Error::format("csv contains no frames"))?;
    let ds = StreamDataset {
        num_actions,
        feature_dim,
        videos,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn import_csv(path: &Path, num_actions: usize) -> Result<StreamDataset> {
    read_csv(std::fs::File::open(path)?, num_actions)
}
