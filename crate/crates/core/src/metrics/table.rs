use std::ops::Range;

use crate::error::{Error, Result};

/// Scores recorded for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub video: String,
    pub frame: usize,
    pub label: usize,
    /// K+1 current-frame scores.
    pub current: Vec<f64>,
    /// `anticipated[i - 1]` scores frame `frame + i`.
    pub anticipated: Vec<Vec<f64>>,
}

/// Per-frame scores of a whole evaluation set, videos stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub num_classes: usize,
    /// Number of anticipated distributions per row (0 if the model has none).
    pub anticipation_steps: usize,
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn new(num_classes: usize, anticipation_steps: usize) -> Self {
        Self {
            num_classes,
            anticipation_steps,
            rows: Vec::new(),
        }
    }

    /// Row ranges of each video, in table order.
    pub fn video_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.rows.len() {
            if i == self.rows.len() || self.rows[i].video != self.rows[start].video {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::contract("score table is empty"));
        }
        for range in self.video_ranges() {
            for (k, row) in self.rows[range.clone()].iter().enumerate() {
                if row.frame != k {
                    return Err(Error::contract(format!(
                        "video '{}' frame indices are not contiguous at row {}",
                        row.video,
                        range.start + k
                    )));
                }
                if row.label >= self.num_classes || row.current.len() != self.num_classes {
                    return Err(Error::shape(format!(
                        "video '{}' frame {} does not match {} classes",
                        row.video, row.frame, self.num_classes
                    )));
                }
                if row.anticipated.len() != self.anticipation_steps
                    || row.anticipated.iter().any(|a| a.len() != self.num_classes)
                {
                    return Err(Error::shape(format!(
                        "video '{}' frame {} needs {} anticipated score vectors",
                        row.video, row.frame, self.anticipation_steps
                    )));
                }
            }
        }
        Ok(())
    }
}
