//! `OADS` dataset files.
//!
//! ```text
//! "OADS" | version u32 | num_videos u32 | K u32 | D u32
//! per video: id length u32 | id bytes | T u32 | T*D f32 | T label bytes
//! ```

use std::fs;
use std::path::Path;

use crate::binio::{put_f32, put_string, put_u32, to_u32, Reader};
use crate::data::{StreamDataset, Video};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"OADS";
pub const VERSION: u32 = 1;

pub fn encode(ds: &StreamDataset) -> Result<Vec<u8>> {
    ds.validate()?;
    if ds.num_actions > 255 {
        return Err(Error::format("labels must fit in one byte"));
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, to_u32(ds.videos.len(), "video count")?);
    put_u32(&mut out, to_u32(ds.num_actions, "K")?);
    put_u32(&mut out, to_u32(ds.feature_dim, "D")?);
    for v in &ds.videos {
        put_string(&mut out, &v.id);
        put_u32(&mut out, to_u32(v.len(), "frame count")?);
        for row in &v.features {
            for &x in row {
                put_f32(&mut out, x as f32);
            }
        }
        out.extend(v.labels.iter().map(|&l| l as u8));
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<StreamDataset> {
    let mut r = Reader::new(bytes, "dataset");
    r.magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format(format!(
            "dataset version {version}, this build reads version {VERSION}"
        )));
    }
    let n = r.u32()? as usize;
    let num_actions = r.u32()? as usize;
    let feature_dim = r.u32()? as usize;
    let mut videos = Vec::with_capacity(n.min(bytes.len()));
    for _ in 0..n {
        let id = r.string()?;
        let t = r.u32()? as usize;
        let floats = t
            .checked_mul(feature_dim)
            .and_then(|v| v.checked_mul(4))
            .ok_or_else(|| Error::format(format!("video '{id}' size overflows")))?;
        let raw = r.take(floats)?;
        let features = if feature_dim == 0 {
            vec![Vec::new(); t]
        } else {
            raw.chunks_exact(4 * feature_dim)
                .map(|row| {
                    row.chunks_exact(4)
                        .map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap())))
                        .collect()
                })
                .collect()
        };
        let labels: Vec<usize> = r.take(t)?.iter().map(|&b| usize::from(b)).collect();
        if let Some(&l) = labels.iter().find(|&&l| l > num_actions) {
            return Err(Error::format(format!(
                "video '{id}' has label {l} but the file declares {num_actions} actions"
            )));
        }
        videos.push(Video {
            id,
            features,
            labels,
        });
    }
    r.finish()?;
    let ds = StreamDataset {
        num_actions,
        feature_dim,
        videos,
    };
    ds.validate()
        .map_err(|e| Error::format(format!("dataset content invalid: {e}")))?;
    Ok(ds)
}

pub fn save_dataset(ds: &StreamDataset, path: &Path) -> Result<()> {
    fs::write(path, encode(ds)?)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<StreamDataset> {
    decode(&fs::read(path)?)
}
