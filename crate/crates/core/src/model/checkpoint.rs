//! `TRN1` checkpoint files.
//!
//! Layout (little-endian):
//!
//! ```text
//! "TRN1" | version u32 | kind u32 | D u32 | K u32 | H u32 | decoder_steps u32
//!        | sequence_len u32 | E u32 | F u32 | alpha f64 | block count u32
//! per block: name length u32 | name bytes | rows u32 | cols u32 | rows*cols f32
//! ```
//!
//! Parameters are narrowed to `f32` on write, so a loaded model re-saves to
//! the same bytes.

use std::fs;
use std::path::Path;

use crate::binio::{put_f32, put_f64, put_string, put_u32, to_u32, Reader};
use crate::error::{Error, Result};
use crate::model::{Model, ModelKind, ParamSet, TrnConfig};

pub const MAGIC: &[u8; 4] = b"TRN1";
pub const VERSION: u32 = 1;

pub fn encode(model: &Model) -> Result<Vec<u8>> {
    let c = &model.config;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, model.kind.code());
    for (v, what) in [
        (c.feature_dim, "feature_dim"),
        (c.num_actions, "num_actions"),
        (c.hidden_dim, "hidden_dim"),
        (c.decoder_steps, "decoder_steps"),
        (c.sequence_len, "sequence_len"),
        (c.score_embed_dim, "score_embed_dim"),
        (c.future_dim, "future_dim"),
    ] {
        put_u32(&mut out, to_u32(v, what)?);
    }
    put_f64(&mut out, c.alpha);
    let blocks = model.params.blocks();
    put_u32(&mut out, to_u32(blocks.len(), "block count")?);
    for (name, m) in blocks {
        put_string(&mut out, &name);
        put_u32(&mut out, to_u32(m.rows(), "rows")?);
        put_u32(&mut out, to_u32(m.cols(), "cols")?);
        for &v in m.as_slice() {
            put_f32(&mut out, v as f32);
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader::new(bytes, "checkpoint");
    r.magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format(format!(
            "checkpoint version {version}, this build reads version {VERSION}"
        )));
    }
    let code = r.u32()?;
    let kind = ModelKind::from_code(code)
        .ok_or_else(|| Error::format(format!("unknown model kind code {code}")))?;
    let mut dims = [0usize; 7];
    for d in &mut dims {
        *d = r.u32()? as usize;
    }
    let config = TrnConfig {
        feature_dim: dims[0],
        num_actions: dims[1],
        hidden_dim: dims[2],
        decoder_steps: dims[3],
        sequence_len: dims[4],
        score_embed_dim: dims[5],
        future_dim: dims[6],
        alpha: r.f64()?,
    };
    config
        .validate()
        .map_err(|e| Error::format(format!("checkpoint config invalid: {e}")))?;
    // every parameter occupies 4 bytes, so refuse shapes the file cannot hold before allocating
    if param_count(kind, &config) > bytes.len() as u128 / 4 {
        return Err(Error::format(format!(
            "checkpoint declares more parameters than its {} bytes can hold",
            bytes.len()
        )));
    }
    let mut model = Model::zeros(kind, config)?;
    let count = r.u32()? as usize;
    let expected: Vec<(String, (usize, usize))> = model
        .params
        .blocks()
        .into_iter()
        .map(|(n, m)| (n, m.shape()))
        .collect();
    if count != expected.len() {
        return Err(Error::format(format!(
            "{count} parameter blocks, a {kind} model has {}",
            expected.len()
        )));
    }
    for (block, (want_name, want_shape)) in model.params.blocks_mut().into_iter().zip(expected) {
        let name = r.string()?;
        if name != want_name {
            return Err(Error::format(format!(
                "block '{name}' where '{want_name}' was expected"
            )));
        }
        let shape = (r.u32()? as usize, r.u32()? as usize);
        if shape != want_shape {
            return Err(Error::format(format!(
                "block '{name}' is {}x{}, expected {}x{}",
                shape.0, shape.1, want_shape.0, want_shape.1
            )));
        }
        for v in block.as_mut_slice() {
            let x = r.f32()?;
            if !x.is_finite() {
                return Err(Error::format(format!("non-finite value in block '{name}'")));
            }
            *v = f64::from(x);
        }
    }
    r.finish()?;
    Ok(model)
}

fn param_count(kind: ModelKind, c: &TrnConfig) -> u128 {
    let (d, h, e, f) = (
        c.feature_dim as u128,
        c.hidden_dim as u128,
        c.score_embed_dim as u128,
        c.future_dim as u128,
    );
    let classes = c.num_classes() as u128;
    let lstm = |input: u128| 4 * h * input + 4 * h * h + 4 * h;
    let affine = |out: u128, input: u128| out * input + out;
    let decoder = affine(h, h) + affine(e, classes) + lstm(e) + affine(classes, h);
    let head = affine(classes, h);
    match kind {
        ModelKind::Trn => lstm(d + f) + decoder + affine(f, h) + head,
        ModelKind::Lstm => lstm(d) + head,
        ModelKind::RnnOffline => lstm(2 * d) + head,
        ModelKind::EncoderDecoder => lstm(d) + head + decoder,
        ModelKind::Framewise => affine(h, d) + head,
    }
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, encode(model)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Model> {
    decode(&fs::read(path)?)
}

/// The model exactly as it would be after a save/load cycle.
pub fn round_trip(model: &Model) -> Result<Model> {
    decode(&encode(model)?)
}
