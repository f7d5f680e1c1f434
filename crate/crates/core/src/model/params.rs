use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// A fixed, ordered collection of named parameter blocks.
///
/// Gradients are represented by a value of the same type, so the block order
/// is shared between a model, its gradient, its optimizer state and its
/// checkpoint.
pub trait ParamSet: Clone {
    fn blocks(&self) -> Vec<(String, &Matrix)>;
    fn blocks_mut(&mut self) -> Vec<&mut Matrix>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for b in z.blocks_mut() {
            b.fill(0.0);
        }
        z
    }

    fn num_params(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (_, b) in self.blocks() {
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        let n = self.num_params();
        if flat.len() != n {
            return Err(Error::shape(format!(
                "{} values for a parameter set of size {n}",
                flat.len()
            )));
        }
        let mut offset = 0;
        for b in self.blocks_mut() {
            let len = b.len();
            b.as_mut_slice().copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    fn accumulate(&mut self, other: &Self) -> Result<()> {
        let theirs: Vec<&Matrix> = other.blocks().into_iter().map(|(_, m)| m).collect();
        let mine = self.blocks_mut();
        if mine.len() != theirs.len() {
            return Err(Error::shape("parameter sets have different block counts"));
        }
        for (a, b) in mine.into_iter().zip(theirs) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    fn scale(&mut self, k: f64) {
        for b in self.blocks_mut() {
            b.scale(k);
        }
    }

    fn is_finite(&self) -> bool {
        self.blocks().iter().all(|(_, b)| b.is_finite())
    }
}

/// Prefixes every block name of `inner` with `prefix.`.
pub(crate) fn prefixed<'a>(
    prefix: &str,
    inner: Vec<(String, &'a Matrix)>,
) -> impl Iterator<Item = (String, &'a Matrix)> + 'a {
    let prefix = prefix.to_string();
    inner
        .into_iter()
        .map(move |(n, m)| (format!("{prefix}.{n}"), m))
}
