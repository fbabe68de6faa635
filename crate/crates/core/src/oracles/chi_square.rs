use alloc::vec::Vec;
use core::fmt;

/// Smallest expected count per bin for the Pearson approximation.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ChiSquareError {
    LengthMismatch,
    /// A bin expects fewer than five counts; merge it with a neighbour
    /// (see [`merge_sparse_bins`]).
    SparseBin { index: usize, expected: f64 },
    TooFewBins,
}

impl fmt::Display for ChiSquareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChiSquareError::LengthMismatch => f.write_str("observed and expected bins differ in length"),
            ChiSquareError::SparseBin { index, expected } => write!(
                f,
                "bin {index} expects {expected:.3} counts (< {MIN_EXPECTED}); merge sparse bins before testing"
            ),
            ChiSquareError::TooFewBins => f.write_str("need at least two bins"),
        }
    }
}

impl core::error::Error for ChiSquareError {}

/// Pearson statistic and its degrees of freedom (`bins - 1`).
pub fn pearson_statistic(observed: &[f64], expected: &[f64]) -> Result<(f64, usize), ChiSquareError> {
    if observed.len() != expected.len() {
        return Err(ChiSquareError::LengthMismatch);
    }
    if observed.len() < 2 {
        return Err(ChiSquareError::TooFewBins);
    }
    let mut stat = 0.0;
    for (i, (&o, &e)) in observed.iter().zip(expected).enumerate() {
        if !(e >= MIN_EXPECTED) {
            return Err(ChiSquareError::SparseBin { index: i, expected: e });
        }
        stat += (o - e) * (o - e) / e;
    }
    Ok((stat, observed.len() - 1))
}

/// Merges bins, in order, until each merged bin expects at least
/// [`MIN_EXPECTED`] counts. A sparse tail is folded into the last bin.
pub fn merge_sparse_bins(observed: &[f64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= MIN_EXPECTED {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        if let (Some(o), Some(e)) = (obs.last_mut(), exp.last_mut()) {
            *o += o_acc;
            *e += e_acc;
        } else {
            obs.push(o_acc);
            exp.push(e_acc);
        }
    }
    (obs, exp)
}
