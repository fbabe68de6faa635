//! Monte Carlo estimators over path space.
//!
//! [`eval_pt`] walks from the incident direction with visible-normal
//! sampling and connects every prefix to `omega_o`. [`eval_bdpt`] also walks
//! from `omega_o` and combines every camera/light split with the balance
//! heuristic. [`sample`] draws an outgoing direction with the same walk, and
//! [`pdf_proxy`] gives a cheap closed-form density for MIS in renderers.

mod bdpt;
mod pt;
mod sampling;
mod single;
mod walk;

pub use bdpt::{eval_bdpt, eval_bdpt_with, mis_weights};
pub use pt::{eval_pt, eval_pt_by_bounce, eval_pt_with};
pub use sampling::{sample, sample_with, SampleRecord, SampleSide};
pub use single::{eval_single_bounce, pdf_proxy, pdf_proxy_with, DEFAULT_PROXY_MIX};
pub(crate) use single::first_bounce_pdf;

use crate::geometry::Vec3;
use crate::material::MaterialSpec;
use crate::path::EvalConventions;
use crate::rng::RandomStream;
use crate::spectrum::Rgb;

/// One evaluation request of the multiple-scattering BSDF `rho(omega_i, omega_o)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsdfQuery {
    pub omega_i: Vec3,
    pub omega_o: Vec3,
    pub mat: MaterialSpec,
    pub conv: EvalConventions,
    /// Independent walks averaged per evaluation.
    pub n_samples: usize,
}

impl BsdfQuery {
    pub fn new(omega_i: Vec3, omega_o: Vec3, mat: MaterialSpec) -> Self {
        BsdfQuery { omega_i, omega_o, mat, conv: EvalConventions::default(), n_samples: 1 }
    }

    pub fn with_conventions(self, conv: EvalConventions) -> Self {
        BsdfQuery { conv, ..self }
    }

    pub fn with_samples(self, n_samples: usize) -> Self {
        BsdfQuery { n_samples: n_samples.max(1), ..self }
    }
}

/// Counters for events the estimators absorb silently.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Random walks started.
    pub walks: u64,
    /// Walks stopped by the bounce limit while still inside the surface.
    pub truncated_walks: u64,
    /// Walks that ended because no valid direction could be sampled.
    pub sampling_failures: u64,
    /// Per-bounce contributions dropped for being NaN or infinite.
    pub non_finite_dropped: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.walks += other.walks;
        self.truncated_walks += other.truncated_walks;
        self.sampling_failures += other.sampling_failures;
        self.non_finite_dropped += other.non_finite_dropped;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Estimator {
    Pt,
    #[default]
    Bdpt,
}

impl Estimator {
    pub fn evaluate(self, q: &BsdfQuery, rs: &mut RandomStream, diag: &mut Diagnostics) -> Rgb {
        match self {
            Estimator::Pt => eval_pt_with(q, rs, diag),
            Estimator::Bdpt => eval_bdpt_with(q, rs, diag),
        }
    }
}

// Adds `value` unless it is non-finite.
pub(crate) fn accumulate(sum: &mut Rgb, value: Rgb, diag: &mut Diagnostics) {
    if value.is_finite() {
        *sum += value;
    } else {
        diag.non_finite_dropped += 1;
    }
}
