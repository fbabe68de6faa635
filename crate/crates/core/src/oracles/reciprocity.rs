use alloc::vec::Vec;

use crate::estimators::{eval_single_bounce, BsdfQuery, Diagnostics, Estimator};
use crate::geometry::Vec3;
use crate::material::MaterialSpec;
use crate::math::{safe_sqrt, PI};
use crate::path::EvalConventions;
use crate::rng::RandomStream;

/// Swapped-argument comparison for one direction pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocityCell {
    pub omega_a: Vec3,
    pub omega_b: Vec3,
    /// Mean estimate of `rho(a, b)`, channel average.
    pub forward: f64,
    /// Mean estimate of `rho(b, a)`.
    pub backward: f64,
    /// Pooled standard error of the difference.
    pub std_error: f64,
}

impl ReciprocityCell {
    pub fn z_score(&self) -> f64 {
        let d = self.forward - self.backward;
        if self.std_error > 0.0 {
            d.abs() / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityReport {
    pub cells: Vec<ReciprocityCell>,
    pub diagnostics: Diagnostics,
}

impl ReciprocityReport {
    pub fn violations(&self, sigmas: f64) -> usize {
        self.cells.iter().filter(|c| c.z_score() > sigmas).count()
    }

    pub fn violation_rate(&self, sigmas: f64) -> f64 {
        self.violations(sigmas) as f64 / self.cells.len().max(1) as f64
    }

    pub fn max_z(&self) -> f64 {
        self.cells.iter().map(ReciprocityCell::z_score).fold(0.0, f64::max)
    }
}

/// `n_theta x n_phi` upper-hemisphere directions at cell centres, with
/// `theta` in `(0, theta_max)`.
pub fn direction_grid(n_theta: usize, n_phi: usize, theta_max: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = theta_max * (i as f64 + 0.5) / n_theta as f64;
        for j in 0..n_phi {
            let phi = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
            out.push(Vec3::from_spherical(theta, phi));
        }
    }
    out
}

/// Unordered pairs of distinct grid directions.
pub fn direction_pairs(dirs: &[Vec3]) -> Vec<(Vec3, Vec3)> {
    let mut out = Vec::new();
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            out.push((dirs[i], dirs[j]));
        }
    }
    out
}

/// Compares `n`-sample means of `rho(a, b)` and `rho(b, a)` for one pair.
/// Every pair index gets two dedicated streams derived from `seed`.
pub fn reciprocity_cell(
    pair: (Vec3, Vec3),
    index: usize,
    mat: &MaterialSpec,
    conv: &EvalConventions,
    estimator: Estimator,
    n: usize,
    seed: u64,
    diag: &mut Diagnostics,
) -> ReciprocityCell {
    let (a, b) = pair;
    let mut run = |wi: Vec3, wo: Vec3, stream: u64| {
        let mut rs = RandomStream::with_stream(seed, stream);
        let q = BsdfQuery::new(wi, wo, *mat).with_conventions(*conv);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let v = estimator.evaluate(&q, &mut rs, diag).average();
            sum += v;
            sum_sq += v * v;
        }
        let nf = n.max(1) as f64;
        let mean = sum / nf;
        (mean, (sum_sq / nf - mean * mean).max(0.0) / nf)
    };
    let (forward, var_f) = run(a, b, 2 * index as u64);
    let (backward, var_b) = run(b, a, 2 * index as u64 + 1);
    ReciprocityCell { omega_a: a, omega_b: b, forward, backward, std_error: safe_sqrt(var_f + var_b) }
}

/// Serial sweep over `pairs`.
pub fn reciprocity_sweep(
    mat: &MaterialSpec,
    conv: &EvalConventions,
    pairs: &[(Vec3, Vec3)],
    estimator: Estimator,
    n: usize,
    seed: u64,
) -> ReciprocityReport {
    let mut diagnostics = Diagnostics::default();
    let cells = pairs
        .iter()
        .enumerate()
        .map(|(i, &p)| reciprocity_cell(p, i, mat, conv, estimator, n, seed, &mut diagnostics))
        .collect();
    ReciprocityReport { cells, diagnostics }
}

/// Largest relative asymmetry of the closed-form single-scattering BSDF.
pub fn single_bounce_asymmetry(mat: &MaterialSpec, pairs: &[(Vec3, Vec3)]) -> f64 {
    let mut worst: f64 = 0.0;
    for &(a, b) in pairs {
        let x = eval_single_bounce(a, b, mat);
        let y = eval_single_bounce(b, a, mat);
        for c in 0..3 {
            let scale = x[c].abs().max(y[c].abs());
            if scale > 0.0 {
                worst = worst.max((x[c] - y[c]).abs() / scale);
            }
        }
    }
    worst
}
