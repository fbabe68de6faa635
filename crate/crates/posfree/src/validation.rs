//! Statistical validation drivers: chi-square tests, parallel furnace and
//! reciprocity sweeps, estimator cross-checks and convergence fits.

use std::f64::consts::PI;

use posfree_core::estimators::{eval_bdpt_with, eval_pt_with, sample_with};
use posfree_core::oracles::{
    gauss_legendre, merge_sparse_bins, pearson_statistic, reciprocity_cell, rho2_quadrature, ChiSquareError,
    FurnacePlan, FurnaceReport, FurnaceTally, QuadratureGrid, ReciprocityReport,
};
use posfree_core::{
    BsdfQuery, Diagnostics, EvalConventions, Estimator, MaterialSpec, RandomStream, RoughnessProfile, Vec3,
};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn p_value(statistic: f64, dof: usize) -> f64 {
    match ChiSquared::new(dof as f64) {
        Ok(d) => d.sf(statistic),
        Err(_) => f64::NAN,
    }
}

/// Pearson test of `observed` counts against `expected` counts.
pub fn chi_square(observed: &[f64], expected: &[f64]) -> Result<ChiSquareOutcome, ChiSquareError> {
    let (statistic, dof) = pearson_statistic(observed, expected)?;
    Ok(ChiSquareOutcome { statistic, dof, p_value: p_value(statistic, dof) })
}

/// Like [`chi_square`] but merges sparse bins first.
pub fn chi_square_merged(observed: &[f64], expected: &[f64]) -> Result<ChiSquareOutcome, ChiSquareError> {
    if observed.len() != expected.len() {
        return Err(ChiSquareError::LengthMismatch);
    }
    let (o, e) = merge_sparse_bins(observed, expected);
    chi_square(&o, &e)
}

/// Pearson test where the expected counts are themselves estimates with
/// known variances: `sum (O - E)^2 / (E + Var E)` with `bins - 1` degrees of
/// freedom. Bins expecting fewer than five counts are merged first.
pub fn chi_square_estimated(
    observed: &[f64],
    expected: &[f64],
    expected_var: &[f64],
) -> Result<ChiSquareOutcome, ChiSquareError> {
    if observed.len() != expected.len() || expected.len() != expected_var.len() {
        return Err(ChiSquareError::LengthMismatch);
    }
    let (mut obs, mut exp, mut var) = (Vec::new(), Vec::new(), Vec::new());
    let (mut o_acc, mut e_acc, mut v_acc) = (0.0, 0.0, 0.0);
    for i in 0..observed.len() {
        o_acc += observed[i];
        e_acc += expected[i];
        v_acc += expected_var[i];
        if e_acc >= posfree_core::oracles::MIN_EXPECTED {
            obs.push(o_acc);
            exp.push(e_acc);
            var.push(v_acc);
            (o_acc, e_acc, v_acc) = (0.0, 0.0, 0.0);
        }
    }
    if let (Some(o), Some(e), Some(v)) = (obs.last_mut(), exp.last_mut(), var.last_mut()) {
        *o += o_acc;
        *e += e_acc;
        *v += v_acc;
    }
    if obs.len() < 2 {
        return Err(ChiSquareError::TooFewBins);
    }
    let statistic = obs.iter().zip(&exp).zip(&var).map(|((o, e), v)| (o - e) * (o - e) / (e + v)).sum();
    let dof = obs.len() - 1;
    Ok(ChiSquareOutcome { statistic, dof, p_value: p_value(statistic, dof) })
}

/// Result of binning visible-normal samples against the analytic density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VndfTest {
    pub chi_square: ChiSquareOutcome,
    /// Quadrature of `pdf_vndf` over the hemisphere.
    pub normalization: f64,
    pub failures: u64,
}

// Maps `u in [0, 1]` to `theta_m` so that bins follow the roughness scale.
fn bin_theta(u: f64, alpha: f64) -> (f64, f64) {
    let t = (0.5 * PI * u).tan();
    let theta = (alpha * t).atan();
    let sec2 = 1.0 + t * t;
    let dtheta_du = alpha * 0.5 * PI * sec2 / (1.0 + alpha * alpha * t * t);
    (theta, dtheta_du)
}

fn bin_u(theta: f64, alpha: f64) -> f64 {
    (theta.tan() / alpha).atan() / (0.5 * PI)
}

/// Chi-square test of `sample_vndf` against `pdf_vndf` for direction `w`:
/// `n` samples in `n_u x n_phi` bins, `theta_m` warped by the roughness.
pub fn vndf_chi_square(
    profile: &RoughnessProfile,
    w: Vec3,
    n: usize,
    n_u: usize,
    n_phi: usize,
    seed: u64,
) -> Result<VndfTest, ChiSquareError> {
    let alpha = (profile.alpha_x() * profile.alpha_y()).sqrt();
    let bins = n_u * n_phi;
    let mut observed = vec![0.0; bins];
    let mut rs = RandomStream::new(seed);
    let mut failures = 0;
    for _ in 0..n {
        let Some(s) = profile.sample_vndf(w, &mut rs) else {
            failures += 1;
            continue;
        };
        let m = s.m;
        if m.z <= 0.0 {
            failures += 1;
            continue;
        }
        let u = bin_u(m.theta(), alpha);
        let mut phi = m.phi();
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        let i = ((u * n_u as f64) as usize).min(n_u - 1);
        let j = ((phi / (2.0 * PI) * n_phi as f64) as usize).min(n_phi - 1);
        observed[i * n_phi + j] += 1.0;
    }

    let gl = gauss_legendre(24);
    let mut expected = vec![0.0; bins];
    let mut normalization = 0.0;
    for i in 0..n_u {
        let (u0, du) = (i as f64 / n_u as f64, 1.0 / n_u as f64);
        for j in 0..n_phi {
            let (p0, dp) = (2.0 * PI * j as f64 / n_phi as f64, 2.0 * PI / n_phi as f64);
            let mut mass = 0.0;
            for &(xu, wu) in &gl {
                let (theta, jac) = bin_theta(u0 + du * 0.5 * (xu + 1.0), alpha);
                for &(xp, wp) in &gl {
                    let phi = p0 + dp * 0.5 * (xp + 1.0);
                    let m = Vec3::from_spherical(theta, phi);
                    mass += wu * wp * profile.pdf_vndf(w, m) * theta.sin() * jac;
                }
            }
            mass *= 0.25 * du * dp;
            normalization += mass;
            expected[i * n_phi + j] = mass * n as f64;
        }
    }
    Ok(VndfTest { chi_square: chi_square_merged(&observed, &expected)?, normalization, failures })
}

/// Outcome of comparing sampler exit directions with evaluated densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerTest {
    pub chi_square: ChiSquareOutcome,
    pub walks: usize,
    pub exits: usize,
}

/// Bins `walks` sampler exit directions into `n_z x n_phi` cells, uniform in
/// `cos theta_o` and azimuth (over the sphere for dielectrics), and tests them
/// against `rho |cos theta_o|` integrated per cell with `evals_per_bin`
/// stratified [`eval_pt`](posfree_core::eval_pt) samples. Requires unit
/// sampler weights (white conductor or dielectric).
pub fn sampler_chi_square(
    omega_i: Vec3,
    mat: &MaterialSpec,
    conv: &EvalConventions,
    walks: usize,
    n_z: usize,
    n_phi: usize,
    evals_per_bin: usize,
    seed: u64,
) -> Result<SamplerTest, ChiSquareError> {
    let (z_lo, span) = if mat.is_dielectric() { (-1.0, 2.0) } else { (0.0, 1.0) };
    let bins = n_z * n_phi;
    let bin_of = |v: Vec3| {
        let i = (((v.z - z_lo) / span * n_z as f64) as usize).min(n_z - 1);
        let mut phi = v.phi();
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        let j = ((phi / (2.0 * PI) * n_phi as f64) as usize).min(n_phi - 1);
        i * n_phi + j
    };

    const CHUNK: usize = 65_536;
    let chunks = walks.div_ceil(CHUNK);
    let tallies: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rs = RandomStream::with_stream(seed, c as u64);
            let mut diag = Diagnostics::default();
            let mut counts = vec![0.0; bins];
            for _ in 0..CHUNK.min(walks - c * CHUNK) {
                if let Some(rec) = sample_with(omega_i, mat, conv, &mut rs, &mut diag) {
                    counts[bin_of(rec.omega_o)] += 1.0;
                }
            }
            counts
        })
        .collect();
    let mut observed = vec![0.0; bins];
    for t in &tallies {
        for (o, v) in observed.iter_mut().zip(t) {
            *o += v;
        }
    }
    let exits = observed.iter().sum::<f64>() as usize;

    let area = 2.0 * PI * span / bins as f64;
    let side = (evals_per_bin as f64).sqrt().ceil() as usize;
    let cells: Vec<(f64, f64)> = (0..bins)
        .into_par_iter()
        .map(|b| {
            let (i, j) = (b / n_phi, b % n_phi);
            let mut rs = RandomStream::with_stream(seed ^ 0x005e_ed0f_b1c5, b as u64);
            let mut diag = Diagnostics::default();
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            let m = side * side;
            for k in 0..m {
                let (u, v) = rs.next_2d();
                let z = z_lo + span * (i as f64 + (k / side) as f64 / side as f64 + u / side as f64) / n_z as f64;
                let phi =
                    2.0 * PI * (j as f64 + (k % side) as f64 / side as f64 + v / side as f64) / n_phi as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let wo = Vec3::new(r * phi.cos(), r * phi.sin(), z);
                let q = BsdfQuery::new(omega_i, wo, *mat).with_conventions(*conv);
                let f = eval_pt_with(&q, &mut rs, &mut diag).average() * z.abs() * area;
                sum += f;
                sum_sq += f * f;
            }
            let mean = sum / m as f64;
            // stratified sampling: the plain sample variance is an upper bound
            let var = (sum_sq / m as f64 - mean * mean).max(0.0) / m as f64;
            (mean, var)
        })
        .collect();
    let n = walks as f64;
    let expected: Vec<f64> = cells.iter().map(|c| c.0 * n).collect();
    let expected_var: Vec<f64> = cells.iter().map(|c| c.1 * n * n).collect();
    Ok(SamplerTest { chi_square: chi_square_estimated(&observed, &expected, &expected_var)?, walks, exits })
}

/// Furnace test with rows of the stratification distributed over threads.
/// The result does not depend on the thread count.
pub fn furnace_parallel(omega_i: Vec3, mat: &MaterialSpec, conv: &EvalConventions, n: u64, seed: u64) -> FurnaceReport {
    let plan = FurnacePlan::new(n, seed);
    let rows: Vec<FurnaceTally> =
        (0..plan.strata).into_par_iter().map(|r| plan.run_row(omega_i, mat, conv, r)).collect();
    let mut total = FurnaceTally::default();
    for r in &rows {
        total.merge(r);
    }
    total.report()
}

/// Parallel version of [`posfree_core::oracles::reciprocity_sweep`] with
/// identical results.
pub fn reciprocity_parallel(
    mat: &MaterialSpec,
    conv: &EvalConventions,
    pairs: &[(Vec3, Vec3)],
    estimator: Estimator,
    n: usize,
    seed: u64,
) -> ReciprocityReport {
    let cells: Vec<_> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut diag = Diagnostics::default();
            let cell = reciprocity_cell(p, i, mat, conv, estimator, n, seed, &mut diag);
            (cell, diag)
        })
        .collect();
    let mut diagnostics = Diagnostics::default();
    let cells = cells
        .into_iter()
        .map(|(c, d)| {
            diagnostics.merge(&d);
            c
        })
        .collect();
    ReciprocityReport { cells, diagnostics }
}

/// Mean and standard error of `n` channel-averaged estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanEstimate {
    /// Difference in pooled standard errors.
    pub fn z_against(&self, other: &MeanEstimate) -> f64 {
        let se = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        let d = (self.mean - other.mean).abs();
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn exact(value: f64) -> Self {
        MeanEstimate { mean: value, std_error: 0.0 }
    }
}

pub fn estimate(
    omega_i: Vec3,
    omega_o: Vec3,
    mat: &MaterialSpec,
    conv: &EvalConventions,
    estimator: Estimator,
    n: usize,
    rs: &mut RandomStream,
) -> MeanEstimate {
    let q = BsdfQuery::new(omega_i, omega_o, *mat).with_conventions(*conv);
    let mut diag = Diagnostics::default();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let v = match estimator {
            Estimator::Pt => eval_pt_with(&q, rs, &mut diag),
            Estimator::Bdpt => eval_bdpt_with(&q, rs, &mut diag),
        }
        .average();
        sum += v;
        sum_sq += v * v;
    }
    let nf = n.max(1) as f64;
    let mean = sum / nf;
    MeanEstimate { mean, std_error: ((sum_sq / nf - mean * mean).max(0.0) / nf).sqrt() }
}

/// Cross-check of the estimators on one direction pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyCell {
    pub omega_i: Vec3,
    pub omega_o: Vec3,
    pub pt: MeanEstimate,
    pub bdpt: MeanEstimate,
    /// Both estimators limited to two bounces, against quadrature.
    pub pt2: MeanEstimate,
    pub bdpt2: MeanEstimate,
    pub rho2: f64,
}

impl ConsistencyCell {
    /// `|pt - bdpt|`, `|pt2 - rho2|` and `|bdpt2 - rho2|` in pooled standard errors.
    pub fn z_scores(&self) -> [f64; 3] {
        let q = MeanEstimate::exact(self.rho2);
        [self.pt.z_against(&self.bdpt), self.pt2.z_against(&q), self.bdpt2.z_against(&q)]
    }
}

pub fn consistency_sweep(
    mat: &MaterialSpec,
    conv: &EvalConventions,
    pairs: &[(Vec3, Vec3)],
    n: usize,
    grid: &QuadratureGrid,
    seed: u64,
) -> Vec<ConsistencyCell> {
    let conv2 = conv.with_max_bounces(2);
    pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(wi, wo))| {
            let mut rs = RandomStream::with_stream(seed, i as u64);
            ConsistencyCell {
                omega_i: wi,
                omega_o: wo,
                pt: estimate(wi, wo, mat, conv, Estimator::Pt, n, &mut rs),
                bdpt: estimate(wi, wo, mat, conv, Estimator::Bdpt, n, &mut rs),
                pt2: estimate(wi, wo, mat, &conv2, Estimator::Pt, n, &mut rs),
                bdpt2: estimate(wi, wo, mat, &conv2, Estimator::Bdpt, n, &mut rs),
                rho2: rho2_quadrature(wi, wo, mat, conv, grid).total().average(),
            }
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_counts_give_p_one() {
        let e = [100.0, 200.0, 300.0, 400.0];
        let r = chi_square(&e, &e).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_against_cosine_is_rejected() {
        // uniform hemisphere samples binned in cos theta vs cosine-weighted expectation
        let n = 1_000_000;
        let bins = 20;
        let mut rs = RandomStream::new(4);
        let mut observed = vec![0.0; bins];
        for _ in 0..n {
            let z = rs.next_f64();
            observed[((z * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        let expected: Vec<f64> = (0..bins)
            .map(|i| {
                let (a, b) = (i as f64 / bins as f64, (i + 1) as f64 / bins as f64);
                (b * b - a * a) * n as f64
            })
            .collect();
        assert!(chi_square(&observed, &expected).unwrap().p_value < 1e-6);
    }

    #[test]
    fn sparse_expectation_asks_for_merging() {
        let err = chi_square(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("merge"));
        assert!(chi_square_merged(&[1.0, 2.0, 9.0], &[3.0, 3.0, 9.0]).is_ok());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 / v).collect();
        assert!((log_log_slope(&x, &y) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bin_warp_round_trips() {
        for &u in &[0.05, 0.3, 0.77, 0.95] {
            let (theta, _) = bin_theta(u, 0.3);
            assert!((bin_u(theta, 0.3) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_furnace_matches_serial_plan() {
        let mat = MaterialSpec::white_conductor(RoughnessProfile::ggx(0.5));
        let conv = EvalConventions::default();
        let wi = Vec3::from_spherical(0.4, 0.0);
        let plan = FurnacePlan::new(400, 11);
        let serial = plan.run_rows(wi, &mat, &conv, 0..plan.strata).report();
        assert_eq!(furnace_parallel(wi, &mat, &conv, 400, 11), serial);
    }
}
