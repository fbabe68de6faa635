use core::ops::Range;

use crate::estimators::{eval_pt_with, first_bounce_pdf, sample_with, BsdfQuery, Diagnostics};
use crate::geometry::{reflect, refract, Vec3};
use crate::material::MaterialSpec;
use crate::math::{safe_sqrt, sin_cos, sqrt, PI};
use crate::path::EvalConventions;
use crate::rng::RandomStream;

/// Directional albedo `int rho(omega_i, omega_o) |cos theta_o| d omega_o`
/// estimated two independent ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FurnaceReport {
    /// Evaluation-based estimate (stratified `omega_o`, channel average).
    pub eval_albedo: f64,
    pub eval_std_error: f64,
    /// Mean sampler weight (channel average); failed walks count as zero.
    pub sampler_albedo: f64,
    /// Fraction of sampler walks that did not exit.
    pub failure_fraction: f64,
    pub samples: u64,
}

impl FurnaceReport {
    pub fn gap(&self) -> f64 {
        self.eval_albedo - self.sampler_albedo
    }
}

/// Partial sums over a block of strata, mergeable by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FurnaceTally {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
    pub sampler_sum: f64,
    pub sampler_failures: u64,
    pub sampler_count: u64,
    pub diagnostics: Diagnostics,
}

impl FurnaceTally {
    pub fn merge(&mut self, o: &FurnaceTally) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.count += o.count;
        self.sampler_sum += o.sampler_sum;
        self.sampler_failures += o.sampler_failures;
        self.sampler_count += o.sampler_count;
        self.diagnostics.merge(&o.diagnostics);
    }

    pub fn report(&self) -> FurnaceReport {
        let n = self.count.max(1) as f64;
        let mean = self.sum / n;
        let var = (self.sum_sq / n - mean * mean).max(0.0);
        let m = self.sampler_count.max(1) as f64;
        FurnaceReport {
            eval_albedo: mean,
            eval_std_error: safe_sqrt(var / n),
            sampler_albedo: self.sampler_sum / m,
            failure_fraction: self.sampler_failures as f64 / m,
            samples: self.count,
        }
    }
}

/// Stratification of the outgoing directions: `strata x strata` cells,
/// uniform in `cos theta` and azimuth over the sphere (dielectrics) or the
/// upper hemisphere (conductors, which are zero below). Every cell also draws
/// one direction from the single-scattering lobe (a visible normal, then
/// reflection or refraction), and both are weighted with the balance
/// heuristic so that narrow lobes do not dominate the variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FurnacePlan {
    pub strata: usize,
    pub seed: u64,
}

impl FurnacePlan {
    /// About `n` evaluations in total, two per stratum.
    pub fn new(n: u64, seed: u64) -> Self {
        FurnacePlan { strata: (sqrt(n as f64 / 2.0) as usize).max(1), seed }
    }

    /// Evaluates one row of the stratification with its own stream.
    pub fn run_row(&self, omega_i: Vec3, mat: &MaterialSpec, conv: &EvalConventions, row: usize) -> FurnaceTally {
        let m = self.strata;
        let (z_lo, span) = if mat.is_dielectric() { (-1.0, 2.0) } else { (0.0, 1.0) };
        let uniform_pdf = 1.0 / (2.0 * PI * span);
        let mut tally = FurnaceTally::default();
        let mut rs = RandomStream::with_stream(self.seed, row as u64);
        for col in 0..m {
            let (u, v) = rs.next_2d();
            let z = z_lo + span * (row as f64 + u) / m as f64;
            let phi = 2.0 * PI * (col as f64 + v) / m as f64;
            let r = safe_sqrt(1.0 - z * z);
            let (s, c) = sin_cos(phi);
            let mut value = 0.0;
            let mut candidates = [Some(Vec3::new(r * c, r * s, z)), lobe_direction(omega_i, mat, &mut rs)];
            for wo in candidates.iter_mut().flatten() {
                if !mat.is_dielectric() && wo.z <= 0.0 {
                    continue;
                }
                let q = BsdfQuery::new(omega_i, *wo, *mat).with_conventions(*conv);
                let f = eval_pt_with(&q, &mut rs, &mut tally.diagnostics).average() * wo.z.abs();
                let pdf = 0.5 * (uniform_pdf + first_bounce_pdf(omega_i, *wo, mat));
                value += 0.5 * f / pdf;
            }
            tally.sum += value;
            tally.sum_sq += value * value;
            tally.count += 1;

            match sample_with(omega_i, mat, conv, &mut rs, &mut tally.diagnostics) {
                Some(rec) => tally.sampler_sum += rec.weight.average(),
                None => tally.sampler_failures += 1,
            }
            tally.sampler_count += 1;
        }
        tally
    }

    /// Rows merged in order. Merging per-row tallies in row order from any
    /// parallel schedule reproduces this bit for bit.
    pub fn run_rows(&self, omega_i: Vec3, mat: &MaterialSpec, conv: &EvalConventions, rows: Range<usize>) -> FurnaceTally {
        let mut tally = FurnaceTally::default();
        for row in rows {
            tally.merge(&self.run_row(omega_i, mat, conv, row));
        }
        tally
    }
}

// One direction from the single-scattering lobe of `omega_i`.
fn lobe_direction(omega_i: Vec3, mat: &MaterialSpec, rs: &mut RandomStream) -> Option<Vec3> {
    let s0 = mat.side_of(omega_i);
    let w = s0.local(omega_i);
    let m = mat.roughness.sample_vndf(w, rs)?.m;
    let o = if mat.is_dielectric() && rs.next_f64() >= mat.dielectric_fresnel(w.dot(m), s0) {
        refract(-w, m, mat.eta(s0.flip()) / mat.eta(s0))?
    } else {
        reflect(-w, m)
    };
    s0.local(o).try_normalize()
}

/// Serial furnace test with about `n` evaluation samples and as many sampler
/// walks.
pub fn furnace_albedo(
    omega_i: Vec3,
    mat: &MaterialSpec,
    conv: &EvalConventions,
    n: u64,
    rs: &mut RandomStream,
) -> FurnaceReport {
    let plan = FurnacePlan::new(n, rs.next_u64());
    plan.run_rows(omega_i, mat, conv, 0..plan.strata).report()
}
