//! Per-bounce lobe tables and reflected/transmitted energy totals.

use std::fmt::Write as _;

use posfree_core::estimators::{eval_pt_by_bounce, sample_with};
use posfree_core::oracles::QuadratureGrid;
use posfree_core::{eval_single_bounce, BsdfQuery, Diagnostics, EvalConventions, MaterialSpec, RandomStream, Rgb, Vec3};
use rayon::prelude::*;

/// Column order of [`LobeTable::to_csv`].
pub const CSV_HEADER: &str = "theta_o_deg,phi_o_deg,rho_1,rho_2,rho_3plus,rho_total,single_bounce";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeRow {
    pub omega_o: Vec3,
    /// Quadrature weight of the node (solid angle).
    pub weight: f64,
    /// Paths with 1, 2 and 3 or more bounces, channel average.
    pub by_bounce: [f64; 3],
    pub total: f64,
    /// Closed-form single-scattering BSDF, channel average.
    pub single_bounce: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LobeTable {
    pub omega_i: Vec3,
    pub rows: Vec<LobeRow>,
    /// Reflected energy from quadrature of the tabulated lobe.
    pub e_r: f64,
    /// Transmitted energy from quadrature of the tabulated lobe.
    pub e_t: f64,
    /// Reflected and transmitted energy from sampler exit tallies.
    pub sampler_e_r: f64,
    pub sampler_e_t: f64,
    /// Share of the tabulated energy carried by 1, 2 and 3+ bounces.
    pub bounce_share: [f64; 3],
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeSettings {
    /// Gauss-Legendre nodes in `cos theta` per hemisphere.
    pub n_theta: usize,
    pub n_phi: usize,
    /// Walks per node.
    pub samples_per_node: usize,
    /// Sampler walks for the tally estimate.
    pub sampler_walks: usize,
    pub seed: u64,
}

impl Default for LobeSettings {
    fn default() -> Self {
        LobeSettings { n_theta: 16, n_phi: 32, samples_per_node: 1024, sampler_walks: 100_000, seed: 0 }
    }
}

pub fn lobe_tabulate(omega_i: Vec3, mat: &MaterialSpec, conv: &EvalConventions, s: &LobeSettings) -> LobeTable {
    let grid = QuadratureGrid::gauss_legendre(s.n_theta, s.n_phi);
    let nodes = if mat.is_dielectric() { grid.sphere_nodes() } else { grid.hemisphere_nodes() };
    let reflected_side = mat.side_of(omega_i);

    let evaluated: Vec<(LobeRow, Diagnostics)> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, &(wo, weight))| {
            let mut rs = RandomStream::with_stream(s.seed, i as u64);
            let q = BsdfQuery::new(omega_i, wo, *mat).with_conventions(*conv).with_samples(s.samples_per_node);
            let mut per = [Rgb::ZERO; 3];
            let total = eval_pt_by_bounce(&q, &mut rs, &mut per);
            let diag = Diagnostics { walks: s.samples_per_node as u64, ..Diagnostics::default() };
            let row = LobeRow {
                omega_o: wo,
                weight,
                by_bounce: [per[0].average(), per[1].average(), per[2].average()],
                total: total.average(),
                single_bounce: eval_single_bounce(omega_i, wo, mat).average(),
            };
            (row, diag)
        })
        .collect();

    let mut diagnostics = Diagnostics::default();
    let (mut e_r, mut e_t, mut shares) = (0.0, 0.0, [0.0; 3]);
    let mut rows = Vec::with_capacity(evaluated.len());
    for (row, diag) in evaluated {
        diagnostics.merge(&diag);
        let w = row.weight * row.omega_o.z.abs();
        if mat.side_of(row.omega_o) == reflected_side {
            e_r += row.total * w;
        } else {
            e_t += row.total * w;
        }
        for (share, v) in shares.iter_mut().zip(row.by_bounce) {
            *share += v * w;
        }
        rows.push(row);
    }
    let energy = e_r + e_t;
    if energy > 0.0 {
        shares.iter_mut().for_each(|v| *v /= energy);
    }

    let mut rs = RandomStream::with_stream(s.seed, u64::MAX);
    let (mut sr, mut st) = (0.0, 0.0);
    for _ in 0..s.sampler_walks {
        if let Some(rec) = sample_with(omega_i, mat, conv, &mut rs, &mut diagnostics) {
            if mat.side_of(rec.omega_o) == reflected_side {
                sr += rec.weight.average();
            } else {
                st += rec.weight.average();
            }
        }
    }
    let m = s.sampler_walks.max(1) as f64;

    LobeTable {
        omega_i,
        rows,
        e_r,
        e_t,
        sampler_e_r: sr / m,
        sampler_e_t: st / m,
        bounce_share: shares,
        diagnostics,
    }
}

impl LobeTable {
    /// CSV with the columns of [`CSV_HEADER`]; angles in degrees.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let phi = r.omega_o.phi().to_degrees();
            let _ = writeln!(
                out,
                "{:.6},{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                r.omega_o.theta().to_degrees(),
                if phi < 0.0 { phi + 360.0 } else { phi },
                r.by_bounce[0],
                r.by_bounce[1],
                r.by_bounce[2],
                r.total,
                r.single_bounce
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "E_r = {:.6}\nE_t = {:.6}\nE_r + E_t = {:.6}\nsampler E_r = {:.6}\nsampler E_t = {:.6}\n\
             bounce share: 1 = {:.4}, 2 = {:.4}, 3+ = {:.4}\n",
            self.e_r,
            self.e_t,
            self.e_r + self.e_t,
            self.sampler_e_r,
            self.sampler_e_t,
            self.bounce_share[0],
            self.bounce_share[1],
            self.bounce_share[2]
        )
    }
}
