use crate::geometry::Vec3;
use crate::material::MaterialSpec;
use crate::path::{path_contribution, EvalConventions, Side};
use crate::spectrum::Rgb;

use super::quadrature::QuadratureGrid;

/// The two shortest terms of `rho(omega_i, omega_o)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho2 {
    /// Length-2 path (one vertex), exact.
    pub single: Rgb,
    /// Length-3 paths integrated over the interior direction.
    pub double: Rgb,
}

impl Rho2 {
    pub fn total(&self) -> Rgb {
        self.single + self.double
    }
}

/// Deterministic quadrature of the one- and two-bounce part of the BSDF.
///
/// The interior direction is integrated over the sphere, once per medium it
/// may travel in. Panels in `cos theta` break where the integrand has kinks:
/// the horizon and the levels at which a vertex normal crosses it.
pub fn rho2_quadrature(
    omega_i: Vec3,
    omega_o: Vec3,
    mat: &MaterialSpec,
    conv: &EvalConventions,
    grid: &QuadratureGrid,
) -> Rho2 {
    let s0 = mat.side_of(omega_i);
    let s2 = mat.side_of(omega_o);
    let d0 = -omega_i;
    let single = path_contribution(&[d0, omega_o], &[s0, s2], mat, conv);
    let breaks = [0.0, omega_i.z, -omega_i.z, omega_o.z, -omega_o.z];
    let nodes = grid.band_nodes(-1.0, 1.0, &breaks);
    let media: &[Side] = if mat.is_dielectric() { &[Side::Outside, Side::Inside] } else { &[Side::Outside] };
    let mut double = Rgb::ZERO;
    for &s1 in media {
        for &(d1, w) in &nodes {
            let f = path_contribution(&[d0, d1, omega_o], &[s0, s1, s2], mat, conv);
            if f.is_finite() {
                double += f * w;
            }
        }
    }
    Rho2 { single, double }
}
