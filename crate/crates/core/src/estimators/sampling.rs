use super::walk::sample_step;
use super::Diagnostics;
use crate::geometry::Vec3;
use crate::material::MaterialSpec;
use crate::path::EvalConventions;
use crate::rng::RandomStream;
use crate::spectrum::Rgb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleSide {
    Reflected,
    Transmitted,
}

/// An outgoing direction drawn by the random walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub omega_o: Vec3,
    /// Product of the Fresnel factors along the walk for conductors, exactly
    /// one for dielectrics. Equals `rho |cos theta_o| / pdf` under the
    /// cancellation-consistent convention.
    pub weight: Rgb,
    pub bounce_count: usize,
    pub side: SampleSide,
}

/// Draws `omega_o` for light arriving from `omega_i`. Returns `None` when
/// the walk is still inside the surface after `conv.max_bounces` bounces.
pub fn sample(omega_i: Vec3, mat: &MaterialSpec, conv: &EvalConventions, rs: &mut RandomStream) -> Option<SampleRecord> {
    sample_with(omega_i, mat, conv, rs, &mut Diagnostics::default())
}

pub fn sample_with(
    omega_i: Vec3,
    mat: &MaterialSpec,
    conv: &EvalConventions,
    rs: &mut RandomStream,
    diag: &mut Diagnostics,
) -> Option<SampleRecord> {
    let s0 = mat.side_of(omega_i);
    let mut d = -omega_i;
    let mut s = s0;
    let mut weight = Rgb::ONE;
    diag.walks += 1;
    for bounce in 1..=conv.max_bounces {
        let Some(step) = sample_step(mat, d, s, rs) else {
            diag.sampling_failures += 1;
            return None;
        };
        if !mat.is_dielectric() {
            weight *= step.vertex.fresnel(mat);
        }
        d = step.dir;
        s = step.side;
        if let Some(g) = step.leave {
            if rs.next_f64() < g {
                let side = if s == s0 { SampleSide::Reflected } else { SampleSide::Transmitted };
                return Some(SampleRecord { omega_o: d, weight, bounce_count: bounce, side });
            }
        }
    }
    diag.truncated_walks += 1;
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fresnel::ConductorIor;
    use crate::microfacet::RoughnessProfile;

    #[test]
    fn dielectric_weights_are_exactly_one() {
        let mat = MaterialSpec::dielectric(1.5, RoughnessProfile::ggx(0.8));
        let conv = EvalConventions::default();
        let mut rs = RandomStream::new(2);
        let mut transmitted = 0;
        for i in 0..20_000 {
            let wi = if i % 2 == 0 { Vec3::from_spherical(0.7, 0.0) } else { Vec3::from_spherical(2.6, 0.0) };
            if let Some(r) = sample(wi, &mat, &conv, &mut rs) {
                assert_eq!(r.weight, Rgb::ONE);
                if r.side == SampleSide::Transmitted {
                    transmitted += 1;
                    assert!(r.omega_o.z * wi.z < 0.0);
                } else {
                    assert!(r.omega_o.z * wi.z > 0.0);
                }
            }
        }
        assert!(transmitted > 5000);
    }

    #[test]
    fn conductor_never_reports_downward_directions() {
        let mat = MaterialSpec::conductor(ConductorIor::GOLD, RoughnessProfile::beckmann(1.0));
        let conv = EvalConventions::default();
        let mut rs = RandomStream::new(3);
        for _ in 0..20_000 {
            if let Some(r) = sample(Vec3::from_spherical(1.3, 0.4), &mat, &conv, &mut rs) {
                assert!(r.omega_o.z > 0.0);
                assert_eq!(r.side, SampleSide::Reflected);
                assert!(r.weight.max_channel() <= 1.0);
            }
        }
    }

    #[test]
    fn white_conductor_walks_almost_always_exit() {
        let mat = MaterialSpec::white_conductor(RoughnessProfile::ggx(1.0));
        let conv = EvalConventions::default();
        let mut rs = RandomStream::new(4);
        let n = 100_000;
        let mut diag = Diagnostics::default();
        let ok = (0..n)
            .filter(|_| sample_with(Vec3::from_spherical(1.4, 0.0), &mat, &conv, &mut rs, &mut diag).is_some())
            .count();
        assert!(ok as f64 / n as f64 > 0.999);
        assert_eq!(diag.walks, n as u64);
    }
}
