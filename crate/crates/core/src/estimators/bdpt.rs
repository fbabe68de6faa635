use alloc::vec::Vec;

use super::walk::trace_subpath;
use super::{accumulate, BsdfQuery, Diagnostics};
use crate::geometry::Vec3;
use crate::material::MaterialSpec;
use crate::path::{path_contribution, step_pdf, Side};
use crate::rng::RandomStream;
use crate::spectrum::Rgb;

/// Bidirectional estimate of `rho(omega_i, omega_o)`: a camera subpath from
/// `-omega_i` and a light subpath from `-omega_o`, joined at every split and
/// weighted with the balance heuristic.
pub fn eval_bdpt(q: &BsdfQuery, rs: &mut RandomStream) -> Rgb {
    eval_bdpt_with(q, rs, &mut Diagnostics::default())
}

pub fn eval_bdpt_with(q: &BsdfQuery, rs: &mut RandomStream, diag: &mut Diagnostics) -> Rgb {
    let mat = &q.mat;
    let k_max = q.conv.max_bounces;
    let s_i = mat.side_of(q.omega_i);
    let s_o = mat.side_of(q.omega_o);
    let mut sum = Rgb::ZERO;
    let mut dirs = Vec::with_capacity(k_max + 1);
    let mut sides = Vec::with_capacity(k_max + 1);
    let mut pdfs = Vec::with_capacity(k_max);

    for _ in 0..q.n_samples {
        let camera = trace_subpath(mat, -q.omega_i, s_i, k_max - 1, rs, diag);
        let light = trace_subpath(mat, -q.omega_o, s_o, k_max - 1, rs, diag);
        for s in 1..=camera.dirs.len() {
            for t in 1..=light.dirs.len() {
                if s + t > k_max + 1 {
                    break;
                }
                dirs.clear();
                sides.clear();
                dirs.extend_from_slice(&camera.dirs[..s]);
                sides.extend_from_slice(&camera.sides[..s]);
                for j in (0..t).rev() {
                    dirs.push(-light.dirs[j]);
                    sides.push(light.sides[j]);
                }
                let f = path_contribution(&dirs, &sides, mat, &q.conv);
                if f.is_zero() {
                    continue;
                }
                strategy_pdfs(&dirs, &sides, mat, &mut pdfs);
                let total: f64 = pdfs.iter().sum();
                if pdfs[s - 1] > 0.0 && total > 0.0 {
                    accumulate(&mut sum, f / total, diag);
                }
            }
        }
    }
    sum / q.n_samples as f64
}

/// Densities of producing the path with each split: entry `s - 1` is the
/// density when the camera subpath supplies directions `0 .. s` and the light
/// subpath the rest.
pub(crate) fn strategy_pdfs(dirs: &[Vec3], sides: &[Side], mat: &MaterialSpec, out: &mut Vec<f64>) {
    let n = dirs.len();
    out.clear();
    // forward[j]: density of d_j given d_{j-1}; reverse[j]: of d_j given d_{j+1}
    let mut fwd = alloc::vec![0.0; n];
    let mut rev = alloc::vec![0.0; n];
    for j in 1..n - 1 {
        fwd[j] = step_pdf(mat, dirs[j - 1], sides[j - 1], dirs[j], sides[j]);
        rev[j] = step_pdf(mat, -dirs[j + 1], sides[j + 1], -dirs[j], sides[j]);
    }
    for s in 1..n {
        let camera: f64 = fwd[1..s].iter().product();
        let light: f64 = rev[s..n - 1].iter().product();
        out.push(camera * light);
    }
}

/// Balance-heuristic weights of every split strategy for a path.
pub fn mis_weights(dirs: &[Vec3], sides: &[Side], mat: &MaterialSpec) -> Vec<f64> {
    let mut pdfs = Vec::new();
    strategy_pdfs(dirs, sides, mat, &mut pdfs);
    let total: f64 = pdfs.iter().sum();
    if total > 0.0 {
        pdfs.iter().map(|p| p / total).collect()
    } else {
        pdfs.iter().map(|_| 0.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::eval_pt;
    use crate::microfacet::RoughnessProfile;
    use crate::path::EvalConventions;

    #[test]
    fn mis_weights_sum_to_one() {
        let mat = MaterialSpec::white_conductor(RoughnessProfile::ggx(1.0));
        let mut rs = RandomStream::new(4);
        let mut diag = Diagnostics::default();
        let mut checked = 0;
        for _ in 0..2000 {
            let cam = trace_subpath(&mat, -Vec3::from_spherical(1.2, 0.0), Side::Outside, 5, &mut rs, &mut diag);
            if cam.dirs.len() < 2 {
                continue;
            }
            let mut dirs = cam.dirs.clone();
            dirs.push(Vec3::from_spherical(0.6, 1.0));
            let sides = alloc::vec![Side::Outside; dirs.len()];
            let w = mis_weights(&dirs, &sides, &mat);
            assert_eq!(w.len(), dirs.len() - 1);
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn single_bounce_limit_matches_pt_exactly() {
        // With one vertex there is a single strategy and no randomness in f.
        let mat = MaterialSpec::dielectric(1.5, RoughnessProfile::beckmann(0.4));
        let conv = EvalConventions::default().with_max_bounces(1);
        let q = BsdfQuery::new(Vec3::from_spherical(0.3, 0.0), Vec3::from_spherical(2.6, 2.0), mat).with_conventions(conv);
        let a = eval_bdpt(&q, &mut RandomStream::new(1));
        let b = eval_pt(&q, &mut RandomStream::new(2));
        assert!((a[0] - b[0]).abs() < 1e-12 * a[0]);
    }

    #[test]
    fn agrees_with_pt_in_expectation() {
        let mat = MaterialSpec::white_conductor(RoughnessProfile::ggx(1.0));
        let q = BsdfQuery::new(Vec3::from_spherical(1.1, 0.0), Vec3::from_spherical(0.9, 2.2), mat);
        let n = 40_000;
        let (mut a, mut a2, mut b, mut b2) = (0.0, 0.0, 0.0, 0.0);
        let mut rs = RandomStream::new(10);
        for _ in 0..n {
            let x = eval_bdpt(&q, &mut rs)[0];
            let y = eval_pt(&q, &mut rs)[0];
            a += x;
            a2 += x * x;
            b += y;
            b2 += y * y;
        }
        let nf = n as f64;
        let (ma, mb) = (a / nf, b / nf);
        let se = ((a2 / nf - ma * ma) / nf + (b2 / nf - mb * mb) / nf).sqrt();
        assert!((ma - mb).abs() < 4.0 * se, "{ma} vs {mb} (se {se})");
    }
}
