//! Normal distribution functions, the Smith Lambda function, full-spherical
//! shadowing-masking, and visible-normal sampling.
//!
//! Every query direction may lie in either hemisphere. For directions below
//! the macro surface the Lambda function is continued with
//! `Lambda(-w) = -1 - Lambda(w)`, and the distant masking term is
//! `|1 / (1 + Lambda(w))|`, which equals `1 / Lambda(-w)` there. That value
//! is the normalization of the visible-normal density seen from below and is
//! not bounded by one.

use crate::geometry::Vec3;
use crate::math::{erfc, exp, ln, safe_sqrt, sin_cos, sqr, sqrt, INV_PI, PI, SQRT_PI};
use crate::rng::RandomStream;

/// Smallest roughness accepted; `alpha = 0` would make `D` a delta.
pub const MIN_ALPHA: f64 = 1e-4;
/// Grazing clamp for `|cos theta|` in Lambda and density denominators.
pub const COS_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NdfFamily {
    Beckmann,
    Ggx,
}

/// An NDF family with anisotropic roughness `(alpha_x, alpha_y)` aligned to
/// the local tangent frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughnessProfile {
    family: NdfFamily,
    alpha_x: f64,
    alpha_y: f64,
}

/// A visible microfacet normal and its density per solid angle of `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicronormalSample {
    pub m: Vec3,
    pub density: f64,
}

/// Local masking: `1` if `w . m > 0`, else `0`.
#[inline]
pub fn g1_local(w: Vec3, m: Vec3) -> f64 {
    if w.dot(m) > 0.0 {
        1.0
    } else {
        0.0
    }
}

impl RoughnessProfile {
    /// Roughness values are clamped to `[MIN_ALPHA, 4]`.
    pub fn new(family: NdfFamily, alpha_x: f64, alpha_y: f64) -> Self {
        let clamp = |a: f64| if a.is_nan() { MIN_ALPHA } else { a.clamp(MIN_ALPHA, 4.0) };
        RoughnessProfile { family, alpha_x: clamp(alpha_x), alpha_y: clamp(alpha_y) }
    }

    pub fn isotropic(family: NdfFamily, alpha: f64) -> Self {
        Self::new(family, alpha, alpha)
    }

    pub fn ggx(alpha: f64) -> Self {
        Self::isotropic(NdfFamily::Ggx, alpha)
    }

    pub fn beckmann(alpha: f64) -> Self {
        Self::isotropic(NdfFamily::Beckmann, alpha)
    }

    pub fn family(&self) -> NdfFamily {
        self.family
    }

    pub fn alpha_x(&self) -> f64 {
        self.alpha_x
    }

    pub fn alpha_y(&self) -> f64 {
        self.alpha_y
    }

    pub fn is_isotropic(&self) -> bool {
        self.alpha_x == self.alpha_y
    }

    /// Copy with a different isotropic roughness (spatially varying roughness).
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self::isotropic(self.family, alpha)
    }

    /// Normal distribution `D(m)`, zero below the macro horizon.
    ///
    /// Normalized so that the projected area `D(m) (m . z)` integrates to one.
    pub fn d(&self, m: Vec3) -> f64 {
        if m.z <= 0.0 {
            return 0.0;
        }
        let (ax, ay) = (self.alpha_x, self.alpha_y);
        match self.family {
            NdfFamily::Ggx => {
                let denom = sqr(m.x / ax) + sqr(m.y / ay) + sqr(m.z);
                INV_PI / (ax * ay * sqr(denom))
            }
            NdfFamily::Beckmann => {
                let cos2 = sqr(m.z);
                let tan2_over_a2 = (sqr(m.x / ax) + sqr(m.y / ay)) / cos2;
                exp(-tan2_over_a2) * INV_PI / (ax * ay * sqr(cos2))
            }
        }
    }

    /// Smith `Lambda(w)` on the full sphere.
    pub fn lambda(&self, w: Vec3) -> f64 {
        if w.z < 0.0 {
            -1.0 - self.lambda_upper(-w)
        } else {
            self.lambda_upper(w)
        }
    }

    // Closed form for the upper hemisphere, `w.z >= 0`.
    fn lambda_upper(&self, w: Vec3) -> f64 {
        let cos = w.z.max(COS_EPSILON);
        // (alpha_proj * tan theta)^2
        let a2t2 = (sqr(self.alpha_x * w.x) + sqr(self.alpha_y * w.y)) / sqr(cos);
        if a2t2 <= 0.0 {
            return 0.0;
        }
        match self.family {
            NdfFamily::Ggx => {
                // (sqrt(1 + x) - 1) / 2 without cancellation for small x
                let s = sqrt(1.0 + a2t2);
                0.5 * a2t2 / (s + 1.0)
            }
            NdfFamily::Beckmann => {
                let a = 1.0 / sqrt(a2t2);
                if a > 26.0 {
                    return 0.0;
                }
                0.5 * (exp(-a * a) / (a * SQRT_PI) - erfc(a))
            }
        }
    }

    /// Distant masking `|1 / (1 + Lambda(w))|` with the sign split on `w . z`.
    pub fn g1_dist(&self, w: Vec3) -> f64 {
        if w.z > 0.0 {
            1.0 / (1.0 + self.lambda_upper(w))
        } else {
            let lam = self.lambda_upper(-w);
            if lam > 0.0 {
                1.0 / lam
            } else if w.z == 0.0 {
                0.0
            } else {
                // Looking straight up at the underside: no facet is visible.
                f64::INFINITY
            }
        }
    }

    /// Full-spherical masking `G1(w, m) = G1_local(w, m) G1_dist(w)`.
    pub fn g1(&self, w: Vec3, m: Vec3) -> f64 {
        if w.dot(m) > 0.0 {
            self.g1_dist(w)
        } else {
            0.0
        }
    }

    /// Density of visible normals seen from `w`, per solid angle of `m`.
    pub fn pdf_vndf(&self, w: Vec3, m: Vec3) -> f64 {
        let wm = w.dot(m);
        if wm <= 0.0 || m.z <= 0.0 {
            return 0.0;
        }
        let g1 = self.g1_dist(w);
        if !g1.is_finite() {
            return 0.0;
        }
        g1 * wm * self.d(m) / w.z.abs().max(COS_EPSILON)
    }

    /// Draws `m` with density [`pdf_vndf`](Self::pdf_vndf).
    ///
    /// Returns `None` only when no facet is visible from `w` (looking
    /// straight up at the underside) or on numerical breakdown.
    pub fn sample_vndf(&self, w: Vec3, rs: &mut RandomStream) -> Option<MicronormalSample> {
        let m = match self.family {
            NdfFamily::Ggx => self.sample_ggx_vndf(w, rs)?,
            NdfFamily::Beckmann => self.sample_beckmann_vndf(w, rs)?,
        };
        let density = self.pdf_vndf(w, m);
        if density > 0.0 && density.is_finite() {
            Some(MicronormalSample { m, density })
        } else {
            None
        }
    }

    // Spherical-cap construction in the stretched (alpha = 1) configuration.
    // It is exact for query directions in either hemisphere.
    fn sample_ggx_vndf(&self, w: Vec3, rs: &mut RandomStream) -> Option<Vec3> {
        let (ax, ay) = (self.alpha_x, self.alpha_y);
        let wi = Vec3::new(ax * w.x, ay * w.y, w.z).try_normalize()?;
        let (u1, u2) = rs.next_2d();
        let cap = 1.0 + wi.z;
        if cap <= 1e-12 {
            return None;
        }
        let z = (1.0 - u2) * cap - wi.z;
        let r = safe_sqrt(1.0 - z * z);
        let (sp, cp) = sin_cos(2.0 * PI * u1);
        let h = Vec3::new(r * cp, r * sp, z) + wi;
        Vec3::new(ax * h.x, ay * h.y, h.z.max(0.0)).try_normalize()
    }

    // Slope-space sampling: the visible slope along the (stretched) azimuth of
    // `w` is found by safeguarded Newton inversion of its CDF; the orthogonal
    // slope is Gaussian.
    fn sample_beckmann_vndf(&self, w: Vec3, rs: &mut RandomStream) -> Option<Vec3> {
        let (ax, ay) = (self.alpha_x, self.alpha_y);
        let wi = Vec3::new(ax * w.x, ay * w.y, w.z).try_normalize()?;
        let sin = sqrt(sqr(wi.x) + sqr(wi.y));
        let (u1, u2, u3) = (rs.next_f64(), rs.next_f64(), rs.next_f64());
        let gauss = |u: f64, v: f64| safe_sqrt(-ln(1.0 - u)) * crate::math::cos(2.0 * PI * v);

        let (sx, sy) = if sin < 1e-9 {
            if wi.z < 0.0 {
                return None;
            }
            let r = safe_sqrt(-ln(1.0 - u1));
            let (s, c) = sin_cos(2.0 * PI * u3);
            (r * c, r * s)
        } else {
            let cot = wi.z / sin;
            let x = beckmann_visible_slope(cot, u1)?;
            let y = gauss(u2, u3);
            let (cphi, sphi) = (wi.x / sin, wi.y / sin);
            (cphi * x - sphi * y, sphi * x + cphi * y)
        };
        Vec3::new(-sx * ax, -sy * ay, 1.0).try_normalize()
    }
}

// Inverts the CDF of the standard Beckmann visible slope `x < cot`, whose
// density is proportional to `exp(-x^2) (cot - x)`.
fn beckmann_visible_slope(cot: f64, u: f64) -> Option<f64> {
    // Unnormalized CDF: cot * (1 + erf x) / 2 + exp(-x^2) / (2 sqrt(pi)).
    let cdf = |x: f64| 0.5 * cot * erfc(-x) + exp(-x * x) / (2.0 * SQRT_PI);
    let total = cdf(cot);
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let target = u.clamp(1e-12, 1.0 - 1e-12) * total;

    let mut hi = cot;
    let mut lo = cot.min(0.0) - 1.0;
    let mut step = 1.0;
    while cdf(lo) > target {
        step *= 2.0;
        lo -= step;
        if step > 1e3 {
            return None;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let value = cdf(x) - target;
        if value.abs() <= 1e-14 * total {
            break;
        }
        if value > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let density = exp(-x * x) / SQRT_PI * (cot - x);
        let newton = x - value / density;
        x = if density > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(theta_deg: f64, phi_deg: f64) -> Vec3 {
        Vec3::from_spherical(theta_deg.to_radians(), phi_deg.to_radians())
    }

    #[test]
    fn ggx_d_at_normal() {
        let p = RoughnessProfile::ggx(1.0);
        assert!((p.d(Vec3::Z) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(p.d(-Vec3::Z), 0.0);
    }

    #[test]
    fn isotropic_d_is_rotation_invariant() {
        for p in [RoughnessProfile::ggx(0.4), RoughnessProfile::beckmann(0.4)] {
            let base = p.d(dir(20.0, 0.0));
            for phi in [30.0, 95.0, 200.0, 333.0] {
                assert!((p.d(dir(20.0, phi)) - base).abs() < 1e-12 * base);
            }
        }
    }

    #[test]
    fn lambda_examples() {
        let p = RoughnessProfile::ggx(1.0);
        assert_eq!(p.lambda(Vec3::Z), 0.0);
        let l = p.lambda(dir(45.0, 0.0));
        assert!((l - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!((p.g1_dist(dir(45.0, 0.0)) - 1.0 / (1.0 + l)).abs() < 1e-12);
        assert!((p.g1_dist(dir(45.0, 0.0)) - 0.828_427_124_746_19).abs() < 1e-9);
    }

    #[test]
    fn lambda_antisymmetry_and_downward_g1() {
        for p in [
            RoughnessProfile::ggx(0.7),
            RoughnessProfile::beckmann(0.7),
            RoughnessProfile::new(NdfFamily::Ggx, 0.1, 1.0),
        ] {
            for t in [5.0, 30.0, 60.0, 85.0] {
                for phi in [0.0, 40.0, 135.0] {
                    let w = dir(t, phi);
                    assert!((p.lambda(-w) - (-1.0 - p.lambda(w))).abs() < 1e-12);
                    assert!((p.g1_dist(-w) - 1.0 / p.lambda(w)).abs() < 1e-9 * p.g1_dist(-w));
                    assert!(p.g1_dist(w) <= 1.0 && p.g1_dist(w) > 0.0);
                }
            }
        }
    }

    #[test]
    fn g1_examples() {
        let p = RoughnessProfile::ggx(0.5);
        assert_eq!(p.g1(Vec3::Z, Vec3::Z), 1.0);
        assert_eq!(g1_local(Vec3::Z, Vec3::Z), 1.0);
        assert_eq!(g1_local(Vec3::Z, -Vec3::Z), 0.0);
        assert_eq!(g1_local(Vec3::X, Vec3::Z), 0.0);
        let w = dir(50.0, 10.0);
        assert_eq!(p.g1(w, -w), 0.0);
    }

    #[test]
    fn anisotropic_reduces_to_isotropic() {
        let a = RoughnessProfile::new(NdfFamily::Beckmann, 0.3, 0.3);
        let b = RoughnessProfile::beckmann(0.3);
        for t in [0.0, 10.0, 45.0, 80.0, 100.0, 170.0] {
            let w = dir(t, 33.0);
            assert!((a.d(w) - b.d(w)).abs() <= 1e-9 * b.d(w).max(1e-300));
            assert!((a.lambda(w) - b.lambda(w)).abs() <= 1e-9);
        }
    }

    #[test]
    fn near_smooth_samples_cluster_at_normal() {
        let p = RoughnessProfile::ggx(1e-4);
        let mut rs = RandomStream::new(17);
        let w = dir(40.0, 0.0);
        let n = 100_000;
        let mut far = 0;
        for _ in 0..n {
            let s = p.sample_vndf(w, &mut rs).unwrap();
            if s.m.theta() > 0.01 {
                far += 1;
            }
        }
        assert!((far as f64) < 1e-3 * n as f64, "{far}");
    }

    #[test]
    fn samples_are_visible_and_density_matches() {
        let mut rs = RandomStream::new(23);
        for p in [
            RoughnessProfile::ggx(0.8),
            RoughnessProfile::beckmann(0.8),
            RoughnessProfile::new(NdfFamily::Beckmann, 0.1, 1.0),
        ] {
            for t in [0.0, 30.0, 60.0, 85.0, 95.0, 130.0, 170.0] {
                let w = dir(t, 25.0);
                for _ in 0..2000 {
                    let s = p.sample_vndf(w, &mut rs).unwrap();
                    assert!(w.dot(s.m) > 0.0 && s.m.z > 0.0);
                    assert!((s.density - p.pdf_vndf(w, s.m)).abs() <= 1e-7 * s.density);
                }
            }
        }
    }

    #[test]
    fn straight_up_from_below_sees_nothing() {
        let p = RoughnessProfile::ggx(0.5);
        let mut rs = RandomStream::new(1);
        assert!(p.sample_vndf(-Vec3::Z, &mut rs).is_none());
        assert_eq!(p.pdf_vndf(-Vec3::Z, Vec3::Z), 0.0);
    }

    #[test]
    fn beckmann_slope_inversion_hits_target() {
        for cot in [-3.0, -0.5, 0.0, 0.3, 2.0, 8.0] {
            for u in [0.001, 0.2, 0.5, 0.9, 0.999] {
                let x = beckmann_visible_slope(cot, u).unwrap();
                let cdf = |x: f64| 0.5 * cot * erfc(-x) + exp(-x * x) / (2.0 * SQRT_PI);
                assert!(x <= cot);
                assert!((cdf(x) / cdf(cot) - u).abs() < 1e-9, "cot {cot} u {u}");
            }
        }
    }
}
