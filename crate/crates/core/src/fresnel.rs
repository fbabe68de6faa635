//! Exact unpolarized Fresnel reflectance.

use crate::math::{safe_sqrt, sqr};
use crate::spectrum::Rgb;

/// Complex index of refraction `eta + i kappa` of a conductor, per channel,
/// relative to the exterior medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConductorIor {
    pub eta: Rgb,
    pub kappa: Rgb,
}

impl ConductorIor {
    pub const COPPER: ConductorIor = ConductorIor {
        eta: Rgb::new(0.200_438, 0.924_033, 1.102_212),
        kappa: Rgb::new(3.912_949, 2.452_848, 2.142_188),
    };
    pub const GOLD: ConductorIor = ConductorIor {
        eta: Rgb::new(0.143_119, 0.374_957, 1.442_479),
        kappa: Rgb::new(3.983_160, 2.385_721, 1.603_215),
    };
    pub const ALUMINUM: ConductorIor = ConductorIor {
        eta: Rgb::new(1.657_460, 0.880_369, 0.521_229),
        kappa: Rgb::new(9.223_869, 6.269_523, 4.837_001),
    };
}

/// Relative index of refraction, interior over exterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricIor {
    pub eta: f64,
}

impl DielectricIor {
    pub const GLASS: DielectricIor = DielectricIor { eta: 1.5 };
}

/// Conductor Fresnel for the cosine between the incident direction and the
/// microfacet normal, clamped to `[0, 1]`.
pub fn fresnel_conductor(cos_theta: f64, ior: &ConductorIor) -> Rgb {
    let c = cos_theta.clamp(0.0, 1.0);
    ior.eta.zip(ior.kappa, |eta, k| conductor_channel(c, eta, k))
}

fn conductor_channel(cos: f64, eta: f64, k: f64) -> f64 {
    let cos2 = cos * cos;
    let sin2 = 1.0 - cos2;
    let eta2 = eta * eta;
    let k2 = k * k;
    let t0 = eta2 - k2 - sin2;
    let a2_plus_b2 = safe_sqrt(t0 * t0 + 4.0 * eta2 * k2);
    let t1 = a2_plus_b2 + cos2;
    let a = safe_sqrt(0.5 * (a2_plus_b2 + t0));
    let t2 = 2.0 * cos * a;
    let rs = (t1 - t2) / (t1 + t2);
    let t3 = cos2 * a2_plus_b2 + sin2 * sin2;
    let t4 = t2 * sin2;
    let rp = rs * (t3 - t4) / (t3 + t4);
    (0.5 * (rp + rs)).clamp(0.0, 1.0)
}

/// Dielectric Fresnel. A positive cosine means the light arrives from the
/// exterior side, a negative one from the interior. Returns 1 under total
/// internal reflection.
pub fn fresnel_dielectric(cos_theta_signed: f64, ior: DielectricIor) -> f64 {
    let (cos_i, eta) = if cos_theta_signed < 0.0 {
        (-cos_theta_signed, 1.0 / ior.eta)
    } else {
        (cos_theta_signed, ior.eta)
    };
    let cos_i = cos_i.min(1.0);
    let sin2_t = (1.0 - cos_i * cos_i) / sqr(eta);
    if sin2_t >= 1.0 {
        return 1.0;
    }
    let cos_t = safe_sqrt(1.0 - sin2_t);
    let r_parallel = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
    let r_perpendicular = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
    (0.5 * (sqr(r_parallel) + sqr(r_perpendicular))).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    // Textbook s/p amplitude coefficients with a complex index.
    fn complex_fresnel(cos: f64, eta: f64, k: f64) -> f64 {
        let n = Complex64::new(eta, k);
        let sin2 = 1.0 - cos * cos;
        let root = (n * n - sin2).sqrt();
        let rs = (cos - root) / (cos + root);
        let rp = (n * n * cos - root) / (n * n * cos + root);
        0.5 * (rs.norm_sqr() + rp.norm_sqr())
    }

    #[test]
    fn conductor_matches_complex_formula() {
        let ior = ConductorIor::COPPER;
        for cos in [1.0, 0.9, 0.5, 0.2, 0.05] {
            let f = fresnel_conductor(cos, &ior);
            for c in 0..3 {
                let want = complex_fresnel(cos, ior.eta[c], ior.kappa[c]);
                assert!((f[c] - want).abs() < 1e-6, "cos {cos} ch {c}: {} vs {want}", f[c]);
            }
        }
    }

    #[test]
    fn conductor_limits() {
        let mirror = ConductorIor { eta: Rgb::splat(1.0), kappa: Rgb::splat(1e7) };
        assert!(fresnel_conductor(0.7, &mirror).min_channel() > 1.0 - 1e-6);
        let f = fresnel_conductor(0.0, &ConductorIor::GOLD);
        assert!(f.min_channel() > 1.0 - 1e-12);
    }

    #[test]
    fn dielectric_examples() {
        let glass = DielectricIor::GLASS;
        assert!((fresnel_dielectric(1.0, glass) - 0.04).abs() < 1e-12);
        // from the dense side beyond the critical angle (~41.8 deg)
        assert_eq!(fresnel_dielectric(-(50f64.to_radians().cos()), glass), 1.0);
        for cos in [-1.0, -0.5, 0.01, 0.3, 1.0] {
            assert!(fresnel_dielectric(cos, DielectricIor { eta: 1.0 }).abs() < 1e-15);
        }
    }

    #[test]
    fn dielectric_is_reciprocal_and_monotone() {
        let glass = DielectricIor::GLASS;
        let mut prev = 0.0;
        for i in 0..=100 {
            let cos_i = 1.0 - i as f64 / 100.0;
            let f = fresnel_dielectric(cos_i, glass);
            assert!((0.0..=1.0).contains(&f));
            assert!(f >= prev - 1e-15);
            prev = f;
            let sin_t = (1.0 - cos_i * cos_i).sqrt() / glass.eta;
            let cos_t = (1.0 - sin_t * sin_t).sqrt();
            let back = fresnel_dielectric(-cos_t, glass);
            assert!((f - back).abs() < 1e-9);
            let inv = fresnel_dielectric(cos_t, DielectricIor { eta: 1.0 / glass.eta });
            assert!((f - inv).abs() < 1e-9);
        }
    }
}
