use crate::geometry::Vec3;
use crate::math::{atan, atan2, cos, exp, sqr, sqrt, tan, INV_PI, PI};
use crate::microfacet::{NdfFamily, RoughnessProfile};

use super::quadrature::gauss_legendre;

/// Smith Lambda by brute-force integration of the projected visible area
/// `int <w . m> D(m) dm` in slope space, for an upward `w`.
///
/// The positive part of `w . m` cuts the slope plane along a line; for each
/// azimuth the radial integral stops at that line, so the integrand is
/// smooth on every panel. 128 azimuths times 64 radial nodes.
pub fn lambda_numeric(w: Vec3, p: &RoughnessProfile) -> f64 {
    lambda_numeric_with(w, p, 64, 64)
}

pub fn lambda_numeric_with(w: Vec3, p: &RoughnessProfile, n_phi_half: usize, n_r: usize) -> f64 {
    let wz = w.z;
    assert!(wz > 0.0, "lambda_numeric needs an upward direction");
    // In stretched slopes (u, v) the projected area of a facet seen from w is
    // wz - b . (u, v); the slope density is the unit-roughness one.
    let bx = p.alpha_x() * w.x;
    let by = p.alpha_y() * w.y;
    let b = sqrt(bx * bx + by * by);
    if b == 0.0 {
        return 0.0;
    }
    let phi0 = atan2(by, bx);
    let family = p.family();
    let phi_rule = gauss_legendre(n_phi_half);
    let r_rule = gauss_legendre(n_r);

    let radial = |c: f64| -> f64 {
        // r = tan(beta), beta in [0, beta_max]
        let beta_max = if c > 0.0 { atan(wz / (b * c)) } else { 0.5 * PI };
        let half = 0.5 * beta_max;
        r_rule
            .iter()
            .map(|&(x, wgt)| {
                let beta = half * (x + 1.0);
                let r = tan(beta);
                let sec2 = 1.0 + r * r;
                let density = match family {
                    NdfFamily::Ggx => INV_PI / sqr(sec2),
                    NdfFamily::Beckmann => INV_PI * exp(-r * r),
                };
                wgt * half * (wz - b * r * c) * density * r * sec2
            })
            .sum()
    };

    let mut total = 0.0;
    // the line is crossed on the front half of the azimuths only
    for (lo, hi) in [(phi0 - 0.5 * PI, phi0 + 0.5 * PI), (phi0 + 0.5 * PI, phi0 + 1.5 * PI)] {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for &(x, wgt) in &phi_rule {
            let phi = mid + half * x;
            total += wgt * half * radial(cos(phi - phi0));
        }
    }
    total / wz - 1.0
}
