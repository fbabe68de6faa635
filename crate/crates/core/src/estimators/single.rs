use crate::geometry::Vec3;
use crate::material::{Interface, MaterialSpec};
use crate::math::{sqr, INV_PI};
use crate::path::{Side, Vertex};
use crate::spectrum::Rgb;

/// Weight of the single-scattering lobe in [`pdf_proxy`].
pub const DEFAULT_PROXY_MIX: f64 = 0.5;

/// Closed-form single-scattering microfacet BSDF with separable Smith
/// masking. Conductors are zero unless both directions are above the
/// surface; dielectrics include the transmission lobe.
pub fn eval_single_bounce(omega_i: Vec3, omega_o: Vec3, mat: &MaterialSpec) -> Rgb {
    let rough = &mat.roughness;
    let side = mat.side_of(omega_i);
    let wi = side.local(omega_i);
    let wo = side.local(omega_o);
    let (ci, co) = (wi.z.abs().max(1e-7), wo.z.abs().max(1e-7));
    if wi.z <= 0.0 {
        return Rgb::ZERO;
    }

    if wo.z > 0.0 {
        let Some(h) = (wi + wo).try_normalize() else {
            return Rgb::ZERO;
        };
        let (cos_ih, cos_oh) = (wi.dot(h), wo.dot(h));
        if h.z <= 0.0 || cos_ih <= 0.0 || cos_oh <= 0.0 {
            return Rgb::ZERO;
        }
        let f = match mat.interface {
            Interface::Conductor { .. } => mat.conductor_fresnel(cos_ih),
            Interface::Dielectric(_) => Rgb::splat(mat.dielectric_fresnel(cos_ih, side)),
        };
        let g = rough.g1_dist(wi) * rough.g1_dist(wo);
        return f * (rough.d(h) * g / (4.0 * ci * co));
    }

    if !mat.is_dielectric() || wo.z == 0.0 {
        return Rgb::ZERO;
    }
    let (eta_i, eta_o) = (mat.eta(side), mat.eta(side.flip()));
    let Some(mut h) = (wi * eta_i + wo * eta_o).try_normalize() else {
        return Rgb::ZERO;
    };
    if h.z < 0.0 {
        h = -h;
    }
    let (cos_ih, cos_oh) = (wi.dot(h), wo.dot(h));
    if h.z <= 0.0 || cos_ih <= 0.0 || cos_oh >= 0.0 {
        return Rgb::ZERO;
    }
    let t = 1.0 - mat.dielectric_fresnel(cos_ih, side);
    // the transmitted direction is masked from the far side: flip it
    let g = rough.g1_dist(wi) * rough.g1_dist(-wo);
    let den = sqr(eta_i * cos_ih + eta_o * cos_oh);
    Rgb::splat(cos_ih * cos_oh.abs() * sqr(eta_o) * t * rough.d(h) * g / (ci * co * den))
}

/// Cheap density for MIS in a host renderer: a mixture of the first-bounce
/// sampling density and a cosine lobe, with weight [`DEFAULT_PROXY_MIX`].
pub fn pdf_proxy(omega_i: Vec3, omega_o: Vec3, mat: &MaterialSpec) -> f64 {
    pdf_proxy_with(omega_i, omega_o, mat, DEFAULT_PROXY_MIX)
}

/// [`pdf_proxy`] with an explicit single-scattering weight `mix` in `[0, 1]`.
///
/// The cosine lobe is `max(cos, 0) / pi` for conductors and `|cos| / (2 pi)`
/// for dielectrics, so the mixture integrates to one over the sphere.
pub fn pdf_proxy_with(omega_i: Vec3, omega_o: Vec3, mat: &MaterialSpec, mix: f64) -> f64 {
    let mix = mix.clamp(0.0, 1.0);
    let single = first_bounce_pdf(omega_i, omega_o, mat);
    let diffuse = if mat.is_dielectric() {
        0.5 * omega_o.z.abs() * INV_PI
    } else {
        omega_o.z.max(0.0) * INV_PI
    };
    mix * single + (1.0 - mix) * diffuse
}

/// Density of the direction left after one visible-normal step from
/// `omega_i`, over every branch that can reach `omega_o`.
pub(crate) fn first_bounce_pdf(omega_i: Vec3, omega_o: Vec3, mat: &MaterialSpec) -> f64 {
    let s_i: Side = mat.side_of(omega_i);
    let branch = |s_o: Side| {
        let p = Vertex::new(mat, -omega_i, s_i, omega_o, s_o).map_or(0.0, |v| v.transition_pdf(mat));
        if p.is_finite() {
            p
        } else {
            0.0
        }
    };
    if mat.is_dielectric() {
        branch(s_i) + branch(s_i.flip())
    } else {
        branch(s_i)
    }
}
