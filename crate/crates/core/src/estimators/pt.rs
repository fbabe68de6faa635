use super::walk::sample_step;
use super::{accumulate, BsdfQuery, Diagnostics};
use crate::path::{abs_cos, Side, Vertex, VertexJacobian};
use crate::rng::RandomStream;
use crate::spectrum::Rgb;

/// Path-traced estimate of `rho(omega_i, omega_o)` with next-event
/// estimation at every bounce.
pub fn eval_pt(q: &BsdfQuery, rs: &mut RandomStream) -> Rgb {
    eval_pt_with(q, rs, &mut Diagnostics::default())
}

pub fn eval_pt_with(q: &BsdfQuery, rs: &mut RandomStream, diag: &mut Diagnostics) -> Rgb {
    let mut sum = Rgb::ZERO;
    for _ in 0..q.n_samples {
        walk(q, rs, diag, |_, c| sum += c);
    }
    sum / q.n_samples as f64
}

/// Like [`eval_pt`], but adds the contribution of paths with `k` vertices
/// to `per_bounce[min(k, len) - 1]`. Returns the total.
pub fn eval_pt_by_bounce(q: &BsdfQuery, rs: &mut RandomStream, per_bounce: &mut [Rgb]) -> Rgb {
    let mut diag = Diagnostics::default();
    let mut total = Rgb::ZERO;
    let n = q.n_samples as f64;
    for _ in 0..q.n_samples {
        walk(q, rs, &mut diag, |k, c| {
            total += c / n;
            if !per_bounce.is_empty() {
                let slot = k.min(per_bounce.len()) - 1;
                per_bounce[slot] += c / n;
            }
        });
    }
    total
}

// One walk. `beta` holds every factor of f(x) up to and including the exit
// probability of the current direction, divided by the density of the
// sampled prefix; each NEE connection then only adds the last vertex.
fn walk(q: &BsdfQuery, rs: &mut RandomStream, diag: &mut Diagnostics, mut emit: impl FnMut(usize, Rgb)) {
    let mat = &q.mat;
    let consistent = q.conv.vertex_jacobian == VertexJacobian::CancellationConsistent;
    let (wo, s_o) = (q.omega_o, mat.side_of(q.omega_o));
    let mut d = -q.omega_i;
    let mut s: Side = mat.side_of(q.omega_i);
    let mut beta = Rgb::ONE;
    diag.walks += 1;

    for k in 1..=q.conv.max_bounces {
        if let Some(v) = Vertex::new(mat, d, s, wo, s_o) {
            let exit = v.leave_probability(mat, wo, s_o).unwrap_or(0.0);
            let p = v.entry_masking(mat);
            if exit > 0.0 && p > 0.0 {
                let mut c = Rgb::ZERO;
                accumulate(&mut c, beta * v.term(mat, &q.conv) * (p * exit), diag);
                emit(k, c);
            }
        }
        if k == q.conv.max_bounces {
            diag.truncated_walks += 1;
            break;
        }
        let Some(step) = sample_step(mat, d, s, rs) else {
            diag.sampling_failures += 1;
            break;
        };
        if let Some(g) = step.leave {
            if rs.next_f64() < g {
                break;
            }
        }
        // The keep-bouncing probability is both a factor of f and of the
        // density, so it cancels.
        let mut factor = step.vertex.entry_masking(mat) / step.transition_pdf;
        if consistent {
            factor *= abs_cos(step.dir);
        }
        beta *= step.vertex.term(mat, &q.conv) * factor;
        if beta.is_zero() {
            break;
        }
        d = step.dir;
        s = step.side;
    }
}
