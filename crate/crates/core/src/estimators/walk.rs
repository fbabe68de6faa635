use crate::geometry::{reflect, refract, Vec3};
use crate::material::MaterialSpec;
use crate::path::{Side, Vertex};
use crate::rng::RandomStream;

/// One sampled bounce of the visible-normal random walk.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub dir: Vec3,
    pub side: Side,
    pub vertex: Vertex,
    /// Density of `dir` given the incoming direction, branch choice included.
    pub transition_pdf: f64,
    /// Probability of leaving the surface along `dir`; `None` when `dir`
    /// heads back into the interface.
    pub leave: Option<f64>,
}

/// Samples the next flow direction after `d_in`: a visible normal, then
/// reflection or (with probability `1 - F`) refraction about it.
pub(crate) fn sample_step(mat: &MaterialSpec, d_in: Vec3, s_in: Side, rs: &mut RandomStream) -> Option<Step> {
    let w = -s_in.local(d_in);
    let m = mat.roughness.sample_vndf(w, rs)?.m;
    let (o, s_out) = if mat.is_dielectric() {
        let f = mat.dielectric_fresnel(w.dot(m), s_in);
        if rs.next_f64() < f {
            (reflect(-w, m), s_in)
        } else {
            let eta = mat.eta(s_in.flip()) / mat.eta(s_in);
            (refract(-w, m, eta)?, s_in.flip())
        }
    } else {
        (reflect(-w, m), s_in)
    };
    let dir = s_in.local(o).try_normalize()?;
    let vertex = Vertex::new(mat, d_in, s_in, dir, s_out)?;
    let transition_pdf = vertex.transition_pdf(mat);
    if !(transition_pdf > 0.0 && transition_pdf.is_finite()) {
        return None;
    }
    let leave = vertex.leave_probability(mat, dir, s_out);
    Some(Step { dir, side: s_out, vertex, transition_pdf, leave })
}

/// Directions of a walk that kept bouncing, starting with the origin.
#[derive(Debug, Clone)]
pub(crate) struct Subpath {
    pub dirs: alloc::vec::Vec<Vec3>,
    pub sides: alloc::vec::Vec<Side>,
}

/// Walks from `d0` recording every direction that continues inside the
/// surface, at most `max_continued` of them after the origin.
pub(crate) fn trace_subpath(
    mat: &MaterialSpec,
    d0: Vec3,
    s0: Side,
    max_continued: usize,
    rs: &mut RandomStream,
    diag: &mut super::Diagnostics,
) -> Subpath {
    let mut path = Subpath { dirs: alloc::vec![d0], sides: alloc::vec![s0] };
    diag.walks += 1;
    while path.dirs.len() <= max_continued {
        let (d, s) = (*path.dirs.last().unwrap(), *path.sides.last().unwrap());
        let Some(step) = sample_step(mat, d, s, rs) else {
            diag.sampling_failures += 1;
            return path;
        };
        if let Some(g) = step.leave {
            if rs.next_f64() < g {
                return path;
            }
        }
        path.dirs.push(step.dir);
        path.sides.push(step.side);
    }
    diag.truncated_walks += 1;
    path
}
