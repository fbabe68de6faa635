//! Position-free light paths and their contribution.
//!
//! A path is the sequence of light-flow directions `d_0 .. d_k`; the `k`
//! vertices between them carry no position. Its contribution is
//!
//! ```text
//! f = s_0 v_0 s_1 v_1 ... v_{k-1} s_k
//! ```
//!
//! with vertex terms `v_i` (Fresnel, NDF, Jacobian) and segment terms
//! `s_i = e_i p_i`: the probability `e_i` that `d_i` leaves the previous
//! vertex (or keeps bouncing, for interior segments) times the masking `p_i`
//! of `d_i` arriving at the next vertex.
//!
//! Dielectric paths also record which medium every direction travels in.
//! Directions in the interior medium are evaluated in the negated frame, so
//! "upward" always means "away from the interface, into the current medium".
//! The microfacet normal of a vertex is then the same vector in the frames
//! of both adjacent media.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Vec3;
use crate::material::{Interface, MaterialSpec};
use crate::math::sqr;
use crate::microfacet::COS_EPSILON;
use crate::spectrum::Rgb;

/// Medium a path direction travels in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Above the macro surface (the only medium for conductors).
    Outside,
    /// Below the macro surface, inside a dielectric.
    Inside,
}

impl Side {
    /// Expresses a real-space vector in this medium's local frame (and back;
    /// the map is an involution).
    #[inline]
    pub fn local(self, v: Vec3) -> Vec3 {
        match self {
            Side::Outside => v,
            Side::Inside => -v,
        }
    }

    #[inline]
    pub fn flip(self) -> Side {
        match self {
            Side::Outside => Side::Inside,
            Side::Inside => Side::Outside,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Reflect,
    Refract,
}

/// Denominator convention of the vertex term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum VertexJacobian {
    /// `4 |h . (-d_i)| |h . d_{i+1}|`, with solid-angle measure on every
    /// interior direction.
    PaperLiteral,
    /// `4 |z . (-d_i)| |z . d_{i+1}|`, with projected solid-angle measure on
    /// interior directions. Reduces to the classic single-bounce BSDF and
    /// makes visible-normal sampling weights exactly the Fresnel products.
    #[default]
    CancellationConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EvalConventions {
    pub vertex_jacobian: VertexJacobian,
    /// Maximum number of vertices (bounces) of a path.
    pub max_bounces: usize,
}

impl Default for EvalConventions {
    fn default() -> Self {
        EvalConventions { vertex_jacobian: VertexJacobian::CancellationConsistent, max_bounces: 10 }
    }
}

impl EvalConventions {
    pub fn with_max_bounces(self, max_bounces: usize) -> Self {
        EvalConventions { max_bounces: max_bounces.max(1), ..self }
    }

    pub fn with_jacobian(self, vertex_jacobian: VertexJacobian) -> Self {
        EvalConventions { vertex_jacobian, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathError {
    TooShort,
    LengthMismatch,
    NotUnit,
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::TooShort => f.write_str("a path needs at least two directions"),
            PathError::LengthMismatch => f.write_str("one medium tag is required per direction"),
            PathError::NotUnit => f.write_str("path directions must be unit vectors"),
        }
    }
}

impl core::error::Error for PathError {}

/// Ordered directions `d_0 .. d_k` with the medium of each direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LightPath {
    dirs: Vec<Vec3>,
    sides: Vec<Side>,
}

/// `f(x)` together with the forward sampling density of the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathContribution {
    pub value: Rgb,
    pub density: f64,
}

impl LightPath {
    pub fn new(dirs: Vec<Vec3>, sides: Vec<Side>) -> Result<Self, PathError> {
        if dirs.len() < 2 {
            return Err(PathError::TooShort);
        }
        if dirs.len() != sides.len() {
            return Err(PathError::LengthMismatch);
        }
        if dirs.iter().any(|d| (d.length() - 1.0).abs() > 1e-6) {
            return Err(PathError::NotUnit);
        }
        Ok(LightPath { dirs, sides })
    }

    /// A path that stays in the exterior medium (every conductor path).
    pub fn reflective(dirs: Vec<Vec3>) -> Result<Self, PathError> {
        let sides = alloc::vec![Side::Outside; dirs.len()];
        Self::new(dirs, sides)
    }

    /// Builds the medium tags from the first direction's medium and one
    /// reflect/refract tag per vertex.
    pub fn from_branches(dirs: Vec<Vec3>, origin: Side, branches: &[Branch]) -> Result<Self, PathError> {
        if branches.len() + 1 != dirs.len() {
            return Err(PathError::LengthMismatch);
        }
        let mut sides = Vec::with_capacity(dirs.len());
        let mut side = origin;
        sides.push(side);
        for b in branches {
            if *b == Branch::Refract {
                side = side.flip();
            }
            sides.push(side);
        }
        Self::new(dirs, sides)
    }

    pub fn dirs(&self) -> &[Vec3] {
        &self.dirs
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    /// Number of directions.
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Number of vertices `k`.
    pub fn bounces(&self) -> usize {
        self.dirs.len() - 1
    }

    pub fn branch(&self, vertex: usize) -> Branch {
        if self.sides[vertex] == self.sides[vertex + 1] {
            Branch::Reflect
        } else {
            Branch::Refract
        }
    }

    /// `(-d_k, ..., -d_0)`: the same path traversed against the flow.
    pub fn reverse(&self) -> LightPath {
        LightPath {
            dirs: self.dirs.iter().rev().map(|&d| -d).collect(),
            sides: self.sides.iter().rev().copied().collect(),
        }
    }

    pub fn contribution(&self, mat: &MaterialSpec, conv: &EvalConventions) -> Rgb {
        path_contribution(&self.dirs, &self.sides, mat, conv)
    }

    pub fn pdf_forward(&self, mat: &MaterialSpec) -> f64 {
        path_pdf_forward(&self.dirs, &self.sides, mat)
    }

    pub fn evaluate(&self, mat: &MaterialSpec, conv: &EvalConventions) -> PathContribution {
        PathContribution { value: self.contribution(mat, conv), density: self.pdf_forward(mat) }
    }

    pub fn exit_probability(&self, i: usize, mat: &MaterialSpec) -> f64 {
        exit_probability(&self.dirs, &self.sides, i, mat)
    }

    pub fn entry_masking(&self, i: usize, mat: &MaterialSpec) -> f64 {
        entry_masking(&self.dirs, &self.sides, i, mat)
    }

    pub fn segment_term(&self, i: usize, mat: &MaterialSpec) -> f64 {
        self.exit_probability(i, mat) * self.entry_masking(i, mat)
    }

    pub fn vertex_term(&self, i: usize, mat: &MaterialSpec, conv: &EvalConventions) -> Rgb {
        vertex_term(mat, conv, self.dirs[i], self.sides[i], self.dirs[i + 1], self.sides[i + 1])
    }

    /// Every factor of `f`, for debugging and the compare tool.
    pub fn breakdown(&self, mat: &MaterialSpec, conv: &EvalConventions) -> PathBreakdown {
        let k = self.bounces();
        PathBreakdown {
            exit: (0..=k).map(|i| self.exit_probability(i, mat)).collect(),
            entry: (0..=k).map(|i| self.entry_masking(i, mat)).collect(),
            vertex: (0..k).map(|i| self.vertex_term(i, mat, conv)).collect(),
            projected_measure: (0..=k)
                .map(|i| match conv.vertex_jacobian {
                    VertexJacobian::CancellationConsistent if i > 0 && i < k => abs_cos(self.dirs[i]),
                    _ => 1.0,
                })
                .collect(),
            value: self.contribution(mat, conv),
        }
    }
}

/// Per-factor decomposition of a path contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBreakdown {
    /// `e_0 .. e_k`
    pub exit: Vec<f64>,
    /// `p_0 .. p_k`
    pub entry: Vec<f64>,
    /// `v_0 .. v_{k-1}`
    pub vertex: Vec<Rgb>,
    /// Projected-measure factor per direction (1 at the endpoints and in
    /// `PaperLiteral` mode).
    pub projected_measure: Vec<f64>,
    pub value: Rgb,
}

#[inline]
pub(crate) fn abs_cos(v: Vec3) -> f64 {
    v.z.abs().max(COS_EPSILON)
}

/// Local geometry of one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    /// Incident direction pointing away from the vertex, in the incident
    /// medium's frame.
    pub w: Vec3,
    /// Outgoing flow direction, in the incident medium's frame.
    pub o: Vec3,
    /// Microfacet normal facing the incident medium; `h.z > 0`.
    pub h: Vec3,
    pub branch: Branch,
    pub from: Side,
    pub eta_i: f64,
    pub eta_t: f64,
}

impl Vertex {
    /// Resolves the microfacet normal connecting `d_in` to `d_out`. Returns
    /// `None` when no facet can produce the transition.
    pub fn new(mat: &MaterialSpec, d_in: Vec3, s_in: Side, d_out: Vec3, s_out: Side) -> Option<Vertex> {
        let w = -s_in.local(d_in);
        let o = s_in.local(d_out);
        if s_in == s_out {
            if !mat.is_dielectric() && s_in == Side::Inside {
                return None;
            }
            let h = (w + o).try_normalize()?;
            if h.z <= 0.0 || w.dot(h) <= 0.0 {
                return None;
            }
            Some(Vertex { w, o, h, branch: Branch::Reflect, from: s_in, eta_i: 1.0, eta_t: 1.0 })
        } else {
            if !mat.is_dielectric() {
                return None;
            }
            let (eta_i, eta_t) = (mat.eta(s_in), mat.eta(s_out));
            let mut h = (w * eta_i + o * eta_t).try_normalize()?;
            if h.z < 0.0 {
                h = -h;
            }
            if h.z <= 0.0 || w.dot(h) <= 0.0 || o.dot(h) >= 0.0 {
                return None;
            }
            Some(Vertex { w, o, h, branch: Branch::Refract, from: s_in, eta_i, eta_t })
        }
    }

    /// Fresnel factor of the branch taken (`F` or `1 - F`).
    pub fn fresnel(&self, mat: &MaterialSpec) -> Rgb {
        let cos = self.w.dot(self.h);
        match mat.interface {
            Interface::Conductor { .. } => mat.conductor_fresnel(cos),
            Interface::Dielectric(_) => {
                let f = mat.dielectric_fresnel(cos, self.from);
                Rgb::splat(match self.branch {
                    Branch::Reflect => f,
                    Branch::Refract => 1.0 - f,
                })
            }
        }
    }

    /// Probability of choosing this branch when sampling.
    pub fn branch_probability(&self, mat: &MaterialSpec) -> f64 {
        if mat.is_dielectric() {
            self.fresnel(mat)[0]
        } else {
            1.0
        }
    }

    // d(omega_h)/d(omega_o): 1/(4|o.h|) for reflection, the generalized
    // half-vector Jacobian for refraction.
    fn half_vector_jacobian(&self) -> f64 {
        let oh = self.o.dot(self.h).abs();
        match self.branch {
            Branch::Reflect => 0.25 / oh,
            Branch::Refract => {
                let den = self.eta_i * self.w.dot(self.h) + self.eta_t * self.o.dot(self.h);
                sqr(self.eta_t) * oh / sqr(den)
            }
        }
    }

    pub fn term(&self, mat: &MaterialSpec, conv: &EvalConventions) -> Rgb {
        let d = mat.roughness.d(self.h);
        if d == 0.0 {
            return Rgb::ZERO;
        }
        let wh = self.w.dot(self.h);
        // F D |w.h| J / (cos_in cos_out), with cosines per convention.
        let numerator = d * wh * self.half_vector_jacobian();
        let denominator = match conv.vertex_jacobian {
            VertexJacobian::CancellationConsistent => abs_cos(self.w) * abs_cos(self.o),
            VertexJacobian::PaperLiteral => wh * self.o.dot(self.h).abs(),
        };
        self.fresnel(mat) * (numerator / denominator)
    }

    /// `p`: masking of the incident direction by this vertex's facet.
    pub fn entry_masking(&self, mat: &MaterialSpec) -> f64 {
        let g = mat.roughness.g1(self.w, self.h);
        if g.is_finite() {
            g
        } else {
            0.0
        }
    }

    /// Probability that `d_out` leaves the surface after this vertex, or
    /// `None` when it heads back into the interface (cannot leave).
    pub fn leave_probability(&self, mat: &MaterialSpec, d_out: Vec3, s_out: Side) -> Option<f64> {
        let o = s_out.local(d_out);
        if o.z > 0.0 {
            Some(mat.roughness.g1(o, self.h))
        } else {
            None
        }
    }

    /// Density of sampling `d_out` from `d_in` by visible-normal sampling,
    /// including the discrete branch choice.
    pub fn transition_pdf(&self, mat: &MaterialSpec) -> f64 {
        let vndf = mat.roughness.pdf_vndf(self.w, self.h);
        if vndf == 0.0 {
            return 0.0;
        }
        vndf * self.half_vector_jacobian() * self.branch_probability(mat)
    }
}

pub fn vertex_term(
    mat: &MaterialSpec,
    conv: &EvalConventions,
    d_in: Vec3,
    s_in: Side,
    d_out: Vec3,
    s_out: Side,
) -> Rgb {
    match Vertex::new(mat, d_in, s_in, d_out, s_out) {
        Some(v) => v.term(mat, conv),
        None => Rgb::ZERO,
    }
}

/// `e_i`: 1 for the first direction, the keep-bouncing probability for
/// interior directions and the leave probability for the last.
pub(crate) fn exit_probability(dirs: &[Vec3], sides: &[Side], i: usize, mat: &MaterialSpec) -> f64 {
    let k = dirs.len() - 1;
    if i == 0 {
        return 1.0;
    }
    let Some(prev) = Vertex::new(mat, dirs[i - 1], sides[i - 1], dirs[i], sides[i]) else {
        return 0.0;
    };
    let leave = prev.leave_probability(mat, dirs[i], sides[i]);
    if i == k {
        leave.unwrap_or(0.0)
    } else {
        leave.map_or(1.0, |g| 1.0 - g)
    }
}

/// `p_i`: masking of `d_i` toward vertex `i`; 1 for the last direction.
pub(crate) fn entry_masking(dirs: &[Vec3], sides: &[Side], i: usize, mat: &MaterialSpec) -> f64 {
    if i + 1 >= dirs.len() {
        return 1.0;
    }
    match Vertex::new(mat, dirs[i], sides[i], dirs[i + 1], sides[i + 1]) {
        Some(v) => v.entry_masking(mat),
        None => 0.0,
    }
}

/// `f(x)` for the path given as parallel slices.
pub fn path_contribution(dirs: &[Vec3], sides: &[Side], mat: &MaterialSpec, conv: &EvalConventions) -> Rgb {
    debug_assert!(dirs.len() >= 2 && dirs.len() == sides.len());
    let k = dirs.len() - 1;
    let consistent = conv.vertex_jacobian == VertexJacobian::CancellationConsistent;
    let mut value = Rgb::ONE;
    let mut prev: Option<Vertex> = None;
    for i in 0..k {
        let Some(v) = Vertex::new(mat, dirs[i], sides[i], dirs[i + 1], sides[i + 1]) else {
            return Rgb::ZERO;
        };
        let mut scalar = v.entry_masking(mat);
        if let Some(p) = prev {
            scalar *= p.leave_probability(mat, dirs[i], sides[i]).map_or(1.0, |g| 1.0 - g);
            if consistent {
                scalar *= abs_cos(dirs[i]);
            }
        }
        if scalar == 0.0 {
            return Rgb::ZERO;
        }
        value *= v.term(mat, conv) * scalar;
        prev = Some(v);
    }
    let last = prev.expect("k >= 1");
    value * last.leave_probability(mat, dirs[k], sides[k]).unwrap_or(0.0)
}

/// Density of one forward sampling step from `d_in` to `d_out`, including
/// the keep-bouncing decision at `d_out`.
pub fn step_pdf(mat: &MaterialSpec, d_in: Vec3, s_in: Side, d_out: Vec3, s_out: Side) -> f64 {
    match Vertex::new(mat, d_in, s_in, d_out, s_out) {
        Some(v) => {
            let keep = v.leave_probability(mat, d_out, s_out).map_or(1.0, |g| 1.0 - g);
            v.transition_pdf(mat) * keep
        }
        None => 0.0,
    }
}

/// Product of the densities of the sampled interior directions `d_1 .. d_{k-1}`.
pub fn path_pdf_forward(dirs: &[Vec3], sides: &[Side], mat: &MaterialSpec) -> f64 {
    let k = dirs.len() - 1;
    let mut pdf = 1.0;
    for j in 0..k.saturating_sub(1) {
        pdf *= step_pdf(mat, dirs[j], sides[j], dirs[j + 1], sides[j + 1]);
        if pdf == 0.0 {
            break;
        }
    }
    pdf
}
