//! Position-free multiple-bounce Smith microfacet BSDFs.
//!
//! Light inside the microsurface is described as a path of directions
//! `d_0 .. d_k` with implicit, position-free vertices. The path contribution
//! is a product of vertex terms (Fresnel, NDF and Jacobian) and segment terms
//! (exit probability times entry masking). The multiple-bounce BSDF is the
//! integral of that contribution over all path lengths, estimated here with
//! path tracing (next-event estimation at every bounce) or bidirectional
//! path tracing with balance-heuristic MIS.
//!
//! All BSDF math is done in a local shading frame whose geometric normal is
//! `(0, 0, 1)`. Public queries take the conventional `omega_i` / `omega_o`
//! pointing away from the surface; paths use the flow of light, so
//! `d_0 = -omega_i` and `d_k = omega_o`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod estimators;
pub mod fresnel;
pub mod geometry;
pub mod material;
mod math;
pub mod microfacet;
pub mod oracles;
pub mod path;
pub mod rng;
pub mod spectrum;

pub use estimators::{
    eval_bdpt, eval_pt, eval_single_bounce, pdf_proxy, sample, BsdfQuery, Diagnostics, Estimator,
    SampleRecord, SampleSide,
};
pub use fresnel::{fresnel_conductor, fresnel_dielectric, ConductorIor, DielectricIor};
pub use geometry::{half_vector, reflect, refract, DegenerateHalfVector, Frame, Vec3};
pub use material::{Interface, MaterialSpec};
pub use microfacet::{g1_local, MicronormalSample, NdfFamily, RoughnessProfile};
pub use path::{EvalConventions, LightPath, PathContribution, Side, VertexJacobian};
pub use rng::RandomStream;
pub use spectrum::Rgb;
