//! Rendering, file formats and validation tooling on top of `posfree-core`.
//!
//! - [`image`]: RGB float images, PFM reading and writing, MSE.
//! - [`scene`]: scene descriptions, presets and the `key = value` scene format.
//! - [`render`]: a direct-lighting renderer for a sphere or a slab.
//! - [`lobe`]: per-bounce lobe tables as CSV.
//! - [`validation`]: chi-square tests and parallel furnace, reciprocity and
//!   estimator consistency drivers.

pub mod image;
pub mod lobe;
pub mod render;
pub mod scene;
pub mod validation;

pub use image::{mse, read_pfm, write_pfm, ImageBuffer, ImageError};
pub use lobe::{lobe_tabulate, LobeSettings, LobeTable};
pub use render::{render, RenderError, RenderOutput, RunConfig, Strategy};
pub use scene::{parse_scene, preset, Camera, Geometry, Light, RoughnessGrid, SceneError, SceneFile, SceneSpec};
