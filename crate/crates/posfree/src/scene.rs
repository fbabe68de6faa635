//! Scene description, built-in presets and the `key = value` scene file format.
//!
//! ```text
//! # a rough copper sphere under a sun
//! geometry = sphere
//! material = copper
//! ndf = ggx
//! alpha = 0.3
//! light = directional 1 1 1  3 3 3
//! camera_position = 0 0 4
//! camera_look_at = 0 0 0
//! camera_fov = 35
//! resolution = 64 64
//! spp = 16
//! ```
//!
//! Lights are `directional <dx dy dz> <r g b>` (direction towards the light,
//! irradiance), `point <x y z> <r g b>` (intensity) or `env <r g b>`
//! (constant environment radiance). `light` may be repeated; every other key
//! at most once. Unknown keys are errors.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use posfree_core::{ConductorIor, MaterialSpec, NdfFamily, RoughnessProfile, Rgb, Vec3, VertexJacobian};
use thiserror::Error;

use crate::render::{RunConfig, Strategy};
use posfree_core::Estimator;

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("unknown preset '{0}' (available: {1})")]
    UnknownPreset(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// Unit sphere at the origin.
    Sphere,
    /// Axis-aligned box centred at the origin.
    Slab { half_extents: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Light {
    /// `direction` points towards the light.
    Directional { direction: Vec3, irradiance: Rgb },
    Point { position: Vec3, intensity: Rgb },
    ConstantEnv { radiance: Rgb },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    /// Vertical field of view in degrees.
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
}

/// Scalar roughness texture over the surface parametrization, looked up
/// with nearest-neighbour filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughnessGrid {
    pub cols: usize,
    pub rows: usize,
    pub values: Vec<f64>,
}

impl RoughnessGrid {
    pub fn lookup(&self, u: f64, v: f64) -> f64 {
        let c = ((u.clamp(0.0, 1.0) * self.cols as f64) as usize).min(self.cols - 1);
        let r = ((v.clamp(0.0, 1.0) * self.rows as f64) as usize).min(self.rows - 1);
        self.values[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub geometry: Geometry,
    pub material: MaterialSpec,
    pub roughness_grid: Option<RoughnessGrid>,
    pub lights: Vec<Light>,
    pub camera: Camera,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.lights.is_empty() {
            return Err(SceneError::Invalid("at least one light is required".into()));
        }
        if self.camera.width < 16 || self.camera.height < 16 {
            return Err(SceneError::Invalid(format!(
                "resolution {}x{} is below the 16x16 minimum",
                self.camera.width, self.camera.height
            )));
        }
        if !(self.camera.fov_deg > 0.0 && self.camera.fov_deg < 180.0) {
            return Err(SceneError::Invalid("camera_fov must be in (0, 180) degrees".into()));
        }
        if (self.camera.look_at - self.camera.position).try_normalize().is_none() {
            return Err(SceneError::Invalid("camera_position and camera_look_at coincide".into()));
        }
        if let Some(g) = &self.roughness_grid {
            if g.cols == 0 || g.rows == 0 || g.values.len() != g.cols * g.rows {
                return Err(SceneError::Invalid("roughness_grid needs cols*rows values".into()));
            }
        }
        Ok(())
    }

    pub fn env_radiance(&self) -> Option<Rgb> {
        self.lights.iter().find_map(|l| match l {
            Light::ConstantEnv { radiance } => Some(*radiance),
            _ => None,
        })
    }

    pub fn with_resolution(mut self, width: usize, height: usize) -> Self {
        self.camera.width = width;
        self.camera.height = height;
        self
    }
}

/// A scene plus the run settings a scene file may carry.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub scene: SceneSpec,
    pub config: RunConfig,
}

pub const PRESETS: &[&str] = &["furnace", "directional", "point", "slab", "glass-env", "sv-roughness", "copper"];

fn default_camera() -> Camera {
    Camera { position: Vec3::new(0.0, 0.0, 4.0), look_at: Vec3::ZERO, fov_deg: 32.0, width: 64, height: 64 }
}

/// Built-in scenes approximating the sphere and slab setups.
pub fn preset(name: &str) -> Result<SceneFile, SceneError> {
    let white = |alpha| MaterialSpec::white_conductor(RoughnessProfile::ggx(alpha));
    let sun = Light::Directional { direction: Vec3::new(1.0, 1.0, 1.0).normalize(), irradiance: Rgb::splat(3.0) };
    let mut config = RunConfig::default();
    let scene = match name {
        "furnace" => SceneSpec {
            geometry: Geometry::Sphere,
            material: white(1.0),
            roughness_grid: None,
            lights: vec![Light::ConstantEnv { radiance: Rgb::ONE }],
            camera: default_camera(),
        },
        "directional" => SceneSpec {
            geometry: Geometry::Sphere,
            material: MaterialSpec::conductor(ConductorIor::COPPER, RoughnessProfile::ggx(1.0)),
            roughness_grid: None,
            lights: vec![sun],
            camera: default_camera(),
        },
        "point" => SceneSpec {
            geometry: Geometry::Sphere,
            material: MaterialSpec::conductor(ConductorIor::GOLD, RoughnessProfile::ggx(0.5)),
            roughness_grid: None,
            lights: vec![Light::Point { position: Vec3::new(2.0, 2.0, 3.0), intensity: Rgb::splat(40.0) }],
            camera: default_camera(),
        },
        "slab" => SceneSpec {
            geometry: Geometry::Slab { half_extents: Vec3::new(1.0, 0.1, 1.0) },
            material: MaterialSpec::dielectric(1.5, RoughnessProfile::ggx(0.5)),
            roughness_grid: None,
            lights: vec![Light::Directional {
                direction: Vec3::new(0.3, 1.0, 0.6).normalize(),
                irradiance: Rgb::splat(3.0),
            }],
            camera: Camera { position: Vec3::new(0.0, 2.5, 3.0), ..default_camera() },
        },
        "glass-env" => {
            config.depth = 2;
            SceneSpec {
                geometry: Geometry::Sphere,
                material: MaterialSpec::dielectric(1.5, RoughnessProfile::ggx(0.3)),
                roughness_grid: None,
                lights: vec![Light::ConstantEnv { radiance: Rgb::ONE }, sun],
                camera: default_camera(),
            }
        }
        "sv-roughness" => SceneSpec {
            geometry: Geometry::Sphere,
            material: MaterialSpec::conductor(ConductorIor::ALUMINUM, RoughnessProfile::ggx(0.5)),
            roughness_grid: Some(RoughnessGrid {
                cols: 8,
                rows: 4,
                values: (0..32).map(|i| if (i % 8 + i / 8) % 2 == 0 { 0.1 } else { 0.9 }).collect(),
            }),
            lights: vec![sun],
            camera: default_camera(),
        },
        "copper" => SceneSpec {
            geometry: Geometry::Sphere,
            material: MaterialSpec::conductor(ConductorIor::COPPER, RoughnessProfile::ggx(0.1)),
            roughness_grid: None,
            lights: vec![sun],
            camera: default_camera(),
        },
        other => return Err(SceneError::UnknownPreset(other.into(), PRESETS.join(", "))),
    };
    Ok(SceneFile { scene, config })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MaterialKind {
    White,
    Conductor(ConductorIor),
    Dielectric,
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mis" => Ok(Strategy::Mis),
            "bsdf" => Ok(Strategy::BsdfOnly),
            "light" => Ok(Strategy::LightOnly),
            _ => Err(format!("unknown strategy '{s}' (mis, bsdf, light)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Mis => "mis",
            Strategy::BsdfOnly => "bsdf",
            Strategy::LightOnly => "light",
        })
    }
}

pub fn parse_estimator(s: &str) -> Result<Estimator, String> {
    match s {
        "pt" => Ok(Estimator::Pt),
        "bdpt" => Ok(Estimator::Bdpt),
        _ => Err(format!("unknown estimator '{s}' (pt, bdpt)")),
    }
}

pub fn parse_vertex_mode(s: &str) -> Result<VertexJacobian, String> {
    match s {
        "literal" => Ok(VertexJacobian::PaperLiteral),
        "consistent" => Ok(VertexJacobian::CancellationConsistent),
        _ => Err(format!("unknown vertex mode '{s}' (literal, consistent)")),
    }
}

fn numbers(value: &str, count: Option<usize>) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = value
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()?;
    if let Some(n) = count {
        if v.len() != n {
            return Err(format!("expected {n} numbers, found {}", v.len()));
        }
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("numbers must be finite".into());
    }
    Ok(v)
}

fn vec3(value: &str) -> Result<Vec3, String> {
    let v = numbers(value, Some(3))?;
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn positive(value: &str) -> Result<f64, String> {
    let v = numbers(value, Some(1))?[0];
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn count(value: &str) -> Result<usize, String> {
    value.trim().parse::<usize>().map_err(|_| format!("'{value}' is not a non-negative integer"))
}

fn parse_light(value: &str) -> Result<Light, String> {
    let (kind, rest) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
    let rgb = |v: &[f64]| {
        if v.iter().any(|x| *x < 0.0) {
            Err("light power must be non-negative".to_string())
        } else {
            Ok(Rgb::new(v[0], v[1], v[2]))
        }
    };
    match kind {
        "directional" => {
            let v = numbers(rest, Some(6))?;
            let direction =
                Vec3::new(v[0], v[1], v[2]).try_normalize().ok_or("directional light needs a non-zero direction")?;
            Ok(Light::Directional { direction, irradiance: rgb(&v[3..])? })
        }
        "point" => {
            let v = numbers(rest, Some(6))?;
            Ok(Light::Point { position: Vec3::new(v[0], v[1], v[2]), intensity: rgb(&v[3..])? })
        }
        "env" => {
            let v = numbers(rest, Some(3))?;
            Ok(Light::ConstantEnv { radiance: rgb(&v)? })
        }
        _ => Err(format!("unknown light type '{kind}' (directional, point, env)")),
    }
}

/// Parses a scene file. Run settings start from [`RunConfig::default`].
pub fn parse_scene(text: &str) -> Result<SceneFile, SceneError> {
    let mut geometry = Geometry::Sphere;
    let mut kind = MaterialKind::White;
    let mut eta = 1.5;
    let mut family = NdfFamily::Ggx;
    let (mut alpha_x, mut alpha_y) = (0.5, 0.5);
    let mut grid = None;
    let mut lights = Vec::new();
    let mut camera = default_camera();
    let mut config = RunConfig::default();
    let mut seen = HashSet::new();

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| SceneError::Parse { line, message };
        let (key, value) = content.split_once('=').ok_or_else(|| err("expected 'key = value'".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if key != "light" && !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        let result: Result<(), String> = (|| {
            match key {
                "geometry" => {
                    let mut parts = value.split_whitespace();
                    geometry = match parts.next() {
                        Some("sphere") => Geometry::Sphere,
                        Some("slab") => {
                            let rest: Vec<&str> = parts.collect();
                            let half_extents =
                                if rest.is_empty() { Vec3::new(1.0, 0.1, 1.0) } else { vec3(&rest.join(" "))? };
                            if half_extents.x <= 0.0 || half_extents.y <= 0.0 || half_extents.z <= 0.0 {
                                return Err("slab half extents must be positive".into());
                            }
                            Geometry::Slab { half_extents }
                        }
                        _ => return Err(format!("unknown geometry '{value}' (sphere, slab)")),
                    };
                }
                "material" => {
                    kind = match value {
                        "white" => MaterialKind::White,
                        "conductor" | "aluminum" => MaterialKind::Conductor(ConductorIor::ALUMINUM),
                        "copper" => MaterialKind::Conductor(ConductorIor::COPPER),
                        "gold" => MaterialKind::Conductor(ConductorIor::GOLD),
                        "dielectric" => MaterialKind::Dielectric,
                        "glass" => {
                            eta = 1.5;
                            MaterialKind::Dielectric
                        }
                        _ => {
                            return Err(format!(
                                "unknown material '{value}' (white, conductor, copper, gold, aluminum, dielectric, glass)"
                            ))
                        }
                    }
                }
                "eta" => eta = positive(value)?,
                "ndf" => {
                    family = match value {
                        "ggx" => NdfFamily::Ggx,
                        "beckmann" => NdfFamily::Beckmann,
                        _ => return Err(format!("unknown ndf '{value}' (ggx, beckmann)")),
                    }
                }
                "alpha" => {
                    alpha_x = positive(value)?;
                    alpha_y = alpha_x;
                }
                "alpha_x" => alpha_x = positive(value)?,
                "alpha_y" => alpha_y = positive(value)?,
                "roughness_grid" => {
                    let v = numbers(value, None)?;
                    if v.len() < 3 || v[0] < 1.0 || v[1] < 1.0 || v[0].fract() != 0.0 || v[1].fract() != 0.0 {
                        return Err("roughness_grid = <cols> <rows> <values...>".into());
                    }
                    let (cols, rows) = (v[0] as usize, v[1] as usize);
                    if v.len() != 2 + cols * rows {
                        return Err(format!("roughness_grid expects {} values", cols * rows));
                    }
                    if v[2..].iter().any(|a| *a <= 0.0) {
                        return Err("roughness values must be positive".into());
                    }
                    grid = Some(RoughnessGrid { cols, rows, values: v[2..].to_vec() });
                }
                "light" => lights.push(parse_light(value)?),
                "camera_position" => camera.position = vec3(value)?,
                "camera_look_at" => camera.look_at = vec3(value)?,
                "camera_fov" => camera.fov_deg = positive(value)?,
                "resolution" => {
                    let v: Vec<usize> = value.split_whitespace().map(count).collect::<Result<_, _>>()?;
                    if v.len() != 2 {
                        return Err("resolution = <width> <height>".into());
                    }
                    camera.width = v[0];
                    camera.height = v[1];
                }
                "spp" => config.spp = count(value)?,
                "max_bounces" => config.max_bounces = count(value)?,
                "estimator" => config.estimator = parse_estimator(value)?,
                "vertex_mode" => config.vertex_mode = parse_vertex_mode(value)?,
                "seed" => config.seed = value.parse().map_err(|_| format!("'{value}' is not a valid seed"))?,
                "strategy" => config.strategy = value.parse()?,
                "depth" => config.depth = count(value)?,
                "threads" => config.threads = Some(count(value)?),
                _ => return Err(format!("unknown key '{key}'")),
            }
            Ok(())
        })();
        result.map_err(err)?;
    }

    let roughness = RoughnessProfile::new(family, alpha_x, alpha_y);
    let material = match kind {
        MaterialKind::White => MaterialSpec::white_conductor(roughness),
        MaterialKind::Conductor(ior) => MaterialSpec::conductor(ior, roughness),
        MaterialKind::Dielectric => MaterialSpec::dielectric(eta, roughness),
    };
    let scene = SceneSpec { geometry, material, roughness_grid: grid, lights, camera };
    scene.validate()?;
    Ok(SceneFile { scene, config })
}
