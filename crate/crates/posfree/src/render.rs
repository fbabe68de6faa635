//! Direct-lighting renderer for a single sphere or slab.
//!
//! Delta lights are connected with one BSDF evaluation each. A constant
//! environment is integrated with light sampling, BSDF sampling through the
//! random-walk sampler, or both combined with the balance heuristic using
//! [`pdf_proxy`] as the BSDF-side density. Rays that hit the object again
//! continue for `depth - 1` more surface interactions.

use std::f64::consts::PI;

use posfree_core::estimators::sample_with;
use posfree_core::{
    pdf_proxy, BsdfQuery, Diagnostics, EvalConventions, Estimator, Frame, MaterialSpec,
    RandomStream, Rgb, Vec3, VertexJacobian,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::image::ImageBuffer;
use crate::scene::{Geometry, Light, SceneError, SceneSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    #[default]
    Mis,
    BsdfOnly,
    LightOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub spp: usize,
    pub max_bounces: usize,
    pub estimator: Estimator,
    pub vertex_mode: VertexJacobian,
    pub seed: u64,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    pub strategy: Strategy,
    /// Surface interactions per camera path.
    pub depth: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spp: 4,
            max_bounces: 10,
            estimator: Estimator::Bdpt,
            vertex_mode: VertexJacobian::CancellationConsistent,
            seed: 0,
            threads: None,
            strategy: Strategy::Mis,
            depth: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.spp == 0 {
            return Err(RenderError::Config("spp must be at least 1".into()));
        }
        if self.max_bounces == 0 {
            return Err(RenderError::Config("max_bounces must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(RenderError::Config("depth must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(RenderError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn conventions(&self) -> EvalConventions {
        EvalConventions::default().with_max_bounces(self.max_bounces).with_jacobian(self.vertex_mode)
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub image: ImageBuffer,
    /// Per-pixel, per-channel standard error of the mean.
    pub std_error: ImageBuffer,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy)]
struct Ray {
    origin: Vec3,
    dir: Vec3,
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    position: Vec3,
    /// Outward geometric normal.
    normal: Vec3,
    tangent: Vec3,
    uv: (f64, f64),
}

const T_MIN: f64 = 1e-7;

fn intersect(geometry: &Geometry, ray: &Ray) -> Option<Hit> {
    match *geometry {
        Geometry::Sphere => {
            let b = ray.origin.dot(ray.dir);
            let c = ray.origin.length_squared() - 1.0;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let t = [-b - sq, -b + sq].into_iter().find(|t| *t > T_MIN)?;
            let p = ray.origin + ray.dir * t;
            let normal = p.normalize();
            let u = (p.z.atan2(p.x) + PI) / (2.0 * PI);
            let v = normal.y.clamp(-1.0, 1.0).acos() / PI;
            Some(Hit { position: p, normal, tangent: Vec3::new(-p.z, 0.0, p.x), uv: (u, v) })
        }
        Geometry::Slab { half_extents: h } => {
            let o = [ray.origin.x, ray.origin.y, ray.origin.z];
            let d = [ray.dir.x, ray.dir.y, ray.dir.z];
            let e = [h.x, h.y, h.z];
            let (mut t_near, mut t_far) = (f64::NEG_INFINITY, f64::INFINITY);
            let (mut near_axis, mut far_axis) = (0, 0);
            for a in 0..3 {
                if d[a] == 0.0 {
                    if o[a].abs() > e[a] {
                        return None;
                    }
                    continue;
                }
                let (mut t0, mut t1) = ((-e[a] - o[a]) / d[a], (e[a] - o[a]) / d[a]);
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                if t0 > t_near {
                    t_near = t0;
                    near_axis = a;
                }
                if t1 < t_far {
                    t_far = t1;
                    far_axis = a;
                }
            }
            if t_near > t_far {
                return None;
            }
            let (t, axis) = if t_near > T_MIN {
                (t_near, near_axis)
            } else if t_far > T_MIN {
                (t_far, far_axis)
            } else {
                return None;
            };
            let p = ray.origin + ray.dir * t;
            let pc = [p.x, p.y, p.z];
            let mut n = [0.0; 3];
            n[axis] = pc[axis].signum();
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            let uv = ((pc[a1] / e[a1] + 1.0) / 2.0, (pc[a2] / e[a2] + 1.0) / 2.0);
            let mut tangent = [0.0; 3];
            tangent[a1] = 1.0;
            Some(Hit {
                position: p,
                normal: Vec3::new(n[0], n[1], n[2]),
                tangent: Vec3::new(tangent[0], tangent[1], tangent[2]),
                uv,
            })
        }
    }
}

struct Integrator<'a> {
    scene: &'a SceneSpec,
    cfg: &'a RunConfig,
    conv: EvalConventions,
    env: Option<Rgb>,
}

impl Integrator<'_> {
    fn trace(&self, ray: &Ray) -> Option<Hit> {
        if self.scene.material.is_pass_through() {
            return None;
        }
        intersect(&self.scene.geometry, ray)
    }

    fn material_at(&self, hit: &Hit) -> MaterialSpec {
        let mut mat = self.scene.material;
        if let Some(grid) = &self.scene.roughness_grid {
            mat.roughness = mat.roughness.with_alpha(grid.lookup(hit.uv.0, hit.uv.1));
        }
        mat
    }

    /// Radiance arriving at `origin` from direction `dir`.
    fn incoming(&self, origin: Vec3, dir: Vec3, depth: usize, rs: &mut RandomStream, diag: &mut Diagnostics) -> Rgb {
        let ray = Ray { origin, dir };
        match self.trace(&ray) {
            Some(hit) if depth > 0 => self.shade(&hit, -dir, depth, rs, diag),
            Some(_) => Rgb::ZERO,
            None => self.env.unwrap_or(Rgb::ZERO),
        }
    }

    fn radiance(&self, ray: &Ray, rs: &mut RandomStream, diag: &mut Diagnostics) -> Rgb {
        self.incoming(ray.origin, ray.dir, self.cfg.depth, rs, diag)
    }

    fn eval(&self, mat: &MaterialSpec, wi: Vec3, wo: Vec3, rs: &mut RandomStream, diag: &mut Diagnostics) -> Rgb {
        if !mat.is_dielectric() && (wi.z <= 0.0 || wo.z <= 0.0) {
            return Rgb::ZERO;
        }
        let q = BsdfQuery::new(wi, wo, *mat).with_conventions(self.conv);
        self.cfg.estimator.evaluate(&q, rs, diag)
    }

    // Outgoing radiance towards `view` (world, pointing away from the hit).
    fn shade(&self, hit: &Hit, view: Vec3, depth: usize, rs: &mut RandomStream, diag: &mut Diagnostics) -> Rgb {
        let mat = self.material_at(hit);
        let frame = Frame::from_normal_tangent(hit.normal, hit.tangent);
        let wv = frame.to_local(view);
        let mut total = Rgb::ZERO;
        let mut add = |c: Rgb, diag: &mut Diagnostics| {
            if c.is_finite() {
                total += c;
            } else {
                diag.non_finite_dropped += 1;
            }
        };

        for light in &self.scene.lights {
            let (dir, irradiance) = match *light {
                Light::Directional { direction, irradiance } => (direction, irradiance),
                Light::Point { position, intensity } => {
                    let to = position - hit.position;
                    let d2 = to.length_squared();
                    let Some(dir) = to.try_normalize() else { continue };
                    (dir, intensity / d2)
                }
                Light::ConstantEnv { .. } => continue,
            };
            // the object is convex: light from behind the tangent plane is blocked
            if dir.dot(hit.normal) <= 0.0 {
                continue;
            }
            let wl = frame.to_local(dir);
            let c = self.eval(&mat, wl, wv, rs, diag) * (wl.z.abs()) * irradiance;
            add(c, diag);
        }

        if self.env.is_some() {
            let depth = depth - 1;
            let light_pdf = |w: Vec3| {
                if mat.is_dielectric() {
                    1.0 / (4.0 * PI)
                } else if w.z > 0.0 {
                    1.0 / (2.0 * PI)
                } else {
                    0.0
                }
            };
            let strategy = self.cfg.strategy;
            if strategy != Strategy::BsdfOnly {
                let (u1, u2) = rs.next_2d();
                let z = if mat.is_dielectric() { 1.0 - 2.0 * u1 } else { u1 };
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * PI * u2;
                let wl = Vec3::new(r * phi.cos(), r * phi.sin(), z);
                let pl = light_pdf(wl);
                let f = self.eval(&mat, wl, wv, rs, diag);
                if !f.is_zero() {
                    let weight = match strategy {
                        Strategy::Mis => 1.0 / (pl + pdf_proxy(wv, wl, &mat)),
                        _ => 1.0 / pl,
                    };
                    let li = self.incoming(hit.position, frame.to_world(wl), depth, rs, diag);
                    add(f * li * (wl.z.abs() * weight), diag);
                }
            }
            if strategy != Strategy::LightOnly {
                if let Some(rec) = sample_with(wv, &mat, &self.conv, rs, diag) {
                    let wl = rec.omega_o;
                    let mis = match strategy {
                        Strategy::Mis => {
                            let pb = pdf_proxy(wv, wl, &mat);
                            if pb > 0.0 {
                                pb / (pb + light_pdf(wl))
                            } else {
                                0.0
                            }
                        }
                        _ => 1.0,
                    };
                    if mis > 0.0 && !rec.weight.is_zero() {
                        let li = self.incoming(hit.position, frame.to_world(wl), depth, rs, diag);
                        add(rec.weight * li * mis, diag);
                    }
                }
            }
        }
        total
    }
}

fn camera_ray(scene: &SceneSpec, x: f64, y: f64) -> Ray {
    let cam = &scene.camera;
    let forward = (cam.look_at - cam.position).normalize();
    let right = forward.cross(Vec3::Y).try_normalize().unwrap_or(Vec3::X);
    let up = right.cross(forward);
    let tan_half = (cam.fov_deg.to_radians() / 2.0).tan();
    let aspect = cam.width as f64 / cam.height as f64;
    let sx = (2.0 * x / cam.width as f64 - 1.0) * tan_half * aspect;
    let sy = (1.0 - 2.0 * y / cam.height as f64) * tan_half;
    Ray { origin: cam.position, dir: (forward + right * sx + up * sy).normalize() }
}

/// Renders `scene`. Every pixel draws from its own stream derived from
/// `cfg.seed`, so the output does not depend on the thread count.
pub fn render(scene: &SceneSpec, cfg: &RunConfig) -> Result<RenderOutput, RenderError> {
    scene.validate()?;
    cfg.validate()?;
    let integrator = Integrator { scene, cfg, conv: cfg.conventions(), env: scene.env_radiance() };
    let (w, h) = (scene.camera.width, scene.camera.height);

    let render_row = |y: usize| {
        let mut row = Vec::with_capacity(w);
        let mut diag = Diagnostics::default();
        for x in 0..w {
            let mut rs = RandomStream::with_stream(cfg.seed, (y * w + x) as u64);
            let (mut sum, mut sum_sq) = (Rgb::ZERO, Rgb::ZERO);
            for _ in 0..cfg.spp {
                let (jx, jy) = rs.next_2d();
                let ray = camera_ray(scene, x as f64 + jx, y as f64 + jy);
                let l = integrator.radiance(&ray, &mut rs, &mut diag);
                sum += l;
                sum_sq += l * l;
            }
            let n = cfg.spp as f64;
            let mean = sum / n;
            let var = (sum_sq / n - mean * mean).map(|v| v.max(0.0) / n);
            row.push((mean, var.map(f64::sqrt)));
        }
        (row, diag)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| RenderError::ThreadPool(e.to_string()))?;
    let rows: Vec<_> = pool.install(|| (0..h).into_par_iter().map(render_row).collect());

    let mut image = ImageBuffer::new(w, h);
    let mut std_error = ImageBuffer::new(w, h);
    let mut diagnostics = Diagnostics::default();
    for (y, (row, diag)) in rows.into_iter().enumerate() {
        diagnostics.merge(&diag);
        for (x, (mean, se)) in row.into_iter().enumerate() {
            let px = |c: Rgb| [c[0].max(0.0) as f32, c[1].max(0.0) as f32, c[2].max(0.0) as f32];
            image.set(x, y, px(mean));
            std_error.set(x, y, px(se));
        }
    }
    Ok(RenderOutput { image, std_error, diagnostics })
}

/// Mask of pixels whose primary ray through the pixel centre hits the object.
pub fn coverage_mask(scene: &SceneSpec) -> Vec<bool> {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let mut mask = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let ray = camera_ray(scene, x as f64 + 0.5, y as f64 + 0.5);
            mask.push(!scene.material.is_pass_through() && intersect(&scene.geometry, &ray).is_some());
        }
    }
    mask
}
