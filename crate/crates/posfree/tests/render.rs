use posfree::render::{coverage_mask, render, RunConfig, Strategy};
use posfree::scene::{parse_scene, preset, Geometry, Light, SceneSpec};
use posfree::validation::log_log_slope;
use posfree::{mse, ImageBuffer};
use posfree_core::{ConductorIor, Estimator, MaterialSpec, RoughnessProfile, Rgb, Vec3, VertexJacobian};

fn channel_mean(img: &ImageBuffer, i: usize) -> f64 {
    let d = img.data();
    (d[3 * i] as f64 + d[3 * i + 1] as f64 + d[3 * i + 2] as f64) / 3.0
}

fn furnace_scene(res: usize) -> SceneSpec {
    preset("furnace").unwrap().scene.with_resolution(res, res)
}

#[test]
fn furnace_sphere_is_uniform_under_bsdf_sampling() {
    let scene = furnace_scene(32);
    let cfg = RunConfig { spp: 256, strategy: Strategy::BsdfOnly, ..RunConfig::default() };
    let out = render(&scene, &cfg).unwrap();
    let mask = coverage_mask(&scene);
    assert!(mask.iter().filter(|m| **m).count() > 300);
    for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        let v = channel_mean(&out.image, i);
        assert!((v - 1.0).abs() <= 0.02, "pixel {i}: {v}");
    }
}

#[test]
fn furnace_sphere_is_uniform_under_mis() {
    let scene = furnace_scene(32);
    let cfg = RunConfig { spp: 256, ..RunConfig::default() };
    let out = render(&scene, &cfg).unwrap();
    let mask = coverage_mask(&scene);
    let mut sum = 0.0;
    let mut count = 0.0;
    for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        let v = channel_mean(&out.image, i);
        let se = channel_mean(&out.std_error, i);
        assert!((v - 1.0).abs() <= 5.0 * se + 1e-6, "pixel {i}: {v} +- {se}");
        sum += v;
        count += 1.0;
    }
    assert!((sum / count - 1.0).abs() < 0.005, "sphere mean {}", sum / count);

    // enough samples for the 0.02 band to be several standard errors wide
    let scene = furnace_scene(16);
    let cfg = RunConfig { spp: 16_384, estimator: Estimator::Pt, seed: 3, ..RunConfig::default() };
    let out = render(&scene, &cfg).unwrap();
    for (i, _) in coverage_mask(&scene).iter().enumerate().filter(|(_, m)| **m) {
        let v = channel_mean(&out.image, i);
        assert!((v - 1.0).abs() <= 0.02, "pixel {i}: {v}");
    }
}

#[test]
fn mis_and_single_strategies_agree() {
    let mut scene = furnace_scene(16);
    scene.material = MaterialSpec::conductor(ConductorIor::COPPER, RoughnessProfile::ggx(0.4));
    scene.lights = vec![Light::ConstantEnv { radiance: Rgb::new(0.5, 1.0, 2.0) }];
    let base = RunConfig { spp: 256, estimator: Estimator::Pt, ..RunConfig::default() };
    let run = |strategy, seed| render(&scene, &RunConfig { strategy, seed, ..base }).unwrap();
    let mis = run(Strategy::Mis, 1);
    let mask = coverage_mask(&scene);
    for (other, seed) in [(Strategy::BsdfOnly, 2), (Strategy::LightOnly, 3)] {
        let o = run(other, seed);
        let (mut tests, mut beyond) = (0, 0);
        for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
            for c in 0..3 {
                let k = 3 * i + c;
                let d = (mis.image.data()[k] - o.image.data()[k]) as f64;
                let se = (mis.std_error.data()[k] as f64).hypot(o.std_error.data()[k] as f64);
                let z = if se > 0.0 { d.abs() / se } else { d.abs() * 1e9 };
                tests += 1;
                if z > 3.0 {
                    beyond += 1;
                }
                assert!(z < 5.5, "{other:?} pixel {i} channel {c}: z = {z}");
            }
        }
        assert!(beyond as f64 <= 0.01 * tests as f64, "{other:?}: {beyond}/{tests} beyond 3 sigma");
    }
}

#[test]
fn index_matched_slab_is_invisible() {
    let background = Rgb::new(0.25, 0.5, 0.75);
    let slab = SceneSpec {
        geometry: Geometry::Slab { half_extents: Vec3::new(1.0, 0.2, 1.0) },
        material: MaterialSpec::dielectric(1.0, RoughnessProfile::ggx(0.3)),
        roughness_grid: None,
        lights: vec![
            Light::ConstantEnv { radiance: background },
            Light::Directional { direction: Vec3::Y, irradiance: Rgb::ONE },
        ],
        camera: preset("slab").unwrap().scene.camera,
    }
    .with_resolution(16, 16);
    let img = render(&slab, &RunConfig { spp: 2, ..RunConfig::default() }).unwrap().image;
    let mut empty = ImageBuffer::new(16, 16);
    for y in 0..16 {
        for x in 0..16 {
            empty.set(x, y, [0.25, 0.5, 0.75]);
        }
    }
    assert!(mse(&img, &empty).unwrap() < 1e-8);
    assert!(img.data().iter().zip(empty.data()).all(|(a, b)| (a - b).abs() <= 1e-4));
}

#[test]
fn bdpt_beats_pt_at_half_roughness() {
    let mut file = preset("directional").unwrap();
    file.scene.material = MaterialSpec::conductor(ConductorIor::COPPER, RoughnessProfile::ggx(0.5));
    let scene = file.scene.with_resolution(16, 16);
    let mut errors = Vec::new();
    for estimator in [Estimator::Pt, Estimator::Bdpt] {
        let cfg = RunConfig { estimator, ..file.config };
        let reference = render(&scene, &RunConfig { spp: 2048, seed: 500, ..cfg }).unwrap().image;
        let e: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&spp| mse(&render(&scene, &RunConfig { spp, seed: spp as u64, ..cfg }).unwrap().image, &reference).unwrap())
            .collect();
        errors.push(e);
    }
    for i in 0..3 {
        assert!(errors[1][i] < errors[0][i], "bdpt {:?} vs pt {:?}", errors[1], errors[0]);
    }
}

#[test]
fn slab_mse_falls_with_spp() {
    let file = preset("slab").unwrap();
    let scene = file.scene.with_resolution(16, 16);
    let reference = render(&scene, &RunConfig { spp: 2048, seed: 900, ..file.config }).unwrap().image;
    let spps = [2.0, 4.0, 8.0, 16.0, 32.0];
    let errors: Vec<f64> = spps
        .iter()
        .map(|&spp| {
            let cfg = RunConfig { spp: spp as usize, seed: spp as u64, ..file.config };
            mse(&render(&scene, &cfg).unwrap().image, &reference).unwrap()
        })
        .collect();
    let slope = log_log_slope(&spps, &errors);
    assert!((slope + 1.0).abs() < 0.3, "slope {slope}, errors {errors:?}");
}

#[test]
fn every_preset_renders_finite_non_negative_images() {
    for name in posfree::scene::PRESETS {
        let file = preset(name).unwrap();
        let scene = file.scene.with_resolution(16, 16);
        for vertex_mode in [VertexJacobian::CancellationConsistent, VertexJacobian::PaperLiteral] {
            let out = render(&scene, &RunConfig { spp: 2, vertex_mode, ..file.config }).unwrap();
            assert!(out.image.is_finite_non_negative(), "{name} {vertex_mode:?}");
            assert!(out.std_error.is_finite_non_negative());
        }
    }
}

#[test]
fn seed_changes_noise_but_not_determinism() {
    let file = preset("point").unwrap();
    let scene = file.scene.with_resolution(16, 16);
    let a = render(&scene, &RunConfig { seed: 1, threads: Some(1), ..file.config }).unwrap().image;
    let b = render(&scene, &RunConfig { seed: 1, threads: Some(3), ..file.config }).unwrap().image;
    let c = render(&scene, &RunConfig { seed: 2, ..file.config }).unwrap().image;
    assert_eq!(a.to_pfm_bytes(), b.to_pfm_bytes());
    assert_ne!(a.to_pfm_bytes(), c.to_pfm_bytes());
}

#[test]
fn spatially_varying_roughness_changes_the_image() {
    let file = preset("sv-roughness").unwrap();
    let scene = file.scene.clone().with_resolution(16, 16);
    let mut uniform = scene.clone();
    uniform.roughness_grid = None;
    let cfg = RunConfig { spp: 8, ..file.config };
    let a = render(&scene, &cfg).unwrap().image;
    let b = render(&uniform, &cfg).unwrap().image;
    assert!(mse(&a, &b).unwrap() > 1e-4);
}

#[test]
fn scene_file_settings_reach_the_renderer() {
    let text = "geometry = sphere\nmaterial = gold\nalpha = 0.4\nlight = point 2 2 3 30 30 30\nresolution = 16 16\n\
                spp = 3\nestimator = pt\nseed = 5\n";
    let file = parse_scene(text).unwrap();
    assert_eq!(file.config.spp, 3);
    let out = render(&file.scene, &file.config).unwrap();
    assert!(out.diagnostics.walks > 0);
    assert!(out.image.data().iter().any(|v| *v > 0.0));
}
