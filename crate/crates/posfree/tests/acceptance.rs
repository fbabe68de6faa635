//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use posfree::render::{render, RunConfig};
use posfree::scene::preset;
use posfree::validation::{
    consistency_sweep, furnace_parallel, log_log_slope, reciprocity_parallel, sampler_chi_square, vndf_chi_square,
};
use posfree::{mse, ImageBuffer};
use posfree_core::estimators::sample_with;
use posfree_core::oracles::{direction_grid, direction_pairs, lambda_numeric, QuadratureGrid};
use posfree_core::path::{path_contribution, Vertex};
use posfree_core::{
    eval_single_bounce, fresnel_conductor, reflect, ConductorIor, Diagnostics, EvalConventions, Estimator,
    MaterialSpec, NdfFamily, RandomStream, Rgb, RoughnessProfile, Side, Vec3,
};

const FURNACE_TOLERANCE: f64 = 0.01;
const FURNACE_SAMPLES: u64 = 4_000_000;
const SINGLE_BOUNCE_RTOL: f64 = 1e-9;
const CONSISTENCY_SIGMAS: f64 = 3.0;
const MAX_VIOLATION_RATE: f64 = 0.01;
const MAX_Z: f64 = 5.0;
const MIN_P: f64 = 0.01;
const VNDF_NORM_TOLERANCE: f64 = 1e-3;
const LAMBDA_TOLERANCE: f64 = 1e-4;
const SLOPE_TOLERANCE: f64 = 0.2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn deg(t: f64) -> Vec3 {
    Vec3::from_spherical(t.to_radians(), 0.0)
}

fn white(family: NdfFamily, alpha: f64) -> MaterialSpec {
    MaterialSpec::white_conductor(RoughnessProfile::isotropic(family, alpha))
}

fn white_furnace_conductor() -> Outcome {
    let conv = EvalConventions::default();
    let mut worst: f64 = 0.0;
    let mut worst_cfg = String::new();
    let mut pass = true;
    for family in [NdfFamily::Ggx, NdfFamily::Beckmann] {
        for alpha in [0.1, 0.5, 1.0] {
            for theta in [0.0, 30.0, 60.0, 85.0] {
                let t = Instant::now();
                let r = furnace_parallel(deg(theta), &white(family, alpha), &conv, FURNACE_SAMPLES, 1);
                let gap = (r.eval_albedo - 1.0).abs();
                let ok = gap <= FURNACE_TOLERANCE && t.elapsed().as_secs() <= 120;
                pass &= ok;
                if gap >= worst {
                    worst = gap;
                    worst_cfg = format!(
                        "{family:?} alpha {alpha} theta {theta}: {:.5} +- {:.5}",
                        r.eval_albedo, r.eval_std_error
                    );
                }
            }
        }
    }
    Outcome { pass, detail: format!("24 configurations, worst |albedo - 1| = {worst:.5} ({worst_cfg})") }
}

fn white_furnace_dielectric() -> Outcome {
    let conv = EvalConventions::default();
    let mat = MaterialSpec::dielectric(1.5, RoughnessProfile::ggx(1.0));
    let mut pass = true;
    let mut parts = Vec::new();
    for theta in [0.0, 30.0, 60.0, 85.0, 150.0] {
        let r = furnace_parallel(deg(theta), &mat, &conv, FURNACE_SAMPLES, 2);
        pass &= (r.eval_albedo - 1.0).abs() <= FURNACE_TOLERANCE;
        parts.push(format!("{theta}deg {:.4}", r.eval_albedo));
    }
    Outcome { pass, detail: format!("eta 1.5 GGX alpha 1: {}", parts.join(", ")) }
}

fn single_bounce_reduction() -> Outcome {
    let t = Instant::now();
    let conv = EvalConventions::default();
    let upper = direction_grid(4, 4, 85f64.to_radians());
    let mut both = direction_grid(2, 4, 85f64.to_radians());
    both.extend(direction_grid(2, 4, 85f64.to_radians()).into_iter().map(|v| Vec3::new(v.x, v.y, -v.z)));
    let cases = [
        (white(NdfFamily::Ggx, 0.5), &upper),
        (MaterialSpec::conductor(ConductorIor::COPPER, RoughnessProfile::beckmann(0.3)), &upper),
        (MaterialSpec::conductor(ConductorIor::GOLD, RoughnessProfile::new(NdfFamily::Ggx, 0.1, 1.0)), &upper),
        (MaterialSpec::dielectric(1.5, RoughnessProfile::ggx(0.5)), &both),
        (MaterialSpec::dielectric(1.33, RoughnessProfile::beckmann(0.7)), &both),
    ];
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for (mat, dirs) in cases {
        for &wi in dirs.iter() {
            for &wo in dirs.iter() {
                let closed = eval_single_bounce(wi, wo, &mat);
                let path = path_contribution(&[-wi, wo], &[mat.side_of(wi), mat.side_of(wo)], &mat, &conv);
                for c in 0..3 {
                    let scale = closed[c].abs().max(path[c].abs());
                    if scale > 0.0 {
                        nonzero += 1;
                        worst = worst.max((closed[c] - path[c]).abs() / scale);
                    }
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= SINGLE_BOUNCE_RTOL && secs < 1.0 && nonzero > 0,
        detail: format!("5 materials x 16x16 pairs, max relative error {worst:.2e}, {secs:.3} s"),
    }
}

fn estimator_consistency() -> Outcome {
    let conv = EvalConventions::default();
    let step = 80.0 / 8.0;
    let mut pairs = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            let wi = deg((a as f64 + 0.5) * step);
            let wo = Vec3::from_spherical(((b as f64 + 0.5) * step).to_radians(), 2.0 * PI * (b as f64 + 0.5) / 8.0);
            pairs.push((wi, wo));
        }
    }
    let grid = QuadratureGrid::gauss_legendre(48, 96);
    let (mut tests, mut violations, mut max_z) = (0, 0, 0.0f64);
    for alpha in [0.5, 1.0] {
        let cells = consistency_sweep(&white(NdfFamily::Ggx, alpha), &conv, &pairs, 10_000, &grid, 4);
        for c in &cells {
            for z in c.z_scores() {
                tests += 1;
                if z > CONSISTENCY_SIGMAS {
                    violations += 1;
                }
                max_z = max_z.max(z);
            }
        }
    }
    let rate = violations as f64 / tests as f64;
    Outcome {
        pass: rate <= MAX_VIOLATION_RATE && max_z <= MAX_Z,
        detail: format!(
            "{tests} comparisons (pt/bdpt, pt/rho2, bdpt/rho2), {violations} beyond 3 sigma ({:.2}%), max z {max_z:.2}",
            100.0 * rate
        ),
    }
}

// Replays a conductor walk and returns the product of the Fresnel factors
// at the sampled microfacet normals.
fn replayed_fresnel_product(wi: Vec3, mat: &MaterialSpec, ior: &ConductorIor, rs: &mut RandomStream) -> Option<Rgb> {
    let mut d = -wi;
    let mut product = Rgb::ONE;
    for _ in 0..EvalConventions::default().max_bounces {
        let w = -d;
        let m = mat.roughness.sample_vndf(w, rs)?.m;
        product *= fresnel_conductor(w.dot(m), ior);
        let o = reflect(-w, m).try_normalize()?;
        let v = Vertex::new(mat, d, Side::Outside, o, Side::Outside)?;
        let pdf = v.transition_pdf(mat);
        if !(pdf > 0.0 && pdf.is_finite()) {
            return None;
        }
        d = o;
        if let Some(g) = v.leave_probability(mat, o, Side::Outside) {
            if rs.next_f64() < g {
                return Some(product);
            }
        }
    }
    None
}

fn sampler_consistency() -> Outcome {
    let conv = EvalConventions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    let configs = [
        ("white GGX 1.0", white(NdfFamily::Ggx, 1.0), 8, 8),
        ("glass GGX 1.0", MaterialSpec::dielectric(1.5, RoughnessProfile::ggx(1.0)), 16, 8),
    ];
    for (i, (name, mat, nz, nphi)) in configs.into_iter().enumerate() {
        let r = sampler_chi_square(deg(30.0), &mat, &conv, 1_000_000, nz, nphi, 20_000, 10 + i as u64).unwrap();
        pass &= r.chi_square.p_value > MIN_P;
        parts.push(format!("{name} p = {:.3}", r.chi_square.p_value));
    }

    let glass = MaterialSpec::dielectric(1.5, RoughnessProfile::ggx(0.5));
    let mut rs = RandomStream::new(21);
    let mut diag = Diagnostics::default();
    let mut non_unit = 0;
    for k in 0..100_000 {
        let wi = if k % 2 == 0 { deg(40.0) } else { deg(140.0) };
        if let Some(rec) = sample_with(wi, &glass, &conv, &mut rs, &mut diag) {
            if rec.weight != Rgb::ONE {
                non_unit += 1;
            }
        }
    }
    pass &= non_unit == 0;
    parts.push(format!("dielectric non-unit weights {non_unit}/100000"));

    let ior = ConductorIor::COPPER;
    let copper = MaterialSpec::conductor(ior, RoughnessProfile::ggx(0.8));
    let mut worst: f64 = 0.0;
    let mut multi = 0;
    for k in 0..20_000u64 {
        let wi = deg(50.0);
        let mut a = RandomStream::with_stream(22, k);
        let mut b = a.clone();
        let rec = sample_with(wi, &copper, &conv, &mut a, &mut Diagnostics::default());
        let replay = replayed_fresnel_product(wi, &copper, &ior, &mut b);
        match (rec, replay) {
            (Some(r), Some(p)) => {
                if r.bounce_count > 1 {
                    multi += 1;
                }
                for c in 0..3 {
                    worst = worst.max((r.weight[c] - p[c]).abs() / p[c]);
                }
            }
            (None, None) => {}
            _ => worst = f64::INFINITY,
        }
    }
    pass &= worst <= 1e-9 && multi > 0;
    parts.push(format!("conductor weight vs replayed Fresnel product: max rel err {worst:.1e} ({multi} multi-bounce walks)"));
    Outcome { pass, detail: parts.join("; ") }
}

fn statistical_reciprocity() -> Outcome {
    let conv = EvalConventions::default();
    let mat = MaterialSpec::conductor(ConductorIor::COPPER, RoughnessProfile::ggx(1.0));
    let pairs = direction_pairs(&direction_grid(8, 8, 85f64.to_radians()));
    let report = reciprocity_parallel(&mat, &conv, &pairs, Estimator::Pt, 10_000, 5);
    let rate = report.violation_rate(3.0);
    Outcome {
        pass: rate <= MAX_VIOLATION_RATE && report.max_z() <= MAX_Z,
        detail: format!(
            "copper GGX 1.0, {} pairs, {} beyond 3 sigma ({:.2}%), max z {:.2}",
            report.cells.len(),
            report.violations(3.0),
            100.0 * rate,
            report.max_z()
        ),
    }
}

fn variance_ordering() -> Outcome {
    let mut file = preset("directional").unwrap();
    file.scene = file.scene.with_resolution(32, 32);
    let scene = &file.scene;
    let mut pass = true;
    let mut parts = Vec::new();
    let mut errors = Vec::new();
    for estimator in [Estimator::Pt, Estimator::Bdpt] {
        let cfg = RunConfig { estimator, ..file.config };
        let reference = render(scene, &RunConfig { spp: 4096, seed: 1_000, ..cfg }).unwrap().image;
        let spps = [2usize, 4, 8, 16, 32, 64];
        let mses: Vec<f64> = spps
            .iter()
            .map(|&spp| {
                let img: ImageBuffer = render(scene, &RunConfig { spp, seed: spp as u64, ..cfg }).unwrap().image;
                mse(&img, &reference).unwrap()
            })
            .collect();
        let x: Vec<f64> = spps.iter().map(|&s| s as f64).collect();
        let slope = log_log_slope(&x, &mses);
        pass &= (slope + 1.0).abs() <= SLOPE_TOLERANCE;
        parts.push(format!("{estimator:?} slope {slope:.3}"));
        errors.push(mses);
    }
    for (i, spp) in [2, 4, 8].into_iter().enumerate() {
        let ok = errors[1][i] < errors[0][i];
        pass &= ok;
        parts.push(format!("spp {spp}: bdpt {:.3e} vs pt {:.3e}", errors[1][i], errors[0][i]));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn vndf_correctness() -> Outcome {
    let mut pass = true;
    let (mut min_p, mut worst_norm) = (1.0f64, 0.0f64);
    let profiles = [
        RoughnessProfile::ggx(0.5),
        RoughnessProfile::beckmann(0.5),
        RoughnessProfile::new(NdfFamily::Ggx, 0.1, 1.0),
        RoughnessProfile::new(NdfFamily::Beckmann, 0.1, 1.0),
    ];
    let mut seed = 30;
    for p in &profiles {
        for theta in [0.0, 30.0, 60.0, 85.0] {
            seed += 1;
            let w = Vec3::from_spherical(f64::to_radians(theta), 0.7);
            let r = vndf_chi_square(p, w, 1_000_000, 16, 16, seed).unwrap();
            pass &= r.chi_square.p_value > MIN_P && (r.normalization - 1.0).abs() <= VNDF_NORM_TOLERANCE;
            min_p = min_p.min(r.chi_square.p_value);
            worst_norm = worst_norm.max((r.normalization - 1.0).abs());
        }
    }
    Outcome {
        pass,
        detail: format!("16 configurations, min p = {min_p:.4}, max |norm - 1| = {worst_norm:.1e}"),
    }
}

fn lambda_oracle() -> Outcome {
    let mut dirs = direction_grid(4, 8, 85f64.to_radians());
    dirs.truncate(32);
    let profiles = [
        RoughnessProfile::ggx(0.5),
        RoughnessProfile::beckmann(0.5),
        RoughnessProfile::new(NdfFamily::Ggx, 0.1, 1.0),
        RoughnessProfile::new(NdfFamily::Beckmann, 0.1, 1.0),
    ];
    let mut worst: f64 = 0.0;
    for p in &profiles {
        for &w in &dirs {
            worst = worst.max((p.lambda(w) - lambda_numeric(w, p)).abs());
        }
    }
    Outcome { pass: worst <= LAMBDA_TOLERANCE, detail: format!("4 profiles x 32 directions, max error {worst:.2e}") }
}

fn determinism() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["glass-env", "directional", "sv-roughness"] {
        let file = preset(name).unwrap();
        let scene = file.scene.with_resolution(24, 16);
        let bytes: Vec<Vec<u8>> = [1, 4, 16]
            .into_iter()
            .map(|threads| {
                let cfg = RunConfig { spp: 4, seed: 77, threads: Some(threads), ..file.config };
                render(&scene, &cfg).unwrap().image.to_pfm_bytes()
            })
            .collect();
        let same = bytes.windows(2).all(|w| w[0] == w[1]);
        pass &= same;
        parts.push(format!("{name} {}", if same { "identical" } else { "differs" }));
    }
    Outcome { pass, detail: format!("threads 1/4/16: {}", parts.join(", ")) }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("white furnace, conductor", white_furnace_conductor),
        ("white furnace, dielectric", white_furnace_dielectric),
        ("single-bounce reduction", single_bounce_reduction),
        ("estimator consistency", estimator_consistency),
        ("sampler consistency", sampler_consistency),
        ("statistical reciprocity", statistical_reciprocity),
        ("variance ordering", variance_ordering),
        ("VNDF correctness", vndf_correctness),
        ("Lambda oracle", lambda_oracle),
        ("determinism", determinism),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:2} {:<28} {} [{:.1} s] {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
