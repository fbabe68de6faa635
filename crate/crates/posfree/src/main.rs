use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use posfree::lobe::{lobe_tabulate, LobeSettings};
use posfree::render::{render, RunConfig, Strategy};
use posfree::scene::{parse_scene, preset, SceneFile};
use posfree::validation::{furnace_parallel, reciprocity_parallel, vndf_chi_square};
use posfree::{mse, read_pfm, write_pfm};
use posfree_core::oracles::{direction_grid, direction_pairs, single_bounce_asymmetry};
use posfree_core::{
    ConductorIor, EvalConventions, Estimator, MaterialSpec, NdfFamily, RoughnessProfile, Vec3, VertexJacobian,
};

#[derive(Parser)]
#[command(name = "posfree", version, about = "Position-free multiple-bounce microfacet BSDF tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene file or preset to PFM.
    Render(RenderArgs),
    /// White furnace test over incidence angles.
    Furnace(FurnaceArgs),
    /// Tabulate the BSDF lobe split by bounce count.
    Lobe(LobeArgs),
    /// Chi-square test of visible-normal sampling.
    VndfTest(VndfArgs),
    /// Swapped-argument reciprocity sweep.
    Reciprocity(ReciprocityArgs),
    /// Mean squared error between two PFM images.
    Mse { a: PathBuf, b: PathBuf },
    /// Furnace albedo under both vertex-term conventions.
    CompareModes(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Pt,
    Bdpt,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Pt => Estimator::Pt,
            EstimatorArg::Bdpt => Estimator::Bdpt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VertexModeArg {
    Literal,
    Consistent,
}

impl From<VertexModeArg> for VertexJacobian {
    fn from(m: VertexModeArg) -> Self {
        match m {
            VertexModeArg::Literal => VertexJacobian::PaperLiteral,
            VertexModeArg::Consistent => VertexJacobian::CancellationConsistent,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Mis,
    Bsdf,
    Light,
}

#[derive(Clone, Copy, ValueEnum)]
enum NdfArg {
    Ggx,
    Beckmann,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaterialArg {
    White,
    Copper,
    Gold,
    Aluminum,
    Dielectric,
}

#[derive(Args)]
struct Common {
    /// Maximum bounces per path.
    #[arg(long, default_value_t = 10)]
    max_bounces: usize,
    #[arg(long, value_enum, default_value = "consistent")]
    vertex_mode: VertexModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, env = "POSFREE_THREADS")]
    threads: Option<usize>,
}

impl Common {
    fn conventions(&self) -> EvalConventions {
        EvalConventions::default().with_max_bounces(self.max_bounces).with_jacobian(self.vertex_mode.into())
    }

    fn init_threads(&self) -> Result<()> {
        if let Some(n) = self.threads {
            if n == 0 {
                bail!("--threads must be at least 1");
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct MaterialArgs {
    #[arg(long, value_enum, default_value = "white")]
    material: MaterialArg,
    #[arg(long, value_enum, default_value = "ggx")]
    ndf: NdfArg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Second roughness for anisotropic surfaces (defaults to --alpha).
    #[arg(long)]
    alpha_y: Option<f64>,
    /// Interior index of refraction for dielectrics.
    #[arg(long, default_value_t = 1.5)]
    eta: f64,
}

impl MaterialArgs {
    fn profile(&self) -> RoughnessProfile {
        let family = match self.ndf {
            NdfArg::Ggx => NdfFamily::Ggx,
            NdfArg::Beckmann => NdfFamily::Beckmann,
        };
        RoughnessProfile::new(family, self.alpha, self.alpha_y.unwrap_or(self.alpha))
    }

    fn material(&self) -> MaterialSpec {
        let r = self.profile();
        match self.material {
            MaterialArg::White => MaterialSpec::white_conductor(r),
            MaterialArg::Copper => MaterialSpec::conductor(ConductorIor::COPPER, r),
            MaterialArg::Gold => MaterialSpec::conductor(ConductorIor::GOLD, r),
            MaterialArg::Aluminum => MaterialSpec::conductor(ConductorIor::ALUMINUM, r),
            MaterialArg::Dielectric => MaterialSpec::dielectric(self.eta, r),
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, conflicts_with = "preset")]
    scene: Option<PathBuf>,
    /// Built-in scene: furnace, directional, point, slab, glass-env, sv-roughness, copper.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    spp: Option<usize>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    #[arg(long, value_enum)]
    vertex_mode: Option<VertexModeArg>,
    #[arg(long)]
    max_bounces: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "POSFREE_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Surface interactions per camera path.
    #[arg(long)]
    depth: Option<usize>,
    /// Override the resolution, e.g. 128x96.
    #[arg(long)]
    resolution: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-pixel standard error image.
    #[arg(long)]
    std_error_out: Option<PathBuf>,
}

#[derive(Args)]
struct FurnaceArgs {
    #[command(flatten)]
    material: MaterialArgs,
    #[command(flatten)]
    common: Common,
    /// Incidence angles in degrees.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 30.0, 60.0, 85.0])]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
}

#[derive(Args)]
struct LobeArgs {
    #[command(flatten)]
    material: MaterialArgs,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.0)]
    theta_i: f64,
    #[arg(long, default_value_t = 0.0)]
    phi_i: f64,
    #[arg(long, default_value_t = 16)]
    n_theta: usize,
    #[arg(long, default_value_t = 32)]
    n_phi: usize,
    /// Walks per grid node.
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VndfArgs {
    #[command(flatten)]
    material: MaterialArgs,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 30.0, 60.0, 85.0])]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0.01)]
    min_p: f64,
}

#[derive(Args)]
struct ReciprocityArgs {
    #[command(flatten)]
    material: MaterialArgs,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "pt")]
    estimator: EstimatorArg,
    /// Directions per axis of the theta x phi grid.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Largest acceptable fraction of pairs beyond 3 sigma.
    #[arg(long, default_value_t = 0.01)]
    max_violation_rate: f64,
    /// Per-pair CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    material: MaterialArgs,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 30.0, 60.0, 85.0])]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 250_000)]
    samples: u64,
}

fn incidence(theta_deg: f64) -> Vec3 {
    Vec3::from_spherical(theta_deg.to_radians(), 0.0)
}

fn load_scene(args: &RenderArgs) -> Result<SceneFile> {
    let mut file = match (&args.scene, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_scene(&text).with_context(|| format!("in scene file {}", path.display()))?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => bail!("either --scene or --preset is required"),
    };
    let cfg = &mut file.config;
    if let Some(v) = args.spp {
        cfg.spp = v;
    }
    if let Some(v) = args.estimator {
        cfg.estimator = v.into();
    }
    if let Some(v) = args.vertex_mode {
        cfg.vertex_mode = v.into();
    }
    if let Some(v) = args.max_bounces {
        cfg.max_bounces = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.threads {
        cfg.threads = Some(v);
    }
    if let Some(v) = args.strategy {
        cfg.strategy = match v {
            StrategyArg::Mis => Strategy::Mis,
            StrategyArg::Bsdf => Strategy::BsdfOnly,
            StrategyArg::Light => Strategy::LightOnly,
        };
    }
    if let Some(v) = args.depth {
        cfg.depth = v;
    }
    if let Some(res) = &args.resolution {
        let (w, h) = res.split_once('x').context("--resolution expects WIDTHxHEIGHT")?;
        file.scene.camera.width = w.trim().parse().context("bad resolution width")?;
        file.scene.camera.height = h.trim().parse().context("bad resolution height")?;
    }
    Ok(file)
}

fn run_render(args: &RenderArgs) -> Result<bool> {
    let SceneFile { scene, config } = load_scene(args)?;
    let cfg: RunConfig = config;
    let out = render(&scene, &cfg)?;
    write_pfm(&out.image, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.std_error_out {
        write_pfm(&out.std_error, path).with_context(|| format!("writing {}", path.display()))?;
    }
    let d = out.diagnostics;
    println!(
        "wrote {} ({}x{}, {} spp); walks = {}, truncated = {}, sampling failures = {}, dropped = {}",
        args.out.display(),
        scene.camera.width,
        scene.camera.height,
        cfg.spp,
        d.walks,
        d.truncated_walks,
        d.sampling_failures,
        d.non_finite_dropped
    );
    Ok(true)
}

fn run_furnace(args: &FurnaceArgs) -> Result<bool> {
    args.common.init_threads()?;
    let mat = args.material.material();
    let conv = args.common.conventions();
    let mut ok = true;
    println!("theta_i_deg,eval_albedo,std_error,sampler_albedo,failure_fraction,pass");
    for &t in &args.theta {
        let r = furnace_parallel(incidence(t), &mat, &conv, args.samples, args.common.seed);
        let pass = (r.eval_albedo - 1.0).abs() <= args.tolerance;
        ok &= pass;
        println!(
            "{t},{:.6},{:.6},{:.6},{:.3e},{}",
            r.eval_albedo, r.eval_std_error, r.sampler_albedo, r.failure_fraction, pass
        );
    }
    println!("furnace: {}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn run_lobe(args: &LobeArgs) -> Result<bool> {
    args.common.init_threads()?;
    let mat = args.material.material();
    let wi = Vec3::from_spherical(args.theta_i.to_radians(), args.phi_i.to_radians());
    let settings = LobeSettings {
        n_theta: args.n_theta,
        n_phi: args.n_phi,
        samples_per_node: args.samples,
        seed: args.common.seed,
        ..LobeSettings::default()
    };
    let table = lobe_tabulate(wi, &mat, &args.common.conventions(), &settings);
    match &args.out {
        Some(path) => {
            std::fs::write(path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", table.summary());
        }
        None => {
            print!("{}", table.to_csv());
            eprint!("{}", table.summary());
        }
    }
    Ok(true)
}

fn run_vndf(args: &VndfArgs) -> Result<bool> {
    args.common.init_threads()?;
    let profile = args.material.profile();
    let mut ok = true;
    println!("theta_w_deg,statistic,dof,p_value,normalization,pass");
    for (i, &t) in args.theta.iter().enumerate() {
        let r = vndf_chi_square(&profile, incidence(t), args.samples, 16, 16, args.common.seed + i as u64)?;
        let pass = r.chi_square.p_value > args.min_p && (r.normalization - 1.0).abs() <= 1e-3;
        ok &= pass;
        println!(
            "{t},{:.3},{},{:.4},{:.6},{}",
            r.chi_square.statistic, r.chi_square.dof, r.chi_square.p_value, r.normalization, pass
        );
    }
    println!("vndf-test: {}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn run_reciprocity(args: &ReciprocityArgs) -> Result<bool> {
    args.common.init_threads()?;
    let mat = args.material.material();
    if mat.is_dielectric() {
        bail!("the reciprocity sweep expects a conductor");
    }
    let dirs = direction_grid(args.grid, args.grid, 85f64.to_radians());
    let pairs = direction_pairs(&dirs);
    println!("pairs = {}", pairs.len());
    println!("single-bounce closed form: max relative asymmetry = {:.3e}", single_bounce_asymmetry(&mat, &pairs));
    let mut ok = true;
    for mode in [VertexJacobian::CancellationConsistent, VertexJacobian::PaperLiteral] {
        let conv = args.common.conventions().with_jacobian(mode);
        let report = reciprocity_parallel(&mat, &conv, &pairs, args.estimator.into(), args.samples, args.common.seed);
        let rate = report.violation_rate(3.0);
        let pass = rate <= args.max_violation_rate;
        if mode == VertexJacobian::CancellationConsistent {
            ok &= pass;
            if let Some(path) = &args.out {
                let mut csv = String::from("theta_a_deg,phi_a_deg,theta_b_deg,phi_b_deg,forward,backward,std_error,z\n");
                for c in &report.cells {
                    csv.push_str(&format!(
                        "{:.4},{:.4},{:.4},{:.4},{:.9e},{:.9e},{:.3e},{:.3}\n",
                        c.omega_a.theta().to_degrees(),
                        c.omega_a.phi().to_degrees(),
                        c.omega_b.theta().to_degrees(),
                        c.omega_b.phi().to_degrees(),
                        c.forward,
                        c.backward,
                        c.std_error,
                        c.z_score()
                    ));
                }
                std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        println!(
            "{:?}: violations(3 sigma) = {} ({:.3}%), max z = {:.2}{}",
            mode,
            report.violations(3.0),
            100.0 * rate,
            report.max_z(),
            if mode == VertexJacobian::CancellationConsistent {
                if pass {
                    " PASS"
                } else {
                    " FAIL"
                }
            } else {
                " (reported only)"
            }
        );
    }
    Ok(ok)
}

fn run_compare(args: &CompareArgs) -> Result<bool> {
    args.common.init_threads()?;
    let mat = args.material.material();
    println!("theta_i_deg,consistent_albedo,consistent_se,literal_albedo,literal_se");
    for &t in &args.theta {
        let base = args.common.conventions();
        let c = furnace_parallel(
            incidence(t),
            &mat,
            &base.with_jacobian(VertexJacobian::CancellationConsistent),
            args.samples,
            args.common.seed,
        );
        let l = furnace_parallel(incidence(t), &mat, &base.with_jacobian(VertexJacobian::PaperLiteral), args.samples, args.common.seed);
        println!("{t},{:.6},{:.6},{:.6},{:.6}", c.eval_albedo, c.eval_std_error, l.eval_albedo, l.eval_std_error);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Render(a) => run_render(a),
        Command::Furnace(a) => run_furnace(a),
        Command::Lobe(a) => run_lobe(a),
        Command::VndfTest(a) => run_vndf(a),
        Command::Reciprocity(a) => run_reciprocity(a),
        Command::Mse { a, b } => (|| {
            let x = read_pfm(a).with_context(|| format!("reading {}", a.display()))?;
            let y = read_pfm(b).with_context(|| format!("reading {}", b.display()))?;
            println!("{:.9e}", mse(&x, &y)?);
            Ok(true)
        })(),
        Command::CompareModes(a) => run_compare(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
