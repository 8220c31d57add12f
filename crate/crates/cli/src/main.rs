//! `gravistab`: build spherical steady states of the gravitational
//! Vlasov-Poisson system, run the stability check suites, and drive
//! particle evolutions. Exit codes: 0 pass, 2 check failure, 3 runtime
//! blow-up, 64 usage.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use gravistab_core::checks;
use gravistab_core::dynamics::{
    apply_perturbation, evolve, stability_experiment, write_diagnostics_csv, DiagnosticsConfig,
    ExperimentConfig, PerturbationKind, Solver,
};
use gravistab_core::equilibrium::{
    build_equilibrium, read_model_dir, sample_particles, write_model_dir, AnsatzLaw, BuildError,
    EquilibriumModel,
};
use gravistab_core::functionals::{energy_report, DistributionView, PhaseGrid};
use gravistab_core::radial::{RadialGrid, DEFAULT_GRID_NODES};

const EXIT_CHECK_FAILURE: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "gravistab", version, about)]
struct Cli {
    /// Worker threads for the parallel kernels (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Flat key=value configuration file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model construction.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Pass/fail verification suites against a built model.
    Check(CheckArgs),
    /// Particle evolution with diagnostics.
    Evolve(EvolveArgs),
    /// The orbital-stability experiment.
    Stability(StabilityArgs),
}

#[derive(Subcommand)]
enum ModelAction {
    /// Build a steady state and write the model directory.
    Build(BuildArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Distribution law.
    #[arg(long, value_enum)]
    law: LawKind,
    /// Polytropic index (polytrope only).
    #[arg(long)]
    n: Option<f64>,
    /// Polytropic amplitude C_F (polytrope only).
    #[arg(long)]
    cf: Option<f64>,
    /// Central depth u_c = E0 - φ(0).
    #[arg(long)]
    uc: Option<f64>,
    /// Grid nodes for the model profiles.
    #[arg(long)]
    grid_nodes: Option<usize>,
    /// Radial search budget for the support edge.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum LawKind {
    Polytrope,
    King,
}

#[derive(Args)]
struct CheckArgs {
    /// Which suite to run.
    #[arg(value_enum)]
    suite: CheckSuite,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random fields/family members.
    #[arg(long)]
    fields: Option<usize>,
    /// Report file (JSON); defaults to stdout only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum CheckSuite {
    Inequalities,
    Antonov,
    Coercivity,
    Rearrangement,
    Kernel,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    model: PathBuf,
    /// Particle count.
    #[arg(long)]
    n: Option<usize>,
    /// Duration in dynamical times.
    #[arg(long)]
    t: Option<f64>,
    /// Steps per dynamical time.
    #[arg(long)]
    steps_per_tdyn: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    /// Perturbation `kind:amplitude` with kind one of scale, boost,
    /// reversal, kick.
    #[arg(long)]
    perturb: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Diagnostics cadence in steps.
    #[arg(long)]
    cadence: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum SolverKind {
    Radial,
    Direct,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Duration in dynamical times.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    Scale,
    Boost,
    Reversal,
    Kick,
}

impl From<KindArg> for PerturbationKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Scale => PerturbationKind::Scale,
            KindArg::Boost => PerturbationKind::BulkVelocity,
            KindArg::Reversal => PerturbationKind::OuterShellReversal,
            KindArg::Kick => PerturbationKind::QuadrupoleKick,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    gravistab_core::exec::configure_threads(cli.threads);
    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("config: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => RunConfig::default(),
    };
    let result = match cli.command {
        Command::Model {
            action: ModelAction::Build(args),
        } => cmd_model_build(args, &mut cfg),
        Command::Check(args) => cmd_check(args, &mut cfg),
        Command::Evolve(args) => cmd_evolve(args, &mut cfg),
        Command::Stability(args) => cmd_stability(args, &mut cfg),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load_model(path: &std::path::Path) -> Result<EquilibriumModel, String> {
    read_model_dir(path).map_err(|e| format!("loading model {}: {e}", path.display()))
}

fn cmd_model_build(args: BuildArgs, cfg: &mut RunConfig) -> Result<ExitCode, String> {
    let uc = cfg.resolve("uc", args.uc, 1.0)?;
    let nodes = cfg.resolve("grid_nodes", args.grid_nodes, DEFAULT_GRID_NODES)?;
    let law = match args.law {
        LawKind::King => {
            cfg.set("law", "king");
            AnsatzLaw::King
        }
        LawKind::Polytrope => {
            let n = cfg.resolve("n", args.n, 1.0)?;
            let c_f = cfg.resolve("cf", args.cf, 1.0)?;
            cfg.set("law", "polytrope");
            AnsatzLaw::polytrope(n, c_f).map_err(|e| e.to_string())?
        }
    };
    // Default search budget: generous multiple of the law's own length
    // scale at the requested depth.
    let scale = (uc / law.density_of_depth(uc)).sqrt();
    let r_max = cfg.resolve("r_max", args.r_max, 40.0 * scale)?;
    let grid = RadialGrid::uniform(r_max, nodes).map_err(|e| e.to_string())?;

    match build_equilibrium(&law, uc, &grid) {
        Ok(model) => {
            write_model_dir(&model, &args.out).map_err(|e| e.to_string())?;
            std::fs::write(args.out.join("run_config.txt"), cfg.to_text())
                .map_err(|e| e.to_string())?;
            let (inner, outer) = model.self_consistency_residual();
            let (pde_inner, pde_outer) = model.pde_residual();
            println!(
                "built: M = {:.6}, R = {:.6}, E0 = {:.6}; residuals {:.2e}/{:.2e} (law), {:.2e}/{:.2e} (field)",
                model.mass(),
                model.support_radius(),
                model.e0(),
                inner,
                outer,
                pde_inner,
                pde_outer
            );
            let pass =
                inner <= 1e-6 && outer <= 1e-4 && pde_inner <= 1e-6 && pde_outer <= 1e-4;
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("residuals exceed tolerances");
                ExitCode::from(EXIT_CHECK_FAILURE)
            })
        }
        Err(BuildError::NonCompactSupport(_)) => {
            eprintln!("non-compact support: depth never reaches zero within the grid");
            Ok(ExitCode::from(EXIT_CHECK_FAILURE))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_check(args: CheckArgs, cfg: &mut RunConfig) -> Result<ExitCode, String> {
    let seed = cfg.resolve("seed", args.seed, 42)?;
    let model = load_model(&args.model)?;
    let report = match args.suite {
        CheckSuite::Inequalities => {
            let fields = cfg.resolve("fields", args.fields, 100)?;
            checks::check_interpolation(seed, fields)
        }
        CheckSuite::Antonov => {
            let fields = cfg.resolve("fields", args.fields, 50)?;
            checks::check_antonov(&model, seed, fields)
        }
        CheckSuite::Coercivity => {
            let fields = cfg.resolve("fields", args.fields, 50)?;
            checks::check_coercivity(&model, seed, fields)
        }
        CheckSuite::Rearrangement => checks::check_rearrangement(&model, seed),
        CheckSuite::Kernel => checks::check_kernel(&model, seed),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    println!("{json}");
    if let Some(out) = &args.out {
        if let Some(parent) = out.parent() {
            std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
        }
        std::fs::write(out, &json).map_err(|e| e.to_string())?;
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILURE)
    })
}

fn parse_perturbation(spec: &str) -> Result<(PerturbationKind, f64), String> {
    let (kind, amp) = spec
        .split_once(':')
        .ok_or_else(|| format!("perturbation {spec:?}: expected kind:amplitude"))?;
    let amplitude: f64 = amp
        .parse()
        .map_err(|_| format!("perturbation amplitude {amp:?} is not a number"))?;
    let kind = match kind {
        "scale" => PerturbationKind::Scale,
        "boost" => PerturbationKind::BulkVelocity,
        "reversal" => PerturbationKind::OuterShellReversal,
        "kick" => PerturbationKind::QuadrupoleKick,
        other => return Err(format!("unknown perturbation kind {other:?}")),
    };
    Ok((kind, amplitude))
}

fn cmd_evolve(args: EvolveArgs, cfg: &mut RunConfig) -> Result<ExitCode, String> {
    let model = load_model(&args.model)?;
    let n = cfg.resolve("n", args.n, 100_000)?;
    let t = cfg.resolve("t", args.t, 20.0)?;
    let steps = cfg.resolve("steps_per_tdyn", args.steps_per_tdyn, 200)?;
    let seed = cfg.resolve("seed", args.seed, 42)?;
    let cadence = cfg.resolve("cadence", args.cadence, 50)?;
    let solver_kind = match args.solver {
        Some(SolverKind::Direct) => "direct",
        Some(SolverKind::Radial) | None => "radial",
    };
    cfg.set("solver", solver_kind);

    let mut ensemble = sample_particles(&model, n, seed);
    let mut pin_shift = true;
    if let Some(spec) = &args.perturb {
        cfg.set("perturb", spec.clone());
        let (kind, amplitude) = parse_perturbation(spec)?;
        apply_perturbation(&mut ensemble, &model, kind, amplitude);
        pin_shift = kind.is_spherical();
    }
    let eps = model.support_radius() * (n as f64).powf(-1.0 / 3.0) / 10.0;
    let solver = match solver_kind {
        "direct" => Solver::Direct { eps },
        _ => Solver::Radial,
    };
    let t_dyn = model.dynamical_time();
    let dt = t_dyn / steps as f64;
    let diag = DiagnosticsConfig::new(&model, pin_shift);
    let outcome = evolve(&mut ensemble, &solver, dt, t * t_dyn, cadence, &diag)
        .map_err(|e| e.to_string())?;

    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    write_diagnostics_csv(&outcome.records, &mut csv).map_err(|e| e.to_string())?;
    std::fs::write(args.out.join("diagnostics.csv"), csv).map_err(|e| e.to_string())?;
    let mut snap = Vec::new();
    ensemble.write_snapshot(&mut snap).map_err(|e| e.to_string())?;
    std::fs::write(args.out.join("snapshot.bin"), snap).map_err(|e| e.to_string())?;
    let view = DistributionView::ensemble(&ensemble, PhaseGrid::default_for(&model));
    let final_energy = energy_report(&view).map_err(|e| e.to_string())?;
    std::fs::write(
        args.out.join("final_energy.json"),
        serde_json::to_string_pretty(&final_energy).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    std::fs::write(args.out.join("run_config.txt"), cfg.to_text()).map_err(|e| e.to_string())?;

    if let Some(reason) = outcome.aborted {
        eprintln!("aborted: {reason}");
        return Ok(ExitCode::from(EXIT_BLOW_UP));
    }
    println!(
        "evolved {} particles to t = {:.3} t_dyn; {} diagnostic samples",
        n,
        t,
        outcome.records.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_stability(args: StabilityArgs, cfg: &mut RunConfig) -> Result<ExitCode, String> {
    let model = load_model(&args.model)?;
    let kind: PerturbationKind = args.kind.into();
    let amplitude = cfg.resolve("amplitude", args.amplitude, 0.01)?;
    let n = cfg.resolve(
        "n",
        args.n,
        if kind.is_spherical() { 100_000 } else { 2_000 },
    )?;
    let t = cfg.resolve("t", args.t, 20.0)?;
    let seed = cfg.resolve("seed", args.seed, 42)?;
    let exp_cfg = ExperimentConfig {
        n_particles: n,
        t_end_dynamical: t,
        ..ExperimentConfig::default()
    };
    let outcome =
        stability_experiment(&model, kind, amplitude, seed, &exp_cfg).map_err(|e| e.to_string())?;

    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    write_diagnostics_csv(&outcome.records, &mut csv).map_err(|e| e.to_string())?;
    std::fs::write(args.out.join("distance_series.csv"), csv).map_err(|e| e.to_string())?;
    std::fs::write(args.out.join("run_config.txt"), cfg.to_text()).map_err(|e| e.to_string())?;
    let verdict = if outcome.bounded { "bounded" } else { "unbounded" };
    std::fs::write(args.out.join("verdict.txt"), format!("{verdict}\n"))
        .map_err(|e| e.to_string())?;
    if !outcome.hypothesis.satisfied {
        eprintln!("warning: smallness proxies violated at t = 0; proceeding in exploration mode");
    }
    println!("{verdict}");
    if let Some(reason) = outcome.aborted {
        eprintln!("aborted: {reason}");
        return Ok(ExitCode::from(EXIT_BLOW_UP));
    }
    Ok(if outcome.bounded {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILURE)
    })
}
