//! `revint`: run, audit, differentiate and serve reversible simulations.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage or input error,
//! 3 numeric abort (non-finite force).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::info;

use revint::adjoint::{self, AdjointError, Keyframe};
use revint::dynamics::{DynamicsError, Integrator, IntegratorRegistry, PositionVerlet, VelocityVerlet};
use revint::fixedpoint::{from_reals, Rounding};
use revint::scene::{self, Scene};
use revint::simulate::{audit_reversal, SimulateError};
use revint::{RecordingPolicy, Simulation};
use revint_playback::{serve, Hub, DEFAULT_SEEK_CAP};

#[derive(Parser)]
#[command(name = "revint", version, about = "Bitwise-reversible Verlet integration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scene and write a JSON-lines trajectory.
    Simulate(SimulateArgs),
    /// Run N steps forward and N back; PASS if the state returns bit for bit.
    ReverseCheck(ReverseArgs),
    /// Compare adjoint and finite-difference gradients of a keyframe cost.
    Gradcheck(GradcheckArgs),
    /// Fit initial momenta to a keyframe by gradient descent.
    Optimize(OptimizeArgs),
    /// Start the WebSocket playback service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SceneArgs {
    /// Scene JSON file, or `builtin:<name>` (spring, ring64, chain8, ...).
    #[arg(long)]
    scene: String,
    /// Override the scene's integrator.
    #[arg(long, value_parser = integrator_name)]
    integrator: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Signed step count; negative runs backward in time.
    #[arg(long, allow_hyphen_values = true)]
    steps: i64,
    /// Trajectory JSONL file.
    #[arg(long)]
    out: PathBuf,
    /// Attach q, p and H to every K-th record.
    #[arg(long)]
    snapshot_every: Option<u64>,
    /// Also write real-side positions of snapshot records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReverseArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Steps in each direction.
    #[arg(long)]
    steps: u64,
    /// Negative control: round increments with floor instead of truncation.
    #[arg(long, hide = true)]
    inject_floor_rounding: bool,
}

#[derive(Args)]
struct GradcheckArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Keyframe JSON: `at_step` and `target_q` (hex or numbers).
    #[arg(long)]
    keyframe: PathBuf,
    /// Central finite-difference step on each initial momentum.
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    /// Largest acceptable component-wise relative error.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Keyframe JSON: `at_step` and `target_q` (hex or numbers).
    #[arg(long)]
    keyframe: PathBuf,
    /// Gradient-descent iterations.
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Initial learning rate; halved whenever a step fails to lower the cost.
    #[arg(long, default_value_t = 1.0)]
    lr: f64,
    /// Cost history CSV (iteration, cost, lr).
    #[arg(long)]
    history: Option<PathBuf>,
    /// Optimized controls as JSON with hex momenta.
    #[arg(long)]
    controls_out: Option<PathBuf>,
    /// Fail (exit 1) unless final/initial cost is at most this.
    #[arg(long)]
    max_cost_ratio: Option<f64>,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address.
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Most integrator steps a single seek may take.
    #[arg(long, default_value_t = DEFAULT_SEEK_CAP)]
    seek_cap: u64,
}

enum Failure {
    Violation(anyhow::Error),
    Input(anyhow::Error),
    Numeric(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Violation(e) | Failure::Input(e) | Failure::Numeric(e) => e,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn simulate_failure(e: SimulateError) -> Failure {
    if e.is_numeric_abort() {
        Failure::Numeric(e.into())
    } else {
        Failure::Input(e.into())
    }
}

fn adjoint_failure(e: AdjointError) -> Failure {
    match e {
        AdjointError::Dynamics(DynamicsError::NonFiniteForce { .. }) | AdjointError::NonFiniteCost { .. } => {
            Failure::Numeric(e.into())
        }
        AdjointError::RetraceMismatch { .. } => Failure::Violation(e.into()),
        e => Failure::Input(e.into()),
    }
}

fn integrator_name(name: &str) -> Result<String, String> {
    let registry = IntegratorRegistry::default();
    match registry.get(name) {
        Ok(_) => Ok(name.to_string()),
        Err(_) => Err(format!(
            "unknown integrator; available: {}",
            registry.names().collect::<Vec<_>>().join(", ")
        )),
    }
}

fn load_scene(args: &SceneArgs) -> anyhow::Result<Scene> {
    let mut sc = match args.scene.strip_prefix("builtin:") {
        Some(name) => scene::builtin(name).ok_or_else(|| anyhow!("unknown built-in scene '{name}'"))?,
        None => {
            let text = fs::read_to_string(&args.scene).with_context(|| format!("reading {}", args.scene))?;
            Scene::from_json(&text).with_context(|| format!("parsing {}", args.scene))?
        }
    };
    if let Some(name) = &args.integrator {
        sc.integrator = name.clone();
    }
    Ok(sc)
}

fn load_simulation(args: &SceneArgs) -> anyhow::Result<Simulation> {
    Ok(Simulation::new(load_scene(args)?)?)
}

fn load_keyframe(path: &Path) -> anyhow::Result<Keyframe> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Keyframe::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let sim = load_simulation(&args.scene)?;
    let policy = match args.snapshot_every {
        Some(k) => RecordingPolicy::snapshots(k),
        None => RecordingPolicy::hashes_only(),
    };
    let trajectory = sim.run(args.steps, policy).map_err(simulate_failure)?;
    let mut out = create(&args.out)?;
    trajectory.write_jsonl(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.csv {
        let mut csv = create(path)?;
        trajectory.write_csv(&mut csv)?;
        csv.flush()?;
    }
    info!(
        "{} records, final step {} hash {}",
        trajectory.records.len(),
        trajectory.final_state.step,
        trajectory.final_state.hash()
    );
    Ok(())
}

fn run_reverse_check(args: ReverseArgs) -> Result<(), Failure> {
    let mut sim = load_simulation(&args.scene)?;
    if args.inject_floor_rounding {
        let floored: Arc<dyn Integrator> = match sim.integrator().name() {
            VelocityVerlet::NAME => Arc::new(VelocityVerlet::with_rounding(Rounding::Floor)),
            _ => Arc::new(PositionVerlet::with_rounding(Rounding::Floor)),
        };
        sim = sim.with_integrator(floored);
    }
    let audit = audit_reversal(&sim, args.steps).map_err(simulate_failure)?;
    if audit.passed() {
        println!("PASS {} steps={} hash={}", sim.scene().name, audit.steps, audit.initial);
        Ok(())
    } else {
        let step = audit
            .first_divergence
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        println!(
            "FAIL {} steps={} first_divergent_step={step} initial={} returned={}",
            sim.scene().name,
            audit.steps,
            audit.initial,
            audit.returned
        );
        Err(Failure::Violation(anyhow!("state did not return bit for bit")))
    }
}

fn run_gradcheck(args: GradcheckArgs) -> Result<(), Failure> {
    if !args.delta.is_finite() || args.delta <= 0.0 {
        return Err(Failure::Input(anyhow!("--delta must be positive")));
    }
    let sim = load_simulation(&args.scene)?;
    let kf = load_keyframe(&args.keyframe)?;
    let report = adjoint::gradcheck(&sim, &adjoint::scene_controls(&sim), &kf, args.delta).map_err(adjoint_failure)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    if report.max_rel_err < args.tol {
        Ok(())
    } else {
        Err(Failure::Violation(anyhow!(
            "max relative error {} exceeds {}",
            report.max_rel_err,
            args.tol
        )))
    }
}

fn run_optimize(args: OptimizeArgs) -> Result<(), Failure> {
    if args.iterations == 0 {
        return Err(Failure::Input(anyhow!("--iterations must be at least 1")));
    }
    let sim = load_simulation(&args.scene)?;
    let kf = load_keyframe(&args.keyframe)?;
    let result = adjoint::optimize_keyframe(&sim, &kf, adjoint::scene_controls(&sim), args.iterations, args.lr)
        .map_err(adjoint_failure)?;
    if let Some(path) = &args.history {
        let mut out = create(path)?;
        result.write_history_csv(&mut out)?;
        out.flush()?;
    }
    if let Some(path) = &args.controls_out {
        let controls = serde_json::json!({
            "p0": from_reals(&result.controls.p0)?,
            "cost": result.final_cost(),
        });
        fs::write(path, serde_json::to_string_pretty(&controls)? + "\n")?;
    }
    let ratio = result.final_cost() / result.initial_cost();
    println!(
        "initial_cost={} final_cost={} ratio={ratio}",
        result.initial_cost(),
        result.final_cost()
    );
    match args.max_cost_ratio {
        Some(limit) if ratio.is_nan() || ratio > limit => {
            Err(Failure::Violation(anyhow!("cost ratio {ratio} exceeds {limit}")))
        }
        _ => Ok(()),
    }
}

fn run_serve(args: ServeArgs) -> Result<(), Failure> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.addr).await?;
        println!("listening on ws://{}/ws", listener.local_addr()?);
        serve(listener, Arc::new(Hub::new(args.seek_cap))).await
    })?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::ReverseCheck(a) => run_reverse_check(a),
        Command::Gradcheck(a) => run_gradcheck(a),
        Command::Optimize(a) => run_optimize(a),
        Command::Serve(a) => run_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.exit_code())
        }
    }
}
