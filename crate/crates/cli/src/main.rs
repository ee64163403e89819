//! `phasewitness` command-line driver.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.

mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phasewitness::search::{self, SearchConfig, SweepMode};
use phasewitness::sweep_io::{self, RunManifest, SweepRequest};
use phasewitness::validate::{self, ValidateOptions};
use phasewitness::witness::{self, BellSettings, ClampRule, WitnessReport};
use phasewitness::{DetectionNoise, OrderParam, ThermalNoise, TmsvSpec};

const THREADS_ENV: &str = "PHASEWITNESS_THREADS";

#[derive(Parser)]
#[command(name = "phasewitness", version, about = "Noise-adaptive phase-space entanglement witness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate or optimize the witness for one configuration; prints JSON.
    Eval(EvalArgs),
    /// Optimize every cell of a parameter grid; writes CSV and a manifest.
    Sweep(SweepArgs),
    /// Run the self-check suites.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    Tmsv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum NoiseKind {
    None,
    Detection,
    Thermal,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    EtaS,
    Thermal,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClampArg {
    LossChannel,
    Frozen,
}

impl From<ClampArg> for ClampRule {
    fn from(c: ClampArg) -> Self {
        match c {
            ClampArg::LossChannel => ClampRule::LossChannel,
            ClampArg::Frozen => ClampRule::FrozenCoefficients,
        }
    }
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Number of optimizer starts.
    #[arg(long, default_value_t = 16)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "loss-channel", hide = true)]
    clamp_rule: ClampArg,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            n_starts: self.starts,
            seed: self.seed,
            clamp_rule: self.clamp_rule.into(),
            ..SearchConfig::default()
        }
    }
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long, value_enum, default_value = "tmsv")]
    state: StateKind,
    /// Squeezing parameter.
    #[arg(long)]
    xi: f64,
    /// Order parameter in [-1, 0].
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, value_enum, default_value = "none")]
    noise: NoiseKind,
    /// Detection efficiency in (0, 1].
    #[arg(long)]
    eta: Option<f64>,
    /// Dimensionless decoherence time in [0, 1).
    #[arg(long)]
    r: Option<f64>,
    /// Bath occupation.
    #[arg(long)]
    nbar: Option<f64>,
    /// a1,a2,b1,b2 as complex numbers, e.g. 0.1+0.2i,-0.3,0,1i
    #[arg(long, allow_hyphen_values = true, conflicts_with = "optimize", required_unless_present = "optimize")]
    settings: Option<String>,
    /// Maximize |B| over the settings instead.
    #[arg(long)]
    optimize: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long, value_enum, required_unless_present = "from_manifest")]
    mode: Option<ModeArg>,
    #[arg(long, required_unless_present = "from_manifest")]
    xi: Option<f64>,
    /// Efficiency grid lo:hi:count (eta-s mode).
    #[arg(long)]
    eta: Option<String>,
    /// Order grid lo:hi:count or a single value.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Decoherence-time grid lo:hi:count (thermal mode).
    #[arg(long)]
    r: Option<String>,
    /// Bath occupations, comma separated (thermal mode).
    #[arg(long, default_value = "0")]
    nbar_list: String,
    /// CSV output path; the manifest is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Replay the request stored in a manifest.
    #[arg(long, conflicts_with_all = ["mode", "xi", "eta", "s", "r"])]
    from_manifest: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(clap::Args)]
struct ValidateArgs {
    /// Reduced grids and sample counts.
    #[arg(long)]
    quick: bool,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

enum Failure {
    Validation(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn eval(a: &EvalArgs) -> Result<(), Failure> {
    let StateKind::Tmsv = a.state;
    let spec = TmsvSpec::new(a.xi).map_err(usage)?;
    let s = OrderParam::real(a.s).map_err(usage)?;
    if a.noise != NoiseKind::Detection && a.eta.is_some() {
        return Err(usage("--eta applies only to --noise detection"));
    }
    if a.noise != NoiseKind::Thermal && (a.r.is_some() || a.nbar.is_some()) {
        return Err(usage("--r and --nbar apply only to --noise thermal"));
    }
    let objective: Box<dyn Fn(&BellSettings) -> phasewitness::Result<WitnessReport> + Sync> = match a.noise {
        NoiseKind::None => {
            let noise = DetectionNoise::new(1.0).map_err(usage)?;
            let rule = a.search.clamp_rule.into();
            Box::new(move |x| witness::bell_value_detection_with(&spec, x, &s, &noise, rule))
        }
        NoiseKind::Detection => {
            let eta = a.eta.ok_or_else(|| usage("--noise detection requires --eta"))?;
            let noise = DetectionNoise::new(eta).map_err(usage)?;
            let rule = a.search.clamp_rule.into();
            Box::new(move |x| witness::bell_value_detection_with(&spec, x, &s, &noise, rule))
        }
        NoiseKind::Thermal => {
            let r = a.r.ok_or_else(|| usage("--noise thermal requires --r"))?;
            let nbar = a.nbar.ok_or_else(|| usage("--noise thermal requires --nbar"))?;
            let noise = ThermalNoise::new(r, nbar).map_err(usage)?;
            let rule = a.search.clamp_rule.into();
            Box::new(move |x| witness::bell_value_thermal_with(&spec, x, &s, &noise, rule))
        }
    };
    let report = match &a.settings {
        Some(text) => {
            let [a1, a2, b1, b2] = args::parse_settings(text).map_err(usage)?;
            let settings = BellSettings::new(a1, a2, b1, b2).map_err(usage)?;
            objective(&settings).map_err(|e| Failure::Validation(e.to_string()))?
        }
        None => {
            search::maximize_bell(objective, &a.search.config(), 0)
                .map_err(usage)?
                .report
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn grid_flag(name: &str, value: &Option<String>) -> Result<Vec<f64>, Failure> {
    let text = value.as_deref().ok_or_else(|| usage(format!("this mode requires --{name}")))?;
    args::parse_grid(text).map_err(|e| usage(format!("--{name}: {e}")))
}

fn sweep_request(a: &SweepArgs) -> Result<SweepRequest, Failure> {
    if let Some(path) = &a.from_manifest {
        let manifest = RunManifest::load(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        return Ok(manifest.request);
    }
    let mode = a.mode.expect("clap enforces --mode");
    let xi = a.xi.expect("clap enforces --xi");
    let s_grid = grid_flag("s", &a.s)?;
    let (mode, axis1, nbar_list) = match mode {
        ModeArg::EtaS => {
            if a.r.is_some() {
                return Err(usage("--r applies only to --mode thermal"));
            }
            (SweepMode::EtaS, grid_flag("eta", &a.eta)?, Vec::new())
        }
        ModeArg::Thermal => {
            if a.eta.is_some() {
                return Err(usage("--eta applies only to --mode eta-s"));
            }
            let nbar = args::parse_list(&a.nbar_list).map_err(|e| usage(format!("--nbar-list: {e}")))?;
            (SweepMode::Thermal, grid_flag("r", &a.r)?, nbar)
        }
    };
    Ok(SweepRequest {
        mode,
        xi,
        axis1,
        s_grid,
        nbar_list,
        config: a.search.config(),
    })
}

fn check_writable(out: &Path) -> Result<(), Failure> {
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(Failure::Io(format!("{}: directory does not exist", parent.display())));
    }
    if out.is_dir() {
        return Err(Failure::Io(format!("{}: is a directory", out.display())));
    }
    Ok(())
}

fn sweep(a: &SweepArgs, command_line: &str) -> Result<(), Failure> {
    let request = sweep_request(a)?;
    check_writable(&a.out)?;
    let result = request.run().map_err(usage)?;
    let manifest = RunManifest::new(command_line, &request, &result);
    let mpath = sweep_io::write_sweep(&a.out, &result, &manifest)
        .map_err(|e| Failure::Io(format!("{}: {e}", a.out.display())))?;
    eprintln!(
        "wrote {} rows to {} and {} in {:.1}s",
        result.cells.len(),
        a.out.display(),
        mpath.display(),
        result.wall_time_s
    );
    Ok(())
}

fn run_validate(a: &ValidateArgs) -> Result<(), Failure> {
    let results = validate::run(&ValidateOptions {
        quick: a.quick,
        inject_fault: a.inject_fault,
    });
    let mut failed = 0;
    for r in &results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        match &r.error {
            Some(e) => println!("{verdict} {:<22} error: {e}", r.name),
            None => println!(
                "{verdict} {:<22} worst residual {:.3e} (tol {:.0e}, {} checks)",
                r.name, r.worst_residual, r.tolerance, r.checks
            ),
        }
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(Failure::Validation(format!("{failed} of {} suites failed", results.len())));
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV}='{text}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(usage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line = std::env::args().collect::<Vec<_>>().join(" ");
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a, &command_line),
        Command::Validate(a) => run_validate(a),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
