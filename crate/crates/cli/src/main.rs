use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twshield::automaton::compile;
use twshield::experiment::{
    execute, exit_code, run_sweep, write_reports, ExperimentConfig, GridSource, Mode, Pipeline,
    PolicyFile, SweepConfig, OUTPUT_DIR_ENV,
};
use twshield::gridworld::{Cell, CASE_STUDY_PROPOSITIONS};
use twshield::learner::ResetMode;
use twshield::oracle::{verify, RandomInstanceSpec, VerifyOptions};
use twshield::twtl::parse_formula;
use twshield::{Alphabet, Error};

const VERIFY_FAILED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "twshield",
    version,
    about = "Shielded Q-learning under TWTL constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a formula and print its automaton.
    Compile(CompileArgs),
    /// Build the time-total product and print its size.
    Build(ExperimentArgs),
    /// Prune the product and report f at the initial states.
    Prune(ExperimentArgs),
    /// Run shielded learning and save the greedy policy.
    Learn(ExperimentArgs),
    /// Evaluate a saved policy.
    Eval(EvalArgs),
    /// Run the full pipeline: learn, evaluate and write all reports.
    Run(ExperimentArgs),
    /// Run the ε × Pr_des sweep for both pruning modes.
    Sweep(SweepArgs),
    /// Run the oracle battery on random instances.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpFormat {
    Dot,
    Json,
}

#[derive(Args)]
struct CompileArgs {
    formula: String,
    /// Comma-separated atomic propositions; defaults to the case-study set.
    #[arg(long, value_delimiter = ',')]
    props: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "dot")]
    format: DumpFormat,
    /// Also write automaton.dot and automaton.json here.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    OneShot,
    MultiShot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResetArg {
    CarryState,
    FixedStart,
}

/// Experiment settings. Flags override fields of `--config`.
#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON grid spec replacing the canonical case study.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// TWTL task over the grid's propositions.
    #[arg(long)]
    formula: Option<String>,
    /// Desired satisfaction probability.
    #[arg(long)]
    pr_des: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Assumed transition uncertainty.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Multi-shot segment boundaries, e.g. `0,8,15,22,35`.
    #[arg(long, value_delimiter = ',')]
    timestamps: Option<Vec<usize>>,
    /// Per-segment thresholds; their product must equal Pr_des.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Learning episodes.
    #[arg(long)]
    episodes: Option<usize>,
    /// Greedy-policy test episodes.
    #[arg(long)]
    eval_episodes: Option<usize>,
    /// Learner seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    reset_mode: Option<ResetArg>,
    /// Start cell as `row,col`.
    #[arg(long, value_name = "ROW,COL", value_parser = parse_cell)]
    start: Option<Cell>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Downgrade a failed initial check to a warning.
    #[arg(long)]
    allow_unsafe: bool,
    /// Write per-node f, π_C and Act to shield.json.
    #[arg(long)]
    dump_shield: bool,
}

fn parse_cell(text: &str) -> Result<Cell, String> {
    let (row, col) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `row,col`, got `{text}`"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Cell::new(num(row)?, num(col)?))
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                ExperimentConfig::from_json_file(path).map_err(|e| e.at_stage("config"))?
            }
            None => ExperimentConfig::default(),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(g) = &self.grid {
            cfg.grid = GridSource::Path(g.clone());
        }
        if let Some(f) = &self.formula {
            cfg.formula = f.clone();
        }
        if let Some(p) = self.pr_des {
            cfg.pr_des = p;
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::OneShot => Mode::OneShot,
                ModeArg::MultiShot => Mode::MultiShot,
            };
        }
        if self.epsilon.is_some() {
            cfg.epsilon = self.epsilon;
        }
        if self.timestamps.is_some() {
            cfg.multishot_timestamps = self.timestamps.clone();
        }
        if self.thresholds.is_some() {
            cfg.multishot_thresholds = self.thresholds.clone();
        }
        if let Some(n) = self.episodes {
            cfg.learner.episodes = n;
        }
        if let Some(n) = self.eval_episodes {
            cfg.eval_episodes = n;
        }
        if let Some(s) = self.seed {
            cfg.learner.seed = s;
        }
        if let Some(r) = self.reset_mode {
            cfg.learner.reset_mode = match r {
                ResetArg::CarryState => ResetMode::CarryState,
                ResetArg::FixedStart => ResetMode::FixedStart,
            };
        }
        if let Some(cell) = self.start {
            cfg.start = cell;
        }
        if self.output_dir.is_some() {
            cfg.output_dir = self.output_dir.clone();
        }
        cfg.allow_unsafe |= self.allow_unsafe;
        cfg.dump_shield |= self.dump_shield;
    }
}

#[derive(Args)]
struct EvalArgs {
    /// policy.json written by `learn`.
    #[arg(long)]
    policy: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    episodes: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep config (base experiment plus the ε, Pr_des and mode lists).
    #[arg(long)]
    sweep_config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pr_values: Option<Vec<f64>>,
    #[command(flatten)]
    base: ExperimentArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    max_states: usize,
    #[arg(long, default_value_t = 3)]
    max_actions: usize,
    #[arg(long, default_value_t = 6)]
    max_horizon: usize,
    #[arg(long, default_value_t = 0.3)]
    interval_width: f64,
    /// Random product instances.
    #[arg(long, default_value_t = 500)]
    instances: usize,
    #[arg(long, default_value_t = 1000)]
    lp_instances: usize,
    #[arg(long, default_value_t = 200)]
    formulas: usize,
    /// Negative control: raise f at one initial node by this amount.
    #[arg(long)]
    corrupt_f: Option<f64>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Compile(args) => cmd_compile(&args),
        Command::Build(args) => {
            let cfg = args.resolve()?;
            let p = Pipeline::prepare(&cfg)?;
            print_json(&p.product.summary())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Prune(args) => cmd_prune(&args),
        Command::Learn(args) => {
            let mut cfg = args.resolve()?;
            cfg.eval_episodes = 0;
            let bundle = execute(&cfg)?;
            let dir = cfg.resolved_output_dir();
            write_reports(&bundle, &dir, cfg.dump_shield)?;
            let policy = PolicyFile {
                config: cfg,
                policy: bundle.run.policy.clone(),
            };
            policy.write(&dir.join("policy.json"))?;
            print_json(&bundle.summary.learning)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval(args) => {
            let policy = PolicyFile::read(&args.policy).map_err(|e| e.at_stage("config"))?;
            print_json(&policy.evaluate(args.episodes, args.seed)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let bundle = execute(&cfg)?;
            write_reports(&bundle, &cfg.resolved_output_dir(), cfg.dump_shield)?;
            if !bundle.summary.initial_check.passed {
                eprintln!(
                    "warning: initial check failed (threshold {}); guarantees do not apply",
                    bundle.summary.initial_check.threshold
                );
            }
            print_json(&bundle.summary)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Verify(args) => cmd_verify(&args),
    }
}

fn cmd_compile(args: &CompileArgs) -> Result<ExitCode, Error> {
    let alphabet = match &args.props {
        Some(props) => Alphabet::new(props.iter().map(String::as_str))?,
        None => Alphabet::new(CASE_STUDY_PROPOSITIONS)?,
    };
    let formula = parse_formula(&args.formula, &alphabet).map_err(|e| e.at_stage("parse"))?;
    let aut = compile(&formula, &alphabet).map_err(|e| e.at_stage("compile"))?;
    let doc = aut.to_document();
    match args.format {
        DumpFormat::Dot => emit(&aut.export_dot())?,
        DumpFormat::Json => print_json(&doc)?,
    }
    if let Some(dir) = &args.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("automaton.dot"), aut.export_dot())?;
        std::fs::write(
            dir.join("automaton.json"),
            serde_json::to_string_pretty(&doc)? + "\n",
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_prune(args: &ExperimentArgs) -> Result<ExitCode, Error> {
    let cfg = args.resolve()?;
    let p = Pipeline::prepare(&cfg)?;
    let start = p.start_state(cfg.start)?;
    let violators = p.initial_violators(start, cfg.learner.reset_mode);
    let report = serde_json::json!({
        "timestamps": p.plan.timestamps(),
        "thresholds": p.plan.thresholds(),
        "pruning": p.pruning_stats(),
        "initial_check_passed": violators.is_empty(),
        "initial_f": p.initial_values(),
    });
    print_json(&report)?;
    if cfg.dump_shield {
        let dir = cfg.resolved_output_dir();
        std::fs::create_dir_all(&dir)?;
        write_json(
            &dir.join("shield.json"),
            &p.shield.to_document(&p.product, &p.mdp),
        )?;
    }
    if !violators.is_empty() {
        let err = twshield::reachability::initial_check_error(
            &p.mdp,
            &p.product,
            p.shield.initial_threshold(),
            &violators,
        );
        if !cfg.allow_unsafe {
            return Err(err.at_stage("check_initial"));
        }
        eprintln!("warning: {err}");
    }
    Ok(ExitCode::SUCCESS)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    serde_json::to_writer(std::io::BufWriter::new(std::fs::File::create(path)?), value)?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, Error> {
    let mut sweep = match &args.sweep_config {
        Some(path) => serde_json::from_str::<SweepConfig>(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::from(e).at_stage("config"))?,
        None => SweepConfig {
            base: args.base.resolve()?,
            ..SweepConfig::default()
        },
    };
    if args.sweep_config.is_some() {
        args.base.apply(&mut sweep.base);
    }
    if let Some(e) = &args.epsilons {
        sweep.epsilons = e.clone();
    }
    if let Some(p) = &args.pr_values {
        sweep.pr_des = p.clone();
    }
    let report = run_sweep(&sweep)?;
    emit(&report.render_table())?;
    let failed: Vec<_> = report.rows.iter().filter(|r| r.status != "ok").collect();
    for r in &failed {
        eprintln!(
            "{} ({}, {}): {}",
            r.mode.name(),
            r.epsilon,
            r.pr_des,
            r.status
        );
    }
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, Error> {
    let spec = RandomInstanceSpec {
        max_states: args.max_states,
        max_actions: args.max_actions,
        max_horizon: args.max_horizon,
        interval_width: args.interval_width,
        seed: args.seed,
    };
    let options = VerifyOptions {
        instances: args.instances,
        lp_instances: args.lp_instances,
        formulas: args.formulas,
        corrupt_f: args.corrupt_f,
        ..VerifyOptions::default()
    };
    let report = verify(&spec, &options)?;
    if args.json {
        print_json(&report)?;
    } else {
        emit(&report.render())?;
    }
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(VERIFY_FAILED))
    }
}
