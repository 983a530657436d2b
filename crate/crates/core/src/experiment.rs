//! End-to-end experiment runner.
//!
//! A run goes parse → compile → grid MDP → product → pruning → initial
//! check → learning → greedy evaluation, and writes:
//!
//! | file             | content                                              |
//! |------------------|------------------------------------------------------|
//! | `summary.json`   | config echo, pruning statistics, `f(p^0)`, results   |
//! | `episodes.csv`   | one row per learning episode                         |
//! | `automaton.dot`  | the constraint automaton                             |
//! | `automaton.json` | the same, as JSON                                    |
//! | `product.json`   | product size per layer                               |
//! | `shield.json`    | per-node `f`, `π_C` and `Act` (only with `dump_shield`) |
//!
//! Summaries contain no timestamps or timings, so identical configs give
//! byte-identical `summary.json` files.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automaton::{compile, TotalAutomaton};
use crate::error::{Error, Result};
use crate::gridworld::{build_grid_mdp, canonical_case_study, Cell, GridSpec};
use crate::learner::{
    audit, evaluate, learn, write_episode_csv, EvaluationReport, LearnerConfig, LearningRun,
    ResetMode,
};
use crate::mdp::LabeledIntervalMdp;
use crate::product::{build_product, ProductSummary, TimeTotalProductMdp};
use crate::reachability::{initial_check_error, multi_shot_prune, MultiShotPlan, Shield};
use crate::twtl::{parse_formula, Formula, DELIVERY_TASK};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TWSHIELD_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "twshield-out";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OneShot,
    MultiShot,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::OneShot => "one_shot",
            Mode::MultiShot => "multi_shot",
        }
    }
}

/// A grid given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSource {
    Path(PathBuf),
    Inline(Box<GridSpec>),
}

impl Default for GridSource {
    fn default() -> Self {
        GridSource::Inline(Box::new(canonical_case_study().0))
    }
}

impl GridSource {
    pub fn load(&self) -> Result<GridSpec> {
        match self {
            GridSource::Inline(spec) => Ok((**spec).clone()),
            GridSource::Path(path) => Ok(serde_json::from_str(&fs::read_to_string(path)?)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSource,
    /// Overrides the grid's assumed uncertainty.
    pub epsilon: Option<f64>,
    pub formula: String,
    pub pr_des: f64,
    pub mode: Mode,
    /// Defaults to the completion times of the formula's top-level
    /// concatenation operands.
    pub multishot_timestamps: Option<Vec<usize>>,
    /// Defaults to the N-th root of `pr_des` for every segment.
    pub multishot_thresholds: Option<Vec<f64>>,
    /// Episode length; defaults to the formula's time bound.
    pub horizon: Option<usize>,
    /// Start cell of the first episode.
    pub start: Cell,
    pub learner: LearnerConfig,
    pub eval_episodes: usize,
    /// Defaults to the learner seed plus one.
    pub eval_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    /// Report a failed initial check instead of aborting.
    pub allow_unsafe: bool,
    pub dump_shield: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: GridSource::default(),
            epsilon: None,
            formula: DELIVERY_TASK.to_owned(),
            pr_des: 0.9,
            mode: Mode::OneShot,
            multishot_timestamps: None,
            multishot_thresholds: None,
            horizon: None,
            start: Cell::new(3, 2),
            learner: LearnerConfig::default(),
            eval_episodes: 10_000,
            eval_seed: None,
            output_dir: None,
            allow_unsafe: false,
            dump_shield: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Output directory: the config field, else the environment variable,
    /// else `twshield-out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pr_des > 0.0 && self.pr_des <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "pr_des {} outside (0, 1]",
                self.pr_des
            )));
        }
        if let Some(e) = self.epsilon {
            if !(0.0..1.0).contains(&e) {
                return Err(Error::InvalidConfig(format!("epsilon {e} outside [0, 1)")));
            }
        }
        if self.mode == Mode::OneShot
            && (self.multishot_timestamps.is_some() || self.multishot_thresholds.is_some())
        {
            return Err(Error::InvalidConfig(
                "multi-shot plan given for a one-shot run".into(),
            ));
        }
        self.learner.validate()
    }
}

/// Completion times of the top-level concatenation operands, starting with
/// 0: operand `i` ends `Σ_{j≤i} bound_j + i` steps after the start.
pub fn concat_timestamps(formula: &Formula) -> Vec<usize> {
    fn operands<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::Concat(l, r) => {
                operands(l, out);
                operands(r, out);
            }
            other => out.push(other),
        }
    }
    let mut ops = Vec::new();
    operands(formula, &mut ops);
    let mut out = vec![0];
    let mut t = 0;
    for (i, op) in ops.iter().enumerate() {
        t += op.time_bound() as usize + usize::from(i > 0);
        out.push(t);
    }
    out
}

/// Everything up to and including pruning.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub grid: GridSpec,
    pub formula: Formula,
    pub mdp: LabeledIntervalMdp,
    pub automaton: TotalAutomaton,
    pub product: TimeTotalProductMdp,
    pub plan: MultiShotPlan,
    pub shield: Shield,
}

impl Pipeline {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Pipeline> {
        cfg.validate().map_err(|e| e.at_stage("config"))?;
        let mut grid = cfg.grid.load().map_err(|e| e.at_stage("grid"))?;
        if let Some(eps) = cfg.epsilon {
            grid = grid.with_assumed_uncertainty(eps);
        }
        grid.validate().map_err(|e| e.at_stage("grid"))?;
        let formula =
            parse_formula(&cfg.formula, &grid.propositions).map_err(|e| e.at_stage("parse"))?;
        let automaton = compile(&formula, &grid.propositions).map_err(|e| e.at_stage("compile"))?;
        let mdp = build_grid_mdp(&grid).map_err(|e| e.at_stage("grid"))?;
        let horizon = cfg.horizon.unwrap_or(formula.time_bound() as usize);
        let product =
            build_product(&mdp, &automaton, horizon).map_err(|e| e.at_stage("product"))?;
        let plan = match cfg.mode {
            Mode::OneShot => MultiShotPlan::one_shot(horizon, cfg.pr_des),
            Mode::MultiShot => {
                let timestamps = cfg
                    .multishot_timestamps
                    .clone()
                    .unwrap_or_else(|| concat_timestamps(&formula));
                if timestamps.last() != Some(&(formula.time_bound() as usize)) {
                    return Err(Error::InvalidPlan(format!(
                        "timestamps {timestamps:?} must end at the formula's time bound {}",
                        formula.time_bound()
                    ))
                    .at_stage("plan"));
                }
                match &cfg.multishot_thresholds {
                    Some(th) => MultiShotPlan::with_target(timestamps, th.clone(), cfg.pr_des),
                    None => MultiShotPlan::uniform(timestamps, cfg.pr_des),
                }
            }
        }
        .map_err(|e| e.at_stage("plan"))?;
        let shield = multi_shot_prune(&product, &plan).map_err(|e| e.at_stage("prune"))?;
        Ok(Pipeline {
            grid,
            formula,
            mdp,
            automaton,
            product,
            plan,
            shield,
        })
    }

    pub fn start_state(&self, cell: Cell) -> Result<usize> {
        if cell.row >= self.grid.height || cell.col >= self.grid.width {
            return Err(Error::InvalidConfig(format!(
                "start cell {cell:?} outside the grid"
            )));
        }
        Ok(self.grid.state_index(cell))
    }

    /// Initial nodes violating the first segment's threshold. With carried
    /// start states every cell can begin an episode, so all are checked;
    /// with a fixed start only the start cell is.
    pub fn initial_violators(&self, start: usize, reset: ResetMode) -> Vec<(usize, f64)> {
        let all = self.shield.check_initial(&self.product);
        match reset {
            ResetMode::CarryState => all,
            ResetMode::FixedStart => all
                .into_iter()
                .filter(|&(n, _)| self.product.key(n).s == start)
                .collect(),
        }
    }

    pub fn pruning_stats(&self) -> PruningStats {
        let prod = &self.product;
        let open: Vec<usize> = (0..prod.node_count())
            .filter(|&n| prod.is_open(n))
            .collect();
        let open_choices: usize = open.iter().map(|&n| prod.choice_ids(n).len()).sum();
        let empty = open
            .iter()
            .filter(|&&n| self.shield.allowed_actions(prod, n).next().is_none())
            .count();
        PruningStats {
            open_nodes: open.len(),
            open_choices,
            pruned_choices: self.shield.pruned_count(),
            nodes_with_empty_act: empty,
        }
    }

    pub fn initial_values(&self) -> BTreeMap<String, f64> {
        self.product
            .initial()
            .iter()
            .map(|&n| {
                (
                    self.mdp.state_name(self.product.key(n).s).to_owned(),
                    self.shield.f[n],
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningStats {
    pub open_nodes: usize,
    pub open_choices: usize,
    pub pruned_choices: usize,
    pub nodes_with_empty_act: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCheck {
    pub threshold: f64,
    pub passed: bool,
    pub min_f: f64,
    pub violators: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningSummary {
    pub episodes: usize,
    pub satisfied: usize,
    pub satisfaction_rate: f64,
    pub ci_half_width: f64,
    pub average_reward: f64,
    pub episodes_shielded: usize,
    pub audit_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub config: ExperimentConfig,
    pub mode: Mode,
    pub epsilon: f64,
    pub pr_des: f64,
    pub timestamps: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub automaton_states: usize,
    pub product: ProductSummary,
    pub pruning: PruningStats,
    pub initial_check: InitialCheck,
    pub initial_f: BTreeMap<String, f64>,
    pub learning: LearningSummary,
    pub testing: EvaluationReport,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub summary: Summary,
    pub pipeline: Pipeline,
    pub run: LearningRun,
}

/// Runs the full pipeline in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let pipeline = Pipeline::prepare(cfg)?;
    let start = pipeline
        .start_state(cfg.start)
        .map_err(|e| e.at_stage("config"))?;
    let violators = pipeline.initial_violators(start, cfg.learner.reset_mode);
    let threshold = pipeline.shield.initial_threshold();
    if !violators.is_empty() && !cfg.allow_unsafe {
        return Err(
            initial_check_error(&pipeline.mdp, &pipeline.product, threshold, &violators)
                .at_stage("check_initial"),
        );
    }
    let prod = &pipeline.product;
    let shield = &pipeline.shield;
    let run = learn(
        prod,
        shield,
        &pipeline.mdp,
        start,
        &cfg.learner,
        !cfg.allow_unsafe,
    )
    .map_err(|e| e.at_stage("learn"))?;
    let audit_violations = audit(prod, shield, &run.logs).len();
    let eval_seed = cfg.eval_seed.unwrap_or(cfg.learner.seed.wrapping_add(1));
    let testing = evaluate(
        prod,
        shield,
        &pipeline.mdp,
        &run.policy,
        start,
        cfg.learner.reset_mode,
        cfg.eval_episodes,
        eval_seed,
    )
    .map_err(|e| e.at_stage("evaluate"))?;

    let satisfied = run.logs.iter().filter(|l| l.satisfied).count();
    let initial_f = pipeline.initial_values();
    let summary = Summary {
        version: VERSION.to_owned(),
        config: cfg.clone(),
        mode: cfg.mode,
        epsilon: pipeline.grid.assumed_uncertainty,
        pr_des: cfg.pr_des,
        timestamps: pipeline.plan.timestamps().to_vec(),
        thresholds: pipeline.plan.thresholds().to_vec(),
        automaton_states: pipeline.automaton.reachable_states().len(),
        product: prod.summary(),
        pruning: pipeline.pruning_stats(),
        initial_check: InitialCheck {
            threshold,
            passed: violators.is_empty(),
            min_f: initial_f.values().copied().fold(f64::INFINITY, f64::min),
            violators: violators
                .iter()
                .map(|&(n, f)| (pipeline.mdp.state_name(prod.key(n).s).to_owned(), f))
                .collect(),
        },
        initial_f,
        learning: LearningSummary {
            episodes: run.logs.len(),
            satisfied,
            satisfaction_rate: run.satisfaction_rate(),
            ci_half_width: crate::learner::wilson_half_width(satisfied, run.logs.len()),
            average_reward: run.average_reward(),
            episodes_shielded: run
                .logs
                .iter()
                .filter(|l| l.shield_entry_time.is_some())
                .count(),
            audit_violations,
        },
        testing,
    };
    Ok(ReportBundle {
        summary,
        pipeline,
        run,
    })
}

/// Writes the report files of a finished run into `dir`.
pub fn write_reports(bundle: &ReportBundle, dir: &Path, dump_shield: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let p = &bundle.pipeline;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&bundle.summary)? + "\n",
    )?;
    write_episode_csv(
        BufWriter::new(fs::File::create(dir.join("episodes.csv"))?),
        &bundle.run.logs,
    )?;
    fs::write(dir.join("automaton.dot"), p.automaton.export_dot())?;
    fs::write(
        dir.join("automaton.json"),
        serde_json::to_string_pretty(&p.automaton.to_document())? + "\n",
    )?;
    fs::write(
        dir.join("product.json"),
        serde_json::to_string_pretty(&p.product.summary())? + "\n",
    )?;
    if dump_shield {
        let doc = p.shield.to_document(&p.product, &p.mdp);
        serde_json::to_writer(
            BufWriter::new(fs::File::create(dir.join("shield.json"))?),
            &doc,
        )?;
    }
    Ok(())
}

/// Runs an experiment and writes its reports to the resolved output
/// directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let bundle = execute(cfg)?;
    write_reports(&bundle, &cfg.resolved_output_dir(), cfg.dump_shield)
        .map_err(|e| e.at_stage("report"))?;
    Ok(bundle)
}

/// A learned policy together with the config that produced it, so the
/// product can be rebuilt for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub config: ExperimentConfig,
    /// Greedy action per product node; `null` on the last layer.
    pub policy: Vec<Option<usize>>,
}

impl PolicyFile {
    pub fn write(&self, path: &Path) -> Result<()> {
        serde_json::to_writer(BufWriter::new(fs::File::create(path)?), self)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<PolicyFile> {
        Ok(serde_json::from_reader(std::io::BufReader::new(
            fs::File::open(path)?,
        ))?)
    }

    /// Evaluates the policy on the rebuilt pipeline.
    pub fn evaluate(&self, episodes: usize, seed: u64) -> Result<EvaluationReport> {
        let pipeline = Pipeline::prepare(&self.config)?;
        if self.policy.len() != pipeline.product.node_count() {
            return Err(Error::InvalidConfig(format!(
                "policy covers {} nodes but the product has {}",
                self.policy.len(),
                pipeline.product.node_count()
            )));
        }
        let start = pipeline.start_state(self.config.start)?;
        evaluate(
            &pipeline.product,
            &pipeline.shield,
            &pipeline.mdp,
            &self.policy,
            start,
            self.config.learner.reset_mode,
            episodes,
            seed,
        )
        .map_err(|e| e.at_stage("evaluate"))
    }
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub epsilons: Vec<f64>,
    pub pr_des: Vec<f64>,
    pub modes: Vec<Mode>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            base: ExperimentConfig::default(),
            epsilons: vec![0.03, 0.08, 0.13],
            pr_des: vec![0.5, 0.7, 0.9],
            modes: vec![Mode::OneShot, Mode::MultiShot],
        }
    }
}

impl SweepConfig {
    /// One config per (mode, ε, Pr_des), modes outermost. Each run gets
    /// its own learner seed.
    pub fn configs(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &eps in &self.epsilons {
                for &pr in &self.pr_des {
                    let mut cfg = self.base.clone();
                    cfg.mode = mode;
                    cfg.epsilon = Some(eps);
                    cfg.pr_des = pr;
                    if mode == Mode::OneShot {
                        cfg.multishot_timestamps = None;
                        cfg.multishot_thresholds = None;
                    }
                    cfg.learner.seed = self.base.learner.seed.wrapping_add(out.len() as u64);
                    cfg.output_dir = Some(
                        self.base
                            .resolved_output_dir()
                            .join(run_name(mode, eps, pr)),
                    );
                    out.push(cfg);
                }
            }
        }
        out
    }
}

pub fn run_name(mode: Mode, epsilon: f64, pr_des: f64) -> String {
    format!("{}_eps{epsilon}_pr{pr_des}", mode.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mode: Mode,
    pub epsilon: f64,
    pub pr_des: f64,
    /// `ok`, or the error that stopped the run.
    pub status: String,
    pub initial_check_passed: bool,
    pub learning_rate: Option<f64>,
    pub testing_rate: Option<f64>,
    pub testing_reward: Option<f64>,
    pub audit_violations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn row(&self, mode: Mode, epsilon: f64, pr_des: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.mode == mode && r.epsilon == epsilon && r.pr_des == pr_des)
    }

    /// Modes as rows, `(ε, Pr_des)` pairs as columns; each cell shows
    /// learning % / testing % / testing reward.
    pub fn render_table(&self) -> String {
        let mut columns: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            if !columns.contains(&(r.epsilon, r.pr_des)) {
                columns.push((r.epsilon, r.pr_des));
            }
        }
        let mut modes: Vec<Mode> = Vec::new();
        for r in &self.rows {
            if !modes.contains(&r.mode) {
                modes.push(r.mode);
            }
        }
        let width = 22;
        let mut out = format!("{:<12}", "(eps, Pr)");
        for (e, p) in &columns {
            out.push_str(&format!("{:>width$}", format!("({e}, {p})")));
        }
        out.push('\n');
        for mode in modes {
            out.push_str(&format!("{:<12}", mode.name()));
            for &(e, p) in &columns {
                let cell = match self.row(mode, e, p) {
                    Some(SweepRow {
                        learning_rate: Some(l),
                        testing_rate: Some(t),
                        testing_reward: Some(w),
                        ..
                    }) => format!("{:.2}/{:.2}/{:.1}", 100.0 * l, 100.0 * t, w),
                    Some(_) => "failed".to_owned(),
                    None => "-".to_owned(),
                };
                out.push_str(&format!("{cell:>width$}"));
            }
            out.push('\n');
        }
        out.push_str("cells: learning % / testing % / average testing reward\n");
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every configuration of the sweep. Runs are independent and
/// execute in parallel; a failing run is reported in its row and does not
/// stop the others. When `inspect` is given it sees every finished bundle
/// before the bundle is dropped.
pub fn run_sweep_with(
    sweep: &SweepConfig,
    write: bool,
    inspect: &(dyn Fn(&ExperimentConfig, &ReportBundle) + Sync),
) -> Result<SweepReport> {
    let configs = sweep.configs();
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .map(|cfg| {
            let eps = cfg.epsilon.expect("sweep sets epsilon");
            let outcome = execute(cfg).and_then(|bundle| {
                if write {
                    write_reports(&bundle, &cfg.resolved_output_dir(), cfg.dump_shield)?;
                }
                inspect(cfg, &bundle);
                Ok(bundle.summary)
            });
            match outcome {
                Ok(s) => SweepRow {
                    mode: cfg.mode,
                    epsilon: eps,
                    pr_des: cfg.pr_des,
                    status: "ok".into(),
                    initial_check_passed: s.initial_check.passed,
                    learning_rate: Some(s.learning.satisfaction_rate),
                    testing_rate: Some(s.testing.satisfaction_rate),
                    testing_reward: Some(s.testing.average_reward),
                    audit_violations: Some(s.learning.audit_violations),
                },
                Err(e) => SweepRow {
                    mode: cfg.mode,
                    epsilon: eps,
                    pr_des: cfg.pr_des,
                    initial_check_passed: !matches!(e.root(), Error::InitialCheckFailed { .. }),
                    status: e.to_string(),
                    learning_rate: None,
                    testing_rate: None,
                    testing_reward: None,
                    audit_violations: None,
                },
            }
        })
        .collect();
    let report = SweepReport { rows };
    if write {
        let dir = sweep.base.resolved_output_dir();
        fs::create_dir_all(&dir)?;
        report.write_csv(&dir.join("sweep.csv"))?;
        fs::write(dir.join("sweep.txt"), report.render_table())?;
    }
    Ok(report)
}

pub fn run_sweep(sweep: &SweepConfig) -> Result<SweepReport> {
    run_sweep_with(sweep, true, &|_, _| {})
}

/// Process exit code for an error: 3 for infeasibility and failed initial
/// checks, 2 for everything else (configuration, parsing, I/O).
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Infeasible { .. }
        | Error::InitialCheckFailed { .. }
        | Error::EmptyAcceptingSet { .. } => 3,
        _ => 2,
    }
}
