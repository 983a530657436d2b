//! Shielded tabular Q-learning on the time-total product.
//!
//! Each episode takes `T` actions. While the shield flag is off the agent
//! explores ε-greedily inside the pruned set `Act(p)`; when `Act(p)` is
//! empty it switches to `π_C` and keeps following it until the flag is
//! cleared. The flag clears on accepting and trash nodes and, for
//! multi-shot shields, on every node of an intermediate boundary layer.
//!
//! Rewards are observed only through [`crate::mdp::step`].

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{step, ActionIdx, LabeledIntervalMdp, StateIdx};
use crate::product::{NodeId, TimeTotalProductMdp};
use crate::reachability::Shield;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSchedule {
    Constant {
        value: f64,
    },
    /// `1 / n` where `n` counts updates of the same `(p, a)`.
    InverseVisits,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub initial: f64,
    /// Multiplicative decay per episode.
    pub decay: f64,
    pub floor: f64,
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize) -> f64 {
        (self.initial * self.decay.powi(episode.min(i32::MAX as usize) as i32)).max(self.floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    /// The next episode starts from the MDP state the previous one ended in.
    CarryState,
    /// Every episode starts from the configured start state.
    FixedStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub episodes: usize,
    pub alpha: AlphaSchedule,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    pub reset_mode: ResetMode,
    /// Keep per-step trajectories in the logs (needed for auditing and
    /// replay).
    pub record_trajectories: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            episodes: 50_000,
            alpha: AlphaSchedule::Constant { value: 0.1 },
            gamma: 0.95,
            epsilon: EpsilonSchedule {
                initial: 0.3,
                decay: 0.9999,
                floor: 0.02,
            },
            seed: 0,
            reset_mode: ResetMode::CarryState,
            record_trajectories: true,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma {} outside (0, 1)",
                self.gamma
            )));
        }
        if let AlphaSchedule::Constant { value } = self.alpha {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "alpha {value} outside (0, 1]"
                )));
            }
        }
        let e = &self.epsilon;
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(in_unit(e.initial) && in_unit(e.decay) && in_unit(e.floor)) {
            return Err(Error::InvalidConfig(
                "epsilon schedule values must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One decision. Node ids and actions are stored narrow to keep full
/// learning logs small.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub node: u32,
    pub action: u16,
    pub shield_active: bool,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub index: usize,
    pub trajectory: Vec<Step>,
    pub final_node: NodeId,
    pub satisfied: bool,
    pub cumulative_reward: f64,
    pub shield_entry_time: Option<usize>,
    pub steps_shielded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningRun {
    /// Per product choice.
    pub q: Vec<f64>,
    /// Greedy action per node below the last layer.
    pub policy: Vec<Option<ActionIdx>>,
    pub logs: Vec<EpisodeLog>,
}

impl LearningRun {
    pub fn satisfaction_rate(&self) -> f64 {
        rate(
            self.logs.iter().filter(|l| l.satisfied).count(),
            self.logs.len(),
        )
    }

    pub fn average_reward(&self) -> f64 {
        if self.logs.is_empty() {
            return 0.0;
        }
        self.logs.iter().map(|l| l.cumulative_reward).sum::<f64>() / self.logs.len() as f64
    }
}

fn rate(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// Wilson score interval half-width at 95% confidence.
pub fn wilson_half_width(successes: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

struct Env<'a> {
    prod: &'a TimeTotalProductMdp,
    shield: &'a Shield,
    mdp: &'a LabeledIntervalMdp,
}

impl Env<'_> {
    fn next_node(
        &self,
        n: NodeId,
        a: ActionIdx,
        rng: &mut ChaCha8Rng,
    ) -> Result<(usize, NodeId, f64)> {
        let c = self
            .prod
            .choice_of(n, a)
            .ok_or_else(|| Error::UnavailableAction {
                state: self.mdp.state_name(self.prod.key(n).s).to_owned(),
                action: self.mdp.action_name(a).to_owned(),
            })?;
        let tr = step(self.mdp, self.prod.key(n).s, a, rng)?;
        let to = self.prod.successor(c, tr.next_state).ok_or_else(|| {
            Error::InvalidMdp(format!(
                "sampled transition ({}, {}, {}) lies outside the bounds",
                self.mdp.state_name(tr.state),
                self.mdp.action_name(a),
                self.mdp.state_name(tr.next_state)
            ))
        })?;
        Ok((c, to, tr.reward))
    }

    /// An episode may only start where the first segment's threshold is met.
    fn check_start(&self, n: NodeId) -> Result<()> {
        let threshold = self.shield.initial_threshold();
        if self.shield.f[n] < threshold {
            return Err(Error::InitialCheckFailed {
                threshold,
                violators: vec![(
                    self.mdp.state_name(self.prod.key(n).s).to_owned(),
                    self.shield.f[n],
                )],
            });
        }
        Ok(())
    }
}

fn argmax_allowed(
    prod: &TimeTotalProductMdp,
    shield: &Shield,
    q: &[f64],
    n: NodeId,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for c in prod.choice_ids(n).filter(|&c| shield.allowed[c]) {
        if best.is_none_or(|b| q[c] > q[b]) {
            best = Some(c);
        }
    }
    best
}

fn max_q(prod: &TimeTotalProductMdp, q: &[f64], n: NodeId) -> f64 {
    let ids = prod.choice_ids(n);
    if ids.is_empty() {
        0.0
    } else {
        q[ids].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn greedy_policy(prod: &TimeTotalProductMdp, shield: &Shield, q: &[f64]) -> Vec<Option<ActionIdx>> {
    (0..prod.node_count())
        .map(|n| match argmax_allowed(prod, shield, q, n) {
            Some(c) => Some(prod.choice(c).action),
            None => shield.pi_c[n],
        })
        .collect()
}

/// Shielded Q-learning. The shield's boundary sets decide where the flag
/// clears, so the same routine runs one-shot and multi-shot shields.
///
/// With `check_starts`, every episode start is checked against the first
/// segment's threshold and the run aborts on a failing start.
pub fn learn(
    prod: &TimeTotalProductMdp,
    shield: &Shield,
    mdp: &LabeledIntervalMdp,
    start: StateIdx,
    cfg: &LearnerConfig,
    check_starts: bool,
) -> Result<LearningRun> {
    cfg.validate()?;
    let env = Env { prod, shield, mdp };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut q = vec![0.0; prod.choice_count()];
    let mut visits = vec![0u32; prod.choice_count()];
    let mut logs = Vec::with_capacity(cfg.episodes);
    let mut start_state = start;
    for episode in 0..cfg.episodes {
        let mut p = prod.initial_node(start_state);
        if check_starts {
            env.check_start(p)?;
        }
        let epsilon = cfg.epsilon.at(episode);
        let mut flag = false;
        let mut log = EpisodeLog {
            index: episode,
            trajectory: Vec::with_capacity(if cfg.record_trajectories {
                prod.horizon()
            } else {
                0
            }),
            final_node: p,
            satisfied: false,
            cumulative_reward: 0.0,
            shield_entry_time: None,
            steps_shielded: 0,
        };
        for t in 0..prod.horizon() {
            let greedy = if flag {
                None
            } else {
                argmax_allowed(prod, shield, &q, p)
            };
            let a = match greedy {
                None => {
                    flag = true;
                    shield.pi_c[p].expect("π_C is defined below the last layer")
                }
                Some(best) => {
                    if rng.random::<f64>() < epsilon {
                        let allowed: Vec<ActionIdx> = shield.allowed_actions(prod, p).collect();
                        allowed[rng.random_range(0..allowed.len())]
                    } else {
                        prod.choice(best).action
                    }
                }
            };
            let (c, next, reward) = env.next_node(p, a, &mut rng)?;
            visits[c] += 1;
            let alpha = match cfg.alpha {
                AlphaSchedule::Constant { value } => value,
                AlphaSchedule::InverseVisits => 1.0 / visits[c] as f64,
            };
            q[c] = (1.0 - alpha) * q[c] + alpha * (reward + cfg.gamma * max_q(prod, &q, next));
            if flag {
                log.shield_entry_time.get_or_insert(t);
                log.steps_shielded += 1;
            }
            if cfg.record_trajectories {
                log.trajectory.push(Step {
                    node: p as u32,
                    action: a as u16,
                    shield_active: flag,
                    reward,
                });
            }
            log.cumulative_reward += reward;
            p = next;
            if shield.is_boundary(p) {
                flag = false;
            }
        }
        log.final_node = p;
        log.satisfied = prod.is_accepting(p);
        if cfg.reset_mode == ResetMode::CarryState {
            start_state = prod.key(p).s;
        }
        logs.push(log);
    }
    let policy = greedy_policy(prod, shield, &q);
    Ok(LearningRun { q, policy, logs })
}

/// Q-learning with a one-shot shield.
pub fn run_one_shot(
    prod: &TimeTotalProductMdp,
    shield: &Shield,
    mdp: &LabeledIntervalMdp,
    start: StateIdx,
    cfg: &LearnerConfig,
) -> Result<LearningRun> {
    if shield.plan.segments() != 1 {
        return Err(Error::InvalidPlan(
            "one-shot learning needs a single-segment shield".into(),
        ));
    }
    learn(prod, shield, mdp, start, cfg, true)
}

/// Q-learning with a multi-shot shield; the flag also clears on every
/// intermediate boundary layer.
pub fn run_multi_shot(
    prod: &TimeTotalProductMdp,
    shield: &Shield,
    mdp: &LabeledIntervalMdp,
    start: StateIdx,
    cfg: &LearnerConfig,
) -> Result<LearningRun> {
    learn(prod, shield, mdp, start, cfg, true)
}

/// Recomputes the Q-table from recorded trajectories.
pub fn replay(
    prod: &TimeTotalProductMdp,
    cfg: &LearnerConfig,
    logs: &[EpisodeLog],
) -> Result<Vec<f64>> {
    let mut q = vec![0.0; prod.choice_count()];
    let mut visits = vec![0u32; prod.choice_count()];
    for log in logs {
        if log.trajectory.len() != prod.horizon() {
            return Err(Error::InvalidConfig(format!(
                "episode {} has {} recorded steps, expected {}",
                log.index,
                log.trajectory.len(),
                prod.horizon()
            )));
        }
        for (k, s) in log.trajectory.iter().enumerate() {
            let next = log
                .trajectory
                .get(k + 1)
                .map_or(log.final_node, |x| x.node as NodeId);
            let c = prod
                .choice_of(s.node as NodeId, s.action as ActionIdx)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "episode {}: logged action unavailable",
                        log.index
                    ))
                })?;
            visits[c] += 1;
            let alpha = match cfg.alpha {
                AlphaSchedule::Constant { value } => value,
                AlphaSchedule::InverseVisits => 1.0 / visits[c] as f64,
            };
            q[c] = (1.0 - alpha) * q[c] + alpha * (s.reward + cfg.gamma * max_q(prod, &q, next));
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub episode: usize,
    pub t: usize,
    pub message: String,
}

/// Checks every logged step: with the flag off the action lies in a
/// non-empty `Act(p)`; with the flag on it equals `π_C(p)`, and the flag
/// only turns off on boundary nodes.
pub fn audit(
    prod: &TimeTotalProductMdp,
    shield: &Shield,
    logs: &[EpisodeLog],
) -> Vec<AuditViolation> {
    let mut out = Vec::new();
    for log in logs {
        let mut prev_active = false;
        for (t, s) in log.trajectory.iter().enumerate() {
            let n = s.node as NodeId;
            let a = s.action as ActionIdx;
            let mut flag = |message: String| {
                out.push(AuditViolation {
                    episode: log.index,
                    t,
                    message,
                })
            };
            if prod.key(n).t != t {
                flag(format!("node at time {} logged at step {t}", prod.key(n).t));
            }
            let has_act = shield.allowed_actions(prod, n).next().is_some();
            if s.shield_active {
                if shield.pi_c[n] != Some(a) {
                    flag(format!(
                        "shielded action {a} differs from π_C {:?}",
                        shield.pi_c[n]
                    ));
                }
            } else {
                if !shield.is_allowed(prod, n, a) {
                    flag(format!("unshielded action {a} outside Act"));
                }
                if prev_active && !shield.is_boundary(n) {
                    flag("shield released away from a boundary".into());
                }
            }
            if !has_act && !s.shield_active {
                flag("empty Act without shield".into());
            }
            prev_active = s.shield_active;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub episodes: usize,
    pub satisfied: usize,
    pub satisfaction_rate: f64,
    pub average_reward: f64,
    pub ci_half_width: f64,
}

/// Runs the greedy policy with the same shield logic, without exploration
/// or updates.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    prod: &TimeTotalProductMdp,
    shield: &Shield,
    mdp: &LabeledIntervalMdp,
    policy: &[Option<ActionIdx>],
    start: StateIdx,
    reset_mode: ResetMode,
    episodes: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    let env = Env { prod, shield, mdp };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut satisfied = 0;
    let mut total_reward = 0.0;
    let mut start_state = start;
    for _ in 0..episodes {
        let mut p = prod.initial_node(start_state);
        let mut flag = false;
        for _ in 0..prod.horizon() {
            let unshielded = !flag && shield.allowed_actions(prod, p).next().is_some();
            let a = if unshielded {
                policy[p].expect("policy covers every node below the last layer")
            } else {
                flag = true;
                shield.pi_c[p].expect("π_C is defined below the last layer")
            };
            let (_, next, reward) = env.next_node(p, a, &mut rng)?;
            total_reward += reward;
            p = next;
            if shield.is_boundary(p) {
                flag = false;
            }
        }
        if prod.is_accepting(p) {
            satisfied += 1;
        }
        if reset_mode == ResetMode::CarryState {
            start_state = prod.key(p).s;
        }
    }
    Ok(EvaluationReport {
        episodes,
        satisfied,
        satisfaction_rate: rate(satisfied, episodes),
        average_reward: if episodes == 0 {
            0.0
        } else {
            total_reward / episodes as f64
        },
        ci_half_width: wilson_half_width(satisfied, episodes),
    })
}

/// Writes `episode,satisfied,cum_reward,shield_entry_t,steps_shielded`.
pub fn write_episode_csv<W: Write>(writer: W, logs: &[EpisodeLog]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "episode",
        "satisfied",
        "cum_reward",
        "shield_entry_t",
        "steps_shielded",
    ])?;
    for log in logs {
        w.write_record([
            log.index.to_string(),
            u8::from(log.satisfied).to_string(),
            log.cumulative_reward.to_string(),
            log.shield_entry_time
                .map_or(String::new(), |t| t.to_string()),
            log.steps_shielded.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::tests::example_product;
    use crate::reachability::{
        exact_reach_probability, multi_shot_prune, one_shot_prune, MultiShotPlan,
    };

    fn cfg(episodes: usize, seed: u64) -> LearnerConfig {
        LearnerConfig {
            episodes,
            seed,
            ..LearnerConfig::default()
        }
    }

    #[test]
    fn wilson_values() {
        assert_eq!(wilson_half_width(0, 0), 0.0);
        // p = 1, n = 1000: z / (1 + z^2/n) * z / (2n).
        let z = Z95;
        let expected = z / (1.0 + z * z / 1000.0) * (z * z / 4e6f64).sqrt();
        assert!((wilson_half_width(1000, 1000) - expected).abs() < 1e-15);
        assert!((wilson_half_width(1000, 1000) - 0.0019134).abs() < 1e-6);
        assert!((wilson_half_width(900, 1000) - 0.018621).abs() < 1e-6);
    }

    #[test]
    fn logs_obey_shield_and_replay_reproduces_q() {
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.6).unwrap();
        let config = LearnerConfig {
            reset_mode: ResetMode::FixedStart,
            ..cfg(3000, 5)
        };
        let run = learn(&prod, &shield, &mdp, 0, &config, true).unwrap();
        assert!(audit(&prod, &shield, &run.logs).is_empty());
        assert_eq!(replay(&prod, &config, &run.logs).unwrap(), run.q);
        for log in &run.logs {
            assert_eq!(log.trajectory.len(), prod.horizon());
            assert_eq!(log.satisfied, prod.is_accepting(log.final_node));
            let total: f64 = log.trajectory.iter().map(|s| s.reward).sum();
            assert_eq!(total, log.cumulative_reward);
        }
    }

    #[test]
    fn inverse_visit_schedule_replays() {
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.6).unwrap();
        let config = LearnerConfig {
            alpha: AlphaSchedule::InverseVisits,
            reset_mode: ResetMode::FixedStart,
            ..cfg(500, 9)
        };
        let run = learn(&prod, &shield, &mdp, 0, &config, true).unwrap();
        assert_eq!(replay(&prod, &config, &run.logs).unwrap(), run.q);
    }

    #[test]
    fn identical_seeds_identical_logs() {
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.6).unwrap();
        let config = LearnerConfig {
            reset_mode: ResetMode::FixedStart,
            ..cfg(500, 1)
        };
        let a = learn(&prod, &shield, &mdp, 0, &config, true).unwrap();
        let b = learn(&prod, &shield, &mdp, 0, &config, true).unwrap();
        assert_eq!(a, b);
        let c = learn(
            &prod,
            &shield,
            &mdp,
            0,
            &LearnerConfig { seed: 2, ..config },
            true,
        )
        .unwrap();
        assert_ne!(a.logs, c.logs);
    }

    #[test]
    fn failing_start_aborts() {
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.6).unwrap();
        // s2 has f = 0.18.
        let err = learn(&prod, &shield, &mdp, 2, &cfg(10, 0), true).unwrap_err();
        assert!(matches!(err, Error::InitialCheckFailed { .. }));
    }

    #[test]
    fn single_segment_multi_shot_matches_one_shot() {
        let (mdp, _, prod) = example_product();
        let one = one_shot_prune(&prod, 0.6).unwrap();
        let multi =
            multi_shot_prune(&prod, &MultiShotPlan::new(vec![0, 2], vec![0.6]).unwrap()).unwrap();
        let config = LearnerConfig {
            reset_mode: ResetMode::FixedStart,
            ..cfg(1000, 3)
        };
        let a = run_one_shot(&prod, &one, &mdp, 0, &config).unwrap();
        let b = run_multi_shot(&prod, &multi, &mdp, 0, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evaluation_rate_matches_exact_probability() {
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.6).unwrap();
        let config = LearnerConfig {
            reset_mode: ResetMode::FixedStart,
            ..cfg(2000, 4)
        };
        let run = learn(&prod, &shield, &mdp, 0, &config, true).unwrap();
        let report = evaluate(
            &prod,
            &shield,
            &mdp,
            &run.policy,
            0,
            ResetMode::FixedStart,
            20_000,
            8,
        )
        .unwrap();
        assert_eq!(report.satisfaction_rate, report.satisfied as f64 / 20_000.0);
        // The executed policy: greedy inside Act, π_C once Act is empty and
        // until the flag clears. At t = 0 from s0, Act is empty (a1 may hit
        // trash via s2), so π_C runs to the end.
        let exact = exact_reach_probability(&prod, &mdp, |n| shield.pi_c[n].unwrap()).unwrap();
        let p0 = exact[prod.initial_node(0)];
        let slack = 3.0 * (p0 * (1.0 - p0) / 20_000.0).sqrt();
        assert!(
            (report.satisfaction_rate - p0).abs() <= slack.max(report.ci_half_width),
            "{} vs {p0}",
            report.satisfaction_rate
        );
    }

    #[test]
    fn csv_columns() {
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.6).unwrap();
        let run = learn(&prod, &shield, &mdp, 0, &cfg(3, 0), true).unwrap();
        let mut buf = Vec::new();
        write_episode_csv(&mut buf, &run.logs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("episode,satisfied,cum_reward,shield_entry_t,steps_shielded")
        );
        assert_eq!(lines.count(), 3);
    }
}
