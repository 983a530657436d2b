//! Labeled MDPs whose transition probabilities are known only up to
//! per-edge intervals `[lo, hi]`.
//!
//! Bounds are sparse: a triple `(s, a, s')` that is not listed has bound
//! `[0, 0]`. An action with no listed successors is unavailable in that
//! state. The true dynamics are optional and only used for simulation; the
//! learner observes them (and the rewards) exclusively through [`step`].

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Alphabet, LabelSet};

pub type StateIdx = usize;
pub type ActionIdx = usize;

/// Sparse true dynamics indexed `[state][action]`.
pub type DynamicsRows = Vec<Vec<Vec<(StateIdx, f64)>>>;

/// Tolerance for probability sums.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub to: StateIdx,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledIntervalMdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    alphabet: Alphabet,
    labels: Vec<LabelSet>,
    /// `[s * |A| + a]`, sorted by successor.
    bounds: Vec<Vec<BoundEntry>>,
    /// Same indexing; `(successor, probability)` sorted by successor.
    dynamics: Option<Vec<Vec<(StateIdx, f64)>>>,
    /// `[s * |A| + a]`.
    rewards: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: StateIdx,
    pub action: ActionIdx,
    pub next_state: StateIdx,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BoundRange {
        state: String,
        action: String,
        next: String,
        lo: f64,
        hi: f64,
    },
    Infeasible {
        state: String,
        action: String,
        sum_lo: f64,
        sum_hi: f64,
    },
    NoActions {
        state: String,
    },
    DynamicsOutsideBounds {
        state: String,
        action: String,
        next: String,
        probability: f64,
        lo: f64,
        hi: f64,
    },
    DynamicsNotStochastic {
        state: String,
        action: String,
        sum: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BoundRange {
                state,
                action,
                next,
                lo,
                hi,
            } => {
                write!(f, "({state}, {action}, {next}): bound [{lo}, {hi}] is not a sub-interval of [0, 1]")
            }
            Violation::Infeasible {
                state,
                action,
                sum_lo,
                sum_hi,
            } => {
                write!(
                    f,
                    "({state}, {action}): infeasible bounds, sum lo = {sum_lo}, sum hi = {sum_hi}"
                )
            }
            Violation::NoActions { state } => write!(f, "{state}: no available action"),
            Violation::DynamicsOutsideBounds {
                state,
                action,
                next,
                probability,
                lo,
                hi,
            } => write!(
                f,
                "({state}, {action}, {next}): true probability {probability} outside [{lo}, {hi}]"
            ),
            Violation::DynamicsNotStochastic { state, action, sum } => {
                write!(f, "({state}, {action}): true probabilities sum to {sum}")
            }
        }
    }
}

impl LabeledIntervalMdp {
    /// Builds an MDP from per-state labels and sparse bound/dynamics rows.
    /// Rows are indexed `[state][action]`; empty bound rows mark unavailable
    /// actions.
    pub fn new(
        state_names: Vec<String>,
        action_names: Vec<String>,
        alphabet: Alphabet,
        labels: Vec<LabelSet>,
        bounds: Vec<Vec<Vec<BoundEntry>>>,
        dynamics: Option<DynamicsRows>,
        rewards: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = state_names.len();
        let m = action_names.len();
        let shape_ok = |rows: usize, cols: &mut dyn Iterator<Item = usize>| {
            rows == n && cols.filter(|&c| c != m).count() == 0
        };
        if labels.len() != n {
            return Err(Error::InvalidMdp(format!(
                "{} labels for {n} states",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|l| !alphabet.contains(**l)) {
            return Err(Error::InvalidMdp(format!(
                "label {:#x} outside the alphabet",
                bad.0
            )));
        }
        if !shape_ok(bounds.len(), &mut bounds.iter().map(Vec::len)) {
            return Err(Error::InvalidMdp(
                "bounds must be indexed [state][action]".into(),
            ));
        }
        if !shape_ok(rewards.len(), &mut rewards.iter().map(Vec::len)) {
            return Err(Error::InvalidMdp(
                "rewards must be indexed [state][action]".into(),
            ));
        }
        let flatten_sorted = |rows: Vec<Vec<Vec<BoundEntry>>>| -> Result<Vec<Vec<BoundEntry>>> {
            let mut out = Vec::with_capacity(n * m);
            for row in rows.into_iter().flatten() {
                let mut row = row;
                row.sort_by_key(|e| e.to);
                if row.windows(2).any(|w| w[0].to == w[1].to) || row.iter().any(|e| e.to >= n) {
                    return Err(Error::InvalidMdp(
                        "duplicate or out-of-range successor".into(),
                    ));
                }
                out.push(row);
            }
            Ok(out)
        };
        let bounds = flatten_sorted(bounds)?;
        let dynamics = match dynamics {
            None => None,
            Some(rows) => {
                if !shape_ok(rows.len(), &mut rows.iter().map(Vec::len)) {
                    return Err(Error::InvalidMdp(
                        "dynamics must be indexed [state][action]".into(),
                    ));
                }
                let mut out = Vec::with_capacity(n * m);
                for mut row in rows.into_iter().flatten() {
                    row.sort_by_key(|e| e.0);
                    if row.windows(2).any(|w| w[0].0 == w[1].0) || row.iter().any(|e| e.0 >= n) {
                        return Err(Error::InvalidMdp(
                            "duplicate or out-of-range successor".into(),
                        ));
                    }
                    out.push(row);
                }
                Some(out)
            }
        };
        Ok(LabeledIntervalMdp {
            state_names,
            action_names,
            alphabet,
            labels,
            bounds,
            dynamics,
            rewards: rewards.into_iter().flatten().collect(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn action_count(&self) -> usize {
        self.action_names.len()
    }

    pub fn state_name(&self, s: StateIdx) -> &str {
        &self.state_names[s]
    }

    pub fn action_name(&self, a: ActionIdx) -> &str {
        &self.action_names[a]
    }

    pub fn state_index(&self, name: &str) -> Option<StateIdx> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn action_index(&self, name: &str) -> Option<ActionIdx> {
        self.action_names.iter().position(|n| n == name)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn label(&self, s: StateIdx) -> LabelSet {
        self.labels[s]
    }

    pub fn bounds(&self, s: StateIdx, a: ActionIdx) -> &[BoundEntry] {
        &self.bounds[s * self.action_count() + a]
    }

    pub fn is_available(&self, s: StateIdx, a: ActionIdx) -> bool {
        !self.bounds(s, a).is_empty()
    }

    /// Actions with at least one possible successor, in action order.
    pub fn available_actions(&self, s: StateIdx) -> impl Iterator<Item = ActionIdx> + '_ {
        (0..self.action_count()).filter(move |&a| self.is_available(s, a))
    }

    /// Bound on a single triple; `[0, 0]` when absent.
    pub fn bound(&self, s: StateIdx, a: ActionIdx, next: StateIdx) -> (f64, f64) {
        let row = self.bounds(s, a);
        match row.binary_search_by_key(&next, |e| e.to) {
            Ok(i) => (row[i].lo, row[i].hi),
            Err(_) => (0.0, 0.0),
        }
    }

    pub fn has_dynamics(&self) -> bool {
        self.dynamics.is_some()
    }

    pub fn dynamics(&self, s: StateIdx, a: ActionIdx) -> Option<&[(StateIdx, f64)]> {
        self.dynamics
            .as_ref()
            .map(|d| d[s * self.action_count() + a].as_slice())
    }

    /// True transition probability; 0 for unlisted triples.
    pub fn probability(&self, s: StateIdx, a: ActionIdx, next: StateIdx) -> Option<f64> {
        let row = self.dynamics(s, a)?;
        Some(match row.binary_search_by_key(&next, |e| e.0) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        })
    }

    /// Replaces the true dynamics, keeping bounds, labels and rewards.
    pub fn with_dynamics(&self, dynamics: Vec<Vec<(StateIdx, f64)>>) -> Result<Self> {
        if dynamics.len() != self.bounds.len() {
            return Err(Error::InvalidMdp(
                "dynamics must cover every (state, action)".into(),
            ));
        }
        let mut out = self.clone();
        out.dynamics = Some(
            dynamics
                .into_iter()
                .map(|mut row| {
                    row.sort_by_key(|e| e.0);
                    row
                })
                .collect(),
        );
        Ok(out)
    }

    pub(crate) fn reward(&self, s: StateIdx, a: ActionIdx) -> f64 {
        self.rewards[s * self.action_count() + a]
    }

    /// Checks interval feasibility and, when dynamics are present, that they
    /// are stochastic and lie inside the bounds.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let names =
            |s: StateIdx, a: ActionIdx| (self.state_names[s].clone(), self.action_names[a].clone());
        for s in 0..self.state_count() {
            if self.available_actions(s).next().is_none() {
                out.push(Violation::NoActions {
                    state: self.state_names[s].clone(),
                });
            }
            for a in 0..self.action_count() {
                let row = self.bounds(s, a);
                for e in row {
                    if !(0.0 <= e.lo && e.lo <= e.hi && e.hi <= 1.0) {
                        let (state, action) = names(s, a);
                        out.push(Violation::BoundRange {
                            state,
                            action,
                            next: self.state_names[e.to].clone(),
                            lo: e.lo,
                            hi: e.hi,
                        });
                    }
                }
                if !row.is_empty() {
                    let sum_lo: f64 = row.iter().map(|e| e.lo).sum();
                    let sum_hi: f64 = row.iter().map(|e| e.hi).sum();
                    if sum_lo > 1.0 + SUM_TOLERANCE || sum_hi < 1.0 - SUM_TOLERANCE {
                        let (state, action) = names(s, a);
                        out.push(Violation::Infeasible {
                            state,
                            action,
                            sum_lo,
                            sum_hi,
                        });
                    }
                }
                let Some(drow) = self.dynamics(s, a) else {
                    continue;
                };
                if row.is_empty() && drow.is_empty() {
                    continue;
                }
                for &(next, p) in drow {
                    let (lo, hi) = self.bound(s, a, next);
                    if p < lo - SUM_TOLERANCE || p > hi + SUM_TOLERANCE {
                        let (state, action) = names(s, a);
                        out.push(Violation::DynamicsOutsideBounds {
                            state,
                            action,
                            next: self.state_names[next].clone(),
                            probability: p,
                            lo,
                            hi,
                        });
                    }
                }
                // Listed bounds with lo > 0 but no dynamics entry.
                for e in row {
                    if e.lo > SUM_TOLERANCE && drow.binary_search_by_key(&e.to, |d| d.0).is_err() {
                        let (state, action) = names(s, a);
                        out.push(Violation::DynamicsOutsideBounds {
                            state,
                            action,
                            next: self.state_names[e.to].clone(),
                            probability: 0.0,
                            lo: e.lo,
                            hi: e.hi,
                        });
                    }
                }
                let sum: f64 = drow.iter().map(|d| d.1).sum();
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    let (state, action) = names(s, a);
                    out.push(Violation::DynamicsNotStochastic { state, action, sum });
                }
            }
        }
        out
    }

    pub fn to_document(&self) -> MdpDocument {
        let mut bounds = Vec::new();
        let mut dynamics = self.dynamics.as_ref().map(|_| Vec::new());
        let mut rewards = Vec::new();
        for s in 0..self.state_count() {
            for a in 0..self.action_count() {
                for e in self.bounds(s, a) {
                    bounds.push(BoundTriple {
                        from: self.state_names[s].clone(),
                        action: self.action_names[a].clone(),
                        to: self.state_names[e.to].clone(),
                        lo: e.lo,
                        hi: e.hi,
                    });
                }
                if let (Some(out), Some(row)) = (dynamics.as_mut(), self.dynamics(s, a)) {
                    for &(to, probability) in row {
                        out.push(DynamicsTriple {
                            from: self.state_names[s].clone(),
                            action: self.action_names[a].clone(),
                            to: self.state_names[to].clone(),
                            probability,
                        });
                    }
                }
                let r = self.reward(s, a);
                if r != 0.0 {
                    rewards.push(RewardEntry {
                        state: self.state_names[s].clone(),
                        action: Some(self.action_names[a].clone()),
                        reward: r,
                    });
                }
            }
        }
        MdpDocument {
            states: self.state_names.clone(),
            actions: self.action_names.clone(),
            propositions: self.alphabet.clone(),
            labels: (0..self.state_count())
                .filter(|&s| self.labels[s] != LabelSet::EMPTY)
                .map(|s| {
                    let names = self.alphabet.names_of(self.labels[s]);
                    (
                        self.state_names[s].clone(),
                        names.into_iter().map(str::to_owned).collect(),
                    )
                })
                .collect(),
            bounds,
            dynamics,
            rewards,
        }
    }

    pub fn from_document(doc: &MdpDocument) -> Result<Self> {
        let n = doc.states.len();
        let m = doc.actions.len();
        let state_ix: HashMap<&str, usize> = doc
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let action_ix: HashMap<&str, usize> = doc
            .actions
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if state_ix.len() != n || action_ix.len() != m {
            return Err(Error::InvalidMdp("duplicate state or action name".into()));
        }
        let st = |name: &str| {
            state_ix
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidMdp(format!("unknown state `{name}`")))
        };
        let ac = |name: &str| {
            action_ix
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidMdp(format!("unknown action `{name}`")))
        };
        let mut labels = vec![LabelSet::EMPTY; n];
        for (state, props) in &doc.labels {
            labels[st(state)?] = doc.propositions.label(props)?;
        }
        let mut bounds = vec![vec![Vec::new(); m]; n];
        for b in &doc.bounds {
            bounds[st(&b.from)?][ac(&b.action)?].push(BoundEntry {
                to: st(&b.to)?,
                lo: b.lo,
                hi: b.hi,
            });
        }
        let dynamics = match &doc.dynamics {
            None => None,
            Some(triples) => {
                let mut rows = vec![vec![Vec::new(); m]; n];
                for d in triples {
                    rows[st(&d.from)?][ac(&d.action)?].push((st(&d.to)?, d.probability));
                }
                Some(rows)
            }
        };
        let mut rewards = vec![vec![0.0; m]; n];
        for r in &doc.rewards {
            let s = st(&r.state)?;
            match &r.action {
                Some(action) => rewards[s][ac(action)?] = r.reward,
                None => rewards[s].iter_mut().for_each(|x| *x = r.reward),
            }
        }
        LabeledIntervalMdp::new(
            doc.states.clone(),
            doc.actions.clone(),
            doc.propositions.clone(),
            labels,
            bounds,
            dynamics,
            rewards,
        )
    }
}

/// Samples one transition from the true dynamics.
pub fn step<R: Rng + ?Sized>(
    mdp: &LabeledIntervalMdp,
    s: StateIdx,
    a: ActionIdx,
    rng: &mut R,
) -> Result<Transition> {
    let row = mdp.dynamics(s, a).ok_or(Error::MissingDynamics)?;
    if row.is_empty() {
        return Err(Error::UnavailableAction {
            state: mdp.state_name(s).to_owned(),
            action: mdp.action_name(a).to_owned(),
        });
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut next = row[row.len() - 1].0;
    for &(to, p) in row {
        acc += p;
        if u < acc {
            next = to;
            break;
        }
    }
    // Guard against rounding selecting a zero-probability tail entry.
    if mdp.probability(s, a, next) == Some(0.0) {
        next = row.iter().rev().find(|e| e.1 > 0.0).map_or(next, |e| e.0);
    }
    Ok(Transition {
        state: s,
        action: a,
        next_state: next,
        reward: mdp.reward(s, a),
    })
}

/// JSON form of an MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub propositions: Alphabet,
    /// State name to the propositions holding there. Unlisted states are
    /// labeled with the empty set.
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
    pub bounds: Vec<BoundTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<Vec<DynamicsTriple>>,
    /// `action = None` applies the reward to every action in the state.
    #[serde(default)]
    pub rewards: Vec<RewardEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTriple {
    pub from: String,
    pub action: String,
    pub to: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTriple {
    pub from: String,
    pub action: String,
    pub to: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardEntry {
    pub state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    pub reward: f64,
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Three-state MDP in the shape of the running example: `s0` unlabeled,
    /// `s1` labeled `B`, `s2` labeled `C`, actions `a1`, `a2`.
    pub(crate) fn example_mdp() -> LabeledIntervalMdp {
        let doc: MdpDocument = serde_json::from_str(
            r#"{
            "states": ["s0", "s1", "s2"],
            "actions": ["a1", "a2"],
            "propositions": ["B", "C"],
            "labels": {"s1": ["B"], "s2": ["C"]},
            "bounds": [
                {"from": "s0", "action": "a1", "to": "s1", "lo": 0.7, "hi": 0.9},
                {"from": "s0", "action": "a1", "to": "s2", "lo": 0.1, "hi": 0.3},
                {"from": "s0", "action": "a2", "to": "s0", "lo": 1.0, "hi": 1.0},
                {"from": "s1", "action": "a1", "to": "s1", "lo": 0.9, "hi": 1.0},
                {"from": "s1", "action": "a1", "to": "s0", "lo": 0.0, "hi": 0.1},
                {"from": "s1", "action": "a2", "to": "s2", "lo": 1.0, "hi": 1.0},
                {"from": "s2", "action": "a1", "to": "s0", "lo": 0.5, "hi": 0.8},
                {"from": "s2", "action": "a1", "to": "s1", "lo": 0.2, "hi": 0.5},
                {"from": "s2", "action": "a2", "to": "s2", "lo": 1.0, "hi": 1.0}
            ],
            "dynamics": [
                {"from": "s0", "action": "a1", "to": "s1", "probability": 0.8},
                {"from": "s0", "action": "a1", "to": "s2", "probability": 0.2},
                {"from": "s0", "action": "a2", "to": "s0", "probability": 1.0},
                {"from": "s1", "action": "a1", "to": "s1", "probability": 0.95},
                {"from": "s1", "action": "a1", "to": "s0", "probability": 0.05},
                {"from": "s1", "action": "a2", "to": "s2", "probability": 1.0},
                {"from": "s2", "action": "a1", "to": "s0", "probability": 0.6},
                {"from": "s2", "action": "a1", "to": "s1", "probability": 0.4},
                {"from": "s2", "action": "a2", "to": "s2", "probability": 1.0}
            ],
            "rewards": [{"state": "s2", "reward": 1.5}]
        }"#,
        )
        .unwrap();
        LabeledIntervalMdp::from_document(&doc).unwrap()
    }

    #[test]
    fn example_validates() {
        let m = example_mdp();
        assert_eq!(m.validate(), vec![]);
        assert_eq!(m.label(1), LabelSet(0b01));
        assert_eq!(m.label(0), LabelSet::EMPTY);
        assert_eq!(m.bound(0, 0, 0), (0.0, 0.0));
        assert_eq!(m.reward(2, 1), 1.5);
    }

    #[test]
    fn infeasible_upper_sum() {
        let mut doc = example_mdp().to_document();
        doc.dynamics = None;
        for b in doc
            .bounds
            .iter_mut()
            .filter(|b| b.from == "s0" && b.action == "a1")
        {
            b.lo = 0.0;
            b.hi = 0.4;
        }
        let m = LabeledIntervalMdp::from_document(&doc).unwrap();
        let v = m.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(
            matches!(&v[0], Violation::Infeasible { sum_hi, .. } if (*sum_hi - 0.8).abs() < 1e-12)
        );
    }

    #[test]
    fn dynamics_outside_bounds_names_triple() {
        let mut doc = example_mdp().to_document();
        let dynamics = doc.dynamics.as_mut().unwrap();
        for d in dynamics
            .iter_mut()
            .filter(|d| d.from == "s0" && d.action == "a1")
        {
            d.probability = if d.to == "s1" { 0.65 } else { 0.35 };
        }
        let m = LabeledIntervalMdp::from_document(&doc).unwrap();
        let v = m.validate();
        // 0.65 < lo = 0.7 and 0.35 > hi = 0.3 both violate.
        assert_eq!(v.len(), 2, "{v:?}");

        let mut doc = example_mdp().to_document();
        let dynamics = doc.dynamics.as_mut().unwrap();
        for d in dynamics
            .iter_mut()
            .filter(|d| d.from == "s2" && d.action == "a1")
        {
            d.probability = if d.to == "s0" { 0.85 } else { 0.15 };
        }
        for b in doc
            .bounds
            .iter_mut()
            .filter(|b| b.from == "s2" && b.action == "a1" && b.to == "s1")
        {
            b.lo = 0.0;
        }
        let m = LabeledIntervalMdp::from_document(&doc).unwrap();
        let v = m.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        match &v[0] {
            Violation::DynamicsOutsideBounds {
                state,
                action,
                next,
                ..
            } => {
                assert_eq!(
                    (state.as_str(), action.as_str(), next.as_str()),
                    ("s2", "a1", "s0")
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_information_and_exact_encodings_validate() {
        let m = example_mdp();
        let mut doc = m.to_document();
        for b in &mut doc.bounds {
            b.lo = 0.0;
            b.hi = 1.0;
        }
        assert!(LabeledIntervalMdp::from_document(&doc)
            .unwrap()
            .validate()
            .is_empty());
        let mut doc = m.to_document();
        for b in &mut doc.bounds {
            let p = m
                .probability(
                    m.state_index(&b.from).unwrap(),
                    m.action_index(&b.action).unwrap(),
                    m.state_index(&b.to).unwrap(),
                )
                .unwrap();
            b.lo = p;
            b.hi = p;
        }
        assert!(LabeledIntervalMdp::from_document(&doc)
            .unwrap()
            .validate()
            .is_empty());
    }

    #[test]
    fn deterministic_step() {
        let m = example_mdp();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = step(&m, 0, 1, &mut rng).unwrap();
            assert_eq!(t.next_state, 0);
            assert_eq!(t.reward, 0.0);
        }
        assert_eq!(step(&m, 2, 1, &mut rng).unwrap().reward, 1.5);
    }

    #[test]
    fn empirical_frequencies_match_dynamics() {
        let m = example_mdp();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let t = step(&m, 0, 0, &mut rng).unwrap();
            assert!(m.bound(0, 0, t.next_state).1 > 0.0);
            counts[t.next_state] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!((counts[1] as f64 / n as f64 - 0.8).abs() < 0.01);
        assert!((counts[2] as f64 / n as f64 - 0.2).abs() < 0.01);
    }

    #[test]
    fn missing_dynamics() {
        let mut doc = example_mdp().to_document();
        doc.dynamics = None;
        let m = LabeledIntervalMdp::from_document(&doc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            step(&m, 0, 0, &mut rng),
            Err(Error::MissingDynamics)
        ));
    }

    #[test]
    fn document_round_trip() {
        let m = example_mdp();
        let text = serde_json::to_string_pretty(&m.to_document()).unwrap();
        let doc: MdpDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(LabeledIntervalMdp::from_document(&doc).unwrap(), m);
    }
}
