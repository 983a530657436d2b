//! Brute-force verifiers and random instance generators.
//!
//! Nothing here calls into the code it checks: the semantics evaluator
//! works on explicit sets of completion times, the LP solvers enumerate
//! grids or vertices, and the reachability DP walks the MDP and automaton
//! directly instead of the product graph. They are slow by design and
//! shipped so that `twshield verify` can audit user models.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::automaton::{compile, StateId, TotalAutomaton};
use crate::error::{Error, Result};
use crate::label::{Alphabet, LabelSet, Word};
use crate::mdp::{BoundEntry, LabeledIntervalMdp, StateIdx};
use crate::product::{build_product, NodeKey, TimeTotalProductMdp};
use crate::reachability::{
    one_shot_prune, solve_kappa, IntervalDistributionProblem, MultiShotPlan, Shield,
};
use crate::twtl::{satisfies, Formula, HoldTarget};

const WORD_CAP: u128 = 1_000_000;

// ---------------------------------------------------------------------------
// Semantics by enumeration

/// All `e` such that `formula`, started at observation `start`, is satisfied
/// by the window `o[start..=e]`.
fn completion_set(formula: &Formula, o: &[LabelSet], start: usize) -> BTreeSet<usize> {
    let n = o.len();
    let all = || (start..n).collect::<BTreeSet<_>>();
    match formula {
        Formula::Hold { duration, target } => {
            let last = start + *duration as usize;
            let mut ok = last < n;
            let mut k = start;
            while ok && k <= last {
                ok = match target {
                    HoldTarget::Top => true,
                    HoldTarget::Prop(p) => o[k].contains(p.index()),
                };
                k += 1;
            }
            if ok {
                (last..n).collect()
            } else {
                BTreeSet::new()
            }
        }
        Formula::HoldNeg { duration, prop } => {
            let last = start + *duration as usize;
            if last < n && (start..=last).all(|k| !o[k].contains(prop.index())) {
                (last..n).collect()
            } else {
                BTreeSet::new()
            }
        }
        Formula::And(l, r) => &completion_set(l, o, start) & &completion_set(r, o, start),
        Formula::Or(l, r) => &completion_set(l, o, start) | &completion_set(r, o, start),
        Formula::Not(f) => &all() - &completion_set(f, o, start),
        Formula::Concat(l, r) => match completion_set(l, o, start).first() {
            Some(&split) if split + 1 < n => completion_set(r, o, split + 1),
            _ => BTreeSet::new(),
        },
        Formula::Within {
            inner,
            start: a,
            end: b,
        } => {
            let window_end = start + *b as usize;
            let bound = inner.time_bound() as usize;
            // Every admissible placement of the inner formula, with its
            // completion set computed once.
            let placements: Vec<(usize, BTreeSet<usize>)> = (start + *a as usize..n)
                .filter(|&k| k + bound <= window_end)
                .map(|k| (k, completion_set(inner, o, k)))
                .collect();
            (start..n)
                .filter(|&e| {
                    let stop = e.min(window_end);
                    placements
                        .iter()
                        .any(|(k, set)| *k <= stop && set.contains(&stop))
                })
                .collect()
        }
    }
}

/// Reference evaluator: satisfaction of the whole word by explicit
/// enumeration of completion times.
pub fn enumerate_satisfies(word: &Word, formula: &Formula) -> bool {
    let o = word.symbols();
    !o.is_empty() && completion_set(formula, o, 0).contains(&(o.len() - 1))
}

/// Iterator over every word of a fixed length.
#[derive(Debug, Clone)]
pub struct Words {
    symbols: u64,
    length: usize,
    next: u128,
    total: u128,
}

impl Iterator for Words {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.next >= self.total {
            return None;
        }
        let mut code = self.next;
        self.next += 1;
        let mut out = Vec::with_capacity(self.length);
        for _ in 0..self.length {
            out.push(LabelSet((code % self.symbols as u128) as u64));
            code /= self.symbols as u128;
        }
        Some(Word(out))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Words {}

/// All `(2^|AP|)^length` words, each exactly once.
pub fn enumerate_words(alphabet: &Alphabet, length: usize) -> Result<Words> {
    let symbols = alphabet.symbol_count();
    let total = (0..length).try_fold(1u128, |acc, _| {
        acc.checked_mul(symbols).filter(|&x| x <= WORD_CAP)
    });
    match total {
        Some(total) => Ok(Words {
            symbols: symbols as u64,
            length,
            next: 0,
            total,
        }),
        None => Err(Error::EnumerationTooLarge(
            symbols.checked_pow(length as u32).unwrap_or(u128::MAX),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub formula: String,
    pub word: String,
    pub automaton: bool,
    pub semantics: bool,
    pub enumeration: bool,
}

/// Compares the compiled automaton, `satisfies` and the enumeration
/// evaluator on every word of length `time_bound + 1`.
pub fn check_automaton(formula: &Formula, alphabet: &Alphabet) -> Result<Vec<Disagreement>> {
    let aut = compile(formula, alphabet)?;
    let mut out = Vec::new();
    for word in enumerate_words(alphabet, formula.time_bound() as usize + 1)? {
        let automaton = aut.accepts(&word)?;
        let semantics = satisfies(&word, formula);
        let enumeration = enumerate_satisfies(&word, formula);
        if automaton != enumeration || semantics != enumeration {
            out.push(Disagreement {
                formula: formula.to_string(),
                word: word
                    .symbols()
                    .iter()
                    .map(|s| alphabet.format(*s))
                    .collect::<Vec<_>>()
                    .join(" "),
                automaton,
                semantics,
                enumeration,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Interval LP oracles

fn lp_infeasible(prob: &IntervalDistributionProblem) -> Error {
    Error::Infeasible {
        location: "interval LP oracle".into(),
        sum_lo: prob.los.iter().sum(),
        sum_hi: prob.his.iter().sum(),
    }
}

fn lp_feasible(prob: &IntervalDistributionProblem) -> bool {
    let lo: f64 = prob.los.iter().sum();
    let hi: f64 = prob.his.iter().sum();
    !prob.los.is_empty()
        && lo <= 1.0 + 1e-9
        && hi >= 1.0 - 1e-9
        && prob.los.iter().zip(&prob.his).all(|(l, h)| l <= h)
}

/// Fills in the last coordinate and, when it falls outside its interval,
/// shifts the difference onto the others in index order.
fn repair(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    let n = x.len();
    let last = n - 1;
    let rest: f64 = x[..last].iter().sum();
    x[last] = 1.0 - rest;
    if x[last] > hi[last] {
        let mut excess = x[last] - hi[last];
        x[last] = hi[last];
        for i in 0..last {
            let room = (hi[i] - x[i]).min(excess);
            x[i] += room;
            excess -= room;
        }
    } else if x[last] < lo[last] {
        let mut deficit = lo[last] - x[last];
        x[last] = lo[last];
        for i in 0..last {
            let room = (x[i] - lo[i]).min(deficit);
            x[i] -= room;
            deficit -= room;
        }
    }
}

fn objective(v: &[f64], x: &[f64]) -> f64 {
    v.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Best feasible grid point in the box `center ± radius·step`, clipped to
/// the bounds, over the first `n - 1` coordinates.
fn grid_scan(
    prob: &IntervalDistributionProblem,
    center: &[f64],
    step: f64,
    radius: i64,
) -> Option<(f64, Vec<f64>)> {
    let n = prob.len();
    let free = n - 1;
    let axes: Vec<Vec<f64>> = (0..free)
        .map(|i| {
            let (lo, hi) = (prob.los[i], prob.his[i]);
            let mut pts: Vec<f64> = (-radius..=radius)
                .map(|k| (center[i] + k as f64 * step).clamp(lo, hi))
                .collect();
            pts.dedup();
            pts
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; free];
    let mut x = vec![0.0; n];
    loop {
        for i in 0..free {
            x[i] = axes[i][idx[i]];
        }
        repair(&mut x, &prob.los, &prob.his);
        let sum: f64 = x.iter().sum();
        let inside = x
            .iter()
            .enumerate()
            .all(|(i, &xi)| xi >= prob.los[i] - 1e-12 && xi <= prob.his[i] + 1e-12);
        if inside && (sum - 1.0).abs() <= 1e-9 {
            let val = objective(&prob.values, &x);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, x.clone()));
            }
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == free {
                return best;
            }
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Minimises `Σ v·x` over `lo ≤ x ≤ hi`, `Σ x = 1` by grid search: a
/// coarse scan of the whole box, then repeated local scans around the
/// incumbent with the step shrinking until it reaches `resolution`.
/// Every evaluated point is feasible, so the result never undercuts the
/// optimum.
pub fn lp_grid_search(prob: &IntervalDistributionProblem, resolution: f64) -> Result<f64> {
    if !lp_feasible(prob) {
        return Err(lp_infeasible(prob));
    }
    let n = prob.len();
    if n == 1 {
        return Ok(prob.values[0]);
    }
    let widest = prob
        .los
        .iter()
        .zip(&prob.his)
        .map(|(l, h)| h - l)
        .fold(0.0, f64::max);
    let coarse = 8i64;
    let mut step = (widest / (2 * coarse) as f64).max(resolution);
    let mid: Vec<f64> = prob
        .los
        .iter()
        .zip(&prob.his)
        .map(|(l, h)| 0.5 * (l + h))
        .collect();
    let (mut best, mut x) =
        grid_scan(prob, &mid, step, coarse).ok_or_else(|| lp_infeasible(prob))?;
    loop {
        // Pattern search at this step size until no neighbour improves.
        for _ in 0..200 {
            match grid_scan(prob, &x, step, 2) {
                Some((val, y)) if val < best - 1e-15 => {
                    best = val;
                    x = y;
                }
                _ => break,
            }
        }
        if step <= resolution {
            return Ok(best);
        }
        step = (step / 4.0).max(resolution);
    }
}

/// Exact optimum by enumerating the vertices of the box-simplex
/// intersection: every vertex has all but at most one coordinate at a
/// bound.
pub fn lp_vertex_enumeration(prob: &IntervalDistributionProblem) -> Result<f64> {
    if !lp_feasible(prob) {
        return Err(lp_infeasible(prob));
    }
    let n = prob.len();
    let mut best = f64::INFINITY;
    for free in 0..n {
        for mask in 0u32..(1 << (n - 1)) {
            let mut x = vec![0.0; n];
            let mut bit = 0;
            for (i, xi) in x.iter_mut().enumerate() {
                if i == free {
                    continue;
                }
                *xi = if mask >> bit & 1 == 1 {
                    prob.his[i]
                } else {
                    prob.los[i]
                };
                bit += 1;
            }
            x[free] = 1.0 - x.iter().sum::<f64>();
            if x[free] >= prob.los[free] - 1e-12 && x[free] <= prob.his[free] + 1e-12 {
                best = best.min(objective(&prob.values, &x));
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(lp_infeasible(prob))
    }
}

/// Random feasible interval problem with `n` coordinates and values in
/// `[0, 1]`.
pub fn random_lp<R: Rng + ?Sized>(n: usize, rng: &mut R) -> IntervalDistributionProblem {
    let p = sample_simplex(n, rng);
    let mut los = Vec::with_capacity(n);
    let mut his = Vec::with_capacity(n);
    for &pi in &p {
        los.push((pi - rng.random::<f64>() * 0.5).max(0.0));
        his.push((pi + rng.random::<f64>() * 0.5).min(1.0));
    }
    let values = (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random(),
        })
        .collect();
    IntervalDistributionProblem::new(values, los, his)
}

// ---------------------------------------------------------------------------
// Dynamics sampling

fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(1.0, 1.0).expect("valid gamma parameters");
    let w: Vec<f64> = (0..n)
        .map(|_| gamma.sample(rng) + f64::MIN_POSITIVE)
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Draws one distribution inside `[lo, hi]`: the free mass `1 - Σ lo` is
/// split by Dirichlet weights, then water-filled so no coordinate exceeds
/// its upper bound.
fn sample_row<R: Rng + ?Sized>(row: &[BoundEntry], rng: &mut R) -> Vec<(StateIdx, f64)> {
    let n = row.len();
    let lo: Vec<f64> = row.iter().map(|e| e.lo).collect();
    let hi: Vec<f64> = row.iter().map(|e| e.hi).collect();
    let free = (1.0 - lo.iter().sum::<f64>()).max(0.0);
    let w = sample_simplex(n, rng);
    let mut x: Vec<f64> = (0..n).map(|i| lo[i] + free * w[i]).collect();
    let mut saturated = vec![false; n];
    loop {
        let mut excess = 0.0;
        for i in 0..n {
            if !saturated[i] && x[i] >= hi[i] {
                excess += x[i] - hi[i];
                x[i] = hi[i];
                saturated[i] = true;
            }
        }
        if excess <= 0.0 {
            break;
        }
        let weight: f64 = (0..n).filter(|&i| !saturated[i]).map(|i| w[i]).sum();
        if weight <= 0.0 {
            // Remaining slack sits on coordinates with zero weight; fill
            // them in order.
            for i in 0..n {
                let room = (hi[i] - x[i]).min(excess);
                x[i] += room;
                excess -= room;
            }
            break;
        }
        for i in (0..n).filter(|&i| !saturated[i]) {
            x[i] += excess * w[i] / weight;
        }
    }
    // Push the rounding residue onto a coordinate that can absorb it.
    let residue = 1.0 - x.iter().sum::<f64>();
    if let Some(i) = (0..n).find(|&i| x[i] + residue >= lo[i] && x[i] + residue <= hi[i]) {
        x[i] += residue;
    }
    row.iter().map(|e| e.to).zip(x).collect()
}

/// True dynamics drawn inside the bounds of `mdp`, flat over
/// `(state, action)` as accepted by [`LabeledIntervalMdp::with_dynamics`].
pub fn sample_true_dynamics(mdp: &LabeledIntervalMdp, seed: u64) -> Vec<Vec<(StateIdx, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(mdp.state_count() * mdp.action_count());
    for s in 0..mdp.state_count() {
        for a in 0..mdp.action_count() {
            let row = mdp.bounds(s, a);
            out.push(if row.is_empty() {
                Vec::new()
            } else {
                sample_row(row, &mut rng)
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exact reachability by direct recursion

/// Satisfaction probability of every product node under `policy`, computed
/// by recursion over `(s, q, t)` on the MDP's true dynamics and the
/// automaton. Nodes are keyed the same way as the product.
pub fn reach_probability_direct(
    mdp: &LabeledIntervalMdp,
    aut: &TotalAutomaton,
    horizon: usize,
    policy: &dyn Fn(NodeKey) -> Option<usize>,
) -> Result<HashMap<NodeKey, f64>> {
    if !mdp.has_dynamics() {
        return Err(Error::MissingDynamics);
    }
    let mut memo = HashMap::new();
    for s in 0..mdp.state_count() {
        let q = aut.delta(aut.initial(), mdp.label(s));
        value(mdp, aut, horizon, policy, NodeKey { s, q, t: 0 }, &mut memo)?;
    }
    Ok(memo)
}

fn value(
    mdp: &LabeledIntervalMdp,
    aut: &TotalAutomaton,
    horizon: usize,
    policy: &dyn Fn(NodeKey) -> Option<usize>,
    key: NodeKey,
    memo: &mut HashMap<NodeKey, f64>,
) -> Result<f64> {
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let v = if aut.is_accepting(key.q) {
        1.0
    } else if aut.is_trash(key.q) || key.t == horizon {
        0.0
    } else {
        let a = policy(key)
            .ok_or_else(|| Error::InvalidConfig(format!("policy undefined at {key:?}")))?;
        let mut acc = 0.0;
        for &(s2, p) in mdp.dynamics(key.s, a).ok_or(Error::MissingDynamics)? {
            let q2: StateId = aut.delta(key.q, mdp.label(s2));
            acc += p * value(
                mdp,
                aut,
                horizon,
                policy,
                NodeKey {
                    s: s2,
                    q: q2,
                    t: key.t + 1,
                },
                memo,
            )?;
        }
        acc
    };
    memo.insert(key, v);
    Ok(v)
}

/// Worst-case satisfaction bound by direct recursion with the vertex LP,
/// maximised over available actions.
pub fn worst_case_direct(
    mdp: &LabeledIntervalMdp,
    aut: &TotalAutomaton,
    horizon: usize,
) -> Result<HashMap<NodeKey, f64>> {
    let mut memo = HashMap::new();
    for s in 0..mdp.state_count() {
        let q = aut.delta(aut.initial(), mdp.label(s));
        worst(mdp, aut, horizon, NodeKey { s, q, t: 0 }, &mut memo)?;
    }
    Ok(memo)
}

fn worst(
    mdp: &LabeledIntervalMdp,
    aut: &TotalAutomaton,
    horizon: usize,
    key: NodeKey,
    memo: &mut HashMap<NodeKey, f64>,
) -> Result<f64> {
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let v = if aut.is_accepting(key.q) {
        1.0
    } else if aut.is_trash(key.q) || key.t == horizon {
        0.0
    } else {
        let mut best: f64 = 0.0;
        for a in 0..mdp.action_count() {
            let row = mdp.bounds(key.s, a);
            if row.is_empty() {
                continue;
            }
            let mut values = Vec::with_capacity(row.len());
            for e in row {
                let q2 = aut.delta(key.q, mdp.label(e.to));
                values.push(worst(
                    mdp,
                    aut,
                    horizon,
                    NodeKey {
                        s: e.to,
                        q: q2,
                        t: key.t + 1,
                    },
                    memo,
                )?);
            }
            let prob = IntervalDistributionProblem::new(
                values,
                row.iter().map(|e| e.lo).collect(),
                row.iter().map(|e| e.hi).collect(),
            );
            best = best.max(lp_vertex_enumeration(&prob)?);
        }
        best
    };
    memo.insert(key, v);
    Ok(v)
}

// ---------------------------------------------------------------------------
// Random instances

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomInstanceSpec {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_horizon: usize,
    /// Upper limit on how far each bound may sit from the sampled
    /// reference probability.
    pub interval_width: f64,
    pub seed: u64,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        RandomInstanceSpec {
            max_states: 6,
            max_actions: 3,
            max_horizon: 6,
            interval_width: 0.3,
            seed: 0,
        }
    }
}

impl RandomInstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_states == 0 || self.max_actions == 0 || self.max_horizon == 0 {
            return Err(Error::InvalidConfig(
                "random instance sizes must be positive".into(),
            ));
        }
        if self.max_states * self.max_horizon > 200 {
            return Err(Error::InvalidConfig(format!(
                "states x horizon = {} exceeds 200",
                self.max_states * self.max_horizon
            )));
        }
        if !(0.0..=1.0).contains(&self.interval_width) {
            return Err(Error::InvalidConfig(
                "interval_width must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub mdp: LabeledIntervalMdp,
    pub formula: Formula,
    pub automaton: TotalAutomaton,
    pub product: TimeTotalProductMdp,
}

/// Random formula over `alphabet` with time bound at most `max_bound`.
/// Compound negation is only generated with `negation`; the automaton
/// compiler rejects it.
pub fn random_formula<R: Rng + ?Sized>(
    alphabet: &Alphabet,
    max_bound: u32,
    negation: bool,
    rng: &mut R,
) -> Formula {
    loop {
        let f = random_formula_rec(alphabet, 3, negation, rng);
        if f.time_bound() <= max_bound {
            return f;
        }
    }
}

fn random_formula_rec<R: Rng + ?Sized>(
    alphabet: &Alphabet,
    depth: u32,
    negation: bool,
    rng: &mut R,
) -> Formula {
    let prop = |rng: &mut R| alphabet.proposition(rng.random_range(0..alphabet.len()));
    let kind = if depth == 0 {
        rng.random_range(0..3)
    } else {
        rng.random_range(0..9)
    };
    match kind {
        0 => Formula::hold(rng.random_range(0..3), prop(rng)),
        1 => Formula::hold_neg(rng.random_range(0..3), prop(rng)),
        2 => Formula::hold_top(rng.random_range(0..2)),
        3 => random_formula_rec(alphabet, depth - 1, negation, rng).and(random_formula_rec(
            alphabet,
            depth - 1,
            negation,
            rng,
        )),
        4 => random_formula_rec(alphabet, depth - 1, negation, rng).or(random_formula_rec(
            alphabet,
            depth - 1,
            negation,
            rng,
        )),
        5 if negation => random_formula_rec(alphabet, depth - 1, negation, rng).not(),
        5 => Formula::hold_neg(rng.random_range(0..3), prop(rng)),
        6 => random_formula_rec(alphabet, depth - 1, negation, rng).concat(random_formula_rec(
            alphabet,
            depth - 1,
            negation,
            rng,
        )),
        _ => {
            let inner = random_formula_rec(alphabet, depth - 1, negation, rng);
            let a = rng.random_range(0..3);
            let b = a + inner.time_bound() + rng.random_range(0..3);
            inner.within(a, b)
        }
    }
}

/// Random labeled interval MDP with true dynamics, a random formula and
/// the resulting product.
pub fn random_instance<R: Rng + ?Sized>(
    spec: &RandomInstanceSpec,
    rng: &mut R,
) -> Result<RandomInstance> {
    let n = rng.random_range(1..=spec.max_states);
    let m = rng.random_range(1..=spec.max_actions);
    let horizon = rng.random_range(1..=spec.max_horizon);
    let alphabet = Alphabet::new(["A", "B"])?;
    let labels: Vec<LabelSet> = (0..n).map(|_| LabelSet(rng.random_range(0..4))).collect();
    let mut bounds = Vec::with_capacity(n);
    let mut dynamics = Vec::with_capacity(n);
    for _ in 0..n {
        let mut brow = Vec::with_capacity(m);
        let mut drow = Vec::with_capacity(m);
        for a in 0..m {
            if a > 0 && rng.random_bool(0.25) {
                brow.push(Vec::new());
                drow.push(Vec::new());
                continue;
            }
            let k = rng.random_range(1..=n.min(3));
            let mut succ: Vec<StateIdx> = (0..n).collect();
            for i in 0..k {
                let j = rng.random_range(i..n);
                succ.swap(i, j);
            }
            succ.truncate(k);
            succ.sort_unstable();
            let p = sample_simplex(k, rng);
            let entries: Vec<BoundEntry> = succ
                .iter()
                .zip(&p)
                .map(|(&to, &pi)| BoundEntry {
                    to,
                    lo: (pi - rng.random::<f64>() * spec.interval_width).max(0.0),
                    hi: (pi + rng.random::<f64>() * spec.interval_width).min(1.0),
                })
                .collect();
            drow.push(succ.into_iter().zip(p).collect());
            brow.push(entries);
        }
        bounds.push(brow);
        dynamics.push(drow);
    }
    let mdp = LabeledIntervalMdp::new(
        (0..n).map(|i| format!("s{i}")).collect(),
        (0..m).map(|i| format!("a{i}")).collect(),
        alphabet.clone(),
        labels,
        bounds,
        Some(dynamics),
        vec![vec![0.0; m]; n],
    )?;
    let formula = random_formula(&alphabet, horizon as u32 + 1, false, rng);
    let automaton = compile(&formula, &alphabet)?;
    let product = build_product(&mdp, &automaton, horizon)?;
    Ok(RandomInstance {
        mdp,
        formula,
        automaton,
        product,
    })
}

// ---------------------------------------------------------------------------
// Verification battery

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub instances: usize,
    pub lp_instances: usize,
    pub formulas: usize,
    pub resolution: f64,
    /// Negative control: raise `f` at the first undecided initial node by
    /// this amount before the dominance check.
    pub corrupt_f: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            instances: 500,
            lp_instances: 1000,
            formulas: 200,
            resolution: 1e-3,
            corrupt_f: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        CheckResult {
            name: name.into(),
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub spec: RandomInstanceSpec,
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<28} {:>6} cases {:>4} failures\n",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.failures
            ));
            if let Some(f) = &c.first_failure {
                out.push_str(&format!("     first failure: {f}\n"));
            }
        }
        out
    }
}

fn dominance(
    inst: &RandomInstance,
    shield: &Shield,
    corrupt: Option<f64>,
) -> Result<Option<String>> {
    let prod = &inst.product;
    let mut f = shield.f.clone();
    if let Some(delta) = corrupt {
        if let Some(&n) = prod.initial().iter().find(|&&n| prod.is_open(n)) {
            f[n] += delta;
        }
    }
    let exact = reach_probability_direct(&inst.mdp, &inst.automaton, prod.horizon(), &|key| {
        prod.node(key).and_then(|n| shield.pi_c[n])
    })?;
    for (key, p) in exact {
        if let Some(n) = prod.node(key) {
            if p < f[n] - 1e-12 {
                return Ok(Some(format!(
                    "{}: exact {p} < f {} at {key:?}",
                    inst.formula, f[n]
                )));
            }
        }
    }
    Ok(None)
}

/// Runs the full battery: automaton equivalence on random formulas, the
/// closed-form LP against both LP oracles, the worst-case recursion
/// against a direct recomputation, soundness of `f` against exact
/// reachability under `π_C`, and one-shot/multi-shot agreement.
pub fn verify(spec: &RandomInstanceSpec, options: &VerifyOptions) -> Result<VerifyReport> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut automaton = CheckResult::new("automaton_equivalence");
    for _ in 0..options.formulas {
        let n_props = rng.random_range(1..=2);
        let alphabet = Alphabet::new(["A", "B"].into_iter().take(n_props))?;
        let formula = random_formula(&alphabet, 5, false, &mut rng);
        let bad = check_automaton(&formula, &alphabet)?;
        automaton.record(bad.is_empty(), || format!("{:?}", bad[0]));
    }

    let mut grid = CheckResult::new("lp_grid_search");
    let mut vertex = CheckResult::new("lp_vertex_enumeration");
    for _ in 0..options.lp_instances {
        let n = rng.random_range(1..=5);
        let prob = random_lp(n, &mut rng);
        let (kappa, _) = solve_kappa(&prob)?;
        let g = lp_grid_search(&prob, options.resolution)?;
        let v = lp_vertex_enumeration(&prob)?;
        grid.record((kappa - g).abs() <= n as f64 * options.resolution, || {
            format!("{prob:?}: kappa {kappa} grid {g}")
        });
        vertex.record((kappa - v).abs() <= 1e-9, || {
            format!("{prob:?}: kappa {kappa} vertex {v}")
        });
    }

    let mut recursion = CheckResult::new("worst_case_recursion");
    let mut soundness = CheckResult::new("pi_c_dominates_f");
    let mut consistency = CheckResult::new("multi_shot_single_segment");
    for _ in 0..options.instances {
        let mut inst = random_instance(spec, &mut rng)?;
        let pr = rng.random::<f64>();
        let shield = one_shot_prune(&inst.product, pr)?;
        let direct = worst_case_direct(&inst.mdp, &inst.automaton, inst.product.horizon())?;
        let mismatch = direct.iter().find_map(|(key, &w)| {
            let n = inst.product.node(*key)?;
            ((w - shield.f[n]).abs() > 1e-9)
                .then(|| format!("{}: {key:?} direct {w} f {}", inst.formula, shield.f[n]))
        });
        recursion.record(mismatch.is_none(), || mismatch.clone().unwrap_or_default());

        // Exact soundness under the declared dynamics and a fresh draw.
        let res = dominance(&inst, &shield, options.corrupt_f)?;
        soundness.record(res.is_none(), || res.clone().unwrap_or_default());
        let drawn = sample_true_dynamics(&inst.mdp, rng.random());
        inst.mdp = inst.mdp.with_dynamics(drawn)?;
        let res = dominance(&inst, &shield, options.corrupt_f)?;
        soundness.record(res.is_none(), || res.clone().unwrap_or_default());

        let plan = MultiShotPlan::one_shot(inst.product.horizon(), pr)?;
        let multi = crate::reachability::multi_shot_prune(&inst.product, &plan)?;
        let same =
            multi.f == shield.f && multi.allowed == shield.allowed && multi.pi_c == shield.pi_c;
        consistency.record(same, || format!("{} with Pr {pr}", inst.formula));
    }

    Ok(VerifyReport {
        spec: spec.clone(),
        options: options.clone(),
        checks: vec![automaton, grid, vertex, recursion, soundness, consistency],
    })
}
