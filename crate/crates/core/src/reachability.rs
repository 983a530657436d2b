//! Worst-case satisfaction bounds on the time-total product and the pruned
//! action sets derived from them.
//!
//! For a choice `(p, a)` the bound `κ(p, a)` is the minimum of
//! `Σ f(p_j) Δ_j` over distributions `Δ` inside the interval bounds, where
//! `p_j` ranges over the successors with a positive upper bound. The node
//! bound is `f(p) = max_a κ(p, a)`, and `π_C(p)` is the first action in
//! action order attaining it. Accepting nodes have `f = 1` and trash nodes
//! `f = 0` at every layer.
//!
//! Pruning removes `a` from `Act(p)` at an undecided node when some
//! successor has `f` strictly below the threshold. κ and π_C are computed for
//! every action regardless of pruning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionIdx, LabeledIntervalMdp, SUM_TOLERANCE};
use crate::product::{NodeClass, NodeId, TimeTotalProductMdp};

/// Plan products are checked against the desired probability to this
/// tolerance.
pub const PLAN_PRODUCT_TOLERANCE: f64 = 1e-12;

/// `min Σ values[j] Δ_j` subject to `Σ Δ_j = 1` and `los[j] <= Δ_j <= his[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDistributionProblem {
    pub values: Vec<f64>,
    pub los: Vec<f64>,
    pub his: Vec<f64>,
}

impl IntervalDistributionProblem {
    pub fn new(values: Vec<f64>, los: Vec<f64>, his: Vec<f64>) -> Self {
        assert!(values.len() == los.len() && los.len() == his.len());
        IntervalDistributionProblem { values, los, his }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_feasible(&self) -> bool {
        let sum_lo: f64 = self.los.iter().sum();
        let sum_hi: f64 = self.his.iter().sum();
        sum_lo <= 1.0 + SUM_TOLERANCE && sum_hi >= 1.0 - SUM_TOLERANCE
    }
}

/// Exact minimizer: every coordinate starts at its lower bound and the
/// remaining mass is poured into coordinates of increasing value.
pub fn solve_kappa(prob: &IntervalDistributionProblem) -> Result<(f64, Vec<f64>)> {
    if !prob.is_feasible() {
        return Err(Error::Infeasible {
            location: "interval distribution problem".into(),
            sum_lo: prob.los.iter().sum(),
            sum_hi: prob.his.iter().sum(),
        });
    }
    let mut order = Vec::new();
    let mut dist = Vec::new();
    let kappa = greedy_kappa(
        prob.len(),
        |j| (prob.values[j], prob.los[j], prob.his[j]),
        &mut order,
        &mut dist,
    );
    Ok((kappa, dist))
}

/// Greedy assignment over `n` coordinates given as `(value, lo, hi)`.
/// Leaves the minimizing distribution in `dist` (indexed like the input).
///
/// The objective is evaluated as `v_(1) + Σ_k (v_(k) - v_(k-1)) · tail_k`
/// over the sorted values, where `tail_k` is the mass on coordinates ranked
/// `k` or higher. This is exact whenever all values coincide.
fn greedy_kappa(
    n: usize,
    coord: impl Fn(usize) -> (f64, f64, f64),
    order: &mut Vec<usize>,
    dist: &mut Vec<f64>,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    order.clear();
    order.extend(0..n);
    order.sort_by(|&i, &j| coord(i).0.total_cmp(&coord(j).0).then(i.cmp(&j)));
    dist.clear();
    dist.extend((0..n).map(|j| coord(j).1));
    let mut mass = 1.0 - dist.iter().sum::<f64>();
    for &j in order.iter() {
        if mass <= 0.0 {
            break;
        }
        let (_, lo, hi) = coord(j);
        let add = (hi - lo).min(mass);
        dist[j] += add;
        mass -= add;
    }
    let mut kappa = coord(order[0]).0;
    let mut tail = 0.0;
    for k in (1..n).rev() {
        tail += dist[order[k]];
        kappa += (coord(order[k]).0 - coord(order[k - 1]).0) * tail;
    }
    kappa.clamp(0.0, 1.0)
}

/// [`solve_kappa`] over the edges of a product choice, reading successor
/// values from `values`.
fn kappa_of(
    prod: &TimeTotalProductMdp,
    choice: usize,
    values: &[f64],
    order: &mut Vec<usize>,
    dist: &mut Vec<f64>,
) -> Result<f64> {
    let edges = prod.edges(choice);
    let sum_lo: f64 = edges.iter().map(|e| e.lo).sum();
    let sum_hi: f64 = edges.iter().map(|e| e.hi).sum();
    if sum_lo > 1.0 + SUM_TOLERANCE || sum_hi < 1.0 - SUM_TOLERANCE {
        return Err(Error::Infeasible {
            location: format!("product choice {choice}"),
            sum_lo,
            sum_hi,
        });
    }
    Ok(greedy_kappa(
        edges.len(),
        |j| (values[edges[j].to], edges[j].lo, edges[j].hi),
        order,
        dist,
    ))
}

/// Decomposition of the horizon into consecutive segments with per-segment
/// thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiShotPlan {
    timestamps: Vec<usize>,
    thresholds: Vec<f64>,
}

impl MultiShotPlan {
    /// `timestamps` must start at 0 and increase strictly; there is one
    /// threshold in `(0, 1]` per segment.
    pub fn new(timestamps: Vec<usize>, thresholds: Vec<f64>) -> Result<Self> {
        if timestamps.len() < 2 || timestamps[0] != 0 {
            return Err(Error::InvalidPlan(
                "timestamps must start at 0 and contain at least two entries".into(),
            ));
        }
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPlan(format!(
                "timestamps {timestamps:?} are not strictly increasing"
            )));
        }
        if thresholds.len() != timestamps.len() - 1 {
            return Err(Error::InvalidPlan(format!(
                "{} thresholds for {} segments",
                thresholds.len(),
                timestamps.len() - 1
            )));
        }
        if let Some(bad) = thresholds.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(Error::InvalidPlan(format!(
                "threshold {bad} outside (0, 1]"
            )));
        }
        Ok(MultiShotPlan {
            timestamps,
            thresholds,
        })
    }

    /// Plan whose thresholds must multiply to `pr_des`.
    pub fn with_target(timestamps: Vec<usize>, thresholds: Vec<f64>, pr_des: f64) -> Result<Self> {
        let plan = MultiShotPlan::new(timestamps, thresholds)?;
        if (plan.product() - pr_des).abs() > PLAN_PRODUCT_TOLERANCE {
            return Err(Error::InvalidPlan(format!(
                "thresholds multiply to {}, expected {pr_des}",
                plan.product()
            )));
        }
        Ok(plan)
    }

    /// Every segment gets the `N`-th root of `pr_des`.
    pub fn uniform(timestamps: Vec<usize>, pr_des: f64) -> Result<Self> {
        let n = timestamps.len().saturating_sub(1).max(1);
        let root = pr_des.powf(1.0 / n as f64);
        MultiShotPlan::with_target(timestamps, vec![root; n], pr_des)
    }

    /// The single-segment plan `{0, T}`, `{pr_des}`.
    pub fn one_shot(horizon: usize, pr_des: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidPlan(
                "horizon 0 leaves no decision layer".into(),
            ));
        }
        MultiShotPlan::new(vec![0, horizon], vec![pr_des])
    }

    pub fn timestamps(&self) -> &[usize] {
        &self.timestamps
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn segments(&self) -> usize {
        self.thresholds.len()
    }

    pub fn product(&self) -> f64 {
        self.thresholds.iter().product()
    }

    pub fn horizon(&self) -> usize {
        *self.timestamps.last().unwrap()
    }
}

/// Boundary layer between segments `i` and `i + 1` (1-based `i < N`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphBoundary {
    pub index: usize,
    pub time: usize,
    /// Nodes at `time` whose bound for the next segment meets its threshold.
    pub accepting: Vec<NodeId>,
    pub trash: Vec<NodeId>,
}

/// Output of pruning: bounds, pruned action sets and the Go-to-F policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Shield {
    /// Per node. At an intermediate boundary time this is the bound of the
    /// later segment.
    pub f: Vec<f64>,
    /// Per product choice.
    pub kappa: Vec<f64>,
    /// Per product choice: whether the action survives pruning.
    pub allowed: Vec<bool>,
    /// Per node; `None` on the last layer.
    pub pi_c: Vec<Option<ActionIdx>>,
    pub plan: MultiShotPlan,
    pub boundaries: Vec<SubgraphBoundary>,
    /// Per node: whether reaching it clears the shield flag.
    boundary_node: Vec<bool>,
}

impl Shield {
    /// Actions in `Act(n)`, in action order.
    pub fn allowed_actions<'a>(
        &'a self,
        prod: &'a TimeTotalProductMdp,
        n: NodeId,
    ) -> impl Iterator<Item = ActionIdx> + 'a {
        prod.choice_ids(n)
            .filter(|&c| self.allowed[c])
            .map(|c| prod.choice(c).action)
    }

    pub fn is_allowed(&self, prod: &TimeTotalProductMdp, n: NodeId, a: ActionIdx) -> bool {
        prod.choice_of(n, a).is_some_and(|c| self.allowed[c])
    }

    /// Accepting or trash, or on an intermediate boundary layer.
    pub fn is_boundary(&self, n: NodeId) -> bool {
        self.boundary_node[n]
    }

    /// Threshold a start node must meet: the first segment's threshold.
    pub fn initial_threshold(&self) -> f64 {
        self.plan.thresholds()[0]
    }

    pub fn pruned_count(&self) -> usize {
        self.allowed.iter().filter(|a| !**a).count()
    }

    /// Initial nodes with `f` below the first segment's threshold.
    pub fn check_initial(&self, prod: &TimeTotalProductMdp) -> Vec<(NodeId, f64)> {
        check_initial(prod, self, self.initial_threshold())
    }

    pub fn to_document(
        &self,
        prod: &TimeTotalProductMdp,
        mdp: &LabeledIntervalMdp,
    ) -> ShieldDocument {
        let nodes = (0..prod.node_count())
            .map(|n| {
                let key = prod.key(n);
                NodeEntry {
                    s: mdp.state_name(key.s).to_owned(),
                    q: key.q,
                    t: key.t,
                    class: prod.class(n),
                    f: self.f[n],
                    pi_c: self.pi_c[n].map(|a| mdp.action_name(a).to_owned()),
                    act: self
                        .allowed_actions(prod, n)
                        .map(|a| mdp.action_name(a).to_owned())
                        .collect(),
                }
            })
            .collect();
        ShieldDocument {
            timestamps: self.plan.timestamps().to_vec(),
            thresholds: self.plan.thresholds().to_vec(),
            nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShieldDocument {
    pub timestamps: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub nodes: Vec<NodeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub s: String,
    pub q: usize,
    pub t: usize,
    pub class: NodeClass,
    pub f: f64,
    pub pi_c: Option<String>,
    pub act: Vec<String>,
}

/// Result of an unpruned backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardPass {
    /// Per node; only layers `t_end..=t_start` are meaningful.
    pub f: Vec<f64>,
    pub kappa: Vec<f64>,
    pub pi_c: Vec<Option<ActionIdx>>,
}

/// Backward recursion from layer `t_start` (values given by `boundary`)
/// down to layer `t_end`.
pub fn backward_pass(
    prod: &TimeTotalProductMdp,
    t_start: usize,
    t_end: usize,
    boundary: impl Fn(NodeId) -> f64,
) -> Result<BackwardPass> {
    assert!(t_end < t_start && t_start <= prod.horizon());
    let mut values = vec![0.0; prod.node_count()];
    for n in prod.layer(t_start) {
        values[n] = boundary(n);
    }
    let mut out = Sweep::new(prod);
    out.run(prod, t_start, t_end, &mut values, 1.0)?;
    for t in t_end..t_start {
        for n in prod.layer(t) {
            out.f[n] = values[n];
        }
    }
    for n in prod.layer(t_start) {
        out.f[n] = values[n];
    }
    Ok(BackwardPass {
        f: out.f,
        kappa: out.kappa,
        pi_c: out.pi_c,
    })
}

/// Accepting nodes: 1; everything else on the last layer: 0.
pub fn terminal_value(prod: &TimeTotalProductMdp, n: NodeId) -> f64 {
    if prod.is_accepting(n) {
        1.0
    } else {
        0.0
    }
}

struct Sweep {
    f: Vec<f64>,
    kappa: Vec<f64>,
    allowed: Vec<bool>,
    pi_c: Vec<Option<ActionIdx>>,
}

struct NodeResult {
    f: f64,
    pi_c: ActionIdx,
    kappa: Vec<f64>,
    allowed: Vec<bool>,
}

impl Sweep {
    fn new(prod: &TimeTotalProductMdp) -> Sweep {
        Sweep {
            f: vec![0.0; prod.node_count()],
            kappa: vec![0.0; prod.choice_count()],
            allowed: vec![true; prod.choice_count()],
            pi_c: vec![None; prod.node_count()],
        }
    }

    /// Processes layers `t_start - 1` down to `t_end`, reading successor
    /// values from and writing node values to `values`.
    fn run(
        &mut self,
        prod: &TimeTotalProductMdp,
        t_start: usize,
        t_end: usize,
        values: &mut [f64],
        threshold: f64,
    ) -> Result<()> {
        for t in (t_end..t_start).rev() {
            let layer = prod.layer(t);
            let results: Vec<NodeResult> = layer
                .clone()
                .into_par_iter()
                .map_init(
                    || (Vec::new(), Vec::new()),
                    |(order, dist), n| {
                        let open = prod.is_open(n);
                        let mut best = f64::NEG_INFINITY;
                        let mut pi_c = 0;
                        let ids = prod.choice_ids(n);
                        let mut kappa = Vec::with_capacity(ids.len());
                        let mut allowed = Vec::with_capacity(ids.len());
                        for c in ids {
                            let k = kappa_of(prod, c, values, order, dist)?;
                            if k > best {
                                best = k;
                                pi_c = prod.choice(c).action;
                            }
                            kappa.push(k);
                            allowed.push(
                                !open || prod.edges(c).iter().all(|e| values[e.to] >= threshold),
                            );
                        }
                        if kappa.is_empty() {
                            return Err(Error::InvalidMdp(format!(
                                "product node {n} at t = {t} has no available action"
                            )));
                        }
                        let f = match prod.class(n) {
                            NodeClass::Open => best,
                            NodeClass::Accepting => 1.0,
                            NodeClass::Trash => 0.0,
                        };
                        Ok(NodeResult {
                            f,
                            pi_c,
                            kappa,
                            allowed,
                        })
                    },
                )
                .collect::<Result<_>>()?;
            for (n, r) in layer.zip(results) {
                values[n] = r.f;
                self.f[n] = r.f;
                self.pi_c[n] = Some(r.pi_c);
                let ids = prod.choice_ids(n);
                self.kappa[ids.clone()].copy_from_slice(&r.kappa);
                self.allowed[ids].copy_from_slice(&r.allowed);
            }
        }
        Ok(())
    }
}

/// Single-segment pruning with threshold `pr_des`.
pub fn one_shot_prune(prod: &TimeTotalProductMdp, pr_des: f64) -> Result<Shield> {
    multi_shot_prune(prod, &MultiShotPlan::one_shot(prod.horizon(), pr_des)?)
}

/// Prunes segment by segment, from the last to the first. The boundary of
/// segment `i < N` is 1 on nodes whose bound for segment `i + 1` meets that
/// segment's threshold and 0 elsewhere.
pub fn multi_shot_prune(prod: &TimeTotalProductMdp, plan: &MultiShotPlan) -> Result<Shield> {
    if plan.horizon() != prod.horizon() {
        return Err(Error::InvalidPlan(format!(
            "plan ends at {}, product horizon is {}",
            plan.horizon(),
            prod.horizon()
        )));
    }
    let ts = plan.timestamps();
    let n_seg = plan.segments();
    let mut sweep = Sweep::new(prod);
    let mut values = vec![0.0; prod.node_count()];
    for n in prod.layer(prod.horizon()) {
        values[n] = terminal_value(prod, n);
        sweep.f[n] = values[n];
    }
    let mut boundaries = Vec::new();
    for i in (1..=n_seg).rev() {
        let (t_start, t_end) = (ts[i], ts[i - 1]);
        if i < n_seg {
            let next_threshold = plan.thresholds()[i];
            let mut boundary = SubgraphBoundary {
                index: i,
                time: t_start,
                accepting: Vec::new(),
                trash: Vec::new(),
            };
            for n in prod.layer(t_start) {
                if sweep.f[n] >= next_threshold {
                    boundary.accepting.push(n);
                    values[n] = 1.0;
                } else {
                    boundary.trash.push(n);
                    values[n] = 0.0;
                }
            }
            if boundary.accepting.is_empty() {
                return Err(Error::EmptyAcceptingSet { index: i });
            }
            boundaries.push(boundary);
        }
        sweep.run(prod, t_start, t_end, &mut values, plan.thresholds()[i - 1])?;
    }
    boundaries.reverse();

    let mut boundary_node: Vec<bool> = (0..prod.node_count()).map(|n| !prod.is_open(n)).collect();
    for b in &boundaries {
        for n in prod.layer(b.time) {
            boundary_node[n] = true;
        }
    }
    Ok(Shield {
        f: sweep.f,
        kappa: sweep.kappa,
        allowed: sweep.allowed,
        pi_c: sweep.pi_c,
        plan: plan.clone(),
        boundaries,
        boundary_node,
    })
}

/// Initial nodes whose bound is below `threshold`, with their bounds.
pub fn check_initial(
    prod: &TimeTotalProductMdp,
    shield: &Shield,
    threshold: f64,
) -> Vec<(NodeId, f64)> {
    prod.initial()
        .iter()
        .filter(|&&n| shield.f[n] < threshold)
        .map(|&n| (n, shield.f[n]))
        .collect()
}

/// Converts `check_initial` violators into an error naming MDP states.
pub fn initial_check_error(
    mdp: &LabeledIntervalMdp,
    prod: &TimeTotalProductMdp,
    threshold: f64,
    violators: &[(NodeId, f64)],
) -> Error {
    Error::InitialCheckFailed {
        threshold,
        violators: violators
            .iter()
            .map(|&(n, f)| (mdp.state_name(prod.key(n).s).to_owned(), f))
            .collect(),
    }
}

/// Exact probability of reaching an accepting node under a fixed policy and
/// the MDP's true dynamics. `policy` is consulted on undecided nodes only.
pub fn exact_reach_probability(
    prod: &TimeTotalProductMdp,
    mdp: &LabeledIntervalMdp,
    policy: impl Fn(NodeId) -> ActionIdx,
) -> Result<Vec<f64>> {
    if !mdp.has_dynamics() {
        return Err(Error::MissingDynamics);
    }
    let mut value = vec![0.0; prod.node_count()];
    for t in (0..=prod.horizon()).rev() {
        for n in prod.layer(t) {
            value[n] = match prod.class(n) {
                NodeClass::Accepting => 1.0,
                NodeClass::Trash => 0.0,
                NodeClass::Open => {
                    let key = prod.key(n);
                    let a = policy(n);
                    let c = prod
                        .choice_of(n, a)
                        .ok_or_else(|| Error::UnavailableAction {
                            state: mdp.state_name(key.s).to_owned(),
                            action: mdp.action_name(a).to_owned(),
                        })?;
                    let mut v = 0.0;
                    for &(s_next, p) in mdp.dynamics(key.s, a).unwrap_or(&[]) {
                        if p == 0.0 {
                            continue;
                        }
                        let to = prod.successor(c, s_next).ok_or_else(|| {
                            Error::InvalidMdp(format!(
                                "true transition ({}, {}, {}) has zero upper bound",
                                mdp.state_name(key.s),
                                mdp.action_name(a),
                                mdp.state_name(s_next)
                            ))
                        })?;
                        v += p * value[to];
                    }
                    v
                }
            };
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{Alphabet, LabelSet};
    use crate::mdp::BoundEntry;
    use crate::product::build_product;
    use crate::product::tests::example_product;
    use crate::{automaton::compile, twtl::parse_formula};

    fn problem(values: &[f64], los: &[f64], his: &[f64]) -> IntervalDistributionProblem {
        IntervalDistributionProblem::new(values.to_vec(), los.to_vec(), his.to_vec())
    }

    #[test]
    fn kappa_documented_examples() {
        let (k, _) = solve_kappa(&problem(
            &[1.0, 1.0, 1.0],
            &[0.0, 0.2, 0.1],
            &[1.0, 0.5, 0.9],
        ))
        .unwrap();
        assert_eq!(k, 1.0);
        let (k, d) = solve_kappa(&problem(&[0.0, 1.0], &[0.0, 0.9], &[0.1, 1.0])).unwrap();
        assert_eq!(k, 0.9);
        assert!((d[0] - 0.1).abs() < 1e-15 && d[1] == 0.9);
        let (k, d) = solve_kappa(&problem(
            &[0.25, 0.5, 1.0],
            &[0.2, 0.3, 0.5],
            &[0.2, 0.3, 0.5],
        ))
        .unwrap();
        assert_eq!(d, vec![0.2, 0.3, 0.5]);
        assert!((k - (0.05 + 0.15 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn kappa_infeasible() {
        assert!(matches!(
            solve_kappa(&problem(&[0.0, 1.0], &[0.6, 0.6], &[1.0, 1.0])),
            Err(Error::Infeasible { .. })
        ));
        assert!(matches!(
            solve_kappa(&problem(&[0.0, 1.0], &[0.0, 0.0], &[0.4, 0.4])),
            Err(Error::Infeasible { .. })
        ));
    }

    /// Two-step toy with formula `[H^0 G]^[0,2]`. From the root `r`, a1
    /// reaches x (labeled G) with [0.9, 1.0] or y (never G) with [0, 0.1];
    /// a2 reaches u or v with [0.5, 0.5] each, and from u and v every action
    /// reaches g (labeled G) or z (never G) with [0.5, 0.5]. Layer-1 values
    /// are therefore x = 1, y = 0, u = v = 0.5.
    pub(crate) fn toy_product() -> (LabeledIntervalMdp, TimeTotalProductMdp) {
        let ap = Alphabet::new(["G"]).unwrap();
        let names = ["r", "x", "y", "u", "v", "g", "z"]
            .map(String::from)
            .to_vec();
        let e = |to, lo, hi| BoundEntry { to, lo, hi };
        let both = |row: Vec<BoundEntry>| vec![row.clone(), row];
        let coin = || both(vec![e(5, 0.5, 0.5), e(6, 0.5, 0.5)]);
        let bounds = vec![
            vec![
                vec![e(1, 0.9, 1.0), e(2, 0.0, 0.1)],
                vec![e(3, 0.5, 0.5), e(4, 0.5, 0.5)],
            ],
            both(vec![e(1, 1.0, 1.0)]),
            both(vec![e(2, 1.0, 1.0)]),
            coin(),
            coin(),
            both(vec![e(5, 1.0, 1.0)]),
            both(vec![e(6, 1.0, 1.0)]),
        ];
        let g = LabelSet(1);
        let empty = LabelSet::EMPTY;
        let labels = vec![empty, g, empty, empty, empty, g, empty];
        let mdp = LabeledIntervalMdp::new(
            names,
            vec!["a1".into(), "a2".into()],
            ap.clone(),
            labels,
            bounds,
            None,
            vec![vec![0.0; 2]; 7],
        )
        .unwrap();
        let f = parse_formula("[H^0 G]^[0,2]", &ap).unwrap();
        let aut = compile(&f, &ap).unwrap();
        let prod = build_product(&mdp, &aut, 2).unwrap();
        (mdp, prod)
    }

    #[test]
    fn toy_backward_pass() {
        let (mdp, prod) = toy_product();
        let root = prod.initial_node(mdp.state_index("r").unwrap());
        let layer1_value = |n: NodeId| match mdp.state_name(prod.key(n).s) {
            "x" => 1.0,
            "y" => 0.0,
            _ => 0.5,
        };
        let pass = backward_pass(&prod, 1, 0, layer1_value).unwrap();
        assert!((pass.f[root] - 0.9).abs() < 1e-15);
        assert_eq!(pass.pi_c[root], Some(0));
        let ids = prod.choice_ids(root);
        assert!((pass.kappa[ids.start] - 0.9).abs() < 1e-15);
        assert!((pass.kappa[ids.start + 1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_successor_point_interval() {
        let (mdp, prod) = toy_product();
        let x = prod.initial_node(mdp.state_index("x").unwrap());
        let pass = backward_pass(&prod, 1, 0, |_| 1.0).unwrap();
        assert_eq!(pass.f[x], 1.0);
    }

    #[test]
    fn decided_nodes_fixed_at_every_layer() {
        let (_, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.5).unwrap();
        for n in 0..prod.node_count() {
            if prod.is_accepting(n) {
                assert_eq!(shield.f[n], 1.0);
            }
            if prod.is_trash(n) {
                assert_eq!(shield.f[n], 0.0);
            }
            assert!((0.0..=1.0).contains(&shield.f[n]));
        }
    }

    #[test]
    fn example_values() {
        // Start s1 (B observed): a1 keeps B with probability >= 0.9, a2 moves
        // to C. Start s0: a1 reaches s1 with >= 0.7, then s1 must hold B at
        // t = 2 under a1 (>= 0.9): 0.63. Start s2: a1 reaches s1 with >= 0.2,
        // which still needs B at t = 2: 0.18.
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.5).unwrap();
        let f = |s: &str| shield.f[prod.initial_node(mdp.state_index(s).unwrap())];
        assert!((f("s1") - 0.9).abs() < 1e-12);
        assert!((f("s0") - 0.63).abs() < 1e-12);
        assert!((f("s2") - 0.18).abs() < 1e-12);
        let violators = shield.check_initial(&prod);
        assert_eq!(violators.len(), 1);
        assert_eq!(prod.key(violators[0].0).s, 2);
        assert!((violators[0].1 - 0.18).abs() < 1e-12);
    }

    #[test]
    fn pr_one_keeps_only_sure_actions_at_last_decision_layer() {
        let (_, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 1.0).unwrap();
        let t = prod.horizon() - 1;
        for n in prod.layer(t).filter(|&n| prod.is_open(n)) {
            for c in prod.choice_ids(n) {
                let sure = prod.edges(c).iter().all(|e| prod.is_accepting(e.to));
                assert_eq!(shield.allowed[c], sure);
            }
        }
    }

    #[test]
    fn tiny_threshold_prunes_only_zero_successors() {
        let (_, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 1e-9).unwrap();
        for n in
            (0..prod.node_count()).filter(|&n| prod.is_open(n) && prod.key(n).t < prod.horizon())
        {
            for c in prod.choice_ids(n) {
                let positive = prod.edges(c).iter().all(|e| shield.f[e.to] > 0.0);
                assert_eq!(shield.allowed[c], positive);
            }
        }
    }

    #[test]
    fn toy_pruning_at_threshold() {
        let (mdp, prod) = toy_product();
        let root = prod.initial_node(mdp.state_index("r").unwrap());
        let ids = prod.choice_ids(root);

        let shield = one_shot_prune(&prod, 0.6).unwrap();
        assert!(!shield.allowed[ids.start], "y has f = 0");
        assert!(!shield.allowed[ids.start + 1], "u, v have f = 0.5 < 0.6");
        assert_eq!(shield.pi_c[root], Some(0));
        assert!((shield.f[root] - 0.9).abs() < 1e-15);
        assert!((shield.kappa[ids.start + 1] - 0.5).abs() < 1e-15);

        let shield = one_shot_prune(&prod, 0.4).unwrap();
        assert!(!shield.allowed[ids.start]);
        assert!(shield.allowed[ids.start + 1]);
        // π_C still picks the pruned action with the larger κ.
        assert_eq!(shield.pi_c[root], Some(0));
    }

    #[test]
    fn one_shot_equals_single_segment_plan() {
        let (_, _, prod) = example_product();
        for pr in [0.1, 0.5, 0.63, 0.9, 1.0] {
            let a = one_shot_prune(&prod, pr).unwrap();
            let b = multi_shot_prune(&prod, &MultiShotPlan::new(vec![0, 2], vec![pr]).unwrap())
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn two_segment_boundary() {
        let (mdp, _, prod) = example_product();
        let plan = MultiShotPlan::uniform(vec![0, 1, 2], 0.81).unwrap();
        let shield = multi_shot_prune(&prod, &plan).unwrap();
        assert_eq!(shield.boundaries.len(), 1);
        let b = &shield.boundaries[0];
        assert_eq!(b.time, 1);
        let second = &plan.thresholds()[1];
        for &n in &b.accepting {
            assert!(shield.f[n] >= *second);
        }
        for &n in &b.trash {
            assert!(shield.f[n] < *second);
        }
        assert_eq!(b.accepting.len() + b.trash.len(), prod.layer(1).len());
        assert!(prod.layer(1).all(|n| shield.is_boundary(n)));
        // Layer-1 node (s1, hold started) has f = 0.9 >= 0.9: accepting.
        let s1 = mdp.state_index("s1").unwrap();
        assert!(b.accepting.iter().any(|&n| prod.key(n).s == s1));
    }

    #[test]
    fn empty_accepting_set_is_reported() {
        let ap = Alphabet::new(["B"]).unwrap();
        let mdp = LabeledIntervalMdp::new(
            vec!["s".into()],
            vec!["stay".into()],
            ap.clone(),
            vec![LabelSet::EMPTY],
            vec![vec![vec![BoundEntry {
                to: 0,
                lo: 1.0,
                hi: 1.0,
            }]]],
            None,
            vec![vec![0.0]],
        )
        .unwrap();
        let aut = compile(&parse_formula("[H^0 B]^[0,2]", &ap).unwrap(), &ap).unwrap();
        let prod = build_product(&mdp, &aut, 2).unwrap();
        let plan = MultiShotPlan::uniform(vec![0, 1, 2], 0.25).unwrap();
        assert!(matches!(
            multi_shot_prune(&prod, &plan),
            Err(Error::EmptyAcceptingSet { index: 1 })
        ));
    }

    #[test]
    fn plan_validation() {
        assert!(MultiShotPlan::new(vec![0, 5, 5], vec![0.9, 0.9]).is_err());
        assert!(MultiShotPlan::new(vec![1, 5], vec![0.9]).is_err());
        assert!(MultiShotPlan::new(vec![0, 5], vec![0.0]).is_err());
        assert!(MultiShotPlan::with_target(vec![0, 5, 9], vec![0.9, 0.9], 0.9).is_err());
        let plan = MultiShotPlan::uniform(vec![0, 8, 15, 22, 35], 0.9).unwrap();
        assert!((plan.product() - 0.9).abs() <= PLAN_PRODUCT_TOLERANCE);
    }

    #[test]
    fn exact_reach_dominates_bound_on_example() {
        let (mdp, _, prod) = example_product();
        let shield = one_shot_prune(&prod, 0.5).unwrap();
        let exact = exact_reach_probability(&prod, &mdp, |n| shield.pi_c[n].unwrap()).unwrap();
        for (n, &p) in exact.iter().enumerate() {
            assert!(p >= shield.f[n] - 1e-12, "node {n}: {p} < {}", shield.f[n]);
            if prod.is_accepting(n) {
                assert_eq!(p, 1.0);
            }
            if prod.is_trash(n) {
                assert_eq!(p, 0.0);
            }
        }
        // s0 start: 0.8 * 0.95 exactly.
        let s0 = prod.initial_node(0);
        assert!((exact[s0] - 0.76).abs() < 1e-12);
    }
}
