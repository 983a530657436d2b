//! The time-total product of a labeled interval MDP and a total automaton.
//!
//! Nodes are triples `(s, q, t)` reachable from the initial layer
//! `{(s, δ(q_init, l(s)), 0)}`. Taking action `a` in `(s, q, t)` and landing
//! in MDP state `s'` moves to `(s', δ(q, l(s')), t + 1)` with the MDP-level
//! bound on `(s, a, s')`. Since every MDP successor determines a unique
//! automaton successor, product edges are in one-to-one correspondence with
//! MDP edges whose upper bound is positive.
//!
//! Nodes are stored layer by layer. Accepting and trash nodes keep their
//! outgoing edges (the agent keeps acting after the constraint is decided);
//! the last layer has none.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::automaton::{StateId, TotalAutomaton};
use crate::error::{Error, Result};
use crate::mdp::{ActionIdx, LabeledIntervalMdp, StateIdx};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeKey {
    pub s: StateIdx,
    pub q: StateId,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Open,
    Accepting,
    Trash,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: NodeId,
    pub lo: f64,
    pub hi: f64,
}

/// One available action at a node together with its product successors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub action: ActionIdx,
    edges_start: usize,
    edges_end: usize,
}

#[derive(Debug, Clone)]
pub struct TimeTotalProductMdp {
    horizon: usize,
    action_count: usize,
    nodes: Vec<NodeKey>,
    class: Vec<NodeClass>,
    index: HashMap<NodeKey, NodeId>,
    /// `layers[t]..layers[t + 1]` are the nodes at time `t`.
    layers: Vec<usize>,
    initial: Vec<NodeId>,
    /// `choice_ranges[n]..choice_ranges[n + 1]` index into `choices`.
    choice_ranges: Vec<usize>,
    choices: Vec<Choice>,
    edges: Vec<Edge>,
    coerced: Vec<NodeId>,
}

/// Builds the time-total product reachable from the initial layer.
///
/// Undecided nodes at the last layer are reclassified as trash; they are
/// listed by [`TimeTotalProductMdp::coerced`].
pub fn build_product(
    mdp: &LabeledIntervalMdp,
    aut: &TotalAutomaton,
    horizon: usize,
) -> Result<TimeTotalProductMdp> {
    if mdp.alphabet() != aut.alphabet() {
        return Err(Error::AlphabetMismatch(format!(
            "MDP labels use {:?}, automaton uses {:?}",
            mdp.alphabet().names(),
            aut.alphabet().names()
        )));
    }
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    let mut layers = vec![0];
    let mut initial = Vec::with_capacity(mdp.state_count());
    for s in 0..mdp.state_count() {
        let key = NodeKey {
            s,
            q: aut.delta(aut.initial(), mdp.label(s)),
            t: 0,
        };
        initial.push(intern(&mut nodes, &mut index, key));
    }
    let mut choice_ranges = vec![0];
    let mut choices = Vec::new();
    let mut edges = Vec::new();
    for t in 0..=horizon {
        let (lo, hi) = (layers[t], nodes.len());
        layers.push(hi);
        if t == horizon {
            break;
        }
        for n in lo..hi {
            let NodeKey { s, q, .. } = nodes[n];
            for a in mdp.available_actions(s) {
                let start = edges.len();
                for e in mdp.bounds(s, a).iter().filter(|e| e.hi > 0.0) {
                    let key = NodeKey {
                        s: e.to,
                        q: aut.delta(q, mdp.label(e.to)),
                        t: t + 1,
                    };
                    let to = intern(&mut nodes, &mut index, key);
                    edges.push(Edge {
                        to,
                        lo: e.lo,
                        hi: e.hi,
                    });
                }
                if edges.len() > start {
                    choices.push(Choice {
                        action: a,
                        edges_start: start,
                        edges_end: edges.len(),
                    });
                }
            }
            choice_ranges.push(choices.len());
        }
    }
    // Last-layer nodes carry no choices.
    choice_ranges.resize(nodes.len() + 1, choices.len());

    let mut coerced = Vec::new();
    let class = nodes
        .iter()
        .enumerate()
        .map(|(n, key)| {
            if aut.is_accepting(key.q) {
                NodeClass::Accepting
            } else if aut.is_trash(key.q) {
                NodeClass::Trash
            } else if key.t == horizon {
                coerced.push(n);
                NodeClass::Trash
            } else {
                NodeClass::Open
            }
        })
        .collect();

    Ok(TimeTotalProductMdp {
        horizon,
        action_count: mdp.action_count(),
        nodes,
        class,
        index,
        layers,
        initial,
        choice_ranges,
        choices,
        edges,
        coerced,
    })
}

fn intern(nodes: &mut Vec<NodeKey>, index: &mut HashMap<NodeKey, NodeId>, key: NodeKey) -> NodeId {
    *index.entry(key).or_insert_with(|| {
        nodes.push(key);
        nodes.len() - 1
    })
}

/// Product successors of `(s, q, t)` under `a`, computed directly from the
/// MDP and automaton without building the product.
pub fn project_bounds(
    mdp: &LabeledIntervalMdp,
    aut: &TotalAutomaton,
    node: NodeKey,
    a: ActionIdx,
) -> Vec<(NodeKey, f64, f64)> {
    mdp.bounds(node.s, a)
        .iter()
        .filter(|e| e.hi > 0.0)
        .map(|e| {
            let key = NodeKey {
                s: e.to,
                q: aut.delta(node.q, mdp.label(e.to)),
                t: node.t + 1,
            };
            (key, e.lo, e.hi)
        })
        .collect()
}

impl TimeTotalProductMdp {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn choice_count(&self) -> usize {
        self.choices.len()
    }

    pub fn key(&self, n: NodeId) -> NodeKey {
        self.nodes[n]
    }

    pub fn node(&self, key: NodeKey) -> Option<NodeId> {
        self.index.get(&key).copied()
    }

    pub fn class(&self, n: NodeId) -> NodeClass {
        self.class[n]
    }

    pub fn is_accepting(&self, n: NodeId) -> bool {
        self.class[n] == NodeClass::Accepting
    }

    pub fn is_trash(&self, n: NodeId) -> bool {
        self.class[n] == NodeClass::Trash
    }

    pub fn is_open(&self, n: NodeId) -> bool {
        self.class[n] == NodeClass::Open
    }

    /// Initial node for each MDP state, indexed by MDP state.
    pub fn initial(&self) -> &[NodeId] {
        &self.initial
    }

    pub fn initial_node(&self, s: StateIdx) -> NodeId {
        self.initial[s]
    }

    /// Node ids at time `t`, as a contiguous range.
    pub fn layer(&self, t: usize) -> std::ops::Range<NodeId> {
        self.layers[t]..self.layers[t + 1]
    }

    /// Last-layer nodes that were undecided and reclassified as trash.
    pub fn coerced(&self) -> &[NodeId] {
        &self.coerced
    }

    /// Global ids of the choices at `n`; these index per-choice tables such
    /// as κ and pruning flags.
    pub fn choice_ids(&self, n: NodeId) -> std::ops::Range<usize> {
        self.choice_ranges[n]..self.choice_ranges[n + 1]
    }

    pub fn choices(&self, n: NodeId) -> &[Choice] {
        &self.choices[self.choice_ids(n)]
    }

    pub fn choice(&self, c: usize) -> &Choice {
        &self.choices[c]
    }

    pub fn edges(&self, c: usize) -> &[Edge] {
        let choice = &self.choices[c];
        &self.edges[choice.edges_start..choice.edges_end]
    }

    /// Global choice id of action `a` at `n`.
    pub fn choice_of(&self, n: NodeId, a: ActionIdx) -> Option<usize> {
        let ids = self.choice_ids(n);
        self.choices[ids.clone()]
            .binary_search_by_key(&a, |c| c.action)
            .ok()
            .map(|i| ids.start + i)
    }

    /// Product successor reached when the MDP moves to `s_next` under the
    /// choice `c`, if that MDP transition is possible according to the bounds.
    pub fn successor(&self, c: usize, s_next: StateIdx) -> Option<NodeId> {
        self.edges(c)
            .iter()
            .map(|e| e.to)
            .find(|&to| self.nodes[to].s == s_next)
    }

    pub fn summary(&self) -> ProductSummary {
        let count = |class| self.class.iter().filter(|&&c| c == class).count();
        ProductSummary {
            horizon: self.horizon,
            nodes: self.node_count(),
            layer_sizes: (0..=self.horizon).map(|t| self.layer(t).len()).collect(),
            initial: self.initial.len(),
            open: count(NodeClass::Open),
            accepting: count(NodeClass::Accepting),
            trash: count(NodeClass::Trash),
            coerced_to_trash: self.coerced.len(),
            choices: self.choices.len(),
            edges: self.edges.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSummary {
    pub horizon: usize,
    pub nodes: usize,
    pub layer_sizes: Vec<usize>,
    pub initial: usize,
    pub open: usize,
    pub accepting: usize,
    pub trash: usize,
    pub coerced_to_trash: usize,
    pub choices: usize,
    pub edges: usize,
}
