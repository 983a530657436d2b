//! Deterministic total automata compiled from TWTL formulas.
//!
//! Compilation runs a breadth-first search over progression residuals. Each
//! state is a canonical residual formula: reading a symbol rewrites it,
//! residual `TRUE` is the unique accepting state and residual `FALSE` the
//! trash state. Both are absorbing.

mod residual;

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Alphabet, LabelSet, Word};
use crate::twtl::Formula;
use residual::Residual;

pub const DEFAULT_STATE_CAP: usize = 100_000;

/// Alphabets up to this size get a dense `|Q| x 2^|AP|` transition table.
pub const DENSE_ALPHABET_LIMIT: usize = 8;

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Transitions {
    /// Indexed by `state * 2^|AP| + symbol`.
    Dense(Vec<StateId>),
    /// Indexed by `state * 2^k + projection`, where the projection keeps only
    /// the `k` propositions that occur in the formula. Every other
    /// proposition leads to the same successor.
    Projected {
        props: Vec<usize>,
        table: Vec<StateId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalAutomaton {
    alphabet: Alphabet,
    annotations: Vec<String>,
    initial: StateId,
    accepting: StateId,
    trash: StateId,
    transitions: Transitions,
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    pub state_cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// Compiles `formula` with the default state cap.
pub fn compile(formula: &Formula, alphabet: &Alphabet) -> Result<TotalAutomaton> {
    compile_with(formula, alphabet, CompileOptions::default())
}

pub fn compile_with(
    formula: &Formula,
    alphabet: &Alphabet,
    options: CompileOptions,
) -> Result<TotalAutomaton> {
    for prop in formula.propositions() {
        if alphabet.lookup(prop.name()).map(|p| p.index()) != Some(prop.index()) {
            return Err(Error::AlphabetMismatch(format!(
                "formula proposition `{}` is not at index {} of the alphabet",
                prop.name(),
                prop.index()
            )));
        }
    }
    let root = Residual::from_formula(formula)?;
    let props: Vec<usize> = formula.propositions().iter().map(|p| p.index()).collect();
    let projected_count = 1usize << props.len();
    let expand = |proj: usize| -> LabelSet {
        let mut set = LabelSet::EMPTY;
        for (bit, &prop) in props.iter().enumerate() {
            if proj >> bit & 1 == 1 {
                set = set.with(prop);
            }
        }
        set
    };

    let mut ids: HashMap<Residual, StateId> = HashMap::new();
    let mut residuals: Vec<Residual> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |r: Residual, residuals: &mut Vec<Residual>, queue: &mut VecDeque<StateId>| {
        if let Some(&id) = ids.get(&r) {
            return Ok(id);
        }
        if residuals.len() >= options.state_cap {
            return Err(Error::StateExplosion {
                cap: options.state_cap,
            });
        }
        let id = residuals.len();
        ids.insert(r.clone(), id);
        residuals.push(r);
        queue.push_back(id);
        Ok(id)
    };

    let initial = intern(root, &mut residuals, &mut queue)?;
    // Accepting and trash states are always materialized.
    let accepting = intern(Residual::True, &mut residuals, &mut queue)?;
    let trash = intern(Residual::False, &mut residuals, &mut queue)?;

    let mut table: Vec<StateId> = Vec::new();
    while let Some(state) = queue.pop_front() {
        let current = residuals[state].clone();
        let row_start = state * projected_count;
        if table.len() < row_start + projected_count {
            table.resize(row_start + projected_count, usize::MAX);
        }
        for proj in 0..projected_count {
            let next = current.progress(expand(proj));
            table[row_start + proj] = intern(next, &mut residuals, &mut queue)?;
        }
    }

    let annotations = residuals
        .iter()
        .map(|r| r.display(alphabet).to_string())
        .collect();

    let transitions = if alphabet.len() <= DENSE_ALPHABET_LIMIT {
        let symbols = 1usize << alphabet.len();
        let mut dense = Vec::with_capacity(residuals.len() * symbols);
        for state in 0..residuals.len() {
            for symbol in 0..symbols {
                let proj = project(&props, LabelSet(symbol as u64));
                dense.push(table[state * projected_count + proj]);
            }
        }
        Transitions::Dense(dense)
    } else {
        Transitions::Projected { props, table }
    };

    Ok(TotalAutomaton {
        alphabet: alphabet.clone(),
        annotations,
        initial,
        accepting,
        trash,
        transitions,
    })
}

fn project(props: &[usize], symbol: LabelSet) -> usize {
    props
        .iter()
        .enumerate()
        .filter(|(_, &p)| symbol.contains(p))
        .fold(0, |acc, (bit, _)| acc | 1 << bit)
}

impl TotalAutomaton {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.annotations.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// The unique accepting state.
    pub fn accepting(&self) -> StateId {
        self.accepting
    }

    pub fn trash(&self) -> StateId {
        self.trash
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        state == self.accepting
    }

    pub fn is_trash(&self, state: StateId) -> bool {
        state == self.trash
    }

    /// Canonical residual formula of a state.
    pub fn annotation(&self, state: StateId) -> &str {
        &self.annotations[state]
    }

    /// Transition function. `symbol` must be a subset of the alphabet.
    pub fn delta(&self, state: StateId, symbol: LabelSet) -> StateId {
        debug_assert!(self.alphabet.contains(symbol));
        match &self.transitions {
            Transitions::Dense(table) => table[(state << self.alphabet.len()) + symbol.0 as usize],
            Transitions::Projected { props, table } => {
                table[(state << props.len()) + project(props, symbol)]
            }
        }
    }

    pub fn try_delta(&self, state: StateId, symbol: LabelSet) -> Result<StateId> {
        if self.alphabet.contains(symbol) {
            Ok(self.delta(state, symbol))
        } else {
            Err(Error::UnknownSymbol(symbol.0))
        }
    }

    /// Runs the word from the initial state.
    pub fn run(&self, word: &Word) -> Result<StateId> {
        word.symbols()
            .iter()
            .try_fold(self.initial, |q, &sym| self.try_delta(q, sym))
    }

    pub fn accepts(&self, word: &Word) -> Result<bool> {
        Ok(self.is_accepting(self.run(word)?))
    }

    /// States reachable from the initial state, in id order. The trash state
    /// is always materialized but may be unreachable.
    pub fn reachable_states(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.state_count()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for sym in self.symbols() {
                let next = self.delta(q, sym);
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        (0..self.state_count()).filter(|&q| seen[q]).collect()
    }

    /// Every symbol of the alphabet, in bitmask order. Panics for alphabets
    /// with more than 20 propositions.
    pub fn symbols(&self) -> impl Iterator<Item = LabelSet> {
        assert!(self.alphabet.len() <= 20, "alphabet too large to enumerate");
        (0..1u64 << self.alphabet.len()).map(LabelSet)
    }

    /// Graphviz DOT rendering of the reachable states. Parallel edges are
    /// merged and labeled with the union of their symbols.
    pub fn export_dot(&self) -> String {
        let reachable = self.reachable_states();
        let mut out = String::from("digraph automaton {\n  rankdir=LR;\n");
        out.push_str("  __start [shape=point];\n");
        for &q in &reachable {
            let shape = if self.is_accepting(q) {
                "doublecircle"
            } else {
                "circle"
            };
            let label = if self.is_trash(q) {
                "trash".to_owned()
            } else {
                q.to_string()
            };
            let style = if self.is_trash(q) {
                ", style=filled, fillcolor=gray"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  q{q} [shape={shape}, label=\"{label}\", tooltip=\"{}\"{style}];",
                escape(self.annotation(q))
            );
        }
        let _ = writeln!(out, "  __start -> q{};", self.initial);
        for &q in &reachable {
            let mut merged: Vec<(StateId, Vec<String>)> = Vec::new();
            for sym in self.symbols() {
                let to = self.delta(q, sym);
                let text = self.alphabet.format(sym);
                match merged.iter_mut().find(|(t, _)| *t == to) {
                    Some((_, labels)) => labels.push(text),
                    None => merged.push((to, vec![text])),
                }
            }
            for (to, labels) in merged {
                let label = if labels.len() as u128 == self.alphabet.symbol_count() {
                    "TRUE".to_owned()
                } else {
                    labels.join(" ")
                };
                let _ = writeln!(out, "  q{q} -> q{to} [label=\"{}\"];", escape(&label));
            }
        }
        out.push_str("}\n");
        out
    }

    /// JSON-ready dump of the reachable part of the automaton.
    pub fn to_document(&self) -> AutomatonDocument {
        let reachable = self.reachable_states();
        let mut delta = Vec::new();
        for &q in &reachable {
            for sym in self.symbols() {
                let props = self
                    .alphabet
                    .names_of(sym)
                    .into_iter()
                    .map(str::to_owned)
                    .collect();
                delta.push((q, props, self.delta(q, sym)));
            }
        }
        AutomatonDocument {
            propositions: self.alphabet.names().to_vec(),
            states: reachable
                .iter()
                .map(|&id| StateEntry {
                    id,
                    residual: self.annotation(id).to_owned(),
                })
                .collect(),
            initial: self.initial,
            accepting: vec![self.accepting],
            trash: reachable.contains(&self.trash).then_some(self.trash),
            delta,
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// JSON form of an automaton. `delta` lists `[from, sorted propositions, to]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutomatonDocument {
    pub propositions: Vec<String>,
    pub states: Vec<StateEntry>,
    pub initial: StateId,
    pub accepting: Vec<StateId>,
    /// `None` when the trash state is unreachable.
    pub trash: Option<StateId>,
    pub delta: Vec<(StateId, Vec<String>, StateId)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub id: StateId,
    pub residual: String,
}
