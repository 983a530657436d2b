//! Grid environments with eight-way moves and action uncertainty.
//!
//! Cells are addressed `(row, col)` with row 0 on the north edge. A
//! directional action moves to the intended neighbour with probability
//! `1 - ε_real` and otherwise to one of the other feasible outcomes (the
//! other directions and staying put), chosen uniformly. `Stay` is
//! deterministic. The interval bounds handed to the shield are
//! `[1 - ε, 1]` for the intended move and `[0, ε]` for each unintended one.
//!
//! A directional action is unavailable in a cell when its intended move
//! leaves the grid or crosses a door in the forbidden direction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Alphabet, LabelSet};
use crate::mdp::{BoundEntry, LabeledIntervalMdp};
use crate::twtl::{parse_formula, Formula, DELIVERY_TASK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GridAction {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
    Stay,
}

impl GridAction {
    pub const ALL: [GridAction; 9] = [
        GridAction::N,
        GridAction::NE,
        GridAction::E,
        GridAction::SE,
        GridAction::S,
        GridAction::SW,
        GridAction::W,
        GridAction::NW,
        GridAction::Stay,
    ];

    /// `(d_row, d_col)`.
    pub fn offset(self) -> (i64, i64) {
        match self {
            GridAction::N => (-1, 0),
            GridAction::NE => (-1, 1),
            GridAction::E => (0, 1),
            GridAction::SE => (1, 1),
            GridAction::S => (1, 0),
            GridAction::SW => (1, -1),
            GridAction::W => (0, -1),
            GridAction::NW => (-1, -1),
            GridAction::Stay => (0, 0),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            GridAction::N => "N",
            GridAction::NE => "NE",
            GridAction::E => "E",
            GridAction::SE => "SE",
            GridAction::S => "S",
            GridAction::SW => "SW",
            GridAction::W => "W",
            GridAction::NW => "NW",
            GridAction::Stay => "Stay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Cell {
        Cell { row, col }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLabel {
    #[serde(flatten)]
    pub cell: Cell,
    pub props: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardCell {
    #[serde(flatten)]
    pub cell: Cell,
    pub reward: f64,
}

/// Moves out of `cell` in the listed directions are impossible, whether
/// intended or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneWayDoor {
    #[serde(flatten)]
    pub cell: Cell,
    pub forbidden: Vec<GridAction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub real_uncertainty: f64,
    pub assumed_uncertainty: f64,
    pub propositions: Alphabet,
    #[serde(default)]
    pub labels: Vec<CellLabel>,
    #[serde(default)]
    pub reward_cells: Vec<RewardCell>,
    #[serde(default)]
    pub one_way_doors: Vec<OneWayDoor>,
}

impl GridSpec {
    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn state_index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_of(&self, state: usize) -> Cell {
        Cell::new(state / self.width, state % self.width)
    }

    pub fn state_name(cell: Cell) -> String {
        format!("r{}c{}", cell.row, cell.col)
    }

    fn contains(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn with_assumed_uncertainty(&self, epsilon: f64) -> GridSpec {
        GridSpec {
            assumed_uncertainty: epsilon,
            ..self.clone()
        }
    }

    /// Target of `action` from `cell`, if the move is feasible.
    pub fn target(&self, cell: Cell, action: GridAction) -> Option<Cell> {
        let (dr, dc) = action.offset();
        let row = cell.row as i64 + dr;
        let col = cell.col as i64 + dc;
        if row < 0 || col < 0 || row >= self.height as i64 || col >= self.width as i64 {
            return None;
        }
        let blocked = self
            .one_way_doors
            .iter()
            .any(|d| d.cell == cell && d.forbidden.contains(&action));
        (!blocked).then(|| Cell::new(row as usize, col as usize))
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidGrid(
                "grid must have positive width and height".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.real_uncertainty) {
            return Err(Error::InvalidGrid(format!(
                "real uncertainty {} outside [0, 1)",
                self.real_uncertainty
            )));
        }
        if !(self.assumed_uncertainty >= self.real_uncertainty && self.assumed_uncertainty <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "assumed uncertainty {} must lie in [{}, 1]",
                self.assumed_uncertainty, self.real_uncertainty
            )));
        }
        let cells = self
            .labels
            .iter()
            .map(|l| l.cell)
            .chain(self.reward_cells.iter().map(|r| r.cell))
            .chain(self.one_way_doors.iter().map(|d| d.cell));
        for cell in cells {
            if !self.contains(cell) {
                return Err(Error::InvalidGrid(format!(
                    "cell {cell:?} outside the grid"
                )));
            }
        }
        for door in &self.one_way_doors {
            if door.forbidden.contains(&GridAction::Stay) {
                return Err(Error::InvalidGrid("Stay cannot be forbidden".into()));
            }
        }
        for label in &self.labels {
            self.propositions.label(&label.props)?;
        }
        Ok(())
    }

    pub fn label_of(&self, cell: Cell) -> Result<LabelSet> {
        let mut set = LabelSet::EMPTY;
        for l in self.labels.iter().filter(|l| l.cell == cell) {
            set = LabelSet(set.0 | self.propositions.label(&l.props)?.0);
        }
        Ok(set)
    }

    pub fn reward_of(&self, cell: Cell) -> f64 {
        self.reward_cells
            .iter()
            .filter(|r| r.cell == cell)
            .map(|r| r.reward)
            .sum()
    }

    /// Cells carrying proposition `name`.
    pub fn cells_with(&self, name: &str) -> Vec<Cell> {
        self.labels
            .iter()
            .filter(|l| l.props.iter().any(|p| p == name))
            .map(|l| l.cell)
            .collect()
    }

    /// ASCII map: each cell shows its label, or its reward as a digit
    /// shade (`.` for none). A `=` run under a cell marks a door that blocks
    /// southward exits.
    pub fn render_ascii(&self) -> String {
        let max_reward = self
            .reward_cells
            .iter()
            .map(|r| r.reward)
            .fold(0.0f64, f64::max);
        let mut out = String::new();
        let _ = write!(out, "    ");
        for c in 0..self.width {
            let _ = write!(out, "{c:^6}");
        }
        out.push('\n');
        for r in 0..self.height {
            let _ = write!(out, "{r:>3} ");
            for c in 0..self.width {
                let cell = Cell::new(r, c);
                let names: Vec<&str> = self
                    .labels
                    .iter()
                    .filter(|l| l.cell == cell)
                    .flat_map(|l| l.props.iter().map(String::as_str))
                    .collect();
                let text = if !names.is_empty() {
                    names.join(",")
                } else {
                    let reward = self.reward_of(cell);
                    if reward > 0.0 && max_reward > 0.0 {
                        let shade = (reward / max_reward * 9.0).round().clamp(1.0, 9.0) as u32;
                        shade.to_string().repeat(3)
                    } else {
                        ".".into()
                    }
                };
                let _ = write!(out, "{text:^6}");
            }
            out.push('\n');
            let doors: Vec<bool> = (0..self.width)
                .map(|c| {
                    self.one_way_doors
                        .iter()
                        .any(|d| d.cell == Cell::new(r, c) && d.forbidden.contains(&GridAction::S))
                })
                .collect();
            if doors.iter().any(|d| *d) {
                let _ = write!(out, "    ");
                for d in doors {
                    let _ = write!(out, "{:^6}", if d { "====" } else { "" });
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Builds the labeled interval MDP with true dynamics.
pub fn build_grid_mdp(spec: &GridSpec) -> Result<LabeledIntervalMdp> {
    spec.validate()?;
    let n = spec.cell_count();
    let m = GridAction::ALL.len();
    let eps_real = spec.real_uncertainty;
    let eps = spec.assumed_uncertainty;
    let mut labels = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    let mut dynamics = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    for s in 0..n {
        let cell = spec.cell_of(s);
        labels.push(spec.label_of(cell)?);
        rewards.push(vec![spec.reward_of(cell); m]);
        let feasible: Vec<(GridAction, Cell)> = GridAction::ALL
            .iter()
            .filter_map(|&a| spec.target(cell, a).map(|to| (a, to)))
            .collect();
        let mut bound_row = vec![Vec::new(); m];
        let mut dyn_row = vec![Vec::new(); m];
        for &(action, intended) in &feasible {
            let a = action.index();
            if action == GridAction::Stay {
                bound_row[a] = vec![BoundEntry {
                    to: s,
                    lo: 1.0,
                    hi: 1.0,
                }];
                dyn_row[a] = vec![(s, 1.0)];
                continue;
            }
            let others: Vec<Cell> = feasible
                .iter()
                .filter(|(b, _)| *b != action)
                .map(|(_, c)| *c)
                .collect();
            let share = eps_real / others.len() as f64;
            let i = spec.state_index(intended);
            bound_row[a].push(BoundEntry {
                to: i,
                lo: 1.0 - eps,
                hi: 1.0,
            });
            dyn_row[a].push((i, 1.0 - eps_real));
            for other in others {
                let o = spec.state_index(other);
                bound_row[a].push(BoundEntry {
                    to: o,
                    lo: 0.0,
                    hi: eps,
                });
                dyn_row[a].push((o, share));
            }
        }
        bounds.push(bound_row);
        dynamics.push(dyn_row);
    }
    LabeledIntervalMdp::new(
        (0..n)
            .map(|s| GridSpec::state_name(spec.cell_of(s)))
            .collect(),
        GridAction::ALL
            .iter()
            .map(|a| a.name().to_owned())
            .collect(),
        spec.propositions.clone(),
        labels,
        bounds,
        Some(dynamics),
        rewards,
    )
}

/// Propositions of the delivery task, in alphabet order.
pub const CASE_STUDY_PROPOSITIONS: [&str; 5] = ["P", "D1", "D2", "D3", "Base"];

/// Cell positions of the canonical layout. These are choices of this crate,
/// not recovered from any published figure.
pub const CASE_STUDY_REGIONS: [(&str, Cell); 5] = [
    ("P", Cell::new(2, 2)),
    ("D1", Cell::new(2, 3)),
    ("D2", Cell::new(3, 3)),
    ("D3", Cell::new(1, 3)),
    ("Base", Cell::new(3, 2)),
];

/// Reward per monitored cell. The band sits along the east and south edges,
/// away from the task regions.
pub const CASE_STUDY_REWARDS: [(Cell, f64); 8] = [
    (Cell::new(0, 5), 10.0),
    (Cell::new(1, 5), 8.0),
    (Cell::new(2, 5), 6.0),
    (Cell::new(3, 5), 4.0),
    (Cell::new(5, 0), 3.0),
    (Cell::new(5, 1), 2.0),
    (Cell::new(4, 5), 2.0),
    (Cell::new(5, 5), 1.0),
];

/// The 6×6 delivery case study with assumed uncertainty 0.08 and real
/// uncertainty 0.03, and the delivery task formula.
pub fn canonical_case_study() -> (GridSpec, Formula) {
    let propositions = Alphabet::new(CASE_STUDY_PROPOSITIONS).expect("valid propositions");
    let p = CASE_STUDY_REGIONS[0].1;
    let spec = GridSpec {
        width: 6,
        height: 6,
        real_uncertainty: 0.03,
        assumed_uncertainty: 0.08,
        propositions: propositions.clone(),
        labels: CASE_STUDY_REGIONS
            .iter()
            .map(|(name, cell)| CellLabel {
                cell: *cell,
                props: vec![(*name).to_owned()],
            })
            .collect(),
        reward_cells: CASE_STUDY_REWARDS
            .iter()
            .map(|&(cell, reward)| RewardCell { cell, reward })
            .collect(),
        one_way_doors: vec![OneWayDoor {
            cell: p,
            forbidden: vec![GridAction::S, GridAction::SE, GridAction::SW],
        }],
    };
    let formula = parse_formula(DELIVERY_TASK, &propositions).expect("delivery task parses");
    (spec, formula)
}

/// Reward cells keyed by state name, for reports.
pub fn reward_map(spec: &GridSpec) -> BTreeMap<String, f64> {
    spec.reward_cells
        .iter()
        .map(|r| (GridSpec::state_name(r.cell), r.reward))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_grid(eps: f64) -> GridSpec {
        GridSpec {
            width: 6,
            height: 6,
            real_uncertainty: 0.03,
            assumed_uncertainty: eps,
            propositions: Alphabet::new(["X"]).unwrap(),
            labels: vec![],
            reward_cells: vec![],
            one_way_doors: vec![],
        }
    }

    #[test]
    fn interior_move_distribution() {
        let spec = open_grid(0.08);
        let mdp = build_grid_mdp(&spec).unwrap();
        let s = spec.state_index(Cell::new(2, 2));
        let e = GridAction::E.index();
        let row = mdp.dynamics(s, e).unwrap();
        assert_eq!(row.len(), 9);
        let east = spec.state_index(Cell::new(2, 3));
        for &(to, p) in row {
            if to == east {
                assert_eq!(p, 0.97);
            } else {
                assert_eq!(p, 0.03 / 8.0);
            }
        }
        assert_eq!(mdp.bound(s, e, east), (1.0 - 0.08, 1.0));
        assert_eq!(mdp.bound(s, e, s), (0.0, 0.08));
    }

    #[test]
    fn stay_is_a_point_interval() {
        let spec = open_grid(0.13);
        let mdp = build_grid_mdp(&spec).unwrap();
        for s in 0..spec.cell_count() {
            let a = GridAction::Stay.index();
            assert_eq!(
                mdp.bounds(s, a),
                &[BoundEntry {
                    to: s,
                    lo: 1.0,
                    hi: 1.0
                }]
            );
            assert_eq!(mdp.dynamics(s, a).unwrap(), &[(s, 1.0)]);
        }
    }

    #[test]
    fn corner_cell_alternatives() {
        let spec = open_grid(0.08);
        let mdp = build_grid_mdp(&spec).unwrap();
        let corner = spec.state_index(Cell::new(0, 0));
        let available: Vec<&str> = mdp
            .available_actions(corner)
            .map(|a| mdp.action_name(a))
            .collect();
        assert_eq!(available, vec!["E", "SE", "S", "Stay"]);
        // Feasible outcomes: E, SE, S and staying; each move has 3 others.
        let row = mdp.dynamics(corner, GridAction::SE.index()).unwrap();
        assert_eq!(row.len(), 4);
        assert!(row.iter().filter(|e| e.1 != 0.97).all(|e| e.1 == 0.01));
        let sum: f64 = row.iter().map(|e| e.1).sum();
        assert!((sum - 1.0).abs() <= 1e-15);
        // Edge cell (0, 2): 5 feasible moves plus staying.
        let edge = spec.state_index(Cell::new(0, 2));
        let row = mdp.dynamics(edge, GridAction::W.index()).unwrap();
        assert_eq!(row.len(), 6);
    }

    #[test]
    fn swept_uncertainties_validate() {
        let (spec, _) = canonical_case_study();
        for eps in [0.03, 0.08, 0.13] {
            let mdp = build_grid_mdp(&spec.with_assumed_uncertainty(eps)).unwrap();
            assert_eq!(mdp.validate(), vec![]);
            for s in 0..mdp.state_count() {
                for a in mdp.available_actions(s) {
                    let sum: f64 = mdp.dynamics(s, a).unwrap().iter().map(|e| e.1).sum();
                    assert!((sum - 1.0).abs() <= 1e-15, "{s} {a}: {sum}");
                }
            }
        }
    }

    #[test]
    fn assumed_below_real_rejected() {
        let spec = open_grid(0.01);
        assert!(matches!(build_grid_mdp(&spec), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn case_study_layout() {
        let (spec, formula) = canonical_case_study();
        assert_eq!(formula.time_bound(), 35);
        for name in CASE_STUDY_PROPOSITIONS {
            assert_eq!(spec.cells_with(name).len(), 1, "{name}");
        }
        assert_eq!(spec.labels.len(), 5);
        let mdp = build_grid_mdp(&spec).unwrap();
        let p = spec.state_index(spec.cells_with("P")[0]);
        let available: Vec<&str> = mdp
            .available_actions(p)
            .map(|a| mdp.action_name(a))
            .collect();
        for blocked in ["S", "SE", "SW"] {
            assert!(!available.contains(&blocked));
        }
        assert!(available.contains(&"N"));
        // No action leaves P southward, even by accident.
        let below = spec.state_index(Cell::new(3, 2));
        for a in mdp.available_actions(p) {
            assert_eq!(mdp.bound(p, a, below), (0.0, 0.0));
            assert!(mdp.bounds(p, a).iter().all(|e| spec.cell_of(e.to).row <= 2));
        }
        // The cell below can still enter P by moving north.
        assert!(mdp.bound(below, GridAction::N.index(), p).0 > 0.0);
    }

    #[test]
    fn json_round_trip_and_render() {
        let (spec, _) = canonical_case_study();
        let text = serde_json::to_string(&spec).unwrap();
        let back: GridSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let map = spec.render_ascii();
        assert_eq!(map.lines().filter(|l| l.contains("====")).count(), 1);
        for name in CASE_STUDY_PROPOSITIONS {
            assert!(map.contains(name));
        }
    }
}
