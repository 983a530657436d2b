//! Time-window temporal logic formulas.
//!
//! Concrete syntax (whitespace-insensitive):
//!
//! ```text
//! phi := H^d x | H^d !x | H^d TRUE
//!      | [ phi ]^[a,b]
//!      | phi & phi | phi | phi | !phi | phi . phi
//!      | ( phi )
//! ```
//!
//! Precedence from tightest to loosest: `!`, hold, `&`, `|`, `.`. Binary
//! operators associate to the left.
//!
//! A hold of duration `d` consumes `d + 1` observations. Concatenation splits
//! at the earliest time the left operand is satisfied, and the right operand
//! starts on the next observation.

mod parser;
mod semantics;

use std::fmt;

pub use parser::parse_formula;
pub use semantics::satisfies;

use crate::label::AtomicProposition;

/// Target of a positive hold: an atomic proposition or the constant `TRUE`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HoldTarget {
    Top,
    Prop(AtomicProposition),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `H^d x`: `x` holds for `d + 1` consecutive observations.
    Hold {
        duration: u32,
        target: HoldTarget,
    },
    /// `H^d !x`: `x` is absent for `d + 1` consecutive observations.
    HoldNeg {
        duration: u32,
        prop: AtomicProposition,
    },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Concat(Box<Formula>, Box<Formula>),
    /// `[f]^[start,end]`, with `start <= end`.
    Within {
        inner: Box<Formula>,
        start: u32,
        end: u32,
    },
}

impl Formula {
    pub fn hold(duration: u32, prop: AtomicProposition) -> Formula {
        Formula::Hold {
            duration,
            target: HoldTarget::Prop(prop),
        }
    }

    pub fn hold_top(duration: u32) -> Formula {
        Formula::Hold {
            duration,
            target: HoldTarget::Top,
        }
    }

    pub fn hold_neg(duration: u32, prop: AtomicProposition) -> Formula {
        Formula::HoldNeg { duration, prop }
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn concat(self, other: Formula) -> Formula {
        Formula::Concat(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    /// Panics if `start > end`.
    pub fn within(self, start: u32, end: u32) -> Formula {
        assert!(start <= end, "within window [{start},{end}] is empty");
        Formula::Within {
            inner: Box::new(self),
            start,
            end,
        }
    }

    /// Maximum number of time steps needed to decide the formula. A word of
    /// `time_bound() + 1` observations always suffices.
    pub fn time_bound(&self) -> u32 {
        match self {
            Formula::Hold { duration, .. } | Formula::HoldNeg { duration, .. } => *duration,
            Formula::Within { end, .. } => *end,
            Formula::And(l, r) | Formula::Or(l, r) => l.time_bound().max(r.time_bound()),
            Formula::Not(f) => f.time_bound(),
            Formula::Concat(l, r) => l.time_bound() + r.time_bound() + 1,
        }
    }

    /// Propositions mentioned anywhere in the formula, sorted and deduplicated.
    pub fn propositions(&self) -> Vec<AtomicProposition> {
        fn walk(f: &Formula, out: &mut Vec<AtomicProposition>) {
            match f {
                Formula::Hold {
                    target: HoldTarget::Prop(p),
                    ..
                }
                | Formula::HoldNeg { prop: p, .. } => out.push(p.clone()),
                Formula::Hold { .. } => {}
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Concat(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Formula::Not(f) | Formula::Within { inner: f, .. } => walk(f, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Concat(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Formula::Hold { duration, target } => match target {
                HoldTarget::Top => write!(f, "H^{duration} TRUE"),
                HoldTarget::Prop(p) => write!(f, "H^{duration} {p}"),
            },
            Formula::HoldNeg { duration, prop } => write!(f, "H^{duration} !{prop}"),
            Formula::Within { inner, start, end } => {
                f.write_str("[")?;
                inner.fmt_at(f, 0)?;
                write!(f, "]^[{start},{end}]")
            }
            Formula::Not(inner) => {
                f.write_str("!")?;
                inner.fmt_at(f, 3)
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Concat(l, r) => {
                let (op, level) = match self {
                    Formula::And(..) => (" & ", 2),
                    Formula::Or(..) => (" | ", 1),
                    _ => (" . ", 0),
                };
                l.fmt_at(f, level)?;
                f.write_str(op)?;
                r.fmt_at(f, level + 1)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Pickup-and-delivery task over `{P, D1, D2, D3, Base}` with time bound 35.
pub const DELIVERY_TASK: &str =
    "[H^1 P]^[0,8] . [H^1 D1]^[0,6] . ([H^1 D2]^[0,6] | [H^1 D3]^[0,6]) . [H^1 Base]^[0,12]";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Alphabet;

    fn ap() -> Alphabet {
        Alphabet::new(["B", "C"]).unwrap()
    }

    #[test]
    fn time_bounds() {
        let ap = ap();
        let b = ap.lookup("B").unwrap();
        assert_eq!(Formula::hold(1, b.clone()).time_bound(), 1);
        assert_eq!(Formula::hold(1, b.clone()).within(0, 2).time_bound(), 2);
        assert_eq!(Formula::hold_top(0).time_bound(), 0);
        let c = ap.lookup("C").unwrap();
        let cat = Formula::hold(2, b.clone()).concat(Formula::hold_neg(3, c));
        assert_eq!(cat.time_bound(), 6);
        assert_eq!(cat.clone().not().time_bound(), 6);
        assert_eq!(cat.and(Formula::hold(9, b)).time_bound(), 9);
    }

    #[test]
    fn delivery_task_bound_is_35() {
        let ap = Alphabet::new(["P", "D1", "D2", "D3", "Base"]).unwrap();
        let f = parse_formula(DELIVERY_TASK, &ap).unwrap();
        assert_eq!(f.time_bound(), 35);
    }

    #[test]
    fn printing_parenthesizes_by_precedence() {
        let ap = ap();
        let b = Formula::hold(0, ap.lookup("B").unwrap());
        let c = Formula::hold(0, ap.lookup("C").unwrap());
        let f = b.clone().or(c.clone()).and(b.clone());
        assert_eq!(f.to_string(), "(H^0 B | H^0 C) & H^0 B");
        let g = b.clone().concat(c.clone().concat(b.clone()));
        assert_eq!(g.to_string(), "H^0 B . (H^0 C . H^0 B)");
        let h = b.clone().and(c).not();
        assert_eq!(h.to_string(), "!(H^0 B & H^0 C)");
    }

    #[test]
    fn propositions_sorted() {
        let ap = ap();
        let f = parse_formula("H^1 C . [H^0 B | H^2 !C]^[0,4]", &ap).unwrap();
        let names: Vec<_> = f
            .propositions()
            .iter()
            .map(|p| p.name().to_owned())
            .collect();
        assert_eq!(names, vec!["B", "C"]);
    }
}
