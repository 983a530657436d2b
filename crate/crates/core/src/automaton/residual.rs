//! Residual formulas for progression-based automaton construction.
//!
//! A residual is what remains to be satisfied after reading a prefix. Every
//! constructor canonicalizes, so syntactically equal residuals denote the
//! same automaton state.

use std::fmt;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::label::{Alphabet, LabelSet};
use crate::twtl::{Formula, HoldTarget};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Residual {
    False,
    True,
    /// `remaining + 1` more observations must match. `prop = None` is `TRUE`.
    Hold {
        remaining: u32,
        prop: Option<usize>,
        negated: bool,
    },
    /// Start the (unprogressed) inner formula at some offset in
    /// `[start, end - bound(inner)]` relative to the next observation.
    Within {
        inner: Rc<Residual>,
        start: u32,
        end: u32,
    },
    /// Right-nested concatenation; only the head has been progressed.
    Concat(Vec<Residual>),
    And(Vec<Residual>),
    Or(Vec<Residual>),
}

impl Residual {
    pub(crate) fn from_formula(formula: &Formula) -> Result<Residual> {
        Ok(match formula {
            Formula::Hold { duration, target } => Residual::Hold {
                remaining: *duration,
                prop: match target {
                    HoldTarget::Top => None,
                    HoldTarget::Prop(p) => Some(p.index()),
                },
                negated: false,
            },
            Formula::HoldNeg { duration, prop } => Residual::Hold {
                remaining: *duration,
                prop: Some(prop.index()),
                negated: true,
            },
            Formula::And(l, r) => {
                Residual::and(vec![Residual::from_formula(l)?, Residual::from_formula(r)?])
            }
            Formula::Or(l, r) => {
                Residual::or(vec![Residual::from_formula(l)?, Residual::from_formula(r)?])
            }
            Formula::Concat(l, r) => {
                Residual::concat(vec![Residual::from_formula(l)?, Residual::from_formula(r)?])
            }
            Formula::Within { inner, start, end } => {
                Residual::within(Rc::new(Residual::from_formula(inner)?), *start, *end)
            }
            Formula::Not(inner) => {
                return Err(Error::Unsupported(format!(
                    "negation of compound formula `!{inner}`; only hold negation `H^d !x` compiles"
                )))
            }
        })
    }

    /// Time bound of an unprogressed residual.
    pub(crate) fn bound(&self) -> u32 {
        match self {
            Residual::False | Residual::True => 0,
            Residual::Hold { remaining, .. } => *remaining,
            Residual::Within { end, .. } => *end,
            Residual::Concat(parts) => {
                parts.iter().map(Residual::bound).sum::<u32>() + parts.len() as u32 - 1
            }
            Residual::And(parts) | Residual::Or(parts) => {
                parts.iter().map(Residual::bound).max().unwrap_or(0)
            }
        }
    }

    fn within(inner: Rc<Residual>, start: u32, end: u32) -> Residual {
        match *inner {
            Residual::True => return Residual::True,
            Residual::False => return Residual::False,
            _ => {}
        }
        if start + inner.bound() > end {
            Residual::False
        } else {
            Residual::Within { inner, start, end }
        }
    }

    fn concat(parts: Vec<Residual>) -> Residual {
        let mut flat = Vec::with_capacity(parts.len());
        for part in parts {
            match part {
                Residual::Concat(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.contains(&Residual::False) {
            return Residual::False;
        }
        match flat.len() {
            0 => Residual::True,
            1 => flat.pop().unwrap(),
            _ => Residual::Concat(flat),
        }
    }

    fn and(parts: Vec<Residual>) -> Residual {
        let mut flat = Vec::with_capacity(parts.len());
        for part in parts {
            match part {
                Residual::False => return Residual::False,
                Residual::True => {}
                Residual::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Residual::True,
            1 => flat.pop().unwrap(),
            _ => Residual::And(flat),
        }
    }

    fn or(parts: Vec<Residual>) -> Residual {
        let mut flat = Vec::with_capacity(parts.len());
        for part in parts {
            match part {
                Residual::True => return Residual::True,
                Residual::False => {}
                Residual::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Residual::False,
            1 => flat.pop().unwrap(),
            _ => Residual::Or(flat),
        }
    }

    /// Residual after reading one observation.
    pub(crate) fn progress(&self, symbol: LabelSet) -> Residual {
        match self {
            Residual::True => Residual::True,
            Residual::False => Residual::False,
            Residual::Hold {
                remaining,
                prop,
                negated,
            } => {
                let present = prop.is_none_or(|i| symbol.contains(i));
                if present == *negated {
                    Residual::False
                } else if *remaining == 0 {
                    Residual::True
                } else {
                    Residual::Hold {
                        remaining: remaining - 1,
                        prop: *prop,
                        negated: *negated,
                    }
                }
            }
            Residual::Within { inner, start, end } => {
                if *start > 0 {
                    return Residual::within(inner.clone(), start - 1, end - 1);
                }
                let started = inner.progress(symbol);
                let later = if *end > 0 {
                    Residual::within(inner.clone(), 0, end - 1)
                } else {
                    Residual::False
                };
                Residual::or(vec![started, later])
            }
            Residual::Concat(parts) => match parts[0].progress(symbol) {
                Residual::True => Residual::concat(parts[1..].to_vec()),
                Residual::False => Residual::False,
                head => {
                    let mut next = Vec::with_capacity(parts.len());
                    next.push(head);
                    next.extend_from_slice(&parts[1..]);
                    Residual::concat(next)
                }
            },
            Residual::And(parts) => {
                Residual::and(parts.iter().map(|p| p.progress(symbol)).collect())
            }
            Residual::Or(parts) => Residual::or(parts.iter().map(|p| p.progress(symbol)).collect()),
        }
    }

    pub(crate) fn display<'a>(&'a self, alphabet: &'a Alphabet) -> ResidualDisplay<'a> {
        ResidualDisplay {
            residual: self,
            alphabet,
        }
    }
}

pub(crate) struct ResidualDisplay<'a> {
    residual: &'a Residual,
    alphabet: &'a Alphabet,
}

impl fmt::Display for ResidualDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphabet = self.alphabet;
        let sub = |residual| ResidualDisplay { residual, alphabet };
        match self.residual {
            Residual::True => f.write_str("TRUE"),
            Residual::False => f.write_str("FALSE"),
            Residual::Hold {
                remaining,
                prop,
                negated,
            } => {
                let name = match prop {
                    None => "TRUE",
                    Some(i) => self.alphabet.names().get(*i).map_or("?", String::as_str),
                };
                write!(f, "H^{remaining} {}{name}", if *negated { "!" } else { "" })
            }
            Residual::Within { inner, start, end } => {
                write!(f, "[{}]^[{start},{end}]", sub(&**inner))
            }
            Residual::Concat(parts) | Residual::And(parts) | Residual::Or(parts) => {
                let op = match self.residual {
                    Residual::Concat(_) => " . ",
                    Residual::And(_) => " & ",
                    _ => " | ",
                };
                f.write_str("(")?;
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    write!(f, "{}", sub(part))?;
                }
                f.write_str(")")
            }
        }
    }
}
