use super::{Formula, HoldTarget};
use crate::label::{LabelSet, Word};

/// Whether `word` satisfies `formula`, reading the word as observations at
/// `t = 0 .. word.len() - 1`. Symbols after the point of satisfaction are
/// ignored.
pub fn satisfies(word: &Word, formula: &Formula) -> bool {
    match word.len() {
        0 => false,
        n => holds(formula, word.symbols(), 0, n - 1),
    }
}

/// Whether the observations `o[start..=end]` satisfy `formula` started at
/// `start`. Satisfaction is monotone in `end` for negation-free formulas.
fn holds(formula: &Formula, o: &[LabelSet], start: usize, end: usize) -> bool {
    match formula {
        Formula::Hold { duration, target } => {
            let d = *duration as usize;
            start + d <= end
                && o[start..=start + d].iter().all(|sym| match target {
                    HoldTarget::Top => true,
                    HoldTarget::Prop(p) => sym.contains(p.index()),
                })
        }
        Formula::HoldNeg { duration, prop } => {
            let d = *duration as usize;
            start + d <= end
                && o[start..=start + d]
                    .iter()
                    .all(|sym| !sym.contains(prop.index()))
        }
        Formula::And(l, r) => holds(l, o, start, end) && holds(r, o, start, end),
        Formula::Or(l, r) => holds(l, o, start, end) || holds(r, o, start, end),
        Formula::Not(f) => !holds(f, o, start, end),
        Formula::Concat(l, r) => {
            // Earliest time the left operand is satisfied; the right operand
            // must then hold from the following observation.
            match (start..end).find(|&t| holds(l, o, start, t)) {
                Some(split) => holds(r, o, split + 1, end),
                None => false,
            }
        }
        Formula::Within {
            inner,
            start: a,
            end: b,
        } => {
            let window_end = start + *b as usize;
            let latest = match window_end.checked_sub(inner.time_bound() as usize) {
                Some(latest) => latest,
                None => return false,
            };
            let first = start + *a as usize;
            let stop = end.min(window_end);
            (first..=latest.min(stop)).any(|s| holds(inner, o, s, stop))
        }
    }
}
