use super::{Formula, HoldTarget};
use crate::error::{Error, Result};
use crate::label::Alphabet;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u32),
    Caret,
    Bang,
    Amp,
    Pipe,
    Dot,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Caret => "`^`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let ident: String = chars[begin..i].iter().collect();
            column += i - begin;
            out.push(Spanned {
                tok: Tok::Ident(ident),
                line: start_line,
                column: start_col,
            });
            continue;
        } else if c.is_ascii_digit() {
            let begin = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[begin..i].iter().collect();
            column += i - begin;
            let value = digits.parse::<u32>().map_err(|_| Error::Syntax {
                line: start_line,
                column: start_col,
                message: format!("integer `{digits}` out of range"),
            })?;
            out.push(Spanned {
                tok: Tok::Int(value),
                line: start_line,
                column: start_col,
            });
            continue;
        } else {
            match c {
                '^' => Tok::Caret,
                '!' | '¬' => Tok::Bang,
                '&' | '∧' => Tok::Amp,
                '|' | '∨' => Tok::Pipe,
                '.' | '·' => Tok::Dot,
                ',' => Tok::Comma,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                other => {
                    return Err(Error::Syntax {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
        i += 1;
        column += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: String) -> Error {
        let at = &self.toks[self.pos];
        Error::Syntax {
            line: at.line,
            column: at.column,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn int(&mut self) -> Result<u32> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            other => Err(self.error(format!("expected integer, found {}", other.describe()))),
        }
    }

    fn concat(&mut self) -> Result<Formula> {
        let mut left = self.or()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            left = left.concat(self.or()?);
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut left = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            left = left.or(self.and()?);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            left = left.and(self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(self.unary()?.not());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Ident(name) if name == "H" && *self.peek_at(1) == Tok::Caret => {
                self.bump();
                self.bump();
                let duration = self.int()?;
                self.hold_target(duration)
            }
            Tok::LBracket => {
                self.bump();
                let inner = self.concat()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Caret)?;
                self.expect(Tok::LBracket)?;
                let start = self.int()?;
                self.expect(Tok::Comma)?;
                let end_pos = self.pos;
                let end = self.int()?;
                if start > end {
                    self.pos = end_pos;
                    return Err(
                        self.error(format!("within window [{start},{end}] has start > end"))
                    );
                }
                self.expect(Tok::RBracket)?;
                Ok(inner.within(start, end))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.concat()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(self.error(format!("expected a formula, found {}", other.describe()))),
        }
    }

    fn hold_target(&mut self, duration: u32) -> Result<Formula> {
        let negated = if *self.peek() == Tok::Bang {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Ident(name) if name == "TRUE" => {
                if negated {
                    return Err(self.error("`TRUE` cannot be negated inside a hold".into()));
                }
                self.bump();
                Ok(Formula::hold_top(duration))
            }
            Tok::Ident(name) => {
                let prop = self
                    .alphabet
                    .lookup(&name)
                    .ok_or_else(|| Error::UnknownProposition(name.clone()))?;
                self.bump();
                Ok(if negated {
                    Formula::hold_neg(duration, prop)
                } else {
                    Formula::Hold {
                        duration,
                        target: HoldTarget::Prop(prop),
                    }
                })
            }
            other => Err(self.error(format!(
                "expected a proposition after hold, found {}",
                other.describe()
            ))),
        }
    }
}

/// Parses a formula in the ASCII concrete syntax. Propositions are resolved
/// against `alphabet`.
pub fn parse_formula(text: &str, alphabet: &Alphabet) -> Result<Formula> {
    let mut parser = Parser {
        toks: tokenize(text)?,
        pos: 0,
        alphabet,
    };
    let formula = parser.concat()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error(format!("unexpected {}", parser.peek().describe())));
    }
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ap() -> Alphabet {
        Alphabet::new(["B", "C"]).unwrap()
    }

    fn b() -> crate::label::AtomicProposition {
        ap().lookup("B").unwrap()
    }

    #[test]
    fn within_hold() {
        let f = parse_formula("[H^1 B]^[0,2]", &ap()).unwrap();
        assert_eq!(f, Formula::hold(1, b()).within(0, 2));
    }

    #[test]
    fn hold_true() {
        assert_eq!(
            parse_formula("H^0 TRUE", &ap()).unwrap(),
            Formula::hold_top(0)
        );
    }

    #[test]
    fn delivery_prefix() {
        let ap = Alphabet::new(["P", "D1"]).unwrap();
        let f = parse_formula("[H^1 P]^[0,8] . [H^1 D1]^[0,6]", &ap).unwrap();
        let p = ap.lookup("P").unwrap();
        let d1 = ap.lookup("D1").unwrap();
        assert_eq!(
            f,
            Formula::hold(1, p)
                .within(0, 8)
                .concat(Formula::hold(1, d1).within(0, 6))
        );
    }

    #[test]
    fn precedence() {
        let ap = ap();
        let c = ap.lookup("C").unwrap();
        let f = parse_formula("H^0 B . H^0 C | H^1 B & !H^0 C", &ap).unwrap();
        let expected = Formula::hold(0, b()).concat(
            Formula::hold(0, c.clone()).or(Formula::hold(1, b()).and(Formula::hold(0, c).not())),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn hold_negation_vs_prefix_negation() {
        let ap = ap();
        assert_eq!(
            parse_formula("H^2 !B", &ap).unwrap(),
            Formula::hold_neg(2, b())
        );
        assert_eq!(
            parse_formula("!H^2 B", &ap).unwrap(),
            Formula::hold(2, b()).not()
        );
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_formula("[H^1B]^[0,2]", &ap());
        // `H^1B` is H^1 followed by identifier `B`.
        assert_eq!(a.unwrap(), Formula::hold(1, b()).within(0, 2));
        let f = parse_formula("  [ H ^ 1   B ] ^ [ 0 , 2 ]\n", &ap()).unwrap();
        assert_eq!(f, Formula::hold(1, b()).within(0, 2));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_formula("[H^1 B]^[0,2", &ap()) {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 13)),
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("H^1 B &\n  &", &ap()) {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_formula("[H^1 B]^[3,2]", &ap()),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_formula("H^1 !TRUE", &ap()),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_formula("", &ap()),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_formula("H^1 B )", &ap()),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_formula("H^1 B # C", &ap()),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn unknown_proposition_is_named() {
        match parse_formula("[H^1 Z]^[0,2]", &ap()) {
            Err(Error::UnknownProposition(name)) => assert_eq!(name, "Z"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let ap = ap();
        let props = [ap.lookup("B").unwrap(), ap.lookup("C").unwrap()];
        let leaf = (0u32..4, 0usize..4).prop_map(move |(d, k)| match k {
            0 => Formula::hold_top(d),
            1 => Formula::hold(d, props[0].clone()),
            2 => Formula::hold_neg(d, props[1].clone()),
            _ => Formula::hold(d, props[1].clone()),
        });
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| l.and(r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| l.or(r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| l.concat(r)),
                inner.clone().prop_map(Formula::not),
                (inner, 0u32..4, 0u32..6).prop_map(|(f, a, w)| f.within(a, a + w)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            let text = f.to_string();
            let back = parse_formula(&text, &ap()).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn within_widening_is_monotone(f in arb_formula(), a in 0u32..4, b in 0u32..8, extra in 0u32..8) {
            let end = a + b;
            let narrow = f.clone().within(a, end).time_bound();
            let wide = f.within(a, end + extra).time_bound();
            prop_assert!(wide >= narrow);
        }
    }
}
