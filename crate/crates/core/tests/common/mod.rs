#![allow(dead_code)]

use twshield::Alphabet;

/// Formulas over `{B, C}` with time bound at most 5. Together they use
/// every grammar construct the automaton compiler accepts.
pub const CORPUS: &[&str] = &[
    "[H^1 B]^[0,2]",
    "H^0 TRUE",
    "H^2 TRUE",
    "H^0 B",
    "H^3 C",
    "H^2 !B",
    "H^1 B & H^2 C",
    "H^1 B | H^0 C",
    "H^1 B . H^1 C",
    "[H^0 C]^[1,4]",
    "[H^1 B . H^0 C]^[0,4]",
    "[H^0 B]^[0,2] . [H^0 C]^[0,2]",
    "([H^0 B]^[0,3] & [H^0 C]^[0,3]) | H^2 !C",
    "[[H^0 B]^[0,1]]^[1,4]",
    "[H^1 !C]^[0,3] . H^0 B",
    "H^0 B | H^0 C . H^1 TRUE & H^1 !B",
];

/// Formulas with compound negation: parsed and evaluated by the
/// semantics, rejected by the compiler.
pub const NEGATED: &[&str] = &[
    "![H^1 B]^[0,2]",
    "!(H^1 B | H^0 C)",
    "[!(H^0 B & H^0 C)]^[0,3]",
    "!(H^0 B . H^1 C)",
];

pub fn alphabet() -> Alphabet {
    Alphabet::new(["B", "C"]).unwrap()
}
