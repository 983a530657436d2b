//! Atomic propositions, label sets and finite words.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_PROPOSITIONS: usize = 64;

/// A named proposition bound to its position in an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicProposition {
    index: usize,
    name: String,
}

impl AtomicProposition {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for AtomicProposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An ordered set of atomic propositions. Symbols over the alphabet are
/// [`LabelSet`] bitmasks indexed by proposition position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    names: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Alphabet::default();
        for name in names {
            let name = name.into();
            if !is_identifier(&name) || name == "TRUE" {
                return Err(Error::InvalidProposition(name));
            }
            if alphabet.index.contains_key(&name) {
                return Err(Error::InvalidProposition(format!("{name} (duplicate)")));
            }
            alphabet.index.insert(name.clone(), alphabet.names.len());
            alphabet.names.push(name);
        }
        if alphabet.names.len() > MAX_PROPOSITIONS {
            return Err(Error::AlphabetTooLarge(alphabet.names.len()));
        }
        Ok(alphabet)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<AtomicProposition> {
        self.index.get(name).map(|&index| AtomicProposition {
            index,
            name: name.to_owned(),
        })
    }

    pub fn proposition(&self, index: usize) -> AtomicProposition {
        AtomicProposition {
            index,
            name: self.names[index].clone(),
        }
    }

    /// Number of symbols, `2^|AP|`.
    pub fn symbol_count(&self) -> u128 {
        1u128 << self.names.len()
    }

    /// Bitmask of every proposition in the alphabet.
    pub fn full_mask(&self) -> u64 {
        if self.names.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.names.len()) - 1
        }
    }

    pub fn contains(&self, set: LabelSet) -> bool {
        set.0 & !self.full_mask() == 0
    }

    pub fn label<S: AsRef<str>>(&self, names: &[S]) -> Result<LabelSet> {
        let mut set = LabelSet::EMPTY;
        for name in names {
            let prop = self
                .lookup(name.as_ref())
                .ok_or_else(|| Error::UnknownProposition(name.as_ref().to_owned()))?;
            set = set.with(prop.index);
        }
        Ok(set)
    }

    /// Proposition names in a label set, in alphabet order.
    pub fn names_of(&self, set: LabelSet) -> Vec<&str> {
        set.iter()
            .filter_map(|i| self.names.get(i).map(String::as_str))
            .collect()
    }

    pub fn format(&self, set: LabelSet) -> String {
        format!("{{{}}}", self.names_of(set).join(","))
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Alphabet::new(names)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(alphabet: Alphabet) -> Self {
        alphabet.names
    }
}

/// A subset of the alphabet, stored as a bitmask over proposition indices.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LabelSet(pub u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 >> index & 1 == 1
    }

    #[must_use]
    pub fn with(self, index: usize) -> LabelSet {
        LabelSet(self.0 | 1 << index)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

/// A finite word `o(0) o(1) ... o(n-1)` of label sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<LabelSet>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[LabelSet] {
        &self.0
    }

    /// Builds a word from per-step proposition lists.
    pub fn from_names<S: AsRef<str>>(alphabet: &Alphabet, steps: &[&[S]]) -> Result<Word> {
        steps
            .iter()
            .map(|names| alphabet.label(names))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl From<Vec<LabelSet>> for Word {
    fn from(symbols: Vec<LabelSet>) -> Self {
        Word(symbols)
    }
}
