//! Interned label sets.
//!
//! Every finite set in the crate (machine states, alphabets, cellular automaton
//! states, Turing machine symbols) is an ordered list of opaque string labels
//! interned to dense indices. Hot loops only ever see the indices.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label set is empty")]
    Empty,
    #[error("duplicate label `{0}`")]
    Duplicate(String),
    #[error("invalid label `{0}`: {1}")]
    Invalid(String, &'static str),
}

/// An ordered finite set of pairwise distinct labels.
#[derive(Clone, PartialEq, Eq)]
pub struct LabelSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

/// Alphabets are plain label sets.
pub type Alphabet = LabelSet;

impl LabelSet {
    /// Builds a nonempty label set; labels must be distinct, nonempty and free
    /// of whitespace.
    pub fn new<I, S>(names: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(LabelError::Empty);
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(LabelError::Invalid(name.clone(), "empty label"));
            }
            if name.chars().any(char::is_whitespace) {
                return Err(LabelError::Invalid(name.clone(), "contains whitespace"));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(LabelError::Duplicate(name.clone()));
            }
        }
        Ok(Self { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.names.iter().enumerate().map(|(i, n)| (i, n.as_str()))
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.names).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_positional() {
        let set = LabelSet::new(["e", "c0", "f"]).unwrap();
        assert_eq!(set.get("c0"), Some(1));
        assert_eq!(set.name(2), "f");
        assert_eq!(set.get("x"), None);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert_eq!(
            LabelSet::new(["a", "a"]).unwrap_err(),
            LabelError::Duplicate("a".into())
        );
        assert_eq!(LabelSet::new(Vec::<String>::new()).unwrap_err(), LabelError::Empty);
        assert!(LabelSet::new(["a b"]).is_err());
    }
}
