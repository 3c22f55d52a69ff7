//! Vocabulary, formulas, structures, weights and the configuration space.

pub mod config;
pub mod formula;
pub mod structure;
pub mod types;
pub mod weights;

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub use config::{binomial, configuration_space, multinomial, ConfigurationSpace};
pub use formula::{Atom, Comparator, Formula, Quantifier, Term, Var};
pub use structure::{evaluate, Domain, GroundAtom, Structure};
pub use types::{OneType, TwoTable, TypeSpace};
pub use weights::{structure_weight, Literal, WeightMap};

/// Prefix reserved for predicates introduced by the normalizer.
pub const RESERVED_PREFIX: &str = "__";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
}

/// A set of predicates with unique names, kept sorted by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    preds: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, arity: usize) -> Result<()> {
        if arity > 2 {
            return Err(Error::Unsupported(format!(
                "predicate `{name}` has arity {arity}; at most 2 is supported"
            )));
        }
        match self.preds.get(name) {
            Some(&a) if a != arity => Err(Error::ArityMismatch {
                name: name.to_string(),
                expected: a,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.preds.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn of_formula(f: &Formula) -> Result<Self> {
        let mut v = Vocabulary::new();
        for (name, arity) in f.predicates()? {
            v.insert(&name, arity)?;
        }
        Ok(v)
    }

    pub fn merge(&mut self, other: &Vocabulary) -> Result<()> {
        for (name, &arity) in &other.preds {
            self.insert(name, arity)?;
        }
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.preds.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.preds.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = Predicate> + '_ {
        self.preds.iter().map(|(n, &a)| Predicate {
            name: n.clone(),
            arity: a,
        })
    }

    pub fn names_with_arity(&self, arity: usize) -> Vec<String> {
        self.preds
            .iter()
            .filter(|(_, &a)| a == arity)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    /// Number of ground atoms over a domain of size `n`.
    pub fn ground_atom_count(&self, n: usize) -> usize {
        self.preds.values().map(|&a| n.pow(a as u32)).sum()
    }

    /// The predicates not introduced by the normalizer.
    pub fn visible(&self) -> Vocabulary {
        Vocabulary {
            preds: self
                .preds
                .iter()
                .filter(|(n, _)| !n.starts_with(RESERVED_PREFIX))
                .map(|(n, &a)| (n.clone(), a))
                .collect(),
        }
    }
}
