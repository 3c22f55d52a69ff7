use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::{Formula, Quantifier, Term, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    labels: Vec<String>,
}

impl Domain {
    /// Elements labelled `1..=n`.
    pub fn of_size(n: usize) -> Self {
        Domain {
            labels: (1..=n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::invalid("domain labels must be distinct"));
        }
        Ok(Domain { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<usize>,
}

impl GroundAtom {
    pub fn new(pred: impl Into<String>, args: Vec<usize>) -> Self {
        GroundAtom {
            pred: pred.into(),
            args,
        }
    }

    pub fn render(&self, domain: &Domain) -> String {
        let args: Vec<&str> = self.args.iter().map(|&i| domain.label(i)).collect();
        format!("{}({})", self.pred, args.join(","))
    }
}

/// A finite structure: the set of true ground atoms. Everything else is false.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Structure {
    atoms: BTreeSet<GroundAtom>,
}

impl Structure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = GroundAtom>) -> Self {
        Structure {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, atom: GroundAtom) {
        self.atoms.insert(atom);
    }

    pub fn holds(&self, pred: &str, args: &[usize]) -> bool {
        // BTreeSet lookup needs an owned key; structures are small enough
        // that this allocation does not matter outside the oracle, which has
        // its own bitmask evaluator.
        self.atoms.contains(&GroundAtom::new(pred, args.to_vec()))
    }

    pub fn atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn count(&self, pred: &str) -> usize {
        self.atoms.iter().filter(|a| a.pred == pred).count()
    }

    /// Keeps only atoms whose predicate satisfies `keep`.
    pub fn project(&self, keep: impl Fn(&str) -> bool) -> Structure {
        Structure {
            atoms: self.atoms.iter().filter(|a| keep(&a.pred)).cloned().collect(),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let args: Vec<String> = a.args.iter().map(|i| (i + 1).to_string()).collect();
                format!("{}({})", a.pred, args.join(","))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Model checking under the usual semantics. Cardinality atoms count true
/// ground atoms; counting quantifiers count witnesses exactly.
pub fn evaluate(sentence: &Formula, structure: &Structure, domain: &Domain) -> Result<bool> {
    eval(sentence, structure, domain, [None, None])
}

fn slot(v: Var) -> usize {
    match v {
        Var::X => 0,
        Var::Y => 1,
    }
}

fn eval(f: &Formula, s: &Structure, d: &Domain, env: [Option<usize>; 2]) -> Result<bool> {
    Ok(match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Atom(a) => {
            let mut args = Vec::with_capacity(a.args.len());
            for t in &a.args {
                args.push(match t {
                    Term::Var(v) => env[slot(*v)]
                        .ok_or_else(|| Error::UnboundVariable(v.name().to_string()))?,
                    Term::Const(c) => d
                        .index_of(c)
                        .ok_or_else(|| Error::invalid(format!("unknown constant `{c}`")))?,
                });
            }
            s.holds(&a.pred, &args)
        }
        Formula::Not(a) => !eval(a, s, d, env)?,
        Formula::And(a, b) => eval(a, s, d, env)? && eval(b, s, d, env)?,
        Formula::Or(a, b) => eval(a, s, d, env)? || eval(b, s, d, env)?,
        Formula::Implies(a, b) => !eval(a, s, d, env)? || eval(b, s, d, env)?,
        Formula::Iff(a, b) => eval(a, s, d, env)? == eval(b, s, d, env)?,
        Formula::Quant { q, var, body } => {
            let mut witnesses = 0u32;
            for e in 0..d.len() {
                let mut inner = env;
                inner[slot(*var)] = Some(e);
                let sat = eval(body, s, d, inner)?;
                match q {
                    Quantifier::Forall if !sat => return Ok(false),
                    Quantifier::Exists if sat => return Ok(true),
                    _ => {}
                }
                witnesses += sat as u32;
            }
            match q {
                Quantifier::Forall => true,
                Quantifier::Exists => false,
                Quantifier::ExistsExactly(k) => witnesses == *k,
            }
        }
        Formula::Card {
            pred,
            cmp,
            threshold,
        } => cmp.holds(s.count(pred) as u64, *threshold),
    })
}
