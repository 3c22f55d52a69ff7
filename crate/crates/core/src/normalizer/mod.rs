//! Sound reductions from user sentences to a universal matrix plus atomic
//! existential obligations: Scott normal form, atomization of existential
//! bodies, Tseitin obligations, counting-quantifier elimination and the MLN
//! reduction.

mod counting;
mod mln;
mod snf;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::logic::formula::{self, Formula};
use crate::logic::{Domain, Vocabulary, WeightMap, RESERVED_PREFIX};
use crate::parser::Problem;

pub use counting::reduce_counting;
pub use mln::mln_to_wfoms;
pub use snf::{atomize_existentials, to_snf, SnfSentence};

/// One introduced predicate with its defining formula and the number of
/// reduced models mapping onto each source model because of it.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionStep {
    pub predicate: String,
    pub arity: usize,
    pub definition: Formula,
    pub multiplicity: BigUint,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    /// The source vocabulary; projecting onto it inverts the reduction.
    pub skeleton: Vocabulary,
}

impl ReductionTrace {
    /// Fiber size: how many reduced models map to each source model.
    pub fn multiplicity(&self) -> BigUint {
        self.steps.iter().fold(BigUint::one(), |acc, s| acc * &s.multiplicity)
    }

    pub fn introduced(&self) -> impl Iterator<Item = &ReductionStep> {
        self.steps.iter()
    }
}

/// Generator of collision-free auxiliary names with the reserved prefix.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    pub fn avoiding(vocab: &Vocabulary) -> Self {
        Fresh {
            taken: vocab.iter().map(|p| p.name).collect(),
            next: 1,
        }
    }

    /// `__<kind><j>` for the next free `j`.
    pub fn name(&mut self, kind: &str) -> String {
        loop {
            let candidate = format!("{RESERVED_PREFIX}{kind}{}", self.next);
            self.next += 1;
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    /// A fresh number for grouping related names.
    pub fn tag(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }

    /// `__Rp<i>_<j>` for the `i`-th disjoint witness of counting conjunct `j`.
    pub fn indexed(&mut self, kind: &str, i: usize, j: usize) -> String {
        let mut candidate = format!("{RESERVED_PREFIX}{kind}{i}_{j}");
        while !self.taken.insert(candidate.clone()) {
            candidate.push('_');
        }
        candidate
    }
}

/// A problem reduced to `∀x∀y ψ(x,y) ∧ ⋀_k ∀x∃y R_k(x,y)` plus cardinality
/// constraints `Υ`.
#[derive(Clone, Debug)]
pub struct Normalized {
    /// Quantifier-free over `x`, `y`; may mention nullary predicates.
    pub matrix: Formula,
    /// The binary predicate `R_k` of every existential obligation.
    pub witnesses: Vec<String>,
    pub vocabulary: Vocabulary,
    pub weights: WeightMap,
    /// Cardinality-only Boolean combination.
    pub constraint: Formula,
    pub domain: Domain,
    pub trace: ReductionTrace,
}

/// Runs every reduction on a problem with a nonempty domain.
pub fn normalize(problem: &Problem) -> Result<Normalized> {
    let n = problem.domain.len();
    if n == 0 {
        return Err(Error::internal("normalization needs a nonempty domain"));
    }
    let source_vocab = problem.vocabulary();
    let mut fresh = Fresh::avoiding(&source_vocab);
    let mut trace = ReductionTrace {
        steps: Vec::new(),
        skeleton: source_vocab.clone(),
    };

    let mut constraints = vec![problem.constraint.clone()];
    let mut fo2 = Vec::new();
    for c in problem.sentence.conjuncts() {
        if c.is_cardinality_only() {
            constraints.push(c.clone());
        } else if c.has_cardinality() {
            return Err(Error::Unsupported(
                "cardinality atoms must form top-level conjuncts of their own".into(),
            ));
        } else if c.has_counting_quantifier() {
            let r = reduce_counting(c, n, &mut fresh)?;
            fo2.extend(r.sentences);
            constraints.extend(r.constraints);
            trace.steps.extend(r.steps);
        } else {
            fo2.push(c.clone());
        }
    }

    let (snf, snf_steps) = to_snf(&fo2, &mut fresh)?;
    trace.steps.extend(snf_steps);
    let (snf, atom_steps) = atomize_existentials(snf, &mut fresh);
    trace.steps.extend(atom_steps);

    let mut vocabulary = source_vocab;
    for s in &trace.steps {
        vocabulary.insert(&s.predicate, s.arity)?;
    }
    let mut weights = problem.weights.clone();
    weights.complete(&vocabulary);

    let witnesses = snf
        .existentials
        .iter()
        .map(|b| match b {
            Formula::Atom(a) => Ok(a.pred.clone()),
            _ => Err(Error::internal("existential body not atomized")),
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Normalized {
        matrix: snf.matrix,
        witnesses,
        vocabulary,
        weights,
        constraint: formula::conjunction(
            constraints.into_iter().filter(|c| *c != Formula::Top),
        )
        .simplify(),
        domain: problem.domain.clone(),
        trace,
    })
}

impl Normalized {
    /// The reduced problem as a plain sentence, for oracle checks:
    /// `∀x∀y ψ ∧ ⋀_k ∀x∃y R_k(x,y)` with `Υ` kept as constraint.
    pub fn as_problem(&self) -> Result<Problem> {
        use crate::logic::formula::{atom, exists, forall};
        use crate::logic::Var::{X, Y};
        let mut parts = vec![forall(X, forall(Y, self.matrix.clone()))];
        for w in &self.witnesses {
            parts.push(forall(X, exists(Y, atom(w, &[X, Y]))));
        }
        // Keep predicates that the simplifier may have erased from the
        // matrix in the vocabulary with a tautology.
        for p in self.vocabulary.iter() {
            let vars = [crate::logic::Var::X, crate::logic::Var::X];
            let a = atom(&p.name, &vars[..p.arity]);
            let taut = formula::or(a.clone(), formula::not(a));
            parts.push(if p.arity == 0 { taut } else { forall(X, taut) });
        }
        let mut weights = WeightMap::new();
        for (name, (w, wb)) in self.weights.iter() {
            weights.set(name, w.clone(), wb.clone())?;
        }
        Problem::new(
            formula::conjunction(parts),
            weights,
            self.domain.clone(),
            self.constraint.clone(),
        )
    }
}
