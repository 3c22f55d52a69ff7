use num_rational::BigRational;
use num_traits::One;

use super::Fresh;
use crate::error::Result;
use crate::logic::formula::{self, atom, forall, iff, Formula, Var};
use crate::logic::{Vocabulary, WeightMap};
use crate::parser::{MlnSource, Problem};

fn close(f: Formula) -> Formula {
    let free = f.free_vars();
    free.into_iter().rev().fold(f, |acc, v| forall(v, acc))
}

/// Hard rules become universal closures. A soft rule `w α(x̄)` becomes
/// `∀x̄ ξ(x̄) ↔ α(x̄)` with `w(ξ) = w`, `w̄(ξ) = 1`. Rules of weight exactly
/// 1 contribute a factor of 1 to every world and are dropped.
pub fn mln_to_wfoms(mln: &MlnSource) -> Result<Problem> {
    let mut vocab = Vocabulary::new();
    for (_, f) in &mln.rules {
        vocab.merge(&Vocabulary::of_formula(f)?)?;
    }
    let mut fresh = Fresh::avoiding(&vocab);
    let mut weights = WeightMap::new();
    let mut parts = Vec::new();
    for (w, alpha) in &mln.rules {
        match w {
            None => parts.push(close(alpha.clone())),
            Some(w) if w.is_one() => {}
            Some(w) => {
                let name = fresh.name("xi");
                let vars: Vec<Var> = alpha.free_vars().into_iter().collect();
                let xi = atom(&name, &vars);
                parts.push(close(iff(xi, alpha.clone())));
                weights.set(&name, w.clone(), BigRational::one())?;
            }
        }
    }
    // Predicates that only occur in dropped rules stay in the vocabulary.
    let mentioned = Vocabulary::of_formula(&formula::conjunction(parts.clone()))?;
    for p in vocab.iter() {
        if !mentioned.contains(&p.name) {
            let vars: Vec<Var> = [Var::X, Var::Y][..p.arity].to_vec();
            let a = atom(&p.name, &vars);
            parts.push(close(formula::or(a.clone(), formula::not(a))));
        }
    }
    Problem::new(formula::conjunction(parts), weights, mln.domain.clone(), Formula::Top)
}
