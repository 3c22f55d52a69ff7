use num_bigint::BigUint;
use num_traits::One;

use super::{Fresh, ReductionStep};
use crate::error::{Error, Result};
use crate::logic::formula::{self, atom, card, exists, forall, iff, implies, not, Atom, Comparator, Formula, Quantifier, Var};

/// Output of [`reduce_counting`] for one conjunct.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingReduction {
    /// Plain FO² conjuncts replacing the counting conjunct.
    pub sentences: Vec<Formula>,
    /// Cardinality atoms to conjoin to `Υ`.
    pub constraints: Vec<Formula>,
    pub steps: Vec<ReductionStep>,
}

fn swap_vars(f: &Formula) -> Formula {
    f.rename(&|v| v.other())
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// Eliminates one top-level counting conjunct over a domain of size `n`.
///
/// `∀x∃₌ₖy φ(x,y)` becomes `|P| = k·n`, `P ↔ R₁ ∨ … ∨ Rₖ`, `∀x∃y Rᵢ(x,y)`
/// and pairwise disjointness, where `P` is `φ` itself when it is an atom
/// `P(x,y)` and a fresh binary predicate otherwise. Each source model has
/// `(k!)^n` preimages. `∃₌ₖx ψ(x)` becomes `|U| = k` with `∀x U(x) ↔ ψ(x)`.
pub fn reduce_counting(conjunct: &Formula, n: usize, fresh: &mut Fresh) -> Result<CountingReduction> {
    let unsupported = || {
        Error::Unsupported(format!(
            "counting quantifiers must appear as top-level `forall x exists_{{=k}} y` or \
             `exists_{{=k}} x` conjuncts: {conjunct}"
        ))
    };
    match conjunct {
        Formula::Quant {
            q: Quantifier::Forall,
            var,
            body,
        } => {
            let Formula::Quant {
                q: Quantifier::ExistsExactly(k),
                var: w,
                body: inner,
            } = body.as_ref()
            else {
                return Err(unsupported());
            };
            if w == var || inner.has_quantifier() || inner.has_cardinality() {
                return Err(unsupported());
            }
            let phi = if *var == Var::X { (**inner).clone() } else { swap_vars(inner) };
            Ok(forall_exists_exactly(&phi, *k, n, fresh))
        }
        Formula::Quant {
            q: Quantifier::ExistsExactly(k),
            var,
            body,
        } => {
            if body.has_counting_quantifier() || body.has_cardinality() {
                return Err(unsupported());
            }
            let psi = if *var == Var::X { (**body).clone() } else { swap_vars(body) };
            let name = fresh.name("U");
            let u = atom(&name, &[Var::X]);
            Ok(CountingReduction {
                sentences: vec![forall(Var::X, iff(u, psi.clone()))],
                constraints: vec![card(&name, Comparator::Eq, *k as u64)],
                steps: vec![ReductionStep {
                    predicate: name,
                    arity: 1,
                    definition: psi,
                    multiplicity: BigUint::one(),
                }],
            })
        }
        _ => Err(unsupported()),
    }
}

fn forall_exists_exactly(phi: &Formula, k: u32, n: usize, fresh: &mut Fresh) -> CountingReduction {
    let mut sentences = Vec::new();
    let mut steps = Vec::new();
    let direct = match phi {
        Formula::Atom(Atom { pred, args })
            if args.len() == 2 && args[0].var() == Some(Var::X) && args[1].var() == Some(Var::Y) =>
        {
            Some(pred.clone())
        }
        _ => None,
    };
    let p = match direct {
        Some(p) => p,
        None => {
            let name = fresh.name("R");
            sentences.push(forall(
                Var::X,
                forall(Var::Y, iff(atom(&name, &[Var::X, Var::Y]), phi.clone())),
            ));
            steps.push(ReductionStep {
                predicate: name.clone(),
                arity: 2,
                definition: phi.clone(),
                multiplicity: BigUint::one(),
            });
            name
        }
    };
    let pxy = atom(&p, &[Var::X, Var::Y]);
    let constraints = vec![card(&p, Comparator::Eq, k as u64 * n as u64)];
    if k == 0 {
        sentences.push(forall(Var::X, forall(Var::Y, not(pxy))));
        return CountingReduction {
            sentences,
            constraints,
            steps,
        };
    }
    let j = fresh.tag();
    let witnesses: Vec<String> = (1..=k as usize).map(|i| fresh.indexed("Rp", i, j)).collect();
    let rs: Vec<Formula> = witnesses.iter().map(|r| atom(r, &[Var::X, Var::Y])).collect();
    sentences.push(forall(
        Var::X,
        forall(Var::Y, iff(pxy, formula::disjunction(rs.clone()))),
    ));
    for r in &rs {
        sentences.push(forall(Var::X, exists(Var::Y, r.clone())));
    }
    for a in 0..rs.len() {
        for b in a + 1..rs.len() {
            sentences.push(forall(
                Var::X,
                forall(Var::Y, implies(rs[a].clone(), not(rs[b].clone()))),
            ));
        }
    }
    let fiber = num_traits::pow(factorial(k as u64), n);
    for (i, r) in witnesses.into_iter().enumerate() {
        steps.push(ReductionStep {
            predicate: r,
            arity: 2,
            definition: atom(&p, &[Var::X, Var::Y]),
            // The whole (k!)^n fiber is booked on the first witness.
            multiplicity: if i == 0 { fiber.clone() } else { BigUint::one() },
        });
    }
    CountingReduction {
        sentences,
        constraints,
        steps,
    }
}
