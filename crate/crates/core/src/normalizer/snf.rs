use num_bigint::BigUint;
use num_traits::One;

use super::{Fresh, ReductionStep};
use crate::error::{Error, Result};
use crate::logic::formula::{self, atom, exists, forall, iff, implies, not, or, Atom, Formula, Quantifier, Var};

/// `∀x∀y ψ(x,y) ∧ ⋀_k ∀x∃y φ_k(x,y)` with quantifier-free pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct SnfSentence {
    pub matrix: Formula,
    pub existentials: Vec<Formula>,
}

fn rename_to(body: &Formula, from: Var, to: Var) -> Formula {
    if from == to {
        return body.clone();
    }
    body.rename(&|v| if v == from { to } else { from })
}

enum Piece {
    Universal(Formula),
    Existential(Formula),
}

/// Recognizes conjuncts that are already in normal form.
fn classify(f: &Formula) -> Option<Piece> {
    if !f.has_quantifier() {
        return Some(Piece::Universal(f.clone()));
    }
    let Formula::Quant { q, var, body } = f else {
        return None;
    };
    match q {
        Quantifier::Forall if !body.has_quantifier() => Some(Piece::Universal(rename_to(body, *var, Var::X))),
        Quantifier::Exists if !body.has_quantifier() => {
            Some(Piece::Existential(rename_to(body, *var, Var::Y)))
        }
        Quantifier::Forall => match body.as_ref() {
            Formula::Quant { q: inner, var: w, body: b } if !b.has_quantifier() => {
                if w == var {
                    return classify(body);
                }
                let b = rename_to(b, *var, Var::X);
                match inner {
                    Quantifier::Forall => Some(Piece::Universal(b)),
                    Quantifier::Exists => Some(Piece::Existential(b)),
                    Quantifier::ExistsExactly(_) => None,
                }
            }
            _ => None,
        },
        _ => None,
    }
}

/// Replaces the first innermost quantified subformula with `replacement`
/// computed from it.
fn replace_innermost(
    f: &Formula,
    make: &mut dyn FnMut(Quantifier, Var, &Formula) -> Result<Formula>,
) -> Result<Option<Formula>> {
    use Formula::*;
    Ok(match f {
        Quant { q, var, body } => {
            if !body.has_quantifier() {
                Some(make(*q, *var, body)?)
            } else {
                replace_innermost(body, make)?.map(|b| Quant {
                    q: *q,
                    var: *var,
                    body: Box::new(b),
                })
            }
        }
        Not(a) => replace_innermost(a, make)?.map(not),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
            let rebuild = |l: Formula, r: Formula| match f {
                And(..) => formula::and(l, r),
                Or(..) => or(l, r),
                Implies(..) => implies(l, r),
                _ => iff(l, r),
            };
            if let Some(l) = replace_innermost(a, make)? {
                Some(rebuild(l, (**b).clone()))
            } else {
                replace_innermost(b, make)?.map(|r| rebuild((**a).clone(), r))
            }
        }
        _ => None,
    })
}

/// Scott normal form. Every innermost `Q v: φ` that blocks the normal form
/// is replaced by a fresh `A(u)` (nullary when `φ` has no other free
/// variable) axiomatized by `∀u Q v (A(u) → φ)` and `∀u Q' v (φ → A(u))`.
/// Closed `∃v φ(v)` becomes the obligation `∀x∃y φ(y)`, which needs a
/// nonempty domain.
pub fn to_snf(conjuncts: &[Formula], fresh: &mut Fresh) -> Result<(SnfSentence, Vec<ReductionStep>)> {
    let mut universal = Vec::new();
    let mut existentials = Vec::new();
    let mut steps = Vec::new();
    let mut queue: Vec<Formula> = conjuncts.iter().rev().cloned().collect();
    while let Some(f) = queue.pop() {
        if f.has_counting_quantifier() {
            return Err(Error::Unsupported(
                "counting quantifiers are only supported as top-level conjuncts".into(),
            ));
        }
        if let Some(piece) = classify(&f) {
            match piece {
                Piece::Universal(b) => universal.push(b),
                Piece::Existential(b) => existentials.push(b),
            }
            continue;
        }
        let mut axioms = Vec::new();
        let replaced = replace_innermost(&f, &mut |q, v, body| {
            let others: Vec<Var> = body.free_vars().into_iter().filter(|&u| u != v).collect();
            let u = v.other();
            let unary = others.contains(&u);
            let name = fresh.name("A");
            let a = if unary { atom(&name, &[u]) } else { atom(&name, &[]) };
            let (to_body, from_body) = match q {
                Quantifier::Forall => (
                    Formula::Quant { q, var: v, body: Box::new(implies(a.clone(), body.clone())) },
                    exists(v, or(a.clone(), not(body.clone()))),
                ),
                Quantifier::Exists => (
                    exists(v, or(not(a.clone()), body.clone())),
                    forall(v, implies(body.clone(), a.clone())),
                ),
                Quantifier::ExistsExactly(_) => unreachable!("rejected above"),
            };
            let close = |g: Formula| if unary { forall(u, g) } else { g };
            axioms.push(close(to_body));
            axioms.push(close(from_body));
            steps.push(ReductionStep {
                predicate: name,
                arity: unary as usize,
                definition: Formula::Quant { q, var: v, body: Box::new(body.clone()) },
                multiplicity: BigUint::one(),
            });
            Ok(a)
        })?;
        let Some(g) = replaced else {
            return Err(Error::internal("no quantifier to eliminate"));
        };
        queue.push(g);
        queue.extend(axioms.into_iter().rev());
    }
    let matrix = formula::conjunction(universal);
    Ok((SnfSentence { matrix, existentials }, steps))
}

/// Replaces every existential body that is not a single `R(x,y)` by a fresh
/// binary `R_k` with `∀x∀y R_k(x,y) ↔ φ_k(x,y)` added to the matrix.
pub fn atomize_existentials(snf: SnfSentence, fresh: &mut Fresh) -> (SnfSentence, Vec<ReductionStep>) {
    let mut matrix = snf.matrix;
    let mut out = Vec::new();
    let mut steps = Vec::new();
    for body in snf.existentials {
        let is_atom = matches!(
            &body,
            Formula::Atom(Atom { args, .. })
                if args.len() == 2 && args[0].var() == Some(Var::X) && args[1].var() == Some(Var::Y)
        );
        if is_atom {
            out.push(body);
            continue;
        }
        let name = fresh.name("R");
        let r = atom(&name, &[Var::X, Var::Y]);
        matrix = if matrix == Formula::Top {
            iff(r.clone(), body.clone())
        } else {
            formula::and(matrix, iff(r.clone(), body.clone()))
        };
        steps.push(ReductionStep {
            predicate: name,
            arity: 2,
            definition: body,
            multiplicity: BigUint::one(),
        });
        out.push(r);
    }
    (SnfSentence { matrix, existentials: out }, steps)
}
