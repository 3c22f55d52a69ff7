//! Abstract syntax for two-variable sentences with counting quantifiers and
//! cardinality atoms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Const(String),
}

impl Term {
    pub fn var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
    /// Exactly `k` witnesses.
    ExistsExactly(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparator {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

impl Comparator {
    pub fn holds(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Comparator::Eq => lhs == rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Lt => lhs < rhs,
            Comparator::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Lt => "<",
            Comparator::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant {
        q: Quantifier,
        var: Var,
        body: Box<Formula>,
    },
    /// `|pred| cmp threshold`: the number of true ground atoms of `pred`.
    Card {
        pred: String,
        cmp: Comparator,
        threshold: u64,
    },
}

// Constructors. Kept short because the normalizer builds a lot of formulas.

pub fn atom(pred: &str, vars: &[Var]) -> Formula {
    Formula::Atom(Atom::new(pred, vars.iter().map(|v| Term::Var(*v)).collect()))
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

pub fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Box::new(a), Box::new(b))
}

pub fn forall(var: Var, body: Formula) -> Formula {
    Formula::Quant {
        q: Quantifier::Forall,
        var,
        body: Box::new(body),
    }
}

pub fn exists(var: Var, body: Formula) -> Formula {
    Formula::Quant {
        q: Quantifier::Exists,
        var,
        body: Box::new(body),
    }
}

pub fn exists_exactly(k: u32, var: Var, body: Formula) -> Formula {
    Formula::Quant {
        q: Quantifier::ExistsExactly(k),
        var,
        body: Box::new(body),
    }
}

pub fn card(pred: &str, cmp: Comparator, threshold: u64) -> Formula {
    Formula::Card {
        pred: pred.to_string(),
        cmp,
        threshold,
    }
}

/// Conjunction of a list; `Top` when empty.
pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Formula {
    let mut iter = items.into_iter();
    match iter.next() {
        None => Formula::Top,
        Some(first) => iter.fold(first, and),
    }
}

/// Disjunction of a list; `Bottom` when empty.
pub fn disjunction(items: impl IntoIterator<Item = Formula>) -> Formula {
    let mut iter = items.into_iter();
    match iter.next() {
        None => Formula::Bottom,
        Some(first) => iter.fold(first, or),
    }
}

impl Formula {
    /// Splits nested top-level conjunctions.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Quant { .. } => true,
            Formula::Not(a) => a.has_quantifier(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_quantifier() || b.has_quantifier()
            }
            _ => false,
        }
    }

    pub fn has_counting_quantifier(&self) -> bool {
        match self {
            Formula::Quant { q, body, .. } => {
                matches!(q, Quantifier::ExistsExactly(_)) || body.has_counting_quantifier()
            }
            Formula::Not(a) => a.has_counting_quantifier(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_counting_quantifier() || b.has_counting_quantifier()
            }
            _ => false,
        }
    }

    pub fn has_cardinality(&self) -> bool {
        match self {
            Formula::Card { .. } => true,
            Formula::Quant { body, .. } => body.has_cardinality(),
            Formula::Not(a) => a.has_cardinality(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_cardinality() || b.has_cardinality()
            }
            _ => false,
        }
    }

    /// True when the formula is built only from cardinality atoms, constants
    /// and connectives.
    pub fn is_cardinality_only(&self) -> bool {
        match self {
            Formula::Card { .. } | Formula::Top | Formula::Bottom => true,
            Formula::Not(a) => a.is_cardinality_only(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_cardinality_only() && b.is_cardinality_only()
            }
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &[]);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>, bound: &[Var]) {
        match self {
            Formula::Atom(a) => {
                for t in &a.args {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            out.insert(*v);
                        }
                    }
                }
            }
            Formula::Not(a) => a.collect_free(out, bound),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(out, bound);
                b.collect_free(out, bound);
            }
            Formula::Quant { var, body, .. } => {
                let mut inner = bound.to_vec();
                inner.push(*var);
                body.collect_free(out, &inner);
            }
            Formula::Top | Formula::Bottom | Formula::Card { .. } => {}
        }
    }

    /// Collects `name -> arity` for every predicate mentioned, including the
    /// ones inside cardinality atoms (whose arity is unknown and reported as
    /// `None` unless some atom fixes it).
    pub fn predicates(&self) -> Result<BTreeMap<String, usize>> {
        let mut arities: BTreeMap<String, usize> = BTreeMap::new();
        self.walk_atoms(&mut |a| {
            match arities.get(&a.pred) {
                Some(&k) if k != a.args.len() => {
                    return Err(Error::ArityMismatch {
                        name: a.pred.clone(),
                        expected: k,
                        found: a.args.len(),
                    })
                }
                Some(_) => {}
                None => {
                    arities.insert(a.pred.clone(), a.args.len());
                }
            }
            Ok(())
        })?;
        Ok(arities)
    }

    /// Predicates named in cardinality atoms.
    pub fn cardinality_predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn walk(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::Card { pred, .. } => {
                    out.insert(pred.clone());
                }
                Formula::Not(a) => walk(a, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Quant { body, .. } => walk(body, out),
                _ => {}
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn walk_atoms<F>(&self, f: &mut F) -> Result<()>
    where
        F: FnMut(&Atom) -> Result<()>,
    {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(a) => a.walk_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.walk_atoms(f)?;
                b.walk_atoms(f)
            }
            Formula::Quant { body, .. } => body.walk_atoms(f),
            Formula::Top | Formula::Bottom | Formula::Card { .. } => Ok(()),
        }
    }

    /// Renames free variables of a quantifier-free formula.
    pub fn rename(&self, map: &dyn Fn(Var) -> Var) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom {
                pred: a.pred.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(map(*v)),
                        c => c.clone(),
                    })
                    .collect(),
            }),
            Formula::Not(a) => not(a.rename(map)),
            Formula::And(a, b) => and(a.rename(map), b.rename(map)),
            Formula::Or(a, b) => or(a.rename(map), b.rename(map)),
            Formula::Implies(a, b) => implies(a.rename(map), b.rename(map)),
            Formula::Iff(a, b) => iff(a.rename(map), b.rename(map)),
            Formula::Quant { q, var, body } => Formula::Quant {
                q: *q,
                var: map(*var),
                body: Box::new(body.rename(map)),
            },
            other => other.clone(),
        }
    }

    /// Replaces atoms according to `f`; atoms mapped to `None` are kept.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Option<Formula>) -> Formula {
        match self {
            Formula::Atom(a) => f(a).unwrap_or_else(|| self.clone()),
            Formula::Not(a) => not(a.map_atoms(f)),
            Formula::And(a, b) => and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Implies(a, b) => implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Iff(a, b) => iff(a.map_atoms(f), b.map_atoms(f)),
            Formula::Quant { q, var, body } => Formula::Quant {
                q: *q,
                var: *var,
                body: Box::new(body.map_atoms(f)),
            },
            other => other.clone(),
        }
    }

    /// Constant folding of `Top`/`Bottom` through the connectives.
    pub fn simplify(&self) -> Formula {
        use Formula::*;
        match self {
            Not(a) => match a.simplify() {
                Top => Bottom,
                Bottom => Top,
                Not(inner) => *inner,
                s => not(s),
            },
            And(a, b) => match (a.simplify(), b.simplify()) {
                (Bottom, _) | (_, Bottom) => Bottom,
                (Top, s) | (s, Top) => s,
                (l, r) => and(l, r),
            },
            Or(a, b) => match (a.simplify(), b.simplify()) {
                (Top, _) | (_, Top) => Top,
                (Bottom, s) | (s, Bottom) => s,
                (l, r) => or(l, r),
            },
            Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Bottom, _) | (_, Top) => Top,
                (Top, s) => s,
                (s, Bottom) => not(s).simplify(),
                (l, r) => implies(l, r),
            },
            Iff(a, b) => match (a.simplify(), b.simplify()) {
                (Top, s) | (s, Top) => s,
                (Bottom, s) | (s, Bottom) => not(s).simplify(),
                (l, r) => iff(l, r),
            },
            Quant { q, var, body } => {
                let body = body.simplify();
                match (q, &body) {
                    (Quantifier::Forall | Quantifier::Exists, Top | Bottom)
                        if !body.has_quantifier() =>
                    {
                        // Sound for nonempty domains only; callers handle n = 0
                        // before simplifying.
                        body
                    }
                    _ => Quant {
                        q: *q,
                        var: *var,
                        body: Box::new(body),
                    },
                }
            }
            other => other.clone(),
        }
    }

    /// Evaluates a formula without atoms (only constants and connectives),
    /// with cardinality atoms decided by `card`.
    pub fn eval_closed(&self, card: &dyn Fn(&str, Comparator, u64) -> bool) -> Option<bool> {
        use Formula::*;
        Some(match self {
            Top => true,
            Bottom => false,
            Card {
                pred,
                cmp,
                threshold,
            } => card(pred, *cmp, *threshold),
            Not(a) => !a.eval_closed(card)?,
            And(a, b) => a.eval_closed(card)? && b.eval_closed(card)?,
            Or(a, b) => a.eval_closed(card)? || b.eval_closed(card)?,
            Implies(a, b) => !a.eval_closed(card)? || b.eval_closed(card)?,
            Iff(a, b) => a.eval_closed(card)? == b.eval_closed(card)?,
            Atom(_) | Quant { .. } => return None,
        })
    }
}

fn needs_parens(f: &Formula) -> bool {
    matches!(
        f,
        Formula::And(..)
            | Formula::Or(..)
            | Formula::Implies(..)
            | Formula::Iff(..)
            | Formula::Quant { .. }
    )
}

struct Operand<'a>(&'a Formula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if needs_parens(self.0) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v.name()),
            Term::Const(c) => f.write_str(c),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// Renders in the problem-file grammar; binary operands are always
/// parenthesized, so parsing the output gives back the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("true"),
            Formula::Bottom => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write!(f, "~{}", Operand(a)),
            Formula::And(a, b) => write!(f, "{} & {}", Operand(a), Operand(b)),
            Formula::Or(a, b) => write!(f, "{} | {}", Operand(a), Operand(b)),
            Formula::Implies(a, b) => write!(f, "{} -> {}", Operand(a), Operand(b)),
            Formula::Iff(a, b) => write!(f, "{} <-> {}", Operand(a), Operand(b)),
            Formula::Quant { q, var, body } => {
                match q {
                    Quantifier::Forall => write!(f, "forall {}", var.name())?,
                    Quantifier::Exists => write!(f, "exists {}", var.name())?,
                    Quantifier::ExistsExactly(k) => write!(f, "exists_{{={k}}} {}", var.name())?,
                }
                write!(f, ": {}", Operand(body))
            }
            Formula::Card {
                pred,
                cmp,
                threshold,
            } => write!(f, "|{pred}| {} {threshold}", cmp.symbol()),
        }
    }
}
