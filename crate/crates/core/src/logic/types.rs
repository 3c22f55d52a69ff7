//! 1-types, 2-tables, block types and cell types over a fixed vocabulary.
//!
//! A 1-type is a truth vector over the 1-literals (unary `P(x)` and
//! reflexive `R(x,x)`), sorted by predicate name. A 2-table is a truth vector
//! over `R(x,y), R(y,x)` for every binary `R`, sorted by name. Both are
//! packed into integers with literal `i` at bit `L-1-i`, so numeric order is
//! lexicographic order of the truth vectors.

use super::formula::{Formula, Term, Var};
use super::structure::GroundAtom;
use crate::error::{Error, Result};

pub type OneType = u32;
pub type TwoTable = u32;
/// Subset of existential indices `k` as a bitmask (bit `k`).
pub type Block = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Lit {
    /// 1-literal of the element bound to `x`.
    OneX(usize),
    /// 1-literal of the element bound to `y`.
    OneY(usize),
    /// `R(x,y)` for binary predicate `b`.
    Xy(usize),
    /// `R(y,x)` for binary predicate `b`.
    Yx(usize),
}

#[derive(Clone, Debug)]
enum Expr {
    Const(bool),
    Lit(Lit),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug)]
pub struct TypeSpace {
    /// Predicate names owning the 1-literals, in literal order.
    one_lits: Vec<String>,
    /// Whether 1-literal `i` is a reflexive binary literal.
    one_lit_binary: Vec<bool>,
    /// Binary predicates, in 2-literal order.
    binary: Vec<String>,
    /// For binary predicate `b`, the index of its reflexive 1-literal.
    refl_of_binary: Vec<usize>,
    /// Binary predicate index of each existential witness `R_k`.
    witness: Vec<usize>,
    matrix: Expr,
}

impl TypeSpace {
    /// `unary` and `binary` list the vocabulary; `witnesses` names the
    /// binary `R_k` of every existential conjunct `∀x∃y R_k(x,y)`;
    /// `matrix` is the quantifier-free `ψ(x,y)`.
    pub fn new(
        unary: &[String],
        binary: &[String],
        witnesses: &[String],
        matrix: &Formula,
    ) -> Result<Self> {
        let mut one: Vec<(String, bool)> = unary
            .iter()
            .map(|u| (u.clone(), false))
            .chain(binary.iter().map(|b| (b.clone(), true)))
            .collect();
        one.sort();
        let mut bin = binary.to_vec();
        bin.sort();
        bin.dedup();
        if one.len() > 24 || bin.len() > 12 {
            return Err(Error::Unsupported(
                "vocabulary too large for the type tables".to_string(),
            ));
        }
        let one_lits: Vec<String> = one.iter().map(|(n, _)| n.clone()).collect();
        let one_lit_binary: Vec<bool> = one.iter().map(|(_, b)| *b).collect();
        let refl_of_binary = bin
            .iter()
            .map(|b| one_lits.iter().position(|n| n == b).unwrap())
            .collect();
        let witness = witnesses
            .iter()
            .map(|w| {
                bin.iter()
                    .position(|b| b == w)
                    .ok_or_else(|| Error::internal(format!("witness `{w}` is not binary")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ts = TypeSpace {
            one_lits,
            one_lit_binary,
            binary: bin,
            refl_of_binary,
            witness,
            matrix: Expr::Const(true),
        };
        ts.matrix = ts.compile(matrix)?;
        Ok(ts)
    }

    fn compile(&self, f: &Formula) -> Result<Expr> {
        Ok(match f {
            Formula::Top => Expr::Const(true),
            Formula::Bottom => Expr::Const(false),
            Formula::Not(a) => Expr::Not(Box::new(self.compile(a)?)),
            Formula::And(a, b) => Expr::And(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Or(a, b) => Expr::Or(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Implies(a, b) => Expr::Or(
                Box::new(Expr::Not(Box::new(self.compile(a)?))),
                Box::new(self.compile(b)?),
            ),
            Formula::Iff(a, b) => Expr::Iff(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Atom(a) => {
                let vars: Vec<Var> = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Ok(*v),
                        Term::Const(c) => Err(Error::Unsupported(format!(
                            "ground atom with constant `{c}` in the lifted pipeline"
                        ))),
                    })
                    .collect::<Result<_>>()?;
                let unknown = || Error::internal(format!("predicate `{}` missing from type space", a.pred));
                match vars.as_slice() {
                    [v] => {
                        let i = self.one_index(&a.pred, false).ok_or_else(unknown)?;
                        Expr::Lit(match v {
                            Var::X => Lit::OneX(i),
                            Var::Y => Lit::OneY(i),
                        })
                    }
                    [u, v] => {
                        let b = self.binary_index(&a.pred).ok_or_else(unknown)?;
                        let r = self.refl_of_binary[b];
                        Expr::Lit(match (u, v) {
                            (Var::X, Var::X) => Lit::OneX(r),
                            (Var::Y, Var::Y) => Lit::OneY(r),
                            (Var::X, Var::Y) => Lit::Xy(b),
                            (Var::Y, Var::X) => Lit::Yx(b),
                        })
                    }
                    _ => {
                        return Err(Error::internal(format!(
                            "atom `{}` of arity {} in matrix",
                            a.pred,
                            vars.len()
                        )))
                    }
                }
            }
            Formula::Quant { .. } | Formula::Card { .. } => {
                return Err(Error::internal("matrix must be quantifier-free"))
            }
        })
    }

    fn one_index(&self, pred: &str, binary: bool) -> Option<usize> {
        (0..self.one_lits.len()).find(|&i| self.one_lits[i] == pred && self.one_lit_binary[i] == binary)
    }

    pub fn binary_index(&self, pred: &str) -> Option<usize> {
        self.binary.iter().position(|b| b == pred)
    }

    pub fn unary_index(&self, pred: &str) -> Option<usize> {
        self.one_index(pred, false)
    }

    pub fn num_one_literals(&self) -> usize {
        self.one_lits.len()
    }

    pub fn num_binary(&self) -> usize {
        self.binary.len()
    }

    pub fn num_one_types(&self) -> usize {
        1 << self.one_lits.len()
    }

    pub fn num_two_tables(&self) -> usize {
        1 << (2 * self.binary.len())
    }

    /// Number of existential conjuncts `m`.
    pub fn num_existentials(&self) -> usize {
        self.witness.len()
    }

    pub fn full_block(&self) -> Block {
        ((1u64 << self.witness.len()) - 1) as Block
    }

    pub fn one_literal_names(&self) -> &[String] {
        &self.one_lits
    }

    pub fn binary_names(&self) -> &[String] {
        &self.binary
    }

    pub fn is_reflexive_literal(&self, i: usize) -> bool {
        self.one_lit_binary[i]
    }

    pub fn one_lit(&self, tau: OneType, i: usize) -> bool {
        let l = self.one_lits.len();
        (tau >> (l - 1 - i)) & 1 == 1
    }

    /// `R_b(x,y)` in `pi`.
    pub fn xy(&self, pi: TwoTable, b: usize) -> bool {
        let l = 2 * self.binary.len();
        (pi >> (l - 1 - 2 * b)) & 1 == 1
    }

    /// `R_b(y,x)` in `pi`.
    pub fn yx(&self, pi: TwoTable, b: usize) -> bool {
        let l = 2 * self.binary.len();
        (pi >> (l - 2 - 2 * b)) & 1 == 1
    }

    pub fn reflexive(&self, tau: OneType, b: usize) -> bool {
        self.one_lit(tau, self.refl_of_binary[b])
    }

    /// Builds a 2-table from per-predicate `(R(x,y), R(y,x))` truth values.
    pub fn table_from(&self, lits: &[(bool, bool)]) -> TwoTable {
        let mut pi = 0;
        for &(a, b) in lits {
            pi = (pi << 2) | ((a as u32) << 1) | b as u32;
        }
        pi
    }

    pub fn one_type_from(&self, lits: &[bool]) -> OneType {
        lits.iter().fold(0, |acc, &b| (acc << 1) | b as u32)
    }

    /// The same table seen from the other element.
    pub fn swap(&self, pi: TwoTable) -> TwoTable {
        let mut out = 0;
        for b in 0..self.binary.len() {
            out = (out << 2) | ((self.yx(pi, b) as u32) << 1) | self.xy(pi, b) as u32;
        }
        out
    }

    fn eval(&self, e: &Expr, tx: OneType, pi: TwoTable, ty: OneType, diagonal: bool) -> bool {
        match e {
            Expr::Const(c) => *c,
            Expr::Lit(l) => match *l {
                Lit::OneX(i) => self.one_lit(tx, i),
                Lit::OneY(i) => self.one_lit(ty, i),
                Lit::Xy(b) if diagonal => self.reflexive(tx, b),
                Lit::Yx(b) if diagonal => self.reflexive(tx, b),
                Lit::Xy(b) => self.xy(pi, b),
                Lit::Yx(b) => self.yx(pi, b),
            },
            Expr::Not(a) => !self.eval(a, tx, pi, ty, diagonal),
            Expr::And(a, b) => self.eval(a, tx, pi, ty, diagonal) && self.eval(b, tx, pi, ty, diagonal),
            Expr::Or(a, b) => self.eval(a, tx, pi, ty, diagonal) || self.eval(b, tx, pi, ty, diagonal),
            Expr::Iff(a, b) => self.eval(a, tx, pi, ty, diagonal) == self.eval(b, tx, pi, ty, diagonal),
        }
    }

    /// `τ(a)` satisfies `ψ(a,a)`.
    pub fn valid_one_type(&self, tau: OneType) -> bool {
        self.eval(&self.matrix, tau, 0, tau, true)
    }

    /// `τ(a) ∪ π(a,b) ∪ τ'(b)` satisfies `ψ(a,b) ∧ ψ(b,a)`.
    pub fn coherent(&self, tau: OneType, tau2: OneType, pi: TwoTable) -> bool {
        self.eval(&self.matrix, tau, pi, tau2, false)
            && self.eval(&self.matrix, tau2, self.swap(pi), tau, false)
    }

    /// Drops from `block` every obligation `k` with `R_k(y,x) ∈ π`, where the
    /// relaxed element plays `y`.
    pub fn relax(&self, block: Block, pi: TwoTable) -> Block {
        let mut out = block;
        for (k, &b) in self.witness.iter().enumerate() {
            if self.yx(pi, b) {
                out &= !(1 << k);
            }
        }
        out
    }

    /// `R_k(x,y) ∈ π`: the element playing `x` gets its `k`-th witness.
    pub fn witnesses_forward(&self, pi: TwoTable, k: usize) -> bool {
        self.xy(pi, self.witness[k])
    }

    /// `R_k(x,x) ∈ τ`: the element witnesses its own obligation.
    pub fn witnesses_self(&self, tau: OneType, k: usize) -> bool {
        self.reflexive(tau, self.witness[k])
    }

    /// Ground atoms made true by element `a` having 1-type `tau`.
    pub fn one_type_atoms(&self, tau: OneType, a: usize) -> Vec<GroundAtom> {
        (0..self.one_lits.len())
            .filter(|&i| self.one_lit(tau, i))
            .map(|i| {
                let args = if self.one_lit_binary[i] { vec![a, a] } else { vec![a] };
                GroundAtom::new(self.one_lits[i].clone(), args)
            })
            .collect()
    }

    /// Ground atoms made true by the pair `(a, b)` realizing `pi` with `a` as `x`.
    pub fn two_table_atoms(&self, pi: TwoTable, a: usize, b: usize) -> Vec<GroundAtom> {
        let mut out = Vec::new();
        for (i, name) in self.binary.iter().enumerate() {
            if self.xy(pi, i) {
                out.push(GroundAtom::new(name.clone(), vec![a, b]));
            }
            if self.yx(pi, i) {
                out.push(GroundAtom::new(name.clone(), vec![b, a]));
            }
        }
        out
    }

    pub fn describe_one_type(&self, tau: OneType) -> String {
        let parts: Vec<String> = (0..self.one_lits.len())
            .map(|i| {
                let neg = if self.one_lit(tau, i) { "" } else { "~" };
                let args = if self.one_lit_binary[i] { "x,x" } else { "x" };
                format!("{neg}{}({args})", self.one_lits[i])
            })
            .collect();
        parts.join(" & ")
    }

    pub fn describe_two_table(&self, pi: TwoTable) -> String {
        let mut parts = Vec::new();
        for (i, name) in self.binary.iter().enumerate() {
            let n1 = if self.xy(pi, i) { "" } else { "~" };
            let n2 = if self.yx(pi, i) { "" } else { "~" };
            parts.push(format!("{n1}{name}(x,y)"));
            parts.push(format!("{n2}{name}(y,x)"));
        }
        parts.join(" & ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::*;
    use proptest::prelude::*;
    use Var::{X, Y};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn graph_space() -> TypeSpace {
        let psi = and(not(atom("E", &[X, X])), implies(atom("E", &[X, Y]), atom("E", &[Y, X])));
        TypeSpace::new(&[], &s(&["E"]), &s(&["E"]), &psi).unwrap()
    }

    #[test]
    fn type_counts() {
        let t = TypeSpace::new(&[], &s(&["E"]), &[], &Formula::Top).unwrap();
        assert_eq!((t.num_one_types(), t.num_two_tables()), (2, 4));
        let t = TypeSpace::new(&s(&["G"]), &s(&["F"]), &[], &Formula::Top).unwrap();
        assert_eq!(t.num_one_types(), 4);
        // F sorts before G, so F(x,x) & ~G(x) is the vector (1, 0).
        assert_eq!(t.describe_one_type(0b10), "F(x,x) & ~G(x)");
        let t = TypeSpace::new(&s(&["P", "Q"]), &s(&["R"]), &[], &Formula::Top).unwrap();
        assert_eq!(t.num_one_types(), 8);
        let t = TypeSpace::new(&s(&["P"]), &[], &[], &Formula::Top).unwrap();
        assert_eq!(t.num_two_tables(), 1);
    }

    #[test]
    fn graph_coherence_and_validity() {
        let t = graph_space();
        let no_loop = 0;
        assert!(t.valid_one_type(no_loop));
        assert!(!t.valid_one_type(1));
        let one_way = t.table_from(&[(true, false)]);
        let both = t.table_from(&[(true, true)]);
        let neither = t.table_from(&[(false, false)]);
        assert!(!t.coherent(no_loop, no_loop, one_way));
        assert!(t.coherent(no_loop, no_loop, both));
        assert!(t.coherent(no_loop, no_loop, neither));
        let top = TypeSpace::new(&[], &s(&["E"]), &[], &Formula::Top).unwrap();
        for pi in 0..4 {
            assert!(top.coherent(0, 1, pi));
        }
    }

    #[test]
    fn relaxation() {
        let t = graph_space();
        assert_eq!(t.relax(1, t.table_from(&[(false, true)])), 0);
        assert_eq!(t.relax(1, t.table_from(&[(true, false)])), 1);
        assert_eq!(t.relax(0, t.table_from(&[(true, true)])), 0);
    }

    proptest! {
        #[test]
        fn relax_is_monotone_and_idempotent(block in 0u32..4, pi in 0u32..16) {
            let t = TypeSpace::new(&[], &s(&["A", "B"]), &s(&["A", "B"]), &Formula::Top).unwrap();
            let r = t.relax(block, pi);
            prop_assert_eq!(r & !block, 0);
            prop_assert_eq!(t.relax(r, pi), r);
        }

        #[test]
        fn swap_is_an_involution(pi in 0u32..64) {
            let t = TypeSpace::new(&[], &s(&["A", "B", "C"]), &[], &Formula::Top).unwrap();
            prop_assert_eq!(t.swap(t.swap(pi)), pi);
        }
    }
}
