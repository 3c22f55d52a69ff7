//! Exact weight arithmetic. Plain counts use `BigInt`; counts that must
//! remember how many atoms of each tracked predicate are true use
//! [`SymbolicWeight`], a sparse polynomial with one variable per tracked
//! predicate.
//!
//! All weights are integers: every predicate's `(w, w̄)` is scaled by a
//! common denominator, which multiplies each structure over a fixed domain
//! by the same constant.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub trait Semiring: Clone + Send + Sync + std::fmt::Debug + 'static {
    type Spec: Clone + Send + Sync + std::fmt::Debug;

    fn unit(spec: &Self::Spec) -> Self;
    fn null(spec: &Self::Spec) -> Self;
    /// `coef · Π z_i^{exps_i}`.
    fn monomial(coef: BigInt, exps: &[u32], spec: &Self::Spec) -> Self;
    fn is_null(&self) -> bool;
    fn mul(&self, other: &Self, spec: &Self::Spec) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn scale(&self, k: &BigInt) -> Self;

    fn pow(&self, mut e: u64, spec: &Self::Spec) -> Self {
        let mut base = self.clone();
        let mut acc = Self::unit(spec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, spec);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, spec);
            }
        }
        acc
    }

    /// Sum of the coefficients whose exponent vector `d` satisfies `keep`.
    fn filtered_sum(&self, keep: &dyn Fn(&[u32]) -> bool) -> BigInt;

    fn for_each_term(&self, f: &mut dyn FnMut(&[u32], &BigInt));
}

impl Semiring for BigInt {
    type Spec = ();

    fn unit(_: &()) -> Self {
        BigInt::one()
    }

    fn null(_: &()) -> Self {
        BigInt::zero()
    }

    fn monomial(coef: BigInt, _: &[u32], _: &()) -> Self {
        coef
    }

    fn is_null(&self) -> bool {
        Zero::is_zero(self)
    }

    fn mul(&self, other: &Self, _: &()) -> Self {
        self * other
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn scale(&self, k: &BigInt) -> Self {
        self * k
    }

    fn pow(&self, e: u64, _: &()) -> Self {
        num_traits::pow(self.clone(), e as usize)
    }

    fn filtered_sum(&self, keep: &dyn Fn(&[u32]) -> bool) -> BigInt {
        if keep(&[]) {
            self.clone()
        } else {
            BigInt::zero()
        }
    }

    fn for_each_term(&self, f: &mut dyn FnMut(&[u32], &BigInt)) {
        if !Zero::is_zero(self) {
            f(&[], self);
        }
    }
}

/// Variables and optional saturation caps of a [`SymbolicWeight`]. With a
/// cap `c_i`, every exponent `≥ c_i` is stored as `c_i`; this is exact for
/// constraints whose thresholds are all below `c_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySpec {
    pub vars: usize,
    pub caps: Option<Vec<u32>>,
}

impl PolySpec {
    fn clamp(&self, exps: &mut [u32]) {
        if let Some(caps) = &self.caps {
            for (e, c) in exps.iter_mut().zip(caps) {
                if *e > *c {
                    *e = *c;
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolicWeight {
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl SymbolicWeight {
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value with every variable set to 1, i.e. the plain weighted count.
    pub fn total(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, exps: Vec<u32>, coef: BigInt) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
}

impl Semiring for SymbolicWeight {
    type Spec = PolySpec;

    fn unit(spec: &PolySpec) -> Self {
        Self::monomial(BigInt::one(), &vec![0; spec.vars], spec)
    }

    fn null(_: &PolySpec) -> Self {
        SymbolicWeight::default()
    }

    fn monomial(coef: BigInt, exps: &[u32], spec: &PolySpec) -> Self {
        let mut out = SymbolicWeight::default();
        let mut e = exps.to_vec();
        spec.clamp(&mut e);
        out.add_term(e, coef);
        out
    }

    fn is_null(&self) -> bool {
        self.terms.is_empty()
    }

    fn mul(&self, other: &Self, spec: &PolySpec) -> Self {
        let mut out = SymbolicWeight::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                spec.clamp(&mut e);
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    fn add_assign(&mut self, other: &Self) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return SymbolicWeight::default();
        }
        SymbolicWeight {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    fn filtered_sum(&self, keep: &dyn Fn(&[u32]) -> bool) -> BigInt {
        self.terms
            .iter()
            .filter(|(e, _)| keep(e))
            .map(|(_, c)| c.clone())
            .sum()
    }

    fn for_each_term(&self, f: &mut dyn FnMut(&[u32], &BigInt)) {
        for (e, c) in &self.terms {
            f(e, c);
        }
    }
}

impl SymbolicWeight {
    /// True when every coefficient is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }
}
