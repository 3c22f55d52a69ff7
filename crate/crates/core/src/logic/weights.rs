use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::structure::{GroundAtom, Structure};
use super::Vocabulary;
use crate::error::{Error, Result};

/// Symmetric weights: a pair `(w, w̄)` per predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightMap {
    map: BTreeMap<String, (BigRational, BigRational)>,
}

pub fn unit() -> (BigRational, BigRational) {
    (BigRational::one(), BigRational::one())
}

impl WeightMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, pred: &str, w: BigRational, wbar: BigRational) -> Result<()> {
        if w.is_negative() || wbar.is_negative() {
            return Err(Error::invalid(format!("negative weight for `{pred}`")));
        }
        self.map.insert(pred.to_string(), (w, wbar));
        Ok(())
    }

    pub fn get(&self, pred: &str) -> Result<&(BigRational, BigRational)> {
        self.map
            .get(pred)
            .ok_or_else(|| Error::MissingWeight(pred.to_string()))
    }

    pub fn contains(&self, pred: &str) -> bool {
        self.map.contains_key(pred)
    }

    /// Fills in `(1, 1)` for every predicate of `vocab` lacking an entry.
    pub fn complete(&mut self, vocab: &Vocabulary) {
        for p in vocab.iter() {
            self.map.entry(p.name).or_insert_with(unit);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &(BigRational, BigRational))> {
        self.map.iter()
    }

    pub fn is_unit(&self) -> bool {
        self.map.values().all(|(w, wb)| w.is_one() && wb.is_one())
    }

    /// Integer weights `(w·D, w̄·D)` with `D` the lcm of both denominators.
    /// Scaling both polarities by the same `D` multiplies every structure
    /// weight by `D^(#ground atoms)`, which all ratios ignore.
    pub fn scaled(&self, pred: &str) -> Result<(BigInt, BigInt, BigInt)> {
        let (w, wb) = self.get(pred)?;
        let d = w.denom().lcm(wb.denom());
        let sw = w.numer() * (&d / w.denom());
        let swb = wb.numer() * (&d / wb.denom());
        Ok((sw, swb, d))
    }
}

/// A literal: a ground atom with a polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub atom: GroundAtom,
    pub positive: bool,
}

/// Π w over true literals times Π w̄ over false literals.
pub fn structure_weight(literals: &[Literal], weights: &WeightMap) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for l in literals {
        let (w, wb) = weights.get(&l.atom.pred)?;
        acc *= if l.positive { w } else { wb };
    }
    Ok(acc)
}

/// Weight of a full structure over `vocab` on `n` elements: false literal
/// counts come from the domain size.
pub fn full_structure_weight(
    s: &Structure,
    vocab: &Vocabulary,
    n: usize,
    weights: &WeightMap,
) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for p in vocab.iter() {
        let (w, wb) = weights.get(&p.name)?;
        let total = n.pow(p.arity as u32);
        let t = s.count(&p.name);
        if t > total {
            return Err(Error::invalid(format!("too many atoms of `{}`", p.name)));
        }
        acc *= pow(w, t) * pow(wb, total - t);
    }
    Ok(acc)
}

pub(crate) fn pow(r: &BigRational, e: usize) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    if r.is_zero() {
        return BigRational::zero();
    }
    num_traits::pow(r.clone(), e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(pred: &str, args: Vec<usize>, positive: bool) -> Literal {
        Literal {
            atom: GroundAtom::new(pred, args),
            positive,
        }
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn weights_of_literal_sets() {
        let mut wm = WeightMap::new();
        wm.set("E", r(3), r(1)).unwrap();
        let lits = vec![
            lit("E", vec![0, 1], true),
            lit("E", vec![1, 0], true),
            lit("E", vec![0, 0], false),
            lit("E", vec![1, 1], false),
        ];
        assert_eq!(structure_weight(&lits, &wm).unwrap(), r(9));
        assert_eq!(structure_weight(&[], &wm).unwrap(), r(1));
        assert!(structure_weight(&[lit("F", vec![0], true)], &wm).is_err());
    }

    #[test]
    fn multiplicative_over_disjoint_sets() {
        let mut wm = WeightMap::new();
        wm.set("P", BigRational::new(2.into(), 3.into()), r(5)).unwrap();
        let a = vec![lit("P", vec![0], true), lit("P", vec![1], false)];
        let b = vec![lit("P", vec![2], true)];
        let ab: Vec<_> = a.iter().chain(b.iter()).cloned().collect();
        assert_eq!(
            structure_weight(&ab, &wm).unwrap(),
            structure_weight(&a, &wm).unwrap() * structure_weight(&b, &wm).unwrap()
        );
    }

    #[test]
    fn scaling_to_integers() {
        let mut wm = WeightMap::new();
        wm.set("P", BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 3.into()))
            .unwrap();
        let (w, wb, d) = wm.scaled("P").unwrap();
        assert_eq!((w, wb, d), (3.into(), 2.into(), 6.into()));
    }
}
