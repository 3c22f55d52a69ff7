//! Kolmogorov–Smirnov conformity tests with DKW bounds, and exact count
//! distributions.
//!
//! Deviations and bounds are floating point: this is harness code, not part
//! of exact sampling.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parser::Problem;
use crate::wfomc::compile_tracking;

/// `ε` such that the empirical CDF of `n` samples in dimension `k` deviates
/// by more than `ε` with probability at most `α`.
pub fn dkw_epsilon(n: usize, k: usize, alpha: f64) -> f64 {
    let n = n as f64;
    let c = if k <= 1 { 2.0 } else { k as f64 * (n + 1.0) };
    ((c / alpha).ln() / (2.0 * n)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub samples: usize,
    pub dimension: usize,
    pub alpha: f64,
    pub max_deviation: f64,
    pub epsilon: f64,
    pub pass: bool,
}

impl KsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Compares the empirical CDF of `samples` against a discrete reference
/// distribution. The supremum is taken over the product grid of every
/// coordinate value seen in the samples or the reference support.
pub fn ks_test(samples: &[Vec<u64>], reference: &BTreeMap<Vec<u64>, BigRational>, alpha: f64) -> Result<KsReport> {
    let Some(first) = samples.first() else {
        return Err(Error::invalid("KS test needs at least one sample"));
    };
    let k = first.len();
    if samples.iter().any(|s| s.len() != k) || reference.keys().any(|r| r.len() != k) {
        return Err(Error::invalid("samples and reference must share one dimension"));
    }
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    let mut hist: BTreeMap<&[u64], usize> = BTreeMap::new();
    for s in samples {
        *hist.entry(s.as_slice()).or_insert(0) += 1;
    }
    let refp: Vec<(&[u64], f64)> = reference.iter().map(|(x, p)| (x.as_slice(), to_f64(p))).collect();
    let axes: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            let vals: BTreeSet<u64> = hist.keys().map(|x| x[i]).chain(refp.iter().map(|(x, _)| x[i])).collect();
            vals.into_iter().collect()
        })
        .collect();

    let n = samples.len() as f64;
    let below = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x <= y);
    let mut max_dev = 0.0f64;
    let mut point = vec![0usize; k];
    loop {
        let x: Vec<u64> = point.iter().enumerate().map(|(i, &j)| axes[i][j]).collect();
        let emp = hist.iter().filter(|(s, _)| below(s, &x)).map(|(_, c)| *c).sum::<usize>() as f64 / n;
        let cdf: f64 = refp.iter().filter(|(s, _)| below(s, &x)).map(|(_, p)| p).sum();
        max_dev = max_dev.max((emp - cdf).abs());
        let mut i = 0;
        while i < k {
            point[i] += 1;
            if point[i] < axes[i].len() {
                break;
            }
            point[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    let epsilon = dkw_epsilon(samples.len(), k, alpha);
    Ok(KsReport {
        samples: samples.len(),
        dimension: k,
        alpha,
        max_deviation: max_dev,
        epsilon,
        pass: max_dev <= epsilon,
    })
}

/// The uniform distribution over `0..m` as a one-dimensional reference.
pub fn uniform_reference(m: usize) -> BTreeMap<Vec<u64>, BigRational> {
    (0..m as u64)
        .map(|i| (vec![i], BigRational::new(1.into(), (m as u64).into())))
        .collect()
}

/// Exact distribution of `(|P_1|, …, |P_k|)` over the models of `problem`.
pub fn count_distribution(problem: &Problem, preds: &[String]) -> Result<BTreeMap<Vec<u64>, BigRational>> {
    let vocab = problem.vocabulary();
    for p in preds {
        if !vocab.contains(p) {
            return Err(Error::UnknownPredicate(p.clone()));
        }
    }
    let engine = compile_tracking(problem, preds)?;
    let tracked = engine.tracked().to_vec();
    let pos: Vec<usize> = preds
        .iter()
        .map(|p| tracked.iter().position(|t| t == p).expect("requested predicates are tracked"))
        .collect();
    let mut out: BTreeMap<Vec<u64>, BigInt> = BTreeMap::new();
    for (d, w) in engine.count_terms() {
        let key: Vec<u64> = pos.iter().map(|&i| d[i]).collect();
        *out.entry(key).or_insert_with(BigInt::zero) += w;
    }
    let total: BigInt = out.values().sum();
    if total.is_zero() {
        return Err(Error::Unsatisfiable("the weighted model count is zero".into()));
    }
    Ok(out
        .into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(k, w)| (k, BigRational::new(w, total.clone())))
        .collect())
}
