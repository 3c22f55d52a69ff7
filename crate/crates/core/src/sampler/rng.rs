use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The generator of run `run` under `seed`: ChaCha8 seeded with `seed`,
/// stream `run`. Runs are independent and reproducible in any order.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Index `i` with probability `w_i / Σ w`, by one uniform integer below the
/// total.
pub fn draw_discrete<R: Rng + ?Sized>(weights: &[BigInt], rng: &mut R) -> Result<usize> {
    if weights.iter().any(|w| w.is_negative()) {
        return Err(Error::internal("negative weight in a discrete draw"));
    }
    let total: BigInt = weights.iter().sum();
    let Some(total) = total.to_biguint().filter(|t| !t.is_zero()) else {
        return Err(Error::internal("discrete draw over zero total weight"));
    };
    let r = BigInt::from_biguint(Sign::Plus, rng.gen_biguint_below(&total));
    let mut acc = BigInt::zero();
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return Ok(i);
        }
    }
    unreachable!("draw below the total always lands")
}

/// [`draw_discrete`] over rationals, brought to a common denominator.
pub fn draw_rational<R: Rng + ?Sized>(weights: &[BigRational], rng: &mut R) -> Result<usize> {
    let denom = weights
        .iter()
        .fold(BigInt::from(1), |acc, w| num_integer::Integer::lcm(&acc, w.denom()));
    let ints: Vec<BigInt> = weights.iter().map(|w| w.numer() * (&denom / w.denom())).collect();
    draw_discrete(&ints, rng)
}

/// Splits `items` uniformly into consecutive groups of the given sizes.
pub fn partition<T: Clone, R: Rng + ?Sized>(items: &[T], sizes: &[u32], rng: &mut R) -> Vec<Vec<T>> {
    let mut pool = items.to_vec();
    pool.shuffle(rng);
    let mut out = Vec::with_capacity(sizes.len());
    let mut it = pool.into_iter();
    for &s in sizes {
        out.push(it.by_ref().take(s as usize).collect());
    }
    out
}

pub(crate) fn ratio(num: &BigInt, den: &BigInt) -> BigRational {
    BigRational::new(num.clone(), den.clone())
}

pub(crate) fn inverse(n: BigUint) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_draws() {
        let mut rng = run_rng(1, 0);
        for _ in 0..50 {
            assert_eq!(draw_discrete(&[0.into(), 3.into(), 0.into()], &mut rng).unwrap(), 1);
        }
        assert!(draw_discrete(&[0.into(), 0.into()], &mut rng).is_err());
        assert!(draw_discrete(&[], &mut rng).is_err());
    }

    #[test]
    fn frequencies_within_dkw() {
        let mut rng = run_rng(42, 0);
        let w: Vec<BigInt> = vec![1.into(), 2.into(), 3.into()];
        let n = 60_000;
        let mut hits = [0usize; 3];
        for _ in 0..n {
            hits[draw_discrete(&w, &mut rng).unwrap()] += 1;
        }
        let eps = crate::stats::dkw_epsilon(n, 1, 0.01);
        let mut cdf = 0.0;
        let mut emp = 0.0;
        for (i, p) in [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0].iter().enumerate() {
            cdf += p;
            emp += hits[i] as f64 / n as f64;
            assert!((cdf - emp).abs() <= eps);
        }
    }

    #[test]
    fn rational_draw_matches_integer_draw() {
        let w = [BigRational::new(1.into(), 3.into()), BigRational::new(1.into(), 6.into())];
        let mut a = run_rng(3, 2);
        let mut b = run_rng(3, 2);
        for _ in 0..20 {
            let i = draw_rational(&w, &mut a).unwrap();
            let j = draw_discrete(&[2.into(), 1.into()], &mut b).unwrap();
            assert_eq!(i, j);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let x: Vec<u32> = (0..5).map(|_| run_rng(9, 4).gen()).collect();
        assert!(x.windows(2).all(|p| p[0] == p[1]));
        let mut a = run_rng(9, 4);
        let mut b = run_rng(9, 5);
        assert_ne!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn partition_sizes() {
        let mut rng = run_rng(0, 0);
        let parts = partition(&[1, 2, 3, 4, 5], &[2, 0, 3], &mut rng);
        assert_eq!(parts.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 0, 3]);
        let mut all: Vec<i32> = parts.concat();
        all.sort();
        assert_eq!(all, vec![1, 2, 3, 4, 5]);
    }
}
