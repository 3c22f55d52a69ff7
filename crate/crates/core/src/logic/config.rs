use num_bigint::BigUint;
use num_traits::One;

/// C(n, k) as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// n! / (k_1! ... k_m!) with n = Σ k_i.
pub fn multinomial(parts: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total = 0u64;
    for &k in parts {
        total += k;
        acc *= binomial(total, k);
    }
    acc
}

/// Every vector of `m` naturals summing to `total`, each exactly once.
///
/// Vectors come out in reverse lexicographic order: the first coordinate
/// starts at `total` and decreases.
pub fn configuration_space(total: u64, m: usize) -> ConfigurationSpace {
    assert!(m >= 1, "configuration space needs at least one coordinate");
    let mut first = vec![0; m];
    first[0] = total;
    ConfigurationSpace { next: Some(first) }
}

pub struct ConfigurationSpace {
    next: Option<Vec<u64>>,
}

impl Iterator for ConfigurationSpace {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.next.take()?;
        let m = current.len();
        // Find the rightmost nonzero coordinate that is not the last one,
        // move one unit right, and pile everything after it onto its
        // right neighbour.
        let mut succ = current.clone();
        let mut i = m.saturating_sub(1);
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if succ[i] > 0 {
                let tail: u64 = succ[i + 1..].iter().sum();
                succ[i] -= 1;
                for v in &mut succ[i + 1..] {
                    *v = 0;
                }
                succ[i + 1] = tail + 1;
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn small_spaces() {
        let v: Vec<_> = configuration_space(2, 2).collect();
        assert_eq!(v, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(configuration_space(0, 3).collect::<Vec<_>>(), vec![vec![0, 0, 0]]);
        assert_eq!(configuration_space(5, 4).count(), 56);
        assert_eq!(configuration_space(4, 1).collect::<Vec<_>>(), vec![vec![4]]);
    }

    #[test]
    fn coefficients() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 5), BigUint::from(0u32));
        assert_eq!(multinomial(&[2, 1, 1]), BigUint::from(12u32));
        assert_eq!(multinomial(&[]), BigUint::one());
    }

    proptest! {
        #[test]
        fn space_size_and_sums(total in 0u64..7, m in 1usize..5) {
            let all: Vec<_> = configuration_space(total, m).collect();
            let distinct: BTreeSet<_> = all.iter().cloned().collect();
            prop_assert_eq!(distinct.len(), all.len());
            prop_assert!(all.iter().all(|v| v.iter().sum::<u64>() == total && v.len() == m));
            prop_assert_eq!(BigUint::from(all.len()), binomial(total + m as u64 - 1, m as u64 - 1));
        }
    }
}
