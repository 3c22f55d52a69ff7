mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{oracle_size, presets, random_constrained, random_instance};
use wfoms_core::logic::binomial;
use wfoms_core::oracle::{brute_count, exact_distribution};
use wfoms_core::presets::find;
use wfoms_core::stats::count_distribution;
use wfoms_core::strategy::Registry;
use wfoms_core::wfomc::wfomc;

fn int(x: BigInt) -> BigRational {
    BigRational::from_integer(x)
}

/// Undirected graphs without isolated vertices by inclusion–exclusion over
/// the isolated set.
fn graphs_closed_form(n: u64) -> BigInt {
    (0..=n)
        .map(|k| {
            let m = n - k;
            let term = BigInt::from(binomial(n, k)) * BigInt::from(2).pow((m * m.saturating_sub(1) / 2) as u32);
            if k % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

fn factorial(n: u64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn derangements(n: u64) -> BigInt {
    let (mut a, mut b) = (BigInt::from(1), BigInt::from(0));
    if n == 0 {
        return a;
    }
    for i in 2..=n {
        let next = BigInt::from(i - 1) * (&a + &b);
        a = b;
        b = next;
    }
    b
}

#[test]
fn preset_counts_match_closed_forms() {
    for n in 1..=6u64 {
        let p = find("graphs-no-isolated").unwrap().problem(n as usize, None).unwrap();
        assert_eq!(wfomc(&p).unwrap(), int(graphs_closed_form(n)), "graphs n={n}");
        let p = find("functions").unwrap().problem(n as usize, None).unwrap();
        assert_eq!(wfomc(&p).unwrap(), int(BigInt::from(n).pow(n as u32)), "functions n={n}");
        let p = find("functions-nofix").unwrap().problem(n as usize, None).unwrap();
        assert_eq!(wfomc(&p).unwrap(), int(BigInt::from(n - 1).pow(n as u32)), "nofix n={n}");
        let p = find("permutations").unwrap().problem(n as usize, None).unwrap();
        assert_eq!(wfomc(&p).unwrap(), int(factorial(n)), "permutations n={n}");
        let p = find("derangements").unwrap().problem(n as usize, None).unwrap();
        assert_eq!(wfomc(&p).unwrap(), int(derangements(n)), "derangements n={n}");
    }
}

#[test]
fn regular_graph_counts() {
    // 1-regular: perfect matchings; 2-regular on 5 vertices: the 12 five-cycles.
    let one = [0, 1, 0, 3, 0, 15];
    for (i, &m) in one.iter().enumerate() {
        let p = find("kregular").unwrap().problem(i + 1, Some(1)).unwrap();
        assert_eq!(wfomc(&p).unwrap(), int(m.into()), "n={}", i + 1);
    }
    let p = find("kregular").unwrap().problem(5, Some(2)).unwrap();
    assert_eq!(wfomc(&p).unwrap(), int(12.into()));
    let p = find("kregular").unwrap().problem(5, Some(3)).unwrap();
    assert_eq!(wfomc(&p).unwrap(), int(0.into()));
}

#[test]
fn presets_match_the_oracle() {
    for p in presets() {
        let n = oracle_size(p, 4, None);
        let prob = p.problem(n, None).unwrap();
        assert_eq!(wfomc(&prob).unwrap(), brute_count(&prob).unwrap(), "{} n={n}", p.name);
    }
}

#[test]
fn random_instances_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..40 {
        let n = 1 + i % 4;
        let p = random_instance(&mut rng, n, i);
        assert_eq!(wfomc(&p).unwrap(), brute_count(&p).unwrap(), "{p:?}");
    }
}

#[test]
fn constrained_instances_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..30 {
        let n = 1 + i % 3;
        let p = random_constrained(&mut rng, n, i);
        assert_eq!(wfomc(&p).unwrap(), brute_count(&p).unwrap(), "{p:?}");
    }
}

#[test]
fn counters_agree_through_the_registry() {
    let reg = Registry::with_defaults();
    assert_eq!(reg.counter_names(), vec!["brute", "lifted"]);
    let p = find("derangements").unwrap().problem(4, None).unwrap();
    let a = reg.counter("lifted").unwrap().count(&p).unwrap();
    let b = reg.counter("brute").unwrap().count(&p).unwrap();
    assert_eq!(a, b);
    assert!(reg.counter("magic").is_err());
}

#[test]
fn count_distributions_match_oracle_marginals() {
    for name in ["friends-smokers", "employment", "kregular", "graphs-no-isolated"] {
        let p = find(name).unwrap();
        let n = oracle_size(p, 4, None);
        let prob = p.problem(n, None).unwrap();
        let lifted = count_distribution(&prob, &p.tracked()).unwrap();
        let brute = exact_distribution(&prob).unwrap().marginal(&p.tracked());
        assert_eq!(lifted, brute, "{name} n={n}");
    }
}
