mod common;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_constrained, random_instance};
use wfoms_core::normalizer::normalize;
use wfoms_core::oracle::{check_reduction_identity, enumerate_models, random_recursion_point};
use wfoms_core::parser::{parse_problem, Problem};
use wfoms_core::presets::find;
use wfoms_core::wfomc::{Compiled, PolySpec, SymbolicWeight, Upsilon};

fn compiled(p: &Problem) -> Compiled<SymbolicWeight> {
    let n = normalize(p).unwrap();
    let u = Upsilon::new(n.constraint.clone(), &[]);
    let spec = PolySpec {
        vars: u.tracked().len(),
        caps: Some(u.caps()),
    };
    Compiled::build(n, u, spec).unwrap()
}

fn check_points(p: &Problem, rng: &mut ChaCha8Rng, points: usize) -> usize {
    let c = compiled(p);
    let mut valid = 0;
    for _ in 0..points {
        for b in 0..c.branches.len() {
            let Some(pt) = random_recursion_point(&c, b, c.n, rng) else {
                continue;
            };
            let r = check_reduction_identity(&c, b, &pt).unwrap();
            assert!(r.holds(), "{p:?}\n{pt:?}\n{r:?}");
            valid += r.valid as usize;
        }
    }
    valid
}

#[test]
fn identity_on_presets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, n) in [("graphs-no-isolated", 4), ("functions", 3), ("derangements", 3), ("kregular", 3)] {
        let p = find(name).unwrap().problem(n, None).unwrap();
        check_points(&p, &mut rng, 10);
    }
}

#[test]
fn identity_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut valid = 0;
    for i in 0..20 {
        let p = random_instance(&mut rng, 2 + i % 2, i);
        valid += check_points(&p, &mut rng, 4);
    }
    assert!(valid > 0);
}

#[test]
fn identity_with_cardinality_constraints() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..20 {
        let p = random_constrained(&mut rng, 2 + i % 2, i);
        check_points(&p, &mut rng, 4);
    }
}

#[test]
fn counting_fibers() {
    for k in 1..=2u32 {
        for n in 1..=3usize {
            let sources = [
                find("kregular").unwrap().problem(n, Some(k)).unwrap(),
                parse_problem(&format!("domain: {n}\nsentence: forall x exists_{{={k}}} y: E(x,y)")).unwrap(),
            ];
            for p in sources {
                let norm = normalize(&p).unwrap();
                let source = enumerate_models(&p).unwrap().len();
                let reduced = enumerate_models(&norm.as_problem().unwrap()).unwrap().len();
                let fiber = BigUint::from(2u32).pow(if k == 2 { n as u32 } else { 0 });
                assert_eq!(norm.trace.multiplicity(), fiber);
                assert_eq!(BigUint::from(reduced), fiber * BigUint::from(source), "k={k} n={n}");
            }
        }
    }
}
