//! Shared generators for the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wfoms_core::parser::{parse_problem, Problem};
use wfoms_core::presets::{Preset, CATALOG};

const ATOMS_XY: &[&str] = &["P(x)", "P(y)", "Q(x)", "Q(y)", "E(x,y)", "E(y,x)", "E(x,x)"];

/// A random quantifier-free formula over `P`, `Q`, `E` in `x`, `y`.
pub fn random_matrix(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = ATOMS_XY.choose(rng).unwrap();
        return if rng.gen_bool(0.4) { format!("~{a}") } else { a.to_string() };
    }
    let l = random_matrix(rng, depth - 1);
    let r = random_matrix(rng, depth - 1);
    let op = ["&", "|", "->", "<->"].choose(rng).unwrap();
    format!("({l} {op} {r})")
}

fn random_weight(rng: &mut ChaCha8Rng) -> String {
    let num = rng.gen_range(0..5);
    let den = rng.gen_range(1..4);
    format!("{num}/{den}")
}

/// A random UFO² or FO² problem over at most 24 ground atoms at `n = 4`.
/// Alternates between the shapes; weights may be zero on one side.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, shape: usize) -> Problem {
    loop {
        let m = random_matrix(rng, 2);
        let sentence = match shape % 4 {
            0 => format!("forall x forall y: {m}"),
            1 => format!("(forall x forall y: {m}) & (forall x exists y: {})", random_matrix(rng, 1)),
            2 => format!("(forall x forall y: {m}) & (forall x: (P(x) -> exists y: {}))", random_matrix(rng, 1)),
            _ => format!("(forall x forall y: {m}) & (exists x: Q(x))"),
        };
        // Keep every predicate in the vocabulary.
        let src = format!(
            "domain: {n}\nsentence: {sentence} & (forall x forall y: (P(x) | ~P(x) | Q(y) | ~Q(y) | E(x,y) | ~E(x,y)))\n\
             weight: P {} {}\nweight: Q {} {}\nweight: E {} {}",
            random_weight(rng),
            random_weight(rng),
            random_weight(rng),
            random_weight(rng),
            random_weight(rng),
            random_weight(rng),
        );
        if let Ok(p) = parse_problem(&src) {
            return p;
        }
    }
}

/// Like [`random_instance`] with a cardinality constraint on `E` or `P`.
pub fn random_constrained(rng: &mut ChaCha8Rng, n: usize, shape: usize) -> Problem {
    let base = random_instance(rng, n, shape);
    let c = match rng.gen_range(0..4) {
        0 => format!("|E| <= {}", rng.gen_range(0..=n * n)),
        1 => format!("|P| = {}", rng.gen_range(0..=n)),
        2 => format!("|E| >= {} & |P| < {}", rng.gen_range(0..=n), rng.gen_range(1..=n)),
        _ => format!("~(|E| = {}) | |P| > {}", rng.gen_range(0..=n), rng.gen_range(0..=n)),
    };
    base.with_constraint_text(&c)
}

pub trait WithConstraint {
    fn with_constraint_text(&self, c: &str) -> Problem;
}

impl WithConstraint for Problem {
    fn with_constraint_text(&self, c: &str) -> Problem {
        let src = format!("{}constraint: {c}\n", wfoms_core::parser::render_problem(self));
        parse_problem(&src).expect("constraint parses")
    }
}

/// Largest domain size in `1..=max` whose grounding fits the oracle bound.
pub fn oracle_size(p: &Preset, max: usize, k: Option<u32>) -> usize {
    (1..=max)
        .rev()
        .find(|&n| {
            let prob = p.problem(n, k).unwrap();
            let atoms: usize = prob.vocabulary().iter().map(|q| n.pow(q.arity as u32)).sum();
            atoms <= wfoms_core::oracle::DEFAULT_BOUND
        })
        .unwrap_or(1)
}

pub fn presets() -> impl Iterator<Item = &'static Preset> {
    CATALOG.iter()
}
