//! Lifted weighted model counting over cell configurations.
//!
//! A normalized problem `∀x∀y ψ ∧ ⋀_k ∀x∃y R_k(x,y)` with constraint `Υ` is
//! compiled once per assignment of its nullary predicates into a
//! [`CountContext`]. `W_n` for a configuration of cells is evaluated by
//! inclusion–exclusion over violated obligations; `W_{n,Υ}` keeps tracked
//! predicates symbolic and filters exponent vectors by `Υ`.

mod constraint;
mod context;
mod poly;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use constraint::Upsilon;
pub use context::{Cell, CellConfig, CountContext, LiteralWeight};
pub use poly::{PolySpec, Semiring, SymbolicWeight};

use crate::error::{Error, Result};
use crate::logic::config::{configuration_space, multinomial};
use crate::logic::formula::Formula;
use crate::logic::types::{OneType, TypeSpace};
use crate::logic::Vocabulary;
use crate::normalizer::{normalize, Normalized};
use crate::parser::Problem;
use crate::sampler::{Sample, SamplerOptions};

/// One assignment of the nullary predicates.
#[derive(Debug)]
pub struct Branch<W: Semiring> {
    pub assignment: Vec<(String, bool)>,
    /// Product of the scaled nullary weights.
    pub weight: BigInt,
    /// Tracked atoms made true by the nullary assignment.
    pub consumed: Vec<u64>,
    pub ctx: Arc<CountContext<W>>,
    candidates: OnceLock<Vec<Candidate>>,
}

/// A 1-type configuration of the whole domain with its weight
/// `W_{n,Υ} · multinomial`.
#[derive(Clone, Debug)]
pub struct Candidate {
    /// Counts aligned with [`CountContext::valid_types`].
    pub counts: Vec<u32>,
    pub weight: BigInt,
}

/// A problem compiled for a fixed domain size.
#[derive(Debug)]
pub struct Compiled<W: Semiring> {
    pub normalized: Normalized,
    pub upsilon: Upsilon,
    pub branches: Vec<Branch<W>>,
    pub n: usize,
    /// `Π_P D_P^{n^arity}`: every scaled weight is this multiple of the true one.
    pub scale: BigInt,
    /// Reduced models per source model.
    pub fiber: BigUint,
}

/// Object-safe view of a compiled problem, whatever its weight semiring.
pub trait Engine: Send + Sync {
    /// Vocabulary of the source problem.
    fn skeleton(&self) -> &Vocabulary;
    fn domain_size(&self) -> usize;
    /// Predicates carried symbolically.
    fn tracked(&self) -> &[String];
    /// Weighted count of the reduced problem in scaled integer weights.
    fn scaled_total(&self) -> BigInt;
    /// Weighted model count of the source problem.
    fn wfomc(&self) -> BigRational;
    /// Scaled weight per vector of tracked counts, restricted to `Υ`.
    fn count_terms(&self) -> BTreeMap<Vec<u64>, BigInt>;
    fn sample(&self, rng: &mut ChaCha8Rng, opts: &SamplerOptions) -> Result<Sample>;
    /// Number of memoized `W_n` values across branches.
    fn cache_entries(&self) -> usize {
        0
    }
}

/// Compiles a problem for counting and sampling. Empty domains go to the
/// brute-force engine.
pub fn compile(problem: &Problem) -> Result<Box<dyn Engine>> {
    compile_tracking(problem, &[])
}

/// Like [`compile`], additionally tracking the counts of `extra` predicates.
pub fn compile_tracking(problem: &Problem, extra: &[String]) -> Result<Box<dyn Engine>> {
    if problem.domain.is_empty() {
        return Ok(Box::new(crate::oracle::BruteEngine::new(problem.clone(), extra)?));
    }
    let normalized = normalize(problem)?;
    let upsilon = Upsilon::new(normalized.constraint.clone(), extra);
    for p in upsilon.tracked() {
        if !normalized.vocabulary.contains(p) {
            return Err(Error::UnknownPredicate(p.clone()));
        }
    }
    if upsilon.tracked().is_empty() {
        Ok(Box::new(Compiled::<BigInt>::build(normalized, upsilon, ())?))
    } else {
        let caps = if extra.is_empty() { Some(upsilon.caps()) } else { None };
        let spec = PolySpec {
            vars: upsilon.tracked().len(),
            caps,
        };
        Ok(Box::new(Compiled::<SymbolicWeight>::build(normalized, upsilon, spec)?))
    }
}

/// Weighted model count of `problem`.
pub fn wfomc(problem: &Problem) -> Result<BigRational> {
    Ok(compile(problem)?.wfomc())
}

impl<W: Semiring> Compiled<W> {
    pub fn build(normalized: Normalized, upsilon: Upsilon, spec: W::Spec) -> Result<Self> {
        let vocab = &normalized.vocabulary;
        let n = normalized.domain.len();
        let nullary = vocab.names_with_arity(0);
        let unary = vocab.names_with_arity(1);
        let binary = vocab.names_with_arity(2);
        if nullary.len() > 16 {
            return Err(Error::Unsupported("more than 16 nullary predicates".into()));
        }

        let mut scale = BigInt::one();
        for p in vocab.iter() {
            let (_, _, d) = normalized.weights.scaled(&p.name)?;
            scale *= num_traits::pow(d, n.pow(p.arity as u32));
        }
        let lit = |name: &str| -> Result<LiteralWeight> {
            let (w, wbar, _) = normalized.weights.scaled(name)?;
            Ok(LiteralWeight {
                w,
                wbar,
                tracked: upsilon.index(name),
            })
        };

        let mut branches = Vec::new();
        for mask in 0u32..(1 << nullary.len()) {
            let assignment: Vec<(String, bool)> = nullary
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), mask >> i & 1 == 1))
                .collect();
            let mut weight = BigInt::one();
            let mut consumed = vec![0u64; upsilon.tracked().len()];
            for (p, v) in &assignment {
                let lw = lit(p)?;
                weight *= if *v { &lw.w } else { &lw.wbar };
                if let (true, Some(t)) = (*v, lw.tracked) {
                    consumed[t] += 1;
                }
            }
            if weight.is_zero() || upsilon.status(&consumed) == Some(false) {
                continue;
            }
            let lookup = |a: &crate::logic::formula::Atom| {
                assignment.iter().find(|(p, _)| *p == a.pred && a.args.is_empty()).map(|(_, v)| {
                    if *v {
                        Formula::Top
                    } else {
                        Formula::Bottom
                    }
                })
            };
            let matrix = normalized.matrix.map_atoms(&lookup).simplify();
            if matrix == Formula::Bottom {
                continue;
            }
            let types = TypeSpace::new(&unary, &binary, &normalized.witnesses, &matrix)?;
            let one_lits = types
                .one_literal_names()
                .iter()
                .map(|p| lit(p))
                .collect::<Result<Vec<_>>>()?;
            let bin = types.binary_names().iter().map(|p| lit(p)).collect::<Result<Vec<_>>>()?;
            let ctx = CountContext::new(types, &one_lits, &bin, upsilon.tracked().len(), spec.clone())?;
            branches.push(Branch {
                assignment,
                weight,
                consumed,
                ctx: Arc::new(ctx),
                candidates: OnceLock::new(),
            });
        }
        let fiber = normalized.trace.multiplicity();
        Ok(Compiled {
            normalized,
            upsilon,
            branches,
            n,
            scale,
            fiber,
        })
    }

    /// `W_{n,Υ}` of a cell configuration given the atoms already committed.
    pub fn w_n_cc(&self, branch: &Branch<W>, config: &[(Cell, u32)], consumed: &[u64]) -> BigInt {
        let poly = branch.ctx.w_n(config);
        if self.upsilon.is_trivial() {
            return poly.filtered_sum(&|_| true);
        }
        poly.filtered_sum(&|d| self.upsilon.holds_shifted(d, consumed))
    }

    /// The cell configuration of the whole domain with 1-type counts
    /// `counts` and every obligation open.
    pub fn initial_config(&self, branch: &Branch<W>, counts: &[u32]) -> CellConfig {
        let full = branch.ctx.types.full_block();
        let mut out: CellConfig = branch
            .ctx
            .valid_types()
            .iter()
            .zip(counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&tau, &c)| (branch.ctx.cell(full, tau), c))
            .collect();
        out.sort_unstable();
        out
    }

    /// Every 1-type configuration with positive weight.
    pub fn candidates<'a>(&self, branch: &'a Branch<W>) -> &'a [Candidate] {
        branch.candidates.get_or_init(|| {
            let u = branch.ctx.valid_types().len();
            if u == 0 {
                return Vec::new();
            }
            let space: Vec<Vec<u64>> = configuration_space(self.n as u64, u).collect();
            space
                .par_iter()
                .filter_map(|counts| {
                    let c32: Vec<u32> = counts.iter().map(|&c| c as u32).collect();
                    let config = self.initial_config(branch, &c32);
                    let w = self.w_n_cc(branch, &config, &branch.consumed);
                    if w.is_zero() {
                        return None;
                    }
                    let weight = w * BigInt::from(multinomial(counts));
                    Some(Candidate { counts: c32, weight })
                })
                .collect()
        })
    }

    /// Scaled weighted count of one branch, without its nullary weight.
    pub fn branch_total(&self, branch: &Branch<W>) -> BigInt {
        self.candidates(branch).iter().map(|c| &c.weight).sum()
    }

    pub fn one_type_of(&self, branch: &Branch<W>, i: usize) -> OneType {
        branch.ctx.valid_types()[i]
    }
}

impl<W: Semiring> Engine for Compiled<W> {
    fn skeleton(&self) -> &Vocabulary {
        &self.normalized.trace.skeleton
    }

    fn domain_size(&self) -> usize {
        self.n
    }

    fn tracked(&self) -> &[String] {
        self.upsilon.tracked()
    }

    fn scaled_total(&self) -> BigInt {
        self.branches.iter().map(|b| &b.weight * self.branch_total(b)).sum()
    }

    fn wfomc(&self) -> BigRational {
        let denom = &self.scale * BigInt::from(self.fiber.clone());
        BigRational::new(self.scaled_total(), denom)
    }

    fn count_terms(&self) -> BTreeMap<Vec<u64>, BigInt> {
        let mut out: BTreeMap<Vec<u64>, BigInt> = BTreeMap::new();
        for b in &self.branches {
            let u = b.ctx.valid_types().len();
            if u == 0 {
                continue;
            }
            let space: Vec<Vec<u64>> = configuration_space(self.n as u64, u).collect();
            let partial: Vec<BTreeMap<Vec<u64>, BigInt>> = space
                .par_iter()
                .map(|counts| {
                    let c32: Vec<u32> = counts.iter().map(|&c| c as u32).collect();
                    let config = self.initial_config(b, &c32);
                    let poly = b.ctx.w_n(&config);
                    let m = BigInt::from(multinomial(counts)) * &b.weight;
                    let mut local = BTreeMap::new();
                    poly.for_each_term(&mut |d, c| {
                        let key: Vec<u64> = if d.is_empty() {
                            b.consumed.clone()
                        } else {
                            d.iter().zip(&b.consumed).map(|(&x, &y)| x as u64 + y).collect()
                        };
                        if self.upsilon.holds(&key) {
                            *local.entry(key).or_insert_with(BigInt::zero) += c * &m;
                        }
                    });
                    local
                })
                .collect();
            for map in partial {
                for (k, v) in map {
                    *out.entry(k).or_insert_with(BigInt::zero) += v;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    fn sample(&self, rng: &mut ChaCha8Rng, opts: &SamplerOptions) -> Result<Sample> {
        crate::sampler::sample_compiled(self, rng, opts)
    }

    fn cache_entries(&self) -> usize {
        self.branches.iter().map(|b| b.ctx.cache_len()).sum()
    }
}
