//! Brute-force ground truth on small domains.
//!
//! The sentence is grounded into a circuit over the ground atoms, which are
//! assigned one at a time in canonical order. A three-valued evaluation of
//! the circuit on each partial assignment prunes branches that can no
//! longer be models.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::formula::{Comparator, Formula, Quantifier, Term, Var};
use crate::logic::structure::{GroundAtom, Structure};
use crate::logic::types::{Block, OneType, TwoTable};
use crate::logic::Vocabulary;
use crate::parser::Problem;
use crate::sampler::{draw_discrete, Sample, SamplerOptions};
use crate::normalizer::normalize;
use crate::wfomc::{Cell, Compiled, Engine, PolySpec, Semiring, SymbolicWeight, Upsilon};

/// Default limit on the number of ground atoms.
pub const DEFAULT_BOUND: usize = 30;

const F: u8 = 0;
const T: u8 = 1;
const U: u8 = 2;

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Atom(u32),
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Iff(usize, usize),
    Exactly(Vec<usize>, u32),
    Card(u64, Comparator, u64),
}

/// A problem grounded over its domain.
#[derive(Clone, Debug)]
pub struct Grounding {
    nodes: Vec<Node>,
    root: usize,
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, u32>,
    /// Per predicate: name, atom mask, scaled `(w, w̄)`.
    preds: Vec<(String, u64, BigInt, BigInt)>,
    /// `Π_P D_P^{#atoms(P)}`.
    scale: BigInt,
}

impl Grounding {
    pub fn new(problem: &Problem, bound: usize) -> Result<Self> {
        let vocab = problem.vocabulary();
        let n = problem.domain.len();
        let total = vocab.ground_atom_count(n);
        if total > bound || total > 63 {
            return Err(Error::BoundExceeded {
                atoms: total,
                limit: bound.min(63),
            });
        }
        let mut atoms = Vec::with_capacity(total);
        let mut preds = Vec::new();
        let mut scale = BigInt::one();
        for p in vocab.iter() {
            let start = atoms.len();
            match p.arity {
                0 => atoms.push(GroundAtom::new(p.name.clone(), vec![])),
                1 => atoms.extend((0..n).map(|a| GroundAtom::new(p.name.clone(), vec![a]))),
                _ => {
                    for a in 0..n {
                        atoms.extend((0..n).map(|b| GroundAtom::new(p.name.clone(), vec![a, b])));
                    }
                }
            }
            let mask = (start..atoms.len()).fold(0u64, |m, i| m | 1 << i);
            let (w, wb, d) = problem.weights.scaled(&p.name)?;
            scale *= num_traits::pow(d, atoms.len() - start);
            preds.push((p.name.clone(), mask, w, wb));
        }
        let index = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i as u32)).collect();
        let mut g = Grounding {
            nodes: Vec::new(),
            root: 0,
            atoms,
            index,
            preds,
            scale,
        };
        let sentence = problem.full_sentence();
        g.root = g.ground(&sentence, problem, [None, None])?;
        Ok(g)
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn ground(&mut self, f: &Formula, p: &Problem, env: [Option<usize>; 2]) -> Result<usize> {
        let slot = |v: Var| if v == Var::X { 0 } else { 1 };
        Ok(match f {
            Formula::Top => self.push(Node::Const(true)),
            Formula::Bottom => self.push(Node::Const(false)),
            Formula::Atom(a) => {
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    args.push(match t {
                        Term::Var(v) => env[slot(*v)].ok_or_else(|| Error::UnboundVariable(v.name().into()))?,
                        Term::Const(c) => p
                            .domain
                            .index_of(c)
                            .ok_or_else(|| Error::invalid(format!("unknown constant `{c}`")))?,
                    });
                }
                let key = GroundAtom::new(a.pred.clone(), args);
                let i = *self
                    .index
                    .get(&key)
                    .ok_or_else(|| Error::UnknownPredicate(a.pred.clone()))?;
                self.push(Node::Atom(i))
            }
            Formula::Not(a) => {
                let c = self.ground(a, p, env)?;
                self.push(Node::Not(c))
            }
            Formula::And(a, b) => {
                let (x, y) = (self.ground(a, p, env)?, self.ground(b, p, env)?);
                self.push(Node::And(vec![x, y]))
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.ground(a, p, env)?, self.ground(b, p, env)?);
                self.push(Node::Or(vec![x, y]))
            }
            Formula::Implies(a, b) => {
                let x = self.ground(a, p, env)?;
                let nx = self.push(Node::Not(x));
                let y = self.ground(b, p, env)?;
                self.push(Node::Or(vec![nx, y]))
            }
            Formula::Iff(a, b) => {
                let (x, y) = (self.ground(a, p, env)?, self.ground(b, p, env)?);
                self.push(Node::Iff(x, y))
            }
            Formula::Quant { q, var, body } => {
                let mut kids = Vec::new();
                for e in 0..p.domain.len() {
                    let mut inner = env;
                    inner[slot(*var)] = Some(e);
                    kids.push(self.ground(body, p, inner)?);
                }
                match q {
                    Quantifier::Forall => self.push(Node::And(kids)),
                    Quantifier::Exists => self.push(Node::Or(kids)),
                    Quantifier::ExistsExactly(k) => self.push(Node::Exactly(kids, *k)),
                }
            }
            Formula::Card { pred, cmp, threshold } => {
                let mask = self
                    .preds
                    .iter()
                    .find(|x| x.0 == *pred)
                    .map(|x| x.1)
                    .ok_or_else(|| Error::UnknownPredicate(pred.clone()))?;
                self.push(Node::Card(mask, *cmp, *threshold))
            }
        })
    }

    fn eval(&self, i: usize, val: u64, known: u64) -> u8 {
        match &self.nodes[i] {
            Node::Const(b) => *b as u8,
            Node::Atom(a) => {
                if known >> a & 1 == 0 {
                    U
                } else {
                    (val >> a & 1) as u8
                }
            }
            Node::Not(c) => match self.eval(*c, val, known) {
                U => U,
                v => 1 - v,
            },
            Node::And(kids) => {
                let mut out = T;
                for &k in kids {
                    match self.eval(k, val, known) {
                        F => return F,
                        U => out = U,
                        _ => {}
                    }
                }
                out
            }
            Node::Or(kids) => {
                let mut out = F;
                for &k in kids {
                    match self.eval(k, val, known) {
                        T => return T,
                        U => out = U,
                        _ => {}
                    }
                }
                out
            }
            Node::Iff(a, b) => match (self.eval(*a, val, known), self.eval(*b, val, known)) {
                (U, _) | (_, U) => U,
                (x, y) => (x == y) as u8,
            },
            Node::Exactly(kids, k) => {
                let (mut t, mut u) = (0u32, 0u32);
                for &c in kids {
                    match self.eval(c, val, known) {
                        T => t += 1,
                        U => u += 1,
                        _ => {}
                    }
                }
                if t > *k || t + u < *k {
                    F
                } else if u == 0 {
                    T
                } else {
                    U
                }
            }
            Node::Card(mask, cmp, q) => {
                let lo = (val & known & mask).count_ones() as u64;
                let hi = lo + (!known & mask).count_ones() as u64;
                if *cmp == Comparator::Eq {
                    if *q < lo || *q > hi {
                        F
                    } else if lo == hi {
                        T
                    } else {
                        U
                    }
                } else {
                    // The other comparators are monotone in the count.
                    let (a, b) = (cmp.holds(lo, *q), cmp.holds(hi, *q));
                    if a == b {
                        a as u8
                    } else {
                        U
                    }
                }
            }
        }
    }

    /// Models as atom bitmasks in increasing numeric order.
    pub fn models(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.dfs(0, 0, 0, &mut out);
        out.sort_unstable();
        out
    }

    fn dfs(&self, i: usize, val: u64, known: u64, out: &mut Vec<u64>) {
        match self.eval(self.root, val, known) {
            F => return,
            T => {
                // Every completion is a model.
                let free: Vec<usize> = (i..self.atoms.len()).collect();
                for bits in 0u64..(1 << free.len()) {
                    let mut v = val;
                    for (j, &a) in free.iter().enumerate() {
                        if bits >> j & 1 == 1 {
                            v |= 1 << a;
                        }
                    }
                    out.push(v);
                }
                return;
            }
            _ => {}
        }
        if i == self.atoms.len() {
            return;
        }
        let known = known | 1 << i;
        self.dfs(i + 1, val, known, out);
        self.dfs(i + 1, val | 1 << i, known, out);
    }

    /// Scaled integer weight of a model mask.
    pub fn scaled_weight(&self, mask: u64) -> BigInt {
        let mut acc = BigInt::one();
        for (_, m, w, wb) in &self.preds {
            let t = (mask & m).count_ones() as usize;
            let f = m.count_ones() as usize - t;
            acc *= num_traits::pow(w.clone(), t) * num_traits::pow(wb.clone(), f);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn structure(&self, mask: u64) -> Structure {
        Structure::from_atoms(
            (0..self.atoms.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| self.atoms[i].clone()),
        )
    }

    /// The mask of a structure over this vocabulary; `None` if it mentions
    /// other atoms.
    pub fn mask_of(&self, s: &Structure) -> Option<u64> {
        let mut m = 0u64;
        for a in s.atoms() {
            m |= 1 << self.index.get(a)?;
        }
        Some(m)
    }

    /// True-atom count of each named predicate in a model mask.
    pub fn counts(&self, mask: u64, preds: &[String]) -> Vec<u64> {
        preds
            .iter()
            .map(|p| {
                self.preds
                    .iter()
                    .find(|x| x.0 == *p)
                    .map_or(0, |x| (mask & x.1).count_ones() as u64)
            })
            .collect()
    }
}

pub fn enumerate_models(problem: &Problem) -> Result<Vec<Structure>> {
    enumerate_models_bounded(problem, DEFAULT_BOUND)
}

pub fn enumerate_models_bounded(problem: &Problem, bound: usize) -> Result<Vec<Structure>> {
    let g = Grounding::new(problem, bound)?;
    Ok(g.models().into_iter().map(|m| g.structure(m)).collect())
}

/// Σ of model weights.
pub fn brute_count(problem: &Problem) -> Result<BigRational> {
    brute_count_bounded(problem, DEFAULT_BOUND)
}

pub fn brute_count_bounded(problem: &Problem, bound: usize) -> Result<BigRational> {
    let g = Grounding::new(problem, bound)?;
    let total: BigInt = g.models().into_iter().map(|m| g.scaled_weight(m)).sum();
    Ok(BigRational::new(total, g.scale.clone()))
}

/// The exact distribution over models.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    grounding: Grounding,
    weights: HashMap<u64, BigInt>,
    order: Vec<u64>,
    total: BigInt,
}

impl ExactDistribution {
    pub fn probability(&self, s: &Structure) -> BigRational {
        self.grounding
            .mask_of(s)
            .and_then(|m| self.weights.get(&m))
            .map_or_else(BigRational::zero, |w| BigRational::new(w.clone(), self.total.clone()))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `(model, probability)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Structure, BigRational)> + '_ {
        self.order.iter().map(|m| {
            (
                self.grounding.structure(*m),
                BigRational::new(self.weights[m].clone(), self.total.clone()),
            )
        })
    }

    /// Index of a model in canonical order.
    pub fn rank(&self, s: &Structure) -> Option<usize> {
        let m = self.grounding.mask_of(s)?;
        self.order.binary_search(&m).ok()
    }

    /// Distribution of the counts of `preds`.
    pub fn marginal(&self, preds: &[String]) -> BTreeMap<Vec<u64>, BigRational> {
        let mut out: BTreeMap<Vec<u64>, BigInt> = BTreeMap::new();
        for m in &self.order {
            *out.entry(self.grounding.counts(*m, preds)).or_insert_with(BigInt::zero) += &self.weights[m];
        }
        out.into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(k, w)| (k, BigRational::new(w, self.total.clone())))
            .collect()
    }
}

pub fn exact_distribution(problem: &Problem) -> Result<ExactDistribution> {
    exact_distribution_bounded(problem, DEFAULT_BOUND)
}

pub fn exact_distribution_bounded(problem: &Problem, bound: usize) -> Result<ExactDistribution> {
    let grounding = Grounding::new(problem, bound)?;
    let mut weights = HashMap::new();
    let mut order = Vec::new();
    let mut total = BigInt::zero();
    for m in grounding.models() {
        let w = grounding.scaled_weight(m);
        if w.is_zero() {
            continue;
        }
        total += &w;
        weights.insert(m, w);
        order.push(m);
    }
    if total.is_zero() {
        return Err(Error::Unsatisfiable("no model has positive weight".into()));
    }
    Ok(ExactDistribution {
        grounding,
        weights,
        order,
        total,
    })
}

/// Counting and sampling by enumeration, for tiny problems and empty domains.
#[derive(Debug)]
pub struct BruteEngine {
    problem: Problem,
    vocabulary: Vocabulary,
    tracked: Vec<String>,
    dist: Option<ExactDistribution>,
    wfomc: BigRational,
}

impl BruteEngine {
    pub fn new(problem: Problem, tracked: &[String]) -> Result<Self> {
        let vocabulary = problem.vocabulary();
        let mut tracked: Vec<String> = problem
            .full_sentence()
            .cardinality_predicates()
            .into_iter()
            .chain(tracked.iter().cloned())
            .collect();
        tracked.sort();
        tracked.dedup();
        let (dist, wfomc) = match exact_distribution(&problem) {
            Ok(d) => {
                let w = BigRational::new(d.total.clone(), d.grounding.scale.clone());
                (Some(d), w)
            }
            Err(Error::Unsatisfiable(_)) => (None, BigRational::zero()),
            Err(e) => return Err(e),
        };
        Ok(BruteEngine {
            problem,
            vocabulary,
            tracked,
            dist,
            wfomc,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }
}

impl Engine for BruteEngine {
    fn skeleton(&self) -> &Vocabulary {
        &self.vocabulary
    }

    fn domain_size(&self) -> usize {
        self.problem.domain.len()
    }

    fn tracked(&self) -> &[String] {
        &self.tracked
    }

    fn scaled_total(&self) -> BigInt {
        self.dist.as_ref().map_or_else(BigInt::zero, |d| d.total.clone())
    }

    fn wfomc(&self) -> BigRational {
        self.wfomc.clone()
    }

    fn count_terms(&self) -> BTreeMap<Vec<u64>, BigInt> {
        let mut out = BTreeMap::new();
        if let Some(d) = &self.dist {
            for m in &d.order {
                *out.entry(d.grounding.counts(*m, &self.tracked)).or_insert_with(BigInt::zero) += &d.weights[m];
            }
        }
        out
    }

    fn sample(&self, rng: &mut ChaCha8Rng, _opts: &SamplerOptions) -> Result<Sample> {
        let d = self
            .dist
            .as_ref()
            .ok_or_else(|| Error::Unsatisfiable("the weighted model count is zero".into()))?;
        let w: Vec<BigInt> = d.order.iter().map(|m| d.weights[m].clone()).collect();
        let i = draw_discrete(&w, rng)?;
        let model = d.grounding.structure(d.order[i]);
        Ok(Sample {
            reduced: model.clone(),
            model,
            probability: BigRational::new(w[i].clone(), d.total.clone()),
            conservation_checks: 0,
        })
    }
}

/// A point of domain recursion: the current cells of the remaining
/// elements, the atoms already committed, the chosen element `e_t` and the
/// 2-tables `A_t` between `e_t` (as `x`) and every other element in order.
#[derive(Clone, Debug)]
pub struct RecursionPoint {
    pub cells: Vec<(Block, OneType)>,
    pub consumed: Vec<u64>,
    pub t: usize,
    pub tables: Vec<TwoTable>,
}

/// Both sides of the reduction identity at one recursion point.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    /// `A_t` is coherent and witnesses every obligation of `e_t`.
    pub valid: bool,
    /// Brute-force weight of all completions that agree with `A_t`.
    pub lhs: BigInt,
    /// `⟨A_t⟩·⟨τ_t⟩·WFOMC` of the reduced problem, by brute force.
    pub rhs_brute: BigInt,
    /// The same with the reduced count from the lifted `W_{n,Υ}`.
    pub rhs_lifted: BigInt,
    /// Brute-force and lifted counts of the unreduced point.
    pub total_brute: BigInt,
    pub total_lifted: BigInt,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        let totals = self.total_brute == self.total_lifted;
        if self.valid {
            totals && self.lhs == self.rhs_brute && self.lhs == self.rhs_lifted
        } else {
            totals && self.lhs.is_zero()
        }
    }
}

/// Weighted count of all 2-table assignments over a list of cells, by
/// enumerating one coherent table per pair. `fixed` pins the tables of
/// chosen pairs.
fn brute_cells<W: Semiring>(
    c: &Compiled<W>,
    branch: usize,
    cells: &[(Block, OneType)],
    consumed: &[u64],
    fixed: &HashMap<(usize, usize), TwoTable>,
) -> BigInt {
    let ctx = &c.branches[branch].ctx;
    let ts = &ctx.types;
    let n = cells.len();
    if cells.iter().any(|&(_, tau)| !ctx.is_valid(tau)) {
        return BigInt::zero();
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let options: Vec<Vec<TwoTable>> = pairs
        .iter()
        .map(|&(i, j)| match fixed.get(&(i, j)) {
            Some(&pi) if ts.coherent(cells[i].1, cells[j].1, pi) => vec![pi],
            Some(_) => vec![],
            None => ctx.coherent(cells[i].1, cells[j].1).to_vec(),
        })
        .collect();
    let mut base = BigInt::one();
    let mut counts = consumed.to_vec();
    for &(_, tau) in cells {
        base *= ctx.one_weight_int(tau);
        for (a, &x) in counts.iter_mut().zip(ctx.one_counts(tau)) {
            *a += x as u64;
        }
    }
    let mut total = BigInt::zero();
    let mut choice = vec![0usize; pairs.len()];
    if options.iter().any(|o| o.is_empty()) {
        return total;
    }
    loop {
        let mut w = base.clone();
        let mut cnt = counts.clone();
        let mut open: Vec<Block> = cells
            .iter()
            .map(|&(b, tau)| {
                (0..ts.num_existentials())
                    .filter(|&k| ts.witnesses_self(tau, k))
                    .fold(b, |acc, k| acc & !(1 << k))
            })
            .collect();
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let pi = options[p][choice[p]];
            w *= ctx.table_weight_int(pi);
            for (a, &x) in cnt.iter_mut().zip(ctx.table_counts(pi)) {
                *a += x as u64;
            }
            for k in 0..ts.num_existentials() {
                if ts.witnesses_forward(pi, k) {
                    open[i] &= !(1 << k);
                }
                if ts.witnesses_forward(ts.swap(pi), k) {
                    open[j] &= !(1 << k);
                }
            }
        }
        if open.iter().all(|&b| b == 0) && c.upsilon.holds(&cnt) {
            total += w;
        }
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    total
}

fn lifted_cells<W: Semiring>(c: &Compiled<W>, branch: usize, cells: &[(Block, OneType)], consumed: &[u64]) -> BigInt {
    let b = &c.branches[branch];
    let mut map: BTreeMap<Cell, u32> = BTreeMap::new();
    for &(block, tau) in cells {
        *map.entry(b.ctx.cell(block, tau)).or_insert(0) += 1;
    }
    let config: Vec<(Cell, u32)> = map.into_iter().collect();
    c.w_n_cc(b, &config, consumed)
}

/// Checks `WFOMC(Γ̃ | A_t) = ⟨A_t⟩·⟨τ_t⟩·WFOMC(Γ̃′)` at a recursion point,
/// where `Γ̃′` has `e_t` removed, every partner relaxed and the committed
/// atoms added to the residual constraint.
pub fn check_reduction_identity<W: Semiring>(
    c: &Compiled<W>,
    branch: usize,
    point: &RecursionPoint,
) -> Result<IdentityCheck> {
    let ctx = &c.branches[branch].ctx;
    let ts = &ctx.types;
    let n = point.cells.len();
    if point.t >= n || point.tables.len() + 1 != n {
        return Err(Error::invalid("recursion point does not match its cells"));
    }
    let (bt, tau_t) = point.cells[point.t];
    let others: Vec<usize> = (0..n).filter(|&i| i != point.t).collect();

    let mut fixed = HashMap::new();
    for (&j, &pi) in others.iter().zip(&point.tables) {
        let key = if point.t < j { ((point.t, j), pi) } else { ((j, point.t), ts.swap(pi)) };
        fixed.insert(key.0, key.1);
    }
    let lhs = brute_cells(c, branch, &point.cells, &point.consumed, &fixed);
    let total_brute = brute_cells(c, branch, &point.cells, &point.consumed, &HashMap::new());
    let total_lifted = lifted_cells(c, branch, &point.cells, &point.consumed);

    let coherent = ctx.is_valid(tau_t)
        && others
            .iter()
            .zip(&point.tables)
            .all(|(&j, &pi)| ts.coherent(tau_t, point.cells[j].1, pi));
    let witnessed = (0..ts.num_existentials()).all(|k| {
        bt >> k & 1 == 0 || ts.witnesses_self(tau_t, k) || point.tables.iter().any(|&pi| ts.witnesses_forward(pi, k))
    });
    let mut consumed = point.consumed.clone();
    for (a, &x) in consumed.iter_mut().zip(ctx.one_counts(tau_t)) {
        *a += x as u64;
    }
    let mut weight = ctx.one_weight_int(tau_t).clone();
    let mut reduced = Vec::new();
    for (&j, &pi) in others.iter().zip(&point.tables) {
        weight *= ctx.table_weight_int(pi);
        for (a, &x) in consumed.iter_mut().zip(ctx.table_counts(pi)) {
            *a += x as u64;
        }
        let (b, tau) = point.cells[j];
        reduced.push((ts.relax(b, pi), tau));
    }
    let feasible = c.upsilon.status(&consumed) != Some(false);
    let valid = coherent && witnessed && feasible;
    let (rhs_brute, rhs_lifted) = if valid {
        (
            &weight * brute_cells(c, branch, &reduced, &consumed, &HashMap::new()),
            &weight * lifted_cells(c, branch, &reduced, &consumed),
        )
    } else {
        (BigInt::zero(), BigInt::zero())
    };
    Ok(IdentityCheck {
        valid,
        lhs,
        rhs_brute,
        rhs_lifted,
        total_brute,
        total_lifted,
    })
}

/// A random recursion point over `n` elements of a branch: valid 1-types,
/// random blocks, small committed counts, and `A_t` drawn among coherent
/// tables (or any table, a quarter of the time).
pub fn random_recursion_point<W: Semiring>(
    c: &Compiled<W>,
    branch: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Option<RecursionPoint> {
    let ctx = &c.branches.get(branch)?.ctx;
    let ts = &ctx.types;
    let valid = ctx.valid_types();
    if valid.is_empty() || n == 0 {
        return None;
    }
    let full = ts.full_block();
    let cells: Vec<(Block, OneType)> = (0..n)
        .map(|_| (rng.gen_range(0..=full) & full, valid[rng.gen_range(0..valid.len())]))
        .collect();
    let consumed = (0..c.upsilon.tracked().len()).map(|_| rng.gen_range(0..3)).collect();
    let t = rng.gen_range(0..n);
    let any = rng.gen_bool(0.25);
    let tables = (0..n)
        .filter(|&j| j != t)
        .map(|j| {
            let co = ctx.coherent(cells[t].1, cells[j].1);
            if any || co.is_empty() {
                rng.gen_range(0..ts.num_two_tables() as TwoTable)
            } else {
                co[rng.gen_range(0..co.len())]
            }
        })
        .collect();
    Some(RecursionPoint {
        cells,
        consumed,
        t,
        tables,
    })
}

/// Tally of [`identity_sweep`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdentitySweep {
    pub points: usize,
    /// Points whose `A_t` is coherent, witnesses `e_t` and keeps `Υ` feasible.
    pub valid: usize,
}

/// Checks the reduction identity at `per_branch` random recursion points of
/// every nullary branch, with cardinality predicates kept symbolic.
pub fn identity_sweep(problem: &Problem, per_branch: usize, rng: &mut ChaCha8Rng) -> Result<IdentitySweep> {
    let n = normalize(problem)?;
    let upsilon = Upsilon::new(n.constraint.clone(), &[]);
    let spec = PolySpec {
        vars: upsilon.tracked().len(),
        caps: Some(upsilon.caps()),
    };
    let c = Compiled::<SymbolicWeight>::build(n, upsilon, spec)?;
    let mut out = IdentitySweep::default();
    for b in 0..c.branches.len() {
        for _ in 0..per_branch {
            let Some(point) = random_recursion_point(&c, b, c.n, rng) else {
                continue;
            };
            let r = check_reduction_identity(&c, b, &point)?;
            if !r.holds() {
                return Err(Error::internal(format!("reduction identity fails at {point:?}: {r:?}")));
            }
            out.points += 1;
            out.valid += r.valid as usize;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_problem;

    #[test]
    fn graph_counts() {
        let src = "domain: 5\nsentence: (forall x forall y: (~E(x,x) & (E(x,y) -> E(y,x)))) & (forall x exists y: E(x,y))";
        let p = parse_problem(src).unwrap();
        assert_eq!(enumerate_models(&p).unwrap().len(), 768);
        assert_eq!(brute_count(&p.with_size(1)).unwrap(), BigRational::zero());
    }

    #[test]
    fn weighted_unary() {
        let p = parse_problem("domain: 1\nsentence: forall x: (P(x) | ~P(x))\nweight: P 2 1").unwrap();
        let d = exact_distribution(&p).unwrap();
        let probs: Vec<BigRational> = d.iter().map(|(_, q)| q).collect();
        assert_eq!(probs, vec![BigRational::new(1.into(), 3.into()), BigRational::new(2.into(), 3.into())]);
    }

    #[test]
    fn cardinality_pruning_matches_filtering() {
        let p = parse_problem("domain: 3\nsentence: forall x forall y: (E(x,y) -> E(y,x))\nconstraint: |E| = 2").unwrap();
        // One undirected off-diagonal edge, or two loops.
        assert_eq!(enumerate_models(&p).unwrap().len(), 6);
    }

    #[test]
    fn bound_is_enforced() {
        let p = parse_problem("domain: 6\nsentence: forall x forall y: (E(x,y) | ~E(x,y))").unwrap();
        assert!(matches!(enumerate_models(&p), Err(Error::BoundExceeded { atoms: 36, .. })));
    }

    #[test]
    fn unsatisfiable_distribution_is_an_error() {
        let p = parse_problem("domain: 2\nsentence: forall x: (P(x) & ~P(x))").unwrap();
        assert!(enumerate_models(&p).unwrap().is_empty());
        assert!(exact_distribution(&p).is_err());
    }
}
