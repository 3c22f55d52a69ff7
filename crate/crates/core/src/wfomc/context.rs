use std::sync::Arc;

use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::One;

use super::poly::Semiring;
use crate::error::{Error, Result};
use crate::logic::config::binomial;
use crate::logic::types::{Block, OneType, TwoTable, TypeSpace};

/// Index of a cell type `(block, τ)`: `block · N_u + τ`.
pub type Cell = u32;

/// A cell configuration: `(cell, count)` pairs sorted by cell, counts > 0.
pub type CellConfig = Vec<(Cell, u32)>;

/// Integer weights of one literal plus its tracked-predicate slot.
#[derive(Clone, Debug)]
pub struct LiteralWeight {
    pub w: BigInt,
    pub wbar: BigInt,
    pub tracked: Option<usize>,
}

/// Everything needed to evaluate `W_n` for one universal matrix.
#[derive(Debug)]
pub struct CountContext<W: Semiring> {
    pub types: TypeSpace,
    pub spec: W::Spec,
    valid: Vec<bool>,
    valid_list: Vec<OneType>,
    one_w: Vec<W>,
    one_int: Vec<BigInt>,
    one_counts: Vec<Vec<u32>>,
    two_w: Vec<W>,
    two_int: Vec<BigInt>,
    two_counts: Vec<Vec<u32>>,
    coherent: DashMap<(OneType, OneType), Arc<Vec<TwoTable>>>,
    pair: DashMap<(OneType, Block, OneType, Block), W>,
    cache: DashMap<CellConfig, Arc<W>>,
    use_cache: bool,
}

impl<W: Semiring> CountContext<W> {
    /// `one_lits[i]` weighs the `i`-th 1-literal; `binary[b]` weighs both
    /// `R_b(x,y)` and `R_b(y,x)`. `ntracked` is the number of polynomial
    /// variables.
    pub fn new(
        types: TypeSpace,
        one_lits: &[LiteralWeight],
        binary: &[LiteralWeight],
        ntracked: usize,
        spec: W::Spec,
    ) -> Result<Self> {
        if types.num_one_literals() > 16 || types.num_binary() > 8 {
            return Err(Error::Unsupported(format!(
                "{} one-literals and {} binary predicates exceed the type-table limits",
                types.num_one_literals(),
                types.num_binary()
            )));
        }
        let nu = types.num_one_types();
        let mut valid = vec![false; nu];
        let mut valid_list = Vec::new();
        let mut one_w = Vec::with_capacity(nu);
        let mut one_int = Vec::with_capacity(nu);
        let mut one_counts = Vec::with_capacity(nu);
        for tau in 0..nu as OneType {
            if types.valid_one_type(tau) {
                valid[tau as usize] = true;
                valid_list.push(tau);
            }
            let mut coef = BigInt::one();
            let mut exps = vec![0u32; ntracked];
            for (i, lw) in one_lits.iter().enumerate() {
                if types.one_lit(tau, i) {
                    coef *= &lw.w;
                    if let Some(t) = lw.tracked {
                        exps[t] += 1;
                    }
                } else {
                    coef *= &lw.wbar;
                }
            }
            one_w.push(W::monomial(coef.clone(), &exps, &spec));
            one_int.push(coef);
            one_counts.push(exps);
        }
        let nt = types.num_two_tables();
        let mut two_w = Vec::with_capacity(nt);
        let mut two_int = Vec::with_capacity(nt);
        let mut two_counts = Vec::with_capacity(nt);
        for pi in 0..nt as TwoTable {
            let mut coef = BigInt::one();
            let mut exps = vec![0u32; ntracked];
            for (b, lw) in binary.iter().enumerate() {
                for truth in [types.xy(pi, b), types.yx(pi, b)] {
                    if truth {
                        coef *= &lw.w;
                        if let Some(t) = lw.tracked {
                            exps[t] += 1;
                        }
                    } else {
                        coef *= &lw.wbar;
                    }
                }
            }
            two_w.push(W::monomial(coef.clone(), &exps, &spec));
            two_int.push(coef);
            two_counts.push(exps);
        }
        Ok(CountContext {
            types,
            spec,
            valid,
            valid_list,
            one_w,
            one_int,
            one_counts,
            two_w,
            two_int,
            two_counts,
            coherent: DashMap::new(),
            pair: DashMap::new(),
            cache: DashMap::new(),
            use_cache: true,
        })
    }

    /// Disables memoization of `W_n`, for cache-transparency checks.
    pub fn without_cache(mut self) -> Self {
        self.use_cache = false;
        self
    }

    pub fn num_one_types(&self) -> usize {
        self.valid.len()
    }

    pub fn cell(&self, block: Block, tau: OneType) -> Cell {
        block * self.valid.len() as u32 + tau
    }

    pub fn cell_parts(&self, cell: Cell) -> (Block, OneType) {
        let nu = self.valid.len() as u32;
        (cell / nu, cell % nu)
    }

    pub fn valid_types(&self) -> &[OneType] {
        &self.valid_list
    }

    pub fn is_valid(&self, tau: OneType) -> bool {
        self.valid[tau as usize]
    }

    pub fn one_weight(&self, tau: OneType) -> &W {
        &self.one_w[tau as usize]
    }

    pub fn one_weight_int(&self, tau: OneType) -> &BigInt {
        &self.one_int[tau as usize]
    }

    pub fn one_counts(&self, tau: OneType) -> &[u32] {
        &self.one_counts[tau as usize]
    }

    pub fn table_weight(&self, pi: TwoTable) -> &W {
        &self.two_w[pi as usize]
    }

    pub fn table_weight_int(&self, pi: TwoTable) -> &BigInt {
        &self.two_int[pi as usize]
    }

    pub fn table_counts(&self, pi: TwoTable) -> &[u32] {
        &self.two_counts[pi as usize]
    }

    /// 2-tables coherent with `(τ, τ')`, `τ` playing `x`.
    pub fn coherent(&self, tau: OneType, tau2: OneType) -> Arc<Vec<TwoTable>> {
        if let Some(v) = self.coherent.get(&(tau, tau2)) {
            return v.clone();
        }
        let list: Vec<TwoTable> = (0..self.types.num_two_tables() as TwoTable)
            .filter(|&pi| self.types.coherent(tau, tau2, pi))
            .collect();
        let list = Arc::new(list);
        self.coherent.insert((tau, tau2), list.clone());
        list
    }

    /// Sum of the weights of tables coherent with `(τa, τb)` that contain no
    /// `R_k(x,y)` for `k ∈ va` and no `R_k(y,x)` for `k ∈ vb`.
    pub fn pair_weight(&self, ta: OneType, va: Block, tb: OneType, vb: Block) -> W {
        let key = (ta, va, tb, vb);
        if let Some(w) = self.pair.get(&key) {
            return w.clone();
        }
        let mut acc = W::null(&self.spec);
        let m = self.types.num_existentials();
        for &pi in self.coherent(ta, tb).iter() {
            let blocked = (0..m).any(|k| {
                (va >> k & 1 == 1 && self.types.witnesses_forward(pi, k))
                    || (vb >> k & 1 == 1 && self.types.witnesses_forward(self.types.swap(pi), k))
            });
            if !blocked {
                acc.add_assign(&self.two_w[pi as usize]);
            }
        }
        self.pair.insert(key, acc.clone());
        acc
    }

    /// `W_n`: weighted count of structures on `Σ config` fresh elements in
    /// which each element has its cell's 1-type and witnesses every
    /// obligation of its block, by inclusion–exclusion over the obligations
    /// that are violated.
    pub fn w_n(&self, config: &[(Cell, u32)]) -> Arc<W> {
        if self.use_cache {
            if let Some(v) = self.cache.get(config) {
                return v.clone();
            }
        }
        let value = Arc::new(self.compute(config));
        if self.use_cache {
            self.cache.insert(config.to_vec(), value.clone());
        }
        value
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    fn compute(&self, config: &[(Cell, u32)]) -> W {
        let mut subs: Vec<Sub<W>> = Vec::new();
        let mut cells: Vec<(u32, std::ops::Range<usize>)> = Vec::new();
        for &(cell, cnt) in config {
            if cnt == 0 {
                continue;
            }
            let (block, tau) = self.cell_parts(cell);
            if !self.is_valid(tau) {
                return W::null(&self.spec);
            }
            let start = subs.len();
            let mut v = block;
            // All submasks of `block`, including the empty one.
            loop {
                let self_witnessed = (0..self.types.num_existentials())
                    .any(|k| v >> k & 1 == 1 && self.types.witnesses_self(tau, k));
                if !self_witnessed {
                    let sign = if v.count_ones() % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    subs.push(Sub {
                        tau,
                        v,
                        weight: self.one_w[tau as usize].scale(&sign),
                    });
                }
                if v == 0 {
                    break;
                }
                v = (v - 1) & block;
            }
            cells.push((cnt, start..subs.len()));
        }
        let k = subs.len();
        let mut r: Vec<Vec<W>> = vec![Vec::with_capacity(k); k];
        for i in 0..k {
            for j in 0..k {
                let w = if j < i {
                    r[j][i].clone()
                } else {
                    self.pair_weight(subs[i].tau, subs[i].v, subs[j].tau, subs[j].v)
                };
                r[i].push(w);
            }
        }
        let mut total = W::null(&self.spec);
        let mut chosen = Vec::new();
        let mut dfs = Dfs {
            ctx: self,
            subs: &subs,
            cells: &cells,
            r: &r,
            total: &mut total,
        };
        dfs.cell(0, W::unit(&self.spec), &mut chosen);
        total
    }
}

#[derive(Debug)]
struct Sub<W> {
    tau: OneType,
    v: Block,
    weight: W,
}

struct Dfs<'a, W: Semiring> {
    ctx: &'a CountContext<W>,
    subs: &'a [Sub<W>],
    cells: &'a [(u32, std::ops::Range<usize>)],
    r: &'a [Vec<W>],
    total: &'a mut W,
}

impl<W: Semiring> Dfs<'_, W> {
    fn cell(&mut self, ci: usize, acc: W, chosen: &mut Vec<(usize, u64)>) {
        if ci == self.cells.len() {
            self.total.add_assign(&acc);
            return;
        }
        let (cnt, range) = self.cells[ci].clone();
        if range.is_empty() {
            // Every sub-cell is self-witnessed away: only possible when the
            // block is nonempty and τ witnesses everything, which keeps the
            // empty subset. Unreachable, but harmless.
            return;
        }
        self.sub(ci, range.start, cnt as u64, acc, chosen);
    }

    fn sub(&mut self, ci: usize, s: usize, remaining: u64, acc: W, chosen: &mut Vec<(usize, u64)>) {
        let range = self.cells[ci].1.clone();
        let last = s + 1 == range.end;
        let choices: Vec<u64> = if last { vec![remaining] } else { (0..=remaining).collect() };
        for c in choices {
            let next = if c == 0 {
                acc.clone()
            } else {
                let spec = &self.ctx.spec;
                let mut f = self.subs[s].weight.pow(c, spec);
                let within = c * (c - 1) / 2;
                if within > 0 {
                    f = f.mul(&self.r[s][s].pow(within, spec), spec);
                }
                for &(t, ct) in chosen.iter() {
                    f = f.mul(&self.r[t][s].pow(ct * c, spec), spec);
                    if f.is_null() {
                        break;
                    }
                }
                let b = BigInt::from(binomial(remaining, c));
                acc.mul(&f, spec).scale(&b)
            };
            if next.is_null() {
                continue;
            }
            if c > 0 {
                chosen.push((s, c));
            }
            if last {
                self.cell(ci + 1, next, chosen);
            } else {
                self.sub(ci, s + 1, remaining - c, next, chosen);
            }
            if c > 0 {
                chosen.pop();
            }
        }
    }
}
