//! Exact sampling: nullary branch, then 1-types by cell configuration, then
//! domain recursion over 2-tables. Every draw is a single uniform integer
//! over exact integer weights, and the probability of every draw is
//! multiplied into an audit trail.

mod rng;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;

pub use rng::{draw_discrete, draw_rational, partition, run_rng};
use rng::{inverse, ratio};

use crate::error::{Error, Result};
use crate::logic::config::{configuration_space, multinomial};
use crate::logic::structure::{GroundAtom, Structure};
use crate::logic::types::{Block, OneType, TwoTable};
use crate::wfomc::{Branch, Cell, CellConfig, Compiled, Semiring};

#[derive(Clone, Copy, Debug)]
pub struct SamplerOptions {
    /// Check that candidate weights sum to the enclosing count at every
    /// domain-recursion step.
    pub check_conservation: bool,
    /// Enumerate 2-table configurations over classes of tables that differ
    /// only outside the existential and tracked predicates, then refine
    /// each element's table separately.
    pub exists_projection: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            check_conservation: true,
            exists_projection: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    /// The model over the source vocabulary.
    pub model: Structure,
    /// The model of the reduced problem it was projected from.
    pub reduced: Structure,
    /// Probability of `model` under the source distribution, as the product
    /// of the probabilities of every random choice.
    pub probability: BigRational,
    /// Number of conservation identities checked.
    pub conservation_checks: u64,
}

#[derive(Clone, Copy, Debug)]
struct Elem {
    id: usize,
    block: Block,
    tau: OneType,
}

/// A set of 2-tables treated as one option when pairing `e_t` with a cell.
#[derive(Debug)]
struct Opt {
    tables: Vec<TwoTable>,
    /// Sum of the scaled table weights.
    weight: BigInt,
    /// Obligations of `e_t` witnessed by this option.
    forward: Block,
    /// A representative for relaxing the partner.
    rep: TwoTable,
    counts: Vec<u32>,
}

/// One composition of a cell's elements over its options.
#[derive(Debug)]
struct Part {
    g: Vec<u32>,
    forward: Block,
    delta: Vec<u64>,
    factor: BigInt,
    cells: Vec<(Cell, u32)>,
}

pub(crate) fn sample_compiled<W: Semiring>(
    c: &Compiled<W>,
    rng: &mut ChaCha8Rng,
    opts: &SamplerOptions,
) -> Result<Sample> {
    let mut audit = BigRational::one();
    let mut checks = 0u64;

    let totals: Vec<BigInt> = c.branches.iter().map(|b| &b.weight * c.branch_total(b)).collect();
    let z: BigInt = totals.iter().sum();
    if z.is_zero() {
        return Err(Error::Unsatisfiable("the weighted model count is zero".into()));
    }
    let bi = draw_discrete(&totals, rng)?;
    audit *= ratio(&totals[bi], &z);
    let branch = &c.branches[bi];
    let ctx = &branch.ctx;

    let cands = c.candidates(branch);
    let weights: Vec<BigInt> = cands.iter().map(|x| x.weight.clone()).collect();
    let ci = draw_discrete(&weights, rng)?;
    audit *= ratio(&weights[ci], &(&totals[bi] / &branch.weight));
    let counts = &cands[ci].counts;
    let ids: Vec<usize> = (0..c.n).collect();
    let groups = partition(&ids, counts, rng);
    let parts: Vec<u64> = counts.iter().map(|&x| x as u64).collect();
    audit *= inverse(multinomial(&parts));

    let mut reduced = Structure::new();
    for (p, v) in &branch.assignment {
        if *v {
            reduced.insert(GroundAtom::new(p.clone(), vec![]));
        }
    }
    let full = ctx.types.full_block();
    let mut state = Vec::with_capacity(c.n);
    for (i, g) in groups.iter().enumerate() {
        let tau = ctx.valid_types()[i];
        for &id in g {
            for a in ctx.types.one_type_atoms(tau, id) {
                reduced.insert(a);
            }
            state.push(Elem { id, block: full, tau });
        }
    }
    state.sort_by_key(|e| e.id);
    let mut consumed = branch.consumed.clone();

    if opts.check_conservation {
        let config = c.initial_config(branch, counts);
        let w = c.w_n_cc(branch, &config, &consumed) * BigInt::from(multinomial(&parts));
        if w != cands[ci].weight {
            return Err(Error::internal("1-type candidate weight does not match W_n"));
        }
        checks += 1;
    }

    loop {
        if state.len() <= 1 {
            break;
        }
        if state.iter().all(|e| e.block == 0) && c.upsilon.status(&consumed) == Some(true) {
            independent_pairs(branch, &state, &mut reduced, &mut audit, rng)?;
            break;
        }
        let step = recursion_step(c, branch, &mut state, &mut consumed, &mut reduced, &mut audit, rng, opts)?;
        checks += step;
    }

    let skeleton = &c.normalized.trace.skeleton;
    let model = reduced.project(|p| skeleton.contains(p));
    let probability = audit * BigRational::from_integer(BigInt::from(c.fiber.clone()));
    Ok(Sample {
        model,
        reduced,
        probability,
        conservation_checks: checks,
    })
}

/// With no open obligations and a constraint that can no longer fail, the
/// pairs are independent: each draws a coherent table by weight.
fn independent_pairs<W: Semiring>(
    branch: &Branch<W>,
    state: &[Elem],
    reduced: &mut Structure,
    audit: &mut BigRational,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let ctx = &branch.ctx;
    for i in 0..state.len() {
        for j in i + 1..state.len() {
            let (a, b) = (state[i], state[j]);
            let tables = ctx.coherent(a.tau, b.tau);
            let w: Vec<BigInt> = tables.iter().map(|&pi| ctx.table_weight_int(pi).clone()).collect();
            let k = draw_discrete(&w, rng)
                .map_err(|_| Error::internal("pair of 1-types without a coherent 2-table"))?;
            let total: BigInt = w.iter().sum();
            *audit *= ratio(&w[k], &total);
            for atom in ctx.types.two_table_atoms(tables[k], a.id, b.id) {
                reduced.insert(atom);
            }
        }
    }
    Ok(())
}

fn options_for<W: Semiring>(branch: &Branch<W>, tau_t: OneType, tau: OneType, project: bool) -> Vec<Opt> {
    let ctx = &branch.ctx;
    let ts = &ctx.types;
    let m = ts.num_existentials();
    let forward = |pi: TwoTable| -> Block {
        (0..m).filter(|&k| ts.witnesses_forward(pi, k)).fold(0, |acc, k| acc | 1 << k)
    };
    let mut out: Vec<Opt> = Vec::new();
    let mut index: BTreeMap<(Block, Block, Vec<u32>), usize> = BTreeMap::new();
    for &pi in ctx.coherent(tau_t, tau).iter() {
        let w = ctx.table_weight_int(pi);
        if w.is_zero() {
            continue;
        }
        let fwd = forward(pi);
        let counts = ctx.table_counts(pi).to_vec();
        if project {
            let back = ts.relax(ts.full_block(), pi);
            let key = (fwd, back, counts.clone());
            if let Some(&i) = index.get(&key) {
                out[i].tables.push(pi);
                out[i].weight += w;
                continue;
            }
            index.insert(key, out.len());
        }
        out.push(Opt {
            tables: vec![pi],
            weight: w.clone(),
            forward: fwd,
            rep: pi,
            counts,
        });
    }
    out
}

fn cell_parts<W: Semiring>(branch: &Branch<W>, block: Block, tau: OneType, size: u32, opts: &[Opt]) -> Vec<Part> {
    let ctx = &branch.ctx;
    let ntr = opts.first().map_or(0, |o| o.counts.len());
    if opts.is_empty() {
        return Vec::new();
    }
    configuration_space(size as u64, opts.len())
        .map(|g| {
            let mut forward = 0;
            let mut delta = vec![0u64; ntr];
            let mut factor = BigInt::from(multinomial(&g));
            let mut cells: Vec<(Cell, u32)> = Vec::new();
            for (o, &k) in opts.iter().zip(&g) {
                if k == 0 {
                    continue;
                }
                forward |= o.forward;
                for (d, &x) in delta.iter_mut().zip(&o.counts) {
                    *d += k * x as u64;
                }
                factor *= num_traits::pow(o.weight.clone(), k as usize);
                let cell = ctx.cell(ctx.types.relax(block, o.rep), tau);
                cells.push((cell, k as u32));
            }
            Part {
                g: g.iter().map(|&x| x as u32).collect(),
                forward,
                delta,
                factor,
                cells,
            }
        })
        .collect()
}

fn merge_config(parts: &[&[(Cell, u32)]]) -> CellConfig {
    let mut map: BTreeMap<Cell, u32> = BTreeMap::new();
    for p in parts {
        for &(c, k) in p.iter() {
            *map.entry(c).or_insert(0) += k;
        }
    }
    map.into_iter().collect()
}

/// One step of domain recursion: sample every 2-table between the element
/// with the most open obligations and the rest, then relax the rest.
#[allow(clippy::too_many_arguments)]
fn recursion_step<W: Semiring>(
    c: &Compiled<W>,
    branch: &Branch<W>,
    state: &mut Vec<Elem>,
    consumed: &mut Vec<u64>,
    reduced: &mut Structure,
    audit: &mut BigRational,
    rng: &mut ChaCha8Rng,
    opts: &SamplerOptions,
) -> Result<u64> {
    let ctx = &branch.ctx;
    let ts = &ctx.types;
    let best = state.iter().map(|e| e.block.count_ones()).max().unwrap_or(0);
    let ti = state.iter().position(|e| e.block.count_ones() == best).unwrap();
    let t = state.remove(ti);

    let mut cells: BTreeMap<(Block, OneType), Vec<usize>> = BTreeMap::new();
    for e in state.iter() {
        cells.entry((e.block, e.tau)).or_default().push(e.id);
    }
    let cells: Vec<((Block, OneType), Vec<usize>)> = cells.into_iter().collect();
    let options: Vec<Vec<Opt>> = cells
        .iter()
        .map(|((_, tau), _)| options_for(branch, t.tau, *tau, opts.exists_projection))
        .collect();
    let parts: Vec<Vec<Part>> = cells
        .iter()
        .zip(&options)
        .map(|(((b, tau), ids), o)| cell_parts(branch, *b, *tau, ids.len() as u32, o))
        .collect();

    let self_witnessed = (0..ts.num_existentials())
        .filter(|&k| ts.witnesses_self(t.tau, k))
        .fold(0, |acc: Block, k| acc | 1 << k);
    let need = t.block & !self_witnessed;
    let mut base = consumed.clone();
    for (b, &x) in base.iter_mut().zip(ctx.one_counts(t.tau)) {
        *b += x as u64;
    }
    let tau_w = ctx.one_weight_int(t.tau).clone();

    // Odometer over the product of per-cell compositions.
    let mut cands: Vec<(Vec<usize>, BigInt, Vec<u64>)> = Vec::new();
    let mut total = BigInt::zero();
    if parts.iter().all(|p| !p.is_empty()) {
        let mut idx = vec![0usize; parts.len()];
        loop {
            let chosen: Vec<&Part> = idx.iter().zip(&parts).map(|(&i, p)| &p[i]).collect();
            let forward = chosen.iter().fold(0, |acc, p| acc | p.forward);
            if need & !forward == 0 {
                let mut cons = base.clone();
                for p in &chosen {
                    for (a, d) in cons.iter_mut().zip(&p.delta) {
                        *a += d;
                    }
                }
                if c.upsilon.status(&cons) != Some(false) {
                    let slices: Vec<&[(Cell, u32)]> = chosen.iter().map(|p| p.cells.as_slice()).collect();
                    let config = merge_config(&slices);
                    let w = c.w_n_cc(branch, &config, &cons);
                    if !w.is_zero() {
                        let mut w = w * &tau_w;
                        for p in &chosen {
                            w *= &p.factor;
                        }
                        total += &w;
                        cands.push((idx.clone(), w, cons));
                    }
                }
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < parts[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }

    let mut checks = 0;
    if opts.check_conservation {
        let mut all: Vec<(Cell, u32)> = vec![(ctx.cell(t.block, t.tau), 1)];
        for ((b, tau), ids) in &cells {
            all.push((ctx.cell(*b, *tau), ids.len() as u32));
        }
        let config = merge_config(&[&all]);
        let expected = c.w_n_cc(branch, &config, consumed);
        if expected != total {
            return Err(Error::internal(format!(
                "conservation violated: candidates sum to {total}, expected {expected}"
            )));
        }
        checks += 1;
    }
    if total.is_zero() {
        return Err(Error::internal("domain recursion reached a state of weight zero"));
    }

    let weights: Vec<BigInt> = cands.iter().map(|x| x.1.clone()).collect();
    let pick = draw_discrete(&weights, rng)?;
    *audit *= ratio(&weights[pick], &total);
    let (idx, _, cons) = cands.swap_remove(pick);
    *consumed = cons;

    let mut relaxed: BTreeMap<usize, Block> = BTreeMap::new();
    for (ci, (((block, _), ids), &pi)) in cells.iter().zip(&idx).enumerate() {
        let part = &parts[ci][pi];
        let parts64: Vec<u64> = part.g.iter().map(|&x| x as u64).collect();
        *audit *= inverse(multinomial(&parts64));
        let groups = partition(ids, &part.g, rng);
        for (o, members) in options[ci].iter().zip(groups) {
            for id in members {
                let table = if o.tables.len() == 1 {
                    o.tables[0]
                } else {
                    let w: Vec<BigInt> = o.tables.iter().map(|&p| ctx.table_weight_int(p).clone()).collect();
                    let k = draw_discrete(&w, rng)?;
                    *audit *= ratio(&w[k], &o.weight);
                    o.tables[k]
                };
                for a in ts.two_table_atoms(table, t.id, id) {
                    reduced.insert(a);
                }
                relaxed.insert(id, ts.relax(*block, table));
            }
        }
    }
    for e in state.iter_mut() {
        e.block = relaxed[&e.id];
    }
    Ok(checks)
}
