//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdicts print even when every criterion passes.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{oracle_size, presets, random_constrained, random_instance};
use wfoms_core::logic::evaluate;
use wfoms_core::normalizer::normalize;
use wfoms_core::oracle::{
    brute_count, enumerate_models, enumerate_models_bounded, exact_distribution, identity_sweep,
};
use wfoms_core::parser::Problem;
use wfoms_core::presets::find;
use wfoms_core::sampler::{run_rng, SamplerOptions};
use wfoms_core::stats::{count_distribution, ks_test, uniform_reference};
use wfoms_core::wfomc::compile;

const ALPHA: f64 = 0.05;
const SEED: u64 = 20240917;
const RETRY_SEED: u64 = 77_001;
const RANDOM_INSTANCES: usize = 20;
const AUDITED_RUNS: u64 = 100;
const VALIDITY_SAMPLES: u64 = 10_000;
const MLN_SAMPLES: u64 = 100_000;
const IDENTITY_POINTS: usize = 200;
/// Reduced problems add a binary predicate per counting witness; the
/// pruned enumeration handles these sizes quickly.
const FIBER_BOUND: usize = 40;
const SCALING_BUDGET: Duration = Duration::from_secs(60);
const SCALING_RATIO: f64 = 50.0;

type Verdict = Result<String, String>;

fn int(x: u64) -> BigRational {
    BigRational::from_integer(x.into())
}

fn problem(name: &str, n: usize, k: Option<u32>) -> Result<Problem, String> {
    find(name)
        .and_then(|p| p.problem(n, k))
        .map_err(|e| format!("{name}: {e}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_counts() -> Verdict {
    let table: &[(&str, Option<u32>, &[(usize, u64)])] = &[
        ("graphs-no-isolated", None, &[(1, 0), (2, 1), (3, 4), (4, 41), (5, 768)]),
        ("kregular", Some(2), &[(5, 12)]),
        ("functions", None, &[(1, 1), (2, 4), (3, 27), (4, 256)]),
        ("permutations", None, &[(1, 1), (2, 2), (3, 6), (4, 24), (5, 120)]),
        ("derangements", None, &[(4, 9), (5, 44)]),
    ];
    let mut checked = 0;
    for &(name, k, rows) in table {
        for &(n, want) in rows {
            let p = problem(name, n, k)?;
            let lifted = compile(&p).map_err(|e| e.to_string())?.wfomc();
            let oracle = brute_count(&p).map_err(|e| e.to_string())?;
            ensure(oracle == int(want), || format!("{name} n={n}: oracle {oracle}, pinned {want}"))?;
            ensure(lifted == oracle, || format!("{name} n={n}: lifted {lifted}, oracle {oracle}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} counts equal (lifted = oracle = pinned)"))
}

fn audited(p: &Problem, label: &str, seed: u64) -> Result<usize, String> {
    let lifted = compile(p).map_err(|e| e.to_string())?;
    let oracle = brute_count(p).map_err(|e| e.to_string())?;
    ensure(lifted.wfomc() == oracle, || format!("{label}: wfomc {} vs oracle {oracle}", lifted.wfomc()))?;
    if oracle == int(0) {
        return Ok(0);
    }
    let dist = exact_distribution(p).map_err(|e| e.to_string())?;
    for r in 0..AUDITED_RUNS {
        let opts = SamplerOptions {
            check_conservation: true,
            exists_projection: r % 2 == 1,
        };
        let s = lifted
            .sample(&mut run_rng(seed, r), &opts)
            .map_err(|e| format!("{label} run {r}: {e}"))?;
        let want = dist.probability(&s.model);
        ensure(s.probability == want, || format!("{label} run {r}: audit {} vs oracle {want}", s.probability))?;
    }
    Ok(AUDITED_RUNS as usize)
}

fn oracle_equality() -> Verdict {
    let mut runs = 0;
    let mut instances = 0;
    for p in presets() {
        let n = oracle_size(p, 4, None);
        runs += audited(&p.problem(n, None).map_err(|e| e.to_string())?, p.name, SEED)?;
        instances += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut satisfiable = 0;
    let mut i = 0;
    while satisfiable < RANDOM_INSTANCES {
        let p = random_instance(&mut rng, 1 + i % 4, i);
        let r = audited(&p, &format!("random #{i}"), SEED + i as u64)?;
        satisfiable += (r > 0) as usize;
        runs += r;
        instances += 1;
        i += 1;
    }
    Ok(format!(
        "{instances} instances ({} unsatisfiable, counts still equal); {runs} audited samples exact",
        i - RANDOM_INSTANCES
    ))
}

fn validity_size(name: &str) -> usize {
    match name {
        "functions" | "functions-nofix" | "permutations" | "derangements" => 6,
        _ => 5,
    }
}

/// Criteria 3 and 4 share their runs.
fn validity_and_conservation() -> (Verdict, Verdict) {
    let mut samples = 0u64;
    let mut checks = 0u64;
    let mut per_preset = Vec::new();
    for p in presets() {
        let n = validity_size(p.name);
        let prob = match p.problem(n, None) {
            Ok(x) => x,
            Err(e) => return (Err(e.to_string()), Err("not run".into())),
        };
        let engine = match compile(&prob) {
            Ok(e) => e,
            Err(e) => return (Err(e.to_string()), Err("not run".into())),
        };
        let sentence = prob.full_sentence();
        let mut preset_checks = 0;
        for r in 0..VALIDITY_SAMPLES {
            let s = match engine.sample(&mut run_rng(SEED, r), &SamplerOptions::default()) {
                Ok(s) => s,
                Err(e) => {
                    let msg = format!("{} run {r}: {e}", p.name);
                    return (Err(msg.clone()), Err(msg));
                }
            };
            match evaluate(&sentence, &s.model, &prob.domain) {
                Ok(true) => {}
                Ok(false) => return (Err(format!("{} run {r}: sample is not a model", p.name)), Ok("n/a".into())),
                Err(e) => return (Err(e.to_string()), Ok("n/a".into())),
            }
            samples += 1;
            preset_checks += s.conservation_checks;
        }
        if preset_checks == 0 {
            return (Ok(String::new()), Err(format!("{}: no conservation identity was checked", p.name)));
        }
        checks += preset_checks;
        per_preset.push(format!("{}@{n}", p.name));
    }
    (
        Ok(format!("{samples} samples all satisfy their sentence ({})", per_preset.join(", "))),
        Ok(format!("{checks} conservation identities held exactly over the same runs")),
    )
}

fn ranks_against_uniform(name: &str, n: usize, samples: u64, seed: u64) -> Result<(bool, String), String> {
    let p = problem(name, n, None)?;
    let dist = exact_distribution(&p).map_err(|e| e.to_string())?;
    let engine = compile(&p).map_err(|e| e.to_string())?;
    let mut ranks = Vec::with_capacity(samples as usize);
    for r in 0..samples {
        let s = engine.sample(&mut run_rng(seed, r), &SamplerOptions::default()).map_err(|e| e.to_string())?;
        let rank = dist.rank(&s.model).ok_or_else(|| format!("{name}: sample outside the model set"))?;
        ranks.push(vec![rank as u64]);
    }
    let rep = ks_test(&ranks, &uniform_reference(dist.len()), ALPHA).map_err(|e| e.to_string())?;
    Ok((
        rep.pass,
        format!("{name}@{n} {:.4}<={:.4}", rep.max_deviation, rep.epsilon),
    ))
}

/// Runs a statistical check, retrying once with a fresh seed.
fn with_retry(f: impl Fn(u64) -> Result<(bool, String), String>) -> Result<String, String> {
    let (pass, detail) = f(SEED)?;
    if pass {
        return Ok(detail);
    }
    let (pass, retry) = f(RETRY_SEED)?;
    if pass {
        Ok(format!("{retry} (after retry; first {detail})"))
    } else {
        Err(format!("{detail}; retry {retry}"))
    }
}

fn uniformity() -> Verdict {
    let cases: &[(&str, usize, u64)] = &[
        ("graphs-no-isolated", 5, 76_800),
        ("kregular", 5, 1_200),
        ("permutations", 5, 12_000),
        ("derangements", 5, 4_400),
        ("functions", 4, 25_600),
        ("functions-nofix", 4, 8_100),
    ];
    let mut parts = Vec::new();
    for &(name, n, samples) in cases {
        parts.push(with_retry(|seed| ranks_against_uniform(name, n, samples, seed))?);
    }
    Ok(parts.join(", "))
}

fn mln_counts(name: &str, seed: u64) -> Result<(bool, String), String> {
    let preset = find(name).map_err(|e| e.to_string())?;
    let p = preset.problem(5, None).map_err(|e| e.to_string())?;
    let tracked = preset.tracked();
    let reference = count_distribution(&p, &tracked).map_err(|e| e.to_string())?;
    let engine = compile(&p).map_err(|e| e.to_string())?;
    let mut counts = Vec::with_capacity(MLN_SAMPLES as usize);
    for r in 0..MLN_SAMPLES {
        let s = engine.sample(&mut run_rng(seed, r), &SamplerOptions::default()).map_err(|e| e.to_string())?;
        counts.push(tracked.iter().map(|t| s.model.count(t) as u64).collect::<Vec<u64>>());
    }
    let rep = ks_test(&counts, &reference, ALPHA).map_err(|e| e.to_string())?;
    Ok((
        rep.pass,
        format!("{name}@5 {:.4}<={:.4}", rep.max_deviation, rep.epsilon),
    ))
}

fn mln_conformity() -> Verdict {
    let a = with_retry(|seed| mln_counts("friends-smokers", seed))?;
    let b = with_retry(|seed| mln_counts("employment", seed))?;
    Ok(format!("{a}, {b}"))
}

fn identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut total, mut valid, mut constrained) = (0, 0, 0);
    let mut i = 0;
    while total < IDENTITY_POINTS {
        let with_constraint = i % 2 == 1;
        let n = 2 + i % 3;
        let p = if with_constraint {
            random_constrained(&mut rng, n.min(3), i)
        } else {
            random_instance(&mut rng, n, i)
        };
        i += 1;
        let sweep = identity_sweep(&p, 3, &mut rng).map_err(|e| format!("{p:?}: {e}"))?;
        total += sweep.points;
        valid += sweep.valid;
        if p.constraint != wfoms_core::logic::Formula::Top {
            constrained += sweep.points;
        }
    }
    Ok(format!(
        "{total} points exact ({valid} with a valid A_t, {constrained} under cardinality constraints)"
    ))
}

fn counting_fibers() -> Verdict {
    let mut checked = 0;
    let mut cases: Vec<(String, Problem, u32)> = Vec::new();
    for n in 1..=3 {
        for k in 1..=2 {
            cases.push((format!("kregular k={k}"), problem("kregular", n, Some(k))?, k));
        }
        for name in ["functions", "functions-nofix", "permutations", "derangements"] {
            cases.push((name.into(), problem(name, n, None)?, 1));
        }
    }
    for (label, p, k) in cases {
        let n = p.domain.len() as u32;
        let norm = normalize(&p).map_err(|e| e.to_string())?;
        let reduced = norm.as_problem().map_err(|e| e.to_string())?;
        let source = enumerate_models(&p).map_err(|e| e.to_string())?.len();
        let target = enumerate_models_bounded(&reduced, FIBER_BOUND).map_err(|e| format!("{label} n={n}: {e}"))?.len();
        // Every counting conjunct of these presets has the same k.
        let fiber = BigUint::from(if k == 2 { 2u32 } else { 1 }).pow(n);
        ensure(norm.trace.multiplicity() == fiber, || {
            format!("{label} n={n}: recorded fiber {}, expected {fiber}", norm.trace.multiplicity())
        })?;
        ensure(BigUint::from(target) == norm.trace.multiplicity() * BigUint::from(source), || {
            format!("{label} n={n}: reduced {target}, source {source}, fiber {}", norm.trace.multiplicity())
        })?;
        checked += 1;
    }
    Ok(format!("{checked} (preset, n) pairs: reduced count = (k!)^n x source count"))
}

fn timed_sample(n: usize) -> Result<Duration, String> {
    let p = problem("friends-smokers", n, None)?;
    let start = Instant::now();
    let engine = compile(&p).map_err(|e| e.to_string())?;
    engine
        .sample(&mut run_rng(SEED, n as u64), &SamplerOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(start.elapsed())
}

fn scaling() -> Verdict {
    let best = |n| -> Result<Duration, String> { (0..3).map(|_| timed_sample(n)).collect::<Result<Vec<_>, _>>().map(|v| v.into_iter().min().unwrap()) };
    let t10 = best(10)?;
    let t20 = best(20)?;
    let ratio = t20.as_secs_f64() / t10.as_secs_f64().max(1e-9);
    let detail = format!("n=20 {:.3}s (< {}s), n=20/n=10 ratio {ratio:.1} (< {SCALING_RATIO})", t20.as_secs_f64(), SCALING_BUDGET.as_secs());
    if t20 < SCALING_BUDGET && ratio < SCALING_RATIO {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn report(id: usize, name: &str, budget: Duration, elapsed: Duration, v: &Verdict) -> bool {
    let in_time = elapsed <= budget;
    let (ok, detail) = match v {
        Ok(d) => (in_time, d.as_str()),
        Err(d) => (false, d.as_str()),
    };
    println!(
        "criterion {id} [{}] {name}: {detail} ({:.1}s of {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn main() -> ExitCode {
    let mins = |m: u64| Duration::from_secs(60 * m);
    let timed = |f: &dyn Fn() -> Verdict| {
        let start = Instant::now();
        let v = f();
        (v, start.elapsed())
    };
    let mut ok = true;
    let (v, t) = timed(&exact_counts);
    ok &= report(1, "exact counts", mins(1), t, &v);
    let (v, t) = timed(&oracle_equality);
    ok &= report(2, "oracle distribution equality", mins(5), t, &v);

    let start = Instant::now();
    let (validity, conservation) = validity_and_conservation();
    let t = start.elapsed();
    ok &= report(3, "validity", mins(10), t, &validity);
    ok &= report(4, "conservation", mins(10), t, &conservation);

    let rest: [(usize, &str, u64, fn() -> Verdict); 5] = [
        (5, "uniformity", 15, uniformity),
        (6, "MLN count-distribution conformity", 15, mln_conformity),
        (7, "reduction identities", 5, identities),
        (8, "counting-quantifier fibers", 2, counting_fibers),
        (9, "scaling smoke", 3, scaling),
    ];
    for (id, name, budget, f) in rest {
        let (v, t) = timed(&f);
        ok &= report(id, name, mins(budget), t, &v);
    }
    if ok {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria fail");
        ExitCode::FAILURE
    }
}
