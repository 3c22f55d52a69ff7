//! `wfoms`: exact weighted model counting and sampling from the command line.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use wfoms_core::logic::{evaluate, RESERVED_PREFIX};
use wfoms_core::normalizer::mln_to_wfoms;
use wfoms_core::oracle::{brute_count, exact_distribution, identity_sweep};
use wfoms_core::parser::{parse_mln, parse_problem, render_model, render_rational, Format, Problem};
use wfoms_core::presets::{self, CATALOG};
use wfoms_core::sampler::run_rng;
use wfoms_core::stats::{count_distribution, ks_test, uniform_reference, KsReport};
use wfoms_core::strategy::Registry;
use wfoms_core::Error;

#[derive(Parser)]
#[command(name = "wfoms", version, about = "Exact weighted model counting and sampling for FO2 with counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact weighted model count.
    Count {
        #[command(flatten)]
        input: Input,
        /// Counting strategy.
        #[arg(long, default_value = "lifted")]
        counter: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Stream models drawn exactly from the weighted distribution.
    Sample {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        draw: Draw,
        /// Check every model against the sentence before printing it.
        #[arg(long)]
        validate: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Statistical and exact self-tests.
    Test {
        #[arg(value_enum)]
        kind: TestKind,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        draw: Draw,
        /// Significance level of the KS test.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Predicates whose counts `countdist` compares; defaults to the
        /// preset's, or every predicate of a file.
        #[arg(long, value_delimiter = ',')]
        track: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Built-in benchmark problems.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Describe {
        name: String,
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long)]
        k: Option<u32>,
    },
}

#[derive(Args)]
struct Input {
    /// Problem file; `.mln` files are read as Markov logic networks.
    file: Option<PathBuf>,
    /// Built-in problem instead of a file.
    #[arg(long, conflicts_with = "file")]
    preset: Option<String>,
    /// Domain size; overrides the file's domain.
    #[arg(long)]
    size: Option<usize>,
    /// Parameter of presets that take one.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args)]
struct Draw {
    /// Number of samples.
    #[arg(short = 'n', long = "num-samples", alias = "samples", default_value_t = 1)]
    num_samples: u64,
    /// Sample `r` uses the ChaCha8 stream `r` of this seed, so output does
    /// not depend on `--jobs`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Group 2-tables by their effect on obligations and tracked counts.
    #[arg(long)]
    opt_exists_projection: bool,
    /// Sampling strategy; overrides `--opt-exists-projection`.
    #[arg(long)]
    sampler: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Text => Format::Text,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TestKind {
    Uniformity,
    Countdist,
    Oracle,
}

enum Failure {
    Core(Error),
    Usage(String),
    Io(io::Error),
    Test(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Unsatisfiable(_)) => 2,
            Failure::Core(Error::Internal(_)) | Failure::Test(_) => 3,
            Failure::Io(_) => 3,
            Failure::Core(_) | Failure::Usage(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) | Failure::Test(m) => m.clone(),
            Failure::Io(e) => format!("i/o error: {e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load(input: &Input) -> Result<(Problem, Vec<String>), Failure> {
    let (problem, tracked) = match (&input.file, &input.preset) {
        (Some(path), _) => (read_file(path)?, Vec::new()),
        (None, Some(name)) => {
            let p = presets::find(name)?;
            (p.problem(input.size.unwrap_or(5), input.k)?, p.tracked())
        }
        (None, None) => return Err(Failure::Usage("give a problem file or --preset NAME".into())),
    };
    let problem = match input.size {
        Some(n) if n != problem.domain.len() => problem.with_size(n),
        _ => problem,
    };
    Ok((problem, tracked))
}

fn read_file(path: &Path) -> Result<Problem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let problem = if path.extension().is_some_and(|e| e == "mln") {
        mln_to_wfoms(&parse_mln(&text)?)?
    } else {
        parse_problem(&text)?
    };
    Ok(problem)
}

fn sampler_name(draw: &Draw) -> String {
    match &draw.sampler {
        Some(s) => s.clone(),
        None if draw.opt_exists_projection => "wms-exists-projection".into(),
        None => "wms".into(),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {jobs} jobs: {e}")))
}

/// Draws samples `0..n` in batches, handing each batch to `emit` in order.
fn draw_samples(
    problem: &Problem,
    draw: &Draw,
    mut emit: impl FnMut(u64, wfoms_core::sampler::Sample) -> Outcome,
) -> Outcome {
    let registry = Registry::with_defaults();
    let prepared = registry.sampler(&sampler_name(draw))?.prepare(problem)?;
    let pool = pool(draw.jobs)?;
    let batch = if draw.jobs <= 1 { 1 } else { draw.jobs as u64 * 16 };
    let mut start = 0;
    while start < draw.num_samples {
        let end = (start + batch).min(draw.num_samples);
        let samples = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|r| prepared.sample(&mut run_rng(draw.seed, r)))
                .collect::<Result<Vec<_>, _>>()
        })?;
        for (r, s) in (start..end).zip(samples) {
            emit(r, s)?;
        }
        start = end;
    }
    Ok(())
}

fn count(input: &Input, counter: &str, format: OutFormat) -> Outcome {
    let (problem, _) = load(input)?;
    let registry = Registry::with_defaults();
    let w = registry.counter(counter)?.count(&problem)?;
    let text = render_rational(&w);
    match format {
        OutFormat::Text => println!("{text}"),
        OutFormat::Json => println!("{}", json!({ "wfomc": text, "size": problem.domain.len() })),
    }
    Ok(())
}

fn sample(input: &Input, draw: &Draw, validate: bool, format: OutFormat) -> Outcome {
    let (problem, _) = load(input)?;
    let sentence = problem.full_sentence();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    draw_samples(&problem, draw, |r, s| {
        if validate && !evaluate(&sentence, &s.model, &problem.domain)? {
            return Err(Failure::Test(format!("sample {r} does not satisfy the sentence")));
        }
        // Auxiliaries of the MLN reduction are not part of the user's world.
        let visible = s.model.project(|p| !p.starts_with(RESERVED_PREFIX));
        writeln!(out, "{}", render_model(&visible, &problem.domain, format.into()))?;
        out.flush()?;
        Ok(())
    })
}

fn print_report(kind: &str, label: &str, rep: &KsReport, format: OutFormat) {
    match format {
        OutFormat::Text => println!(
            "{} {kind} {label}: max deviation {:.6} vs epsilon {:.6} ({} samples, dimension {}, alpha {})",
            if rep.pass { "PASS" } else { "FAIL" },
            rep.max_deviation,
            rep.epsilon,
            rep.samples,
            rep.dimension,
            rep.alpha
        ),
        OutFormat::Json => {
            let mut v = serde_json::to_value(rep).expect("report serializes");
            v["test"] = json!(kind);
            v["problem"] = json!(label);
            println!("{v}");
        }
    }
}

fn label(input: &Input, problem: &Problem) -> String {
    let name = match (&input.preset, &input.file) {
        (Some(p), _) => p.clone(),
        (_, Some(f)) => f.display().to_string(),
        _ => "problem".into(),
    };
    format!("{name} n={}", problem.domain.len())
}

fn test(kind: TestKind, input: &Input, draw: &Draw, alpha: f64, track: &[String], format: OutFormat) -> Outcome {
    let (problem, preset_tracked) = load(input)?;
    let label = label(input, &problem);
    let report = match kind {
        TestKind::Uniformity => {
            let dist = exact_distribution(&problem)?;
            let mut ranks = Vec::with_capacity(draw.num_samples as usize);
            draw_samples(&problem, draw, |r, s| {
                let rank = dist
                    .rank(&s.model)
                    .ok_or_else(|| Failure::Test(format!("sample {r} is not a model")))?;
                ranks.push(vec![rank as u64]);
                Ok(())
            })?;
            let rep = ks_test(&ranks, &uniform_reference(dist.len()), alpha)?;
            print_report("uniformity", &label, &rep, format);
            rep
        }
        TestKind::Countdist => {
            let preds: Vec<String> = if !track.is_empty() {
                track.to_vec()
            } else if !preset_tracked.is_empty() {
                preset_tracked
            } else {
                problem.vocabulary().iter().filter(|p| p.arity > 0).map(|p| p.name).collect()
            };
            let reference = count_distribution(&problem, &preds)?;
            let mut counts = Vec::with_capacity(draw.num_samples as usize);
            draw_samples(&problem, draw, |_, s| {
                counts.push(preds.iter().map(|p| s.model.count(p) as u64).collect::<Vec<u64>>());
                Ok(())
            })?;
            let rep = ks_test(&counts, &reference, alpha)?;
            print_report("countdist", &label, &rep, format);
            rep
        }
        TestKind::Oracle => return oracle_test(&problem, &label, draw, format),
    };
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Test(format!("KS test rejected the sampler on {label}")))
    }
}

fn oracle_test(problem: &Problem, label: &str, draw: &Draw, format: OutFormat) -> Outcome {
    let registry = Registry::with_defaults();
    let lifted = registry.counter("lifted")?.count(problem)?;
    let brute = brute_count(problem)?;
    let mut failures = Vec::new();
    if lifted != brute {
        failures.push(format!(
            "count: lifted {} vs brute {}",
            render_rational(&lifted),
            render_rational(&brute)
        ));
    }
    let dist = exact_distribution(problem)?;
    let mut audited = 0u64;
    draw_samples(problem, draw, |r, s| {
        let want = dist.probability(&s.model);
        if s.probability != want {
            failures.push(format!(
                "sample {r}: audited {} vs oracle {}",
                render_rational(&s.probability),
                render_rational(&want)
            ));
        }
        audited += 1;
        Ok(())
    })?;
    let sweep = identity_sweep(problem, 20, &mut run_rng(draw.seed, u64::MAX))?;
    let pass = failures.is_empty();
    match format {
        OutFormat::Text => {
            println!(
                "{} oracle {label}: count {} (lifted = brute: {}), {audited} audited samples, {} identity points ({} valid)",
                if pass { "PASS" } else { "FAIL" },
                render_rational(&brute),
                lifted == brute,
                sweep.points,
                sweep.valid
            );
            for f in &failures {
                println!("  {f}");
            }
        }
        OutFormat::Json => println!(
            "{}",
            json!({
                "test": "oracle",
                "problem": label,
                "count": render_rational(&brute),
                "lifted": render_rational(&lifted),
                "audited": audited,
                "identity_points": sweep.points,
                "identity_valid": sweep.valid,
                "failures": failures,
                "pass": pass,
            })
        ),
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Test(format!("oracle checks failed on {label}")))
    }
}

fn preset(action: &PresetAction) -> Outcome {
    match action {
        PresetAction::List => {
            for p in CATALOG {
                println!("{:<20} {}", p.name, p.description);
            }
        }
        PresetAction::Describe { name, size, k } => {
            print!("{}", presets::find(name)?.describe(*size, *k));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Count { input, counter, format } => count(input, counter, *format),
        Command::Sample {
            input,
            draw,
            validate,
            format,
        } => sample(input, draw, *validate, *format),
        Command::Test {
            kind,
            input,
            draw,
            alpha,
            track,
            format,
        } => test(*kind, input, draw, *alpha, track, *format),
        Command::Preset { action } => preset(action),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wfoms: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
