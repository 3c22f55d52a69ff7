//! Named sampling and counting strategies, selected at runtime.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{brute_count, BruteEngine};
use crate::parser::Problem;
use crate::sampler::{Sample, SamplerOptions};
use crate::wfomc::{compile, Engine};

pub trait SamplerStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Compiles `problem` once; the result draws any number of samples.
    fn prepare(&self, problem: &Problem) -> Result<Box<dyn PreparedSampler>>;
}

pub trait PreparedSampler: Send + Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Sample>;
    fn wfomc(&self) -> BigRational;
}

pub trait CounterStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn count(&self, problem: &Problem) -> Result<BigRational>;
}

struct EngineSampler {
    engine: Box<dyn Engine>,
    opts: SamplerOptions,
}

impl PreparedSampler for EngineSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Sample> {
        self.engine.sample(rng, &self.opts)
    }

    fn wfomc(&self) -> BigRational {
        self.engine.wfomc()
    }
}

/// Lifted sampling by domain recursion.
pub struct Wms {
    pub opts: SamplerOptions,
}

impl SamplerStrategy for Wms {
    fn name(&self) -> &'static str {
        if self.opts.exists_projection {
            "wms-exists-projection"
        } else {
            "wms"
        }
    }

    fn description(&self) -> &'static str {
        if self.opts.exists_projection {
            "lifted sampler enumerating classes of 2-tables, refined per element"
        } else {
            "lifted sampler: 1-type configuration, then domain recursion"
        }
    }

    fn prepare(&self, problem: &Problem) -> Result<Box<dyn PreparedSampler>> {
        let engine = compile(problem)?;
        if engine.scaled_total() == 0.into() {
            return Err(Error::Unsatisfiable("the weighted model count is zero".into()));
        }
        Ok(Box::new(EngineSampler {
            engine,
            opts: self.opts,
        }))
    }
}

/// Draws from the enumerated model set. Small problems only.
pub struct Ideal;

impl SamplerStrategy for Ideal {
    fn name(&self) -> &'static str {
        "ideal"
    }

    fn description(&self) -> &'static str {
        "enumerates every model, then draws one by weight"
    }

    fn prepare(&self, problem: &Problem) -> Result<Box<dyn PreparedSampler>> {
        let engine = BruteEngine::new(problem.clone(), &[])?;
        if engine.scaled_total() == 0.into() {
            return Err(Error::Unsatisfiable("the problem has no model of positive weight".into()));
        }
        Ok(Box::new(EngineSampler {
            engine: Box::new(engine),
            opts: SamplerOptions::default(),
        }))
    }
}

pub struct Lifted;

impl CounterStrategy for Lifted {
    fn name(&self) -> &'static str {
        "lifted"
    }

    fn description(&self) -> &'static str {
        "cell-configuration counting, polynomial in the domain size"
    }

    fn count(&self, problem: &Problem) -> Result<BigRational> {
        Ok(compile(problem)?.wfomc())
    }
}

pub struct Brute;

impl CounterStrategy for Brute {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn description(&self) -> &'static str {
        "enumeration of all structures"
    }

    fn count(&self, problem: &Problem) -> Result<BigRational> {
        brute_count(problem)
    }
}

#[derive(Default)]
pub struct Registry {
    samplers: BTreeMap<&'static str, Box<dyn SamplerStrategy>>,
    counters: BTreeMap<&'static str, Box<dyn CounterStrategy>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        let mut r = Registry::new();
        r.register_sampler(Box::new(Wms {
            opts: SamplerOptions::default(),
        }));
        r.register_sampler(Box::new(Wms {
            opts: SamplerOptions {
                exists_projection: true,
                ..SamplerOptions::default()
            },
        }));
        r.register_sampler(Box::new(Ideal));
        r.register_counter(Box::new(Lifted));
        r.register_counter(Box::new(Brute));
        r
    }

    pub fn register_sampler(&mut self, s: Box<dyn SamplerStrategy>) {
        self.samplers.insert(s.name(), s);
    }

    pub fn register_counter(&mut self, c: Box<dyn CounterStrategy>) {
        self.counters.insert(c.name(), c);
    }

    pub fn sampler(&self, name: &str) -> Result<&dyn SamplerStrategy> {
        self.samplers
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::invalid(format!("unknown sampler `{name}`; known: {}", self.sampler_names().join(", "))))
    }

    pub fn counter(&self, name: &str) -> Result<&dyn CounterStrategy> {
        self.counters
            .get(name)
            .map(|c| c.as_ref())
            .ok_or_else(|| Error::invalid(format!("unknown counter `{name}`; known: {}", self.counter_names().join(", "))))
    }

    pub fn sampler_names(&self) -> Vec<&'static str> {
        self.samplers.keys().copied().collect()
    }

    pub fn counter_names(&self) -> Vec<&'static str> {
        self.counters.keys().copied().collect()
    }
}
