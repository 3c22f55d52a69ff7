//! Built-in benchmark problems, written in the problem and MLN file formats.

use crate::error::{Error, Result};
use crate::normalizer::mln_to_wfoms;
use crate::parser::{parse_mln, parse_problem, Problem};

const SYMMETRIC_IRREFLEXIVE: &str = "(forall x forall y: (~E(x,x) & (E(x,y) -> E(y,x))))";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Problem,
    Mln,
}

#[derive(Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Predicates whose counts the count-distribution test tracks.
    pub tracked: &'static [&'static str],
    /// Default `k` for presets parameterized by it.
    pub default_k: Option<u32>,
    /// Rational approximations used in place of real weights.
    pub approximations: &'static [&'static str],
    kind: Kind,
    body: fn(u32) -> String,
}

pub static CATALOG: &[Preset] = &[
    Preset {
        name: "graphs-no-isolated",
        description: "undirected loopless graphs in which every vertex has a neighbour",
        tracked: &["E"],
        default_k: None,
        approximations: &[],
        kind: Kind::Problem,
        body: |_| format!("sentence: {SYMMETRIC_IRREFLEXIVE} & (forall x exists y: E(x,y))"),
    },
    Preset {
        name: "kregular",
        description: "undirected loopless k-regular graphs",
        tracked: &["E"],
        default_k: Some(2),
        approximations: &[],
        kind: Kind::Problem,
        body: |k| format!("sentence: {SYMMETRIC_IRREFLEXIVE} & (forall x exists_{{={k}}} y: E(x,y))"),
    },
    Preset {
        name: "functions",
        description: "total functions f from the domain to itself",
        tracked: &["f"],
        default_k: None,
        approximations: &[],
        kind: Kind::Problem,
        body: |_| "sentence: forall x exists_{=1} y: f(x,y)".into(),
    },
    Preset {
        name: "functions-nofix",
        description: "total functions without fixed points",
        tracked: &["f"],
        default_k: None,
        approximations: &[],
        kind: Kind::Problem,
        body: |_| "sentence: (forall x: ~f(x,x)) & (forall x exists_{=1} y: f(x,y))".into(),
    },
    Preset {
        name: "permutations",
        description: "bijections of the domain",
        tracked: &["Per"],
        default_k: None,
        approximations: &[],
        kind: Kind::Problem,
        body: |_| "sentence: (forall x exists_{=1} y: Per(x,y)) & (forall y exists_{=1} x: Per(x,y))".into(),
    },
    Preset {
        name: "derangements",
        description: "bijections without fixed points",
        tracked: &["Per"],
        default_k: None,
        approximations: &[],
        kind: Kind::Problem,
        body: |_| {
            "sentence: (forall x: ~Per(x,x)) & (forall x exists_{=1} y: Per(x,y)) & \
             (forall y exists_{=1} x: Per(x,y))"
                .into()
        },
    },
    Preset {
        name: "friends-smokers",
        description: "friends-smokers MLN in which everyone has at least one friend",
        tracked: &["fr", "sm"],
        default_k: None,
        approximations: &["exp(0.2) ~ 6107/5000 = 1.2214"],
        kind: Kind::Mln,
        body: |_| {
            "inf ~fr(x,x)\n\
             inf fr(x,y) -> fr(y,x)\n\
             1 sm(x)\n\
             6107/5000 (fr(x,y) & sm(x)) -> sm(y)\n\
             inf exists y: fr(x,y)"
                .into()
        },
    },
    Preset {
        name: "employment",
        description: "employment MLN: everyone works for someone or is a boss, softly",
        tracked: &["workfor", "boss"],
        default_k: None,
        approximations: &["exp(1.3) ~ 366929/100000 = 3.66929"],
        kind: Kind::Mln,
        body: |_| "366929/100000 exists y: (workfor(x,y) | boss(x))".into(),
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    CATALOG
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::invalid(format!("unknown preset `{name}`")))
}

impl Preset {
    pub fn is_mln(&self) -> bool {
        self.kind == Kind::Mln
    }

    /// Source text for domain size `n`, in the problem format or, for MLN
    /// presets, the MLN format.
    pub fn source(&self, n: usize, k: Option<u32>) -> String {
        let k = k.or(self.default_k).unwrap_or(1);
        format!("domain: {n}\n{}\n", (self.body)(k))
    }

    pub fn problem(&self, n: usize, k: Option<u32>) -> Result<Problem> {
        let src = self.source(n.max(1), k);
        let p = match self.kind {
            Kind::Problem => parse_problem(&src)?,
            Kind::Mln => mln_to_wfoms(&parse_mln(&src)?)?,
        };
        Ok(if n == 0 { p.with_size(0) } else { p })
    }

    pub fn tracked(&self) -> Vec<String> {
        self.tracked.iter().map(|s| s.to_string()).collect()
    }

    pub fn describe(&self, n: usize, k: Option<u32>) -> String {
        let mut out = format!("{}: {}\n", self.name, self.description);
        if let Some(d) = self.default_k {
            out.push_str(&format!("parameter k (default {d})\n"));
        }
        for a in self.approximations {
            out.push_str(&format!("weight approximation: {a}\n"));
        }
        out.push_str(if self.is_mln() { "MLN source:\n" } else { "problem source:\n" });
        out.push_str(&self.source(n, k));
        out
    }
}
