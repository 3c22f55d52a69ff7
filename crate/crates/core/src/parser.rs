//! Problem files, formulas, MLN sources and model rendering.
//!
//! ```text
//! # graphs without isolated vertices
//! domain: 5
//! sentence: forall x: forall y: (~E(x,x) & (E(x,y) -> E(y,x)))
//! sentence: forall x: exists y: E(x,y)
//! weight: E 1 1
//! constraint: |E| >= 4
//! ```
//!
//! Precedence from tightest to loosest: `~`, `&`, `|`, `->` (right
//! associative), `<->`. A quantifier prefix ends with `:` and its body
//! extends as far right as possible.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::formula::{self, Atom, Comparator, Formula, Quantifier, Term, Var};
use crate::logic::{Domain, GroundAtom, Structure, Vocabulary, WeightMap, RESERVED_PREFIX};

/// A weighted sampling problem: sentence, weights, domain and cardinality
/// constraints `Υ` (a Boolean combination of `|P| ⋈ q` atoms).
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub sentence: Formula,
    pub weights: WeightMap,
    pub domain: Domain,
    pub constraint: Formula,
}

impl Problem {
    /// Validates the pieces and fills in default weights.
    pub fn new(sentence: Formula, weights: WeightMap, domain: Domain, constraint: Formula) -> Result<Self> {
        if !sentence.free_vars().is_empty() {
            let v = sentence.free_vars().into_iter().next().unwrap();
            return Err(Error::UnboundVariable(v.name().to_string()));
        }
        if !constraint.is_cardinality_only() {
            return Err(Error::invalid("constraints may only combine cardinality atoms"));
        }
        let vocab = Vocabulary::of_formula(&sentence)?;
        for p in constraint.cardinality_predicates() {
            if !vocab.contains(&p) {
                return Err(Error::UnknownPredicate(p));
            }
        }
        for p in sentence.cardinality_predicates() {
            if !vocab.contains(&p) {
                return Err(Error::UnknownPredicate(p));
            }
        }
        for (name, _) in weights.iter() {
            if !vocab.contains(name) {
                return Err(Error::UnknownPredicate(name.clone()));
            }
        }
        sentence.walk_atoms(&mut |a| {
            for t in &a.args {
                if let Term::Const(c) = t {
                    if domain.index_of(c).is_none() {
                        return Err(Error::invalid(format!("constant `{c}` is not a domain element")));
                    }
                }
            }
            Ok(())
        })?;
        let mut weights = weights;
        weights.complete(&vocab);
        Ok(Problem {
            sentence,
            weights,
            domain,
            constraint,
        })
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::of_formula(&self.sentence).expect("validated at construction")
    }

    /// Sentence and constraints as one formula, for model checking.
    pub fn full_sentence(&self) -> Formula {
        match &self.constraint {
            Formula::Top => self.sentence.clone(),
            c => formula::and(self.sentence.clone(), c.clone()),
        }
    }

    /// The same problem over a domain of `n` elements labelled `1..=n`.
    pub fn with_size(&self, n: usize) -> Problem {
        Problem {
            domain: Domain::of_size(n),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Not,
    And,
    Bar,
    Implies,
    Iff,
    Cmp(Comparator),
    Slash,
    Dot,
    /// `exists_{=k}`
    ExistsExactly(u32),
    End,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
    len: usize,
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, m: String| Error::Syntax {
        line,
        column: col0 + i,
        message: m,
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let push = |out: &mut Vec<Spanned>, tok: Tok, len: usize| {
            out.push(Spanned {
                tok,
                line,
                col: col0 + start,
                len,
            })
        };
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            if word == "exists_" && chars.get(j) == Some(&'{') {
                // exists_{=k}
                let mut k = j + 1;
                if chars.get(k) != Some(&'=') {
                    return Err(err(k, "expected `=` in `exists_{=k}`".into()));
                }
                k += 1;
                let ds = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                if ds == k {
                    return Err(err(k, "expected a count in `exists_{=k}`".into()));
                }
                let n: String = chars[ds..k].iter().collect();
                let n: u32 = n.parse().map_err(|_| err(ds, "count too large".into()))?;
                if chars.get(k) != Some(&'}') {
                    return Err(err(k, "expected `}` in `exists_{=k}`".into()));
                }
                push(&mut out, Tok::ExistsExactly(n), k + 1 - i);
                i = k + 1;
                continue;
            }
            push(&mut out, Tok::Ident(word), j - i);
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let n = word.parse().map_err(|_| err(i, "integer too large".into()))?;
            push(&mut out, Tok::Int(n), j - i);
            i = j;
            continue;
        }
        let two: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        let (tok, len) = if two.starts_with("<->") {
            (Tok::Iff, 3)
        } else if two.starts_with("->") {
            (Tok::Implies, 2)
        } else if two.starts_with("<=") {
            (Tok::Cmp(Comparator::Le), 2)
        } else if two.starts_with(">=") {
            (Tok::Cmp(Comparator::Ge), 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '~' | '!' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Bar,
                '=' => Tok::Cmp(Comparator::Eq),
                '<' => Tok::Cmp(Comparator::Lt),
                '>' => Tok::Cmp(Comparator::Gt),
                '/' => Tok::Slash,
                '.' => Tok::Dot,
                _ => return Err(err(i, format!("unexpected character `{c}`"))),
            };
            (t, 1)
        };
        push(&mut out, tok, len);
        i += len;
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        col: col0 + chars.len(),
        len: 0,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    allow_reserved: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let s = &self.toks[self.pos];
        Err(Error::Syntax {
            line: s.line,
            column: s.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implication()?;
            lhs = formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn quantifier(&mut self) -> Result<Option<Quantifier>> {
        Ok(match self.peek().clone() {
            Tok::Ident(w) if w == "forall" => Some(Quantifier::Forall),
            Tok::Ident(w) if w == "exists" => Some(Quantifier::Exists),
            Tok::ExistsExactly(k) => Some(Quantifier::ExistsExactly(k)),
            _ => None,
        })
    }

    fn variable(&mut self) -> Result<Var> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "x" => {
                self.bump();
                Ok(Var::X)
            }
            Tok::Ident(w) if w == "y" => {
                self.bump();
                Ok(Var::Y)
            }
            Tok::Ident(w) => self.error(format!("variable `{w}` is not one of x, y")),
            _ => self.error("expected a variable"),
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(formula::not(self.unary()?));
        }
        if let Some(q) = self.quantifier()? {
            self.bump();
            let var = self.variable()?;
            let body = if *self.peek() == Tok::Colon {
                self.bump();
                self.iff()?
            } else if self.quantifier()?.is_some() {
                self.unary()?
            } else {
                return self.error("expected `:` after quantified variable");
            };
            return Ok(Formula::Quant {
                q,
                var,
                body: Box::new(body),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Bar => {
                self.bump();
                let pred = self.pred_name()?;
                self.expect(Tok::Bar, "`|` closing the cardinality atom")?;
                let cmp = match self.bump() {
                    Tok::Cmp(c) => c,
                    _ => {
                        self.pos -= 1;
                        return self.error("expected a comparator");
                    }
                };
                let threshold = match self.bump() {
                    Tok::Int(n) => n,
                    _ => {
                        self.pos -= 1;
                        return self.error("expected a natural threshold");
                    }
                };
                Ok(Formula::Card { pred, cmp, threshold })
            }
            Tok::Ident(w) if w == "true" => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(w) if w == "false" => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::Ident(_) => {
                let pred = self.pred_name()?;
                self.expect(Tok::LParen, "`(` after predicate name")?;
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.term()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen, "`)` closing the atom")?;
                if args.len() > 2 {
                    return self.error("predicates have arity at most 2");
                }
                Ok(Formula::Atom(Atom { pred, args }))
            }
            _ => self.error("expected a formula"),
        }
    }

    fn pred_name(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(w) => {
                if ["x", "y", "true", "false", "forall", "exists"].contains(&w.as_str()) {
                    return self.error(format!("`{w}` cannot name a predicate"));
                }
                if !self.allow_reserved && w.starts_with(RESERVED_PREFIX) {
                    return self.error(format!("names starting with `{RESERVED_PREFIX}` are reserved"));
                }
                self.bump();
                Ok(w)
            }
            _ => self.error("expected a predicate name"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.bump() {
            Tok::Ident(w) if w == "x" => Ok(Term::Var(Var::X)),
            Tok::Ident(w) if w == "y" => Ok(Term::Var(Var::Y)),
            Tok::Ident(w) => Ok(Term::Const(w)),
            Tok::Int(n) => Ok(Term::Const(n.to_string())),
            _ => {
                self.pos -= 1;
                self.error("expected a term")
            }
        }
    }

    /// Rational weight: integer, `p/q`, or decimal.
    fn number(&mut self) -> Result<BigRational> {
        if let Tok::Ident(w) = self.peek() {
            if w == "exp" {
                return self.error(
                    "exp(..) is not exact; supply a rational approximation such as 122140/100000",
                );
            }
        }
        let whole = match self.bump() {
            Tok::Int(n) => n,
            _ => {
                self.pos -= 1;
                return self.error("expected a nonnegative rational");
            }
        };
        match self.peek() {
            Tok::Slash => {
                self.bump();
                match self.bump() {
                    Tok::Int(0) => {
                        self.pos -= 1;
                        self.error("zero denominator")
                    }
                    Tok::Int(d) => Ok(BigRational::new(whole.into(), d.into())),
                    _ => {
                        self.pos -= 1;
                        self.error("expected a denominator")
                    }
                }
            }
            Tok::Dot => {
                self.bump();
                let (digits, frac) = match self.toks[self.pos].tok.clone() {
                    Tok::Int(f) => {
                        // The token length keeps leading zeros: `0.05`.
                        let len = self.toks[self.pos].len;
                        self.bump();
                        (len, f)
                    }
                    _ => return self.error("expected digits after `.`"),
                };
                let scale = num_traits::pow(BigInt::from(10), digits);
                let num = BigInt::from(whole) * &scale + BigInt::from(frac);
                Ok(BigRational::new(num, scale))
            }
            _ => Ok(BigRational::from_integer(whole.into())),
        }
    }

    fn at_end(&self) -> bool {
        *self.peek() == Tok::End
    }
}

fn parser_for(src: &str, line: usize, col: usize, allow_reserved: bool) -> Result<Parser> {
    Ok(Parser {
        toks: lex(src, line, col)?,
        pos: 0,
        allow_reserved,
    })
}

fn formula_at(src: &str, line: usize, col: usize, allow_reserved: bool) -> Result<Formula> {
    let mut p = parser_for(src, line, col, allow_reserved)?;
    let f = p.iff()?;
    if !p.at_end() {
        return p.error("unexpected trailing input");
    }
    Ok(f)
}

/// Parses one formula.
pub fn parse_formula(text: &str) -> Result<Formula> {
    formula_at(text, 1, 1, false)
}

/// Like [`parse_formula`] but accepts reserved `__` names, for rendering
/// round trips of normalized sentences.
pub fn parse_formula_internal(text: &str) -> Result<Formula> {
    formula_at(text, 1, 1, true)
}

fn split_directive(line: &str) -> Option<(&str, &str, usize)> {
    let trimmed = line.trim_start();
    let offset = line.len() - trimmed.len();
    let colon = trimmed.find(':')?;
    let key = &trimmed[..colon];
    if key.chars().all(|c| c.is_ascii_alphabetic()) {
        Some((key, &trimmed[colon + 1..], offset + colon + 2))
    } else {
        None
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_domain(rest: &str, line: usize, col: usize) -> Result<Domain> {
    let mut p = parser_for(rest, line, col, false)?;
    let d = match p.bump() {
        Tok::Int(n) => Domain::of_size(n as usize),
        Tok::LBrace => {
            let mut labels = Vec::new();
            if *p.peek() != Tok::RBrace {
                loop {
                    match p.bump() {
                        Tok::Ident(w) if w != "x" && w != "y" => labels.push(w),
                        Tok::Int(n) => labels.push(n.to_string()),
                        _ => {
                            p.pos -= 1;
                            return p.error("expected a domain element");
                        }
                    }
                    if *p.peek() == Tok::Comma {
                        p.bump();
                    } else {
                        break;
                    }
                }
            }
            p.expect(Tok::RBrace, "`}`")?;
            Domain::from_labels(labels).map_err(|e| Error::Syntax {
                line,
                column: col,
                message: e.to_string(),
            })?
        }
        _ => {
            p.pos = 0;
            return p.error("expected a domain size or `{a, b, ...}`");
        }
    };
    if !p.at_end() {
        return p.error("unexpected trailing input");
    }
    Ok(d)
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<Problem> {
    parse_problem_with(text, false)
}

fn parse_problem_with(text: &str, allow_reserved: bool) -> Result<Problem> {
    let mut domain = None;
    let mut sentences = Vec::new();
    let mut constraints = Vec::new();
    let mut weights = WeightMap::new();
    let mut weight_lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, rest, col)) = split_directive(line) else {
            return Err(Error::Syntax {
                line: line_no,
                column: 1,
                message: "expected `domain:`, `sentence:`, `weight:` or `constraint:`".into(),
            });
        };
        match key {
            "domain" => {
                if domain.is_some() {
                    return Err(Error::Syntax {
                        line: line_no,
                        column: 1,
                        message: "duplicate domain".into(),
                    });
                }
                domain = Some(parse_domain(rest, line_no, col)?);
            }
            "sentence" => sentences.push(formula_at(rest, line_no, col, allow_reserved)?),
            "constraint" => {
                let f = formula_at(rest, line_no, col, allow_reserved)?;
                if !f.is_cardinality_only() {
                    return Err(Error::Syntax {
                        line: line_no,
                        column: col,
                        message: "constraints may only combine cardinality atoms".into(),
                    });
                }
                constraints.push(f);
            }
            "weight" => {
                let mut p = parser_for(rest, line_no, col, allow_reserved)?;
                let pred = p.pred_name()?;
                let w = p.number()?;
                let wb = p.number()?;
                if !p.at_end() {
                    return p.error("unexpected trailing input");
                }
                weight_lines.push((line_no, pred.clone()));
                weights.set(&pred, w, wb)?;
            }
            other => {
                return Err(Error::Syntax {
                    line: line_no,
                    column: 1,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    let domain = domain.ok_or_else(|| Error::Syntax {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing `domain:` line".into(),
    })?;
    if domain.is_empty() {
        return Err(Error::invalid("the domain must be nonempty"));
    }
    if sentences.is_empty() {
        return Err(Error::Syntax {
            line: text.lines().count().max(1),
            column: 1,
            message: "missing `sentence:` line".into(),
        });
    }
    let sentence = formula::conjunction(sentences);
    let vocab = Vocabulary::of_formula(&sentence)?;
    for (_, pred) in &weight_lines {
        if !vocab.contains(pred) {
            return Err(Error::UnknownPredicate(pred.clone()));
        }
    }
    Problem::new(sentence, weights, domain, formula::conjunction(constraints))
}

/// Renders a problem in the file grammar; `parse_problem` reads it back.
pub fn render_problem(p: &Problem) -> String {
    let mut out = String::new();
    let labels = p.domain.labels();
    let numbered = labels.iter().enumerate().all(|(i, l)| *l == (i + 1).to_string());
    if numbered {
        writeln!(out, "domain: {}", labels.len()).unwrap();
    } else {
        writeln!(out, "domain: {{{}}}", labels.join(", ")).unwrap();
    }
    for c in p.sentence.conjuncts() {
        writeln!(out, "sentence: {c}").unwrap();
    }
    for (name, (w, wb)) in p.weights.iter() {
        writeln!(out, "weight: {name} {w} {wb}").unwrap();
    }
    if p.constraint != Formula::Top {
        for c in p.constraint.conjuncts() {
            writeln!(out, "constraint: {c}").unwrap();
        }
    }
    out
}

/// Parses a problem rendered by [`render_problem`], reserved names allowed.
pub fn parse_problem_internal(text: &str) -> Result<Problem> {
    parse_problem_with(text, true)
}

/// A Markov logic network: weighted rules over a domain. `None` is a hard
/// rule (`inf`).
#[derive(Clone, Debug, PartialEq)]
pub struct MlnSource {
    pub rules: Vec<(Option<BigRational>, Formula)>,
    pub domain: Domain,
}

/// Parses lines `<weight-or-inf> <formula>` plus one `domain:` line.
pub fn parse_mln(text: &str) -> Result<MlnSource> {
    let mut domain = None;
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(("domain", rest, col)) = split_directive(line) {
            domain = Some(parse_domain(rest, line_no, col)?);
            continue;
        }
        let trimmed = line.trim_start();
        let offset = line.len() - trimmed.len() + 1;
        let (w, rest) = trimmed.split_once(char::is_whitespace).ok_or_else(|| Error::Syntax {
            line: line_no,
            column: offset,
            message: "expected `<weight> <formula>`".into(),
        })?;
        let weight = if w == "inf" {
            None
        } else {
            let mut p = parser_for(w, line_no, offset, false)?;
            let n = p.number()?;
            if !p.at_end() {
                return p.error("malformed weight");
            }
            Some(n)
        };
        let f = formula_at(rest, line_no, offset + w.len() + 1, false)?;
        rules.push((weight, f));
    }
    let domain = domain.ok_or_else(|| Error::invalid("MLN source needs a `domain:` line"))?;
    if rules.is_empty() {
        return Err(Error::invalid("MLN source has no rules"));
    }
    Ok(MlnSource { rules, domain })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

fn sorted_atoms(s: &Structure, domain: &Domain) -> Vec<String> {
    s.atoms().map(|a| a.render(domain)).collect()
}

/// Text: positive atoms sorted and space separated. JSON: `{"model": [...]}`.
pub fn render_model(s: &Structure, domain: &Domain, format: Format) -> String {
    let atoms = sorted_atoms(s, domain);
    match format {
        Format::Text => atoms.join(" "),
        Format::Json => serde_json::json!({ "model": atoms }).to_string(),
    }
}

/// Reads back the output of [`render_model`] in either format.
pub fn parse_model(text: &str, domain: &Domain) -> Result<Structure> {
    let trimmed = text.trim();
    let items: Vec<String> = if trimmed.starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(trimmed).map_err(|e| Error::invalid(e.to_string()))?;
        v.get("model")
            .and_then(|m| m.as_array())
            .ok_or_else(|| Error::invalid("expected a `model` array"))?
            .iter()
            .map(|a| a.as_str().map(str::to_string).ok_or_else(|| Error::invalid("atoms must be strings")))
            .collect::<Result<_>>()?
    } else {
        trimmed.split_whitespace().map(str::to_string).collect()
    };
    let mut s = Structure::new();
    for item in items {
        let f = formula_at(&item, 1, 1, true)?;
        let Formula::Atom(a) = f else {
            return Err(Error::invalid(format!("`{item}` is not a ground atom")));
        };
        let args = a
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => domain
                    .index_of(c)
                    .ok_or_else(|| Error::invalid(format!("unknown element `{c}`"))),
                Term::Var(_) => Err(Error::invalid(format!("`{item}` is not ground"))),
            })
            .collect::<Result<Vec<_>>>()?;
        s.insert(GroundAtom::new(a.pred, args));
    }
    Ok(s)
}

/// Exact decimal-free rendering of a rational: `p` or `p/q`.
pub fn render_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a decimal into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let mut p = parser_for(text, 1, 1, false)?;
    let r = p.number()?;
    if !p.at_end() {
        return p.error("unexpected trailing input");
    }
    if r < BigRational::zero() {
        return Err(Error::invalid("negative weight"));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::*;
    use proptest::prelude::*;
    use Var::{X, Y};

    const GRAPH: &str = "\
# graphs without isolated vertices
domain: 5
sentence: forall x: forall y: (~E(x,x) & (E(x,y) -> E(y,x)))
sentence: forall x: exists y: E(x,y)
";

    #[test]
    fn graph_problem() {
        let p = parse_problem(GRAPH).unwrap();
        assert_eq!(p.domain.len(), 5);
        assert_eq!(p.vocabulary().arity("E"), Some(2));
        assert_eq!(p.sentence.conjuncts().len(), 2);
        assert!(p.weights.contains("E"));
    }

    #[test]
    fn unary_problem() {
        let p = parse_problem("domain: 3\nsentence: forall x: ~P(x)").unwrap();
        assert_eq!(p.sentence, forall(X, not(atom("P", &[X]))));
    }

    #[test]
    fn constraint_on_unknown_predicate() {
        let src = "domain: 3\nsentence: forall x: P(x)\nconstraint: |E| >= 4";
        assert_eq!(parse_problem(src), Err(Error::UnknownPredicate("E".into())));
    }

    #[test]
    fn counting_quantifier_chain() {
        let f = parse_formula("forall x exists_{=2} y: E(x,y)").unwrap();
        assert_eq!(f, forall(X, exists_exactly(2, Y, atom("E", &[X, Y]))));
    }

    #[test]
    fn nullary_atoms() {
        let f = parse_formula("P() & ~P()").unwrap();
        assert_eq!(f, and(atom("P", &[]), not(atom("P", &[]))));
    }

    #[test]
    fn bad_variable() {
        match parse_formula("forall z: P(z)") {
            Err(Error::Syntax { line: 1, column: 8, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence() {
        let f = parse_formula("~A(x) & B(x) | C(x) -> D(x) <-> E(x)").unwrap();
        let a = not(atom("A", &[X]));
        let expected = iff(
            implies(or(and(a, atom("B", &[X])), atom("C", &[X])), atom("D", &[X])),
            atom("E", &[X]),
        );
        assert_eq!(f, expected);
        let g = parse_formula("A() -> B() -> C()").unwrap();
        assert_eq!(g, implies(atom("A", &[]), implies(atom("B", &[]), atom("C", &[]))));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse_formula("forall x: P(x) & Q(x)").unwrap();
        assert_eq!(f, forall(X, and(atom("P", &[X]), atom("Q", &[X]))));
        let g = parse_formula("(forall x: P(x)) & Q()").unwrap();
        assert_eq!(g, and(forall(X, atom("P", &[X])), atom("Q", &[])));
    }

    #[test]
    fn cardinality_disjunction() {
        let f = parse_formula("|E| >= 3 | |P| = 1").unwrap();
        assert_eq!(f, or(card("E", Comparator::Ge, 3), card("P", Comparator::Eq, 1)));
    }

    #[test]
    fn weights() {
        let p = parse_problem("domain: 1\nsentence: forall x: P(x) | ~P(x)\nweight: P 1.25 1/3").unwrap();
        let (w, wb) = p.weights.get("P").unwrap();
        assert_eq!(w, &BigRational::new(5.into(), 4.into()));
        assert_eq!(wb, &BigRational::new(1.into(), 3.into()));
        assert_eq!(parse_rational("0.05").unwrap(), BigRational::new(1.into(), 20.into()));
        let e = parse_problem("domain: 1\nsentence: forall x: P(x)\nweight: P exp(1) 1").unwrap_err();
        assert!(e.to_string().contains("rational approximation"));
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(parse_formula("forall x: __A(x)").is_err());
        assert!(parse_formula_internal("forall x: __A(x)").is_ok());
    }

    #[test]
    fn model_rendering() {
        let d = Domain::of_size(2);
        let s = Structure::from_atoms([GroundAtom::new("E", vec![1, 0]), GroundAtom::new("E", vec![0, 1])]);
        assert_eq!(render_model(&s, &d, Format::Text), "E(1,2) E(2,1)");
        assert_eq!(render_model(&Structure::new(), &d, Format::Text), "");
        assert_eq!(render_model(&Structure::new(), &d, Format::Json), r#"{"model":[]}"#);
        for fmt in [Format::Text, Format::Json] {
            assert_eq!(parse_model(&render_model(&s, &d, fmt), &d).unwrap(), s);
        }
    }

    #[test]
    fn named_domain() {
        let p = parse_problem("domain: {alice, bob}\nsentence: Likes(alice, bob)").unwrap();
        assert_eq!(p.domain.index_of("bob"), Some(1));
        assert!(parse_problem("domain: {a}\nsentence: Likes(a, zed)").is_err());
    }

    #[test]
    fn problem_round_trip() {
        let src = "domain: 4\nsentence: forall x: exists y: (E(x,y) | P(x))\nweight: E 2 1/2\nconstraint: |E| <= 5 | |P| > 1";
        let p = parse_problem(src).unwrap();
        assert_eq!(parse_problem(&render_problem(&p)).unwrap(), p);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let var = prop_oneof![Just(Var::X), Just(Var::Y)];
        let term = prop_oneof![
            var.clone().prop_map(Term::Var),
            Just(Term::Const("a".to_string())),
            Just(Term::Const("3".to_string()))
        ];
        let leaf = prop_oneof![
            Just(Formula::Top),
            Just(Formula::Bottom),
            term.clone().prop_map(|t| Formula::Atom(Atom::new("P", vec![t]))),
            (term.clone(), term).prop_map(|(a, b)| Formula::Atom(Atom::new("E", vec![a, b]))),
            Just(Formula::Atom(Atom::new("Q", vec![]))),
            (0u64..9).prop_map(|q| card("E", Comparator::Ge, q)),
            (0u64..9).prop_map(|q| card("P", Comparator::Lt, q)),
        ];
        leaf.prop_recursive(4, 24, 2, move |inner| {
            prop_oneof![
                inner.clone().prop_map(not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| iff(a, b)),
                (var.clone(), inner.clone()).prop_map(|(v, b)| forall(v, b)),
                (var.clone(), inner.clone()).prop_map(|(v, b)| exists(v, b)),
                (0u32..3, var.clone(), inner).prop_map(|(k, v, b)| exists_exactly(k, v, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(f in arb_formula()) {
            let text = f.to_string();
            prop_assert_eq!(parse_formula(&text).unwrap(), f);
        }
    }
}
