use crate::logic::formula::{Comparator, Formula};

/// Cardinality constraints `Υ` over a fixed list of tracked predicates.
///
/// During domain recursion the atoms already committed are kept as a
/// `consumed` count vector `c`; the residual constraint on the remaining
/// counts `d` is `Υ(d + c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Upsilon {
    formula: Formula,
    tracked: Vec<String>,
}

impl Upsilon {
    /// Tracks the predicates of `formula` plus `extra`, sorted by name.
    pub fn new(formula: Formula, extra: &[String]) -> Self {
        let mut tracked: Vec<String> = formula.cardinality_predicates().into_iter().collect();
        tracked.extend(extra.iter().cloned());
        tracked.sort();
        tracked.dedup();
        Upsilon { formula, tracked }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn tracked(&self) -> &[String] {
        &self.tracked
    }

    pub fn index(&self, pred: &str) -> Option<usize> {
        self.tracked.iter().position(|p| p == pred)
    }

    pub fn is_trivial(&self) -> bool {
        self.formula == Formula::Top
    }

    pub fn holds(&self, counts: &[u64]) -> bool {
        self.formula
            .eval_closed(&|p, cmp, q| cmp.holds(counts[self.index(p).unwrap()], q))
            .expect("constraint is cardinality-only")
    }

    /// `Υ(d + consumed)`.
    pub fn holds_shifted(&self, d: &[u32], consumed: &[u64]) -> bool {
        self.formula
            .eval_closed(&|p, cmp, q| {
                let i = self.index(p).unwrap();
                cmp.holds(d[i] as u64 + consumed[i], q)
            })
            .expect("constraint is cardinality-only")
    }

    /// `Some(v)` when `Υ(d + consumed) = v` for every `d ≥ 0`.
    pub fn status(&self, consumed: &[u64]) -> Option<bool> {
        eval3(&self.formula, &|p, cmp, q| {
            let c = consumed[self.index(p).unwrap()];
            match cmp {
                Comparator::Eq | Comparator::Le if c > q => Some(false),
                Comparator::Lt if c >= q => Some(false),
                Comparator::Ge if c >= q => Some(true),
                Comparator::Gt if c > q => Some(true),
                _ => None,
            }
        })
    }

    /// Saturation caps: one more than the largest threshold per predicate.
    pub fn caps(&self) -> Vec<u32> {
        let mut caps = vec![0u32; self.tracked.len()];
        fn walk(f: &Formula, up: &Upsilon, caps: &mut [u32]) {
            match f {
                Formula::Card { pred, threshold, .. } => {
                    let i = up.index(pred).unwrap();
                    let t = (*threshold).min(u32::MAX as u64 - 1) as u32;
                    caps[i] = caps[i].max(t + 1);
                }
                Formula::Not(a) => walk(a, up, caps),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    walk(a, up, caps);
                    walk(b, up, caps);
                }
                _ => {}
            }
        }
        walk(&self.formula, self, &mut caps);
        caps
    }
}

/// Kleene three-valued evaluation.
fn eval3(f: &Formula, atom: &dyn Fn(&str, Comparator, u64) -> Option<bool>) -> Option<bool> {
    match f {
        Formula::Top => Some(true),
        Formula::Bottom => Some(false),
        Formula::Card { pred, cmp, threshold } => atom(pred, *cmp, *threshold),
        Formula::Not(a) => eval3(a, atom).map(|v| !v),
        Formula::And(a, b) => match (eval3(a, atom), eval3(b, atom)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Formula::Or(a, b) => match (eval3(a, atom), eval3(b, atom)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Formula::Implies(a, b) => eval3(
            &Formula::Or(Box::new(Formula::Not(a.clone())), b.clone()),
            atom,
        ),
        Formula::Iff(a, b) => match (eval3(a, atom), eval3(b, atom)) {
            (Some(x), Some(y)) => Some(x == y),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    #[test]
    fn residual_status() {
        let up = Upsilon::new(parse_formula("|E| = 2 & |P| >= 1").unwrap(), &[]);
        assert_eq!(up.tracked(), &["E".to_string(), "P".to_string()]);
        assert_eq!(up.status(&[0, 0]), None);
        assert_eq!(up.status(&[3, 0]), Some(false));
        assert_eq!(up.status(&[2, 1]), None);
        let ge = Upsilon::new(parse_formula("|E| >= 2 | |P| < 1").unwrap(), &[]);
        assert_eq!(ge.status(&[2, 5]), Some(true));
        assert_eq!(ge.status(&[1, 1]), None);
        assert_eq!(up.caps(), vec![3, 2]);
        assert!(up.holds_shifted(&[1, 0], &[1, 1]));
    }
}
