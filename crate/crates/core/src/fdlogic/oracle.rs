//! Exhaustive search for Boolean counterexample families within bounds.

use std::collections::{BTreeMap, BTreeSet};

use super::Fd;
use crate::error::{Error, Result};
use crate::family::{ContextSet, ContextualFamily};
use crate::relation::{Assignment, KRelation, Value, VarSet};

/// Domain size and maximal number of rows per context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBounds {
    pub domain: usize,
    pub max_rows: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            domain: 2,
            max_rows: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// No counterexample within the bounds. `conclusive` is set for unary
    /// FDs with CDs of at most two variables, at `domain >= 2` and
    /// `max_rows >= 4`, where counterexamples always fit the bounds.
    Holds { conclusive: bool },
    Counterexample(ContextualFamily),
}

/// Upper limit on candidate relations per context.
const CANDIDATE_LIMIT: usize = 2_000_000;

/// Searches all Boolean families over the contexts `Vars(θ)`,
/// `θ ∈ sigma ∪ {phi}`, with values `0 … domain-1` and at most `max_rows`
/// rows per context, for one that satisfies `sigma` and violates `phi`.
///
/// Over the Booleans two relations are consistent iff their projections
/// onto the shared variables coincide, so each candidate relation is
/// reduced to its tuple of projections onto all pairwise intersections and
/// the search backtracks over those profiles.
pub fn semantic_entails_oracle(sigma: &[Fd], phi: &Fd, bounds: OracleBounds) -> Result<OracleVerdict> {
    let conclusive = bounds.domain >= 2
        && bounds.max_rows >= 4
        && sigma
            .iter()
            .chain([phi])
            .all(|fd| fd.is_unary() || (fd.is_cd() && fd.lhs().len() <= 2));
    if phi.is_trivial() {
        return Ok(OracleVerdict::Holds { conclusive: true });
    }
    if bounds.domain == 0 || bounds.max_rows == 0 {
        return Ok(OracleVerdict::Holds { conclusive: false });
    }

    let contexts = ContextSet::new(sigma.iter().chain([phi]).map(Fd::vars));
    let maximal = contexts.maximal();
    let k = maximal.len();
    let goal = contexts.covering(&phi.vars()).expect("phi's variables form a context");

    // positions of each pairwise intersection inside context i
    let shared: Vec<Vec<Vec<usize>>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let common = maximal[i].intersection(&maximal[j]);
                    maximal[i]
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| common.contains(*v))
                        .map(|(p, _)| p)
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut options: Vec<Vec<(Profile, Vec<Row>)>> = Vec::with_capacity(k);
    for (i, ctx) in maximal.iter().enumerate() {
        let local: Vec<&Fd> = sigma.iter().filter(|fd| fd.vars().is_subset(ctx)).collect();
        let positions = |s: &VarSet| -> Vec<usize> {
            ctx.iter()
                .enumerate()
                .filter(|(_, v)| s.contains(*v))
                .map(|(p, _)| p)
                .collect()
        };
        let fds: Vec<(Vec<usize>, Vec<usize>)> = local
            .iter()
            .map(|fd| (positions(fd.lhs()), positions(fd.rhs())))
            .collect();
        let target = (i == goal).then(|| (positions(phi.lhs()), positions(phi.rhs())));

        let n_rows = bounds.domain.saturating_pow(ctx.len() as u32);
        if bounds.domain > 256 || count_subsets(n_rows, bounds.max_rows) > CANDIDATE_LIMIT {
            return Err(Error::Unsupported(format!(
                "context {ctx} has too many candidate relations for domain {} and {} rows",
                bounds.domain, bounds.max_rows
            )));
        }
        let rows = all_rows(ctx.len(), bounds.domain);
        let mut by_profile: BTreeMap<Profile, Vec<Row>> = BTreeMap::new();
        for_each_subset(&rows, bounds.max_rows, &mut |rel: &[&Row]| {
            if !fds.iter().all(|(l, r)| holds(rel, l, r)) {
                return;
            }
            if let Some((l, r)) = &target {
                if holds(rel, l, r) {
                    return;
                }
            }
            let profile: Profile = shared[i].iter().map(|pos| project(rel, pos)).collect();
            by_profile
                .entry(profile)
                .or_insert_with(|| rel.iter().map(|r| (*r).clone()).collect());
        });
        options.push(by_profile.into_iter().collect());
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    if !search(&options, &mut chosen) {
        return Ok(OracleVerdict::Holds { conclusive });
    }
    let relations = chosen
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let ctx = &maximal[i];
            let rows = options[i][o].1.iter().map(|row| {
                let mut s = Assignment::new();
                for (v, a) in ctx.iter().zip(row) {
                    s.bind(v.clone(), Value::new(&a.to_string()));
                }
                s
            });
            KRelation::from_support(ctx.clone(), rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let family = ContextualFamily::over(&contexts, crate::monoid::MonoidKind::B, relations)?;
    debug_assert!(family.satisfies_all(sigma)?);
    debug_assert!(!family.satisfies(phi)?);
    Ok(OracleVerdict::Counterexample(family))
}

type Row = Vec<u8>;
/// Projections onto the intersection with every context, in context order.
type Profile = Vec<BTreeSet<Row>>;

fn search(options: &[Vec<(Profile, Vec<Row>)>], chosen: &mut Vec<usize>) -> bool {
    let i = chosen.len();
    if i == options.len() {
        return true;
    }
    for (o, (profile, _)) in options[i].iter().enumerate() {
        let fits = chosen
            .iter()
            .enumerate()
            .all(|(j, &p)| options[j][p].0[i] == profile[j]);
        if fits {
            chosen.push(o);
            if search(options, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

fn all_rows(width: usize, domain: usize) -> Vec<Row> {
    let mut rows: Vec<Row> = vec![vec![]];
    for _ in 0..width {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                (0..domain).map(move |a| {
                    let mut r = r.clone();
                    r.push(a as u8);
                    r
                })
            })
            .collect();
    }
    rows
}

fn count_subsets(n: usize, max: usize) -> usize {
    let mut total = 0usize;
    let mut binom = 1usize;
    for k in 1..=max.min(n) {
        binom = binom.saturating_mul(n - k + 1) / k;
        total = total.saturating_add(binom);
    }
    total
}

/// Calls `f` on every nonempty subset of at most `max` rows.
fn for_each_subset<'a>(rows: &'a [Row], max: usize, f: &mut dyn FnMut(&[&'a Row])) {
    fn go<'a>(rows: &'a [Row], start: usize, max: usize, cur: &mut Vec<&'a Row>, f: &mut dyn FnMut(&[&'a Row])) {
        for i in start..rows.len() {
            cur.push(&rows[i]);
            f(cur);
            if cur.len() < max {
                go(rows, i + 1, max, cur, f);
            }
            cur.pop();
        }
    }
    go(rows, 0, max, &mut Vec::new(), f);
}

fn project(rel: &[&Row], pos: &[usize]) -> BTreeSet<Row> {
    rel.iter().map(|r| pos.iter().map(|&p| r[p]).collect()).collect()
}

fn holds(rel: &[&Row], lhs: &[usize], rhs: &[usize]) -> bool {
    let mut seen: BTreeMap<Row, Row> = BTreeMap::new();
    for r in rel {
        let key: Row = lhs.iter().map(|&p| r[p]).collect();
        let val: Row = rhs.iter().map(|&p| r[p]).collect();
        if let Some(prev) = seen.insert(key, val.clone()) {
            if prev != val {
                return false;
            }
        }
    }
    true
}
