//! Random generators of families and dependency sets, and reference
//! checkers used by the property and acceptance tests.

use std::collections::{BTreeMap, BTreeSet};

use kfam_core::realisability::realisable_lp_with_lower_bounds;
use kfam_core::{Assignment, ContextSet, ContextualFamily, Fd, KRelation, MonoidKind, Value, VarSet, Variable};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

/// Variables `prefix1 … prefixN`.
pub fn vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn set(names: &[&str]) -> VarSet {
    VarSet::of(names.iter().copied())
}

/// Bounds for [`family_satisfying`].
#[derive(Debug, Clone, Copy)]
pub struct FamilyShape {
    pub domain: usize,
    pub max_rows: usize,
    /// Give up after this many search nodes.
    pub budget: usize,
}

impl Default for FamilyShape {
    fn default() -> Self {
        FamilyShape {
            domain: 2,
            max_rows: 4,
            budget: 5_000,
        }
    }
}

type Row = Vec<u8>;

/// A random locally consistent Boolean family over the maximal elements of
/// `contexts` satisfying every FD of `sigma` that lies inside a context.
///
/// Contexts are filled one at a time; each gets a relation drawn uniformly
/// from those agreeing with the earlier ones on shared variables, with
/// backtracking when none exists.
pub fn family_satisfying<R: Rng>(
    rng: &mut R,
    contexts: &[VarSet],
    sigma: &[Fd],
    shape: FamilyShape,
) -> Option<ContextualFamily> {
    let cs = ContextSet::new(contexts.iter().cloned());
    let maximal = cs.maximal().to_vec();
    let k = maximal.len();
    let mut state = Search {
        maximal: &maximal,
        sigma,
        shape,
        nodes: 0,
        chosen: Vec::with_capacity(k),
    };
    if !state.fill(rng) {
        return None;
    }
    let relations = state
        .chosen
        .iter()
        .zip(&maximal)
        .map(|(rows, ctx)| {
            let support = rows.iter().map(|row| {
                let mut s = Assignment::new();
                for (v, a) in ctx.iter().zip(row) {
                    s.bind(v.clone(), Value::new(&a.to_string()));
                }
                s
            });
            KRelation::from_support(ctx.clone(), support).expect("rows match their context")
        })
        .collect();
    Some(ContextualFamily::over(&cs, MonoidKind::B, relations).expect("generated families are consistent"))
}

struct Search<'a> {
    maximal: &'a [VarSet],
    sigma: &'a [Fd],
    shape: FamilyShape,
    nodes: usize,
    chosen: Vec<Vec<Row>>,
}

impl Search<'_> {
    fn fill<R: Rng>(&mut self, rng: &mut R) -> bool {
        let i = self.chosen.len();
        if i == self.maximal.len() {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.shape.budget {
            return false;
        }
        let ctx = &self.maximal[i];
        let positions = |s: &VarSet| -> Vec<usize> {
            ctx.iter()
                .enumerate()
                .filter(|(_, v)| s.contains(*v))
                .map(|(p, _)| p)
                .collect()
        };
        // required projections from earlier contexts
        let mut required: Vec<(Vec<usize>, BTreeSet<Row>)> = Vec::new();
        for (j, rows) in self.chosen.iter().enumerate() {
            let other = &self.maximal[j];
            let common = ctx.intersection(other);
            if common.is_empty() {
                continue;
            }
            let here = positions(&common);
            let there: Vec<usize> = other
                .iter()
                .enumerate()
                .filter(|(_, v)| common.contains(*v))
                .map(|(p, _)| p)
                .collect();
            required.push((here, project(rows.iter(), &there)));
        }
        let fds: Vec<(Vec<usize>, Vec<usize>)> = self
            .sigma
            .iter()
            .filter(|fd| fd.vars().is_subset(ctx))
            .map(|fd| (positions(fd.lhs()), positions(fd.rhs())))
            .collect();

        let candidates: Vec<Row> = all_rows(ctx.len(), self.shape.domain)
            .into_iter()
            .filter(|r| required.iter().all(|(pos, proj)| proj.contains(&pick(r, pos))))
            .collect();
        let mut options = Vec::new();
        subsets(&candidates, self.shape.max_rows, &mut |rel| {
            let ok = required.iter().all(|(pos, proj)| project(rel.iter().copied(), pos) == *proj)
                && fds.iter().all(|(l, r)| holds(rel, l, r));
            if ok {
                options.push(rel.iter().map(|r| (*r).clone()).collect::<Vec<Row>>());
            }
        });
        options.shuffle(rng);
        for rel in options.into_iter().take(3) {
            self.chosen.push(rel);
            if self.fill(rng) {
                return true;
            }
            self.chosen.pop();
            if self.nodes > self.shape.budget {
                return false;
            }
        }
        false
    }
}

fn pick(row: &Row, pos: &[usize]) -> Row {
    pos.iter().map(|&p| row[p]).collect()
}

fn project<'r, I: Iterator<Item = &'r Row>>(rows: I, pos: &[usize]) -> BTreeSet<Row> {
    rows.map(|r| pick(r, pos)).collect()
}

fn holds(rel: &[&Row], lhs: &[usize], rhs: &[usize]) -> bool {
    let mut seen: BTreeMap<Row, Row> = BTreeMap::new();
    rel.iter()
        .all(|r| seen.entry(pick(r, lhs)).or_insert_with(|| pick(r, rhs)) == &pick(r, rhs))
}

fn all_rows(width: usize, domain: usize) -> Vec<Row> {
    let mut rows: Vec<Row> = vec![vec![]];
    for _ in 0..width {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                (0..domain as u8).map(move |a| {
                    let mut r = r.clone();
                    r.push(a);
                    r
                })
            })
            .collect();
    }
    rows
}

fn subsets<'a>(rows: &'a [Row], max: usize, f: &mut dyn FnMut(&[&'a Row])) {
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

/// A random contextual `kind`-family with support `f`, if one exists.
/// Lower bounds are drawn per assignment, with non-integral bounds for Q.
pub fn realise_randomly<R: Rng>(rng: &mut R, f: &ContextualFamily, kind: MonoidKind) -> Option<ContextualFamily> {
    if kind == MonoidKind::B {
        return Some(f.support());
    }
    let mut bounds: BTreeMap<(VarSet, Assignment), BigRational> = BTreeMap::new();
    for r in f.relations() {
        for (s, _) in r.rows() {
            let denom = if kind == MonoidKind::Q { rng.gen_range(1..=3) } else { 1 };
            let b = BigRational::new(BigInt::from(rng.gen_range(1..=4 * denom)), BigInt::from(denom));
            bounds.insert((r.vars().clone(), s.clone()), b);
        }
    }
    realisable_lp_with_lower_bounds(f, kind, |c, s| bounds[&(c.clone(), s.clone())].clone())
        .expect("N and Q are supported")
}

/// A contextual N-family with support `f` and every weight in
/// `1 ..= max_weight`, found by trying all weightings. `None` when there are
/// more than `max_rows` assignments.
pub fn natural_weights_brute_force(
    f: &ContextualFamily,
    max_weight: u64,
    max_rows: usize,
) -> Option<Option<ContextualFamily>> {
    let rows: Vec<(usize, Assignment)> = f
        .relations()
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.support().into_iter().map(move |s| (i, s)))
        .collect();
    if rows.len() > max_rows {
        return None;
    }
    let mut weights = vec![1u64; rows.len()];
    loop {
        let mut relations: Vec<Vec<(Assignment, kfam_core::MonoidValue)>> = vec![Vec::new(); f.relations().len()];
        for ((i, s), w) in rows.iter().zip(&weights) {
            relations[*i].push((s.clone(), kfam_core::MonoidValue::nat(*w)));
        }
        let relations = relations
            .into_iter()
            .zip(f.relations())
            .map(|(rs, r)| KRelation::from_rows(r.vars().clone(), MonoidKind::N, rs).expect("well-formed rows"))
            .collect();
        if let Ok(g) = ContextualFamily::over(f.contexts(), MonoidKind::N, relations) {
            return Some(Some(g));
        }
        // next weighting, odometer style
        let mut k = 0;
        loop {
            if k == weights.len() {
                return Some(None);
            }
            if weights[k] < max_weight {
                weights[k] += 1;
                break;
            }
            weights[k] = 1;
            k += 1;
        }
    }
}

/// Binary contexts `x1x2, x2x3, …, xnx1`; with `private`, each context
/// also gets a variable of its own.
pub fn chordless_cycle_contexts(n: usize, private: bool) -> Vec<VarSet> {
    let xs = vars("x", n);
    (0..n)
        .map(|i| {
            let mut c = set(&[&xs[i], &xs[(i + 1) % n]]);
            if private {
                c.insert(Variable::new(&format!("p{}", i + 1)));
            }
            c
        })
        .collect()
}

/// Up to `count` random contexts of two or three variables drawn from
/// `x1 … xn`.
pub fn random_contexts<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<VarSet> {
    let xs = vars("x", n);
    let mut out: Vec<VarSet> = Vec::new();
    for _ in 0..count {
        let width = rng.gen_range(2..=3.min(n));
        let names: Vec<&str> = xs.choose_multiple(rng, width).map(String::as_str).collect();
        let c = set(&names);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Random unary FDs and CDs of the given arity over `x1 … xn`.
pub fn random_sigma<R: Rng>(rng: &mut R, n: usize, fds: usize, cds: usize, cd_arity: usize) -> Vec<Fd> {
    let xs = vars("x", n);
    let mut out = BTreeSet::new();
    for _ in 0..fds {
        let a = &xs[rng.gen_range(0..n)];
        let b = &xs[rng.gen_range(0..n)];
        if a != b {
            out.insert(Fd::unary(a, b));
        }
    }
    for _ in 0..cds {
        let names: Vec<&str> = xs
            .choose_multiple(rng, cd_arity.min(n))
            .map(String::as_str)
            .collect();
        out.insert(Fd::cd(set(&names)));
    }
    out.into_iter().collect()
}

/// Exactly `fds` distinct unary FDs and `cds` distinct CDs over
/// `x1 … xn`. The counts must be attainable.
pub fn sigma_of_size<R: Rng>(rng: &mut R, n: usize, fds: usize, cds: usize, cd_arity: usize) -> Vec<Fd> {
    let mut unary = BTreeSet::new();
    let mut contexts = BTreeSet::new();
    while unary.len() < fds {
        unary.extend(random_sigma(rng, n, 1, 0, cd_arity));
    }
    while contexts.len() < cds {
        contexts.extend(random_sigma(rng, n, 0, 1, cd_arity));
    }
    unary.into_iter().chain(contexts).collect()
}

/// `x1 -> x2 -> … -> xk -> x1` and its conclusion `x1 -> xk`.
pub fn cycle_instance(k: usize) -> (Vec<Fd>, Fd) {
    let xs = vars("x", k);
    let sigma = (0..k).map(|i| Fd::unary(&xs[i], &xs[(i + 1) % k])).collect();
    (sigma, Fd::unary(&xs[0], &xs[k - 1]))
}

/// Premises of the contextual chain rule for `x1 … xn` with witnesses
/// `c1 … c(n-1)`, and its conclusion `x1 -> xn`. Witnesses are merged at
/// random, so `c_i = c_j` instances are covered as well.
pub fn chain_instance<R: Rng>(rng: &mut R, n: usize) -> (Vec<Fd>, Fd) {
    let xs = vars("x", n);
    let pool = vars("c", n - 1);
    let cs: Vec<&String> = (0..n - 1).map(|_| &pool[rng.gen_range(0..n - 1)]).collect();
    let last = &xs[n - 1];
    let mut sigma = BTreeSet::new();
    let mut cd = |names: [&str; 3]| {
        sigma.insert(Fd::cd(set(&names)));
    };
    cd([&xs[0], cs[0], last]);
    for i in 0..n - 1 {
        cd([&xs[i], cs[i], &xs[i + 1]]);
        if i + 1 < n - 1 {
            cd([cs[i], &xs[i + 1], cs[i + 1]]);
            cd([cs[i], cs[i + 1], last]);
        }
    }
    for i in 0..n - 1 {
        sigma.insert(Fd::unary(&xs[i], &xs[i + 1]));
        if cs[i] != last {
            sigma.insert(Fd::unary(cs[i], last));
        }
    }
    (sigma.into_iter().collect(), Fd::unary(&xs[0], last))
}

/// The contexts `Vars(θ)` for `θ ∈ sigma ∪ extra`.
pub fn contexts_of<'a, I: IntoIterator<Item = &'a Fd>>(fds: I) -> Vec<VarSet> {
    fds.into_iter().map(Fd::vars).collect()
}

/// Whether one application of the contextual chain rule with at most
/// `max_n` chain variables derives `x -> y` from `sigma`, by trying every
/// instantiation of `x2 … x(n-1)` and `c1 … c(n-1)`.
///
/// FDs come from `sigma` or reflexivity; a context is available when it
/// lies inside `Vars(θ)` for some `θ ∈ sigma`.
pub fn chain_rule_brute_force(sigma: &[Fd], x: &Variable, y: &Variable, max_n: usize) -> bool {
    let names: BTreeSet<Variable> = sigma
        .iter()
        .flat_map(|fd| fd.vars().iter().cloned().collect::<Vec<_>>())
        .chain([x.clone(), y.clone()])
        .collect();
    let names: Vec<Variable> = names.into_iter().collect();
    let fd = |a: &Variable, b: &Variable| {
        a == b
            || sigma
                .iter()
                .any(|f| f.as_unary().is_some_and(|(p, q)| p == a && q == b))
    };
    let scopes: Vec<VarSet> = sigma.iter().map(Fd::vars).collect();
    let ctx = |vs: [&Variable; 3]| {
        let c: VarSet = vs.into_iter().cloned().collect();
        scopes.iter().any(|s| c.is_subset(s))
    };

    for n in 2..=max_n {
        let mut xs = vec![x; n];
        xs[n - 1] = y;
        let mut cs = vec![x; n - 1];
        if instantiate(&names, &mut xs, &mut cs, 1, &fd, &ctx) {
            return true;
        }
    }
    false
}

/// Fills `xs[1..n-1]` and `cs` in every possible way and checks items 1
/// to 5 of the rule on the complete tuple.
fn instantiate<'v>(
    names: &'v [Variable],
    xs: &mut Vec<&'v Variable>,
    cs: &mut Vec<&'v Variable>,
    next: usize,
    fd: &dyn Fn(&Variable, &Variable) -> bool,
    ctx: &dyn Fn([&Variable; 3]) -> bool,
) -> bool {
    let n = xs.len();
    let slots = (n - 2) + (n - 1);
    if next > slots {
        return rule_applies(xs, cs, fd, ctx);
    }
    for v in names {
        // items 1 and 2 prune early; the full check runs on complete tuples
        if next <= n - 2 {
            if !fd(xs[next - 1], v) {
                continue;
            }
            xs[next] = v;
        } else {
            if !fd(v, xs[n - 1]) {
                continue;
            }
            cs[next - (n - 2) - 1] = v;
        }
        if instantiate(names, xs, cs, next + 1, fd, ctx) {
            return true;
        }
    }
    false
}

fn rule_applies(
    xs: &[&Variable],
    cs: &[&Variable],
    fd: &dyn Fn(&Variable, &Variable) -> bool,
    ctx: &dyn Fn([&Variable; 3]) -> bool,
) -> bool {
    let n = xs.len();
    let last = xs[n - 1];
    // item 1
    (0..n - 1).all(|i| fd(xs[i], xs[i + 1]))
        // item 2
        && cs.iter().all(|c| fd(c, last))
        // item 3
        && ctx([xs[0], cs[0], last])
        // item 4
        && (0..n - 1).all(|i| ctx([xs[i], cs[i], xs[i + 1]]))
        && (0..n - 2).all(|i| ctx([cs[i], xs[i + 1], cs[i + 1]]))
        // item 5
        && (0..n - 2).all(|i| ctx([cs[i], cs[i + 1], last]))
}
