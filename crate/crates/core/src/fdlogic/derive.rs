//! Derivations with replayable traces.

use std::collections::HashMap;
use std::fmt;

use super::closure::{closure, classical_closure, Index, Why};
use super::{Fd, RuleSet};
use crate::error::{Error, Result};
use crate::relation::VarSet;

/// Why a trace step holds. Antecedents are 0-based step indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Premise,
    Reflexivity,
    /// `A -> B` gives `A ∪ W -> B ∪ W`.
    Augmentation(usize),
    /// `X -> Y` and `Y -> Z` give `X -> Z`.
    Transitivity(usize, usize),
    /// Steps `x_1 -> x_2, …, x_{k-1} -> x_k, x_k -> x_1`, giving `x_1 -> x_k`.
    Cycle(Vec<usize>),
    /// Steps `x_i -> x_{i+1}`, then `c_i -> x_n`, then CDs covering the
    /// contexts the rule asks for; gives `x_1 -> x_n`.
    Chain {
        path: Vec<usize>,
        witnesses: Vec<usize>,
        contexts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub fd: Fd,
    pub why: Justification,
}

/// A derivation; the last step is the goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTrace {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub derivable: bool,
    pub trace: Option<DerivationTrace>,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[usize]| {
            xs.iter()
                .map(|j| (j + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Justification::Premise => f.write_str("premise"),
            Justification::Reflexivity => f.write_str("reflexivity"),
            Justification::Augmentation(j) => write!(f, "augmentation({})", j + 1),
            Justification::Transitivity(j, k) => write!(f, "transitivity({},{})", j + 1, k + 1),
            Justification::Cycle(xs) => write!(f, "cycle({})", list(xs)),
            Justification::Chain {
                path,
                witnesses,
                contexts,
            } => {
                let all: Vec<usize> = path.iter().chain(witnesses).chain(contexts).copied().collect();
                write!(f, "chain({})", list(&all))
            }
        }
    }
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{}. {}  [{}]", i + 1, s.fd, s.why)?;
        }
        Ok(())
    }
}

/// Builds a trace, emitting each FD at most once.
struct Builder {
    steps: Vec<Step>,
    seen: HashMap<Fd, usize>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            steps: Vec::new(),
            seen: HashMap::new(),
        }
    }

    fn push(&mut self, fd: Fd, why: Justification) -> usize {
        if let Some(&i) = self.seen.get(&fd) {
            return i;
        }
        self.steps.push(Step { fd: fd.clone(), why });
        self.seen.insert(fd, self.steps.len() - 1);
        self.steps.len() - 1
    }
}

fn unary_trace(idx: &Index, c: &super::closure::Closure, sigma: &[Fd], goal: (usize, usize)) -> DerivationTrace {
    let mut b = Builder::new();
    emit(idx, c, sigma, goal, &mut b);
    DerivationTrace { steps: b.steps }
}

fn emit_cd(idx: &Index, sigma: &[Fd], items: &[usize], b: &mut Builder) -> usize {
    let cd = Fd::cd(idx.set(items));
    let why = if sigma.contains(&cd) {
        Justification::Premise
    } else {
        Justification::Reflexivity
    };
    b.push(cd, why)
}

fn emit(idx: &Index, c: &super::closure::Closure, sigma: &[Fd], (x, y): (usize, usize), b: &mut Builder) -> usize {
    let fd = Fd::pair(&idx.vars[x], &idx.vars[y]);
    if let Some(&i) = b.seen.get(&fd) {
        return i;
    }
    let why = c.why.get(&(x, y)).expect("closure members are justified");
    let just = match why {
        Why::Premise => Justification::Premise,
        Why::Reflexive => Justification::Reflexivity,
        Why::Cycle(path) => {
            let mut ante: Vec<usize> = path
                .windows(2)
                .map(|e| emit(idx, c, sigma, (e[0], e[1]), b))
                .collect();
            ante.push(emit(idx, c, sigma, (y, x), b));
            Justification::Cycle(ante)
        }
        Why::Chain(states) => {
            let xs: Vec<usize> = states.iter().map(|s| s.0).chain([y]).collect();
            let cs: Vec<usize> = states.iter().map(|s| s.1).collect();
            let path = xs
                .windows(2)
                .map(|e| emit(idx, c, sigma, (e[0], e[1]), b))
                .collect();
            let witnesses = cs.iter().map(|&ci| emit(idx, c, sigma, (ci, y), b)).collect();
            let mut contexts = Vec::new();
            for set in chain_contexts(&xs, &cs) {
                let k = emit_cd(idx, sigma, &set, b);
                if !contexts.contains(&k) {
                    contexts.push(k);
                }
            }
            Justification::Chain {
                path,
                witnesses,
                contexts,
            }
        }
    };
    b.push(fd, just)
}

/// The contexts required by the chain rule for `x_1 … x_n` and
/// `c_1 … c_{n-1}`, in rule order: `x_1 c_1 x_n`, then the ladder
/// `x_i c_i x_{i+1}` / `c_i x_{i+1} c_{i+1}`, then `c_i c_{i+1} x_n`.
fn chain_contexts<T: Clone + Ord>(xs: &[T], cs: &[T]) -> Vec<Vec<T>> {
    let n = xs.len();
    let xn = &xs[n - 1];
    let set = |a: &T, b: &T, c: &T| {
        let mut v = vec![a.clone(), b.clone(), c.clone()];
        v.sort();
        v.dedup();
        v
    };
    let mut out = vec![set(&xs[0], &cs[0], xn)];
    for i in 0..n - 1 {
        out.push(set(&xs[i], &cs[i], &xs[i + 1]));
        if i + 1 < n - 1 {
            out.push(set(&cs[i], &xs[i + 1], &cs[i + 1]));
        }
    }
    for i in 0..n.saturating_sub(2) {
        out.push(set(&cs[i], &cs[i + 1], xn));
    }
    out
}

/// Decides `sigma ⊢ goal` under `rules`, returning a trace on success.
///
/// CR and FULL need unary FDs and CDs. CLASSICAL and NRA need a CD in
/// `sigma` that covers every variable of `sigma` and `goal`; inside that
/// one context the attribute closure decides derivability.
pub fn derives(sigma: &[Fd], goal: &Fd, rules: RuleSet) -> Result<Derivation> {
    if goal.is_trivial() {
        return Ok(Derivation {
            derivable: true,
            trace: Some(DerivationTrace {
                steps: vec![Step {
                    fd: goal.clone(),
                    why: Justification::Reflexivity,
                }],
            }),
        });
    }
    match rules {
        RuleSet::Cr | RuleSet::Full => {
            let idx = Index::unary_fragment(sigma)?;
            let Some((x, y)) = goal.as_unary() else {
                return Err(Error::Unsupported(format!(
                    "{rules} derives unary FDs only, not `{goal}`"
                )));
            };
            let c = closure(&idx, rules == RuleSet::Full);
            let pair = idx.var(x).zip(idx.var(y)).filter(|&(a, b)| c.has(a, b));
            Ok(match pair {
                Some(p) => Derivation {
                    derivable: true,
                    trace: Some(unary_trace(&idx, &c, sigma, p)),
                },
                None => Derivation {
                    derivable: false,
                    trace: None,
                },
            })
        }
        RuleSet::Classical | RuleSet::Nra => single_context(sigma, goal, rules),
    }
}

fn single_context(sigma: &[Fd], goal: &Fd, rules: RuleSet) -> Result<Derivation> {
    let all = sigma
        .iter()
        .chain([goal])
        .fold(VarSet::new(), |acc, fd| acc.union(&fd.vars()));
    let Some(cover) = sigma.iter().find(|fd| fd.is_cd() && all.is_subset(fd.lhs())) else {
        return Err(Error::Unsupported(format!(
            "{rules} needs a CD covering all of {all}"
        )));
    };
    let x = goal.lhs();
    if !goal.rhs().is_subset(&classical_closure(sigma, x)) {
        return Ok(Derivation {
            derivable: false,
            trace: None,
        });
    }

    let mut b = Builder::new();
    let cd = b.push(cover.clone(), Justification::Premise);
    let mut z = x.clone();
    let mut cur = b.push(Fd::cd(z.clone()), Justification::Reflexivity);
    // chains X -> Z and Z -> Z' into X -> Z'
    let compose = |b: &mut Builder, first: usize, second: usize| {
        let fd = Fd::new(b.steps[first].fd.lhs().clone(), b.steps[second].fd.rhs().clone());
        let why = match rules {
            RuleSet::Classical => Justification::Transitivity(first, second),
            _ => Justification::Chain {
                path: vec![first, second],
                witnesses: vec![second, second],
                contexts: vec![cd],
            },
        };
        b.push(fd, why)
    };
    while !goal.rhs().is_subset(&z) {
        let fd = sigma
            .iter()
            .find(|fd| fd.lhs().is_subset(&z) && !fd.rhs().is_subset(&z))
            .expect("the closure contains the goal");
        let p = b.push(fd.clone(), Justification::Premise);
        let grown = z.union(fd.rhs());
        let aug = b.push(Fd::new(z.clone(), grown.clone()), Justification::Augmentation(p));
        cur = compose(&mut b, cur, aug);
        z = grown;
    }
    if z != *goal.rhs() {
        let r = b.push(Fd::new(z, goal.rhs().clone()), Justification::Reflexivity);
        cur = compose(&mut b, cur, r);
    }
    debug_assert_eq!(b.steps[cur].fd, *goal);
    // the goal may coincide with an earlier step; keep it last
    if cur + 1 != b.steps.len() {
        let step = b.steps[cur].clone();
        b.steps.push(step);
    }
    Ok(Derivation {
        derivable: true,
        trace: Some(DerivationTrace { steps: b.steps }),
    })
}

impl DerivationTrace {
    /// Checks every step against `rules`, the premises and the
    /// no-new-contexts criterion, and that the last step is `goal`.
    pub fn replay(&self, sigma: &[Fd], goal: &Fd, rules: RuleSet) -> std::result::Result<(), String> {
        let last = self.steps.last().ok_or("empty trace")?;
        if last.fd != *goal {
            return Err(format!("trace ends in `{}`, not the goal `{goal}`", last.fd));
        }
        let contexts: Vec<VarSet> = sigma.iter().chain([goal]).map(Fd::vars).collect();
        for (i, step) in self.steps.iter().enumerate() {
            let bad = |msg: String| Err(format!("step {}: {msg}", i + 1));
            let vars = step.fd.vars();
            if !contexts.iter().any(|c| vars.is_subset(c)) {
                return bad(format!("`{}` leaves every premise context", step.fd));
            }
            let ante = |j: usize| -> std::result::Result<&Fd, String> {
                if j < i {
                    Ok(&self.steps[j].fd)
                } else {
                    Err(format!("step {}: antecedent {} is not earlier", i + 1, j + 1))
                }
            };
            let allowed = match (&step.why, rules) {
                (Justification::Premise | Justification::Reflexivity, _) => true,
                (Justification::Cycle(_), RuleSet::Cr | RuleSet::Full) => true,
                (Justification::Chain { .. }, RuleSet::Full | RuleSet::Nra) => true,
                (Justification::Augmentation(_), RuleSet::Classical | RuleSet::Nra) => true,
                (Justification::Transitivity(..), RuleSet::Classical) => true,
                _ => false,
            };
            if !allowed {
                return bad(format!("[{}] is not a {rules} rule", step.why));
            }
            let fd = &step.fd;
            match &step.why {
                Justification::Premise => {
                    if !sigma.contains(fd) {
                        return bad(format!("`{fd}` is not a premise"));
                    }
                }
                Justification::Reflexivity => {
                    if !fd.is_trivial() {
                        return bad(format!("`{fd}` is not a reflexivity instance"));
                    }
                }
                Justification::Augmentation(j) => {
                    let a = ante(*j)?;
                    let extra = fd.lhs().difference(a.lhs()).union(&fd.rhs().difference(a.rhs()));
                    let w = fd.lhs().intersection(fd.rhs());
                    if !a.lhs().is_subset(fd.lhs()) || !a.rhs().is_subset(fd.rhs()) || !extra.is_subset(&w) {
                        return bad(format!("`{fd}` does not augment `{a}`"));
                    }
                }
                Justification::Transitivity(j, k) => {
                    let (a, b) = (ante(*j)?, ante(*k)?);
                    if a.rhs() != b.lhs() || fd.lhs() != a.lhs() || fd.rhs() != b.rhs() {
                        return bad(format!("`{fd}` does not follow from `{a}` and `{b}`"));
                    }
                }
                Justification::Cycle(xs) => {
                    let fds = xs.iter().map(|&j| ante(j)).collect::<std::result::Result<Vec<_>, _>>()?;
                    let k = fds.len();
                    let ok = k >= 1
                        && fds.iter().all(|a| a.is_unary())
                        && (0..k).all(|i| fds[i].rhs() == fds[(i + 1) % k].lhs())
                        && fd.lhs() == fds[0].lhs()
                        && fd.rhs() == fds[k - 1].lhs();
                    if !ok {
                        return bad(format!("`{fd}` is not a cycle-rule instance"));
                    }
                }
                Justification::Chain {
                    path,
                    witnesses,
                    contexts: cds,
                } => {
                    let get = |xs: &[usize]| xs.iter().map(|&j| ante(j)).collect::<std::result::Result<Vec<_>, _>>();
                    let (p, w, c) = (get(path)?, get(witnesses)?, get(cds)?);
                    if let Err(msg) = check_chain(fd, &p, &w, &c) {
                        return bad(msg);
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_chain(fd: &Fd, path: &[&Fd], witnesses: &[&Fd], cds: &[&Fd]) -> std::result::Result<(), String> {
    let n = path.len() + 1;
    if path.is_empty() || witnesses.len() != n - 1 {
        return Err(format!("chain for `{fd}` has mismatched lengths"));
    }
    let mut xs: Vec<VarSet> = vec![path[0].lhs().clone()];
    for (i, p) in path.iter().enumerate() {
        if *p.lhs() != xs[i] {
            return Err(format!("`{p}` does not continue the chain"));
        }
        xs.push(p.rhs().clone());
    }
    let xn = &xs[n - 1];
    if fd.lhs() != &xs[0] || fd.rhs() != xn {
        return Err(format!("chain does not conclude `{fd}`"));
    }
    if let Some(w) = witnesses.iter().find(|w| w.rhs() != xn) {
        return Err(format!("witness `{w}` does not determine {xn}"));
    }
    if let Some(c) = cds.iter().find(|c| !c.is_cd()) {
        return Err(format!("`{c}` is not a CD"));
    }
    let cs: Vec<VarSet> = witnesses.iter().map(|w| w.lhs().clone()).collect();
    for need in chain_contexts(&xs, &cs) {
        let need = need.iter().fold(VarSet::new(), |acc, s| acc.union(s));
        if !cds.iter().any(|c| need.is_subset(c.lhs())) {
            return Err(format!("context {need} is missing"));
        }
    }
    Ok(())
}
