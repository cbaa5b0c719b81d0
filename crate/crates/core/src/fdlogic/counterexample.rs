//! Counterexample families for unary FDs that are not derivable.

use std::collections::{BTreeSet, VecDeque};

use super::{derives, Fd, RuleSet};
use crate::error::{Error, Result};
use crate::family::{ContextSet, ContextualFamily};
use crate::monoid::{MonoidKind, MonoidValue};
use crate::relation::{Assignment, KRelation, Value, Variable};

/// A family over the contexts `Vars(θ)`, `θ ∈ sigma ∪ {phi}`, that
/// satisfies `sigma` and violates `phi`.
///
/// If `phi = x -> y` has no FD path from `x` to `y`, the family consists of
/// the marginals of a two-row relation: all zeros, and zeros exactly on the
/// variables reachable from `x`. Otherwise every context gets the rows
/// `(0,…,0)` and `(1,…,1)` weighted `b`, except `{x, y}`, which gets all
/// four rows weighted `a`, where `a + a = b`.
pub fn build_counterexample(sigma: &[Fd], phi: &Fd, kind: MonoidKind) -> Result<ContextualFamily> {
    let Some((x, y)) = phi.as_unary().filter(|(x, y)| x != y) else {
        return Err(Error::Unsupported(format!(
            "counterexamples are built for unary FDs x -> y with x != y, not `{phi}`"
        )));
    };
    if let Some(fd) = sigma
        .iter()
        .find(|fd| !fd.is_unary() && !(fd.is_cd() && fd.lhs().len() <= 2))
    {
        return Err(Error::Unsupported(format!(
            "`{fd}` is neither a unary FD nor a binary CD"
        )));
    }
    if derives(sigma, phi, RuleSet::Cr)?.derivable {
        return Err(Error::Derivable(phi.to_string()));
    }

    let contexts = ContextSet::new(sigma.iter().chain([phi]).map(Fd::vars));
    let edges: Vec<(&Variable, &Variable)> = sigma.iter().filter_map(Fd::as_unary).collect();
    let reach = reachable(&edges, x);
    let (zero, one) = (Value::new("0"), Value::new("1"));

    let relations: Vec<KRelation> = if !reach.contains(y) {
        let all = contexts.vars();
        let s: Assignment = all.iter().map(|v| (v.clone(), zero.clone())).fold(Assignment::new(), bind);
        let t: Assignment = all
            .iter()
            .map(|v| (v.clone(), if reach.contains(v) { zero.clone() } else { one.clone() }))
            .fold(Assignment::new(), bind);
        let w = MonoidValue::one(kind);
        let global = KRelation::from_rows(all, kind, [(s, w.clone()), (t, w)])?;
        contexts
            .maximal()
            .iter()
            .map(|c| global.marginalise(c))
            .collect::<Result<_>>()?
    } else {
        let (a, b) = match kind {
            MonoidKind::B => (MonoidValue::one(kind), MonoidValue::one(kind)),
            MonoidKind::N => (MonoidValue::nat(1), MonoidValue::nat(2)),
            MonoidKind::Q => (MonoidValue::ratio(1, 1), MonoidValue::ratio(2, 1)),
        };
        debug_assert_eq!(a.add(&a)?, b);
        let xy = phi.vars();
        contexts
            .maximal()
            .iter()
            .map(|c| {
                let constant = |val: &Value| c.iter().map(|v| (v.clone(), val.clone())).fold(Assignment::new(), bind);
                if *c == xy {
                    let rows = [(&zero, &zero), (&zero, &one), (&one, &zero), (&one, &one)].map(|(p, q)| {
                        let s = Assignment::new();
                        let s = bind(s, (x.clone(), p.clone()));
                        (bind(s, (y.clone(), q.clone())), a.clone())
                    });
                    KRelation::from_rows(c.clone(), kind, rows)
                } else {
                    KRelation::from_rows(
                        c.clone(),
                        kind,
                        [(constant(&zero), b.clone()), (constant(&one), b.clone())],
                    )
                }
            })
            .collect::<Result<_>>()?
    };

    let family = ContextualFamily::over(&contexts, kind, relations)?;
    debug_assert!(family.satisfies_all(sigma)?);
    debug_assert!(!family.satisfies(phi)?);
    Ok(family)
}

fn bind(mut s: Assignment, (v, a): (Variable, Value)) -> Assignment {
    s.bind(v, a);
    s
}

fn reachable<'a>(edges: &[(&'a Variable, &'a Variable)], from: &'a Variable) -> BTreeSet<&'a Variable> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in edges {
            if a == u && seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    seen
}
