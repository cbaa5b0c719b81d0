//! Uniform lifting of simply cyclic families, realisation as sums of
//! lifted cycles, and decomposition of rational families into cycles.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::opg::{build_opg, find_simple_cycle_through, has_edge_cycle_cover, shortest_path};
use super::{classify_chordless_cycle, OverlapProjectionGraph};
use crate::error::{Error, Result};
use crate::family::ContextualFamily;
use crate::monoid::{MonoidKind, MonoidValue};
use crate::relation::{Assignment, KRelation};

/// The Boolean family made of the edge labels of `cycle`.
pub(crate) fn cycle_family(
    f: &ContextualFamily,
    g: &OverlapProjectionGraph,
    cycle: &[usize],
) -> Result<ContextualFamily> {
    let ord = g.ordering();
    let mut rows: Vec<Vec<Assignment>> = vec![Vec::new(); ord.len()];
    for &e in cycle {
        let edge = &g.edges()[e];
        rows[edge.context].push(edge.label.clone());
    }
    let relations = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| KRelation::from_support(ord.context(i).clone(), r))
        .collect::<Result<Vec<_>>>()?;
    ContextualFamily::over(f.contexts(), MonoidKind::B, relations)
}

fn chordless_opg(f: &ContextualFamily) -> Result<OverlapProjectionGraph> {
    let ord = classify_chordless_cycle(f.contexts())?;
    build_opg(&f.support(), &ord)
}

/// Whether the overlap projection graph is a single simple cycle through
/// every edge.
fn is_simple_cycle(g: &OverlapProjectionGraph) -> bool {
    let m = g.edges().len();
    if m == 0 || g.vertices().len() != m {
        return false;
    }
    let mut indegree = vec![0; m];
    for e in g.edges() {
        indegree[e.to] += 1;
    }
    if indegree.iter().any(|&d| d != 1) || (0..m).any(|v| g.out_edges(v).len() != 1) {
        return false;
    }
    let (mut v, mut steps) = (0, 0);
    loop {
        v = g.edges()[g.out_edges(v)[0]].to;
        steps += 1;
        if v == 0 {
            return steps == m;
        }
    }
}

/// Annotates every assignment of the simply cyclic family `sub` with `w`.
pub fn lift_uniform(sub: &ContextualFamily, w: &MonoidValue) -> Result<ContextualFamily> {
    if w.is_zero() {
        return Err(Error::ZeroAnnotation);
    }
    let g = chordless_opg(sub)?;
    if !is_simple_cycle(&g) {
        return Err(Error::NotSimplyCyclic(format!(
            "the overlap projection graph has {} vertices and {} edges but is not one simple cycle",
            g.vertices().len(),
            g.edges().len()
        )));
    }
    sub.support().scaled(w)
}

/// Realisability over `kind` (N or Q) of a family over a chordless cycle:
/// every edge of the overlap projection graph lies on a cycle.
pub fn realisable_chordless(f: &ContextualFamily, kind: MonoidKind) -> Result<bool> {
    if !kind.cancellative() {
        return Err(Error::Unsupported(format!(
            "the cycle cover criterion needs a cancellative monoid, not {kind}"
        )));
    }
    Ok(has_edge_cycle_cover(&chordless_opg(f)?).covered)
}

/// The sum, over all assignments `s`, of the cycle through `s`'s edge
/// lifted uniformly with `w`. The support of the result is `f`'s support.
pub fn realise(f: &ContextualFamily, kind: MonoidKind, w: &MonoidValue) -> Result<ContextualFamily> {
    if w.kind() != kind {
        return Err(Error::KindMismatch(kind, w.kind()));
    }
    if !kind.cancellative() {
        return Err(Error::Unsupported(format!(
            "realisation is defined for cancellative monoids, not {kind}"
        )));
    }
    let support = f.support();
    let g = chordless_opg(&support)?;
    if let Some(&e) = has_edge_cycle_cover(&g).uncovered.first() {
        return Err(Error::UncoveredEdge(g.describe_edge(e)));
    }
    let mut total = ContextualFamily::zero(support.contexts(), kind);
    for e in 0..g.edges().len() {
        let cycle = find_simple_cycle_through(&g, e)?;
        let lifted = lift_uniform(&cycle_family(&support, &g, &cycle)?, w)?;
        total = total.add(&lifted)?;
    }
    debug_assert_eq!(total.support(), support);
    Ok(total)
}

/// One term `weight · family` of a cycle decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleComponent {
    pub weight: BigRational,
    /// A simply cyclic Boolean family.
    pub family: ContextualFamily,
}

/// Writes a rational family over a chordless cycle as a positive
/// combination of simply cyclic families.
///
/// Each round takes the least vertex with an outgoing edge, a shortest
/// cycle through it (ties broken by edge order), and subtracts the least
/// weight on that cycle.
pub fn decompose_cycles(f: &ContextualFamily) -> Result<Vec<CycleComponent>> {
    if !f.kind().cancellative() {
        return Err(Error::Unsupported(format!(
            "cycle decomposition needs N or Q weights, not {}",
            f.kind()
        )));
    }
    let g = chordless_opg(f)?;
    let ord = g.ordering().clone();
    let mut weight: Vec<BigRational> = g
        .edges()
        .iter()
        .map(|e| {
            f.relation(ord.position(e.context))
                .get(&e.label)
                .to_rational()
                .expect("numeric kind")
        })
        .collect();

    let mut out = Vec::new();
    loop {
        let live = |e: usize| weight[e].is_positive();
        let Some(start) = (0..g.vertices().len()).find(|&v| g.out_edges(v).iter().any(|&e| live(e))) else {
            break;
        };
        let mut best: Option<Vec<usize>> = None;
        for &e in g.out_edges(start) {
            if !live(e) {
                continue;
            }
            let Some(back) = shortest_path(&g, g.edges()[e].to, start, &live) else {
                continue;
            };
            if best.as_ref().map_or(true, |b| back.len() + 1 < b.len()) {
                let mut cycle = vec![e];
                cycle.extend(back);
                best = Some(cycle);
            }
        }
        // flow conservation puts every live edge on a live cycle
        let cycle = best.ok_or_else(|| {
            Error::Unsupported("the weights do not form a circulation".into())
        })?;
        let w = cycle
            .iter()
            .map(|&e| weight[e].clone())
            .min()
            .expect("cycles are nonempty");
        for &e in &cycle {
            weight[e] -= &w;
        }
        out.push(CycleComponent {
            weight: w,
            family: cycle_family(f, &g, &cycle)?,
        });
    }
    debug_assert!(weight.iter().all(Zero::is_zero));
    Ok(out)
}

/// `Σ weight · family` over `kind`, the inverse of [`decompose_cycles`].
pub fn recombine(
    contexts: &crate::family::ContextSet,
    kind: MonoidKind,
    parts: &[CycleComponent],
) -> Result<ContextualFamily> {
    let mut total = ContextualFamily::zero(contexts, kind);
    for p in parts {
        let w = MonoidValue::from_rational(kind, &p.weight)?;
        total = total.add(&p.family.scaled(&w)?)?;
    }
    Ok(total)
}
