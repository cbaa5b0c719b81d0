//! Realisations of Boolean families as families over N or Q.
//!
//! For chordless-cycle context sets the question is graph-theoretic: a
//! family is realisable over a cancellative monoid iff every edge of its
//! overlap projection graph lies on a directed cycle. For arbitrary context
//! sets [`realisable_lp`] decides it by exact linear programming.

use std::fmt;

use crate::error::{Error, Result};
use crate::family::ContextSet;
use crate::relation::VarSet;

mod cycles;
mod lp;
mod opg;

pub use cycles::{decompose_cycles, lift_uniform, realisable_chordless, realise, recombine, CycleComponent};
pub use lp::{realisable_lp, realisable_lp_with_lower_bounds};
pub use opg::{build_opg, find_simple_cycle_through, has_edge_cycle_cover, CoverReport, OpgEdge, OpgVertex, OverlapProjectionGraph};

/// The maximal contexts in cyclic order `C_0 … C_{n-1}`, where `C_i` and
/// `C_j` intersect iff they are neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleOrdering {
    /// Positions of `C_0 … C_{n-1}` in the context set's list of maximal
    /// contexts.
    positions: Vec<usize>,
    contexts: Vec<VarSet>,
}

impl CycleOrdering {
    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// `C_i`.
    pub fn context(&self, i: usize) -> &VarSet {
        &self.contexts[i]
    }

    pub fn contexts(&self) -> &[VarSet] {
        &self.contexts
    }

    /// Position of `C_i` among the maximal contexts of the context set.
    pub fn position(&self, i: usize) -> usize {
        self.positions[i]
    }

    /// `C_i ∩ C_{i+1}`, indices taken mod `n`.
    pub fn boundary(&self, i: usize) -> VarSet {
        let n = self.len();
        self.contexts[i % n].intersection(&self.contexts[(i + 1) % n])
    }
}

impl fmt::Display for CycleOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.contexts.iter().map(VarSet::to_string).collect();
        write!(f, "{}", parts.join(" - "))
    }
}

/// Orders the maximal contexts of `cs` along a chordless cycle, or explains
/// why they do not form one.
///
/// The cycle starts at the first maximal context and continues to its
/// lower-numbered neighbour.
pub fn classify_chordless_cycle(cs: &ContextSet) -> Result<CycleOrdering> {
    let m = cs.maximal();
    let n = m.len();
    let refuse = |why: String| Err(Error::NotChordless(why));
    if n < 3 {
        return refuse(format!("{n} maximal contexts; a cycle needs at least 3"));
    }
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && !m[i].intersection(&m[j]).is_empty())
                .collect()
        })
        .collect();
    if let Some(i) = (0..n).find(|&i| neighbours[i].len() != 2) {
        return refuse(format!(
            "context {} meets {} other contexts instead of 2",
            m[i],
            neighbours[i].len()
        ));
    }
    let mut positions = vec![0];
    let mut prev = 0;
    let mut cur = neighbours[0][0];
    while cur != 0 {
        positions.push(cur);
        let next = if neighbours[cur][0] == prev {
            neighbours[cur][1]
        } else {
            neighbours[cur][0]
        };
        prev = cur;
        cur = next;
    }
    if positions.len() != n {
        return refuse(format!(
            "the intersection graph is not connected ({} of {n} contexts on the cycle through {})",
            positions.len(),
            m[0]
        ));
    }
    let contexts = positions.iter().map(|&p| m[p].clone()).collect();
    Ok(CycleOrdering { positions, contexts })
}
