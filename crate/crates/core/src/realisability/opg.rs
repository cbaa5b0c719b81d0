//! Overlap projection graphs and their edge cycle covers.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};

use super::CycleOrdering;
use crate::error::{Error, Result};
use crate::family::ContextualFamily;
use crate::relation::Assignment;

/// A vertex: an assignment to the boundary `C_layer ∩ C_{layer+1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpgVertex {
    pub layer: usize,
    pub values: Assignment,
}

/// The edge generated by the assignment `label` of `C_context`, from its
/// restriction to the boundary before `C_context` to its restriction to
/// the boundary after it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpgEdge {
    pub from: usize,
    pub to: usize,
    pub context: usize,
    pub label: Assignment,
}

/// Vertices are sorted by layer, then values; edges by context, then
/// label. Both orders are deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapProjectionGraph {
    ordering: CycleOrdering,
    vertices: Vec<OpgVertex>,
    edges: Vec<OpgEdge>,
    out: Vec<Vec<usize>>,
}

impl OpgVertex {
    fn tokens(&self) -> String {
        self.values
            .values()
            .map(|v| v.token())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for OpgVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.layer, self.tokens())
    }
}

impl OverlapProjectionGraph {
    pub fn ordering(&self) -> &CycleOrdering {
        &self.ordering
    }

    pub fn vertices(&self) -> &[OpgVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[OpgEdge] {
        &self.edges
    }

    /// Outgoing edge indices of vertex `v`, in edge order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// `from -> to (label)` with vertices shown by their values.
    pub fn describe_edge(&self, e: usize) -> String {
        let edge = &self.edges[e];
        format!(
            "{} -> {} ({})",
            self.vertices[edge.from].tokens(),
            self.vertices[edge.to].tokens(),
            edge.label
        )
    }

    /// Graphviz rendering; byte-identical for equal graphs.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph opg {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"{}\"];", escape(&v.to_string()));
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  v{} -> v{} [label=\"{}\"];",
                e.from,
                e.to,
                escape(&e.label.to_string())
            );
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The overlap projection graph of the support of `f` along `ord`.
///
/// An assignment `s` of `C_i` becomes an edge from `s` restricted to
/// `C_{i-1} ∩ C_i` (layer `i-1`) to `s` restricted to `C_i ∩ C_{i+1}`
/// (layer `i`).
pub fn build_opg(f: &ContextualFamily, ord: &CycleOrdering) -> Result<OverlapProjectionGraph> {
    let n = ord.len();
    for i in 0..n {
        if f.contexts().maximal().get(ord.position(i)) != Some(ord.context(i)) {
            return Err(Error::ContextSetMismatch);
        }
    }
    if f.contexts().len() != n {
        return Err(Error::ContextSetMismatch);
    }
    let mut vertex_ids: BTreeMap<OpgVertex, usize> = BTreeMap::new();
    let mut raw: Vec<(OpgVertex, OpgVertex, usize, Assignment)> = Vec::new();
    for i in 0..n {
        let before = ord.boundary(i + n - 1);
        let after = ord.boundary(i);
        for s in f.relation(ord.position(i)).support() {
            let u = OpgVertex {
                layer: (i + n - 1) % n,
                values: s.restrict(&before),
            };
            let v = OpgVertex {
                layer: i,
                values: s.restrict(&after),
            };
            vertex_ids.insert(u.clone(), 0);
            vertex_ids.insert(v.clone(), 0);
            raw.push((u, v, i, s));
        }
    }
    let vertices: Vec<OpgVertex> = vertex_ids.keys().cloned().collect();
    for (k, id) in vertex_ids.values_mut().enumerate() {
        *id = k;
    }
    let edges: Vec<OpgEdge> = raw
        .into_iter()
        .map(|(u, v, context, label)| OpgEdge {
            from: vertex_ids[&u],
            to: vertex_ids[&v],
            context,
            label,
        })
        .collect();
    let mut out = vec![Vec::new(); vertices.len()];
    for (k, e) in edges.iter().enumerate() {
        out[e.from].push(k);
    }
    Ok(OverlapProjectionGraph {
        ordering: ord.clone(),
        vertices,
        edges,
        out,
    })
}

/// Strongly connected component of every vertex (Tarjan, iterative).
pub(crate) fn components(g: &OverlapProjectionGraph) -> Vec<usize> {
    let n = g.vertices.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (vertex, position in its out-edge list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut k)) = call.last_mut() {
            if let Some(&e) = g.out[v].get(*k) {
                *k += 1;
                let w = g.edges[e].to;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("component root is on the stack");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverReport {
    pub covered: bool,
    /// Edges on no directed cycle, in edge order.
    pub uncovered: Vec<usize>,
}

/// An edge lies on a directed cycle iff both endpoints share a strongly
/// connected component.
pub fn has_edge_cycle_cover(g: &OverlapProjectionGraph) -> CoverReport {
    let comp = components(g);
    let uncovered: Vec<usize> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| comp[e.from] != comp[e.to])
        .map(|(k, _)| k)
        .collect();
    CoverReport {
        covered: uncovered.is_empty(),
        uncovered,
    }
}

/// Shortest path of edges from `from` to `to`, exploring edges in order.
pub(crate) fn shortest_path(
    g: &OverlapProjectionGraph,
    from: usize,
    to: usize,
    usable: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut via: Vec<Option<usize>> = vec![None; g.vertices.len()];
    let mut seen = vec![false; g.vertices.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &e in &g.out[u] {
            let w = g.edges[e].to;
            if usable(e) && !seen[w] {
                seen[w] = true;
                via[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut path = Vec::new();
    let mut v = to;
    while v != from {
        let e = via[v].expect("visited vertex has an incoming edge");
        path.push(e);
        v = g.edges[e].from;
    }
    path.reverse();
    Some(path)
}

/// A simple cycle through edge `e`: `e` followed by a shortest path back
/// from its head to its tail. Edge indices in cycle order, starting at `e`.
pub fn find_simple_cycle_through(g: &OverlapProjectionGraph, e: usize) -> Result<Vec<usize>> {
    let edge = g
        .edges
        .get(e)
        .ok_or_else(|| Error::UncoveredEdge(format!("no edge {e}")))?;
    let back = shortest_path(g, edge.to, edge.from, &|_| true)
        .ok_or_else(|| Error::UncoveredEdge(g.describe_edge(e)))?;
    let mut cycle = vec![e];
    cycle.extend(back);
    Ok(cycle)
}
