//! Gain graphs: multigraphs whose edges carry symmetry-group elements.
//!
//! A gain graph is the quotient of a symmetric infinite framework: one vertex
//! per vertex orbit, one edge per edge orbit, and on each directed edge the
//! group element relating the representatives of its endpoints.  Reversing an
//! edge inverts its gain, so non-loop edges are normalized at construction to
//! point from the higher-indexed vertex to the lower one.  After that
//! normalization two parallel edges represent the same orbit exactly when
//! their gains are equal; two loops also collide when their gains are
//! mutually inverse, because a loop and its reversal derive the same edges.
//!
//! The predicates that drive all the combinatorics live here: net gains of
//! walks, switching (re-choosing orbit representatives), spanning-tree
//! normal form, fundamental-cycle gains, and the derived balanced and
//! purely-periodic tests.

use crate::group::{GroupElement, GroupTag};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

/// One edge orbit: a directed edge `tail -> head` with a gain.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub gain: GroupElement,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    /// The endpoint other than `v`; `v` itself for loops.
    pub fn other(&self, v: usize) -> usize {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }

    /// The gain read in the direction `from -> other endpoint`.
    pub fn gain_from(&self, from: usize) -> GroupElement {
        if self.tail == from {
            self.gain
        } else {
            self.gain.inverse()
        }
    }
}

/// Traversal direction of a stored edge inside a walk.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    /// Along the stored orientation, `tail -> head`.
    Fwd,
    /// Against the stored orientation; contributes the inverse gain.
    Rev,
}

/// Validation failures for gain graphs.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge} references vertex {vertex}, but the graph has {n} vertices")]
    VertexOutOfRange { edge: usize, vertex: usize, n: usize },
    #[error("edge {edge} gain {gain} is not an element of {group}")]
    GainNotInGroup { edge: usize, gain: GroupElement, group: GroupTag },
    #[error("loop at vertex {vertex} (edge {edge}) carries the identity gain")]
    IdentityLoop { edge: usize, vertex: usize },
    #[error("edges {first} and {second} are parallel copies of the same edge orbit")]
    DuplicateParallelGain { first: usize, second: usize },
}

/// A multigraph with group-labelled edges, the quotient of a symmetric
/// framework by its symmetry group.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GainGraph {
    group: GroupTag,
    n: usize,
    edges: Vec<Edge>,
}

impl GainGraph {
    /// An edgeless graph on `n` vertices.
    pub fn new(group: GroupTag, n: usize) -> Self {
        GainGraph { group, n, edges: Vec::new() }
    }

    /// Build and validate in one step.  Edges are given as
    /// `(tail, head, gain)` triples in any orientation.
    pub fn build(
        group: GroupTag,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, GroupElement)>,
    ) -> Result<Self, GraphError> {
        let mut g = GainGraph::new(group, n);
        for (t, h, gain) in edges {
            g.push_edge(t, h, gain);
        }
        g.validate()?;
        Ok(g)
    }

    /// Append an edge, normalizing non-loops so that `tail > head` (the gain
    /// is inverted when the stored orientation flips).  No validation.
    pub fn push_edge(&mut self, tail: usize, head: usize, gain: GroupElement) {
        let edge = if tail < head {
            Edge { tail: head, head: tail, gain: gain.inverse() }
        } else {
            Edge { tail, head, gain }
        };
        self.edges.push(edge);
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    /// Number of vertices.
    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    /// Degree of `v`, counting loops twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| usize::from(e.tail == v) + usize::from(e.head == v))
            .sum()
    }

    /// Indices of edges incident to `v`, in edge order.
    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].tail == v || self.edges[i].head == v)
            .collect()
    }

    /// Check the gain-graph invariants: endpoints in range, gains inside the
    /// tagged group, no identity loops, and no two edges representing the
    /// same edge orbit.  Loops collide when their gains are equal or
    /// mutually inverse; normalized non-loops only when equal.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (i, e) in self.edges.iter().enumerate() {
            for v in [e.tail, e.head] {
                if v >= self.n {
                    return Err(GraphError::VertexOutOfRange { edge: i, vertex: v, n: self.n });
                }
            }
            if !self.group.contains(&e.gain) {
                return Err(GraphError::GainNotInGroup { edge: i, gain: e.gain, group: self.group });
            }
            if e.is_loop() && e.gain.is_identity() {
                return Err(GraphError::IdentityLoop { edge: i, vertex: e.tail });
            }
        }
        for i in 0..self.edges.len() {
            for j in (i + 1)..self.edges.len() {
                let (a, b) = (&self.edges[i], &self.edges[j]);
                if a.tail != b.tail || a.head != b.head {
                    continue;
                }
                let duplicate = if a.is_loop() {
                    a.gain == b.gain || a.gain == b.gain.inverse()
                } else {
                    a.gain == b.gain
                };
                if duplicate {
                    return Err(GraphError::DuplicateParallelGain { first: i, second: j });
                }
            }
        }
        Ok(())
    }

    /// Net gain of a walk: the ordered product of gains, inverted on edges
    /// traversed against their stored orientation.
    pub fn net_gain(&self, steps: &[(usize, Dir)]) -> GroupElement {
        steps.iter().fold(GroupElement::IDENTITY, |acc, &(i, dir)| {
            let g = match dir {
                Dir::Fwd => self.edges[i].gain,
                Dir::Rev => self.edges[i].gain.inverse(),
            };
            acc.compose(&g)
        })
    }

    /// Switch at `v` by `gamma`: multiply gains of edges leaving `v` on the
    /// left by `gamma`, edges entering `v` on the right by `gamma` inverse,
    /// and conjugate loops at `v`.  This re-chooses the orbit representative
    /// of `v` and never changes the derived framework.
    pub fn switch(&self, v: usize, gamma: &GroupElement) -> GainGraph {
        let mut out = self.clone();
        for e in &mut out.edges {
            let g = e.gain;
            e.gain = match (e.tail == v, e.head == v) {
                (true, true) => gamma.compose(&g).compose(&gamma.inverse()),
                (true, false) => gamma.compose(&g),
                (false, true) => g.compose(&gamma.inverse()),
                (false, false) => g,
            };
        }
        out
    }

    /// Deterministic spanning forest: BFS from the least-indexed vertex of
    /// each component, exploring edges in index order.  Loops are never tree
    /// edges.  Returns, per vertex, `Some(tree edge index)` for non-roots,
    /// plus the accumulated tree-path gain from the component root.
    fn bfs_forest(&self, keep: &dyn Fn(usize) -> bool) -> Forest {
        let mut parent_edge = vec![None; self.n];
        let mut potential = vec![GroupElement::IDENTITY; self.n];
        let mut component = vec![usize::MAX; self.n];
        let mut roots = Vec::new();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            if keep(i) && !e.is_loop() {
                adjacency[e.tail].push(i);
                adjacency[e.head].push(i);
            }
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        for root in 0..self.n {
            if component[root] != usize::MAX {
                continue;
            }
            let comp = roots.len();
            component[root] = comp;
            roots.push(root);
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &i in &adjacency[u] {
                    let e = &self.edges[i];
                    let w = e.other(u);
                    if component[w] == usize::MAX {
                        component[w] = comp;
                        parent_edge[w] = Some(i);
                        potential[w] = potential[u].compose(&e.gain_from(u));
                        queue.push_back(w);
                    }
                }
            }
        }
        Forest { parent_edge, potential, component, roots }
    }

    /// Gains of the fundamental cycles of a deterministic spanning forest:
    /// one entry `(edge index, gain)` per non-tree edge, in edge order.  The
    /// cycle of a non-tree edge `u -> w` runs root to `u` through the tree,
    /// across the edge, and back from `w` to the root.
    pub fn fundamental_cycle_gains(&self) -> Vec<(usize, GroupElement)> {
        self.fundamental_cycle_gains_filtered(&|_| true)
    }

    /// Fundamental-cycle gains of the subgraph spanned by the kept edges.
    pub(crate) fn fundamental_cycle_gains_filtered(
        &self,
        keep: &dyn Fn(usize) -> bool,
    ) -> Vec<(usize, GroupElement)> {
        let forest = self.bfs_forest(keep);
        let tree: HashSet<usize> = forest.parent_edge.iter().flatten().copied().collect();
        (0..self.edges.len())
            .filter(|&i| keep(i) && !tree.contains(&i))
            .map(|i| {
                let e = &self.edges[i];
                let gain = forest.potential[e.tail]
                    .compose(&e.gain)
                    .compose(&forest.potential[e.head].inverse());
                (i, gain)
            })
            .collect()
    }

    /// Switch every vertex so that all spanning-forest edges carry the
    /// identity gain.  Afterwards each non-tree edge stores exactly its
    /// fundamental-cycle gain.  Returns the normalized graph together with
    /// the applied switches `(vertex, gamma)`.
    pub fn spanning_tree_normalize(&self) -> (GainGraph, Vec<(usize, GroupElement)>) {
        let forest = self.bfs_forest(&|_| true);
        let mut out = self.clone();
        for e in &mut out.edges {
            let (pt, ph) = (forest.potential[e.tail], forest.potential[e.head]);
            e.gain = pt.compose(&e.gain).compose(&ph.inverse());
        }
        let log = (0..self.n)
            .filter(|&v| !forest.potential[v].is_identity())
            .map(|v| (v, forest.potential[v]))
            .collect();
        (out, log)
    }

    /// Whether every cycle has the identity net gain, i.e. the gain space is
    /// trivial.  Balanced graphs are quotients of frameworks that repeat a
    /// finite pattern without genuinely using the symmetry.
    pub fn is_balanced(&self) -> bool {
        self.is_balanced_subset_impl(&|_| true)
    }

    /// Balanced test restricted to an edge subset (indices into `edges`).
    pub fn is_balanced_subset(&self, edge_idxs: &[usize]) -> bool {
        let set: HashSet<usize> = edge_idxs.iter().copied().collect();
        self.is_balanced_subset_impl(&|i| set.contains(&i))
    }

    fn is_balanced_subset_impl(&self, keep: &dyn Fn(usize) -> bool) -> bool {
        self.fundamental_cycle_gains_filtered(keep)
            .iter()
            .all(|(_, g)| g.is_identity())
    }

    /// Whether every cycle's net gain is a pure translation.  The reflection
    /// component of a net gain only depends on the cycle's edge parity, so
    /// checking the fundamental cycles suffices.
    pub fn is_purely_periodic(&self) -> bool {
        self.is_purely_periodic_subset_impl(&|_| true)
    }

    /// Purely-periodic test restricted to an edge subset.
    pub fn is_purely_periodic_subset(&self, edge_idxs: &[usize]) -> bool {
        let set: HashSet<usize> = edge_idxs.iter().copied().collect();
        self.is_purely_periodic_subset_impl(&|i| set.contains(&i))
    }

    fn is_purely_periodic_subset_impl(&self, keep: &dyn Fn(usize) -> bool) -> bool {
        self.fundamental_cycle_gains_filtered(keep)
            .iter()
            .all(|(_, g)| g.is_translation())
    }

    /// Vertex sets of the connected components, restricted to kept edges.
    pub(crate) fn components_filtered(&self, keep: &dyn Fn(usize) -> bool) -> Vec<Vec<usize>> {
        let forest = self.bfs_forest(keep);
        let mut out = vec![Vec::new(); forest.roots.len()];
        for v in 0..self.n {
            out[forest.component[v]].push(v);
        }
        out
    }

    /// Connected components of the whole graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_filtered(&|_| true)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Equality up to re-ordering of the edge list.  Loop gains are compared
    /// up to inversion, since a loop and its reversal name the same orbit.
    pub fn same_up_to_edge_order(&self, other: &GainGraph) -> bool {
        if self.group != other.group || self.n != other.n {
            return false;
        }
        let key = |g: &GainGraph| {
            let mut ks: Vec<(usize, usize, (i64, i64, bool))> = g
                .edges
                .iter()
                .map(|e| {
                    let gain = if e.is_loop() {
                        let (a, b) = (e.gain, e.gain.inverse());
                        if (a.c, a.d, a.r) <= (b.c, b.d, b.r) {
                            a
                        } else {
                            b
                        }
                    } else {
                        e.gain
                    };
                    (e.tail, e.head, (gain.c, gain.d, gain.r))
                })
                .collect();
            ks.sort_unstable();
            ks
        };
        key(self) == key(other)
    }

    /// Expand a finite window of the derived (infinite) graph: vertices are
    /// `(orbit, group element)` pairs with translation components bounded by
    /// `window` in absolute value, and `{orbit i, gamma} ~ {orbit j, gamma
    /// compose gain}` for every edge `i -> j`.  Reflected copies are included
    /// only when requested.  Debug and visualisation aid.
    pub fn derived_graph(&self, window: i64, include_reflection: bool) -> DerivedGraph {
        let mut elements = Vec::new();
        let reflections: &[bool] = if include_reflection && self.group.has_reflections() {
            &[false, true]
        } else {
            &[false]
        };
        let span: Vec<i64> = if matches!(self.group, GroupTag::Cs) {
            vec![0]
        } else {
            (-window..=window).collect()
        };
        for &r in reflections {
            for &c in &span {
                for &d in &span {
                    elements.push(GroupElement::new(c, d, r));
                }
            }
        }
        let mut vertices = Vec::new();
        let mut index = HashMap::new();
        for v in 0..self.n {
            for &g in &elements {
                index.insert((v, g), vertices.len());
                vertices.push((v, g));
            }
        }
        let mut edge_set = HashSet::new();
        for e in &self.edges {
            for &g in &elements {
                let target = g.compose(&e.gain);
                if let (Some(&a), Some(&b)) =
                    (index.get(&(e.tail, g)), index.get(&(e.head, target)))
                {
                    edge_set.insert((a.min(b), a.max(b)));
                }
            }
        }
        let mut edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
        edges.sort_unstable();
        DerivedGraph { vertices, edges }
    }
}

struct Forest {
    parent_edge: Vec<Option<usize>>,
    potential: Vec<GroupElement>,
    component: Vec<usize>,
    roots: Vec<usize>,
}

/// A finite window of the infinite derived graph.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedGraph {
    /// `(orbit vertex, group element)` labels, orbit-major.
    pub vertices: Vec<(usize, GroupElement)>,
    /// Simple undirected edges as index pairs into `vertices`.
    pub edges: Vec<(usize, usize)>,
}

impl DerivedGraph {
    /// Positions of the derived vertices under a symmetric placement of the
    /// orbit representatives.
    pub fn place(&self, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        self.vertices
            .iter()
            .map(|(v, g)| g.apply(points[*v]))
            .collect()
    }
}
