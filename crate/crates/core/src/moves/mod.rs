//! Construction moves on gain graphs, their replayable records, and the
//! settings (norm + symmetry group) that select which moves are admissible.
//!
//! Each move grows a tight gain graph into a bigger one: vertex additions of
//! degree two and three, a loop-plus-edge addition, two vertex splits (into a
//! four-cycle or a complete graph on four vertices), a triangle expansion for
//! the polyhedral norm, and a join of two disjoint graphs by one edge.  Every
//! move application produces a [`MoveRecord`] describing it in coordinates of
//! the predecessor graph, so a sequence of records replays deterministically:
//! see [`ReplayStep`] and [`replay`].
//!
//! Records name edges by their stored `(tail, head, gain)` triple, which is
//! unique in a valid gain graph, and carry the indices where new vertices are
//! inserted.  That makes records meaningful both for forward generation
//! (insert at the end) and for inverting reductions found in the middle of a
//! graph (insert back at the original position), and replay reconstructs the
//! exact vertex numbering of the original graph.

pub mod generate;
pub mod reduce;

use crate::gain_graph::{Edge, GainGraph, GraphError};
use crate::group::{GroupElement, GroupTag};
use crate::sparsity::{SparsityError, SparsityVerdict};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The plane norm of a setting.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    /// A smooth non-Euclidean norm `(|x|^q + |y|^q)^(1/q)`, `q > 1`, `q != 2`.
    Lq(f64),
    /// The polyhedral maximum norm.
    Linf,
}

impl Norm {
    pub fn is_polyhedral(&self) -> bool {
        matches!(self, Norm::Linf)
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::Lq(q) => write!(f, "q={q}"),
            Norm::Linf => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        if matches!(lower.as_str(), "inf" | "linf" | "max") {
            return Ok(Norm::Linf);
        }
        let raw = lower.strip_prefix("q=").unwrap_or(&lower);
        raw.parse::<f64>()
            .map(Norm::Lq)
            .map_err(|_| format!("cannot read a norm from '{s}'; use q=<real> or inf"))
    }
}

/// Errors raised when assembling a [`Setting`].
#[derive(Debug, Error, PartialEq)]
pub enum SettingError {
    #[error("q = {0} is not usable; need a finite q > 1 with q != 2")]
    InvalidQ(f64),
    #[error("the polyhedral norm with the pure reflection group is not supported")]
    UnsupportedCombination,
}

/// A norm together with a symmetry group; fixes the tightness condition, the
/// admissible move set and the base graphs of the construction.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Setting {
    pub norm: Norm,
    pub group: GroupTag,
}

/// The kinds of construction moves.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    ZeroExt,
    OneExt,
    LoopOneExt,
    VertexTo4Cycle,
    VertexToK4,
    EdgeToK3,
    EdgeJoin,
}

impl Setting {
    pub fn new(norm: Norm, group: GroupTag) -> Result<Self, SettingError> {
        if let Norm::Lq(q) = norm {
            if !(q.is_finite() && q > 1.0 && q != 2.0) {
                return Err(SettingError::InvalidQ(q));
            }
        }
        if norm.is_polyhedral() && group == GroupTag::Cs {
            return Err(SettingError::UnsupportedCombination);
        }
        Ok(Setting { norm, group })
    }

    /// The move kinds whose closure generates exactly the tight graphs of
    /// this setting, starting from [`Setting::is_base`] graphs.
    pub fn allowed_moves(&self) -> &'static [MoveKind] {
        use MoveKind::*;
        match (self.norm.is_polyhedral(), self.group) {
            (false, GroupTag::Z2) => &[ZeroExt, OneExt, VertexTo4Cycle, VertexToK4],
            (false, GroupTag::Cs) => {
                &[ZeroExt, OneExt, LoopOneExt, VertexTo4Cycle, VertexToK4, EdgeJoin]
            }
            (false, GroupTag::Z2xCs) => {
                &[ZeroExt, OneExt, LoopOneExt, VertexTo4Cycle, VertexToK4]
            }
            (true, GroupTag::Z2) => &[ZeroExt, OneExt, EdgeToK3, VertexToK4],
            (true, GroupTag::Z2xCs) => &[ZeroExt, OneExt, LoopOneExt, EdgeToK3, VertexToK4],
            (true, GroupTag::Cs) => unreachable!("rejected by Setting::new"),
        }
    }

    /// Whether `g` is a base graph of the construction for this setting:
    /// the single vertex (translations only), a single vertex with one
    /// reflective loop, or, for the reflection group, also the doubled-edge
    /// complete graph on four vertices with a balanced spanning selection.
    pub fn is_base(&self, g: &GainGraph) -> bool {
        match self.group {
            GroupTag::Z2 => g.num_vertices() == 1 && g.num_edges() == 0,
            GroupTag::Z2xCs => {
                g.num_vertices() == 1
                    && g.num_edges() == 1
                    && g.edge(0).is_loop()
                    && g.edge(0).gain.r
            }
            GroupTag::Cs => {
                let single_loop = g.num_vertices() == 1
                    && g.num_edges() == 1
                    && g.edge(0).is_loop()
                    && g.edge(0).gain.r;
                single_loop || is_doubled_k4_base(g)
            }
        }
    }

    /// The setting's tightness checker, dispatched on the group.
    pub fn check_tight(&self, g: &GainGraph) -> Result<SparsityVerdict, SparsityError> {
        crate::sparsity::check_tight_for_group(g)
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.norm, self.group)
    }
}

/// A complete graph on four vertices with every pair joined, one pair
/// doubled, and a balanced one-edge-per-pair selection.
fn is_doubled_k4_base(g: &GainGraph) -> bool {
    if g.num_vertices() != 4 || g.num_edges() != 7 {
        return false;
    }
    let mut by_pair: std::collections::HashMap<(usize, usize), Vec<usize>> =
        std::collections::HashMap::new();
    for (i, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            return false;
        }
        by_pair.entry((e.tail, e.head)).or_default().push(i);
    }
    if by_pair.len() != 6 {
        return false;
    }
    let doubled: Vec<&Vec<usize>> = by_pair.values().filter(|v| v.len() == 2).collect();
    if doubled.len() != 1 {
        return false;
    }
    let forced: Vec<usize> = by_pair
        .values()
        .filter(|v| v.len() == 1)
        .map(|v| v[0])
        .collect();
    doubled[0].iter().any(|&choice| {
        let mut sel = forced.clone();
        sel.push(choice);
        g.is_balanced_subset(&sel)
    })
}

/// A stored edge named by its canonical `(tail, head, gain)` triple; unique
/// within a valid gain graph.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EdgeKey {
    pub tail: usize,
    pub head: usize,
    pub gain: GroupElement,
}

impl EdgeKey {
    pub fn of(e: &Edge) -> Self {
        EdgeKey { tail: e.tail, head: e.head, gain: e.gain }
    }

    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    /// The endpoint other than `v`.
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

/// The canonical stored form of an edge pushed as `(tail, head, gain)`.
pub fn canonical_key(tail: usize, head: usize, gain: GroupElement) -> EdgeKey {
    if tail < head {
        EdgeKey { tail: head, head: tail, gain: gain.inverse() }
    } else {
        EdgeKey { tail, head, gain }
    }
}

/// A structurally valid inverse move: the shrunken graph together with the
/// replay suffix that rebuilds the original from it.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub predecessor: GainGraph,
    pub suffix: Vec<ReplayStep>,
    pub kind: MoveKind,
}

/// Which stored end of an edge a transfer refers to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Tail,
    Head,
}

/// A construction move in coordinates of its predecessor graph.  `v0` (and
/// `new` for the four-vertex split) give the indices at which the new
/// vertices appear in the successor; predecessor vertices at or above an
/// insertion index shift up.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveRecord {
    /// New vertex `v0` with two edges into the old graph.
    ZeroExt { v0: usize, v1: usize, v2: usize, gain1: GroupElement, gain2: GroupElement },
    /// Remove `removed`, add vertex `v0` joined to the removed edge's tail
    /// (gain1), head (gain2) and to `v3` (gain3); needs
    /// `gain1^-1 * gain2 = removed.gain`.
    OneExt {
        v0: usize,
        removed: EdgeKey,
        v3: usize,
        gain1: GroupElement,
        gain2: GroupElement,
        gain3: GroupElement,
    },
    /// New vertex `v0` carrying a loop with a reflective gain plus one edge
    /// to `v1`.
    LoopOneExt { v0: usize, v1: usize, loop_gain: GroupElement, edge_gain: GroupElement },
    /// Split `v1`: new vertex `v0` joined to the far endpoints of `e12` and
    /// `e13`, with `gain02^-1 * gain03` equal to the gain of the path
    /// `v2 -> v1 -> v3`; edges in `transfer` re-root from `v1` to `v0`.
    VertexTo4Cycle {
        v0: usize,
        v1: usize,
        e12: EdgeKey,
        e13: EdgeKey,
        gain02: GroupElement,
        gain03: GroupElement,
        transfer: Vec<EdgeKey>,
    },
    /// Replace `v1` by an identity-gain complete graph on `{v1} + new`;
    /// each transferred edge end at `v1` moves to the corner it names
    /// (corner 0 is `v1` itself, corners 1..=3 are `new`).
    VertexToK4 { v1: usize, new: [usize; 3], transfer: Vec<(EdgeKey, End, usize)> },
    /// New vertex `v0` over the kept edge `edge`, joined to `anchor` (gain1)
    /// and the other endpoint (gain2); needs `gain1^-1 * gain2` equal to the
    /// gain read from `anchor`.  Edges in `transfer` re-root from `anchor`.
    EdgeToK3 {
        v0: usize,
        edge: EdgeKey,
        anchor: usize,
        gain1: GroupElement,
        gain2: GroupElement,
        transfer: Vec<EdgeKey>,
    },
    /// Join two graphs by a single edge.  In a replay this pops the two most
    /// recent graphs; `right_ids` lists the final indices taken by the second
    /// (topmost) graph's vertices, ascending.
    EdgeJoin {
        left_n: usize,
        right_ids: Vec<usize>,
        v1: usize,
        v2: usize,
        gain: GroupElement,
    },
}

impl MoveRecord {
    pub fn kind(&self) -> MoveKind {
        match self {
            MoveRecord::ZeroExt { .. } => MoveKind::ZeroExt,
            MoveRecord::OneExt { .. } => MoveKind::OneExt,
            MoveRecord::LoopOneExt { .. } => MoveKind::LoopOneExt,
            MoveRecord::VertexTo4Cycle { .. } => MoveKind::VertexTo4Cycle,
            MoveRecord::VertexToK4 { .. } => MoveKind::VertexToK4,
            MoveRecord::EdgeToK3 { .. } => MoveKind::EdgeToK3,
            MoveRecord::EdgeJoin { .. } => MoveKind::EdgeJoin,
        }
    }
}

/// One step of a replay program: push a base graph, switch the top graph, or
/// apply a move (joins pop two graphs and push the result).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReplayStep {
    Base { base: GainGraph },
    Switch { switch: (usize, GroupElement) },
    Move(MoveRecord),
}

/// Errors raised by move application, inversion and replay.
#[derive(Debug, Error, PartialEq)]
pub enum MoveError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("gain constraint violated: expected {expected}, got {got}")]
    GainConstraint { expected: GroupElement, got: GroupElement },
    #[error("loop gain {0} has a trivial linear part; the loop must reflect")]
    LinearPartTrivial(GroupElement),
    #[error("edge {0:?} is a loop where a non-loop is required")]
    LoopInput(EdgeKey),
    #[error("vertex {vertex} is not an endpoint where required")]
    NotIncident { vertex: usize },
    #[error("the two far endpoints must be distinct")]
    EndpointsNotDistinct,
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("no stored edge matches {0:?}")]
    MissingEdge(EdgeKey),
    #[error("bad transfer list: {0}")]
    BadTransfer(String),
    #[error("malformed record: {0}")]
    BadRecord(String),
    #[error("record does not invert the graph: {0}")]
    InverseMismatch(String),
    #[error("replay stack holds {found} graphs where {needed} are needed")]
    StackArity { needed: usize, found: usize },
}

/// Renumbering of predecessor vertices once `new_ids` are inserted: returns
/// `old -> final` with the final indices in `new_ids` skipped.
fn insertion_map(n_pred: usize, new_ids: &[usize]) -> Result<Vec<usize>, MoveError> {
    let n_final = n_pred + new_ids.len();
    let mut sorted = new_ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != new_ids.len() || sorted.iter().any(|&v| v >= n_final) {
        return Err(MoveError::BadRecord(format!(
            "invalid insertion indices {new_ids:?} for {n_pred} vertices"
        )));
    }
    let map = (0..n_final).filter(|f| !sorted.contains(f)).collect();
    Ok(map)
}

/// Find the edge with exactly this stored triple; loop keys also match the
/// inverse gain, since a loop and its reversal are the same orbit.
pub(crate) fn resolve_key(g: &GainGraph, key: &EdgeKey) -> Result<usize, MoveError> {
    g.edges()
        .iter()
        .position(|e| {
            e.tail == key.tail
                && e.head == key.head
                && (e.gain == key.gain || (e.is_loop() && e.gain == key.gain.inverse()))
        })
        .ok_or(MoveError::MissingEdge(*key))
}

fn check_vertex(v: usize, n: usize) -> Result<(), MoveError> {
    if v >= n {
        return Err(MoveError::VertexOutOfRange { vertex: v, n });
    }
    Ok(())
}

fn check_gain_constraint(
    gain1: &GroupElement,
    gain2: &GroupElement,
    expected: &GroupElement,
) -> Result<(), MoveError> {
    let got = gain1.inverse().compose(gain2);
    if got != *expected {
        return Err(MoveError::GainConstraint { expected: *expected, got });
    }
    Ok(())
}

/// Apply a record to its predecessor, producing the successor graph.  The
/// result is validated; structural collisions (duplicate orbits, identity
/// loops) surface as [`MoveError::Graph`].
pub fn apply_record(g: &GainGraph, record: &MoveRecord) -> Result<GainGraph, MoveError> {
    let n = g.num_vertices();
    let out = match record {
        MoveRecord::ZeroExt { v0, v1, v2, gain1, gain2 } => {
            check_vertex(*v1, n)?;
            check_vertex(*v2, n)?;
            let map = insertion_map(n, &[*v0])?;
            let mut out = copy_renumbered(g, &map, &[]);
            out.push_edge(*v0, map[*v1], *gain1);
            out.push_edge(*v0, map[*v2], *gain2);
            out
        }
        MoveRecord::OneExt { v0, removed, v3, gain1, gain2, gain3 } => {
            check_vertex(*v3, n)?;
            let idx = resolve_key(g, removed)?;
            check_gain_constraint(gain1, gain2, &g.edge(idx).gain)?;
            let map = insertion_map(n, &[*v0])?;
            let mut out = copy_renumbered(g, &map, &[idx]);
            out.push_edge(*v0, map[removed.tail], *gain1);
            out.push_edge(*v0, map[removed.head], *gain2);
            out.push_edge(*v0, map[*v3], *gain3);
            out
        }
        MoveRecord::LoopOneExt { v0, v1, loop_gain, edge_gain } => {
            check_vertex(*v1, n)?;
            if loop_gain.is_translation() {
                return Err(MoveError::LinearPartTrivial(*loop_gain));
            }
            let map = insertion_map(n, &[*v0])?;
            let mut out = copy_renumbered(g, &map, &[]);
            out.push_edge(*v0, *v0, *loop_gain);
            out.push_edge(*v0, map[*v1], *edge_gain);
            out
        }
        MoveRecord::VertexTo4Cycle { v0, v1, e12, e13, gain02, gain03, transfer } => {
            check_vertex(*v1, n)?;
            let i12 = resolve_key(g, e12)?;
            let i13 = resolve_key(g, e13)?;
            for (key, idx) in [(e12, i12), (e13, i13)] {
                if key.is_loop() {
                    return Err(MoveError::LoopInput(*key));
                }
                if g.edge(idx).tail != *v1 && g.edge(idx).head != *v1 {
                    return Err(MoveError::NotIncident { vertex: *v1 });
                }
            }
            let (v2, v3) = (e12.other(*v1), e13.other(*v1));
            if i12 == i13 || v2 == v3 {
                return Err(MoveError::EndpointsNotDistinct);
            }
            let m12 = e12.gain_from(*v1);
            let m13 = e13.gain_from(*v1);
            check_gain_constraint(gain02, gain03, &m12.inverse().compose(&m13))?;
            let moved = resolve_transfer(g, transfer, *v1, &[i12, i13])?;
            let map = insertion_map(n, &[*v0])?;
            let mut out = GainGraph::new(g.group(), n + 1);
            for (i, e) in g.edges().iter().enumerate() {
                if moved.contains(&i) {
                    // Both ends at v1 (a loop) move together.
                    let (t, h) = (
                        if e.tail == *v1 { *v0 } else { map[e.tail] },
                        if e.head == *v1 { *v0 } else { map[e.head] },
                    );
                    out.push_edge(t, h, e.gain);
                } else {
                    out.push_edge(map[e.tail], map[e.head], e.gain);
                }
            }
            out.push_edge(*v0, map[v2], *gain02);
            out.push_edge(*v0, map[v3], *gain03);
            out
        }
        MoveRecord::VertexToK4 { v1, new, transfer } => {
            check_vertex(*v1, n)?;
            let map = insertion_map(n, new)?;
            let corners = [map[*v1], new[0], new[1], new[2]];
            let mut end_moves: std::collections::HashMap<(usize, End), usize> =
                std::collections::HashMap::new();
            for (key, end, corner) in transfer {
                let idx = resolve_key(g, key)?;
                if *corner > 3 {
                    return Err(MoveError::BadRecord(format!("corner {corner} out of range")));
                }
                let e = g.edge(idx);
                let end_vertex = match end {
                    End::Tail => e.tail,
                    End::Head => e.head,
                };
                if end_vertex != *v1 {
                    return Err(MoveError::NotIncident { vertex: *v1 });
                }
                if end_moves.insert((idx, *end), *corner).is_some() {
                    return Err(MoveError::BadTransfer(format!(
                        "edge end {key:?}/{end:?} transferred twice"
                    )));
                }
            }
            let mut out = GainGraph::new(g.group(), n + 3);
            for (i, e) in g.edges().iter().enumerate() {
                let place = |end: End, v: usize| -> usize {
                    match end_moves.get(&(i, end)) {
                        Some(&corner) => corners[corner],
                        None => map[v],
                    }
                };
                out.push_edge(place(End::Tail, e.tail), place(End::Head, e.head), e.gain);
            }
            for a in 0..4usize {
                for b in 0..a {
                    out.push_edge(corners[a], corners[b], GroupElement::IDENTITY);
                }
            }
            out
        }
        MoveRecord::EdgeToK3 { v0, edge, anchor, gain1, gain2, transfer } => {
            if edge.is_loop() {
                return Err(MoveError::LoopInput(*edge));
            }
            let idx = resolve_key(g, edge)?;
            if *anchor != edge.tail && *anchor != edge.head {
                return Err(MoveError::NotIncident { vertex: *anchor });
            }
            let other = edge.other(*anchor);
            check_gain_constraint(gain1, gain2, &edge.gain_from(*anchor))?;
            let moved = resolve_transfer(g, transfer, *anchor, &[idx])?;
            let map = insertion_map(n, &[*v0])?;
            let mut out = GainGraph::new(g.group(), n + 1);
            for (i, e) in g.edges().iter().enumerate() {
                if moved.contains(&i) {
                    let (t, h) = (
                        if e.tail == *anchor { *v0 } else { map[e.tail] },
                        if e.head == *anchor { *v0 } else { map[e.head] },
                    );
                    out.push_edge(t, h, e.gain);
                } else {
                    out.push_edge(map[e.tail], map[e.head], e.gain);
                }
            }
            out.push_edge(*v0, map[*anchor], *gain1);
            out.push_edge(*v0, map[other], *gain2);
            out
        }
        MoveRecord::EdgeJoin { .. } => {
            return Err(MoveError::BadRecord(
                "edge_join is a stack operation; use apply_step or edge_join".into(),
            ))
        }
    };
    out.validate()?;
    Ok(out)
}

fn copy_renumbered(g: &GainGraph, map: &[usize], skip: &[usize]) -> GainGraph {
    let mut out = GainGraph::new(g.group(), g.num_vertices() + 1);
    for (i, e) in g.edges().iter().enumerate() {
        if !skip.contains(&i) {
            out.push_edge(map[e.tail], map[e.head], e.gain);
        }
    }
    out
}

/// Transferred edges must be incident to `v` and distinct from the excluded
/// edges; returns resolved indices.
fn resolve_transfer(
    g: &GainGraph,
    transfer: &[EdgeKey],
    v: usize,
    excluded: &[usize],
) -> Result<Vec<usize>, MoveError> {
    let mut moved = Vec::new();
    for key in transfer {
        let idx = resolve_key(g, key)?;
        let e = g.edge(idx);
        if e.tail != v && e.head != v {
            return Err(MoveError::NotIncident { vertex: v });
        }
        if excluded.contains(&idx) {
            return Err(MoveError::BadTransfer(format!(
                "{key:?} is one of the move's chosen edges"
            )));
        }
        if moved.contains(&idx) {
            return Err(MoveError::BadTransfer(format!("{key:?} transferred twice")));
        }
        moved.push(idx);
    }
    Ok(moved)
}

// ---------------------------------------------------------------------------
// User-facing extension functions: build a record, then apply it.

/// Add a new vertex of degree two, joined to `v1` and `v2`.
pub fn zero_extension(
    g: &GainGraph,
    v1: usize,
    v2: usize,
    gain1: GroupElement,
    gain2: GroupElement,
) -> Result<(GainGraph, MoveRecord), MoveError> {
    let record = MoveRecord::ZeroExt { v0: g.num_vertices(), v1, v2, gain1, gain2 };
    Ok((apply_record(g, &record)?, record))
}

/// Remove the edge at `edge_idx` and add a new vertex of degree three joined
/// to the removed edge's endpoints and to `v3`.  The two replacement gains
/// must compose to the removed gain: `gain1^-1 * gain2 = m(removed)` read
/// along the stored orientation.
pub fn one_extension(
    g: &GainGraph,
    edge_idx: usize,
    v3: usize,
    gain1: GroupElement,
    gain2: GroupElement,
    gain3: GroupElement,
) -> Result<(GainGraph, MoveRecord), MoveError> {
    let removed = EdgeKey::of(g.edge(edge_idx));
    let record =
        MoveRecord::OneExt { v0: g.num_vertices(), removed, v3, gain1, gain2, gain3 };
    Ok((apply_record(g, &record)?, record))
}

/// Add a new vertex carrying a reflective loop and one edge to `v1`.
pub fn loop_one_extension(
    g: &GainGraph,
    v1: usize,
    loop_gain: GroupElement,
    edge_gain: GroupElement,
) -> Result<(GainGraph, MoveRecord), MoveError> {
    let record = MoveRecord::LoopOneExt { v0: g.num_vertices(), v1, loop_gain, edge_gain };
    Ok((apply_record(g, &record)?, record))
}

/// Split `v1` into a four-cycle: a new vertex `v0` is joined to the far ends
/// of the chosen edges `e12`, `e13` (which stay at `v1`), and the edges in
/// `transfer` re-root from `v1` to `v0`.
pub fn vertex_to_4cycle(
    g: &GainGraph,
    v1: usize,
    e12_idx: usize,
    e13_idx: usize,
    gain02: GroupElement,
    gain03: GroupElement,
    transfer: &[usize],
) -> Result<(GainGraph, MoveRecord), MoveError> {
    let record = MoveRecord::VertexTo4Cycle {
        v0: g.num_vertices(),
        v1,
        e12: EdgeKey::of(g.edge(e12_idx)),
        e13: EdgeKey::of(g.edge(e13_idx)),
        gain02,
        gain03,
        transfer: transfer.iter().map(|&i| EdgeKey::of(g.edge(i))).collect(),
    };
    Ok((apply_record(g, &record)?, record))
}

/// Replace `v1` by an identity-gain complete graph on four vertices; each
/// entry of `transfer` sends one edge end at `v1` to a corner (0 keeps `v1`,
/// 1..=3 are the new vertices).
pub fn vertex_to_k4(
    g: &GainGraph,
    v1: usize,
    transfer: &[(usize, End, usize)],
) -> Result<(GainGraph, MoveRecord), MoveError> {
    let n = g.num_vertices();
    let record = MoveRecord::VertexToK4 {
        v1,
        new: [n, n + 1, n + 2],
        transfer: transfer
            .iter()
            .map(|&(i, end, corner)| (EdgeKey::of(g.edge(i)), end, corner))
            .collect(),
    };
    Ok((apply_record(g, &record)?, record))
}

/// Expand the non-loop edge at `edge_idx` into a triangle: a new vertex is
/// joined to both endpoints (the edge itself stays), and the edges in
/// `transfer` re-root from `anchor` (one of the edge's endpoints) to the new
/// vertex.
pub fn edge_to_k3(
    g: &GainGraph,
    edge_idx: usize,
    anchor: usize,
    gain1: GroupElement,
    gain2: GroupElement,
    transfer: &[usize],
) -> Result<(GainGraph, MoveRecord), MoveError> {
    let record = MoveRecord::EdgeToK3 {
        v0: g.num_vertices(),
        edge: EdgeKey::of(g.edge(edge_idx)),
        anchor,
        gain1,
        gain2,
        transfer: transfer.iter().map(|&i| EdgeKey::of(g.edge(i))).collect(),
    };
    Ok((apply_record(g, &record)?, record))
}

/// Join two disjoint graphs with a single connecting edge from `v1` in the
/// first to `v2` in the second; `gain` is read from `v1`.  Both graphs must
/// share the group tag.
pub fn edge_join(
    g1: &GainGraph,
    g2: &GainGraph,
    v1: usize,
    v2: usize,
    gain: GroupElement,
) -> Result<(GainGraph, MoveRecord), MoveError> {
    assert_eq!(g1.group(), g2.group(), "edge_join requires matching groups");
    let n1 = g1.num_vertices();
    let record = MoveRecord::EdgeJoin {
        left_n: n1,
        right_ids: (n1..n1 + g2.num_vertices()).collect(),
        v1,
        v2,
        gain,
    };
    Ok((apply_join(g1, g2, &record)?, record))
}

/// Apply a join record to explicit left/right operands.
pub fn apply_join(
    g1: &GainGraph,
    g2: &GainGraph,
    record: &MoveRecord,
) -> Result<GainGraph, MoveError> {
    let MoveRecord::EdgeJoin { left_n, right_ids, v1, v2, gain } = record else {
        return Err(MoveError::BadRecord("apply_join needs an edge_join record".into()));
    };
    if *left_n != g1.num_vertices() || right_ids.len() != g2.num_vertices() {
        return Err(MoveError::BadRecord(format!(
            "join arity mismatch: record ({}, {}) vs graphs ({}, {})",
            left_n,
            right_ids.len(),
            g1.num_vertices(),
            g2.num_vertices()
        )));
    }
    check_vertex(*v1, g1.num_vertices())?;
    check_vertex(*v2, g2.num_vertices())?;
    let n = left_n + right_ids.len();
    let left_map = insertion_map(*left_n, right_ids)?;
    let mut out = GainGraph::new(g1.group(), n);
    for e in g1.edges() {
        out.push_edge(left_map[e.tail], left_map[e.head], e.gain);
    }
    for e in g2.edges() {
        out.push_edge(right_ids[e.tail], right_ids[e.head], e.gain);
    }
    out.push_edge(left_map[*v1], right_ids[*v2], *gain);
    out.validate()?;
    Ok(out)
}

/// Outcome of inverting a record: reductions shrink one graph, join
/// inversions split into two.
#[derive(Debug, PartialEq)]
pub enum Inverted {
    Single(GainGraph),
    Split(GainGraph, GainGraph),
}

/// Invert a record on its successor graph, recovering the predecessor(s).
/// The reconstruction is verified by re-applying the record; a graph that
/// does not actually arise from the record is rejected.
pub fn invert_record(g: &GainGraph, record: &MoveRecord) -> Result<Inverted, MoveError> {
    match record {
        MoveRecord::EdgeJoin { left_n, right_ids, v1, v2, gain } => {
            let left_map = insertion_map(*left_n, right_ids)?;
            let mut bridge = GainGraph::new(g.group(), g.num_vertices());
            bridge.push_edge(left_map[*v1], right_ids[*v2], *gain);
            let bridge_edge = bridge.edge(0);
            let idx = g
                .edges()
                .iter()
                .position(|e| e == bridge_edge)
                .ok_or_else(|| MoveError::InverseMismatch("join bridge not present".into()))?;
            let is_right: Vec<bool> = (0..g.num_vertices())
                .map(|v| right_ids.binary_search(&v).is_ok())
                .collect();
            let mut right_rank = vec![usize::MAX; g.num_vertices()];
            for (rank, &v) in right_ids.iter().enumerate() {
                right_rank[v] = rank;
            }
            let mut left_rank = vec![usize::MAX; g.num_vertices()];
            for (rank, &v) in left_map.iter().enumerate() {
                left_rank[v] = rank;
            }
            let mut left = GainGraph::new(g.group(), *left_n);
            let mut right = GainGraph::new(g.group(), right_ids.len());
            for (i, e) in g.edges().iter().enumerate() {
                if i == idx {
                    continue;
                }
                match (is_right[e.tail], is_right[e.head]) {
                    (true, true) => right.push_edge(right_rank[e.tail], right_rank[e.head], e.gain),
                    (false, false) => left.push_edge(left_rank[e.tail], left_rank[e.head], e.gain),
                    _ => {
                        return Err(MoveError::InverseMismatch(
                            "an edge besides the bridge crosses the join cut".into(),
                        ))
                    }
                }
            }
            let rejoined = apply_join(&left, &right, record)?;
            if !rejoined.same_up_to_edge_order(g) {
                return Err(MoveError::InverseMismatch("re-applied join differs".into()));
            }
            Ok(Inverted::Split(left, right))
        }
        _ => {
            let pred = reconstruct_predecessor(g, record)?;
            let redone = apply_record(&pred, record)?;
            if !redone.same_up_to_edge_order(g) {
                return Err(MoveError::InverseMismatch("re-applied move differs".into()));
            }
            Ok(Inverted::Single(pred))
        }
    }
}

/// Rebuild the predecessor of a unary record by peeling the new vertices and
/// restoring transferred or removed edges.  Structural expectations that fail
/// here surface as [`MoveError::InverseMismatch`].
fn reconstruct_predecessor(g: &GainGraph, record: &MoveRecord) -> Result<GainGraph, MoveError> {
    let removed_ids: Vec<usize> = match record {
        MoveRecord::ZeroExt { v0, .. }
        | MoveRecord::OneExt { v0, .. }
        | MoveRecord::LoopOneExt { v0, .. }
        | MoveRecord::VertexTo4Cycle { v0, .. }
        | MoveRecord::EdgeToK3 { v0, .. } => vec![*v0],
        MoveRecord::VertexToK4 { new, .. } => new.to_vec(),
        MoveRecord::EdgeJoin { .. } => {
            return Err(MoveError::BadRecord("join inversion handled separately".into()))
        }
    };
    let n_pred = g.num_vertices() - removed_ids.len();
    let map = insertion_map(n_pred, &removed_ids)?; // pred -> successor
    let mut back = vec![usize::MAX; g.num_vertices()];
    for (pred, &fin) in map.iter().enumerate() {
        back[fin] = pred;
    }
    let is_removed = |v: usize| back[v] == usize::MAX;

    let mut pred = GainGraph::new(g.group(), n_pred);
    match record {
        MoveRecord::ZeroExt { v0, v1, v2, gain1, gain2 } => {
            let mut expect = vec![(map[*v1], *gain1), (map[*v2], *gain2)];
            peel_new_vertex(g, *v0, &mut expect, &mut pred, &back, None)?;
        }
        MoveRecord::OneExt { v0, removed, v3, gain1, gain2, gain3 } => {
            let mut expect = vec![
                (map[removed.tail], *gain1),
                (map[removed.head], *gain2),
                (map[*v3], *gain3),
            ];
            peel_new_vertex(g, *v0, &mut expect, &mut pred, &back, None)?;
            pred.push_edge(removed.tail, removed.head, removed.gain);
        }
        MoveRecord::LoopOneExt { v0, v1, loop_gain, edge_gain } => {
            let mut expect = vec![(*v0, *loop_gain), (map[*v1], *edge_gain)];
            peel_new_vertex(g, *v0, &mut expect, &mut pred, &back, None)?;
        }
        MoveRecord::VertexTo4Cycle { v0, v1, e12, e13, gain02, gain03, .. } => {
            let (v2, v3) = (e12.other(*v1), e13.other(*v1));
            let mut expect = vec![(map[v2], *gain02), (map[v3], *gain03)];
            peel_new_vertex(g, *v0, &mut expect, &mut pred, &back, Some(*v1))?;
        }
        MoveRecord::EdgeToK3 { v0, edge, anchor, gain1, gain2, .. } => {
            let other = edge.other(*anchor);
            let mut expect = vec![(map[*anchor], *gain1), (map[other], *gain2)];
            peel_new_vertex(g, *v0, &mut expect, &mut pred, &back, Some(*anchor))?;
        }
        MoveRecord::VertexToK4 { v1, new, .. } => {
            let corners = [map[*v1], new[0], new[1], new[2]];
            let mut k4_edges = Vec::new();
            for a in 0..4usize {
                for b in 0..a {
                    let (t, h) = (corners[a].max(corners[b]), corners[a].min(corners[b]));
                    let idx = g
                        .edges()
                        .iter()
                        .position(|e| e.tail == t && e.head == h && e.gain.is_identity())
                        .ok_or_else(|| {
                            MoveError::InverseMismatch(format!(
                                "identity corner edge {t}-{h} missing"
                            ))
                        })?;
                    if k4_edges.contains(&idx) {
                        return Err(MoveError::InverseMismatch(
                            "corner edge matched twice".into(),
                        ));
                    }
                    k4_edges.push(idx);
                }
            }
            for (i, e) in g.edges().iter().enumerate() {
                if k4_edges.contains(&i) {
                    continue;
                }
                let pull = |v: usize| if is_removed(v) { *v1 } else { back[v] };
                pred.push_edge(pull(e.tail), pull(e.head), e.gain);
            }
        }
        MoveRecord::EdgeJoin { .. } => unreachable!(),
    }
    Ok(pred)
}

/// Peel a single new vertex `v0`: its incident edges must include the
/// expected `(other endpoint, gain read from v0)` pairs exactly once each;
/// any remaining incident edges re-root to `reroot` (transferred edges).
/// All other edges are copied back through `back`.
fn peel_new_vertex(
    g: &GainGraph,
    v0: usize,
    expect: &mut Vec<(usize, GroupElement)>,
    pred: &mut GainGraph,
    back: &[usize],
    reroot: Option<usize>,
) -> Result<(), MoveError> {
    for e in g.edges() {
        let at_v0 = e.tail == v0 || e.head == v0;
        if !at_v0 {
            pred.push_edge(back[e.tail], back[e.head], e.gain);
            continue;
        }
        if e.is_loop() {
            // A loop at v0: either the expected loop or a transferred loop.
            if let Some(pos) = expect.iter().position(|&(w, gain)| {
                w == v0 && (gain == e.gain || gain == e.gain.inverse())
            }) {
                expect.remove(pos);
            } else if let Some(r) = reroot {
                pred.push_edge(r, r, e.gain);
            } else {
                return Err(MoveError::InverseMismatch(format!(
                    "unexpected loop at new vertex {v0}"
                )));
            }
            continue;
        }
        let other = e.other(v0);
        let gain = e.gain_from(v0);
        if let Some(pos) = expect.iter().position(|&(w, gn)| w == other && gn == gain) {
            expect.remove(pos);
        } else if let Some(r) = reroot {
            pred.push_edge(r, back[other], gain);
        } else {
            return Err(MoveError::InverseMismatch(format!(
                "unexpected edge at new vertex {v0}"
            )));
        }
    }
    if !expect.is_empty() {
        return Err(MoveError::InverseMismatch(format!(
            "expected new-vertex edges missing: {expect:?}"
        )));
    }
    Ok(())
}

/// Execute one replay step against a stack of graphs.
pub fn apply_step(stack: &mut Vec<GainGraph>, step: &ReplayStep) -> Result<(), MoveError> {
    match step {
        ReplayStep::Base { base } => {
            base.validate()?;
            stack.push(base.clone());
        }
        ReplayStep::Switch { switch: (v, gamma) } => {
            let top = stack.last_mut().ok_or(MoveError::StackArity { needed: 1, found: 0 })?;
            check_vertex(*v, top.num_vertices())?;
            *top = top.switch(*v, gamma);
        }
        ReplayStep::Move(record) => match record {
            MoveRecord::EdgeJoin { .. } => {
                if stack.len() < 2 {
                    return Err(MoveError::StackArity { needed: 2, found: stack.len() });
                }
                let right = stack.pop().unwrap();
                let left = stack.pop().unwrap();
                stack.push(apply_join(&left, &right, record)?);
            }
            _ => {
                let top = stack.last_mut().ok_or(MoveError::StackArity { needed: 1, found: 0 })?;
                *top = apply_record(top, record)?;
            }
        },
    }
    Ok(())
}

/// Replay a full program; exactly one graph must remain.
pub fn replay(steps: &[ReplayStep]) -> Result<GainGraph, MoveError> {
    let mut stack = Vec::new();
    for step in steps {
        apply_step(&mut stack, step)?;
    }
    if stack.len() != 1 {
        return Err(MoveError::StackArity { needed: 1, found: stack.len() });
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests;
