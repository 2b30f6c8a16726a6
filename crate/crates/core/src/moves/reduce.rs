//! Inverse moves: shrink a tight gain graph step by step down to a base
//! graph, emitting a replay program that reconstructs the input exactly.
//!
//! [`candidate_reductions`] enumerates the structurally valid inverse moves
//! at one vertex; [`reduce_once`] picks the first candidate whose result the
//! tightness checker accepts; [`reduce_to_base`] drives the recursion,
//! splitting at bridges first for the reflection group.  Contractions of a
//! switched subgraph append explicit switch steps to the replay so that the
//! replayed graph matches the input gain for gain, not merely up to
//! switching equivalence.

use super::{
    apply_join, canonical_key, replay, Candidate, End, MoveError, MoveKind, MoveRecord,
    ReplayStep, Setting,
};
use crate::gain_graph::GainGraph;
use crate::group::{GroupElement, GroupTag};
use crate::sparsity::{SparsityError, SparsityVerdict};
use thiserror::Error;

/// Errors raised by the reduction driver.
#[derive(Debug, Error, PartialEq)]
pub enum ReduceError {
    #[error("the graph is already a base graph of this setting")]
    AlreadyBase,
    #[error("input graph is not tight: {0:?}")]
    InputNotTight(SparsityVerdict),
    #[error("no admissible reduction exists for a tight graph on {} vertices and {} edges", at.num_vertices(), at.num_edges())]
    NoAdmissibleReduction { at: GainGraph },
    #[error(transparent)]
    Sparsity(#[from] SparsityError),
    #[error(transparent)]
    Move(#[from] MoveError),
}

/// Outcome of one reduction step.
#[derive(Debug)]
pub enum Reduction {
    /// One graph shrank; `suffix` replays it back from `predecessor`.
    Shrunk { predecessor: GainGraph, suffix: Vec<ReplayStep> },
    /// A bridge split into two tight halves joined by `record`.
    Split { left: GainGraph, right: GainGraph, record: MoveRecord },
}

/// Renumbering from original vertex ids to predecessor ids once `removed`
/// (sorted) disappear; removed slots hold `usize::MAX`.
fn back_map(n: usize, removed: &[usize]) -> Vec<usize> {
    let mut back = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if !removed.contains(&v) {
            back[v] = next;
            next += 1;
        }
    }
    back
}

fn incident_edges(g: &GainGraph, v: usize) -> Vec<usize> {
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.tail == v || e.head == v)
        .map(|(i, _)| i)
        .collect()
}

/// Copy every edge except `skip`, renumbered through `back`.
fn copy_without(g: &GainGraph, pred: &mut GainGraph, back: &[usize], skip: &[usize]) {
    for (i, e) in g.edges().iter().enumerate() {
        if !skip.contains(&i) {
            pred.push_edge(back[e.tail], back[e.head], e.gain);
        }
    }
}

/// Keep a candidate only if its replay suffix really rebuilds `g` from the
/// predecessor; enumeration bugs then surface as missing candidates in
/// tests rather than corrupt replays.
fn verified(g: &GainGraph, candidate: Candidate) -> Option<Candidate> {
    if candidate.predecessor.validate().is_err() {
        return None;
    }
    let mut steps = vec![ReplayStep::Base { base: candidate.predecessor.clone() }];
    steps.extend(candidate.suffix.iter().cloned());
    match replay(&steps) {
        Ok(rebuilt) if rebuilt.same_up_to_edge_order(g) => Some(candidate),
        _ => None,
    }
}

/// Every structurally valid inverse move that removes vertex `v` (degree two
/// or three) under this setting's move set, in deterministic order.  Results
/// are not tightness-checked; [`reduce_once`] filters with the checker.
pub fn candidate_reductions(g: &GainGraph, setting: &Setting, v: usize) -> Vec<Candidate> {
    let allowed = setting.allowed_moves();
    let inc = incident_edges(g, v);
    let deg = g.degree(v);
    let loops: Vec<usize> = inc.iter().copied().filter(|&i| g.edge(i).is_loop()).collect();
    let mut out = Vec::new();

    if deg == 2 && loops.is_empty() && inc.len() == 2 {
        out.extend(zero_reduction(g, v, inc[0], inc[1]));
    }
    if deg == 3 && loops.len() == 1 && inc.len() == 2 {
        if allowed.contains(&MoveKind::LoopOneExt) {
            let edge = *inc.iter().find(|&&i| !g.edge(i).is_loop()).unwrap();
            out.extend(loop_one_reduction(g, v, loops[0], edge));
        }
    }
    if deg == 3 && loops.is_empty() && inc.len() == 3 {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let kept = inc[3 - a - b];
            out.extend(one_reduction(g, v, inc[a], inc[b], kept));
        }
        if allowed.contains(&MoveKind::VertexToK4) {
            out.extend(k4_contractions(g, v, &inc));
        }
        if allowed.contains(&MoveKind::VertexTo4Cycle) {
            out.extend(four_cycle_reductions(g, v, &inc));
        }
        if allowed.contains(&MoveKind::EdgeToK3) {
            out.extend(k3_contractions(g, v, &inc));
        }
    }
    out.into_iter().filter_map(|c| verified(g, c)).collect()
}

fn zero_reduction(g: &GainGraph, v: usize, i: usize, j: usize) -> Option<Candidate> {
    let back = back_map(g.num_vertices(), &[v]);
    let (ei, ej) = (g.edge(i), g.edge(j));
    let mut pred = GainGraph::new(g.group(), g.num_vertices() - 1);
    copy_without(g, &mut pred, &back, &[i, j]);
    let record = MoveRecord::ZeroExt {
        v0: v,
        v1: back[ei.other(v)],
        v2: back[ej.other(v)],
        gain1: ei.gain_from(v),
        gain2: ej.gain_from(v),
    };
    Some(Candidate {
        predecessor: pred,
        suffix: vec![ReplayStep::Move(record)],
        kind: MoveKind::ZeroExt,
    })
}

fn loop_one_reduction(
    g: &GainGraph,
    v: usize,
    loop_idx: usize,
    edge_idx: usize,
) -> Option<Candidate> {
    let loop_gain = g.edge(loop_idx).gain;
    if loop_gain.is_translation() {
        return None;
    }
    let back = back_map(g.num_vertices(), &[v]);
    let mut pred = GainGraph::new(g.group(), g.num_vertices() - 1);
    copy_without(g, &mut pred, &back, &[loop_idx, edge_idx]);
    let record = MoveRecord::LoopOneExt {
        v0: v,
        v1: back[g.edge(edge_idx).other(v)],
        loop_gain,
        edge_gain: g.edge(edge_idx).gain_from(v),
    };
    Some(Candidate {
        predecessor: pred,
        suffix: vec![ReplayStep::Move(record)],
        kind: MoveKind::LoopOneExt,
    })
}

/// Remove `v` and its three edges, adding one edge between the far ends of
/// `i` and `j` carrying the composite gain of the path through `v`.
fn one_reduction(g: &GainGraph, v: usize, i: usize, j: usize, kept: usize) -> Option<Candidate> {
    let back = back_map(g.num_vertices(), &[v]);
    let (fi, fj, fk) = (g.edge(i).other(v), g.edge(j).other(v), g.edge(kept).other(v));
    let (mi, mj, mk) = (
        g.edge(i).gain_from(v),
        g.edge(j).gain_from(v),
        g.edge(kept).gain_from(v),
    );
    let new_gain = mi.inverse().compose(&mj);
    let mut pred = GainGraph::new(g.group(), g.num_vertices() - 1);
    copy_without(g, &mut pred, &back, &[i, j, kept]);
    pred.push_edge(back[fi], back[fj], new_gain);
    let stored = canonical_key(back[fi], back[fj], new_gain);
    // gain1 attaches the new vertex to the stored tail of the restored edge,
    // so orient the pair to match the canonical flip.
    let (gain1, gain2) = if stored.tail == back[fi] { (mi, mj) } else { (mj, mi) };
    let record = MoveRecord::OneExt { v0: v, removed: stored, v3: back[fk], gain1, gain2, gain3: mk };
    Some(Candidate {
        predecessor: pred,
        suffix: vec![ReplayStep::Move(record)],
        kind: MoveKind::OneExt,
    })
}

/// Contract a complete graph on `v` and its three neighbours whose edges
/// admit a balanced one-per-pair selection.  The selection is switched to
/// identity gains first; the replay un-switches afterwards.
fn k4_contractions(g: &GainGraph, v: usize, inc: &[usize]) -> Vec<Candidate> {
    let mut fars: Vec<usize> = inc.iter().map(|&i| g.edge(i).other(v)).collect();
    fars.sort_unstable();
    fars.dedup();
    if fars.len() != 3 {
        return Vec::new();
    }
    let mut w: Vec<usize> = fars;
    w.push(v);
    w.sort_unstable();
    let pair_lists: Vec<Vec<usize>> = pairs_of(&w)
        .into_iter()
        .map(|(a, b)| {
            g.edges()
                .iter()
                .enumerate()
                .filter(|(_, e)| {
                    !e.is_loop() && ((e.tail == a && e.head == b) || (e.tail == b && e.head == a))
                })
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    if pair_lists.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for sel in cartesian(&pair_lists) {
        if !g.is_balanced_subset(&sel) {
            continue;
        }
        if let Some(c) = contract_balanced_k4(g, &w, &sel) {
            out.push(c);
        }
    }
    out
}

fn pairs_of(w: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..w.len() {
        for b in a + 1..w.len() {
            out.push((w[a], w[b]));
        }
    }
    out
}

fn cartesian(lists: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::new();
        for base in &out {
            for &item in list {
                let mut sel = base.clone();
                sel.push(item);
                next.push(sel);
            }
        }
        out = next;
        if out.len() > 64 {
            out.truncate(64);
        }
    }
    out
}

fn contract_balanced_k4(g: &GainGraph, w: &[usize], sel: &[usize]) -> Option<Candidate> {
    let survivor = w[0];
    let removed = &w[1..];
    // Potentials along the balanced selection, relative to the survivor.
    let mut phi = vec![GroupElement::IDENTITY; g.num_vertices()];
    for &i in sel {
        let e = g.edge(i);
        if e.tail == survivor || e.head == survivor {
            let other = e.other(survivor);
            phi[other] = e.gain_from(survivor);
        }
    }
    let mut gsw = g.clone();
    let mut unswitch = Vec::new();
    for &u in removed {
        if !phi[u].is_identity() {
            gsw = gsw.switch(u, &phi[u]);
            unswitch.push(ReplayStep::Switch { switch: (u, phi[u].inverse()) });
        }
    }
    debug_assert!(sel.iter().all(|&i| gsw.edge(i).gain.is_identity()));

    let back = back_map(g.num_vertices(), removed);
    let corner_of = |u: usize| w.iter().position(|&x| x == u).unwrap();
    let mut pred = GainGraph::new(g.group(), g.num_vertices() - 3);
    let mut transfer = Vec::new();
    for (i, e) in gsw.edges().iter().enumerate() {
        if sel.contains(&i) {
            continue;
        }
        let pull = |u: usize| if removed.contains(&u) { survivor } else { u };
        let (t, h) = (pull(e.tail), pull(e.head));
        let (pt, ph) = (back[t], back[h]);
        let key = canonical_key(pt, ph, e.gain);
        let flipped = pt < ph;
        pred.push_edge(pt, ph, e.gain);
        if removed.contains(&e.tail) {
            let end = if flipped { End::Head } else { End::Tail };
            transfer.push((key, end, corner_of(e.tail)));
        }
        if removed.contains(&e.head) {
            let end = if flipped { End::Tail } else { End::Head };
            transfer.push((key, end, corner_of(e.head)));
        }
    }
    let record = MoveRecord::VertexToK4 {
        v1: back[survivor],
        new: [removed[0], removed[1], removed[2]],
        transfer,
    };
    let mut suffix = vec![ReplayStep::Move(record)];
    suffix.extend(unswitch);
    Some(Candidate { predecessor: pred, suffix, kind: MoveKind::VertexToK4 })
}

/// Merge `v` into a fourth vertex across a four-cycle: two of `v`'s edges
/// must run parallel (after switching `v`) to edges from the fourth vertex
/// to the same far ends; the third edge re-roots to the fourth vertex.
fn four_cycle_reductions(g: &GainGraph, v: usize, inc: &[usize]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let (i, j) = (inc[a], inc[b]);
        let kept = inc[3 - a - b];
        let (fi, fj) = (g.edge(i).other(v), g.edge(j).other(v));
        if fi == fj {
            continue;
        }
        let (mi, mj) = (g.edge(i).gain_from(v), g.edge(j).gain_from(v));
        let want = mi.inverse().compose(&mj);
        for v4 in 0..g.num_vertices() {
            if v4 == v || v4 == fi || v4 == fj {
                continue;
            }
            for p in incident_edges(g, v4) {
                let ep = g.edge(p);
                if ep.is_loop() || ep.other(v4) != fi {
                    continue;
                }
                let k1 = ep.gain_from(v4);
                for q in incident_edges(g, v4) {
                    let eq = g.edge(q);
                    if eq.is_loop() || eq.other(v4) != fj {
                        continue;
                    }
                    let k2 = eq.gain_from(v4);
                    if k1.inverse().compose(&k2) != want {
                        continue;
                    }
                    out.extend(merge_into_four_cycle(
                        g, v, v4, i, j, kept, p, q, k1, k2, mi,
                    ));
                }
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn merge_into_four_cycle(
    g: &GainGraph,
    v: usize,
    v4: usize,
    i: usize,
    j: usize,
    kept: usize,
    p: usize,
    q: usize,
    k1: GroupElement,
    k2: GroupElement,
    mi: GroupElement,
) -> Option<Candidate> {
    let gamma = k1.compose(&mi.inverse());
    let fk = g.edge(kept).other(v);
    let moved_gain = gamma.compose(&g.edge(kept).gain_from(v));
    let back = back_map(g.num_vertices(), &[v]);
    let mut pred = GainGraph::new(g.group(), g.num_vertices() - 1);
    copy_without(g, &mut pred, &back, &[i, j, kept]);
    pred.push_edge(back[v4], back[fk], moved_gain);

    let key_of = |idx: usize| {
        let e = g.edge(idx);
        canonical_key(back[e.tail], back[e.head], e.gain)
    };
    let record = MoveRecord::VertexTo4Cycle {
        v0: v,
        v1: back[v4],
        e12: key_of(p),
        e13: key_of(q),
        gain02: k1,
        gain03: k2,
        transfer: vec![canonical_key(back[v4], back[fk], moved_gain)],
    };
    let mut suffix = vec![ReplayStep::Move(record)];
    if !gamma.is_identity() {
        suffix.push(ReplayStep::Switch { switch: (v, gamma.inverse()) });
    }
    Some(Candidate { predecessor: pred, suffix, kind: MoveKind::VertexTo4Cycle })
}

/// Contract a triangle through `v`: two of `v`'s edges plus a base edge
/// between their far ends carrying the composite gain; `v`'s remaining
/// edges re-root to the chosen anchor.
fn k3_contractions(g: &GainGraph, v: usize, inc: &[usize]) -> Vec<Candidate> {
    let non_loops: Vec<usize> =
        inc.iter().copied().filter(|&i| !g.edge(i).is_loop()).collect();
    let mut out = Vec::new();
    for a in 0..non_loops.len() {
        for b in a + 1..non_loops.len() {
            let (i, j) = (non_loops[a], non_loops[b]);
            let (x, y) = (g.edge(i).other(v), g.edge(j).other(v));
            if x == y || x == v || y == v {
                continue;
            }
            let (mi, mj) = (g.edge(i).gain_from(v), g.edge(j).gain_from(v));
            let want = mi.inverse().compose(&mj);
            for (base_idx, e) in g.edges().iter().enumerate() {
                if e.is_loop() {
                    continue;
                }
                let spans = (e.tail == x && e.head == y) || (e.tail == y && e.head == x);
                if !spans || e.gain_from(x) != want {
                    continue;
                }
                out.extend(contract_triangle(g, v, i, j, base_idx, x, mi, mj));
                out.extend(contract_triangle(g, v, j, i, base_idx, y, mj, mi));
            }
        }
    }
    out
}

fn contract_triangle(
    g: &GainGraph,
    v: usize,
    i: usize,
    j: usize,
    base_idx: usize,
    anchor: usize,
    mi: GroupElement,
    mj: GroupElement,
) -> Option<Candidate> {
    let back = back_map(g.num_vertices(), &[v]);
    let mut pred = GainGraph::new(g.group(), g.num_vertices() - 1);
    let mut transfer = Vec::new();
    // Contracting the edge v -> anchor routes every remaining edge at v
    // through the anchor, so their gains pick up the path factor mi^-1; the
    // recorded move then re-expands with an identity gain towards the
    // anchor, and the trailing switch restores the original gains at v.
    let pull = mi.inverse();
    for (idx, e) in g.edges().iter().enumerate() {
        if idx == i || idx == j {
            continue;
        }
        if e.tail == v || e.head == v {
            if e.is_loop() {
                let gain = pull.compose(&e.gain).compose(&mi);
                pred.push_edge(back[anchor], back[anchor], gain);
                transfer.push(canonical_key(back[anchor], back[anchor], gain));
            } else {
                let gain = pull.compose(&e.gain_from(v));
                let far = back[e.other(v)];
                pred.push_edge(back[anchor], far, gain);
                transfer.push(canonical_key(back[anchor], far, gain));
            }
        } else {
            pred.push_edge(back[e.tail], back[e.head], e.gain);
        }
    }
    let base = g.edge(base_idx);
    let record = MoveRecord::EdgeToK3 {
        v0: v,
        edge: canonical_key(back[base.tail], back[base.head], base.gain),
        anchor: back[anchor],
        gain1: GroupElement::IDENTITY,
        gain2: pull.compose(&mj),
        transfer,
    };
    let mut suffix = vec![ReplayStep::Move(record)];
    if !mi.is_identity() {
        suffix.push(ReplayStep::Switch { switch: (v, mi) });
    }
    Some(Candidate { predecessor: pred, suffix, kind: MoveKind::EdgeToK3 })
}

/// Try to split a reflection-group graph at a bridge whose two sides are
/// both tight; scanned in ascending edge order.
fn bridge_split(g: &GainGraph, setting: &Setting) -> Result<Option<Reduction>, ReduceError> {
    let n = g.num_vertices();
    for (idx, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            continue;
        }
        let comps = g.components_filtered(&|i| i != idx);
        if comps.len() != 2 {
            continue;
        }
        let left_ids = if comps[0].contains(&0) { &comps[0] } else { &comps[1] };
        let right_ids = if comps[0].contains(&0) { &comps[1] } else { &comps[0] };
        let mut left_rank = vec![usize::MAX; n];
        for (r, &u) in left_ids.iter().enumerate() {
            left_rank[u] = r;
        }
        let mut right_rank = vec![usize::MAX; n];
        for (r, &u) in right_ids.iter().enumerate() {
            right_rank[u] = r;
        }
        let mut left = GainGraph::new(g.group(), left_ids.len());
        let mut right = GainGraph::new(g.group(), right_ids.len());
        for (i, f) in g.edges().iter().enumerate() {
            if i == idx {
                continue;
            }
            if left_rank[f.tail] != usize::MAX {
                left.push_edge(left_rank[f.tail], left_rank[f.head], f.gain);
            } else {
                right.push_edge(right_rank[f.tail], right_rank[f.head], f.gain);
            }
        }
        if !setting.check_tight(&left)?.is_tight() || !setting.check_tight(&right)?.is_tight() {
            continue;
        }
        let (lv, rv, gain) = if left_rank[e.tail] != usize::MAX {
            (left_rank[e.tail], right_rank[e.head], e.gain)
        } else {
            (left_rank[e.head], right_rank[e.tail], e.gain.inverse())
        };
        let record = MoveRecord::EdgeJoin {
            left_n: left_ids.len(),
            right_ids: right_ids.clone(),
            v1: lv,
            v2: rv,
            gain,
        };
        let rejoined = apply_join(&left, &right, &record)?;
        if !rejoined.same_up_to_edge_order(g) {
            continue;
        }
        return Ok(Some(Reduction::Split { left, right, record }));
    }
    Ok(None)
}

/// Find the first reduction of `g` whose result passes the tightness
/// checker.  For the reflection group, bridge splits are tried first; for
/// the polyhedral norm, triangle contractions at vertices of degree four or
/// more serve as a fallback after the local candidates.
pub fn reduce_once(g: &GainGraph, setting: &Setting) -> Result<Reduction, ReduceError> {
    if setting.is_base(g) {
        return Err(ReduceError::AlreadyBase);
    }
    if setting.group == GroupTag::Cs {
        if let Some(split) = bridge_split(g, setting)? {
            return Ok(split);
        }
    }
    for v in 0..g.num_vertices() {
        let deg = g.degree(v);
        if deg != 2 && deg != 3 {
            continue;
        }
        for candidate in candidate_reductions(g, setting, v) {
            if setting.check_tight(&candidate.predecessor)?.is_tight() {
                return Ok(Reduction::Shrunk {
                    predecessor: candidate.predecessor,
                    suffix: candidate.suffix,
                });
            }
        }
    }
    if setting.norm.is_polyhedral() {
        for v in 0..g.num_vertices() {
            if g.degree(v) < 4 {
                continue;
            }
            let inc = incident_edges(g, v);
            for candidate in k3_contractions(g, v, &inc)
                .into_iter()
                .filter_map(|c| verified(g, c))
            {
                if setting.check_tight(&candidate.predecessor)?.is_tight() {
                    return Ok(Reduction::Shrunk {
                        predecessor: candidate.predecessor,
                        suffix: candidate.suffix,
                    });
                }
            }
        }
    }
    Err(ReduceError::NoAdmissibleReduction { at: g.clone() })
}

/// Reduce a tight graph all the way to base graphs, returning a replay
/// program (base pushes, switches, moves, joins) that rebuilds the input
/// exactly.  Every intermediate graph along the way passes the checker.
pub fn reduce_to_base(g: &GainGraph, setting: &Setting) -> Result<Vec<ReplayStep>, ReduceError> {
    let verdict = setting.check_tight(g)?;
    if !verdict.is_tight() {
        return Err(ReduceError::InputNotTight(verdict));
    }
    let mut steps = Vec::new();
    descend(g.clone(), setting, &mut steps)?;
    Ok(steps)
}

fn descend(g: GainGraph, setting: &Setting, out: &mut Vec<ReplayStep>) -> Result<(), ReduceError> {
    if setting.is_base(&g) {
        out.push(ReplayStep::Base { base: g });
        return Ok(());
    }
    match reduce_once(&g, setting)? {
        Reduction::Shrunk { predecessor, suffix } => {
            descend(predecessor, setting, out)?;
            out.extend(suffix);
        }
        Reduction::Split { left, right, record } => {
            descend(left, setting, out)?;
            descend(right, setting, out)?;
            out.push(ReplayStep::Move(record));
        }
    }
    Ok(())
}
