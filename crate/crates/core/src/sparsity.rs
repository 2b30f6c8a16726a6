//! Sparsity counts for multigraphs and their gain-restricted refinements.
//!
//! A multigraph is `(k, l)`-sparse when every non-empty edge subset `E'`
//! spanning `|V'|` vertices satisfies `|E'| <= k|V'| - l`, and `(k, l)`-tight
//! when additionally `|E| = k|V| - l`.  Two independent implementations are
//! provided on purpose: an incremental pebble game ([`pebble_check`]) and a
//! direct subset-enumeration oracle ([`brute_force_check`]).  They must agree
//! everywhere; the test suite leans on that redundancy.
//!
//! On top of the plain counts sit the gain-restricted conditions
//! characterising rigidity in this crate's settings:
//!
//! * [`check_22_tight`] — translations only: plain `(2, 2)`-tight.
//! * [`check_221_gain_tight`] — reflection group: `(2, 1)`-tight and every
//!   balanced subgraph `(2, 2)`-sparse.
//! * [`check_z2cs_tight`] — translations with reflections: `(2, 1)`-tight and
//!   every purely periodic subgraph `(2, 2)`-sparse.
//!
//! The restricted conditions are decided by enumerating reflection-parity
//! potentials: every balanced (for the reflection group) or purely periodic
//! subgraph lives inside the edge set consistent with some `{0,1}`-potential,
//! and each such "keep-set" is itself of the restricted kind, so running the
//! pebble game on every keep-set covers every restricted subgraph exactly.

use crate::gain_graph::GainGraph;
use crate::group::GroupTag;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Outcome category of a sparsity check.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Sparse and the global count holds with equality.
    Tight,
    /// Sparse, but strictly fewer edges than the tight count.
    SparseNotTight,
    /// Some subgraph breaks the count; see the witness.
    Violation,
}

/// Verdict of a sparsity or gain-tightness check, with a checkable witness
/// for violations.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SparsityVerdict {
    pub status: Status,
    /// Edge indices of a violating subgraph; empty unless `Violation`.
    pub witness_edges: Vec<usize>,
    /// Human-readable statement of the count that passed or failed.
    pub condition: String,
}

impl SparsityVerdict {
    pub fn is_tight(&self) -> bool {
        self.status == Status::Tight
    }

    fn tight(condition: String) -> Self {
        SparsityVerdict { status: Status::Tight, witness_edges: Vec::new(), condition }
    }

    fn sparse_not_tight(condition: String) -> Self {
        SparsityVerdict { status: Status::SparseNotTight, witness_edges: Vec::new(), condition }
    }

    fn violation(witness_edges: Vec<usize>, condition: String) -> Self {
        SparsityVerdict { status: Status::Violation, witness_edges, condition }
    }
}

/// Errors for the checks in this module.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SparsityError {
    #[error("unsupported count (k, l) = ({k}, {l}); need k >= 1 and l <= 2k - 1")]
    UnsupportedCount { k: usize, l: usize },
    #[error("{edges} edges exceed the brute-force limit of {max}")]
    TooLarge { edges: usize, max: usize },
    #[error("checker expects group {expected}, graph is labelled {got}")]
    WrongGroup { expected: GroupTag, got: GroupTag },
    #[error("{free} free parity choices exceed the enumeration limit of {max}")]
    ParityEnumerationTooLarge { free: usize, max: usize },
}

/// Largest edge count the enumeration oracle will accept.
pub const BRUTE_FORCE_MAX_EDGES: usize = 22;

/// Largest number of free parity choices the reflection-side conditions will
/// enumerate; beyond this the check refuses instead of thrashing.
pub const PARITY_ENUM_MAX_FREE: usize = 20;

fn global_verdict(n: usize, m: usize, k: usize, l: usize) -> SparsityVerdict {
    let target = k as i64 * n as i64 - l as i64;
    if m as i64 == target {
        SparsityVerdict::tight(format!("|E| = {m} = {k}|V| - {l} with |V| = {n}"))
    } else {
        SparsityVerdict::sparse_not_tight(format!(
            "sparse, but |E| = {m} != {k}|V| - {l} = {target} with |V| = {n}"
        ))
    }
}

fn violation_condition(edges: usize, support: usize, k: usize, l: usize) -> String {
    format!(
        "{edges} edges on {support} vertices exceed {k}*{support} - {l} = {}",
        k as i64 * support as i64 - l as i64
    )
}

/// Decide `(k, l)`-sparsity of a multigraph with the pebble game.
///
/// Each vertex starts with `k` pebbles.  Inserting an edge requires `l + 1`
/// pebbles on its endpoints (on the single endpoint, for a loop); pebbles are
/// gathered by reversing directed paths.  When gathering fails, the vertices
/// reachable from the endpoints span a subgraph that together with the new
/// edge violates the count — that subgraph is returned as the witness.
///
/// Gains are ignored; only the multigraph structure matters.  Supported
/// range: `k >= 1` and `0 <= l <= 2k - 1`.
pub fn pebble_check(
    n: usize,
    edges: &[(usize, usize)],
    k: usize,
    l: usize,
) -> Result<SparsityVerdict, SparsityError> {
    if k == 0 || l > 2 * k - 1 {
        return Err(SparsityError::UnsupportedCount { k, l });
    }
    let mut game = PebbleGame::new(n, k, l);
    for (id, &(u, v)) in edges.iter().enumerate() {
        if let Some(verdict) = game.insert(u, v, id) {
            return Ok(verdict);
        }
    }
    Ok(global_verdict(n, edges.len(), k, l))
}

struct Slot {
    from: usize,
    to: usize,
    edge_id: usize,
}

struct PebbleGame {
    k: usize,
    l: usize,
    pebbles: Vec<usize>,
    /// Outgoing slot indices per vertex.
    out: Vec<Vec<usize>>,
    slots: Vec<Slot>,
}

impl PebbleGame {
    fn new(n: usize, k: usize, l: usize) -> Self {
        PebbleGame { k, l, pebbles: vec![k; n], out: vec![Vec::new(); n], slots: Vec::new() }
    }

    /// Try to move one pebble to `target` by reversing a directed path to a
    /// pebbled vertex.  Vertices in `frozen` never give up pebbles.
    fn collect_one(&mut self, target: usize, frozen: &[usize]) -> bool {
        let mut parent: Vec<Option<usize>> = vec![None; self.pebbles.len()];
        let mut visited = vec![false; self.pebbles.len()];
        let mut stack = vec![target];
        visited[target] = true;
        while let Some(u) = stack.pop() {
            if u != target && self.pebbles[u] > 0 && !frozen.contains(&u) {
                // Reverse the discovered path target -> ... -> u.
                self.pebbles[u] -= 1;
                self.pebbles[target] += 1;
                let mut w = u;
                while let Some(slot_idx) = parent[w] {
                    let from = self.slots[slot_idx].from;
                    let pos = self.out[from].iter().position(|&s| s == slot_idx).unwrap();
                    self.out[from].swap_remove(pos);
                    self.slots[slot_idx].from = w;
                    self.slots[slot_idx].to = from;
                    self.out[w].push(slot_idx);
                    w = from;
                }
                return true;
            }
            for &slot_idx in &self.out[u] {
                let to = self.slots[slot_idx].to;
                if !visited[to] {
                    visited[to] = true;
                    parent[to] = Some(slot_idx);
                    stack.push(to);
                }
            }
        }
        false
    }

    /// Vertices reachable from the given seeds along directed slots.
    fn reachable(&self, seeds: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.pebbles.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &slot_idx in &self.out[u] {
                let to = self.slots[slot_idx].to;
                if !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }

    fn fail_witness(&self, seeds: &[usize], failing_edge: usize) -> SparsityVerdict {
        let reach = self.reachable(seeds);
        let mut witness: Vec<usize> = self
            .slots
            .iter()
            .filter(|s| reach[s.from])
            .map(|s| s.edge_id)
            .collect();
        witness.push(failing_edge);
        witness.sort_unstable();
        witness.dedup();
        let support = reach.iter().filter(|&&r| r).count();
        SparsityVerdict::violation(
            witness.clone(),
            violation_condition(witness.len(), support, self.k, self.l),
        )
    }

    /// Insert an edge; `None` on success, a violation verdict on failure.
    fn insert(&mut self, u: usize, v: usize, edge_id: usize) -> Option<SparsityVerdict> {
        if u == v {
            if self.l >= self.k {
                // A loop alone already breaks the count: 1 > k - l.
                return Some(SparsityVerdict::violation(
                    vec![edge_id],
                    violation_condition(1, 1, self.k, self.l),
                ));
            }
            while self.pebbles[u] < self.l + 1 {
                if !self.collect_one(u, &[u]) {
                    return Some(self.fail_witness(&[u], edge_id));
                }
            }
            self.pebbles[u] -= 1;
            let slot_idx = self.slots.len();
            self.slots.push(Slot { from: u, to: u, edge_id });
            self.out[u].push(slot_idx);
            return None;
        }
        while self.pebbles[u] + self.pebbles[v] < self.l + 1 {
            let progressed = (self.pebbles[u] < self.k && self.collect_one(u, &[u, v]))
                || (self.pebbles[v] < self.k && self.collect_one(v, &[u, v]));
            if !progressed {
                return Some(self.fail_witness(&[u, v], edge_id));
            }
        }
        let (from, to) = if self.pebbles[u] > 0 { (u, v) } else { (v, u) };
        self.pebbles[from] -= 1;
        let slot_idx = self.slots.len();
        self.slots.push(Slot { from, to, edge_id });
        self.out[from].push(slot_idx);
        None
    }
}

/// Decide `(k, l)`-sparsity by enumerating every non-empty edge subset and
/// checking its count directly.  Independent of [`pebble_check`] by design;
/// refuses more than [`BRUTE_FORCE_MAX_EDGES`] edges.
pub fn brute_force_check(
    n: usize,
    edges: &[(usize, usize)],
    k: usize,
    l: usize,
) -> Result<SparsityVerdict, SparsityError> {
    if k == 0 || l > 2 * k - 1 {
        return Err(SparsityError::UnsupportedCount { k, l });
    }
    let m = edges.len();
    if m > BRUTE_FORCE_MAX_EDGES {
        return Err(SparsityError::TooLarge { edges: m, max: BRUTE_FORCE_MAX_EDGES });
    }
    for mask in 1u32..(1u32 << m) {
        let mut support = std::collections::HashSet::new();
        let mut count = 0i64;
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask & (1 << i) != 0 {
                count += 1;
                support.insert(u);
                support.insert(v);
            }
        }
        if count > k as i64 * support.len() as i64 - l as i64 {
            let witness: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            return Ok(SparsityVerdict::violation(
                witness,
                violation_condition(count as usize, support.len(), k, l),
            ));
        }
    }
    Ok(global_verdict(n, m, k, l))
}

/// Which restricted subgraph family to enumerate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RestrictedKind {
    /// All cycles carry the identity gain.
    Balanced,
    /// All cycles carry pure translations.
    PurelyPeriodic,
}

/// Edge-maximal subgraphs of the restricted kind with support inside `s`.
///
/// Purely periodic subgraphs (and balanced subgraphs of the reflection
/// group, whose gains have no translation part) are exactly the edge sets
/// consistent with a reflection parity potential on the vertices, so those
/// are enumerated by potential.  Balanced subgraphs over groups with
/// translations additionally need a consistent translation potential; that
/// is resolved by propagating potentials through a union-find and branching
/// where components might merge, discarding inconsistent branches.
///
/// Returns edge-index sets, deduplicated, only set-maximal ones, in
/// lexicographic order.
pub fn restricted_maximal_subgraphs(
    g: &GainGraph,
    s: &[usize],
    kind: RestrictedKind,
) -> Vec<Vec<usize>> {
    let in_s = {
        let mut f = vec![false; g.num_vertices()];
        for &v in s {
            f[v] = true;
        }
        f
    };
    let candidates: Vec<usize> = (0..g.num_edges())
        .filter(|&i| in_s[g.edge(i).tail] && in_s[g.edge(i).head])
        .collect();

    let mut sets: Vec<Vec<usize>> = match (kind, g.group()) {
        (RestrictedKind::PurelyPeriodic, _) | (RestrictedKind::Balanced, GroupTag::Cs) => {
            parity_keep_sets(g, s, &candidates)
        }
        (RestrictedKind::Balanced, _) => branch_consistent_sets(g, &candidates),
    };
    sets.sort();
    sets.dedup();
    let maximal: Vec<Vec<usize>> = sets
        .iter()
        .filter(|a| {
            !sets.iter().any(|b| {
                b.len() > a.len() && a.iter().all(|e| b.binary_search(e).is_ok())
            })
        })
        .cloned()
        .collect();
    maximal
}

/// All keep-sets of reflection parity potentials on `s`: an edge is kept when
/// the reflection bit of its gain equals the parity difference of its
/// endpoints.  One vertex per component is pinned to parity 0, since
/// flipping a whole component keeps the same edge set.
fn parity_keep_sets(g: &GainGraph, s: &[usize], candidates: &[usize]) -> Vec<Vec<usize>> {
    let keep_for = |psi: &dyn Fn(usize) -> bool| -> Vec<usize> {
        candidates
            .iter()
            .copied()
            .filter(|&i| {
                let e = g.edge(i);
                e.gain.r == (psi(e.tail) ^ psi(e.head))
            })
            .collect()
    };
    if !g.group().has_reflections() {
        return vec![keep_for(&|_| false)];
    }
    let cand_set: std::collections::HashSet<usize> = candidates.iter().copied().collect();
    let components = g.components_filtered(&|i| cand_set.contains(&i));
    let mut free: Vec<usize> = Vec::new();
    for comp in &components {
        let in_comp_s: Vec<usize> = comp.iter().copied().filter(|v| s.contains(v)).collect();
        // Skip the least vertex of each component: it is pinned to 0.
        free.extend(in_comp_s.iter().skip(1));
    }
    let mut out = Vec::new();
    for assignment in 0u64..(1u64 << free.len()) {
        let psi = |v: usize| -> bool {
            free.iter()
                .position(|&f| f == v)
                .is_some_and(|pos| assignment & (1 << pos) != 0)
        };
        out.push(keep_for(&psi));
    }
    out
}

/// Enumerate closed consistent edge sets for full-group potentials.  Edges
/// are processed in order; within one union-find component an edge is either
/// forced in (potential difference matches its gain) or forced out, and an
/// edge between components branches on whether the components merge.
fn branch_consistent_sets(g: &GainGraph, candidates: &[usize]) -> Vec<Vec<usize>> {
    use crate::group::GroupElement;

    #[derive(Clone)]
    struct State {
        parent: Vec<usize>,
        /// Potential of a vertex relative to its current root.
        rel: Vec<GroupElement>,
        included: Vec<usize>,
    }

    fn find(state: &mut State, v: usize) -> (usize, GroupElement) {
        if state.parent[v] == v {
            return (v, state.rel[v]);
        }
        let (root, parent_rel) = find(state, state.parent[v]);
        let combined = parent_rel.compose(&state.rel[v]);
        state.parent[v] = root;
        state.rel[v] = combined;
        (root, combined)
    }

    fn recurse(g: &GainGraph, candidates: &[usize], pos: usize, state: State, out: &mut Vec<Vec<usize>>) {
        if pos == candidates.len() {
            out.push(state.included);
            return;
        }
        let i = candidates[pos];
        let e = *g.edge(i);
        let mut st = state;
        let (rt, pot_t) = find(&mut st, e.tail);
        let (rh, pot_h) = find(&mut st, e.head);
        if rt == rh {
            // Consistent iff potential(tail)^-1 * potential(head) = gain.
            if pot_t.inverse().compose(&pot_h) == e.gain {
                st.included.push(i);
                recurse(g, candidates, pos + 1, st, out);
            } else {
                recurse(g, candidates, pos + 1, st, out);
            }
        } else {
            // Branch: merge the components so the edge fits, or leave it out.
            let mut with = st.clone();
            // Root rh hangs under rt with rel chosen so that
            // pot(tail)^-1 * pot(head) = gain after the merge.
            with.parent[rh] = rt;
            with.rel[rh] = pot_t.compose(&e.gain).compose(&pot_h.inverse());
            with.included.push(i);
            recurse(g, candidates, pos + 1, with, out);
            recurse(g, candidates, pos + 1, st, out);
        }
    }

    let n = g.num_vertices();
    let init = State {
        parent: (0..n).collect(),
        rel: vec![crate::group::GroupElement::IDENTITY; n],
        included: Vec::new(),
    };
    let mut out = Vec::new();
    recurse(g, candidates, 0, init, &mut out);
    out
}

/// Plain `(2, 2)`-tightness for translation-only gain graphs.  Loops can
/// never be inserted under this count, so loopless-ness is enforced for free.
pub fn check_22_tight(g: &GainGraph) -> Result<SparsityVerdict, SparsityError> {
    expect_group(g, GroupTag::Z2)?;
    pebble_check(g.num_vertices(), &plain_edges(g), 2, 2)
}

/// Gain-tightness for the reflection group: `(2, 1)`-tight and every
/// balanced subgraph `(2, 2)`-sparse.
pub fn check_221_gain_tight(g: &GainGraph) -> Result<SparsityVerdict, SparsityError> {
    expect_group(g, GroupTag::Cs)?;
    gain_tight_check(g, "balanced")
}

/// Gain-tightness for translations with reflections: `(2, 1)`-tight and
/// every purely periodic subgraph `(2, 2)`-sparse.
pub fn check_z2cs_tight(g: &GainGraph) -> Result<SparsityVerdict, SparsityError> {
    expect_group(g, GroupTag::Z2xCs)?;
    gain_tight_check(g, "purely periodic")
}

/// Dispatch to the tightness condition matching the graph's group.
pub fn check_tight_for_group(g: &GainGraph) -> Result<SparsityVerdict, SparsityError> {
    match g.group() {
        GroupTag::Z2 => check_22_tight(g),
        GroupTag::Cs => check_221_gain_tight(g),
        GroupTag::Z2xCs => check_z2cs_tight(g),
    }
}

fn expect_group(g: &GainGraph, expected: GroupTag) -> Result<(), SparsityError> {
    if g.group() != expected {
        return Err(SparsityError::WrongGroup { expected, got: g.group() });
    }
    Ok(())
}

fn plain_edges(g: &GainGraph) -> Vec<(usize, usize)> {
    g.edges().iter().map(|e| (e.tail, e.head)).collect()
}

/// Shared engine for the two gain-restricted checks.  Both restrict the same
/// parity keep-sets: for the reflection group a keep-set is balanced, for the
/// full group purely periodic.  Every restricted subgraph is contained in the
/// keep-set of the potential it induces, and each keep-set is itself
/// restricted, so `(2, 2)`-checking every keep-set is exact.
fn gain_tight_check(g: &GainGraph, label: &str) -> Result<SparsityVerdict, SparsityError> {
    let edges = plain_edges(g);
    let base = pebble_check(g.num_vertices(), &edges, 2, 1)?;
    if base.status == Status::Violation {
        return Ok(base);
    }

    let components = g.components_filtered(&|_| true).len();
    let free = g.num_vertices().saturating_sub(components);
    if free > PARITY_ENUM_MAX_FREE {
        return Err(SparsityError::ParityEnumerationTooLarge { free, max: PARITY_ENUM_MAX_FREE });
    }

    let all: Vec<usize> = (0..g.num_vertices()).collect();
    for keep in parity_keep_sets(g, &all, &(0..g.num_edges()).collect::<Vec<_>>()) {
        if keep.is_empty() {
            continue;
        }
        let sub: Vec<(usize, usize)> = keep.iter().map(|&i| edges[i]).collect();
        let verdict = pebble_check(g.num_vertices(), &sub, 2, 2)?;
        if verdict.status == Status::Violation {
            let witness: Vec<usize> = verdict.witness_edges.iter().map(|&i| keep[i]).collect();
            let condition = format!("{label} subgraph: {}", verdict.condition);
            return Ok(SparsityVerdict::violation(witness, condition));
        }
    }
    Ok(global_verdict(g.num_vertices(), g.num_edges(), 2, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement as G;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_both(n: usize, edges: &[(usize, usize)], k: usize, l: usize) -> (Status, Status) {
        let p = pebble_check(n, edges, k, l).unwrap();
        let b = brute_force_check(n, edges, k, l).unwrap();
        (p.status, b.status)
    }

    #[test]
    fn single_vertex_and_loops() {
        // K1 is (2,2)-tight; a single loop is (2,1)-tight but (2,2)-violating.
        assert_eq!(check_both(1, &[], 2, 2), (Status::Tight, Status::Tight));
        let lp = [(0usize, 0usize)];
        assert_eq!(check_both(1, &lp, 2, 1), (Status::Tight, Status::Tight));
        assert_eq!(check_both(1, &lp, 2, 2), (Status::Violation, Status::Violation));
        assert_eq!(check_both(1, &lp, 2, 3), (Status::Violation, Status::Violation));
        // Two loops at one vertex break (2,1).
        assert_eq!(
            check_both(1, &[(0, 0), (0, 0)], 2, 1),
            (Status::Violation, Status::Violation)
        );
    }

    #[test]
    fn complete_graph_counts() {
        let k4: Vec<(usize, usize)> =
            vec![(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];
        assert_eq!(check_both(4, &k4, 2, 2), (Status::Tight, Status::Tight));
        // Frozen oracle note: under (2,3) the whole K4 is the witness,
        // 6 > 2*4 - 3 = 5.
        let verdict = brute_force_check(4, &k4, 2, 3).unwrap();
        assert_eq!(verdict.status, Status::Violation);
        assert_eq!(pebble_check(4, &k4, 2, 3).unwrap().status, Status::Violation);
        assert_eq!(check_both(4, &k4, 2, 1), (Status::SparseNotTight, Status::SparseNotTight));
    }

    #[test]
    fn pebble_witness_violates_the_count_when_rechecked() {
        // Doubled triangle: 6 edges on 3 vertices break (2,1).
        let edges = vec![(1, 0), (1, 0), (2, 0), (2, 0), (2, 1), (2, 1)];
        let verdict = pebble_check(3, &edges, 2, 1).unwrap();
        assert_eq!(verdict.status, Status::Violation);
        let witness: Vec<(usize, usize)> =
            verdict.witness_edges.iter().map(|&i| edges[i]).collect();
        let support: std::collections::HashSet<usize> =
            witness.iter().flat_map(|&(u, v)| [u, v]).collect();
        assert!(witness.len() as i64 > 2 * support.len() as i64 - 1);
    }

    #[test]
    fn unsupported_counts_are_rejected() {
        assert_eq!(
            pebble_check(2, &[(1, 0)], 2, 4).unwrap_err(),
            SparsityError::UnsupportedCount { k: 2, l: 4 }
        );
        assert_eq!(
            brute_force_check(2, &[(1, 0)], 0, 0).unwrap_err(),
            SparsityError::UnsupportedCount { k: 0, l: 0 }
        );
    }

    #[test]
    fn brute_force_refuses_oversized_input() {
        let edges: Vec<(usize, usize)> = (0..23).map(|_| (1usize, 0usize)).collect();
        assert_eq!(
            brute_force_check(2, &edges, 2, 0).unwrap_err(),
            SparsityError::TooLarge { edges: 23, max: BRUTE_FORCE_MAX_EDGES }
        );
    }

    #[test]
    fn pebble_agrees_with_brute_force_on_random_multigraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(0..=8);
            let edges: Vec<(usize, usize)> =
                (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
            for (k, l) in [(2, 0), (2, 1), (2, 2), (2, 3), (1, 1), (3, 2)] {
                let p = pebble_check(n, &edges, k, l).unwrap();
                let b = brute_force_check(n, &edges, k, l).unwrap();
                assert_eq!(p.status, b.status, "n={n} edges={edges:?} k={k} l={l}");
            }
        }
    }

    fn id() -> G {
        G::IDENTITY
    }

    fn s() -> G {
        G::new(0, 0, true)
    }

    /// Identity K4 plus one extra parallel edge with the given gain.
    fn k4_plus_edge(group: GroupTag, extra: G) -> GainGraph {
        let mut edges = vec![
            (1usize, 0usize, id()),
            (2, 0, id()),
            (2, 1, id()),
            (3, 0, id()),
            (3, 1, id()),
            (3, 2, id()),
        ];
        edges.push((1, 0, extra));
        GainGraph::build(group, 4, edges).unwrap()
    }

    #[test]
    fn reflection_group_tightness() {
        // The unbalanced single-vertex loop is the smallest tight graph.
        let k1 = GainGraph::build(GroupTag::Cs, 1, [(0, 0, s())]).unwrap();
        assert_eq!(check_221_gain_tight(&k1).unwrap().status, Status::Tight);

        // Identity K4 with an extra reflective edge is tight.
        let g = k4_plus_edge(GroupTag::Cs, s());
        assert_eq!(check_221_gain_tight(&g).unwrap().status, Status::Tight);

        // K5 minus an edge, all identity gains: (2,1)-sparse but its own
        // 9 edges form a balanced subgraph on 5 vertices, 9 > 2*5 - 2.
        let mut edges = Vec::new();
        for u in 0..5usize {
            for w in 0..u {
                if !(u == 4 && w == 3) {
                    edges.push((u, w, id()));
                }
            }
        }
        let g = GainGraph::build(GroupTag::Cs, 5, edges).unwrap();
        let verdict = check_221_gain_tight(&g).unwrap();
        assert_eq!(verdict.status, Status::Violation);
        assert!(verdict.condition.contains("balanced"));
        assert!(g.is_balanced_subset(&verdict.witness_edges));

        let wrong = GainGraph::build(GroupTag::Z2, 1, []).unwrap();
        assert!(matches!(
            check_221_gain_tight(&wrong).unwrap_err(),
            SparsityError::WrongGroup { .. }
        ));
    }

    #[test]
    fn full_group_tightness() {
        // A loop with reflective gain is tight; a translation loop is a
        // purely periodic violation all by itself.
        let good = GainGraph::build(GroupTag::Z2xCs, 1, [(0, 0, G::new(0, 1, true))]).unwrap();
        assert_eq!(check_z2cs_tight(&good).unwrap().status, Status::Tight);
        let bad = GainGraph::build(GroupTag::Z2xCs, 1, [(0, 0, G::translation(1, 0))]).unwrap();
        let verdict = check_z2cs_tight(&bad).unwrap();
        assert_eq!(verdict.status, Status::Violation);
        assert!(g_is_purely_periodic(&bad, &verdict.witness_edges));

        // Identity K4 plus a parallel translation edge: (2,1)-tight but all
        // seven edges are purely periodic on four vertices, 7 > 2*4 - 2.
        let g = k4_plus_edge(GroupTag::Z2xCs, G::translation(1, 0));
        let verdict = check_z2cs_tight(&g).unwrap();
        assert_eq!(verdict.status, Status::Violation);

        // With a reflective extra edge instead, the graph is tight.
        let g = k4_plus_edge(GroupTag::Z2xCs, s());
        assert_eq!(check_z2cs_tight(&g).unwrap().status, Status::Tight);
    }

    fn g_is_purely_periodic(g: &GainGraph, edges: &[usize]) -> bool {
        g.is_purely_periodic_subset(edges)
    }

    #[test]
    fn translation_only_tightness() {
        let k4 = GainGraph::build(
            GroupTag::Z2,
            4,
            [
                (1, 0, id()),
                (2, 0, id()),
                (2, 1, id()),
                (3, 0, id()),
                (3, 1, G::translation(1, 0)),
                (3, 2, id()),
            ],
        )
        .unwrap();
        assert_eq!(check_22_tight(&k4).unwrap().status, Status::Tight);
    }

    #[test]
    fn maximal_balanced_subgraphs_of_a_parallel_pair() {
        let g = GainGraph::build(
            GroupTag::Z2,
            2,
            [(1, 0, id()), (1, 0, G::translation(1, 0))],
        )
        .unwrap();
        let sets = restricted_maximal_subgraphs(&g, &[0, 1], RestrictedKind::Balanced);
        assert_eq!(sets, vec![vec![0], vec![1]]);
        // Both edges together are purely periodic, so that kind keeps both.
        let sets = restricted_maximal_subgraphs(&g, &[0, 1], RestrictedKind::PurelyPeriodic);
        assert_eq!(sets, vec![vec![0, 1]]);
    }

    #[test]
    fn maximal_subgraph_members_are_of_their_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..50 {
            let n = rng.gen_range(2..=4);
            let m = rng.gen_range(1..=5);
            let mut g = GainGraph::new(GroupTag::Z2xCs, n);
            for _ in 0..m {
                g.push_edge(
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    G::new(rng.gen_range(-1..=1), rng.gen_range(-1..=1), rng.gen()),
                );
            }
            if g.validate().is_err() {
                continue;
            }
            let all: Vec<usize> = (0..n).collect();
            for kind in [RestrictedKind::Balanced, RestrictedKind::PurelyPeriodic] {
                for set in restricted_maximal_subgraphs(&g, &all, kind) {
                    match kind {
                        RestrictedKind::Balanced => assert!(g.is_balanced_subset(&set)),
                        RestrictedKind::PurelyPeriodic => {
                            assert!(g.is_purely_periodic_subset(&set))
                        }
                    }
                }
            }
        }
    }
}
