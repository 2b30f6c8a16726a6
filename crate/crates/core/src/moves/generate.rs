//! Random construction of tight gain graphs by seeded move sequences.
//!
//! Starting from a base graph of the setting, moves are drawn uniformly from
//! the admissible kinds with random parameters and applied when structurally
//! valid; every move preserves tightness, so the result is tight by
//! construction without consulting the checker.  The full replay program is
//! returned alongside the graph.

use super::{edge_join, End, MoveKind, ReplayStep, Setting};
use crate::gain_graph::GainGraph;
use crate::group::{GroupElement, GroupTag};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TRANSLATION_RANGE: std::ops::RangeInclusive<i64> = -2..=2;
const ATTEMPTS_PER_MOVE: usize = 60;
const GROWTH_MAX_VERTICES: usize = 16;

/// Uniform small group element; translation parts range over -2..=2 and the
/// reflection bit is free unless forced.
pub fn random_gain(group: GroupTag, rng: &mut ChaCha8Rng, force_reflection: bool) -> GroupElement {
    let r = force_reflection || (group.has_reflections() && rng.gen());
    match group {
        GroupTag::Cs => GroupElement::new(0, 0, r),
        GroupTag::Z2 => GroupElement::new(
            rng.gen_range(TRANSLATION_RANGE),
            rng.gen_range(TRANSLATION_RANGE),
            false,
        ),
        GroupTag::Z2xCs => GroupElement::new(
            rng.gen_range(TRANSLATION_RANGE),
            rng.gen_range(TRANSLATION_RANGE),
            r,
        ),
    }
}

/// A base graph of the setting; the reflective loop gain is drawn from the
/// group where it has freedom.
pub fn random_base(setting: &Setting, rng: &mut ChaCha8Rng) -> GainGraph {
    let g = match setting.group {
        GroupTag::Z2 => GainGraph::new(GroupTag::Z2, 1),
        GroupTag::Cs => {
            let mut g = GainGraph::new(GroupTag::Cs, 1);
            g.push_edge(0, 0, GroupElement::reflection(0, 0));
            g
        }
        GroupTag::Z2xCs => {
            let mut g = GainGraph::new(GroupTag::Z2xCs, 1);
            g.push_edge(0, 0, random_gain(GroupTag::Z2xCs, rng, true));
            g
        }
    };
    g.validate().expect("base graphs are valid");
    g
}

/// The doubled-edge complete-graph base for the reflection group: an
/// identity four-clique with one pair doubled by a reflective copy.
pub fn doubled_k4_base() -> GainGraph {
    let mut g = GainGraph::new(GroupTag::Cs, 4);
    for a in 0..4usize {
        for b in 0..a {
            g.push_edge(a, b, GroupElement::IDENTITY);
        }
    }
    g.push_edge(1, 0, GroupElement::reflection(0, 0));
    g.validate().expect("doubled K4 base is valid");
    g
}

fn incident_at(g: &GainGraph, v: usize) -> Vec<usize> {
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.tail == v || e.head == v)
        .map(|(i, _)| i)
        .collect()
}

/// Try one random move of the given kind; `None` when the drawn parameters
/// are inapplicable or the result fails validation.
fn attempt(
    setting: &Setting,
    g: &GainGraph,
    rng: &mut ChaCha8Rng,
    kind: MoveKind,
) -> Option<(GainGraph, Vec<ReplayStep>)> {
    let group = setting.group;
    let n = g.num_vertices();
    let m = g.num_edges();
    match kind {
        MoveKind::ZeroExt => {
            let (v1, v2) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let (gain1, gain2) = (random_gain(group, rng, false), random_gain(group, rng, false));
            let (out, rec) = super::zero_extension(g, v1, v2, gain1, gain2).ok()?;
            Some((out, vec![ReplayStep::Move(rec)]))
        }
        MoveKind::OneExt => {
            if m == 0 {
                return None;
            }
            let e = rng.gen_range(0..m);
            let v3 = rng.gen_range(0..n);
            let gain1 = random_gain(group, rng, false);
            let gain2 = gain1.compose(&g.edge(e).gain);
            let gain3 = random_gain(group, rng, false);
            let (out, rec) = super::one_extension(g, e, v3, gain1, gain2, gain3).ok()?;
            Some((out, vec![ReplayStep::Move(rec)]))
        }
        MoveKind::LoopOneExt => {
            let v1 = rng.gen_range(0..n);
            let loop_gain = random_gain(group, rng, true);
            let edge_gain = random_gain(group, rng, false);
            let (out, rec) = super::loop_one_extension(g, v1, loop_gain, edge_gain).ok()?;
            Some((out, vec![ReplayStep::Move(rec)]))
        }
        MoveKind::VertexTo4Cycle => {
            let v1 = rng.gen_range(0..n);
            let inc = incident_at(g, v1);
            let plain: Vec<usize> =
                inc.iter().copied().filter(|&i| !g.edge(i).is_loop()).collect();
            if plain.len() < 2 {
                return None;
            }
            let e12 = plain[rng.gen_range(0..plain.len())];
            let e13 = plain[rng.gen_range(0..plain.len())];
            if e12 == e13 {
                return None;
            }
            let m12 = g.edge(e12).gain_from(v1);
            let m13 = g.edge(e13).gain_from(v1);
            let gain02 = random_gain(group, rng, false);
            let gain03 = gain02.compose(&m12.inverse()).compose(&m13);
            let transfer: Vec<usize> = inc
                .iter()
                .copied()
                .filter(|&i| i != e12 && i != e13 && rng.gen())
                .collect();
            let (out, rec) =
                super::vertex_to_4cycle(g, v1, e12, e13, gain02, gain03, &transfer).ok()?;
            Some((out, vec![ReplayStep::Move(rec)]))
        }
        MoveKind::VertexToK4 => {
            let v1 = rng.gen_range(0..n);
            let mut transfer = Vec::new();
            for i in incident_at(g, v1) {
                for end in [End::Tail, End::Head] {
                    let at_v1 = match end {
                        End::Tail => g.edge(i).tail == v1,
                        End::Head => g.edge(i).head == v1,
                    };
                    if at_v1 {
                        let corner = rng.gen_range(0..4usize);
                        if corner != 0 {
                            transfer.push((i, end, corner));
                        }
                    }
                }
            }
            let (out, rec) = super::vertex_to_k4(g, v1, &transfer).ok()?;
            Some((out, vec![ReplayStep::Move(rec)]))
        }
        MoveKind::EdgeToK3 => {
            let plain: Vec<usize> = (0..m).filter(|&i| !g.edge(i).is_loop()).collect();
            if plain.is_empty() {
                return None;
            }
            let e = plain[rng.gen_range(0..plain.len())];
            let anchor = if rng.gen() { g.edge(e).tail } else { g.edge(e).head };
            // The record keeps an identity gain towards the anchor; gain
            // variety comes from a switch at the new vertex afterwards.
            let gain2 = g.edge(e).gain_from(anchor);
            let transfer: Vec<usize> = incident_at(g, anchor)
                .into_iter()
                .filter(|&i| i != e && rng.gen())
                .collect();
            let (out, rec) =
                super::edge_to_k3(g, e, anchor, GroupElement::IDENTITY, gain2, &transfer).ok()?;
            let v0 = out.num_vertices() - 1;
            let gamma = random_gain(group, rng, false);
            if gamma.is_identity() {
                return Some((out, vec![ReplayStep::Move(rec)]));
            }
            let switched = out.switch(v0, &gamma);
            Some((
                switched,
                vec![ReplayStep::Move(rec), ReplayStep::Switch { switch: (v0, gamma) }],
            ))
        }
        MoveKind::EdgeJoin => {
            let right = if rng.gen() { random_base(setting, rng) } else { doubled_k4_base() };
            let v1 = rng.gen_range(0..n);
            let v2 = rng.gen_range(0..right.num_vertices());
            let gain = random_gain(group, rng, false);
            let (out, rec) = edge_join(g, &right, v1, v2, gain).ok()?;
            Some((out, vec![ReplayStep::Base { base: right }, ReplayStep::Move(rec)]))
        }
    }
}

/// Grow a tight graph by `n_moves` random admissible moves from a random
/// base; deterministic per seed.  Returns the graph and its replay program.
///
/// Every accepted move is verified to preserve tightness; gain draws that
/// would break a side condition are rejected like any other inapplicable
/// parameters.  Growth stops at 16 vertices, where the verification cost
/// starts to dominate; if rejection exhausts the attempt budget the
/// sequence stops early.  Either way the result is a tight graph.
pub fn random_tight_graph(
    setting: &Setting,
    n_moves: usize,
    seed: u64,
) -> (GainGraph, Vec<ReplayStep>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = random_base(setting, &mut rng);
    let mut steps = vec![ReplayStep::Base { base: g.clone() }];
    let kinds = setting.allowed_moves();
    for _ in 0..n_moves {
        let mut done = false;
        for _ in 0..ATTEMPTS_PER_MOVE {
            let kind = kinds[rng.gen_range(0..kinds.len())];
            if let Some((next, new_steps)) = attempt(setting, &g, &mut rng, kind) {
                if next.num_vertices() > GROWTH_MAX_VERTICES {
                    continue;
                }
                let still_tight = setting
                    .check_tight(&next)
                    .map(|v| v.is_tight())
                    .unwrap_or(false);
                if !still_tight {
                    continue;
                }
                g = next;
                steps.extend(new_steps);
                done = true;
                break;
            }
        }
        if !done {
            break;
        }
    }
    debug_assert!({
        let replayed = super::replay(&steps).expect("generated steps replay");
        replayed.same_up_to_edge_order(&g)
    });
    (g, steps)
}
