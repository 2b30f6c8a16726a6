//! Constructive well-positioned configurations for maximum-norm frameworks.
//!
//! Under the maximum norm the orbit matrix attains its full rank only at
//! configurations whose two colour classes form very specific spanning
//! structures, and a uniformly random configuration hits such a colouring
//! with probability that decays rapidly with the vertex count.  Random
//! sampling therefore cannot certify rigidity beyond a handful of vertices.
//!
//! This module builds a witnessing configuration directly instead.  It walks
//! a replay program and places each new vertex so that the monochrome
//! conditions hold after every step:
//!
//! * the single-vertex bases get a generic point, with the reflective loop's
//!   vertex high enough that the loop gap is vertically dominated;
//! * a degree-two vertex addition goes to the intersection of the horizontal
//!   line through one attachment image and the vertical line through the
//!   other, so its edges split one per colour;
//! * a one-extension places the new vertex near the line spanned by the two
//!   images of the removed edge's endpoints, which hands both replacement
//!   edges the removed colour, at the parameter where the third gap crosses
//!   to the opposite axis, nudged off the line so the third gap keeps its
//!   colour even when its image lies exactly on the line;
//! * a loop-one-extension solves the two dominance inequalities directly;
//! * a triangle expansion puts the new vertex an axis-aligned nudge away
//!   from the anchor, so transferred edges keep their colours and the two
//!   new edges split across the colours;
//! * a four-clique split scales a fixed quadrilateral whose six gap vectors
//!   colour into two spanning trees, small enough that re-rooted edges keep
//!   their colours;
//! * a switch moves the vertex by its gain, which permutes gap coordinates
//!   without changing any colour.
//!
//! Each candidate placement is validated exactly against the tracked colour
//! assignment; degenerate geometry triggers a sweep of fallback candidates
//! and, failing that, a restart of the whole construction under fresh
//! jitter.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{framework_colouring, kappa, monochrome_verdict, sub, tail_gap, EdgeColour};
use crate::gain_graph::GainGraph;
use crate::group::GroupTag;
use crate::moves::{apply_record, resolve_key, MoveError, MoveRecord, ReplayStep};

/// Construction restarts before giving up.
const ATTEMPTS: usize = 12;
/// Gaps keep at least this much distance from vanishing and from a tie, so
/// the matrix builders' coincidence threshold never fires on a witness.
const GAP_FLOOR: f64 = 1e-9;
const SEED: u64 = 0x5EED_FACE_0000_0001;

/// Errors from the constructive placement walk.
#[derive(Debug, Error, PartialEq)]
pub enum PlacementError {
    #[error("the replay program is empty")]
    EmptyProgram,
    #[error("constructive placement does not cover {0}")]
    Unsupported(String),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error("no well-separated placement found: {0}")]
    Degenerate(String),
}

/// Build a configuration at which the replayed graph is well positioned and
/// satisfies the monochrome condition, so its maximum-norm orbit matrix has
/// the full generic rank.  Deterministic in the program.
pub fn monochrome_configuration(
    steps: &[ReplayStep],
) -> Result<Vec<[f64; 2]>, PlacementError> {
    if steps.is_empty() {
        return Err(PlacementError::EmptyProgram);
    }
    let mut last = PlacementError::EmptyProgram;
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED.wrapping_add(attempt as u64));
        match build(steps, &mut rng) {
            Ok(points) => return Ok(points),
            Err(soft @ PlacementError::Degenerate(_)) => last = soft,
            Err(hard) => return Err(hard),
        }
    }
    Err(last)
}

/// The graph built so far, its points, and the colour each edge must keep.
struct Builder {
    g: GainGraph,
    points: Vec<[f64; 2]>,
    colours: Vec<EdgeColour>,
}

fn build(steps: &[ReplayStep], rng: &mut ChaCha8Rng) -> Result<Vec<[f64; 2]>, PlacementError> {
    let mut state: Option<Builder> = None;
    for (index, step) in steps.iter().enumerate() {
        match step {
            ReplayStep::Base { base } => {
                if state.is_some() {
                    return Err(PlacementError::Unsupported(
                        "programs with more than one base graph".into(),
                    ));
                }
                state = Some(place_base(base, rng)?);
            }
            ReplayStep::Switch { switch: (v, gamma) } => {
                let b = state.as_mut().ok_or(PlacementError::EmptyProgram)?;
                if *v >= b.g.num_vertices() {
                    return Err(MoveError::VertexOutOfRange {
                        vertex: *v,
                        n: b.g.num_vertices(),
                    }
                    .into());
                }
                b.g = b.g.switch(*v, gamma);
                b.points[*v] = gamma.apply(b.points[*v]);
                // The gap of every touched edge is transformed by the
                // switching gain's linear part, which permutes signs but not
                // magnitudes; only rounding can move a colour, and the gap
                // floor keeps rounding harmless.
                if !keeps_colours(&b.g, &b.points, &b.colours) {
                    return Err(PlacementError::Degenerate(
                        "a switch landed a gap on the degeneracy floor".into(),
                    ));
                }
            }
            ReplayStep::Move(record) => {
                let b = state.as_mut().ok_or(PlacementError::EmptyProgram)?;
                let before = b.g.num_vertices();
                advance(b, record, rng).map_err(|e| match e {
                    PlacementError::Degenerate(msg) => PlacementError::Degenerate(format!(
                        "{msg} (step {index} on {before} vertices)"
                    )),
                    other => other,
                })?;
            }
        }
    }
    let b = state.ok_or(PlacementError::EmptyProgram)?;
    let colouring = framework_colouring(&b.g, &b.points)
        .map_err(|e| PlacementError::Degenerate(e.to_string()))?;
    if colouring.per_edge != b.colours {
        return Err(PlacementError::Degenerate(
            "the finished configuration colours differently than tracked".into(),
        ));
    }
    let verdict = monochrome_verdict(&b.g, &colouring)
        .map_err(|e| PlacementError::Degenerate(e.to_string()))?;
    if !verdict.satisfied {
        return Err(PlacementError::Degenerate(verdict.detail));
    }
    Ok(b.points)
}

fn place_base(base: &GainGraph, rng: &mut ChaCha8Rng) -> Result<Builder, PlacementError> {
    if base.group() == GroupTag::Cs {
        return Err(PlacementError::Unsupported("the pure reflection group".into()));
    }
    if base.num_vertices() == 1 && base.num_edges() == 0 {
        return Ok(Builder {
            g: base.clone(),
            points: vec![[rng.gen(), rng.gen()]],
            colours: Vec::new(),
        });
    }
    if base.num_vertices() == 1 && base.num_edges() == 1 && base.edge(0).is_loop() {
        let gain = base.edge(0).gain;
        if gain.r {
            // The loop gap is (-c, 2y - d); any y above (d + |c|) / 2 makes
            // the vertical part dominate.
            let y = 0.5 * (gain.d as f64 + gain.c.abs() as f64) + 1.0 + rng.gen::<f64>();
            let b = Builder {
                g: base.clone(),
                points: vec![[rng.gen(), y]],
                colours: vec![EdgeColour::Two],
            };
            if keeps_colours(&b.g, &b.points, &b.colours) {
                return Ok(b);
            }
            return Err(PlacementError::Degenerate("the base loop would not colour".into()));
        }
    }
    Err(PlacementError::Unsupported(format!(
        "base graphs on {} vertices and {} edges",
        base.num_vertices(),
        base.num_edges()
    )))
}

fn advance(
    b: &mut Builder,
    record: &MoveRecord,
    rng: &mut ChaCha8Rng,
) -> Result<(), PlacementError> {
    let next = apply_record(&b.g, record)?;
    match record {
        MoveRecord::ZeroExt { v0, v1, v2, gain1, gain2 } => {
            let a1 = gain1.apply(b.points[*v1]);
            let a2 = gain2.apply(b.points[*v2]);
            let mut colours = b.colours.clone();
            colours.extend([EdgeColour::One, EdgeColour::Two]);
            // Around the intersection of the horizontal line through the
            // first image and the vertical line through the second, the
            // first edge's gap is nearly horizontal and the second's nearly
            // vertical.  Candidates are jittered in both coordinates, with
            // one dominant, so placed points never inherit exact coordinate
            // relations from the gains; the bare intersection is the rescue.
            let scale = mag(a1).max(mag(a2)).max(1.0);
            let mut cands = Vec::new();
            for k in 2..=28 {
                let d = scale * 0.5f64.powi(k);
                let (jx, jy) = (jit(rng), jit(rng));
                for s in [1.0, -1.0] {
                    cands.push([a2[0] + s * d * jx, a1[1] + 0.25 * d * jy]);
                    cands.push([a2[0] + 0.25 * d * jy, a1[1] + s * d * jx]);
                }
            }
            cands.push([a2[0], a1[1]]);
            commit(b, next, colours, *v0, &cands, "a degree-two vertex addition")
        }
        MoveRecord::OneExt { v0, removed, v3, gain1, gain2, gain3 } => {
            let idx = resolve_key(&b.g, removed)?;
            let kept = b.colours[idx];
            let a1 = gain1.apply(b.points[removed.tail]);
            let a2 = gain2.apply(b.points[removed.head]);
            let a3 = gain3.apply(b.points[*v3]);
            let u = sub(a1, a2);
            if kappa(u) != kept {
                return Err(PlacementError::Degenerate(
                    "the removed edge's direction lost its colour".into(),
                ));
            }
            let dom = if kept == EdgeColour::One { 0 } else { 1 };
            let cross = 1 - dom;
            // Near the line a2 + t u both replacement gaps stay dominated by
            // multiples of u and keep the removed colour; the intersection
            // parameter aligns the third gap with the opposite axis.  Every
            // candidate carries a small cross-axis offset away from the line:
            // when the third image sits exactly on it, which happens whenever
            // an earlier step placed that vertex on the same line, the offset
            // alone gives the third gap its colour.
            let t_int = (a3[dom] - a2[dom]) / u[dom];
            let tscale = t_int.abs().max(1.0);
            let hscale = 0.02 * mag(u);
            let mut cands = Vec::new();
            for k in 3..=28 {
                let d = tscale * 0.5f64.powi(k) * jit(rng);
                let h = hscale * 0.5f64.powi(k) * jit(rng);
                let mut eps = [0.0; 2];
                eps[cross] = h;
                eps[dom] = 0.05 * h * jit(rng);
                for t in [t_int + d, t_int - d, t_int] {
                    for s in [1.0, -1.0] {
                        cands.push([
                            a2[0] + t * u[0] + s * eps[0],
                            a2[1] + t * u[1] + s * eps[1],
                        ]);
                    }
                }
            }
            for t in [2.0, -1.0, 0.5, 3.0, -2.0] {
                let mut p = [a2[0] + t * u[0], a2[1] + t * u[1]];
                p[cross] += hscale * jit(rng);
                cands.push(p);
            }
            let mut colours = b.colours.clone();
            colours.remove(idx);
            colours.extend([kept, kept, opposite(kept)]);
            commit(b, next, colours, *v0, &cands, "a one-extension")
        }
        MoveRecord::LoopOneExt { v0, v1, loop_gain, edge_gain } => {
            let a1 = edge_gain.apply(b.points[*v1]);
            let (c, d) = (loop_gain.c as f64, loop_gain.d as f64);
            let mut cands = Vec::new();
            for (h, w) in [(1.0, 1.0), (0.6, 2.3), (1.7, 0.4), (2.4, 3.1)] {
                // y clears the loop's dominance bound, then x clears the
                // edge's bound relative to the attachment image.
                let y = 0.5 * (d + c.abs()) + h + 0.1 * rng.gen::<f64>();
                let reach = (y - a1[1]).abs() + w;
                cands.push([a1[0] + reach, y]);
                cands.push([a1[0] - reach, y]);
            }
            let mut colours = b.colours.clone();
            colours.extend([EdgeColour::Two, EdgeColour::One]);
            commit(b, next, colours, *v0, &cands, "a loop-one-extension")
        }
        MoveRecord::EdgeToK3 { v0, edge, anchor, gain1, .. } => {
            if !gain1.is_identity() {
                return Err(PlacementError::Unsupported(
                    "triangle expansions with a non-identity anchor gain".into(),
                ));
            }
            let idx = resolve_key(&b.g, edge)?;
            let kept = b.colours[idx];
            let pa = b.points[*anchor];
            // Offsetting along the axis opposite to the kept colour gives
            // the anchor edge that colour's complement while the other new
            // edge inherits the kept gap; transferred gaps move by the
            // offset only, so the largest offset that validates wins.
            let axis = if kept == EdgeColour::One { 1 } else { 0 };
            let mut cands = Vec::new();
            for k in 1..=28 {
                let d = 0.5f64.powi(k) * jit(rng);
                let cross = 0.05 * d * jit(rng);
                for s in [d, -d] {
                    let mut p = pa;
                    p[axis] += s;
                    p[1 - axis] += cross;
                    cands.push(p);
                }
            }
            let mut colours = b.colours.clone();
            colours.extend([opposite(kept), kept]);
            commit(b, next, colours, *v0, &cands, "a triangle expansion")
        }
        MoveRecord::VertexToK4 { v1, new, .. } => {
            let p1 = b.points[*v1];
            let mut colours = b.colours.clone();
            colours.extend(K4_COLOURS);
            // Transferred edge ends move by at most 12 s, so shrinking the
            // quadrilateral until every old colour survives always succeeds.
            for k in 4..=28 {
                let s = 0.5f64.powi(k) * jit(rng);
                let corners =
                    [1, 2, 3].map(|c| [p1[0] + s * K4_SHAPE[c][0], p1[1] + s * K4_SHAPE[c][1]]);
                let pts = insert_three(&b.points, *new, corners);
                if keeps_colours(&next, &pts, &colours) {
                    b.g = next;
                    b.points = pts;
                    b.colours = colours;
                    return Ok(());
                }
            }
            Err(PlacementError::Degenerate(
                "no scale for a four-clique split kept every colour".into(),
            ))
        }
        MoveRecord::VertexTo4Cycle { .. } => Err(PlacementError::Unsupported(
            "four-cycle splits, which belong to the smooth norms".into(),
        )),
        MoveRecord::EdgeJoin { .. } => Err(PlacementError::Unsupported(
            "edge joins, which belong to the pure reflection group".into(),
        )),
    }
}

/// Fixed quadrilateral for the four-clique split.  Corner 0 is the survivor
/// and keeps the split vertex's exact position; the six pairwise gaps parse
/// into the two monochrome spanning trees in [`K4_COLOURS`].
const K4_SHAPE: [[f64; 2]; 4] = [[0.0, 0.0], [10.0, 1.0], [2.0, 10.0], [12.0, 8.0]];

/// Colours of the six clique edges in their insertion order
/// (1,0), (2,0), (2,1), (3,0), (3,1), (3,2).
const K4_COLOURS: [EdgeColour; 6] = [
    EdgeColour::One,
    EdgeColour::Two,
    EdgeColour::Two,
    EdgeColour::One,
    EdgeColour::Two,
    EdgeColour::One,
];

/// Accept the first candidate position for the vertex inserted at `v0` that
/// keeps every tracked colour with a safe margin.
fn commit(
    b: &mut Builder,
    next: GainGraph,
    colours: Vec<EdgeColour>,
    v0: usize,
    cands: &[[f64; 2]],
    what: &str,
) -> Result<(), PlacementError> {
    for &p in cands {
        let mut pts = b.points.clone();
        pts.insert(v0, p);
        if keeps_colours(&next, &pts, &colours) {
            b.g = next;
            b.points = pts;
            b.colours = colours;
            return Ok(());
        }
    }
    Err(PlacementError::Degenerate(format!("no candidate for {what} kept every colour")))
}

/// Every gap must dominate in the tracked coordinate and stay clear of both
/// the zero row and the tie by the gap floor.
fn keeps_colours(g: &GainGraph, points: &[[f64; 2]], colours: &[EdgeColour]) -> bool {
    g.edges().iter().zip(colours).all(|(e, want)| {
        let d = tail_gap(e, points);
        let (ax, ay) = (d[0].abs(), d[1].abs());
        ax.max(ay) > GAP_FLOOR && (ax - ay).abs() > GAP_FLOOR && kappa(d) == *want
    })
}

/// A generic multiplier in (0.5, 1); keeps candidate magnitudes on scale
/// while breaking exact coordinate relations.
fn jit(rng: &mut ChaCha8Rng) -> f64 {
    0.5 + 0.5 * rng.gen::<f64>()
}

fn opposite(c: EdgeColour) -> EdgeColour {
    match c {
        EdgeColour::One => EdgeColour::Two,
        EdgeColour::Two => EdgeColour::One,
        other => other,
    }
}

fn mag(p: [f64; 2]) -> f64 {
    p[0].abs().max(p[1].abs())
}

/// Grow the point vector by three entries at the given final indices; the
/// remaining slots take the old points in order.
fn insert_three(points: &[[f64; 2]], at: [usize; 3], vals: [[f64; 2]; 3]) -> Vec<[f64; 2]> {
    let n = points.len() + 3;
    let mut old = points.iter().copied();
    (0..n)
        .map(|i| match at.iter().position(|&a| a == i) {
            Some(j) => vals[j],
            None => old.next().expect("insertion indices fit the final range"),
        })
        .collect()
}
