//! Orbit rigidity matrices, randomized rank estimation and rigidity
//! verdicts for frameworks in smooth `q`-norms and the maximum norm.
//!
//! A configuration places the quotient graph's vertices in the plane; group
//! gains act on points through [`GroupElement::apply`].  Each edge
//! contributes one matrix row differentiating its (non-Euclidean) length:
//! for the `q`-norm the row holds componentwise signed powers of the
//! coordinate gaps, for the maximum norm a single signed unit entry at the
//! dominating coordinate.  The rank of the orbit matrix at a generic
//! configuration decides rigidity; [`regular_rank_estimate`] approximates
//! genericity by maximizing over random configurations.

use crate::gain_graph::GainGraph;
use crate::group::GroupTag;
use crate::moves::Norm;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

mod placement;

pub use placement::{monochrome_configuration, PlacementError};

/// Half-width of the sampling box for random configurations.
pub const SAMPLE_HALF_WIDTH: f64 = 5.0;
/// Margin below which two maximum-norm coordinate gaps count as tied while
/// sampling.
pub const SAMPLE_MARGIN: f64 = 1e-6;
/// Default relative tolerance for numeric rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
const RESAMPLE_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("configuration has {got} points but the graph has {need} vertices")]
    WrongPointCount { got: usize, need: usize },
    #[error("edge {edge} has coincident derived endpoints")]
    CoincidentEndpoints { edge: usize },
    #[error("edge {edge} is degenerate for the maximum norm: equal coordinate gaps")]
    NotWellPositioned { edge: usize },
    #[error("no admissible configuration found after {attempts} attempts")]
    ResampleExhausted { attempts: usize },
}

/// Componentwise signed power: `sgn(x) * |x|^k` in each coordinate.
pub fn sign_power(v: [f64; 2], k: f64) -> [f64; 2] {
    [v[0].signum() * v[0].abs().powf(k), v[1].signum() * v[1].abs().powf(k)]
}

/// The colour of an edge row under the maximum norm.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeColour {
    /// The horizontal gap dominates; the row constrains x coordinates.
    One,
    /// The vertical gap dominates; the row constrains y coordinates.
    Two,
    /// The row vanishes identically (translation loops, reflective loops
    /// whose horizontal gap dominates).
    ZeroRow,
    /// Tied gaps; the length function is not differentiable here.
    Degenerate,
}

fn kappa(d: [f64; 2]) -> EdgeColour {
    if d[0].abs() > d[1].abs() {
        EdgeColour::One
    } else if d[1].abs() > d[0].abs() {
        EdgeColour::Two
    } else {
        EdgeColour::Degenerate
    }
}

fn check_points(g: &GainGraph, points: &[[f64; 2]]) -> Result<(), NumericsError> {
    if points.len() != g.num_vertices() {
        return Err(NumericsError::WrongPointCount {
            got: points.len(),
            need: g.num_vertices(),
        });
    }
    Ok(())
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// The coordinate gap of an edge read from its stored tail: for edge
/// `(t, h, m)` this is `p_t - m(p_h)`.
fn tail_gap(e: &crate::gain_graph::Edge, points: &[[f64; 2]]) -> [f64; 2] {
    sub(points[e.tail], e.gain.apply(points[e.head]))
}

/// The gap read from the head, mathematically `p_h - m^{-1}(p_t)`.  This
/// always equals the tail gap transformed by the (self-inverse) linear part
/// and negated, so it is computed that way: sharing the rounded tail gap
/// makes the two endpoint contributions of a loop cancel exactly.
fn head_gap(e: &crate::gain_graph::Edge, points: &[[f64; 2]]) -> [f64; 2] {
    let d = e.gain.linear_apply(tail_gap(e, points));
    [-d[0], -d[1]]
}

/// Rigidity matrix of a plain (gain-free) graph in the `q`-norm: one row per
/// edge with signed `(q-1)` powers of the endpoint gaps.
pub fn rigidity_matrix_q(
    n: usize,
    edges: &[(usize, usize)],
    points: &[[f64; 2]],
    q: f64,
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(edges.len(), 2 * n);
    for (row, &(i, j)) in edges.iter().enumerate() {
        let d = sign_power(sub(points[i], points[j]), q - 1.0);
        let e = sign_power(sub(points[j], points[i]), q - 1.0);
        m[(row, 2 * i)] += d[0];
        m[(row, 2 * i + 1)] += d[1];
        m[(row, 2 * j)] += e[0];
        m[(row, 2 * j + 1)] += e[1];
    }
    m
}

/// Orbit rigidity matrix in the `q`-norm: one row per quotient edge, with
/// gains acting on the far endpoint.  Loop rows place both endpoint
/// contributions on the same vertex; translation loops therefore vanish.
pub fn orbit_matrix_q(
    g: &GainGraph,
    points: &[[f64; 2]],
    q: f64,
) -> Result<DMatrix<f64>, NumericsError> {
    check_points(g, points)?;
    let mut m = DMatrix::zeros(g.num_edges(), 2 * g.num_vertices());
    for (row, e) in g.edges().iter().enumerate() {
        let d = tail_gap(e, points);
        if d[0].abs().max(d[1].abs()) < 1e-12 {
            return Err(NumericsError::CoincidentEndpoints { edge: row });
        }
        let dp = sign_power(d, q - 1.0);
        let ep = sign_power(head_gap(e, points), q - 1.0);
        m[(row, 2 * e.tail)] += dp[0];
        m[(row, 2 * e.tail + 1)] += dp[1];
        m[(row, 2 * e.head)] += ep[0];
        m[(row, 2 * e.head + 1)] += ep[1];
    }
    Ok(m)
}

/// Rigidity matrix of a plain graph in the maximum norm: one signed unit
/// entry per endpoint at the dominating coordinate.
pub fn rigidity_matrix_inf(
    n: usize,
    edges: &[(usize, usize)],
    points: &[[f64; 2]],
) -> Result<DMatrix<f64>, NumericsError> {
    let mut m = DMatrix::zeros(edges.len(), 2 * n);
    for (row, &(i, j)) in edges.iter().enumerate() {
        let d = sub(points[i], points[j]);
        let col = match kappa(d) {
            EdgeColour::One => 0,
            EdgeColour::Two => 1,
            _ => return Err(NumericsError::NotWellPositioned { edge: row }),
        };
        m[(row, 2 * i + col)] = d[col].signum();
        m[(row, 2 * j + col)] = -d[col].signum();
    }
    Ok(m)
}

/// The per-edge colours of a maximum-norm framework.
#[derive(Clone, Debug, Serialize)]
pub struct Colouring {
    pub per_edge: Vec<EdgeColour>,
}

impl Colouring {
    pub fn well_positioned(&self) -> bool {
        self.per_edge.iter().all(|c| *c != EdgeColour::Degenerate)
    }
}

/// Classify every edge of a maximum-norm framework: which coordinate its
/// row constrains, or whether the row vanishes or the framework is
/// degenerate at the edge.
pub fn framework_colouring(
    g: &GainGraph,
    points: &[[f64; 2]],
) -> Result<Colouring, NumericsError> {
    check_points(g, points)?;
    let per_edge = g
        .edges()
        .iter()
        .map(|e| {
            let colour = kappa(tail_gap(e, points));
            if e.is_loop() && colour != EdgeColour::Degenerate {
                if e.gain.is_translation() {
                    // Both endpoint contributions cancel exactly.
                    EdgeColour::ZeroRow
                } else if colour == EdgeColour::One {
                    // A reflective loop constrains only the reflected
                    // coordinate; a dominating horizontal gap leaves nothing.
                    EdgeColour::ZeroRow
                } else {
                    colour
                }
            } else {
                colour
            }
        })
        .collect();
    Ok(Colouring { per_edge })
}

/// Orbit rigidity matrix in the maximum norm.  Degenerate edges are
/// rejected; zero-row edges contribute all-zero rows.
pub fn orbit_matrix_inf(
    g: &GainGraph,
    points: &[[f64; 2]],
) -> Result<DMatrix<f64>, NumericsError> {
    let colouring = framework_colouring(g, points)?;
    let mut m = DMatrix::zeros(g.num_edges(), 2 * g.num_vertices());
    for (row, e) in g.edges().iter().enumerate() {
        let d = tail_gap(e, points);
        match colouring.per_edge[row] {
            EdgeColour::Degenerate => {
                return Err(NumericsError::NotWellPositioned { edge: row })
            }
            EdgeColour::ZeroRow => {}
            EdgeColour::One => {
                let ep = head_gap(e, points);
                m[(row, 2 * e.tail)] += d[0].signum();
                m[(row, 2 * e.head)] += ep[0].signum();
            }
            EdgeColour::Two => {
                let ep = head_gap(e, points);
                m[(row, 2 * e.tail + 1)] += d[1].signum();
                m[(row, 2 * e.head + 1)] += ep[1].signum();
            }
        }
    }
    Ok(m)
}

/// Outcome of a numeric rank computation.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub tolerance: f64,
    /// Smallest singular value counted into the rank, if any.
    pub smallest_kept: Option<f64>,
    /// Largest singular value below the threshold, if any.
    pub largest_dropped: Option<f64>,
}

/// Numeric rank by singular values: rows are first rescaled to unit maximum
/// entry, then singular values above `tol * max(sigma_max, 1)` count.
pub fn numeric_rank(matrix: &DMatrix<f64>, tol: f64) -> MatrixReport {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return MatrixReport {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
            rank: 0,
            tolerance: tol,
            smallest_kept: None,
            largest_dropped: None,
        };
    }
    let mut scaled = matrix.clone();
    for mut row in scaled.row_iter_mut() {
        let max = row.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if max > 0.0 {
            row /= max;
        }
    }
    let svd = scaled.svd(false, false);
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let threshold = tol * sigma_max.max(1.0);
    let rank = sigma.iter().filter(|&&s| s > threshold).count();
    MatrixReport {
        rows: matrix.nrows(),
        cols: matrix.ncols(),
        rank,
        tolerance: tol,
        smallest_kept: if rank > 0 { sigma.get(rank - 1).copied() } else { None },
        largest_dropped: sigma.get(rank).copied(),
    }
}

/// Basis of the trivial (shared) motions: horizontal translation always
/// survives; vertical translation only without reflections.
pub fn trivial_motion_space(group: GroupTag, n: usize) -> Vec<DVector<f64>> {
    let mut base = Vec::new();
    let mut horizontal = DVector::zeros(2 * n);
    for v in 0..n {
        horizontal[2 * v] = 1.0;
    }
    base.push(horizontal);
    if !group.has_reflections() {
        let mut vertical = DVector::zeros(2 * n);
        for v in 0..n {
            vertical[2 * v + 1] = 1.0;
        }
        base.push(vertical);
    }
    base
}

/// Dimension of the trivial motion space; equals
/// [`GroupTag::trivial_motion_dim`].
pub fn trivial_motion_dim(group: GroupTag) -> usize {
    group.trivial_motion_dim()
}

/// Sample a configuration in the box `[-5, 5]^2` admissible for the norm:
/// derived endpoints of every edge stay apart, and for the maximum norm
/// every non-vanishing row keeps its coordinate gaps separated by
/// [`SAMPLE_MARGIN`].  Deterministic per seed; unsatisfiable graphs (a
/// maximum-norm translation loop with equal gains) fail fast.
pub fn random_configuration(
    g: &GainGraph,
    norm: Norm,
    seed: u64,
) -> Result<Vec<[f64; 2]>, NumericsError> {
    if norm.is_polyhedral() {
        for (i, e) in g.edges().iter().enumerate() {
            if e.is_loop() && e.gain.is_translation() && e.gain.c.abs() == e.gain.d.abs() {
                return Err(NumericsError::NotWellPositioned { edge: i });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RESAMPLE_ATTEMPTS {
        let points: Vec<[f64; 2]> = (0..g.num_vertices())
            .map(|_| {
                [
                    rng.gen_range(-SAMPLE_HALF_WIDTH..SAMPLE_HALF_WIDTH),
                    rng.gen_range(-SAMPLE_HALF_WIDTH..SAMPLE_HALF_WIDTH),
                ]
            })
            .collect();
        if admissible(g, &points, norm) {
            return Ok(points);
        }
    }
    Err(NumericsError::ResampleExhausted { attempts: RESAMPLE_ATTEMPTS })
}

fn admissible(g: &GainGraph, points: &[[f64; 2]], norm: Norm) -> bool {
    for e in g.edges() {
        let d = tail_gap(e, points);
        if e.is_loop() && e.gain.is_translation() {
            // Constant gap; nothing to separate for the smooth norms, and
            // the polyhedral tie was rejected up front.
            continue;
        }
        if d[0].abs().max(d[1].abs()) < SAMPLE_MARGIN {
            return false;
        }
        if norm.is_polyhedral() && (d[0].abs() - d[1].abs()).abs() < SAMPLE_MARGIN {
            return false;
        }
    }
    true
}

/// Build the orbit matrix of `g` for the setting's norm at `points`.
pub fn orbit_matrix(
    g: &GainGraph,
    norm: Norm,
    points: &[[f64; 2]],
) -> Result<DMatrix<f64>, NumericsError> {
    match norm {
        Norm::Lq(q) => orbit_matrix_q(g, points, q),
        Norm::Linf => orbit_matrix_inf(g, points),
    }
}

/// A rank estimate maximized over random configurations.
#[derive(Clone, Debug, Serialize)]
pub struct RankEstimate {
    pub report: MatrixReport,
    /// Index of the first trial attaining the maximal rank.
    pub best_trial: usize,
    pub trials: usize,
}

/// Estimate the generic orbit-matrix rank by sampling `trials`
/// configurations and keeping the maximal numeric rank.
pub fn regular_rank_estimate(
    g: &GainGraph,
    norm: Norm,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<RankEstimate, NumericsError> {
    assert!(trials > 0, "at least one trial is required");
    let mut best: Option<(MatrixReport, usize)> = None;
    for t in 0..trials {
        let points = random_configuration(g, norm, seed.wrapping_add(t as u64))?;
        let matrix = orbit_matrix(g, norm, &points)?;
        let report = numeric_rank(&matrix, tol);
        let better = match &best {
            None => true,
            Some((b, _)) => report.rank > b.rank,
        };
        if better {
            best = Some((report, t));
        }
    }
    let (report, best_trial) = best.unwrap();
    Ok(RankEstimate { report, best_trial, trials })
}

/// Verdict on whether the two monochrome subgraphs of a well-positioned
/// maximum-norm framework have the connectivity that forces rigidity.
#[derive(Clone, Debug, Serialize)]
pub struct MonochromeVerdict {
    pub satisfied: bool,
    pub detail: String,
}

/// Decide the monochrome condition for a well-positioned maximum-norm
/// framework.
///
/// Without reflections both colour classes must connect all vertices.  With
/// the full group the horizontal class must be a spanning tree and the
/// vertical class a spanning graph whose every component carries exactly
/// one independent cycle that is not purely periodic.  Zero rows disqualify
/// immediately: their constraints vanish.
pub fn monochrome_verdict(
    g: &GainGraph,
    colouring: &Colouring,
) -> Result<MonochromeVerdict, NumericsError> {
    assert_eq!(colouring.per_edge.len(), g.num_edges());
    if let Some(edge) = colouring
        .per_edge
        .iter()
        .position(|c| *c == EdgeColour::Degenerate)
    {
        return Err(NumericsError::NotWellPositioned { edge });
    }
    let n = g.num_vertices();
    if let Some(zero) = colouring.per_edge.iter().position(|c| *c == EdgeColour::ZeroRow) {
        return Ok(MonochromeVerdict {
            satisfied: false,
            detail: format!("edge {zero} contributes a vanishing row"),
        });
    }
    let one: Vec<usize> = (0..g.num_edges())
        .filter(|&i| colouring.per_edge[i] == EdgeColour::One)
        .collect();
    let two: Vec<usize> = (0..g.num_edges())
        .filter(|&i| colouring.per_edge[i] == EdgeColour::Two)
        .collect();
    match g.group() {
        GroupTag::Z2 => {
            for (label, class) in [("horizontal", &one), ("vertical", &two)] {
                if !spans_connected(g, class, n) {
                    return Ok(MonochromeVerdict {
                        satisfied: false,
                        detail: format!("the {label} class does not connect all vertices"),
                    });
                }
            }
            Ok(MonochromeVerdict { satisfied: true, detail: "both colour classes span and connect".into() })
        }
        GroupTag::Z2xCs => {
            if one.len() != n.saturating_sub(1)
                || one.iter().any(|&i| g.edge(i).is_loop())
                || !spans_connected(g, &one, n)
            {
                return Ok(MonochromeVerdict {
                    satisfied: false,
                    detail: "the horizontal class is not a spanning tree".into(),
                });
            }
            match map_graph_obstruction(g, &two) {
                None => Ok(MonochromeVerdict {
                    satisfied: true,
                    detail: "spanning tree plus a reflective spanning map graph".into(),
                }),
                Some(detail) => Ok(MonochromeVerdict { satisfied: false, detail }),
            }
        }
        GroupTag::Cs => {
            // The reflection-only group pairs with smooth norms exclusively.
            unreachable!("maximum-norm colourings never arise for the pure reflection group")
        }
    }
}

fn spans_connected(g: &GainGraph, class: &[usize], n: usize) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &i in class {
        let e = g.edge(i);
        if !e.is_loop() {
            adj[e.tail].push(e.head);
            adj[e.head].push(e.tail);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// `None` when the class is a spanning map graph (every component has
/// exactly as many edges as vertices) with no purely periodic component;
/// otherwise a human-readable obstruction.
fn map_graph_obstruction(g: &GainGraph, class: &[usize]) -> Option<String> {
    let in_class: std::collections::HashSet<usize> = class.iter().copied().collect();
    let comps = g.components_filtered(&|i| in_class.contains(&i));
    for comp in comps {
        let verts: std::collections::HashSet<usize> = comp.iter().copied().collect();
        let edges: Vec<usize> = class
            .iter()
            .copied()
            .filter(|&i| verts.contains(&g.edge(i).tail))
            .collect();
        if edges.len() != comp.len() {
            return Some(format!(
                "a vertical component on {} vertices has {} edges instead of {}",
                comp.len(),
                edges.len(),
                comp.len()
            ));
        }
        if g.is_purely_periodic_subset(&edges) {
            return Some("a vertical component is purely periodic".into());
        }
    }
    None
}

/// Full rigidity verdict for a gain-graph framework in a given norm.
#[derive(Clone, Debug, Serialize)]
pub struct RigidityVerdict {
    pub rigid: bool,
    /// Rigid with exactly as many edges as the rank target.
    pub minimally_rigid: bool,
    pub rank: usize,
    pub target: usize,
    pub edges: usize,
    /// Edges removed before rank estimation because no configuration makes
    /// them well-positioned (maximum-norm translation loops with tied
    /// gains).
    pub dropped_edges: Vec<usize>,
    pub warnings: Vec<String>,
    pub estimate: RankEstimate,
    /// A configuration attaining the target rank, built constructively when
    /// random sampling missed it under the maximum norm.
    pub witness: Option<Vec<[f64; 2]>>,
}

/// Decide rigidity numerically: estimate the generic rank and compare with
/// `2n - t`, where `t` counts trivial motions.  Maximum-norm edges that can
/// never be well-positioned are dropped with a warning since their rows
/// vanish identically.
///
/// Under the maximum norm, random configurations miss the generic rank with
/// overwhelming probability once the graph has more than a few vertices, so
/// a sampling shortfall on a tight graph triggers a constructive fallback:
/// the graph is reduced to a base, a monochrome configuration is built
/// along the replay, and its rank is used instead.  Rigid-but-overbraced
/// graphs have no replay program, so for them the maximum-norm verdict can
/// stay conservative; a warning says so.
pub fn rigidity_verdict(
    g: &GainGraph,
    norm: Norm,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<RigidityVerdict, NumericsError> {
    let mut dropped = Vec::new();
    let mut warnings = Vec::new();
    let working = if norm.is_polyhedral() {
        let mut keep = GainGraph::new(g.group(), g.num_vertices());
        for (i, e) in g.edges().iter().enumerate() {
            if e.is_loop() && e.gain.is_translation() && e.gain.c.abs() == e.gain.d.abs() {
                dropped.push(i);
                warnings.push(format!(
                    "edge {i} is a translation loop with tied gains; its row always vanishes"
                ));
            } else {
                keep.push_edge(e.tail, e.head, e.gain);
            }
        }
        keep
    } else {
        g.clone()
    };
    let estimate = regular_rank_estimate(&working, norm, trials, seed, tol)?;
    let target = 2 * g.num_vertices() - trivial_motion_dim(g.group());
    let mut rank = estimate.report.rank;
    let mut witness = None;
    if norm.is_polyhedral() && rank < target {
        match constructed_rank(&working, tol) {
            Some((points, constructed)) if constructed >= target => {
                rank = constructed;
                witness = Some(points);
                warnings.push(
                    "random sampling missed the target rank; a constructed configuration \
                     attains it"
                        .into(),
                );
            }
            _ => {
                if g.num_edges() > target {
                    warnings.push(
                        "the graph is overbraced, where maximum-norm sampling is \
                         conservative; a flexible verdict may be pessimistic"
                            .into(),
                    );
                }
            }
        }
    }
    Ok(RigidityVerdict {
        rigid: rank == target,
        minimally_rigid: rank == target && g.num_edges() == target,
        rank,
        target,
        edges: g.num_edges(),
        dropped_edges: dropped,
        warnings,
        estimate,
        witness,
    })
}

/// Constructive maximum-norm witness: reduce the graph to a base, place a
/// monochrome configuration along the replay, and report its numeric rank.
/// `None` when the graph is not tight or the placement walk fails.
fn constructed_rank(g: &GainGraph, tol: f64) -> Option<(Vec<[f64; 2]>, usize)> {
    let setting = crate::moves::Setting::new(Norm::Linf, g.group()).ok()?;
    let steps = crate::moves::reduce::reduce_to_base(g, &setting).ok()?;
    let points = monochrome_configuration(&steps).ok()?;
    let matrix = orbit_matrix_inf(g, &points).ok()?;
    Some((points, numeric_rank(&matrix, tol).rank))
}

#[cfg(test)]
mod tests;
