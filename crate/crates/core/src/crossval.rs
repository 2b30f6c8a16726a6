//! Cross-validation of the combinatorial tightness checkers against
//! numerical rank computations.
//!
//! For a batch of seeded, generated-tight instances the harness confirms
//! that the two sides of the characterisation agree:
//!
//! * the checker certifies every generated graph Tight;
//! * the estimated generic orbit-matrix rank reaches the target `2n - t`,
//!   with a configuration built from the instance's construction program
//!   standing in when maximum-norm sampling falls short;
//! * every assembled matrix annihilates the trivial-motion basis;
//! * under the maximum norm, the monochrome condition of each sampled
//!   well-positioned configuration matches that configuration's rank;
//! * deleting a random edge leaves a graph the checker calls merely sparse
//!   and drops the rank below target; adding a random valid edge makes the
//!   checker report a violation.
//!
//! A fault-injection mode flips one matrix entry per instance to prove the
//! harness can detect disagreement at all; a clean run with injected faults
//! and zero mismatches would mean the checks are vacuous.

use crate::gain_graph::GainGraph;
use crate::moves::generate::{random_gain, random_tight_graph};
use crate::moves::{ReplayStep, Setting};
use crate::numerics::{
    framework_colouring, monochrome_configuration, monochrome_verdict, numeric_rank,
    orbit_matrix, random_configuration, trivial_motion_dim, trivial_motion_space,
    NumericsError,
};
use crate::sparsity::Status;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Tuning knobs for a cross-validation run.
#[derive(Clone, Copy, Debug)]
pub struct CrossValOptions {
    /// Number of generated instances.
    pub instances: usize,
    /// Each instance applies between 1 and this many moves.
    pub max_moves: usize,
    /// Random configurations sampled per instance.
    pub trials: usize,
    /// Master seed; every other random choice derives from it.
    pub seed: u64,
    /// Rank tolerance.
    pub tol: f64,
    /// Flip one matrix entry per instance to exercise mismatch reporting.
    pub sabotage: bool,
    /// Regenerate any instance growing beyond this many vertices.
    pub max_vertices: Option<usize>,
}

impl Default for CrossValOptions {
    fn default() -> Self {
        CrossValOptions {
            instances: 20,
            max_moves: 6,
            trials: 25,
            seed: 0,
            tol: crate::numerics::DEFAULT_RANK_TOL,
            sabotage: false,
            max_vertices: None,
        }
    }
}

/// One disagreement between the combinatorial and the numerical side.
#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub instance: usize,
    pub seed: u64,
    pub description: String,
}

/// Outcome of a cross-validation run.
#[derive(Clone, Debug, Serialize)]
pub struct CrossValReport {
    pub setting: String,
    pub instances: usize,
    /// Number of (graph, configuration) pairs examined.
    pub pairs_checked: usize,
    pub mismatches: Vec<Mismatch>,
    pub elapsed_ms: u128,
}

impl CrossValReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Bound below which a residual counts as annihilated, relative to the
/// largest matrix entry.
pub const KERNEL_RESIDUAL_TOL: f64 = 1e-10;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Flip the sign of the first nonzero entry in an x column, so the
/// horizontal-translation kernel product becomes visibly nonzero; falls back
/// to the first nonzero entry anywhere.
fn inject_fault(m: &mut DMatrix<f64>) -> bool {
    let cols: Vec<usize> = (0..m.ncols()).step_by(2).chain((1..m.ncols()).step_by(2)).collect();
    for c in cols {
        for r in 0..m.nrows() {
            if m[(r, c)] != 0.0 {
                m[(r, c)] = -m[(r, c)];
                return true;
            }
        }
    }
    false
}

struct InstanceCheck<'a> {
    setting: &'a Setting,
    opts: &'a CrossValOptions,
    instance: usize,
    seed: u64,
    pairs: usize,
    mismatches: Vec<Mismatch>,
}

impl InstanceCheck<'_> {
    fn report(&mut self, description: String) {
        self.mismatches.push(Mismatch {
            instance: self.instance,
            seed: self.seed,
            description,
        });
    }

    fn numerics_failure(&mut self, stage: &str, err: &NumericsError) {
        self.report(format!("{stage}: numerical step failed: {err}"));
    }

    fn run(&mut self, g: &GainGraph, steps: &[ReplayStep], rng: &mut ChaCha8Rng) {
        match self.setting.check_tight(g) {
            Ok(v) if v.status == Status::Tight => {}
            Ok(v) => {
                self.report(format!(
                    "checker refused a generated tight graph: {:?} ({})",
                    v.status, v.condition
                ));
                return;
            }
            Err(e) => {
                self.report(format!("checker errored on a generated graph: {e}"));
                return;
            }
        }
        let target = 2 * g.num_vertices() - trivial_motion_dim(g.group());
        let basis = trivial_motion_space(g.group(), g.num_vertices());
        let mut best_rank = 0;
        for t in 0..self.opts.trials {
            let cfg_seed = self
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(t as u64);
            let points = match random_configuration(g, self.setting.norm, cfg_seed) {
                Ok(p) => p,
                Err(e) => {
                    self.numerics_failure("sampling", &e);
                    return;
                }
            };
            self.pairs += 1;
            let mut matrix = match orbit_matrix(g, self.setting.norm, &points) {
                Ok(m) => m,
                Err(e) => {
                    self.numerics_failure("matrix assembly", &e);
                    return;
                }
            };
            if self.opts.sabotage && t == 0 {
                inject_fault(&mut matrix);
            }
            let bound = KERNEL_RESIDUAL_TOL * max_abs(&matrix).max(1.0);
            for (i, b) in basis.iter().enumerate() {
                let residual = &matrix * b;
                let worst = residual.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if worst > bound {
                    self.report(format!(
                        "trial {t}: trivial motion {i} leaves residual {worst:.3e} > {bound:.3e}"
                    ));
                }
            }
            let rank = numeric_rank(&matrix, self.opts.tol).rank;
            best_rank = best_rank.max(rank);
            if self.setting.norm.is_polyhedral() {
                let colouring = match framework_colouring(g, &points) {
                    Ok(c) => c,
                    Err(e) => {
                        self.numerics_failure("colouring", &e);
                        return;
                    }
                };
                let verdict = match monochrome_verdict(g, &colouring) {
                    Ok(v) => v,
                    Err(e) => {
                        self.numerics_failure("monochrome check", &e);
                        return;
                    }
                };
                if verdict.satisfied != (rank == target) {
                    self.report(format!(
                        "trial {t}: monochrome says {}, but rank {rank} vs target {target} \
                         says {} ({})",
                        verdict.satisfied,
                        rank == target,
                        verdict.detail
                    ));
                }
            }
        }
        if best_rank != target {
            self.rank_fallback(g, steps, best_rank, target);
        }
        self.perturb_delete(g, rng, target);
        self.perturb_add(g, rng);
    }

    /// Under the maximum norm a rank target missed by sampling is not yet a
    /// disagreement: the target is attained on an open but possibly small
    /// set of configurations, so ask the construction program for one.
    fn rank_fallback(
        &mut self,
        g: &GainGraph,
        steps: &[ReplayStep],
        best_rank: usize,
        target: usize,
    ) {
        let missed = format!(
            "estimated generic rank {best_rank} misses the target {target} \
             over {} trials",
            self.opts.trials
        );
        if !self.setting.norm.is_polyhedral() {
            self.report(missed);
            return;
        }
        let points = match monochrome_configuration(steps) {
            Ok(p) => p,
            Err(e) => {
                self.report(format!("{missed}, and no configuration could be built: {e}"));
                return;
            }
        };
        self.pairs += 1;
        let matrix = match orbit_matrix(g, self.setting.norm, &points) {
            Ok(m) => m,
            Err(e) => {
                self.numerics_failure("constructed matrix assembly", &e);
                return;
            }
        };
        let rank = numeric_rank(&matrix, self.opts.tol).rank;
        if rank != target {
            self.report(format!(
                "constructed configuration reaches rank {rank}, not the target {target}"
            ));
        }
        match framework_colouring(g, &points).and_then(|c| monochrome_verdict(g, &c)) {
            Ok(v) if v.satisfied => {}
            Ok(v) => self.report(format!(
                "constructed configuration is not monochrome: {}",
                v.detail
            )),
            Err(e) => self.numerics_failure("constructed colouring", &e),
        }
    }

    /// Removing any edge from a tight graph must leave it merely sparse,
    /// with the rank necessarily below target.
    fn perturb_delete(&mut self, g: &GainGraph, rng: &mut ChaCha8Rng, target: usize) {
        if g.num_edges() == 0 {
            return;
        }
        let victim = rng.gen_range(0..g.num_edges());
        let mut smaller = GainGraph::new(g.group(), g.num_vertices());
        for (i, e) in g.edges().iter().enumerate() {
            if i != victim {
                smaller.push_edge(e.tail, e.head, e.gain);
            }
        }
        match self.setting.check_tight(&smaller) {
            Ok(v) if v.status == Status::SparseNotTight => {}
            Ok(v) => self.report(format!(
                "deleting edge {victim} should leave a sparse non-tight graph, \
                 checker says {:?}",
                v.status
            )),
            Err(e) => self.report(format!("checker errored after edge deletion: {e}")),
        }
        let cfg_seed = self.seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(7);
        match random_configuration(&smaller, self.setting.norm, cfg_seed)
            .and_then(|p| orbit_matrix(&smaller, self.setting.norm, &p))
        {
            Ok(matrix) => {
                let rank = numeric_rank(&matrix, self.opts.tol).rank;
                if rank + 1 > target {
                    self.report(format!(
                        "deleting edge {victim} left rank {rank}, expected at most {}",
                        target - 1
                    ));
                }
            }
            Err(e) => self.numerics_failure("post-deletion rank", &e),
        }
    }

    /// Adding any structurally valid edge to a tight graph must overshoot
    /// the global count and trigger a violation with a witness.
    fn perturb_add(&mut self, g: &GainGraph, rng: &mut ChaCha8Rng) {
        let n = g.num_vertices();
        let grown = (0..200).find_map(|_| {
            let u = rng.gen_range(0..n);
            let w = rng.gen_range(0..n);
            let prefer_reflection = u == w && rng.gen();
            let gain = random_gain(g.group(), rng, prefer_reflection);
            let mut candidate = g.clone();
            candidate.push_edge(u, w, gain);
            candidate.validate().ok().map(|()| candidate)
        });
        let Some(grown) = grown else {
            self.report("no valid edge insertion found in 200 draws".into());
            return;
        };
        match self.setting.check_tight(&grown) {
            Ok(v) if v.status == Status::Violation => {
                if v.witness_edges.is_empty() {
                    self.report("violation after edge insertion lacks a witness".into());
                }
            }
            Ok(v) => self.report(format!(
                "inserting an edge should violate the count, checker says {:?}",
                v.status
            )),
            Err(e) => self.report(format!("checker errored after edge insertion: {e}")),
        }
    }
}

/// Run the full cross-validation batch for one setting.
pub fn cross_validate(setting: &Setting, opts: &CrossValOptions) -> CrossValReport {
    let start = std::time::Instant::now();
    let mut mismatches = Vec::new();
    let mut pairs_checked = 0;
    for instance in 0..opts.instances {
        let inst_seed = opts.seed.wrapping_add(instance as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(inst_seed ^ 0xC0DE_C0DE);
        let n_moves = 1 + (instance % opts.max_moves.max(1));
        let mut gen_seed = inst_seed;
        let (g, steps) = loop {
            let pair = random_tight_graph(setting, n_moves, gen_seed);
            match opts.max_vertices {
                Some(cap) if pair.0.num_vertices() > cap => {
                    gen_seed = gen_seed.wrapping_add(0x0100_0000_0000);
                }
                _ => break pair,
            }
        };
        let mut check = InstanceCheck {
            setting,
            opts,
            instance,
            seed: inst_seed,
            pairs: 0,
            mismatches: Vec::new(),
        };
        check.run(&g, &steps, &mut rng);
        pairs_checked += check.pairs;
        mismatches.extend(check.mismatches);
    }
    CrossValReport {
        setting: setting.to_string(),
        instances: opts.instances,
        pairs_checked,
        mismatches,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupTag;
    use crate::moves::Norm;

    fn settings() -> Vec<Setting> {
        vec![
            Setting::new(Norm::Lq(3.0), GroupTag::Z2).unwrap(),
            Setting::new(Norm::Lq(1.5), GroupTag::Cs).unwrap(),
            Setting::new(Norm::Lq(3.0), GroupTag::Z2xCs).unwrap(),
            Setting::new(Norm::Linf, GroupTag::Z2).unwrap(),
            Setting::new(Norm::Linf, GroupTag::Z2xCs).unwrap(),
        ]
    }

    #[test]
    fn small_batches_agree_in_every_setting() {
        for setting in settings() {
            let opts = CrossValOptions {
                instances: 4,
                max_moves: 4,
                trials: 8,
                seed: 2024,
                ..CrossValOptions::default()
            };
            let report = cross_validate(&setting, &opts);
            assert!(
                report.ok(),
                "{}: {:?}",
                report.setting,
                report.mismatches
            );
            assert!(report.pairs_checked >= 32, "{}", report.pairs_checked);
        }
    }

    #[test]
    fn empty_batches_are_trivially_clean() {
        let setting = Setting::new(Norm::Lq(3.0), GroupTag::Z2).unwrap();
        let report = cross_validate(&setting, &CrossValOptions { instances: 0, ..Default::default() });
        assert!(report.ok());
        assert_eq!(report.pairs_checked, 0);
    }

    #[test]
    fn injected_faults_are_detected() {
        for setting in settings() {
            let opts = CrossValOptions {
                instances: 3,
                max_moves: 4,
                trials: 4,
                seed: 77,
                sabotage: true,
                ..CrossValOptions::default()
            };
            let report = cross_validate(&setting, &opts);
            assert!(
                !report.ok(),
                "{}: fault injection went unnoticed",
                report.setting
            );
        }
    }
}
