use super::*;
use crate::gain_graph::GainGraph;
use crate::group::GroupElement as G;
use crate::moves::generate::random_tight_graph;
use crate::moves::Setting;

fn settings() -> Vec<Setting> {
    vec![
        Setting::new(Norm::Lq(3.0), GroupTag::Z2).unwrap(),
        Setting::new(Norm::Lq(1.5), GroupTag::Cs).unwrap(),
        Setting::new(Norm::Lq(3.0), GroupTag::Z2xCs).unwrap(),
        Setting::new(Norm::Linf, GroupTag::Z2).unwrap(),
        Setting::new(Norm::Linf, GroupTag::Z2xCs).unwrap(),
    ]
}

fn loop_base_z2cs() -> GainGraph {
    let mut g = GainGraph::new(GroupTag::Z2xCs, 1);
    g.push_edge(0, 0, G::new(0, 1, true));
    g
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

#[test]
fn signed_powers_are_odd_and_fix_units() {
    assert_eq!(sign_power([2.0, -3.0], 2.0), [4.0, -9.0]);
    assert_eq!(sign_power([-1.0, 1.0], 0.5), [-1.0, 1.0]);
    assert_eq!(sign_power([0.0, -0.0], 3.0), [0.0, -0.0]);
    let [a, b] = sign_power([0.3, -0.3], 1.7);
    assert_eq!(a, -b);
}

#[test]
fn plain_matrix_kills_translations_exactly() {
    let points = [[0.1, 0.7], [3.0, -1.2], [-2.5, 2.2]];
    let edges = [(0, 1), (1, 2), (0, 2)];
    for q in [1.5, 3.0] {
        let m = rigidity_matrix_q(3, &edges, &points, q);
        for row in m.row_iter() {
            assert_eq!(row[0] + row[2] + row[4], 0.0);
            assert_eq!(row[1] + row[3] + row[5], 0.0);
        }
    }
}

#[test]
fn translation_loop_rows_vanish_exactly_in_smooth_norms() {
    let mut g = GainGraph::new(GroupTag::Z2, 1);
    g.push_edge(0, 0, G::translation(1, 2));
    let m = orbit_matrix_q(&g, &[[0.4, -1.1]], 3.0).unwrap();
    assert_eq!(m[(0, 0)], 0.0);
    assert_eq!(m[(0, 1)], 0.0);
}

#[test]
fn reflective_loops_constrain_only_the_reflected_coordinate() {
    let g = loop_base_z2cs();
    let p = [[0.5, 2.0]];
    let m = orbit_matrix_q(&g, &p, 3.0).unwrap();
    assert_eq!(m[(0, 0)], 0.0);
    assert!(m[(0, 1)].abs() > 1.0);

    let colouring = framework_colouring(&g, &p).unwrap();
    assert_eq!(colouring.per_edge, vec![EdgeColour::Two]);
    let mi = orbit_matrix_inf(&g, &p).unwrap();
    assert_eq!(mi[(0, 0)], 0.0);
    assert_eq!(mi[(0, 1)], 2.0);
}

#[test]
fn horizontally_dominated_reflective_loops_are_zero_rows() {
    let mut g = GainGraph::new(GroupTag::Z2xCs, 1);
    g.push_edge(0, 0, G::new(3, 0, true));
    // Gap (-3, 2y): horizontal part dominates at small y.
    let colouring = framework_colouring(&g, &[[0.0, 0.2]]).unwrap();
    assert_eq!(colouring.per_edge, vec![EdgeColour::ZeroRow]);
    let mi = orbit_matrix_inf(&g, &[[0.0, 0.2]]).unwrap();
    assert_eq!(max_abs(&mi), 0.0);
}

#[test]
fn maximum_norm_rows_carry_signed_unit_entries() {
    let mut g = GainGraph::new(GroupTag::Z2, 2);
    g.push_edge(1, 0, G::IDENTITY);
    g.push_edge(1, 0, G::translation(5, -2));
    let p = [[0.0, 0.0], [5.0, 1.0]];
    let colouring = framework_colouring(&g, &p).unwrap();
    assert_eq!(colouring.per_edge, vec![EdgeColour::One, EdgeColour::Two]);
    let m = orbit_matrix_inf(&g, &p).unwrap();
    assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0, 0.0]);
    assert_eq!(m.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, -1.0, 0.0, 1.0]);
}

#[test]
fn tied_gaps_are_degenerate_and_rejected() {
    let mut g = GainGraph::new(GroupTag::Z2, 2);
    g.push_edge(1, 0, G::IDENTITY);
    let p = [[0.0, 0.0], [1.0, 1.0]];
    let colouring = framework_colouring(&g, &p).unwrap();
    assert!(!colouring.well_positioned());
    assert_eq!(
        orbit_matrix_inf(&g, &p),
        Err(NumericsError::NotWellPositioned { edge: 0 })
    );
    assert_eq!(
        rigidity_matrix_inf(2, &[(0, 1)], &p),
        Err(NumericsError::NotWellPositioned { edge: 0 })
    );
}

#[test]
fn coincident_and_miscounted_points_are_rejected() {
    let mut g = GainGraph::new(GroupTag::Z2, 2);
    g.push_edge(1, 0, G::IDENTITY);
    assert_eq!(
        orbit_matrix_q(&g, &[[1.0, 1.0], [1.0, 1.0]], 3.0),
        Err(NumericsError::CoincidentEndpoints { edge: 0 })
    );
    assert_eq!(
        orbit_matrix_q(&g, &[[1.0, 1.0]], 3.0),
        Err(NumericsError::WrongPointCount { got: 1, need: 2 })
    );
}

#[test]
fn trivial_motion_space_matches_the_group() {
    assert_eq!(trivial_motion_space(GroupTag::Z2, 3).len(), 2);
    assert_eq!(trivial_motion_space(GroupTag::Cs, 3).len(), 1);
    assert_eq!(trivial_motion_space(GroupTag::Z2xCs, 3).len(), 1);
    for tag in [GroupTag::Z2, GroupTag::Cs, GroupTag::Z2xCs] {
        assert_eq!(trivial_motion_space(tag, 4).len(), trivial_motion_dim(tag));
    }
}

#[test]
fn trivial_motions_lie_in_the_kernel_on_generated_graphs() {
    for setting in settings() {
        for seed in 0..3 {
            let (g, _) = random_tight_graph(&setting, 4, 900 + seed);
            let points = random_configuration(&g, setting.norm, 77 + seed).unwrap();
            let m = orbit_matrix(&g, setting.norm, &points).unwrap();
            let bound = 1e-10 * max_abs(&m).max(1.0);
            for b in trivial_motion_space(setting.group, g.num_vertices()) {
                let residual = &m * &b;
                let worst = residual.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                assert!(
                    worst <= bound,
                    "kernel residual {worst:e} exceeds {bound:e} for {:?}",
                    setting.group
                );
            }
        }
    }
}

#[test]
fn random_configurations_are_deterministic_and_separated() {
    let setting = Setting::new(Norm::Linf, GroupTag::Z2xCs).unwrap();
    let (g, _) = random_tight_graph(&setting, 5, 17);
    let a = random_configuration(&g, Norm::Linf, 4).unwrap();
    let b = random_configuration(&g, Norm::Linf, 4).unwrap();
    assert_eq!(a, b);
    for e in g.edges() {
        if e.is_loop() && e.gain.is_translation() {
            continue;
        }
        let d = [
            a[e.tail][0] - e.gain.apply(a[e.head])[0],
            a[e.tail][1] - e.gain.apply(a[e.head])[1],
        ];
        assert!(d[0].abs().max(d[1].abs()) >= SAMPLE_MARGIN);
        assert!((d[0].abs() - d[1].abs()).abs() >= SAMPLE_MARGIN);
    }
}

#[test]
fn tied_translation_loops_fail_fast_under_the_maximum_norm() {
    let mut g = GainGraph::new(GroupTag::Z2, 1);
    g.push_edge(0, 0, G::translation(2, -2));
    assert_eq!(
        random_configuration(&g, Norm::Linf, 0),
        Err(NumericsError::NotWellPositioned { edge: 0 })
    );
    // The same loop is harmless for smooth norms and for untied gains.
    assert!(random_configuration(&g, Norm::Lq(3.0), 0).is_ok());
    let mut h = GainGraph::new(GroupTag::Z2, 1);
    h.push_edge(0, 0, G::translation(1, 2));
    assert!(random_configuration(&h, Norm::Linf, 0).is_ok());
}

#[test]
fn numeric_rank_reports_the_spectral_gap() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1e-12]);
    let report = numeric_rank(&m, DEFAULT_RANK_TOL);
    assert_eq!((report.rows, report.cols, report.rank), (2, 2, 1));
    assert!(report.smallest_kept.unwrap() > 1.0);
    assert!(report.largest_dropped.unwrap() < 1e-11);

    let zero = DMatrix::<f64>::zeros(2, 3);
    let report = numeric_rank(&zero, DEFAULT_RANK_TOL);
    assert_eq!(report.rank, 0);
    assert_eq!(report.smallest_kept, None);

    // Row rescaling keeps uniformly tiny but independent rows countable.
    let tiny = DMatrix::from_row_slice(2, 2, &[1e-13, 0.0, 0.0, 1e-13]);
    assert_eq!(numeric_rank(&tiny, DEFAULT_RANK_TOL).rank, 2);
}

#[test]
fn single_reflective_loop_is_minimally_rigid() {
    let g = loop_base_z2cs();
    for norm in [Norm::Lq(3.0), Norm::Linf] {
        let verdict = rigidity_verdict(&g, norm, 4, 7, DEFAULT_RANK_TOL).unwrap();
        assert!(verdict.rigid && verdict.minimally_rigid);
        assert_eq!((verdict.rank, verdict.target, verdict.edges), (1, 1, 1));
        assert!(verdict.dropped_edges.is_empty());
    }
}

#[test]
fn generated_graphs_attain_their_rank_target() {
    for setting in settings() {
        for seed in 0..2 {
            let (g, _) = random_tight_graph(&setting, 4, 40 + seed);
            let verdict =
                rigidity_verdict(&g, setting.norm, 6, 7 + seed, DEFAULT_RANK_TOL).unwrap();
            assert!(
                verdict.rigid && verdict.minimally_rigid,
                "rank {} of {} expected for {:?} seed {seed}",
                verdict.rank,
                verdict.target,
                setting.group
            );
        }
    }
}

#[test]
fn underbraced_graphs_are_flagged_flexible() {
    // A single path edge cannot pin two vertices in any of these norms.
    let mut g = GainGraph::new(GroupTag::Z2, 2);
    g.push_edge(1, 0, G::IDENTITY);
    for norm in [Norm::Lq(3.0), Norm::Linf] {
        let verdict = rigidity_verdict(&g, norm, 4, 3, DEFAULT_RANK_TOL).unwrap();
        assert!(!verdict.rigid);
        assert_eq!(verdict.rank, 1);
        assert_eq!(verdict.target, 2);
    }
}

#[test]
fn tied_loops_are_dropped_with_a_warning() {
    let mut g = GainGraph::new(GroupTag::Z2, 1);
    g.push_edge(0, 0, G::translation(2, -2));
    let verdict = rigidity_verdict(&g, Norm::Linf, 2, 5, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(verdict.dropped_edges, vec![0]);
    assert_eq!(verdict.warnings.len(), 1);
    // The surviving single orbit is trivially rigid (rank 0 = target 0),
    // but the loop still counts against minimality.
    assert!(verdict.rigid);
    assert!(!verdict.minimally_rigid);
    assert_eq!((verdict.rank, verdict.target, verdict.edges), (0, 0, 1));
}

#[test]
fn monochrome_condition_tracks_rank_for_the_periodic_group() {
    let p = [[0.0, 0.0], [5.0, 1.0]];
    let mut good = GainGraph::new(GroupTag::Z2, 2);
    good.push_edge(1, 0, G::IDENTITY);
    good.push_edge(1, 0, G::translation(5, -2));
    let colouring = framework_colouring(&good, &p).unwrap();
    let verdict = monochrome_verdict(&good, &colouring).unwrap();
    assert!(verdict.satisfied, "{}", verdict.detail);
    let rank = numeric_rank(&orbit_matrix_inf(&good, &p).unwrap(), DEFAULT_RANK_TOL).rank;
    assert_eq!(rank, 2);

    // Shifting the second gain re-colours its row horizontal: the vertical
    // class empties out and the rank drops below the target in lockstep.
    let mut bad = GainGraph::new(GroupTag::Z2, 2);
    bad.push_edge(1, 0, G::IDENTITY);
    bad.push_edge(1, 0, G::translation(0, 3));
    let colouring = framework_colouring(&bad, &p).unwrap();
    assert_eq!(colouring.per_edge, vec![EdgeColour::One, EdgeColour::One]);
    let verdict = monochrome_verdict(&bad, &colouring).unwrap();
    assert!(!verdict.satisfied);
    assert!(verdict.detail.contains("vertical"));
    let rank = numeric_rank(&orbit_matrix_inf(&bad, &p).unwrap(), DEFAULT_RANK_TOL).rank;
    assert!(rank < 2);
}

#[test]
fn monochrome_condition_for_the_full_group() {
    let g = loop_base_z2cs();
    let colouring = framework_colouring(&g, &[[0.5, 2.0]]).unwrap();
    let verdict = monochrome_verdict(&g, &colouring).unwrap();
    assert!(verdict.satisfied, "{}", verdict.detail);

    // A translation loop contributes a vanishing row and disqualifies.
    let mut zero = GainGraph::new(GroupTag::Z2xCs, 1);
    zero.push_edge(0, 0, G::translation(1, 2));
    let colouring = framework_colouring(&zero, &[[0.5, 2.0]]).unwrap();
    let verdict = monochrome_verdict(&zero, &colouring).unwrap();
    assert!(!verdict.satisfied);
    assert!(verdict.detail.contains("vanishing"));

    // A vertex missed by the vertical class breaks the map-graph condition.
    let mut sparse = GainGraph::new(GroupTag::Z2xCs, 2);
    sparse.push_edge(1, 0, G::IDENTITY);
    sparse.push_edge(1, 1, G::new(0, 1, true));
    let p = [[0.0, 0.0], [5.0, 1.0]];
    let colouring = framework_colouring(&sparse, &p).unwrap();
    assert_eq!(colouring.per_edge, vec![EdgeColour::One, EdgeColour::Two]);
    let verdict = monochrome_verdict(&sparse, &colouring).unwrap();
    assert!(!verdict.satisfied);
    assert!(verdict.detail.contains("instead of"));
}

#[test]
fn purely_periodic_vertical_components_are_rejected() {
    // Two vertices joined by a tree edge, with a translation-gained cycle on
    // top: the vertical class is a spanning map graph but purely periodic.
    let mut g = GainGraph::new(GroupTag::Z2xCs, 2);
    g.push_edge(1, 0, G::IDENTITY);
    g.push_edge(1, 0, G::translation(5, -2));
    g.push_edge(1, 0, G::translation(3, -2));
    let p = [[0.0, 0.0], [5.0, 1.0]];
    let colouring = framework_colouring(&g, &p).unwrap();
    assert_eq!(
        colouring.per_edge,
        vec![EdgeColour::One, EdgeColour::Two, EdgeColour::Two]
    );
    let verdict = monochrome_verdict(&g, &colouring).unwrap();
    assert!(!verdict.satisfied);
    assert!(verdict.detail.contains("purely periodic"));
}

#[test]
fn switching_preserves_numeric_rank_exactly() {
    for setting in settings() {
        for seed in 0..3 {
            let (g, _) = random_tight_graph(&setting, 4, 300 + seed);
            let points = random_configuration(&g, setting.norm, 55 + seed).unwrap();
            let gamma = match setting.group {
                GroupTag::Z2 => G::translation(1, -2),
                GroupTag::Cs => G::reflection(0, 0),
                GroupTag::Z2xCs => G::new(1, 1, true),
            };
            let v = g.num_vertices() - 1;
            let switched = g.switch(v, &gamma);
            let mut moved = points.clone();
            moved[v] = gamma.apply(points[v]);
            let before = numeric_rank(
                &orbit_matrix(&g, setting.norm, &points).unwrap(),
                DEFAULT_RANK_TOL,
            );
            let after = numeric_rank(
                &orbit_matrix(&switched, setting.norm, &moved).unwrap(),
                DEFAULT_RANK_TOL,
            );
            assert_eq!(before.rank, after.rank, "{:?} seed {seed}", setting.group);
        }
    }
}

#[test]
fn constructed_configurations_are_deterministic_and_monochrome() {
    for group in [GroupTag::Z2, GroupTag::Z2xCs] {
        let setting = Setting::new(Norm::Linf, group).unwrap();
        for seed in [7, 41] {
            let (g, _) = random_tight_graph(&setting, 5, seed);
            let program = crate::moves::reduce::reduce_to_base(&g, &setting).unwrap();
            let a = monochrome_configuration(&program).unwrap();
            assert_eq!(a, monochrome_configuration(&program).unwrap());
            let colouring = framework_colouring(&g, &a).unwrap();
            assert!(colouring.well_positioned());
            assert!(monochrome_verdict(&g, &colouring).unwrap().satisfied);
            let target = 2 * g.num_vertices() - trivial_motion_dim(group);
            let rank = numeric_rank(&orbit_matrix_inf(&g, &a).unwrap(), DEFAULT_RANK_TOL).rank;
            assert_eq!(rank, target, "{group:?} seed {seed}");
        }
    }
}

#[test]
fn construction_programs_are_validated_before_placement() {
    use crate::moves::{MoveRecord, ReplayStep};
    assert_eq!(monochrome_configuration(&[]), Err(PlacementError::EmptyProgram));
    let switch_first = [ReplayStep::Switch { switch: (0, G::translation(1, 0)) }];
    assert_eq!(
        monochrome_configuration(&switch_first),
        Err(PlacementError::EmptyProgram)
    );
    let k1 = GainGraph::new(GroupTag::Z2, 1);
    let double = [
        ReplayStep::Base { base: k1.clone() },
        ReplayStep::Base { base: k1.clone() },
    ];
    assert!(matches!(
        monochrome_configuration(&double),
        Err(PlacementError::Unsupported(_))
    ));
    let cs = [ReplayStep::Base { base: GainGraph::new(GroupTag::Cs, 1) }];
    assert!(matches!(
        monochrome_configuration(&cs),
        Err(PlacementError::Unsupported(_))
    ));
    // Triangle expansions only place with an identity gain on the kept edge;
    // the generator and the reducer both normalise records that way.
    let skewed = [
        ReplayStep::Base { base: k1 },
        ReplayStep::Move(MoveRecord::ZeroExt {
            v0: 1,
            v1: 0,
            v2: 0,
            gain1: G::IDENTITY,
            gain2: G::translation(1, 0),
        }),
        ReplayStep::Move(MoveRecord::EdgeToK3 {
            v0: 2,
            edge: crate::moves::EdgeKey { tail: 1, head: 0, gain: G::IDENTITY },
            anchor: 0,
            gain1: G::translation(0, 1),
            gain2: G::translation(0, 1),
            transfer: Vec::new(),
        }),
    ];
    assert!(matches!(
        monochrome_configuration(&skewed),
        Err(PlacementError::Unsupported(_))
    ));
}

#[test]
fn sampling_misses_fall_back_to_a_constructed_witness() {
    // This instance's target colouring occupies too small a corner of
    // configuration space for six random draws to find it.
    let setting = Setting::new(Norm::Linf, GroupTag::Z2).unwrap();
    let (g, _) = random_tight_graph(&setting, 4, 41);
    let verdict = rigidity_verdict(&g, Norm::Linf, 6, 8, DEFAULT_RANK_TOL).unwrap();
    assert!(verdict.rigid && verdict.minimally_rigid);
    let witness = verdict.witness.expect("the constructed configuration should be kept");
    let colouring = framework_colouring(&g, &witness).unwrap();
    assert!(monochrome_verdict(&g, &colouring).unwrap().satisfied);
    assert!(verdict.warnings.iter().any(|w| w.contains("constructed")));

    let smooth = rigidity_verdict(&g, Norm::Lq(3.0), 6, 8, DEFAULT_RANK_TOL).unwrap();
    assert!(smooth.rigid && smooth.witness.is_none());
}

#[test]
fn rank_estimates_are_reproducible() {
    let setting = Setting::new(Norm::Lq(1.5), GroupTag::Cs).unwrap();
    let (g, _) = random_tight_graph(&setting, 4, 11);
    let a = regular_rank_estimate(&g, setting.norm, 3, 9, DEFAULT_RANK_TOL).unwrap();
    let b = regular_rank_estimate(&g, setting.norm, 3, 9, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(a.report.rank, b.report.rank);
    assert_eq!(a.best_trial, b.best_trial);
    assert!(a.best_trial < a.trials);
    assert_eq!(a.trials, 3);
}
