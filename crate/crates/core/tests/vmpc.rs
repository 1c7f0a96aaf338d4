use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visdsl_core::vmpc::{
    aggregate, correlations, krippendorff_alpha, summarize, vmpc, Category, GraderRecord,
    PromptResult, ScoreError, StatsError, ViewCriteria,
};

fn grader(x: u8, views: &[[u8; 5]]) -> GraderRecord {
    GraderRecord {
        x,
        views: views
            .iter()
            .map(|c| ViewCriteria::new(c[0], c[1], c[2], c[3], c[4]))
            .collect(),
    }
}

fn prompt(graders: Vec<GraderRecord>) -> PromptResult {
    PromptResult {
        prompt: "73".into(),
        n_views: graders[0].views.len(),
        category: Some(Category::C),
        system: None,
        linking_requested: false,
        graders,
    }
}

#[test]
fn worked_examples() {
    let full = [1, 1, 1, 1, 1];
    assert_eq!(vmpc(&grader(1, &[full, full])).unwrap(), 1.0);
    assert!((vmpc(&grader(1, &[[1, 0, 0, 1, 1], full])).unwrap() - 0.8).abs() < 1e-12);
    assert!((vmpc(&grader(1, &[[1, 0, 0, 1, 1], [1, 0, 0, 1, 1]])).unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(vmpc(&grader(0, &[full])).unwrap(), 0.0);
    assert_eq!(vmpc(&grader(0, &[[0, 0, 0, 0, 1]])).unwrap(), 0.0);

    // Three graders on two views; one grader saw neither view container.
    let seen = [1, 0, 0, 1, 1];
    let unseen = [0, 0, 0, 1, 1];
    let agg = aggregate(&prompt(vec![
        grader(1, &[seen, seen]),
        grader(1, &[seen, seen]),
        grader(1, &[unseen, unseen]),
    ]))
    .unwrap();
    assert!((agg.views[0].v - 0.67).abs() < 0.005);
    assert_eq!(
        (
            agg.views[0].m,
            agg.views[0].e,
            agg.views[0].h,
            agg.views[0].l
        ),
        (0.0, 0.0, 1.0, 1.0)
    );
    assert!((agg.vmpc - 0.53).abs() < 0.005, "{}", agg.vmpc);
}

#[test]
fn aggregation_semantics() {
    let full = [1, 1, 1, 1, 1];
    let one = grader(1, &[[1, 0, 0, 1, 1], full]);
    let agg = aggregate(&prompt(vec![one.clone(), one.clone(), one.clone()])).unwrap();
    assert!((agg.vmpc - vmpc(&one).unwrap()).abs() < 1e-12);

    let split = prompt(vec![
        grader(1, &[full]),
        grader(1, &[full]),
        grader(0, &[full]),
    ]);
    let agg = aggregate(&split).unwrap();
    let oracle = (1.0 + 1.0 + 0.0) / 3.0;
    assert!((agg.vmpc - oracle).abs() < 1e-12);
    // Scoring the mean criteria instead gives a different number here.
    assert!((agg.vmpc_of_means - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn no_linking_forces_l() {
    let mut p = prompt(vec![grader(1, &[[1, 1, 1, 1, 0]])]);
    assert_eq!(aggregate(&p).unwrap().vmpc, 1.0);
    p.linking_requested = true;
    assert!((aggregate(&p).unwrap().vmpc - 0.8).abs() < 1e-12);
}

#[test]
fn rejects_invalid_records() {
    assert!(matches!(
        vmpc(&grader(1, &[[2, 1, 1, 1, 1]])),
        Err(ScoreError::NotBinary { .. })
    ));
    assert!(matches!(
        vmpc(&grader(2, &[[1, 1, 1, 1, 1]])),
        Err(ScoreError::NotBinary { .. })
    ));
    assert!(matches!(vmpc(&grader(1, &[])), Err(ScoreError::NoViews)));
    assert!(matches!(
        vmpc(&grader(1, &[[0, 1, 0, 0, 1]])),
        Err(ScoreError::Inconsistent { .. })
    ));
    assert!(matches!(
        vmpc(&grader(1, &[[1, 0, 0, 0, 1]])),
        Err(ScoreError::Inconsistent { .. })
    ));
    let mut p = prompt(vec![grader(1, &[[1, 1, 1, 1, 1]])]);
    p.n_views = 2;
    assert!(matches!(aggregate(&p), Err(ScoreError::ViewCount { .. })));
}

#[test]
fn summary_groups_by_category_and_system() {
    let full = [1, 1, 1, 1, 1];
    let mut rows = Vec::new();
    for (system, cat, x) in [
        ("a", Category::I, 1),
        ("a", Category::S, 0),
        ("b", Category::I, 1),
    ] {
        let mut p = prompt(vec![grader(x, &[full])]);
        p.system = Some(system.into());
        p.category = Some(cat);
        rows.push(p);
    }
    let table = summarize(&rows).unwrap();
    assert_eq!(table.systems, ["a", "b"]);
    let labels: Vec<_> = table.rows.iter().map(|r| r.0.as_str()).collect();
    assert_eq!(labels, ["I", "S", "all"]);
    assert_eq!(table.rows[1].1, [Some(0.0), None]);
    assert_eq!(table.rows[2].1, [Some(0.5), Some(1.0)]);
}

/// Alpha from pairwise disagreements, without a coincidence matrix.
fn alpha_oracle(ratings: &[Vec<Option<u32>>]) -> f64 {
    let items = ratings[0].len();
    let units: Vec<Vec<u32>> = (0..items)
        .map(|i| ratings.iter().filter_map(|r| r[i]).collect::<Vec<_>>())
        .filter(|u| u.len() >= 2)
        .collect();
    let n: usize = units.iter().map(Vec::len).sum();
    let mut d_o = 0.0;
    for u in &units {
        let mut pairs = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    pairs += 1.0;
                }
            }
        }
        d_o += pairs / (u.len() - 1) as f64;
    }
    d_o /= n as f64;
    let all: Vec<u32> = units.concat();
    let mut d_e = 0.0;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i != j && all[i] != all[j] {
                d_e += 1.0;
            }
        }
    }
    d_e /= (n * (n - 1)) as f64;
    1.0 - d_o / d_e
}

#[test]
fn alpha_reference_fixture() {
    // Four coders, twelve units, nominal values with gaps.
    let rows: [[Option<u32>; 12]; 4] = [
        [
            Some(1),
            Some(2),
            Some(3),
            Some(3),
            Some(2),
            Some(1),
            Some(4),
            Some(1),
            Some(2),
            None,
            None,
            None,
        ],
        [
            Some(1),
            Some(2),
            Some(3),
            Some(3),
            Some(2),
            Some(2),
            Some(4),
            Some(1),
            Some(2),
            Some(5),
            None,
            Some(3),
        ],
        [
            None,
            Some(3),
            Some(3),
            Some(3),
            Some(2),
            Some(3),
            Some(4),
            Some(2),
            Some(2),
            Some(5),
            Some(1),
            None,
        ],
        [
            Some(1),
            Some(2),
            Some(3),
            Some(3),
            Some(2),
            Some(4),
            Some(4),
            Some(1),
            Some(2),
            Some(5),
            Some(1),
            None,
        ],
    ];
    let ratings: Vec<Vec<Option<u32>>> = rows.iter().map(|r| r.to_vec()).collect();
    let a = krippendorff_alpha(&ratings).unwrap();
    assert!((a.alpha - alpha_oracle(&ratings)).abs() < 1e-6);
    assert!((a.alpha - 0.743).abs() < 0.001);
}

#[test]
fn alpha_edge_cases() {
    let perfect = vec![
        vec![Some(0), Some(1), Some(1)],
        vec![Some(0), Some(1), Some(1)],
    ];
    assert_eq!(krippendorff_alpha(&perfect).unwrap().alpha, 1.0);

    // Two graders, two items, always disagreeing. By hand: o01 = o10 = 2,
    // n0 = n1 = 2, n = 4, D_o = 4, D_e = (2*2 + 2*2) / 3, alpha = 1 - 3/2.
    let opposed = vec![vec![Some(0), Some(1)], vec![Some(1), Some(0)]];
    let a = krippendorff_alpha(&opposed).unwrap();
    assert!((a.alpha + 0.5).abs() < 1e-12);

    let same = vec![vec![Some(1), Some(1)], vec![Some(1), Some(1)]];
    assert!(krippendorff_alpha(&same).unwrap().degenerate);
    assert!(matches!(
        krippendorff_alpha(&[vec![Some(1)]]),
        Err(StatsError::TooFew(_))
    ));
}

#[test]
fn alpha_matches_oracle_on_random_binary_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..8 {
        let graders = rng.gen_range(2..5);
        let items = rng.gen_range(5..40);
        let truth: Vec<u32> = (0..items).map(|_| rng.gen_range(0..2)).collect();
        let ratings: Vec<Vec<Option<u32>>> = (0..graders)
            .map(|_| {
                truth
                    .iter()
                    .map(|&t| {
                        if rng.gen_bool(0.1) {
                            None
                        } else if rng.gen_bool(0.2) {
                            Some(1 - t)
                        } else {
                            Some(t)
                        }
                    })
                    .collect()
            })
            .collect();
        let a = krippendorff_alpha(&ratings).unwrap();
        if !a.degenerate {
            assert!((a.alpha - alpha_oracle(&ratings)).abs() < 1e-6);
        }
    }
}

/// Rank = 1 + count below + half the other ties.
fn brute_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let below = xs.iter().filter(|y| *y < x).count() as f64;
            let tied = xs.iter().filter(|y| *y == x).count() as f64;
            1.0 + below + (tied - 1.0) / 2.0
        })
        .collect()
}

fn pearson_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
    let sxx: f64 = xs.iter().map(|a| a * a).sum();
    let syy: f64 = ys.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

#[test]
fn correlations_match_oracle_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..6 {
        let n = 20;
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut ys: Vec<f64> = xs
            .iter()
            .map(|x| x * 0.8 + rng.gen_range(0.0..0.4))
            .collect();
        if round % 2 == 1 {
            // Coarse values create ties.
            ys.iter_mut().for_each(|y| *y = (*y * 4.0).round());
        }
        let c = correlations(&xs, &ys).unwrap();
        assert!((c.pearson - pearson_oracle(&xs, &ys)).abs() < 1e-9);
        assert!((c.spearman - pearson_oracle(&brute_ranks(&xs), &brute_ranks(&ys))).abs() < 1e-9);
    }
}

#[test]
fn correlation_edge_cases() {
    let xs = [1.0, 2.0, 3.0, 4.0];
    let c = correlations(&xs, &xs).unwrap();
    assert!((c.pearson - 1.0).abs() < 1e-12 && (c.spearman - 1.0).abs() < 1e-12);
    let rev = [4.0, 3.0, 2.0, 1.0];
    assert!((correlations(&xs, &rev).unwrap().spearman + 1.0).abs() < 1e-12);
    assert_eq!(
        correlations(&xs, &[1.0, 1.0, 1.0, 1.0]),
        Err(StatsError::ZeroVariance)
    );
    assert_eq!(
        correlations(&xs, &[1.0]),
        Err(StatsError::LengthMismatch(4, 1))
    );
}

fn valid_view() -> impl Strategy<Value = ViewCriteria> {
    (0u8..2, 0u8..2, 0u8..2, 0u8..2, 0u8..2).prop_map(|(v, m, e, h, l)| {
        let (m, e) = if v == 0 { (0, 0) } else { (m, e) };
        let h = if v == 1 && m == 0 { 1 } else { h };
        ViewCriteria { v, m, e, h, l }
    })
}

proptest! {
    #[test]
    fn score_is_bounded_and_gated(x in 0u8..2, views in prop::collection::vec(valid_view(), 1..6)) {
        let s = vmpc(&GraderRecord { x, views }).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        if x == 0 { prop_assert_eq!(s, 0.0); }
    }

    #[test]
    fn raising_a_criterion_never_lowers_the_score(
        views in prop::collection::vec(valid_view(), 1..6), pick in 0usize..30,
    ) {
        let before = GraderRecord { x: 1, views: views.clone() };
        let mut after = before.clone();
        let view = pick % views.len();
        let c = &mut after.views[view];
        match pick % 5 {
            0 => c.v = 1,
            1 if c.v == 1 => c.m = 1,
            2 if c.v == 1 => c.e = 1,
            3 => c.h = 1,
            _ => c.l = 1,
        }
        if after.validate().is_ok() {
            prop_assert!(vmpc(&after).unwrap() >= vmpc(&before).unwrap());
        }
    }

    #[test]
    fn agreeing_graders_make_both_aggregations_equal(
        graders in prop::collection::vec(prop::collection::vec(valid_view(), 2), 1..4),
    ) {
        let p = PromptResult {
            prompt: "p".into(), n_views: 2, category: None, system: None, linking_requested: true,
            graders: graders.into_iter().map(|views| GraderRecord { x: 1, views }).collect(),
        };
        let agg = aggregate(&p).unwrap();
        prop_assert!((agg.vmpc - agg.vmpc_of_means).abs() < 1e-12);
    }
}
