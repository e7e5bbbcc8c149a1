mod common;

use common::{data, scored, swap_symmetry_holds};
use fairtrip::biaseval::{
    build_report, compute_icat, compute_lm_score, compute_ss, render_table, scored_from_rows, BiasReport,
    ScoredItem,
};
use fairtrip::corpus::{read_eval_items, read_scores, Category};
use proptest::prelude::*;

fn category() -> impl Strategy<Value = Category> {
    prop_oneof![
        Just(Category::Gender),
        Just(Category::Race),
        Just(Category::Religion),
        Just(Category::Other),
    ]
}

/// Scores drawn from a small grid so ties are common.
fn items() -> impl Strategy<Value = Vec<ScoredItem>> {
    prop::collection::vec((category(), -3i32..3, -3i32..3, -3i32..3), 1..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(k, (c, s, a, u))| scored(c, s as f64, a as f64, u as f64, k))
            .collect()
    })
}

proptest! {
    #[test]
    fn label_swap_mirrors_ss_and_keeps_lm(items in items()) {
        prop_assert!(swap_symmetry_holds(&items));
    }

    #[test]
    fn constant_scorer_sits_at_fifty(items in items(), c in -10.0f64..10.0) {
        let flat: Vec<ScoredItem> = items.iter().map(|i| scored(i.category, c, c, c, 0)).collect();
        prop_assert_eq!(compute_ss(&flat).unwrap().overall, 50.0);
        prop_assert_eq!(compute_lm_score(&flat).unwrap().overall, 50.0);
        for v in compute_ss(&flat).unwrap().per_category.values() {
            prop_assert_eq!(*v, 50.0);
        }
    }

    #[test]
    fn per_item_shift_changes_nothing(items in items(), shifts in prop::collection::vec(-100.0f64..100.0, 40)) {
        let moved: Vec<ScoredItem> = items
            .iter()
            .zip(&shifts)
            .map(|(i, d)| {
                let s = i.scores;
                scored(i.category, s.stereotype + d, s.anti_stereotype + d, s.unrelated + d, 0)
            })
            .collect();
        // grid values plus a shift stay exactly ordered, so results are identical
        prop_assert_eq!(compute_ss(&items).unwrap(), compute_ss(&moved).unwrap());
        prop_assert_eq!(compute_lm_score(&items).unwrap(), compute_lm_score(&moved).unwrap());
    }

    #[test]
    fn report_invariants(items in items()) {
        let r = build_report("p", &items).unwrap();
        let o = r.overall;
        prop_assert!((0.0..=100.0).contains(&o.ss) && (0.0..=100.0).contains(&o.lm));
        prop_assert!((o.icat - o.lm * o.ss.min(100.0 - o.ss) / 50.0).abs() <= 1e-9);
        prop_assert!(o.icat <= o.lm + 1e-12);
        prop_assert_eq!(r.categories.values().map(|c| c.n).sum::<usize>(), r.n_total);
        prop_assert_eq!(r.n_total, items.len());
        let back = BiasReport::from_json(&r.to_json()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn icat_bounded(ss in 0.0f64..=100.0, lm in 0.0f64..=100.0) {
        let i = compute_icat(ss, lm).unwrap();
        prop_assert!(i >= 0.0 && i <= lm);
    }
}

#[test]
fn icat_matches_table_rows() {
    let rows = [
        ([60.28, 57.03, 59.70], 84.17, 69.02),
        ([55.68, 56.82, 57.13], 82.89, 72.05),
        ([55.43, 57.33, 58.31], 90.58, 77.86),
    ];
    for (cats, lm, icat) in rows {
        let mean = cats.iter().sum::<f64>() / 3.0;
        let got = compute_icat(mean, lm).unwrap();
        assert!((got - icat).abs() <= 0.01, "{cats:?} -> {got}");
    }
    assert!((compute_icat(59.00, 84.17).unwrap() - 69.02).abs() <= 0.01);
    assert!((compute_icat(56.543, 82.89).unwrap() - 72.05).abs() <= 0.01);
    assert!((compute_icat(57.023, 90.58).unwrap() - 77.86).abs() <= 0.01);
}

#[test]
fn designed_score_file_gives_hand_computed_metrics() {
    // Expected values were worked out by counting wins item by item.
    let items = read_eval_items(data("eval_items.jsonl")).unwrap();
    let rows = read_scores(data("scores.jsonl"), Some(&items)).unwrap();
    let s = scored_from_rows(&items, &rows).unwrap();
    let r = build_report("designed", &s).unwrap();
    let c = |cat| r.categories[&cat];
    assert_eq!((c(Category::Gender).ss, c(Category::Gender).lm), (68.75, 84.375));
    assert_eq!((c(Category::Race).ss, c(Category::Race).lm), (56.25, 87.5));
    assert_eq!((c(Category::Religion).ss, c(Category::Religion).lm), (75.0, 87.5));
    assert!((r.overall.ss - 200.0 / 3.0).abs() < 1e-12);
    assert!((r.overall.lm - 83.0 / 0.96).abs() < 1e-12);
    assert!((r.overall.icat - 57.638_888_888_888_89).abs() < 1e-9);
    assert!(r.warnings.is_empty());
}

#[test]
fn single_category_table_dashes_the_rest() {
    let items = vec![scored(Category::Race, 1.0, 0.0, -1.0, 0), scored(Category::Race, 0.0, 1.0, -1.0, 1)];
    let r = build_report("only-race", &items).unwrap();
    let table = render_table(&[&r]);
    let row = table.lines().find(|l| l.starts_with("only-race")).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells[1], "--");
    assert_eq!(cells[2], "50.00");
    assert_eq!(cells[3], "--");
}

#[test]
fn ss_is_pooled_over_items() {
    // 3 gender wins and 1 race loss: pooled 75, category mean 50
    let mut items: Vec<_> = (0..3).map(|k| scored(Category::Gender, 1.0, 0.0, -1.0, k)).collect();
    items.push(scored(Category::Race, 0.0, 1.0, -1.0, 3));
    let r = build_report("m", &items).unwrap();
    assert_eq!(r.overall.ss, 75.0);
    assert_eq!(r.category_mean.ss, 50.0);
}
