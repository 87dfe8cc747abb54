use std::path::PathBuf;

use cr_core::corpus::cases::{published_cases, run_test_cases};
use cr_core::corpus::sweep::{table_6a, table_6b, table_6cd, table_6e, K_VALUES};
use cr_core::corpus::{budget_table, builtin_nrc, builtin_scenario, grid, rank_all, sweep, table2};
use cr_core::{ContextInfo, PriorityClass};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Compares against a golden file. `UPDATE_FIXTURES=1` rewrites it instead.
fn golden(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("UPDATE_FIXTURES").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} drifted from its golden copy");
}

#[test]
fn fifteen_cases_reproduce() {
    let outcomes = run_test_cases();
    assert_eq!(outcomes.len(), 15);
    for o in &outcomes {
        assert!(o.answer_matches(), "case {}: {:?}", o.number, o.answer);
        assert!(
            o.confidence_matches(),
            "case {}: {}",
            o.number,
            o.confidence
        );
        assert!(
            o.budgets_match(),
            "case {}: {:?} {:?}",
            o.number,
            o.budgets,
            o.evaluated_budgets
        );
    }
}

#[test]
fn case_nine_stops_before_its_last_printed_budget() {
    let o = &run_test_cases()[8];
    assert_eq!(o.evaluated_budgets, vec![2, 2, 2]);
    assert_eq!(o.budgets, vec![2, 2, 2, 2]);
}

#[test]
fn negated_case_reports_certainty() {
    let case = &published_cases()[1];
    assert!(case.negated);
    let o = &run_test_cases()[1];
    assert!(o.negated);
    assert_eq!(o.confidence, 1.0);
}

#[test]
fn threshold_table() {
    let result = sweep(&builtin_nrc(), &builtin_scenario(), &table_6a::grid()).unwrap();
    let checks = table_6a::check(&result);
    let matched = checks.iter().filter(|c| c.matches).count();
    assert_eq!(matched, 19);
    let odd: Vec<_> = checks.iter().filter(|c| !c.matches).collect();
    assert_eq!(odd.len(), 1);
    assert!(odd[0].documented_divergence);
    assert!((odd[0].computed - 0.7707542).abs() < 1e-6);
    golden("table_6a.csv", &result.to_csv());
}

#[test]
fn priority_variations() {
    let ontology = builtin_nrc();
    let scenario = builtin_scenario();
    let mut all = String::new();
    for g in table_6b::grids() {
        let result = sweep(&ontology, &scenario, &g.grid()).unwrap();
        if g.asserted {
            let low = matches!(g.priority, PriorityClass::Vlp | PriorityClass::Lp);
            let published: f64 = g.published_variation.parse().unwrap();
            assert!(
                (result.variation - published).abs() < 1e-9,
                "{:?}",
                g.priority
            );
            if low {
                assert!((result.max_confidence() - 0.8544).abs() < 1e-12);
                assert!((result.min_confidence() - 0.709570656).abs() < 1e-12);
            }
        }
        all.push_str(&format!("# {}\n{}", g.priority, result.to_csv()));
    }
    golden("table_6b.csv", &all);
}

#[test]
fn medium_priority_print_matches_another_grid() {
    let column = grid(&[0.45], &[1.0], &K_VALUES).unwrap();
    let result = sweep(&builtin_nrc(), &builtin_scenario(), &column).unwrap();
    assert!((result.variation - 0.1221834720).abs() < 1e-12);
}

#[test]
fn depth_against_tradeoff() {
    let ontology = builtin_nrc();
    let scenario = builtin_scenario();
    let c = sweep(
        &ontology,
        &scenario,
        &grid(&[table_6cd::C_M], &[table_6cd::C_E], &K_VALUES).unwrap(),
    )
    .unwrap();
    let d = sweep(
        &ontology,
        &scenario,
        &grid(&[table_6cd::D_M], &[table_6cd::D_E], &K_VALUES).unwrap(),
    )
    .unwrap();
    let depths =
        |r: &cr_core::corpus::SweepResult| r.cells.iter().map(|c| c.depth).collect::<Vec<_>>();
    assert_eq!(depths(&c), vec![1, 1, 2, 3, 4]);
    assert_eq!(depths(&d), vec![2, 3, 4, 4, 4]);
    golden("table_6c.csv", &c.to_csv());
    golden("table_6d.csv", &d.to_csv());
}

#[test]
fn budgets_per_level() {
    let ontology = builtin_nrc();
    for column in &table_6e::COLUMNS {
        let (m, e, k) = column.ci;
        let rows = budget_table(&ontology, &[ContextInfo::new(m, e, k).unwrap()]);
        assert_eq!(rows[0].budgets, column.expected, "{:?}", column.ci);
        assert_eq!(
            column.published_reproduced,
            column.published == column.expected
        );
    }
}

#[test]
fn ranking_puts_sup_ont_first() {
    let ranked = rank_all(&table2());
    assert_eq!(ranked[0], ("Sup_Ont".to_string(), 0.9375));
    assert_eq!(ranked.iter().find(|(n, _)| n == "CC/PP").unwrap().1, 0.25);
}
