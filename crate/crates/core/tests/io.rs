mod common;

use std::collections::BTreeMap;
use std::fs;

use common::{scenario, GIB};
use dado::evaluator::check_feasibility;
use dado::model::{build_model, Family, ModelIr, VarKind};
use dado::scenarios::{random_micro, tiny, MicroShape};
use dado::solvers::{
    export_mps, import_solution, read_mps, read_values_file, solve_bnb, solve_oracle, write_mps,
    write_values_file, SolutionRecord, SolveStatus, SolverConfig,
};
use dado::Error;

fn sample_scenario() -> dado::Scenario {
    scenario(
        &[(0.0, 0), (1e9, GIB), (2e9, GIB)],
        &[0, 1, 2],
        3,
        &[1e8, 2e8],
        &[(0, vec![0, 1]), (1, vec![1])],
        2,
    )
}

fn sample() -> ModelIr {
    build_model(&sample_scenario()).unwrap()
}

#[test]
fn mps_round_trip_preserves_rows_columns_and_coefficients() {
    let model = sample();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.mps");
    export_mps(&model, &path).unwrap();
    let mps = read_mps(&path).unwrap();

    assert_eq!(mps.name, "DADO");
    assert_eq!(mps.rows.len(), model.n_rows());
    assert_eq!(mps.columns.len(), model.n_vars());
    for (v, name) in model.layout().ids().zip(&mps.columns) {
        assert_eq!(&model.var_name(v), name);
    }

    let mut expected = BTreeMap::new();
    for (ri, row) in model.constraints().enumerate() {
        assert_eq!(mps.rows[ri].0, row.key.to_string());
        assert!((mps.rhs[ri] - row.rhs).abs() <= 1e-12 * row.rhs.abs().max(1.0));
        for t in row.terms {
            expected.insert((ri, t.var.index()), t.coef);
        }
    }
    let got: BTreeMap<_, _> = mps
        .coefficients
        .iter()
        .map(|&(r, c, v)| ((r, c), v))
        .collect();
    assert_eq!(got.len(), expected.len());
    for (k, v) in &expected {
        assert!((got[k] - v).abs() <= 1e-12 * v.abs(), "{k:?}");
    }

    let mut obj = vec![0.0; model.n_vars()];
    for t in model.objective() {
        obj[t.var.index()] += t.coef;
    }
    for &(c, v) in &mps.objective {
        assert!((obj[c] - v).abs() <= 1e-12 * v.abs().max(1.0));
    }

    let counts: Vec<(Family, usize)> = mps.family_counts().into_iter().collect();
    assert_eq!(counts, model.family_counts());
}

#[test]
fn every_binary_is_declared_binary() {
    let model = sample();
    let mut buf = Vec::new();
    write_mps(&model, &mut buf).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mps");
    fs::write(&path, &buf).unwrap();
    let mps = read_mps(&path).unwrap();
    for v in model.layout().ids() {
        let b = mps.bounds[v.index()];
        assert_eq!(b.binary, model.is_binary(v), "{}", model.var_name(v));
        if model.is_fixed_zero(v) {
            assert_eq!(b.upper, 0.0);
        }
    }
    // hosts without CPU cannot run anything
    let z = model.layout().id(VarKind::Z { host: 0, item: 0 });
    assert!(model.is_fixed_zero(z));
}

#[test]
fn mps_export_is_byte_identical_across_builds() {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_mps(&sample(), &mut a).unwrap();
    write_mps(&sample(), &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mps_reader_rejects_missing_endata() {
    let mut buf = Vec::new();
    write_mps(&build_model(&tiny()).unwrap(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap().replace("ENDATA\n", "");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mps");
    fs::write(&path, text).unwrap();
    assert!(read_mps(&path).is_err());
}

#[test]
fn exported_solution_imports_with_same_status_and_objective() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..10 {
        let model = build_model(&random_micro(seed, MicroShape::default())).unwrap();
        let sol = solve_bnb(&model, &SolverConfig::default()).unwrap();
        let path = dir.path().join(format!("s{seed}.sol"));
        write_values_file(&model, &sol, &path).unwrap();
        let imported = import_solution(&model, &path).unwrap();
        assert_eq!(imported.solution.status, sol.status);
        assert!(imported.report.passes);
        let (a, b) = (
            imported.solution.objective_value.unwrap(),
            sol.objective_value.unwrap(),
        );
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        assert_eq!(imported.solution.values, sol.values);
    }
}

#[test]
fn import_reports_memory_violation() {
    let model = sample();
    let sol = solve_oracle(&model, &SolverConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sol");
    write_values_file(&model, &sol, &path).unwrap();
    // same point against a copy whose computing hosts have no memory left
    let mut s = sample_scenario();
    for h in &mut s.hosts {
        if h.id == "h1" || h.id == "h2" {
            h.ram_bytes = 1;
        }
    }
    let tight = build_model(&s).unwrap();
    let imported = import_solution(&tight, &path).unwrap();
    assert_eq!(imported.solution.status, SolveStatus::Infeasible);
    assert!(imported
        .report
        .violated_families()
        .contains(&Family::Eq2.tag()));
    assert!(imported
        .report
        .violated_rows
        .iter()
        .any(|(name, _)| name.starts_with("EQ2_")));
}

#[test]
fn truncated_file_is_a_parse_error() {
    let model = build_model(&tiny()).unwrap();
    let sol = solve_oracle(&model, &SolverConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sol");
    write_values_file(&model, &sol, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() - 3]).unwrap();
    assert!(matches!(
        import_solution(&model, &path),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn malformed_lines_and_unknown_names_are_rejected() {
    let model = build_model(&tiny()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sol");
    fs::write(&path, "z_h9_w0_a0=1\n").unwrap();
    assert!(matches!(
        read_values_file(&model, &path),
        Err(Error::UnknownVariable(_))
    ));
    fs::write(&path, "not a pair\n").unwrap();
    assert!(matches!(
        read_values_file(&model, &path),
        Err(Error::Parse { line: 1, .. })
    ));
    fs::write(&path, "# status=optimal\nx_s0=abc\n").unwrap();
    assert!(matches!(
        read_values_file(&model, &path),
        Err(Error::Parse { line: 2, .. })
    ));
}

#[test]
fn solution_record_round_trips_through_json() {
    let model = sample();
    let sol = solve_bnb(&model, &SolverConfig::default()).unwrap();
    let record = SolutionRecord::new(&model, &sol);
    let json = serde_json::to_string_pretty(&record).unwrap();
    let back: SolutionRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, record);
    let restored = back.to_solution(&model).unwrap();
    assert_eq!(restored.values, sol.values);
    assert_eq!(restored.status, sol.status);
    assert!(check_feasibility(&model, &restored).unwrap().passes);

    let other = build_model(&tiny()).unwrap();
    assert!(matches!(
        back.to_solution(&other),
        Err(Error::ScenarioMismatch)
    ));
}
