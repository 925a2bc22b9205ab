use feynparts::theorems::{run_suite, Corruption, Mode, SuiteConfig, THEOREMS};

#[test]
fn monte_carlo_corroborates_every_parts_family() {
    let cfg = SuiteConfig {
        configs: 3,
        mc_configs: 3,
        mc_paths: 100_000,
        mc_grid: 128,
        ..SuiteConfig::default()
    };
    let reps = run_suite(&cfg).unwrap();
    let mc: Vec<_> = reps.iter().filter(|r| r.mode == Mode::MonteCarlo).collect();
    assert!(!mc.is_empty());
    let failing: Vec<_> = mc
        .iter()
        .filter(|r| !r.pass)
        .map(|r| (&r.name, r.lhs, r.rhs, r.abs_gap, r.lhs_se, r.rhs_se))
        .collect();
    assert!(failing.is_empty(), "{failing:?}");
    for r in &mc {
        // closed form on the left, sample mean on the right
        assert_eq!(r.lhs_se, Some(0.0), "{}", r.name);
        assert!(r.rhs_se.unwrap() > 0.0, "{}", r.name);
    }
    let exact_fail: Vec<_> = reps
        .iter()
        .filter(|r| r.mode == Mode::Exact && !r.pass)
        .map(|r| &r.name)
        .collect();
    assert!(exact_fail.is_empty(), "{exact_fail:?}");
}

#[test]
fn printed_transform_reading_is_reported_and_fails() {
    let reps = run_suite(&SuiteConfig {
        configs: 12,
        probe_printed_reading: true,
        only: vec!["parts_transforms".into()],
        ..SuiteConfig::default()
    })
    .unwrap();
    let printed: Vec<_> = reps
        .iter()
        .filter(|r| r.name.starts_with("parts_transforms_printed/"))
        .collect();
    let distinct = reps
        .iter()
        .filter(|r| r.name.starts_with("parts_transforms/") && r.params.get("k1") != r.params.get("k2"))
        .count();
    // only draws with k1 != k2 tell the readings apart
    assert_eq!(printed.len(), distinct);
    assert!(distinct > 0);
    for r in &printed {
        assert!(!r.pass && r.nontrivial, "{} gap {:e}", r.name, r.rel_gap);
    }
    assert!(reps
        .iter()
        .filter(|r| r.name.starts_with("parts_transforms/"))
        .all(|r| r.pass));
}

#[test]
fn every_family_runs_alone_with_distinct_names() {
    for fam in THEOREMS {
        let reps = run_suite(&SuiteConfig {
            configs: 4,
            only: vec![fam.to_string()],
            ..SuiteConfig::default()
        })
        .unwrap();
        assert!(reps.len() >= 4, "{fam}");
        let mut names: Vec<_> = reps.iter().map(|r| r.name.clone()).collect();
        names.dedup();
        assert_eq!(names.len(), reps.len(), "{fam}");
        assert!(reps.iter().all(|r| r.pass), "{fam}");
    }
}

#[test]
fn seed_changes_draws_but_not_verdicts() {
    let a = run_suite(&SuiteConfig {
        configs: 5,
        seed: 1,
        ..SuiteConfig::default()
    })
    .unwrap();
    let b = run_suite(&SuiteConfig {
        configs: 5,
        seed: 2,
        ..SuiteConfig::default()
    })
    .unwrap();
    assert_ne!(a[0].lhs, b[0].lhs);
    assert!(a.iter().chain(&b).all(|r| r.pass));
}

#[test]
fn unknown_family_is_rejected() {
    assert!(run_suite(&SuiteConfig {
        only: vec!["no_such_family".into()],
        ..SuiteConfig::default()
    })
    .is_err());
    assert!(Corruption::parse("sideways").is_err());
}
