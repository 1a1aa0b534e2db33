use critcouple::verify::{self, VerifyConfig};

#[test]
fn every_registered_check_passes() {
    let cfg = VerifyConfig {
        sweep: 200,
        ..VerifyConfig::default()
    };
    let summary = verify::run(&cfg, None).unwrap();
    let failed: Vec<_> = summary.failed().collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert!(summary.checks.len() >= 25);
}

#[test]
fn filtered_run_repeats_the_full_run() {
    let cfg = VerifyConfig {
        sweep: 50,
        ..VerifyConfig::default()
    };
    let full = verify::run(&cfg, Some("coupling")).unwrap();
    let one = verify::run(&cfg, Some("coupling.case_root_counts")).unwrap();
    let same = full.checks.iter().find(|c| c.name == "coupling.case_root_counts").unwrap();
    assert_eq!(one.checks.len(), 1);
    assert_eq!(one.checks[0].detail, same.detail);
}

#[test]
fn unknown_filter_is_an_error() {
    assert!(verify::run(&VerifyConfig::default(), Some("no_such_module")).is_err());
}
