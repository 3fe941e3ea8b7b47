use pclass_core::report::{analyze, to_csv, AnalyzeOptions, ExitClass, PrimeReport};

fn run(p: u64) -> PrimeReport {
    analyze(p, &AnalyzeOptions::default()).unwrap().report
}

#[test]
fn regular_prime_has_trivial_structures() {
    let r = run(5);
    assert!(r.regular && r.pairs.is_empty());
    assert_eq!((r.r, r.lambda_total, r.nu), (0, 0, Some(0)));
    assert!(r.structures.values().all(|s| s.is_empty()));
    assert_eq!(r.exit_class(), ExitClass::Ok);
}

#[test]
fn two_irregular_indices_at_157() {
    let r = run(157);
    assert_eq!(r.pairs.iter().map(|x| x.e).collect::<Vec<_>>(), vec![62, 110]);
    assert_eq!((r.r, r.lambda_total, r.nu), (2, 2, Some(2)));
    assert_eq!(r.structures[&0], vec![1, 1]);
    assert_eq!(r.structures[&1], vec![2, 2]);
    assert_eq!(r.predictions[&2], vec![2, 2]);
    let order = |n: u32| r.structures[&n].iter().sum::<u32>();
    assert_eq!(order(1) - order(0), 2);
    assert!(r.pairs.iter().all(|x| x.eisenstein && x.check1 && x.check2));
    assert!(r.flags.is_empty());
}

#[test]
fn json_round_trips() {
    for p in [5, 37, 59, 67, 101, 157, 691] {
        let r = run(p);
        let back = PrimeReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }
}

#[test]
fn csv_has_one_row_per_report() {
    let reports: Vec<PrimeReport> = [5, 37, 59].into_iter().map(run).collect();
    let text = to_csv(&reports).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("5,true,0,"));
}

#[test]
fn level_and_depth_options_are_respected() {
    let opts = AnalyzeOptions {
        level: Some(1),
        depth: Some(3),
        ..AnalyzeOptions::default()
    };
    let r = analyze(37, &opts).unwrap().report;
    assert_eq!(r.structures[&3], vec![4]);
    assert_eq!(r.predictions.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3]);
    assert!(analyze(9, &opts).is_err());
}
