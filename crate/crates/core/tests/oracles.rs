mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decide_matches_brute_force(seed in any::<u64>()) {
        common::decide_case(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn plans_are_valid_and_near_minimal(seed in any::<u64>()) {
        common::plan_case(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn kb_updates_stay_consistent(seed in any::<u64>()) {
        let mut stats = common::KbFuzzStats::default();
        common::kb_fuzz_case(seed, &mut stats).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn generated_terms_round_trip(seed in any::<u64>()) {
        common::term_round_trip(seed).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn shipped_files_round_trip() {
    let files = common::shipped_files();
    assert!(files.len() >= 8, "found only {files:?}");
    for f in files {
        common::round_trip_file(&f).unwrap();
    }
}
