mod support;

use std::collections::BTreeSet;

use support::golden::{golden_dir, run_all, STEPS};

#[test]
fn every_command_matches_its_transcript() {
    let failures: Vec<String> = run_all()
        .into_iter()
        .filter_map(|(name, r)| r.err().map(|diff| format!("== {name}\n{diff}")))
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn no_stale_transcripts() {
    let expected: BTreeSet<String> = STEPS.iter().map(|s| format!("{}.txt", s.name)).collect();
    let present: BTreeSet<String> = std::fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(present, expected);
}
