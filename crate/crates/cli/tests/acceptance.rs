use std::process::Command;

use finsler_cli::report::{number, Verdict};
use finsler_cli::suite;

fn run_check_paper(out: &std::path::Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(["check-paper", "--seed", "42", "--out"])
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

#[test]
fn acceptance_criteria() {
    let report = suite::corpus_report(42).unwrap();
    let mut failed = Vec::new();
    for id in 1..=9u8 {
        let records: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.criterion == Some(id))
            .collect();
        assert!(!records.is_empty(), "criterion {id} has no checks");
        let ok = records.iter().all(|c| c.verdict == Verdict::Pass);
        let mut tolerances: Vec<f64> = records.iter().map(|c| c.tolerance).collect();
        tolerances.sort_by(f64::total_cmp);
        tolerances.dedup();
        let tolerances: Vec<String> = tolerances.into_iter().map(number).collect();
        let worst = records
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("non-empty");
        println!(
            "criterion {id:>2}: {}  ({} checks, tolerance {}, largest residual {} in {})",
            if ok { "PASS" } else { "FAIL" },
            records.len(),
            tolerances.join(" / "),
            number(worst.residual),
            worst.name
        );
        for c in records.iter().filter(|c| c.verdict == Verdict::Fail) {
            println!(
                "    failing: {} residual {} tolerance {}",
                c.name,
                number(c.residual),
                number(c.tolerance)
            );
        }
        if !ok {
            failed.push(id);
        }
    }

    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let (a, b) = (
        dir.join("check-paper-a.json"),
        dir.join("check-paper-b.json"),
    );
    let codes = (run_check_paper(&a), run_check_paper(&b));
    let bytes = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let identical = bytes.0 == bytes.1 && !bytes.0.is_empty();
    println!(
        "criterion 10: {}  (two check-paper runs, seed 42, {} bytes, byte-identical: {identical}, exit codes {:?})",
        if identical { "PASS" } else { "FAIL" },
        bytes.0.len(),
        codes
    );
    if !identical {
        failed.push(10);
    }
    assert_eq!(codes, (0, 0));
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
