use std::process::{Command, Output};

use cutoff_core::cli::token_id;
use cutoff_core::{run, Variant};

fn cutoff(args: &[&str], input: &str) -> Output {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_cutoff"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn field(out: &Output, key: &str) -> String {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_owned))
        .unwrap_or_else(|| panic!("no {key}"))
}

#[test]
fn estimate_matches_the_library() {
    let tokens: Vec<String> = (0..5000).map(|i| format!("k{}", (i * 31) % 1700)).collect();
    let input = tokens.join("\n") + "\n";
    let ids: Vec<u64> = tokens.iter().map(|t| token_id(t)).collect();
    for name in [
        "dond",
        "dond-prime",
        "cvm1",
        "cvm2",
        "cvm2-refuse-adjoined",
        "cvm2-refuse",
    ] {
        let variant: Variant = name.parse().unwrap();
        let out = cutoff(
            &["estimate", "--variant", name, "--s", "100", "--seed", "42"],
            &input,
        );
        let lib = run(
            variant.config(100).unwrap(),
            42,
            false,
            ids.iter().copied(),
            5000,
            5000,
        )
        .report;
        assert_eq!(
            field(&out, "final_list_size"),
            lib.final_list_size.to_string(),
            "{name}"
        );
        assert_eq!(field(&out, "status"), lib.status.to_string(), "{name}");
        match lib.estimate {
            Some(e) => assert_eq!(field(&out, "estimate").parse::<f64>().unwrap(), e, "{name}"),
            None => assert_eq!(field(&out, "estimate"), "none"),
        }
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(
        cutoff(&["estimate", "--s", "3"], "a\nb\n").status.code(),
        Some(0)
    );
    assert_eq!(cutoff(&["estimate"], "a\n").status.code(), Some(1));
    assert_eq!(
        cutoff(
            &["size", "--epsilon", "0", "--delta", "0.1", "--m", "5"],
            ""
        )
        .status
        .code(),
        Some(1)
    );
    let bad = cutoff(&["sets", "--s", "3"], "range 1 2\ncube 1 2\n");
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));
    assert_eq!(
        cutoff(&["estimate", "--s", "3", "/nonexistent/file"], "")
            .status
            .code(),
        Some(2)
    );
    let many: String = (0..5000).map(|i| format!("{i}\n")).collect();
    assert_eq!(
        cutoff(
            &["estimate", "--variant", "cvm1", "--s", "1", "--seed", "3"],
            &many
        )
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn simulate_runs_the_shipped_config() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/experiment.toml");
    let out = cutoff(&["simulate", config], "");
    assert_eq!(out.status.code(), Some(0));
    for key in [
        "trials",
        "mean_estimate",
        "standard_error",
        "empirical_bias",
        "failure_rate",
        "abort_rate",
        "p_small_rate",
    ] {
        field(&out, key);
    }
}

#[test]
fn simulate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.toml");
    std::fs::write(&zero, "variant = \"cvm2\"\nepsilon = 0.5\ndelta = 0.1\ntrials = 0\n[stream]\nkind = \"all_distinct\"\nf0 = 10\n").unwrap();
    assert_eq!(
        cutoff(&["simulate", zero.to_str().unwrap()], "")
            .status
            .code(),
        Some(2)
    );
    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, "variant = \"cvm2\"\nepsilon = 0.5\ndelta = 0.1\ntrials = 3\ntrails = 4\n[stream]\nkind = \"all_distinct\"\nf0 = 10\n").unwrap();
    assert_eq!(
        cutoff(&["simulate", typo.to_str().unwrap()], "")
            .status
            .code(),
        Some(2)
    );
}
