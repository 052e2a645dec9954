//! Runs the `mm` binary through a fixed script and compares each step with
//! its checked-in transcript under `tests/golden`. Steps share one model
//! home, so later steps see what earlier ones stored. Set `UPDATE_GOLDEN=1`
//! to rewrite the transcripts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Step {
    pub name: &'static str,
    pub args: &'static [&'static str],
}

const fn step(name: &'static str, args: &'static [&'static str]) -> Step {
    Step { name, args }
}

pub const STEPS: &[Step] = &[
    step("metamodel-list", &["metamodel", "list"]),
    step(
        "metamodel-check",
        &["metamodel", "check", "file_history.mm.json"],
    ),
    step(
        "metamodel-check-cycle",
        &["metamodel", "check", "cyclic.mm.json"],
    ),
    step(
        "query-package-uplift",
        &[
            "query",
            "--model",
            "demo",
            "type:Package | outgoing Invocation | at-scope Package",
        ],
    ),
    step(
        "query-children",
        &["query", "--model", "demo", "type:Class | children"],
    ),
    step(
        "query-class-scope",
        &[
            "query",
            "--model",
            "demo",
            r#"name:"Engine" | all-outgoing | at-scope Class"#,
        ],
    ),
    step(
        "query-incoming",
        &[
            "query",
            "--model",
            "demo",
            r#"name:"Strings" | all-incoming | at-scope Package"#,
        ],
    ),
    step(
        "query-bad-verb",
        &["query", "--model", "demo", "type:Package | sideways"],
    ),
    step(
        "query-unknown-model",
        &["query", "--model", "nowhere", "type:Package"],
    ),
    step(
        "tag-packages",
        &[
            "tag",
            "--model",
            "demo",
            "--name",
            "packages",
            "type:Package",
        ],
    ),
    step(
        "metrics-packages",
        &["metrics", "--model", "demo", "--tag", "packages"],
    ),
    step(
        "tag-core-classes",
        &[
            "tag",
            "--model",
            "demo",
            "--name",
            "core-classes",
            "--color",
            "3366cc",
            r#"name:"core" | children"#,
        ],
    ),
    step(
        "metrics-core-classes",
        &["metrics", "--model", "demo", "--tag", "core-classes"],
    ),
    step(
        "query-by-tag",
        &[
            "query",
            "--model",
            "demo",
            r#"tag:"core-classes" | all-incoming"#,
        ],
    ),
    step(
        "metrics-unknown-tag",
        &["metrics", "--model", "demo", "--tag", "nope"],
    ),
    step("dup-default", &["dup", "--model", "demo"]),
    step(
        "dup-min-tokens-10",
        &["dup", "--model", "demo", "--min-tokens", "10"],
    ),
    step(
        "dup-selected",
        &[
            "dup",
            "--model",
            "demo",
            "--min-tokens",
            "5",
            r#"name:"Store" | children"#,
        ],
    ),
    step("export-demo", &["export", "--model", "demo", "-"]),
    step("import-vcs", &["import-vcs", "history.csv"]),
    step(
        "query-history-authors",
        &[
            "query",
            "--model",
            "history",
            r#"name:"alice" | all-incoming"#,
        ],
    ),
    step("import-vcs-short-row", &["import-vcs", "short.csv"]),
    step(
        "import-bad-slot",
        &["import", "--metamodel", "file-history", "bad_commit.json"],
    ),
    step(
        "import-wrong-metamodel",
        &["import", "--metamodel", "sql-lite", "shop.json"],
    ),
    step(
        "import-shop",
        &["import", "--metamodel", "java-lite", "shop.json"],
    ),
    step(
        "metrics-shop-cart",
        &["metrics", "--model", "shop", "--tag", "cart"],
    ),
    step(
        "query-shop",
        &[
            "query",
            "--model",
            "shop",
            "type:Package | outgoing Invocation | at-scope Package",
        ],
    ),
    step("export-shop", &["export", "--model", "shop", "-"]),
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn quote(arg: &str) -> String {
    if !arg.is_empty()
        && arg
            .chars()
            .all(|c| c.is_alphanumeric() || "-_./:".contains(c))
    {
        arg.to_owned()
    } else {
        format!("'{arg}'")
    }
}

/// The transcript of one invocation: command line, standard output, then
/// standard error and exit status when they are not empty and zero.
pub fn transcript(home: &Path, step: &Step) -> String {
    let output = Command::new(env!("CARGO_BIN_EXE_mm"))
        .args(step.args)
        .current_dir(fixtures())
        .env("MM_HOME", home)
        .output()
        .expect("mm runs");
    let mut text = format!(
        "$ mm {}\n",
        step.args
            .iter()
            .map(|a| quote(a))
            .collect::<Vec<_>>()
            .join(" ")
    );
    text.push_str(&String::from_utf8_lossy(&output.stdout));
    let stderr = String::from_utf8_lossy(&output.stderr);
    if !stderr.is_empty() {
        text.push_str("[stderr]\n");
        text.push_str(&stderr);
    }
    let code = output.status.code().unwrap_or(-1);
    if code != 0 {
        text.push_str(&format!("[exit {code}]\n"));
    }
    text
}

/// Runs every step; each result is `Err` with both texts on a mismatch.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    let home = tempfile::tempdir().expect("temp dir");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    STEPS
        .iter()
        .map(|step| {
            let actual = transcript(home.path(), step);
            let path = golden_dir().join(format!("{}.txt", step.name));
            if update {
                fs::write(&path, &actual).expect("write golden");
            }
            let expected = fs::read_to_string(&path).unwrap_or_default();
            let result = if actual == expected {
                Ok(())
            } else {
                Err(format!("expected:\n{expected}\nactual:\n{actual}"))
            };
            (step.name, result)
        })
        .collect()
}
