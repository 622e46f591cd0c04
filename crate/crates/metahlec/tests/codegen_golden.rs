//! Pins the generated artifacts for one representative instance per
//! design family. Run with `METAHLEC_BLESS=1` to refresh the golden
//! files after an intentional generator change.

use std::path::PathBuf;
use std::process::Command;

use metahlec::codegen::{gen_all, Templates};
use metahlec::design::{mk_design, Selector};

fn golden_dir(instance: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(instance)
}

fn blessing() -> bool {
    std::env::var_os("METAHLEC_BLESS").is_some_and(|v| v == "1")
}

#[test]
fn canonical_designs_match_their_golden_artifacts() {
    let templates = Templates::builtin();
    for sel in Selector::CANONICAL {
        let bundle = mk_design(&Selector::parse(sel).unwrap()).unwrap();
        let artifacts = gen_all(&bundle.alg, &bundle.rtl, &bundle.instance, &templates).unwrap();
        let dir = golden_dir(&bundle.instance.name);
        if blessing() {
            std::fs::create_dir_all(&dir).unwrap();
            for a in &artifacts {
                std::fs::write(dir.join(&a.filename), &a.content).unwrap();
            }
            continue;
        }
        let mut expected: Vec<String> = std::fs::read_dir(&dir)
            .unwrap_or_else(|e| panic!("missing golden dir {}: {e}", dir.display()))
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        expected.sort();
        let mut got: Vec<String> = artifacts.iter().map(|a| a.filename.clone()).collect();
        got.sort();
        assert_eq!(got, expected, "artifact set changed for {sel}");
        for a in &artifacts {
            let want = std::fs::read_to_string(dir.join(&a.filename)).unwrap();
            assert_eq!(
                a.content, want,
                "{sel}: {} drifted from its golden copy",
                a.filename
            );
        }
    }
    if blessing() {
        panic!("golden files refreshed; rerun without METAHLEC_BLESS");
    }
}

#[test]
fn runscripts_pass_a_shell_syntax_check() {
    let templates = Templates::builtin();
    let tmp = tempfile::tempdir().unwrap();
    for sel in Selector::CANONICAL {
        let bundle = mk_design(&Selector::parse(sel).unwrap()).unwrap();
        for a in gen_all(&bundle.alg, &bundle.rtl, &bundle.instance, &templates).unwrap() {
            if !a.is_executable() {
                continue;
            }
            let path = tmp.path().join(&a.filename);
            std::fs::write(&path, &a.content).unwrap();
            let status = Command::new("sh").arg("-n").arg(&path).status().unwrap();
            assert!(status.success(), "{sel}: sh -n rejected {}", a.filename);
        }
    }
}
