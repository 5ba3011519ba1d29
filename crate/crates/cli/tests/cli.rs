//! Exit codes and report formats of the `isoweyl` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn isoweyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoweyl"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("run isoweyl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn euclidean_curvature_is_zero() {
    let o = isoweyl(&["curvature", "specs/euclidean.bwm", "--point", "1,2,3,4", "--machine"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let values: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("quantity=riemann ") || l.contains("quantity=weyl ") || l.contains("quantity=ricci"))
        .collect();
    assert_eq!(values.len(), 21 + 21 + 10);
    assert!(values.iter().all(|l| l.ends_with("value=0.0000000000000000e0")));
}

#[test]
fn exact_curvature_prints_rationals() {
    let o = isoweyl(&["curvature", "specs/euclidean.bwm", "--point", "1,2,3,4", "--exact", "--machine"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("RESULT spec=euclidean quantity=scalar index=- value=0/1"));
}

#[test]
fn verify_detm_example() {
    let o = isoweyl(&["verify", "detM", "--m", "1", "--points", "100", "--seed", "7", "--exact", "--machine"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("RESULT identity=detM m=1 trials=100 status=pass"));
}

#[test]
fn verify_detm_degenerate_m_reports_zero_determinant() {
    let o = isoweyl(&["verify", "detM", "--m", "-1/2", "--points", "20", "--machine"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("determinant=zero"));
}

#[test]
fn mutated_identity_fails_with_exit_1() {
    let o = isoweyl(&["verify", "bracket", "--points", "10", "--mutate", "0", "--machine"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("status=fail"));
    assert!(text.lines().any(|l| l.starts_with("RESULT identity=bracket trial=") && l.contains(" residual=")));
}

#[test]
fn missing_spec_exits_2() {
    let o = isoweyl(&["classify", "specs/missing.bwm"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("spec file not found"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&isoweyl(&["frobnicate"])), 2);
    assert_eq!(code(&isoweyl(&["curvature", "specs/euclidean.bwm", "--point", "1,2"])), 2);
    assert_eq!(code(&isoweyl(&["verify", "nonsense"])), 2);
    assert_eq!(code(&isoweyl(&["verify", "L-lemma-b", "--m", "2"])), 2);
    assert_eq!(code(&isoweyl(&["verify", "bracket", "--m", "1/3"])), 2);
    assert_eq!(code(&isoweyl(&["scan", "specs/lemma-b.bwm", "--grid", "0,1,1,1"])), 2);
}

#[test]
fn numerical_errors_exit_3() {
    let o = isoweyl(&["curvature", "specs/lemma-b.bwm", "--point", "1,1,-1/2,1/2"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("coordinate collision"));
}

#[test]
fn flatness_verdicts_drive_exit_code() {
    let flat = isoweyl(&["flatness", "specs/lemma-c.bwm", "--samples", "20", "--machine"]);
    assert_eq!(code(&flat), 0);
    assert!(stdout(&flat).starts_with("RESULT check=conformal_flatness spec=lemma-c pass=true max_residual="));
    let curved = isoweyl(&["flatness", "specs/case-iv-m1.bwm", "--samples", "20", "--machine"]);
    assert_eq!(code(&curved), 1);
    let not_flat = isoweyl(&["flatness", "specs/lemma-d.bwm", "--riemann", "--samples", "20", "--machine"]);
    assert_eq!(code(&not_flat), 1);
    let elliptic = isoweyl(&["flatness", "specs/elliptic.bwm", "--riemann", "--tol", "1e-9", "--machine"]);
    assert_eq!(code(&elliptic), 0);
}

#[test]
fn classify_reports_lemma_case_and_petrov() {
    let o = isoweyl(&["classify", "specs/lemma-a.bwm", "--samples", "20", "--machine"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("RESULT check=lemma_case spec=lemma-a case=a"));
    assert!(text.contains("check=signature spec=lemma-a pattern=+++- kind=lorentzian count=20"));
    assert!(text.contains("type=O advisory=false"));
}

#[test]
fn scan_rows_are_lexicographic_and_skip_inadmissible_points() {
    let o = isoweyl(&["scan", "specs/lemma-b.bwm", "--grid", "2,1,1,1", "--machine"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("point=2.1,"));
    assert!(lines[1].contains("point=2.9,"));

    let dir = tempdir();
    let path = dir.join("collide.bwm");
    std::fs::write(
        &path,
        "metric \"collide\"\nfamily case-iv\nm 1\nF1 poly 1\nF2 poly 1\nF3 poly 1\nF4 poly 1\nM expr 1\n\
         domain unordered\nbox x1 0 1\nbox x2 0 1\nbox x3 2 3\nbox x4 4 5\n",
    )
    .unwrap();
    let o = isoweyl(&["scan", path.to_str().unwrap(), "--grid", "2,2,1,1", "--machine"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.matches("status=skipped").count(), 2);
    assert!(text.contains("reason=point_not_admissible:_coordinate_collision_(1,2)"));
}

#[test]
fn human_output_is_a_table() {
    let o = isoweyl(&["verify", "detM", "--points", "5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("identity  m  trials  status\n--------  -  ------  ------\ndetM      1  5       pass\n"));
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isoweyl-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
