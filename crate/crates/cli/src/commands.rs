//! One function per verb; each returns report rows and whether its checks passed.

use std::path::Path;

use isoweyl_core::classify::{
    conformal_flatness, lemma_case, petrov_tag, petrov_triple, scan_report, signature, table1_residuals,
    ScanStatus,
};
use isoweyl_core::curvature::{curvature, CurvatureBundle};
use isoweyl_core::exact::{run_identity, IdentityCase, IdentityKind, Mutation};
use isoweyl_core::formulas::{BracketForm, DetMForm};
use isoweyl_core::metric::{Family, PAIRS};
use isoweyl_core::sampling::{par_map, sample_points, SamplePlan};
use isoweyl_core::scalar::{parse_rational, Scalar};
use isoweyl_core::specfile::parse_spec;
use isoweyl_core::{BigRational, Error, MetricSpec};

use crate::report::{self, Row};

/// Errors that map to exit code 2 (bad input) or 3 (numerics).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("spec file not found: {0}")]
    SpecNotFound(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

pub struct Outcome {
    pub rows: Vec<Row>,
    pub pass: bool,
}

pub fn load_spec(path: &Path) -> Result<MetricSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::SpecNotFound(path.display().to_string()),
        _ => CliError::Io {
            path: path.display().to_string(),
            source: e,
        },
    })?;
    Ok(parse_spec(&text)?)
}

/// `a,b,c,d` with rational (`3/2`) or decimal (`0.25`, `1e-3`) entries, kept exact.
pub fn parse_point(text: &str) -> Result<[BigRational; 4], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!("--point needs 4 comma-separated values, got {text:?}")));
    }
    let mut out: [BigRational; 4] = Default::default();
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_rational(part).ok_or_else(|| CliError::Usage(format!("bad coordinate {part:?}")))?;
    }
    Ok(out)
}

pub fn parse_grid(text: &str) -> Result<[usize; 4], CliError> {
    let parts: Result<Vec<usize>, _> = text.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match parts {
        Ok(v) if v.len() == 4 && v.iter().all(|&n| n > 0) => Ok([v[0], v[1], v[2], v[3]]),
        _ => Err(CliError::Usage(format!("--grid needs 4 positive comma-separated counts, got {text:?}"))),
    }
}

fn to_f64(p: &[BigRational; 4]) -> [f64; 4] {
    std::array::from_fn(|i| p[i].to_f64())
}

/// Index label like `1213` (1-based).
fn label(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect()
}

/// `(i<j, k<l, (i,j) ≤ (k,l))` — the 21 algebraically independent slots.
fn riemann_slots() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for (a, &(i, j)) in PAIRS.iter().enumerate() {
        for &(k, l) in &PAIRS[a..] {
            out.push([i, j, k, l]);
        }
    }
    out
}

fn tensor_rows<S: Scalar>(spec: &MetricSpec, b: &CurvatureBundle<S>, fmt: impl Fn(&S) -> String) -> Vec<Row> {
    let row = |quantity: &str, index: String, value: String| {
        Row::new()
            .with("spec", spec.name.clone())
            .with("quantity", quantity)
            .with("index", index)
            .with("value", value)
    };
    let mut rows = Vec::new();
    for i in 0..4 {
        rows.push(row("g", label(&[i, i]), fmt(&b.metric[i])));
    }
    for i in 0..4 {
        for j in i..4 {
            rows.push(row("ricci", label(&[i, j]), fmt(&b.ricci[i][j])));
        }
    }
    rows.push(row("scalar", "-".into(), fmt(&b.scalar)));
    for [i, j, k, l] in riemann_slots() {
        rows.push(row("riemann", label(&[i, j, k, l]), fmt(&b.riemann[i][j][k][l])));
    }
    for [i, j, k, l] in riemann_slots() {
        rows.push(row("weyl", label(&[i, j, k, l]), fmt(&b.weyl[i][j][k][l])));
    }
    rows
}

pub fn curvature_cmd(path: &Path, point: &str, exact: bool) -> Result<Outcome, CliError> {
    let spec = load_spec(path)?;
    let p = parse_point(point)?;
    let mut rows = Vec::new();
    let sig = signature(&spec, &p)?;
    rows.push(
        Row::new()
            .with("spec", spec.name.clone())
            .with("point", report::point_rational(&p))
            .with("mode", if exact { "exact" } else { "float" })
            .with("signature", sig.pattern()),
    );
    if exact {
        let b = curvature(&spec, &p)?;
        rows.extend(tensor_rows(&spec, &b, report::rational));
    } else {
        let b = curvature(&spec, &to_f64(&p))?;
        rows.extend(tensor_rows(&spec, &b, |x| report::float(*x)));
        for (quantity, value) in [("riemann_norm", b.riemann_norm()), ("weyl_residual", b.weyl_residual())] {
            rows.push(
                Row::new()
                    .with("spec", spec.name.clone())
                    .with("quantity", quantity)
                    .with("index", "-")
                    .with("value", report::float(value)),
            );
        }
    }
    Ok(Outcome { rows, pass: true })
}

fn verdict_row(check: &str, spec: &MetricSpec, pass: bool, max_residual: f64, samples: usize) -> Row {
    Row::new()
        .with("check", check)
        .with("spec", spec.name.clone())
        .with("pass", report::bool(pass))
        .with("max_residual", report::float(max_residual))
        .with("samples", samples.to_string())
}

/// Signature census, Lemma case, flatness, the `C^k_{ikj} = 0` condition and
/// (when it holds) the Petrov tag. Classification is informational: exit 0.
pub fn classify_cmd(path: &Path, point: Option<&str>, plan: &SamplePlan, tol: f64) -> Result<Outcome, CliError> {
    let spec = load_spec(path)?;
    let points = sample_points(&spec, plan)?;
    let reference = match point {
        Some(text) => to_f64(&parse_point(text)?),
        None => points[0],
    };
    let mut rows = Vec::new();

    let sigs: Result<Vec<_>, Error> = points.iter().map(|p| signature(&spec, p)).collect();
    let mut census: Vec<(String, String, usize)> = Vec::new();
    for s in sigs? {
        let pattern = s.pattern();
        match census.iter_mut().find(|c| c.0 == pattern) {
            Some(c) => c.2 += 1,
            None => census.push((pattern, s.kind.name().to_string(), 1)),
        }
    }
    census.sort();
    for (pattern, kind, count) in census {
        rows.push(
            Row::new()
                .with("check", "signature")
                .with("spec", spec.name.clone())
                .with("pattern", pattern)
                .with("kind", kind)
                .with("count", count.to_string()),
        );
    }

    if matches!(spec.family, Family::CaseIV | Family::Table1IV) {
        rows.push(
            Row::new()
                .with("check", "lemma_case")
                .with("spec", spec.name.clone())
                .with("case", lemma_case(&spec)?.name()),
        );
    }

    let flat = conformal_flatness(&spec, plan, tol)?;
    rows.push(verdict_row("conformal_flatness", &spec, flat.pass, flat.max_residual, flat.samples_used));

    let residuals: Result<Vec<(f64, f64)>, Error> =
        par_map(&points, |p| table1_residuals(&spec, p)).into_iter().collect();
    let residuals = residuals?;
    let ckikj = residuals.iter().fold(0.0f64, |m, r| m.max(r.0));
    let lambda = residuals.iter().fold(0.0f64, |m, r| m.max(r.1));
    rows.push(verdict_row("ckikj_zero", &spec, ckikj <= tol, ckikj, points.len()));
    rows.push(verdict_row("lambda_cyclic", &spec, lambda <= tol, lambda, points.len()));

    if ckikj <= tol {
        let b = curvature(&spec, &reference)?;
        let sig = signature(&spec, &reference)?;
        // compare in the scale-free frame so the tag does not depend on M
        let tag = petrov_tag(petrov_triple(&b.weyl_mixed22), &sig, tol * b.frame_riemann_scale().max(1.0))?;
        rows.push(
            Row::new()
                .with("check", "petrov")
                .with("spec", spec.name.clone())
                .with("point", report::point_f64(&reference))
                .with("type", tag.kind.name())
                .with("advisory", report::bool(tag.advisory)),
        );
    }
    Ok(Outcome { rows, pass: true })
}

/// Conformal flatness (default) or full flatness (`riemann`) at sampled points.
pub fn flatness_cmd(path: &Path, plan: &SamplePlan, tol: f64, riemann: bool) -> Result<Outcome, CliError> {
    let spec = load_spec(path)?;
    let (pass, row) = if riemann {
        let points = sample_points(&spec, plan)?;
        let norms: Result<Vec<f64>, Error> = par_map(&points, |p| curvature(&spec, p).map(|b| b.riemann_norm()))
            .into_iter()
            .collect();
        let max = norms?.into_iter().fold(0.0f64, f64::max);
        (max <= tol, verdict_row("riemann_flatness", &spec, max <= tol, max, points.len()))
    } else {
        let v = conformal_flatness(&spec, plan, tol)?;
        (v.pass, verdict_row("conformal_flatness", &spec, v.pass, v.max_residual, v.samples_used))
    };
    Ok(Outcome { rows: vec![row], pass })
}

pub fn scan_cmd(path: &Path, grid: &str) -> Result<Outcome, CliError> {
    let spec = load_spec(path)?;
    let grid = parse_grid(grid)?;
    let report_rows = scan_report(&spec, grid);
    let mut evaluated = 0;
    let rows = report_rows
        .iter()
        .map(|r| {
            let row = Row::new().with("spec", spec.name.clone()).with("point", report::point_f64(&r.point));
            match &r.status {
                ScanStatus::Evaluated {
                    signature,
                    weyl_residual,
                    riemann_norm,
                } => {
                    evaluated += 1;
                    row.with("status", "ok")
                        .with("signature", signature.pattern())
                        .with("weyl_residual", report::float(*weyl_residual))
                        .with("riemann_norm", report::float(*riemann_norm))
                }
                ScanStatus::Skipped(reason) => row.with("status", "skipped").with("reason", reason.clone()),
            }
        })
        .collect();
    if evaluated == 0 {
        return Err(Error::NoAdmissiblePoints {
            attempts: report_rows.len(),
        }
        .into());
    }
    Ok(Outcome { rows, pass: true })
}

pub fn verify_cmd(
    identity: &str,
    m: Option<&str>,
    trials: usize,
    seed: u64,
    mutate: Option<usize>,
) -> Result<Outcome, CliError> {
    let kind: IdentityKind = identity.parse().map_err(|_| {
        let names: Vec<&str> = IdentityKind::ALL.iter().map(|k| k.name()).collect();
        CliError::Usage(format!("unknown identity {identity:?}; expected one of {}", names.join(", ")))
    })?;
    let m = m
        .map(|text| parse_rational(text).ok_or_else(|| CliError::Usage(format!("bad --m value {text:?}"))))
        .transpose()?;
    let mut case = IdentityCase::new(kind, m, trials, seed)?;
    if let Some(index) = mutate {
        let mutation = match kind {
            IdentityKind::Bracket if index < BracketForm::COEFFICIENTS => {
                Mutation::Bracket(BracketForm::default().perturbed(index))
            }
            IdentityKind::DetM if index < DetMForm::COEFFICIENTS => Mutation::DetM(DetMForm::default().perturbed(index)),
            IdentityKind::Bracket | IdentityKind::DetM => {
                return Err(CliError::Usage(format!("--mutate index {index} out of range for {kind}")))
            }
            _ => return Err(CliError::Usage(format!("--mutate applies to bracket and detM only, not {kind}"))),
        };
        case = case.with_mutation(mutation);
    }
    let r = run_identity(&case)?;
    let name = r.kind.name();
    let mut rows = vec![Row::new()
        .with("identity", name)
        .with("m", report::short_rational(&r.m))
        .with("trials", r.trials.to_string())
        .with("status", if r.pass { "pass" } else { "fail" })];
    let mut detail = Row::new().with("identity", name).with("resampled", r.resampled.to_string());
    if let Some(zero) = r.all_zero_determinant {
        detail = detail.with("determinant", if zero { "zero" } else { "nonzero" });
    }
    rows.push(detail);
    if let Some(f) = &r.first_failure {
        rows.push(
            Row::new()
                .with("identity", name)
                .with("trial", f.trial.to_string())
                .with("point", report::point_rational(&f.point))
                .with("residual", report::rational(&f.residual)),
        );
    }
    Ok(Outcome { rows, pass: r.pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use isoweyl_core::scalar::q;

    #[test]
    fn points_parse_exactly() {
        let p = parse_point("1,0.25,-3/2,1e-3").unwrap();
        assert_eq!(p, [q(1, 1), q(1, 4), q(-3, 2), q(1, 1000)]);
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("1,2,x,4").is_err());
    }

    #[test]
    fn grids_parse() {
        assert_eq!(parse_grid("2,3,1,4").unwrap(), [2, 3, 1, 4]);
        assert!(parse_grid("2,0,1,4").is_err());
        assert!(parse_grid("2,3").is_err());
    }

    #[test]
    fn riemann_slots_are_independent_pairs() {
        assert_eq!(riemann_slots().len(), 21);
    }

    #[test]
    fn missing_spec_is_usage_error() {
        let e = load_spec(Path::new("/nonexistent/missing.bwm")).err().unwrap();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("spec file not found"));
    }

    #[test]
    fn verify_detm_row_format() {
        let out = verify_cmd("detM", Some("1"), 5, 7, None).unwrap();
        assert!(out.pass);
        assert_eq!(
            report::render(&out.rows[..1], true),
            "RESULT identity=detM m=1 trials=5 status=pass\n"
        );
    }

    #[test]
    fn mutation_outside_closed_forms_is_rejected() {
        let e = verify_cmd("L-lemma-b", None, 5, 7, Some(0)).err().unwrap();
        assert_eq!(e.exit_code(), 2);
    }
}
