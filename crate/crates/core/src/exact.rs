//! Exact identity testing at random rational points.
//!
//! Each identity is a rational-function identity in the coordinates. A pass
//! means the residual was exactly zero at every trial point; with bounded
//! degrees and a large sample lattice this is strong evidence, not a proof,
//! and reports say so.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classify::{distinct_triples, Verdict};
use crate::curvature::CurvatureBundle;
use crate::expr::Expr;
use crate::formulas::{
    bracket_sides, cijij, ckikj, det_m_build, det_m_closed, derivative_identity_difference,
    lambda_cyclic_differences, l_quantity_spec, BracketForm, DetMForm, PhiJets,
};
use crate::metric::{make_lemma_family, CoordFn, LemmaFamily, MetricSpec, PAIRS};
use crate::sampling::random_rational_point;
use crate::scalar::{format_rational, q, Scalar};
use crate::Error;

/// Draws per trial before a point-dependent failure aborts the run.
pub const RESAMPLE_LIMIT: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityKind {
    /// `A·C^{12}_{12} − B·C^{13}_{13} = (M²/2) m(2m−1) Π(x^k−x^l)^{−2m−1} L`.
    Bracket,
    /// Eliminated coefficient determinant against its closed form.
    DetM,
    /// `L = 0` for the shared-quadratic family at `m = −1/2`.
    LLemmaB,
    /// `L = ΣF_i = 0` for constant `F = (1, 2, 3, −6)` at `m = −1`.
    LLemmaA,
    /// Vanishing Riemann tensor of the `m = 1/2` family with a quartic
    /// (four real roots) and constant conformal factor.
    FlatnessElliptic,
    /// `λ_ijk = λ_jki = λ_kij` for case iv.
    LambdaCyclicIv,
    /// `∂_k C^k_{ikj} = ½(λ_kij + λ_kji)` for case iv.
    DerivativeIdentityIv,
    /// All closed-form Weyl components vanish for the `m = −1/2` family.
    WeylLemmaB,
    /// All closed-form Weyl components vanish for the `m = 1/2` family.
    WeylLemmaD,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 9] = [
        IdentityKind::Bracket,
        IdentityKind::DetM,
        IdentityKind::LLemmaB,
        IdentityKind::LLemmaA,
        IdentityKind::FlatnessElliptic,
        IdentityKind::LambdaCyclicIv,
        IdentityKind::DerivativeIdentityIv,
        IdentityKind::WeylLemmaB,
        IdentityKind::WeylLemmaD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Bracket => "bracket",
            IdentityKind::DetM => "detM",
            IdentityKind::LLemmaB => "L-lemma-b",
            IdentityKind::LLemmaA => "L-lemma-a",
            IdentityKind::FlatnessElliptic => "flatness-elliptic",
            IdentityKind::LambdaCyclicIv => "lambda-cyclic-iv",
            IdentityKind::DerivativeIdentityIv => "derivative-identity-iv",
            IdentityKind::WeylLemmaB => "weyl-lemma-b",
            IdentityKind::WeylLemmaD => "weyl-lemma-d",
        }
    }

    /// The parameter this identity is tied to, if any.
    pub fn fixed_m(self) -> Option<BigRational> {
        match self {
            IdentityKind::LLemmaB | IdentityKind::WeylLemmaB => Some(q(-1, 2)),
            IdentityKind::LLemmaA => Some(q(-1, 1)),
            IdentityKind::FlatnessElliptic | IdentityKind::WeylLemmaD => Some(q(1, 2)),
            _ => None,
        }
    }

    /// Parameter used when none is given.
    pub fn default_m(self) -> BigRational {
        self.fixed_m().unwrap_or_else(|| match self {
            IdentityKind::Bracket => q(2, 1),
            _ => q(1, 1),
        })
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        IdentityKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidMetric(format!("unknown identity {s:?}")))
    }
}

/// A deliberate change to a closed form, used to show the harness detects errors.
#[derive(Debug, Clone, PartialEq)]
pub enum Mutation {
    Bracket(BracketForm),
    DetM(DetMForm),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCase {
    pub kind: IdentityKind,
    pub m: BigRational,
    pub trials: usize,
    pub seed: u64,
    pub boxes: [(BigRational, BigRational); 4],
    pub mutation: Option<Mutation>,
}

/// Ordered, well separated default boxes (`x1 > x2 > x3 > x4`).
pub fn default_boxes() -> [(BigRational, BigRational); 4] {
    [(q(6, 1), q(9, 1)), (q(2, 1), q(5, 1)), (q(-1, 1), q(1, 1)), (q(-5, 1), q(-2, 1))]
}

impl IdentityCase {
    pub fn new(kind: IdentityKind, m: Option<BigRational>, trials: usize, seed: u64) -> Result<Self, Error> {
        let m = match (kind.fixed_m(), m) {
            (Some(fixed), Some(given)) if fixed != given => {
                return Err(Error::FamilyMismatch(format!(
                    "identity {kind} is stated for m = {}, got m = {}",
                    format_rational(&fixed),
                    format_rational(&given)
                )))
            }
            (_, Some(given)) => given,
            (_, None) => kind.default_m(),
        };
        if !(&m * BigRational::from_integer(2.into())).is_integer() {
            return Err(Error::NonIntegralExponent(format!("2m = {}", format_rational(&(&m * q(2, 1))))));
        }
        Ok(IdentityCase {
            kind,
            m,
            trials,
            seed,
            boxes: default_boxes(),
            mutation: None,
        })
    }

    pub fn with_mutation(mut self, mutation: Mutation) -> Self {
        self.mutation = Some(mutation);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: usize,
    pub point: [BigRational; 4],
    pub residual: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub kind: IdentityKind,
    pub m: BigRational,
    pub trials: usize,
    pub pass: bool,
    /// Points redrawn because the identity was undefined there.
    pub resampled: usize,
    /// Earliest failing trial.
    pub first_failure: Option<TrialFailure>,
    /// Whether every evaluated `det M` was exactly zero (det M only).
    pub all_zero_determinant: Option<bool>,
}

impl IdentityReport {
    pub fn verdict(&self) -> Verdict {
        let residual = self
            .first_failure
            .as_ref()
            .map(|f| f.residual.to_f64().abs())
            .unwrap_or(0.0);
        Verdict {
            kind: format!("identity:{}", self.kind),
            pass: self.pass,
            max_residual: residual,
            tolerance: 0.0,
            samples_used: self.trials,
            details: format!(
                "exact evaluation at {} random rational points (identity testing, not a proof)",
                self.trials
            ),
        }
    }
}

struct Trial {
    residual: BigRational,
    point: [BigRational; 4],
    resampled: usize,
    det_zero: Option<bool>,
}

/// Deterministic random quadratic `F_i` with nonzero constant term.
fn random_quadratics(seed: u64) -> [CoordFn; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    std::array::from_fn(|i| {
        let c0 = q(rng.gen_range(1..=8), rng.gen_range(1..=4));
        CoordFn::poly(i, vec![c0, q(rng.gen_range(-8..=8), 4), q(rng.gen_range(-8..=8), 4)])
    })
}

fn shared_coeffs(seed: u64, len: usize) -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ef_f1c1);
    (0..len)
        .map(|k| {
            let c = q(rng.gen_range(-8..=8), rng.gen_range(1..=4));
            if k + 1 == len && c.is_zero() {
                q(1, 1)
            } else {
                c
            }
        })
        .collect()
}

/// Monic quartic with four distinct rational roots, as `a0..a4`.
fn quartic_with_roots(seed: u64) -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0e11_1971);
    let mut roots: Vec<BigRational> = Vec::new();
    while roots.len() < 4 {
        let r = q(rng.gen_range(-40..=40), rng.gen_range(1..=4));
        if !roots.contains(&r) {
            roots.push(r);
        }
    }
    let mut poly = vec![q(1, 1)];
    for r in roots {
        let mut next = vec![q(0, 1); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] += c.clone();
            next[k] -= c * &r;
        }
        poly = next;
    }
    poly
}

/// The metric spec an identity is evaluated on.
pub fn case_spec(case: &IdentityCase) -> Result<MetricSpec, Error> {
    let one = Expr::int(1);
    let coeffs = |len| shared_coeffs(case.seed, len);
    match case.kind {
        IdentityKind::Bracket | IdentityKind::DetM => {
            MetricSpec::case_iv("bracket", case.m.clone(), random_quadratics(case.seed), one)
        }
        IdentityKind::LambdaCyclicIv | IdentityKind::DerivativeIdentityIv => {
            MetricSpec::case_iv("case-iv", case.m.clone(), random_quadratics(case.seed), one)
        }
        IdentityKind::LLemmaA => make_lemma_family(LemmaFamily::A([q(1, 1), q(2, 1), q(3, 1), q(-6, 1)]), one),
        IdentityKind::LLemmaB | IdentityKind::WeylLemmaB => {
            let c = coeffs(3);
            make_lemma_family(LemmaFamily::B([c[0].clone(), c[1].clone(), c[2].clone()]), one)
        }
        IdentityKind::WeylLemmaD => {
            let c = coeffs(7);
            make_lemma_family(LemmaFamily::D(std::array::from_fn(|k| c[k].clone())), one)
        }
        IdentityKind::FlatnessElliptic => {
            let mut c = quartic_with_roots(case.seed);
            c.resize(7, q(0, 1));
            make_lemma_family(LemmaFamily::D(std::array::from_fn(|k| c[k].clone())), one)
        }
    }
}

fn first_nonzero(values: impl IntoIterator<Item = BigRational>) -> BigRational {
    values.into_iter().find(|v| !v.is_zero()).unwrap_or_else(|| q(0, 1))
}

fn residual_at(case: &IdentityCase, spec: &MetricSpec, p: &[BigRational; 4]) -> Result<(BigRational, Option<bool>), Error> {
    Ok(match case.kind {
        IdentityKind::Bracket => {
            let form = match &case.mutation {
                Some(Mutation::Bracket(f)) => f.clone(),
                _ => BracketForm::default(),
            };
            let (l, r) = bracket_sides(spec, p, &form)?;
            (l - r, None)
        }
        IdentityKind::DetM => {
            let form = match &case.mutation {
                Some(Mutation::DetM(f)) => f.clone(),
                _ => DetMForm::default(),
            };
            let (_, det) = det_m_build(&case.m, p)?;
            let closed = det_m_closed(&case.m, p, &form)?;
            let zero = det.is_zero();
            (det - closed, Some(zero))
        }
        IdentityKind::LLemmaA | IdentityKind::LLemmaB => (l_quantity_spec(spec, p)?, None),
        IdentityKind::FlatnessElliptic => {
            spec.admissible(p).into_result()?;
            let b = CurvatureBundle::<BigRational>::from_jets(&spec.metric_jets(p)?)?;
            (first_nonzero(b.riemann.iter().flatten().flatten().flatten().cloned()), None)
        }
        IdentityKind::LambdaCyclicIv => {
            let phi = PhiJets::at(spec, p)?;
            let mut out = Vec::new();
            for (i, j, k) in distinct_triples() {
                out.extend(lambda_cyclic_differences(&phi, i, j, k)?);
            }
            (first_nonzero(out), None)
        }
        IdentityKind::DerivativeIdentityIv => {
            let phi = PhiJets::at(spec, p)?;
            let mut out = Vec::new();
            for (i, j, k) in distinct_triples() {
                out.push(derivative_identity_difference(&phi, i, j, k)?);
            }
            (first_nonzero(out), None)
        }
        IdentityKind::WeylLemmaB | IdentityKind::WeylLemmaD => {
            spec.admissible(p).into_result()?;
            let phi = PhiJets::at(spec, p)?;
            let mut out = Vec::new();
            for (i, j, k) in distinct_triples() {
                out.push(ckikj(&phi, i, j, k)?);
            }
            for &(i, j) in &PAIRS {
                out.push(cijij(&phi, i, j)?);
            }
            (first_nonzero(out), None)
        }
    })
}

fn run_trial(case: &IdentityCase, spec: &MetricSpec, trial: usize) -> Result<Trial, Error> {
    let mut last_err = None;
    for attempt in 0..RESAMPLE_LIMIT {
        let stream = trial as u64 * RESAMPLE_LIMIT + attempt;
        let p = random_rational_point(case.seed, stream, &case.boxes)?;
        match residual_at(case, spec, &p) {
            Ok((residual, det_zero)) => {
                return Ok(Trial {
                    residual,
                    point: p,
                    resampled: attempt as usize,
                    det_zero,
                })
            }
            Err(e @ (Error::PivotZero(_) | Error::Inadmissible(_) | Error::Domain(_))) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::RetriesExhausted(RESAMPLE_LIMIT as usize)))
}

/// Runs every trial (in parallel; points depend only on `(seed, trial)`).
pub fn run_identity(case: &IdentityCase) -> Result<IdentityReport, Error> {
    let spec = case_spec(case)?;
    let trials: Vec<Result<Trial, Error>> = (0..case.trials).into_par_iter().map(|t| run_trial(case, &spec, t)).collect();
    let mut resampled = 0;
    let mut first_failure = None;
    let mut all_zero = true;
    for (t, trial) in trials.into_iter().enumerate() {
        let trial = trial?;
        resampled += trial.resampled;
        if let Some(z) = trial.det_zero {
            all_zero &= z;
        }
        if first_failure.is_none() && !trial.residual.is_zero() {
            first_failure = Some(TrialFailure {
                trial: t,
                point: trial.point,
                residual: trial.residual,
            });
        }
    }
    Ok(IdentityReport {
        kind: case.kind,
        m: case.m.clone(),
        trials: case.trials,
        pass: first_failure.is_none(),
        resampled,
        first_failure,
        all_zero_determinant: (case.kind == IdentityKind::DetM).then_some(all_zero),
    })
}
