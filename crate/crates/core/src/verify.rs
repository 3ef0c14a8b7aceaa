//! Named residual checks over a grid of levels, aggregated into a report.

use crate::annihilator::{two_level_identity_residual, Annihilator, SpaceSpec};
use crate::error::{Error, Result};
use crate::filterbank::{factorize, s_formula_residual, BankFamily, FilterBank};
use crate::signal::{Function, HermiteSignal};
use crate::subdivision::{make_mask, refinement_residual, spectral_residual};
use crate::tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Per-family pass thresholds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub interpolatory: f64,
    pub biorthogonality: f64,
    pub spectral: f64,
    pub vanishing_moment: f64,
    pub factorization: f64,
    pub two_level: f64,
    pub eigvec: f64,
    pub refinement: f64,
    pub perfect_reconstruction: f64,
    pub taylor_limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            interpolatory: tolerances::INTERPOLATORY,
            biorthogonality: tolerances::BIORTHOGONALITY,
            spectral: tolerances::SPECTRAL,
            vanishing_moment: tolerances::VANISHING_MOMENT,
            factorization: tolerances::FACTORIZATION,
            two_level: tolerances::TWO_LEVEL,
            eigvec: tolerances::EIGVEC,
            refinement: tolerances::REFINEMENT,
            perfect_reconstruction: tolerances::PERFECT_RECONSTRUCTION,
            taylor_limit: tolerances::TAYLOR_LIMIT,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 10] = [
        "interpolatory",
        "biorthogonality",
        "spectral",
        "vanishing_moment",
        "factorization",
        "two_level",
        "eigvec",
        "refinement",
        "perfect_reconstruction",
        "taylor_limit",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Shape(format!("tolerance for {name} must be positive, got {value}")));
        }
        let slot = match name {
            "interpolatory" => &mut self.interpolatory,
            "biorthogonality" => &mut self.biorthogonality,
            "spectral" => &mut self.spectral,
            "vanishing_moment" => &mut self.vanishing_moment,
            "factorization" => &mut self.factorization,
            "two_level" => &mut self.two_level,
            "eigvec" => &mut self.eigvec,
            "refinement" => &mut self.refinement,
            "perfect_reconstruction" => &mut self.perfect_reconstruction,
            "taylor_limit" => &mut self.taylor_limit,
            _ => {
                return Err(Error::Shape(format!(
                    "unknown tolerance `{name}`, expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub spec: SpaceSpec,
    pub levels: Vec<u32>,
    /// Refinement steps for the spectral check.
    pub depth: u32,
    pub seed: u64,
    /// Random signals per level for the reconstruction check.
    pub signals: usize,
    /// Shift applied to one low-pass entry of every bank.
    pub perturb: Option<f64>,
    /// Level at which the annihilator is compared with the Taylor operator.
    pub taylor_limit: Option<u32>,
    pub tolerances: Tolerances,
}

impl VerifyConfig {
    pub fn new(spec: SpaceSpec) -> Self {
        Self {
            spec,
            levels: (0..=4).collect(),
            depth: 4,
            seed: 0,
            signals: 4,
            perturb: None,
            taylor_limit: None,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub level: Option<u32>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn new(name: &str, level: Option<u32>, outcome: Result<f64>, tolerance: f64) -> Self {
        let (residual, error) = match outcome {
            Ok(r) => (r, None),
            Err(Error::NotDivisible { residual }) => (residual, Some("not divisible".to_string())),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        Self {
            name: name.to_string(),
            level,
            residual,
            tolerance,
            passed: error.is_none() && residual <= tolerance,
            error,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: VerifyConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0, |acc, r| r.map(|r| f64::max(acc, r)))
}

fn bank_for(config: &VerifyConfig, level: u32) -> Result<FilterBank> {
    let bank = FilterBank::build(&make_mask(config.spec, level)?)?;
    Ok(match config.perturb {
        Some(eps) => bank.with_perturbed_lowpass(eps),
        None => bank,
    })
}

/// Annihilator specs exercised by the operator checks: the space itself, plus
/// the `p = 1` space with the same frequency.
fn annihilator_specs(spec: SpaceSpec) -> Vec<SpaceSpec> {
    match spec.lambda {
        Some(l) => vec![spec, SpaceSpec { p: 1, lambda: Some(l) }],
        None => vec![spec],
    }
}

fn reconstruction_residual(config: &VerifyConfig, level: u32) -> Result<f64> {
    let mut family = BankFamily::for_transform(config.spec, level, level)?;
    if config.perturb.is_some() {
        for l in 0..level {
            family.insert(bank_for(config, l)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ u64::from(level));
    let len = 64usize.max(2 << level);
    max_of((0..config.signals).map(|_| {
        let rows = (0..len)
            .map(|_| (0..config.spec.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        let signal = HermiteSignal::from_rows(level, 0, rows)?;
        let back = family.synthesize(&family.analyze(&signal, level)?)?;
        back.max_abs_diff(&signal)
    }))
}

fn level_checks(config: &VerifyConfig, n: u32) -> Vec<Check> {
    let tol = &config.tolerances;
    let spec = config.spec;
    let lvl = Some(n);
    let mut checks = Vec::new();

    let mask = make_mask(spec, n);
    checks.push(Check::new(
        "interpolatory",
        lvl,
        mask.as_ref().map(|m| m.interpolatory_residual()).map_err(clone_err),
        tol.interpolatory,
    ));
    let bank = bank_for(config, n);
    checks.push(Check::new(
        "biorthogonality",
        lvl,
        bank.as_ref().map(FilterBank::biorthogonality_residual).map_err(clone_err),
        tol.biorthogonality,
    ));
    checks.push(Check::new("spectral", lvl, spectral_residual(spec, n, config.depth), tol.spectral));

    let mut moments = vec![Function::Monomial(0)];
    if let Some(l) = spec.lambda {
        moments.extend([Function::Exp(l), Function::Exp(-l)]);
    }
    checks.push(Check::new(
        "vanishing_moment",
        lvl,
        bank.as_ref()
            .map_err(clone_err)
            .and_then(|b| max_of(moments.iter().map(|f| b.vanishing_moment_residual(f)))),
        tol.vanishing_moment,
    ));

    match mask.as_ref().map_err(clone_err).and_then(factorize) {
        Ok(pair) => {
            checks.push(Check::new("factorization_r", lvl, Ok(pair.r_residual), tol.factorization));
            checks.push(Check::new("factorization_s", lvl, Ok(pair.s_residual), tol.factorization));
            let formula = Annihilator::new(spec, n + 1).and_then(|a| s_formula_residual(&pair.r, &pair.s, &a));
            checks.push(Check::new("s_formula", lvl, formula, tol.factorization));
        }
        Err(e) => {
            let msg = e.to_string();
            for name in ["factorization_r", "factorization_s", "s_formula"] {
                checks.push(Check::new(name, lvl, Err(Error::Shape(msg.clone())), tol.factorization));
            }
        }
    }

    for a_spec in annihilator_specs(spec) {
        let suffix = format!("p={}", a_spec.p);
        checks.push(Check::new(
            &format!("two_level[{suffix}]"),
            lvl,
            two_level_identity_residual(a_spec, n),
            tol.two_level,
        ));
        if a_spec.lambda.is_some() {
            checks.push(Check::new(
                &format!("eigvec[{suffix}]"),
                lvl,
                Annihilator::new(a_spec, n).and_then(|a| a.eigvec_residual()),
                tol.eigvec,
            ));
        }
    }

    if n >= 1 {
        checks.push(Check::new("refinement", lvl, refinement_residual(spec, n, 6), tol.refinement));
        checks.push(Check::new(
            "perfect_reconstruction",
            lvl,
            reconstruction_residual(config, n),
            tol.perfect_reconstruction,
        ));
    }
    checks
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::NotDivisible { residual } => Error::NotDivisible { residual: *residual },
        other => Error::Shape(other.to_string()),
    }
}

/// Runs every check; levels are processed in parallel.
pub fn run(config: &VerifyConfig) -> Report {
    let per_level: Vec<Vec<Check>> = config
        .levels
        .par_iter()
        .map(|&n| level_checks(config, n))
        .collect();
    let mut checks: Vec<Check> = per_level.into_iter().flatten().collect();
    if let Some(n) = config.taylor_limit {
        for a_spec in annihilator_specs(config.spec) {
            checks.push(Check::new(
                &format!("taylor_limit[p={}]", a_spec.p),
                Some(n),
                Annihilator::new(a_spec, n).map(|a| a.taylor_distance()),
                config.tolerances.taylor_limit,
            ));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Report {
        config: config.clone(),
        checks,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let mut config = VerifyConfig::new(SpaceSpec::exponential(0, 2.0).unwrap());
        config.taylor_limit = Some(20);
        let report = run(&config);
        let failures: Vec<_> = report.failures().collect();
        assert!(report.passed, "{failures:#?}");
        assert!(report.checks.iter().any(|c| c.name == "taylor_limit[p=0]" && c.residual < 1e-6));
    }

    #[test]
    fn stationary_suite_passes() {
        let report = run(&VerifyConfig::new(SpaceSpec::stationary()));
        assert!(report.passed, "{:#?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn perturbation_is_detected() {
        let mut config = VerifyConfig::new(SpaceSpec::exponential(0, 2.0).unwrap());
        config.levels = vec![0, 1];
        config.perturb = Some(1e-3);
        let report = run(&config);
        assert!(!report.passed);
        assert!(report.failures().any(|c| c.name == "biorthogonality"));
    }

    #[test]
    fn unknown_tolerance_is_rejected() {
        let mut t = Tolerances::default();
        assert!(t.set("spectral", 1e-6).is_ok());
        assert_eq!(t.spectral, 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("spectral", -1.0).is_err());
    }
}
