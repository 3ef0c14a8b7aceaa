//! Taylor operators and level-dependent cancellation operators.
//!
//! A cancellation operator `H(z) = z⁻¹I + H₀` maps the v-coordinate samples of
//! every `f ∈ V_{p,Λ}` to zero. At level `n` it is built from the frequency
//! `μ = 2^{-n}λ`, and it tends to the Taylor operator `T_d` as `μ → 0`.

use crate::error::{Error, Result};
use crate::laurent::MatLaurent;
use crate::numeric::{self, max_abs};
use crate::signal::{Function, HermiteSignal};
use crate::subdivision::inverse_dilation;
use crate::tolerances;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `V_{p,Λ} = span{1, x, …, x^p}` plus `e^{±λx}` when `lambda` is present.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct SpaceSpec {
    pub p: usize,
    pub lambda: Option<f64>,
}

#[derive(Deserialize)]
struct RawSpec {
    p: usize,
    lambda: Option<f64>,
}

impl TryFrom<RawSpec> for SpaceSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        match raw.lambda {
            Some(l) => SpaceSpec::exponential(raw.p, l),
            None => Ok(SpaceSpec::polynomial(raw.p)),
        }
    }
}

impl SpaceSpec {
    pub fn polynomial(p: usize) -> Self {
        Self { p, lambda: None }
    }

    pub fn exponential(p: usize, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidFrequency(lambda));
        }
        Ok(Self {
            p,
            lambda: Some(lambda),
        })
    }

    /// The stationary quintic Hermite setting, annihilated by `T_2`.
    pub fn stationary() -> Self {
        Self::polynomial(2)
    }

    /// Number of exponential pairs.
    pub fn r(&self) -> usize {
        usize::from(self.lambda.is_some())
    }

    /// Order `d = p + 2r`.
    pub fn d(&self) -> usize {
        self.p + 2 * self.r()
    }

    /// Size of the node vectors, `d + 1`.
    pub fn dim(&self) -> usize {
        self.d() + 1
    }

    /// `2^{-n}λ`.
    pub fn frequency_at(&self, level: u32) -> Option<f64> {
        self.lambda.map(|l| l * 0.5f64.powi(level as i32))
    }

    /// A basis of `V_{p,Λ}`.
    pub fn basis(&self) -> Vec<Function> {
        let mut basis: Vec<Function> = (0..=self.p as u32).map(Function::Monomial).collect();
        if let Some(l) = self.lambda {
            basis.push(Function::Exp(l));
            basis.push(Function::Exp(-l));
        }
        basis
    }
}

impl std::fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.lambda {
            Some(l) => write!(f, "p={} lambda={l} d={}", self.p, self.d()),
            None => write!(f, "p={} polynomial d={}", self.p, self.d()),
        }
    }
}

/// Complete Taylor operator of order `d`: diagonal `z⁻¹ - 1`, entry `(i, j)`
/// above the diagonal `-1/(j-i)!`.
pub fn make_taylor(d: usize) -> MatLaurent {
    let dim = d + 1;
    let h0 = DMatrix::from_fn(dim, dim, |i, j| {
        if j >= i {
            -1.0 / numeric::factorial((j - i) as u32)
        } else {
            0.0
        }
    });
    MatLaurent::from_taps(dim, [(-1, DMatrix::identity(dim, dim)), (0, h0)])
        .expect("taps built with matching dimensions")
}

/// Constant tap of the `p = 0` operator for `span{1, e^{±μx}}`.
fn exponential_block(mu: f64) -> DMatrix<f64> {
    let c = mu.cosh();
    let s1 = numeric::neg_sinhc(mu);
    let c2 = numeric::one_minus_cosh_over_sq(mu);
    DMatrix::from_row_slice(3, 3, &[-1.0, s1, c2, 0.0, -c, s1, 0.0, -mu * mu.sinh(), -c])
}

fn constant_tap(p: usize, mu: f64) -> Result<DMatrix<f64>> {
    match p {
        0 => Ok(exponential_block(mu)),
        1 => {
            let mut h0 = DMatrix::zeros(4, 4);
            h0.view_mut((1, 1), (3, 3)).copy_from(&exponential_block(mu));
            h0[(0, 0)] = -1.0;
            h0[(0, 1)] = -1.0;
            h0[(0, 2)] = numeric::one_minus_cosh_over_sq(mu);
            h0[(0, 3)] = numeric::mu_minus_sinh_over_cube(mu);
            Ok(h0)
        }
        _ => Err(Error::Unsupported(format!(
            "exponential cancellation operators are implemented for p in {{0, 1}}, got p={p}"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annihilator {
    spec: SpaceSpec,
    level: u32,
    #[serde(flatten)]
    symbol: MatLaurent,
}

impl Annihilator {
    pub fn new(spec: SpaceSpec, level: u32) -> Result<Self> {
        let symbol = match spec.frequency_at(level) {
            None => make_taylor(spec.d()),
            Some(mu) => {
                // validate the family even when the Taylor shortcut applies
                let h0 = constant_tap(spec.p, mu)?;
                if mu < tolerances::TAYLOR_CUTOFF {
                    make_taylor(spec.d())
                } else {
                    let dim = spec.dim();
                    MatLaurent::from_taps(dim, [(-1, DMatrix::identity(dim, dim)), (0, h0)])?
                }
            }
        };
        Ok(Self {
            spec,
            level,
            symbol,
        })
    }

    pub fn spec(&self) -> SpaceSpec {
        self.spec
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn symbol(&self) -> &MatLaurent {
        &self.symbol
    }

    pub fn h0(&self) -> DMatrix<f64> {
        self.symbol.tap(0)
    }

    fn check_signal(&self, signal: &HermiteSignal) -> Result<()> {
        if signal.level() != self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                actual: signal.level(),
            });
        }
        if signal.dim() != self.symbol.dim() {
            return Err(Error::DimensionMismatch {
                left: self.symbol.dim(),
                right: signal.dim(),
            });
        }
        Ok(())
    }

    /// `(Hv)_j = v_{j+1} + H₀ v_j` with periodic wraparound.
    pub fn apply(&self, signal: &HermiteSignal) -> Result<HermiteSignal> {
        self.check_signal(signal)?;
        let h0 = self.h0();
        let v = signal.data();
        let n = v.len();
        let out = (0..n).map(|j| &v[(j + 1) % n] + &h0 * &v[j]).collect();
        HermiteSignal::new(self.level, signal.start(), out)
    }

    /// Same stencil without wraparound; the output has one node fewer.
    pub fn apply_open(&self, signal: &HermiteSignal) -> Result<Vec<DVector<f64>>> {
        self.check_signal(signal)?;
        let h0 = self.h0();
        Ok(signal.data().windows(2).map(|w| &w[1] + &h0 * &w[0]).collect())
    }

    /// `max ‖H(e^{∓μ})·(1, ±μ, …, (±μ)^d)‖∞`.
    pub fn eigvec_residual(&self) -> Result<f64> {
        let mu = self
            .spec
            .frequency_at(self.level)
            .ok_or_else(|| Error::Unsupported("eigenvector condition needs a frequency".into()))?;
        let dim = self.symbol.dim();
        let mut worst = 0.0_f64;
        for sign in [1.0, -1.0] {
            let z = Complex64::new((-sign * mu).exp(), 0.0);
            let h = self.symbol.eval(z)?;
            let v = DVector::from_iterator(dim, (0..dim).map(|i| Complex64::new((sign * mu).powi(i as i32), 0.0)));
            worst = worst.max((h * v).iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
        Ok(worst)
    }

    /// Largest entrywise distance of `H₀` from the constant tap of `T_d`.
    pub fn taylor_distance(&self) -> f64 {
        max_abs(&(self.h0() - make_taylor(self.spec.d()).tap(0)))
    }
}

/// Residual of `H^{[n]}(z²)D⁻¹ = −D⁻¹H^{[n+1]}(−z)H^{[n+1]}(z)`.
pub fn two_level_identity_residual(spec: SpaceSpec, level: u32) -> Result<f64> {
    let coarse = Annihilator::new(spec, level)?;
    let fine = Annihilator::new(spec, level + 1)?;
    let d_inv = MatLaurent::constant(inverse_dilation(spec.d()));
    let lhs = coarse.symbol().upsample().mul(&d_inv)?;
    let product = fine.symbol().negate_arg().mul(fine.symbol())?;
    let rhs = d_inv.mul(&product)?.neg();
    lhs.max_coeff_diff(&rhs)
}
