//! Biorthogonal filter banks built from interpolatory Hermite masks.
//!
//! For a mask `A` with `A(z) + A(-z) = 2D` the bank is
//!
//! ```text
//! A (synthesis low-pass)   B(z) = zI
//! Ã(z) = D⁻¹               B̃(z) = z·D⁻¹·A♯(-z)
//! ```
//!
//! so the analysis low-pass just rescales the even samples and the analysis
//! high-pass measures how far the odd samples are from their prediction.

mod factor;
mod transform;

pub use factor::{compute_r, compute_s, factorize, factorize_level, s_formula_residual, FactorizationPair};
pub use transform::{analyze, synthesize, BankFamily, CompressionReport, Decomposition};

use crate::annihilator::SpaceSpec;
use crate::error::{Error, Result};
use crate::laurent::MatLaurent;
use crate::numeric::{max_abs_complex, unit_circle};
use crate::signal::{sample_function, Function};
use crate::subdivision::{inverse_dilation, LevelMask};
use crate::tolerances;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    spec: SpaceSpec,
    level: u32,
    #[serde(rename = "A")]
    a: MatLaurent,
    #[serde(rename = "B")]
    b: MatLaurent,
    #[serde(rename = "A_tilde")]
    a_tilde: MatLaurent,
    #[serde(rename = "B_tilde")]
    b_tilde: MatLaurent,
}

impl FilterBank {
    /// Completes an interpolatory mask to a biorthogonal bank.
    pub fn build(mask: &LevelMask) -> Result<Self> {
        let residual = mask.interpolatory_residual();
        if residual > tolerances::INTERPOLATORY {
            return Err(Error::NotInterpolatory { residual });
        }
        let spec = mask.spec();
        let dim = spec.dim();
        let a = mask.symbol().clone();
        let d_inv = MatLaurent::constant(inverse_dilation(spec.d()));
        let b_tilde = MatLaurent::monomial(dim, 1)
            .mul(&d_inv)?
            .mul(&a.involution().negate_arg())?;
        let bank = Self {
            spec,
            level: mask.level(),
            a,
            b: MatLaurent::monomial(dim, 1),
            a_tilde: d_inv,
            b_tilde,
        };
        let residual = bank.biorthogonality_residual();
        if residual > tolerances::BIORTHOGONALITY {
            return Err(Error::NotBiorthogonal { residual });
        }
        Ok(bank)
    }

    /// Assembles a bank from given symbols without checking biorthogonality.
    pub fn from_parts(
        spec: SpaceSpec,
        level: u32,
        a: MatLaurent,
        b: MatLaurent,
        a_tilde: MatLaurent,
        b_tilde: MatLaurent,
    ) -> Result<Self> {
        for s in [&a, &b, &a_tilde, &b_tilde] {
            if s.dim() != spec.dim() {
                return Err(Error::DimensionMismatch {
                    left: spec.dim(),
                    right: s.dim(),
                });
            }
        }
        Ok(Self {
            spec,
            level,
            a,
            b,
            a_tilde,
            b_tilde,
        })
    }

    pub fn spec(&self) -> SpaceSpec {
        self.spec
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn a(&self) -> &MatLaurent {
        &self.a
    }

    pub fn b(&self) -> &MatLaurent {
        &self.b
    }

    pub fn a_tilde(&self) -> &MatLaurent {
        &self.a_tilde
    }

    pub fn b_tilde(&self) -> &MatLaurent {
        &self.b_tilde
    }

    /// Copy of the bank with entry `(0, 0)` of `A₁` shifted by `eps`; the
    /// analysis filters are left as they were.
    pub fn with_perturbed_lowpass(&self, eps: f64) -> Self {
        let dim = self.a.dim();
        let mut bump = DMatrix::zeros(dim, dim);
        bump[(0, 0)] = eps;
        // repeated powers add up
        let taps = self.a.taps().map(|(k, m)| (k, m.clone())).chain([(1, bump)]);
        let a = MatLaurent::from_taps(dim, taps).expect("same dimension");
        Self { a, ..self.clone() }
    }

    /// Largest deviation from the four perfect-reconstruction identities
    ///
    /// ```text
    /// Ã♯(z)A(z) + Ã♯(-z)A(-z) = 2I     Ã♯(z)B(z) + Ã♯(-z)B(-z) = 0
    /// B̃♯(z)A(z) + B̃♯(-z)A(-z) = 0     B̃♯(z)B(z) + B̃♯(-z)B(-z) = 2I
    /// ```
    ///
    /// over unit-circle samples.
    pub fn biorthogonality_residual(&self) -> f64 {
        let dim = self.spec.dim();
        let two = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(2.0, 0.0);
        let zero = DMatrix::<Complex64>::zeros(dim, dim);
        let at_dual = self.a_tilde.involution();
        let bt_dual = self.b_tilde.involution();
        let eval = |p: &MatLaurent, z: Complex64| p.eval(z).expect("unit-circle points are nonzero");
        unit_circle(tolerances::CIRCLE_SAMPLES)
            .map(|z| {
                let pairs = [
                    (&at_dual, &self.a, &two),
                    (&at_dual, &self.b, &zero),
                    (&bt_dual, &self.a, &zero),
                    (&bt_dual, &self.b, &two),
                ];
                pairs
                    .iter()
                    .map(|(dual, primal, target)| {
                        let s = eval(dual, z) * eval(primal, z) + eval(dual, -z) * eval(primal, -z);
                        max_abs_complex(&(s - *target))
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest detail produced by the analysis high-pass on exact level-`n+1`
    /// samples of `f` over the nodes `-4..=4`.
    pub fn vanishing_moment_residual(&self, f: &Function) -> Result<f64> {
        let fine = sample_function(f, self.spec.d(), self.level + 1, -4..5)?;
        let taps: Vec<(i32, DMatrix<f64>)> = self.b_tilde.taps().map(|(t, m)| (t, m.transpose())).collect();
        let (lo, hi) = (self.b_tilde.lo() as i64, self.b_tilde.hi() as i64);
        let (first, last) = (fine.start(), fine.start() + fine.len() as i64 - 1);
        let mut worst = 0.0_f64;
        // every k whose stencil 2k + lo ..= 2k + hi lies inside the window
        let k_min = (first - lo).div_euclid(2) + i64::from((first - lo).rem_euclid(2) != 0);
        let k_max = (last - hi).div_euclid(2);
        for k in k_min..=k_max {
            let mut d = nalgebra::DVector::zeros(self.spec.dim());
            for (t, m) in &taps {
                d += m * &fine.data()[(2 * k + *t as i64 - first) as usize];
            }
            worst = worst.max(d.amax());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdivision::make_mask;
    use nalgebra::dmatrix;

    fn p0(lambda: f64) -> SpaceSpec {
        SpaceSpec::exponential(0, lambda).unwrap()
    }

    fn bank(spec: SpaceSpec, n: u32) -> FilterBank {
        FilterBank::build(&make_mask(spec, n).unwrap()).unwrap()
    }

    #[test]
    fn stationary_high_pass_matches_print() {
        let fb = bank(SpaceSpec::stationary(), 0);
        // (1/(16z²))[[−8(z−1)², −5(z²−1), −z²−1], [15(z²−1), 7z²+16z+7, z²−1], [0, 12(z²−1), 4(z²+4z+1)]]
        let printed = MatLaurent::from_taps(
            3,
            [
                (-2, dmatrix![-8.0, 5.0, -1.0; -15.0, 7.0, -1.0; 0.0, -12.0, 4.0] / 16.0),
                (-1, dmatrix![16.0, 0.0, 0.0; 0.0, 16.0, 0.0; 0.0, 0.0, 16.0] / 16.0),
                (0, dmatrix![-8.0, -5.0, -1.0; 15.0, 7.0, 1.0; 0.0, 12.0, 4.0] / 16.0),
            ],
        )
        .unwrap();
        assert!(fb.b_tilde().involution().approx_eq(&printed, 1e-12));
        assert_eq!((fb.b_tilde().lo(), fb.b_tilde().hi()), (0, 2));
    }

    #[test]
    fn low_pass_duals() {
        let fb = bank(p0(2.0), 1);
        assert_eq!(fb.a_tilde().tap(0), dmatrix![1.0, 0.0, 0.0; 0.0, 2.0, 0.0; 0.0, 0.0, 4.0]);
        assert_eq!((fb.a_tilde().lo(), fb.a_tilde().hi()), (0, 0));
        assert_eq!(fb.b(), &MatLaurent::monomial(3, 1));
    }

    #[test]
    fn biorthogonal_examples() {
        assert!(bank(SpaceSpec::stationary(), 0).biorthogonality_residual() < 1e-12);
        assert!(bank(p0(2.0), 0).biorthogonality_residual() < 1e-12);
        let broken = bank(p0(2.0), 0).with_perturbed_lowpass(1e-3);
        assert!(broken.biorthogonality_residual() >= 1e-4);
    }

    #[test]
    fn non_interpolatory_mask_is_rejected() {
        let mask = make_mask(p0(2.0), 0).unwrap();
        let mut taps: Vec<_> = mask.symbol().taps().map(|(k, m)| (k, m.clone())).collect();
        taps.push((2, DMatrix::identity(3, 3) * 1e-3));
        let bad = LevelMask::from_symbol(p0(2.0), 0, MatLaurent::from_taps(3, taps).unwrap()).unwrap();
        assert!(matches!(FilterBank::build(&bad), Err(Error::NotInterpolatory { .. })));
    }

    #[test]
    fn vanishing_moments() {
        for n in 0..4 {
            let fb = bank(p0(2.0), n);
            assert!(fb.vanishing_moment_residual(&Function::Monomial(0)).unwrap() < 1e-12);
            assert!(fb.vanishing_moment_residual(&Function::Exp(2.0)).unwrap() < 1e-10);
            assert!(fb.vanishing_moment_residual(&Function::Exp(-2.0)).unwrap() < 1e-10);
        }
        // outside the reproduced space the details do not vanish
        let fb = bank(p0(2.0), 0);
        assert!(fb.vanishing_moment_residual(&Function::Monomial(4)).unwrap() > 1e-6);
        assert!(fb.vanishing_moment_residual(&Function::Exp(3.0)).unwrap() > 1e-6);
    }

    #[test]
    fn json_round_trip() {
        let fb = bank(p0(4.0), 2);
        let text = serde_json::to_string(&fb).unwrap();
        assert!(text.contains(r#""B_tilde":{"dim":3"#));
        let back: FilterBank = serde_json::from_str(&text).unwrap();
        assert_eq!(back, fb);
    }
}
