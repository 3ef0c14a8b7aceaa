//! Factorizations through the cancellation operator:
//! `H^{[n+1]}(z)A(z) = R(z)H^{[n]}(z²)` and `B̃♯(z) = S(z)H^{[n+1]}(z)`.

use super::FilterBank;
use crate::annihilator::Annihilator;
use crate::error::{Error, Result};
use crate::laurent::MatLaurent;
use crate::numeric::{max_abs_complex, unit_circle};
use crate::subdivision::{inverse_dilation, make_mask, LevelMask};
use crate::tolerances;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationPair {
    pub r: MatLaurent,
    pub s: MatLaurent,
    pub r_residual: f64,
    pub s_residual: f64,
}

fn expect_level(ann: &Annihilator, level: u32) -> Result<()> {
    if ann.level() != level {
        return Err(Error::LevelMismatch {
            expected: level,
            actual: ann.level(),
        });
    }
    Ok(())
}

/// Quotient `R` of `H^{[n+1]}·A` by `H^{[n]}(z²)`.
pub fn compute_r(mask: &LevelMask, ann_n: &Annihilator, ann_n1: &Annihilator) -> Result<MatLaurent> {
    expect_level(ann_n, mask.level())?;
    expect_level(ann_n1, mask.level() + 1)?;
    ann_n1
        .symbol()
        .mul(mask.symbol())?
        .divide_right(&ann_n.symbol().upsample())
}

/// Quotient `S` of `B̃♯` by `H^{[n+1]}`.
pub fn compute_s(fb: &FilterBank, ann_n1: &Annihilator) -> Result<MatLaurent> {
    expect_level(ann_n1, fb.level() + 1)?;
    fb.b_tilde().involution().divide_right(ann_n1.symbol())
}

/// Compares `S` with `−z⁻¹H(−z)⁻¹R(−z)D⁻¹H(−z)` on unit-circle samples,
/// `H = H^{[n+1]}`.
pub fn s_formula_residual(r: &MatLaurent, s: &MatLaurent, ann_n1: &Annihilator) -> Result<f64> {
    let d_inv = inverse_dilation(ann_n1.spec().d()).map(|x| Complex64::new(x, 0.0));
    let mut worst = 0.0_f64;
    for z in unit_circle(tolerances::CIRCLE_SAMPLES) {
        let h = ann_n1.symbol().eval(-z)?;
        let h_inv = h.clone().try_inverse().ok_or_else(|| {
            Error::Shape(format!("H(-z) is singular at z = {z}"))
        })?;
        let rhs: DMatrix<Complex64> = h_inv * r.eval(-z)? * &d_inv * h * (-z.inv());
        worst = worst.max(max_abs_complex(&(s.eval(z)? - rhs)));
    }
    Ok(worst)
}

/// Both quotients for the level-`n` mask of `spec` with their residuals.
pub fn factorize(mask: &LevelMask) -> Result<FactorizationPair> {
    let spec = mask.spec();
    let ann_n = Annihilator::new(spec, mask.level())?;
    let ann_n1 = Annihilator::new(spec, mask.level() + 1)?;
    let fb = FilterBank::build(mask)?;
    let r = compute_r(mask, &ann_n, &ann_n1)?;
    let s = compute_s(&fb, &ann_n1)?;
    let r_residual = r
        .mul(&ann_n.symbol().upsample())?
        .max_coeff_diff(&ann_n1.symbol().mul(mask.symbol())?)?;
    let s_residual = s.mul(ann_n1.symbol())?.max_coeff_diff(&fb.b_tilde().involution())?;
    Ok(FactorizationPair {
        r,
        s,
        r_residual,
        s_residual,
    })
}

/// Convenience wrapper building the mask first.
pub fn factorize_level(spec: crate::annihilator::SpaceSpec, level: u32) -> Result<FactorizationPair> {
    factorize(&make_mask(spec, level)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annihilator::{make_taylor, SpaceSpec};
    use nalgebra::dmatrix;

    fn p0(lambda: f64) -> SpaceSpec {
        SpaceSpec::exponential(0, lambda).unwrap()
    }

    fn printed_r() -> MatLaurent {
        MatLaurent::from_taps(
            3,
            [
                (0, dmatrix![32.0, -10.0, 1.0; 60.0, -14.0, 1.0; 0.0, 24.0, -4.0] / 64.0),
                (1, dmatrix![-28.0, 12.0, 0.0; -60.0, 22.0, 3.0; 0.0, -24.0, 20.0] / 64.0),
            ],
        )
        .unwrap()
    }

    /// `(1/(32z))[[16(z−1), 2(5−3z), −2], [−30(z+1), 2(8z+7), −3z−2], [0, −24(z+1), 8(2z+1)]]`
    fn printed_s() -> MatLaurent {
        MatLaurent::from_taps(
            3,
            [
                (-1, dmatrix![-16.0, 10.0, -2.0; -30.0, 14.0, -2.0; 0.0, -24.0, 8.0] / 32.0),
                (0, dmatrix![16.0, -6.0, 0.0; -30.0, 16.0, -3.0; 0.0, -24.0, 16.0] / 32.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn stationary_quotients_match_print() {
        let pair = factorize_level(SpaceSpec::stationary(), 0).unwrap();
        assert!(pair.r.approx_eq(&printed_r(), 1e-12), "{:?}", pair.r);
        assert!(pair.s.approx_eq(&printed_s(), 1e-12), "{:?}", pair.s);
        assert!(pair.r_residual < 1e-12 && pair.s_residual < 1e-12);
    }

    #[test]
    fn supports() {
        let pair = factorize_level(p0(2.0), 0).unwrap();
        assert_eq!((pair.r.lo(), pair.r.hi()), (0, 1));
        assert_eq!((pair.s.lo(), pair.s.hi()), (-1, 0));
        assert!(pair.r_residual < 1e-10 && pair.s_residual < 1e-10);
    }

    #[test]
    fn small_frequency_quotients_approach_print() {
        let pair = factorize_level(p0(1e-5), 0).unwrap();
        assert!(pair.r.approx_eq(&printed_r(), 1e-8));
        assert!(pair.s.approx_eq(&printed_s(), 1e-8));
    }

    #[test]
    fn closed_formula_agrees() {
        for spec in [SpaceSpec::stationary(), p0(2.0), p0(4.0)] {
            for n in 0..3 {
                let mask = make_mask(spec, n).unwrap();
                let pair = factorize(&mask).unwrap();
                let ann = Annihilator::new(spec, n + 1).unwrap();
                assert!(s_formula_residual(&pair.r, &pair.s, &ann).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn perturbed_mask_is_not_divisible() {
        let mask = make_mask(p0(2.0), 0).unwrap();
        let mut bump = DMatrix::zeros(3, 3);
        bump[(1, 0)] = 1e-3;
        let taps = mask.symbol().taps().map(|(k, m)| (k, m.clone())).chain([(1, bump)]);
        let bad = LevelMask::from_symbol(p0(2.0), 0, MatLaurent::from_taps(3, taps).unwrap()).unwrap();
        let ann_n = Annihilator::new(p0(2.0), 0).unwrap();
        let ann_n1 = Annihilator::new(p0(2.0), 1).unwrap();
        assert!(matches!(compute_r(&bad, &ann_n, &ann_n1), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn wrong_levels_are_rejected() {
        let mask = make_mask(p0(2.0), 1).unwrap();
        let ann = Annihilator::new(p0(2.0), 1).unwrap();
        assert!(matches!(compute_r(&mask, &ann, &ann), Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn scalar_haar_like_case() {
        // d = 0: A(z) = z⁻¹/2 + 1 + z/2 is the hat function mask
        let a = MatLaurent::from_taps(1, [(-1, dmatrix![0.5]), (0, dmatrix![1.0]), (1, dmatrix![0.5])]).unwrap();
        let spec = SpaceSpec::polynomial(0);
        let mask = LevelMask::from_symbol(spec, 0, a).unwrap();
        let fb = FilterBank::build(&mask).unwrap();
        let ann = Annihilator::new(spec, 1).unwrap();
        assert_eq!(ann.symbol(), &make_taylor(0));
        let s = compute_s(&fb, &ann).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.hi() - s.lo() <= 1);
    }
}
