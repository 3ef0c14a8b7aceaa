//! Matrix-valued Laurent polynomials.
//!
//! A [`MatLaurent`] is the symbol `P(z) = Σ_k P_k z^k` of a finitely supported
//! sequence of `dim × dim` real matrices. The support window `[lo, hi]` is kept
//! trimmed: both end coefficients are nonzero, except for the zero symbol which
//! is stored as a single zero matrix at `k = 0`.
//!
//! [`Mask`] is the same object viewed as a map from tap index to matrix.

use crate::error::{Error, Result};
use crate::numeric::max_abs;
use crate::tolerances;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SymbolJson", try_from = "SymbolJson")]
pub struct MatLaurent {
    dim: usize,
    lo: i32,
    coeffs: Vec<DMatrix<f64>>,
}

impl MatLaurent {
    /// Builds a symbol from consecutive coefficients starting at power `lo`.
    pub fn new(dim: usize, lo: i32, coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("symbol dimension must be positive".into()));
        }
        for c in &coeffs {
            if c.nrows() != dim || c.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: c.nrows().max(c.ncols()),
                });
            }
        }
        Ok(Self::from_raw(dim, lo, coeffs))
    }

    /// Builds a symbol from `(power, coefficient)` pairs; repeated powers add up.
    pub fn from_taps<I>(dim: usize, taps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, DMatrix<f64>)>,
    {
        let mut map: BTreeMap<i32, DMatrix<f64>> = BTreeMap::new();
        for (k, m) in taps {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: m.nrows().max(m.ncols()),
                });
            }
            *map.entry(k).or_insert_with(|| DMatrix::zeros(dim, dim)) += m;
        }
        let (Some(&lo), Some(&hi)) = (map.keys().next(), map.keys().next_back()) else {
            return Ok(Self::zero(dim));
        };
        let coeffs = (lo..=hi)
            .map(|k| map.remove(&k).unwrap_or_else(|| DMatrix::zeros(dim, dim)))
            .collect();
        Self::new(dim, lo, coeffs)
    }

    fn from_raw(dim: usize, lo: i32, coeffs: Vec<DMatrix<f64>>) -> Self {
        let first = coeffs.iter().position(|c| max_abs(c) >= tolerances::TRIM);
        let last = coeffs.iter().rposition(|c| max_abs(c) >= tolerances::TRIM);
        match (first, last) {
            (Some(a), Some(b)) => Self {
                dim,
                lo: lo + a as i32,
                coeffs: coeffs[a..=b].to_vec(),
            },
            _ => Self::zero(dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            lo: 0,
            coeffs: vec![DMatrix::zeros(dim, dim)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(DMatrix::identity(dim, dim))
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        let dim = m.nrows();
        assert_eq!(dim, m.ncols(), "constant symbol needs a square matrix");
        Self::from_raw(dim, 0, vec![m])
    }

    /// `z^k I`.
    pub fn monomial(dim: usize, k: i32) -> Self {
        Self {
            dim,
            lo: k,
            coeffs: vec![DMatrix::identity(dim, dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && max_abs(&self.coeffs[0]) < tolerances::TRIM
    }

    /// Coefficient of `z^k`; zero outside the support.
    pub fn tap(&self, k: i32) -> DMatrix<f64> {
        self.tap_ref(k)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.dim, self.dim))
    }

    pub fn tap_ref(&self, k: i32) -> Option<&DMatrix<f64>> {
        if k < self.lo || k > self.hi() {
            None
        } else {
            Some(&self.coeffs[(k - self.lo) as usize])
        }
    }

    /// All coefficients of the support window, in increasing power.
    pub fn taps(&self) -> impl Iterator<Item = (i32, &DMatrix<f64>)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.lo + i as i32, c))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let coeffs = (lo..=hi).map(|k| self.tap(k) + other.tap(k)).collect();
        Ok(Self::from_raw(self.dim, lo, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_raw(
            self.dim,
            self.lo,
            self.coeffs.iter().map(|c| c * s).collect(),
        )
    }

    /// Cauchy product, preserving the order of the matrix factors.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![DMatrix::zeros(self.dim, self.dim); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Ok(Self::from_raw(self.dim, self.lo + other.lo, coeffs))
    }

    /// `P♯(z) = P^T(1/z)`: taps `k ↦ (P_{-k})^T`.
    pub fn involution(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.transpose()).collect();
        Self::from_raw(self.dim, -self.hi(), coeffs)
    }

    /// `P(-z)`: taps `k ↦ (-1)^k P_k`.
    pub fn negate_arg(&self) -> Self {
        let coeffs = self
            .taps()
            .map(|(k, c)| if k.rem_euclid(2) == 1 { -c } else { c.clone() })
            .collect();
        Self::from_raw(self.dim, self.lo, coeffs)
    }

    /// `P(z²)`: tap `k` moves to `2k`.
    pub fn upsample(&self) -> Self {
        let mut coeffs = Vec::with_capacity(2 * self.coeffs.len() - 1);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                coeffs.push(DMatrix::zeros(self.dim, self.dim));
            }
            coeffs.push(c.clone());
        }
        Self::from_raw(self.dim, 2 * self.lo, coeffs)
    }

    pub fn transpose(&self) -> Self {
        Self::from_raw(
            self.dim,
            self.lo,
            self.coeffs.iter().map(|c| c.transpose()).collect(),
        )
    }

    /// Evaluates `Σ P_k z^k` by Horner's rule.
    pub fn eval(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroArgument);
        }
        let to_c = |m: &DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
        let mut acc = to_c(self.coeffs.last().expect("nonempty coefficients"));
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * z + to_c(c);
        }
        Ok(acc * z.powi(self.lo))
    }

    /// Largest entrywise difference of the coefficients over the union of
    /// both support windows.
    pub fn max_coeff_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        Ok((lo..=hi)
            .map(|k| max_abs(&(self.tap(k) - other.tap(k))))
            .fold(0.0, f64::max))
    }

    /// Equal trimmed support windows and entrywise agreement within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self.lo == other.lo
            && self.hi() == other.hi()
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| max_abs(&(a - b)) <= tol)
    }

    /// Solves `self = R · divisor` for `R` by matching coefficients.
    ///
    /// All unknown taps of `R` are assembled into one dense least-squares
    /// system; the quotient is accepted only if the product reproduces `self`
    /// to [`tolerances::DIVISION`].
    pub fn divide_right(&self, divisor: &Self) -> Result<Self> {
        self.check_dim(divisor)?;
        if self.is_zero() {
            return Ok(Self::zero(self.dim));
        }
        let residual_of_zero = self.coeffs.iter().map(max_abs).fold(0.0, f64::max);
        if divisor.is_zero() {
            return Err(Error::NotDivisible {
                residual: residual_of_zero,
            });
        }
        let r_lo = self.lo - divisor.lo;
        let r_hi = self.hi() - divisor.hi();
        if r_hi < r_lo {
            return Err(Error::NotDivisible {
                residual: residual_of_zero,
            });
        }
        let dim = self.dim;
        let unknown_taps = (r_hi - r_lo + 1) as usize;
        let equations = self.coeffs.len();

        // Row ρ of L_k equals Σ_i (row ρ of R_i) · divisor_{k-i}; transposed,
        // every row of R solves the same block system with blocks divisor^T.
        let mut system = DMatrix::zeros(equations * dim, unknown_taps * dim);
        for e in 0..equations {
            let k = self.lo + e as i32;
            for u in 0..unknown_taps {
                let i = r_lo + u as i32;
                if let Some(block) = divisor.tap_ref(k - i) {
                    system
                        .view_mut((e * dim, u * dim), (dim, dim))
                        .copy_from(&block.transpose());
                }
            }
        }
        let mut rhs = DMatrix::zeros(equations * dim, dim);
        for (e, c) in self.coeffs.iter().enumerate() {
            rhs.view_mut((e * dim, 0), (dim, dim))
                .copy_from(&c.transpose());
        }
        let solution = system
            .svd(true, true)
            .solve(&rhs, 1e-13)
            .map_err(|msg| Error::Shape(msg.to_string()))?;
        let quotient_taps = (0..unknown_taps).map(|u| {
            (
                r_lo + u as i32,
                solution.view((u * dim, 0), (dim, dim)).transpose(),
            )
        });
        let quotient = Self::from_taps(dim, quotient_taps)?;
        let residual = quotient.mul(divisor)?.max_coeff_diff(self)?;
        if residual > tolerances::DIVISION {
            return Err(Error::NotDivisible { residual });
        }
        Ok(quotient)
    }
}

/// A finitely supported matrix coefficient sequence `k ↦ A_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SymbolJson", try_from = "SymbolJson")]
pub struct Mask {
    dim: usize,
    taps: BTreeMap<i32, DMatrix<f64>>,
}

impl Mask {
    pub fn new(dim: usize, taps: BTreeMap<i32, DMatrix<f64>>) -> Result<Self> {
        Ok(Self::from(&MatLaurent::from_taps(dim, taps)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tap(&self, k: i32) -> DMatrix<f64> {
        self.taps
            .get(&k)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.dim, self.dim))
    }

    /// Nonzero taps in increasing index.
    pub fn taps(&self) -> impl Iterator<Item = (i32, &DMatrix<f64>)> {
        self.taps.iter().map(|(&k, m)| (k, m))
    }

    pub fn symbol(&self) -> MatLaurent {
        MatLaurent::from_taps(self.dim, self.taps.clone()).expect("mask taps share one dimension")
    }
}

impl From<&MatLaurent> for Mask {
    fn from(p: &MatLaurent) -> Self {
        let taps = p
            .taps()
            .filter(|(_, c)| max_abs(c) >= tolerances::TRIM)
            .map(|(k, c)| (k, c.clone()))
            .collect();
        Self { dim: p.dim, taps }
    }
}

impl From<&Mask> for MatLaurent {
    fn from(m: &Mask) -> Self {
        m.symbol()
    }
}

#[derive(Serialize, Deserialize)]
struct TapJson {
    k: i32,
    matrix: Vec<Vec<f64>>,
}

/// `{dim, taps: [{k, matrix}]}` with `matrix` as a row-major array of rows.
#[derive(Serialize, Deserialize)]
struct SymbolJson {
    dim: usize,
    taps: Vec<TapJson>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

type Tap = (i32, DMatrix<f64>);

impl SymbolJson {
    fn into_taps(self) -> Result<(usize, Vec<Tap>)> {
        let dim = self.dim;
        let taps = self
            .taps
            .into_iter()
            .map(|t| {
                if t.matrix.len() != dim || t.matrix.iter().any(|r| r.len() != dim) {
                    return Err(Error::Shape(format!(
                        "tap {} is not a {dim}x{dim} matrix",
                        t.k
                    )));
                }
                let m = DMatrix::from_fn(dim, dim, |i, j| t.matrix[i][j]);
                Ok((t.k, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((dim, taps))
    }
}

impl From<MatLaurent> for SymbolJson {
    fn from(p: MatLaurent) -> Self {
        Self {
            dim: p.dim,
            taps: p
                .taps()
                .map(|(k, c)| TapJson {
                    k,
                    matrix: matrix_rows(c),
                })
                .collect(),
        }
    }
}

impl TryFrom<SymbolJson> for MatLaurent {
    type Error = Error;

    fn try_from(json: SymbolJson) -> Result<Self> {
        let (dim, taps) = json.into_taps()?;
        MatLaurent::from_taps(dim, taps)
    }
}

impl From<Mask> for SymbolJson {
    fn from(m: Mask) -> Self {
        Self {
            dim: m.dim,
            taps: m
                .taps
                .iter()
                .map(|(&k, c)| TapJson {
                    k,
                    matrix: matrix_rows(c),
                })
                .collect(),
        }
    }
}

impl TryFrom<SymbolJson> for Mask {
    type Error = Error;

    fn try_from(json: SymbolJson) -> Result<Self> {
        let (dim, taps) = json.into_taps()?;
        Mask::new(dim, taps.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::unit_circle;
    use nalgebra::dmatrix;

    fn t2() -> MatLaurent {
        crate::annihilator::make_taylor(2)
    }

    /// Stationary quintic Hermite symbol, taps read off the printed matrix
    /// with the (2,2) entry corrected to `-2(7z² - 16z + 7)`.
    fn quintic() -> MatLaurent {
        let am1 = dmatrix![32.0, -10.0, 1.0; 60.0, -14.0, 1.0; 0.0, 24.0, -4.0] / 64.0;
        let a0 = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.5, 0.25]);
        let a1 = dmatrix![32.0, 10.0, 1.0; -60.0, -14.0, -1.0; 0.0, -24.0, -4.0] / 64.0;
        MatLaurent::from_taps(3, [(-1, am1), (0, a0), (1, a1)]).unwrap()
    }

    #[test]
    fn additive_identity_and_inverse() {
        let t = t2();
        assert_eq!(t.add(&MatLaurent::zero(3)).unwrap(), t);
        let z = t.add(&t.neg()).unwrap();
        assert!(z.is_zero());
        assert_eq!((z.lo(), z.hi()), (0, 0));
    }

    #[test]
    fn disjoint_supports_concatenate() {
        let s = MatLaurent::monomial(2, -1)
            .add(&MatLaurent::monomial(2, 1))
            .unwrap();
        assert_eq!((s.lo(), s.hi()), (-1, 1));
        assert_eq!(s.tap(-1), DMatrix::identity(2, 2));
        assert_eq!(s.tap(0), DMatrix::zeros(2, 2));
        assert_eq!(s.tap(1), DMatrix::identity(2, 2));
    }

    #[test]
    fn multiplicative_identity() {
        let q = quintic();
        assert_eq!(MatLaurent::identity(3).mul(&q).unwrap(), q);
        let p = MatLaurent::monomial(3, 1)
            .mul(&MatLaurent::monomial(3, -1))
            .unwrap();
        assert_eq!(p, MatLaurent::identity(3));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = MatLaurent::identity(2).mul(&MatLaurent::identity(3));
        assert!(matches!(
            err,
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
        assert!(MatLaurent::identity(2).add(&MatLaurent::identity(3)).is_err());
    }

    #[test]
    fn product_of_annihilator_with_reflection() {
        // H(-z) H(z) = -z^{-2} I + H0² for H(z) = z^{-1} I + H0
        let h = t2();
        let h0 = h.tap(0);
        let prod = h.negate_arg().mul(&h).unwrap();
        let expected = MatLaurent::monomial(3, -2)
            .neg()
            .add(&MatLaurent::constant(&h0 * &h0))
            .unwrap();
        assert!(prod.approx_eq(&expected, 1e-15));
        assert_eq!(prod.tap(-1), DMatrix::zeros(3, 3));
    }

    #[test]
    fn involution_examples() {
        let z = MatLaurent::monomial(3, 1);
        assert_eq!(z.involution(), MatLaurent::monomial(3, -1));
        let q = quintic();
        assert_eq!(q.involution().involution(), q);
        // tap -1 of A♯ is A_1^T; entry (2,1) in 1-based indexing
        assert_eq!(q.involution().tap(-1)[(1, 0)], 10.0 / 64.0);
    }

    #[test]
    fn negate_arg_examples() {
        assert_eq!(MatLaurent::identity(2).negate_arg(), MatLaurent::identity(2));
        assert_eq!(
            MatLaurent::monomial(2, 1).negate_arg(),
            MatLaurent::monomial(2, 1).neg()
        );
        let q = quintic();
        assert_eq!(q.negate_arg().negate_arg(), q);
    }

    #[test]
    fn upsample_examples() {
        assert_eq!(MatLaurent::identity(3).upsample(), MatLaurent::identity(3));
        let h = t2();
        let up = h.upsample();
        assert_eq!((up.lo(), up.hi()), (-2, 0));
        assert_eq!(up.tap(-2), DMatrix::identity(3, 3));
        assert_eq!(up.tap(-1), DMatrix::zeros(3, 3));
        assert_eq!(up.tap(0), h.tap(0));
        let q = quintic();
        for z in unit_circle(16) {
            let lhs = q.upsample().eval(z).unwrap();
            let rhs = q.eval(z * z).unwrap();
            assert!(crate::numeric::max_abs_complex(&(lhs - rhs)) < 1e-14);
        }
    }

    #[test]
    fn eval_examples() {
        let one = Complex64::new(1.0, 0.0);
        let i = MatLaurent::identity(3).eval(Complex64::new(0.3, 0.4)).unwrap();
        assert_eq!(i, DMatrix::identity(3, 3).map(|x: f64| Complex64::new(x, 0.0)));

        let a1 = quintic().eval(one).unwrap().map(|c| c.re * 64.0);
        let expected = dmatrix![128.0, 0.0, 2.0; 0.0, 4.0, 0.0; 0.0, 0.0, 8.0];
        assert!(max_abs(&(a1 - expected)) < 1e-12);

        let t1 = t2().eval(one).unwrap().map(|c| c.re);
        let expected = dmatrix![0.0, -1.0, -0.5; 0.0, 0.0, -1.0; 0.0, 0.0, 0.0];
        assert!(max_abs(&(t1 - expected)) < 1e-15);

        assert!(matches!(
            t2().eval(Complex64::new(0.0, 0.0)),
            Err(Error::ZeroArgument)
        ));
    }

    #[test]
    fn divide_right_examples() {
        let h2 = t2().upsample();
        let q = h2.divide_right(&h2).unwrap();
        assert!(q.approx_eq(&MatLaurent::identity(3), 1e-12));

        let shifted = MatLaurent::monomial(3, 1).mul(&h2).unwrap();
        let q = shifted.divide_right(&h2).unwrap();
        assert!(q.approx_eq(&MatLaurent::monomial(3, 1), 1e-12));

        let l = t2().mul(&quintic()).unwrap();
        let r = l.divide_right(&h2).unwrap();
        let expected = MatLaurent::from_taps(
            3,
            [
                (0, dmatrix![32.0, -10.0, 1.0; 60.0, -14.0, 1.0; 0.0, 24.0, -4.0] / 64.0),
                (1, dmatrix![-28.0, 12.0, 0.0; -60.0, 22.0, 3.0; 0.0, -24.0, 20.0] / 64.0),
            ],
        )
        .unwrap();
        assert!(r.approx_eq(&expected, 1e-12), "{r:?}");
    }

    #[test]
    fn indivisible_symbol_is_reported() {
        let h2 = t2().upsample();
        let mut bad = quintic();
        bad = bad
            .add(&MatLaurent::from_taps(3, [(1, DMatrix::from_element(3, 3, 1e-3))]).unwrap())
            .unwrap();
        let l = t2().mul(&bad).unwrap();
        assert!(matches!(
            l.divide_right(&h2),
            Err(Error::NotDivisible { .. })
        ));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let q = quintic().scale(std::f64::consts::PI).add(&t2()).unwrap();
        let text = serde_json::to_string(&q).unwrap();
        let back: MatLaurent = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);
        let mask = Mask::from(&q);
        let text = serde_json::to_string(&mask).unwrap();
        let back: Mask = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mask);
        assert_eq!(back.symbol(), q);
    }

    #[test]
    fn json_layout() {
        let text = serde_json::to_string(&MatLaurent::monomial(2, -1)).unwrap();
        assert_eq!(text, r#"{"dim":2,"taps":[{"k":-1,"matrix":[[1.0,0.0],[0.0,1.0]]}]}"#);
        let bad = r#"{"dim":2,"taps":[{"k":0,"matrix":[[1.0],[0.0,1.0]]}]}"#;
        assert!(serde_json::from_str::<MatLaurent>(bad).is_err());
    }
}
