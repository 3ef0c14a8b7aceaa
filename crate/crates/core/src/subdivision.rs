//! Interpolatory Hermite subdivision reproducing `span{1, x, x², x³, e^{±λx}}`.
//!
//! The level-`n` mask has taps `{-1, 0, 1}` with `A₀ = D`. The odd taps come
//! from evaluating the local Hermite interpolant on `[0, 1]` at `t = 1/2`,
//! with frequency `μ = 2^{-n}λ`. Without a frequency the same construction
//! gives the stationary quintic Hermite scheme.

use crate::annihilator::SpaceSpec;
use crate::error::{Error, Result};
use crate::laurent::{Mask, MatLaurent};
use crate::numeric::{self, max_abs_complex, unit_circle};
use crate::signal::{Function, HermiteSignal};
use crate::tolerances;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `D = diag(1, 1/2, …, 1/2^d)`.
pub fn dilation(d: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(d + 1, (0..=d).map(|j| 0.5f64.powi(j as i32))))
}

/// `D⁻¹ = diag(1, 2, …, 2^d)`.
pub fn inverse_dilation(d: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(d + 1, (0..=d).map(|j| 2f64.powi(j as i32))))
}

fn check_family(spec: SpaceSpec) -> Result<()> {
    match (spec.p, spec.lambda) {
        (0, Some(_)) | (2, None) => Ok(()),
        _ => Err(Error::Unsupported(format!(
            "subdivision masks are built for p=0 with one frequency or the stationary case, got {spec}"
        ))),
    }
}

/// `{1, t, t², t³, G₄, G₅}` with `G_k(t) = k!·E_k(μt)/μ^k`, where `E_k` is the
/// Taylor tail of cosh or sinh from order `k`. For `μ > 0` this spans the same
/// space as `{1, t, t², t³, e^{±μt}}`; at `μ = 0` it is the quintic basis.
struct LocalBasis {
    mu: f64,
}

impl LocalBasis {
    fn g(&self, k: u32, t: f64) -> f64 {
        numeric::factorial(k) * t.powi(k as i32) * numeric::tail_ratio(k, self.mu * t)
    }

    /// Value, first and second derivative of every basis function at `t`.
    fn jets(&self, t: f64) -> [[f64; 3]; 6] {
        let mut out = [[0.0; 3]; 6];
        for (m, jet) in out.iter_mut().enumerate().take(4) {
            let m = m as i32;
            *jet = [
                t.powi(m),
                if m >= 1 { m as f64 * t.powi(m - 1) } else { 0.0 },
                if m >= 2 { (m * (m - 1)) as f64 * t.powi(m - 2) } else { 0.0 },
            ];
        }
        out[4] = [self.g(4, t), 4.0 * self.g(3, t), 12.0 * self.g(2, t)];
        out[5] = [self.g(5, t), 5.0 * self.g(4, t), 20.0 * self.g(3, t)];
        out
    }

    /// Columns are basis functions, rows the jets at `t = 0` then `t = 1`.
    fn endpoint_matrix(&self) -> DMatrix<f64> {
        let (j0, j1) = (self.jets(0.0), self.jets(1.0));
        DMatrix::from_fn(6, 6, |row, col| if row < 3 { j0[col][row] } else { j1[col][row - 3] })
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn local_basis(spec: SpaceSpec, level: u32) -> Result<(LocalBasis, DMatrix<f64>)> {
    check_family(spec)?;
    let basis = LocalBasis {
        mu: spec.frequency_at(level).unwrap_or(0.0),
    };
    let m = basis.endpoint_matrix();
    let condition = condition_number(&m);
    if condition > tolerances::MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    Ok((basis, m))
}

/// A subdivision mask tagged with the level and space it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMask {
    spec: SpaceSpec,
    level: u32,
    #[serde(flatten)]
    symbol: MatLaurent,
}

impl LevelMask {
    /// Wraps an arbitrary symbol; only the dimension is checked.
    pub fn from_symbol(spec: SpaceSpec, level: u32, symbol: MatLaurent) -> Result<Self> {
        if symbol.dim() != spec.dim() {
            return Err(Error::DimensionMismatch {
                left: spec.dim(),
                right: symbol.dim(),
            });
        }
        Ok(Self { spec, level, symbol })
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

    pub fn tap(&self, k: i32) -> DMatrix<f64> {
        self.symbol.tap(k)
    }

    pub fn mask(&self) -> Mask {
        Mask::from(&self.symbol)
    }

    /// `max |A(z) + A(-z) - 2D|` over unit-circle samples.
    pub fn interpolatory_residual(&self) -> f64 {
        let two_d = (dilation(self.spec.d()) * 2.0).map(|x| Complex64::new(x, 0.0));
        unit_circle(tolerances::CIRCLE_SAMPLES)
            .map(|z| {
                let sum = self.symbol.eval(z).expect("nonzero") + self.symbol.eval(-z).expect("nonzero");
                max_abs_complex(&(sum - &two_d))
            })
            .fold(0.0, f64::max)
    }
}

/// Solves for the odd taps by requiring that the mask maps the level-`n`
/// samples of every local basis function to its level-`n+1` samples.
pub fn derive_mask_from_interpolation(spec: SpaceSpec, level: u32) -> Result<LevelMask> {
    let (basis, m) = local_basis(spec, level)?;
    let mid = basis.jets(0.5);
    // X·M = Y with X = [A₁ | A₋₁] and Y the midpoint jets in fine v-coordinates
    let y = DMatrix::from_fn(3, 6, |row, col| mid[col][row] * 0.5f64.powi(row as i32));
    let xt = m
        .transpose()
        .lu()
        .solve(&y.transpose())
        .ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
        })?;
    let x = xt.transpose();
    let a1 = x.columns(0, 3).clone_owned();
    let am1 = x.columns(3, 3).clone_owned();
    let symbol = MatLaurent::from_taps(3, [(-1, am1), (0, dilation(2)), (1, a1)])?;
    Ok(LevelMask { spec, level, symbol })
}

/// The level-`n` mask, checked to be interpolatory.
pub fn make_mask(spec: SpaceSpec, level: u32) -> Result<LevelMask> {
    let mask = derive_mask_from_interpolation(spec, level)?;
    if mask.tap(0) != dilation(2) {
        return Err(Error::NotInterpolatory {
            residual: crate::numeric::max_abs(&(mask.tap(0) - dilation(2))),
        });
    }
    let residual = mask.interpolatory_residual();
    if residual > tolerances::INTERPOLATORY {
        return Err(Error::NotInterpolatory { residual });
    }
    log::debug!("mask at level {level} for {spec}: interpolatory residual {residual:e}");
    Ok(mask)
}

fn check_input(mask: &LevelMask, signal: &HermiteSignal) -> Result<()> {
    if signal.level() != mask.level {
        return Err(Error::LevelMismatch {
            expected: mask.level,
            actual: signal.level(),
        });
    }
    if signal.dim() != mask.symbol.dim() {
        return Err(Error::DimensionMismatch {
            left: mask.symbol.dim(),
            right: signal.dim(),
        });
    }
    Ok(())
}

/// `out_j = Σ_k A_{j-2k} in_k` on one period; the output has twice the length.
pub fn subdivide(mask: &LevelMask, signal: &HermiteSignal) -> Result<HermiteSignal> {
    check_input(mask, signal)?;
    let n = signal.len();
    let fine = 2 * n as i64;
    let mut out = vec![DVector::zeros(signal.dim()); 2 * n];
    for (k, v) in signal.data().iter().enumerate() {
        for (t, a) in mask.symbol.taps() {
            let j = (2 * k as i64 + t as i64).rem_euclid(fine) as usize;
            out[j] += a * v;
        }
    }
    HermiteSignal::new(mask.level + 1, 2 * signal.start(), out)
}

/// Refines data on the nodes of a closed interval without wraparound: `N`
/// nodes become `2N - 1`. Needs a mask supported in `[-1, 1]`.
pub fn refine_open(mask: &LevelMask, signal: &HermiteSignal) -> Result<HermiteSignal> {
    check_input(mask, signal)?;
    if mask.symbol.lo() < -1 || mask.symbol.hi() > 1 {
        return Err(Error::Unsupported("open refinement needs taps within [-1, 1]".into()));
    }
    let len = 2 * signal.len() - 1;
    let mut out = vec![DVector::zeros(signal.dim()); len];
    for (k, v) in signal.data().iter().enumerate() {
        for (t, a) in mask.symbol.taps() {
            let j = 2 * k as i64 + t as i64;
            if (0..len as i64).contains(&j) {
                out[j as usize] += a * v;
            }
        }
    }
    HermiteSignal::new(mask.level + 1, 2 * signal.start(), out)
}

/// Functions the scheme reproduces: cubics and `e^{±λx}`, or quintics in the
/// stationary case.
pub fn reproduced_functions(spec: SpaceSpec) -> Vec<Function> {
    match spec.lambda {
        Some(l) => vec![
            Function::Monomial(0),
            Function::Monomial(1),
            Function::Monomial(2),
            Function::Monomial(3),
            Function::Exp(l),
            Function::Exp(-l),
        ],
        None => (0..=5).map(Function::Monomial).collect(),
    }
}

/// Largest deviation, over `f`, of `depth` refinements of the level-`n`
/// samples of `f` on nodes `-2..=2` from the exact finer samples.
pub fn spectral_residual_for(spec: SpaceSpec, level: u32, depth: u32, f: &Function) -> Result<f64> {
    let masks = (level..level + depth)
        .map(|l| make_mask(spec, l))
        .collect::<Result<Vec<_>>>()?;
    let mut current = crate::signal::sample_function(f, 2, level, -2..3)?;
    for mask in &masks {
        current = refine_open(mask, &current)?;
    }
    let fine_level = level + depth;
    Ok(current
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| (v - f.v_sample(2, fine_level, current.start() + i as i64)).amax())
        .fold(0.0, f64::max))
}

pub fn spectral_residual(spec: SpaceSpec, level: u32, depth: u32) -> Result<f64> {
    reproduced_functions(spec)
        .iter()
        .map(|f| spectral_residual_for(spec, level, depth, f))
        .try_fold(0.0, |acc, r| r.map(|r| f64::max(acc, r)))
}

/// Dyadic samples of the basic limit function `F` of a level, on `[-1, 1]`.
///
/// `values[k]` is the `(d+1)×(d+1)` matrix at `grid[k]`; row `i` holds the
/// `i`-th derivatives and column `j` belongs to `φ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitFunctionTable {
    pub level: u32,
    pub depth: u32,
    pub grid: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
}

impl LimitFunctionTable {
    /// Samples of `φ_j^{(i)}`.
    pub fn column(&self, i: usize, j: usize) -> Vec<f64> {
        self.values.iter().map(|m| m[(i, j)]).collect()
    }

    pub fn phi(&self, j: usize) -> Vec<f64> {
        self.column(0, j)
    }

    /// Matrix at grid index `i - 2^depth`, zero outside the support.
    pub fn at_index(&self, i: i64) -> Option<&DMatrix<f64>> {
        let half = 1i64 << self.depth;
        usize::try_from(i + half).ok().and_then(|u| self.values.get(u))
    }
}

/// Starts from `e_j` at node 0 and refines `depth` times. Because the scheme
/// interpolates, the dyadic samples are exact.
pub fn render_basic_limit(spec: SpaceSpec, level: u32, depth: u32) -> Result<LimitFunctionTable> {
    if depth == 0 {
        return Err(Error::Unsupported("rendering depth must be at least 1".into()));
    }
    let dim = spec.dim();
    let masks = (level..level + depth)
        .map(|l| make_mask(spec, l))
        .collect::<Result<Vec<_>>>()?;
    let columns = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut data = vec![DVector::zeros(dim); 3];
            data[1][j] = 1.0;
            let mut current = HermiteSignal::new(level, -1, data)?;
            for mask in &masks {
                current = refine_open(mask, &current)?;
            }
            Ok(current.into_data())
        })
        .collect::<Result<Vec<_>>>()?;

    let half = 1i64 << depth;
    let scale = 2f64.powi(depth as i32);
    let grid = (-half..=half).map(|k| k as f64 / scale).collect();
    let values = (0..(2 * half + 1) as usize)
        .map(|k| DMatrix::from_fn(dim, dim, |i, j| columns[j][k][i] * scale.powi(i as i32)))
        .collect();
    Ok(LimitFunctionTable {
        level,
        depth,
        grid,
        values,
    })
}

fn left_piece(j: usize, x: f64) -> f64 {
    let c = (x + 1.0).powi(3);
    match j {
        0 => c * (6.0 * x * x - 3.0 * x + 1.0),
        1 => -c * x * (3.0 * x - 1.0),
        2 => 0.5 * c * x * x,
        _ => 0.0,
    }
}

fn right_piece(j: usize, x: f64, l: f64) -> f64 {
    let x3 = x.powi(3);
    let p = 3.0 * x * x - 7.0 * x + 4.0;
    let q = l * l * x * x - 2.0 * l * l * x + l * l + 12.0 * x * x - 30.0 * x + 20.0;
    let (c, s) = (l.cosh(), l.sinh());
    match j {
        0 => -6.0 * x.powi(5) + 15.0 * x.powi(4) - 10.0 * x3 + 1.0,
        1 => x3 * p * c - x3 * q * s / (2.0 * l) + (l * x).sinh() / l,
        2 => {
            -x3 * q * c / (l * l)
                + x3 * p * s / l
                + (l * x).cosh() / (2.0 * l * l)
                + (6.0 * x.powi(5) - 15.0 * x.powi(4) + 10.0 * x3 - 1.0) / (l * l)
        }
        _ => 0.0,
    }
}

/// The tabulated piecewise closed form of `φ_j` at a level, taken literally
/// (frequency `2^{-n}λ`). Without a frequency the right piece is the mirror
/// image `(-1)^j φ_j(-x)` of the left one. Zero outside `[-1, 1]`.
pub fn closed_form_phi(spec: SpaceSpec, level: u32, j: usize, x: f64) -> f64 {
    if !(-1.0..=1.0).contains(&x) {
        return 0.0;
    }
    if x <= 0.0 {
        return left_piece(j, x);
    }
    match spec.frequency_at(level) {
        Some(l) => right_piece(j, x, l),
        None => {
            let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * left_piece(j, -x)
        }
    }
}

/// Exact local Hermite interpolant with data `e_j` at node 0: value, first
/// and second derivative of `φ_j` at `x`. Zero outside `[-1, 1]`.
pub fn interpolant_phi(spec: SpaceSpec, level: u32, j: usize, x: f64) -> Result<[f64; 3]> {
    if j > 2 {
        return Err(Error::Shape(format!("component {j} out of range 0..=2")));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Ok([0.0; 3]);
    }
    let (basis, m) = local_basis(spec, level)?;
    let inverse = m.try_inverse().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    // on [-1, 0] the node sits at the right end of the local interval
    let (t, column) = if x <= 0.0 { (x + 1.0, 3 + j) } else { (x, j) };
    let coeffs = inverse.column(column);
    let jets = basis.jets(t);
    let mut out = [0.0; 3];
    for (b, jet) in jets.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(jet) {
            *o += coeffs[b] * v;
        }
    }
    Ok(out)
}

/// Residual of `F^{[n-1]}(x) = Σ_k D⁻¹ F^{[n]}(2x - k) A^{[n-1]}_k` on the
/// dyadic grid of step `2^{-depth}` over `[-3/2, 3/2]`.
pub fn refinement_residual(spec: SpaceSpec, level: u32, depth: u32) -> Result<f64> {
    if level == 0 {
        return Err(Error::LevelUnderflow { level, levels: 1 });
    }
    if depth < 2 {
        return Err(Error::Unsupported("refinement check needs depth at least 2".into()));
    }
    let coarse = render_basic_limit(spec, level - 1, depth)?;
    let fine = render_basic_limit(spec, level, depth - 1)?;
    let mask = make_mask(spec, level - 1)?;
    let d_inv = inverse_dilation(spec.d());
    let dim = spec.dim();
    let zero = DMatrix::zeros(dim, dim);
    let half = 1i64 << depth;
    let shift = 1i64 << (depth - 1);
    let mut worst = 0.0_f64;
    for i in -(3 * half / 2)..=(3 * half / 2) {
        let lhs = coarse.at_index(i).unwrap_or(&zero);
        let mut rhs = DMatrix::zeros(dim, dim);
        for (k, a) in mask.symbol().taps() {
            // 2x - k on the fine table's grid
            if let Some(f) = fine.at_index(i - k as i64 * shift) {
                rhs += &d_inv * f * a;
            }
        }
        worst = worst.max(crate::numeric::max_abs(&(lhs - rhs)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::sample_function;
    use nalgebra::dmatrix;

    fn p0(lambda: f64) -> SpaceSpec {
        SpaceSpec::exponential(0, lambda).unwrap()
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        crate::numeric::max_abs(m)
    }

    #[test]
    fn dilation_is_powers_of_two() {
        assert_eq!(dilation(2), dmatrix![1.0, 0.0, 0.0; 0.0, 0.5, 0.0; 0.0, 0.0, 0.25]);
        assert_eq!(dilation(3) * inverse_dilation(3), DMatrix::identity(4, 4));
    }

    #[test]
    fn stationary_mask_is_the_quintic_one() {
        let mask = make_mask(SpaceSpec::stationary(), 0).unwrap();
        let am1 = dmatrix![32.0, -10.0, 1.0; 60.0, -14.0, 1.0; 0.0, 24.0, -4.0] / 64.0;
        let a1 = dmatrix![32.0, 10.0, 1.0; -60.0, -14.0, -1.0; 0.0, -24.0, -4.0] / 64.0;
        assert!(max_abs(&(mask.tap(-1) - am1)) < 1e-14);
        assert!(max_abs(&(mask.tap(1) - a1)) < 1e-14);
        assert_eq!(mask.tap(0), dilation(2));
    }

    #[test]
    fn small_frequency_tends_to_quintic() {
        let mu_small = make_mask(p0(1e-5), 0).unwrap();
        let quintic = make_mask(SpaceSpec::stationary(), 0).unwrap();
        assert!(mu_small.symbol().approx_eq(quintic.symbol(), 1e-8));
    }

    #[test]
    fn exponential_mask_is_mirror_symmetric() {
        let e = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0]));
        for n in 0..4 {
            let mask = make_mask(p0(2.0), n).unwrap();
            assert!(max_abs(&(mask.tap(-1) - &e * mask.tap(1) * &e)) < 1e-13);
        }
    }

    #[test]
    fn constants_partition() {
        let mask = make_mask(p0(2.0), 1).unwrap();
        let col = (mask.tap(1) + mask.tap(-1)).column(0).clone_owned();
        assert!((col - DVector::from_vec(vec![1.0, 0.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn interpolatory_for_many_frequencies() {
        for lambda in [0.5, 1.0, 2.0, 4.0, 10.0] {
            for n in 0..7 {
                assert!(make_mask(p0(lambda), n).unwrap().interpolatory_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_families() {
        assert!(matches!(make_mask(SpaceSpec::polynomial(0), 0), Err(Error::Unsupported(_))));
        assert!(matches!(
            make_mask(SpaceSpec::exponential(1, 1.0).unwrap(), 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn impulse_response_is_the_mask() {
        let mask = make_mask(p0(2.0), 0).unwrap();
        let mut data = vec![DVector::zeros(3); 8];
        data[0][0] = 1.0;
        let out = subdivide(&mask, &HermiteSignal::new(0, 0, data).unwrap()).unwrap();
        assert_eq!(out.level(), 1);
        assert_eq!(out.data()[15], mask.tap(-1).column(0).clone_owned());
        assert_eq!(out.data()[0], DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(out.data()[1], mask.tap(1).column(0).clone_owned());
    }

    #[test]
    fn even_outputs_are_dilated_inputs() {
        let mask = make_mask(p0(4.0), 2).unwrap();
        let f = Function::Sin(3.0);
        let input = sample_function(&f, 2, 2, 0..16).unwrap();
        let out = subdivide(&mask, &input).unwrap();
        let d = dilation(2);
        for (k, v) in input.data().iter().enumerate() {
            assert_eq!(out.data()[2 * k], &d * v);
        }
        let raw_in = input.to_raw();
        let raw_out = out.to_raw();
        for k in 0..input.len() {
            assert_eq!(raw_out[2 * k], raw_in[k]);
        }
    }

    #[test]
    fn level_mismatch_is_rejected() {
        let mask = make_mask(p0(2.0), 1).unwrap();
        let input = sample_function(&Function::Monomial(0), 2, 0, 0..4).unwrap();
        assert!(matches!(subdivide(&mask, &input), Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn reproduces_exponentials_on_interior() {
        let mask = make_mask(p0(2.0), 0).unwrap();
        let f = Function::Exp(-2.0);
        let input = sample_function(&f, 2, 0, -2..3).unwrap();
        let out = refine_open(&mask, &input).unwrap();
        for (i, v) in out.data().iter().enumerate() {
            let exact = f.v_sample(2, 1, out.start() + i as i64);
            assert!((v - exact).amax() < 1e-10);
        }
    }

    #[test]
    fn spectral_examples() {
        let one = spectral_residual_for(p0(2.0), 3, 4, &Function::Monomial(0)).unwrap();
        assert!(one < 1e-15);
        assert!(spectral_residual_for(p0(2.0), 0, 3, &Function::Monomial(3)).unwrap() < 1e-9);
        assert!(spectral_residual_for(p0(4.0), 2, 4, &Function::Exp(4.0)).unwrap() < 1e-9);
        assert!(spectral_residual(SpaceSpec::stationary(), 0, 4).unwrap() < 1e-9);
    }

    #[test]
    fn quartics_are_not_reproduced() {
        let r = spectral_residual_for(p0(2.0), 0, 2, &Function::Monomial(4)).unwrap();
        assert!(r > 1e-6);
    }

    #[test]
    fn hermite_conditions_of_rendered_functions() {
        let table = render_basic_limit(p0(2.0), 0, 5).unwrap();
        let centre = table.at_index(0).unwrap();
        assert_eq!(centre, &DMatrix::identity(3, 3));
        for end in [-32, 32] {
            assert_eq!(table.at_index(end).unwrap(), &DMatrix::zeros(3, 3));
        }
        assert_eq!(table.grid.len(), 65);
    }

    #[test]
    fn rendered_phi1_at_minus_half_is_the_mask_entry() {
        let table = render_basic_limit(p0(2.0), 0, 4).unwrap();
        let mask = make_mask(p0(2.0), 0).unwrap();
        let v = table.at_index(-8).unwrap()[(0, 1)];
        assert!((v - mask.tap(-1)[(0, 1)]).abs() < 1e-15);
        assert!((v + 0.15525).abs() < 1e-5, "{v}");
    }

    #[test]
    fn closed_form_examples() {
        let s = p0(2.0);
        assert_eq!(closed_form_phi(s, 0, 0, 1.0), 0.0);
        assert_eq!(closed_form_phi(s, 0, 2, -1.0), 0.0);
        assert_eq!(closed_form_phi(s, 0, 2, 0.0), 0.0);
        assert!((closed_form_phi(s, 0, 1, -0.5) + 5.0 / 32.0).abs() < 1e-15);
        assert!(closed_form_phi(s, 0, 1, 1.0).abs() < 1e-12);
        assert_eq!(closed_form_phi(s, 0, 0, 1.5), 0.0);
        // the printed right piece of φ₂ does not vanish at 0⁺
        assert!((closed_form_phi(s, 0, 2, 1e-300) + 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_closed_form_matches_cascade() {
        let table = render_basic_limit(SpaceSpec::stationary(), 0, 6).unwrap();
        for (x, m) in table.grid.iter().zip(&table.values) {
            for j in 0..3 {
                let exact = closed_form_phi(SpaceSpec::stationary(), 0, j, *x);
                assert!((m[(0, j)] - exact).abs() < 1e-13, "x={x} j={j}");
            }
        }
    }

    #[test]
    fn cascade_matches_exact_interpolant() {
        for lambda in [2.0, 4.0] {
            let table = render_basic_limit(p0(lambda), 0, 7).unwrap();
            for (x, m) in table.grid.iter().zip(&table.values) {
                for j in 0..3 {
                    let exact = interpolant_phi(p0(lambda), 0, j, *x).unwrap();
                    for (i, e) in exact.iter().enumerate() {
                        assert!((m[(i, j)] - e).abs() < 1e-9, "x={x} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn refinement_examples() {
        assert!(refinement_residual(SpaceSpec::stationary(), 1, 6).unwrap() < 1e-9);
        assert!(refinement_residual(p0(2.0), 1, 6).unwrap() < 1e-9);
        assert!(matches!(
            refinement_residual(p0(2.0), 0, 6),
            Err(Error::LevelUnderflow { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let mask = make_mask(p0(2.0), 1).unwrap();
        let text = serde_json::to_string(&mask).unwrap();
        let back: LevelMask = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mask);
    }
}
