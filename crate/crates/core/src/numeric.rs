use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `n` points on the unit circle at odd multiples of `π/n`, so `z = ±1` is
/// never sampled when `n` is even.
pub(crate) fn unit_circle(n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / n as f64))
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn max_abs_complex(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// `E_k(u) / u^k`, where `E_k` is the Taylor tail of `cosh` (even `k`) or
/// `sinh` (odd `k`) starting at `u^k / k!`. Equals `1/k!` at `u = 0`.
pub(crate) fn tail_ratio(k: u32, u: f64) -> f64 {
    if u.abs() < 2.0 {
        let mut term = 1.0 / factorial(k);
        let mut sum = term;
        let mut j = k;
        loop {
            term *= u * u / (((j + 1) * (j + 2)) as f64);
            j += 2;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let mut tail = if k.is_multiple_of(2) { u.cosh() } else { u.sinh() };
        let mut j = k % 2;
        while j < k {
            tail -= u.powi(j as i32) / factorial(j);
            j += 2;
        }
        tail / u.powi(k as i32)
    }
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `-sinh(μ)/μ`, exact at `μ = 0`.
pub(crate) fn neg_sinhc(mu: f64) -> f64 {
    -tail_ratio(1, mu)
}

/// `(1 - cosh μ)/μ²`.
pub(crate) fn one_minus_cosh_over_sq(mu: f64) -> f64 {
    -tail_ratio(2, mu)
}

/// `(μ - sinh μ)/μ³`.
pub(crate) fn mu_minus_sinh_over_cube(mu: f64) -> f64 {
    -tail_ratio(3, mu)
}
