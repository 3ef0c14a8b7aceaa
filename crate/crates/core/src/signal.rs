//! Hermite data in v-coordinates.
//!
//! A [`HermiteSignal`] at level `n` stores, for node `k`, the vector
//! `[f(x), 2^{-n} f'(x), …, 2^{-nd} f^{(d)}(x)]` with `x = 2^{-n} k`.
//! Transforms treat the sequence as one period of a periodic signal.
//!
//! The CSV layout is a metadata line followed by a header and one row per node:
//!
//! ```text
//! # level=3 dim=3
//! k,f0,f1,f2
//! 0,1.0,0.0,0.0
//! ```

use crate::error::{Error, Result};
use nalgebra::DVector;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub struct HermiteSignal {
    level: u32,
    start: i64,
    data: Vec<DVector<f64>>,
}

impl HermiteSignal {
    pub fn new(level: u32, start: i64, data: Vec<DVector<f64>>) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::InvalidSignal(format!(
                "a signal needs at least 2 nodes, got {}",
                data.len()
            )));
        }
        let dim = data[0].len();
        if dim == 0 {
            return Err(Error::InvalidSignal("node vectors are empty".into()));
        }
        if let Some((i, v)) = data.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(Error::InvalidSignal(format!(
                "node {i} has {} components, expected {dim}",
                v.len()
            )));
        }
        Ok(Self { level, start, data })
    }

    pub fn from_rows(level: u32, start: i64, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(level, start, rows.into_iter().map(DVector::from_vec).collect())
    }

    pub fn zeros(level: u32, start: i64, len: usize, dim: usize) -> Result<Self> {
        Self::new(level, start, vec![DVector::zeros(dim); len])
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Node index of the first sample.
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn dim(&self) -> usize {
        self.data[0].len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[DVector<f64>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<DVector<f64>> {
        self.data
    }

    /// Abscissa of the `i`-th stored node.
    pub fn x(&self, i: usize) -> f64 {
        (self.start + i as i64) as f64 * 0.5f64.powi(self.level as i32)
    }

    /// Plain derivative values `f^{(j)}(x)` (undoes the `2^{-nj}` weights).
    pub fn to_raw(&self) -> Vec<DVector<f64>> {
        let scale = 2f64.powi(self.level as i32);
        self.data
            .iter()
            .map(|v| DVector::from_iterator(v.len(), v.iter().enumerate().map(|(j, x)| x * scale.powi(j as i32))))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() || self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "cannot compare {}x{} signal with {}x{}",
                self.len(),
                self.dim(),
                other.len(),
                other.dim()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max))
    }

    /// `(max |entry|, Σ entry²)`.
    pub fn norms(&self) -> (f64, f64) {
        norms(&self.data)
    }
}

pub(crate) fn norms(data: &[DVector<f64>]) -> (f64, f64) {
    data.iter().flat_map(|v| v.iter()).fold((0.0, 0.0), |(m, e), &x| {
        (f64::max(m, x.abs()), e + x * x)
    })
}

/// Detail coefficients of one analysis step, stored downsampled: entry `k`
/// is the detail attached to the odd fine node `2k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailSignal {
    pub level: u32,
    pub data: Vec<DVector<f64>>,
}

impl DetailSignal {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    pub fn norms(&self) -> (f64, f64) {
        norms(&self.data)
    }
}

/// Analytic test functions with derivatives of every order.
#[derive(Clone, Debug, PartialEq)]
pub enum Function {
    /// `x^q`
    Monomial(u32),
    /// `e^{rate·x}`
    Exp(f64),
    /// `sin(freq·x)`
    Sin(f64),
    /// `Σ cᵢ fᵢ`
    Sum(Vec<(f64, Function)>),
}

impl Function {
    /// `e^{λx} + e^{-λx}`
    pub fn cosh_pair(lambda: f64) -> Self {
        Function::Sum(vec![(1.0, Function::Exp(lambda)), (1.0, Function::Exp(-lambda))])
    }

    pub fn derivative(&self, order: u32, x: f64) -> f64 {
        match self {
            Function::Monomial(q) => {
                if order > *q {
                    0.0
                } else {
                    let falling: f64 = ((q - order + 1)..=*q).map(|i| i as f64).product();
                    falling * x.powi((q - order) as i32)
                }
            }
            Function::Exp(rate) => rate.powi(order as i32) * (rate * x).exp(),
            Function::Sin(freq) => {
                let phase = x * freq + order as f64 * std::f64::consts::FRAC_PI_2;
                freq.powi(order as i32) * phase.sin()
            }
            Function::Sum(terms) => terms.iter().map(|(c, f)| c * f.derivative(order, x)).sum(),
        }
    }

    /// v-coordinate vector at level `level`, node `k`, with `d` derivatives.
    pub fn v_sample(&self, d: usize, level: u32, k: i64) -> DVector<f64> {
        let h = 0.5f64.powi(level as i32);
        let x = k as f64 * h;
        DVector::from_iterator(
            d + 1,
            (0..=d).map(|j| h.powi(j as i32) * self.derivative(j as u32, x)),
        )
    }
}

/// Exact v-coordinate samples of `f` on the nodes `range` at level `level`.
pub fn sample_function(f: &Function, d: usize, level: u32, range: Range<i64>) -> Result<HermiteSignal> {
    let start = range.start;
    let data = range.map(|k| f.v_sample(d, level, k)).collect();
    HermiteSignal::new(level, start, data)
}

/// Converts tabulated derivatives `[f, f', …, f^{(d)}]` per node into a signal.
pub fn sample_tabulated(level: u32, start: i64, rows: &[Vec<f64>], d: usize) -> Result<HermiteSignal> {
    let h = 0.5f64.powi(level as i32);
    let data = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() < d + 1 {
                return Err(Error::InvalidSignal(format!(
                    "row {i} has {} columns, need {} (value and {d} derivatives)",
                    row.len(),
                    d + 1
                )));
            }
            Ok(DVector::from_iterator(
                d + 1,
                row.iter().take(d + 1).enumerate().map(|(j, x)| x * h.powi(j as i32)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    HermiteSignal::new(level, start, data)
}

pub fn write_signal_to<W: Write>(signal: &HermiteSignal, out: W) -> Result<()> {
    let mut out = out;
    writeln!(out, "# level={} dim={}", signal.level, signal.dim())?;
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string()];
    header.extend((0..signal.dim()).map(|j| format!("f{j}")));
    writer.write_record(&header)?;
    for (i, v) in signal.data.iter().enumerate() {
        let mut record = vec![(signal.start + i as i64).to_string()];
        // Debug formatting is the shortest representation that parses back exactly
        record.extend(v.iter().map(|x| format!("{x:?}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_signal(signal: &HermiteSignal, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_signal_to(signal, std::io::BufWriter::new(file))
}

fn parse_metadata(line: &str) -> Option<(u32, usize)> {
    let body = line.trim().strip_prefix('#')?;
    let mut level = None;
    let mut dim = None;
    for token in body.split_whitespace() {
        match token.split_once('=') {
            Some(("level", v)) => level = v.parse().ok(),
            Some(("dim", v)) => dim = v.parse().ok(),
            _ => {}
        }
    }
    Some((level?, dim?))
}

pub fn read_signal_from<R: BufRead>(mut input: R) -> Result<HermiteSignal> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let (level, dim) = parse_metadata(&first).ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing metadata line `# level=<n> dim=<d+1>`".into(),
    })?;
    if dim == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "dim must be positive".into(),
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();

    let expected: Vec<String> = std::iter::once("k".to_string())
        .chain((0..dim).map(|j| format!("f{j}")))
        .collect();
    let header = records.next().ok_or_else(|| Error::Parse {
        line: 2,
        message: "missing header line".into(),
    })??;
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse {
            line: 2,
            message: format!("malformed header, expected `{}`", expected.join(",")),
        });
    }

    let mut start = None;
    let mut data = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize + 1);
        if record.len() != dim + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} cells, found {}", dim + 1, record.len()),
            });
        }
        let k: i64 = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("node index `{}` is not an integer", &record[0]),
        })?;
        let first_k = *start.get_or_insert(k);
        if k != first_k + data.len() as i64 {
            return Err(Error::Parse {
                line,
                message: format!("node index {k} breaks the consecutive sequence"),
            });
        }
        let v = record
            .iter()
            .skip(1)
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{cell}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        data.push(DVector::from_vec(v));
    }
    HermiteSignal::new(level, start.unwrap_or(0), data)
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<HermiteSignal> {
    let file = std::fs::File::open(path)?;
    read_signal_from(std::io::BufReader::new(file))
}

/// Reads a signal and insists on a given node dimension.
pub fn read_signal_with_dim(path: impl AsRef<Path>, expected: usize) -> Result<HermiteSignal> {
    let signal = read_signal(path)?;
    if signal.dim() != expected {
        return Err(Error::FileDimMismatch {
            found: signal.dim(),
            expected,
        });
    }
    Ok(signal)
}
