//! Multilevel analysis and synthesis on periodic Hermite signals.
//!
//! A transform entered at level `n` with `L` steps uses the banks of levels
//! `n-1, …, n-L`. Step `ℓ` maps `c` (length `N`) to
//!
//! ```text
//! coarse_k = Σ_t (Ã_t)ᵀ c_{2k+t}        detail_k = Σ_t (B̃_t)ᵀ c_{2k+t}
//! ```
//!
//! and synthesis inverts it with `c_j = Σ_k A_{j-2k} coarse_k + B_{j-2k} detail_k`.
//! Indices wrap modulo `N`. Details are kept downsampled: `detail_k` sits at the
//! odd fine node `2k + 1`.

use super::FilterBank;
use crate::annihilator::SpaceSpec;
use crate::error::{Error, Result};
use crate::signal::{DetailSignal, HermiteSignal};
use crate::subdivision::make_mask;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

type Taps = Vec<(i64, DMatrix<f64>)>;

struct Stencils {
    a_tilde_t: Taps,
    b_tilde_t: Taps,
    a: Taps,
    b: Taps,
}

impl Stencils {
    fn new(fb: &FilterBank) -> Self {
        let transposed = |p: &crate::laurent::MatLaurent| p.taps().map(|(k, m)| (k as i64, m.transpose())).collect();
        let plain = |p: &crate::laurent::MatLaurent| p.taps().map(|(k, m)| (k as i64, m.clone())).collect();
        Self {
            a_tilde_t: transposed(fb.a_tilde()),
            b_tilde_t: transposed(fb.b_tilde()),
            a: plain(fb.a()),
            b: plain(fb.b()),
        }
    }
}

fn downsample(taps: &Taps, fine: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let n = fine.len() as i64;
    (0..n / 2)
        .map(|k| {
            taps.iter().fold(DVector::zeros(fine[0].len()), |acc, (t, m)| {
                acc + m * &fine[(2 * k + t).rem_euclid(n) as usize]
            })
        })
        .collect()
}

fn upsample_into(out: &mut [DVector<f64>], taps: &Taps, coarse: &[DVector<f64>]) {
    let n = out.len() as i64;
    for (k, v) in coarse.iter().enumerate() {
        for (t, m) in taps {
            out[(2 * k as i64 + t).rem_euclid(n) as usize] += m * v;
        }
    }
}

/// Result of a multilevel analysis. `details[0]` is the finest level.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub spec: SpaceSpec,
    pub entry_level: u32,
    pub coarse: HermiteSignal,
    pub details: Vec<DetailSignal>,
}

impl Decomposition {
    pub fn levels(&self) -> u32 {
        self.details.len() as u32
    }

    /// Number of scalar detail coefficients.
    pub fn detail_count(&self) -> usize {
        self.details.iter().map(|d| d.len() * self.coarse.dim()).sum()
    }

    pub fn max_detail(&self) -> f64 {
        self.details.iter().map(DetailSignal::max_abs).fold(0.0, f64::max)
    }

    /// Zeroes every detail entry with magnitude below `threshold` and returns
    /// how many were dropped.
    pub fn threshold(&mut self, threshold: f64) -> usize {
        let mut dropped = 0;
        for d in &mut self.details {
            for v in &mut d.data {
                for x in v.iter_mut() {
                    if x.abs() < threshold {
                        *x = 0.0;
                        dropped += 1;
                    }
                }
            }
        }
        dropped
    }
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    spec: SpaceSpec,
    entry_level: u32,
    #[serde(rename = "L")]
    levels: u32,
    #[serde(default)]
    start: i64,
    coarse: Vec<Vec<f64>>,
    details: Vec<Vec<Vec<f64>>>,
}

fn rows(data: &[DVector<f64>]) -> Vec<Vec<f64>> {
    data.iter().map(|v| v.iter().copied().collect()).collect()
}

impl Serialize for Decomposition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DecompositionJson {
            spec: self.spec,
            entry_level: self.entry_level,
            levels: self.levels(),
            start: self.coarse.start(),
            coarse: rows(self.coarse.data()),
            details: self.details.iter().map(|d| rows(&d.data)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Decomposition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let json = DecompositionJson::deserialize(deserializer)?;
        if json.details.len() != json.levels as usize {
            return Err(D::Error::custom(format!(
                "L = {} but {} detail levels are listed",
                json.levels,
                json.details.len()
            )));
        }
        let coarse_level = json
            .entry_level
            .checked_sub(json.levels)
            .ok_or_else(|| D::Error::custom("L exceeds entry_level"))?;
        let coarse = HermiteSignal::from_rows(coarse_level, json.start, json.coarse).map_err(D::Error::custom)?;
        let details = json
            .details
            .into_iter()
            .enumerate()
            .map(|(i, d)| DetailSignal {
                level: json.entry_level - 1 - i as u32,
                data: d.into_iter().map(DVector::from_vec).collect(),
            })
            .collect();
        Ok(Self {
            spec: json.spec,
            entry_level: json.entry_level,
            coarse,
            details,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompressionReport {
    pub threshold: f64,
    pub total: usize,
    pub kept: usize,
    pub dropped: usize,
    /// Fraction of detail entries set to zero.
    pub sparsity: f64,
    pub max_error: f64,
    /// `max_error` over the largest input entry.
    pub relative_error: f64,
}

/// Filter banks of one space, indexed by level.
#[derive(Clone, Debug)]
pub struct BankFamily {
    spec: SpaceSpec,
    banks: BTreeMap<u32, FilterBank>,
}

impl BankFamily {
    pub fn new(spec: SpaceSpec, levels: impl IntoIterator<Item = u32>) -> Result<Self> {
        let banks = levels
            .into_iter()
            .map(|l| Ok((l, FilterBank::build(&make_mask(spec, l)?)?)))
            .collect::<Result<_>>()?;
        Ok(Self { spec, banks })
    }

    /// Banks for a transform entered at `entry_level` with `depth` steps.
    pub fn for_transform(spec: SpaceSpec, entry_level: u32, depth: u32) -> Result<Self> {
        if depth > entry_level {
            return Err(Error::LevelUnderflow {
                level: entry_level,
                levels: depth,
            });
        }
        Self::new(spec, entry_level - depth..entry_level)
    }

    /// Replaces the bank of one level, e.g. with a perturbed copy.
    pub fn insert(&mut self, bank: FilterBank) {
        self.banks.insert(bank.level(), bank);
    }

    pub fn spec(&self) -> SpaceSpec {
        self.spec
    }

    pub fn bank(&self, level: u32) -> Result<&FilterBank> {
        self.banks
            .get(&level)
            .ok_or_else(|| Error::Unsupported(format!("no filter bank for level {level}")))
    }

    pub fn banks(&self) -> impl Iterator<Item = &FilterBank> {
        self.banks.values()
    }

    pub fn analyze(&self, signal: &HermiteSignal, depth: u32) -> Result<Decomposition> {
        let level = signal.level();
        if depth > level {
            return Err(Error::LevelUnderflow { level, levels: depth });
        }
        if signal.dim() != self.spec.dim() {
            return Err(Error::DimensionMismatch {
                left: self.spec.dim(),
                right: signal.dim(),
            });
        }
        let block = 1usize << depth;
        if !signal.len().is_multiple_of(block) {
            return Err(Error::LengthNotDivisible {
                len: signal.len(),
                levels: depth,
            });
        }
        if signal.start().rem_euclid(block as i64) != 0 {
            return Err(Error::StartNotAligned {
                start: signal.start(),
                levels: depth,
            });
        }
        if signal.len() / block < 2 {
            return Err(Error::InvalidSignal(format!(
                "{} nodes leave fewer than 2 coarse nodes after {depth} levels",
                signal.len()
            )));
        }

        let mut current = signal.data().to_vec();
        let mut start = signal.start();
        let mut details = Vec::with_capacity(depth as usize);
        for step in 1..=depth {
            let stencils = Stencils::new(self.bank(level - step)?);
            let detail = downsample(&stencils.b_tilde_t, &current);
            current = downsample(&stencils.a_tilde_t, &current);
            start /= 2;
            details.push(DetailSignal {
                level: level - step,
                data: detail,
            });
        }
        Ok(Decomposition {
            spec: self.spec,
            entry_level: level,
            coarse: HermiteSignal::new(level - depth, start, current)?,
            details,
        })
    }

    pub fn synthesize(&self, dec: &Decomposition) -> Result<HermiteSignal> {
        let mut current = dec.coarse.data().to_vec();
        let mut level = dec.coarse.level();
        let mut start = dec.coarse.start();
        if level + dec.levels() != dec.entry_level {
            return Err(Error::LevelMismatch {
                expected: dec.entry_level - dec.levels(),
                actual: level,
            });
        }
        for detail in dec.details.iter().rev() {
            if detail.level != level {
                return Err(Error::LevelMismatch {
                    expected: level,
                    actual: detail.level,
                });
            }
            if detail.len() != current.len() || detail.data.iter().any(|v| v.len() != dec.coarse.dim()) {
                return Err(Error::Shape(format!(
                    "level {level}: {} coarse nodes but {} detail vectors",
                    current.len(),
                    detail.len()
                )));
            }
            let stencils = Stencils::new(self.bank(level)?);
            let mut fine = vec![DVector::zeros(dec.coarse.dim()); 2 * current.len()];
            upsample_into(&mut fine, &stencils.a, &current);
            upsample_into(&mut fine, &stencils.b, &detail.data);
            current = fine;
            level += 1;
            start *= 2;
        }
        HermiteSignal::new(level, start, current)
    }

    /// Analysis, hard thresholding of the details, synthesis.
    pub fn compress(&self, signal: &HermiteSignal, depth: u32, threshold: f64) -> Result<CompressionReport> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(Error::Shape(format!("threshold must be nonnegative, got {threshold}")));
        }
        let mut dec = self.analyze(signal, depth)?;
        let total = dec.detail_count();
        let dropped = dec.threshold(threshold);
        let rebuilt = self.synthesize(&dec)?;
        let max_error = rebuilt.max_abs_diff(signal)?;
        let scale = signal.norms().0;
        Ok(CompressionReport {
            threshold,
            total,
            kept: total - dropped,
            dropped,
            sparsity: dropped as f64 / total as f64,
            max_error,
            relative_error: if scale > 0.0 { max_error / scale } else { max_error },
        })
    }
}

/// Builds the banks and runs a `depth`-level analysis.
pub fn analyze(spec: SpaceSpec, signal: &HermiteSignal, depth: u32) -> Result<Decomposition> {
    BankFamily::for_transform(spec, signal.level(), depth)?.analyze(signal, depth)
}

/// Builds the banks and inverts [`analyze`].
pub fn synthesize(dec: &Decomposition) -> Result<HermiteSignal> {
    BankFamily::for_transform(dec.spec, dec.entry_level, dec.levels())?.synthesize(dec)
}
