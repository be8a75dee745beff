//! Temperature scaling, grounding-fused confidence, and grid fitting of the
//! temperature `T` and offset `C` on a validation split.
//!
//! The fused confidence of an ensemble is
//!
//! ```text
//! conf = clamp(conf_baseline * conf_gm^(1/T) + C, 0, 1)
//! ```
//!
//! where `conf_gm` is the mean grounding confidence. `T > 1` raises
//! `conf_gm^(1/T)` toward 1, `T < 1` lowers it; `C >= 0` offsets the
//! shrinkage caused by multiplying two numbers in `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ece_value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl CalibrationParams {
    pub fn new(t: f64, c: f64) -> Result<Self> {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "temperature {t} must be > 0"
            )));
        }
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidArgument(format!("offset {c} must be >= 0")));
        }
        Ok(Self { t, c })
    }
}

/// Inclusive arithmetic range `start:stop:step` of grid values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridRange {
    /// Expands to `start, start+step, ...` up to and including `stop`.
    /// Values are rounded to 9 decimals so `0.1 + 0.2*k` prints as written.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.step.is_nan()
            || self.step <= 0.0
            || self.start.is_nan()
            || self.stop.is_nan()
            || self.stop < self.start
        {
            return Err(Error::InvalidArgument(format!(
                "grid range {self} needs step > 0 and stop >= start"
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect())
    }
}

impl fmt::Display for GridRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for GridRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("grid range `{s}` (expected start:stop:step)"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let r = GridRange {
            start: nums[0],
            stop: nums[1],
            step: nums[2],
        };
        r.values()?;
        Ok(r)
    }
}

/// Candidate temperatures and offsets for the exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_values: Vec<f64>,
    pub c_values: Vec<f64>,
}

impl Default for Grid {
    /// T in {0.1, 0.3, ..., 9.9}; C in {0.0, 0.1, ..., 0.5}.
    fn default() -> Self {
        Grid::from_ranges(
            GridRange {
                start: 0.1,
                stop: 9.9,
                step: 0.2,
            },
            GridRange {
                start: 0.0,
                stop: 0.5,
                step: 0.1,
            },
        )
        .expect("default grid is valid")
    }
}

impl Grid {
    pub fn new(t_values: Vec<f64>, c_values: Vec<f64>) -> Result<Self> {
        let g = Grid { t_values, c_values };
        g.validate()?;
        Ok(g)
    }

    pub fn from_ranges(t: GridRange, c: GridRange) -> Result<Self> {
        Grid::new(t.values()?, c.values()?)
    }

    pub fn validate(&self) -> Result<()> {
        fn ascending(v: &[f64]) -> bool {
            v.windows(2).all(|w| w[0] < w[1])
        }
        if self.t_values.is_empty() || self.c_values.is_empty() {
            return Err(Error::InvalidArgument("grid axes must be non-empty".into()));
        }
        if !ascending(&self.t_values) || !ascending(&self.c_values) {
            return Err(Error::InvalidArgument(
                "grid axes must be strictly ascending".into(),
            ));
        }
        if self.t_values[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "grid temperatures must be > 0".into(),
            ));
        }
        if self.c_values[0] < 0.0 {
            return Err(Error::InvalidArgument("grid offsets must be >= 0".into()));
        }
        Ok(())
    }
}

/// `conf^(1/T)`, with `0^(1/T) = 0`.
pub fn temp_scale(conf: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "temperature {t} must be > 0"
        )));
    }
    Ok(scale_unchecked(conf, t))
}

#[inline]
fn scale_unchecked(conf: f64, t: f64) -> f64 {
    if conf <= 0.0 {
        0.0
    } else if t == 1.0 {
        conf
    } else {
        conf.powf(1.0 / t).clamp(0.0, 1.0)
    }
}

/// `clamp(conf_baseline * conf_gm^(1/T) + C, 0, 1)`.
pub fn fused_confidence(conf_baseline: f64, conf_gm: f64, p: &CalibrationParams) -> f64 {
    (conf_baseline * scale_unchecked(conf_gm, p.t) + p.c).clamp(0.0, 1.0)
}

/// Grid temperature minimizing the ECE of `(conf^(1/T), acc)`; the smallest
/// such `T` on ties.
pub fn fit_temperature(validation: &[(f64, f64)], grid: &Grid, bins: usize) -> Result<(f64, f64)> {
    if validation.is_empty() {
        return Err(Error::EmptyInput("validation"));
    }
    grid.validate()?;
    let mut best: Option<(f64, f64)> = None;
    let mut scaled = Vec::with_capacity(validation.len());
    for &t in &grid.t_values {
        scaled.clear();
        scaled.extend(validation.iter().map(|&(c, a)| (scale_unchecked(c, t), a)));
        let e = ece_value(&scaled, bins)?;
        if best.is_none_or(|(_, be)| e < be) {
            best = Some((t, e));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Result of fitting the fused confidence on a validation split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FusedFit {
    pub params: CalibrationParams,
    pub validation_ece: f64,
}

/// Exhaustive search over `t_values x c_values` for the fused confidence.
/// Ties go to the smallest `T`, then the smallest `C`.
pub fn fit_fused(validation: &[(f64, f64, f64)], grid: &Grid, bins: usize) -> Result<FusedFit> {
    if validation.is_empty() {
        return Err(Error::EmptyInput("validation"));
    }
    grid.validate()?;
    let mut best: Option<FusedFit> = None;
    let mut fused = Vec::with_capacity(validation.len());
    for &t in &grid.t_values {
        for &c in &grid.c_values {
            let params = CalibrationParams { t, c };
            fused.clear();
            fused.extend(
                validation
                    .iter()
                    .map(|&(b, g, a)| (fused_confidence(b, g, &params), a)),
            );
            let e = ece_value(&fused, bins)?;
            if best.is_none_or(|f| e < f.validation_ece) {
                best = Some(FusedFit {
                    params,
                    validation_ece: e,
                });
            }
        }
    }
    Ok(best.expect("grid is non-empty"))
}
