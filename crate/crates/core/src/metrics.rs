//! Expected Calibration Error, run aggregation, and the evaluation pipeline.
//!
//! ECE over `M` equal-width bins is
//!
//! ```text
//! ECE = Σ_m (N_m / n) · |Acc_m − Conf_m|
//! ```
//!
//! with bin `m` covering `((m−1)/M, m/M]` and `conf = 0` placed in bin 1.

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{baseline_confidence, BaselineKind};
use crate::calibration::{fit_fused, fit_temperature, fused_confidence, temp_scale, Grid};
use crate::corpus::{ensemble_accuracy, split_indices, Ensemble, SplitSpec};
use crate::entailment::EquivalenceOracle;
use crate::error::{Error, Result};
use crate::grounding::{ensemble_grounding_conf, GroundingProvider};

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStats {
    /// 1-based bin index.
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_conf: f64,
    pub mean_acc: f64,
    /// Population variance of accuracies in the bin.
    pub acc_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EceReport {
    pub ece: f64,
    pub bins: Vec<BinStats>,
    pub n: usize,
}

impl EceReport {
    pub fn non_empty_bins(&self) -> impl Iterator<Item = &BinStats> {
        self.bins.iter().filter(|b| b.count > 0)
    }
}

/// 0-based bin of `conf` under the `((m−1)/M, m/M]` convention, with edges
/// compared as `k as f64 / M as f64`.
pub fn bin_index(conf: f64, m_bins: usize) -> usize {
    let m = m_bins as f64;
    let mut k = (conf * m).ceil() as isize;
    if k < 1 {
        k = 1;
    }
    if k as usize > m_bins {
        k = m_bins as isize;
    }
    // Correct ceil() against the exact edge values.
    while k > 1 && conf <= (k - 1) as f64 / m {
        k -= 1;
    }
    while (k as usize) < m_bins && conf > k as f64 / m {
        k += 1;
    }
    (k - 1) as usize
}

fn check_pairs(pairs: &[(f64, f64)], m_bins: usize) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("confidence/accuracy pairs"));
    }
    if m_bins == 0 {
        return Err(Error::InvalidArgument("bin count must be >= 1".into()));
    }
    for (i, &(c, a)) in pairs.iter().enumerate() {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidArgument(format!(
                "pair {i}: confidence {c} outside [0,1]"
            )));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidArgument(format!(
                "pair {i}: accuracy {a} outside [0,1]"
            )));
        }
    }
    Ok(())
}

/// Scalar ECE without building per-bin statistics.
pub fn ece_value(pairs: &[(f64, f64)], m_bins: usize) -> Result<f64> {
    check_pairs(pairs, m_bins)?;
    let mut count = vec![0usize; m_bins];
    let mut conf = vec![0.0f64; m_bins];
    let mut acc = vec![0.0f64; m_bins];
    for &(c, a) in pairs {
        let b = bin_index(c, m_bins);
        count[b] += 1;
        conf[b] += c;
        acc[b] += a;
    }
    let n = pairs.len() as f64;
    let mut e = 0.0;
    for b in 0..m_bins {
        if count[b] > 0 {
            let k = count[b] as f64;
            e += (k / n) * (acc[b] / k - conf[b] / k).abs();
        }
    }
    Ok(e.clamp(0.0, 1.0))
}

/// Full ECE report with per-bin statistics.
pub fn ece(pairs: &[(f64, f64)], m_bins: usize) -> Result<EceReport> {
    check_pairs(pairs, m_bins)?;
    let mut members: Vec<Vec<(f64, f64)>> = vec![Vec::new(); m_bins];
    for &p in pairs {
        members[bin_index(p.0, m_bins)].push(p);
    }
    let m = m_bins as f64;
    let bins: Vec<BinStats> = members
        .iter()
        .enumerate()
        .map(|(i, mem)| {
            let count = mem.len();
            let (mean_conf, mean_acc, acc_variance) = if count == 0 {
                (0.0, 0.0, 0.0)
            } else {
                let k = count as f64;
                let mc = mem.iter().map(|p| p.0).sum::<f64>() / k;
                let ma = mem.iter().map(|p| p.1).sum::<f64>() / k;
                let var = mem.iter().map(|p| (p.1 - ma).powi(2)).sum::<f64>() / k;
                (mc, ma, var)
            };
            BinStats {
                index: i + 1,
                lower: i as f64 / m,
                upper: (i + 1) as f64 / m,
                count,
                mean_conf,
                mean_acc,
                acc_variance,
            }
        })
        .collect();
    let n = pairs.len() as f64;
    let ece = bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.count as f64 / n) * (b.mean_acc - b.mean_conf).abs())
        .sum::<f64>()
        .clamp(0.0, 1.0);
    Ok(EceReport {
        ece,
        bins,
        n: pairs.len(),
    })
}

pub const METHOD_BASELINE: &str = "baseline";
pub const METHOD_SCALED: &str = "scaled_baseline";
pub const METHOD_FUSED: &str = "fused";

/// Test-split outcome of one calibration method in one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method: String,
    pub ece: f64,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub validation_ece: Option<f64>,
    #[serde(skip)]
    pub report: EceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub n_validation: usize,
    pub n_test: usize,
    pub methods: Vec<MethodResult>,
}

impl RunSummary {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodAggregate {
    pub method: String,
    pub mean_ece: f64,
    /// Sample variance (divisor `runs − 1`; 0 for a single run).
    pub var_ece: f64,
    pub mean_t: Option<f64>,
    pub mean_c: Option<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateSummary {
    pub methods: Vec<MethodAggregate>,
}

impl AggregateSummary {
    pub fn method(&self, name: &str) -> Option<&MethodAggregate> {
        self.methods.iter().find(|m| m.method == name)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    // The rounded mean of equal values need not equal the value itself.
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean and sample variance of each method's ECE across runs, plus mean
/// fitted parameters.
pub fn aggregate_runs(runs: &[RunSummary]) -> Result<AggregateSummary> {
    let first = runs.first().ok_or(Error::EmptyInput("runs"))?;
    let names: Vec<&str> = first.methods.iter().map(|m| m.method.as_str()).collect();
    for r in &runs[1..] {
        let other: Vec<&str> = r.methods.iter().map(|m| m.method.as_str()).collect();
        if other != names {
            return Err(Error::InconsistentRuns(format!(
                "run {} has {:?}, run {} has {:?}",
                first.run, names, r.run, other
            )));
        }
    }
    let methods = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let eces: Vec<f64> = runs.iter().map(|r| r.methods[i].ece).collect();
            let ts: Option<Vec<f64>> = runs.iter().map(|r| r.methods[i].t).collect();
            let cs: Option<Vec<f64>> = runs.iter().map(|r| r.methods[i].c).collect();
            MethodAggregate {
                method: name.to_string(),
                mean_ece: mean(&eces),
                var_ece: sample_variance(&eces),
                mean_t: ts.map(|v| mean(&v)),
                mean_c: cs.map(|v| mean(&v)),
                runs: runs.len(),
            }
        })
        .collect();
    Ok(AggregateSummary { methods })
}

/// Pipeline settings for [`evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub baseline: BaselineKind,
    pub split: SplitSpec,
    pub grid: Grid,
    pub bins: usize,
    /// Worker threads for per-ensemble scoring; 0 or 1 means sequential.
    pub jobs: usize,
}

impl EvalConfig {
    pub fn new(baseline: BaselineKind) -> Self {
        Self {
            baseline,
            split: SplitSpec::default(),
            grid: Grid::default(),
            bins: DEFAULT_BINS,
            jobs: 1,
        }
    }
}

/// Per-ensemble inputs to calibration, computed once per dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredEnsemble {
    pub conf_baseline: f64,
    pub conf_gm: Option<f64>,
    pub accuracy: f64,
}

fn score_one(
    e: &Ensemble,
    kind: BaselineKind,
    oracle: &dyn EquivalenceOracle,
    provider: Option<&dyn GroundingProvider>,
) -> Result<ScoredEnsemble> {
    let run = || -> Result<ScoredEnsemble> {
        let conf_baseline = baseline_confidence(kind, e, oracle)?.value;
        let conf_gm = provider
            .map(|p| ensemble_grounding_conf(e, p))
            .transpose()?;
        Ok(ScoredEnsemble {
            conf_baseline,
            conf_gm,
            accuracy: ensemble_accuracy(e),
        })
    };
    run().map_err(|err| err.in_ensemble(&e.id))
}

/// Scores every ensemble, in input order. With `jobs > 1` the work runs on
/// a dedicated pool; results are collected by index so the output does not
/// depend on scheduling.
pub fn score_dataset(
    dataset: &[Ensemble],
    kind: BaselineKind,
    oracle: &dyn EquivalenceOracle,
    provider: Option<&dyn GroundingProvider>,
    jobs: usize,
) -> Result<Vec<ScoredEnsemble>> {
    if jobs <= 1 {
        return dataset
            .iter()
            .map(|e| score_one(e, kind, oracle, provider))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| {
        dataset
            .par_iter()
            .map(|e| score_one(e, kind, oracle, provider))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .collect()
}

/// Fits and scores one split of pre-computed ensemble scores.
pub fn evaluate_run(scored: &[ScoredEnsemble], cfg: &EvalConfig, run: usize) -> Result<RunSummary> {
    let (val_idx, test_idx) = split_indices(scored.len(), &cfg.split, run)?;
    if val_idx.is_empty() {
        return Err(Error::EmptyInput("validation split"));
    }
    if test_idx.is_empty() {
        return Err(Error::EmptyInput("test split"));
    }
    let val: Vec<&ScoredEnsemble> = val_idx.iter().map(|&i| &scored[i]).collect();
    let test: Vec<&ScoredEnsemble> = test_idx.iter().map(|&i| &scored[i]).collect();

    let mut methods = Vec::with_capacity(3);

    let raw: Vec<(f64, f64)> = test.iter().map(|s| (s.conf_baseline, s.accuracy)).collect();
    let report = ece(&raw, cfg.bins)?;
    methods.push(MethodResult {
        method: METHOD_BASELINE.into(),
        ece: report.ece,
        t: None,
        c: None,
        validation_ece: None,
        report,
    });

    let val_pairs: Vec<(f64, f64)> = val.iter().map(|s| (s.conf_baseline, s.accuracy)).collect();
    let (t, val_ece) = fit_temperature(&val_pairs, &cfg.grid, cfg.bins)?;
    let scaled: Vec<(f64, f64)> = test
        .iter()
        .map(|s| Ok((temp_scale(s.conf_baseline, t)?, s.accuracy)))
        .collect::<Result<_>>()?;
    let report = ece(&scaled, cfg.bins)?;
    methods.push(MethodResult {
        method: METHOD_SCALED.into(),
        ece: report.ece,
        t: Some(t),
        c: None,
        validation_ece: Some(val_ece),
        report,
    });

    let has_gm = scored.iter().all(|s| s.conf_gm.is_some());
    if has_gm {
        let triples: Vec<(f64, f64, f64)> = val
            .iter()
            .map(|s| (s.conf_baseline, s.conf_gm.unwrap(), s.accuracy))
            .collect();
        let fit = fit_fused(&triples, &cfg.grid, cfg.bins)?;
        let fused: Vec<(f64, f64)> = test
            .iter()
            .map(|s| {
                (
                    fused_confidence(s.conf_baseline, s.conf_gm.unwrap(), &fit.params),
                    s.accuracy,
                )
            })
            .collect();
        let report = ece(&fused, cfg.bins)?;
        methods.push(MethodResult {
            method: METHOD_FUSED.into(),
            ece: report.ece,
            t: Some(fit.params.t),
            c: Some(fit.params.c),
            validation_ece: Some(fit.validation_ece),
            report,
        });
    }

    Ok(RunSummary {
        run,
        seed: cfg.split.seed,
        n_validation: val.len(),
        n_test: test.len(),
        methods,
    })
}

/// Full pipeline: score every ensemble once, then for each repetition split,
/// fit on validation and report test ECE for the raw, temperature-scaled and
/// (when a provider is given) grounding-fused confidences.
pub fn evaluate(
    dataset: &[Ensemble],
    oracle: &dyn EquivalenceOracle,
    provider: Option<&dyn GroundingProvider>,
    cfg: &EvalConfig,
) -> Result<(Vec<RunSummary>, AggregateSummary)> {
    cfg.split.validate()?;
    cfg.grid.validate()?;
    if cfg.bins == 0 {
        return Err(Error::InvalidArgument("bin count must be >= 1".into()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    let scored = score_dataset(dataset, cfg.baseline, oracle, provider, cfg.jobs)?;
    let runs = (0..cfg.split.repetitions)
        .map(|r| evaluate_run(&scored, cfg, r).map_err(|e| e.in_run(r)))
        .collect::<Result<Vec<_>>>()?;
    let agg = aggregate_runs(&runs)?;
    Ok((runs, agg))
}
