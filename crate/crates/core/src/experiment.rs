//! Monte Carlo estimation of multi-copy error probabilities.
//!
//! For each replication a finite dataset of single-copy counts is drawn under
//! each hypothesis. Decision rules are built from the dataset histograms (or
//! from the exact likelihoods), M-copy trials are formed by resampling the
//! datasets, and the error probability per M is fitted to `a exp(-M xi) / 2`.
//!
//! Every random stream is derived from the seed and the position of the draw
//! (photon number, receiver, replication, M, trial), so results do not depend
//! on how rayon schedules the work.

use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chernoff::receiver_exponent;
use crate::decision::{
    mldr_from_likelihoods, Hypothesis, MultiCopyPlan, RuleSource, SingleCopyRule, SoftDecoder,
};
use crate::error::{Error, Result};
use crate::photon::{sample_counts, DetectorModel, PhotonPmf};
use crate::receivers::{likelihoods, ReceiverKind, ReceiverSpec};
use crate::report::{fmt_real, CsvTable};

/// One simulated experiment at a single mean photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nbar_r: f64,
    pub receiver: ReceiverKind,
    /// Displacement override; `None` picks the receiver's own (`sqrt(nbar)`
    /// for Kennedy, the optimized value for GK, zero for DD).
    pub beta: Option<f64>,
    pub detector: DetectorModel,
    pub copies_per_dataset: usize,
    pub m_grid: Vec<usize>,
    pub trials_per_m: usize,
    pub replications: usize,
    pub seed: u64,
    pub with_replacement: bool,
    pub rule_source: RuleSource,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            nbar_r: 0.2,
            receiver: ReceiverKind::Kennedy,
            beta: None,
            detector: DetectorModel::laboratory(),
            copies_per_dataset: 1000,
            m_grid: (2..=16).step_by(2).collect(),
            trials_per_m: 10_000,
            replications: 5,
            seed: 0,
            with_replacement: true,
            rule_source: RuleSource::EmpiricalHistogram,
        }
    }
}

impl ExperimentConfig {
    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.nbar_r > 0.0 && self.nbar_r.is_finite()) {
            problems.push(format!(
                "nbar_r must be finite and > 0, got {}",
                self.nbar_r
            ));
        }
        if let Some(b) = self.beta {
            if !(b >= 0.0 && b.is_finite()) {
                problems.push(format!("beta must be finite and >= 0, got {b}"));
            }
        }
        if self.copies_per_dataset == 0 {
            problems.push("copies_per_dataset must be positive".to_string());
        }
        if self.m_grid.is_empty() {
            problems.push("m_grid must not be empty".to_string());
        }
        if self.m_grid.contains(&0) {
            problems.push("m_grid entries must be >= 1".to_string());
        }
        if let Some(&top) = self.m_grid.iter().max() {
            if top > self.copies_per_dataset {
                problems.push(format!(
                    "m_grid maximum {top} exceeds copies_per_dataset {}",
                    self.copies_per_dataset
                ));
            }
        }
        if self.replications == 0 {
            problems.push("replications must be positive".to_string());
        }
        if let Err(Error::InvalidConfig(det)) = DetectorModel::new(
            self.detector.efficiency,
            self.detector.dark_mean,
            self.detector.saturation,
        ) {
            problems.extend(det.into_iter().map(|p| format!("detector: {p}")));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub fn receiver_spec(&self) -> Result<ReceiverSpec<f64>> {
        match self.beta {
            Some(beta) => Ok(ReceiverSpec {
                kind: self.receiver,
                beta,
            }),
            None => ReceiverSpec::for_kind(self.receiver, self.nbar_r),
        }
    }

    fn stream(&self, tags: &[u64]) -> ChaCha8Rng {
        let mut all = vec![self.nbar_r.to_bits(), self.receiver.index()];
        all.extend_from_slice(tags);
        derived_rng(self.seed, &all)
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent ChaCha stream for the draw identified by `tags` under `seed`.
pub fn derived_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let state = tags.iter().fold(splitmix(seed), |s, &t| splitmix(s ^ t));
    ChaCha8Rng::seed_from_u64(state)
}

const DATASET_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

/// Single-copy counts recorded under each hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Datasets {
    pub coherent: Vec<u32>,
    pub thermal: Vec<u32>,
}

/// Draws `copies_per_dataset` counts under each hypothesis for replication
/// `replication`.
pub fn generate_datasets(config: &ExperimentConfig, replication: usize) -> Result<Datasets> {
    config.validate()?;
    let spec = config.receiver_spec()?;
    let (coh, th) = likelihoods(&spec, config.nbar_r, &config.detector)?;
    let mut rng = config.stream(&[DATASET_STREAM, replication as u64]);
    let coherent = sample_counts(&coh, &mut rng, config.copies_per_dataset);
    let thermal = sample_counts(&th, &mut rng, config.copies_per_dataset);
    Ok(Datasets { coherent, thermal })
}

/// Histogram likelihoods of the two datasets, padded to a common cutoff.
pub fn empirical_likelihoods(data: &Datasets) -> Result<(PhotonPmf<f64>, PhotonPmf<f64>)> {
    if data.coherent.is_empty() {
        return Err(Error::EmptyDataset("coherent"));
    }
    if data.thermal.is_empty() {
        return Err(Error::EmptyDataset("thermal"));
    }
    let coh = PhotonPmf::from_counts(&data.coherent)?;
    let th = PhotonPmf::from_counts(&data.thermal)?;
    let top = coh.cutoff().max(th.cutoff());
    Ok((coh.padded_to(top), th.padded_to(top)))
}

/// Histogram MLDR. Counts seen in neither dataset decide thermal.
pub fn empirical_rule(data: &Datasets) -> Result<SingleCopyRule> {
    let (coh, th) = empirical_likelihoods(data)?;
    let table = coh
        .probs()
        .iter()
        .zip(th.probs())
        .map(|(&c, &t)| (c > 0.0 || t > 0.0) && c >= t)
        .collect();
    SingleCopyRule::from_table(table, RuleSource::EmpiricalHistogram)
}

/// Histogram log-likelihood ratios for soft decisions.
///
/// A bin seen under only one hypothesis gets half a count under the other,
/// so ratios stay finite. Bins seen under neither copy the ratio of the
/// nearest observed bin.
pub fn empirical_decoder(data: &Datasets) -> Result<SoftDecoder<f64>> {
    let (coh, th) = empirical_likelihoods(data)?;
    let floor_c = 0.5 / data.coherent.len() as f64;
    let floor_t = 0.5 / data.thermal.len() as f64;
    let observed: Vec<Option<f64>> = coh
        .probs()
        .iter()
        .zip(th.probs())
        .map(|(&c, &t)| (c > 0.0 || t > 0.0).then(|| c.max(floor_c).ln() - t.max(floor_t).ln()))
        .collect();
    let llr = (0..observed.len())
        .map(|n| {
            (0..observed.len())
                .flat_map(|d| [n.checked_sub(d), Some(n + d)])
                .flatten()
                .find_map(|k| observed.get(k).copied().flatten())
                .unwrap_or(0.0)
        })
        .collect();
    SoftDecoder::from_llr(llr)
}

/// How M-copy trials are decided.
#[derive(Debug, Clone)]
pub enum MultiCopyDecider {
    Hard {
        rule: SingleCopyRule,
        p_coh: f64,
        q_coh: f64,
    },
    Soft(SoftDecoder<f64>),
}

impl MultiCopyDecider {
    /// Builds the decider for a replication's datasets according to the
    /// configured rule source.
    pub fn build(config: &ExperimentConfig, data: &Datasets) -> Result<Self> {
        let hard = config.receiver.is_hard_decision();
        match config.rule_source {
            RuleSource::EmpiricalHistogram if hard => {
                let rule = empirical_rule(data)?;
                let rate = |xs: &[u32]| {
                    xs.iter().filter(|&&c| rule.decides_coherent(c)).count() as f64
                        / xs.len() as f64
                };
                let (p_coh, q_coh) = (rate(&data.coherent), rate(&data.thermal));
                Ok(MultiCopyDecider::Hard { rule, p_coh, q_coh })
            }
            RuleSource::EmpiricalHistogram => Ok(MultiCopyDecider::Soft(empirical_decoder(data)?)),
            RuleSource::Theoretical => {
                let (coh, th) =
                    likelihoods(&config.receiver_spec()?, config.nbar_r, &config.detector)?;
                if hard {
                    let rule = mldr_from_likelihoods(&coh, &th)?;
                    let s = rule.conditional_errors(&coh, &th);
                    Ok(MultiCopyDecider::Hard {
                        rule,
                        p_coh: 1.0 - s.p,
                        q_coh: s.q,
                    })
                } else {
                    Ok(MultiCopyDecider::Soft(SoftDecoder::new(&coh, &th)))
                }
            }
        }
    }

    fn for_copies(&self, m: usize) -> Result<BoundDecider<'_>> {
        Ok(match self {
            MultiCopyDecider::Hard { rule, p_coh, q_coh } => {
                BoundDecider::Hard(rule, MultiCopyPlan::new(m, *p_coh, *q_coh)?)
            }
            MultiCopyDecider::Soft(dec) => BoundDecider::Soft(dec),
        })
    }
}

enum BoundDecider<'a> {
    Hard(&'a SingleCopyRule, MultiCopyPlan<f64>),
    Soft(&'a SoftDecoder<f64>),
}

impl BoundDecider<'_> {
    fn decide(&self, counts: &[u32]) -> Result<Hypothesis> {
        match self {
            BoundDecider::Hard(rule, plan) => {
                let n_coh = counts.iter().filter(|&&c| rule.decides_coherent(c)).count();
                Ok(plan.decide(n_coh))
            }
            BoundDecider::Soft(dec) => dec.decide(counts),
        }
    }
}

/// Error tallies at one M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub m: usize,
    pub trials: usize,
    /// Trials under the thermal hypothesis decided coherent.
    pub errors_coh_given_th: usize,
    /// Trials under the coherent hypothesis decided thermal.
    pub errors_th_given_coh: usize,
}

impl CurvePoint {
    pub fn err_coh_given_th(&self) -> f64 {
        self.errors_coh_given_th as f64 / self.trials as f64
    }

    pub fn err_th_given_coh(&self) -> f64 {
        self.errors_th_given_coh as f64 / self.trials as f64
    }

    /// Equal-prior error estimate.
    pub fn perr_hat(&self) -> f64 {
        (self.err_coh_given_th() + self.err_th_given_coh()) / 2.0
    }

    /// Delta-method variance of `ln perr_hat`.
    fn log_variance(&self) -> f64 {
        let (a, b) = (self.err_coh_given_th(), self.err_th_given_coh());
        let var = (a * (1.0 - a) + b * (1.0 - b)) / (4.0 * self.trials as f64);
        let p = self.perr_hat();
        var / (p * p)
    }
}

/// Estimated error probability versus number of copies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    /// Sums the tallies of several curves point by point (same M values).
    pub fn pooled(curves: &[ErrorCurve]) -> ErrorCurve {
        let mut points: Vec<CurvePoint> = Vec::new();
        for c in curves {
            for p in &c.points {
                match points.iter_mut().find(|q| q.m == p.m) {
                    Some(q) => {
                        q.trials += p.trials;
                        q.errors_coh_given_th += p.errors_coh_given_th;
                        q.errors_th_given_coh += p.errors_th_given_coh;
                    }
                    None => points.push(*p),
                }
            }
        }
        points.sort_by_key(|p| p.m);
        ErrorCurve { points }
    }
}

/// Runs the M-copy trials of one replication against its datasets.
pub fn estimate_error_curve_with(
    config: &ExperimentConfig,
    data: &Datasets,
    replication: usize,
) -> Result<ErrorCurve> {
    let decider = MultiCopyDecider::build(config, data)?;
    let mut points = Vec::with_capacity(config.m_grid.len());
    for &m in &config.m_grid {
        if config.trials_per_m == 0 {
            continue;
        }
        let bound = decider.for_copies(m)?;
        let tally = (0..config.trials_per_m)
            .into_par_iter()
            .map(|trial| -> Result<(usize, usize)> {
                let mut rng =
                    config.stream(&[TRIAL_STREAM, replication as u64, m as u64, trial as u64]);
                let coh = resample(&data.coherent, m, config.with_replacement, &mut rng);
                let th = resample(&data.thermal, m, config.with_replacement, &mut rng);
                let miss_coh = bound.decide(&coh)? == Hypothesis::Thermal;
                let false_coh = bound.decide(&th)? == Hypothesis::Coherent;
                Ok((false_coh as usize, miss_coh as usize))
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        points.push(CurvePoint {
            m,
            trials: config.trials_per_m,
            errors_coh_given_th: tally.0,
            errors_th_given_coh: tally.1,
        });
    }
    Ok(ErrorCurve { points })
}

/// Generates the datasets of replication 0 and estimates its error curve.
pub fn estimate_error_curve(config: &ExperimentConfig) -> Result<ErrorCurve> {
    let data = generate_datasets(config, 0)?;
    estimate_error_curve_with(config, &data, 0)
}

fn resample(data: &[u32], m: usize, with_replacement: bool, rng: &mut ChaCha8Rng) -> Vec<u32> {
    use rand::Rng;
    if with_replacement {
        (0..m)
            .map(|_| data[rng.random_range(0..data.len())])
            .collect()
    } else {
        index::sample(rng, data.len(), m)
            .into_iter()
            .map(|i| data[i])
            .collect()
    }
}

/// Least-squares fit of `perr = a exp(-M xi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub a: f64,
    pub xi: f64,
    /// Standard error of `xi`: the spread across replications when several
    /// are combined, otherwise the fit's own estimate.
    pub stderr_xi: f64,
    pub n_points_used: usize,
    /// Weighted RMS residual of `ln(2 perr)`.
    pub residual_rms: f64,
}

/// Fits `ln(2 perr_hat) = ln a - M xi` by weighted least squares, each point
/// weighted by the inverse delta-method variance of `ln perr_hat`. Points with
/// no errors are skipped.
pub fn fit_exponential(curve: &ErrorCurve) -> Result<ExpFit> {
    let usable: Vec<(f64, f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.trials > 0 && p.perr_hat() > 0.0)
        .map(|p| {
            let var = p.log_variance();
            let w = if var > 0.0 {
                1.0 / var
            } else {
                p.trials as f64
            };
            (p.m as f64, (2.0 * p.perr_hat()).ln(), w)
        })
        .collect();
    fit_weighted(&usable)
}

fn fit_weighted(pts: &[(f64, f64, f64)]) -> Result<ExpFit> {
    let distinct_m = pts.iter().any(|p| p.0 != pts[0].0);
    if pts.len() < 2 || !distinct_m {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let w_sum: f64 = pts.iter().map(|p| p.2).sum();
    let m_bar = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / w_sum;
    let y_bar = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / w_sum;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - m_bar).powi(2)).sum();
    let sxy: f64 = pts
        .iter()
        .map(|p| p.2 * (p.0 - m_bar) * (p.1 - y_bar))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * m_bar;
    let rss: f64 = pts
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = pts.len().saturating_sub(2);
    let stderr_xi = if dof > 0 {
        (rss / dof as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ExpFit {
        a: intercept.exp(),
        xi: -slope,
        stderr_xi,
        n_points_used: pts.len(),
        residual_rms: (rss / w_sum).sqrt(),
    })
}

/// Outcome of all replications at one photon number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicatedRun {
    pub nbar_r: f64,
    pub receiver: ReceiverKind,
    pub curves: Vec<ErrorCurve>,
    /// One entry per replication; `None` where too few points had errors.
    pub fits: Vec<Option<ExpFit>>,
    /// Mean over fitted replications, with the standard deviation across them
    /// as `stderr_xi`.
    pub summary: ExpFit,
    /// Exact exponent of the simulated receiver and detector.
    pub xi_theory: f64,
}

impl ReplicatedRun {
    pub fn pooled_curve(&self) -> ErrorCurve {
        ErrorCurve::pooled(&self.curves)
    }
}

/// Runs every replication of `config` and combines the fits.
pub fn run_replicated(config: &ExperimentConfig) -> Result<ReplicatedRun> {
    config.validate()?;
    let mut curves = Vec::with_capacity(config.replications);
    for rep in 0..config.replications {
        let data = generate_datasets(config, rep)?;
        curves.push(estimate_error_curve_with(config, &data, rep)?);
    }
    let fits: Vec<Option<ExpFit>> = curves.iter().map(|c| fit_exponential(c).ok()).collect();
    let ok: Vec<ExpFit> = fits.iter().flatten().copied().collect();
    let summary = match ok.len() {
        0 => return Err(Error::TooFewPoints(0)),
        1 => ok[0],
        n => {
            let mean = |f: fn(&ExpFit) -> f64| ok.iter().map(f).sum::<f64>() / n as f64;
            let xi = mean(|f| f.xi);
            let var = ok.iter().map(|f| (f.xi - xi).powi(2)).sum::<f64>() / (n - 1) as f64;
            ExpFit {
                a: mean(|f| f.a),
                xi,
                stderr_xi: var.sqrt(),
                n_points_used: ok.iter().map(|f| f.n_points_used).sum(),
                residual_rms: mean(|f| f.residual_rms),
            }
        }
    };
    let xi_theory =
        receiver_exponent(&config.receiver_spec()?, config.nbar_r, &config.detector)?.xi;
    Ok(ReplicatedRun {
        nbar_r: config.nbar_r,
        receiver: config.receiver,
        curves,
        fits,
        summary,
        xi_theory,
    })
}

/// Runs the full pipeline for every photon number and receiver, with the
/// remaining settings taken from `base`.
pub fn sweep_exponents(
    nbar_grid: &[f64],
    receivers: &[ReceiverKind],
    base: &ExperimentConfig,
) -> Result<Vec<ReplicatedRun>> {
    let mut out = Vec::with_capacity(nbar_grid.len() * receivers.len());
    for &nbar_r in nbar_grid {
        for &receiver in receivers {
            let config = ExperimentConfig {
                nbar_r,
                receiver,
                ..base.clone()
            };
            out.push(run_replicated(&config)?);
        }
    }
    Ok(out)
}

pub const CURVE_HEADER: [&str; 7] = [
    "nbar_r",
    "receiver",
    "M",
    "trials",
    "perr_hat",
    "err_coh_given_th",
    "err_th_given_coh",
];
pub const SUMMARY_HEADER: [&str; 6] = [
    "nbar_r",
    "receiver",
    "xi_fit",
    "xi_stderr",
    "a_fit",
    "xi_theory",
];

/// Pooled error curves, one row per (photon number, receiver, M).
pub fn curve_table(runs: &[ReplicatedRun]) -> CsvTable {
    let mut table = CsvTable::new(&CURVE_HEADER);
    for run in runs {
        for p in run.pooled_curve().points {
            table.push(vec![
                fmt_real(run.nbar_r),
                run.receiver.name().to_string(),
                p.m.to_string(),
                p.trials.to_string(),
                fmt_real(p.perr_hat()),
                fmt_real(p.err_coh_given_th()),
                fmt_real(p.err_th_given_coh()),
            ]);
        }
    }
    table
}

/// Fitted and exact exponents, one row per (photon number, receiver).
pub fn summary_table(runs: &[ReplicatedRun]) -> CsvTable {
    let mut table = CsvTable::new(&SUMMARY_HEADER);
    for run in runs {
        table.push(vec![
            fmt_real(run.nbar_r),
            run.receiver.name().to_string(),
            fmt_real(run.summary.xi),
            fmt_real(run.summary.stderr_xi),
            fmt_real(run.summary.a),
            fmt_real(run.xi_theory),
        ]);
    }
    table
}

/// Writes both tables; convenience for callers that do not need the rows.
pub fn write_tables<W: Write, V: Write>(
    runs: &[ReplicatedRun],
    curve: W,
    summary: V,
) -> std::io::Result<()> {
    curve_table(runs).write_to(curve)?;
    summary_table(runs).write_to(summary)
}
