//! Receiver models: Kennedy, generalized Kennedy (GK) and direct detection.
//!
//! Every receiver displaces the incoming copy by `-beta` and counts photons.
//! Throughout, hypothesis 1 is the coherent state and hypothesis 2 the thermal
//! state, so `p = P(decide thermal | coherent)` and
//! `q = P(decide coherent | thermal)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decision::SingleCopyRule;
use crate::error::{Error, Result};
use crate::optimize::grid_then_golden;
use crate::photon::{
    apply_detector, default_cutoff, displaced_coherent_pmf, displaced_thermal_pmf, DetectorModel,
    PhotonPmf,
};
use crate::scalar::{lit, wide, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Kennedy,
    #[serde(rename = "gk")]
    GeneralizedKennedy,
    #[serde(rename = "dd")]
    DirectDetection,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 3] = [
        ReceiverKind::Kennedy,
        ReceiverKind::GeneralizedKennedy,
        ReceiverKind::DirectDetection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReceiverKind::Kennedy => "kennedy",
            ReceiverKind::GeneralizedKennedy => "gk",
            ReceiverKind::DirectDetection => "dd",
        }
    }

    /// Stable small integer used when deriving random streams.
    pub fn index(self) -> u64 {
        match self {
            ReceiverKind::Kennedy => 0,
            ReceiverKind::GeneralizedKennedy => 1,
            ReceiverKind::DirectDetection => 2,
        }
    }

    /// Kennedy and GK make per-copy hard decisions; DD keeps the counts.
    pub fn is_hard_decision(self) -> bool {
        !matches!(self, ReceiverKind::DirectDetection)
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kennedy" | "ken" => Ok(ReceiverKind::Kennedy),
            "gk" | "generalized-kennedy" | "generalized_kennedy" => {
                Ok(ReceiverKind::GeneralizedKennedy)
            }
            "dd" | "direct" | "direct-detection" => Ok(ReceiverKind::DirectDetection),
            other => Err(Error::InvalidConfig(vec![format!(
                "unknown receiver '{other}'"
            )])),
        }
    }
}

/// A receiver kind together with its displacement magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverSpec<T> {
    pub kind: ReceiverKind,
    pub beta: T,
}

impl<T: Real> ReceiverSpec<T> {
    /// Displacement that nulls the coherent state.
    pub fn kennedy(nbar_r: T) -> Self {
        ReceiverSpec {
            kind: ReceiverKind::Kennedy,
            beta: nbar_r.max(T::zero()).sqrt(),
        }
    }

    pub fn generalized_kennedy(beta: T) -> Self {
        ReceiverSpec {
            kind: ReceiverKind::GeneralizedKennedy,
            beta,
        }
    }

    pub fn direct_detection() -> Self {
        ReceiverSpec {
            kind: ReceiverKind::DirectDetection,
            beta: T::zero(),
        }
    }

    /// The receiver of `kind` tuned for mean photon number `nbar_r`; GK gets
    /// its error-minimizing displacement.
    pub fn for_kind(kind: ReceiverKind, nbar_r: T) -> Result<Self> {
        Ok(match kind {
            ReceiverKind::Kennedy => Self::kennedy(nbar_r),
            ReceiverKind::GeneralizedKennedy => {
                Self::generalized_kennedy(optimize_gk_beta(nbar_r)?)
            }
            ReceiverKind::DirectDetection => Self::direct_detection(),
        })
    }
}

/// Single-copy conditional errors and their bias parameterization
/// `p = (1 + bias) perr`, `q = (1 - bias) perr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleCopyStats<T> {
    /// P(decide hypothesis 2 | hypothesis 1).
    pub p: T,
    /// P(decide hypothesis 1 | hypothesis 2).
    pub q: T,
    pub perr: T,
    pub bias: T,
}

impl<T: Real> SingleCopyStats<T> {
    pub fn from_conditional(p: T, q: T) -> Self {
        let perr = (p + q) / lit(2.0);
        let bias = if p + q > T::zero() {
            (p - q) / (p + q)
        } else {
            T::zero()
        };
        SingleCopyStats { p, q, perr, bias }
    }

    /// Same measurement with the hypotheses relabelled; flips the bias sign.
    pub fn swapped(&self) -> Self {
        Self::from_conditional(self.q, self.p)
    }
}

/// Count distributions under the coherent and thermal hypotheses, passed
/// through the detector. Both share one cutoff.
pub fn likelihoods<T: Real>(
    spec: &ReceiverSpec<T>,
    nbar_r: T,
    det: &DetectorModel,
) -> Result<(PhotonPmf<T>, PhotonPmf<T>)> {
    if !(nbar_r >= T::zero() && nbar_r.is_finite()) {
        return Err(Error::domain(
            "mean photon number",
            "finite and >= 0",
            wide(nbar_r),
        ));
    }
    if !(spec.beta >= T::zero() && spec.beta.is_finite()) {
        return Err(Error::domain(
            "displacement",
            "finite and >= 0",
            wide(spec.beta),
        ));
    }
    let cutoff = default_cutoff(wide(nbar_r), wide(spec.beta));
    let coh = apply_detector(&displaced_coherent_pmf(nbar_r, spec.beta, cutoff), det);
    let th = apply_detector(&displaced_thermal_pmf(nbar_r, spec.beta, cutoff), det);
    let common = coh.cutoff().max(th.cutoff());
    Ok((coh.padded_to(common), th.padded_to(common)))
}

/// Vacuum-or-not conditional errors for displacement `beta`:
/// `p = 1 - exp(-(sqrt(nbar) - beta)^2)`, `q = exp(-beta^2/(1+nbar)) / (1+nbar)`.
pub fn vacuum_or_not_stats<T: Real>(nbar_r: T, beta: T) -> SingleCopyStats<T> {
    let shift = nbar_r.sqrt() - beta;
    let p = -(-(shift * shift)).exp_m1();
    let q = (-(beta * beta) / (T::one() + nbar_r)).exp() / (T::one() + nbar_r);
    SingleCopyStats::from_conditional(p, q)
}

fn vacuum_or_not_slope<T: Real>(nbar_r: T, beta: T) -> T {
    let shift = nbar_r.sqrt() - beta;
    let one_n = T::one() + nbar_r;
    let dp = -lit::<T>(2.0) * shift * (-(shift * shift)).exp();
    let dq = -lit::<T>(2.0) * beta / (one_n * one_n) * (-(beta * beta) / one_n).exp();
    (dp + dq) / lit(2.0)
}

/// Displacement minimizing the vacuum-or-not single-copy error over
/// `[0, sqrt(nbar) + 3]`.
///
/// A coarse grid picks the basin, golden section narrows it and bisection on
/// the analytic slope pins the stationary point.
pub fn optimize_gk_beta<T: Real>(nbar_r: T) -> Result<T> {
    if !(nbar_r > T::zero() && nbar_r.is_finite()) {
        return Err(Error::domain(
            "mean photon number",
            "finite and > 0",
            wide(nbar_r),
        ));
    }
    let hi = nbar_r.sqrt() + lit(3.0);
    let n_grid = 600;
    let min = grid_then_golden(
        |b| vacuum_or_not_stats(nbar_r, b).perr,
        T::zero(),
        hi,
        n_grid,
        lit(1e-7),
    )?;
    let step = hi / lit(n_grid as f64);
    if min.x > hi - step {
        return Err(Error::Bracket {
            lo: 0.0,
            hi: wide(hi),
        });
    }
    let mut a = (min.x - lit(1e-5)).max(T::zero());
    let mut b = min.x + lit(1e-5);
    let slope = |x| vacuum_or_not_slope(nbar_r, x);
    if slope(a) >= T::zero() || slope(b) <= T::zero() {
        // boundary minimum or flat region: golden section result stands
        return Ok(min.x);
    }
    for _ in 0..200 {
        let mid = (a + b) / lit(2.0);
        if slope(mid) < T::zero() {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= T::epsilon() * lit(4.0) * b.max(T::one()) {
            break;
        }
    }
    Ok((a + b) / lit(2.0))
}

/// Exact conditional errors of `rule` applied to the receiver's likelihoods.
pub fn single_copy_stats<T: Real>(
    spec: &ReceiverSpec<T>,
    nbar_r: T,
    det: &DetectorModel,
    rule: &SingleCopyRule,
) -> Result<SingleCopyStats<T>> {
    let (coh, th) = likelihoods(spec, nbar_r, det)?;
    Ok(rule.conditional_errors(&coh, &th))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::mldr_from_likelihoods;
    use crate::photon::{bose_einstein_pmf, poisson_pmf};
    use approx::assert_abs_diff_eq;

    #[test]
    fn kennedy_likelihood_is_vacuum() {
        for nbar in [0.05, 0.2, 1.0] {
            let (coh, _) =
                likelihoods(&ReceiverSpec::kennedy(nbar), nbar, &DetectorModel::ideal()).unwrap();
            assert_eq!(coh.probs()[0], 1.0);
            assert!(coh.probs()[1..].iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn direct_detection_branches() {
        let (coh, th) = likelihoods(
            &ReceiverSpec::direct_detection(),
            0.2f64,
            &DetectorModel::ideal(),
        )
        .unwrap();
        let poi = poisson_pmf(0.2, coh.cutoff());
        let be = bose_einstein_pmf(0.2, th.cutoff());
        for n in 0..=coh.cutoff() {
            assert_abs_diff_eq!(coh.probs()[n], poi.probs()[n], epsilon = 1e-15);
            assert_abs_diff_eq!(th.probs()[n], be.probs()[n], epsilon = 1e-15);
        }
    }

    #[test]
    fn gk_thermal_zero_count_limit() {
        let spec = ReceiverSpec::generalized_kennedy(0.5f64.sqrt());
        let (_, th) = likelihoods(&spec, 1e-9, &DetectorModel::ideal()).unwrap();
        assert_abs_diff_eq!(th.probs()[0], (-0.5f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn gk_beta_photon_starved() {
        let beta = optimize_gk_beta(1e-4f64).unwrap();
        assert!((beta - 0.5f64.sqrt()).abs() < 0.01, "beta = {beta}");
        let stats = vacuum_or_not_stats(1e-4, beta);
        assert!(
            (stats.bias - (-0.2131)).abs() < 0.01,
            "bias = {}",
            stats.bias
        );
    }

    #[test]
    fn gk_beta_is_stationary_and_beats_kennedy() {
        for nbar in [1e-3f64, 0.05, 0.2, 0.6, 1.0, 2.0] {
            let beta = optimize_gk_beta(nbar).unwrap();
            let h = 1e-5;
            let d = (vacuum_or_not_stats(nbar, beta + h).perr
                - vacuum_or_not_stats(nbar, beta - h).perr)
                / (2.0 * h);
            assert!(d.abs() < 1e-6, "nbar {nbar}: slope {d}");
            assert!(
                vacuum_or_not_stats(nbar, beta).perr <= vacuum_or_not_stats(nbar, nbar.sqrt()).perr
            );
        }
    }

    #[test]
    fn gk_rejects_nonpositive_nbar() {
        assert!(optimize_gk_beta(0.0f64).is_err());
        assert!(optimize_gk_beta(-1.0f64).is_err());
    }

    #[test]
    fn kennedy_stats_maximally_biased() {
        let nbar = 0.3f64;
        let rule = SingleCopyRule::vacuum_or_not(40);
        let s = single_copy_stats(
            &ReceiverSpec::kennedy(nbar),
            nbar,
            &DetectorModel::ideal(),
            &rule,
        )
        .unwrap();
        let fid = (-nbar / (1.0 + nbar)).exp() / (1.0 + nbar);
        assert_eq!(s.p, 0.0);
        assert_abs_diff_eq!(s.q, fid, epsilon = 1e-14);
        // |b| = 1; +1 once the thermal state is labelled hypothesis 1
        assert_abs_diff_eq!(s.bias, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.swapped().bias, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gk_stats_photon_starved_limit() {
        let spec = ReceiverSpec::generalized_kennedy(0.5f64.sqrt());
        let rule = SingleCopyRule::vacuum_or_not(40);
        let s = single_copy_stats(&spec, 1e-10, &DetectorModel::ideal(), &rule).unwrap();
        assert_abs_diff_eq!(s.p, 1.0 - (-0.5f64).exp(), epsilon = 1e-4);
        assert_abs_diff_eq!(s.q, (-0.5f64).exp(), epsilon = 1e-4);
        assert_abs_diff_eq!(s.p, 0.3935, epsilon = 1e-4);
    }

    #[test]
    fn symmetric_stats_have_zero_bias() {
        let s = SingleCopyStats::from_conditional(0.2f64, 0.2);
        assert_eq!(s.bias, 0.0);
        let t = SingleCopyStats::from_conditional(0.3f64, 0.1);
        assert_abs_diff_eq!(t.p, (1.0 + t.bias) * t.perr, epsilon = 1e-12);
        assert_abs_diff_eq!(t.q, (1.0 - t.bias) * t.perr, epsilon = 1e-12);
    }

    #[test]
    fn single_copy_error_hierarchy() {
        for i in 0..=19 {
            let nbar = 0.05 + 0.05 * i as f64;
            let det = DetectorModel::ideal();
            let err = |spec: ReceiverSpec<f64>| {
                let (coh, th) = likelihoods(&spec, nbar, &det).unwrap();
                let rule = mldr_from_likelihoods(&coh, &th).unwrap();
                rule.conditional_errors(&coh, &th).perr
            };
            let gk = err(ReceiverSpec::for_kind(ReceiverKind::GeneralizedKennedy, nbar).unwrap());
            let ken = err(ReceiverSpec::kennedy(nbar));
            let dd = err(ReceiverSpec::direct_detection());
            assert!(
                gk <= ken + 1e-12 && ken <= dd + 1e-12,
                "nbar {nbar}: {gk} {ken} {dd}"
            );
        }
    }

    #[test]
    fn receiver_names_round_trip() {
        for kind in ReceiverKind::ALL {
            assert_eq!(kind.name().parse::<ReceiverKind>().unwrap(), kind);
        }
        assert!("homodyne".parse::<ReceiverKind>().is_err());
    }
}
