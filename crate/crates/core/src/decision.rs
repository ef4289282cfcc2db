//! Maximum-likelihood decision rules, single copy and multi copy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon::PhotonPmf;
use crate::receivers::SingleCopyStats;
use crate::scalar::{count, lit, wide, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    Coherent,
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSource {
    Theoretical,
    EmpiricalHistogram,
}

/// Per-count verdict table. Counts above the cutoff follow the cutoff bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleCopyRule {
    decide_coh: Vec<bool>,
    pub source: RuleSource,
}

impl SingleCopyRule {
    pub fn from_table(decide_coh: Vec<bool>, source: RuleSource) -> Result<Self> {
        if decide_coh.is_empty() {
            return Err(Error::Degenerate("empty decision table"));
        }
        Ok(SingleCopyRule { decide_coh, source })
    }

    /// Decide coherent on zero counts, thermal otherwise.
    pub fn vacuum_or_not(cutoff: usize) -> Self {
        let mut decide_coh = vec![false; cutoff.max(1) + 1];
        decide_coh[0] = true;
        SingleCopyRule {
            decide_coh,
            source: RuleSource::Theoretical,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.decide_coh.len() - 1
    }

    pub fn table(&self) -> &[bool] {
        &self.decide_coh
    }

    pub fn decides_coherent(&self, count: u32) -> bool {
        let idx = (count as usize).min(self.cutoff());
        self.decide_coh[idx]
    }

    pub fn decide(&self, count: u32) -> Hypothesis {
        if self.decides_coherent(count) {
            Hypothesis::Coherent
        } else {
            Hypothesis::Thermal
        }
    }

    /// `p = P(decide thermal | coherent)`, `q = P(decide coherent | thermal)`;
    /// tail mass is charged to the cutoff bin's verdict.
    pub fn conditional_errors<T: Real>(
        &self,
        coh: &PhotonPmf<T>,
        th: &PhotonPmf<T>,
    ) -> SingleCopyStats<T> {
        let top = coh.cutoff().max(th.cutoff()).max(self.cutoff());
        let mut p = T::zero();
        let mut q = T::zero();
        for n in 0..=top {
            if self.decides_coherent(n as u32) {
                q = q + th.prob(n);
            } else {
                p = p + coh.prob(n);
            }
        }
        if self.decides_coherent(coh.cutoff() as u32) {
            // coherent tail decided coherent: no error
        } else {
            p = p + coh.tail_mass();
        }
        if self.decides_coherent(th.cutoff() as u32) {
            q = q + th.tail_mass();
        }
        SingleCopyStats::from_conditional(p, q)
    }
}

/// Decide coherent at count `n` iff `coh[n] >= th[n]`.
pub fn mldr_from_likelihoods<T: Real>(
    coh: &PhotonPmf<T>,
    th: &PhotonPmf<T>,
) -> Result<SingleCopyRule> {
    if coh.cutoff() != th.cutoff() {
        return Err(Error::DimensionMismatch(coh.cutoff(), th.cutoff()));
    }
    let decide_coh = coh
        .probs()
        .iter()
        .zip(th.probs())
        .map(|(c, t)| c >= t)
        .collect();
    Ok(SingleCopyRule {
        decide_coh,
        source: RuleSource::Theoretical,
    })
}

/// Binomial likelihood-ratio threshold on the number of per-copy coherent
/// verdicts: decide coherent when `n_coh > n*` with
/// `n* = M ln[(1-q)/(1-p)] / ln[p(1-q) / (q(1-p))]`.
///
/// `p_coh = P(decide coh | coh)`, `q_coh = P(decide coh | th)`;
/// requires `0 < q_coh < p_coh < 1`.
pub fn binomial_threshold<T: Real>(p_coh: T, q_coh: T, m: usize) -> Result<T> {
    if !(q_coh > T::zero() && p_coh < T::one()) {
        return Err(Error::Degenerate(
            "binomial threshold needs 0 < q_coh and p_coh < 1",
        ));
    }
    if !(q_coh < p_coh) {
        return Err(Error::Degenerate("binomial threshold needs q_coh < p_coh"));
    }
    let one = T::one();
    let num = ((one - q_coh) / (one - p_coh)).ln();
    let den = (p_coh * (one - q_coh) / (q_coh * (one - p_coh))).ln();
    Ok(count::<T>(m) * num / den)
}

/// Multi-copy hard-decision plan: binomial MLDR on the number of per-copy
/// coherent verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiCopyPlan<T> {
    pub m: usize,
    pub p_coh: T,
    pub q_coh: T,
    pub threshold: T,
}

impl<T: Real> MultiCopyPlan<T> {
    /// Builds the plan; the boundary cases `p_coh = 1` (Kennedy: coherent only
    /// if every copy says so) and `q_coh = 0` (one coherent verdict suffices)
    /// get the limiting thresholds `M - 1` and `0`.
    pub fn new(m: usize, p_coh: T, q_coh: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("number of copies", ">= 1", 0.0));
        }
        for (name, v) in [("p_coh", p_coh), ("q_coh", q_coh)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::domain(name, "in [0, 1]", wide(v)));
            }
        }
        if !(p_coh > q_coh) {
            return Err(Error::Degenerate(
                "per-copy verdicts carry no evidence (p_coh <= q_coh)",
            ));
        }
        let threshold = if p_coh == T::one() {
            count::<T>(m - 1)
        } else if q_coh == T::zero() {
            T::zero()
        } else {
            binomial_threshold(p_coh, q_coh, m)?
        };
        Ok(MultiCopyPlan {
            m,
            p_coh,
            q_coh,
            threshold,
        })
    }

    /// Plan from single-copy stats in the coherent-first labelling.
    pub fn from_stats(m: usize, stats: &SingleCopyStats<T>) -> Result<Self> {
        Self::new(m, T::one() - stats.p, stats.q)
    }

    /// Strict `n_coh > n*`; a count within rounding of `n*` is a tie and goes
    /// to thermal.
    pub fn decide(&self, n_coh: usize) -> Hypothesis {
        let slack = T::epsilon() * lit(64.0) * count::<T>(self.m.max(1));
        if count::<T>(n_coh) > self.threshold + slack {
            Hypothesis::Coherent
        } else {
            Hypothesis::Thermal
        }
    }
}

/// Per-copy hard decisions followed by the binomial MLDR.
pub fn decide_multicopy_hard<T: Real>(
    counts: &[u32],
    rule: &SingleCopyRule,
    plan: &MultiCopyPlan<T>,
) -> Result<Hypothesis> {
    if counts.len() != plan.m {
        return Err(Error::LengthMismatch {
            expected: plan.m,
            got: counts.len(),
        });
    }
    let n_coh = counts.iter().filter(|&&c| rule.decides_coherent(c)).count();
    Ok(plan.decide(n_coh))
}

/// Per-count log-likelihood ratios `ln coh[n] - ln th[n]` for soft decisions.
///
/// Zero likelihood under one hypothesis gives an infinite ratio; zero under
/// both is recorded as NaN and rejected when observed.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftDecoder<T> {
    llr: Vec<T>,
}

impl<T: Real> SoftDecoder<T> {
    pub fn new(coh: &PhotonPmf<T>, th: &PhotonPmf<T>) -> Self {
        let top = coh.cutoff().max(th.cutoff());
        let llr = (0..=top)
            .map(|n| {
                let (c, t) = (coh.prob(n), th.prob(n));
                match (c > T::zero(), t > T::zero()) {
                    (true, true) => c.ln() - t.ln(),
                    (true, false) => T::infinity(),
                    (false, true) => T::neg_infinity(),
                    (false, false) => T::nan(),
                }
            })
            .collect();
        SoftDecoder { llr }
    }

    /// Decoder from a precomputed ratio table; counts past the end use the
    /// last entry.
    pub fn from_llr(llr: Vec<T>) -> Result<Self> {
        if llr.is_empty() {
            return Err(Error::Degenerate("empty log-likelihood-ratio table"));
        }
        Ok(SoftDecoder { llr })
    }

    pub fn llr(&self, count: u32) -> T {
        self.llr[(count as usize).min(self.llr.len() - 1)]
    }

    /// Coherent iff the summed log-likelihood ratio is `>= 0`.
    pub fn decide(&self, counts: &[u32]) -> Result<Hypothesis> {
        let mut total = T::zero();
        let mut coh_certain = false;
        let mut th_certain = false;
        for &c in counts {
            let l = self.llr(c);
            if l.is_nan() {
                return Err(Error::MalformedLikelihood(c));
            }
            if l == T::infinity() {
                coh_certain = true;
            } else if l == T::neg_infinity() {
                th_certain = true;
            } else {
                total = total + l;
            }
            if coh_certain && th_certain {
                return Err(Error::MalformedLikelihood(c));
            }
        }
        Ok(if th_certain {
            Hypothesis::Thermal
        } else if coh_certain || total >= T::zero() {
            Hypothesis::Coherent
        } else {
            Hypothesis::Thermal
        })
    }
}

/// Optimal multi-copy decision from the full count record.
pub fn decide_multicopy_soft<T: Real>(
    counts: &[u32],
    coh: &PhotonPmf<T>,
    th: &PhotonPmf<T>,
) -> Result<Hypothesis> {
    SoftDecoder::new(coh, th).decide(counts)
}
