//! Photon-counting distributions for displaced coherent and displaced thermal
//! light, detector imperfections, and count sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, wide, Real};

/// Probability mass function over detected photon counts `0..=cutoff`.
///
/// `tail_mass` is the probability of a count above `cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonPmf<T> {
    probs: Vec<T>,
    tail_mass: T,
}

impl<T: Real> PhotonPmf<T> {
    /// Wrap raw probabilities; the tail is whatever the entries leave of 1.
    pub fn from_probs(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Degenerate("empty probability vector"));
        }
        if let Some(bad) = probs.iter().find(|p| !(**p >= T::zero())) {
            return Err(Error::domain("probability", ">= 0", wide(*bad)));
        }
        let total = probs.iter().fold(T::zero(), |a, &p| a + p);
        if total > T::one() + lit(1e-10) {
            return Err(Error::domain("total probability", "<= 1", wide(total)));
        }
        let tail_mass = (T::one() - total).max(T::zero());
        Ok(PhotonPmf { probs, tail_mass })
    }

    /// Normalized histogram of observed counts.
    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyDataset("count"));
        }
        let top = *counts.iter().max().unwrap_or(&0) as usize;
        let mut hist = vec![0usize; top + 1];
        for &c in counts {
            hist[c as usize] += 1;
        }
        let n = count::<T>(counts.len());
        Ok(PhotonPmf {
            probs: hist.into_iter().map(|h| count::<T>(h) / n).collect(),
            tail_mass: T::zero(),
        })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn cutoff(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    /// Probability of exactly `n` counts (zero beyond the cutoff).
    pub fn prob(&self, n: usize) -> T {
        self.probs.get(n).copied().unwrap_or_else(T::zero)
    }

    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .fold(T::zero(), |a, (n, &p)| a + count::<T>(n) * p)
    }

    pub fn variance(&self) -> T {
        let mean = self.mean();
        self.probs.iter().enumerate().fold(T::zero(), |a, (n, &p)| {
            let d = count::<T>(n) - mean;
            a + d * d * p
        })
    }

    /// Same distribution with the support extended by zeros to `cutoff`.
    /// Never shrinks.
    pub fn padded_to(&self, cutoff: usize) -> Self {
        let mut probs = self.probs.clone();
        if probs.len() < cutoff + 1 {
            probs.resize(cutoff + 1, T::zero());
        }
        PhotonPmf {
            probs,
            tail_mass: self.tail_mass,
        }
    }

    /// The probabilities plus the tail as one extra outcome.
    pub fn with_tail_bin(&self) -> Vec<T> {
        let mut v = self.probs.clone();
        v.push(self.tail_mass);
        v
    }

    fn from_terms(probs: Vec<T>) -> Self {
        let total = probs.iter().fold(T::zero(), |a, &p| a + p);
        PhotonPmf {
            probs,
            tail_mass: (T::one() - total).max(T::zero()),
        }
    }
}

/// Poisson distribution truncated at `cutoff`.
pub fn poisson_pmf<T: Real>(mean: T, cutoff: usize) -> PhotonPmf<T> {
    let mut probs = Vec::with_capacity(cutoff + 1);
    let mut term = (-mean).exp();
    for n in 0..=cutoff {
        probs.push(term);
        term = term * mean / count::<T>(n + 1);
    }
    PhotonPmf::from_terms(probs)
}

/// Count distribution of `D(-beta) |sqrt(nbar)>`: Poisson with mean
/// `(sqrt(nbar) - beta)^2`.
pub fn displaced_coherent_pmf<T: Real>(nbar: T, beta: T, cutoff: usize) -> PhotonPmf<T> {
    let shift = nbar.sqrt() - beta;
    poisson_pmf(shift * shift, cutoff)
}

/// Count distribution of a thermal state of mean `nbar` displaced by `beta`
/// (noncentral Bose-Einstein / Laguerre distribution):
///
/// `P(n) = nbar^n / (1+nbar)^(n+1) * exp(-beta^2/(1+nbar)) * L_n(-beta^2 / (nbar (1+nbar)))`.
///
/// The recurrence runs on `l_n = r^n L_n(-y)` with `r = nbar/(1+nbar)`, which
/// stays finite as `nbar -> 0` and reduces to Poisson(`beta^2`) there.
pub fn displaced_thermal_pmf<T: Real>(nbar: T, beta: T, cutoff: usize) -> PhotonPmf<T> {
    let one = T::one();
    let r = nbar / (one + nbar);
    let c = beta * beta / ((one + nbar) * (one + nbar));
    let prefactor = (-beta * beta / (one + nbar)).exp() / (one + nbar);
    let mut probs = Vec::with_capacity(cutoff + 1);
    let mut prev = T::zero();
    let mut cur = one;
    for n in 0..=cutoff {
        probs.push(prefactor * cur);
        let nf = count::<T>(n);
        let next = ((lit::<T>(2.0) * nf + one) * r + c) * cur - nf * r * r * prev;
        prev = cur;
        cur = (next / (nf + one)).max(T::zero());
    }
    PhotonPmf::from_terms(probs)
}

/// Bose-Einstein distribution `nbar^n / (nbar+1)^(n+1)`.
pub fn bose_einstein_pmf<T: Real>(nbar: T, cutoff: usize) -> PhotonPmf<T> {
    displaced_thermal_pmf(nbar, T::zero(), cutoff)
}

/// Smallest cutoff at which both the displaced coherent and displaced
/// thermal distributions leave less than `1e-14` in the tail.
pub fn default_cutoff(nbar: f64, beta: f64) -> usize {
    const TAIL: f64 = 1e-14;
    const MAX: usize = 10_000;
    let mut cutoff = 8;
    while cutoff < MAX {
        let coh = displaced_coherent_pmf(nbar, beta, cutoff);
        let th = displaced_thermal_pmf(nbar, beta, cutoff);
        if coh.tail_mass() < TAIL && th.tail_mass() < TAIL {
            break;
        }
        cutoff = (cutoff as f64 * 1.25).ceil() as usize;
    }
    cutoff.min(MAX)
}

/// Detector non-idealities applied after the ideal photon-number measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Overall efficiency, in (0, 1].
    pub efficiency: f64,
    /// Mean extraneous (stray light + dark) counts per measurement window.
    pub dark_mean: f64,
    /// Largest count a window can register.
    pub saturation: u32,
}

impl DetectorModel {
    /// Measured extraneous count rate per 1 us window.
    pub const LAB_DARK_MEAN: f64 = 4e-4;
    /// 1 us window / 50 ns dead time.
    pub const LAB_SATURATION: u32 = 20;

    pub fn new(efficiency: f64, dark_mean: f64, saturation: u32) -> Result<Self> {
        let mut problems = Vec::new();
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            problems.push(format!("efficiency must be in (0, 1], got {efficiency}"));
        }
        if !(dark_mean >= 0.0 && dark_mean.is_finite()) {
            problems.push(format!(
                "dark_mean must be finite and >= 0, got {dark_mean}"
            ));
        }
        if saturation < 1 {
            problems.push("saturation must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(DetectorModel {
                efficiency,
                dark_mean,
                saturation,
            })
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// Unit efficiency, no extraneous counts, no saturation.
    pub fn ideal() -> Self {
        DetectorModel {
            efficiency: 1.0,
            dark_mean: 0.0,
            saturation: u32::MAX,
        }
    }

    /// Lab dark counts and dead-time cap, with losses already folded into the
    /// received photon number.
    pub fn laboratory() -> Self {
        DetectorModel {
            efficiency: 1.0,
            dark_mean: Self::LAB_DARK_MEAN,
            saturation: Self::LAB_SATURATION,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.efficiency == 1.0 && self.dark_mean == 0.0 && self.saturation == u32::MAX
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Binomial thinning with the detector efficiency, convolution with Poisson
/// extraneous counts, then folding of counts above saturation into the
/// saturation bin.
pub fn apply_detector<T: Real>(pmf: &PhotonPmf<T>, det: &DetectorModel) -> PhotonPmf<T> {
    let eta: T = lit(det.efficiency);
    let mut probs = if det.efficiency >= 1.0 {
        pmf.probs.clone()
    } else {
        let miss = T::one() - eta;
        let mut out = vec![T::zero(); pmf.probs.len()];
        for (n, &pn) in pmf.probs.iter().enumerate() {
            if pn == T::zero() {
                continue;
            }
            // binomial(n, eta) row, accumulated in log space
            let odds = eta.ln() - miss.ln();
            let mut log_b = count::<T>(n) * miss.ln();
            for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
                *slot = *slot + pn * log_b.exp();
                if k < n {
                    log_b = log_b + count::<T>(n - k).ln() - count::<T>(k + 1).ln() + odds;
                }
            }
        }
        out
    };

    if det.dark_mean > 0.0 {
        let nu: T = lit(det.dark_mean);
        let mut kernel = vec![(-nu).exp()];
        let mut kept = kernel[0];
        while T::one() - kept > lit(1e-16) && kernel.len() < 200 {
            let k = kernel.len();
            let next = kernel[k - 1] * nu / count::<T>(k);
            kernel.push(next);
            kept = kept + next;
        }
        let mut out = vec![T::zero(); probs.len() + kernel.len() - 1];
        for (n, &pn) in probs.iter().enumerate() {
            for (k, &pk) in kernel.iter().enumerate() {
                out[n + k] = out[n + k] + pn * pk;
            }
        }
        probs = out;
    }

    let total = probs.iter().fold(T::zero(), |a, &p| a + p);
    let mut tail = (T::one() - total).max(T::zero());
    let sat = det.saturation as usize;
    if probs.len() > sat + 1 {
        let folded = probs[sat..].iter().fold(T::zero(), |a, &p| a + p) + tail;
        probs.truncate(sat + 1);
        probs[sat] = folded;
        tail = T::zero();
    }
    let norm = probs.iter().fold(tail, |a, &p| a + p);
    if norm > T::zero() {
        for p in probs.iter_mut() {
            *p = *p / norm;
        }
        tail = tail / norm;
    }
    PhotonPmf {
        probs,
        tail_mass: tail,
    }
}

/// Inverse-CDF sampler over a [`PhotonPmf`]. Tail mass lands in the cutoff bin.
#[derive(Debug, Clone)]
pub struct CountSampler {
    cdf: Vec<f64>,
}

impl CountSampler {
    pub fn new<T: Real>(pmf: &PhotonPmf<T>) -> Self {
        let mut acc = 0.0;
        let cdf = pmf
            .probs()
            .iter()
            .map(|&p| {
                acc += wide(p);
                acc
            })
            .collect();
        CountSampler { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as u32
    }
}

/// `n_samples` i.i.d. counts drawn from `pmf`.
pub fn sample_counts<T: Real, R: Rng + ?Sized>(
    pmf: &PhotonPmf<T>,
    rng: &mut R,
    n_samples: usize,
) -> Vec<u32> {
    let sampler = CountSampler::new(pmf);
    (0..n_samples).map(|_| sampler.sample(rng)).collect()
}
