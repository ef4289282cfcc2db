//! Soft versus hard decisions for a constant signal in white Gaussian noise.
//!
//! Each copy is reduced to its matched-filter statistic, normalized to unit
//! variance with mean `+d` or `-d`, `d = sqrt(E / 4 sigma^2)`. One copy decided
//! by sign errs with probability `Q(d)`; the sum of `M` copies errs with
//! `Q(sqrt(M) d)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::experiment::derived_rng;
use crate::report::{fmt_real, CsvTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AwgnProblem {
    /// Per-copy signal energy `E`.
    pub energy: f64,
    /// Noise spectral density `sigma^2`.
    pub noise_psd: f64,
}

impl AwgnProblem {
    pub fn new(energy: f64, noise_psd: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::domain("signal energy", "finite and > 0", energy));
        }
        if !(noise_psd > 0.0 && noise_psd.is_finite()) {
            return Err(Error::domain(
                "noise spectral density",
                "finite and > 0",
                noise_psd,
            ));
        }
        Ok(AwgnProblem { energy, noise_psd })
    }

    /// Problem with unit noise and the given `E / sigma^2`.
    pub fn from_snr(snr: f64) -> Result<Self> {
        Self::new(snr, 1.0)
    }

    pub fn snr(&self) -> f64 {
        self.energy / self.noise_psd
    }

    /// Half-separation of the normalized per-copy statistic.
    pub fn distance(&self) -> f64 {
        (self.snr() / 4.0).sqrt()
    }

    /// Single-copy sign-decision error, identical under both hypotheses.
    pub fn single_copy_error(&self) -> f64 {
        gaussian_q(self.distance())
    }
}

/// Upper tail of the standard normal distribution.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Q(x)`, finite for every finite `x`.
pub fn ln_gaussian_q(x: f64) -> f64 {
    if x < 30.0 {
        return gaussian_q(x).ln();
    }
    // asymptotic tail series, converged well below rounding for x >= 30
    let inv = 1.0 / (x * x);
    let series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv.powi(3) + 105.0 * inv.powi(4);
    -0.5 * x * x - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
}

/// `E / 8 sigma^2`.
pub fn soft_exponent(prob: &AwgnProblem) -> f64 {
    prob.snr() / 8.0
}

/// `-ln[2 sqrt(Q (1 - Q))]` with `Q = Q(sqrt(E / 4 sigma^2))`.
///
/// Near `Q = 1/2` this is evaluated as `-ln(1 - u^2) / 2` with
/// `u = 1 - 2Q = erf(d / sqrt 2)`, which keeps precision at low SNR.
pub fn hard_exponent(prob: &AwgnProblem) -> f64 {
    let u = libm::erf(prob.distance() / std::f64::consts::SQRT_2);
    if u < 0.5 {
        -0.5 * (-u * u).ln_1p()
    } else {
        let d = prob.distance();
        -0.5 * (4.0f64.ln() + ln_gaussian_q(d) + (-gaussian_q(d)).ln_1p())
    }
}

/// Exact `M`-copy soft-decision error `Q(sqrt(M E / 4 sigma^2))`.
pub fn soft_error(prob: &AwgnProblem, m: usize) -> f64 {
    gaussian_q((m as f64).sqrt() * prob.distance())
}

/// Exact `M`-copy majority-vote error; an even split decides the second
/// hypothesis.
pub fn hard_error(prob: &AwgnProblem, m: usize) -> Result<f64> {
    let eps = prob.single_copy_error();
    let half = (m / 2) as u64;
    let n = m as u64;
    let right =
        Binomial::new(1.0 - eps, n).map_err(|_| Error::Degenerate("binomial parameters"))?;
    let wrong = Binomial::new(eps, n).map_err(|_| Error::Degenerate("binomial parameters"))?;
    // first hypothesis fails with at most M/2 correct signs; the second fails
    // with more than M/2 wrong signs
    Ok(0.5 * (right.cdf(half) + wrong.sf(half)))
}

/// Monte Carlo error estimates for `M` copies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AwgnEstimate {
    pub m: usize,
    pub trials: usize,
    pub soft_errors: usize,
    pub hard_errors: usize,
}

impl AwgnEstimate {
    /// Each trial runs both hypotheses, so rates are over `2 trials` draws.
    pub fn soft_perr(&self) -> f64 {
        self.soft_errors as f64 / (2 * self.trials) as f64
    }

    pub fn hard_perr(&self) -> f64 {
        self.hard_errors as f64 / (2 * self.trials) as f64
    }

    /// Binomial standard error of a rate `p` estimated from these trials.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / (2 * self.trials) as f64).sqrt()
    }
}

/// Simulates `trials` `M`-copy experiments under each hypothesis.
pub fn simulate_awgn(
    prob: &AwgnProblem,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<AwgnEstimate> {
    if m == 0 {
        return Err(Error::domain("number of copies", ">= 1", 0.0));
    }
    let d = prob.distance();
    let (soft_errors, hard_errors) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = derived_rng(seed, &[prob.snr().to_bits(), m as u64, t as u64]);
            let mut soft = 0;
            let mut hard = 0;
            for sign in [1.0, -1.0] {
                let mut sum = 0.0;
                let mut agree = 0;
                for _ in 0..m {
                    let noise: f64 = rng.sample(StandardNormal);
                    let x = sign * d + noise;
                    sum += x;
                    agree += usize::from((x > 0.0) == (sign > 0.0));
                }
                let soft_right = (sum > 0.0) == (sign > 0.0);
                // majority of signs; even split goes to the second hypothesis
                let hard_right = if sign > 0.0 {
                    2 * agree > m
                } else {
                    2 * agree >= m
                };
                soft += usize::from(!soft_right);
                hard += usize::from(!hard_right);
            }
            (soft, hard)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(AwgnEstimate {
        m,
        trials,
        soft_errors,
        hard_errors,
    })
}

pub const CLASSICAL_HEADER: [&str; 7] = [
    "snr",
    "M",
    "soft_perr",
    "hard_perr",
    "soft_xi",
    "hard_xi",
    "ratio",
];

/// Exact errors and exponents for each `(snr, M)` pair.
pub fn classical_table(snrs: &[f64], m_grid: &[usize]) -> Result<CsvTable> {
    let mut table = CsvTable::new(&CLASSICAL_HEADER);
    for &snr in snrs {
        let prob = AwgnProblem::from_snr(snr)?;
        let (soft, hard) = (soft_exponent(&prob), hard_exponent(&prob));
        for &m in m_grid {
            table.push(vec![
                fmt_real(snr),
                m.to_string(),
                fmt_real(soft_error(&prob, m)),
                fmt_real(hard_error(&prob, m)?),
                fmt_real(soft),
                fmt_real(hard),
                fmt_real(soft / hard),
            ]);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn q_function_values() {
        assert_eq!(gaussian_q(0.0), 0.5);
        assert!((gaussian_q(1.0) / 0.15865525393145705 - 1.0).abs() < 1e-12);
        assert!((gaussian_q(2.0) / 0.02275013194817921 - 1.0).abs() < 1e-12);
        for k in 0..60 {
            let x = k as f64 * 0.1;
            assert!(gaussian_q(x) <= (-x * x / 2.0).exp() / 2.0 + 1e-16);
        }
        // deep tail keeps relative precision
        let x = 20.0f64;
        let asym = (-x * x / 2.0).exp() / (x * (2.0 * std::f64::consts::PI).sqrt())
            * (1.0 - 1.0 / (x * x) + 3.0 / x.powi(4));
        assert!((gaussian_q(x) / asym - 1.0).abs() < 1e-6);
    }

    #[test]
    fn q_function_by_quadrature() {
        // Simpson's rule on the density from x to x + 12
        for x in [0.3, 1.0, 2.5] {
            let n = 20_000;
            let h = 12.0 / n as f64;
            let f = |y: f64| (-y * y / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut s = f(x) + f(x + 12.0);
            for i in 1..n {
                s += f(x + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            assert!((s * h / 3.0 / gaussian_q(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_tail_is_continuous() {
        let below = ln_gaussian_q(30.0 - 1e-12);
        let above = ln_gaussian_q(30.0);
        assert!((below - above).abs() < 1e-9 * above.abs());
        assert!(ln_gaussian_q(100.0).is_finite());
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(soft_exponent(&AwgnProblem::new(8.0, 1.0).unwrap()), 1.0);
        assert_eq!(soft_exponent(&AwgnProblem::new(1.0, 1.0).unwrap()), 0.125);
        assert!(AwgnProblem::new(0.0, 1.0).is_err());
        let prob = AwgnProblem::from_snr(8e-4).unwrap();
        let h = hard_exponent(&prob);
        assert!((h / (8e-4 / (4.0 * std::f64::consts::PI)) - 1.0).abs() < 0.01);
        assert!((soft_exponent(&prob) / h / std::f64::consts::FRAC_PI_2 - 1.0).abs() < 0.01);
    }

    #[test]
    fn hard_exponent_matches_direct_form() {
        for snr in [0.5, 2.0, 10.0] {
            let prob = AwgnProblem::from_snr(snr).unwrap();
            let q = prob.single_copy_error();
            assert_abs_diff_eq!(
                hard_exponent(&prob),
                -(2.0 * (q * (1.0 - q)).sqrt()).ln(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn soft_dominates_hard() {
        let mut prev = 0.0;
        for k in 1..60 {
            let prob = AwgnProblem::from_snr(0.05 * 1.3f64.powi(k)).unwrap();
            let h = hard_exponent(&prob);
            assert!(soft_exponent(&prob) >= h);
            assert!(h > prev);
            prev = h;
        }
    }

    #[test]
    fn single_copy_soft_equals_hard() {
        let prob = AwgnProblem::from_snr(1.0).unwrap();
        assert_abs_diff_eq!(
            soft_error(&prob, 1),
            hard_error(&prob, 1).unwrap(),
            epsilon = 1e-15
        );
        let est = simulate_awgn(&prob, 1, 20_000, 3).unwrap();
        assert_eq!(est.soft_errors, est.hard_errors);
    }

    #[test]
    fn simulated_soft_error_at_forty_copies() {
        let prob = AwgnProblem::from_snr(0.4).unwrap();
        let exact = soft_error(&prob, 40);
        assert_abs_diff_eq!(exact, gaussian_q(2.0), epsilon = 1e-15);
        let est = simulate_awgn(&prob, 40, 100_000, 5).unwrap();
        assert!((est.soft_perr() - exact).abs() < 3.0 * est.sigma(exact));
        let hard = hard_error(&prob, 40).unwrap();
        assert!((est.hard_perr() - hard).abs() < 3.0 * est.sigma(hard));
        assert!(est.soft_perr() <= est.hard_perr() + 3.0 * est.sigma(hard));
    }

    #[test]
    fn simulation_is_deterministic() {
        let prob = AwgnProblem::from_snr(0.7).unwrap();
        assert_eq!(
            simulate_awgn(&prob, 6, 5000, 9).unwrap(),
            simulate_awgn(&prob, 6, 5000, 9).unwrap()
        );
    }

    #[test]
    fn table_layout() {
        let t = classical_table(&[8.0], &[1, 4]).unwrap().to_csv_string();
        let mut lines = t.lines();
        assert_eq!(
            lines.next().unwrap(),
            "snr,M,soft_perr,hard_perr,soft_xi,hard_xi,ratio"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[4], "1");
        assert_eq!(t.lines().count(), 3);
    }
}
