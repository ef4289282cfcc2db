//! Classical and quantum Chernoff exponents.
//!
//! `Q_s = sum_n p1[n]^s p2[n]^(1-s)` is minimized over `s` in `[0, 1]` and the
//! exponent is `xi = -ln Q_min`. Internally the minimization works on the
//! deficit `1 - Q_s = sum_n [s p1 + (1-s) p2 - p1^s p2^(1-s)]`, whose terms are
//! all non-negative, so exponents of nearly identical distributions keep full
//! relative precision.

use serde::Serialize;

use crate::decision::mldr_from_likelihoods;
use crate::error::{Error, Result};
use crate::fock::{coherent_density, helstrom_measurement, thermal_density};
use crate::photon::{DetectorModel, PhotonPmf};
use crate::receivers::{likelihoods, ReceiverSpec};
use crate::scalar::{count, lit, wide, MatrixReal, Real};

/// Minimizer of `Q_s` and the resulting exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffResult<T> {
    pub s_min: T,
    pub q_min: T,
    /// Nats per copy. `+inf` when the two distributions have disjoint support.
    pub xi: T,
}

impl<T: Real> ChernoffResult<T> {
    fn from_deficit(s_min: T, deficit: T) -> Self {
        if deficit >= T::one() {
            return ChernoffResult {
                s_min,
                q_min: T::zero(),
                xi: T::infinity(),
            };
        }
        let deficit = deficit.max(T::zero());
        ChernoffResult {
            s_min,
            q_min: T::one() - deficit,
            xi: -(-deficit).ln_1p(),
        }
    }

    /// The hypotheses can be told apart without error from one copy.
    pub fn is_perfect(&self) -> bool {
        self.xi.is_infinite()
    }
}

/// `(1-p)^s q^(1-s) + p^s (1-q)^(1-s)`, with `0^0 = 1`.
pub fn q_s_binary<T: Real>(p: T, q: T, s: T) -> Result<T> {
    check_prob("p", p)?;
    check_prob("q", q)?;
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::domain("s", "in [0, 1]", wide(s)));
    }
    let one = T::one();
    Ok((one - p).powf(s) * q.powf(one - s) + p.powf(s) * (one - q).powf(one - s))
}

fn check_prob<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::domain(name, "in [0, 1]", wide(v)))
    }
}

/// Stationary point of [`q_s_binary`] in closed form. Needs `0 < p, q` and
/// `p + q < 1`.
pub fn s_min_closed_form<T: Real>(p: T, q: T) -> Result<T> {
    if !(p > T::zero() && q > T::zero()) {
        return Err(Error::Degenerate("closed-form s_min needs p, q > 0"));
    }
    if !(p + q < T::one()) {
        return Err(Error::Degenerate("closed-form s_min needs p + q < 1"));
    }
    let one = T::one();
    let (pc, qc) = (one - p, one - q);
    let num = (qc * (qc / p).ln()).ln() - (q * (pc / q).ln()).ln();
    let den = (pc * qc / (p * q)).ln();
    Ok(num / den)
}

/// `phi(s, r) = s (e^r - 1) - (e^(s r) - 1)`, accurate for small `r`.
fn phi<T: Real>(s: T, r: T) -> T {
    if r.abs() >= T::one() {
        return s * r.exp_m1() - (s * r).exp_m1();
    }
    // |r| < 1, so 31 terms reach 1/32! and the sum is converged; individual
    // terms vanish at special s, so there is no early exit.
    // sum_{k>=2} (s - s^k) r^k / k!
    let mut total = T::zero();
    let mut rk = r;
    let mut sk = s;
    let mut fact = T::one();
    for k in 2..32 {
        rk = rk * r;
        sk = sk * s;
        fact = fact * count(k);
        let term = (s - sk) * rk / fact;
        total = total + term;
    }
    total
}

/// One bin's contribution `s a + (1-s) b - a^s b^(1-s)`; zero bins use the
/// limits from the open interval so the deficit is continuous on `[0, 1]`.
fn deficit_term<T: Real>(a: T, b: T, s: T) -> T {
    match (a > T::zero(), b > T::zero()) {
        (false, false) => T::zero(),
        (false, true) => (T::one() - s) * b,
        (true, false) => s * a,
        (true, true) => {
            if a >= b {
                b * phi(s, a.ln() - b.ln())
            } else {
                a * phi(T::one() - s, b.ln() - a.ln())
            }
        }
    }
}

fn deficit<T: Real>(p1: &[T], p2: &[T], s: T) -> T {
    p1.iter()
        .zip(p2)
        .fold(T::zero(), |acc, (&a, &b)| acc + deficit_term(a, b, s))
}

/// `d phi / ds = (e^r - 1) - r e^(s r)`, accurate for small `r`.
fn phi_slope<T: Real>(s: T, r: T) -> T {
    if r.abs() >= T::one() {
        return r.exp_m1() - r * (s * r).exp();
    }
    // sum_{k>=2} (1 - k s^(k-1)) r^k / k!
    let mut total = T::zero();
    let mut rk = r;
    let mut sk = T::one();
    let mut fact = T::one();
    for k in 2..32 {
        rk = rk * r;
        sk = sk * s;
        fact = fact * count(k);
        let term = (T::one() - count::<T>(k) * sk) * rk / fact;
        total = total + term;
    }
    total
}

fn deficit_slope_term<T: Real>(a: T, b: T, s: T) -> T {
    match (a > T::zero(), b > T::zero()) {
        (false, false) => T::zero(),
        (false, true) => -b,
        (true, false) => a,
        (true, true) => {
            if a >= b {
                b * phi_slope(s, a.ln() - b.ln())
            } else {
                -a * phi_slope(T::one() - s, b.ln() - a.ln())
            }
        }
    }
}

fn deficit_slope<T: Real>(p1: &[T], p2: &[T], s: T) -> T {
    p1.iter()
        .zip(p2)
        .fold(T::zero(), |acc, (&a, &b)| acc + deficit_slope_term(a, b, s))
}

/// Minimizes `Q_s` for two normalized weight vectors of equal length.
///
/// The deficit is concave in `s`, so its maximizer is the sign change of the
/// analytic slope; bisection on the slope resolves `s` far below the
/// `sqrt(eps)` floor of a search on values.
fn minimize_q<T: Real>(p1: &[T], p2: &[T]) -> ChernoffResult<T> {
    let (zero, one) = (T::zero(), T::one());
    let s = if deficit_slope(p1, p2, zero) <= zero {
        zero
    } else if deficit_slope(p1, p2, one) >= zero {
        one
    } else {
        let (mut lo, mut hi) = (zero, one);
        for _ in 0..200 {
            let mid = (lo + hi) / lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if deficit_slope(p1, p2, mid) > zero {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) / lit(2.0)
    };
    ChernoffResult::from_deficit(s, deficit(p1, p2, s))
}

/// Exponent of a binary measurement with conditional errors `p` (decide 2
/// given 1) and `q` (decide 1 given 2).
pub fn binary_exponent<T: Real>(p: T, q: T) -> Result<ChernoffResult<T>> {
    check_prob("p", p)?;
    check_prob("q", q)?;
    let one = T::one();
    Ok(minimize_q(&[one - p, p], &[q, one - q]))
}

/// Classical Chernoff exponent of two count distributions. Truncation tails
/// are treated as one extra outcome.
pub fn chernoff_exponent_pmf<T: Real>(
    pmf1: &PhotonPmf<T>,
    pmf2: &PhotonPmf<T>,
) -> Result<ChernoffResult<T>> {
    if pmf1.cutoff() != pmf2.cutoff() {
        return Err(Error::DimensionMismatch(pmf1.cutoff(), pmf2.cutoff()));
    }
    let limit = lit::<T>(1e-8);
    for pmf in [pmf1, pmf2] {
        if pmf.tail_mass() >= limit {
            return Err(Error::ExcessTailMass(wide(pmf.tail_mass()), 1e-8));
        }
    }
    Ok(minimize_q(&pmf1.with_tail_bin(), &pmf2.with_tail_bin()))
}

/// Quantum Chernoff exponent between a coherent state and a thermal state of
/// equal mean photon number: `n/(n+1) + ln(1+n)`.
pub fn qcb_coh_thermal<T: Real>(nbar_r: T) -> Result<T> {
    if !(nbar_r >= T::zero() && nbar_r.is_finite()) {
        return Err(Error::domain(
            "mean photon number",
            "finite and >= 0",
            wide(nbar_r),
        ));
    }
    Ok(nbar_r / (nbar_r + T::one()) + nbar_r.ln_1p())
}

/// `u/atanh(u) - 1` without cancellation for small `u`.
fn ratio_atanh_minus_one<T: Real>(u: T) -> T {
    if u.abs() < lit(0.05) {
        // u - atanh(u) = -(u^3/3 + u^5/5 + ...)
        let u2 = u * u;
        let mut diff = T::zero();
        let mut pow = u;
        for k in 1..30 {
            pow = pow * u2;
            diff = diff - pow / count(2 * k + 1);
        }
        let atanh = u - diff;
        if atanh == T::zero() {
            return T::zero();
        }
        diff / atanh
    } else {
        u / u.atanh() - T::one()
    }
}

/// Curvature of the minimized binary `Q` in the bias `b` at `b = 0`:
/// `Q_smin(b) = 2 sqrt(P(1-P)) - G(P) b^2 + O(b^4)` for `p = (1+b)P`,
/// `q = (1-b)P`.
///
/// Evaluated as `sqrt(P) [u^2 + (u/atanh(u) - 1)^2] / (4 (1-P)^(3/2))` with
/// `u = 1 - 2P`. Vanishes at both endpoints.
pub fn g_function<T: Real>(perr: T) -> Result<T> {
    let half = lit::<T>(0.5);
    if !(perr >= T::zero() && perr <= half) {
        return Err(Error::domain(
            "single-copy error",
            "in [0, 1/2]",
            wide(perr),
        ));
    }
    if perr == T::zero() || perr == half {
        return Ok(T::zero());
    }
    let u = T::one() - perr - perr;
    let w = ratio_atanh_minus_one(u);
    let pc = T::one() - perr;
    Ok(perr.sqrt() * (u * u + w * w) / (lit::<T>(4.0) * pc * pc.sqrt()))
}

/// Upper bound on the exponent of any identical copy-by-copy hard-decision
/// measurement with bias `b`, to second order in `b`:
/// `-ln(F)/2 + G([1 - sqrt(1-F)]/2) b^2 / sqrt(F)`.
pub fn exponent_upper_bound<T: Real>(fidelity: T, bias: T) -> Result<T> {
    if !(fidelity > T::zero() && fidelity <= T::one()) {
        return Err(Error::domain("fidelity", "in (0, 1]", wide(fidelity)));
    }
    if !(bias.abs() <= T::one()) {
        return Err(Error::domain("bias", "in [-1, 1]", wide(bias)));
    }
    let x = (T::one() - (T::one() - fidelity).sqrt()) / lit(2.0);
    let g = g_function(x.min(lit(0.5)))?;
    Ok(-fidelity.ln() / lit(2.0) + g * bias * bias / fidelity.sqrt())
}

/// Lower bound on the Helstrom measurement's exponent:
/// `-ln[sqrt(F) (2 - sqrt(F))] / 2`.
pub fn helstrom_exponent_lower_bound<T: Real>(fidelity: T) -> Result<T> {
    if !(fidelity > T::zero() && fidelity <= T::one()) {
        return Err(Error::domain("fidelity", "in (0, 1]", wide(fidelity)));
    }
    let r = fidelity.sqrt();
    Ok(-(r * (lit::<T>(2.0) - r)).ln() / lit(2.0))
}

/// `[-ln(F)/2, -ln(F)]`, the range the quantum Chernoff exponent of two mixed
/// states is confined to.
pub fn fidelity_qcb_interval<T: Real>(fidelity: T) -> Result<(T, T)> {
    if !(fidelity > T::zero() && fidelity <= T::one()) {
        return Err(Error::domain("fidelity", "in (0, 1]", wide(fidelity)));
    }
    let full = -fidelity.ln();
    Ok((full / lit(2.0), full))
}

/// Leading-order small-`n` exponents (asymptotic only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotics<T> {
    /// Kennedy receiver, equal to the quantum Chernoff exponent: `2n`.
    pub qcb_kennedy: T,
    /// Upper bound for the Helstrom measurement: `n`.
    pub helstrom_upper: T,
    /// Helstrom measurement: `n/2`.
    pub helstrom: T,
    /// Bound for the optimized displacement receiver: `2[1 + (1 - sqrt e)^2] n / e`.
    pub gk_upper: T,
    /// Direct detection: `(1 - log2(e ln 2)) n^2 / 2`.
    pub dd: T,
}

pub fn small_nbar_asymptotics<T: Real>(nbar_r: T) -> Result<Asymptotics<T>> {
    if !(nbar_r >= T::zero() && nbar_r.is_finite()) {
        return Err(Error::domain(
            "mean photon number",
            "finite and >= 0",
            wide(nbar_r),
        ));
    }
    let e = T::E();
    let two = lit::<T>(2.0);
    let gap = T::one() - e.sqrt();
    let dd_coeff = (T::one() - (e * T::LN_2()).log2()) / two;
    Ok(Asymptotics {
        qcb_kennedy: two * nbar_r,
        helstrom_upper: nbar_r,
        helstrom: nbar_r / two,
        gk_upper: two * (T::one() + gap * gap) * nbar_r / e,
        dd: dd_coeff * nbar_r * nbar_r,
    })
}

/// Exponent of the single-copy Helstrom measurement between coherent and
/// thermal states truncated to `dim` Fock levels, repeated copy by copy with
/// hard decisions.
pub fn helstrom_exponent_exact<T: MatrixReal>(nbar_r: T, dim: usize) -> Result<ChernoffResult<T>> {
    let coh = coherent_density(nbar_r, dim)?;
    let th = thermal_density(nbar_r, dim)?;
    let h = helstrom_measurement(&coh, &th)?;
    binary_exponent(h.p, h.q)
}

/// Exponent a receiver attains: binary (hard decision) for the displacement
/// receivers, the full count distribution (soft decision) for direct
/// detection.
pub fn receiver_exponent<T: Real>(
    spec: &ReceiverSpec<T>,
    nbar_r: T,
    det: &DetectorModel,
) -> Result<ChernoffResult<T>> {
    let (coh, th) = likelihoods(spec, nbar_r, det)?;
    if spec.kind.is_hard_decision() {
        let stats = mldr_from_likelihoods(&coh, &th)?.conditional_errors(&coh, &th);
        binary_exponent(stats.p, stats.q)
    } else {
        chernoff_exponent_pmf(&coh, &th)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fidelity;
    use crate::optimize::golden_section;
    use crate::photon::{
        bose_einstein_pmf, displaced_coherent_pmf, displaced_thermal_pmf, poisson_pmf,
    };
    use crate::receivers::{optimize_gk_beta, vacuum_or_not_stats, ReceiverKind};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Minimizer of the direct binary formula: bisection on its derivative.
    fn q_min_oracle(p: f64, q: f64) -> (f64, f64) {
        let slope = |s: f64| {
            (1.0 - p).powf(s) * q.powf(1.0 - s) * ((1.0 - p) / q).ln()
                + p.powf(s) * (1.0 - q).powf(1.0 - s) * (p / (1.0 - q)).ln()
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        (s, q_s_binary(p, q, s).unwrap())
    }

    #[test]
    fn q_s_binary_examples() {
        let pe = 0.3f64;
        assert_abs_diff_eq!(
            q_s_binary(pe, pe, 0.5).unwrap(),
            2.0 * (pe * (1.0 - pe)).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(q_s_binary(0.2f64, 0.35, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            q_s_binary(0.3935f64, 0.6065, 0.5).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(q_s_binary(0.0f64, 0.5, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(q_s_binary(1.2f64, 0.5, 0.5).is_err());
    }

    #[test]
    fn complementary_errors_are_indistinguishable() {
        // p + q = 1: Q_s = 1 for every s
        for s in [0.1, 0.3, 0.7, 0.9] {
            assert_abs_diff_eq!(
                q_s_binary(0.3935f64, 0.6065, s).unwrap(),
                1.0,
                epsilon = 1e-12
            );
        }
        let r = binary_exponent(0.3935f64, 0.6065).unwrap();
        assert!(r.xi.abs() < 1e-12);
        assert!(s_min_closed_form(0.3935f64, 0.6065).is_err());
    }

    #[test]
    fn closed_form_s_min_matches_numerics() {
        assert_abs_diff_eq!(
            s_min_closed_form(0.2f64, 0.2).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let gk = vacuum_or_not_stats(0.01f64, optimize_gk_beta(0.01f64).unwrap());
        for (p, q) in [(0.1, 0.2), (gk.p, gk.q), (0.01, 0.4), (0.45, 0.05)] {
            let (s_num, _) = q_min_oracle(p, q);
            assert_abs_diff_eq!(s_min_closed_form(p, q).unwrap(), s_num, epsilon = 1e-8);
            let r = binary_exponent(p, q).unwrap();
            assert_abs_diff_eq!(r.s_min, s_num, epsilon = 1e-8);
        }
    }

    #[test]
    fn result_invariants() {
        let r = binary_exponent(0.1f64, 0.2).unwrap();
        assert_abs_diff_eq!(r.xi, -r.q_min.ln(), epsilon = 1e-12);
        let m = golden_section(|s| q_s_binary(0.1f64, 0.2, s).unwrap(), 0.0, 1.0, 1e-10);
        assert!((r.s_min - m.x).abs() < 1e-6);
        for k in 1..10 {
            let s = k as f64 / 10.0;
            assert!(r.q_min <= q_s_binary(0.1, 0.2, s).unwrap() + 1e-9);
        }
    }

    #[test]
    fn identical_pmfs_have_zero_exponent() {
        let a = poisson_pmf(0.7f64, 40);
        let r = chernoff_exponent_pmf(&a, &a).unwrap();
        assert_eq!(r.xi, 0.0);
        assert_eq!(r.q_min, 1.0);
    }

    #[test]
    fn disjoint_support_is_perfect() {
        let a = PhotonPmf::from_probs(vec![1.0f64, 0.0]).unwrap();
        let b = PhotonPmf::from_probs(vec![0.0f64, 1.0]).unwrap();
        assert!(chernoff_exponent_pmf(&a, &b).unwrap().is_perfect());
        assert!(binary_exponent(0.0f64, 0.0).unwrap().is_perfect());
    }

    #[test]
    fn pmf_exponent_rejects_mismatch_and_heavy_tails() {
        let a = poisson_pmf(0.5f64, 30);
        let b = poisson_pmf(0.5f64, 31);
        assert!(matches!(
            chernoff_exponent_pmf(&a, &b),
            Err(Error::DimensionMismatch(30, 31))
        ));
        let heavy = poisson_pmf(5.0f64, 6);
        assert!(matches!(
            chernoff_exponent_pmf(&heavy, &heavy),
            Err(Error::ExcessTailMass(..))
        ));
    }

    #[test]
    fn kennedy_branches_attain_qcb() {
        let nbar = 0.2f64;
        let b = nbar.sqrt();
        let coh = displaced_coherent_pmf(nbar, b, 60);
        let th = displaced_thermal_pmf(nbar, b, 60);
        let r = chernoff_exponent_pmf(&coh, &th).unwrap();
        assert_abs_diff_eq!(r.xi, 0.348988, epsilon = 1e-6);
        assert_abs_diff_eq!(r.xi, qcb_coh_thermal(nbar).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn dd_low_photon_limit() {
        let nbar = 1e-3f64;
        let r =
            chernoff_exponent_pmf(&poisson_pmf(nbar, 20), &bose_einstein_pmf(nbar, 20)).unwrap();
        assert!((r.s_min - 0.4712).abs() < 0.01, "{}", r.s_min);
        let coeff = r.xi / (nbar * nbar);
        assert!((coeff / 0.0430 - 1.0).abs() < 0.05, "{coeff}");
    }

    #[test]
    fn qcb_examples() {
        assert_eq!(qcb_coh_thermal(0.0f64).unwrap(), 0.0);
        assert_abs_diff_eq!(
            qcb_coh_thermal(0.2f64).unwrap(),
            0.2 / 1.2 + 1.2f64.ln(),
            epsilon = 1e-15
        );
        let r = qcb_coh_thermal(1e-3f64).unwrap() / 1e-3;
        assert!((1.996..=2.0).contains(&r));
        assert!(qcb_coh_thermal(-1.0f64).is_err());
    }

    fn curvature_oracle(pe: f64) -> f64 {
        let h = 1e-3;
        let q = |b: f64| {
            binary_exponent((1.0 + b) * pe, (1.0 - b) * pe)
                .unwrap()
                .q_min
        };
        -(q(h) - 2.0 * q(0.0) + q(-h)) / (2.0 * h * h)
    }

    #[test]
    fn g_matches_curvature() {
        for pe in [0.15, 0.2, 0.3, 0.4, 0.45] {
            let g = g_function(pe).unwrap();
            let oracle = curvature_oracle(pe);
            assert!(
                ((g - oracle) / oracle).abs() < 1e-3,
                "P={pe}: {g} vs {oracle}"
            );
        }
    }

    #[test]
    fn g_positive_and_continuous_near_half() {
        for pe in [0.15, 0.25, 0.35, 0.49, 0.4999, 0.499999] {
            assert!(g_function(pe).unwrap() > 0.0);
        }
        // either side of the switch to the series for u/atanh(u)
        let a = g_function(0.475 + 1e-9f64).unwrap();
        let b = g_function(0.475 - 1e-9f64).unwrap();
        assert!((a - b).abs() < 1e-6 * b);
        assert_eq!(g_function(0.5f64).unwrap(), 0.0);
        assert!(g_function(0.6f64).is_err());
    }

    #[test]
    fn g_monotone_on_upper_interval() {
        let mut prev = f64::INFINITY;
        for k in 0..=40 {
            let x = 0.1166 + (0.5 - 0.1166) * k as f64 / 40.0;
            let g = g_function(x).unwrap();
            assert!(g <= prev);
            prev = g;
        }
    }

    #[test]
    fn bias_expansion_remainder_is_quartic() {
        for pe in [0.2, 0.3, 0.4] {
            let g = g_function(pe).unwrap();
            let q0 = 2.0 * (pe * (1.0f64 - pe)).sqrt();
            let rem = |b: f64| {
                let q = binary_exponent((1.0 + b) * pe, (1.0 - b) * pe)
                    .unwrap()
                    .q_min;
                (q - (q0 - g * b * b)).abs()
            };
            let c = rem(0.02) / 0.02f64.powi(4);
            for b in [0.05, 0.1] {
                assert!(rem(b) <= 1.5 * c * b.powi(4) + 1e-12, "P={pe} b={b}");
            }
        }
    }

    #[test]
    fn upper_bound_examples() {
        let f = 0.4f64;
        assert_abs_diff_eq!(
            exponent_upper_bound(f, 0.0).unwrap(),
            -f.ln() / 2.0,
            epsilon = 1e-15
        );
        assert!(exponent_upper_bound(f, 0.3).unwrap() > -f.ln() / 2.0);
        assert_abs_diff_eq!(
            exponent_upper_bound(1.0f64, 0.5).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn gk_gap_factor() {
        let nbar = 1e-4f64;
        let beta = optimize_gk_beta(nbar).unwrap();
        let bias = vacuum_or_not_stats(nbar, beta).bias;
        let f = (-qcb_coh_thermal(nbar).unwrap()).exp();
        let ratio = exponent_upper_bound(f, bias).unwrap() / qcb_coh_thermal(nbar).unwrap();
        assert!((ratio * 1.9132 - 1.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn helstrom_lower_bound_examples() {
        assert_eq!(helstrom_exponent_lower_bound(1.0f64).unwrap(), 0.0);
        let f = 0.705401f64;
        let r = f.sqrt();
        let v = helstrom_exponent_lower_bound(f).unwrap();
        assert_abs_diff_eq!(v, -(r * (2.0 - r)).ln() / 2.0, epsilon = 1e-15);
        assert!((v - 0.01299).abs() < 1e-4);
        for k in 1..20 {
            let f = k as f64 / 20.0;
            assert!(helstrom_exponent_lower_bound(f).unwrap() <= -f.ln() / 2.0);
        }
    }

    #[test]
    fn asymptotic_table() {
        let z = small_nbar_asymptotics(0.0f64).unwrap();
        assert_eq!(
            [
                z.qcb_kennedy,
                z.helstrom_upper,
                z.helstrom,
                z.gk_upper,
                z.dd
            ],
            [0.0; 5]
        );
        let t = small_nbar_asymptotics(0.1f64).unwrap();
        assert!((t.dd - 4.30e-4).abs() < 2e-6);
        assert!((t.gk_upper - 0.1046).abs() < 1e-4);
        assert_abs_diff_eq!(t.qcb_kennedy / t.gk_upper, 1.9132, epsilon = 1e-4);
    }

    #[test]
    fn helstrom_two_level_limit() {
        let nbar = 1e-3f64;
        let r = helstrom_exponent_exact(nbar, 2).unwrap();
        assert!((0.45..=0.55).contains(&(r.xi / nbar)), "{}", r.xi / nbar);
        assert!(r.xi <= nbar + 2.0 * nbar.powf(1.5));
        let coh = coherent_density(nbar, 2).unwrap();
        let th = thermal_density(nbar, 2).unwrap();
        let b = helstrom_measurement(&coh, &th).unwrap().stats().bias;
        assert!((b.abs() - nbar.sqrt()).abs() < 0.5 * nbar.sqrt(), "{b}");
    }

    #[test]
    fn pure_states_lose_exactly_half() {
        for k in 1..=9 {
            let f = k as f64 / 10.0;
            let s = crate::fock::pure_pure_helstrom(f).unwrap();
            let r = binary_exponent(s.p, s.q).unwrap();
            assert_abs_diff_eq!(r.xi, -f.ln() / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn exponent_hierarchy() {
        let det = DetectorModel::ideal();
        for nbar in [0.05f64, 0.2, 0.6, 1.0] {
            let xi = |k| {
                receiver_exponent(&ReceiverSpec::for_kind(k, nbar).unwrap(), nbar, &det)
                    .unwrap()
                    .xi
            };
            let (dd, gk, ken) = (
                xi(ReceiverKind::DirectDetection),
                xi(ReceiverKind::GeneralizedKennedy),
                xi(ReceiverKind::Kennedy),
            );
            let hel = helstrom_exponent_exact(nbar, 40).unwrap().xi;
            assert!(dd < hel.min(gk), "nbar={nbar}");
            assert!(hel.max(gk) < ken, "nbar={nbar}");
            assert_abs_diff_eq!(ken, qcb_coh_thermal(nbar).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn qcb_is_minus_log_fidelity() {
        for nbar in [0.05f64, 0.5, 1.0] {
            let dim = crate::fock::adequate_dim(nbar, 1e-16);
            let f = fidelity(
                &coherent_density(nbar, dim).unwrap(),
                &thermal_density(nbar, dim).unwrap(),
            )
            .unwrap();
            assert_abs_diff_eq!(-f.ln(), qcb_coh_thermal(nbar).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn single_precision_exponent() {
        let r = binary_exponent(0.1f32, 0.2).unwrap();
        let r64 = binary_exponent(0.1f64, 0.2).unwrap();
        assert!((r.xi as f64 - r64.xi).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn q_s_is_convex(p in 0.001f64..0.999, q in 0.001f64..0.999, s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
            let mid = q_s_binary(p, q, (s1 + s2) / 2.0).unwrap();
            let avg = (q_s_binary(p, q, s1).unwrap() + q_s_binary(p, q, s2).unwrap()) / 2.0;
            prop_assert!(mid <= avg + 1e-12);
        }

        #[test]
        fn slope_matches_finite_difference(a in 0.001f64..1.0, b in 0.001f64..1.0, s in 0.01f64..0.99) {
            let h = 1e-6;
            let fd = (deficit_term(a, b, s + h) - deficit_term(a, b, s - h)) / (2.0 * h);
            prop_assert!((deficit_slope_term(a, b, s) - fd).abs() < 1e-7);
        }

        #[test]
        fn deficit_matches_direct_sum(p in 0.01f64..0.99, q in 0.01f64..0.99, s in 0.0f64..1.0) {
            let d = deficit(&[1.0 - p, p], &[q, 1.0 - q], s);
            prop_assert!((1.0 - d - q_s_binary(p, q, s).unwrap()).abs() < 1e-13);
        }
    }
}
