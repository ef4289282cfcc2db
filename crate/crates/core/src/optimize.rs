//! One-dimensional minimization.
//!
//! Golden-section search for unimodal objectives plus a coarse-grid bracket
//! for objectives that may have more than one basin.

use crate::error::{Error, Result};
use crate::scalar::{count, lit, wide, Real};

/// Outcome of a scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
    pub iterations: usize,
}

/// Golden-section search on `[lo, hi]`, stopping once the bracket is narrower
/// than `tol`. `f` must be unimodal on the interval.
pub fn golden_section<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Minimum<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    // 1/phi
    let inv_phi = (T::sqrt(lit(5.0)) - T::one()) / lit(2.0);
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > tol && iterations < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Minimum {
        x,
        value,
        iterations,
    }
}

/// Evaluate `f` on `n_grid + 1` equally spaced points, then refine the best
/// grid cell (and its neighbours) by golden section.
///
/// Returns [`Error::Bracket`] if the objective is not finite on the grid.
pub fn grid_then_golden<T, F>(mut f: F, lo: T, hi: T, n_grid: usize, tol: T) -> Result<Minimum<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let n_grid = n_grid.max(2);
    let step = (hi - lo) / count::<T>(n_grid);
    let mut best = 0usize;
    let mut best_val = T::infinity();
    for i in 0..=n_grid {
        let v = f(lo + step * count(i));
        if !v.is_finite() {
            return Err(Error::Bracket {
                lo: wide(lo),
                hi: wide(hi),
            });
        }
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let a = lo + step * count(best.saturating_sub(1));
    let b = lo + step * count((best + 1).min(n_grid));
    let mut m = golden_section(&mut f, a, b, tol);
    // grid endpoints are admissible minima too
    if best_val < m.value {
        m.x = lo + step * count(best);
        m.value = best_val;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let m = golden_section(|x: f64| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-10);
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!((m.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_minimum() {
        let m = golden_section(|x: f64| x, 0.0, 1.0, 1e-12);
        assert!(m.x < 1e-11);
    }

    #[test]
    fn grid_finds_global_basin() {
        // two basins; the deeper one is at 2.0
        let f = |x: f64| ((x - 0.2).powi(2) + 0.1).min((x - 2.0).powi(2));
        let m = grid_then_golden(f, 0.0, 3.0, 60, 1e-10).unwrap();
        assert!((m.x - 2.0).abs() < 1e-6);
    }

    #[test]
    fn non_finite_objective_is_rejected() {
        let r = grid_then_golden(
            |x: f64| if x > 0.5 { f64::NAN } else { x },
            0.0,
            1.0,
            10,
            1e-8,
        );
        assert!(matches!(r, Err(Error::Bracket { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let m = golden_section(|x: f32| (x - 0.25) * (x - 0.25), 0.0, 1.0, 1e-5);
        assert!((m.x - 0.25).abs() < 1e-3);
    }
}
