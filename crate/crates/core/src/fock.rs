//! Truncated Fock-space linear algebra.
//!
//! States live on the span of `|0>, ..., |dim-1>`. A [`DensityMatrix`] keeps
//! the probability that the untruncated state has outside that span as
//! `tail_mass`, so `trace + tail_mass = 1`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::receivers::SingleCopyStats;
use crate::scalar::{count, lit, wide, MatrixReal, Real};

/// Dense complex matrix in the Fock basis.
pub type CMatrix<T> = DMatrix<Complex<T>>;

fn tolerance<T: Real>(x: f64) -> T {
    Float::max(lit(x), T::epsilon() * lit(64.0))
}

/// Hermitian, unit-trace (up to `tail_mass`), positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: MatrixReal> {
    entries: CMatrix<T>,
    tail_mass: T,
}

impl<T: MatrixReal> DensityMatrix<T> {
    /// Validate and wrap a matrix.
    pub fn from_parts(entries: CMatrix<T>, tail_mass: T) -> Result<Self> {
        let dim = entries.nrows();
        if entries.ncols() != dim {
            return Err(Error::DimensionMismatch(dim, entries.ncols()));
        }
        if !(tail_mass >= T::zero() && tail_mass <= T::one()) {
            return Err(Error::domain("tail_mass", "in [0, 1]", wide(tail_mass)));
        }
        let herm_tol = tolerance::<T>(1e-12);
        for i in 0..dim {
            for j in i..dim {
                let d = entries[(i, j)] - entries[(j, i)].conj();
                if Float::abs(d.re) > herm_tol || Float::abs(d.im) > herm_tol {
                    return Err(Error::Degenerate("matrix is not Hermitian"));
                }
            }
        }
        let trace = (0..dim).fold(T::zero(), |acc, i| acc + entries[(i, i)].re);
        if Float::abs(trace + tail_mass - T::one()) > tolerance::<T>(1e-10) {
            return Err(Error::domain(
                "trace + tail_mass",
                "equal to 1",
                wide(trace + tail_mass),
            ));
        }
        let (values, _) = hermitian_eigen(&entries)?;
        let min = values.iter().copied().fold(T::infinity(), Float::min);
        if min < -tolerance::<T>(1e-10) {
            return Err(Error::domain("smallest eigenvalue", ">= 0", wide(min)));
        }
        Ok(DensityMatrix { entries, tail_mass })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.entries[(i, i)].re)
    }

    /// Photon-number distribution `<n|rho|n>`.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    /// `U rho U^dagger`, keeping the recorded tail mass.
    pub fn conjugated_by(&self, unitary: &CMatrix<T>) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), unitary.nrows()));
        }
        Ok(DensityMatrix {
            entries: unitary * &self.entries * unitary.adjoint(),
            tail_mass: self.tail_mass,
        })
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::DimensionTooSmall(dim))
    } else {
        Ok(())
    }
}

fn check_nbar<T: Real>(nbar: T) -> Result<()> {
    if nbar >= T::zero() && nbar.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "mean photon number",
            "finite and >= 0",
            wide(nbar),
        ))
    }
}

/// Fock amplitudes `<n|alpha>` of the coherent state with real amplitude
/// `sqrt(nbar)`, for `n < dim`.
pub fn coherent_amplitudes<T: Real>(nbar: T, dim: usize) -> Vec<T> {
    let alpha = nbar.sqrt();
    let mut amps = Vec::with_capacity(dim);
    let mut c = (-nbar / lit(2.0)).exp();
    for n in 0..dim {
        amps.push(c);
        c = c * alpha / count::<T>(n + 1).sqrt();
    }
    amps
}

/// `|sqrt(nbar)><sqrt(nbar)|` truncated to `dim` levels.
pub fn coherent_density<T: MatrixReal>(nbar: T, dim: usize) -> Result<DensityMatrix<T>> {
    check_nbar(nbar)?;
    check_dim(dim)?;
    let amps = coherent_amplitudes(nbar, dim);
    let entries = CMatrix::from_fn(dim, dim, |i, j| Complex::new(amps[i] * amps[j], T::zero()));
    let kept = amps.iter().fold(T::zero(), |acc, &a| acc + a * a);
    let tail_mass = Float::max(T::one() - kept, T::zero());
    Ok(DensityMatrix { entries, tail_mass })
}

/// Bose-Einstein (thermal) state truncated to `dim` levels.
pub fn thermal_density<T: MatrixReal>(nbar: T, dim: usize) -> Result<DensityMatrix<T>> {
    check_nbar(nbar)?;
    check_dim(dim)?;
    let ratio = nbar / (nbar + T::one());
    let mut entries = CMatrix::zeros(dim, dim);
    let mut w = T::one() / (nbar + T::one());
    for n in 0..dim {
        entries[(n, n)] = Complex::new(w, T::zero());
        w *= ratio;
    }
    let tail_mass = Float::powi(ratio, dim as i32);
    Ok(DensityMatrix { entries, tail_mass })
}

/// Smallest dimension for which both the coherent and the thermal state of
/// mean `nbar` leave less than `tail` outside the truncation.
pub fn adequate_dim(nbar: f64, tail: f64) -> usize {
    let mut dim = 2usize;
    if nbar > 0.0 {
        let ratio = nbar / (nbar + 1.0);
        dim = dim.max((tail.ln() / ratio.ln()).ceil() as usize + 1);
        // Poisson tail
        let mut term = (-nbar).exp();
        let mut kept = term;
        let mut n = 0usize;
        while 1.0 - kept > tail && n < 100_000 {
            n += 1;
            term *= nbar / n as f64;
            kept += term;
        }
        dim = dim.max(n + 2);
    }
    dim
}

/// Matrix elements `<m|D(beta)|n>` for `m, n < dim`.
///
/// Columns follow `D|n+1> = (a^dagger - beta^*) D|n> / sqrt(n+1)` starting
/// from `D|0> = |beta>`. Raising only pulls from lower rows, so every entry of
/// the truncated block is exact; the truncated matrix is unitary only up to
/// the weight the columns carry above the cutoff.
pub fn displacement_matrix<T: MatrixReal>(beta: Complex<T>, dim: usize) -> Result<CMatrix<T>> {
    check_dim(dim)?;
    let mut d = CMatrix::zeros(dim, dim);
    let norm = Float::exp(-beta.norm_sqr() / lit(2.0));
    let mut amp = Complex::new(norm, T::zero());
    for m in 0..dim {
        d[(m, 0)] = amp;
        amp = amp * beta / Float::sqrt(count::<T>(m + 1));
    }
    let shift = beta.conj();
    for n in 0..dim - 1 {
        let scale = T::one() / Float::sqrt(count::<T>(n + 1));
        for m in 0..dim {
            let raised = if m == 0 {
                Complex::new(T::zero(), T::zero())
            } else {
                d[(m - 1, n)] * Float::sqrt(count::<T>(m))
            };
            d[(m, n + 1)] = (raised - shift * d[(m, n)]) * scale;
        }
    }
    Ok(d)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen<T: MatrixReal>(m: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let solve = |m: CMatrix<T>| {
        SymmetricEigen::try_new(m, T::epsilon(), 10_000)
            .ok_or(Error::Eigen("Hermitian eigensolver did not converge"))
    };
    let mut eig = solve(m.clone())?;
    if eig.eigenvalues.iter().any(|v| !Float::is_finite(*v)) {
        // The solver can return NaN in single precision when entries sit many
        // orders of magnitude below the largest one; such entries are below
        // rounding anyway, so flush them and retry.
        let top = m.iter().fold(T::zero(), |acc, c| Float::max(acc, c.norm()));
        let floor = T::epsilon() * top * lit(1e-3);
        let zero = Complex::new(T::zero(), T::zero());
        eig = solve(m.map(|c| if c.norm() < floor { zero } else { c }))?;
    }
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !Float::is_finite(*v)) {
        return Err(Error::Eigen("non-finite eigenvalue"));
    }
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vectors))
}

/// Trace norm `sum |lambda_i|` of a Hermitian matrix.
pub fn trace_norm<T: MatrixReal>(m: &CMatrix<T>) -> Result<T> {
    let (values, _) = hermitian_eigen(m)?;
    Ok(values.iter().fold(T::zero(), |acc, &v| acc + Float::abs(v)))
}

/// Eigenpairs of a PSD matrix above the rounding floor.
fn support<T: MatrixReal>(rho: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let (values, vectors) = hermitian_eigen(rho)?;
    let top = values.iter().copied().fold(T::zero(), Float::max);
    let floor = T::epsilon() * count::<T>(16 * rho.nrows()) * top;
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > floor).collect();
    let vals = keep.iter().map(|&i| values[i]).collect();
    let vecs = CMatrix::from_fn(rho.nrows(), keep.len(), |r, c| vectors[(r, keep[c])]);
    Ok((vals, vecs))
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`.
///
/// Evaluated on the support of whichever state has lower numerical rank:
/// with `rho1 = V L V^dagger`, the nonzero spectrum of
/// `sqrt(rho1) rho2 sqrt(rho1)` equals that of `L^1/2 V^dagger rho2 V L^1/2`.
pub fn fidelity<T: MatrixReal>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> Result<T> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    let max_tail: T = lit(1e-6);
    for rho in [rho1, rho2] {
        if rho.tail_mass() >= max_tail {
            return Err(Error::ExcessTailMass(wide(rho.tail_mass()), 1e-6));
        }
    }
    let s1 = support(rho1.entries())?;
    let s2 = support(rho2.entries())?;
    let ((vals, vecs), other) = if s1.0.len() <= s2.0.len() {
        (s1, rho2)
    } else {
        (s2, rho1)
    };
    let r = vals.len();
    if r == 0 {
        return Ok(T::zero());
    }
    let half = CMatrix::from_fn(r, r, |i, j| {
        if i == j {
            Complex::new(Float::sqrt(vals[i]), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let reduced = &half * vecs.adjoint() * other.entries() * &vecs * &half;
    let reduced = (&reduced + reduced.adjoint()) * Complex::new(lit::<T>(0.5), T::zero());
    let (mu, _) = hermitian_eigen(&reduced)?;
    let top = mu.iter().copied().fold(T::zero(), Float::max);
    let floor = T::epsilon() * count::<T>(16 * r) * top;
    let root_sum = mu
        .iter()
        .filter(|&&m| m > floor)
        .fold(T::zero(), |acc, &m| acc + Float::sqrt(m));
    Ok(Float::min(
        Float::max(root_sum * root_sum, T::zero()),
        T::one(),
    ))
}

/// Optimal single-copy two-outcome measurement for `rho1` versus `rho2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HelstromMeasurement<T: MatrixReal> {
    /// Projector onto the non-negative eigenspace of `rho1 - rho2` (decide `rho1`).
    pub pi_1: CMatrix<T>,
    /// Projector onto the negative eigenspace (decide `rho2`).
    pub pi_2: CMatrix<T>,
    /// `Tr[pi_2 rho1]`.
    pub p: T,
    /// `Tr[pi_1 rho2]`.
    pub q: T,
    /// `||rho1 - rho2||_1`.
    pub trace_norm: T,
}

impl<T: MatrixReal> HelstromMeasurement<T> {
    pub fn dim(&self) -> usize {
        self.pi_1.nrows()
    }

    pub fn error(&self) -> T {
        (self.p + self.q) / lit(2.0)
    }

    /// `(1 - ||rho1 - rho2||_1 / 2) / 2`; equals [`Self::error`] for
    /// untruncated states.
    pub fn bound_from_trace_norm(&self) -> T {
        (T::one() - self.trace_norm / lit(2.0)) / lit(2.0)
    }

    pub fn stats(&self) -> SingleCopyStats<T> {
        SingleCopyStats::from_conditional(self.p, self.q)
    }
}

/// Helstrom measurement built from the spectrum of `rho1 - rho2`. Zero
/// eigenvalues (up to rounding) go to `pi_1`.
pub fn helstrom_measurement<T: MatrixReal>(
    rho1: &DensityMatrix<T>,
    rho2: &DensityMatrix<T>,
) -> Result<HelstromMeasurement<T>> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    let dim = rho1.dim();
    let lambda = rho1.entries() - rho2.entries();
    let (values, vectors) = hermitian_eigen(&lambda)?;
    let scale = values
        .iter()
        .fold(T::zero(), |acc, &v| Float::max(acc, Float::abs(v)));
    let zero = T::epsilon() * count::<T>(8 * dim) * scale;
    let mut pi_1 = CMatrix::zeros(dim, dim);
    let mut pi_2 = CMatrix::zeros(dim, dim);
    for (k, &v) in values.iter().enumerate() {
        let col = vectors.column(k);
        let proj = col * col.adjoint();
        if v >= -zero {
            pi_1 += proj;
        } else {
            pi_2 += proj;
        }
    }
    let p = (&pi_2 * rho1.entries()).trace().re;
    let q = (&pi_1 * rho2.entries()).trace().re;
    let trace_norm = values.iter().fold(T::zero(), |acc, &v| acc + Float::abs(v));
    Ok(HelstromMeasurement {
        pi_1,
        pi_2,
        p: Float::max(p, T::zero()),
        q: Float::max(q, T::zero()),
        trace_norm,
    })
}

/// Helstrom measurement statistics for two pure states with squared overlap
/// `overlap_sq`: always unbiased.
pub fn pure_pure_helstrom<T: Real>(overlap_sq: T) -> Result<SingleCopyStats<T>> {
    if !(overlap_sq >= T::zero() && overlap_sq <= T::one()) {
        return Err(Error::domain(
            "squared overlap",
            "in [0, 1]",
            wide(overlap_sq),
        ));
    }
    let e = (T::one() - (T::one() - overlap_sq).sqrt()) / lit(2.0);
    Ok(SingleCopyStats::from_conditional(e, e))
}
