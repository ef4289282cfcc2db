//! Closed-form count distributions against the diagonal of explicitly
//! displaced Fock-space density matrices.

use multicopy::fock::{coherent_density, displacement_matrix, thermal_density};
use multicopy::photon::{displaced_coherent_pmf, displaced_thermal_pmf};
use num_complex::Complex;

const NBARS: [f64; 3] = [0.01, 0.2, 1.0];
const DIM: usize = 90;

fn betas() -> [f64; 3] {
    [0.0, 0.5, std::f64::consts::FRAC_1_SQRT_2]
}

fn displaced_diagonal(rho: multicopy::fock::DensityMatrix<f64>, beta: f64) -> Vec<f64> {
    // the receiver subtracts beta from the incoming amplitude
    let d = displacement_matrix(Complex::new(-beta, 0.0), DIM).unwrap();
    rho.conjugated_by(&d).unwrap().diagonal()
}

#[test]
fn displaced_thermal_matches_fock_oracle() {
    for n in NBARS {
        for beta in betas() {
            let oracle = displaced_diagonal(thermal_density(n, DIM).unwrap(), beta);
            let pmf = displaced_thermal_pmf(n, beta, 40);
            for (k, &p) in pmf.probs().iter().enumerate() {
                assert!(
                    (p - oracle[k]).abs() < 1e-9,
                    "n={n} beta={beta} k={k}: {p} vs {}",
                    oracle[k]
                );
            }
        }
    }
}

#[test]
fn displaced_coherent_matches_fock_oracle() {
    for n in NBARS {
        for beta in betas() {
            let oracle = displaced_diagonal(coherent_density(n, DIM).unwrap(), beta);
            let pmf = displaced_coherent_pmf(n, beta, 40);
            for (k, &p) in pmf.probs().iter().enumerate() {
                assert!(
                    (p - oracle[k]).abs() < 1e-9,
                    "n={n} beta={beta} k={k}: {p} vs {}",
                    oracle[k]
                );
            }
        }
    }
}

#[test]
fn kennedy_displacement_nulls_the_coherent_state() {
    for n in NBARS {
        let diag = displaced_diagonal(coherent_density(n, DIM).unwrap(), n.sqrt());
        assert!((diag[0] - 1.0).abs() < 1e-12);
        assert!(diag[1..].iter().all(|p| p.abs() < 1e-12));
    }
}
