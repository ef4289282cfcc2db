//! The four commands. Each turns resolved settings into named CSV files.

use multicopy::awgn::{classical_table, hard_error, simulate_awgn, soft_error, AwgnProblem};
use multicopy::chernoff::{
    helstrom_exponent_exact, helstrom_exponent_lower_bound, qcb_coh_thermal, receiver_exponent,
    small_nbar_asymptotics,
};
use multicopy::experiment::{curve_table, summary_table, sweep_exponents, ExperimentConfig};
use multicopy::fock::{adequate_dim, coherent_density, helstrom_measurement, thermal_density};
use multicopy::report::{fmt_real, CsvTable};
use multicopy::{Error, ReceiverKind, ReceiverSpec};

use crate::settings::{
    ClassicalSettings, Curve, ExponentsSettings, HelstromSettings, SimulateSettings,
};
use crate::CliError;

/// A CSV file to be written into the output directory.
pub struct Output {
    pub name: &'static str,
    pub table: CsvTable,
}

pub const EXPONENTS_HEADER: [&str; 6] = [
    "nbar_s",
    "nbar_r",
    "receiver",
    "xi",
    "s_min",
    "xi_asymptotic",
];
pub const HELSTROM_HEADER: [&str; 10] = [
    "nbar_r",
    "dim",
    "p",
    "q",
    "perr",
    "bias",
    "s_min",
    "xi",
    "xi_over_qcb",
    "xi_lower_bound",
];
pub const CLASSICAL_MC_HEADER: [&str; 7] = [
    "snr",
    "M",
    "trials",
    "soft_perr_hat",
    "hard_perr_hat",
    "soft_perr_exact",
    "hard_perr_exact",
];

fn full_helstrom_dim(nbar_r: f64, fixed: Option<usize>) -> usize {
    fixed.unwrap_or_else(|| adequate_dim(nbar_r, 1e-12)).max(2)
}

/// `(xi, s_min, leading-order xi)` of one theory curve at one point.
fn curve_point(curve: Curve, nbar_r: f64, s: &ExponentsSettings) -> Result<(f64, f64, f64), Error> {
    let asym = small_nbar_asymptotics(nbar_r)?;
    if nbar_r == 0.0 {
        // identical states
        return Ok((0.0, 0.5, 0.0));
    }
    let via_receiver = |kind: ReceiverKind| -> Result<(f64, f64), Error> {
        let r = receiver_exponent(&ReceiverSpec::for_kind(kind, nbar_r)?, nbar_r, &s.detector)?;
        Ok((r.xi, r.s_min))
    };
    let ((xi, s_min), lead) = match curve {
        Curve::Kennedy if s.detector.is_ideal() => {
            ((qcb_coh_thermal(nbar_r)?, 0.0), asym.qcb_kennedy)
        }
        Curve::Kennedy => (via_receiver(ReceiverKind::Kennedy)?, asym.qcb_kennedy),
        Curve::Gk => (
            via_receiver(ReceiverKind::GeneralizedKennedy)?,
            asym.gk_upper,
        ),
        Curve::Dd => (via_receiver(ReceiverKind::DirectDetection)?, asym.dd),
        Curve::Helstrom2 => {
            let r = helstrom_exponent_exact(nbar_r, 2)?;
            ((r.xi, r.s_min), asym.helstrom)
        }
        Curve::Helstrom => {
            let r = helstrom_exponent_exact(nbar_r, full_helstrom_dim(nbar_r, s.helstrom_dim))?;
            ((r.xi, r.s_min), asym.helstrom)
        }
    };
    Ok((xi, s_min, lead))
}

pub fn exponents(s: &ExponentsSettings) -> Result<Vec<Output>, CliError> {
    if s.receivers.is_empty() {
        return Err(CliError::Usage("no receivers selected".into()));
    }
    if s.nbar.is_empty() {
        return Err(CliError::Usage("empty photon-number grid".into()));
    }
    if !(s.efficiency > 0.0 && s.efficiency <= 1.0) {
        return Err(CliError::Usage(format!(
            "--efficiency must be in (0, 1], got {}",
            s.efficiency
        )));
    }
    if let Some(bad) = s.nbar.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
        return Err(CliError::Usage(format!(
            "photon numbers must be finite and >= 0, got {bad}"
        )));
    }
    let mut table = CsvTable::new(&EXPONENTS_HEADER);
    for &nbar_s in &s.nbar {
        let nbar_r = s.efficiency * nbar_s;
        for &curve in &s.receivers {
            let (xi, s_min, lead) = curve_point(curve, nbar_r, s)?;
            table.push(vec![
                fmt_real(nbar_s),
                fmt_real(nbar_r),
                curve.name().to_string(),
                fmt_real(xi),
                fmt_real(s_min),
                fmt_real(lead),
            ]);
        }
    }
    Ok(vec![Output {
        name: "exponents.csv",
        table,
    }])
}

pub fn simulate(s: &SimulateSettings) -> Result<Vec<Output>, CliError> {
    if s.receivers.is_empty() {
        return Err(CliError::Usage("no receivers selected".into()));
    }
    if s.nbar.is_empty() {
        return Err(CliError::Usage("empty photon-number grid".into()));
    }
    // validate every grid point up front so all problems surface together
    for &nbar_r in &s.nbar {
        ExperimentConfig {
            nbar_r,
            ..s.experiment.clone()
        }
        .validate()?;
    }
    let runs = sweep_exponents(&s.nbar, &s.receivers, &s.experiment)?;
    Ok(vec![
        Output {
            name: "simulate_curve.csv",
            table: curve_table(&runs),
        },
        Output {
            name: "simulate_summary.csv",
            table: summary_table(&runs),
        },
    ])
}

pub fn classical(s: &ClassicalSettings, seed: u64) -> Result<Vec<Output>, CliError> {
    if s.snr.is_empty() {
        return Err(CliError::Usage("--snr is required".into()));
    }
    if let Some(bad) = s.snr.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(CliError::Usage(format!(
            "--snr values must be finite and > 0, got {bad}"
        )));
    }
    if s.m_grid.is_empty() || s.m_grid.contains(&0) {
        return Err(CliError::Usage(
            "--m-grid needs positive copy numbers".into(),
        ));
    }
    let mut out = vec![Output {
        name: "classical.csv",
        table: classical_table(&s.snr, &s.m_grid)?,
    }];
    if s.trials > 0 {
        let mut table = CsvTable::new(&CLASSICAL_MC_HEADER);
        for &snr in &s.snr {
            let prob = AwgnProblem::from_snr(snr)?;
            for &m in &s.m_grid {
                let est = simulate_awgn(&prob, m, s.trials, seed)?;
                table.push(vec![
                    fmt_real(snr),
                    m.to_string(),
                    s.trials.to_string(),
                    fmt_real(est.soft_perr()),
                    fmt_real(est.hard_perr()),
                    fmt_real(soft_error(&prob, m)),
                    fmt_real(hard_error(&prob, m)?),
                ]);
            }
        }
        out.push(Output {
            name: "classical_mc.csv",
            table,
        });
    }
    Ok(out)
}

pub fn helstrom(s: &HelstromSettings) -> Result<Vec<Output>, CliError> {
    if s.nbar.is_empty() {
        return Err(CliError::Usage("empty photon-number grid".into()));
    }
    if let Some(bad) = s.nbar.iter().find(|n| !(**n > 0.0 && n.is_finite())) {
        return Err(CliError::Usage(format!(
            "photon numbers must be finite and > 0, got {bad}"
        )));
    }
    if s.dims.iter().any(|&d| d < 2) {
        return Err(CliError::Usage("--dims entries must be >= 2".into()));
    }
    let mut table = CsvTable::new(&HELSTROM_HEADER);
    for &nbar_r in &s.nbar {
        let mut dims = s.dims.clone();
        if s.adequate {
            dims.push(full_helstrom_dim(nbar_r, None));
        }
        let qcb = qcb_coh_thermal(nbar_r)?;
        let lower = helstrom_exponent_lower_bound((-qcb).exp())?;
        for dim in dims {
            let h = helstrom_measurement(
                &coherent_density(nbar_r, dim)?,
                &thermal_density(nbar_r, dim)?,
            )?;
            let stats = h.stats();
            let r = helstrom_exponent_exact(nbar_r, dim)?;
            table.push(vec![
                fmt_real(nbar_r),
                dim.to_string(),
                fmt_real(stats.p),
                fmt_real(stats.q),
                fmt_real(stats.perr),
                fmt_real(stats.bias),
                fmt_real(r.s_min),
                fmt_real(r.xi),
                fmt_real(r.xi / qcb),
                fmt_real(lower),
            ]);
        }
    }
    Ok(vec![Output {
        name: "helstrom.csv",
        table,
    }])
}
