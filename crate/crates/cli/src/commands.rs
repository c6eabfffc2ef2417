//! The five harness commands. Each returns a typed result; [`crate::output`]
//! renders it.

use std::sync::Arc;

use serde::Serialize;
use thermalize::counting::DeformationRow;
use thermalize::sampler::{split_seed, typicality_report};
use thermalize::thermo::{
    fit_kappa_series, scan_fit_windows, TwoLevelApprox, TwoLevelExact, WindowCandidate,
};
use thermalize::{
    deformation_map, pn_counting_with, two_level_approx, two_level_exact, Abscissa, Complex64,
    CountTable, Error, FitWindow, ShellBasis, TwoLevelState, TypicalityReport,
};

use crate::config::LoadedConfig;
use crate::error::{CliError, Result};

/// Coupling strengths of the reference harmonic-bath run (N = 50, E = 0.5, omega = 1e-3).
pub const REFERENCE_KAPPAS: [f64; 3] = [5e-6, 5e-5, 5e-4];
/// Reference inverse temperatures for [`REFERENCE_KAPPAS`].
pub const REFERENCE_BETAS: [f64; 3] = [98.94, 98.85, 98.69];

/// Window found by [`scan_fit_windows`] for the reference run; see the README.
pub const CALIBRATED_WINDOW: FitWindow = FitWindow { lo: 0, hi: 8 };

pub fn cmd_count(cfg: &LoadedConfig) -> Result<CountTable> {
    let system = cfg.system()?;
    let bath = cfg.bath()?;
    let shell = cfg.shell()?;
    let kappa = thermalize::model::kappa(&bath);
    let run = &cfg.config.run;
    Ok(pn_counting_with(
        &system,
        &bath,
        &shell,
        kappa,
        run.mode,
        run.level_cut,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub kappa: f64,
    pub beta: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Report {
    pub window: FitWindow,
    pub abscissa: Abscissa,
    pub beta_theory: f64,
    pub rows: Vec<Table1Row>,
    pub monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<Vec<WindowCandidate>>,
}

impl Table1Report {
    pub fn betas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.beta).collect()
    }
}

pub fn cmd_table1(cfg: &LoadedConfig, scan: bool) -> Result<Table1Report> {
    let system = cfg.system()?;
    let bath = cfg.bath()?;
    let shell = cfg.shell()?;
    let run = &cfg.config.run;
    let kappas = run
        .kappas
        .clone()
        .unwrap_or_else(|| REFERENCE_KAPPAS.to_vec());
    let window = match run.fit_window {
        Some(_) => cfg.fit_window()?,
        None => CALIBRATED_WINDOW,
    };
    let fits = fit_kappa_series(
        &system,
        &bath,
        &shell,
        &kappas,
        run.mode,
        run.level_cut,
        run.abscissa,
        window,
    )?;
    let rows: Vec<Table1Row> = kappas
        .iter()
        .zip(&fits)
        .map(|(&kappa, f)| Table1Row {
            kappa,
            beta: f.beta,
            intercept: f.intercept,
            r_squared: f.r_squared,
            points: f.points,
        })
        .collect();
    let betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    let ordered_kappas = strictly_increasing(&kappas);
    Ok(Table1Report {
        window,
        abscissa: run.abscissa,
        beta_theory: (bath.modes() as f64 - 1.0) / shell.energy(),
        monotone: !ordered_kappas || strictly_decreasing(&betas),
        rows,
        scan: scan.then(|| {
            scan_fit_windows(
                &system,
                &bath,
                &shell,
                &REFERENCE_KAPPAS,
                &REFERENCE_BETAS,
                run.level_cut,
                run.abscissa,
            )
        }),
    })
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformBand {
    pub kappa: f64,
    pub rows: Vec<DeformationRow>,
}

/// Bath bands without coupling and at the configured kappa.
pub fn cmd_deform_map(cfg: &LoadedConfig) -> Result<Vec<DeformBand>> {
    let system = cfg.system()?;
    let shell = cfg.shell()?;
    let kappa = match cfg.config.bath {
        Some(_) => thermalize::model::kappa(&cfg.bath()?),
        None => 0.0,
    };
    [0.0, kappa]
        .into_iter()
        .map(|k| {
            Ok(DeformBand {
                kappa: k,
                rows: deformation_map(&system, &shell, k)?,
            })
        })
        .collect()
}

pub fn cmd_sample(cfg: &LoadedConfig) -> Result<TypicalityReport> {
    let system = cfg.system()?;
    let bath = cfg.bath()?;
    let shell = cfg.shell()?;
    let run = &cfg.config.run;
    let kappa = thermalize::model::kappa(&bath);
    let basis = ShellBasis::with_cut(&system, &bath, &shell, kappa, run.cap, run.level_cut)?;
    let seeds: Vec<u64> = (0..run.samples as u64)
        .map(|i| split_seed(run.seed, i))
        .collect();
    Ok(typicality_report(
        &Arc::new(basis),
        &system,
        &bath,
        &seeds,
        true,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoLevelRow {
    pub abs_f: f64,
    pub exact: TwoLevelExact,
    pub approx: Option<TwoLevelApprox>,
}

pub fn cmd_two_level(cfg: &LoadedConfig) -> Result<Vec<TwoLevelRow>> {
    let t = cfg
        .config
        .two_level
        .as_ref()
        .ok_or_else(|| cfg.error("two_level", "section is required"))?;
    t.coherences
        .iter()
        .map(|&f| {
            let state = TwoLevelState::new(t.beta, t.gap, Complex64::new(f, 0.0))
                .map_err(|e| cfg.error("two_level.coherences", e))?;
            let approx = match two_level_approx(&state) {
                Ok(a) => Some(a),
                Err(Error::DegenerateGap(_)) => None,
                Err(e) => return Err(CliError::from(e)),
            };
            Ok(TwoLevelRow {
                abs_f: f,
                exact: two_level_exact(&state),
                approx,
            })
        })
        .collect()
}
