//! Temperatures and entropies: Gibbs fits of `P_n`, quasi-temperatures,
//! bath-window overlaps and the two-level quasi-thermal state.

use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bigmath::ln_biguint;
use crate::counting::{pn_counting_with, Abscissa, CountMode, LevelCut, LevelPoint};
use crate::error::{Error, Result};
use crate::model::{deformed_spectrum, BathSpec, ShellWindow, SystemSpec};

/// Inclusive range of level indices used by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: usize,
    pub hi: usize,
}

impl FitWindow {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidParameter(format!(
                "fit window {lo}:{hi} is reversed"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn range(&self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl std::str::FromStr for FitWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("fit window `{s}` is not of the form a:b"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        Self::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        )
    }
}

impl std::fmt::Display for FitWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Least-squares fit `ln P_n = intercept - beta x_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsFit {
    pub beta: f64,
    pub intercept: f64,
    pub window: FitWindow,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub points: usize,
}

/// Ordinary least squares of `ln P_n` on `x_n` over levels in `window` with `P_n > 0`.
pub fn fit_beta(points: &[LevelPoint], window: FitWindow) -> Result<GibbsFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| window.range().contains(&p.n) && p.p > 0.0)
        .map(|p| (p.x, p.p.ln()))
        .collect();
    if used.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "window {window} holds {} populated levels, need at least 3",
            used.len()
        )));
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|u| u.0).sum::<f64>() / k;
    let my = used.iter().map(|u| u.1).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|u| (u.0 - mx) * (u.0 - mx)).sum();
    let sxy: f64 = used.iter().map(|u| (u.0 - mx) * (u.1 - my)).sum();
    let syy: f64 = used.iter().map(|u| (u.1 - my) * (u.1 - my)).sum();
    if sxx <= 0.0 || sxx <= 1e-300 {
        return Err(Error::DegenerateFit(format!(
            "all abscissae equal in window {window}"
        )));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = used
        .iter()
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(GibbsFit {
        beta: -slope,
        intercept,
        window,
        r_squared,
        residuals,
        points: used.len(),
    })
}

/// Gibbs fits of `P_n` at each `kappa`, sharing one window and abscissa.
#[allow(clippy::too_many_arguments)]
pub fn fit_kappa_series(
    system: &SystemSpec,
    bath: &BathSpec,
    shell: &ShellWindow,
    kappas: &[f64],
    mode: CountMode,
    cut: LevelCut,
    abscissa: Abscissa,
    window: FitWindow,
) -> Result<Vec<GibbsFit>> {
    kappas
        .iter()
        .map(|&k| {
            let table = pn_counting_with(system, bath, shell, k, mode, cut)?;
            fit_beta(&table.gibbs_points(abscissa, mode), window)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowCandidate {
    pub window: FitWindow,
    pub betas: Vec<f64>,
    pub spread: f64,
    /// Sum of squared differences to the reference betas.
    pub distance: f64,
}

/// Scan windows `lo in 0..=5`, `hi in 5..=40` of analytic fits at `kappas`.
///
/// A window is kept when its betas fall strictly with kappa, sit within 2% of
/// `(N - 1) / E`, and spread (first minus last) within a factor 3 of the
/// reference spread. Survivors are ordered by distance to `reference`.
pub fn scan_fit_windows(
    system: &SystemSpec,
    bath: &BathSpec,
    shell: &ShellWindow,
    kappas: &[f64],
    reference: &[f64],
    cut: LevelCut,
    abscissa: Abscissa,
) -> Vec<WindowCandidate> {
    let theory = (bath.modes() as f64 - 1.0) / shell.energy();
    let reference_spread = reference[0] - reference[reference.len() - 1];
    let mut out = Vec::new();
    for lo in 0..=5 {
        for hi in 5..=40 {
            let Ok(window) = FitWindow::new(lo, hi) else {
                continue;
            };
            let Ok(fits) = fit_kappa_series(
                system,
                bath,
                shell,
                kappas,
                CountMode::Analytic,
                cut,
                abscissa,
                window,
            ) else {
                continue;
            };
            let betas: Vec<f64> = fits.iter().map(|f| f.beta).collect();
            let spread = betas[0] - betas[betas.len() - 1];
            let falling = betas.windows(2).all(|w| w[1] < w[0]);
            let near = betas.iter().all(|b| (b - theory).abs() <= 0.02 * theory);
            let spread_ok = (reference_spread / 3.0..=3.0 * reference_spread).contains(&spread);
            if falling && near && spread_ok {
                let distance = betas
                    .iter()
                    .zip(reference)
                    .map(|(b, r)| (b - r).powi(2))
                    .sum();
                out.push(WindowCandidate {
                    window,
                    betas,
                    spread,
                    distance,
                });
            }
        }
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    out
}

/// Level-dependent inverse temperature `beta_n = (N - 1) / (E + kappa lambda_n^2)`.
pub fn quasi_temperature(modes: usize, energy: f64, kappa: f64, lambda: f64) -> Result<f64> {
    if modes < 2 {
        return Err(Error::InvalidParameter(format!(
            "quasi-temperature needs N >= 2, got {modes}"
        )));
    }
    let denom = energy + kappa * lambda * lambda;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::NonPositiveDenominator(denom));
    }
    Ok((modes - 1) as f64 / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubspaceOverlap {
    pub overlapping: bool,
    pub width: f64,
}

/// Whether the bath windows of levels `n` and `m` intersect, and by how much.
pub fn subspace_overlap(
    system: &SystemSpec,
    kappa: f64,
    delta: f64,
    n: usize,
    m: usize,
) -> Result<SubspaceOverlap> {
    let len = system.len();
    for i in [n, m] {
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
    }
    let levels = deformed_spectrum(system, kappa)?.levels;
    let gap = (levels[n] - levels[m]).abs();
    Ok(SubspaceOverlap {
        overlapping: gap < delta,
        width: (delta - gap).max(0.0),
    })
}

/// Two-level reduced state `[[p+, F], [F*, p-]]` with Gibbs diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelState {
    beta: f64,
    gap: f64,
    coherence: Complex64,
}

impl TwoLevelState {
    pub fn new(beta: f64, gap: f64, coherence: Complex64) -> Result<Self> {
        if !(beta.is_finite() && gap.is_finite() && coherence.norm().is_finite()) {
            return Err(Error::InvalidParameter(
                "two-level parameters must be finite".into(),
            ));
        }
        let s = Self {
            beta,
            gap,
            coherence,
        };
        let (pp, pm) = s.gibbs();
        let f2 = coherence.norm_sqr();
        if f2 > pp * pm {
            return Err(Error::NotPositive { f2, bound: pp * pm });
        }
        Ok(s)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn coherence(&self) -> Complex64 {
        self.coherence
    }

    /// `(p+, p-)` with `p± = 1 / (1 + exp(±beta gap))`.
    pub fn gibbs(&self) -> (f64, f64) {
        let x = self.beta * self.gap;
        (logistic(-x), logistic(x))
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelExact {
    pub p_plus: f64,
    pub p_minus: f64,
    pub s_vn: f64,
    pub beta_eff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelApprox {
    pub p_plus: f64,
    pub p_minus: f64,
    pub s_vn: f64,
    pub beta_eff: f64,
    pub s_gibbs: f64,
}

fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Exact eigenvalues of the two-level state and the derived entropy and effective temperature.
///
/// `P+` is the eigenvalue continuous with `p+`: the smaller one when
/// `beta gap >= 0`. A population inversion yields a negative `beta_eff`.
pub fn two_level_exact(state: &TwoLevelState) -> TwoLevelExact {
    let (pp, pm) = state.gibbs();
    let half_split = (0.25 * (pm - pp).powi(2) + state.coherence.norm_sqr()).sqrt();
    let (lower, upper) = (0.5 - half_split, 0.5 + half_split);
    let (p_plus, p_minus) = if state.beta * state.gap >= 0.0 {
        (lower, upper)
    } else {
        (upper, lower)
    };
    TwoLevelExact {
        p_plus,
        p_minus,
        s_vn: entropy_term(p_plus) + entropy_term(p_minus),
        beta_eff: -(p_plus / p_minus).ln() / state.gap,
    }
}

/// Entropy of the Gibbs state `diag(p+, p-)`: `x / (e^x + 1) + ln(e^-x + 1)` with `x = beta gap`.
pub fn gibbs_entropy(beta: f64, gap: f64) -> f64 {
    let x = beta * gap;
    x * logistic(-x) + (-x).exp().ln_1p()
}

/// Second-order expansion in `|F|` of the two-level quantities.
pub fn two_level_approx(state: &TwoLevelState) -> Result<TwoLevelApprox> {
    let x = state.beta * state.gap;
    if x.abs() < 1e-6 {
        return Err(Error::DegenerateGap(x));
    }
    let (pp, pm) = state.gibbs();
    let f2 = state.coherence.norm_sqr();
    let coth = 1.0 / (0.5 * x).tanh();
    let cosh2 = (0.5 * x).cosh().powi(2);
    let s_gibbs = gibbs_entropy(state.beta, state.gap);
    Ok(TwoLevelApprox {
        p_plus: pp - coth * f2,
        p_minus: pm + coth * f2,
        s_vn: s_gibbs - x * f2 * coth,
        beta_eff: state.beta + 4.0 * f2 / state.gap * cosh2 * coth,
        s_gibbs,
    })
}

/// Microstate count as an exact integer or as its natural log.
#[derive(Debug, Clone, PartialEq)]
pub enum Count {
    Exact(BigUint),
    Log(f64),
}

/// `S = ln Omega`.
pub fn thermodynamic_entropy(count: &Count) -> Result<f64> {
    match count {
        Count::Exact(c) if c.is_zero() => Err(Error::ZeroCount),
        Count::Exact(c) => Ok(ln_biguint(c)),
        Count::Log(l) if l.is_finite() => Ok(*l),
        Count::Log(_) => Err(Error::ZeroCount),
    }
}

/// Central-difference `dS/dE` of a log-count function at `energy`.
pub fn beta_from_entropy(
    log_count: impl Fn(f64) -> Result<f64>,
    energy: f64,
    step: f64,
) -> Result<f64> {
    let up = thermodynamic_entropy(&Count::Log(log_count(energy + step)?))?;
    let down = thermodynamic_entropy(&Count::Log(log_count(energy - step)?))?;
    Ok((up - down) / (2.0 * step))
}
