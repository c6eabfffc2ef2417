//! Bath microstate counting inside the deformed energy shell.
//!
//! For system level `n` the bath must carry energy in
//! `[E - eps_n(kappa), E + delta - eps_n(kappa))`. Exact counts use
//! arbitrary-precision integers on the quantum-unit grid; analytic counts use
//! the smooth density `E_avail^(N-1) delta / ((N-1)! prod_j omega_j)`.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bigmath::{binomial, ln_biguint, ln_factorial, ratio_to_f64};
use crate::error::{Error, Result};
use crate::model::{deformed_spectrum, BathSpec, ShellWindow, SystemSpec};

/// Relative slack when snapping energy/unit ratios onto the integer grid.
const GRID_SNAP: f64 = 1e-9;

/// Integer form of a bath shell: occupancies with `sum_j n_j k_j` in `[max(lo, 0), hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuantizedShell {
    pub weights: Vec<u64>,
    pub lo: i64,
    pub hi: i64,
}

impl QuantizedShell {
    pub fn new(weights: Vec<u64>, lo: i64, hi: i64) -> Result<Self> {
        if weights.is_empty() || weights.contains(&0) {
            return Err(Error::InvalidParameter(
                "quantized weights must be positive".into(),
            ));
        }
        Ok(Self { weights, lo, hi })
    }

    /// Quantize the half-open bath-energy interval `[lo_energy, hi_energy)` on the grid `unit`.
    pub fn from_energy_window(
        weights: Vec<u64>,
        unit: f64,
        lo_energy: f64,
        hi_energy: f64,
    ) -> Result<Self> {
        let lo = snap(lo_energy / unit).ceil() as i64;
        let hi = snap(hi_energy / unit).ceil() as i64 - 1;
        Self::new(weights, lo, hi)
    }

    /// Counting window after clipping at zero, or `None` when empty.
    pub fn window(&self) -> Option<(u64, u64)> {
        let lo = self.lo.max(0);
        (self.hi >= lo).then_some((lo as u64, self.hi as u64))
    }
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= GRID_SNAP * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// Coefficients of `prod_j 1/(1 - z^{k_j})` up to `z^max_quanta`.
///
/// Equal weights are grouped; a group of `c` modes with weight `k` is either
/// folded in with `c` prefix passes or convolved once with the binomial block
/// `C(t + c - 1, c - 1) z^{k t}`, whichever costs fewer big-integer operations.
pub fn state_polynomial(weights: &[u64], max_quanta: u64) -> Vec<BigUint> {
    let len = max_quanta as usize + 1;
    let mut poly = vec![BigUint::zero(); len];
    poly[0] = BigUint::one();

    let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
    for &k in weights {
        *groups.entry(k).or_default() += 1;
    }
    for (k, c) in groups {
        let k = k as usize;
        if k >= len {
            continue;
        }
        let steps = (len - 1) / k + 1;
        let prefix_cost = c as usize * len;
        let block_cost = steps * len / 2;
        if prefix_cost <= block_cost {
            for _ in 0..c {
                for q in k..len {
                    let (head, tail) = poly.split_at_mut(q);
                    tail[0] += &head[q - k];
                }
            }
        } else {
            // block[t] = C(t + c - 1, c - 1)
            let mut block = Vec::with_capacity(steps);
            let mut b = BigUint::one();
            for t in 0..steps as u64 {
                if t > 0 {
                    b = b * (t + c - 1) / t;
                }
                block.push(b.clone());
            }
            let mut next = vec![BigUint::zero(); len];
            for (q, slot) in next.iter_mut().enumerate() {
                for t in 0..=q / k {
                    let src = &poly[q - k * t];
                    if !src.is_zero() {
                        *slot += src * &block[t];
                    }
                }
            }
            poly = next;
        }
    }
    poly
}

/// Exact number of occupancy vectors in the shell window.
pub fn count_bath_states_exact(shell: &QuantizedShell) -> BigUint {
    let Some((lo, hi)) = shell.window() else {
        return BigUint::zero();
    };
    let k0 = shell.weights[0];
    if shell.weights.iter().all(|&k| k == k0) {
        return degenerate_count(shell.weights.len() as u64, k0, lo, hi);
    }
    state_polynomial(&shell.weights, hi)[lo as usize..=hi as usize]
        .iter()
        .sum()
}

/// `sum_t C(t + N - 1, N - 1)` over total quanta `t` with `k t` in `[lo, hi]`,
/// collapsed with the hockey-stick identity.
fn degenerate_count(modes: u64, k: u64, lo: u64, hi: u64) -> BigUint {
    let t_lo = lo.div_ceil(k);
    let t_hi = hi / k;
    if t_hi < t_lo {
        return BigUint::zero();
    }
    let upper = binomial(t_hi + modes, modes);
    if t_lo == 0 {
        upper
    } else {
        upper - binomial(t_lo - 1 + modes, modes)
    }
}

/// All occupancy vectors in the shell window, in lexicographic order.
pub fn enumerate_bath_states(shell: &QuantizedShell, cap: u64) -> Result<Vec<Vec<u32>>> {
    let count = count_bath_states_exact(shell);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    let Some((lo, hi)) = shell.window() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    let mut current = vec![0u32; shell.weights.len()];
    enumerate_into(&shell.weights, lo, hi, 0, 0, &mut current, &mut out);
    debug_assert_eq!(BigUint::from(out.len()), count);
    Ok(out)
}

fn enumerate_into(
    weights: &[u64],
    lo: u64,
    hi: u64,
    mode: usize,
    used: u64,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    let k = weights[mode];
    let room = (hi - used) / k;
    if mode + 1 == weights.len() {
        let first = lo.saturating_sub(used).div_ceil(k);
        for n in first..=room {
            current[mode] = n as u32;
            out.push(current.clone());
        }
        current[mode] = 0;
        return;
    }
    for n in 0..=room {
        current[mode] = n as u32;
        enumerate_into(weights, lo, hi, mode + 1, used + n * k, current, out);
    }
    current[mode] = 0;
}

/// Natural log of the smooth bath-state count in a thin shell of width `delta`
/// at available energy `e_avail`.
pub fn log_omega_bath_analytic(e_avail: f64, delta: f64, bath: &BathSpec) -> Result<f64> {
    if e_avail.is_nan() || e_avail <= 0.0 {
        return Err(Error::NonPositiveEnergy(e_avail));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "shell thickness {delta} must be positive"
        )));
    }
    let n = bath.modes() as u64;
    let log_prod: f64 = bath.frequencies().iter().map(|w| w.ln()).sum();
    Ok((n - 1) as f64 * e_avail.ln() + delta.ln() - ln_factorial(n - 1) - log_prod)
}

pub fn omega_bath_analytic(e_avail: f64, delta: f64, bath: &BathSpec) -> Result<f64> {
    log_omega_bath_analytic(e_avail, delta, bath).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Exact,
    Analytic,
}

/// Which system levels enter the sum over `n`.
///
/// Every rule requires positive available bath energy `E - eps_n(kappa) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelCut {
    /// Renormalized system energy `eps_n(kappa) >= 0`.
    #[default]
    Deformed,
    /// Bare system energy `eps_n >= 0`.
    Bare,
    /// Bath-energy positivity only.
    BathOnly,
}

impl LevelCut {
    pub fn admits(self, energy: f64, deformed: f64, shell_energy: f64) -> bool {
        let bath_ok = shell_energy - deformed > 0.0;
        bath_ok
            && match self {
                LevelCut::Deformed => deformed >= 0.0,
                LevelCut::Bare => energy >= 0.0,
                LevelCut::BathOnly => true,
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCount {
    pub n: usize,
    pub epsilon: f64,
    pub epsilon_kappa: f64,
    pub admitted: bool,
    pub exact: Option<BigUint>,
    pub log_analytic: Option<f64>,
    pub p_exact: Option<f64>,
    pub p_analytic: f64,
}

impl LevelCount {
    pub fn analytic(&self) -> f64 {
        self.log_analytic.map_or(0.0, f64::exp)
    }

    /// Probability from the populated representation, exact preferred.
    pub fn p(&self) -> f64 {
        self.p_exact.unwrap_or(self.p_analytic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountMetadata {
    pub energy: f64,
    pub delta: f64,
    pub kappa: f64,
    pub modes: usize,
    pub levels_effective: usize,
    pub mode: CountMode,
    pub cut: LevelCut,
}

/// Per-level bath counts and the counting-ratio distribution `P_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub levels: Vec<LevelCount>,
    pub exact_total: Option<BigUint>,
    pub log_analytic_total: f64,
    pub meta: CountMetadata,
}

pub fn pn_counting(
    system: &SystemSpec,
    bath: &BathSpec,
    shell: &ShellWindow,
    kappa: f64,
    mode: CountMode,
) -> Result<CountTable> {
    pn_counting_with(system, bath, shell, kappa, mode, LevelCut::default())
}

pub fn pn_counting_with(
    system: &SystemSpec,
    bath: &BathSpec,
    shell: &ShellWindow,
    kappa: f64,
    mode: CountMode,
    cut: LevelCut,
) -> Result<CountTable> {
    let deformed = deformed_spectrum(system, kappa)?.levels;
    let (e, delta) = (shell.energy(), shell.delta());

    let mut levels: Vec<LevelCount> = system
        .energies()
        .iter()
        .zip(&deformed)
        .enumerate()
        .map(|(n, (&epsilon, &epsilon_kappa))| {
            let admitted = cut.admits(epsilon, epsilon_kappa, e);
            Ok(LevelCount {
                n,
                epsilon,
                epsilon_kappa,
                admitted,
                exact: None,
                log_analytic: admitted
                    .then(|| log_omega_bath_analytic(e - epsilon_kappa, delta, bath))
                    .transpose()?,
                p_exact: None,
                p_analytic: 0.0,
            })
        })
        .collect::<Result<_>>()?;

    let logs: Vec<f64> = levels.iter().filter_map(|l| l.log_analytic).collect();
    if logs.is_empty() {
        return Err(Error::EmptyShell);
    }
    let log_analytic_total = log_sum_exp(&logs);
    for l in &mut levels {
        if let Some(lw) = l.log_analytic {
            l.p_analytic = (lw - log_analytic_total).exp();
        }
    }

    let exact_total = if mode == CountMode::Exact {
        let weights = bath.integer_weights()?;
        let unit = bath.quantum_unit();
        let shells: Vec<Option<QuantizedShell>> = levels
            .iter()
            .map(|l| {
                l.admitted
                    .then(|| {
                        QuantizedShell::from_energy_window(
                            weights.clone(),
                            unit,
                            e - l.epsilon_kappa,
                            e + delta - l.epsilon_kappa,
                        )
                    })
                    .transpose()
            })
            .collect::<Result<_>>()?;
        let counts = count_many(&weights, &shells);
        let total: BigUint = counts.iter().flatten().sum();
        if total.is_zero() {
            return Err(Error::EmptyShell);
        }
        for (l, c) in levels.iter_mut().zip(counts) {
            l.p_exact = Some(c.as_ref().map_or(0.0, |c| ratio_to_f64(c, &total)));
            l.exact = c;
        }
        Some(total)
    } else {
        None
    };

    let levels_effective = levels.iter().filter(|l| l.admitted).count();
    Ok(CountTable {
        levels,
        exact_total,
        log_analytic_total,
        meta: CountMetadata {
            energy: e,
            delta,
            kappa,
            modes: bath.modes(),
            levels_effective,
            mode,
            cut,
        },
    })
}

/// Counts for several windows over the same bath, sharing one generating polynomial.
fn count_many(weights: &[u64], shells: &[Option<QuantizedShell>]) -> Vec<Option<BigUint>> {
    let degenerate = weights.iter().all(|&k| k == weights[0]);
    let max_hi = shells
        .iter()
        .flatten()
        .filter_map(QuantizedShell::window)
        .map(|(_, hi)| hi)
        .max();
    if degenerate || max_hi.is_none() {
        return shells
            .iter()
            .map(|s| s.as_ref().map(count_bath_states_exact))
            .collect();
    }
    let poly = state_polynomial(weights, max_hi.unwrap_or(0));
    let mut cumulative = Vec::with_capacity(poly.len());
    let mut acc = BigUint::zero();
    for c in &poly {
        acc += c;
        cumulative.push(acc.clone());
    }
    shells
        .iter()
        .map(|s| {
            s.as_ref().map(|s| match s.window() {
                None => BigUint::zero(),
                Some((0, hi)) => cumulative[hi as usize].clone(),
                Some((lo, hi)) => &cumulative[hi as usize] - &cumulative[lo as usize - 1],
            })
        })
        .collect()
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl CountTable {
    /// `ln Omega_{N+1}` from the exact total when present, else the analytic one.
    pub fn log_total(&self) -> f64 {
        self.exact_total
            .as_ref()
            .map_or(self.log_analytic_total, ln_biguint)
    }

    /// `(n, x, P_n)` triples for Gibbs fitting against the chosen abscissa.
    pub fn gibbs_points(&self, abscissa: Abscissa, source: CountMode) -> Vec<LevelPoint> {
        self.levels
            .iter()
            .map(|l| LevelPoint {
                n: l.n,
                x: match abscissa {
                    Abscissa::Deformed => l.epsilon_kappa,
                    Abscissa::Bare => l.epsilon,
                    Abscissa::Index => l.n as f64,
                },
                p: match source {
                    CountMode::Exact => l.p_exact.unwrap_or(0.0),
                    CountMode::Analytic => l.p_analytic,
                },
            })
            .collect()
    }

    pub const CSV_HEADER: [&'static str; 9] = [
        "n",
        "epsilon_n",
        "epsilon_n_kappa",
        "omega_exact",
        "omega_analytic_log",
        "p_exact",
        "p_analytic",
        "ln_p_exact",
        "ln_p_analytic",
    ];

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv output failed: {e}"));
        w.write_record(Self::CSV_HEADER).map_err(io)?;
        for row in self.rows() {
            w.write_record([
                row.n.to_string(),
                row.epsilon_n.to_string(),
                row.epsilon_n_kappa.to_string(),
                row.omega_exact.unwrap_or_default(),
                opt(row.omega_analytic_log),
                opt(row.p_exact),
                row.p_analytic.to_string(),
                opt(row.ln_p_exact),
                opt(row.ln_p_analytic),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidParameter(format!("csv output failed: {e}")))?;
        Ok(())
    }

    pub fn rows(&self) -> Vec<CountRow> {
        self.levels
            .iter()
            .map(|l| CountRow {
                n: l.n,
                epsilon_n: l.epsilon,
                epsilon_n_kappa: l.epsilon_kappa,
                admitted: l.admitted,
                omega_exact: l.exact.as_ref().map(ToString::to_string),
                omega_analytic_log: l.log_analytic,
                p_exact: l.p_exact,
                p_analytic: l.p_analytic,
                ln_p_exact: l.p_exact.filter(|p| *p > 0.0).map(f64::ln),
                ln_p_analytic: (l.p_analytic > 0.0).then(|| l.p_analytic.ln()),
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "metadata": self.meta,
            "omega_total_exact": self.exact_total.as_ref().map(ToString::to_string),
            "omega_total_analytic_log": self.log_analytic_total,
            "levels": self.rows(),
        })
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One serialized row of a [`CountTable`]. Exact counts are decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub n: usize,
    pub epsilon_n: f64,
    pub epsilon_n_kappa: f64,
    pub admitted: bool,
    pub omega_exact: Option<String>,
    pub omega_analytic_log: Option<f64>,
    pub p_exact: Option<f64>,
    pub p_analytic: f64,
    pub ln_p_exact: Option<f64>,
    pub ln_p_analytic: Option<f64>,
}

/// Energy axis used when regressing `ln P_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    #[default]
    Deformed,
    Bare,
    Index,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelPoint {
    pub n: usize,
    pub x: f64,
    pub p: f64,
}

/// Bath-energy band `[bath_lo, bath_hi]` allowed for one system level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformationRow {
    pub n: usize,
    pub bath_lo: f64,
    pub bath_hi: f64,
}

/// Per-level bath windows clipped at zero; levels whose whole window is negative are dropped.
pub fn deformation_map(
    system: &SystemSpec,
    shell: &ShellWindow,
    kappa: f64,
) -> Result<Vec<DeformationRow>> {
    let deformed = deformed_spectrum(system, kappa)?.levels;
    Ok(deformed
        .iter()
        .enumerate()
        .filter_map(|(n, &eps)| {
            let lo = shell.energy() - eps;
            let hi = shell.energy() + shell.delta() - eps;
            (hi >= 0.0).then(|| DeformationRow {
                n,
                bath_lo: lo.max(0.0),
                bath_hi: hi,
            })
        })
        .collect())
}
