//! Overlaps of displaced Fock states and the factorized decoherence factor.

use serde::Serialize;

use crate::bigmath::ln_factorial;
use crate::error::{Error, Result};
use crate::model::{relative_displacements, BathSpec, SystemSpec};

/// Associated Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence in `n`.
pub fn laguerre_assoc(n: u32, k: u32, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for i in 1..n {
        let i = i as f64;
        let next = ((2.0 * i + 1.0 + k - x) * cur - (i + k) * prev) / (i + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `<m| D(delta) |n>` for a real displacement `delta`.
///
/// For `m >= n` this is
/// `delta^(m-n) exp(-delta^2/2) L_n^(m-n)(delta^2) sqrt(n!/m!)`; the other
/// ordering uses `<m|D(delta)|n> = <n|D(-delta)|m>`.
pub fn displaced_overlap(m: u32, n: u32, delta: f64) -> f64 {
    if m < n {
        return displaced_overlap(n, m, -delta);
    }
    let gap = m - n;
    let x = delta * delta;
    let lag = laguerre_assoc(n, gap, x);
    if gap == 0 {
        return (-0.5 * x).exp() * lag;
    }
    if delta == 0.0 {
        return 0.0;
    }
    let log_mag = gap as f64 * delta.abs().ln() - 0.5 * x
        + 0.5 * (ln_factorial(n as u64) - ln_factorial(m as u64));
    let sign = if delta < 0.0 && gap % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    sign * log_mag.exp() * lag
}

/// Dense table `t[m][n] = <m|D(delta)|n>` for occupancies up to `max_occ`.
#[derive(Debug, Clone)]
pub struct OverlapTable {
    dim: usize,
    values: Vec<f64>,
}

impl OverlapTable {
    pub fn new(max_occ: u32, delta: f64) -> Self {
        let dim = max_occ as usize + 1;
        let mut values = vec![0.0; dim * dim];
        for m in 0..dim {
            for n in 0..dim {
                values[m * dim + n] = displaced_overlap(m as u32, n as u32, delta);
            }
        }
        Self { dim, values }
    }

    #[inline]
    pub fn get(&self, m: u32, n: u32) -> f64 {
        self.values[m as usize * self.dim + n as usize]
    }
}

/// Per-mode factors `d_j` and their product `D`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceFactor {
    pub factors: Vec<f64>,
    pub product: f64,
}

impl DecoherenceFactor {
    pub fn modes(&self) -> usize {
        self.factors.len()
    }
}

/// `D = prod_j <occ_m[j]| D(Delta_j) |occ_n[j]>` with
/// `Delta_j = -g_j (lambda_n - lambda_m) / (2 omega_j)`.
pub fn decoherence_product(
    system: &SystemSpec,
    bath: &BathSpec,
    n: usize,
    m: usize,
    occ_n: &[u32],
    occ_m: &[u32],
) -> Result<DecoherenceFactor> {
    for level in [n, m] {
        if level >= system.len() {
            return Err(Error::IndexOutOfRange {
                index: level,
                len: system.len(),
            });
        }
    }
    for occ in [occ_n, occ_m] {
        if occ.len() != bath.modes() {
            return Err(Error::DimensionMismatch {
                what: "occupancy",
                got: occ.len(),
                expected: bath.modes(),
            });
        }
    }
    let deltas = relative_displacements(system, bath, n, m);
    let factors: Vec<f64> = deltas
        .iter()
        .zip(occ_m.iter().zip(occ_n))
        .map(|(&d, (&a, &b))| displaced_overlap(a, b, d))
        .collect();
    let product = factors.iter().product();
    Ok(DecoherenceFactor { factors, product })
}
