//! Independent reference implementations used by the integration tests.
//!
//! Both oracles work with dense truncated matrices and share no code with the
//! library's closed-form routines.

#![allow(dead_code)]

use nalgebra::DMatrix;
use thermalize::model::coupling_summary;
use thermalize::{BathSpec, Complex64, SystemSpec, UniverseState};

/// `exp(delta (a^dag - a))` on Fock states `0..cutoff`.
pub fn displacement_matrix(delta: f64, cutoff: usize) -> DMatrix<f64> {
    let mut generator = DMatrix::<f64>::zeros(cutoff, cutoff);
    for k in 1..cutoff {
        let s = (k as f64).sqrt();
        // a^dag |k-1> = sqrt(k) |k>, a |k> = sqrt(k) |k-1>.
        generator[(k, k - 1)] = delta * s;
        generator[(k - 1, k)] = -delta * s;
    }
    generator.exp()
}

/// Cutoff large enough that truncation error is far below 1e-12 for occupancies up to `max_occ`.
pub fn safe_cutoff(max_occ: usize, delta: f64) -> usize {
    max_occ + (10.0 * delta.abs()).ceil() as usize + 48
}

/// Reduced density matrix from the full displaced bath wavefunctions.
///
/// Builds `psi_n = (prod_j D(alpha_jn)) sum_a C(n, a) |a>` as a dense vector
/// on the truncated product space and sets `rho_nm = <psi_m | psi_n>`.
pub fn dense_reduced(
    state: &UniverseState,
    system: &SystemSpec,
    bath: &BathSpec,
) -> DMatrix<Complex64> {
    let basis = &state.basis;
    let levels = system.len();
    let modes = bath.modes();
    let summary = coupling_summary(system, bath);
    let max_occ = (0..basis.dim())
        .flat_map(|i| basis.label(i).1.to_vec())
        .max()
        .unwrap_or(0) as usize;
    let max_alpha = summary
        .displacements
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(2.0 * b.abs()));
    let cutoff = safe_cutoff(max_occ, max_alpha);
    let space = cutoff.pow(modes as u32);

    let mut psi: Vec<Option<Vec<Complex64>>> = vec![None; levels];
    for (n, slot) in psi.iter_mut().enumerate() {
        let mut v = vec![Complex64::new(0.0, 0.0); space];
        let mut any = false;
        for i in 0..basis.dim() {
            let (level, occ) = basis.label(i);
            if level != n {
                continue;
            }
            any = true;
            let idx = occ.iter().fold(0usize, |acc, &o| acc * cutoff + o as usize);
            v[idx] += state.amplitudes[i];
        }
        if !any {
            continue;
        }
        for j in 0..modes {
            let d = displacement_matrix(summary.displacements[n][j], cutoff);
            v = apply_on_mode(&v, &d, j, modes, cutoff);
        }
        *slot = Some(v);
    }

    let mut rho = DMatrix::<Complex64>::zeros(levels, levels);
    for n in 0..levels {
        for m in 0..levels {
            if let (Some(a), Some(b)) = (&psi[n], &psi[m]) {
                rho[(n, m)] = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            }
        }
    }
    rho
}

fn apply_on_mode(
    v: &[Complex64],
    op: &DMatrix<f64>,
    mode: usize,
    modes: usize,
    cutoff: usize,
) -> Vec<Complex64> {
    let stride = cutoff.pow((modes - 1 - mode) as u32);
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (idx, &x) in v.iter().enumerate() {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        let k = (idx / stride) % cutoff;
        let base = idx - k * stride;
        for r in 0..cutoff {
            let w = op[(r, k)];
            if w != 0.0 {
                out[base + r * stride] += x * w;
            }
        }
    }
    out
}

/// Brute-force count of occupancy vectors with weighted total in `[lo, hi]`.
pub fn brute_force_count(weights: &[u64], lo: u64, hi: u64) -> u64 {
    fn rec(weights: &[u64], used: u64, lo: u64, hi: u64) -> u64 {
        match weights.split_first() {
            None => u64::from(used >= lo && used <= hi),
            Some((&w, rest)) => {
                let mut total = 0;
                let mut u = used;
                while u <= hi {
                    total += rec(rest, u, lo, hi);
                    u += w;
                }
                total
            }
        }
    }
    rec(weights, 0, lo, hi)
}
