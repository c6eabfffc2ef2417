//! Random pure states of the constrained universe and their reduction to the
//! system density matrix.
//!
//! The partial trace is taken in the undisplaced Fock basis of the bath, so
//! coherences between levels `n` and `m` pick up the decoherence factor
//! `prod_j <m_j| D(alpha_jn - alpha_jm) |n_j>`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bigmath::ratio_to_f64;
use crate::counting::{count_bath_states_exact, enumerate_bath_states, LevelCut, QuantizedShell};
use crate::error::{Error, Result};
use crate::model::{deformed_spectrum, relative_displacements, BathSpec, ShellWindow, SystemSpec};
use crate::overlap::OverlapTable;

/// Default ceiling on the number of shell basis states held in memory.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Derive the RNG seed of sample `index` from a base seed (splitmix64 finalizer of `seed ^ index`).
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index;
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Enumerated basis `|n, {n_j}>` of the shell, grouped by system level.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellBasis {
    levels: usize,
    /// `(level, start, end)` index ranges into `occupancies`.
    blocks: Vec<(usize, usize, usize)>,
    occupancies: Vec<Vec<u32>>,
    counts: Vec<BigUint>,
}

impl ShellBasis {
    pub fn new(
        system: &SystemSpec,
        bath: &BathSpec,
        shell: &ShellWindow,
        kappa: f64,
        cap: u64,
    ) -> Result<Self> {
        Self::with_cut(system, bath, shell, kappa, cap, LevelCut::default())
    }

    pub fn with_cut(
        system: &SystemSpec,
        bath: &BathSpec,
        shell: &ShellWindow,
        kappa: f64,
        cap: u64,
        cut: LevelCut,
    ) -> Result<Self> {
        let weights = bath.integer_weights()?;
        let deformed = deformed_spectrum(system, kappa)?.levels;
        let e = shell.energy();
        let mut shells = Vec::new();
        for (n, (&eps, &epk)) in system.energies().iter().zip(&deformed).enumerate() {
            if cut.admits(eps, epk, e) {
                let q = QuantizedShell::from_energy_window(
                    weights.clone(),
                    bath.quantum_unit(),
                    e - epk,
                    e + shell.delta() - epk,
                )?;
                shells.push((n, q));
            }
        }
        let counts: Vec<BigUint> = shells
            .iter()
            .map(|(_, q)| count_bath_states_exact(q))
            .collect();
        let total: BigUint = counts.iter().sum();
        if total > BigUint::from(cap) {
            return Err(Error::CapExceeded {
                count: total.to_string(),
                cap,
            });
        }
        if total.is_zero() {
            return Err(Error::EmptyShell);
        }
        let mut occupancies = Vec::new();
        let mut blocks = Vec::new();
        let mut kept = Vec::new();
        for ((n, q), c) in shells.iter().zip(counts) {
            let states = enumerate_bath_states(q, cap)?;
            if states.is_empty() {
                continue;
            }
            let start = occupancies.len();
            occupancies.extend(states);
            blocks.push((*n, start, occupancies.len()));
            kept.push(c);
        }
        Ok(Self {
            levels: system.len(),
            blocks,
            occupancies,
            counts: kept,
        })
    }

    pub fn dim(&self) -> usize {
        self.occupancies.len()
    }

    pub fn system_levels(&self) -> usize {
        self.levels
    }

    /// `(level, occupancy)` label of basis state `i`.
    pub fn label(&self, i: usize) -> (usize, &[u32]) {
        let &(n, _, _) = self
            .blocks
            .iter()
            .find(|(_, s, e)| (*s..*e).contains(&i))
            .expect("basis index out of range");
        (n, &self.occupancies[i])
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &[Vec<u32>])> + '_ {
        self.blocks
            .iter()
            .map(|&(n, s, e)| (n, &self.occupancies[s..e]))
    }

    /// Microcanonical populations `Omega_N(n) / Omega_{N+1}` from the exact counts.
    pub fn microcanonical_populations(&self) -> Vec<f64> {
        let total: BigUint = self.counts.iter().sum();
        let mut p = vec![0.0; self.levels];
        for (&(n, _, _), c) in self.blocks.iter().zip(&self.counts) {
            p[n] = ratio_to_f64(c, &total);
        }
        p
    }

    /// Uniformly random unit vector on the shell subspace.
    pub fn sample(self: &Arc<Self>, seed: u64) -> UniverseState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amplitudes: Vec<Complex64> = (0..self.dim())
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= norm;
        }
        UniverseState {
            basis: Arc::clone(self),
            amplitudes,
            seed,
        }
    }
}

/// Pure state `sum' C(n, {n_j}) |n, {n_j}>` of the constrained universe.
#[derive(Debug, Clone)]
pub struct UniverseState {
    pub basis: Arc<ShellBasis>,
    pub amplitudes: Vec<Complex64>,
    pub seed: u64,
}

impl UniverseState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    fn block_amplitudes(&self) -> impl Iterator<Item = (usize, &[Vec<u32>], &[Complex64])> + '_ {
        self.basis
            .blocks
            .iter()
            .map(|&(n, s, e)| (n, &self.basis.occupancies[s..e], &self.amplitudes[s..e]))
    }
}

pub fn sample_universe_state(
    system: &SystemSpec,
    bath: &BathSpec,
    shell: &ShellWindow,
    kappa: f64,
    seed: u64,
    cap: u64,
) -> Result<UniverseState> {
    Ok(Arc::new(ShellBasis::new(system, bath, shell, kappa, cap)?).sample(seed))
}

/// Reduced state of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl ReducedDensityMatrix {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn population(&self, n: usize) -> f64 {
        self.matrix[(n, n)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.population(n)).collect()
    }

    /// `F_nm`, the coefficient of `|n><m|`.
    pub fn coherence(&self, n: usize, m: usize) -> Complex64 {
        self.matrix[(n, m)]
    }

    pub fn max_coherence(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|n| (0..d).filter(move |&m| m != n).map(move |m| (n, m)))
            .map(|(n, m)| self.matrix[(n, m)].norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for n in 0..d {
            for m in 0..d {
                err = err.max((self.matrix[(n, m)] - self.matrix[(m, n)].conj()).norm());
            }
        }
        err
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian within 1e-12, unit trace within 1e-12, eigenvalues above -1e-10.
    pub fn is_physical(&self) -> bool {
        self.hermiticity_error() <= 1e-12
            && (self.trace() - 1.0).abs() <= 1e-12
            && self.min_eigenvalue() >= -1e-10
    }
}

/// Diagonal of the reduced state only; `O(dim)`.
///
/// Divided by the squared norm so rounding in the normalization cannot shift
/// the populations off unit sum.
pub fn level_populations(state: &UniverseState) -> Vec<f64> {
    let mut p = vec![0.0; state.basis.levels];
    for (n, _, amps) in state.block_amplitudes() {
        p[n] = amps.iter().map(|c| c.norm_sqr()).sum();
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// Trace the bath out of `state`.
pub fn reduce_density_matrix(
    state: &UniverseState,
    system: &SystemSpec,
    bath: &BathSpec,
) -> ReducedDensityMatrix {
    let dim = state.basis.levels;
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for (n, p) in level_populations(state).into_iter().enumerate() {
        matrix[(n, n)] = Complex64::new(p, 0.0);
    }

    let blocks: Vec<_> = state.block_amplitudes().collect();
    let max_occ = state
        .basis
        .occupancies
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0);
    let pairs: Vec<(usize, usize)> = (0..blocks.len())
        .flat_map(|a| (a + 1..blocks.len()).map(move |b| (a, b)))
        .collect();

    let coherences: Vec<(usize, usize, Complex64)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (n, occ_n, amp_n) = blocks[a];
            let (m, occ_m, amp_m) = blocks[b];
            let deltas = relative_displacements(system, bath, n, m);
            let mut cache: HashMap<u64, Arc<OverlapTable>> = HashMap::new();
            let tables: Vec<Arc<OverlapTable>> = deltas
                .iter()
                .map(|d| {
                    Arc::clone(
                        cache
                            .entry(d.to_bits())
                            .or_insert_with(|| Arc::new(OverlapTable::new(max_occ, *d))),
                    )
                })
                .collect();
            let mut f = Complex64::zero();
            for (oa, ca) in occ_n.iter().zip(amp_n) {
                let mut inner = Complex64::zero();
                for (ob, cb) in occ_m.iter().zip(amp_m) {
                    let mut d = 1.0;
                    for ((t, &x), &y) in tables.iter().zip(ob).zip(oa) {
                        d *= t.get(x, y);
                        if d == 0.0 {
                            break;
                        }
                    }
                    if d != 0.0 {
                        inner += cb.conj() * d;
                    }
                }
                f += ca * inner;
            }
            (n, m, f)
        })
        .collect();

    for (n, m, f) in coherences {
        matrix[(n, m)] = f;
        matrix[(m, n)] = f.conj();
    }
    ReducedDensityMatrix { matrix }
}

/// Sampled-versus-counted populations over a set of seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityReport {
    pub dimension: usize,
    pub expected: Vec<f64>,
    pub seeds: Vec<u64>,
    /// `max_n |P_n(sampled) - Omega_N(n)/Omega_{N+1}|` per seed.
    pub deviations: Vec<f64>,
    pub median_deviation: f64,
    /// Largest `|F_nm|` per seed, when coherences were requested.
    pub max_coherence: Option<Vec<f64>>,
    /// `|F_01|` per seed, when coherences were requested and the system has two or more levels.
    pub coherence_01: Option<Vec<f64>>,
}

impl TypicalityReport {
    pub fn mean_coherence_01(&self) -> Option<f64> {
        self.coherence_01
            .as_ref()
            .map(|v| v.iter().sum::<f64>() / v.len().max(1) as f64)
    }
}

pub fn pn_typicality_check(
    system: &SystemSpec,
    bath: &BathSpec,
    shell: &ShellWindow,
    kappa: f64,
    seeds: &[u64],
    cap: u64,
) -> Result<TypicalityReport> {
    let basis = Arc::new(ShellBasis::new(system, bath, shell, kappa, cap)?);
    Ok(typicality_report(&basis, system, bath, seeds, false))
}

/// Typicality statistics over `seeds`; with `coherences` the full reduced matrix is built per seed.
pub fn typicality_report(
    basis: &Arc<ShellBasis>,
    system: &SystemSpec,
    bath: &BathSpec,
    seeds: &[u64],
    coherences: bool,
) -> TypicalityReport {
    let expected = basis.microcanonical_populations();
    let per_seed: Vec<(f64, Option<(f64, f64)>)> = seeds
        .par_iter()
        .map(|&seed| {
            let state = basis.sample(seed);
            let (p, extra) = if coherences {
                let rho = reduce_density_matrix(&state, system, bath);
                let f01 = if rho.dim() > 1 {
                    rho.coherence(0, 1).norm()
                } else {
                    0.0
                };
                (rho.populations(), Some((rho.max_coherence(), f01)))
            } else {
                (level_populations(&state), None)
            };
            let dev = p
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            (dev, extra)
        })
        .collect();

    let deviations: Vec<f64> = per_seed.iter().map(|r| r.0).collect();
    let (max_coherence, coherence_01) = if coherences {
        let extra: Vec<(f64, f64)> = per_seed.iter().filter_map(|r| r.1).collect();
        let f01 = (system.len() > 1).then(|| extra.iter().map(|e| e.1).collect());
        (Some(extra.iter().map(|e| e.0).collect()), f01)
    } else {
        (None, None)
    };
    TypicalityReport {
        dimension: basis.dim(),
        expected,
        seeds: seeds.to_vec(),
        median_deviation: median(&deviations),
        deviations,
        max_coherence,
        coherence_01,
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
