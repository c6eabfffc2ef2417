//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one pass/fail line per criterion; exits non-zero if any fail.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{dense_reduced, displacement_matrix, safe_cutoff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermalize::counting::{count_bath_states_exact, enumerate_bath_states, QuantizedShell};
use thermalize::sampler::{split_seed, typicality_report};
use thermalize::thermo::beta_from_entropy;
use thermalize::{
    decoherence_product, displaced_overlap, fit_beta, fit_kappa_series, kappa,
    log_omega_bath_analytic, pn_counting_with, reduce_density_matrix, two_level_approx,
    two_level_exact, Abscissa, BathSpec, BigUint, Complex64, CountMode, FitWindow, LevelCut,
    ShellBasis, ShellWindow, SystemSpec, TwoLevelState,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit {
        Ok(())
    } else {
        Err(format!(
            "runtime {:.2}s exceeds {limit}s",
            elapsed.as_secs_f64()
        ))
    }
}

/// Harmonic system with `M` levels, 50 degenerate modes at 1e-3 and `E = 0.5`.
fn harmonic_setup(levels: usize) -> (SystemSpec, BathSpec, ShellWindow) {
    (
        SystemSpec::harmonic(1e-3, levels).unwrap(),
        BathSpec::degenerate(50, 1e-3, 0.0).unwrap(),
        ShellWindow::new(0.5, 1e-5).unwrap(),
    )
}

const REFERENCE_KAPPAS: [f64; 3] = [5e-6, 5e-5, 5e-4];
const REFERENCE_SPREAD: f64 = 98.94 - 98.69;
const CALIBRATED_WINDOW: (usize, usize) = (0, 8);

fn reference_temperatures() -> Outcome {
    let start = Instant::now();
    let (system, bath, shell) = harmonic_setup(41);
    let window = FitWindow::new(CALIBRATED_WINDOW.0, CALIBRATED_WINDOW.1).unwrap();
    let fits = fit_kappa_series(
        &system,
        &bath,
        &shell,
        &REFERENCE_KAPPAS,
        CountMode::Analytic,
        LevelCut::Deformed,
        Abscissa::Deformed,
        window,
    )
    .map_err(|e| e.to_string())?;
    within(start.elapsed(), 5.0)?;
    let betas: Vec<f64> = fits.iter().map(|f| f.beta).collect();
    let decreasing = betas.windows(2).all(|w| w[1] < w[0]);
    let near = betas.iter().all(|b| (b - 98.0).abs() <= 0.02 * 98.0);
    let spread = betas[0] - betas[2];
    let spread_ok = (REFERENCE_SPREAD / 3.0..=3.0 * REFERENCE_SPREAD).contains(&spread);
    check(
        decreasing && near && spread_ok,
        format!("window {window}, betas {betas:.4?}, spread {spread:.4}"),
    )
}

fn log_population_linearity() -> Outcome {
    let start = Instant::now();
    let (system, bath, shell) = harmonic_setup(41);
    let table = pn_counting_with(
        &system,
        &bath,
        &shell,
        5e-6,
        CountMode::Analytic,
        LevelCut::Deformed,
    )
    .map_err(|e| e.to_string())?;
    let fit = fit_beta(
        &table.gibbs_points(Abscissa::Index, CountMode::Analytic),
        FitWindow::new(0, 20).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    within(start.elapsed(), 1.0)?;
    check(
        fit.r_squared >= 0.999,
        format!("r^2 = {:.8} over n in [0, 20]", fit.r_squared),
    )
}

/// `C(hi + N, N)` bounds the number of states with total at most `hi`.
fn enumeration_bound(modes: usize, hi: u64) -> f64 {
    (1..=modes)
        .map(|k| (hi + k as u64) as f64 / k as f64)
        .product()
}

fn counting_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 60 {
        let modes = rng.random_range(1..=6);
        let weights: Vec<u64> = (0..modes).map(|_| rng.random_range(1..=5)).collect();
        let hi: i64 = rng.random_range(0..=60);
        let lo = rng.random_range(0..=hi);
        if enumeration_bound(modes, hi as u64) > 4e5 {
            continue;
        }
        let shell = QuantizedShell::new(weights.clone(), lo, hi).unwrap();
        let exact = count_bath_states_exact(&shell);
        let listed = enumerate_bath_states(&shell, 1_000_000).map_err(|e| e.to_string())?;
        if exact != BigUint::from(listed.len()) {
            return Err(format!(
                "weights {weights:?} [{lo}, {hi}]: count {exact} vs {} listed",
                listed.len()
            ));
        }
        checked += 1;
    }
    within(start.elapsed(), 10.0)?;
    check(
        true,
        format!("{checked} random shells, counts equal enumeration lengths"),
    )
}

fn analytic_count_validation() -> Outcome {
    let start = Instant::now();
    let omega = 1e-3;
    let mut worst: f64 = 0.0;
    let mut best_squared: f64 = f64::INFINITY;
    for modes in [2usize, 3] {
        let bath = BathSpec::degenerate(modes, omega, 0.0).unwrap();
        for ratio in [100.0, 1000.0] {
            let e = ratio * omega;
            let shell = QuantizedShell::from_energy_window(vec![1; modes], omega, e, e + omega)
                .map_err(|x| x.to_string())?;
            let exact = count_bath_states_exact(&shell);
            let ln_exact = thermalize::bigmath::ln_biguint(&exact);
            let ln_analytic =
                log_omega_bath_analytic(e, omega, &bath).map_err(|x| x.to_string())?;
            worst = worst.max(((ln_analytic - ln_exact).exp() - 1.0).abs());
            let ln_squared = ln_analytic - modes as f64 * omega.ln();
            best_squared = best_squared.min(((ln_squared - ln_exact).exp() - 1.0).abs());
        }
    }
    within(start.elapsed(), 5.0)?;
    check(
        worst <= 0.05 && best_squared > 100.0 * 0.05,
        format!("max |analytic/exact - 1| = {worst:.4}; squared-frequency variant min error {best_squared:.3e}"),
    )
}

fn overlap_oracle() -> Outcome {
    let start = Instant::now();
    let deltas: Vec<f64> = (0..=16).map(|i| -2.0 + 0.25 * i as f64).collect();
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for &delta in &deltas {
        let d = displacement_matrix(delta, safe_cutoff(20, delta));
        for m in 0..=20u32 {
            for n in 0..=20u32 {
                worst =
                    worst.max((displaced_overlap(m, n, delta) - d[(m as usize, n as usize)]).abs());
                points += 1;
            }
        }
    }
    let mut completeness: f64 = 0.0;
    let mut gram: f64 = 0.0;
    for &delta in &deltas {
        for n in 0..=20u32 {
            for k in n..=20u32 {
                let g: f64 = (0..400u32)
                    .map(|m| displaced_overlap(m, n, delta) * displaced_overlap(m, k, delta))
                    .sum();
                if n == k {
                    completeness = completeness.max((g - 1.0).abs());
                } else {
                    gram = gram.max(g.abs());
                }
            }
        }
    }
    within(start.elapsed(), 30.0)?;
    check(
        worst <= 1e-10 && completeness <= 1e-8 && gram <= 1e-8,
        format!("{points} points, max error {worst:.2e}; completeness {completeness:.2e}, gram {gram:.2e}"),
    )
}

fn partial_trace_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut instances = 0;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    let mut largest: f64 = 0.0;
    while instances < 24 {
        attempts += 1;
        if attempts > 10_000 {
            return Err("could not draw enough instances".into());
        }
        let system = SystemSpec::new(
            vec![0.0, rng.random_range(0.0..2.0)],
            vec![rng.random_range(-1.0..1.0), rng.random_range(-1.5..1.5)],
        )
        .unwrap();
        let bath = BathSpec::new(
            vec![
                rng.random_range(1..=2) as f64,
                rng.random_range(1..=3) as f64,
            ],
            vec![rng.random_range(0.1..1.2), rng.random_range(0.1..1.2)],
            1.0,
        )
        .unwrap();
        let shell =
            ShellWindow::new(rng.random_range(2.0..10.0), rng.random_range(1.0..4.0)).unwrap();
        let Ok(basis) = ShellBasis::with_cut(
            &system,
            &bath,
            &shell,
            kappa(&bath),
            200,
            LevelCut::BathOnly,
        ) else {
            continue;
        };
        if basis.blocks().count() < 2 {
            continue;
        }
        let basis = Arc::new(basis);
        let state = basis.sample(rng.random());
        let rho = reduce_density_matrix(&state, &system, &bath);
        let dense = dense_reduced(&state, &system, &bath);
        largest = largest.max(rho.max_coherence());
        for n in 0..2 {
            for m in 0..2 {
                worst = worst.max((rho.matrix()[(n, m)] - dense[(n, m)]).norm());
            }
        }
        let physical = rho.hermiticity_error() <= 1e-12
            && (rho.trace() - 1.0).abs() <= 1e-12
            && rho.min_eigenvalue() >= -1e-12;
        if !physical {
            return Err(format!("unphysical output on instance {instances}"));
        }
        instances += 1;
    }
    check(
        worst <= 1e-10,
        format!(
            "{instances} instances, max element error {worst:.2e}, largest |F| {largest:.3}, all Hermitian, unit trace, PSD"
        ),
    )
}

fn typicality_scaling() -> Outcome {
    let start = Instant::now();
    let system = SystemSpec::harmonic(1.0, 2).unwrap();
    let bath = BathSpec::degenerate(3, 1.0, 0.0).unwrap();
    let seeds: Vec<u64> = (0..200).map(|i| split_seed(99, i)).collect();
    let mut medians = Vec::new();
    let mut dims = Vec::new();
    for energy in [31.0, 99.0] {
        let shell = ShellWindow::new(energy, 1.0).unwrap();
        let basis = Arc::new(
            ShellBasis::new(&system, &bath, &shell, 0.0, 100_000).map_err(|e| e.to_string())?,
        );
        let report = typicality_report(&basis, &system, &bath, &seeds, false);
        dims.push(report.dimension);
        medians.push(report.median_deviation);
    }
    within(start.elapsed(), 60.0)?;
    let shrink = medians[0] / medians[1];
    check(
        (2.0..=5.0).contains(&shrink),
        format!("dims {dims:?}, medians {medians:?}, shrink {shrink:.3}"),
    )
}

fn decoherence_decay() -> Outcome {
    let system = SystemSpec::new(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
    let slope = -0.3f64.powi(2) / 2.0;
    let mut worst: f64 = 0.0;
    for modes in 1..=16 {
        let bath = BathSpec::degenerate(modes, 1.0, 0.6).unwrap();
        let vac = vec![0; modes];
        let d = decoherence_product(&system, &bath, 0, 1, &vac, &vac).map_err(|e| e.to_string())?;
        worst = worst.max((d.product.abs().ln() - slope * modes as f64).abs());
    }
    let mut means = Vec::new();
    for modes in [1usize, 2, 4, 8] {
        let bath = BathSpec::degenerate(modes, 1.0, 0.6).unwrap();
        let k = kappa(&bath);
        // Level 1 sits at the deformed energy 0 so both levels see the same bath window.
        let system = SystemSpec::new(vec![0.0, k], vec![0.0, 1.0]).unwrap();
        let shell = ShellWindow::new(0.5, 2.0).unwrap();
        let basis = Arc::new(
            ShellBasis::new(&system, &bath, &shell, k, 100_000).map_err(|e| e.to_string())?,
        );
        let seeds: Vec<u64> = (0..400).map(|i| split_seed(5, i)).collect();
        let report = typicality_report(&basis, &system, &bath, &seeds, true);
        means.push(report.mean_coherence_01().unwrap());
    }
    let falling = means.windows(2).all(|w| w[1] < w[0]);
    check(
        worst <= 1e-13 && falling,
        format!("max |log|D| + N Delta^2/2| = {worst:.1e}; mean |F_01| {means:.4?}"),
    )
}

fn two_level_expansion() -> Outcome {
    let start = Instant::now();
    let mut worst_ratio = (f64::INFINITY, f64::NEG_INFINITY);
    let mut entropy_ok = true;
    for beta in [0.5, 1.0, 2.0] {
        for gap in [0.5, 1.0] {
            let mut errors: Vec<[f64; 4]> = Vec::new();
            for h in 0..4 {
                let f = 0.05 / 2f64.powi(h);
                let state = TwoLevelState::new(beta, gap, Complex64::new(f, 0.0))
                    .map_err(|e| e.to_string())?;
                let exact = two_level_exact(&state);
                let approx = two_level_approx(&state).map_err(|e| e.to_string())?;
                entropy_ok &= exact.s_vn <= approx.s_gibbs;
                errors.push([
                    (exact.p_plus - approx.p_plus).abs(),
                    (exact.p_minus - approx.p_minus).abs(),
                    (exact.s_vn - approx.s_vn).abs(),
                    (exact.beta_eff - approx.beta_eff).abs(),
                ]);
            }
            for w in errors.windows(2) {
                for (a, b) in w[0].iter().zip(&w[1]) {
                    let r = a / b;
                    worst_ratio = (worst_ratio.0.min(r), worst_ratio.1.max(r));
                }
            }
        }
    }
    within(start.elapsed(), 5.0)?;
    check(
        entropy_ok && worst_ratio.0 >= 8.0 && worst_ratio.1 <= 32.0,
        format!(
            "error reduction per halving in [{:.2}, {:.2}], S_vn <= S_gibbs: {entropy_ok}",
            worst_ratio.0, worst_ratio.1
        ),
    )
}

fn thermodynamic_consistency() -> Outcome {
    let bath = BathSpec::degenerate(50, 1e-3, 0.0).unwrap();
    let beta = beta_from_entropy(|e| log_omega_bath_analytic(e, 1e-5, &bath), 0.5, 5e-5)
        .map_err(|e| e.to_string())?;
    check(
        (beta - 98.0).abs() <= 0.005 * 98.0,
        format!("dS/dE = {beta:.6} against (N - 1)/E = 98"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("fitted temperature falls with coupling", reference_temperatures),
        ("log-population linearity", log_population_linearity),
        ("exact count equals enumeration", counting_equivalence),
        (
            "smooth count against exact count",
            analytic_count_validation,
        ),
        (
            "displaced overlap against matrix exponential",
            overlap_oracle,
        ),
        ("partial trace against dense oracle", partial_trace_oracle),
        ("typicality concentration", typicality_scaling),
        ("decoherence decay", decoherence_decay),
        ("two-level expansion order", two_level_expansion),
        ("entropy derivative", thermodynamic_consistency),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!(
                "[PASS] criterion {:>2} {name}: {detail} ({secs:.2}s)",
                i + 1
            ),
            Err(detail) => {
                failures += 1;
                println!(
                    "[FAIL] criterion {:>2} {name}: {detail} ({secs:.2}s)",
                    i + 1
                );
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
