//! End-to-end acceptance gate. Each numbered check prints one pass/fail
//! line; the test fails if any check fails or exceeds its time budget.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qestkit::anneal::{anneal_frontier, AnnealConfig, AnnealProblem, FrontierPoint};
use qestkit::channels::{
    encode_with_derivatives, qubit_with_derivatives, ChannelParams, DifferentiatedState,
};
use qestkit::estimation::{
    bell_crossover_delta, classical_fi_continuous, classical_fi_discrete,
    qfi_closed_form_noon, qfi_closed_form_qubit, qfi_coherent_multiplier, qfi_matrix,
    tradeoff_report, QuadratureGrid, TradeoffReport,
};
use qestkit::fock::{
    make_holland_burnett, make_noon, make_split_photon, FockCutoff, QubitProbe, TwoModeState,
};
use qestkit::measurements::{
    bell_measurement, bell_tradeoff_coordinates, photon_counting_povm, random_equatorial_povm,
    random_qubit_povm, sagnac_povm, symmetric_equatorial_povm, DoubleHomodyne, SagnacPovmSpec,
};
use qestkit::tomo::{
    mle_parameter_simulation, monte_carlo_errorbars, ratio_coordinates, reconstruct_povm,
    simulate_experiment, ProbeQuorum, ReconstructOptions,
};

type CheckResult = Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> CheckResult {
    ensure(
        (a - b).abs() <= tol,
        format!("{what}: {a} vs {b} (tol {tol})"),
    )
}

fn equatorial_ds(phi: f64, delta: f64) -> DifferentiatedState {
    qubit_with_derivatives(&QubitProbe::equatorial(phi, delta).unwrap()).unwrap()
}

fn qubit_report(povm: &qestkit::measurements::Povm, phi: f64, delta: f64) -> TradeoffReport {
    let ds = equatorial_ds(phi, delta);
    let fi = classical_fi_discrete(&ds, povm).unwrap();
    let h = qfi_closed_form_qubit(FRAC_PI_2, delta);
    tradeoff_report(&fi.f, &h, 1).unwrap()
}

// 1. Numeric SLD-based QFI of the dephased equatorial qubit matches the
//    closed form diag(e^{-2 d^2}, 4 d^2 / (e^{2 d^2} - 1)); the second entry
//    tends to 2 as d -> 0.
fn qubit_qfi_closed_form() -> CheckResult {
    for delta in [0.01, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let h = qfi_matrix(&equatorial_ds(0.7, delta)).map_err(|e| e.to_string())?;
        let c = qfi_closed_form_qubit(FRAC_PI_2, delta);
        ensure(
            (h - c).abs().max() < 1e-9,
            format!("qfi mismatch at delta={delta}: {h} vs {c}"),
        )?;
    }
    close(qfi_closed_form_qubit(FRAC_PI_2, 0.0)[(1, 1)], 2.0, 1e-12, "zero-diffusion limit")
}

// 2. N00N(N) QFI equals N^2 H_{pi/2}(N d) in the full Fock computation; the
//    coherent-probe multiplier is |alpha|^2 H by construction.
fn scaling_laws() -> CheckResult {
    for n in 1..=3usize {
        let cutoff = FockCutoff::new(n).map_err(|e| e.to_string())?;
        let noon = make_noon(n, cutoff).map_err(|e| e.to_string())?;
        for delta in [0.1, 0.3] {
            let ds = encode_with_derivatives(
                &noon,
                &ChannelParams::lossless(0.7, delta).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let h = qfi_matrix(&ds).map_err(|e| e.to_string())?;
            let c = qfi_closed_form_noon(n, delta);
            ensure(
                (h - c).abs().max() < 1e-9,
                format!("noon({n}) qfi mismatch at delta={delta}: {h} vs {c}"),
            )?;
        }
    }
    let (alpha_sq, theta, delta) = (2.3, 1.1, 0.2);
    let m = qfi_coherent_multiplier(alpha_sq, theta, delta);
    let c = qfi_closed_form_qubit(theta, delta) * alpha_sq;
    ensure((m - c).abs().max() < 1e-12, "coherent multiplier mismatch")
}

// 3. No valid single-qubit POVM exceeds ratio-sum 1; the symmetric
//    four-element equatorial POVM and double homodyne saturate it.
fn tradeoff_bound_battery() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let phi = 0.9;
    for delta in [0.1, 0.25, 0.5] {
        for i in 0..70 {
            let povm = if i % 2 == 0 {
                random_qubit_povm(&mut rng, 2 + i % 4).map_err(|e| e.to_string())?
            } else {
                random_equatorial_povm(&mut rng, 4 + i % 3).map_err(|e| e.to_string())?
            };
            let report = qubit_report(&povm, phi, delta);
            ensure(
                report.sum <= 1.0 + 1e-9,
                format!("random povm {i} exceeds bound at delta={delta}: sum={}", report.sum),
            )?;
        }
        let sym = symmetric_equatorial_povm(phi).map_err(|e| e.to_string())?;
        let report = qubit_report(&sym, phi, delta);
        close(report.sum, 1.0, 1e-10, &format!("symmetric povm saturation at delta={delta}"))?;

        let cutoff = FockCutoff::new(1).map_err(|e| e.to_string())?;
        let s = make_split_photon(cutoff).map_err(|e| e.to_string())?;
        let ds = encode_with_derivatives(
            &s,
            &ChannelParams::lossless(phi, delta).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let fi = classical_fi_continuous(&ds, &DoubleHomodyne::new(cutoff), &QuadratureGrid::default_for(cutoff))
            .map_err(|e| e.to_string())?;
        let h = qfi_closed_form_qubit(FRAC_PI_2, delta);
        let report = tradeoff_report(&fi.f, &h, 1).map_err(|e| e.to_string())?;
        close(report.sum, 1.0, 2e-4, &format!("double homodyne saturation at delta={delta}"))?;
    }
    Ok(())
}

// 4. Tunable four-outcome POVM: ideal visibility traces the straight
//    trade-off segment (k, 1-k) with vanishing cross-information; realistic
//    visibilities pull strictly inside; k in {0, 1} degenerates to a
//    singular Fisher matrix.
fn tunable_povm_segment() -> CheckResult {
    let delta = 0.25;
    for k10 in 1..=9 {
        let k = k10 as f64 / 10.0;
        let povm = sagnac_povm(&SagnacPovmSpec::ideal(k).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let ds = equatorial_ds(FRAC_PI_2, delta);
        let fi = classical_fi_discrete(&ds, &povm).map_err(|e| e.to_string())?;
        let h = qfi_closed_form_qubit(FRAC_PI_2, delta);
        let report = tradeoff_report(&fi.f, &h, 1).map_err(|e| e.to_string())?;
        close(report.ratio_phi, k, 1e-9, &format!("phase ratio at k={k}"))?;
        close(report.ratio_delta, 1.0 - k, 1e-9, &format!("diffusion ratio at k={k}"))?;
        ensure(report.offdiag.abs() < 1e-10, format!("offdiag {} at k={k}", report.offdiag))?;

        let real = sagnac_povm(&SagnacPovmSpec::new(k, 0.965, 0.994).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let report = qubit_report(&real, FRAC_PI_2, delta);
        ensure(
            report.sum < 1.0,
            format!("finite visibility should land inside the bound at k={k}: {}", report.sum),
        )?;
    }
    for k in [0.0, 1.0] {
        let povm = sagnac_povm(&SagnacPovmSpec::ideal(k).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let report = qubit_report(&povm, FRAC_PI_2, delta);
        ensure(report.singular_fi, format!("expected singular FI flag at k={k}"))?;
    }
    Ok(())
}

// 5. Bell measurement on probe pairs: per-probe ratio sum 3/2 at zero
//    diffusion, crossing 1 near delta = 0.4905.
fn bell_collective_gain() -> CheckResult {
    let (x0, y0) = bell_tradeoff_coordinates(0.0);
    close(x0 + y0, 1.5, 1e-9, "zero-diffusion bell sum")?;
    // Numeric check against the closed form away from the delta = 0
    // degeneracy (both FI and QFI for diffusion vanish there).
    for delta in [0.05, 0.3] {
        let pair = equatorial_ds(FRAC_PI_4, delta).pair().map_err(|e| e.to_string())?;
        let fi = classical_fi_discrete(&pair, &bell_measurement()).map_err(|e| e.to_string())?;
        let per_probe = fi.f / 2.0;
        let h = qfi_closed_form_qubit(FRAC_PI_2, delta);
        let report = tradeoff_report(&per_probe, &h, 2).map_err(|e| e.to_string())?;
        let (x, y) = bell_tradeoff_coordinates(delta);
        close(report.var_phi_norm, x, 1e-9, &format!("bell x at delta={delta}"))?;
        close(report.var_delta_norm, y, 1e-9, &format!("bell y at delta={delta}"))?;
    }
    let d0 = bell_crossover_delta();
    close(d0, 0.490524, 2e-3, "crossover diffusion")?;
    let sum_at = |delta: f64| {
        let (x, y) = bell_tradeoff_coordinates(delta);
        x + y
    };
    ensure(
        sum_at(d0 - 0.01) > 1.0 && sum_at(d0 + 0.01) < 1.0,
        "sum does not cross 1 at the computed crossover",
    )
}

fn best_sum(points: &[FrontierPoint]) -> &FrontierPoint {
    points
        .iter()
        .max_by(|a, b| a.sum.partial_cmp(&b.sum).unwrap())
        .unwrap()
}

// 6. Annealed two-qubit collective measurement at delta = 0.25 beats the
//    separable bound decisively with a partially entangled basis.
fn collective_annealing() -> CheckResult {
    let delta = 0.25;
    let pair = equatorial_ds(FRAC_PI_2, delta).pair().map_err(|e| e.to_string())?;
    let h = qfi_closed_form_qubit(FRAC_PI_2, delta);
    let problem = AnnealProblem {
        state: &pair,
        h,
        probes: 2,
        bipartition: Some((2, 2)),
    };
    let config = AnnealConfig {
        restarts: 20,
        ..AnnealConfig::default()
    };
    let points = anneal_frontier(&problem, &config).map_err(|e| e.to_string())?;
    let best = best_sum(&points);
    ensure(best.sum >= 1.45, format!("best annealed sum {}", best.sum))?;
    let ent = best
        .entanglement_weighed
        .ok_or_else(|| "missing entanglement accounting".to_string())?;
    ensure(
        (0.35..=0.55).contains(&ent),
        format!("weighed entanglement entropy {ent} outside [0.35, 0.55]"),
    )
}

fn hb3_problem(delta: f64) -> Result<(DifferentiatedState, Matrix2<f64>), String> {
    let cutoff = FockCutoff::new(6).map_err(|e| e.to_string())?;
    let probe = make_holland_burnett(3, cutoff).map_err(|e| e.to_string())?;
    let full = encode_with_derivatives(
        &probe,
        &ChannelParams::lossless(FRAC_PI_2, delta).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let support: Vec<usize> = (0..full.dim())
        .filter(|&i| full.rho()[(i, i)].re > 1e-12)
        .collect();
    let ds = full.restrict(&support).map_err(|e| e.to_string())?;
    let h = qfi_matrix(&ds).map_err(|e| e.to_string())?;
    Ok((ds, h))
}

// 7. Annealed measurement frontier for the three-pair twin-Fock probe:
//    flat at the bound for vanishing diffusion, above it at delta = 0.1, and
//    recombined photon counting stays below the frontier at delta = 0.25.
fn twin_fock_frontier() -> CheckResult {
    // The trade-off ratios are 0/0 at delta = 0 exactly (both diffusion
    // informations vanish there), and the SLD solve loses identifiability
    // below delta ~ 0.005, so the zero-diffusion claim is checked by linear
    // extrapolation of the annealed maximum, which is empirically linear in
    // delta near zero.
    // Extra restarts keep the run-to-run scatter of the annealed maximum
    // well below the extrapolation tolerance.
    let config = AnnealConfig {
        restarts: 24,
        ..AnnealConfig::default()
    };
    let mut max_at = Vec::new();
    for delta in [0.04, 0.02, 0.01] {
        let (ds, h) = hb3_problem(delta)?;
        let problem = AnnealProblem { state: &ds, h, probes: 1, bipartition: None };
        let points = anneal_frontier(&problem, &config).map_err(|e| e.to_string())?;
        max_at.push(best_sum(&points).sum);
    }
    // Quadratic extrapolation through the three halved step sizes.
    let extrapolated = (8.0 * max_at[2] - 6.0 * max_at[1] + max_at[0]) / 3.0;
    ensure(
        extrapolated <= 1.0 + 2e-3,
        format!(
            "zero-diffusion frontier maximum extrapolates above the bound: {extrapolated} (from {max_at:?})"
        ),
    )?;
    // The frontier does not merely stay below the bound - it collapses onto
    // it (the extrapolation error of the stochastic maxima is ~1e-2).
    ensure(
        extrapolated >= 1.0 - 1e-2,
        format!(
            "zero-diffusion frontier maximum extrapolates to {extrapolated}, short of the bound (from {max_at:?})"
        ),
    )?;

    let config = AnnealConfig::default();
    let (ds, h) = hb3_problem(0.1)?;
    let problem = AnnealProblem { state: &ds, h, probes: 1, bipartition: None };
    let points = anneal_frontier(&problem, &config).map_err(|e| e.to_string())?;
    ensure(
        best_sum(&points).sum > 1.02,
        format!("no frontier point beats 1.02 at delta=0.1: max {}", best_sum(&points).sum),
    )?;

    let (ds, h) = hb3_problem(0.25)?;
    let problem = AnnealProblem { state: &ds, h, probes: 1, bipartition: None };
    let points = anneal_frontier(&problem, &config).map_err(|e| e.to_string())?;
    let frontier_max = best_sum(&points).sum;
    let cutoff = FockCutoff::new(6).map_err(|e| e.to_string())?;
    let probe = make_holland_burnett(3, cutoff).map_err(|e| e.to_string())?;
    let counting = photon_counting_povm(cutoff, true);
    // Photon counting is a fixed measurement, so its information depends on
    // the working point; evaluate it at the best phase over a scan.
    let mut counting_max = 0.0f64;
    for i in 0..32 {
        let phi = 0.1 + i as f64 * 0.045;
        let full = encode_with_derivatives(
            &probe,
            &ChannelParams::lossless(phi, 0.25).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let fi = classical_fi_discrete(&full, &counting).map_err(|e| e.to_string())?;
        let report = tradeoff_report(&fi.f, &h, 1).map_err(|e| e.to_string())?;
        counting_max = counting_max.max(report.sum);
    }
    ensure(
        counting_max > 1.0,
        format!("recombined counting sum {counting_max} should beat the separable bound"),
    )?;
    ensure(
        counting_max < frontier_max,
        format!("counting sum {counting_max} should stay below the annealed max {frontier_max}"),
    )
}

fn homodyne_sum(state: &TwoModeState, phi: f64, delta: f64, eta: f64) -> Result<f64, String> {
    let cutoff = state.cutoff();
    let lossy = encode_with_derivatives(
        state,
        &ChannelParams::with_symmetric_loss(phi, delta, eta).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let ideal = encode_with_derivatives(
        state,
        &ChannelParams::lossless(phi, delta).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let h = qfi_matrix(&ideal).map_err(|e| e.to_string())?;
    let fi = classical_fi_continuous(&lossy, &DoubleHomodyne::new(cutoff), &QuadratureGrid::default_for(cutoff))
        .map_err(|e| e.to_string())?;
    let report = tradeoff_report(&fi.f, &h, 1).map_err(|e| e.to_string())?;
    Ok(report.sum)
}

// 8. Loss robustness under double homodyne: the twin-Fock probe keeps at
//    least the N00N ratio sum at every diffusion grid point once loss is
//    present; the lossless split photon saturates the bound.
fn loss_study() -> CheckResult {
    let cutoff = FockCutoff::new(6).map_err(|e| e.to_string())?;
    let hb = make_holland_burnett(3, cutoff).map_err(|e| e.to_string())?;
    let noon = make_noon(6, cutoff).map_err(|e| e.to_string())?;
    let phi = 0.7;
    for eta in [0.95, 0.5] {
        for delta in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let hb_sum = homodyne_sum(&hb, phi, delta, eta)?;
            let noon_sum = homodyne_sum(&noon, phi, delta, eta)?;
            ensure(
                hb_sum >= noon_sum,
                format!("twin-Fock sum {hb_sum} < N00N sum {noon_sum} at eta={eta}, delta={delta}"),
            )?;
        }
    }
    let c1 = FockCutoff::new(1).map_err(|e| e.to_string())?;
    let split = make_split_photon(c1).map_err(|e| e.to_string())?;
    close(homodyne_sum(&split, phi, 0.25, 1.0)?, 1.0, 2e-4, "lossless split-photon sum")
}

// 9. Double homodyne extracts the full phase information from
//    path-symmetric probes at zero diffusion.
fn path_symmetric_phase_optimality() -> CheckResult {
    for n in 1..=3usize {
        for (label, state) in [
            ("hb", make_holland_burnett(n, FockCutoff::new(2 * n).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?),
            ("noon", make_noon(n, FockCutoff::new(n).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?),
        ] {
            let cutoff = state.cutoff();
            let ds = encode_with_derivatives(
                &state,
                &ChannelParams::lossless(0.7, 0.0).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let h = qfi_matrix(&ds).map_err(|e| e.to_string())?;
            let fi = classical_fi_continuous(
                &ds,
                &DoubleHomodyne::new(cutoff),
                &QuadratureGrid::default_for(cutoff),
            )
            .map_err(|e| e.to_string())?;
            close(
                fi.f[(0, 0)] / h[(0, 0)],
                1.0,
                2e-4,
                &format!("phase information ratio for {label}({n})"),
            )?;
        }
    }
    Ok(())
}

// 10. Maximum-likelihood estimates on the balanced tunable POVM saturate
//     the Cramer-Rao bound, with uncorrelated errors at phi = pi/2.
fn cramer_rao_saturation() -> CheckResult {
    let povm = sagnac_povm(&SagnacPovmSpec::ideal(0.5).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let report = mle_parameter_simulation(&povm, FRAC_PI_2, 0.25, 10_000, 500, &mut rng)
        .map_err(|e| e.to_string())?;
    ensure(
        (0.9..=1.15).contains(&report.cr_ratio_phi),
        format!("phase CR ratio {}", report.cr_ratio_phi),
    )?;
    ensure(
        (0.9..=1.15).contains(&report.cr_ratio_delta),
        format!("diffusion CR ratio {}", report.cr_ratio_delta),
    )?;
    // Sampling error of an off-diagonal covariance estimate.
    let sigma = ((report.cov[0][0] * report.cov[1][1] + report.cov[0][1] * report.cov[0][1])
        / (report.trials as f64 - 1.0))
        .sqrt();
    ensure(
        report.cov[0][1].abs() <= 3.0 * sigma,
        format!("covariance off-diagonal {} exceeds 3 sigma = {}", report.cov[0][1], 3.0 * sigma),
    )
}

// 11. Detector tomography pipeline: exact recovery without noise, and
//     Monte-Carlo error bars that cover the truth under 2% intensity drift.
fn tomography_pipeline() -> CheckResult {
    let quorum = ProbeQuorum::six_state();
    let truth = sagnac_povm(&SagnacPovmSpec::new(0.5, 0.965, 0.994).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let opts = ReconstructOptions {
        truth: Some(truth.clone()),
        ..ReconstructOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let records = simulate_experiment(&truth, &quorum, 50, 0.0, &mut rng)
        .map_err(|e| e.to_string())?;
    let res = reconstruct_povm(&records, &quorum, &opts).map_err(|e| e.to_string())?;
    let fids = res.fidelity_to_truth.ok_or_else(|| "missing fidelities".to_string())?;
    ensure(
        fids.iter().all(|&f| f > 0.999),
        format!("noiseless reconstruction fidelities {fids:?}"),
    )?;

    let (xt, yt) = ratio_coordinates(&truth, opts.phi, opts.delta).map_err(|e| e.to_string())?;
    let mut covered = 0;
    let pipelines = 50;
    for seed in 0..pipelines {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let records = simulate_experiment(&truth, &quorum, 200, 0.02, &mut rng)
            .map_err(|e| e.to_string())?;
        let res = monte_carlo_errorbars(&records, &quorum, 120, &opts, &mut rng)
            .map_err(|e| e.to_string())?;
        if (res.x - xt).abs() <= res.xerr && (res.y - yt).abs() <= res.yerr {
            covered += 1;
        }
    }
    ensure(
        covered * 10 >= pipelines * 9,
        format!("2-sigma coverage {covered}/{pipelines} below 90%"),
    )
}

#[test]
fn acceptance() {
    let checks: Vec<(&str, fn() -> CheckResult, Duration)> = vec![
        ("closed-form qubit QFI", qubit_qfi_closed_form, Duration::from_secs(1)),
        ("N00N and coherent scaling laws", scaling_laws, Duration::from_secs(5)),
        ("trade-off bound battery and saturation", tradeoff_bound_battery, Duration::from_secs(60)),
        ("tunable four-outcome POVM segment", tunable_povm_segment, Duration::from_secs(10)),
        ("Bell measurement collective gain", bell_collective_gain, Duration::from_secs(10)),
        ("annealed two-qubit collective measurement", collective_annealing, Duration::from_secs(600)),
        ("twin-Fock measurement frontier", twin_fock_frontier, Duration::from_secs(900)),
        ("loss robustness under double homodyne", loss_study, Duration::from_secs(600)),
        ("path-symmetric phase optimality", path_symmetric_phase_optimality, Duration::from_secs(120)),
        ("Cramer-Rao saturation of the MLE", cramer_rao_saturation, Duration::from_secs(300)),
        ("detector tomography pipeline", tomography_pipeline, Duration::from_secs(600)),
    ];
    let mut failures = Vec::new();
    for (i, (name, check, budget)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(Ok(())) => Ok(()),
            Ok(Err(msg)) => Err(msg),
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".to_string())),
        };
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed <= *budget {
                Ok(())
            } else {
                Err(format!("exceeded time budget {budget:?}"))
            }
        });
        match outcome {
            Ok(()) => println!("{:2}. {name}: pass ({:.1?})", i + 1, elapsed),
            Err(msg) => {
                println!("{:2}. {name}: FAIL ({:.1?}) - {msg}", i + 1, elapsed);
                failures.push(format!("{}: {msg}", name));
            }
        }
    }
    assert!(failures.is_empty(), "failed checks:\n{}", failures.join("\n"));
}
