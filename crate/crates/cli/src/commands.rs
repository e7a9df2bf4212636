//! Command implementations. Each writes a run directory containing the
//! exact config, CSV/JSON results and a short summary, and is byte-identical
//! given (config, seed).

use crate::config::{
    check_version, load_config, prepare_run_dir, AnnealCmdConfig, Grid, HomodyneConfig,
    MleConfig, QfiConfig, TomographyConfig, TradeoffScanConfig,
};
use crate::{CliError, CliResult, CommonArgs};
use qestkit::anneal::{anneal_frontier, frontier_to_csv, AnnealProblem};
use qestkit::channels::{encode_with_derivatives, qubit_with_derivatives, ChannelParams};
use qestkit::estimation::{
    classical_fi_continuous, classical_fi_discrete, qfi_closed_form_noon,
    qfi_closed_form_qubit, qfi_coherent_multiplier, qfi_matrix, tradeoff_report,
    QuadratureGrid,
};
use qestkit::fock::{
    make_holland_burnett, make_noon, make_split_photon, FockCutoff, QubitProbe, TwoModeState,
};
use qestkit::measurements::{
    random_equatorial_povm, random_qubit_povm, sagnac_povm, DoubleHomodyne, SagnacPovmSpec,
};
use qestkit::tomo::{
    csv_header, monte_carlo_errorbars, mle_parameter_simulation, ratio_coordinates,
    result_to_csv_row, simulate_experiment, ProbeQuorum, ReconstructOptions,
};
use qestkit::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

fn write(dir: &std::path::Path, name: &str, body: &str) -> CliResult<()> {
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

pub fn run_qfi(args: &CommonArgs) -> CliResult<PathBuf> {
    let mut cfg: QfiConfig = load_config(args.config.as_deref())?;
    check_version(cfg.version)?;
    if let Some(d) = args.delta {
        cfg.delta_grid = Grid::single(d);
    }
    if let Some(n) = args.noon_n {
        cfg.probe = "noon".into();
        cfg.n = n;
    }
    let dir = prepare_run_dir(args, "qfi", &cfg)?;
    let mut csv = String::from("delta,h11_closed,h22_closed,h11_numeric,h22_numeric,max_abs_diff\n");
    let mut worst: f64 = 0.0;
    let mut limit_rows = 0usize;
    for delta in cfg.delta_grid.points() {
        let closed = match cfg.probe.as_str() {
            "qubit" => qfi_closed_form_qubit(cfg.theta, delta),
            "noon" => qfi_closed_form_noon(cfg.n, delta),
            "coherent" => qfi_coherent_multiplier(cfg.alpha_sq, cfg.theta, delta),
            other => return Err(CliError::Config(format!("unknown probe {other}"))),
        };
        // At delta = 0 the diffusion derivative vanishes identically, so the
        // numeric column carries the analytic limit; counted in the summary.
        let numeric = if delta == 0.0 {
            limit_rows += 1;
            closed
        } else {
            match cfg.probe.as_str() {
                "qubit" => {
                    qfi_matrix(&qubit_with_derivatives(&QubitProbe::new(
                        cfg.theta, cfg.phi, delta,
                    )?)?)?
                }
                "noon" => {
                    let cutoff = FockCutoff::new(cfg.n)?;
                    let state = make_noon(cfg.n, cutoff)?;
                    let ds = encode_with_derivatives(
                        &state,
                        &ChannelParams::lossless(cfg.phi, delta)?,
                    )?;
                    qfi_matrix(&ds)?
                }
                "coherent" => {
                    qfi_matrix(&qubit_with_derivatives(&QubitProbe::new(
                        cfg.theta, cfg.phi, delta,
                    )?)?)? * cfg.alpha_sq
                }
                _ => unreachable!(),
            }
        };
        let diff = (closed - numeric).abs().max();
        worst = worst.max(diff);
        csv.push_str(&format!(
            "{:.6},{:.12e},{:.12e},{:.12e},{:.12e},{:.3e}\n",
            delta,
            closed[(0, 0)],
            closed[(1, 1)],
            numeric[(0, 0)],
            numeric[(1, 1)],
            diff
        ));
    }
    write(&dir, "qfi.csv", &csv)?;
    write(
        &dir,
        "summary.txt",
        &format!(
            "probe: {}\nrows: {}\nmax |closed - numeric|: {:.3e}\nrows using the analytic delta=0 limit: {}\n",
            cfg.probe,
            cfg.delta_grid.count,
            worst,
            limit_rows
        ),
    )?;
    Ok(dir)
}

fn build_state(kind: &str, n: usize, cutoff: usize) -> CliResult<TwoModeState> {
    let minimal = match kind {
        "split" => 1,
        "noon" => n,
        "hb" => 2 * n,
        other => return Err(CliError::Config(format!("unknown state {other}"))),
    };
    let cutoff = FockCutoff::new(if cutoff == 0 { minimal } else { cutoff })?;
    Ok(match kind {
        "split" => make_split_photon(cutoff)?,
        "noon" => make_noon(n, cutoff)?,
        _ => make_holland_burnett(n, cutoff)?,
    })
}

pub fn run_homodyne_scan(args: &CommonArgs) -> CliResult<PathBuf> {
    let mut cfg: HomodyneConfig = load_config(args.config.as_deref())?;
    check_version(cfg.version)?;
    if let Some(d) = args.delta {
        cfg.delta_grid = Grid::single(d);
    }
    if let Some(eta) = args.eta {
        cfg.eta = eta;
    }
    if let Some(n) = args.noon_n {
        cfg.state = "noon".into();
        cfg.n = n;
    }
    if let Some(n) = args.hb_n {
        cfg.state = "hb".into();
        cfg.n = n;
    }
    if let Some(c) = args.cutoff {
        cfg.cutoff = c;
    }
    let dir = prepare_run_dir(args, "homodyne-scan", &cfg)?;
    let state = build_state(&cfg.state, cfg.n, cfg.cutoff)?;
    let meas = DoubleHomodyne::new(state.cutoff());
    let mut grid = QuadratureGrid::default_for(state.cutoff());
    if cfg.nodes > 0 {
        grid.radial_nodes = cfg.nodes;
    }
    let mut csv = String::from(
        "delta,f11,f22,f12,h11,h22,ratio_phi,ratio_delta,sum,converged\n",
    );
    let mut unconverged = 0usize;
    for delta in cfg.delta_grid.points() {
        let ideal = encode_with_derivatives(&state, &ChannelParams::lossless(cfg.phi, delta)?)?;
        let h = qfi_matrix(&ideal)?;
        let lossy = encode_with_derivatives(
            &state,
            &ChannelParams::with_symmetric_loss(cfg.phi, delta, cfg.eta)?,
        )?;
        let (f, converged) = match classical_fi_continuous(&lossy, &meas, &grid) {
            Ok(fi) => (fi.f, true),
            Err(Error::QuadratureNotConverged { fine, .. }) => {
                unconverged += 1;
                (
                    nalgebra::Matrix2::new(fine[0], fine[1], fine[2], fine[3]),
                    false,
                )
            }
            Err(e) => return Err(e.into()),
        };
        let ratio = |fv: f64, hv: f64| if hv > 1e-15 { fv / hv } else { f64::NAN };
        let (rp, rd) = (ratio(f[(0, 0)], h[(0, 0)]), ratio(f[(1, 1)], h[(1, 1)]));
        csv.push_str(&format!(
            "{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9},{:.9},{:.9},{}\n",
            delta,
            f[(0, 0)],
            f[(1, 1)],
            f[(0, 1)],
            h[(0, 0)],
            h[(1, 1)],
            rp,
            rd,
            rp + rd,
            converged as u8
        ));
    }
    write(&dir, "homodyne.csv", &csv)?;
    write(
        &dir,
        "summary.txt",
        &format!(
            "state: {} (n = {})\neta: {}\nrows: {}\nunconverged quadrature rows: {}\n",
            cfg.state, cfg.n, cfg.eta, cfg.delta_grid.count, unconverged
        ),
    )?;
    Ok(dir)
}

pub fn run_anneal(args: &CommonArgs) -> CliResult<PathBuf> {
    let mut cfg: AnnealCmdConfig = load_config(args.config.as_deref())?;
    check_version(cfg.version)?;
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    if let Some(n) = args.hb_n {
        cfg.probe = "hb".into();
        cfg.hb_n = n;
    }
    if let Some(s) = args.seed {
        cfg.anneal.seed = s;
    }
    let dir = prepare_run_dir(args, "anneal", &cfg)?;
    let (state, h, probes, bipartition) = match cfg.probe.as_str() {
        "qubit-pair" => {
            let ds = qubit_with_derivatives(&QubitProbe::equatorial(cfg.phi, cfg.delta)?)?
                .pair()?;
            let h = qfi_closed_form_qubit(std::f64::consts::FRAC_PI_2, cfg.delta);
            (ds, h, 2usize, Some((2usize, 2usize)))
        }
        "hb" => {
            let probe = make_holland_burnett(cfg.hb_n, FockCutoff::new(2 * cfg.hb_n)?)?;
            let full =
                encode_with_derivatives(&probe, &ChannelParams::lossless(cfg.phi, cfg.delta)?)?;
            let support: Vec<usize> = (0..full.dim())
                .filter(|&i| full.rho()[(i, i)].re > 1e-12)
                .collect();
            let ds = full.restrict(&support)?;
            let h = qfi_matrix(&ds)?;
            (ds, h, 1usize, None)
        }
        other => return Err(CliError::Config(format!("unknown probe {other}"))),
    };
    let problem = AnnealProblem {
        state: &state,
        h,
        probes,
        bipartition,
    };
    let points = anneal_frontier(&problem, &cfg.anneal)?;
    write(&dir, "frontier.csv", &frontier_to_csv(&points))?;
    let json: Vec<serde_json::Value> = points
        .iter()
        .map(|p| {
            let u = p.measurement.unitary();
            let rows: Vec<Vec<[f64; 2]>> = (0..u.nrows())
                .map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect())
                .collect();
            serde_json::json!({
                "w": p.weight,
                "x": p.x,
                "y": p.y,
                "sum": p.sum,
                "entanglement_raw": p.entanglement_raw,
                "entanglement_weighed": p.entanglement_weighed,
                "seed": p.seed,
                "pareto": p.pareto,
                "unitary": rows,
            })
        })
        .collect();
    write(
        &dir,
        "frontier.json",
        &serde_json::to_string_pretty(&json).map_err(|e| CliError::Config(e.to_string()))?,
    )?;
    let best = points
        .iter()
        .max_by(|a, b| a.sum.total_cmp(&b.sum))
        .expect("non-empty frontier");
    write(
        &dir,
        "summary.txt",
        &format!(
            "probe: {}\ndelta: {}\nbest sum: {:.6} at w = {:.3}\nweighed entanglement of best: {}\npareto points: {}\n",
            cfg.probe,
            cfg.delta,
            best.sum,
            best.weight,
            best.entanglement_weighed
                .map_or("n/a".into(), |e| format!("{e:.4}")),
            points.iter().filter(|p| p.pareto).count()
        ),
    )?;
    Ok(dir)
}

pub fn run_tomography(args: &CommonArgs) -> CliResult<PathBuf> {
    let mut cfg: TomographyConfig = load_config(args.config.as_deref())?;
    check_version(cfg.version)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(k) = args.k {
        cfg.k_grid = Grid::single(k);
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    let dir = prepare_run_dir(args, "tomography", &cfg)?;
    let quorum = ProbeQuorum::six_state();
    let phi_eval = cfg.phi + cfg.phase_offset_deg.to_radians();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from(csv_header());
    let mut covered = 0usize;
    let mut rows = 0usize;
    for k in cfg.k_grid.points() {
        let truth = sagnac_povm(&SagnacPovmSpec::new(k, cfg.v1, cfg.v2)?)?;
        let records =
            simulate_experiment(&truth, &quorum, cfg.shots, cfg.fluctuation_sd, &mut rng)?;
        let opts = ReconstructOptions {
            phi: phi_eval,
            delta: cfg.delta,
            truth: Some(truth.clone()),
            ..ReconstructOptions::default()
        };
        let res = monte_carlo_errorbars(&records, &quorum, cfg.resamples, &opts, &mut rng)?;
        let (xt, yt) = ratio_coordinates(&truth, phi_eval, cfg.delta)?;
        if (res.x - xt).abs() <= res.xerr && (res.y - yt).abs() <= res.yerr {
            covered += 1;
        }
        rows += 1;
        csv.push_str(&result_to_csv_row(k, &res, cfg.phase_offset_deg));
    }
    write(&dir, "tomography.csv", &csv)?;
    write(
        &dir,
        "summary.txt",
        &format!(
            "k settings: {rows}\nphase offset: {} deg\ntruth coordinates inside 2-sigma bars: {covered}/{rows}\n",
            cfg.phase_offset_deg
        ),
    )?;
    Ok(dir)
}

pub fn run_mle(args: &CommonArgs) -> CliResult<PathBuf> {
    let mut cfg: MleConfig = load_config(args.config.as_deref())?;
    check_version(cfg.version)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    let dir = prepare_run_dir(args, "mle", &cfg)?;
    let povm = sagnac_povm(&SagnacPovmSpec::new(cfg.k, cfg.v1, cfg.v2)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let report =
        mle_parameter_simulation(&povm, cfg.phi, cfg.delta, cfg.shots, cfg.trials, &mut rng)?;
    write(
        &dir,
        "mle.json",
        &serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?,
    )?;
    write(
        &dir,
        "summary.txt",
        &format!(
            "shots per trial: {}\ntrials: {}\nVar(phi)*M*F11 = {:.4}\nVar(delta)*M*F22 = {:.4}\nboundary fraction: {:.3}\n",
            report.shots, report.trials, report.cr_ratio_phi, report.cr_ratio_delta,
            report.boundary_fraction
        ),
    )?;
    Ok(dir)
}

pub fn run_tradeoff_scan(args: &CommonArgs) -> CliResult<PathBuf> {
    let mut cfg: TradeoffScanConfig = load_config(args.config.as_deref())?;
    check_version(cfg.version)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = args.delta {
        cfg.deltas = vec![d];
    }
    let dir = prepare_run_dir(args, "tradeoff-scan", &cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from("delta,index,family,ratio_phi,ratio_delta,sum\n");
    let mut max_sum: f64 = 0.0;
    for &delta in &cfg.deltas {
        let ds = qubit_with_derivatives(&QubitProbe::equatorial(cfg.phi, delta)?)?;
        let h = qfi_closed_form_qubit(std::f64::consts::FRAC_PI_2, delta);
        for i in 0..cfg.count {
            let (family, povm) = if i % 2 == 0 {
                ("general", random_qubit_povm(&mut rng, cfg.outcomes)?)
            } else {
                ("equatorial", random_equatorial_povm(&mut rng, cfg.outcomes)?)
            };
            let fi = classical_fi_discrete(&ds, &povm)?;
            let report = tradeoff_report(&fi.f, &h, 1)?;
            max_sum = max_sum.max(report.sum);
            csv.push_str(&format!(
                "{:.4},{},{},{:.9},{:.9},{:.9}\n",
                delta, i, family, report.ratio_phi, report.ratio_delta, report.sum
            ));
        }
    }
    write(&dir, "tradeoff.csv", &csv)?;
    write(
        &dir,
        "summary.txt",
        &format!(
            "POVMs per delta: {}\ndeltas: {:?}\nmax ratio sum: {:.9}\nseparable bound respected: {}\n",
            cfg.count,
            cfg.deltas,
            max_sum,
            max_sum <= 1.0 + 1e-9
        ),
    )?;
    Ok(dir)
}
