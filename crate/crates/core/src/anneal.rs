//! Simulated annealing over rank-1 projective measurements, mapping the
//! frontier of jointly achievable normalized precisions for (phi, delta).
//!
//! A measurement is a unitary whose columns are the projector vectors. The
//! walk composes small random unitaries drawn from the Gaussian unitary
//! ensemble; a geometric cooling schedule shrinks both the temperature and
//! the step size. Chains are deterministic per seed.

use crate::channels::DifferentiatedState;
use crate::estimation::{classical_fi_discrete, tradeoff_report};
use crate::linalg;
use crate::measurements::Povm;
use crate::{C64, CMatrix, Error, Result};
use nalgebra::Matrix2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Rank-1 projective measurement: the columns of `unitary` are the
/// measurement vectors.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    unitary: CMatrix,
}

impl ProjectiveMeasurement {
    pub fn new(unitary: CMatrix) -> Result<Self> {
        let d = unitary.nrows();
        if d == 0 || unitary.ncols() != d {
            return Err(Error::InvalidParameter("measurement must be square".into()));
        }
        let defect = linalg::max_abs(&(unitary.adjoint() * &unitary - CMatrix::identity(d, d)));
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "unitarity defect {defect:.2e} exceeds 1e-10"
            )));
        }
        Ok(Self { unitary })
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    /// Outcome weights <psi_j| m |psi_j> of a Hermitian matrix.
    pub fn outcome_weights(&self, m: &CMatrix) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|j| {
                let col = self.unitary.column(j);
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..d {
                    let mut row = C64::new(0.0, 0.0);
                    for c in 0..d {
                        row += m[(r, c)] * col[c];
                    }
                    acc += col[r].conj() * row;
                }
                acc.re
            })
            .collect()
    }

    /// The measurement as a POVM of rank-1 projectors.
    pub fn to_povm(&self) -> Povm {
        let d = self.dim();
        let elements: Vec<CMatrix> = (0..d)
            .map(|j| {
                let col = self.unitary.column(j).into_owned();
                &col * col.adjoint()
            })
            .collect();
        let labels = (0..d).map(|j| format!("p{j}")).collect();
        Povm::new(elements, labels, "annealed projective")
            .expect("rank-1 projectors of a unitary form a POVM")
    }
}

/// Annealing schedule and objective parameters. Runs are reproducible given
/// `seed`; every chain consumes an independent sub-seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub steps: usize,
    pub initial_temperature: f64,
    pub cooling: f64,
    pub initial_step: f64,
    pub step_floor: f64,
    /// Scalarization weights w in [0, 1]; the chain for weight w maximizes
    /// w * x + (1 - w) * y - entanglement_weight * weighed_entropy.
    pub weights: Vec<f64>,
    pub entanglement_weight: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            steps: 20_000,
            initial_temperature: 0.05,
            cooling: 0.995,
            initial_step: 0.2,
            step_floor: 1e-3,
            weights: (0..21).map(|i| i as f64 / 20.0).collect(),
            entanglement_weight: 0.0,
            restarts: 8,
            seed: 1,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.steps > 0
            && self.initial_temperature > 0.0
            && self.cooling > 0.0
            && self.cooling < 1.0
            && self.initial_step > 0.0
            && self.step_floor >= 0.0
            && !self.weights.is_empty()
            && self.weights.iter().all(|w| (0.0..=1.0).contains(w))
            && self.entanglement_weight >= 0.0
            && self.restarts > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("invalid annealing config".into()))
        }
    }
}

/// Search problem: the encoded state (restricted to the search subspace),
/// the reference QFI, the probe count used for per-probe normalization and
/// an optional bipartition (da, db) for entanglement accounting, with the
/// basis in row-major (a-major) product order.
#[derive(Clone, Debug)]
pub struct AnnealProblem<'a> {
    pub state: &'a DifferentiatedState,
    pub h: Matrix2<f64>,
    pub probes: usize,
    pub bipartition: Option<(usize, usize)>,
}

/// Best measurement found for one scalarization weight.
#[derive(Clone, Debug)]
pub struct FrontierPoint {
    pub weight: f64,
    pub x: f64,
    pub y: f64,
    pub sum: f64,
    pub entanglement_raw: Option<f64>,
    pub entanglement_weighed: Option<f64>,
    pub measurement: ProjectiveMeasurement,
    pub seed: u64,
    pub pareto: bool,
    /// Objective value after each accepted move of the winning chain.
    pub accepted_log: Vec<f64>,
}

/// One random-walk step: u * exp(i epsilon G) with G drawn from the Gaussian
/// unitary ensemble and normalized to unit spectral radius.
pub fn random_unitary_step(u: &CMatrix, epsilon: f64, rng: &mut impl Rng) -> CMatrix {
    let d = u.nrows();
    if epsilon == 0.0 {
        return u.clone();
    }
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    let g = (&g + g.adjoint()) / C64::new(2.0, 0.0);
    let (vals, _) = linalg::hermitian_eigen(&g);
    let radius = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    u * linalg::expi_hermitian(&g, epsilon / radius)
}

/// Uniformly random unitary (QR of a Ginibre matrix).
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    linalg::reorthonormalize(&a)
}

/// Total entropy of entanglement of the projector columns, in bits, for the
/// bipartition (da, db): raw sum and the value weighed by the maximum
/// (number of projectors times log2 min(da, db)).
pub fn entanglement_entropy_total(
    meas: &ProjectiveMeasurement,
    da: usize,
    db: usize,
) -> Result<(f64, f64)> {
    let d = meas.dim();
    if da * db != d || da < 2 || db < 2 {
        return Err(Error::InvalidParameter(format!(
            "bipartition {da}x{db} does not match dimension {d}"
        )));
    }
    let mut raw = 0.0;
    for j in 0..d {
        raw += column_entanglement_entropy(meas.unitary(), j, da, db);
    }
    let max = d as f64 * (da.min(db) as f64).log2();
    Ok((raw, raw / max))
}

fn column_entanglement_entropy(u: &CMatrix, col: usize, da: usize, db: usize) -> f64 {
    let mut m = CMatrix::zeros(da, db);
    for i in 0..da {
        for j in 0..db {
            m[(i, j)] = u[(i * db + j, col)];
        }
    }
    let sv = m.svd(false, false).singular_values;
    let mut s = 0.0;
    for v in sv.iter() {
        let p = v * v;
        if p > 1e-15 {
            s -= p * p.log2();
        }
    }
    s
}

/// Runs the full sweep: for every scalarization weight, the best measurement
/// across restarts; Pareto-dominant points are marked.
pub fn anneal_frontier(problem: &AnnealProblem, config: &AnnealConfig) -> Result<Vec<FrontierPoint>> {
    config.validate()?;
    if problem.h[(0, 0)] <= 0.0 || problem.h[(1, 1)] <= 0.0 {
        return Err(Error::InvalidParameter("QFI diagonal must be positive".into()));
    }
    if let Some((da, db)) = problem.bipartition {
        if da * db != problem.state.dim() {
            return Err(Error::InvalidParameter(
                "bipartition does not match state dimension".into(),
            ));
        }
    }
    let mut points = Vec::with_capacity(config.weights.len());
    for (wi, &w) in config.weights.iter().enumerate() {
        let mut best: Option<(f64, FrontierPoint)> = None;
        for restart in 0..config.restarts {
            let seed = chain_seed(config.seed, wi, restart);
            let outcome = run_chain(problem, config, w, seed);
            if best.as_ref().map_or(true, |(b, _)| outcome.0 > *b) {
                best = Some(outcome);
            }
        }
        points.push(best.expect("restarts > 0").1);
    }
    mark_pareto(&mut points);
    Ok(points)
}

fn chain_seed(seed: u64, weight_index: usize, restart: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((weight_index as u64) << 20)
        .wrapping_add(restart as u64)
}

fn run_chain(
    problem: &AnnealProblem,
    config: &AnnealConfig,
    w: f64,
    seed: u64,
) -> (f64, FrontierPoint) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = problem.state.dim();
    let mut u = random_unitary(d, &mut rng);
    let mut current = evaluate(problem, config, w, &u);
    let mut best_u = u.clone();
    let mut best = current;
    let mut log = vec![current];
    for k in 0..config.steps {
        let t = config.initial_temperature * config.cooling.powi(k as i32);
        let eps = (config.initial_step * (t / config.initial_temperature).sqrt())
            .max(config.step_floor);
        let candidate = random_unitary_step(&u, eps, &mut rng);
        let value = evaluate(problem, config, w, &candidate);
        let accept = value >= current || {
            let p: f64 = rng.gen();
            p < ((value - current) / t.max(1e-12)).exp()
        };
        if accept {
            u = candidate;
            current = value;
            log.push(value);
            if value > best {
                best = value;
                best_u = u.clone();
            }
        }
        if (k + 1) % 100 == 0 {
            u = linalg::reorthonormalize(&u);
            current = evaluate(problem, config, w, &u);
        }
    }
    let final_u = linalg::reorthonormalize(&best_u);
    let meas = ProjectiveMeasurement::new(final_u).expect("re-orthonormalized unitary");
    let (x, y) = coordinates(problem, &meas);
    let (raw, weighed) = match problem.bipartition {
        Some((da, db)) => {
            let (r, wgt) = entanglement_entropy_total(&meas, da, db).expect("validated bipartition");
            (Some(r), Some(wgt))
        }
        None => (None, None),
    };
    let objective = w * x + (1.0 - w) * y - config.entanglement_weight * weighed.unwrap_or(0.0);
    (
        objective,
        FrontierPoint {
            weight: w,
            x,
            y,
            sum: x + y,
            entanglement_raw: raw,
            entanglement_weighed: weighed,
            measurement: meas,
            seed,
            pareto: false,
            accepted_log: log,
        },
    )
}

fn evaluate(problem: &AnnealProblem, config: &AnnealConfig, w: f64, u: &CMatrix) -> f64 {
    let (x, y) = coordinates_from_unitary(problem, u);
    let mut value = w * x + (1.0 - w) * y;
    if config.entanglement_weight > 0.0 {
        if let Some((da, db)) = problem.bipartition {
            let d = u.nrows();
            let mut raw = 0.0;
            for j in 0..d {
                raw += column_entanglement_entropy(u, j, da, db);
            }
            let max = d as f64 * (da.min(db) as f64).log2();
            value -= config.entanglement_weight * raw / max;
        }
    }
    value
}

fn coordinates(problem: &AnnealProblem, meas: &ProjectiveMeasurement) -> (f64, f64) {
    coordinates_from_unitary(problem, meas.unitary())
}

fn coordinates_from_unitary(problem: &AnnealProblem, u: &CMatrix) -> (f64, f64) {
    let meas = ProjectiveMeasurement { unitary: u.clone() };
    let p = meas.outcome_weights(problem.state.rho());
    let d1 = meas.outcome_weights(problem.state.d_phi());
    let d2 = meas.outcome_weights(problem.state.d_delta());
    let mut f = Matrix2::zeros();
    for n in 0..p.len() {
        if p[n] < 1e-14 {
            continue;
        }
        for a in 0..2 {
            for b in 0..2 {
                f[(a, b)] += [d1[n], d2[n]][a] * [d1[n], d2[n]][b] / p[n];
            }
        }
    }
    f /= problem.probes as f64;
    match tradeoff_report(&f, &problem.h, problem.probes) {
        Ok(r) => (r.var_phi_norm, r.var_delta_norm),
        Err(_) => (0.0, 0.0),
    }
}

fn mark_pareto(points: &mut [FrontierPoint]) {
    let coords: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    for (i, p) in points.iter_mut().enumerate() {
        let dominated = coords.iter().enumerate().any(|(j, &(x, y))| {
            j != i
                && x >= p.x
                && y >= p.y
                && (x > p.x + 1e-12 || y > p.y + 1e-12)
        });
        p.pareto = !dominated;
    }
}

/// Re-evaluates a frontier point's measurement through the audited POVM path
/// (divergence flags included) and returns the full trade-off report.
pub fn audit_point(
    problem: &AnnealProblem,
    point: &FrontierPoint,
) -> Result<crate::estimation::TradeoffReport> {
    let povm = point.measurement.to_povm();
    let fi = classical_fi_discrete(problem.state, &povm)?;
    let per_probe = fi.f / problem.probes as f64;
    tradeoff_report(&per_probe, &problem.h, problem.probes)
}

/// CSV export of a frontier: one row per weight.
pub fn frontier_to_csv(points: &[FrontierPoint]) -> String {
    let mut out =
        String::from("w,x,y,sum,entanglement_raw,entanglement_weighed,seed,pareto\n");
    for p in points {
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12}"));
        out.push_str(&format!(
            "{:.4},{:.12},{:.12},{:.12},{},{},{},{}\n",
            p.weight,
            p.x,
            p.y,
            p.sum,
            fmt(p.entanglement_raw),
            fmt(p.entanglement_weighed),
            p.seed,
            p.pareto as u8
        ));
    }
    out
}
