//! Synthetic detector tomography: generate intensity records from a
//! ground-truth POVM with slow Gaussian drift, reconstruct the POVM by
//! Gaussian-likelihood projected-gradient ascent, attach Monte-Carlo error
//! bars to the precision-ratio coordinates, and validate the estimator
//! against the Cramer-Rao prediction by direct simulation.

use crate::channels::qubit_with_derivatives;
use crate::estimation::{classical_fi_discrete, qfi_closed_form_qubit, tradeoff_report};
use crate::fock::QubitProbe;
use crate::measurements::Povm;
use crate::{C64, CMatrix, Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Input states used to interrogate the detector. The default quorum is the
/// six-state polarization set {H, V, D, A, R, L}.
#[derive(Clone, Debug)]
pub struct ProbeQuorum {
    states: Vec<(String, CMatrix)>,
}

fn ket(a: C64, b: C64) -> CMatrix {
    let v = nalgebra::DVector::from_vec(vec![a, b]);
    &v * v.adjoint()
}

impl ProbeQuorum {
    pub fn new(states: Vec<(String, CMatrix)>) -> Result<Self> {
        let q = Self { states };
        if q.gram_rank() < 4 {
            return Err(Error::QuorumNotComplete { rank: q.gram_rank() });
        }
        Ok(q)
    }

    pub fn six_state() -> Self {
        let r = |x: f64| C64::new(x, 0.0);
        let i = |x: f64| C64::new(0.0, x);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            states: vec![
                ("H".into(), ket(r(1.0), r(0.0))),
                ("V".into(), ket(r(0.0), r(1.0))),
                ("D".into(), ket(r(s), r(s))),
                ("A".into(), ket(r(s), r(-s))),
                ("R".into(), ket(r(s), i(s))),
                ("L".into(), ket(r(s), i(-s))),
            ],
        }
    }

    /// Applies a fixed unitary rotation error to every probe state,
    /// modeling preparation systematics.
    pub fn with_rotation_error(&self, angle: f64) -> Self {
        let (c, s) = (angle.cos(), angle.sin());
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(c, 0.0),
                C64::new(-s, 0.0),
                C64::new(s, 0.0),
                C64::new(c, 0.0),
            ],
        );
        Self {
            states: self
                .states
                .iter()
                .map(|(l, m)| (l.clone(), &u * m * u.adjoint()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.states.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn state(&self, label: &str) -> Option<&CMatrix> {
        self.states.iter().find(|(l, _)| l == label).map(|(_, m)| m)
    }

    fn gram_rank(&self) -> usize {
        // Rank of the probe set viewed as vectors in the 4-D real space of
        // Hermitian 2x2 matrices (Pauli coordinates).
        let rows = self.states.len();
        let mut m = nalgebra::DMatrix::<f64>::zeros(rows, 4);
        for (r, (_, s)) in self.states.iter().enumerate() {
            m[(r, 0)] = (s[(0, 0)] + s[(1, 1)]).re;
            m[(r, 1)] = (s[(0, 1)] + s[(1, 0)]).re;
            m[(r, 2)] = (s[(0, 1)] - s[(1, 0)]).im * -1.0;
            m[(r, 3)] = (s[(0, 0)] - s[(1, 1)]).re;
        }
        m.svd(false, false)
            .singular_values
            .iter()
            .filter(|&&v| v > 1e-10)
            .count()
    }
}

impl Default for ProbeQuorum {
    fn default() -> Self {
        Self::six_state()
    }
}

/// Trace of intensity readings for one (probe, outcome) setting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntensityRecord {
    pub probe: String,
    pub outcome: String,
    pub readings: Vec<f64>,
}

impl IntensityRecord {
    pub fn mean(&self) -> f64 {
        self.readings.iter().sum::<f64>() / self.readings.len() as f64
    }

    /// Empirical variance of the mean (sample variance over trace length),
    /// floored to keep the Gaussian likelihood finite for noiseless data.
    pub fn variance_of_mean(&self) -> f64 {
        let n = self.readings.len() as f64;
        let m = self.mean();
        let var = self
            .readings
            .iter()
            .map(|r| (r - m) * (r - m))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        (var / n).max(1e-16)
    }
}

/// Draws intensity traces: each reading is (Born probability) * (1 + g)
/// with g Gaussian of standard deviation `fluctuation_sd`, truncated at 0.
pub fn simulate_experiment(
    truth: &Povm,
    quorum: &ProbeQuorum,
    shots_per_setting: usize,
    fluctuation_sd: f64,
    rng: &mut impl Rng,
) -> Result<Vec<IntensityRecord>> {
    if truth.dim() != 2 {
        return Err(Error::InvalidPovm("tomography targets 2-D POVMs".into()));
    }
    if shots_per_setting == 0 {
        return Err(Error::InvalidParameter("need at least one shot".into()));
    }
    let mut records = Vec::new();
    for (probe, state) in &quorum.states {
        let p = truth.probabilities(state);
        for (k, label) in truth.labels().iter().enumerate() {
            let readings = (0..shots_per_setting)
                .map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    (p[k] * (1.0 + fluctuation_sd * g)).max(0.0)
                })
                .collect();
            records.push(IntensityRecord {
                probe: probe.clone(),
                outcome: label.clone(),
                readings,
            });
        }
    }
    Ok(records)
}

#[derive(Clone, Debug)]
pub struct ReconstructOptions {
    /// Phase and diffusion at which the FI coordinates are evaluated.
    pub phi: f64,
    pub delta: f64,
    pub max_iters: usize,
    /// Ground truth for synthetic runs; enables per-element fidelities.
    pub truth: Option<Povm>,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            phi: std::f64::consts::FRAC_PI_2,
            delta: 0.25,
            max_iters: 20_000,
            truth: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TomographyResult {
    #[serde(skip)]
    pub povm: Option<Povm>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub chi_square_per_dof: f64,
    pub fidelity_to_truth: Option<Vec<f64>>,
    pub phi: f64,
    pub delta: f64,
    /// Normalized precision coordinates of the reconstruction at (phi, delta).
    pub x: f64,
    pub y: f64,
    /// 2-sigma spreads; zero unless Monte-Carlo resampling was run.
    pub xerr: f64,
    pub yerr: f64,
}

/// Maximum-likelihood POVM reconstruction by projected gradient ascent:
/// gradient step on the Gaussian intensity likelihood, eigenvalue clipping
/// at zero, then the symmetric completeness renormalization
/// E_k -> S^{-1/2} E_k S^{-1/2} with S the element sum. Converged when the
/// log-likelihood improves by less than 1e-10 over 50 iterations.
pub fn reconstruct_povm(
    records: &[IntensityRecord],
    quorum: &ProbeQuorum,
    opts: &ReconstructOptions,
) -> Result<TomographyResult> {
    let data = Dataset::build(records, quorum)?;
    let k = data.outcomes.len();
    let mut elements: Vec<CMatrix> =
        vec![CMatrix::identity(2, 2) / C64::new(k as f64, 0.0); k];
    let mut ll = data.log_likelihood(&elements);
    let mut step = 1.0f64;
    let mut history = vec![ll];
    let mut iterations = 0;
    for it in 0..opts.max_iters {
        iterations = it + 1;
        let directions = data.newton_directions(&elements);
        let candidate = project(
            &elements
                .iter()
                .zip(&directions)
                .map(|(e, g)| e + g * C64::new(step, 0.0))
                .collect::<Vec<_>>(),
        )?;
        let cll = data.log_likelihood(&candidate);
        if cll >= ll {
            elements = candidate;
            ll = cll;
            step = (step * 1.5).min(1.0);
        } else {
            step *= 0.5;
            if step < 1e-300 {
                break;
            }
        }
        history.push(ll);
        if history.len() > 50 && ll - history[history.len() - 51] < 1e-10 {
            break;
        }
    }
    if history.len() <= 50 || ll - history[history.len() - 51] >= 1e-10 {
        return Err(Error::ReconstructionNotConverged {
            iters: iterations,
            improvement: ll - history[history.len().saturating_sub(51)],
        });
    }
    let povm = Povm::new(elements, data.outcomes.clone(), "reconstructed")?;
    let fidelity_to_truth = opts.truth.as_ref().map(|truth| {
        data.outcomes
            .iter()
            .map(|label| {
                let i = truth.labels().iter().position(|l| l == label).unwrap();
                let j = povm.labels().iter().position(|l| l == label).unwrap();
                normalized_fidelity2(truth.element(i), povm.element(j))
            })
            .collect()
    });
    let (x, y) = ratio_coordinates(&povm, opts.phi, opts.delta)?;
    Ok(TomographyResult {
        chi_square_per_dof: data.chi_square_per_dof(povm.elements()),
        povm: Some(povm),
        log_likelihood: ll,
        iterations,
        fidelity_to_truth,
        phi: opts.phi,
        delta: opts.delta,
        x,
        y,
        xerr: 0.0,
        yerr: 0.0,
    })
}

/// Normalized precision coordinates (var_phi_norm, var_delta_norm) of a 2-D
/// POVM on the equatorial probe at (phi, delta).
pub fn ratio_coordinates(povm: &Povm, phi: f64, delta: f64) -> Result<(f64, f64)> {
    let ds = qubit_with_derivatives(&QubitProbe::equatorial(phi, delta)?)?;
    let fi = classical_fi_discrete(&ds, povm)?;
    let h = qfi_closed_form_qubit(std::f64::consts::FRAC_PI_2, delta);
    let report = tradeoff_report(&fi.f, &h, 1)?;
    Ok((report.var_phi_norm, report.var_delta_norm))
}

/// Resamples the records from their empirical fluctuation model, re-runs the
/// reconstruction and reports the 2-sigma spread of the coordinates.
pub fn monte_carlo_errorbars(
    records: &[IntensityRecord],
    quorum: &ProbeQuorum,
    n_resamples: usize,
    opts: &ReconstructOptions,
    rng: &mut impl Rng,
) -> Result<TomographyResult> {
    if n_resamples < 100 {
        return Err(Error::InvalidParameter(
            "Monte-Carlo error bars need at least 100 resamples".into(),
        ));
    }
    let mut base = reconstruct_povm(records, quorum, opts)?;
    let mut xs = Vec::with_capacity(n_resamples);
    let mut ys = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let resampled: Vec<IntensityRecord> = records
            .iter()
            .map(|r| {
                let m = r.mean();
                let sd = (r.variance_of_mean() * r.readings.len() as f64).sqrt();
                let readings = (0..r.readings.len())
                    .map(|_| {
                        let g: f64 = rng.sample(StandardNormal);
                        (m + sd * g).max(0.0)
                    })
                    .collect();
                IntensityRecord {
                    probe: r.probe.clone(),
                    outcome: r.outcome.clone(),
                    readings,
                }
            })
            .collect();
        match reconstruct_povm(&resampled, quorum, opts) {
            Ok(res) => {
                xs.push(res.x);
                ys.push(res.y);
            }
            Err(Error::ReconstructionNotConverged { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if xs.len() < n_resamples / 2 {
        return Err(Error::ReconstructionNotConverged {
            iters: xs.len(),
            improvement: 0.0,
        });
    }
    base.xerr = 2.0 * std_dev(&xs);
    base.yerr = 2.0 * std_dev(&ys);
    Ok(base)
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// CSV row matching the precision-plot schema.
pub fn result_to_csv_row(k: f64, res: &TomographyResult, phase_offset_deg: f64) -> String {
    format!(
        "{:.4},{:.9},{:.9},{:.9},{:.9},{:.3}\n",
        k, res.x, res.y, res.xerr, res.yerr, phase_offset_deg
    )
}

pub fn csv_header() -> &'static str {
    "k,x,y,xerr,yerr,phase_offset_deg\n"
}

// -- Gaussian likelihood over the settings grid ------------------------------

struct Dataset {
    outcomes: Vec<String>,
    /// Per setting: probe state, outcome index, measured mean, inverse
    /// variance of the mean.
    settings: Vec<(CMatrix, usize, f64, f64)>,
    /// Per outcome: inverse of the weighted normal matrix over the probe
    /// Bloch 4-vectors; preconditions the likelihood ascent.
    normal_inv: Vec<nalgebra::Matrix4<f64>>,
}

/// Coordinates in the Hermitian basis {I, sx, sy, sz}: m = sum_i c_i s_i / 2.
fn pauli_coords(m: &CMatrix) -> nalgebra::Vector4<f64> {
    nalgebra::Vector4::new(
        (m[(0, 0)] + m[(1, 1)]).re,
        (m[(0, 1)] + m[(1, 0)]).re,
        (m[(0, 1)] - m[(1, 0)]).im * -1.0,
        (m[(0, 0)] - m[(1, 1)]).re,
    )
}

fn from_pauli_coords(c: &nalgebra::Vector4<f64>) -> CMatrix {
    let h = |re: f64, im: f64| C64::new(re / 2.0, im / 2.0);
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = h(c[0] + c[3], 0.0);
    m[(1, 1)] = h(c[0] - c[3], 0.0);
    m[(0, 1)] = h(c[1], -c[2]);
    m[(1, 0)] = h(c[1], c[2]);
    m
}

impl Dataset {
    fn build(records: &[IntensityRecord], quorum: &ProbeQuorum) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidParameter("no records".into()));
        }
        let mut outcome_index = BTreeMap::new();
        for r in records {
            let next = outcome_index.len();
            outcome_index.entry(r.outcome.clone()).or_insert(next);
        }
        let outcomes: Vec<String> = {
            let mut v: Vec<(usize, String)> =
                outcome_index.iter().map(|(l, &i)| (i, l.clone())).collect();
            v.sort();
            v.into_iter().map(|(_, l)| l).collect()
        };
        let mut settings = Vec::with_capacity(records.len());
        let mut normals = vec![nalgebra::Matrix4::<f64>::zeros(); outcomes.len()];
        for r in records {
            let state = quorum.state(&r.probe).ok_or_else(|| {
                Error::InvalidParameter(format!("record references unknown probe {}", r.probe))
            })?;
            let k = outcome_index[&r.outcome];
            let inv_var = 1.0 / r.variance_of_mean();
            let v = pauli_coords(state);
            normals[k] += v * v.transpose() * inv_var;
            settings.push((state.clone(), k, r.mean(), inv_var));
        }
        let normal_inv = normals
            .into_iter()
            .map(|n| {
                n.try_inverse().ok_or_else(|| {
                    Error::QuorumNotComplete {
                        rank: 0,
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            outcomes,
            settings,
            normal_inv,
        })
    }

    fn log_likelihood(&self, elements: &[CMatrix]) -> f64 {
        -0.5
            * self
                .settings
                .iter()
                .map(|(state, k, mean, inv_var)| {
                    let p = real_inner(&elements[*k], state);
                    (mean - p) * (mean - p) * inv_var
                })
                .sum::<f64>()
    }

    /// Completeness-constrained Newton ascent directions: the likelihood is
    /// quadratic and block-diagonal over elements, so a full step jumps to
    /// the exact optimum on the affine slice where the element sum is
    /// unchanged. Keeping the step inside that slice means the completeness
    /// renormalization is a no-op whenever no eigenvalue clipping fires, and
    /// the ascent terminates instead of chasing a renormalization fixed
    /// point.
    fn newton_directions(&self, elements: &[CMatrix]) -> Vec<CMatrix> {
        let mut grads = vec![nalgebra::Vector4::<f64>::zeros(); elements.len()];
        for (state, k, mean, inv_var) in &self.settings {
            let p = real_inner(&elements[*k], state);
            // Residual weight times the probe's Bloch vector; p = c . v / 2.
            grads[*k] += pauli_coords(state) * ((mean - p) * inv_var / 2.0);
        }
        // Lagrange multiplier enforcing sum_k step_k = 0.
        let mut s = nalgebra::Matrix4::<f64>::zeros();
        let mut sg = nalgebra::Vector4::<f64>::zeros();
        for (g, ninv) in grads.iter().zip(&self.normal_inv) {
            s += ninv;
            sg += ninv * g;
        }
        let mu = s
            .try_inverse()
            .map(|si| si * sg)
            .unwrap_or_else(nalgebra::Vector4::zeros);
        grads
            .iter()
            .zip(&self.normal_inv)
            .map(|(g, ninv)| from_pauli_coords(&(ninv * (g - mu) * 4.0)))
            .collect()
    }

    fn chi_square_per_dof(&self, elements: &[CMatrix]) -> f64 {
        let chi: f64 = self
            .settings
            .iter()
            .map(|(state, k, mean, inv_var)| {
                let p = real_inner(&elements[*k], state);
                (mean - p) * (mean - p) * inv_var
            })
            .sum();
        let free = 4 * elements.len() - 4;
        let dof = self.settings.len().saturating_sub(free).max(1);
        chi / dof as f64
    }
}

fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    (a[(0, 0)] * b[(0, 0)] + a[(0, 1)] * b[(1, 0)] + a[(1, 0)] * b[(0, 1)] + a[(1, 1)] * b[(1, 1)])
        .re
}

/// Eigenvalue clipping at zero followed by the symmetric completeness
/// renormalization.
fn project(elements: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let clipped: Vec<CMatrix> = elements.iter().map(clip_psd2).collect();
    let mut s = CMatrix::zeros(2, 2);
    for e in &clipped {
        s += e;
    }
    let w = inv_sqrt2(&s)?;
    Ok(clipped.iter().map(|e| &w * e * &w).collect())
}

fn eig2(m: &CMatrix) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let b = m[(1, 1)].re;
    let mid = (a + b) / 2.0;
    let r = (((a - b) / 2.0).powi(2) + m[(0, 1)].norm_sqr()).sqrt();
    (mid - r, mid + r)
}

fn clip_psd2(m: &CMatrix) -> CMatrix {
    let m = (m + m.adjoint()) / C64::new(2.0, 0.0);
    let (lo, hi) = eig2(&m);
    if lo >= 0.0 {
        return m;
    }
    if hi <= 0.0 {
        return CMatrix::zeros(2, 2);
    }
    // hi * P_hi with P_hi = (m - lo I) / (hi - lo).
    (&m - CMatrix::identity(2, 2) * C64::new(lo, 0.0)) * C64::new(hi / (hi - lo), 0.0)
}

fn inv_sqrt2(m: &CMatrix) -> Result<CMatrix> {
    let (lo, hi) = eig2(m);
    if lo <= 1e-12 {
        return Err(Error::InvalidPovm(
            "element sum became singular during reconstruction".into(),
        ));
    }
    if hi - lo < 1e-14 {
        return Ok(CMatrix::identity(2, 2) * C64::new(1.0 / lo.sqrt(), 0.0));
    }
    // f(m) = alpha m + beta I interpolating 1/sqrt at both eigenvalues.
    let (flo, fhi) = (1.0 / lo.sqrt(), 1.0 / hi.sqrt());
    let alpha = (fhi - flo) / (hi - lo);
    let beta = flo - alpha * lo;
    Ok(m * C64::new(alpha, 0.0) + CMatrix::identity(2, 2) * C64::new(beta, 0.0))
}

/// Uhlmann fidelity of the trace-normalized elements; closed form for 2x2:
/// F = tr(rho sigma) + 2 sqrt(det rho det sigma).
pub fn normalized_fidelity2(a: &CMatrix, b: &CMatrix) -> f64 {
    let ta = (a[(0, 0)] + a[(1, 1)]).re;
    let tb = (b[(0, 0)] + b[(1, 1)]).re;
    let rho = a / C64::new(ta, 0.0);
    let sigma = b / C64::new(tb, 0.0);
    let tr = real_inner(&rho, &sigma);
    let det = |m: &CMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    (tr + 2.0 * (det(&rho).max(0.0) * det(&sigma).max(0.0)).sqrt()).min(1.0)
}

// -- Maximum-likelihood parameter estimation ---------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MleReport {
    pub phi: f64,
    pub delta: f64,
    pub shots: usize,
    pub trials: usize,
    /// Empirical covariance of the estimates across trials.
    pub cov: [[f64; 2]; 2],
    /// Var(phi) * M * F_11 and Var(delta) * M * F_22: near 1 when the
    /// Cramer-Rao bound is saturated.
    pub cr_ratio_phi: f64,
    pub cr_ratio_delta: f64,
    pub mean_phi: f64,
    pub mean_delta: f64,
    /// Fraction of trials whose likelihood maximum sat on the delta = 0
    /// boundary (estimator bias indicator).
    pub boundary_fraction: f64,
}

/// Simulates repeated estimation runs: per trial, M outcomes are sampled
/// from the POVM statistics of the equatorial probe at (phi, delta) and the
/// likelihood is maximized over (0, pi) x [0, 1.5] by a 60x60 grid followed
/// by Newton refinement.
pub fn mle_parameter_simulation(
    povm: &Povm,
    phi: f64,
    delta: f64,
    shots: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<MleReport> {
    if povm.dim() != 2 {
        return Err(Error::InvalidPovm("parameter simulation targets 2-D POVMs".into()));
    }
    if !(0.0..std::f64::consts::PI).contains(&phi) || !(0.0..=1.5).contains(&delta) {
        return Err(Error::InvalidParameter(
            "true parameters must lie inside the search box".into(),
        ));
    }
    // Per element: p_k(phi, delta) = half_k + e^{-delta^2} (u_k cos phi - v_k sin phi).
    let terms: Vec<(f64, f64, f64)> = (0..povm.len())
        .map(|k| {
            let e = povm.element(k);
            (
                (e[(0, 0)] + e[(1, 1)]).re / 2.0,
                e[(0, 1)].re,
                e[(0, 1)].im,
            )
        })
        .collect();
    let prob = |phi: f64, delta: f64, k: usize| -> f64 {
        let (half, u, v) = terms[k];
        (half + (-delta * delta).exp() * (u * phi.cos() - v * phi.sin())).max(1e-300)
    };
    let truth: Vec<f64> = (0..povm.len()).map(|k| prob(phi, delta, k)).collect();
    let mut cum = vec![0.0; truth.len()];
    let mut acc = 0.0;
    for (k, p) in truth.iter().enumerate() {
        acc += p;
        cum[k] = acc;
    }
    let mut estimates = Vec::with_capacity(trials);
    let mut boundary = 0usize;
    for _ in 0..trials {
        let mut counts = vec![0u64; truth.len()];
        for _ in 0..shots {
            let r: f64 = rng.gen::<f64>() * acc;
            let k = cum.partition_point(|&c| c < r).min(truth.len() - 1);
            counts[k] += 1;
        }
        let ll = |phi: f64, delta: f64| -> f64 {
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| c as f64 * prob(phi, delta, k).ln())
                .sum()
        };
        let (mut bphi, mut bdelta, mut bval) = (0.0, 0.0, f64::NEG_INFINITY);
        for i in 0..60 {
            let gphi = std::f64::consts::PI * (i as f64 + 0.5) / 60.0;
            for j in 0..60 {
                let gdelta = 1.5 * j as f64 / 59.0;
                let v = ll(gphi, gdelta);
                if v > bval {
                    (bphi, bdelta, bval) = (gphi, gdelta, v);
                }
            }
        }
        let (ephi, edelta, on_boundary) = newton_refine(&ll, bphi, bdelta);
        if on_boundary {
            boundary += 1;
        }
        estimates.push((ephi, edelta));
    }
    let n = trials as f64;
    let mean_phi = estimates.iter().map(|e| e.0).sum::<f64>() / n;
    let mean_delta = estimates.iter().map(|e| e.1).sum::<f64>() / n;
    let mut cov = [[0.0; 2]; 2];
    for (p, d) in &estimates {
        let e = [p - mean_phi, d - mean_delta];
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += e[a] * e[b] / (n - 1.0);
            }
        }
    }
    let ds = qubit_with_derivatives(&QubitProbe::equatorial(phi, delta)?)?;
    let f = classical_fi_discrete(&ds, povm)?.f;
    Ok(MleReport {
        phi,
        delta,
        shots,
        trials,
        cov,
        cr_ratio_phi: cov[0][0] * shots as f64 * f[(0, 0)],
        cr_ratio_delta: cov[1][1] * shots as f64 * f[(1, 1)],
        mean_phi,
        mean_delta,
        boundary_fraction: boundary as f64 / n,
    })
}

fn newton_refine(ll: &impl Fn(f64, f64) -> f64, mut phi: f64, mut delta: f64) -> (f64, f64, bool) {
    let h = 1e-5;
    let mut on_boundary = false;
    for _ in 0..40 {
        let g1 = (ll(phi + h, delta) - ll(phi - h, delta)) / (2.0 * h);
        let g2 = (ll(phi, delta + h) - ll(phi, delta - h)) / (2.0 * h);
        let h11 = (ll(phi + h, delta) - 2.0 * ll(phi, delta) + ll(phi - h, delta)) / (h * h);
        let h22 = (ll(phi, delta + h) - 2.0 * ll(phi, delta) + ll(phi, delta - h)) / (h * h);
        let h12 = (ll(phi + h, delta + h) - ll(phi + h, delta - h) - ll(phi - h, delta + h)
            + ll(phi - h, delta - h))
            / (4.0 * h * h);
        let det = h11 * h22 - h12 * h12;
        // Newton ascent step -H^{-1} g when the Hessian is usable, damped
        // gradient ascent otherwise.
        let (step_phi, step_delta) = if det > 1e-12 && h11 < 0.0 {
            (
                -(h22 * g1 - h12 * g2) / det,
                -(h11 * g2 - h12 * g1) / det,
            )
        } else {
            (g1 / h11.abs().max(1.0), g2 / h22.abs().max(1.0))
        };
        let scale = step_phi.abs().max(step_delta.abs());
        let damp = if scale > 0.2 { 0.2 / scale } else { 1.0 };
        phi = (phi + damp * step_phi).clamp(1e-6, std::f64::consts::PI - 1e-6);
        delta += damp * step_delta;
        if delta <= 0.0 {
            delta = 0.0;
            on_boundary = true;
        } else {
            on_boundary = false;
        }
        delta = delta.min(1.5);
        if scale * damp < 1e-9 {
            break;
        }
    }
    (phi, delta, on_boundary)
}
