//! Quantum and classical Fisher information for the parameter pair
//! (phi, delta): SLD solver, QFI matrices, FI for discrete POVMs and
//! continuous-outcome measurements, and the precision trade-off metrics.
//!
//! Parameter ordering is fixed as (phi, delta) everywhere; index 1 is the
//! phase.

use crate::channels::DifferentiatedState;
use crate::linalg;
use crate::measurements::{DoubleHomodyne, Povm};
use crate::quadrature::gauss_legendre;
use crate::{C64, CMatrix, Error, Result};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

/// Eigenvalue-sum threshold below which SLD matrix elements are set to zero
/// (Moore-Penrose convention for rank-deficient states).
const SLD_SUPPORT_TOL: f64 = 1e-12;
/// Maximum admissible derivative weight outside the state's support.
const SLD_RESIDUAL_TOL: f64 = 1e-9;

/// Classical (F) and quantum (H) Fisher information matrices for (phi, delta),
/// in rad^-2 per probe.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FisherMatrices {
    pub f: Matrix2<f64>,
    pub h: Matrix2<f64>,
}

impl FisherMatrices {
    /// Checks positive semidefiniteness of F and H and the quantum bound
    /// H >= F (within -1e-10 and -1e-8 eigenvalue tolerances).
    pub fn validate(&self) -> Result<()> {
        for (name, m, tol) in [
            ("F", self.f, -1e-10),
            ("H", self.h, -1e-10),
            ("H - F", self.h - self.f, -1e-8),
        ] {
            if min_eig_sym2(&m) < tol {
                return Err(Error::InvalidParameter(format!(
                    "{name} fails positivity within {tol:.0e}"
                )));
            }
        }
        Ok(())
    }
}

fn min_eig_sym2(m: &Matrix2<f64>) -> f64 {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    half_tr - (half_tr * half_tr - det).max(0.0).sqrt()
}

/// Symmetric logarithmic derivatives for the two parameters.
#[derive(Clone, Debug)]
pub struct SldPair {
    pub l_phi: CMatrix,
    pub l_delta: CMatrix,
    /// 2 Im Tr[rho L_phi L_delta]; the QFI is jointly attainable (by a
    /// collective measurement) when this vanishes.
    pub commutator_expectation: f64,
}

/// Solves 2 d_rho = L rho + rho L in the eigenbasis of rho:
/// L_ij = 2 <i|d_rho|j> / (l_i + l_j) where the eigenvalue sum exceeds
/// 1e-12, zero otherwise. Derivative weight on the excluded block means the
/// parameter is not identifiable on this state.
pub fn sld(ds: &DifferentiatedState) -> Result<SldPair> {
    let (vals, vecs) = linalg::hermitian_eigen(ds.rho());
    let dim = ds.dim();
    let solve = |d_rho: &CMatrix| -> Result<CMatrix> {
        let d_eig = vecs.adjoint() * d_rho * &vecs;
        let mut l = CMatrix::zeros(dim, dim);
        let mut residual = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let s = vals[i] + vals[j];
                if s > SLD_SUPPORT_TOL {
                    l[(i, j)] = C64::new(2.0 / s, 0.0) * d_eig[(i, j)];
                } else {
                    residual = residual.max(2.0 * d_eig[(i, j)].norm());
                }
            }
        }
        if residual > SLD_RESIDUAL_TOL {
            return Err(Error::NotIdentifiable { residual });
        }
        Ok(&vecs * l * vecs.adjoint())
    };
    let l_phi = solve(ds.d_phi())?;
    let l_delta = solve(ds.d_delta())?;
    let commutator_expectation = 2.0 * linalg::trace(&(ds.rho() * &l_phi * &l_delta)).im;
    Ok(SldPair {
        l_phi,
        l_delta,
        commutator_expectation,
    })
}

/// QFI matrix H_ij = Re Tr[rho L_i L_j] from the SLD pair.
pub fn qfi_matrix(ds: &DifferentiatedState) -> Result<Matrix2<f64>> {
    let pair = sld(ds)?;
    let ls = [&pair.l_phi, &pair.l_delta];
    let mut h = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            h[(i, j)] = linalg::trace(&(ds.rho() * ls[i] * ls[j])).re;
        }
    }
    // Symmetrize away roundoff.
    let h01 = (h[(0, 1)] + h[(1, 0)]) / 2.0;
    h[(0, 1)] = h01;
    h[(1, 0)] = h01;
    Ok(h)
}

/// Closed-form QFI of the effective qubit probe:
/// sin^2(theta) diag(e^{-2 Delta^2}, 4 Delta^2 / (e^{2 Delta^2} - 1)),
/// with the analytic limit 2 sin^2(theta) for the second entry at Delta = 0.
pub fn qfi_closed_form_qubit(theta: f64, delta: f64) -> Matrix2<f64> {
    let s2 = theta.sin().powi(2);
    let d2 = delta * delta;
    let h11 = (-2.0 * d2).exp();
    let h22 = if delta == 0.0 {
        2.0
    } else {
        4.0 * d2 / (2.0 * d2).exp_m1()
    };
    Matrix2::new(s2 * h11, 0.0, 0.0, s2 * h22)
}

/// N00N-state QFI scaling: N^2 H_{pi/2}(N Delta).
pub fn qfi_closed_form_noon(n: usize, delta: f64) -> Matrix2<f64> {
    qfi_closed_form_qubit(std::f64::consts::FRAC_PI_2, n as f64 * delta) * (n * n) as f64
}

/// Coherent-state QFI scaling: |alpha|^2 H_theta(Delta).
pub fn qfi_coherent_multiplier(alpha_sq: f64, theta: f64, delta: f64) -> Matrix2<f64> {
    qfi_closed_form_qubit(theta, delta) * alpha_sq
}

/// Classical FI of a discrete POVM with divergence diagnostics.
#[derive(Clone, Debug)]
pub struct DiscreteFi {
    pub f: Matrix2<f64>,
    /// Outcomes with vanishing probability but non-negligible derivative:
    /// the FI is formally divergent there and is reported, not clipped.
    pub divergent: Vec<usize>,
}

/// F_ij = sum_n (1/p_n) dp_i dp_j. Outcomes with p < 1e-14 and negligible
/// derivatives are skipped; vanishing probability with non-negligible
/// derivative is flagged as divergent.
pub fn classical_fi_discrete(ds: &DifferentiatedState, povm: &Povm) -> Result<DiscreteFi> {
    if povm.dim() != ds.dim() {
        return Err(Error::InvalidPovm(format!(
            "POVM dimension {} does not match state dimension {}",
            povm.dim(),
            ds.dim()
        )));
    }
    let p = povm.probabilities(ds.rho());
    let dp1 = povm.probabilities(ds.d_phi());
    let dp2 = povm.probabilities(ds.d_delta());
    let mut f = Matrix2::zeros();
    let mut divergent = Vec::new();
    for n in 0..povm.len() {
        if p[n] < 1e-14 {
            if dp1[n].abs() >= 1e-12 || dp2[n].abs() >= 1e-12 {
                divergent.push(n);
            }
            continue;
        }
        let d = [dp1[n], dp2[n]];
        for i in 0..2 {
            for j in 0..2 {
                f[(i, j)] += d[i] * d[j] / p[n];
            }
        }
    }
    Ok(DiscreteFi { f, divergent })
}

/// Integration grid for continuous-outcome FI: polar coordinates with
/// Gauss-Legendre radial nodes on [0, R] and a uniform (trapezoidal) angular
/// rule, plus a mandatory node-doubling convergence check. The angular
/// integrand is a smooth periodic function whose sharpest features are the
/// near-zero valleys of the outcome density, so the trapezoidal rule
/// converges exponentially once those valleys are resolved; a cartesian
/// tensor grid only reaches algebraic order there.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub radius: f64,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl QuadratureGrid {
    /// Default grid: R = sqrt(2 nmax) + 4 covers the classically allowed
    /// region plus Gaussian tails; roughly ten radial nodes per unit length
    /// handle the radial oscillations of the density, and 256 angles resolve
    /// density valleys down to widths of order 0.05 rad (valley width scales
    /// as the dephasing amplitude, so weakly dephased states are the
    /// demanding case).
    pub fn default_for(cutoff: crate::fock::FockCutoff) -> Self {
        let radius = (2.0 * cutoff.nmax() as f64).sqrt() + 4.0;
        let radial_nodes = ((10.0 * radius).ceil() as usize + 1) & !1usize;
        Self {
            radius,
            radial_nodes,
            angular_nodes: 256,
        }
    }

    /// Total number of integration points.
    pub fn points(&self) -> usize {
        self.radial_nodes * self.angular_nodes
    }
}

#[derive(Clone, Debug)]
pub struct ContinuousFi {
    pub f: Matrix2<f64>,
    /// Node count of the converged evaluation (double the requested grid).
    pub nodes_used: usize,
}

/// FI of a continuous-outcome (x, p) measurement by quadrature; fails with
/// both estimates when doubling the node count moves the entries by more
/// than 1e-5 relative to the matrix scale.
pub fn classical_fi_continuous(
    ds: &DifferentiatedState,
    meas: &DoubleHomodyne,
    grid: &QuadratureGrid,
) -> Result<ContinuousFi> {
    if meas.cutoff().pair_dim() != ds.dim() {
        return Err(Error::InvalidParameter(
            "measurement cutoff does not match state dimension".into(),
        ));
    }
    let coarse = fi_by_quadrature(ds, meas, grid.radius, grid.radial_nodes, grid.angular_nodes);
    let fine = fi_by_quadrature(
        ds,
        meas,
        grid.radius,
        2 * grid.radial_nodes,
        2 * grid.angular_nodes,
    );
    let scale = fine.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-12);
    let change = (fine - coarse)
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        / scale;
    if change >= 1e-5 {
        return Err(Error::QuadratureNotConverged {
            n: grid.points(),
            n2: 4 * grid.points(),
            coarse: [coarse[(0, 0)], coarse[(0, 1)], coarse[(1, 0)], coarse[(1, 1)]],
            fine: [fine[(0, 0)], fine[(0, 1)], fine[(1, 0)], fine[(1, 1)]],
            change,
        });
    }
    Ok(ContinuousFi {
        f: fine,
        nodes_used: 4 * grid.points(),
    })
}

fn fi_by_quadrature(
    ds: &DifferentiatedState,
    meas: &DoubleHomodyne,
    radius: f64,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Matrix2<f64> {
    let (t, w) = gauss_legendre(radial_nodes);
    let dbeta = 2.0 * std::f64::consts::PI / angular_nodes as f64;
    let mut points = Vec::with_capacity(radial_nodes * angular_nodes);
    let mut weights = Vec::with_capacity(radial_nodes * angular_nodes);
    for i in 0..radial_nodes {
        let r = radius * (t[i] + 1.0) / 2.0;
        // Area element r dr dbeta.
        let wr = radius / 2.0 * w[i] * r * dbeta;
        for j in 0..angular_nodes {
            let beta = dbeta * j as f64;
            points.push((r * beta.cos(), r * beta.sin()));
            weights.push(wr);
        }
    }
    let p = meas.density_points(ds.rho(), &points);
    let d1 = meas.density_points(ds.d_phi(), &points);
    let d2 = meas.density_points(ds.d_delta(), &points);
    let mut f = Matrix2::zeros();
    for k in 0..points.len() {
        if p[k] <= 1e-18 {
            continue;
        }
        let d = [d1[k], d2[k]];
        for a in 0..2 {
            for b in 0..2 {
                f[(a, b)] += weights[k] * d[a] * d[b] / p[k];
            }
        }
    }
    f
}

/// Trade-off scalars of a (F, H) pair. The variance proxies are the
/// off-diagonal-penalized normalized precisions 1/((F^-1)_ii H_ii); they
/// never exceed the plain ratios F_ii / H_ii.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub ratio_phi: f64,
    pub ratio_delta: f64,
    pub sum: f64,
    pub var_phi_norm: f64,
    pub var_delta_norm: f64,
    pub offdiag: f64,
    /// Set when F is singular: any single-qubit two-output projective
    /// measurement lands here; the variance proxies are reported as zero.
    pub singular_fi: bool,
    /// Set when the ratio sum exceeds the separable-measurement bound
    /// ratio_phi + ratio_delta <= 1 (only collective measurements or probes
    /// beyond the qubit model may do so legitimately).
    pub exceeds_separable_bound: bool,
    pub probes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<TradeoffProvenance>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TradeoffProvenance {
    pub state: String,
    pub measurement: String,
    pub phi: f64,
    pub delta: f64,
}

pub fn tradeoff_report(f: &Matrix2<f64>, h: &Matrix2<f64>, probes: usize) -> Result<TradeoffReport> {
    if h[(0, 0)] <= 0.0 || h[(1, 1)] <= 0.0 {
        return Err(Error::InvalidParameter(
            "QFI diagonal must be positive for trade-off ratios".into(),
        ));
    }
    let ratio_phi = f[(0, 0)] / h[(0, 0)];
    let ratio_delta = f[(1, 1)] / h[(1, 1)];
    let det = f[(0, 0)] * f[(1, 1)] - f[(0, 1)] * f[(1, 0)];
    let scale = (f[(0, 0)] + f[(1, 1)]) / 2.0;
    let singular_fi = det <= 1e-12 * scale * scale;
    let (var_phi_norm, var_delta_norm) = if singular_fi {
        (0.0, 0.0)
    } else {
        // (F^-1)_11 = F_22 / det, (F^-1)_22 = F_11 / det.
        (
            det / (f[(1, 1)] * h[(0, 0)]),
            det / (f[(0, 0)] * h[(1, 1)]),
        )
    };
    let sum = ratio_phi + ratio_delta;
    Ok(TradeoffReport {
        ratio_phi,
        ratio_delta,
        sum,
        var_phi_norm,
        var_delta_norm,
        offdiag: f[(0, 1)],
        singular_fi,
        exceeds_separable_bound: sum > 1.0 + 1e-9,
        probes,
        provenance: None,
    })
}

impl TradeoffReport {
    pub fn with_provenance(mut self, provenance: TradeoffProvenance) -> Self {
        self.provenance = Some(provenance);
        self
    }
}

/// Diffusion amplitude at which the Bell-measurement advantage vanishes:
/// e^{-Delta0^2} = sqrt(2 / (1 + sqrt(5))), i.e.
/// Delta0 = sqrt(ln((1 + sqrt(5)) / 2) / 2).
pub fn bell_crossover_delta() -> f64 {
    (0.5 * ((1.0 + 5.0f64.sqrt()) / 2.0).ln()).sqrt()
}
