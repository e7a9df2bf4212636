//! Truncated two-mode Fock space: probe states and linear optics.
//!
//! States live on the grid |n_a, n_b> with 0 <= n_a, n_b <= nmax, indexed
//! row-major (n_a major). All constructors return density matrices that pass
//! the Hermiticity / trace / positivity invariants.

use crate::linalg;
use crate::{C64, CMatrix, Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = -1e-10;

/// Largest photon number retained per mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockCutoff {
    nmax: usize,
}

impl FockCutoff {
    pub fn new(nmax: usize) -> Result<Self> {
        if nmax < 1 {
            return Err(Error::InvalidParameter("cutoff nmax must be >= 1".into()));
        }
        Ok(Self { nmax })
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// Single-mode dimension, nmax + 1.
    pub fn mode_dim(&self) -> usize {
        self.nmax + 1
    }

    /// Two-mode dimension, (nmax + 1)^2.
    pub fn pair_dim(&self) -> usize {
        self.mode_dim() * self.mode_dim()
    }

    /// Row-major pair index of |n_a, n_b>.
    pub fn index(&self, na: usize, nb: usize) -> usize {
        debug_assert!(na <= self.nmax && nb <= self.nmax);
        na * self.mode_dim() + nb
    }

    /// Inverse of [`FockCutoff::index`].
    pub fn unindex(&self, i: usize) -> (usize, usize) {
        (i / self.mode_dim(), i % self.mode_dim())
    }
}

/// Density operator of a two-mode bosonic state on the truncated Fock grid.
#[derive(Clone, Debug)]
pub struct TwoModeState {
    cutoff: FockCutoff,
    matrix: CMatrix,
    label: String,
}

impl TwoModeState {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity
    /// (smallest eigenvalue >= -1e-10).
    pub fn new(cutoff: FockCutoff, matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = cutoff.pair_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "matrix side {} does not match pair dimension {}",
                matrix.nrows(),
                dim
            )));
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {tr} deviates from 1 beyond {TRACE_TOL:.0e}"
            )));
        }
        let min_eig = linalg::min_eigenvalue(&matrix);
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min_eig:.3e} below {POSITIVITY_TOL:.0e}"
            )));
        }
        Ok(Self {
            cutoff,
            matrix,
            label: label.into(),
        })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn element(&self, na: usize, nb: usize, ma: usize, mb: usize) -> C64 {
        self.matrix[(self.cutoff.index(na, nb), self.cutoff.index(ma, mb))]
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).diagonal().iter().sum::<C64>().re
    }

    /// Expectation of the total photon number n_a + n_b.
    pub fn total_photon_expectation(&self) -> f64 {
        self.matrix
            .diagonal()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (na, nb) = self.cutoff.unindex(i);
                (na + nb) as f64 * p.re
            })
            .sum()
    }

    /// Projection of the density matrix onto the subspace spanned by the
    /// listed Fock pairs, in the given order.
    pub fn block(&self, pairs: &[(usize, usize)]) -> CMatrix {
        let k = pairs.len();
        CMatrix::from_fn(k, k, |i, j| {
            let (na, nb) = pairs[i];
            let (ma, mb) = pairs[j];
            self.element(na, nb, ma, mb)
        })
    }

    /// Fock pairs carrying diagonal weight above `tol`.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize)> {
        self.matrix
            .diagonal()
            .iter()
            .enumerate()
            .filter(|(_, p)| p.re > tol)
            .map(|(i, _)| self.cutoff.unindex(i))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = StateDocument {
            schema: STATE_SCHEMA.into(),
            cutoff: self.cutoff,
            label: self.label.clone(),
            basis: BASIS_TAG.into(),
            matrix: self
                .matrix
                .row_iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StateDocument = serde_json::from_str(text)?;
        if doc.basis != BASIS_TAG {
            return Err(Error::InvalidState(format!(
                "unknown basis ordering tag {:?}",
                doc.basis
            )));
        }
        let dim = doc.cutoff.pair_dim();
        if doc.matrix.len() != dim || doc.matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidState("matrix shape mismatch".into()));
        }
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            let [re, im] = doc.matrix[i][j];
            C64::new(re, im)
        });
        Self::new(doc.cutoff, matrix, doc.label)
    }
}

const STATE_SCHEMA: &str = "two-mode-state/1";
const BASIS_TAG: &str = "row-major-na-major";

#[derive(Serialize, Deserialize)]
struct StateDocument {
    schema: String,
    cutoff: FockCutoff,
    label: String,
    basis: String,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Effective two-dimensional probe on the {|n,0>, |0,n>} block, parametrized
/// by the polar angle theta, the phase phi and the diffusion amplitude delta.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QubitProbe {
    pub theta: f64,
    pub phi: f64,
    pub delta: f64,
}

impl QubitProbe {
    pub fn new(theta: f64, phi: f64, delta: f64) -> Result<Self> {
        if delta < 0.0 {
            return Err(Error::InvalidParameter("delta must be >= 0".into()));
        }
        Ok(Self { theta, phi, delta })
    }

    /// Equatorial probe (theta = pi/2), the one with maximal QFI.
    pub fn equatorial(phi: f64, delta: f64) -> Result<Self> {
        Self::new(std::f64::consts::FRAC_PI_2, phi, delta)
    }

    /// The realized 2x2 density matrix in the {|n,0>, |0,n>} basis:
    /// diagonal (cos^2(t/2), sin^2(t/2)), off-diagonal
    /// cos(t/2) sin(t/2) e^{-i phi - delta^2}.
    pub fn density(&self) -> CMatrix {
        let c = (self.theta / 2.0).cos();
        let s = (self.theta / 2.0).sin();
        let coh = c * s * (-self.delta * self.delta).exp();
        let off = C64::from_polar(coh, -self.phi);
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c * c, 0.0), off, off.conj(), C64::new(s * s, 0.0)],
        )
    }
}

/// Truncated single-mode ladder operators.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    cutoff: FockCutoff,
    matrix: CMatrix,
}

impl ModeOperator {
    /// Annihilation operator: a|n> = sqrt(n)|n-1> on the truncated grid.
    pub fn annihilation(cutoff: FockCutoff) -> Self {
        let d = cutoff.mode_dim();
        let mut m = CMatrix::zeros(d, d);
        for n in 1..d {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self { cutoff, matrix: m }
    }

    pub fn creation(cutoff: FockCutoff) -> Self {
        let a = Self::annihilation(cutoff);
        Self {
            cutoff,
            matrix: a.matrix.adjoint(),
        }
    }

    pub fn number(cutoff: FockCutoff) -> Self {
        let d = cutoff.mode_dim();
        let m = CMatrix::from_diagonal(&DVector::from_iterator(
            d,
            (0..d).map(|n| C64::new(n as f64, 0.0)),
        ));
        Self { cutoff, matrix: m }
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// N00N state (|n,0> + |0,n>)/sqrt(2) as a density matrix.
pub fn make_noon(n: usize, cutoff: FockCutoff) -> Result<TwoModeState> {
    if n < 1 {
        return Err(Error::InvalidParameter("N00N order must be >= 1".into()));
    }
    if n > cutoff.nmax() {
        return Err(Error::CutoffTooSmall {
            required: n,
            got: cutoff.nmax(),
        });
    }
    let dim = cutoff.pair_dim();
    let mut psi = DVector::<C64>::zeros(dim);
    psi[cutoff.index(n, 0)] = C64::new(FRAC_1_SQRT_2, 0.0);
    psi[cutoff.index(0, n)] = C64::new(FRAC_1_SQRT_2, 0.0);
    let rho = &psi * psi.adjoint();
    TwoModeState::new(cutoff, rho, format!("noon({n})"))
}

/// Split single photon, identical to `make_noon(1, cutoff)`.
pub fn make_split_photon(cutoff: FockCutoff) -> Result<TwoModeState> {
    Ok(make_noon(1, cutoff)?.with_label("split-photon"))
}

/// Holland-Burnett state: |n,n> interfered on a balanced beam splitter.
/// Support lies on the even Fock pairs (k, 2n-k).
pub fn make_holland_burnett(n: usize, cutoff: FockCutoff) -> Result<TwoModeState> {
    if n < 1 {
        return Err(Error::InvalidParameter("HB order must be >= 1".into()));
    }
    if 2 * n > cutoff.nmax() {
        return Err(Error::CutoffTooSmall {
            required: 2 * n,
            got: cutoff.nmax(),
        });
    }
    let dim = cutoff.pair_dim();
    let mut psi = DVector::<C64>::zeros(dim);
    psi[cutoff.index(n, n)] = C64::new(1.0, 0.0);
    let u = beam_splitter_unitary(cutoff, 0.5, 0.0);
    let out = &u * psi;
    let rho = &out * out.adjoint();
    TwoModeState::new(cutoff, rho, format!("hb({n})"))
}

/// Beam-splitter unitary U = exp[i eta (a^dag b e^{i phase} + a b^dag e^{-i phase})]
/// with transmissivity cos^2(eta). Exactly unitary on the truncated grid.
pub fn beam_splitter_unitary(cutoff: FockCutoff, transmissivity: f64, phase: f64) -> CMatrix {
    let eta = transmissivity.sqrt().clamp(0.0, 1.0).acos();
    let a = ModeOperator::annihilation(cutoff);
    let adag = ModeOperator::creation(cutoff);
    let e_plus = C64::from_polar(1.0, phase);
    let h = adag.matrix().kronecker(a.matrix()) * e_plus
        + a.matrix().kronecker(adag.matrix()) * e_plus.conj();
    linalg::expi_hermitian(&h, eta)
}

/// Conjugation of a state by the beam-splitter unitary. Trace and spectrum
/// are preserved; photon number is conserved so the cutoff stays exact.
pub fn beam_splitter(state: &TwoModeState, transmissivity: f64, phase: f64) -> Result<TwoModeState> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::InvalidParameter(
            "transmissivity must lie in [0, 1]".into(),
        ));
    }
    let u = beam_splitter_unitary(state.cutoff(), transmissivity, phase);
    let mut m = &u * state.matrix() * u.adjoint();
    sanitize_density(&mut m)?;
    TwoModeState::new(state.cutoff(), m, state.label())
}

/// Places the qubit-probe 2x2 matrix on the {|n,0>, |0,n>} block.
pub fn embed_qubit(probe: &QubitProbe, n: usize, cutoff: FockCutoff) -> Result<TwoModeState> {
    if n > cutoff.nmax() {
        return Err(Error::CutoffTooSmall {
            required: n,
            got: cutoff.nmax(),
        });
    }
    let block = probe.density();
    let dim = cutoff.pair_dim();
    let idx = [cutoff.index(n, 0), cutoff.index(0, n)];
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..2 {
        for j in 0..2 {
            m[(idx[i], idx[j])] = block[(i, j)];
        }
    }
    TwoModeState::new(cutoff, m, format!("qubit-embedded(n={n})"))
}

/// Numerical path-symmetry check: the state is path-symmetric when mode swap
/// composed with some relative phase on mode a reproduces it within `tol`.
/// The relative phase is scanned on a grid and refined locally.
pub fn is_path_symmetric(state: &TwoModeState, tol: f64) -> bool {
    let cutoff = state.cutoff();
    let dim = cutoff.pair_dim();
    let swapped = CMatrix::from_fn(dim, dim, |i, j| {
        let (na, nb) = cutoff.unindex(i);
        let (ma, mb) = cutoff.unindex(j);
        state.element(nb, na, mb, ma)
    });
    let defect = |chi: f64| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..dim {
            let (na, _) = cutoff.unindex(i);
            for j in 0..dim {
                let (ma, _) = cutoff.unindex(j);
                let ph = C64::from_polar(1.0, chi * (na as f64 - ma as f64));
                let d = ph * swapped[(i, j)] - state.matrix()[(i, j)];
                worst = worst.max(d.norm());
            }
        }
        worst
    };
    let grid = 256;
    let step = std::f64::consts::TAU / grid as f64;
    let (mut best_chi, mut best) = (0.0, f64::INFINITY);
    for k in 0..grid {
        let chi = k as f64 * step;
        let d = defect(chi);
        if d < best {
            best = d;
            best_chi = chi;
        }
    }
    // Golden-section refinement around the best grid point.
    let (mut lo, mut hi) = (best_chi - step, best_chi + step);
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let m1 = hi - gr * (hi - lo);
        let m2 = lo + gr * (hi - lo);
        if defect(m1) < defect(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best = best.min(defect(0.5 * (lo + hi)));
    best < tol
}

/// Floating-point hygiene after channel compositions: symmetrize and rescale
/// when drift exceeds 1e-13, fail above 1e-8.
pub(crate) fn sanitize_density(m: &mut CMatrix) -> Result<()> {
    let herm = linalg::hermiticity_defect(m);
    let tr = linalg::trace(m);
    let tr_drift = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
    let drift = herm.max(tr_drift);
    if drift > 1e-8 {
        return Err(Error::NumericalDrift(format!(
            "Hermiticity/trace drift {drift:.3e} exceeds 1e-8"
        )));
    }
    if drift > 1e-13 {
        let sym = (m.clone() + m.adjoint()) / C64::new(2.0, 0.0);
        let tr = linalg::trace(&sym);
        *m = sym / tr;
    }
    Ok(())
}
