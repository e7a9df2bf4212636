//! Parameter-encoding dynamics: phase shift, phase diffusion, photon loss,
//! and analytic state derivatives with respect to the phase and the
//! diffusion amplitude.
//!
//! Conventions: the phase shift acts as exp(-i phi a^dag a), so the
//! (|n,0>, |0,n>) coherence acquires e^{-i n phi}, matching the
//! qubit-probe closed form. Phase diffusion multiplies the (n_a, m_a)
//! coherence by e^{-Delta^2 (n_a - m_a)^2}. Loss is a per-mode
//! amplitude-damping Kraus map with efficiency eta.

use crate::fock::{sanitize_density, FockCutoff, QubitProbe, TwoModeState};
use crate::linalg;
use crate::{C64, CMatrix, Error, Result};
use serde::{Deserialize, Serialize};

/// Channel parameters: phase, diffusion amplitude and per-mode efficiencies.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChannelParams {
    pub phi: f64,
    pub delta: f64,
    pub eta_a: f64,
    pub eta_b: f64,
}

impl ChannelParams {
    pub fn new(phi: f64, delta: f64, eta_a: f64, eta_b: f64) -> Result<Self> {
        if delta < 0.0 {
            return Err(Error::InvalidParameter("delta must be >= 0".into()));
        }
        for (name, eta) in [("eta_a", eta_a), ("eta_b", eta_b)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1], got {eta}"
                )));
            }
        }
        Ok(Self {
            phi,
            delta,
            eta_a,
            eta_b,
        })
    }

    pub fn lossless(phi: f64, delta: f64) -> Result<Self> {
        Self::new(phi, delta, 1.0, 1.0)
    }

    /// Same efficiency in both arms.
    pub fn with_symmetric_loss(phi: f64, delta: f64, eta: f64) -> Result<Self> {
        Self::new(phi, delta, eta, eta)
    }
}

/// A density matrix together with its derivatives with respect to phi and
/// delta. The derivatives are Hermitian and traceless.
#[derive(Clone, Debug)]
pub struct DifferentiatedState {
    rho: CMatrix,
    d_phi: CMatrix,
    d_delta: CMatrix,
    label: String,
}

impl DifferentiatedState {
    pub fn new(
        rho: CMatrix,
        d_phi: CMatrix,
        d_delta: CMatrix,
        label: impl Into<String>,
    ) -> Result<Self> {
        let dim = rho.nrows();
        for (name, m) in [("rho", &rho), ("d_phi", &d_phi), ("d_delta", &d_delta)] {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidState(format!("{name} shape mismatch")));
            }
            let herm = linalg::hermiticity_defect(m);
            if herm > 1e-12 {
                return Err(Error::InvalidState(format!(
                    "{name} Hermiticity defect {herm:.3e}"
                )));
            }
        }
        for (name, m) in [("d_phi", &d_phi), ("d_delta", &d_delta)] {
            let tr = linalg::trace(m).norm();
            if tr > 1e-12 {
                return Err(Error::InvalidState(format!("{name} trace {tr:.3e} != 0")));
            }
        }
        Ok(Self {
            rho,
            d_phi,
            d_delta,
            label: label.into(),
        })
    }

    /// A state with no parameter dependence (both derivatives zero); used as
    /// an ancilla factor in tensor products.
    pub fn constant(rho: CMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = rho.nrows();
        Self::new(
            rho,
            CMatrix::zeros(dim, dim),
            CMatrix::zeros(dim, dim),
            label,
        )
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn d_phi(&self) -> &CMatrix {
        &self.d_phi
    }

    pub fn d_delta(&self) -> &CMatrix {
        &self.d_delta
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Tensor product with the product rule on derivatives.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let rho = self.rho.kronecker(&other.rho);
        let d_phi = self.d_phi.kronecker(&other.rho) + self.rho.kronecker(&other.d_phi);
        let d_delta = self.d_delta.kronecker(&other.rho) + self.rho.kronecker(&other.d_delta);
        Self::new(
            rho,
            d_phi,
            d_delta,
            format!("{} (x) {}", self.label, other.label),
        )
    }

    /// Two identical probes evolved through the same channel.
    pub fn pair(&self) -> Result<Self> {
        self.tensor(self)
    }

    /// Restriction of the state and its derivatives to the subspace spanned
    /// by the listed basis indices.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        let k = indices.len();
        let pick = |m: &CMatrix| CMatrix::from_fn(k, k, |i, j| m[(indices[i], indices[j])]);
        Self::new(
            pick(&self.rho),
            pick(&self.d_phi),
            pick(&self.d_delta),
            format!("{} | restricted", self.label),
        )
    }
}

/// Phase shift: coherence (n_a, m_a) multiplied by e^{-i phi (n_a - m_a)}.
pub fn phase_shift(state: &TwoModeState, phi: f64) -> Result<TwoModeState> {
    let cutoff = state.cutoff();
    let mut m = state.matrix().clone();
    apply_coherence_factor(cutoff, &mut m, |k| C64::from_polar(1.0, -phi * k as f64));
    sanitize_density(&mut m)?;
    TwoModeState::new(cutoff, m, state.label())
}

/// Phase diffusion: coherence (n_a, m_a) multiplied by e^{-Delta^2 (n_a-m_a)^2}.
pub fn phase_diffuse(state: &TwoModeState, delta: f64) -> Result<TwoModeState> {
    if delta < 0.0 {
        return Err(Error::InvalidParameter("delta must be >= 0".into()));
    }
    let cutoff = state.cutoff();
    let mut m = state.matrix().clone();
    let d2 = delta * delta;
    apply_coherence_factor(cutoff, &mut m, |k| {
        C64::new((-d2 * (k * k) as f64).exp(), 0.0)
    });
    sanitize_density(&mut m)?;
    TwoModeState::new(cutoff, m, state.label())
}

/// Per-mode photon loss with efficiencies eta_a and eta_b.
pub fn loss(state: &TwoModeState, eta_a: f64, eta_b: f64) -> Result<TwoModeState> {
    for eta in [eta_a, eta_b] {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "efficiency must lie in (0, 1], got {eta}"
            )));
        }
    }
    let cutoff = state.cutoff();
    let mut m = loss_map(cutoff, state.matrix(), eta_a, eta_b);
    sanitize_density(&mut m)?;
    TwoModeState::new(cutoff, m, state.label())
}

/// Full encoding rho -> loss(diffuse(shift(rho))) with analytic derivatives.
/// The derivatives are taken on the dephased-shifted state and pushed through
/// the (linear) loss map.
pub fn encode_with_derivatives(
    state: &TwoModeState,
    params: &ChannelParams,
) -> Result<DifferentiatedState> {
    let cutoff = state.cutoff();
    let shifted = phase_shift(state, params.phi)?;
    let sigma = phase_diffuse(&shifted, params.delta)?;

    let dim = cutoff.pair_dim();
    let mut d_phi = CMatrix::zeros(dim, dim);
    let mut d_delta = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let (na, _) = cutoff.unindex(i);
        for j in 0..dim {
            let (ma, _) = cutoff.unindex(j);
            let k = na as f64 - ma as f64;
            let v = sigma.matrix()[(i, j)];
            d_phi[(i, j)] = C64::new(0.0, -k) * v;
            d_delta[(i, j)] = C64::new(-2.0 * params.delta * k * k, 0.0) * v;
        }
    }

    let lossy = |m: &CMatrix| loss_map(cutoff, m, params.eta_a, params.eta_b);
    let mut rho = lossy(sigma.matrix());
    sanitize_density(&mut rho)?;
    DifferentiatedState::new(rho, lossy(&d_phi), lossy(&d_delta), state.label())
}

/// Analytic derivatives of the effective qubit probe in the
/// {|n,0>, |0,n>} basis.
pub fn qubit_with_derivatives(probe: &QubitProbe) -> Result<DifferentiatedState> {
    let rho = probe.density();
    let mut d_phi = CMatrix::zeros(2, 2);
    let mut d_delta = CMatrix::zeros(2, 2);
    // Off-diagonal c s e^{-i phi - Delta^2}: d/dphi = -i (entry),
    // d/dDelta = -2 Delta (entry).
    d_phi[(0, 1)] = C64::new(0.0, -1.0) * rho[(0, 1)];
    d_phi[(1, 0)] = d_phi[(0, 1)].conj();
    d_delta[(0, 1)] = C64::new(-2.0 * probe.delta, 0.0) * rho[(0, 1)];
    d_delta[(1, 0)] = d_delta[(0, 1)].conj();
    DifferentiatedState::new(
        rho,
        d_phi,
        d_delta,
        format!(
            "qubit(theta={:.4}, phi={:.4}, delta={:.4})",
            probe.theta, probe.phi, probe.delta
        ),
    )
}

fn apply_coherence_factor<F: Fn(i64) -> C64>(cutoff: FockCutoff, m: &mut CMatrix, factor: F) {
    let dim = cutoff.pair_dim();
    for i in 0..dim {
        let (na, _) = cutoff.unindex(i);
        for j in 0..dim {
            let (ma, _) = cutoff.unindex(j);
            let k = na as i64 - ma as i64;
            if k != 0 {
                m[(i, j)] *= factor(k);
            }
        }
    }
}

/// Linear loss map: per-mode Kraus operators
/// K_l = sum_n sqrt(C(n,l) eta^{n-l} (1-eta)^l) |n-l><n|.
fn loss_map(cutoff: FockCutoff, m: &CMatrix, eta_a: f64, eta_b: f64) -> CMatrix {
    let mode_dim = cutoff.mode_dim();
    let id = CMatrix::identity(mode_dim, mode_dim);
    let mut out = m.clone();
    for (eta, on_mode_a) in [(eta_a, true), (eta_b, false)] {
        if eta == 1.0 {
            continue;
        }
        let kraus = single_mode_loss_kraus(mode_dim, eta);
        let mut acc = CMatrix::zeros(out.nrows(), out.ncols());
        for k in &kraus {
            let lifted = if on_mode_a {
                k.kronecker(&id)
            } else {
                id.kronecker(k)
            };
            acc += &lifted * &out * lifted.adjoint();
        }
        out = acc;
    }
    out
}

fn single_mode_loss_kraus(mode_dim: usize, eta: f64) -> Vec<CMatrix> {
    let binom = |n: usize, l: usize| -> f64 {
        let mut v = 1.0;
        for i in 0..l {
            v *= (n - i) as f64 / (l - i) as f64;
        }
        v
    };
    (0..mode_dim)
        .map(|l| {
            let mut k = CMatrix::zeros(mode_dim, mode_dim);
            for n in l..mode_dim {
                let w = binom(n, l) * eta.powi((n - l) as i32) * (1.0 - eta).powi(l as i32);
                k[(n - l, n)] = C64::new(w.sqrt(), 0.0);
            }
            k
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_holland_burnett, make_noon, FockCutoff};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cutoff(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn phase_shift_identity_cases() {
        let s = make_noon(2, cutoff(3)).unwrap();
        let zero = phase_shift(&s, 0.0).unwrap();
        assert!(linalg::max_abs(&(zero.matrix() - s.matrix())) < 1e-15);
        let full = phase_shift(&s, std::f64::consts::TAU).unwrap();
        assert!(linalg::max_abs(&(full.matrix() - s.matrix())) < 1e-12);
    }

    #[test]
    fn phase_shift_matches_qubit_convention() {
        let c = cutoff(1);
        let probe0 = QubitProbe::equatorial(0.0, 0.2).unwrap();
        let s0 = crate::fock::embed_qubit(&probe0, 1, c).unwrap();
        let shifted = phase_shift(&s0, 0.8).unwrap();
        let probe1 = QubitProbe::equatorial(0.8, 0.2).unwrap();
        let s1 = crate::fock::embed_qubit(&probe1, 1, c).unwrap();
        assert!(linalg::max_abs(&(shifted.matrix() - s1.matrix())) < 1e-14);
    }

    #[test]
    fn diffusion_identity_and_single_coherence() {
        let s = make_noon(1, cutoff(1)).unwrap();
        let same = phase_diffuse(&s, 0.0).unwrap();
        assert!(linalg::max_abs(&(same.matrix() - s.matrix())) < 1e-15);
        let d = phase_diffuse(&s, 0.25).unwrap();
        // n - m = 1 coherence: factor e^{-0.0625}.
        let expected = 0.5 * (-0.0625f64).exp();
        assert_abs_diff_eq!(d.element(1, 0, 0, 1).re, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected / 0.5, 0.93941, epsilon = 1e-5);
    }

    #[test]
    fn noon_diffusion_equals_qubit_with_scaled_amplitude() {
        for n in [2usize, 3] {
            let s = make_noon(n, cutoff(3)).unwrap();
            let d = phase_diffuse(&s, 0.25).unwrap();
            let coherence = d.element(n, 0, 0, n).re;
            let scaled = 0.5 * (-(0.25 * n as f64).powi(2)).exp();
            assert_abs_diff_eq!(coherence, scaled, epsilon = 1e-14);
        }
    }

    #[test]
    fn shift_and_diffuse_commute() {
        let s = make_holland_burnett(2, cutoff(4)).unwrap();
        let a = phase_diffuse(&phase_shift(&s, 0.7).unwrap(), 0.3).unwrap();
        let b = phase_shift(&phase_diffuse(&s, 0.3).unwrap(), 0.7).unwrap();
        assert!(linalg::max_abs(&(a.matrix() - b.matrix())) < 1e-15);
    }

    #[test]
    fn diffusion_semigroup_composition() {
        let s = make_holland_burnett(2, cutoff(4)).unwrap();
        let twice = phase_diffuse(&phase_diffuse(&s, 0.2).unwrap(), 0.3).unwrap();
        let once = phase_diffuse(&s, (0.04f64 + 0.09).sqrt()).unwrap();
        assert!(linalg::max_abs(&(twice.matrix() - once.matrix())) < 1e-12);
    }

    /// Monte-Carlo cross-check of the dephasing formula against the
    /// random-phase-kick definition of the channel.
    #[test]
    fn diffusion_matches_gaussian_unitary_mixture() {
        let c = cutoff(2);
        let s = make_noon(2, c).unwrap();
        let delta = 0.4;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // The dephasing factor e^{-delta^2 k^2} is the characteristic
        // function of kicks with variance 2 delta^2.
        let normal = rand_distr::Normal::new(0.0, std::f64::consts::SQRT_2 * delta).unwrap();
        let dim = c.pair_dim();
        let mut acc = CMatrix::zeros(dim, dim);
        let draws = 2000;
        for _ in 0..draws {
            let xi: f64 = normal.sample(&mut rng);
            let mut kicked = s.matrix().clone();
            apply_coherence_factor(c, &mut kicked, |k| C64::from_polar(1.0, -xi * k as f64));
            acc += kicked;
        }
        acc /= C64::new(draws as f64, 0.0);
        let exact = phase_diffuse(&s, delta).unwrap();
        assert!(linalg::max_abs(&(&acc - exact.matrix())) < 2e-2);
    }

    #[test]
    fn loss_identity_at_unit_efficiency() {
        let s = make_noon(2, cutoff(3)).unwrap();
        let out = loss(&s, 1.0, 1.0).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - s.matrix())) < 1e-15);
    }

    #[test]
    fn loss_single_photon_binomial() {
        let s = make_noon(1, cutoff(1)).unwrap();
        let c = s.cutoff();
        let dim = c.pair_dim();
        let mut m = CMatrix::zeros(dim, dim);
        m[(c.index(1, 0), c.index(1, 0))] = C64::new(1.0, 0.0);
        let one = TwoModeState::new(c, m, "|1,0>").unwrap();
        let out = loss(&one, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(out.element(1, 0, 1, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.element(0, 0, 0, 0).re, 0.5, epsilon = 1e-12);
    }

    /// Oracle: the N00N(N) coherence decays exactly as eta^N under symmetric
    /// per-mode loss.
    #[test]
    fn noon_coherence_scales_as_eta_to_n() {
        let s = make_noon(6, cutoff(6)).unwrap();
        let eta = 0.95;
        let out = loss(&s, eta, eta).unwrap();
        let expected = 0.5 * eta.powi(6);
        assert_abs_diff_eq!(out.element(6, 0, 0, 6).re, expected, epsilon = 1e-12);
    }

    #[test]
    fn loss_preserves_trace_and_positivity_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = cutoff(3);
        let dim = c.pair_dim();
        for _ in 0..20 {
            // Random density matrix: G G^dag / tr.
            let g = CMatrix::from_fn(dim, dim, |_, _| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let mut rho = &g * g.adjoint();
            let tr = linalg::trace(&rho);
            rho /= tr;
            let s = TwoModeState::new(c, rho, "random").unwrap();
            let out = loss(&s, 0.7, 0.85).unwrap();
            assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-12);
            assert!(linalg::min_eigenvalue(out.matrix()) >= -1e-10);
        }
    }

    #[test]
    fn derivatives_vanish_for_delta_at_zero() {
        let s = make_noon(2, cutoff(2)).unwrap();
        let params = ChannelParams::lossless(0.4, 0.0).unwrap();
        let ds = encode_with_derivatives(&s, &params).unwrap();
        assert!(linalg::max_abs(ds.d_delta()) == 0.0);
    }

    #[test]
    fn qubit_derivative_offdiagonal_form() {
        let probe = QubitProbe::equatorial(0.3, 0.25).unwrap();
        let ds = qubit_with_derivatives(&probe).unwrap();
        let expected = C64::new(0.0, -1.0) * ds.rho()[(0, 1)];
        assert!((ds.d_phi()[(0, 1)] - expected).norm() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences_on_hb3() {
        let s = make_holland_burnett(3, cutoff(6)).unwrap();
        let (phi, delta) = (0.6, 0.1);
        let params = ChannelParams::lossless(phi, delta).unwrap();
        let ds = encode_with_derivatives(&s, &params).unwrap();
        let h = 1e-5;
        let at = |p: f64, d: f64| {
            encode_with_derivatives(&s, &ChannelParams::lossless(p, d).unwrap())
                .unwrap()
                .rho()
                .clone()
        };
        let fd_phi = (at(phi + h, delta) - at(phi - h, delta)) / C64::new(2.0 * h, 0.0);
        let fd_delta = (at(phi, delta + h) - at(phi, delta - h)) / C64::new(2.0 * h, 0.0);
        assert!(linalg::max_abs(&(ds.d_phi() - fd_phi)) < 1e-7);
        assert!(linalg::max_abs(&(ds.d_delta() - fd_delta)) < 1e-7);
    }

    #[test]
    fn derivatives_match_finite_differences_with_loss() {
        let s = make_noon(2, cutoff(2)).unwrap();
        let (phi, delta) = (0.9, 0.2);
        let params = ChannelParams::new(phi, delta, 0.8, 0.9).unwrap();
        let ds = encode_with_derivatives(&s, &params).unwrap();
        let h = 1e-5;
        let at = |p: f64, d: f64| {
            encode_with_derivatives(&s, &ChannelParams::new(p, d, 0.8, 0.9).unwrap())
                .unwrap()
                .rho()
                .clone()
        };
        let fd_phi = (at(phi + h, delta) - at(phi - h, delta)) / C64::new(2.0 * h, 0.0);
        let fd_delta = (at(phi, delta + h) - at(phi, delta - h)) / C64::new(2.0 * h, 0.0);
        assert!(linalg::max_abs(&(ds.d_phi() - fd_phi)) < 1e-7);
        assert!(linalg::max_abs(&(ds.d_delta() - fd_delta)) < 1e-7);
    }

    #[test]
    fn derivatives_are_hermitian_and_traceless() {
        let s = make_holland_burnett(2, cutoff(4)).unwrap();
        let params = ChannelParams::new(0.3, 0.35, 0.9, 0.9).unwrap();
        let ds = encode_with_derivatives(&s, &params).unwrap();
        for m in [ds.d_phi(), ds.d_delta()] {
            assert!(linalg::hermiticity_defect(m) < 1e-12);
            assert!(linalg::trace(m).norm() < 1e-12);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn encoded_state_stays_physical(
            phi in 0.0..3.0f64,
            delta in 0.0..1.0f64,
            eta_a in 0.05..1.0f64,
            eta_b in 0.05..1.0f64,
        ) {
            let s = make_holland_burnett(2, cutoff(4)).unwrap();
            let params = ChannelParams::new(phi, delta, eta_a, eta_b).unwrap();
            let ds = encode_with_derivatives(&s, &params).unwrap();
            let rho = ds.rho();
            proptest::prop_assert!((linalg::trace(rho).re - 1.0).abs() < 1e-12);
            proptest::prop_assert!(linalg::hermiticity_defect(rho) < 1e-12);
            proptest::prop_assert!(linalg::min_eigenvalue(rho) > -1e-10);
            for m in [ds.d_phi(), ds.d_delta()] {
                proptest::prop_assert!(linalg::hermiticity_defect(m) < 1e-12);
                proptest::prop_assert!(linalg::trace(m).norm() < 1e-12);
            }
        }
    }
}
