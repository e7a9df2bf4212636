//! Measurement models: general POVMs, the equatorial family, the tunable
//! four-outcome Sagnac POVM, Bell measurement on probe pairs, double
//! homodyne, and photon counting.

use crate::fock::{beam_splitter_unitary, FockCutoff, TwoModeState};
use crate::linalg;
use crate::quadrature::hermite_functions;
use crate::{C64, CMatrix, Error, Result};
use nalgebra::{DVector, Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

const PSD_TOL: f64 = -1e-10;
const COMPLETENESS_TOL: f64 = 1e-10;

/// Finite list of positive operators summing to identity.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<CMatrix>,
    labels: Vec<String>,
    provenance: String,
}

impl Povm {
    pub fn new(
        elements: Vec<CMatrix>,
        labels: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        if elements.len() != labels.len() {
            return Err(Error::InvalidPovm("label count mismatch".into()));
        }
        let dim = elements[0].nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (el, label) in elements.iter().zip(&labels) {
            if el.nrows() != dim || el.ncols() != dim {
                return Err(Error::InvalidPovm(format!("element {label} shape mismatch")));
            }
            let herm = linalg::hermiticity_defect(el);
            if herm > 1e-10 {
                return Err(Error::InvalidPovm(format!(
                    "element {label} not Hermitian (defect {herm:.3e})"
                )));
            }
            let min_eig = linalg::min_eigenvalue(el);
            if min_eig < PSD_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {label} not PSD (min eigenvalue {min_eig:.3e})"
                )));
            }
            sum += el;
        }
        let defect = linalg::max_abs(&(sum - CMatrix::identity(dim, dim)));
        if defect > COMPLETENESS_TOL {
            return Err(Error::PovmIncomplete { defect });
        }
        Ok(Self {
            elements,
            labels,
            provenance: provenance.into(),
        })
    }

    /// Rank-1 projectors onto the columns of a unitary.
    pub fn from_projective_unitary(u: &CMatrix, provenance: impl Into<String>) -> Result<Self> {
        let d = u.ncols();
        let elements = (0..d)
            .map(|j| {
                let col = u.column(j).clone_owned();
                &col * col.adjoint()
            })
            .collect();
        let labels = (0..d).map(|j| format!("proj{j}")).collect();
        Self::new(elements, labels, provenance)
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elements[i]
    }

    /// Re-runs the constructor checks (PSD, completeness).
    pub fn validate(&self) -> Result<()> {
        Self::new(self.elements.clone(), self.labels.clone(), self.provenance.clone())
            .map(|_| ())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Outcome probabilities for a density matrix.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|el| (rho * el).diagonal().iter().sum::<C64>().re)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = PovmDocument {
            schema: "povm/1".into(),
            dim: self.dim(),
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
            elements: self
                .elements
                .iter()
                .map(|el| {
                    el.row_iter()
                        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PovmDocument = serde_json::from_str(text)?;
        let elements = doc
            .elements
            .iter()
            .map(|rows| {
                CMatrix::from_fn(doc.dim, doc.dim, |i, j| {
                    let [re, im] = rows[i][j];
                    C64::new(re, im)
                })
            })
            .collect();
        Self::new(elements, doc.labels, doc.provenance)
    }

    /// Bloch-sphere export for two-dimensional POVMs: per element the
    /// normalized Bloch vector and the trace weight relative to the total.
    pub fn bloch_export(&self) -> Result<Vec<BlochVector>> {
        if self.dim() != 2 {
            return Err(Error::InvalidPovm(
                "Bloch export requires a 2-dimensional POVM".into(),
            ));
        }
        let total: f64 = self.elements.iter().map(|el| linalg::trace(el).re).sum();
        Ok(self
            .elements
            .iter()
            .zip(&self.labels)
            .map(|(el, label)| {
                let t = linalg::trace(el).re;
                let x = (el[(0, 1)] + el[(1, 0)]).re;
                let y = (C64::i() * (el[(0, 1)] - el[(1, 0)])).re;
                let z = (el[(0, 0)] - el[(1, 1)]).re;
                let norm = if t > 1e-14 { t } else { 1.0 };
                BlochVector {
                    label: label.clone(),
                    weight: t / total,
                    x: x / norm,
                    y: y / norm,
                    z: z / norm,
                }
            })
            .collect())
    }
}

#[derive(Serialize, Deserialize)]
struct PovmDocument {
    schema: String,
    dim: usize,
    labels: Vec<String>,
    provenance: String,
    elements: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlochVector {
    pub label: String,
    pub weight: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// One element of the equatorial POVM family: weight n_j in (0, 1] and
/// angle chi_j; realized as (n_j/2) [[1/2, e^{-i chi}/2], [e^{i chi}/2, 1/2]].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EquatorialElementSpec {
    pub weight: f64,
    pub angle: f64,
}

impl EquatorialElementSpec {
    pub fn matrix(&self) -> CMatrix {
        let n4 = self.weight / 4.0;
        let off = C64::from_polar(n4, -self.angle);
        CMatrix::from_row_slice(2, 2, &[C64::new(n4, 0.0), off, off.conj(), C64::new(n4, 0.0)])
    }
}

/// POVM with all elements in the equatorial plane of the Bloch sphere.
/// Completeness requires sum n_j = 4 and sum n_j e^{i chi_j} = 0.
pub fn equatorial_povm(specs: &[EquatorialElementSpec]) -> Result<Povm> {
    let weight_sum: f64 = specs.iter().map(|s| s.weight).sum();
    let vector_sum: C64 = specs
        .iter()
        .map(|s| C64::from_polar(s.weight, s.angle))
        .sum();
    let defect = ((weight_sum - 4.0) / 4.0).abs().max(vector_sum.norm() / 4.0);
    if defect > COMPLETENESS_TOL {
        return Err(Error::PovmIncomplete { defect });
    }
    let elements = specs.iter().map(|s| s.matrix()).collect();
    let labels = specs
        .iter()
        .enumerate()
        .map(|(j, s)| format!("chi{j}={:.4}", s.angle))
        .collect();
    Povm::new(elements, labels, "equatorial")
}

/// The symmetric four-element equatorial POVM centred on the phase phi:
/// unit weights, angles phi + {pi/4, 3pi/4, 5pi/4, 7pi/4}.
pub fn symmetric_equatorial_povm(phi: f64) -> Result<Povm> {
    let specs: Vec<EquatorialElementSpec> = [1.0, 3.0, 5.0, 7.0]
        .iter()
        .map(|m| EquatorialElementSpec {
            weight: 1.0,
            angle: phi + m * std::f64::consts::FRAC_PI_4,
        })
        .collect();
    equatorial_povm(&specs)
}

/// Tunable four-outcome measurement: weight k between the D/A pair and the
/// R/L pair, with interference visibilities v1 (outputs 1a, 1b) and v2
/// (outputs 2a, 2b).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SagnacPovmSpec {
    pub k: f64,
    pub v1: f64,
    pub v2: f64,
}

impl SagnacPovmSpec {
    pub fn new(k: f64, v1: f64, v2: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("v1", v1), ("v2", v2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(Self { k, v1, v2 })
    }

    pub fn ideal(k: f64) -> Result<Self> {
        Self::new(k, 1.0, 1.0)
    }
}

fn ket2(a: C64, b: C64) -> DVector<C64> {
    DVector::from_column_slice(&[a, b])
}

fn projector(v: &DVector<C64>) -> CMatrix {
    v * v.adjoint()
}

/// Four-outcome Sagnac POVM. A visibility v mixes a projector with its
/// orthogonal complement with weights (1 +- v)/2; at v = 1 the ideal
/// {k|D><D|, k|A><A|, (1-k)|R><R|, (1-k)|L><L|} set is recovered.
pub fn sagnac_povm(spec: &SagnacPovmSpec) -> Result<Povm> {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let d = projector(&ket2(r, r));
    let a = projector(&ket2(r, -r));
    let right = projector(&ket2(r, C64::i() * r));
    let left = projector(&ket2(r, -C64::i() * r));
    let mix = |p: &CMatrix, q: &CMatrix, v: f64| {
        p * C64::new((1.0 + v) / 2.0, 0.0) + q * C64::new((1.0 - v) / 2.0, 0.0)
    };
    let k = C64::new(spec.k, 0.0);
    let kc = C64::new(1.0 - spec.k, 0.0);
    let elements = vec![
        mix(&d, &a, spec.v1) * k,
        mix(&a, &d, spec.v1) * k,
        mix(&right, &left, spec.v2) * kc,
        mix(&left, &right, spec.v2) * kc,
    ];
    let labels = ["1a", "1b", "2a", "2b"].map(String::from).to_vec();
    Povm::new(
        elements,
        labels,
        format!("sagnac(k={}, v1={}, v2={})", spec.k, spec.v1, spec.v2),
    )
}

/// Bell measurement on the two-qubit pair space, basis ordered
/// {Phi+, Phi-, Psi+, Psi-} over probe1 (x) probe2.
pub fn bell_measurement() -> Povm {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    let kets = [
        DVector::from_column_slice(&[r, z, z, r]),
        DVector::from_column_slice(&[r, z, z, -r]),
        DVector::from_column_slice(&[z, r, r, z]),
        DVector::from_column_slice(&[z, r, -r, z]),
    ];
    let elements = kets.iter().map(projector).collect();
    let labels = ["Phi+", "Phi-", "Psi+", "Psi-"].map(String::from).to_vec();
    Povm::new(elements, labels, "bell").expect("Bell projectors form a valid POVM")
}

/// Closed-form per-probe trade-off coordinates of the Bell measurement on a
/// pair of equatorial probes, derived from the analytic outcome statistics:
/// x = e^{-2 Delta^2}, y = e^{-2 Delta^2} / (1 + e^{-2 Delta^2}).
/// Well defined at Delta = 0, where the sum reaches 3/2.
pub fn bell_tradeoff_coordinates(delta: f64) -> (f64, f64) {
    let q2 = (-2.0 * delta * delta).exp();
    (q2, q2 / (1.0 + q2))
}

/// Continuous-outcome double-homodyne measurement: a balanced beam splitter
/// followed by an X-quadrature measurement on mode a and a P-quadrature
/// measurement on mode b.
#[derive(Clone, Debug)]
pub struct DoubleHomodyne {
    cutoff: FockCutoff,
    unitary: CMatrix,
}

impl DoubleHomodyne {
    pub fn new(cutoff: FockCutoff) -> Self {
        // The pi/2 splitter phase makes the recombination map
        // a -> (a + b)/sqrt(2) in the Heisenberg picture, which aligns the
        // X/P quadrature pair with the interference fringe; other phases
        // leave quadrature information on the table.
        Self {
            cutoff,
            unitary: beam_splitter_unitary(cutoff, 0.5, std::f64::consts::FRAC_PI_2),
        }
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    /// Conjugation by the recombination beam splitter.
    pub fn transform(&self, m: &CMatrix) -> CMatrix {
        &self.unitary * m * self.unitary.adjoint()
    }

    /// Outcome density p(x, p) for a two-mode state.
    pub fn density(&self, state: &TwoModeState, x: f64, p: f64) -> f64 {
        let table = self.density_table(state.matrix(), &[x], &[p]);
        table[0][0]
    }

    /// Outcome densities on a grid, for an arbitrary operator in the input
    /// Fock basis (the recombination splitter is applied internally). Linear
    /// in the operator, so it applies to state derivatives as well.
    pub fn density_table(&self, m: &CMatrix, xs: &[f64], ps: &[f64]) -> Vec<Vec<f64>> {
        let mp = self.transform(m);
        let d = self.cutoff.mode_dim();
        let nmax = self.cutoff.nmax();
        // Fourier phase i^{mb - nb} relating the P-quadrature wavefunction to
        // the X-quadrature one.
        let phase = |nb: usize, mb: usize| -> C64 {
            match (4 + (mb as i64 - nb as i64) % 4) % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            }
        };
        let psi_p: Vec<Vec<f64>> = ps.iter().map(|&p| hermite_functions(nmax, p)).collect();
        xs.iter()
            .map(|&x| {
                let psi_x = hermite_functions(nmax, x);
                // Contract the mode-a indices at this x.
                let mut cx = CMatrix::zeros(d, d);
                for na in 0..d {
                    for ma in 0..d {
                        let wa = psi_x[na] * psi_x[ma];
                        if wa == 0.0 {
                            continue;
                        }
                        for nb in 0..d {
                            for mb in 0..d {
                                cx[(nb, mb)] += mp
                                    [(self.cutoff.index(na, nb), self.cutoff.index(ma, mb))]
                                    * C64::new(wa, 0.0);
                            }
                        }
                    }
                }
                psi_p
                    .iter()
                    .map(|psi| {
                        let mut val = C64::new(0.0, 0.0);
                        for nb in 0..d {
                            for mb in 0..d {
                                val += cx[(nb, mb)] * phase(nb, mb) * C64::new(psi[nb] * psi[mb], 0.0);
                            }
                        }
                        val.re
                    })
                    .collect()
            })
            .collect()
    }

    /// Outcome densities at an arbitrary list of (x, p) points. Same operator
    /// semantics as `density_table`, but without requiring a tensor grid.
    pub fn density_points(&self, m: &CMatrix, points: &[(f64, f64)]) -> Vec<f64> {
        let mp = self.transform(m);
        let d = self.cutoff.mode_dim();
        let nmax = self.cutoff.nmax();
        let dim = self.cutoff.pair_dim();
        // The density is a quadratic form c^dag M' c in the coherence vector
        // c[(na, nb)] = psi_na(x) psi_nb(p) i^{nb}, where i^{nb} carries the
        // Fourier phase of the P-quadrature wavefunction.
        let i_pow = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        points
            .iter()
            .map(|&(x, p)| {
                let psi_x = hermite_functions(nmax, x);
                let psi_p = hermite_functions(nmax, p);
                let mut c = nalgebra::DVector::<C64>::zeros(dim);
                for na in 0..d {
                    for nb in 0..d {
                        c[self.cutoff.index(na, nb)] =
                            i_pow[nb % 4] * C64::new(psi_x[na] * psi_p[nb], 0.0);
                    }
                }
                c.dotc(&(&mp * &c)).re
            })
            .collect()
    }
}

/// Photon-number-resolving measurement in the two output modes, optionally
/// preceded by a balanced recombination beam splitter.
pub fn photon_counting_povm(cutoff: FockCutoff, recombine: bool) -> Povm {
    let dim = cutoff.pair_dim();
    let u = if recombine {
        Some(beam_splitter_unitary(cutoff, 0.5, 0.0))
    } else {
        None
    };
    let mut elements = Vec::with_capacity(dim);
    let mut labels = Vec::with_capacity(dim);
    for i in 0..dim {
        let (na, nb) = cutoff.unindex(i);
        let mut proj = CMatrix::zeros(dim, dim);
        proj[(i, i)] = C64::new(1.0, 0.0);
        // Counting after the splitter: probability Tr[U rho U^dag |n><n|]
        // = Tr[rho U^dag |n><n| U].
        let el = match &u {
            Some(u) => u.adjoint() * proj * u,
            None => proj,
        };
        elements.push(el);
        labels.push(format!("n=({na},{nb})"));
    }
    Povm::new(
        elements,
        labels,
        format!("photon-counting(recombine={recombine})"),
    )
    .expect("number projectors form a valid POVM")
}

/// Random POVM on the qubit with `outcomes` elements: random PSD operators
/// renormalized by S^{-1/2} . S^{-1/2}.
pub fn random_qubit_povm<R: Rng>(rng: &mut R, outcomes: usize) -> Result<Povm> {
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = CMatrix::from_fn(2, 2, |_, _| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            &g * g.adjoint()
        })
        .collect();
    let mut s = CMatrix::zeros(2, 2);
    for g in &raw {
        s += g;
    }
    let (vals, vecs) = crate::linalg::hermitian_eigen(&s);
    let inv_sqrt = &vecs
        * CMatrix::from_diagonal(&DVector::from_iterator(
            2,
            vals.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)),
        ))
        * vecs.adjoint();
    let elements: Vec<CMatrix> = raw.iter().map(|g| &inv_sqrt * g * &inv_sqrt).collect();
    let labels = (0..outcomes).map(|j| format!("out{j}")).collect();
    Povm::new(elements, labels, "random-general")
}

/// Random equatorial POVM: random angles, weights projected onto the
/// completeness constraints (sum n = 4, sum n e^{i chi} = 0) and redrawn
/// until all weights are positive.
pub fn random_equatorial_povm<R: Rng>(rng: &mut R, outcomes: usize) -> Result<Povm> {
    assert!(outcomes >= 4, "need at least 4 outcomes for a generic equatorial POVM");
    for _ in 0..1000 {
        let angles: Vec<f64> = (0..outcomes)
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        let raw: Vec<f64> = (0..outcomes).map(|_| 0.2 + rng.gen::<f64>()).collect();
        // Project raw weights onto {A n = b} with rows (1...), (cos), (sin).
        let m = outcomes;
        let mut a = vec![vec![0.0; m]; 3];
        for j in 0..m {
            a[0][j] = 1.0;
            a[1][j] = angles[j].cos();
            a[2][j] = angles[j].sin();
        }
        let residual = Vector3::new(
            raw.iter().sum::<f64>() - 4.0,
            raw.iter().zip(&a[1]).map(|(n, c)| n * c).sum::<f64>(),
            raw.iter().zip(&a[2]).map(|(n, s)| n * s).sum::<f64>(),
        );
        let mut gram = Matrix3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                gram[(r, c)] = (0..m).map(|j| a[r][j] * a[c][j]).sum();
            }
        }
        let Some(coef) = gram.lu().solve(&residual) else {
            continue;
        };
        let weights: Vec<f64> = (0..m)
            .map(|j| raw[j] - coef[0] * a[0][j] - coef[1] * a[1][j] - coef[2] * a[2][j])
            .collect();
        if weights.iter().any(|&w| w < 0.02) {
            continue;
        }
        let specs: Vec<EquatorialElementSpec> = weights
            .iter()
            .zip(&angles)
            .map(|(&weight, &angle)| EquatorialElementSpec { weight, angle })
            .collect();
        return equatorial_povm(&specs);
    }
    Err(Error::InvalidPovm(
        "failed to sample a positive equatorial weight vector".into(),
    ))
}
