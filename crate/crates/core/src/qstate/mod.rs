//! Dense linear algebra for one- and two-qubit states.
//!
//! Two-qubit objects are ordered ion ⊗ photon. The ion basis is
//! (|1'⟩, |1⟩), which the microwave mapping carries to (|0⟩, |1⟩); the
//! photon basis is (|σ+⟩ ≡ |H⟩, |σ−⟩ ≡ |V⟩). Index 0 of each qubit is the
//! +1 eigenvector of Z, so `|1'⟩|σ+⟩` is basis index 0 and `|1⟩|σ−⟩` index 3.

mod channel;
pub mod io;
#[cfg(test)]
pub(crate) mod testutil;

pub use channel::QuantumChannel;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_FLOOR: f64 = -1e-9;
pub const NORM_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Single-qubit Pauli basis in the order {I, X, Y, Z}.
pub fn pauli_basis() -> [CMatrix; 4] {
    [identity(2), pauli_x(), pauli_y(), pauli_z()]
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Real eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Which half of the ion–photon pair an operation addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Ion = 0,
    Photon = 1,
}

impl TryFrom<usize> for Subsystem {
    type Error = Error;

    fn try_from(index: usize) -> Result<Self> {
        match index {
            0 => Ok(Subsystem::Ion),
            1 => Ok(Subsystem::Photon),
            i => Err(Error::InvalidSubsystem(i)),
        }
    }
}

/// Embed a single-qubit operator on one subsystem of the pair.
pub fn lift(op: &CMatrix, on: Subsystem) -> CMatrix {
    match on {
        Subsystem::Ion => kron(op, &identity(2)),
        Subsystem::Photon => kron(&identity(2), op),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes the input instead of rejecting it.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            amplitudes: amplitudes / c(norm, 0.0),
        })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::param(
                "index",
                format!("{index} out of range for dim {dim}"),
            ));
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// (|00⟩ + e^{iφ}|11⟩)/√2 in the shared basis ordering.
    pub fn bell(phi: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVector::zeros(4);
        v[0] = c(s, 0.0);
        v[3] = C64::from_polar(s, phi);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let dim = self.dim() * other.dim();
        if dim > 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }
}

/// Hermitian, positive-semidefinite matrix of trace one (or at most one
/// when flagged as subnormalized, as heralded outputs are).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
    subnormalized: bool,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::validated(m, false)
    }

    pub fn new_subnormalized(m: CMatrix) -> Result<Self> {
        Self::validated(m, true)
    }

    fn validated(m: CMatrix, subnormalized: bool) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        let herm = hermiticity_error(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let m = (&m + m.adjoint()) * c(0.5, 0.0);
        let trace = m.trace().re;
        let trace_ok = if subnormalized {
            (-TRACE_TOL..=1.0 + TRACE_TOL).contains(&trace)
        } else {
            (trace - 1.0).abs() <= TRACE_TOL
        };
        if !trace_ok {
            return Err(Error::BadTrace(trace));
        }
        let (values, vectors) = hermitian_eigen(&m);
        let min = values[0];
        if min < PSD_FLOOR {
            return Err(Error::NotPositive(min));
        }
        let m = if min < 0.0 {
            // Clip rounding-level negativity, then restore the trace.
            let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let scale = if total > 0.0 { trace / total } else { 0.0 };
            let diag = CMatrix::from_diagonal(&CVector::from_iterator(
                clipped.len(),
                clipped.iter().map(|&v| c(v * scale, 0.0)),
            ));
            &vectors * diag * vectors.adjoint()
        } else {
            m
        };
        Ok(Self { m, subnormalized })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            m: psi.projector(),
            subnormalized: false,
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: identity(dim) * c(1.0 / dim as f64, 0.0),
            subnormalized: false,
        })
    }

    /// Werner state p·|ψ⟩⟨ψ| + (1−p)·I/d.
    pub fn werner(psi: &PureState, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("{p} not in [0, 1]")));
        }
        let mixed = Self::maximally_mixed(psi.dim())?;
        Ok(Self::from_pure(psi).mix(&mixed, p))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.m).0
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// Renormalize a heralded (subnormalized) state; returns the herald
    /// probability alongside.
    pub fn post_select(&self) -> Result<(DensityMatrix, f64)> {
        let p = self.trace();
        if p <= 0.0 {
            return Err(Error::BadTrace(p));
        }
        Ok((
            Self {
                m: &self.m / c(p, 0.0),
                subnormalized: false,
            },
            p,
        ))
    }

    /// weight·self + (1−weight)·other.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> DensityMatrix {
        DensityMatrix {
            m: &self.m * c(weight, 0.0) + &other.m * c(1.0 - weight, 0.0),
            subnormalized: self.subnormalized || other.subnormalized,
        }
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_dim(other.dim())?;
        let diff = &self.m - &other.m;
        let (values, _) = hermitian_eigen(&diff);
        Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
    }

    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        self.same_dim(target.dim())?;
        let v = target.amplitudes();
        let f = (v.adjoint() * &self.m * v)[(0, 0)];
        Ok(f.re.clamp(0.0, 1.0))
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        self.same_dim(obs.dim())?;
        Ok((&self.m * obs.matrix()).trace().re)
    }

    pub fn apply(&self, channel: &QuantumChannel) -> Result<DensityMatrix> {
        self.same_dim(channel.dim())?;
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for k in channel.kraus() {
            out += k * &self.m * k.adjoint();
        }
        let out = (&out + out.adjoint()) * c(0.5, 0.0);
        if channel.is_trace_preserving() && !self.subnormalized {
            // Pin the trace so accumulated rounding cannot trip validation.
            let t = out.trace().re;
            return Self::new(out / c(t, 0.0));
        }
        Self::new_subnormalized(out)
    }

    pub fn partial_trace(&self, keep: Subsystem) -> Result<DensityMatrix> {
        if self.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: self.dim(),
            });
        }
        let mut r = CMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let mut s = c(0.0, 0.0);
                for k in 0..2 {
                    s += match keep {
                        Subsystem::Ion => self.m[(2 * a + k, 2 * b + k)],
                        Subsystem::Photon => self.m[(2 * k + a, 2 * k + b)],
                    };
                }
                r[(a, b)] = s;
            }
        }
        Ok(DensityMatrix {
            m: r,
            subnormalized: self.subnormalized,
        })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let dim = self.dim() * other.dim();
        if dim > 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(DensityMatrix {
            m: kron(&self.m, &other.m),
            subnormalized: self.subnormalized || other.subnormalized,
        })
    }

    fn same_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    m: CMatrix,
}

impl Observable {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidObservable("not square".into()));
        }
        check_dim(m.nrows())?;
        let herm = hermiticity_error(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        Ok(Self { m })
    }

    /// Spin observable n·σ for a (not necessarily unit) Bloch direction.
    pub fn spin(direction: [f64; 3]) -> Result<Self> {
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidObservable("zero direction".into()));
        }
        let [x, y, z] = direction.map(|v| v / norm);
        Self::new(pauli_x() * c(x, 0.0) + pauli_y() * c(y, 0.0) + pauli_z() * c(z, 0.0))
    }

    /// cos θ·Z + sin θ·X: an analyzer in the X–Z plane.
    pub fn xz_plane(theta: f64) -> Self {
        Self {
            m: pauli_z() * c(theta.cos(), 0.0) + pauli_x() * c(theta.sin(), 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.m).0
    }

    /// Product observable A ⊗ B.
    pub fn tensor(&self, other: &Observable) -> Result<Observable> {
        let dim = self.dim() * other.dim();
        if dim > 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Observable {
            m: kron(&self.m, &other.m),
        })
    }
}

/// Objects that combine under ⊗ into the two-qubit space.
pub trait Tensor: Sized {
    fn tensor_with(&self, other: &Self) -> Result<Self>;
}

impl Tensor for PureState {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl Tensor for DensityMatrix {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

pub fn tensor_product<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor_with(b)
}

pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    rho.fidelity(target)
}

pub fn apply_channel(rho: &DensityMatrix, channel: &QuantumChannel) -> Result<DensityMatrix> {
    rho.apply(channel)
}

pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    rho.expectation(obs)
}

pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn zz() -> Observable {
        Observable::new(kron(&pauli_z(), &pauli_z())).unwrap()
    }

    fn xx() -> Observable {
        Observable::new(kron(&pauli_x(), &pauli_x())).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = PureState::basis(2, 0).unwrap();
        let both = tensor_product(&zero, &zero).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0];
        for (a, e) in both.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e);
            assert_abs_diff_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn tensor_of_mixed_is_mixed() {
        let half = DensityMatrix::maximally_mixed(2).unwrap();
        let quarter = tensor_product(&half, &half).unwrap();
        assert!(
            max_abs_diff(
                quarter.matrix(),
                DensityMatrix::maximally_mixed(4).unwrap().matrix()
            ) < 1e-15
        );
    }

    #[test]
    fn tensor_rejects_growth_beyond_two_qubits() {
        let bell = PureState::bell(0.0);
        let zero = PureState::basis(2, 0).unwrap();
        assert!(matches!(
            bell.tensor(&zero),
            Err(Error::UnsupportedDimension(8))
        ));
    }

    #[test]
    fn superposed_products_give_entangled_state() {
        // |1'⟩|σ+⟩ + |1⟩|σ−⟩ with equal weights
        let a = PureState::basis(2, 0)
            .unwrap()
            .tensor(&PureState::basis(2, 0).unwrap())
            .unwrap();
        let b = PureState::basis(2, 1)
            .unwrap()
            .tensor(&PureState::basis(2, 1).unwrap())
            .unwrap();
        let sum = PureState::normalized(a.amplitudes() + b.amplitudes()).unwrap();
        assert!((sum.amplitudes() - PureState::bell(0.0).amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let psi = PureState::bell(0.0);
        assert_abs_diff_eq!(
            fidelity(&DensityMatrix::from_pure(&psi), &psi).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            fidelity(&DensityMatrix::maximally_mixed(4).unwrap(), &psi).unwrap(),
            0.25,
            epsilon = 1e-14
        );
        let w = DensityMatrix::werner(&psi, 0.8).unwrap();
        // closed form (1 + 3p)/4
        assert_abs_diff_eq!(fidelity(&w, &psi).unwrap(), 0.85, epsilon = 1e-14);
        // direct ⟨ψ|ρ|ψ⟩ by explicit sums
        let v = psi.amplitudes();
        let mut direct = c(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                direct += v[i].conj() * w.matrix()[(i, j)] * v[j];
            }
        }
        assert_abs_diff_eq!(direct.re, 0.85, epsilon = 1e-14);
    }

    #[test]
    fn fidelity_dim_mismatch() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(matches!(
            rho.fidelity(&PureState::bell(0.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let bell = DensityMatrix::from_pure(&PureState::bell(0.0));
        // Declared convention: index 0 is +Z for both qubits, so |1'σ+⟩ and |1σ−⟩ both give +1.
        assert_abs_diff_eq!(expectation(&bell, &zz()).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(expectation(&bell, &xx()).unwrap(), 1.0, epsilon = 1e-14);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert_abs_diff_eq!(expectation(&mixed, &zz()).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_examples() {
        let bell = DensityMatrix::from_pure(&PureState::bell(0.7));
        let half = DensityMatrix::maximally_mixed(2).unwrap();
        for keep in [Subsystem::Ion, Subsystem::Photon] {
            let r = partial_trace(&bell, keep).unwrap();
            assert!(max_abs_diff(r.matrix(), half.matrix()) < 1e-15);
        }
        let a = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.3, 0.0)],
        ))
        .unwrap();
        let b = DensityMatrix::from_pure(&PureState::basis(2, 1).unwrap());
        let ab = a.tensor(&b).unwrap();
        assert!(
            max_abs_diff(
                ab.partial_trace(Subsystem::Ion).unwrap().matrix(),
                a.matrix()
            ) < 1e-15
        );
        assert!(
            max_abs_diff(
                ab.partial_trace(Subsystem::Photon).unwrap().matrix(),
                b.matrix()
            ) < 1e-15
        );

        let w = DensityMatrix::werner(&PureState::bell(0.0), 0.5).unwrap();
        for keep in [Subsystem::Ion, Subsystem::Photon] {
            assert!(max_abs_diff(w.partial_trace(keep).unwrap().matrix(), half.matrix()) < 1e-15);
        }
        assert!(matches!(
            Subsystem::try_from(2),
            Err(Error::InvalidSubsystem(2))
        ));
        assert!(half.partial_trace(Subsystem::Ion).is_err());
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let not_herm =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.3, 0.), c(0.0, 0.), c(0.5, 0.)]);
        assert!(matches!(
            DensityMatrix::new(not_herm),
            Err(Error::NotHermitian(_))
        ));
        let bad_trace = identity(2);
        assert!(matches!(
            DensityMatrix::new(bad_trace),
            Err(Error::BadTrace(_))
        ));
        let negative =
            CMatrix::from_row_slice(2, 2, &[c(1.2, 0.), c(0., 0.), c(0., 0.), c(-0.2, 0.)]);
        assert!(matches!(
            DensityMatrix::new(negative),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn marginal_negativity_is_clipped() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0 + 5e-10, 0.), c(0., 0.), c(0., 0.), c(-5e-10, 0.)],
        );
        let rho = DensityMatrix::new(m).unwrap();
        assert!(rho.eigenvalues()[0] >= 0.0);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn spin_observables_have_unit_eigenvalues() {
        let o = Observable::spin([0.3, -0.2, 0.9]).unwrap();
        let ev = o.eigenvalues();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-12);
    }
}

#[cfg(test)]
mod props {
    use super::testutil::{qubit_state, two_qubit_state};
    use super::*;
    use proptest::prelude::*;

    fn pauli_weights() -> impl Strategy<Value = (f64, f64, f64)> {
        (1e-6f64..1.0, 1e-6f64..1.0, 1e-6f64..1.0, 0.0f64..1.0).prop_map(|(a, b, d, keep)| {
            let s = (a + b + d) / (1.0 - keep).max(1e-3);
            (a / s, b / s, d / s)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn partial_trace_commutes_with_local_channel(rho in two_qubit_state(), (px, py, pz) in pauli_weights(), ion in any::<bool>()) {
            let keep = if ion { Subsystem::Ion } else { Subsystem::Photon };
            let local = QuantumChannel::pauli(px, py, pz).unwrap();
            let lhs = rho.apply(&local.on(keep).unwrap()).unwrap().partial_trace(keep).unwrap();
            let rhs = rho.partial_trace(keep).unwrap().apply(&local).unwrap();
            prop_assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-9);
        }

        #[test]
        fn fidelity_is_linear(a in two_qubit_state(), b in two_qubit_state(), alpha in 0.0f64..=1.0, phi in -3.2f64..3.2) {
            let target = PureState::bell(phi);
            let mixed = a.mix(&b, alpha);
            let expected = alpha * a.fidelity(&target).unwrap() + (1.0 - alpha) * b.fidelity(&target).unwrap();
            prop_assert!((mixed.fidelity(&target).unwrap() - expected).abs() < 1e-10);
        }

        #[test]
        fn local_states_stay_physical(rho in qubit_state(), (px, py, pz) in pauli_weights(), p in 0.0f64..=1.0) {
            for ch in [QuantumChannel::pauli(px, py, pz).unwrap(), QuantumChannel::depolarizing(2, p).unwrap()] {
                let out = rho.apply(&ch).unwrap();
                prop_assert!((out.trace() - 1.0).abs() < 1e-10);
                prop_assert!(out.eigenvalues().iter().all(|&l| l >= PSD_FLOOR));
            }
        }
    }
}
