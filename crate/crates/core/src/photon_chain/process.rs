//! Single-qubit process matrices in the Pauli basis {I, X, Y, Z}:
//! Λ(ρ) = Σ_mn χ_mn P_m ρ P_n†.

use crate::error::{Error, Result};
use crate::qstate::io::MatrixJson;
use crate::qstate::{
    c, hermitian_eigen, identity, kron, max_abs_diff, pauli_basis, CMatrix, CVector, DensityMatrix,
    QuantumChannel,
};

pub const CHI_TOL: f64 = 1e-9;
pub const PAULI_BASIS_TAG: &str = "pauli-IXYZ";

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    chi: CMatrix,
}

impl ProcessMatrix {
    pub fn new(chi: CMatrix) -> Result<Self> {
        if chi.nrows() != 4 || chi.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: chi.nrows(),
            });
        }
        let herm = max_abs_diff(&chi, &chi.adjoint());
        if herm > CHI_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let chi = (&chi + chi.adjoint()) * c(0.5, 0.0);
        let tr = chi.trace().re;
        if (tr - 1.0).abs() > CHI_TOL {
            return Err(Error::BadTrace(tr));
        }
        let (values, _) = hermitian_eigen(&chi);
        if values[0] < -CHI_TOL {
            return Err(Error::NotPositive(values[0]));
        }
        let pm = pauli_basis();
        let mut gram = CMatrix::zeros(2, 2);
        for m in 0..4 {
            for n in 0..4 {
                gram += pm[n].adjoint() * &pm[m] * chi[(m, n)];
            }
        }
        let dev = max_abs_diff(&gram, &identity(2));
        if dev > CHI_TOL {
            return Err(Error::InvalidChannel(format!(
                "χ map is not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(Self { chi })
    }

    pub fn identity() -> Self {
        let mut chi = CMatrix::zeros(4, 4);
        chi[(0, 0)] = c(1.0, 0.0);
        Self { chi }
    }

    /// Depolarizing process with χ_II = `fidelity` and the rest spread
    /// evenly over X, Y and Z.
    pub fn depolarizing(fidelity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::param(
                "process fidelity",
                format!("{fidelity} not in [0, 1]"),
            ));
        }
        let rest = (1.0 - fidelity) / 3.0;
        let chi = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(fidelity, 0.0),
            c(rest, 0.0),
            c(rest, 0.0),
            c(rest, 0.0),
        ]));
        Self::new(chi)
    }

    /// Reconstructed conversion + fiber process shipped with the crate.
    pub fn reference_conversion() -> Self {
        Self::from_json(include_str!("../../data/qfc_process_matrix.json"))
            .expect("bundled process matrix is valid")
    }

    pub fn chi(&self) -> &CMatrix {
        &self.chi
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(
            &MatrixJson::from_matrix(&self.chi).with_basis(PAULI_BASIS_TAG),
        )?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: MatrixJson = serde_json::from_str(text)?;
        if let Some(tag) = &parsed.basis {
            if tag != PAULI_BASIS_TAG {
                return Err(Error::param(
                    "basis",
                    format!("expected {PAULI_BASIS_TAG}, got {tag}"),
                ));
            }
        }
        Self::new(parsed.to_matrix()?)
    }
}

/// Kraus form K_i = √λ_i Σ_j v_ij P_j from the eigendecomposition of χ.
pub fn process_matrix_channel(chi: &ProcessMatrix) -> Result<QuantumChannel> {
    let (values, vectors) = hermitian_eigen(&chi.chi);
    let pm = pauli_basis();
    let kraus: Vec<CMatrix> = values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-14)
        .map(|(i, &l)| {
            let mut k = CMatrix::zeros(2, 2);
            for (j, p) in pm.iter().enumerate() {
                k += p * vectors[(j, i)];
            }
            k * c(l.sqrt(), 0.0)
        })
        .collect();
    QuantumChannel::new(kraus, true)
}

/// χ from the outputs of the four inputs |0⟩, |1⟩, |+⟩, |+i⟩.
pub fn process_tomography_from_outputs(outputs: &[DensityMatrix; 4]) -> Result<ProcessMatrix> {
    if outputs.iter().any(|o| o.dim() != 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: 4,
        });
    }
    let [r0, r1, rp, ri] = outputs.each_ref().map(|o| o.matrix().clone());
    // Λ(|0⟩⟨1|) = Λ(ρ+) + iΛ(ρ+i) − (1+i)/2·(Λ(ρ0) + Λ(ρ1))
    let e01 = &rp + &ri * c(0.0, 1.0) - (&r0 + &r1) * c(0.5, 0.5);
    let e10 = e01.adjoint();
    let images = [[r0, e01], [e10, r1]];
    // Choi state J = ½ Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)
    let mut choi = CMatrix::zeros(4, 4);
    for (i, row) in images.iter().enumerate() {
        for (j, img) in row.iter().enumerate() {
            let mut unit = CMatrix::zeros(2, 2);
            unit[(i, j)] = c(1.0, 0.0);
            choi += kron(&unit, img) * c(0.5, 0.0);
        }
    }
    // χ_mn = ⟨Φ_m|J|Φ_n⟩ with |Φ_m⟩ = (I ⊗ P_m)|Φ+⟩
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    let basis: Vec<CVector> = pauli_basis()
        .iter()
        .map(|p| kron(&identity(2), p) * &phi_plus)
        .collect();
    let chi = CMatrix::from_fn(4, 4, |m, n| {
        (basis[m].adjoint() * &choi * &basis[n])[(0, 0)]
    });
    ProcessMatrix::new(chi)
}

/// Ideal-input process tomography of a single-qubit channel.
pub fn process_tomography(channel: &QuantumChannel) -> Result<ProcessMatrix> {
    if channel.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: channel.dim(),
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let inputs = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(s, 0.0), c(s, 0.0)],
        [c(s, 0.0), c(0.0, s)],
    ];
    let mut outputs = Vec::with_capacity(4);
    for amp in inputs {
        let psi = crate::qstate::PureState::from_slice(&amp)?;
        outputs.push(DensityMatrix::from_pure(&psi).apply(channel)?);
    }
    let outputs: [DensityMatrix; 4] = outputs.try_into().expect("four outputs");
    process_tomography_from_outputs(&outputs)
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&l| c(l.max(0.0).sqrt(), 0.0)),
    ));
    &vectors * d * vectors.adjoint()
}

/// Uhlmann fidelity (tr√(√χ χ_ideal √χ))² between χ matrices taken as states.
pub fn process_fidelity(chi: &ProcessMatrix, chi_ideal: &ProcessMatrix) -> f64 {
    let s = psd_sqrt(&chi.chi);
    let inner = &s * &chi_ideal.chi * &s;
    let (values, _) = hermitian_eigen(&((&inner + inner.adjoint()) * c(0.5, 0.0)));
    let root: f64 = values.iter().map(|l| l.max(0.0).sqrt()).sum();
    (root * root).clamp(0.0, 1.0)
}
