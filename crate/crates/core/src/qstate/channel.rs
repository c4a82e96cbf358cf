use super::{
    c, hermitian_eigen, identity, kron, lift, max_abs_diff, pauli_basis, CMatrix, Subsystem,
};
use crate::error::{Error, Result};

pub const CPTP_TOL: f64 = 1e-9;

/// A completely positive map in Kraus form. Trace-decreasing maps model
/// heralded processes whose success probability is the output trace.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    trace_preserving: bool,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>, trace_preserving: bool) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let dim = first.nrows();
        if !matches!(dim, 2 | 4) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::InvalidChannel(
                "Kraus operators differ in shape".into(),
            ));
        }
        let gram = kraus
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        if trace_preserving {
            let dev = max_abs_diff(&gram, &identity(dim));
            if dev > CPTP_TOL {
                return Err(Error::InvalidChannel(format!(
                    "sum K^dag K deviates from identity by {dev:e}"
                )));
            }
        } else {
            let (values, _) = hermitian_eigen(&gram);
            let max = values[values.len() - 1];
            if max > 1.0 + CPTP_TOL {
                return Err(Error::InvalidChannel(format!(
                    "sum K^dag K has eigenvalue {max} > 1"
                )));
            }
        }
        Ok(Self {
            kraus,
            trace_preserving,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(vec![identity(dim)], true)
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u], true)
    }

    /// ρ ↦ (1−p)ρ + p·I/d, built from the full Pauli group on d = 2 or 4.
    pub fn depolarizing(dim: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("{p} not in [0, 1]")));
        }
        let paulis: Vec<CMatrix> = match dim {
            2 => pauli_basis().to_vec(),
            4 => {
                let b = pauli_basis();
                b.iter()
                    .flat_map(|a| b.iter().map(move |q| kron(a, q)))
                    .collect()
            }
            d => return Err(Error::UnsupportedDimension(d)),
        };
        let n = paulis.len() as f64;
        let kraus = paulis
            .into_iter()
            .enumerate()
            .map(|(i, pm)| {
                let w = if i == 0 { 1.0 - p + p / n } else { p / n };
                pm * c(w.sqrt(), 0.0)
            })
            .collect();
        Self::new(kraus, true)
    }

    /// Single-qubit Pauli channel with flip probabilities (p_x, p_y, p_z).
    pub fn pauli(px: f64, py: f64, pz: f64) -> Result<Self> {
        let pi = 1.0 - px - py - pz;
        if [px, py, pz, pi].iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::param(
                "pauli",
                format!("probabilities ({px}, {py}, {pz}) invalid"),
            ));
        }
        let b = pauli_basis();
        let kraus = [pi, px, py, pz]
            .iter()
            .zip(b.iter())
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, m)| m * c(p.sqrt(), 0.0))
            .collect();
        Self::new(kraus, true)
    }

    /// Phase damping that multiplies the off-diagonal coherence by `factor`.
    pub fn dephasing(factor: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(Error::param(
                "coherence factor",
                format!("{factor} not in [0, 1]"),
            ));
        }
        Self::pauli(0.0, 0.0, (1.0 - factor) / 2.0)
    }

    pub fn bit_flip(eps: f64) -> Result<Self> {
        Self::pauli(eps, 0.0, 0.0)
    }

    /// Extend a single-qubit channel to act on one half of the pair.
    pub fn on(&self, subsystem: Subsystem) -> Result<Self> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dim(),
            });
        }
        let kraus = self.kraus.iter().map(|k| lift(k, subsystem)).collect();
        Self::new(kraus, self.trace_preserving)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &QuantumChannel) -> Result<Self> {
        if self.dim() != next.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: next.dim(),
            });
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .filter(|k| k.iter().any(|z| z.norm() > 0.0))
            .collect::<Vec<_>>();
        let kraus = if kraus.is_empty() {
            vec![CMatrix::zeros(self.dim(), self.dim())]
        } else {
            kraus
        };
        Self::new(kraus, self.trace_preserving && next.trace_preserving)
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Σ K†K.
    pub fn gram(&self) -> CMatrix {
        let dim = self.dim();
        self.kraus
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k)
    }
}
