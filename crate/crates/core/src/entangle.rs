//! Reduced states and separability measures.
//!
//! Schmidt coefficients come from the singular values of the reshaped
//! amplitude matrix rather than from square roots of reduced-density
//! eigenvalues: a separable state then reports `λ2` at round-off level
//! (~1e-16) instead of its square root (~1e-8).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::sim::StateVector;

/// Default tolerance on the second Schmidt coefficient.
pub const DEFAULT_SEPARABILITY_TOL: f64 = 1e-9;

/// Reduced-density eigenvalues below this are treated as zero when building
/// the concurrence spectrum.
const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntangleError {
    #[error("invalid qubit subset {subset:?} for a {num_qubits}-qubit state")]
    InvalidSubset { subset: Vec<usize>, num_qubits: usize },

    #[error("expected a {expected}x{expected} density matrix, got {actual}x{actual}")]
    WrongDimension { expected: usize, actual: usize },
}

/// Density matrix over `k` qubits. The first listed qubit is the most
/// significant bit of a row index.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubits: Vec<usize>,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<DensityMatrix, EntangleError> {
        let dim = entries.nrows();
        if dim != entries.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(EntangleError::WrongDimension {
                expected: dim.next_power_of_two().max(2),
                actual: dim,
            });
        }
        let k = dim.trailing_zeros() as usize;
        Ok(DensityMatrix {
            qubits: (0..k).collect(),
            entries,
        })
    }

    /// `|ψ⟩⟨ψ|` for a 2^k amplitude vector.
    pub fn pure(amps: &[C64]) -> Result<DensityMatrix, EntangleError> {
        let v = DMatrix::from_column_slice(amps.len(), 1, amps);
        DensityMatrix::from_matrix(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Qubits the rows refer to, most significant first.
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|z| z.re).collect()
    }

    /// Eigenvalues in nonincreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.entries - &other.entries;
        0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
    }
}

/// `Tr_rest |ψ⟩⟨ψ|` over one or two kept qubits.
pub fn reduced_density(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix, EntangleError> {
    let n = state.num_qubits();
    let valid = !keep.is_empty()
        && keep.len() <= 2
        && keep.iter().all(|&q| q < n)
        && !(keep.len() == 2 && keep[0] == keep[1]);
    if !valid {
        return Err(EntangleError::InvalidSubset {
            subset: keep.to_vec(),
            num_qubits: n,
        });
    }
    let m = reshape(state, keep);
    Ok(DensityMatrix {
        qubits: keep.to_vec(),
        entries: &m * m.adjoint(),
    })
}

/// Amplitudes as a matrix with rows indexed by `part` (first qubit most
/// significant) and columns by the remaining qubits.
fn reshape(state: &StateVector, part: &[usize]) -> DMatrix<C64> {
    let n = state.num_qubits();
    let k = part.len();
    let rest: Vec<usize> = (0..n).filter(|q| !part.contains(q)).collect();
    let mut m = DMatrix::zeros(1 << k, 1 << rest.len());
    for (index, &amp) in state.amplitudes().iter().enumerate() {
        let row = part.iter().fold(0, |acc, &q| (acc << 1) | ((index >> q) & 1));
        let col = rest.iter().rev().fold(0, |acc, &q| (acc << 1) | ((index >> q) & 1));
        m[(row, col)] = amp;
    }
    m
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    /// Nonincreasing.
    pub coeffs: Vec<f64>,
    pub rank: usize,
}

impl SchmidtSpectrum {
    /// Second coefficient, 0 for rank-one shapes.
    pub fn lambda2(&self) -> f64 {
        self.coeffs.get(1).copied().unwrap_or(0.0)
    }
}

/// Schmidt coefficients of the bipartition `part | rest`.
pub fn schmidt_spectrum(state: &StateVector, part: &[usize], tol: f64) -> Result<SchmidtSpectrum, EntangleError> {
    let n = state.num_qubits();
    let mut sorted = part.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if part.is_empty() || sorted.len() != part.len() || part.len() >= n || part.iter().any(|&q| q >= n) {
        return Err(EntangleError::InvalidSubset {
            subset: part.to_vec(),
            num_qubits: n,
        });
    }
    let m = reshape(state, part);
    let mut coeffs: Vec<f64> = m.singular_values().iter().copied().collect();
    coeffs.sort_by(|a, b| b.total_cmp(a));
    let rank = coeffs.iter().filter(|&&c| c > tol).count();
    Ok(SchmidtSpectrum { coeffs, rank })
}

/// `λ2` of the single-qubit bipartition `{qubit} | rest`; 0 for a one-qubit
/// register.
pub fn single_qubit_lambda2(state: &StateVector, qubit: usize) -> f64 {
    if state.num_qubits() < 2 {
        return 0.0;
    }
    schmidt_spectrum(state, &[qubit], 0.0).map_or(0.0, |s| s.lambda2())
}

/// Whether `qubit` is entangled with the rest of the register.
pub fn is_entangled(state: &StateVector, qubit: usize, tol: f64) -> bool {
    single_qubit_lambda2(state, qubit) > tol
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// With `ρ = W W†` from the eigendecomposition (columns `√μᵢ vᵢ`), the
/// singular values of `τ = W† (σy⊗σy) W*` are the square roots of the
/// eigenvalues of `ρ ρ̃`, so no square root of a near-zero eigenvalue is
/// ever taken on the way to `λ1 − λ2 − λ3 − λ4`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64, EntangleError> {
    if rho.dim() != 4 {
        return Err(EntangleError::WrongDimension {
            expected: 4,
            actual: rho.dim(),
        });
    }
    let eig = SymmetricEigen::new(rho.entries.clone());
    let kept: Vec<usize> = (0..4).filter(|&i| eig.eigenvalues[i] > RANK_CUTOFF).collect();
    if kept.is_empty() {
        return Ok(0.0);
    }
    let mut w = DMatrix::<C64>::zeros(4, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt();
        for r in 0..4 {
            w[(r, c)] = eig.eigenvectors[(r, i)] * scale;
        }
    }
    let flip = spin_flip();
    let tau = w.adjoint() * flip * w.map(|z| z.conj());
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1..].iter().sum::<f64>();
    Ok(c.clamp(0.0, 1.0))
}

/// `σy ⊗ σy`, which is real: anti-diagonal (-1, 1, 1, -1).
fn spin_flip() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 3)] = C64::new(-1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    m[(2, 1)] = C64::new(1.0, 0.0);
    m[(3, 0)] = C64::new(-1.0, 0.0);
    m
}
