//! Dense eigendecomposition of Hermitian spin operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::SpinOperator;

/// Eigendecomposition H = V diag(E) V† with energies ascending, in the
/// angular-frequency units of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenSystem {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }
}

/// Diagonalize a Hermitian operator. Rejects matrices whose Hermiticity
/// deviation exceeds 1e−9 relative to the largest element.
pub fn eigendecompose(h: &SpinOperator) -> Result<EigenSystem> {
    let dev = h.hermiticity_deviation();
    let scale = h
        .matrix
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    if dev > 1e-9 * scale {
        return Err(Error::NotHermitian(dev));
    }
    let eig = h.matrix.clone().symmetric_eigen();
    let dim = h.dimension();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok(EigenSystem { energies, vectors })
}

/// Eigendecomposition of a real symmetric block, energies ascending.
/// Used by the sector-blocked solvers, where the computational-basis
/// Hamiltonian is real.
#[derive(Debug, Clone)]
pub struct RealEigen {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn eigendecompose_real(h: &DMatrix<f64>) -> RealEigen {
    let dim = h.nrows();
    if dim == 1 {
        return RealEigen {
            energies: vec![h[(0, 0)]],
            vectors: DMatrix::identity(1, 1),
        };
    }
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    RealEigen { energies, vectors }
}
