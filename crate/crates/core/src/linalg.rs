//! Small dense helpers shared by the dynamics and observables.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the same order as `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        let n = m.nrows();
        // Only the Hermitian part is meaningful; symmetrizing first keeps the
        // eigensolver away from round-off asymmetry.
        let sym = hermitian_part(m);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// V f(Λ) V†.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for r in 0..n {
                scaled[(r, c)] *= fv;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// tr(A B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// exp(-i H t) for Hermitian `h`.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    if h.nrows() == 1 {
        return CMatrix::from_element(1, 1, C64::new(0.0, -h[(0, 0)].re * t).exp());
    }
    HermitianEigen::new(h).map(|e| C64::new(0.0, -e * t).exp())
}
