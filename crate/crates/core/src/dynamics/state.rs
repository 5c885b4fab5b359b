//! Density matrices on the charge-zero block, stored per pair of system
//! charge sectors.

use crate::error::{Error, Result};
use crate::fockspace::{build_epr_state, ChargeBlock, ModeLayout};
use crate::linalg::{hermiticity_error, CMatrix, HermitianEigen, C64, ZERO};

/// Full-space density matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: CMatrix,
    pub layout: ModeLayout,
}

impl DensityMatrix {
    pub fn trace(&self) -> C64 {
        crate::linalg::trace(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        HermitianEigen::new(&self.matrix).min()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }
}

/// `ρ` inside the charge-zero block.
///
/// Block `(k, k')` couples system sector `k` (with auxiliary sector `N−k`)
/// to system sector `k'`. Its entries are stored as `data[r·R + c]` with
/// system pair `r = s·d_k' + s'`, auxiliary pair `c = a·d_k' + a'` and
/// `R = d_k·d_k'`. Real and imaginary parts live in separate arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDensity {
    n: usize,
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl BlockDensity {
    pub fn zeros(block: &ChargeBlock) -> Self {
        let n = block.n();
        let dims: Vec<usize> = (0..=n).map(|k| block.sectors().dim(k)).collect();
        let mut re = Vec::with_capacity((n + 1) * (n + 1));
        for k in 0..=n {
            for kp in 0..=n {
                let r = dims[k] * dims[kp];
                re.push(vec![0.0; r * r]);
            }
        }
        let im = re.clone();
        BlockDensity { n, dims, re, im }
    }

    /// The paired state `Π_i (c_i† + ξ_i†)/√2 |0⟩`.
    pub fn epr(block: &ChargeBlock) -> Self {
        let psi = build_epr_state(block.layout()).expect("block layout is paired");
        let v = block.restrict_vector(&psi.amplitudes);
        let m = &v * v.adjoint();
        Self::from_matrix(block, &m).expect("dimension fixed by block")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sector_dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    /// Real and imaginary parts of block `(k, k')`.
    #[inline]
    pub fn block(&self, k: usize, kp: usize) -> (&[f64], &[f64]) {
        let i = k * (self.n + 1) + kp;
        (&self.re[i], &self.im[i])
    }

    #[inline]
    pub fn block_mut(&mut self, k: usize, kp: usize) -> (&mut [f64], &mut [f64]) {
        let i = k * (self.n + 1) + kp;
        (&mut self.re[i], &mut self.im[i])
    }

    /// Entry `⟨k, s, a| ρ |k', s', a'⟩`.
    #[inline]
    pub fn get(&self, k: usize, s: usize, a: usize, kp: usize, sp: usize, ap: usize) -> C64 {
        let dkp = self.dims[kp];
        let big_r = self.dims[k] * dkp;
        let idx = (s * dkp + sp) * big_r + a * dkp + ap;
        let (re, im) = self.block(k, kp);
        C64::new(re[idx], im[idx])
    }

    pub fn from_matrix(block: &ChargeBlock, m: &CMatrix) -> Result<Self> {
        if m.nrows() != block.dim() || m.ncols() != block.dim() {
            return Err(Error::DimensionMismatch {
                expected: block.dim(),
                found: m.nrows(),
            });
        }
        let mut out = Self::zeros(block);
        let n = out.n;
        for k in 0..=n {
            for kp in 0..=n {
                let (re, im) = out.block_mut(k, kp);
                for_each_entry(block, k, kp, |idx, row, col| {
                    re[idx] = m[(row, col)].re;
                    im[idx] = m[(row, col)].im;
                });
            }
        }
        Ok(out)
    }

    pub fn to_matrix(&self, block: &ChargeBlock) -> CMatrix {
        let mut m = CMatrix::zeros(block.dim(), block.dim());
        for k in 0..=self.n {
            for kp in 0..=self.n {
                let (re, im) = self.block(k, kp);
                for_each_entry(block, k, kp, |idx, row, col| {
                    m[(row, col)] = C64::new(re[idx], im[idx]);
                });
            }
        }
        m
    }

    /// Trace: diagonal blocks with `s = s'` and `a = a'`.
    pub fn trace(&self) -> C64 {
        let mut t = ZERO;
        for k in 0..=self.n {
            let d = self.dims[k];
            let big_r = d * d;
            let (re, im) = self.block(k, k);
            for s in 0..d {
                let r = s * d + s;
                for a in 0..d {
                    let idx = r * big_r + a * d + a;
                    t += C64::new(re[idx], im[idx]);
                }
            }
        }
        t
    }

    pub fn scale(&mut self, factor: f64) {
        for b in self.re.iter_mut().chain(self.im.iter_mut()) {
            for v in b.iter_mut() {
                *v *= factor;
            }
        }
    }

    /// Frobenius distance to another state on the same block.
    pub fn distance(&self, other: &BlockDensity) -> f64 {
        let sq = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
            a.iter()
                .zip(b)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
                .sum()
        };
        (sq(&self.re, &other.re) + sq(&self.im, &other.im)).sqrt()
    }

    pub fn frobenius(&self) -> f64 {
        self.re
            .iter()
            .chain(&self.im)
            .flat_map(|b| b.iter().map(|x| x * x))
            .sum::<f64>()
            .sqrt()
    }
}

/// Calls `f(storage index, block row, block column)` for every entry of
/// block `(k, k')`.
fn for_each_entry(block: &ChargeBlock, k: usize, kp: usize, mut f: impl FnMut(usize, usize, usize)) {
    let (dk, dkp) = (block.sectors().dim(k), block.sectors().dim(kp));
    let big_r = dk * dkp;
    for s in 0..dk {
        for sp in 0..dkp {
            let r = s * dkp + sp;
            for a in 0..dk {
                for ap in 0..dkp {
                    f(r * big_r + a * dkp + ap, block.index(k, s, a), block.index(kp, sp, ap));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let block = ChargeBlock::new(ModeLayout::new(3).unwrap()).unwrap();
        let d = block.dim();
        let m = CMatrix::from_fn(d, d, |i, j| C64::new(i as f64, j as f64 * 0.5));
        let b = BlockDensity::from_matrix(&block, &m).unwrap();
        assert_eq!(b.to_matrix(&block), m);
        let tr: C64 = (0..d).map(|i| m[(i, i)]).sum();
        assert!((b.trace() - tr).norm() < 1e-12);
    }

    #[test]
    fn epr_is_pure_and_normalized() {
        for n in 1..=4 {
            let block = ChargeBlock::new(ModeLayout::new(n).unwrap()).unwrap();
            let rho = BlockDensity::epr(&block);
            assert!((rho.trace().re - 1.0).abs() < 1e-14);
            assert!((rho.frobenius() - 1.0).abs() < 1e-13, "pure state has unit purity");
        }
    }
}
