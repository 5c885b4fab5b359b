//! Instantaneous Hamiltonian of one coupling draw, on the full Fock space and
//! resolved into system charge sectors.

use super::couplings::{fermion_pairs, CouplingSample};
use crate::error::{Error, Result};
use crate::fockspace::bits::{apply_word, Ladder};
use crate::fockspace::{FockOperator, ModeLayout, SystemSectors};
use crate::linalg::{CMatrix, HermitianEigen, C64};

/// `c_i† c_j† c_k c_l` for `P = (i, j)` and `Q = (k, l)`.
pub fn quartic_word(p: (usize, usize), q: (usize, usize)) -> [Ladder; 4] {
    [
        Ladder::Create(p.0),
        Ladder::Create(p.1),
        Ladder::Annihilate(q.0),
        Ladder::Annihilate(q.1),
    ]
}

/// Dense `H = Σ_PQ J_PQ c_P† c_Q` acting on the system modes of `layout`.
pub fn build_hamiltonian(sample: &CouplingSample, layout: ModeLayout) -> Result<FockOperator> {
    if sample.n() != layout.n_system() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_system(),
            found: sample.n(),
        });
    }
    let dim = layout.dim();
    let mut h = CMatrix::zeros(dim, dim);
    let pairs = sample.pairs();
    for (pi, &p) in pairs.iter().enumerate() {
        for (qi, &q) in pairs.iter().enumerate() {
            let v = sample.value(pi, qi);
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let word = quartic_word(p, q);
            for col in 0..dim as u32 {
                if let Some((row, sign)) = apply_word(&word, col) {
                    h[(row as usize, col as usize)] += v * sign;
                }
            }
        }
    }
    FockOperator::new(h, layout)
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    row: u16,
    col: u16,
    coupling: u32,
    sign: f64,
}

/// Precomputed sparsity pattern of `H` inside each system charge sector.
#[derive(Clone, Debug)]
pub struct SectorHamiltonian {
    n: usize,
    n_pairs: usize,
    dims: Vec<usize>,
    entries: Vec<Vec<Entry>>,
}

impl SectorHamiltonian {
    pub fn new(sectors: &SystemSectors) -> Self {
        let n = sectors.n();
        let pairs = fermion_pairs(n);
        let m = pairs.len();
        let mut entries = vec![Vec::new(); n + 1];
        for (k, list) in entries.iter_mut().enumerate() {
            for (pi, &p) in pairs.iter().enumerate() {
                for (qi, &q) in pairs.iter().enumerate() {
                    let word = quartic_word(p, q);
                    for (col, &s) in sectors.states(k).iter().enumerate() {
                        if let Some((out, sign)) = apply_word(&word, s) {
                            list.push(Entry {
                                row: sectors.position(out) as u16,
                                col: col as u16,
                                coupling: (pi * m + qi) as u32,
                                sign,
                            });
                        }
                    }
                }
            }
        }
        SectorHamiltonian {
            n,
            n_pairs: m,
            dims: (0..=n).map(|k| sectors.dim(k)).collect(),
            entries,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `H` restricted to each sector `k = 0..=N`.
    pub fn matrices(&self, sample: &CouplingSample) -> Vec<CMatrix> {
        assert_eq!(sample.n_pairs(), self.n_pairs, "coupling sample for wrong N");
        self.entries
            .iter()
            .zip(&self.dims)
            .map(|(list, &d)| {
                let mut h = CMatrix::zeros(d, d);
                for e in list {
                    let c = e.coupling as usize;
                    let v = sample.value(c / self.n_pairs, c % self.n_pairs);
                    h[(e.row as usize, e.col as usize)] += v * e.sign;
                }
                h
            })
            .collect()
    }

    /// `exp(−i H_k dt)` per sector from the eigendecomposition of each block.
    pub fn propagators(&self, sample: &CouplingSample, dt: f64) -> Vec<CMatrix> {
        self.matrices(sample)
            .into_iter()
            .map(|h| {
                if h.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
                    return CMatrix::identity(h.nrows(), h.ncols());
                }
                HermitianEigen::new(&h).map(|e| C64::from_polar(1.0, -e * dt))
            })
            .collect()
    }
}
