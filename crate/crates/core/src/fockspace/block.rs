//! The charge-zero block and charge-resolved system sectors.
//!
//! Every generator in the model commutes with the total charge, and the
//! initial state has `Q = 0`, so the density matrix never leaves the span of
//! occupation states with exactly `N` fermions. Inside that block a state is
//! labelled `(k, s, a)`: `k` system fermions in configuration `s` and `N − k`
//! auxiliary fermions in configuration `a`.

use nalgebra::DVector;

use super::bits::{self, Ladder};
use super::ModeLayout;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};

/// System occupation states grouped by particle number.
#[derive(Clone, Debug)]
pub struct SystemSectors {
    n: usize,
    states: Vec<Vec<u32>>,
    position: Vec<usize>,
}

impl SystemSectors {
    pub fn new(n: usize) -> Self {
        let states: Vec<Vec<u32>> = (0..=n).map(|k| bits::states_with_popcount(n, k)).collect();
        let mut position = vec![0; 1 << n];
        for sector in &states {
            for (i, &s) in sector.iter().enumerate() {
                position[s as usize] = i;
            }
        }
        SystemSectors { n, states, position }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self, k: usize) -> &[u32] {
        &self.states[k]
    }

    pub fn dim(&self, k: usize) -> usize {
        self.states[k].len()
    }

    /// Index of a system state within its own sector.
    pub fn position(&self, s: u32) -> usize {
        self.position[s as usize]
    }
}

/// Sparse action of a ladder-operator word: each domain state maps to at
/// most one codomain state with a sign.
#[derive(Clone, Debug)]
pub struct MonomialMap {
    pub targets: Vec<Option<(usize, f64)>>,
}

impl MonomialMap {
    /// Word restricted to the charge-zero block. Fails when the word does not
    /// conserve the total charge.
    pub fn on_block(block: &ChargeBlock, word: &[Ladder]) -> Result<Self> {
        if bits::charge_shift(word) != 0 {
            return Err(Error::LeavesBlock);
        }
        let targets = block
            .basis
            .iter()
            .map(|&state| {
                bits::apply_word(word, state).map(|(out, sign)| {
                    let idx = block.index_of(out).expect("charge-neutral word stays in block");
                    (idx, sign)
                })
            })
            .collect();
        Ok(MonomialMap { targets })
    }

    /// Word acting on the system sector with `k` particles. Returns the
    /// target sector and the map, or `None` when the target sector is empty.
    pub fn on_sector(sectors: &SystemSectors, k: usize, word: &[Ladder]) -> Option<(usize, Self)> {
        let out_k = k as i32 + bits::charge_shift(word);
        if out_k < 0 || out_k as usize > sectors.n() {
            return None;
        }
        let targets = sectors
            .states(k)
            .iter()
            .map(|&s| bits::apply_word(word, s).map(|(o, sign)| (sectors.position(o), sign)))
            .collect();
        Some((out_k as usize, MonomialMap { targets }))
    }

    /// Dense matrix of the map (rows: codomain of size `rows`).
    pub fn to_dense(&self, rows: usize) -> CMatrix {
        let mut m = CMatrix::zeros(rows, self.targets.len());
        for (col, t) in self.targets.iter().enumerate() {
            if let Some((row, sign)) = *t {
                m[(row, col)].re = sign;
            }
        }
        m
    }
}

/// Basis of the `Q = 0` block of the full Fock space.
#[derive(Clone, Debug)]
pub struct ChargeBlock {
    layout: ModeLayout,
    sectors: SystemSectors,
    offsets: Vec<usize>,
    basis: Vec<u32>,
    lookup: Vec<u32>,
}

impl ChargeBlock {
    pub fn new(layout: ModeLayout) -> Result<Self> {
        let n = layout.n_system();
        if layout.n_aux() != n {
            return Err(Error::InvalidLayout(
                "charge-zero block needs paired auxiliary modes".into(),
            ));
        }
        let sectors = SystemSectors::new(n);
        let mut offsets = Vec::with_capacity(n + 2);
        let mut basis = Vec::new();
        for k in 0..=n {
            offsets.push(basis.len());
            for &s in sectors.states(k) {
                for &a in sectors.states(n - k) {
                    basis.push(s | (a << n));
                }
            }
        }
        offsets.push(basis.len());
        let mut lookup = vec![u32::MAX; layout.dim()];
        for (i, &b) in basis.iter().enumerate() {
            lookup[b as usize] = i as u32;
        }
        Ok(ChargeBlock {
            layout,
            sectors,
            offsets,
            basis,
            lookup,
        })
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn n(&self) -> usize {
        self.layout.n_system()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn sectors(&self) -> &SystemSectors {
        &self.sectors
    }

    /// Full-space occupation index of each block state.
    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn index_of(&self, full_state: u32) -> Option<usize> {
        match self.lookup.get(full_state as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }

    /// Block index of `(k, s_idx, a_idx)`.
    #[inline]
    pub fn index(&self, k: usize, s_idx: usize, a_idx: usize) -> usize {
        self.offsets[k] + s_idx * self.sectors.dim(k) + a_idx
    }

    pub fn decompose(&self, idx: usize) -> (usize, usize, usize) {
        let k = self.offsets.partition_point(|&o| o <= idx) - 1;
        let local = idx - self.offsets[k];
        let d = self.sectors.dim(k);
        (k, local / d, local % d)
    }

    /// Full-space matrix with `m` placed on the block and zeros elsewhere.
    pub fn embed(&self, m: &CMatrix) -> CMatrix {
        let dim = self.layout.dim();
        let mut full = CMatrix::from_element(dim, dim, ZERO);
        for (c, &bc) in self.basis.iter().enumerate() {
            for (r, &br) in self.basis.iter().enumerate() {
                full[(br as usize, bc as usize)] = m[(r, c)];
            }
        }
        full
    }

    /// The block part of a full-space matrix.
    pub fn restrict(&self, full: &CMatrix) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |r, c| full[(self.basis[r] as usize, self.basis[c] as usize)])
    }

    pub fn restrict_vector(&self, full: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(self.dim(), self.basis.iter().map(|&b| full[b as usize]))
    }
}
