//! Operator algebra on the combined system + auxiliary Fock space.
//!
//! Modes are ordered `c_0 … c_{N-1}, ξ_0 … ξ_{N-1}` and realized through a
//! Jordan–Wigner transformation in that fixed order, so every matrix built
//! here is reproducible bit for bit. The algebra is the standard one,
//! `{a_m, a_n†} = δ_mn`, `{a_m, a_n} = 0`.

pub mod bits;
pub mod block;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, CMatrix, C64, ONE, ZERO};
use bits::Ladder;

pub use block::{ChargeBlock, MonomialMap, SystemSectors};

/// Dense storage caps the total number of modes.
pub const MAX_MODES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLayout {
    n_system: usize,
    n_aux: usize,
}

impl ModeLayout {
    /// `n` system fermions, each paired with one auxiliary fermion.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLayout("need at least one system mode".into()));
        }
        if 2 * n > MAX_MODES {
            return Err(Error::InvalidLayout(format!(
                "{} modes exceed the dense limit of {MAX_MODES}",
                2 * n
            )));
        }
        Ok(ModeLayout { n_system: n, n_aux: n })
    }

    /// The system modes alone, for quantities that never touch the auxiliaries.
    pub fn system_only(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_MODES {
            return Err(Error::InvalidLayout(format!("{n} system modes")));
        }
        Ok(ModeLayout { n_system: n, n_aux: 0 })
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_aux(&self) -> usize {
        self.n_aux
    }

    pub fn total_modes(&self) -> usize {
        self.n_system + self.n_aux
    }

    pub fn dim(&self) -> usize {
        1 << self.total_modes()
    }

    pub fn system_mode(&self, i: usize) -> usize {
        i
    }

    pub fn aux_mode(&self, i: usize) -> usize {
        self.n_system + i
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.total_modes() {
            return Err(Error::ModeOutOfRange {
                mode,
                total: self.total_modes(),
            });
        }
        Ok(())
    }
}

/// Dense operator on the Fock space of a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub matrix: CMatrix,
    pub layout: ModeLayout,
}

impl FockOperator {
    pub fn new(matrix: CMatrix, layout: ModeLayout) -> Result<Self> {
        if matrix.nrows() != layout.dim() || matrix.ncols() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: matrix.nrows(),
            });
        }
        Ok(FockOperator { matrix, layout })
    }

    pub fn zeros(layout: ModeLayout) -> Self {
        FockOperator {
            matrix: CMatrix::zeros(layout.dim(), layout.dim()),
            layout,
        }
    }

    pub fn identity(layout: ModeLayout) -> Self {
        FockOperator {
            matrix: CMatrix::identity(layout.dim(), layout.dim()),
            layout,
        }
    }

    /// Matrix of a normal-ordered word of ladder operators.
    pub fn from_word(word: &[Ladder], layout: ModeLayout) -> Result<Self> {
        for op in word {
            match *op {
                Ladder::Create(m) | Ladder::Annihilate(m) => layout.check_mode(m)?,
            }
        }
        let dim = layout.dim();
        let mut matrix = CMatrix::zeros(dim, dim);
        for col in 0..dim as u32 {
            if let Some((row, sign)) = bits::apply_word(word, col) {
                matrix[(row as usize, col as usize)] = C64::new(sign, 0.0);
            }
        }
        Ok(FockOperator { matrix, layout })
    }

    pub fn adjoint(&self) -> Self {
        FockOperator {
            matrix: self.matrix.adjoint(),
            layout: self.layout,
        }
    }

    pub fn dot(&self, other: &FockOperator) -> Self {
        FockOperator {
            matrix: &self.matrix * &other.matrix,
            layout: self.layout,
        }
    }

    pub fn plus(&self, other: &FockOperator) -> Self {
        FockOperator {
            matrix: &self.matrix + &other.matrix,
            layout: self.layout,
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        FockOperator {
            matrix: &self.matrix * factor,
            layout: self.layout,
        }
    }

    pub fn anticommutator(&self, other: &FockOperator) -> Self {
        FockOperator {
            matrix: crate::linalg::anticommutator(&self.matrix, &other.matrix),
            layout: self.layout,
        }
    }

    pub fn commutator(&self, other: &FockOperator) -> Self {
        FockOperator {
            matrix: crate::linalg::commutator(&self.matrix, &other.matrix),
            layout: self.layout,
        }
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    /// Frobenius norm of everything off the diagonal.
    pub fn off_diagonal_norm(&self) -> f64 {
        let dim = self.matrix.nrows();
        let mut acc = 0.0;
        for c in 0..dim {
            for r in 0..dim {
                if r != c {
                    acc += self.matrix[(r, c)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

/// Annihilation operator for `mode` (system modes first, then auxiliaries).
pub fn build_annihilator(mode: usize, layout: ModeLayout) -> Result<FockOperator> {
    FockOperator::from_word(&[Ladder::Annihilate(mode)], layout)
}

pub fn build_creator(mode: usize, layout: ModeLayout) -> Result<FockOperator> {
    FockOperator::from_word(&[Ladder::Create(mode)], layout)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: DVector<C64>,
    pub layout: ModeLayout,
}

impl StateVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn expectation(&self, op: &FockOperator) -> C64 {
        (self.amplitudes.adjoint() * (&op.matrix * &self.amplitudes))[(0, 0)]
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// `|EPR⟩ = Π_i (c_i† + ξ_i†)/√2 |0⟩`, product ordered by ascending `i`.
///
/// Every pair `(c_i, ξ_i)` holds exactly one fermion.
pub fn build_epr_state(layout: ModeLayout) -> Result<StateVector> {
    if layout.n_aux() != layout.n_system() {
        return Err(Error::InvalidLayout(
            "the EPR state needs one auxiliary mode per system mode".into(),
        ));
    }
    let dim = layout.dim();
    let mut amps = vec![ZERO; dim];
    amps[0] = ONE;
    let norm = std::f64::consts::FRAC_1_SQRT_2;
    for i in (0..layout.n_system()).rev() {
        let mut next = vec![ZERO; dim];
        for (state, &a) in amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for mode in [layout.system_mode(i), layout.aux_mode(i)] {
                if let Some((s, sign)) = bits::create(state as u32, mode) {
                    next[s as usize] += a * (sign * norm);
                }
            }
        }
        amps = next;
    }
    Ok(StateVector {
        amplitudes: DVector::from_vec(amps),
        layout,
    })
}

/// The charges relevant to the strong symmetry.
#[derive(Clone, Debug)]
pub struct ChargeSet {
    /// `Q = Σ_i (c_i†c_i + ξ_i†ξ_i − 1)`.
    pub total: FockOperator,
    /// `Q_c = Σ_i c_i†c_i`.
    pub system: FockOperator,
    /// `ξ_i†ξ_i` for each auxiliary mode.
    pub aux_numbers: Vec<FockOperator>,
}

fn number_operator(mode: usize, layout: ModeLayout) -> FockOperator {
    let dim = layout.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        if s >> mode & 1 == 1 {
            m[(s, s)] = ONE;
        }
    }
    FockOperator { matrix: m, layout }
}

pub fn build_charges(layout: ModeLayout) -> ChargeSet {
    let n = layout.n_system();
    let mut system = FockOperator::zeros(layout);
    for i in 0..n {
        system = system.plus(&number_operator(layout.system_mode(i), layout));
    }
    let aux_numbers: Vec<_> = (0..layout.n_aux())
        .map(|i| number_operator(layout.aux_mode(i), layout))
        .collect();
    let mut total = system.clone();
    for a in &aux_numbers {
        total = total.plus(a);
    }
    total = total.plus(&FockOperator::identity(layout).scaled(C64::new(-(n as f64), 0.0)));
    ChargeSet {
        total,
        system,
        aux_numbers,
    }
}

/// Orthogonal projector onto one eigenspace of a diagonal charge.
#[derive(Clone, Debug)]
pub struct Projector {
    pub op: FockOperator,
    pub charge: i64,
    pub rank: usize,
}

impl Projector {
    /// True when the requested eigenvalue does not occur in the spectrum.
    pub fn is_empty(&self) -> bool {
        self.rank == 0
    }
}

pub fn block_projector(charge_value: i64, charge: &FockOperator) -> Result<Projector> {
    let off = charge.off_diagonal_norm();
    if off > 1e-12 {
        return Err(Error::NotDiagonal(off));
    }
    let dim = charge.matrix.nrows();
    let mut m = CMatrix::zeros(dim, dim);
    let mut rank = 0;
    for s in 0..dim {
        if (charge.matrix[(s, s)].re - charge_value as f64).abs() < 1e-9 {
            m[(s, s)] = ONE;
            rank += 1;
        }
    }
    Ok(Projector {
        op: FockOperator {
            matrix: m,
            layout: charge.layout,
        },
        charge: charge_value,
        rank,
    })
}
