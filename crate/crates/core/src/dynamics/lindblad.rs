//! Charge-neutral bath: jump operators `L_ij = c_i c_j†` at rate `γ/N`.

use nalgebra::DMatrix;

use super::couplings::fermion_pairs;
use super::hamiltonian::quartic_word;
use crate::fockspace::bits::Ladder;
use crate::fockspace::{FockOperator, MonomialMap, ModeLayout, SystemSectors};
use crate::linalg::{CMatrix, C64};

/// A set of jump operators sharing one rate, with `Σ L†L` cached.
#[derive(Clone, Debug)]
pub struct JumpSet {
    pub rate: f64,
    pub ops: Vec<FockOperator>,
    kernel: CMatrix,
}

impl JumpSet {
    pub fn new(rate: f64, ops: Vec<FockOperator>) -> Self {
        let dim = ops.first().map_or(0, |o| o.matrix.nrows());
        let mut kernel = CMatrix::zeros(dim, dim);
        for l in &ops {
            kernel += l.matrix.adjoint() * &l.matrix;
        }
        JumpSet { rate, ops, kernel }
    }

    /// `Σ_ij L_ij†L_ij`.
    pub fn kernel(&self) -> &CMatrix {
        &self.kernel
    }
}

/// Ladder words `c_i c_j†` over ordered pairs, optionally skipping `i = j`.
pub fn bath_words(n: usize, include_diagonal: bool) -> Vec<Vec<Ladder>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j && !include_diagonal {
                continue;
            }
            out.push(vec![Ladder::Annihilate(i), Ladder::Create(j)]);
        }
    }
    out
}

/// The quartic monomials `c_P† c_Q` over all ordered pairs of pairs.
pub fn noise_words(n: usize) -> Vec<Vec<Ladder>> {
    let pairs = fermion_pairs(n);
    let mut out = Vec::new();
    for &p in &pairs {
        for &q in &pairs {
            out.push(quartic_word(p, q).to_vec());
        }
    }
    out
}

/// Full-space bath jump set with rate `γ/N`.
pub fn bath_jumps(layout: ModeLayout, gamma: f64, include_diagonal: bool) -> JumpSet {
    let ops = bath_words(layout.n_system(), include_diagonal)
        .iter()
        .map(|w| FockOperator::from_word(w, layout).expect("system modes are in range"))
        .collect();
    JumpSet::new(gamma / layout.n_system() as f64, ops)
}

/// `D[ρ] = r Σ_L (L ρ L† − ½{L†L, ρ})`.
pub fn dissipator(rho: &CMatrix, jumps: &JumpSet) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for l in &jumps.ops {
        out += &l.matrix * rho * l.matrix.adjoint();
    }
    let k = jumps.kernel();
    out -= (k * rho + rho * k) * C64::new(0.5, 0.0);
    out * C64::new(jumps.rate, 0.0)
}

/// Real jump matrices restricted to each system sector, plus `Σ L†L`.
#[derive(Clone, Debug)]
pub struct SectorJumps {
    pub rate: f64,
    /// `ops[k][m]`: jump `m` inside sector `k`.
    pub ops: Vec<Vec<DMatrix<f64>>>,
    pub kernels: Vec<DMatrix<f64>>,
}

impl SectorJumps {
    pub fn new(sectors: &SystemSectors, words: &[Vec<Ladder>], rate: f64) -> Self {
        let n = sectors.n();
        let mut ops = Vec::with_capacity(n + 1);
        let mut kernels = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let d = sectors.dim(k);
            let mut list = Vec::with_capacity(words.len());
            let mut kernel = DMatrix::<f64>::zeros(d, d);
            for w in words {
                let m = match MonomialMap::on_sector(sectors, k, w) {
                    Some((out_k, map)) => {
                        assert_eq!(out_k, k, "jump operators conserve the system charge");
                        real_matrix(&map, d)
                    }
                    None => DMatrix::zeros(d, d),
                };
                kernel += m.transpose() * &m;
                list.push(m);
            }
            ops.push(list);
            kernels.push(kernel);
        }
        SectorJumps { rate, ops, kernels }
    }

    /// Generator acting on the `(k, k')` coherence block, vectorized
    /// row-major: index `s·d_k' + s'`.
    pub fn superoperator(&self, k: usize, kp: usize) -> DMatrix<f64> {
        let dk = self.kernels[k].nrows();
        let dkp = self.kernels[kp].nrows();
        let mut s = DMatrix::<f64>::zeros(dk * dkp, dk * dkp);
        for (a, b) in self.ops[k].iter().zip(&self.ops[kp]) {
            s += a.kronecker(b);
        }
        s -= self.kernels[k].kronecker(&DMatrix::identity(dkp, dkp)) * 0.5;
        s -= DMatrix::identity(dk, dk).kronecker(&self.kernels[kp].transpose()) * 0.5;
        s * self.rate
    }
}

fn real_matrix(map: &MonomialMap, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for (col, t) in map.targets.iter().enumerate() {
        if let Some((row, sign)) = *t {
            m[(row, col)] = sign;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{build_annihilator, build_creator};
    use crate::linalg::{hermiticity_error, trace};

    fn random_density(dim: usize, seed: u64) -> CMatrix {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = &a * a.adjoint();
        let t = trace(&rho);
        rho / t
    }

    #[test]
    fn dissipator_is_traceless_and_hermitian() {
        let layout = ModeLayout::new(2).unwrap();
        let jumps = bath_jumps(layout, 0.3, true);
        assert_eq!(jumps.ops.len(), 4);
        let rho = random_density(layout.dim(), 4);
        let d = dissipator(&rho, &jumps);
        assert!(trace(&d).norm() < 1e-12);
        assert!(hermiticity_error(&d) < 1e-12);
    }

    #[test]
    fn bath_jumps_are_ladder_products() {
        let layout = ModeLayout::new(2).unwrap();
        let jumps = bath_jumps(layout, 1.0, false);
        assert_eq!(jumps.ops.len(), 2);
        let expected = build_annihilator(0, layout)
            .unwrap()
            .dot(&build_creator(1, layout).unwrap());
        assert_eq!(jumps.ops[0].matrix, expected.matrix);
        assert!((jumps.rate - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sector_superoperator_matches_dense_dissipator() {
        let n = 3;
        let layout = ModeLayout::system_only(n).unwrap();
        let sectors = SystemSectors::new(n);
        let gamma = 0.7;
        let dense = bath_jumps(layout, gamma, true);
        let sj = SectorJumps::new(&sectors, &bath_words(n, true), gamma / n as f64);
        let rho = random_density(layout.dim(), 8);
        let d = dissipator(&rho, &dense);
        for k in 0..=n {
            for kp in 0..=n {
                let (sk, skp) = (sectors.states(k), sectors.states(kp));
                let x: Vec<C64> = sk
                    .iter()
                    .flat_map(|&a| skp.iter().map(move |&b| (a, b)))
                    .map(|(a, b)| rho[(a as usize, b as usize)])
                    .collect();
                let s = sj.superoperator(k, kp);
                for (r, (a, b)) in sk.iter().flat_map(|&a| skp.iter().map(move |&b| (a, b))).enumerate() {
                    let mut v = C64::new(0.0, 0.0);
                    for (c, xc) in x.iter().enumerate() {
                        v += xc * s[(r, c)];
                    }
                    // Coherences between different sectors only see their own blocks.
                    assert!((v - d[(a as usize, b as usize)]).norm() < 1e-12, "k={k} k'={kp}");
                }
            }
        }
    }

    #[test]
    fn noise_words_count() {
        assert_eq!(noise_words(4).len(), 36);
        assert_eq!(noise_words(1).len(), 0);
    }
}
