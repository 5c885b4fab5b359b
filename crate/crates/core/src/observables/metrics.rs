//! Per-snapshot quantities; ensemble estimators only ever see these.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::bits::Ladder;
use crate::fockspace::{ChargeBlock, MonomialMap, SystemSectors};
use crate::linalg::{hermiticity_error, CMatrix, HermitianEigen, C64, ZERO};

/// Eigenvalues below this are treated as zero in `√ρ` and `ρ ln ρ`.
pub const EIGEN_CLAMP: f64 = 1e-8;
/// Eigenvalues below this mean the state is corrupted.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

/// `√ρ` through the eigendecomposition, negative eigenvalues clamped to zero.
pub fn psd_sqrt(rho: &CMatrix) -> Result<CMatrix> {
    let eig = HermitianEigen::new(rho);
    check_positive(&eig, f64::NAN)?;
    Ok(eig.map(|l| C64::new(clamp(l).sqrt(), 0.0)))
}

fn clamp(l: f64) -> f64 {
    if l < EIGEN_CLAMP {
        0.0
    } else {
        l
    }
}

fn check_positive(eig: &HermitianEigen, t: f64) -> Result<()> {
    let min = eig.min();
    if min < POSITIVITY_FLOOR {
        return Err(Error::Positivity { t, min_eig: min });
    }
    Ok(())
}

/// `−Σ λ ln λ` with `0 ln 0 = 0`.
pub fn entropy_of(values: &[f64]) -> f64 {
    values.iter().map(|&l| clamp(l)).filter(|&l| l > 0.0).map(|l| -l * l.ln()).sum()
}

/// `‖(I−P₀)ρ(I−P₀)‖_F + ‖P₀ρ(I−P₀)‖_F` for a full-space `ρ`, with `P₀`
/// the projector on the charge-zero block.
pub fn leakage(full: &CMatrix, block: &ChargeBlock) -> f64 {
    let dim = full.nrows();
    let inside: Vec<bool> = (0..dim as u32).map(|s| block.index_of(s).is_some()).collect();
    let (mut out_out, mut in_out) = (0.0, 0.0);
    for c in 0..dim {
        if inside[c] {
            continue;
        }
        for r in 0..dim {
            let v = full[(r, c)].norm_sqr();
            if inside[r] {
                in_out += v;
            } else {
                out_out += v;
            }
        }
    }
    out_out.sqrt() + in_out.sqrt()
}

/// Precomputed maps of `c_i c_j†` on the charge-zero block.
#[derive(Clone, Debug)]
pub struct ObservableKit {
    n: usize,
    maps: Vec<MonomialMap>,
}

impl ObservableKit {
    pub fn new(block: &ChargeBlock) -> Self {
        let n = block.n();
        let mut maps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let word = [Ladder::Annihilate(i), Ladder::Create(j)];
                maps.push(MonomialMap::on_block(block, &word).expect("bilinear conserves charge"));
            }
        }
        ObservableKit { n, maps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn map(&self, i: usize, j: usize) -> &MonomialMap {
        &self.maps[i * self.n + j]
    }

    /// `tr[ρ c_i c_j†]`.
    pub fn correlator(&self, rho: &CMatrix, i: usize, j: usize) -> C64 {
        let mut acc = ZERO;
        for (c, t) in self.map(i, j).targets.iter().enumerate() {
            if let Some((tc, sc)) = *t {
                acc += rho[(c, tc)] * sc;
            }
        }
        acc
    }

    /// `tr[X c_i c_j† X c_j c_i†]` for Hermitian `X`.
    pub fn sandwich(&self, x: &CMatrix, i: usize, j: usize) -> C64 {
        let targets = &self.map(i, j).targets;
        let mut acc = ZERO;
        for (d, td) in targets.iter().enumerate() {
            let Some((td, sd)) = *td else { continue };
            for (c, tc) in targets.iter().enumerate() {
                let Some((tc, sc)) = *tc else { continue };
                acc += x[(td, tc)] * x[(c, d)] * (sc * sd);
            }
        }
        acc
    }
}

/// Everything the estimators need from one `ρ(t)` of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetrics {
    pub time: f64,
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eig: f64,
    /// `tr ρ²`.
    pub purity: f64,
    pub entropy: f64,
    pub leakage: f64,
    /// `tr[ρ c_i c_j†]`, row-major `N×N`.
    pub corr_re: Vec<f64>,
    pub corr_im: Vec<f64>,
    /// `tr[√ρ c_i c_j† √ρ c_j c_i†]`, row-major `N×N`.
    pub f1: Vec<f64>,
    /// `tr[ρ c_i c_j† ρ c_j c_i†]`, row-major `N×N`.
    pub f2: Vec<f64>,
    /// Largest imaginary part seen in the `f1`/`f2` traces.
    pub f_imag: f64,
}

impl SnapshotMetrics {
    /// Measures a block density matrix. `leakage` comes from the caller:
    /// a block-resident state cannot leak, a full-space one is measured
    /// with [`leakage`].
    pub fn measure(kit: &ObservableKit, rho: &CMatrix, time: f64, leakage: f64) -> Result<Self> {
        let n = kit.n();
        let eig = HermitianEigen::new(rho);
        check_positive(&eig, time)?;
        let sqrt = eig.map(|l| C64::new(clamp(l).sqrt(), 0.0));
        let mut m = SnapshotMetrics {
            time,
            trace: crate::linalg::trace(rho).re,
            hermiticity: hermiticity_error(rho),
            min_eig: eig.min(),
            purity: rho.iter().map(|v| v.norm_sqr()).sum(),
            entropy: entropy_of(eig.values.as_slice()),
            leakage,
            corr_re: vec![0.0; n * n],
            corr_im: vec![0.0; n * n],
            f1: vec![0.0; n * n],
            f2: vec![0.0; n * n],
            f_imag: 0.0,
        };
        for i in 0..n {
            for j in 0..n {
                let c = kit.correlator(rho, i, j);
                m.corr_re[i * n + j] = c.re;
                m.corr_im[i * n + j] = c.im;
                let f1 = kit.sandwich(&sqrt, i, j);
                let f2 = kit.sandwich(rho, i, j);
                m.f1[i * n + j] = f1.re;
                m.f2[i * n + j] = f2.re;
                m.f_imag = m.f_imag.max(f1.im.abs()).max(f2.im.abs());
            }
        }
        Ok(m)
    }
}

/// Heisenberg-picture probe of `G(u) = 2^{−N} tr[W† c_i W c_i†]`, with `W`
/// the accumulated system unitary, averaged over `i`.
#[derive(Clone, Debug)]
pub struct TwoPointProbe {
    n: usize,
    /// `lower[i][k]`: `c_i` from sector `k+1` into sector `k`.
    lower: Vec<Vec<CMatrix>>,
    accumulated: Vec<CMatrix>,
}

impl TwoPointProbe {
    pub fn new(sectors: &SystemSectors) -> Self {
        let n = sectors.n();
        let lower = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let (out_k, map) = MonomialMap::on_sector(sectors, k + 1, &[Ladder::Annihilate(i)])
                            .expect("lowering stays in range");
                        debug_assert_eq!(out_k, k);
                        map.to_dense(sectors.dim(k))
                    })
                    .collect()
            })
            .collect();
        let accumulated = (0..=n).map(|k| CMatrix::identity(sectors.dim(k), sectors.dim(k))).collect();
        TwoPointProbe { n, lower, accumulated }
    }

    /// Left-multiplies the accumulated evolution by one step's propagators.
    pub fn push(&mut self, u: &[CMatrix]) {
        for (w, uk) in self.accumulated.iter_mut().zip(u) {
            *w = uk * &*w;
        }
    }

    pub fn value(&self) -> C64 {
        let w = &self.accumulated;
        let mut total = ZERO;
        for lower in &self.lower {
            for (k, c) in lower.iter().enumerate() {
                // tr[W_k† C W_{k+1} C†]
                let m = w[k].adjoint() * c * &w[k + 1] * c.adjoint();
                total += crate::linalg::trace(&m);
            }
        }
        total / (self.n as f64 * 2f64.powi(self.n as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::BlockDensity;
    use crate::fockspace::ModeLayout;
    use crate::linalg::frobenius;

    fn block(n: usize) -> ChargeBlock {
        ChargeBlock::new(ModeLayout::new(n).unwrap()).unwrap()
    }

    #[test]
    fn sqrt_of_pure_state_is_itself() {
        let b = block(2);
        let rho = BlockDensity::epr(&b).to_matrix(&b);
        let s = psd_sqrt(&rho).unwrap();
        assert!(frobenius(&(&s - &rho)) < 1e-10);
    }

    #[test]
    fn sqrt_of_identity() {
        let d = 6;
        let rho = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
        let s = psd_sqrt(&rho).unwrap();
        let expected = CMatrix::identity(d, d) / C64::new((d as f64).sqrt(), 0.0);
        assert!(frobenius(&(&s - &expected)) < 1e-12);
    }

    #[test]
    fn sqrt_rejects_corrupted_state() {
        let mut rho = CMatrix::identity(3, 3) * C64::new(0.5, 0.0);
        rho[(2, 2)] = C64::new(-1e-3, 0.0);
        assert!(matches!(psd_sqrt(&rho), Err(Error::Positivity { .. })));
    }

    #[test]
    fn epr_metrics() {
        let b = block(3);
        let kit = ObservableKit::new(&b);
        let rho = BlockDensity::epr(&b).to_matrix(&b);
        let m = SnapshotMetrics::measure(&kit, &rho, 0.0, 0.0).unwrap();
        assert!((m.purity - 1.0).abs() < 1e-14);
        assert!(m.entropy.abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let c = m.corr_re[i * 3 + j];
                if i == j {
                    assert!((c - 0.5).abs() < 1e-14);
                } else {
                    assert_eq!(c, 0.0);
                    assert!(m.f1[i * 3 + j].abs() < 1e-14 && m.f2[i * 3 + j].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sandwich_matches_dense_products() {
        let b = block(2);
        let kit = ObservableKit::new(&b);
        let d = b.dim();
        let x = CMatrix::from_fn(d, d, |r, c| C64::new((r * c) as f64 * 0.1, r as f64 - c as f64));
        let x = &x + x.adjoint();
        let a = MonomialMap::on_block(&b, &[Ladder::Annihilate(0), Ladder::Create(1)])
            .unwrap()
            .to_dense(d);
        let dense = crate::linalg::trace(&(&x * &a * &x * a.adjoint()));
        assert!((kit.sandwich(&x, 0, 1) - dense).norm() < 1e-10);
        let c = crate::linalg::trace(&(&x * &a));
        assert!((kit.correlator(&x, 0, 1) - c).norm() < 1e-12);
    }

    #[test]
    fn leakage_detects_injected_coherence() {
        let b = block(2);
        let rho = b.embed(&BlockDensity::epr(&b).to_matrix(&b));
        assert_eq!(leakage(&rho, &b), 0.0);
        let eps = 1e-5;
        let mut bad = rho.clone();
        // state 0 (empty) lies outside the charge-zero block
        bad[(0, 3)] += C64::new(eps, 0.0);
        bad[(3, 0)] += C64::new(eps, 0.0);
        let l = leakage(&bad, &b);
        assert!(l > eps / 2.0 && l < 2.0 * eps, "{l}");
    }

    #[test]
    fn two_point_probe_starts_at_half() {
        let probe = TwoPointProbe::new(&SystemSectors::new(3));
        assert!((probe.value() - C64::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        let v = vec![0.25; 4];
        assert!((entropy_of(&v) - 4f64.ln()).abs() < 1e-14);
    }
}
