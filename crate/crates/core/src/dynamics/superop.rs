//! Real superoperators acting block by block on a [`BlockDensity`].

use nalgebra::DMatrix;

use super::lindblad::SectorJumps;
use super::state::BlockDensity;

/// One real `R×R` matrix per sector pair, acting on the system-pair index.
/// Generators store every block; in propagators `None` marks the identity.
#[derive(Clone, Debug)]
pub struct SectorSuperop {
    n: usize,
    maps: Vec<Option<DMatrix<f64>>>,
}

impl SectorSuperop {
    pub fn identity(n: usize) -> Self {
        SectorSuperop {
            n,
            maps: vec![None; (n + 1) * (n + 1)],
        }
    }

    /// Sum of the generators of several jump families (at least one).
    pub fn generator(n: usize, families: &[&SectorJumps]) -> Self {
        let mut maps = Vec::with_capacity((n + 1) * (n + 1));
        for k in 0..=n {
            for kp in 0..=n {
                let mut acc: Option<DMatrix<f64>> = None;
                for fam in families {
                    if fam.rate == 0.0 {
                        continue;
                    }
                    let s = fam.superoperator(k, kp);
                    acc = Some(match acc {
                        Some(a) => a + s,
                        None => s,
                    });
                }
                let r = families.first().map_or(0, |f| f.kernels[k].nrows() * f.kernels[kp].nrows());
                maps.push(Some(acc.unwrap_or_else(|| DMatrix::zeros(r, r))));
            }
        }
        SectorSuperop { n, maps }
    }

    /// Largest absolute row sum over all blocks; bounds the spectral radius.
    pub fn max_row_sum(&self) -> f64 {
        self.maps
            .iter()
            .flatten()
            .flat_map(|m| m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(Option::is_none)
    }

    /// `Σ_{m≤4} (hS)^m / m!`: one classical RK4 step of `dρ/dt = S ρ`,
    /// which for a linear generator is exactly this polynomial.
    pub fn rk4_propagator(&self, h: f64) -> Self {
        let maps = self
            .maps
            .iter()
            .map(|m| {
                m.as_ref().filter(|s| s.iter().any(|&v| v != 0.0)).map(|s| {
                    let dim = s.nrows();
                    let id = DMatrix::<f64>::identity(dim, dim);
                    let a = s * h;
                    let mut p = &id + &a * 0.25;
                    p = &id + &a * &p * (1.0 / 3.0);
                    p = &id + &a * &p * 0.5;
                    &id + &a * &p
                })
            })
            .collect();
        SectorSuperop { n: self.n, maps }
    }

    /// Composition `self ∘ self`.
    pub fn squared(&self) -> Self {
        SectorSuperop {
            n: self.n,
            maps: self.maps.iter().map(|m| m.as_ref().map(|p| p * p)).collect(),
        }
    }

    /// `out = S ρ` for every block.
    pub fn apply(&self, rho: &BlockDensity, out: &mut BlockDensity) {
        for k in 0..=self.n {
            for kp in 0..=self.n {
                let (src_re, src_im) = rho.block(k, kp);
                let (dst_re, dst_im) = out.block_mut(k, kp);
                match &self.maps[k * (self.n + 1) + kp] {
                    None => {
                        dst_re.copy_from_slice(src_re);
                        dst_im.copy_from_slice(src_im);
                    }
                    Some(p) => apply_rows(p, src_re, src_im, dst_re, dst_im),
                }
            }
        }
    }

    pub fn apply_in_place(&self, rho: &mut BlockDensity, scratch: &mut Vec<f64>) {
        for k in 0..=self.n {
            for kp in 0..=self.n {
                if let Some(p) = &self.maps[k * (self.n + 1) + kp] {
                    let (re, im) = rho.block_mut(k, kp);
                    let len = re.len();
                    scratch.clear();
                    scratch.resize(2 * len, 0.0);
                    let (s_re, s_im) = scratch.split_at_mut(len);
                    apply_rows(p, re, im, s_re, s_im);
                    re.copy_from_slice(s_re);
                    im.copy_from_slice(s_im);
                }
            }
        }
    }
}

/// `dst[r, :] = Σ_x p[r, x] src[x, :]` with rows of length `R`, applied to
/// the real and imaginary parts together.
fn apply_rows(p: &DMatrix<f64>, src_re: &[f64], src_im: &[f64], dst_re: &mut [f64], dst_im: &mut [f64]) {
    let big_r = p.nrows();
    for r in 0..big_r {
        let o_re = &mut dst_re[r * big_r..(r + 1) * big_r];
        let o_im = &mut dst_im[r * big_r..(r + 1) * big_r];
        o_re.fill(0.0);
        o_im.fill(0.0);
        for x in 0..big_r {
            let w = p[(r, x)];
            if w == 0.0 {
                continue;
            }
            let x_re = &src_re[x * big_r..(x + 1) * big_r];
            let x_im = &src_im[x * big_r..(x + 1) * big_r];
            for (((a, b), &c), &d) in o_re.iter_mut().zip(o_im.iter_mut()).zip(x_re).zip(x_im) {
                *a += w * c;
                *b += w * d;
            }
        }
    }
}
