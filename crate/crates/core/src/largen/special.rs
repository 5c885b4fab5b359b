use crate::error::{Error, Result};

pub const GAMMA_DOMAIN: (f64, f64) = (0.1, 30.0);

/// Euler's Gamma function on `[0.1, 30]` (Lanczos approximation, relative
/// error near machine precision).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(GAMMA_DOMAIN.0..=GAMMA_DOMAIN.1).contains(&x) {
        return Err(Error::Domain {
            what: "gamma function argument",
            value: x,
        });
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Bisection on `[lo, hi]` for a sign change of `f`; stops when the bracket
/// is narrower than `tol` or after 400 halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
