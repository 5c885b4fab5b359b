//! Large-N saddle point of the replicated Keldysh action.
//!
//! All densities are per fermion and per unit time. The early-time saddle
//! is governed by the inter-replica field `φ` through
//!
//! `f(φ) = nγ/4 + nφ²/γ − nφ²/(2Γ) − c_n Γ^{1−n} φⁿ`,
//!
//! with `c_n = 2^{n−1} Υ(n−½) / (√π Υ(n))` and `Γ = J/2^{q−2}`. The late-time
//! saddle is the sector-maximally-mixed state.

mod special;

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use special::{bisect, gamma_fn, GAMMA_DOMAIN};

/// `γ/Γ` above which early-saddle results carry a warning.
pub const WEAK_DECOHERENCE_LIMIT: f64 = 0.2;
/// Replica offset used for numeric `n → 1` continuations.
pub const REPLICA_EPS: f64 = 1e-6;
/// Saturated entropy per fermion, `2 ln 2`.
pub const SATURATION: f64 = 2.0 * LN_2;
/// Rényi correlator of the late-time saddle.
pub const LATE_CORRELATOR: f64 = 0.25;

/// `Γ = J / 2^{q−2}`.
pub fn decay_rate(j: f64, q: u32) -> Result<f64> {
    if q < 4 || !q.is_multiple_of(2) {
        return Err(Error::Domain {
            what: "interaction order q",
            value: q as f64,
        });
    }
    Ok(j / 2f64.powi(q as i32 - 2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleInput {
    /// Replica index.
    pub n: f64,
    pub gamma: f64,
    pub j: f64,
    #[serde(default = "default_q")]
    pub q: u32,
}

fn default_q() -> u32 {
    4
}

impl SaddleInput {
    pub fn new(n: f64, gamma: f64, j: f64) -> Self {
        SaddleInput { n, gamma, j, q: 4 }
    }

    /// Input with a prescribed `Γ` (sets `J = Γ·2^{q−2}` at `q = 4`).
    pub fn with_decay(n: f64, gamma: f64, decay: f64) -> Self {
        SaddleInput::new(n, gamma, 4.0 * decay)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 1.0) || !self.n.is_finite() {
            return Err(Error::config("n", "replica index must be ≥ 1"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config("gamma", "must be finite and non-negative"));
        }
        if !(self.j > 0.0) || !self.j.is_finite() {
            return Err(Error::config("j", "must be positive"));
        }
        decay_rate(self.j, self.q).map(|_| ())
    }

    pub fn decay(&self) -> f64 {
        decay_rate(self.j, self.q).expect("validated q")
    }

    /// Validity warnings for early-saddle results.
    pub fn warnings(&self) -> Vec<String> {
        let ratio = self.gamma / self.decay();
        if ratio > WEAK_DECOHERENCE_LIMIT {
            vec![format!("gamma/Gamma = {ratio:.3} exceeds the weak-decoherence limit {WEAK_DECOHERENCE_LIMIT}")]
        } else {
            Vec::new()
        }
    }

    fn at_n(&self, n: f64) -> Self {
        SaddleInput { n, ..*self }
    }
}

/// `c_n = 2^{n−1} Υ(n−½) / (√π Υ(n))`.
pub fn c_n(n: f64) -> Result<f64> {
    Ok(2f64.powf(n - 1.0) * gamma_fn(n - 0.5)? / (PI.sqrt() * gamma_fn(n)?))
}

/// Full action density.
pub fn action_density(phi: f64, input: &SaddleInput) -> Result<f64> {
    let decay = input.decay();
    Ok(action_density_leading(phi, input)? - input.n * phi * phi / (2.0 * decay))
}

/// Action density without the `−nφ²/(2Γ)` term, i.e. to leading order in
/// `γ/Γ`; its stationary point is the closed-form `φ*`.
pub fn action_density_leading(phi: f64, input: &SaddleInput) -> Result<f64> {
    let SaddleInput { n, gamma, .. } = *input;
    let decay = input.decay();
    let quad = if gamma > 0.0 { n * phi * phi / gamma } else { 0.0 };
    Ok(n * gamma / 4.0 + quad - c_n(n)? * decay.powf(1.0 - n) * phi.powf(n))
}

fn leading_slope(phi: f64, input: &SaddleInput, cn: f64) -> f64 {
    let SaddleInput { n, gamma, .. } = *input;
    2.0 * n * phi / gamma - n * cn * input.decay().powf(1.0 - n) * phi.powf(n - 1.0)
}

fn full_slope(phi: f64, input: &SaddleInput, cn: f64) -> f64 {
    leading_slope(phi, input, cn) - input.n * phi / input.decay()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMethod {
    /// Closed-form stationary point, `n ∈ [1, 2)`.
    Closed,
    /// Root of `∂f/∂φ` for the leading-order action.
    Numeric,
    /// Root of `∂f/∂φ` for the full action, including `−nφ²/(2Γ)`.
    NumericFull,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiStatus {
    Stationary,
    /// No stationary point in `(0, Γ]`: the boundary value `φ = 0` is used.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiStar {
    pub value: f64,
    pub method: PhiMethod,
    pub status: PhiStatus,
}

/// Relative tolerance of the numeric root in `φ`.
pub const PHI_TOLERANCE: f64 = 1e-12;

pub fn phi_star(input: &SaddleInput, method: PhiMethod) -> Result<PhiStar> {
    input.validate()?;
    let SaddleInput { n, gamma, .. } = *input;
    let decay = input.decay();
    let stationary = |value| PhiStar {
        value,
        method,
        status: PhiStatus::Stationary,
    };
    if gamma == 0.0 || n == 2.0 {
        return Ok(stationary(0.0));
    }
    match method {
        PhiMethod::Closed => {
            if n >= 2.0 {
                return Err(Error::Domain {
                    what: "replica index for closed-form φ*",
                    value: n,
                });
            }
            let base = gamma * decay.powf(1.0 - n) * gamma_fn(n - 0.5)? / (PI.sqrt() * gamma_fn(n)?);
            Ok(stationary(0.5 * base.powf(1.0 / (2.0 - n))))
        }
        PhiMethod::Numeric | PhiMethod::NumericFull => {
            let cn = c_n(n)?;
            let slope = |phi: f64| match method {
                PhiMethod::NumericFull => full_slope(phi, input, cn),
                _ => leading_slope(phi, input, cn),
            };
            // Bisect in ln φ: the root spans tens of decades as n → 2.
            let lo = (f64::MIN_POSITIVE * 1e10).ln();
            let root = if n > 1.0 {
                bisect(|x| slope(x.exp()), lo, decay.ln(), PHI_TOLERANCE)
            } else {
                bisect(slope, 0.0, decay, PHI_TOLERANCE * decay).map(f64::ln)
            };
            Ok(match root {
                Some(x) => stationary(x.exp()),
                None => PhiStar {
                    value: 0.0,
                    method,
                    status: PhiStatus::Boundary,
                },
            })
        }
    }
}

/// `φ*` for general `n`: closed form on `[1, 2)`, `0` at `n = 2`, numeric
/// otherwise.
pub fn default_phi(input: &SaddleInput) -> Result<PhiStar> {
    if input.n < 2.0 {
        phi_star(input, PhiMethod::Closed)
    } else {
        phi_star(input, PhiMethod::Numeric)
    }
}

/// `F⁽ⁿ⁾ = (2ⁿ/π) Υ((n+1)/2)² / Υ(n/2+2)² · (φ/Γ)ⁿ` at a given `φ`.
pub fn early_correlator_at(phi: f64, input: &SaddleInput) -> Result<f64> {
    let n = input.n;
    let g = gamma_fn((n + 1.0) / 2.0)? / gamma_fn(n / 2.0 + 2.0)?;
    Ok(2f64.powf(n) / PI * g * g * (phi / input.decay()).powf(n))
}

/// Early-saddle correlator with `φ = φ*`; `n = 1` uses the closed limit
/// `16γ/(9π²Γ)`.
pub fn early_correlator(input: &SaddleInput) -> Result<f64> {
    input.validate()?;
    if input.n == 1.0 {
        return Ok(wightman_limit(input));
    }
    early_correlator_at(default_phi(input)?.value, input)
}

/// `16γ/(9π²Γ)`.
pub fn wightman_limit(input: &SaddleInput) -> f64 {
    16.0 / (9.0 * PI * PI) * input.gamma / input.decay()
}

/// `s₀ = (γ/2) ln(4√e Γ/γ)`.
pub fn s0(input: &SaddleInput) -> Result<f64> {
    let decay = input.decay();
    if input.gamma == 0.0 {
        return Ok(0.0);
    }
    if input.gamma >= decay {
        return Err(Error::Domain {
            what: "gamma/Gamma for the replica limit",
            value: input.gamma / decay,
        });
    }
    Ok(0.5 * input.gamma * (4.0 * 0.5f64.exp() * decay / input.gamma).ln())
}

/// `(γ/2) ln(4eΓ/γ)`, the envelope-theorem limit of `f(φ*, n)/(n−1)`.
pub fn s0_envelope(input: &SaddleInput) -> f64 {
    if input.gamma == 0.0 {
        return 0.0;
    }
    0.5 * input.gamma * (4.0 * 1f64.exp() * input.decay() / input.gamma).ln()
}

/// `f(φ*, 1+ε)/ε` for the leading-order action, evaluated numerically.
pub fn s0_continuation(input: &SaddleInput) -> Result<f64> {
    if input.gamma == 0.0 {
        return Ok(0.0);
    }
    let shifted = input.at_n(1.0 + REPLICA_EPS);
    let phi = phi_star(&shifted, PhiMethod::Numeric)?.value;
    Ok(action_density_leading(phi, &shifted)? / REPLICA_EPS)
}

/// Growth rate of `S⁽ⁿ⁾/N` on the early saddle.
pub fn entropy_rate(input: &SaddleInput) -> Result<f64> {
    input.validate()?;
    let n = input.n;
    if input.gamma == 0.0 {
        return Ok(0.0);
    }
    if n == 2.0 {
        return Ok(input.gamma / 2.0);
    }
    if n == 1.0 {
        return s0(input);
    }
    let phi = default_phi(input)?.value;
    Ok(action_density(phi, input)? / (n - 1.0))
}

/// Time at which linear growth reaches `2 ln 2` per fermion, for `n ∈ {1, 2}`.
pub fn page_time(input: &SaddleInput, n: u32) -> Result<f64> {
    if n != 1 && n != 2 {
        return Err(Error::Domain {
            what: "Page-time replica index",
            value: n as f64,
        });
    }
    let rate = entropy_rate(&input.at_n(n as f64))?;
    if rate <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(SATURATION / rate)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaddleLabel {
    Early,
    Late,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    pub label: SaddleLabel,
    pub phi_star: f64,
    /// Action per fermion per unit time (zero on the late saddle).
    pub action_density: f64,
    /// Entropy growth rate per fermion (zero on the late saddle).
    pub entropy_rate: f64,
    /// Saturated entropy per fermion on the late saddle.
    pub saturation: Option<f64>,
    pub correlator: f64,
    pub warnings: Vec<String>,
}

pub fn early_saddle(input: &SaddleInput) -> Result<SaddleResult> {
    input.validate()?;
    let phi = default_phi(input)?;
    let mut warnings = input.warnings();
    if phi.status == PhiStatus::Boundary {
        warnings.push("no stationary point in (0, Gamma]; phi = 0".into());
    }
    Ok(SaddleResult {
        label: SaddleLabel::Early,
        phi_star: phi.value,
        action_density: action_density(phi.value, input)?,
        entropy_rate: entropy_rate(input)?,
        saturation: None,
        correlator: early_correlator(input)?,
        warnings,
    })
}

/// Sector-maximally-mixed saddle: `φ = γ/2`, `S⁽ⁿ⁾ = 2N ln 2`, `F⁽ⁿ⁾ = 1/4`.
pub fn late_saddle(input: &SaddleInput) -> SaddleResult {
    SaddleResult {
        label: SaddleLabel::Late,
        phi_star: input.gamma / 2.0,
        action_density: 0.0,
        entropy_rate: 0.0,
        saturation: Some(SATURATION),
        correlator: LATE_CORRELATOR,
        warnings: Vec::new(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub t: f64,
    /// `S⁽ⁿ⁾/N`.
    pub entropy: f64,
    pub correlator: f64,
    pub label: SaddleLabel,
    pub page_time: f64,
}

/// Page time for arbitrary `n`: where `rate·t` reaches `2 ln 2`.
pub fn crossing_time(input: &SaddleInput) -> Result<f64> {
    let rate = entropy_rate(input)?;
    Ok(if rate > 0.0 { SATURATION / rate } else { f64::INFINITY })
}

/// The saddle with the smaller action at time `t`: linear growth until the
/// Page time, saturation afterwards. The entropy is continuous there, the
/// correlator jumps.
pub fn dominant_saddle(input: &SaddleInput, t: f64) -> Result<Prediction> {
    if !(t >= 0.0) {
        return Err(Error::config("t", "must be non-negative"));
    }
    let rate = entropy_rate(input)?;
    let page = crossing_time(input)?;
    let (entropy, correlator, label) = if t < page {
        (rate * t, early_correlator(input)?, SaddleLabel::Early)
    } else {
        (SATURATION, LATE_CORRELATOR, SaddleLabel::Late)
    };
    Ok(Prediction {
        t,
        entropy,
        correlator,
        label,
        page_time: page,
    })
}

/// `G(u) = ½ e^{−Γ|u|/2}`.
pub fn two_point_g(u: f64, input: &SaddleInput) -> f64 {
    0.5 * (-input.decay() * u.abs() / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inp(n: f64, gamma: f64) -> SaddleInput {
        SaddleInput::with_decay(n, gamma, 0.25)
    }

    #[test]
    fn decay_rates() {
        assert_eq!(decay_rate(1.0, 4).unwrap(), 0.25);
        assert_eq!(decay_rate(2.0, 4).unwrap(), 0.5);
        assert_eq!(decay_rate(1.0, 6).unwrap(), 0.0625);
        assert!(decay_rate(1.0, 5).is_err());
        assert!(decay_rate(1.0, 2).is_err());
    }

    #[test]
    fn c_n_values() {
        assert!((c_n(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((c_n(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((c_n(4.0).unwrap() - 2.5).abs() < 1e-13);
    }

    #[test]
    fn action_values() {
        let i = inp(1.0, 0.05);
        assert!((action_density(0.0, &i).unwrap() - 0.0125).abs() < 1e-15);
        assert!((action_density(0.025, &i).unwrap() + 0.00125).abs() < 1e-15);
    }

    #[test]
    fn phi_limits() {
        let p = phi_star(&inp(1.0, 0.05), PhiMethod::Closed).unwrap().value;
        assert!((p - 0.025).abs() < 1e-15);
        let p = phi_star(&inp(1.0 + 1e-9, 0.05), PhiMethod::Closed).unwrap().value;
        assert!((p - 0.025).abs() < 1e-9);
        assert_eq!(phi_star(&inp(2.0, 0.05), PhiMethod::Closed).unwrap().value, 0.0);
        assert_eq!(phi_star(&inp(2.0, 0.05), PhiMethod::Numeric).unwrap().value, 0.0);
        let p = phi_star(&inp(1.5, 0.05), PhiMethod::Closed).unwrap().value;
        assert!((p - 0.0020264).abs() < 5e-8, "{p}");
    }

    #[test]
    fn closed_matches_numeric() {
        for k in 0..=17 {
            let n = 1.05 + 0.05 * k as f64;
            for gamma in [0.01, 0.025, 0.05] {
                let i = inp(n, gamma);
                let a = phi_star(&i, PhiMethod::Closed).unwrap().value;
                let b = phi_star(&i, PhiMethod::Numeric).unwrap();
                assert_eq!(b.status, PhiStatus::Stationary);
                assert!(((a - b.value) / a).abs() < 1e-8, "n = {n}, γ = {gamma}: {a} vs {}", b.value);
            }
        }
    }

    #[test]
    fn closed_form_is_stationary() {
        for k in 0..=17 {
            let n = 1.05 + 0.05 * k as f64;
            let gamma = 0.025;
            let i = inp(n, gamma);
            let p = phi_star(&i, PhiMethod::Closed).unwrap().value;
            let slope = leading_slope(p, &i, c_n(n).unwrap());
            assert!(slope.abs() < 1e-8 * n * gamma, "n = {n}: {slope}");
        }
    }

    #[test]
    fn beyond_two_falls_back_to_zero() {
        let p = phi_star(&inp(3.0, 0.05), PhiMethod::Numeric).unwrap();
        assert_eq!(p.status, PhiStatus::Boundary);
        assert_eq!(p.value, 0.0);
        assert!(phi_star(&inp(3.0, 0.05), PhiMethod::Closed).is_err());
        let r = entropy_rate(&inp(3.0, 0.05)).unwrap();
        assert!((r - 3.0 * 0.05 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn wightman_values() {
        let i = inp(1.0, 0.05);
        let exact = 16.0 / (9.0 * PI * PI) * 0.2;
        assert!((early_correlator(&i).unwrap() - exact).abs() < 1e-15);
        assert!((early_correlator(&i).unwrap() - 0.0360244).abs() < 1e-6);
        let near = early_correlator_at(
            phi_star(&inp(1.0 + REPLICA_EPS, 0.05), PhiMethod::Closed).unwrap().value,
            &inp(1.0 + REPLICA_EPS, 0.05),
        )
        .unwrap();
        assert!(((near - early_correlator(&i).unwrap()) / near).abs() < 1e-4);
        let doubled = early_correlator(&inp(1.0, 0.1)).unwrap() / early_correlator(&i).unwrap();
        assert!((doubled - 2.0).abs() < 1e-10);
        assert_eq!(early_correlator(&inp(2.0, 0.05)).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rates_and_page_times() {
        assert!((entropy_rate(&inp(2.0, 0.1)).unwrap() - 0.05).abs() < 1e-15);
        assert!((entropy_rate(&inp(1.0, 0.05)).unwrap() - 0.0873934).abs() < 5e-7);
        assert_eq!(entropy_rate(&inp(1.5, 0.0)).unwrap(), 0.0);
        assert!((page_time(&inp(2.0, 0.1), 2).unwrap() - 27.7259).abs() < 1e-4);
        assert!((page_time(&inp(1.0, 0.05), 1).unwrap() - 15.8627).abs() < 1e-3);
        assert!(entropy_rate(&inp(1.0, 0.3)).is_err());
    }

    #[test]
    fn continuation_differs_by_half_gamma_over_two() {
        let i = inp(1.0, 0.05);
        let numeric = s0_continuation(&i).unwrap();
        assert!((numeric - s0_envelope(&i)).abs() < 1e-5, "{numeric}");
        assert!((s0_envelope(&i) - s0(&i).unwrap() - 0.0125).abs() < 1e-12);
    }

    #[test]
    fn late_saddle_is_fixed() {
        let l = late_saddle(&inp(1.3, 0.05));
        assert_eq!(l.correlator, 0.25);
        assert_eq!(l.saturation, Some(2.0 * LN_2));
        assert_eq!(l.phi_star, 0.025);
    }

    #[test]
    fn dominant_saddle_jumps() {
        let i = inp(2.0, 0.1);
        let a = dominant_saddle(&i, 10.0).unwrap();
        assert_eq!((a.label, a.correlator), (SaddleLabel::Early, 0.0));
        let b = dominant_saddle(&i, 30.0).unwrap();
        assert_eq!((b.label, b.correlator), (SaddleLabel::Late, 0.25));
        let i = inp(1.0, 0.05);
        let tp = page_time(&i, 1).unwrap();
        let below = dominant_saddle(&i, tp * (1.0 - 1e-12)).unwrap();
        let above = dominant_saddle(&i, tp).unwrap();
        assert!((above.entropy - below.entropy).abs() < 1e-10);
        assert_eq!(above.correlator - below.correlator, 0.25 - wightman_limit(&i));
    }

    #[test]
    fn two_point_values() {
        let i = inp(1.0, 0.05);
        assert_eq!(two_point_g(0.0, &i), 0.5);
        assert!((two_point_g(8.0, &i) - 0.18394).abs() < 1e-5);
        assert_eq!(two_point_g(-3.0, &i), two_point_g(3.0, &i));
    }

    #[test]
    fn warning_threshold() {
        assert!(inp(1.0, 0.05).warnings().is_empty());
        assert_eq!(inp(1.0, 0.06).warnings().len(), 1);
        assert!(early_saddle(&inp(1.0, 0.1)).unwrap().warnings.len() == 1);
    }
}
