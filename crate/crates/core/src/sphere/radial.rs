//! Radial functions `f` on ℝⁿ whose Fourier transform is a polynomial times
//! a Gaussian: `f̂(u) = p(‖u‖)·e^{−π‖u‖²}` with `p(t) = Σ a_k t^{2k}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::laguerre::{laguerre_at_zero, laguerre_eval};
use super::SphereError;

/// Volume of the unit ball in ℝⁿ, `π^{n/2} / Γ(n/2 + 1)`.
///
/// Evaluated through `V_n = (2π/n)·V_{n−2}` from `V_0 = 1`, `V_1 = 2`, which
/// keeps the result within a few ulps; going through `exp(log Γ)` loses digits.
pub fn ball_volume(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// `k!·π^{−k}`: a running product (exact at `k = 0`) up to where it could
/// overflow, log space beyond.
pub(crate) fn factorial_over_pi_power(k: usize) -> f64 {
    if k <= 150 {
        (1..=k).fold(1.0, |acc, i| acc * (i as f64 / PI))
    } else {
        (ln_gamma(k as f64 + 1.0) - k as f64 * PI.ln()).exp()
    }
}

/// Space-side radial profile of the Fourier-side monomial `‖u‖^{2k} e^{−π‖u‖²}`
/// in ℝⁿ: `k!·π^{−k}·e^{−πr²}·L_k^{n/2−1}(πr²)`.
pub fn transform_value(n: usize, k: usize, r: f64) -> f64 {
    let alpha = n as f64 / 2.0 - 1.0;
    let x = PI * r * r;
    let gauss = (-x).exp();
    if gauss == 0.0 {
        return 0.0;
    }
    factorial_over_pi_power(k) * gauss * laguerre_eval(k, alpha, x)
}

/// `transform_value(n, k, 0) = k!·π^{−k}·C(k + n/2 − 1, k)`.
pub fn transform_at_origin(n: usize, k: usize) -> f64 {
    factorial_over_pi_power(k) * laguerre_at_zero(k, n as f64 / 2.0 - 1.0)
}

/// A radial Schwartz function given through its Fourier side:
/// `f̂(u) = p(‖u‖)·e^{−π‖u‖²}` with `p(t) = Σ_{k=0}^{d} a[k]·t^{2k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadialJson", into = "RadialJson")]
pub struct RadialFunction {
    n: usize,
    a: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RadialJson {
    n: usize,
    d: usize,
    a: Vec<f64>,
}

impl TryFrom<RadialJson> for RadialFunction {
    type Error = SphereError;

    fn try_from(j: RadialJson) -> Result<Self, Self::Error> {
        if j.a.len() != j.d + 1 {
            return Err(SphereError::InvalidFunction(format!("degree {} needs {} coefficients, got {}", j.d, j.d + 1, j.a.len())));
        }
        RadialFunction::new(j.n, j.a)
    }
}

impl From<RadialFunction> for RadialJson {
    fn from(f: RadialFunction) -> Self {
        RadialJson { n: f.n, d: f.a.len() - 1, a: f.a }
    }
}

impl RadialFunction {
    pub fn new(n: usize, a: Vec<f64>) -> Result<Self, SphereError> {
        if n == 0 {
            return Err(SphereError::InvalidDimension(n));
        }
        if a.is_empty() {
            return Err(SphereError::InvalidFunction("at least one coefficient is required".into()));
        }
        if let Some(k) = a.iter().position(|v| !v.is_finite()) {
            return Err(SphereError::InvalidFunction(format!("coefficient {k} is not finite")));
        }
        Ok(RadialFunction { n, a })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// Coefficients of `p` in powers of `t²`.
    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn scaled(&self, c: f64) -> RadialFunction {
        RadialFunction { n: self.n, a: self.a.iter().map(|v| c * v).collect() }
    }

    /// `p(t)`.
    pub fn p(&self, t: f64) -> f64 {
        let s = t * t;
        self.a.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `f̂` at radius `t`.
    pub fn eval_fhat(&self, t: f64) -> f64 {
        self.p(t) * (-PI * t * t).exp()
    }

    /// `f` at radius `r`, summed monomial by monomial.
    pub fn eval_f(&self, r: f64) -> f64 {
        self.a.iter().enumerate().map(|(k, c)| c * transform_value(self.n, k, r)).sum()
    }

    /// `f(0)`, the density bound when `f̂(0) = vol Bₙ`.
    pub fn value_at_origin(&self) -> f64 {
        self.a.iter().enumerate().map(|(k, c)| c * transform_at_origin(self.n, k)).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("radial function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SphereError> {
        serde_json::from_str(text).map_err(|e| SphereError::InvalidFunction(e.to_string()))
    }
}

pub fn eval_f(f: &RadialFunction, r: f64) -> f64 {
    f.eval_f(r)
}

pub fn eval_fhat(f: &RadialFunction, t: f64) -> f64 {
    f.eval_fhat(t)
}
