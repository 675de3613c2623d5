//! Parameters, ridge functions and truncated evaluation of the series
//! `W(x) = Σ λⁿ g(bⁿx)`.
//!
//! The orbit `bⁿx mod 1` is carried in 128-bit binary fixed point
//! ([`Dyadic`]), where multiplication by `b` modulo one is exact. Every
//! term is therefore evaluated at the exact orbit point of the input
//! double, and the only error left is the closed-form series tail plus
//! one rounding per term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation tolerance for every series in the crate.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// The pair `(b, λ)` with the derived contraction ratio `γ = 1/(bλ)` and
/// the box dimension `D = 2 + ln λ / ln b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    b: u32,
    lambda: f64,
    gamma: f64,
    dim_d: f64,
}

impl SystemParams {
    pub fn new(b: u32, lambda: f64) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidParams(format!("b must be >= 2, got {b}")));
        }
        let bf = f64::from(b);
        if !(lambda.is_finite() && lambda > 1.0 / bf && lambda < 1.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must lie in (1/b, 1) = ({}, 1), got {lambda}",
                1.0 / bf
            )));
        }
        Ok(Self {
            b,
            lambda,
            gamma: 1.0 / (bf * lambda),
            dim_d: 2.0 + lambda.ln() / bf.ln(),
        })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `γ = 1/(bλ) ∈ (0, 1)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `D = 2 + ln λ / ln b ∈ (1, 2)`.
    pub fn dim_d(&self) -> f64 {
        self.dim_d
    }
}

/// Box dimension of the graph, `2 + ln λ / ln b`.
pub fn dimension_formula(params: &SystemParams) -> f64 {
    2.0 + params.lambda().ln() / f64::from(params.b()).ln()
}

/// The 1-periodic profile summed in the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RidgeFunction {
    /// `g(u) = cos(2πu)`.
    Cosine,
    /// `g(u) = dist(u, ℤ)`.
    PiecewiseLinear,
}

impl RidgeFunction {
    pub fn name(self) -> &'static str {
        match self {
            RidgeFunction::Cosine => "cosine",
            RidgeFunction::PiecewiseLinear => "piecewise-linear",
        }
    }

    /// `g(u)`, with `u` reduced mod 1.
    #[inline]
    pub fn value(self, u: f64) -> f64 {
        let u = frac(u);
        match self {
            RidgeFunction::Cosine => (2.0 * PI * u).cos(),
            RidgeFunction::PiecewiseLinear => u.min(1.0 - u),
        }
    }

    /// `g′(u)`. For the piecewise-linear profile this is `(−1)^⌊2u⌋` and the
    /// jump points `u ∈ {0, 1/2}` are an error.
    #[inline]
    pub fn derivative(self, u: f64) -> Result<f64> {
        let u = frac(u);
        match self {
            RidgeFunction::Cosine => Ok(-2.0 * PI * (2.0 * PI * u).sin()),
            RidgeFunction::PiecewiseLinear => {
                if u == 0.0 || u == 0.5 {
                    Err(Error::DerivativeUndefined { u })
                } else if (2.0 * u).floor() == 0.0 {
                    Ok(1.0)
                } else {
                    Ok(-1.0)
                }
            }
        }
    }

    /// `g` (order 0) or `g′` (order 1).
    pub fn eval(self, u: f64, order: u8) -> Result<f64> {
        match order {
            0 => Ok(self.value(u)),
            1 => self.derivative(u),
            _ => Err(Error::InvalidArgument(format!(
                "ridge derivative order must be 0 or 1, got {order}"
            ))),
        }
    }

    /// Uniform bound on `|g′|`.
    pub fn deriv_bound(self) -> f64 {
        match self {
            RidgeFunction::Cosine => 2.0 * PI,
            RidgeFunction::PiecewiseLinear => 1.0,
        }
    }

    /// Uniform bound on `|g|`.
    pub fn sup_bound(self) -> f64 {
        match self {
            RidgeFunction::Cosine => 1.0,
            RidgeFunction::PiecewiseLinear => 0.5,
        }
    }
}

/// Fractional part in `[0, 1)`.
#[inline]
pub(crate) fn frac(u: f64) -> f64 {
    let f = u - u.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// A point of `[0, 1)` stored as a 128-bit binary fraction `m / 2¹²⁸`.
///
/// Every double in `[2⁻⁷⁶, 1)` is represented exactly; smaller inputs are
/// truncated to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dyadic(pub u128);

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

impl Dyadic {
    pub fn from_f64(x: f64) -> Self {
        Dyadic((frac(x) * TWO_POW_128) as u128)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        frac(self.0 as f64 / TWO_POW_128)
    }

    /// `b·u mod 1`, exact.
    #[inline]
    pub fn tau(self, b: u32) -> Self {
        Dyadic(self.0.wrapping_mul(u128::from(b)))
    }
}

/// The truncated series `Σ_{n<N_W} λⁿ g(bⁿx)` with a closed-form tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassFunction {
    params: SystemParams,
    ridge: RidgeFunction,
    tail_tol: f64,
    n_terms: usize,
}

impl WeierstrassFunction {
    pub fn new(params: SystemParams, ridge: RidgeFunction, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_tol must lie in (0, 1), got {tail_tol}"
            )));
        }
        let lambda = params.lambda();
        // λ^N/(1−λ) ≤ tol bounds the tail because |g| ≤ 1.
        let n = ((tail_tol * (1.0 - lambda)).ln() / lambda.ln()).ceil();
        Ok(Self {
            params,
            ridge,
            tail_tol,
            n_terms: n.max(1.0) as usize,
        })
    }

    pub fn with_default_tol(params: SystemParams, ridge: RidgeFunction) -> Result<Self> {
        Self::new(params, ridge, DEFAULT_TAIL_TOL)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn ridge(&self) -> RidgeFunction {
        self.ridge
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Truncation length `N_W`.
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// `W(x)` for `x` reduced mod 1.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_dyadic(Dyadic::from_f64(x))
    }

    pub fn eval_dyadic(&self, x: Dyadic) -> f64 {
        let b = self.params.b();
        let lambda = self.params.lambda();
        let mut u = x;
        let mut weight = 1.0;
        let mut sum = 0.0;
        match self.ridge {
            RidgeFunction::Cosine => {
                for _ in 0..self.n_terms {
                    sum += weight * (2.0 * PI * u.to_f64()).cos();
                    weight *= lambda;
                    u = u.tau(b);
                }
            }
            RidgeFunction::PiecewiseLinear => {
                for _ in 0..self.n_terms {
                    let v = u.to_f64();
                    sum += weight * v.min(1.0 - v);
                    weight *= lambda;
                    u = u.tau(b);
                }
            }
        }
        sum
    }

    /// `|λ·W(τ(x)) − (W(x) − g(x))|`, with `τ(x)` taken exactly.
    pub fn functional_equation_residual(&self, x: f64) -> f64 {
        let d = Dyadic::from_f64(x);
        let lhs = self.params.lambda() * self.eval_dyadic(d.tau(self.params.b()));
        let rhs = self.eval_dyadic(d) - self.ridge.value(d.to_f64());
        (lhs - rhs).abs()
    }

    /// Hölder constant `C_H` with `|W(x) − W(y)| ≤ C_H·|x − y|^{2−D}`.
    pub fn holder_constant(&self) -> f64 {
        let b = f64::from(self.params.b());
        let lambda = self.params.lambda();
        (self.ridge.deriv_bound() / (b * lambda - 1.0)
            + 2.0 * self.ridge.sup_bound() / (1.0 - lambda))
            / lambda
    }

    /// Uniform bound on `|W|`.
    pub fn sup_bound(&self) -> f64 {
        self.ridge.sup_bound() / (1.0 - self.params.lambda())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_w(b: u32, lambda: f64) -> WeierstrassFunction {
        WeierstrassFunction::with_default_tol(SystemParams::new(b, lambda).unwrap(), RidgeFunction::Cosine)
            .unwrap()
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(SystemParams::new(1, 0.9).is_err());
        assert!(SystemParams::new(2, 0.5).is_err());
        assert!(SystemParams::new(2, 1.0).is_err());
        assert!(SystemParams::new(3, f64::NAN).is_err());
        let p = SystemParams::new(3, 0.8).unwrap();
        assert!((p.gamma() * 3.0 * 0.8 - 1.0).abs() <= f64::EPSILON);
        assert!(p.dim_d() > 1.0 && p.dim_d() < 2.0);
    }

    #[test]
    fn dimension_formula_examples() {
        let d = |b, l| dimension_formula(&SystemParams::new(b, l).unwrap());
        assert!((d(4, 0.5) - 1.5).abs() < 1e-15);
        // 2 + ln(0.9531)/ln 2 and 2 + ln(0.8)/ln 3, computed by hand
        assert!((d(2, 0.9531) - 1.930_700_2).abs() < 1e-6);
        assert!((d(3, 0.8) - 1.796_885_5).abs() < 1e-6);
    }

    #[test]
    fn ridge_examples() {
        use RidgeFunction::*;
        assert_eq!(Cosine.eval(0.0, 0).unwrap(), 1.0);
        assert_eq!(PiecewiseLinear.eval(0.25, 0).unwrap(), 0.25);
        assert_eq!(PiecewiseLinear.eval(0.25, 1).unwrap(), 1.0);
        assert_eq!(PiecewiseLinear.eval(0.75, 1).unwrap(), -1.0);
        assert!((Cosine.eval(0.25, 1).unwrap() + 2.0 * PI).abs() < 1e-12);
        assert_eq!(
            PiecewiseLinear.eval(0.5, 1),
            Err(Error::DerivativeUndefined { u: 0.5 })
        );
        assert!(PiecewiseLinear.eval(0.0, 1).is_err());
        assert!(PiecewiseLinear.eval(1.0, 1).is_err());
        assert!(Cosine.eval(0.3, 2).is_err());
    }

    #[test]
    fn dyadic_is_exact_for_doubles() {
        for &x in &[0.0, 0.1, 0.37, 0.5, 0.999_999_9, 1e-20] {
            assert_eq!(Dyadic::from_f64(x).to_f64(), x);
        }
        // 3·0.37 mod 1
        let t = Dyadic::from_f64(0.37).tau(3).to_f64();
        assert!((t - 0.11).abs() < 1e-15);
    }

    #[test]
    fn eval_examples() {
        let w = cos_w(2, 0.6);
        assert!((w.eval(0.0) - 2.5).abs() <= 1e-12);
        assert!((w.eval(0.5) - 0.5).abs() <= 1e-12);
        let pwl = WeierstrassFunction::with_default_tol(
            SystemParams::new(2, 0.7).unwrap(),
            RidgeFunction::PiecewiseLinear,
        )
        .unwrap();
        assert_eq!(pwl.eval(0.0), 0.0);
    }

    #[test]
    fn truncation_length_meets_tail_bound() {
        let w = cos_w(3, 0.8);
        let n = w.n_terms() as i32;
        assert!(0.8f64.powi(n) / 0.2 <= 1e-12);
        assert!(0.8f64.powi(n - 1) / 0.2 > 1e-12);
    }

    #[test]
    fn functional_equation_examples() {
        let w = cos_w(2, 0.6);
        assert!(w.functional_equation_residual(0.0) <= 3e-12);
        assert!(cos_w(3, 0.8).functional_equation_residual(0.37) <= 3e-12);
        let pwl = WeierstrassFunction::with_default_tol(
            SystemParams::new(2, 0.7).unwrap(),
            RidgeFunction::PiecewiseLinear,
        )
        .unwrap();
        assert!(pwl.functional_equation_residual(0.3) <= 3e-12);
    }

    #[test]
    fn eval_is_deterministic() {
        let w = cos_w(3, 0.95);
        assert_eq!(w.eval(0.123_456).to_bits(), w.eval(0.123_456).to_bits());
    }
}
