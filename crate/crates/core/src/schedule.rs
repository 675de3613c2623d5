//! Multi-scale truncation of `Θ_z`: the level schedule `n₀ ≤ … ≤ n_ℓ`, the
//! truncated sums `Θ_{z,k}`, the rescaled increments
//! `Δ_{z,k} = γ^{−n_{k−1}}(Θ_{z,k} − Θ_{z,k−1})`, and checks of the three
//! uniform bounds that tie them together.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::SymbolicPoint;
use crate::error::{Error, Result};
use crate::fibers::ThetaEvaluator;

const REL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    pub gamma: f64,
    pub b: u32,
    /// `α = ln γ / ln(γ/b) ∈ (0, 1)`.
    pub alpha: f64,
    pub ell: usize,
    pub r: f64,
    pub z: f64,
    /// `r_z = 2r/|z|`.
    pub r_z: f64,
    /// `n₀, …, n_ℓ`.
    pub levels: Vec<usize>,
    /// `N = ⌈ln(2r)/ln γ⌉`.
    pub n_cap: usize,
}

impl TruncationSchedule {
    pub fn new(gamma: f64, b: u32, ell: usize, r: f64, z: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) || b < 2 {
            return Err(Error::InvalidParams(format!(
                "need γ ∈ (0, 1) and b >= 2, got γ = {gamma}, b = {b}"
            )));
        }
        if ell == 0 {
            return Err(Error::InvalidArgument("ell must be >= 1".into()));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!("r must lie in (0, 1), got {r}")));
        }
        if !(z != 0.0 && z.abs() <= 1.0) {
            return Err(Error::InvalidArgument(format!("z must satisfy 0 < |z| <= 1, got {z}")));
        }
        if z.abs() <= 2.0 * r {
            return Err(Error::TrivialRegime {
                z_abs: z.abs(),
                two_r: 2.0 * r,
            });
        }
        let ln_g = gamma.ln();
        let alpha = ln_g / (gamma / f64::from(b)).ln();
        let r_z = 2.0 * r / z.abs();
        let mut levels = vec![0usize; ell + 1];
        levels[ell] = ((r_z.ln() / ln_g).ceil() as usize).max(1);
        for k in (0..ell).rev() {
            levels[k] = ((alpha * levels[k + 1] as f64).ceil() as usize).max(1);
        }
        let n_cap = ((2.0 * r).ln() / ln_g).ceil() as usize;
        let s = Self {
            gamma,
            b,
            alpha,
            ell,
            r,
            z,
            r_z,
            levels,
            n_cap,
        };
        s.check_invariants()?;
        Ok(s)
    }

    pub fn n(&self, k: usize) -> usize {
        self.levels[k]
    }

    /// `d_k = n_k − n_{k−1}` for `k ≥ 1`.
    pub fn d(&self, k: usize) -> usize {
        self.levels[k] - self.levels[k - 1]
    }

    /// Monotone chain up to `N`, `γ^{n_k} ≤ r_z^{α^{ℓ−k}}`,
    /// `(γ/b)^{n_{k−1}} ≤ γ^{n_k}`, and
    /// `n_k ≤ α^{ℓ−k} n_ℓ + (1 − α^{ℓ−k})/(1 − α)`.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |what: String| Err(Error::InvalidParams(format!("schedule invariant violated: {what}")));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha = {}", self.alpha));
        }
        if self.levels.windows(2).any(|w| w[0] > w[1]) || self.levels[self.ell] > self.n_cap {
            return fail(format!("levels {:?} not monotone below N = {}", self.levels, self.n_cap));
        }
        let n_ell = self.levels[self.ell] as f64;
        for k in 0..=self.ell {
            let n_k = self.levels[k] as f64;
            let a_pow = self.alpha.powi((self.ell - k) as i32);
            if self.gamma.powf(n_k) > self.r_z.powf(a_pow) * (1.0 + REL_SLACK) {
                return fail(format!("gamma^n_{k} > r_z^(alpha^(ell-k))"));
            }
            if n_k > a_pow * n_ell + (1.0 - a_pow) / (1.0 - self.alpha) + 1e-9 {
                return fail(format!("n_{k} exceeds the induction cap"));
            }
            if k >= 1 {
                let lhs = (self.gamma / f64::from(self.b)).powf(self.levels[k - 1] as f64);
                if lhs > self.gamma.powf(n_k) * (1.0 + REL_SLACK) {
                    return fail(format!("(gamma/b)^n_{} > gamma^n_{k}", k - 1));
                }
            }
        }
        Ok(())
    }
}

/// `Δ_{z,k} = γ^{−n_{k−1}}(Θ_{z,k} − Θ_{z,k−1})`, `1 ≤ k ≤ ℓ`.
pub fn rescaled_increment(
    ev: &ThetaEvaluator,
    p: &SymbolicPoint,
    z: f64,
    schedule: &TruncationSchedule,
    k: usize,
) -> Result<f64> {
    if k == 0 || k > schedule.ell {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            schedule.ell
        )));
    }
    let hi = ev.theta_truncated(p, z, schedule.n(k))?;
    let lo = ev.theta_truncated(p, z, schedule.n(k - 1))?;
    Ok((hi - lo) / ev.gamma().powi(schedule.n(k - 1) as i32))
}

/// A measured quantity next to the bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.value <= self.bound
    }
}

/// `|Θ_z − Θ_{z,ℓ}| ≤ (2πγ/(1−γ))·γ^{n_ℓ}`.
pub fn tail_bound(ev: &ThetaEvaluator, p: &SymbolicPoint, schedule: &TruncationSchedule) -> Result<BoundCheck> {
    let z = schedule.z;
    let full = ev.theta_z(p, z)?;
    let part = ev.theta_truncated(p, z, schedule.n(schedule.ell))?;
    Ok(BoundCheck {
        value: (full - part).abs(),
        bound: ev.theta_bound() * ev.gamma().powi(schedule.n(schedule.ell) as i32) + 2.0 * ev.tail_tol(),
    })
}

/// `|Δ_{0,k} − Θ₀∘B^{n_{k−1}}| ≤ (2πγ/(1−γ))·γ^{d_k}`.
///
/// The point needs `n_max + n_{k−1}` digits.
pub fn increment_shift_bound(
    ev: &ThetaEvaluator,
    p: &SymbolicPoint,
    schedule: &TruncationSchedule,
    k: usize,
) -> Result<BoundCheck> {
    let inc = rescaled_increment(ev, p, 0.0, schedule, k)?;
    let shifted = p.push_forward(schedule.n(k - 1))?;
    let theta0 = ev.theta_z(&shifted, 0.0)?;
    Ok(BoundCheck {
        value: (inc - theta0).abs(),
        bound: ev.theta_bound() * ev.gamma().powi(schedule.d(k) as i32) + 2.0 * ev.tail_tol(),
    })
}

/// Explicit constant `C′` with
/// `|Θ_{z,k} − (Θ_{z,k−1} + γ^{n_{k−1}} Θ₀∘B^{n_{k−1}})| ≤ C′ γ^{n_k}`:
/// `2π²(1 + π/6)·(γ/b)/(1 − γ/b) + 2πγ/(1 − γ)`.
pub fn composite_constant(gamma: f64, b: u32) -> f64 {
    let q = gamma / f64::from(b);
    2.0 * PI * PI * (1.0 + PI / 6.0) * q / (1.0 - q) + 2.0 * PI * gamma / (1.0 - gamma)
}

/// The ratio `|Θ_{z,k} − (Θ_{z,k−1} + γ^{n_{k−1}} Θ₀∘B^{n_{k−1}})| / γ^{n_k}`.
pub fn composite_ratio(
    ev: &ThetaEvaluator,
    p: &SymbolicPoint,
    schedule: &TruncationSchedule,
    k: usize,
) -> Result<f64> {
    if k == 0 || k > schedule.ell {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            schedule.ell
        )));
    }
    let z = schedule.z;
    let m = schedule.n(k - 1);
    let gamma = ev.gamma();
    let hi = ev.theta_truncated(p, z, schedule.n(k))?;
    let lo = ev.theta_truncated(p, z, m)?;
    let theta0 = ev.theta_z(&p.push_forward(m)?, 0.0)?;
    let diff = (hi - (lo + gamma.powi(m as i32) * theta0)).abs();
    Ok(diff / gamma.powi(schedule.n(k) as i32))
}
