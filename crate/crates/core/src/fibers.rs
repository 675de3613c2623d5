//! Strong-stable fibers of the skew product: the slope field `X₃`, fiber
//! offsets `ℓˢˢ(v) − ℓˢˢ(x)`, the series `Θ_z`, the Bernoulli convolution
//! `Θ(ξ)`, and the fiber distance `Δ_ξ(x, x′)`.
//!
//! Along the orbit `xₙ = (x + kₙ(ξ))/bⁿ`,
//!
//! ```text
//! X₃(ξ, x)   = −Σ_{n≥1} γⁿ g′(xₙ)
//! Θ_z(ξ, x)  =  Σ_{n≥1} γⁿ s(z/bⁿ) sin(2π(xₙ + z/(2bⁿ))),   s(t) = 2 sin(πt)/t
//! Θ(ξ)       =  Σ_{n≥1} γⁿ (−1)^{k(ξ_{n−1})}
//! ```
//!
//! and the fiber through `(ξ, x, W(x))` rises by `∫_x^v X₃(ξ, t) dt`, which
//! equals `(v − x)·Θ_{v−x}(ξ, x)` for the cosine ridge and `−(v − x)·Θ(ξ)`
//! for the piecewise-linear ridge with `b = 2`. Hence
//!
//! ```text
//! Δ_ξ(x, x′) = W(x′) − W(x) − (x′ − x)·Θ_{x′−x}(ξ, x)   (cosine)
//! Δ_ξ(x, x′) = W(x′) − W(x) + (x′ − x)·Θ(ξ)             (piecewise linear)
//! ```
//!
//! [`ThetaEvaluator::delta`] uses these closed forms;
//! [`ThetaEvaluator::delta_oracle`] integrates `X₃` numerically instead.

use std::f64::consts::PI;

use crate::dynamics::{DigitWord, SymbolicPoint};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::weierstrass::{RidgeFunction, WeierstrassFunction};

/// Default absolute tolerance of the fiber-offset quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const TAYLOR_CUTOFF: f64 = 1e-4;

/// `s(t) = (t/2)⁻¹ sin(2π t/2) = 2 sin(πt)/t`, with `s(0) = 2π`.
#[inline]
pub fn s_kernel(t: f64) -> f64 {
    if t.abs() < TAYLOR_CUTOFF {
        let y2 = (PI * t) * (PI * t);
        2.0 * PI * (1.0 - y2 / 6.0 + y2 * y2 / 120.0)
    } else {
        2.0 * (PI * t).sin() / t
    }
}

/// `Θ(ξ) = Σ_{n=1}^{N} γⁿ (−1)^{k(ξ_{n−1})}` truncated so that the tail
/// `γ^{N+1}/(1−γ)` is at most `tol`.
pub fn bernoulli_theta(gamma: f64, word: &DigitWord, tol: f64) -> Result<f64> {
    if word.base() != 2 {
        return Err(Error::BaseMustBeTwo {
            op: "bernoulli_theta",
            b: word.base(),
        });
    }
    let n = bernoulli_terms(gamma, tol)?;
    if word.len() < n {
        return Err(Error::NotEnoughDigits {
            needed: n,
            available: word.len(),
        });
    }
    Ok(bernoulli_sum(gamma, &word.digits()[..n]))
}

/// Number of terms `N` with `γ^{N+1}/(1−γ) ≤ tol`.
pub fn bernoulli_terms(gamma: f64, tol: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = ((tol * (1.0 - gamma)).ln() / gamma.ln() - 1.0).ceil();
    Ok(n.max(1.0) as usize)
}

#[inline]
pub(crate) fn bernoulli_sum(gamma: f64, digits: &[u32]) -> f64 {
    let mut w = 1.0;
    let mut sum = 0.0;
    for &d in digits {
        w *= gamma;
        if d == 0 {
            sum += w;
        } else {
            sum -= w;
        }
    }
    sum
}

/// Evaluates the stable-fiber series for a fixed [`WeierstrassFunction`],
/// all truncated at a common length `n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEvaluator {
    wf: WeierstrassFunction,
    tail_tol: f64,
    n_max: usize,
}

impl ThetaEvaluator {
    pub fn new(wf: WeierstrassFunction, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_tol must lie in (0, 1), got {tail_tol}"
            )));
        }
        let gamma = wf.params().gamma();
        let bound = wf.ridge().deriv_bound();
        // bound·γ^{n+1}/(1−γ) ≤ γ·tol
        let n = ((tail_tol * (1.0 - gamma) / bound).ln() / gamma.ln()).ceil();
        Ok(Self {
            wf,
            tail_tol,
            n_max: n.max(1.0) as usize,
        })
    }

    /// Evaluator sharing the tolerance of `wf`.
    pub fn for_function(wf: WeierstrassFunction) -> Result<Self> {
        Self::new(wf, wf.tail_tol())
    }

    pub fn function(&self) -> &WeierstrassFunction {
        &self.wf
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn gamma(&self) -> f64 {
        self.wf.params().gamma()
    }

    /// `K₁ = sup|g′|·γ/(1−γ)`, the common Lipschitz constant of all fibers.
    pub fn slope_bound(&self) -> f64 {
        let g = self.gamma();
        self.wf.ridge().deriv_bound() * g / (1.0 - g)
    }

    /// `2π·γ/(1−γ)`, the termwise bound on `|Θ_z|` for the cosine ridge.
    pub fn theta_bound(&self) -> f64 {
        let g = self.gamma();
        2.0 * PI * g / (1.0 - g)
    }

    fn digits<'a>(&self, p: &'a SymbolicPoint, n: usize) -> Result<&'a [u32]> {
        if p.base() != self.wf.params().b() {
            return Err(Error::InvalidArgument(format!(
                "point has base {} but the function has b = {}",
                p.base(),
                self.wf.params().b()
            )));
        }
        let d = p.word.digits();
        if d.len() < n {
            return Err(Error::NotEnoughDigits {
                needed: n,
                available: d.len(),
            });
        }
        Ok(&d[..n])
    }

    fn require_cosine(&self, op: &'static str) -> Result<()> {
        match self.wf.ridge() {
            RidgeFunction::Cosine => Ok(()),
            RidgeFunction::PiecewiseLinear => Err(Error::WrongRidge {
                op,
                expected: "cosine",
            }),
        }
    }

    fn require_pwl_base_two(&self, op: &'static str) -> Result<()> {
        let b = self.wf.params().b();
        if b != 2 {
            return Err(Error::BaseMustBeTwo { op, b });
        }
        Ok(())
    }

    /// `X₃(ξ, t)` truncated at `n_max`.
    pub fn x3(&self, p: &SymbolicPoint) -> Result<f64> {
        let digits = self.digits(p, self.n_max)?;
        self.x3_raw(digits, p.x)
    }

    fn x3_raw(&self, digits: &[u32], t: f64) -> Result<f64> {
        let b = f64::from(self.wf.params().b());
        let gamma = self.gamma();
        let ridge = self.wf.ridge();
        let mut x_n = t;
        let mut w = 1.0;
        let mut sum = 0.0;
        for (i, &d) in digits.iter().enumerate() {
            x_n = (x_n + f64::from(d)) / b;
            w *= gamma;
            let dg = ridge
                .derivative(x_n)
                .map_err(|_| Error::OrbitHitsJump { n: i + 1, x_n })?;
            sum -= w * dg;
        }
        Ok(sum)
    }

    /// `Θ_z(ξ, x)` truncated at `n_max`; cosine ridge only.
    pub fn theta_z(&self, p: &SymbolicPoint, z: f64) -> Result<f64> {
        self.theta_truncated(p, z, self.n_max)
    }

    /// `Θ_{z}` summed over `n = 1, …, n_terms`.
    pub fn theta_truncated(&self, p: &SymbolicPoint, z: f64, n_terms: usize) -> Result<f64> {
        self.require_cosine("theta_z")?;
        let digits = self.digits(p, n_terms)?;
        Ok(self.theta_raw(digits, p.x, z))
    }

    /// `Θ_z` over the given digits, no checks.
    #[inline]
    pub(crate) fn theta_raw(&self, digits: &[u32], x: f64, z: f64) -> f64 {
        let b = f64::from(self.wf.params().b());
        let gamma = self.gamma();
        let mut x_n = x;
        let mut w = 1.0;
        let mut scale = 1.0;
        let mut sum = 0.0;
        for &d in digits {
            x_n = (x_n + f64::from(d)) / b;
            w *= gamma;
            scale /= b;
            let t = z * scale;
            sum += w * s_kernel(t) * (2.0 * PI * (x_n + 0.5 * t)).sin();
        }
        sum
    }

    /// The slope-series value that multiplies `(x′ − x)` in the fiber
    /// offset: `Θ_z(ξ, x)` (cosine) or `−Θ(ξ)` (piecewise linear).
    #[inline]
    pub(crate) fn offset_slope_raw(&self, digits: &[u32], x: f64, z: f64) -> f64 {
        match self.wf.ridge() {
            RidgeFunction::Cosine => self.theta_raw(digits, x, z),
            RidgeFunction::PiecewiseLinear => -bernoulli_sum(self.gamma(), digits),
        }
    }

    /// `Θ(ξ)` from the point's digits; piecewise-linear ridge with `b = 2`.
    pub fn bernoulli_theta(&self, p: &SymbolicPoint) -> Result<f64> {
        self.require_pwl_base_two("bernoulli_theta")?;
        let digits = self.digits(p, self.n_max)?;
        Ok(bernoulli_sum(self.gamma(), digits))
    }

    /// `ℓˢˢ(v) − ℓˢˢ(x)` for the fiber through `(ξ, x)`, by adaptive
    /// quadrature of `X₃` (cosine) or the constant slope (piecewise linear,
    /// `b = 2`).
    pub fn fiber_offset(&self, p: &SymbolicPoint, v: f64, quad_tol: f64) -> Result<f64> {
        let digits = self.digits(p, self.n_max)?;
        match self.wf.ridge() {
            RidgeFunction::Cosine => {
                let gamma = self.gamma();
                let b = f64::from(self.wf.params().b());
                let integrand = |t: f64| {
                    let mut x_n = t;
                    let mut w = 1.0;
                    let mut sum = 0.0;
                    for &d in digits {
                        x_n = (x_n + f64::from(d)) / b;
                        w *= gamma;
                        sum += w * (2.0 * PI * x_n).sin();
                    }
                    2.0 * PI * sum
                };
                Ok(adaptive_simpson(integrand, p.x, v, quad_tol)?.value)
            }
            RidgeFunction::PiecewiseLinear => {
                self.require_pwl_base_two("fiber_offset")?;
                if v == p.x {
                    return Ok(0.0);
                }
                let slope = self.x3_raw(digits, 0.5 * (p.x + v))?;
                Ok(slope * (v - p.x))
            }
        }
    }

    /// `ℓˢˢ(v) − ℓˢˢ(x)` from the closed-form series.
    pub fn fiber_offset_closed(&self, p: &SymbolicPoint, v: f64) -> Result<f64> {
        if self.wf.ridge() == RidgeFunction::PiecewiseLinear {
            self.require_pwl_base_two("fiber_offset_closed")?;
        }
        let digits = self.digits(p, self.n_max)?;
        let z = v - p.x;
        Ok(z * self.offset_slope_raw(digits, p.x, z))
    }

    /// `Δ_ξ(x, x′)` from the closed form.
    pub fn delta(&self, p: &SymbolicPoint, x_prime: f64) -> Result<f64> {
        check_unit(x_prime)?;
        let offset = self.fiber_offset_closed(p, x_prime)?;
        Ok(self.wf.eval(x_prime) - self.wf.eval(p.x) - offset)
    }

    /// `Δ_ξ(x, x′)` through [`fiber_offset`](Self::fiber_offset).
    pub fn delta_oracle(&self, p: &SymbolicPoint, x_prime: f64, quad_tol: f64) -> Result<f64> {
        check_unit(x_prime)?;
        let offset = self.fiber_offset(p, x_prime, quad_tol)?;
        Ok(self.wf.eval(x_prime) - self.wf.eval(p.x) - offset)
    }

    /// `Δ` for a precomputed `W(x)`, skipping argument checks.
    #[inline]
    pub(crate) fn delta_raw(&self, digits: &[u32], x: f64, w_x: f64, x_prime: f64) -> f64 {
        let z = x_prime - x;
        self.wf.eval(x_prime) - w_x - z * self.offset_slope_raw(digits, x, z)
    }

    /// Checks that the point carries enough digits and a matching base.
    pub(crate) fn prepared_digits<'a>(&self, p: &'a SymbolicPoint) -> Result<&'a [u32]> {
        if self.wf.ridge() == RidgeFunction::PiecewiseLinear {
            self.require_pwl_base_two("delta")?;
        }
        self.digits(p, self.n_max)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("x′ must lie in [0, 1), got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::OrbitState;
    use crate::weierstrass::SystemParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ev(b: u32, lambda: f64, ridge: RidgeFunction) -> ThetaEvaluator {
        let wf = WeierstrassFunction::with_default_tol(SystemParams::new(b, lambda).unwrap(), ridge).unwrap();
        ThetaEvaluator::for_function(wf).unwrap()
    }

    fn point(ev: &ThetaEvaluator, xi: f64, x: f64) -> SymbolicPoint {
        let s = OrbitState::new(xi, x, ev.function().params().b()).unwrap();
        SymbolicPoint::from_state(&s, ev.n_max())
    }

    fn random_point(ev: &ThetaEvaluator, rng: &mut ChaCha8Rng, extra: usize) -> SymbolicPoint {
        let b = ev.function().params().b();
        SymbolicPoint::new(DigitWord::random(b, ev.n_max() + extra, rng), rng.gen()).unwrap()
    }

    #[test]
    fn s_kernel_examples() {
        assert_eq!(s_kernel(0.0), 2.0 * PI);
        assert!(s_kernel(1.0).abs() < 1e-15);
        assert!((s_kernel(0.5) - 4.0).abs() < 1e-15);
        assert!((s_kernel(-0.5) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn s_kernel_is_continuous_at_cutoff() {
        for t in [TAYLOR_CUTOFF * (1.0 - 1e-12), TAYLOR_CUTOFF * (1.0 + 1e-12)] {
            let direct = 2.0 * (PI * t).sin() / t;
            assert!((s_kernel(t) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn n_max_meets_tail_bound() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        let g = e.gamma();
        assert!(2.0 * PI * g.powi(e.n_max() as i32 + 1) / (1.0 - g) <= 1e-12);
    }

    #[test]
    fn x3_examples() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        assert!(e.x3(&point(&e, 0.0, 0.0)).unwrap().abs() < 1e-12);

        let p = ev(2, 0.7, RidgeFunction::PiecewiseLinear);
        let g = p.gamma();
        let v = p.x3(&point(&p, 0.0, 0.1)).unwrap();
        assert!((v + g / (1.0 - g)).abs() < 1e-12);
    }

    #[test]
    fn x3_is_bounded() {
        let e = ev(2, 0.9, RidgeFunction::Cosine);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let p = random_point(&e, &mut rng, 0);
            assert!(e.x3(&p).unwrap().abs() <= e.slope_bound());
        }
    }

    #[test]
    fn x3_reports_jump() {
        let p = ev(2, 0.7, RidgeFunction::PiecewiseLinear);
        let pt = SymbolicPoint::new(DigitWord::new(2, vec![1; p.n_max()]).unwrap(), 0.0).unwrap();
        assert!(matches!(p.x3(&pt), Err(Error::OrbitHitsJump { n: 1, .. })));
    }

    #[test]
    fn theta_examples() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        assert!(e.theta_z(&point(&e, 0.0, 0.0), 0.0).unwrap().abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = random_point(&e, &mut rng, 0);
            let z: f64 = rng.gen_range(-1.0..=1.0);
            assert!(e.theta_z(&p, z).unwrap().abs() <= e.theta_bound());
        }
        let p = ev(2, 0.7, RidgeFunction::PiecewiseLinear);
        assert!(matches!(
            p.theta_z(&point(&p, 0.2, 0.3), 0.1),
            Err(Error::WrongRidge { .. })
        ));
    }

    #[test]
    fn theta_at_zero_has_positive_two_pi_sign() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        let p = point(&e, 0.41, 0.27);
        let mut x_n = p.x;
        let mut direct = 0.0;
        for (n, &d) in p.word.digits().iter().enumerate() {
            x_n = (x_n + f64::from(d)) / 3.0;
            direct += e.gamma().powi(n as i32 + 1) * 2.0 * PI * (2.0 * PI * x_n).sin();
        }
        assert!((e.theta_z(&p, 0.0).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn bernoulli_theta_examples() {
        let tol = 1e-12;
        let n = bernoulli_terms(0.5, tol).unwrap();
        let zeros = DigitWord::new(2, vec![0; n]).unwrap();
        assert!((bernoulli_theta(0.5, &zeros, tol).unwrap() - 1.0).abs() <= tol);
        let alt = DigitWord::new(2, (0..n).map(|i| (i % 2) as u32).collect()).unwrap();
        assert!((bernoulli_theta(0.5, &alt, tol).unwrap() - 1.0 / 3.0).abs() <= tol);
        let n7 = bernoulli_terms(0.7, tol).unwrap();
        let ones = DigitWord::new(2, vec![1; n7]).unwrap();
        assert!((bernoulli_theta(0.7, &ones, tol).unwrap() + 7.0 / 3.0).abs() <= tol);

        assert!(matches!(
            bernoulli_theta(0.5, &DigitWord::new(3, vec![0; n]).unwrap(), tol),
            Err(Error::BaseMustBeTwo { b: 3, .. })
        ));
        assert!(matches!(
            bernoulli_theta(0.5, &DigitWord::new(2, vec![0; 3]).unwrap(), tol),
            Err(Error::NotEnoughDigits { .. })
        ));
    }

    #[test]
    fn fiber_offset_zero_at_base_point() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        let p = point(&e, 0.3, 0.6);
        assert_eq!(e.fiber_offset(&p, 0.6, 1e-10).unwrap(), 0.0);
        assert_eq!(e.fiber_offset_closed(&p, 0.6).unwrap(), 0.0);
    }

    #[test]
    fn fiber_offset_slope_bound_and_closed_form() {
        let e = ev(2, 0.95, RidgeFunction::Cosine);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = random_point(&e, &mut rng, 0);
            let v: f64 = rng.gen();
            let quad = e.fiber_offset(&p, v, 1e-10).unwrap();
            let closed = e.fiber_offset_closed(&p, v).unwrap();
            assert!(quad.abs() <= e.slope_bound() * (v - p.x).abs() + 1e-10);
            assert!((quad - closed).abs() <= 1e-10 + 1e-11, "{quad} vs {closed}");
        }
    }

    #[test]
    fn delta_matches_oracle() {
        for (b, l) in [(2, 0.8), (3, 0.8), (3, 0.95)] {
            let e = ev(b, l, RidgeFunction::Cosine);
            let mut rng = ChaCha8Rng::seed_from_u64(u64::from(b));
            for _ in 0..100 {
                let p = random_point(&e, &mut rng, 0);
                let xp: f64 = rng.gen();
                let d = e.delta(&p, xp).unwrap();
                let o = e.delta_oracle(&p, xp, DEFAULT_QUAD_TOL).unwrap();
                assert!((d - o).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn delta_vanishes_on_diagonal() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        let p = point(&e, 0.2, 0.7);
        assert_eq!(e.delta(&p, 0.7).unwrap(), 0.0);
        assert_eq!(e.delta_oracle(&p, 0.7, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn delta_is_antisymmetric() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let p = random_point(&e, &mut rng, 0);
            let xp: f64 = rng.gen();
            let q = SymbolicPoint::new(p.word.clone(), xp).unwrap();
            let fwd = e.delta(&p, xp).unwrap();
            let rev = e.delta(&q, p.x).unwrap();
            assert!((fwd + rev).abs() <= 2e-6);
        }
    }

    #[test]
    fn pwl_delta_composes_audited_parts() {
        let e = ev(2, 0.7, RidgeFunction::PiecewiseLinear);
        let p = point(&e, 0.0, 0.0);
        let theta = bernoulli_theta(5.0 / 7.0, &p.word, 1e-12).unwrap();
        let expected = e.function().eval(0.25) - 0.0 + 0.25 * theta;
        let got = e.delta(&p, 0.25).unwrap();
        assert!((got - expected).abs() < 1e-12);
        let oracle = e.delta_oracle(&p, 0.25, 1e-10).unwrap();
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn pwl_requires_base_two() {
        let e = ev(3, 0.8, RidgeFunction::PiecewiseLinear);
        let p = point(&e, 0.1, 0.2);
        assert!(matches!(e.delta(&p, 0.5), Err(Error::BaseMustBeTwo { .. })));
    }

    #[test]
    fn pwl_slope_is_constant_along_fiber() {
        let e = ev(2, 0.7, RidgeFunction::PiecewiseLinear);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = random_point(&e, &mut rng, 0);
            let q = SymbolicPoint::new(p.word.clone(), rng.gen()).unwrap();
            let (a, b) = (e.x3(&p).unwrap(), e.x3(&q).unwrap());
            assert!((a - b).abs() <= 2e-12);
            assert!((a + e.bernoulli_theta(&p).unwrap()).abs() <= 2e-12);
        }
    }

    #[test]
    fn theta_z_is_lipschitz_in_z() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = random_point(&e, &mut rng, 0);
            let z: f64 = rng.gen_range(-1e-3..1e-3);
            let d = (e.theta_z(&p, z).unwrap() - e.theta_z(&p, 0.0).unwrap()).abs();
            assert!(d <= 10.0 * z.abs());
        }
    }

    #[test]
    fn theta_tail_depends_only_on_shifted_point() {
        let e = ev(3, 0.8, RidgeFunction::Cosine);
        let m = 7;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let p = random_point(&e, &mut rng, m);
            // Θ₀ at Bᵐ(ξ, x) summed along the original orbit
            let mut x_n = p.x;
            let mut orbit = Vec::new();
            for &d in p.word.digits() {
                x_n = (x_n + f64::from(d)) / 3.0;
                orbit.push(x_n);
            }
            let direct: f64 = orbit[m..]
                .iter()
                .enumerate()
                .map(|(j, &xn)| e.gamma().powi(j as i32 + 1) * 2.0 * PI * (2.0 * PI * xn).sin())
                .sum();
            // the same value re-rooted at (digits from m on, x_m), with the
            // first m digits scrambled to show they do not enter
            let mut digits = p.word.digits().to_vec();
            for d in digits.iter_mut().take(m) {
                *d = (*d + 1) % 3;
            }
            let x_m = p.push_forward(m).unwrap().x;
            let rerooted = SymbolicPoint::new(DigitWord::new(3, digits[m..].to_vec()).unwrap(), x_m).unwrap();
            assert!((e.theta_z(&rerooted, 0.0).unwrap() - direct).abs() < 1e-12);
        }
    }
}
