//! The expanding map `τ(u) = bu mod 1`, the `b`-baker map and its inverse,
//! the skew products `F` and `Φ`, and digit bookkeeping along orbits.

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};
use crate::weierstrass::WeierstrassFunction;

/// Longest orbit segment materialized by [`orbit_segment`].
pub const MAX_ORBIT_LEN: u64 = 1_000_000;

/// Identity-check window for `k_n = bⁿxₙ − x` in floating point.
pub const KN_FLOAT_WINDOW: usize = 30;

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
fn clamp_unit(v: f64) -> f64 {
    if v >= 1.0 {
        BELOW_ONE
    } else if v < 0.0 {
        0.0
    } else {
        v
    }
}

/// `(τ(u), k(u)) = (b·u mod 1, ⌊b·u⌋)` for `u ∈ [0, 1)`.
///
/// `b·u − k` is formed with a fused multiply-add so the fractional part is
/// rounded once; the digit follows the left-closed convention
/// `k(u) = j` for `u ∈ [j/b, (j+1)/b)`.
#[inline]
pub fn base_map(b: u32, u: f64) -> (f64, u32) {
    let bf = f64::from(b);
    let mut k = (bf * u).floor().clamp(0.0, bf - 1.0);
    let mut t = bf.mul_add(u, -k);
    if t < 0.0 && k > 0.0 {
        k -= 1.0;
        t = bf.mul_add(u, -k);
    } else if t >= 1.0 && k < bf - 1.0 {
        k += 1.0;
        t = bf.mul_add(u, -k);
    }
    (clamp_unit(t), k as u32)
}

/// A point `(ξ, x)` of the unit square acted on by the `b`-baker map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitState {
    pub xi: f64,
    pub x: f64,
    pub base: u32,
}

impl OrbitState {
    pub fn new(xi: f64, x: f64, base: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidArgument(format!("base must be >= 2, got {base}")));
        }
        if !(0.0..1.0).contains(&xi) || !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidArgument(format!(
                "orbit coordinates must lie in [0, 1), got ({xi}, {x})"
            )));
        }
        Ok(Self { xi, x, base })
    }

    pub fn forward(self) -> Self {
        baker_forward(self)
    }

    pub fn backward(self) -> Self {
        baker_backward(self)
    }
}

/// `(u + k)/b`, corrected for the rounding of `u + k`.
#[inline]
fn contract(b: u32, u: f64, k: u32) -> f64 {
    let bf = f64::from(b);
    let kf = f64::from(k);
    let q = (u + kf) / bf;
    let r = (-q).mul_add(bf, kf) + u;
    clamp_unit(q + r / bf)
}

/// `B(ξ, x) = (τ(ξ), (x + k(ξ))/b)`.
pub fn baker_forward(s: OrbitState) -> OrbitState {
    let (xi, k) = base_map(s.base, s.xi);
    OrbitState {
        xi,
        x: contract(s.base, s.x, k),
        base: s.base,
    }
}

/// `B⁻¹(ξ, x) = ((ξ + k(x))/b, τ(x))`.
pub fn baker_backward(s: OrbitState) -> OrbitState {
    let (x, k) = base_map(s.base, s.x);
    OrbitState {
        xi: contract(s.base, s.xi, k),
        x,
        base: s.base,
    }
}

/// The states `Bⁱ(ξ, x)` for `i = 0, …, n` (or `0, −1, …, n` when `n < 0`).
pub fn orbit_segment(s: OrbitState, n: i64) -> Result<Vec<OrbitState>> {
    if n.unsigned_abs() > MAX_ORBIT_LEN {
        return Err(Error::InvalidArgument(format!(
            "orbit length |n| = {} exceeds the cap {MAX_ORBIT_LEN}",
            n.unsigned_abs()
        )));
    }
    let step: fn(OrbitState) -> OrbitState = if n >= 0 { baker_forward } else { baker_backward };
    let mut out = Vec::with_capacity(n.unsigned_abs() as usize + 1);
    let mut cur = s;
    out.push(cur);
    for _ in 0..n.unsigned_abs() {
        cur = step(cur);
        out.push(cur);
    }
    Ok(out)
}

/// A finite word of base-`b` digits `k(ξ₀), k(ξ₁), …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitWord {
    digits: Vec<u32>,
    base: u32,
}

impl DigitWord {
    pub fn new(base: u32, digits: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidArgument(format!("base must be >= 2, got {base}")));
        }
        if let Some(d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidArgument(format!("digit {d} out of range for base {base}")));
        }
        Ok(Self { digits, base })
    }

    /// The first `n` digits `k(τⁱξ)` of `ξ`.
    pub fn from_xi(base: u32, xi: f64, n: usize) -> Self {
        let mut u = xi;
        let mut digits = Vec::with_capacity(n);
        for _ in 0..n {
            let (next, k) = base_map(base, u);
            digits.push(k);
            u = next;
        }
        Self { digits, base }
    }

    /// `n` iid uniform digits.
    pub fn random<R: Rng + ?Sized>(base: u32, n: usize, rng: &mut R) -> Self {
        Self {
            digits: (0..n).map(|_| rng.gen_range(0..base)).collect(),
            base,
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `k_n = Σ_{i<n} bⁱ·digits[i]`, exact.
    pub fn k_n(&self, n: usize) -> Result<BigUint> {
        if n > self.digits.len() {
            return Err(Error::NotEnoughDigits {
                needed: n,
                available: self.digits.len(),
            });
        }
        let b = BigUint::from(self.base);
        Ok(self.digits[..n]
            .iter()
            .rev()
            .fold(BigUint::from(0u32), |acc, &d| acc * &b + BigUint::from(d)))
    }
}

/// Exact `k_n` together with the floating residual of `k_n = bⁿxₙ − x`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnCheck {
    pub k_n: BigUint,
    /// `|k_n − (bⁿxₙ − x)|`, only for `n ≤ 30`.
    pub residual: Option<f64>,
}

pub fn k_n_exact(word: &DigitWord, x: f64, n: usize) -> Result<KnCheck> {
    let k_n = word.k_n(n)?;
    let residual = if n <= KN_FLOAT_WINDOW {
        let b = f64::from(word.base());
        let x_n = word.digits()[..n]
            .iter()
            .fold(x, |acc, &d| (acc + f64::from(d)) / b);
        let kf: f64 = k_n.to_string().parse().unwrap_or(f64::INFINITY);
        Some((kf - (b.powi(n as i32) * x_n - x)).abs())
    } else {
        None
    };
    Ok(KnCheck { k_n, residual })
}

/// A base point `(ξ, x)` with `ξ` stored through its digit word, as used by
/// the stable-fiber series.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicPoint {
    pub word: DigitWord,
    pub x: f64,
}

impl SymbolicPoint {
    pub fn new(word: DigitWord, x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidArgument(format!("x must lie in [0, 1), got {x}")));
        }
        Ok(Self { word, x })
    }

    pub fn from_state(s: &OrbitState, n_digits: usize) -> Self {
        Self {
            word: DigitWord::from_xi(s.base, s.xi, n_digits),
            x: s.x,
        }
    }

    /// `n_digits` iid uniform digits and a uniform `x`.
    pub fn random<R: Rng + ?Sized>(base: u32, n_digits: usize, rng: &mut R) -> Self {
        let word = DigitWord::random(base, n_digits, rng);
        Self {
            word,
            x: rng.gen::<f64>(),
        }
    }

    pub fn base(&self) -> u32 {
        self.word.base()
    }

    /// `Bⁿ(ξ, x)`: drops the first `n` digits and advances `x` to `xₙ`.
    pub fn push_forward(&self, n: usize) -> Result<Self> {
        let digits = self.word.digits();
        if n > digits.len() {
            return Err(Error::NotEnoughDigits {
                needed: n,
                available: digits.len(),
            });
        }
        let b = f64::from(self.base());
        let x = digits[..n]
            .iter()
            .fold(self.x, |acc, &d| clamp_unit((acc + f64::from(d)) / b));
        Ok(Self {
            word: DigitWord {
                digits: digits[n..].to_vec(),
                base: self.base(),
            },
            x,
        })
    }

    /// `B⁻ⁿ(ξ, x)`: prepends the digits `k(x₋ₙ₊₁), …, k(x₀)` and moves `x` to `x₋ₙ = τⁿ(x)`.
    pub fn pull_back(&self, n: usize) -> Self {
        let b = self.base();
        let mut x = self.x;
        let mut prefix = Vec::with_capacity(n);
        for _ in 0..n {
            let (next, k) = base_map(b, x);
            prefix.push(k);
            x = next;
        }
        prefix.reverse();
        prefix.extend_from_slice(self.word.digits());
        Self {
            word: DigitWord { digits: prefix, base: b },
            x,
        }
    }
}

/// One step of `F(ξ, x, y) = (B(ξ, x), λy + g((x + k(ξ))/b))`.
pub fn skew_step_f(wf: &WeierstrassFunction, xi: f64, x: f64, y: f64) -> (f64, f64, f64) {
    let b = wf.params().b();
    let (xi1, k) = base_map(b, xi);
    let x1 = clamp_unit((x + f64::from(k)) / f64::from(b));
    let y1 = wf.params().lambda() * y + wf.ridge().value(x1);
    (xi1, x1, y1)
}

/// One step of the repellor `Φ(u, v) = (bu mod 1, (v − g(u))/λ)`.
pub fn skew_step_phi(wf: &WeierstrassFunction, u: f64, v: f64) -> (f64, f64) {
    let (u1, _) = base_map(wf.params().b(), u);
    (u1, (v - wf.ridge().value(u)) / wf.params().lambda())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weierstrass::{RidgeFunction, SystemParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn st(xi: f64, x: f64, b: u32) -> OrbitState {
        OrbitState::new(xi, x, b).unwrap()
    }

    fn ulp(v: f64) -> f64 {
        f64::from_bits(v.abs().to_bits() + 1) - v.abs()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn base_map_examples() {
        assert_eq!(base_map(2, 0.75), (0.5, 1));
        let (t, k) = base_map(3, 0.1);
        assert!(close(t, 0.3, 1e-15) && k == 0);
        assert_eq!(base_map(2, 0.3), (0.6, 0));
    }

    #[test]
    fn base_map_edges_stay_in_unit_interval() {
        for b in 2..12u32 {
            for j in 0..b {
                let u = f64::from(j) / f64::from(b);
                for v in [u, crate::weierstrass::frac(u - 1e-17), u + f64::EPSILON] {
                    if !(0.0..1.0).contains(&v) {
                        continue;
                    }
                    let (t, k) = base_map(b, v);
                    assert!((0.0..1.0).contains(&t), "b={b} u={v} t={t}");
                    assert!(k < b);
                }
            }
        }
    }

    #[test]
    fn forward_examples() {
        let s = baker_forward(st(0.3, 0.1, 2));
        assert!(close(s.xi, 0.6, 1e-15) && close(s.x, 0.05, 1e-15));
        let s = baker_forward(st(0.6, 0.05, 2));
        assert!(close(s.xi, 0.2, 1e-15) && close(s.x, 0.525, 1e-15));
        assert_eq!(baker_forward(st(0.0, 0.0, 2)), st(0.0, 0.0, 2));
    }

    #[test]
    fn backward_examples() {
        let s = baker_backward(st(0.3, 0.1, 2));
        assert!(close(s.xi, 0.15, 1e-15) && close(s.x, 0.2, 1e-15));
        let f = baker_forward(s);
        assert!(close(f.xi, 0.3, 1e-15) && close(f.x, 0.1, 1e-15));
        assert_eq!(baker_backward(st(0.0, 0.0, 2)), st(0.0, 0.0, 2));
    }

    #[test]
    fn round_trip_within_one_place() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for b in [2u32, 3, 5] {
            for _ in 0..10_000 {
                let s = st(rng.gen(), rng.gen(), b);
                let f = baker_forward(s);
                let r = baker_backward(f);
                // x passes through f.x, whose last place is magnified by b
                let x_tol = f64::EPSILON.max(f64::from(b) * ulp(f.x));
                assert!(close(r.xi, s.xi, f64::EPSILON), "{s:?} -> {r:?}");
                assert!(close(r.x, s.x, x_tol), "{s:?} -> {r:?}");
            }
        }
    }

    #[test]
    fn orbit_segment_examples() {
        let seg = orbit_segment(st(0.3, 0.1, 2), 3).unwrap();
        assert_eq!(seg.len(), 4);
        assert!(close(seg[3].x, 0.2625, 1e-15));
        assert!(close(seg[3].x, (0.1 + 2.0) / 8.0, 1e-15));
        let back = orbit_segment(st(0.3, 0.1, 2), -1).unwrap();
        assert!(close(back[1].xi, 0.15, 1e-15) && close(back[1].x, 0.2, 1e-15));
        assert_eq!(orbit_segment(st(0.3, 0.1, 2), 0).unwrap(), vec![st(0.3, 0.1, 2)]);
        assert!(orbit_segment(st(0.3, 0.1, 2), 1_000_001).is_err());
    }

    #[test]
    fn k_n_examples() {
        let w = DigitWord::from_xi(2, 0.3, 3);
        assert_eq!(w.digits(), &[0, 1, 0]);
        let chk = k_n_exact(&w, 0.1, 3).unwrap();
        assert_eq!(chk.k_n, BigUint::from(2u32));
        assert!(chk.residual.unwrap() <= 1e-12);
        let zero = DigitWord::from_xi(2, 0.0, 40);
        assert_eq!(zero.k_n(40).unwrap(), BigUint::from(0u32));
        assert_eq!(
            w.k_n(4),
            Err(Error::NotEnoughDigits {
                needed: 4,
                available: 3
            })
        );
        assert!(k_n_exact(&zero, 0.2, 40).unwrap().residual.is_none());
    }

    #[test]
    fn k_n_exceeds_64_bits() {
        let w = DigitWord::new(3, vec![2; 50]).unwrap();
        // Σ_{i<50} 2·3ⁱ = 3⁵⁰ − 1
        assert_eq!(w.k_n(50).unwrap(), BigUint::from(3u32).pow(50) - 1u32);
    }

    #[test]
    fn digit_word_rejects_out_of_range() {
        assert!(DigitWord::new(2, vec![0, 2]).is_err());
        assert!(DigitWord::new(1, vec![]).is_err());
    }

    #[test]
    fn symbolic_point_shift_matches_orbit() {
        let s = st(0.3, 0.1, 2);
        let p = SymbolicPoint::from_state(&s, 10);
        let q = p.push_forward(3).unwrap();
        assert!(close(q.x, 0.2625, 1e-15));
        assert_eq!(q.word.digits(), &DigitWord::from_xi(2, 0.3, 10).digits()[3..]);
        let back = q.pull_back(3);
        assert!(close(back.x, 0.1, 1e-14));
        assert_eq!(back.word.digits(), p.word.digits());
    }

    #[test]
    fn skew_product_examples() {
        let wf = WeierstrassFunction::with_default_tol(
            SystemParams::new(2, 0.6).unwrap(),
            RidgeFunction::Cosine,
        )
        .unwrap();
        let (a, b, c) = skew_step_f(&wf, 0.0, 0.0, 2.5);
        assert_eq!((a, b), (0.0, 0.0));
        assert!(close(c, 2.5, 1e-15));
        let (u, v) = skew_step_phi(&wf, 0.0, 2.5);
        assert_eq!(u, 0.0);
        assert!(close(v, 2.5, 1e-12));
        // ∂Φ₂/∂v = 1/λ
        let (_, v2) = skew_step_phi(&wf, 0.0, 2.5 + 1e-3);
        assert!(close((v2 - v) / 1e-3, 1.0 / 0.6, 1e-9));
    }
}
