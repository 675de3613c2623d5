//! The threshold function `h_b` and its unique zero `λ_b` on `(1/b, 1)`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance kept from the poles of `h_b` and from the interval ends.
pub const POLE_MARGIN: f64 = 1e-9;

/// Points in the bracketing scan.
pub const SCAN_POINTS: usize = 64;

/// Smallest accepted bisection width.
pub const MIN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    pub b: u32,
    pub lambda_b: f64,
    /// `|h_b(λ_b)|`.
    pub residual: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
}

/// `h_b(λ)`:
///
/// ```text
/// b = 2:  1/(4λ²(2λ−1)²) + 1/(16λ²(4λ−1)²) − 5/(64λ²) + √2/(2λ) − 1
/// b ≥ 3:  1/(bλ−1)² + 1/(b²λ−1)² − sin²(π/b)
/// ```
pub fn h_b(b: u32, lambda: f64) -> Result<f64> {
    if b < 2 {
        return Err(Error::InvalidParams(format!("b must be >= 2, got {b}")));
    }
    let bf = f64::from(b);
    let domain = |reason: String| Error::Domain { b, lambda, reason };
    if !(lambda.is_finite() && lambda > 1.0 / bf && lambda < 1.0) {
        return Err(domain(format!("must lie in the open interval (1/{b}, 1)")));
    }
    let mut poles = vec![1.0 / bf];
    if b == 2 {
        poles.push(0.25);
    } else {
        poles.push(1.0 / (bf * bf));
    }
    if let Some(p) = poles.iter().find(|&&p| (lambda - p).abs() < POLE_MARGIN) {
        return Err(domain(format!("within {POLE_MARGIN} of the pole {p}")));
    }
    let l2 = lambda * lambda;
    Ok(if b == 2 {
        1.0 / (4.0 * l2 * (2.0 * lambda - 1.0).powi(2))
            + 1.0 / (16.0 * l2 * (4.0 * lambda - 1.0).powi(2))
            - 5.0 / (64.0 * l2)
            + SQRT_2 / (2.0 * lambda)
            - 1.0
    } else {
        1.0 / (bf * lambda - 1.0).powi(2) + 1.0 / (bf * bf * lambda - 1.0).powi(2)
            - (PI / bf).sin().powi(2)
    })
}

/// Brackets the sign change of `h_b` by a geometric scan away from the
/// left pole, then bisects to width `tol`.
pub fn solve_lambda_b(b: u32, tol: f64) -> Result<CriticalResult> {
    if b < 2 {
        return Err(Error::InvalidParams(format!("b must be >= 2, got {b}")));
    }
    if !(tol >= MIN_TOL) {
        return Err(Error::InvalidArgument(format!("tol must be >= {MIN_TOL}, got {tol}")));
    }
    let left = 1.0 / f64::from(b);
    let hi_end = 1.0 - POLE_MARGIN;
    let ratio = ((hi_end - left) / (2.0 * POLE_MARGIN)).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let scan: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|i| {
            let lambda = if i == SCAN_POINTS - 1 {
                hi_end
            } else {
                left + 2.0 * POLE_MARGIN * ratio.powi(i as i32)
            };
            h_b(b, lambda).map(|h| (lambda, h))
        })
        .collect::<Result<_>>()?;
    let changes: Vec<usize> = (1..scan.len())
        .filter(|&i| scan[i - 1].1.signum() != scan[i].1.signum())
        .collect();
    let table = || {
        scan.iter()
            .map(|(l, h)| format!("({l:.9}, {h:.3e})"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let i = match changes.as_slice() {
        [] => return Err(Error::NoSignChange { b, scan: table() }),
        [i] => *i,
        many => {
            return Err(Error::MultipleSignChanges {
                b,
                count: many.len(),
                scan: table(),
            })
        }
    };
    let (mut lo, mut h_lo) = scan[i - 1];
    let (mut hi, _) = scan[i];
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = h_b(b, mid)?;
        iterations += 1;
        if h_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if h_mid.signum() == h_lo.signum() {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    let lambda_b = 0.5 * (lo + hi);
    Ok(CriticalResult {
        b,
        lambda_b,
        residual: h_b(b, lambda_b)?.abs(),
        iterations,
        bracket: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_examples() {
        // 1/1.25² + 1/5.75² − sin²(π/3), by hand
        let expected = 1.0 / 1.5625 + 1.0 / 33.0625 - 0.75;
        assert!((h_b(3, 0.75).unwrap() - expected).abs() < 1e-12);
        assert!((expected + 0.079_755).abs() < 1e-6);
        assert!(h_b(3, 0.7269).unwrap().abs() < 1e-3);
        assert!(h_b(2, 0.9531).unwrap().abs() < 1e-3);
    }

    #[test]
    fn h_domain_errors() {
        assert!(matches!(h_b(3, 1.0 / 3.0), Err(Error::Domain { .. })));
        assert!(matches!(h_b(3, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(h_b(2, 0.5 + 1e-10), Err(Error::Domain { .. })));
        assert!(h_b(2, 0.5 + 1e-8).is_ok());
        assert!(h_b(1, 0.7).is_err());
    }

    #[test]
    fn published_thresholds() {
        for (b, expected) in [(2, 0.9531), (3, 0.7269), (4, 0.6083)] {
            let r = solve_lambda_b(b, MIN_TOL).unwrap();
            assert!((r.lambda_b - expected).abs() <= 5e-4, "b={b}: {}", r.lambda_b);
            assert!(r.residual <= 1e-10);
        }
    }

    #[test]
    fn large_b_asymptote() {
        let r = solve_lambda_b(1000, MIN_TOL).unwrap();
        assert!((r.lambda_b - (1.0 / PI + 1e-3)).abs() <= 0.01);
    }

    #[test]
    fn thresholds_decrease_and_bracket_sign_change() {
        let mut prev = f64::INFINITY;
        for b in 2..=16 {
            let r = solve_lambda_b(b, MIN_TOL).unwrap();
            assert!(r.lambda_b < prev);
            prev = r.lambda_b;
            let step = 10.0 * MIN_TOL;
            let lo = h_b(b, r.lambda_b - step).unwrap();
            let hi = h_b(b, r.lambda_b + step).unwrap();
            assert!(lo.signum() != hi.signum(), "b={b}");
            let d = crate::weierstrass::SystemParams::new(b, r.lambda_b).unwrap().dim_d();
            assert!(d > 1.0 && d < 2.0);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(solve_lambda_b(3, 1e-16).is_err());
        assert!(solve_lambda_b(3, f64::NAN).is_err());
    }
}
