//! Adaptive Simpson quadrature with an absolute error target.

use crate::error::{Error, Result};

/// Maximum interval-halving depth.
pub const MAX_DEPTH: u32 = 40;

/// Evaluation budget per integral.
pub const MAX_EVALUATIONS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// `∫_a^b f` to absolute tolerance `tol`. Reversed limits give the negated
/// integral.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut st = State {
        evaluations: 3,
        error: 0.0,
        converged: true,
    };
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut st);
    if st.converged {
        Ok(Quadrature {
            value,
            error_estimate: st.error,
            evaluations: st.evaluations,
        })
    } else {
        Err(Error::QuadratureNotConverged {
            estimate: value,
            error_estimate: st.error,
        })
    }
}

struct State {
    evaluations: usize,
    error: f64,
    converged: bool,
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    st: &mut State,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    st.evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol {
        st.error += diff.abs() / 15.0;
        return left + right + diff / 15.0;
    }
    if depth == 0 || st.evaluations >= MAX_EVALUATIONS {
        st.converged = false;
        st.error += diff.abs() / 15.0;
        return left + right + diff / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, st)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, st)
}
