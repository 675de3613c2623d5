//! Box counting on the graph of `W`, Monte Carlo measures of the fiber
//! neighbourhoods `V_N`, the telescoping identity, and the measure-scaling
//! exponent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::SymbolicPoint;
use crate::error::{Error, Result};
use crate::fibers::ThetaEvaluator;
use crate::fit::{median, ScalingFit};
use crate::mc::{self, Proportion};
use crate::weierstrass::WeierstrassFunction;

/// Largest scale exponent accepted by the box and neighbourhood estimators.
pub const MAX_SCALE: u32 = 12;

/// Largest `N` for the telescoping and scaling estimators.
pub const MAX_TELESCOPE: u32 = 10;

const JOB_BOX: u16 = 10;
const JOB_VN: u16 = 11;
const JOB_RECT: u16 = 12;
const JOB_STRIP: u16 = 13;
const JOB_POINTS: u16 = 14;

/// `V_N(ξ, x)`: the part of the graph over the `b`-adic interval
/// `I_N(x)` lying within `K·b^{−N}` of the stable fiber through `(ξ, x, W(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxNeighborhood {
    pub point: SymbolicPoint,
    pub n: u32,
    pub k: f64,
    pub interval: (f64, f64),
}

impl BoxNeighborhood {
    /// `k = None` picks `K = K₁ + 1`.
    pub fn new(ev: &ThetaEvaluator, point: SymbolicPoint, n: u32, k: Option<f64>) -> Result<Self> {
        if n > MAX_SCALE {
            return Err(Error::InvalidArgument(format!("N must be <= {MAX_SCALE}, got {n}")));
        }
        let k = k.unwrap_or_else(|| default_k(ev));
        if !(k >= 0.0) {
            return Err(Error::InvalidArgument(format!("K must be non-negative, got {k}")));
        }
        ev.prepared_digits(&point)?;
        let interval = b_adic_interval(ev.function().params().b(), n, point.x);
        Ok(Self { point, n, k, interval })
    }

    pub fn width(&self) -> f64 {
        self.interval.1 - self.interval.0
    }
}

/// `count` random base points carrying `n_max + extra_digits` digits.
pub fn random_points(ev: &ThetaEvaluator, count: usize, extra_digits: usize, seed: u64) -> Vec<SymbolicPoint> {
    let mut rng = mc::substream(seed, mc::tag(JOB_POINTS, 0, 0, 0), 0);
    let b = ev.function().params().b();
    (0..count)
        .map(|_| SymbolicPoint::random(b, ev.n_max() + extra_digits, &mut rng))
        .collect()
}

/// `K₁ + 1`.
pub fn default_k(ev: &ThetaEvaluator) -> f64 {
    ev.slope_bound() + 1.0
}

/// `n₁ = ⌈log_b(2K₁ + 1)⌉ + 1`.
pub fn sandwich_shift(ev: &ThetaEvaluator) -> u32 {
    let b = f64::from(ev.function().params().b());
    ((2.0 * ev.slope_bound() + 1.0).ln() / b.ln()).ceil() as u32 + 1
}

/// The interval `[j b^{−N}, (j+1) b^{−N})` containing `x`.
pub fn b_adic_interval(b: u32, n: u32, x: f64) -> (f64, f64) {
    let scale = f64::from(b).powi(n as i32);
    let mut j = (x * scale).floor();
    if j / scale > x {
        j -= 1.0;
    } else if (j + 1.0) / scale <= x {
        j += 1.0;
    }
    (j / scale, (j + 1.0) / scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountRow {
    pub n: u32,
    pub log_scale: f64,
    /// Count with the Hölder correction (an upper estimate).
    pub box_count: u64,
    /// Count from the sampled oscillation alone (a lower estimate).
    pub sampled_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    pub rows: Vec<BoxCountRow>,
    /// Fit of `log box_count` against `log b^N`; the slope estimates `D`.
    pub fit: ScalingFit,
    /// Same fit for `sampled_count`.
    pub sampled_fit: ScalingFit,
}

/// Box-counting dimension of the graph over `N_min..=N_max`.
///
/// Each of the `b^N` columns is sampled at `samples_per_column` jittered
/// stratified points. The oscillation over the column is the sampled range
/// plus `2·C_H·h^{2−D}`, where `h` bounds the distance from any point of the
/// column to the nearest sample; the column then contributes
/// `⌊osc·b^N⌋ + 1` boxes.
pub fn box_dimension(
    wf: &WeierstrassFunction,
    n_min: u32,
    n_max: u32,
    samples_per_column: usize,
    seed: u64,
) -> Result<BoxDimension> {
    if !(2 <= n_min && n_min < n_max && n_max <= MAX_SCALE) {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= N_min < N_max <= {MAX_SCALE}, got {n_min}..{n_max}"
        )));
    }
    if samples_per_column < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples per column".into()));
    }
    let b = wf.params().b();
    let c_h = wf.holder_constant();
    let exponent = 2.0 - wf.params().dim_d();
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        let columns = (b as usize).pow(n);
        let width = 1.0 / columns as f64;
        let per_group = (mc::CHUNK / samples_per_column).max(1);
        let stratum = width / samples_per_column as f64;
        let groups = mc::map_streams(columns.div_ceil(per_group), seed, mc::tag(JOB_BOX, u64::from(n), 0, 0), |g, rng| {
            let mut upper = 0u64;
            let mut lower = 0u64;
            for col in g * per_group..((g + 1) * per_group).min(columns) {
                let left = col as f64 * width;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let mut prev = left;
                let mut gap = 0.0f64;
                for s in 0..samples_per_column {
                    let t = left + (s as f64 + rng.gen::<f64>()) * stratum;
                    let w = wf.eval(t.min(1.0 - f64::EPSILON));
                    lo = lo.min(w);
                    hi = hi.max(w);
                    gap = gap.max(if s == 0 { t - prev } else { 0.5 * (t - prev) });
                    prev = t;
                }
                gap = gap.max(left + width - prev);
                let sampled = hi - lo;
                let corrected = sampled + 2.0 * c_h * gap.powf(exponent);
                lower += (sampled / width).floor() as u64 + 1;
                upper += (corrected / width).floor() as u64 + 1;
            }
            (upper, lower)
        });
        let (box_count, sampled_count) = groups.into_iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
        rows.push(BoxCountRow {
            n,
            log_scale: f64::from(n) * f64::from(b).ln(),
            box_count,
            sampled_count,
        });
    }
    let fit_of = |count: fn(&BoxCountRow) -> u64| -> Result<ScalingFit> {
        if rows.windows(2).all(|w| count(&w[0]) == count(&w[1])) {
            return Err(Error::DegenerateFit("all box counts are equal".into()));
        }
        ScalingFit::from_points(rows.iter().map(|r| (r.log_scale, (count(r) as f64).ln())).collect())
    };
    let fit = fit_of(|r| r.box_count)?;
    let sampled_fit = fit_of(|r| r.sampled_count)?;
    Ok(BoxDimension { rows, fit, sampled_fit })
}

/// A Monte Carlo measure: `value = fraction·scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub fraction: Proportion,
    pub scale: f64,
}

impl MeasureEstimate {
    pub fn value(&self) -> f64 {
        self.fraction.p_hat() * self.scale
    }

    pub fn stderr(&self) -> f64 {
        self.fraction.stderr() * self.scale
    }
}

fn point_tag(job: u16, p: &SymbolicPoint, n: u32) -> u64 {
    let bits = p.x.to_bits();
    let digest = p
        .word
        .digits()
        .iter()
        .take(32)
        .fold(0u64, |h, &d| h.wrapping_mul(31).wrapping_add(u64::from(d)));
    mc::tag(job, bits >> 40, (bits ^ digest) & 0xffff, u64::from(n))
}

/// Fraction of `v ∈ [a, a + width)` with `|Δ_p(v)| ≤ eps`.
#[allow(clippy::too_many_arguments)]
fn band_fraction(ev: &ThetaEvaluator, p: &SymbolicPoint, a: f64, width: f64, eps: f64, samples: usize, seed: u64, tag: u64) -> Result<Proportion> {
    let digits = ev.prepared_digits(p)?;
    let w_x = ev.function().eval(p.x);
    Ok(mc::count_hits(samples, seed, tag, |rng| {
        let v = (a + rng.gen::<f64>() * width).min(1.0 - f64::EPSILON);
        ev.delta_raw(digits, p.x, w_x, v).abs() <= eps
    }))
}

/// `μ(V_N)`: `b^{−N}` times the fraction of uniform `v ∈ I_N(x)` with
/// `|W(v) − W(x) − (ℓˢˢ(v) − ℓˢˢ(x))| ≤ K b^{−N}`.
pub fn v_n_measure(ev: &ThetaEvaluator, nb: &BoxNeighborhood, mc_samples: usize, seed: u64) -> Result<MeasureEstimate> {
    let width = nb.width();
    let fraction = band_fraction(
        ev,
        &nb.point,
        nb.interval.0,
        width,
        nb.k * width,
        mc_samples,
        seed,
        point_tag(JOB_VN, &nb.point, nb.n),
    )?;
    Ok(MeasureEstimate { fraction, scale: width })
}

/// Measure of the graph inside `I_{N+n₁}(x) × [W(x) − b^{−N}, W(x) + b^{−N}]`,
/// which sits between `V_{N+n₁}` and `V_N` for `K = K₁ + 1`.
pub fn rectangle_measure(ev: &ThetaEvaluator, point: &SymbolicPoint, n: u32, mc_samples: usize, seed: u64) -> Result<MeasureEstimate> {
    let b = ev.function().params().b();
    let m = n + sandwich_shift(ev);
    let (a, c) = b_adic_interval(b, m, point.x);
    let width = c - a;
    let half = f64::from(b).powi(-(n as i32));
    let wf = ev.function();
    let w_x = wf.eval(point.x);
    let fraction = mc::count_hits(mc_samples, seed, point_tag(JOB_RECT, point, n), |rng| {
        let v = (a + rng.gen::<f64>() * width).min(1.0 - f64::EPSILON);
        (wf.eval(v) - w_x).abs() <= half
    });
    Ok(MeasureEstimate { fraction, scale: width })
}

/// Fraction of uniform `x′ ∈ [0, 1)` with `|Δ_{ξ₋N}(x₋N, x′)| ≤ Kγ^N`.
pub fn strip_fraction(ev: &ThetaEvaluator, point: &SymbolicPoint, n: u32, k: f64, mc_samples: usize, seed: u64) -> Result<Proportion> {
    if n > MAX_TELESCOPE {
        return Err(Error::InvalidArgument(format!("N must be <= {MAX_TELESCOPE}, got {n}")));
    }
    let back = point.pull_back(n as usize);
    let eps = k * ev.gamma().powi(n as i32);
    band_fraction(ev, &back, 0.0, 1.0, eps, mc_samples, seed, point_tag(JOB_STRIP, point, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelescopeCheck {
    pub n: u32,
    /// `μ(V_N)/b^{−N}`.
    pub lhs: Proportion,
    /// `m{x′ : |Δ_{ξ₋N}(x₋N, x′)| ≤ Kγ^N}`.
    pub rhs: Proportion,
    pub z_score: f64,
}

/// Both sides of `μ(V_N)/b^{−N} = m{x′ : |Δ_{ξ₋N}(x₋N, x′)| ≤ Kγ^N}`,
/// estimated independently.
pub fn telescope_check(ev: &ThetaEvaluator, point: &SymbolicPoint, n: u32, k: f64, mc_samples: usize, seed: u64) -> Result<TelescopeCheck> {
    if n > MAX_TELESCOPE {
        return Err(Error::InvalidArgument(format!("N must be <= {MAX_TELESCOPE}, got {n}")));
    }
    let nb = BoxNeighborhood::new(ev, point.clone(), n, Some(k))?;
    let lhs = v_n_measure(ev, &nb, mc_samples, seed)?.fraction;
    let rhs = strip_fraction(ev, point, n, k, mc_samples, seed)?;
    Ok(TelescopeCheck {
        n,
        lhs,
        rhs,
        z_score: lhs.z_score(&rhs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointScaling {
    /// `(N, estimate)` for every requested `N`.
    pub rows: Vec<(u32, Proportion)>,
    /// Fit of `log m` against `N log γ`; `None` with fewer than three
    /// non-zero cells.
    pub fit: Option<ScalingFit>,
    /// `N` values with no hits.
    pub dropped: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<PointScaling>,
    pub median_slope: Option<f64>,
}

/// Per base point, the exponent of `m{x′ : |Δ_{ξ₋N}(x₋N, x′)| ≤ Kγ^N}`
/// against `γ^N`, and the median over points.
pub fn measure_scaling_exponent(
    ev: &ThetaEvaluator,
    points: &[SymbolicPoint],
    n_list: &[u32],
    k: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<ScalingReport> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list.last().is_some_and(|&n| n > MAX_TELESCOPE) {
        return Err(Error::InvalidArgument(format!(
            "N list must be increasing with max <= {MAX_TELESCOPE}"
        )));
    }
    let ln_g = ev.gamma().ln();
    let points = points
        .iter()
        .map(|p| {
            let rows = n_list
                .iter()
                .map(|&n| strip_fraction(ev, p, n, k, mc_samples, seed).map(|e| (n, e)))
                .collect::<Result<Vec<_>>>()?;
            let dropped: Vec<u32> = rows.iter().filter(|r| r.1.hits == 0).map(|r| r.0).collect();
            let pts = rows
                .iter()
                .filter(|r| r.1.hits > 0)
                .map(|r| (f64::from(r.0) * ln_g, r.1.p_hat().ln()))
                .collect();
            Ok(PointScaling {
                rows,
                fit: ScalingFit::from_points(pts).ok(),
                dropped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slopes: Vec<f64> = points.iter().filter_map(|p| p.fit.as_ref().map(|f| f.slope)).collect();
    Ok(ScalingReport {
        median_slope: median(&slopes),
        points,
    })
}
