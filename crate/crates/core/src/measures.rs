//! Distributional statistics of the fiber series: histogram densities, the
//! conditional laws `ν_x` of `Θ₀` and their capacity `H`, Bernoulli
//! convolutions, and concentration scans of `Θ_z`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibers::{bernoulli_sum, bernoulli_terms, ThetaEvaluator};
use crate::fit::ScalingFit;
use crate::mc::{self, Proportion};
use crate::weierstrass::RidgeFunction;

/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 512;

const JOB_THETA0: u16 = 1;
const JOB_BERNOULLI: u16 = 2;
const JOB_CONCENTRATION: u16 = 3;

/// Fixed-bin histogram over `[lo, hi]`, normalised by the total sample count
/// (out-of-range samples count towards the total but not towards any bin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub total_samples: u64,
}

impl EmpiricalDensity {
    pub fn from_samples(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if bins == 0 {
            return Err(Error::InvalidArgument("bins must be positive".into()));
        }
        let mut counts = vec![0u64; bins];
        let scale = bins as f64 / (hi - lo);
        for &s in samples {
            if s >= lo && s <= hi {
                let i = (((s - lo) * scale) as usize).min(bins - 1);
                counts[i] += 1;
            }
        }
        let d = Self {
            lo,
            hi,
            counts,
            total_samples: samples.len() as u64,
        };
        d.check_invariants()?;
        Ok(d)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w)
    }

    pub fn densities(&self) -> Vec<f64> {
        let norm = self.total_samples.max(1) as f64 * self.bin_width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// `Σ density·bin_width`.
    pub fn in_range_mass(&self) -> f64 {
        if self.total_samples == 0 {
            return 0.0;
        }
        self.counts.iter().sum::<u64>() as f64 / self.total_samples as f64
    }

    /// `Σ density²·bin_width`.
    pub fn l2_norm_sq(&self) -> f64 {
        if self.total_samples == 0 {
            return 0.0;
        }
        let n = self.total_samples as f64;
        let sq: f64 = self.counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
        sq / (n * n * self.bin_width())
    }

    /// Mass at most one and the Cauchy–Schwarz floor
    /// `‖h‖₂² ≥ mass²/(hi − lo)`.
    pub fn check_invariants(&self) -> Result<()> {
        let mass = self.in_range_mass();
        let l2 = self.l2_norm_sq();
        let floor = mass * mass / (self.hi - self.lo);
        if mass > 1.0 + 1e-12 || l2 < floor * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "histogram invariant violated: mass {mass}, L2 {l2}, floor {floor}"
            )));
        }
        Ok(())
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// the continuous CDF `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &s)| {
        let f = cdf(s);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

fn require_cosine(ev: &ThetaEvaluator, op: &'static str) -> Result<()> {
    if ev.function().ridge() != RidgeFunction::Cosine {
        return Err(Error::WrongRidge { op, expected: "cosine" });
    }
    Ok(())
}

fn fill_digits<R: Rng + ?Sized>(buf: &mut [u32], b: u32, rng: &mut R) {
    for d in buf.iter_mut() {
        *d = rng.gen_range(0..b);
    }
}

/// `n_samples` draws of `Θ₀(ξ, x)` at fixed `x` with iid uniform digits,
/// i.e. samples of `ν_x`.
pub fn sample_theta0_conditional(ev: &ThetaEvaluator, x: f64, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    require_cosine(ev, "sample_theta0_conditional")?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x must lie in [0, 1), got {x}")));
    }
    Ok(theta0_samples(ev, x, n_samples, seed, mc::tag(JOB_THETA0, x.to_bits() >> 32, x.to_bits() & 0xffff_ffff, 0)))
}

fn theta0_samples(ev: &ThetaEvaluator, x: f64, n: usize, seed: u64, tag: u64) -> Vec<f64> {
    let b = ev.function().params().b();
    let n_max = ev.n_max();
    mc::map_chunks(n, seed, tag, |range, rng| {
        let mut buf = vec![0u32; n_max];
        range
            .map(|_| {
                fill_digits(&mut buf, b, rng);
                ev.theta_raw(&buf, x, 0.0)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Capacity estimate together with the per-`x` values it averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    pub value: f64,
    pub per_x: Vec<(f64, f64)>,
}

/// `H ≈ mean over a uniform grid of x of ‖h_x‖₂²`, each `h_x` a histogram
/// on `[−B, B]`, `B = 2πγ/(1−γ)`.
///
/// The samples at grid point `i` depend only on `(seed, i)`, so estimates
/// with different bin counts share their samples.
pub fn capacity_h(ev: &ThetaEvaluator, x_grid_size: usize, samples_per_x: usize, bins: usize, seed: u64) -> Result<Capacity> {
    require_cosine(ev, "capacity_h")?;
    if x_grid_size == 0 || samples_per_x == 0 {
        return Err(Error::InvalidArgument("grid size and sample count must be positive".into()));
    }
    let bound = ev.theta_bound();
    let per_x = (0..x_grid_size)
        .map(|i| {
            let x = (i as f64 + 0.5) / x_grid_size as f64;
            let samples = theta0_samples(ev, x, samples_per_x, seed, mc::tag(JOB_THETA0, 1, i as u64, 0));
            EmpiricalDensity::from_samples(&samples, -bound, bound, bins).map(|d| (x, d.l2_norm_sq()))
        })
        .collect::<Result<Vec<_>>>()?;
    let value = per_x.iter().map(|p| p.1).sum::<f64>() / x_grid_size as f64;
    Ok(Capacity { value, per_x })
}

/// Samples of `Θ = Σ γⁿ Zₙ` with iid fair signs, truncated with tail at most `1e-12`.
pub fn bernoulli_samples(gamma: f64, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    let terms = bernoulli_terms(gamma, 1e-12)?;
    Ok(mc::map_chunks(n_samples, seed, mc::tag(JOB_BERNOULLI, 0, 0, 0), |range, rng| {
        let mut buf = vec![0u32; terms];
        range
            .map(|_| {
                fill_digits(&mut buf, 2, rng);
                bernoulli_sum(gamma, &buf)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect())
}

/// Histogram of the Bernoulli convolution on `[−γ/(1−γ), γ/(1−γ)]`.
pub fn bernoulli_density(gamma: f64, n_samples: usize, bins: usize, seed: u64) -> Result<EmpiricalDensity> {
    let samples = bernoulli_samples(gamma, n_samples, seed)?;
    let edge = gamma / (1.0 - gamma);
    EmpiricalDensity::from_samples(&samples, -edge, edge, bins)
}

/// Which series a concentration scan samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcentrationModel {
    /// `Θ_z(ξ, x)` of a cosine evaluator.
    Cosine(ThetaEvaluator),
    /// `Θ(ξ)` for base 2 with the given `γ`; independent of `z` and `x`.
    Bernoulli { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub z: f64,
    pub r: f64,
    /// The maximising center.
    pub center: f64,
    pub estimate: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub rows: Vec<ConcentrationRow>,
    /// `(z, fit of log P against log r)`.
    pub r_fits: Vec<(f64, ScalingFit)>,
    /// `(r, fit of log P against log |z|)`.
    pub z_fits: Vec<(f64, ScalingFit)>,
    /// Cells with no hits, left out of the fits.
    pub dropped: Vec<(f64, f64)>,
}

/// For each `(z, r)` with `2r < |z|`, the largest over `centers` of the
/// fraction of random `(ξ, x)` with `Θ_z(ξ, x) ∈ [c − r/|z|, c + r/|z|]`.
/// All `r` and centers at one `z` share the same samples.
pub fn concentration_scan(
    model: &ConcentrationModel,
    z_list: &[f64],
    r_list: &[f64],
    centers: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if centers.is_empty() || mc_samples == 0 {
        return Err(Error::InvalidArgument("need at least one center and one sample".into()));
    }
    if let ConcentrationModel::Cosine(ev) = model {
        require_cosine(ev, "concentration_scan")?;
    }
    if let ConcentrationModel::Bernoulli { gamma } = model {
        bernoulli_terms(*gamma, 1e-12)?;
    }
    for &z in z_list {
        for &r in r_list {
            if !(r > 0.0 && z != 0.0 && z.abs() <= 1.0 && 2.0 * r < z.abs()) {
                return Err(Error::InvalidArgument(format!("need r > 0, 0 < |z| <= 1 and 2r < |z|, got z = {z}, r = {r}")));
            }
        }
    }
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for (iz, &z) in z_list.iter().enumerate() {
        let tag = mc::tag(JOB_CONCENTRATION, iz as u64, 0, 0);
        let samples: Vec<f64> = match *model {
            ConcentrationModel::Cosine(ev) => {
                let b = ev.function().params().b();
                let n_max = ev.n_max();
                mc::map_chunks(mc_samples, seed, tag, |range, rng| {
                    let mut buf = vec![0u32; n_max];
                    range
                        .map(|_| {
                            fill_digits(&mut buf, b, rng);
                            let x: f64 = rng.gen();
                            ev.theta_raw(&buf, x, z)
                        })
                        .collect::<Vec<_>>()
                })
                .into_iter()
                .flatten()
                .collect()
            }
            ConcentrationModel::Bernoulli { gamma } => bernoulli_samples(gamma, mc_samples, seed ^ tag)?,
        };
        let mut sorted = samples;
        sorted.sort_by(f64::total_cmp);
        for &r in r_list {
            let half = r / z.abs();
            let (center, hits) = centers
                .iter()
                .map(|&c| (c, count_in(&sorted, c - half, c + half)))
                .fold((centers[0], 0u64), |best, cur| if cur.1 > best.1 { cur } else { best });
            if hits == 0 {
                dropped.push((z, r));
            }
            rows.push(ConcentrationRow {
                z,
                r,
                center,
                estimate: Proportion {
                    hits,
                    n: mc_samples as u64,
                },
            });
        }
    }
    let fit_over = |pick: &dyn Fn(&ConcentrationRow) -> Option<f64>| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|row| row.estimate.hits > 0)
            .filter_map(|row| pick(row).map(|x| (x, row.estimate.p_hat().ln())))
            .collect();
        ScalingFit::from_points(pts).ok()
    };
    let r_fits = z_list
        .iter()
        .filter_map(|&z| fit_over(&|row| (row.z == z).then(|| row.r.ln())).map(|f| (z, f)))
        .collect();
    let z_fits = r_list
        .iter()
        .filter_map(|&r| fit_over(&|row| (row.r == r).then(|| row.z.abs().ln())).map(|f| (r, f)))
        .collect();
    Ok(ConcentrationReport {
        rows,
        r_fits,
        z_fits,
        dropped,
    })
}

fn count_in(sorted: &[f64], lo: f64, hi: f64) -> u64 {
    let a = sorted.partition_point(|&s| s < lo);
    let b = sorted.partition_point(|&s| s <= hi);
    (b - a) as u64
}
