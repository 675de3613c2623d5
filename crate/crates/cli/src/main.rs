//! `wgraph`: command-line access to the Weierstrass-graph estimators.
//!
//! Scalar results default to JSON and tables to CSV; `--format` overrides.
//! Every JSON object carries the run configuration under `"config"`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use wgraph::dimension::{self, BoxNeighborhood};
use wgraph::measures::{self, ConcentrationModel, EmpiricalDensity};
use wgraph::schedule;
use wgraph::{
    solve_lambda_b, DigitWord, Error, RidgeFunction, SymbolicPoint, SystemParams, ThetaEvaluator,
    TruncationSchedule, WeierstrassFunction,
};

#[derive(Parser, Serialize)]
#[command(name = "wgraph", version, about = "Dimension numerics for Weierstrass-type graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; defaults to json for scalar results and csv for tables.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (0 = available parallelism). Never changes results.
    #[arg(long, global = true, env = "WGRAPH_THREADS", default_value_t = 0)]
    #[serde(skip)]
    threads: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Ridge {
    Cos,
    Pwl,
}

impl From<Ridge> for RidgeFunction {
    fn from(r: Ridge) -> Self {
        match r {
            Ridge::Cos => RidgeFunction::Cosine,
            Ridge::Pwl => RidgeFunction::PiecewiseLinear,
        }
    }
}

#[derive(Args, Serialize)]
struct System {
    /// Base b >= 2.
    #[arg(long, default_value_t = 3)]
    b: u32,
    /// Amplitude ratio, 1/b < lambda < 1.
    #[arg(long, default_value_t = 0.8)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = Ridge::Cos)]
    ridge: Ridge,
    /// Absolute tolerance on every truncated series.
    #[arg(long, default_value_t = 1e-12)]
    tail_tol: f64,
}

impl System {
    fn function(&self) -> Result<WeierstrassFunction, Error> {
        WeierstrassFunction::new(SystemParams::new(self.b, self.lambda)?, self.ridge.into(), self.tail_tol)
    }

    fn evaluator(&self) -> Result<ThetaEvaluator, Error> {
        ThetaEvaluator::for_function(self.function()?)
    }
}

#[derive(Args, Serialize)]
struct BasePoint {
    /// Base point ξ; drawn from the seed when omitted.
    #[arg(long)]
    xi: Option<f64>,
    /// Base point x; drawn from the seed when omitted.
    #[arg(long)]
    x: Option<f64>,
}

impl BasePoint {
    fn resolve(&self, ev: &ThetaEvaluator, extra: usize, seed: u64) -> Result<SymbolicPoint, Error> {
        let random = dimension::random_points(ev, 1, extra, seed).remove(0);
        let b = ev.function().params().b();
        let word = match self.xi {
            Some(xi) if (0.0..1.0).contains(&xi) => DigitWord::from_xi(b, xi, ev.n_max() + extra),
            Some(xi) => return Err(Error::InvalidArgument(format!("xi must lie in [0, 1), got {xi}"))),
            None => random.word,
        };
        SymbolicPoint::new(word, self.x.unwrap_or(random.x))
    }
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Evaluate W at a point.
    Eval {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Solve h_b(λ) = 0 for the critical parameter λ_b.
    Lambdab {
        #[arg(long, default_value_t = 3)]
        b: u32,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
    /// Box-counting dimension of the graph.
    Boxdim {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        #[arg(long, default_value_t = 3)]
        nmin: u32,
        #[arg(long, default_value_t = 9)]
        nmax: u32,
        #[arg(long, default_value_t = 64)]
        samples_per_column: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Local dimension ratios log μ(V_N)/log b^{−N}.
    Localdim {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        #[command(flatten)]
        #[serde(flatten)]
        point: BasePoint,
        #[arg(long, default_value_t = 1)]
        nmin: u32,
        #[arg(long, default_value_t = 8)]
        nmax: u32,
        /// Band multiplier K; defaults to K₁ + 1.
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Both sides of the telescoping identity.
    Telescope {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        #[command(flatten)]
        #[serde(flatten)]
        point: BasePoint,
        #[arg(long = "n", value_delimiter = ',', default_value = "2,4,6")]
        n_list: Vec<u32>,
        /// Band multiplier K; defaults to K₁ + 1.
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure-scaling exponents over random base points.
    Scaling {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long = "n", value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
        n_list: Vec<u32>,
        /// Band multiplier K; defaults to K₁ + 1.
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Histogram of the conditional law of Θ₀ at fixed x, and optionally the capacity H.
    ThetaStats {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 512)]
        bins: usize,
        /// Grid size for the capacity estimate; 0 skips it.
        #[arg(long, default_value_t = 0)]
        capacity_grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Histogram of the Bernoulli convolution Σ γⁿ Zₙ.
    Bernoulli {
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 512)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Truncation schedule and the calibrated composite constant.
    Schedule {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        #[arg(long, default_value_t = 3)]
        ell: usize,
        #[arg(long, default_value_t = 1e-4)]
        r: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.1)]
        z: f64,
        /// Random base points for calibrating the composite constant.
        #[arg(long, default_value_t = 1000)]
        sweep: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Concentration of Θ_z on intervals of length 2r/|z|.
    Concentration {
        #[command(flatten)]
        #[serde(flatten)]
        system: System,
        /// Sample the base-2 Bernoulli series with this γ instead of Θ_z.
        #[arg(long)]
        bernoulli_gamma: Option<f64>,
        #[arg(long = "z", value_delimiter = ',', allow_hyphen_values = true, default_value = "0.2")]
        z_list: Vec<f64>,
        #[arg(long = "r", value_delimiter = ',', default_value = "0.01,0.003,0.001")]
        r_list: Vec<f64>,
        /// Interval centers; defaults to 41 points evenly covering the central half of the range.
        #[arg(long = "centers", value_delimiter = ',', allow_hyphen_values = true)]
        centers: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A result as a JSON object and as a CSV table.
struct Output {
    fields: Map<String, Value>,
    header: &'static str,
    rows: Vec<String>,
    tabular: bool,
}

fn e(v: f64) -> String {
    format!("{v:.16e}")
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("results are objects"),
    }
}

fn histogram_rows(d: &EmpiricalDensity) -> Vec<String> {
    d.densities()
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let (l, r) = d.bin_edges(i);
            format!("{},{},{}", e(l), e(r), e(*h))
        })
        .collect()
}

fn run(cmd: &Command) -> Result<Output, Error> {
    Ok(match cmd {
        Command::Eval { system, x } => {
            let wf = system.function()?;
            if !x.is_finite() {
                return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
            }
            let value = wf.eval(*x);
            Output {
                fields: obj(json!({ "x": x, "value": value, "n_terms": wf.n_terms() })),
                header: "x,value",
                rows: vec![format!("{},{}", e(*x), e(value))],
                tabular: false,
            }
        }
        Command::Lambdab { b, tol } => {
            let r = solve_lambda_b(*b, *tol)?;
            let dim = SystemParams::new(*b, r.lambda_b)?.dim_d();
            Output {
                fields: obj(json!({
                    "b": r.b,
                    "lambda_b": r.lambda_b,
                    "residual": r.residual,
                    "iterations": r.iterations,
                    "bracket": [r.bracket.0, r.bracket.1],
                    "dimension_at_lambda_b": dim,
                })),
                header: "b,lambda_b,residual",
                rows: vec![format!("{},{},{}", r.b, e(r.lambda_b), e(r.residual))],
                tabular: false,
            }
        }
        Command::Boxdim {
            system,
            nmin,
            nmax,
            samples_per_column,
            seed,
        } => {
            let wf = system.function()?;
            let bd = dimension::box_dimension(&wf, *nmin, *nmax, *samples_per_column, *seed)?;
            Output {
                fields: obj(json!({
                    "slope": bd.fit.slope,
                    "intercept": bd.fit.intercept,
                    "max_residual": bd.fit.max_residual,
                    "sampled_slope": bd.sampled_fit.slope,
                    "dimension_formula": wf.params().dim_d(),
                    "rows": bd.rows,
                })),
                header: "N,log_scale,box_count",
                rows: bd
                    .rows
                    .iter()
                    .map(|r| format!("{},{},{}", r.n, e(r.log_scale), r.box_count))
                    .collect(),
                tabular: true,
            }
        }
        Command::Localdim {
            system,
            point,
            nmin,
            nmax,
            k,
            samples,
            seed,
        } => {
            let ev = system.evaluator()?;
            if nmin > nmax || *nmin == 0 {
                return Err(Error::InvalidArgument(format!("need 1 <= nmin <= nmax, got {nmin}..{nmax}")));
            }
            let p = point.resolve(&ev, 0, *seed)?;
            let b = f64::from(ev.function().params().b());
            let mut rows = Vec::new();
            let mut table = Vec::new();
            for n in *nmin..=*nmax {
                let nb = BoxNeighborhood::new(&ev, p.clone(), n, *k)?;
                let m = dimension::v_n_measure(&ev, &nb, *samples, *seed)?;
                let ratio = m.value().ln() / (-f64::from(n) * b.ln());
                rows.push(format!("{},{},{}", n, e(m.value()), e(ratio)));
                table.push(json!({ "N": n, "mu_VN": m.value(), "stderr": m.stderr(), "ratio": ratio }));
            }
            Output {
                fields: obj(json!({ "x": p.x, "rows": table, "dimension_formula": ev.function().params().dim_d() })),
                header: "N,mu_VN,ratio",
                rows,
                tabular: true,
            }
        }
        Command::Telescope {
            system,
            point,
            n_list,
            k,
            samples,
            seed,
        } => {
            let ev = system.evaluator()?;
            let p = point.resolve(&ev, 0, *seed)?;
            let k = k.unwrap_or_else(|| dimension::default_k(&ev));
            let checks = n_list
                .iter()
                .map(|&n| dimension::telescope_check(&ev, &p, n, k, *samples, *seed))
                .collect::<Result<Vec<_>, _>>()?;
            Output {
                fields: obj(json!({ "x": p.x, "k": k, "rows": checks })),
                header: "N,lhs,rhs,z_score",
                rows: checks
                    .iter()
                    .map(|c| format!("{},{},{},{}", c.n, e(c.lhs.p_hat()), e(c.rhs.p_hat()), e(c.z_score)))
                    .collect(),
                tabular: true,
            }
        }
        Command::Scaling {
            system,
            points,
            n_list,
            k,
            samples,
            seed,
        } => {
            let ev = system.evaluator()?;
            let pts = dimension::random_points(&ev, *points, 0, *seed);
            let k = k.unwrap_or_else(|| dimension::default_k(&ev));
            let rep = dimension::measure_scaling_exponent(&ev, &pts, n_list, k, *samples, *seed)?;
            let rows = rep
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| match &p.fit {
                    Some(f) => format!("{},{},{},{}", i, e(f.slope), e(f.max_residual), p.dropped.len()),
                    None => format!("{},,,{}", i, p.dropped.len()),
                })
                .collect();
            Output {
                fields: obj(json!({
                    "median_slope": rep.median_slope,
                    "k": k,
                    "slopes": rep.points.iter().map(|p| p.fit.as_ref().map(|f| f.slope)).collect::<Vec<_>>(),
                    "dropped": rep.points.iter().map(|p| &p.dropped).collect::<Vec<_>>(),
                })),
                header: "point,slope,max_residual,dropped",
                rows,
                tabular: true,
            }
        }
        Command::ThetaStats {
            system,
            x,
            samples,
            bins,
            capacity_grid,
            seed,
        } => {
            let ev = system.evaluator()?;
            let s = measures::sample_theta0_conditional(&ev, *x, *samples, *seed)?;
            let bound = ev.theta_bound();
            let d = EmpiricalDensity::from_samples(&s, -bound, bound, *bins)?;
            let mean = s.iter().sum::<f64>() / s.len().max(1) as f64;
            let capacity = if *capacity_grid > 0 {
                Some(measures::capacity_h(&ev, *capacity_grid, *samples, *bins, *seed)?.value)
            } else {
                None
            };
            Output {
                fields: obj(json!({
                    "mean": mean,
                    "l2_norm_sq": d.l2_norm_sq(),
                    "in_range_mass": d.in_range_mass(),
                    "capacity_h": capacity,
                    "histogram": d,
                })),
                header: "bin_left,bin_right,density",
                rows: histogram_rows(&d),
                tabular: true,
            }
        }
        Command::Bernoulli {
            gamma,
            samples,
            bins,
            seed,
        } => {
            let s = measures::bernoulli_samples(*gamma, *samples, *seed)?;
            let edge = gamma / (1.0 - gamma);
            let d = EmpiricalDensity::from_samples(&s, -edge, edge, *bins)?;
            let ks = (*gamma == 0.5).then(|| measures::ks_distance(&s, |t| ((t + 1.0) / 2.0).clamp(0.0, 1.0)));
            Output {
                fields: obj(json!({
                    "l2_norm_sq": d.l2_norm_sq(),
                    "in_range_mass": d.in_range_mass(),
                    "max_abs": s.iter().fold(0.0f64, |m, t| m.max(t.abs())),
                    "ks_uniform": ks,
                    "histogram": d,
                })),
                header: "bin_left,bin_right,density",
                rows: histogram_rows(&d),
                tabular: true,
            }
        }
        Command::Schedule {
            system,
            ell,
            r,
            z,
            sweep,
            seed,
        } => {
            let ev = system.evaluator()?;
            let params = ev.function().params();
            let s = TruncationSchedule::new(params.gamma(), params.b(), *ell, *r, *z)?;
            let bound = schedule::composite_constant(params.gamma(), params.b());
            let mut calibrated = 0.0f64;
            if ev.function().ridge() == RidgeFunction::Cosine {
                for p in dimension::random_points(&ev, *sweep, s.n_cap + 1, *seed) {
                    for k in 1..=*ell {
                        calibrated = calibrated.max(schedule::composite_ratio(&ev, &p, &s, k)?);
                    }
                }
            }
            Output {
                fields: obj(json!({
                    "schedule": s,
                    "composite_constant_bound": bound,
                    "composite_constant_calibrated": calibrated,
                    "sweep": sweep,
                })),
                header: "k,n_k,d_k",
                rows: (0..=*ell)
                    .map(|k| format!("{},{},{}", k, s.n(k), if k == 0 { 0 } else { s.d(k) }))
                    .collect(),
                tabular: false,
            }
        }
        Command::Concentration {
            system,
            bernoulli_gamma,
            z_list,
            r_list,
            centers,
            samples,
            seed,
        } => {
            let (model, half_range) = match bernoulli_gamma {
                Some(g) => (ConcentrationModel::Bernoulli { gamma: *g }, g / (1.0 - g)),
                None => {
                    let ev = system.evaluator()?;
                    (ConcentrationModel::Cosine(ev), ev.theta_bound())
                }
            };
            let centers = if centers.is_empty() {
                (-20..=20).map(|i| f64::from(i) / 40.0 * half_range).collect()
            } else {
                centers.clone()
            };
            let rep = measures::concentration_scan(&model, z_list, r_list, &centers, *samples, *seed)?;
            Output {
                fields: obj(json!({
                    "rows": rep.rows,
                    "r_exponents": rep.r_fits.iter().map(|(z, f)| json!({ "z": z, "slope": f.slope })).collect::<Vec<_>>(),
                    "z_exponents": rep.z_fits.iter().map(|(r, f)| json!({ "r": r, "slope": f.slope })).collect::<Vec<_>>(),
                    "dropped": rep.dropped,
                })),
                header: "z,r,p_hat,stderr",
                rows: rep
                    .rows
                    .iter()
                    .map(|row| format!("{},{},{},{}", e(row.z), e(row.r), e(row.estimate.p_hat()), e(row.estimate.stderr())))
                    .collect(),
                tabular: true,
            }
        }
    })
}

fn render(cli: &Cli, out: Output) -> String {
    let csv = match cli.format {
        Some(f) => f == Format::Csv,
        None => out.tabular,
    };
    if csv {
        let mut s = String::from(out.header);
        s.push('\n');
        for row in out.rows {
            s.push_str(&row);
            s.push('\n');
        }
        s
    } else {
        let mut fields = out.fields;
        fields.insert("config".into(), serde_json::to_value(cli).expect("config serialises"));
        let mut s = serde_json::to_string_pretty(&Value::Object(fields)).expect("output serialises");
        s.push('\n');
        s
    }
}

fn write_out(cli: &Cli, text: &str) -> io::Result<()> {
    match &cli.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(text.as_bytes())?;
            w.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("wgraph: cannot start thread pool: {err}");
            return ExitCode::from(1);
        }
    }
    let out = match run(&cli.command) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("wgraph: {err}");
            return ExitCode::from(1);
        }
    };
    let text = render(&cli, out);
    if let Err(err) = write_out(&cli, &text) {
        eprintln!("wgraph: cannot write output: {err}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
