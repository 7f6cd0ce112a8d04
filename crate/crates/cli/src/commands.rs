use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use tordisc_core::discrepancy::fourier::{diaphony_truncated, periodic_l2_fourier_truncated};
use tordisc_core::discrepancy::oracle::l2_discrepancy_oracle;
use tordisc_core::discrepancy::spectral::periodic_l2_spectral;
use tordisc_core::io::{self, PointFile};
use tordisc_core::latin::{enumerate_all, UniformMethod, UniformSampler};
use tordisc_core::optimize::{anneal_restarts, benchmark_report, Design, Schedule};
use tordisc_core::stats::{exhaustive_moments, monte_carlo_moments, variance_lp_squared_d2, HypercubeSampler, MomentReport};
use tordisc_core::{l2_discrepancy_warnock, DiscrepancyKind, Error, GridWeights, Rational, Result, Scalar, WeakLatinHypercube};

use crate::output::{exact, float, scalar, Outcome, Table};
use crate::Global;

/// Largest grid the spectral method will allocate.
const SPECTRAL_MAX_CELLS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Star,
    Extreme,
    Periodic,
}

impl From<Kind> for DiscrepancyKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Star => Self::Star,
            Kind::Extreme => Self::Extreme,
            Kind::Periodic => Self::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Warnock,
    Spectral,
    Oracle,
    Fourier,
}

#[derive(Debug, Args, Serialize)]
pub struct ComputeArgs {
    /// Point-set file (`d N` header) or grid file (`grid M d` header).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Periodic)]
    pub kind: Kind,
    #[arg(long, value_enum, default_value_t = Method::Warnock)]
    pub method: Method,
    /// Frequency cutoff for the truncated Fourier series.
    #[arg(long, default_value_t = 16)]
    pub cutoff: usize,
    /// Monte Carlo samples for the oracle.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

fn read_input(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn periodic_only(a: &ComputeArgs) -> Result<()> {
    if a.kind != Kind::Periodic {
        return Err(Error::InvalidArgument(format!(
            "method {:?} only evaluates the periodic discrepancy",
            a.method
        )));
    }
    Ok(())
}

pub fn compute(a: &ComputeArgs, g: &Global) -> Result<Outcome> {
    let text = read_input(&a.input)?;
    let kind = DiscrepancyKind::from(a.kind);
    let mut res = json!({ "kind": kind.name(), "method": a.method });
    let mut float_only = true;
    match a.method {
        Method::Warnock => {
            float_only = false;
            let (dim, len, value) = if g.exact {
                let set = io::parse_point_set::<Rational>(&text)?;
                (set.dim(), set.len(), exact(&l2_discrepancy_warnock(&set, kind)))
            } else {
                let set = io::parse_point_set::<f64>(&text)?;
                (set.dim(), set.len(), float(l2_discrepancy_warnock(&set, kind)))
            };
            res["dim"] = json!(dim);
            res["points"] = json!(len);
            res["value"] = value;
        }
        Method::Spectral => {
            periodic_only(a)?;
            let w = match io::parse_point_file::<Rational>(&text)? {
                PointFile::Grid(w) => w,
                PointFile::Points(set) => GridWeights::from_rational_points(&set, SPECTRAL_MAX_CELLS)?,
            };
            res["dim"] = json!(w.grid().dim());
            res["grid_order"] = json!(w.grid().order());
            res["points"] = json!(w.support().count());
            res["value"] = float(periodic_l2_spectral(&w)?);
        }
        Method::Oracle => {
            let set = io::parse_point_set::<f64>(&text)?;
            let est = l2_discrepancy_oracle(&set, kind, a.samples, g.seed)?;
            res["dim"] = json!(set.dim());
            res["points"] = json!(set.len());
            res["samples"] = json!(a.samples);
            res["value"] = float(est.estimate);
            res["std_error"] = float(est.std_error);
        }
        Method::Fourier => {
            periodic_only(a)?;
            let set = io::parse_point_set::<f64>(&text)?;
            res["dim"] = json!(set.dim());
            res["points"] = json!(set.len());
            res["cutoff"] = json!(a.cutoff);
            res["value"] = float(periodic_l2_fourier_truncated(&set, a.cutoff)?);
            if set.weights().iter().all(|w| *w == 1.0) {
                res["diaphony"] = float(diaphony_truncated(set.dim(), set.points(), a.cutoff)?);
            }
        }
    }
    let mut out = Outcome::new(res);
    if float_only {
        out.mode = Some("float");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    /// Uniform: shuffle for d = 2, Jacobson–Matthews chain for d = 3, enumeration index above.
    Uniform,
    /// Random coordinate permutations of the cyclic hypercube.
    Coordperm,
    /// Exactly uniform index into a full enumeration.
    Enumerate,
    /// Jacobson–Matthews chain (d = 3).
    Chain,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long = "M")]
    pub order: usize,
    #[arg(long = "d")]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = SampleMethod::Uniform)]
    pub method: SampleMethod,
    /// Chain steps before a draw (default 10·M³).
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Directory receiving one hypercube file per draw.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn hypercube_rows(hs: &[WeakLatinHypercube], exact_mode: bool) -> (Vec<Value>, Table) {
    let scored: Vec<(Value, Value, String)> = hs
        .par_iter()
        .map(|h| {
            let cells = h.cells();
            let g = h.grid();
            let (lp, le) = if exact_mode {
                (
                    exact(&tordisc_core::discrepancy::l2_discrepancy_grid_exact(g, &cells, DiscrepancyKind::Periodic)),
                    exact(&tordisc_core::discrepancy::l2_discrepancy_grid_exact(g, &cells, DiscrepancyKind::Extreme)),
                )
            } else {
                (
                    float(tordisc_core::discrepancy::l2_discrepancy_grid_f64(g, &cells, DiscrepancyKind::Periodic)),
                    float(tordisc_core::discrepancy::l2_discrepancy_grid_f64(g, &cells, DiscrepancyKind::Extreme)),
                )
            };
            let table = h.table().iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
            (lp, le, table)
        })
        .collect();
    let mut rows = Vec::with_capacity(hs.len());
    let mut table = Table::new(&["index", "lp2", "le2", "table"]);
    for (i, (lp, le, t)) in scored.into_iter().enumerate() {
        let cell = |v: &Value| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
        table.push(vec![i.to_string(), cell(&lp), cell(&le), t.clone()]);
        rows.push(json!({ "index": i, "lp2": lp, "le2": le, "table": t }));
    }
    (rows, table)
}

fn hypercube_files(dir: &Option<PathBuf>, hs: &[WeakLatinHypercube]) -> Vec<(PathBuf, String)> {
    let Some(dir) = dir else { return Vec::new() };
    hs.iter()
        .enumerate()
        .map(|(i, h)| (dir.join(format!("wlh_{i:04}.txt")), io::write_hypercube(h)))
        .collect()
}

pub fn sample(a: &SampleArgs, g: &Global) -> Result<Outcome> {
    let sampler = match a.method {
        SampleMethod::Coordperm => HypercubeSampler::coordinate_permuted(a.order, a.dim)?,
        m => {
            let method = match m {
                SampleMethod::Enumerate => UniformMethod::Exact,
                SampleMethod::Chain => UniformMethod::Chain,
                _ => UniformMethod::Auto,
            };
            HypercubeSampler::Uniform(UniformSampler::new(a.order, a.dim, method, a.burn_in)?)
        }
    };
    let hs: Vec<WeakLatinHypercube> = (0..a.count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            rng.set_stream(i);
            sampler.sample(&mut rng)
        })
        .collect();
    let (rows, table) = hypercube_rows(&hs, g.exact);
    let res = json!({
        "order": a.order,
        "dim": a.dim,
        "sampler": sampler.name(),
        "exactly_uniform": sampler.is_exactly_uniform(),
        "count": hs.len(),
        "hypercubes": rows,
    });
    let mut out = Outcome::new(res).with_table(table);
    out.files = hypercube_files(&a.output, &hs);
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct EnumerateArgs {
    #[arg(long = "M")]
    pub order: usize,
    #[arg(long = "d")]
    pub dim: usize,
    /// Stop after this many hypercubes.
    #[arg(long)]
    pub count: Option<usize>,
    /// Directory receiving one hypercube file per hypercube.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn enumerate(a: &EnumerateArgs, g: &Global) -> Result<Outcome> {
    let hs: Vec<WeakLatinHypercube> = enumerate_all(a.order, a.dim)?.take(a.count.unwrap_or(usize::MAX)).collect();
    let (rows, table) = hypercube_rows(&hs, g.exact);
    let res = json!({
        "order": a.order,
        "dim": a.dim,
        "count": hs.len(),
        "hypercubes": rows,
    });
    let mut out = Outcome::new(res).with_table(table);
    out.files = hypercube_files(&a.output, &hs);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsMode {
    Exhaustive,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticArg {
    Lp2,
    Le2,
    Excess,
}

impl From<StatisticArg> for tordisc_core::stats::Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::Lp2 => Self::Lp2,
            StatisticArg::Le2 => Self::Le2,
            StatisticArg::Excess => Self::Excess,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerArg {
    Uniform,
    Coordperm,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long = "M")]
    pub order: usize,
    #[arg(long = "d")]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = StatsMode::Exhaustive)]
    pub mode: StatsMode,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = StatisticArg::Lp2)]
    pub statistic: StatisticArg,
    /// Hypercube source in Monte Carlo mode.
    #[arg(long, value_enum, default_value_t = SamplerArg::Uniform)]
    pub sampler: SamplerArg,
}

pub fn build_sampler(order: usize, dim: usize, which: SamplerArg) -> Result<HypercubeSampler> {
    match which {
        SamplerArg::Uniform => HypercubeSampler::uniform(order, dim, UniformMethod::Auto),
        SamplerArg::Coordperm => HypercubeSampler::coordinate_permuted(order, dim),
    }
}

pub fn moment_json(r: &MomentReport) -> Value {
    json!({
        "statistic": r.statistic.name(),
        "mode": r.mode.name(),
        "sampler": r.sampler,
        "sample_count": r.sample_count,
        "closed_form": exact(&r.closed_form),
        "closed_form_value": float(r.closed_form.to_f64()),
        "mean": r.exact_mean.as_ref().map_or(float(r.empirical_mean), exact),
        "mean_value": float(r.empirical_mean),
        "variance": match (&r.exact_variance, r.empirical_variance) {
            (Some(v), _) => exact(v),
            (None, Some(v)) => float(v),
            (None, None) => Value::Null,
        },
        "std_error": r.std_error.map_or(Value::Null, float),
    })
}

pub fn stats(a: &StatsArgs, g: &Global) -> Result<Outcome> {
    let statistic = a.statistic.into();
    let (report, matches, mode) = match a.mode {
        StatsMode::Exhaustive => {
            let r = exhaustive_moments(a.order, a.dim, statistic)?;
            let ok = r.exact_mean.as_ref() == Some(&r.closed_form);
            (r, ok, "exact")
        }
        StatsMode::Mc => {
            let sampler = build_sampler(a.order, a.dim, a.sampler)?;
            let r = monte_carlo_moments(&sampler, statistic, a.samples, g.seed)?;
            let z = match r.std_error {
                Some(se) if se > 0.0 => (r.empirical_mean - r.closed_form.to_f64()).abs() / se,
                _ => 0.0,
            };
            let ok = z <= 4.0;
            (r, ok, "float")
        }
    };
    let mut res = moment_json(&report);
    res["order"] = json!(a.order);
    res["dim"] = json!(a.dim);
    res["matches_closed_form"] = json!(matches);
    if let (Some(se), StatsMode::Mc) = (report.std_error, a.mode) {
        res["z_score"] = float(if se > 0.0 { (report.empirical_mean - report.closed_form.to_f64()).abs() / se } else { 0.0 });
    }
    if a.dim == 2 && a.statistic == StatisticArg::Lp2 {
        // conjectural closed form for the variance
        res["variance_conjecture"] = exact(&variance_lp_squared_d2(a.order)?);
    }
    let mut out = Outcome::new(res).passed(a.mode == StatsMode::Mc || matches);
    out.mode = Some(mode);
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long = "M")]
    pub order: usize,
    #[arg(long = "d")]
    pub dim: usize,
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// `t0,cool`; `t0` may be `auto` (spread of 100 random-move deltas).
    #[arg(long, default_value = "auto,0.999")]
    pub schedule: String,
    /// Experimental: search strong Latin hypercubes.
    #[arg(long)]
    pub strong: bool,
    /// Hypercube file receiving the best design.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_schedule(text: &str, budget: usize) -> Result<Schedule> {
    let bad = || Error::InvalidArgument(format!("schedule `{text}` is not `t0,cool`"));
    let (t0, cool) = text.split_once(',').ok_or_else(bad)?;
    let t0 = match t0.trim() {
        "auto" => None,
        t => Some(t.parse::<f64>().map_err(|_| bad())?),
    };
    let cooling = cool.trim().parse::<f64>().map_err(|_| bad())?;
    Ok(Schedule { t0, cooling, budget })
}

fn points_text(points: &[Vec<usize>]) -> String {
    points
        .iter()
        .map(|p| p.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn optimize(a: &OptimizeArgs, g: &Global) -> Result<Outcome> {
    let schedule = parse_schedule(&a.schedule, a.budget)?;
    let (best, scores) = anneal_restarts(a.order, a.dim, schedule, a.restarts, g.seed, a.strong)?;
    let report = benchmark_report(&best)?;
    let opt_exact = |v: &Option<Rational>| v.as_ref().map_or(Value::Null, exact);
    let opt_float = |v: Option<f64>| v.map_or(Value::Null, float);
    let stride = (best.trace.len() / 100).max(1);
    let trace: Vec<Value> = best
        .trace
        .iter()
        .filter(|t| t.step % stride == 0 || t.step + 1 == best.trace.len())
        .map(|t| json!({ "step": t.step, "lp2": float(t.lp2), "temperature": float(t.temperature), "accepted": t.accepted }))
        .collect();
    let design = match &best.best {
        Design::Weak(h) => io::write_hypercube(h),
        Design::Strong(s) => format!("# strong Latin hypercube points\n{}\n", points_text(&s.points())),
    };
    let res = json!({
        "order": a.order,
        "dim": a.dim,
        "points": report.points,
        "strong": a.strong,
        "budget": a.budget,
        "restarts": a.restarts,
        "best_seed": best.seed,
        "t0": float(best.t0),
        "start_lp2": float(best.start_lp2),
        "best_lp2": exact(&report.best_lp2),
        "best_lp2_value": float(report.best_lp2.to_f64()),
        "restart_best_lp2": scores.iter().map(exact).collect::<Vec<_>>(),
        "lower_bound_lp2": opt_exact(&report.lower_bound_lp2),
        "lp_simplified_bound": opt_float(report.lp_simplified_bound),
        "expected_lp2": opt_exact(&report.expected_lp2),
        "ratio_to_bound": opt_float(report.ratio_to_bound),
        "ratio_to_expectation": opt_float(report.ratio_to_expectation),
        "le2": opt_exact(&report.le2),
        "design": design,
        "trace": trace,
    });
    let mut table = Table::new(&["step", "lp2", "temperature", "accepted"]);
    for t in &best.trace {
        table.push(vec![t.step.to_string(), scalar(&t.lp2).to_string(), scalar(&t.temperature).to_string(), t.accepted.to_string()]);
    }
    let mut out = Outcome::new(res).with_table(table);
    out.mode = Some("float");
    if let Some(path) = &a.output {
        out.files.push((path.clone(), design));
    }
    Ok(out)
}
