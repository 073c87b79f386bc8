//! Batch experiments behind the command line tool.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use serde::Deserialize;

use crate::curve::{
    arclength_reparametrize, gagliardo_seminorm, make_partition, mollify, preset_curve, CurveSpec, Mollifier,
    PartitionMode,
};
use crate::energy::{
    continuous_tp_energy, discrete_tp_energy, ropelength_proxy, thickness_and_ropelength, EnergyReport,
};
use crate::error::{Error, Result};
use crate::interpolate::{build_biarc_curve, BiarcCurve};
use crate::optimize::{anneal_discrete, perturb_radially, AnnealConfig};
use crate::table::{Cell, Format, ResultTable};

/// Samples used for the sup norm in the mollification experiment.
const MOLLIFY_C1_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Energy,
    Converge,
    Ropelength,
    Anneal,
    Mollify,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "energy" => Command::Energy,
            "converge" => Command::Converge,
            "ropelength" => Command::Ropelength,
            "anneal" => Command::Anneal,
            "mollify" => Command::Mollify,
            other => return Err(Error::Parse(format!("unknown command '{other}'"))),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Energy => "energy",
            Command::Converge => "converge",
            Command::Ropelength => "ropelength",
            Command::Anneal => "anneal",
            Command::Mollify => "mollify",
        })
    }
}

/// Settings as read from a config file or the command line; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub curve: Option<String>,
    pub params: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub n: Option<usize>,
    pub n_sweep: Option<Vec<usize>>,
    pub k_sweep: Option<Vec<usize>>,
    pub partition: Option<String>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub strict_sequential: Option<bool>,
    pub steps: Option<usize>,
    pub perturb: Option<f64>,
    pub init: Option<PathBuf>,
    pub junctions_out: Option<PathBuf>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overridden_by(self, other: Settings) -> Settings {
        Settings {
            curve: other.curve.or(self.curve),
            params: other.params.or(self.params),
            q: other.q.or(self.q),
            n: other.n.or(self.n),
            n_sweep: other.n_sweep.or(self.n_sweep),
            k_sweep: other.k_sweep.or(self.k_sweep),
            partition: other.partition.or(self.partition),
            seed: other.seed.or(self.seed),
            grid: other.grid.or(self.grid),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
            strict_sequential: other.strict_sequential.or(self.strict_sequential),
            steps: other.steps.or(self.steps),
            perturb: other.perturb.or(self.perturb),
            init: other.init.or(self.init),
            junctions_out: other.junctions_out.or(self.junctions_out),
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub curve: String,
    pub params: Vec<f64>,
    /// `None` when the user did not set it.
    pub q: Option<f64>,
    pub n_sweep: Vec<usize>,
    pub k_sweep: Vec<usize>,
    pub partition: PartitionMode,
    pub seed: u64,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub strict_sequential: bool,
    pub steps: usize,
    pub perturb: f64,
    pub init: Option<PathBuf>,
    pub junctions_out: Option<PathBuf>,
}

const DEFAULT_Q: f64 = 3.0;

fn dyadic(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |&n| Some(n * 2)).take_while(|&n| n <= to).collect()
}

impl ExperimentConfig {
    pub fn resolve(command: Command, s: Settings) -> Result<Self> {
        let bad = |msg: String| Error::Precondition(msg);
        let n_sweep = match (s.n_sweep, s.n) {
            (Some(sweep), _) => sweep,
            (None, Some(n)) => vec![n],
            (None, None) => match command {
                Command::Converge => dyadic(16, 512),
                Command::Ropelength => dyadic(16, 256),
                Command::Energy | Command::Mollify => vec![64],
                Command::Anneal => vec![32],
            },
        };
        if n_sweep.is_empty() {
            return Err(bad("n sweep is empty".into()));
        }
        if n_sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad(format!("n sweep must be strictly increasing, got {n_sweep:?}")));
        }
        if command == Command::Converge && n_sweep.len() < 4 {
            return Err(bad(format!("converge needs at least 4 sweep points, got {}", n_sweep.len())));
        }
        if command == Command::Anneal && n_sweep.len() != 1 {
            return Err(bad("anneal takes a single n".into()));
        }
        let k_sweep = s.k_sweep.unwrap_or_else(|| vec![4, 8, 16, 32]);
        if k_sweep.is_empty() || k_sweep.windows(2).any(|w| w[1] <= w[0]) || k_sweep[0] == 0 {
            return Err(bad(format!("k sweep must be non-empty, positive and strictly increasing, got {k_sweep:?}")));
        }
        let grid = s.grid.unwrap_or(match command {
            Command::Ropelength => 64,
            Command::Mollify => 256,
            _ => 1024,
        });
        if !grid.is_power_of_two() || grid < 8 {
            return Err(bad(format!("grid must be a power of two >= 8, got {grid}")));
        }
        let format = match (&s.format, &s.out) {
            (Some(f), _) => f.parse()?,
            (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => Format::Json,
            _ => Format::Csv,
        };
        let q = s.q;
        if let Some(q) = q {
            if !(q >= 2.0 && q.is_finite()) {
                return Err(bad(format!("q must be >= 2, got {q}")));
            }
        }
        let perturb = s.perturb.unwrap_or(0.05);
        if !(0.0..1.0).contains(&perturb) {
            return Err(bad(format!("perturbation must lie in [0,1), got {perturb}")));
        }
        Ok(ExperimentConfig {
            command,
            curve: s.curve.unwrap_or_else(|| "circle".into()),
            params: s.params.unwrap_or_default(),
            q,
            n_sweep,
            k_sweep,
            partition: s.partition.as_deref().unwrap_or("uniform").parse()?,
            seed: s.seed.unwrap_or(0),
            grid,
            out: s.out,
            format,
            strict_sequential: s.strict_sequential.unwrap_or(false),
            steps: s.steps.unwrap_or(20_000),
            perturb,
            init: s.init,
            junctions_out: s.junctions_out,
        })
    }

    fn q(&self) -> f64 {
        self.q.unwrap_or(DEFAULT_Q)
    }

    fn source_curve(&self) -> Result<CurveSpec> {
        let raw = preset_curve(&self.curve, &self.params)?;
        if raw.is_arclength() {
            Ok(raw)
        } else {
            arclength_reparametrize(&raw)
        }
    }

    fn interpolant(&self, curve: &CurveSpec, n: usize) -> Result<BiarcCurve> {
        let p = make_partition(curve.period(), n, self.partition, self.seed)?;
        build_biarc_curve(curve, &p)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Precondition("slope fit needs two or more points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Numerical("slope fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

pub fn run_energy(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let curve = cfg.source_curve()?;
    let q = cfg.q();
    let length = curve.period();
    let report = |kind: &str, n: usize, value, grid| EnergyReport {
        kind: kind.into(),
        q,
        n,
        value,
        grid,
        curve: curve.name().into(),
        partition: cfg.partition.to_string(),
        seed: cfg.seed,
    };
    let mut reports = Vec::new();
    if q > 2.0 {
        let tp = continuous_tp_energy(&curve, q, cfg.grid)?;
        reports.push(report("continuous", 0, crate::geom::ExtReal::Finite(tp), Some(cfg.grid)));
    }
    for &n in &cfg.n_sweep {
        let beta = cfg.interpolant(&curve, n)?;
        reports.push(report("discrete", n, discrete_tp_energy(&beta, q, true, length)?, None));
        reports.push(report("discrete_ungated", n, discrete_tp_energy(&beta, q, false, length)?, None));
    }
    Ok(reports_table(&reports))
}

pub fn reports_table(reports: &[EnergyReport]) -> ResultTable {
    let mut t = ResultTable::new(["kind", "q", "n", "value", "grid", "curve", "seed"]);
    for r in reports {
        t.push(vec![
            r.kind.as_str().into(),
            r.q.into(),
            r.n.into(),
            r.value.to_f64().into(),
            r.grid.map(Cell::from).unwrap_or_else(|| "".into()),
            r.curve.as_str().into(),
            r.seed.into(),
        ]);
    }
    t
}

fn build_or_advise(cfg: &ExperimentConfig, curve: &CurveSpec, n: usize, smallest: bool) -> Result<BiarcCurve> {
    cfg.interpolant(curve, n).map_err(|e| match e {
        Error::ImproperPair(_) | Error::IncompatibleCocircular if smallest => Error::Precondition(format!(
            "biarc interpolation failed at the smallest n = {n} ({e}); start the sweep at a larger n"
        )),
        other => other,
    })
}

pub fn run_converge(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let curve = cfg.source_curve()?;
    let q = cfg.q();
    let reference = continuous_tp_energy(&curve, q, cfg.grid)?;
    info!("reference TP_{q} of {} at grid {}: {reference}", curve.name(), cfg.grid);
    let mut rows = Vec::new();
    for (k, &n) in cfg.n_sweep.iter().enumerate() {
        let beta = build_or_advise(cfg, &curve, n, k == 0)?;
        let discrete = discrete_tp_energy(&beta, q, false, curve.period())?.to_f64();
        rows.push((n, discrete, (reference - discrete).abs()));
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let slope = loglog_slope(&ns, &errs)?;
    let mut t = ResultTable::new(["n", "q", "discrete", "reference", "error", "slope"]);
    for (n, discrete, err) in rows {
        t.push(vec![n.into(), q.into(), discrete.into(), reference.into(), err.into(), slope.into()]);
    }
    Ok(t)
}

pub fn run_ropelength(cfg: &ExperimentConfig) -> Result<ResultTable> {
    if let Some(q) = cfg.q {
        warn!("ropelength uses q = n; the configured q = {q} is ignored");
    }
    let curve = cfg.source_curve()?;
    let (delta, reference) = thickness_and_ropelength(&curve, cfg.grid)?;
    info!("thickness of {}: {delta}, ropelength {reference}", curve.name());
    let mut t = ResultTable::new(["n", "proxy", "reference", "gap"]);
    for (k, &n) in cfg.n_sweep.iter().enumerate() {
        let beta = build_or_advise(cfg, &curve, n, k == 0)?;
        let proxy = ropelength_proxy(&beta, curve.period())?.to_f64();
        t.push(vec![n.into(), proxy.into(), reference.into(), (proxy - reference).abs().into()]);
    }
    Ok(t)
}

pub fn run_anneal(cfg: &ExperimentConfig) -> Result<(ResultTable, BiarcCurve)> {
    let n = cfg.n_sweep[0];
    let (start, length) = match &cfg.init {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read junction file {}: {e}", path.display())))?;
            let beta = BiarcCurve::from_junction_text(&text)?;
            let length = beta.total_length();
            (beta, length)
        }
        None => {
            let curve = cfg.source_curve()?;
            let beta = cfg.interpolant(&curve, n)?;
            (perturb_radially(&beta, cfg.perturb, cfg.seed)?, curve.period())
        }
    };
    let mut ac = AnnealConfig::new(cfg.q(), start.n(), length);
    ac.steps = cfg.steps;
    ac.seed = cfg.seed;
    let (best, trace) = anneal_discrete(&start, &ac)?;
    info!(
        "annealing: initial {} best {} acceptance {:.3}",
        trace.initial_energy,
        trace.best_energy,
        trace.acceptance_ratio()
    );
    let mut t = ResultTable::new(["step", "energy", "temperature", "accepted", "best"]);
    for r in &trace.records {
        t.push(vec![r.step.into(), r.energy.into(), r.temperature.into(), r.accepted.into(), r.best.into()]);
    }
    Ok((t, best))
}

pub fn run_mollify(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let curve = cfg.source_curve()?;
    let q = cfg.q();
    let (s, rho) = (1.0 - 1.0 / q, q);
    let length = curve.period();
    let mollifier = Mollifier::default();
    let step = length / MOLLIFY_C1_SAMPLES as f64;
    let mut t = ResultTable::new(["k", "eps", "c1_distance", "seminorm"]);
    for &k in &cfg.k_sweep {
        let eps = 1.0 / k as f64;
        let smooth = mollify(&curve, eps, &mollifier)?;
        let c1 = crate::quad::map_rows(MOLLIFY_C1_SAMPLES, |i| {
            let x = i as f64 * step;
            smooth.position(x).distance(curve.position(x)) + smooth.derivative(x).distance(curve.derivative(x))
        })
        .into_iter()
        .fold(0.0, f64::max);
        let semi = gagliardo_seminorm(|x| smooth.derivative(x) - curve.derivative(x), length, s, rho, cfg.grid)?;
        info!("mollify k = {k}: C1 {c1:.4e}, seminorm {semi:.4e}");
        t.push(vec![k.into(), eps.into(), c1.into(), semi.into()]);
    }
    Ok(t)
}

/// Runs the configured command and writes its table (to `out` or stdout).
pub fn run(cfg: &ExperimentConfig) -> Result<String> {
    crate::quad::set_strict_sequential(cfg.strict_sequential);
    let table = match cfg.command {
        Command::Energy => run_energy(cfg)?,
        Command::Converge => run_converge(cfg)?,
        Command::Ropelength => run_ropelength(cfg)?,
        Command::Mollify => run_mollify(cfg)?,
        Command::Anneal => {
            let (table, best) = run_anneal(cfg)?;
            if let Some(path) = &cfg.junctions_out {
                std::fs::write(path, best.to_junction_text())?;
            }
            table
        }
    };
    let text = table.render(cfg.format);
    if let Some(path) = &cfg.out {
        std::fs::write(path, &text)?;
    }
    Ok(text)
}
