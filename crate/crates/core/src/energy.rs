//! Discrete and continuous tangent-point energies, thickness and ropelength.

use serde::Serialize;

use crate::curve::{CurveSamples, CurveSpec};
use crate::error::{Error, Result};
use crate::geom::{inverse_tangent_point_radius, ExtReal};
use crate::interpolate::BiarcCurve;
use crate::quad::{log_sum_exp, map_rows, pairwise_sum, periodic_distance};

/// Above this exponent the discrete sums are accumulated as log-sum-exp.
pub const LOG_SPACE_THRESHOLD: f64 = 50.0;

const COARSE_EXCLUSION: f64 = 1e-3;
const REFINE_STARTS: usize = 8;
const CURVATURE_OVERSAMPLE: usize = 16;

/// Inverse tangent-point radii `x_ij = 2 dist(l(q_j), q_i)/|q_i − q_j|²`,
/// row `i`, diagonal omitted.
fn discrete_ratios(beta: &BiarcCurve) -> Result<Vec<Vec<f64>>> {
    let j = beta.junctions();
    let n = j.len();
    let scale = beta.total_length();
    let rows = map_rows(n, |i| {
        let mut row = Vec::with_capacity(n - 1);
        for k in 0..n {
            if k == i {
                continue;
            }
            if j[i].q.distance(j[k].q) <= 1e-14 * scale {
                return Err(Error::Degenerate(format!("junctions {i} and {k} coincide")));
            }
            row.push(inverse_tangent_point_radius(j[k].q, j[k].t, j[i].q));
        }
        Ok(row)
    });
    rows.into_iter().collect()
}

fn weight_row(lengths: &[f64], i: usize) -> impl Iterator<Item = f64> + '_ {
    let li = lengths[i];
    lengths.iter().enumerate().filter(move |&(k, _)| k != i).map(move |(_, &lk)| li * lk)
}

/// `ln Σ_{i≠j} x_ij^q λ_i λ_j`, ungated.
pub fn log_discrete_tp_energy(beta: &BiarcCurve, q: f64) -> Result<f64> {
    check_exponent(q)?;
    let ratios = discrete_ratios(beta)?;
    Ok(log_energy_from_ratios(&ratios, &beta.lengths(), q))
}

fn log_energy_from_ratios(ratios: &[Vec<f64>], lengths: &[f64], q: f64) -> f64 {
    let rows: Vec<f64> = ratios
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let terms: Vec<f64> = row
                .iter()
                .zip(weight_row(lengths, i))
                .map(|(&x, w)| q * x.ln() + w.ln())
                .collect();
            log_sum_exp(&terms)
        })
        .collect();
    log_sum_exp(&rows)
}

fn energy_from_ratios(ratios: &[Vec<f64>], lengths: &[f64], q: f64) -> f64 {
    if q > LOG_SPACE_THRESHOLD {
        return log_energy_from_ratios(ratios, lengths, q).exp();
    }
    let rows: Vec<f64> = ratios
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let terms: Vec<f64> = row.iter().zip(weight_row(lengths, i)).map(|(&x, w)| x.powf(q) * w).collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

fn check_exponent(q: f64) -> Result<()> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::Precondition(format!("energy exponent must be >= 2, got {q}")));
    }
    Ok(())
}

/// `Σ_{i≠j} (2 dist(q_j + ℝt_j, q_i)/|q_i − q_j|²)^q λ_i λ_j`.
///
/// With `gated`, configurations outside `L/(2n) ≤ λ_i ≤ 2L/n` have energy `+∞`.
pub fn discrete_tp_energy(beta: &BiarcCurve, q: f64, gated: bool, length: f64) -> Result<ExtReal> {
    check_exponent(q)?;
    let ratios = discrete_ratios(beta)?;
    if gated && !beta.in_bn(length) {
        return Ok(ExtReal::Infinite);
    }
    let value = energy_from_ratios(&ratios, &beta.lengths(), q);
    Ok(if value.is_finite() { ExtReal::Finite(value) } else { ExtReal::Infinite })
}

/// Inverse tangent-point radii on the uniform grid, `x[i][j] = 1/r_tp(γ(u_i), γ(u_j))`
/// with the curvature on the diagonal, plus the sample data.
fn continuous_ratios(curve: &CurveSpec, grid: usize) -> Result<(CurveSamples, Vec<Vec<f64>>)> {
    let samples = CurveSamples::new(curve, grid);
    let collapse = 1e-12 * curve.length();
    let rows = map_rows(grid, |i| {
        let mut row = Vec::with_capacity(grid);
        for j in 0..grid {
            if i == j {
                row.push(samples.curvatures[i]);
                continue;
            }
            if samples.positions[i].distance(samples.positions[j]) <= collapse {
                return Err(Error::Degenerate(format!(
                    "chord collapse between parameters {} and {}",
                    i as f64 * samples.step,
                    j as f64 * samples.step
                )));
            }
            row.push(inverse_tangent_point_radius(samples.positions[i], samples.tangents[i], samples.positions[j]));
        }
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite tangent-point integrand".into()));
    }
    Ok((samples, rows))
}

fn check_grid(grid: usize, min: usize) -> Result<()> {
    if grid < min {
        return Err(Error::Precondition(format!("grid must be at least {min}, got {grid}")));
    }
    Ok(())
}

/// `TP_q(γ) = ∫∫ r_tp(γ(s), γ(t))^{−q} ds dt` by the periodic trapezoidal rule
/// on a `grid × grid` parameter lattice, weighted by the speed so that any
/// regular parametrization may be passed. The diagonal uses the curvature.
pub fn continuous_tp_energy(curve: &CurveSpec, q: f64, grid: usize) -> Result<f64> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::Precondition(format!("continuous energy needs q > 2, got {q}")));
    }
    check_grid(grid, 16)?;
    let (samples, rows) = continuous_ratios(curve, grid)?;
    let h = samples.step;
    let row_sums: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let terms: Vec<f64> = row.iter().zip(&samples.speeds).map(|(x, v)| x.powf(q) * v).collect();
            pairwise_sum(&terms) * samples.speeds[i]
        })
        .collect();
    Ok(pairwise_sum(&row_sums) * h * h)
}

/// Power mean `(∫∫ r_tp^{−k} / 𝓛²)^{1/k}` on the quadrature grid.
pub fn tp_power_mean(curve: &CurveSpec, k: f64, grid: usize) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::Precondition(format!("power mean order must be >= 1, got {k}")));
    }
    check_grid(grid, 16)?;
    let (samples, rows) = continuous_ratios(curve, grid)?;
    // grid weights v_i v_j h², normalized to a probability measure
    let mut logs = Vec::with_capacity(grid * grid);
    let mut log_weights = Vec::with_capacity(grid * grid);
    for (i, row) in rows.iter().enumerate() {
        for (x, v) in row.iter().zip(&samples.speeds) {
            let lw = (v * samples.speeds[i]).ln();
            logs.push(k * x.ln() + lw);
            log_weights.push(lw);
        }
    }
    Ok(((log_sum_exp(&logs) - log_sum_exp(&log_weights)) / k).exp())
}

/// Largest inverse tangent-point radius on the quadrature grid.
pub fn max_inverse_tp_radius(curve: &CurveSpec, grid: usize) -> Result<f64> {
    check_grid(grid, 16)?;
    let (_, rows) = continuous_ratios(curve, grid)?;
    Ok(rows.iter().flatten().copied().fold(0.0, f64::max))
}

/// Thickness `Δ` and ropelength `𝓡 = 𝓛/Δ`.
///
/// `Δ` is the smaller of the minimal tangent-point radius over parameter
/// pairs at least `1e-3·P` apart (coarse `grid × grid` search, then
/// Nelder–Mead from the best cells) and the minimal radius of curvature.
pub fn thickness_and_ropelength(curve: &CurveSpec, grid: usize) -> Result<(f64, f64)> {
    check_grid(grid, 8)?;
    let period = curve.period();
    let band = COARSE_EXCLUSION * period;
    let radius = |s: f64, t: f64| -> f64 {
        if periodic_distance(s, t, period) < band {
            return f64::INFINITY;
        }
        let x = inverse_tangent_point_radius(curve.position(s), curve.tangent(s), curve.position(t));
        if x > 0.0 {
            1.0 / x
        } else {
            f64::INFINITY
        }
    };
    let step = period / grid as f64;
    let coarse = map_rows(grid, |i| {
        (0..grid).map(|j| (radius(i as f64 * step, j as f64 * step), i, j)).collect::<Vec<_>>()
    });
    let mut cells: Vec<(f64, usize, usize)> = coarse.into_iter().flatten().filter(|c| c.0.is_finite()).collect();
    if cells.is_empty() {
        return Err(Error::Numerical("no admissible pairs in the thickness search".into()));
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut starts: Vec<(f64, f64, f64)> = Vec::with_capacity(REFINE_STARTS);
    for &(r, i, j) in &cells {
        let (s, t) = (i as f64 * step, j as f64 * step);
        let far = starts
            .iter()
            .all(|&(_, a, b)| periodic_distance(a, s, period) + periodic_distance(b, t, period) > 2.5 * step);
        if far {
            starts.push((r, s, t));
            if starts.len() == REFINE_STARTS {
                break;
            }
        }
    }
    let coarse_best = starts[0].0;
    let refined = map_rows(starts.len(), |k| {
        let (_, s, t) = starts[k];
        nelder_mead_2d(|p| radius(p[0], p[1]), [s, t], step, period)
    });
    let mut pair_min = f64::INFINITY;
    for r in refined {
        match r {
            Ok(v) => pair_min = pair_min.min(v),
            Err(best) => {
                return Err(Error::Numerical(format!(
                    "thickness refinement did not converge; bracket [{best:.12e}, {coarse_best:.12e}]"
                )))
            }
        }
    }
    let kappa = max_curvature_refined(curve, grid * CURVATURE_OVERSAMPLE);
    let delta = if kappa > 0.0 { pair_min.min(1.0 / kappa) } else { pair_min };
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Numerical(format!("thickness search produced {delta}")));
    }
    Ok((delta, curve.length() / delta))
}

fn max_curvature_refined(curve: &CurveSpec, samples: usize) -> f64 {
    let period = curve.period();
    let h = period / samples as f64;
    let values = map_rows(samples, |i| curve.curvature(i as f64 * h));
    let (imax, &kmax) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one sample");
    // golden-section search for the maximum in the neighbouring cells
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((imax as f64 - 1.0) * h, (imax as f64 + 1.0) * h);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (curve.curvature(c), curve.curvature(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = curve.curvature(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = curve.curvature(d);
        }
    }
    kmax.max(fc).max(fd)
}

/// Minimizes `f` on the torus from `start` with initial simplex size `size`.
/// On failure returns the best value found.
fn nelder_mead_2d(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], size: f64, period: f64) -> std::result::Result<f64, f64> {
    const MAX_ITER: usize = 4000;
    let x_tol = 1e-10 * period;
    let mut simplex = [start, [start[0] + size, start[1]], [start[0], start[1] + size]];
    let mut values = simplex.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..MAX_ITER {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        let diameter = (1..3)
            .map(|k| (simplex[k][0] - simplex[0][0]).hypot(simplex[k][1] - simplex[0][1]))
            .fold(0.0, f64::max);
        let spread = values[2] - values[0];
        if values[0].is_finite() && (diameter < x_tol || spread <= 1e-12 * values[0].abs()) {
            return Ok(values[0]);
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] {
                lerp(centroid, reflected, 0.5)
            } else {
                lerp(centroid, simplex[2], 0.5)
            };
            let fc = f(contracted);
            if fc <= values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(simplex[0], simplex[k], 0.5);
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    Err(best)
}

/// `L^{(n−2)/n} (𝓔_n^n(β))^{1/n}` evaluated in log space; `+∞` off the gate.
pub fn ropelength_proxy(beta: &BiarcCurve, length: f64) -> Result<ExtReal> {
    let n = beta.n();
    let ratios = discrete_ratios(beta)?;
    if !beta.in_bn(length) {
        return Ok(ExtReal::Infinite);
    }
    let nf = n as f64;
    let log_energy = log_energy_from_ratios(&ratios, &beta.lengths(), nf);
    let value = ((nf - 2.0) / nf * length.ln() + log_energy / nf).exp();
    Ok(ExtReal::Finite(value))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Generalized mean comparison `(𝓔_k^n)^{1/k} ≤ (4L² n(n−1)/n²)^{1/k−1/m} (𝓔_m^n)^{1/m}`.
pub fn holder_bound_check(beta: &BiarcCurve, k: f64, m: f64, length: f64) -> Result<HolderCheck> {
    if !(k >= 2.0 && k <= m && m.is_finite()) {
        return Err(Error::Precondition(format!("need 2 <= k <= m, got k = {k}, m = {m}")));
    }
    let ratios = discrete_ratios(beta)?;
    if !beta.in_bn(length) {
        return Err(Error::Precondition("configuration is outside the length gate".into()));
    }
    let lengths = beta.lengths();
    let n = beta.n() as f64;
    let lhs = (log_energy_from_ratios(&ratios, &lengths, k) / k).exp();
    let log_measure = (4.0 * length * length * n * (n - 1.0) / (n * n)).ln();
    let rhs = ((1.0 / k - 1.0 / m) * log_measure + log_energy_from_ratios(&ratios, &lengths, m) / m).exp();
    Ok(HolderCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) })
}

/// One energy evaluation with its context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub kind: String,
    pub q: f64,
    pub n: usize,
    #[serde(serialize_with = "serialize_ext")]
    pub value: ExtReal,
    pub grid: Option<usize>,
    pub curve: String,
    pub partition: String,
    pub seed: u64,
}

fn serialize_ext<S: serde::Serializer>(v: &ExtReal, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        ExtReal::Finite(x) => s.serialize_f64(*x),
        ExtReal::Infinite => s.serialize_str("inf"),
    }
}

impl EnergyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str = "kind,q,n,value,grid,curve,seed";

    pub fn to_csv_row(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        let grid = self.grid.map(|g| g.to_string()).unwrap_or_default();
        w.write_record([
            self.kind.clone(),
            self.q.to_string(),
            self.n.to_string(),
            self.value.to_string(),
            grid,
            self.curve.clone(),
            self.seed.to_string(),
        ])
        .expect("in-memory write");
        let bytes = w.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("utf8").trim_end().to_string()
    }
}

/// Smallest distance between junction points and the polygonal
/// tangent-point radius `min_{i≠j} 1/x_ij` of a configuration.
pub fn discrete_thickness_proxy(beta: &BiarcCurve) -> Result<f64> {
    let ratios = discrete_ratios(beta)?;
    let max = ratios.iter().flatten().copied().fold(0.0, f64::max);
    Ok(if max > 0.0 { 1.0 / max } else { f64::INFINITY })
}
