use super::{CurveSamples, CurveSpec};
use crate::error::{Error, Result};
use crate::quad::{map_rows, periodic_distance};

/// Sampled modulus of continuity of the unit tangent,
/// `ω(k·Δ) = max_{j ≤ k} max_i |t(s_i + jΔ) − t(s_i)|` on a uniform grid.
#[derive(Debug, Clone)]
pub struct ModulusTable {
    step: f64,
    period: f64,
    values: Vec<f64>,
}

impl ModulusTable {
    pub fn from_curve(curve: &CurveSpec, grid: usize) -> Result<Self> {
        if grid < 8 {
            return Err(Error::Precondition(format!("modulus grid must be at least 8, got {grid}")));
        }
        let samples = CurveSamples::new(curve, grid);
        Ok(Self::from_tangents(&samples.tangents, curve.period()))
    }

    pub(crate) fn from_tangents(tangents: &[crate::geom::Vec3], period: f64) -> Self {
        let n = tangents.len();
        let half = n / 2;
        let raw = map_rows(half + 1, |k| {
            (0..n).map(|i| (tangents[(i + k) % n] - tangents[i]).norm()).fold(0.0, f64::max)
        });
        let mut values = Vec::with_capacity(raw.len());
        let mut running = 0.0f64;
        for v in raw {
            running = running.max(v);
            values.push(running);
        }
        ModulusTable { step: period / n as f64, period, values }
    }

    /// Upper grid estimate of `ω(h)`; offsets are rounded up to the next grid step.
    pub fn upper(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let h = h.min(0.5 * self.period);
        let k = ((h / self.step) * (1.0 - 1e-12)).ceil() as usize;
        self.values[k.min(self.values.len() - 1)]
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

#[derive(Debug, Clone)]
pub struct CurveDiagnostics {
    /// `c_γ = max |t − s|_{ℝ/Lℤ} / |γ(t) − γ(s)|` over grid pairs.
    pub bilipschitz_constant: f64,
    /// `(h, ω(h))` at `h = L/2, L/4, …` down to the grid step.
    pub modulus_samples: Vec<(f64, f64)>,
    pub max_curvature: f64,
    pub modulus: ModulusTable,
}

pub fn curve_diagnostics(curve: &CurveSpec, grid: usize) -> Result<CurveDiagnostics> {
    if !curve.is_arclength() {
        return Err(Error::Precondition("curve_diagnostics needs an arclength parametrization".into()));
    }
    if grid < 8 {
        return Err(Error::Precondition(format!("diagnostics grid must be at least 8, got {grid}")));
    }
    let period = curve.period();
    let samples = CurveSamples::new(curve, grid);
    let pts = &samples.positions;
    let step = samples.step;
    let zero_chord = 1e-12 * period;

    let rows = map_rows(grid, |i| {
        let mut worst = 0.0f64;
        for j in (i + 1)..grid {
            let chord = pts[i].distance(pts[j]);
            if chord <= zero_chord {
                return Err((i, j));
            }
            let gap = periodic_distance(i as f64 * step, j as f64 * step, period);
            worst = worst.max(gap / chord);
        }
        Ok(worst)
    });
    let mut bilipschitz_constant = 0.0f64;
    for r in rows {
        match r {
            Ok(v) => bilipschitz_constant = bilipschitz_constant.max(v),
            Err((i, j)) => {
                return Err(Error::Degenerate(format!(
                    "self-intersection: γ({}) = γ({})",
                    i as f64 * step,
                    j as f64 * step
                )))
            }
        }
    }

    let modulus = ModulusTable::from_tangents(&samples.tangents, period);
    let mut modulus_samples = Vec::new();
    let mut h = 0.5 * period;
    while h >= step * (1.0 - 1e-12) {
        modulus_samples.push((h, modulus.upper(h)));
        h *= 0.5;
    }
    let max_curvature = samples.curvatures.iter().copied().fold(0.0, f64::max);
    Ok(CurveDiagnostics { bilipschitz_constant, modulus_samples, max_curvature, modulus })
}
