//! Simulated annealing over junction configurations of closed biarc curves.
//!
//! The chain works at fixed total length: after every move the configuration
//! is dilated about the junction centroid back to length `L`, so the energy
//! cannot be lowered by inflating the curve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::biarc::{build_balanced_biarc, PointTangent};
use crate::energy::{discrete_thickness_proxy, discrete_tp_energy};
use crate::error::{Error, Result};
use crate::geom::{ExtReal, Vec3};
use crate::interpolate::BiarcCurve;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig {
    pub q: f64,
    pub n: usize,
    pub length: f64,
    pub steps: usize,
    /// `None` means a tenth of the initial energy.
    pub initial_temperature: Option<f64>,
    pub cooling_rate: f64,
    /// Position move scale in units of `L/n`.
    pub sigma_position: f64,
    /// Tangent move scale in radians.
    pub sigma_tangent: f64,
    pub min_pair_distance: f64,
    pub seed: u64,
}

impl AnnealConfig {
    pub fn new(q: f64, n: usize, length: f64) -> Self {
        AnnealConfig {
            q,
            n,
            length,
            steps: 20_000,
            initial_temperature: None,
            cooling_rate: 0.995,
            sigma_position: 0.05,
            sigma_tangent: 0.05,
            min_pair_distance: 0.1 * length / n.max(1) as f64,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        if !(self.q >= 2.0 && self.q.is_finite()) {
            return bad(format!("q must be >= 2, got {}", self.q));
        }
        if self.n < 4 {
            return bad(format!("n must be >= 4, got {}", self.n));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length must be positive, got {}", self.length));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return bad(format!("cooling rate must lie in (0,1), got {}", self.cooling_rate));
        }
        if !(self.sigma_position > 0.0 && self.sigma_tangent > 0.0) {
            return bad("move scales must be positive".into());
        }
        if !(self.min_pair_distance > 0.0) {
            return bad(format!("min pair distance must be positive, got {}", self.min_pair_distance));
        }
        if let Some(t) = self.initial_temperature {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("initial temperature must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    /// Energy of the current state after the accept/reject decision.
    pub energy: f64,
    pub temperature: f64,
    pub accepted: bool,
    pub best: f64,
}

#[derive(Debug, Clone)]
pub struct AnnealTrace {
    pub initial_energy: f64,
    pub best_energy: f64,
    pub records: Vec<TraceRecord>,
}

impl AnnealTrace {
    pub fn acceptance_ratio(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.accepted).count() as f64 / self.records.len() as f64
    }
}

struct State {
    curve: BiarcCurve,
    energy: f64,
}

fn finite_energy(curve: &BiarcCurve, cfg: &AnnealConfig) -> Result<Option<f64>> {
    Ok(match discrete_tp_energy(curve, cfg.q, true, cfg.length)? {
        ExtReal::Finite(v) => Some(v),
        ExtReal::Infinite => None,
    })
}

fn normalize_length(curve: BiarcCurve, length: f64) -> Result<BiarcCurve> {
    let factor = length / curve.total_length();
    if (factor - 1.0).abs() <= 1e-15 {
        return Ok(curve);
    }
    curve.scaled(factor, curve.junction_centroid())
}

/// Perturbs junction `i` and rebuilds the two biarcs touching it.
fn propose(curve: &BiarcCurve, cfg: &AnnealConfig, rng: &mut ChaCha8Rng) -> Option<BiarcCurve> {
    let n = curve.n();
    let i = rng.random_range(0..n);
    let mut junctions = curve.junctions();
    let gauss = |rng: &mut ChaCha8Rng| -> Vec3 {
        Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
    };
    let PointTangent { q, t } = junctions[i];
    let dq = gauss(rng) * (cfg.sigma_position * cfg.length / n as f64);
    let xi = gauss(rng) * cfg.sigma_tangent;
    let t_new = (t + (xi - t * xi.dot(t))).normalized()?;
    junctions[i] = PointTangent { q: q + dq, t: t_new };
    let prev = (i + n - 1) % n;
    let mut biarcs = curve.biarcs().to_vec();
    biarcs[prev] = build_balanced_biarc(&junctions[prev], &junctions[i]).ok()?;
    biarcs[i] = build_balanced_biarc(&junctions[i], &junctions[(i + 1) % n]).ok()?;
    normalize_length(BiarcCurve::from_biarcs(biarcs, None), cfg.length).ok()
}

/// Metropolis chain with geometric cooling; returns the best configuration seen.
pub fn anneal_discrete(initial: &BiarcCurve, cfg: &AnnealConfig) -> Result<(BiarcCurve, AnnealTrace)> {
    cfg.validate()?;
    if initial.n() != cfg.n {
        return Err(Error::Precondition(format!(
            "initial configuration has {} biarcs, config says n = {}",
            initial.n(),
            cfg.n
        )));
    }
    if !initial.in_bn(cfg.length) {
        return Err(Error::Precondition("initial configuration violates the length gate".into()));
    }
    let start = normalize_length(initial.clone(), cfg.length)?;
    let min_distance = start.min_junction_distance();
    if min_distance < cfg.min_pair_distance {
        return Err(Error::Precondition(format!(
            "initial min junction distance {min_distance:.4e} below the guard {:.4e}",
            cfg.min_pair_distance
        )));
    }
    let thickness_floor = 0.5 * discrete_thickness_proxy(&start)?;
    let initial_energy = finite_energy(&start, cfg)?
        .ok_or_else(|| Error::Precondition("initial configuration has infinite energy".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut temperature = cfg.initial_temperature.unwrap_or(0.1 * initial_energy);
    let mut current = State { curve: start.clone(), energy: initial_energy };
    let mut best = State { curve: start, energy: initial_energy };
    let mut records = Vec::with_capacity(cfg.steps);

    for step in 1..=cfg.steps {
        let mut accepted = false;
        if let Some(candidate) = propose(&current.curve, cfg, &mut rng) {
            let admissible = candidate.in_bn(cfg.length)
                && candidate.min_junction_distance() >= cfg.min_pair_distance
                && discrete_thickness_proxy(&candidate).map(|r| r >= thickness_floor).unwrap_or(false);
            if admissible {
                if let Some(energy) = finite_energy(&candidate, cfg).ok().flatten() {
                    let delta = energy - current.energy;
                    let u: f64 = rng.random();
                    if delta <= 0.0 || u < (-delta / temperature).exp() {
                        current = State { curve: candidate, energy };
                        accepted = true;
                        if energy < best.energy {
                            best = State { curve: current.curve.clone(), energy };
                        }
                    }
                }
            }
        }
        records.push(TraceRecord { step, energy: current.energy, temperature, accepted, best: best.energy });
        temperature *= cfg.cooling_rate;
    }
    best.curve.validate(crate::interpolate::JOIN_CHECK_TOL)?;
    let trace = AnnealTrace { initial_energy, best_energy: best.energy, records };
    Ok((best.curve, trace))
}

/// Moves every junction radially away from the junction centroid by a
/// factor `1 + amplitude·ξ_i`, `ξ_i` uniform in `[−1, 1]`; tangents are kept.
pub fn perturb_radially(curve: &BiarcCurve, amplitude: f64, seed: u64) -> Result<BiarcCurve> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::Precondition(format!("perturbation amplitude must lie in [0,1), got {amplitude}")));
    }
    let center = curve.junction_centroid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let junctions: Vec<PointTangent> = curve
        .junctions()
        .into_iter()
        .map(|PointTangent { q, t }| {
            let xi: f64 = rng.random_range(-1.0..=1.0);
            PointTangent { q: center + (q - center) * (1.0 + amplitude * xi), t }
        })
        .collect();
    BiarcCurve::from_junctions(&junctions)
}
