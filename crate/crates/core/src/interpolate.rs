//! Closed curves assembled from balanced biarcs.

use std::fmt::Write as _;

use crate::biarc::{build_balanced_biarc, Biarc, PointTangent};
use crate::curve::{CurveSpec, ModulusTable, Partition};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::quad::map_rows;

/// Tolerance for the closure and C¹ join checks of [`BiarcCurve::validate`].
pub const JOIN_CHECK_TOL: f64 = 1e-9;
/// Relative tolerance on the stored `λ` column when reading junction files.
pub const LENGTH_READ_TOL: f64 = 1e-9;

const MODULUS_GRID: usize = 4096;

/// Requirements on the partition beyond properness of every pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildPolicy {
    /// Only properness of the point-tangent pairs is required.
    #[default]
    Properness,
    /// Additionally `ω_{γ'}(s_{i+1} − s_i) < 1/2` for every segment and `h_n ≤ L/2`.
    Strict,
}

/// A closed `C¹` curve made of `n` balanced biarcs, parametrized by arclength.
#[derive(Debug, Clone)]
pub struct BiarcCurve {
    biarcs: Vec<Biarc>,
    offsets: Vec<f64>,
    source_nodes: Option<Vec<f64>>,
}

impl BiarcCurve {
    /// Builds the biarc through consecutive junctions, the last one closing
    /// the loop back to the first.
    pub fn from_junctions(junctions: &[PointTangent]) -> Result<Self> {
        let n = junctions.len();
        if n < 3 {
            return Err(Error::Precondition(format!("a closed biarc curve needs >= 3 junctions, got {n}")));
        }
        let biarcs = (0..n)
            .map(|i| {
                build_balanced_biarc(&junctions[i], &junctions[(i + 1) % n]).map_err(|e| match e {
                    Error::ImproperPair(msg) => Error::ImproperPair(format!("segment {i}: {msg}")),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_biarcs(biarcs, None))
    }

    pub(crate) fn from_biarcs(biarcs: Vec<Biarc>, source_nodes: Option<Vec<f64>>) -> Self {
        let mut offsets = Vec::with_capacity(biarcs.len() + 1);
        let mut acc = 0.0;
        offsets.push(acc);
        for b in &biarcs {
            acc += b.total_length;
            offsets.push(acc);
        }
        BiarcCurve { biarcs, offsets, source_nodes }
    }

    pub fn n(&self) -> usize {
        self.biarcs.len()
    }

    pub fn biarcs(&self) -> &[Biarc] {
        &self.biarcs
    }

    pub fn junctions(&self) -> Vec<PointTangent> {
        self.biarcs.iter().map(|b| b.pair.0).collect()
    }

    pub fn junction_points(&self) -> Vec<Vec3> {
        self.biarcs.iter().map(|b| b.pair.0.q).collect()
    }

    /// Biarc lengths `λ_i`.
    pub fn lengths(&self) -> Vec<f64> {
        self.biarcs.iter().map(|b| b.total_length).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.offsets[self.n()]
    }

    /// Cumulative arclength at each junction, `n + 1` entries.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Partition nodes of the source curve, when built by [`build_biarc_curve`].
    pub fn source_nodes(&self) -> Option<&[f64]> {
        self.source_nodes.as_deref()
    }

    /// Index of the biarc containing arclength `s` (reduced modulo the length).
    pub fn segment_of(&self, s: f64) -> (usize, f64) {
        let total = self.total_length();
        let s = s.rem_euclid(total);
        let i = self.offsets.partition_point(|&x| x <= s).saturating_sub(1).min(self.n() - 1);
        (i, s - self.offsets[i])
    }

    /// Position and unit tangent at arclength `s`, periodic in `s`.
    pub fn eval(&self, s: f64) -> (Vec3, Vec3) {
        let (i, local) = self.segment_of(s);
        self.biarcs[i].eval_clamped(local)
    }

    /// `L/(2n) ≤ λ_i ≤ 2L/n` for all `i`.
    pub fn check_bn(&self, length: f64, n: usize) -> Result<bool> {
        if n != self.n() {
            return Err(Error::Precondition(format!("curve has {} biarcs, not {n}", self.n())));
        }
        Ok(self.in_bn(length))
    }

    pub(crate) fn in_bn(&self, length: f64) -> bool {
        let n = self.n() as f64;
        let (lo, hi) = (length / (2.0 * n), 2.0 * length / n);
        self.biarcs.iter().all(|b| b.total_length >= lo && b.total_length <= hi)
    }

    /// Dilation by `factor` about `center`.
    pub fn scaled(&self, factor: f64, center: Vec3) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Precondition(format!("scale factor must be positive, got {factor}")));
        }
        let biarcs = self.biarcs.iter().map(|b| b.scaled(factor, center)).collect();
        let nodes = self.source_nodes.as_ref().map(|v| v.iter().map(|s| s * factor).collect());
        Ok(Self::from_biarcs(biarcs, nodes))
    }

    pub fn junction_centroid(&self) -> Vec3 {
        let pts = self.junction_points();
        pts.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / pts.len() as f64
    }

    /// Smallest distance between two distinct junction points.
    pub fn min_junction_distance(&self) -> f64 {
        let pts = self.junction_points();
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                best = best.min(pts[i].distance(pts[j]));
            }
        }
        best
    }

    /// Checks every biarc, the junction joins and closure.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n();
        for (i, b) in self.biarcs.iter().enumerate() {
            b.check_invariants(tol)
                .map_err(|e| Error::Consistency(format!("biarc {i}: {e}")))?;
            let (p_end, t_end) = b.second.end();
            let next = &self.biarcs[(i + 1) % n].pair.0;
            let gap = p_end.distance(next.q).max(t_end.distance(next.t));
            if !(gap <= tol) {
                return Err(Error::Consistency(format!("join {i} -> {} off by {gap:.3e}", (i + 1) % n)));
            }
        }
        let sum: f64 = self.lengths().iter().sum();
        if !((sum - self.total_length()).abs() <= tol * self.total_length().max(1.0)) {
            return Err(Error::Consistency("total length differs from the sum of biarc lengths".into()));
        }
        Ok(())
    }

    /// One line per junction: `qx qy qz tx ty tz λ`.
    pub fn to_junction_text(&self) -> String {
        let mut out = String::from("# qx qy qz tx ty tz lambda\n");
        for b in &self.biarcs {
            let PointTangent { q, t } = b.pair.0;
            let fields = [q.x, q.y, q.z, t.x, t.y, t.z, b.total_length];
            let line: Vec<String> = fields.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses the junction format, rebuilds the biarcs and checks the stored lengths.
    pub fn from_junction_text(text: &str) -> Result<Self> {
        let mut junctions = Vec::new();
        let mut stored = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields = line
                .split_whitespace()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if fields.len() != 7 {
                return Err(Error::Parse(format!(
                    "line {}: expected 7 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let q = Vec3::new(fields[0], fields[1], fields[2]);
            let mut t = Vec3::new(fields[3], fields[4], fields[5]);
            if (t.norm() - 1.0).abs() > 4.0 * f64::EPSILON {
                t = t
                    .normalized()
                    .ok_or_else(|| Error::Parse(format!("line {}: zero tangent", lineno + 1)))?;
            }
            junctions.push(PointTangent::new(q, t).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?);
            stored.push(fields[6]);
        }
        let curve = Self::from_junctions(&junctions)?;
        for (i, (b, &lambda)) in curve.biarcs.iter().zip(&stored).enumerate() {
            if !((b.total_length - lambda).abs() <= LENGTH_READ_TOL * lambda.abs().max(1e-300)) {
                return Err(Error::Parse(format!(
                    "junction {i}: stored length {lambda} but rebuilt biarc has {}",
                    b.total_length
                )));
            }
        }
        Ok(curve)
    }
}

/// Interpolates `γ` at the partition nodes with balanced biarcs using the
/// default [`BuildPolicy::Properness`].
pub fn build_biarc_curve(curve: &CurveSpec, partition: &Partition) -> Result<BiarcCurve> {
    build_biarc_curve_with(curve, partition, BuildPolicy::default())
}

pub fn build_biarc_curve_with(curve: &CurveSpec, partition: &Partition, policy: BuildPolicy) -> Result<BiarcCurve> {
    if !curve.is_arclength() {
        return Err(Error::Precondition(format!(
            "biarc interpolation needs an arclength-parametrized curve, '{}' is not",
            curve.name()
        )));
    }
    let length = curve.period();
    if !((partition.period() - length).abs() <= 1e-9 * length) {
        return Err(Error::Precondition(format!(
            "partition period {} does not match curve length {length}",
            partition.period()
        )));
    }
    if policy == BuildPolicy::Strict {
        check_smallness(curve, partition)?;
    }
    let nodes = partition.nodes();
    let n = partition.n();
    let junctions = map_rows(n, |i| PointTangent::normalized(curve.position(nodes[i]), curve.derivative(nodes[i])))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let built = BiarcCurve::from_junctions(&junctions)?;
    Ok(BiarcCurve { source_nodes: Some(nodes.to_vec()), ..built })
}

fn check_smallness(curve: &CurveSpec, partition: &Partition) -> Result<()> {
    let length = curve.period();
    if partition.h_max() > 0.5 * length {
        return Err(Error::Precondition(format!("h_n = {} exceeds L/2", partition.h_max())));
    }
    let modulus = ModulusTable::from_curve(curve, MODULUS_GRID)?;
    for (segment, gap) in partition.gaps().enumerate() {
        let w = modulus.upper(gap);
        if !(w < 0.5) {
            return Err(Error::Smallness { segment, modulus: w });
        }
    }
    Ok(())
}

/// `sup_s |γ(s) − B(s)| + |γ'(s) − B'(s)|` on `grid` uniform samples, where
/// `B = β ∘ φ` and `φ` maps each partition interval affinely onto the
/// arclength range of its biarc.
pub fn c1_distance(curve: &CurveSpec, beta: &BiarcCurve, grid: usize) -> Result<f64> {
    let nodes = beta
        .source_nodes()
        .ok_or_else(|| Error::Precondition("biarc curve carries no source partition".into()))?;
    if grid < 2 * beta.n() {
        return Err(Error::Precondition(format!(
            "grid {grid} under-resolves {} biarcs (need >= {})",
            beta.n(),
            2 * beta.n()
        )));
    }
    if !curve.is_arclength() {
        return Err(Error::Precondition("c1_distance needs an arclength-parametrized curve".into()));
    }
    let length = curve.period();
    let n = beta.n();
    let step = length / grid as f64;
    let rows = map_rows(grid, |k| {
        let s = k as f64 * step;
        let i = nodes.partition_point(|&x| x <= s).saturating_sub(1).min(n - 1);
        let slope = beta.biarcs[i].total_length / (nodes[i + 1] - nodes[i]);
        let (p, t) = beta.biarcs[i].eval_clamped((s - nodes[i]) * slope);
        curve.position(s).distance(p) + curve.derivative(s).distance(t * slope)
    });
    Ok(rows.into_iter().fold(0.0, f64::max))
}
