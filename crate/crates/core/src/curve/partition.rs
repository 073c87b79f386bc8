use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const JITTER_RETRIES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionMode {
    Uniform,
    /// Interior nodes moved by at most `ρ·L/n`, `ρ ∈ [0, 0.4)`.
    Jitter(f64),
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionMode::Uniform => write!(f, "uniform"),
            PartitionMode::Jitter(rho) => write!(f, "jitter:{rho}"),
        }
    }
}

impl FromStr for PartitionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "uniform" {
            return Ok(PartitionMode::Uniform);
        }
        if let Some(rho) = s.strip_prefix("jitter:") {
            let rho: f64 = rho
                .parse()
                .map_err(|_| Error::Parse(format!("bad jitter amplitude in '{s}'")))?;
            return Ok(PartitionMode::Jitter(rho));
        }
        Err(Error::Parse(format!("unknown partition mode '{s}' (uniform | jitter:ρ)")))
    }
}

/// Nodes `0 = s_0 < s_1 < … < s_n = L` of the periodic domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    nodes: Vec<f64>,
}

impl Partition {
    /// Validates monotonicity and `s_0 = 0`.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes[0] != 0.0 {
            return Err(Error::Precondition("partition needs s_0 = 0 and at least two gaps".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("partition nodes must be strictly increasing".into()));
        }
        Ok(Partition { nodes })
    }

    /// Number of gaps.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn period(&self) -> f64 {
        self.nodes[self.n()]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    /// `h_n`, the largest gap.
    pub fn h_max(&self) -> f64 {
        self.gaps().fold(0.0, f64::max)
    }

    /// `h̃_n`, the smallest gap.
    pub fn h_min(&self) -> f64 {
        self.gaps().fold(f64::INFINITY, f64::min)
    }

    /// Index of the gap containing `s ∈ [0, L)` (after periodic reduction).
    pub fn segment_of(&self, s: f64) -> usize {
        let s = s.rem_euclid(self.period());
        self.nodes.partition_point(|&x| x <= s).saturating_sub(1).min(self.n() - 1)
    }

    /// `c₁/n ≤ h̃_n ≤ h_n ≤ c₂/n` and `h_n ≤ L/2`.
    pub fn is_distributed(&self, c1: f64, c2: f64) -> bool {
        let n = self.n() as f64;
        let slack = 1e-12 * self.period();
        c1 / n <= self.h_min() + slack && self.h_max() <= c2 / n + slack && self.h_max() <= 0.5 * self.period()
    }
}

pub fn make_partition(length: f64, n: usize, mode: PartitionMode, seed: u64) -> Result<Partition> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Precondition(format!("partition length must be positive, got {length}")));
    }
    if n < 4 {
        return Err(Error::Precondition(format!("partition needs n >= 4, got {n}")));
    }
    let base = length / n as f64;
    let uniform = |i: usize| if i == n { length } else { i as f64 * base };
    match mode {
        PartitionMode::Uniform => Partition::from_nodes((0..=n).map(uniform).collect()),
        PartitionMode::Jitter(rho) => {
            if !(0.0..0.4).contains(&rho) {
                return Err(Error::Precondition(format!("jitter amplitude must lie in [0, 0.4), got {rho}")));
            }
            let (c1, c2) = ((1.0 - 2.0 * rho) * length, (1.0 + 2.0 * rho) * length);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..JITTER_RETRIES {
                let nodes: Vec<f64> = (0..=n)
                    .map(|i| {
                        if i == 0 || i == n {
                            uniform(i)
                        } else {
                            uniform(i) + rng.random_range(-rho..=rho) * base
                        }
                    })
                    .collect();
                if let Ok(p) = Partition::from_nodes(nodes) {
                    if p.is_distributed(c1, c2) {
                        return Ok(p);
                    }
                }
            }
            Err(Error::Numerical(format!(
                "no ({c1:.4}-{c2:.4})-distributed jittered partition after {JITTER_RETRIES} attempts"
            )))
        }
    }
}
