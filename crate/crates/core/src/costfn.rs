//! Tabulated cost functions over n-bit strings, with brute-force oracles and
//! seeded instance generators.
//!
//! Bitstring `k` is the data-register basis index. Bit `i` of `k` is the
//! i-th decision variable; for number partitioning a clear bit puts weight `i`
//! on the plus side and a set bit puts it on the minus side.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::statevec::rng_from_seed;

/// Largest data register for which a cost table is built.
pub const MAX_TABLE_QUBITS: usize = 20;

/// Where an instance came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Value,
}

impl Provenance {
    pub fn explicit() -> Self {
        Self {
            generator: GeneratorKind::Explicit.to_string(),
            seed: None,
            params: json!({}),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostInstance {
    n_data: usize,
    costs: Vec<f64>,
    #[serde(skip)]
    c_max: f64,
    provenance: Provenance,
}

#[derive(Deserialize)]
struct InstanceFile {
    n_data: usize,
    costs: Vec<f64>,
    #[serde(default = "Provenance::explicit")]
    provenance: Provenance,
}

impl CostInstance {
    pub fn new(costs: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let len = costs.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::config(format!(
                "cost table length {len} is not a power of two >= 2"
            )));
        }
        let n_data = len.trailing_zeros() as usize;
        if n_data > MAX_TABLE_QUBITS {
            return Err(Error::config(format!(
                "cost tables are limited to {MAX_TABLE_QUBITS} data qubits, got {n_data}"
            )));
        }
        if let Some((k, c)) = costs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::config(format!("cost at index {k} is not finite ({c})")));
        }
        let c_max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            n_data,
            costs,
            c_max,
            provenance,
        })
    }

    pub fn from_costs(costs: Vec<f64>) -> Result<Self> {
        Self::new(costs, Provenance::explicit())
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    /// Number of basis states, N = 2^n_data.
    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn c_min(&self) -> f64 {
        self.min_cost().1
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn cost_of(&self, k: usize) -> Result<f64> {
        self.costs
            .get(k)
            .copied()
            .ok_or_else(|| Error::domain(format!("data index {k} out of range (N = {})", self.len())))
    }

    /// M: number of states with cost strictly below `c_tol`.
    pub fn count_below(&self, c_tol: f64) -> usize {
        self.costs.iter().filter(|&&c| c < c_tol).count()
    }

    /// Lowest-index minimizer and its cost.
    pub fn min_cost(&self) -> (usize, f64) {
        let mut best = (0, self.costs[0]);
        for (k, &c) in self.costs.iter().enumerate().skip(1) {
            if c < best.1 {
                best = (k, c);
            }
        }
        best
    }

    pub fn is_low_cost(&self, k: usize, c_tol: f64) -> bool {
        self.costs[k] < c_tol
    }

    /// Text form: a `n_data=<int>` header, an optional provenance comment,
    /// then one cost per line in index order. Costs are written in the
    /// shortest form that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut out = format!("n_data={}\n", self.n_data);
        let prov = serde_json::to_string(&self.provenance).expect("provenance serializes");
        out.push_str("# provenance: ");
        out.push_str(&prov);
        out.push('\n');
        for c in &self.costs {
            out.push_str(&format!("{c:?}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty instance file".into()))?;
        let n_data: usize = header
            .strip_prefix("n_data=")
            .ok_or_else(|| Error::Parse(format!("expected `n_data=<int>` header, got `{header}`")))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad n_data: {e}")))?;
        if n_data == 0 || n_data > MAX_TABLE_QUBITS {
            return Err(Error::Parse(format!(
                "n_data={n_data} outside 1..={MAX_TABLE_QUBITS}"
            )));
        }
        let mut provenance = None;
        let mut costs = Vec::with_capacity(1 << n_data);
        for line in lines {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(p) = comment.trim().strip_prefix("provenance:") {
                    provenance = Some(serde_json::from_str(p.trim())?);
                }
                continue;
            }
            for token in line.split_whitespace() {
                let c: f64 = token
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad cost `{token}`: {e}")))?;
                costs.push(c);
            }
        }
        if costs.len() != 1 << n_data {
            return Err(Error::Parse(format!(
                "n_data={n_data} needs {} costs, found {}",
                1usize << n_data,
                costs.len()
            )));
        }
        Self::new(costs, provenance.unwrap_or_else(Provenance::explicit))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.costs.len() != 1usize.checked_shl(file.n_data as u32).unwrap_or(0) {
            return Err(Error::Parse(format!(
                "n_data={} does not match {} costs",
                file.n_data,
                file.costs.len()
            )));
        }
        Self::new(file.costs, file.provenance)
    }

    /// Parses either format; structured input starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Writes JSON when the path ends in `.json`, text otherwise.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let body = if path.extension().is_some_and(|e| e == "json") {
            self.to_json()? + "\n"
        } else {
            self.to_text()
        };
        fs::write(path, body)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Explicit,
    UniformRandom,
    NumberPartition,
    HammingStructured,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::Explicit => "explicit",
            GeneratorKind::UniformRandom => "uniform_random",
            GeneratorKind::NumberPartition => "number_partition",
            GeneratorKind::HammingStructured => "hamming_structured",
        })
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(GeneratorKind::Explicit),
            "uniform_random" => Ok(GeneratorKind::UniformRandom),
            "number_partition" => Ok(GeneratorKind::NumberPartition),
            "hamming_structured" => Ok(GeneratorKind::HammingStructured),
            other => Err(Error::config(format!("unknown instance kind `{other}`"))),
        }
    }
}

/// Generator with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Explicit {
        costs: Vec<f64>,
    },
    /// Independent costs drawn uniformly from `[low, high)`.
    UniformRandom {
        n_data: usize,
        low: f64,
        high: f64,
    },
    /// Cost of sign pattern k is `|Σ ±wᵢ|`.
    NumberPartition {
        weights: Vec<f64>,
    },
    /// Random quadratic pseudo-boolean landscape whose single-bit-flip
    /// differences never exceed `lipschitz`.
    HammingStructured {
        n_data: usize,
        lipschitz: f64,
    },
}

impl Generator {
    pub fn kind(&self) -> GeneratorKind {
        match self {
            Generator::Explicit { .. } => GeneratorKind::Explicit,
            Generator::UniformRandom { .. } => GeneratorKind::UniformRandom,
            Generator::NumberPartition { .. } => GeneratorKind::NumberPartition,
            Generator::HammingStructured { .. } => GeneratorKind::HammingStructured,
        }
    }

    fn params(&self) -> Value {
        match self {
            Generator::Explicit { .. } => json!({}),
            Generator::UniformRandom { n_data, low, high } => {
                json!({ "n_data": n_data, "low": low, "high": high })
            }
            Generator::NumberPartition { weights } => json!({ "weights": weights }),
            Generator::HammingStructured { n_data, lipschitz } => {
                json!({ "n_data": n_data, "lipschitz": lipschitz })
            }
        }
    }

    fn check_n(n_data: usize) -> Result<()> {
        if n_data == 0 || n_data > MAX_TABLE_QUBITS {
            return Err(Error::config(format!(
                "n_data must be in 1..={MAX_TABLE_QUBITS}, got {n_data}"
            )));
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<CostInstance> {
        let costs = match self {
            Generator::Explicit { costs } => costs.clone(),
            Generator::UniformRandom { n_data, low, high } => {
                Self::check_n(*n_data)?;
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::config(format!(
                        "need finite low < high, got [{low}, {high})"
                    )));
                }
                let mut rng = rng_from_seed(seed);
                (0..1usize << n_data)
                    .map(|_| rng.gen_range(*low..*high))
                    .collect()
            }
            Generator::NumberPartition { weights } => {
                Self::check_n(weights.len())?;
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(Error::config(format!(
                        "partition weights must be positive, got {w}"
                    )));
                }
                number_partition_costs(weights)
            }
            Generator::HammingStructured { n_data, lipschitz } => {
                Self::check_n(*n_data)?;
                if !(lipschitz.is_finite() && *lipschitz > 0.0) {
                    return Err(Error::config(format!(
                        "lipschitz bound must be positive, got {lipschitz}"
                    )));
                }
                hamming_structured_costs(*n_data, *lipschitz, seed)
            }
        };
        let provenance = Provenance {
            generator: self.kind().to_string(),
            seed: match self {
                Generator::Explicit { .. } => None,
                _ => Some(seed),
            },
            params: self.params(),
        };
        CostInstance::new(costs, provenance)
    }
}

fn number_partition_costs(weights: &[f64]) -> Vec<f64> {
    (0..1usize << weights.len())
        .map(|k| {
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| if k >> i & 1 == 0 { *w } else { -*w })
                .sum::<f64>()
                .abs()
        })
        .collect()
}

// C(x) = Σ fⱼxⱼ + Σ_{i<j} Jᵢⱼxᵢxⱼ. Flipping bit j changes the cost by
// fⱼ + Σ_{i≠j} Jᵢⱼxᵢ, so |fⱼ| ≤ L/2 and Σᵢ|Jᵢⱼ| ≤ L/2 bound it by L. The
// small shrink keeps rounding in the table from crossing L.
#[allow(clippy::needless_range_loop)]
fn hamming_structured_costs(n: usize, lipschitz: f64, seed: u64) -> Vec<f64> {
    let half = 0.5 * lipschitz * (1.0 - 1e-9);
    let mut rng = rng_from_seed(seed);
    let fields: Vec<f64> = (0..n).map(|_| rng.gen_range(-half..=half)).collect();
    let mut coupling = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(-1.0..=1.0);
            coupling[i][j] = v;
            coupling[j][i] = v;
        }
    }
    let widest = coupling
        .iter()
        .map(|row| row.iter().map(|v: &f64| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if widest > 0.0 {
        let scale = half / widest;
        coupling.iter_mut().flatten().for_each(|v| *v *= scale);
    }

    let big_n = 1usize << n;
    let mut costs = vec![0.0; big_n];
    for k in 1..big_n {
        let j = k.trailing_zeros() as usize;
        let rest = k & !(1 << j);
        let delta = fields[j]
            + (0..n)
                .filter(|&i| rest >> i & 1 == 1)
                .map(|i| coupling[i][j])
                .sum::<f64>();
        costs[k] = costs[rest] + delta;
    }
    costs
}
