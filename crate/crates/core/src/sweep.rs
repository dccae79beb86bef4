//! Deterministic randomized configuration sweeps.
//!
//! Point `i` cycles through the encoder families (period 7), junk policies
//! (period 14) and instance kinds (period 3), so any 42 consecutive points
//! cover every combination. Register sizes, thresholds and instance seeds
//! come from the sweep seed.

use rand::Rng;
use serde::Serialize;

use crate::algorithm::RunConfig;
use crate::costfn::{CostInstance, Generator, GeneratorKind};
use crate::encoding::{AmplitudeEncoder, JunkPolicy};
use crate::error::{Error, Result};
use crate::statevec::rng_from_seed;

pub const DEFAULT_MAX_DATA_QUBITS: usize = 12;
pub const MAX_SWEEP_ANCILLAS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderChoice {
    Identity,
    /// Threshold oracle at the point's own `c_tol`.
    Oracle,
    CosinePower(f64),
    Linear,
}

pub const ENCODER_CHOICES: [EncoderChoice; 7] = [
    EncoderChoice::Identity,
    EncoderChoice::Oracle,
    EncoderChoice::CosinePower(0.5),
    EncoderChoice::CosinePower(1.0),
    EncoderChoice::CosinePower(2.0),
    EncoderChoice::CosinePower(8.0),
    EncoderChoice::Linear,
];

pub const SWEEP_KINDS: [GeneratorKind; 3] = [
    GeneratorKind::UniformRandom,
    GeneratorKind::NumberPartition,
    GeneratorKind::HammingStructured,
];

/// Threshold positions in the sorted cost table. 1.0 means above the
/// maximum, so every state counts; 0.0 sits on the minimum, so none does.
pub const CTOL_QUANTILES: [f64; 6] = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0];

impl EncoderChoice {
    pub fn resolve(self, c_tol: f64) -> AmplitudeEncoder {
        match self {
            EncoderChoice::Identity => AmplitudeEncoder::Identity,
            EncoderChoice::Oracle => AmplitudeEncoder::OracleThreshold(c_tol),
            EncoderChoice::CosinePower(b) => AmplitudeEncoder::CosinePower(b),
            EncoderChoice::Linear => AmplitudeEncoder::Linear,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub kind: GeneratorKind,
    pub instance_seed: u64,
    pub n_data: usize,
    pub n_anc: usize,
    pub encoder: EncoderChoice,
    pub junk: JunkPolicy,
    pub quantile: f64,
}

impl SweepPoint {
    pub fn generator(&self) -> Generator {
        match self.kind {
            GeneratorKind::NumberPartition => {
                let mut rng = rng_from_seed(self.instance_seed ^ 0x5eed_7a27);
                Generator::NumberPartition {
                    weights: (0..self.n_data).map(|_| rng.gen_range(1..=12) as f64).collect(),
                }
            }
            GeneratorKind::HammingStructured => Generator::HammingStructured {
                n_data: self.n_data,
                lipschitz: 1.0,
            },
            _ => Generator::UniformRandom {
                n_data: self.n_data,
                low: -1.0,
                high: 1.0,
            },
        }
    }

    pub fn instance(&self) -> Result<CostInstance> {
        self.generator().generate(self.instance_seed)
    }

    pub fn build(&self) -> Result<(CostInstance, RunConfig)> {
        let instance = self.instance()?;
        let c_tol = quantile_threshold(&instance, self.quantile);
        let config = RunConfig::new(c_tol, self.encoder.resolve(c_tol))
            .with_junk(self.junk)
            .with_ancillas(self.n_anc);
        Ok((instance, config))
    }
}

/// Cost at position `⌊q·(N−1)⌋` of the sorted table; `q ≥ 1` gives a value
/// above the maximum.
pub fn quantile_threshold(instance: &CostInstance, q: f64) -> f64 {
    if q >= 1.0 {
        return instance.c_max() + 1.0;
    }
    let mut sorted = instance.costs().to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = (q.max(0.0) * (sorted.len() - 1) as f64).floor() as usize;
    sorted[pos]
}

pub fn sweep_points(count: usize, seed: u64, max_n_data: usize) -> Result<Vec<SweepPoint>> {
    if max_n_data == 0 || max_n_data > crate::costfn::MAX_TABLE_QUBITS {
        return Err(Error::config(format!(
            "sweep n_data limit {max_n_data} out of range"
        )));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..count)
        .map(|i| SweepPoint {
            index: i,
            kind: SWEEP_KINDS[i % SWEEP_KINDS.len()],
            encoder: ENCODER_CHOICES[i % ENCODER_CHOICES.len()],
            junk: if (i / ENCODER_CHOICES.len()).is_multiple_of(2) {
                JunkPolicy::Concentrated
            } else {
                JunkPolicy::Spread
            },
            n_data: rng.gen_range(1..=max_n_data),
            n_anc: rng.gen_range(1..=MAX_SWEEP_ANCILLAS),
            quantile: CTOL_QUANTILES[rng.gen_range(0..CTOL_QUANTILES.len())],
            instance_seed: rng.gen(),
        })
        .collect())
}
