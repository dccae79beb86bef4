//! Cost-to-amplitude encoders and the entangling step
//! `|k, 0…0⟩ ↦ a_k |k, 0…0⟩ + √(1 − a_k²) |k, junk⟩`.
//!
//! Instances with negative costs are shifted up so the smallest cost is 0;
//! instances that are already nonnegative are used as-is. The cost-shaped
//! families then see costs in `[0, c_max]`. The threshold oracle compares
//! raw costs against its threshold, so `oracle:<c_tol>` marks exactly the
//! states counted by [`CostInstance::count_below`].

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::costfn::CostInstance;
use crate::error::{Error, Result};
use crate::statevec::{RegisterLayout, StateVector};

/// Largest ancilla amplitude tolerated on a nonzero outcome of an input state.
const INPUT_ANCILLA_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmplitudeEncoder {
    /// Every state accepted with certainty.
    Identity,
    /// Accept exactly the states with cost below the threshold.
    OracleThreshold(f64),
    /// `cos^b(π·C / (2·c_max))`.
    CosinePower(f64),
    /// `1 − C / c_max`.
    Linear,
}

impl AmplitudeEncoder {
    pub fn cosine_power(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::config(format!(
                "cosine power exponent must be positive, got {b}"
            )));
        }
        Ok(AmplitudeEncoder::CosinePower(b))
    }

    pub fn oracle(threshold: f64) -> Result<Self> {
        if threshold.is_nan() {
            return Err(Error::config("oracle threshold is NaN"));
        }
        Ok(AmplitudeEncoder::OracleThreshold(threshold))
    }
}

impl fmt::Display for AmplitudeEncoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmplitudeEncoder::Identity => f.write_str("identity"),
            AmplitudeEncoder::OracleThreshold(t) => write!(f, "oracle:{t}"),
            AmplitudeEncoder::CosinePower(b) => write!(f, "cospow:{b}"),
            AmplitudeEncoder::Linear => f.write_str("linear"),
        }
    }
}

impl FromStr for AmplitudeEncoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let number = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::config(format!("bad encoder parameter in `{s}`: {e}")))
        };
        match s.trim().split_once(':') {
            None if s.trim() == "identity" => Ok(AmplitudeEncoder::Identity),
            None if s.trim() == "linear" => Ok(AmplitudeEncoder::Linear),
            Some(("oracle", v)) => AmplitudeEncoder::oracle(number(v)?),
            Some(("cospow", v)) => AmplitudeEncoder::cosine_power(number(v)?),
            _ => Err(Error::config(format!(
                "unknown encoder `{s}` (expected identity, oracle:<tau>, cospow:<b>, linear)"
            ))),
        }
    }
}

impl Serialize for AmplitudeEncoder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// How the failure amplitude is laid out on the nonzero ancilla outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum JunkPolicy {
    /// Everything on ancilla outcome `0…01`.
    #[default]
    Concentrated,
    /// Equal share on every nonzero ancilla outcome.
    Spread,
}

impl fmt::Display for JunkPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JunkPolicy::Concentrated => "concentrated",
            JunkPolicy::Spread => "spread",
        })
    }
}

impl FromStr for JunkPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concentrated" => Ok(JunkPolicy::Concentrated),
            "spread" => Ok(JunkPolicy::Spread),
            other => Err(Error::config(format!("unknown junk policy `{other}`"))),
        }
    }
}

impl Serialize for JunkPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Amplitude on the accepting ancilla outcome for a cost already shifted
/// into `[0, c_max]`. With `c_max = 0` the only admissible cost is 0, which
/// every cost-shaped family accepts with certainty.
pub fn success_amplitude(encoder: AmplitudeEncoder, cost: f64, c_max: f64) -> Result<f64> {
    if !(cost >= 0.0 && cost <= c_max) {
        return Err(Error::domain(format!("cost {cost} outside [0, {c_max}]")));
    }
    let a = match encoder {
        AmplitudeEncoder::Identity => 1.0,
        AmplitudeEncoder::OracleThreshold(tau) => {
            if cost < tau {
                1.0
            } else {
                0.0
            }
        }
        AmplitudeEncoder::CosinePower(_) | AmplitudeEncoder::Linear if c_max == 0.0 => 1.0,
        // cos(π/2) is not exactly zero in floating point.
        AmplitudeEncoder::CosinePower(_) if cost == c_max => 0.0,
        AmplitudeEncoder::CosinePower(b) => (FRAC_PI_2 * cost / c_max).cos().powf(b),
        AmplitudeEncoder::Linear => 1.0 - cost / c_max,
    };
    Ok(a.clamp(0.0, 1.0))
}

/// Success amplitude a_k for every basis state of `instance`.
pub fn amplitude_table(encoder: AmplitudeEncoder, instance: &CostInstance) -> Vec<f64> {
    if let AmplitudeEncoder::OracleThreshold(tau) = encoder {
        return instance
            .costs()
            .iter()
            .map(|&c| if c < tau { 1.0 } else { 0.0 })
            .collect();
    }
    let shift = instance.c_min().min(0.0);
    let c_max = instance.c_max() - shift;
    instance
        .costs()
        .iter()
        .map(|&c| {
            let shifted = (c - shift).clamp(0.0, c_max);
            success_amplitude(encoder, shifted, c_max).expect("shifted cost lies in [0, c_max]")
        })
        .collect()
}

/// Applies the cost-dependent ancilla rotation to a state whose ancilla is in
/// `0…0`. The map is an isometry on that subspace.
pub fn encode(
    state: &StateVector,
    instance: &CostInstance,
    encoder: AmplitudeEncoder,
    junk: JunkPolicy,
) -> Result<StateVector> {
    let layout: RegisterLayout = state.layout();
    if layout.n_data() != instance.n_data() {
        return Err(Error::config(format!(
            "state has {} data qubits but instance has {}",
            layout.n_data(),
            instance.n_data()
        )));
    }
    for d in 0..layout.data_dim() {
        for anc in 1..layout.anc_dim() {
            if state.amplitude(d, anc).norm() > INPUT_ANCILLA_TOLERANCE {
                return Err(Error::config(format!(
                    "input state has weight on ancilla outcome {anc}; encoding expects ancilla 0"
                )));
            }
        }
    }

    let table = amplitude_table(encoder, instance);
    let junk_slots = layout.anc_dim() - 1;
    let spread_scale = 1.0 / (junk_slots as f64).sqrt();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for (k, &a) in table.iter().enumerate() {
        let alpha = state.amplitude(k, 0);
        let fail = (1.0 - a * a).max(0.0).sqrt();
        amplitudes[layout.index(k, 0)] = alpha * a;
        match junk {
            JunkPolicy::Concentrated => amplitudes[layout.index(k, 1)] = alpha * fail,
            JunkPolicy::Spread => {
                for anc in 1..layout.anc_dim() {
                    amplitudes[layout.index(k, anc)] = alpha * fail * spread_scale;
                }
            }
        }
    }
    StateVector::from_amplitudes(layout, amplitudes)
}
