//! The prepare / encode / post-select / measure procedure, analysed exactly
//! from amplitudes and simulated as a repeat-until-success loop.
//!
//! Two events recur throughout: A is "the data readout has cost below
//! `c_tol`" and B is "the ancilla reads `0…0`". One preparation succeeds
//! with probability `p(A & B) = p(A|B)·p(B) = p(B|A)·p(A)`, and since
//! `p(A) = M/N` under a uniform data marginal, that is at most `M/N`.

use serde::Serialize;

use crate::costfn::CostInstance;
use crate::encoding::{encode, AmplitudeEncoder, JunkPolicy};
use crate::error::{Error, Result};
use crate::statevec::{
    rng_from_seed, OutcomeDistribution, Register, RegisterLayout, Sampler, StateVector, IMPOSSIBLE_THRESHOLD,
};

/// Tolerance for algebraic identities between probabilities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
/// Slack on the `M/N` and `1/N` ceilings.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Largest total variation distance accepted between measurement orderings.
pub const TV_TOLERANCE: f64 = 1e-10;
/// Width of the binomial acceptance band for sampled frequencies, in σ.
pub const SIGMA_BAND: f64 = 5.0;

const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop at the first low-cost hit.
    #[default]
    FirstHit,
    /// Spend the whole preparation budget and count every hit.
    Exhaust,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    /// Success threshold; a readout succeeds when its cost is strictly below.
    pub c_tol: f64,
    pub encoder: AmplitudeEncoder,
    pub junk: JunkPolicy,
    pub n_anc: usize,
    pub max_preparations: u64,
    pub seed: u64,
    pub stop: StopRule,
}

impl RunConfig {
    pub fn new(c_tol: f64, encoder: AmplitudeEncoder) -> Self {
        Self {
            c_tol,
            encoder,
            junk: JunkPolicy::Concentrated,
            n_anc: 1,
            max_preparations: 100_000,
            seed: 0,
            stop: StopRule::FirstHit,
        }
    }

    pub fn with_junk(mut self, junk: JunkPolicy) -> Self {
        self.junk = junk;
        self
    }

    pub fn with_ancillas(mut self, n_anc: usize) -> Self {
        self.n_anc = n_anc;
        self
    }

    pub fn with_budget(mut self, max_preparations: u64, stop: StopRule) -> Self {
        self.max_preparations = max_preparations;
        self.stop = stop;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The encoded state `(1/√N) Σ_k |k, φ(k)⟩` that every preparation produces.
pub fn prepared_state(instance: &CostInstance, config: &RunConfig) -> Result<StateVector> {
    let layout = RegisterLayout::new(instance.n_data(), config.n_anc)?;
    let psi0 = StateVector::uniform_superposition(layout);
    encode(&psi0, instance, config.encoder, config.junk)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactAnalysis {
    /// p(B): probability the ancilla reads `0…0`.
    pub p_first: f64,
    /// p(A|B); `None` when p(B) is at or below the impossibility threshold.
    pub p_cond: Option<f64>,
    pub p_joint: f64,
    pub m: usize,
    pub n: usize,
    /// M/N.
    pub bound: f64,
    /// Entry k is p(B)·p(data = k | B).
    pub per_state_products: Vec<f64>,
}

impl ExactAnalysis {
    pub fn max_per_state_product(&self) -> f64 {
        self.per_state_products.iter().copied().fold(0.0, f64::max)
    }

    pub fn per_state_ceiling(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn within_bound(&self) -> bool {
        self.p_joint <= self.bound + BOUND_TOLERANCE
    }

    pub fn per_state_within_bound(&self) -> bool {
        self.max_per_state_product() <= self.per_state_ceiling() + BOUND_TOLERANCE
    }

    /// |p_joint − p_first·p_cond|, zero when the conditional is undefined.
    pub fn product_residual(&self) -> f64 {
        match self.p_cond {
            Some(p_cond) => (self.p_joint - self.p_first * p_cond).abs(),
            None => self.p_joint.abs(),
        }
    }

    /// Expected preparations per low-cost hit, 1/p_joint.
    pub fn expected_preparations_per_hit(&self) -> Option<f64> {
        (self.p_joint > 0.0).then(|| 1.0 / self.p_joint)
    }
}

pub fn exact_analysis(instance: &CostInstance, config: &RunConfig) -> Result<ExactAnalysis> {
    let state = prepared_state(instance, config)?;
    let n = instance.len();
    let m = instance.count_below(config.c_tol);
    let p_first = state.marginal_probability(Register::Ancilla, 0)?;

    let (p_cond, p_joint, per_state_products) = if p_first > IMPOSSIBLE_THRESHOLD {
        let (_, post) = state.postselect(Register::Ancilla, 0)?;
        let conditional = post.marginal_distribution(Register::Data);
        let p_cond: f64 = (0..n)
            .filter(|&k| instance.is_low_cost(k, config.c_tol))
            .map(|k| conditional.probability(k))
            .sum();
        let products = conditional.probabilities().iter().map(|p| p_first * p).collect();
        (Some(p_cond), p_first * p_cond, products)
    } else {
        let products = (0..n).map(|k| state.amplitude(k, 0).norm_sqr()).collect();
        (None, 0.0, products)
    };

    Ok(ExactAnalysis {
        p_first,
        p_cond,
        p_joint,
        m,
        n,
        bound: m as f64 / n as f64,
        per_state_products,
    })
}

/// p(B)·p(data = k | B) for a single basis state.
pub fn per_state_product(instance: &CostInstance, config: &RunConfig, k: usize) -> Result<f64> {
    instance.cost_of(k)?;
    Ok(exact_analysis(instance, config)?.per_state_products[k])
}

/// p(A & B) computed along the three routes of the chain rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainDecomposition {
    /// Summed straight from the joint distribution.
    pub direct: f64,
    /// p(A|B)·p(B).
    pub via_acceptance: Option<f64>,
    /// p(B|A)·p(A).
    pub via_cost: Option<f64>,
    /// p(A) = M/N.
    pub p_low: f64,
    /// p(B).
    pub p_accept: f64,
    pub p_low_given_accept: Option<f64>,
    pub p_accept_given_low: Option<f64>,
}

impl ChainDecomposition {
    pub fn is_defined(&self) -> bool {
        self.via_acceptance.is_some() && self.via_cost.is_some()
    }

    /// Largest pairwise gap among the defined routes.
    pub fn max_discrepancy(&self) -> f64 {
        let values: Vec<f64> = [Some(self.direct), self.via_acceptance, self.via_cost]
            .into_iter()
            .flatten()
            .collect();
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

pub fn chain_decomposition(instance: &CostInstance, config: &RunConfig) -> Result<ChainDecomposition> {
    let state = prepared_state(instance, config)?;
    let layout = state.layout();
    let low = |k: usize| instance.is_low_cost(k, config.c_tol);

    let joint = state.joint_distribution();
    let direct: f64 = (0..layout.data_dim())
        .filter(|&k| low(k))
        .map(|k| joint.probability(layout.index(k, 0)))
        .sum();

    let p_accept = state.marginal_probability(Register::Ancilla, 0)?;
    let p_low_given_accept = match state.postselect(Register::Ancilla, 0) {
        Ok((_, post)) => Some(
            (0..layout.data_dim())
                .filter(|&k| low(k))
                .map(|k| post.marginal_probability(Register::Data, k))
                .sum::<Result<f64>>()?,
        ),
        Err(Error::ImpossibleOutcome { .. }) => None,
        Err(e) => return Err(e),
    };

    let (p_low, p_accept_given_low) = match state.project_onto(Register::Data, low) {
        Ok((p_low, projected)) => (p_low, Some(projected.marginal_probability(Register::Ancilla, 0)?)),
        Err(Error::ImpossibleOutcome { probability, .. }) => (probability, None),
        Err(e) => return Err(e),
    };

    Ok(ChainDecomposition {
        direct,
        via_acceptance: p_low_given_accept.map(|p| p * p_accept),
        via_cost: p_accept_given_low.map(|p| p * p_low),
        p_low,
        p_accept,
        p_low_given_accept,
        p_accept_given_low,
    })
}

/// Joint (data, ancilla) distribution obtained by reading the ancilla first
/// and then the collapsed data register, indexed like the state.
pub fn sequential_distribution(state: &StateVector) -> Result<OutcomeDistribution> {
    let layout = state.layout();
    let mut probs = vec![0.0; layout.dim()];
    for anc in 0..layout.anc_dim() {
        let p = state.marginal_probability(Register::Ancilla, anc)?;
        if p <= IMPOSSIBLE_THRESHOLD {
            continue;
        }
        let (_, post) = state.postselect(Register::Ancilla, anc)?;
        let conditional = post.marginal_distribution(Register::Data);
        for d in 0..layout.data_dim() {
            probs[layout.index(d, anc)] += p * conditional.probability(d);
        }
    }
    OutcomeDistribution::new(probs)
}

/// Total variation distance between one-shot joint readout and
/// ancilla-then-data readout of the prepared state.
pub fn sequential_vs_joint_check(instance: &CostInstance, config: &RunConfig) -> Result<f64> {
    let state = prepared_state(instance, config)?;
    let sequential = sequential_distribution(&state)?;
    Ok(state.joint_distribution().total_variation(&sequential))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub preparations_used: u64,
    pub accepted_samples: u64,
    pub low_cost_hits: u64,
    /// Preparation (1-based) that produced the first hit.
    pub first_hit_at: Option<u64>,
    pub p_joint_estimate: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub expected_preparations_per_hit: Option<f64>,
}

impl TrialStats {
    fn from_counts(preparations: u64, accepted: u64, hits: u64, first_hit_at: Option<u64>) -> Self {
        let (ci95_low, ci95_high) = wilson_interval(hits, preparations, Z_95);
        Self {
            preparations_used: preparations,
            accepted_samples: accepted,
            low_cost_hits: hits,
            first_hit_at,
            p_joint_estimate: if preparations == 0 {
                0.0
            } else {
                hits as f64 / preparations as f64
            },
            ci95_low,
            ci95_high,
            expected_preparations_per_hit: (hits > 0).then(|| preparations as f64 / hits as f64),
        }
    }

    /// Pools counts from an independent run. The first-hit index of the
    /// merged run counts `self`'s preparations first.
    pub fn merge(&self, other: &TrialStats) -> TrialStats {
        let first = self
            .first_hit_at
            .or(other.first_hit_at.map(|f| f + self.preparations_used));
        Self::from_counts(
            self.preparations_used + other.preparations_used,
            self.accepted_samples + other.accepted_samples,
            self.low_cost_hits + other.low_cost_hits,
            first,
        )
    }

    /// Whether the hit frequency sits inside the `SIGMA_BAND` binomial band
    /// around `p`.
    pub fn consistent_with(&self, p: f64) -> bool {
        let n = self.preparations_used as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        (self.p_joint_estimate - p).abs() <= SIGMA_BAND * sigma
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (low, high)
}

/// Samples the procedure: each preparation reads the ancilla; on `0…0` the
/// data register of the collapsed state is read and scored. Every
/// preparation yields the same pre-measurement state, so it is built once.
pub fn run_repeat_until_success(instance: &CostInstance, config: &RunConfig) -> Result<TrialStats> {
    if config.max_preparations == 0 {
        return Err(Error::config("max_preparations must be at least 1"));
    }
    let state = prepared_state(instance, config)?;
    let ancilla = state.marginal_distribution(Register::Ancilla).sampler();
    let data = accepted_data_sampler(&state)?;

    let mut rng = rng_from_seed(config.seed);
    let (mut accepted, mut hits, mut first_hit_at) = (0u64, 0u64, None);
    let mut used = 0u64;
    while used < config.max_preparations {
        used += 1;
        if ancilla.sample(&mut rng) != 0 {
            continue;
        }
        accepted += 1;
        let Some(data) = &data else { continue };
        if instance.is_low_cost(data.sample(&mut rng), config.c_tol) {
            hits += 1;
            first_hit_at.get_or_insert(used);
            if config.stop == StopRule::FirstHit {
                break;
            }
        }
    }
    Ok(TrialStats::from_counts(used, accepted, hits, first_hit_at))
}

fn accepted_data_sampler(state: &StateVector) -> Result<Option<Sampler>> {
    match state.postselect(Register::Ancilla, 0) {
        Ok((_, post)) => Ok(Some(post.marginal_distribution(Register::Data).sampler())),
        // Below the threshold the ancilla may still read 0 with a vanishing
        // probability; fall back to the unrenormalized slice.
        Err(Error::ImpossibleOutcome { .. }) => {
            let weights: Vec<f64> = (0..state.layout().data_dim())
                .map(|k| state.amplitude(k, 0).norm_sqr())
                .collect();
            let total: f64 = weights.iter().sum();
            if total == 0.0 {
                return Ok(None);
            }
            let normalized = weights.into_iter().map(|w| w / total).collect();
            Ok(Some(OutcomeDistribution::new(normalized)?.sampler()))
        }
        Err(e) => Err(e),
    }
}
