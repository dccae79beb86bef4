//! Dense pure-state simulation of a data register paired with an ancilla
//! register.
//!
//! Amplitudes are stored in a single array indexed by
//! `(data_index << n_anc) | anc_index`, so fixing the ancilla outcome selects
//! a strided slice and fixing the data outcome selects a contiguous block.
//!
//! Sampling uses [`ChaCha8Rng`] seeded with `seed_from_u64`. The ChaCha stream
//! is specified independently of the host platform, so a seed reproduces the
//! same outcomes everywhere.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default upper bound on `n_data + n_anc`.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Probabilities at or below this value are treated as impossible outcomes.
pub const IMPOSSIBLE_THRESHOLD: f64 = 1e-12;

/// Tolerance on the L2 norm of a valid state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Seedable generator used for every sampled measurement in the crate.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    n_data: usize,
    n_anc: usize,
}

impl RegisterLayout {
    pub fn new(n_data: usize, n_anc: usize) -> Result<Self> {
        Self::with_cap(n_data, n_anc, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(n_data: usize, n_anc: usize, cap: usize) -> Result<Self> {
        if n_data == 0 {
            return Err(Error::config("data register needs at least one qubit"));
        }
        if n_anc == 0 {
            return Err(Error::config("ancilla register needs at least one qubit"));
        }
        let requested = n_data + n_anc;
        if requested > cap {
            return Err(Error::Capacity { requested, cap });
        }
        Ok(Self { n_data, n_anc })
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn n_anc(&self) -> usize {
        self.n_anc
    }

    /// Number of data basis states, N.
    pub fn data_dim(&self) -> usize {
        1 << self.n_data
    }

    pub fn anc_dim(&self) -> usize {
        1 << self.n_anc
    }

    pub fn dim(&self) -> usize {
        1 << (self.n_data + self.n_anc)
    }

    pub fn register_dim(&self, register: Register) -> usize {
        match register {
            Register::Data => self.data_dim(),
            Register::Ancilla => self.anc_dim(),
        }
    }

    #[inline]
    pub fn index(&self, data: usize, anc: usize) -> usize {
        (data << self.n_anc) | anc
    }

    #[inline]
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index >> self.n_anc, index & (self.anc_dim() - 1))
    }

    #[inline]
    fn outcome_of(&self, register: Register, index: usize) -> usize {
        let (data, anc) = self.split(index);
        match register {
            Register::Data => data,
            Register::Ancilla => anc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Register {
    Data,
    Ancilla,
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Register::Data => f.write_str("data"),
            Register::Ancilla => f.write_str("ancilla"),
        }
    }
}

/// What a sampled measurement reads out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureTarget {
    Data,
    Ancilla,
    /// Both registers at once; the outcome is the composite index.
    Both,
}

/// Probability of each outcome of a register, indexed by outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("empty outcome distribution"));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, &p)| !p.is_finite() || p < -1e-15)
        {
            return Err(Error::domain(format!("outcome {i} has invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Half the L1 distance; outcomes missing from the shorter side count as 0.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        let len = self.len().max(other.len());
        0.5 * (0..len)
            .map(|i| (self.probability(i) - other.probability(i)).abs())
            .sum::<f64>()
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(&self.probs)
    }
}

/// Inverse-CDF sampler over a fixed discrete distribution.
#[derive(Clone, Debug)]
pub struct Sampler {
    cdf: Vec<f64>,
    last_supported: usize,
}

impl Sampler {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|&p| {
                acc += p.max(0.0);
                acc
            })
            .collect();
        let last_supported = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cdf, last_supported }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("non-empty distribution");
        let u = rng.gen::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_supported)
    }
}

/// Normalized pure state over a [`RegisterLayout`]. Values are immutable once
/// built; every operation returns a new state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from explicit amplitudes, checking length and norm.
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::domain(format!(
                "expected {} amplitudes, got {}",
                layout.dim(),
                amplitudes.len()
            )));
        }
        let state = Self { layout, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub(crate) fn from_raw(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), layout.dim());
        Self { layout, amplitudes }
    }

    /// Equal weight 1/√N on every `|k, 0…0⟩`, nothing on other ancilla values.
    pub fn uniform_superposition(layout: RegisterLayout) -> Self {
        let weight = Complex64::new(1.0 / (layout.data_dim() as f64).sqrt(), 0.0);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dim()];
        for k in 0..layout.data_dim() {
            amplitudes[layout.index(k, 0)] = weight;
        }
        Self { layout, amplitudes }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, data: usize, anc: usize) -> Complex64 {
        self.amplitudes[self.layout.index(data, anc)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_outcome(&self, register: Register, outcome: usize) -> Result<()> {
        let dim = self.layout.register_dim(register);
        if outcome >= dim {
            return Err(Error::domain(format!(
                "{register} outcome {outcome} out of range (dimension {dim})"
            )));
        }
        Ok(())
    }

    /// Probability that measuring `register` alone yields `outcome`.
    pub fn marginal_probability(&self, register: Register, outcome: usize) -> Result<f64> {
        self.check_outcome(register, outcome)?;
        let p = match register {
            Register::Ancilla => (0..self.layout.data_dim())
                .map(|d| self.amplitude(d, outcome).norm_sqr())
                .sum(),
            Register::Data => {
                let start = self.layout.index(outcome, 0);
                self.amplitudes[start..start + self.layout.anc_dim()]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum()
            }
        };
        Ok(p)
    }

    pub fn marginal_distribution(&self, register: Register) -> OutcomeDistribution {
        let mut probs = vec![0.0; self.layout.register_dim(register)];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[self.layout.outcome_of(register, i)] += a.norm_sqr();
        }
        OutcomeDistribution { probs }
    }

    /// Born-rule distribution over composite indices.
    pub fn joint_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            probs: self.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    /// Conditions on `register` reading `outcome`. Returns the probability of
    /// that outcome and the collapsed, renormalized state.
    pub fn postselect(&self, register: Register, outcome: usize) -> Result<(f64, StateVector)> {
        self.check_outcome(register, outcome)?;
        self.project_onto(register, |o| o == outcome)
            .map_err(|e| match e {
                Error::ImpossibleOutcome { probability, .. } => Error::ImpossibleOutcome {
                    outcome: format!("{register}={outcome}"),
                    probability,
                },
                other => other,
            })
    }

    /// Conditions on `register` reading any outcome accepted by `keep`.
    pub fn project_onto<F>(&self, register: Register, keep: F) -> Result<(f64, StateVector)>
    where
        F: Fn(usize) -> bool,
    {
        let mut amplitudes = self.amplitudes.clone();
        let mut probability = 0.0;
        for (i, a) in amplitudes.iter_mut().enumerate() {
            if keep(self.layout.outcome_of(register, i)) {
                probability += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if probability <= IMPOSSIBLE_THRESHOLD {
            return Err(Error::ImpossibleOutcome {
                outcome: format!("{register} subset"),
                probability,
            });
        }
        let scale = 1.0 / probability.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok((probability, Self::from_raw(self.layout, amplitudes)))
    }

    pub fn distribution_for(&self, target: MeasureTarget) -> OutcomeDistribution {
        match target {
            MeasureTarget::Data => self.marginal_distribution(Register::Data),
            MeasureTarget::Ancilla => self.marginal_distribution(Register::Ancilla),
            MeasureTarget::Both => self.joint_distribution(),
        }
    }

    /// Draws one measurement outcome with a fresh generator seeded by `seed`.
    pub fn sample_measurement(&self, target: MeasureTarget, seed: u64) -> usize {
        let mut rng = rng_from_seed(seed);
        self.sample_with(target, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, target: MeasureTarget, rng: &mut R) -> usize {
        self.distribution_for(target).sampler().sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn layout(n_data: usize, n_anc: usize) -> RegisterLayout {
        RegisterLayout::new(n_data, n_anc).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn uniform_two_data_one_ancilla() {
        let s = StateVector::uniform_superposition(layout(2, 1));
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expected = if i % 2 == 0 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(a.re, expected, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn uniform_one_data_one_ancilla() {
        let s = StateVector::uniform_superposition(layout(1, 1));
        let re: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        assert_abs_diff_eq!(
            re.as_slice(),
            [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0].as_slice(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn uniform_twelve_qubits_is_normalized() {
        let s = StateVector::uniform_superposition(layout(12, 2));
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn layout_limits() {
        assert!(matches!(
            RegisterLayout::new(20, 5),
            Err(Error::Capacity {
                requested: 25,
                cap: 24
            })
        ));
        assert!(RegisterLayout::new(0, 1).is_err());
        assert!(RegisterLayout::new(1, 0).is_err());
        assert!(RegisterLayout::new(22, 2).is_ok());
    }

    #[test]
    fn index_convention() {
        let l = layout(3, 2);
        assert_eq!(l.index(5, 3), 0b10111);
        assert_eq!(l.split(0b10111), (5, 3));
    }

    #[test]
    fn marginals_of_uniform() {
        let s = StateVector::uniform_superposition(layout(2, 1));
        assert_abs_diff_eq!(
            s.marginal_probability(Register::Ancilla, 0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            s.marginal_probability(Register::Data, 3).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert!(matches!(
            s.marginal_probability(Register::Data, 4),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            s.marginal_probability(Register::Ancilla, 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn postselect_certain_and_impossible() {
        let s = StateVector::uniform_superposition(layout(2, 1));
        let (p, post) = s.postselect(Register::Ancilla, 0).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
        for (a, b) in post.amplitudes().iter().zip(s.amplitudes()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-15);
        }
        assert!(matches!(
            s.postselect(Register::Ancilla, 1),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn postselect_renormalizes() {
        let l = layout(1, 1);
        let s = StateVector::from_amplitudes(l, vec![c(0.5), c(0.5), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
        let (p, post) = s.postselect(Register::Ancilla, 0).unwrap();
        assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(post.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            post.marginal_probability(Register::Data, 0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn joint_of_uniform() {
        let s = StateVector::uniform_superposition(layout(1, 1));
        let j = s.joint_distribution();
        assert_abs_diff_eq!(
            j.probabilities(),
            [0.5, 0.0, 0.5, 0.0].as_slice(),
            epsilon = 1e-15
        );
        assert!(OutcomeDistribution::new(j.probabilities().to_vec()).is_ok());
    }

    #[test]
    fn from_amplitudes_rejects_bad_input() {
        let l = layout(1, 1);
        assert!(StateVector::from_amplitudes(l, vec![c(1.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(l, vec![c(1.0); 4]).is_err());
    }

    #[test]
    fn outcome_distribution_validation() {
        assert!(OutcomeDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(OutcomeDistribution::new(vec![1.1, -0.1]).is_err());
        assert!(OutcomeDistribution::new(vec![]).is_err());
        assert!(OutcomeDistribution::new(vec![1.0, -1e-16]).is_ok());
    }

    #[test]
    fn sampling_point_mass() {
        let l = layout(3, 1);
        let mut amps = vec![c(0.0); l.dim()];
        amps[l.index(5, 0)] = c(1.0);
        let s = StateVector::from_amplitudes(l, amps).unwrap();
        for seed in 0..50 {
            assert_eq!(s.sample_measurement(MeasureTarget::Data, seed), 5);
            assert_eq!(s.sample_measurement(MeasureTarget::Ancilla, seed), 0);
            assert_eq!(s.sample_measurement(MeasureTarget::Both, seed), l.index(5, 0));
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = StateVector::uniform_superposition(layout(4, 1));
        for seed in [0u64, 1, 42, u64::MAX] {
            assert_eq!(
                s.sample_measurement(MeasureTarget::Data, seed),
                s.sample_measurement(MeasureTarget::Data, seed)
            );
        }
    }

    #[test]
    fn sampled_frequencies_match_uniform() {
        let s = StateVector::uniform_superposition(layout(2, 1));
        let sampler = s.distribution_for(MeasureTarget::Data).sampler();
        let mut rng = rng_from_seed(2024);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sampler.sample(&mut rng)] += 1;
        }
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for count in counts {
            let freq = count as f64 / n as f64;
            assert!((freq - 0.25).abs() <= 5.0 * sigma, "frequency {freq}");
        }
    }

    #[test]
    fn sampler_never_returns_zero_probability_outcome() {
        let d = OutcomeDistribution::new(vec![0.0, 0.3, 0.0, 0.7, 0.0]).unwrap();
        let sampler = d.sampler();
        let mut rng = rng_from_seed(9);
        for _ in 0..10_000 {
            let o = sampler.sample(&mut rng);
            assert!(o == 1 || o == 3);
        }
    }
}
