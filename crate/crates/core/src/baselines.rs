//! Reference strategies: uniform random sampling, steepest-descent hill
//! climbing over single-bit flips, and amplitude amplification with an ideal
//! threshold oracle on the data register.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::costfn::CostInstance;
use crate::error::{Error, Result};
use crate::statevec::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub strategy: String,
    /// Cost evaluations spent, up to and including the first hit.
    pub trials_used: u64,
    pub best_index: usize,
    pub best_cost: f64,
    pub hit: bool,
}

struct Tracker<'a> {
    instance: &'a CostInstance,
    c_tol: f64,
    trials: u64,
    best: (usize, f64),
}

impl<'a> Tracker<'a> {
    fn new(instance: &'a CostInstance, c_tol: f64) -> Self {
        Self {
            instance,
            c_tol,
            trials: 0,
            best: (usize::MAX, f64::INFINITY),
        }
    }

    /// Evaluates `k`, returning its cost.
    fn eval(&mut self, k: usize) -> f64 {
        let c = self.instance.costs()[k];
        self.trials += 1;
        if c < self.best.1 || (c == self.best.1 && k < self.best.0) {
            self.best = (k, c);
        }
        c
    }

    fn hit(&self) -> bool {
        self.best.1 < self.c_tol
    }

    fn finish(self, strategy: &str) -> SearchResult {
        SearchResult {
            strategy: strategy.to_string(),
            trials_used: self.trials,
            best_index: self.best.0,
            best_cost: self.best.1,
            hit: self.hit(),
        }
    }
}

/// Draws indices uniformly with replacement until one is below `c_tol` or
/// `max_trials` draws have been made. The trial count to first hit is
/// geometric with mean N/M.
pub fn random_search(
    instance: &CostInstance,
    c_tol: f64,
    seed: u64,
    max_trials: u64,
) -> Result<SearchResult> {
    if max_trials == 0 {
        return Err(Error::config("max_trials must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut tracker = Tracker::new(instance, c_tol);
    for _ in 0..max_trials {
        let k = rng.gen_range(0..instance.len());
        if tracker.eval(k) < c_tol {
            break;
        }
    }
    Ok(tracker.finish("random"))
}

/// Outcome of one steepest descent from a fixed start.
#[derive(Clone, Debug, PartialEq)]
pub struct Descent {
    pub end: usize,
    pub moves: usize,
}

/// Moves to the strictly-best single-bit-flip neighbour until none improves.
/// Ties go to the lowest bit index.
pub fn local_descent(instance: &CostInstance, start: usize) -> Result<Descent> {
    instance.cost_of(start)?;
    let costs = instance.costs();
    let mut current = start;
    let mut moves = 0;
    loop {
        let next = steepest_neighbour(costs, instance.n_data(), current);
        match next {
            Some(k) => {
                current = k;
                moves += 1;
            }
            None => return Ok(Descent { end: current, moves }),
        }
    }
}

fn steepest_neighbour(costs: &[f64], n_data: usize, k: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for bit in 0..n_data {
        let nb = k ^ (1 << bit);
        let c = costs[nb];
        if c < costs[k] && best.is_none_or(|(_, bc)| c < bc) {
            best = Some((nb, c));
        }
    }
    best.map(|(nb, _)| nb)
}

/// Random-restart steepest descent. Each restart draws a uniform start; the
/// search ends as soon as any evaluated state is below `c_tol`, or after
/// `max_restarts` descents.
pub fn hill_climb(instance: &CostInstance, c_tol: f64, seed: u64, max_restarts: u64) -> Result<SearchResult> {
    if max_restarts == 0 {
        return Err(Error::config("max_restarts must be at least 1"));
    }
    let n_data = instance.n_data();
    let mut rng = rng_from_seed(seed);
    let mut tracker = Tracker::new(instance, c_tol);
    'restarts: for _ in 0..max_restarts {
        let mut current = rng.gen_range(0..instance.len());
        let mut current_cost = tracker.eval(current);
        if current_cost < c_tol {
            break;
        }
        loop {
            let mut best: Option<(usize, f64)> = None;
            for bit in 0..n_data {
                let nb = current ^ (1 << bit);
                let c = tracker.eval(nb);
                if c < c_tol {
                    break 'restarts;
                }
                if c < current_cost && best.is_none_or(|(_, bc)| c < bc) {
                    best = Some((nb, c));
                }
            }
            match best {
                Some((nb, c)) => {
                    current = nb;
                    current_cost = c;
                }
                None => break,
            }
        }
    }
    Ok(tracker.finish("hillclimb"))
}

fn grover_angle(n: usize, m: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::domain(format!("need 1 <= M <= N, got M = {m}, N = {n}")));
    }
    Ok((m as f64 / n as f64).sqrt().asin())
}

/// sin²((2t+1)θ) with θ = arcsin(√(M/N)).
pub fn amplitude_amplification_success(n_data: usize, m: usize, iterations: u64) -> Result<f64> {
    let theta = grover_angle(1 << n_data, m)?;
    Ok(((2 * iterations + 1) as f64 * theta).sin().powi(2))
}

/// round(π/(4θ) − 1/2), never negative.
pub fn optimal_iterations(n_data: usize, m: usize) -> Result<u64> {
    let theta = grover_angle(1 << n_data, m)?;
    Ok((std::f64::consts::FRAC_PI_4 / theta - 0.5).round().max(0.0) as u64)
}

/// Exact state vector over the data register under oracle + diffusion
/// iterations.
#[derive(Clone, Debug)]
pub struct GroverState {
    amplitudes: Vec<Complex64>,
    marked: Vec<bool>,
}

impl GroverState {
    pub fn new(instance: &CostInstance, c_tol: f64) -> Result<Self> {
        let marked: Vec<bool> = instance.costs().iter().map(|&c| c < c_tol).collect();
        if !marked.iter().any(|&m| m) {
            return Err(Error::domain(format!("no state has cost below {c_tol}")));
        }
        let n = marked.len();
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Ok(Self {
            amplitudes: vec![amp; n],
            marked,
        })
    }

    /// Phase-flips marked states, then reflects about the uniform state.
    pub fn iterate(&mut self) {
        for (a, &m) in self.amplitudes.iter_mut().zip(&self.marked) {
            if m {
                *a = -*a;
            }
        }
        let mean = self.amplitudes.iter().sum::<Complex64>() / self.amplitudes.len() as f64;
        for a in &mut self.amplitudes {
            *a = 2.0 * mean - *a;
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn marked_probability(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.marked)
            .filter(|(_, &m)| m)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }
}

/// Probability mass on low-cost states after `iterations` rounds.
pub fn grover_simulate(instance: &CostInstance, c_tol: f64, iterations: u64) -> Result<f64> {
    let mut state = GroverState::new(instance, c_tol)?;
    for _ in 0..iterations {
        state.iterate();
    }
    Ok(state.marked_probability())
}
