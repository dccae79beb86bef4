//! Every bound and identity check for one (instance, configuration) pair.

use serde::Serialize;

use crate::algorithm::{
    chain_decomposition, exact_analysis, sequential_vs_joint_check, ChainDecomposition, ExactAnalysis,
    RunConfig, IDENTITY_TOLERANCE, TV_TOLERANCE,
};
use crate::costfn::CostInstance;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Checks {
    /// p_joint ≤ M/N.
    pub bound: bool,
    /// max_k p_first·p(k|0…0) ≤ 1/N.
    pub per_state: bool,
    /// p_joint = p_first·p_cond.
    pub product: bool,
    /// The chain-rule routes agree.
    pub chain: bool,
    /// Sequential and joint readout agree.
    pub sequential: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.bound && self.per_state && self.product && self.chain && self.sequential
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.bound, "bound"),
            (self.per_state, "per_state"),
            (self.product, "product"),
            (self.chain, "chain"),
            (self.sequential, "sequential"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub analysis: ExactAnalysis,
    pub chain: ChainDecomposition,
    pub tv_distance: f64,
    pub checks: Checks,
}

pub fn verify(instance: &CostInstance, config: &RunConfig) -> Result<Verification> {
    let analysis = exact_analysis(instance, config)?;
    let chain = chain_decomposition(instance, config)?;
    let tv_distance = sequential_vs_joint_check(instance, config)?;
    let checks = Checks {
        bound: analysis.within_bound(),
        per_state: analysis.per_state_within_bound(),
        product: analysis.product_residual() <= IDENTITY_TOLERANCE,
        chain: chain.max_discrepancy() <= IDENTITY_TOLERANCE,
        sequential: tv_distance <= TV_TOLERANCE,
    };
    Ok(Verification {
        analysis,
        chain,
        tv_distance,
        checks,
    })
}
