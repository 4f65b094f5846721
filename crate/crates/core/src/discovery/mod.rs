//! Traces, directly-follows graphs and the two miners.

mod dfg;
mod dot;
mod heuristics;
mod inductive;
mod petri;
mod traces;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cancel::Cancelled;

pub use dfg::{build_dfg, Dfg};
pub use dot::{dfg_to_dot, net_to_dot};
pub use heuristics::{mine_heuristics, mine_heuristics_cancellable};
pub use inductive::{mine_inductive, mine_inductive_cancellable};
pub use petri::{PetriNet, PlaceId, Transition, TransitionId};
pub use traces::{build_traces, TraceError, TraceLog};
pub use tree::{tree_to_net, ProcessTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinerParams {
    pub im_noise_threshold: f64,
    pub hm_dependency_threshold: f64,
    pub hm_and_threshold: f64,
    pub hm_min_act_count: usize,
    pub hm_min_dfg_count: usize,
    pub hm_preclean_noise: f64,
    pub hm_loop_two_threshold: usize,
}

impl Default for MinerParams {
    fn default() -> Self {
        Self {
            im_noise_threshold: 0.2,
            hm_dependency_threshold: 0.5,
            hm_and_threshold: 0.65,
            hm_min_act_count: 1,
            hm_min_dfg_count: 1,
            hm_preclean_noise: 0.05,
            hm_loop_two_threshold: 2,
        }
    }
}

impl MinerParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("im_noise_threshold", self.im_noise_threshold),
            ("hm_dependency_threshold", self.hm_dependency_threshold),
            ("hm_and_threshold", self.hm_and_threshold),
            ("hm_preclean_noise", self.hm_preclean_noise),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinerKind {
    Hm,
    Im,
}

impl MinerKind {
    pub fn name(self) -> &'static str {
        match self {
            MinerKind::Hm => "hm",
            MinerKind::Im => "im",
        }
    }
}

impl fmt::Display for MinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MinerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hm" => Ok(MinerKind::Hm),
            "im" => Ok(MinerKind::Im),
            other => Err(format!("unknown miner {other:?} (expected hm or im)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiningError {
    #[error("empty model: no activity survives filtering")]
    EmptyModel,
    #[error(transparent)]
    Cancelled(#[from] Cancelled),
}
