//! The decision process binding environment and cluster: state encoding,
//! action semantics, the reward model, and the one-step transition.

use crate::cluster::{ClusterState, ClusterTopology, FnId};
use crate::environment::{TaskRequest, U_MAX};
use crate::error::{Error, Result};

/// Controller decision for one request: execute it at an FN, or refer it
/// to the cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Serve(FnId),
    Reject,
}

impl Action {
    pub fn is_serve(&self) -> bool {
        matches!(self, Action::Serve(_))
    }

    /// Position of this action in a Q-value vector of length k+1: serve
    /// actions occupy 0..k in FN order, reject sits at k.
    pub fn index(&self, k: usize) -> usize {
        match *self {
            Action::Serve(f) => {
                debug_assert!((1..=k).contains(&f));
                f - 1
            }
            Action::Reject => k,
        }
    }

    pub fn from_index(index: usize, k: usize) -> Action {
        debug_assert!(index <= k);
        if index < k {
            Action::Serve(index + 1)
        } else {
            Action::Reject
        }
    }
}

/// How state components are scaled before they reach an agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Raw counts and indices.
    Raw,
    /// Every component divided by its static maximum so it lies in [0,1]:
    /// b_i by N_i, l_i by N_i*h_max, the primary index by k, u by u_max,
    /// c by c_max, h by h_max.
    Unit { c_max: u32, h_max: u32 },
}

/// Builds the numeric state (b_1, l_1, ..., b_k, l_k, primary, u, c, h)
/// of length 2k+4.
pub fn encode_state(
    cluster: &ClusterState,
    topo: &ClusterTopology,
    req: &TaskRequest,
    norm: Normalization,
) -> Vec<f64> {
    let k = topo.k();
    let mut out = Vec::with_capacity(2 * k + 4);
    match norm {
        Normalization::Raw => {
            for f in 1..=k {
                out.push(cluster.busy_blocks(f) as f64);
                out.push(cluster.existing_load(f) as f64);
            }
            out.push(req.primary_fn as f64);
            out.push(req.u as f64);
            out.push(req.c as f64);
            out.push(req.h as f64);
        }
        Normalization::Unit { c_max, h_max } => {
            for f in 1..=k {
                let cap = topo.capacity(f) as f64;
                out.push(cluster.busy_blocks(f) as f64 / cap);
                out.push(cluster.existing_load(f) as f64 / (cap * h_max as f64));
            }
            out.push(req.primary_fn as f64 / k as f64);
            out.push(req.u as f64 / U_MAX as f64);
            out.push(req.c as f64 / c_max as f64);
            out.push(req.h as f64 / h_max as f64);
        }
    }
    out
}

/// The six reward constants plus the optional load bonus. The load bonus
/// rewards handling light tasks: r_L = c_max*h_max + 1 - c*h, added on
/// serve and subtracted on reject.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSystem {
    pub serve_high: f64,
    pub serve_low: f64,
    pub reject_high: f64,
    pub reject_low: f64,
    pub busy_high: f64,
    pub busy_low: f64,
    /// None disables the load bonus; Some holds (c_max, h_max).
    pub load_bonus: Option<(u32, u32)>,
    /// Utility threshold: u >= high_utility marks a high-utility request.
    pub high_utility: u32,
}

impl RewardSystem {
    /// Scenario-1 rewards: GoS-heavy. Rejecting low-utility work is mildly
    /// rewarded, serving it mildly penalized, and the load bonus applies.
    pub fn r1(c_max: u32, h_max: u32) -> Self {
        Self {
            serve_high: 24.0,
            serve_low: -3.0,
            reject_high: -12.0,
            reject_low: 3.0,
            busy_high: -12.0,
            busy_low: 12.0,
            load_bonus: Some((c_max, h_max)),
            high_utility: 8,
        }
    }

    /// Scenario-2 rewards: balanced GoS/utilization.
    pub fn r2(c_max: u32, h_max: u32) -> Self {
        Self {
            serve_high: 24.0,
            serve_low: 0.0,
            reject_high: -12.0,
            reject_low: 0.0,
            busy_high: -12.0,
            busy_low: 12.0,
            load_bonus: Some((c_max, h_max)),
            high_utility: 8,
        }
    }

    /// Scenario-3 rewards: utilization-heavy, no load bonus.
    pub fn r3() -> Self {
        Self {
            serve_high: 50.0,
            serve_low: 50.0,
            reject_high: -50.0,
            reject_low: -50.0,
            busy_high: -50.0,
            busy_low: -25.0,
            load_bonus: None,
            high_utility: 8,
        }
    }

    pub fn scenario(n: u8, c_max: u32, h_max: u32) -> Result<Self> {
        match n {
            1 => Ok(Self::r1(c_max, h_max)),
            2 => Ok(Self::r2(c_max, h_max)),
            3 => Ok(Self::r3()),
            other => Err(Error::Config(format!("unknown reward scenario {other}"))),
        }
    }

    pub fn is_high_utility(&self, u: u32) -> bool {
        u >= self.high_utility
    }

    fn load_bonus_value(&self, req: &TaskRequest) -> f64 {
        match self.load_bonus {
            Some((c_max, h_max)) => {
                (c_max as u64 * h_max as u64 + 1) as f64 - req.load() as f64
            }
            None => 0.0,
        }
    }

    /// Immediate reward for taking `action` on `req`. `forced_busy` marks
    /// a rejection with no feasible server, which draws the busy-branch
    /// constants; it is only meaningful with `Action::Reject`.
    pub fn compute(&self, action: Action, req: &TaskRequest, forced_busy: bool) -> f64 {
        debug_assert!(
            !forced_busy || action == Action::Reject,
            "forced_busy implies a reject action"
        );
        let high = self.is_high_utility(req.u);
        let base = match (action, forced_busy, high) {
            (Action::Serve(_), _, true) => self.serve_high,
            (Action::Serve(_), _, false) => self.serve_low,
            (Action::Reject, false, true) => self.reject_high,
            (Action::Reject, false, false) => self.reject_low,
            (Action::Reject, true, true) => self.busy_high,
            (Action::Reject, true, false) => self.busy_low,
        };
        let bonus = self.load_bonus_value(req);
        match action {
            Action::Serve(_) => base + bonus,
            Action::Reject => base - bonus,
        }
    }
}

/// One recorded interaction, as stored in replay memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action_index: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Result of applying an action: the reward, whether the rejection was
/// forced by saturation, and the utilization measured after the action
/// but before time advanced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub forced_busy: bool,
    pub mid_utilization: f64,
}

/// Applies `action` to the cluster (allocating on serve), without
/// advancing time. Serving outside the feasible set is a contract
/// violation and leaves the state untouched.
pub fn apply_action(
    cluster: &mut ClusterState,
    topo: &ClusterTopology,
    req: &TaskRequest,
    action: Action,
    rewards: &RewardSystem,
) -> Result<StepOutcome> {
    let feasible = cluster.feasible_serve_set(topo, req);
    let forced_busy = feasible.is_empty();
    match action {
        Action::Serve(f) => {
            if !feasible.contains(&f) {
                return Err(Error::Contract(format!(
                    "serve action {f} outside feasible set {feasible:?}"
                )));
            }
            cluster.allocate(topo, f, req)?;
        }
        Action::Reject => {}
    }
    let reward = rewards.compute(action, req, forced_busy);
    Ok(StepOutcome { reward, forced_busy, mid_utilization: cluster.utilization(topo) })
}

/// Full one-step transition: apply the action, then advance time.
pub fn step(
    cluster: &mut ClusterState,
    topo: &ClusterTopology,
    req: &TaskRequest,
    action: Action,
    rewards: &RewardSystem,
) -> Result<StepOutcome> {
    let outcome = apply_action(cluster, topo, req, action, rewards)?;
    cluster.tick();
    Ok(outcome)
}
