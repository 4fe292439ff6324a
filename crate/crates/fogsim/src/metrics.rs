//! KPI accounting: grade of service, edge utilization, cloud avoidance,
//! and the weighted performance score.

use crate::cluster::{ClusterState, ClusterTopology};
use crate::environment::TaskRequest;
use crate::error::{Error, Result};
use crate::mdp::Action;

/// Relative weights of GoS and utilization in the performance score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioWeights {
    pub gos: f64,
    pub utilization: f64,
}

impl ScenarioWeights {
    pub fn new(gos: f64, utilization: f64) -> Result<Self> {
        if gos < 0.0 || utilization < 0.0 || (gos + utilization - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "performance weights must be nonnegative and sum to 1, got ({gos}, {utilization})"
            )));
        }
        Ok(Self { gos, utilization })
    }

    /// The weight pairs used by scenarios 1..3.
    pub fn scenario(n: u8) -> Result<Self> {
        match n {
            1 => Self::new(0.7, 0.3),
            2 => Self::new(0.5, 0.5),
            3 => Self::new(0.3, 0.7),
            other => Err(Error::Config(format!("unknown scenario {other}"))),
        }
    }
}

/// Running counters over a stretch of steps. High/low utility received
/// and served counts, plus the per-step utilization accumulator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KpiCounters {
    pub served_high: u64,
    pub received_high: u64,
    pub served_low: u64,
    pub received_low: u64,
    pub utilization_sum: f64,
    pub steps: u64,
    last_step: Option<u64>,
}

/// Final KPI values for a stretch of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpiReport {
    pub gos: f64,
    pub utilization: f64,
    pub cloud_avoidance: f64,
    pub performance: f64,
}

impl KpiCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one step. Must be called exactly once per time step, after
    /// the action was applied and before the cluster ticks.
    pub fn record_step(
        &mut self,
        req: &TaskRequest,
        action: Action,
        cluster: &ClusterState,
        topo: &ClusterTopology,
        high_utility: u32,
    ) {
        debug_assert!(
            self.last_step != Some(req.t),
            "record_step called twice for step {}",
            req.t
        );
        self.last_step = Some(req.t);
        let served = action.is_serve();
        if req.u >= high_utility {
            self.received_high += 1;
            if served {
                self.served_high += 1;
            }
        } else {
            self.received_low += 1;
            if served {
                self.served_low += 1;
            }
        }
        self.utilization_sum += cluster.utilization(topo);
        self.steps += 1;
    }

    /// Folds another counter block into this one.
    pub fn merge(&mut self, other: &KpiCounters) {
        self.served_high += other.served_high;
        self.received_high += other.received_high;
        self.served_low += other.served_low;
        self.received_low += other.received_low;
        self.utilization_sum += other.utilization_sum;
        self.steps += other.steps;
    }

    /// GoS = served/received high-utility requests; vacuously 1 when no
    /// high-utility request arrived. Same convention for cloud avoidance
    /// on an empty stretch.
    pub fn finalize(&self, weights: ScenarioWeights) -> KpiReport {
        let gos = if self.received_high == 0 {
            1.0
        } else {
            self.served_high as f64 / self.received_high as f64
        };
        let utilization = if self.steps == 0 {
            0.0
        } else {
            self.utilization_sum / self.steps as f64
        };
        let received = self.received_high + self.received_low;
        let cloud_avoidance = if received == 0 {
            1.0
        } else {
            (self.served_high + self.served_low) as f64 / received as f64
        };
        let performance = weights.gos * gos + weights.utilization * utilization;
        KpiReport { gos, utilization, cloud_avoidance, performance }
    }
}
