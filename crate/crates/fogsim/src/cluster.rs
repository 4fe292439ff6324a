//! Edge-cluster state: per-FN resource occupancy with remaining holding
//! times, neighbor topology, allocation/release, and feasibility queries.

use crate::environment::TaskRequest;
use crate::error::{Error, Result};

/// 1-based fog-node index within a cluster.
pub type FnId = usize;

/// Static cluster wiring: capacities, neighbor lists, and which FN acts
/// as the edge controller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterTopology {
    capacities: Vec<u32>,
    neighbors: Vec<Vec<FnId>>,
    ec_index: FnId,
}

impl ClusterTopology {
    /// Neighbor lists are per-FN and need not be symmetric, but every
    /// referenced index must exist and no FN may neighbor itself.
    pub fn new(capacities: Vec<u32>, neighbors: Vec<Vec<FnId>>, ec_index: FnId) -> Result<Self> {
        let k = capacities.len();
        if k == 0 {
            return Err(Error::Config("cluster must have at least one FN".into()));
        }
        if capacities.iter().any(|&n| n < 1) {
            return Err(Error::Config("every FN capacity must be >= 1".into()));
        }
        if neighbors.len() != k {
            return Err(Error::Config(format!(
                "expected {k} neighbor lists, got {}",
                neighbors.len()
            )));
        }
        for (i, list) in neighbors.iter().enumerate() {
            let own = i + 1;
            let mut seen = std::collections::HashSet::new();
            for &nb in list {
                if nb < 1 || nb > k {
                    return Err(Error::Config(format!("FN {own} references invalid neighbor {nb}")));
                }
                if nb == own {
                    return Err(Error::Config(format!("FN {own} cannot neighbor itself")));
                }
                if !seen.insert(nb) {
                    return Err(Error::Config(format!("FN {own} lists neighbor {nb} twice")));
                }
            }
        }
        if ec_index < 1 || ec_index > k {
            return Err(Error::Config(format!("EC index {ec_index} out of range 1..={k}")));
        }
        Ok(Self { capacities, neighbors, ec_index })
    }

    /// The seven-FN hexagonal cluster: FN 5 is the central node (and EC),
    /// adjacent to all others; the ring 1-2-3-4-6-7 wraps around it.
    pub fn hex7(capacity: u32) -> Self {
        Self::new(
            vec![capacity; 7],
            vec![
                vec![2, 5, 7],
                vec![1, 3, 5],
                vec![2, 4, 5],
                vec![3, 5, 6],
                vec![1, 2, 3, 4, 6, 7],
                vec![4, 5, 7],
                vec![1, 5, 6],
            ],
            5,
        )
        .expect("hex7 topology is valid")
    }

    /// A standalone FN with no neighbors.
    pub fn single(capacity: u32) -> Self {
        Self::new(vec![capacity], vec![vec![]], 1).expect("single topology is valid")
    }

    /// Every FN neighbors every other FN; the first acts as EC.
    pub fn fully_connected(capacities: Vec<u32>) -> Result<Self> {
        let k = capacities.len();
        let neighbors = (1..=k)
            .map(|own| (1..=k).filter(|&j| j != own).collect())
            .collect();
        Self::new(capacities, neighbors, 1)
    }

    pub fn k(&self) -> usize {
        self.capacities.len()
    }

    pub fn capacity(&self, f: FnId) -> u32 {
        self.capacities[f - 1]
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn total_capacity(&self) -> u32 {
        self.capacities.iter().sum()
    }

    pub fn min_capacity(&self) -> u32 {
        *self.capacities.iter().min().unwrap()
    }

    pub fn neighbors(&self, f: FnId) -> &[FnId] {
        &self.neighbors[f - 1]
    }

    pub fn ec_index(&self) -> FnId {
        self.ec_index
    }
}

/// One running task's hold on resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Allocation {
    pub blocks: u32,
    pub remaining: u32,
}

/// Dynamic cluster occupancy: the active allocations at each FN, with the
/// busy-block count `b_i` cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterState {
    allocations: Vec<Vec<Allocation>>,
    busy: Vec<u32>,
}

impl ClusterState {
    pub fn empty(k: usize) -> Self {
        Self { allocations: vec![Vec::new(); k], busy: vec![0; k] }
    }

    pub fn k(&self) -> usize {
        self.busy.len()
    }

    /// Blocks currently in use at FN `f` (the state component `b_i`).
    pub fn busy_blocks(&self, f: FnId) -> u32 {
        self.busy[f - 1]
    }

    /// Remaining block-time committed at FN `f` (the state component
    /// `l_i`): the sum of blocks x remaining over active allocations.
    pub fn existing_load(&self, f: FnId) -> u64 {
        self.allocations[f - 1]
            .iter()
            .map(|a| a.blocks as u64 * a.remaining as u64)
            .sum()
    }

    pub fn allocations(&self, f: FnId) -> &[Allocation] {
        &self.allocations[f - 1]
    }

    pub fn is_saturated(&self, topo: &ClusterTopology) -> bool {
        (1..=self.k()).all(|f| self.busy_blocks(f) >= topo.capacity(f))
    }

    /// FNs among the request's primary and its neighbors with enough free
    /// blocks to host it, ascending. Empty means the request can only go
    /// to the cloud.
    pub fn feasible_serve_set(&self, topo: &ClusterTopology, req: &TaskRequest) -> Vec<FnId> {
        let mut out: Vec<FnId> = std::iter::once(req.primary_fn)
            .chain(topo.neighbors(req.primary_fn).iter().copied())
            .filter(|&f| topo.capacity(f) - self.busy_blocks(f) >= req.c)
            .collect();
        out.sort_unstable();
        out
    }

    /// Starts the request at FN `f`. The caller must have checked
    /// feasibility; an over-capacity or out-of-neighborhood allocation is
    /// a contract violation.
    pub fn allocate(&mut self, topo: &ClusterTopology, f: FnId, req: &TaskRequest) -> Result<()> {
        if !self.feasible_serve_set(topo, req).contains(&f) {
            return Err(Error::Contract(format!(
                "FN {f} is not a feasible server for request at FN {} (c={})",
                req.primary_fn, req.c
            )));
        }
        self.allocations[f - 1].push(Allocation { blocks: req.c, remaining: req.h });
        self.busy[f - 1] += req.c;
        Ok(())
    }

    /// Advances time one step: every allocation's remaining time drops by
    /// one and finished allocations release their blocks.
    pub fn tick(&mut self) {
        for (list, busy) in self.allocations.iter_mut().zip(self.busy.iter_mut()) {
            let mut freed = 0;
            list.retain_mut(|a| {
                a.remaining -= 1;
                if a.remaining == 0 {
                    freed += a.blocks;
                    false
                } else {
                    true
                }
            });
            *busy -= freed;
        }
    }

    /// Instantaneous edge utilization: occupied blocks over total capacity.
    pub fn utilization(&self, topo: &ClusterTopology) -> f64 {
        self.busy.iter().sum::<u32>() as f64 / topo.total_capacity() as f64
    }

    /// Canonical occupancy form (per-FN sorted allocation multisets), for
    /// state comparison independent of allocation insertion order.
    pub fn canonical(&self) -> Vec<Vec<Allocation>> {
        self.allocations
            .iter()
            .map(|list| {
                let mut v = list.clone();
                v.sort_unstable();
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(c: u32, h: u32, primary: FnId) -> TaskRequest {
        TaskRequest { u: 5, c, h, primary_fn: primary, t: 0 }
    }

    /// Four-FN cluster where FN 4 is not a neighbor of FN 2.
    fn four_fn_topology() -> ClusterTopology {
        ClusterTopology::new(
            vec![5; 4],
            vec![vec![2, 3], vec![1, 3], vec![1, 2, 4], vec![3]],
            3,
        )
        .unwrap()
    }

    #[test]
    fn non_neighbor_is_never_feasible() {
        let topo = four_fn_topology();
        let state = ClusterState::empty(4);
        let feasible = state.feasible_serve_set(&topo, &req(1, 5, 2));
        assert!(!feasible.contains(&4));
        assert_eq!(feasible, vec![1, 2, 3]);
    }

    #[test]
    fn feasibility_respects_free_blocks() {
        let topo = ClusterTopology::new(vec![7], vec![vec![]], 1).unwrap();
        let mut state = ClusterState::empty(1);
        state.allocate(&topo, 1, &req(3, 10, 1)).unwrap();
        state.allocate(&topo, 1, &req(2, 10, 1)).unwrap();
        // b = 5 of 7: a 3-block request no longer fits.
        assert!(state.feasible_serve_set(&topo, &req(3, 5, 1)).is_empty());
        assert_eq!(state.feasible_serve_set(&topo, &req(2, 5, 1)), vec![1]);
    }

    #[test]
    fn saturated_cluster_has_empty_feasible_set() {
        let topo = ClusterTopology::hex7(7);
        let mut state = ClusterState::empty(7);
        for f in 1..=7 {
            state
                .allocate(&topo, f, &TaskRequest { u: 5, c: 4, h: 9, primary_fn: f, t: 0 })
                .unwrap();
            state
                .allocate(&topo, f, &TaskRequest { u: 5, c: 3, h: 9, primary_fn: f, t: 0 })
                .unwrap();
        }
        assert!(state.is_saturated(&topo));
        for f in 1..=7 {
            assert!(state.feasible_serve_set(&topo, &req(1, 5, f)).is_empty());
        }
    }

    #[test]
    fn allocate_tracks_blocks_and_load() {
        let topo = ClusterTopology::single(7);
        let mut state = ClusterState::empty(1);
        state.allocate(&topo, 1, &req(4, 5, 1)).unwrap();
        assert_eq!(state.busy_blocks(1), 4);
        assert_eq!(state.existing_load(1), 20);
    }

    #[test]
    fn allocate_to_exact_capacity() {
        let topo = ClusterTopology::single(7);
        let mut state = ClusterState::empty(1);
        state.allocate(&topo, 1, &req(3, 2, 1)).unwrap();
        state.allocate(&topo, 1, &req(4, 2, 1)).unwrap();
        assert_eq!(state.busy_blocks(1), 7);
        assert!(state.feasible_serve_set(&topo, &req(1, 1, 1)).is_empty());
    }

    #[test]
    fn successive_allocations_accumulate_block_time() {
        let topo = ClusterTopology::single(7);
        let mut state = ClusterState::empty(1);
        state.allocate(&topo, 1, &req(2, 5, 1)).unwrap();
        state.allocate(&topo, 1, &req(3, 10, 1)).unwrap();
        assert_eq!(state.busy_blocks(1), 5);
        assert_eq!(state.existing_load(1), 40);
    }

    #[test]
    fn infeasible_allocation_is_a_contract_violation() {
        let topo = four_fn_topology();
        let mut state = ClusterState::empty(4);
        let r = req(2, 5, 2);
        assert!(matches!(state.allocate(&topo, 4, &r), Err(Error::Contract(_))));
        assert_eq!(state.busy_blocks(4), 0);
    }

    #[test]
    fn tick_releases_finished_allocations() {
        let topo = ClusterTopology::single(7);
        let mut state = ClusterState::empty(1);
        state.allocate(&topo, 1, &req(2, 1, 1)).unwrap();
        assert_eq!(state.busy_blocks(1), 2);
        state.tick();
        assert_eq!(state.busy_blocks(1), 0);
        assert!(state.allocations(1).is_empty());
    }

    #[test]
    fn tick_on_empty_cluster_is_a_fixed_point() {
        let mut state = ClusterState::empty(3);
        let before = state.clone();
        state.tick();
        assert_eq!(state, before);
    }

    #[test]
    fn load_decays_linearly_to_zero() {
        let topo = ClusterTopology::single(7);
        let mut state = ClusterState::empty(1);
        state.allocate(&topo, 1, &req(3, 4, 1)).unwrap();
        let mut trace = vec![state.existing_load(1)];
        for _ in 0..4 {
            state.tick();
            trace.push(state.existing_load(1));
        }
        assert_eq!(trace, vec![12, 9, 6, 3, 0]);
        assert_eq!(state.busy_blocks(1), 0);
    }

    #[test]
    fn utilization_snapshot() {
        let topo = ClusterTopology::hex7(7);
        let mut state = ClusterState::empty(7);
        assert_eq!(state.utilization(&topo), 0.0);
        state.allocate(&topo, 1, &req(4, 5, 1)).unwrap();
        state.allocate(&topo, 2, &req(4, 5, 2)).unwrap();
        state.allocate(&topo, 3, &req(4, 5, 3)).unwrap();
        state.allocate(&topo, 4, &req(2, 5, 4)).unwrap();
        assert!((state.utilization(&topo) - 14.0 / 49.0).abs() < 1e-12);

        let mut full = ClusterState::empty(7);
        for f in 1..=7 {
            full.allocate(&topo, f, &TaskRequest { u: 5, c: 4, h: 5, primary_fn: f, t: 0 })
                .unwrap();
            full.allocate(&topo, f, &TaskRequest { u: 5, c: 3, h: 5, primary_fn: f, t: 0 })
                .unwrap();
        }
        assert_eq!(full.utilization(&topo), 1.0);
    }

    #[test]
    fn hex7_wiring() {
        let topo = ClusterTopology::hex7(7);
        assert_eq!(topo.k(), 7);
        assert_eq!(topo.ec_index(), 5);
        assert_eq!(topo.neighbors(5), &[1, 2, 3, 4, 6, 7]);
        for f in [1, 2, 3, 4, 6, 7] {
            assert_eq!(topo.neighbors(f).len(), 3);
            assert!(topo.neighbors(f).contains(&5));
        }
    }

    #[test]
    fn topology_validation() {
        assert!(ClusterTopology::new(vec![0], vec![vec![]], 1).is_err());
        assert!(ClusterTopology::new(vec![7, 7], vec![vec![2], vec![3]], 1).is_err());
        assert!(ClusterTopology::new(vec![7, 7], vec![vec![1], vec![1]], 1).is_err());
        assert!(ClusterTopology::new(vec![7, 7], vec![vec![2], vec![1]], 3).is_err());
        // Asymmetric neighbor relations are allowed.
        assert!(ClusterTopology::new(vec![7, 7], vec![vec![2], vec![]], 1).is_ok());
    }
}
