//! Traffic environments: utility and load distributions, the builtin
//! environment profiles, request sampling, and time-varying schedules.

use rand::Rng;

use crate::cluster::FnId;
use crate::error::{Error, Result};

/// Number of utility classes. Requests carry a utility `u` in `1..=U_MAX`.
pub const U_MAX: u32 = 10;

/// Probability tolerance when validating that a vector sums to one.
const PROB_TOL: f64 = 1e-9;

fn check_prob_vector(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::Config(format!("{what}: probabilities must be nonnegative")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::Config(format!("{what}: probabilities sum to {sum}, expected 1")));
    }
    Ok(())
}

/// Draws an index from a discrete distribution via its CDF.
fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Distribution over the ten utility classes.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityDistribution {
    probs: Vec<f64>,
}

impl UtilityDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() != U_MAX as usize {
            return Err(Error::Config(format!(
                "utility distribution needs {U_MAX} entries, got {}",
                probs.len()
            )));
        }
        check_prob_vector(&probs, "utility distribution")?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// P(u = class) for class in `1..=U_MAX`.
    pub fn prob(&self, class: u32) -> f64 {
        self.probs[(class - 1) as usize]
    }

    /// P(u >= threshold).
    pub fn prob_at_least(&self, threshold: u32) -> f64 {
        self.probs[(threshold - 1) as usize..].iter().sum()
    }

    /// Mean utility.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as f64 + 1.0) * p)
            .sum()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        sample_index(&self.probs, rng) as u32 + 1
    }

    /// Utility classes with nonzero probability.
    pub fn support(&self) -> Vec<u32> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }
}

/// Joint distribution of requested resource blocks and holding times.
/// Blocks and holding time are drawn independently.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadDistribution {
    c_values: Vec<u32>,
    c_probs: Vec<f64>,
    h_values: Vec<u32>,
    h_probs: Vec<f64>,
}

impl LoadDistribution {
    pub fn new(
        c_values: Vec<u32>,
        c_probs: Vec<f64>,
        h_values: Vec<u32>,
        h_probs: Vec<f64>,
    ) -> Result<Self> {
        if c_values.len() != c_probs.len() || c_values.is_empty() {
            return Err(Error::Config("block values/probabilities length mismatch".into()));
        }
        if h_values.len() != h_probs.len() || h_values.is_empty() {
            return Err(Error::Config("holding values/probabilities length mismatch".into()));
        }
        if c_values.iter().any(|&c| c < 1) {
            return Err(Error::Config("block counts must be >= 1".into()));
        }
        if h_values.iter().any(|&h| h < 1) {
            return Err(Error::Config("holding times must be >= 1".into()));
        }
        check_prob_vector(&c_probs, "block distribution")?;
        check_prob_vector(&h_probs, "holding-time distribution")?;
        Ok(Self { c_values, c_probs, h_values, h_probs })
    }

    /// The reference load model: blocks 1..4 with probabilities
    /// 0.1/0.2/0.3/0.4 and holding times 5,10,...,30 with probabilities
    /// 0.05/0.1/0.1/0.15/0.2/0.4.
    pub fn reference() -> Self {
        Self::new(
            vec![1, 2, 3, 4],
            vec![0.1, 0.2, 0.3, 0.4],
            vec![5, 10, 15, 20, 25, 30],
            vec![0.05, 0.1, 0.1, 0.15, 0.2, 0.4],
        )
        .expect("reference load distribution is valid")
    }

    pub fn c_values(&self) -> &[u32] {
        &self.c_values
    }

    pub fn h_values(&self) -> &[u32] {
        &self.h_values
    }

    pub fn c_max(&self) -> u32 {
        *self.c_values.iter().max().unwrap()
    }

    pub fn h_max(&self) -> u32 {
        *self.h_values.iter().max().unwrap()
    }

    /// Largest block request must fit the smallest FN.
    pub fn check_fits_capacity(&self, min_capacity: u32) -> Result<()> {
        if self.c_max() > min_capacity {
            return Err(Error::Config(format!(
                "largest block request {} exceeds smallest FN capacity {min_capacity}",
                self.c_max()
            )));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (u32, u32) {
        let c = self.c_values[sample_index(&self.c_probs, rng)];
        let h = self.h_values[sample_index(&self.h_probs, rng)];
        (c, h)
    }
}

/// How the primary FN of each request is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum PrimaryFnRule {
    /// Uniform over all FNs in the cluster.
    Uniform,
    /// Per-FN weights, normalized at construction.
    Weighted(Vec<f64>),
}

impl PrimaryFnRule {
    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::Config("primary FN weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Config("primary FN weights must not all be zero".into()));
        }
        Ok(Self::Weighted(weights.iter().map(|w| w / total).collect()))
    }

    fn sample(&self, k: usize, rng: &mut impl Rng) -> FnId {
        match self {
            PrimaryFnRule::Uniform => rng.gen_range(0..k) + 1,
            PrimaryFnRule::Weighted(w) => {
                debug_assert_eq!(w.len(), k, "weight vector length must match cluster size");
                sample_index(w, rng) + 1
            }
        }
    }
}

/// A traffic environment: which utilities arrive, what loads they carry,
/// and which FN receives them.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentProfile {
    pub id: String,
    pub utility: UtilityDistribution,
    pub load: LoadDistribution,
    pub primary_rule: PrimaryFnRule,
}

/// One service request: utility class, requested blocks, holding time,
/// the FN that received it, and its arrival step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskRequest {
    pub u: u32,
    pub c: u32,
    pub h: u32,
    pub primary_fn: FnId,
    pub t: u64,
}

impl TaskRequest {
    /// Task load: total block-time the request would consume.
    pub fn load(&self) -> u64 {
        self.c as u64 * self.h as u64
    }
}

impl EnvironmentProfile {
    pub fn new(
        id: impl Into<String>,
        utility: UtilityDistribution,
        load: LoadDistribution,
        primary_rule: PrimaryFnRule,
    ) -> Self {
        Self { id: id.into(), utility, load, primary_rule }
    }

    /// Draws the single request arriving at step `t`. Draw order is fixed
    /// (u, c, h, primary FN) so streams are reproducible.
    pub fn sample_request(&self, k: usize, t: u64, rng: &mut impl Rng) -> TaskRequest {
        let u = self.utility.sample(rng);
        let (c, h) = self.load.sample(rng);
        let primary_fn = self.primary_rule.sample(k, rng);
        TaskRequest { u, c, h, primary_fn, t }
    }
}

/// The five builtin utility mixes, ordered from high-utility-poor (E1) to
/// high-utility-rich (E5). Each uses the reference load model.
pub fn builtin_profile(id: &str) -> Result<EnvironmentProfile> {
    let probs: Vec<f64> = match id {
        "E1" => vec![0.015, 0.073, 0.365, 0.292, 0.205, 0.014, 0.013, 0.011, 0.009, 0.003],
        "E2" => vec![0.012, 0.058, 0.288, 0.230, 0.162, 0.071, 0.064, 0.057, 0.043, 0.015],
        "E3" => vec![0.008, 0.038, 0.192, 0.154, 0.108, 0.142, 0.129, 0.114, 0.086, 0.029],
        "E4" => vec![0.004, 0.019, 0.096, 0.077, 0.054, 0.214, 0.193, 0.171, 0.129, 0.043],
        "E5" => vec![0.001, 0.004, 0.019, 0.015, 0.011, 0.271, 0.244, 0.217, 0.163, 0.055],
        other => return Err(Error::Config(format!("unknown builtin profile '{other}'"))),
    };
    Ok(EnvironmentProfile::new(
        id,
        UtilityDistribution::new(probs)?,
        LoadDistribution::reference(),
        PrimaryFnRule::Uniform,
    ))
}

pub const BUILTIN_PROFILES: [&str; 5] = ["E1", "E2", "E3", "E4", "E5"];

/// One stretch of a dynamic run during which a single profile is active.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSegment {
    pub profile: EnvironmentProfile,
    pub duration: u64,
}

impl ScheduleSegment {
    pub fn new(profile: EnvironmentProfile, duration: u64) -> Result<Self> {
        if duration < 1 {
            return Err(Error::Config("schedule segment duration must be >= 1".into()));
        }
        Ok(Self { profile, duration })
    }
}

/// A sequence of profile segments over half-open step intervals
/// `[start, start+duration)`. Beyond the last segment the final profile
/// persists.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    segments: Vec<ScheduleSegment>,
}

impl Schedule {
    pub fn new(segments: Vec<ScheduleSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Config("schedule must have at least one segment".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for seg in &segments {
            if !seen.insert(seg.profile.id.clone()) {
                return Err(Error::Config(format!(
                    "profile id '{}' appears twice in schedule",
                    seg.profile.id
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn single(profile: EnvironmentProfile) -> Self {
        Self { segments: vec![ScheduleSegment { profile, duration: u64::MAX }] }
    }

    pub fn segments(&self) -> &[ScheduleSegment] {
        &self.segments
    }

    /// The profile active at step `t`.
    pub fn profile_at(&self, t: u64) -> &EnvironmentProfile {
        let mut start = 0u64;
        for seg in &self.segments {
            let end = start.saturating_add(seg.duration);
            if t < end {
                return &seg.profile;
            }
            start = end;
        }
        &self.segments.last().unwrap().profile
    }

    /// Step indices at which the active profile changes.
    pub fn switch_times(&self) -> Vec<u64> {
        let mut times = Vec::new();
        let mut start = 0u64;
        for seg in &self.segments[..self.segments.len() - 1] {
            start = start.saturating_add(seg.duration);
            times.push(start);
        }
        times
    }

    pub fn total_duration(&self) -> u64 {
        self.segments.iter().map(|s| s.duration).fold(0u64, u64::saturating_add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_columns_match_published_values() {
        let e3 = builtin_profile("E3").unwrap();
        assert_eq!(e3.utility.prob(3), 0.192);
        assert_eq!(e3.utility.prob(10), 0.029);

        let e1 = builtin_profile("E1").unwrap();
        assert!((e1.utility.prob_at_least(8) - 0.023).abs() < 1e-12);
    }

    #[test]
    fn builtin_columns_are_normalized() {
        for id in BUILTIN_PROFILES {
            let p = builtin_profile(id).unwrap();
            let sum: f64 = p.utility.probs().iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "{id} sums to {sum}");
        }
    }

    #[test]
    fn unknown_profile_is_a_config_error() {
        assert!(matches!(builtin_profile("E9"), Err(Error::Config(_))));
    }

    #[test]
    fn degenerate_profile_yields_constant_requests() {
        let mut probs = vec![0.0; 10];
        probs[4] = 1.0; // u = 5
        let profile = EnvironmentProfile::new(
            "fixed",
            UtilityDistribution::new(probs).unwrap(),
            LoadDistribution::new(vec![2], vec![1.0], vec![7], vec![1.0]).unwrap(),
            PrimaryFnRule::Uniform,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..50 {
            let req = profile.sample_request(1, t, &mut rng);
            assert_eq!((req.u, req.c, req.h, req.primary_fn), (5, 2, 7, 1));
        }
    }

    #[test]
    fn same_seed_gives_identical_streams() {
        let profile = builtin_profile("E2").unwrap();
        let draw = |seed: u64| -> Vec<TaskRequest> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..1000).map(|t| profile.sample_request(7, t, &mut rng)).collect()
        };
        assert_eq!(draw(99), draw(99));
    }

    #[test]
    fn schedule_boundaries_are_half_open() {
        let a = builtin_profile("E1").unwrap();
        let b = builtin_profile("E2").unwrap();
        let sched = Schedule::new(vec![
            ScheduleSegment::new(a, 10).unwrap(),
            ScheduleSegment::new(b, 10).unwrap(),
        ])
        .unwrap();
        assert_eq!(sched.profile_at(9).id, "E1");
        assert_eq!(sched.profile_at(10).id, "E2");
        assert_eq!(sched.profile_at(25).id, "E2"); // last profile persists
        assert_eq!(sched.switch_times(), vec![10]);
    }

    #[test]
    fn single_segment_schedule_always_returns_it() {
        let sched = Schedule::single(builtin_profile("E4").unwrap());
        for t in [0u64, 1, 1_000_000, u64::MAX - 1] {
            assert_eq!(sched.profile_at(t).id, "E4");
        }
    }

    #[test]
    fn daily_schedule_profile_lookup() {
        // 2000 steps per sample: 40 samples of E4, then 30 each of E1, E2, E3, E5.
        let steps = |samples: u64| samples * 2000;
        let sched = Schedule::new(vec![
            ScheduleSegment::new(builtin_profile("E4").unwrap(), steps(40)).unwrap(),
            ScheduleSegment::new(builtin_profile("E1").unwrap(), steps(30)).unwrap(),
            ScheduleSegment::new(builtin_profile("E2").unwrap(), steps(30)).unwrap(),
            ScheduleSegment::new(builtin_profile("E3").unwrap(), steps(30)).unwrap(),
            ScheduleSegment::new(builtin_profile("E5").unwrap(), steps(30)).unwrap(),
        ])
        .unwrap();
        assert_eq!(sched.profile_at(0).id, "E4");
        assert_eq!(sched.profile_at(80_000).id, "E1");
        assert_eq!(sched.switch_times(), vec![80_000, 140_000, 200_000, 260_000]);
    }

    #[test]
    fn load_distribution_rejects_bad_inputs() {
        assert!(LoadDistribution::new(vec![0], vec![1.0], vec![5], vec![1.0]).is_err());
        assert!(LoadDistribution::new(vec![1], vec![0.5], vec![5], vec![1.0]).is_err());
        let ok = LoadDistribution::reference();
        assert!(ok.check_fits_capacity(7).is_ok());
        assert!(ok.check_fits_capacity(3).is_err());
    }
}
