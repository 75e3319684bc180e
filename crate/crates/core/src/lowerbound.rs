//! Two-region protocol-model construction and the range-partition machinery
//! for bounding the probability that no slot ever has exactly one
//! transmitter.
//!
//! The tracked event per slot is "number of transmitters != 1". In the
//! two-region geometry every node sits in every other node's interference
//! range, so while that event keeps holding nobody decodes anything and all
//! reception histories stay zero. For policies whose transmit probability is
//! a pure function of the reception history this makes the per-slot
//! transmitter count an exact Binomial(m, p_t), which is evaluated in closed
//! form; Monte Carlo runs exist only to validate the closed form.

use rayon::prelude::*;

use crate::model::{ceil_log2, NodeId, NodeSpec, PhysParams, Point, Scenario};
use crate::model::InterferenceModel;
use crate::rng;
use crate::{Error, Result};

/// Default size of the small region.
pub const DEFAULT_SPARSE: u64 = 3;

/// f_i^j = (2/e)^(|i-j|+1).
pub fn f_weight(i: usize, j: usize) -> f64 {
    let d = i.abs_diff(j) as i32;
    (2.0 / std::f64::consts::E).powi(d + 1)
}

/// Probability that exactly one of `m` independent Bernoulli(p) trials
/// fires: m p (1-p)^(m-1).
pub fn exact_single_tx_prob(m: u64, p: f64) -> f64 {
    if m == 0 || p <= 0.0 {
        return 0.0;
    }
    if m == 1 {
        return p;
    }
    m as f64 * p * ((m - 1) as f64 * (-p).ln_1p()).exp()
}

// ----------------------------------------------------------------------
// Range partition and weights
// ----------------------------------------------------------------------

/// Partition of probability space into the geometric ranges
/// R_0 = (-inf, 16/n^2), R_j = [16^j/n^2, 16^(j+1)/n^2) for j >= 1, ending
/// at the first index r with 16^(r+1)/n^2 > 1 so every probability up to 1
/// falls in some range.
#[derive(Debug, Clone, Copy)]
pub struct RangePartition {
    pub n: u32,
    /// Index of the last range.
    pub r: usize,
}

impl RangePartition {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig("partition needs n >= 2".into()));
        }
        let n2 = n as f64 * n as f64;
        let mut r = 0usize;
        while 16f64.powi(r as i32 + 1) <= n2 {
            r += 1;
        }
        Ok(RangePartition { n, r })
    }

    pub fn num_ranges(&self) -> usize {
        self.r + 1
    }

    /// Exclusive upper bound of range `j`.
    pub fn upper(&self, j: usize) -> f64 {
        16f64.powi(j as i32 + 1) / (self.n as f64 * self.n as f64)
    }

    /// Inclusive lower bound of range `j`; -inf for j = 0.
    pub fn lower(&self, j: usize) -> f64 {
        if j == 0 {
            f64::NEG_INFINITY
        } else {
            16f64.powi(j as i32) / (self.n as f64 * self.n as f64)
        }
    }

    /// Range index containing `p`. Anything at or above the top range's
    /// upper bound is an error (impossible for probabilities by
    /// construction).
    pub fn index_of(&self, p: f64) -> Result<usize> {
        for j in 0..=self.r {
            if p < self.upper(j) {
                return Ok(j);
            }
        }
        Err(Error::OutOfPartition(p))
    }
}

/// Fraction of the sequence falling in each range; sums to 1.
pub fn weights(p_seq: &[f64], partition: &RangePartition) -> Result<Vec<f64>> {
    if p_seq.is_empty() {
        return Err(Error::InvalidConfig("empty probability sequence".into()));
    }
    let mut counts = vec![0u64; partition.num_ranges()];
    for &p in p_seq {
        counts[partition.index_of(p)?] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / p_seq.len() as f64).collect())
}

/// The range index j <= j_cap minimizing sum_i f_i^j w_i, and the achieved
/// score. Ties resolve to the smallest j.
pub fn select_j(weights: &[f64], j_cap: usize) -> (usize, f64) {
    let hi = j_cap.min(weights.len().saturating_sub(1));
    let mut best = (0usize, f64::INFINITY);
    for j in 0..=hi {
        let score: f64 = weights.iter().enumerate().map(|(i, &w)| f_weight(i, j) * w).sum();
        if score < best.1 {
            best = (j, score);
        }
    }
    best
}

/// Dense-region size for the chosen range: round(n^2 / (4 * 16^j)).
/// `n` must be a power of two, at least 2, and j at most log2(n)/4, which
/// makes the division exact.
pub fn delta_from_j(n: u32, j: usize) -> Result<u64> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("n must be a power of 2 >= 2, got {n}")));
    }
    let log_n = ceil_log2(n) as usize;
    if 4 * j > log_n {
        return Err(Error::InvalidConfig(format!("j = {j} exceeds log2(n)/4 = {log_n}/4")));
    }
    let n2 = (n as u128) * (n as u128);
    let denom = 4u128 << (4 * j);
    let delta = (n2 + denom / 2) / denom;
    if delta < 1 {
        return Err(Error::InvalidConfig("dense region would be empty".into()));
    }
    Ok(delta as u64)
}

/// Per-slot comparison of the exact conditional probability of "not exactly
/// one transmitter" against the 1 - f_i^j bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub exact: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Evaluate the bound for a slot with probability `p_t` in range `i`, for
/// the instance sized by `delta` dense plus `sparse` other nodes.
pub fn per_slot_bound_check(p_t: f64, i: usize, j: usize, delta: u64, sparse: u64) -> BoundCheck {
    let exact = 1.0 - exact_single_tx_prob(delta + sparse, p_t);
    let bound = 1.0 - f_weight(i, j);
    BoundCheck { exact, bound, holds: exact >= bound }
}

// ----------------------------------------------------------------------
// Geometry
// ----------------------------------------------------------------------

/// Two transmission regions that do not overlap yet lie inside each other's
/// interference range: a dense disc with `dense_count` nodes and a sparse
/// disc with a constant few.
#[derive(Debug, Clone)]
pub struct TwoRegionInstance {
    pub dense: Vec<Point>,
    pub sparse: Vec<Point>,
    pub r_t: f64,
    pub r_i: f64,
}

impl TwoRegionInstance {
    pub fn dense_count(&self) -> u64 {
        self.dense.len() as u64
    }

    pub fn sparse_count(&self) -> u64 {
        self.sparse.len() as u64
    }

    /// Total node count m = dense + sparse.
    pub fn m(&self) -> u64 {
        (self.dense.len() + self.sparse.len()) as u64
    }

    /// Emit the instance in the common scenario schema, under the protocol
    /// model. Node ids number the dense region first.
    pub fn to_scenario(&self, n_bound: u32, delta: u32, gamma: f64) -> Result<Scenario> {
        let nodes = self
            .dense
            .iter()
            .chain(self.sparse.iter())
            .enumerate()
            .map(|(i, &pos)| NodeSpec { id: NodeId(i as u32), pos, wake: 0, shutdown: None })
            .collect();
        Scenario::new(
            nodes,
            PhysParams::default(),
            InterferenceModel::Protocol { r_t: self.r_t, r_i: self.r_i },
            n_bound,
            delta,
            gamma,
        )
    }
}

/// Deterministic sunflower layout of `count` distinct points in the closed
/// disc of radius `rho` around `center`.
fn disc_points(center: Point, rho: f64, count: u64) -> Vec<Point> {
    const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
    (0..count)
        .map(|k| {
            if k == 0 {
                center
            } else {
                let r = rho * ((k as f64) / (count as f64)).sqrt();
                let a = k as f64 * GOLDEN_ANGLE;
                Point::new(center.x + r * a.cos(), center.y + r * a.sin())
            }
        })
        .collect()
}

/// Build the two-region construction: dense nodes in a disc at the origin,
/// sparse nodes in a disc at distance (r_t + r_i) / 2, both of diameter at
/// most r_t, every cross pair farther than r_t but within r_i. Validated
/// exhaustively for small instances and by extremal radii for large ones.
pub fn build_two_region_instance(
    delta: u64,
    sparse: u64,
    r_t: f64,
    r_i: f64,
) -> Result<TwoRegionInstance> {
    if delta < 1 || sparse < 1 {
        return Err(Error::InvalidConfig("both regions need at least one node".into()));
    }
    if !(r_t > 0.0 && r_t.is_finite() && r_i.is_finite()) || r_i <= r_t {
        return Err(Error::Infeasible(format!(
            "need r_i > r_t > 0 to separate the regions, got r_t={r_t}, r_i={r_i}"
        )));
    }
    let d = (r_t + r_i) / 2.0;
    // disc radius: keep same-region pairs within r_t, cross pairs strictly
    // beyond r_t and within r_i
    let rho = 0.9 * (r_t / 2.0).min((d - r_t) / 2.0).min((r_i - d) / 2.0);
    let dense = disc_points(Point::new(0.0, 0.0), rho, delta);
    let sparse_pts = disc_points(Point::new(d, 0.0), rho, sparse);
    let inst = TwoRegionInstance { dense, sparse: sparse_pts, r_t, r_i };
    validate_instance(&inst)?;
    Ok(inst)
}

fn validate_instance(inst: &TwoRegionInstance) -> Result<()> {
    let fail = |msg: String| Err(Error::Infeasible(msg));
    let total = inst.dense.len() + inst.sparse.len();
    if total <= 2048 {
        // exhaustive pairwise check
        for (name, region) in [("dense", &inst.dense), ("sparse", &inst.sparse)] {
            for (a, &p) in region.iter().enumerate() {
                for &q in &region[a + 1..] {
                    if p.distance(q) > inst.r_t {
                        return fail(format!("{name} region wider than r_t"));
                    }
                }
            }
        }
        for &p in &inst.dense {
            for &q in &inst.sparse {
                let d = p.distance(q);
                if d <= inst.r_t || d > inst.r_i {
                    return fail(format!("cross pair at distance {d} outside (r_t, r_i]"));
                }
            }
        }
    } else {
        // extremal check: distances are bounded by center distance plus or
        // minus the measured radial extents
        let extent = |region: &[Point], center: Point| -> f64 {
            region.iter().map(|p| p.distance(center)).fold(0.0, f64::max)
        };
        let c_dense = Point::new(0.0, 0.0);
        let c_sparse = inst.sparse[0];
        let ra = extent(&inst.dense, c_dense);
        let rb = extent(&inst.sparse, c_sparse);
        let d = c_dense.distance(c_sparse);
        if 2.0 * ra > inst.r_t || 2.0 * rb > inst.r_t {
            return fail("a region is wider than r_t".into());
        }
        if d - ra - rb <= inst.r_t || d + ra + rb > inst.r_i {
            return fail("cross distances leave (r_t, r_i]".into());
        }
    }
    Ok(())
}

// ----------------------------------------------------------------------
// Input-determined policies
// ----------------------------------------------------------------------

/// A transmit-probability rule that is a pure function of the node's
/// reception history, the slot number and the size bound. This is exactly
/// the conditional-independence requirement realized constructively: two
/// calls with identical arguments must return identical probabilities.
pub trait InputDeterminedPolicy: Sync {
    /// Probability of transmitting in slot `t` (1-based) given the reception
    /// bits of slots 1..t (length t-1).
    fn next_p(&self, history: &[bool], t: u64, n_bound: u32) -> f64;

    fn describe(&self) -> String;
}

/// Transmit at a fixed probability regardless of history.
#[derive(Debug, Clone, Copy)]
pub struct FixedPolicy(pub f64);

impl InputDeterminedPolicy for FixedPolicy {
    fn next_p(&self, _history: &[bool], _t: u64, _n_bound: u32) -> f64 {
        self.0
    }

    fn describe(&self) -> String {
        format!("fixed:{}", self.0)
    }
}

/// The doubling schedule of the budget-halting broadcast algorithm, replayed
/// from the reception history: start at 1/(64 n), double every
/// `delta * log n` slots up to 1/16, and on every (log n + 1)-th reception
/// divide by 32 (floored at 1/(128 n)) and restart the block.
#[derive(Debug, Clone, Copy)]
pub struct DoublingPolicy {
    pub delta: u32,
}

impl InputDeterminedPolicy for DoublingPolicy {
    fn next_p(&self, history: &[bool], _t: u64, n_bound: u32) -> f64 {
        let log_n = ceil_log2(n_bound).max(1);
        let block = (self.delta as u64 * log_n as u64).max(1);
        let floor = 1.0 / (128.0 * n_bound as f64);
        let cap = 1.0 / 16.0;
        let mut p = (2.0 * floor).min(cap);
        let mut rc = 0u32;
        let mut in_block = 0u64;
        for &bit in history {
            if bit {
                rc += 1;
                if rc > log_n {
                    p = (2.0 * (p / 32.0).max(floor)).min(cap);
                    rc = 0;
                    in_block = 0;
                    continue;
                }
            }
            in_block += 1;
            if in_block == block {
                in_block = 0;
                p = (2.0 * p).min(cap);
            }
        }
        p
    }

    fn describe(&self) -> String {
        format!("doubling:delta={}", self.delta)
    }
}

// ----------------------------------------------------------------------
// Exact and Monte Carlo evaluation of the no-solo-transmission event
// ----------------------------------------------------------------------

/// Per-slot record of the experiment.
#[derive(Debug, Clone, Copy)]
pub struct NtSlot {
    /// 1-based slot number.
    pub t: u64,
    pub p_t: f64,
    /// Exact conditional probability that this slot has != 1 transmitters.
    pub exact_cond: f64,
    /// Exact probability that every slot through `t` had != 1 transmitters.
    pub exact_cum: f64,
    /// Monte Carlo estimate of the same, when trials were run.
    pub mc_survival: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NtExperiment {
    pub m: u64,
    pub trials: u64,
    pub slots: Vec<NtSlot>,
}

impl NtExperiment {
    /// z-score of the final Monte Carlo estimate against the exact chained
    /// value, under the binomial deviation of `trials` draws.
    pub fn final_z_score(&self) -> Option<f64> {
        let last = self.slots.last()?;
        let mc = last.mc_survival?;
        let p = last.exact_cum;
        let sigma = (p * (1.0 - p) / self.trials as f64).sqrt();
        Some(if sigma == 0.0 { if mc == p { 0.0 } else { f64::INFINITY } } else { (mc - p) / sigma })
    }
}

/// Evaluate the all-slots event for all `m` nodes of the instance drawing
/// iid Bernoulli(p_t). While the event holds every history stays all-zero,
/// so `p_t` comes from the policy on the zero history and the exact
/// conditional per slot is `1 - m p_t (1 - p_t)^(m-1)`. With `trials > 0` a
/// Monte Carlo run samples per-slot transmitter counts and reports the
/// empirical survival frequency of the event through each slot.
pub fn run_nt_experiment(
    instance: &TwoRegionInstance,
    policy: &dyn InputDeterminedPolicy,
    t_max: u64,
    trials: u64,
    seed: u64,
    n_bound: u32,
) -> NtExperiment {
    let m = instance.m();
    let zeros = vec![false; t_max.saturating_sub(1) as usize];
    let p_seq: Vec<f64> = (1..=t_max)
        .map(|t| policy.next_p(&zeros[..(t - 1) as usize], t, n_bound))
        .collect();

    // Monte Carlo: a trial fails at its first slot with exactly one
    // transmitter; record the failure slot of each trial
    let mut fail_hist = vec![0u64; t_max as usize + 1];
    if trials > 0 {
        let fails: Vec<u64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                for (k, &p) in p_seq.iter().enumerate() {
                    let u = rng::uniform(seed, trial, k as u64 + 1);
                    if binomial_sample(m, p, u) == 1 {
                        return k as u64 + 1; // failed at slot k+1
                    }
                }
                0 // survived everything
            })
            .collect();
        for f in fails {
            fail_hist[f as usize] += 1;
        }
    }

    let mut slots = Vec::with_capacity(t_max as usize);
    let mut cum = 1.0f64;
    let mut surviving = trials;
    for (k, &p) in p_seq.iter().enumerate() {
        let cond = 1.0 - exact_single_tx_prob(m, p);
        cum *= cond;
        if trials > 0 {
            surviving -= fail_hist[k + 1];
        }
        slots.push(NtSlot {
            t: k as u64 + 1,
            p_t: p,
            exact_cond: cond,
            exact_cum: cum,
            mc_survival: (trials > 0).then(|| surviving as f64 / trials as f64),
        });
    }
    NtExperiment { m, trials, slots }
}

/// Exact Binomial(m, p) sample by inverse transform on one uniform draw.
/// Walks up from zero when the left tail is representable, otherwise zigzags
/// outward from the mode; both orders are valid inverse transforms of the
/// same distribution.
pub(crate) fn binomial_sample(m: u64, p: f64, u: f64) -> u64 {
    if m == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return m;
    }
    let ratio = p / (1.0 - p);
    let ln_p0 = m as f64 * (-p).ln_1p();
    if ln_p0 > -700.0 {
        let mut pmf = ln_p0.exp();
        let mut cum = pmf;
        let mut k = 0u64;
        while cum <= u && k < m {
            k += 1;
            pmf *= (m - k + 1) as f64 / k as f64 * ratio;
            cum += pmf;
        }
        k
    } else {
        let mode = (((m as f64 + 1.0) * p).floor() as u64).min(m);
        let mut lo_k = mode;
        let mut lo_pmf = ln_binom_pmf(m, mode, p).exp();
        let mut hi_k = mode;
        let mut hi_pmf = lo_pmf;
        let mut cum = lo_pmf;
        if cum > u {
            return mode;
        }
        loop {
            if lo_k > 0 {
                lo_pmf *= lo_k as f64 / ((m - lo_k + 1) as f64 * ratio);
                lo_k -= 1;
                cum += lo_pmf;
                if cum > u {
                    return lo_k;
                }
            }
            if hi_k < m {
                hi_k += 1;
                hi_pmf *= (m - hi_k + 1) as f64 / hi_k as f64 * ratio;
                cum += hi_pmf;
                if cum > u {
                    return hi_k;
                }
            }
            if lo_k == 0 && hi_k == m {
                return mode; // u inside the float round-off tail
            }
        }
    }
}

fn ln_binom_pmf(m: u64, k: u64, p: f64) -> f64 {
    let ln_choose =
        ln_gamma(m as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((m - k) as f64 + 1.0);
    let succ = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let fail = if k == m { 0.0 } else { (m - k) as f64 * (-p).ln_1p() };
    ln_choose + succ + fail
}

/// Stirling series with argument shift; relative error under 1e-12 here.
fn ln_gamma(mut x: f64) -> f64 {
    let mut adj = 0.0;
    while x < 10.0 {
        adj -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
    adj + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

// ----------------------------------------------------------------------
// Harness
// ----------------------------------------------------------------------

/// One row of the bound table.
#[derive(Debug, Clone, Copy)]
pub struct BoundRow {
    pub t: u64,
    pub p_t: f64,
    pub range_i: usize,
    pub exact_cond: f64,
    pub bound: f64,
    pub holds: bool,
    pub cum_exact: f64,
    pub cum_bound: f64,
}

/// Full harness output: the policy's probability trace, its weights, the
/// selected range (capped at log2(n)/4, with the uncapped argmin reported
/// for diagnosis), the implied dense count, the per-slot bound table and the
/// optional Monte Carlo cross-check.
#[derive(Debug, Clone)]
pub struct HarnessRun {
    pub n: u32,
    pub policy: String,
    pub partition: RangePartition,
    pub weights: Vec<f64>,
    pub j: usize,
    pub score: f64,
    pub j_uncapped: usize,
    pub score_uncapped: f64,
    pub delta: u64,
    pub sparse: u64,
    pub m: u64,
    pub rows: Vec<BoundRow>,
    pub experiment: NtExperiment,
}

impl HarnessRun {
    pub fn violations(&self) -> u64 {
        self.rows.iter().filter(|r| !r.holds).count() as u64
    }

    pub fn final_exact(&self) -> f64 {
        self.rows.last().map(|r| r.cum_exact).unwrap_or(1.0)
    }

    pub fn final_bound(&self) -> f64 {
        self.rows.last().map(|r| r.cum_bound).unwrap_or(1.0)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,p_t,range_i,exact_cond_prob,bound,holds,cumulative_exact,cumulative_bound")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.t, r.p_t, r.range_i, r.exact_cond, r.bound, r.holds, r.cum_exact, r.cum_bound
            )?;
        }
        Ok(())
    }
}

/// Run the full adversary pipeline for one policy: trace its probabilities
/// on the zero history, weight them over the partition, pick the range
/// minimizing the f-weighted mass under the log2(n)/4 cap, size the dense
/// region from it, and tabulate per-slot exact values against the bounds.
pub fn run_harness(
    n: u32,
    policy: &dyn InputDeterminedPolicy,
    t_max: u64,
    sparse: u64,
    trials: u64,
    seed: u64,
) -> Result<HarnessRun> {
    if t_max < 1 {
        return Err(Error::InvalidConfig("t_max must be >= 1".into()));
    }
    let partition = RangePartition::new(n)?;
    let zeros = vec![false; t_max.saturating_sub(1) as usize];
    let p_seq: Vec<f64> = (1..=t_max)
        .map(|t| policy.next_p(&zeros[..(t - 1) as usize], t, n))
        .collect();
    let w = weights(&p_seq, &partition)?;
    let j_cap = (ceil_log2(n) / 4) as usize;
    let (j, score) = select_j(&w, j_cap);
    let (j_uncapped, score_uncapped) = select_j(&w, partition.r);
    let delta = delta_from_j(n, j)?;
    let instance = build_two_region_instance(delta, sparse, 1.0, 4.0)?;
    let m = instance.m();
    let experiment = run_nt_experiment(&instance, policy, t_max, trials, seed, n);

    let mut rows = Vec::with_capacity(t_max as usize);
    let mut cum_bound = 1.0;
    for slot in &experiment.slots {
        let i = partition.index_of(slot.p_t)?;
        let check = per_slot_bound_check(slot.p_t, i, j, delta, sparse);
        cum_bound *= check.bound.max(0.0);
        rows.push(BoundRow {
            t: slot.t,
            p_t: slot.p_t,
            range_i: i,
            exact_cond: check.exact,
            bound: check.bound,
            holds: check.holds,
            cum_exact: slot.exact_cum,
            cum_bound,
        });
    }
    Ok(HarnessRun {
        n,
        policy: policy.describe(),
        partition,
        weights: w,
        j,
        score,
        j_uncapped,
        score_uncapped,
        delta,
        sparse,
        m,
        rows,
        experiment,
    })
}

/// The fixed probability used by the `fixed:auto` policy: the contention
/// level 1/delta matched to the densest region allowed under the cap.
pub fn auto_fixed_p(n: u32) -> Result<f64> {
    let j_cap = (ceil_log2(n) / 4) as usize;
    Ok(1.0 / delta_from_j(n, j_cap)? as f64)
}

// ----------------------------------------------------------------------
// Numeric claims used by the chain argument
// ----------------------------------------------------------------------

/// Count violations of `1 - x >= 16^(-x)` on a uniform grid over [0, 2/e].
pub fn calculus_claim_violations(grid_points: usize) -> u64 {
    let hi = 2.0 / std::f64::consts::E;
    (0..grid_points)
        .filter(|&k| {
            let x = hi * k as f64 / (grid_points - 1) as f64;
            1.0 - x < 16f64.powf(-x)
        })
        .count() as u64
}

/// Count violations of `m p (1-p)^(m-1) <= 2/e` at the analytic maximizer
/// p = 1/m over the given sizes.
pub fn single_tx_peak_violations(sizes: &[u64]) -> u64 {
    let cap = 2.0 / std::f64::consts::E;
    sizes
        .iter()
        .filter(|&&m| m >= 2 && exact_single_tx_prob(m, 1.0 / m as f64) > cap)
        .count() as u64
}

/// Log-spaced sizes 2..=max, deduplicated, for the peak check.
pub fn log_spaced_sizes(max: u64, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            (2f64 * (max as f64 / 2.0).powf(t)).round() as u64
        })
        .collect();
    out.dedup();
    out
}
