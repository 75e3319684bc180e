//! Per-node transmit automata.
//!
//! Both variants run the same loop: transmit with probability `p`, add `p` to
//! an accumulated total every slot, halt once the total exceeds the budget
//! `gamma * log n`. Receptions increment a counter; more than `log n` of them
//! trigger a fallback that divides `p` by 32 (floored at `1/(128 n)`) and
//! restarts the inner loop. Absent fallbacks, `p` doubles once per
//! `delta * log n` slots, capped at `1/16`. The second variant additionally
//! halts as soon as it transmits while the low-power event holds at its own
//! receiver, which certifies delivery to its whole broadcast region.
//!
//! The nested listing is flattened into a single-slot step pair
//! ([`NodeState::decide_transmit`] then [`NodeState::observe`]). The stored
//! `p` is always the value used for the next draw, i.e. the clamp and the
//! doubling that open an outer iteration are applied eagerly. A fresh node
//! therefore starts at `min(1/16, 2 * max(1/(128 n), 1/(4 n) / 32))`
//! = `1/(64 n)` for any `n >= 1`.

use crate::model::AlgoConsts;
use crate::{Error, Result};

/// Hard upper clamp on the transmission probability.
pub const P_CAP: f64 = 1.0 / 16.0;

/// Which algorithm a node runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoVariant {
    /// Budget halting only; no channel feedback beyond message reception.
    Alg1,
    /// Additionally halts on a transmission made under low received power.
    Alg2,
}

impl AlgoVariant {
    pub fn name(self) -> &'static str {
        match self {
            AlgoVariant::Alg1 => "alg1",
            AlgoVariant::Alg2 => "alg2",
        }
    }
}

impl std::str::FromStr for AlgoVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(AlgoVariant::Alg1),
            "alg2" => Ok(AlgoVariant::Alg2),
            other => Err(Error::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

/// Why a node halted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HaltReason {
    /// Still running, shut down, or timed out.
    #[default]
    None,
    /// Accumulated transmission probability exceeded gamma * log n.
    Budget,
    /// Transmitted while the low-power event held (variant 2 only).
    LowPowerSuccess,
}

impl HaltReason {
    pub fn name(self) -> &'static str {
        match self {
            HaltReason::None => "none",
            HaltReason::Budget => "budget",
            HaltReason::LowPowerSuccess => "low_power_success",
        }
    }
}

/// What one node learns at the end of a slot.
#[derive(Debug, Clone, Copy, Default)]
pub struct SlotFeedback {
    /// Did this node decode a message this slot? (At most one decode per
    /// slot is possible, so a boolean suffices.)
    pub decoded: bool,
    /// Did the low-power event hold while this node transmitted? Only
    /// meaningful when the node transmitted this slot.
    pub low_power_while_tx: bool,
}

/// One node's automaton state.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub variant: AlgoVariant,
    /// Transmit probability used for the next slot's draw.
    pub p: f64,
    /// Accumulated transmission probability; non-decreasing.
    pub tp: f64,
    /// Receptions since the last fallback.
    pub rc: u32,
    /// Completed slots in the current inner block of `delta * log n`.
    pub inner_j: u64,
    pub halted: bool,
    pub halt_reason: HaltReason,
    pub fallback_count: u32,
    /// Slots this node has stepped through.
    pub slots_active: u64,
    // cached constants
    p_floor: f64,
    block_len: u64,
    budget: f64,
    log_n: u32,
}

impl NodeState {
    /// Fresh automaton, positioned just after the outer-loop prologue: the
    /// stored `p` already carries the initial clamp and the first doubling.
    pub fn new(variant: AlgoVariant, consts: &AlgoConsts) -> Self {
        // line order: clamp the stored 1/(4n), then the opening doubling.
        // p_init / 32 = 1/(128 n) = p_floor exactly, so the clamp is a tie.
        let clamped = (consts.p_init() / 32.0).max(consts.p_floor());
        let p = (2.0 * clamped).min(P_CAP);
        NodeState {
            variant,
            p,
            tp: 0.0,
            rc: 0,
            inner_j: 0,
            halted: false,
            halt_reason: HaltReason::None,
            fallback_count: 0,
            slots_active: 0,
            p_floor: consts.p_floor(),
            block_len: consts.block_len(),
            budget: consts.budget(),
            log_n: consts.log_n,
        }
    }

    /// Draw the slot's transmit decision from a uniform `[0,1)` sample and
    /// charge `p` against the halting budget. The budget is charged whether
    /// or not the draw fires. Calling this on a halted automaton is an error.
    pub fn decide_transmit(&mut self, u: f64) -> Result<bool> {
        if self.halted {
            return Err(Error::SteppedAfterHalt);
        }
        self.slots_active += 1;
        let transmit = u < self.p;
        self.tp += self.p;
        if self.tp > self.budget {
            self.halted = true;
            self.halt_reason = HaltReason::Budget;
        }
        Ok(transmit)
    }

    /// Apply the slot's feedback.
    ///
    /// For variant 2, a transmission under low power halts the node and takes
    /// precedence over a budget halt fired by `decide_transmit` in the same
    /// slot. A budget halt suppresses the reception processing of its own
    /// slot, matching the listing where the halt fires before the
    /// message-received check.
    pub fn observe(&mut self, fb: SlotFeedback) {
        if self.variant == AlgoVariant::Alg2 && fb.low_power_while_tx {
            self.halted = true;
            self.halt_reason = HaltReason::LowPowerSuccess;
            return;
        }
        if self.halted {
            return;
        }
        if fb.decoded {
            self.rc += 1;
            if self.rc > self.log_n {
                self.fall_back();
                return;
            }
        }
        self.inner_j += 1;
        if self.inner_j == self.block_len {
            self.inner_j = 0;
            self.p = (2.0 * self.p).min(P_CAP);
        }
    }

    /// Reception-triggered reset: divide `p` by 32 (floored), zero the
    /// reception counter, and re-enter the inner loop, whose opening doubling
    /// is applied eagerly.
    fn fall_back(&mut self) {
        self.p = (self.p / 32.0).max(self.p_floor);
        self.rc = 0;
        self.p = (2.0 * self.p).min(P_CAP);
        self.inner_j = 0;
        self.fallback_count += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn consts(n_bound: u32) -> AlgoConsts {
        AlgoConsts::new(16, 8.0, n_bound).unwrap()
    }

    #[test]
    fn first_slot_probability_n256() {
        // stored 1/(4*256) = 1/1024, clamp max(1/32768, 1/32768), double:
        let s = NodeState::new(AlgoVariant::Alg1, &consts(256));
        assert_eq!(s.p, 1.0 / 16384.0);
        assert_eq!(s.tp, 0.0);
        assert_eq!(s.rc, 0);
        assert!(!s.halted);
    }

    #[test]
    fn first_slot_probability_n2() {
        let s = NodeState::new(AlgoVariant::Alg1, &consts(2));
        assert_eq!(s.p, 1.0 / 128.0);
    }

    #[test]
    fn alg2_starts_with_zero_accumulated_probability() {
        let s = NodeState::new(AlgoVariant::Alg2, &consts(256));
        assert_eq!(s.tp, 0.0);
    }

    #[test]
    fn forced_draw_below_p_transmits() {
        let mut s = NodeState::new(AlgoVariant::Alg1, &consts(2));
        s.p = 1.0 / 16.0;
        assert!(s.decide_transmit(0.0624).unwrap());
        let mut s2 = NodeState::new(AlgoVariant::Alg1, &consts(2));
        s2.p = 1.0 / 16.0;
        assert!(!s2.decide_transmit(0.0625).unwrap());
    }

    #[test]
    fn budget_halt_fires_when_tp_crosses() {
        let c = consts(2); // budget = 8 * 1 = 8
        let mut s = NodeState::new(AlgoVariant::Alg1, &c);
        s.tp = c.budget() - s.p / 2.0;
        assert!(!s.halted);
        let _ = s.decide_transmit(0.9).unwrap();
        assert!(s.halted);
        assert_eq!(s.halt_reason, HaltReason::Budget);
        // stepping after halt is an error
        assert!(matches!(s.decide_transmit(0.5), Err(Error::SteppedAfterHalt)));
    }

    #[test]
    fn empirical_transmit_rate_matches_p() {
        let mut s = NodeState::new(AlgoVariant::Alg1, &consts(1 << 20));
        s.p = 1.0 / 64.0;
        s.budget = f64::INFINITY;
        let n = 1_000_000u64;
        let mut fired = 0u64;
        for c in 0..n {
            if s.decide_transmit(rng::uniform(7, 0, c)).unwrap() {
                fired += 1;
            }
            s.inner_j = 0; // hold p fixed
        }
        let p = 1.0 / 64.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let diff = fired as f64 - n as f64 * p;
        assert!(diff.abs() < 5.0 * sigma, "fired {fired}, diff {diff}, sigma {sigma}");
    }

    #[test]
    fn fallback_clamp_arithmetic() {
        // p = 1/16, fallback at n_bound = 2: clamp max(1/256, 1/512) = 1/256,
        // next-slot effective p = min(1/16, 1/128) = 1/128
        let c = consts(2);
        let mut s = NodeState::new(AlgoVariant::Alg1, &c);
        s.p = 1.0 / 16.0;
        s.rc = c.log_n; // log_n receptions so far
        s.observe(SlotFeedback { decoded: true, low_power_while_tx: false });
        assert_eq!(s.p, 1.0 / 128.0);
        assert_eq!(s.rc, 0);
        assert_eq!(s.fallback_count, 1);
        assert_eq!(s.inner_j, 0);
    }

    #[test]
    fn fallback_requires_strictly_more_than_log_n_receptions() {
        let c = consts(256); // log_n = 8
        let mut s = NodeState::new(AlgoVariant::Alg1, &c);
        for k in 1..=c.log_n {
            s.observe(SlotFeedback { decoded: true, low_power_while_tx: false });
            assert_eq!(s.rc, k);
            assert_eq!(s.fallback_count, 0);
        }
        // the (log_n + 1)-th reception trips the fallback
        s.observe(SlotFeedback { decoded: true, low_power_while_tx: false });
        assert_eq!(s.rc, 0);
        assert_eq!(s.fallback_count, 1);
    }

    #[test]
    fn doubling_after_each_full_block() {
        let c = consts(256); // block = 16 * 8 = 128 slots
        let mut s = NodeState::new(AlgoVariant::Alg1, &c);
        s.p = 1.0 / 1024.0;
        for _ in 0..c.block_len() {
            s.observe(SlotFeedback::default());
        }
        assert_eq!(s.p, 1.0 / 512.0);
        // a partial block does not double
        for _ in 0..c.block_len() - 1 {
            s.observe(SlotFeedback::default());
        }
        assert_eq!(s.p, 1.0 / 512.0);
        s.observe(SlotFeedback::default());
        assert_eq!(s.p, 1.0 / 256.0);
    }

    #[test]
    fn p_stays_within_clamps_under_random_feedback() {
        let c = consts(64);
        let mut s = NodeState::new(AlgoVariant::Alg1, &c);
        s.budget = f64::INFINITY;
        for k in 0..200_000u64 {
            let _ = s.decide_transmit(rng::uniform(3, 1, k)).unwrap();
            let decoded = rng::uniform(3, 2, k) < 0.3;
            s.observe(SlotFeedback { decoded, low_power_while_tx: false });
            assert!(s.p >= c.p_floor() && s.p <= P_CAP, "p = {} out of range", s.p);
            assert!(s.rc <= c.log_n);
        }
        assert!(s.fallback_count > 0);
    }

    #[test]
    fn doubling_cadence_between_fallbacks() {
        // between consecutive fallbacks p doubles exactly once per block:
        // track p over one inter-fallback stretch with no receptions
        let c = consts(256);
        let mut s = NodeState::new(AlgoVariant::Alg1, &c);
        s.budget = f64::INFINITY;
        let p0 = s.p;
        let blocks = 3;
        for _ in 0..blocks * c.block_len() {
            s.observe(SlotFeedback::default());
        }
        assert_eq!(s.p, p0 * 8.0); // 2^3
    }

    #[test]
    fn alg2_low_power_transmission_halts_and_beats_budget() {
        let c = consts(4);
        let mut s = NodeState::new(AlgoVariant::Alg2, &c);
        // drive tp to the brink so the same slot also crosses the budget
        s.tp = c.budget() - s.p / 2.0;
        let _ = s.decide_transmit(0.0).unwrap(); // transmits; budget halt fires
        assert!(s.halted);
        assert_eq!(s.halt_reason, HaltReason::Budget);
        s.observe(SlotFeedback { decoded: false, low_power_while_tx: true });
        assert_eq!(s.halt_reason, HaltReason::LowPowerSuccess);
        // variant 1 ignores the flag
        let mut s1 = NodeState::new(AlgoVariant::Alg1, &c);
        s1.observe(SlotFeedback { decoded: false, low_power_while_tx: true });
        assert!(!s1.halted);
    }

    #[test]
    fn budget_halt_suppresses_same_slot_reception() {
        let c = consts(4);
        let mut s = NodeState::new(AlgoVariant::Alg1, &c);
        s.tp = c.budget();
        let _ = s.decide_transmit(0.9).unwrap();
        assert!(s.halted);
        s.observe(SlotFeedback { decoded: true, low_power_while_tx: false });
        assert_eq!(s.rc, 0, "reception after the budget halt must not count");
    }

    #[test]
    fn expected_transmissions_track_gamma_log_n() {
        // run isolated automata to their budget halt; the transmission count
        // concentrates around gamma * log n = 64
        let c = consts(256);
        let mut counts = Vec::new();
        for seed in 0..40u64 {
            let mut s = NodeState::new(AlgoVariant::Alg1, &c);
            let mut sent = 0u64;
            let mut slot = 0u64;
            while !s.halted {
                if s.decide_transmit(rng::uniform(17, seed, slot)).unwrap() {
                    sent += 1;
                }
                if !s.halted {
                    s.observe(SlotFeedback::default());
                }
                slot += 1;
            }
            counts.push(sent);
        }
        let expect = c.budget(); // 64
        for &sent in &counts {
            assert!(
                (sent as f64) >= expect / 2.0 - 3.0 * expect.sqrt()
                    && (sent as f64) <= 2.0 * expect,
                "transmissions {sent} outside the expected band around {expect}"
            );
        }
    }
}
