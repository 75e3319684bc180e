//! Slotted scheduler: advances global slots, asks awake nodes for transmit
//! decisions, resolves the channel, feeds observations back, detects
//! local-broadcast success and records the trace.
//!
//! One trial is single-threaded and fully deterministic: node `i`'s draw in
//! slot `t` is `rng::uniform(seed, id(i), t)`, independent of iteration
//! order. Independent trials can run in parallel with no shared state.
//!
//! Halted nodes keep listening (they can still decode and be counted as
//! receivers); shut-down nodes leave the system entirely.

use std::io::Write;

use crate::automaton::{AlgoVariant, HaltReason, NodeState, SlotFeedback};
use crate::channel::{lp_threshold, SlotOutcome};
use crate::model::{distance, InterferenceModel, NodeId, Point, Scenario};
use crate::rng;
use crate::{Error, Result};

/// Final per-node record of one run.
#[derive(Debug, Clone)]
pub struct NodeSummary {
    pub id: NodeId,
    pub wake: u64,
    /// Nodes in the transmission region, counting the node itself.
    pub n_x: u32,
    /// First slot in which the node transmitted and every eligible receiver
    /// decoded it.
    pub first_success: Option<u64>,
    pub halt_slot: Option<u64>,
    pub halt_reason: HaltReason,
    pub fallbacks: u32,
    pub transmissions: u64,
    pub slots_active: u64,
}

/// Ordered log of one run.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Per-slot channel outcomes; empty when the run was made in
    /// summary-only mode.
    pub outcomes: Vec<SlotOutcome>,
    /// Per-node summaries in scenario order.
    pub nodes: Vec<NodeSummary>,
    /// Slots actually simulated.
    pub slots_run: u64,
    /// True when `max_slots` elapsed with some node neither halted nor
    /// shut down.
    pub timed_out: bool,
}

impl Trace {
    pub fn node(&self, id: NodeId) -> Option<&NodeSummary> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

/// Which per-slot invariants to evaluate while running.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunChecks {
    /// Every low-power transmitter is decoded by every awake non-transmitter
    /// within twice its broadcast radius (SINR model only).
    pub delivery_2b: bool,
    /// Per-region transmit-probability mass stays at or below 1/2.
    pub mass: bool,
    /// No receiver has two decodable senders in one slot.
    pub decode_unique: bool,
    /// No two low-power transmitters share a broadcast region.
    pub lp_disjoint: bool,
}

impl RunChecks {
    pub fn all() -> Self {
        RunChecks { delivery_2b: true, mass: true, decode_unique: true, lp_disjoint: true }
    }
}

/// Violation counts accumulated by [`RunChecks`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Violations {
    pub delivery_2b: u64,
    pub mass: u64,
    pub decode_unique: u64,
    pub lp_disjoint: u64,
    /// Largest per-region probability mass seen in any slot.
    pub max_mass: f64,
    pub slots_checked: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.delivery_2b + self.mass + self.decode_unique + self.lp_disjoint
    }

    pub fn merge(&mut self, other: &Violations) {
        self.delivery_2b += other.delivery_2b;
        self.mass += other.mass;
        self.decode_unique += other.decode_unique;
        self.lp_disjoint += other.lp_disjoint;
        self.max_mass = self.max_mass.max(other.max_mass);
        self.slots_checked += other.slots_checked;
    }
}

/// Generous default slot budget: 64 (n_bound + log^2 n) log n. Hitting it
/// marks the trial as timed out.
pub fn default_max_slots(scn: &Scenario) -> u64 {
    let log_n = scn.consts().log_n as u64;
    64 * (scn.n_bound() as u64 + log_n * log_n) * log_n
}

/// Run one trial, recording every slot outcome.
pub fn run(scn: &Scenario, variant: AlgoVariant, seed: u64, max_slots: u64) -> Result<Trace> {
    Ok(run_with(scn, variant, seed, max_slots, true, RunChecks::default())?.0)
}

/// Run one trial with optional per-slot outcome recording and invariant
/// checks. Checks never alter the evolution, only count violations.
pub fn run_with(
    scn: &Scenario,
    variant: AlgoVariant,
    seed: u64,
    max_slots: u64,
    record: bool,
    checks: RunChecks,
) -> Result<(Trace, Violations)> {
    if max_slots < 1 {
        return Err(Error::InvalidConfig("max_slots must be >= 1".into()));
    }
    Engine::new(scn, variant, seed)?.run(max_slots, record, checks)
}

/// True iff `x` transmitted in this outcome and every eligible receiver
/// decoded its message. Transmitting receivers cannot decode, so any
/// eligible receiver that transmitted makes the slot unsuccessful.
pub fn success_in_slot(scn: &Scenario, x: NodeId, outcome: &SlotOutcome) -> Result<bool> {
    if !outcome.transmitters.contains(&x) {
        return Err(Error::InvalidConfig(format!("node {x} did not transmit in this slot")));
    }
    Ok(scn
        .eligible_receivers(x, outcome.slot)?
        .iter()
        .all(|y| outcome.decodes.get(y) == Some(&x)))
}

struct Engine {
    seed: u64,
    n: usize,
    // static geometry
    pos: Vec<Point>,
    ids: Vec<NodeId>,
    wake: Vec<u64>,
    shutdown: Vec<u64>,
    alpha: f64,
    noise: f64,
    beta: f64,
    lp_thresh: f64,
    r_b: f64,
    model: InterferenceModel,
    /// broadcast-region members excluding self (symmetric)
    b_members: Vec<Vec<u32>>,
    /// members of the doubled broadcast ball excluding self
    b2_members: Vec<Vec<u32>>,
    /// broadcast-region members owed delivery (wake-filtered; shutdown is
    /// checked per slot)
    eligible: Vec<Vec<u32>>,
    n_x: Vec<u32>,
    // dynamic state
    states: Vec<NodeState>,
    /// awake and not halted: runs the automaton
    active: Vec<bool>,
    /// awake (possibly halted): listens and measures
    listening: Vec<bool>,
    p_live: Vec<f64>,
    mass: Vec<f64>,
    first_success: Vec<Option<u64>>,
    halt_slot: Vec<Option<u64>>,
    tx_count: Vec<u64>,
    done: usize,
}

impl Engine {
    fn new(scn: &Scenario, variant: AlgoVariant, seed: u64) -> Result<Self> {
        let n = scn.len();
        let pos: Vec<Point> = scn.nodes().iter().map(|s| s.pos).collect();
        let ids: Vec<NodeId> = scn.nodes().iter().map(|s| s.id).collect();
        let wake: Vec<u64> = scn.nodes().iter().map(|s| s.wake).collect();
        let shutdown: Vec<u64> = scn.nodes().iter().map(|s| s.shutdown_or_max()).collect();
        let phys = scn.phys();
        let r_b = scn.broadcast_radius();
        let r_t = match scn.model() {
            InterferenceModel::Sinr => phys.r_t,
            InterferenceModel::Protocol { r_t, .. } => r_t,
        };
        let mut b_members = vec![Vec::new(); n];
        let mut b2_members = vec![Vec::new(); n];
        let mut n_x = vec![1u32; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(pos[i], pos[j]);
                if d <= r_b {
                    b_members[i].push(j as u32);
                    b_members[j].push(i as u32);
                }
                if d <= 2.0 * r_b {
                    b2_members[i].push(j as u32);
                    b2_members[j].push(i as u32);
                }
                if d <= r_t {
                    n_x[i] += 1;
                    n_x[j] += 1;
                }
            }
        }
        let eligible: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                b_members[i]
                    .iter()
                    .copied()
                    .filter(|&j| wake[j as usize] <= wake[i])
                    .collect()
            })
            .collect();
        let states = vec![NodeState::new(variant, scn.consts()); n];
        Ok(Engine {
            seed,
            n,
            pos,
            ids,
            wake,
            shutdown,
            alpha: phys.alpha,
            noise: phys.noise,
            beta: phys.beta,
            lp_thresh: lp_threshold(phys),
            r_b,
            model: scn.model(),
            b_members,
            b2_members,
            eligible,
            n_x,
            states,
            active: vec![false; n],
            listening: vec![false; n],
            p_live: vec![0.0; n],
            mass: vec![0.0; n],
            first_success: vec![None; n],
            halt_slot: vec![None; n],
            tx_count: vec![0; n],
            done: 0,
        })
    }

    #[inline]
    fn gain(&self, from: usize, to: usize) -> f64 {
        let d = distance(self.pos[from], self.pos[to]);
        1.0 / d.powf(self.alpha)
    }

    /// Change node `i`'s live probability, updating every region mass that
    /// contains it.
    fn set_p_live(&mut self, i: usize, new_p: f64) {
        let delta = new_p - self.p_live[i];
        if delta != 0.0 {
            self.mass[i] += delta;
            // split borrows: membership list is static
            let members = std::mem::take(&mut self.b_members[i]);
            for &h in &members {
                self.mass[h as usize] += delta;
            }
            self.b_members[i] = members;
            self.p_live[i] = new_p;
        }
    }

    fn recompute_masses(&mut self) {
        for x in 0..self.n {
            let mut m = self.p_live[x];
            for &y in &self.b_members[x] {
                m += self.p_live[y as usize];
            }
            self.mass[x] = m;
        }
    }

    // parallel-array state makes index loops the clearest form here
    #[allow(clippy::needless_range_loop)]
    fn run(mut self, max_slots: u64, record: bool, checks: RunChecks) -> Result<(Trace, Violations)> {
        let mut violations = Violations::default();
        let mut outcomes = Vec::new();
        let mut tx: Vec<u32> = Vec::new();
        let mut is_tx = vec![false; self.n];
        let mut rx_tot = vec![0.0f64; self.n];
        let mut decode_of: Vec<Option<u32>> = vec![None; self.n];
        let mut gains: Vec<f64> = Vec::new();
        let mut slots_run = 0u64;

        for t in 0..max_slots {
            // wake / shutdown events
            for i in 0..self.n {
                if self.wake[i] == t {
                    self.listening[i] = true;
                    self.active[i] = true;
                    self.set_p_live(i, self.states[i].p);
                }
                if self.shutdown[i] == t && self.listening[i] {
                    self.listening[i] = false;
                    if self.active[i] {
                        self.active[i] = false;
                        self.set_p_live(i, 0.0);
                        self.done += 1; // left without halting
                    }
                }
            }
            if self.done == self.n {
                break;
            }
            slots_run = t + 1;

            // transmit decisions; the budget may halt a node here, which is
            // reconciled after the feedback phase
            tx.clear();
            for i in 0..self.n {
                if self.active[i] {
                    let u = rng::uniform(self.seed, self.ids[i].0 as u64, t);
                    let fired = self.states[i]
                        .decide_transmit(u)
                        .expect("active node cannot be halted");
                    if fired {
                        tx.push(i as u32);
                        is_tx[i] = true;
                        self.tx_count[i] += 1;
                    }
                }
            }

            // probability-mass invariant, evaluated on the values the draws
            // above actually used
            if checks.mass {
                violations.slots_checked += 1;
                for x in 0..self.n {
                    if self.mass[x] > violations.max_mass {
                        violations.max_mass = self.mass[x];
                    }
                    if self.mass[x] > 0.5 + 1e-9 {
                        violations.mass += 1;
                    }
                }
            }

            // channel resolution
            let lp_all = tx.is_empty();
            if !lp_all {
                for v in 0..self.n {
                    if !self.listening[v] {
                        continue;
                    }
                    gains.clear();
                    let mut total = 0.0;
                    for &w in &tx {
                        let g = if w as usize == v { 0.0 } else { self.gain(w as usize, v) };
                        gains.push(g);
                        total += g;
                    }
                    rx_tot[v] = total;
                    decode_of[v] = None;
                    if is_tx[v] {
                        continue; // transmitters never decode
                    }
                    match self.model {
                        InterferenceModel::Sinr => {
                            let mut winner = None;
                            for (k, &w) in tx.iter().enumerate() {
                                let sig = gains[k];
                                if sig / (self.noise + (total - sig)) >= self.beta {
                                    if winner.is_some() {
                                        if checks.decode_unique {
                                            violations.decode_unique += 1;
                                        }
                                    } else {
                                        winner = Some(w);
                                    }
                                }
                            }
                            decode_of[v] = winner;
                        }
                        InterferenceModel::Protocol { r_t, r_i } => {
                            let mut in_ri = 0u32;
                            let mut candidate = None;
                            for &w in &tx {
                                let d = distance(self.pos[w as usize], self.pos[v]);
                                if d <= r_i {
                                    in_ri += 1;
                                }
                                if d <= r_t {
                                    candidate = Some(w);
                                }
                            }
                            if in_ri == 1 {
                                decode_of[v] = candidate;
                            }
                        }
                    }
                }
            }

            // local-broadcast success detection
            for &x in &tx {
                let xi = x as usize;
                if self.first_success[xi].is_some() {
                    continue;
                }
                let ok = self.eligible[xi].iter().all(|&y| {
                    let yi = y as usize;
                    self.shutdown[yi] <= t || decode_of[yi] == Some(x)
                });
                if ok {
                    self.first_success[xi] = Some(t);
                }
            }

            // delivery within the doubled broadcast ball (SINR only): a
            // low-power transmitter must reach every awake non-transmitter
            // there, by direct evaluation of the decode inequality
            if checks.delivery_2b && !lp_all && self.model == InterferenceModel::Sinr {
                for &x in &tx {
                    let xi = x as usize;
                    if rx_tot[xi] > self.lp_thresh {
                        continue;
                    }
                    for &y in &self.b2_members[xi] {
                        let yi = y as usize;
                        if !self.listening[yi] || is_tx[yi] {
                            continue;
                        }
                        let sig = self.gain(xi, yi);
                        let interference = rx_tot[yi] - sig;
                        if sig / (self.noise + interference) < self.beta {
                            violations.delivery_2b += 1;
                        }
                    }
                }
            }

            // no two low-power transmitters inside one broadcast region
            if checks.lp_disjoint && !lp_all {
                for (a_k, &a) in tx.iter().enumerate() {
                    if rx_tot[a as usize] > self.lp_thresh {
                        continue;
                    }
                    for &b in &tx[a_k + 1..] {
                        if rx_tot[b as usize] > self.lp_thresh {
                            continue;
                        }
                        let (ai, bi) = (a as usize, b as usize);
                        if distance(self.pos[ai], self.pos[bi]) > 2.0 * self.r_b {
                            continue;
                        }
                        let shared = (0..self.n).any(|z| {
                            distance(self.pos[ai], self.pos[z]) <= self.r_b
                                && distance(self.pos[bi], self.pos[z]) <= self.r_b
                        });
                        if shared {
                            violations.lp_disjoint += 1;
                        }
                    }
                }
            }

            // feedback and reconciliation
            for i in 0..self.n {
                if !self.active[i] {
                    continue;
                }
                let fb = SlotFeedback {
                    decoded: decode_of[i].is_some(),
                    low_power_while_tx: is_tx[i] && (lp_all || rx_tot[i] <= self.lp_thresh),
                };
                self.states[i].observe(fb);
                if self.states[i].halted {
                    self.halt_slot[i] = Some(t);
                    self.active[i] = false;
                    self.set_p_live(i, 0.0);
                    self.done += 1;
                } else if self.states[i].p != self.p_live[i] {
                    self.set_p_live(i, self.states[i].p);
                }
            }

            if record {
                let mut outcome = SlotOutcome {
                    slot: t,
                    transmitters: tx.iter().map(|&i| self.ids[i as usize]).collect(),
                    ..Default::default()
                };
                outcome.transmitters.sort_unstable();
                for v in 0..self.n {
                    if !self.listening[v] {
                        continue;
                    }
                    let p = if lp_all { 0.0 } else { rx_tot[v] };
                    outcome.rx_power.insert(self.ids[v], p);
                    if p <= self.lp_thresh {
                        outcome.low_power.push(self.ids[v]);
                    }
                    if let Some(s) = decode_of[v] {
                        outcome.decodes.insert(self.ids[v], self.ids[s as usize]);
                    }
                }
                outcome.low_power.sort_unstable();
                outcomes.push(outcome);
            }

            // clear per-slot scratch
            for &x in &tx {
                is_tx[x as usize] = false;
            }
            if !lp_all {
                decode_of.fill(None);
            }

            // wash accumulated float drift out of the incremental masses
            if checks.mass && t % 8192 == 8191 {
                self.recompute_masses();
            }
        }

        // the loop breaks as soon as every node has halted or shut down;
        // exhausting max_slots with stragglers is a timeout
        let timed_out = self.done < self.n;
        let nodes = (0..self.n)
            .map(|i| NodeSummary {
                id: self.ids[i],
                wake: self.wake[i],
                n_x: self.n_x[i],
                first_success: self.first_success[i],
                halt_slot: self.halt_slot[i],
                halt_reason: self.states[i].halt_reason,
                fallbacks: self.states[i].fallback_count,
                transmissions: self.tx_count[i],
                slots_active: self.states[i].slots_active,
            })
            .collect();
        Ok((Trace { outcomes, nodes, slots_run, timed_out }, violations))
    }
}

// ----------------------------------------------------------------------
// Export formats
// ----------------------------------------------------------------------

/// Write a trace as JSONL: one record per slot, then one summary record per
/// node. Hand-formatted so output is byte-deterministic.
pub fn write_trace_jsonl<W: Write>(trace: &Trace, out: &mut W) -> Result<()> {
    for o in &trace.outcomes {
        write!(out, "{{\"t\":{},\"tx\":[", o.slot)?;
        for (k, id) in o.transmitters.iter().enumerate() {
            if k > 0 {
                write!(out, ",")?;
            }
            write!(out, "{id}")?;
        }
        write!(out, "],\"decodes\":{{")?;
        for (k, (rx, tx)) in o.decodes.iter().enumerate() {
            if k > 0 {
                write!(out, ",")?;
            }
            write!(out, "\"{rx}\":{tx}")?;
        }
        write!(out, "}},\"lp\":[")?;
        for (k, id) in o.low_power.iter().enumerate() {
            if k > 0 {
                write!(out, ",")?;
            }
            write!(out, "{id}")?;
        }
        writeln!(out, "]}}")?;
    }
    for s in &trace.nodes {
        write!(out, "{{\"node\":{},\"first_success\":", s.id)?;
        match s.first_success {
            Some(v) => write!(out, "{v}")?,
            None => write!(out, "null")?,
        }
        write!(out, ",\"halt_slot\":")?;
        match s.halt_slot {
            Some(v) => write!(out, "{v}")?,
            None => write!(out, "null")?,
        }
        writeln!(
            out,
            ",\"halt_reason\":\"{}\",\"fallbacks\":{},\"N_x\":{}}}",
            s.halt_reason.name(),
            s.fallbacks,
            s.n_x
        )?;
    }
    Ok(())
}

/// Summary CSV header used by sweeps.
pub const SUMMARY_CSV_HEADER: &str = "node_id,n,N_x,wake,halt,first_success,reason,fallbacks";

/// Append one run's per-node rows to a summary CSV body.
pub fn write_summary_csv_rows<W: Write>(trace: &Trace, n_bound: u32, out: &mut W) -> Result<()> {
    for s in &trace.nodes {
        let halt = s.halt_slot.map(|v| v.to_string()).unwrap_or_default();
        let fs = s.first_success.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.id,
            n_bound,
            s.n_x,
            s.wake,
            halt,
            fs,
            s.halt_reason.name(),
            s.fallbacks
        )?;
    }
    Ok(())
}
