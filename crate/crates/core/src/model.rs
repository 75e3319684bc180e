//! Geometric primitives, physical parameters, scenario representation and
//! neighborhood queries.
//!
//! All region queries use closed balls: a node at distance exactly `r` from
//! the center is a member. Radii are derived once when parameters are built,
//! never recomputed per query.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in the plane, in length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        distance(self, other)
    }
}

/// Euclidean distance between two points.
#[inline]
pub fn distance(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    (dx * dx + dy * dy).sqrt()
}

/// Physical-layer parameters with the derived transmission and broadcast
/// radii. Transmit power is fixed at 1 and all other quantities are scaled
/// accordingly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Path-loss exponent, > 2.
    pub alpha: f64,
    /// Required SINR level, >= 1.
    pub beta: f64,
    /// Ambient noise power, > 0.
    pub noise: f64,
    /// Broadcast fraction, 0 < phi <= 1/6.
    pub phi: f64,
    /// Transmit power; fixed at 1.
    pub power: f64,
    /// Transmission radius, (noise * beta)^(-1/alpha).
    pub r_t: f64,
    /// Broadcast radius, phi * r_t.
    pub r_b: f64,
}

impl PhysParams {
    pub fn new(alpha: f64, beta: f64, noise: f64, phi: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(Error::InvalidScenario(format!("alpha must be > 2, got {alpha}")));
        }
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::InvalidScenario(format!("beta must be >= 1, got {beta}")));
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::InvalidScenario(format!("noise must be > 0, got {noise}")));
        }
        if !(phi.is_finite() && phi > 0.0 && phi <= 1.0 / 6.0) {
            return Err(Error::InvalidScenario(format!("phi must be in (0, 1/6], got {phi}")));
        }
        let r_t = (noise * beta).powf(-1.0 / alpha);
        let r_b = phi * r_t;
        Ok(PhysParams { alpha, beta, noise, phi, power: 1.0, r_t, r_b })
    }
}

impl Default for PhysParams {
    /// alpha = 3, beta = 2, noise = 1/2, phi = 1/6, which makes r_t = 1
    /// exactly and r_b = 1/6.
    fn default() -> Self {
        PhysParams::new(3.0, 2.0, 0.5, 1.0 / 6.0).unwrap()
    }
}

/// Which interference oracle decides message reception.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceModel {
    /// Physical model: decode iff signal / (noise + interference) >= beta.
    Sinr,
    /// Graph-style model: decode iff the sender is within `r_t` of the
    /// receiver and every other transmitter is farther than `r_i` from it.
    Protocol { r_t: f64, r_i: f64 },
}

/// Algorithm constants shared by every node, plus the derived quantities the
/// automata need. `log_n` is always `max(1, ceil(log2 n_bound))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoConsts {
    /// Inner-loop length multiplier, >= 1.
    pub delta: u32,
    /// Halting budget multiplier, >= 1.
    pub gamma: f64,
    /// Crude upper bound on the number of nodes, known to every node.
    pub n_bound: u32,
    /// ceil(log2 n_bound), at least 1.
    pub log_n: u32,
}

impl AlgoConsts {
    pub const DEFAULT_DELTA: u32 = 16;
    /// Calibrated so that realized fallback counts stay within the frozen
    /// acceptance ratios; see the fallback-count checks in the acceptance
    /// suite.
    pub const DEFAULT_GAMMA: f64 = 4.0;

    pub fn new(delta: u32, gamma: f64, n_bound: u32) -> Result<Self> {
        if delta < 1 {
            return Err(Error::InvalidScenario("delta must be >= 1".into()));
        }
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidScenario(format!("gamma must be >= 1, got {gamma}")));
        }
        if n_bound < 1 {
            return Err(Error::InvalidScenario("n_bound must be >= 1".into()));
        }
        Ok(AlgoConsts { delta, gamma, n_bound, log_n: ceil_log2(n_bound).max(1) })
    }

    /// Slots per inner loop: delta * log_n.
    pub fn block_len(&self) -> u64 {
        self.delta as u64 * self.log_n as u64
    }

    /// Accumulated-probability halting budget: gamma * log_n.
    pub fn budget(&self) -> f64 {
        self.gamma * self.log_n as f64
    }

    /// Lower clamp on the transmission probability: 1 / (128 n).
    pub fn p_floor(&self) -> f64 {
        1.0 / (128.0 * self.n_bound as f64)
    }

    /// Initial stored probability before the first clamp/double: 1 / (4 n).
    pub fn p_init(&self) -> f64 {
        1.0 / (4.0 * self.n_bound as f64)
    }
}

/// ceil(log2 n) for n >= 1; 0 for n = 1.
pub fn ceil_log2(n: u32) -> u32 {
    match n {
        0 | 1 => 0,
        _ => 32 - (n - 1).leading_zeros(),
    }
}

/// Node identity as it appears in scenario files.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// One node's static description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSpec {
    pub id: NodeId,
    pub pos: Point,
    /// First slot in which the node participates.
    pub wake: u64,
    /// First slot in which the node no longer participates; `None` = never.
    pub shutdown: Option<u64>,
}

impl NodeSpec {
    /// Shutdown slot with `None` mapped to `u64::MAX`.
    pub fn shutdown_or_max(&self) -> u64 {
        self.shutdown.unwrap_or(u64::MAX)
    }
}

/// A validated, immutable problem instance. Safe to share read-only across
/// parallel trial workers.
#[derive(Debug, Clone)]
pub struct Scenario {
    nodes: Vec<NodeSpec>,
    phys: PhysParams,
    model: InterferenceModel,
    n_bound: u32,
    consts: AlgoConsts,
    index: HashMap<NodeId, usize>,
}

impl Scenario {
    pub fn new(
        nodes: Vec<NodeSpec>,
        phys: PhysParams,
        model: InterferenceModel,
        n_bound: u32,
        delta: u32,
        gamma: f64,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidScenario("scenario has no nodes".into()));
        }
        if (n_bound as usize) < nodes.len() {
            return Err(Error::InvalidScenario(format!(
                "n_bound {} is below the node count {}",
                n_bound,
                nodes.len()
            )));
        }
        if let InterferenceModel::Protocol { r_t, r_i } = model {
            if !(r_t.is_finite() && r_i.is_finite() && r_t > 0.0 && r_i >= r_t) {
                return Err(Error::InvalidScenario(format!(
                    "protocol radii must satisfy 0 < r_t <= r_i, got r_t={r_t}, r_i={r_i}"
                )));
            }
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if !(node.pos.x.is_finite() && node.pos.y.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "node {} has a non-finite coordinate",
                    node.id
                )));
            }
            if node.shutdown_or_max() <= node.wake {
                return Err(Error::InvalidScenario(format!(
                    "node {} shuts down at {} without waking (wake {})",
                    node.id,
                    node.shutdown.unwrap(),
                    node.wake
                )));
            }
            if index.insert(node.id, i).is_some() {
                return Err(Error::InvalidScenario(format!("duplicate node id {}", node.id)));
            }
        }
        // Co-located pairs (distance exactly zero) are rejected at load time:
        // they make the received-power sum singular. Exact-zero distance means
        // bit-equal coordinates, so a sort finds all offenders.
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| {
            (nodes[a].pos.x, nodes[a].pos.y)
                .partial_cmp(&(nodes[b].pos.x, nodes[b].pos.y))
                .unwrap()
        });
        for w in order.windows(2) {
            let (a, b) = (&nodes[w[0]], &nodes[w[1]]);
            if distance(a.pos, b.pos) == 0.0 {
                return Err(Error::Colocated(a.id.0, b.id.0));
            }
        }
        let consts = AlgoConsts::new(delta, gamma, n_bound)?;
        Ok(Scenario { nodes, phys, model, n_bound, consts, index })
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn phys(&self) -> &PhysParams {
        &self.phys
    }

    pub fn model(&self) -> InterferenceModel {
        self.model
    }

    pub fn n_bound(&self) -> u32 {
        self.n_bound
    }

    pub fn consts(&self) -> &AlgoConsts {
        &self.consts
    }

    /// Dense index of a node id.
    pub fn index_of(&self, id: NodeId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id.0))
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeSpec> {
        Ok(&self.nodes[self.index_of(id)?])
    }

    /// All nodes other than `x` within the closed ball of `radius` around
    /// `x`, sorted by id. With `radius = r_t` this is the transmission region
    /// minus `x` itself, with `r_b` the broadcast region minus `x`.
    pub fn region_members(&self, x: NodeId, radius: f64) -> Result<Vec<NodeId>> {
        let xi = self.index_of(x)?;
        let center = self.nodes[xi].pos;
        let mut out: Vec<NodeId> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, n)| *i != xi && distance(center, n.pos) <= radius)
            .map(|(_, n)| n.id)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Number of nodes in the transmission region of `x`, counting `x`.
    pub fn n_x(&self, x: NodeId) -> Result<usize> {
        let r_t = match self.model {
            InterferenceModel::Sinr => self.phys.r_t,
            InterferenceModel::Protocol { r_t, .. } => r_t,
        };
        Ok(self.region_members(x, r_t)?.len() + 1)
    }

    /// Broadcast-region members that `x` owes delivery to in `slot`: nodes
    /// that woke no later than `x` (ties owe each other) and have not shut
    /// down by `slot`.
    pub fn eligible_receivers(&self, x: NodeId, slot: u64) -> Result<Vec<NodeId>> {
        let xi = self.index_of(x)?;
        let x_wake = self.nodes[xi].wake;
        let r_b = self.broadcast_radius();
        let mut out: Vec<NodeId> = self
            .region_members(x, r_b)?
            .into_iter()
            .filter(|&y| {
                let ys = &self.nodes[self.index[&y]];
                ys.wake <= x_wake && ys.shutdown_or_max() > slot
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Broadcast radius under the active model. The protocol model has no
    /// separate broadcast fraction: its transmission and broadcast regions
    /// coincide.
    pub fn broadcast_radius(&self) -> f64 {
        match self.model {
            InterferenceModel::Sinr => self.phys.r_b,
            InterferenceModel::Protocol { r_t, .. } => r_t,
        }
    }

    // ------------------------------------------------------------------
    // File schema
    // ------------------------------------------------------------------

    pub fn to_json(&self) -> String {
        let file = ScenarioFile {
            phys: PhysFile {
                alpha: self.phys.alpha,
                beta: self.phys.beta,
                noise: self.phys.noise,
                phi: self.phys.phi,
            },
            model: self.model,
            n_bound: self.n_bound,
            consts: ConstsFile { delta: self.consts.delta, gamma: self.consts.gamma },
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id.0,
                    x: n.pos.x,
                    y: n.pos.y,
                    wake: n.wake,
                    shutdown: n.shutdown,
                })
                .collect(),
        };
        // struct serialization cannot fail
        serde_json::to_string_pretty(&file).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let phys = PhysParams::new(file.phys.alpha, file.phys.beta, file.phys.noise, file.phys.phi)?;
        let nodes = file
            .nodes
            .into_iter()
            .map(|n| NodeSpec {
                id: NodeId(n.id),
                pos: Point::new(n.x, n.y),
                wake: n.wake,
                shutdown: n.shutdown,
            })
            .collect();
        Scenario::new(nodes, phys, file.model, file.n_bound, file.consts.delta, file.consts.gamma)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    phys: PhysFile,
    model: InterferenceModel,
    n_bound: u32,
    consts: ConstsFile,
    nodes: Vec<NodeFile>,
}

#[derive(Serialize, Deserialize)]
struct PhysFile {
    alpha: f64,
    beta: f64,
    noise: f64,
    phi: f64,
}

#[derive(Serialize, Deserialize)]
struct ConstsFile {
    delta: u32,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    id: u32,
    x: f64,
    y: f64,
    wake: u64,
    shutdown: Option<u64>,
}

/// Number of broadcast-radius balls, centered on a hexagonal grid of spacing
/// sqrt(3) * r_b, needed to cover the transmission ball. Reported at setup as
/// the geometric cover constant; it is never hard-coded into the algorithms.
pub fn ball_cover_count(phys: &PhysParams) -> usize {
    let s = 3f64.sqrt() * phys.r_b;
    // triangular lattice a*(s, 0) + b*(s/2, s*sqrt(3)/2); covering radius of
    // the lattice is exactly r_b, so centers within r_t + r_b suffice.
    let reach = phys.r_t + phys.r_b;
    let extent = (reach / s).ceil() as i64 + 2;
    let mut count = 0;
    for a in -2 * extent..=2 * extent {
        for b in -2 * extent..=2 * extent {
            let cx = (a as f64 + b as f64 / 2.0) * s;
            let cy = b as f64 * s * 3f64.sqrt() / 2.0;
            if (cx * cx + cy * cy).sqrt() <= reach {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn node(id: u32, x: f64, y: f64) -> NodeSpec {
        NodeSpec { id: NodeId(id), pos: Point::new(x, y), wake: 0, shutdown: None }
    }

    fn scenario_of(nodes: Vec<NodeSpec>) -> Scenario {
        let n_bound = (nodes.len() as u32).next_power_of_two().max(2);
        Scenario::new(nodes, PhysParams::default(), InterferenceModel::Sinr, n_bound, 16, 8.0)
            .unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(0.0, 0.0)), 0.0);
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        let r_b = PhysParams::default().r_b;
        let d = distance(Point::new(1.0, 1.0), Point::new(1.0, 1.0 + r_b));
        assert!((d - r_b).abs() < 1e-15);
    }

    #[test]
    fn distance_triangle_inequality_on_random_triples() {
        for k in 0..10_000u64 {
            let c = |i: u64| rng::uniform(99, i, k) * 20.0 - 10.0;
            let p = Point::new(c(0), c(1));
            let q = Point::new(c(2), c(3));
            let r = Point::new(c(4), c(5));
            assert!(distance(p, r) <= distance(p, q) + distance(q, r) + 1e-12);
            assert!((distance(p, q) - distance(q, p)).abs() < 1e-15);
            assert!(distance(p, q) >= 0.0);
        }
    }

    #[test]
    fn default_params_give_unit_transmission_radius() {
        let phys = PhysParams::default();
        assert_eq!(phys.r_t, 1.0);
        assert!((phys.r_b - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn phys_param_validation() {
        assert!(PhysParams::new(2.0, 2.0, 0.5, 1.0 / 6.0).is_err());
        assert!(PhysParams::new(3.0, 0.9, 0.5, 1.0 / 6.0).is_err());
        assert!(PhysParams::new(3.0, 2.0, 0.0, 1.0 / 6.0).is_err());
        assert!(PhysParams::new(3.0, 2.0, 0.5, 0.2).is_err());
    }

    #[test]
    fn region_members_single_node_is_empty() {
        let s = scenario_of(vec![node(1, 0.0, 0.0)]);
        assert!(s.region_members(NodeId(1), 100.0).unwrap().is_empty());
    }

    #[test]
    fn region_members_boundary_is_inclusive() {
        let r_b = PhysParams::default().r_b;
        let s = scenario_of(vec![node(1, 0.0, 0.0), node(2, r_b, 0.0)]);
        assert_eq!(s.region_members(NodeId(1), r_b).unwrap(), vec![NodeId(2)]);
    }

    #[test]
    fn region_members_line_of_five() {
        // five nodes on a line at spacing r_b; with r_t = 6 r_b the center
        // node reaches all four others (max distance 2 r_b = r_t / 3).
        let r_b = PhysParams::default().r_b;
        let nodes: Vec<NodeSpec> =
            (0..5).map(|i| node(i as u32, i as f64 * r_b, 0.0)).collect();
        // hand enumeration: |pos(i) - pos(2)| = |i - 2| * r_b <= 2 r_b < r_t
        let s = scenario_of(nodes);
        let got = s.region_members(NodeId(2), s.phys().r_t).unwrap();
        assert_eq!(got, vec![NodeId(0), NodeId(1), NodeId(3), NodeId(4)]);
    }

    #[test]
    fn region_members_unknown_id_errors() {
        let s = scenario_of(vec![node(1, 0.0, 0.0)]);
        assert!(matches!(s.region_members(NodeId(9), 1.0), Err(Error::UnknownNode(9))));
    }

    #[test]
    fn region_nesting_b_2b_t() {
        let mut nodes = Vec::new();
        for i in 0..40u64 {
            let x = rng::uniform(5, 0, i) * 2.0 - 1.0;
            let y = rng::uniform(5, 1, i) * 2.0 - 1.0;
            nodes.push(node(i as u32, x, y));
        }
        let s = scenario_of(nodes);
        let phys = *s.phys();
        for n in s.nodes() {
            let b = s.region_members(n.id, phys.r_b).unwrap();
            let b2 = s.region_members(n.id, 2.0 * phys.r_b).unwrap();
            let t = s.region_members(n.id, phys.r_t).unwrap();
            assert!(b.iter().all(|y| b2.contains(y)));
            assert!(b2.iter().all(|y| t.contains(y)));
        }
    }

    #[test]
    fn region_membership_ignores_n_bound() {
        let nodes = vec![node(1, 0.0, 0.0), node(2, 0.1, 0.0), node(3, 3.0, 0.0)];
        let a = Scenario::new(
            nodes.clone(),
            PhysParams::default(),
            InterferenceModel::Sinr,
            4,
            16,
            8.0,
        )
        .unwrap();
        let b = Scenario::new(
            nodes,
            PhysParams::default(),
            InterferenceModel::Sinr,
            4096,
            16,
            8.0,
        )
        .unwrap();
        for id in [1u32, 2, 3] {
            assert_eq!(
                a.region_members(NodeId(id), 1.0).unwrap(),
                b.region_members(NodeId(id), 1.0).unwrap()
            );
        }
    }

    #[test]
    fn eligible_receivers_respect_wake_and_shutdown() {
        let r_b = PhysParams::default().r_b;
        let mk = |id: u32, wake: u64, shutdown: Option<u64>| NodeSpec {
            id: NodeId(id),
            pos: Point::new(0.01 * id as f64, 0.0),
            wake,
            shutdown,
        };
        // all within r_b of each other (spread 0.04 < 1/6)
        let s = Scenario::new(
            vec![mk(1, 5, None), mk(2, 9, None), mk(3, 2, Some(7)), mk(4, 5, None)],
            PhysParams::default(),
            InterferenceModel::Sinr,
            8,
            16,
            8.0,
        )
        .unwrap();
        let _ = r_b;
        // node 2 woke after node 1: excluded. node 3 shut down at 7: excluded
        // at slot 7, included at slot 6. node 4 tied wake: included.
        assert_eq!(s.eligible_receivers(NodeId(1), 7).unwrap(), vec![NodeId(4)]);
        assert_eq!(
            s.eligible_receivers(NodeId(1), 6).unwrap(),
            vec![NodeId(3), NodeId(4)]
        );
        // single-node region: empty set, vacuously successful
        let lone = scenario_of(vec![node(7, 0.0, 0.0)]);
        assert!(lone.eligible_receivers(NodeId(7), 0).unwrap().is_empty());
    }

    #[test]
    fn scenario_validation_rejects_bad_input() {
        // duplicate id
        assert!(Scenario::new(
            vec![node(1, 0.0, 0.0), node(1, 1.0, 0.0)],
            PhysParams::default(),
            InterferenceModel::Sinr,
            4,
            16,
            8.0
        )
        .is_err());
        // co-located
        assert!(matches!(
            Scenario::new(
                vec![node(1, 2.0, 3.0), node(2, 2.0, 3.0)],
                PhysParams::default(),
                InterferenceModel::Sinr,
                4,
                16,
                8.0
            ),
            Err(Error::Colocated(_, _))
        ));
        // n_bound below node count
        assert!(Scenario::new(
            vec![node(1, 0.0, 0.0), node(2, 1.0, 0.0)],
            PhysParams::default(),
            InterferenceModel::Sinr,
            1,
            16,
            8.0
        )
        .is_err());
        // wake >= shutdown
        let bad = NodeSpec { id: NodeId(1), pos: Point::new(0.0, 0.0), wake: 5, shutdown: Some(5) };
        assert!(Scenario::new(
            vec![bad],
            PhysParams::default(),
            InterferenceModel::Sinr,
            2,
            16,
            8.0
        )
        .is_err());
    }

    #[test]
    fn json_round_trip_is_bit_identical() {
        let s = Scenario::new(
            vec![
                NodeSpec { id: NodeId(3), pos: Point::new(0.25, -1.5), wake: 0, shutdown: None },
                NodeSpec { id: NodeId(9), pos: Point::new(1.0 / 3.0, 2.7), wake: 4, shutdown: Some(99) },
            ],
            PhysParams::default(),
            InterferenceModel::Protocol { r_t: 1.0, r_i: 2.5 },
            4,
            16,
            8.0,
        )
        .unwrap();
        let text = s.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(text, back.to_json());
        assert_eq!(back.model(), InterferenceModel::Protocol { r_t: 1.0, r_i: 2.5 });
        assert_eq!(back.nodes()[1].shutdown, Some(99));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(256), 8);
        assert_eq!(ceil_log2(257), 9);
    }

    #[test]
    fn ball_cover_count_covers_the_transmission_ball() {
        let phys = PhysParams::default();
        let k = ball_cover_count(&phys);
        // the constant is O(1/phi^2); for phi = 1/6 roughly 60 balls
        assert!(k > 0 && k < 200, "cover count {k}");
        // verify coverage on a probe grid: every point of the r_t ball is
        // within r_b of some counted center
        let s = 3f64.sqrt() * phys.r_b;
        let reach = phys.r_t + phys.r_b;
        let extent = (reach / s).ceil() as i64 + 2;
        let mut centers = Vec::new();
        for a in -2 * extent..=2 * extent {
            for b in -2 * extent..=2 * extent {
                let cx = (a as f64 + b as f64 / 2.0) * s;
                let cy = b as f64 * s * 3f64.sqrt() / 2.0;
                if (cx * cx + cy * cy).sqrt() <= reach {
                    centers.push(Point::new(cx, cy));
                }
            }
        }
        assert_eq!(centers.len(), k);
        let m = 60;
        for i in -m..=m {
            for j in -m..=m {
                let p = Point::new(i as f64 / m as f64, j as f64 / m as f64);
                if (p.x * p.x + p.y * p.y).sqrt() <= phys.r_t {
                    assert!(
                        centers.iter().any(|c| distance(*c, p) <= phys.r_b + 1e-12),
                        "uncovered point ({}, {})",
                        p.x,
                        p.y
                    );
                }
            }
        }
    }
}
