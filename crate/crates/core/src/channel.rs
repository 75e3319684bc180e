//! Interference oracles: received power, SINR decode decision, the low-power
//! event, and the protocol-model decode decision.
//!
//! All operations are pure functions of the scenario and a transmitter set.
//! A node's own signal is always excluded from its received-power sum, which
//! models a receiver that filters out its own transmission; for nodes that
//! are not transmitting the exclusion is a no-op.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{InterferenceModel, NodeId, PhysParams, Point, Scenario};
use crate::{Error, Result};

/// Everything the channel resolved in one slot.
///
/// `decodes` maps each receiver to the unique sender it decoded (absent:
/// nothing decoded). `rx_power` is the summed received power at each awake
/// node from all other transmitters. `low_power` lists the nodes whose
/// received power is at or below the low-power threshold.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SlotOutcome {
    pub slot: u64,
    pub transmitters: Vec<NodeId>,
    pub decodes: BTreeMap<NodeId, NodeId>,
    pub rx_power: BTreeMap<NodeId, f64>,
    pub low_power: Vec<NodeId>,
}

/// Received-power threshold below which the low-power event holds:
/// (4 (beta + 4) r_b)^(-alpha).
pub fn lp_threshold(phys: &PhysParams) -> f64 {
    (4.0 * (phys.beta + 4.0) * phys.r_b).powf(-phys.alpha)
}

#[inline]
pub(crate) fn path_gain(from: Point, to: Point, alpha: f64) -> f64 {
    let d = from.distance(to);
    1.0 / d.powf(alpha)
}

/// Sum of received powers at `receiver` from every transmitter other than
/// itself. Empty set gives 0. A transmitter co-located with the receiver is
/// a singularity and an error (scenario validation prevents it for loaded
/// scenarios).
pub fn received_power(scn: &Scenario, receiver: NodeId, transmitters: &[NodeId]) -> Result<f64> {
    let rx = scn.node(receiver)?.pos;
    let alpha = scn.phys().alpha;
    let mut sum = 0.0;
    for &w in transmitters {
        if w == receiver {
            continue;
        }
        let tx = scn.node(w)?.pos;
        if tx.distance(rx) == 0.0 {
            return Err(Error::Colocated(w.0, receiver.0));
        }
        sum += path_gain(tx, rx, alpha);
    }
    Ok(sum)
}

/// SINR decode decision: true iff
/// signal / (noise + interference) >= beta, with the boundary inclusive.
///
/// The sender must be in the transmitter set and the receiver must not be:
/// a transmitting node never decodes in the same slot.
pub fn sinr_decodes(
    scn: &Scenario,
    receiver: NodeId,
    sender: NodeId,
    transmitters: &[NodeId],
) -> Result<bool> {
    if !transmitters.contains(&sender) {
        return Err(Error::InvalidConfig(format!("sender {sender} is not transmitting")));
    }
    if transmitters.contains(&receiver) {
        return Err(Error::InvalidConfig(format!(
            "receiver {receiver} is transmitting and cannot decode"
        )));
    }
    let rx = scn.node(receiver)?.pos;
    let tx = scn.node(sender)?.pos;
    if tx.distance(rx) == 0.0 {
        return Err(Error::Colocated(sender.0, receiver.0));
    }
    let phys = scn.phys();
    let signal = path_gain(tx, rx, phys.alpha);
    let mut interference = 0.0;
    for &w in transmitters {
        if w == sender {
            continue;
        }
        let wp = scn.node(w)?.pos;
        if wp.distance(rx) == 0.0 {
            return Err(Error::Colocated(w.0, receiver.0));
        }
        interference += path_gain(wp, rx, phys.alpha);
    }
    Ok(signal / (phys.noise + interference) >= phys.beta)
}

/// True iff the received power at `x` from the other transmitters is at or
/// below the low-power threshold. `x` may itself be transmitting; its own
/// signal is excluded.
pub fn low_power(scn: &Scenario, x: NodeId, transmitters: &[NodeId]) -> Result<bool> {
    Ok(received_power(scn, x, transmitters)? <= lp_threshold(scn.phys()))
}

/// Protocol-model decode decision: true iff the sender is within `r_t` of the
/// receiver and every other transmitter is farther than `r_i` from it.
pub fn protocol_decodes(
    scn: &Scenario,
    receiver: NodeId,
    sender: NodeId,
    transmitters: &[NodeId],
    r_t: f64,
    r_i: f64,
) -> Result<bool> {
    if r_i < r_t {
        return Err(Error::InvalidConfig(format!(
            "interference range {r_i} is below transmission range {r_t}"
        )));
    }
    if !transmitters.contains(&sender) {
        return Err(Error::InvalidConfig(format!("sender {sender} is not transmitting")));
    }
    if transmitters.contains(&receiver) {
        return Err(Error::InvalidConfig(format!(
            "receiver {receiver} is transmitting and cannot decode"
        )));
    }
    let rx = scn.node(receiver)?.pos;
    if scn.node(sender)?.pos.distance(rx) > r_t {
        return Ok(false);
    }
    for &w in transmitters {
        if w == sender {
            continue;
        }
        if scn.node(w)?.pos.distance(rx) <= r_i {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Resolve one slot against the full transmitter set: decode map over the
/// given receivers, received power and low-power flags over the given
/// listeners. `receivers` must not contain transmitters.
///
/// This is the reference resolution path used by the scheduler and by the
/// verification suites; it evaluates the same closed forms as the public
/// oracles above.
pub fn resolve_slot(
    scn: &Scenario,
    slot: u64,
    transmitters: &[NodeId],
    listeners: &[NodeId],
    receivers: &[NodeId],
) -> Result<SlotOutcome> {
    let mut out = SlotOutcome { slot, transmitters: transmitters.to_vec(), ..Default::default() };
    out.transmitters.sort_unstable();
    let threshold = lp_threshold(scn.phys());
    for &x in listeners {
        let p = received_power(scn, x, transmitters)?;
        out.rx_power.insert(x, p);
        if p <= threshold {
            out.low_power.push(x);
        }
    }
    out.low_power.sort_unstable();
    for &v in receivers {
        let decoded = match scn.model() {
            InterferenceModel::Sinr => {
                let mut hit = None;
                for &s in transmitters {
                    if sinr_decodes(scn, v, s, transmitters)? {
                        hit = Some(s);
                        break;
                    }
                }
                hit
            }
            InterferenceModel::Protocol { r_t, r_i } => {
                let mut hit = None;
                for &s in transmitters {
                    if protocol_decodes(scn, v, s, transmitters, r_t, r_i)? {
                        hit = Some(s);
                        break;
                    }
                }
                hit
            }
        };
        if let Some(s) = decoded {
            out.decodes.insert(v, s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeSpec, Scenario};
    use crate::rng;

    fn scenario(points: &[(u32, f64, f64)]) -> Scenario {
        let nodes = points
            .iter()
            .map(|&(id, x, y)| NodeSpec {
                id: NodeId(id),
                pos: Point::new(x, y),
                wake: 0,
                shutdown: None,
            })
            .collect();
        let n_bound = (points.len() as u32).next_power_of_two().max(2);
        Scenario::new(nodes, PhysParams::default(), InterferenceModel::Sinr, n_bound, 16, 8.0)
            .unwrap()
    }

    #[test]
    fn received_power_examples() {
        // receiver 0 at origin, transmitters at distances 1 and 2
        let s = scenario(&[(0, 0.0, 0.0), (1, 2.0, 0.0), (2, 1.0, 0.0)]);
        assert_eq!(received_power(&s, NodeId(0), &[]).unwrap(), 0.0);
        let one = received_power(&s, NodeId(0), &[NodeId(1)]).unwrap();
        assert!((one - 0.125).abs() < 1e-15, "1/2^3 = 0.125, got {one}");
        let both = received_power(&s, NodeId(0), &[NodeId(1), NodeId(2)]).unwrap();
        assert!((both - 1.125).abs() < 1e-15, "1 + 1/8 = 1.125, got {both}");
    }

    #[test]
    fn received_power_excludes_own_signal() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 2.0, 0.0)]);
        let p = received_power(&s, NodeId(0), &[NodeId(0), NodeId(1)]).unwrap();
        assert!((p - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sinr_decode_examples() {
        // defaults: alpha = 3, beta = 2, noise = 0.5
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.5, 0.0), (2, -0.5, 0.0), (3, 1.0, 0.0)]);
        // sender at 0.5, alone: SINR = 8 / 0.5 = 16 >= 2
        assert!(sinr_decodes(&s, NodeId(0), NodeId(1), &[NodeId(1)]).unwrap());
        // sender at exactly r_t = 1, alone: SINR = 1 / 0.5 = 2, boundary inclusive
        assert!(sinr_decodes(&s, NodeId(0), NodeId(3), &[NodeId(3)]).unwrap());
        // sender at 0.5 with an interferer at 0.5: 8 / (0.5 + 8) < 2
        assert!(!sinr_decodes(&s, NodeId(0), NodeId(1), &[NodeId(1), NodeId(2)]).unwrap());
    }

    #[test]
    fn sinr_decode_preconditions() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.5, 0.0)]);
        // sender not transmitting
        assert!(sinr_decodes(&s, NodeId(0), NodeId(1), &[]).is_err());
        // receiver transmitting
        assert!(sinr_decodes(&s, NodeId(0), NodeId(1), &[NodeId(0), NodeId(1)]).is_err());
    }

    #[test]
    fn lp_threshold_examples() {
        let phys = PhysParams::default();
        // 4 (2 + 4) / 6 = 4, threshold 4^-3
        assert!((lp_threshold(&phys) - 0.015625).abs() < 1e-17);
        // doubling r_b divides the threshold by 2^alpha = 8
        let mut doubled = phys;
        doubled.r_b *= 2.0;
        assert!((lp_threshold(&doubled) - 0.015625 / 8.0).abs() < 1e-17);
    }

    #[test]
    fn low_power_examples() {
        // threshold at defaults is 1/64; a single transmitter at distance 4
        // contributes exactly 1/64, inclusive comparison holds
        let s = scenario(&[(0, 0.0, 0.0), (1, 4.0, 0.0), (2, 3.9, 0.0)]);
        assert!(low_power(&s, NodeId(0), &[]).unwrap());
        assert!(low_power(&s, NodeId(0), &[NodeId(1)]).unwrap());
        // at 3.9 the power is 1/59.319 > 1/64
        assert!(!low_power(&s, NodeId(0), &[NodeId(2)]).unwrap());
    }

    #[test]
    fn protocol_decode_examples() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.8, 0.0), (2, 2.5, 0.0), (3, 1.5, 0.0), (4, 1.2, 0.0)]);
        let (r_t, r_i) = (1.0, 2.0);
        // sender at 0.8, other transmitter at 2.5: decode
        assert!(protocol_decodes(&s, NodeId(0), NodeId(1), &[NodeId(1), NodeId(2)], r_t, r_i)
            .unwrap());
        // other transmitter at 1.5 <= r_i: blocked
        assert!(!protocol_decodes(&s, NodeId(0), NodeId(1), &[NodeId(1), NodeId(3)], r_t, r_i)
            .unwrap());
        // sender out of transmission range
        assert!(!protocol_decodes(&s, NodeId(0), NodeId(4), &[NodeId(4)], r_t, r_i).unwrap());
        // r_i < r_t is a configuration error
        assert!(protocol_decodes(&s, NodeId(0), NodeId(1), &[NodeId(1)], 2.0, 1.0).is_err());
    }

    #[test]
    fn decode_uniqueness_under_beta_at_least_one() {
        // random transmitter sets: no receiver ever decodes two senders
        for trial in 0..200u64 {
            let mut pts = vec![(0u32, 0.0, 0.0)];
            let k = 2 + (rng::bits(11, 0, trial) % 5) as u32;
            for i in 1..=k {
                let x = rng::uniform(11, i as u64, trial) * 2.0 - 1.0;
                let y = rng::uniform(11, 100 + i as u64, trial) * 2.0 - 1.0;
                pts.push((i, x, y));
            }
            let s = scenario(&pts);
            let tx: Vec<NodeId> = (1..=k).map(NodeId).collect();
            let mut passes = 0;
            for &t in &tx {
                if sinr_decodes(&s, NodeId(0), t, &tx).unwrap() {
                    passes += 1;
                }
            }
            assert!(passes <= 1, "trial {trial}: {passes} senders decodable at once");
        }
    }

    #[test]
    fn monotonicity_adding_a_transmitter() {
        // adding a transmitter never increases SINR and never turns the
        // low-power event from false to true
        for trial in 0..200u64 {
            let mut pts = vec![(0u32, 0.0, 0.0)];
            for i in 1..=4u32 {
                let x = rng::uniform(13, i as u64, trial) * 4.0 - 2.0;
                let y = rng::uniform(13, 50 + i as u64, trial) * 4.0 - 2.0;
                pts.push((i, x, y));
            }
            let s = scenario(&pts);
            let base = vec![NodeId(1)];
            let more = vec![NodeId(1), NodeId(2)];
            let even_more = vec![NodeId(1), NodeId(2), NodeId(3)];
            let decode_chain = [
                sinr_decodes(&s, NodeId(0), NodeId(1), &base).unwrap(),
                sinr_decodes(&s, NodeId(0), NodeId(1), &more).unwrap(),
                sinr_decodes(&s, NodeId(0), NodeId(1), &even_more).unwrap(),
            ];
            // once false, stays false as interference grows
            for w in decode_chain.windows(2) {
                assert!(w[0] || !w[1], "decode became true after adding interference");
            }
            let lp_chain = [
                low_power(&s, NodeId(0), &base).unwrap(),
                low_power(&s, NodeId(0), &more).unwrap(),
                low_power(&s, NodeId(0), &even_more).unwrap(),
            ];
            for w in lp_chain.windows(2) {
                assert!(w[0] || !w[1], "low power became true after adding interference");
            }
        }
    }

    #[test]
    fn resolve_slot_populates_all_maps() {
        let s = scenario(&[(0, 0.0, 0.0), (1, 0.5, 0.0), (2, 5.0, 5.0)]);
        let all = [NodeId(0), NodeId(1), NodeId(2)];
        let out = resolve_slot(&s, 3, &[NodeId(1)], &all, &[NodeId(0), NodeId(2)]).unwrap();
        assert_eq!(out.slot, 3);
        assert_eq!(out.decodes.get(&NodeId(0)), Some(&NodeId(1)));
        assert_eq!(out.rx_power.len(), 3);
        // transmitter's own power reading excludes itself: zero, low power
        assert_eq!(out.rx_power[&NodeId(1)], 0.0);
        assert!(out.low_power.contains(&NodeId(1)));
    }
}
