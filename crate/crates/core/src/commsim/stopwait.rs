//! Discrete-time stop-and-wait simulation with a pluggable sender.
//!
//! Within one time step events happen in this order:
//!
//! 1. data packets due at this step reach the receiver, which delivers
//!    in-order packets and (re-)acknowledges everything it has seen;
//! 2. ACKs due at this step reach the sender; an ACK for the current
//!    packet advances `cur_seq` and stops the timer;
//! 3. the timer fires if its deadline is this step;
//! 4. the sender hook runs and may send packet `cur_seq`.
//!
//! A data packet sent at step `t` with delay `δ` is due at `t + max(δ, 1)`;
//! an ACK generated at step `t` is due at `t + δ`. The timer starts out
//! expired so the sender's first obligation is to send packet 1 at step 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{precondition, CommError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Loss probability applied independently to each data packet and ACK.
    pub loss: f64,
    pub dmin: u64,
    pub dmax: u64,
    pub timeout: u64,
    pub horizon: u64,
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), CommError> {
        if !(0.0..=1.0).contains(&self.loss) {
            return Err(precondition(format!(
                "loss probability {} must lie in [0, 1]",
                self.loss
            )));
        }
        if !(self.dmin <= self.dmax && self.dmax < self.timeout && self.timeout <= self.horizon) {
            return Err(precondition(format!(
                "network timing must satisfy dmin <= dmax < timeout <= horizon (got {}, {}, {}, {})",
                self.dmin, self.dmax, self.timeout, self.horizon
            )));
        }
        Ok(())
    }
}

/// What the sender sees at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SenderView {
    pub t: u64,
    pub cur_seq: usize,
    pub num_packets: usize,
    pub ack_arrived: bool,
    pub timer_expired: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub num_packets: usize,
    /// `(time step, sequence number)` for every packet put on the wire.
    pub sent: Vec<(u64, usize)>,
    /// `(time step, sequence number)` for every ACK reaching the sender.
    pub acks: Vec<(u64, usize)>,
    /// Sequence numbers delivered in order by the receiver.
    pub delivered: Vec<usize>,
    /// Steps at which the sender asked to send after every packet was acknowledged.
    #[serde(default)]
    pub idle_sends: Vec<u64>,
}

#[derive(Debug)]
struct InFlight {
    due: u64,
    seq: usize,
}

fn transmit<R: Rng + ?Sized>(cfg: &NetConfig, rng: &mut R) -> Option<u64> {
    if cfg.loss > 0.0 && rng.random::<f64>() < cfg.loss {
        return None;
    }
    Some(rng.random_range(cfg.dmin..=cfg.dmax))
}

fn take_due(queue: &mut Vec<InFlight>, t: u64) -> Vec<usize> {
    let mut due = Vec::new();
    queue.retain(|p| {
        if p.due == t {
            due.push(p.seq);
            false
        } else {
            true
        }
    });
    due
}

/// Runs `cfg.horizon` steps. `hook` returns whether to send `cur_seq`; a
/// hook error aborts the simulation.
pub fn stopwait_simulate<R, E, F>(
    num_packets: usize,
    cfg: &NetConfig,
    rng: &mut R,
    mut hook: F,
) -> Result<ProtocolTrace, E>
where
    R: Rng + ?Sized,
    F: FnMut(&SenderView) -> Result<bool, E>,
{
    let mut trace = ProtocolTrace {
        num_packets,
        ..ProtocolTrace::default()
    };
    let mut data: Vec<InFlight> = Vec::new();
    let mut acks: Vec<InFlight> = Vec::new();
    let mut cur_seq = 1usize;
    let mut expected = 1usize;
    let mut deadline: Option<u64> = Some(1);

    for t in 1..=cfg.horizon {
        for seq in take_due(&mut data, t) {
            if seq == expected {
                trace.delivered.push(seq);
                expected += 1;
            }
            if seq < expected {
                if let Some(delay) = transmit(cfg, rng) {
                    acks.push(InFlight { due: t + delay, seq });
                }
            }
        }

        let mut ack_arrived = false;
        for seq in take_due(&mut acks, t) {
            trace.acks.push((t, seq));
            if seq == cur_seq && cur_seq <= num_packets {
                ack_arrived = true;
                cur_seq += 1;
                deadline = None;
            }
        }

        let timer_expired = deadline == Some(t);
        if timer_expired {
            deadline = None;
        }

        let view = SenderView {
            t,
            cur_seq,
            num_packets,
            ack_arrived,
            timer_expired,
        };
        if hook(&view)? {
            if cur_seq <= num_packets {
                trace.sent.push((t, cur_seq));
                deadline = Some(t + cfg.timeout);
                if let Some(delay) = transmit(cfg, rng) {
                    data.push(InFlight {
                        due: t + delay.max(1),
                        seq: cur_seq,
                    });
                }
            } else {
                trace.idle_sends.push(t);
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::convert::Infallible;

    fn cfg(loss: f64) -> NetConfig {
        NetConfig {
            loss,
            dmin: 1,
            dmax: 1,
            timeout: 5,
            horizon: 40,
        }
    }

    #[test]
    fn config_ordering_is_enforced() {
        assert!(cfg(0.0).validate().is_ok());
        assert!(NetConfig { timeout: 1, ..cfg(0.0) }.validate().is_err());
        assert!(NetConfig { loss: 1.5, ..cfg(0.0) }.validate().is_err());
    }

    #[test]
    fn lossless_round_trip_timing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trace = stopwait_simulate(2, &cfg(0.0), &mut rng, |v| {
            Ok::<_, Infallible>((v.ack_arrived || v.timer_expired) && v.cur_seq <= v.num_packets)
        })
        .unwrap();
        // send at 1, data due 2, ACK due 3, next send at 3
        assert_eq!(trace.sent, vec![(1, 1), (3, 2)]);
        assert_eq!(trace.acks, vec![(3, 1), (5, 2)]);
        assert_eq!(trace.delivered, vec![1, 2]);
    }

    #[test]
    fn hook_errors_abort() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = stopwait_simulate(
            2,
            &cfg(0.0),
            &mut rng,
            |v| if v.t == 3 { Err("boom") } else { Ok(true) },
        );
        assert_eq!(r, Err("boom"));
    }
}
