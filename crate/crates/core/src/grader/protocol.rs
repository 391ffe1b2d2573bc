//! Replays a stop-and-wait trace against the sender's obligations.
//!
//! The replay reconstructs, from the ACK log alone, what the sender saw at
//! every step (ACK for the current packet, timer expiry) and compares it
//! with what the sender actually did.

use serde::{Deserialize, Serialize};

use crate::commsim::{NetConfig, ProtocolTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// An ACK for the current packet arrived and the next packet was not sent.
    AdvanceOnAck,
    /// The timer expired and the current packet was not resent.
    ResendOnTimeout,
    /// A packet was sent with neither event pending.
    NoSpuriousSend,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::AdvanceOnAck, Rule::ResendOnTimeout, Rule::NoSpuriousSend];

    pub fn message(self) -> &'static str {
        match self {
            Rule::AdvanceOnAck => {
                "An ACK for the current packet was received, but the sender did not send the next packet"
            }
            Rule::ResendOnTimeout => "The timeout expired, but the sender did not resend the current packet",
            Rule::NoSpuriousSend => "The sender sent a packet, but no packet should have been sent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub first_step: u64,
    pub count: usize,
}

impl Violation {
    pub fn message(&self) -> String {
        let times = if self.count == 1 {
            String::new()
        } else {
            format!("; {} occurrences in total", self.count)
        };
        format!(
            "{} (first at time step {}{times}).",
            self.rule.message(),
            self.first_step
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolVerdict {
    /// In rule order; each rule appears at most once.
    pub violations: Vec<Violation>,
    pub delivered: usize,
    pub num_packets: usize,
    pub horizon: u64,
}

impl ProtocolVerdict {
    pub fn complete(&self) -> bool {
        self.delivered == self.num_packets
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.complete()
    }

    /// One line per violated rule. The delivery shortfall is only reported
    /// when no rule was broken, since a rule violation usually explains it.
    pub fn messages(&self) -> Vec<String> {
        if !self.violations.is_empty() {
            return self.violations.iter().map(Violation::message).collect();
        }
        if !self.complete() {
            return vec![format!(
                "Only {} of {} packets were delivered within {} time steps.",
                self.delivered, self.num_packets, self.horizon
            )];
        }
        Vec::new()
    }
}

pub fn check_protocol_trace(trace: &ProtocolTrace, cfg: &NetConfig) -> ProtocolVerdict {
    let n = trace.num_packets;
    let mut cur_seq = 1usize;
    let mut deadline = Some(1u64);
    let mut acks = trace.acks.iter().peekable();
    let mut sends = trace
        .sent
        .iter()
        .map(|&(t, _)| t)
        .chain(trace.idle_sends.iter().copied())
        .collect::<Vec<_>>();
    sends.sort_unstable();
    let mut sends = sends.into_iter().peekable();
    let mut found: Vec<Violation> = Vec::new();
    let mut flag = |rule: Rule, t: u64| match found.iter_mut().find(|v| v.rule == rule) {
        Some(v) => v.count += 1,
        None => found.push(Violation {
            rule,
            first_step: t,
            count: 1,
        }),
    };

    for t in 1..=cfg.horizon {
        let mut ack_arrived = false;
        while let Some(&&(at, seq)) = acks.peek() {
            if at != t {
                break;
            }
            acks.next();
            if seq == cur_seq && cur_seq <= n {
                ack_arrived = true;
                cur_seq += 1;
                deadline = None;
            }
        }
        let timer_expired = deadline == Some(t);
        if timer_expired {
            deadline = None;
        }
        let mut sent = false;
        while sends.peek() == Some(&t) {
            sends.next();
            sent = true;
        }
        let pending = cur_seq <= n;
        if sent {
            if !(pending && (ack_arrived || timer_expired)) {
                flag(Rule::NoSpuriousSend, t);
            }
            if pending {
                deadline = Some(t + cfg.timeout);
            }
        } else if pending && ack_arrived {
            flag(Rule::AdvanceOnAck, t);
        } else if pending && timer_expired {
            flag(Rule::ResendOnTimeout, t);
        }
    }
    found.sort_by_key(|v| Rule::ALL.iter().position(|r| *r == v.rule));
    ProtocolVerdict {
        violations: found,
        delivered: trace.delivered.len(),
        num_packets: n,
        horizon: cfg.horizon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NetConfig {
        NetConfig {
            loss: 0.0,
            dmin: 1,
            dmax: 1,
            timeout: 5,
            horizon: 12,
        }
    }

    #[test]
    fn clean_lossless_trace_passes() {
        let trace = ProtocolTrace {
            num_packets: 2,
            sent: vec![(1, 1), (3, 2)],
            acks: vec![(3, 1), (5, 2)],
            delivered: vec![1, 2],
            idle_sends: vec![],
        };
        let v = check_protocol_trace(&trace, &cfg());
        assert!(v.passed(), "{v:?}");
    }

    #[test]
    fn missed_advance_is_reported_once_with_first_step() {
        let trace = ProtocolTrace {
            num_packets: 2,
            sent: vec![(1, 1)],
            acks: vec![(3, 1)],
            delivered: vec![1],
            idle_sends: vec![],
        };
        let v = check_protocol_trace(&trace, &cfg());
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].rule, Rule::AdvanceOnAck);
        assert_eq!(v.violations[0].first_step, 3);
        assert_eq!(v.messages().len(), 1);
    }

    #[test]
    fn silent_sender_misses_first_timeout_and_shortfall_is_reported() {
        let trace = ProtocolTrace {
            num_packets: 1,
            ..ProtocolTrace::default()
        };
        let v = check_protocol_trace(&trace, &cfg());
        assert_eq!(v.violations[0].rule, Rule::ResendOnTimeout);
        assert_eq!(v.violations[0].first_step, 1);
        let ok = ProtocolVerdict {
            violations: vec![],
            ..v
        };
        assert_eq!(
            ok.messages(),
            vec!["Only 0 of 1 packets were delivered within 12 time steps."]
        );
    }

    #[test]
    fn idle_sends_are_spurious() {
        let trace = ProtocolTrace {
            num_packets: 1,
            sent: vec![(1, 1)],
            acks: vec![(3, 1)],
            delivered: vec![1],
            idle_sends: vec![3, 4],
        };
        let v = check_protocol_trace(&trace, &cfg());
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].rule, Rule::NoSpuriousSend);
        assert_eq!(v.violations[0].count, 2);
        assert!(v.violations[0].message().contains("2 occurrences"));
    }
}
