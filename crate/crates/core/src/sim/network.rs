use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Match {
    Loopback,
    HostAddress,
    Established,
    AnyExternal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetRule {
    pub direction: Direction,
    #[serde(rename = "match")]
    pub matcher: Match,
    pub verdict: Verdict,
}

impl NetRule {
    pub const fn new(direction: Direction, matcher: Match, verdict: Verdict) -> Self {
        Self {
            direction,
            matcher,
            verdict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Destination {
    Loopback,
    Host,
    External,
}

/// A packet as seen by the rule list.
#[derive(Debug, Clone, Copy)]
struct Packet {
    direction: Direction,
    destination: Destination,
    established: bool,
}

impl Packet {
    fn matches(&self, m: Match) -> bool {
        match m {
            Match::Loopback => self.destination == Destination::Loopback,
            Match::HostAddress => self.destination == Destination::Host,
            Match::Established => self.established,
            // The interface-wide drop catches host and external traffic alike;
            // host traffic is normally accepted by an earlier rule.
            Match::AnyExternal => self.destination != Destination::Loopback,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkRuleSet {
    pub rules: Vec<NetRule>,
}

impl NetworkRuleSet {
    fn verdict(&self, packet: Packet) -> Verdict {
        self.rules
            .iter()
            .find(|r| r.direction == packet.direction && packet.matches(r.matcher))
            .map_or(Verdict::Accept, |r| r.verdict)
    }

    /// A destination is reachable when a new outbound connection is accepted
    /// and its replies are accepted on the way back in.
    pub fn reachable(&self, destination: Destination) -> bool {
        let out = self.verdict(Packet {
            direction: Direction::Out,
            destination,
            established: false,
        });
        let back = self.verdict(Packet {
            direction: Direction::In,
            destination,
            established: true,
        });
        out == Verdict::Accept && back == Verdict::Accept
    }

    /// The lockdown list: loopback, the host address and established
    /// connections stay open, everything else on the external interface drops.
    pub fn lockdown() -> Self {
        use Direction::{In, Out};
        use Match::*;
        use Verdict::{Accept, Drop};
        Self {
            rules: vec![
                NetRule::new(In, Loopback, Accept),
                NetRule::new(Out, Loopback, Accept),
                NetRule::new(In, Loopback, Accept),
                NetRule::new(Out, Loopback, Accept),
                NetRule::new(In, HostAddress, Accept),
                NetRule::new(Out, HostAddress, Accept),
                NetRule::new(In, Established, Accept),
                NetRule::new(Out, Established, Accept),
                NetRule::new(Out, AnyExternal, Drop),
                NetRule::new(In, AnyExternal, Drop),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rules_accept_everything() {
        let rules = NetworkRuleSet::default();
        for d in [Destination::Loopback, Destination::Host, Destination::External] {
            assert!(rules.reachable(d));
        }
    }

    #[test]
    fn lockdown_keeps_host_and_loopback() {
        let rules = NetworkRuleSet::lockdown();
        assert_eq!(rules.rules.len(), 10);
        assert!(rules.reachable(Destination::Loopback));
        assert!(rules.reachable(Destination::Host));
        assert!(!rules.reachable(Destination::External));
    }

    #[test]
    fn first_match_wins() {
        let rules = NetworkRuleSet {
            rules: vec![
                NetRule::new(Direction::Out, Match::AnyExternal, Verdict::Drop),
                NetRule::new(Direction::Out, Match::HostAddress, Verdict::Accept),
            ],
        };
        assert!(!rules.reachable(Destination::Host));
    }
}
