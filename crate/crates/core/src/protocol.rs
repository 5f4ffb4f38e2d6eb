use std::fmt::{Debug, Display};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::bit::Bit;
use crate::error::{Error, Result};

/// A finite-state gossip protocol: initial states, the initiator set, the
/// pairwise update on (initiator, partner), the idle update and the update of
/// an initiator whose synchronous request was rejected.
///
/// States live in a declared finite universe with a dense encoding
/// `0..universe_size()`. `encode` returns `None` for a state outside that
/// universe, which the engines treat as a protocol bug.
pub trait Protocol: Send + Sync {
    type State: Copy + Eq + Hash + Ord + Debug + Display + Send + Sync;

    fn name(&self) -> &str;

    fn initial_state(&self, bit: Bit) -> Self::State;

    /// Membership in the initiator set.
    fn is_initiator(&self, s: &Self::State) -> bool;

    /// New (initiator, partner) states after a communication.
    fn on_initiate(&self, initiator: &Self::State, partner: &Self::State)
        -> (Self::State, Self::State);

    /// Update of a node that rings without initiating, or (synchronously)
    /// takes no part in any communication.
    fn on_idle(&self, s: &Self::State) -> Self::State;

    /// Update of a synchronous initiator whose request was not established.
    fn on_rejected(&self, s: &Self::State) -> Self::State {
        *s
    }

    fn belief(&self, s: &Self::State) -> Bit;

    /// Cheap terminal test used by the engines. It must agree with
    /// [`is_terminal_by_definition`] on every state in the universe.
    fn is_terminal(&self, s: &Self::State) -> bool;

    fn universe_size(&self) -> u64;

    fn encode(&self, s: &Self::State) -> Option<u64>;

    fn decode(&self, code: u64) -> Option<Self::State>;

    fn contains(&self, s: &Self::State) -> bool {
        self.encode(s).is_some()
    }

    /// Index into [`Protocol::kind_names`] (node type).
    fn kind(&self, _s: &Self::State) -> usize {
        0
    }

    fn kind_names(&self) -> &'static [&'static str] {
        &["state"]
    }
}

/// Every state of the declared universe, in code order.
pub fn enumerate_universe<P: Protocol>(p: &P, limit: u64) -> Result<Vec<P::State>> {
    let size = p.universe_size();
    if size > limit {
        return Err(Error::UniverseTooLarge { size, limit });
    }
    (0..size)
        .map(|c| {
            p.decode(c).ok_or_else(|| {
                Error::InvalidTable(format!("code {c} does not decode in {}", p.name()))
            })
        })
        .collect()
}

/// The terminal predicate checked directly: not an initiator, unchanged when
/// contacted by any initiator in `universe`, and fixed by the idle update.
pub fn is_terminal_by_definition<P: Protocol>(p: &P, s: &P::State, universe: &[P::State]) -> bool {
    !p.is_initiator(s)
        && p.on_idle(s) == *s
        && universe
            .iter()
            .filter(|u| p.is_initiator(u))
            .all(|u| p.on_initiate(u, s).1 == *s)
}

pub(crate) fn escaped<P: Protocol>(s: &P::State, context: &'static str) -> Error {
    Error::StateEscaped {
        state: format!("{s}"),
        context,
    }
}

/// A protocol given by explicit lookup tables over states `0..s`.
///
/// Useful for small hand-written automata and as a test oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSpec", into = "TableSpec")]
pub struct TableProtocol {
    spec: TableSpec,
    terminal: Vec<bool>,
}

/// Serialized form of a [`TableProtocol`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub name: String,
    /// Initial state for input bit 0 and 1.
    pub initial: [u16; 2],
    pub beliefs: Vec<u8>,
    pub initiators: Vec<bool>,
    /// `pair[a][b]` is the (initiator, partner) result for initiator state `a`.
    /// Rows of non-initiators are ignored and may be empty.
    pub pair: Vec<Vec<(u16, u16)>>,
    pub idle: Vec<u16>,
    /// Defaults to the identity.
    #[serde(default)]
    pub rejected: Option<Vec<u16>>,
}

impl TryFrom<TableSpec> for TableProtocol {
    type Error = Error;

    fn try_from(spec: TableSpec) -> Result<Self> {
        TableProtocol::new(spec)
    }
}

impl From<TableProtocol> for TableSpec {
    fn from(t: TableProtocol) -> TableSpec {
        t.spec
    }
}

impl TableProtocol {
    pub fn new(spec: TableSpec) -> Result<TableProtocol> {
        let s = spec.beliefs.len();
        let bad = |msg: String| Err(Error::InvalidTable(msg));
        if s < 2 || s > u16::MAX as usize {
            return bad(format!("need between 2 and {} states, got {s}", u16::MAX));
        }
        if spec.initiators.len() != s || spec.idle.len() != s || spec.pair.len() != s {
            return bad("beliefs, initiators, idle and pair must all have one entry per state".into());
        }
        if let Some(r) = &spec.rejected {
            if r.len() != s {
                return bad("rejected must have one entry per state".into());
            }
        }
        let in_range = |v: u16| (v as usize) < s;
        if spec.beliefs.iter().any(|&b| b > 1) {
            return bad("beliefs must be 0 or 1".into());
        }
        for (bit, &init) in spec.initial.iter().enumerate() {
            if !in_range(init) {
                return bad(format!("initial state {init} out of range"));
            }
            if spec.beliefs[init as usize] as usize != bit {
                return bad(format!("initial state for bit {bit} has belief {}", spec.beliefs[init as usize]));
            }
        }
        for (a, row) in spec.pair.iter().enumerate() {
            if !spec.initiators[a] {
                continue;
            }
            if row.len() != s {
                return bad(format!("pair row {a} has {} entries, expected {s}", row.len()));
            }
            if row.iter().any(|&(x, y)| !in_range(x) || !in_range(y)) {
                return bad(format!("pair row {a} leaves the state range"));
            }
        }
        if spec.idle.iter().any(|&v| !in_range(v))
            || spec.rejected.iter().flatten().any(|&v| !in_range(v))
        {
            return bad("idle or rejected table leaves the state range".into());
        }
        let terminal = (0..s)
            .map(|x| {
                !spec.initiators[x]
                    && spec.idle[x] as usize == x
                    && (0..s)
                        .filter(|&a| spec.initiators[a])
                        .all(|a| spec.pair[a][x].1 as usize == x)
            })
            .collect();
        Ok(TableProtocol { spec, terminal })
    }

    pub fn spec(&self) -> &TableSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Protocol for TableProtocol {
    type State = u16;

    fn name(&self) -> &str {
        &self.spec.name
    }

    fn initial_state(&self, bit: Bit) -> u16 {
        self.spec.initial[bit.as_u8() as usize]
    }

    fn is_initiator(&self, s: &u16) -> bool {
        self.spec.initiators[*s as usize]
    }

    fn on_initiate(&self, a: &u16, b: &u16) -> (u16, u16) {
        self.spec.pair[*a as usize][*b as usize]
    }

    fn on_idle(&self, s: &u16) -> u16 {
        self.spec.idle[*s as usize]
    }

    fn on_rejected(&self, s: &u16) -> u16 {
        match &self.spec.rejected {
            Some(r) => r[*s as usize],
            None => *s,
        }
    }

    fn belief(&self, s: &u16) -> Bit {
        Bit::from_u8_lossy(self.spec.beliefs[*s as usize])
    }

    fn is_terminal(&self, s: &u16) -> bool {
        self.terminal[*s as usize]
    }

    fn universe_size(&self) -> u64 {
        self.len() as u64
    }

    fn encode(&self, s: &u16) -> Option<u64> {
        ((*s as usize) < self.len()).then_some(*s as u64)
    }

    fn decode(&self, code: u64) -> Option<u16> {
        (code < self.len() as u64).then_some(code as u16)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn copy_then_stop() -> TableSpec {
        // 0/1: undecided with belief 0/1, 2/3: done with belief 0/1.
        TableSpec {
            name: "copy".into(),
            initial: [0, 1],
            beliefs: vec![0, 1, 0, 1],
            initiators: vec![true, true, false, false],
            pair: vec![
                vec![(2, 2), (3, 3), (2, 2), (3, 3)],
                vec![(2, 2), (3, 3), (2, 2), (3, 3)],
                vec![],
                vec![],
            ],
            idle: vec![0, 1, 2, 3],
            rejected: None,
        }
    }

    #[test]
    fn table_terminal_predicate() {
        let t = TableProtocol::new(copy_then_stop()).unwrap();
        let uni = enumerate_universe(&t, 100).unwrap();
        for s in &uni {
            assert_eq!(t.is_terminal(s), is_terminal_by_definition(&t, s, &uni));
        }
        assert!(t.is_terminal(&2) && t.is_terminal(&3));
        assert!(!t.is_terminal(&0));
    }

    #[test]
    fn table_validation() {
        let mut spec = copy_then_stop();
        spec.initial = [1, 0];
        assert!(TableProtocol::new(spec).is_err());
        let mut spec = copy_then_stop();
        spec.pair[0][1] = (9, 0);
        assert!(TableProtocol::new(spec).is_err());
        let mut spec = copy_then_stop();
        spec.idle.pop();
        assert!(TableProtocol::new(spec).is_err());
    }

    #[test]
    fn table_json_round_trip() {
        let t = TableProtocol::new(copy_then_stop()).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: TableProtocol = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);
        assert!(serde_json::from_str::<TableProtocol>(r#"{"name":"x","initial":[0,0],"beliefs":[0,1],"initiators":[false,false],"pair":[[],[]],"idle":[0,1]}"#).is_err());
    }

    #[test]
    fn universe_limit() {
        let t = TableProtocol::new(copy_then_stop()).unwrap();
        assert_eq!(
            enumerate_universe(&t, 3),
            Err(Error::UniverseTooLarge { size: 4, limit: 3 })
        );
    }
}
