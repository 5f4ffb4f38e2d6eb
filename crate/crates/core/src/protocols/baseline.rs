use std::fmt;

use crate::bit::Bit;
use crate::protocol::Protocol;

/// State of the three-state approximate-majority automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TriState {
    Zero,
    One,
    Blank,
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriState::Zero => "0",
            TriState::One => "1",
            TriState::Blank => "_",
        })
    }
}

/// Classical three-state approximate majority: every node initiates at every
/// ring; an initiator holding a bit that meets the opposite bit erases itself
/// to blank, and a blank initiator adopts the bit it sees.
///
/// Blank nodes report belief 0. There are no terminal states.
#[derive(Debug, Clone, Copy, Default)]
pub struct Baseline3State;

impl Protocol for Baseline3State {
    type State = TriState;

    fn name(&self) -> &str {
        "baseline-3state"
    }

    fn initial_state(&self, bit: Bit) -> TriState {
        match bit {
            Bit::Zero => TriState::Zero,
            Bit::One => TriState::One,
        }
    }

    fn is_initiator(&self, _s: &TriState) -> bool {
        true
    }

    fn on_initiate(&self, a: &TriState, b: &TriState) -> (TriState, TriState) {
        use TriState::*;
        let next = match (a, b) {
            (Zero, One) | (One, Zero) => Blank,
            (Blank, Zero) => Zero,
            (Blank, One) => One,
            _ => *a,
        };
        (next, *b)
    }

    fn on_idle(&self, s: &TriState) -> TriState {
        *s
    }

    fn belief(&self, s: &TriState) -> Bit {
        Bit::from(*s == TriState::One)
    }

    fn is_terminal(&self, _s: &TriState) -> bool {
        false
    }

    fn universe_size(&self) -> u64 {
        3
    }

    fn encode(&self, s: &TriState) -> Option<u64> {
        Some(*s as u64)
    }

    fn decode(&self, code: u64) -> Option<TriState> {
        [TriState::Zero, TriState::One, TriState::Blank].get(code as usize).copied()
    }

    fn kind(&self, s: &TriState) -> usize {
        *s as usize
    }

    fn kind_names(&self) -> &'static [&'static str] {
        &["zero", "one", "blank"]
    }
}
