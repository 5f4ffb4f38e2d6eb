use std::fmt;

use super::{join_digits, split_digits, tri_from_index, tri_index};
use crate::bit::Bit;
use crate::error::{Error, Result};
use crate::params::{ParamSet, SimpleAsyncParams};
use crate::protocol::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleAsyncState {
    /// `(1, d, b', b)`: success counter `d`, buffered test bit `b'`.
    Aspirant { d: u32, test: i8, b: Bit },
    /// `(2, xi, d, d', b)`: phase `xi` (1 estimate, 2 push), time counter `d`, 1-counter `d'`.
    Expert { phase: u8, d: u32, ones: u32, b: Bit },
    /// `(3, d, b)`
    Regular { d: u32, b: Bit },
    /// `(4, b)`
    Terminal { b: Bit },
}

impl fmt::Display for SimpleAsyncState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SimpleAsyncState::Aspirant { d, test, b } => write!(f, "(1,{d},{test},{b})"),
            SimpleAsyncState::Expert { phase, d, ones, b } => write!(f, "(2,{phase},{d},{ones},{b})"),
            SimpleAsyncState::Regular { d, b } => write!(f, "(3,{d},{b})"),
            SimpleAsyncState::Terminal { b } => write!(f, "(4,{b})"),
        }
    }
}

/// Aspirants select about `n / log n` experts by von Neumann pairs; experts
/// poll `ceil(C0 log n) - 1` nodes, threshold the count of ones and push
/// their estimate `ceil(log n)` times; regular nodes poll every
/// `ceil(log n)` rings until they meet a terminal node.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleAsync {
    params: SimpleAsyncParams,
}

impl SimpleAsync {
    pub fn new(params: SimpleAsyncParams) -> SimpleAsync {
        SimpleAsync { params }
    }

    pub fn from_param_set(ps: &ParamSet) -> Result<SimpleAsync> {
        ps.simple_async()
            .cloned()
            .map(SimpleAsync::new)
            .ok_or_else(|| Error::InvalidTable(format!("{} parameters given to simple-async", ps.protocol)))
    }

    pub fn params(&self) -> &SimpleAsyncParams {
        &self.params
    }

    fn blocks(&self) -> [u64; 4] {
        let p = &self.params;
        let (s, e, l) = (p.success_target as u64, p.estimation_len as u64, p.push_len as u64);
        [s * 3 * 2, 2 * e * e * 2, l * 2, 2]
    }
}

impl Protocol for SimpleAsync {
    type State = SimpleAsyncState;

    fn name(&self) -> &str {
        "simple-async"
    }

    fn initial_state(&self, bit: Bit) -> SimpleAsyncState {
        SimpleAsyncState::Aspirant { d: 1, test: -1, b: bit }
    }

    fn is_initiator(&self, s: &SimpleAsyncState) -> bool {
        match *s {
            SimpleAsyncState::Aspirant { .. } => true,
            SimpleAsyncState::Expert { phase, d, .. } => phase == 2 || d < self.params.estimation_len,
            SimpleAsyncState::Regular { d, .. } => d == self.params.push_len,
            SimpleAsyncState::Terminal { .. } => false,
        }
    }

    fn on_initiate(
        &self,
        a: &SimpleAsyncState,
        partner: &SimpleAsyncState,
    ) -> (SimpleAsyncState, SimpleAsyncState) {
        use SimpleAsyncState::*;
        let p = &self.params;
        let seen = self.belief(partner);
        match *a {
            Aspirant { d, test, b } => {
                let seen = seen.as_u8() as i8;
                let next = if test == seen {
                    Aspirant { d, test: -1, b }
                } else if test == -1 {
                    Aspirant { d, test: seen, b }
                } else if test == 0 {
                    // (0, 1): one more success.
                    if d + 1 >= p.success_target {
                        Expert { phase: 1, d: 1, ones: 1, b }
                    } else {
                        Aspirant { d: d + 1, test: -1, b }
                    }
                } else {
                    Regular { d: 1, b }
                };
                (next, *partner)
            }
            Expert { phase: 1, d, ones, b } => {
                let ones = (ones + (seen == Bit::One) as u32).min(p.estimation_len);
                (Expert { phase: 1, d: d + 1, ones, b }, *partner)
            }
            Expert { phase, d, ones, b } => {
                let next = if d < p.push_len {
                    Expert { phase, d: d + 1, ones, b }
                } else {
                    Terminal { b }
                };
                let pushed = match partner {
                    Regular { .. } => Terminal { b },
                    other => *other,
                };
                (next, pushed)
            }
            Regular { b, .. } => match partner {
                Terminal { .. } => (*partner, *partner),
                _ => (Regular { d: 1, b }, *partner),
            },
            Terminal { .. } => (*a, *partner),
        }
    }

    fn on_idle(&self, s: &SimpleAsyncState) -> SimpleAsyncState {
        use SimpleAsyncState::*;
        let p = &self.params;
        match *s {
            Expert { phase: 1, d, ones, .. } if d == p.estimation_len => {
                let b = Bit::from(ones as f64 > p.threshold);
                Expert { phase: 2, d: 1, ones, b }
            }
            Regular { d, b } if d < p.push_len => Regular { d: d + 1, b },
            other => other,
        }
    }

    fn belief(&self, s: &SimpleAsyncState) -> Bit {
        match *s {
            SimpleAsyncState::Aspirant { b, .. }
            | SimpleAsyncState::Expert { b, .. }
            | SimpleAsyncState::Regular { b, .. }
            | SimpleAsyncState::Terminal { b } => b,
        }
    }

    fn is_terminal(&self, s: &SimpleAsyncState) -> bool {
        matches!(s, SimpleAsyncState::Terminal { .. })
    }

    fn universe_size(&self) -> u64 {
        self.blocks().iter().sum()
    }

    fn encode(&self, s: &SimpleAsyncState) -> Option<u64> {
        use SimpleAsyncState::*;
        let p = &self.params;
        let blocks = self.blocks();
        let (s_t, e, l) = (p.success_target as u64, p.estimation_len as u64, p.push_len as u64);
        let (block, local) = match *s {
            Aspirant { d, test, b } => (
                0,
                join_digits(
                    [(d as u64).wrapping_sub(1), tri_index(test), b.as_u8() as u64],
                    [s_t, 3, 2],
                )?,
            ),
            Expert { phase, d, ones, b } => (
                1,
                join_digits(
                    [
                        (phase as u64).wrapping_sub(1),
                        (d as u64).wrapping_sub(1),
                        (ones as u64).wrapping_sub(1),
                        b.as_u8() as u64,
                    ],
                    [2, e, e, 2],
                )?,
            ),
            Regular { d, b } => (2, join_digits([(d as u64).wrapping_sub(1), b.as_u8() as u64], [l, 2])?),
            Terminal { b } => (3, b.as_u8() as u64),
        };
        if let Aspirant { test, .. } = *s {
            if !(-1..=1).contains(&test) {
                return None;
            }
        }
        Some(blocks[..block].iter().sum::<u64>() + local)
    }

    fn contains(&self, s: &SimpleAsyncState) -> bool {
        use SimpleAsyncState::*;
        let p = &self.params;
        let upto = |v: u32, hi: u32| (1..=hi).contains(&v);
        match *s {
            Aspirant { d, test, .. } => upto(d, p.success_target) && (-1..=1).contains(&test),
            Expert { phase, d, ones, .. } => {
                upto(phase.into(), 2) && upto(d, p.estimation_len) && upto(ones, p.estimation_len)
            }
            Regular { d, .. } => upto(d, p.push_len),
            Terminal { .. } => true,
        }
    }

    fn decode(&self, code: u64) -> Option<SimpleAsyncState> {
        use SimpleAsyncState::*;
        let p = &self.params;
        let (s_t, e, l) = (p.success_target as u64, p.estimation_len as u64, p.push_len as u64);
        let mut c = code;
        for (block, size) in self.blocks().into_iter().enumerate() {
            if c >= size {
                c -= size;
                continue;
            }
            return Some(match block {
                0 => {
                    let [d, t, b] = split_digits(c, [s_t, 3, 2]);
                    Aspirant { d: d as u32 + 1, test: tri_from_index(t), b: Bit::from_u8_lossy(b as u8) }
                }
                1 => {
                    let [ph, d, o, b] = split_digits(c, [2, e, e, 2]);
                    Expert {
                        phase: ph as u8 + 1,
                        d: d as u32 + 1,
                        ones: o as u32 + 1,
                        b: Bit::from_u8_lossy(b as u8),
                    }
                }
                2 => {
                    let [d, b] = split_digits(c, [l, 2]);
                    Regular { d: d as u32 + 1, b: Bit::from_u8_lossy(b as u8) }
                }
                _ => Terminal { b: Bit::from_u8_lossy(c as u8) },
            });
        }
        None
    }

    fn kind(&self, s: &SimpleAsyncState) -> usize {
        match s {
            SimpleAsyncState::Aspirant { .. } => 0,
            SimpleAsyncState::Expert { .. } => 1,
            SimpleAsyncState::Regular { .. } => 2,
            SimpleAsyncState::Terminal { .. } => 3,
        }
    }

    fn kind_names(&self) -> &'static [&'static str] {
        &["aspirant", "expert", "regular", "terminal"]
    }
}
