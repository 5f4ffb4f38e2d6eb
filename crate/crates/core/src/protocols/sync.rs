use std::fmt;

use super::{join_digits, split_digits, tri_from_index, tri_index};
use crate::bit::{majority3, Bit};
use crate::error::{Error, Result};
use crate::params::{ParamSet, SyncParams};
use crate::protocol::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SyncState {
    /// `(1, eta, d, d', b', b)`: future type `eta`, global step `d`,
    /// trial counter `d'`, test bit `b'`.
    Aspirant { eta: i8, d: u32, trials: u32, test: i8, b: Bit },
    /// `(2, m, d, b)`: level `m`, round counter `d`.
    Expert { m: u32, d: u32, b: Bit },
    /// `(3, d, b)`
    Regular { d: u32, b: Bit },
    /// `(4, b)`
    Terminal { b: Bit },
    /// `(5, b', b)`
    Candidate { test: i8, b: Bit },
    /// `(6, b)`
    Informed { b: Bit },
}

impl fmt::Display for SyncState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SyncState::Aspirant { eta, d, trials, test, b } => write!(f, "(1,{eta},{d},{trials},{test},{b})"),
            SyncState::Expert { m, d, b } => write!(f, "(2,{m},{d},{b})"),
            SyncState::Regular { d, b } => write!(f, "(3,{d},{b})"),
            SyncState::Terminal { b } => write!(f, "(4,{b})"),
            SyncState::Candidate { test, b } => write!(f, "(5,{test},{b})"),
            SyncState::Informed { b } => write!(f, "(6,{b})"),
        }
    }
}

/// Round-based protocol: a handshake-driven expert selection, `M`
/// estimation rounds of length `2K + 3` in which candidates take the majority
/// of three expert bits and new experts spread by doubling, then informed
/// nodes push and regular nodes pull every `3MK` steps.
///
/// Experts count their round position in `d`: values `1..=2K` are the
/// doubling steps and `2K+1..=2K+3` are the three candidate-forming steps of
/// the next round.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncProtocol {
    params: SyncParams,
}

const ETA_UNDECIDED: i8 = -1;
const ETA_EXPERT: i8 = 2;
const ETA_REGULAR: i8 = 3;

impl SyncProtocol {
    pub fn new(params: SyncParams) -> SyncProtocol {
        SyncProtocol { params }
    }

    pub fn from_param_set(ps: &ParamSet) -> Result<SyncProtocol> {
        ps.sync()
            .cloned()
            .map(SyncProtocol::new)
            .ok_or_else(|| Error::InvalidTable(format!("{} parameters given to sync", ps.protocol)))
    }

    pub fn params(&self) -> &SyncParams {
        &self.params
    }

    /// Whether an aspirant at step `d` with belief `b` is in a polling slot.
    fn polls(&self, d: u32, b: Bit) -> bool {
        d >= 5 && d < self.params.selection_len && d.is_multiple_of(2) == (b == Bit::Zero)
    }

    fn handshake_step(d: u32, b: Bit) -> bool {
        match b {
            Bit::Zero => d == 1 || d == 2,
            Bit::One => d == 3 || d == 4,
        }
    }

    /// Aspirant update when it is not communicating as initiator.
    fn aspirant_tick(&self, eta: i8, d: u32, trials: u32, test: i8, b: Bit) -> SyncState {
        let p = &self.params;
        if d >= p.selection_len {
            return if eta == ETA_EXPERT {
                SyncState::Expert { m: 0, d: 2 * p.round_k + 1, b }
            } else {
                SyncState::Regular { d: 1, b }
            };
        }
        let eta = if self.polls(d, b) && eta == ETA_UNDECIDED && trials >= p.k {
            ETA_EXPERT
        } else {
            eta
        };
        SyncState::Aspirant { eta, d: d + 1, trials, test, b }
    }

    /// Self-update of an initiator. `partner` is `None` when rejected.
    fn initiator_next(&self, s: &SyncState, partner: Option<&SyncState>) -> SyncState {
        use SyncState::*;
        let p = &self.params;
        match *s {
            Aspirant { eta, d, trials, test, b } => {
                let established = partner.is_some();
                if d == 1 || d == 3 {
                    let test = if established { 1 } else { 0 };
                    return Aspirant { eta, d: d + 1, trials, test, b };
                }
                if d == 2 || d == 4 {
                    let keep = (test == 0 && established) || (test == 1 && !established);
                    let test = if keep { test } else { -1 };
                    return Aspirant { eta, d: d + 1, trials, test, b };
                }
                let (mut eta, mut trials) = (eta, trials);
                if let Some(Aspirant { test: seen, .. }) = partner {
                    match *seen {
                        0 => trials = (trials + 1).min(p.k),
                        1 => eta = ETA_REGULAR,
                        _ => {}
                    }
                }
                Aspirant { eta, d: d + 1, trials, test, b }
            }
            Expert { m, d, b } => {
                if m >= p.levels && d >= 2 * p.round_k {
                    Informed { b }
                } else if d >= p.round_len {
                    Regular { d: 1, b }
                } else {
                    Expert { m, d: d + 1, b }
                }
            }
            Regular { b, .. } => match partner {
                Some(t @ Terminal { .. }) => *t,
                _ => Regular { d: 1, b },
            },
            Informed { b } => match partner {
                None | Some(Terminal { .. }) => Terminal { b },
                Some(_) => Informed { b },
            },
            Terminal { .. } | Candidate { .. } => *s,
        }
    }

    /// Partner update given the initiator's pre-state and post-state.
    fn partner_next(&self, init: &SyncState, init_post: &SyncState, j: &SyncState) -> SyncState {
        use SyncState::*;
        let p = &self.params;
        let k = p.round_k;
        match (*init, *j) {
            (_, Terminal { .. }) => *j,
            // A top-level expert ends its round by informing its partner.
            (Expert { m, d, .. }, _) if m >= p.levels && d >= 2 * k => match *j {
                Informed { .. } => *j,
                _ => *init_post,
            },
            (Expert { d, b, .. }, _) if d == 2 * k + 1 => match *j {
                Regular { .. } => Candidate { test: -1, b },
                _ => self.passive(j),
            },
            (Expert { d, b, .. }, _) if d == 2 * k + 2 => match *j {
                Candidate { test: -1, b: own } => Candidate { test: b.as_u8() as i8, b: own },
                _ => self.passive(j),
            },
            (Expert { m, d, b }, _) if d >= 2 * k + 3 => match *j {
                Candidate { test, b: own } if test != -1 => Expert {
                    m: (m + 1).min(p.levels),
                    d: 1,
                    b: Bit::from_u8_lossy(majority3(own.as_u8(), test as u8, b.as_u8())),
                },
                _ => self.passive(j),
            },
            // Doubling: the partner becomes a copy of the expert.
            (Expert { .. }, Informed { .. }) => *j,
            (Expert { .. }, _) => *init_post,
            (Informed { b }, _) => match *j {
                Informed { .. } => *j,
                _ => Informed { b },
            },
            _ => self.passive(j),
        }
    }

    /// A contacted node that is not otherwise affected still follows its clock.
    fn passive(&self, j: &SyncState) -> SyncState {
        match *j {
            SyncState::Aspirant { .. } | SyncState::Regular { .. } => self.on_idle(j),
            other => other,
        }
    }

    fn radices(&self) -> ([u64; 5], [u64; 3], [u64; 2]) {
        let p = &self.params;
        let (k, m, d) = (p.k as u64, p.levels as u64, p.selection_len as u64);
        (
            [8, d, k + 1, 3, 2],
            [m + 1, p.round_len as u64, 2],
            [p.pull_interval as u64, 2],
        )
    }

    fn blocks(&self) -> [u64; 6] {
        let (a, e, r) = self.radices();
        [a.iter().product(), e.iter().product(), r.iter().product(), 2, 6, 2]
    }
}

impl Protocol for SyncProtocol {
    type State = SyncState;

    fn name(&self) -> &str {
        "sync"
    }

    fn initial_state(&self, bit: Bit) -> SyncState {
        SyncState::Aspirant { eta: ETA_UNDECIDED, d: 1, trials: 0, test: -1, b: bit }
    }

    fn is_initiator(&self, s: &SyncState) -> bool {
        let p = &self.params;
        match *s {
            SyncState::Aspirant { eta, d, trials, b, .. } => {
                Self::handshake_step(d, b) || (self.polls(d, b) && eta == ETA_UNDECIDED && trials < p.k)
            }
            SyncState::Expert { .. } | SyncState::Informed { .. } => true,
            SyncState::Regular { d, .. } => d >= p.pull_interval,
            SyncState::Terminal { .. } | SyncState::Candidate { .. } => false,
        }
    }

    fn on_initiate(&self, a: &SyncState, j: &SyncState) -> (SyncState, SyncState) {
        let post = self.initiator_next(a, Some(j));
        let partner = self.partner_next(a, &post, j);
        (post, partner)
    }

    fn on_rejected(&self, s: &SyncState) -> SyncState {
        if self.is_initiator(s) {
            self.initiator_next(s, None)
        } else {
            *s
        }
    }

    fn on_idle(&self, s: &SyncState) -> SyncState {
        use SyncState::*;
        let p = &self.params;
        match *s {
            Aspirant { eta, d, trials, test, b } => self.aspirant_tick(eta, d, trials, test, b),
            Regular { d, b } if d < p.pull_interval => Regular { d: d + 1, b },
            Candidate { b, .. } => Regular { d: 1, b },
            other => other,
        }
    }

    fn belief(&self, s: &SyncState) -> Bit {
        match *s {
            SyncState::Aspirant { b, .. }
            | SyncState::Expert { b, .. }
            | SyncState::Regular { b, .. }
            | SyncState::Terminal { b }
            | SyncState::Candidate { b, .. }
            | SyncState::Informed { b } => b,
        }
    }

    fn is_terminal(&self, s: &SyncState) -> bool {
        matches!(s, SyncState::Terminal { .. })
    }

    fn universe_size(&self) -> u64 {
        self.blocks().iter().sum()
    }

    fn encode(&self, s: &SyncState) -> Option<u64> {
        use SyncState::*;
        let (ar, er, rr) = self.radices();
        let tri = |v: i8| (-1..=1).contains(&v).then(|| tri_index(v));
        let (block, local) = match *s {
            Aspirant { eta, d, trials, test, b } => {
                if !(-1..=6).contains(&eta) {
                    return None;
                }
                let digits = [(eta + 1) as u64, (d as u64).wrapping_sub(1), trials as u64, tri(test)?, b.as_u8() as u64];
                (0, join_digits(digits, ar)?)
            }
            Expert { m, d, b } => (1, join_digits([m as u64, (d as u64).wrapping_sub(1), b.as_u8() as u64], er)?),
            Regular { d, b } => (2, join_digits([(d as u64).wrapping_sub(1), b.as_u8() as u64], rr)?),
            Terminal { b } => (3, b.as_u8() as u64),
            Candidate { test, b } => (4, tri(test)? * 2 + b.as_u8() as u64),
            Informed { b } => (5, b.as_u8() as u64),
        };
        Some(self.blocks()[..block].iter().sum::<u64>() + local)
    }

    fn contains(&self, s: &SyncState) -> bool {
        use SyncState::*;
        let p = &self.params;
        let upto = |v: u32, hi: u32| (1..=hi).contains(&v);
        let tri = |v: i8| (-1..=1).contains(&v);
        match *s {
            Aspirant { eta, d, trials, test, .. } => {
                (-1..=6).contains(&eta) && upto(d, p.selection_len) && trials <= p.k && tri(test)
            }
            Expert { m, d, .. } => m <= p.levels && upto(d, p.round_len),
            Regular { d, .. } => upto(d, p.pull_interval),
            Candidate { test, .. } => tri(test),
            Terminal { .. } | Informed { .. } => true,
        }
    }

    fn decode(&self, code: u64) -> Option<SyncState> {
        use SyncState::*;
        let (ar, er, rr) = self.radices();
        let bit = |v: u64| Bit::from_u8_lossy(v as u8);
        let mut c = code;
        for (block, size) in self.blocks().into_iter().enumerate() {
            if c >= size {
                c -= size;
                continue;
            }
            return Some(match block {
                0 => {
                    let [eta, d, trials, test, b] = split_digits(c, ar);
                    Aspirant {
                        eta: eta as i8 - 1,
                        d: d as u32 + 1,
                        trials: trials as u32,
                        test: tri_from_index(test),
                        b: bit(b),
                    }
                }
                1 => {
                    let [m, d, b] = split_digits(c, er);
                    Expert { m: m as u32, d: d as u32 + 1, b: bit(b) }
                }
                2 => {
                    let [d, b] = split_digits(c, rr);
                    Regular { d: d as u32 + 1, b: bit(b) }
                }
                3 => Terminal { b: bit(c) },
                4 => Candidate { test: tri_from_index(c / 2), b: bit(c % 2) },
                _ => Informed { b: bit(c) },
            });
        }
        None
    }

    fn kind(&self, s: &SyncState) -> usize {
        match s {
            SyncState::Aspirant { .. } => 0,
            SyncState::Expert { .. } => 1,
            SyncState::Regular { .. } => 2,
            SyncState::Terminal { .. } => 3,
            SyncState::Candidate { .. } => 4,
            SyncState::Informed { .. } => 5,
        }
    }

    fn kind_names(&self) -> &'static [&'static str] {
        &["aspirant", "expert", "regular", "terminal", "candidate", "informed"]
    }
}
