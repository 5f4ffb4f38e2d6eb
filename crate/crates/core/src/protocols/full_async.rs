use std::fmt;

use super::{join_digits, split_digits, tri_from_index, tri_index};
use crate::bit::{majority3, Bit};
use crate::error::{Error, Result};
use crate::params::{FullAsyncParams, ParamSet};
use crate::protocol::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FullAsyncState {
    /// `(1, d, xi, chi, b', b'', b''', init, b)`
    Aspirant { d: u32, xi: u8, phase: u8, bits: [i8; 3], init: Bit, b: Bit },
    /// `(2, m, d, xi, init, b)`
    Expert { m: u32, d: u32, xi: u8, init: Bit, b: Bit },
    /// `(3, d, xi, psi, init, b)`; `psi` records a past expert.
    Regular { d: u32, xi: u8, psi: bool, init: Bit, b: Bit },
    /// `(4, init, b)`
    Terminal { init: Bit, b: Bit },
    /// `(5, m, d, xi, b1, b2, b3, init, b)`
    Candidate { m: u32, d: u32, xi: u8, slots: [i8; 3], init: Bit, b: Bit },
    /// `(6, init, b)`
    Informed { init: Bit, b: Bit },
}

impl fmt::Display for FullAsyncState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FullAsyncState::*;
        match *self {
            Aspirant { d, xi, phase, bits: [x, y, z], init, b } => {
                write!(f, "(1,{d},{xi},{phase},{x},{y},{z},{init},{b})")
            }
            Expert { m, d, xi, init, b } => write!(f, "(2,{m},{d},{xi},{init},{b})"),
            Regular { d, xi, psi, init, b } => write!(f, "(3,{d},{xi},{},{init},{b})", psi as u8),
            Terminal { init, b } => write!(f, "(4,{init},{b})"),
            Candidate { m, d, xi, slots: [x, y, z], init, b } => {
                write!(f, "(5,{m},{d},{xi},{x},{y},{z},{init},{b})")
            }
            Informed { init, b } => write!(f, "(6,{init},{b})"),
        }
    }
}

impl FullAsyncState {
    /// The initial input bit carried by every state.
    pub fn init(&self) -> Bit {
        use FullAsyncState::*;
        match *self {
            Aspirant { init, .. }
            | Expert { init, .. }
            | Regular { init, .. }
            | Terminal { init, .. }
            | Candidate { init, .. }
            | Informed { init, .. } => init,
        }
    }
}

/// Poisson-clock protocol with typed experts. Aspirants draw a uniform
/// expert type from quadruples of sampled input bits, run a `K`-pair von
/// Neumann game and wait `T_aspirant` rings; experts spread by doubling and
/// at the end of their countdown feed candidates, which become next-level
/// experts after collecting one bit from each of the types 1, 2 and 3.
#[derive(Debug, Clone, PartialEq)]
pub struct FullAsync {
    params: FullAsyncParams,
}

impl FullAsync {
    pub fn new(params: FullAsyncParams) -> FullAsync {
        FullAsync { params }
    }

    pub fn from_param_set(ps: &ParamSet) -> Result<FullAsync> {
        ps.full_async()
            .cloned()
            .map(FullAsync::new)
            .ok_or_else(|| Error::InvalidTable(format!("{} parameters given to full-async", ps.protocol)))
    }

    pub fn params(&self) -> &FullAsyncParams {
        &self.params
    }

    fn aspirant_ring(&self, s: &FullAsyncState, sample: Bit) -> FullAsyncState {
        use FullAsyncState::*;
        let p = &self.params;
        let Aspirant { d, xi, phase, bits, init, b } = *s else {
            return *s;
        };
        let seen = sample.as_u8() as i8;
        match phase {
            1 => {
                if let Some(slot) = bits.iter().position(|&x| x == -1) {
                    let mut bits = bits;
                    bits[slot] = seen;
                    return Aspirant { d, xi, phase, bits, init, b };
                }
                let quad = [bits[0], bits[1], bits[2], seen];
                let ones = quad.iter().filter(|&&x| x == 1).count();
                if ones == 1 || ones == 3 {
                    let odd = if ones == 1 { 1 } else { 0 };
                    let pos = quad.iter().position(|&x| x == odd).unwrap_or(0);
                    Aspirant { d, xi: pos as u8 + 1, phase: 2, bits: [-1; 3], init, b }
                } else {
                    Aspirant { d, xi, phase, bits: [-1; 3], init, b }
                }
            }
            2 => {
                let mut d = d;
                let mut bits = bits;
                if d <= p.k {
                    let test = bits[0];
                    if test == seen {
                        bits[0] = -1;
                    } else if test == -1 {
                        bits[0] = seen;
                    } else if test == 0 {
                        d += 1;
                        bits[0] = -1;
                    } else {
                        return Regular { d: 1, xi: xi.max(1), psi: false, init, b: init };
                    }
                }
                if d > p.k {
                    Aspirant { d: 1, xi, phase: 3, bits, init, b }
                } else {
                    Aspirant { d, xi, phase, bits, init, b }
                }
            }
            _ => *s,
        }
    }

    fn expert_after(&self, m: u32, d: u32, xi: u8, init: Bit, b: Bit) -> FullAsyncState {
        let p = &self.params;
        if d >= p.expert_counter_max {
            if m >= p.levels {
                FullAsyncState::Informed { init, b }
            } else {
                FullAsyncState::Regular { d: 1, xi, psi: true, init, b }
            }
        } else {
            FullAsyncState::Expert { m, d: d + 1, xi, init, b }
        }
    }

    /// Effect of a contact by an initiator in pre-state `by` on `j`.
    fn contacted(&self, by: &FullAsyncState, j: &FullAsyncState) -> FullAsyncState {
        use FullAsyncState::*;
        let p = &self.params;
        let last = p.expert_counter_max;
        match (*by, *j) {
            (Expert { m, d, b, .. }, Regular { xi, psi, init, .. }) if d < last => {
                if psi {
                    *j
                } else {
                    Expert { m, d: d + 1, xi, init, b }
                }
            }
            (Expert { m, b, .. }, Regular { init, .. }) if m >= p.levels => Informed { init, b },
            (Expert { m, xi: fed, b, .. }, Regular { xi, psi: false, init, .. }) if (1..=3).contains(&fed) => {
                let mut slots = [-1; 3];
                slots[fed as usize - 1] = b.as_u8() as i8;
                Candidate { m: m + 1, d: 1, xi, slots, init, b }
            }
            (Expert { m, d, xi: fed, b, .. }, Candidate { m: level, d: cd, xi, slots, init, b: cb })
                if d >= last
                    && m + 1 == level
                    && (1..=3).contains(&fed)
                    && slots[fed as usize - 1] == -1 =>
            {
                let mut slots = slots;
                slots[fed as usize - 1] = b.as_u8() as i8;
                if slots.iter().all(|&x| x != -1) {
                    let maj = majority3(slots[0] as u8, slots[1] as u8, slots[2] as u8);
                    Expert { m: level, d: 1, xi, init, b: Bit::from_u8_lossy(maj) }
                } else {
                    Candidate { m: level, d: cd, xi, slots, init, b: cb }
                }
            }
            (Informed { b, .. }, Regular { init, .. }) => Informed { init, b },
            _ => *j,
        }
    }

    fn radices(&self) -> ([u64; 8], [u64; 5], [u64; 5], [u64; 8]) {
        let p = &self.params;
        let (t, m, k, r, c) = (
            p.t_aspirant as u64,
            p.levels as u64,
            p.expert_counter_max as u64,
            p.regular_interval as u64,
            p.candidate_expiry,
        );
        (
            [t, 5, 3, 3, 3, 3, 2, 2],
            [m + 1, k, 4, 2, 2],
            [r, 4, 2, 2, 2],
            [m, c, 4, 3, 3, 3, 2, 2],
        )
    }

    fn blocks(&self) -> [u64; 6] {
        let (a, e, r, c) = self.radices();
        [
            a.iter().product(),
            e.iter().product(),
            r.iter().product(),
            4,
            c.iter().product(),
            4,
        ]
    }
}

impl Protocol for FullAsync {
    type State = FullAsyncState;

    fn name(&self) -> &str {
        "full-async"
    }

    fn initial_state(&self, bit: Bit) -> FullAsyncState {
        FullAsyncState::Aspirant { d: 1, xi: 0, phase: 1, bits: [-1; 3], init: bit, b: bit }
    }

    fn is_initiator(&self, s: &FullAsyncState) -> bool {
        use FullAsyncState::*;
        match *s {
            Aspirant { phase, .. } => phase < 3,
            Expert { .. } | Informed { .. } => true,
            Regular { d, .. } => d >= self.params.regular_interval,
            Terminal { .. } | Candidate { .. } => false,
        }
    }

    fn on_initiate(&self, a: &FullAsyncState, j: &FullAsyncState) -> (FullAsyncState, FullAsyncState) {
        use FullAsyncState::*;
        let post = match *a {
            Aspirant { .. } => self.aspirant_ring(a, j.init()),
            Expert { m, d, xi, init, b } => self.expert_after(m, d, xi, init, b),
            Regular { xi, psi, init, b, .. } => match *j {
                Terminal { b: tb, .. } => Terminal { init, b: tb },
                _ => Regular { d: 1, xi, psi, init, b },
            },
            Informed { init, b } => match *j {
                Informed { .. } | Terminal { .. } => Terminal { init, b },
                _ => *a,
            },
            Terminal { .. } | Candidate { .. } => *a,
        };
        (post, self.contacted(a, j))
    }

    fn on_idle(&self, s: &FullAsyncState) -> FullAsyncState {
        use FullAsyncState::*;
        let p = &self.params;
        match *s {
            Aspirant { d, xi, phase: 3, bits, init, b } => {
                if d < p.t_aspirant {
                    Aspirant { d: d + 1, xi, phase: 3, bits, init, b }
                } else {
                    Expert { m: 0, d: 1, xi: xi.max(1), init, b: init }
                }
            }
            Regular { d, xi, psi, init, b } if d < p.regular_interval => Regular { d: d + 1, xi, psi, init, b },
            Candidate { m, d, xi, slots, init, b } => {
                if (d as u64) < p.candidate_expiry {
                    Candidate { m, d: d + 1, xi, slots, init, b }
                } else {
                    Regular { d: 1, xi, psi: true, init, b }
                }
            }
            other => other,
        }
    }

    fn belief(&self, s: &FullAsyncState) -> Bit {
        use FullAsyncState::*;
        match *s {
            Aspirant { b, .. }
            | Expert { b, .. }
            | Regular { b, .. }
            | Terminal { b, .. }
            | Candidate { b, .. }
            | Informed { b, .. } => b,
        }
    }

    fn is_terminal(&self, s: &FullAsyncState) -> bool {
        matches!(s, FullAsyncState::Terminal { .. })
    }

    fn universe_size(&self) -> u64 {
        self.blocks().iter().sum()
    }

    fn encode(&self, s: &FullAsyncState) -> Option<u64> {
        use FullAsyncState::*;
        let (ar, er, rr, cr) = self.radices();
        let tri = |v: i8| (-1..=1).contains(&v).then(|| tri_index(v));
        let bit = |b: Bit| b.as_u8() as u64;
        let less1 = |v: u64| v.wrapping_sub(1);
        let (block, local) = match *s {
            Aspirant { d, xi, phase, bits: [x, y, z], init, b } => (
                0,
                join_digits(
                    [less1(d as u64), xi as u64, less1(phase as u64), tri(x)?, tri(y)?, tri(z)?, bit(init), bit(b)],
                    ar,
                )?,
            ),
            Expert { m, d, xi, init, b } => (
                1,
                join_digits([m as u64, less1(d as u64), less1(xi as u64), bit(init), bit(b)], er)?,
            ),
            Regular { d, xi, psi, init, b } => (
                2,
                join_digits([less1(d as u64), less1(xi as u64), psi as u64, bit(init), bit(b)], rr)?,
            ),
            Terminal { init, b } => (3, bit(init) * 2 + bit(b)),
            Candidate { m, d, xi, slots: [x, y, z], init, b } => (
                4,
                join_digits(
                    [less1(m as u64), less1(d as u64), less1(xi as u64), tri(x)?, tri(y)?, tri(z)?, bit(init), bit(b)],
                    cr,
                )?,
            ),
            Informed { init, b } => (5, bit(init) * 2 + bit(b)),
        };
        Some(self.blocks()[..block].iter().sum::<u64>() + local)
    }

    fn contains(&self, s: &FullAsyncState) -> bool {
        use FullAsyncState::*;
        let p = &self.params;
        let upto = |v: u32, hi: u32| (1..=hi).contains(&v);
        let tri = |v: &[i8; 3]| v.iter().all(|x| (-1..=1).contains(x));
        match *s {
            Aspirant { d, xi, phase, bits, .. } => {
                upto(d, p.t_aspirant) && xi <= 4 && (1..=3).contains(&phase) && tri(&bits)
            }
            Expert { m, d, xi, .. } => m <= p.levels && upto(d, p.expert_counter_max) && (1..=4).contains(&xi),
            Regular { d, xi, .. } => upto(d, p.regular_interval) && (1..=4).contains(&xi),
            Candidate { m, d, xi, slots, .. } => {
                upto(m, p.levels)
                    && (d as u64) >= 1
                    && (d as u64) <= p.candidate_expiry
                    && (1..=4).contains(&xi)
                    && tri(&slots)
            }
            Terminal { .. } | Informed { .. } => true,
        }
    }

    fn decode(&self, code: u64) -> Option<FullAsyncState> {
        use FullAsyncState::*;
        let (ar, er, rr, cr) = self.radices();
        let bit = |v: u64| Bit::from_u8_lossy(v as u8);
        let mut c = code;
        for (block, size) in self.blocks().into_iter().enumerate() {
            if c >= size {
                c -= size;
                continue;
            }
            return Some(match block {
                0 => {
                    let [d, xi, ph, x, y, z, init, b] = split_digits(c, ar);
                    Aspirant {
                        d: d as u32 + 1,
                        xi: xi as u8,
                        phase: ph as u8 + 1,
                        bits: [tri_from_index(x), tri_from_index(y), tri_from_index(z)],
                        init: bit(init),
                        b: bit(b),
                    }
                }
                1 => {
                    let [m, d, xi, init, b] = split_digits(c, er);
                    Expert { m: m as u32, d: d as u32 + 1, xi: xi as u8 + 1, init: bit(init), b: bit(b) }
                }
                2 => {
                    let [d, xi, psi, init, b] = split_digits(c, rr);
                    Regular { d: d as u32 + 1, xi: xi as u8 + 1, psi: psi == 1, init: bit(init), b: bit(b) }
                }
                3 => Terminal { init: bit(c / 2), b: bit(c % 2) },
                4 => {
                    let [m, d, xi, x, y, z, init, b] = split_digits(c, cr);
                    Candidate {
                        m: m as u32 + 1,
                        d: d as u32 + 1,
                        xi: xi as u8 + 1,
                        slots: [tri_from_index(x), tri_from_index(y), tri_from_index(z)],
                        init: bit(init),
                        b: bit(b),
                    }
                }
                _ => Informed { init: bit(c / 2), b: bit(c % 2) },
            });
        }
        None
    }

    fn kind(&self, s: &FullAsyncState) -> usize {
        use FullAsyncState::*;
        match s {
            Aspirant { .. } => 0,
            Expert { .. } => 1,
            Regular { .. } => 2,
            Terminal { .. } => 3,
            Candidate { .. } => 4,
            Informed { .. } => 5,
        }
    }

    fn kind_names(&self) -> &'static [&'static str] {
        &["aspirant", "expert", "regular", "terminal", "candidate", "informed"]
    }
}

#[cfg(test)]
mod tests {
    use super::FullAsyncState::*;
    use super::*;
    use crate::params::{derive_params, Overrides, ProtocolId};
    use crate::protocol::{enumerate_universe, is_terminal_by_definition};

    const O: Bit = Bit::Zero;
    const I: Bit = Bit::One;

    fn unscaled() -> FullAsync {
        FullAsync::from_param_set(&derive_params(ProtocolId::FullAsync, 65536, 0.2, Overrides::UNIT).unwrap()).unwrap()
    }

    pub(crate) fn tiny() -> FullAsync {
        let o = Overrides {
            aspirant_scale: 0.0001,
            k_scale: 0.05,
            m_scale: 0.25,
            ..Overrides::UNIT
        };
        FullAsync::from_param_set(&derive_params(ProtocolId::FullAsync, 16, 0.2, o).unwrap()).unwrap()
    }

    fn reg(psi: bool) -> FullAsyncState {
        Regular { d: 2, xi: 4, psi, init: O, b: O }
    }

    fn asp1(bits: [i8; 3]) -> FullAsyncState {
        Aspirant { d: 1, xi: 0, phase: 1, bits, init: O, b: O }
    }

    fn with_init(bit: Bit) -> FullAsyncState {
        Terminal { init: bit, b: O }
    }

    #[test]
    fn quadruple_type_draw() {
        let p = unscaled();
        let (post, _) = p.on_initiate(&asp1([0, 1, 1]), &with_init(I));
        assert_eq!(post, Aspirant { d: 1, xi: 1, phase: 2, bits: [-1; 3], init: O, b: O });
        let (post, _) = p.on_initiate(&asp1([0, 0, 1]), &with_init(O));
        assert_eq!(post, Aspirant { d: 1, xi: 3, phase: 2, bits: [-1; 3], init: O, b: O });
        let (post, _) = p.on_initiate(&asp1([0, 1, 1]), &with_init(O));
        assert_eq!(post, asp1([-1; 3]));
        let (post, _) = p.on_initiate(&asp1([1, -1, -1]), &with_init(O));
        assert_eq!(post, asp1([1, 0, -1]));
    }

    #[test]
    fn pair_game() {
        let p = unscaled();
        let k = p.params().k;
        let a = |d, t| Aspirant { d, xi: 2, phase: 2, bits: [t, -1, -1], init: I, b: I };
        assert_eq!(p.on_initiate(&a(1, -1), &with_init(O)).0, a(1, 0));
        assert_eq!(p.on_initiate(&a(1, 0), &with_init(O)).0, a(1, -1));
        assert_eq!(p.on_initiate(&a(3, 0), &with_init(I)).0, a(4, -1));
        assert_eq!(p.on_initiate(&a(3, 1), &with_init(O)).0, Regular { d: 1, xi: 2, psi: false, init: I, b: I });
        let done = p.on_initiate(&a(k, 0), &with_init(I)).0;
        assert_eq!(done, Aspirant { d: 1, xi: 2, phase: 3, bits: [-1; 3], init: I, b: I });
        assert!(!p.is_initiator(&done));
    }

    #[test]
    fn waiting_then_expert() {
        let p = unscaled();
        let t = p.params().t_aspirant;
        let w = Aspirant { d: 5, xi: 4, phase: 3, bits: [-1; 3], init: I, b: I };
        assert_eq!(p.on_idle(&w), Aspirant { d: 6, xi: 4, phase: 3, bits: [-1; 3], init: I, b: I });
        assert_eq!(p.on_idle(&Aspirant { d: t, xi: 4, phase: 3, bits: [-1; 3], init: I, b: I }), Expert { m: 0, d: 1, xi: 4, init: I, b: I });
    }

    #[test]
    fn expert_spreads_and_retires() {
        let p = unscaled();
        let last = p.params().expert_counter_max;
        let e = Expert { m: 1, d: 3, xi: 2, init: O, b: I };
        let (a, b) = p.on_initiate(&e, &reg(false));
        assert_eq!(a, Expert { m: 1, d: 4, xi: 2, init: O, b: I });
        assert_eq!(b, Expert { m: 1, d: 4, xi: 4, init: O, b: I });
        assert_eq!(p.on_initiate(&e, &reg(true)).1, reg(true));
        let end = Expert { m: 1, d: last, xi: 2, init: O, b: I };
        assert_eq!(p.on_initiate(&end, &reg(true)).0, Regular { d: 1, xi: 2, psi: true, init: O, b: I });
        let top = Expert { m: p.params().levels, d: last, xi: 2, init: O, b: I };
        assert_eq!(p.on_initiate(&top, &reg(true)), (Informed { init: O, b: I }, Informed { init: O, b: I }));
    }

    #[test]
    fn candidates() {
        let p = unscaled();
        let last = p.params().expert_counter_max;
        let feeder = |xi, b| Expert { m: 1, d: last, xi, init: I, b };
        assert_eq!(
            p.on_initiate(&feeder(3, I), &reg(false)).1,
            Candidate { m: 2, d: 1, xi: 4, slots: [-1, -1, 1], init: O, b: I }
        );
        assert_eq!(p.on_initiate(&feeder(4, I), &reg(false)).1, reg(false));
        let c = Candidate { m: 2, d: 9, xi: 3, slots: [0, -1, 1], init: I, b: O };
        assert_eq!(p.on_initiate(&feeder(2, O), &c).1, Expert { m: 2, d: 1, xi: 3, init: I, b: O });
        // Filled slot or wrong level: unchanged.
        assert_eq!(p.on_initiate(&feeder(1, I), &c).1, c);
        let wrong = Expert { m: 0, d: last, xi: 2, init: I, b: O };
        assert_eq!(p.on_initiate(&wrong, &c).1, c);
        let expiry = p.params().candidate_expiry as u32;
        assert_eq!(p.on_idle(&Candidate { m: 2, d: expiry, xi: 3, slots: [0, -1, 1], init: I, b: O }), Regular { d: 1, xi: 3, psi: true, init: I, b: O });
        assert!(!p.is_initiator(&c));
    }

    #[test]
    fn informed_and_regular() {
        let p = unscaled();
        let inf = Informed { init: O, b: I };
        assert_eq!(p.on_initiate(&inf, &reg(true)), (inf, Informed { init: O, b: I }));
        assert_eq!(p.on_initiate(&inf, &inf).0, Terminal { init: O, b: I });
        let r = Regular { d: p.params().regular_interval, xi: 1, psi: true, init: O, b: O };
        assert!(p.is_initiator(&r));
        assert_eq!(p.on_initiate(&r, &Terminal { init: I, b: I }).0, Terminal { init: O, b: I });
        assert_eq!(p.on_initiate(&r, &reg(false)).0, Regular { d: 1, xi: 1, psi: true, init: O, b: O });
    }

    #[test]
    fn encoding_closure_and_terminals() {
        let p = tiny();
        let uni = enumerate_universe(&p, 200_000).unwrap();
        for (c, s) in uni.iter().enumerate() {
            assert_eq!(p.encode(s), Some(c as u64), "{s}");
        }
        let initiators: Vec<_> = uni.iter().filter(|s| p.is_initiator(s)).copied().collect();
        for s in &uni {
            assert!(p.contains(&p.on_idle(s)), "{s}");
        }
        for a in &initiators {
            for j in &uni {
                let (x, y) = p.on_initiate(a, j);
                assert!(p.contains(&x) && p.contains(&y), "{a} x {j}");
            }
        }
        for s in &uni {
            let by_def = is_terminal_by_definition(&p, s, &uni);
            assert_eq!(by_def, matches!(s, Terminal { .. }), "{s}");
        }
    }
}
