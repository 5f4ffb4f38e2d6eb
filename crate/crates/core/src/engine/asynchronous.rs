use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::clock::{ActiveSet, EventClock};
use super::{is_frozen, EventRecord, SimConfig, SimResult, Stop, Tracker};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::protocol::Protocol;

const FROZEN_SCAN_LIMIT: usize = 64;

/// Runs the asynchronous model to completion, the horizon, or a frozen
/// configuration.
///
/// The random stream is consumed strictly in event order: gap, ringing node,
/// and (for initiators) partner.
pub fn run_async<P: Protocol>(p: &P, inst: &Instance, cfg: &SimConfig) -> Result<SimResult> {
    let n = inst.n;
    if n < 2 {
        return Err(Error::TooFewNodes(n as u64));
    }
    let mut states: Vec<P::State> = inst.initial_bits.iter().map(|&b| p.initial_state(b)).collect();
    let mut tracker = Tracker::new(p, &states, inst.majority_bit, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut active = ActiveSet::full(n);
    if cfg.suppress_terminal_rings {
        for (i, s) in states.iter().enumerate() {
            if p.is_terminal(s) {
                active.remove(i);
            }
        }
    }
    let horizon = cfg.horizon.unwrap_or(f64::INFINITY);
    let mut clock = EventClock::default();
    let mut events: u64 = 0;
    let mut next_frozen_check = n as u64;

    let (stop, end) = loop {
        if tracker.terminal == n {
            break (Stop::AllTerminal, clock.time);
        }
        if cfg.halt_when_frozen && tracker.incorrect == 0 && events >= next_frozen_check {
            next_frozen_check = events + n as u64;
            if is_frozen(p, &states, FROZEN_SCAN_LIMIT) {
                break (Stop::Frozen, clock.time);
            }
        }
        let (t, i) = clock.next_event(&active, &mut rng);
        if t > horizon {
            break (Stop::Horizon, horizon);
        }
        tracker.observe_until(t, &states);
        events += 1;

        let si = states[i];
        if p.is_initiator(&si) {
            let r = rng.random_range(0..n - 1);
            let j = if r >= i { r + 1 } else { r };
            tracker.communicate(&si);
            let sj = states[j];
            let (a, b) = p.on_initiate(&si, &sj);
            if a != si || b != sj {
                tracker.change(&si, &a, t)?;
                tracker.change(&sj, &b, t)?;
                states[i] = a;
                states[j] = b;
                if cfg.suppress_terminal_rings {
                    refresh(p, &mut active, i, &si, &a);
                    refresh(p, &mut active, j, &sj, &b);
                }
                if tracker.logging() {
                    let rec = EventRecord {
                        time: t,
                        node: i as u32,
                        partner: Some(j as u32),
                        before: (tracker.code(&si), tracker.code(&sj)),
                        after: (tracker.code(&a), tracker.code(&b)),
                    };
                    tracker.log(rec);
                }
            }
        } else {
            let a = p.on_idle(&si);
            if a != si {
                tracker.change(&si, &a, t)?;
                states[i] = a;
                if cfg.suppress_terminal_rings {
                    refresh(p, &mut active, i, &si, &a);
                }
                if tracker.logging() {
                    let c = (tracker.code(&si), tracker.code(&a));
                    tracker.log(EventRecord {
                        time: t,
                        node: i as u32,
                        partner: None,
                        before: (c.0, c.0),
                        after: (c.1, c.1),
                    });
                }
            }
        }
    };
    Ok(tracker.finish(&states, stop, end, events))
}

#[inline]
fn refresh<P: Protocol>(p: &P, active: &mut ActiveSet, node: usize, old: &P::State, new: &P::State) {
    match (p.is_terminal(old), p.is_terminal(new)) {
        (false, true) => active.remove(node),
        (true, false) => active.insert(node),
        _ => {}
    }
}
