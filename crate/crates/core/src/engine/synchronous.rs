use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{is_frozen, EventRecord, SimConfig, SimResult, Stop, Tracker};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::protocol::Protocol;

const FROZEN_SCAN_LIMIT: usize = 64;

/// Who does what in one synchronous round.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundResolution {
    /// `(initiator, target)` in ascending initiator order.
    pub initiator_targets: Vec<(usize, usize)>,
    /// `(initiator, recipient)` in ascending recipient order.
    pub established: Vec<(usize, usize)>,
    /// Initiators whose request was not established, ascending.
    pub rejected: Vec<usize>,
    /// Nodes taking no part in any communication, ascending.
    pub idle: Vec<usize>,
}

impl RoundResolution {
    pub fn cost(&self) -> u64 {
        self.initiator_targets.len() as u64
    }
}

/// Reusable buffers for the collision rules.
#[derive(Default)]
struct Resolver {
    initiators: Vec<u32>,
    is_initiator: Vec<bool>,
    targets: Vec<u32>,
    suitors: Vec<u64>,
    established: Vec<(u32, u32)>,
    rejected: Vec<u32>,
    busy: Vec<bool>,
}

impl Resolver {
    fn new(n: usize) -> Resolver {
        Resolver {
            is_initiator: vec![false; n],
            busy: vec![false; n],
            ..Resolver::default()
        }
    }

    /// Every initiator picks a uniform target other than itself, in ascending
    /// order. A target that is itself initiating rejects everyone; any other
    /// target accepts one uniformly chosen suitor, with one draw per contested
    /// target in ascending target order.
    fn resolve<P: Protocol, R: Rng>(&mut self, p: &P, states: &[P::State], rng: &mut R) {
        let n = states.len();
        for &i in &self.initiators {
            self.is_initiator[i as usize] = false;
        }
        self.initiators.clear();
        self.targets.clear();
        self.suitors.clear();
        self.established.clear();
        self.rejected.clear();
        for (i, s) in states.iter().enumerate() {
            if p.is_initiator(s) {
                self.initiators.push(i as u32);
                self.is_initiator[i] = true;
            }
        }
        for &i in &self.initiators {
            let r = rng.random_range(0..n - 1) as u32;
            let t = if r >= i { r + 1 } else { r };
            self.targets.push(t);
            if self.is_initiator[t as usize] {
                self.rejected.push(i);
            } else {
                self.suitors.push(((t as u64) << 32) | i as u64);
            }
        }
        self.suitors.sort_unstable();
        let mut k = 0;
        while k < self.suitors.len() {
            let target = self.suitors[k] >> 32;
            let mut end = k + 1;
            while end < self.suitors.len() && self.suitors[end] >> 32 == target {
                end += 1;
            }
            let chosen = if end - k == 1 { k } else { k + rng.random_range(0..end - k) };
            for (idx, key) in self.suitors[k..end].iter().enumerate() {
                let suitor = (*key & 0xffff_ffff) as u32;
                if k + idx == chosen {
                    self.established.push((suitor, target as u32));
                } else {
                    self.rejected.push(suitor);
                }
            }
            k = end;
        }
        self.rejected.sort_unstable();
    }

    fn to_resolution(&self, n: usize) -> RoundResolution {
        let mut busy = vec![false; n];
        for &i in &self.initiators {
            busy[i as usize] = true;
        }
        for &(_, j) in &self.established {
            busy[j as usize] = true;
        }
        RoundResolution {
            initiator_targets: self
                .initiators
                .iter()
                .zip(&self.targets)
                .map(|(&i, &t)| (i as usize, t as usize))
                .collect(),
            established: self.established.iter().map(|&(i, j)| (i as usize, j as usize)).collect(),
            rejected: self.rejected.iter().map(|&i| i as usize).collect(),
            idle: (0..n).filter(|&i| !busy[i]).collect(),
        }
    }
}

/// Applies the collision rules to the pre-round states. The random stream is
/// consumed exactly as in [`run_sync`].
pub fn resolve_round<P: Protocol, R: Rng>(p: &P, states: &[P::State], rng: &mut R) -> RoundResolution {
    let mut r = Resolver::new(states.len());
    r.resolve(p, states, rng);
    r.to_resolution(states.len())
}

/// Post-round states computed from pre-round states only, visiting nodes in
/// the given order. The result does not depend on `order`.
pub fn apply_round<P: Protocol>(
    p: &P,
    pre: &[P::State],
    res: &RoundResolution,
    order: &[usize],
) -> Vec<P::State> {
    let n = pre.len();
    #[derive(Clone, Copy)]
    enum Role {
        Idle,
        Rejected,
        Initiator(usize),
        Recipient(usize),
    }
    let mut role = vec![Role::Idle; n];
    for &i in &res.rejected {
        role[i] = Role::Rejected;
    }
    for &(i, j) in &res.established {
        role[i] = Role::Initiator(j);
        role[j] = Role::Recipient(i);
    }
    let mut post = pre.to_vec();
    for &x in order {
        post[x] = match role[x] {
            Role::Idle => p.on_idle(&pre[x]),
            Role::Rejected => p.on_rejected(&pre[x]),
            Role::Initiator(j) => p.on_initiate(&pre[x], &pre[j]).0,
            Role::Recipient(i) => p.on_initiate(&pre[i], &pre[x]).1,
        };
    }
    post
}

/// Runs the synchronous model. Time is counted in rounds; round `r` moves the
/// configuration from time `r - 1` to time `r`.
pub fn run_sync<P: Protocol>(p: &P, inst: &Instance, cfg: &SimConfig) -> Result<SimResult> {
    let n = inst.n;
    if n < 2 {
        return Err(Error::TooFewNodes(n as u64));
    }
    let mut states: Vec<P::State> = inst.initial_bits.iter().map(|&b| p.initial_state(b)).collect();
    let mut tracker = Tracker::new(p, &states, inst.majority_bit, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut res = Resolver::new(n);
    let horizon = cfg.horizon.unwrap_or(f64::INFINITY);
    let mut round: u64 = 0;

    let (stop, end) = loop {
        if tracker.terminal == n {
            break (Stop::AllTerminal, round as f64);
        }
        if cfg.halt_when_frozen && tracker.incorrect == 0 && is_frozen(p, &states, FROZEN_SCAN_LIMIT) {
            break (Stop::Frozen, round as f64);
        }
        if (round + 1) as f64 > horizon {
            break (Stop::Horizon, horizon);
        }
        round += 1;
        let t = round as f64;
        tracker.observe_until(t, &states);

        res.resolve(p, &states, &mut rng);
        for &i in &res.initiators {
            tracker.communicate(&states[i as usize]);
            res.busy[i as usize] = true;
        }
        // Roles are disjoint, so each update reads only pre-round states.
        for k in 0..res.established.len() {
            let (i, j) = res.established[k];
            let (i, j) = (i as usize, j as usize);
            res.busy[j] = true;
            let (si, sj) = (states[i], states[j]);
            let (a, b) = p.on_initiate(&si, &sj);
            tracker.change(&si, &a, t)?;
            tracker.change(&sj, &b, t)?;
            states[i] = a;
            states[j] = b;
            if tracker.logging() && (a != si || b != sj) {
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
        for k in 0..res.rejected.len() {
            let i = res.rejected[k] as usize;
            let si = states[i];
            let a = p.on_rejected(&si);
            single(&mut tracker, &mut states, i, si, a, t)?;
        }
        for i in 0..n {
            if res.busy[i] {
                res.busy[i] = false;
                continue;
            }
            let si = states[i];
            if cfg.suppress_terminal_rings && p.is_terminal(&si) {
                continue;
            }
            let a = p.on_idle(&si);
            single(&mut tracker, &mut states, i, si, a, t)?;
        }
    };
    Ok(tracker.finish(&states, stop, end, round))
}

#[inline]
fn single<P: Protocol>(
    tracker: &mut Tracker<'_, P>,
    states: &mut [P::State],
    i: usize,
    old: P::State,
    new: P::State,
    t: f64,
) -> Result<()> {
    if old == new {
        return Ok(());
    }
    tracker.change(&old, &new, t)?;
    states[i] = new;
    if tracker.logging() {
        let (a, b) = (tracker.code(&old), tracker.code(&new));
        tracker.log(EventRecord {
            time: t,
            node: i as u32,
            partner: None,
            before: (a, a),
            after: (b, b),
        });
    }
    Ok(())
}
