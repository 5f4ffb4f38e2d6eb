//! Discrete-event engines for the asynchronous (Poisson clock) and the
//! synchronous (round based) communication models.

mod asynchronous;
mod clock;
mod synchronous;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::bit::Bit;
use crate::error::Result;
use crate::protocol::{escaped, Protocol};

pub use asynchronous::run_async;
pub use clock::{ActiveSet, EventClock};
pub use synchronous::{apply_round, resolve_round, run_sync, RoundResolution};

/// Options shared by both engines. Times are Poisson time units for the
/// asynchronous engine and rounds for the synchronous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    /// `None` runs until every node is terminal (or the configuration freezes).
    pub horizon: Option<f64>,
    /// Drop terminal nodes from the scheduler. They can neither initiate nor
    /// change, so this only saves work.
    pub suppress_terminal_rings: bool,
    /// Stop once the incorrect count is zero and no transition can change
    /// any node any more (for protocols without terminal states).
    pub halt_when_frozen: bool,
    /// Collect the set of encoded states seen during the run.
    pub track_states: bool,
    /// Keep a log of every state-changing interaction.
    pub record_events: bool,
    /// Times at which to record exact per-state counts.
    pub snapshot_times: Vec<f64>,
    /// Record per-kind counts every this many time units.
    pub series_interval: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            horizon: None,
            suppress_terminal_rings: true,
            halt_when_frozen: true,
            track_states: false,
            record_events: false,
            snapshot_times: Vec::new(),
            series_interval: None,
        }
    }
}

impl SimConfig {
    pub fn new(seed: u64, horizon: Option<f64>) -> SimConfig {
        SimConfig {
            seed,
            horizon,
            ..SimConfig::default()
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stop {
    AllTerminal,
    Frozen,
    Horizon,
}

/// Exact per-state counts at one instant, keyed by state code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub counts: BTreeMap<u64, usize>,
}

/// One interaction that changed at least one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub node: u32,
    /// Communication partner, or `None` for an idle or rejection update.
    pub partner: Option<u32>,
    pub before: (u64, u64),
    pub after: (u64, u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindSample {
    pub time: f64,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n: usize,
    pub majority_bit: Bit,
    pub stop: Stop,
    pub end_time: f64,
    pub communications_total: u64,
    /// Earliest time after which no node held a wrong belief; `None` if censored.
    pub consensus_time: Option<f64>,
    /// Time at which every node was terminal with the majority belief.
    pub terminal_time: Option<f64>,
    pub communications_at_consensus: Option<u64>,
    pub communications_at_terminal: Option<u64>,
    pub final_incorrect_count: usize,
    pub final_terminal_count: usize,
    /// Communications split by the initiator's node type.
    pub per_type_comm_counts: Vec<u64>,
    pub kind_names: Vec<String>,
    /// First time each node type held at least a tenth of the nodes.
    pub kind_tenth_time: Vec<Option<f64>>,
    /// Number of times a node switched into each node type.
    pub kind_entries: Vec<u64>,
    /// Sorted codes of every state seen, when tracking was enabled.
    pub states_observed: Option<Vec<u64>>,
    pub events_processed: u64,
    pub snapshots: Vec<Snapshot>,
    pub kind_series: Vec<KindSample>,
    pub events: Option<Vec<EventRecord>>,
}

impl SimResult {
    /// All nodes terminal with belief equal to the majority bit.
    pub fn success(&self) -> bool {
        self.terminal_time.is_some()
    }

    pub fn states_used(&self) -> Option<usize> {
        self.states_observed.as_ref().map(Vec::len)
    }
}

/// Incremental bookkeeping shared by both engines.
pub(crate) struct Tracker<'a, P: Protocol> {
    p: &'a P,
    n: usize,
    majority: Bit,
    pub incorrect: usize,
    pub terminal: usize,
    pub comms: u64,
    consensus: Option<(f64, u64)>,
    kind_counts: Vec<usize>,
    kind_tenth: Vec<Option<f64>>,
    kind_entries: Vec<u64>,
    per_kind_comms: Vec<u64>,
    seen: Option<HashSet<u64>>,
    events: Option<Vec<EventRecord>>,
    snapshot_times: Vec<f64>,
    next_snapshot: usize,
    snapshots: Vec<Snapshot>,
    series_interval: Option<f64>,
    next_series: f64,
    series: Vec<KindSample>,
    next_observe: f64,
}

impl<'a, P: Protocol> Tracker<'a, P> {
    pub fn new(p: &'a P, states: &[P::State], majority: Bit, cfg: &SimConfig) -> Result<Self> {
        let kinds = p.kind_names().len();
        let mut t = Tracker {
            p,
            n: states.len(),
            majority,
            incorrect: 0,
            terminal: 0,
            comms: 0,
            consensus: None,
            kind_counts: vec![0; kinds],
            kind_tenth: vec![None; kinds],
            kind_entries: vec![0; kinds],
            per_kind_comms: vec![0; kinds],
            seen: cfg.track_states.then(HashSet::new),
            events: cfg.record_events.then(Vec::new),
            snapshot_times: {
                let mut v = cfg.snapshot_times.clone();
                v.sort_by(f64::total_cmp);
                v
            },
            next_snapshot: 0,
            snapshots: Vec::new(),
            series_interval: cfg.series_interval.filter(|d| *d > 0.0),
            next_series: 0.0,
            series: Vec::new(),
            next_observe: f64::NEG_INFINITY,
        };
        t.next_observe = t.pending_observation();
        for s in states {
            let code = p.encode(s).ok_or_else(|| escaped::<P>(s, "initial state"))?;
            if let Some(seen) = &mut t.seen {
                seen.insert(code);
            }
            t.incorrect += (p.belief(s) != majority) as usize;
            t.terminal += p.is_terminal(s) as usize;
            t.kind_counts[p.kind(s)] += 1;
        }
        if t.incorrect == 0 {
            t.consensus = Some((0.0, 0));
        }
        t.check_tenth(0.0);
        Ok(t)
    }

    fn check_tenth(&mut self, time: f64) {
        for (k, &c) in self.kind_counts.iter().enumerate() {
            if self.kind_tenth[k].is_none() && c * 10 >= self.n {
                self.kind_tenth[k] = Some(time);
            }
        }
    }

    #[inline]
    pub fn communicate(&mut self, initiator: &P::State) {
        self.comms += 1;
        self.per_kind_comms[self.p.kind(initiator)] += 1;
    }

    /// Accounts for one node moving from `old` to `new` (which may be equal).
    #[inline]
    pub fn change(&mut self, old: &P::State, new: &P::State, time: f64) -> Result<()> {
        if old == new {
            return Ok(());
        }
        let p = self.p;
        if !p.contains(new) {
            return Err(escaped::<P>(new, "transition"));
        }
        if let Some(seen) = &mut self.seen {
            seen.insert(p.encode(new).ok_or_else(|| escaped::<P>(new, "transition"))?);
        }
        let was_wrong = p.belief(old) != self.majority;
        let is_wrong = p.belief(new) != self.majority;
        if was_wrong != is_wrong {
            if is_wrong {
                self.incorrect += 1;
                self.consensus = None;
            } else {
                self.incorrect -= 1;
                if self.incorrect == 0 {
                    self.consensus = Some((time, self.comms));
                }
            }
        }
        self.terminal = self.terminal + p.is_terminal(new) as usize - p.is_terminal(old) as usize;
        let (ko, kn) = (p.kind(old), p.kind(new));
        if ko != kn {
            self.kind_counts[ko] -= 1;
            self.kind_counts[kn] += 1;
            self.kind_entries[kn] += 1;
            if self.kind_tenth[kn].is_none() && self.kind_counts[kn] * 10 >= self.n {
                self.kind_tenth[kn] = Some(time);
            }
        }
        Ok(())
    }

    pub fn logging(&self) -> bool {
        self.events.is_some()
    }

    pub fn log(&mut self, rec: EventRecord) {
        if let Some(ev) = &mut self.events {
            ev.push(rec);
        }
    }

    pub fn code(&self, s: &P::State) -> u64 {
        self.p.encode(s).unwrap_or(u64::MAX)
    }

    /// Records snapshots and series samples for every time strictly before `t`.
    #[inline]
    pub fn observe_until(&mut self, t: f64, states: &[P::State]) {
        if t > self.next_observe {
            self.observe_slow(t, states);
        }
    }

    /// Earliest time at which a snapshot or series sample is still due.
    fn pending_observation(&self) -> f64 {
        let snap = self.snapshot_times.get(self.next_snapshot).copied().unwrap_or(f64::INFINITY);
        match self.series_interval {
            Some(_) => snap.min(self.next_series),
            None => snap,
        }
    }

    fn observe_slow(&mut self, t: f64, states: &[P::State]) {
        self.snapshots_until(t, states);
        if let Some(dt) = self.series_interval {
            while self.next_series < t {
                self.series.push(KindSample {
                    time: self.next_series,
                    counts: self.kind_counts.clone(),
                });
                self.next_series += dt;
            }
        }
        self.next_observe = self.pending_observation();
    }

    fn snapshots_until(&mut self, t: f64, states: &[P::State]) {
        while self.next_snapshot < self.snapshot_times.len()
            && self.snapshot_times[self.next_snapshot] < t
        {
            let time = self.snapshot_times[self.next_snapshot];
            self.snapshots.push(Snapshot {
                time,
                counts: count_codes(self.p, states),
            });
            self.next_snapshot += 1;
        }
    }

    pub fn finish(mut self, states: &[P::State], stop: Stop, end_time: f64, events: u64) -> SimResult {
        self.observe_until(next_up(end_time), states);
        // States no longer change after an all-terminal or frozen stop, so
        // later snapshot requests are answered with the final counts.
        if stop != Stop::Horizon {
            self.snapshots_until(f64::INFINITY, states);
        }
        let all_terminal = self.terminal == self.n;
        let consensus = self.consensus.filter(|_| self.incorrect == 0);
        let terminal = (all_terminal && self.incorrect == 0).then_some((end_time, self.comms));
        SimResult {
            n: self.n,
            majority_bit: self.majority,
            stop,
            end_time,
            communications_total: self.comms,
            consensus_time: consensus.map(|c| c.0),
            terminal_time: terminal.map(|c| c.0),
            communications_at_consensus: consensus.map(|c| c.1),
            communications_at_terminal: terminal.map(|c| c.1),
            final_incorrect_count: self.incorrect,
            final_terminal_count: self.terminal,
            per_type_comm_counts: self.per_kind_comms,
            kind_names: self.p.kind_names().iter().map(|s| s.to_string()).collect(),
            kind_tenth_time: self.kind_tenth,
            kind_entries: self.kind_entries,
            states_observed: self.seen.map(|s| {
                let mut v: Vec<u64> = s.into_iter().collect();
                v.sort_unstable();
                v
            }),
            events_processed: events,
            snapshots: self.snapshots,
            kind_series: self.series,
            events: self.events,
        }
    }
}

/// The smallest float strictly greater than a non-negative finite `x`.
fn next_up(x: f64) -> f64 {
    f64::from_bits(x.max(0.0).to_bits() + 1)
}

pub(crate) fn count_codes<P: Protocol>(p: &P, states: &[P::State]) -> BTreeMap<u64, usize> {
    let mut counts = BTreeMap::new();
    for s in states {
        *counts.entry(p.encode(s).unwrap_or(u64::MAX)).or_insert(0) += 1;
    }
    counts
}

/// True when no node can change any more: every non-initiator present is
/// fixed by the idle update and every initiator/partner pairing present is a
/// no-op. Gives up (returns false) when more than `max_distinct` states occur.
pub(crate) fn is_frozen<P: Protocol>(p: &P, states: &[P::State], max_distinct: usize) -> bool {
    let mut distinct: Vec<P::State> = Vec::new();
    for s in states {
        if !distinct.contains(s) {
            if distinct.len() == max_distinct {
                return false;
            }
            distinct.push(*s);
        }
    }
    distinct.iter().all(|s| {
        if p.is_initiator(s) {
            p.on_rejected(s) == *s
                && distinct.iter().all(|t| p.on_initiate(s, t) == (*s, *t))
        } else {
            p.on_idle(s) == *s
        }
    })
}
