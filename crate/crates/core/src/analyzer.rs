//! Reachable-state sets and state classification.
//!
//! `A(0)` holds the two initial states. In the asynchronous model `A(k)` adds
//! everything one clock ring can produce from states in `A(k-1)`; the sets
//! grow until a fixed point, which is reached after at most `s` steps. In
//! the synchronous model `A(k)` is the set of states one round can produce
//! from `A(k-1)` and is not cumulative, so the sequence is eventually
//! periodic instead.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bit::Bit;
use crate::engine::{SimResult, Snapshot, Stop};
use crate::error::{Error, Result};
use crate::protocol::{escaped, Protocol};

pub mod toys;

/// Default cap on the number of distinct reachable states.
pub const DEFAULT_STATE_LIMIT: usize = 100_000;

/// Cap on synchronous iterations before giving up on finding a period.
pub const MAX_SYNC_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Async,
    Sync,
}

/// The sequence `A(0), A(1), ...` with each set sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Reachable<S> {
    pub mode: Mode,
    pub sets: Vec<Vec<S>>,
    /// Async: `k*` with `A(k*+1) = A(k*)`. Sync: first index of the cycle.
    pub fixed_point_index: usize,
    /// Sync only: cycle length, so `A(k + period) = A(k)` for `k >= fixed_point_index`.
    pub period: Option<usize>,
}

impl<S: Copy + Ord> Reachable<S> {
    /// Every state that appears in some `A(k)`, sorted.
    pub fn union(&self) -> Vec<S> {
        let all: BTreeSet<S> = self.sets.iter().flatten().copied().collect();
        all.into_iter().collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }
}

fn checked<P: Protocol>(p: &P, s: P::State, context: &'static str) -> Result<P::State> {
    if p.contains(&s) {
        Ok(s)
    } else {
        Err(escaped::<P>(&s, context))
    }
}

/// Computes the `A(k)` sequence up to its fixed point (async) or through one
/// full period (sync).
pub fn compute_reachable<P: Protocol>(p: &P, mode: Mode, limit: usize) -> Result<Reachable<P::State>> {
    let a0: BTreeSet<P::State> = [p.initial_state(Bit::Zero), p.initial_state(Bit::One)]
        .into_iter()
        .map(|s| checked(p, s, "initial state"))
        .collect::<Result<_>>()?;
    match mode {
        Mode::Async => reachable_async(p, a0, limit),
        Mode::Sync => reachable_sync(p, a0, limit),
    }
}

fn reachable_async<P: Protocol>(
    p: &P,
    a0: BTreeSet<P::State>,
    limit: usize,
) -> Result<Reachable<P::State>> {
    let mut all: BTreeSet<P::State> = a0.clone();
    let mut fresh: Vec<P::State> = a0.iter().copied().collect();
    let mut sets = vec![a0.iter().copied().collect::<Vec<_>>()];
    loop {
        // Only pairs involving a state added in the last step can be new.
        let mut next: BTreeSet<P::State> = BTreeSet::new();
        let fresh_set: HashSet<P::State> = fresh.iter().copied().collect();
        let mut add = |s: P::State, ctx| -> Result<()> {
            let s = checked(p, s, ctx)?;
            if !all.contains(&s) {
                next.insert(s);
            }
            Ok(())
        };
        for s in &fresh {
            if p.is_initiator(s) {
                for t in &all {
                    let (a, b) = p.on_initiate(s, t);
                    add(a, "pairwise update")?;
                    add(b, "pairwise update")?;
                }
            } else {
                add(p.on_idle(s), "idle update")?;
            }
        }
        for s in all.iter().filter(|s| p.is_initiator(s) && !fresh_set.contains(s)) {
            for t in &fresh {
                let (a, b) = p.on_initiate(s, t);
                add(a, "pairwise update")?;
                add(b, "pairwise update")?;
            }
        }
        if next.is_empty() {
            let k = sets.len() - 1;
            return Ok(Reachable {
                mode: Mode::Async,
                sets,
                fixed_point_index: k,
                period: None,
            });
        }
        all.extend(next.iter().copied());
        if all.len() > limit {
            return Err(Error::UniverseTooLarge {
                size: all.len() as u64,
                limit: limit as u64,
            });
        }
        sets.push(all.iter().copied().collect());
        fresh = next.into_iter().collect();
    }
}

/// One synchronous step of the recurrence. Besides the pairwise and idle
/// images it includes the rejection update of initiators, since a rejected
/// initiator's state is also produced by a round.
pub fn sync_step<P: Protocol>(p: &P, prev: &[P::State]) -> Result<BTreeSet<P::State>> {
    let mut next = BTreeSet::new();
    for s in prev {
        next.insert(checked(p, p.on_idle(s), "idle update")?);
        if p.is_initiator(s) {
            next.insert(checked(p, p.on_rejected(s), "rejection update")?);
            for t in prev {
                let (a, b) = p.on_initiate(s, t);
                next.insert(checked(p, a, "pairwise update")?);
                next.insert(checked(p, b, "pairwise update")?);
            }
        }
    }
    Ok(next)
}

fn reachable_sync<P: Protocol>(
    p: &P,
    a0: BTreeSet<P::State>,
    limit: usize,
) -> Result<Reachable<P::State>> {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut sets: Vec<Vec<P::State>> = Vec::new();
    let mut current: Vec<P::State> = a0.into_iter().collect();
    let codes = |v: &[P::State]| -> Vec<u64> { v.iter().filter_map(|s| p.encode(s)).collect() };
    for k in 0..MAX_SYNC_STEPS {
        if current.len() > limit {
            return Err(Error::UniverseTooLarge {
                size: current.len() as u64,
                limit: limit as u64,
            });
        }
        let key = codes(&current);
        if let Some(&start) = seen.get(&key) {
            return Ok(Reachable {
                mode: Mode::Sync,
                sets,
                fixed_point_index: start,
                period: Some(k - start),
            });
        }
        seen.insert(key, k);
        let next = sync_step(p, &current)?.into_iter().collect();
        sets.push(std::mem::replace(&mut current, next));
    }
    Err(Error::NoConvergence(MAX_SYNC_STEPS))
}

/// States that never initiate, are fixed by the idle update, and are left
/// unchanged by every initiator of `universe`.
pub fn classify_terminal<P: Protocol>(p: &P, universe: &[P::State]) -> BTreeSet<P::State> {
    let initiators: Vec<&P::State> = universe.iter().filter(|s| p.is_initiator(s)).collect();
    universe
        .iter()
        .filter(|s| {
            !p.is_initiator(s) && p.on_idle(s) == **s && initiators.iter().all(|a| p.on_initiate(a, s).1 == **s)
        })
        .copied()
        .collect()
}

/// States whose idle orbit (including the state itself) never meets the
/// initiator set.
pub fn classify_passive<P: Protocol>(p: &P, universe: &[P::State]) -> BTreeSet<P::State> {
    let mut memo: HashMap<P::State, bool> = HashMap::new();
    for s in universe {
        if memo.contains_key(s) {
            continue;
        }
        // Walk until a known state, an initiator, or a repeat.
        let mut path: Vec<P::State> = Vec::new();
        let mut on_path: HashSet<P::State> = HashSet::new();
        let mut cur = *s;
        let verdict = loop {
            if let Some(&v) = memo.get(&cur) {
                break v;
            }
            if p.is_initiator(&cur) {
                break false;
            }
            if !on_path.insert(cur) {
                break true;
            }
            path.push(cur);
            cur = p.on_idle(&cur);
        };
        for x in path {
            memo.insert(x, verdict);
        }
        if p.is_initiator(s) {
            memo.insert(*s, false);
        }
    }
    universe.iter().filter(|s| memo[s]).copied().collect()
}

/// Direct successors of `s` for a single node: its own idle or rejection
/// update, its update as initiator against any partner in `partners`, and its
/// update when contacted by any initiator in `partners`.
fn successors<P: Protocol>(p: &P, s: &P::State, partners: &[P::State], mode: Mode) -> Vec<P::State> {
    let mut out = Vec::new();
    let init = p.is_initiator(s);
    if init {
        for t in partners {
            out.push(p.on_initiate(s, t).0);
        }
        if mode == Mode::Sync {
            out.push(p.on_rejected(s));
        }
    } else {
        out.push(p.on_idle(s));
    }
    // A synchronous initiator is never a recipient.
    if !(init && mode == Mode::Sync) {
        for a in partners.iter().filter(|a| p.is_initiator(a)) {
            out.push(p.on_initiate(a, s).1);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// States from which no sequence of interactions with states of `universe`
/// can ever change the belief bit.
pub fn classify_aware<P: Protocol>(p: &P, universe: &[P::State], mode: Mode) -> BTreeSet<P::State> {
    let mut index: HashMap<P::State, usize> = HashMap::new();
    let mut nodes: Vec<P::State> = Vec::new();
    for s in universe {
        if !index.contains_key(s) {
            index.insert(*s, nodes.len());
            nodes.push(*s);
        }
    }
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut k = 0;
    while k < nodes.len() {
        let s = nodes[k];
        for t in successors(p, &s, universe, mode) {
            let ti = *index.entry(t).or_insert_with(|| {
                nodes.push(t);
                reverse.push(Vec::new());
                nodes.len() - 1
            });
            if ti != k {
                reverse[ti].push(k);
            }
        }
        k += 1;
    }
    // can_reach[b][x]: some state with belief b is reachable from x.
    let reach = |b: Bit| {
        let mut hit = vec![false; nodes.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for (i, s) in nodes.iter().enumerate() {
            if p.belief(s) == b {
                hit[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &y in &reverse[x] {
                if !hit[y] {
                    hit[y] = true;
                    queue.push_back(y);
                }
            }
        }
        hit
    };
    let reach0 = reach(Bit::Zero);
    let reach1 = reach(Bit::One);
    universe
        .iter()
        .filter(|s| {
            let i = index[s];
            match p.belief(s) {
                Bit::Zero => !reach1[i],
                Bit::One => !reach0[i],
            }
        })
        .copied()
        .collect()
}

/// Classification flags for one reachable state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateFlags {
    pub code: u64,
    pub state: String,
    pub kind: String,
    pub belief: u8,
    pub initiator: bool,
    pub terminal: bool,
    pub passive: bool,
    pub aware: bool,
    /// First `k` with the state in `A(k)`.
    pub first_k: usize,
}

/// Serializable analyzer output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSetReport {
    pub protocol: String,
    pub async_mode: bool,
    pub universe_size: u64,
    pub a_sizes: Vec<usize>,
    pub fixed_point_index: usize,
    pub period: Option<usize>,
    pub reachable_count: usize,
    pub terminal_count: usize,
    pub passive_count: usize,
    pub aware_count: usize,
    pub states: Vec<StateFlags>,
}

/// Runs the reachability computation and all three classifications over the
/// reachable states.
pub fn analyze<P: Protocol>(p: &P, mode: Mode, limit: usize) -> Result<StateSetReport> {
    let reach = compute_reachable(p, mode, limit)?;
    let universe = reach.union();
    let terminal = classify_terminal(p, &universe);
    let passive = classify_passive(p, &universe);
    let aware = classify_aware(p, &universe, mode);
    let mut first_k: BTreeMap<P::State, usize> = BTreeMap::new();
    for (k, set) in reach.sets.iter().enumerate() {
        for s in set {
            first_k.entry(*s).or_insert(k);
        }
    }
    let names = p.kind_names();
    let mut states: Vec<StateFlags> = universe
        .iter()
        .map(|s| StateFlags {
            code: p.encode(s).unwrap_or(u64::MAX),
            state: s.to_string(),
            kind: names[p.kind(s)].to_string(),
            belief: p.belief(s).as_u8(),
            initiator: p.is_initiator(s),
            terminal: terminal.contains(s),
            passive: passive.contains(s),
            aware: aware.contains(s),
            first_k: first_k[s],
        })
        .collect();
    states.sort_by_key(|f| f.code);
    Ok(StateSetReport {
        protocol: p.name().to_string(),
        async_mode: mode == Mode::Async,
        universe_size: p.universe_size(),
        a_sizes: reach.sizes(),
        fixed_point_index: reach.fixed_point_index,
        period: reach.period,
        reachable_count: universe.len(),
        terminal_count: terminal.len(),
        passive_count: passive.len(),
        aware_count: aware.len(),
        states,
    })
}

/// Exact per-state counts at each requested time, taken from the snapshots a
/// run recorded (see `SimConfig::snapshot_times`).
pub fn frequency_histogram(result: &SimResult, times: &[f64]) -> Result<Vec<Snapshot>> {
    times
        .iter()
        .map(|&t| {
            if t > result.end_time && result.stop == Stop::Horizon {
                return Err(Error::TimeBeyondTrace {
                    requested: t,
                    end: result.end_time,
                });
            }
            result
                .snapshots
                .iter()
                .find(|s| s.time == t)
                .cloned()
                .ok_or(Error::MissingSnapshot(t))
        })
        .collect()
}
