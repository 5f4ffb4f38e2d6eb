//! The analyzer against a naive reachability computation written directly on
//! the lookup tables, plus a few hand-derived sequences.

use std::collections::BTreeSet;

use lowmem_core::analyzer::{classify_aware, classify_passive, classify_terminal, compute_reachable, toys, Mode};
use lowmem_core::protocol::{TableProtocol, TableSpec};

type Set = BTreeSet<u16>;

/// One application of the asynchronous recurrence, all pairs recomputed.
fn naive_async_step(t: &TableSpec, prev: &Set) -> Set {
    let mut next = prev.clone();
    for &a in prev {
        if t.initiators[a as usize] {
            for &b in prev {
                let (x, y) = t.pair[a as usize][b as usize];
                next.insert(x);
                next.insert(y);
            }
        } else {
            next.insert(t.idle[a as usize]);
        }
    }
    next
}

/// One application of the synchronous recurrence (not cumulative).
fn naive_sync_step(t: &TableSpec, prev: &Set) -> Set {
    let mut next = Set::new();
    for &a in prev {
        next.insert(t.idle[a as usize]);
        if t.initiators[a as usize] {
            next.insert(t.rejected.as_ref().map_or(a, |r| r[a as usize]));
            for &b in prev {
                let (x, y) = t.pair[a as usize][b as usize];
                next.insert(x);
                next.insert(y);
            }
        }
    }
    next
}

fn start(t: &TableSpec) -> Set {
    t.initial.iter().copied().collect()
}

fn naive_async(t: &TableSpec) -> Vec<Set> {
    let mut seq = vec![start(t)];
    loop {
        let next = naive_async_step(t, seq.last().unwrap());
        if &next == seq.last().unwrap() {
            return seq;
        }
        seq.push(next);
    }
}

/// Sets up to the first repeat, with the index where the cycle starts.
fn naive_sync(t: &TableSpec) -> (Vec<Set>, usize) {
    let mut seq = vec![start(t)];
    loop {
        let next = naive_sync_step(t, seq.last().unwrap());
        if let Some(k) = seq.iter().position(|s| *s == next) {
            return (seq, k);
        }
        seq.push(next);
    }
}

fn as_sets(v: &[Vec<u16>]) -> Vec<Set> {
    v.iter().map(|s| s.iter().copied().collect()).collect()
}

#[test]
fn six_toys_async_match_naive_bfs() {
    let toys = toys::all();
    assert!(toys.len() >= 5);
    for p in &toys {
        let expect = naive_async(p.spec());
        let got = compute_reachable(p, Mode::Async, 1000).unwrap();
        assert_eq!(as_sets(&got.sets), expect, "{}", p.spec().name);
        assert_eq!(got.fixed_point_index, expect.len() - 1);
        assert!(got.fixed_point_index <= p.len(), "{}: k* beyond s", p.spec().name);
        for w in got.sets.windows(2) {
            assert!(w[0].iter().all(|s| w[1].contains(s)));
        }
    }
}

#[test]
fn six_toys_sync_match_naive_iteration() {
    for p in &toys::all() {
        let (expect, start) = naive_sync(p.spec());
        let got = compute_reachable(p, Mode::Sync, 1000).unwrap();
        assert_eq!(as_sets(&got.sets), expect, "{}", p.spec().name);
        assert_eq!(got.fixed_point_index, start);
        let period = got.period.unwrap();
        assert_eq!(period, expect.len() - start);
        assert!(period as u64 <= 1u64 << p.len());
    }
}

#[test]
fn hand_derived_sequences() {
    // copy-then-stop: {0,1} then the settled copies appear at once.
    let r = compute_reachable(&toys::copy_then_stop(), Mode::Async, 100).unwrap();
    assert_eq!(r.sets, vec![vec![0, 1], vec![0, 1, 2, 3]]);
    assert_eq!(r.fixed_point_index, 1);

    // idle-cycle: one phase per step, both bits together.
    let r = compute_reachable(&toys::idle_cycle(), Mode::Async, 100).unwrap();
    assert_eq!(r.sizes(), vec![2, 4, 6]);

    // idle-cycle in lockstep: the pair walks through the silent phases, then
    // a rejected initiator may stay in the last phase while others restart.
    let r = compute_reachable(&toys::idle_cycle(), Mode::Sync, 100).unwrap();
    assert_eq!(r.sets[0], vec![0, 1]);
    assert_eq!(r.sets[1], vec![2, 3]);
    assert_eq!(r.sets[2], vec![4, 5]);
    assert_eq!(r.sets[3], vec![0, 1, 4, 5]);
    assert_eq!(r.sets[4], vec![0, 1, 2, 3, 4, 5]);
    assert_eq!(r.fixed_point_index, 4);
    assert_eq!(r.period, Some(1));
}

#[test]
fn absorbing_pair_is_fixed_at_zero() {
    let p = TableProtocol::new(TableSpec {
        name: "absorbing".into(),
        initial: [0, 1],
        beliefs: vec![0, 1],
        initiators: vec![false, false],
        pair: vec![vec![], vec![]],
        idle: vec![0, 1],
        rejected: None,
    })
    .unwrap();
    let r = compute_reachable(&p, Mode::Async, 10).unwrap();
    assert_eq!(r.fixed_point_index, 0);
    assert_eq!(r.sets, vec![vec![0, 1]]);
}

/// Brute-force classifications straight from the definitions.
#[test]
fn classifications_match_definitions() {
    for p in &toys::all() {
        let t = p.spec();
        let uni: Vec<u16> = compute_reachable(p, Mode::Async, 1000).unwrap().union();
        let inits: Vec<u16> = uni.iter().copied().filter(|&s| t.initiators[s as usize]).collect();
        let terminal: Set = uni
            .iter()
            .copied()
            .filter(|&s| {
                !t.initiators[s as usize]
                    && t.idle[s as usize] == s
                    && inits.iter().all(|&a| t.pair[a as usize][s as usize].1 == s)
            })
            .collect();
        assert_eq!(classify_terminal(p, &uni), terminal, "{}", t.name);

        let passive: Set = uni
            .iter()
            .copied()
            .filter(|&s| {
                let mut x = s;
                (0..=t.beliefs.len()).all(|_| {
                    let ok = !t.initiators[x as usize];
                    x = t.idle[x as usize];
                    ok
                })
            })
            .collect();
        assert_eq!(classify_passive(p, &uni), passive, "{}", t.name);
        assert!(terminal.is_subset(&passive));

        // Async successor relation, closed by repeated relaxation.
        let succ = |s: u16| -> Vec<u16> {
            let mut v = Vec::new();
            if t.initiators[s as usize] {
                v.extend(uni.iter().map(|&b| t.pair[s as usize][b as usize].0));
            } else {
                v.push(t.idle[s as usize]);
            }
            v.extend(inits.iter().map(|&a| t.pair[a as usize][s as usize].1));
            v
        };
        let aware: Set = uni
            .iter()
            .copied()
            .filter(|&s| {
                let mut seen = Set::from([s]);
                let mut stack = vec![s];
                while let Some(x) = stack.pop() {
                    for y in succ(x) {
                        if seen.insert(y) {
                            stack.push(y);
                        }
                    }
                }
                seen.iter().all(|&y| t.beliefs[y as usize] == t.beliefs[s as usize])
            })
            .collect();
        assert_eq!(classify_aware(p, &uni, Mode::Async), aware, "{}", t.name);
        assert!(terminal.is_subset(&aware));
    }
}

#[test]
fn flip_on_contact_has_no_aware_states() {
    let p = toys::flip_on_contact();
    let uni = compute_reachable(&p, Mode::Async, 10).unwrap().union();
    assert!(classify_aware(&p, &uni, Mode::Async).is_empty());
    // In lockstep an initiator is never a recipient, so nothing flips it.
    assert_eq!(classify_aware(&p, &uni, Mode::Sync).len(), 2);
}

#[test]
fn histogram_counts_cover_reachable_states() {
    use lowmem_core::analyzer::frequency_histogram;
    use lowmem_core::{make_instance, run_async, SimConfig};

    let p = toys::three_state_table();
    let n = 100_000;
    let reach = compute_reachable(&p, Mode::Async, 10).unwrap();
    let s = p.len() as f64;
    let inst = make_instance(n, 0.6, 1).unwrap();
    let mut cfg = SimConfig::new(2, Some(s + 1.0));
    cfg.snapshot_times = vec![0.0, 1.0, s];
    let r = run_async(&p, &inst, &cfg).unwrap();
    let h = frequency_histogram(&r, &[0.0, 1.0, s]).unwrap();
    for snap in &h {
        assert_eq!(snap.counts.values().sum::<usize>(), n);
    }
    assert_eq!(h[0].counts.get(&1), Some(&60_000));
    assert_eq!(h[0].counts.get(&0), Some(&40_000));
    for state in reach.sets.last().unwrap() {
        assert!(h[2].counts.get(&u64::from(*state)).copied().unwrap_or(0) >= 1);
    }
    assert!(frequency_histogram(&r, &[s + 5.0]).is_err());
    assert!(frequency_histogram(&r, &[0.5]).is_err());
}
