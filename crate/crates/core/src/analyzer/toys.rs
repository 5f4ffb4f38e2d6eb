//! Small hand-written table protocols used by tests, the CLI and the demo.

use crate::protocol::{TableProtocol, TableSpec};

fn build(
    name: &str,
    beliefs: &[u8],
    initiators: &[bool],
    pair: impl Fn(u16, u16) -> (u16, u16),
    idle: impl Fn(u16) -> u16,
    rejected: Option<&dyn Fn(u16) -> u16>,
) -> TableProtocol {
    let s = beliefs.len() as u16;
    let pair = (0..s)
        .map(|a| {
            if initiators[a as usize] {
                (0..s).map(|b| pair(a, b)).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    TableProtocol::new(TableSpec {
        name: name.into(),
        initial: [0, 1],
        beliefs: beliefs.to_vec(),
        initiators: initiators.to_vec(),
        pair,
        idle: (0..s).map(idle).collect(),
        rejected: rejected.map(|r| (0..s).map(r).collect()),
    })
    .expect("toy tables are valid")
}

/// Undecided nodes (0, 1) push their bit; the partner settles on it.
/// 2 and 3 are the settled, terminal versions.
pub fn copy_then_stop() -> TableProtocol {
    build(
        "copy-then-stop",
        &[0, 1, 0, 1],
        &[true, true, false, false],
        |a, b| (a, if b < 2 { a + 2 } else { b }),
        |s| s,
        None,
    )
}

/// Every contact flips the partner's bit.
pub fn flip_on_contact() -> TableProtocol {
    build("flip-on-contact", &[0, 1], &[true, true], |a, b| (a, 1 - b), |s| s, None)
}

/// The three-state approximate majority rule as a table; 2 is blank.
pub fn three_state_table() -> TableProtocol {
    build(
        "three-state",
        &[0, 1, 0],
        &[true, true, true],
        |a, b| match (a, b) {
            (0, 1) | (1, 0) => (2, b),
            (2, x) if x < 2 => (x, b),
            _ => (a, b),
        },
        |s| s,
        None,
    )
}

/// Idle clocks cycling through three phases; in the last phase the node
/// initiates and tells the partner its bit.
pub fn idle_cycle() -> TableProtocol {
    // State 2*phase + bit.
    build(
        "idle-cycle",
        &[0, 1, 0, 1, 0, 1],
        &[false, false, false, false, true, true],
        |a, b| (a % 2, (b / 2) * 2 + a % 2),
        |s| (s + 2) % 6,
        None,
    )
}

/// A counter that climbs by two on every attempt, stopping at 6 or 7.
/// A rejected synchronous attempt also counts.
pub fn counter_chain() -> TableProtocol {
    let up = |a: u16| if a < 6 { a + 2 } else { a };
    build(
        "counter-chain",
        &[0, 1, 0, 1, 0, 1, 0, 1],
        &[true, true, true, true, true, true, false, false],
        move |a, b| (up(a), b),
        |s| s,
        Some(&up),
    )
}

/// Two-level rule: a level-0 initiator meeting an equal bit promotes both
/// to level 1 (2, 3); a level-1 initiator converts any level-0 partner.
pub fn promote() -> TableProtocol {
    build(
        "promote",
        &[0, 1, 0, 1, 0, 1],
        &[true, true, true, true, false, false],
        |a, b| match (a, b) {
            (0, 0) | (1, 1) => (a + 2, b + 2),
            (2 | 3, 0 | 1) => (a + 2, a),
            _ => (a, b),
        },
        |s| s,
        None,
    )
}

pub fn all() -> Vec<TableProtocol> {
    vec![
        copy_then_stop(),
        flip_on_contact(),
        three_state_table(),
        idle_cycle(),
        counter_chain(),
        promote(),
    ]
}

pub fn by_name(name: &str) -> Option<TableProtocol> {
    all().into_iter().find(|p| p.spec().name == name)
}
