//! Protocol constants derived from `(n, epsilon)`, with scale overrides for
//! the large proof constants.
//!
//! All logarithms are base 2. With every scale factor at 1 the derived values
//! are exactly the closed-form constants of each protocol; a "desk" preset
//! shrinks the loose constants so that full experiments fit on a workstation
//! while leaving the protocol mechanics untouched.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    /// Aspirant / expert / regular / terminal protocol with O((log n)^2) states.
    SimpleAsync,
    /// Round-based protocol with expert levels, O((log log n)^2) states.
    Sync,
    /// Poisson-clock protocol with expert types and candidates, O((log log n)^3) states.
    FullAsync,
    /// Classical three-state approximate majority, used as a constant-memory baseline.
    Baseline3State,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 4] = [
        ProtocolId::SimpleAsync,
        ProtocolId::Sync,
        ProtocolId::FullAsync,
        ProtocolId::Baseline3State,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::SimpleAsync => "simple-async",
            ProtocolId::Sync => "sync",
            ProtocolId::FullAsync => "full-async",
            ProtocolId::Baseline3State => "baseline-3state",
        }
    }

    /// Whether the protocol is meant for the round-based engine.
    pub fn is_synchronous(self) -> bool {
        self == ProtocolId::Sync
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown protocol `{s}` (expected one of: simple-async, sync, full-async, baseline-3state)"
                )
            })
    }
}

/// Multiplicative factors applied to the large constants before rounding up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Scales `C0 = 10 / eps^2` (simple-async).
    pub c0_scale: f64,
    /// Scales the expert-selection length `300 eps^-2 K` (sync).
    pub selection_scale: f64,
    /// Scales `T_aspirant = 5000 eps^-1 log log n` (full-async).
    pub aspirant_scale: f64,
    /// Scales `K` before rounding (sync, full-async).
    pub k_scale: f64,
    /// Scales the number of estimation levels `M` before rounding (sync, full-async).
    pub m_scale: f64,
    /// Scales the `K` that sets the length of an estimation round, separately
    /// from the `K` used by expert selection (sync, full-async).
    pub round_k_scale: f64,
}

impl Default for Overrides {
    fn default() -> Self {
        Overrides::UNIT
    }
}

impl Overrides {
    pub const UNIT: Overrides = Overrides {
        c0_scale: 1.0,
        selection_scale: 1.0,
        aspirant_scale: 1.0,
        k_scale: 1.0,
        m_scale: 1.0,
        round_k_scale: 1.0,
    };

    pub const KEYS: [&'static str; 6] = [
        "c0_scale",
        "selection_scale",
        "aspirant_scale",
        "k_scale",
        "m_scale",
        "round_k_scale",
    ];

    /// Sets one factor by name, as used by `--override key=val`.
    pub fn set(&mut self, key: &str, value: f64) -> std::result::Result<(), String> {
        let slot = match key {
            "c0_scale" => &mut self.c0_scale,
            "selection_scale" => &mut self.selection_scale,
            "aspirant_scale" => &mut self.aspirant_scale,
            "k_scale" => &mut self.k_scale,
            "m_scale" => &mut self.m_scale,
            "round_k_scale" => &mut self.round_k_scale,
            other => {
                return Err(format!(
                    "unknown override `{other}` (expected one of: {})",
                    Overrides::KEYS.join(", ")
                ))
            }
        };
        *slot = value;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let pairs = [
            ("c0_scale", self.c0_scale),
            ("selection_scale", self.selection_scale),
            ("aspirant_scale", self.aspirant_scale),
            ("k_scale", self.k_scale),
            ("m_scale", self.m_scale),
            ("round_k_scale", self.round_k_scale),
        ];
        for (name, value) in pairs {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::BadOverride { name, value });
            }
        }
        Ok(())
    }
}

/// Named override bundles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Every factor is 1: the closed-form constants.
    Paper,
    /// Workstation-scale constants.
    Desk,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        }
    }

    pub fn overrides(self, protocol: ProtocolId) -> Overrides {
        match (self, protocol) {
            (Preset::Paper, _) | (Preset::Desk, ProtocolId::Baseline3State) => Overrides::UNIT,
            (Preset::Desk, ProtocolId::SimpleAsync) => Overrides {
                c0_scale: 0.1,
                ..Overrides::UNIT
            },
            (Preset::Desk, ProtocolId::Sync) => Overrides {
                selection_scale: 0.05,
                k_scale: 0.1,
                round_k_scale: 1.5,
                ..Overrides::UNIT
            },
            (Preset::Desk, ProtocolId::FullAsync) => Overrides {
                aspirant_scale: 0.01,
                k_scale: 0.5,
                ..Overrides::UNIT
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(format!("unknown preset `{other}` (expected paper or desk)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleAsyncParams {
    /// `C0 = c0_scale * 10 / eps^2`.
    pub c0: f64,
    /// `ceil(C0 log n)`: range of the expert time and 1-counters.
    pub estimation_len: u32,
    /// `C0 log n / 2`: the 1-counter threshold for setting the belief to 1.
    pub threshold: f64,
    /// `ceil(log log n)`: the aspirant success counter target.
    pub success_target: u32,
    /// `ceil(log n)`: pushes per expert and the regular-node polling period.
    pub push_len: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncParams {
    /// Number of estimation rounds `M = ceil(2 log log n)`.
    pub levels: u32,
    /// `K = ceil(5 log log n)`, the number of test bits 0 an expert needs.
    pub k: u32,
    /// `K` as used by the estimation rounds (equal to `k` unless
    /// `round_k_scale` is set): `2K` doubling steps per round.
    pub round_k: u32,
    /// Length of the expert-selection phase, `ceil(300 eps^-2 K)`.
    pub selection_len: u32,
    /// Round length `2K + 3`.
    pub round_len: u32,
    /// Regular-node polling period `3MK`.
    pub pull_interval: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullAsyncParams {
    /// Number of estimation levels `M = ceil(2 log log n)`.
    pub levels: u32,
    /// `K = ceil(6 log log n)`, the number of pairs (0,1) an expert needs.
    pub k: u32,
    /// `K` as used by the expert counter and the level timeline (equal to
    /// `k` unless `round_k_scale` is set).
    pub round_k: u32,
    /// `T_aspirant = ceil(5000 eps^-1 log log n)`.
    pub t_aspirant: u32,
    /// Expert counter range `2K + 7`.
    pub expert_counter_max: u32,
    /// Regular-node polling period `ceil((log log n)^2)`.
    pub regular_interval: u32,
    /// `t_m = 6 T_aspirant + 7 K m` for `m = 1..=M`.
    pub t_schedule: Vec<u64>,
    /// `t_m^1 = 6 T_aspirant + 7 K (m - 1) + K` for `m = 1..=M`.
    pub t1_schedule: Vec<u64>,
    /// Candidate lifetime `2 t_M` in clock rings.
    pub candidate_expiry: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Derived {
    SimpleAsync(SimpleAsyncParams),
    Sync(SyncParams),
    FullAsync(FullAsyncParams),
    Baseline3State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub protocol: ProtocolId,
    pub n: u64,
    pub epsilon: f64,
    pub overrides: Overrides,
    pub log_n: f64,
    pub loglog_n: f64,
    pub derived: Derived,
    /// Size of the declared state universe `s`.
    pub state_count: u64,
}

/// `ceil(x)` that ignores floating-point noise just above an integer.
fn ceil_u64(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn positive(name: &'static str, value: u64) -> Result<u64> {
    if value == 0 {
        Err(Error::DegenerateConstant {
            name,
            value,
            reason: "must be at least 1",
        })
    } else {
        Ok(value)
    }
}

fn to_u32(name: &'static str, value: u64) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::DegenerateConstant {
        name,
        value,
        reason: "does not fit in 32 bits",
    })
}

/// Derives every constant of `protocol` for `n` nodes and advantage bound `epsilon`.
pub fn derive_params(
    protocol: ProtocolId,
    n: u64,
    epsilon: f64,
    overrides: Overrides,
) -> Result<ParamSet> {
    if n < MIN_NODES {
        return Err(Error::TooFewNodes(n));
    }
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    overrides.validate()?;
    let log_n = (n as f64).log2();
    let loglog_n = log_n.log2();

    let (derived, state_count) = match protocol {
        ProtocolId::SimpleAsync => {
            let c0 = overrides.c0_scale * 10.0 / (epsilon * epsilon);
            let estimation_len = positive("estimation_len", ceil_u64(c0 * log_n))?;
            if estimation_len < 2 {
                return Err(Error::DegenerateConstant {
                    name: "estimation_len",
                    value: estimation_len,
                    reason: "an expert must poll at least once",
                });
            }
            let success_target = ceil_u64(loglog_n);
            let push_len = ceil_u64(log_n);
            let states = success_target * 3 * 2
                + 2 * estimation_len * estimation_len * 2
                + push_len * 2
                + 2;
            (
                Derived::SimpleAsync(SimpleAsyncParams {
                    c0,
                    estimation_len: to_u32("estimation_len", estimation_len)?,
                    threshold: c0 * log_n / 2.0,
                    success_target: to_u32("success_target", success_target)?,
                    push_len: to_u32("push_len", push_len)?,
                }),
                states,
            )
        }
        ProtocolId::Sync => {
            let levels = positive("levels", ceil_u64(overrides.m_scale * 2.0 * loglog_n))?;
            let k = positive("k", ceil_u64(overrides.k_scale * 5.0 * loglog_n))?;
            let selection_len = ceil_u64(
                overrides.selection_scale * 300.0 * k as f64 / (epsilon * epsilon),
            );
            // Steps 1-4 set test bits; at least one polling step must follow.
            if selection_len < 7 {
                return Err(Error::DegenerateConstant {
                    name: "selection_len",
                    value: selection_len,
                    reason: "the selection phase needs at least 7 steps",
                });
            }
            let round_k = positive("round_k", ceil_u64(overrides.round_k_scale * k as f64))?;
            let round_len = 2 * round_k + 3;
            let pull_interval = 3 * levels * round_k;
            let states = 8 * selection_len * (k + 1) * 3 * 2
                + (levels + 1) * round_len * 2
                + pull_interval * 2
                + 2
                + 3 * 2
                + 2;
            (
                Derived::Sync(SyncParams {
                    levels: to_u32("levels", levels)?,
                    k: to_u32("k", k)?,
                    round_k: to_u32("round_k", round_k)?,
                    selection_len: to_u32("selection_len", selection_len)?,
                    round_len: to_u32("round_len", round_len)?,
                    pull_interval: to_u32("pull_interval", pull_interval)?,
                }),
                states,
            )
        }
        ProtocolId::FullAsync => {
            let levels = positive("levels", ceil_u64(overrides.m_scale * 2.0 * loglog_n))?;
            let k = positive("k", ceil_u64(overrides.k_scale * 6.0 * loglog_n))?;
            let t_aspirant = positive(
                "t_aspirant",
                ceil_u64(overrides.aspirant_scale * 5000.0 * loglog_n / epsilon),
            )?;
            if t_aspirant < k {
                return Err(Error::DegenerateConstant {
                    name: "t_aspirant",
                    value: t_aspirant,
                    reason: "the aspirant counter must be able to count K successes",
                });
            }
            let round_k = positive("round_k", ceil_u64(overrides.round_k_scale * k as f64))?;
            let expert_counter_max = 2 * round_k + 7;
            let regular_interval = positive("regular_interval", ceil_u64(loglog_n * loglog_n))?;
            let t_schedule: Vec<u64> =
                (1..=levels).map(|m| 6 * t_aspirant + 7 * round_k * m).collect();
            let t1_schedule: Vec<u64> = (1..=levels)
                .map(|m| 6 * t_aspirant + 7 * round_k * (m - 1) + round_k)
                .collect();
            let candidate_expiry = 2 * t_schedule[t_schedule.len() - 1];
            let states = t_aspirant * 5 * 3 * 27 * 2 * 2
                + (levels + 1) * expert_counter_max * 4 * 2 * 2
                + regular_interval * 4 * 2 * 2 * 2
                + 4
                + levels * candidate_expiry * 4 * 27 * 2 * 2
                + 4;
            (
                Derived::FullAsync(FullAsyncParams {
                    levels: to_u32("levels", levels)?,
                    k: to_u32("k", k)?,
                    round_k: to_u32("round_k", round_k)?,
                    t_aspirant: to_u32("t_aspirant", t_aspirant)?,
                    expert_counter_max: to_u32("expert_counter_max", expert_counter_max)?,
                    regular_interval: to_u32("regular_interval", regular_interval)?,
                    t_schedule,
                    t1_schedule,
                    candidate_expiry,
                }),
                states,
            )
        }
        ProtocolId::Baseline3State => (Derived::Baseline3State, 3),
    };

    Ok(ParamSet {
        protocol,
        n,
        epsilon,
        overrides,
        log_n,
        loglog_n,
        derived,
        state_count,
    })
}

impl ParamSet {
    pub fn simple_async(&self) -> Option<&SimpleAsyncParams> {
        match &self.derived {
            Derived::SimpleAsync(p) => Some(p),
            _ => None,
        }
    }

    pub fn sync(&self) -> Option<&SyncParams> {
        match &self.derived {
            Derived::Sync(p) => Some(p),
            _ => None,
        }
    }

    pub fn full_async(&self) -> Option<&FullAsyncParams> {
        match &self.derived {
            Derived::FullAsync(p) => Some(p),
            _ => None,
        }
    }

    /// A generous simulation horizon: several times the nominal protocol
    /// duration plus `20 log n` for the final pulling phase. Rounds for the
    /// synchronous protocol, Poisson time units otherwise.
    pub fn suggested_horizon(&self) -> f64 {
        let slack = 20.0 * self.log_n;
        match &self.derived {
            Derived::SimpleAsync(p) => {
                2.0 * (p.estimation_len as f64 + p.push_len as f64 + slack)
                    + 40.0 * p.push_len as f64
            }
            Derived::Sync(p) => {
                let nominal = p.selection_len as f64 + (p.levels * p.round_len) as f64;
                nominal + 40.0 * p.pull_interval as f64 + slack
            }
            Derived::FullAsync(p) => {
                let t_last = p.t_schedule.last().copied().unwrap_or(0) as f64;
                2.0 * t_last + 40.0 * p.regular_interval as f64 + slack
            }
            Derived::Baseline3State => slack,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sync_unit_constants() {
        let ps = derive_params(ProtocolId::Sync, 65536, 0.2, Overrides::UNIT).unwrap();
        let p = ps.sync().unwrap();
        assert_eq!(p.levels, 8);
        assert_eq!(p.k, 20);
        assert_eq!(p.round_len, 43);
        assert_eq!(p.pull_interval, 480);
        // 300 / 0.04 * 20
        assert_eq!(p.selection_len, 150_000);
    }

    #[test]
    fn full_async_unit_constants() {
        // Hand computation: log log 65536 = 4, K = ceil(24) = 24,
        // T = ceil(5000 * 5 * 4) = 100000, t_1 = 600000 + 7 * 24 = 600168.
        let ps = derive_params(ProtocolId::FullAsync, 65536, 0.2, Overrides::UNIT).unwrap();
        let p = ps.full_async().unwrap();
        assert_eq!(p.k, 24);
        assert_eq!(p.levels, 8);
        assert_eq!(p.t_aspirant, 100_000);
        assert_eq!(p.t_schedule[0], 600_168);
        assert_eq!(p.t1_schedule[0], 600_024);
        assert_eq!(p.t_schedule[7], 600_000 + 7 * 24 * 8);
        assert_eq!(p.expert_counter_max, 55);
        assert_eq!(p.regular_interval, 16);
        assert_eq!(p.candidate_expiry, 2 * 601_344);
    }

    #[test]
    fn simple_async_constants() {
        let ps = derive_params(ProtocolId::SimpleAsync, 1024, 0.2, Overrides::UNIT).unwrap();
        let p = ps.simple_async().unwrap();
        assert!((p.c0 - 250.0).abs() < 1e-9);
        assert_eq!(p.estimation_len, 2500);
        assert_eq!(p.success_target, 4);
        assert_eq!(p.push_len, 10);
        assert!(ps.state_count <= 16 * 2500u64 * 2500);
    }

    #[test]
    fn c0_direct_substitution() {
        // eps = 0.5 is outside the admissible range; the formula itself is checked.
        let c0 = 10.0 / (0.5f64 * 0.5);
        assert_eq!(c0, 40.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            derive_params(ProtocolId::Sync, 15, 0.2, Overrides::UNIT),
            Err(Error::TooFewNodes(15))
        );
        assert!(matches!(
            derive_params(ProtocolId::Sync, 64, 0.25, Overrides::UNIT),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            derive_params(ProtocolId::Sync, 64, 0.0, Overrides::UNIT),
            Err(Error::EpsilonOutOfRange(_))
        ));
        let bad = Overrides {
            k_scale: -1.0,
            ..Overrides::UNIT
        };
        assert!(matches!(
            derive_params(ProtocolId::Sync, 64, 0.2, bad),
            Err(Error::BadOverride { name: "k_scale", .. })
        ));
    }

    #[test]
    fn pure_function_of_inputs() {
        for id in ProtocolId::ALL {
            let a = derive_params(id, 4096, 0.1, Overrides::UNIT).unwrap();
            let b = derive_params(id, 4096, 0.1, Overrides::UNIT).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn protocol_ids_round_trip_through_strings() {
        for id in ProtocolId::ALL {
            assert_eq!(id.as_str().parse::<ProtocolId>().unwrap(), id);
        }
        assert!("gossip".parse::<ProtocolId>().is_err());
    }

    #[test]
    fn override_by_name() {
        let mut o = Overrides::UNIT;
        o.set("k_scale", 0.5).unwrap();
        assert_eq!(o.k_scale, 0.5);
        assert!(o.set("nope", 1.0).is_err());
    }
}
