//! Majority consensus among memory-constrained nodes on the complete graph.
//!
//! Protocols are finite automata described through the [`Protocol`] trait:
//! an initiator predicate, a pairwise update applied when an initiator meets a
//! partner, an idle update for nodes that stay silent, and a belief bit per
//! state. Two engines drive them: [`engine::run_async`] (independent unit-rate
//! Poisson clocks, uniform matching) and [`engine::run_sync`] (lockstep rounds
//! with collision resolution). The [`analyzer`] computes reachable state sets
//! and classifies terminal, passive and aware states of any protocol whose
//! state space is small enough to enumerate.
//!
//! ```
//! use lowmem_core::{derive_params, make_instance, simulate, Preset, ProtocolId, SimConfig};
//!
//! let id = ProtocolId::Sync;
//! let ps = derive_params(id, 4096, 0.2, Preset::Desk.overrides(id))?;
//! let inst = make_instance(4096, 0.75, 7)?;
//! let res = simulate(&ps, &inst, &SimConfig::new(7, Some(ps.suggested_horizon())))?;
//! assert!(res.communications_total > 0);
//! # Ok::<(), lowmem_core::Error>(())
//! ```

pub mod analyzer;
pub mod bit;
pub mod dispatch;
pub mod engine;
pub mod error;
pub mod instance;
pub mod params;
pub mod protocol;
pub mod protocols;

pub use analyzer::{analyze, compute_reachable, Mode, StateSetReport};
pub use bit::{majority_of_bits, Bit};
pub use dispatch::{analyze_params, simulate, visit_protocol, ProtocolVisitor};
pub use engine::{run_async, run_sync, SimConfig, SimResult, Stop};
pub use error::{Error, Result};
pub use instance::{make_instance, make_instance_with_majority, Instance};
pub use params::{derive_params, Derived, Overrides, ParamSet, Preset, ProtocolId};
pub use protocol::{Protocol, TableProtocol};
