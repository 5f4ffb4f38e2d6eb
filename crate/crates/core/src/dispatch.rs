//! Runtime dispatch from a [`ParamSet`] to the concrete protocol type.

use crate::analyzer::{self, Mode, StateSetReport};
use crate::engine::{run_async, run_sync, SimConfig, SimResult};
use crate::error::Result;
use crate::instance::Instance;
use crate::params::{ParamSet, ProtocolId};
use crate::protocol::Protocol;
use crate::protocols::{Baseline3State, FullAsync, SimpleAsync, SyncProtocol};

/// Something to do with a protocol whose concrete type is only known at run
/// time.
pub trait ProtocolVisitor {
    type Output;
    fn visit<P: Protocol>(self, p: &P) -> Self::Output;
}

pub fn visit_protocol<V: ProtocolVisitor>(ps: &ParamSet, v: V) -> Result<V::Output> {
    Ok(match ps.protocol {
        ProtocolId::SimpleAsync => v.visit(&SimpleAsync::from_param_set(ps)?),
        ProtocolId::Sync => v.visit(&SyncProtocol::from_param_set(ps)?),
        ProtocolId::FullAsync => v.visit(&FullAsync::from_param_set(ps)?),
        ProtocolId::Baseline3State => v.visit(&Baseline3State),
    })
}

/// The communication model a protocol is designed for.
pub fn mode_of(id: ProtocolId) -> Mode {
    if id.is_synchronous() {
        Mode::Sync
    } else {
        Mode::Async
    }
}

/// Runs the protocol of `ps` on its own engine.
pub fn simulate(ps: &ParamSet, inst: &Instance, cfg: &SimConfig) -> Result<SimResult> {
    struct Sim<'a>(&'a Instance, &'a SimConfig, Mode);
    impl ProtocolVisitor for Sim<'_> {
        type Output = Result<SimResult>;
        fn visit<P: Protocol>(self, p: &P) -> Result<SimResult> {
            match self.2 {
                Mode::Async => run_async(p, self.0, self.1),
                Mode::Sync => run_sync(p, self.0, self.1),
            }
        }
    }
    visit_protocol(ps, Sim(inst, cfg, mode_of(ps.protocol)))?
}

/// Reachable-state analysis of the protocol of `ps` in its own model.
pub fn analyze_params(ps: &ParamSet, limit: usize) -> Result<StateSetReport> {
    struct An(Mode, usize);
    impl ProtocolVisitor for An {
        type Output = Result<StateSetReport>;
        fn visit<P: Protocol>(self, p: &P) -> Result<StateSetReport> {
            analyzer::analyze(p, self.0, self.1)
        }
    }
    visit_protocol(ps, An(mode_of(ps.protocol), limit))?
}

/// Human-readable label of an encoded state.
pub fn describe_state(ps: &ParamSet, code: u64) -> Result<Option<String>> {
    struct Describe(u64);
    impl ProtocolVisitor for Describe {
        type Output = Option<String>;
        fn visit<P: Protocol>(self, p: &P) -> Option<String> {
            p.decode(self.0).map(|s| s.to_string())
        }
    }
    visit_protocol(ps, Describe(code))
}
