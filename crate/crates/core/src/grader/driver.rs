//! Task drivers decide how a parsed script is executed. The `script`
//! driver runs it once; the `stopwait` driver calls it as the sender hook
//! of a stop-and-wait simulation at every time step.

use std::sync::Arc;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scriptlang::{ErrorKind, ExecLimits, ExecOutcome, Interpreter, Program, Registry, ScriptError, Value};
use serde::Deserialize;

use crate::commsim::{stopwait_simulate, NetConfig, ProtocolTrace};

pub struct DriverRun {
    pub outcome: ExecOutcome,
    /// Present when the driver ran a protocol simulation to completion.
    pub protocol: Option<(ProtocolTrace, NetConfig)>,
}

pub trait TaskDriver: Send + Sync {
    fn name(&self) -> &str;

    /// Validates manifest parameters; called when a manifest is loaded.
    fn check_params(&self, params: &serde_json::Value) -> Result<(), String>;

    /// Errors are configuration problems, never the script's fault.
    fn run(
        &self,
        program: &Program,
        registry: &Registry,
        limits: ExecLimits,
        params: &serde_json::Value,
    ) -> Result<DriverRun, String>;
}

/// Drivers by name.
#[derive(Clone)]
pub struct DriverRegistry {
    drivers: IndexMap<String, Arc<dyn TaskDriver>>,
}

impl DriverRegistry {
    pub fn empty() -> Self {
        Self {
            drivers: IndexMap::new(),
        }
    }

    /// `script` and `stopwait`.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(ScriptDriver)).expect("unique");
        reg.register(Arc::new(StopWaitDriver)).expect("unique");
        reg
    }

    pub fn register(&mut self, driver: Arc<dyn TaskDriver>) -> Result<(), String> {
        let name = driver.name().to_string();
        if self.drivers.contains_key(&name) {
            return Err(format!("driver '{name}' is already registered"));
        }
        self.drivers.insert(name, driver);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn TaskDriver>> {
        self.drivers.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.drivers.keys().map(String::as_str)
    }
}

impl Default for DriverRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

pub struct ScriptDriver;

impl TaskDriver for ScriptDriver {
    fn name(&self) -> &str {
        "script"
    }

    fn check_params(&self, params: &serde_json::Value) -> Result<(), String> {
        match params {
            serde_json::Value::Null => Ok(()),
            serde_json::Value::Object(m) if m.is_empty() => Ok(()),
            _ => Err("the script driver takes no parameters".into()),
        }
    }

    fn run(
        &self,
        program: &Program,
        registry: &Registry,
        limits: ExecLimits,
        _: &serde_json::Value,
    ) -> Result<DriverRun, String> {
        Ok(DriverRun {
            outcome: scriptlang::execute(program, registry, limits),
            protocol: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopWaitParams {
    pub num_packets: usize,
    #[serde(flatten)]
    pub net: NetConfig,
}

impl StopWaitParams {
    pub fn parse(params: &serde_json::Value) -> Result<Self, String> {
        let p: Self = serde_json::from_value(params.clone()).map_err(|e| format!("stopwait parameters: {e}"))?;
        if p.num_packets < 1 {
            return Err("stopwait parameters: num_packets must be at least 1".into());
        }
        p.net.validate().map_err(|e| format!("stopwait parameters: {e}"))?;
        Ok(p)
    }
}

/// Keeps the network's random stream apart from the script's.
const NETWORK_STREAM: u64 = 0x6e65_7477_6f72_6b21;

/// Runs the script once per time step with `ack_arrived`, `timer_expired`,
/// `__t`, `__cur_seq` and `__num_packets` set and `do_send` reset to false,
/// then reads `do_send` back. Variables persist between steps. The trace is
/// left in `__sw_sent`, `__sw_acks` and `__sw_delivered`.
pub struct StopWaitDriver;

impl TaskDriver for StopWaitDriver {
    fn name(&self) -> &str {
        "stopwait"
    }

    fn check_params(&self, params: &serde_json::Value) -> Result<(), String> {
        StopWaitParams::parse(params).map(|_| ())
    }

    fn run(
        &self,
        program: &Program,
        registry: &Registry,
        limits: ExecLimits,
        params: &serde_json::Value,
    ) -> Result<DriverRun, String> {
        let p = StopWaitParams::parse(params)?;
        let seed = limits.seed.unwrap_or_else(rand::random);
        let mut net_rng = ChaCha8Rng::seed_from_u64(seed ^ NETWORK_STREAM);
        let mut interp = Interpreter::new(registry, limits.with_seed(seed));
        let result = stopwait_simulate(p.num_packets, &p.net, &mut net_rng, |v| {
            interp.set_var("__t", Value::Num(v.t as f64));
            interp.set_var("__cur_seq", Value::Num(v.cur_seq as f64));
            interp.set_var("__num_packets", Value::Num(v.num_packets as f64));
            interp.set_var("ack_arrived", Value::Bool(v.ack_arrived));
            interp.set_var("timer_expired", Value::Bool(v.timer_expired));
            interp.set_var("do_send", Value::Bool(false));
            interp.run(program)?;
            match interp.workspace().get("do_send").and_then(Value::truthy) {
                Some(b) => Ok(b),
                None => Err(ScriptError::new(
                    ErrorKind::Type,
                    format!("do_send must be true or false (time step {})", v.t),
                    None,
                )),
            }
        });
        match result {
            Ok(trace) => {
                interp.set_var("__sw_sent", pairs(&trace.sent));
                interp.set_var("__sw_acks", pairs(&trace.acks));
                interp.set_var(
                    "__sw_delivered",
                    Value::Vector(trace.delivered.iter().map(|&s| s as f64).collect()),
                );
                interp.print(&format!(
                    "{} of {} packets delivered in {} time steps; {} packets sent.\n",
                    trace.delivered.len(),
                    p.num_packets,
                    p.net.horizon,
                    trace.sent.len()
                ));
                Ok(DriverRun {
                    outcome: interp.finish(Ok(())),
                    protocol: Some((trace, p.net)),
                })
            }
            Err(e) => Ok(DriverRun {
                outcome: interp.finish(Err(e)),
                protocol: None,
            }),
        }
    }
}

fn pairs(log: &[(u64, usize)]) -> Value {
    Value::List(
        log.iter()
            .map(|&(t, s)| Value::Vector(vec![t as f64, s as f64]))
            .collect(),
    )
}
