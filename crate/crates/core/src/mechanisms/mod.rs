//! Decision mechanisms applied at the end of every receive window.
//!
//! Each mechanism implements [`DecisionMechanism`] and is looked up by name in
//! a [`MechanismRegistry`]; the CLI accepts `vm | mr | hc1 | hc2 | ann:<file>`.

mod ann;
mod hand_coded;
mod majority;
mod voter;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::RngCore;

use crate::comms::MessageQueue;
use crate::error::{Error, Result};
use crate::evolution::Genome;
use crate::world::{Color, Opinion};

pub use ann::{ann_decide, ann_output, AnnInputs, AnnMechanism, HIDDEN, INPUTS};
pub use hand_coded::{hc1, hc2, hc2_threshold, Hc1, Hc2};
pub use majority::{majority_rule, MajorityRule};
pub use voter::{voter_model, VoterModel};

/// What a robot knows at decision time.
#[derive(Debug, Clone, Copy)]
pub struct DecisionInput<'a> {
    pub queue: &'a MessageQueue,
    pub ground: Color,
    pub own: Opinion,
}

pub trait DecisionMechanism: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn decide(&self, input: &DecisionInput<'_>, rng: &mut dyn RngCore) -> Opinion;
}

pub type SharedMechanism = Arc<dyn DecisionMechanism>;

type Factory = fn() -> SharedMechanism;

pub struct MechanismRegistry {
    builtins: BTreeMap<&'static str, Factory>,
}

impl Default for MechanismRegistry {
    fn default() -> Self {
        let mut r = MechanismRegistry {
            builtins: BTreeMap::new(),
        };
        r.register("vm", || Arc::new(VoterModel));
        r.register("mr", || Arc::new(MajorityRule));
        r.register("hc1", || Arc::new(Hc1));
        r.register("hc2", || Arc::new(Hc2));
        r
    }
}

impl MechanismRegistry {
    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.builtins.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builtins.keys().copied()
    }

    /// Resolves a mechanism spec; `ann:<path>` loads a genome file.
    pub fn resolve(&self, spec: &str) -> Result<SharedMechanism> {
        if let Some(path) = spec.strip_prefix("ann:") {
            let genome = Genome::load(Path::new(path))?;
            return Ok(Arc::new(AnnMechanism::new(genome, spec)?));
        }
        self.builtins
            .get(spec)
            .map(|f| f())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown mechanism {spec:?}; expected one of {} or ann:<genome-file>",
                    self.names().collect::<Vec<_>>().join(", ")
                ))
            })
    }
}
