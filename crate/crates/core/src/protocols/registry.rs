//! Protocols selectable by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::protocols::aggp::AggpProtocol;
use crate::protocols::eg::EgProtocol;
use crate::protocols::scenario::{ScenarioConfig, SeedTree};
use crate::protocols::transcript::Simulation;
use crate::{Error, Result};

pub trait Protocol: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Runs setup and all `M` rounds of `config`, drawing every random
    /// choice from `seeds`.
    fn simulate(&self, config: &ScenarioConfig, seeds: &SeedTree) -> Result<Simulation>;
}

pub struct ProtocolRegistry {
    protocols: BTreeMap<&'static str, Arc<dyn Protocol>>,
}

impl ProtocolRegistry {
    pub fn empty() -> Self {
        Self {
            protocols: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(EgProtocol));
        r.register(Arc::new(AggpProtocol));
        r
    }

    pub fn register(&mut self, protocol: Arc<dyn Protocol>) {
        self.protocols.insert(protocol.name(), protocol);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Protocol>> {
        self.protocols.get(name).cloned().ok_or_else(|| {
            Error::Config(format!(
                "unknown protocol {name:?}; known: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.protocols.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn Protocol>> {
        self.protocols.values()
    }

    /// Looks up `config.protocol` and runs it.
    pub fn simulate(&self, config: &ScenarioConfig, seeds: &SeedTree) -> Result<Simulation> {
        self.get(&config.protocol)?.simulate(config, seeds)
    }
}

impl Default for ProtocolRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_registered() {
        let r = ProtocolRegistry::with_defaults();
        assert_eq!(r.names(), vec!["aggp", "eg"]);
        assert!(r.get("eg").is_ok());
        assert!(matches!(r.get("rsa"), Err(Error::Config(_))));
        assert!(r.iter().all(|p| !p.description().is_empty()));
    }

    #[test]
    fn dispatches_on_config_name() {
        let c = ScenarioConfig::from_json(
            r#"{"protocol":"eg","p":103,"B":3,"watermarks":[4],"data":{"inline":[[5]]},"lambda":"3+2i"}"#,
        )
        .unwrap();
        let sim = ProtocolRegistry::default().simulate(&c, &SeedTree::new("r")).unwrap();
        assert_eq!(sim.protocol, "eg");
        assert!(sim.all_accepted());
    }
}
