use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::Learner;
use crate::error::{Error, Result};
use crate::neural::{save_network, QNetwork};

/// The learning agents of a run and which learner each zone's agent uses.
///
/// While parameters are shared every agent maps to the same learner, so a
/// change made through one agent is seen by all of them.
#[derive(Debug, Clone)]
pub struct AgentPool {
    learners: Vec<Learner>,
    /// zone → index into `learners`
    assignment: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub zone: usize,
    pub learner: usize,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub shared: bool,
    pub agents: Vec<CheckpointEntry>,
}

impl AgentPool {
    /// All `zones` reference one learner.
    pub fn shared(learner: Learner, zones: &[usize]) -> Self {
        AgentPool {
            learners: vec![learner],
            assignment: zones.iter().map(|&z| (z, 0)).collect(),
        }
    }

    pub fn single(learner: Learner, zone: usize) -> Self {
        Self::shared(learner, &[zone])
    }

    /// Replaces the shared learner by one independent copy per agent. Each
    /// copy keeps only its own agent's replay entries.
    pub fn individualize(&mut self) {
        let mut learners = Vec::with_capacity(self.assignment.len());
        let mut assignment = BTreeMap::new();
        for (&zone, &idx) in &self.assignment {
            let source = &self.learners[idx];
            let mut copy = source.clone();
            copy.buffer = source.buffer.for_agent(zone);
            assignment.insert(zone, learners.len());
            learners.push(copy);
        }
        self.learners = learners;
        self.assignment = assignment;
    }

    /// Consumes the pool, returning its first learner.
    pub fn into_first_learner(self) -> Learner {
        self.learners.into_iter().next().expect("pool has a learner")
    }

    pub fn zones(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment.keys().copied()
    }

    pub fn n_agents(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_shared(&self) -> bool {
        self.learners.len() == 1 && self.assignment.len() > 1
    }

    pub fn controls(&self, zone: usize) -> bool {
        self.assignment.contains_key(&zone)
    }

    pub fn learner_index(&self, zone: usize) -> Option<usize> {
        self.assignment.get(&zone).copied()
    }

    pub fn learners(&self) -> &[Learner] {
        &self.learners
    }

    pub fn learners_mut(&mut self) -> &mut [Learner] {
        &mut self.learners
    }

    pub fn learner(&self, zone: usize) -> Result<&Learner> {
        let idx = self.index(zone)?;
        Ok(&self.learners[idx])
    }

    pub fn learner_mut(&mut self, zone: usize) -> Result<&mut Learner> {
        let idx = self.index(zone)?;
        Ok(&mut self.learners[idx])
    }

    pub fn network(&self, zone: usize) -> Result<&QNetwork> {
        Ok(&self.learner(zone)?.online)
    }

    fn index(&self, zone: usize) -> Result<usize> {
        self.learner_index(zone)
            .ok_or_else(|| Error::Input(format!("zone {zone} has no learning agent")))
    }

    pub fn update_targets(&mut self) {
        for l in &mut self.learners {
            l.update_target();
        }
    }

    pub fn all_finite(&self) -> bool {
        self.learners.iter().all(|l| l.online.all_finite())
    }

    /// Writes `agent_<zone>.json` for every agent plus `manifest.json`.
    pub fn save_checkpoints(&self, dir: &Path) -> Result<CheckpointManifest> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut agents = Vec::new();
        for (&zone, &learner) in &self.assignment {
            let file = format!("agent_{zone}.json");
            save_network(&self.learners[learner].online, dir.join(&file))?;
            agents.push(CheckpointEntry {
                zone,
                learner,
                file,
            });
        }
        let manifest = CheckpointManifest {
            shared: self.is_shared(),
            agents,
        };
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }

    /// Restores a pool written by [`AgentPool::save_checkpoints`]. Agents
    /// that shared a learner share it again.
    pub fn load_checkpoints(dir: &Path, buffer_capacity: usize) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: CheckpointManifest =
            serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        let mut by_learner: BTreeMap<usize, Learner> = BTreeMap::new();
        let mut assignment = BTreeMap::new();
        for entry in &manifest.agents {
            if !by_learner.contains_key(&entry.learner) {
                let net = crate::neural::load_network(dir.join(&entry.file))?;
                by_learner.insert(entry.learner, Learner::from_network(net, buffer_capacity));
            }
            assignment.insert(entry.zone, entry.learner);
        }
        // Re-index learners densely in manifest order.
        let remap: BTreeMap<usize, usize> =
            by_learner.keys().enumerate().map(|(i, &k)| (k, i)).collect();
        Ok(AgentPool {
            learners: by_learner.into_values().collect(),
            assignment: assignment.into_iter().map(|(z, l)| (z, remap[&l])).collect(),
        })
    }
}
