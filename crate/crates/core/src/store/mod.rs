//! Project state, curation operations and persistence.

mod api;
mod export;
mod persist;
mod stats;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use api::{router, serve, ApiState};
pub use export::{write_instances_tsv, write_templates_tsv};
pub use persist::{load, load_path, save, save_path, FORMAT_VERSION};
pub use stats::{stats, StatsReport, StatsRow};

use crate::bootstrap::IterationReport;
use crate::error::Error;
use crate::extraction::{EventSpec, TriggerOrigin};
use crate::induction::{
    materialize_instances, Instance, RoleTriple, Template, TemplateStatus, TernaryRelation,
};

pub const DEFAULT_SAMPLE_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Wrong,
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "correct" => Ok(Verdict::Correct),
            "wrong" => Ok(Verdict::Wrong),
            other => Err(Error::InvalidArgument(format!("unknown verdict `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub template_id: String,
    pub verdict: Verdict,
    pub iteration: u32,
    #[serde(default)]
    pub note: String,
}

/// Precision as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    pub correct: usize,
    pub judged: usize,
}

impl Precision {
    pub fn ratio(&self) -> f64 {
        self.correct as f64 / self.judged as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectState {
    pub version: u32,
    /// Bumped on every mutation.
    pub revision: u64,
    pub events: Vec<EventSpec>,
    pub templates: Vec<Template>,
    pub relations: Vec<TernaryRelation>,
    pub instances: Vec<Instance>,
    pub reports: Vec<IterationReport>,
    pub judgments: Vec<Judgment>,
}

impl Default for ProjectState {
    fn default() -> Self {
        ProjectState::new(Vec::new())
    }
}

impl ProjectState {
    pub fn new(events: Vec<EventSpec>) -> Self {
        ProjectState {
            version: FORMAT_VERSION,
            revision: 0,
            events,
            templates: Vec::new(),
            relations: Vec::new(),
            instances: Vec::new(),
            reports: Vec::new(),
            judgments: Vec::new(),
        }
    }

    pub fn template(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }

    fn template_mut(&mut self, id: &str) -> Result<&mut Template, Error> {
        self.templates.iter_mut().find(|t| t.id == id).ok_or_else(|| Error::UnknownTemplate(id.to_string()))
    }

    /// Re-derives the instance list from the accepted templates.
    pub fn refresh_instances(&mut self) -> Result<(), Error> {
        self.instances = materialize_instances(&self.templates)?;
        Ok(())
    }

    /// Adds a bootstrapped trigger lemma to an event type, creating the
    /// event entry if needed. Returns whether the lemma was new.
    pub fn extend_triggers(&mut self, event_type: &str, lemma: &str) -> bool {
        if let Some(spec) = self.events.iter_mut().find(|e| e.event_type == event_type) {
            return spec.add_bootstrapped(lemma);
        }
        let mut spec = EventSpec::new(event_type, &[]);
        spec.triggers.insert(lemma.to_lowercase(), TriggerOrigin::Bootstrapped);
        self.events.push(spec);
        true
    }

    /// Moves a template to a new status. Accepting requires role labels.
    pub fn set_status(&mut self, id: &str, status: TemplateStatus) -> Result<&Template, Error> {
        let template = self.template_mut(id)?;
        if status == TemplateStatus::Accepted && template.roles.is_none() {
            return Err(Error::MissingRoles(id.to_string()));
        }
        template.status = status;
        self.refresh_instances()?;
        self.revision += 1;
        Ok(self.template(id).expect("template exists"))
    }

    /// Labels a template's three argument slots and upserts the relation.
    pub fn set_role_labels(&mut self, id: &str, roles: RoleTriple) -> Result<&Template, Error> {
        let template = self.template_mut(id)?;
        let roles = roles.map(|r| r.trim().to_string());
        if roles.iter().any(String::is_empty) {
            return Err(Error::BadRoles("role labels must be non-empty".into()));
        }
        if roles[0] == roles[1] || roles[0] == roles[2] || roles[1] == roles[2] {
            return Err(Error::BadRoles(format!("role labels must be distinct, got {}", roles.join(", "))));
        }
        if let Some(bad) = roles.iter().find(|r| !r.starts_with(&template.event_type)) {
            return Err(Error::BadRoles(format!(
                "`{bad}` does not start with the event type {}",
                template.event_type
            )));
        }
        template.roles = Some(roles);
        self.sync_relations();
        self.refresh_instances()?;
        self.revision += 1;
        Ok(self.template(id).expect("template exists"))
    }

    /// Keeps `relations` equal to the set of role triples in use.
    pub fn sync_relations(&mut self) {
        let set: BTreeSet<TernaryRelation> = self.templates.iter().filter_map(Template::relation).collect();
        self.relations = set.into_iter().collect();
    }

    /// Uniform sample without replacement of the accepted templates of one
    /// iteration; all of them when there are at most `n`.
    pub fn sample_for_review(&self, iteration: u32, n: usize, seed: u64) -> Vec<&Template> {
        let mut pool: Vec<&Template> =
            self.templates.iter().filter(|t| t.iteration == iteration && t.is_accepted()).collect();
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        if pool.len() <= n {
            return pool;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, pool.len(), n).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| pool[i]).collect()
    }

    /// Records (or replaces) the verdict on a template.
    pub fn record_judgment(
        &mut self,
        template_id: &str,
        verdict: Verdict,
        iteration: u32,
        note: &str,
    ) -> Result<(), Error> {
        let template =
            self.template(template_id).ok_or_else(|| Error::UnknownTemplate(template_id.to_string()))?;
        if template.iteration != iteration {
            return Err(Error::WrongIteration {
                template: template_id.to_string(),
                actual: template.iteration,
                requested: iteration,
            });
        }
        let judgment =
            Judgment { template_id: template_id.to_string(), verdict, iteration, note: note.to_string() };
        match self.judgments.iter_mut().find(|j| j.template_id == template_id) {
            Some(existing) => *existing = judgment,
            None => self.judgments.push(judgment),
        }
        self.revision += 1;
        Ok(())
    }

    /// `None` when nothing was judged in the iteration.
    pub fn precision(&self, iteration: u32) -> Option<Precision> {
        let (correct, judged) = self
            .judgments
            .iter()
            .filter(|j| j.iteration == iteration)
            .fold((0, 0), |(c, n), j| (c + usize::from(j.verdict == Verdict::Correct), n + 1));
        (judged > 0).then_some(Precision { correct, judged })
    }

    /// Checks referential integrity and the template invariants.
    pub fn validate(&self) -> Result<(), Error> {
        let mut ids = BTreeSet::new();
        for t in &self.templates {
            if !ids.insert(t.id.as_str()) {
                return Err(Error::Integrity(format!("duplicate template id {}", t.id)));
            }
        }
        let relations: BTreeSet<&TernaryRelation> = self.relations.iter().collect();
        for t in &self.templates {
            if t.is_accepted() {
                let rel = t.relation().ok_or_else(|| Error::MissingRoles(t.id.clone()))?;
                if !relations.contains(&rel) {
                    return Err(Error::Integrity(format!(
                        "template {} uses relation {} which is not registered",
                        t.id, rel
                    )));
                }
            }
            if let Some(parent) = &t.parent {
                if !ids.contains(parent.as_str()) {
                    return Err(Error::Integrity(format!("template {} has unknown parent {parent}", t.id)));
                }
            }
        }
        for inst in &self.instances {
            if !ids.contains(inst.template_id.as_str()) {
                return Err(Error::Integrity(format!(
                    "instance {} refers to unknown template {}",
                    inst.args, inst.template_id
                )));
            }
        }
        for j in &self.judgments {
            if !ids.contains(j.template_id.as_str()) {
                return Err(Error::Integrity(format!(
                    "judgment refers to unknown template {}",
                    j.template_id
                )));
            }
        }
        let mut running = 0;
        for r in &self.reports {
            running += r.new_templates;
            if r.cumulative_templates != running {
                return Err(Error::Integrity(format!(
                    "iteration {} reports {} cumulative templates, running total is {running}",
                    r.iteration, r.cumulative_templates
                )));
            }
        }
        Ok(())
    }

    /// Template counts per status.
    pub fn status_counts(&self) -> BTreeMap<TemplateStatus, usize> {
        let mut counts = BTreeMap::new();
        for t in &self.templates {
            *counts.entry(t.status).or_default() += 1;
        }
        counts
    }
}
