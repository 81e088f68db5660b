//! Distant-supervision bootstrapping of new `(verb, connector)` templates.
//!
//! A generalized tuple supports an accepted instance when all three of its
//! normalized arguments equal the instance's arguments. Tuples are grouped
//! by `(typed key, relation of the matched instance)`; a group whose
//! distinct matched instances reach the threshold becomes a new accepted
//! template labelled with that relation's roles.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::extraction::{ArgTriple, Tuple5};
use crate::induction::{
    relation_inventory, template_id, typed_keys, Instance, Template, TemplateKey, TemplateStatus,
    TernaryRelation, DEFAULT_MAX_PER_SOURCE,
};
use crate::lexicon::TypeLexicon;
use crate::store::ProjectState;

pub const DEFAULT_MIN_SUPPORT_BOOTSTRAP: usize = 10;
pub const DEFAULT_MAX_ITERATIONS: u32 = 10;

const SHARD_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InstanceMatchMode {
    #[default]
    ExactTriple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    /// Distinct matched instances needed to promote a key (inclusive).
    pub min_support: usize,
    pub max_iterations: u32,
    pub max_per_source: usize,
    pub match_mode: InstanceMatchMode,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            min_support: DEFAULT_MIN_SUPPORT_BOOTSTRAP,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            max_per_source: DEFAULT_MAX_PER_SOURCE,
            match_mode: InstanceMatchMode::ExactTriple,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: u32,
    pub new_templates: usize,
    pub cumulative_templates: usize,
    pub new_instances: usize,
    pub cumulative_instances: usize,
    #[serde(default)]
    pub new_trigger_verbs: BTreeMap<String, Vec<String>>,
    pub relation_count: usize,
}

#[derive(Debug, Default)]
struct MatchGroup {
    matched: BTreeSet<ArgTriple>,
    parents: BTreeMap<String, usize>,
}

type MatchMap = HashMap<(TemplateKey, TernaryRelation), MatchGroup>;

fn merge_matches(mut a: MatchMap, b: MatchMap) -> MatchMap {
    for (k, g) in b {
        let mine = a.entry(k).or_default();
        mine.matched.extend(g.matched);
        for (p, n) in g.parents {
            *mine.parents.entry(p).or_default() += n;
        }
    }
    a
}

/// Promotes new templates from generalized tuples whose argument triples
/// coincide with existing instances.
pub fn discover_templates(
    instances: &[Instance],
    gen_tuples: &[Tuple5],
    lex: &TypeLexicon,
    cfg: &BootstrapConfig,
    existing: &[Template],
    iteration: u32,
) -> Vec<Template> {
    let mut by_args: HashMap<&ArgTriple, Vec<&Instance>> = HashMap::new();
    for inst in instances {
        by_args.entry(&inst.args).or_default().push(inst);
    }
    let existing_keys: HashSet<&TemplateKey> = existing.iter().map(|t| &t.key).collect();

    let matches = gen_tuples
        .par_chunks(SHARD_SIZE)
        .map(|shard| {
            let mut local = MatchMap::new();
            for tuple in shard {
                let args = tuple.args();
                let Some(hits) = by_args.get(&args) else {
                    continue;
                };
                for key in typed_keys(tuple, lex, cfg.max_per_source) {
                    if existing_keys.contains(&key) {
                        continue;
                    }
                    for inst in hits {
                        let g = local.entry((key.clone(), inst.relation.clone())).or_default();
                        g.matched.insert(args.clone());
                        *g.parents.entry(inst.template_id.clone()).or_default() += 1;
                    }
                }
            }
            local
        })
        .reduce(MatchMap::new, merge_matches);

    let mut promoted: Vec<(TemplateKey, TernaryRelation, String)> = matches
        .into_iter()
        .filter(|(_, g)| g.matched.len() >= cfg.min_support)
        .map(|((key, relation), g)| {
            // most frequent parent; ties go to the smallest id
            let parent = g
                .parents
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(id, _)| id.clone())
                .unwrap_or_default();
            (key, relation, parent)
        })
        .collect();
    promoted.sort_by(|a, b| (&a.1.event_type, &a.0, &a.1.roles).cmp(&(&b.1.event_type, &b.0, &b.1.roles)));
    if promoted.is_empty() {
        return Vec::new();
    }

    // full support of each promoted key over all generalized tuples
    let wanted: HashSet<&TemplateKey> = promoted.iter().map(|p| &p.0).collect();
    let support: HashMap<TemplateKey, (BTreeSet<ArgTriple>, Vec<Tuple5>)> = gen_tuples
        .par_chunks(SHARD_SIZE)
        .map(|shard| {
            let mut local: HashMap<TemplateKey, (BTreeSet<ArgTriple>, Vec<Tuple5>)> = HashMap::new();
            for tuple in shard {
                for key in typed_keys(tuple, lex, cfg.max_per_source) {
                    if wanted.contains(&key) {
                        let e = local.entry(key).or_default();
                        e.0.insert(tuple.args());
                        e.1.push(tuple.clone());
                    }
                }
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, (s, t)) in b {
                let e = a.entry(k).or_default();
                e.0.extend(s);
                e.1.extend(t);
            }
            a
        });

    promoted
        .into_iter()
        .enumerate()
        .map(|(i, (key, relation, parent))| {
            let (support, mut tuples) = support.get(&key).cloned().unwrap_or_default();
            tuples.sort();
            tuples.dedup();
            Template {
                id: template_id(iteration, i + 1),
                event_type: relation.event_type,
                key,
                status: TemplateStatus::Accepted,
                roles: Some(relation.roles),
                support,
                support_tuples: tuples,
                iteration,
                parent: Some(parent),
            }
        })
        .collect()
}

fn accepted_through(state: &ProjectState, iteration: u32) -> (usize, usize) {
    let mut new = 0;
    let mut cumulative = 0;
    for t in state.templates.iter().filter(|t| t.is_accepted()) {
        if t.iteration <= iteration {
            cumulative += 1;
        }
        if t.iteration == iteration {
            new += 1;
        }
    }
    (new, cumulative)
}

/// Summary row for an iteration given the state after it ran.
fn report_for(
    state: &ProjectState,
    iteration: u32,
    previous_instances: usize,
    new_trigger_verbs: BTreeMap<String, Vec<String>>,
) -> IterationReport {
    let (new_templates, cumulative_templates) = accepted_through(state, iteration);
    IterationReport {
        iteration,
        new_templates,
        cumulative_templates,
        new_instances: state.instances.len().saturating_sub(previous_instances),
        cumulative_instances: state.instances.len(),
        new_trigger_verbs,
        relation_count: relation_inventory(&state.templates).len(),
    }
}

/// Runs bootstrap iterations until an iteration adds no template or the
/// iteration cap is reached. Returns the reports of the iterations run in
/// this call; the iteration-0 report is recorded first if missing.
pub fn run_iterations(
    state: &mut ProjectState,
    gen_tuples: &[Tuple5],
    lex: &TypeLexicon,
    cfg: &BootstrapConfig,
) -> Result<Vec<IterationReport>, Error> {
    if !state.templates.iter().any(Template::is_accepted) {
        return Err(Error::NoAcceptedTemplates);
    }
    state.refresh_instances()?;
    if state.reports.is_empty() {
        let zero = report_for(state, 0, 0, BTreeMap::new());
        state.reports.push(zero);
    }

    let mut reports = Vec::new();
    let mut iteration = state.reports.last().map_or(0, |r| r.iteration);
    while iteration < cfg.max_iterations {
        iteration += 1;
        let before = state.instances.len();
        let discovered =
            discover_templates(&state.instances, gen_tuples, lex, cfg, &state.templates, iteration);
        let mut new_verbs: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for t in &discovered {
            if state.extend_triggers(&t.event_type, &t.key.verb) {
                new_verbs.entry(t.event_type.clone()).or_default().push(t.key.verb.clone());
            }
        }
        let found = discovered.len();
        state.templates.extend(discovered);
        state.refresh_instances()?;
        state.revision += 1;
        let report = report_for(state, iteration, before, new_verbs);
        state.reports.push(report.clone());
        reports.push(report);
        if found == 0 {
            break;
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{Argument, Mode, Provenance};
    use crate::lexicon::{load_lexicon, TypeName};

    fn arg(s: &str) -> Argument {
        Argument { norm: s.into(), raw: s.into() }
    }

    fn gen(sent: usize, a: &str, verb: &str, b: &str, conn: &[&str], c: &str) -> Tuple5 {
        Tuple5 {
            provenance: Provenance {
                doc_id: "g".into(),
                sent_index: sent,
                n1: 0,
                verb: 1,
                n2: 2,
                n3: 3 + conn.len(),
            },
            n1: arg(a),
            verb_lemma: verb.into(),
            verb_surface: verb.into(),
            n2: arg(b),
            connector: conn.iter().map(|s| s.to_string()).collect(),
            n3: arg(c),
            mode: Mode::Generalized,
            event_type: None,
        }
    }

    const ENDORSE: [&str; 3] =
        ["EndorsementEventEndorser", "EndorsementEventEndorsed", "EndorsementEventOffice"];

    fn endorse_key(verb: &str) -> TemplateKey {
        TemplateKey::new(
            [TypeName::nel("person"), TypeName::nel("politician"), TypeName::wdn("political_office")],
            verb,
            &["for"],
        )
    }

    /// Lexicon with voters v0.., politicians p0.. and offices o0...
    fn lexicon(n: usize) -> TypeLexicon {
        let mut text = String::new();
        for i in 0..n {
            text.push_str(&format!("v{i}\tNEL_person\np{i}\tNEL_politician\no{i}\tWDN_political_office\n"));
        }
        load_lexicon(text.as_bytes()).unwrap().0
    }

    fn endorse_instance(i: usize, template: &str) -> Instance {
        Instance {
            relation: TernaryRelation::new("EndorsementEvent", ENDORSE),
            args: ArgTriple(format!("v{i}"), format!("p{i}"), format!("o{i}")),
            raw_args: [format!("v{i}"), format!("p{i}"), format!("o{i}")],
            template_id: template.into(),
            doc_id: "d".into(),
            sent_index: i,
            iteration: 0,
        }
    }

    fn base_template() -> Template {
        Template {
            id: "T0-00001".into(),
            event_type: "EndorsementEvent".into(),
            key: endorse_key("endorse"),
            status: TemplateStatus::Accepted,
            roles: Some(ENDORSE.map(str::to_string)),
            support: BTreeSet::new(),
            support_tuples: vec![],
            iteration: 0,
            parent: None,
        }
    }

    fn backing_tuples(n: usize) -> Vec<Tuple5> {
        (0..n)
            .map(|i| gen(i, &format!("v{i}"), "back", &format!("p{i}"), &["for"], &format!("o{i}")))
            .collect()
    }

    #[test]
    fn promotes_backing_template_at_threshold() {
        let instances: Vec<_> = (0..12).map(|i| endorse_instance(i, "T0-00001")).collect();
        let mut tuples = backing_tuples(10);
        tuples.push(gen(99, "v20", "back", "p20", &["for"], "o20"));
        let got = discover_templates(
            &instances,
            &tuples,
            &lexicon(30),
            &BootstrapConfig::default(),
            &[base_template()],
            1,
        );
        assert_eq!(got.len(), 1);
        let t = &got[0];
        assert_eq!(t.key, endorse_key("back"));
        assert_eq!(t.status, TemplateStatus::Accepted);
        assert_eq!(t.roles, Some(ENDORSE.map(str::to_string)));
        assert_eq!(t.parent.as_deref(), Some("T0-00001"));
        assert_eq!(t.iteration, 1);
        assert_eq!(t.id, "T1-00001");
        // support covers every tuple of the key, not only the matched ones
        assert_eq!(t.support_count(), 11);
    }

    #[test]
    fn nine_matches_are_not_enough() {
        let instances: Vec<_> = (0..12).map(|i| endorse_instance(i, "T0-00001")).collect();
        let got = discover_templates(
            &instances,
            &backing_tuples(9),
            &lexicon(30),
            &BootstrapConfig::default(),
            &[base_template()],
            1,
        );
        assert!(got.is_empty());
    }

    #[test]
    fn existing_keys_are_not_promoted_again() {
        let instances: Vec<_> = (0..12).map(|i| endorse_instance(i, "T0-00001")).collect();
        let tuples: Vec<_> = (0..12)
            .map(|i| gen(i, &format!("v{i}"), "endorse", &format!("p{i}"), &["for"], &format!("o{i}")))
            .collect();
        let got = discover_templates(
            &instances,
            &tuples,
            &lexicon(30),
            &BootstrapConfig::default(),
            &[base_template()],
            1,
        );
        assert!(got.is_empty());
    }

    #[test]
    fn groups_are_scored_per_relation() {
        // the same (verb, connector) key matches 10 endorsement instances
        // and 10 instances of a second relation over the same types
        let other = TernaryRelation::new(
            "ElectionEvent",
            ["ElectionEventVoter", "ElectionEventCandidate", "ElectionEventOffice"],
        );
        let mut instances: Vec<_> = (0..10).map(|i| endorse_instance(i, "T0-00001")).collect();
        for i in 10..20 {
            let mut inst = endorse_instance(i, "T0-00002");
            inst.relation = other.clone();
            instances.push(inst);
        }
        // and 9 of a third relation, below threshold
        let third = TernaryRelation::new("MeetingEvent", ["MeetingEventA", "MeetingEventB", "MeetingEventC"]);
        for i in 20..29 {
            let mut inst = endorse_instance(i, "T0-00003");
            inst.relation = third.clone();
            instances.push(inst);
        }
        let got = discover_templates(
            &instances,
            &backing_tuples(29),
            &lexicon(30),
            &BootstrapConfig::default(),
            &[base_template()],
            1,
        );
        let rels: Vec<_> = got.iter().map(|t| t.relation().unwrap()).collect();
        assert_eq!(rels, vec![other, TernaryRelation::new("EndorsementEvent", ENDORSE)]);
        assert!(got.iter().all(|t| t.key == endorse_key("back")));
        assert_eq!(got[0].parent.as_deref(), Some("T0-00002"));
    }

    #[test]
    fn discovery_is_order_independent() {
        let mut instances: Vec<_> = (0..15).map(|i| endorse_instance(i, "T0-00001")).collect();
        let mut tuples = backing_tuples(15);
        tuples.extend((0..15).map(|i| {
            gen(100 + i, &format!("v{i}"), "support", &format!("p{i}"), &["for", "the"], &format!("o{i}"))
        }));
        let lex = lexicon(30);
        let cfg = BootstrapConfig::default();
        let a = discover_templates(&instances, &tuples, &lex, &cfg, &[base_template()], 1);
        instances.reverse();
        tuples.reverse();
        let b = discover_templates(&instances, &tuples, &lex, &cfg, &[base_template()], 1);
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
    }
}
