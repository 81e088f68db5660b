//! Typed template induction and instance materialization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::extraction::{ArgTriple, Mode, Tuple5};
use crate::lexicon::{TypeLexicon, TypeName};

pub const DEFAULT_MIN_SUPPORT: usize = 3;
pub const DEFAULT_MAX_PER_SOURCE: usize = 1;

/// Tuples per shard when counting support in parallel.
const SHARD_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemplateKey {
    pub verb: String,
    pub connector: Vec<String>,
    pub types: [TypeName; 3],
}

impl TemplateKey {
    pub fn new(types: [TypeName; 3], verb: &str, connector: &[&str]) -> Self {
        TemplateKey {
            verb: verb.to_lowercase(),
            connector: connector.iter().map(|c| c.to_lowercase()).collect(),
            types,
        }
    }

    pub fn connector_text(&self) -> String {
        self.connector.join(" ")
    }
}

impl fmt::Display for TemplateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}> {} <{}> {} <{}>",
            self.types[0],
            self.verb,
            self.types[1],
            self.connector_text(),
            self.types[2]
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateStatus {
    Candidate,
    Accepted,
    Rejected,
}

impl TemplateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateStatus::Candidate => "candidate",
            TemplateStatus::Accepted => "accepted",
            TemplateStatus::Rejected => "rejected",
        }
    }
}

impl std::str::FromStr for TemplateStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "candidate" => Ok(TemplateStatus::Candidate),
            "accepted" => Ok(TemplateStatus::Accepted),
            "rejected" => Ok(TemplateStatus::Rejected),
            other => Err(Error::InvalidArgument(format!("unknown status `{other}`"))),
        }
    }
}

pub type RoleTriple = [String; 3];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub event_type: String,
    pub key: TemplateKey,
    pub status: TemplateStatus,
    pub roles: Option<RoleTriple>,
    pub support: BTreeSet<ArgTriple>,
    pub support_tuples: Vec<Tuple5>,
    pub iteration: u32,
    pub parent: Option<String>,
}

impl Template {
    pub fn support_count(&self) -> usize {
        self.support.len()
    }

    pub fn relation(&self) -> Option<TernaryRelation> {
        self.roles
            .as_ref()
            .map(|roles| TernaryRelation { event_type: self.event_type.clone(), roles: roles.clone() })
    }

    pub fn is_accepted(&self) -> bool {
        self.status == TemplateStatus::Accepted
    }
}

pub fn template_id(iteration: u32, ordinal: usize) -> String {
    format!("T{iteration}-{ordinal:05}")
}

/// An ordered triple of role labels under one event type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TernaryRelation {
    pub event_type: String,
    pub roles: RoleTriple,
}

impl TernaryRelation {
    pub fn new(event_type: &str, roles: [&str; 3]) -> Self {
        TernaryRelation { event_type: event_type.to_string(), roles: roles.map(str::to_string) }
    }

    /// Flat name used in exports and API filters.
    pub fn name(&self) -> String {
        self.roles.join("_")
    }
}

impl fmt::Display for TernaryRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub relation: TernaryRelation,
    pub args: ArgTriple,
    pub raw_args: [String; 3],
    pub template_id: String,
    pub doc_id: String,
    pub sent_index: usize,
    pub iteration: u32,
}

/// `$40 billion`, `€ 3.5 million`, ...
pub fn is_amount_phrase(key: &str) -> bool {
    const CURRENCY: &[char] = &['$', '€', '£', '¥'];
    const SCALES: &[&str] = &["hundred", "thousand", "million", "billion", "trillion"];
    let Some(rest) = key.strip_prefix(CURRENCY) else {
        return false;
    };
    let mut words = rest.split_whitespace();
    let Some(number) = words.next() else {
        return false;
    };
    let numeric = number.chars().next().is_some_and(|c| c.is_ascii_digit())
        && number.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',');
    numeric && words.all(|w| SCALES.contains(&w))
}

/// Types of one normalized argument, with the amount pseudo-type when the
/// lexicon has nothing.
pub fn argument_types(lex: &TypeLexicon, key: &str, max_per_source: usize) -> Vec<TypeName> {
    let types = lex.resolve_types(key, max_per_source);
    if types.is_empty() && is_amount_phrase(key) {
        return vec![TypeName::wdn("dollar_amount")];
    }
    types
}

/// Every typed key for a tuple (the product of its argument typings).
/// Empty when any argument is untypeable.
pub fn typed_keys(tuple: &Tuple5, lex: &TypeLexicon, max_per_source: usize) -> Vec<TemplateKey> {
    let t1 = argument_types(lex, &tuple.n1.norm, max_per_source);
    let t2 = argument_types(lex, &tuple.n2.norm, max_per_source);
    let t3 = argument_types(lex, &tuple.n3.norm, max_per_source);
    let connector: Vec<String> = tuple.connector.iter().map(|c| c.to_lowercase()).collect();
    let mut keys = Vec::with_capacity(t1.len() * t2.len() * t3.len());
    for a in &t1 {
        for b in &t2 {
            for c in &t3 {
                keys.push(TemplateKey {
                    verb: tuple.verb_lemma.to_lowercase(),
                    connector: connector.clone(),
                    types: [a.clone(), b.clone(), c.clone()],
                });
            }
        }
    }
    keys
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InductionConfig {
    pub min_support: usize,
    pub max_per_source: usize,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig { min_support: DEFAULT_MIN_SUPPORT, max_per_source: DEFAULT_MAX_PER_SOURCE }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct SupportGroup {
    support: BTreeSet<ArgTriple>,
    tuples: Vec<Tuple5>,
}

/// Shard-local `(event type, key) -> support` map. Shards merge by set
/// union; the threshold is applied only after the final merge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportCounter {
    groups: BTreeMap<(String, TemplateKey), SupportGroup>,
    dropped_untypeable: usize,
}

impl SupportCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, tuple: &Tuple5, lex: &TypeLexicon, max_per_source: usize) {
        debug_assert_eq!(tuple.mode, Mode::Strict);
        let keys = typed_keys(tuple, lex, max_per_source);
        if keys.is_empty() {
            self.dropped_untypeable += 1;
            return;
        }
        let event = tuple.event_type.clone().unwrap_or_default();
        for key in keys {
            let group = self.groups.entry((event.clone(), key)).or_default();
            group.support.insert(tuple.args());
            group.tuples.push(tuple.clone());
        }
    }

    pub fn merge(mut self, other: SupportCounter) -> SupportCounter {
        self.dropped_untypeable += other.dropped_untypeable;
        for (k, g) in other.groups {
            let mine = self.groups.entry(k).or_default();
            mine.support.extend(g.support);
            mine.tuples.extend(g.tuples);
        }
        self
    }

    pub fn dropped_untypeable(&self) -> usize {
        self.dropped_untypeable
    }

    /// Support sizes of every group, before thresholding.
    pub fn support_sizes(&self) -> BTreeMap<(String, TemplateKey), usize> {
        self.groups.iter().map(|(k, g)| (k.clone(), g.support.len())).collect()
    }

    /// Groups with at least `min_support` distinct argument triples, as
    /// candidate templates numbered in key order.
    pub fn into_candidates(self, min_support: usize, iteration: u32) -> Vec<Template> {
        self.groups
            .into_iter()
            .filter(|(_, g)| g.support.len() >= min_support)
            .enumerate()
            .map(|(i, ((event_type, key), mut g))| {
                g.tuples.sort();
                g.tuples.dedup();
                Template {
                    id: template_id(iteration, i + 1),
                    event_type,
                    key,
                    status: TemplateStatus::Candidate,
                    roles: None,
                    support: g.support,
                    support_tuples: g.tuples,
                    iteration,
                    parent: None,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductionOutput {
    pub candidates: Vec<Template>,
    pub dropped_untypeable: usize,
}

/// Groups strict tuples into typed candidates whose support (distinct
/// argument triples) reaches `min_support`.
pub fn induce_candidates(tuples: &[Tuple5], lex: &TypeLexicon, cfg: InductionConfig) -> InductionOutput {
    let counter = tuples
        .par_chunks(SHARD_SIZE)
        .map(|shard| {
            let mut c = SupportCounter::new();
            for t in shard {
                c.add(t, lex, cfg.max_per_source);
            }
            c
        })
        .reduce(SupportCounter::new, SupportCounter::merge);
    let dropped_untypeable = counter.dropped_untypeable();
    InductionOutput { candidates: counter.into_candidates(cfg.min_support, 0), dropped_untypeable }
}

/// One instance per supporting tuple of each accepted template, labelled
/// with the template's relation and deduplicated on `(relation, args)`.
/// Earlier iterations and lower template ids win ties.
pub fn materialize_instances(templates: &[Template]) -> Result<Vec<Instance>, Error> {
    let mut accepted: Vec<&Template> = templates.iter().filter(|t| t.is_accepted()).collect();
    accepted.sort_by(|a, b| (a.iteration, &a.id).cmp(&(b.iteration, &b.id)));
    let mut out: BTreeMap<(TernaryRelation, ArgTriple), Instance> = BTreeMap::new();
    for t in accepted {
        let relation = t.relation().ok_or_else(|| Error::MissingRoles(t.id.clone()))?;
        for tuple in &t.support_tuples {
            let args = tuple.args();
            out.entry((relation.clone(), args.clone())).or_insert_with(|| Instance {
                relation: relation.clone(),
                args,
                raw_args: tuple.raw_args(),
                template_id: t.id.clone(),
                doc_id: tuple.provenance.doc_id.clone(),
                sent_index: tuple.provenance.sent_index,
                iteration: t.iteration,
            });
        }
    }
    Ok(out.into_values().collect())
}

/// Distinct role triples of the accepted, labelled templates.
pub fn relation_inventory(templates: &[Template]) -> BTreeSet<TernaryRelation> {
    templates.iter().filter(|t| t.is_accepted()).filter_map(Template::relation).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{Argument, Provenance};
    use crate::lexicon::load_lexicon;
    use proptest::prelude::*;

    fn arg(s: &str) -> Argument {
        Argument { norm: s.to_string(), raw: s.to_string() }
    }

    pub(crate) fn tuple(sent: usize, n1: &str, verb: &str, n2: &str, prep: &str, n3: &str) -> Tuple5 {
        Tuple5 {
            provenance: Provenance { doc_id: "d".into(), sent_index: sent, n1: 0, verb: 1, n2: 2, n3: 4 },
            n1: arg(n1),
            verb_lemma: verb.into(),
            verb_surface: verb.into(),
            n2: arg(n2),
            connector: vec![prep.into()],
            n3: arg(n3),
            mode: Mode::Strict,
            event_type: Some("MurderEvent".into()),
        }
    }

    fn murder_lexicon() -> TypeLexicon {
        let text = "bob\tNEL_person\nalice\tNEL_person\ncarl\tNEL_person\ndan\tNEL_person\n\
                    eve\tNEL_person\nfrank\tNEL_person\nknife\tWDN_weapon\naxe\tWDN_weapon\nsword\tWDN_weapon\n";
        load_lexicon(text.as_bytes()).unwrap().0
    }

    fn murder_tuples() -> Vec<Tuple5> {
        vec![
            tuple(0, "bob", "kill", "alice", "with", "knife"),
            tuple(1, "carl", "kill", "dan", "with", "axe"),
            tuple(2, "eve", "kill", "frank", "with", "sword"),
        ]
    }

    fn murder_key() -> TemplateKey {
        TemplateKey::new(
            [TypeName::nel("person"), TypeName::nel("person"), TypeName::wdn("weapon")],
            "kill",
            &["with"],
        )
    }

    #[test]
    fn induces_murder_template_at_support_three() {
        let out = induce_candidates(&murder_tuples(), &murder_lexicon(), InductionConfig::default());
        assert_eq!(out.candidates.len(), 1);
        let t = &out.candidates[0];
        assert_eq!(t.key, murder_key());
        assert_eq!(t.key.to_string(), "<NEL_person> kill <NEL_person> with <WDN_weapon>");
        assert_eq!(t.support_count(), 3);
        assert_eq!(t.status, TemplateStatus::Candidate);
        assert_eq!(t.iteration, 0);
        assert_eq!(t.id, "T0-00001");
    }

    #[test]
    fn threshold_is_inclusive() {
        let cfg = InductionConfig { min_support: 4, ..Default::default() };
        assert!(induce_candidates(&murder_tuples(), &murder_lexicon(), cfg).candidates.is_empty());
    }

    #[test]
    fn repeated_triple_counts_once() {
        let mut tuples = murder_tuples();
        tuples.push(tuple(3, "bob", "kill", "alice", "with", "knife"));
        let out = induce_candidates(&tuples, &murder_lexicon(), InductionConfig::default());
        assert_eq!(out.candidates[0].support_count(), 3);
        assert_eq!(out.candidates[0].support_tuples.len(), 4);
    }

    #[test]
    fn untypeable_tuples_are_dropped_and_counted() {
        let mut tuples = murder_tuples();
        tuples.push(tuple(3, "bob", "kill", "zzyzx", "with", "knife"));
        let out = induce_candidates(&tuples, &murder_lexicon(), InductionConfig::default());
        assert_eq!(out.dropped_untypeable, 1);
        assert_eq!(out.candidates.len(), 1);
    }

    #[test]
    fn amount_phrases_get_pseudo_type() {
        assert!(is_amount_phrase("$40 billion"));
        assert!(is_amount_phrase("$ 40 billion"));
        assert!(is_amount_phrase("€3.5"));
        assert!(!is_amount_phrase("$ billion"));
        assert!(!is_amount_phrase("40 billion"));
        assert!(!is_amount_phrase("$40 apples"));
        let lex = TypeLexicon::new();
        assert_eq!(argument_types(&lex, "$40 billion", 1), vec![TypeName::wdn("dollar_amount")]);
    }

    #[test]
    fn ambiguous_arguments_enumerate_variants() {
        let text = "bob\tNEL_person\nbob\tWDN_person\nalice\tNEL_person\nknife\tWDN_weapon\n";
        let lex = load_lexicon(text.as_bytes()).unwrap().0;
        let keys = typed_keys(&tuple(0, "bob", "kill", "alice", "with", "knife"), &lex, 1);
        assert_eq!(keys.len(), 2);
    }

    fn labelled(mut t: Template, roles: [&str; 3]) -> Template {
        t.roles = Some(roles.map(str::to_string));
        t.status = TemplateStatus::Accepted;
        t
    }

    #[test]
    fn materializes_murder_instance() {
        let mut out = induce_candidates(&murder_tuples(), &murder_lexicon(), InductionConfig::default());
        let t = labelled(
            out.candidates.remove(0),
            ["MurderEventMurderer", "MurderEventMurdered", "MurderEventInstrument"],
        );
        let instances = materialize_instances(std::slice::from_ref(&t)).unwrap();
        assert_eq!(instances.len(), 3);
        let bob = instances.iter().find(|i| i.args.0 == "bob").unwrap();
        assert_eq!(bob.args, ArgTriple::new("bob", "alice", "knife"));
        assert_eq!(bob.relation.roles[2], "MurderEventInstrument");
        assert_eq!(bob.template_id, t.id);
    }

    #[test]
    fn accepted_without_labels_is_an_error() {
        let mut out = induce_candidates(&murder_tuples(), &murder_lexicon(), InductionConfig::default());
        out.candidates[0].status = TemplateStatus::Accepted;
        let err = materialize_instances(&out.candidates).unwrap_err();
        assert!(matches!(err, Error::MissingRoles(id) if id == "T0-00001"));
    }

    #[test]
    fn template_without_tuples_yields_nothing() {
        let mut out = induce_candidates(&murder_tuples(), &murder_lexicon(), InductionConfig::default());
        let mut t = labelled(out.candidates.remove(0), ["A", "B", "C"]);
        t.support_tuples.clear();
        assert!(materialize_instances(&[t]).unwrap().is_empty());
    }

    #[test]
    fn duplicate_tuples_yield_one_instance() {
        let tuples = vec![
            tuple(0, "bob", "kill", "alice", "with", "knife"),
            tuple(1, "bob", "kill", "alice", "with", "knife"),
            tuple(2, "carl", "kill", "dan", "with", "axe"),
            tuple(3, "eve", "kill", "frank", "with", "sword"),
        ];
        let mut out = induce_candidates(&tuples, &murder_lexicon(), InductionConfig::default());
        let t = labelled(out.candidates.remove(0), ["A", "B", "C"]);
        let instances = materialize_instances(&[t]).unwrap();
        assert_eq!(instances.len(), 3);
        let bob = instances.iter().find(|i| i.args.0 == "bob").unwrap();
        assert_eq!(bob.sent_index, 0);
    }

    #[test]
    fn rejected_templates_are_not_materialized() {
        let mut out = induce_candidates(&murder_tuples(), &murder_lexicon(), InductionConfig::default());
        let mut t = labelled(out.candidates.remove(0), ["A", "B", "C"]);
        t.status = TemplateStatus::Rejected;
        assert!(materialize_instances(&[t]).unwrap().is_empty());
    }

    fn bare(id: &str, roles: [&str; 3], verb: &str, status: TemplateStatus) -> Template {
        Template {
            id: id.into(),
            event_type: "EndorsementEvent".into(),
            key: TemplateKey::new(
                [TypeName::nel("person"), TypeName::nel("politician"), TypeName::wdn("political_office")],
                verb,
                &["for"],
            ),
            status,
            roles: Some(roles.map(str::to_string)),
            support: BTreeSet::new(),
            support_tuples: vec![],
            iteration: 0,
            parent: None,
        }
    }

    #[test]
    fn relation_inventory_counts_distinct_triples() {
        use TemplateStatus::*;
        let roles = ["EndorsementEventEndorser", "EndorsementEventEndorsed", "EndorsementEventOffice"];
        let two = [bare("a", roles, "endorse", Accepted), bare("b", roles, "back", Accepted)];
        assert_eq!(relation_inventory(&two).len(), 1);
        assert!(relation_inventory(&[]).is_empty());
        let five = [
            bare("1", ["A", "B", "C"], "v", Accepted),
            bare("2", ["A", "B", "C"], "w", Accepted),
            bare("3", ["A", "B", "D"], "x", Accepted),
            bare("4", ["E", "B", "C"], "y", Accepted),
            bare("5", ["E", "B", "C"], "z", Accepted),
            bare("6", ["Q", "R", "S"], "r", Rejected),
        ];
        assert_eq!(relation_inventory(&five).len(), 3);
    }

    proptest! {
        #[test]
        fn counting_is_order_and_shard_independent(
            picks in prop::collection::vec((0usize..4, 0usize..3, 0usize..3), 0..60),
            seed in any::<u64>(),
            split in 0usize..60,
        ) {
            let people = ["bob", "alice", "carl", "dan"];
            let weapons = ["knife", "axe", "sword"];
            let tuples: Vec<Tuple5> = picks
                .iter()
                .enumerate()
                .map(|(i, (a, b, w))| tuple(i, people[*a], "kill", people[*b], "with", weapons[*w]))
                .collect();
            let lex = murder_lexicon();
            let cfg = InductionConfig { min_support: 2, max_per_source: 1 };
            let global = induce_candidates(&tuples, &lex, cfg);

            let mut shuffled = tuples.clone();
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            prop_assert_eq!(&induce_candidates(&shuffled, &lex, cfg), &global);

            let split = split.min(shuffled.len());
            let (left, right) = shuffled.split_at(split);
            let mut a = SupportCounter::new();
            left.iter().for_each(|t| a.add(t, &lex, 1));
            let mut b = SupportCounter::new();
            right.iter().for_each(|t| b.add(t, &lex, 1));
            let merged = b.merge(a).into_candidates(cfg.min_support, 0);
            prop_assert_eq!(&merged, &global.candidates);
            for c in &merged {
                prop_assert!(c.support_count() >= cfg.min_support);
            }
        }
    }
}
