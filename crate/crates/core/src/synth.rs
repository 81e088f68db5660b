//! Planted corpora with known answers.
//!
//! [`plant`] writes a tagged corpus, a lexicon and an event configuration
//! in which a fixed set of templates, bootstrap chains and decoys is
//! embedded. The accompanying [`GroundTruth`] lists what a correct run must
//! recover: the candidate keys and their support, which of them a curator
//! accepts, the templates each bootstrap iteration promotes and the final
//! instance set. [`bulk_project`] builds large curated projects for
//! persistence and reporting workloads.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bootstrap::IterationReport;
use crate::corpus::{normalize_text, Sentence, Token};
use crate::error::Error;
use crate::extraction::{
    parse_event_config, ArgTriple, Argument, EventSpec, Mode, Provenance, TriggerOrigin, Tuple5,
    DEFAULT_EVENT_CONFIG,
};
use crate::induction::{RoleTriple, Template, TemplateKey, TemplateStatus, TernaryRelation};
use crate::lexicon::TypeName;
use crate::store::ProjectState;

/// Base templates need enough support to seed every chain.
pub const MIN_BASE_SUPPORT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantConfig {
    /// Distinct argument triples per base template.
    pub base_support: usize,
    pub documents: usize,
    /// Sentences matching no pattern.
    pub noise_sentences: usize,
    pub seed: u64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig { base_support: 20, documents: 8, noise_sentences: 40, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedTemplate {
    pub event_type: String,
    pub key: TemplateKey,
    /// Curator decision for iteration-0 candidates; bootstrapped templates
    /// are always accepted.
    pub status: TemplateStatus,
    pub roles: Option<RoleTriple>,
    pub iteration: u32,
    pub support: usize,
    /// Key of the template whose instances contributed most matches.
    pub parent: Option<TemplateKey>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub templates: Vec<PlantedTemplate>,
    /// Patterns present in the corpus that must never become templates.
    pub absent_keys: Vec<TemplateKey>,
    pub relations: BTreeSet<TernaryRelation>,
    pub instances: BTreeSet<(TernaryRelation, ArgTriple)>,
    /// Templates added per iteration, iteration 0 first, ending with the
    /// iteration that adds none.
    pub new_templates: Vec<usize>,
    pub new_instances: Vec<usize>,
    /// Bootstrapped trigger lemmas per event type.
    pub new_triggers: BTreeMap<String, BTreeSet<String>>,
}

impl GroundTruth {
    pub fn candidates(&self) -> impl Iterator<Item = &PlantedTemplate> {
        self.templates.iter().filter(|t| t.iteration == 0)
    }

    pub fn find(&self, event_type: &str, key: &TemplateKey) -> Option<&PlantedTemplate> {
        self.templates.iter().find(|t| t.event_type == event_type && &t.key == key)
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub sentences: Vec<Sentence>,
    pub lexicon_tsv: String,
    pub events: Vec<EventSpec>,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Person,
    Company,
    Amount,
    Weapon,
    City,
    Office,
    Day,
}

impl Kind {
    fn type_name(self) -> TypeName {
        TypeName::wdn(match self {
            Kind::Person => "person",
            Kind::Company => "company",
            Kind::Amount => "dollar_amount",
            Kind::Weapon => "weapon",
            Kind::City => "city",
            Kind::Office => "office",
            Kind::Day => "day",
        })
    }
}

const FIRST_NAMES: &[&str] =
    &["Marta", "Bruno", "Ines", "Tomas", "Alma", "Viktor", "Nadia", "Oskar", "Lena", "Pavel", "Rosa", "Emil"];
const COMPANIES: &[&str] = &["Norvex", "Caldera", "Brightwell", "Ostrand", "Kepler", "Miravo"];
const WEAPONS: &[&str] = &["knife", "rifle", "pistol", "hammer", "crossbow"];
const CITIES: &[&str] = &["Lyon", "Porto", "Gdansk", "Tampere", "Graz", "Ghent", "Bergen"];
const OFFICES: &[&[&str]] =
    &[&["governorship"], &["senate", "seat"], &["mayoralty"], &["party", "chairmanship"]];
const DAYS: &[&str] = &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];

/// A noun phrase as tagged tokens plus its normalized key.
#[derive(Debug, Clone)]
struct Phrase {
    tokens: Vec<(String, &'static str)>,
    norm: String,
}

#[derive(Default)]
struct Entities {
    counters: BTreeMap<&'static str, usize>,
    lexicon: BTreeMap<String, TypeName>,
}

impl Entities {
    fn next(&mut self, what: &'static str) -> usize {
        let n = self.counters.entry(what).or_default();
        *n += 1;
        *n
    }

    fn phrase(&mut self, kind: Kind, tokens: Vec<(String, &'static str)>, typed: bool) -> Phrase {
        let text: Vec<&str> = tokens.iter().map(|(s, _)| s.as_str()).collect();
        let norm = normalize_text(&text.join(" "));
        if typed {
            self.lexicon.insert(norm.clone(), kind.type_name());
        }
        Phrase { tokens, norm }
    }

    fn fresh(&mut self, kind: Kind) -> Phrase {
        let n = self.next(match kind {
            Kind::Person => "person",
            Kind::Company => "company",
            Kind::Amount => "amount",
            Kind::Weapon => "weapon",
            Kind::City => "city",
            Kind::Office => "office",
            Kind::Day => "day",
        });
        let tokens = match kind {
            Kind::Person => {
                let base = FIRST_NAMES[(n - 1) % FIRST_NAMES.len()];
                vec![(format!("{base}{}", (n - 1) / FIRST_NAMES.len() + 1), "NNP")]
            }
            Kind::Company => {
                let base = COMPANIES[(n - 1) % COMPANIES.len()];
                vec![(format!("{base}{}", (n - 1) / COMPANIES.len() + 1), "NNP")]
            }
            Kind::Amount => vec![(format!("${}", 10 + n), "CD"), ("million".into(), "CD")],
            Kind::Weapon => vec![("a".into(), "DT"), (WEAPONS[(n - 1) % WEAPONS.len()].into(), "NN")],
            Kind::City => vec![(CITIES[(n - 1) % CITIES.len()].into(), "NNP")],
            Kind::Office => {
                let words = OFFICES[(n - 1) % OFFICES.len()];
                let mut t = vec![("the".to_string(), "DT")];
                t.extend(words.iter().map(|w| (w.to_string(), "NN")));
                t
            }
            Kind::Day => vec![(DAYS[(n - 1) % DAYS.len()].into(), "NNP")],
        };
        // amounts are typed by their shape, not by the lexicon
        self.phrase(kind, tokens, kind != Kind::Amount)
    }

    fn triple(&mut self, kinds: [Kind; 3]) -> [Phrase; 3] {
        kinds.map(|k| self.fresh(k))
    }
}

/// A verb plus connector with the argument kinds it takes.
#[derive(Debug, Clone, Copy)]
struct Pattern {
    event_type: &'static str,
    verb_surface: &'static str,
    verb_lemma: &'static str,
    connector: &'static [(&'static str, &'static str)],
    kinds: [Kind; 3],
}

impl Pattern {
    fn key(&self) -> TemplateKey {
        let conn: Vec<&str> = self.connector.iter().map(|(s, _)| *s).collect();
        TemplateKey::new(self.kinds.map(Kind::type_name), self.verb_lemma, &conn)
    }

    fn sentence(&self, args: &[Phrase; 3]) -> Vec<(String, &'static str, Option<&'static str>)> {
        let mut out: Vec<(String, &'static str, Option<&'static str>)> = Vec::new();
        let push_np = |out: &mut Vec<_>, p: &Phrase| {
            out.extend(p.tokens.iter().map(|(s, t)| (s.clone(), *t, None)));
        };
        push_np(&mut out, &args[0]);
        out.push((self.verb_surface.into(), "VBD", Some(self.verb_lemma)));
        push_np(&mut out, &args[1]);
        out.extend(self.connector.iter().map(|(s, t)| (s.to_string(), *t, None)));
        push_np(&mut out, &args[2]);
        out.push((".".into(), ".", None));
        out
    }
}

const fn pat(
    event_type: &'static str,
    verb_surface: &'static str,
    verb_lemma: &'static str,
    connector: &'static [(&'static str, &'static str)],
    kinds: [Kind; 3],
) -> Pattern {
    Pattern { event_type, verb_surface, verb_lemma, connector, kinds }
}

const MURDER: &str = "MurderEvent";
const ACQUISITION: &str = "AcquisitionEvent";
const ENDORSEMENT: &str = "EndorsementEvent";
const WEDDING: &str = "WeddingEvent";

use Kind::{Amount, City, Company, Day, Office, Person, Weapon};

const WITH: &[(&str, &str)] = &[("with", "IN")];
const IN: &[(&str, &str)] = &[("in", "IN")];
const FOR: &[(&str, &str)] = &[("for", "IN")];

const KILL_WITH: Pattern = pat(MURDER, "killed", "kill", WITH, [Person, Person, Weapon]);
const KILL_IN: Pattern = pat(MURDER, "killed", "kill", IN, [Person, Person, City]);
const BUY_FOR: Pattern = pat(ACQUISITION, "bought", "buy", FOR, [Company, Company, Amount]);
const ACQUIRE_FOR: Pattern = pat(ACQUISITION, "acquired", "acquire", FOR, [Company, Company, Amount]);
const ENDORSE_FOR: Pattern = pat(ENDORSEMENT, "endorsed", "endorse", FOR, [Person, Person, Office]);
const MARRY_IN: Pattern = pat(WEDDING, "married", "marry", IN, [Person, Person, City]);
const KILL_ON: Pattern = pat(MURDER, "killed", "kill", &[("on", "IN")], [Person, Person, Day]);
const KILL_AT: Pattern = pat(MURDER, "killed", "kill", &[("at", "IN")], [Person, Person, City]);

const BACK_FOR: Pattern = pat(ENDORSEMENT, "backed", "back", FOR, [Person, Person, Office]);
const STAB_WITH: Pattern = pat(MURDER, "stabbed", "stab", WITH, [Person, Person, Weapon]);
const PURCHASE_FOR: Pattern = pat(ACQUISITION, "purchased", "purchase", FOR, [Company, Company, Amount]);
const SHOOT_DEAD_IN: Pattern =
    pat(MURDER, "shot", "shoot", &[("dead", "JJ"), ("in", "IN")], [Person, Person, City]);
const SUPPORT_FOR: Pattern = pat(ENDORSEMENT, "supported", "support", FOR, [Person, Person, Office]);
const ATTACK_WITH: Pattern = pat(MURDER, "attacked", "attack", WITH, [Person, Person, Weapon]);
const MEET_IN: Pattern = pat(WEDDING, "met", "meet", IN, [Person, Person, City]);

fn role_triple(event: &str, roles: [&str; 3]) -> RoleTriple {
    roles.map(|r| format!("{event}_{r}"))
}

fn base_roles(p: &Pattern) -> RoleTriple {
    match (p.event_type, p.connector[0].0) {
        (MURDER, "with") => role_triple(MURDER, ["Killer", "Victim", "Weapon"]),
        (MURDER, _) => role_triple(MURDER, ["Killer", "Victim", "Location"]),
        (ACQUISITION, _) => role_triple(ACQUISITION, ["Buyer", "Acquired", "Price"]),
        (ENDORSEMENT, _) => role_triple(ENDORSEMENT, ["Endorser", "Endorsed", "Office"]),
        _ => role_triple(WEDDING, ["Spouse", "Partner", "Place"]),
    }
}

fn relation_of(event: &str, roles: &RoleTriple) -> TernaryRelation {
    TernaryRelation { event_type: event.to_string(), roles: roles.clone() }
}

fn args_of(p: &[Phrase; 3]) -> ArgTriple {
    ArgTriple(p[0].norm.clone(), p[1].norm.clone(), p[2].norm.clone())
}

struct Plan {
    ents: Entities,
    sentences: Vec<Vec<(String, &'static str, Option<&'static str>)>>,
    truth: GroundTruth,
}

impl Plan {
    fn emit(&mut self, p: &Pattern, args: &[[Phrase; 3]]) {
        for a in args {
            self.sentences.push(p.sentence(a));
        }
    }

    fn fresh(&mut self, p: &Pattern, n: usize) -> Vec<[Phrase; 3]> {
        (0..n).map(|_| self.ents.triple(p.kinds)).collect()
    }

    fn template(
        &mut self,
        p: &Pattern,
        status: TemplateStatus,
        iteration: u32,
        support: usize,
        parent: Option<&Pattern>,
    ) {
        let roles = (status == TemplateStatus::Accepted).then(|| base_roles(p));
        self.truth.templates.push(PlantedTemplate {
            event_type: p.event_type.to_string(),
            key: p.key(),
            status,
            roles,
            iteration,
            support,
            parent: parent.map(Pattern::key),
        });
    }

    fn instances(&mut self, p: &Pattern, args: &[[Phrase; 3]]) -> usize {
        let rel = relation_of(p.event_type, &base_roles(p));
        self.truth.relations.insert(rel.clone());
        args.iter().filter(|a| self.truth.instances.insert((rel.clone(), args_of(a)))).count()
    }
}

/// Builds the planted corpus. Fails when `base_support` is too small to
/// seed the chains.
pub fn plant(cfg: &PlantConfig) -> Result<PlantedCorpus, Error> {
    let b = cfg.base_support;
    if b < MIN_BASE_SUPPORT {
        return Err(Error::InvalidArgument(format!(
            "base support must be at least {MIN_BASE_SUPPORT}, got {b}"
        )));
    }
    if cfg.documents == 0 {
        return Err(Error::InvalidArgument("at least one document is needed".into()));
    }
    let mut plan = Plan {
        ents: Entities::default(),
        sentences: Vec::new(),
        truth: GroundTruth {
            templates: Vec::new(),
            absent_keys: vec![KILL_AT.key(), ATTACK_WITH.key(), MEET_IN.key()],
            relations: BTreeSet::new(),
            instances: BTreeSet::new(),
            new_templates: Vec::new(),
            new_instances: Vec::new(),
            new_triggers: BTreeMap::new(),
        },
    };

    // iteration 0: curated candidates and decoys
    let mut base: BTreeMap<TemplateKey, Vec<[Phrase; 3]>> = BTreeMap::new();
    let mut added = 0;
    for p in [KILL_WITH, KILL_IN, BUY_FOR, ACQUIRE_FOR, ENDORSE_FOR, MARRY_IN] {
        let args = plan.fresh(&p, b);
        plan.emit(&p, &args);
        plan.template(&p, TemplateStatus::Accepted, 0, b, None);
        added += plan.instances(&p, &args);
        base.insert(p.key(), args);
    }
    let junk = plan.fresh(&KILL_ON, 4);
    plan.emit(&KILL_ON, &junk);
    plan.template(&KILL_ON, TemplateStatus::Rejected, 0, 4, None);
    let rare = plan.fresh(&KILL_AT, 2);
    plan.emit(&KILL_AT, &rare);
    plan.truth.new_templates.push(6);
    plan.truth.new_instances.push(added);

    // iteration 1
    let kill_with = base[&KILL_WITH.key()].clone();
    let kill_in = base[&KILL_IN.key()].clone();
    let endorse = base[&ENDORSE_FOR.key()].clone();

    let back_fresh = plan.fresh(&BACK_FOR, 12);
    let back: Vec<_> = endorse[..12].iter().cloned().chain(back_fresh.iter().cloned()).collect();
    plan.emit(&BACK_FOR, &back);
    plan.template(&BACK_FOR, TemplateStatus::Accepted, 1, back.len(), Some(&ENDORSE_FOR));

    let stab = kill_with[..10].to_vec();
    plan.emit(&STAB_WITH, &stab);
    plan.template(&STAB_WITH, TemplateStatus::Accepted, 1, stab.len(), Some(&KILL_WITH));

    // equal overlap with both acquisition templates; the smaller key wins
    let purchase_fresh = plan.fresh(&PURCHASE_FOR, 3);
    let purchase: Vec<_> = base[&BUY_FOR.key()][..6]
        .iter()
        .chain(&base[&ACQUIRE_FOR.key()][..6])
        .chain(&purchase_fresh)
        .cloned()
        .collect();
    plan.emit(&PURCHASE_FOR, &purchase);
    let purchase_parent = if ACQUIRE_FOR.key() < BUY_FOR.key() { ACQUIRE_FOR } else { BUY_FOR };
    plan.template(&PURCHASE_FOR, TemplateStatus::Accepted, 1, purchase.len(), Some(&purchase_parent));

    let shoot = kill_in[..10].to_vec();
    plan.emit(&SHOOT_DEAD_IN, &shoot);
    plan.template(&SHOOT_DEAD_IN, TemplateStatus::Accepted, 1, shoot.len(), Some(&KILL_IN));

    // one short of the promotion threshold
    let attack = kill_with[b - 9..].to_vec();
    plan.emit(&ATTACK_WITH, &attack);

    // never overlaps with anything
    let meet = plan.fresh(&MEET_IN, cfg.noise_sentences.min(15));
    plan.emit(&MEET_IN, &meet);

    let added = plan.instances(&BACK_FOR, &back)
        + plan.instances(&STAB_WITH, &stab)
        + plan.instances(&PURCHASE_FOR, &purchase)
        + plan.instances(&SHOOT_DEAD_IN, &shoot);
    plan.truth.new_templates.push(4);
    plan.truth.new_instances.push(added);

    // iteration 2: reachable only through the fresh instances of `back for`
    let support_fresh = plan.fresh(&SUPPORT_FOR, 5);
    let support: Vec<_> = back_fresh[..11].iter().chain(&support_fresh).cloned().collect();
    plan.emit(&SUPPORT_FOR, &support);
    plan.template(&SUPPORT_FOR, TemplateStatus::Accepted, 2, support.len(), Some(&BACK_FOR));
    let added = plan.instances(&SUPPORT_FOR, &support);
    plan.truth.new_templates.extend([1, 0]);
    plan.truth.new_instances.extend([added, 0]);

    for p in [BACK_FOR, STAB_WITH, PURCHASE_FOR, SHOOT_DEAD_IN, SUPPORT_FOR] {
        plan.truth.new_triggers.entry(p.event_type.to_string()).or_default().insert(p.verb_lemma.to_string());
    }

    // untyped filler
    for i in 0..cfg.noise_sentences {
        let words = ["The", "weather", "in", "the", "valley", "stayed", "mild", "."];
        let tags = ["DT", "NN", "IN", "DT", "NN", "VBD", "JJ", "."];
        let mut s: Vec<(String, &'static str, Option<&'static str>)> =
            words.iter().zip(tags).map(|(w, t)| (w.to_string(), t, None)).collect();
        s[4].0 = format!("valley{i}");
        plan.sentences.push(s);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    plan.sentences.shuffle(&mut rng);
    let mut per_doc = vec![0usize; cfg.documents];
    let mut sentences: Vec<Sentence> = plan
        .sentences
        .into_iter()
        .enumerate()
        .map(|(i, toks)| {
            let d = i % cfg.documents;
            let sent_index = per_doc[d];
            per_doc[d] += 1;
            Sentence {
                doc_id: format!("doc{d:03}"),
                sent_index,
                tokens: toks.iter().enumerate().map(|(j, (s, t, l))| Token::new(s, t, *l, j)).collect(),
            }
        })
        .collect();
    sentences.sort_by(|a, b| (&a.doc_id, a.sent_index).cmp(&(&b.doc_id, b.sent_index)));

    let mut lexicon_tsv = String::from("# planted lexicon\n@hypernym\tWDN_city\tWDN_location\n");
    for (phrase, ty) in &plan.ents.lexicon {
        lexicon_tsv.push_str(&format!("{phrase}\t{ty}\n"));
    }

    Ok(PlantedCorpus { sentences, lexicon_tsv, events: planted_events(), truth: plan.truth })
}

/// The default event inventory with manual triggers for the planted
/// base templates.
pub fn planted_events() -> Vec<EventSpec> {
    let mut events = parse_event_config(DEFAULT_EVENT_CONFIG).expect("bundled event config");
    let triggers: &[(&str, &[&str])] = &[
        (MURDER, &["kill"]),
        (ACQUISITION, &["buy", "acquire"]),
        (ENDORSEMENT, &["endorse"]),
        (WEDDING, &["marry"]),
    ];
    for (event, verbs) in triggers {
        if let Some(spec) = events.iter_mut().find(|e| e.event_type == *event) {
            for v in *verbs {
                spec.triggers.insert(v.to_string(), TriggerOrigin::Manual);
            }
        }
    }
    events
}

/// Applies the curator decisions of `truth` to the iteration-0 candidates.
/// Candidates unknown to the truth are left untouched.
pub fn curate(state: &mut ProjectState, truth: &GroundTruth) -> Result<(), Error> {
    let ids: Vec<(String, String, TemplateKey)> = state
        .templates
        .iter()
        .filter(|t| t.iteration == 0)
        .map(|t| (t.id.clone(), t.event_type.clone(), t.key.clone()))
        .collect();
    for (id, event, key) in ids {
        let Some(planted) = truth.find(&event, &key) else {
            continue;
        };
        if let Some(roles) = &planted.roles {
            state.set_role_labels(&id, roles.clone())?;
        }
        state.set_status(&id, planted.status)?;
    }
    Ok(())
}

/// A curated project with `templates` accepted templates and `instances`
/// distinct instances spread over five relations, plus an iteration-0
/// report.
pub fn bulk_project(templates: usize, instances: usize) -> ProjectState {
    const RELATIONS: &[(&str, [&str; 3])] = &[
        (MURDER, ["Killer", "Victim", "Weapon"]),
        (MURDER, ["Killer", "Victim", "Location"]),
        (ACQUISITION, ["Buyer", "Acquired", "Price"]),
        (ENDORSEMENT, ["Endorser", "Endorsed", "Office"]),
        (WEDDING, ["Spouse", "Partner", "Place"]),
    ];
    let mut state = ProjectState::new(planted_events());
    let mut next_arg = 0usize;
    for i in 0..templates {
        let (event, roles) = RELATIONS[i % RELATIONS.len()];
        let share = instances / templates.max(1) + usize::from(i < instances % templates.max(1));
        let verb = format!("verb{i:04}");
        let key = TemplateKey::new(
            [TypeName::wdn("person"), TypeName::wdn("person"), TypeName::wdn("city")],
            &verb,
            &["in"],
        );
        let support_tuples: Vec<Tuple5> = (0..share)
            .map(|_| {
                next_arg += 1;
                let arg =
                    |p: &str| Argument { norm: format!("{p}{next_arg}"), raw: format!("{p}{next_arg}") };
                Tuple5 {
                    provenance: Provenance {
                        doc_id: format!("doc{:03}", next_arg % 97),
                        sent_index: next_arg,
                        n1: 0,
                        verb: 1,
                        n2: 2,
                        n3: 4,
                    },
                    n1: arg("a"),
                    verb_lemma: verb.clone(),
                    verb_surface: verb.clone(),
                    n2: arg("b"),
                    connector: vec!["in".into()],
                    n3: arg("c"),
                    mode: Mode::Strict,
                    event_type: Some(event.to_string()),
                }
            })
            .collect();
        state.templates.push(Template {
            id: crate::induction::template_id(0, i + 1),
            event_type: event.to_string(),
            key,
            status: TemplateStatus::Accepted,
            roles: Some(role_triple(event, roles)),
            support: support_tuples.iter().map(Tuple5::args).collect(),
            support_tuples,
            iteration: 0,
            parent: None,
        });
    }
    state.sync_relations();
    state.refresh_instances().expect("bulk templates carry roles");
    state.reports.push(IterationReport {
        iteration: 0,
        new_templates: templates,
        cumulative_templates: templates,
        new_instances: state.instances.len(),
        cumulative_instances: state.instances.len(),
        new_trigger_verbs: BTreeMap::new(),
        relation_count: state.relations.len(),
    });
    state
}
