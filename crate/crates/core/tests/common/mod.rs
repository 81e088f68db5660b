#![allow(dead_code)]

use std::io::Write;

use pptern::bootstrap::{run_iterations, BootstrapConfig, IterationReport};
use pptern::corpus::Sentence;
use pptern::extraction::{EventSpec, PrepositionSet, DEFAULT_MAX_CONNECTOR_LEN};
use pptern::lexicon::{load_lexicon, TypeLexicon};
use pptern::pipeline::{chunk_all, extract_all_generalized, induce, initial_state};
use pptern::store::ProjectState;
use pptern::synth::{curate, GroundTruth};

/// Runs `f`, printing one PASS/FAIL line that bypasses test output capture.
pub fn criterion(name: &str, f: impl FnOnce() + std::panic::UnwindSafe) {
    let result = std::panic::catch_unwind(f);
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stdout(), "acceptance {verdict}: {name}");
    if let Err(e) = result {
        std::panic::resume_unwind(e);
    }
}

pub fn lexicon(tsv: &str) -> TypeLexicon {
    load_lexicon(tsv.as_bytes()).expect("in-memory read").0
}

/// Induction, scripted curation and bootstrap over a corpus.
pub fn full_run(
    sentences: Vec<Sentence>,
    lex: &TypeLexicon,
    events: Vec<EventSpec>,
    truth: &GroundTruth,
) -> (ProjectState, Vec<IterationReport>) {
    let chunked = chunk_all(sentences);
    let run = induce(&chunked, &events, &PrepositionSet::default(), lex, Default::default())
        .expect("triggers configured");
    let mut state = initial_state(events, run.output);
    curate(&mut state, truth).expect("planted curation applies");
    let gen = extract_all_generalized(&chunked, DEFAULT_MAX_CONNECTOR_LEN);
    let reports =
        run_iterations(&mut state, &gen, lex, &BootstrapConfig::default()).expect("accepted templates exist");
    (state, reports)
}
