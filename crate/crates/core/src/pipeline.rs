//! Corpus-level drivers: reading, chunking and extraction over many
//! sentences in parallel, with deterministic (sorted) output.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::corpus::{read_corpus, ChunkedSentence, ReadStats, Sentence};
use crate::error::{Error, LineError};
use crate::extraction::{
    extract_generalized, extract_strict, EventSpec, PrepositionSet, TriggerIndex, Tuple5,
};
use crate::induction::{induce_candidates, InductionConfig, InductionOutput};
use crate::lexicon::{LoadReport, TypeLexicon};
use crate::store::ProjectState;

/// Sentences read from one or more corpus files.
#[derive(Debug, Default)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub stats: ReadStats,
    /// Malformed lines, reported and skipped.
    pub errors: Vec<(PathBuf, LineError)>,
}

pub fn read_corpus_files<P: AsRef<Path>>(paths: &[P]) -> Result<Corpus, Error> {
    let mut corpus = Corpus::default();
    for path in paths {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = read_corpus(BufReader::new(file));
        for item in reader.by_ref() {
            match item {
                Ok(s) => corpus.sentences.push(s),
                Err(e) => corpus.errors.push((path.to_path_buf(), e)),
            }
        }
        let s = reader.stats();
        corpus.stats.sentences += s.sentences;
        corpus.stats.line_errors += s.line_errors;
        corpus.stats.empty_sentences += s.empty_sentences;
    }
    Ok(corpus)
}

pub fn load_lexicon_files<P: AsRef<Path>>(paths: &[P]) -> Result<(TypeLexicon, LoadReport), Error> {
    let mut lex = TypeLexicon::new();
    let mut total = LoadReport::default();
    for path in paths {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let r = lex.extend_from_reader(BufReader::new(file)).map_err(|e| Error::io(path, e))?;
        total.lines_read += r.lines_read;
        total.duplicates += r.duplicates;
        total.hypernym_edges += r.hypernym_edges;
        total.errors.extend(r.errors);
    }
    Ok((lex, total))
}

pub fn chunk_all(sentences: Vec<Sentence>) -> Vec<ChunkedSentence> {
    sentences.into_par_iter().map(ChunkedSentence::new).collect()
}

pub fn extract_all_strict(
    sentences: &[ChunkedSentence],
    triggers: &TriggerIndex,
    preps: &PrepositionSet,
) -> Vec<Tuple5> {
    let mut tuples: Vec<Tuple5> =
        sentences.par_iter().flat_map_iter(|cs| extract_strict(cs, triggers, preps)).collect();
    tuples.par_sort_unstable();
    tuples
}

pub fn extract_all_generalized(sentences: &[ChunkedSentence], max_connector_len: usize) -> Vec<Tuple5> {
    let mut tuples: Vec<Tuple5> =
        sentences.par_iter().flat_map_iter(|cs| extract_generalized(cs, max_connector_len)).collect();
    tuples.par_sort_unstable();
    tuples
}

#[derive(Debug)]
pub struct InductionRun {
    pub strict_tuples: usize,
    pub output: InductionOutput,
}

/// Strict extraction followed by candidate induction.
pub fn induce(
    sentences: &[ChunkedSentence],
    events: &[EventSpec],
    preps: &PrepositionSet,
    lex: &TypeLexicon,
    cfg: InductionConfig,
) -> Result<InductionRun, Error> {
    let triggers = TriggerIndex::new(events);
    if triggers.is_empty() {
        return Err(Error::NoTriggerVerbs);
    }
    let tuples = extract_all_strict(sentences, &triggers, preps);
    Ok(InductionRun { strict_tuples: tuples.len(), output: induce_candidates(&tuples, lex, cfg) })
}

/// A fresh project holding the induced candidates.
pub fn initial_state(events: Vec<EventSpec>, output: InductionOutput) -> ProjectState {
    let mut state = ProjectState::new(events);
    state.templates = output.candidates;
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::parse_event_config;
    use crate::lexicon::TypeName;

    fn corpus() -> Vec<Sentence> {
        let lines = [
            "Ann/NNP killed/VBD Bob/NNP with/IN a/DT knife/NN ./.",
            "Cid/NNP killed/VBD Dan/NNP with/IN a/DT rifle/NN ./.",
            "Eve/NNP killed/VBD Fay/NNP with/IN a/DT pistol/NN ./.",
            "Gus/NNP met/VBD Hal/NNP in/IN Paris/NNP ./.",
        ];
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut s = Sentence::from_tagged("d", i, l);
                if s.tokens[1].surface == "killed" {
                    s.tokens[1].lemma = "kill".into();
                }
                s
            })
            .collect()
    }

    fn lexicon() -> TypeLexicon {
        let mut lex = TypeLexicon::new();
        for p in ["ann", "bob", "cid", "dan", "eve", "fay", "gus", "hal"] {
            lex.insert(p, TypeName::wdn("person"));
        }
        for w in ["knife", "rifle", "pistol"] {
            lex.insert(w, TypeName::wdn("weapon"));
        }
        lex
    }

    #[test]
    fn induce_finds_the_supported_key() {
        let events =
            parse_event_config("[[event]]\ntype = \"MurderEvent\"\ntriggers = [\"kill\"]\n").unwrap();
        let chunked = chunk_all(corpus());
        let run =
            induce(&chunked, &events, &PrepositionSet::default(), &lexicon(), Default::default()).unwrap();
        assert_eq!(run.strict_tuples, 3);
        assert_eq!(run.output.candidates.len(), 1);
        assert_eq!(
            run.output.candidates[0].key.to_string(),
            "<WDN_person> kill <WDN_person> with <WDN_weapon>"
        );
    }

    #[test]
    fn induce_needs_a_trigger() {
        let events = parse_event_config("[[event]]\ntype = \"MurderEvent\"\n").unwrap();
        let err = induce(&[], &events, &PrepositionSet::default(), &lexicon(), Default::default());
        assert!(matches!(err, Err(Error::NoTriggerVerbs)));
    }

    #[test]
    fn extraction_output_ignores_sentence_order() {
        let mut reversed = corpus();
        reversed.reverse();
        let a = extract_all_generalized(&chunk_all(corpus()), 3);
        let b = extract_all_generalized(&chunk_all(reversed), 3);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }
}
