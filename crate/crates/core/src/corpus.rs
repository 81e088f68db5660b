//! Tagged corpus reading and rule-based chunking.
//!
//! The corpus format is one token per line, `surface<TAB>pos[<TAB>lemma]`,
//! with blank lines between sentences and `#doc <id>` lines opening a new
//! document. Chunking is a deterministic pass over the Penn tags:
//!
//! ```text
//! NP   := (DT|PDT|PRP$|WP$)? (JJ*|CD|$|POS|NN*)* NN*        head = rightmost noun
//!       | (DT|PDT|PRP$|WP$)? $? CD+                          head = last cardinal
//! VG   := (RB*|VB*|MD)* (VB*|MD)                             head = last non-auxiliary verb
//! PREP := IN | TO
//! ```
//!
//! Everything else becomes a single-token `OTHER` chunk.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, LineError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub pos: String,
    pub lemma: String,
    pub index: usize,
}

impl Token {
    pub fn new(surface: &str, pos: &str, lemma: Option<&str>, index: usize) -> Self {
        let lemma = match lemma {
            Some(l) if !l.is_empty() => l.to_string(),
            _ => surface.to_lowercase(),
        };
        Token { surface: surface.to_string(), pos: pos.to_string(), lemma, index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub sent_index: usize,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a sentence from `surface/TAG` pairs, the lemma defaulting to the
    /// case-folded surface. Intended for fixtures.
    pub fn from_tagged(doc_id: &str, sent_index: usize, tagged: &str) -> Self {
        let tokens = tagged
            .split_whitespace()
            .enumerate()
            .map(|(i, pair)| {
                let (surface, pos) = pair.rsplit_once('/').unwrap_or((pair, "NN"));
                Token::new(surface, pos, None, i)
            })
            .collect();
        Sentence { doc_id: doc_id.to_string(), sent_index, tokens }
    }

    pub fn text(&self) -> String {
        join_surfaces(&self.tokens)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChunkKind {
    #[serde(rename = "NP")]
    NounPhrase,
    #[serde(rename = "VG")]
    VerbGroup,
    #[serde(rename = "PREP")]
    Preposition,
    #[serde(rename = "OTHER")]
    Other,
}

impl ChunkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChunkKind::NounPhrase => "NP",
            ChunkKind::VerbGroup => "VG",
            ChunkKind::Preposition => "PREP",
            ChunkKind::Other => "OTHER",
        }
    }
}

impl fmt::Display for ChunkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A contiguous, inclusive token span of one kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub kind: ChunkKind,
    pub start: usize,
    pub end: usize,
    pub head: usize,
    pub text: String,
    pub norm_text: String,
}

impl Chunk {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is(&self, kind: ChunkKind) -> bool {
        self.kind == kind
    }
}

/// A sentence together with its chunk partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkedSentence {
    pub sentence: Sentence,
    pub chunks: Vec<Chunk>,
}

impl ChunkedSentence {
    pub fn new(sentence: Sentence) -> Self {
        let chunks = chunk_sentence(&sentence);
        ChunkedSentence { sentence, chunks }
    }

    pub fn head_lemma(&self, chunk: &Chunk) -> &str {
        &self.sentence.tokens[chunk.head].lemma
    }

    pub fn head_surface(&self, chunk: &Chunk) -> &str {
        &self.sentence.tokens[chunk.head].surface
    }

    /// Tokens strictly between two chunks.
    pub fn tokens_between(&self, left: &Chunk, right: &Chunk) -> &[Token] {
        &self.sentence.tokens[left.end + 1..right.start]
    }
}

fn is_noun(pos: &str) -> bool {
    matches!(pos, "NN" | "NNS" | "NNP" | "NNPS")
}

fn is_determiner(pos: &str) -> bool {
    matches!(pos, "DT" | "PDT" | "PRP$" | "WP$")
}

fn is_np_modifier(pos: &str) -> bool {
    is_noun(pos) || matches!(pos, "JJ" | "JJR" | "JJS" | "CD" | "$" | "POS")
}

fn is_verb(pos: &str) -> bool {
    matches!(pos, "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" | "MD")
}

fn is_adverb(pos: &str) -> bool {
    matches!(pos, "RB" | "RBR" | "RBS")
}

fn is_preposition(pos: &str) -> bool {
    matches!(pos, "IN" | "TO")
}

const AUXILIARIES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had", "having", "do", "does",
    "did", "will", "shall", "would", "should", "can", "could", "may", "might", "must",
];

fn is_auxiliary(token: &Token) -> bool {
    token.pos == "MD" || AUXILIARIES.contains(&token.lemma.to_lowercase().as_str())
}

fn join_surfaces(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

/// Longest NP starting at `start`, as `(end, head)`.
fn match_noun_phrase(tokens: &[Token], start: usize) -> Option<(usize, usize)> {
    let mut body = start;
    if is_determiner(&tokens[start].pos) {
        body += 1;
    }
    let mut run_end = body;
    while run_end < tokens.len() && is_np_modifier(&tokens[run_end].pos) {
        run_end += 1;
    }
    if let Some(last_noun) = (body..run_end).rev().find(|&i| is_noun(&tokens[i].pos)) {
        return Some((last_noun, last_noun));
    }
    // amount or number: `$`? CD+
    let mut i = body;
    if i < run_end && tokens[i].pos == "$" {
        i += 1;
    }
    let digits_start = i;
    while i < run_end && tokens[i].pos == "CD" {
        i += 1;
    }
    (i > digits_start).then(|| (i - 1, i - 1))
}

fn match_verb_group(tokens: &[Token], start: usize) -> Option<(usize, usize)> {
    let mut run_end = start;
    while run_end < tokens.len() && (is_verb(&tokens[run_end].pos) || is_adverb(&tokens[run_end].pos)) {
        run_end += 1;
    }
    let last_verb = (start..run_end).rev().find(|&i| is_verb(&tokens[i].pos))?;
    let head = (start..=last_verb)
        .rev()
        .find(|&i| is_verb(&tokens[i].pos) && !is_auxiliary(&tokens[i]))
        .unwrap_or(last_verb);
    Some((last_verb, head))
}

fn make_chunk(tokens: &[Token], kind: ChunkKind, start: usize, end: usize, head: usize) -> Chunk {
    let text = join_surfaces(&tokens[start..=end]);
    let norm_text = match kind {
        ChunkKind::NounPhrase => normalize_text(&text),
        _ => text.to_lowercase(),
    };
    Chunk { kind, start, end, head, text, norm_text }
}

/// Partitions a sentence into chunks. Total and deterministic.
pub fn chunk_sentence(sentence: &Sentence) -> Vec<Chunk> {
    let tokens = &sentence.tokens;
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let (kind, end, head) = if let Some((end, head)) = match_noun_phrase(tokens, i) {
            (ChunkKind::NounPhrase, end, head)
        } else if let Some((end, head)) = match_verb_group(tokens, i) {
            (ChunkKind::VerbGroup, end, head)
        } else if is_preposition(&tokens[i].pos) {
            (ChunkKind::Preposition, i, i)
        } else {
            (ChunkKind::Other, i, i)
        };
        chunks.push(make_chunk(tokens, kind, i, end, head));
        i = end + 1;
    }
    chunks
}

const LEADING_DETERMINERS: &[&str] = &["the", "a", "an"];

/// Case-folds, collapses whitespace and strips leading articles.
pub fn normalize_text(text: &str) -> String {
    let lowered = text.to_lowercase();
    let mut words: Vec<&str> = lowered.split_whitespace().collect();
    while words.len() > 1 && LEADING_DETERMINERS.contains(&words[0]) {
        words.remove(0);
    }
    words.join(" ")
}

/// Normalization key of a noun phrase chunk.
pub fn normalize_phrase(chunk: &Chunk) -> Result<String, Error> {
    if chunk.kind != ChunkKind::NounPhrase {
        return Err(Error::NotNounPhrase(chunk.kind.as_str()));
    }
    Ok(normalize_text(&chunk.text))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadStats {
    pub sentences: usize,
    pub line_errors: usize,
    pub empty_sentences: usize,
}

/// Streaming reader over the tagged-TSV corpus format.
///
/// Yields `Err` for each malformed line; the sentence containing it is
/// dropped. Reading continues after an error.
pub struct TaggedReader<R> {
    input: R,
    line_no: usize,
    doc_id: String,
    next_sent_index: usize,
    tokens: Vec<Token>,
    poisoned: bool,
    saw_content: bool,
    done: bool,
    stats: ReadStats,
    buf: String,
}

pub const DEFAULT_DOC_ID: &str = "default";

impl<R: BufRead> TaggedReader<R> {
    pub fn new(input: R) -> Self {
        TaggedReader {
            input,
            line_no: 0,
            doc_id: DEFAULT_DOC_ID.to_string(),
            next_sent_index: 0,
            tokens: Vec::new(),
            poisoned: false,
            saw_content: false,
            done: false,
            stats: ReadStats::default(),
            buf: String::new(),
        }
    }

    pub fn stats(&self) -> ReadStats {
        self.stats
    }

    /// Closes the sentence under construction, if any.
    fn flush(&mut self) -> Option<Sentence> {
        let tokens = std::mem::take(&mut self.tokens);
        let poisoned = std::mem::replace(&mut self.poisoned, false);
        let had_content = std::mem::replace(&mut self.saw_content, false);
        if poisoned {
            self.next_sent_index += 1;
            return None;
        }
        if tokens.is_empty() {
            if had_content {
                self.stats.empty_sentences += 1;
            }
            return None;
        }
        let sentence = Sentence { doc_id: self.doc_id.clone(), sent_index: self.next_sent_index, tokens };
        self.next_sent_index += 1;
        self.stats.sentences += 1;
        Some(sentence)
    }

    fn parse_token(&self, line: &str) -> Result<Token, LineError> {
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) {
            return Err(LineError {
                line: self.line_no,
                message: format!("expected 2 or 3 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].is_empty() || cols[1].is_empty() {
            return Err(LineError { line: self.line_no, message: "empty surface or POS column".to_string() });
        }
        Ok(Token::new(cols[0], cols[1], cols.get(2).copied(), self.tokens.len()))
    }
}

impl<R: BufRead> Iterator for TaggedReader<R> {
    type Item = Result<Sentence, LineError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.done {
                return None;
            }
            self.buf.clear();
            let read = match self.input.read_line(&mut self.buf) {
                Ok(n) => n,
                Err(e) => {
                    self.done = true;
                    self.stats.line_errors += 1;
                    return Some(Err(LineError { line: self.line_no + 1, message: e.to_string() }));
                }
            };
            if read == 0 {
                self.done = true;
                return self.flush().map(Ok);
            }
            self.line_no += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']).to_string();

            if line.trim().is_empty() {
                if let Some(s) = self.flush() {
                    return Some(Ok(s));
                }
                continue;
            }
            if let Some(id) = line.strip_prefix("#doc ").filter(|_| !line.contains('\t')) {
                let flushed = self.flush();
                self.doc_id = id.trim().to_string();
                self.next_sent_index = 0;
                self.saw_content = true;
                if let Some(s) = flushed {
                    return Some(Ok(s));
                }
                continue;
            }
            self.saw_content = true;
            match self.parse_token(&line) {
                Ok(token) => {
                    if !self.poisoned {
                        self.tokens.push(token);
                    }
                }
                Err(e) => {
                    self.poisoned = true;
                    self.stats.line_errors += 1;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Reads a tagged-TSV stream lazily.
pub fn read_corpus<R: BufRead>(input: R) -> TaggedReader<R> {
    TaggedReader::new(input)
}

/// Writes sentences in the tagged-TSV format, emitting `#doc` lines on
/// document changes.
pub fn write_corpus<'a, W: Write>(
    out: &mut W,
    sentences: impl IntoIterator<Item = &'a Sentence>,
) -> std::io::Result<()> {
    let mut current_doc: Option<&str> = None;
    for s in sentences {
        if current_doc != Some(s.doc_id.as_str()) {
            writeln!(out, "#doc {}", s.doc_id)?;
            current_doc = Some(s.doc_id.as_str());
        }
        for t in &s.tokens {
            writeln!(out, "{}\t{}\t{}", t.surface, t.pos, t.lemma)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds_and_texts(s: &Sentence) -> Vec<(ChunkKind, String)> {
        chunk_sentence(s).into_iter().map(|c| (c.kind, c.text)).collect()
    }

    #[test]
    fn reads_minimal_sentence() {
        let input = "Bob\tNNP\tbob\nkilled\tVBD\tkill\nAlice\tNNP\talice\n\n";
        let got: Vec<_> = read_corpus(input.as_bytes()).collect();
        assert_eq!(got.len(), 1);
        let s = got[0].as_ref().unwrap();
        assert_eq!(s.tokens.len(), 3);
        assert_eq!(s.tokens[1].lemma, "kill");
        assert_eq!(s.tokens.iter().map(|t| t.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_stream_is_empty() {
        let mut reader = read_corpus(&b""[..]);
        assert!(reader.next().is_none());
        assert_eq!(reader.stats(), ReadStats::default());
    }

    #[test]
    fn missing_lemma_defaults_to_casefolded_surface() {
        let got: Vec<_> = read_corpus("Bought\tVBD\n".as_bytes()).collect();
        assert_eq!(got[0].as_ref().unwrap().tokens[0].lemma, "bought");
    }

    #[test]
    fn two_documents_with_one_malformed_line() {
        // doc a: 5 sentences, the third has a 4-column line; doc b: 5 sentences
        let mut text = String::from("#doc a\n");
        for i in 0..5 {
            text.push_str(&format!("S{i}\tNNP\ns\tVBD\n"));
            if i == 2 {
                text.push_str("bad\tNN\tx\ty\n");
            }
            text.push('\n');
        }
        text.push_str("#doc b\n");
        for i in 0..5 {
            text.push_str(&format!("T{i}\tNNP\n\n"));
        }
        let mut reader = read_corpus(text.as_bytes());
        let items: Vec<_> = reader.by_ref().collect();
        let sentences: Vec<_> = items.iter().filter_map(|r| r.as_ref().ok()).collect();
        let errors: Vec<_> = items.iter().filter_map(|r| r.as_ref().err()).collect();
        assert_eq!(sentences.len(), 9);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 10);
        let ids: Vec<_> = sentences.iter().map(|s| (s.doc_id.as_str(), s.sent_index)).collect();
        assert_eq!(
            ids,
            vec![("a", 0), ("a", 1), ("a", 3), ("a", 4), ("b", 0), ("b", 1), ("b", 2), ("b", 3), ("b", 4)]
        );
        assert_eq!(reader.stats().sentences, 9);
        assert_eq!(reader.stats().line_errors, 1);
    }

    #[test]
    fn doc_header_followed_by_blank_counts_empty_sentence() {
        let mut reader = read_corpus("#doc x\n\nA\tNN\n\n".as_bytes());
        assert_eq!(reader.by_ref().count(), 1);
        assert_eq!(reader.stats().empty_sentences, 1);
    }

    #[test]
    fn chunks_endorsement_example() {
        let s = Sentence::from_tagged(
            "d",
            0,
            "Joe/NNP Lieberman/NNP endorsed/VBD McCain/NNP for/IN president/NN",
        );
        use ChunkKind::*;
        assert_eq!(
            kinds_and_texts(&s),
            vec![
                (NounPhrase, "Joe Lieberman".into()),
                (VerbGroup, "endorsed".into()),
                (NounPhrase, "McCain".into()),
                (Preposition, "for".into()),
                (NounPhrase, "president".into()),
            ]
        );
    }

    #[test]
    fn single_verb_is_a_verb_group() {
        let s = Sentence::from_tagged("d", 0, "Run/VB");
        assert_eq!(kinds_and_texts(&s), vec![(ChunkKind::VerbGroup, "Run".into())]);
    }

    #[test]
    fn chunks_amount_phrase() {
        let s = Sentence::from_tagged(
            "d",
            0,
            "Mercedes-Benz/NNP bought/VBD Chrysler/NNP for/IN $40/CD billion/CD",
        );
        use ChunkKind::*;
        assert_eq!(
            kinds_and_texts(&s),
            vec![
                (NounPhrase, "Mercedes-Benz".into()),
                (VerbGroup, "bought".into()),
                (NounPhrase, "Chrysler".into()),
                (Preposition, "for".into()),
                (NounPhrase, "$40 billion".into()),
            ]
        );
        let split = Sentence::from_tagged("d", 0, "for/IN $/$ 40/CD billion/CD");
        assert_eq!(kinds_and_texts(&split)[1], (NounPhrase, "$ 40 billion".into()));
    }

    #[test]
    fn verb_group_head_skips_auxiliaries() {
        let mut s = Sentence::from_tagged("d", 0, "Bob/NNP has/VBZ formally/RB endorsed/VBN Al/NNP");
        s.tokens[3].lemma = "endorse".into();
        let chunks = chunk_sentence(&s);
        assert_eq!(chunks[1].kind, ChunkKind::VerbGroup);
        assert_eq!(chunks[1].text, "has formally endorsed");
        assert_eq!(chunks[1].head, 3);
    }

    #[test]
    fn trailing_adverb_is_not_in_verb_group() {
        let s = Sentence::from_tagged("d", 0, "left/VBD quickly/RB");
        use ChunkKind::*;
        assert_eq!(kinds_and_texts(&s), vec![(VerbGroup, "left".into()), (Other, "quickly".into())]);
    }

    #[test]
    fn noun_phrase_head_is_rightmost_noun() {
        let s = Sentence::from_tagged("d", 0, "the/DT big/JJ red/JJ fire/NN truck/NN 3/CD");
        let chunks = chunk_sentence(&s);
        assert_eq!(chunks[0].text, "the big red fire truck");
        assert_eq!(chunks[0].head, 4);
        assert_eq!(chunks[1].text, "3");
    }

    #[test]
    fn lone_determiner_is_other() {
        let s = Sentence::from_tagged("d", 0, "that/DT ran/VBD");
        assert_eq!(chunk_sentence(&s)[0].kind, ChunkKind::Other);
    }

    #[test]
    fn normalizes_phrases() {
        let np = |t: &str| {
            make_chunk(&Sentence::from_tagged("d", 0, "x/NN").tokens, ChunkKind::NounPhrase, 0, 0, 0)
                .with_text(t)
        };
        assert_eq!(normalize_phrase(&np("The New Yorker")).unwrap(), "new yorker");
        assert_eq!(normalize_phrase(&np("knife")).unwrap(), "knife");
        assert_eq!(normalize_phrase(&np("a  $40   billion")).unwrap(), "$40 billion");
    }

    #[test]
    fn normalizing_a_non_np_fails() {
        let s = Sentence::from_tagged("d", 0, "ran/VBD");
        let c = &chunk_sentence(&s)[0];
        assert!(matches!(normalize_phrase(c), Err(Error::NotNounPhrase("VG"))));
    }

    impl Chunk {
        fn with_text(mut self, text: &str) -> Self {
            self.text = text.to_string();
            self
        }
    }

    const TAGS: &[&str] = &[
        "NN", "NNS", "NNP", "DT", "JJ", "CD", "$", "POS", "PRP$", "VB", "VBD", "VBZ", "VBN", "MD", "RB",
        "IN", "TO", ",", ".", "CC", "PRP", "RP",
    ];

    fn arb_sentence() -> impl Strategy<Value = Sentence> {
        prop::collection::vec((0..TAGS.len(), "[a-zA-Z]{1,6}"), 1..25).prop_map(|toks| Sentence {
            doc_id: "p".into(),
            sent_index: 0,
            tokens: toks
                .into_iter()
                .enumerate()
                .map(|(i, (t, w))| Token::new(&w, TAGS[t], None, i))
                .collect(),
        })
    }

    proptest! {
        #[test]
        fn chunks_partition_the_sentence(s in arb_sentence()) {
            let chunks = chunk_sentence(&s);
            let mut next = 0;
            for c in &chunks {
                prop_assert_eq!(c.start, next);
                prop_assert!(c.end >= c.start);
                prop_assert!(c.head >= c.start && c.head <= c.end);
                if c.kind == ChunkKind::NounPhrase {
                    let head_pos = &s.tokens[c.head].pos;
                    prop_assert!(is_noun(head_pos) || head_pos == "CD");
                }
                next = c.end + 1;
            }
            prop_assert_eq!(next, s.tokens.len());
            prop_assert_eq!(chunk_sentence(&s), chunks);
        }

        #[test]
        fn normalization_is_idempotent(text in "[ a-zA-Z$0-9]{0,30}") {
            let once = normalize_text(&text);
            prop_assert_eq!(normalize_text(&once), once.clone());
        }

        #[test]
        fn write_then_read_round_trips(
            docs in prop::collection::vec(prop::collection::vec(arb_sentence(), 1..4), 1..4)
        ) {
            let mut sentences = Vec::new();
            for (d, doc) in docs.into_iter().enumerate() {
                for (i, mut s) in doc.into_iter().enumerate() {
                    s.doc_id = format!("doc{d}");
                    s.sent_index = i;
                    sentences.push(s);
                }
            }
            let mut buf = Vec::new();
            write_corpus(&mut buf, &sentences).unwrap();
            let back: Vec<Sentence> = read_corpus(&buf[..]).map(|r| r.unwrap()).collect();
            prop_assert_eq!(back, sentences);
        }
    }
}
