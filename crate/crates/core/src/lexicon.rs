//! SentiWordNet-format lexicon parsing.
//!
//! A data line carries one synset: its part of speech, an offset, the positive
//! and negative scores and the member terms as `lemma#sense` tokens. Every
//! member inherits the synset scores verbatim. Senses of a `lemma#PoS` are kept
//! in sense-number order, which is also frequency order (sense 1 is the most
//! frequent).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon: {0}")]
    Io(#[from] io::Error),
    #[error("lexicon contains no valid data lines ({skipped} malformed)")]
    Empty { skipped: usize },
    #[error("unknown lexicon version `{0}` (expected swn1 or swn3)")]
    UnknownVersion(String),
    #[error("unknown part of speech `{0}`")]
    UnknownPos(String),
}

/// Part of speech as used by WordNet-style lexica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pos {
    #[serde(rename = "a")]
    Adjective,
    #[serde(rename = "n")]
    Noun,
    #[serde(rename = "v")]
    Verb,
    #[serde(rename = "r")]
    Adverb,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Adjective, Pos::Noun, Pos::Verb, Pos::Adverb];

    pub fn tag(self) -> char {
        match self {
            Pos::Adjective => 'a',
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adverb => 'r',
        }
    }

    /// Parses a one-letter tag. Satellite adjectives (`s`) fold into `a`.
    pub fn from_tag(tag: &str) -> Option<Pos> {
        match tag.trim() {
            "a" | "A" | "s" | "S" => Some(Pos::Adjective),
            "n" | "N" => Some(Pos::Noun),
            "v" | "V" => Some(Pos::Verb),
            "r" | "R" => Some(Pos::Adverb),
            _ => None,
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl FromStr for Pos {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pos::from_tag(s).ok_or_else(|| LexiconError::UnknownPos(s.to_string()))
    }
}

/// Release of the lexicon a file was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwnVersion {
    Swn1,
    Swn3,
}

impl fmt::Display for SwnVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SwnVersion::Swn1 => write!(f, "swn1"),
            SwnVersion::Swn3 => write!(f, "swn3"),
        }
    }
}

impl FromStr for SwnVersion {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "swn1" | "1" | "1.0" | "v1" => Ok(SwnVersion::Swn1),
            "swn3" | "3" | "3.0" | "v3" => Ok(SwnVersion::Swn3),
            other => Err(LexiconError::UnknownVersion(other.to_string())),
        }
    }
}

/// Posterior polarity of one sense.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SenseEntry {
    pub pos_score: f64,
    pub neg_score: f64,
    pub sense_number: u32,
}

/// A lemma with one part of speech and its senses, most frequent first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaPosEntry {
    pub lemma: String,
    pub pos: Pos,
    pub senses: Vec<SenseEntry>,
}

impl LemmaPosEntry {
    /// Positive and negative score lists in sense-number order.
    pub fn sense_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        self.senses.iter().map(|s| (s.pos_score, s.neg_score)).unzip()
    }

    /// True when every sense scores zero on both sides.
    pub fn is_all_zero(&self) -> bool {
        self.senses
            .iter()
            .all(|s| s.pos_score == 0.0 && s.neg_score == 0.0)
    }

    /// `lemma#p`, the key format used in exports.
    pub fn key(&self) -> String {
        format!("{}#{}", self.lemma, self.pos)
    }
}

/// One rejected data line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

/// Outcome of [`parse_swn`]. `accepted + skipped` equals the number of data
/// lines (comment, blank and header lines excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub version: SwnVersion,
    pub accepted: usize,
    pub skipped: usize,
    pub conflicts: usize,
    pub malformed: Vec<MalformedLine>,
}

/// Immutable lemma#PoS index.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    version: SwnVersion,
    entries: BTreeMap<(String, Pos), LemmaPosEntry>,
}

#[derive(Debug, Clone, Copy)]
struct Columns {
    pos: usize,
    id: usize,
    pos_score: usize,
    neg_score: usize,
    terms: usize,
}

impl Columns {
    const FIXED: Columns = Columns {
        pos: 0,
        id: 1,
        pos_score: 2,
        neg_score: 3,
        terms: 4,
    };

    fn required_width(&self) -> usize {
        [self.pos, self.id, self.pos_score, self.neg_score, self.terms]
            .into_iter()
            .max()
            .unwrap_or(0)
            + 1
    }

    /// Recognises a header row by its column names.
    fn from_header(fields: &[&str]) -> Option<Columns> {
        let find = |names: &[&str]| {
            fields.iter().position(|f| {
                let f = f.trim().to_ascii_lowercase();
                names.iter().any(|n| f == *n)
            })
        };
        Some(Columns {
            pos: find(&["pos", "postag"])?,
            id: find(&["id", "offset", "synsetid"]).unwrap_or(1),
            pos_score: find(&["posscore"])?,
            neg_score: find(&["negscore"])?,
            terms: find(&["synsetterms", "terms"])?,
        })
    }
}

fn parse_score(field: &str) -> Result<f64, String> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| format!("score `{}` is not a number", field.trim()))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("score {v} outside [0,1]"));
    }
    Ok(v)
}

/// Splits `lemma#sense` (or the older `lemma#pos#sense`) into its parts.
fn parse_term(token: &str) -> Result<(String, u32), String> {
    let (head, sense) = token
        .rsplit_once('#')
        .ok_or_else(|| format!("term `{token}` has no sense number"))?;
    let sense: u32 = sense
        .parse()
        .map_err(|_| format!("term `{token}` has a non-numeric sense number"))?;
    if sense == 0 {
        return Err(format!("term `{token}` has sense number 0"));
    }
    let lemma = match head.rsplit_once('#') {
        Some((lemma, tag)) if Pos::from_tag(tag).is_some() => lemma,
        _ => head,
    };
    if lemma.is_empty() {
        return Err(format!("term `{token}` has an empty lemma"));
    }
    Ok((lemma.to_lowercase(), sense))
}

struct SynsetLine {
    pos: Pos,
    pos_score: f64,
    neg_score: f64,
    terms: Vec<(String, u32)>,
}

fn parse_data_line(fields: &[&str], cols: &Columns) -> Result<SynsetLine, String> {
    if fields.len() < cols.required_width() {
        return Err(format!(
            "expected at least {} columns, found {}",
            cols.required_width(),
            fields.len()
        ));
    }
    let pos = Pos::from_tag(fields[cols.pos])
        .ok_or_else(|| format!("unknown part of speech `{}`", fields[cols.pos].trim()))?;
    let pos_score = parse_score(fields[cols.pos_score])?;
    let neg_score = parse_score(fields[cols.neg_score])?;

    let mut terms: Vec<(String, u32)> = Vec::new();
    for token in fields[cols.terms].split_whitespace() {
        let (lemma, sense) = parse_term(token)?;
        if terms.iter().any(|(l, _)| *l == lemma) {
            return Err(format!("lemma `{lemma}` appears more than once in one synset"));
        }
        terms.push((lemma, sense));
    }
    if terms.is_empty() {
        return Err("no synset terms".to_string());
    }
    Ok(SynsetLine {
        pos,
        pos_score,
        neg_score,
        terms,
    })
}

/// Parses a SentiWordNet TSV stream.
///
/// Columns are located from a header row when one is present (either a
/// `#`-prefixed comment naming `PosScore`, `NegScore` and `SynsetTerms`, or a
/// plain first data row doing so); otherwise the fixed order
/// `PoS, ID, PosScore, NegScore, SynsetTerms[, Gloss]` is assumed. Malformed
/// lines are skipped and recorded in the summary. A `(lemma, pos, sense)`
/// triple seen twice keeps its first occurrence and counts a conflict.
pub fn parse_swn<R: BufRead>(
    reader: R,
    version: SwnVersion,
) -> Result<(Lexicon, ParseSummary), LexiconError> {
    let mut cols = Columns::FIXED;
    let mut seen_data = false;
    let mut senses: HashMap<(String, Pos), BTreeMap<u32, SenseEntry>> = HashMap::new();
    let mut summary = ParseSummary {
        version,
        accepted: 0,
        skipped: 0,
        conflicts: 0,
        malformed: Vec::new(),
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.trim_start().strip_prefix('#') {
            let fields: Vec<&str> = comment.split('\t').collect();
            if let Some(c) = Columns::from_header(&fields) {
                cols = c;
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if !seen_data {
            seen_data = true;
            if let Some(c) = Columns::from_header(&fields) {
                cols = c;
                continue;
            }
        }
        match parse_data_line(&fields, &cols) {
            Ok(synset) => {
                summary.accepted += 1;
                for (lemma, sense_number) in synset.terms {
                    let slot = senses.entry((lemma, synset.pos)).or_default();
                    if slot.contains_key(&sense_number) {
                        summary.conflicts += 1;
                        continue;
                    }
                    slot.insert(
                        sense_number,
                        SenseEntry {
                            pos_score: synset.pos_score,
                            neg_score: synset.neg_score,
                            sense_number,
                        },
                    );
                }
            }
            Err(reason) => {
                log::debug!("lexicon line {line_no} skipped: {reason}");
                summary.skipped += 1;
                summary.malformed.push(MalformedLine {
                    line: line_no,
                    reason,
                });
            }
        }
    }

    if summary.accepted == 0 {
        return Err(LexiconError::Empty {
            skipped: summary.skipped,
        });
    }

    let entries = senses
        .into_iter()
        .map(|((lemma, pos), by_sense)| {
            let entry = LemmaPosEntry {
                lemma: lemma.clone(),
                pos,
                senses: by_sense.into_values().collect(),
            };
            ((lemma, pos), entry)
        })
        .collect();
    Ok((Lexicon { version, entries }, summary))
}

impl Lexicon {
    /// Opens and parses a lexicon file.
    pub fn from_path(
        path: impl AsRef<Path>,
        version: SwnVersion,
    ) -> Result<(Lexicon, ParseSummary), LexiconError> {
        let file = File::open(path)?;
        parse_swn(BufReader::new(file), version)
    }

    /// Builds a lexicon directly from entries. Senses are sorted by number.
    pub fn from_entries(version: SwnVersion, entries: impl IntoIterator<Item = LemmaPosEntry>) -> Self {
        let entries = entries
            .into_iter()
            .map(|mut e| {
                e.lemma = e.lemma.to_lowercase();
                e.senses.sort_by_key(|s| s.sense_number);
                ((e.lemma.clone(), e.pos), e)
            })
            .collect();
        Lexicon { version, entries }
    }

    pub fn version(&self) -> SwnVersion {
        self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case-insensitive lookup; never fails on a miss.
    pub fn lookup(&self, lemma: &str, pos: Pos) -> Option<&LemmaPosEntry> {
        self.entries.get(&(lemma.to_lowercase(), pos))
    }

    /// Parts of speech under which `lemma` is present.
    pub fn pos_of(&self, lemma: &str) -> Vec<Pos> {
        let lemma = lemma.to_lowercase();
        Pos::ALL
            .into_iter()
            .filter(|p| self.entries.contains_key(&(lemma.clone(), *p)))
            .collect()
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        !self.pos_of(lemma).is_empty()
    }

    /// Entries in `(lemma, pos)` order.
    pub fn entries(&self) -> impl Iterator<Item = &LemmaPosEntry> {
        self.entries.values()
    }

    /// Writes one data line per sense in the fixed column order. Parsing the
    /// output yields an equal lexicon.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss")?;
        for (id, (entry, sense)) in self
            .entries
            .values()
            .flat_map(|e| e.senses.iter().map(move |s| (e, s)))
            .enumerate()
        {
            writeln!(
                out,
                "{}\t{:08}\t{}\t{}\t{}#{}\t",
                entry.pos, id, sense.pos_score, sense.neg_score, entry.lemma, sense.sense_number
            )?;
        }
        Ok(())
    }
}
