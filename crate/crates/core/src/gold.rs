//! Gold standards and their alignment to `lemma#PoS` entries.
//!
//! Two resources are supported: ANEW-style valence norms (real-valued
//! targets on a 1–9 scale) and General-Inquirer-style `Positiv`/`Negativ`
//! categories (binary labels). Both are header-driven delimiter-separated
//! files.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, Pos};

#[derive(Debug, Error)]
pub enum GoldError {
    #[error("cannot read gold file: {0}")]
    Io(#[from] io::Error),
    #[error("gold file format error: {0}")]
    Format(String),
    #[error("valence {0} outside the 1-9 rating scale")]
    ValenceRange(f64),
    #[error("configuration error: {0}")]
    Config(String),
}

impl From<csv::Error> for GoldError {
    fn from(e: csv::Error) -> Self {
        GoldError::Format(e.to_string())
    }
}

/// Binary polarity label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// Decision-score rule: zero counts as positive.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

/// One ANEW row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnewRecord {
    pub word: String,
    pub valence_mean: f64,
    pub valence_sd: Option<f64>,
    pub valence_mean_male: Option<f64>,
    pub valence_mean_female: Option<f64>,
}

/// Part-of-speech hint carried by a GI row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GiPos {
    Modif,
    Noun,
    Verb,
    Other,
}

impl GiPos {
    fn from_cell(cell: &str) -> GiPos {
        for token in cell.split(|c: char| !c.is_alphanumeric()) {
            match token.to_ascii_lowercase().as_str() {
                "modif" => return GiPos::Modif,
                "noun" => return GiPos::Noun,
                "verb" | "supv" => return GiPos::Verb,
                _ => {}
            }
        }
        GiPos::Other
    }

    /// Lexicon parts of speech this hint may stand for. `None` means any.
    fn candidates(self) -> Option<&'static [Pos]> {
        match self {
            GiPos::Modif => Some(&[Pos::Adjective, Pos::Adverb]),
            GiPos::Noun => Some(&[Pos::Noun]),
            GiPos::Verb => Some(&[Pos::Verb]),
            GiPos::Other => None,
        }
    }
}

/// One GI row carrying exactly one of the two polarity categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiRecord {
    /// Lowercased entry, possibly with a `#n` sense suffix.
    pub entry: String,
    pub label: Label,
    pub gi_pos: GiPos,
}

impl GiRecord {
    pub fn is_sense_suffixed(&self) -> bool {
        self.entry.contains('#')
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subgroup {
    pub pos_class: Pos,
    pub male_target: Option<f64>,
    pub female_target: Option<f64>,
}

/// An aligned gold record for one `lemma#PoS`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldInstance {
    pub lemma: String,
    pub pos: Pos,
    /// Word as it appeared in the gold resource.
    pub source: String,
    pub target_real: Option<f64>,
    pub target_class: Option<Label>,
    pub subgroup: Subgroup,
}

impl GoldInstance {
    pub fn key(&self) -> String {
        format!("{}#{}", self.lemma, self.pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldKind {
    Anew,
    Gi,
}

impl fmt::Display for GoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoldKind::Anew => f.write_str("anew"),
            GoldKind::Gi => f.write_str("gi"),
        }
    }
}

impl FromStr for GoldKind {
    type Err = GoldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "anew" => Ok(GoldKind::Anew),
            "gi" | "inquirer" => Ok(GoldKind::Gi),
            other => Err(GoldError::Config(format!("unknown gold kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GoldRecords {
    Anew(Vec<AnewRecord>),
    Gi(Vec<GiRecord>),
}

impl GoldRecords {
    pub fn kind(&self) -> GoldKind {
        match self {
            GoldRecords::Anew(_) => GoldKind::Anew,
            GoldRecords::Gi(_) => GoldKind::Gi,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GoldRecords::Anew(r) => r.len(),
            GoldRecords::Gi(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row counts from reading a gold file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldParseSummary {
    pub records: usize,
    /// Rows missing a required field or carrying an out-of-range value.
    pub skipped: usize,
    /// GI rows in neither polarity category.
    pub uncategorised: usize,
    /// GI rows in both polarity categories.
    pub inconsistent: usize,
}

fn normalise_header(h: &str) -> String {
    h.chars()
        .filter(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase()
}

fn sniff_delimiter(header_line: &str) -> u8 {
    if header_line.contains('\t') {
        b'\t'
    } else if header_line.contains(',') {
        b','
    } else if header_line.contains(';') {
        b';'
    } else {
        b'\t'
    }
}

/// Reads the whole stream and prepares a header-driven CSV reader.
fn header_reader<R: Read>(mut stream: R) -> Result<(Vec<String>, csv::Reader<io::Cursor<Vec<u8>>>), GoldError> {
    let mut buf = Vec::new();
    stream.read_to_end(&mut buf)?;
    let first = buf
        .split(|b| *b == b'\n')
        .next()
        .map(|l| String::from_utf8_lossy(l).into_owned())
        .unwrap_or_default();
    if first.trim().is_empty() {
        return Err(GoldError::Format("missing header row".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(&first))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(io::Cursor::new(buf));
    let headers = reader
        .headers()?
        .iter()
        .map(normalise_header)
        .collect::<Vec<_>>();
    Ok((headers, reader))
}

fn column(headers: &[String], names: &[&str]) -> Option<usize> {
    names
        .iter()
        .find_map(|n| headers.iter().position(|h| h == n))
}

fn valence_cell(record: &csv::StringRecord, idx: Option<usize>) -> Option<f64> {
    let v: f64 = record.get(idx?)?.parse().ok()?;
    (1.0..=9.0).contains(&v).then_some(v)
}

/// Parses ANEW-style valence norms.
///
/// Required columns: the word (`Word` or `Description`) and the valence mean
/// (`Valence Mean`, `ValMn`, ...). The standard deviation and male/female
/// means are optional.
pub fn parse_anew<R: Read>(stream: R) -> Result<(Vec<AnewRecord>, GoldParseSummary), GoldError> {
    let (headers, mut reader) = header_reader(stream)?;
    let word = column(&headers, &["word", "words", "description"])
        .ok_or_else(|| GoldError::Format("no word column in header".into()))?;
    let mean = column(&headers, &["valencemean", "valmn", "valmean", "valence", "valencemu"])
        .ok_or_else(|| GoldError::Format("no valence mean column in header".into()))?;
    let sd = column(&headers, &["valencesd", "valsd", "valencesigma"]);
    let male = column(
        &headers,
        &["valencemeanmale", "valmnmale", "malevalencemean", "valencemale", "malevalmn", "malevalence"],
    );
    let female = column(
        &headers,
        &[
            "valencemeanfemale",
            "valmnfemale",
            "femalevalencemean",
            "valencefemale",
            "femalevalmn",
            "femalevalence",
        ],
    );

    let mut records = Vec::new();
    let mut summary = GoldParseSummary::default();
    for row in reader.records() {
        let row = row?;
        let w = row.get(word).unwrap_or("").to_lowercase();
        let Some(valence_mean) = valence_cell(&row, Some(mean)) else {
            summary.skipped += 1;
            continue;
        };
        if w.is_empty() {
            summary.skipped += 1;
            continue;
        }
        let valence_sd = sd
            .and_then(|i| row.get(i))
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|v| *v >= 0.0);
        records.push(AnewRecord {
            word: w,
            valence_mean,
            valence_sd,
            valence_mean_male: valence_cell(&row, male),
            valence_mean_female: valence_cell(&row, female),
        });
    }
    summary.records = records.len();
    Ok((records, summary))
}

/// Parses General-Inquirer-style category files.
///
/// A row becomes a record when exactly one of the `Positiv`/`Negativ` cells is
/// non-empty. The part-of-speech hint is read from a `PoS` or `Othtags`
/// column when present.
pub fn parse_gi<R: Read>(stream: R) -> Result<(Vec<GiRecord>, GoldParseSummary), GoldError> {
    let (headers, mut reader) = header_reader(stream)?;
    let entry = column(&headers, &["entry"])
        .ok_or_else(|| GoldError::Format("no Entry column in header".into()))?;
    let positive = column(&headers, &["positiv"])
        .ok_or_else(|| GoldError::Format("no Positiv column in header".into()))?;
    let negative = column(&headers, &["negativ"])
        .ok_or_else(|| GoldError::Format("no Negativ column in header".into()))?;
    let pos_col = column(&headers, &["pos", "othtags", "partofspeech"]);

    let mut records = Vec::new();
    let mut summary = GoldParseSummary::default();
    for row in reader.records() {
        let row = row?;
        let word = row.get(entry).unwrap_or("").to_lowercase();
        if word.is_empty() {
            summary.skipped += 1;
            continue;
        }
        let is_pos = !row.get(positive).unwrap_or("").is_empty();
        let is_neg = !row.get(negative).unwrap_or("").is_empty();
        let label = match (is_pos, is_neg) {
            (true, false) => Label::Positive,
            (false, true) => Label::Negative,
            (false, false) => {
                summary.uncategorised += 1;
                continue;
            }
            (true, true) => {
                log::warn!("GI entry `{word}` is both Positiv and Negativ; rejected");
                summary.inconsistent += 1;
                continue;
            }
        };
        let gi_pos = pos_col
            .and_then(|i| row.get(i))
            .map(GiPos::from_cell)
            .unwrap_or(GiPos::Other);
        records.push(GiRecord {
            entry: word,
            label,
            gi_pos,
        });
    }
    summary.records = records.len();
    Ok((records, summary))
}

/// Maps a 1–9 rating onto `[-1,1]` as `(v - 5) / 4`.
pub fn rescale_valence(v: f64) -> Result<f64, GoldError> {
    if !(1.0..=9.0).contains(&v) {
        return Err(GoldError::ValenceRange(v));
    }
    Ok((v - 5.0) / 4.0)
}

/// Inverse of [`rescale_valence`].
pub fn unscale_valence(x: f64) -> f64 {
    x * 4.0 + 5.0
}

/// Static word → lemma table standing in for a lemmatiser.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaMap(HashMap<String, String>);

impl LemmaMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Two tab-separated columns `word lemma`; `#` comments allowed.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, GoldError> {
        let mut map = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next()) {
                (Some(w), Some(l)) if !w.trim().is_empty() && !l.trim().is_empty() => {
                    map.insert(w.trim().to_lowercase(), l.trim().to_lowercase());
                }
                _ => {
                    return Err(GoldError::Format(format!(
                        "lemma map line {} needs two tab-separated columns",
                        i + 1
                    )))
                }
            }
        }
        Ok(LemmaMap(map))
    }

    pub fn insert(&mut self, word: &str, lemma: &str) {
        self.0.insert(word.to_lowercase(), lemma.to_lowercase());
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.0.get(word).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Counts from [`align`].
///
/// Word level: `input_words = aligned_words + unaligned_words +
/// sense_suffixed_words`. Instance level: `expanded_instances = kept +
/// all_zero_filtered + duplicate_instances`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub kind: GoldKind,
    pub input_words: usize,
    pub sense_suffixed_words: usize,
    pub unaligned_words: usize,
    pub aligned_words: usize,
    /// Aligned through the lemma map rather than directly.
    pub lemmatized_words: usize,
    pub expanded_instances: usize,
    pub duplicate_instances: usize,
    pub all_zero_filtered: usize,
    pub kept: usize,
    pub unaligned: Vec<String>,
    pub all_zero: Vec<String>,
}

struct Candidate<'a> {
    word: &'a str,
    hint: Option<&'static [Pos]>,
    target_real: Option<f64>,
    target_class: Option<Label>,
    male: Option<f64>,
    female: Option<f64>,
}

fn in_both(lemma: &str, swn1: &Lexicon, swn3: &Lexicon) -> bool {
    swn1.contains_lemma(lemma) && swn3.contains_lemma(lemma)
}

fn is_uninformative(lemma: &str, pos: Pos, lex: &Lexicon) -> bool {
    lex.lookup(lemma, pos).is_none_or(|e| e.is_all_zero())
}

/// Aligns gold records to `lemma#PoS` entries present in both lexica.
///
/// A word is kept when it is a lemma of both lexica, or when the lemma map
/// sends it to such a lemma. Kept words expand to one instance per part of
/// speech the lemma has in either lexicon (restricted by the GI hint:
/// `modif` to a/r, `noun` to n, `verb` to v). GI entries with a `#n` sense
/// suffix are dropped, as are instances whose senses are all zero in both
/// lexica. Output order follows input order.
pub fn align(
    records: &GoldRecords,
    swn1: &Lexicon,
    swn3: &Lexicon,
    lemma_map: &LemmaMap,
) -> Result<(Vec<GoldInstance>, AlignmentReport), GoldError> {
    if swn1.is_empty() || swn3.is_empty() {
        return Err(GoldError::Config("alignment needs two non-empty lexica".into()));
    }
    let mut report = AlignmentReport {
        kind: records.kind(),
        input_words: records.len(),
        sense_suffixed_words: 0,
        unaligned_words: 0,
        aligned_words: 0,
        lemmatized_words: 0,
        expanded_instances: 0,
        duplicate_instances: 0,
        all_zero_filtered: 0,
        kept: 0,
        unaligned: Vec::new(),
        all_zero: Vec::new(),
    };

    let candidates: Vec<Candidate> = match records {
        GoldRecords::Anew(rows) => rows
            .iter()
            .map(|r| Candidate {
                word: &r.word,
                hint: None,
                target_real: rescale_valence(r.valence_mean).ok(),
                target_class: None,
                male: r.valence_mean_male.and_then(|v| rescale_valence(v).ok()),
                female: r.valence_mean_female.and_then(|v| rescale_valence(v).ok()),
            })
            .collect(),
        GoldRecords::Gi(rows) => rows
            .iter()
            .filter(|r| {
                if r.is_sense_suffixed() {
                    report.sense_suffixed_words += 1;
                    false
                } else {
                    true
                }
            })
            .map(|r| Candidate {
                word: &r.entry,
                hint: r.gi_pos.candidates(),
                target_real: None,
                target_class: Some(r.label),
                male: None,
                female: None,
            })
            .collect(),
    };

    let mut seen: HashSet<(String, Pos)> = HashSet::new();
    let mut out = Vec::new();
    for c in candidates {
        let word = c.word.to_lowercase();
        let lemma = if in_both(&word, swn1, swn3) {
            word.clone()
        } else if let Some(l) = lemma_map.get(&word).filter(|l| in_both(l, swn1, swn3)) {
            report.lemmatized_words += 1;
            l.to_string()
        } else {
            report.unaligned_words += 1;
            report.unaligned.push(word);
            continue;
        };
        report.aligned_words += 1;

        let available: BTreeSet<Pos> = swn1
            .pos_of(&lemma)
            .into_iter()
            .chain(swn3.pos_of(&lemma))
            .collect();
        for pos in available {
            if c.hint.is_some_and(|h| !h.contains(&pos)) {
                continue;
            }
            report.expanded_instances += 1;
            if !seen.insert((lemma.clone(), pos)) {
                report.duplicate_instances += 1;
                continue;
            }
            if is_uninformative(&lemma, pos, swn1) && is_uninformative(&lemma, pos, swn3) {
                report.all_zero_filtered += 1;
                report.all_zero.push(format!("{lemma}#{pos}"));
                continue;
            }
            out.push(GoldInstance {
                lemma: lemma.clone(),
                pos,
                source: word.clone(),
                target_real: c.target_real,
                target_class: c.target_class,
                subgroup: Subgroup {
                    pos_class: pos,
                    male_target: c.male,
                    female_target: c.female,
                },
            });
        }
    }
    report.kept = out.len();
    Ok((out, report))
}

/// Writes aligned instances as TSV.
pub fn write_instances<W: Write>(mut out: W, instances: &[GoldInstance]) -> io::Result<()> {
    writeln!(out, "lemma\tpos\tsource\ttarget_real\ttarget_class\tmale_target\tfemale_target")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for i in instances {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i.lemma,
            i.pos,
            i.source,
            opt(i.target_real),
            i.target_class.map(|l| i8::from(l).to_string()).unwrap_or_default(),
            opt(i.subgroup.male_target),
            opt(i.subgroup.female_target),
        )?;
    }
    Ok(())
}

/// Reads instances written by [`write_instances`].
pub fn read_instances<R: BufRead>(reader: R) -> Result<Vec<GoldInstance>, GoldError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 7 {
            return Err(GoldError::Format(format!("instance line {} has {} columns", i + 1, f.len())));
        }
        let bad = |what: &str| GoldError::Format(format!("instance line {}: bad {what}", i + 1));
        let num = |s: &str, what: &str| -> Result<Option<f64>, GoldError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(what))
            }
        };
        let pos = Pos::from_tag(f[1]).ok_or_else(|| bad("pos"))?;
        let target_class = if f[4].is_empty() {
            None
        } else {
            let v: i8 = f[4].parse().map_err(|_| bad("label"))?;
            Some(Label::try_from(v).map_err(|_| bad("label"))?)
        };
        out.push(GoldInstance {
            lemma: f[0].to_string(),
            pos,
            source: f[2].to_string(),
            target_real: num(f[3], "target")?,
            target_class,
            subgroup: Subgroup {
                pos_class: pos,
                male_target: num(f[5], "male target")?,
                female_target: num(f[6], "female target")?,
            },
        });
    }
    Ok(out)
}
