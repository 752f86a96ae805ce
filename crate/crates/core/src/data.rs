//! Dataset schema, ingestion and the descriptive analyses (poll types,
//! dominated actions).
//!
//! The canonical CSV layout is
//!
//! ```text
//! dataset,voter_id,round_index,m,u1,...,um,s1,...,sm,vote[,reward_scheme_tag]
//! ```
//!
//! with columns `u*`/`s*` indexed by the voter's preference rank. JSON-lines
//! files carry one object per record with the same field names.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{candidates, Candidate, Poll, Round, Utilities};

/// On-disk dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

impl Format {
    /// Guesses the format from a file extension (`.jsonl`/`.json` vs anything else).
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => Format::JsonLines,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" | "jsonl" | "json-lines" => Ok(Format::JsonLines),
            other => Err(Error::invalid(format!("unknown format '{other}'"))),
        }
    }
}

/// Column layout of an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    /// Candidates indexed by preference rank (the canonical schema).
    #[default]
    Canonical,
    /// Candidates stored by ballot position; rows are re-indexed by
    /// descending utility (stable, so equal utilities keep ballot order).
    BallotOrder,
    /// Twelve-player game rows: instead of `s1..sm` a `tops` column lists the
    /// other players' top choices (preference ranks of this voter, separated by
    /// `;` or spaces). Their counts become the poll.
    Ts16,
}

/// One observed decision.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub dataset: String,
    pub voter_id: String,
    pub round_index: u64,
    pub utilities: Utilities,
    pub poll: Poll,
    pub vote: Candidate,
    pub reward_scheme_tag: Option<String>,
}

impl RoundRecord {
    pub fn m(&self) -> usize {
        self.poll.m()
    }

    pub fn round(&self) -> Round {
        Round {
            utilities: self.utilities.clone(),
            poll: self.poll.clone(),
            vote: Some(self.vote),
        }
    }

    /// `voter#round`, used in diagnostics.
    pub fn identity(&self) -> String {
        format!("{}#{}", self.voter_id, self.round_index)
    }
}

/// A validated collection of records, sorted by voter then round.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    records: Vec<RoundRecord>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, mut records: Vec<RoundRecord>) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyInput)?;
        let m = first.m();
        let mut seen = HashSet::new();
        for r in &records {
            if r.m() != m {
                return Err(Error::Invariant {
                    record: r.identity(),
                    msg: format!("has {} candidates, dataset has {m}", r.m()),
                });
            }
            if !seen.insert((r.voter_id.clone(), r.round_index)) {
                return Err(Error::Invariant {
                    record: r.identity(),
                    msg: "duplicate (voter_id, round_index)".into(),
                });
            }
        }
        records.sort_by(|a, b| {
            a.voter_id
                .cmp(&b.voter_id)
                .then(a.round_index.cmp(&b.round_index))
        });
        Ok(Dataset {
            name: name.into(),
            records,
        })
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn m(&self) -> usize {
        self.records[0].m()
    }

    /// Records grouped by voter id, each group in round order.
    pub fn voters(&self) -> BTreeMap<&str, Vec<&RoundRecord>> {
        let mut out: BTreeMap<&str, Vec<&RoundRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.voter_id.as_str()).or_default().push(r);
        }
        out
    }
}

/// Reads and validates a dataset, failing on the first problem.
pub fn load_dataset<R: Read>(source: R, format: Format) -> Result<Dataset> {
    load_dataset_with(source, format, Layout::Canonical)
}

pub fn load_dataset_with<R: Read>(source: R, format: Format, layout: Layout) -> Result<Dataset> {
    match check_dataset(source, format, layout)? {
        Checked::Valid(ds) => Ok(ds),
        Checked::Invalid(mut problems) => Err(problems.remove(0)),
    }
}

/// Result of a full validation pass.
#[derive(Debug)]
pub enum Checked {
    Valid(Dataset),
    /// Every problem found, in file order.
    Invalid(Vec<Error>),
}

/// Validates every record and collects all problems instead of stopping at the
/// first. Only I/O failures are returned as `Err`.
pub fn check_dataset<R: Read>(source: R, format: Format, layout: Layout) -> Result<Checked> {
    let rows = match format {
        Format::Csv => csv_rows(source)?,
        Format::JsonLines => json_rows(source)?,
    };
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => return Ok(Checked::Invalid(vec![e])),
    };
    if rows.is_empty() {
        return Ok(Checked::Invalid(vec![Error::EmptyInput]));
    }

    let mut problems = Vec::new();
    let mut records = Vec::new();
    for (line, row) in rows {
        match build_record(&row, line, layout) {
            Ok(rec) => records.push((line, rec)),
            Err(e) => problems.push(e),
        }
    }

    // dataset-level invariants, reported per offending record
    let m = records.first().map(|(_, r)| r.m());
    let mut seen = HashMap::new();
    for (line, rec) in &records {
        if Some(rec.m()) != m {
            problems.push(Error::Invariant {
                record: rec.identity(),
                msg: format!("line {line}: {} candidates, dataset has {}", rec.m(), m.unwrap_or(0)),
            });
        }
        if let Some(prev) = seen.insert((rec.voter_id.clone(), rec.round_index), *line) {
            problems.push(Error::Invariant {
                record: rec.identity(),
                msg: format!("line {line}: duplicate of line {prev}"),
            });
        }
    }
    if !problems.is_empty() {
        return Ok(Checked::Invalid(problems));
    }
    let name = records[0].1.dataset.clone();
    Ok(Checked::Valid(Dataset::new(
        name,
        records.into_iter().map(|(_, r)| r).collect(),
    )?))
}

/// Field lookup over one parsed row, independent of the file format.
type Row = BTreeMap<String, String>;

fn csv_rows<R: Read>(source: R) -> Result<std::result::Result<Vec<(u64, Row)>, Error>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return csv_error(e),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Ok(Vec::new()));
    }
    let mut rows = Vec::new();
    for result in reader.records() {
        let rec = match result {
            Ok(r) => r,
            Err(e) => return csv_error(e),
        };
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != headers.len() {
            return Ok(Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", headers.len(), rec.len()),
            }));
        }
        let row: Row = headers
            .iter()
            .zip(rec.iter())
            .map(|(h, v)| (h.to_string(), v.to_string()))
            .collect();
        rows.push((line, row));
    }
    Ok(Ok(rows))
}

fn csv_error<T>(e: csv::Error) -> Result<std::result::Result<T, Error>> {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Err(Error::io("<input>", io)),
        other => Ok(Err(Error::Parse {
            line,
            msg: format!("{other:?}"),
        })),
    }
}

fn json_rows<R: Read>(source: R) -> Result<std::result::Result<Vec<(u64, Row)>, Error>> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i as u64 + 1;
        let text = line.map_err(|e| Error::io("<input>", e))?;
        if text.trim().is_empty() {
            continue;
        }
        let obj: Map<String, Value> = match serde_json::from_str(&text) {
            Ok(o) => o,
            Err(e) => {
                return Ok(Err(Error::Parse {
                    line: line_no,
                    msg: e.to_string(),
                }))
            }
        };
        let row = obj
            .into_iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::String(s) => s,
                    Value::Null => String::new(),
                    other => other.to_string(),
                };
                (k, s)
            })
            .collect();
        rows.push((line_no, row));
    }
    Ok(Ok(rows))
}

fn build_record(row: &Row, line: u64, layout: Layout) -> Result<RoundRecord> {
    let parse_err = |msg: String| Error::Parse { line, msg };
    let field = |name: &str| -> Result<&str> {
        row.get(name)
            .map(String::as_str)
            .ok_or_else(|| parse_err(format!("missing field '{name}'")))
    };
    fn number<T: FromStr>(row_field: &str, name: &str, line: u64) -> Result<T> {
        row_field.parse::<T>().map_err(|_| Error::Parse {
            line,
            msg: format!("field '{name}': cannot parse '{row_field}'"),
        })
    }

    let dataset = field("dataset")?.to_string();
    let voter_id = field("voter_id")?.to_string();
    let round_index: u64 = number(field("round_index")?, "round_index", line)?;
    let identity = format!("{voter_id}#{round_index}");
    let invariant = |msg: String| Error::Invariant {
        record: identity.clone(),
        msg,
    };
    if voter_id.is_empty() {
        return Err(parse_err("empty voter_id".into()));
    }
    let m: usize = number(field("m")?, "m", line)?;
    if m < 2 {
        return Err(invariant(format!("m = {m}, need at least 2 candidates")));
    }
    let mut utilities = Vec::with_capacity(m);
    for i in 1..=m {
        let name = format!("u{i}");
        utilities.push(number::<f64>(field(&name)?, &name, line)?);
    }
    let mut scores: Vec<u64> = match layout {
        Layout::Ts16 => {
            let mut counts = vec![0u64; m];
            for tok in field("tops")?
                .split(|c: char| c == ';' || c.is_whitespace())
                .filter(|t| !t.is_empty())
            {
                let rank: usize = number(tok, "tops", line)?;
                if rank == 0 || rank > m {
                    return Err(invariant(format!("top choice {rank} out of range 1..={m}")));
                }
                counts[rank - 1] += 1;
            }
            counts
        }
        _ => (1..=m)
            .map(|i| {
                let name = format!("s{i}");
                number::<u64>(field(&name)?, &name, line)
            })
            .collect::<Result<_>>()?,
    };
    let vote_rank: usize = number(field("vote")?, "vote", line)?;
    if vote_rank == 0 || vote_rank > m {
        return Err(invariant(format!("vote {vote_rank} out of range 1..={m}")));
    }
    let mut vote_index = vote_rank - 1;

    if layout == Layout::BallotOrder {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| utilities[b].total_cmp(&utilities[a]));
        utilities = order.iter().map(|&i| utilities[i]).collect();
        scores = order.iter().map(|&i| scores[i]).collect();
        vote_index = order.iter().position(|&i| i == vote_index).expect("permutation");
    }

    let utilities = Utilities::new(utilities).map_err(|e| invariant(e.to_string()))?;
    let poll = Poll::new(scores).map_err(|e| invariant(e.to_string()))?;
    let reward_scheme_tag = row
        .get("reward_scheme_tag")
        .filter(|t| !t.is_empty())
        .cloned();
    Ok(RoundRecord {
        dataset,
        voter_id,
        round_index,
        utilities,
        poll,
        vote: Candidate::new(vote_index),
        reward_scheme_tag,
    })
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// Writes the dataset in the canonical CSV schema.
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let m = dataset.m();
    let tagged = dataset.records.iter().any(|r| r.reward_scheme_tag.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["dataset", "voter_id", "round_index", "m"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=m).map(|i| format!("u{i}")));
    header.extend((1..=m).map(|i| format!("s{i}")));
    header.push("vote".into());
    if tagged {
        header.push("reward_scheme_tag".into());
    }
    let to_io = |e: csv::Error| Error::io("<output>", std::io::Error::other(e));
    w.write_record(&header).map_err(to_io)?;
    for r in &dataset.records {
        let mut row = vec![
            r.dataset.clone(),
            r.voter_id.clone(),
            r.round_index.to_string(),
            m.to_string(),
        ];
        row.extend(r.utilities.as_slice().iter().map(|&u| fmt_value(u)));
        row.extend(r.poll.as_slice().iter().map(|s| s.to_string()));
        row.push(r.vote.rank().to_string());
        if tagged {
            row.push(r.reward_scheme_tag.clone().unwrap_or_default());
        }
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Writes the dataset as JSON lines with the canonical field names.
pub fn write_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for r in &dataset.records {
        let mut obj = Map::new();
        obj.insert("dataset".into(), Value::from(r.dataset.clone()));
        obj.insert("voter_id".into(), Value::from(r.voter_id.clone()));
        obj.insert("round_index".into(), Value::from(r.round_index));
        obj.insert("m".into(), Value::from(r.m()));
        for (i, &u) in r.utilities.as_slice().iter().enumerate() {
            obj.insert(format!("u{}", i + 1), Value::from(u));
        }
        for (i, &s) in r.poll.as_slice().iter().enumerate() {
            obj.insert(format!("s{}", i + 1), Value::from(s));
        }
        obj.insert("vote".into(), Value::from(r.vote.rank()));
        if let Some(tag) = &r.reward_scheme_tag {
            obj.insert("reward_scheme_tag".into(), Value::from(tag.clone()));
        }
        // serde_json maps sort their keys; emit schema order instead
        let ordered = ordered_json(&obj, r.m());
        writeln!(out, "{ordered}").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

fn ordered_json(obj: &Map<String, Value>, m: usize) -> String {
    let mut keys: Vec<String> = ["dataset", "voter_id", "round_index", "m"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    keys.extend((1..=m).map(|i| format!("u{i}")));
    keys.extend((1..=m).map(|i| format!("s{i}")));
    keys.push("vote".into());
    keys.push("reward_scheme_tag".into());
    let parts: Vec<String> = keys
        .iter()
        .filter_map(|k| obj.get(k).map(|v| format!("{}:{}", Value::from(k.as_str()), v)))
        .collect();
    format!("{{{}}}", parts.join(","))
}

pub fn write_dataset<W: Write>(dataset: &Dataset, out: W, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(dataset, out),
        Format::JsonLines => write_jsonl(dataset, out),
    }
}

/// Strict ordering of `(q1, q2, q3)` by poll score, most popular first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PollType {
    #[serde(rename = "Q1_Q2_Q3")]
    Q1Q2Q3,
    #[serde(rename = "Q1_Q3_Q2")]
    Q1Q3Q2,
    #[serde(rename = "Q2_Q1_Q3")]
    Q2Q1Q3,
    #[serde(rename = "Q3_Q1_Q2")]
    Q3Q1Q2,
    #[serde(rename = "Q2_Q3_Q1")]
    Q2Q3Q1,
    #[serde(rename = "Q3_Q2_Q1")]
    Q3Q2Q1,
}

impl PollType {
    /// Reporting order, from the easiest polls to the fully reversed one.
    pub const TABLE_ORDER: [PollType; 6] = [
        PollType::Q1Q2Q3,
        PollType::Q1Q3Q2,
        PollType::Q2Q1Q3,
        PollType::Q3Q1Q2,
        PollType::Q2Q3Q1,
        PollType::Q3Q2Q1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PollType::Q1Q2Q3 => "Q1_Q2_Q3",
            PollType::Q1Q3Q2 => "Q1_Q3_Q2",
            PollType::Q2Q1Q3 => "Q2_Q1_Q3",
            PollType::Q3Q1Q2 => "Q3_Q1_Q2",
            PollType::Q2Q3Q1 => "Q2_Q3_Q1",
            PollType::Q3Q2Q1 => "Q3_Q2_Q1",
        }
    }
}

impl fmt::Display for PollType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Poll type of a three-candidate poll; equal scores rank the lower index higher.
pub fn classify_poll_type(s: &Poll) -> Result<PollType> {
    if s.m() != 3 {
        return Err(Error::Unsupported(format!(
            "poll types are defined for 3 candidates, got {}",
            s.m()
        )));
    }
    let order: Vec<usize> = s.ranking().iter().map(|c| c.rank()).collect();
    Ok(match order.as_slice() {
        [1, 2, 3] => PollType::Q1Q2Q3,
        [1, 3, 2] => PollType::Q1Q3Q2,
        [2, 1, 3] => PollType::Q2Q1Q3,
        [3, 1, 2] => PollType::Q3Q1Q2,
        [2, 3, 1] => PollType::Q2Q3Q1,
        [3, 2, 1] => PollType::Q3Q2Q1,
        _ => unreachable!("ranking is a permutation"),
    })
}

/// True when some candidate has both a strictly higher poll score and a
/// strictly higher utility than `vote`.
pub fn is_dominated_action(u: &Utilities, s: &Poll, vote: Candidate) -> bool {
    candidates(s.m()).any(|c| s.score(c) > s.score(vote) && u.of(c) > u.of(vote))
}

/// Number of dominated votes per voter (zero counts included).
pub fn dominated_counts(dataset: &Dataset) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in dataset.records() {
        let n = out.entry(r.voter_id.clone()).or_insert(0);
        if is_dominated_action(&r.utilities, &r.poll, r.vote) {
            *n += 1;
        }
    }
    out
}

/// Opens `path` and loads it, guessing the format from the extension.
pub fn load_path(path: &Path, layout: Layout) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_dataset_with(file, Format::from_path(path), layout)
}
