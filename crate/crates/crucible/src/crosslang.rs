//! Cross-language corpora: serialize generated inputs with per-input
//! generation times, and replay them against a staged mutant with
//! execution-time-only measurement.
//!
//! Values cross the language boundary as S-expressions in a canonical
//! encoding: trees are `E` or `(T <left> <key> <value> <right>)`, colored
//! trees add a color atom after `T`, integers are decimal atoms, and a
//! property's input tuple is a flat list. The corpus container is JSON
//! Lines so per-input times stay parseable without the value grammar: a
//! header line identifies the format version and the (workload, property,
//! strategy, seed) that produced the corpus, then one
//! `{"gen_time_s": <t>, "value": "<sexpr>"}` object per input.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::trial::{TrialResult, TrialStatus};
use crate::workloads::rbt::{Color, Ctree};
use crate::workloads::tree::Tree;
use crate::workloads::{self, Kind, Semantics, Value, Verdict};

// ---------------------------------------------------------------------------
// S-expressions

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(s: impl Into<String>) -> SExpr {
        SExpr::Atom(s.into())
    }
}

fn atom_needs_quoting(s: &str) -> bool {
    s.is_empty()
        || s.chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | '\\'))
}

impl std::fmt::Display for SExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SExpr::Atom(s) => {
                if atom_needs_quoting(s) {
                    write!(f, "\"")?;
                    for c in s.chars() {
                        match c {
                            '"' => write!(f, "\\\"")?,
                            '\\' => write!(f, "\\\\")?,
                            '\n' => write!(f, "\\n")?,
                            c => write!(f, "{c}")?,
                        }
                    }
                    write!(f, "\"")
                } else {
                    write!(f, "{s}")
                }
            }
            SExpr::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SexprError {
    #[error("unbalanced parentheses at byte {0}")]
    UnbalancedParens(usize),
    #[error("empty input")]
    EmptyInput,
    #[error("bad escape `\\{1}` at byte {0}")]
    BadEscape(usize, char),
    #[error("unterminated string starting at byte {0}")]
    UnterminatedString(usize),
    #[error("trailing garbage at byte {0}")]
    TrailingGarbage(usize),
}

/// Parse one S-expression; trailing non-whitespace is rejected.
pub fn parse_sexpr(text: &str) -> Result<SExpr, SexprError> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    skip_ws(bytes, &mut pos);
    if pos == bytes.len() {
        return Err(SexprError::EmptyInput);
    }
    let expr = parse_at(text, &mut pos)?;
    skip_ws(bytes, &mut pos);
    if pos != bytes.len() {
        return Err(SexprError::TrailingGarbage(pos));
    }
    Ok(expr)
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_at(text: &str, pos: &mut usize) -> Result<SExpr, SexprError> {
    let bytes = text.as_bytes();
    match bytes[*pos] {
        b'(' => {
            let open = *pos;
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(bytes, pos);
                if *pos >= bytes.len() {
                    return Err(SexprError::UnbalancedParens(open));
                }
                if bytes[*pos] == b')' {
                    *pos += 1;
                    return Ok(SExpr::List(items));
                }
                items.push(parse_at(text, pos)?);
            }
        }
        b')' => Err(SexprError::UnbalancedParens(*pos)),
        b'"' => {
            let open = *pos;
            *pos += 1;
            let mut out = String::new();
            loop {
                if *pos >= bytes.len() {
                    return Err(SexprError::UnterminatedString(open));
                }
                match bytes[*pos] {
                    b'"' => {
                        *pos += 1;
                        return Ok(SExpr::Atom(out));
                    }
                    b'\\' => {
                        *pos += 1;
                        if *pos >= bytes.len() {
                            return Err(SexprError::UnterminatedString(open));
                        }
                        match bytes[*pos] {
                            b'"' => out.push('"'),
                            b'\\' => out.push('\\'),
                            b'n' => out.push('\n'),
                            other => {
                                return Err(SexprError::BadEscape(*pos, other as char));
                            }
                        }
                        *pos += 1;
                    }
                    _ => {
                        let c = text[*pos..].chars().next().expect("in bounds");
                        out.push(c);
                        *pos += c.len_utf8();
                    }
                }
            }
        }
        _ => {
            let start = *pos;
            while *pos < bytes.len()
                && !bytes[*pos].is_ascii_whitespace()
                && bytes[*pos] != b'('
                && bytes[*pos] != b')'
                && bytes[*pos] != b'"'
            {
                *pos += 1;
            }
            Ok(SExpr::Atom(text[start..*pos].to_string()))
        }
    }
}

// ---------------------------------------------------------------------------
// canonical value encoding

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("expected {expected}, found `{found}`")]
    Shape { expected: String, found: String },
    #[error("input tuple has {got} elements, signature expects {expected}")]
    Arity { expected: usize, got: usize },
}

pub fn encode_value(value: &Value) -> SExpr {
    match value {
        Value::Int(n) => SExpr::atom(n.to_string()),
        Value::Tree(t) => encode_tree(t),
        Value::Ctree(t) => encode_ctree(t),
    }
}

fn encode_tree(t: &Tree) -> SExpr {
    match t {
        Tree::Leaf => SExpr::atom("E"),
        Tree::Node(l, k, v, r) => SExpr::List(vec![
            SExpr::atom("T"),
            encode_tree(l),
            SExpr::atom(k.to_string()),
            SExpr::atom(v.to_string()),
            encode_tree(r),
        ]),
    }
}

fn encode_ctree(t: &Ctree) -> SExpr {
    match t {
        Ctree::Leaf => SExpr::atom("E"),
        Ctree::Node(c, l, k, v, r) => SExpr::List(vec![
            SExpr::atom("T"),
            SExpr::atom(match c {
                Color::Red => "R",
                Color::Black => "B",
            }),
            encode_ctree(l),
            SExpr::atom(k.to_string()),
            SExpr::atom(v.to_string()),
            encode_ctree(r),
        ]),
    }
}

/// A property's input tuple as one S-expression list.
pub fn encode_inputs(inputs: &[Value]) -> SExpr {
    SExpr::List(inputs.iter().map(encode_value).collect())
}

/// Canonical text for a property input tuple, used both for corpus entries
/// and counterexample reporting.
pub fn serialize_inputs(inputs: &[Value]) -> String {
    encode_inputs(inputs).to_string()
}

fn decode_int(expr: &SExpr) -> Result<i64, CodecError> {
    match expr {
        SExpr::Atom(s) => s.parse().map_err(|_| CodecError::Shape {
            expected: "integer atom".into(),
            found: s.clone(),
        }),
        SExpr::List(_) => Err(CodecError::Shape {
            expected: "integer atom".into(),
            found: expr.to_string(),
        }),
    }
}

fn decode_tree(expr: &SExpr) -> Result<Tree, CodecError> {
    match expr {
        SExpr::Atom(s) if s == "E" => Ok(Tree::Leaf),
        SExpr::List(items) => match items.as_slice() {
            [SExpr::Atom(t), l, k, v, r] if t == "T" => Ok(Tree::node(
                decode_tree(l)?,
                decode_int(k)?,
                decode_int(v)?,
                decode_tree(r)?,
            )),
            _ => Err(CodecError::Shape {
                expected: "`E` or `(T left key value right)`".into(),
                found: expr.to_string(),
            }),
        },
        SExpr::Atom(s) => Err(CodecError::Shape {
            expected: "`E` or `(T left key value right)`".into(),
            found: s.clone(),
        }),
    }
}

fn decode_ctree(expr: &SExpr) -> Result<Ctree, CodecError> {
    match expr {
        SExpr::Atom(s) if s == "E" => Ok(Ctree::Leaf),
        SExpr::List(items) => match items.as_slice() {
            [SExpr::Atom(t), SExpr::Atom(c), l, k, v, r] if t == "T" => {
                let color = match c.as_str() {
                    "R" => Color::Red,
                    "B" => Color::Black,
                    other => {
                        return Err(CodecError::Shape {
                            expected: "color atom `R` or `B`".into(),
                            found: other.to_string(),
                        })
                    }
                };
                Ok(Ctree::node(
                    color,
                    decode_ctree(l)?,
                    decode_int(k)?,
                    decode_int(v)?,
                    decode_ctree(r)?,
                ))
            }
            _ => Err(CodecError::Shape {
                expected: "`E` or `(T color left key value right)`".into(),
                found: expr.to_string(),
            }),
        },
        SExpr::Atom(s) => Err(CodecError::Shape {
            expected: "`E` or `(T color left key value right)`".into(),
            found: s.clone(),
        }),
    }
}

pub fn decode_value(expr: &SExpr, kind: Kind) -> Result<Value, CodecError> {
    Ok(match kind {
        Kind::Key | Kind::Val => Value::Int(decode_int(expr)?),
        Kind::Tree => Value::Tree(decode_tree(expr)?),
        Kind::Ctree => Value::Ctree(decode_ctree(expr)?),
    })
}

pub fn decode_inputs(expr: &SExpr, signature: &[Kind]) -> Result<Vec<Value>, CodecError> {
    let SExpr::List(items) = expr else {
        return Err(CodecError::Shape {
            expected: "input tuple list".into(),
            found: expr.to_string(),
        });
    };
    if items.len() != signature.len() {
        return Err(CodecError::Arity {
            expected: signature.len(),
            got: items.len(),
        });
    }
    items
        .iter()
        .zip(signature)
        .map(|(item, kind)| decode_value(item, *kind))
        .collect()
}

// ---------------------------------------------------------------------------
// corpus files

pub const CORPUS_FORMAT: &str = "crucible-corpus";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusHeader {
    pub format: String,
    pub version: u32,
    pub workload: String,
    pub property: String,
    pub strategy: String,
    pub seed: u64,
    pub size: u64,
}

impl CorpusHeader {
    pub fn new(workload: &str, property: &str, strategy: &str, seed: u64, size: u64) -> Self {
        CorpusHeader {
            format: CORPUS_FORMAT.into(),
            version: CORPUS_VERSION,
            workload: workload.into(),
            property: property.into(),
            strategy: strategy.into(),
            seed,
            size,
        }
    }
}

/// One serialized input with the time it took to generate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub gen_time_s: f64,
    pub value: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CrosslangError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("corpus line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("corpus line {line}: {source}")]
    Sexpr {
        line: usize,
        #[source]
        source: SexprError,
    },
    #[error("corpus line {line}: signature mismatch: {source}")]
    Signature {
        line: usize,
        #[source]
        source: CodecError,
    },
    #[error(transparent)]
    Workload(#[from] workloads::WorkloadError),
}

/// Streaming corpus writer; entries never need to fit in memory.
pub struct CorpusWriter<W: Write> {
    out: W,
}

impl CorpusWriter<std::io::BufWriter<std::fs::File>> {
    pub fn create(path: &Path, header: &CorpusHeader) -> Result<Self, CrosslangError> {
        let file = std::fs::File::create(path)?;
        let mut writer = CorpusWriter {
            out: std::io::BufWriter::new(file),
        };
        writer.write_line(&serde_json::to_string(header).expect("header serializes"))?;
        Ok(writer)
    }
}

impl<W: Write> CorpusWriter<W> {
    fn write_line(&mut self, line: &str) -> Result<(), CrosslangError> {
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn append(&mut self, entry: &CorpusEntry) -> Result<(), CrosslangError> {
        self.write_line(&serde_json::to_string(entry).expect("entry serializes"))
    }

    pub fn finish(mut self) -> Result<(), CrosslangError> {
        self.out.flush()?;
        Ok(())
    }
}

/// Read a corpus header plus a streaming entry iterator.
pub fn open_corpus(
    path: &Path,
) -> Result<
    (
        CorpusHeader,
        impl Iterator<Item = Result<CorpusEntry, CrosslangError>>,
    ),
    CrosslangError,
> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header_line = lines.next().ok_or(CrosslangError::Format {
        line: 1,
        message: "missing corpus header".into(),
    })??;
    let header: CorpusHeader =
        serde_json::from_str(&header_line).map_err(|e| CrosslangError::Format {
            line: 1,
            message: format!("bad header: {e}"),
        })?;
    if header.format != CORPUS_FORMAT || header.version != CORPUS_VERSION {
        return Err(CrosslangError::Format {
            line: 1,
            message: format!(
                "unsupported corpus format {}/{} (expected {}/{})",
                header.format, header.version, CORPUS_FORMAT, CORPUS_VERSION
            ),
        });
    }
    let entries = lines.enumerate().map(|(i, line)| {
        let line_no = i + 2;
        let text = line.map_err(CrosslangError::Io)?;
        serde_json::from_str::<CorpusEntry>(&text).map_err(|e| CrosslangError::Format {
            line: line_no,
            message: format!("bad entry: {e}"),
        })
    });
    Ok((header, entries))
}

/// Replay outcome: the protocol-level result plus the per-input verdict
/// sequence for equivalence checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayResult {
    pub result: TrialResult,
    pub verdicts: Vec<Verdict>,
}

/// Replay a corpus against a property under `sem`. Entries are evaluated in
/// order: the first failing input stops the run with status `found`;
/// entries failing the precondition count as discards; an exhausted corpus
/// gives up. `gen_time_s` sums the consumed entries' recorded times,
/// `exec_time_s` measures property evaluation only, and the reported time
/// is exactly their sum. Replay stops with `gave_up` once that synthetic
/// time exceeds `timeout_s`.
pub fn corpus_run(
    corpus_path: &Path,
    workload: &str,
    property: &str,
    sem: &Semantics,
    timeout_s: f64,
) -> Result<ReplayResult, CrosslangError> {
    let (header, entries) = open_corpus(corpus_path)?;
    if header.workload != workload || header.property != property {
        return Err(CrosslangError::Format {
            line: 1,
            message: format!(
                "corpus is for {}/{}, not {workload}/{property}",
                header.workload, header.property
            ),
        });
    }
    let signature = workloads::property_signature(property)?;

    let mut verdicts = Vec::new();
    let mut tests = 0u64;
    let mut discards = 0u64;
    let mut gen_time_s = 0.0f64;
    let mut exec_time_s = 0.0f64;
    let mut status = TrialStatus::GaveUp;
    let mut counterexample = None;

    for (i, entry) in entries.enumerate() {
        let line = i + 2;
        let entry = entry?;
        let expr = parse_sexpr(&entry.value)
            .map_err(|source| CrosslangError::Sexpr { line, source })?;
        let inputs = decode_inputs(&expr, signature)
            .map_err(|source| CrosslangError::Signature { line, source })?;

        gen_time_s += entry.gen_time_s;
        let start = std::time::Instant::now();
        let verdict = workloads::evaluate_property(property, &inputs, sem)?;
        exec_time_s += start.elapsed().as_secs_f64();
        verdicts.push(verdict);

        match verdict {
            Verdict::Pass => tests += 1,
            Verdict::Discard => discards += 1,
            Verdict::Fail => {
                tests += 1;
                status = TrialStatus::Found;
                counterexample = Some(entry.value.clone());
                break;
            }
        }
        if gen_time_s + exec_time_s > timeout_s {
            break;
        }
    }

    Ok(ReplayResult {
        result: TrialResult {
            status,
            // additivity by construction
            time_s: gen_time_s + exec_time_s,
            tests,
            discards,
            counterexample,
            gen_time_s: Some(gen_time_s),
            exec_time_s: Some(exec_time_s),
            error: None,
        },
        verdicts,
    })
}
