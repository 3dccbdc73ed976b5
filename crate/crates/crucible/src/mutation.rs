//! Parse, enumerate, and toggle mutants embedded in source files.
//!
//! A *variation* is a region of source holding one base implementation and
//! one or more named buggy alternatives (*mutants*), delimited by marker
//! comments. With comment delimiters `{- -}` and marker `!`:
//!
//! ```text
//! {-! -}                      variation opener
//! <base implementation>
//! {-!! mutant_name -}         mutant header
//! {-!
//! <mutant body>
//! -}
//! {- !-}                      variation closer
//! ```
//!
//! Exactly one alternative per variation is *active* (outside comment
//! delimiters); toggling wraps the active alternative in a marker comment
//! and unwraps the selected one. Delimiters are recognized only when a
//! whole line is a delimiter sequence, so marker-like text inside string
//! literals or expressions is ignored; no language-aware lexing happens.
//!
//! Rendering a parse back with its as-found selection reproduces the input
//! byte-exactly. Toggled variations are re-rendered in canonical layout
//! (delimiters on their own lines at the variation's indentation), which is
//! the fixed point of the renderer: toggling a mutant on and back off
//! restores a canonical file byte-exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Comment delimiters and the mutation marker for one source language.
///
/// `end == "\n"` denotes a line-comment style: the comment extends to the
/// end of the line and multi-line bodies are runs of marker-prefixed lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentStyle {
    pub begin: String,
    pub end: String,
    #[serde(default = "default_marker")]
    pub marker: String,
}

fn default_marker() -> String {
    "!".to_string()
}

impl CommentStyle {
    pub fn new(begin: &str, end: &str) -> Self {
        CommentStyle {
            begin: begin.to_string(),
            end: end.to_string(),
            marker: default_marker(),
        }
    }

    pub fn is_line_style(&self) -> bool {
        self.end == "\n"
    }

    /// Check the style invariants: non-empty fields, `begin != end`, and a
    /// whitespace-free marker.
    pub fn validate(&self) -> Result<(), String> {
        if self.begin.is_empty() {
            return Err("comment begin delimiter is empty".into());
        }
        if self.end.is_empty() {
            return Err("comment end delimiter is empty".into());
        }
        if self.marker.is_empty() {
            return Err("marker is empty".into());
        }
        if self.begin == self.end {
            return Err("begin and end delimiters are equal".into());
        }
        if self.marker.chars().any(char::is_whitespace) {
            return Err("marker contains whitespace".into());
        }
        Ok(())
    }
}

/// Default comment styles keyed by file extension.
pub fn default_styles() -> BTreeMap<String, CommentStyle> {
    let mut map = BTreeMap::new();
    for ext in ["impl", "hs", "lhs"] {
        map.insert(ext.to_string(), CommentStyle::new("{-", "-}"));
    }
    for ext in ["ml", "mli", "v"] {
        map.insert(ext.to_string(), CommentStyle::new("(*", "*)"));
    }
    for ext in ["c", "h", "cc", "cpp", "hpp", "java", "js", "ts", "rs", "go"] {
        map.insert(ext.to_string(), CommentStyle::new("/*", "*/"));
    }
    for ext in ["py", "sh", "rb"] {
        map.insert(ext.to_string(), CommentStyle::new("#", "\n"));
    }
    map
}

/// A named buggy alternative inside a variation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub name: String,
    pub body: String,
}

/// Which alternative of a variation is (or should be) active.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Choice {
    Base,
    Mutant(String),
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Base => write!(f, "base"),
            Choice::Mutant(name) => write!(f, "{name}"),
        }
    }
}

/// One parsed variation: a base implementation plus named mutants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variation {
    /// Byte range of the variation in the original source, from the opener
    /// token through the closer token.
    pub span: Range<usize>,
    /// Leading whitespace of the opener line; interior delimiter lines are
    /// emitted at this indentation.
    pub indent: String,
    /// Base implementation body, byte-exact.
    pub base: String,
    pub mutants: Vec<Mutant>,
    /// The alternative found active on disk.
    pub active: Choice,
    /// Original bytes of `span`, echoed verbatim when the selection matches
    /// the as-found activation.
    raw: String,
}

impl Variation {
    pub fn mutant(&self, name: &str) -> Option<&Mutant> {
        self.mutants.iter().find(|m| m.name == name)
    }
}

/// A fully parsed source file: inert text interleaved with variations.
/// Concatenating inert segments and as-found variation renders reproduces
/// the original bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSource {
    pub original: String,
    pub style: CommentStyle,
    pub variations: Vec<Variation>,
    /// `inert.len() == variations.len() + 1`
    inert: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnterminatedVariation,
    NestedVariation,
    MutantBodyMissing { name: String },
    DuplicateMutantName { name: String },
    UnexpectedClose,
    UnexpectedHeader,
    UnexpectedCommentEnd,
    BadMarkerCount { count: usize },
    InvalidMutantName { text: String },
    MultipleActive,
    NoActiveAlternative,
    AmbiguousSegment,
    NoMutants,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnterminatedVariation => {
                write!(f, "variation opened but never closed")
            }
            ParseErrorKind::NestedVariation => write!(f, "variation opened inside a variation"),
            ParseErrorKind::MutantBodyMissing { name } => {
                write!(f, "mutant `{name}` has a header but no body")
            }
            ParseErrorKind::DuplicateMutantName { name } => {
                write!(f, "duplicate mutant name `{name}` in variation")
            }
            ParseErrorKind::UnexpectedClose => {
                write!(f, "variation closer outside any variation")
            }
            ParseErrorKind::UnexpectedHeader => write!(f, "mutant header outside any variation"),
            ParseErrorKind::UnexpectedCommentEnd => {
                write!(f, "comment end delimiter without a matching marker comment")
            }
            ParseErrorKind::BadMarkerCount { count } => {
                write!(f, "{count} marker repetitions; only 1 and 2 are defined")
            }
            ParseErrorKind::InvalidMutantName { text } => {
                write!(f, "invalid mutant name `{text}`")
            }
            ParseErrorKind::MultipleActive => {
                write!(f, "more than one alternative is active in variation")
            }
            ParseErrorKind::NoActiveAlternative => {
                write!(f, "no alternative is active in variation")
            }
            ParseErrorKind::AmbiguousSegment => {
                write!(f, "alternative mixes commented and uncommented content")
            }
            ParseErrorKind::NoMutants => write!(f, "variation declares no mutants"),
        }
    }
}

/// Parse failure with its byte offset and 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line} (byte {offset}): {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub line: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("variation {variation} has no mutant named `{name}`")]
    UnknownMutant { variation: usize, name: String },
    #[error("no variation with index {0}")]
    NoSuchVariation(usize),
}

/// One mutant located in a file tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutantEntry {
    pub file: PathBuf,
    pub variation: usize,
    pub name: String,
    pub active: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum EnumerateError {
    #[error("{file}: {source}")]
    Parse {
        file: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{file}: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

// ---------------------------------------------------------------------------
// line scanning

#[derive(Debug, Clone, Copy)]
struct LineRec {
    /// Byte offset of the line start.
    start: usize,
    /// Byte offset one past the last content byte (excludes the newline).
    end: usize,
    /// 1-based line number.
    number: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum LineKind {
    Plain,
    VarOpen,
    VarClose,
    Header(String),
    BodyOpen,
    BodyClose,
    /// Single-line body comment; payload is the body text.
    InlineBody(String),
    /// Line-style marker-prefixed body line; payload is the unwrapped text.
    BodyLine(String),
    /// Line-style `begin+marker` with nothing after: opener at top level,
    /// empty body line inside a variation.
    VarOpenOrBodyLine,
}

fn split_lines(source: &str) -> Vec<LineRec> {
    let mut lines = Vec::new();
    let bytes = source.as_bytes();
    let mut start = 0usize;
    let mut number = 1usize;
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'\n' {
            lines.push(LineRec {
                start,
                end: i,
                number,
            });
            start = i + 1;
            number += 1;
        }
    }
    if start < bytes.len() {
        lines.push(LineRec {
            start,
            end: bytes.len(),
            number,
        });
    }
    lines
}

fn count_markers(s: &str, marker: &str) -> usize {
    let mut n = 0;
    let mut rest = s;
    while rest.starts_with(marker) {
        n += 1;
        rest = &rest[marker.len()..];
    }
    n
}

fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn classify(text: &str, style: &CommentStyle, rec: &LineRec) -> Result<LineKind, ParseError> {
    let err = |kind| ParseError {
        kind,
        offset: rec.start,
        line: rec.number,
    };
    let rest = text.trim_start();
    if style.is_line_style() {
        if !rest.starts_with(&style.begin) {
            return Ok(LineKind::Plain);
        }
        let after = &rest[style.begin.len()..];
        let markers = count_markers(after, &style.marker);
        match markers {
            0 => {
                // `begin ws marker` closes a variation
                let trimmed = after.trim();
                if after.starts_with(|c: char| c.is_whitespace()) && trimmed == style.marker {
                    Ok(LineKind::VarClose)
                } else {
                    Ok(LineKind::Plain)
                }
            }
            1 => {
                let payload = &after[style.marker.len()..];
                if payload.trim().is_empty() && payload.is_empty() {
                    Ok(LineKind::VarOpenOrBodyLine)
                } else if payload.trim().is_empty() {
                    // trailing whitespace only: opener form, or a wrapped
                    // whitespace line; context decides
                    Ok(LineKind::VarOpenOrBodyLine)
                } else {
                    let body = payload.strip_prefix(' ').unwrap_or(payload);
                    Ok(LineKind::BodyLine(body.to_string()))
                }
            }
            2 => {
                let after2 = &after[2 * style.marker.len()..];
                let name = after2.trim();
                if !after2.starts_with(|c: char| c.is_whitespace()) || !is_valid_name(name) {
                    return Err(err(ParseErrorKind::InvalidMutantName {
                        text: name.to_string(),
                    }));
                }
                Ok(LineKind::Header(name.to_string()))
            }
            n => Err(err(ParseErrorKind::BadMarkerCount { count: n })),
        }
    } else {
        if rest.starts_with(&style.begin) {
            let after = &rest[style.begin.len()..];
            if let Some(pos) = after.find(&style.end) {
                let content = &after[..pos];
                let tail = &after[pos + style.end.len()..];
                if !tail.trim().is_empty() {
                    return Ok(LineKind::Plain);
                }
                let markers = count_markers(content, &style.marker);
                return match markers {
                    0 => {
                        let trimmed = content.trim();
                        if content.starts_with(|c: char| c.is_whitespace())
                            && trimmed == style.marker
                        {
                            Ok(LineKind::VarClose)
                        } else {
                            Ok(LineKind::Plain)
                        }
                    }
                    1 => {
                        let payload = &content[style.marker.len()..];
                        if payload.trim().is_empty() {
                            Ok(LineKind::VarOpen)
                        } else {
                            // one space each side is delimiter padding
                            let b = payload.strip_prefix(' ').unwrap_or(payload);
                            let body = b.strip_suffix(' ').unwrap_or(b);
                            Ok(LineKind::InlineBody(body.to_string()))
                        }
                    }
                    2 => {
                        let after2 = &content[2 * style.marker.len()..];
                        let name = after2.trim();
                        if !after2.starts_with(|c: char| c.is_whitespace()) || !is_valid_name(name)
                        {
                            return Err(err(ParseErrorKind::InvalidMutantName {
                                text: name.to_string(),
                            }));
                        }
                        Ok(LineKind::Header(name.to_string()))
                    }
                    n => Err(err(ParseErrorKind::BadMarkerCount { count: n })),
                };
            }
            // no end delimiter on this line: body opener when exactly
            // `begin marker` plus optional trailing whitespace
            let markers = count_markers(after, &style.marker);
            if markers == 1 && after[style.marker.len()..].trim().is_empty() {
                return Ok(LineKind::BodyOpen);
            }
            return Ok(LineKind::Plain);
        }
        if rest.starts_with(&style.end) && rest[style.end.len()..].trim().is_empty() {
            return Ok(LineKind::BodyClose);
        }
        Ok(LineKind::Plain)
    }
}

// ---------------------------------------------------------------------------
// parsing

/// What a segment (the region belonging to one alternative) contained.
#[derive(Debug, Default)]
struct Segment {
    /// Bare lines, in order.
    bare: Vec<LineRec>,
    /// Completed comment bodies found in the segment.
    comments: Vec<String>,
    /// Set while consuming a block comment.
    open_comment: Option<Vec<LineRec>>,
    /// Line-style: current run of prefixed lines.
    line_run: Option<Vec<String>>,
}

impl Segment {
    fn flush_line_run(&mut self) {
        if let Some(run) = self.line_run.take() {
            self.comments.push(run.join("\n"));
        }
    }
}

struct Parser<'a> {
    source: &'a str,
    style: &'a CommentStyle,
    lines: Vec<LineRec>,
}

enum AltContent {
    Active(String),
    Inactive(String),
    Missing,
}

impl<'a> Parser<'a> {
    fn line_text(&self, rec: &LineRec) -> &'a str {
        &self.source[rec.start..rec.end]
    }

    fn error(&self, kind: ParseErrorKind, rec: &LineRec) -> ParseError {
        ParseError {
            kind,
            offset: rec.start,
            line: rec.number,
        }
    }

    fn finalize_segment(
        &self,
        seg: &mut Segment,
        rec: &LineRec,
    ) -> Result<AltContent, ParseError> {
        seg.flush_line_run();
        let has_bare_content = seg
            .bare
            .iter()
            .any(|l| !self.line_text(l).trim().is_empty());
        match (seg.comments.len(), has_bare_content) {
            (0, _) => {
                if seg.bare.is_empty() {
                    Ok(AltContent::Missing)
                } else {
                    let first = seg.bare.first().unwrap();
                    let last = seg.bare.last().unwrap();
                    let body = &self.source[first.start..last.end];
                    if body.trim().is_empty() {
                        Ok(AltContent::Missing)
                    } else {
                        Ok(AltContent::Active(body.to_string()))
                    }
                }
            }
            (1, false) => Ok(AltContent::Inactive(seg.comments[0].clone())),
            _ => Err(self.error(ParseErrorKind::AmbiguousSegment, rec)),
        }
    }

    fn parse(&self) -> Result<ParsedSource, ParseError> {
        let mut variations = Vec::new();
        let mut inert = Vec::new();
        let mut inert_start = 0usize;

        let mut i = 0usize;
        while i < self.lines.len() {
            let rec = self.lines[i];
            let text = self.line_text(&rec);
            let kind = classify(text, self.style, &rec)?;
            match kind {
                LineKind::VarOpen | LineKind::VarOpenOrBodyLine => {
                    let indent_len = text.len() - text.trim_start().len();
                    let token_start = rec.start + indent_len;
                    inert.push(self.source[inert_start..token_start].to_string());
                    let (variation, next_i, span_end) =
                        self.parse_variation(i, token_start, &text[..indent_len])?;
                    variations.push(variation);
                    inert_start = span_end;
                    i = next_i;
                }
                LineKind::Header(_) => {
                    return Err(self.error(ParseErrorKind::UnexpectedHeader, &rec));
                }
                LineKind::VarClose => {
                    return Err(self.error(ParseErrorKind::UnexpectedClose, &rec));
                }
                // stray comments at top level are inert
                _ => {
                    i += 1;
                }
            }
        }
        inert.push(self.source[inert_start..].to_string());

        Ok(ParsedSource {
            original: self.source.to_string(),
            style: self.style.clone(),
            variations,
            inert,
        })
    }

    /// Parse one variation starting at line `open_idx`. Returns the
    /// variation, the index of the line after the closer, and the byte
    /// offset one past the closer token.
    fn parse_variation(
        &self,
        open_idx: usize,
        span_start: usize,
        indent: &str,
    ) -> Result<(Variation, usize, usize), ParseError> {
        let open_rec = self.lines[open_idx];
        let mut seg = Segment::default();
        // (name, header line) per mutant, then contents
        let mut headers: Vec<(String, LineRec)> = Vec::new();
        let mut contents: Vec<AltContent> = Vec::new();

        let mut i = open_idx + 1;
        while i < self.lines.len() {
            let rec = self.lines[i];
            let text = self.line_text(&rec);

            if seg.open_comment.is_some() {
                // inside a block comment: only the closer line is structural
                if classify(text, self.style, &rec)? == LineKind::BodyClose {
                    let lines = seg.open_comment.take().unwrap();
                    let body = if lines.is_empty() {
                        String::new()
                    } else {
                        self.source[lines.first().unwrap().start..lines.last().unwrap().end]
                            .to_string()
                    };
                    seg.comments.push(body);
                } else {
                    seg.open_comment.as_mut().unwrap().push(rec);
                }
                i += 1;
                continue;
            }

            match classify(text, self.style, &rec)? {
                LineKind::VarOpen => {
                    return Err(self.error(ParseErrorKind::NestedVariation, &rec));
                }
                LineKind::VarOpenOrBodyLine => {
                    // line style: inside a variation this is an empty body line
                    seg.line_run.get_or_insert_with(Vec::new).push(String::new());
                }
                LineKind::BodyLine(content) => {
                    seg.line_run.get_or_insert_with(Vec::new).push(content);
                }
                LineKind::BodyOpen => {
                    seg.flush_line_run();
                    if !seg.comments.is_empty() {
                        // second comment in one segment
                        return Err(self.error(ParseErrorKind::AmbiguousSegment, &rec));
                    }
                    seg.open_comment = Some(Vec::new());
                }
                LineKind::InlineBody(body) => {
                    seg.flush_line_run();
                    if !seg.comments.is_empty() {
                        return Err(self.error(ParseErrorKind::AmbiguousSegment, &rec));
                    }
                    seg.comments.push(body);
                }
                LineKind::BodyClose => {
                    return Err(self.error(ParseErrorKind::UnexpectedCommentEnd, &rec));
                }
                LineKind::Header(name) => {
                    if headers.iter().any(|(n, _)| *n == name) {
                        return Err(
                            self.error(ParseErrorKind::DuplicateMutantName { name }, &rec)
                        );
                    }
                    contents.push(self.finalize_segment(&mut seg, &rec)?);
                    seg = Segment::default();
                    headers.push((name, rec));
                }
                LineKind::VarClose => {
                    contents.push(self.finalize_segment(&mut seg, &rec)?);
                    let variation = self.assemble(
                        span_start,
                        indent,
                        &open_rec,
                        &rec,
                        headers,
                        contents,
                    )?;
                    let indent_len = text.len() - text.trim_start().len();
                    let token_len = text.trim_end().len() - indent_len;
                    let span_end = rec.start + indent_len + token_len;
                    let mut v = variation;
                    v.span = span_start..span_end;
                    v.raw = self.source[span_start..span_end].to_string();
                    return Ok((v, i + 1, span_end));
                }
                LineKind::Plain => {
                    seg.flush_line_run();
                    seg.bare.push(rec);
                }
            }
            i += 1;
        }
        Err(self.error(ParseErrorKind::UnterminatedVariation, &open_rec))
    }

    fn assemble(
        &self,
        _span_start: usize,
        indent: &str,
        open_rec: &LineRec,
        close_rec: &LineRec,
        headers: Vec<(String, LineRec)>,
        contents: Vec<AltContent>,
    ) -> Result<Variation, ParseError> {
        if headers.is_empty() {
            return Err(self.error(ParseErrorKind::NoMutants, close_rec));
        }
        debug_assert_eq!(contents.len(), headers.len() + 1);

        let mut active: Option<Choice> = None;
        let mut base = String::new();
        let mut mutants = Vec::new();

        for (idx, content) in contents.into_iter().enumerate() {
            let is_base = idx == 0;
            let (choice, err_rec) = if is_base {
                (Choice::Base, *open_rec)
            } else {
                let (name, rec) = &headers[idx - 1];
                (Choice::Mutant(name.clone()), *rec)
            };
            let body = match content {
                AltContent::Active(body) => {
                    if active.is_some() {
                        return Err(self.error(ParseErrorKind::MultipleActive, &err_rec));
                    }
                    active = Some(choice.clone());
                    body
                }
                AltContent::Inactive(body) => body,
                AltContent::Missing => {
                    if is_base {
                        // a variation may replace "nothing": the base is empty
                        if active.is_some() {
                            return Err(self.error(ParseErrorKind::MultipleActive, &err_rec));
                        }
                        active = Some(Choice::Base);
                        String::new()
                    } else {
                        let name = headers[idx - 1].0.clone();
                        return Err(
                            self.error(ParseErrorKind::MutantBodyMissing { name }, &err_rec)
                        );
                    }
                }
            };
            if is_base {
                base = body;
            } else {
                mutants.push(Mutant {
                    name: headers[idx - 1].0.clone(),
                    body,
                });
            }
        }

        let active = active.ok_or_else(|| {
            self.error(ParseErrorKind::NoActiveAlternative, close_rec)
        })?;

        Ok(Variation {
            span: 0..0,
            indent: indent.to_string(),
            base,
            mutants,
            active,
            raw: String::new(),
        })
    }
}

/// Parse all variations in `source`. Sources without marker comments parse
/// to zero variations; never panics on malformed input.
pub fn parse_variations(source: &str, style: &CommentStyle) -> Result<ParsedSource, ParseError> {
    let parser = Parser {
        source,
        style,
        lines: split_lines(source),
    };
    parser.parse()
}

// ---------------------------------------------------------------------------
// rendering

impl ParsedSource {
    /// The as-found activation of every variation, in file order.
    pub fn active_choices(&self) -> Vec<Choice> {
        self.variations.iter().map(|v| v.active.clone()).collect()
    }

    /// Render with the as-found selection; byte-identical to the input.
    pub fn render_as_found(&self) -> String {
        self.render(&BTreeMap::new()).expect("as-found render cannot fail")
    }

    /// Render with `selection` overriding the as-found activation per
    /// variation index. Variations absent from the map keep their on-disk
    /// state and are echoed verbatim; changed variations are re-rendered in
    /// canonical layout.
    pub fn render(&self, selection: &BTreeMap<usize, Choice>) -> Result<String, RenderError> {
        for (&idx, choice) in selection {
            let variation = self
                .variations
                .get(idx)
                .ok_or(RenderError::NoSuchVariation(idx))?;
            if let Choice::Mutant(name) = choice {
                if variation.mutant(name).is_none() {
                    return Err(RenderError::UnknownMutant {
                        variation: idx,
                        name: name.clone(),
                    });
                }
            }
        }

        let mut out = String::with_capacity(self.original.len());
        for (i, variation) in self.variations.iter().enumerate() {
            out.push_str(&self.inert[i]);
            match selection.get(&i) {
                Some(choice) if *choice != variation.active => {
                    out.push_str(&render_variation(variation, choice, &self.style));
                }
                _ => out.push_str(&variation.raw),
            }
        }
        out.push_str(self.inert.last().expect("inert segments"));
        Ok(out)
    }
}

fn render_variation(v: &Variation, choice: &Choice, style: &CommentStyle) -> String {
    let line = style.is_line_style();
    let opener = if line {
        format!("{}{}", style.begin, style.marker)
    } else {
        format!("{}{} {}", style.begin, style.marker, style.end)
    };
    let closer = if line {
        format!("{} {}", style.begin, style.marker)
    } else {
        format!("{} {}{}", style.begin, style.marker, style.end)
    };
    let header = |name: &str| {
        if line {
            format!("{}{}{} {}", style.begin, style.marker, style.marker, name)
        } else {
            format!(
                "{}{}{} {} {}",
                style.begin, style.marker, style.marker, name, style.end
            )
        }
    };

    let mut lines: Vec<String> = Vec::new();
    lines.push(opener);
    emit_alternative(&mut lines, &v.base, *choice == Choice::Base, v, style);
    for mutant in &v.mutants {
        lines.push(format!("{}{}", v.indent, header(&mutant.name)));
        let active = matches!(choice, Choice::Mutant(name) if *name == mutant.name);
        emit_alternative(&mut lines, &mutant.body, active, v, style);
    }
    lines.push(format!("{}{}", v.indent, closer));
    lines.join("\n")
}

fn emit_alternative(
    lines: &mut Vec<String>,
    body: &str,
    active: bool,
    v: &Variation,
    style: &CommentStyle,
) {
    if active {
        if !body.is_empty() {
            lines.push(body.to_string());
        }
        return;
    }
    if style.is_line_style() {
        if body.is_empty() {
            return;
        }
        for l in body.split('\n') {
            if l.is_empty() {
                lines.push(format!("{}{}{}", v.indent, style.begin, style.marker));
            } else {
                lines.push(format!("{}{}{} {}", v.indent, style.begin, style.marker, l));
            }
        }
    } else {
        lines.push(format!("{}{}{}", v.indent, style.begin, style.marker));
        if !body.is_empty() {
            lines.push(body.to_string());
        }
        lines.push(format!("{}{}", v.indent, style.end));
    }
}

// ---------------------------------------------------------------------------
// directory enumeration and file toggling

fn collect_files(root: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(root)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Enumerate every mutant under `root`, in path-lexicographic order, then by
/// offset within each file. Files whose extension has no configured style
/// are skipped.
pub fn enumerate_mutants(
    root: &Path,
    styles: &BTreeMap<String, CommentStyle>,
) -> Result<Vec<MutantEntry>, EnumerateError> {
    let mut files = Vec::new();
    collect_files(root, &mut files).map_err(|source| EnumerateError::Io {
        file: root.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for file in files {
        let Some(ext) = file.extension().and_then(|e| e.to_str()) else {
            continue;
        };
        let Some(style) = styles.get(ext) else {
            continue;
        };
        let text = std::fs::read_to_string(&file).map_err(|source| EnumerateError::Io {
            file: file.clone(),
            source,
        })?;
        let parsed = parse_variations(&text, style).map_err(|source| EnumerateError::Parse {
            file: file.clone(),
            source,
        })?;
        for (vi, variation) in parsed.variations.iter().enumerate() {
            for mutant in &variation.mutants {
                out.push(MutantEntry {
                    file: file.clone(),
                    variation: vi,
                    name: mutant.name.clone(),
                    active: variation.active == Choice::Mutant(mutant.name.clone()),
                });
            }
        }
    }
    Ok(out)
}

/// Atomically rewrite `path` with `contents`: write a temporary file in the
/// same directory, then rename over the original.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    use std::io::Write;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs() -> CommentStyle {
        CommentStyle::new("{-", "-}")
    }

    /// The `insert` listing: base guards plus a two-guard mutant.
    const INSERT_LISTING: &str = r"insert k v Leaf = Node Leaf k v Leaf
insert k v (Node l k' v' r)
  {-! -}
  | k < k' = Node (insert k v l) k' v' r
  | k > k' = Node l k' v' (insert k v r)
  | otherwise = Node l k' v r
  {-!! insert_duplicate_entries -}
  {-!
  | k < k' = Node (insert k v l) k' v' r
  | otherwise = Node l k' v' (insert k v r)
  -}
  {- !-}
";

    #[test]
    fn parses_insert_listing() {
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        assert_eq!(parsed.variations.len(), 1);
        let v = &parsed.variations[0];
        assert_eq!(v.active, Choice::Base);
        assert_eq!(
            v.base,
            "  | k < k' = Node (insert k v l) k' v' r\n  | k > k' = Node l k' v' (insert k v r)\n  | otherwise = Node l k' v r"
        );
        assert_eq!(v.mutants.len(), 1);
        assert_eq!(v.mutants[0].name, "insert_duplicate_entries");
        assert_eq!(
            v.mutants[0].body,
            "  | k < k' = Node (insert k v l) k' v' r\n  | otherwise = Node l k' v' (insert k v r)"
        );
    }

    #[test]
    fn no_markers_no_variations() {
        let src = "plain code\n{- an ordinary comment -}\nmore code\n";
        let parsed = parse_variations(src, &hs()).unwrap();
        assert!(parsed.variations.is_empty());
        assert_eq!(parsed.render_as_found(), src);
    }

    #[test]
    fn unterminated_variation_reports_position() {
        let src = "code\n{-! -}\nbase\n";
        let err = parse_variations(src, &hs()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnterminatedVariation);
        assert_eq!(err.line, 2);
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn as_found_round_trip_is_byte_exact() {
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        assert_eq!(parsed.render_as_found(), INSERT_LISTING);
    }

    #[test]
    fn identity_render_when_selection_matches() {
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        let sel = BTreeMap::from([(0, Choice::Base)]);
        assert_eq!(parsed.render(&sel).unwrap(), INSERT_LISTING);
    }

    #[test]
    fn canonical_render_is_parser_fixed_point() {
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        // force a structural re-render of the same selection by toggling
        // through the mutant and back
        let sel = BTreeMap::from([(0, Choice::Mutant("insert_duplicate_entries".into()))]);
        let mutated = parsed.render(&sel).unwrap();
        let reparsed = parse_variations(&mutated, &hs()).unwrap();
        assert_eq!(
            reparsed.variations[0].active,
            Choice::Mutant("insert_duplicate_entries".into())
        );
        assert_eq!(reparsed.variations[0].base, parsed.variations[0].base);
        assert_eq!(reparsed.variations[0].mutants, parsed.variations[0].mutants);
    }

    #[test]
    fn toggle_involution_restores_bytes() {
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        let sel = BTreeMap::from([(0, Choice::Mutant("insert_duplicate_entries".into()))]);
        let mutated = parsed.render(&sel).unwrap();
        let reparsed = parse_variations(&mutated, &hs()).unwrap();
        let back = reparsed
            .render(&BTreeMap::from([(0, Choice::Base)]))
            .unwrap();
        assert_eq!(back, INSERT_LISTING);
    }

    #[test]
    fn mutant_selection_activates_body() {
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        let sel = BTreeMap::from([(0, Choice::Mutant("insert_duplicate_entries".into()))]);
        let mutated = parsed.render(&sel).unwrap();
        assert!(mutated.contains("\n  | k < k' = Node (insert k v l) k' v' r\n  | otherwise = Node l k' v' (insert k v r)\n"));
        // base is commented out
        assert!(mutated.contains("{-!\n  | k < k' = Node (insert k v l) k' v' r\n  | k > k' = Node l k' v' (insert k v r)\n  | otherwise = Node l k' v r\n  -}"));
    }

    #[test]
    fn unknown_mutant_rejected() {
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        let sel = BTreeMap::from([(0, Choice::Mutant("nope".into()))]);
        match parsed.render(&sel) {
            Err(RenderError::UnknownMutant { variation: 0, name }) => assert_eq!(name, "nope"),
            other => panic!("expected UnknownMutant, got {other:?}"),
        }
    }

    #[test]
    fn nested_variation_rejected() {
        let src = "{-! -}\nbase\n{-! -}\n{-!! m -}\n{-!\nx\n-}\n{- !-}\n";
        let err = parse_variations(src, &hs()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NestedVariation);
        assert_eq!(err.line, 3);
    }

    #[test]
    fn duplicate_mutant_names_rejected() {
        let src = "{-! -}\nbase\n{-!! m -}\n{-!\nx\n-}\n{-!! m -}\n{-!\ny\n-}\n{- !-}\n";
        let err = parse_variations(src, &hs()).unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::DuplicateMutantName { name: "m".into() }
        );
    }

    #[test]
    fn header_without_body_rejected() {
        let src = "{-! -}\nbase\n{-!! m -}\n{- !-}\n";
        let err = parse_variations(src, &hs()).unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::MutantBodyMissing { name: "m".into() }
        );
    }

    #[test]
    fn triple_marker_rejected() {
        let src = "{-! -}\nbase\n{-!!! m -}\n{-!\nx\n-}\n{- !-}\n";
        let err = parse_variations(src, &hs()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadMarkerCount { count: 3 });
    }

    #[test]
    fn two_active_alternatives_rejected() {
        let src = "{-! -}\nbase\n{-!! m -}\nbare mutant body\n{- !-}\n";
        let err = parse_variations(src, &hs()).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MultipleActive);
    }

    #[test]
    fn mutant_active_base_commented_parses() {
        let src = "{-! -}\n{-!\nbase line\n-}\n{-!! m -}\nmutant line\n{- !-}\n";
        let parsed = parse_variations(src, &hs()).unwrap();
        let v = &parsed.variations[0];
        assert_eq!(v.active, Choice::Mutant("m".into()));
        assert_eq!(v.base, "base line");
        assert_eq!(v.mutants[0].body, "mutant line");
        assert_eq!(parsed.render_as_found(), src);
    }

    #[test]
    fn exclusivity_after_render() {
        // re-parsing any rendered output finds exactly one active
        // alternative per variation, matching the selection
        let parsed = parse_variations(INSERT_LISTING, &hs()).unwrap();
        for choice in [
            Choice::Base,
            Choice::Mutant("insert_duplicate_entries".into()),
        ] {
            let out = parsed
                .render(&BTreeMap::from([(0, choice.clone())]))
                .unwrap();
            let re = parse_variations(&out, &hs()).unwrap();
            assert_eq!(re.variations[0].active, choice);
        }
    }

    #[test]
    fn line_style_round_trip_and_toggle() {
        let style = CommentStyle::new("#", "\n");
        let src = "x = 1\n#!\nvalue = a + b\n#!! sub -\nwait\n# !\n";
        // invalid header name; expect an error first
        assert!(parse_variations(src, &style).is_err());

        let src = "x = 1\n#!\nvalue = a + b\n#!! minus\n#! value = a - b\n# !\ny = 2\n";
        let parsed = parse_variations(src, &style).unwrap();
        let v = &parsed.variations[0];
        assert_eq!(v.active, Choice::Base);
        assert_eq!(v.base, "value = a + b");
        assert_eq!(v.mutants[0].body, "value = a - b");
        assert_eq!(parsed.render_as_found(), src);

        let toggled = parsed
            .render(&BTreeMap::from([(0, Choice::Mutant("minus".into()))]))
            .unwrap();
        assert!(toggled.contains("\nvalue = a - b\n"));
        assert!(toggled.contains("\n#! value = a + b\n"));
        let back = parse_variations(&toggled, &style)
            .unwrap()
            .render(&BTreeMap::from([(0, Choice::Base)]))
            .unwrap();
        assert_eq!(back, src);
    }

    #[test]
    fn multiple_variations_enumerate_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let styles = default_styles();
        std::fs::write(dir.path().join("b.hs"), INSERT_LISTING).unwrap();
        let two = "{-! -}\none\n{-!! m1 -}\n{-!\nx\n-}\n{-!! m2 -}\n{-!\ny\n-}\n{- !-}\n";
        std::fs::write(dir.path().join("a.hs"), two).unwrap();
        // unknown extension is skipped
        std::fs::write(dir.path().join("c.json"), "{}").unwrap();
        let entries = enumerate_mutants(dir.path(), &styles).unwrap();
        let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["m1", "m2", "insert_duplicate_entries"]);
        assert!(entries.iter().all(|e| !e.active));
    }

    #[test]
    fn empty_directory_enumerates_empty() {
        let dir = tempfile::tempdir().unwrap();
        let entries = enumerate_mutants(dir.path(), &default_styles()).unwrap();
        assert!(entries.is_empty());
    }

    #[test]
    fn enumerate_propagates_parse_errors_with_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bad.hs"), "{-! -}\nbase\n").unwrap();
        match enumerate_mutants(dir.path(), &default_styles()) {
            Err(EnumerateError::Parse { file, source }) => {
                assert!(file.ends_with("bad.hs"));
                assert_eq!(source.kind, ParseErrorKind::UnterminatedVariation);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn style_validation() {
        assert!(hs().validate().is_ok());
        assert!(CommentStyle::new("", "-}").validate().is_err());
        assert!(CommentStyle::new("{-", "{-").validate().is_err());
        let mut bad = hs();
        bad.marker = "! ".into();
        assert!(bad.validate().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn body_line() -> impl Strategy<Value = String> {
            "[ ]{0,4}[a-z][a-z0-9 +<>=']{0,20}"
        }

        fn alternative() -> impl Strategy<Value = String> {
            proptest::collection::vec(body_line(), 1..4).prop_map(|ls| ls.join("\n"))
        }

        prop_compose! {
            fn variation_source()(
                base in alternative(),
                bodies in proptest::collection::vec(alternative(), 1..4),
                active in any::<proptest::sample::Index>(),
                indent in "[ ]{0,4}",
            ) -> (String, usize) {
                // build a canonical variation with alternative `active_idx` live
                let n = bodies.len();
                let active_idx = active.index(n + 1);
                let mut lines = Vec::new();
                lines.push(format!("{indent}{{-! -}}"));
                let emit = |lines: &mut Vec<String>, body: &str, live: bool| {
                    if live {
                        lines.push(body.to_string());
                    } else {
                        lines.push(format!("{indent}{{-!"));
                        lines.push(body.to_string());
                        lines.push(format!("{indent}-}}"));
                    }
                };
                emit(&mut lines, &base, active_idx == 0);
                for (i, body) in bodies.iter().enumerate() {
                    lines.push(format!("{indent}{{-!! mut_{i} -}}"));
                    emit(&mut lines, body, active_idx == i + 1);
                }
                lines.push(format!("{indent}{{- !-}}"));
                (lines.join("\n"), active_idx)
            }
        }

        proptest! {
            #[test]
            fn round_trip_and_involution((src, active_idx) in variation_source()) {
                let style = hs();
                let full = format!("prelude\n{src}\ntrailer\n");
                let parsed = parse_variations(&full, &style).unwrap();
                prop_assert_eq!(parsed.variations.len(), 1);
                // as-found echo
                prop_assert_eq!(parsed.render_as_found(), full.clone());

                // toggle every mutant on and back off
                let v = &parsed.variations[0];
                let found = v.active.clone();
                let expected = if active_idx == 0 {
                    Choice::Base
                } else {
                    Choice::Mutant(format!("mut_{}", active_idx - 1))
                };
                prop_assert_eq!(&found, &expected);
                for m in &v.mutants {
                    let to = Choice::Mutant(m.name.clone());
                    if to == found { continue; }
                    let there = parsed
                        .render(&BTreeMap::from([(0, to)]))
                        .unwrap();
                    let back = parse_variations(&there, &style)
                        .unwrap()
                        .render(&BTreeMap::from([(0, found.clone())]))
                        .unwrap();
                    prop_assert_eq!(&back, &full);
                }
            }

            #[test]
            fn parser_never_panics(src in "[{}!a-z \n-]{0,120}") {
                let _ = parse_variations(&src, &hs());
            }
        }
    }
}
