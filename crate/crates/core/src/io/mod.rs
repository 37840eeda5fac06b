//! Line-based text formats.
//!
//! Every format shares one container: an optional version line `<kind> v1`,
//! header fields `key: value ...`, and body records, one per line, as
//! whitespace-separated tokens. A token starting with `#` comments out the
//! rest of its line. WORD and LETTERS documents have no version line and hold
//! a single token list.

mod formats;

pub use formats::*;

use std::fmt;

use thiserror::Error;

/// The five document kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DocKind {
    Mealy,
    Ca,
    Tm,
    Word,
    Letters,
}

impl DocKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DocKind::Mealy => "mealy",
            DocKind::Ca => "ca",
            DocKind::Tm => "tm",
            DocKind::Word => "word",
            DocKind::Letters => "letters",
        }
    }

    fn has_version_line(self) -> bool {
        matches!(self, DocKind::Mealy | DocKind::Ca | DocKind::Tm)
    }
}

impl fmt::Display for DocKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

pub const FORMAT_VERSION: &str = "v1";

/// 1-based line and column of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderField {
    pub key: String,
    pub values: Vec<String>,
}

/// A parsed document without positions; see [`SourceMap`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub kind: DocKind,
    pub header: Vec<HeaderField>,
    /// Nonempty token lists.
    pub body: Vec<Vec<String>>,
}

/// Token positions of a parsed [`Document`], parallel to its fields.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub header: Vec<Span>,
    pub body: Vec<Vec<Span>>,
}

impl Document {
    pub fn new(kind: DocKind) -> Self {
        Self {
            kind,
            header: Vec::new(),
            body: Vec::new(),
        }
    }

    pub fn field(&self, key: &str) -> Option<&[String]> {
        self.header.iter().find(|h| h.key == key).map(|h| h.values.as_slice())
    }

    pub fn push_field<S: Into<String>>(&mut self, key: &str, values: impl IntoIterator<Item = S>) {
        self.header.push(HeaderField {
            key: key.to_string(),
            values: values.into_iter().map(Into::into).collect(),
        });
    }

    pub fn push_record<S: Into<String>>(&mut self, tokens: impl IntoIterator<Item = S>) {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if !tokens.is_empty() {
            self.body.push(tokens);
        }
    }

    /// All body tokens in order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.body.iter().flatten().map(String::as_str)
    }

    pub fn parse(text: &str, kind: DocKind) -> Result<Self, ParseError> {
        Self::parse_with_map(text, kind).map(|(d, _)| d)
    }

    pub fn parse_with_map(text: &str, kind: DocKind) -> Result<(Self, SourceMap), ParseError> {
        let mut doc = Document::new(kind);
        let mut map = SourceMap::default();
        let mut versioned = !kind.has_version_line();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let tokens = tokenize(raw, line);
            let Some(&(first, span)) = tokens.first() else {
                continue;
            };
            if !versioned {
                if first != kind.keyword() {
                    return Err(ParseError::new(span, format!("expected `{kind} {FORMAT_VERSION}`")));
                }
                match tokens.get(1) {
                    Some(&(FORMAT_VERSION, _)) if tokens.len() == 2 => {}
                    Some(&(v, s)) => return Err(ParseError::new(s, format!("unsupported version `{v}`"))),
                    None => return Err(ParseError::new(span, "missing format version")),
                }
                versioned = true;
                continue;
            }
            if kind.has_version_line() {
                if let Some(key) = first.strip_suffix(':') {
                    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(ParseError::new(span, format!("invalid header key `{first}`")));
                    }
                    if doc.field(key).is_some() {
                        return Err(ParseError::new(span, format!("duplicate header `{key}`")));
                    }
                    doc.push_field(key, tokens[1..].iter().map(|&(t, _)| t));
                    map.header.push(span);
                    continue;
                }
            }
            doc.body.push(tokens.iter().map(|&(t, _)| t.to_string()).collect());
            map.body.push(tokens.iter().map(|&(_, s)| s).collect());
        }
        if !versioned {
            let span = Span {
                line: last_line.max(1),
                column: 1,
            };
            return Err(ParseError::new(span, format!("missing `{kind} {FORMAT_VERSION}` line")));
        }
        if !kind.has_version_line() && doc.body.len() > 1 {
            let tokens = std::mem::take(&mut doc.body).concat();
            let spans = std::mem::take(&mut map.body).concat();
            doc.body.push(tokens);
            map.body.push(spans);
        }
        Ok((doc, map))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.kind.has_version_line() {
            out.push_str(&format!("{} {FORMAT_VERSION}\n", self.kind));
        }
        for h in &self.header {
            out.push_str(&h.key);
            out.push(':');
            for v in &h.values {
                out.push(' ');
                out.push_str(v);
            }
            out.push('\n');
        }
        for record in self.body.iter().filter(|r| !r.is_empty()) {
            out.push_str(&record.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Tokens with their positions, up to a comment.
fn tokenize(raw: &str, line: usize) -> Vec<(&str, Span)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (column, (b, c)) in raw.char_indices().enumerate() {
        if c.is_whitespace() {
            if let Some((s, col)) = start.take() {
                out.push((&raw[s..b], Span { line, column: col }));
            }
        } else if start.is_none() {
            if c == '#' {
                return out;
            }
            start = Some((b, column + 1));
        }
    }
    if let Some((s, col)) = start {
        out.push((&raw[s..], Span { line, column: col }));
    }
    out
}
