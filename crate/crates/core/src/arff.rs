//! In-memory dataset model and its Attribute-Relation File Format codec.
//!
//! A [`Dataset`] is a relation name, an ordered list of typed attributes and
//! a list of instances. Instances are stored either densely (one [`Value`]
//! per attribute) or sparsely as `(index, value)` pairs where every omitted
//! attribute takes its implicit default: `0` for numeric attributes, the
//! first label for nominal ones and the empty string for string ones.
//!
//! [`write_arff`] and [`read_arff`] are exact inverses on valid datasets,
//! including the bit pattern of every numeric value.

use std::borrow::Cow;
use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Type of an attribute column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    String,
    Nominal(Vec<String>),
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn string(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::String,
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, labels: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Nominal(labels.into_iter().map(Into::into).collect()),
        }
    }

    /// Label list of a nominal attribute.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal(labels) => Some(labels),
            _ => None,
        }
    }

    fn implicit_value(&self) -> Value {
        match self.kind {
            AttributeKind::String => Value::Str(String::new()),
            AttributeKind::Nominal(_) => Value::Label(0),
            AttributeKind::Numeric => Value::Num(0.0),
        }
    }
}

/// One cell of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Value {
    Str(String),
    /// Index into the attribute's label list.
    Label(usize),
    Num(f64),
    Missing,
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Label(a), Value::Label(b)) => a == b,
            (Value::Num(a), Value::Num(b)) => a.to_bits() == b.to_bits(),
            (Value::Missing, Value::Missing) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instance {
    Dense(Vec<Value>),
    /// Explicit entries with strictly increasing attribute indices.
    Sparse(Vec<(usize, Value)>),
}

impl Instance {
    pub fn is_sparse(&self) -> bool {
        matches!(self, Instance::Sparse(_))
    }
}

/// A relation: typed attributes plus instances, validated on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    relation: String,
    attributes: Vec<AttributeSpec>,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(relation: impl Into<String>, attributes: Vec<AttributeSpec>) -> Result<Self> {
        let mut names = HashSet::new();
        for attr in &attributes {
            if !names.insert(attr.name.as_str()) {
                return Err(Error::dataset(format!("duplicate attribute name {:?}", attr.name)));
            }
            if let AttributeKind::Nominal(labels) = &attr.kind {
                if labels.is_empty() {
                    return Err(Error::dataset(format!(
                        "nominal attribute {:?} has no labels",
                        attr.name
                    )));
                }
                let mut seen = HashSet::new();
                for label in labels {
                    if !seen.insert(label.as_str()) {
                        return Err(Error::dataset(format!(
                            "nominal attribute {:?} repeats label {label:?}",
                            attr.name
                        )));
                    }
                }
            }
        }
        Ok(Self {
            relation: relation.into(),
            attributes,
            instances: Vec::new(),
        })
    }

    pub fn from_parts(
        relation: impl Into<String>,
        attributes: Vec<AttributeSpec>,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        let mut ds = Self::new(relation, attributes)?;
        ds.instances.reserve(instances.len());
        for inst in instances {
            ds.push(inst)?;
        }
        Ok(ds)
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Appends an instance after checking it against the attribute list.
    pub fn push(&mut self, inst: Instance) -> Result<()> {
        match &inst {
            Instance::Dense(values) => {
                if values.len() != self.attributes.len() {
                    return Err(Error::dataset(format!(
                        "instance has {} values, expected {}",
                        values.len(),
                        self.attributes.len()
                    )));
                }
                for (attr, value) in self.attributes.iter().zip(values) {
                    check_value(attr, value)?;
                }
            }
            Instance::Sparse(entries) => {
                let mut prev: Option<usize> = None;
                for (idx, value) in entries {
                    if prev.is_some_and(|p| *idx <= p) {
                        return Err(Error::dataset("sparse indices must be strictly increasing"));
                    }
                    let attr = self
                        .attributes
                        .get(*idx)
                        .ok_or_else(|| Error::dataset(format!("sparse index {idx} out of range")))?;
                    check_value(attr, value)?;
                    prev = Some(*idx);
                }
            }
        }
        self.instances.push(inst);
        Ok(())
    }

    /// Value of attribute `attr` in instance `row`, resolving sparse defaults.
    pub fn value(&self, row: usize, attr: usize) -> Cow<'_, Value> {
        match &self.instances[row] {
            Instance::Dense(values) => Cow::Borrowed(&values[attr]),
            Instance::Sparse(entries) => match entries.binary_search_by_key(&attr, |(i, _)| *i) {
                Ok(pos) => Cow::Borrowed(&entries[pos].1),
                Err(_) => Cow::Owned(self.attributes[attr].implicit_value()),
            },
        }
    }

    /// The class attribute is the last attribute and must be nominal.
    pub fn class_index(&self) -> Result<usize> {
        let idx = self
            .attributes
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::dataset("dataset has no attributes"))?;
        match self.attributes[idx].kind {
            AttributeKind::Nominal(_) => Ok(idx),
            _ => Err(Error::dataset("last attribute must be the nominal class")),
        }
    }

    pub fn class_labels(&self) -> Result<&[String]> {
        let idx = self.class_index()?;
        Ok(self.attributes[idx].labels().unwrap_or_default())
    }

    /// Class label index of every instance.
    pub fn class_values(&self) -> Result<Vec<usize>> {
        let class = self.class_index()?;
        (0..self.len())
            .map(|row| match *self.value(row, class) {
                Value::Label(l) => Ok(l),
                _ => Err(Error::dataset(format!("instance {row} has a missing class value"))),
            })
            .collect()
    }

    /// Copy of the dataset restricted to the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            relation: self.relation.clone(),
            attributes: self.attributes.clone(),
            instances: rows.iter().map(|&r| self.instances[r].clone()).collect(),
        }
    }
}

fn check_value(attr: &AttributeSpec, value: &Value) -> Result<()> {
    match (&attr.kind, value) {
        (_, Value::Missing) => Ok(()),
        (AttributeKind::String, Value::Str(_)) => Ok(()),
        (AttributeKind::Nominal(labels), Value::Label(l)) if *l < labels.len() => Ok(()),
        (AttributeKind::Nominal(_), Value::Label(l)) => Err(Error::dataset(format!(
            "label index {l} out of range for attribute {:?}",
            attr.name
        ))),
        (AttributeKind::Numeric, Value::Num(x)) if x.is_finite() => Ok(()),
        (AttributeKind::Numeric, Value::Num(x)) => Err(Error::dataset(format!(
            "non-finite value {x} for attribute {:?}",
            attr.name
        ))),
        _ => Err(Error::dataset(format!(
            "value {value:?} does not match attribute {:?}",
            attr.name
        ))),
    }
}

// ---------------------------------------------------------------------------
// Writer
// ---------------------------------------------------------------------------

/// Serializes a dataset. Pure: equal datasets give identical bytes.
pub fn write_arff(ds: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}", quote_if_needed(&ds.relation));
    out.push('\n');
    for attr in &ds.attributes {
        let kind = match &attr.kind {
            AttributeKind::String => "string".to_string(),
            AttributeKind::Numeric => "numeric".to_string(),
            AttributeKind::Nominal(labels) => {
                let inner: Vec<_> = labels.iter().map(|l| quote_if_needed(l)).collect();
                format!("{{{}}}", inner.join(","))
            }
        };
        let _ = writeln!(out, "@attribute {} {}", quote_if_needed(&attr.name), kind);
    }
    out.push('\n');
    out.push_str("@data\n");
    for inst in &ds.instances {
        match inst {
            Instance::Dense(values) => {
                for (i, (attr, value)) in ds.attributes.iter().zip(values).enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_value(&mut out, attr, value);
                }
            }
            Instance::Sparse(entries) => {
                out.push('{');
                for (n, (idx, value)) in entries.iter().enumerate() {
                    if n > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{idx} ");
                    write_value(&mut out, &ds.attributes[*idx], value);
                }
                out.push('}');
            }
        }
        out.push('\n');
    }
    out
}

fn write_value(out: &mut String, attr: &AttributeSpec, value: &Value) {
    match value {
        Value::Missing => out.push('?'),
        Value::Str(s) => out.push_str(&quote(s)),
        Value::Num(x) => out.push_str(&format_number(*x)),
        Value::Label(l) => {
            let label = attr
                .labels()
                .and_then(|ls| ls.get(*l))
                .map(String::as_str)
                .unwrap_or("?");
            out.push_str(&quote_if_needed(label));
        }
    }
}

/// Shortest decimal form that parses back to the same bits.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:?}")
    }
}

fn needs_quoting(s: &str) -> bool {
    s.is_empty()
        || s == "?"
        || s.chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'))
}

fn quote_if_needed(s: &str) -> Cow<'_, str> {
    if needs_quoting(s) {
        Cow::Owned(quote(s))
    } else {
        Cow::Borrowed(s)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

// ---------------------------------------------------------------------------
// Reader
// ---------------------------------------------------------------------------

struct Token {
    text: String,
    quoted: bool,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Lexer {
    fn new(line_text: &str, line: usize) -> Self {
        Self {
            chars: line_text.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::arff(self.line, message)
    }

    /// A quoted string, or a bare run of characters up to whitespace or any of `stops`.
    fn token(&mut self, stops: &[char]) -> Result<Token> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("unexpected end of line")),
            Some(q @ ('\'' | '"')) => {
                self.pos += 1;
                let mut text = String::new();
                loop {
                    match self.peek() {
                        None => return Err(self.err("unterminated quoted value")),
                        Some(c) if c == q => {
                            self.pos += 1;
                            break;
                        }
                        Some('\\') => {
                            self.pos += 1;
                            let escaped = self.peek().ok_or_else(|| self.err("dangling escape"))?;
                            self.pos += 1;
                            text.push(match escaped {
                                'n' => '\n',
                                'r' => '\r',
                                't' => '\t',
                                other => other,
                            });
                        }
                        Some(c) => {
                            self.pos += 1;
                            text.push(c);
                        }
                    }
                }
                Ok(Token { text, quoted: true })
            }
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || stops.contains(&c) {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.err("expected a value"));
                }
                Ok(Token {
                    text: self.chars[start..self.pos].iter().collect(),
                    quoted: false,
                })
            }
        }
    }

    fn rest(&self) -> String {
        self.chars[self.pos..].iter().collect::<String>().trim().to_string()
    }
}

enum Section {
    Header,
    Data,
}

/// Parses ARFF text. Accepts `%` comment lines, blank lines, case-insensitive
/// keywords, and both dense and sparse data lines.
pub fn read_arff(text: &str) -> Result<Dataset> {
    let mut relation: Option<String> = None;
    let mut attributes: Vec<AttributeSpec> = Vec::new();
    let mut section = Section::Header;
    let mut dataset: Option<Dataset> = None;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        match section {
            Section::Header => {
                let mut lex = Lexer::new(line, line_no);
                if !lex.eat('@') {
                    return Err(Error::arff(line_no, "expected a header declaration"));
                }
                let keyword = lex.token(&[])?.text.to_ascii_lowercase();
                match keyword.as_str() {
                    "relation" => {
                        if relation.is_some() {
                            return Err(Error::arff(line_no, "duplicate @relation"));
                        }
                        relation = Some(lex.token(&[])?.text);
                        if !lex.at_end() {
                            return Err(Error::arff(line_no, "trailing text after relation name"));
                        }
                    }
                    "attribute" => {
                        if relation.is_none() {
                            return Err(Error::arff(line_no, "@attribute before @relation"));
                        }
                        let name = lex.token(&['{'])?.text;
                        let kind = parse_attribute_kind(&mut lex)?;
                        attributes.push(AttributeSpec { name, kind });
                    }
                    "data" => {
                        let rel = relation
                            .clone()
                            .ok_or_else(|| Error::arff(line_no, "@data before @relation"))?;
                        if !lex.at_end() {
                            return Err(Error::arff(line_no, "trailing text after @data"));
                        }
                        dataset = Some(
                            Dataset::new(rel, std::mem::take(&mut attributes))
                                .map_err(|e| Error::arff(line_no, e.to_string()))?,
                        );
                        section = Section::Data;
                    }
                    other => return Err(Error::arff(line_no, format!("unknown declaration @{other}"))),
                }
            }
            Section::Data => {
                let ds = dataset.as_mut().expect("dataset exists in data section");
                let inst = parse_data_line(ds.attributes(), line, line_no)?;
                ds.push(inst).map_err(|e| Error::arff(line_no, e.to_string()))?;
            }
        }
    }
    dataset.ok_or_else(|| Error::arff(text.lines().count().max(1), "missing @data section"))
}

fn parse_attribute_kind(lex: &mut Lexer) -> Result<AttributeKind> {
    if lex.eat('{') {
        let mut labels = Vec::new();
        if lex.eat('}') {
            return Err(lex.err("nominal attribute with no labels"));
        }
        loop {
            labels.push(lex.token(&[',', '}'])?.text);
            if lex.eat(',') {
                continue;
            }
            if lex.eat('}') {
                break;
            }
            return Err(lex.err("expected ',' or '}' in nominal label list"));
        }
        if !lex.at_end() {
            return Err(lex.err("trailing text after nominal label list"));
        }
        return Ok(AttributeKind::Nominal(labels));
    }
    let kind = lex.rest().to_ascii_lowercase();
    match kind.as_str() {
        "string" => Ok(AttributeKind::String),
        "numeric" | "real" | "integer" => Ok(AttributeKind::Numeric),
        "" => Err(lex.err("missing attribute type")),
        other => Err(lex.err(format!("unsupported attribute type {other:?}"))),
    }
}

fn parse_value(attr: &AttributeSpec, tok: Token, line: usize) -> Result<Value> {
    if !tok.quoted && tok.text == "?" {
        return Ok(Value::Missing);
    }
    match &attr.kind {
        AttributeKind::String => Ok(Value::Str(tok.text)),
        AttributeKind::Numeric => match tok.text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Num(x)),
            _ => Err(Error::arff(line, format!("invalid numeric value {:?}", tok.text))),
        },
        AttributeKind::Nominal(labels) => {
            labels
                .iter()
                .position(|l| *l == tok.text)
                .map(Value::Label)
                .ok_or_else(|| {
                    Error::arff(
                        line,
                        format!("unknown label {:?} for attribute {:?}", tok.text, attr.name),
                    )
                })
        }
    }
}

fn parse_data_line(attrs: &[AttributeSpec], line: &str, line_no: usize) -> Result<Instance> {
    let mut lex = Lexer::new(line, line_no);
    if lex.eat('{') {
        let mut entries = Vec::new();
        if lex.eat('}') {
            return finish_line(lex, Instance::Sparse(entries));
        }
        loop {
            let idx_tok = lex.token(&[',', '}'])?;
            let idx: usize = idx_tok
                .text
                .parse()
                .map_err(|_| Error::arff(line_no, format!("invalid sparse index {:?}", idx_tok.text)))?;
            let attr = attrs
                .get(idx)
                .ok_or_else(|| Error::arff(line_no, format!("sparse index {idx} out of range")))?;
            let tok = lex.token(&[',', '}'])?;
            entries.push((idx, parse_value(attr, tok, line_no)?));
            if lex.eat(',') {
                continue;
            }
            if lex.eat('}') {
                break;
            }
            return Err(Error::arff(line_no, "expected ',' or '}' in sparse instance"));
        }
        return finish_line(lex, Instance::Sparse(entries));
    }

    let mut values = Vec::with_capacity(attrs.len());
    loop {
        let tok = lex.token(&[','])?;
        let attr = attrs
            .get(values.len())
            .ok_or_else(|| Error::arff(line_no, format!("too many values: expected {}", attrs.len())))?;
        values.push(parse_value(attr, tok, line_no)?);
        if lex.eat(',') {
            continue;
        }
        if lex.at_end() {
            break;
        }
        return Err(Error::arff(line_no, "expected ',' between values"));
    }
    if values.len() != attrs.len() {
        return Err(Error::arff(
            line_no,
            format!("wrong value count: got {}, expected {}", values.len(), attrs.len()),
        ));
    }
    Ok(Instance::Dense(values))
}

fn finish_line(mut lex: Lexer, inst: Instance) -> Result<Instance> {
    if lex.at_end() {
        Ok(inst)
    } else {
        Err(lex.err("trailing text after sparse instance"))
    }
}
