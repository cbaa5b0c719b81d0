//! The line-oriented family format.
//!
//! ```text
//! # comment
//! monoid N
//! context Student Teacher
//! Alice Charlie : 2
//! Bob David
//! ```
//!
//! Rows list values in the order of their `context` line; the weight after
//! `:` defaults to 1.

use std::collections::BTreeSet;
use std::fmt;

use kfam_core::{violations, Assignment, ContextualFamily, KRelation, MonoidKind, MonoidValue, Value, Variable};

/// An error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for Diagnostic {}

fn at(line: usize, column: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
pub struct ContextBlock {
    pub line: usize,
    pub vars: Vec<String>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub line: usize,
    pub values: Vec<String>,
    pub weight: MonoidValue,
}

/// A syntactically valid family file, not yet checked for consistency.
#[derive(Debug, Clone)]
pub struct FamilyDocument {
    pub kind: MonoidKind,
    pub blocks: Vec<ContextBlock>,
}

/// Why a document does not describe a contextual family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyError {
    Syntax(Diagnostic),
    /// Well-formed relations that disagree somewhere; one line per
    /// disagreement.
    Inconsistent(Vec<String>),
    Invalid(String),
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::Syntax(d) => write!(f, "{d}"),
            FamilyError::Inconsistent(v) => write!(f, "{}", v.join("\n")),
            FamilyError::Invalid(m) => write!(f, "{m}"),
        }
    }
}

fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn is_value(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || "_-'.".contains(c))
}

pub fn parse_document(text: &str) -> Result<FamilyDocument, Diagnostic> {
    let mut kind: Option<MonoidKind> = None;
    let mut blocks: Vec<ContextBlock> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(&(col, head)) = toks.first() else { continue };
        match head {
            "monoid" => {
                if kind.is_some() {
                    return Err(at(line, col + 1, "monoid declared twice"));
                }
                let [_, (c, k)] = toks[..] else {
                    return Err(at(line, col + 1, "expected `monoid B`, `monoid N` or `monoid Q`"));
                };
                kind = Some(k.parse().map_err(|_| at(line, c + 1, format!("unknown monoid `{k}`")))?);
            }
            "context" => {
                if kind.is_none() {
                    return Err(at(line, col + 1, "`monoid` must come before the first context"));
                }
                if toks.len() < 2 {
                    return Err(at(line, col + 1, "a context needs at least one variable"));
                }
                let mut vars = Vec::new();
                for &(c, v) in &toks[1..] {
                    if !is_identifier(v) {
                        return Err(at(line, c + 1, format!("`{v}` is not a variable name")));
                    }
                    if vars.iter().any(|w| w == v) {
                        return Err(at(line, c + 1, format!("variable `{v}` repeated")));
                    }
                    vars.push(v.to_string());
                }
                blocks.push(ContextBlock {
                    line,
                    vars,
                    rows: Vec::new(),
                });
            }
            _ => {
                let kind = kind.ok_or_else(|| at(line, col + 1, "expected `monoid` declaration"))?;
                let Some(block) = blocks.last_mut() else {
                    return Err(at(line, col + 1, "row before any `context` line"));
                };
                let (vals, weight) = match content.find(':') {
                    Some(p) => (&toks[..], Some(p)),
                    None => (&toks[..], None),
                };
                let vals: Vec<(usize, &str)> = vals
                    .iter()
                    .copied()
                    .filter(|&(c, _)| weight.map_or(true, |p| c < p))
                    .collect();
                let weight = match weight {
                    None => MonoidValue::one(kind),
                    Some(p) => {
                        let rest = tokens(&content[p + 1..]);
                        let [(c, w)] = rest[..] else {
                            return Err(at(line, p + 2, "expected exactly one weight after `:`"));
                        };
                        let w_col = p + 1 + c + 1;
                        let w = MonoidValue::parse(kind, w)
                            .map_err(|_| at(line, w_col, format!("`{w}` is not a {kind} value")))?;
                        if w.is_zero() {
                            return Err(at(line, w_col, "zero weights are not allowed; leave the row out"));
                        }
                        w
                    }
                };
                if vals.len() != block.vars.len() {
                    let col = vals.get(block.vars.len()).map_or(content.trim_end().len() + 1, |t| t.0 + 1);
                    return Err(at(
                        line,
                        col,
                        format!(
                            "row has {} values but context on line {} has {} variables",
                            vals.len(),
                            block.line,
                            block.vars.len()
                        ),
                    ));
                }
                if let Some(&(c, v)) = vals.iter().find(|(_, v)| !is_value(v)) {
                    return Err(at(line, c + 1, format!("`{v}` is not a value")));
                }
                let values: Vec<String> = vals.iter().map(|(_, v)| v.to_string()).collect();
                if block.rows.iter().any(|r| r.values == values) {
                    return Err(at(line, col + 1, "row repeated in this context"));
                }
                block.rows.push(Row { line, values, weight });
            }
        }
    }
    let kind = kind.ok_or_else(|| at(1, 1, "missing `monoid` declaration"))?;
    Ok(FamilyDocument { kind, blocks })
}

impl FamilyDocument {
    pub fn relations(&self) -> Result<Vec<KRelation>, FamilyError> {
        let mut seen: Vec<(BTreeSet<&str>, usize)> = Vec::new();
        let mut out = Vec::new();
        for b in &self.blocks {
            let key: BTreeSet<&str> = b.vars.iter().map(String::as_str).collect();
            if let Some((_, first)) = seen.iter().find(|(k, _)| *k == key) {
                return Err(FamilyError::Syntax(at(
                    b.line,
                    1,
                    format!("context repeats the one on line {first}"),
                )));
            }
            seen.push((key, b.line));
            let vars = b.vars.iter().map(|v| Variable::new(v)).collect();
            let rows = b.rows.iter().map(|r| {
                let mut s = Assignment::new();
                for (v, a) in b.vars.iter().zip(&r.values) {
                    s.bind(Variable::new(v), Value::new(a));
                }
                (s, r.weight.clone())
            });
            out.push(KRelation::from_rows(vars, self.kind, rows).map_err(|e| FamilyError::Invalid(e.to_string()))?);
        }
        Ok(out)
    }

    /// Checks local consistency, reporting every disagreement.
    pub fn validate(&self) -> Result<ContextualFamily, FamilyError> {
        let relations = self.relations()?;
        let found = violations(&relations).map_err(|e| FamilyError::Invalid(e.to_string()))?;
        if !found.is_empty() {
            return Err(FamilyError::Inconsistent(found.iter().map(ToString::to_string).collect()));
        }
        ContextualFamily::check_local_consistency(self.kind, relations).map_err(|e| FamilyError::Invalid(e.to_string()))
    }
}

pub fn parse_family(text: &str) -> Result<ContextualFamily, FamilyError> {
    parse_document(text).map_err(FamilyError::Syntax)?.validate()
}

/// Canonical text: contexts in family order with sorted variables, rows
/// sorted, weights written unless the family is Boolean.
pub fn serialize_family(f: &ContextualFamily) -> String {
    let mut out = format!("monoid {}\n", f.kind());
    for r in f.relations() {
        out.push_str("context");
        for v in r.vars().iter() {
            out.push(' ');
            out.push_str(v.name());
        }
        out.push('\n');
        for (s, w) in r.rows() {
            let vals: Vec<&str> = s.values().map(Value::token).collect();
            out.push_str(&vals.join(" "));
            if f.kind() != MonoidKind::B {
                out.push_str(" : ");
                out.push_str(&w.to_string());
            }
            out.push('\n');
        }
    }
    out
}
