//! The analysis-script language.
//!
//! ```text
//! script  := command*
//! command := IDENT "(" [arg ("," arg)*] ")"
//! arg     := IDENT ":" value
//! value   := STRING | NUMBER | BOOLEAN | "[" value ("," value)* "]"
//! ```
//!
//! Whitespace, including newlines, is insignificant between tokens.

mod exec;
mod lexer;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::ClusterConfig;
use crate::model::YearFilter;

pub use exec::{execute, ExecError, ExecErrorKind, ExecutionReport, Bindings, StepReport};
use lexer::{Lexer, Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScriptError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("error in `{command}` at line {line}, column {column}: {message}")]
    Semantic { command: String, line: usize, column: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommandName {
    #[serde(rename = "importFile")]
    ImportFile,
    #[serde(rename = "cluster")]
    Cluster,
    #[serde(rename = "merge")]
    Merge,
    #[serde(rename = "removeCR")]
    RemoveCr,
    #[serde(rename = "exportFile")]
    ExportFile,
    #[serde(rename = "saveFile")]
    SaveFile,
}

impl CommandName {
    pub const ALL: [CommandName; 6] = [
        CommandName::ImportFile,
        CommandName::Cluster,
        CommandName::Merge,
        CommandName::RemoveCr,
        CommandName::ExportFile,
        CommandName::SaveFile,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::ImportFile => "importFile",
            CommandName::Cluster => "cluster",
            CommandName::Merge => "merge",
            CommandName::RemoveCr => "removeCR",
            CommandName::ExportFile => "exportFile",
            CommandName::SaveFile => "saveFile",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            CommandName::ImportFile => &["file", "files", "type", "RPY", "PY", "maxCR"],
            CommandName::Cluster => &["threshold", "volume", "page", "DOI"],
            CommandName::Merge => &[],
            CommandName::RemoveCr => &["N_CR"],
            CommandName::ExportFile => &["file", "type"],
            CommandName::SaveFile => &["file"],
        }
    }
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Num(f64),
    Str(String),
    Array(Vec<Value>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Num(_) => "number",
            Value::Str(_) => "string",
            Value::Array(_) => "array",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(n) => write!(f, "{n}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Value::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptCommand {
    pub name: CommandName,
    pub args: Vec<(String, Value)>,
    #[serde(default)]
    pub line: usize,
    #[serde(default)]
    pub column: usize,
}

impl ScriptCommand {
    pub fn new(name: CommandName, args: Vec<(String, Value)>) -> Self {
        Self { name, args, line: 0, column: 0 }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.args.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn error(&self, message: impl Into<String>) -> ScriptError {
        ScriptError::Semantic {
            command: self.name.to_string(),
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn check_keys(&self) -> Result<(), ScriptError> {
        let allowed = self.name.allowed_keys();
        for (i, (k, _)) in self.args.iter().enumerate() {
            if !allowed.contains(&k.as_str()) {
                return Err(self.error(format!("unknown argument `{k}`")));
            }
            if self.args[..i].iter().any(|(p, _)| p == k) {
                return Err(self.error(format!("duplicate argument `{k}`")));
            }
        }
        Ok(())
    }

    fn string(&self, key: &str) -> Result<Option<String>, ScriptError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s.clone())),
            Some(v) => Err(self.error(format!("`{key}` must be a string, got {}", v.kind()))),
        }
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool, ScriptError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Bool(b)) => Ok(*b),
            Some(v) => Err(self.error(format!("`{key}` must be a boolean, got {}", v.kind()))),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ScriptError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Num(n)) => Ok(Some(*n)),
            Some(v) => Err(self.error(format!("`{key}` must be a number, got {}", v.kind()))),
        }
    }

    fn count(&self, key: &str, n: f64) -> Result<u64, ScriptError> {
        if n >= 0.0 && n.fract() == 0.0 && n <= u64::MAX as f64 {
            Ok(n as u64)
        } else {
            Err(self.error(format!("`{key}` must be a non-negative integer, got {n}")))
        }
    }

    fn year_filter(&self, key: &str) -> Result<YearFilter, ScriptError> {
        let bad = || self.error(format!("`{key}` must be [lo, hi, includeMissing]"));
        match self.get(key) {
            None => Ok(YearFilter::default()),
            Some(Value::Array(items)) => match items.as_slice() {
                [Value::Num(lo), Value::Num(hi), Value::Bool(b)] => {
                    let (lo, hi) = (*lo, *hi);
                    if lo.fract() != 0.0 || hi.fract() != 0.0 || lo > hi {
                        return Err(bad());
                    }
                    Ok(YearFilter::new(lo as i32, hi as i32, *b))
                }
                _ => Err(bad()),
            },
            Some(_) => Err(bad()),
        }
    }

    /// Validates arguments and converts to an executable step.
    pub fn step(&self) -> Result<Step, ScriptError> {
        self.check_keys()?;
        match self.name {
            CommandName::ImportFile => {
                let files = match (self.get("file"), self.get("files")) {
                    (Some(_), Some(_)) => return Err(self.error("give either `file` or `files`")),
                    (Some(_), None) => vec![self.string("file")?.unwrap_or_default()],
                    (None, Some(Value::Array(items))) if !items.is_empty() => items
                        .iter()
                        .map(|v| match v {
                            Value::Str(s) => Ok(s.clone()),
                            _ => Err(self.error("`files` must be an array of strings")),
                        })
                        .collect::<Result<_, _>>()?,
                    (None, Some(_)) => {
                        return Err(self.error("`files` must be a non-empty array of strings"))
                    }
                    (None, None) => return Err(self.error("missing `file` or `files`")),
                };
                let kind = self.string("type")?.unwrap_or_else(|| "WOS".into());
                if kind != "WOS" {
                    return Err(self.error(format!("unsupported import type {kind:?}")));
                }
                let max_cr = match self.number("maxCR")? {
                    Some(n) => self.count("maxCR", n)?,
                    None => 0,
                };
                Ok(Step::Import {
                    files,
                    rpy: self.year_filter("RPY")?,
                    py: self.year_filter("PY")?,
                    max_cr,
                })
            }
            CommandName::Cluster => {
                let defaults = ClusterConfig::default();
                let threshold = self.number("threshold")?.unwrap_or(defaults.threshold);
                if !(0.0..=1.0).contains(&threshold) {
                    return Err(self.error(format!("threshold {threshold} outside [0, 1]")));
                }
                Ok(Step::Cluster(ClusterConfig {
                    threshold,
                    use_volume: self.boolean("volume", defaults.use_volume)?,
                    use_page: self.boolean("page", defaults.use_page)?,
                    use_doi: self.boolean("DOI", defaults.use_doi)?,
                }))
            }
            CommandName::Merge => Ok(Step::Merge),
            CommandName::RemoveCr => match self.get("N_CR") {
                Some(Value::Array(items)) => match items.as_slice() {
                    [Value::Num(lo), Value::Num(hi)] => {
                        let (lo, hi) = (self.count("N_CR", *lo)?, self.count("N_CR", *hi)?);
                        if lo > hi {
                            return Err(self.error("`N_CR` range is inverted"));
                        }
                        Ok(Step::RemoveCr { lo, hi })
                    }
                    _ => Err(self.error("`N_CR` must be [lo, hi]")),
                },
                _ => Err(self.error("missing `N_CR: [lo, hi]`")),
            },
            CommandName::ExportFile => {
                let file = self.string("file")?.ok_or_else(|| self.error("missing `file`"))?;
                let kind = match self.string("type")?.as_deref() {
                    Some("CSV_CR") => ExportKind::CsvCr,
                    Some("CSV_GRAPH") => ExportKind::CsvGraph,
                    Some(other) => return Err(self.error(format!("unsupported export type {other:?}"))),
                    None => return Err(self.error("missing `type`")),
                };
                Ok(Step::Export { file, kind })
            }
            CommandName::SaveFile => {
                let file = self.string("file")?.ok_or_else(|| self.error("missing `file`"))?;
                Ok(Step::Save { file })
            }
        }
    }
}

impl fmt::Display for ScriptCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (k, v)) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str(")")
    }
}

/// One command per line.
pub fn print_script(commands: &[ScriptCommand]) -> String {
    commands.iter().map(|c| format!("{c}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExportKind {
    #[serde(rename = "CSV_CR")]
    CsvCr,
    #[serde(rename = "CSV_GRAPH")]
    CsvGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Import { files: Vec<String>, rpy: YearFilter, py: YearFilter, max_cr: u64 },
    Cluster(ClusterConfig),
    Merge,
    RemoveCr { lo: u64, hi: u64 },
    Export { file: String, kind: ExportKind },
    Save { file: String },
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<Token>,
}

impl<'a> Parser<'a> {
    fn next(&mut self) -> Result<Token, ScriptError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lexer.next_token(),
        }
    }

    fn peek(&mut self) -> Result<&Token, ScriptError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next_token()?);
        }
        Ok(self.peeked.as_ref().expect("peeked"))
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, ScriptError> {
        let t = self.next()?;
        if std::mem::discriminant(&t.kind) == std::mem::discriminant(&kind) {
            Ok(t)
        } else {
            Err(t.error(format!("expected {what}, found {}", t.kind)))
        }
    }

    fn command(&mut self) -> Result<ScriptCommand, ScriptError> {
        let head = self.next()?;
        let ident = match &head.kind {
            TokenKind::Ident(s) => s.clone(),
            other => return Err(head.error(format!("expected command name, found {other}"))),
        };
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek()?.kind != TokenKind::RParen {
            loop {
                let key = self.next()?;
                let key = match key.kind {
                    TokenKind::Ident(s) => s,
                    ref other => return Err(key.error(format!("expected argument name, found {other}"))),
                };
                self.expect(TokenKind::Colon, "`:`")?;
                args.push((key, self.value()?));
                let sep = self.next()?;
                match sep.kind {
                    TokenKind::Comma => continue,
                    TokenKind::RParen => break,
                    ref other => return Err(sep.error(format!("expected `,` or `)`, found {other}"))),
                }
            }
        } else {
            self.next()?;
        }
        let name = CommandName::from_name(&ident).ok_or_else(|| ScriptError::Semantic {
            command: ident.clone(),
            line: head.line,
            column: head.column,
            message: format!("unknown command `{ident}`"),
        })?;
        Ok(ScriptCommand { name, args, line: head.line, column: head.column })
    }

    fn value(&mut self) -> Result<Value, ScriptError> {
        let t = self.next()?;
        match t.kind {
            TokenKind::Str(s) => Ok(Value::Str(s)),
            TokenKind::Num(n) => Ok(Value::Num(n)),
            TokenKind::Ident(ref s) if s == "true" => Ok(Value::Bool(true)),
            TokenKind::Ident(ref s) if s == "false" => Ok(Value::Bool(false)),
            TokenKind::LBracket => {
                let mut items = vec![self.value()?];
                loop {
                    let sep = self.next()?;
                    match sep.kind {
                        TokenKind::Comma => items.push(self.value()?),
                        TokenKind::RBracket => break,
                        ref other => return Err(sep.error(format!("expected `,` or `]`, found {other}"))),
                    }
                }
                Ok(Value::Array(items))
            }
            ref other => Err(t.error(format!("expected a value, found {other}"))),
        }
    }
}

/// Parses and validates a script.
pub fn parse_script(text: &str) -> Result<Vec<ScriptCommand>, ScriptError> {
    let mut parser = Parser { lexer: Lexer::new(text), peeked: None };
    let mut out = Vec::new();
    while parser.peek()?.kind != TokenKind::Eof {
        let cmd = parser.command()?;
        cmd.step()?;
        out.push(cmd);
    }
    Ok(out)
}
