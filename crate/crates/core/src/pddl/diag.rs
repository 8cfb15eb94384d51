use std::fmt;

use serde::{Deserialize, Serialize};

/// A location in source text. Lines and columns are 1-based and count
/// characters, `offset` is the byte offset of the first character.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub length: u32,
    pub offset: usize,
}

impl Span {
    pub fn new(line: u32, column: u32, length: u32, offset: usize) -> Self {
        Span {
            line,
            column,
            length,
            offset,
        }
    }

    /// True when the span lies inside `source`.
    pub fn within(&self, source: &str) -> bool {
        if self.offset > source.len() {
            return false;
        }
        let rest = &source[self.offset..];
        (self.length as usize) <= rest.chars().count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// Stable diagnostic codes.
pub mod codes {
    pub const LEX: &str = "lex-error";
    pub const UNBALANCED: &str = "unbalanced-parens";
    pub const SYNTAX: &str = "syntax-error";
    pub const UNSUPPORTED: &str = "unsupported-construct";
    pub const UNSUPPORTED_REQUIREMENT: &str = "unsupported-requirement";
    pub const DUPLICATE: &str = "duplicate-declaration";
    pub const UNKNOWN_TYPE: &str = "unknown-type";
    pub const UNKNOWN_PREDICATE: &str = "unknown-predicate";
    pub const UNKNOWN_OBJECT: &str = "unknown-object";
    pub const UNDECLARED_VARIABLE: &str = "undeclared-variable";
    pub const ARITY: &str = "arity-mismatch";
    pub const TYPE_MISMATCH: &str = "type-mismatch";
    pub const TYPE_CYCLE: &str = "type-cycle";
    pub const ADD_DEL_CONFLICT: &str = "add-del-conflict";
    pub const DUPLICATE_INIT: &str = "duplicate-init";
    pub const DOMAIN_MISMATCH: &str = "domain-mismatch";
    pub const IGNORED: &str = "ignored-section";
    pub const UNKNOWN_ACTION: &str = "unknown-action";
    pub const UNMAPPED: &str = "unmapped-symbol";
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: &str, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.to_string(),
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Renders as `file:line:col: severity[code]: message`.
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}[{}]: {}",
            file, self.span.line, self.span.column, self.severity, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}[{}]: {}",
            self.span.line, self.span.column, self.severity, self.code, self.message
        )
    }
}

/// A non-empty batch of diagnostics, at least one of which is an error.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.0.iter().any(|d| d.code == code)
    }

    pub fn render(&self, file: &str) -> String {
        self.0
            .iter()
            .map(|d| d.render(file))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}
