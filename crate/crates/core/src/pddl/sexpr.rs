//! Tokenizer and s-expression reader. Unbalanced input is repaired (stray `)`
//! skipped, unclosed `(` closed at end of input) so later stages can still
//! report semantic faults in the same pass.

use super::{codes, Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Sexpr {
    Symbol(Token),
    List {
        items: Vec<Sexpr>,
        open: Span,
        /// `None` when the list was closed by error recovery.
        close: Option<Span>,
    },
}

impl Sexpr {
    pub fn span(&self) -> Span {
        match self {
            Sexpr::Symbol(t) => t.span,
            Sexpr::List { open, .. } => *open,
        }
    }

    pub fn as_symbol(&self) -> Option<&Token> {
        match self {
            Sexpr::Symbol(t) => Some(t),
            Sexpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::Symbol(_) => None,
            Sexpr::List { items, .. } => Some(items),
        }
    }

    /// Lower-cased head symbol of a list, if any.
    pub fn head(&self) -> Option<String> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(Sexpr::as_symbol)
            .map(|t| t.text.to_lowercase())
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Lexeme {
    Open,
    Close,
    Symbol(String),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '?' | ':' | '=' | '.' | '<' | '>' | '+' | '*' | '/' | '!' | '@' | '#' | '$' | '%' | '&' | '^' | '~')
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self, length: u32) -> Span {
        Span::new(self.line, self.col, length, self.pos)
    }

    fn next(&mut self, diags: &mut Vec<Diagnostic>) -> Option<(Lexeme, Span)> {
        loop {
            let c = self.peek()?;
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c == '(' {
                let span = self.here(1);
                self.bump();
                return Some((Lexeme::Open, span));
            } else if c == ')' {
                let span = self.here(1);
                self.bump();
                return Some((Lexeme::Close, span));
            } else if c == '-' {
                // `-` always stands alone: `?r -room` is `?r - room`.
                let span = self.here(1);
                self.bump();
                return Some((Lexeme::Symbol("-".to_string()), span));
            } else if is_symbol_char(c) {
                let start = self.here(0);
                let mut text = String::new();
                while let Some(c) = self.peek() {
                    if !is_symbol_char(c) {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                let span = Span::new(
                    start.line,
                    start.column,
                    text.chars().count() as u32,
                    start.offset,
                );
                return Some((Lexeme::Symbol(text), span));
            } else {
                let span = self.here(1);
                diags.push(Diagnostic::error(
                    codes::LEX,
                    format!("unexpected character `{c}`"),
                    span,
                ));
                self.bump();
            }
        }
    }
}

/// Reads every top-level form in `src`.
pub fn read(src: &str) -> (Vec<Sexpr>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut lexer = Lexer::new(src);
    // Stack of open lists: (open span, items).
    let mut stack: Vec<(Span, Vec<Sexpr>)> = Vec::new();
    let mut top = Vec::new();

    while let Some((lexeme, span)) = lexer.next(&mut diags) {
        match lexeme {
            Lexeme::Open => stack.push((span, Vec::new())),
            Lexeme::Close => match stack.pop() {
                Some((open, items)) => {
                    let list = Sexpr::List {
                        items,
                        open,
                        close: Some(span),
                    };
                    match stack.last_mut() {
                        Some((_, parent)) => parent.push(list),
                        None => top.push(list),
                    }
                }
                None => diags.push(Diagnostic::error(
                    codes::UNBALANCED,
                    "unmatched `)`",
                    span,
                )),
            },
            Lexeme::Symbol(text) => {
                let sym = Sexpr::Symbol(Token { text, span });
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(sym),
                    None => top.push(sym),
                }
            }
        }
    }

    // Close whatever is still open, innermost first.
    while let Some((open, items)) = stack.pop() {
        let what = items
            .first()
            .and_then(Sexpr::as_symbol)
            .map(|t| {
                let next = items.get(1).and_then(Sexpr::as_symbol).map(|t| t.text.as_str());
                match next {
                    Some(n) if t.text.starts_with(':') => format!(" `({} {}`", t.text, n),
                    _ => format!(" `({}`", t.text),
                }
            })
            .unwrap_or_default();
        diags.push(Diagnostic::error(
            codes::UNBALANCED,
            format!("`(`{what} is never closed"),
            open,
        ));
        let list = Sexpr::List {
            items,
            open,
            close: None,
        };
        match stack.last_mut() {
            Some((_, parent)) => parent.push(list),
            None => top.push(list),
        }
    }

    (top, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_dash_prefixed_types() {
        let (forms, diags) = read("(?r -room ?s -seat)");
        assert!(diags.is_empty());
        let items = forms[0].as_list().unwrap();
        let texts: Vec<_> = items
            .iter()
            .map(|s| s.as_symbol().unwrap().text.clone())
            .collect();
        assert_eq!(texts, ["?r", "-", "room", "?s", "-", "seat"]);
    }

    #[test]
    fn comments_and_spans() {
        let src = "; header\n(a\n  (b c)) ; trailing";
        let (forms, diags) = read(src);
        assert!(diags.is_empty());
        assert_eq!(forms.len(), 1);
        let inner = &forms[0].as_list().unwrap()[1];
        assert_eq!(inner.span().line, 3);
        assert_eq!(inner.span().column, 3);
    }

    #[test]
    fn unclosed_reports_each_open_paren() {
        let (forms, diags) = read("(define (x");
        assert_eq!(forms.len(), 1);
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.code == codes::UNBALANCED));
        assert_eq!(diags[0].span.column, 9);
    }

    #[test]
    fn stray_close_and_lex_errors() {
        let (_, diags) = read("(a)) {b}");
        let codes: Vec<_> = diags.iter().map(|d| d.code.as_str()).collect();
        assert_eq!(codes, [codes::UNBALANCED, codes::LEX, codes::LEX]);
    }
}
