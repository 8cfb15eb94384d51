//! Refinement mappings and their `.map` concrete syntax.
//!
//! ```text
//! types:
//!   accommodation = hotel | airbnb
//! fluents:
//!   booked_accommodation(?r, ?a) = booked_hotel(?r, ?a) or booked_airbnb(?r, ?a)
//!   doneBookingAccommodation = bookedHotelOrAirbnb
//! actions:
//!   book_accommodation(?a, ?r) = book_hotel(?a, ?r) | book_airbnb(?a, ?r)
//!   login(?u, ?p) = enter_UserName(?u) ; enter_passWord(?u, ?p)
//!   visit(?w) = pick ?h:hall . (schedule(?w, ?h) ; lecture(?w, ?h))
//! ```
//!
//! `;` binds tighter than `|`, and `pick` extends as far right as possible.
//! Formulas use `not`, `and`, `or` (in decreasing precedence), `true` and
//! `false`. `skip` is the empty program. Terms are `?variables` or object names. `#` starts a comment. An
//! entry continues onto following lines while parentheses are open or when an
//! operator ends one line or starts the next.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{codes, Diagnostic, Diagnostics, DomainAst, Ident, Span, TypeHierarchy};

/// Argument of an atom or action call: a variable or an object constant.
pub type Term = Ident;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Program {
    Act { schema: Ident, args: Vec<Term> },
    Seq(Vec<Program>),
    Choice(Vec<Program>),
    Pick { var: Ident, ty: Ident, body: Box<Program> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    Const(bool),
    Atom { predicate: Ident, args: Vec<Term> },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub hl: Ident,
    pub ll: Vec<Ident>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluentEntry {
    pub hl: Ident,
    pub params: Vec<Ident>,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub hl: Ident,
    pub params: Vec<Ident>,
    pub program: Program,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementMapping {
    pub types: Vec<TypeEntry>,
    pub fluents: Vec<FluentEntry>,
    pub actions: Vec<ActionEntry>,
}

impl RefinementMapping {
    pub fn type_image(&self, hl: &Ident) -> Option<&[Ident]> {
        if hl.canonical() == "object" {
            return Some(std::slice::from_ref(OBJECT.get_or_init(Ident::object)));
        }
        self.types.iter().find(|t| &t.hl == hl).map(|t| t.ll.as_slice())
    }

    pub fn fluent(&self, hl: &Ident) -> Option<&FluentEntry> {
        self.fluents.iter().find(|f| &f.hl == hl)
    }

    pub fn action(&self, hl: &Ident) -> Option<&ActionEntry> {
        self.actions.iter().find(|a| &a.hl == hl)
    }

    /// Maps every symbol of `domain` to itself.
    pub fn identity(domain: &DomainAst) -> Self {
        let vars = |n: usize| (0..n).map(|i| Ident::new(format!("?x{i}"))).collect::<Vec<_>>();
        RefinementMapping {
            types: domain
                .types
                .names()
                .map(|t| TypeEntry {
                    hl: t.clone(),
                    ll: vec![t.clone()],
                })
                .collect(),
            fluents: domain
                .predicates
                .iter()
                .map(|p| FluentEntry {
                    hl: p.name.clone(),
                    params: vars(p.arity()),
                    formula: Formula::Atom {
                        predicate: p.name.clone(),
                        args: vars(p.arity()),
                    },
                })
                .collect(),
            actions: domain
                .actions
                .iter()
                .map(|a| ActionEntry {
                    hl: a.name.clone(),
                    params: vars(a.params.len()),
                    program: Program::Act {
                        schema: a.name.clone(),
                        args: vars(a.params.len()),
                    },
                })
                .collect(),
        }
    }

    /// Removes the `index`-th alternative of the action's top-level choice.
    /// Returns false when the action has no such alternative.
    pub fn remove_choice_branch(&mut self, hl_action: &str, index: usize) -> bool {
        let Some(entry) = self.actions.iter_mut().find(|a| a.hl == Ident::new(hl_action)) else {
            return false;
        };
        match &mut entry.program {
            Program::Choice(branches) if index < branches.len() => {
                branches.remove(index);
                if branches.len() == 1 {
                    entry.program = branches.pop().unwrap();
                }
                true
            }
            _ => false,
        }
    }
}

static OBJECT: std::sync::OnceLock<Ident> = std::sync::OnceLock::new();

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Act { schema, args } => write_call(f, schema, args),
            Program::Seq(ps) if ps.is_empty() => f.write_str("skip"),
            Program::Seq(ps) => write_joined(f, ps, " ; "),
            Program::Choice(ps) => write_joined(f, ps, " | "),
            Program::Pick { var, ty, body } => write!(f, "(pick {var}:{ty} . {body})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(b) => write!(f, "{b}"),
            Formula::Atom { predicate, args } => write_call(f, predicate, args),
            Formula::Not(x) => write!(f, "not {x}"),
            Formula::And(xs) => write_joined(f, xs, " and "),
            Formula::Or(xs) => write_joined(f, xs, " or "),
        }
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &Ident, args: &[Term]) -> fmt::Result {
    write!(f, "{name}")?;
    if !args.is_empty() {
        let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", args.join(", "))?;
    }
    Ok(())
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T], sep: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

impl fmt::Display for RefinementMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "types:")?;
        for t in &self.types {
            let ll: Vec<String> = t.ll.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  {} = {}", t.hl, ll.join(" | "))?;
        }
        writeln!(f, "fluents:")?;
        for e in &self.fluents {
            f.write_str("  ")?;
            write_call(f, &e.hl, &e.params)?;
            writeln!(f, " = {}", e.formula)?;
        }
        writeln!(f, "actions:")?;
        for e in &self.actions {
            f.write_str("  ")?;
            write_call(f, &e.hl, &e.params)?;
            writeln!(f, " = {}", e.program)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Open,
    Close,
    Comma,
    Bar,
    Semi,
    Dot,
    Colon,
    Eq,
}

#[derive(Clone, Debug)]
struct Lexed {
    tok: Tok,
    span: Span,
}

/// A logical entry: one or more physical lines joined.
struct Entry {
    section: Section,
    toks: Vec<Lexed>,
    span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Types,
    Fluents,
    Actions,
}

fn line_offsets(src: &str) -> Vec<usize> {
    std::iter::once(0)
        .chain(src.match_indices('\n').map(|(i, _)| i + 1))
        .collect()
}

fn lex_line(line: &str, lineno: u32, base: usize, diags: &mut Vec<Diagnostic>) -> Vec<Lexed> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let col = line[..i].chars().count() as u32 + 1;
        let span = |len: u32| Span::new(lineno, col, len, base + i);
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Bar),
            ';' => Some(Tok::Semi),
            '.' => Some(Tok::Dot),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Lexed { tok, span: span(1) });
            chars.next();
            continue;
        }
        if c.is_alphanumeric() || c == '?' || c == '_' {
            let mut name = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_alphanumeric() || c == '?' || c == '_' || c == '-' {
                    name.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            let len = name.chars().count() as u32;
            out.push(Lexed {
                tok: Tok::Name(name),
                span: span(len),
            });
            continue;
        }
        diags.push(Diagnostic::error(
            codes::LEX,
            format!("unexpected character `{c}`"),
            span(1),
        ));
        chars.next();
    }
    out
}

fn depth_change(toks: &[Lexed]) -> i32 {
    toks.iter()
        .map(|t| match t.tok {
            Tok::Open => 1,
            Tok::Close => -1,
            _ => 0,
        })
        .sum()
}

fn starts_with_operator(toks: &[Lexed]) -> bool {
    match toks.first().map(|t| &t.tok) {
        Some(Tok::Bar | Tok::Semi | Tok::Close) => true,
        Some(Tok::Name(n)) => matches!(n.to_lowercase().as_str(), "and" | "or"),
        _ => false,
    }
}

fn ends_with_operator(toks: &[Lexed]) -> bool {
    match toks.last().map(|t| &t.tok) {
        Some(Tok::Eq | Tok::Bar | Tok::Semi | Tok::Dot) => true,
        Some(Tok::Name(n)) => matches!(n.to_lowercase().as_str(), "and" | "or" | "not"),
        _ => false,
    }
}

fn split_entries(src: &str, diags: &mut Vec<Diagnostic>) -> Vec<Entry> {
    let offsets = line_offsets(src);
    let mut entries: Vec<Entry> = Vec::new();
    let mut section: Option<Section> = None;
    let mut depth = 0;
    for (n, line) in src.lines().enumerate() {
        let lineno = n as u32 + 1;
        let toks = lex_line(line, lineno, offsets[n], diags);
        if toks.is_empty() {
            continue;
        }
        let continuing = entries
            .last()
            .is_some_and(|e| depth > 0 || ends_with_operator(&e.toks) || starts_with_operator(&toks));
        if continuing {
            let e = entries.last_mut().unwrap();
            depth += depth_change(&toks);
            e.toks.extend(toks);
            continue;
        }
        if let [Lexed { tok: Tok::Name(name), .. }, Lexed { tok: Tok::Colon, .. }] = toks.as_slice() {
            let s = match name.to_lowercase().as_str() {
                "types" => Some(Section::Types),
                "fluents" => Some(Section::Fluents),
                "actions" => Some(Section::Actions),
                _ => None,
            };
            if let Some(s) = s {
                section = Some(s);
                depth = 0;
                continue;
            }
        }
        let Some(sec) = section else {
            diags.push(Diagnostic::error(
                codes::SYNTAX,
                "entry outside a section; expected `types:`, `fluents:` or `actions:` first",
                toks[0].span,
            ));
            continue;
        };
        depth = depth_change(&toks);
        let span = toks[0].span;
        entries.push(Entry {
            section: sec,
            toks,
            span,
        });
    }
    entries
}

// ---------------------------------------------------------------------------
// Parsing

struct P<'a> {
    toks: &'a [Lexed],
    pos: usize,
    end: Span,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> P<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(codes::SYNTAX, msg, self.span()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn name(&mut self, what: &str) -> PResult<Ident> {
        match self.toks.get(self.pos) {
            Some(Lexed {
                tok: Tok::Name(n),
                span,
            }) => {
                self.pos += 1;
                Ok(Ident::with_span(n.clone(), *span))
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Name(n)) if n.eq_ignore_ascii_case(kw))
    }

    /// `name` or `name(a, b)`; commas are optional.
    fn call(&mut self, what: &str) -> PResult<(Ident, Vec<Term>)> {
        let name = self.name(what)?;
        let mut args = Vec::new();
        if self.eat(&Tok::Open) {
            while !self.eat(&Tok::Close) {
                if self.peek().is_none() {
                    return self.err("expected `)`");
                }
                if self.eat(&Tok::Comma) {
                    continue;
                }
                args.push(self.name("an argument")?);
            }
        }
        Ok((name, args))
    }

    fn program(&mut self) -> PResult<Program> {
        let mut alts = vec![self.seq()?];
        while self.eat(&Tok::Bar) {
            alts.push(self.seq()?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            Program::Choice(alts)
        })
    }

    fn seq(&mut self) -> PResult<Program> {
        let mut steps = vec![self.unit()?];
        while self.eat(&Tok::Semi) {
            steps.push(self.unit()?);
        }
        Ok(if steps.len() == 1 {
            steps.pop().unwrap()
        } else {
            Program::Seq(steps)
        })
    }

    fn unit(&mut self) -> PResult<Program> {
        if self.eat(&Tok::Open) {
            let p = self.program()?;
            self.expect(&Tok::Close, "`)`")?;
            return Ok(p);
        }
        if self.keyword("pick") {
            self.pos += 1;
            let var = self.name("a `?variable` after `pick`")?;
            if !var.is_variable() {
                return Err(Diagnostic::error(
                    codes::SYNTAX,
                    format!("`pick` binds a `?variable`, found `{var}`"),
                    var.span().unwrap_or(self.end),
                ));
            }
            self.expect(&Tok::Colon, "`:` and a type after the pick variable")?;
            let ty = self.name("a type")?;
            self.expect(&Tok::Dot, "`.` before the pick body")?;
            let body = self.program()?;
            return Ok(Program::Pick {
                var,
                ty,
                body: Box::new(body),
            });
        }
        if self.keyword("skip") {
            self.pos += 1;
            return Ok(Program::Seq(Vec::new()));
        }
        let (schema, args) = self.call("an action")?;
        Ok(Program::Act { schema, args })
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut xs = vec![self.conj()?];
        while self.keyword("or") {
            self.pos += 1;
            xs.push(self.conj()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Formula::Or(xs)
        })
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut xs = vec![self.neg()?];
        while self.keyword("and") {
            self.pos += 1;
            xs.push(self.neg()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Formula::And(xs)
        })
    }

    fn neg(&mut self) -> PResult<Formula> {
        if self.keyword("not") {
            self.pos += 1;
            return Ok(Formula::Not(Box::new(self.neg()?)));
        }
        if self.eat(&Tok::Open) {
            let f = self.formula()?;
            self.expect(&Tok::Close, "`)`")?;
            return Ok(f);
        }
        for (kw, v) in [("true", true), ("false", false)] {
            if self.keyword(kw) {
                self.pos += 1;
                return Ok(Formula::Const(v));
            }
        }
        let (predicate, args) = self.call("a predicate")?;
        Ok(Formula::Atom { predicate, args })
    }

    fn done(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            self.err("unexpected trailing input")
        } else {
            Ok(())
        }
    }
}

/// Parses a mapping and checks it against both domains.
pub fn parse_mapping(
    source: &str,
    hl: &DomainAst,
    ll: &DomainAst,
) -> Result<RefinementMapping, Diagnostics> {
    let mut diags = Vec::new();
    let entries = split_entries(source, &mut diags);
    let mut m = RefinementMapping {
        types: vec![],
        fluents: vec![],
        actions: vec![],
    };
    let mut spans: Vec<Span> = Vec::new();
    for e in &entries {
        let end = e.toks.last().map(|t| t.span).unwrap_or(e.span);
        let mut p = P {
            toks: &e.toks,
            pos: 0,
            end,
        };
        let parsed = (|| -> PResult<()> {
            let (lhs, params) = p.call("a high-level symbol")?;
            p.expect(&Tok::Eq, "`=`")?;
            match e.section {
                Section::Types => {
                    if !params.is_empty() {
                        return p.err("type entries take no parameters");
                    }
                    let mut ll_types = vec![p.name("a low-level type")?];
                    while p.eat(&Tok::Bar) {
                        ll_types.push(p.name("a low-level type")?);
                    }
                    p.done()?;
                    m.types.push(TypeEntry { hl: lhs, ll: ll_types });
                }
                Section::Fluents => {
                    let formula = p.formula()?;
                    p.done()?;
                    m.fluents.push(FluentEntry { hl: lhs, params, formula });
                }
                Section::Actions => {
                    let program = p.program()?;
                    p.done()?;
                    m.actions.push(ActionEntry { hl: lhs, params, program });
                }
            }
            Ok(())
        })();
        match parsed {
            Ok(()) => spans.push(e.span),
            Err(d) => diags.push(d),
        }
    }
    if diags.iter().any(Diagnostic::is_error) {
        return Err(Diagnostics(diags));
    }
    check(&m, hl, ll, &mut diags);
    if diags.iter().any(Diagnostic::is_error) {
        Err(Diagnostics(diags))
    } else {
        Ok(m)
    }
}

fn span_of(id: &Ident) -> Span {
    id.span().unwrap_or_else(|| Span::new(1, 1, 0, 0))
}

/// Two type names can share objects when one is a subtype of the other.
fn overlaps(types: &TypeHierarchy, a: &Ident, b: &Ident) -> bool {
    types.is_subtype(a, b) || types.is_subtype(b, a)
}

/// Static checks: symbols exist, arities agree, variables are bound, types
/// are compatible, and the mapping is total.
pub fn check(m: &RefinementMapping, hl: &DomainAst, ll: &DomainAst, diags: &mut Vec<Diagnostic>) {
    let mut err = |code: &str, msg: String, at: &Ident| diags.push(Diagnostic::error(code, msg, span_of(at)));

    let mut seen = HashSet::new();
    for t in &m.types {
        if !seen.insert(t.hl.clone()) {
            err(codes::DUPLICATE, format!("type `{}` mapped twice", t.hl), &t.hl);
        }
        if t.hl.canonical() == "object" || !hl.types.contains(&t.hl) {
            err(codes::UNKNOWN_TYPE, format!("`{}` is not a high-level type", t.hl), &t.hl);
        }
        for l in &t.ll {
            if !ll.types.contains(l) {
                err(codes::UNKNOWN_TYPE, format!("`{l}` is not a low-level type"), l);
            }
        }
    }
    for t in hl.types.names() {
        if m.type_image(t).is_none() {
            err(codes::UNMAPPED, format!("high-level type `{t}` has no mapping"), &Ident::new(""));
        }
    }

    // Low-level types a variable may take.
    let image = |ty: &Ident| -> Vec<Ident> { m.type_image(ty).map(<[Ident]>::to_vec).unwrap_or_default() };

    let mut seen = HashSet::new();
    for f in &m.fluents {
        if !seen.insert(f.hl.clone()) {
            err(codes::DUPLICATE, format!("fluent `{}` mapped twice", f.hl), &f.hl);
            continue;
        }
        let Some(schema) = hl.predicate(&f.hl) else {
            err(codes::UNKNOWN_PREDICATE, format!("`{}` is not a high-level predicate", f.hl), &f.hl);
            continue;
        };
        if schema.arity() != f.params.len() {
            err(
                codes::ARITY,
                format!("`{}` takes {} parameter(s), mapping gives {}", f.hl, schema.arity(), f.params.len()),
                &f.hl,
            );
            continue;
        }
        let mut scope: Vec<(Ident, Vec<Ident>)> = Vec::new();
        for (v, p) in f.params.iter().zip(&schema.params) {
            if !v.is_variable() {
                err(codes::SYNTAX, format!("parameter `{v}` must be a `?variable`"), v);
            }
            scope.push((v.clone(), image(&p.ty)));
        }
        check_formula(&f.formula, &scope, ll, &mut err);
    }
    for p in &hl.predicates {
        if m.fluent(&p.name).is_none() {
            err(codes::UNMAPPED, format!("high-level predicate `{}` has no mapping", p.name), &Ident::new(""));
        }
    }

    let mut seen = HashSet::new();
    for a in &m.actions {
        if !seen.insert(a.hl.clone()) {
            err(codes::DUPLICATE, format!("action `{}` mapped twice", a.hl), &a.hl);
            continue;
        }
        let Some(schema) = hl.action(&a.hl) else {
            err(codes::UNKNOWN_ACTION, format!("`{}` is not a high-level action", a.hl), &a.hl);
            continue;
        };
        if schema.params.len() != a.params.len() {
            err(
                codes::ARITY,
                format!("`{}` takes {} parameter(s), mapping gives {}", a.hl, schema.params.len(), a.params.len()),
                &a.hl,
            );
            continue;
        }
        let mut scope: Vec<(Ident, Vec<Ident>)> = Vec::new();
        for (v, p) in a.params.iter().zip(&schema.params) {
            if !v.is_variable() {
                err(codes::SYNTAX, format!("parameter `{v}` must be a `?variable`"), v);
            }
            scope.push((v.clone(), image(&p.ty)));
        }
        check_program(&a.program, &mut scope, ll, &mut err);
    }
    for a in &hl.actions {
        if m.action(&a.name).is_none() {
            err(codes::UNMAPPED, format!("high-level action `{}` has no mapping", a.name), &Ident::new(""));
        }
    }

    fn check_args(
        what: &str,
        name: &Ident,
        params: &[crate::pddl::Typed],
        args: &[Term],
        scope: &[(Ident, Vec<Ident>)],
        ll: &DomainAst,
        err: &mut dyn FnMut(&str, String, &Ident),
    ) {
        if params.len() != args.len() {
            err(
                codes::ARITY,
                format!("{what} `{name}` takes {} argument(s), found {}", params.len(), args.len()),
                name,
            );
            return;
        }
        for (arg, p) in args.iter().zip(params) {
            if !arg.is_variable() {
                // Object constants are resolved against the problem later.
                continue;
            }
            match scope.iter().rev().find(|(v, _)| v == arg) {
                None => err(codes::UNDECLARED_VARIABLE, format!("variable `{arg}` is not bound"), arg),
                Some((_, tys)) => {
                    if !tys.iter().any(|t| overlaps(&ll.types, t, &p.ty)) {
                        let tys: Vec<String> = tys.iter().map(|t| t.to_string()).collect();
                        err(
                            codes::TYPE_MISMATCH,
                            format!(
                                "`{arg}` ranges over {{{}}} but {what} `{name}` expects `{}`",
                                tys.join(", "),
                                p.ty
                            ),
                            arg,
                        );
                    }
                }
            }
        }
    }

    fn check_formula(
        f: &Formula,
        scope: &[(Ident, Vec<Ident>)],
        ll: &DomainAst,
        err: &mut dyn FnMut(&str, String, &Ident),
    ) {
        match f {
            Formula::Const(_) => {}
            Formula::Atom { predicate, args } => match ll.predicate(predicate) {
                None => err(
                    codes::UNKNOWN_PREDICATE,
                    format!("`{predicate}` is not a low-level predicate"),
                    predicate,
                ),
                Some(s) => check_args("predicate", predicate, &s.params, args, scope, ll, err),
            },
            Formula::Not(x) => check_formula(x, scope, ll, err),
            Formula::And(xs) | Formula::Or(xs) => {
                for x in xs {
                    check_formula(x, scope, ll, err);
                }
            }
        }
    }

    fn check_program(
        p: &Program,
        scope: &mut Vec<(Ident, Vec<Ident>)>,
        ll: &DomainAst,
        err: &mut dyn FnMut(&str, String, &Ident),
    ) {
        match p {
            Program::Act { schema, args } => match ll.action(schema) {
                None => err(codes::UNKNOWN_ACTION, format!("`{schema}` is not a low-level action"), schema),
                Some(s) => check_args("action", schema, &s.params, args, scope, ll, err),
            },
            Program::Seq(ps) | Program::Choice(ps) => {
                for q in ps {
                    check_program(q, scope, ll, err);
                }
            }
            Program::Pick { var, ty, body } => {
                if !ll.types.contains(ty) {
                    err(codes::UNKNOWN_TYPE, format!("`{ty}` is not a low-level type"), ty);
                }
                scope.push((var.clone(), vec![ty.clone()]));
                check_program(body, scope, ll, err);
                scope.pop();
            }
        }
    }
}
