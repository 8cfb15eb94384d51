//! Semantic layer over [`sexpr`](super::sexpr): turns forms into checked
//! ASTs. Each section of a `define` is processed independently so that one
//! bad section does not hide faults in the others.

use std::collections::HashSet;

use super::ast::*;
use super::sexpr::{self, Sexpr, Token};
use super::{codes, Diagnostic, Diagnostics, Ident, Span};

/// Result of a parse with all diagnostics, including warnings.
#[derive(Clone, Debug)]
pub struct Parsed<T> {
    pub value: Option<T>,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Parsed<T> {
    pub fn into_result(self) -> Result<T, Diagnostics> {
        match self.value {
            Some(v) if !self.diagnostics.iter().any(Diagnostic::is_error) => Ok(v),
            _ => Err(Diagnostics(self.diagnostics)),
        }
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| !d.is_error())
    }
}

/// Keywords outside the STRIPS fragment that get a dedicated diagnostic.
const UNSUPPORTED_HEADS: &[&str] = &[
    "or", "not", "when", "either", "exists", "forall", "imply", "=", "increase", "decrease",
    "assign", "scale-up", "scale-down", "at", "over", "preference",
];

const UNSUPPORTED_SECTIONS: &[&str] = &[
    ":constants",
    ":functions",
    ":durative-action",
    ":derived",
    ":constraints",
    ":metric",
];

fn ident(tok: &Token) -> Ident {
    Ident::with_span(tok.text.clone(), tok.span)
}

fn is_name(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic())
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

fn is_variable(text: &str) -> bool {
    text.len() > 1 && text.starts_with('?') && is_name(&text[1..])
}

struct Ctx {
    diags: Vec<Diagnostic>,
}

impl Ctx {
    fn error(&mut self, code: &str, msg: impl Into<String>, span: Span) {
        self.diags.push(Diagnostic::error(code, msg, span));
    }

    fn warn(&mut self, code: &str, msg: impl Into<String>, span: Span) {
        self.diags.push(Diagnostic::warning(code, msg, span));
    }

    fn has_errors_since(&self, mark: usize) -> bool {
        self.diags[mark..].iter().any(Diagnostic::is_error)
    }

    /// Reports a list whose head is a non-STRIPS keyword. Returns true if it did.
    fn check_unsupported(&mut self, form: &Sexpr) -> bool {
        if let Some(head) = form.head() {
            if UNSUPPORTED_HEADS.contains(&head.as_str()) {
                self.error(
                    codes::UNSUPPORTED,
                    format!("`{head}` is not part of the STRIPS fragment"),
                    form.span(),
                );
                return true;
            }
        }
        false
    }

    fn expect_name(&mut self, form: &Sexpr, what: &str) -> Option<Ident> {
        match form.as_symbol() {
            Some(t) if is_name(&t.text) => Some(ident(t)),
            Some(t) => {
                self.error(
                    codes::SYNTAX,
                    format!("expected {what}, found `{}`", t.text),
                    t.span,
                );
                None
            }
            None => {
                if !self.check_unsupported(form) {
                    self.error(
                        codes::SYNTAX,
                        format!("expected {what}, found a list"),
                        form.span(),
                    );
                }
                None
            }
        }
    }

    /// Parses `a b - t c - u d` style lists. `var` selects `?x` names.
    fn typed_list(&mut self, items: &[Sexpr], var: bool) -> Option<Vec<Typed>> {
        let mark = self.diags.len();
        let mut out = Vec::new();
        let mut pending: Vec<Ident> = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let item = &items[i];
            match item.as_symbol() {
                Some(t) if t.text == "-" => {
                    let Some(ty_form) = items.get(i + 1) else {
                        self.error(codes::SYNTAX, "`-` must be followed by a type", t.span);
                        break;
                    };
                    let ty = match ty_form.as_symbol() {
                        Some(tt) if is_name(&tt.text) => Some(ident(tt)),
                        Some(tt) => {
                            self.error(
                                codes::SYNTAX,
                                format!("expected a type name, found `{}`", tt.text),
                                tt.span,
                            );
                            None
                        }
                        None => {
                            if ty_form.head().as_deref() == Some("either") {
                                self.error(
                                    codes::UNSUPPORTED,
                                    "`either` types are not part of the STRIPS fragment",
                                    ty_form.span(),
                                );
                            } else {
                                self.error(
                                    codes::SYNTAX,
                                    "expected a type name",
                                    ty_form.span(),
                                );
                            }
                            None
                        }
                    };
                    if pending.is_empty() {
                        self.error(codes::SYNTAX, "type given without any names", t.span);
                    }
                    if let Some(ty) = ty {
                        out.extend(pending.drain(..).map(|name| Typed {
                            name,
                            ty: ty.clone(),
                        }));
                    } else {
                        pending.clear();
                    }
                    i += 2;
                    continue;
                }
                Some(t) => {
                    let ok = if var {
                        is_variable(&t.text)
                    } else {
                        is_name(&t.text)
                    };
                    if ok {
                        pending.push(ident(t));
                    } else {
                        let what = if var { "a `?variable`" } else { "a name" };
                        self.error(
                            codes::SYNTAX,
                            format!("expected {what}, found `{}`", t.text),
                            t.span,
                        );
                    }
                }
                None => {
                    if !self.check_unsupported(item) {
                        self.error(codes::SYNTAX, "unexpected list in typed list", item.span());
                    }
                }
            }
            i += 1;
        }
        out.extend(pending.into_iter().map(|name| Typed {
            name,
            ty: Ident::object(),
        }));
        if self.has_errors_since(mark) {
            None
        } else {
            Some(out)
        }
    }

    /// Flattens `(and ...)` nests into literals. Negated literals are only
    /// accepted when `allow_not` is set (effects).
    fn conjunction(
        &mut self,
        form: &Sexpr,
        allow_not: bool,
        out: &mut Vec<(bool, Sexpr)>,
    ) {
        let Some(items) = form.as_list() else {
            self.error(
                codes::SYNTAX,
                format!(
                    "expected an atom or `(and ...)`, found `{}`",
                    form.as_symbol().map(|t| t.text.as_str()).unwrap_or("")
                ),
                form.span(),
            );
            return;
        };
        if items.is_empty() {
            return;
        }
        match form.head().as_deref() {
            Some("and") => {
                for item in &items[1..] {
                    self.conjunction(item, allow_not, out);
                }
            }
            Some("not") if allow_not => {
                if items.len() != 2 || items[1].as_list().is_none() {
                    self.error(codes::SYNTAX, "`not` takes exactly one atom", form.span());
                } else if items[1].head().as_deref() == Some("not") || !self.is_atom_form(&items[1]) {
                    if !self.check_unsupported(&items[1]) {
                        self.error(codes::SYNTAX, "`not` must wrap an atom", items[1].span());
                    }
                } else {
                    out.push((false, items[1].clone()));
                }
            }
            Some(h) if h.starts_with(':') => {
                self.error(
                    codes::SYNTAX,
                    format!("unexpected keyword `{h}` inside a condition; is a `)` missing?"),
                    items[0].span(),
                );
            }
            _ => {
                if self.check_unsupported(form) {
                    return;
                }
                out.push((true, form.clone()));
            }
        }
    }

    fn is_atom_form(&self, form: &Sexpr) -> bool {
        match form.head() {
            Some(h) => !UNSUPPORTED_HEADS.contains(&h.as_str()) && h != "and",
            None => false,
        }
    }

    /// Splits an atom form into predicate and argument tokens.
    fn atom_parts<'a>(&mut self, form: &'a Sexpr) -> Option<(Ident, Vec<&'a Token>)> {
        let items = form.as_list()?;
        let pred = self.expect_name(items.first()?, "a predicate name")?;
        let mut args = Vec::new();
        let mut ok = true;
        for a in &items[1..] {
            match a.as_symbol() {
                Some(t) => args.push(t),
                None => {
                    if !self.check_unsupported(a) {
                        self.error(codes::SYNTAX, "atom arguments must be names", a.span());
                    }
                    ok = false;
                }
            }
        }
        ok.then_some((pred, args))
    }

    fn check_arity(&mut self, schema: &PredicateSchema, got: usize, span: Span) -> bool {
        if schema.arity() != got {
            self.error(
                codes::ARITY,
                format!(
                    "predicate `{}` takes {} argument(s), found {}",
                    schema.name,
                    schema.arity(),
                    got
                ),
                span,
            );
            false
        } else {
            true
        }
    }
}

fn define_body<'a>(
    ctx: &mut Ctx,
    forms: &'a [Sexpr],
    kind: &str,
) -> Option<(Ident, &'a [Sexpr])> {
    let mut found: Option<&Sexpr> = None;
    for form in forms {
        match form.head().as_deref() {
            Some("define") if found.is_none() => found = Some(form),
            _ => ctx.error(
                codes::SYNTAX,
                format!("unexpected top-level form; expected a single `(define ({kind} ...) ...)`"),
                form.span(),
            ),
        }
    }
    let Some(define) = found else {
        if forms.is_empty() {
            ctx.error(
                codes::SYNTAX,
                format!("empty input; expected `(define ({kind} ...) ...)`"),
                Span::new(1, 1, 0, 0),
            );
        }
        return None;
    };
    let items = define.as_list().unwrap_or(&[]);
    let header = items.get(1);
    let name = match header {
        Some(h) if h.head().as_deref() == Some(kind) => {
            let parts = h.as_list().unwrap_or(&[]);
            match parts.get(1) {
                Some(n) if parts.len() == 2 => ctx.expect_name(n, &format!("a {kind} name")),
                _ => {
                    ctx.error(
                        codes::SYNTAX,
                        format!("expected `({kind} <name>)`"),
                        h.span(),
                    );
                    None
                }
            }
        }
        _ => {
            ctx.error(
                codes::SYNTAX,
                format!("expected `({kind} <name>)` after `define`"),
                header.map(Sexpr::span).unwrap_or(define.span()),
            );
            None
        }
    };
    let body = if items.len() > 2 { &items[2..] } else { &[] };
    name.map(|n| (n, body))
}

/// Parses and checks a STRIPS + typing domain.
pub fn parse_domain(source: &str) -> Result<DomainAst, Diagnostics> {
    parse_domain_full(source).into_result()
}

/// Like [`parse_domain`] but keeps warnings and partial results.
pub fn parse_domain_full(source: &str) -> Parsed<DomainAst> {
    let (forms, diags) = sexpr::read(source);
    let mut ctx = Ctx { diags };
    let value = domain_from_forms(&mut ctx, &forms);
    Parsed {
        value,
        diagnostics: ctx.diags,
    }
}

fn domain_from_forms(ctx: &mut Ctx, forms: &[Sexpr]) -> Option<DomainAst> {
    let (name, body) = define_body(ctx, forms, "domain")?;

    let mut requirements = Vec::new();
    let mut types = TypeHierarchy::new();
    let mut predicates: Vec<PredicateSchema> = Vec::new();
    let mut action_forms = Vec::new();
    let mut seen_sections: HashSet<String> = HashSet::new();
    let mut ok = true;

    for section in body {
        let Some(head) = section.head() else {
            ctx.error(codes::SYNTAX, "expected a `(:section ...)` form", section.span());
            ok = false;
            continue;
        };
        let items = section.as_list().unwrap_or(&[]);
        if head != ":action" && !seen_sections.insert(head.clone()) {
            ctx.error(
                codes::DUPLICATE,
                format!("section `{head}` appears more than once"),
                section.span(),
            );
            ok = false;
            continue;
        }
        match head.as_str() {
            ":requirements" => {
                for r in &items[1..] {
                    match r.as_symbol() {
                        Some(t) => match t.text.to_lowercase().as_str() {
                            ":strips" => push_unique(&mut requirements, Requirement::Strips),
                            ":typing" => push_unique(&mut requirements, Requirement::Typing),
                            other if other.starts_with(':') => {
                                ctx.error(
                                    codes::UNSUPPORTED_REQUIREMENT,
                                    format!("requirement `{other}` is outside the STRIPS fragment; only `:strips` and `:typing` are allowed"),
                                    t.span,
                                );
                                ok = false;
                            }
                            other => {
                                ctx.error(
                                    codes::SYNTAX,
                                    format!("requirement `{other}` must start with `:`"),
                                    t.span,
                                );
                                ok = false;
                            }
                        },
                        None => {
                            ctx.error(codes::SYNTAX, "expected a requirement keyword", r.span());
                            ok = false;
                        }
                    }
                }
            }
            ":types" => match ctx.typed_list(&items[1..], false) {
                Some(list) => {
                    for t in list {
                        if t.name.canonical() == "object" {
                            continue;
                        }
                        let span = t.name.span().unwrap_or_default();
                        if !types.declare(t.name.clone(), t.ty) {
                            ctx.error(
                                codes::DUPLICATE,
                                format!("type `{}` declared twice", t.name),
                                span,
                            );
                            ok = false;
                        }
                    }
                    // Parents mentioned only as parents are declared implicitly.
                    let parents: Vec<Ident> = types
                        .decls()
                        .iter()
                        .map(|(_, p)| p.clone())
                        .filter(|p| !types.contains(p))
                        .collect();
                    for p in parents {
                        types.declare(p, Ident::object());
                    }
                    if let Some(c) = types.find_cycle() {
                        ctx.error(
                            codes::TYPE_CYCLE,
                            format!("type `{c}` is its own ancestor"),
                            c.span().unwrap_or(section.span()),
                        );
                        ok = false;
                    }
                }
                None => ok = false,
            },
            ":predicates" | ":action" => {}
            s if UNSUPPORTED_SECTIONS.contains(&s) => {
                ctx.error(
                    codes::UNSUPPORTED,
                    format!("`{s}` is not supported in the STRIPS + typing fragment"),
                    section.span(),
                );
                ok = false;
            }
            s => {
                ctx.error(codes::SYNTAX, format!("unknown domain section `{s}`"), section.span());
                ok = false;
            }
        }
    }

    // Predicates after types so that type references resolve. A repeated
    // section was already reported above and is skipped here.
    if let Some(section) = body.iter().find(|s| s.head().as_deref() == Some(":predicates")) {
        let items = section.as_list().unwrap_or(&[]);
        for p in &items[1..] {
            let mark = ctx.diags.len();
            let Some(parts) = p.as_list() else {
                ctx.error(codes::SYNTAX, "expected `(predicate ?x - type ...)`", p.span());
                ok = false;
                continue;
            };
            let Some(pname) = parts.first().and_then(|h| ctx.expect_name(h, "a predicate name"))
            else {
                ok = false;
                continue;
            };
            let params = ctx.typed_list(&parts[1..], true);
            if let Some(params) = &params {
                check_params(ctx, &types, params);
            }
            if predicates.iter().any(|q| q.name == pname) {
                ctx.error(
                    codes::DUPLICATE,
                    format!("predicate `{pname}` declared twice"),
                    pname.span().unwrap_or(p.span()),
                );
            }
            match params {
                Some(params) if !ctx.has_errors_since(mark) => predicates.push(PredicateSchema {
                    name: pname,
                    params,
                }),
                _ => ok = false,
            }
        }
    }

    let mut actions: Vec<ActionSchema> = Vec::new();
    for section in body.iter().filter(|s| s.head().as_deref() == Some(":action")) {
        action_forms.push(section);
    }
    for form in action_forms {
        match parse_action(ctx, form, &types, &predicates) {
            Some(a) => {
                if actions.iter().any(|b| b.name == a.name) {
                    ctx.error(
                        codes::DUPLICATE,
                        format!("action `{}` declared twice", a.name),
                        a.name.span().unwrap_or(form.span()),
                    );
                    ok = false;
                } else {
                    actions.push(a);
                }
            }
            None => ok = false,
        }
    }

    ok.then_some(DomainAst {
        name,
        requirements,
        types,
        predicates,
        actions,
    })
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

fn check_params(ctx: &mut Ctx, types: &TypeHierarchy, params: &[Typed]) {
    let mut seen = HashSet::new();
    for p in params {
        let span = p.name.span().unwrap_or_default();
        if !seen.insert(p.name.clone()) {
            ctx.error(
                codes::DUPLICATE,
                format!("parameter `{}` declared twice", p.name),
                span,
            );
        }
        if !types.contains(&p.ty) {
            ctx.error(
                codes::UNKNOWN_TYPE,
                format!("unknown type `{}`", p.ty),
                p.ty.span().unwrap_or(span),
            );
        }
    }
}

fn parse_action(
    ctx: &mut Ctx,
    form: &Sexpr,
    types: &TypeHierarchy,
    predicates: &[PredicateSchema],
) -> Option<ActionSchema> {
    let mark = ctx.diags.len();
    let items = form.as_list().unwrap_or(&[]);
    let name = match items.get(1) {
        Some(n) => ctx.expect_name(n, "an action name"),
        None => {
            ctx.error(codes::SYNTAX, "`:action` needs a name", form.span());
            None
        }
    };
    let mut params: Option<Vec<Typed>> = Some(Vec::new());
    let mut pre_form = None;
    let mut eff_form = None;
    let mut seen = HashSet::new();
    let mut i = 2;
    while i < items.len() {
        let Some(key) = items[i].as_symbol() else {
            ctx.error(
                codes::SYNTAX,
                "expected `:parameters`, `:precondition` or `:effect`",
                items[i].span(),
            );
            i += 1;
            continue;
        };
        let key_lc = key.text.to_lowercase();
        let value = items.get(i + 1);
        if value.is_none() {
            ctx.error(codes::SYNTAX, format!("`{}` needs a value", key.text), key.span);
            break;
        }
        if !seen.insert(key_lc.clone()) {
            ctx.error(codes::DUPLICATE, format!("`{}` given twice", key.text), key.span);
        }
        let value = value.unwrap();
        match key_lc.as_str() {
            ":parameters" => match value.as_list() {
                Some(list) => {
                    params = ctx.typed_list(list, true);
                    if let Some(ps) = &params {
                        check_params(ctx, types, ps);
                    }
                }
                None => {
                    ctx.error(codes::SYNTAX, "`:parameters` expects a list", value.span());
                    params = None;
                }
            },
            ":precondition" => pre_form = Some(value),
            ":effect" => eff_form = Some(value),
            ":vars" | ":duration" | ":condition" => {
                ctx.error(
                    codes::UNSUPPORTED,
                    format!("`{}` is not part of the STRIPS fragment", key.text),
                    key.span,
                );
            }
            _ => ctx.error(
                codes::SYNTAX,
                format!("unexpected `{}` in action", key.text),
                key.span,
            ),
        }
        i += 2;
    }
    let params = params.unwrap_or_default();

    let mut precondition = Vec::new();
    if let Some(f) = pre_form {
        let mut lits = Vec::new();
        ctx.conjunction(f, false, &mut lits);
        for (_, atom) in lits {
            if let Some(a) = schema_atom(ctx, &atom, &params, types, predicates) {
                precondition.push(a);
            }
        }
    }
    let mut add_effects = Vec::new();
    let mut del_effects = Vec::new();
    if let Some(f) = eff_form {
        let mut lits = Vec::new();
        ctx.conjunction(f, true, &mut lits);
        for (positive, atom) in lits {
            if let Some(a) = schema_atom(ctx, &atom, &params, types, predicates) {
                if positive {
                    add_effects.push(a);
                } else {
                    del_effects.push(a);
                }
            }
        }
    }
    for a in &add_effects {
        if del_effects.contains(a) {
            ctx.error(
                codes::ADD_DEL_CONFLICT,
                format!("{a} is both added and deleted"),
                a.predicate.span().unwrap_or(form.span()),
            );
        }
    }
    if ctx.has_errors_since(mark) {
        return None;
    }
    Some(ActionSchema {
        name: name?,
        params,
        precondition,
        add_effects,
        del_effects,
    })
}

fn schema_atom(
    ctx: &mut Ctx,
    form: &Sexpr,
    params: &[Typed],
    types: &TypeHierarchy,
    predicates: &[PredicateSchema],
) -> Option<Atom> {
    let (pred, args) = ctx.atom_parts(form)?;
    let Some(schema) = predicates.iter().find(|p| p.name == pred) else {
        ctx.error(
            codes::UNKNOWN_PREDICATE,
            format!("unknown predicate `{pred}`"),
            pred.span().unwrap_or(form.span()),
        );
        return None;
    };
    let mut ok = ctx.check_arity(schema, args.len(), form.span());
    let mut out = Vec::new();
    for (k, tok) in args.iter().enumerate() {
        let id = ident(tok);
        if !is_variable(&tok.text) {
            ctx.error(
                codes::UNKNOWN_OBJECT,
                format!("`{}` is not a parameter; constants are not supported in schemas", tok.text),
                tok.span,
            );
            ok = false;
            continue;
        }
        match params.iter().find(|p| p.name == id) {
            None => {
                ctx.error(
                    codes::UNDECLARED_VARIABLE,
                    format!("variable `{}` is not a parameter of this action", tok.text),
                    tok.span,
                );
                ok = false;
            }
            Some(p) => {
                if let Some(expected) = schema.params.get(k) {
                    if types.contains(&p.ty) && !types.is_subtype(&p.ty, &expected.ty) {
                        ctx.error(
                            codes::TYPE_MISMATCH,
                            format!(
                                "`{}` has type `{}` but `{}` expects `{}` in position {}",
                                p.name,
                                p.ty,
                                schema.name,
                                expected.ty,
                                k + 1
                            ),
                            tok.span,
                        );
                        ok = false;
                    }
                }
            }
        }
        out.push(id);
    }
    ok.then_some(Atom {
        predicate: pred,
        args: out,
    })
}

/// Parses a problem and checks it against `domain`.
pub fn parse_problem(source: &str, domain: &DomainAst) -> Result<ProblemAst, Diagnostics> {
    parse_problem_full(source, domain).into_result()
}

pub fn parse_problem_full(source: &str, domain: &DomainAst) -> Parsed<ProblemAst> {
    let (forms, diags) = sexpr::read(source);
    let mut ctx = Ctx { diags };
    let value = problem_from_forms(&mut ctx, &forms, domain);
    Parsed {
        value,
        diagnostics: ctx.diags,
    }
}

fn problem_from_forms(ctx: &mut Ctx, forms: &[Sexpr], domain: &DomainAst) -> Option<ProblemAst> {
    let (name, body) = define_body(ctx, forms, "problem")?;
    let mut ok = true;
    let mut domain_name = None;
    let mut objects: Vec<Typed> = Vec::new();
    let mut init_form = None;
    let mut goal_form = None;
    let mut seen = HashSet::new();

    for section in body {
        let Some(head) = section.head() else {
            ctx.error(codes::SYNTAX, "expected a `(:section ...)` form", section.span());
            ok = false;
            continue;
        };
        if !seen.insert(head.clone()) {
            ctx.error(
                codes::DUPLICATE,
                format!("section `{head}` appears more than once"),
                section.span(),
            );
            ok = false;
            continue;
        }
        let items = section.as_list().unwrap_or(&[]);
        match head.as_str() {
            ":domain" => {
                if items.len() != 2 {
                    ctx.error(codes::SYNTAX, "expected `(:domain <name>)`", section.span());
                    ok = false;
                } else if let Some(d) = ctx.expect_name(&items[1], "a domain name") {
                    if d != domain.name {
                        ctx.warn(
                            codes::DOMAIN_MISMATCH,
                            format!("problem names domain `{d}` but is checked against `{}`", domain.name),
                            d.span().unwrap_or(section.span()),
                        );
                    }
                    domain_name = Some(d);
                } else {
                    ok = false;
                }
            }
            ":requirements" => ctx.warn(
                codes::IGNORED,
                "requirements in a problem are ignored",
                section.span(),
            ),
            ":objects" => match ctx.typed_list(&items[1..], false) {
                Some(list) => {
                    for o in list {
                        let span = o.name.span().unwrap_or(section.span());
                        if !domain.types.contains(&o.ty) {
                            ctx.error(
                                codes::UNKNOWN_TYPE,
                                format!("unknown type `{}` for object `{}`", o.ty, o.name),
                                o.ty.span().unwrap_or(span),
                            );
                            ok = false;
                        } else if objects.iter().any(|p| p.name == o.name) {
                            ctx.error(
                                codes::DUPLICATE,
                                format!("object `{}` declared twice", o.name),
                                span,
                            );
                            ok = false;
                        } else {
                            objects.push(o);
                        }
                    }
                }
                None => ok = false,
            },
            ":init" => init_form = Some(items),
            ":goal" => {
                if items.len() != 2 {
                    ctx.error(codes::SYNTAX, "expected `(:goal <condition>)`", section.span());
                    ok = false;
                } else {
                    goal_form = Some(&items[1]);
                }
            }
            ":constraints" | ":metric" => {
                ctx.error(
                    codes::UNSUPPORTED,
                    format!("`{head}` is not supported in the STRIPS fragment"),
                    section.span(),
                );
                ok = false;
            }
            _ => {
                ctx.error(codes::SYNTAX, format!("unknown problem section `{head}`"), section.span());
                ok = false;
            }
        }
    }

    let Some(domain_name) = domain_name else {
        ctx.error(codes::SYNTAX, "missing `(:domain <name>)`", forms[0].span());
        return None;
    };

    let mut init = Vec::new();
    if let Some(items) = init_form {
        for form in &items[1..] {
            if form.as_list().is_none() {
                ctx.error(codes::SYNTAX, "expected a ground atom", form.span());
                ok = false;
                continue;
            }
            if form.head().as_deref() == Some("not") {
                ctx.error(
                    codes::UNSUPPORTED,
                    "negative initial facts are implicit under the closed-world assumption; `not` is not allowed in `:init`",
                    form.span(),
                );
                ok = false;
                continue;
            }
            if ctx.check_unsupported(form) {
                ok = false;
                continue;
            }
            match ground_atom(ctx, form, domain, &objects) {
                Some(a) => {
                    if init.contains(&a) {
                        ctx.error(
                            codes::DUPLICATE_INIT,
                            format!("initial fact {a} listed twice"),
                            form.span(),
                        );
                        ok = false;
                    } else {
                        init.push(a);
                    }
                }
                None => ok = false,
            }
        }
    }

    let mut goal = Vec::new();
    match goal_form {
        Some(form) => {
            let mut lits = Vec::new();
            let mark = ctx.diags.len();
            ctx.conjunction(form, false, &mut lits);
            if ctx.has_errors_since(mark) {
                ok = false;
            }
            for (_, atom) in lits {
                match ground_atom(ctx, &atom, domain, &objects) {
                    Some(a) => goal.push(a),
                    None => ok = false,
                }
            }
        }
        None => {
            ctx.error(codes::SYNTAX, "missing `(:goal ...)`", forms[0].span());
            ok = false;
        }
    }

    ok.then_some(ProblemAst {
        name,
        domain_name,
        objects,
        init,
        goal,
    })
}

fn ground_atom(
    ctx: &mut Ctx,
    form: &Sexpr,
    domain: &DomainAst,
    objects: &[Typed],
) -> Option<Atom> {
    let (pred, args) = ctx.atom_parts(form)?;
    let Some(schema) = domain.predicate(&pred) else {
        ctx.error(
            codes::UNKNOWN_PREDICATE,
            format!("unknown predicate `{pred}`"),
            pred.span().unwrap_or(form.span()),
        );
        return None;
    };
    let mut ok = ctx.check_arity(schema, args.len(), form.span());
    let mut out = Vec::new();
    for (k, tok) in args.iter().enumerate() {
        let id = ident(tok);
        match objects.iter().find(|o| o.name == id) {
            None => {
                ctx.error(
                    codes::UNKNOWN_OBJECT,
                    format!("`{}` is not a declared object", tok.text),
                    tok.span,
                );
                ok = false;
            }
            Some(o) => {
                if let Some(expected) = schema.params.get(k) {
                    if !domain.types.is_subtype(&o.ty, &expected.ty) {
                        ctx.error(
                            codes::TYPE_MISMATCH,
                            format!(
                                "object `{}` has type `{}` but `{}` expects `{}` in position {}",
                                o.name,
                                o.ty,
                                schema.name,
                                expected.ty,
                                k + 1
                            ),
                            tok.span,
                        );
                        ok = false;
                    }
                }
            }
        }
        out.push(id);
    }
    ok.then_some(Atom {
        predicate: pred,
        args: out,
    })
}
