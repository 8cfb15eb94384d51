use std::fmt::Write;

use super::ast::*;
use super::Ident;

const IND: &str = "  ";

/// Writes `a b - t c - u` with consecutive entries of equal type grouped.
fn typed_groups<'a>(items: impl IntoIterator<Item = (&'a Ident, &'a Ident)>) -> Vec<String> {
    let mut groups: Vec<(Vec<&Ident>, &Ident)> = Vec::new();
    for (name, ty) in items {
        match groups.last_mut() {
            Some((names, t)) if *t == ty => names.push(name),
            _ => groups.push((vec![name], ty)),
        }
    }
    groups
        .into_iter()
        .map(|(names, ty)| {
            let names: Vec<String> = names.iter().map(|n| n.to_string()).collect();
            format!("{} - {}", names.join(" "), ty)
        })
        .collect()
}

fn params(ps: &[Typed]) -> String {
    typed_groups(ps.iter().map(|p| (&p.name, &p.ty))).join(" ")
}

fn conj(out: &mut String, indent: &str, atoms: &[(bool, &Atom)]) {
    if atoms.is_empty() {
        out.push_str("(and)\n");
        return;
    }
    out.push_str("(and\n");
    for (positive, a) in atoms {
        if *positive {
            let _ = writeln!(out, "{indent}{IND}{a}");
        } else {
            let _ = writeln!(out, "{indent}{IND}(not {a})");
        }
    }
    let _ = writeln!(out, "{indent})");
}

/// Canonical text of a domain: one construct per line, two-space indent,
/// original spellings.
pub fn print_domain(d: &DomainAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let reqs: Vec<&str> = d.requirements.iter().map(Requirement::keyword).collect();
        let _ = writeln!(out, "{IND}(:requirements {})", reqs.join(" "));
    }
    if !d.types.is_empty() {
        let _ = writeln!(out, "{IND}(:types");
        for line in typed_groups(d.types.decls().iter().map(|(n, p)| (n, p))) {
            let _ = writeln!(out, "{IND}{IND}{line}");
        }
        let _ = writeln!(out, "{IND})");
    }
    if !d.predicates.is_empty() {
        let _ = writeln!(out, "{IND}(:predicates");
        for p in &d.predicates {
            if p.params.is_empty() {
                let _ = writeln!(out, "{IND}{IND}({})", p.name);
            } else {
                let _ = writeln!(out, "{IND}{IND}({} {})", p.name, params(&p.params));
            }
        }
        let _ = writeln!(out, "{IND})");
    }
    for a in &d.actions {
        let _ = writeln!(out, "{IND}(:action {}", a.name);
        let _ = writeln!(out, "{IND}{IND}:parameters ({})", params(&a.params));
        let _ = write!(out, "{IND}{IND}:precondition ");
        let pre: Vec<_> = a.precondition.iter().map(|x| (true, x)).collect();
        conj(&mut out, &format!("{IND}{IND}"), &pre);
        let _ = write!(out, "{IND}{IND}:effect ");
        let eff: Vec<_> = a
            .add_effects
            .iter()
            .map(|x| (true, x))
            .chain(a.del_effects.iter().map(|x| (false, x)))
            .collect();
        conj(&mut out, &format!("{IND}{IND}"), &eff);
        let _ = writeln!(out, "{IND})");
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(p: &ProblemAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "{IND}(:domain {})", p.domain_name);
    if !p.objects.is_empty() {
        let _ = writeln!(out, "{IND}(:objects");
        for line in typed_groups(p.objects.iter().map(|o| (&o.name, &o.ty))) {
            let _ = writeln!(out, "{IND}{IND}{line}");
        }
        let _ = writeln!(out, "{IND})");
    }
    let _ = writeln!(out, "{IND}(:init");
    for a in &p.init {
        let _ = writeln!(out, "{IND}{IND}{a}");
    }
    let _ = writeln!(out, "{IND})");
    let _ = writeln!(out, "{IND}(:goal");
    let _ = write!(out, "{IND}{IND}");
    let goal: Vec<_> = p.goal.iter().map(|x| (true, x)).collect();
    conj(&mut out, &format!("{IND}{IND}"), &goal);
    let _ = writeln!(out, "{IND})");
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_domain;

    #[test]
    fn minimal_shell() {
        let src = "(define (domain d) (:requirements :strips :typing))";
        let printed = print_domain(&parse_domain(src).unwrap());
        let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").replace(" )", ")");
        assert_eq!(norm(&printed), norm(src));
    }

    #[test]
    fn groups_consecutive_types() {
        let src = "(define (domain d) (:requirements :typing) (:types room seat)
            (:predicates (p ?a ?b - room ?c - seat)))";
        let printed = print_domain(&parse_domain(src).unwrap());
        assert!(printed.contains("(p ?a ?b - room ?c - seat)"), "{printed}");
    }
}
