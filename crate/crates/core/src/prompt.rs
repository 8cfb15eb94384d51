//! Chat prompt bundles for the four abstraction categories.
//!
//! Template text lives in `templates/` and is compiled in with `include_str!`.
//! Only four slots are ever substituted: `{{description}}`, `{{domain}}`,
//! `{{problem}}` and `{{purpose}}`. Substitution is a single left-to-right
//! pass, so slot syntax inside a user's PDDL is never expanded.
//!
//! ```
//! use pdag_core::prompt::{assemble, AbstractionCategory, QuerySpec, ShotMode, Role};
//!
//! let q = QuerySpec {
//!     description: "Two rooms and a robot.".into(),
//!     domain_text: "(define (domain d) (:requirements :strips))".into(),
//!     problem_text: "(define (problem p) (:domain d) (:init) (:goal (and)))".into(),
//!     purpose: "hide the robot's arm".into(),
//! };
//! let b = assemble(AbstractionCategory::AltActions, ShotMode::One, &q).unwrap();
//! assert_eq!(b.messages.len(), 4);
//! assert_eq!(b.messages[3].role, Role::User);
//! assert!(b.messages[3].content.starts_with("## Case 2 ##"));
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pddl::{parse_domain, parse_problem, Diagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbstractionCategory {
    /// Alternative concrete actions merged into one abstract action.
    AltActions,
    /// A fixed sequence of concrete actions merged into one.
    SeqActions,
    /// Parameters or types dropped.
    ParamAbstraction,
    /// Alternatives and sequences together.
    AltSeqActions,
}

impl AbstractionCategory {
    pub const ALL: [AbstractionCategory; 4] = [
        AbstractionCategory::AltActions,
        AbstractionCategory::SeqActions,
        AbstractionCategory::ParamAbstraction,
        AbstractionCategory::AltSeqActions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AbstractionCategory::AltActions => "alt-actions",
            AbstractionCategory::SeqActions => "seq-actions",
            AbstractionCategory::ParamAbstraction => "param-abstraction",
            AbstractionCategory::AltSeqActions => "alt-seq-actions",
        }
    }

    /// The shot mode used when the category has exactly one template.
    pub fn default_shot(self) -> ShotMode {
        match self {
            AbstractionCategory::ParamAbstraction => ShotMode::Zero,
            _ => ShotMode::One,
        }
    }
}

impl fmt::Display for AbstractionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown abstraction category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for AbstractionCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "altactions" | "1" => Ok(AbstractionCategory::AltActions),
            "seqactions" | "2" => Ok(AbstractionCategory::SeqActions),
            "paramabstraction" | "3" => Ok(AbstractionCategory::ParamAbstraction),
            "altseqactions" | "4" => Ok(AbstractionCategory::AltSeqActions),
            _ => Err(UnknownCategory(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotMode {
    Zero,
    One,
}

impl fmt::Display for ShotMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShotMode::Zero => "zero",
            ShotMode::One => "one",
        })
    }
}

impl FromStr for ShotMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zero" | "0" | "zero-shot" => Ok(ShotMode::Zero),
            "one" | "1" | "one-shot" => Ok(ShotMode::One),
            _ => Err(format!("unknown shot mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    fn new(role: Role, content: impl Into<String>) -> Self {
        let content = content.into();
        debug_assert!(!content.is_empty());
        ChatMessage { role, content }
    }
}

/// The low-level input to abstract.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QuerySpec {
    pub description: String,
    pub domain_text: String,
    pub problem_text: String,
    pub purpose: String,
}

impl QuerySpec {
    /// Checks that the domain and problem parse.
    pub fn check(&self) -> Result<(), Diagnostics> {
        let d = parse_domain(&self.domain_text)?;
        parse_problem(&self.problem_text, &d)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub category: AbstractionCategory,
    pub shot: ShotMode,
    pub messages: Vec<ChatMessage>,
    pub template_version: String,
}

impl PromptBundle {
    /// The chat-completions `messages` array.
    pub fn to_chat_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.messages).expect("messages serialize")
    }

    /// Hex sha256 over the template version and every message.
    ///
    /// Each field is length-prefixed so that moving bytes between
    /// messages changes the hash.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |b: &[u8]| {
            h.update((b.len() as u64).to_le_bytes());
            h.update(b);
        };
        put(self.template_version.as_bytes());
        for m in &self.messages {
            put(m.role.as_str().as_bytes());
            put(m.content.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no prompt template for {category} with {shot}-shot prompting")]
pub struct UnsupportedCombination {
    pub category: AbstractionCategory,
    pub shot: ShotMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptWarning {
    pub section: &'static str,
    pub message: String,
}

/// How a shipped template relates to the published prompt text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Verbatim,
    /// Published text with a syntax slip fixed.
    Repaired,
    /// Written here; no published text exists.
    Reconstructed,
}

#[derive(Debug, Clone, Copy)]
pub struct TemplateFile {
    pub name: &'static str,
    pub origin: Origin,
    pub text: &'static str,
}

macro_rules! template {
    ($name:literal, $origin:ident) => {
        TemplateFile {
            name: $name,
            origin: Origin::$origin,
            text: include_str!(concat!("../templates/", $name)),
        }
    };
}

/// Every shipped template, in the order they are hashed.
pub static TEMPLATES: [TemplateFile; 13] = [
    template!("system/alt_actions_zero.txt", Verbatim),
    template!("system/alt_actions_one.txt", Verbatim),
    template!("system/seq_actions_one.txt", Verbatim),
    template!("system/param_abstraction_zero.txt", Verbatim),
    template!("system/alt_seq_actions_one.txt", Verbatim),
    template!("user/query.txt", Verbatim),
    template!("user/query_param.txt", Verbatim),
    template!("demo/alt_actions_user.txt", Verbatim),
    template!("demo/alt_actions_assistant.txt", Repaired),
    template!("demo/seq_actions_user.txt", Reconstructed),
    template!("demo/seq_actions_assistant.txt", Reconstructed),
    template!("demo/alt_seq_actions_user.txt", Reconstructed),
    template!("demo/alt_seq_actions_assistant.txt", Reconstructed),
];

fn text(name: &str) -> &'static str {
    TEMPLATES
        .iter()
        .find(|t| t.name == name)
        .map(|t| t.text)
        .unwrap_or_else(|| panic!("missing template {name}"))
}

/// `v1+` followed by the first 12 hex digits of a sha256 over every template.
pub fn template_version() -> &'static str {
    static V: OnceLock<String> = OnceLock::new();
    V.get_or_init(|| {
        let mut h = Sha256::new();
        for t in &TEMPLATES {
            h.update(t.name.as_bytes());
            h.update([0]);
            h.update(t.text.as_bytes());
            h.update([0]);
        }
        format!("v1+{}", &hex::encode(h.finalize())[..12])
    })
}

pub fn supported(category: AbstractionCategory, shot: ShotMode) -> bool {
    system_name(category, shot).is_some()
}

fn system_name(category: AbstractionCategory, shot: ShotMode) -> Option<&'static str> {
    use AbstractionCategory::*;
    match (category, shot) {
        (AltActions, ShotMode::Zero) => Some("system/alt_actions_zero.txt"),
        (AltActions, ShotMode::One) => Some("system/alt_actions_one.txt"),
        (SeqActions, ShotMode::One) => Some("system/seq_actions_one.txt"),
        (ParamAbstraction, ShotMode::Zero) => Some("system/param_abstraction_zero.txt"),
        (AltSeqActions, ShotMode::One) => Some("system/alt_seq_actions_one.txt"),
        _ => None,
    }
}

pub fn build_system_prompt(
    category: AbstractionCategory,
    shot: ShotMode,
) -> Result<&'static str, UnsupportedCombination> {
    system_name(category, shot)
        .map(text)
        .ok_or(UnsupportedCombination { category, shot })
}

/// Single-pass slot substitution. Unknown slots are copied through.
fn render(template: &str, q: &QuerySpec) -> String {
    let mut out = String::with_capacity(template.len() + q.domain_text.len() + q.problem_text.len());
    let mut rest = template;
    while let Some(i) = rest.find("{{") {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 2..];
        let Some(j) = tail.find("}}") else {
            out.push_str(&rest[i..]);
            return out;
        };
        let value = match &tail[..j] {
            "description" => Some(&q.description),
            "domain" => Some(&q.domain_text),
            "problem" => Some(&q.problem_text),
            "purpose" => Some(&q.purpose),
            _ => None,
        };
        match value {
            Some(v) => out.push_str(v.trim()),
            None => out.push_str(&rest[i..i + 4 + j]),
        }
        rest = &tail[j + 2..];
    }
    out.push_str(rest);
    out
}

pub fn build_user_query(q: &QuerySpec, category: AbstractionCategory, shot: ShotMode) -> ChatMessage {
    let body = if category == AbstractionCategory::ParamAbstraction {
        render(text("user/query_param.txt"), q)
    } else {
        render(text("user/query.txt"), q)
    };
    let content = match shot {
        ShotMode::Zero => body,
        ShotMode::One => format!("## Case 2 ##:\n{body}"),
    };
    ChatMessage::new(Role::User, content)
}

/// Sections of `q` that will render with an empty body.
pub fn query_warnings(q: &QuerySpec) -> Vec<PromptWarning> {
    [
        ("description", &q.description),
        ("domain", &q.domain_text),
        ("purpose", &q.purpose),
        ("problem", &q.problem_text),
    ]
    .into_iter()
    .filter(|(_, v)| v.trim().is_empty())
    .map(|(section, _)| PromptWarning {
        section,
        message: format!("{section} is empty; the section is sent with no body"),
    })
    .collect()
}

/// The Case 1 user/assistant exemplar for a category.
pub fn build_demo(
    category: AbstractionCategory,
) -> Result<(ChatMessage, ChatMessage), UnsupportedCombination> {
    let stem = match category {
        AbstractionCategory::AltActions => "alt_actions",
        AbstractionCategory::SeqActions => "seq_actions",
        AbstractionCategory::AltSeqActions => "alt_seq_actions",
        AbstractionCategory::ParamAbstraction => {
            return Err(UnsupportedCombination { category, shot: ShotMode::One })
        }
    };
    Ok((
        ChatMessage::new(Role::User, text(&format!("demo/{stem}_user.txt"))),
        ChatMessage::new(Role::Assistant, text(&format!("demo/{stem}_assistant.txt"))),
    ))
}

/// Domain name of the demo's low-level domain, used to catch topic overlap
/// between a demo and a query.
pub fn demo_topic(category: AbstractionCategory) -> Option<&'static str> {
    match category {
        AbstractionCategory::AltActions => Some("travelArrange"),
        AbstractionCategory::SeqActions => Some("coffee"),
        AbstractionCategory::AltSeqActions => Some("cloudApps"),
        AbstractionCategory::ParamAbstraction => None,
    }
}

pub fn assemble(
    category: AbstractionCategory,
    shot: ShotMode,
    q: &QuerySpec,
) -> Result<PromptBundle, UnsupportedCombination> {
    let system = build_system_prompt(category, shot)?;
    let mut messages = vec![ChatMessage::new(Role::System, system)];
    if shot == ShotMode::One {
        let (u, a) = build_demo(category)?;
        messages.push(u);
        messages.push(a);
    }
    messages.push(build_user_query(q, category, shot));
    Ok(PromptBundle {
        category,
        shot,
        messages,
        template_version: template_version().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{ground, GroundOptions};
    use proptest::prelude::*;

    use AbstractionCategory::*;
    use ShotMode::*;

    fn q() -> QuerySpec {
        QuerySpec {
            description: "desc".into(),
            domain_text: "(define (domain d))".into(),
            problem_text: "(define (problem p))".into(),
            purpose: "purpose".into(),
        }
    }

    // every top-level `(define ...)` form, in order
    fn defines(s: &str) -> Vec<&str> {
        let mut out = vec![];
        let mut from = 0;
        while let Some(i) = s[from..].find("(define") {
            let start = from + i;
            let mut depth = 0i32;
            let mut end = None;
            for (k, c) in s[start..].char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            end = Some(start + k + 1);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let end = end.expect("balanced define");
            out.push(&s[start..end]);
            from = end;
        }
        out
    }

    #[test]
    fn system_prompts() {
        let s = build_system_prompt(AltActions, Zero).unwrap();
        assert!(s.starts_with("You are an expert in PDDL"));
        assert!(s.contains("Minimize the number of types, predicates"));
        assert_eq!(
            build_system_prompt(SeqActions, Zero),
            Err(UnsupportedCombination { category: SeqActions, shot: Zero })
        );
        let s = build_system_prompt(AltSeqActions, One).unwrap();
        assert!(s.contains("keywords like 'when', 'or', 'either' are forbidden"));
        let combos: Vec<_> = AbstractionCategory::ALL
            .iter()
            .flat_map(|&c| [Zero, One].map(|s| (c, s)))
            .filter(|&(c, s)| supported(c, s))
            .collect();
        assert_eq!(
            combos,
            vec![
                (AltActions, Zero),
                (AltActions, One),
                (SeqActions, One),
                (ParamAbstraction, Zero),
                (AltSeqActions, One)
            ]
        );
        for (c, s) in combos {
            let t = build_system_prompt(c, s).unwrap();
            assert!(t.starts_with("You are an expert in PDDL"), "{c} {s}");
            assert_eq!(c.default_shot(), if c == AltActions { One } else { s });
        }
    }

    #[test]
    fn one_shot_prompts_name_both_cases() {
        for c in [AltActions, SeqActions, AltSeqActions] {
            assert!(build_system_prompt(c, One).unwrap().contains("## Case 2 ##"), "{c}");
        }
    }

    #[test]
    fn query_sections_in_order() {
        let m = build_user_query(&q(), AltActions, Zero);
        let c = &m.content;
        let pos: Vec<usize> = [
            "## Description ##",
            "## Low-Level Domain ##",
            "## Purpose of Abstraction ##",
            "## Low-Level Problem Instance ##",
            "Solution:",
        ]
        .iter()
        .map(|h| c.find(h).unwrap_or_else(|| panic!("{h}")))
        .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
        assert!(!c.contains("## Case"));
    }

    #[test]
    fn param_query_follows_its_own_layout() {
        let c = build_user_query(&q(), ParamAbstraction, Zero).content;
        let pos: Vec<usize> = ["## PDDL Domain ##: desc", "(define (domain d))", "## PDDL Problem ##", "## Purpose of Abstraction ##", "Solution:"]
            .iter()
            .map(|h| c.find(h).unwrap_or_else(|| panic!("{h}")))
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
    }

    #[test]
    fn one_shot_query_is_case_two() {
        let m = build_user_query(&q(), AltActions, One);
        assert!(m.content.starts_with("## Case 2 ##"));
        assert_eq!(m.role, Role::User);
    }

    #[test]
    fn empty_description_keeps_section() {
        let mut spec = q();
        spec.description = "  ".into();
        let c = build_user_query(&spec, AltActions, Zero).content;
        assert!(c.starts_with("## Description ##\n\n\n\n## Low-Level Domain ##"), "{c:?}");
        let w = query_warnings(&spec);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].section, "description");
        assert!(query_warnings(&q()).is_empty());
    }

    #[test]
    fn demos() {
        let (u, a) = build_demo(AltActions).unwrap();
        assert!(u.content.contains("## Case 1 ##"));
        assert!(a.content.contains("(define (domain travelArrange01_HL)"));
        assert_eq!((u.role, a.role), (Role::User, Role::Assistant));
        assert_eq!(
            build_demo(ParamAbstraction),
            Err(UnsupportedCombination { category: ParamAbstraction, shot: One })
        );
        for c in [SeqActions, AltSeqActions] {
            let (u, a) = build_demo(c).unwrap();
            assert!(u.content.starts_with("## Case 1 ##"));
            assert!(u.content.trim_end().ends_with("\nSolution:"));
            assert!(a.content.contains("Rationale:"));
            assert!(a.content.contains(&format!("(define (domain {}", demo_topic(c).unwrap())));
        }
    }

    #[test]
    fn demo_pddl_is_well_formed() {
        for c in [AltActions, SeqActions, AltSeqActions] {
            let (u, a) = build_demo(c).unwrap();
            for text in [&u.content, &a.content] {
                let forms = defines(text);
                assert_eq!(forms.len(), 2, "{c}");
                let d = parse_domain(forms[0]).unwrap_or_else(|e| panic!("{c}: {}", e.render(forms[0])));
                let p = parse_problem(forms[1], &d).unwrap_or_else(|e| panic!("{c}: {}", e.render(forms[1])));
                ground(&d, &p, &GroundOptions::default()).unwrap();
            }
        }
    }

    #[test]
    fn bundle_shapes() {
        let z = assemble(ParamAbstraction, Zero, &q()).unwrap();
        assert_eq!(z.messages.iter().map(|m| m.role).collect::<Vec<_>>(), [Role::System, Role::User]);
        let o = assemble(AltActions, One, &q()).unwrap();
        assert_eq!(
            o.messages.iter().map(|m| m.role).collect::<Vec<_>>(),
            [Role::System, Role::User, Role::Assistant, Role::User]
        );
        assert_eq!(o.template_version, template_version());
        assert!(template_version().starts_with("v1+"));
        assert_eq!(template_version().len(), 15);
        assert!(assemble(SeqActions, Zero, &q()).is_err());
        assert!(assemble(ParamAbstraction, One, &q()).is_err());

        let json = o.to_chat_json();
        assert_eq!(json[0]["role"], "system");
        assert_eq!(json[2]["role"], "assistant");
        assert_eq!(json.as_array().unwrap().len(), 4);
    }

    #[test]
    fn slot_syntax_in_input_is_not_expanded() {
        let mut spec = q();
        spec.domain_text = "(define {{purpose}} {{nope}})".into();
        let c = build_user_query(&spec, AltActions, Zero).content;
        assert!(c.contains("(define {{purpose}} {{nope}})"));
        assert_eq!(render("a {{x}} {{domain", &spec), "a {{x}} {{domain");
    }

    #[test]
    fn category_names_round_trip() {
        for c in AbstractionCategory::ALL {
            assert_eq!(c.as_str().parse::<AbstractionCategory>().unwrap(), c);
            assert_eq!(format!("{c:?}").parse::<AbstractionCategory>().unwrap(), c);
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(j, format!("\"{}\"", c.as_str()));
        }
        assert!("five".parse::<AbstractionCategory>().is_err());
        assert_eq!("one-shot".parse::<ShotMode>().unwrap(), One);
    }

    fn category() -> impl Strategy<Value = (AbstractionCategory, ShotMode)> {
        prop_oneof![
            Just((AltActions, Zero)),
            Just((AltActions, One)),
            Just((SeqActions, One)),
            Just((ParamAbstraction, Zero)),
            Just((AltSeqActions, One)),
        ]
    }

    proptest! {
        #[test]
        fn assemble_is_pure_and_well_shaped(
            (c, s) in category(),
            description in ".{0,40}",
            domain in ".{0,80}",
            problem in ".{0,80}",
            purpose in ".{0,40}",
        ) {
            let spec = QuerySpec { description, domain_text: domain, problem_text: problem, purpose };
            let a = assemble(c, s, &spec).unwrap();
            let b = assemble(c, s, &spec.clone()).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.hash(), b.hash());
            prop_assert_eq!(a.messages.len(), if s == One { 4 } else { 2 });
            let last = a.messages.last().unwrap();
            prop_assert_eq!(last.role, Role::User);
            prop_assert!(last.content.ends_with("\nSolution:\n"));
            prop_assert!(a.messages.iter().all(|m| !m.content.is_empty()));
            prop_assert!(last.content.contains(spec.domain_text.trim()));
        }

        #[test]
        fn hash_separates_message_boundaries(x in "[a-z]{1,10}", y in "[a-z]{1,10}") {
            let mut a = assemble(AltActions, Zero, &q()).unwrap();
            let mut b = a.clone();
            a.messages[0].content = format!("{x}{y}");
            a.messages[1].content = "z".into();
            b.messages[0].content = x.clone();
            b.messages[1].content = format!("{y}z");
            prop_assert_ne!(a.hash(), b.hash());
        }
    }
}
