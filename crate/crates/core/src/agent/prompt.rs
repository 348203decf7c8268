use base64::Engine;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

pub const JSON_ONLY_PROMPT: &str = include_str!("../../resources/prompts/json_only.txt");
pub const MULTIMODAL_PROMPT: &str = include_str!("../../resources/prompts/multimodal.txt");
pub const CRITIC_PROMPT: &str = include_str!("../../resources/prompts/critic.txt");
pub const REFINER_PROMPT: &str = include_str!("../../resources/prompts/refiner.txt");
const CRITIC_INPUT: &str = include_str!("../../resources/prompts/critic_input.txt");
const REFINER_INPUT: &str = include_str!("../../resources/prompts/refiner_input.txt");
const REFINER_CRITIQUE: &str = include_str!("../../resources/prompts/refiner_critique.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Part {
    Text(String),
    /// Base64-encoded PNG.
    PngBase64(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub parts: Vec<Part>,
}

impl ChatMessage {
    pub fn text(role: ChatRole, text: impl Into<String>) -> Self {
        ChatMessage { role, parts: vec![Part::Text(text.into())] }
    }

    /// Concatenated text parts.
    pub fn text_content(&self) -> String {
        self.parts
            .iter()
            .filter_map(|p| match p {
                Part::Text(t) => Some(t.as_str()),
                Part::PngBase64(_) => None,
            })
            .collect()
    }

    /// Chat-completions wire form. Single-text messages use a plain string
    /// content, anything with an image uses the content-part array.
    pub fn to_json(&self) -> Value {
        let content = match self.parts.as_slice() {
            [Part::Text(t)] => Value::String(t.clone()),
            parts => Value::Array(
                parts
                    .iter()
                    .map(|p| match p {
                        Part::Text(t) => json!({ "type": "text", "text": t }),
                        Part::PngBase64(b) => json!({ "type": "image_url", "image_url": { "url": format!("data:image/png;base64,{b}") } }),
                    })
                    .collect(),
            ),
        };
        json!({ "role": self.role, "content": content })
    }
}

pub fn messages_json(messages: &[ChatMessage]) -> Value {
    Value::Array(messages.iter().map(ChatMessage::to_json).collect())
}

/// Single-pass `{name}` substitution, so substituted text is never
/// rescanned for placeholders.
pub(crate) fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'outer: while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        for (k, v) in vars {
            if rest.len() > k.len() + 1 && rest[1..].starts_with(k) && rest[1 + k.len()..].starts_with('}') {
                out.push_str(v);
                rest = &rest[k.len() + 2..];
                continue 'outer;
            }
        }
        out.push('{');
        rest = &rest[1..];
    }
    out.push_str(rest);
    out
}

/// System prompt plus one user message carrying the IR, the HTML and the
/// screenshot, attached once.
pub fn render_critic_prompt(html: &str, ir_summary: &str, screenshot_png: &[u8]) -> Vec<ChatMessage> {
    let text = fill(CRITIC_INPUT, &[("ir_summary", ir_summary), ("html", html)]);
    let b64 = base64::engine::general_purpose::STANDARD.encode(screenshot_png);
    vec![
        ChatMessage::text(ChatRole::System, CRITIC_PROMPT),
        ChatMessage { role: ChatRole::User, parts: vec![Part::Text(text), Part::PngBase64(b64)] },
    ]
}

pub fn render_refiner_prompt(html: &str, critique: Option<&Critique>) -> Vec<ChatMessage> {
    let mut text = fill(REFINER_INPUT, &[("html", html)]);
    if let Some(c) = critique {
        text.push_str(&fill(REFINER_CRITIQUE, &[("critique", &c.to_json())]));
    }
    vec![ChatMessage::text(ChatRole::System, REFINER_PROMPT), ChatMessage::text(ChatRole::User, text)]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IssueType {
    Layout,
    Styling,
    Component,
    MissingContent,
    Accessibility,
    Other(String),
}

impl IssueType {
    pub fn parse(s: &str) -> IssueType {
        let key: String = s.chars().filter(|c| !c.is_whitespace() && *c != '_' && *c != '-').collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "layout" => IssueType::Layout,
            "styling" => IssueType::Styling,
            "component" => IssueType::Component,
            "missingcontent" => IssueType::MissingContent,
            "accessibility" => IssueType::Accessibility,
            _ => IssueType::Other(s.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            IssueType::Layout => "Layout",
            IssueType::Styling => "Styling",
            IssueType::Component => "Component",
            IssueType::MissingContent => "Missing Content",
            IssueType::Accessibility => "Accessibility",
            IssueType::Other(s) => s,
        }
    }
}

impl Serialize for IssueType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub issue_type: IssueType,
    pub description: String,
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Critique {
    #[serde(rename = "critique")]
    pub issues: Vec<Issue>,
}

impl Critique {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("critique serializes")
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("critique does not follow the schema: {0}")]
pub struct SchemaViolation(pub String);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIssue {
    issue_type: String,
    description: String,
    suggestion: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCritique {
    critique: Vec<RawIssue>,
}

/// Strict parse: the whole text must be one JSON object of the critic
/// schema. Fences or prose around it are rejected.
pub fn parse_critique(model_text: &str) -> Result<Critique, SchemaViolation> {
    let raw: RawCritique = serde_json::from_str(model_text.trim()).map_err(|e| SchemaViolation(e.to_string()))?;
    Ok(Critique {
        issues: raw
            .critique
            .into_iter()
            .map(|r| Issue { issue_type: IssueType::parse(&r.issue_type), description: r.description, suggestion: r.suggestion })
            .collect(),
    })
}
