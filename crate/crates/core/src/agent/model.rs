use super::prompt::{messages_json, parse_critique, ChatMessage, ChatRole, Critique, Issue, IssueType, CRITIC_PROMPT};
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::VecDeque;
use std::sync::OnceLock;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("model unavailable: {0}")]
pub struct ModelError(pub String);

/// One chat-completions style exchange.
pub trait ChatModel {
    fn complete(&mut self, messages: &[ChatMessage], temperature: f64) -> Result<String, ModelError>;
}

/// Where the agent's model lives. `kind = "stub"` selects [`StubModel`]
/// with its default rule; `"http"` an OpenAI-compatible server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointSpec {
    pub kind: String,
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
}

impl Default for EndpointSpec {
    fn default() -> Self {
        EndpointSpec { kind: "http".into(), base_url: "https://openrouter.ai/api/v1".into(), model: String::new(), api_key_env: Some("FIGUI_API_KEY".into()), timeout_secs: 300 }
    }
}

impl EndpointSpec {
    pub fn stub() -> Self {
        EndpointSpec { kind: "stub".into(), ..Default::default() }
    }
}

pub fn model_from_spec(spec: &EndpointSpec) -> Result<Box<dyn ChatModel + Send>, ModelError> {
    match spec.kind.as_str() {
        "stub" => Ok(Box::new(StubModel::default())),
        "http" => Ok(Box::new(HttpChatModel::new(spec)?)),
        other => Err(ModelError(format!("unknown endpoint kind {other:?}"))),
    }
}

pub struct HttpChatModel {
    agent: ureq::Agent,
    url: String,
    model: String,
    token: Option<String>,
}

impl HttpChatModel {
    pub fn new(spec: &EndpointSpec) -> Result<Self, ModelError> {
        if spec.model.is_empty() {
            return Err(ModelError("endpoint model id is empty".into()));
        }
        let token = match &spec.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| ModelError(format!("environment variable {var} is not set")))?),
            None => None,
        };
        let agent = ureq::Agent::config_builder().timeout_global(Some(Duration::from_secs(spec.timeout_secs))).build().new_agent();
        Ok(HttpChatModel { agent, url: format!("{}/chat/completions", spec.base_url.trim_end_matches('/')), model: spec.model.clone(), token })
    }
}

impl ChatModel for HttpChatModel {
    fn complete(&mut self, messages: &[ChatMessage], temperature: f64) -> Result<String, ModelError> {
        let body = json!({ "model": self.model, "messages": messages_json(messages), "temperature": temperature });
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(t) = &self.token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| ModelError(format!("{}: {e}", self.url)))?;
        let v: Value = resp.body_mut().read_json().map_err(|e| ModelError(format!("response body: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ModelError(format!("response has no choices[0].message.content: {v}")))
    }
}

/// Replays canned responses in order and records every request.
#[derive(Debug, Default)]
pub struct ScriptedModel {
    pub responses: VecDeque<Result<String, ModelError>>,
    pub requests: Vec<(Vec<ChatMessage>, f64)>,
}

impl ScriptedModel {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(responses: I) -> Self {
        ScriptedModel { responses: responses.into_iter().map(|s| Ok(s.into())).collect(), requests: Vec::new() }
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&mut self, messages: &[ChatMessage], temperature: f64) -> Result<String, ModelError> {
        self.requests.push((messages.to_vec(), temperature));
        self.responses.pop_front().unwrap_or_else(|| Err(ModelError("script exhausted".into())))
    }
}

/// Token replacement the stub critic asks for while `from` is present.
#[derive(Debug, Clone, PartialEq)]
pub struct StubRule {
    pub issue_type: IssueType,
    pub description: String,
    pub from: String,
    pub to: String,
}

/// Deterministic offline model. As critic it reports one issue per rule
/// whose `from` token is still in the HTML, phrased "change 'a' to 'b'";
/// as refiner it applies every such suggestion of the critique by text
/// replacement. Converges to an empty critique.
#[derive(Debug, Clone)]
pub struct StubModel {
    pub rules: Vec<StubRule>,
}

impl Default for StubModel {
    fn default() -> Self {
        StubModel {
            rules: vec![StubRule {
                issue_type: IssueType::Styling,
                description: "The primary action button's background color is incorrect.".into(),
                from: "bg-blue-500".into(),
                to: "bg-purple-600".into(),
            }],
        }
    }
}

fn suggestion_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"change '([^']+)' to '([^']*)'").unwrap())
}

/// The `<!DOCTYPE html> .. </html>` span of a prompt text.
fn html_in(text: &str) -> &str {
    let start = text.find("<!DOCTYPE").or_else(|| text.find("<html")).unwrap_or(0);
    let end = text.rfind("</html>").map(|i| i + "</html>".len()).unwrap_or(text.len());
    &text[start..end.max(start)]
}

impl ChatModel for StubModel {
    fn complete(&mut self, messages: &[ChatMessage], _temperature: f64) -> Result<String, ModelError> {
        let system = messages.iter().find(|m| m.role == ChatRole::System).map(ChatMessage::text_content).unwrap_or_default();
        let user = messages.iter().rev().find(|m| m.role == ChatRole::User).map(ChatMessage::text_content).unwrap_or_default();
        let html = html_in(&user);
        if system == CRITIC_PROMPT {
            let issues = self
                .rules
                .iter()
                .filter(|r| html.contains(&r.from))
                .map(|r| Issue { issue_type: r.issue_type.clone(), description: r.description.clone(), suggestion: format!("change '{}' to '{}'", r.from, r.to) })
                .collect();
            return Ok(Critique { issues }.to_json());
        }
        let mut out = html.to_string();
        if let Some(i) = user.find("\n\nCritique:\n") {
            let critique = parse_critique(&user[i + "\n\nCritique:\n".len()..]).map_err(|e| ModelError(e.to_string()))?;
            for issue in &critique.issues {
                for cap in suggestion_re().captures_iter(&issue.suggestion) {
                    out = out.replace(&cap[1], &cap[2]);
                }
            }
        }
        Ok(out)
    }
}
