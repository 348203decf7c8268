//! Critic/refiner loop over rule-generated HTML.
//!
//! The draft comes from [`crate::codegen::generate`]. Each iteration asks
//! the critic for a structured critique (skipped when the critic is
//! disabled), stops on an empty one, and otherwise asks the refiner for a
//! revised document. A refiner answer is accepted once it parses as a
//! complete HTML document; one bad answer is retried, a second one ends the
//! run with [`AgentError::InvalidModelOutput`].
//!
//! The critic's screenshot comes from a [`ScreenshotSource`]. With a
//! renderer configured the current HTML is re-rendered every iteration.

mod model;
mod prompt;

pub use model::{model_from_spec, ChatModel, EndpointSpec, HttpChatModel, ModelError, ScriptedModel, StubModel, StubRule};
pub use prompt::{
    messages_json, parse_critique, render_critic_prompt, render_refiner_prompt, ChatMessage, ChatRole, Critique, Issue, IssueType, Part,
    SchemaViolation, CRITIC_PROMPT, JSON_ONLY_PROMPT, MULTIMODAL_PROMPT, REFINER_PROMPT,
};

use crate::codegen::{generate, CodegenConfig, CodegenError, GeneratedPage};
use crate::ir::UiIr;
use crate::metrics::{self, parse_html, MetricsReport};
use crate::visual::{render_page_to, RendererSpec};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub max_iterations: u32,
    pub critic_enabled: bool,
    pub critic_temperature: f64,
    pub refiner_temperature: f64,
    pub endpoint: EndpointSpec,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig { max_iterations: 3, critic_enabled: true, critic_temperature: 0.5, refiner_temperature: 0.0, endpoint: EndpointSpec::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopReason {
    MaxIters,
    EmptyCritique,
    ModelError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iteration {
    pub html_before: String,
    /// None when the critic is disabled.
    pub critique: Option<Critique>,
    pub html_after: String,
    /// Refiner answers rejected before one was accepted.
    pub rejected_outputs: u32,
    pub metrics_snapshot: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentTrace {
    pub iterations: Vec<Iteration>,
    pub stop_reason: StopReason,
}

impl AgentTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("{message}")]
    ModelUnavailable { message: String, trace: Box<AgentTrace> },
    #[error("invalid model output after retry: {message}")]
    InvalidModelOutput { message: String, trace: Box<AgentTrace> },
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("screenshot for critic: {0}")]
    Screenshot(String),
}

impl AgentError {
    /// Trace up to the failure, for the two model errors.
    pub fn trace(&self) -> Option<&AgentTrace> {
        match self {
            AgentError::ModelUnavailable { trace, .. } | AgentError::InvalidModelOutput { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

/// PNG bytes shown to the critic for the current HTML.
pub trait ScreenshotSource {
    fn screenshot(&mut self, html: &str) -> Result<Vec<u8>, String>;
}

/// The same image every iteration.
pub struct FixedScreenshot(pub Vec<u8>);

impl ScreenshotSource for FixedScreenshot {
    fn screenshot(&mut self, _html: &str) -> Result<Vec<u8>, String> {
        Ok(self.0.clone())
    }
}

/// Writes the HTML into `work_dir` (next to its assets) and renders it.
pub struct RenderedScreenshot {
    pub spec: RendererSpec,
    pub work_dir: PathBuf,
    pub design_size: (f64, f64),
}

impl ScreenshotSource for RenderedScreenshot {
    fn screenshot(&mut self, html: &str) -> Result<Vec<u8>, String> {
        let page = self.work_dir.join("agent-current.html");
        let png = self.work_dir.join("agent-current.png");
        std::fs::write(&page, html).map_err(|e| format!("{}: {e}", page.display()))?;
        render_page_to(&page, self.design_size, &self.spec, &png).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&png).map_err(|e| format!("{}: {e}", png.display()))?;
        let _ = std::fs::remove_file(&page);
        let _ = std::fs::remove_file(&png);
        Ok(bytes)
    }
}

/// Accepts a refiner answer when it parses strictly and has exactly one
/// html/head/body skeleton.
pub fn validate_document(text: &str) -> Result<String, String> {
    let doc = parse_html(text).map_err(|e| e.to_string())?;
    doc.check_complete()?;
    Ok(text.trim().to_string() + "\n")
}

fn snapshot(html: &str) -> MetricsReport {
    metrics::evaluate(html).expect("accepted documents parse")
}

pub fn run_agent(
    ir: &UiIr,
    screenshots: &mut dyn ScreenshotSource,
    config: &AgentConfig,
    codegen: &CodegenConfig,
    model: &mut dyn ChatModel,
) -> Result<(GeneratedPage, AgentTrace), AgentError> {
    if config.max_iterations < 1 {
        return Err(AgentError::InvalidConfig("max_iterations must be at least 1".into()));
    }
    let draft = generate(ir, codegen)?;
    let ir_summary = ir.to_json();
    let mut html = draft.html.clone();
    let mut iterations = Vec::new();

    let fail = |iterations: &Vec<Iteration>, make: fn(String, Box<AgentTrace>) -> AgentError, message: String| {
        make(message, Box::new(AgentTrace { iterations: iterations.clone(), stop_reason: StopReason::ModelError }))
    };
    let unavailable = |m: String, trace| AgentError::ModelUnavailable { message: m, trace };
    let invalid = |m: String, trace| AgentError::InvalidModelOutput { message: m, trace };

    for _ in 0..config.max_iterations {
        let critique = if config.critic_enabled {
            let shot = screenshots.screenshot(&html).map_err(AgentError::Screenshot)?;
            let msgs = render_critic_prompt(&html, &ir_summary, &shot);
            let mut parsed = None;
            let mut last_err = String::new();
            for _ in 0..2 {
                let text = model.complete(&msgs, config.critic_temperature).map_err(|e| fail(&iterations, unavailable, e.to_string()))?;
                match parse_critique(&text) {
                    Ok(c) => {
                        parsed = Some(c);
                        break;
                    }
                    Err(e) => {
                        log::warn!("critic output rejected: {e}");
                        last_err = e.to_string();
                    }
                }
            }
            let c = parsed.ok_or_else(|| fail(&iterations, invalid, format!("critic: {last_err}")))?;
            if c.is_empty() {
                iterations.push(Iteration { html_before: html.clone(), critique: Some(c), html_after: html.clone(), rejected_outputs: 0, metrics_snapshot: snapshot(&html) });
                return Ok((finish(&draft, &html), AgentTrace { iterations, stop_reason: StopReason::EmptyCritique }));
            }
            Some(c)
        } else {
            None
        };

        let msgs = render_refiner_prompt(&html, critique.as_ref());
        let mut accepted = None;
        let mut rejected = 0;
        let mut last_err = String::new();
        for _ in 0..2 {
            let text = model.complete(&msgs, config.refiner_temperature).map_err(|e| fail(&iterations, unavailable, e.to_string()))?;
            match validate_document(&text) {
                Ok(doc) => {
                    accepted = Some(doc);
                    break;
                }
                Err(e) => {
                    log::warn!("refiner output rejected: {e}");
                    rejected += 1;
                    last_err = e;
                }
            }
        }
        let after = accepted.ok_or_else(|| fail(&iterations, invalid, format!("refiner: {last_err}")))?;
        iterations.push(Iteration { html_before: html, critique, html_after: after.clone(), rejected_outputs: rejected, metrics_snapshot: snapshot(&after) });
        html = after;
    }
    Ok((finish(&draft, &html), AgentTrace { iterations, stop_reason: StopReason::MaxIters }))
}

/// Final page; the asset set keeps the draft's paths still present.
fn finish(draft: &GeneratedPage, html: &str) -> GeneratedPage {
    let used = draft.asset_refs_used.iter().filter(|p| html.contains(crate::codegen::escape_path(p).as_str())).cloned().collect();
    GeneratedPage { html: html.to_string(), asset_refs_used: used }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figma::Rect;
    use crate::ir::IrNode;

    fn ir() -> UiIr {
        let mut root = IrNode::container("0", Rect::new(0.0, 0.0, 200.0, 100.0));
        root.name = "Demo".into();
        let mut btn = IrNode::container("1", Rect::new(10.0, 10.0, 80.0, 30.0));
        btn.style.background = Some(crate::ir::Background::Color(crate::figma::Rgba::from_rgb8(0x3b, 0x82, 0xf6)));
        UiIr::new(200.0, 100.0, root.with_children(vec![btn]))
    }

    fn run(model: &mut dyn ChatModel, cfg: &AgentConfig) -> Result<(GeneratedPage, AgentTrace), AgentError> {
        run_agent(&ir(), &mut FixedScreenshot(vec![1, 2, 3]), cfg, &CodegenConfig::responsive(), model)
    }

    #[test]
    fn stub_converges() {
        let (page, trace) = run(&mut StubModel::default(), &AgentConfig::default()).unwrap();
        assert!(page.html.contains("bg-purple-600"), "{}", page.html);
        assert_eq!(trace.stop_reason, StopReason::EmptyCritique);
        assert_eq!(trace.iterations.len(), 2);
    }

    #[test]
    fn empty_critique_is_fixed_point() {
        let draft = generate(&ir(), &CodegenConfig::responsive()).unwrap();
        let (page, trace) = run(&mut ScriptedModel::new([r#"{"critique": []}"#]), &AgentConfig::default()).unwrap();
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.stop_reason, StopReason::EmptyCritique);
        assert_eq!(page.html, draft.html);
    }

    #[test]
    fn refiner_garbage_twice() {
        let crit = r#"{"critique": [{"issue_type": "Layout", "description": "d", "suggestion": "s"}]}"#;
        let mut m = ScriptedModel::new([crit, "Sure! Here it is", "<html><body></html>"]);
        let err = run(&mut m, &AgentConfig::default()).unwrap_err();
        assert!(matches!(err, AgentError::InvalidModelOutput { .. }));
        assert_eq!(err.trace().unwrap().stop_reason, StopReason::ModelError);
    }

    #[test]
    fn retry_then_accept_and_temperatures() {
        let crit = r#"{"critique": [{"issue_type": "Layout", "description": "d", "suggestion": "s"}]}"#;
        let good = "<!DOCTYPE html><html><head></head><body><p>x</p></body></html>";
        let mut m = ScriptedModel::new([crit, "nope", good]);
        let cfg = AgentConfig { max_iterations: 1, ..Default::default() };
        let (page, trace) = run(&mut m, &cfg).unwrap();
        assert_eq!(trace.stop_reason, StopReason::MaxIters);
        assert_eq!(trace.iterations[0].rejected_outputs, 1);
        assert_eq!(page.html.trim(), good);
        let temps: Vec<f64> = m.requests.iter().map(|r| r.1).collect();
        assert_eq!(temps, [0.5, 0.0, 0.0]);
    }

    #[test]
    fn critic_disabled_runs_refiner_only() {
        let good = "<!DOCTYPE html><html><head></head><body></body></html>";
        let mut m = ScriptedModel::new([good, good]);
        let cfg = AgentConfig { max_iterations: 2, critic_enabled: false, ..Default::default() };
        let (_, trace) = run(&mut m, &cfg).unwrap();
        assert_eq!(trace.iterations.len(), 2);
        assert!(trace.iterations.iter().all(|i| i.critique.is_none()));
        assert_eq!(m.requests[0].0[0].text_content(), REFINER_PROMPT);
    }

    #[test]
    fn model_down() {
        let err = run(&mut ScriptedModel::default(), &AgentConfig::default()).unwrap_err();
        assert!(matches!(err, AgentError::ModelUnavailable { .. }));
        let err = run(&mut ScriptedModel::default(), &AgentConfig { max_iterations: 0, ..Default::default() }).unwrap_err();
        assert!(matches!(err, AgentError::InvalidConfig(_)));
    }
}
