mod common;

use figui::agent::{messages_json, parse_critique, render_critic_prompt, render_refiner_prompt, run_agent, AgentConfig, FixedScreenshot, IssueType, ScriptedModel, StopReason, StubModel, CRITIC_PROMPT};
use figui::codegen::CodegenConfig;
use figui::ir::to_ir;
use std::fs;

/// Compares against a committed file; `FIGUI_BLESS=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = common::fixtures().join("golden").join(name);
    if std::env::var_os("FIGUI_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
    }
    assert_eq!(actual, fs::read_to_string(&path).unwrap(), "{name} differs from golden");
}

const HTML: &str = "<!DOCTYPE html>\n<html><head></head><body><button class=\"bg-blue-500\">Go</button></body></html>\n";

#[test]
fn critic_prompt_golden() {
    let messages = render_critic_prompt(HTML, "page 375x812\n  button \"Go\" at (16, 20)", &[0x89, b'P', b'N', b'G']);
    golden("critic_prompt.json", &(serde_json::to_string_pretty(&messages_json(&messages)).unwrap() + "\n"));
}

#[test]
fn refiner_prompt_golden() {
    let critique = parse_critique(r#"{"critique": [{"issue_type": "Styling", "description": "Button colour is off", "suggestion": "Use bg-purple-600"}]}"#).unwrap();
    let messages = render_refiner_prompt(HTML, Some(&critique));
    golden("refiner_prompt.json", &(serde_json::to_string_pretty(&messages_json(&messages)).unwrap() + "\n"));
}

#[test]
fn example_critique_from_prompt() {
    let example = CRITIC_PROMPT.split_once("Example:\n").unwrap().1;
    let c = parse_critique(example).unwrap();
    assert_eq!(c.issues.len(), 2);
    assert_eq!(c.issues[0].issue_type, IssueType::Styling);
    assert_eq!(c.issues[1].issue_type, IssueType::Layout);
}

#[test]
fn stub_loop_on_committed_fixture() {
    let (_, doc, store) = common::figma_corpus().remove(0);
    let (refined, _, _) = figui::refine::refine(doc, store, &Default::default()).unwrap();
    let ir = to_ir(&refined).unwrap();
    let stub = StubModel { rules: vec![figui::agent::StubRule { issue_type: IssueType::Styling, description: "Title weight".into(), from: "font-semibold".into(), to: "font-bold".into() }] };
    let run = || {
        let mut m = stub.clone();
        run_agent(&ir, &mut FixedScreenshot(common::tiny_png([0, 0, 0])), &AgentConfig::default(), &CodegenConfig::responsive(), &mut m).unwrap()
    };
    let (page, trace) = run();
    assert!(!page.html.contains("font-semibold"));
    assert_eq!(trace.stop_reason, StopReason::EmptyCritique);
    assert_eq!(trace.iterations.len(), 2);
    assert_eq!(trace.to_json(), run().1.to_json());
}

#[test]
fn empty_critique_stops_after_one_iteration() {
    let ir = to_ir(&common::none_layout_design(0)).unwrap();
    let mut m = ScriptedModel::new(["{\"critique\": []}"]);
    let (_, trace) = run_agent(&ir, &mut FixedScreenshot(vec![]), &AgentConfig::default(), &CodegenConfig::faithful(), &mut m).unwrap();
    assert_eq!(trace.iterations.len(), 1);
    assert_eq!(m.requests.len(), 1);
}
