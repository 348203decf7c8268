mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn figui(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_figui"));
    for (k, _) in figui::config::ENV_OVERRIDES {
        cmd.env_remove(k);
    }
    cmd.args(args.iter().map(|a| a.as_ref())).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn copy_dir(src: &Path, dst: &Path) {
    fs::create_dir_all(dst).unwrap();
    for e in fs::read_dir(src).unwrap() {
        let e = e.unwrap();
        let to = dst.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &to);
        } else {
            fs::copy(e.path(), to).unwrap();
        }
    }
}

/// Two committed samples plus one whose figma.json is truncated.
fn raw_corpus(root: &Path) -> PathBuf {
    let raw = root.join("raw");
    for id in ["m00", "d06"] {
        copy_dir(&common::fixtures().join("figma").join(id), &raw.join(id));
    }
    fs::create_dir_all(raw.join("broken")).unwrap();
    fs::write(raw.join("broken/figma.json"), "{\"document\": {\"id\": \"0:1\", \"type\": \"FRAME\"").unwrap();
    raw
}

fn refined(root: &Path) -> PathBuf {
    let raw = raw_corpus(root);
    fs::remove_dir_all(raw.join("broken")).unwrap();
    let out = root.join("refined");
    let o = figui(&[&"refine", &raw, &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn html_files(dir: &Path) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path().join("index.html");
            p.is_file().then(|| (p.display().to_string(), fs::read_to_string(&p).unwrap()))
        })
        .collect();
    v.sort();
    v
}

#[test]
fn refine_isolates_a_corrupt_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = raw_corpus(tmp.path());
    let out = tmp.path().join("refined");
    let o = figui(&[&"--jobs", &"2", &"refine", &raw, &out]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    for id in ["m00", "d06"] {
        assert!(out.join(id).join("figma.json").is_file());
        assert!(out.join(id).join("refine_report.json").is_file());
        assert!(out.join(id).join("assets").read_dir().unwrap().count() > 0);
    }
    assert!(!out.join("broken/figma.json").exists());
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let samples = manifest["samples"].as_array().unwrap();
    let failed: Vec<&str> = samples.iter().filter(|s| s["status"] == "FAILED").map(|s| s["id"].as_str().unwrap()).collect();
    assert_eq!(failed, ["broken"]);
    assert!(samples.iter().find(|s| s["id"] == "broken").unwrap()["error"].as_str().unwrap().contains("figma.json"));
}

#[test]
fn refine_dry_run_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = raw_corpus(tmp.path());
    let out = tmp.path().join("refined");
    let o = figui(&[&"refine", &"--dry-run", &raw, &out]);
    assert!(o.status.success());
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("m00"));
}

#[test]
fn refined_output_is_a_fixed_point() {
    let tmp = tempfile::tempdir().unwrap();
    let once = refined(tmp.path());
    let twice = tmp.path().join("twice");
    let o = figui(&[&"refine", &once, &twice]);
    assert!(o.status.success(), "{}", stderr(&o));
    for id in ["m00", "d06"] {
        assert_eq!(fs::read(once.join(id).join("figma.json")).unwrap(), fs::read(twice.join(id).join("figma.json")).unwrap());
    }
}

#[test]
fn responsive_generation_has_no_absolute_tokens() {
    let tmp = tempfile::tempdir().unwrap();
    let input = refined(tmp.path());
    let out = tmp.path().join("gen");
    let o = figui(&[&"generate", &"--mode", &"responsive", &input, &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let pages = html_files(&out);
    assert_eq!(pages.len(), 2);
    for (path, html) in &pages {
        let doc = figui::metrics::parse_html(html).unwrap();
        doc.check_complete().unwrap();
        for e in &doc.elements {
            assert!(!e.classes.iter().any(|t| t.utility == "absolute" || t.utility == "fixed"), "{path}");
        }
    }
    assert!(out.join("m00/ir.json").is_file());
    let faithful = tmp.path().join("faithful");
    assert!(figui(&[&"generate", &"--mode", &"faithful", &input, &faithful]).status.success());
    assert!(html_files(&faithful).iter().all(|(_, h)| h.contains("absolute")));
}

#[test]
fn stub_agent_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let input = refined(tmp.path());
    let cfg = tmp.path().join("figui.toml");
    fs::write(&cfg, "[agent]\nmax_iterations = 2\n\n[agent.endpoint]\nkind = \"stub\"\n").unwrap();
    let mut outputs = Vec::new();
    for run in ["one", "two"] {
        let out = tmp.path().join(run);
        let o = figui(&[&"--config", &cfg, &"generate", &"--agent", &input, &out]);
        assert!(o.status.success(), "{}", stderr(&o));
        let trace = fs::read(out.join("m00/agent_trace.json")).unwrap();
        outputs.push((fs::read(out.join("m00/index.html")).unwrap(), trace));
    }
    assert_eq!(outputs[0], outputs[1]);
    let trace: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    assert!(!trace["iterations"].as_array().unwrap().is_empty());
}

#[test]
fn ir_and_ablate_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let input = refined(tmp.path());
    let ir = tmp.path().join("ir");
    assert!(figui(&[&"ir", &input, &ir]).status.success());
    let text = fs::read_to_string(ir.join("d06/ir.json")).unwrap();
    assert!(figui::ir::UiIr::from_json(&text).is_ok());

    let ab = tmp.path().join("ablated");
    let o = figui(&[&"ablate", &"--kind", &"text", &"--kind", &"hierarchy", &input, &ab]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text_doc = fs::read_to_string(ab.join("text/m00/figma.json")).unwrap();
    assert!(!text_doc.contains("\"characters\""));
    assert!(ab.join("hierarchy/d06/figma.json").is_file());
    assert!(!ab.join("geometry").exists());
}

#[test]
fn render_needs_a_renderer() {
    let tmp = tempfile::tempdir().unwrap();
    let o = figui(&[&"render", &tmp.path(), &tmp.path().join("out")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("renderer"), "{}", stderr(&o));
}

#[test]
fn render_with_configured_renderer() {
    let Some(cmd) = common::fake_renderer_command() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let input = refined(tmp.path());
    let gen = tmp.path().join("gen");
    assert!(figui(&[&"generate", &input, &gen]).status.success());
    let cfg = tmp.path().join("figui.toml");
    fs::write(&cfg, format!("[renderer]\ncommand = {:?}\npool_size = 2\n", cmd)).unwrap();
    let o = figui(&[&"--config", &cfg, &"render", &gen, &gen]);
    assert!(o.status.success(), "{}", stderr(&o));
    let shot = figui::visual::load_image(&gen.join("m00/screenshot.png")).unwrap();
    assert_eq!(shot.dimensions(), (750, 1624));
}

#[test]
fn evaluate_matches_golden_csv() {
    let dir = common::fixtures().join("evaluate");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("metrics.csv");
    let o = figui(&[&"evaluate", &dir.join("html"), &dir.join("designs"), &out]);
    // Sample c has no screenshot and is reported as failed.
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap(), fs::read_to_string(dir.join("expected.csv")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("metrics.reports/b.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"]["avu"]["numerator"], 10);
}

#[test]
fn evaluate_with_ves_needs_a_sidecar() {
    let dir = common::fixtures().join("evaluate");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("metrics.csv");
    let o = figui(&[&"evaluate", &"--with-ves", &dir.join("html"), &dir.join("designs"), &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sidecar"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn evaluate_with_fake_sidecar() {
    let Some(cmd) = common::fake_sidecar_command() else { return };
    let dir = common::fixtures().join("evaluate");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("figui.toml");
    fs::write(&cfg, format!("[sidecar]\ncommand = {:?}\n", cmd)).unwrap();
    let out = tmp.path().join("metrics.csv");
    let o = figui(&[&"--config", &cfg, &"evaluate", &"--with-ves", &dir.join("html"), &dir.join("designs"), &out]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let row_a = csv.lines().find(|l| l.starts_with("a,")).unwrap();
    let ves: f64 = row_a.split(',').nth(1).unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&ves));
}

#[test]
fn evaluate_empty_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let html = tmp.path().join("html");
    fs::create_dir(&html).unwrap();
    let out = tmp.path().join("metrics.csv");
    let o = figui(&[&"evaluate", &html, &tmp.path(), &out]);
    assert_ne!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&out).unwrap(), "sample_id,VES,MAE,RUR,BC,FU,APR,STR,ISR,AVU,CCR,flags\n");
}

#[test]
fn sample_worklist_is_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let labels = tmp.path().join("labels.csv");
    let mut text = String::from("sample_id,platform,complexity,quality,content_category,description\n");
    for i in 0..60 {
        let platform = if i % 3 == 0 { "desktop" } else { "mobile" };
        text += &format!("p{i:02},{platform},{},{},Marketing & Landing Content,page {i}\n", ["low", "mid", "high"][i % 3], 1 + i % 3);
    }
    fs::write(&labels, text).unwrap();
    let run = |seed: &str, name: &str| {
        let out = tmp.path().join(name);
        let o = figui(&[&"--seed", &seed, &"sample", &labels, &"--total", &"10", &"--out", &out]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    let a = run("3", "a.csv");
    assert_eq!(a, run("3", "b.csv"));
    assert!(a.starts_with("platform,complexity,quality,category,target,rank,sample_id\n"));
}

#[test]
fn bad_config_is_an_environment_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("figui.toml");
    fs::write(&cfg, "[agent]\nmax_iterations = 0\n").unwrap();
    let o = figui(&[&"--config", &cfg, &"ir", &tmp.path(), &tmp.path().join("o")]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(figui(&[&"--config", &cfg, &"ir", &tmp.path(), &tmp.path().join("o")]).status.code(), Some(2));
}
