use super::{Cmd, Ctx, RunManifest, SampleRecord, Status, EXIT_OK, EXIT_PARTIAL};
use crate::ablate::{ablate, AblationKind};
use crate::agent::{model_from_spec, run_agent, FixedScreenshot, RenderedScreenshot, ScreenshotSource};
use crate::codegen::{generate, CodegenConfig, CodegenMode};
use crate::curate::{dedup_clusters, heuristic_filter, read_labels, stratified_sample, write_worklist};
use crate::figma::{parse_document, serialize_document_pretty, AssetStore, FigmaDocument};
use crate::ir::{to_ir_with, UiIr};
use crate::metrics::{evaluate as evaluate_html, write_csv, CsvRow};
use crate::refine::refine;
use crate::visual::{load_image, mae, rasterize, render_page_to, FidelityRecord, Sidecar, SCREENSHOT_SCALE};
use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

type CmdResult = Result<i32, String>;

pub(super) fn dispatch(cmd: &Cmd, ctx: &Ctx) -> CmdResult {
    match cmd {
        Cmd::Refine { input, output, dry_run } => cmd_refine(ctx, input, output, *dry_run),
        Cmd::Ablate { input, output, kinds } => cmd_ablate(ctx, input, output, kinds),
        Cmd::Sample { labels, total, out } => cmd_sample(ctx, labels, *total, out),
        Cmd::Curate { input, out, embeddings, with_sidecar } => cmd_curate(ctx, input, out, embeddings.as_deref(), *with_sidecar),
        Cmd::Ir { input, output } => cmd_ir(ctx, input, output),
        Cmd::Generate { input, output, mode, agent } => cmd_generate(ctx, input, output, mode.map(Into::into), *agent),
        Cmd::Agent { input, output, mode } => cmd_generate(ctx, input, output, mode.map(Into::into), true),
        Cmd::Render { input, output, width, height } => cmd_render(ctx, input, output, width.zip(*height)),
        Cmd::Evaluate { html_dir, designs_dir, out_csv, with_ves } => cmd_evaluate(ctx, html_dir, designs_dir, out_csv, *with_ves),
    }
}

/// Sample ids: names of the subdirectories of `dir`, sorted.
pub(crate) fn sample_ids(dir: &Path) -> Result<Vec<String>, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("cannot list {}: {e}", dir.display()))?;
    let mut ids: Vec<String> = entries
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .filter(|n| !n.starts_with('.'))
        .collect();
    ids.sort();
    Ok(ids)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, String> {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().map_err(|e| e.to_string())
}

fn for_each_sample(threads: usize, ids: &[String], f: impl Fn(&str, &mut SampleRecord) + Sync) -> Result<Vec<SampleRecord>, String> {
    Ok(pool(threads)?.install(|| {
        ids.par_iter()
            .map(|id| {
                let mut rec = SampleRecord::new(id);
                f(id, &mut rec);
                if let Some(e) = &rec.error {
                    log::error!("sample {id}: {e}");
                }
                rec
            })
            .collect()
    }))
}

fn finish(ctx: &Ctx, command: &str, samples: Vec<SampleRecord>, default_path: PathBuf) -> CmdResult {
    let m = RunManifest { command: command.to_string(), seed: ctx.seed, config_digest: ctx.config.digest(), jobs: ctx.jobs, samples };
    let path = ctx.manifest.clone().unwrap_or(default_path);
    m.write(&path).map_err(|e| format!("cannot write manifest {}: {e}", path.display()))?;
    let failed = m.failed();
    if failed > 0 {
        eprintln!("{command}: {failed} of {} samples failed", m.samples.len());
        Ok(EXIT_PARTIAL)
    } else {
        Ok(EXIT_OK)
    }
}

fn file_manifest(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn read_doc(path: &Path) -> Result<FigmaDocument, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_document(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), String> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializes") + "\n"
}

fn require_dir(dir: &Path) -> Result<(), String> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(format!("input directory {} does not exist", dir.display()))
    }
}

fn cmd_refine(ctx: &Ctx, input: &Path, output: &Path, dry_run: bool) -> CmdResult {
    require_dir(input)?;
    let ids = sample_ids(input)?;
    if dry_run {
        for id in &ids {
            println!("refine {} -> {}", input.join(id).join("figma.json").display(), output.join(id).display());
        }
        println!("{} samples, nothing written", ids.len());
        return Ok(EXIT_OK);
    }
    let cfg = &ctx.config.refine;
    let records = for_each_sample(ctx.jobs, &ids, |id, rec| {
        let src = input.join(id);
        let Ok((doc, mut store)) = rec.stage("load", || {
            let doc = read_doc(&src.join("figma.json"))?;
            let mut store = AssetStore::load_raw_dir(&src.join("images")).map_err(|e| e.to_string())?;
            // Already-refined samples reference their local assets/ files.
            let local = AssetStore::load_local_dir(&src).map_err(|e| e.to_string())?;
            for (key, bytes) in local.assets {
                let kind = local.kinds[&key];
                store.insert(key, bytes, kind);
            }
            Ok((doc, store))
        }) else {
            return;
        };
        let defs = src.join("definitions.json");
        if defs.is_file() && rec.stage("definitions", || store.load_definitions(&defs).map_err(|e| e.to_string())).is_err() {
            return;
        }
        let Ok((doc, store, report)) = rec.stage("refine", || refine(doc, store, cfg).map_err(|e| e.to_string())) else { return };
        let dst = output.join(id);
        let _ = rec.stage("write", || {
            if dst.join("assets").is_dir() {
                fs::remove_dir_all(dst.join("assets")).map_err(|e| e.to_string())?;
            }
            write(&dst.join("figma.json"), serialize_document_pretty(&doc))?;
            store.write_local(&dst).map_err(|e| e.to_string())?;
            write(&dst.join("refine_report.json"), pretty(&report))
        });
    })?;
    finish(ctx, "refine", records, output.join("manifest.json"))
}

fn copy_assets(src: &Path, dst: &Path) -> Result<(), String> {
    let store = AssetStore::load_local_dir(src).map_err(|e| e.to_string())?;
    store.write_local(dst).map_err(|e| e.to_string())
}

fn cmd_ablate(ctx: &Ctx, input: &Path, output: &Path, kinds: &[AblationKind]) -> CmdResult {
    require_dir(input)?;
    let kinds = if kinds.is_empty() { AblationKind::ALL.to_vec() } else { kinds.to_vec() };
    let ids = sample_ids(input)?;
    let records = for_each_sample(ctx.jobs, &ids, |id, rec| {
        let Ok(doc) = rec.stage("load", || read_doc(&input.join(id).join("figma.json"))) else { return };
        for kind in &kinds {
            let _ = rec.stage(kind.as_str(), || {
                let out = ablate(doc.clone(), *kind).map_err(|e| e.to_string())?;
                let dst = output.join(kind.as_str()).join(id);
                write(&dst.join("figma.json"), serialize_document_pretty(&out))?;
                copy_assets(&input.join(id), &dst)
            });
        }
    })?;
    finish(ctx, "ablate", records, output.join("manifest.json"))
}

fn cmd_sample(ctx: &Ctx, labels: &Path, total: usize, out: &Path) -> CmdResult {
    let file = fs::File::open(labels).map_err(|e| format!("{}: {e}", labels.display()))?;
    let labels = read_labels(file).map_err(|e| e.to_string())?;
    let allocs = stratified_sample(&labels, total, ctx.seed).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_worklist(&mut buf, &allocs).map_err(|e| e.to_string())?;
    write(out, buf)?;
    let samples = allocs
        .iter()
        .flat_map(|a| a.candidates.iter())
        .map(|id| SampleRecord::new(id))
        .collect();
    finish(ctx, "sample", samples, file_manifest(out))
}

fn cmd_curate(ctx: &Ctx, input: &Path, out: &Path, embeddings: Option<&Path>, with_sidecar: bool) -> CmdResult {
    require_dir(input)?;
    let ids = sample_ids(input)?;
    let mut sidecar = if with_sidecar { Some(Sidecar::spawn(&ctx.config.sidecar).map_err(|e| e.to_string())?) } else { None };
    let mut vectors: BTreeMap<String, Vec<f64>> = match embeddings {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: expected an object of id -> vector: {e}", p.display()))?
        }
        None => BTreeMap::new(),
    };
    let mut records = for_each_sample(ctx.jobs, &ids, |id, rec| {
        if let Ok(doc) = rec.stage("load", || read_doc(&input.join(id).join("figma.json"))) {
            let v = heuristic_filter(&doc);
            rec.flags = v.reasons.iter().map(|r| r.as_str().to_string()).collect();
        }
    })?;
    let accepted: Vec<&SampleRecord> = records.iter().filter(|r| r.status == Status::Ok && r.flags.is_empty()).collect();
    if let Some(sc) = sidecar.as_mut() {
        let paths: Vec<PathBuf> = accepted.iter().map(|r| input.join(&r.id).join("screenshot.png")).collect();
        let refs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
        let vs = if refs.is_empty() { Vec::new() } else { sc.embed(&refs).map_err(|e| e.to_string())? };
        vectors = accepted.iter().map(|r| r.id.clone()).zip(vs).collect();
    }
    let pool: BTreeMap<String, Vec<f64>> = accepted.iter().filter_map(|r| vectors.get(&r.id).map(|v| (r.id.clone(), v.clone()))).collect();
    let sizes: BTreeMap<String, u64> =
        pool.keys().map(|id| (id.clone(), fs::metadata(input.join(id).join("figma.json")).map_or(0, |m| m.len()))).collect();
    let survivors = dedup_clusters(&pool, ctx.config.curate.dedup_threshold, &sizes).map_err(|e| e.to_string())?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| e.to_string();
    wtr.write_record(["sample_id", "status", "reasons"]).map_err(csv_err)?;
    for r in &mut records {
        let status = if r.status == Status::Failed {
            "FAILED"
        } else if !r.flags.is_empty() {
            "FILTERED"
        } else if pool.contains_key(&r.id) && !survivors.contains(&r.id) {
            r.flags.push("DUPLICATE".into());
            "DUPLICATE"
        } else {
            if !pool.contains_key(&r.id) && (embeddings.is_some() || with_sidecar) {
                r.flags.push("NO_EMBEDDING".into());
            }
            "ACCEPTED"
        };
        wtr.write_record([r.id.as_str(), status, &r.flags.join(";")]).map_err(csv_err)?;
    }
    write(out, wtr.into_inner().map_err(|e| e.to_string())?)?;
    finish(ctx, "curate", records, file_manifest(out))
}

fn cmd_ir(ctx: &Ctx, input: &Path, output: &Path) -> CmdResult {
    require_dir(input)?;
    let ids = sample_ids(input)?;
    let records = for_each_sample(ctx.jobs, &ids, |id, rec| {
        let Ok(doc) = rec.stage("load", || read_doc(&input.join(id).join("figma.json"))) else { return };
        let Ok(ir) = rec.stage("ir", || to_ir_with(&doc, &ctx.config.ir).map_err(|e| e.to_string())) else { return };
        let _ = rec.stage("write", || write(&output.join(id).join("ir.json"), ir.to_json() + "\n"));
    })?;
    finish(ctx, "ir", records, output.join("manifest.json"))
}

/// IR of a sample: its `ir.json` when present, else built from `figma.json`.
fn load_ir(ctx: &Ctx, dir: &Path) -> Result<(UiIr, Option<FigmaDocument>), String> {
    let ir_path = dir.join("ir.json");
    if ir_path.is_file() {
        let text = fs::read_to_string(&ir_path).map_err(|e| format!("{}: {e}", ir_path.display()))?;
        return Ok((UiIr::from_json(&text).map_err(|e| e.to_string())?, None));
    }
    let doc = read_doc(&dir.join("figma.json"))?;
    let ir = to_ir_with(&doc, &ctx.config.ir).map_err(|e| e.to_string())?;
    Ok((ir, Some(doc)))
}

fn png_bytes(img: &crate::visual::ImageBuffer) -> Result<Vec<u8>, String> {
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).map_err(|e| e.to_string())?;
    Ok(out.into_inner())
}

/// Critic screenshot: a live render when a renderer is configured, else
/// the sample's screenshot/design image, else a preview of its design.
fn screenshot_source(ctx: &Ctx, src: &Path, dst: &Path, ir: &UiIr, doc: Option<&FigmaDocument>) -> Result<Box<dyn ScreenshotSource>, String> {
    let size = (ir.page_size.width, ir.page_size.height);
    if ctx.config.renderer.command.is_some() {
        return Ok(Box::new(RenderedScreenshot { spec: ctx.config.renderer.clone(), work_dir: dst.to_path_buf(), design_size: size }));
    }
    for name in ["screenshot.png", "design.png"] {
        if let Ok(bytes) = fs::read(src.join(name)) {
            return Ok(Box::new(FixedScreenshot(bytes)));
        }
    }
    let doc = match doc {
        Some(d) => d.clone(),
        None => read_doc(&src.join("figma.json"))?,
    };
    let store = AssetStore::load_local_dir(src).map_err(|e| e.to_string())?;
    let img = rasterize(&doc, &store, SCREENSHOT_SCALE as f64).map_err(|e| e.to_string())?;
    Ok(Box::new(FixedScreenshot(png_bytes(&img)?)))
}

fn cmd_generate(ctx: &Ctx, input: &Path, output: &Path, mode: Option<CodegenMode>, agent: bool) -> CmdResult {
    require_dir(input)?;
    let codegen = match mode {
        Some(m) => CodegenConfig::for_mode(m),
        None => ctx.config.codegen.clone(),
    };
    if agent {
        // Surface endpoint problems once, before any sample runs.
        model_from_spec(&ctx.config.agent.endpoint).map_err(|e| e.to_string())?;
    }
    let ids = sample_ids(input)?;
    let records = for_each_sample(ctx.jobs, &ids, |id, rec| {
        let (src, dst) = (input.join(id), output.join(id));
        let Ok((ir, doc)) = rec.stage("ir", || load_ir(ctx, &src)) else { return };
        let html = if agent {
            let r = rec.stage("agent", || {
                let mut shots = screenshot_source(ctx, &src, &dst, &ir, doc.as_ref())?;
                let mut model = model_from_spec(&ctx.config.agent.endpoint).map_err(|e| e.to_string())?;
                match run_agent(&ir, shots.as_mut(), &ctx.config.agent, &codegen, model.as_mut()) {
                    Ok((page, trace)) => {
                        write(&dst.join("agent_trace.json"), trace.to_json() + "\n")?;
                        Ok(page.html)
                    }
                    Err(e) => {
                        if let Some(t) = e.trace() {
                            write(&dst.join("agent_trace.json"), t.to_json() + "\n")?;
                        }
                        Err(e.to_string())
                    }
                }
            });
            let Ok(h) = r else { return };
            h
        } else {
            let Ok(page) = rec.stage("generate", || generate(&ir, &codegen).map_err(|e| e.to_string())) else { return };
            page.html
        };
        let _ = rec.stage("write", || {
            write(&dst.join("index.html"), &html)?;
            write(&dst.join("ir.json"), ir.to_json() + "\n")?;
            copy_assets(&src, &dst)
        });
    })?;
    finish(ctx, if agent { "agent" } else { "generate" }, records, output.join("manifest.json"))
}

fn cmd_render(ctx: &Ctx, input: &Path, output: &Path, size: Option<(f64, f64)>) -> CmdResult {
    require_dir(input)?;
    let spec = &ctx.config.renderer;
    if spec.command.is_none() {
        return Err("renderer unavailable: set renderer.command in the config or FIGUI_RENDERER_COMMAND".into());
    }
    let ids = sample_ids(input)?;
    let threads = ctx.jobs.min(spec.pool_size);
    let records = for_each_sample(threads, &ids, |id, rec| {
        let src = input.join(id);
        let Ok(design) = rec.stage("size", || match (load_ir(ctx, &src), size) {
            (Ok((ir, _)), _) => Ok((ir.page_size.width, ir.page_size.height)),
            (Err(_), Some(s)) => Ok(s),
            (Err(e), None) => Err(format!("no design size (pass --width/--height): {e}")),
        }) else {
            return;
        };
        let dst = output.join(id);
        let _ = rec.stage("render", || {
            fs::create_dir_all(&dst).map_err(|e| e.to_string())?;
            render_page_to(&src.join("index.html"), design, spec, &dst.join("screenshot.png")).map(|_| ()).map_err(|e| e.to_string())
        });
    })?;
    finish(ctx, "render", records, output.join("manifest.json"))
}

fn cmd_evaluate(ctx: &Ctx, html_dir: &Path, designs_dir: &Path, out_csv: &Path, with_ves: bool) -> CmdResult {
    require_dir(html_dir)?;
    let mut sidecar = if with_ves { Some(Sidecar::spawn(&ctx.config.sidecar).map_err(|e| format!("--with-ves: {e}"))?) } else { None };
    let ids: Vec<String> = sample_ids(html_dir)?.into_iter().filter(|id| html_dir.join(id).join("index.html").is_file()).collect();
    let reports_dir = out_csv.with_extension("reports");

    let mut rows: Vec<CsvRow> = ids.iter().map(|id| CsvRow { sample_id: id.clone(), ..Default::default() }).collect();
    let mut records = pool(ctx.jobs)?.install(|| {
        rows.par_iter_mut()
            .map(|row| {
                let id = row.sample_id.clone();
                let mut rec = SampleRecord::new(&id);
                let page = html_dir.join(&id).join("index.html");
                if let Ok(report) = rec.stage("metrics", || {
                    let html = fs::read_to_string(&page).map_err(|e| e.to_string())?;
                    evaluate_html(&html).map_err(|e| e.to_string())
                }) {
                    row.metrics = Some(report);
                } else {
                    row.flags.push("unparsable-html".into());
                }
                let design = designs_dir.join(&id).join("design.png");
                let shot = html_dir.join(&id).join("screenshot.png");
                match (design.is_file(), shot.is_file()) {
                    (true, true) => {
                        if let Ok(m) = rec.stage("mae", || mae(&load_image(&design).map_err(|e| e.to_string())?, &load_image(&shot).map_err(|e| e.to_string())?).map_err(|e| e.to_string())) {
                            row.mae = Some(m);
                        }
                    }
                    (d, s) => {
                        if !d {
                            row.flags.push("missing-design".into());
                        }
                        if !s {
                            row.flags.push("missing-screenshot".into());
                        }
                        rec.fail(format!("unpaired sample: design {} screenshot {}", if d { "present" } else { "missing" }, if s { "present" } else { "missing" }));
                    }
                }
                rec
            })
            .collect::<Vec<_>>()
    });

    if let Some(sc) = sidecar.as_mut() {
        for (row, rec) in rows.iter_mut().zip(records.iter_mut()) {
            let (design, shot) = (designs_dir.join(&row.sample_id).join("design.png"), html_dir.join(&row.sample_id).join("screenshot.png"));
            if row.mae.is_some() {
                if let Ok(v) = rec.stage("ves", || sc.ves(&design, &shot).map_err(|e| e.to_string())) {
                    row.ves = Some(v);
                }
            }
        }
    }

    for (row, rec) in rows.iter().zip(records.iter_mut()) {
        rec.flags = row.flags.clone();
        let fidelity = row.mae.map(|m| {
            let viewport = image::image_dimensions(html_dir.join(&row.sample_id).join("screenshot.png")).unwrap_or((0, 0));
            FidelityRecord::new(m, row.ves, viewport)
        });
        let report = json!({ "sample_id": row.sample_id, "metrics": row.metrics, "fidelity": fidelity, "flags": row.flags });
        write(&reports_dir.join(format!("{}.json", row.sample_id)), pretty(&report))?;
    }

    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).map_err(|e| e.to_string())?;
    write(out_csv, buf)?;
    if rows.is_empty() {
        eprintln!("evaluate: no samples with index.html under {}", html_dir.display());
        finish(ctx, "evaluate", records, file_manifest(out_csv))?;
        return Ok(EXIT_PARTIAL);
    }
    finish(ctx, "evaluate", records, file_manifest(out_csv))
}
