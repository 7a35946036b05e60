//! End-to-end driver: generate a world, serve it, replay a walk against the
//! live gateway, then run every telemetry stage over the resulting logs.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use biblio_core::geom::Point;
use biblio_core::log::{ApiLogEntry, Module};
use biblio_core::telemetry::{
    annotate, fit_power_law, fit_rank_frequency, heatmap, mine_queries, parse_logs, recommend_table,
    subject_distribution, subject_table, time_series, trace_identifier, wayfinder_table, write_recommend_csv,
    write_subject_csv, write_wayfinder_csv, GridSpec, HeatMode, PowerLawFit, TextStats, YearMonth,
};
use biblio_gateway::{AppState, Gateway, GatewayConfig, LogSink, SIMULATED_TIME_HEADER};
use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};

use crate::modules::{gen_module_logs, ModuleMix};
use crate::walk::{gen_walk, Action, WalkProfile, WalkScript};
use crate::world::{gen_corpus, CorpusProfile, Floor, STUDY_START};

/// Report run settings, read from TOML. `out` resolves against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Concurrent requests during replay; 1 replays in order.
    pub parallel: usize,
    /// Check for the literature short head and a power-law tail.
    pub expect_short_head: bool,
    pub corpus: CorpusProfile,
    pub walk: WalkProfile,
    pub modules: ModuleMix,
    pub telemetry: TelemetrySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TelemetrySection {
    pub cell_size: f64,
    /// `bin` or `gaussian:SIGMA`.
    pub mode: String,
    pub min_count: Option<u64>,
    pub per_request: bool,
}

impl Default for TelemetrySection {
    fn default() -> Self {
        TelemetrySection {
            cell_size: 20.0,
            mode: "bin".into(),
            min_count: None,
            per_request: false,
        }
    }
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            seed: 2016,
            out: PathBuf::from("report"),
            parallel: 1,
            expect_short_head: true,
            corpus: CorpusProfile::default(),
            walk: WalkProfile::default(),
            modules: ModuleMix::default(),
            telemetry: TelemetrySection::default(),
        }
    }
}

impl ReportConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReportError> {
        let path = path.as_ref();
        let fail = |message: String| ReportError {
            stage: Stage::Config,
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
        let mut cfg: ReportConfig = toml::from_str(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
        if cfg.out.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.out = base.join(&cfg.out);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Generate,
    Load,
    Walk,
    Serve,
    Replay,
    Parse,
    Annotate,
    Tables,
    Heatmap,
    Subjects,
    Trace,
    Mine,
    Monthly,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Generate => "generate",
            Stage::Load => "load",
            Stage::Walk => "walk",
            Stage::Serve => "serve",
            Stage::Replay => "replay",
            Stage::Parse => "parse",
            Stage::Annotate => "annotate",
            Stage::Tables => "tables",
            Stage::Heatmap => "heatmap",
            Stage::Subjects => "subjects",
            Stage::Trace => "trace",
            Stage::Mine => "mine",
            Stage::Monthly => "monthly",
            Stage::Write => "write",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("stage {stage} failed: {message}")]
pub struct ReportError {
    pub stage: Stage,
    pub message: String,
}

fn at<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> ReportError {
    move |e| ReportError {
        stage,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub ranks: usize,
}

impl From<PowerLawFit> for FitSummary {
    fn from(f: PowerLawFit) -> Self {
        FitSummary {
            exponent: f.exponent,
            intercept: f.intercept,
            r_squared: f.r_squared,
            ranks: f.ranks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextSummary {
    pub total_words: u64,
    pub unique_forms: u64,
    pub top: Vec<(String, u64)>,
}

impl From<TextStats> for TextSummary {
    fn from(t: TextStats) -> Self {
        TextSummary {
            total_words: t.total_words,
            unique_forms: t.unique_forms,
            top: t.top,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatSummary {
    pub mode: String,
    pub cell_size: f64,
    pub points: usize,
    pub mass: f64,
    pub out_of_extent: usize,
}

/// Everything the report measured. It holds no wall-clock values, so equal
/// configs give equal reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub records: usize,
    pub shelves: usize,
    pub steps: usize,
    pub requests: usize,
    pub statuses: BTreeMap<u16, usize>,
    pub gateway_entries: usize,
    pub module_entries: usize,
    pub malformed_lines: usize,
    pub heat: HeatSummary,
    pub recommended_ids: u64,
    pub subjects: Vec<(String, u64)>,
    pub unknown_subjects: u64,
    pub subject_fit: Option<FitSummary>,
    pub circulation_fit: Option<FitSummary>,
    pub traces: BTreeMap<String, BTreeMap<String, u64>>,
    pub text: BTreeMap<String, TextSummary>,
    pub monthly: BTreeMap<String, Vec<(String, u64)>>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayStats {
    pub sent: usize,
    pub statuses: BTreeMap<u16, usize>,
}

/// Sends every non-idle step of `walk` to the gateway at `base`, stamped
/// with the step's simulated time.
pub async fn replay(
    base: &str,
    collection: &str,
    walk: &WalkScript,
    parallel: usize,
) -> Result<ReplayStats, reqwest::Error> {
    let client = reqwest::Client::builder().no_proxy().build()?;
    let mut requests = Vec::new();
    for (step, t) in walk.steps.iter().zip(walk.timestamps()) {
        let url = match &step.action {
            Action::Idle => continue,
            Action::Recommend => format!(
                "{base}/api/recommend/popularnear?x={:.6}&y={:.6}",
                step.point.x, step.point.y
            ),
            Action::Wayfind { bib_id } => format!("{base}/api/wayfinder/map_data/{collection}/{bib_id}"),
        };
        requests.push((url, t.to_rfc3339_opts(SecondsFormat::Secs, true)));
    }

    let mut stats = ReplayStats::default();
    if parallel <= 1 {
        for (url, t) in requests {
            let res = client.get(url).header(SIMULATED_TIME_HEADER, t).send().await?;
            stats.sent += 1;
            *stats.statuses.entry(res.status().as_u16()).or_default() += 1;
            res.bytes().await?;
        }
        return Ok(stats);
    }
    let permits = Arc::new(tokio::sync::Semaphore::new(parallel));
    let mut tasks = tokio::task::JoinSet::new();
    for (url, t) in requests {
        let client = client.clone();
        let permit = permits.clone().acquire_owned().await.expect("semaphore stays open");
        tasks.spawn(async move {
            let res = client.get(url).header(SIMULATED_TIME_HEADER, t).send().await;
            drop(permit);
            let res = res?;
            let status = res.status().as_u16();
            res.bytes().await?;
            Ok::<u16, reqwest::Error>(status)
        });
    }
    while let Some(done) = tasks.join_next().await {
        let status = done.expect("replay task panicked")?;
        stats.sent += 1;
        *stats.statuses.entry(status).or_default() += 1;
    }
    Ok(stats)
}

fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), ReportError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(at(Stage::Write))?;
    fs::write(path, buf).map_err(|e| ReportError {
        stage: Stage::Write,
        message: format!("{}: {e}", path.display()),
    })
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Modules with a monthly series in the report.
pub const MONTHLY_MODULES: [Module; 5] =
    [Module::Catalog, Module::Journal, Module::Recommend, Module::Wayfinder, Module::Display];

/// Runs the whole pipeline and writes its outputs under `cfg.out`:
/// the generated world, both logs, annotated tables, the heat grid, subject
/// distribution, traces, text statistics, monthly series and `report.json`.
pub fn run_report(cfg: &ReportConfig) -> Result<Report, ReportError> {
    let out = &cfg.out;
    let mode: HeatMode = cfg.telemetry.mode.parse().map_err(at(Stage::Config))?;
    if !(cfg.telemetry.cell_size.is_finite() && cfg.telemetry.cell_size > 0.0) {
        return Err(ReportError {
            stage: Stage::Config,
            message: format!("cell_size must be positive, got {}", cfg.telemetry.cell_size),
        });
    }

    let files = gen_corpus(cfg.seed, &cfg.corpus, &out.join("world")).map_err(at(Stage::Generate))?;
    let gw_cfg = GatewayConfig::load(&files.config).map_err(at(Stage::Load))?;
    let (state, diagnostics) = AppState::load(&gw_cfg).map_err(at(Stage::Load))?;

    let floor = Floor::desk();
    let walk = gen_walk(cfg.seed.wrapping_add(1), &state.map, &state.corpus, &floor, &cfg.walk)
        .map_err(at(Stage::Walk))?;
    let walk_json = serde_json::to_vec_pretty(&walk).map_err(at(Stage::Write))?;
    fs::write(out.join("walk.json"), walk_json).map_err(at(Stage::Write))?;

    let logs = out.join("logs");
    fs::create_dir_all(&logs).map_err(at(Stage::Write))?;
    let gateway_log = logs.join("gateway.jsonl");
    let modules_log = logs.join("modules.jsonl");
    for stale in [&gateway_log, &modules_log] {
        if stale.exists() {
            fs::remove_file(stale).map_err(at(Stage::Write))?;
        }
    }

    let sink = LogSink::open(&gateway_log).map_err(at(Stage::Serve))?;
    let gateway = Arc::new(Gateway { state, sink });
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(at(Stage::Serve))?;
    let stats = runtime.block_on(async {
        let addr: SocketAddr = "127.0.0.1:0".parse().expect("literal address");
        let server = biblio_gateway::spawn(gateway.clone(), addr).await.map_err(at(Stage::Serve))?;
        let replayed = replay(&server.base_url(), &gateway.state.collection, &walk, cfg.parallel).await;
        server.shutdown().await.map_err(at(Stage::Serve))?;
        replayed.map_err(at(Stage::Replay))
    })?;
    let state = &gateway.state;

    let others = gen_module_logs(cfg.seed.wrapping_add(2), &state.corpus, &cfg.modules, &state.collection);
    let mut text = String::new();
    for e in &others {
        text.push_str(&e.to_line());
        text.push('\n');
    }
    fs::write(&modules_log, text).map_err(at(Stage::Write))?;

    let gateway_parsed = parse_logs(&[&gateway_log]).map_err(at(Stage::Parse))?;
    let parsed = parse_logs(&[&gateway_log, &modules_log]).map_err(at(Stage::Parse))?;
    let entries = &parsed.entries;

    let annotation = annotate(entries, &state.corpus, &state.outline, Some(&state.map));
    let annotated = &annotation.entries;

    let tables = out.join("tables");
    fs::create_dir_all(&tables).map_err(at(Stage::Tables))?;
    let wayfinder_rows = wayfinder_table(annotated);
    write_with(&tables.join("wayfinder.csv"), |w| write_wayfinder_csv(&wayfinder_rows, w))?;
    let recommend_rows = recommend_table(annotated);
    write_with(&tables.join("recommend.csv"), |w| write_recommend_csv(&recommend_rows, w))?;
    let subject_rows = subject_table(annotated);
    write_with(&tables.join("subjects.csv"), |w| write_subject_csv(&subject_rows, w))?;

    let points: Vec<Point> = annotated
        .iter()
        .filter(|a| matches!(a.entry.module, Module::Recommend | Module::Wayfinder) && a.entry.is_success())
        .filter_map(|a| a.position)
        .collect();
    let spec = GridSpec::covering(state.map.extent(), cfg.telemetry.cell_size);
    let heat = heatmap(&points, spec, mode);
    write_with(&out.join("heatmap.csv"), |w| heat.grid.write_csv(w))?;
    write_with(&out.join("heatmap.pgm"), |w| heat.grid.write_pgm(w))?;

    let dist = subject_distribution(annotated, Module::Recommend, cfg.telemetry.per_request);
    let subject_fit = fit_power_law(&dist, cfg.telemetry.min_count).ok().map(FitSummary::from);
    write_with(&out.join("subject_distribution.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["subject", "count"])?;
        for (subject, n) in &dist.rows {
            csv.write_record([subject.as_str(), &n.to_string()])?;
        }
        if dist.unknown > 0 {
            csv.write_record(["unknown", &dist.unknown.to_string()])?;
        }
        csv.flush()
    })?;
    let circulation: Vec<f64> = state
        .corpus
        .records()
        .iter()
        .map(|r| state.corpus.circulation_count(&r.bib_id) as f64)
        .collect();
    let circulation_fit = fit_rank_frequency(&circulation, None).ok().map(FitSummary::from);

    let recommended: Vec<&ApiLogEntry> = entries
        .iter()
        .filter(|e| e.module == Module::Recommend && e.is_success())
        .collect();
    let recommended_ids: u64 = recommended.iter().map(|e| e.bib_ids.len() as u64).sum();
    let mut traces: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for module in [Module::Recommend, Module::Wayfinder] {
        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for e in entries.iter().filter(|e| e.module == module && e.is_success()) {
            for id in &e.bib_ids {
                *freq.entry(id).or_default() += 1;
            }
        }
        // Highest count, then smallest id.
        let top = freq.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)));
        if let Some((id, _)) = top {
            let trace = trace_identifier(id, entries);
            traces.insert(
                id.to_string(),
                trace.into_iter().map(|(m, n)| (m.as_str().to_string(), n)).collect(),
            );
        }
    }
    write_with(&out.join("traces.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["bib_id", "module", "count"])?;
        for (id, per_module) in &traces {
            for (module, n) in per_module {
                csv.write_record([id.as_str(), module.as_str(), &n.to_string()])?;
            }
        }
        csv.flush()
    })?;

    let mut text_stats = BTreeMap::new();
    for module in [Module::Catalog, Module::Journal] {
        text_stats.insert(module.as_str().to_string(), TextSummary::from(mine_queries(entries, module)));
    }
    let json = serde_json::to_vec_pretty(&text_stats).map_err(at(Stage::Mine))?;
    fs::write(out.join("text_stats.json"), json).map_err(at(Stage::Write))?;

    let first = YearMonth::of(STUDY_START.and_hms_opt(0, 0, 0).expect("valid time").and_utc());
    let last = YearMonth::new(first.year + 1, first.month - 1).ok_or_else(|| ReportError {
        stage: Stage::Monthly,
        message: "study window does not start in a month after January".into(),
    })?;
    let mut monthly = BTreeMap::new();
    for module in MONTHLY_MODULES {
        let series = time_series(entries, module, Some((first, last)));
        monthly.insert(
            module.as_str().to_string(),
            series.into_iter().map(|(m, n)| (m.to_string(), n)).collect::<Vec<_>>(),
        );
    }
    write_with(&out.join("monthly.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["month".to_string()];
        header.extend(MONTHLY_MODULES.iter().map(|m| m.as_str().to_string()));
        csv.write_record(&header)?;
        for (i, month) in first.through(last).enumerate() {
            let mut row = vec![month.to_string()];
            for m in MONTHLY_MODULES {
                row.push(monthly[m.as_str()][i].1.to_string());
            }
            csv.write_record(&row)?;
        }
        csv.flush()
    })?;

    let requests = walk.requests();
    let gateway_entries = gateway_parsed.entries.len();
    let mut checks = vec![
        check(
            "clean-load",
            diagnostics.is_empty(),
            format!("{} load diagnostics", diagnostics.len()),
        ),
        check(
            "request-count",
            gateway_entries == requests && stats.sent == requests,
            format!("{requests} walk requests, {} sent, {gateway_entries} logged", stats.sent),
        ),
        check(
            "log-integrity",
            parsed.malformed.is_empty() && gateway.sink.errors() == 0,
            format!("{} malformed lines, {} sink errors", parsed.malformed.len(), gateway.sink.errors()),
        ),
        check(
            "heat-mass",
            (heat.grid.total() - requests as f64).abs() <= 1e-9 * (requests.max(1) as f64)
                && heat.out_of_extent == 0
                && points.len() == requests,
            format!(
                "mass {} over {} points, {} outside the grid, {requests} requests",
                heat.grid.total(),
                points.len(),
                heat.out_of_extent
            ),
        ),
        check(
            "subject-conservation",
            dist.total() + dist.unknown == recommended_ids || cfg.telemetry.per_request,
            format!("{} labelled + {} unknown of {recommended_ids} ids", dist.total(), dist.unknown),
        ),
    ];
    if cfg.expect_short_head {
        let top2: Vec<&str> = dist.rows.iter().take(2).map(|(s, _)| s.as_str()).collect();
        checks.push(check(
            "short-head",
            top2 == ["American literature", "English literature"],
            format!("top subjects {top2:?}"),
        ));
        checks.push(match subject_fit {
            Some(f) => check(
                "long-tail-fit",
                (-1.3..=-0.7).contains(&f.exponent) && f.r_squared >= 0.8,
                format!("exponent {:.4}, R² {:.4} over {} ranks", f.exponent, f.r_squared, f.ranks),
            ),
            None => check("long-tail-fit", false, "fewer than 3 subjects to fit".into()),
        });
        checks.push(match circulation_fit {
            Some(f) => check(
                "circulation-skew",
                (f.exponent + cfg.corpus.alpha).abs() <= 0.1,
                format!("exponent {:.4} for alpha {}", f.exponent, cfg.corpus.alpha),
            ),
            None => check("circulation-skew", false, "fewer than 3 circulating records".into()),
        });
    }

    let report = Report {
        seed: cfg.seed,
        records: state.corpus.len(),
        shelves: state.map.len(),
        steps: walk.steps.len(),
        requests,
        statuses: stats.statuses,
        gateway_entries,
        module_entries: entries.len() - gateway_entries,
        malformed_lines: parsed.malformed.len(),
        heat: HeatSummary {
            mode: mode.to_string(),
            cell_size: cfg.telemetry.cell_size,
            points: points.len(),
            mass: heat.grid.total(),
            out_of_extent: heat.out_of_extent,
        },
        recommended_ids,
        subjects: dist.rows.clone(),
        unknown_subjects: dist.unknown,
        subject_fit,
        circulation_fit,
        traces,
        text: text_stats,
        monthly,
        checks,
    };
    let json = serde_json::to_vec_pretty(&report).map_err(at(Stage::Write))?;
    fs::write(out.join("report.json"), json).map_err(at(Stage::Write))?;
    Ok(report)
}
