//! Acceptance suite. Each criterion runs under its time budget and prints
//! one PASS or FAIL line; the process exits nonzero if any fails.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use biblio_core::corpus::{Article, BibRecord, Format};
use biblio_core::geom::Point;
use biblio_core::lccn::{compare, in_range, CallNumber, CallNumberRange, ClassificationOutline, BUNDLED_OUTLINE};
use biblio_core::log::{ApiLogEntry, Module};
use biblio_core::recommend::{Kind, RecommendationResponse};
use biblio_core::telemetry::{
    annotate, fit_rank_frequency, heatmap, mine_queries, parse_logs, recommend_table, subject_distribution, GridSpec,
    HeatMode,
};
use biblio_gateway::{AppState, Gateway, GatewayConfig, LogSink, MapDataResponse};
use biblio_harness::{gen_corpus, run_report, CorpusProfile, ReportConfig};
use chrono::{Duration as ChronoDuration, TimeZone, Utc};
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixture_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/fixture/config.toml")
}

fn outline() -> ClassificationOutline {
    ClassificationOutline::parse_tsv(BUNDLED_OUTLINE, "bundled").expect("bundled outline loads").outline
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().expect("runtime")
}

fn fixture_gateway(log: &Path) -> Result<Arc<Gateway>, String> {
    let cfg = GatewayConfig::load(fixture_config()).map_err(|e| e.to_string())?;
    let (state, diagnostics) = AppState::load(&cfg).map_err(|e| e.to_string())?;
    ensure!(diagnostics.is_empty(), "fixture diagnostics: {diagnostics:?}");
    let sink = LogSink::open(log).map_err(|e| e.to_string())?;
    Ok(Arc::new(Gateway { state, sink }))
}

fn client() -> reqwest::Client {
    reqwest::Client::builder().no_proxy().build().expect("client")
}

// 1

fn subject_labels() -> Outcome {
    let outline = outline();
    let attested = [
        ("B105.E9 G63 1974", "Philosophy (General)"),
        ("GV1469.62.D84", "Computer games. Video games. Fantasy games"),
        ("PR9619.4.Z87", "English literature: Provincial, local, etc."),
        ("PZ7.R79835", "Fiction and juvenile belles lettres"),
        ("PZ7 .R79835", "Fiction and juvenile belles lettres"),
        ("PN1991.75 A24", "Radio broadcasts"),
        ("PR85.C45", "English literature"),
        ("PS94.B5", "American literature"),
        ("E669.F37", "History of the Americas. United States"),
        ("E154.N38", "History of the Americas. United States"),
    ];
    let mut matched = 0;
    for (call, label) in attested {
        let cn = CallNumber::parse(call).map_err(|e| format!("{call}: {e}"))?;
        match outline.classify(&cn) {
            Ok(got) if got == label => matched += 1,
            Ok(got) => return Err(format!("{call} classified as {got:?}, expected {label:?}")),
            Err(e) => return Err(format!("{call} unclassified: {e:?}")),
        }
    }
    Ok(format!("{matched}/{} exact labels", attested.len()))
}

// 2

struct Parts {
    letters: String,
    integer: u64,
    fraction: String,
    cutters: Vec<(char, String)>,
    year: Option<u16>,
}

type Key = (String, u64, String, Vec<(char, String, usize)>, Option<u16>);

fn padded(d: &str) -> String {
    format!("{d:0<24}")
}

fn oracle_key(p: &Parts) -> Key {
    (
        p.letters.clone(),
        p.integer,
        padded(&p.fraction),
        p.cutters.iter().map(|(l, d)| (*l, padded(d), d.len())).collect(),
        p.year,
    )
}

fn random_parts(rng: &mut ChaCha8Rng) -> Parts {
    let letter = |rng: &mut ChaCha8Rng| b"BEPRS"[rng.gen_range(0..5)] as char;
    let letters = (0..rng.gen_range(1..=3)).map(|_| letter(rng)).collect();
    let integer = [1, 5, 50, 94, 1991, 1995][rng.gen_range(0..6)];
    let fraction = (0..rng.gen_range(0..=2)).map(|_| ['0', '4', '7'][rng.gen_range(0..3)]).collect();
    let cutters = (0..rng.gen_range(0..=2))
        .map(|_| {
            let mut digits: String = (0..rng.gen_range(1..=3)).map(|_| ['0', '3', '8'][rng.gen_range(0..3)]).collect();
            if digits.starts_with('0') && digits.bytes().all(|b| b == b'0') {
                digits.replace_range(0..1, "3");
            }
            (letter(rng), digits)
        })
        .collect();
    let year = rng.gen_bool(0.3).then(|| rng.gen_range(1974..=1976));
    Parts {
        letters,
        integer,
        fraction,
        cutters,
        year,
    }
}

fn render(p: &Parts, style: usize) -> String {
    let mut s = format!("{}{}", p.letters, p.integer);
    if !p.fraction.is_empty() {
        s.push('.');
        s.push_str(&p.fraction);
    }
    for (i, (l, d)) in p.cutters.iter().enumerate() {
        s.push_str(match (i, style % 3) {
            (0, 0) => " .",
            (_, 1) => ".",
            _ => " ",
        });
        s.push(*l);
        s.push_str(d);
    }
    if let Some(y) = p.year {
        s.push_str(&format!(" {y}"));
    }
    s
}

fn ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2016);
    let mut values = Vec::with_capacity(1500);
    for i in 0..1500 {
        let p = random_parts(&mut rng);
        let text = render(&p, i);
        let cn = CallNumber::parse(&text).map_err(|e| format!("{text:?}: {e}"))?;
        values.push((oracle_key(&p), cn));
    }
    let mut pairs = 0usize;
    for (ka, a) in &values {
        for (kb, b) in values.iter().step_by(5) {
            ensure!(compare(a, b) == ka.cmp(kb), "{a} vs {b}: impl {:?}, oracle {:?}", compare(a, b), ka.cmp(kb));
            pairs += 1;
        }
    }

    let expected = [
        "B105.E9 G63 1974",
        "E154.N38",
        "E669.F37",
        "GV1469.62.D84",
        "PN1991.75 A24",
        "PN1995 .C655 2015",
        "PR85.C45",
        "PR9619.4.Z87",
        "PS94.B5",
        "PZ7.R79835",
        "SF446 .C763 2014",
    ];
    let mut shuffled: Vec<(&str, CallNumber)> = expected
        .iter()
        .map(|s| (*s, CallNumber::parse(s).expect("attested call number parses")))
        .collect();
    shuffled.reverse();
    shuffled.swap(2, 7);
    shuffled.sort_by(|a, b| compare(&a.1, &b.1));
    let sorted: Vec<&str> = shuffled.iter().map(|(s, _)| *s).collect();
    ensure!(sorted == expected, "attested order {sorted:?}");
    Ok(format!("{} values, {pairs} pairs agree; 11 attested numbers in order", values.len()))
}

// 3

fn wire_parity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("api.jsonl");
    let gateway = fixture_gateway(&log)?;
    let recommend_uri = "/api/recommend/popularnear?x=4362.047852&y=3160.110596";
    let table2 = ["uiu_8378456", "uiu_7072382", "hat_817483", "uiu_7277188", "uiu_8375583"];

    let (map_data, recommended) = runtime().block_on(async {
        let addr: SocketAddr = "127.0.0.1:0".parse().expect("literal address");
        let server = biblio_gateway::spawn(gateway.clone(), addr).await.map_err(|e| e.to_string())?;
        let http = client();
        let base = server.base_url();
        let fetch = |uri: String| {
            let http = http.clone();
            async move {
                let res = http.get(uri).send().await.map_err(|e| e.to_string())?;
                ensure!(res.status().as_u16() == 200, "status {}", res.status());
                res.bytes().await.map_err(|e| e.to_string())
            }
        };
        let a = fetch(format!("{base}/api/wayfinder/map_data/uiu_undergrad/uiu_8127460")).await;
        let b = fetch(format!("{base}{recommend_uri}")).await;
        server.shutdown().await.map_err(|e| e.to_string())?;
        Ok::<_, String>((a?, b?))
    })?;

    let r: MapDataResponse = serde_json::from_slice(&map_data).map_err(|e| e.to_string())?;
    ensure!(
        (r.x, r.y, r.shelf_number, r.call_number.as_str()) == (337, 128, 30, "PN1995 .C655 2015"),
        "map_data {r:?}"
    );
    let raw: serde_json::Value = serde_json::from_slice(&map_data).map_err(|e| e.to_string())?;
    for key in ["X", "Y", "shelf-number", "call-number"] {
        ensure!(raw.get(key).is_some(), "map_data lacks {key:?}: {raw}");
    }

    let rec: RecommendationResponse = serde_json::from_slice(&recommended).map_err(|e| e.to_string())?;
    let print = rec.items.iter().filter(|i| i.kind == Kind::Print).count();
    ensure!(print <= 5, "{print} print items");
    ensure!(rec.bib_ids() == table2, "response ids {:?}", rec.bib_ids());

    let parsed = parse_logs(&[&log]).map_err(|e| e.to_string())?;
    ensure!(parsed.malformed.is_empty() && parsed.entries.len() == 2, "log {:?}", parsed);
    let state = &gateway.state;
    let annotated = annotate(&parsed.entries, &state.corpus, &state.outline, Some(&state.map));
    let rows = recommend_table(&annotated.entries);
    ensure!(rows.len() == 1, "{} recommend rows", rows.len());
    ensure!(rows[0].uri == recommend_uri, "row uri {}", rows[0].uri);
    ensure!(rows[0].bib_ids == table2, "row ids {:?}", rows[0].bib_ids);
    Ok(format!("map_data row exact; recommend row {} + {} ids", rows[0].uri, rows[0].bib_ids.len()))
}

// 4

#[derive(Debug, PartialEq)]
struct Item {
    kind: Kind,
    id: String,
    score: f64,
}

/// Full scan of shelves and records, range filter, count sort, caps, and a
/// direct majority vote over article hits.
fn brute_force(state: &AppState, p: Point, radius: f64) -> Vec<Item> {
    let cfg = state.recommend;
    let mut near: Vec<(f64, u32, &CallNumberRange)> = state
        .map
        .shelves()
        .iter()
        .map(|s| {
            let b = s.bounds;
            let dx = (b.x_min - p.x).max(0.0).max(p.x - b.x_max);
            let dy = (b.y_min - p.y).max(0.0).max(p.y - b.y_max);
            (dx.hypot(dy), s.shelf_number, &s.range)
        })
        .filter(|(d, _, _)| *d <= radius)
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ranges: Vec<&CallNumberRange> = near.iter().map(|(_, _, r)| *r).collect();
    if ranges.is_empty() {
        return Vec::new();
    }
    let corpus = &state.corpus;
    let in_any = |c: &CallNumber| ranges.iter().any(|r| in_range(c, r));
    let count = |id: &str| corpus.circulation_count(id);

    let mut print: Vec<&BibRecord> = corpus
        .records()
        .iter()
        .filter(|r| r.format == Format::Print && in_any(&r.call_number) && count(&r.bib_id) > 0)
        .collect();
    print.sort_by(|a, b| count(&b.bib_id).cmp(&count(&a.bib_id)).then(a.bib_id.cmp(&b.bib_id)));
    print.truncate(cfg.max_items);
    let mut out: Vec<Item> = print
        .iter()
        .map(|r| Item {
            kind: Kind::Print,
            id: r.bib_id.clone(),
            score: count(&r.bib_id) as f64,
        })
        .collect();

    let mut ebooks: Vec<&BibRecord> = corpus
        .records()
        .iter()
        .filter(|r| r.format == Format::Ebook && in_any(&r.call_number))
        .collect();
    ebooks.sort_by(|a, b| a.call_number.cmp(&b.call_number).then(a.bib_id.cmp(&b.bib_id)));
    ebooks.truncate(cfg.max_ebooks);
    out.extend(ebooks.iter().map(|r| Item {
        kind: Kind::Ebook,
        id: r.bib_id.clone(),
        score: count(&r.bib_id) as f64,
    }));

    let mut names = HashSet::new();
    let mut queried = HashSet::new();
    for r in &ranges {
        let Ok(label) = state.outline.classify(r.start()) else {
            continue;
        };
        let head = label.split(['.', ':', '(']).next().unwrap_or("").trim().to_lowercase();
        if !queried.insert(head.clone()) {
            continue;
        }
        let width = head.split(' ').count();
        let hits: Vec<&Article> = corpus
            .articles()
            .iter()
            .filter(|a| {
                let words: Vec<String> = a.subject.to_lowercase().split(' ').map(str::to_string).collect();
                words.windows(width).any(|w| w.join(" ") == head)
            })
            .collect();
        if hits.is_empty() {
            continue;
        }
        let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
        for h in &hits {
            *tally.entry(&h.journal_title).or_default() += 1;
        }
        let best = tally.values().max().copied().unwrap_or(0);
        let journal = tally.iter().find(|(_, &c)| c == best).map(|(j, _)| *j).unwrap_or("");
        let share = best as f64 / hits.len() as f64;
        if share > cfg.majority_threshold && names.insert(journal.to_string()) {
            out.push(Item {
                kind: Kind::Database,
                id: journal.to_string(),
                score: share,
            });
        }
    }
    for db in corpus.databases() {
        let hit = ranges
            .iter()
            .filter(|r| db.subject_ranges.iter().any(|s| s.start() <= r.end() && r.start() <= s.end()))
            .count();
        if hit > 0 && names.insert(db.name.clone()) {
            out.push(Item {
                kind: Kind::Database,
                id: db.name.clone(),
                score: hit as f64 / ranges.len() as f64,
            });
        }
    }
    out
}

fn pipeline_oracle() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let profile = CorpusProfile::default();
    let files = gen_corpus(77, &profile, dir.path()).map_err(|e| e.to_string())?;
    let cfg = GatewayConfig::load(&files.config).map_err(|e| e.to_string())?;
    let (state, _) = AppState::load(&cfg).map_err(|e| e.to_string())?;
    ensure!(state.corpus.len() == 500, "{} records", state.corpus.len());

    let recommender = state.recommender();
    let radius = state.recommend.radius.unwrap_or_else(|| state.map.default_radius());
    let extent = state.map.extent();
    let shelves = state.map.shelves();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut agreed, mut non_empty) = (0, 0);
    for i in 0..50 {
        // Most points near a shelf face, the rest anywhere on the floor.
        let p = if i % 4 == 3 {
            Point::new(rng.gen_range(extent.x_min..extent.x_max), rng.gen_range(extent.y_min..extent.y_max))
        } else {
            let b = shelves[rng.gen_range(0..shelves.len())].bounds;
            Point::new(
                rng.gen_range(b.x_min - 25.0..b.x_max + 25.0),
                rng.gen_range(b.y_min - 10.0..b.y_max + 10.0),
            )
        };
        let want = brute_force(&state, p, radius);
        let got: Vec<Item> = recommender
            .recommend_near(p)
            .items
            .into_iter()
            .map(|i| Item {
                kind: i.kind,
                id: i.bib_id.or(i.name).unwrap_or_default(),
                score: i.score,
            })
            .collect();
        ensure!(got == want, "at {p:?}: got {got:?}, oracle {want:?}");
        agreed += 1;
        non_empty += usize::from(!want.is_empty());
    }
    Ok(format!("{agreed}/50 points agree ({non_empty} non-empty)"))
}

// 5

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ReportConfig {
        out: dir.path().join("report"),
        ..ReportConfig::default()
    };
    let report = run_report(&cfg).map_err(|e| e.to_string())?;
    let top2: Vec<&str> = report.subjects.iter().take(2).map(|(s, _)| s.as_str()).collect();
    ensure!(top2 == ["American literature", "English literature"], "top subjects {top2:?}");
    let fit = report.subject_fit.ok_or("no subject fit")?;
    ensure!(
        (-1.3..=-0.7).contains(&fit.exponent) && fit.r_squared >= 0.8,
        "exponent {:.4}, R² {:.4}",
        fit.exponent,
        fit.r_squared
    );
    ensure!(
        report.heat.mass == report.requests as f64 && report.heat.out_of_extent == 0 && report.heat.points == report.requests,
        "heat {:?} for {} requests",
        report.heat,
        report.requests
    );
    ensure!(report.passed(), "failed checks {:?}", report.failed_checks());
    Ok(format!(
        "top-2 {top2:?}; exponent {:.4}, R² {:.4}; heat mass {} = {} requests",
        fit.exponent, fit.r_squared, report.heat.mass, report.requests
    ))
}

// 6

fn random_entry(rng: &mut ChaCha8Rng, ids: &[String]) -> ApiLogEntry {
    let module = Module::ALL[rng.gen_range(0..Module::ALL.len())];
    let timestamp = Utc.with_ymd_and_hms(2016, 9, 1, 0, 0, 0).unwrap()
        + ChronoDuration::milliseconds(rng.gen_range(0..31_536_000_000));
    let mut params = BTreeMap::new();
    for key in ["x", "y", "q"] {
        if rng.gen_bool(0.4) {
            params.insert(key.to_string(), format!("{:.6} \"é\\", rng.gen_range(-1e4..1e4)));
        }
    }
    let status = [200, 200, 400, 404][rng.gen_range(0..4)];
    let bib_ids = match status {
        200 => (0..rng.gen_range(0..7)).map(|_| ids[rng.gen_range(0..ids.len())].clone()).collect(),
        _ => Vec::new(),
    };
    ApiLogEntry {
        timestamp,
        module,
        uri: format!("/api/{module}/{}?k={}", rng.gen_range(0..1000), rng.gen_range(0..9)),
        params,
        status,
        bib_ids,
    }
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = GatewayConfig::load(fixture_config()).map_err(|e| e.to_string())?;
    let (state, _) = AppState::load(&cfg).map_err(|e| e.to_string())?;
    let extent = state.map.extent();

    let mut worst_gaussian: f64 = 0.0;
    for case in 0..100 {
        let n = rng.gen_range(0..200);
        let points: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.gen_range(extent.x_min..extent.x_max), rng.gen_range(extent.y_min..extent.y_max)))
            .collect();
        let spec = GridSpec::covering(extent, rng.gen_range(20.0..400.0));
        let bin = heatmap(&points, spec, HeatMode::Bin);
        ensure!(bin.grid.total() == n as f64, "case {case}: bin mass {} for {n}", bin.grid.total());
        let sigma = rng.gen_range(5.0..600.0);
        let gauss = heatmap(&points, spec, HeatMode::Gaussian { sigma });
        let err = (gauss.grid.total() - n as f64).abs();
        worst_gaussian = worst_gaussian.max(err);
        ensure!(err <= 1e-9, "case {case}: gaussian mass off by {err:e}");
    }

    let mut ids: Vec<String> = state.corpus.records().iter().map(|r| r.bib_id.clone()).collect();
    ids.extend(["uiu_1", "hat_2", "uiu_99999999"].map(String::from));
    for case in 0..100 {
        let entries: Vec<ApiLogEntry> = (0..rng.gen_range(0..80)).map(|_| random_entry(&mut rng, &ids)).collect();
        let annotated = annotate(&entries, &state.corpus, &state.outline, Some(&state.map));
        for module in Module::ALL {
            let dist = subject_distribution(&annotated.entries, module, false);
            let logged: u64 = entries
                .iter()
                .filter(|e| e.module == module && e.is_success())
                .map(|e| e.bib_ids.len() as u64)
                .sum();
            ensure!(
                dist.total() + dist.unknown == logged,
                "case {case} {module}: {} + {} != {logged}",
                dist.total(),
                dist.unknown
            );
        }
        for e in &entries {
            let back = ApiLogEntry::from_line(&e.to_line()).map_err(|err| format!("{err:?}"))?;
            ensure!(&back == e, "round trip changed {e:?} into {back:?}");
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("concurrent.jsonl");
    let gateway = fixture_gateway(&log)?;
    let sent = runtime().block_on(async {
        let addr: SocketAddr = "127.0.0.1:0".parse().expect("literal address");
        let server = biblio_gateway::spawn(gateway.clone(), addr).await.map_err(|e| e.to_string())?;
        let http = client();
        let mut tasks = Vec::new();
        for i in 0..100 {
            let http = http.clone();
            let url = if i % 2 == 0 {
                format!("{}/api/recommend/popularnear?x={}&y=3160.110596", server.base_url(), 4300 + i)
            } else {
                format!("{}/api/wayfinder/map_data/uiu_undergrad/uiu_8127460", server.base_url())
            };
            tasks.push(tokio::spawn(async move { http.get(url).send().await.map(|r| r.status().as_u16()) }));
        }
        let mut ok = 0;
        for t in tasks {
            if matches!(t.await, Ok(Ok(200))) {
                ok += 1;
            }
        }
        server.shutdown().await.map_err(|e| e.to_string())?;
        Ok::<_, String>(ok)
    })?;
    let parsed = parse_logs(&[&log]).map_err(|e| e.to_string())?;
    let raw_lines = std::fs::read_to_string(&log).map_err(|e| e.to_string())?.lines().count();
    ensure!(
        sent == 100 && raw_lines == 100 && parsed.entries.len() == 100 && parsed.malformed.is_empty(),
        "{sent} ok responses, {raw_lines} lines, {} parsed, {} malformed",
        parsed.entries.len(),
        parsed.malformed.len()
    );
    Ok(format!(
        "bin exact, gaussian within {worst_gaussian:.1e}, subject counts and round trips conserved; 100 parallel requests gave 100 lines"
    ))
}

// 7

const WORDS: [&str; 40] = [
    "american", "literature", "history", "poetry", "film", "novel", "shakespeare", "games", "english", "women",
    "war", "philosophy", "dogs", "cats", "calculus", "civil", "modern", "criticism", "drama", "faulkner",
    "morrison", "cinema", "jazz", "reconstruction", "statistics", "poe", "video", "fiction", "children's", "radio",
    "pets", "theory", "1984", "gatsby", "austen", "ethics", "logic", "music", "art", "design",
];

/// A surface form of `word`: mixed case and surrounding punctuation.
fn decorate(word: &str, rng: &mut ChaCha8Rng) -> String {
    let mut form: String = match rng.gen_range(0..3) {
        0 => word.to_string(),
        1 => word.to_uppercase(),
        _ => {
            let mut c = word.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        }
    };
    let open = ["", "", "(", "\"", "'"][rng.gen_range(0..5)];
    let close = ["", "", ",", ".", ")", "?!", "\""][rng.gen_range(0..7)];
    form.insert_str(0, open);
    form.push_str(close);
    form
}

fn text_mining() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let zipf = WeightedIndex::new((1..=WORDS.len()).map(|r| 1.0 / r as f64)).expect("positive weights");
    let mut oracle: HashMap<&str, u64> = HashMap::new();
    let mut entries = Vec::with_capacity(1000);
    for i in 0..1000 {
        let mut tokens = Vec::new();
        for _ in 0..rng.gen_range(1..=5) {
            let word = WORDS[zipf.sample(&mut rng)];
            *oracle.entry(word).or_default() += 1;
            tokens.push(decorate(word, &mut rng));
        }
        // Punctuation-only tokens are not words.
        if rng.gen_bool(0.1) {
            tokens.push(["-", "&", "..."][rng.gen_range(0..3)].to_string());
        }
        let sep = ["  ", "\t", " "][rng.gen_range(0..3)];
        let q = tokens.join(sep);
        entries.push(ApiLogEntry {
            timestamp: Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap() + ChronoDuration::seconds(i),
            module: Module::Catalog,
            uri: "/api/catalog/search".into(),
            params: [("q".to_string(), q)].into_iter().collect(),
            status: 200,
            bib_ids: Vec::new(),
        });
    }
    let mut top: Vec<(String, u64)> = oracle.iter().map(|(w, n)| (w.to_string(), *n)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top.truncate(5);
    let total: u64 = oracle.values().sum();

    let stats = mine_queries(&entries, Module::Catalog);
    ensure!(stats.total_words == total, "total words {} vs oracle {total}", stats.total_words);
    ensure!(
        stats.unique_forms == oracle.len() as u64,
        "unique forms {} vs oracle {}",
        stats.unique_forms,
        oracle.len()
    );
    ensure!(stats.top == top, "top-5 {:?} vs oracle {top:?}", stats.top);
    ensure!(mine_queries(&entries, Module::Journal).total_words == 0, "journal counted catalog queries");

    let counts: Vec<f64> = (1..=50).map(|r| 100.0 / r as f64).collect();
    let fit = fit_rank_frequency(&counts, None).map_err(|e| e.to_string())?;
    ensure!((fit.exponent + 1.0).abs() <= 1e-6, "exponent {}", fit.exponent);
    Ok(format!(
        "{} words, {} forms, top-5 exact; 100/r fit exponent {:.9}",
        stats.total_words, stats.unique_forms, fit.exponent
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 subject-coding parity", Duration::from_secs(1), subject_labels),
        ("2 ordering oracle", Duration::from_secs(5), ordering),
        ("3 wire parity", Duration::from_secs(1), wire_parity),
        ("4 pipeline oracle equivalence", Duration::from_secs(10), pipeline_oracle),
        ("5 short head and long tail end to end", Duration::from_secs(60), end_to_end),
        ("6 telemetry conservation", Duration::from_secs(60), conservation),
        ("7 text-mining semantics", Duration::from_secs(5), text_mining),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
