//! Synthetic library worlds: a catalog spread over ten LC classes, a
//! Zipf-skewed circulation history, a 40-shelf floor plan and a beacon grid.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use biblio_core::geom::{Point, Rect};
use biblio_core::lccn::BUNDLED_OUTLINE;
use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

/// One LC class the generator shelves books in. Class numbers are drawn
/// from `lo..=hi` in units of `1/scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSpec {
    pub letters: &'static str,
    pub lo: u32,
    pub hi: u32,
    pub scale: u32,
    pub label: &'static str,
}

/// Generator classes in popularity rank order: American literature heads
/// the distribution, English literature follows.
pub const CLASSES: [ClassSpec; 10] = [
    ClassSpec { letters: "PS", lo: 1, hi: 3626, scale: 1, label: "American literature" },
    ClassSpec { letters: "PR", lo: 1, hi: 8308, scale: 1, label: "English literature" },
    ClassSpec { letters: "PN", lo: 19930, hi: 19990, scale: 10, label: "Motion pictures" },
    ClassSpec { letters: "QA", lo: 150, hi: 939, scale: 1, label: "Mathematics" },
    ClassSpec { letters: "E", lo: 151, hi: 909, scale: 1, label: "History of the Americas. United States" },
    ClassSpec { letters: "PZ", lo: 1, hi: 90, scale: 1, label: "Fiction and juvenile belles lettres" },
    ClassSpec {
        letters: "GV",
        lo: 146915,
        hi: 146962,
        scale: 100,
        label: "Computer games. Video games. Fantasy games",
    },
    ClassSpec { letters: "SF", lo: 411, hi: 459, scale: 1, label: "Pets" },
    ClassSpec { letters: "B", lo: 1, hi: 5802, scale: 1, label: "Philosophy (General)" },
    ClassSpec { letters: "PQ", lo: 1, hi: 3999, scale: 1, label: "French literature" },
];

impl ClassSpec {
    /// `PN1993.5`-style class text for a domain value.
    pub fn class_text(&self, value: u32) -> String {
        let int = value / self.scale;
        let frac = value % self.scale;
        if frac == 0 {
            return format!("{}{}", self.letters, int);
        }
        let digits = self.scale.ilog10() as usize;
        let frac = format!("{frac:0digits$}");
        format!("{}{}.{}", self.letters, int, frac.trim_end_matches('0'))
    }
}

pub const STUDY_START: NaiveDate = match NaiveDate::from_ymd_opt(2016, 9, 1) {
    Some(d) => d,
    None => panic!(),
};
pub const STUDY_DAYS: i64 = 365;

/// The desk-scale floor: 10 columns by 4 rows of shelves above an entrance
/// zone, with walkways between the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Floor {
    pub extent: Rect,
    pub entrance: Rect,
    /// Walkways far enough from every shelf that no range is in reach.
    pub aisles: Vec<Rect>,
    /// Shelf footprints in call-number order.
    pub slots: Vec<Rect>,
}

pub const SHELF_COUNT: usize = 40;
pub const BEACON_COUNT: usize = 12;

impl Floor {
    pub fn desk() -> Self {
        const COLUMNS: usize = 10;
        const ROWS: usize = 4;
        let rect = |a, b, c, d| Rect::new(a, b, c, d).expect("static floor geometry");
        let mut slots = Vec::with_capacity(COLUMNS * ROWS);
        for row in 0..ROWS {
            for col in 0..COLUMNS {
                let x = 60.0 + 80.0 * col as f64;
                let y = 200.0 + 180.0 * row as f64;
                slots.push(rect(x, y, x + 20.0, y + 100.0));
            }
        }
        let mut aisles = vec![rect(20.0, 150.0, 840.0, 165.0)];
        for row in 0..ROWS - 1 {
            let y = 335.0 + 180.0 * row as f64;
            aisles.push(rect(20.0, y, 840.0, y + 10.0));
        }
        aisles.push(rect(20.0, 875.0, 840.0, 895.0));
        Floor {
            extent: rect(0.0, 0.0, 860.0, 900.0),
            entrance: rect(330.0, 20.0, 530.0, 120.0),
            aisles,
            slots,
        }
    }

    pub fn beacons(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(BEACON_COUNT);
        for y in [150.0, 450.0, 750.0] {
            for x in [107.5, 322.5, 537.5, 752.5] {
                out.push(Point::new(x, y));
            }
        }
        out
    }
}

/// Generator tunables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusProfile {
    pub records: usize,
    /// Zipf exponent shared by circulation ranks and the class mix.
    pub alpha: f64,
    pub ebook_share: f64,
    /// Charges of the most circulated item per catalog record.
    pub charge_scale: f64,
}

impl Default for CorpusProfile {
    fn default() -> Self {
        CorpusProfile {
            records: 500,
            alpha: 1.0,
            ebook_share: 0.15,
            charge_scale: 4.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid corpus profile: {0}")]
    Profile(String),
    #[error("writing {path}: {origin}")]
    Io { path: PathBuf, origin: std::io::Error },
    #[error("writing {path}: {origin}")]
    Csv { path: PathBuf, origin: csv::Error },
}

impl CorpusProfile {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.records < 10 {
            return Err(GenError::Profile(format!("need at least 10 records, got {}", self.records)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(GenError::Profile(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.ebook_share) {
            return Err(GenError::Profile(format!("ebook_share must be in [0, 1), got {}", self.ebook_share)));
        }
        if !(self.charge_scale.is_finite() && self.charge_scale >= 1.0) {
            return Err(GenError::Profile(format!("charge_scale must be >= 1, got {}", self.charge_scale)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecord {
    pub bib_id: String,
    pub title: String,
    pub call_number: String,
    pub ebook: bool,
    /// Index into [`CLASSES`].
    pub class: usize,
    pub charges: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthShelf {
    pub shelf_number: u32,
    pub bounds: Rect,
    pub start: String,
    pub end: String,
    pub class: usize,
}

/// A generated world held in memory; [`World::write`] lays it out as the
/// files the gateway loads.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub seed: u64,
    pub floor: Floor,
    pub records: Vec<SynthRecord>,
    /// One `(bib_id, date)` per charge, ordered by date then id.
    pub charges: Vec<(String, NaiveDate)>,
    pub shelves: Vec<SynthShelf>,
}

/// Paths of a world written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldFiles {
    pub dir: PathBuf,
    pub config: PathBuf,
}

/// Splits `total` in proportion to `weights` by largest remainder; ties go
/// to the earlier index.
pub fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let short = total - out.iter().sum::<usize>();
    for &i in order.iter().cycle().take(short) {
        out[i] += 1;
    }
    out
}

fn zipf_weights(n: usize, alpha: f64) -> Vec<f64> {
    (1..=n).map(|r| (r as f64).powf(-alpha)).collect()
}

const ADJECTIVES: [&str; 16] = [
    "Collected", "Selected", "Early", "Late", "Modern", "Critical", "Complete", "Illustrated", "Practical",
    "Hidden", "Essential", "Brief", "Lost", "Open", "Northern", "Quiet",
];
const NOUNS: [&str; 16] = [
    "essays", "stories", "letters", "poems", "lectures", "notebooks", "studies", "sketches", "readings",
    "voices", "histories", "journeys", "questions", "methods", "fragments", "portraits",
];
const CUTTER_LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPRSTUVW";

/// Builds a world from `seed`. Equal seeds and profiles give equal worlds.
pub fn gen_world(seed: u64, profile: &CorpusProfile) -> Result<World, GenError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = Floor::desk();
    let class_weights = zipf_weights(CLASSES.len(), profile.alpha);

    // Every class keeps one shelf; the rest follow the class weights.
    let extra = apportion(SHELF_COUNT - CLASSES.len(), &class_weights);
    let shelves_per_class: Vec<usize> = extra.iter().map(|e| e + 1).collect();

    // Shelf slots run in LC order across the floor.
    let mut lc_order: Vec<usize> = (0..CLASSES.len()).collect();
    lc_order.sort_by_key(|&k| CLASSES[k].letters);
    let mut shelves = Vec::with_capacity(SHELF_COUNT);
    let mut class_shelves: Vec<Vec<(u32, u32)>> = vec![Vec::new(); CLASSES.len()];
    for &k in &lc_order {
        let spec = CLASSES[k];
        let s = shelves_per_class[k] as u32;
        let span = spec.hi - spec.lo + 1;
        for j in 0..s {
            let a = spec.lo + span * j / s;
            let b = spec.lo + span * (j + 1) / s - 1;
            class_shelves[k].push((a, b));
            let slot = shelves.len();
            shelves.push(SynthShelf {
                shelf_number: slot as u32 + 1,
                bounds: floor.slots[slot],
                start: spec.class_text(a),
                end: format!("{} .Z99", spec.class_text(b)),
                class: k,
            });
        }
    }

    // Charges fall off as top / rank^alpha. Each rank goes to the class
    // furthest below its weighted share of the charges dealt so far, so
    // class totals follow the class weights and the first ranks land in
    // the head classes.
    let top = profile.charge_scale * profile.records as f64;
    let weight_sum: f64 = class_weights.iter().sum();
    let mut mass = vec![0.0f64; CLASSES.len()];
    let mut dealt = 0.0;
    let mut ranks: Vec<Vec<u64>> = vec![Vec::new(); CLASSES.len()];
    for rank in 1..=profile.records {
        let count = (top / (rank as f64).powf(profile.alpha)).round().max(1.0);
        dealt += count;
        let deficit = |k: usize| class_weights[k] / weight_sum * dealt - mass[k];
        let k = (0..CLASSES.len())
            .max_by(|&a, &b| deficit(a).total_cmp(&deficit(b)).then(b.cmp(&a)))
            .expect("at least one class");
        mass[k] += count;
        ranks[k].push(count as u64);
    }
    let per_class: Vec<usize> = ranks.iter().map(Vec::len).collect();

    let mut records = Vec::with_capacity(profile.records);
    for (k, &count) in per_class.iter().enumerate() {
        let spec = CLASSES[k];
        let slots = class_shelves[k].len();
        // E-books are spread evenly along each shelf from a random phase,
        // so every shelf holds its share of them.
        let phases: Vec<f64> = (0..slots).map(|_| rng.gen::<f64>()).collect();
        for i in 0..count {
            let (a, b) = class_shelves[k][i % slots];
            let (m, phase) = ((i / slots) as f64, phases[i % slots]);
            let ebook = ((m + 1.0) * profile.ebook_share + phase).floor() > (m * profile.ebook_share + phase).floor();
            let value = rng.gen_range(a..=b);
            let letter = CUTTER_LETTERS[rng.gen_range(0..CUTTER_LETTERS.len())] as char;
            let digits = rng.gen_range(1..1000u32);
            let mut call = format!("{} .{}{}", spec.class_text(value), letter, digits);
            if rng.gen_bool(0.9) {
                let _ = write!(call, " {}", rng.gen_range(1950..=2017));
            }
            let title = format!(
                "{} {}",
                ADJECTIVES[rng.gen_range(0..ADJECTIVES.len())],
                NOUNS[rng.gen_range(0..NOUNS.len())]
            );
            records.push(SynthRecord {
                bib_id: format!("syn_{}", 100_001 + records.len()),
                title,
                call_number: call,
                ebook,
                class: k,
                charges: 0,
            });
        }
    }

    for (k, counts) in ranks.iter_mut().enumerate() {
        counts.shuffle(&mut rng);
        let members = records.iter_mut().filter(|r| r.class == k);
        for (r, &count) in members.zip(counts.iter()) {
            r.charges = count;
        }
    }

    let mut charges = Vec::new();
    for r in &records {
        for _ in 0..r.charges {
            let day = rng.gen_range(0..STUDY_DAYS);
            charges.push((r.bib_id.clone(), STUDY_START + Duration::days(day)));
        }
    }
    charges.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

    Ok(World {
        seed,
        floor,
        records,
        charges,
        shelves,
    })
}

const ARTICLES: &[(&str, &str, &str)] = &[
    ("American Literary History", "Regional realism and its readers", "American literature"),
    ("American Literary History", "The serial novel in the magazine era", "American literature"),
    ("American Literary History", "Poetry and the little magazines", "American literature"),
    ("PMLA", "Reading transatlantic modernism", "American literature"),
    ("Review of English Studies", "Manuscript culture after print", "English literature"),
    ("Review of English Studies", "Victorian periodicals and the novel", "English literature"),
    ("Film Quarterly", "Documentary form since 1990", "Motion pictures"),
    ("Film Quarterly", "Silent cinema restoration", "Motion pictures"),
    ("American Mathematical Monthly", "A short proof of a classical inequality", "Mathematics"),
    ("Journal of American History", "Reconstruction and its archives", "History of the Americas"),
    ("Game Studies", "Rules, fiction and play", "Computer games"),
    ("Anthrozoos", "Companion animals and wellbeing", "Pets"),
];

const DATABASES: &[(&str, &str, &str)] = &[
    ("MLA International Bibliography", "PN1", "PZ90 .Z99"),
    ("Film & Television Literature Index", "PN1993", "PN1999 .Z99"),
    ("MathSciNet", "QA1", "QA939 .Z99"),
    ("America: History and Life", "E151", "F975 .Z99"),
    ("Philosopher's Index", "B1", "BJ1725 .Z99"),
];

const CONFIG: &str = r#"collection = "uiu_undergrad"

[data]
catalog = "catalog.csv"
circulation = "circulation.csv"
articles = "articles.csv"
databases = "databases.csv"
outline = "lc_outline.tsv"
stackmap = "stackmap.csv"
beacons = "beacons.csv"

[map]
extent = [0.0, 0.0, 860.0, 900.0]

[recommend]
max_items = 5
max_ebooks = 3
majority_threshold = 0.5

[locate]
k = 3
path_loss_exponent = 2.0
default_tx_power = -59.0
"#;

fn csv_file(path: &Path) -> Result<csv::Writer<fs::File>, GenError> {
    csv::Writer::from_path(path).map_err(|origin| GenError::Csv {
        path: path.to_path_buf(),
        origin,
    })
}

impl World {
    /// Writes catalog, circulation, articles, databases, stack map, beacons,
    /// outline and a gateway config into `dir`.
    pub fn write(&self, dir: &Path) -> Result<WorldFiles, GenError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |origin| GenError::Io { path, origin }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let csv_err = |path: &Path| {
            let path = path.to_path_buf();
            move |origin| GenError::Csv { path, origin }
        };
        let flush = |w: &mut csv::Writer<fs::File>, path: &Path| w.flush().map_err(io(path));

        let path = dir.join("catalog.csv");
        let mut w = csv_file(&path)?;
        w.write_record(["bib_id", "title", "call_number", "format"]).map_err(csv_err(&path))?;
        for r in &self.records {
            let format = if r.ebook { "ebook" } else { "print" };
            w.write_record([&r.bib_id, &r.title, &r.call_number, format]).map_err(csv_err(&path))?;
        }
        flush(&mut w, &path)?;

        let path = dir.join("circulation.csv");
        let mut w = csv_file(&path)?;
        w.write_record(["bib_id", "charge_date"]).map_err(csv_err(&path))?;
        for (id, date) in &self.charges {
            w.write_record([id.as_str(), &date.to_string()]).map_err(csv_err(&path))?;
        }
        flush(&mut w, &path)?;

        let path = dir.join("articles.csv");
        let mut w = csv_file(&path)?;
        w.write_record(["journal_title", "article_title", "subject"]).map_err(csv_err(&path))?;
        for (journal, title, subject) in ARTICLES {
            w.write_record([journal, title, subject]).map_err(csv_err(&path))?;
        }
        flush(&mut w, &path)?;

        let path = dir.join("databases.csv");
        let mut w = csv_file(&path)?;
        w.write_record(["name", "range_start", "range_end"]).map_err(csv_err(&path))?;
        for (name, start, end) in DATABASES {
            w.write_record([name, start, end]).map_err(csv_err(&path))?;
        }
        flush(&mut w, &path)?;

        let path = dir.join("stackmap.csv");
        let mut w = csv_file(&path)?;
        w.write_record(["shelf_number", "x_min", "y_min", "x_max", "y_max", "range_start", "range_end"])
            .map_err(csv_err(&path))?;
        for s in &self.shelves {
            let b = s.bounds;
            w.write_record([
                s.shelf_number.to_string(),
                b.x_min.to_string(),
                b.y_min.to_string(),
                b.x_max.to_string(),
                b.y_max.to_string(),
                s.start.clone(),
                s.end.clone(),
            ])
            .map_err(csv_err(&path))?;
        }
        flush(&mut w, &path)?;

        let path = dir.join("beacons.csv");
        let mut w = csv_file(&path)?;
        w.write_record(["beacon_id", "x", "y", "tx_power"]).map_err(csv_err(&path))?;
        for (i, p) in self.floor.beacons().iter().enumerate() {
            w.write_record([format!("b{:02}", i + 1), p.x.to_string(), p.y.to_string(), "-59".into()])
                .map_err(csv_err(&path))?;
        }
        flush(&mut w, &path)?;

        let path = dir.join("lc_outline.tsv");
        fs::write(&path, BUNDLED_OUTLINE).map_err(io(&path))?;
        let config = dir.join("config.toml");
        fs::write(&config, CONFIG).map_err(io(&config))?;
        Ok(WorldFiles {
            dir: dir.to_path_buf(),
            config,
        })
    }
}

/// Generates a world and writes it to `dir`.
pub fn gen_corpus(seed: u64, profile: &CorpusProfile, dir: &Path) -> Result<WorldFiles, GenError> {
    gen_world(seed, profile)?.write(dir)
}
