use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use biblio_core::geom::Point;
use biblio_core::log::{ApiLogEntry, Module};
use biblio_core::telemetry::{
    annotate, fit_power_law, heatmap, mine_queries, parse_logs, recommend_table, subject_distribution,
    subject_table, time_series, trace_identifier, wayfinder_table, write_recommend_csv, write_subject_csv,
    write_wayfinder_csv, GridSpec, HeatMode, YearMonth,
};
use clap::{Args, Subcommand};

use crate::sources::Sources;

#[derive(Debug, Args)]
pub struct Logs {
    /// JSON Lines transaction logs.
    #[arg(long, required = true, num_args = 1..)]
    pub logs: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Join logged bib ids to call numbers and subjects and write the
    /// wayfinder, recommend and subject tables.
    Annotate {
        #[command(flatten)]
        logs: Logs,
        #[command(flatten)]
        sources: Sources,
        /// `table.csv` writes table-wayfinder.csv, table-recommend.csv and
        /// table-subjects.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid the request positions over the floor.
    Heatmap {
        #[command(flatten)]
        logs: Logs,
        #[command(flatten)]
        sources: Sources,
        #[arg(long, default_value_t = 20.0)]
        cell_size: f64,
        /// `bin` or `gaussian:SIGMA`.
        #[arg(long, default_value = "bin")]
        mode: HeatMode,
        /// `grid.csv` or `grid.csv,image.pgm`.
        #[arg(long)]
        out: String,
    },
    /// Subject distribution of recommended items, with a rank-frequency fit.
    Subjects {
        #[command(flatten)]
        logs: Logs,
        #[command(flatten)]
        sources: Sources,
        #[arg(long, default_value = "recommend")]
        module: Module,
        /// Count each request once per subject instead of once per item.
        #[arg(long)]
        per_request: bool,
        /// Print the power-law fit.
        #[arg(long)]
        fit: bool,
        /// Leave counts below this out of the fit.
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count the entries per module that mention one bib id.
    Trace {
        #[command(flatten)]
        logs: Logs,
        #[arg(long)]
        bib_id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Word statistics over search queries.
    Mine {
        #[command(flatten)]
        logs: Logs,
        #[arg(long, value_parser = ["catalog", "journal"])]
        module: String,
    },
    /// Monthly entry counts for one module.
    Monthly {
        #[command(flatten)]
        logs: Logs,
        #[arg(long)]
        module: Module,
        /// First month, YYYY-MM.
        #[arg(long, requires = "to")]
        from: Option<YearMonth>,
        /// Last month, YYYY-MM.
        #[arg(long, requires = "from")]
        to: Option<YearMonth>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_logs(logs: &Logs) -> anyhow::Result<Vec<ApiLogEntry>> {
    let parsed = parse_logs(&logs.logs)?;
    for d in &parsed.malformed {
        eprintln!("warning: {d}");
    }
    Ok(parsed.entries)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// A file when given, stdout otherwise.
fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn with_suffix(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map_or_else(|| "csv".to_string(), |e| e.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}-{suffix}.{ext}"))
}

pub fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Annotate { logs, sources, out } => {
            let entries = load_logs(&logs)?;
            let loaded = sources.load()?;
            let annotation = annotate(&entries, &loaded.corpus, &loaded.outline, loaded.map.as_ref());
            let annotated = &annotation.entries;
            let paths = [
                with_suffix(&out, "wayfinder"),
                with_suffix(&out, "recommend"),
                with_suffix(&out, "subjects"),
            ];
            write_wayfinder_csv(&wayfinder_table(annotated), create(&paths[0])?)?;
            write_recommend_csv(&recommend_table(annotated), create(&paths[1])?)?;
            write_subject_csv(&subject_table(annotated), create(&paths[2])?)?;
            eprintln!(
                "{} entries annotated, {} ids without a subject",
                annotated.len(),
                annotation.unknown
            );
            for p in &paths {
                println!("{}", p.display());
            }
        }
        Command::Heatmap {
            logs,
            sources,
            cell_size,
            mode,
            out,
        } => {
            if !(cell_size.is_finite() && cell_size > 0.0) {
                bail!("cell size must be positive, got {cell_size}");
            }
            let entries = load_logs(&logs)?;
            let loaded = sources.load()?;
            let Some(map) = loaded.map.as_ref() else {
                bail!("heatmap needs the floor extent: pass --config or --stackmap");
            };
            let annotation = annotate(&entries, &loaded.corpus, &loaded.outline, Some(map));
            let points: Vec<Point> = annotation
                .entries
                .iter()
                .filter(|a| matches!(a.entry.module, Module::Recommend | Module::Wayfinder) && a.entry.is_success())
                .filter_map(|a| a.position)
                .collect();
            let result = heatmap(&points, GridSpec::covering(map.extent(), cell_size), mode);
            let (csv_path, pgm_path) = match out.split_once(',') {
                Some((csv, pgm)) => (csv, Some(pgm)),
                None => (out.as_str(), None),
            };
            let mut w = create(Path::new(csv_path))?;
            result.grid.write_csv(&mut w)?;
            w.flush()?;
            if let Some(pgm) = pgm_path {
                let mut w = create(Path::new(pgm))?;
                result.grid.write_pgm(&mut w)?;
                w.flush()?;
            }
            println!(
                "{} points, mass {}, {} outside the grid",
                points.len(),
                result.grid.total(),
                result.out_of_extent
            );
        }
        Command::Subjects {
            logs,
            sources,
            module,
            per_request,
            fit,
            min_count,
            out,
        } => {
            let entries = load_logs(&logs)?;
            let loaded = sources.load()?;
            let annotation = annotate(&entries, &loaded.corpus, &loaded.outline, loaded.map.as_ref());
            let dist = subject_distribution(&annotation.entries, module, per_request);
            {
                let mut csv = csv_writer(output(out.as_deref())?);
                csv.write_record(["subject", "count"])?;
                for (subject, n) in &dist.rows {
                    csv.write_record([subject.as_str(), &n.to_string()])?;
                }
                if dist.unknown > 0 {
                    csv.write_record(["unknown", &dist.unknown.to_string()])?;
                }
                csv.flush()?;
            }
            if fit {
                let f = fit_power_law(&dist, min_count)?;
                let line = format!(
                    "fit: exponent {:.4}, intercept {:.4}, R² {:.4} over {} ranks",
                    f.exponent, f.intercept, f.r_squared, f.ranks
                );
                // Keep stdout pure CSV when the table goes there.
                if out.is_some() {
                    println!("{line}");
                } else {
                    eprintln!("{line}");
                }
            }
        }
        Command::Trace { logs, bib_id, out } => {
            let entries = load_logs(&logs)?;
            let mut csv = csv_writer(output(out.as_deref())?);
            csv.write_record(["module", "count"])?;
            for (module, n) in trace_identifier(&bib_id, &entries) {
                csv.write_record([module.as_str(), &n.to_string()])?;
            }
            csv.flush()?;
        }
        Command::Mine { logs, module } => {
            let entries = load_logs(&logs)?;
            let module: Module = module.parse()?;
            let stats = mine_queries(&entries, module);
            println!("total words: {}", stats.total_words);
            println!("unique forms: {}", stats.unique_forms);
            for (word, n) in &stats.top {
                println!("{word}\t{n}");
            }
        }
        Command::Monthly {
            logs,
            module,
            from,
            to,
            out,
        } => {
            let entries = load_logs(&logs)?;
            let window = from.zip(to);
            if let Some((a, b)) = window {
                if a > b {
                    bail!("--from {a} is after --to {b}");
                }
            }
            let mut csv = csv_writer(output(out.as_deref())?);
            csv.write_record(["month", "count"])?;
            for (month, n) in time_series(&entries, module, window) {
                csv.write_record([month.to_string(), n.to_string()])?;
            }
            csv.flush()?;
        }
    }
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}
