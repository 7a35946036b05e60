//! Where the telemetry commands get their catalog, outline and floor map.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use biblio_core::corpus::{parse_catalog, parse_circulation, CorpusStore};
use biblio_core::diag::Diagnostic;
use biblio_core::lccn::{ClassificationOutline, BUNDLED_OUTLINE};
use biblio_core::stacksmap::StackMap;
use biblio_gateway::{AppState, GatewayConfig};
use clap::Args;

#[derive(Debug, Clone, Args)]
pub struct Sources {
    /// Gateway config naming every data file. Overrides the flags below.
    #[arg(long, conflicts_with_all = ["catalog", "circulation", "outline", "stackmap"])]
    pub config: Option<PathBuf>,
    /// Catalog CSV (bib_id,title,call_number,format).
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Circulation CSV (bib_id,charge_date).
    #[arg(long)]
    pub circulation: Option<PathBuf>,
    /// Subject outline TSV; the bundled outline when omitted.
    #[arg(long)]
    pub outline: Option<PathBuf>,
    /// Shelf map CSV.
    #[arg(long)]
    pub stackmap: Option<PathBuf>,
}

pub struct Loaded {
    pub corpus: CorpusStore,
    pub outline: ClassificationOutline,
    pub map: Option<StackMap>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn warn_all(diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("warning: {d}");
    }
}

impl Sources {
    pub fn load(&self) -> anyhow::Result<Loaded> {
        if let Some(config) = &self.config {
            let cfg = GatewayConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
            let (state, diagnostics) = AppState::load(&cfg)?;
            warn_all(&diagnostics);
            return Ok(Loaded {
                corpus: state.corpus,
                outline: state.outline,
                map: Some(state.map),
            });
        }

        let mut diagnostics = Vec::new();
        let outline = match &self.outline {
            Some(path) => ClassificationOutline::load(path)?,
            None => ClassificationOutline::parse_tsv(BUNDLED_OUTLINE, "bundled outline")?,
        };
        diagnostics.extend(outline.diagnostics);
        diagnostics.extend(outline.warnings);

        let records = match &self.catalog {
            Some(path) => parse_catalog(&read(path)?, &path.display().to_string(), &mut diagnostics)?,
            None => Vec::new(),
        };
        let charges = match &self.circulation {
            Some(path) => parse_circulation(&read(path)?, &path.display().to_string(), &mut diagnostics)?,
            None => HashMap::new(),
        };
        let corpus = CorpusStore::new(records, charges, Vec::new(), Vec::new()).map_err(anyhow::Error::msg)?;

        let map = match &self.stackmap {
            Some(path) => {
                let load = StackMap::load(path)?;
                diagnostics.extend(load.diagnostics);
                Some(load.map)
            }
            None => None,
        };
        warn_all(&diagnostics);
        Ok(Loaded {
            corpus,
            outline: outline.outline,
            map,
        })
    }
}
