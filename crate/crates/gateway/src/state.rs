use biblio_core::corpus::{CorpusPaths, CorpusStore};
use biblio_core::geom::Rect;
use biblio_core::lccn::ClassificationOutline;
use biblio_core::locate::{BeaconDeployment, LocateConfig};
use biblio_core::recommend::{Recommender, RecommenderConfig};
use biblio_core::stacksmap::StackMap;
use biblio_core::{Diagnostic, LoadError};

use crate::config::GatewayConfig;

/// Immutable stores shared by all request handlers.
#[derive(Debug, Clone)]
pub struct AppState {
    pub collection: String,
    pub map: StackMap,
    pub corpus: CorpusStore,
    pub outline: ClassificationOutline,
    pub beacons: Option<BeaconDeployment>,
    pub recommend: RecommenderConfig,
    pub locate: LocateConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("map extent {0:?} is not a valid rectangle")]
    Extent([f64; 4]),
}

impl AppState {
    /// Loads every store named by `config`. Skipped lines come back as
    /// diagnostics; anything that aborts a file is an error.
    pub fn load(config: &GatewayConfig) -> Result<(Self, Vec<Diagnostic>), StateError> {
        let mut diagnostics = Vec::new();

        let outline = ClassificationOutline::load(&config.data.outline)?;
        diagnostics.extend(outline.diagnostics);
        diagnostics.extend(outline.warnings);

        let extent = match config.map.extent {
            Some(e) => Some(Rect::new(e[0], e[1], e[2], e[3]).ok_or(StateError::Extent(e))?),
            None => None,
        };
        let path = &config.data.stackmap;
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        let loaded = StackMap::parse_csv(&text, &path.display().to_string(), extent)?;
        diagnostics.extend(loaded.diagnostics);
        let map = match &config.map.background {
            Some(bg) => loaded.map.with_background(bg.clone()),
            None => loaded.map,
        };

        let corpus = CorpusStore::load(&CorpusPaths {
            catalog: config.data.catalog.clone(),
            circulation: config.data.circulation.clone(),
            articles: config.data.articles.clone(),
            databases: config.data.databases.clone(),
        })?;
        diagnostics.extend(corpus.diagnostics);

        let beacons = match &config.data.beacons {
            Some(p) => {
                let (deployment, d) = BeaconDeployment::load(p, config.locate.default_tx_power)?;
                diagnostics.extend(d);
                Some(deployment)
            }
            None => None,
        };

        let state = AppState {
            collection: config.collection.clone(),
            map,
            corpus: corpus.store,
            outline: outline.outline,
            beacons,
            recommend: config.recommend.to_config(),
            locate: LocateConfig {
                k: config.locate.k,
                path_loss_exponent: config.locate.path_loss_exponent,
            },
        };
        Ok((state, diagnostics))
    }

    pub fn recommender(&self) -> Recommender<'_> {
        Recommender::new(&self.map, &self.corpus, &self.outline, self.recommend)
    }
}
