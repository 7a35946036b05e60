use std::path::{Path, PathBuf};

use biblio_core::locate::{DEFAULT_K, DEFAULT_PATH_LOSS_EXPONENT, DEFAULT_TX_POWER};
use biblio_core::recommend::RecommenderConfig;
use serde::Deserialize;

/// Gateway configuration, read from TOML. Relative data paths resolve
/// against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatewayConfig {
    /// Collection segment accepted by the wayfinder endpoint.
    #[serde(default = "default_collection")]
    pub collection: String,
    pub data: DataPaths,
    #[serde(default)]
    pub map: MapSection,
    #[serde(default)]
    pub recommend: RecommendSection,
    #[serde(default)]
    pub locate: LocateSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub catalog: PathBuf,
    pub circulation: PathBuf,
    pub articles: PathBuf,
    pub databases: PathBuf,
    pub outline: PathBuf,
    pub stackmap: PathBuf,
    /// Without beacons the locate endpoint answers 503.
    #[serde(default)]
    pub beacons: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    /// `[x_min, y_min, x_max, y_max]`; defaults to the shelves' bounding box.
    pub extent: Option<[f64; 4]>,
    pub background: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecommendSection {
    pub radius: Option<f64>,
    pub max_items: usize,
    pub max_ebooks: usize,
    pub majority_threshold: f64,
}

impl Default for RecommendSection {
    fn default() -> Self {
        let d = RecommenderConfig::default();
        RecommendSection {
            radius: d.radius,
            max_items: d.max_items,
            max_ebooks: d.max_ebooks,
            majority_threshold: d.majority_threshold,
        }
    }
}

impl RecommendSection {
    pub fn to_config(&self) -> RecommenderConfig {
        RecommenderConfig {
            radius: self.radius,
            max_items: self.max_items,
            max_ebooks: self.max_ebooks,
            majority_threshold: self.majority_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocateSection {
    pub k: usize,
    pub path_loss_exponent: f64,
    pub default_tx_power: f64,
}

impl Default for LocateSection {
    fn default() -> Self {
        LocateSection {
            k: DEFAULT_K,
            path_loss_exponent: DEFAULT_PATH_LOSS_EXPONENT,
            default_tx_power: DEFAULT_TX_POWER,
        }
    }
}

fn default_collection() -> String {
    "uiu_undergrad".to_string()
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl GatewayConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            ConfigError::Toml { source, .. } => ConfigError::Toml {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    /// Parses TOML text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg: GatewayConfig = toml::from_str(text).map_err(|source| ConfigError::Toml {
            path: PathBuf::new(),
            source,
        })?;
        cfg.data.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.recommend;
        if r.radius.is_some_and(|v| !(v >= 0.0 && v.is_finite())) {
            return Err(ConfigError::Invalid("recommend.radius must be a non-negative number".into()));
        }
        if !(0.0..1.0).contains(&r.majority_threshold) {
            return Err(ConfigError::Invalid("recommend.majority_threshold must be in [0, 1)".into()));
        }
        let l = &self.locate;
        if l.k == 0 {
            return Err(ConfigError::Invalid("locate.k must be at least 1".into()));
        }
        if !(l.path_loss_exponent > 0.0 && l.path_loss_exponent.is_finite()) {
            return Err(ConfigError::Invalid("locate.path_loss_exponent must be positive".into()));
        }
        if self.collection.is_empty() || self.collection.contains('/') {
            return Err(ConfigError::Invalid("collection must be a single path segment".into()));
        }
        Ok(())
    }
}

impl DataPaths {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.catalog,
            &mut self.circulation,
            &mut self.articles,
            &mut self.databases,
            &mut self.outline,
            &mut self.stackmap,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = self.beacons.as_mut().filter(|p| p.is_relative()) {
            *p = base.join(&*p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[data]
catalog = "c.csv"
circulation = "/abs/circ.csv"
articles = "a.csv"
databases = "d.csv"
outline = "../o.tsv"
stackmap = "s.csv"
"#;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = GatewayConfig::parse(MINIMAL, Path::new("/srv/world")).unwrap();
        assert_eq!(cfg.collection, "uiu_undergrad");
        assert_eq!(cfg.data.catalog, PathBuf::from("/srv/world/c.csv"));
        assert_eq!(cfg.data.circulation, PathBuf::from("/abs/circ.csv"));
        assert_eq!(cfg.data.outline, PathBuf::from("/srv/world/../o.tsv"));
        assert!(cfg.data.beacons.is_none());
        assert_eq!(cfg.recommend.to_config(), RecommenderConfig::default());
        assert_eq!(cfg.locate.k, 3);
    }

    #[test]
    fn rejects_bad_tunables_and_unknown_keys() {
        let bad = format!("{MINIMAL}\n[recommend]\nmajority_threshold = 1.5\n");
        assert!(matches!(GatewayConfig::parse(&bad, Path::new(".")), Err(ConfigError::Invalid(_))));
        let typo = format!("{MINIMAL}\n[recommend]\nmax_item = 4\n");
        assert!(matches!(GatewayConfig::parse(&typo, Path::new(".")), Err(ConfigError::Toml { .. })));
    }
}
