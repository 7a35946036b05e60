//! Patron positioning from BLE beacon signal strength.
//!
//! Distances come from the log-distance path-loss model and the position is
//! the inverse-distance weighted centroid of the strongest beacons heard.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diag::{read_csv, Diagnostic, LoadError};
use crate::geom::Point;

pub const DEFAULT_TX_POWER: f64 = -59.0;
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.0;
pub const DEFAULT_K: usize = 3;

pub const BEACON_HEADER: [&str; 4] = ["beacon_id", "x", "y", "tx_power"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beacon {
    pub beacon_id: String,
    pub position: Point,
    /// Calibrated RSSI at 1 m, dBm.
    pub tx_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaconObservation {
    pub beacon_id: String,
    pub rssi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatronLocation {
    pub x: f64,
    pub y: f64,
    pub confidence_radius: f64,
}

impl PatronLocation {
    /// A client-supplied position with no positioning uncertainty attached.
    pub fn exact(p: Point) -> Self {
        PatronLocation {
            x: p.x,
            y: p.y,
            confidence_radius: 0.0,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionEstimate {
    pub location: PatronLocation,
    /// Beacons that contributed, strongest first.
    pub used: Vec<String>,
    /// Observations of beacons missing from the deployment.
    pub ignored_unknown: usize,
    /// Observations with an RSSI outside [-120, 0] dBm.
    pub ignored_invalid: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocateError {
    #[error("no observation matches a known beacon")]
    NoKnownBeacons,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocateConfig {
    pub k: usize,
    pub path_loss_exponent: f64,
}

impl Default for LocateConfig {
    fn default() -> Self {
        LocateConfig {
            k: DEFAULT_K,
            path_loss_exponent: DEFAULT_PATH_LOSS_EXPONENT,
        }
    }
}

/// `10^((tx_power - rssi) / (10 n))` metres.
pub fn rssi_to_distance(rssi: f64, tx_power: f64, path_loss_exponent: f64) -> f64 {
    10f64.powf((tx_power - rssi) / (10.0 * path_loss_exponent))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeaconDeployment {
    beacons: BTreeMap<String, Beacon>,
}

#[derive(Debug, Deserialize)]
struct BeaconRow {
    beacon_id: String,
    x: f64,
    y: f64,
    tx_power: Option<f64>,
}

impl BeaconDeployment {
    pub fn new(beacons: impl IntoIterator<Item = Beacon>) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for b in beacons {
            validate_beacon(&b)?;
            let id = b.beacon_id.clone();
            if map.insert(id.clone(), b).is_some() {
                return Err(format!("duplicate beacon_id {id}"));
            }
        }
        Ok(BeaconDeployment { beacons: map })
    }

    pub fn load(path: impl AsRef<Path>, default_tx_power: f64) -> Result<(Self, Vec<Diagnostic>), LoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string(), default_tx_power)
    }

    /// Reads `beacon_id,x,y,tx_power`; an empty `tx_power` takes the default.
    pub fn parse_csv(
        text: &str,
        source: &str,
        default_tx_power: f64,
    ) -> Result<(Self, Vec<Diagnostic>), LoadError> {
        let mut diagnostics = Vec::new();
        let mut beacons = BTreeMap::new();
        for (line, row) in read_csv::<BeaconRow>(text, source, &BEACON_HEADER)? {
            let beacon = row.and_then(|r| {
                let b = Beacon {
                    beacon_id: r.beacon_id,
                    position: Point::new(r.x, r.y),
                    tx_power: r.tx_power.unwrap_or(default_tx_power),
                };
                validate_beacon(&b).map(|_| b)
            });
            match beacon {
                Ok(b) => {
                    if beacons.contains_key(&b.beacon_id) {
                        return Err(LoadError::Fatal(Diagnostic::new(
                            source,
                            line,
                            format!("duplicate beacon_id {}", b.beacon_id),
                        )));
                    }
                    beacons.insert(b.beacon_id.clone(), b);
                }
                Err(msg) => diagnostics.push(Diagnostic::new(source, line, msg)),
            }
        }
        Ok((BeaconDeployment { beacons }, diagnostics))
    }

    pub fn get(&self, beacon_id: &str) -> Option<&Beacon> {
        self.beacons.get(beacon_id)
    }

    pub fn len(&self) -> usize {
        self.beacons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beacons.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Beacon> {
        self.beacons.values()
    }

    pub fn estimate(
        &self,
        observations: &[BeaconObservation],
        config: LocateConfig,
    ) -> Result<PositionEstimate, LocateError> {
        estimate_position(observations, self, config)
    }
}

fn validate_beacon(b: &Beacon) -> Result<(), String> {
    if b.beacon_id.trim().is_empty() {
        return Err("empty beacon_id".into());
    }
    if !(b.position.x.is_finite() && b.position.y.is_finite()) {
        return Err(format!("beacon {} has a non-finite position", b.beacon_id));
    }
    if !(-100.0..=0.0).contains(&b.tx_power) {
        return Err(format!("beacon {} tx_power {} outside [-100, 0]", b.beacon_id, b.tx_power));
    }
    Ok(())
}

/// Weighted centroid of the `k` strongest known beacons, weight `1/d`.
///
/// Repeated observations of one beacon keep the strongest reading. Ties in
/// signal strength go to the lower beacon id.
pub fn estimate_position(
    observations: &[BeaconObservation],
    deployment: &BeaconDeployment,
    config: LocateConfig,
) -> Result<PositionEstimate, LocateError> {
    if config.k == 0 {
        return Err(LocateError::InvalidParameter("k must be at least 1"));
    }
    if config.path_loss_exponent.is_nan() || config.path_loss_exponent <= 0.0 {
        return Err(LocateError::InvalidParameter("path_loss_exponent must be positive"));
    }
    let mut ignored_unknown = 0;
    let mut ignored_invalid = 0;
    let mut strongest: BTreeMap<&str, (f64, &Beacon)> = BTreeMap::new();
    for obs in observations {
        if !(-120.0..=0.0).contains(&obs.rssi) {
            ignored_invalid += 1;
            continue;
        }
        let Some(beacon) = deployment.get(&obs.beacon_id) else {
            ignored_unknown += 1;
            continue;
        };
        strongest
            .entry(beacon.beacon_id.as_str())
            .and_modify(|e| e.0 = e.0.max(obs.rssi))
            .or_insert((obs.rssi, beacon));
    }
    if strongest.is_empty() {
        return Err(LocateError::NoKnownBeacons);
    }
    let mut heard: Vec<(&str, f64, &Beacon)> =
        strongest.into_iter().map(|(id, (rssi, b))| (id, rssi, b)).collect();
    heard.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    heard.truncate(config.k);

    let (mut wx, mut wy, mut wsum, mut wd) = (0.0, 0.0, 0.0, 0.0);
    for (_, rssi, beacon) in &heard {
        let d = rssi_to_distance(*rssi, beacon.tx_power, config.path_loss_exponent);
        let w = 1.0 / d;
        wx += w * beacon.position.x;
        wy += w * beacon.position.y;
        wd += w * d;
        wsum += w;
    }
    Ok(PositionEstimate {
        location: PatronLocation {
            x: wx / wsum,
            y: wy / wsum,
            confidence_radius: wd / wsum,
        },
        used: heard.iter().map(|(id, _, _)| id.to_string()).collect(),
        ignored_unknown,
        ignored_invalid,
    })
}
