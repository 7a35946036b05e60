//! Simulated patron walks: where each request is made from, what it asks
//! for, and how much simulated time passes between requests.

use biblio_core::corpus::{CorpusStore, FormatFilter};
use biblio_core::geom::{Point, Rect};
use biblio_core::stacksmap::StackMap;
use chrono::{DateTime, Duration, Utc};
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::world::{apportion, Floor, STUDY_DAYS, STUDY_START};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Wayfind { bib_id: String },
    Recommend,
    Idle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub point: Point,
    pub action: Action,
    /// Simulated seconds until the next step.
    pub dwell: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkScript {
    pub seed: u64,
    pub start: DateTime<Utc>,
    pub steps: Vec<Step>,
}

impl WalkScript {
    /// Steps that issue a request.
    pub fn requests(&self) -> usize {
        self.steps.iter().filter(|s| s.action != Action::Idle).count()
    }

    /// Simulated instant of each step: the start plus the dwell of every
    /// earlier step.
    pub fn timestamps(&self) -> Vec<DateTime<Utc>> {
        let mut t = self.start;
        self.steps
            .iter()
            .map(|s| {
                let now = t;
                t += Duration::seconds(i64::from(s.dwell));
                now
            })
            .collect()
    }
}

/// Walk tunables. The zone weights pick where each step stands; they need
/// not sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkProfile {
    pub recommend: usize,
    pub wayfind: usize,
    /// Chance of an idle step before each request.
    pub idle_share: f64,
    pub near_shelf: f64,
    pub aisle: f64,
    pub entrance: f64,
}

impl Default for WalkProfile {
    fn default() -> Self {
        WalkProfile {
            recommend: 400,
            wayfind: 200,
            idle_share: 0.1,
            near_shelf: 0.7,
            aisle: 0.15,
            entrance: 0.15,
        }
    }
}

impl WalkProfile {
    pub fn all_entrance(recommend: usize, wayfind: usize) -> Self {
        WalkProfile {
            recommend,
            wayfind,
            idle_share: 0.0,
            near_shelf: 0.0,
            aisle: 0.0,
            entrance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("invalid walk profile: {0}")]
    Profile(String),
    #[error("the stack map has no shelves")]
    NoShelves,
    #[error("the catalog is empty but {0} wayfinder requests were asked for")]
    NoRecords(usize),
}

#[derive(Debug, Clone, Copy)]
enum Placement {
    Shelf(usize),
    Aisle,
    Entrance,
}

/// `n` draws split over `weights` by largest remainder, as a list of
/// indices in index order.
fn quota(n: usize, weights: &[f64]) -> Vec<usize> {
    apportion(n, weights)
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| std::iter::repeat_n(i, c))
        .collect()
}

fn uniform_in(rng: &mut ChaCha8Rng, r: &Rect) -> Point {
    Point::new(rng.gen_range(r.x_min..=r.x_max), rng.gen_range(r.y_min..=r.y_max))
}

/// A point in the aisle beside `shelf`, 2 to 12 map units from its long
/// face, clamped to `extent`.
fn beside(rng: &mut ChaCha8Rng, shelf: &Rect, extent: &Rect) -> Point {
    let offset = rng.gen_range(2.0..=12.0);
    let (lo, hi) = if shelf.width() <= shelf.height() {
        let y = rng.gen_range(shelf.y_min..=shelf.y_max);
        let x = if rng.gen_bool(0.5) { shelf.x_min - offset } else { shelf.x_max + offset };
        (x, y)
    } else {
        let x = rng.gen_range(shelf.x_min..=shelf.x_max);
        let y = if rng.gen_bool(0.5) { shelf.y_min - offset } else { shelf.y_max + offset };
        (x, y)
    };
    Point::new(lo.clamp(extent.x_min, extent.x_max), hi.clamp(extent.y_min, extent.y_max))
}

/// Builds a walk of `profile.recommend` recommendation and
/// `profile.wayfind` wayfinder requests in shuffled order.
///
/// Zones follow the profile weights and near-shelf points favour shelves
/// by the circulation they hold, both by quota. Wayfinder targets are
/// drawn by circulation, so popular stacks see more traffic. Dwell times
/// are exponential, scaled so the walk spans the study year.
pub fn gen_walk(
    seed: u64,
    map: &StackMap,
    corpus: &CorpusStore,
    floor: &Floor,
    profile: &WalkProfile,
) -> Result<WalkScript, WalkError> {
    let zones = [profile.near_shelf, profile.aisle, profile.entrance];
    if zones.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || zones.iter().sum::<f64>() <= 0.0 {
        return Err(WalkError::Profile(format!("zone weights {zones:?} must be non-negative with a positive sum")));
    }
    if !(0.0..1.0).contains(&profile.idle_share) {
        return Err(WalkError::Profile(format!("idle_share must be in [0, 1), got {}", profile.idle_share)));
    }
    if map.is_empty() {
        return Err(WalkError::NoShelves);
    }
    if profile.wayfind > 0 && corpus.is_empty() {
        return Err(WalkError::NoRecords(profile.wayfind));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Every shelf keeps a little traffic even when it holds nothing popular.
    let shelf_weights: Vec<f64> = map
        .shelves()
        .iter()
        .map(|s| {
            let held: u64 = corpus
                .books_in_range(&s.range, FormatFilter::All)
                .iter()
                .map(|r| corpus.circulation_count(&r.bib_id))
                .sum();
            held as f64 + 1.0
        })
        .collect();
    let targets = corpus.records();
    let target_pick = (!targets.is_empty()).then(|| {
        WeightedIndex::new(targets.iter().map(|r| corpus.circulation_count(&r.bib_id) as f64 + 1.0))
            .expect("positive weights")
    });

    let mut actions: Vec<bool> = std::iter::repeat_n(true, profile.recommend)
        .chain(std::iter::repeat_n(false, profile.wayfind))
        .collect();
    actions.shuffle(&mut rng);

    let mut plan = Vec::with_capacity(actions.len());
    for recommend in actions {
        if rng.gen_bool(profile.idle_share) {
            plan.push(Action::Idle);
        }
        plan.push(if recommend {
            Action::Recommend
        } else {
            let pick = target_pick.as_ref().expect("checked non-empty catalog");
            Action::Wayfind {
                bib_id: targets[pick.sample(&mut rng)].bib_id.clone(),
            }
        });
    }

    // Zones and shelves are drawn by quota rather than independently, so
    // the traffic mix matches the weights even for short walks. Recommend
    // steps get their own quota since they alone read the shelves.
    let mut placements = vec![Placement::Entrance; plan.len()];
    for recommend in [true, false] {
        let idx: Vec<usize> = (0..plan.len())
            .filter(|&i| (plan[i] == Action::Recommend) == recommend)
            .collect();
        let mut zone_list = quota(idx.len(), &zones);
        zone_list.shuffle(&mut rng);
        let near = zone_list.iter().filter(|&&z| z == 0).count();
        let mut shelf_list = quota(near, &shelf_weights);
        shelf_list.shuffle(&mut rng);
        let mut shelf_list = shelf_list.into_iter();
        for (i, z) in idx.into_iter().zip(zone_list) {
            placements[i] = match z {
                0 => Placement::Shelf(shelf_list.next().expect("one shelf per near-shelf step")),
                1 => Placement::Aisle,
                _ => Placement::Entrance,
            };
        }
    }

    let extent = map.extent();
    let mut steps = Vec::with_capacity(plan.len());
    let mut raw = Vec::with_capacity(plan.len());
    for (action, placement) in plan.into_iter().zip(placements) {
        let point = match placement {
            Placement::Aisle => {
                let aisle = floor.aisles.choose(&mut rng).copied().unwrap_or(floor.extent);
                uniform_in(&mut rng, &aisle)
            }
            Placement::Entrance => uniform_in(&mut rng, &floor.entrance),
            Placement::Shelf(shelf) => beside(&mut rng, &map.shelves()[shelf].bounds, &extent),
        };
        steps.push(Step {
            point,
            action,
            dwell: 0,
        });
        raw.push(-(1.0 - rng.gen::<f64>()).ln());
    }

    // Leave a day of slack so rounding up to whole seconds never spills
    // past the study year.
    let span = (STUDY_DAYS - 1) * 86_400 - steps.len() as i64;
    let total: f64 = raw.iter().sum();
    let scale = if total > 0.0 { span.max(0) as f64 / total } else { 0.0 };
    for (step, r) in steps.iter_mut().zip(&raw) {
        step.dwell = ((r * scale) as u32).max(1);
    }

    Ok(WalkScript {
        seed,
        start: STUDY_START.and_hms_opt(8, 0, 0).expect("valid time").and_utc(),
        steps,
    })
}
