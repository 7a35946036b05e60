//! Desk-scale stand-in for a year of library middleware traffic.
//!
//! [`world`] generates a catalog, circulation history, floor plan and beacon
//! grid; [`walk`] scripts patron requests over that floor; [`modules`] adds
//! traffic for the app modules the gateway does not serve; [`report`] runs
//! the gateway, replays the walk and produces every telemetry output.

pub mod modules;
pub mod report;
pub mod walk;
pub mod world;

pub use modules::{gen_module_logs, ModuleMix};
pub use report::{run_report, Check, Report, ReportConfig, ReportError, Stage};
pub use walk::{gen_walk, Action, Step, WalkProfile, WalkScript};
pub use world::{gen_corpus, gen_world, CorpusProfile, Floor, World, WorldFiles};
