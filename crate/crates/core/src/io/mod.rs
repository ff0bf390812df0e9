//! File formats: scene files, CSV artifacts and report bundles.

pub mod csv;
pub mod report;
pub mod scene_file;

pub use report::{write_report, BundleWriter, Manifest};
pub use scene_file::{load_scenario, parse_scenario};
