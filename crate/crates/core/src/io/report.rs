//! Report bundles: a directory of CSV artifacts plus `manifest.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::campaign::analysis::{
    fspl_comparison, published_penetration_table, reflection_analysis, simulated_penetration,
};
use crate::campaign::{coverage_maps, detect_set, run_campaign};
use crate::error::{Error, Result};
use crate::propagation::{reflection_coefficient, Polarization};
use crate::scenarios::{self, Environment, Scenario};

use super::csv;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// SHA-256 of the scene sources and seed, hex.
    pub config_hash: String,
    pub seed: u64,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// Hash identifying a run configuration.
pub fn config_hash(sources: &[&str], seed: u64) -> String {
    let mut h = Sha256::new();
    for s in sources {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    h.update(seed.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes named files into a directory and records them for the manifest.
#[derive(Debug)]
pub struct BundleWriter {
    dir: PathBuf,
    files: Vec<String>,
}

impl BundleWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let io_err = |source| Error::Io {
            path: path.clone(),
            source,
        };
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut w)?;
        w.flush().map_err(io_err)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, command: &str, config_hash: String, seed: u64) -> Result<Manifest> {
        let manifest = Manifest {
            command: command.to_string(),
            config_hash,
            seed,
            files: self.files,
        };
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| Error::Io { path, source })?;
        Ok(manifest)
    }
}

fn figure_prefix(env: Environment) -> &'static str {
    match env {
        Environment::Indoor => "fig8",
        Environment::Outdoor => "fig9",
        Environment::IndoorToOutdoor => "fig10",
    }
}

/// Per-position outcome of [`write_campaign`].
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSummary {
    pub position: String,
    pub total_mpcs: usize,
    pub peak_dbm: Option<f64>,
}

/// Runs every position of a scenario (or only `position`) and writes power
/// map, count map and MPC list per position.
pub fn write_campaign(
    bundle: &mut BundleWriter,
    scenario: &Scenario,
    position: Option<&str>,
    seed: u64,
) -> Result<Vec<CampaignSummary>> {
    let positions = match position {
        Some(name) => vec![scenario.position(name)?.clone()],
        None => scenario.positions.clone(),
    };
    let prefix = format!("{}_{}", figure_prefix(scenario.environment), scenario.name);
    let mut summary = Vec::with_capacity(positions.len());
    for p in &positions {
        let set = run_campaign(scenario, p, seed)?;
        let (power, counts) = coverage_maps(&set, &scenario.detector)?;
        let mpcs: Vec<_> = detect_set(&set, &scenario.detector)?.into_iter().flatten().collect();
        let stem = format!("{prefix}_{}", p.name);
        bundle.write(&format!("{stem}_power.csv"), |w| csv::write_power_map(w, &power))?;
        bundle.write(&format!("{stem}_count.csv"), |w| csv::write_count_map(w, &counts))?;
        bundle.write(&format!("{stem}_mpcs.csv"), |w| csv::write_mpcs(w, &mpcs))?;
        summary.push(CampaignSummary {
            position: p.name.clone(),
            total_mpcs: counts.total(),
            peak_dbm: power.peak().map(|(_, _, v)| v),
        });
    }
    Ok(summary)
}

/// `|Γ|` of both polarisations from 0 to 90 degrees in 1 degree steps.
pub fn reflection_curve(eps_r: f64) -> Result<Vec<(f64, f64, f64)>> {
    (0..=90)
        .map(|deg| {
            let t = deg as f64;
            Ok((
                t,
                reflection_coefficient(t, eps_r, Polarization::Parallel)?,
                reflection_coefficient(t, eps_r, Polarization::Perpendicular)?,
            ))
        })
        .collect()
}

/// Regenerates every comparison artifact from the built-in scenarios.
/// `seed` overrides the per-scenario seeds.
pub fn write_report(dir: &Path, seed: Option<u64>, command: &str) -> Result<Manifest> {
    let library = scenarios::scenario_library();
    let seed_of = |s: &Scenario| seed.unwrap_or(s.seed);
    let find = |env: Environment| {
        library
            .iter()
            .find(|s| s.environment == env)
            .expect("library covers every environment")
    };
    let (indoor, outdoor, i2o) = (
        find(Environment::Indoor),
        find(Environment::Outdoor),
        find(Environment::IndoorToOutdoor),
    );
    let mut bundle = BundleWriter::create(dir)?;

    let mut fspl = fspl_comparison(std::slice::from_ref(indoor), seed_of(indoor))?;
    fspl.extend(fspl_comparison(std::slice::from_ref(outdoor), seed_of(outdoor))?);
    bundle.write("fig6_fspl.csv", |w| csv::write_fspl_table(w, &fspl))?;

    let refl = reflection_analysis(outdoor, seed_of(outdoor))?;
    bundle.write("fig7_reflection.csv", |w| csv::write_reflection_table(w, &refl))?;
    let eps = outdoor.scene.walls.first().map_or(3.0, |w| w.material.rel_permittivity);
    let curve = reflection_curve(eps)?;
    bundle.write("fig7_theory_curve.csv", |w| csv::write_reflection_curve(w, &curve))?;

    let published = published_penetration_table();
    let simulated = simulated_penetration(i2o, seed_of(i2o))?;
    bundle.write("table1_penetration.csv", |w| {
        csv::write_penetration_table(w, &published, &simulated)
    })?;

    for s in [indoor, outdoor, i2o] {
        write_campaign(&mut bundle, s, None, seed_of(s))?;
    }

    let sources: Vec<&str> = scenarios::builtin_names()
        .into_iter()
        .map(|n| scenarios::builtin_source(n).expect("built-in"))
        .collect();
    let effective_seed = seed.unwrap_or(indoor.seed);
    bundle.finish(command, config_hash(&sources, effective_seed), effective_seed)
}
