//! Campaign scenarios and the built-in scene library.
//!
//! A [`Scenario`] bundles a scene with its link parameters, antenna, scan
//! grid, sounder and detector settings, and the Tx/Rx positions visited.
//! The three built-in scenarios are stored as scene files under
//! `scenes/` and compiled into the binary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::antenna::{HornPattern, ScanGrid};
use crate::campaign::Detector;
use crate::error::{Error, Result};
use crate::geometry::{Node, Scene};
use crate::io::scene_file;
use crate::propagation::Polarization;
use crate::sounder::SounderConfig;

pub const INDOOR: &str = "indoor";
pub const OUTDOOR: &str = "outdoor";
pub const INDOOR_TO_OUTDOOR: &str = "indoor-to-outdoor";

const BUILTIN: [(&str, &str); 3] = [
    (INDOOR, include_str!("../scenes/indoor.scn")),
    (OUTDOOR, include_str!("../scenes/outdoor.scn")),
    (INDOOR_TO_OUTDOOR, include_str!("../scenes/indoor-to-outdoor.scn")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    Indoor,
    Outdoor,
    IndoorToOutdoor,
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Environment::Indoor => "indoor",
            Environment::Outdoor => "outdoor",
            Environment::IndoorToOutdoor => "indoor-to-outdoor",
        })
    }
}

impl FromStr for Environment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indoor" => Ok(Environment::Indoor),
            "outdoor" => Ok(Environment::Outdoor),
            "indoor-to-outdoor" => Ok(Environment::IndoorToOutdoor),
            other => Err(Error::Lookup(format!("unknown environment `{other}`"))),
        }
    }
}

/// Link-budget parameters shared by every path of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub frequency_hz: f64,
    pub tx_power_dbm: f64,
    /// Additive loss applied to every path (weather, clutter).
    pub excess_loss_db: f64,
    pub polarization: Polarization,
    pub antenna: HornPattern,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            frequency_hz: 28e9,
            tx_power_dbm: 10.0,
            excess_loss_db: 0.0,
            polarization: Polarization::Parallel,
            antenna: HornPattern::default(),
        }
    }
}

/// One Tx/Rx placement. Node headings are resolved: a node without an
/// explicit heading faces its peer.
#[derive(Debug, Clone, PartialEq)]
pub struct Position {
    pub name: String,
    pub tx: Node,
    pub rx: Node,
}

impl Position {
    pub fn distance_m(&self) -> f64 {
        self.tx.position.distance(self.rx.position)
    }

    /// The same link with the roles of the two nodes exchanged.
    pub fn swapped(&self) -> Position {
        Position {
            name: format!("{}-swapped", self.name),
            tx: self.rx.clone(),
            rx: self.tx.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub environment: Environment,
    pub link: LinkParams,
    pub scan: ScanGrid,
    pub sounder: SounderConfig,
    pub detector: Detector,
    pub seed: u64,
    pub scene: Scene,
    pub positions: Vec<Position>,
}

impl Scenario {
    pub fn position(&self, name: &str) -> Result<&Position> {
        self.positions.iter().find(|p| p.name == name).ok_or_else(|| {
            let known: Vec<&str> = self.positions.iter().map(|p| p.name.as_str()).collect();
            Error::Lookup(format!(
                "scenario `{}` has no position `{name}` (known: {})",
                self.name,
                known.join(", ")
            ))
        })
    }

    /// The same placements with every wall removed.
    pub fn without_walls(&self) -> Scenario {
        let mut s = self.clone();
        s.name = format!("{}-unblocked", self.name);
        s.scene.walls.clear();
        s
    }
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

/// Source text of a built-in scene file.
pub fn builtin_source(name: &str) -> Result<&'static str> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
        .ok_or_else(|| {
            Error::Lookup(format!(
                "unknown scenario `{name}` (built-in: {})",
                builtin_names().join(", ")
            ))
        })
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let src = builtin_source(name)?;
    scene_file::parse_scenario(src, &format!("{name}.scn"))
}

/// The three built-in scenarios in a fixed order.
pub fn scenario_library() -> Vec<Scenario> {
    BUILTIN
        .iter()
        .map(|(name, _)| builtin(name).expect("built-in scene files are valid"))
        .collect()
}
