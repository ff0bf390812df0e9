//! Scene files.
//!
//! A scene file is a TOML document. Units are spelled out in key names:
//!
//! ```toml
//! name = "outdoor"
//! environment = "outdoor"      # indoor | outdoor | indoor-to-outdoor
//! frequency_hz = 28e9
//! tx_power_dbm = 10.0
//! excess_loss_db = 2.5
//! polarization = "parallel"
//! seed = 28
//!
//! [antenna]                    # HornPattern fields, all optional
//! [scan]                       # start_deg/step_deg/count or azimuths_deg
//! [sounder]                    # SounderConfig fields, all optional
//! [detector]                   # Detector fields, all optional
//!
//! [[materials]]
//! name = "glass"
//! eps_r = 3.0
//! thickness_cm = 10.0
//! atten_db_per_cm = 4.73
//!
//! [[walls]]
//! p0_m = [-10.0, 0.0]
//! p1_m = [25.0, 0.0]
//! material = "glass"
//!
//! [[nodes]]
//! name = "tx"
//! x_m = 0.0
//! y_m = 4.82
//! height_m = 1.5               # optional
//! heading_deg = 0.0            # optional; default faces the peer
//!
//! [[positions]]
//! name = "rx1"
//! tx = "tx"
//! rx = "rx1"
//! ```

use std::collections::HashMap;
use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::antenna::{default_scan_grid, HornPattern, ScanGrid};
use crate::campaign::Detector;
use crate::error::{Error, Result};
use crate::geometry::{Node, Point2, Scene, Wall};
use crate::propagation::{Material, Polarization};
use crate::scenarios::{Environment, LinkParams, Position, Scenario};
use crate::sounder::SounderConfig;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    environment: Spanned<String>,
    #[serde(default = "default_frequency")]
    frequency_hz: f64,
    #[serde(default = "default_tx_power")]
    tx_power_dbm: f64,
    #[serde(default)]
    excess_loss_db: f64,
    #[serde(default)]
    polarization: Polarization,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    antenna: Option<Spanned<HornPattern>>,
    #[serde(default)]
    scan: Option<Spanned<RawScan>>,
    #[serde(default)]
    sounder: Option<Spanned<SounderConfig>>,
    #[serde(default)]
    detector: Option<Spanned<Detector>>,
    #[serde(default)]
    materials: Vec<Spanned<RawMaterial>>,
    #[serde(default)]
    walls: Vec<Spanned<RawWall>>,
    nodes: Vec<Spanned<RawNode>>,
    positions: Vec<Spanned<RawPosition>>,
}

fn default_frequency() -> f64 {
    28e9
}

fn default_tx_power() -> f64 {
    10.0
}

fn default_seed() -> u64 {
    28
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    azimuths_deg: Option<Vec<f64>>,
    start_deg: Option<f64>,
    step_deg: Option<f64>,
    count: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    name: String,
    eps_r: f64,
    thickness_cm: f64,
    atten_db_per_cm: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWall {
    p0_m: [f64; 2],
    p1_m: [f64; 2],
    material: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: String,
    x_m: f64,
    y_m: f64,
    height_m: Option<f64>,
    heading_deg: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPosition {
    name: String,
    tx: Spanned<String>,
    rx: Spanned<String>,
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

struct Ctx<'a> {
    src: &'a str,
    source_name: &'a str,
}

impl Ctx<'_> {
    fn error(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        let (line, column) = line_col(self.src, span.start);
        Error::Parse {
            source_name: self.source_name.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    /// Re-anchors a validation error at `span`.
    fn at<T>(&self, span: Range<usize>, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Domain(m) | Error::Lookup(m) => self.error(span, m),
            other => other,
        })
    }
}

/// Parses scene-file text. `source_name` labels diagnostics.
pub fn parse_scenario(src: &str, source_name: &str) -> Result<Scenario> {
    let ctx = Ctx { src, source_name };
    let raw: RawScenario = toml::from_str(src).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        ctx.error(span, e.message().trim().to_string())
    })?;

    let environment = ctx.at(raw.environment.span(), raw.environment.get_ref().parse::<Environment>())?;
    let whole = 0..0;
    if !(raw.frequency_hz > 0.0 && raw.frequency_hz.is_finite()) {
        return Err(ctx.error(
            whole,
            format!("frequency_hz must be positive, got {}", raw.frequency_hz),
        ));
    }
    if !raw.tx_power_dbm.is_finite() || !raw.excess_loss_db.is_finite() {
        return Err(ctx.error(whole, "tx_power_dbm and excess_loss_db must be finite"));
    }

    let antenna = match raw.antenna {
        Some(a) => {
            let span = a.span();
            let a = a.into_inner();
            ctx.at(span, a.validate())?;
            a
        }
        None => HornPattern::default(),
    };
    let scan = match raw.scan {
        Some(s) => {
            let span = s.span();
            ctx.at(span, resolve_scan(s.into_inner()))?
        }
        None => default_scan_grid(),
    };
    let sounder = match raw.sounder {
        Some(s) => {
            let span = s.span();
            let s = s.into_inner();
            ctx.at(span, s.validate())?;
            s
        }
        None => SounderConfig::default(),
    };
    let detector = match raw.detector {
        Some(d) => {
            let span = d.span();
            let d = d.into_inner();
            ctx.at(span, d.validate())?;
            d
        }
        None => Detector::default(),
    };

    let mut materials: HashMap<String, Material> = HashMap::new();
    for m in raw.materials {
        let span = m.span();
        let m = m.into_inner();
        if materials.contains_key(&m.name) {
            return Err(ctx.error(span, format!("material `{}` defined twice", m.name)));
        }
        let material = ctx.at(
            span,
            Material::new(m.name.clone(), m.eps_r, m.thickness_cm, m.atten_db_per_cm),
        )?;
        materials.insert(m.name, material);
    }

    let mut walls = Vec::with_capacity(raw.walls.len());
    for w in raw.walls {
        let span = w.span();
        let w = w.into_inner();
        let Some(material) = materials.get(w.material.get_ref()) else {
            return Err(ctx.error(
                w.material.span(),
                format!("undefined material `{}`", w.material.get_ref()),
            ));
        };
        let p0 = Point2::new(w.p0_m[0], w.p0_m[1]);
        let p1 = Point2::new(w.p1_m[0], w.p1_m[1]);
        walls.push(ctx.at(span, Wall::new(p0, p1, material.clone()))?);
    }

    let mut nodes: HashMap<String, (Node, bool)> = HashMap::new();
    for n in raw.nodes {
        let span = n.span();
        let n = n.into_inner();
        if nodes.contains_key(&n.name) {
            return Err(ctx.error(span, format!("node `{}` defined twice", n.name)));
        }
        let mut node = Node::new(n.name.clone(), n.x_m, n.y_m);
        if let Some(h) = n.height_m {
            node.height_m = h;
        }
        let explicit = n.heading_deg.is_some();
        node.heading_deg = n.heading_deg.unwrap_or(0.0);
        let finite = node.position.is_finite() && node.height_m.is_finite() && node.heading_deg.is_finite();
        if !finite {
            return Err(ctx.error(span, format!("node `{}` has non-finite coordinates", n.name)));
        }
        nodes.insert(n.name, (node, explicit));
    }

    let mut positions = Vec::with_capacity(raw.positions.len());
    for p in raw.positions {
        let span = p.span();
        let p = p.into_inner();
        let lookup = |r: &Spanned<String>| {
            nodes
                .get(r.get_ref())
                .cloned()
                .ok_or_else(|| ctx.error(r.span(), format!("undefined node `{}`", r.get_ref())))
        };
        let (mut tx, tx_explicit) = lookup(&p.tx)?;
        let (mut rx, rx_explicit) = lookup(&p.rx)?;
        if tx.position.distance(rx.position) <= crate::geometry::ON_SEGMENT_TOL_M {
            return Err(ctx.error(
                span,
                format!("position `{}` places tx and rx at the same point", p.name),
            ));
        }
        if !tx_explicit {
            tx.heading_deg = (rx.position - tx.position).azimuth_deg();
        }
        if !rx_explicit {
            rx.heading_deg = (tx.position - rx.position).azimuth_deg();
        }
        if positions.iter().any(|q: &Position| q.name == p.name) {
            return Err(ctx.error(span, format!("position `{}` defined twice", p.name)));
        }
        positions.push(Position { name: p.name, tx, rx });
    }
    if positions.is_empty() {
        return Err(ctx.error(whole, "scene defines no positions"));
    }

    Ok(Scenario {
        name: raw.name.clone(),
        environment,
        link: LinkParams {
            frequency_hz: raw.frequency_hz,
            tx_power_dbm: raw.tx_power_dbm,
            excess_loss_db: raw.excess_loss_db,
            polarization: raw.polarization,
            antenna,
        },
        scan,
        sounder,
        detector,
        seed: raw.seed,
        scene: Scene::new(raw.name, walls),
        positions,
    })
}

fn resolve_scan(s: RawScan) -> Result<ScanGrid> {
    match (s.azimuths_deg, s.start_deg, s.step_deg, s.count) {
        (Some(list), None, None, None) => ScanGrid::new(list),
        (None, Some(start), Some(step), Some(count)) => ScanGrid::uniform(start, step, count),
        _ => Err(Error::Domain(
            "scan needs either azimuths_deg or all of start_deg, step_deg and count".into(),
        )),
    }
}

/// Reads and parses a scene file from disk.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let src = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&src, &path.display().to_string())
}
