//! CSV serialisation of maps, MPC lists, PDPs and comparison tables.
//!
//! dB quantities are written with two decimals, everything else with six
//! significant digits.

use std::io::{Read, Write};

use crate::campaign::analysis::{FsplRow, PenetrationRow, ReflectionRow, SimulatedPenetrationRow};
use crate::campaign::{CountMap, CoverageMap, Mpc, PowerMap};
use crate::error::{Error, Result};
use crate::sounder::Pdp;

/// Power-map cell with no detected MPC.
pub const BELOW_FLOOR: &str = "below_floor";
/// Table entry for an arrival that was not detected.
pub const NOT_DETECTED: &str = "not_detected";
const CORNER: &str = "tx_az_deg\\rx_az_deg";

pub fn fmt_db(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Six significant digits, trailing zeros trimmed.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn opt_db(v: Option<f64>) -> String {
    v.map_or_else(|| NOT_DETECTED.into(), fmt_db)
}

fn opt_sig(v: Option<f64>) -> String {
    v.map_or_else(|| NOT_DETECTED.into(), fmt_sig)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(false).from_writer(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })
}

fn parse_error(source_name: &str, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.into(),
        line: line as usize,
        column,
        message: message.into(),
    }
}

fn parse_f64(source_name: &str, record: &csv::StringRecord, column: usize) -> Result<f64> {
    let line = record.position().map_or(0, |p| p.line());
    let field = record
        .get(column)
        .ok_or_else(|| parse_error(source_name, line, column + 1, "missing field"))?;
    field
        .trim()
        .parse()
        .map_err(|_| parse_error(source_name, line, column + 1, format!("`{field}` is not a number")))
}

fn write_map<W: Write, T: Clone>(w: W, map: &CoverageMap<T>, cell: impl Fn(&T) -> String) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec![CORNER.to_string()];
    header.extend(map.rx_az_deg.iter().map(|a| fmt_sig(*a)));
    out.write_record(&header)?;
    for (az, row) in map.tx_az_deg.iter().zip(map.rows()) {
        let mut rec = vec![fmt_sig(*az)];
        rec.extend(row.iter().map(&cell));
        out.write_record(&rec)?;
    }
    finish(out)
}

fn read_map<R: Read, T: Clone>(r: R, source_name: &str, cell: impl Fn(&str) -> Option<T>) -> Result<CoverageMap<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| parse_error(source_name, 1, 1, "empty coverage map"))??;
    let rx_az = (1..header.len())
        .map(|c| parse_f64(source_name, &header, c))
        .collect::<Result<Vec<_>>>()?;
    let mut tx_az = Vec::new();
    let mut cells = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        tx_az.push(parse_f64(source_name, &rec, 0)?);
        for c in 1..rec.len() {
            let field = &rec[c];
            cells.push(
                cell(field.trim())
                    .ok_or_else(|| parse_error(source_name, line, c + 1, format!("bad cell `{field}`")))?,
            );
        }
    }
    CoverageMap::new(tx_az, rx_az, cells).map_err(|e| parse_error(source_name, 1, 1, e.to_string()))
}

pub fn write_power_map<W: Write>(w: W, map: &PowerMap) -> Result<()> {
    write_map(w, map, |c| c.map_or_else(|| BELOW_FLOOR.into(), fmt_db))
}

pub fn write_count_map<W: Write>(w: W, map: &CountMap) -> Result<()> {
    write_map(w, map, |c| c.to_string())
}

pub fn read_power_map<R: Read>(r: R, source_name: &str) -> Result<PowerMap> {
    read_map(r, source_name, |s| {
        if s == BELOW_FLOOR {
            Some(None)
        } else {
            s.parse().ok().map(Some)
        }
    })
}

pub fn read_count_map<R: Read>(r: R, source_name: &str) -> Result<CountMap> {
    read_map(r, source_name, |s| s.parse().ok())
}

pub fn write_mpcs<W: Write>(w: W, mpcs: &[Mpc]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["delay_ns", "power_dbm", "tx_az_deg", "rx_az_deg"])?;
    for m in mpcs {
        out.write_record([
            fmt_sig(m.delay_s * 1e9),
            fmt_db(m.power_dbm),
            fmt_sig(m.tx_az_deg),
            fmt_sig(m.rx_az_deg),
        ])?;
    }
    finish(out)
}

pub fn read_mpcs<R: Read>(r: R, source_name: &str) -> Result<Vec<Mpc>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(Mpc {
                delay_s: parse_f64(source_name, &rec, 0)? * 1e-9,
                power_dbm: parse_f64(source_name, &rec, 1)?,
                tx_az_deg: parse_f64(source_name, &rec, 2)?,
                rx_az_deg: parse_f64(source_name, &rec, 3)?,
            })
        })
        .collect()
}

pub fn write_pdp<W: Write>(w: W, pdp: &Pdp) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["delay_ns", "power_db"])?;
    for (k, p) in pdp.power_db.iter().enumerate() {
        out.write_record([fmt_sig(pdp.delay_s(k) * 1e9), fmt_db(*p)])?;
    }
    finish(out)
}

pub fn write_fspl_table<W: Write>(w: W, rows: &[FsplRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "scenario",
        "position",
        "distance_m",
        "theoretical_fspl_db",
        "simulated_pl_db",
        "offset_db",
    ])?;
    for r in rows {
        out.write_record([
            r.scenario.clone(),
            r.position.clone(),
            fmt_sig(r.distance_m),
            fmt_db(r.theoretical_db),
            opt_db(r.simulated_db),
            opt_db(r.offset_db()),
        ])?;
    }
    finish(out)
}

pub fn write_reflection_table<W: Write>(w: W, rows: &[ReflectionRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "position",
        "incident_angle_deg",
        "d_los_m",
        "d_total_m",
        "los_power_dbm",
        "reflected_power_dbm",
        "measured_gamma",
        "theoretical_gamma",
    ])?;
    for r in rows {
        out.write_record([
            r.position.clone(),
            fmt_sig(r.incident_angle_deg),
            fmt_sig(r.d_los_m),
            fmt_sig(r.d_total_m),
            opt_db(r.los_power_dbm),
            opt_db(r.reflected_power_dbm),
            opt_sig(r.measured),
            fmt_sig(r.theoretical),
        ])?;
    }
    finish(out)
}

/// `(angle, |Γ_parallel|, |Γ_perpendicular|)` rows.
pub fn write_reflection_curve<W: Write>(w: W, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["incident_angle_deg", "gamma_parallel", "gamma_perpendicular"])?;
    for (theta, par, perp) in rows {
        out.write_record([fmt_sig(*theta), fmt_sig(*par), fmt_sig(*perp)])?;
    }
    finish(out)
}

pub fn write_penetration_table<W: Write>(
    w: W,
    published: &[PenetrationRow],
    simulated: &[SimulatedPenetrationRow],
) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "source",
        "material",
        "thickness_cm",
        "incident_angle_deg",
        "pl_without_db",
        "pl_with_db",
        "penetration_loss_db",
        "printed_loss_db",
        "attenuation_db_per_cm",
        "printed_attenuation_db_per_cm",
        "consistent",
    ])?;
    for r in published {
        out.write_record([
            "published".to_string(),
            r.material.clone(),
            fmt_sig(r.thickness_cm),
            fmt_sig(0.0),
            fmt_db(r.pl_without_db),
            fmt_db(r.pl_with_db),
            fmt_db(r.computed_loss_db),
            fmt_db(r.printed_loss_db),
            fmt_db(r.attenuation_db_per_cm),
            fmt_db(r.printed_attenuation_db_per_cm),
            r.is_consistent().to_string(),
        ])?;
    }
    for r in simulated {
        out.write_record([
            format!("simulated:{}", r.position),
            r.material.clone(),
            fmt_sig(r.thickness_cm),
            fmt_sig(r.incident_angle_deg),
            opt_db(r.pl_without_db),
            opt_db(r.pl_with_db),
            opt_db(r.loss_db),
            String::new(),
            opt_db(r.attenuation_db_per_cm),
            String::new(),
            String::new(),
        ])?;
    }
    finish(out)
}
