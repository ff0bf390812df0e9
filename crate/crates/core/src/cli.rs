//! The `mmsounder` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration or scene-file
//! error, 3 simulation error. Failures print one diagnostic line on the
//! error stream.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::campaign::analysis::published_penetration_table;
use crate::campaign::{detect_cell, sound_link};
use crate::error::Error;
use crate::io::csv::{fmt_db, fmt_sig, write_pdp, BELOW_FLOOR};
use crate::io::report::{config_hash, write_campaign, write_report, BundleWriter};
use crate::io::scene_file::parse_scenario;
use crate::propagation::{
    attenuation_factor, fspl_db, measured_reflection_coefficient, penetration_loss_from_path_loss_db,
    reflection_coefficient, Polarization,
};
use crate::scenarios::{self, Scenario};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "MMSOUNDER_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "mmsounder-out";

#[derive(Debug, Parser)]
#[command(name = "mmsounder", version, about = "28 GHz channel-sounding campaign simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Free-space path loss over a list of distances.
    Fspl {
        #[arg(long, default_value_t = 28e9)]
        freq: f64,
        /// Comma-separated distances, metres.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        distances: Vec<f64>,
        /// Tx and Rx antenna gains, dBi.
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 1,
            default_value = "0,0",
            allow_negative_numbers = true
        )]
        gains: Vec<f64>,
    },
    /// Fresnel reflection coefficients, and optionally a measured one.
    Reflect {
        #[arg(long, default_value_t = 3.0)]
        eps: f64,
        /// Comma-separated incidence angles, degrees. Defaults to 0..90.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        angles: Vec<f64>,
        /// parallel or perpendicular; both when omitted.
        #[arg(long)]
        pol: Option<Polarization>,
        #[arg(long, requires_all = ["d_total", "pr_refl", "pr_los"])]
        d_los: Option<f64>,
        #[arg(long, requires = "d_los")]
        d_total: Option<f64>,
        #[arg(long, requires = "d_los", allow_negative_numbers = true)]
        pr_refl: Option<f64>,
        #[arg(long, requires = "d_los", allow_negative_numbers = true)]
        pr_los: Option<f64>,
    },
    /// Penetration loss and attenuation factor. Without arguments prints
    /// the published penetration table.
    Penetrate {
        /// Material name; alone, selects its row of the published table.
        #[arg(long)]
        material: Option<String>,
        #[arg(long, requires_all = ["material", "pl_with"])]
        pl_without: Option<f64>,
        #[arg(long, requires_all = ["material", "pl_without"])]
        pl_with: Option<f64>,
        /// Slab thickness; defaults to 60 for concrete and 10 for glass.
        #[arg(long)]
        thickness_cm: Option<f64>,
    },
    /// Sounds one gimbal pair of a position and prints the detected MPCs.
    Sound {
        /// Built-in scenario name or scene file path.
        #[arg(long)]
        scene: String,
        #[arg(long)]
        position: String,
        /// Gimbal azimuths relative to the node headings, degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tx_az: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        rx_az: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the PDP as CSV to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full angular campaign: coverage maps and MPC lists.
    Campaign {
        #[arg(long)]
        scene: String,
        #[arg(long)]
        position: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regenerates every comparison artifact from the built-in scenarios.
    Report {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(String),
    Simulation(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Config(_) => 2,
            Failure::Simulation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Config(m) | Failure::Simulation(m) => m,
        }
    }
}

fn config(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn sim(e: Error) -> Failure {
    Failure::Simulation(e.to_string())
}

fn out_io(e: std::io::Error) -> Failure {
    Failure::Simulation(format!("write error: {e}"))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(err, "mmsounder: {}", line.trim_start_matches("error: "));
            return 1;
        }
    };
    match execute(cli.command, args, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "mmsounder: {}", f.message().replace('\n', " "));
            f.code()
        }
    }
}

fn command_line(args: &[String]) -> String {
    args.iter()
        .skip(1)
        .fold(String::from("mmsounder"), |acc, a| acc + " " + a)
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Loads a built-in scenario by name or a scene file by path, returning the
/// scenario and its source text.
fn load_scene(arg: &str) -> Result<(Scenario, String), Failure> {
    if let Ok(src) = scenarios::builtin_source(arg) {
        let s = parse_scenario(src, &format!("{arg}.scn")).map_err(config)?;
        return Ok((s, src.to_string()));
    }
    let path = Path::new(arg);
    let src = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read scene file {}: {e}", path.display())))?;
    let s = parse_scenario(&src, &path.display().to_string()).map_err(config)?;
    Ok((s, src))
}

fn execute(command: Command, args: &[String], out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Fspl { freq, distances, gains } => {
            let [g_t, g_r] = gains[..] else {
                return Err(Failure::Usage(format!("--gains takes two values, got {}", gains.len())));
            };
            writeln!(out, "distance_m,fspl_db").map_err(out_io)?;
            for d in distances {
                let pl = fspl_db(d, freq, g_t, g_r).map_err(sim)?;
                writeln!(out, "{},{}", fmt_sig(d), fmt_db(pl)).map_err(out_io)?;
            }
        }
        Command::Reflect {
            eps,
            angles,
            pol,
            d_los,
            d_total,
            pr_refl,
            pr_los,
        } => {
            let angles = if angles.is_empty() {
                (0..=90).map(f64::from).collect()
            } else {
                angles
            };
            let pols = match pol {
                Some(p) => vec![p],
                None => vec![Polarization::Parallel, Polarization::Perpendicular],
            };
            let header: Vec<String> = pols.iter().map(|p| format!("gamma_{p}")).collect();
            writeln!(out, "incident_angle_deg,{}", header.join(",")).map_err(out_io)?;
            for a in angles {
                let mut row = vec![fmt_sig(a)];
                for p in &pols {
                    row.push(fmt_sig(reflection_coefficient(a, eps, *p).map_err(sim)?));
                }
                writeln!(out, "{}", row.join(",")).map_err(out_io)?;
            }
            if let (Some(dl), Some(dt), Some(pr), Some(pl)) = (d_los, d_total, pr_refl, pr_los) {
                let g = measured_reflection_coefficient(dl, dt, pr, pl).map_err(sim)?;
                writeln!(out, "measured_gamma,{}", fmt_sig(g)).map_err(out_io)?;
            }
        }
        Command::Penetrate {
            material,
            pl_without,
            pl_with,
            thickness_cm,
        } => match (material, pl_without.zip(pl_with)) {
            (Some(m), Some((a, b))) => {
                let thickness = match (thickness_cm, m.as_str()) {
                    (Some(t), _) => t,
                    (None, "concrete") => 60.0,
                    (None, "glass") => 10.0,
                    (None, other) => {
                        return Err(Failure::Usage(format!(
                            "--thickness-cm is required for material `{other}`"
                        )))
                    }
                };
                let loss = penetration_loss_from_path_loss_db(a, b);
                let factor = attenuation_factor(loss, thickness).map_err(sim)?;
                writeln!(
                    out,
                    "material,thickness_cm,pl_without_db,pl_with_db,penetration_loss_db,attenuation_db_per_cm"
                )
                .map_err(out_io)?;
                writeln!(
                    out,
                    "{m},{},{},{},{},{}",
                    fmt_sig(thickness),
                    fmt_db(a),
                    fmt_db(b),
                    fmt_db(loss),
                    fmt_db(factor)
                )
                .map_err(out_io)?;
            }
            (material, _) => {
                let rows: Vec<_> = published_penetration_table()
                    .into_iter()
                    .filter(|r| material.as_deref().is_none_or(|m| r.material == m))
                    .collect();
                if rows.is_empty() {
                    return Err(Failure::Usage(format!(
                        "no published row for material `{}`; pass --pl-without and --pl-with",
                        material.unwrap_or_default()
                    )));
                }
                writeln!(
                    out,
                    "material,thickness_cm,pl_without_db,pl_with_db,penetration_loss_db,computed_loss_db,attenuation_db_per_cm,note"
                )
                .map_err(out_io)?;
                for r in rows {
                    let note = if r.is_consistent() {
                        String::new()
                    } else {
                        format!(
                            "printed loss {} differs from {} - {} = {}",
                            fmt_db(r.printed_loss_db),
                            fmt_db(r.pl_with_db),
                            fmt_db(r.pl_without_db),
                            fmt_db(r.computed_loss_db)
                        )
                    };
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        r.material,
                        fmt_sig(r.thickness_cm),
                        fmt_db(r.pl_without_db),
                        fmt_db(r.pl_with_db),
                        fmt_db(r.printed_loss_db),
                        fmt_db(r.computed_loss_db),
                        fmt_db(r.attenuation_db_per_cm),
                        note
                    )
                    .map_err(out_io)?;
                }
            }
        },
        Command::Sound {
            scene,
            position,
            tx_az,
            rx_az,
            seed,
            out: pdp_path,
        } => {
            let (s, _) = load_scene(&scene)?;
            let p = s.position(&position).map_err(config)?.clone();
            let seed = seed.unwrap_or(s.seed);
            let pdp = sound_link(&s, &p, tx_az, rx_az, seed).map_err(sim)?;
            let mpcs = detect_cell(&pdp, &s.detector, s.sounder.pdp_noise_floor_dbm(), tx_az, rx_az);
            crate::io::csv::write_mpcs(&mut *out, &mpcs).map_err(sim)?;
            if let Some(path) = pdp_path {
                let file = std::fs::File::create(&path)
                    .map_err(|e| Failure::Simulation(format!("{}: {e}", path.display())))?;
                write_pdp(std::io::BufWriter::new(file), &pdp).map_err(sim)?;
            }
        }
        Command::Campaign {
            scene,
            position,
            out_dir,
            seed,
        } => {
            let (s, src) = load_scene(&scene)?;
            if let Some(name) = &position {
                s.position(name).map_err(config)?;
            }
            let seed = seed.unwrap_or(s.seed);
            let dir = resolve_out_dir(out_dir);
            let mut bundle = BundleWriter::create(&dir).map_err(sim)?;
            let summary = write_campaign(&mut bundle, &s, position.as_deref(), seed).map_err(sim)?;
            let manifest = bundle
                .finish(&command_line(args), config_hash(&[&src], seed), seed)
                .map_err(sim)?;
            writeln!(out, "position,total_mpcs,peak_dbm").map_err(out_io)?;
            for row in summary {
                let peak = row.peak_dbm.map_or_else(|| BELOW_FLOOR.to_string(), fmt_db);
                writeln!(out, "{},{},{}", row.position, row.total_mpcs, peak).map_err(out_io)?;
            }
            writeln!(out, "wrote {} files to {}", manifest.files.len() + 1, dir.display()).map_err(out_io)?;
        }
        Command::Report { out_dir, seed } => {
            let dir = resolve_out_dir(out_dir);
            let manifest = write_report(&dir, seed, &command_line(args)).map_err(sim)?;
            for f in &manifest.files {
                writeln!(out, "{}", dir.join(f).display()).map_err(out_io)?;
            }
            writeln!(out, "{}", dir.join(crate::io::report::MANIFEST).display()).map_err(out_io)?;
        }
    }
    Ok(())
}
