//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mmsounder::campaign::analysis::{fspl_comparison, published_penetration_table};
use mmsounder::campaign::{coverage_maps, detect_cell, run_campaign, CountMap, Detector, PowerMap};
use mmsounder::geometry::trace_los;
use mmsounder::propagation::{
    db_to_power, fspl_db, reflection_coefficient, reflection_coefficient_impedance_form, Polarization, SPEED_OF_LIGHT,
};
use mmsounder::scenarios::{builtin, Scenario, INDOOR, INDOOR_TO_OUTDOOR, OUTDOOR};
use mmsounder::sounder::{generate_zc, rrc_taps, ChannelTap, Sounder, SounderConfig};

type Outcome = (bool, String);

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["mmsounder".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = mmsounder::cli::run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn csv_field(text: &str, row_start: &str, column: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == column).unwrap();
    let row = lines.find(|l| l.starts_with(row_start)).unwrap();
    row.split(',').nth(col).unwrap().to_string()
}

// Penetration table.
fn penetration_table() -> Outcome {
    let (code, out, _) = cli(&["penetrate", "--material", "concrete"]);
    let loss = csv_field(&out, "concrete", "penetration_loss_db");
    let atten = csv_field(&out, "concrete", "attenuation_db_per_cm");
    let computed = cli(&[
        "penetrate",
        "--material",
        "concrete",
        "--pl-without",
        "50.90",
        "--pl-with",
        "119.76",
    ])
    .1;
    let c_loss: f64 = csv_field(&computed, "concrete", "penetration_loss_db").parse().unwrap();
    let c_atten: f64 = csv_field(&computed, "concrete", "attenuation_db_per_cm")
        .parse()
        .unwrap();

    let (_, full, _) = cli(&["penetrate"]);
    let glass_atten = csv_field(&full, "glass", "attenuation_db_per_cm");
    let glass_note = csv_field(&full, "glass", "note");
    let glass = published_penetration_table()
        .into_iter()
        .find(|r| r.material == "glass")
        .unwrap();

    let ok = code == 0
        && loss == "68.86"
        && atten == "1.15"
        && (c_loss - 68.86).abs() <= 0.005
        && (c_atten - 1.15).abs() <= 0.005
        && glass_atten == "4.73"
        && (glass.attenuation_db_per_cm - 4.731).abs() < 1e-12
        && !glass.is_consistent()
        && glass_note.contains("44.31")
        && glass_note.contains("47.31");
    (
        ok,
        format!("concrete {loss} dB / {atten} dB/cm; glass {glass_atten} dB/cm; glass note: \"{glass_note}\""),
    )
}

// Free-space path loss.
fn fspl_curve() -> Outcome {
    let printed = [(5.0, 41.36), (10.0, 47.38), (15.0, 50.90)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, want) in printed {
        let got = fspl_db(d, 28e9, 17.0, 17.0).unwrap();
        let oracle = 20.0 * (4.0 * PI * d * 28e9 / SPEED_OF_LIGHT).log10() - 34.0;
        ok &= (got - oracle).abs() < 1e-9 && (got - want).abs() <= 0.015;
        parts.push(format!("{d} m {got:.4} (printed {want})"));
    }

    let indoor = builtin(INDOOR).unwrap();
    let outdoor = builtin(OUTDOOR).unwrap();
    let offsets = |s: &Scenario| -> Vec<Option<f64>> {
        fspl_comparison(std::slice::from_ref(s), s.seed)
            .unwrap()
            .iter()
            .map(|r| r.offset_db())
            .collect()
    };
    let (oi, oo) = (offsets(&indoor), offsets(&outdoor));
    ok &= oi.iter().all(|o| o.is_some_and(|v| v.abs() <= 1.0));
    ok &= oo.iter().all(|o| o.is_some_and(|v| (2.0..=3.0).contains(&v)));
    let show = |v: &[Option<f64>]| {
        v.iter()
            .map(|o| o.map_or("missing".into(), |x| format!("{x:+.2}")))
            .collect::<Vec<_>>()
            .join("/")
    };
    (
        ok,
        format!(
            "theory {}; indoor offsets {} dB; outdoor offsets {} dB",
            parts.join(", "),
            show(&oi),
            show(&oo)
        ),
    )
}

// Reflection coefficient curve.
fn reflection_curve() -> Outcome {
    let g = |t: f64| reflection_coefficient(t, 3.0, Polarization::Parallel).unwrap();
    let points = [g(0.0), g(28.77), g(60.0), g(90.0)];
    let mut ok = (points[0] - 0.2679).abs() <= 5e-5
        && (points[1] - 0.225).abs() <= 5e-4
        && points[2].abs() <= 1e-9
        && (points[3] - 1.0).abs() <= 1e-12;
    let mut worst: f64 = 0.0;
    for deg in 0..=90 {
        for pol in [Polarization::Parallel, Polarization::Perpendicular] {
            let a = reflection_coefficient(deg as f64, 3.0, pol).unwrap();
            let b = reflection_coefficient_impedance_form(deg as f64, 3.0, pol).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    ok &= worst <= 1e-10;
    (
        ok,
        format!(
            "|G|(0, 28.77, 60, 90) = {:.4}, {:.4}, {:.1e}, {}; max form difference {worst:.1e}",
            points[0], points[1], points[2], points[3]
        ),
    )
}

// Minimum spacing between random taps, in delay bins. Off-grid taps closer
// than about 5 bins interfere through the pulse sidelobes enough to break
// the 1 dB power tolerance for a tap 25 dB below its neighbour.
const MIN_TAP_SEPARATION_BINS: f64 = 6.0;

// Sounder round trip.
fn sounder_round_trip() -> Outcome {
    let cfg = SounderConfig::default().noiseless();
    let bin = cfg.delay_bin_s();
    let floor = cfg.pdp_noise_floor_dbm();
    let sounder = Sounder::new(cfg).unwrap();
    // The window gets the 1 dB power tolerance on top of the 25 dB spread.
    let detector = Detector {
        threshold_rel_db: 26.0,
        ..Detector::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_delay, mut worst_power, mut missed, mut taps_total) = (0.0f64, 0.0f64, 0, 0);

    for _ in 0..200 {
        let n = rng.random_range(1..=8usize);
        let mut delays: Vec<f64> = Vec::new();
        while delays.len() < n {
            let d = rng.random_range(0.0..200e-9);
            if delays.iter().all(|x| (x - d).abs() >= MIN_TAP_SEPARATION_BINS * bin) {
                delays.push(d);
            }
        }
        let peak = -40.0;
        let taps: Vec<(f64, f64)> = delays
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                (
                    d,
                    if i == 0 {
                        peak
                    } else {
                        peak - rng.random_range(0.0..=25.0)
                    },
                )
            })
            .collect();
        let channel: Vec<ChannelTap> = taps
            .iter()
            .map(|&(d, p)| {
                ChannelTap::new(
                    d,
                    Complex64::from_polar(db_to_power(p).sqrt(), rng.random_range(0.0..2.0 * PI)),
                )
            })
            .collect();
        let pdp = sounder.sound(&channel, &mut rng).unwrap();
        let found = detect_cell(&pdp, &detector, floor, 0.0, 0.0);
        for &(d, p) in &taps {
            taps_total += 1;
            match found
                .iter()
                .min_by(|a, b| (a.delay_s - d).abs().total_cmp(&(b.delay_s - d).abs()))
            {
                Some(m) if (m.delay_s - d).abs() <= 0.326e-9 => {
                    worst_delay = worst_delay.max((m.delay_s - d).abs());
                    worst_power = worst_power.max((m.power_dbm - p).abs());
                }
                _ => missed += 1,
            }
        }
    }

    // Equal taps one bin apart, on the delay grid, random phases.
    let mut unresolved = 0;
    for _ in 0..200 {
        let k = rng.random_range(0..300) as f64;
        let taps = [k, k + 1.0]
            .map(|b| ChannelTap::new(b * bin, Complex64::from_polar(0.01, rng.random_range(0.0..2.0 * PI))));
        let pdp = sounder.sound(&taps, &mut rng).unwrap();
        let found = detect_cell(&pdp, &Detector::default(), floor, 0.0, 0.0);
        let hit = |b: f64| found.iter().any(|m| (m.delay_s - b * bin).abs() <= 0.326e-9);
        if !(hit(k) && hit(k + 1.0)) {
            unresolved += 1;
        }
    }

    let ok = missed == 0 && worst_delay <= 0.326e-9 && worst_power <= 1.0 && unresolved == 0;
    (
        ok,
        format!(
            "{taps_total} taps in 200 channels: {missed} missed, worst delay error {:.3} ns, worst power error {worst_power:.2} dB; \
             adjacent equal pairs unresolved {unresolved}/200",
            worst_delay * 1e9
        ),
    )
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ZC and RRC.
fn waveform_properties() -> Outcome {
    let len = 2048usize;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut roots = Vec::new();
    while roots.len() < 20 {
        let r = rng.random_range(1..len as u64);
        if gcd(r, len as u64) == 1 && !roots.contains(&r) {
            roots.push(r);
        }
    }
    let (mut worst_mod, mut worst_corr) = (0.0f64, 0.0f64);
    for &r in &roots {
        let z = generate_zc(len, r).unwrap();
        worst_mod = z.iter().fold(worst_mod, |w, s| w.max((s.norm() - 1.0).abs()));
        for lag in 1..len {
            let c: Complex64 = (0..len).map(|n| z[(n + lag) % len] * z[n].conj()).sum();
            worst_corr = worst_corr.max(c.norm() / len as f64);
        }
    }

    let cfg = SounderConfig::default();
    let h = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span_symbols, cfg.oversample).unwrap();
    let mut rc = vec![0.0; 2 * h.len() - 1];
    for (i, a) in h.iter().enumerate() {
        for (j, b) in h.iter().enumerate() {
            rc[i + j] += a * b;
        }
    }
    let centre = h.len() - 1;
    let sps = cfg.oversample;
    let leakage = (1..=centre / sps)
        .flat_map(|k| [rc[centre - k * sps], rc[centre + k * sps]])
        .fold(0.0f64, |w, v| w.max(v.abs()))
        / rc[centre].abs();

    let ok = worst_mod <= 1e-12 && worst_corr <= 1e-9 && leakage <= 1e-3;
    (
        ok,
        format!(
            "20 roots: max |z|-1 {worst_mod:.1e}, max sidelobe {worst_corr:.1e}; RRC*RRC zero-crossing leakage {leakage:.1e}"
        ),
    )
}

fn maps(s: &Scenario) -> Vec<(PowerMap, CountMap)> {
    s.positions
        .iter()
        .map(|p| coverage_maps(&run_campaign(s, p, s.seed).unwrap(), &s.detector).unwrap())
        .collect()
}

// Campaign claims.
fn campaign_claims() -> Outcome {
    let i2o = builtin(INDOOR_TO_OUTDOOR).unwrap();
    let indoor = builtin(INDOOR).unwrap();
    let outdoor = builtin(OUTDOOR).unwrap();
    let blocked = maps(&i2o);
    let (mi, mo) = (maps(&indoor), maps(&outdoor));

    // (a) strongest blocked cell against the same position without walls.
    let (best, peak) = blocked
        .iter()
        .enumerate()
        .filter_map(|(k, (p, _))| p.peak().map(|v| (k, v.2)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let open = i2o.without_walls();
    let open_set = run_campaign(&open, &open.positions[best], open.seed).unwrap();
    let open_peak = coverage_maps(&open_set, &open.detector).unwrap().0.peak().unwrap().2;
    let pl = i2o.link.tx_power_dbm - peak;
    let gap = open_peak - peak;
    let a = pl >= 90.0 && (gap - 50.0).abs() <= 3.0;

    // (b) indoor totals grow with distance.
    let totals: Vec<usize> = mi.iter().map(|m| m.1.total()).collect();
    let b = totals.windows(2).all(|w| w[0] < w[1]);

    // (c) outdoor maps are more uniform than indoor at every distance.
    let vi: Vec<f64> = mi.iter().map(|m| m.1.variance()).collect();
    let vo: Vec<f64> = mo.iter().map(|m| m.1.variance()).collect();
    let c = vi.iter().zip(&vo).all(|(i, o)| o < i);

    // (d) detections only near the cells aligned with the blocked direct path.
    let mut stray = 0;
    let mut nonzero = 0;
    for (p, (_, counts)) in i2o.positions.iter().zip(&blocked) {
        let los = trace_los(&i2o.scene, &p.tx, &p.rx).unwrap();
        let tx_near = i2o.scan.nearest_indices(los.departure_azimuth_deg() - p.tx.heading_deg);
        let rx_near = i2o.scan.nearest_indices(los.arrival_azimuth_deg() - p.rx.heading_deg);
        let close = |near: &[usize], i: usize| near.iter().any(|&n| n.abs_diff(i) <= 1);
        let nr = counts.rx_az_deg.len();
        for (k, &c) in counts.cells.iter().enumerate() {
            if c > 0 {
                nonzero += 1;
                if !(close(&tx_near, k / nr) && close(&rx_near, k % nr)) {
                    stray += 1;
                }
            }
        }
    }
    let d = stray == 0 && nonzero > 0;

    let flag = |x: bool| if x { "ok" } else { "FAIL" };
    (
        a && b && c && d,
        format!(
            "(a) {} PL {pl:.1} dB, {gap:.1} dB below unblocked at {}; (b) {} indoor totals {totals:?}; \
             (c) {} variance outdoor {vo:.3?} vs indoor {vi:.3?}; (d) {} {stray} of {nonzero} i2o cells off alignment",
            flag(a),
            i2o.positions[best].name,
            flag(b),
            flag(c),
            flag(d)
        ),
    )
}

fn bundle_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

// Determinism.
fn report_determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_mmsounder"))
            .args(["report", "--seed", "11", "--out-dir", "bundle"])
            .current_dir(d.path())
            .env_remove("MMSOUNDER_OUT_DIR")
            .output()
            .unwrap();
        if !status.status.success() {
            return (
                false,
                format!("report failed: {}", String::from_utf8_lossy(&status.stderr)),
            );
        }
    }
    let (a, b) = (
        bundle_files(&dirs[0].path().join("bundle")),
        bundle_files(&dirs[1].path().join("bundle")),
    );
    let bytes: usize = a.iter().map(|f| f.1.len()).sum();
    (
        a == b && !a.is_empty(),
        format!("{} files, {bytes} bytes, identical: {}", a.len(), a == b),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("penetration table", penetration_table),
        ("free-space path loss", fspl_curve),
        ("reflection coefficient curve", reflection_curve),
        ("sounder round trip", sounder_round_trip),
        ("ZC and RRC properties", waveform_properties),
        ("campaign claims", campaign_claims),
        ("report determinism", report_determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| (false, "panicked".into()));
        failed += usize::from(!ok);
        println!(
            "{} criterion {} {name}: {detail} [{:.2} s]",
            if ok { "PASS" } else { "FAIL" },
            n + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
