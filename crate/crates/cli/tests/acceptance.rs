//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path as FsPath;
use std::time::Instant;

use num_complex::Complex;
use omnipl::angle::uniform_circle;
use omnipl::scenario::{presets, PathConfig, PatternConfig};
use omnipl::*;
use omnipl_cli::{run, ConfigSource, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Beam of the 240-step, 0.15 m array of 40° Gaussian elements at 29 GHz,
/// 0.05° scan. Cross-checked against an independent NumPy scan.
const GOLDEN_HPBW_DEG: f64 = 2.670955328;
const GOLDEN_SIDELOBE_DB: f64 = -34.981376269;
const GOLDEN_ARRAY_GAIN: f64 = 40.137227211;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn analyse(cfg: &ScenarioConfig) -> Analysis<f64> {
    Scenario::<f64>::from_config(cfg).unwrap().run().unwrap()
}

fn noiseless(mut cfg: ScenarioConfig) -> ScenarioConfig {
    cfg.noise.enabled = false;
    cfg
}

fn gaussian_power(offset_deg: f64) -> f64 {
    let d = (offset_deg + 180.0).rem_euclid(360.0) - 180.0;
    (-4.0 * std::f64::consts::LN_2 * (d / 40.0).powi(2)).exp()
}

fn calibration_config(element: PatternConfig, az: f64, bin: usize) -> ScenarioConfig {
    let mut cfg = presets::base("calibration");
    cfg.element_pattern = element;
    cfg.rx_gain_dbi = 0.0;
    cfg.paths = vec![PathConfig {
        azimuth_deg: az,
        delay_ns: None,
        delay_bin: Some(bin),
        power_db: -84.6,
        phase_deg: 33.0,
    }];
    cfg
}

fn criterion_1() -> Outcome {
    let unit_horn = || PatternConfig::Gaussian { hpbw_deg: 40.0, gain_dbi: 0.0 };
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for (az, bin) in [(0.0, 93), (37.5, 200), (-121.5, 611), (178.5, 20)] {
        let cfg = calibration_config(unit_horn(), az, bin);
        let t = Instant::now();
        let a = analyse(&cfg);
        slowest = slowest.max(t.elapsed().as_secs_f64());
        let d = a.pathloss_db(Method::ProposedVaa) - a.pathloss_db(Method::GroundTruth);
        worst = worst.max(d.abs());
    }
    // isotropic elements: normalization at the true cell
    let cfg = calibration_config(PatternConfig::Isotropic, 0.0, 93);
    let s = Scenario::<f64>::from_config(&cfg).unwrap();
    let (vaa, _) = s.simulate().unwrap();
    let padp = compute_padp(&beamform_spectrum(&vaa, &s.beamform).unwrap(), &TransformConfig::default()).unwrap();
    let gain = array_gain(&s.geometry, &s.element, 29e9, 0.0, 90.0);
    let iso = (-10.0 * (padp.power()[[93, 120]] / (gain * gain)).log10() - 84.6).abs();
    outcome(
        worst <= 1e-6 && slowest < 5.0 && iso <= 1e-6,
        format!(
            "max |PL_vaa - PL_true| = {worst:.3e} dB over 4 placements (limit 1e-6), isotropic true-cell {iso:.3e} dB, slowest run {slowest:.2} s (limit 5 s)"
        ),
    )
}

fn criterion_2() -> Outcome {
    let geom = UcaGeometry::new(240, 0.15).unwrap();
    let elem = AntennaPattern::gaussian(40.0, 0.0).unwrap();
    let s = scan_beam_shape(&geom, &elem, 29e9, 0.0, 90.0, 0.05);
    let golden = (s.hpbw_deg - GOLDEN_HPBW_DEG).abs() < 1e-6
        && (s.first_sidelobe_db - GOLDEN_SIDELOBE_DB).abs() < 1e-6
        && (s.peak_gain - GOLDEN_ARRAY_GAIN).abs() < 1e-6;
    outcome(
        s.hpbw_deg < 40.0 && s.first_sidelobe_db <= -10.0 && golden,
        format!(
            "array HPBW {:.4} deg (< 40), first side-lobe {:.3} dB (<= -10), gain {:.4}; goldens {}",
            s.hpbw_deg,
            s.first_sidelobe_db,
            s.peak_gain,
            if golden { "match" } else { "DIFFER" }
        ),
    )
}

fn multi_angle_scenes() -> Vec<ScenarioConfig> {
    let mut scenes: Vec<ScenarioConfig> = presets::NAMES.iter().map(|n| noiseless(presets::by_name(n).unwrap())).collect();
    scenes.extend((0..10).map(presets::random_corridor));
    scenes
}

fn criterion_3() -> Outcome {
    let scenes = multi_angle_scenes();
    let mut violations = Vec::new();
    for cfg in &scenes {
        let a = analyse(cfg);
        let (r1, p) = (a.pathloss_db(Method::Ref1SumAll), a.pathloss_db(Method::ProposedVaa));
        if r1 > p {
            violations.push(format!("{}: {r1:.3} > {p:.3}", cfg.scenario_id));
        }
    }
    let single = analyse(&presets::single_path());
    let gap = single.pathloss_db(Method::ProposedVaa) - single.pathloss_db(Method::Ref1SumAll);
    let az = presets::single_path().paths[0].azimuth_deg;
    let overcount = 10.0 * uniform_circle(0.0, 240).iter().map(|&t| gaussian_power(az - t)).sum::<f64>().log10();
    let ok = violations.is_empty() && (gap - overcount).abs() <= 0.2;
    outcome(
        ok,
        format!(
            "PL_ref1 <= PL_proposed on {} scenes ({} violations{}); single-path gap {gap:.3} dB vs brute-force overcount {overcount:.3} dB",
            scenes.len(),
            violations.len(),
            if violations.is_empty() { String::new() } else { format!(": {}", violations.join("; ")) }
        ),
    )
}

fn criterion_4() -> Outcome {
    let a = analyse(&presets::co_delay_pair());
    let truth = a.pathloss_db(Method::GroundTruth);
    let r2 = a.pathloss_db(Method::Ref2DelayMax) - truth;
    let p = a.pathloss_db(Method::ProposedVaa) - truth;
    outcome(
        (r2 - 3.01).abs() <= 0.05 && p.abs() <= 0.1,
        format!("PL_ref2 - truth = {r2:.4} dB (3.01 +/- 0.05), PL_proposed - truth = {p:.4} dB (|.| <= 0.1)"),
    )
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    let mut margin = f64::INFINITY;
    let seeds: Vec<u64> = (0..12).collect();
    for &seed in &seeds {
        let cfg = presets::random_corridor(seed);
        let a = analyse(&cfg);
        let (r1, p, r2) = (
            a.pathloss_db(Method::Ref1SumAll),
            a.pathloss_db(Method::ProposedVaa),
            a.pathloss_db(Method::Ref2DelayMax),
        );
        margin = margin.min(p - r1).min(r2 - p);
        if !(r1 <= p && p <= r2) {
            bad.push(format!("seed {seed}: {r1:.3} / {p:.3} / {r2:.3}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "PL_ref1 <= PL_proposed <= PL_ref2 on {}/{} corridor scenes, smallest margin {margin:.3} dB{}",
            seeds.len() - bad.len(),
            seeds.len(),
            if bad.is_empty() { String::new() } else { format!("; failures: {}", bad.join("; ")) }
        ),
    )
}

/// Noiseless on-grid scene on the 240 × 1001 grid with unit antenna gains.
fn recovery_scene(paths: Vec<(f64, usize, Complex<f64>)>) -> (ScenarioConfig, Vec<(usize, usize)>) {
    let mut cfg = presets::base("recovery");
    cfg.element_pattern = PatternConfig::Gaussian { hpbw_deg: 40.0, gain_dbi: 0.0 };
    cfg.rx_gain_dbi = 0.0;
    let mut cells = Vec::new();
    cfg.paths = paths
        .into_iter()
        .map(|(az, bin, a)| {
            let j = ((az + 180.0) / 1.5).round() as usize % 240;
            cells.push((bin, j));
            PathConfig {
                azimuth_deg: az,
                delay_ns: None,
                delay_bin: Some(bin),
                power_db: 20.0 * a.norm().log10(),
                phase_deg: a.arg().to_degrees(),
            }
        })
        .collect();
    cells.sort();
    (cfg, cells)
}

/// Worst relative power error of the detected paths, or a description of
/// the detection mismatch.
fn recover(paths: Vec<(f64, usize, Complex<f64>)>) -> Result<f64, String> {
    let (cfg, want_cells) = recovery_scene(paths);
    let scenario = Scenario::<f64>::from_config(&cfg).unwrap();
    let (vaa, _) = scenario.simulate().unwrap();
    let q = beamform_spectrum(&vaa, &scenario.beamform).unwrap();
    let padp = compute_padp(&q, &TransformConfig::default()).unwrap();
    let det = detect_paths(&padp, &scenario.peaks).unwrap();
    let mut got: Vec<(usize, usize)> = det.iter().map(|p| p.cell.unwrap()).collect();
    got.sort();
    if got != want_cells {
        return Err(format!("cells {got:?} != {want_cells:?}"));
    }
    let truth = scenario.truth.as_ref().unwrap();
    let geom = &scenario.geometry;
    let mut worst: f64 = 0.0;
    for p in det.iter() {
        let cell = p.cell.unwrap();
        let k = truth
            .iter()
            .position(|t| {
                (((t.delay_s / padp.delay_step_s()).round() as usize), ((t.azimuth_deg + 180.0) / 1.5).round() as usize % 240)
                    == cell
            })
            .unwrap();
        let t = &truth.paths()[k];
        let gain = array_gain(geom, &scenario.element, 29e9, t.azimuth_deg, 90.0);
        let want = t.power() * gain * gain;
        worst = worst.max((p.power() / want - 1.0).abs());
    }
    Ok(worst)
}

fn random_amplitude(rng: &mut ChaCha8Rng) -> Complex<f64> {
    Complex::from_polar(10f64.powf(-rng.random_range(40.0..50.0) / 20.0), rng.random_range(0.0..std::f64::consts::TAU))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // family A: distinct delay bins, more than 2 bins apart
    let mut worst_a: f64 = 0.0;
    let mut errors = Vec::new();
    for trial in 0..12 {
        let k = 1 + trial % 5;
        let mut bins: Vec<usize> = Vec::new();
        while bins.len() < k {
            let b = rng.random_range(20..900usize);
            if bins.iter().all(|&x| x.abs_diff(b) > 2) {
                bins.push(b);
            }
        }
        let paths = bins
            .into_iter()
            .map(|b| (-180.0 + 1.5 * rng.random_range(0..240) as f64, b, random_amplitude(&mut rng)))
            .collect();
        match recover(paths) {
            Ok(e) => worst_a = worst_a.max(e),
            Err(e) => errors.push(format!("delay-separated trial {trial}: {e}")),
        }
    }
    // family B: one shared delay bin, angles more than 2x the array HPBW apart
    let mut worst_b: f64 = 0.0;
    for trial in 0..8 {
        let k = 2 + trial % 4;
        let mut angles: Vec<i32> = Vec::new();
        while angles.len() < k {
            let j = rng.random_range(0..240i32);
            let sep = |a: i32| {
                let d = (a - j).rem_euclid(240);
                d.min(240 - d)
            };
            if angles.iter().all(|&a| sep(a) as f64 * 1.5 > 2.0 * GOLDEN_HPBW_DEG) {
                angles.push(j);
            }
        }
        let bin = rng.random_range(20..900usize);
        let paths = angles
            .into_iter()
            .map(|j| (-180.0 + 1.5 * j as f64, bin, random_amplitude(&mut rng)))
            .collect();
        match recover(paths) {
            Ok(e) => worst_b = worst_b.max(e),
            Err(e) => errors.push(format!("co-delay trial {trial}: {e}")),
        }
    }
    let ok = errors.is_empty() && worst_a <= 1e-6 && worst_b <= 1e-6;
    outcome(
        ok,
        format!(
            "cells exact in {}/20 scenes; worst relative power error: delay-separated {worst_a:.2e}, co-delay angle-separated {worst_b:.2e} (limit 1e-6){}",
            20 - errors.len(),
            if errors.is_empty() { String::new() } else { format!("; {}", errors.join("; ")) }
        ),
    )
}

fn criterion_7() -> Outcome {
    let grid = FrequencyGrid::new(28e9, 30e9, 1001).unwrap();
    let geom = UcaGeometry::new(240, 0.15).unwrap();
    let elem = AntennaPattern::gaussian(40.0, 0.0).unwrap();
    let a = PathSet::new(vec![
        Path::new(12.0, 2f64.powi(-27), Complex::new(0.3, 0.1)),
        Path::new(-100.5, 2f64.powi(-25), Complex::new(-0.05, 0.2)),
    ]);
    let b = PathSet::new(vec![Path::new(170.0, 3.0 * 2f64.powi(-28), Complex::new(0.1, -0.1))]);

    let ha = synth_vaa_cfr(&a, &geom, &elem, &grid).unwrap();
    let hb = synth_vaa_cfr(&b, &geom, &elem, &grid).unwrap();
    let hab = synth_vaa_cfr(&a.union(&b), &geom, &elem, &grid).unwrap();
    let scale = hab.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let linearity = hab
        .data()
        .iter()
        .zip(ha.data().iter().zip(hb.data()))
        .map(|(j, (x, y))| (j - (x + y)).norm())
        .fold(0.0, f64::max)
        / scale;

    let shift = 2f64.powi(-30);
    let moved: PathSet64 = a.iter().map(|p| Path { delay_s: p.delay_s + shift, ..p.clone() }).collect();
    let hs = synth_vaa_cfr(&moved, &geom, &elem, &grid).unwrap();
    let freqs = grid.freqs();
    let mut shift_err: f64 = 0.0;
    for ((p, n), z) in hs.data().indexed_iter() {
        let want = ha.data()[[p, n]]
            * Complex::from_polar(1.0, -std::f64::consts::TAU * omnipl::scalar::frac_product(freqs[n], shift));
        shift_err = shift_err.max((z - want).norm());
    }
    shift_err /= ha.data().iter().map(|z| z.norm()).fold(0.0, f64::max);

    let q = beamform_spectrum(&hab, &BeamformConfig::for_geometry(&geom)).unwrap();
    let padp = compute_padp(&q, &TransformConfig::default()).unwrap();
    let mut parseval: f64 = 0.0;
    for j in 0..240 {
        let time: f64 = padp.column(j).iter().sum::<f64>() * 1001.0;
        let freq: f64 = q.data().column(j).iter().map(|z| z.norm_sqr()).sum();
        parseval = parseval.max((time / freq - 1.0).abs());
    }
    let friis: f64 = free_space_pathloss_db(14.0, 29e9).unwrap();
    outcome(
        parseval <= 1e-9 && linearity <= 1e-12 && shift_err <= 1e-12 && (friis - 84.61).abs() <= 0.01,
        format!(
            "Parseval {parseval:.2e} (1e-9), linearity {linearity:.2e} (1e-12), delay shift {shift_err:.2e} (1e-12), Friis(14 m, 29 GHz) {friis:.4} dB (84.61 +/- 0.01)"
        ),
    )
}

fn csv_files(dir: &FsPath) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let run_with = |name: &str, threads: usize| {
        let mut opts = RunOptions::new(ConfigSource::Preset("nlos_17_4m".into()), tmp.path().join(name));
        opts.threads = Some(threads);
        opts.seed = Some(7);
        run(&opts).unwrap();
        csv_files(&tmp.path().join(name))
    };
    let first = run_with("a", 1);
    let second = run_with("b", 1);
    let parallel = run_with("c", 4);
    let same_runs = first == second;
    let same_threads = first == parallel;
    outcome(
        same_runs && same_threads && first.len() == 6,
        format!(
            "{} CSV files; repeat run {}, 1 vs 4 threads {}",
            first.len(),
            if same_runs { "bit-identical" } else { "DIFFERS" },
            if same_threads { "bit-identical" } else { "DIFFERS" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("single-path calibration", criterion_1),
        ("array resolution", criterion_2),
        ("ref1 underestimation", criterion_3),
        ("ref2 co-delay overestimation", criterion_4),
        ("ordering on corridor scenes", criterion_5),
        ("path recovery", criterion_6),
        ("transform identities", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {} ({:.1} s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
