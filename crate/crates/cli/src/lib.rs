//! Batch runner: scenario in, CSV artifacts and a manifest out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, ensure, Context, Result};
use log::info;
use ndarray::Array2;
use num_complex::Complex;
use omnipl::padp::{detection_threshold, estimate_noise_floor};
use omnipl::{
    presets, Analysis, CfrLayout, CfrMatrix64, FrequencyGrid64, Method, Padp64, PathSet64, Scenario, ScenarioConfig,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
/// Floor for the dB-scaled profile dumps.
pub const PADP_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Synthesize sweeps from the configured paths.
    Simulate,
    /// Load measured sweeps from `--sweeps`.
    Ingest,
}

#[derive(Debug, Clone)]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: ConfigSource,
    pub out_dir: PathBuf,
    pub mode: Mode,
    /// Directory with `vaa/` and `dss/` sweep folders (ingest mode).
    pub sweeps: Option<PathBuf>,
    pub force: bool,
    pub seed: Option<u64>,
    pub zero_pad: Option<usize>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Also write the sweeps used, in ingestible form.
    pub export_sweeps: bool,
}

impl RunOptions {
    pub fn new(config: ConfigSource, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            config,
            out_dir: out_dir.into(),
            mode: Mode::Simulate,
            sweeps: None,
            force: false,
            seed: None,
            zero_pad: None,
            threads: None,
            export_sweeps: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub load_s: f64,
    pub pipeline_s: f64,
    pub write_s: f64,
    pub total_s: f64,
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario_id: String,
    pub tool_version: String,
    pub mode: Mode,
    /// SHA-256 of the effective configuration JSON.
    pub config_sha256: String,
    pub config_source: String,
    pub threads: usize,
    pub config: ScenarioConfig,
    pub derived: BTreeMap<String, f64>,
    pub outputs: Vec<OutputFile>,
    pub timing: Timing,
}

fn load_config(source: &ConfigSource) -> Result<(ScenarioConfig, String)> {
    match source {
        ConfigSource::File(path) => {
            let cfg = ScenarioConfig::load(path).with_context(|| format!("loading config {}", path.display()))?;
            Ok((cfg, path.display().to_string()))
        }
        ConfigSource::Preset(name) => {
            let cfg = presets::by_name(name)
                .ok_or_else(|| anyhow!("unknown preset `{name}` (known: {})", presets::NAMES.join(", ")))?;
            Ok((cfg, format!("preset:{name}")))
        }
    }
}

fn prepare_out_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        ensure!(dir.is_dir(), "{} exists and is not a directory", dir.display());
        let non_empty = fs::read_dir(dir)?.next().is_some();
        if non_empty && !force {
            bail!("output directory {} is not empty; pass --force to overwrite", dir.display());
        }
    } else {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

/// Loads the config, runs the pipeline and writes all artifacts.
pub fn run(opts: &RunOptions) -> Result<RunManifest> {
    match opts.threads {
        Some(n) => {
            ensure!(n > 0, "--threads must be positive");
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| run_inner(opts, n))
        }
        None => run_inner(opts, rayon::current_num_threads()),
    }
}

fn run_inner(opts: &RunOptions, threads: usize) -> Result<RunManifest> {
    let start = Instant::now();
    let (mut cfg, source) = load_config(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.noise.seed = seed;
    }
    if let Some(z) = opts.zero_pad {
        ensure!(z > 0, "--zero-pad must be at least 1");
        cfg.padp.zero_pad = z;
    }
    cfg.validate()?;
    prepare_out_dir(&opts.out_dir, opts.force)?;
    let scenario = Scenario::<f64>::from_config(&cfg)?;
    info!("scenario {} ({} mode)", scenario.id, mode_label(opts.mode));

    let (vaa, dss) = match opts.mode {
        Mode::Simulate => scenario.simulate()?,
        Mode::Ingest => {
            let dir = opts.sweeps.as_ref().ok_or_else(|| anyhow!("ingest mode needs --sweeps <dir>"))?;
            let vaa = ingest_sweeps(&dir.join("vaa"), CfrLayout::Vaa(scenario.geometry.clone()), Some(&scenario.grid))?;
            let dss = ingest_sweeps(
                &dir.join("dss"),
                CfrLayout::Dss {
                    rotation_deg: scenario.rotation_deg.clone(),
                },
                Some(&scenario.grid),
            )?;
            (vaa, dss)
        }
    };
    let load_s = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let analysis = scenario.analyze(vaa, dss)?;
    let pipeline_s = t.elapsed().as_secs_f64();
    info!("pipeline finished in {pipeline_s:.2} s");

    let t = Instant::now();
    let dir = &opts.out_dir;
    let mut written = vec![
        write_summary(&dir.join(SUMMARY_FILE), &analysis)?,
        write_diagnostics(&dir.join(DIAGNOSTICS_FILE), &analysis)?,
        write_paths(&dir.join("paths_vaa.csv"), &analysis.vaa_paths)?,
        write_paths(&dir.join("paths_dss.csv"), &analysis.dss_paths)?,
        write_padp(&dir.join("padp_vaa.csv"), &analysis.vaa_padp)?,
        write_padp(&dir.join("padp_dss.csv"), &analysis.dss_padp)?,
    ];
    if opts.export_sweeps {
        written.extend(export_sweeps(&dir.join("sweeps").join("vaa"), &analysis.vaa_cfr)?);
        written.extend(export_sweeps(&dir.join("sweeps").join("dss"), &analysis.dss_cfr)?);
    }
    let outputs = written
        .iter()
        .map(|p| describe_output(dir, p))
        .collect::<Result<Vec<_>>>()?;
    let write_s = t.elapsed().as_secs_f64();

    let config_json = cfg.to_json_pretty();
    let manifest = RunManifest {
        scenario_id: analysis.scenario_id.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        mode: opts.mode,
        config_sha256: hex::encode(Sha256::digest(config_json.as_bytes())),
        config_source: source,
        threads,
        config: cfg,
        derived: derived_parameters(&scenario, &analysis)?,
        outputs,
        timing: Timing {
            load_s,
            pipeline_s,
            write_s,
            total_s: start.elapsed().as_secs_f64(),
        },
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(manifest)
}

fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::Simulate => "simulate",
        Mode::Ingest => "ingest",
    }
}

fn derived_parameters(scenario: &Scenario<f64>, a: &Analysis<f64>) -> Result<BTreeMap<String, f64>> {
    let mut d = BTreeMap::new();
    d.insert("f_center_hz".into(), a.f_center_hz);
    d.insert("frequency_step_hz".into(), scenario.grid.step());
    d.insert("delay_step_ns".into(), a.vaa_padp.delay_step_s() * 1e9);
    d.insert("unambiguous_delay_ns".into(), scenario.grid.unambiguous_delay_s() * 1e9);
    d.insert("window_half_width_deg".into(), scenario.beamform.window_half_width_deg());
    d.insert("steering_points".into(), scenario.beamform.steering_deg().len() as f64);
    d.insert("rotation_points".into(), scenario.rotation_deg.len() as f64);
    d.insert("tx_gain_boresight_dbi".into(), omnipl::scalar::to_db(scenario.budget.tx_gain.at(0.0)));
    for (tag, padp) in [("vaa", &a.vaa_padp), ("dss", &a.dss_padp)] {
        d.insert(format!("{tag}_noise_floor_db"), omnipl::scalar::to_db(estimate_noise_floor(padp)?));
        d.insert(format!("{tag}_detection_threshold_db"), omnipl::scalar::to_db(detection_threshold(padp, &scenario.peaks)?));
    }
    if let Some(src) = &scenario.budget.array_gain {
        d.insert("array_gain_boresight".into(), src.array_gain(0.0));
    }
    Ok(d)
}

fn describe_output(root: &Path, path: &Path) -> Result<OutputFile> {
    let bytes = fs::read(path).with_context(|| format!("reading back {}", path.display()))?;
    let rel = path.strip_prefix(root).unwrap_or(path);
    Ok(OutputFile {
        path: rel.to_string_lossy().replace('\\', "/"),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn write_summary(path: &Path, a: &Analysis<f64>) -> Result<PathBuf> {
    let mut w = create(path)?;
    writeln!(w, "method,pathloss_db,path_count,scenario_id,f_center_hz")?;
    for r in &a.results {
        writeln!(w, "{},{},{},{},{}", r.method.label(), r.pathloss_db, r.path_count, a.scenario_id, a.f_center_hz)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Per-method contributions: one row per detected path, per scan column for
/// the sum-all baseline.
pub fn write_diagnostics(path: &Path, a: &Analysis<f64>) -> Result<PathBuf> {
    let mut w = create(path)?;
    writeln!(w, "method,rank,azimuth_deg,delay_ns,power_db")?;
    for r in &a.results {
        for (i, c) in r.contributions.iter().enumerate() {
            let delay = c.delay_s.map(|d| format!("{}", d * 1e9)).unwrap_or_default();
            writeln!(w, "{},{},{},{},{}", r.method.label(), i + 1, c.azimuth_deg, delay, db(c.power))?;
        }
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

pub fn write_paths(path: &Path, paths: &PathSet64) -> Result<PathBuf> {
    let mut w = create(path)?;
    writeln!(w, "rank,azimuth_deg,delay_ns,power_db")?;
    for (i, p) in paths.iter().enumerate() {
        writeln!(w, "{},{},{},{}", i + 1, p.azimuth_deg, p.delay_s * 1e9, db(p.power()))?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Profile in dB relative to its peak, one row per delay bin.
pub fn write_padp(path: &Path, padp: &Padp64) -> Result<PathBuf> {
    let mut w = create(path)?;
    let mut header = String::from("delay_ns");
    for a in padp.angles_deg() {
        write!(header, ",{a}")?;
    }
    writeln!(w, "{header}")?;
    let peak = padp.global_max();
    let mut line = String::new();
    for (i, row) in padp.power().rows().into_iter().enumerate() {
        line.clear();
        write!(line, "{}", padp.delay_s()[i] * 1e9)?;
        for &p in row {
            let rel = if peak > 0.0 { db(p / peak).max(PADP_FLOOR_DB) } else { PADP_FLOOR_DB };
            write!(line, ",{rel:.4}")?;
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Writes one `angle_<i>.csv` (`freq_hz,re,im`) per row.
pub fn export_sweeps(dir: &Path, cfr: &CfrMatrix64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let freqs = cfr.grid().freqs();
    let mut out = Vec::with_capacity(cfr.num_rows());
    for (p, row) in cfr.data().rows().into_iter().enumerate() {
        let path = dir.join(format!("angle_{p}.csv"));
        let mut w = create(&path)?;
        writeln!(w, "freq_hz,re,im")?;
        for (f, z) in freqs.iter().zip(row) {
            writeln!(w, "{f},{},{}", z.re, z.im)?;
        }
        w.flush()?;
        out.push(path);
    }
    Ok(out)
}

fn sweep_index(name: &str) -> Option<usize> {
    name.strip_prefix("angle_")?.strip_suffix(".csv")?.parse().ok()
}

fn read_sweep(path: &Path) -> Result<(Vec<f64>, Vec<Complex<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    ensure!(
        header == ["freq_hz", "re", "im"],
        "{}: expected header `freq_hz,re,im`, found `{}`",
        path.display(),
        header.join(",")
    );
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: line {}", path.display(), i + 2))?;
        let num = |k: usize| -> Result<f64> {
            let v: f64 = rec[k]
                .parse()
                .with_context(|| format!("{}:{}: bad number `{}`", path.display(), i + 2, &rec[k]))?;
            ensure!(v.is_finite(), "{}:{}: non-finite value", path.display(), i + 2);
            Ok(v)
        };
        freqs.push(num(0)?);
        values.push(Complex::new(num(1)?, num(2)?));
    }
    ensure!(freqs.len() >= 2, "{}: need at least two frequency points", path.display());
    Ok((freqs, values))
}

/// Assembles `angle_<i>.csv` sweeps into a matrix ordered by rotation index.
///
/// The row count comes from `layout`. Every file must carry the same uniform
/// frequency grid, which must also match `expected` when given.
pub fn ingest_sweeps(dir: &Path, layout: CfrLayout<f64>, expected: Option<&FrequencyGrid64>) -> Result<CfrMatrix64> {
    let rows = match &layout {
        CfrLayout::Vaa(g) => g.num_elements(),
        CfrLayout::Dss { rotation_deg } => rotation_deg.len(),
    };
    let mut files: BTreeMap<usize, PathBuf> = BTreeMap::new();
    let entries = fs::read_dir(dir).with_context(|| format!("reading sweep directory {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        let Some(idx) = path.file_name().and_then(|n| n.to_str()).and_then(sweep_index) else {
            continue;
        };
        if let Some(prev) = files.insert(idx, path.clone()) {
            bail!("duplicate rotation index {idx}: {} and {}", prev.display(), path.display());
        }
    }
    if let Some((&idx, path)) = files.iter().find(|(&i, _)| i >= rows) {
        bail!("{}: rotation index {idx} out of range for {rows} angles", path.display());
    }
    let missing: Vec<String> = (0..rows).filter(|i| !files.contains_key(i)).map(|i| i.to_string()).collect();
    if !missing.is_empty() {
        bail!(
            "{}: {} of {rows} sweeps found; missing rotation index {}",
            dir.display(),
            files.len(),
            missing.join(", ")
        );
    }

    let mut grid: Option<(FrequencyGrid64, Vec<f64>)> = expected.map(|g| (*g, g.freqs()));
    let mut data: Option<Array2<Complex<f64>>> = None;
    for (&p, path) in &files {
        let (freqs, values) = read_sweep(path)?;
        let (g, ref_freqs) = match &grid {
            Some(g) => g.clone(),
            None => {
                let g = FrequencyGrid64::new(freqs[0], freqs[freqs.len() - 1], freqs.len())
                    .with_context(|| format!("{}: invalid frequency grid", path.display()))?;
                let built = (g, g.freqs());
                grid = Some(built.clone());
                built
            }
        };
        let tol = 1e-6 * g.step();
        let matches = freqs.len() == ref_freqs.len() && freqs.iter().zip(&ref_freqs).all(|(a, b)| (a - b).abs() <= tol);
        if !matches {
            bail!(
                "{}: frequency grid ({} points, {}..{} Hz) does not match the expected uniform grid ({} points, {}..{} Hz)",
                path.display(),
                freqs.len(),
                freqs[0],
                freqs[freqs.len() - 1],
                ref_freqs.len(),
                g.f_lower(),
                g.f_upper()
            );
        }
        let m = data.get_or_insert_with(|| Array2::from_elem((rows, freqs.len()), Complex::new(0.0, 0.0)));
        for (n, v) in values.into_iter().enumerate() {
            m[[p, n]] = v;
        }
    }
    let (grid, _) = grid.expect("at least one sweep");
    Ok(CfrMatrix64::new(data.expect("at least one sweep"), grid, layout)?)
}

/// Reads `summary.csv` back as `(method, pathloss_db, path_count)`.
pub fn read_summary(path: &Path) -> Result<Vec<(String, f64, usize)>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push((rec[0].to_string(), rec[1].parse()?, rec[2].parse()?));
    }
    Ok(out)
}

pub fn method_labels() -> Vec<&'static str> {
    Method::ALL.iter().map(|m| m.label()).collect()
}
