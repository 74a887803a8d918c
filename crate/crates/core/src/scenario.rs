//! Scenario configuration, built-in presets and the end-to-end pipeline.
//!
//! A scenario fixes the sweep, the virtual array, the element pattern, the
//! link gains and (for simulation) a ground-truth path set. The pipeline runs
//! both sounding schemes through the same analysis so their estimates are
//! directly comparable.

use std::path::{Path as FsPath, PathBuf};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angle::uniform_circle;
use crate::beamform::{beamform_spectrum, BeamformConfig};
use crate::channel::{
    add_noise, free_space_pathloss_db, synth_dss_cfr, synth_vaa_cfr, CfrLayout, CfrMatrix, FrequencyGrid, Path,
    PathSet, UcaGeometry,
};
use crate::error::{Error, Result};
use crate::estimators::{
    embed_antenna_gains, free_space_result, ground_truth_result, pl_omni_ref1, pl_omni_ref2, pl_omni_vaa,
    AngularGain, ArrayGainMode, GainBudget, Method, PathlossResult, UcaArrayGain,
};
use crate::padp::{compute_padp, detect_delay_peaks, detect_paths, FrequencyWindow, Padp, PeakConfig, TransformConfig};
use crate::patterns::AntennaPattern;
use crate::scalar::{Real, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub f_lower_hz: f64,
    pub f_upper_hz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub elements: usize,
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternConfig {
    Isotropic,
    #[serde(alias = "gaussian-beam", alias = "gaussian_beam")]
    Gaussian {
        hpbw_deg: f64,
        #[serde(default)]
        gain_dbi: f64,
    },
    Tabulated {
        file: PathBuf,
        /// Gain the file's `mag_db` column is relative to.
        #[serde(default)]
        gain_dbi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSample {
    pub angle_deg: f64,
    pub gain_dbi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub azimuth_deg: f64,
    /// Either `delay_ns` or `delay_bin` (index on the unpadded delay grid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_bin: Option<usize>,
    pub power_db: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// Noise power per sweep point, dB relative to a unit-magnitude response.
    pub floor_db: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            floor_db: -130.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamformSettings {
    pub window_half_width_deg: f64,
    /// Defaults to one steering angle per element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steering_points: Option<usize>,
}

impl Default for BeamformSettings {
    fn default() -> Self {
        Self {
            window_half_width_deg: 90.0,
            steering_points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    /// Defaults to the element count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSetting {
    #[default]
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PadpSettings {
    pub zero_pad: usize,
    #[serde(default)]
    pub window: WindowSetting,
}

impl Default for PadpSettings {
    fn default() -> Self {
        Self {
            zero_pad: 1,
            window: WindowSetting::Rectangular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakSettings {
    pub threshold_db_above_noise: f64,
    pub dynamic_range_db: f64,
    pub delay_neighborhood: usize,
    pub angle_neighborhood: usize,
}

impl Default for PeakSettings {
    fn default() -> Self {
        let d = PeakConfig::<f64>::default();
        Self {
            threshold_db_above_noise: d.threshold_db_above_noise,
            dynamic_range_db: d.dynamic_range_db,
            delay_neighborhood: d.delay_neighborhood,
            angle_neighborhood: d.angle_neighborhood,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayGainSetting {
    #[default]
    CenterFrequency,
    BandAverage,
}

/// Scenario description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_scenario_id")]
    pub scenario_id: String,
    /// Tx–Rx distance for the free-space reference row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
    pub frequency: FrequencyConfig,
    pub geometry: GeometryConfig,
    pub element_pattern: PatternConfig,
    #[serde(default)]
    pub rx_gain_dbi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_gain_table: Option<Vec<GainSample>>,
    #[serde(default)]
    pub paths: Vec<PathConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub beamform: BeamformSettings,
    #[serde(default)]
    pub dss: ScanSettings,
    #[serde(default)]
    pub padp: PadpSettings,
    #[serde(default)]
    pub peaks: PeakSettings,
    #[serde(default)]
    pub array_gain: ArrayGainSetting,
    /// Directory relative pattern files resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_scenario_id() -> String {
    "scenario".to_string()
}

fn cfg_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Parses JSON; errors name the offending field and line/column.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            cfg_err(field, format!("{inner}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        let mut cfg = Self::from_json_str(&text)?;
        cfg.base_dir = path.parent().map(FsPath::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Delay bin width of the unpadded transform, `1/(F·Δf)`.
    pub fn delay_step_s(&self) -> f64 {
        let f = &self.frequency;
        let df = (f.f_upper_hz - f.f_lower_hz) / (f.points as f64 - 1.0);
        1.0 / (f.points as f64 * df)
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.frequency;
        if f.points < 2 {
            return Err(cfg_err("frequency.points", "need at least 2 points"));
        }
        if !(f.f_lower_hz > 0.0 && f.f_lower_hz.is_finite()) {
            return Err(cfg_err("frequency.f_lower_hz", "must be positive"));
        }
        if !(f.f_upper_hz > f.f_lower_hz && f.f_upper_hz.is_finite()) {
            return Err(cfg_err("frequency.f_upper_hz", "must exceed f_lower_hz"));
        }
        if self.geometry.elements < 3 {
            return Err(cfg_err("geometry.elements", "need at least 3 elements"));
        }
        if !(self.geometry.radius_m > 0.0 && self.geometry.radius_m.is_finite()) {
            return Err(cfg_err("geometry.radius_m", "must be positive"));
        }
        match &self.element_pattern {
            PatternConfig::Gaussian { hpbw_deg, gain_dbi } => {
                if !(*hpbw_deg > 0.0 && *hpbw_deg < 360.0) {
                    return Err(cfg_err("element_pattern.hpbw_deg", "must lie in (0, 360)"));
                }
                if !gain_dbi.is_finite() {
                    return Err(cfg_err("element_pattern.gain_dbi", "must be finite"));
                }
            }
            PatternConfig::Tabulated { gain_dbi, .. } if !gain_dbi.is_finite() => {
                return Err(cfg_err("element_pattern.gain_dbi", "must be finite"));
            }
            _ => {}
        }
        if !self.rx_gain_dbi.is_finite() {
            return Err(cfg_err("rx_gain_dbi", "must be finite"));
        }
        if let Some(d) = self.distance_m {
            if !(d > 0.0 && d.is_finite()) {
                return Err(cfg_err("distance_m", "must be positive"));
            }
        }
        let range = 1.0 / ((f.f_upper_hz - f.f_lower_hz) / (f.points as f64 - 1.0));
        for (i, p) in self.paths.iter().enumerate() {
            let field = |name: &str| format!("paths[{i}].{name}");
            match (p.delay_ns, p.delay_bin) {
                (Some(_), Some(_)) => return Err(cfg_err(field("delay_ns"), "give delay_ns or delay_bin, not both")),
                (None, None) => return Err(cfg_err(field("delay_ns"), "missing delay_ns or delay_bin")),
                _ => {}
            }
            let delay = self.path_delay_s(p);
            if !(delay >= 0.0) {
                return Err(cfg_err(field("delay_ns"), "must be non-negative"));
            }
            if delay >= range {
                return Err(cfg_err(
                    field("delay_ns"),
                    format!("{:.3} ns exceeds the unambiguous range {:.3} ns", delay * 1e9, range * 1e9),
                ));
            }
            if !(p.azimuth_deg.is_finite() && p.power_db.is_finite() && p.phase_deg.is_finite()) {
                return Err(cfg_err(format!("paths[{i}]"), "non-finite value"));
            }
        }
        if self.noise.enabled && !self.noise.floor_db.is_finite() {
            return Err(cfg_err("noise.floor_db", "must be finite"));
        }
        let b = self.beamform.window_half_width_deg;
        if !(b > 0.0 && b <= 180.0) {
            return Err(cfg_err("beamform.window_half_width_deg", "must lie in (0, 180]"));
        }
        if self.beamform.steering_points == Some(0) {
            return Err(cfg_err("beamform.steering_points", "must be positive"));
        }
        if self.dss.rotation_points == Some(0) {
            return Err(cfg_err("dss.rotation_points", "must be positive"));
        }
        if self.padp.zero_pad == 0 {
            return Err(cfg_err("padp.zero_pad", "must be at least 1"));
        }
        let pk = &self.peaks;
        if !(pk.threshold_db_above_noise > 0.0 && pk.threshold_db_above_noise.is_finite()) {
            return Err(cfg_err("peaks.threshold_db_above_noise", "must be positive"));
        }
        if !(pk.dynamic_range_db > 0.0 && pk.dynamic_range_db.is_finite()) {
            return Err(cfg_err("peaks.dynamic_range_db", "must be positive"));
        }
        if pk.delay_neighborhood == 0 {
            return Err(cfg_err("peaks.delay_neighborhood", "must be positive"));
        }
        if pk.angle_neighborhood == 0 {
            return Err(cfg_err("peaks.angle_neighborhood", "must be positive"));
        }
        if let Some(t) = &self.rx_gain_table {
            let samples: Vec<(f64, f64)> = t.iter().map(|s| (s.angle_deg, s.gain_dbi)).collect();
            AngularGain::table_from_dbi(&samples).map_err(|e| cfg_err("rx_gain_table", e.to_string()))?;
        }
        Ok(())
    }

    fn path_delay_s(&self, p: &PathConfig) -> f64 {
        match (p.delay_ns, p.delay_bin) {
            (_, Some(bin)) => bin as f64 * self.delay_step_s(),
            (Some(ns), None) => ns * 1e-9,
            (None, None) => f64::NAN,
        }
    }

    fn resolve(&self, file: &FsPath) -> PathBuf {
        match &self.base_dir {
            Some(dir) if file.is_relative() => dir.join(file),
            _ => file.to_path_buf(),
        }
    }
}

/// Everything the pipeline needs, in the working scalar type.
#[derive(Debug, Clone)]
pub struct Scenario<T: Real> {
    pub id: String,
    pub grid: FrequencyGrid<T>,
    pub geometry: UcaGeometry<T>,
    pub element: AntennaPattern<T>,
    pub rotation_deg: Vec<T>,
    pub beamform: BeamformConfig<T>,
    pub transform: TransformConfig,
    pub peaks: PeakConfig<T>,
    pub budget: GainBudget<T>,
    pub truth: Option<PathSet<T>>,
    pub distance_m: Option<T>,
    /// `(noise power dB, seed)`.
    pub noise: Option<(T, u64)>,
}

impl<T: Real + 'static> Scenario<T> {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let f = &cfg.frequency;
        let grid = FrequencyGrid::new(T::lit(f.f_lower_hz), T::lit(f.f_upper_hz), f.points)?;
        let geometry = UcaGeometry::new(cfg.geometry.elements, T::lit(cfg.geometry.radius_m))?;
        let element = match &cfg.element_pattern {
            PatternConfig::Isotropic => AntennaPattern::isotropic(),
            PatternConfig::Gaussian { hpbw_deg, gain_dbi } => {
                AntennaPattern::gaussian(T::lit(*hpbw_deg), T::lit(*gain_dbi))?
            }
            PatternConfig::Tabulated { file, gain_dbi } => {
                let path = cfg.resolve(file);
                if !path.exists() {
                    return Err(cfg_err("element_pattern.file", format!("pattern file {} not found", path.display())));
                }
                AntennaPattern::load(&path, T::lit(*gain_dbi))?
            }
        };
        let rotation_deg = uniform_circle(T::zero(), cfg.dss.rotation_points.unwrap_or(cfg.geometry.elements));
        let beamform = BeamformConfig::uniform(
            T::lit(cfg.beamform.window_half_width_deg),
            cfg.beamform.steering_points.unwrap_or(cfg.geometry.elements),
        )?;
        let transform = TransformConfig {
            zero_pad: cfg.padp.zero_pad,
            window: match cfg.padp.window {
                WindowSetting::Rectangular => FrequencyWindow::Rectangular,
                WindowSetting::Hann => FrequencyWindow::Hann,
            },
        };
        let pk = &cfg.peaks;
        let peaks = PeakConfig {
            threshold_db_above_noise: T::lit(pk.threshold_db_above_noise),
            dynamic_range_db: T::lit(pk.dynamic_range_db),
            delay_neighborhood: pk.delay_neighborhood,
            angle_neighborhood: pk.angle_neighborhood,
        };

        let tx_gain = AngularGain::from_dbi(element.gain_dbi_at(grid.center()))?;
        let rx_gain = match &cfg.rx_gain_table {
            Some(t) => {
                let samples: Vec<(T, T)> = t.iter().map(|s| (T::lit(s.angle_deg), T::lit(s.gain_dbi))).collect();
                AngularGain::table_from_dbi(&samples)?
            }
            None => AngularGain::from_dbi(T::lit(cfg.rx_gain_dbi))?,
        };
        let mode = match cfg.array_gain {
            ArrayGainSetting::CenterFrequency => ArrayGainMode::CenterFrequency,
            ArrayGainSetting::BandAverage => ArrayGainMode::BandAverage,
        };
        let budget = GainBudget::new(tx_gain, rx_gain)?.with_array_gain(UcaArrayGain::new(
            geometry.clone(),
            element.clone(),
            beamform.window_half_width_deg(),
            grid,
            mode,
        ));

        let truth = if cfg.paths.is_empty() {
            None
        } else {
            Some(
                cfg.paths
                    .iter()
                    .map(|p| {
                        Path::from_db(
                            T::lit(p.azimuth_deg),
                            T::lit(cfg.path_delay_s(p)),
                            T::lit(p.power_db),
                            T::lit(p.phase_deg),
                        )
                    })
                    .collect(),
            )
        };
        let noise = cfg.noise.enabled.then(|| (T::lit(cfg.noise.floor_db), cfg.noise.seed));
        Ok(Self {
            id: cfg.scenario_id.clone(),
            grid,
            geometry,
            element,
            rotation_deg,
            beamform,
            transform,
            peaks,
            budget,
            truth,
            distance_m: cfg.distance_m.map(T::lit),
            noise,
        })
    }

    /// Synthesizes the virtual-array and directional-scan sweeps, antenna gains
    /// and noise included.
    pub fn simulate(&self) -> Result<(CfrMatrix<T>, CfrMatrix<T>)> {
        let truth = self
            .truth
            .as_ref()
            .ok_or_else(|| cfg_err("paths", "simulation needs at least one path"))?;
        let embedded = embed_antenna_gains(truth, &self.budget);
        let mut vaa = synth_vaa_cfr(&embedded, &self.geometry, &self.element, &self.grid)?;
        let mut dss = synth_dss_cfr(&embedded, &self.rotation_deg, &self.element, &self.grid)?;
        if let Some((db, seed)) = self.noise {
            vaa = add_noise(&vaa, db, seed)?;
            dss = add_noise(&dss, db, seed.wrapping_add(1))?;
        }
        Ok((vaa, dss))
    }

    /// Runs beamforming, profiles, detection and all estimators.
    pub fn analyze(&self, vaa_cfr: CfrMatrix<T>, dss_cfr: CfrMatrix<T>) -> Result<Analysis<T>> {
        if !matches!(vaa_cfr.layout(), CfrLayout::Vaa(_)) {
            return Err(Error::WrongLayout { expected: "virtual-array" });
        }
        if !matches!(dss_cfr.layout(), CfrLayout::Dss { .. }) {
            return Err(Error::WrongLayout { expected: "directional-scan" });
        }
        let spectrum = beamform_spectrum(&vaa_cfr, &self.beamform)?;
        let vaa_padp = compute_padp(&spectrum, &self.transform)?;
        let dss_padp = compute_padp(&dss_cfr, &self.transform)?;
        let vaa_paths = detect_paths(&vaa_padp, &self.peaks)?;
        let dss_paths = detect_delay_peaks(&dss_padp, &self.peaks)?;

        let mut results = vec![
            pl_omni_vaa(&vaa_paths, &self.budget)?,
            pl_omni_ref1(&dss_padp, &self.budget, &self.peaks)?,
            pl_omni_ref2(&dss_padp, &self.budget, &self.peaks)?,
        ];
        let f_center = vaa_cfr.grid().center();
        if let Some(d) = self.distance_m {
            results.push(free_space_result(d, f_center)?);
        }
        if let Some(truth) = &self.truth {
            results.push(ground_truth_result(truth)?);
        }
        Ok(Analysis {
            scenario_id: self.id.clone(),
            f_center_hz: f_center,
            vaa_cfr,
            dss_cfr,
            vaa_padp,
            dss_padp,
            vaa_paths,
            dss_paths,
            results,
        })
    }

    pub fn run(&self) -> Result<Analysis<T>> {
        let (vaa, dss) = self.simulate()?;
        self.analyze(vaa, dss)
    }
}

/// Pipeline outputs.
#[derive(Debug, Clone)]
pub struct Analysis<T> {
    pub scenario_id: String,
    pub f_center_hz: T,
    pub vaa_cfr: CfrMatrix<T>,
    pub dss_cfr: CfrMatrix<T>,
    pub vaa_padp: Padp<T>,
    pub dss_padp: Padp<T>,
    /// Paths detected on the virtual-array profile.
    pub vaa_paths: PathSet<T>,
    /// Delay peaks of the scan profile used by reference method 2.
    pub dss_paths: PathSet<T>,
    pub results: Vec<PathlossResult<T>>,
}

impl<T: Real> Analysis<T> {
    pub fn result(&self, method: Method) -> Option<&PathlossResult<T>> {
        self.results.iter().find(|r| r.method == method)
    }

    /// Pathloss of `method`; panics if the method was not run.
    pub fn pathloss_db(&self, method: Method) -> T {
        self.result(method)
            .unwrap_or_else(|| panic!("no {} result", method.label()))
            .pathloss_db
    }
}

/// Full pipeline on a configuration in `f64`.
pub fn compare_methods(cfg: &ScenarioConfig) -> Result<Vec<PathlossResult<f64>>> {
    Ok(Scenario::<f64>::from_config(cfg)?.run()?.results)
}

pub mod presets {
    //! Built-in scenarios on the 28–30 GHz / 1001-point sweep with a 240-step,
    //! 0.15 m virtual array of 40° / 13.5 dBi horns and a 5.5 dBi receiver.
    //!
    //! Path sets are synthetic: azimuths sit on the 1.5° rotation grid and
    //! delays on the delay-bin grid so detected cells coincide with the truth.

    use super::*;

    pub const LOS_DISTANCES_M: [f64; 4] = [8.0, 14.0, 22.0, 30.0];
    pub const NLOS_DISTANCES_M: [f64; 4] = [11.4, 17.4, 25.4, 33.4];
    pub const CENTER_HZ: f64 = 29e9;

    pub const NAMES: [&str; 10] = [
        "los_8m",
        "los_14m",
        "los_22m",
        "los_30m",
        "nlos_11_4m",
        "nlos_17_4m",
        "nlos_25_4m",
        "nlos_33_4m",
        "single_path",
        "co_delay_pair",
    ];

    /// Sweep, array and antenna settings shared by all presets.
    pub fn base(scenario_id: &str) -> ScenarioConfig {
        ScenarioConfig {
            scenario_id: scenario_id.to_string(),
            distance_m: None,
            frequency: FrequencyConfig {
                f_lower_hz: 28e9,
                f_upper_hz: 30e9,
                points: 1001,
            },
            geometry: GeometryConfig {
                elements: 240,
                radius_m: 0.15,
            },
            element_pattern: PatternConfig::Gaussian {
                hpbw_deg: 40.0,
                gain_dbi: 13.5,
            },
            rx_gain_dbi: 5.5,
            rx_gain_table: None,
            paths: Vec::new(),
            noise: NoiseConfig::default(),
            beamform: BeamformSettings::default(),
            dss: ScanSettings::default(),
            padp: PadpSettings::default(),
            peaks: PeakSettings::default(),
            array_gain: ArrayGainSetting::default(),
            base_dir: None,
        }
    }

    fn fspl(length_m: f64) -> f64 {
        free_space_pathloss_db(length_m, CENTER_HZ).expect("positive length")
    }

    /// Path of the given geometric length, snapped to the rotation and delay grids.
    pub fn geometric_path(cfg: &ScenarioConfig, azimuth_deg: f64, length_m: f64, extra_loss_db: f64, phase_deg: f64) -> PathConfig {
        let step = 360.0 / cfg.geometry.elements as f64;
        PathConfig {
            azimuth_deg: (azimuth_deg / step).round() * step,
            delay_ns: None,
            delay_bin: Some((length_m / SPEED_OF_LIGHT / cfg.delay_step_s()).round() as usize),
            power_db: -(fspl(length_m) + extra_loss_db),
            phase_deg,
        }
    }

    /// Length of a single-bounce path via a scatterer at `s` metres from the
    /// Tx in direction `θ`, for a Rx `d` metres away along 0°.
    pub fn scatter_length(d: f64, s: f64, theta_deg: f64) -> f64 {
        let t = theta_deg.to_radians();
        s + (d * d + s * s - 2.0 * d * s * t.cos()).sqrt()
    }

    /// Four-path LOS corridor: direct ray, two symmetric scatterers sharing a
    /// delay bin, back-wall reflection.
    pub fn los(distance_m: f64) -> ScenarioConfig {
        let mut cfg = base(&format!("los_{}m", fmt_distance(distance_m)));
        cfg.distance_m = Some(distance_m);
        let pair = scatter_length(distance_m, 2.0, 52.5);
        cfg.paths = vec![
            geometric_path(&cfg, 0.0, distance_m, 0.0, 0.0),
            geometric_path(&cfg, 52.5, pair, 9.0, 180.0),
            geometric_path(&cfg, -52.5, pair, 9.0, 180.0),
            geometric_path(&cfg, 180.0, distance_m + 6.0, 7.0, 180.0),
        ];
        cfg.noise = NoiseConfig {
            enabled: true,
            floor_db: -130.0,
            seed: 29,
        };
        cfg
    }

    /// Six-path N-LOS: no direct ray, wide angular spread, one co-delay pair.
    pub fn nlos(distance_m: f64) -> ScenarioConfig {
        let mut cfg = base(&format!("nlos_{}m", fmt_distance(distance_m)));
        cfg.distance_m = Some(distance_m);
        let d = distance_m;
        cfg.paths = vec![
            geometric_path(&cfg, 24.0, d * 1.02, 12.0, 0.0),
            geometric_path(&cfg, -36.0, d * 1.12, 15.0, 180.0),
            geometric_path(&cfg, 84.0, d * 1.12, 18.0, 90.0),
            geometric_path(&cfg, 129.0, d * 1.3, 20.0, 0.0),
            geometric_path(&cfg, -100.5, d * 1.45, 22.0, 180.0),
            geometric_path(&cfg, -160.5, d * 1.6, 21.0, 45.0),
        ];
        cfg.noise = NoiseConfig {
            enabled: true,
            floor_db: -130.0,
            seed: 17,
        };
        cfg
    }

    /// Direct ray only, 14 m, noiseless.
    pub fn single_path() -> ScenarioConfig {
        let mut cfg = base("single_path");
        cfg.distance_m = Some(14.0);
        cfg.paths = vec![geometric_path(&cfg, 0.0, 14.0, 0.0, 0.0)];
        cfg
    }

    /// Two equal paths at 0° and 90° in the same delay bin, noiseless.
    pub fn co_delay_pair() -> ScenarioConfig {
        let mut cfg = base("co_delay_pair");
        cfg.paths = vec![
            PathConfig {
                azimuth_deg: 0.0,
                delay_ns: None,
                delay_bin: Some(100),
                power_db: -80.0,
                phase_deg: 0.0,
            },
            PathConfig {
                azimuth_deg: 90.0,
                delay_ns: None,
                delay_bin: Some(100),
                power_db: -80.0,
                phase_deg: 0.0,
            },
        ];
        cfg
    }

    fn fmt_distance(d: f64) -> String {
        format!("{d}").replace('.', "_")
    }

    pub fn by_name(name: &str) -> Option<ScenarioConfig> {
        let los_idx = ["los_8m", "los_14m", "los_22m", "los_30m"].iter().position(|n| *n == name);
        if let Some(i) = los_idx {
            return Some(los(LOS_DISTANCES_M[i]));
        }
        let nlos_idx = ["nlos_11_4m", "nlos_17_4m", "nlos_25_4m", "nlos_33_4m"].iter().position(|n| *n == name);
        if let Some(i) = nlos_idx {
            return Some(nlos(NLOS_DISTANCES_M[i]));
        }
        match name {
            "single_path" => Some(single_path()),
            "co_delay_pair" => Some(co_delay_pair()),
            _ => None,
        }
    }

    /// Randomized corridor-like scene with 4–8 paths, noiseless.
    ///
    /// A direct ray along 0° plus 1–3 pairs of scatterers that share a delay
    /// bin (as symmetric features on both sides of a corridor do) and
    /// optionally one isolated reflection. Paths sharing a bin are at least
    /// 60° apart so a 40° scanning beam sees them separately; distinct bins
    /// are at least 3 bins apart.
    pub fn random_corridor(seed: u64) -> ScenarioConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cfg = base(&format!("corridor_{seed}"));
        let step = 360.0 / cfg.geometry.elements as f64;
        let d: f64 = rng.random_range(8.0..30.0);
        cfg.distance_m = Some(d);
        let los = geometric_path(&cfg, 0.0, d, 0.0, rng.random_range(0.0..360.0));
        let mut used_bins = vec![los.delay_bin.expect("binned")];
        let mut paths = vec![los];

        let pairs = rng.random_range(1..=3usize);
        let singles = if pairs == 1 { 1 } else { rng.random_range(0..=1usize) };
        let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.random_range(lo..hi) / step).round() * step;
        let groups = (0..pairs).map(|_| true).chain((0..singles).map(|_| false));
        for pair in groups {
            loop {
                let azimuths = if pair {
                    vec![draw(&mut rng, 30.0, 80.0), -draw(&mut rng, 30.0, 80.0)]
                } else {
                    vec![draw(&mut rng, 100.0, 260.0)]
                };
                let s: f64 = rng.random_range(1.0..4.0);
                let length = scatter_length(d, s, azimuths[0]);
                let bin = (length / SPEED_OF_LIGHT / cfg.delay_step_s()).round() as usize;
                if used_bins.iter().any(|&b| b.abs_diff(bin) < 3) {
                    continue;
                }
                used_bins.push(bin);
                for az in azimuths {
                    let mut p = geometric_path(&cfg, az, length, rng.random_range(4.0..12.0), rng.random_range(0.0..360.0));
                    p.delay_bin = Some(bin);
                    paths.push(p);
                }
                break;
            }
        }
        cfg.paths = paths;
        cfg
    }
}

/// Ground-truth paths of a preset or config in a given scalar type, without
/// antenna gains.
pub fn truth_paths<T: Real + 'static>(cfg: &ScenarioConfig) -> Result<PathSet<T>> {
    Scenario::<T>::from_config(cfg)?
        .truth
        .ok_or_else(|| cfg_err("paths", "no paths configured"))
}

/// Unit-amplitude helper used by examples and tests.
pub fn unit_path<T: Real>(azimuth_deg: T, delay_s: T) -> Path<T> {
    Path::new(azimuth_deg, delay_s, Complex::new(T::one(), T::zero()))
}
