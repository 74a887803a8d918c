//! Omni-directional pathloss from directional-antenna sweeps.
//!
//! A directional antenna swept around a rotation centre can be used in two
//! ways: pointed outward at the centre (directional scanning) or offset by a
//! radius so that each rotation step becomes one element of a virtual uniform
//! circular array. This crate simulates both, beamforms the virtual array with
//! a windowed classical beamformer, builds power angular delay profiles,
//! detects multipath and estimates omni-directional pathloss with the
//! virtual-array method and two scanning baselines.
//!
//! The numeric core is generic over the scalar type; the `*64` / `*32`
//! aliases below fix it.

pub mod angle;
pub mod beamform;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod padp;
pub mod patterns;
pub mod scalar;
pub mod scenario;

pub use beamform::{
    array_beam_pattern, array_gain, beamform_spectrum, scan_beam_shape, steering_weight, BeamShape, BeamSpectrum,
    BeamformConfig,
};
pub use channel::{
    add_noise, free_space_pathloss_db, synth_dss_cfr, synth_vaa_cfr, true_omni_pathloss_db, CfrLayout, CfrMatrix,
    FrequencyGrid, Path, PathSet, PathWeight, UcaGeometry,
};
pub use error::{Error, Result};
pub use estimators::{
    pl_omni_ref1, pl_omni_ref2, pl_omni_vaa, AngularGain, ArrayGainMode, ArrayGainSource,
    Contribution, GainBudget, Method, PathlossResult, UcaArrayGain,
};
pub use padp::{
    compute_padp, compute_pdp, detect_delay_peaks, detect_paths, estimate_noise_floor, FrequencyWindow, Padp,
    PadpKind, PeakConfig, TransformConfig,
};
pub use patterns::AntennaPattern;
pub use scalar::{Real, SPEED_OF_LIGHT};
pub use scenario::{compare_methods, presets, Analysis, Scenario, ScenarioConfig};

pub type AntennaPattern64 = AntennaPattern<f64>;
pub type UcaGeometry64 = UcaGeometry<f64>;
pub type FrequencyGrid64 = FrequencyGrid<f64>;
pub type PathSet64 = PathSet<f64>;
pub type CfrMatrix64 = CfrMatrix<f64>;
pub type BeamSpectrum64 = BeamSpectrum<f64>;
pub type Padp64 = Padp<f64>;
pub type PathlossResult64 = PathlossResult<f64>;

pub type AntennaPattern32 = AntennaPattern<f32>;
pub type UcaGeometry32 = UcaGeometry<f32>;
pub type FrequencyGrid32 = FrequencyGrid<f32>;
pub type PathSet32 = PathSet<f32>;
pub type CfrMatrix32 = CfrMatrix<f32>;
pub type Padp32 = Padp<f32>;
