//! Omni-directional pathloss estimators.
//!
//! * [`pl_omni_vaa`]: sum of detected virtual-array paths, each de-embedded
//!   from the antenna gains and the squared array gain at its azimuth.
//! * [`pl_omni_ref1`]: directional scan, every profile cell above the noise
//!   gate summed. Overlapping beams count the same path at many rotations.
//! * [`pl_omni_ref2`]: directional scan, one path per delay peak taken at the
//!   strongest rotation. Paths sharing a delay bin are lost.

use std::sync::Arc;

use num_complex::Complex;

use crate::angle::wrap_half_open;
use crate::beamform::array_beam_pattern;
use crate::channel::{FrequencyGrid, Path, PathSet, PathWeight, UcaGeometry};
use crate::error::{Error, Result};
use crate::padp::{detect_delay_peaks, estimate_noise_floor, Padp, PadpKind, PeakConfig};
use crate::patterns::AntennaPattern;
use crate::scalar::{from_db, to_db, Real};

/// Linear antenna gain, constant or tabulated over azimuth.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularGain<T> {
    Scalar(T),
    /// `(azimuth_deg, linear gain)` samples, strictly increasing in angle,
    /// interpolated linearly in dB with wraparound.
    Table(Vec<(T, T)>),
}

impl<T: Real> AngularGain<T> {
    pub fn unit() -> Self {
        AngularGain::Scalar(T::one())
    }

    pub fn from_dbi(dbi: T) -> Result<Self> {
        let g = AngularGain::Scalar(from_db(dbi));
        g.validate()?;
        Ok(g)
    }

    /// Table from `(azimuth_deg, gain_dbi)` samples.
    pub fn table_from_dbi(samples: &[(T, T)]) -> Result<Self> {
        let g = AngularGain::Table(samples.iter().map(|&(a, d)| (a, from_db(d))).collect());
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AngularGain::Scalar(g) => check_positive(*g),
            AngularGain::Table(t) => {
                if t.is_empty() {
                    return Err(Error::invalid("gain table is empty"));
                }
                if t.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::invalid("gain table angles must be strictly increasing"));
                }
                if t[t.len() - 1].0 - t[0].0 >= T::lit(360.0) {
                    return Err(Error::invalid("gain table must span less than 360 degrees"));
                }
                t.iter().try_for_each(|&(_, g)| check_positive(g))
            }
        }
    }

    pub fn at(&self, azimuth_deg: T) -> T {
        match self {
            AngularGain::Scalar(g) => *g,
            AngularGain::Table(t) if t.len() == 1 => t[0].1,
            AngularGain::Table(t) => {
                let full = T::lit(360.0);
                let a0 = t[0].0;
                let mut x = a0 + (wrap_half_open(azimuth_deg) - a0).rem_euclid(&full);
                if x >= a0 + full {
                    x = a0;
                }
                let idx = t.partition_point(|s| s.0 <= x);
                let (lo, hi) = if idx == t.len() {
                    (t[t.len() - 1], (t[0].0 + full, t[0].1))
                } else {
                    (t[idx - 1], t[idx])
                };
                let frac = (x - lo.0) / (hi.0 - lo.0);
                let db = to_db(lo.1) + (to_db(hi.1) - to_db(lo.1)) * frac;
                from_db(db)
            }
        }
    }
}

fn check_positive<T: Real>(g: T) -> Result<()> {
    if g > T::zero() && g.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("antenna gains must be positive and finite, got {g}")))
    }
}

/// Anything that can report the array gain `|υ(f, φ)|` for a path at `φ`.
pub trait ArrayGainSource<T>: Send + Sync {
    fn array_gain(&self, azimuth_deg: T) -> T;
}

impl<T, F> ArrayGainSource<T> for F
where
    F: Fn(T) -> T + Send + Sync,
{
    fn array_gain(&self, azimuth_deg: T) -> T {
        self(azimuth_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrayGainMode {
    /// `|υ(f_c, φ)|` at the centre of the band.
    #[default]
    CenterFrequency,
    /// `|mean_f υ(f, φ)|`, matching what the inverse transform accumulates
    /// when the element pattern varies over the band.
    BandAverage,
}

/// Array gain of a windowed-beamformer virtual circular array.
#[derive(Debug, Clone)]
pub struct UcaArrayGain<T> {
    geom: UcaGeometry<T>,
    elem: AntennaPattern<T>,
    half_width_deg: T,
    grid: FrequencyGrid<T>,
    mode: ArrayGainMode,
}

impl<T: Real> UcaArrayGain<T> {
    pub fn new(
        geom: UcaGeometry<T>,
        elem: AntennaPattern<T>,
        half_width_deg: T,
        grid: FrequencyGrid<T>,
        mode: ArrayGainMode,
    ) -> Self {
        Self {
            geom,
            elem,
            half_width_deg,
            grid,
            mode,
        }
    }
}

impl<T: Real> ArrayGainSource<T> for UcaArrayGain<T> {
    fn array_gain(&self, azimuth_deg: T) -> T {
        let at = |f: T| array_beam_pattern(&self.geom, &self.elem, f, azimuth_deg, &[azimuth_deg], self.half_width_deg)[0];
        match self.mode {
            ArrayGainMode::CenterFrequency => at(self.grid.center()).norm(),
            ArrayGainMode::BandAverage => {
                let freqs = self.grid.freqs();
                let sum: Complex<T> = freqs.iter().map(|&f| at(f)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
                (sum / T::from_usize_exact(freqs.len())).norm()
            }
        }
    }
}

/// Antenna gains to de-embed.
#[derive(Clone)]
pub struct GainBudget<T> {
    pub tx_gain: AngularGain<T>,
    pub rx_gain: AngularGain<T>,
    pub array_gain: Option<Arc<dyn ArrayGainSource<T>>>,
}

impl<T: Real> std::fmt::Debug for GainBudget<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GainBudget")
            .field("tx_gain", &self.tx_gain)
            .field("rx_gain", &self.rx_gain)
            .field("array_gain", &self.array_gain.as_ref().map(|_| ".."))
            .finish()
    }
}

impl<T: Real> GainBudget<T> {
    pub fn new(tx_gain: AngularGain<T>, rx_gain: AngularGain<T>) -> Result<Self> {
        tx_gain.validate()?;
        rx_gain.validate()?;
        Ok(Self {
            tx_gain,
            rx_gain,
            array_gain: None,
        })
    }

    pub fn unit() -> Self {
        Self {
            tx_gain: AngularGain::unit(),
            rx_gain: AngularGain::unit(),
            array_gain: None,
        }
    }

    pub fn with_array_gain(mut self, source: impl ArrayGainSource<T> + 'static) -> Self {
        self.array_gain = Some(Arc::new(source));
        self
    }

    /// `G_tx(φ)·G_rx(φ)`.
    pub fn link_gain(&self, azimuth_deg: T) -> T {
        self.tx_gain.at(azimuth_deg) * self.rx_gain.at(azimuth_deg)
    }
}

/// Scales every ground-truth amplitude by `sqrt(G_tx(φ_k)·G_rx(φ_k))`, i.e.
/// what a sounder with these antennas would record.
pub fn embed_antenna_gains<T: Real>(truth: &PathSet<T>, budget: &GainBudget<T>) -> PathSet<T> {
    truth
        .iter()
        .map(|p| {
            let mut q = p.clone();
            let g = budget.link_gain(p.azimuth_deg);
            q.weight = match p.weight {
                PathWeight::Amplitude(a) => PathWeight::Amplitude(a * g.sqrt()),
                PathWeight::Power(w) => PathWeight::Power(w * g),
            };
            q
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ProposedVaa,
    Ref1SumAll,
    Ref2DelayMax,
    FreeSpace,
    GroundTruth,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ProposedVaa,
        Method::Ref1SumAll,
        Method::Ref2DelayMax,
        Method::FreeSpace,
        Method::GroundTruth,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::ProposedVaa => "proposed_vaa",
            Method::Ref1SumAll => "ref1_sum_all",
            Method::Ref2DelayMax => "ref2_delay_max",
            Method::FreeSpace => "free_space",
            Method::GroundTruth => "ground_truth",
        }
    }
}

/// De-embedded linear power one path (or profile column) adds to the total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution<T> {
    pub azimuth_deg: T,
    pub delay_s: Option<T>,
    pub power: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathlossResult<T> {
    pub method: Method,
    pub pathloss_db: T,
    pub path_count: usize,
    pub contributions: Vec<Contribution<T>>,
}

impl<T: Real> PathlossResult<T> {
    fn from_contributions(method: Method, path_count: usize, contributions: Vec<Contribution<T>>) -> Self {
        let total: T = contributions.iter().map(|c| c.power).sum();
        Self {
            method,
            pathloss_db: -to_db(total),
            path_count,
            contributions,
        }
    }

    /// Total de-embedded power, `10^(−PL/10)`.
    pub fn total_power(&self) -> T {
        from_db(-self.pathloss_db)
    }
}

/// Proposed estimator: `PL = −10·log10 Σ_k P_k / (G_tx·G_rx·|υ_k|²)`.
///
/// `P_k` from [`compute_padp`](crate::padp::compute_padp) carries the squared
/// array amplitude gain, so it is divided out squared.
pub fn pl_omni_vaa<T: Real>(detected: &PathSet<T>, budget: &GainBudget<T>) -> Result<PathlossResult<T>> {
    if detected.is_empty() {
        return Err(Error::NoPathsAboveThreshold);
    }
    let source = budget
        .array_gain
        .as_ref()
        .ok_or_else(|| Error::invalid("virtual-array estimate needs an array gain source"))?;
    let mut contributions = Vec::with_capacity(detected.len());
    for p in detected {
        let gain = source.array_gain(p.azimuth_deg);
        if !(gain > T::zero()) {
            return Err(Error::invalid(format!("array gain at {} deg is zero", p.azimuth_deg)));
        }
        contributions.push(Contribution {
            azimuth_deg: p.azimuth_deg,
            delay_s: Some(p.delay_s),
            power: p.power() / (budget.link_gain(p.azimuth_deg) * gain * gain),
        });
    }
    Ok(PathlossResult::from_contributions(Method::ProposedVaa, detected.len(), contributions))
}

fn require_scan<T: Real>(padp: &Padp<T>) -> Result<()> {
    if padp.kind() == PadpKind::Dss {
        Ok(())
    } else {
        Err(Error::WrongLayout { expected: "directional-scan" })
    }
}

/// Reference method 1: every cell above `floor · 10^(threshold/10)`, summed.
///
/// Contributions are reported per rotation angle.
pub fn pl_omni_ref1<T: Real>(dss: &Padp<T>, budget: &GainBudget<T>, noise: &PeakConfig<T>) -> Result<PathlossResult<T>> {
    require_scan(dss)?;
    noise.validate()?;
    let gate = estimate_noise_floor(dss)? * from_db(noise.threshold_db_above_noise);
    let mut contributions = Vec::new();
    let mut cells = 0;
    for (j, &theta) in dss.angles_deg().iter().enumerate() {
        let mut sum = T::zero();
        for &p in dss.power().column(j) {
            if p > gate {
                sum = sum + p;
                cells += 1;
            }
        }
        if sum > T::zero() {
            let az = wrap_half_open(theta);
            contributions.push(Contribution {
                azimuth_deg: az,
                delay_s: None,
                power: sum / budget.link_gain(az),
            });
        }
    }
    if contributions.is_empty() {
        return Err(Error::NoPowerAboveNoise);
    }
    Ok(PathlossResult::from_contributions(Method::Ref1SumAll, cells, contributions))
}

/// Reference method 2: delay-domain peaks of the scan, strongest rotation per
/// peak, normalized by the boresight link gain.
pub fn pl_omni_ref2<T: Real>(dss: &Padp<T>, budget: &GainBudget<T>, peaks: &PeakConfig<T>) -> Result<PathlossResult<T>> {
    require_scan(dss)?;
    let found = detect_delay_peaks(dss, peaks)?;
    if found.is_empty() {
        return Err(Error::NoPathsAboveThreshold);
    }
    let contributions = found
        .iter()
        .map(|p| Contribution {
            azimuth_deg: p.azimuth_deg,
            delay_s: Some(p.delay_s),
            power: p.power() / budget.link_gain(p.azimuth_deg),
        })
        .collect();
    Ok(PathlossResult::from_contributions(Method::Ref2DelayMax, found.len(), contributions))
}

/// Reference rows: free-space loss at `distance_m` and the ground-truth sum.
pub fn free_space_result<T: Real>(distance_m: T, freq_hz: T) -> Result<PathlossResult<T>> {
    let pl = crate::channel::free_space_pathloss_db(distance_m, freq_hz)?;
    Ok(PathlossResult {
        method: Method::FreeSpace,
        pathloss_db: pl,
        path_count: 1,
        contributions: vec![Contribution {
            azimuth_deg: T::zero(),
            delay_s: Some(distance_m / T::lit(crate::scalar::SPEED_OF_LIGHT)),
            power: from_db(-pl),
        }],
    })
}

pub fn ground_truth_result<T: Real>(truth: &PathSet<T>) -> Result<PathlossResult<T>> {
    let pl = crate::channel::true_omni_pathloss_db(truth)?;
    Ok(PathlossResult {
        method: Method::GroundTruth,
        pathloss_db: pl,
        path_count: truth.len(),
        contributions: truth
            .iter()
            .map(|p: &Path<T>| Contribution {
                azimuth_deg: p.azimuth_deg,
                delay_s: Some(p.delay_s),
                power: p.power(),
            })
            .collect(),
    })
}
