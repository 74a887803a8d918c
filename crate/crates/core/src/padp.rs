//! Power angular delay profiles and multipath detection.
//!
//! Each angle column of a beamformed spectrum (or each rotation of a
//! directional scan) is taken to the delay domain with an inverse DFT:
//!
//! ```text
//! q(τ_m, φ) = Σ_n w_n Q(f_n, φ) e^{j2π f_n τ_m},   τ_m = m / (N Δf)
//! ```
//!
//! and stored as `|q|² / (Σ_n w_n)²`, so a path of amplitude `A` whose delay
//! falls on a bin shows up with power `(A·G)²`, `G` being the array gain at
//! the look direction (1 for a directional scan at boresight).

use std::cmp::Ordering;

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::angle::wrap_half_open;
use crate::beamform::BeamSpectrum;
use crate::channel::{CfrLayout, CfrMatrix, FrequencyGrid, Path, PathSet};
use crate::error::{Error, Result};
use crate::scalar::{from_db, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PadpKind {
    Vaa,
    Dss,
}

impl PadpKind {
    pub fn label(self) -> &'static str {
        match self {
            PadpKind::Vaa => "vaa",
            PadpKind::Dss => "dss",
        }
    }
}

/// Frequency-domain taper applied before the inverse transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyWindow {
    #[default]
    Rectangular,
    Hann,
}

impl FrequencyWindow {
    fn weights<T: Real>(self, n: usize) -> Vec<T> {
        match self {
            FrequencyWindow::Rectangular => vec![T::one(); n],
            FrequencyWindow::Hann => {
                let denom = T::from_usize_exact(n.max(2) - 1);
                (0..n)
                    .map(|i| {
                        let x = T::TAU() * T::from_usize_exact(i) / denom;
                        T::lit(0.5) * (T::one() - x.cos())
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformConfig {
    /// Transform length is `zero_pad · F`.
    pub zero_pad: usize,
    pub window: FrequencyWindow,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            zero_pad: 1,
            window: FrequencyWindow::Rectangular,
        }
    }
}

/// Delay × angle power surface in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct Padp<T> {
    power: Array2<T>,
    delay_s: Vec<T>,
    angles_deg: Vec<T>,
    kind: PadpKind,
}

impl<T: Real> Padp<T> {
    /// Wraps an existing power surface (`delay_s.len() × angles_deg.len()`).
    pub fn from_parts(power: Array2<T>, delay_s: Vec<T>, angles_deg: Vec<T>, kind: PadpKind) -> Result<Self> {
        if power.dim() != (delay_s.len(), angles_deg.len()) {
            return Err(Error::Dimension(format!(
                "power surface {:?} does not match grids ({}, {})",
                power.dim(),
                delay_s.len(),
                angles_deg.len()
            )));
        }
        if power.iter().any(|&p| !(p >= T::zero() && p.is_finite())) {
            return Err(Error::invalid("profile power must be finite and non-negative"));
        }
        for g in [&delay_s, &angles_deg] {
            if g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("profile grids must be strictly increasing"));
            }
        }
        Ok(Self {
            power,
            delay_s,
            angles_deg,
            kind,
        })
    }

    pub fn power(&self) -> &Array2<T> {
        &self.power
    }

    pub fn delay_s(&self) -> &[T] {
        &self.delay_s
    }

    pub fn angles_deg(&self) -> &[T] {
        &self.angles_deg
    }

    pub fn kind(&self) -> PadpKind {
        self.kind
    }

    pub fn num_delays(&self) -> usize {
        self.delay_s.len()
    }

    pub fn num_angles(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn delay_step_s(&self) -> T {
        if self.delay_s.len() > 1 {
            self.delay_s[1] - self.delay_s[0]
        } else {
            T::zero()
        }
    }

    /// Power delay profile seen at one angle.
    pub fn column(&self, angle_bin: usize) -> Vec<T> {
        self.power.column(angle_bin).to_vec()
    }

    pub fn global_max(&self) -> T {
        self.power.iter().copied().fold(T::zero(), T::max)
    }
}

/// Inputs a profile can be computed from.
#[derive(Debug, Clone, Copy)]
pub enum PadpInput<'a, T> {
    Beam(&'a BeamSpectrum<T>),
    Scan(&'a CfrMatrix<T>),
}

impl<'a, T> From<&'a BeamSpectrum<T>> for PadpInput<'a, T> {
    fn from(b: &'a BeamSpectrum<T>) -> Self {
        PadpInput::Beam(b)
    }
}

impl<'a, T> From<&'a CfrMatrix<T>> for PadpInput<'a, T> {
    fn from(c: &'a CfrMatrix<T>) -> Self {
        PadpInput::Scan(c)
    }
}

/// Inverse-DFT every angle column to the delay domain.
///
/// A [`CfrMatrix`] must come from a directional scan; virtual-array CFRs are
/// beamformed first.
pub fn compute_padp<'a, T: Real>(input: impl Into<PadpInput<'a, T>>, cfg: &TransformConfig) -> Result<Padp<T>> {
    if cfg.zero_pad == 0 {
        return Err(Error::invalid("zero-pad factor must be at least 1"));
    }
    let (grid, angles, kind, columns): (FrequencyGrid<T>, Vec<T>, PadpKind, Vec<Vec<Complex<T>>>) = match input.into() {
        PadpInput::Beam(b) => {
            let cols = (0..b.angles_deg().len()).map(|j| b.data().column(j).to_vec()).collect();
            (*b.grid(), b.angles_deg().to_vec(), PadpKind::Vaa, cols)
        }
        PadpInput::Scan(c) => match c.layout() {
            CfrLayout::Dss { rotation_deg } => {
                let cols = (0..c.num_rows()).map(|m| c.data().row(m).to_vec()).collect();
                (*c.grid(), rotation_deg.clone(), PadpKind::Dss, cols)
            }
            CfrLayout::Vaa(_) => return Err(Error::WrongLayout { expected: "directional-scan" }),
        },
    };
    if columns.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("spectrum contains non-finite entries"));
    }

    let f = grid.len();
    let n = f * cfg.zero_pad;
    let weights: Vec<T> = cfg.window.weights(f);
    let coherent: T = weights.iter().copied().sum();
    let norm = coherent * coherent;
    let fft = FftPlanner::<T>::new().plan_fft_inverse(n);

    let powers: Vec<Vec<T>> = columns
        .par_iter()
        .map(|col| {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
            for ((slot, z), w) in buf.iter_mut().zip(col).zip(&weights) {
                *slot = *z * *w;
            }
            fft.process(&mut buf);
            buf.iter().map(|z| z.norm_sqr() / norm).collect()
        })
        .collect();

    let mut power = Array2::from_elem((n, angles.len()), T::zero());
    for (j, col) in powers.into_iter().enumerate() {
        for (m, p) in col.into_iter().enumerate() {
            power[[m, j]] = p;
        }
    }
    let dtau = T::one() / (T::from_usize_exact(n) * grid.step());
    let delay_s = (0..n).map(|m| T::from_usize_exact(m) * dtau).collect();
    Padp::from_parts(power, delay_s, angles, kind)
}

/// Aggregate power delay profile: maximum over angle per delay bin.
pub fn compute_pdp<T: Real>(padp: &Padp<T>) -> Vec<T> {
    padp.power
        .rows()
        .into_iter()
        .map(|row| row.iter().copied().fold(T::zero(), T::max))
        .collect()
}

/// Median power over the last 10 % of delay bins, all angles.
pub fn estimate_noise_floor<T: Real>(padp: &Padp<T>) -> Result<T> {
    let nd = padp.num_delays();
    if nd < 20 || padp.num_angles() == 0 {
        return Err(Error::DegenerateGrid(nd));
    }
    let tail = nd / 10;
    let mut cells: Vec<T> = padp
        .power
        .rows()
        .into_iter()
        .skip(nd - tail)
        .flat_map(|r| r.to_vec())
        .collect();
    cells.sort_by(|a, b| a.partial_cmp(b).expect("finite power"));
    let mid = cells.len() / 2;
    Ok(if cells.len() % 2 == 1 {
        cells[mid]
    } else {
        (cells[mid - 1] + cells[mid]) / T::lit(2.0)
    })
}

/// Local-maximum search settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakConfig<T> {
    /// Peaks must exceed the noise floor by this much.
    pub threshold_db_above_noise: T,
    /// Peaks must lie within this many dB of the global maximum.
    pub dynamic_range_db: T,
    pub delay_neighborhood: usize,
    pub angle_neighborhood: usize,
}

impl<T: Real> Default for PeakConfig<T> {
    fn default() -> Self {
        Self {
            threshold_db_above_noise: T::lit(6.0),
            dynamic_range_db: T::lit(25.0),
            delay_neighborhood: 1,
            angle_neighborhood: 1,
        }
    }
}

impl<T: Real> PeakConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.threshold_db_above_noise > T::zero()
            && self.dynamic_range_db > T::zero()
            && self.threshold_db_above_noise.is_finite()
            && self.dynamic_range_db.is_finite()
            && self.delay_neighborhood > 0
            && self.angle_neighborhood > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("peak thresholds and neighborhoods must be positive"))
        }
    }
}

/// Power a peak has to exceed: the larger of the noise gate and the
/// dynamic-range gate.
pub fn detection_threshold<T: Real>(padp: &Padp<T>, cfg: &PeakConfig<T>) -> Result<T> {
    let floor = estimate_noise_floor(padp)?;
    let noise_gate = floor * from_db(cfg.threshold_db_above_noise);
    let range_gate = padp.global_max() * from_db(-cfg.dynamic_range_db);
    Ok(noise_gate.max(range_gate))
}

/// Delay bins that are strict local maxima of the aggregate profile above the
/// detection threshold.
fn delay_peaks<T: Real>(pdp: &[T], threshold: T, reach: usize) -> Vec<usize> {
    (0..pdp.len())
        .filter(|&i| {
            pdp[i] > threshold && {
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(pdp.len() - 1);
                (lo..=hi).all(|k| k == i || pdp[i] > pdp[k])
            }
        })
        .collect()
}

fn is_cell_peak<T: Real>(power: &Array2<T>, i: usize, j: usize, cfg: &PeakConfig<T>) -> bool {
    let (nd, na) = power.dim();
    let v = power[[i, j]];
    let lo = i.saturating_sub(cfg.delay_neighborhood);
    let hi = (i + cfg.delay_neighborhood).min(nd - 1);
    let reach = cfg.angle_neighborhood.min(na / 2);
    for ii in lo..=hi {
        for dj in 0..=2 * reach {
            let jj = (j + na + dj - reach) % na;
            if (ii, jj) != (i, j) && !(v > power[[ii, jj]]) {
                return false;
            }
        }
    }
    true
}

fn sort_paths<T: Real>(paths: &mut [Path<T>]) {
    paths.sort_by(|a, b| {
        b.power()
            .partial_cmp(&a.power())
            .unwrap_or(Ordering::Equal)
            .then(a.delay_s.partial_cmp(&b.delay_s).unwrap_or(Ordering::Equal))
            .then(a.azimuth_deg.partial_cmp(&b.azimuth_deg).unwrap_or(Ordering::Equal))
    });
}

/// Multipath detection: local maxima of the aggregate PDP, then local maxima
/// along angle at each of those delays.
///
/// Every reported cell is a strict maximum of its `(2·delay_nb+1) × (2·angle_nb+1)`
/// neighbourhood (angle wraps around) and exceeds the detection threshold.
/// Paths come back by descending power, ties by delay then azimuth.
pub fn detect_paths<T: Real>(padp: &Padp<T>, cfg: &PeakConfig<T>) -> Result<PathSet<T>> {
    cfg.validate()?;
    let threshold = detection_threshold(padp, cfg)?;
    let pdp = compute_pdp(padp);
    let mut out = Vec::new();
    for i in delay_peaks(&pdp, threshold, cfg.delay_neighborhood) {
        for j in 0..padp.num_angles() {
            let p = padp.power[[i, j]];
            if p > threshold && is_cell_peak(&padp.power, i, j, cfg) {
                out.push(Path::detected(padp.angles_deg[j], padp.delay_s[i], p, (i, j)));
            }
        }
    }
    sort_paths(&mut out);
    Ok(PathSet::new(out))
}

/// Delay-only detection: one path per aggregate-PDP peak, placed at the
/// strongest angle of that delay bin.
pub fn detect_delay_peaks<T: Real>(padp: &Padp<T>, cfg: &PeakConfig<T>) -> Result<PathSet<T>> {
    cfg.validate()?;
    let threshold = detection_threshold(padp, cfg)?;
    let pdp = compute_pdp(padp);
    let mut out = Vec::new();
    for i in delay_peaks(&pdp, threshold, cfg.delay_neighborhood) {
        let row = padp.power.row(i);
        // first angle wins ties
        let mut best = 0;
        for j in 1..row.len() {
            if row[j] > row[best] {
                best = j;
            }
        }
        out.push(Path::detected(padp.angles_deg[best], padp.delay_s[i], row[best], (i, best)));
    }
    sort_paths(&mut out);
    Ok(PathSet::new(out))
}

/// Nearest delay bin of `delay_s` on a grid with step `step_s`.
pub fn delay_bin<T: Real>(delay_s: T, step_s: T) -> usize {
    (delay_s / step_s).round().to_usize().unwrap_or(0)
}

/// Wrapped azimuth of an angle bin, for reporting.
pub fn bin_azimuth<T: Real>(padp: &Padp<T>, angle_bin: usize) -> T {
    wrap_half_open(padp.angles_deg[angle_bin])
}
