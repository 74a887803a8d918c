//! Channel frequency response synthesis for the virtual-array and
//! directional-scan sounding schemes, plus the reference pathloss quantities.

use ndarray::Array2;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::angle::{uniform_circle, wrap_difference, wrap_half_open};
use crate::error::{Error, Result};
use crate::patterns::AntennaPattern;
use crate::scalar::{frac_product, to_db, Real, SPEED_OF_LIGHT};

/// Uniform circular array: `P` elements on a circle of radius `r`, element
/// `p` (zero-based) at `360°·p/P`.
#[derive(Debug, Clone, PartialEq)]
pub struct UcaGeometry<T> {
    radius_m: T,
    element_angles_deg: Vec<T>,
}

impl<T: Real> UcaGeometry<T> {
    pub fn new(num_elements: usize, radius_m: T) -> Result<Self> {
        if num_elements < 3 {
            return Err(Error::invalid(format!(
                "a circular array needs at least 3 elements, got {num_elements}"
            )));
        }
        if !(radius_m > T::zero() && radius_m.is_finite()) {
            return Err(Error::invalid(format!("array radius must be positive, got {radius_m}")));
        }
        Ok(Self {
            radius_m,
            element_angles_deg: uniform_circle(T::zero(), num_elements),
        })
    }

    /// Degenerate zero-radius array. Only useful to check that the virtual
    /// array collapses onto the rotating-antenna model.
    pub fn collapsed(num_elements: usize) -> Result<Self> {
        let mut g = Self::new(num_elements, T::one())?;
        g.radius_m = T::zero();
        Ok(g)
    }

    pub fn num_elements(&self) -> usize {
        self.element_angles_deg.len()
    }

    pub fn radius_m(&self) -> T {
        self.radius_m
    }

    pub fn element_angles_deg(&self) -> &[T] {
        &self.element_angles_deg
    }

    /// Element spacing in degrees.
    pub fn spacing_deg(&self) -> T {
        T::lit(360.0) / T::from_usize_exact(self.num_elements())
    }

    /// Phase of the element transfer function relative to the array centre,
    /// in cycles: `f·r·cos(φ − φ_p)/c`, reduced to `[-0.5, 0.5]`.
    #[inline]
    pub(crate) fn centre_offset_cycles(&self, freq_hz: T, relative_deg: T) -> T {
        let tau = self.radius_m * relative_deg.to_radians().cos() / T::lit(SPEED_OF_LIGHT);
        frac_product(freq_hz, tau)
    }
}

/// Uniform frequency sweep `[f_lower, f_upper]` with `num_points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid<T> {
    f_lower: T,
    f_upper: T,
    num_points: usize,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(f_lower: T, f_upper: T, num_points: usize) -> Result<Self> {
        if num_points < 2 {
            return Err(Error::invalid(format!(
                "frequency grid needs at least 2 points, got {num_points}"
            )));
        }
        if !(f_lower > T::zero() && f_upper > f_lower && f_upper.is_finite()) {
            return Err(Error::invalid(format!(
                "frequency grid requires 0 < f_lower < f_upper, got [{f_lower}, {f_upper}]"
            )));
        }
        Ok(Self {
            f_lower,
            f_upper,
            num_points,
        })
    }

    pub fn f_lower(&self) -> T {
        self.f_lower
    }

    pub fn f_upper(&self) -> T {
        self.f_upper
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> T {
        (self.f_upper - self.f_lower) / T::from_usize_exact(self.num_points - 1)
    }

    pub fn freq(&self, n: usize) -> T {
        self.f_lower + self.step() * T::from_usize_exact(n)
    }

    pub fn freqs(&self) -> Vec<T> {
        let step = self.step();
        (0..self.num_points)
            .map(|n| self.f_lower + step * T::from_usize_exact(n))
            .collect()
    }

    pub fn center(&self) -> T {
        (self.f_lower + self.f_upper) / T::lit(2.0)
    }

    /// Largest delay representable without aliasing, `1/Δf`.
    pub fn unambiguous_delay_s(&self) -> T {
        T::one() / self.step()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathWeight<T> {
    /// Complex path amplitude (ground truth).
    Amplitude(Complex<T>),
    /// Linear power (detected).
    Power(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    /// Wrapped to `[-180, 180)`.
    pub azimuth_deg: T,
    pub delay_s: T,
    pub weight: PathWeight<T>,
    /// `(delay_bin, angle_bin)` of the profile cell a detected path came from.
    pub cell: Option<(usize, usize)>,
}

impl<T: Real> Path<T> {
    pub fn new(azimuth_deg: T, delay_s: T, amplitude: Complex<T>) -> Self {
        Self {
            azimuth_deg: wrap_half_open(azimuth_deg),
            delay_s,
            weight: PathWeight::Amplitude(amplitude),
            cell: None,
        }
    }

    /// Path with power in dB and phase in degrees.
    pub fn from_db(azimuth_deg: T, delay_s: T, power_db: T, phase_deg: T) -> Self {
        let amp = T::lit(10.0).powf(power_db / T::lit(20.0));
        Self::new(azimuth_deg, delay_s, Complex::from_polar(amp, phase_deg.to_radians()))
    }

    pub fn detected(azimuth_deg: T, delay_s: T, power: T, cell: (usize, usize)) -> Self {
        Self {
            azimuth_deg: wrap_half_open(azimuth_deg),
            delay_s,
            weight: PathWeight::Power(power),
            cell: Some(cell),
        }
    }

    pub fn power(&self) -> T {
        match self.weight {
            PathWeight::Amplitude(a) => a.norm_sqr(),
            PathWeight::Power(p) => p,
        }
    }

    pub fn amplitude(&self) -> Option<Complex<T>> {
        match self.weight {
            PathWeight::Amplitude(a) => Some(a),
            PathWeight::Power(_) => None,
        }
    }
}

/// Ground-truth or detected multipath.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet<T> {
    paths: Vec<Path<T>>,
}

impl<T: Real> PathSet<T> {
    pub fn new(paths: Vec<Path<T>>) -> Self {
        Self { paths }
    }

    pub fn empty() -> Self {
        Self { paths: Vec::new() }
    }

    pub fn push(&mut self, path: Path<T>) {
        self.paths.push(path);
    }

    pub fn paths(&self) -> &[Path<T>] {
        &self.paths
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Path<T>> {
        self.paths.iter()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn total_power(&self) -> T {
        self.paths.iter().map(Path::power).sum()
    }

    /// Concatenation, `self` first.
    pub fn union(&self, other: &Self) -> Self {
        let mut paths = self.paths.clone();
        paths.extend(other.paths.iter().cloned());
        Self { paths }
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let paths = self
            .paths
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.weight = match p.weight {
                    PathWeight::Amplitude(a) => PathWeight::Amplitude(a * factor),
                    PathWeight::Power(w) => PathWeight::Power(w * factor.norm_sqr()),
                };
                q
            })
            .collect();
        Self { paths }
    }

    fn amplitudes(&self) -> Result<Vec<(T, T, Complex<T>)>> {
        self.paths
            .iter()
            .map(|p| {
                p.amplitude()
                    .map(|a| (p.azimuth_deg, p.delay_s, a))
                    .ok_or(Error::NotAmplitudes)
            })
            .collect()
    }
}

impl<T> FromIterator<Path<T>> for PathSet<T> {
    fn from_iter<I: IntoIterator<Item = Path<T>>>(iter: I) -> Self {
        Self {
            paths: iter.into_iter().collect(),
        }
    }
}

impl<'a, T> IntoIterator for &'a PathSet<T> {
    type Item = &'a Path<T>;
    type IntoIter = std::slice::Iter<'a, Path<T>>;
    fn into_iter(self) -> Self::IntoIter {
        self.paths.iter()
    }
}

/// Which sounding scheme produced the rows of a [`CfrMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub enum CfrLayout<T> {
    /// Row `p` is virtual element `p` of the array.
    Vaa(UcaGeometry<T>),
    /// Row `m` is the antenna at the rotation centre pointed at `rotation_deg[m]`.
    Dss { rotation_deg: Vec<T> },
}

impl<T> CfrLayout<T> {
    pub fn label(&self) -> &'static str {
        match self {
            CfrLayout::Vaa(_) => "vaa",
            CfrLayout::Dss { .. } => "dss",
        }
    }
}

/// `P×F` complex channel frequency responses.
#[derive(Debug, Clone, PartialEq)]
pub struct CfrMatrix<T> {
    data: Array2<Complex<T>>,
    grid: FrequencyGrid<T>,
    layout: CfrLayout<T>,
}

impl<T: Real> CfrMatrix<T> {
    pub fn new(data: Array2<Complex<T>>, grid: FrequencyGrid<T>, layout: CfrLayout<T>) -> Result<Self> {
        let rows = match &layout {
            CfrLayout::Vaa(g) => g.num_elements(),
            CfrLayout::Dss { rotation_deg } => rotation_deg.len(),
        };
        if data.dim() != (rows, grid.len()) {
            return Err(Error::Dimension(format!(
                "CFR matrix is {:?}, layout/grid require ({rows}, {})",
                data.dim(),
                grid.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("CFR matrix contains NaN or infinite entries"));
        }
        Ok(Self { data, grid, layout })
    }

    pub fn data(&self) -> &Array2<Complex<T>> {
        &self.data
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn layout(&self) -> &CfrLayout<T> {
        &self.layout
    }

    pub fn num_rows(&self) -> usize {
        self.data.nrows()
    }

    /// Re-tags the rows, e.g. after loading sweeps that carry no geometry.
    pub fn with_layout(self, layout: CfrLayout<T>) -> Result<Self> {
        Self::new(self.data, self.grid, layout)
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(mut self, factor: T) -> Self {
        self.data.mapv_inplace(|z| z * factor);
        self
    }
}

fn check_delays<T: Real>(paths: &[(T, T, Complex<T>)], grid: &FrequencyGrid<T>) -> Result<()> {
    let range = grid.unambiguous_delay_s();
    for &(_, delay, _) in paths {
        if !(delay >= T::zero()) {
            return Err(Error::invalid(format!("path delay must be non-negative, got {delay}")));
        }
        if delay >= range {
            return Err(Error::DelayAliasing {
                delay_s: delay.as_f64(),
                range_s: range.as_f64(),
            });
        }
    }
    Ok(())
}

fn synth_rows<T, F>(rows: usize, grid: &FrequencyGrid<T>, row: F) -> Array2<Complex<T>>
where
    T: Real,
    F: Fn(usize, &[T]) -> Vec<Complex<T>> + Sync,
{
    let freqs = grid.freqs();
    let computed: Vec<Vec<Complex<T>>> = (0..rows).into_par_iter().map(|p| row(p, &freqs)).collect();
    let mut data = Array2::from_elem((rows, freqs.len()), Complex::new(T::zero(), T::zero()));
    for (p, r) in computed.into_iter().enumerate() {
        for (n, v) in r.into_iter().enumerate() {
            data[[p, n]] = v;
        }
    }
    data
}

/// Virtual-array CFR:
/// `H_p(f) = Σ_k α_k e^{−j2πfτ_k} · e^{j2πf r cos(φ_k−φ_p)/c} · g(f, φ_k−φ_p)`.
pub fn synth_vaa_cfr<T: Real>(
    truth: &PathSet<T>,
    geom: &UcaGeometry<T>,
    elem: &AntennaPattern<T>,
    grid: &FrequencyGrid<T>,
) -> Result<CfrMatrix<T>> {
    let paths = truth.amplitudes()?;
    check_delays(&paths, grid)?;
    let two_pi = T::TAU();
    let data = synth_rows(geom.num_elements(), grid, |p, freqs| {
        let phi_p = geom.element_angles_deg()[p];
        let rel: Vec<T> = paths.iter().map(|&(az, _, _)| wrap_difference(az - phi_p)).collect();
        freqs
            .iter()
            .map(|&f| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (&(_, delay, alpha), &d) in paths.iter().zip(&rel) {
                    let cycles = frac_product(f, delay) - geom.centre_offset_cycles(f, d);
                    let phasor = Complex::from_polar(T::one(), -two_pi * cycles);
                    acc = acc + alpha * phasor * elem.eval(f, d);
                }
                acc
            })
            .collect()
    });
    CfrMatrix::new(data, *grid, CfrLayout::Vaa(geom.clone()))
}

/// Directional-scan CFR with the antenna at the rotation centre:
/// `H(f, θ_m) = Σ_k α_k e^{−j2πfτ_k} · g(f, φ_k−θ_m)`.
pub fn synth_dss_cfr<T: Real>(
    truth: &PathSet<T>,
    rotation_deg: &[T],
    elem: &AntennaPattern<T>,
    grid: &FrequencyGrid<T>,
) -> Result<CfrMatrix<T>> {
    if rotation_deg.is_empty() {
        return Err(Error::invalid("at least one rotation angle is required"));
    }
    let paths = truth.amplitudes()?;
    check_delays(&paths, grid)?;
    let two_pi = T::TAU();
    let data = synth_rows(rotation_deg.len(), grid, |m, freqs| {
        let theta = rotation_deg[m];
        let rel: Vec<T> = paths.iter().map(|&(az, _, _)| wrap_difference(az - theta)).collect();
        freqs
            .iter()
            .map(|&f| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (&(_, delay, alpha), &d) in paths.iter().zip(&rel) {
                    let phasor = Complex::from_polar(T::one(), -two_pi * frac_product(f, delay));
                    acc = acc + alpha * phasor * elem.eval(f, d);
                }
                acc
            })
            .collect()
    });
    CfrMatrix::new(
        data,
        *grid,
        CfrLayout::Dss {
            rotation_deg: rotation_deg.to_vec(),
        },
    )
}

/// Adds i.i.d. circularly-symmetric complex Gaussian noise of power
/// `10^(noise_power_db/10)` per sample. `-inf` disables noise.
///
/// Samples are drawn row-major from a ChaCha8 stream seeded with `seed`.
pub fn add_noise<T: Real>(cfr: &CfrMatrix<T>, noise_power_db: T, seed: u64) -> Result<CfrMatrix<T>> {
    if noise_power_db == T::neg_infinity() {
        return Ok(cfr.clone());
    }
    if !noise_power_db.is_finite() {
        return Err(Error::invalid(format!("noise power must be finite or -inf, got {noise_power_db}")));
    }
    let sigma = (T::lit(10.0).powf(noise_power_db / T::lit(10.0)) / T::lit(2.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = cfr.clone();
    for z in out.data.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z = *z + Complex::new(T::lit(re), T::lit(im)) * sigma;
    }
    Ok(out)
}

/// Friis free-space loss `20·log10(4π d f / c)` in dB.
pub fn free_space_pathloss_db<T: Real>(distance_m: T, freq_hz: T) -> Result<T> {
    if !(distance_m > T::zero() && freq_hz > T::zero()) {
        return Err(Error::invalid(format!(
            "free-space loss needs positive distance and frequency, got d={distance_m}, f={freq_hz}"
        )));
    }
    Ok(T::lit(20.0) * (T::lit(4.0) * T::PI() * distance_m * freq_hz / T::lit(SPEED_OF_LIGHT)).log10())
}

/// Omni pathloss of the ground truth: `−10·log10(Σ_k |α_k|²)`.
pub fn true_omni_pathloss_db<T: Real>(truth: &PathSet<T>) -> Result<T> {
    if truth.is_empty() {
        return Err(Error::EmptyPathSet);
    }
    let total: T = truth.amplitudes()?.iter().map(|(_, _, a)| a.norm_sqr()).sum();
    Ok(-to_db(total))
}
