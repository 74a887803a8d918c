//! Windowed classical beamforming over a uniform circular virtual array.
//!
//! The steering weight of element `p` toward azimuth `φ` is the conjugate of the
//! element's centre-offset phase, gated by a binary window that keeps only
//! elements within `B` degrees of the look direction:
//!
//! ```text
//! ω_p(f, φ) = exp(−j2π f r cos(φ − φ_p) / c) · s_p(φ),   s_p(φ) = [ |φ − φ_p| ≤ B ]
//! ```
//!
//! with the difference wrapped to `(−180°, 180°]`. Elements facing away from the
//! look direction would otherwise contribute through their back lobes only.

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;

use crate::angle::{uniform_circle, wrap_difference};
use crate::channel::{CfrLayout, CfrMatrix, FrequencyGrid, UcaGeometry};
use crate::error::{Error, Result};
use crate::patterns::AntennaPattern;
use crate::scalar::{to_db, Real};

/// Slack on the window edge so that angles landing on `±B` after rounding
/// stay inside.
pub const WINDOW_EDGE_TOLERANCE_DEG: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformConfig<T> {
    window_half_width_deg: T,
    steering_deg: Vec<T>,
}

impl<T: Real> BeamformConfig<T> {
    /// Arbitrary steering grid: strictly increasing, inside `[-180, 180)`.
    pub fn new(window_half_width_deg: T, steering_deg: Vec<T>) -> Result<Self> {
        check_window(window_half_width_deg)?;
        if steering_deg.is_empty() {
            return Err(Error::invalid("steering grid is empty"));
        }
        if steering_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("steering grid must be strictly increasing"));
        }
        let lo = T::lit(-180.0);
        let hi = T::lit(180.0);
        if steering_deg[0] < lo || steering_deg[steering_deg.len() - 1] >= hi {
            return Err(Error::invalid("steering grid must lie in [-180, 180)"));
        }
        Ok(Self {
            window_half_width_deg,
            steering_deg,
        })
    }

    /// `points` steering angles evenly covering `[-180°, 180°)`.
    pub fn uniform(window_half_width_deg: T, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::invalid("steering grid needs at least one point"));
        }
        Self::new(window_half_width_deg, uniform_circle(T::lit(-180.0), points))
    }

    /// `B = 90°` and one steering angle per element.
    pub fn for_geometry(geom: &UcaGeometry<T>) -> Self {
        Self::uniform(T::lit(90.0), geom.num_elements()).expect("valid default beamformer")
    }

    pub fn window_half_width_deg(&self) -> T {
        self.window_half_width_deg
    }

    pub fn steering_deg(&self) -> &[T] {
        &self.steering_deg
    }
}

fn check_window<T: Real>(b: T) -> Result<()> {
    if b > T::zero() && b <= T::lit(180.0) {
        Ok(())
    } else {
        Err(Error::invalid(format!("window half-width must lie in (0, 180], got {b}")))
    }
}

/// `s_p(φ)`: true when element `p` lies within `B` of the look direction.
#[inline]
pub fn in_window<T: Real>(steer_deg: T, element_deg: T, half_width_deg: T) -> bool {
    wrap_difference(steer_deg - element_deg).abs() <= half_width_deg + T::lit(WINDOW_EDGE_TOLERANCE_DEG)
}

/// Weight of element `p` (zero-based) toward `steer_deg` at `freq_hz`.
pub fn steering_weight<T: Real>(
    geom: &UcaGeometry<T>,
    freq_hz: T,
    steer_deg: T,
    p: usize,
    half_width_deg: T,
) -> Complex<T> {
    let phi_p = geom.element_angles_deg()[p];
    if !in_window(steer_deg, phi_p, half_width_deg) {
        return Complex::new(T::zero(), T::zero());
    }
    let cycles = geom.centre_offset_cycles(freq_hz, wrap_difference(steer_deg - phi_p));
    Complex::from_polar(T::one(), -T::TAU() * cycles)
}

/// Elements inside the window of `steer_deg`, in ascending index order.
pub fn window_elements<T: Real>(geom: &UcaGeometry<T>, steer_deg: T, half_width_deg: T) -> Vec<usize> {
    geom.element_angles_deg()
        .iter()
        .enumerate()
        .filter(|(_, &phi)| in_window(steer_deg, phi, half_width_deg))
        .map(|(p, _)| p)
        .collect()
}

/// Beamformed spectrum `Q(f, φ)`, `F × Nφ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSpectrum<T> {
    data: Array2<Complex<T>>,
    grid: FrequencyGrid<T>,
    angles_deg: Vec<T>,
}

impl<T: Real> BeamSpectrum<T> {
    pub fn data(&self) -> &Array2<Complex<T>> {
        &self.data
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn angles_deg(&self) -> &[T] {
        &self.angles_deg
    }
}

/// `Q(f, φ) = Σ_p ω_p(f, φ) · H_p(f)`.
///
/// Each entry is summed over elements in ascending order, so the result does
/// not depend on how steering angles are spread over worker threads.
pub fn beamform_spectrum<T: Real>(cfr: &CfrMatrix<T>, cfg: &BeamformConfig<T>) -> Result<BeamSpectrum<T>> {
    let geom = match cfr.layout() {
        CfrLayout::Vaa(g) => g,
        CfrLayout::Dss { .. } => return Err(Error::WrongLayout { expected: "virtual-array" }),
    };
    let freqs = cfr.grid().freqs();
    let h = cfr.data();
    let b = cfg.window_half_width_deg();
    let columns: Vec<Vec<Complex<T>>> = cfg
        .steering_deg()
        .par_iter()
        .map(|&steer| {
            let mut acc = vec![Complex::new(T::zero(), T::zero()); freqs.len()];
            for p in window_elements(geom, steer, b) {
                let rel = wrap_difference(steer - geom.element_angles_deg()[p]);
                let row = h.row(p);
                for (n, (&f, slot)) in freqs.iter().zip(acc.iter_mut()).enumerate() {
                    let w = Complex::from_polar(T::one(), -T::TAU() * geom.centre_offset_cycles(f, rel));
                    *slot = *slot + w * row[n];
                }
            }
            acc
        })
        .collect();
    let mut data = Array2::from_elem((freqs.len(), columns.len()), Complex::new(T::zero(), T::zero()));
    for (j, col) in columns.into_iter().enumerate() {
        for (n, v) in col.into_iter().enumerate() {
            data[[n, j]] = v;
        }
    }
    Ok(BeamSpectrum {
        data,
        grid: *cfr.grid(),
        angles_deg: cfg.steering_deg().to_vec(),
    })
}

/// Unit beam pattern of a plane wave from `path_deg`:
/// `υ(f, φ) = Σ_p a_p(f, path) · ω_p(f, φ)` for every `φ` in `steer_deg`.
pub fn array_beam_pattern<T: Real>(
    geom: &UcaGeometry<T>,
    elem: &AntennaPattern<T>,
    freq_hz: T,
    path_deg: T,
    steer_deg: &[T],
    half_width_deg: T,
) -> Vec<Complex<T>> {
    let response: Vec<Complex<T>> = geom
        .element_angles_deg()
        .iter()
        .map(|&phi_p| {
            let rel = wrap_difference(path_deg - phi_p);
            let phase = Complex::from_polar(T::one(), T::TAU() * geom.centre_offset_cycles(freq_hz, rel));
            phase * elem.eval(freq_hz, rel)
        })
        .collect();
    steer_deg
        .par_iter()
        .map(|&steer| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (p, a) in response.iter().enumerate() {
                let w = steering_weight(geom, freq_hz, steer, p, half_width_deg);
                acc = acc + *a * w;
            }
            acc
        })
        .collect()
}

/// `|υ(f, φ_k)|` with the beam steered at the path itself.
pub fn array_gain<T: Real>(
    geom: &UcaGeometry<T>,
    elem: &AntennaPattern<T>,
    freq_hz: T,
    path_deg: T,
    half_width_deg: T,
) -> T {
    array_beam_pattern(geom, elem, freq_hz, path_deg, &[path_deg], half_width_deg)[0].norm()
}

/// Main-lobe width and first side-lobe of an array beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamShape<T> {
    pub peak_gain: T,
    /// Half-power beamwidth, −3 dB crossings interpolated linearly in dB.
    pub hpbw_deg: T,
    /// Highest of the two first side-lobes, dB relative to the main lobe.
    pub first_sidelobe_db: T,
}

/// Scans the beam pattern of a path at `path_deg` with steering offsets on a
/// `step_deg` grid over the full circle and measures its shape.
pub fn scan_beam_shape<T: Real>(
    geom: &UcaGeometry<T>,
    elem: &AntennaPattern<T>,
    freq_hz: T,
    path_deg: T,
    half_width_deg: T,
    step_deg: T,
) -> BeamShape<T> {
    let half = (T::lit(180.0) / step_deg).floor().to_usize().expect("positive step");
    let offsets: Vec<T> = (0..=2 * half)
        .map(|i| step_deg * (T::from_usize_exact(i) - T::from_usize_exact(half)))
        .collect();
    let steer: Vec<T> = offsets.iter().map(|&o| path_deg + o).collect();
    let pattern = array_beam_pattern(geom, elem, freq_hz, path_deg, &steer, half_width_deg);
    let peak = pattern[half].norm();
    let db: Vec<T> = pattern.iter().map(|v| to_db(v.norm_sqr() / (peak * peak))).collect();
    let three = T::lit(-3.0);

    let crossing = |dir: isize| -> T {
        let mut i = half as isize;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= db.len() {
                return offsets[i as usize].abs();
            }
            let (a, b) = (db[i as usize], db[next as usize]);
            if b < three {
                let t = (a - three) / (a - b);
                let oa = offsets[i as usize].abs();
                return oa + t * step_deg;
            }
            i = next;
        }
    };
    let hpbw = crossing(-1) + crossing(1);

    let sidelobe = |dir: isize| -> T {
        let mut i = half as isize;
        let inside = |k: isize| k >= 0 && (k as usize) < db.len();
        // down the main lobe to the first null
        while inside(i + dir) && db[(i + dir) as usize] <= db[i as usize] {
            i += dir;
        }
        // up to the side-lobe peak
        while inside(i + dir) && db[(i + dir) as usize] >= db[i as usize] {
            i += dir;
        }
        db[i as usize]
    };
    let first_sidelobe_db = sidelobe(-1).max(sidelobe(1));
    BeamShape {
        peak_gain: peak,
        hpbw_deg: hpbw,
        first_sidelobe_db,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synth_vaa_cfr, Path, PathSet};
    use crate::scalar::SPEED_OF_LIGHT;

    fn geom() -> UcaGeometry<f64> {
        UcaGeometry::new(240, 0.15).unwrap()
    }

    #[test]
    fn window_excludes_far_elements() {
        let g = geom();
        // element 80 sits at 120°
        assert_eq!(steering_weight(&g, 29e9, 0.0, 80, 90.0), Complex::new(0.0, 0.0));
        // boundary |Δ| = 90° is included
        assert_ne!(steering_weight(&g, 29e9, 0.0, 60, 90.0), Complex::new(0.0, 0.0));
        assert_eq!(steering_weight(&g, 29e9, 0.0, 61, 90.0), Complex::new(0.0, 0.0));
    }

    #[test]
    fn weight_at_element_direction() {
        let g = geom();
        let w = steering_weight(&g, 29e9, 0.0, 0, 90.0);
        let cycles = 29e9 * 0.15 / SPEED_OF_LIGHT;
        let want = Complex::from_polar(1.0, -std::f64::consts::TAU * cycles);
        assert!((w - want).norm() < 1e-12);
        // ≈ -1 since the offset is close to 14.5 cycles
        assert!(w.re < -0.99);
    }

    #[test]
    fn window_cardinality_is_121() {
        let g = geom();
        for j in 0..240 {
            let steer = -180.0 + 1.5 * j as f64;
            assert_eq!(window_elements(&g, steer, 90.0).len(), 121);
        }
        assert_eq!(window_elements(&g, 0.0, 180.0).len(), 240);
    }

    #[test]
    fn isotropic_array_gain() {
        let g = geom();
        let iso = AntennaPattern::isotropic();
        let gain = array_gain(&g, &iso, 29e9, 0.0, 90.0);
        assert!((gain - 121.0).abs() < 1e-9, "{gain}");
        let collapsed = UcaGeometry::collapsed(240).unwrap();
        assert!((array_gain(&collapsed, &iso, 29e9, 0.0, 180.0) - 240.0).abs() < 1e-9);
    }

    #[test]
    fn main_lobe_dominates_grid() {
        let g = geom();
        let elem = AntennaPattern::gaussian(40.0, 13.5).unwrap();
        let steer = uniform_circle(-180.0, 240);
        for elem in [AntennaPattern::isotropic(), elem] {
            let pat = array_beam_pattern(&g, &elem, 29e9, 30.0, &steer, 90.0);
            let peak = pat[140].norm();
            assert_eq!(steer[140], 30.0);
            assert!(pat.iter().all(|v| v.norm() <= peak + 1e-9));
        }
    }

    #[test]
    fn dss_input_rejected() {
        let grid = FrequencyGrid::new(28e9, 30e9, 11).unwrap();
        let cfr = crate::channel::synth_dss_cfr(
            &PathSet::new(vec![Path::new(0.0, 1e-9, Complex::new(1.0, 0.0))]),
            &[0.0, 90.0],
            &AntennaPattern::isotropic(),
            &grid,
        )
        .unwrap();
        let cfg = BeamformConfig::uniform(90.0, 4).unwrap();
        assert!(matches!(beamform_spectrum(&cfr, &cfg), Err(Error::WrongLayout { .. })));
    }

    #[test]
    fn coherent_sum_single_path() {
        let g = geom();
        let grid = FrequencyGrid::new(28e9, 30e9, 21).unwrap();
        let truth = PathSet::new(vec![Path::new(-45.0, 7e-9, Complex::new(1.0, 0.0))]);
        let cfr = synth_vaa_cfr(&truth, &g, &AntennaPattern::isotropic(), &grid).unwrap();
        let cfg = BeamformConfig::for_geometry(&g);
        let q = beamform_spectrum(&cfr, &cfg).unwrap();
        let j = cfg.steering_deg().iter().position(|&a| a == -45.0).unwrap();
        for n in 0..grid.len() {
            assert!((q.data()[[n, j]].norm() - 121.0).abs() < 1e-9);
        }
    }

    #[test]
    fn config_validation() {
        assert!(BeamformConfig::<f64>::uniform(0.0, 10).is_err());
        assert!(BeamformConfig::<f64>::uniform(181.0, 10).is_err());
        assert!(BeamformConfig::<f64>::uniform(180.0, 10).is_ok());
        assert!(BeamformConfig::new(90.0, vec![0.0, 0.0]).is_err());
        assert!(BeamformConfig::new(90.0, vec![0.0, 180.0]).is_err());
        assert!(BeamformConfig::<f64>::new(90.0, vec![]).is_err());
    }
}
