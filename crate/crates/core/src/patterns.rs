//! 2-D complex radiation patterns.
//!
//! A pattern is split into a boresight-normalized complex shape `g(f, φ)` and a
//! nominal boresight gain in dBi. The shape satisfies `max_φ |g(f, φ)| = 1` for
//! every frequency, so array and scan gains computed from it are purely
//! geometric; the nominal gain enters only in link-budget bookkeeping.
//!
//! Tabulated patterns interpolate linearly in magnitude (dB) and unwrapped
//! phase (degrees) along angle with wraparound across ±180°, and pick the
//! nearest tabulated frequency.

use std::path::Path;

use num_complex::Complex;

use crate::angle::{wrap_difference, wrap_half_open};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum PatternKind<T> {
    Isotropic,
    Gaussian { hpbw_deg: T },
    Tabulated(PatternTable<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPattern<T> {
    kind: PatternKind<T>,
    gain_dbi: T,
}

/// Pattern samples at one frequency, normalized so the peak is 0 dB.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBlock<T> {
    pub freq_hz: T,
    pub angles_deg: Vec<T>,
    pub mag_db: Vec<T>,
    /// Unwrapped along angle.
    pub phase_deg: Vec<T>,
    /// Peak magnitude removed during normalization.
    pub peak_db: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable<T> {
    blocks: Vec<FrequencyBlock<T>>,
    base_gain_dbi: T,
}

impl<T: Real> AntennaPattern<T> {
    pub fn isotropic() -> Self {
        Self {
            kind: PatternKind::Isotropic,
            gain_dbi: T::zero(),
        }
    }

    /// Frequency-independent Gaussian beam with zero phase.
    ///
    /// Power pattern is `exp(-4 ln2 (φ/hpbw)²)` with `φ` wrapped to `(-180°, 180°]`.
    pub fn gaussian(hpbw_deg: T, gain_dbi: T) -> Result<Self> {
        if !(hpbw_deg > T::zero() && hpbw_deg < T::lit(360.0)) {
            return Err(Error::invalid(format!(
                "hpbw_deg must lie in (0, 360), got {hpbw_deg}"
            )));
        }
        check_gain(gain_dbi)?;
        Ok(Self {
            kind: PatternKind::Gaussian { hpbw_deg },
            gain_dbi,
        })
    }

    pub fn tabulated(table: PatternTable<T>) -> Self {
        let gain_dbi = table.nominal_gain_dbi();
        Self {
            kind: PatternKind::Tabulated(table),
            gain_dbi,
        }
    }

    pub fn kind(&self) -> &PatternKind<T> {
        &self.kind
    }

    /// Nominal boresight gain in dBi.
    pub fn gain_dbi(&self) -> T {
        self.gain_dbi
    }

    /// Boresight gain in dBi at a given frequency (differs from
    /// [`gain_dbi`](Self::gain_dbi) only for multi-frequency tables).
    pub fn gain_dbi_at(&self, freq_hz: T) -> T {
        match &self.kind {
            PatternKind::Tabulated(t) => t.base_gain_dbi + t.nearest(freq_hz).peak_db,
            _ => self.gain_dbi,
        }
    }

    /// Replaces the nominal gain, keeping the shape.
    pub fn with_gain_dbi(mut self, gain_dbi: T) -> Result<Self> {
        check_gain(gain_dbi)?;
        if let PatternKind::Tabulated(t) = &mut self.kind {
            let peak = t.nominal_peak_db();
            t.base_gain_dbi = gain_dbi - peak;
        }
        self.gain_dbi = gain_dbi;
        Ok(self)
    }

    /// Normalized complex pattern `g(f, φ)`; `azimuth_deg` is relative to boresight.
    pub fn eval(&self, freq_hz: T, azimuth_deg: T) -> Complex<T> {
        match &self.kind {
            PatternKind::Isotropic => Complex::new(T::one(), T::zero()),
            PatternKind::Gaussian { hpbw_deg } => {
                let x = wrap_difference(azimuth_deg) / *hpbw_deg;
                let amp = (-T::lit(2.0) * T::LN_2() * x * x).exp();
                Complex::new(amp, T::zero())
            }
            PatternKind::Tabulated(t) => t.eval(freq_hz, azimuth_deg),
        }
    }

    /// Power pattern `|g(f, φ)|²`.
    pub fn power(&self, freq_hz: T, azimuth_deg: T) -> T {
        self.eval(freq_hz, azimuth_deg).norm_sqr()
    }

    /// Loads a tabulated pattern from the pattern CSV format.
    ///
    /// `mag_db` values are taken relative to `base_gain_dbi`; the per-frequency
    /// peak is stripped from the shape and folded into the nominal gain.
    pub fn load(path: impl AsRef<Path>, base_gain_dbi: T) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading pattern {}", path.display()), e))?;
        let table = PatternTable::parse_csv(&text, path, base_gain_dbi)?;
        Ok(Self::tabulated(table))
    }
}

fn check_gain<T: Real>(gain_dbi: T) -> Result<()> {
    if gain_dbi.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("antenna gain must be finite"))
    }
}

impl<T: Real> PatternTable<T> {
    /// Builds a table from raw per-frequency samples (angles strictly increasing
    /// inside a block, spanning less than 360°).
    pub fn from_blocks(
        raw: Vec<(T, Vec<(T, T, T)>)>,
        base_gain_dbi: T,
    ) -> Result<Self> {
        check_gain(base_gain_dbi)?;
        if raw.is_empty() {
            return Err(Error::invalid("pattern table is empty"));
        }
        let mut blocks = Vec::with_capacity(raw.len());
        for (freq_hz, samples) in raw {
            blocks.push(FrequencyBlock::new(freq_hz, samples)?);
        }
        blocks.sort_by(|a, b| a.freq_hz.partial_cmp(&b.freq_hz).expect("finite frequency"));
        if blocks.windows(2).any(|w| w[0].freq_hz == w[1].freq_hz) {
            return Err(Error::invalid("duplicate frequency block in pattern table"));
        }
        Ok(Self {
            blocks,
            base_gain_dbi,
        })
    }

    /// Parses the `angle_deg,freq_hz,mag_db,phase_deg` CSV layout. The phase
    /// column may be omitted or left empty (0°).
    pub fn parse_csv(text: &str, origin: &Path, base_gain_dbi: T) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| perr(1, e.to_string()))?
            .clone();
        let cols: Vec<&str> = headers.iter().collect();
        let has_phase = match cols.as_slice() {
            ["angle_deg", "freq_hz", "mag_db", "phase_deg"] => true,
            ["angle_deg", "freq_hz", "mag_db"] => false,
            _ => {
                return Err(perr(
                    1,
                    format!("expected header `angle_deg,freq_hz,mag_db,phase_deg`, got `{}`", cols.join(",")),
                ))
            }
        };

        let mut raw: Vec<(T, Vec<(T, T, T)>)> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                perr(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let want = if has_phase { 4 } else { 3 };
            if record.len() != want && !(has_phase && record.len() == 3) {
                return Err(perr(line, format!("expected {want} fields, got {}", record.len())));
            }
            let field = |i: usize, name: &str| -> Result<T> {
                let s = record.get(i).unwrap_or("");
                if s.is_empty() && i == 3 {
                    return Ok(T::zero());
                }
                let v: f64 = s
                    .parse()
                    .map_err(|_| perr(line, format!("invalid {name} `{s}`")))?;
                if !v.is_finite() {
                    return Err(perr(line, format!("non-finite {name}")));
                }
                Ok(T::lit(v))
            };
            let angle = field(0, "angle_deg")?;
            let freq = field(1, "freq_hz")?;
            let mag = field(2, "mag_db")?;
            let phase = if record.len() > 3 { field(3, "phase_deg")? } else { T::zero() };

            match raw.iter_mut().find(|(f, _)| *f == freq) {
                Some((_, samples)) => {
                    let last = samples.last().expect("non-empty block").0;
                    if angle <= last {
                        return Err(perr(
                            line,
                            format!("angle_deg not strictly increasing ({angle} after {last})"),
                        ));
                    }
                    samples.push((angle, mag, phase));
                }
                None => raw.push((freq, vec![(angle, mag, phase)])),
            }
        }
        if raw.is_empty() {
            return Err(perr(1, "pattern file has no samples".into()));
        }
        Self::from_blocks(raw, base_gain_dbi).map_err(|e| perr(0, e.to_string()))
    }

    pub fn blocks(&self) -> &[FrequencyBlock<T>] {
        &self.blocks
    }

    fn nearest(&self, freq_hz: T) -> &FrequencyBlock<T> {
        // ties resolve to the lower frequency
        let mut best = &self.blocks[0];
        for b in &self.blocks[1..] {
            if (b.freq_hz - freq_hz).abs() < (best.freq_hz - freq_hz).abs() {
                best = b;
            }
        }
        best
    }

    /// Peak of the block at the middle of the tabulated frequency span.
    fn nominal_peak_db(&self) -> T {
        let lo = self.blocks[0].freq_hz;
        let hi = self.blocks[self.blocks.len() - 1].freq_hz;
        self.nearest((lo + hi) / T::lit(2.0)).peak_db
    }

    fn nominal_gain_dbi(&self) -> T {
        self.base_gain_dbi + self.nominal_peak_db()
    }

    fn eval(&self, freq_hz: T, azimuth_deg: T) -> Complex<T> {
        let block = self.nearest(freq_hz);
        let (mag_db, phase_deg) = block.interpolate(azimuth_deg);
        let amp = T::lit(10.0).powf(mag_db / T::lit(20.0));
        Complex::from_polar(amp, phase_deg.to_radians())
    }
}

impl<T: Real> FrequencyBlock<T> {
    fn new(freq_hz: T, samples: Vec<(T, T, T)>) -> Result<Self> {
        if !(freq_hz > T::zero()) {
            return Err(Error::invalid(format!("pattern frequency must be positive, got {freq_hz}")));
        }
        if samples.len() < 2 {
            return Err(Error::invalid(format!(
                "pattern block at {freq_hz} Hz needs at least 2 distinct angles"
            )));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("pattern angles must be strictly increasing"));
        }
        let first = samples[0].0;
        let last = samples[samples.len() - 1].0;
        if last - first >= T::lit(360.0) {
            return Err(Error::invalid("pattern angles must span less than 360 degrees"));
        }
        let peak_db = samples
            .iter()
            .map(|s| s.1)
            .fold(T::neg_infinity(), T::max);
        let mut angles_deg = Vec::with_capacity(samples.len());
        let mut mag_db = Vec::with_capacity(samples.len());
        let mut phase_deg: Vec<T> = Vec::with_capacity(samples.len());
        for (a, m, p) in samples {
            angles_deg.push(a);
            mag_db.push(m - peak_db);
            let unwrapped = match phase_deg.last() {
                Some(&prev) => prev + wrap_difference(p - prev),
                None => p,
            };
            phase_deg.push(unwrapped);
        }
        Ok(Self {
            freq_hz,
            angles_deg,
            mag_db,
            phase_deg,
            peak_db,
        })
    }

    fn interpolate(&self, azimuth_deg: T) -> (T, T) {
        let n = self.angles_deg.len();
        let a0 = self.angles_deg[0];
        let full = T::lit(360.0);
        // map into [a0, a0 + 360)
        let mut x = a0 + (wrap_half_open(azimuth_deg) - a0).rem_euclid(&full);
        if x >= a0 + full {
            x = a0;
        }
        let idx = self.angles_deg.partition_point(|&a| a <= x);
        let (xa, xb, ma, mb, pa, pb) = if idx == n {
            // segment across the wrap
            let pl = self.phase_deg[n - 1];
            (
                self.angles_deg[n - 1],
                a0 + full,
                self.mag_db[n - 1],
                self.mag_db[0],
                pl,
                pl + wrap_difference(self.phase_deg[0] - pl),
            )
        } else {
            let i = idx - 1;
            (
                self.angles_deg[i],
                self.angles_deg[i + 1],
                self.mag_db[i],
                self.mag_db[i + 1],
                self.phase_deg[i],
                self.phase_deg[i + 1],
            )
        };
        let t = (x - xa) / (xb - xa);
        (ma + (mb - ma) * t, pa + (pb - pa) * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn gauss40() -> AntennaPattern<f64> {
        AntennaPattern::gaussian(40.0, 13.5).unwrap()
    }

    #[test]
    fn isotropic_is_unity() {
        let p = AntennaPattern::<f64>::isotropic();
        assert_eq!(p.eval(29e9, 137.0), Complex::new(1.0, 0.0));
        assert_eq!(p.eval(28e9, -180.0), Complex::new(1.0, 0.0));
        assert_eq!(p.gain_dbi(), 0.0);
    }

    #[test]
    fn gaussian_hpbw_points() {
        let p = gauss40();
        assert!((p.power(29e9, 20.0) - 0.5).abs() < 1e-15);
        assert!((p.power(29e9, -20.0) - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(29e9, 0.0).norm(), 1.0);
        // exp(-4 ln 2) = 1/16
        assert!((p.power(29e9, 40.0) - 0.0625).abs() < 1e-15);
        assert_eq!(p.eval(29e9, 33.0).im, 0.0);
    }

    #[test]
    fn gaussian_rejects_bad_hpbw() {
        assert!(AntennaPattern::<f64>::gaussian(0.0, 0.0).is_err());
        assert!(AntennaPattern::<f64>::gaussian(-5.0, 0.0).is_err());
        assert!(AntennaPattern::<f64>::gaussian(360.0, 0.0).is_err());
        assert!(AntennaPattern::<f64>::gaussian(40.0, f64::NAN).is_err());
        // lossy elements are fine
        assert!(AntennaPattern::<f64>::gaussian(40.0, -3.0).is_ok());
    }

    fn parse(text: &str, base: f64) -> Result<AntennaPattern<f64>> {
        PatternTable::parse_csv(text, &PathBuf::from("test.csv"), base).map(AntennaPattern::tabulated)
    }

    #[test]
    fn three_row_table_is_renormalized() {
        let text = "angle_deg,freq_hz,mag_db,phase_deg\n-90,29e9,-12,0\n0,29e9,-2,0\n90,29e9,-12,0\n";
        let p = parse(text, 0.0).unwrap();
        assert!((p.eval(29e9, 0.0).norm() - 1.0).abs() < 1e-12);
        assert!((p.gain_dbi() + 2.0).abs() < 1e-12);
        // half way to the side sample: -5 dB relative
        assert!((p.power(29e9, 45.0).log10() * 10.0 + 5.0).abs() < 1e-9);
        // wrap segment 90 -> 270(-90)
        assert!((p.power(29e9, 180.0).log10() * 10.0 + 10.0).abs() < 1e-9);
    }

    #[test]
    fn table_errors() {
        let bad_order = "angle_deg,freq_hz,mag_db,phase_deg\n0,29e9,0,0\n90,29e9,-1,0\n45,29e9,-2,0\n";
        let e = parse(bad_order, 0.0).unwrap_err();
        assert!(e.to_string().contains("strictly increasing"), "{e}");
        assert!(e.to_string().contains(":4:"), "{e}");
        assert!(parse("angle_deg,freq_hz,mag_db,phase_deg\n", 0.0).is_err());
        assert!(parse("", 0.0).is_err());
        assert!(parse("angle_deg,freq_hz,mag_db,phase_deg\n0,29e9,abc,0\n5,29e9,0,0\n", 0.0).is_err());
        assert!(parse("angle_deg,freq_hz,mag_db,phase_deg\n0,29e9,0,0\n", 0.0).is_err());
        assert!(parse("a,b,c\n0,1,2\n", 0.0).is_err());
    }

    #[test]
    fn comments_and_missing_phase() {
        let text = "# horn\nangle_deg,freq_hz,mag_db\n-10,28e9,-1\n# mid\n0,28e9,0\n10,28e9,-1\n";
        let p = parse(text, 10.0).unwrap();
        assert_eq!(p.eval(28e9, 0.0), Complex::new(1.0, 0.0));
        assert_eq!(p.gain_dbi(), 10.0);
    }

    #[test]
    fn phase_unwraps_across_seam() {
        let text = "angle_deg,freq_hz,mag_db,phase_deg\n0,29e9,0,170\n10,29e9,0,-170\n";
        let p = parse(text, 0.0).unwrap();
        // midpoint of 170 -> 190 is 180
        let v = p.eval(29e9, 5.0);
        assert!((v.arg().to_degrees().abs() - 180.0).abs() < 1e-9);
    }

    #[test]
    fn nearest_frequency_block() {
        let text = "angle_deg,freq_hz,mag_db,phase_deg\n\
                    -90,28e9,-6,0\n0,28e9,0,0\n90,28e9,-6,0\n\
                    -90,30e9,-3,0\n0,30e9,-1,0\n90,30e9,-3,0\n";
        let p = parse(text, 5.0).unwrap();
        assert!((p.power(28.4e9, 90.0).log10() * 10.0 + 6.0).abs() < 1e-9);
        assert!((p.power(29.6e9, 90.0).log10() * 10.0 + 2.0).abs() < 1e-9);
        assert!((p.gain_dbi_at(28e9) - 5.0).abs() < 1e-12);
        assert!((p.gain_dbi_at(30e9) - 4.0).abs() < 1e-12);
        // boresight normalized per frequency
        assert!((p.eval(30e9, 0.0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_gaussian_table_tracks_closed_form() {
        let mut text = String::from("angle_deg,freq_hz,mag_db,phase_deg\n");
        let g = gauss40();
        for a in -180..180 {
            let db = 10.0 * g.power(29e9, a as f64).log10();
            text.push_str(&format!("{a},29e9,{db},0\n"));
        }
        let t = parse(&text, 0.0).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..(360 * 4) {
            let a = -180.0 + 0.25 * i as f64;
            let d = 10.0 * (t.power(29e9, a) / g.power(29e9, a)).log10();
            worst = worst.max(d.abs());
        }
        assert!(worst < 0.05, "max deviation {worst} dB");
    }
}
