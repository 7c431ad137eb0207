//! Random vibration: piecewise log-log PSD profiles, Grms, Miles'
//! equivalent acceleration, peak search and response magnification.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RandvibError {
    #[error("profile needs at least one breakpoint")]
    EmptyProfile,
    #[error("frequencies must be positive and strictly increasing (row {0})")]
    Frequencies(usize),
    #[error("PSD must be positive at breakpoints (row {0})")]
    NonPositivePsd(usize),
    #[error("PSD must be non-negative and finite (row {0})")]
    NegativePsd(usize),
    #[error("{f} Hz is outside the band {lo}..{hi} Hz")]
    OutOfBand { f: f64, lo: f64, hi: f64 },
    #[error("Q must exceed 0.5, got {0}")]
    BadQ(f64),
    #[error("no samples in {0}..{1} Hz")]
    EmptyBand(f64, f64),
    #[error("reference PSD {value} at {frequency} Hz is not above {threshold}")]
    ZeroReference { frequency: f64, value: f64, threshold: f64 },
    #[error("curve arrays differ in length or are empty")]
    Shape,
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Input spectrum: straight lines between breakpoints on log-log axes.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdProfile {
    /// (Hz, G²/Hz)
    breakpoints: Vec<(f64, f64)>,
}

impl PsdProfile {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self, RandvibError> {
        if breakpoints.is_empty() {
            return Err(RandvibError::EmptyProfile);
        }
        for (i, &(f, p)) in breakpoints.iter().enumerate() {
            if !(f > 0.0 && f.is_finite()) || (i > 0 && !(f > breakpoints[i - 1].0)) {
                return Err(RandvibError::Frequencies(i + 1));
            }
            if !(p > 0.0 && p.is_finite()) {
                return Err(RandvibError::NonPositivePsd(i + 1));
            }
        }
        Ok(PsdProfile { breakpoints })
    }

    /// Constant level over `[lo, hi]`.
    pub fn flat(lo: f64, hi: f64, level: f64) -> Result<Self, RandvibError> {
        PsdProfile::new(vec![(lo, level), (hi, level)])
    }

    pub fn from_csv(text: &str) -> Result<Self, RandvibError> {
        PsdProfile::new(read_two_column_csv(text)?)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn band(&self) -> (f64, f64) {
        (self.breakpoints[0].0, self.breakpoints[self.breakpoints.len() - 1].0)
    }

    /// Every level multiplied by `k` (> 0).
    pub fn scaled(&self, k: f64) -> Result<Self, RandvibError> {
        PsdProfile::new(self.breakpoints.iter().map(|&(f, p)| (f, p * k)).collect())
    }
}

fn segment_slope((f1, p1): (f64, f64), (f2, p2): (f64, f64)) -> f64 {
    (p2 / p1).ln() / (f2 / f1).ln()
}

/// Profile level at `f`, G²/Hz.
pub fn psd_at(profile: &PsdProfile, f: f64) -> Result<f64, RandvibError> {
    let (lo, hi) = profile.band();
    if !(f >= lo && f <= hi) {
        return Err(RandvibError::OutOfBand { f, lo, hi });
    }
    let bp = &profile.breakpoints;
    if let Some(&(_, p)) = bp.iter().find(|&&(x, _)| x == f) {
        return Ok(p);
    }
    let k = bp.partition_point(|&(x, _)| x < f);
    let (a, b) = (bp[k - 1], bp[k]);
    Ok(a.1 * (f / a.0).powf(segment_slope(a, b)))
}

/// Mean-square area under one power-law segment.
fn segment_area(a: (f64, f64), b: (f64, f64)) -> f64 {
    let m = segment_slope(a, b);
    let ratio = b.0 / a.0;
    if (m + 1.0).abs() < 1e-12 {
        a.1 * a.0 * ratio.ln()
    } else {
        a.1 * a.0 / (m + 1.0) * (ratio.powf(m + 1.0) - 1.0)
    }
}

/// Root of the PSD integral over the profile band, G.
pub fn grms(profile: &PsdProfile) -> f64 {
    profile.breakpoints.windows(2).map(|w| segment_area(w[0], w[1])).sum::<f64>().sqrt()
}

/// Miles' single-DOF rms response, √(π/2·f_n·Q·PSD(f_n)), G.
pub fn miles_acceleration(fn_hz: f64, q: f64, profile: &PsdProfile) -> Result<f64, RandvibError> {
    if !(q > 0.5 && q.is_finite()) {
        return Err(RandvibError::BadQ(q));
    }
    let p = psd_at(profile, fn_hz)?;
    Ok((std::f64::consts::FRAC_PI_2 * fn_hz * q * p).sqrt())
}

/// 3σ peak design acceleration from an rms value.
pub fn three_sigma(rms: f64) -> f64 {
    3.0 * rms
}

/// Sampled spectrum of one measurement channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdCurve {
    pub label: String,
    pub frequency: Vec<f64>,
    pub psd: Vec<f64>,
}

impl PsdCurve {
    pub fn new(label: impl Into<String>, frequency: Vec<f64>, psd: Vec<f64>) -> Result<Self, RandvibError> {
        if frequency.len() != psd.len() || frequency.is_empty() {
            return Err(RandvibError::Shape);
        }
        for i in 0..frequency.len() {
            if !(frequency[i] >= 0.0 && frequency[i].is_finite()) || (i > 0 && !(frequency[i] > frequency[i - 1])) {
                return Err(RandvibError::Frequencies(i + 1));
            }
            if !(psd[i] >= 0.0 && psd[i].is_finite()) {
                return Err(RandvibError::NegativePsd(i + 1));
            }
        }
        Ok(PsdCurve { label: label.into(), frequency, psd })
    }

    pub fn from_csv(label: impl Into<String>, text: &str) -> Result<Self, RandvibError> {
        let (f, p) = read_two_column_csv(text)?.into_iter().unzip();
        PsdCurve::new(label, f, p)
    }

    /// Linear interpolation between samples; `None` outside the samples.
    pub fn value_at(&self, f: f64) -> Option<f64> {
        let x = &self.frequency;
        if !(f >= x[0] && f <= x[x.len() - 1]) {
            return None;
        }
        let k = x.partition_point(|&v| v < f);
        if x[k] == f {
            return Some(self.psd[k]);
        }
        let t = (f - x[k - 1]) / (x[k] - x[k - 1]);
        Some(self.psd[k - 1] + t * (self.psd[k] - self.psd[k - 1]))
    }

    pub fn scaled(&self, k: f64) -> PsdCurve {
        PsdCurve { label: self.label.clone(), frequency: self.frequency.clone(), psd: self.psd.iter().map(|p| p * k).collect() }
    }
}

/// Largest sample inside `[lo, hi]`; ties go to the lowest frequency.
pub fn find_peak(curve: &PsdCurve, band: (f64, f64)) -> Result<(f64, f64), RandvibError> {
    let mut best: Option<(f64, f64)> = None;
    for (&f, &p) in curve.frequency.iter().zip(&curve.psd) {
        if f >= band.0 && f <= band.1 && best.is_none_or(|(_, bp)| p > bp) {
            best = Some((f, p));
        }
    }
    best.ok_or(RandvibError::EmptyBand(band.0, band.1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnificationOptions {
    /// Report √(PSD ratio), an amplitude ratio, instead of the PSD ratio.
    pub amplitude: bool,
    /// Reference levels at or below this are rejected, G²/Hz.
    pub min_reference: f64,
}

impl Default for MagnificationOptions {
    fn default() -> Self {
        MagnificationOptions { amplitude: false, min_reference: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnificationResult {
    pub peak_frequency: f64,
    pub sensor_psd: f64,
    pub reference_psd: f64,
    pub magnification: f64,
}

/// Sensor peak in `band` relative to the reference level at the same
/// frequency.
pub fn response_magnification(
    sensor: &PsdCurve,
    reference: &PsdCurve,
    band: (f64, f64),
    options: MagnificationOptions,
) -> Result<MagnificationResult, RandvibError> {
    let (f, s) = find_peak(sensor, band)?;
    let lo = reference.frequency[0];
    let hi = reference.frequency[reference.frequency.len() - 1];
    let r = reference.value_at(f).ok_or(RandvibError::OutOfBand { f, lo, hi })?;
    if !(r > options.min_reference) {
        return Err(RandvibError::ZeroReference { frequency: f, value: r, threshold: options.min_reference });
    }
    let ratio = s / r;
    Ok(MagnificationResult {
        peak_frequency: f,
        sensor_psd: s,
        reference_psd: r,
        magnification: if options.amplitude { ratio.sqrt() } else { ratio },
    })
}

/// Two numeric columns (frequency, PSD); `#` starts a comment line. A
/// leading non-numeric header row is skipped.
pub fn read_two_column_csv(text: &str) -> Result<Vec<(f64, f64)>, RandvibError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| RandvibError::Csv { line: i + 1, message: e.to_string() })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 {
            return Err(RandvibError::Csv { line, message: format!("expected 2 columns, found {}", rec.len()) });
        }
        let parse = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        match (parse(&rec[0]), parse(&rec[1])) {
            (Some(f), Some(p)) => rows.push((f, p)),
            _ if rows.is_empty() && rec[0].parse::<f64>().is_err() => {}
            _ => return Err(RandvibError::Csv { line, message: format!("not numeric: {:?}", rec.iter().collect::<Vec<_>>()) }),
        }
    }
    Ok(rows)
}
