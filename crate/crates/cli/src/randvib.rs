use std::path::{Path, PathBuf};

use clap::Subcommand;
use vibrakit_core::randvib::{
    grms, miles_acceleration, psd_at, response_magnification, three_sigma, MagnificationOptions, PsdCurve, PsdProfile,
};

use crate::output::{csv_text, fixed, full, Format, Table};
use crate::{read_text, Failure, Report};

#[derive(Subcommand)]
pub enum Command {
    /// Overall rms acceleration of a PSD profile.
    Grms {
        /// Breakpoints as `frequency,psd` rows (Hz, G²/Hz), log-log between.
        #[arg(long)]
        psd: PathBuf,
    },
    /// Miles' single-DOF rms response and its 3σ design value.
    Miles {
        #[arg(long)]
        psd: PathBuf,
        /// Natural frequency, Hz.
        #[arg(long = "fn")]
        fn_hz: f64,
        /// Amplification at resonance. 10 is the customary assumption when
        /// no test data exist.
        #[arg(long, default_value_t = 10.0)]
        q: f64,
    },
    /// Peak response of sensor spectra against a reference spectrum.
    Mag {
        /// Sampled sensor PSD as `frequency,psd` rows; repeatable.
        #[arg(long = "sensor", required = true)]
        sensors: Vec<PathBuf>,
        /// Reference (jig) PSD, sampled the same way.
        #[arg(long)]
        reference: PathBuf,
        /// Search band `LO,HI` in Hz; defaults to the 20-2000 Hz test range.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [20.0, 2000.0])]
        band: Vec<f64>,
        /// Report the amplitude ratio √(PSD ratio) instead of the PSD ratio.
        #[arg(long)]
        amplitude: bool,
        /// Reject reference levels at or below this, G²/Hz.
        #[arg(long, default_value_t = 0.0)]
        min_reference: f64,
    },
}

fn profile(path: &Path) -> Result<PsdProfile, Failure> {
    PsdProfile::from_csv(&read_text(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn curve(path: &Path) -> Result<PsdCurve, Failure> {
    let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    PsdCurve::from_csv(label, &read_text(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn run(command: &Command, format: Format) -> Result<Report, Failure> {
    let csv = format == Format::Csv;
    match command {
        Command::Grms { psd } => {
            let p = profile(psd)?;
            let (lo, hi) = p.band();
            let g = grms(&p);
            Ok(Report::pass(if csv {
                csv_text(&["band_lo_hz", "band_hi_hz", "grms"], &[vec![full(lo), full(hi), full(g)]])
            } else {
                format!("band {}-{} Hz, {} breakpoints\nGrms = {}\n", full(lo), full(hi), p.breakpoints().len(), fixed(g, 4))
            }))
        }
        Command::Miles { psd, fn_hz, q } => {
            let p = profile(psd)?;
            let rms = miles_acceleration(*fn_hz, *q, &p).map_err(Failure::input)?;
            let level = psd_at(&p, *fn_hz).map_err(Failure::input)?;
            let peak = three_sigma(rms);
            Ok(Report::pass(if csv {
                csv_text(
                    &["fn_hz", "q", "psd_g2_per_hz", "grms", "three_sigma_g"],
                    &[vec![full(*fn_hz), full(*q), full(level), full(rms), full(peak)]],
                )
            } else {
                format!(
                    "f_n = {} Hz, Q = {}, PSD(f_n) = {} G²/Hz\n{} Grms, 3σ = {}\n",
                    full(*fn_hz),
                    full(*q),
                    full(level),
                    fixed(rms, 3),
                    fixed(peak, 3)
                )
            }))
        }
        Command::Mag { sensors, reference, band, amplitude, min_reference } => {
            let band = (band[0], band[1]);
            if !(band.0 < band.1) {
                return Err(Failure::input(format!("--band {},{} is empty", band.0, band.1)));
            }
            let reference = curve(reference)?;
            let options = MagnificationOptions { amplitude: *amplitude, min_reference: *min_reference };
            let mut rows = Vec::new();
            for path in sensors {
                let s = curve(path)?;
                let m = response_magnification(&s, &reference, band, options)
                    .map_err(|e| Failure::input(format!("{}: {e}", s.label)))?;
                rows.push((s.label, m));
            }
            if csv {
                let cells: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(l, m)| {
                        vec![l.clone(), full(m.peak_frequency), full(m.sensor_psd), full(m.reference_psd), full(m.magnification)]
                    })
                    .collect();
                let headers = ["sensor", "peak_hz", "sensor_psd_g2_per_hz", "reference_psd_g2_per_hz", "magnification"];
                return Ok(Report::pass(csv_text(&headers, &cells)));
            }
            let kind = if *amplitude { "amplitude ratio" } else { "PSD ratio" };
            let mut t = Table::new(["Sensor", "Peak (Hz)", "PSD (G²/Hz)", "Reference (G²/Hz)", "Mag."]);
            for (l, m) in &rows {
                t.row(vec![
                    l.clone(),
                    fixed(m.peak_frequency, 1),
                    fixed(m.sensor_psd, 4),
                    fixed(m.reference_psd, 4),
                    fixed(m.magnification, 1),
                ]);
            }
            Ok(Report::pass(format!(
                "Response magnification ({kind}), band {}-{} Hz, reference {}\n{}",
                full(band.0),
                full(band.1),
                reference.label,
                t.render()
            )))
        }
    }
}
