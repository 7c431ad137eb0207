use std::path::PathBuf;

use vibrakit_core::fea::assemble_with_limit;
use vibrakit_core::modal::{check_min_frequency, modes_of, ModalError, ModalResult};

use crate::output::{csv_text, fixed, full, Format, Table};
use crate::{max_dofs, pick_constraints, read_deck, Failure, Report};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    deck: PathBuf,
    /// Constraint set to solve. Give it twice (e.g. A and C) to compare;
    /// later tables get a frequency delta against the first.
    #[arg(long = "constraint")]
    constraints: Vec<String>,
    /// Number of modes to extract (capped at the free DOF count).
    #[arg(long, default_value_t = 10)]
    modes: usize,
    /// Minimum first natural frequency, Hz. 60 Hz is the usual launcher
    /// requirement for small satellites.
    #[arg(long, default_value_t = 60.0)]
    floor_hz: f64,
    /// Hide modes whose largest effective mass is below this, kg. Modes are
    /// still solved and counted in the sums.
    #[arg(long, default_value_t = 0.0)]
    mass_floor: f64,
}

fn modal_failure(e: ModalError) -> Failure {
    match &e {
        ModalError::Fea(fe) => Failure::fea(fe),
        _ => Failure::solver(e),
    }
}

pub fn run(args: &Args, format: Format) -> Result<Report, Failure> {
    if args.modes == 0 {
        return Err(Failure::input("--modes must be at least 1"));
    }
    let model = read_deck(&args.deck)?;
    let sets = pick_constraints(&model, &args.constraints)?;
    let limit = max_dofs()?;
    let mut results: Vec<ModalResult> = Vec::new();
    for set in &sets {
        let system = assemble_with_limit(&model, set, limit).map_err(|e| Failure::fea(&e))?;
        let n = args.modes.min(system.dofs.n_free());
        results.push(modes_of(&system, n).map_err(modal_failure)?);
    }

    let visible = |m: &vibrakit_core::modal::ModeRecord| m.effective_mass.iter().cloned().fold(0.0, f64::max) >= args.mass_floor;
    let delta = |r: usize, mode: usize| -> Option<f64> {
        let base = results[0].modes.get(mode)?.frequency_hz;
        (r > 0).then(|| 100.0 * (results[r].modes[mode].frequency_hz - base) / base)
    };

    let mut pass = true;
    let mut checks = Vec::new();
    for r in &results {
        let c = check_min_frequency(r, args.floor_hz).map_err(modal_failure)?;
        pass &= c.pass;
        checks.push(c);
    }

    if format == Format::Csv {
        let mut rows = Vec::new();
        for (ri, r) in results.iter().enumerate() {
            for (mi, m) in r.modes.iter().enumerate().filter(|(_, m)| visible(m)) {
                rows.push(vec![
                    r.constraint.clone(),
                    m.index.to_string(),
                    full(m.frequency_hz),
                    full(m.effective_mass[0]),
                    full(m.effective_mass[1]),
                    full(m.effective_mass[2]),
                    m.class.to_string(),
                    delta(ri, mi).map(full).unwrap_or_default(),
                ]);
            }
        }
        let headers = ["constraint", "mode", "frequency_hz", "meff_x_kg", "meff_y_kg", "meff_z_kg", "axis", "delta_percent"];
        return Ok(Report { text: csv_text(&headers, &rows), pass });
    }

    let mut text = format!("Normal modes: {}\n", args.deck.display());
    for (ri, r) in results.iter().enumerate() {
        let total = r.total_mass[0];
        text.push_str(&format!("\nConstraint {}: {} modes, total mass {} kg\n", r.constraint, r.modes.len(), fixed(total, 3)));
        if args.mass_floor > 0.0 {
            text.push_str(&format!("modes with effective mass below {} kg on every axis are hidden\n", fixed(args.mass_floor, 3)));
        }
        let mut headers = vec!["Mode", "Freq (Hz)", "Meff X (kg)", "Meff Y (kg)", "Meff Z (kg)", "Axis"];
        if ri > 0 {
            headers.push("Delta (%)");
        }
        let mut t = Table::new(headers);
        for (mi, m) in r.modes.iter().enumerate().filter(|(_, m)| visible(m)) {
            let mut row = vec![
                m.index.to_string(),
                fixed(m.frequency_hz, 1),
                fixed(m.effective_mass[0], 3),
                fixed(m.effective_mass[1], 3),
                fixed(m.effective_mass[2], 3),
                m.class.to_string(),
            ];
            if ri > 0 {
                row.push(delta(ri, mi).map(|d| fixed(d, 2)).unwrap_or_else(|| "-".into()));
            }
            t.row(row);
        }
        text.push_str(&t.render());
        let s = r.effective_mass_sum();
        text.push_str(&format!(
            "effective mass sum X/Y/Z: {} / {} / {} kg\n",
            fixed(s[0], 3),
            fixed(s[1], 3),
            fixed(s[2], 3)
        ));
        let c = &checks[ri];
        text.push_str(&format!(
            "f1 = {} Hz, floor {} Hz: {} (margin {} Hz)\n",
            fixed(c.frequency_hz, 1),
            fixed(c.floor_hz, 1),
            if c.pass { "PASS" } else { "FAIL" },
            fixed(c.margin_hz, 1)
        ));
    }
    Ok(Report { text, pass })
}
