use vibrakit_core::model::PanelEquivalent;

use crate::output::{csv_text, fixed, full, Format, Table};
use crate::{Failure, Report};

#[derive(clap::Args)]
pub struct Args {
    /// Mass of the real panel structure, kg.
    #[arg(long)]
    real_mass: f64,
    /// Mass of the components carried by the panel, kg.
    #[arg(long, default_value_t = 0.0)]
    component_mass: f64,
    /// Panel area, m².
    #[arg(long)]
    area: f64,
    /// Thickness of the simplified panel, m.
    #[arg(long)]
    thickness: f64,
}

pub fn run(args: &Args, format: Format) -> Result<Report, Failure> {
    let p = PanelEquivalent::new(args.real_mass, args.component_mass, args.area, args.thickness).map_err(Failure::input)?;
    let rows = [
        ("structural mass", "kg", p.structural_mass, 4),
        ("component mass", "kg", p.component_mass, 4),
        ("total mass", "kg", p.total_mass(), 4),
        ("volume", "m³", p.area * p.thickness, 6),
        ("equivalent density", "kg/m³", p.density, 1),
        ("equivalent density", "g/cm³", p.density / 1000.0, 2),
        ("reconstructed mass", "kg", p.reconstructed_mass(), 4),
    ];
    if format == Format::Csv {
        let cells: Vec<Vec<String>> =
            rows.iter().map(|(q, u, v, _)| vec![q.to_string(), u.to_string(), full(*v)]).collect();
        return Ok(Report::pass(csv_text(&["quantity", "unit", "value"], &cells)));
    }
    let mut t = Table::new(["Quantity", "Value", "Unit"]);
    for (q, u, v, d) in rows {
        t.row(vec![q.to_string(), fixed(v, d), u.to_string()]);
    }
    Ok(Report::pass(format!("Simplified panel\n{}", t.render())))
}
