use std::path::PathBuf;

use vibrakit_core::fea::assemble_with_limit;
use vibrakit_core::model::{Material, MaterialId};
use vibrakit_core::statics::{margin_of_safety, static_case_on, stress_ratio_check, Margin, SafetyFactors, StaticError};

use crate::output::{csv_text, fixed, full, Format, Table};
use crate::{max_dofs, pick_constraints, read_deck, Failure, Report};

const MPA: f64 = 1e6;

#[derive(clap::Args)]
pub struct Args {
    #[arg(long, required_unless_present = "smax", conflicts_with = "smax")]
    deck: Option<PathBuf>,
    #[arg(long)]
    constraint: Option<String>,
    /// Load case to run; repeatable. Defaults to every case in the deck.
    /// With --smax, names the rows instead.
    #[arg(long = "case")]
    cases: Vec<String>,
    /// Skip the solve and report this peak stress, MPa; repeatable.
    #[arg(long = "smax", requires_all = ["fty", "ftu"])]
    smax: Vec<f64>,
    /// Yield allowable, MPa. Overrides the material of the peak element.
    #[arg(long)]
    fty: Option<f64>,
    /// Ultimate allowable, MPa. Overrides the material of the peak element.
    #[arg(long)]
    ftu: Option<f64>,
    /// Factor of safety on yield.
    #[arg(long, default_value_t = 1.5)]
    fs_yield: f64,
    /// Factor of safety on ultimate.
    #[arg(long, default_value_t = 2.0)]
    fs_ultimate: f64,
    /// Limit on S_max/F_tu, percent; 30% is the usual cap for small
    /// satellites deployed from a crewed station.
    #[arg(long, default_value_t = 30.0)]
    ratio_limit: f64,
}

struct Row {
    case: String,
    s_max: f64,
    location: String,
    f_ty: f64,
    f_tu: f64,
    ms_yield: Margin,
    ms_ultimate: Margin,
    ratio: f64,
    pass: bool,
}

fn row(case: String, s_max: f64, location: String, f_ty: f64, f_tu: f64, factors: &SafetyFactors) -> Row {
    let material = Material {
        id: MaterialId(0),
        youngs_modulus: 1.0,
        poisson_ratio: 0.0,
        density: 0.0,
        yield_strength: f_ty,
        ultimate_strength: f_tu,
    };
    let (ms_yield, ms_ultimate) = margin_of_safety(s_max, &material, factors);
    let ratio = stress_ratio_check(s_max, f_tu, factors.ratio_limit);
    let pass = ms_yield.passes() && ms_ultimate.passes() && ratio.pass;
    Row { case, s_max, location, f_ty, f_tu, ms_yield, ms_ultimate, ratio: ratio.percent(), pass }
}

fn margin_text(m: Margin) -> String {
    m.value().map_or("unbounded".to_string(), |v| fixed(v, 2))
}

fn positive(v: f64, flag: &str) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::input(format!("--{flag} must be positive, got {v}")))
    }
}

pub fn run(args: &Args, format: Format) -> Result<Report, Failure> {
    let factors = SafetyFactors {
        yield_factor: positive(args.fs_yield, "fs-yield")?,
        ultimate_factor: positive(args.fs_ultimate, "fs-ultimate")?,
        ratio_limit: positive(args.ratio_limit, "ratio-limit")? / 100.0,
    };
    let fty = args.fty.map(|v| positive(v, "fty")).transpose()?;
    let ftu = args.ftu.map(|v| positive(v, "ftu")).transpose()?;

    let mut rows = Vec::new();
    let title;
    if let Some(deck) = &args.deck {
        let model = read_deck(deck)?;
        let names: Vec<String> = args.constraint.iter().cloned().collect();
        let set = pick_constraints(&model, &names)?[0];
        let cases = if args.cases.is_empty() {
            model.load_cases.clone()
        } else {
            args.cases
                .iter()
                .map(|c| model.load_case(c).cloned().ok_or_else(|| Failure::input(format!("no load case {c} in deck"))))
                .collect::<Result<_, _>>()?
        };
        if cases.is_empty() {
            return Err(Failure::input("deck defines no load case"));
        }
        let system = assemble_with_limit(&model, set, max_dofs()?).map_err(|e| Failure::fea(&e))?;
        for case in &cases {
            let r = static_case_on(&system, &model, case, &factors).map_err(|e| match &e {
                StaticError::Fea(fe) => Failure::fea(fe),
                _ => Failure::solver(e),
            })?;
            let location = format!("E{} {}", r.peak.element.0, r.peak.location);
            let f_ty = fty.unwrap_or(r.yield_strength / MPA);
            let f_tu = ftu.unwrap_or(r.ultimate_strength / MPA);
            rows.push(row(case.name.clone(), r.s_max() / MPA, location, f_ty, f_tu, &factors));
        }
        title = format!("Static margins: {}, constraint {}", deck.display(), set.name);
    } else {
        let named = args.cases.len() == args.smax.len();
        for (i, &s) in args.smax.iter().enumerate() {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Failure::input(format!("--smax must be non-negative, got {s}")));
            }
            let case = if named { args.cases[i].clone() } else { format!("S{}", i + 1) };
            rows.push(row(case, s, "-".into(), fty.unwrap(), ftu.unwrap(), &factors));
        }
        title = "Static margins: given S_max".to_string();
    }
    let pass = rows.iter().all(|r| r.pass);

    let margin_csv = |m: Margin| m.value().map_or("inf".to_string(), full);
    if format == Format::Csv {
        let headers =
            ["case", "s_max_mpa", "location", "f_ty_mpa", "f_tu_mpa", "ms_yield", "ms_ultimate", "ratio_percent", "status"];
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.case.clone(),
                    full(r.s_max),
                    r.location.clone(),
                    full(r.f_ty),
                    full(r.f_tu),
                    margin_csv(r.ms_yield),
                    margin_csv(r.ms_ultimate),
                    full(r.ratio),
                    if r.pass { "pass" } else { "FAIL" }.into(),
                ]
            })
            .collect();
        return Ok(Report { text: csv_text(&headers, &cells), pass });
    }

    let ms_head = |what: &str, fs: f64| format!("MS {what} (FS={})", full(fs));
    let mut t = Table::new([
        "Case".to_string(),
        "S_max (MPa)".into(),
        "Location".into(),
        "F_ty".into(),
        "F_tu".into(),
        ms_head("yield", factors.yield_factor),
        ms_head("ultimate", factors.ultimate_factor),
        format!("S_max/F_tu (%) < {}", full(args.ratio_limit)),
        "Status".into(),
    ]);
    for r in &rows {
        t.row(vec![
            r.case.clone(),
            fixed(r.s_max, 2),
            r.location.clone(),
            full(r.f_ty),
            full(r.f_tu),
            margin_text(r.ms_yield),
            margin_text(r.ms_ultimate),
            fixed(r.ratio, 1),
            if r.pass { "pass" } else { "FAIL" }.into(),
        ]);
    }
    Ok(Report { text: format!("{title}\n{}", t.render()), pass })
}
