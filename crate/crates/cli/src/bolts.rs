use std::collections::HashSet;
use std::path::PathBuf;

use vibrakit_core::bolt::{
    governing_shear, parse_annotations, parse_groups, parse_stackups, rank_loosening_risk, records_from_forces,
    stackup_check, BoltGroupReport, BoltShearRecord,
};
use vibrakit_core::fea::{assemble_with_limit, BeamEndForces};
use vibrakit_core::punch::{
    extract_beam_forces, parse_punch, write_punch, FormatDescriptor, Header, PunchBlock, PunchDocument, PunchRecord,
};
use vibrakit_core::statics::{static_case_on, SafetyFactors, StaticError};

use crate::output::{csv_text, fixed, full, Format, Table};
use crate::{max_dofs, pick_constraints, read_deck, read_text, Failure, Report};

#[derive(clap::Args)]
pub struct ShearArgs {
    /// Solve this deck for the bolt forces.
    #[arg(long, required_unless_present = "punch", conflicts_with = "punch")]
    deck: Option<PathBuf>,
    #[arg(long)]
    constraint: Option<String>,
    /// Load case to report; repeatable. Defaults to every case (deck) or
    /// every subcase (punch).
    #[arg(long = "case")]
    cases: Vec<String>,
    /// Read bolt forces from a punch file instead of solving.
    #[arg(long, requires_all = ["descriptor", "groups"])]
    punch: Option<PathBuf>,
    /// Field layout of the punch records.
    #[arg(long)]
    descriptor: Option<PathBuf>,
    /// `GROUP,<label>,<eid>,...` lines; replaces the deck's groups.
    #[arg(long)]
    groups: Option<PathBuf>,
    /// `LOOSE,<group>,<case>` lines marking loosening seen in test.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Also write the solved bolt forces as a punch file (deck source only).
    #[arg(long, conflicts_with = "punch")]
    write_punch: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct CheckArgs {
    /// Stack-up file: `BOLT,<label>,<length>,<tapped depth>[,<helicoil>[,<margin>]]`
    /// followed by `ITEM,<name>,<thickness>` lines, lengths in mm.
    stackup: PathBuf,
}

/// Punch record of one bar: axial and torque at end B, the governing shear
/// pair, and both end moments.
fn bar_record(f: &BeamEndForces, descriptor: &FormatDescriptor) -> PunchRecord {
    let (v1, v2) = governing_shear(f);
    let values = [
        ("axial", f.axial_force()),
        ("torque", f.b.torque),
        ("shear-1", v1),
        ("shear-2", v2),
        ("moment-1A", f.a.moment1),
        ("moment-2A", f.a.moment2),
        ("moment-1B", f.b.moment1),
        ("moment-2B", f.b.moment2),
    ];
    let values = descriptor
        .names()
        .map(|n| (n.to_string(), values.iter().find(|(k, _)| *k == n).map_or(0.0, |v| v.1)))
        .collect();
    PunchRecord { element: f.element.0, values }
}

fn case_name(block: &PunchBlock) -> Option<String> {
    let sc = block.subcase()?;
    Some(block.label().map_or_else(|| format!("SC{sc}"), str::to_string))
}

pub fn run_shear(args: &ShearArgs, format: Format) -> Result<Report, Failure> {
    let mut groups = match &args.groups {
        Some(p) => parse_groups(&read_text(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        None => Vec::new(),
    };
    let mut records: Vec<BoltShearRecord> = Vec::new();
    let mut cases: Vec<String> = Vec::new();

    if let Some(deck) = &args.deck {
        let model = read_deck(deck)?;
        if args.groups.is_none() {
            groups = model.bolt_groups.clone();
        }
        let names: Vec<String> = args.constraint.iter().cloned().collect();
        let set = pick_constraints(&model, &names)?[0];
        let load_cases = if args.cases.is_empty() {
            model.load_cases.clone()
        } else {
            args.cases
                .iter()
                .map(|c| model.load_case(c).cloned().ok_or_else(|| Failure::input(format!("no load case {c} in deck"))))
                .collect::<Result<_, _>>()?
        };
        let members: HashSet<_> = groups.iter().flat_map(|g| g.members.iter().copied()).collect();
        let system = assemble_with_limit(&model, set, max_dofs()?).map_err(|e| Failure::fea(&e))?;
        let descriptor = FormatDescriptor::beam_forces();
        let mut doc = PunchDocument::default();
        for (k, case) in load_cases.iter().enumerate() {
            let r = static_case_on(&system, &model, case, &SafetyFactors::default()).map_err(|e| match &e {
                StaticError::Fea(fe) => Failure::fea(fe),
                _ => Failure::solver(e),
            })?;
            let bolts: Vec<BeamEndForces> = r.beam_forces.iter().filter(|f| members.contains(&f.element)).copied().collect();
            records.extend(records_from_forces(&case.name, &bolts).map_err(Failure::solver)?);
            doc.blocks.push(PunchBlock {
                headers: vec![
                    Header::Label(case.name.clone()),
                    Header::Other("ELEMENT FORCES".into()),
                    Header::Subcase(k as u32 + 1),
                ],
                records: bolts.iter().map(|f| bar_record(f, &descriptor)).collect(),
            });
            cases.push(case.name.clone());
        }
        if let Some(path) = &args.write_punch {
            let text = write_punch(&doc, &descriptor).map_err(Failure::input)?;
            std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        }
    } else {
        let punch = args.punch.as_ref().expect("clap requires deck or punch");
        let desc_path = args.descriptor.as_ref().expect("clap requires a descriptor with punch");
        let descriptor = FormatDescriptor::parse(&read_text(desc_path)?)
            .map_err(|e| Failure::input(format!("{}: {e}", desc_path.display())))?;
        let doc = parse_punch(&read_text(punch)?, &descriptor)
            .map_err(|e| Failure::input(format!("{}: {e}", punch.display())))?;
        let mut subcases: Vec<(u32, String)> = Vec::new();
        for b in &doc.blocks {
            if let (Some(sc), Some(name)) = (b.subcase(), case_name(b)) {
                if !subcases.iter().any(|(s, _)| *s == sc) {
                    subcases.push((sc, name));
                }
            }
        }
        for c in &args.cases {
            if !subcases.iter().any(|(_, n)| n == c) {
                return Err(Failure::input(format!("no subcase labelled {c} in {}", punch.display())));
            }
        }
        for (sc, name) in subcases {
            if !args.cases.is_empty() && !args.cases.contains(&name) {
                continue;
            }
            let x = extract_beam_forces(&doc, &descriptor, sc).map_err(Failure::input)?;
            for w in &x.warnings {
                eprintln!("warning: {w}");
            }
            for (eid, v1, v2) in x.forces {
                records.push(
                    BoltShearRecord::new(vibrakit_core::model::ElementId(eid), &name, v1, v2).map_err(Failure::input)?,
                );
            }
            cases.push(name);
        }
    }
    if groups.is_empty() {
        return Err(Failure::input("no bolt groups defined"));
    }
    if cases.is_empty() {
        return Err(Failure::input("no load cases to report"));
    }

    let mut report = BoltGroupReport::build(&records, &groups, &cases).map_err(Failure::input)?;
    if let Some(p) = &args.annotations {
        let loose = parse_annotations(&read_text(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
        report.apply_annotations(&loose).map_err(Failure::input)?;
    }

    if format == Format::Csv {
        let mut rows = Vec::new();
        for r in &report.rows {
            for (c, case) in report.cases.iter().enumerate() {
                rows.push(vec![
                    r.label.clone(),
                    r.bolt_count.to_string(),
                    case.clone(),
                    full(r.maxima[c].0),
                    r.maxima[c].1 .0.to_string(),
                    r.loosened[c].to_string(),
                ]);
            }
        }
        let headers = ["group", "bolts", "case", "max_shear_n", "governing_element", "loosened"];
        return Ok(Report::pass(csv_text(&headers, &rows)));
    }

    // The source stays out of the report so both sources print the same bytes.
    let mut text = String::from("Bolt shear, maximum SRSS per group (N)\nL marks loosening observed in test\n");
    let mut t = Table::new(
        ["Group".to_string(), "Bolts".into()].into_iter().chain(report.cases.iter().cloned()),
    );
    for r in &report.rows {
        let mut row = vec![r.label.clone(), r.bolt_count.to_string()];
        for c in 0..report.cases.len() {
            let flag = if r.loosened[c] { " L" } else { "  " };
            row.push(format!("{}{flag}", fixed(r.maxima[c].0, 1)));
        }
        t.row(row);
    }
    let mut total = vec!["total".to_string(), report.rows.iter().map(|r| r.bolt_count).sum::<usize>().to_string()];
    total.extend(report.cases.iter().map(|_| String::new()));
    t.row(total);
    text.push_str(&t.render());
    // Rank at the printed resolution: shears that print alike tie, and ties
    // keep declaration order instead of following round-off.
    let mut shown = report.clone();
    for r in &mut shown.rows {
        for m in &mut r.maxima {
            m.0 = fixed(m.0, 1).parse().expect("formatted float");
        }
    }
    for case in &report.cases {
        let rank: Vec<String> =
            rank_loosening_risk(&shown, case).iter().map(|e| format!("{} ({})", e.label, fixed(e.shear, 1))).collect();
        text.push_str(&format!("risk ranking {case}: {}\n", rank.join(" > ")));
    }
    Ok(Report::pass(text))
}

pub fn run_check(args: &CheckArgs, format: Format) -> Result<Report, Failure> {
    let stacks = parse_stackups(&read_text(&args.stackup)?)
        .map_err(|e| Failure::input(format!("{}: {e}", args.stackup.display())))?;
    if stacks.is_empty() {
        return Err(Failure::input(format!("{}: no BOLT lines", args.stackup.display())));
    }
    let checks: Vec<_> = stacks.iter().map(|s| (s, stackup_check(s))).collect();
    let pass = checks.iter().all(|(_, c)| c.pass);
    let clamped = |s: &vibrakit_core::bolt::StackUp| s.items.iter().map(|(_, t)| t).sum::<f64>();

    if format == Format::Csv {
        let rows: Vec<Vec<String>> = checks
            .iter()
            .map(|(s, c)| {
                vec![
                    c.label.clone(),
                    full(s.bolt_length),
                    full(clamped(s)),
                    full(c.engaged),
                    full(c.required),
                    full(c.tapped_depth),
                    if c.pass { "pass" } else { "FAIL" }.into(),
                    c.findings.join("; "),
                ]
            })
            .collect();
        let headers = ["position", "bolt_mm", "clamped_mm", "engaged_mm", "required_mm", "tapped_mm", "status", "findings"];
        return Ok(Report { text: csv_text(&headers, &rows), pass });
    }

    let mut t = Table::new([
        "Position",
        "Bolt (mm)",
        "Clamped (mm)",
        "Engaged (mm)",
        "Required (mm)",
        "Tapped (mm)",
        "Status",
    ]);
    let mut notes = String::new();
    for (s, c) in &checks {
        t.row(vec![
            c.label.clone(),
            fixed(s.bolt_length, 2),
            fixed(clamped(s), 2),
            fixed(c.engaged, 2),
            fixed(c.required, 2),
            fixed(c.tapped_depth, 2),
            if c.pass { "pass" } else { "FAIL" }.into(),
        ]);
        for f in &c.findings {
            notes.push_str(&format!("{}: {f}\n", c.label));
        }
    }
    let rule = "engagement must exceed the helicoil length by more than the margin";
    Ok(Report { text: format!("Bolt length check ({rule})\n{}{notes}", t.render()), pass })
}
