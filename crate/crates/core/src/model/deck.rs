//! Line-oriented model deck: one card per line, comma-separated fields,
//! `#` starts a comment.
//!
//! ```text
//! UNITS,mm,g,N
//! MAT,id,E_GPa,nu,rho_gcc,Fty_MPa,Ftu_MPa
//! NODE,id,x,y,z
//! BEAM,id,mat,n1,n2,A_mm2,Iy_mm4,Iz_mm4,J_mm4,vx,vy,vz[,tag]
//! SHELL,id,mat,n1,n2,n3,n4,t_mm
//! MASS,id,node,kg[,Ixx,Iyy,Izz]
//! RIGID,id,master,dofmask,slave1[,slave2,...]
//! SPCSET,name
//! SPC,set,node,dofmask
//! RELEASE,set,node,dofmask
//! PRELOAD,set,node,Fx,Fy,Fz
//! ACCEL,case,gx,gy,gz
//! GROUP,label,eid1[,eid2,...]
//! ```
//!
//! Values are converted to SI once, at load. [`write_deck`] converts back
//! and prints numbers rounded to 12 significant digits, so that
//! `write_deck(parse_deck(d)) == canonicalize_deck(d)`.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{
    BeamElement, BeamSection, BeamTag, BoltGroupDef, ConstraintSet, DofMask, ElementId, LoadCase, Material,
    MaterialId, Model, Node, NodeId, PointMass, Preload, RigidLink, ShellElement, Spc, UnitSystem,
};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {card}: {kind}")]
pub struct DeckError {
    pub line: usize,
    pub card: String,
    pub kind: DeckErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeckErrorKind {
    #[error("unknown card")]
    UnknownCard,
    #[error("expected {expected} fields, found {found}")]
    Arity { expected: String, found: usize },
    #[error("field {field}: invalid {what} '{text}'")]
    BadField { field: usize, what: &'static str, text: String },
    #[error("unsupported unit system '{0}' (use mm,g,N or m,kg,N)")]
    Units(String),
    #[error("UNITS must precede every other card and appear once")]
    UnitsPlacement,
    #[error("dangling reference to {0}")]
    Dangling(String),
    #[error("duplicate {0}")]
    Duplicate(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Int,
    Num,
    Mask,
    Name,
    Tag,
    Unit,
}

struct CardSpec {
    name: &'static str,
    fields: &'static [Kind],
    /// Present entirely or not at all.
    optional: &'static [Kind],
    /// Any number of extra fields of this kind.
    repeat: Option<Kind>,
}

use Kind::*;

/// Canonical card order.
const CARDS: &[CardSpec] = &[
    CardSpec { name: "UNITS", fields: &[Unit, Unit, Unit], optional: &[], repeat: None },
    CardSpec { name: "MAT", fields: &[Int, Num, Num, Num, Num, Num], optional: &[], repeat: None },
    CardSpec { name: "NODE", fields: &[Int, Num, Num, Num], optional: &[], repeat: None },
    CardSpec {
        name: "BEAM",
        fields: &[Int, Int, Int, Int, Num, Num, Num, Num, Num, Num, Num],
        optional: &[Tag],
        repeat: None,
    },
    CardSpec { name: "SHELL", fields: &[Int, Int, Int, Int, Int, Int, Num], optional: &[], repeat: None },
    CardSpec { name: "MASS", fields: &[Int, Int, Num], optional: &[Num, Num, Num], repeat: None },
    CardSpec { name: "RIGID", fields: &[Int, Int, Mask, Int], optional: &[], repeat: Some(Int) },
    CardSpec { name: "SPCSET", fields: &[Name], optional: &[], repeat: None },
    CardSpec { name: "SPC", fields: &[Name, Int, Mask], optional: &[], repeat: None },
    CardSpec { name: "RELEASE", fields: &[Name, Int, Mask], optional: &[], repeat: None },
    CardSpec { name: "PRELOAD", fields: &[Name, Int, Num, Num, Num], optional: &[], repeat: None },
    CardSpec { name: "ACCEL", fields: &[Name, Num, Num, Num], optional: &[], repeat: None },
    CardSpec { name: "GROUP", fields: &[Name, Int], optional: &[], repeat: Some(Int) },
];

fn card_spec(name: &str) -> Option<(usize, &'static CardSpec)> {
    CARDS.iter().enumerate().find(|(_, c)| c.name == name)
}

/// A tokenized, arity-checked card.
struct Card<'a> {
    line: usize,
    name: String,
    order: usize,
    fields: Vec<&'a str>,
}

impl Card<'_> {
    fn err(&self, kind: DeckErrorKind) -> DeckError {
        DeckError { line: self.line, card: self.name.clone(), kind }
    }

    fn bad(&self, i: usize, what: &'static str) -> DeckError {
        self.err(DeckErrorKind::BadField { field: i + 1, what, text: self.fields[i].to_string() })
    }

    fn int(&self, i: usize) -> Result<u32, DeckError> {
        self.fields[i].parse::<u32>().map_err(|_| self.bad(i, "integer"))
    }

    fn num(&self, i: usize) -> Result<f64, DeckError> {
        match self.fields[i].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.bad(i, "number")),
        }
    }

    fn mask(&self, i: usize) -> Result<DofMask, DeckError> {
        DofMask::parse(self.fields[i]).ok_or_else(|| self.bad(i, "DOF mask"))
    }

    fn name_field(&self, i: usize) -> Result<String, DeckError> {
        let s = self.fields[i];
        if s.is_empty() {
            Err(self.bad(i, "name"))
        } else {
            Ok(s.to_string())
        }
    }
}

/// Strips comments and splits one line into a checked card. `None` for
/// blank lines.
fn tokenize(line_no: usize, raw: &str) -> Result<Option<Card<'_>>, DeckError> {
    let content = raw.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let mut parts = content.split(',').map(str::trim);
    let name = parts.next().unwrap_or("").to_ascii_uppercase();
    let fields: Vec<&str> = parts.collect();
    let Some((order, spec)) = card_spec(&name) else {
        return Err(DeckError { line: line_no, card: name, kind: DeckErrorKind::UnknownCard });
    };
    let base = spec.fields.len();
    let n = fields.len();
    let arity_ok = if spec.repeat.is_some() {
        n >= base
    } else {
        n == base || (!spec.optional.is_empty() && n == base + spec.optional.len())
    };
    if !arity_ok {
        let expected = if spec.repeat.is_some() {
            format!("at least {base}")
        } else if spec.optional.is_empty() {
            base.to_string()
        } else {
            format!("{base} or {}", base + spec.optional.len())
        };
        return Err(DeckError { line: line_no, card: name, kind: DeckErrorKind::Arity { expected, found: n } });
    }
    Ok(Some(Card { line: line_no, name, order, fields }))
}

fn kind_at(spec: &CardSpec, i: usize) -> Kind {
    if i < spec.fields.len() {
        spec.fields[i]
    } else if let Some(k) = spec.repeat {
        k
    } else {
        spec.optional[i - spec.fields.len()]
    }
}

#[derive(Debug, Clone, Copy)]
enum Quantity {
    Length,
    Area,
    SecondMoment,
    Modulus,
    Stress,
    Density,
    RotaryInertia,
}

fn to_si(units: UnitSystem, q: Quantity, v: f64) -> f64 {
    match units {
        UnitSystem::Si => v,
        UnitSystem::MillimetreGramNewton => match q {
            Quantity::Length => v / 1e3,
            Quantity::Area => v / 1e6,
            Quantity::SecondMoment => v / 1e12,
            Quantity::Modulus => v * 1e9,
            Quantity::Stress => v * 1e6,
            Quantity::Density => v * 1e3,
            Quantity::RotaryInertia => v / 1e6,
        },
    }
}

fn from_si(units: UnitSystem, q: Quantity, v: f64) -> f64 {
    match units {
        UnitSystem::Si => v,
        UnitSystem::MillimetreGramNewton => match q {
            Quantity::Length => v * 1e3,
            Quantity::Area => v * 1e6,
            Quantity::SecondMoment => v * 1e12,
            Quantity::Modulus => v / 1e9,
            Quantity::Stress => v / 1e6,
            Quantity::Density => v / 1e3,
            Quantity::RotaryInertia => v * 1e6,
        },
    }
}

fn parse_units(card: &Card) -> Result<UnitSystem, DeckError> {
    let f: Vec<String> = card.fields.iter().map(|s| s.to_ascii_lowercase()).collect();
    match (f[0].as_str(), f[1].as_str(), f[2].as_str()) {
        ("mm", "g", "n") => Ok(UnitSystem::MillimetreGramNewton),
        ("m", "kg", "n") => Ok(UnitSystem::Si),
        _ => Err(card.err(DeckErrorKind::Units(card.fields.join(",")))),
    }
}

fn units_fields(units: UnitSystem) -> &'static str {
    match units {
        UnitSystem::MillimetreGramNewton => "mm,g,N",
        UnitSystem::Si => "m,kg,N",
    }
}

/// Formats a number rounded to 12 significant digits, shortest form.
pub(crate) fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

struct SetEntry {
    line: usize,
    card: String,
    set: String,
    kind: SetEntryKind,
}

enum SetEntryKind {
    Spc(Spc),
    Release(Spc),
    Preload(Preload),
}

/// Parses a deck into a fully linked [`Model`].
///
/// Unknown cards, wrong arity, malformed fields, duplicate ids and dangling
/// references are errors. Geometric and physical invariants are left to
/// [`super::validate_model`].
pub fn parse_deck(text: &str) -> Result<Model, DeckError> {
    let mut model = Model::default();
    let mut lines = Lines::default();
    let mut set_entries: Vec<SetEntry> = Vec::new();
    let mut seen_other = false;
    let mut seen_units = false;

    for (i, raw) in text.lines().enumerate() {
        let Some(card) = tokenize(i + 1, raw)? else {
            continue;
        };
        let u = model.units;
        match card.name.as_str() {
            "UNITS" => {
                if seen_other || seen_units {
                    return Err(card.err(DeckErrorKind::UnitsPlacement));
                }
                seen_units = true;
                model.units = parse_units(&card)?;
                continue;
            }
            "MAT" => {
                model.materials.push(Material {
                    id: MaterialId(card.int(0)?),
                    youngs_modulus: to_si(u, Quantity::Modulus, card.num(1)?),
                    poisson_ratio: card.num(2)?,
                    density: to_si(u, Quantity::Density, card.num(3)?),
                    yield_strength: to_si(u, Quantity::Stress, card.num(4)?),
                    ultimate_strength: to_si(u, Quantity::Stress, card.num(5)?),
                });
                lines.materials.push(card.line);
            }
            "NODE" => {
                model.nodes.push(Node {
                    id: NodeId(card.int(0)?),
                    position: [
                        to_si(u, Quantity::Length, card.num(1)?),
                        to_si(u, Quantity::Length, card.num(2)?),
                        to_si(u, Quantity::Length, card.num(3)?),
                    ],
                });
                lines.nodes.push(card.line);
            }
            "BEAM" => {
                let tag = if card.fields.len() > 11 {
                    BeamTag::parse(card.fields[11]).ok_or_else(|| card.bad(11, "beam tag"))?
                } else {
                    BeamTag::Generic
                };
                model.beams.push(BeamElement {
                    id: ElementId(card.int(0)?),
                    material: MaterialId(card.int(1)?),
                    nodes: [NodeId(card.int(2)?), NodeId(card.int(3)?)],
                    section: BeamSection {
                        area: to_si(u, Quantity::Area, card.num(4)?),
                        iy: to_si(u, Quantity::SecondMoment, card.num(5)?),
                        iz: to_si(u, Quantity::SecondMoment, card.num(6)?),
                        torsion_constant: to_si(u, Quantity::SecondMoment, card.num(7)?),
                    },
                    orientation: [card.num(8)?, card.num(9)?, card.num(10)?],
                    tag,
                });
                lines.beams.push(card.line);
            }
            "SHELL" => {
                model.shells.push(ShellElement {
                    id: ElementId(card.int(0)?),
                    material: MaterialId(card.int(1)?),
                    nodes: [
                        NodeId(card.int(2)?),
                        NodeId(card.int(3)?),
                        NodeId(card.int(4)?),
                        NodeId(card.int(5)?),
                    ],
                    thickness: to_si(u, Quantity::Length, card.num(6)?),
                });
                lines.shells.push(card.line);
            }
            "MASS" => {
                let inertia = if card.fields.len() > 3 {
                    [
                        to_si(u, Quantity::RotaryInertia, card.num(3)?),
                        to_si(u, Quantity::RotaryInertia, card.num(4)?),
                        to_si(u, Quantity::RotaryInertia, card.num(5)?),
                    ]
                } else {
                    [0.0; 3]
                };
                model.masses.push(PointMass {
                    id: card.int(0)?,
                    node: NodeId(card.int(1)?),
                    mass: card.num(2)?,
                    inertia,
                });
                lines.masses.push(card.line);
            }
            "RIGID" => {
                let slaves = (3..card.fields.len()).map(|i| card.int(i).map(NodeId)).collect::<Result<_, _>>()?;
                model.rigid_links.push(RigidLink {
                    id: card.int(0)?,
                    master: NodeId(card.int(1)?),
                    dofs: card.mask(2)?,
                    slaves,
                });
                lines.rigid_links.push(card.line);
            }
            "SPCSET" => {
                model.constraint_sets.push(ConstraintSet::new(card.name_field(0)?));
                lines.constraint_sets.push(card.line);
            }
            "SPC" | "RELEASE" => {
                let spc = Spc { node: NodeId(card.int(1)?), dofs: card.mask(2)? };
                let kind = if card.name == "SPC" { SetEntryKind::Spc(spc) } else { SetEntryKind::Release(spc) };
                set_entries.push(SetEntry { line: card.line, card: card.name.clone(), set: card.name_field(0)?, kind });
            }
            "PRELOAD" => {
                let preload = Preload {
                    node: NodeId(card.int(1)?),
                    force: [card.num(2)?, card.num(3)?, card.num(4)?],
                };
                set_entries.push(SetEntry {
                    line: card.line,
                    card: card.name.clone(),
                    set: card.name_field(0)?,
                    kind: SetEntryKind::Preload(preload),
                });
            }
            "ACCEL" => {
                model.load_cases.push(LoadCase {
                    name: card.name_field(0)?,
                    accel_g: [card.num(1)?, card.num(2)?, card.num(3)?],
                });
                lines.load_cases.push(card.line);
            }
            "GROUP" => {
                let members = (1..card.fields.len()).map(|i| card.int(i).map(ElementId)).collect::<Result<_, _>>()?;
                model.bolt_groups.push(BoltGroupDef { label: card.name_field(0)?, members });
                lines.bolt_groups.push(card.line);
            }
            _ => unreachable!("card table and parser out of sync"),
        }
        seen_other = true;
    }

    check_duplicates(&model, &lines)?;

    // Attach set entries, now that every SPCSET is known.
    for entry in set_entries {
        let Some(set) = model.constraint_sets.iter_mut().find(|s| s.name == entry.set) else {
            return Err(DeckError {
                line: entry.line,
                card: entry.card,
                kind: DeckErrorKind::Dangling(format!("constraint set {}", entry.set)),
            });
        };
        let node = match &entry.kind {
            SetEntryKind::Spc(s) | SetEntryKind::Release(s) => s.node,
            SetEntryKind::Preload(p) => p.node,
        };
        lines.set_nodes.push((entry.line, entry.card.clone(), node));
        match entry.kind {
            SetEntryKind::Spc(s) => set.spcs.push(s),
            SetEntryKind::Release(s) => set.releases.push(s),
            SetEntryKind::Preload(p) => set.preloads.push(p),
        }
    }

    check_references(&model, &lines)?;
    Ok(model)
}

/// Source line of every entity, aligned with the model's vectors.
#[derive(Default)]
struct Lines {
    materials: Vec<usize>,
    nodes: Vec<usize>,
    beams: Vec<usize>,
    shells: Vec<usize>,
    masses: Vec<usize>,
    rigid_links: Vec<usize>,
    constraint_sets: Vec<usize>,
    load_cases: Vec<usize>,
    bolt_groups: Vec<usize>,
    set_nodes: Vec<(usize, String, NodeId)>,
}

fn dup_check<K: std::hash::Hash + Eq, I: Iterator<Item = K>>(
    keys: I,
    lines: &[usize],
    card: &str,
    describe: impl Fn(&K) -> String,
) -> Result<(), DeckError> {
    let mut seen = HashSet::new();
    for (k, &line) in keys.zip(lines) {
        let d = describe(&k);
        if !seen.insert(k) {
            return Err(DeckError { line, card: card.to_string(), kind: DeckErrorKind::Duplicate(d) });
        }
    }
    Ok(())
}

fn check_duplicates(m: &Model, l: &Lines) -> Result<(), DeckError> {
    dup_check(m.materials.iter().map(|x| x.id), &l.materials, "MAT", |k| k.to_string())?;
    dup_check(m.nodes.iter().map(|x| x.id), &l.nodes, "NODE", |k| k.to_string())?;
    // Beams and shells share one element id space.
    let mut element_lines: Vec<(usize, &str, ElementId)> = m
        .beams
        .iter()
        .zip(&l.beams)
        .map(|(b, &line)| (line, "BEAM", b.id))
        .chain(m.shells.iter().zip(&l.shells).map(|(s, &line)| (line, "SHELL", s.id)))
        .collect();
    element_lines.sort_by_key(|(line, _, _)| *line);
    let mut seen = HashSet::new();
    for (line, card, id) in element_lines {
        if !seen.insert(id) {
            return Err(DeckError { line, card: card.to_string(), kind: DeckErrorKind::Duplicate(id.to_string()) });
        }
    }
    dup_check(m.masses.iter().map(|x| x.id), &l.masses, "MASS", |k| format!("mass {k}"))?;
    dup_check(m.rigid_links.iter().map(|x| x.id), &l.rigid_links, "RIGID", |k| format!("rigid link {k}"))?;
    dup_check(m.constraint_sets.iter().map(|x| x.name.clone()), &l.constraint_sets, "SPCSET", |k| {
        format!("constraint set {k}")
    })?;
    dup_check(m.load_cases.iter().map(|x| x.name.clone()), &l.load_cases, "ACCEL", |k| format!("load case {k}"))?;
    dup_check(m.bolt_groups.iter().map(|x| x.label.clone()), &l.bolt_groups, "GROUP", |k| format!("group {k}"))?;
    Ok(())
}

fn check_references(m: &Model, l: &Lines) -> Result<(), DeckError> {
    let nodes: HashSet<NodeId> = m.nodes.iter().map(|n| n.id).collect();
    let mats: HashSet<MaterialId> = m.materials.iter().map(|x| x.id).collect();
    let beams: HashSet<ElementId> = m.beams.iter().map(|b| b.id).collect();
    let dangling = |line: usize, card: &str, what: String| DeckError {
        line,
        card: card.to_string(),
        kind: DeckErrorKind::Dangling(what),
    };
    for (b, &line) in m.beams.iter().zip(&l.beams) {
        if !mats.contains(&b.material) {
            return Err(dangling(line, "BEAM", b.material.to_string()));
        }
        for n in b.nodes {
            if !nodes.contains(&n) {
                return Err(dangling(line, "BEAM", n.to_string()));
            }
        }
    }
    for (s, &line) in m.shells.iter().zip(&l.shells) {
        if !mats.contains(&s.material) {
            return Err(dangling(line, "SHELL", s.material.to_string()));
        }
        for n in s.nodes {
            if !nodes.contains(&n) {
                return Err(dangling(line, "SHELL", n.to_string()));
            }
        }
    }
    for (pm, &line) in m.masses.iter().zip(&l.masses) {
        if !nodes.contains(&pm.node) {
            return Err(dangling(line, "MASS", pm.node.to_string()));
        }
    }
    for (r, &line) in m.rigid_links.iter().zip(&l.rigid_links) {
        for n in std::iter::once(&r.master).chain(&r.slaves) {
            if !nodes.contains(n) {
                return Err(dangling(line, "RIGID", n.to_string()));
            }
        }
    }
    for (line, card, n) in &l.set_nodes {
        if !nodes.contains(n) {
            return Err(dangling(*line, card, n.to_string()));
        }
    }
    for (g, &line) in m.bolt_groups.iter().zip(&l.bolt_groups) {
        for e in &g.members {
            if !beams.contains(e) {
                return Err(dangling(line, "GROUP", format!("beam {}", e.0)));
            }
        }
    }
    Ok(())
}

/// Serializes a model in canonical card order using the model's declared
/// unit system.
pub fn write_deck(model: &Model) -> String {
    let u = model.units;
    let n = |q: Quantity, v: f64| fmt_num(from_si(u, q, v));
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!("UNITS,{}", units_fields(u)));
    for m in &model.materials {
        line(format!(
            "MAT,{},{},{},{},{},{}",
            m.id.0,
            n(Quantity::Modulus, m.youngs_modulus),
            fmt_num(m.poisson_ratio),
            n(Quantity::Density, m.density),
            n(Quantity::Stress, m.yield_strength),
            n(Quantity::Stress, m.ultimate_strength)
        ));
    }
    for nd in &model.nodes {
        let [x, y, z] = nd.position.map(|v| n(Quantity::Length, v));
        line(format!("NODE,{},{x},{y},{z}", nd.id.0));
    }
    for b in &model.beams {
        let [vx, vy, vz] = b.orientation.map(fmt_num);
        line(format!(
            "BEAM,{},{},{},{},{},{},{},{},{vx},{vy},{vz},{}",
            b.id.0,
            b.material.0,
            b.nodes[0].0,
            b.nodes[1].0,
            n(Quantity::Area, b.section.area),
            n(Quantity::SecondMoment, b.section.iy),
            n(Quantity::SecondMoment, b.section.iz),
            n(Quantity::SecondMoment, b.section.torsion_constant),
            b.tag.as_str()
        ));
    }
    for s in &model.shells {
        line(format!(
            "SHELL,{},{},{},{},{},{},{}",
            s.id.0,
            s.material.0,
            s.nodes[0].0,
            s.nodes[1].0,
            s.nodes[2].0,
            s.nodes[3].0,
            n(Quantity::Length, s.thickness)
        ));
    }
    for pm in &model.masses {
        let mut s = format!("MASS,{},{},{}", pm.id, pm.node.0, fmt_num(pm.mass));
        if pm.inertia.iter().any(|&v| v != 0.0) {
            for v in pm.inertia {
                s.push(',');
                s.push_str(&n(Quantity::RotaryInertia, v));
            }
        }
        line(s);
    }
    for r in &model.rigid_links {
        let slaves: Vec<String> = r.slaves.iter().map(|s| s.0.to_string()).collect();
        line(format!("RIGID,{},{},{},{}", r.id, r.master.0, r.dofs, slaves.join(",")));
    }
    for set in &model.constraint_sets {
        line(format!("SPCSET,{}", set.name));
    }
    for set in &model.constraint_sets {
        for s in &set.spcs {
            line(format!("SPC,{},{},{}", set.name, s.node.0, s.dofs));
        }
    }
    for set in &model.constraint_sets {
        for s in &set.releases {
            line(format!("RELEASE,{},{},{}", set.name, s.node.0, s.dofs));
        }
    }
    for set in &model.constraint_sets {
        for p in &set.preloads {
            let [fx, fy, fz] = p.force.map(fmt_num);
            line(format!("PRELOAD,{},{},{fx},{fy},{fz}", set.name, p.node.0));
        }
    }
    for c in &model.load_cases {
        let [gx, gy, gz] = c.accel_g.map(fmt_num);
        line(format!("ACCEL,{},{gx},{gy},{gz}", c.name));
    }
    for g in &model.bolt_groups {
        let ids: Vec<String> = g.members.iter().map(|e| e.0.to_string()).collect();
        line(format!("GROUP,{},{}", g.label, ids.join(",")));
    }
    out
}

/// Text-level normalization of a deck: comments and blank lines removed,
/// card names upper-cased, numbers rounded to 12 significant digits, masks
/// sorted, optional defaults made explicit (or dropped when zero), and cards
/// sorted into canonical order. Constraint-set entries are grouped by set in
/// declaration order.
///
/// Works on the text alone; it does not resolve references.
pub fn canonicalize_deck(text: &str) -> Result<String, DeckError> {
    let mut cards: Vec<(usize, usize, usize, String)> = Vec::new();
    let mut set_order: HashMap<String, usize> = HashMap::new();
    let mut has_units = false;

    let mut tokenized = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(card) = tokenize(i + 1, raw)? {
            if card.name == "SPCSET" {
                let next = set_order.len();
                set_order.entry(card.fields[0].to_string()).or_insert(next);
            }
            tokenized.push(card);
        }
    }

    for card in tokenized {
        let spec = &CARDS[card.order];
        let mut fields: Vec<String> = Vec::with_capacity(card.fields.len());
        if card.name == "UNITS" {
            has_units = true;
            fields.push(units_fields(parse_units(&card)?).to_string());
        } else {
            for (i, f) in card.fields.iter().enumerate() {
                let normalized = match kind_at(spec, i) {
                    Int => card.int(i)?.to_string(),
                    Num => fmt_num(card.num(i)?),
                    Mask => card.mask(i)?.to_string(),
                    Name => card.name_field(i)?,
                    Tag => BeamTag::parse(f).ok_or_else(|| card.bad(i, "beam tag"))?.as_str().to_string(),
                    Unit => unreachable!(),
                };
                fields.push(normalized);
            }
        }
        match card.name.as_str() {
            "BEAM" if fields.len() == 11 => fields.push("generic".to_string()),
            "MASS" if fields.len() == 6 && fields[3..].iter().all(|f| f == "0") => fields.truncate(3),
            _ => {}
        }
        let sub = match card.name.as_str() {
            "SPC" | "RELEASE" | "PRELOAD" => set_order.get(card.fields[0]).copied().unwrap_or(usize::MAX),
            _ => 0,
        };
        cards.push((card.order, sub, card.line, format!("{},{}", card.name, fields.join(","))));
    }
    if !has_units {
        cards.push((0, 0, 0, format!("UNITS,{}", units_fields(UnitSystem::default()))));
    }
    cards.sort_by_key(|(order, sub, line, _)| (*order, *sub, *line));
    let mut out = String::new();
    for (_, _, _, text) in cards {
        out.push_str(&text);
        out.push('\n');
    }
    Ok(out)
}
