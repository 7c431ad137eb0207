//! Bolt shear screening: SRSS shear per bolt element, maximum per bolt
//! group and load case, a loosening-risk ranking, and the bolt-length
//! stack-up rule.

use std::collections::HashMap;

use thiserror::Error;

use crate::fea::BeamEndForces;
use crate::model::{BoltGroupDef, ElementId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoltError {
    #[error("shear components must be finite")]
    NonFinite,
    #[error("bolt group {0} has no members")]
    EmptyGroup(String),
    #[error("no shear record for {element} in case {case}")]
    MissingRecord { element: ElementId, case: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("annotation references unknown group {0}")]
    UnknownGroup(String),
}

/// √(V1² + V2²) without intermediate overflow.
pub fn srss_shear(v1: f64, v2: f64) -> Result<f64, BoltError> {
    if !(v1.is_finite() && v2.is_finite()) {
        return Err(BoltError::NonFinite);
    }
    Ok(v1.hypot(v2))
}

/// Transverse shear of one bolt element in one load case.
#[derive(Debug, Clone, PartialEq)]
pub struct BoltShearRecord {
    pub element: ElementId,
    pub case: String,
    /// N, element plane 1 and plane 2.
    pub v1: f64,
    pub v2: f64,
    pub srss: f64,
}

impl BoltShearRecord {
    pub fn new(element: ElementId, case: &str, v1: f64, v2: f64) -> Result<Self, BoltError> {
        Ok(BoltShearRecord { element, case: case.to_string(), v1, v2, srss: srss_shear(v1, v2)? })
    }
}

/// Shear pair of the end with the larger SRSS (end A on a tie).
pub fn governing_shear(forces: &BeamEndForces) -> (f64, f64) {
    let (a, b) = (&forces.a, &forces.b);
    if b.shear_resultant() > a.shear_resultant() {
        (b.shear1, b.shear2)
    } else {
        (a.shear1, a.shear2)
    }
}

/// One record per element from recovered beam end forces.
pub fn records_from_forces(case: &str, forces: &[BeamEndForces]) -> Result<Vec<BoltShearRecord>, BoltError> {
    forces
        .iter()
        .map(|f| {
            let (v1, v2) = governing_shear(f);
            BoltShearRecord::new(f.element, case, v1, v2)
        })
        .collect()
}

/// Maximum member shear of one group in one case.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMax {
    pub label: String,
    pub bolt_count: usize,
    pub case: String,
    /// N
    pub shear: f64,
    pub governing: ElementId,
}

/// Per-group maxima for `case`, in group declaration order. The first
/// member reaching the maximum governs.
pub fn group_max_shear(records: &[BoltShearRecord], groups: &[BoltGroupDef], case: &str) -> Result<Vec<GroupMax>, BoltError> {
    let by_element: HashMap<ElementId, &BoltShearRecord> =
        records.iter().filter(|r| r.case == case).map(|r| (r.element, r)).collect();
    groups
        .iter()
        .map(|g| {
            let mut best: Option<(f64, ElementId)> = None;
            for &member in &g.members {
                let r = by_element
                    .get(&member)
                    .ok_or_else(|| BoltError::MissingRecord { element: member, case: case.to_string() })?;
                if best.is_none_or(|(s, _)| r.srss > s) {
                    best = Some((r.srss, member));
                }
            }
            let (shear, governing) = best.ok_or_else(|| BoltError::EmptyGroup(g.label.clone()))?;
            Ok(GroupMax { label: g.label.clone(), bolt_count: g.members.len(), case: case.to_string(), shear, governing })
        })
        .collect()
}

/// One report row: a group's maxima across the reported cases.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    pub label: String,
    pub bolt_count: usize,
    /// Parallel to [`BoltGroupReport::cases`].
    pub maxima: Vec<(f64, ElementId)>,
    /// Observed loosening per case, from test annotations.
    pub loosened: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoltGroupReport {
    pub cases: Vec<String>,
    pub rows: Vec<GroupRow>,
}

impl BoltGroupReport {
    pub fn build(records: &[BoltShearRecord], groups: &[BoltGroupDef], cases: &[String]) -> Result<Self, BoltError> {
        let mut rows: Vec<GroupRow> = groups
            .iter()
            .map(|g| GroupRow { label: g.label.clone(), bolt_count: g.members.len(), maxima: Vec::new(), loosened: Vec::new() })
            .collect();
        for case in cases {
            for (row, gm) in rows.iter_mut().zip(group_max_shear(records, groups, case)?) {
                row.maxima.push((gm.shear, gm.governing));
                row.loosened.push(false);
            }
        }
        Ok(BoltGroupReport { cases: cases.to_vec(), rows })
    }

    /// Marks observed loosening. Annotations for cases outside the report
    /// are ignored; unknown groups are an error.
    pub fn apply_annotations(&mut self, loose: &[(String, String)]) -> Result<(), BoltError> {
        for (group, case) in loose {
            let row = self.rows.iter_mut().find(|r| &r.label == group).ok_or_else(|| BoltError::UnknownGroup(group.clone()))?;
            if let Some(c) = self.cases.iter().position(|c| c == case) {
                row.loosened[c] = true;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskEntry {
    pub label: String,
    pub shear: f64,
}

/// Heuristic ranking: groups by descending maximum shear in `case`, equal
/// values kept in declaration order. Empty when the case is not reported.
pub fn rank_loosening_risk(report: &BoltGroupReport, case: &str) -> Vec<RiskEntry> {
    let Some(c) = report.cases.iter().position(|x| x == case) else {
        return Vec::new();
    };
    let mut out: Vec<RiskEntry> =
        report.rows.iter().map(|r| RiskEntry { label: r.label.clone(), shear: r.maxima[c].0 }).collect();
    out.sort_by(|a, b| b.shear.total_cmp(&a.shear));
    out
}

/// `LOOSE,<group>,<case>` lines; `#` starts a comment.
pub fn parse_annotations(text: &str) -> Result<Vec<(String, String)>, BoltError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match fields.as_slice() {
            [card, group, case] if card.eq_ignore_ascii_case("LOOSE") && !group.is_empty() && !case.is_empty() => {
                out.push((group.to_string(), case.to_string()))
            }
            _ => return Err(BoltError::Syntax { line: i + 1, message: format!("expected LOOSE,<group>,<case>, found {line:?}") }),
        }
    }
    Ok(out)
}

/// `GROUP,<label>,<eid>[,<eid>...]` lines, the deck's group card on its
/// own; `#` starts a comment. Element ids are not checked against a model.
pub fn parse_groups(text: &str) -> Result<Vec<BoltGroupDef>, BoltError> {
    let mut out: Vec<BoltGroupDef> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| BoltError::Syntax { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 || !fields[0].eq_ignore_ascii_case("GROUP") || fields[1].is_empty() {
            return Err(err(format!("expected GROUP,<label>,<eid>[,...], found {line:?}")));
        }
        if out.iter().any(|g| g.label == fields[1]) {
            return Err(err(format!("duplicate group {}", fields[1])));
        }
        let members = fields[2..]
            .iter()
            .map(|f| f.parse::<u32>().ok().filter(|&e| e > 0).map(ElementId).ok_or_else(|| err(format!("bad element id {f:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(BoltGroupDef { label: fields[1].to_string(), members });
    }
    Ok(out)
}

pub const HELICOIL_LENGTH_MM: f64 = 8.0;
pub const ENGAGEMENT_MARGIN_MM: f64 = 4.0;

/// Bolt stack-up at one fastener position. Lengths in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct StackUp {
    pub label: String,
    /// Length under the head.
    pub bolt_length: f64,
    /// Clamped items: washers, insulating plates, the panel.
    pub items: Vec<(String, f64)>,
    pub helicoil_length: f64,
    pub tapped_depth: f64,
    /// Engagement must exceed the helicoil by more than this.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackCheck {
    pub label: String,
    /// Bolt length left for thread engagement, mm.
    pub engaged: f64,
    /// helicoil + margin, mm; `engaged` must be strictly greater.
    pub required: f64,
    pub tapped_depth: f64,
    pub pass: bool,
    pub findings: Vec<String>,
}

pub fn stackup_check(stack: &StackUp) -> StackCheck {
    let clamped: f64 = stack.items.iter().map(|(_, t)| t).sum();
    let engaged = stack.bolt_length - clamped;
    let required = stack.helicoil_length + stack.margin;
    let mut findings = Vec::new();
    if !(engaged > required) {
        findings.push(format!(
            "engagement {} mm does not exceed helicoil {} mm by more than {} mm",
            fmt_mm(engaged),
            fmt_mm(stack.helicoil_length),
            fmt_mm(stack.margin)
        ));
    }
    if engaged > stack.tapped_depth {
        findings.push(format!(
            "bolt cannot be fully inserted: engagement {} mm exceeds tapped depth {} mm",
            fmt_mm(engaged),
            fmt_mm(stack.tapped_depth)
        ));
    }
    StackCheck {
        label: stack.label.clone(),
        engaged,
        required,
        tapped_depth: stack.tapped_depth,
        pass: findings.is_empty(),
        findings,
    }
}

fn fmt_mm(v: f64) -> String {
    format!("{:.2}", v)
}

/// Stack-up file:
///
/// ```text
/// # BOLT,<label>,<length>,<tapped depth>[,<helicoil>[,<margin>]]
/// BOLT,P1,16,14
/// ITEM,washer,1.0
/// ITEM,panel,2.0
/// ```
///
/// `ITEM` lines belong to the preceding `BOLT`. Helicoil defaults to 8 mm
/// and margin to 4 mm.
pub fn parse_stackups(text: &str) -> Result<Vec<StackUp>, BoltError> {
    let mut out: Vec<StackUp> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| BoltError::Syntax { line: line_no, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |k: usize| -> Result<f64, BoltError> {
            match fields[k].parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                _ => Err(err(format!("field {} is not a non-negative number: {:?}", k + 1, fields[k]))),
            }
        };
        match fields[0].to_ascii_uppercase().as_str() {
            "BOLT" => {
                if !(4..=6).contains(&fields.len()) || fields[1].is_empty() {
                    return Err(err("expected BOLT,<label>,<length>,<tapped depth>[,<helicoil>[,<margin>]]".into()));
                }
                let helicoil_length = if fields.len() > 4 { num(4)? } else { HELICOIL_LENGTH_MM };
                if !(helicoil_length > 0.0) {
                    return Err(err("helicoil length must be positive".into()));
                }
                out.push(StackUp {
                    label: fields[1].to_string(),
                    bolt_length: num(2)?,
                    items: Vec::new(),
                    helicoil_length,
                    tapped_depth: num(3)?,
                    margin: if fields.len() > 5 { num(5)? } else { ENGAGEMENT_MARGIN_MM },
                });
            }
            "ITEM" => {
                if fields.len() != 3 || fields[1].is_empty() {
                    return Err(err("expected ITEM,<name>,<thickness>".into()));
                }
                let thickness = num(2)?;
                let bolt = out.last_mut().ok_or_else(|| err("ITEM before any BOLT".into()))?;
                bolt.items.push((fields[1].to_string(), thickness));
            }
            other => return Err(err(format!("unknown card {other}"))),
        }
    }
    Ok(out)
}
