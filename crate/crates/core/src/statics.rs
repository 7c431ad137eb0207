//! Quasi-static acceleration cases: stress recovery on every element, the
//! peak von Mises stress, margins of safety and the ultimate-stress ratio.

use std::fmt;

use thiserror::Error;

use crate::fea::{
    assemble_with_limit, recover_beam_end_forces, recover_shell_stress, solve_static, AssembledSystem,
    BeamEndForces, Displacements, EndForces, FeaError, ShellStress,
};
use crate::model::{BeamSection, ConstraintSet, ElementId, LoadCase, Material, Model};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StaticError {
    #[error(transparent)]
    Fea(#[from] FeaError),
    #[error("no element stresses to search")]
    EmptyStressSet,
    #[error("{0} has no material")]
    NoMaterial(ElementId),
}

/// Factors of safety on yield and ultimate, and the allowed S_max/F_tu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyFactors {
    pub yield_factor: f64,
    pub ultimate_factor: f64,
    pub ratio_limit: f64,
}

impl Default for SafetyFactors {
    fn default() -> Self {
        SafetyFactors { yield_factor: 1.5, ultimate_factor: 2.0, ratio_limit: 0.30 }
    }
}

/// Margin of safety; zero applied stress gives an unbounded margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Margin {
    Value(f64),
    Unbounded,
}

impl Margin {
    pub fn value(self) -> Option<f64> {
        match self {
            Margin::Value(v) => Some(v),
            Margin::Unbounded => None,
        }
    }

    pub fn passes(self) -> bool {
        self.value().is_none_or(|v| v >= 0.0)
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Margin::Value(v) => write!(f, "{v:.2}"),
            Margin::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// MS = F/(S_max·FS) − 1 on yield and ultimate.
pub fn margin_of_safety(s_max: f64, material: &Material, factors: &SafetyFactors) -> (Margin, Margin) {
    if !(s_max > 0.0) {
        return (Margin::Unbounded, Margin::Unbounded);
    }
    (
        Margin::Value(material.yield_strength / (s_max * factors.yield_factor) - 1.0),
        Margin::Value(material.ultimate_strength / (s_max * factors.ultimate_factor) - 1.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCheck {
    /// S_max / F_tu
    pub ratio: f64,
    pub limit: f64,
    pub pass: bool,
}

impl RatioCheck {
    pub fn percent(&self) -> f64 {
        100.0 * self.ratio
    }
}

/// Passes while S_max/F_tu stays strictly below `limit`.
pub fn stress_ratio_check(s_max: f64, f_tu: f64, limit: f64) -> RatioCheck {
    let ratio = if f_tu > 0.0 { s_max / f_tu } else { f64::INFINITY };
    RatioCheck { ratio, limit, pass: ratio < limit }
}

/// Where on an element a stress was recovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StressLocation {
    Top,
    Bottom,
    /// Beam extreme fiber, worst end.
    Fiber,
}

impl fmt::Display for StressLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StressLocation::Top => "top",
            StressLocation::Bottom => "bottom",
            StressLocation::Fiber => "fiber",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressSample {
    pub element: ElementId,
    pub location: StressLocation,
    /// Equivalent stress, Pa.
    pub von_mises: f64,
}

/// Largest sample; ties go to the lowest element id, then top before bottom.
pub fn max_von_mises(samples: &[StressSample]) -> Result<StressSample, StaticError> {
    let mut best: Option<StressSample> = None;
    for s in samples {
        let better = match best {
            None => true,
            Some(b) => {
                s.von_mises > b.von_mises
                    || (s.von_mises == b.von_mises && (s.element, s.location) < (b.element, b.location))
            }
        };
        if better {
            best = Some(*s);
        }
    }
    best.ok_or(StaticError::EmptyStressSet)
}

/// Distance from the neutral axis to the extreme fiber, taken as that of a
/// solid round section with the same A and I (exact for bolt shanks).
fn fiber_distance(area: f64, inertia: f64) -> f64 {
    2.0 * (inertia / area).sqrt()
}

/// Extreme-fiber stress |N|/A + bending at one end of a beam. Equal
/// inertias combine the two bending moments vectorially.
pub fn beam_fiber_stress(section: &BeamSection, end: &EndForces) -> f64 {
    let axial = end.axial.abs() / section.area;
    let bz = end.moment1.abs() * fiber_distance(section.area, section.iz) / section.iz;
    let by = end.moment2.abs() * fiber_distance(section.area, section.iy) / section.iy;
    if section.iy == section.iz {
        axial + bz.hypot(by)
    } else {
        axial + bz + by
    }
}

#[derive(Debug, Clone)]
pub struct StaticResult {
    pub case: String,
    pub constraint: String,
    pub displacements: Displacements,
    pub shell_stresses: Vec<ShellStress>,
    pub beam_forces: Vec<BeamEndForces>,
    /// Every recovered equivalent stress, element order.
    pub samples: Vec<StressSample>,
    pub peak: StressSample,
    pub margin_yield: Margin,
    pub margin_ultimate: Margin,
    pub ratio: RatioCheck,
    /// Limits of the material owning the peak element, Pa.
    pub yield_strength: f64,
    pub ultimate_strength: f64,
}

impl StaticResult {
    pub fn s_max(&self) -> f64 {
        self.peak.von_mises
    }

    pub fn passes(&self) -> bool {
        self.margin_yield.passes() && self.margin_ultimate.passes() && self.ratio.pass
    }
}

pub fn run_static_case(
    model: &Model,
    constraint: &ConstraintSet,
    case: &LoadCase,
    factors: &SafetyFactors,
) -> Result<StaticResult, StaticError> {
    let system = assemble_with_limit(model, constraint, None)?;
    static_case_on(&system, model, case, factors)
}

/// Runs one case on an assembled system of `model`.
pub fn static_case_on(
    system: &AssembledSystem,
    model: &Model,
    case: &LoadCase,
    factors: &SafetyFactors,
) -> Result<StaticResult, StaticError> {
    let u = solve_static(system, case)?;
    let mut samples = Vec::new();
    let mut shell_stresses = Vec::with_capacity(model.shells.len());
    let mut beam_forces = Vec::with_capacity(model.beams.len());
    for shell in &model.shells {
        let s = recover_shell_stress(system, &u, shell.id)?;
        samples.push(StressSample { element: shell.id, location: StressLocation::Top, von_mises: s.top.von_mises() });
        samples.push(StressSample { element: shell.id, location: StressLocation::Bottom, von_mises: s.bottom.von_mises() });
        shell_stresses.push(s);
    }
    for beam in &model.beams {
        let f = recover_beam_end_forces(system, &u, beam.id)?;
        let fiber = beam_fiber_stress(&beam.section, &f.a).max(beam_fiber_stress(&beam.section, &f.b));
        samples.push(StressSample { element: beam.id, location: StressLocation::Fiber, von_mises: fiber });
        beam_forces.push(f);
    }
    samples.sort_by_key(|s| (s.element, s.location));
    shell_stresses.sort_by_key(|s| s.element);
    beam_forces.sort_by_key(|f| f.element);

    let peak = max_von_mises(&samples)?;
    let material_id = model
        .shell(peak.element)
        .map(|s| s.material)
        .or_else(|| model.beam(peak.element).map(|b| b.material))
        .ok_or(StaticError::NoMaterial(peak.element))?;
    let material = model.material(material_id).ok_or(StaticError::NoMaterial(peak.element))?;
    let (margin_yield, margin_ultimate) = margin_of_safety(peak.von_mises, material, factors);
    Ok(StaticResult {
        case: case.name.clone(),
        constraint: system.constraint.clone(),
        displacements: u,
        shell_stresses,
        beam_forces,
        samples,
        peak,
        margin_yield,
        margin_ultimate,
        ratio: stress_ratio_check(peak.von_mises, material.ultimate_strength, factors.ratio_limit),
        yield_strength: material.yield_strength,
        ultimate_strength: material.ultimate_strength,
    })
}
