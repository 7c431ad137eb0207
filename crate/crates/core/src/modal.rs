//! Normal-mode workflow: modes under a named constraint set, effective
//! modal mass per axis, dominant-axis classification and frequency checks.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fea::{assemble_with_limit, solve_modes, AssembledSystem, FeaError};
use crate::model::{ConstraintSet, Model};

/// Default ratio between the largest and second-largest effective mass for
/// a mode to be called single-axis.
pub const DOMINANCE_RATIO: f64 = 2.0;
/// Default fixture-to-article frequency ratio.
pub const SEPARATION_RATIO: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModalError {
    #[error(transparent)]
    Fea(#[from] FeaError),
    #[error("mode shape is not mass-normalized (φᵀMφ = {0})")]
    NotNormalized(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("modal result has no modes")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeClass {
    X,
    Y,
    Z,
    Mixed,
    /// No effective mass on any axis.
    None,
}

impl fmt::Display for ModeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeClass::X => "X",
            ModeClass::Y => "Y",
            ModeClass::Z => "Z",
            ModeClass::Mixed => "mixed",
            ModeClass::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeRecord {
    /// 1-based, ascending in frequency.
    pub index: usize,
    pub frequency_hz: f64,
    /// ω², rad²/s²
    pub eigenvalue: f64,
    /// Mass-normalized, over the free DOFs of the assembled system.
    pub shape: DVector<f64>,
    /// kg, X/Y/Z
    pub effective_mass: [f64; 3],
    pub class: ModeClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalResult {
    pub constraint: String,
    pub modes: Vec<ModeRecord>,
    /// Unconstrained translational mass per axis, kg.
    pub total_mass: [f64; 3],
}

impl ModalResult {
    pub fn first_frequency(&self) -> Option<f64> {
        self.modes.first().map(|m| m.frequency_hz)
    }

    /// Sum of effective masses over the computed modes, per axis.
    pub fn effective_mass_sum(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for m in &self.modes {
            for (acc, v) in s.iter_mut().zip(m.effective_mass) {
                *acc += v;
            }
        }
        s
    }
}

/// Assembles `model` under `constraint` and extracts the lowest `n_modes`.
pub fn normal_modes(model: &Model, constraint: &ConstraintSet, n_modes: usize) -> Result<ModalResult, ModalError> {
    normal_modes_limited(model, constraint, n_modes, None)
}

/// As [`normal_modes`], refusing systems above `max_dofs` free DOFs.
pub fn normal_modes_limited(
    model: &Model,
    constraint: &ConstraintSet,
    n_modes: usize,
    max_dofs: Option<usize>,
) -> Result<ModalResult, ModalError> {
    let system = assemble_with_limit(model, constraint, max_dofs)?;
    modes_of(&system, n_modes)
}

/// Modes of an already assembled system.
pub fn modes_of(system: &AssembledSystem, n_modes: usize) -> Result<ModalResult, ModalError> {
    let modes = solve_modes(system, n_modes)?;
    let records = modes
        .into_iter()
        .enumerate()
        .map(|(i, mode)| {
            // Γ = φᵀ·(Tᵀ·M·r): base-excitation participation, which also
            // counts coupling into constrained DOFs.
            let effective_mass: [f64; 3] = std::array::from_fn(|axis| {
                let gamma = mode.shape.dot(system.inertia_vector(axis));
                gamma * gamma
            });
            ModeRecord {
                index: i + 1,
                frequency_hz: mode.frequency_hz,
                eigenvalue: mode.eigenvalue,
                class: classify_mode(effective_mass, DOMINANCE_RATIO),
                shape: mode.shape,
                effective_mass,
            }
        })
        .collect();
    Ok(ModalResult { constraint: system.constraint.clone(), modes: records, total_mass: system.total_mass })
}

/// Γ² with Γ = φᵀ·M·r, for a mass-normalized φ.
pub fn effective_mass(shape: &DVector<f64>, mass: &DMatrix<f64>, r: &DVector<f64>) -> Result<f64, ModalError> {
    let mphi = mass * shape;
    let norm = shape.dot(&mphi);
    if !((norm - 1.0).abs() <= 1e-6) {
        return Err(ModalError::NotNormalized(norm));
    }
    let gamma = mphi.dot(r);
    Ok(gamma * gamma)
}

/// Dominant axis: the largest value wins when it is at least `ratio` times
/// the runner-up. Exact ties are mixed.
pub fn classify_mode(masses: [f64; 3], ratio: f64) -> ModeClass {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]));
    let (top, second) = (masses[order[0]], masses[order[1]]);
    if !(top > 0.0) {
        return ModeClass::None;
    }
    if top == second || top < ratio * second {
        return ModeClass::Mixed;
    }
    [ModeClass::X, ModeClass::Y, ModeClass::Z][order[0]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyCheck {
    pub frequency_hz: f64,
    pub floor_hz: f64,
    /// f1 − floor, Hz.
    pub margin_hz: f64,
    pub pass: bool,
}

/// f1 must be at least `floor_hz`.
pub fn check_min_frequency(result: &ModalResult, floor_hz: f64) -> Result<FrequencyCheck, ModalError> {
    let f1 = result.first_frequency().ok_or(ModalError::Empty)?;
    Ok(min_frequency(f1, floor_hz))
}

/// [`check_min_frequency`] on a bare frequency.
pub fn min_frequency(f1: f64, floor_hz: f64) -> FrequencyCheck {
    FrequencyCheck { frequency_hz: f1, floor_hz, margin_hz: f1 - floor_hz, pass: f1 >= floor_hz }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    /// f_fixture / f_article
    pub ratio: f64,
    pub pass: bool,
}

/// Fixture frequency relative to the article's; passes at `min_ratio` or above.
pub fn frequency_separation(f_article: f64, f_fixture: f64, min_ratio: f64) -> Result<Separation, ModalError> {
    for (v, what) in [(f_article, "article frequency"), (f_fixture, "fixture frequency"), (min_ratio, "ratio")] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ModalError::NonPositive(what));
        }
    }
    let ratio = f_fixture / f_article;
    Ok(Separation { ratio, pass: ratio >= min_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        assert_eq!(classify_mode([0.1, 23.3, 0.2], DOMINANCE_RATIO), ModeClass::Y);
        assert_eq!(classify_mode([5.0, 5.0, 5.0], DOMINANCE_RATIO), ModeClass::Mixed);
        assert_eq!(classify_mode([0.0, 0.0, 0.0], DOMINANCE_RATIO), ModeClass::None);
        assert_eq!(classify_mode([4.0, 2.0, 0.0], DOMINANCE_RATIO), ModeClass::X);
        assert_eq!(classify_mode([0.0, 3.0, 3.0], DOMINANCE_RATIO), ModeClass::Mixed);
    }

    #[test]
    fn frequency_floor_is_inclusive() {
        let c = min_frequency(96.1, 60.0);
        assert!(c.pass && (c.margin_hz - 36.1).abs() < 1e-9);
        assert!(!min_frequency(53.0, 60.0).pass);
        let edge = min_frequency(60.0, 60.0);
        assert!(edge.pass && edge.margin_hz == 0.0);
    }

    #[test]
    fn separation_examples() {
        let s = frequency_separation(97.0, 410.0, SEPARATION_RATIO).unwrap();
        assert!(s.pass && (s.ratio - 4.2268).abs() < 1e-3);
        assert!(frequency_separation(97.0, 197.0, SEPARATION_RATIO).unwrap().pass);
        let same = frequency_separation(97.0, 97.0, SEPARATION_RATIO).unwrap();
        assert!(!same.pass && same.ratio == 1.0);
        assert!(frequency_separation(0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn sdof_effective_mass_is_the_mass() {
        let m = DMatrix::from_element(1, 1, 4.0);
        let phi = DVector::from_element(1, 0.5);
        let r = DVector::from_element(1, 1.0);
        assert_eq!(effective_mass(&phi, &m, &r).unwrap(), 4.0);
        assert!(effective_mass(&DVector::from_element(1, 1.0), &m, &r).is_err());
    }
}
