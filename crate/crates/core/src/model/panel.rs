//! Simplified-panel calculators: a real panel (structure plus mounted
//! components) becomes a flat plate whose density is adjusted so that the
//! total mass is preserved, and whose thickness is tuned to reproduce the
//! real panel's first natural frequency.

use thiserror::Error;

use super::{
    ConstraintSet, DofMask, Material, MaterialId, Model, Node, NodeId, RigidLink, ShellElement, Spc,
    UnitSystem,
};
use crate::fea::{assemble, solve_modes, FeaError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PanelError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("target {target} Hz is not bracketed by f1 = {f_low} Hz .. {f_high} Hz")]
    NotBracketed { target: f64, f_low: f64, f_high: f64 },
    #[error("thickness search did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("modal solve failed: {0}")]
    Analysis(#[from] FeaError),
}

fn positive(value: f64, what: &'static str) -> Result<f64, PanelError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(PanelError::NonPositive(what))
    }
}

/// Density that makes `volume` weigh `total_mass`, kg/m³.
pub fn equivalent_density(total_mass: f64, volume: f64) -> Result<f64, PanelError> {
    Ok(positive(total_mass, "total mass")? / positive(volume, "volume")?)
}

/// Mass bookkeeping of one simplified panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelEquivalent {
    /// kg
    pub structural_mass: f64,
    /// kg
    pub component_mass: f64,
    /// m²
    pub area: f64,
    /// m
    pub thickness: f64,
    /// kg/m³
    pub density: f64,
}

impl PanelEquivalent {
    pub fn new(structural_mass: f64, component_mass: f64, area: f64, thickness: f64) -> Result<Self, PanelError> {
        if !(structural_mass >= 0.0 && component_mass >= 0.0) {
            return Err(PanelError::NonPositive("panel mass"));
        }
        let area = positive(area, "area")?;
        let thickness = positive(thickness, "thickness")?;
        let density = equivalent_density(structural_mass + component_mass, area * thickness)?;
        Ok(PanelEquivalent { structural_mass, component_mass, area, thickness, density })
    }

    pub fn total_mass(&self) -> f64 {
        self.structural_mass + self.component_mass
    }

    /// ρ·A·t, which should reproduce [`Self::total_mass`].
    pub fn reconstructed_mass(&self) -> f64 {
        self.density * self.area * self.thickness
    }
}

/// Rectangular single-panel model with a fixed boundary pattern, used to
/// tune the simplified thickness. Total mass stays constant: the density is
/// re-derived from it for every trial thickness.
#[derive(Debug, Clone)]
pub struct PanelTemplate {
    /// Plate extent along x and y, m.
    pub width: f64,
    pub height: f64,
    /// Elements along x and y.
    pub nx: usize,
    pub ny: usize,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// kg
    pub total_mass: f64,
    /// Grid points `(i, j)` clamped in all six DOFs.
    pub clamped: Vec<(usize, usize)>,
    /// Rigid-bar groups: the first grid point is the master.
    pub rigid_bars: Vec<Vec<(usize, usize)>>,
    pub max_iterations: usize,
}

impl PanelTemplate {
    /// A plate clamped at the four corners and the two mid-points of the
    /// long edges, the usual six-point panel mounting.
    pub fn six_point(width: f64, height: f64, n: usize, youngs_modulus: f64, poisson_ratio: f64, total_mass: f64) -> Self {
        let (nx, ny) = (n, n);
        let mid = nx / 2;
        PanelTemplate {
            width,
            height,
            nx,
            ny,
            youngs_modulus,
            poisson_ratio,
            total_mass,
            clamped: vec![(0, 0), (mid, 0), (nx, 0), (0, ny), (mid, ny), (nx, ny)],
            rigid_bars: Vec::new(),
            max_iterations: 80,
        }
    }

    fn node_id(&self, i: usize, j: usize) -> NodeId {
        NodeId((j * (self.nx + 1) + i + 1) as u32)
    }

    /// Builds the panel model at thickness `t` with its constraint set `T`.
    pub fn build(&self, thickness: f64) -> Result<Model, PanelError> {
        positive(thickness, "thickness")?;
        let area = positive(self.width, "width")? * positive(self.height, "height")?;
        let density = equivalent_density(self.total_mass, area * thickness)?;
        let mut model = Model { units: UnitSystem::Si, ..Default::default() };
        model.materials.push(Material {
            id: MaterialId(1),
            youngs_modulus: self.youngs_modulus,
            poisson_ratio: self.poisson_ratio,
            density,
            yield_strength: 1.0,
            ultimate_strength: 1.0,
        });
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                model.nodes.push(Node {
                    id: self.node_id(i, j),
                    position: [
                        self.width * i as f64 / self.nx as f64,
                        self.height * j as f64 / self.ny as f64,
                        0.0,
                    ],
                });
            }
        }
        let mut eid = 1;
        for j in 0..self.ny {
            for i in 0..self.nx {
                model.shells.push(ShellElement {
                    id: super::ElementId(eid),
                    nodes: [self.node_id(i, j), self.node_id(i + 1, j), self.node_id(i + 1, j + 1), self.node_id(i, j + 1)],
                    thickness,
                    material: MaterialId(1),
                });
                eid += 1;
            }
        }
        for (k, bar) in self.rigid_bars.iter().enumerate() {
            if let Some((&(mi, mj), rest)) = bar.split_first() {
                model.rigid_links.push(RigidLink {
                    id: k as u32 + 1,
                    master: self.node_id(mi, mj),
                    slaves: rest.iter().map(|&(i, j)| self.node_id(i, j)).collect(),
                    dofs: DofMask::ALL,
                });
            }
        }
        let mut set = ConstraintSet::new("T");
        set.spcs = self.clamped.iter().map(|&(i, j)| Spc { node: self.node_id(i, j), dofs: DofMask::ALL }).collect();
        model.constraint_sets.push(set);
        Ok(model)
    }

    /// First natural frequency at thickness `t`, Hz.
    pub fn first_frequency(&self, thickness: f64) -> Result<f64, PanelError> {
        let model = self.build(thickness)?;
        let sys = assemble(&model, &model.constraint_sets[0])?;
        Ok(solve_modes(&sys, 1)?[0].frequency_hz)
    }
}

/// Bisects on thickness until the template's f1 is within `tolerance` Hz of
/// `target_f1`.
pub fn match_equivalent_thickness(
    target_f1: f64,
    template: &PanelTemplate,
    bounds: (f64, f64),
    tolerance: f64,
) -> Result<f64, PanelError> {
    positive(target_f1, "target frequency")?;
    positive(tolerance, "tolerance")?;
    let (mut lo, mut hi) = (positive(bounds.0, "lower bound")?, positive(bounds.1, "upper bound")?);
    let f_low = template.first_frequency(lo)?;
    let f_high = template.first_frequency(hi)?;
    if !(f_low < target_f1 && target_f1 < f_high) {
        if (f_low - target_f1).abs() <= tolerance {
            return Ok(lo);
        }
        if (f_high - target_f1).abs() <= tolerance {
            return Ok(hi);
        }
        return Err(PanelError::NotBracketed { target: target_f1, f_low, f_high });
    }
    for _ in 0..template.max_iterations {
        let mid = 0.5 * (lo + hi);
        let f = template.first_frequency(mid)?;
        if (f - target_f1).abs() <= tolerance {
            return Ok(mid);
        }
        if f < target_f1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(PanelError::NoConvergence(template.max_iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_is_mass_over_volume() {
        assert_eq!(equivalent_density(1.0, 1.0).unwrap(), 1.0);
        assert!(equivalent_density(0.0, 1.0).is_err());
        assert!(equivalent_density(1.0, -1.0).is_err());
    }

    #[test]
    fn panel_equivalent_reconstructs_mass() {
        let p = PanelEquivalent::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.density, 2.0);
        assert_eq!(p.reconstructed_mass(), p.total_mass());
        assert!(PanelEquivalent::new(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
