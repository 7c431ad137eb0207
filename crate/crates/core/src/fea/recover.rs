//! Element result recovery from a solved displacement field.

use nalgebra::{SMatrix, SVector};

use super::assemble::Kernel;
use super::{AssembledSystem, Displacements, FeaError};
use crate::model::ElementId;

/// Nodal force exerted on the element at one end, in the element frame.
/// Plane 1 is local x-y, plane 2 is local x-z.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EndForces {
    pub axial: f64,
    pub shear1: f64,
    pub shear2: f64,
    pub torque: f64,
    /// Moment about local z (bending in plane 1), N·m.
    pub moment1: f64,
    /// Moment about local y (bending in plane 2), N·m.
    pub moment2: f64,
}

impl EndForces {
    /// Resultant transverse shear, √(V1² + V2²).
    pub fn shear_resultant(&self) -> f64 {
        self.shear1.hypot(self.shear2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamEndForces {
    pub element: ElementId,
    pub length: f64,
    pub a: EndForces,
    pub b: EndForces,
}

impl BeamEndForces {
    /// Internal axial force, tension positive.
    pub fn axial_force(&self) -> f64 {
        self.b.axial
    }
}

/// Plane stress at one surface, element frame, Pa.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfaceStress {
    pub sx: f64,
    pub sy: f64,
    pub txy: f64,
}

impl SurfaceStress {
    pub fn von_mises(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy - self.sx * self.sy + 3.0 * self.txy * self.txy).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellStress {
    pub element: ElementId,
    pub top: SurfaceStress,
    pub bottom: SurfaceStress,
}

impl ShellStress {
    /// Larger surface von Mises stress.
    pub fn von_mises(&self) -> f64 {
        self.top.von_mises().max(self.bottom.von_mises())
    }
}

fn element_displacements<const N: usize>(u: &Displacements, dofs: &[usize]) -> SVector<f64, N> {
    SVector::<f64, N>::from_fn(|i, _| u.full[dofs[i]])
}

/// Local end forces K_local·T·u_e of a beam element.
pub fn recover_beam_end_forces(
    system: &AssembledSystem,
    u: &Displacements,
    element: ElementId,
) -> Result<BeamEndForces, FeaError> {
    let entry = system.element(element).ok_or(FeaError::UnknownElement(element))?;
    let Kernel::Beam(kernel) = &entry.kernel else {
        return Err(FeaError::UnknownElement(element));
    };
    let ue = element_displacements::<12>(u, &entry.dofs);
    let t: SMatrix<f64, 12, 12> = kernel.transformation();
    let f = kernel.k_local * (t * ue);
    let end = |o: usize| EndForces {
        axial: f[o],
        shear1: f[o + 1],
        shear2: f[o + 2],
        torque: f[o + 3],
        moment2: f[o + 4],
        moment1: f[o + 5],
    };
    Ok(BeamEndForces { element, length: kernel.length, a: end(0), b: end(6) })
}

/// Centroid stresses at both surfaces of a shell element.
pub fn recover_shell_stress(system: &AssembledSystem, u: &Displacements, element: ElementId) -> Result<ShellStress, FeaError> {
    let entry = system.element(element).ok_or(FeaError::UnknownElement(element))?;
    let Kernel::Shell(kernel) = &entry.kernel else {
        return Err(FeaError::UnknownElement(element));
    };
    let ue = element_displacements::<24>(u, &entry.dofs);
    let ul = kernel.transformation() * ue;
    let (top, bot) = kernel.centroid_stress(&ul);
    Ok(ShellStress {
        element,
        top: SurfaceStress { sx: top[0], sy: top[1], txy: top[2] },
        bottom: SurfaceStress { sx: bot[0], sy: bot[1], txy: bot[2] },
    })
}
