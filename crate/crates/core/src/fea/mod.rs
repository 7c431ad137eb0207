//! Finite-element kernel: beam and flat-shell elements, constrained
//! assembly, static and eigen solvers, and element force recovery.

pub mod beam;
pub mod shell;

mod assemble;
mod eigen;
mod recover;
mod solve;

use thiserror::Error;

use crate::model::{ElementId, NodeId};

pub use assemble::{assemble, assemble_with_limit, AssembledSystem, DofMap, DofState};
pub use eigen::{solve_modes, Mode};
pub use recover::{recover_beam_end_forces, recover_shell_stress, BeamEndForces, EndForces, ShellStress, SurfaceStress};
pub use solve::{applied_load, reactions, solve_static, Displacements, STATIC_RESIDUAL_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeaError {
    #[error("{0} has zero length")]
    ZeroLength(ElementId),
    #[error("{0}: orientation vector is parallel to the element axis")]
    ParallelOrientation(ElementId),
    #[error("{0}: degenerate shell geometry")]
    DegenerateShell(ElementId),
    #[error("{0} references unknown {1}")]
    UnknownNode(ElementId, NodeId),
    #[error("{0} references an unknown material")]
    UnknownMaterial(ElementId),
    #[error("unknown {0}")]
    UnknownElement(ElementId),
    #[error("rigid link {0} references unknown {1}")]
    RigidUnknownNode(u32, NodeId),
    #[error("rigid links form a cycle through {0}")]
    RigidCycle(NodeId),
    #[error("{0} is a slave of more than one rigid link")]
    SlaveConflict(NodeId),
    #[error("{0} is constrained by SPC on a DOF slaved to a rigid link")]
    SpcOnSlave(NodeId),
    #[error("constraint references unknown {0}")]
    ConstraintUnknownNode(NodeId),
    #[error("no free degrees of freedom remain")]
    NoFreeDofs,
    #[error("{n} free DOFs exceed the limit of {limit}")]
    TooManyDofs { n: usize, limit: usize },
    #[error("stiffness matrix is singular: about {zero_energy_modes} zero-energy mode(s); check constraints")]
    Singular { zero_energy_modes: usize },
    #[error("a retained DOF has neither mass nor stiffness (isolated massless DOF)")]
    MasslessDof,
    #[error("requested {requested} modes but only {available} are available")]
    ModeCount { requested: usize, available: usize },
    #[error("eigen solver did not converge in {0} iterations")]
    NoConvergence(usize),
}
