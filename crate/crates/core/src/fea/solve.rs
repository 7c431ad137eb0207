//! Linear static solution and support reactions.

use nalgebra::{DMatrix, DVector};

use super::{AssembledSystem, FeaError};
use crate::model::{Dof, LoadCase, NodeId};

/// Solution of K·u = f.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacements {
    /// Free-DOF vector.
    pub free: DVector<f64>,
    /// All nodal DOFs (6 per node, model node order), slaves expanded and
    /// constrained DOFs zero.
    pub full: Vec<f64>,
}

impl Displacements {
    /// The six displacement components of `node`.
    pub fn node(&self, system: &AssembledSystem, node: NodeId) -> Option<[f64; 6]> {
        let i = system.dofs.node_position(node)?;
        Some(std::array::from_fn(|c| self.full[6 * i + c]))
    }
}

/// Relative residual the static solve must reach.
pub const STATIC_RESIDUAL_TOL: f64 = 1e-10;

/// Solves the case's inertia load plus preloads.
pub fn solve_static(system: &AssembledSystem, case: &LoadCase) -> Result<Displacements, FeaError> {
    let f = system.load_vector(case);
    solve_load(system, &f)
}

pub(crate) fn solve_load(system: &AssembledSystem, f: &DVector<f64>) -> Result<Displacements, FeaError> {
    let chol = system.stiffness_factor()?;
    let mut u = chol.solve(f);
    let f_norm = f.norm();
    // Iterative refinement on a compensated residual: stiff connectors next
    // to soft bending DOFs make a plain f − K·u too noisy to converge.
    let (mut r, mut floor) = residual(&system.k, &u, f);
    for _ in 0..4 {
        if r.norm() <= 1e-3 * STATIC_RESIDUAL_TOL * f_norm {
            break;
        }
        let next = &u + chol.solve(&r);
        let (r_next, floor_next) = residual(&system.k, &next, f);
        if r_next.norm() >= r.norm() {
            break;
        }
        (u, r, floor) = (next, r_next, floor_next);
    }
    if f_norm > 0.0 {
        // Rounding u itself leaves a residual of order eps·‖|K|·|u|‖, which
        // on slender meshes exceeds the relative target.
        if !(r.norm() <= STATIC_RESIDUAL_TOL * f_norm + 8.0 * f64::EPSILON * floor) {
            return Err(FeaError::Singular { zero_energy_modes: 0 });
        }
    }
    let full = system.dofs.expand(&u);
    Ok(Displacements { free: u, full })
}

/// f − K·u with error-free products and compensated summation per row,
/// and the norm of |K|·|u|.
fn residual(k: &DMatrix<f64>, u: &DVector<f64>, f: &DVector<f64>) -> (DVector<f64>, f64) {
    let mut magnitude = 0.0;
    let r = DVector::from_fn(f.len(), |i, _| {
        let (mut sum, mut err, mut abs) = (f[i], 0.0, 0.0);
        for (j, &uj) in u.iter().enumerate() {
            let a = -k[(i, j)];
            let p = a * uj;
            abs += p.abs();
            let e = a.mul_add(uj, -p);
            let s = sum + p;
            let z = s - sum;
            err += (sum - (s - z)) + (p - z) + e;
            sum = s;
        }
        magnitude += abs * abs;
        sum + err
    });
    (r, magnitude.sqrt())
}

/// Reaction forces at every SPC-fixed DOF, ordered by node then DOF.
/// Their translational sum balances the total applied load.
pub fn reactions(system: &AssembledSystem, u: &Displacements, case: &LoadCase) -> Vec<(NodeId, Dof, f64)> {
    let mut residual = system.full_load(case);
    for r in residual.iter_mut() {
        *r = -*r;
    }
    for e in &system.elements {
        let ue = DVector::from_iterator(e.dofs.len(), e.dofs.iter().map(|&d| u.full[d]));
        let fe = &e.k_global * ue;
        for (a, &d) in e.dofs.iter().enumerate() {
            residual[d] += fe[a];
        }
    }
    let nodes = system.dofs.node_ids();
    system
        .project_fixed(&residual)
        .into_iter()
        .map(|(d, v)| (nodes[d / 6], Dof::from_index(d % 6).unwrap(), v))
        .collect()
}

/// Total applied nodal load of a case per global axis, N.
pub fn applied_load(system: &AssembledSystem, case: &LoadCase) -> [f64; 3] {
    let f = system.full_load(case);
    std::array::from_fn(|axis| f.iter().skip(axis).step_by(6).sum())
}
