//! Global assembly under a constraint set.
//!
//! Every node carries six DOFs. Rigid-link slaves are eliminated in favour
//! of their master (u_s = u_m + θ_m × d, θ_s = θ_m for the linked DOFs),
//! SPC DOFs are removed, and the remaining independent DOFs are numbered in
//! ascending (node order, DOF) order. Elements are scattered in ascending
//! element id order, so results are bit-reproducible.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::beam::BeamKernel;
use super::shell::ShellKernel;
use super::FeaError;
use crate::model::{ConstraintSet, Dof, ElementId, LoadCase, Model, NodeId, STANDARD_GRAVITY};

/// Status of one nodal DOF after constraint processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofState {
    /// Independent and unconstrained: carries equation `eq`.
    Free(usize),
    /// Removed by an SPC.
    Fixed,
    /// Expressed through a rigid-link master.
    Slave,
    /// Node not connected to any element, mass or rigid link.
    Inactive,
}

/// Mapping from nodal DOFs to equations of the reduced system.
#[derive(Debug, Clone)]
pub struct DofMap {
    node_ids: Vec<NodeId>,
    node_index: HashMap<NodeId, usize>,
    states: Vec<DofState>,
    /// For each nodal DOF, the independent nodal DOFs it is a combination of.
    deps: Vec<Vec<(usize, f64)>>,
    eq_dof: Vec<usize>,
}

impl DofMap {
    pub fn n_free(&self) -> usize {
        self.eq_dof.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn node_position(&self, node: NodeId) -> Option<usize> {
        self.node_index.get(&node).copied()
    }

    fn full_index(&self, node: NodeId, dof: Dof) -> Option<usize> {
        self.node_position(node).map(|i| 6 * i + dof.index())
    }

    pub fn state(&self, node: NodeId, dof: Dof) -> Option<DofState> {
        self.full_index(node, dof).map(|i| self.states[i])
    }

    pub fn equation(&self, node: NodeId, dof: Dof) -> Option<usize> {
        match self.state(node, dof)? {
            DofState::Free(eq) => Some(eq),
            _ => None,
        }
    }

    /// Node and DOF owning equation `eq`.
    pub fn equation_dof(&self, eq: usize) -> (NodeId, Dof) {
        let full = self.eq_dof[eq];
        (self.node_ids[full / 6], Dof::from_index(full % 6).unwrap())
    }

    /// Equations (with coefficients) that nodal DOF `full` depends on.
    fn free_terms(&self, full: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.deps[full].iter().filter_map(|&(d, c)| match self.states[d] {
            DofState::Free(eq) => Some((eq, c)),
            _ => None,
        })
    }

    /// Nodal displacements (6 per node, node order) from a free-DOF vector.
    pub fn expand(&self, free: &DVector<f64>) -> Vec<f64> {
        (0..self.states.len()).map(|i| self.free_terms(i).map(|(eq, c)| c * free[eq]).sum()).collect()
    }

    /// Rigid-body translation along `axis` restricted to the free DOFs.
    pub fn translation_vector(&self, axis: usize) -> DVector<f64> {
        DVector::from_fn(self.n_free(), |eq, _| if self.eq_dof[eq] % 6 == axis { 1.0 } else { 0.0 })
    }

    fn build(model: &Model, constraint: &ConstraintSet) -> Result<DofMap, FeaError> {
        let node_ids: Vec<NodeId> = model.nodes.iter().map(|n| n.id).collect();
        let node_index = model.node_index();
        let n_full = 6 * node_ids.len();

        let mut active = vec![false; node_ids.len()];
        let mut mark = |id: NodeId| {
            if let Some(&i) = node_index.get(&id) {
                active[i] = true;
            }
        };
        model.beams.iter().flat_map(|b| b.nodes).for_each(&mut mark);
        model.shells.iter().flat_map(|s| s.nodes).for_each(&mut mark);
        model.masses.iter().for_each(|m| mark(m.node));
        for l in &model.rigid_links {
            mark(l.master);
            l.slaves.iter().copied().for_each(&mut mark);
        }

        // slave DOF → master node index
        let mut master_of: HashMap<usize, usize> = HashMap::new();
        for l in &model.rigid_links {
            let m = *node_index.get(&l.master).ok_or(FeaError::RigidUnknownNode(l.id, l.master))?;
            for &s in &l.slaves {
                let si = *node_index.get(&s).ok_or(FeaError::RigidUnknownNode(l.id, s))?;
                if si == m {
                    return Err(FeaError::RigidCycle(s));
                }
                for dof in l.dofs.iter() {
                    if master_of.insert(6 * si + dof.index(), m).is_some() {
                        return Err(FeaError::SlaveConflict(s));
                    }
                }
            }
        }

        let positions: Vec<[f64; 3]> = model.nodes.iter().map(|n| n.position).collect();
        let mut deps: Vec<Option<Vec<(usize, f64)>>> = vec![None; n_full];
        let mut visiting = vec![false; n_full];
        for dof in 0..n_full {
            resolve(dof, &master_of, &positions, &node_ids, &mut deps, &mut visiting)?;
        }
        let deps: Vec<Vec<(usize, f64)>> = deps.into_iter().map(|d| d.unwrap()).collect();

        let mut states: Vec<DofState> = (0..n_full)
            .map(|i| {
                if !active[i / 6] {
                    DofState::Inactive
                } else if master_of.contains_key(&i) {
                    DofState::Slave
                } else {
                    DofState::Free(usize::MAX)
                }
            })
            .collect();
        let mut fixed: Vec<(NodeId, _)> = constraint.fixed_dofs().into_iter().collect();
        fixed.sort_by_key(|(n, _)| *n);
        for (node, mask) in fixed {
            let i = *node_index.get(&node).ok_or(FeaError::ConstraintUnknownNode(node))?;
            for dof in mask.iter() {
                let full = 6 * i + dof.index();
                match states[full] {
                    DofState::Slave => return Err(FeaError::SpcOnSlave(node)),
                    DofState::Inactive => {}
                    _ => states[full] = DofState::Fixed,
                }
            }
        }
        for p in &constraint.preloads {
            if !node_index.contains_key(&p.node) {
                return Err(FeaError::ConstraintUnknownNode(p.node));
            }
        }
        let mut eq_dof = Vec::new();
        for (i, s) in states.iter_mut().enumerate() {
            if let DofState::Free(eq) = s {
                *eq = eq_dof.len();
                eq_dof.push(i);
            }
        }
        if eq_dof.is_empty() {
            return Err(FeaError::NoFreeDofs);
        }
        Ok(DofMap { node_ids, node_index, states, deps, eq_dof })
    }
}

fn resolve(
    dof: usize,
    master_of: &HashMap<usize, usize>,
    positions: &[[f64; 3]],
    node_ids: &[NodeId],
    deps: &mut Vec<Option<Vec<(usize, f64)>>>,
    visiting: &mut Vec<bool>,
) -> Result<(), FeaError> {
    if deps[dof].is_some() {
        return Ok(());
    }
    let Some(&m) = master_of.get(&dof) else {
        deps[dof] = Some(vec![(dof, 1.0)]);
        return Ok(());
    };
    if visiting[dof] {
        return Err(FeaError::RigidCycle(node_ids[dof / 6]));
    }
    visiting[dof] = true;
    let s = dof / 6;
    let comp = dof % 6;
    let d = [0, 1, 2].map(|k| positions[s][k] - positions[m][k]);
    // Terms of the master's DOFs: (component, coefficient).
    let mut terms: Vec<(usize, f64)> = vec![(comp, 1.0)];
    if comp < 3 {
        // (θ × d) components
        let rot = match comp {
            0 => [(4, d[2]), (5, -d[1])],
            1 => [(5, d[0]), (3, -d[2])],
            _ => [(3, d[1]), (4, -d[0])],
        };
        terms.extend(rot.into_iter().filter(|&(_, c)| c != 0.0));
    }
    let mut combined: Vec<(usize, f64)> = Vec::new();
    for (c, coef) in terms {
        let md = 6 * m + c;
        resolve(md, master_of, positions, node_ids, deps, visiting)?;
        for &(ind, k) in deps[md].as_ref().unwrap() {
            combined.push((ind, coef * k));
        }
    }
    combined.sort_by_key(|&(i, _)| i);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(combined.len());
    for (i, c) in combined {
        match merged.last_mut() {
            Some((j, acc)) if *j == i => *acc += c,
            _ => merged.push((i, c)),
        }
    }
    merged.retain(|&(_, c)| c != 0.0);
    visiting[dof] = false;
    deps[dof] = Some(merged);
    Ok(())
}

#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    Beam(BeamKernel),
    Shell(ShellKernel),
}

#[derive(Debug, Clone)]
pub(crate) struct ElementEntry {
    pub id: ElementId,
    pub kernel: Kernel,
    /// Nodal DOF indices, 6 per element node.
    pub dofs: Vec<usize>,
    pub k_global: DMatrix<f64>,
}

/// Reduced stiffness and mass matrices with everything needed to form
/// loads and recover element results.
#[derive(Debug)]
pub struct AssembledSystem {
    pub constraint: String,
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub dofs: DofMap,
    /// Total translational mass of the unconstrained model per axis, kg.
    pub total_mass: [f64; 3],
    pub(crate) elements: Vec<ElementEntry>,
    /// Nodal inertia load per unit acceleration (1 m/s²) along each axis.
    pub(crate) body_load_full: [Vec<f64>; 3],
    pub(crate) preload_full: Vec<f64>,
    body_load: [DVector<f64>; 3],
    preload: DVector<f64>,
    factor: OnceLock<Result<Cholesky<f64, Dyn>, FeaError>>,
}

/// Assembles `model` under `constraint`.
pub fn assemble(model: &Model, constraint: &ConstraintSet) -> Result<AssembledSystem, FeaError> {
    assemble_with_limit(model, constraint, None)
}

/// As [`assemble`], refusing problems with more than `max_dofs` free DOFs.
pub fn assemble_with_limit(
    model: &Model,
    constraint: &ConstraintSet,
    max_dofs: Option<usize>,
) -> Result<AssembledSystem, FeaError> {
    let dofs = DofMap::build(model, constraint)?;
    let n = dofs.n_free();
    if let Some(limit) = max_dofs {
        if n > limit {
            return Err(FeaError::TooManyDofs { n, limit });
        }
    }
    let n_full = dofs.states.len();
    let node_index = &dofs.node_index;
    let position = |e: ElementId, id: NodeId| -> Result<(usize, [f64; 3]), FeaError> {
        let i = *node_index.get(&id).ok_or(FeaError::UnknownNode(e, id))?;
        Ok((i, model.nodes[i].position))
    };

    let mut elements: Vec<(ElementEntry, DMatrix<f64>)> = Vec::new();
    for b in &model.beams {
        let mat = model.material(b.material).ok_or(FeaError::UnknownMaterial(b.id))?;
        let (ia, pa) = position(b.id, b.nodes[0])?;
        let (ib, pb) = position(b.id, b.nodes[1])?;
        let kernel = BeamKernel::new(b, mat, [pa, pb])?;
        let (k, m) = kernel.global_matrices();
        let dofs_e = node_dofs(&[ia, ib]);
        let entry = ElementEntry { id: b.id, kernel: Kernel::Beam(kernel), dofs: dofs_e, k_global: DMatrix::from_iterator(12, 12, k.iter().copied()) };
        elements.push((entry, DMatrix::from_iterator(12, 12, m.iter().copied())));
    }
    for s in &model.shells {
        let mat = model.material(s.material).ok_or(FeaError::UnknownMaterial(s.id))?;
        let mut idx = [0usize; 4];
        let mut corners = [[0.0; 3]; 4];
        for c in 0..4 {
            (idx[c], corners[c]) = position(s.id, s.nodes[c])?;
        }
        let kernel = ShellKernel::new(s, mat, corners)?;
        let (k, m) = kernel.global_matrices();
        let entry = ElementEntry {
            id: s.id,
            kernel: Kernel::Shell(kernel),
            dofs: node_dofs(&idx),
            k_global: DMatrix::from_iterator(24, 24, k.iter().copied()),
        };
        elements.push((entry, DMatrix::from_iterator(24, 24, m.iter().copied())));
    }
    elements.sort_by_key(|(e, _)| e.id);

    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut body_load_full: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n_full]);
    let mut total_mass = [0.0; 3];
    for (entry, me) in &elements {
        scatter_upper(&dofs, &entry.dofs, &entry.k_global, &mut k);
        scatter_upper(&dofs, &entry.dofs, me, &mut m);
        for axis in 0..3 {
            for (a, &da) in entry.dofs.iter().enumerate() {
                let mut f = 0.0;
                for (b, &db) in entry.dofs.iter().enumerate() {
                    if db % 6 == axis {
                        f += me[(a, b)];
                    }
                }
                body_load_full[axis][da] += f;
                if da % 6 == axis {
                    total_mass[axis] += f;
                }
            }
        }
    }

    let mut masses: Vec<_> = model.masses.iter().collect();
    masses.sort_by_key(|p| p.id);
    for pm in masses {
        let i = *node_index.get(&pm.node).ok_or(FeaError::UnknownNode(ElementId(pm.id), pm.node))?;
        let mut diag = [0.0; 6];
        diag[..3].fill(pm.mass);
        diag[3..].copy_from_slice(&pm.inertia);
        let mut me = DMatrix::<f64>::zeros(6, 6);
        for (c, v) in diag.iter().enumerate() {
            me[(c, c)] = *v;
        }
        scatter_upper(&dofs, &node_dofs(&[i]), &me, &mut m);
        for axis in 0..3 {
            body_load_full[axis][6 * i + axis] += pm.mass;
            total_mass[axis] += pm.mass;
        }
    }
    mirror_upper(&mut k);
    mirror_upper(&mut m);

    let mut preload_full = vec![0.0; n_full];
    for p in &constraint.preloads {
        let i = *node_index.get(&p.node).ok_or(FeaError::ConstraintUnknownNode(p.node))?;
        for axis in 0..3 {
            preload_full[6 * i + axis] += p.force[axis];
        }
    }
    let body_load = std::array::from_fn(|axis| reduce(&dofs, &body_load_full[axis]));
    let preload = reduce(&dofs, &preload_full);

    Ok(AssembledSystem {
        constraint: constraint.name.clone(),
        k,
        m,
        dofs,
        total_mass,
        elements: elements.into_iter().map(|(e, _)| e).collect(),
        body_load_full,
        preload_full,
        body_load,
        preload,
        factor: OnceLock::new(),
    })
}

fn node_dofs(nodes: &[usize]) -> Vec<usize> {
    nodes.iter().flat_map(|&i| (0..6).map(move |c| 6 * i + c)).collect()
}

/// Adds Tᵀ·Ae·T into the upper triangle of `global`.
fn scatter_upper(dofs: &DofMap, element_dofs: &[usize], ae: &DMatrix<f64>, global: &mut DMatrix<f64>) {
    let terms: Vec<Vec<(usize, f64)>> = element_dofs.iter().map(|&d| dofs.free_terms(d).collect()).collect();
    for (a, ta) in terms.iter().enumerate() {
        for (b, tb) in terms.iter().enumerate() {
            let v = ae[(a, b)];
            if v == 0.0 {
                continue;
            }
            for &(ea, ca) in ta {
                for &(eb, cb) in tb {
                    if ea <= eb {
                        global[(ea, eb)] += ca * cb * v;
                    }
                }
            }
        }
    }
}

fn mirror_upper(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in j + 1..n {
            a[(i, j)] = a[(j, i)];
        }
    }
}

/// Tᵀ·f for a nodal vector.
fn reduce(dofs: &DofMap, full: &[f64]) -> DVector<f64> {
    let mut out = DVector::zeros(dofs.n_free());
    for (i, &f) in full.iter().enumerate() {
        if f != 0.0 {
            for (eq, c) in dofs.free_terms(i) {
                out[eq] += c * f;
            }
        }
    }
    out
}

impl AssembledSystem {
    pub fn n_free(&self) -> usize {
        self.dofs.n_free()
    }

    /// Free-DOF load vector: inertia load of the case acceleration plus the
    /// constraint set's preloads.
    pub fn load_vector(&self, case: &LoadCase) -> DVector<f64> {
        let mut f = self.preload.clone();
        for axis in 0..3 {
            let a = case.accel_g[axis] * STANDARD_GRAVITY;
            if a != 0.0 {
                f.axpy(a, &self.body_load[axis], 1.0);
            }
        }
        f
    }

    /// Nodal (unreduced) applied load of a case.
    pub(crate) fn full_load(&self, case: &LoadCase) -> Vec<f64> {
        let mut f = self.preload_full.clone();
        for axis in 0..3 {
            let a = case.accel_g[axis] * STANDARD_GRAVITY;
            for (fi, b) in f.iter_mut().zip(&self.body_load_full[axis]) {
                *fi += a * b;
            }
        }
        f
    }

    /// Tᵀ·M·r for a unit translation along `axis`, i.e. the inertia load per
    /// unit base acceleration.
    pub fn inertia_vector(&self, axis: usize) -> &DVector<f64> {
        &self.body_load[axis]
    }

    /// Cholesky factor of K, computed once.
    pub fn stiffness_factor(&self) -> Result<&Cholesky<f64, Dyn>, FeaError> {
        self.factor.get_or_init(|| factor_stiffness(&self.k)).as_ref().map_err(Clone::clone)
    }

    pub(crate) fn element(&self, id: ElementId) -> Option<&ElementEntry> {
        self.elements.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.elements[i])
    }

    /// Independent-DOF projection Tᵀ·v, keyed by nodal index, restricted to
    /// SPC-fixed DOFs.
    pub(crate) fn project_fixed(&self, full: &[f64]) -> Vec<(usize, f64)> {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for (i, &v) in full.iter().enumerate() {
            for &(d, c) in &self.dofs.deps[i] {
                if self.dofs.states[d] == DofState::Fixed {
                    *acc.entry(d).or_insert(0.0) += c * v;
                }
            }
        }
        let mut out: Vec<(usize, f64)> = acc.into_iter().collect();
        out.sort_by_key(|(d, _)| *d);
        out
    }
}

/// Relative pivot below which the stiffness is treated as singular.
const PIVOT_TOL: f64 = 1e-11;

fn factor_stiffness(k: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, FeaError> {
    let singular = || FeaError::Singular { zero_energy_modes: count_zero_energy_modes(k) };
    let chol = Cholesky::new(k.clone()).ok_or_else(singular)?;
    let l = chol.l_dirty();
    for i in 0..k.nrows() {
        if !(l[(i, i)] * l[(i, i)] > PIVOT_TOL * k[(i, i)]) {
            return Err(singular());
        }
    }
    Ok(chol)
}

/// Number of (near-)zero eigenvalues of a symmetric matrix, at least one.
fn count_zero_energy_modes(k: &DMatrix<f64>) -> usize {
    let eig = nalgebra::SymmetricEigen::new(k.clone());
    let max = eig.eigenvalues.amax();
    eig.eigenvalues.iter().filter(|&&v| v.abs() <= 1e-10 * max).count().max(1)
}
