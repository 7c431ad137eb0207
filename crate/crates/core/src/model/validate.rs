//! Model invariant checks. Findings are data; an empty report means the
//! model is fit for analysis.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{cross, dot, norm, sub, BeamTag, DofMask, ElementId, MaterialId, Model, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    /// Offending entity, e.g. `element 12`, `constraint set A`.
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}: {}", self.entity, self.message)
    }
}

struct Report(Vec<Finding>);

impl Report {
    fn error(&mut self, entity: impl fmt::Display, message: impl Into<String>) {
        self.0.push(Finding { severity: Severity::Error, entity: entity.to_string(), message: message.into() });
    }

    fn warning(&mut self, entity: impl fmt::Display, message: impl Into<String>) {
        self.0.push(Finding { severity: Severity::Warning, entity: entity.to_string(), message: message.into() });
    }
}

/// Relative tolerance for geometric degeneracy tests.
const GEOM_TOL: f64 = 1e-9;

/// Checks every model invariant and returns one finding per violation.
pub fn validate_model(model: &Model) -> Vec<Finding> {
    let mut r = Report(Vec::new());

    let mut mat_ids = HashSet::new();
    for m in &model.materials {
        if !mat_ids.insert(m.id) {
            r.error(m.id, "duplicate id");
        }
        if !(m.youngs_modulus > 0.0) {
            r.error(m.id, "Young's modulus must be positive");
        }
        if !(0.0..0.5).contains(&m.poisson_ratio) {
            r.error(m.id, "Poisson ratio outside [0, 0.5)");
        }
        if !(m.density >= 0.0) {
            r.error(m.id, "negative density");
        }
        if !(m.yield_strength > 0.0 && m.yield_strength <= m.ultimate_strength) {
            r.error(m.id, "require 0 < Fty <= Ftu");
        }
    }

    let mut positions: HashMap<NodeId, [f64; 3]> = HashMap::new();
    for n in &model.nodes {
        if positions.insert(n.id, n.position).is_some() {
            r.error(n.id, "duplicate id");
        }
        if n.position.iter().any(|v| !v.is_finite()) {
            r.error(n.id, "non-finite position");
        }
    }
    let pos = |id: NodeId| positions.get(&id).copied();
    let check_node = |r: &mut Report, entity: &dyn fmt::Display, id: NodeId| -> bool {
        if positions.contains_key(&id) {
            true
        } else {
            r.error(entity, format!("dangling {id}"));
            false
        }
    };
    let check_mat = |r: &mut Report, entity: &dyn fmt::Display, id: MaterialId| {
        if !mat_ids.contains(&id) {
            r.error(entity, format!("dangling {id}"));
        }
    };

    let mut elem_ids: HashSet<ElementId> = HashSet::new();
    for b in &model.beams {
        if !elem_ids.insert(b.id) {
            r.error(b.id, "duplicate id");
        }
        check_mat(&mut r, &b.id, b.material);
        let ok_a = check_node(&mut r, &b.id, b.nodes[0]);
        let ok_b = check_node(&mut r, &b.id, b.nodes[1]);
        let s = &b.section;
        if !(s.area > 0.0 && s.iy > 0.0 && s.iz > 0.0 && s.torsion_constant > 0.0) {
            r.error(b.id, "section properties must be positive");
        }
        if b.nodes[0] == b.nodes[1] {
            r.error(b.id, "beam connects a node to itself");
            continue;
        }
        if let (true, true, Some(pa), Some(pb)) = (ok_a, ok_b, pos(b.nodes[0]), pos(b.nodes[1])) {
            let axis = sub(pb, pa);
            let len = norm(axis);
            if !(len > 0.0) {
                r.error(b.id, "zero-length beam");
                continue;
            }
            let v = b.orientation;
            let vn = norm(v);
            if !(vn > 0.0) || norm(cross(axis, v)) <= GEOM_TOL * len * vn {
                r.error(b.id, "orientation vector parallel to beam axis");
            }
        }
    }

    for s in &model.shells {
        if !elem_ids.insert(s.id) {
            r.error(s.id, "duplicate id");
        }
        check_mat(&mut r, &s.id, s.material);
        if !(s.thickness > 0.0) {
            r.error(s.id, "thickness must be positive");
        }
        let mut all_present = true;
        for &n in &s.nodes {
            all_present &= check_node(&mut r, &s.id, n);
        }
        let unique: HashSet<NodeId> = s.nodes.iter().copied().collect();
        if unique.len() < 4 {
            r.error(s.id, "degenerate shell: repeated corner node");
            continue;
        }
        if all_present {
            let p: Vec<[f64; 3]> = s.nodes.iter().map(|&n| pos(n).unwrap()).collect();
            if let Some(msg) = quad_defect(&p) {
                r.error(s.id, format!("degenerate shell: {msg}"));
            } else if warp(&p) > 1e-3 {
                r.warning(s.id, "shell corners are not coplanar");
            }
        }
    }

    let mut mass_ids = HashSet::new();
    for m in &model.masses {
        let entity = format!("mass {}", m.id);
        if !mass_ids.insert(m.id) {
            r.error(&entity, "duplicate id");
        }
        check_node(&mut r, &entity, m.node);
        if !(m.mass >= 0.0) || !m.mass.is_finite() {
            r.error(&entity, "mass must be non-negative");
        }
        if m.inertia.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            r.error(&entity, "rotary inertia must be non-negative");
        }
    }

    let mut link_ids = HashSet::new();
    for l in &model.rigid_links {
        let entity = format!("rigid link {}", l.id);
        if !link_ids.insert(l.id) {
            r.error(&entity, "duplicate id");
        }
        check_node(&mut r, &entity, l.master);
        if l.slaves.is_empty() {
            r.error(&entity, "no slave nodes");
        }
        for &s in &l.slaves {
            check_node(&mut r, &entity, s);
            if s == l.master {
                r.error(&entity, "master node listed among slaves");
            }
        }
        if l.dofs.is_empty() {
            r.error(&entity, "empty DOF mask");
        }
    }

    let mut set_names = HashSet::new();
    for set in &model.constraint_sets {
        let entity = format!("constraint set {}", set.name);
        if !set_names.insert(set.name.as_str()) {
            r.error(&entity, "duplicate name");
        }
        for e in set.spcs.iter().chain(&set.releases) {
            check_node(&mut r, &entity, e.node);
            if e.dofs.is_empty() {
                r.error(&entity, format!("empty DOF mask at {}", e.node));
            }
        }
        for p in &set.preloads {
            check_node(&mut r, &entity, p.node);
            if p.force.iter().any(|v| !v.is_finite()) {
                r.error(&entity, format!("non-finite preload at {}", p.node));
            }
        }
        let fixed = set.fixed_dofs();
        let mut released: HashMap<NodeId, DofMask> = HashMap::new();
        for e in &set.releases {
            let m = released.entry(e.node).or_default();
            *m = m.union(e.dofs);
        }
        let mut clashes: Vec<(NodeId, DofMask)> = released
            .iter()
            .filter_map(|(n, rel)| {
                let both = fixed.get(n).copied().unwrap_or_default().intersection(*rel);
                (!both.is_empty()).then_some((*n, both))
            })
            .collect();
        clashes.sort_by_key(|(n, _)| *n);
        for (n, both) in clashes {
            r.error(&entity, format!("DOFs {both} of {n} are both fixed and released"));
        }
    }

    let mut case_names = HashSet::new();
    for c in &model.load_cases {
        let entity = format!("load case {}", c.name);
        if !case_names.insert(c.name.as_str()) {
            r.error(&entity, "duplicate name");
        }
        if c.accel_g.iter().any(|v| !v.is_finite()) {
            r.error(&entity, "non-finite acceleration");
        }
    }

    let tags: HashMap<ElementId, BeamTag> = model.beams.iter().map(|b| (b.id, b.tag)).collect();
    let mut owner: HashMap<ElementId, &str> = HashMap::new();
    let mut labels = HashSet::new();
    for g in &model.bolt_groups {
        let entity = format!("group {}", g.label);
        if !labels.insert(g.label.as_str()) {
            r.error(&entity, "duplicate label");
        }
        if g.members.is_empty() {
            r.error(&entity, "empty group");
        }
        for &e in &g.members {
            match tags.get(&e) {
                None => r.error(&entity, format!("dangling beam {}", e.0)),
                Some(BeamTag::Bolt) => {}
                Some(_) => r.error(&entity, format!("member {e} is not tagged bolt")),
            }
            if let Some(prev) = owner.insert(e, &g.label) {
                if prev != g.label {
                    r.error(&entity, format!("{e} already belongs to group {prev}"));
                }
            }
        }
    }

    if !(model.total_mass() > 0.0) {
        r.error("model", "total mass must be positive");
    }
    r.0
}

/// Describes why a quad cannot be meshed, or `None` if it is a proper
/// convex quadrilateral.
fn quad_defect(p: &[[f64; 3]]) -> Option<&'static str> {
    let scale = (0..4).map(|i| norm(sub(p[(i + 1) % 4], p[i]))).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Some("coincident corners");
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if norm(sub(p[j], p[i])) <= GEOM_TOL * scale {
                return Some("coincident corners");
            }
        }
    }
    let normal = cross(sub(p[2], p[0]), sub(p[3], p[1]));
    if norm(normal) <= GEOM_TOL * scale * scale {
        return Some("zero area");
    }
    // Convex and counter-clockwise about the mean normal: every corner turns
    // the same way.
    for i in 0..4 {
        let a = sub(p[(i + 1) % 4], p[i]);
        let b = sub(p[(i + 2) % 4], p[(i + 1) % 4]);
        if dot(cross(a, b), normal) <= GEOM_TOL * scale * scale {
            return Some("non-convex or self-intersecting quad");
        }
    }
    None
}

/// Out-of-plane distance of the corners relative to the quad size.
fn warp(p: &[[f64; 3]]) -> f64 {
    let n = cross(sub(p[2], p[0]), sub(p[3], p[1]));
    let nn = norm(n);
    let centre = [0, 1, 2].map(|k| p.iter().map(|c| c[k]).sum::<f64>() / 4.0);
    let size = nn.sqrt();
    p.iter().map(|c| dot(sub(*c, centre), n).abs() / nn).fold(0.0, f64::max) / size
}
