//! Structural model: materials, nodes, elements, constraint sets, load cases
//! and bolt groups. All quantities are stored in SI units.

mod deck;
mod panel;
mod validate;

use std::collections::HashMap;
use std::fmt;

pub use deck::{canonicalize_deck, parse_deck, write_deck, DeckError, DeckErrorKind};
pub use panel::{equivalent_density, match_equivalent_thickness, PanelEquivalent, PanelError, PanelTemplate};
pub use validate::{validate_model, Finding, Severity};

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

macro_rules! id_type {
    ($name:ident, $label:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", $label, self.0)
            }
        }
    };
}

id_type!(NodeId, "node");
id_type!(ElementId, "element");
id_type!(MaterialId, "material");

/// One of the six nodal degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dof {
    Tx,
    Ty,
    Tz,
    Rx,
    Ry,
    Rz,
}

impl Dof {
    pub const ALL: [Dof; 6] = [Dof::Tx, Dof::Ty, Dof::Tz, Dof::Rx, Dof::Ry, Dof::Rz];

    /// Zero-based position within a node's 6-DOF block.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Dof> {
        Self::ALL.get(i).copied()
    }
}

/// Set of nodal DOFs, written in decks as digits 1–6 (`123456` = all).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DofMask(u8);

impl DofMask {
    pub const ALL: DofMask = DofMask(0b11_1111);
    pub const TRANSLATIONS: DofMask = DofMask(0b00_0111);
    pub const EMPTY: DofMask = DofMask(0);

    pub fn from_dofs(dofs: &[Dof]) -> Self {
        DofMask(dofs.iter().fold(0, |acc, d| acc | (1 << d.index())))
    }

    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() {
            return None;
        }
        let mut bits = 0u8;
        for c in text.chars() {
            let digit = c.to_digit(10)?;
            if !(1..=6).contains(&digit) {
                return None;
            }
            bits |= 1 << (digit - 1);
        }
        Some(DofMask(bits))
    }

    pub fn contains(self, dof: Dof) -> bool {
        self.0 & (1 << dof.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: DofMask) -> DofMask {
        DofMask(self.0 | other.0)
    }

    pub fn intersection(self, other: DofMask) -> DofMask {
        DofMask(self.0 & other.0)
    }

    pub fn without(self, other: DofMask) -> DofMask {
        DofMask(self.0 & !other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Dof> {
        Dof::ALL.into_iter().filter(move |d| self.contains(*d))
    }
}

impl fmt::Display for DofMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.iter() {
            write!(f, "{}", d.index() + 1)?;
        }
        Ok(())
    }
}

/// Unit convention of a deck. The model itself is always SI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    /// `UNITS,mm,g,N`: lengths in mm, moduli in GPa, densities in g/cm³,
    /// strengths in MPa, point masses in kg, rotary inertia in kg·mm².
    #[default]
    MillimetreGramNewton,
    /// `UNITS,m,kg,N`: every field in SI base units.
    Si,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub id: MaterialId,
    /// Young's modulus, Pa.
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// kg/m³
    pub density: f64,
    /// Tensile yield strength F_ty, Pa.
    pub yield_strength: f64,
    /// Tensile ultimate strength F_tu, Pa.
    pub ultimate_strength: f64,
}

impl Material {
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    /// m
    pub position: [f64; 3],
}

/// Beam cross-section properties (m², m⁴).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSection {
    pub area: f64,
    pub iy: f64,
    pub iz: f64,
    pub torsion_constant: f64,
}

impl BeamSection {
    /// Solid circular section, the default idealization of a bolt shank.
    pub fn circular(diameter: f64) -> Self {
        let r = 0.5 * diameter;
        let i = std::f64::consts::PI * r.powi(4) / 4.0;
        BeamSection {
            area: std::f64::consts::PI * r * r,
            iy: i,
            iz: i,
            torsion_constant: 2.0 * i,
        }
    }

    /// Solid rectangle, `width` along local y and `height` along local z.
    pub fn rectangular(width: f64, height: f64) -> Self {
        let (a, b) = if width >= height { (width, height) } else { (height, width) };
        let j = a * b.powi(3) * (1.0 / 3.0 - 0.21 * (b / a) * (1.0 - b.powi(4) / (12.0 * a.powi(4))));
        BeamSection {
            area: width * height,
            iy: width * height.powi(3) / 12.0,
            iz: height * width.powi(3) / 12.0,
            torsion_constant: j,
        }
    }
}

/// Role of a beam element in the structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BeamTag {
    Bolt,
    Rail,
    #[default]
    Generic,
}

impl BeamTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BeamTag::Bolt => "bolt",
            BeamTag::Rail => "rail",
            BeamTag::Generic => "generic",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "bolt" => Some(BeamTag::Bolt),
            "rail" => Some(BeamTag::Rail),
            "generic" => Some(BeamTag::Generic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamElement {
    pub id: ElementId,
    pub nodes: [NodeId; 2],
    pub section: BeamSection,
    pub material: MaterialId,
    /// Vector in the local x–y plane; must not be parallel to the beam axis.
    pub orientation: [f64; 3],
    pub tag: BeamTag,
}

/// Flat four-node shell, corners counter-clockwise about the element normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellElement {
    pub id: ElementId,
    pub nodes: [NodeId; 4],
    /// m
    pub thickness: f64,
    pub material: MaterialId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub id: u32,
    pub node: NodeId,
    /// kg
    pub mass: f64,
    /// Rotary inertia about the global axes, kg·m².
    pub inertia: [f64; 3],
}

/// Rigid bar: the listed DOFs of every slave follow the master rigidly.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidLink {
    pub id: u32,
    pub master: NodeId,
    pub slaves: Vec<NodeId>,
    pub dofs: DofMask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spc {
    pub node: NodeId,
    pub dofs: DofMask,
}

/// Concentrated force applied whenever the owning constraint set is active.
#[derive(Debug, Clone, PartialEq)]
pub struct Preload {
    pub node: NodeId,
    /// N, global axes.
    pub force: [f64; 3],
}

/// A named boundary condition (e.g. launch clamping, test-jig bolting).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSet {
    pub name: String,
    pub spcs: Vec<Spc>,
    /// DOFs declared explicitly free in this set. They must not also be fixed.
    pub releases: Vec<Spc>,
    pub preloads: Vec<Preload>,
}

impl ConstraintSet {
    pub fn new(name: impl Into<String>) -> Self {
        ConstraintSet { name: name.into(), ..Default::default() }
    }

    /// Union of all SPC masks per node.
    pub fn fixed_dofs(&self) -> HashMap<NodeId, DofMask> {
        let mut fixed: HashMap<NodeId, DofMask> = HashMap::new();
        for spc in &self.spcs {
            let entry = fixed.entry(spc.node).or_default();
            *entry = entry.union(spc.dofs);
        }
        fixed
    }
}

/// Quasi-static acceleration in G (1 G = 9.80665 m/s²).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCase {
    pub name: String,
    pub accel_g: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoltGroupDef {
    pub label: String,
    pub members: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub units: UnitSystem,
    pub materials: Vec<Material>,
    pub nodes: Vec<Node>,
    pub beams: Vec<BeamElement>,
    pub shells: Vec<ShellElement>,
    pub masses: Vec<PointMass>,
    pub rigid_links: Vec<RigidLink>,
    pub constraint_sets: Vec<ConstraintSet>,
    pub load_cases: Vec<LoadCase>,
    pub bolt_groups: Vec<BoltGroupDef>,
}

impl Model {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn material(&self, id: MaterialId) -> Option<&Material> {
        self.materials.iter().find(|m| m.id == id)
    }

    pub fn beam(&self, id: ElementId) -> Option<&BeamElement> {
        self.beams.iter().find(|b| b.id == id)
    }

    pub fn shell(&self, id: ElementId) -> Option<&ShellElement> {
        self.shells.iter().find(|s| s.id == id)
    }

    pub fn constraint_set(&self, name: &str) -> Option<&ConstraintSet> {
        self.constraint_sets.iter().find(|c| c.name == name)
    }

    pub fn load_case(&self, name: &str) -> Option<&LoadCase> {
        self.load_cases.iter().find(|c| c.name == name)
    }

    /// Node id → position in `nodes`.
    pub fn node_index(&self) -> HashMap<NodeId, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect()
    }

    /// Structural plus point mass, kg. Elements with dangling references
    /// are skipped.
    pub fn total_mass(&self) -> f64 {
        let index = self.node_index();
        let pos = |id: NodeId| index.get(&id).map(|&i| self.nodes[i].position);
        let mut total = 0.0;
        for b in &self.beams {
            if let (Some(a), Some(c), Some(mat)) = (pos(b.nodes[0]), pos(b.nodes[1]), self.material(b.material)) {
                total += mat.density * b.section.area * distance(a, c);
            }
        }
        for s in &self.shells {
            let corners: Option<Vec<[f64; 3]>> = s.nodes.iter().map(|&n| pos(n)).collect();
            if let (Some(c), Some(mat)) = (corners, self.material(s.material)) {
                total += mat.density * s.thickness * quad_area(&[c[0], c[1], c[2], c[3]]);
            }
        }
        total + self.masses.iter().map(|m| m.mass).sum::<f64>()
    }

    /// Copy of the model without the given beam elements; bolt groups are
    /// pruned accordingly and groups left empty are dropped.
    pub fn without_beams(&self, ids: &[ElementId]) -> Model {
        let mut out = self.clone();
        out.beams.retain(|b| !ids.contains(&b.id));
        for g in &mut out.bolt_groups {
            g.members.retain(|m| !ids.contains(m));
        }
        out.bolt_groups.retain(|g| !g.members.is_empty());
        out
    }

    /// Ids of all bolt-tagged beams, ascending.
    pub fn bolt_ids(&self) -> Vec<ElementId> {
        let mut ids: Vec<ElementId> = self.beams.iter().filter(|b| b.tag == BeamTag::Bolt).map(|b| b.id).collect();
        ids.sort();
        ids
    }
}

pub(crate) fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Area of a (possibly slightly warped) quad from the cross product of its
/// diagonals.
pub(crate) fn quad_area(p: &[[f64; 3]; 4]) -> f64 {
    let d1 = sub(p[2], p[0]);
    let d2 = sub(p[3], p[1]);
    0.5 * norm(cross(d1, d2))
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
