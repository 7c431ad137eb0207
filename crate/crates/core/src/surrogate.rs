//! Builders for the sample decks in `decks/`: small closed-form checks,
//! a bolted two-plate frame, box-satellite surrogates and two test jigs.
//!
//! Geometry is given in millimetres and stored in SI. Elastic constants
//! are handbook values, not measured data.

use std::collections::HashMap;

use crate::model::{
    BeamElement, BeamSection, BeamTag, BoltGroupDef, ConstraintSet, DofMask, ElementId, LoadCase, Material,
    MaterialId, Model, Node, NodeId, PointMass, Preload, RigidLink, ShellElement, Spc, UnitSystem,
};

const MM: f64 = 1e-3;

/// A7075-T7351 plate.
pub fn a7075(id: u32) -> Material {
    Material {
        id: MaterialId(id),
        youngs_modulus: 71.7e9,
        poisson_ratio: 0.33,
        density: 2800.0,
        yield_strength: 385e6,
        ultimate_strength: 460e6,
    }
}

/// SUS304 bolts.
pub fn sus304(id: u32) -> Material {
    Material {
        id: MaterialId(id),
        youngs_modulus: 193e9,
        poisson_ratio: 0.29,
        density: 7930.0,
        yield_strength: 205e6,
        ultimate_strength: 520e6,
    }
}

/// Incremental model builder; nodes are merged by position.
struct Builder {
    model: Model,
    next_node: u32,
    next_element: u32,
    by_position: HashMap<[i64; 3], NodeId>,
}

impl Builder {
    fn new(units: UnitSystem) -> Self {
        Builder { model: Model { units, ..Default::default() }, next_node: 1, next_element: 1, by_position: HashMap::new() }
    }

    fn node(&mut self, p: [f64; 3]) -> NodeId {
        let key = p.map(|c| (c * 1000.0).round() as i64);
        if let Some(&id) = self.by_position.get(&key) {
            return id;
        }
        let id = NodeId(self.next_node);
        self.next_node += 1;
        self.model.nodes.push(Node { id, position: p.map(|c| c * MM) });
        self.by_position.insert(key, id);
        id
    }

    fn element_id(&mut self) -> ElementId {
        let id = ElementId(self.next_element);
        self.next_element += 1;
        id
    }

    fn beam(&mut self, a: NodeId, b: NodeId, section: BeamSection, material: u32, tag: BeamTag) -> ElementId {
        let pa = self.model.node(a).unwrap().position;
        let pb = self.model.node(b).unwrap().position;
        let axis = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
        let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let orientation = if axis[2].abs() > 0.9 * len { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
        let id = self.element_id();
        self.model.beams.push(BeamElement { id, nodes: [a, b], section, material: MaterialId(material), orientation, tag });
        id
    }

    /// Quad mesh over `origin + s·u + r·v`, `s, r ∈ [0, 1]`, returning the
    /// grid of node ids indexed `[i][j]` along u and v.
    fn plate(&mut self, origin: [f64; 3], u: [f64; 3], v: [f64; 3], n: (usize, usize), t_mm: f64, material: u32) -> Vec<Vec<NodeId>> {
        let (nu, nv) = n;
        let grid: Vec<Vec<NodeId>> = (0..=nu)
            .map(|i| {
                (0..=nv)
                    .map(|j| {
                        let (s, r) = (i as f64 / nu as f64, j as f64 / nv as f64);
                        self.node(std::array::from_fn(|k| origin[k] + s * u[k] + r * v[k]))
                    })
                    .collect()
            })
            .collect();
        for i in 0..nu {
            for j in 0..nv {
                let id = self.element_id();
                self.model.shells.push(ShellElement {
                    id,
                    nodes: [grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]],
                    thickness: t_mm * MM,
                    material: MaterialId(material),
                });
            }
        }
        grid
    }

    fn mass(&mut self, node: NodeId, kg: f64, inertia: [f64; 3]) {
        let id = self.model.masses.len() as u32 + 1;
        self.model.masses.push(PointMass { id, node, mass: kg, inertia });
    }

    fn finish(self) -> Model {
        self.model
    }
}

fn spc(node: NodeId, dofs: &str) -> Spc {
    Spc { node, dofs: DofMask::parse(dofs).unwrap() }
}

fn seven_g_cases() -> Vec<LoadCase> {
    vec![
        LoadCase { name: "X7".into(), accel_g: [7.0, 0.0, 0.0] },
        LoadCase { name: "Y7".into(), accel_g: [0.0, 7.0, 0.0] },
        LoadCase { name: "Z7".into(), accel_g: [0.0, 0.0, 7.0] },
    ]
}

/// One kilogram on an axial spring of 4π² N/m: exactly 1 Hz.
pub fn sdof() -> Model {
    let mut b = Builder::new(UnitSystem::Si);
    b.model.materials.push(Material {
        id: MaterialId(1),
        youngs_modulus: 4.0 * std::f64::consts::PI * std::f64::consts::PI,
        poisson_ratio: 0.3,
        density: 0.0,
        yield_strength: 1.0,
        ultimate_strength: 1.0,
    });
    let base = b.node([0.0, 0.0, 0.0]);
    let tip = b.node([1000.0, 0.0, 0.0]);
    let section = BeamSection { area: 1.0, iy: 1.0, iz: 1.0, torsion_constant: 1.0 };
    b.beam(base, tip, section, 1, BeamTag::Generic);
    b.mass(tip, 1.0, [0.0; 3]);
    let mut set = ConstraintSet::new("BASE");
    set.spcs = vec![spc(base, "123456"), spc(tip, "23456")];
    b.model.constraint_sets.push(set);
    b.model.load_cases.push(LoadCase { name: "X1".into(), accel_g: [1.0, 0.0, 0.0] });
    b.finish()
}

/// 1 m steel strip, 20 × 10 mm, clamped at one end: f1 ≈ 8 Hz.
pub fn cantilever() -> Model {
    let mut b = Builder::new(UnitSystem::MillimetreGramNewton);
    b.model.materials.push(Material {
        id: MaterialId(1),
        youngs_modulus: 200e9,
        poisson_ratio: 0.3,
        density: 7850.0,
        yield_strength: 250e6,
        ultimate_strength: 400e6,
    });
    let n = 20;
    let nodes: Vec<NodeId> = (0..=n).map(|i| b.node([1000.0 * i as f64 / n as f64, 0.0, 0.0])).collect();
    let section = BeamSection::rectangular(20.0 * MM, 10.0 * MM);
    for w in nodes.windows(2) {
        b.beam(w[0], w[1], section, 1, BeamTag::Generic);
    }
    let mut set = ConstraintSet::new("CLAMP");
    set.spcs.push(spc(nodes[0], "123456"));
    b.model.constraint_sets.push(set);
    b.model.load_cases.push(LoadCase { name: "Z1".into(), accel_g: [0.0, 0.0, 1.0] });
    b.finish()
}

/// Five 2 kg masses on massless beams above a clamped base: 30 free DOFs,
/// all of them carrying mass.
pub fn chain30() -> Model {
    let mut b = Builder::new(UnitSystem::MillimetreGramNewton);
    let mut mat = a7075(1);
    mat.density = 0.0;
    b.model.materials.push(mat);
    let section = BeamSection::rectangular(12.0 * MM, 8.0 * MM);
    let base = b.node([0.0, 0.0, 0.0]);
    let mut prev = base;
    for k in 1..=5 {
        let n = b.node([0.0, 0.0, 100.0 * k as f64]);
        b.beam(prev, n, section, 1, BeamTag::Generic);
        b.mass(n, 2.0, [1e-3, 2e-3, 1.5e-3]);
        prev = n;
    }
    let mut set = ConstraintSet::new("BASE");
    set.spcs.push(spc(base, "123456"));
    b.model.constraint_sets.push(set);
    b.model.load_cases = seven_g_cases();
    b.finish()
}

/// Two 240 × 120 mm plates lapped 6 mm apart and joined by three rows of
/// bolts (groups R1–R3) with `per_row` bolts each. The lower plate is
/// clamped along x = 0; a 1 kg mass sits on the upper plate's free edge.
/// `per_row` must divide 8.
pub fn frame(per_row: usize) -> Model {
    assert!(per_row > 0 && 8 % per_row == 0, "bolts per row must divide 8");
    let mut b = Builder::new(UnitSystem::MillimetreGramNewton);
    b.model.materials.push(a7075(1));
    b.model.materials.push(sus304(2));
    let (nx, ny) = (8, 4);
    let lower = b.plate([0.0, 0.0, 0.0], [240.0, 0.0, 0.0], [0.0, 120.0, 0.0], (nx, ny), 2.0, 1);
    let upper = b.plate([0.0, 0.0, 6.0], [240.0, 0.0, 0.0], [0.0, 120.0, 0.0], (nx, ny), 2.0, 1);
    let bolt = BeamSection::circular(4.0 * MM);
    let step = nx / per_row;
    for (label, j) in [("R1", 0), ("R2", ny / 2), ("R3", ny)] {
        let mut members = Vec::new();
        for i in (step..=nx).step_by(step) {
            members.push(b.beam(lower[i][j], upper[i][j], bolt, 2, BeamTag::Bolt));
        }
        b.model.bolt_groups.push(BoltGroupDef { label: label.into(), members });
    }
    b.mass(upper[nx][ny / 2], 1.0, [0.0; 3]);
    let mut set = ConstraintSet::new("ROOT");
    set.spcs = (0..=ny).map(|j| spc(lower[0][j], "123456")).collect();
    b.model.constraint_sets.push(set);
    b.model.load_cases = seven_g_cases();
    b.finish()
}

struct Panel {
    name: &'static str,
    /// kg, structure plus mounted components
    mass: f64,
    /// Simplified skin thickness, mm.
    thickness: f64,
}

const PANELS: [Panel; 7] = [
    Panel { name: "YP", mass: 1.745, thickness: 4.2 },
    Panel { name: "YM", mass: 2.017, thickness: 4.1 },
    Panel { name: "XP", mass: 2.159, thickness: 5.2 },
    Panel { name: "XM", mass: 1.771, thickness: 5.0 },
    Panel { name: "ZP", mass: 2.414, thickness: 3.7 },
    Panel { name: "ZM", mass: 3.096, thickness: 4.0 },
    Panel { name: "CP", mass: 28.131, thickness: 6.0 },
];

/// Bolt layout of a box surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoltLayout {
    /// Every panel edge node bolted.
    Dense,
    /// Only the corner and mid-edge nodes bolted.
    Sparse,
}

/// 550 × 350 × 550 mm box surrogate: six outer panels and a central panel
/// as equivalent-density shells, four A7075 rails along Z at the vertical
/// edges, M4 bolts between panels and rails, and the three small panels as
/// point masses. Constraint sets:
///
/// - `A`: both rail end faces clamped
/// - `B`: −Z ends clamped, +Z ends free in Z with a 46.6 N compressive preload
/// - `C`: the two YM-side rails bolted to a jig at four points each
pub fn box_satellite(layout: BoltLayout) -> Model {
    let mut b = Builder::new(UnitSystem::MillimetreGramNewton);
    b.model.materials.push(a7075(1));
    b.model.materials.push(sus304(2));
    let (hx, hy, hz) = (275.0, 175.0, 550.0);
    let inset = 10.0;
    let (n_xz, n_y) = (4, 4);
    let spans: HashMap<&str, f64> = [
        ("YP", (2.0 * (hx - inset)) * (hz - 2.0 * inset)),
        ("YM", (2.0 * (hx - inset)) * (hz - 2.0 * inset)),
        ("XP", (2.0 * (hy - inset)) * (hz - 2.0 * inset)),
        ("XM", (2.0 * (hy - inset)) * (hz - 2.0 * inset)),
        ("ZP", (2.0 * (hx - inset)) * (2.0 * (hy - inset))),
        ("ZM", (2.0 * (hx - inset)) * (2.0 * (hy - inset))),
        ("CP", (2.0 * (hy - inset)) * (hz - 2.0 * inset)),
    ]
    .into_iter()
    .collect();
    for (k, p) in PANELS.iter().enumerate() {
        let mut m = a7075(11 + k as u32);
        let volume = spans[p.name] * p.thickness * MM * MM * MM;
        m.density = p.mass / volume;
        b.model.materials.push(m);
    }
    let mat = |name: &str| 11 + PANELS.iter().position(|p| p.name == name).unwrap() as u32;
    let (x0, x1) = (-hx + inset, hx - inset);
    let (y0, y1) = (-hy + inset, hy - inset);
    let (z0, z1) = (inset, hz - inset);
    let t = |name: &str| PANELS.iter().find(|p| p.name == name).unwrap().thickness;

    let yp = b.plate([x0, hy, z0], [x1 - x0, 0.0, 0.0], [0.0, 0.0, z1 - z0], (n_xz, n_xz), t("YP"), mat("YP"));
    let ym = b.plate([x0, -hy, z0], [x1 - x0, 0.0, 0.0], [0.0, 0.0, z1 - z0], (n_xz, n_xz), t("YM"), mat("YM"));
    let xp = b.plate([hx, y0, z0], [0.0, y1 - y0, 0.0], [0.0, 0.0, z1 - z0], (n_y, n_xz), t("XP"), mat("XP"));
    let xm = b.plate([-hx, y0, z0], [0.0, y1 - y0, 0.0], [0.0, 0.0, z1 - z0], (n_y, n_xz), t("XM"), mat("XM"));
    let zp = b.plate([x0, y0, hz], [x1 - x0, 0.0, 0.0], [0.0, y1 - y0, 0.0], (n_xz, n_y), t("ZP"), mat("ZP"));
    let zm = b.plate([x0, y0, 0.0], [x1 - x0, 0.0, 0.0], [0.0, y1 - y0, 0.0], (n_xz, n_y), t("ZM"), mat("ZM"));
    let cp = b.plate([0.0, y0, z0], [0.0, y1 - y0, 0.0], [0.0, 0.0, z1 - z0], (n_y, n_xz), t("CP"), mat("CP"));

    // Rails at the four vertical edges, nodes at the panel levels plus the
    // end faces.
    let rail_section = BeamSection::rectangular(17.3 * MM, 17.3 * MM);
    let levels: Vec<f64> = std::iter::once(0.0)
        .chain((0..=n_xz).map(|k| z0 + (z1 - z0) * k as f64 / n_xz as f64))
        .chain(std::iter::once(hz))
        .collect();
    let mut rails: Vec<Vec<NodeId>> = Vec::new();
    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        let nodes: Vec<NodeId> = levels.iter().map(|&z| b.node([sx * hx, sy * hy, z])).collect();
        for w in nodes.windows(2) {
            b.beam(w[0], w[1], rail_section, 1, BeamTag::Rail);
        }
        rails.push(nodes);
    }

    let bolt = BeamSection::circular(4.0 * MM);
    let keep = |k: usize, n: usize| layout == BoltLayout::Dense || k == 0 || k == n || k == n / 2;
    let mut groups: Vec<(&str, Vec<ElementId>)> =
        ["X1", "X2", "Y1", "Y2", "Y3", "Z1", "Z2"].iter().map(|&l| (l, Vec::new())).collect();
    let mut add = |g: &str, id: ElementId| groups.iter_mut().find(|(l, _)| *l == g).unwrap().1.push(id);

    // Side panels to rails, level by level (rail index k + 1 is level k).
    for k in 0..=n_xz {
        if !keep(k, n_xz) {
            continue;
        }
        let r = k + 1;
        add("Y1", b.beam(rails[0][r], yp[n_xz][k], bolt, 2, BeamTag::Bolt));
        add("Y1", b.beam(rails[1][r], yp[0][k], bolt, 2, BeamTag::Bolt));
        add("Y2", b.beam(rails[3][r], ym[n_xz][k], bolt, 2, BeamTag::Bolt));
        add("Y2", b.beam(rails[2][r], ym[0][k], bolt, 2, BeamTag::Bolt));
        add("X1", b.beam(rails[0][r], xp[n_y][k], bolt, 2, BeamTag::Bolt));
        add("X1", b.beam(rails[3][r], xp[0][k], bolt, 2, BeamTag::Bolt));
        add("X2", b.beam(rails[1][r], xm[n_y][k], bolt, 2, BeamTag::Bolt));
        add("X2", b.beam(rails[2][r], xm[0][k], bolt, 2, BeamTag::Bolt));
        // Central panel to the Y panels' centre lines.
        add("Y3", b.beam(yp[n_xz / 2][k], cp[n_y][k], bolt, 2, BeamTag::Bolt));
        add("Y3", b.beam(ym[n_xz / 2][k], cp[0][k], bolt, 2, BeamTag::Bolt));
    }
    // Z panels to the top and bottom edges of the side and central panels.
    for (z_panel, top, group) in [(&zp, n_xz, "Z1"), (&zm, 0, "Z2")] {
        for i in 0..=n_xz {
            if !keep(i, n_xz) {
                continue;
            }
            add(group, b.beam(yp[i][top], z_panel[i][n_y], bolt, 2, BeamTag::Bolt));
            add(group, b.beam(ym[i][top], z_panel[i][0], bolt, 2, BeamTag::Bolt));
        }
        for j in 0..=n_y {
            if !keep(j, n_y) {
                continue;
            }
            add(group, b.beam(cp[j][top], z_panel[n_xz / 2][j], bolt, 2, BeamTag::Bolt));
            add(group, b.beam(xp[j][top], z_panel[n_xz][j], bolt, 2, BeamTag::Bolt));
            add(group, b.beam(xm[j][top], z_panel[0][j], bolt, 2, BeamTag::Bolt));
        }
    }
    b.model.bolt_groups = groups.into_iter().map(|(l, m)| BoltGroupDef { label: l.into(), members: m }).collect();

    // Small internal panels carried by the central panel.
    b.mass(cp[1][1], 0.794, [0.0; 3]);
    b.mass(cp[3][1], 0.804, [0.0; 3]);
    b.mass(cp[2][2], 4.464, [0.0; 3]);

    let top = levels.len() - 1;
    let mut a = ConstraintSet::new("A");
    let mut bset = ConstraintSet::new("B");
    let mut c = ConstraintSet::new("C");
    for (r, rail) in rails.iter().enumerate() {
        a.spcs.push(spc(rail[0], "123456"));
        a.spcs.push(spc(rail[top], "123456"));
        bset.spcs.push(spc(rail[0], "123456"));
        bset.spcs.push(spc(rail[top], "12456"));
        bset.releases.push(spc(rail[top], "3"));
        bset.preloads.push(Preload { node: rail[top], force: [0.0, 0.0, -46.6] });
        if r >= 2 {
            for k in [1, 2, 4, 5] {
                c.spcs.push(spc(rail[k], "123456"));
            }
        }
    }
    b.model.constraint_sets = vec![a, bset, c];
    b.model.load_cases = seven_g_cases();
    b.model.load_cases.push(LoadCase { name: "PRE".into(), accel_g: [0.0; 3] });
    b.finish()
}

/// Satellite stand-in: 50 kg at 275 mm above the jig top face, rigidly
/// tied to four footprint points.
fn dummy_mass(b: &mut Builder, top_z: f64, footprint: &[NodeId]) {
    let m = b.node([0.0, 0.0, top_z + 275.0]);
    let (w, d, h) = (0.55f64, 0.35f64, 0.55f64);
    let kg = 50.0;
    b.mass(m, kg, [kg * (d * d + h * h) / 12.0, kg * (w * w + h * h) / 12.0, kg * (w * w + d * d) / 12.0]);
    b.model.rigid_links.push(RigidLink { id: 1, master: m, slaves: footprint.to_vec(), dofs: DofMask::ALL });
}

/// Shaker interface: bottom nodes on a 300 mm circle.
fn ring_support(b: &Builder, z: f64) -> ConstraintSet {
    let mut set = ConstraintSet::new("SHAKER");
    for n in &b.model.nodes {
        let [x, y, nz] = n.position.map(|c| c / MM);
        let r = x.hypot(y);
        if (nz - z).abs() < 1e-6 && (r - 150.0).abs() <= 15.0 {
            set.spcs.push(spc(n.id, "123456"));
        }
    }
    set
}

const JIG: f64 = 600.0;
const JIG_CELLS: usize = 12;

/// Flat 30 mm A7075 jig plate, 600 × 600 mm, with the dummy mass.
pub fn jig_flat30() -> Model {
    let mut b = Builder::new(UnitSystem::MillimetreGramNewton);
    b.model.materials.push(a7075(1));
    let h = JIG / 2.0;
    b.plate([-h, -h, 0.0], [JIG, 0.0, 0.0], [0.0, JIG, 0.0], (JIG_CELLS, JIG_CELLS), 30.0, 1);
    let foot: Vec<NodeId> = [(250.0, 150.0), (-250.0, 150.0), (-250.0, -150.0), (250.0, -150.0)]
        .iter()
        .map(|&(x, y)| b.node([x, y, 0.0]))
        .collect();
    dummy_mass(&mut b, 15.0, &foot);
    let set = ring_support(&b, 0.0);
    b.model.constraint_sets.push(set);
    b.model.load_cases.push(LoadCase { name: "Z1".into(), accel_g: [0.0, 0.0, 1.0] });
    b.finish()
}

/// 80 mm A7075 jig with the dummy mass. The centre inside the shaker ring
/// is pocketed down to a 10 mm floor, the full-depth frame carries the
/// footprint, and the rim outside the footprint is tapered to 20 mm.
/// Modelled as a stepped mid-surface plate.
pub fn jig_ribbed80() -> Model {
    let mut b = Builder::new(UnitSystem::MillimetreGramNewton);
    b.model.materials.push(a7075(1));
    let h = JIG / 2.0;
    let depth = 80.0;
    b.plate([-h, -h, 0.0], [JIG, 0.0, 0.0], [0.0, JIG, 0.0], (JIG_CELLS, JIG_CELLS), depth, 1);
    let centroid = |model: &Model, shell: &ShellElement| -> [f64; 2] {
        let mut c = [0.0; 2];
        for n in shell.nodes {
            let p = model.node(n).unwrap().position;
            c[0] += p[0] / MM / 4.0;
            c[1] += p[1] / MM / 4.0;
        }
        c
    };
    let thickness: Vec<f64> = b
        .model
        .shells
        .iter()
        .map(|s| {
            let [x, y] = centroid(&b.model, s);
            if x.abs() < 100.0 && y.abs() < 100.0 {
                10.0
            } else if x.abs() > 250.0 || y.abs() > 200.0 {
                20.0
            } else {
                depth
            }
        })
        .collect();
    for (s, t) in b.model.shells.iter_mut().zip(thickness) {
        s.thickness = t * MM;
    }
    let foot: Vec<NodeId> = [(250.0, 150.0), (-250.0, 150.0), (-250.0, -150.0), (250.0, -150.0)]
        .iter()
        .map(|&(x, y)| b.node([x, y, 0.0]))
        .collect();
    dummy_mass(&mut b, depth / 2.0, &foot);
    let set = ring_support(&b, 0.0);
    b.model.constraint_sets.push(set);
    b.model.load_cases.push(LoadCase { name: "Z1".into(), accel_g: [0.0, 0.0, 1.0] });
    b.finish()
}

/// Every shipped sample deck as `(file stem, model)`.
pub fn sample_decks() -> Vec<(&'static str, Model)> {
    vec![
        ("sdof", sdof()),
        ("cantilever", cantilever()),
        ("chain30", chain30()),
        ("frame12", frame(4)),
        ("frame24", frame(8)),
        ("r4", box_satellite(BoltLayout::Dense)),
        ("d1", box_satellite(BoltLayout::Sparse)),
        ("jig_flat30", jig_flat30()),
        ("jig_ribbed80", jig_ribbed80()),
    ]
}
