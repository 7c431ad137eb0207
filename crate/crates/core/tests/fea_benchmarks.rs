//! Closed-form benchmarks for the element library and solvers.

use std::f64::consts::PI;

use vibrakit_core::fea::{
    applied_load, assemble, reactions, recover_beam_end_forces, recover_shell_stress, solve_modes, solve_static,
};
use vibrakit_core::model::{
    BeamElement, BeamSection, BeamTag, ConstraintSet, Dof, DofMask, ElementId, LoadCase, Material, MaterialId,
    Model, Node, NodeId, Preload, ShellElement, Spc, UnitSystem, STANDARD_GRAVITY,
};

const E: f64 = 200e9;
const RHO: f64 = 7850.0;

fn steel() -> Material {
    Material {
        id: MaterialId(1),
        youngs_modulus: E,
        poisson_ratio: 0.3,
        density: RHO,
        yield_strength: 250e6,
        ultimate_strength: 400e6,
    }
}

fn mask(s: &str) -> DofMask {
    DofMask::parse(s).unwrap()
}

/// Cantilever along x, clamped at x = 0, restricted to x-y plane motion.
fn cantilever(n: usize, length: f64, section: BeamSection) -> (Model, ConstraintSet) {
    let mut m = Model { units: UnitSystem::Si, ..Default::default() };
    m.materials.push(steel());
    for i in 0..=n {
        m.nodes.push(Node { id: NodeId(i as u32 + 1), position: [length * i as f64 / n as f64, 0.0, 0.0] });
    }
    for i in 0..n {
        m.beams.push(BeamElement {
            id: ElementId(i as u32 + 1),
            nodes: [NodeId(i as u32 + 1), NodeId(i as u32 + 2)],
            section: section.clone(),
            material: MaterialId(1),
            orientation: [0.0, 1.0, 0.0],
            tag: BeamTag::Generic,
        });
    }
    let mut set = ConstraintSet::new("clamp");
    set.spcs.push(Spc { node: NodeId(1), dofs: DofMask::ALL });
    for i in 1..=n {
        set.spcs.push(Spc { node: NodeId(i as u32 + 1), dofs: mask("345") });
    }
    (m, set)
}

fn section() -> BeamSection {
    // Bending in x-y uses Iz: height 10 mm along y.
    BeamSection::rectangular(0.02, 0.01)
}

#[test]
fn clamped_free_beam_first_three_frequencies() {
    let l = 1.0;
    let s = section();
    let (model, set) = cantilever(20, l, s.clone());
    let sys = assemble(&model, &set).unwrap();
    let modes = solve_modes(&sys, 3).unwrap();
    let base = (E * s.iz / (RHO * s.area * l.powi(4))).sqrt() / (2.0 * PI);
    for (mode, beta) in modes.iter().zip([1.875_104_068_7, 4.694_091_132_9, 7.854_757_438_2]) {
        let exact = beta * beta * base;
        let err = (mode.frequency_hz - exact).abs() / exact;
        assert!(err < 0.005, "f = {} exact {} err {}", mode.frequency_hz, exact, err);
        let gm = mode.shape.dot(&(&sys.m * &mode.shape));
        let gk = mode.shape.dot(&(&sys.k * &mode.shape));
        assert!((gm - 1.0).abs() < 1e-8);
        assert!((gk - mode.eigenvalue).abs() < 1e-8 * mode.eigenvalue);
    }
}

#[test]
fn cantilever_tip_load_and_root_forces() {
    let l = 0.8;
    let s = section();
    let (model, mut set) = cantilever(20, l, s.clone());
    let p = -150.0;
    set.preloads.push(Preload { node: NodeId(21), force: [0.0, p, 0.0] });
    let sys = assemble(&model, &set).unwrap();
    let case = LoadCase { name: "tip".into(), accel_g: [0.0; 3] };
    let u = solve_static(&sys, &case).unwrap();
    let tip = u.node(&sys, NodeId(21)).unwrap()[1];
    let exact = p * l.powi(3) / (3.0 * E * s.iz);
    assert!((tip - exact).abs() < 1e-9 * exact.abs(), "{tip} vs {exact}");

    let root = recover_beam_end_forces(&sys, &u, ElementId(1)).unwrap();
    // Nodal force on the element at the root balances the tip load.
    assert!((root.a.shear1 + p).abs() < 1e-9 * p.abs());
    assert!((root.a.moment1.abs() - (p * l).abs()).abs() < 1e-9 * (p * l).abs());

    // Interior unloaded element: end shears cancel.
    let mid = recover_beam_end_forces(&sys, &u, ElementId(10)).unwrap();
    assert!((mid.a.shear1 + mid.b.shear1).abs() < 1e-9 * p.abs());
    assert!((mid.a.axial + mid.b.axial).abs() < 1e-9 * p.abs());

    let r = reactions(&sys, &u, &case);
    let ry: f64 = r.iter().filter(|(_, d, _)| *d == Dof::Ty).map(|x| x.2).sum();
    assert!((ry + p).abs() < 1e-9 * p.abs());
}

#[test]
fn cantilever_uniform_body_load() {
    let l = 1.0;
    let s = section();
    let (model, set) = cantilever(20, l, s.clone());
    let sys = assemble(&model, &set).unwrap();
    let case = LoadCase { name: "1g".into(), accel_g: [0.0, 1.0, 0.0] };
    let u = solve_static(&sys, &case).unwrap();
    let w = RHO * s.area * STANDARD_GRAVITY;
    let exact = w * l.powi(4) / (8.0 * E * s.iz);
    let tip = u.node(&sys, NodeId(21)).unwrap()[1];
    assert!((tip - exact).abs() < 0.005 * exact, "{tip} vs {exact}");

    let applied = applied_load(&sys, &case);
    let r = reactions(&sys, &u, &case);
    for axis in 0..3 {
        let sum: f64 = r.iter().filter(|(_, d, _)| d.index() == axis).map(|x| x.2).sum();
        let scale = applied.iter().map(|v| v.abs()).sum::<f64>();
        assert!((sum + applied[axis]).abs() <= 1e-9 * scale, "axis {axis}: {sum} vs {}", applied[axis]);
    }
}

fn plate(n: usize, a: f64, t: f64) -> Model {
    let mut m = Model { units: UnitSystem::Si, ..Default::default() };
    m.materials.push(Material { id: MaterialId(1), youngs_modulus: 70e9, poisson_ratio: 0.3, density: 2700.0, yield_strength: 1e8, ultimate_strength: 2e8 });
    let id = |i: usize, j: usize| NodeId((j * (n + 1) + i + 1) as u32);
    for j in 0..=n {
        for i in 0..=n {
            m.nodes.push(Node { id: id(i, j), position: [a * i as f64 / n as f64, a * j as f64 / n as f64, 0.0] });
        }
    }
    let mut e = 1;
    for j in 0..n {
        for i in 0..n {
            m.shells.push(ShellElement {
                id: ElementId(e),
                nodes: [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                thickness: t,
                material: MaterialId(1),
            });
            e += 1;
        }
    }
    m
}

#[test]
fn simply_supported_square_plate() {
    let (n, a, t) = (16, 0.5, 0.004);
    let model = plate(n, a, t);
    let mut set = ConstraintSet::new("ss");
    for (k, node) in model.nodes.iter().enumerate() {
        let (i, j) = (k % (n + 1), k / (n + 1));
        let mut dofs = mask("126");
        if j == 0 || j == n {
            dofs = dofs.union(mask("35"));
        }
        if i == 0 || i == n {
            dofs = dofs.union(mask("34"));
        }
        set.spcs.push(Spc { node: node.id, dofs });
    }
    let sys = assemble(&model, &set).unwrap();
    let f1 = solve_modes(&sys, 1).unwrap()[0].frequency_hz;
    let d = 70e9 * t.powi(3) / (12.0 * (1.0 - 0.09));
    let exact = PI / 2.0 * 2.0 / (a * a) * (d / (2700.0 * t)).sqrt();
    assert!((f1 - exact).abs() < 0.02 * exact, "{f1} vs {exact}");
}

#[test]
fn membrane_patch_test() {
    // Irregular 2×2 patch under uniform edge tension: the exact solution is
    // the constant-strain field, so every element sees uniaxial σ = F/(w·t).
    let mut m = Model { units: UnitSystem::Si, ..Default::default() };
    let (ee, nu, t) = (70e9, 0.3, 0.01);
    m.materials.push(Material { id: MaterialId(1), youngs_modulus: ee, poisson_ratio: nu, density: 0.0, yield_strength: 1e8, ultimate_strength: 2e8 });
    let pts = [
        [0.0, 0.0], [0.5, 0.0], [1.0, 0.0],
        [0.0, 0.45], [0.56, 0.4], [1.0, 0.52],
        [0.0, 1.0], [0.42, 1.0], [1.0, 1.0],
    ];
    for (i, p) in pts.iter().enumerate() {
        m.nodes.push(Node { id: NodeId(i as u32 + 1), position: [p[0], p[1], 0.0] });
    }
    let quads = [[1, 2, 5, 4], [2, 3, 6, 5], [4, 5, 8, 7], [5, 6, 9, 8]];
    for (k, q) in quads.iter().enumerate() {
        m.shells.push(ShellElement { id: ElementId(k as u32 + 1), nodes: q.map(NodeId), thickness: t, material: MaterialId(1) });
    }
    let sigma = 25e6;
    let q = sigma * t;
    let mut set = ConstraintSet::new("patch");
    for node in &m.nodes {
        set.spcs.push(Spc { node: node.id, dofs: mask("345") });
    }
    for b in [1, 4, 7] {
        set.spcs.push(Spc { node: NodeId(b), dofs: mask("1") });
    }
    set.spcs.push(Spc { node: NodeId(1), dofs: mask("2") });
    for (node, share) in [(3, 0.26), (6, 0.5), (9, 0.24)] {
        set.preloads.push(Preload { node: NodeId(node), force: [q * share, 0.0, 0.0] });
    }
    let sys = assemble(&m, &set).unwrap();
    let u = solve_static(&sys, &LoadCase { name: "T".into(), accel_g: [0.0; 3] }).unwrap();
    for k in 1..=4 {
        let s = recover_shell_stress(&sys, &u, ElementId(k)).unwrap();
        // Element frames follow the first edge, so compare invariants.
        for surf in [s.top, s.bottom] {
            assert!((surf.sx + surf.sy - sigma).abs() < 1e-8 * sigma, "{surf:?}");
            assert!((surf.von_mises() - sigma).abs() < 1e-8 * sigma, "{surf:?}");
        }
    }
    let tip = u.node(&sys, NodeId(9)).unwrap();
    assert!((tip[0] - sigma / ee).abs() < 1e-8 * sigma / ee);
    assert!((tip[1] + nu * sigma / ee).abs() < 1e-8 * sigma / ee);
}

#[test]
fn rigid_body_translation_leaves_frequencies_unchanged() {
    let (model, set) = cantilever(10, 1.0, section());
    let mut moved = model.clone();
    for n in &mut moved.nodes {
        n.position = [n.position[0] + 12.5, n.position[1] - 3.0, n.position[2] + 0.75];
    }
    let a = solve_modes(&assemble(&model, &set).unwrap(), 4).unwrap();
    let b = solve_modes(&assemble(&moved, &set).unwrap(), 4).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.eigenvalue - y.eigenvalue).abs() <= 1e-8 * x.eigenvalue);
    }
}
