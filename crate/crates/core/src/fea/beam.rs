//! 3-D Euler–Bernoulli beam with St-Venant torsion and consistent mass.
//!
//! Local DOF order per node: u, v, w, θx, θy, θz. The local x-axis runs from
//! node A to node B; the orientation vector fixes the local y-axis
//! (z = x × v, y = z × x).

use nalgebra::{Matrix3, SMatrix};

use super::FeaError;
use crate::model::{BeamElement, Material};

pub type Mat12 = SMatrix<f64, 12, 12>;

/// Element geometry and properties reduced to what the matrices need.
#[derive(Debug, Clone)]
pub struct BeamKernel {
    pub length: f64,
    /// Rows are the local unit axes in global coordinates.
    pub rotation: Matrix3<f64>,
    pub k_local: Mat12,
    pub m_local: Mat12,
}

impl BeamKernel {
    pub fn new(element: &BeamElement, material: &Material, ends: [[f64; 3]; 2]) -> Result<Self, FeaError> {
        let rotation = local_axes(element, ends)?;
        let length = (0..3).map(|k| (ends[1][k] - ends[0][k]).powi(2)).sum::<f64>().sqrt();
        Ok(BeamKernel {
            length,
            rotation,
            k_local: local_stiffness(element, material, length),
            m_local: local_mass(element, material, length),
        })
    }

    /// 12×12 block-diagonal transformation, global → local.
    pub fn transformation(&self) -> Mat12 {
        let mut t = Mat12::zeros();
        for b in 0..4 {
            t.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(&self.rotation);
        }
        t
    }

    pub fn global_matrices(&self) -> (Mat12, Mat12) {
        let t = self.transformation();
        let k = t.transpose() * self.k_local * t;
        let m = t.transpose() * self.m_local * t;
        (symmetrize(k), symmetrize(m))
    }
}

/// Global stiffness and mass matrices of one beam element.
pub fn beam_matrices(
    element: &BeamElement,
    material: &Material,
    ends: [[f64; 3]; 2],
) -> Result<(Mat12, Mat12), FeaError> {
    Ok(BeamKernel::new(element, material, ends)?.global_matrices())
}

fn local_axes(element: &BeamElement, ends: [[f64; 3]; 2]) -> Result<Matrix3<f64>, FeaError> {
    let a = nalgebra::Vector3::from(ends[0]);
    let b = nalgebra::Vector3::from(ends[1]);
    let axis = b - a;
    let len = axis.norm();
    if !(len > 0.0) {
        return Err(FeaError::ZeroLength(element.id));
    }
    let ex = axis / len;
    let v = nalgebra::Vector3::from(element.orientation);
    let z = ex.cross(&v);
    if !(z.norm() > 1e-9 * v.norm()) {
        return Err(FeaError::ParallelOrientation(element.id));
    }
    let ez = z.normalize();
    let ey = ez.cross(&ex);
    Ok(Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]))
}

fn local_stiffness(element: &BeamElement, material: &Material, l: f64) -> Mat12 {
    let s = &element.section;
    let e = material.youngs_modulus;
    let mut k = Mat12::zeros();
    let ea = e * s.area / l;
    let gj = material.shear_modulus() * s.torsion_constant / l;
    place2(&mut k, [0, 6], ea);
    place2(&mut k, [3, 9], gj);

    // Bending in the x-y plane: v and θz, stiffness from Iz.
    let bz = e * s.iz / l.powi(3);
    let kz = [
        [12.0, 6.0 * l, -12.0, 6.0 * l],
        [6.0 * l, 4.0 * l * l, -6.0 * l, 2.0 * l * l],
        [-12.0, -6.0 * l, 12.0, -6.0 * l],
        [6.0 * l, 2.0 * l * l, -6.0 * l, 4.0 * l * l],
    ];
    place4(&mut k, [1, 5, 7, 11], &kz, bz);

    // Bending in the x-z plane: w and θy, stiffness from Iy.
    let by = e * s.iy / l.powi(3);
    let ky = [
        [12.0, -6.0 * l, -12.0, -6.0 * l],
        [-6.0 * l, 4.0 * l * l, 6.0 * l, 2.0 * l * l],
        [-12.0, 6.0 * l, 12.0, 6.0 * l],
        [-6.0 * l, 2.0 * l * l, 6.0 * l, 4.0 * l * l],
    ];
    place4(&mut k, [2, 4, 8, 10], &ky, by);
    k
}

fn local_mass(element: &BeamElement, material: &Material, l: f64) -> Mat12 {
    let s = &element.section;
    let rho = material.density;
    let m = rho * s.area * l;
    let mut out = Mat12::zeros();
    place_pair_mass(&mut out, [0, 6], m);
    // Polar moment of the section for torsional inertia.
    place_pair_mass(&mut out, [3, 9], rho * (s.iy + s.iz) * l);

    let mz = [
        [156.0, 22.0 * l, 54.0, -13.0 * l],
        [22.0 * l, 4.0 * l * l, 13.0 * l, -3.0 * l * l],
        [54.0, 13.0 * l, 156.0, -22.0 * l],
        [-13.0 * l, -3.0 * l * l, -22.0 * l, 4.0 * l * l],
    ];
    place4(&mut out, [1, 5, 7, 11], &mz, m / 420.0);
    let my = [
        [156.0, -22.0 * l, 54.0, 13.0 * l],
        [-22.0 * l, 4.0 * l * l, -13.0 * l, -3.0 * l * l],
        [54.0, -13.0 * l, 156.0, 22.0 * l],
        [13.0 * l, -3.0 * l * l, 22.0 * l, 4.0 * l * l],
    ];
    place4(&mut out, [2, 4, 8, 10], &my, m / 420.0);
    out
}

fn place2(k: &mut Mat12, idx: [usize; 2], v: f64) {
    k[(idx[0], idx[0])] += v;
    k[(idx[1], idx[1])] += v;
    k[(idx[0], idx[1])] -= v;
    k[(idx[1], idx[0])] -= v;
}

fn place_pair_mass(k: &mut Mat12, idx: [usize; 2], total: f64) {
    k[(idx[0], idx[0])] += total / 3.0;
    k[(idx[1], idx[1])] += total / 3.0;
    k[(idx[0], idx[1])] += total / 6.0;
    k[(idx[1], idx[0])] += total / 6.0;
}

fn place4(k: &mut Mat12, idx: [usize; 4], block: &[[f64; 4]; 4], scale: f64) {
    for (i, &gi) in idx.iter().enumerate() {
        for (j, &gj) in idx.iter().enumerate() {
            k[(gi, gj)] += scale * block[i][j];
        }
    }
}

pub(crate) fn symmetrize<const N: usize>(m: SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let mut out = m;
    for i in 0..N {
        for j in i + 1..N {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
