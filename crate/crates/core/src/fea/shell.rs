//! Flat four-node shell: bilinear membrane, discrete-Kirchhoff (DKQ) plate
//! bending and a penalty-stabilized drilling rotation.
//!
//! The DKQ rotations are interpolated with 8-node serendipity functions
//! whose midside values are eliminated by imposing the Kirchhoff condition
//! along each edge (cubic deflection, quadratic tangential rotation, linear
//! normal rotation). Rotation convention: βx = θy, βy = −θx, so that
//! u = z·βx and v = z·βy through the thickness.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use super::beam::symmetrize;
use super::FeaError;
use crate::model::{ElementId, Material, ShellElement};

pub type Mat24 = SMatrix<f64, 24, 24>;

/// Drilling penalty relative to the largest bending rotation stiffness.
pub const DRILLING_PENALTY: f64 = 1e-6;

const G: f64 = 0.577_350_269_189_625_8;
const GAUSS2: [(f64, f64); 4] = [(-G, -G), (G, -G), (G, G), (-G, G)];
const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

/// Local-frame geometry and matrices of one shell element.
#[derive(Debug, Clone)]
pub struct ShellKernel {
    /// Rows are the local unit axes in global coordinates.
    pub rotation: Matrix3<f64>,
    /// Corner coordinates in the element plane.
    pub xy: [[f64; 2]; 4],
    pub thickness: f64,
    pub area: f64,
    /// Plane-stress elasticity matrix.
    pub elasticity: Matrix3<f64>,
    pub k_local: Mat24,
    pub m_local: Mat24,
}

impl ShellKernel {
    pub fn new(element: &ShellElement, material: &Material, corners: [[f64; 3]; 4]) -> Result<Self, FeaError> {
        let (rotation, xy) = local_frame(element.id, &corners)?;
        let t = element.thickness;
        let elasticity = plane_stress(material);
        // Positive Jacobian at the corners: convex, counter-clockwise and no
        // coincident corners.
        let ref_area = crate::model::quad_area(&corners);
        for i in 0..4 {
            let (_, det) = jacobian(&xy, XI[i], ETA[i]);
            if !(det > 1e-9 * ref_area) {
                return Err(FeaError::DegenerateShell(element.id));
            }
        }
        let mut area = 0.0;
        for &(xi, eta) in &GAUSS2 {
            let (_, det) = jacobian(&xy, xi, eta);
            if !(det > 0.0) {
                return Err(FeaError::DegenerateShell(element.id));
            }
            area += det;
        }

        let mut k = Mat24::zeros();
        let km = membrane_stiffness(&xy, &elasticity, t);
        for i in 0..8 {
            for j in 0..8 {
                k[(membrane_dof(i), membrane_dof(j))] += km[(i, j)];
            }
        }
        let kb = bending_stiffness(&xy, &elasticity, t);
        for i in 0..12 {
            for j in 0..12 {
                k[(bending_dof(i), bending_dof(j))] += kb[(i, j)];
            }
        }
        let max_rot = (0..12).filter(|i| i % 3 != 0).map(|i| kb[(i, i)]).fold(0.0, f64::max);
        let alpha = DRILLING_PENALTY * max_rot / area;
        k += drilling_stiffness(&xy, alpha);

        let m_local = mass(&xy, material.density, t);
        Ok(ShellKernel { rotation, xy, thickness: t, area, elasticity, k_local: symmetrize(k), m_local })
    }

    /// 24×24 block-diagonal transformation, global → local.
    pub fn transformation(&self) -> Mat24 {
        let mut t = Mat24::zeros();
        for b in 0..8 {
            t.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(&self.rotation);
        }
        t
    }

    pub fn global_matrices(&self) -> (Mat24, Mat24) {
        let t = self.transformation();
        (symmetrize(t.transpose() * self.k_local * t), symmetrize(t.transpose() * self.m_local * t))
    }

    /// Centroid stresses `[σx, σy, τxy]` in the element frame at the top
    /// (+t/2) and bottom (−t/2) surfaces, from local nodal displacements.
    pub fn centroid_stress(&self, u_local: &SVector<f64, 24>) -> ([f64; 3], [f64; 3]) {
        let bm = membrane_b(&self.xy, 0.0, 0.0);
        let bb = bending_b(&self.xy, 0.0, 0.0);
        let um = SVector::<f64, 8>::from_fn(|i, _| u_local[membrane_dof(i)]);
        let ub = SVector::<f64, 12>::from_fn(|i, _| u_local[bending_dof(i)]);
        let eps = bm * um;
        let kappa = bb * ub;
        let half = 0.5 * self.thickness;
        let top = self.elasticity * (eps + kappa * half);
        let bot = self.elasticity * (eps - kappa * half);
        ([top[0], top[1], top[2]], [bot[0], bot[1], bot[2]])
    }
}

/// Global stiffness and mass matrices of one shell element.
pub fn shell_matrices(
    element: &ShellElement,
    material: &Material,
    corners: [[f64; 3]; 4],
) -> Result<(Mat24, Mat24), FeaError> {
    Ok(ShellKernel::new(element, material, corners)?.global_matrices())
}

fn membrane_dof(i: usize) -> usize {
    6 * (i / 2) + i % 2
}

fn bending_dof(i: usize) -> usize {
    6 * (i / 3) + 2 + i % 3
}

fn plane_stress(material: &Material) -> Matrix3<f64> {
    let e = material.youngs_modulus;
    let nu = material.poisson_ratio;
    let c = e / (1.0 - nu * nu);
    Matrix3::new(c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0)
}

fn local_frame(id: ElementId, p: &[[f64; 3]; 4]) -> Result<(Matrix3<f64>, [[f64; 2]; 4]), FeaError> {
    let v: Vec<Vector3<f64>> = p.iter().map(|c| Vector3::from(*c)).collect();
    let normal = (v[2] - v[0]).cross(&(v[3] - v[1]));
    let scale = (v[2] - v[0]).norm().max((v[3] - v[1]).norm());
    if !(normal.norm() > 1e-12 * scale * scale) {
        return Err(FeaError::DegenerateShell(id));
    }
    let ez = normal.normalize();
    let edge = v[1] - v[0];
    let ex_raw = edge - ez * edge.dot(&ez);
    if !(ex_raw.norm() > 1e-12 * scale) {
        return Err(FeaError::DegenerateShell(id));
    }
    let ex = ex_raw.normalize();
    let ey = ez.cross(&ex);
    let centre = (v[0] + v[1] + v[2] + v[3]) / 4.0;
    let mut xy = [[0.0; 2]; 4];
    for (i, c) in v.iter().enumerate() {
        let d = c - centre;
        xy[i] = [d.dot(&ex), d.dot(&ey)];
    }
    Ok((Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]), xy))
}

fn q4_shape(xi: f64, eta: f64) -> [f64; 4] {
    std::array::from_fn(|i| 0.25 * (1.0 + XI[i] * xi) * (1.0 + ETA[i] * eta))
}

fn q4_natural_derivs(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    std::array::from_fn(|i| [0.25 * XI[i] * (1.0 + ETA[i] * eta), 0.25 * ETA[i] * (1.0 + XI[i] * xi)])
}

/// Jacobian inverse (rows: ∂ξ/∂x, ∂η/∂x; ∂ξ/∂y, ∂η/∂y arranged for
/// `[N,x; N,y] = inv · [N,ξ; N,η]`) and determinant.
fn jacobian(xy: &[[f64; 2]; 4], xi: f64, eta: f64) -> ([[f64; 2]; 2], f64) {
    let d = q4_natural_derivs(xi, eta);
    let mut j = [[0.0; 2]; 2];
    for i in 0..4 {
        j[0][0] += d[i][0] * xy[i][0];
        j[0][1] += d[i][0] * xy[i][1];
        j[1][0] += d[i][1] * xy[i][0];
        j[1][1] += d[i][1] * xy[i][1];
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
    (inv, det)
}

fn to_cartesian(inv: &[[f64; 2]; 2], dn: [f64; 2]) -> [f64; 2] {
    [inv[0][0] * dn[0] + inv[0][1] * dn[1], inv[1][0] * dn[0] + inv[1][1] * dn[1]]
}

fn q4_cartesian_derivs(xy: &[[f64; 2]; 4], xi: f64, eta: f64) -> ([[f64; 2]; 4], f64) {
    let (inv, det) = jacobian(xy, xi, eta);
    let d = q4_natural_derivs(xi, eta);
    (std::array::from_fn(|i| to_cartesian(&inv, d[i])), det)
}

fn membrane_b(xy: &[[f64; 2]; 4], xi: f64, eta: f64) -> SMatrix<f64, 3, 8> {
    let (d, _) = q4_cartesian_derivs(xy, xi, eta);
    let mut b = SMatrix::<f64, 3, 8>::zeros();
    for i in 0..4 {
        b[(0, 2 * i)] = d[i][0];
        b[(1, 2 * i + 1)] = d[i][1];
        b[(2, 2 * i)] = d[i][1];
        b[(2, 2 * i + 1)] = d[i][0];
    }
    b
}

fn membrane_stiffness(xy: &[[f64; 2]; 4], c: &Matrix3<f64>, t: f64) -> SMatrix<f64, 8, 8> {
    let mut k = SMatrix::<f64, 8, 8>::zeros();
    for &(xi, eta) in &GAUSS2 {
        let b = membrane_b(xy, xi, eta);
        let (_, det) = jacobian(xy, xi, eta);
        k += b.transpose() * c * b * (t * det);
    }
    k
}

/// Natural derivatives of the 8-node serendipity functions: corners 0–3,
/// then midsides of edges 0-1, 1-2, 2-3, 3-0.
fn serendipity_derivs(xi: f64, eta: f64) -> [[f64; 2]; 8] {
    let mut d = [[0.0; 2]; 8];
    for i in 0..4 {
        let (a, b) = (XI[i], ETA[i]);
        d[i] = [
            0.25 * a * (1.0 + b * eta) * (2.0 * a * xi + b * eta),
            0.25 * b * (1.0 + a * xi) * (a * xi + 2.0 * b * eta),
        ];
    }
    d[4] = [-xi * (1.0 - eta), -0.5 * (1.0 - xi * xi)];
    d[5] = [0.5 * (1.0 - eta * eta), -eta * (1.0 + xi)];
    d[6] = [-xi * (1.0 + eta), 0.5 * (1.0 - xi * xi)];
    d[7] = [-0.5 * (1.0 - eta * eta), -eta * (1.0 - xi)];
    d
}

/// Maps the 12 corner DOFs (w, θx, θy per corner) to βx, βy at the eight
/// serendipity nodes.
fn kirchhoff_constraints(xy: &[[f64; 2]; 4]) -> SMatrix<f64, 16, 12> {
    let mut g = SMatrix::<f64, 16, 12>::zeros();
    for i in 0..4 {
        g[(2 * i, 3 * i + 2)] = 1.0;
        g[(2 * i + 1, 3 * i + 1)] = -1.0;
    }
    for edge in 0..4 {
        let (i, j) = (edge, (edge + 1) % 4);
        let dx = xy[j][0] - xy[i][0];
        let dy = xy[j][1] - xy[i][1];
        let l = (dx * dx + dy * dy).sqrt();
        let (c, s) = (dx / l, dy / l);
        let mut beta_s = [0.0; 12];
        let mut beta_n = [0.0; 12];
        for (node, sign) in [(i, -1.0), (j, 1.0)] {
            beta_s[3 * node] += -1.5 / l * sign;
            // βs at a corner = c·θy − s·θx; βn = −s·θy − c·θx.
            beta_s[3 * node + 2] += -0.25 * c;
            beta_s[3 * node + 1] += 0.25 * s;
            beta_n[3 * node + 2] += -0.5 * s;
            beta_n[3 * node + 1] += -0.5 * c;
        }
        let k = 4 + edge;
        for d in 0..12 {
            g[(2 * k, d)] = c * beta_s[d] - s * beta_n[d];
            g[(2 * k + 1, d)] = s * beta_s[d] + c * beta_n[d];
        }
    }
    g
}

fn bending_b(xy: &[[f64; 2]; 4], xi: f64, eta: f64) -> SMatrix<f64, 3, 12> {
    let (inv, _) = jacobian(xy, xi, eta);
    let d = serendipity_derivs(xi, eta);
    let mut h = SMatrix::<f64, 3, 16>::zeros();
    for k in 0..8 {
        let [nx, ny] = to_cartesian(&inv, d[k]);
        h[(0, 2 * k)] = nx;
        h[(1, 2 * k + 1)] = ny;
        h[(2, 2 * k)] = ny;
        h[(2, 2 * k + 1)] = nx;
    }
    h * kirchhoff_constraints(xy)
}

fn bending_stiffness(xy: &[[f64; 2]; 4], c: &Matrix3<f64>, t: f64) -> SMatrix<f64, 12, 12> {
    let d = c * (t.powi(3) / 12.0);
    let mut k = SMatrix::<f64, 12, 12>::zeros();
    for &(xi, eta) in &GAUSS2 {
        let b = bending_b(xy, xi, eta);
        let (_, det) = jacobian(xy, xi, eta);
        k += b.transpose() * d * b * det;
    }
    k
}

/// Penalty on the difference between the drilling rotation and the
/// membrane's infinitesimal rotation ½(v,x − u,y).
fn drilling_stiffness(xy: &[[f64; 2]; 4], alpha: f64) -> Mat24 {
    let mut k = Mat24::zeros();
    for &(xi, eta) in &GAUSS2 {
        let n = q4_shape(xi, eta);
        let (d, det) = q4_cartesian_derivs(xy, xi, eta);
        let mut r = SVector::<f64, 24>::zeros();
        for i in 0..4 {
            r[6 * i + 5] = n[i];
            r[6 * i] = 0.5 * d[i][1];
            r[6 * i + 1] = -0.5 * d[i][0];
        }
        k += r * r.transpose() * (alpha * det);
    }
    k
}

fn mass(xy: &[[f64; 2]; 4], rho: f64, t: f64) -> Mat24 {
    let mut m = Mat24::zeros();
    let rotary = t * t / 12.0;
    for &(xi, eta) in &GAUSS2 {
        let n = q4_shape(xi, eta);
        let (_, det) = jacobian(xy, xi, eta);
        for i in 0..4 {
            for j in 0..4 {
                let base = rho * t * n[i] * n[j] * det;
                for c in 0..3 {
                    m[(6 * i + c, 6 * j + c)] += base;
                }
                for c in 3..5 {
                    m[(6 * i + c, 6 * j + c)] += base * rotary;
                }
            }
        }
    }
    symmetrize(m)
}
