//! Generalized symmetric eigenproblem K·φ = ω²·M·φ for the lowest modes.
//!
//! Reference path: shift K by a small multiple of M so the pencil is
//! definite even with rigid-body modes, factor A = K + s·M = L·Lᵀ, and
//! solve the standard problem L⁻¹·M·L⁻ᵀ·y = μ·y with μ = 1/(ω² + s).
//! Massless DOFs show up as μ = 0 (infinite frequency) and are dropped.
//! Large problems that ask for few modes use subspace iteration with the
//! same factorization.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::{AssembledSystem, FeaError};

/// One eigenpair. `shape` is over the free DOFs with φᵀ·M·φ = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// ω², rad²/s²
    pub eigenvalue: f64,
    pub frequency_hz: f64,
    pub shape: DVector<f64>,
}

/// Above this size, and when few modes are requested, subspace iteration
/// replaces the full dense decomposition.
const SUBSPACE_MIN_DOFS: usize = 400;
const SUBSPACE_MAX_ITER: usize = 500;
const SUBSPACE_TOL: f64 = 1e-12;

/// The `n_modes` lowest modes, ascending in frequency.
pub fn solve_modes(system: &AssembledSystem, n_modes: usize) -> Result<Vec<Mode>, FeaError> {
    let n = system.n_free();
    if n_modes > n {
        return Err(FeaError::ModeCount { requested: n_modes, available: n });
    }
    if n_modes == 0 {
        return Ok(Vec::new());
    }
    let (chol, shift) = shifted_factor(&system.k, &system.m)?;
    let pairs = if n > SUBSPACE_MIN_DOFS && 4 * n_modes < n {
        match subspace(&system.k, &system.m, &chol, shift, n_modes) {
            Some(p) => p,
            None => dense(&system.m, &chol, shift),
        }
    } else {
        dense(&system.m, &chol, shift)
    };
    if pairs.len() < n_modes {
        return Err(FeaError::ModeCount { requested: n_modes, available: pairs.len() });
    }
    let mut modes: Vec<Mode> = pairs
        .into_iter()
        .take(n_modes)
        .map(|(_, phi)| finish_mode(&system.k, &system.m, phi))
        .collect();
    modes.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    Ok(modes)
}

/// Mass-normalizes the shape, fixes its sign, and takes the Rayleigh
/// quotient as the eigenvalue.
fn finish_mode(k: &DMatrix<f64>, m: &DMatrix<f64>, phi: DVector<f64>) -> Mode {
    let mut phi = phi;
    let mass = phi.dot(&(m * &phi));
    phi /= mass.sqrt();
    let imax = phi.iamax();
    if phi[imax] < 0.0 {
        phi = -phi;
    }
    let lambda = phi.dot(&(k * &phi)).max(0.0);
    Mode { eigenvalue: lambda, frequency_hz: lambda.sqrt() / (2.0 * PI), shape: phi }
}

fn trace(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

fn shifted_factor(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64), FeaError> {
    let tm = trace(m);
    if !(tm > 0.0) {
        return Err(FeaError::ModeCount { requested: 1, available: 0 });
    }
    let mut shift = 1e-6 * trace(k).abs().max(f64::MIN_POSITIVE) / tm;
    for _ in 0..4 {
        let a = k + m * shift;
        if let Some(chol) = Cholesky::new(a.clone()) {
            let l = chol.l_dirty();
            if (0..a.nrows()).all(|i| l[(i, i)] * l[(i, i)] > 1e-13 * a[(i, i)]) {
                return Ok((chol, shift));
            }
        }
        shift *= 100.0;
    }
    Err(FeaError::MasslessDof)
}

/// All finite eigenpairs as (ω², unnormalized φ), ascending.
fn dense(m: &DMatrix<f64>, chol: &Cholesky<f64, Dyn>, shift: f64) -> Vec<(f64, DVector<f64>)> {
    let l = chol.l();
    let x = l.solve_lower_triangular(m).expect("nonsingular factor");
    let mut c = l.solve_lower_triangular(&x.transpose()).expect("nonsingular factor");
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let mu_max = eig.eigenvalues.amax();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-12 * mu_max).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let lt = l.transpose();
    order
        .into_iter()
        .map(|i| {
            let y = eig.eigenvectors.column(i).into_owned();
            let phi = lt.solve_upper_triangular(&y).expect("nonsingular factor");
            (1.0 / eig.eigenvalues[i] - shift, phi)
        })
        .collect()
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Reduced eigenproblem Ka·q = ν·Mb·q with Mb positive definite; returns
/// ascending ν and Mb-orthonormal vectors.
fn reduced(ka: &DMatrix<f64>, mb: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let chol = Cholesky::new(mb.clone())?;
    let l = chol.l();
    let x = l.solve_lower_triangular(ka)?;
    let mut c = l.solve_lower_triangular(&x.transpose())?;
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let lt = l.transpose();
    let q = order.len();
    let mut vecs = DMatrix::zeros(q, q);
    let mut vals = Vec::with_capacity(q);
    for (col, &i) in order.iter().enumerate() {
        let y = eig.eigenvectors.column(i).into_owned();
        vecs.set_column(col, &lt.solve_upper_triangular(&y)?);
        vals.push(eig.eigenvalues[i]);
    }
    Some((vals, vecs))
}

/// Subspace iteration on A⁻¹·M. Returns `None` if the subspace collapses,
/// in which case the caller falls back to the dense path.
fn subspace(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    chol: &Cholesky<f64, Dyn>,
    shift: f64,
    p: usize,
) -> Option<Vec<(f64, DVector<f64>)>> {
    let n = k.nrows();
    let q = (2 * p).max(p + 8).min(n);
    let mut x = starting_vectors(k, m, q);
    let mut prev = vec![f64::INFINITY; p];
    for _ in 0..SUBSPACE_MAX_ITER {
        let y = m * &x;
        let xb = chol.solve(&y);
        let ka = xb.transpose() * &y;
        let mb = xb.transpose() * m * &xb;
        let (vals, vecs) = reduced(&ka, &mb)?;
        x = &xb * vecs;
        let converged = (0..p).all(|i| (vals[i] - prev[i]).abs() <= SUBSPACE_TOL * vals[i].abs());
        prev.copy_from_slice(&vals[..p]);
        if converged {
            return Some((0..p).map(|i| (vals[i] - shift, x.column(i).into_owned())).collect());
        }
    }
    None
}

/// Diagonal of M, unit vectors at the DOFs with the largest m_ii/k_ii, and
/// pseudo-random fill (fixed seed, so runs are reproducible).
fn starting_vectors(k: &DMatrix<f64>, m: &DMatrix<f64>, q: usize) -> DMatrix<f64> {
    let n = k.nrows();
    let mut x = DMatrix::zeros(n, q);
    for i in 0..n {
        x[(i, 0)] = m[(i, i)];
    }
    let mut ratios: Vec<(usize, f64)> =
        (0..n).filter(|&i| m[(i, i)] > 0.0).map(|i| (i, m[(i, i)] / k[(i, i)].abs().max(f64::MIN_POSITIVE))).collect();
    ratios.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let n_unit = (q / 2).saturating_sub(1);
    for (col, &(i, _)) in ratios.iter().take(n_unit).enumerate() {
        x[(i, col + 1)] = 1.0;
    }
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    for col in 1 + n_unit.min(ratios.len())..q {
        for i in 0..n {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            x[(i, col)] = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fea::assemble;
    use crate::model::{parse_deck, ConstraintSet};

    #[test]
    fn sdof_is_one_hertz() {
        let deck = "UNITS,m,kg,N\nMAT,1,39.47841760435743,0.3,0,1,1\nNODE,1,0,0,0\nNODE,2,1,0,0\n\
                    BEAM,1,1,1,2,1,1,1,1,0,1,0\nMASS,1,2,1\nSPCSET,A\nSPC,A,1,123456\nSPC,A,2,23456\n";
        let model = parse_deck(deck).unwrap();
        let sys = assemble(&model, model.constraint_set("A").unwrap()).unwrap();
        let modes = solve_modes(&sys, 1).unwrap();
        assert!((modes[0].frequency_hz - 1.0).abs() < 1e-12);
        assert!(solve_modes(&sys, 2).is_err());
    }

    #[test]
    fn massless_unstiffened_dof_is_diagnosed() {
        let deck = "UNITS,m,kg,N\nMAT,1,1000,0.3,0,1,1\nNODE,1,0,0,0\nNODE,2,1,0,0\nNODE,3,2,0,0\n\
                    BEAM,1,1,1,2,1,1,1,1,0,1,0\nMASS,1,2,1\nMASS,2,3,0\n";
        let model = parse_deck(deck).unwrap();
        let mut set = ConstraintSet::new("A");
        set.spcs.push(crate::model::Spc { node: crate::model::NodeId(1), dofs: crate::model::DofMask::ALL });
        let sys = assemble(&model, &set).unwrap();
        assert_eq!(solve_modes(&sys, 1).unwrap_err(), FeaError::MasslessDof);
    }

    #[test]
    fn subspace_matches_dense() {
        // Chain of 80 beams, free DOFs well above the subspace threshold.
        let mut deck = String::from("UNITS,m,kg,N\nMAT,1,7e10,0.3,2700,1e8,2e8\n");
        for i in 0..=80 {
            deck.push_str(&format!("NODE,{},{},0,0\n", i + 1, i as f64 * 0.0125));
        }
        for i in 0..80 {
            deck.push_str(&format!("BEAM,{},1,{},{},1e-4,8e-10,2e-9,1e-9,0,1,0\n", i + 1, i + 1, i + 2));
        }
        deck.push_str("SPCSET,A\nSPC,A,1,123456\n");
        let model = parse_deck(&deck).unwrap();
        let sys = assemble(&model, model.constraint_set("A").unwrap()).unwrap();
        let (chol, shift) = shifted_factor(&sys.k, &sys.m).unwrap();
        let all = dense(&sys.m, &chol, shift);
        let sub = solve_modes(&sys, 6).unwrap();
        for (d, s) in all.iter().zip(&sub) {
            assert!((d.0 - s.eigenvalue).abs() < 1e-8 * d.0, "{} vs {}", d.0, s.eigenvalue);
        }
    }
}
