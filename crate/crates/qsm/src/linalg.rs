//! Small dense complex linear algebra shared by the quantum modules.
//!
//! Matrices here are tiny (memory dimension at most a handful), so everything
//! uses dense `nalgebra` storage and direct algorithms.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Replace `m` with its Hermitian part `(m + m†)/2`.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = C_ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest entry-wise modulus difference between two matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entry-wise modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest entry-wise deviation of `m` from the identity.
pub fn identity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C_ONE } else { C_ZERO };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// Fix the global phase of `v` so its first entry with modulus above `1e-12`
/// is real and non-negative.
pub fn fix_phase(v: &mut CVector) {
    if let Some(pivot) = v.iter().find(|a| a.norm() > 1e-12) {
        let phase = pivot.unscale(pivot.norm());
        let rot = phase.conj();
        for a in v.iter_mut() {
            *a *= rot;
        }
    }
}

/// Pairwise (cascade) summation in a fixed order, for reproducible reductions.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// All eigenvalues of a general complex matrix, sorted by decreasing modulus.
pub fn eigenvalues_by_modulus(m: &CMatrix) -> Result<Vec<Complex64>> {
    let schur = m
        .clone()
        .try_schur(1e-14, 100_000)
        .ok_or_else(|| Error::NonConvergence("Schur decomposition did not converge".into()))?;
    let vals = schur
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergence("Schur form yielded no eigenvalues".into()))?;
    let mut out: Vec<Complex64> = vals.iter().copied().collect();
    out.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    Ok(out)
}

/// Eigenvector of `m` for the (simple) eigenvalue `lambda`, via shifted
/// inverse iteration. Returned unit-norm with fixed phase.
pub fn eigenvector_for(m: &CMatrix, lambda: Complex64) -> Result<CVector> {
    let n = m.nrows();
    let scale = max_abs(m).max(1.0);
    // Small shift keeps the system invertible while the eigen-direction
    // still dominates the inverse.
    let shift = lambda + Complex64::new(scale * 1e-11, scale * 1e-11);
    let shifted = m - CMatrix::identity(n, n).scale(1.0) * shift;
    let lu = shifted.lu();
    let mut v = CVector::from_element(n, C_ONE);
    v /= Complex64::new(v.norm(), 0.0);
    for _ in 0..8 {
        let next = lu
            .solve(&v)
            .ok_or_else(|| Error::NonConvergence("inverse iteration hit a singular solve".into()))?;
        let norm = next.norm();
        if norm == 0.0 {
            return Err(Error::NonConvergence("inverse iteration collapsed to zero".into()));
        }
        v = next.unscale(norm);
        let residual = (m * &v - &v * lambda).norm();
        if residual <= 1e-12 * scale {
            break;
        }
    }
    let residual = (m * &v - &v * lambda).norm();
    if residual > 1e-8 * scale {
        return Err(Error::NonConvergence(format!(
            "inverse iteration residual {residual:.3e} too large"
        )));
    }
    fix_phase(&mut v);
    Ok(v)
}

/// Factor a Hermitian PSD matrix as `v = w† w` with `w` invertible.
///
/// Uses Cholesky when `v` is numerically positive definite; otherwise an
/// eigendecomposition square root with eigenvalues floored at `floor`, whose
/// inverse is the support-restricted pseudo-inverse.
pub fn hermitian_factor(v: &CMatrix, floor: f64) -> Result<(CMatrix, CMatrix)> {
    if let Some(chol) = Cholesky::new(v.clone()) {
        let w = chol.l().adjoint();
        let w_inv = w
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularFixedPoint("triangular factor not invertible".into()))?;
        return Ok((w, w_inv));
    }
    let eig = SymmetricEigen::new(v.clone());
    let n = v.nrows();
    let mut sqrt = DVector::<f64>::zeros(n);
    let mut inv_sqrt = DVector::<f64>::zeros(n);
    for i in 0..n {
        let ev = eig.eigenvalues[i].max(floor);
        sqrt[i] = ev.sqrt();
        inv_sqrt[i] = 1.0 / ev.sqrt();
    }
    let q = eig.eigenvectors;
    let mut w = CMatrix::zeros(n, n);
    let mut w_inv = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // w = diag(sqrt) q†, w_inv = q diag(1/sqrt)
            w[(i, j)] = q[(j, i)].conj() * Complex64::new(sqrt[i], 0.0);
            w_inv[(i, j)] = q[(i, j)] * Complex64::new(inv_sqrt[j], 0.0);
        }
    }
    Ok((w, w_inv))
}

/// Extend `fixed` (assumed orthonormal) to an orthonormal basis of C^n by
/// Gram-Schmidt over the canonical basis vectors in index order, skipping
/// candidates whose residual norm falls below `residual_floor`.
pub fn complete_orthonormal_basis(
    fixed: &[CVector],
    n: usize,
    residual_floor: f64,
) -> Result<Vec<CVector>> {
    let mut basis: Vec<CVector> = fixed.to_vec();
    let mut extra: Vec<CVector> = Vec::new();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut cand = CVector::zeros(n);
        cand[i] = C_ONE;
        // two Gram-Schmidt passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&cand);
                cand -= b * overlap;
            }
        }
        let norm = cand.norm();
        if norm < residual_floor {
            continue;
        }
        let mut unit = cand.unscale(norm);
        fix_phase(&mut unit);
        basis.push(unit.clone());
        extra.push(unit);
    }
    if basis.len() != n {
        return Err(Error::NonConvergence(
            "orthonormal basis completion ran out of candidates".into(),
        ));
    }
    Ok(extra)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitize_produces_hermitian_part() {
        let mut m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(2.0, 1.0), c(0.0, 3.0), c(4.0, -0.5)]);
        hermitize(&mut m);
        assert!(max_abs_diff(&m, &m.adjoint()) < 1e-15);
        assert!((m[(0, 0)].re - 1.0).abs() < 1e-15 && m[(0, 0)].im.abs() < 1e-15);
    }

    #[test]
    fn trace_product_matches_explicit_product() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.3, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| c(j as f64 * 0.7, i as f64 + 0.1));
        let direct = (&a * &b).trace();
        let fast = trace_product(&a, &b);
        assert!((direct - fast).norm() < 1e-12);
    }

    #[test]
    fn fix_phase_makes_leading_entry_real() {
        let mut v = CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 0.6), c(0.8, 0.0)]);
        fix_phase(&mut v);
        assert!(v[1].im.abs() < 1e-15);
        assert!(v[1].re > 0.0);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..37).map(|i| (i as f64) * 0.1 - 1.3).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn eigen_pair_recovers_known_spectrum() {
        // diag(2, -1+i) conjugated by a fixed invertible matrix
        let p = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let d = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), C_ZERO, C_ZERO, c(-1.0, 1.0)]);
        let m = &p * d * p.clone().try_inverse().unwrap();
        let eigs = eigenvalues_by_modulus(&m).unwrap();
        assert!((eigs[0] - c(2.0, 0.0)).norm() < 1e-10);
        assert!((eigs[1] - c(-1.0, 1.0)).norm() < 1e-10);
        let v = eigenvector_for(&m, eigs[0]).unwrap();
        assert!(((&m * &v) - &v * eigs[0]).norm() < 1e-9);
    }

    #[test]
    fn hermitian_factor_roundtrips_pd_and_singular_matrices() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.0, 0.0)]);
        let (w, w_inv) = hermitian_factor(&a, 1e-12).unwrap();
        assert!(max_abs_diff(&(w.adjoint() * &w), &a) < 1e-12);
        assert!(identity_deviation(&(&w * &w_inv)) < 1e-10);

        // rank-one PSD matrix goes through the eigendecomposition path
        let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rank1 = &v * v.adjoint();
        let (w, w_inv) = hermitian_factor(&rank1, 1e-12).unwrap();
        assert!(max_abs_diff(&(w.adjoint() * &w), &rank1) < 1e-6);
        assert!(identity_deviation(&(&w * &w_inv)) < 1e-3);
    }

    #[test]
    fn basis_completion_is_unitary() {
        let mut f0 = CVector::zeros(4);
        f0[0] = c(0.6, 0.0);
        f0[2] = c(0.0, 0.8);
        let extra = complete_orthonormal_basis(&[f0.clone()], 4, 1e-9).unwrap();
        assert_eq!(extra.len(), 3);
        let mut cols = vec![f0];
        cols.extend(extra);
        for i in 0..4 {
            for j in 0..4 {
                let dot = cols[i].dotc(&cols[j]);
                let expect = if i == j { C_ONE } else { C_ZERO };
                assert!((dot - expect).norm() < 1e-10, "columns {i},{j} not orthonormal");
            }
        }
    }
}
