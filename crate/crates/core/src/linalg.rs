//! Dense least squares through a column-normalised, column-pivoted
//! Householder QR truncated at the numerical rank.

use nalgebra::{ComplexField, DMatrix, DVector, RealField};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LstsqSolution<T: ComplexField> {
    pub x: DVector<T>,
    pub rank: usize,
    pub residual_norm: f64,
}

/// Minimise ‖A x − b‖₂. Columns are scaled to unit norm, then factored with
/// column pivoting; factorisation stops once the remaining column norms fall
/// below `rcond · |R₀₀|`, and the minimum-norm solution of the truncated
/// system is returned.
pub fn lstsq<T>(a: &DMatrix<T>, b: &DVector<T>, rcond: f64) -> Result<LstsqSolution<T>>
where
    T: ComplexField<RealField = f64>,
    f64: RealField,
{
    let (m, n) = a.shape();
    if n == 0 || m < n || b.len() != m {
        return Err(Error::RankDeficient);
    }
    if !a.iter().all(|v| v.clone().modulus().is_finite()) || !b.iter().all(|v| v.clone().modulus().is_finite()) {
        return Err(Error::RankDeficient);
    }
    let mut r = a.clone();
    let mut norms = vec![1.0; n];
    for (j, mut col) in r.column_iter_mut().enumerate() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= T::from_real(nrm);
            norms[j] = nrm;
        }
    }
    let mut qtb = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    let mut r00 = 0.0;
    for k in 0..n {
        let (best, best_norm) = (k..n)
            .map(|j| (j, r.column(j).rows(k, m - k).norm()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if k == 0 {
            r00 = best_norm;
        }
        if !(best_norm > rcond * r00) || best_norm == 0.0 {
            break;
        }
        r.swap_columns(k, best);
        perm.swap(k, best);
        // Householder vector v with (I - 2vv*) x = -e^{i arg x₀} ‖x‖ e₁.
        let mut v: DVector<T> = r.column(k).rows(k, m - k).into_owned();
        let x0 = v[0].clone();
        let phase = if x0.clone().modulus() > 0.0 { x0.clone().signum() } else { T::one() };
        let alpha = -(phase * T::from_real(best_norm));
        v[0] = x0 - alpha.clone();
        let vn = v.norm();
        v /= T::from_real(vn);
        for j in k..n {
            let mut col = r.column_mut(j);
            let mut col = col.rows_mut(k, m - k);
            let s = v.dotc(&col) * T::from_real(2.0);
            col.axpy(-s, &v, T::one());
        }
        {
            let mut tail = qtb.rows_mut(k, m - k);
            let s = v.dotc(&tail) * T::from_real(2.0);
            tail.axpy(-s, &v, T::one());
        }
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = T::zero();
        }
        rank += 1;
    }
    if rank == 0 {
        return Err(Error::RankDeficient);
    }
    let residual_norm = qtb.rows(rank, m - rank).norm();
    // Minimum-norm solution of [R₁₁ R₁₂] y = c: factor the adjoint as
    // Q₂ L*, solve the triangular system, and map back through Q₂.
    let top = r.view((0, 0), (rank, n)).adjoint();
    let qr = top.qr();
    let lower = qr.r().adjoint();
    let rhs = qtb.rows(0, rank).into_owned();
    let t = lower.solve_lower_triangular(&rhs).ok_or(Error::RankDeficient)?;
    let y = qr.q() * t;
    let mut x = DVector::from_element(n, T::zero());
    for (i, yi) in y.iter().enumerate() {
        let col = perm[i];
        x[col] = yi.clone() / T::from_real(norms[col]);
    }
    Ok(LstsqSolution { x, rank, residual_norm })
}
