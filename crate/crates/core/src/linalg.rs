//! Small dense linear-algebra helpers on top of nalgebra.

use crate::{CMatrix, CVector, C64};

/// Singular-value based null space of a matrix.
#[derive(Debug, Clone)]
pub struct NullSpace {
    /// Orthonormal basis vectors of the (right) kernel.
    pub basis: Vec<CVector>,
    /// Numerical rank.
    pub rank: usize,
    /// Singular values in descending order (`min(m, n)` of them, or `n` when padded).
    pub singular_values: Vec<f64>,
    /// Absolute threshold below which a singular value counts as zero.
    pub threshold: f64,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Smallest singular value of the original matrix.
    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Right null space of `a` with the rank rule `σ ≤ max(m, n) · σ_max · rel_tol`.
///
/// Wide matrices are padded with zero rows so the SVD returns a complete
/// right-singular basis.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> NullSpace {
    let (m, n) = a.shape();
    if n == 0 {
        return NullSpace { basis: vec![], rank: 0, singular_values: vec![], threshold: 0.0 };
    }
    let padded;
    let work = if m < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = work.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = m.max(n) as f64 * sigma_max * rel_tol;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let basis = order[rank..].iter().map(|&k| v_t.row(k).transpose().map(|z| z.conj())).collect();
    // report only the singular values of the unpadded matrix
    let keep = m.min(n);
    NullSpace { basis, rank, singular_values: sv[..keep].to_vec(), threshold }
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// Eigenvalues of a general complex matrix (Schur form).
pub fn eigenvalues(a: &CMatrix) -> Vec<C64> {
    let schur = a.clone().schur();
    // complex Schur form is always upper triangular
    schur.eigenvalues().expect("triangular Schur form").iter().copied().collect()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Matrix exponential (Padé scaling and squaring).
pub fn expm(a: &CMatrix) -> CMatrix {
    a.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_row() {
        let a = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let ns = null_space(&a, 1e-12);
        assert_eq!(ns.rank, 1);
        assert_eq!(ns.dim(), 1);
        let v = &ns.basis[0];
        assert!((v[0] + v[1]).norm() < 1e-12);
        assert!((vector_norm(v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let a = CMatrix::zeros(2, 3);
        let ns = null_space(&a, 1e-12);
        assert_eq!(ns.rank, 0);
        assert_eq!(ns.dim(), 3);
    }

    #[test]
    fn hermitian_eigenvalues_sorted() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(0.0, 0.0)],
        );
        let ev = hermitian_eigenvalues(&a);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expm_of_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(0.0, 2.0)]));
        let e = expm(&a);
        assert!((e[(0, 0)] - C64::new((-1.0f64).exp(), 0.0)).norm() < 1e-14);
        assert!((e[(1, 1)] - C64::from_polar(1.0, 2.0)).norm() < 1e-14);
    }
}
