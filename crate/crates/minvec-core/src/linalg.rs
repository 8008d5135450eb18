//! Small dense linear-algebra helpers built on SVD.
//!
//! Everything in this crate works on spaces of dimension at most a few
//! dozen, so rank-revealing SVD is used throughout instead of faster but
//! less robust factorizations.

use nalgebra::{DMatrix, DVector};

/// Orthonormal basis of the nullspace of `a`, as columns.
///
/// Singular values below `rel_tol * sigma_max` count as zero. For a zero
/// (or empty) matrix the full identity basis is returned.
pub fn nullspace_cols(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    nullspace_cols_floor(a, rel_tol, 0.0)
}

/// Like [`nullspace_cols`] with an additional absolute singular-value
/// floor: σ ≤ max(rel_tol·σ_max, abs_floor) counts as zero.
pub fn nullspace_cols_floor(a: &DMatrix<f64>, rel_tol: f64, abs_floor: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad with zero rows so the SVD exposes all right-singular vectors.
    let m = a.nrows();
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd with v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = if smax > 0.0 {
        (rel_tol * smax).max(abs_floor)
    } else {
        f64::INFINITY
    };
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            cols.push(v_t.row(i).transpose());
        }
    }
    // Rows of v_t beyond the singular-value count (cannot happen after the
    // padding above, kept as a guard).
    for i in svd.singular_values.len()..v_t.nrows() {
        cols.push(v_t.row(i).transpose());
    }
    from_columns(n, &cols)
}

/// Orthonormal basis of the column space of `a`, as columns.
pub fn column_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let cutoff = rel_tol * smax;
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            cols.push(u.column(i).into_owned());
        }
    }
    from_columns(a.nrows(), &cols)
}

/// Stack column vectors into a matrix (handles the empty case).
pub fn from_columns(nrows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Orthogonal projector `B Bᵀ` onto the span of the (orthonormal) columns of `b`.
pub fn projector(b: &DMatrix<f64>) -> DMatrix<f64> {
    if b.ncols() == 0 {
        return DMatrix::zeros(b.nrows(), b.nrows());
    }
    b * b.transpose()
}

/// Frobenius distance between the projectors of two subspaces given by
/// orthonormal column bases. Zero iff the spans agree.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (projector(a) - projector(b)).norm()
}

/// Distance of `v` to the span of the orthonormal columns of `b`.
pub fn distance_to_span(b: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    if b.ncols() == 0 {
        return v.norm();
    }
    let coeffs = b.transpose() * v;
    (v - b * coeffs).norm()
}

/// Orthonormal basis of the intersection of two spans (orthonormal columns).
pub fn intersect_spans(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, b.nrows());
    let pa = projector(a);
    let pb = projector(b);
    let eye = DMatrix::identity(n, n);
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&(&eye - pa));
    stacked.view_mut((n, 0), (n, n)).copy_from(&(&eye - pb));
    nullspace_cols(&stacked, rel_tol)
}

/// Gram-Schmidt with rank filtering: orthonormalizes `vecs` in order,
/// dropping vectors whose residual falls below `rel_tol` times their norm.
pub fn orthonormalize(vecs: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vecs {
        let scale = v.norm();
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c = u.dot(&w);
                w -= c * u;
            }
        }
        if scale > 0.0 && w.norm() > rel_tol * scale {
            let n = w.norm();
            out.push(w / n);
        }
    }
    out
}

/// Frobenius inner product of two matrices viewed as flat vectors.
pub fn frob_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Flatten a matrix column-major into a vector.
pub fn vectorize(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(a.as_slice())
}
