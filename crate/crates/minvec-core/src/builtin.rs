//! Built-in example groups.
//!
//! Five stock actions cover the interesting behaviors at small dimension:
//!
//! * `so11` — SO(1,1) on R², the smallest noncompact case (trivial K);
//! * `so22` — SO(2,2) ⊂ SL₄(R) on R⁴ with the K-component representative
//!   and the discrete normalizer/swap representatives used by quotient
//!   bookkeeping;
//! * `sl2r-adjoint` — the adjoint action of SL₂(R) on sl₂(R) ≅ R³, with
//!   the Weyl reflection shipped as a normalizer representative;
//! * `sl2c-adjoint` — the realified adjoint action of SL₂(C) on
//!   sl₂(C) ≅ R⁶ (one dense stratum, all Cartans conjugate);
//! * `so2-rotation` — SO(2) on R², a compact control case.

use nalgebra::{Complex, DMatrix, DVector};

use crate::algebra::{CompatibleGroup, GroupSpec};

type CMat = DMatrix<Complex<f64>>;

pub const BUILTIN_NAMES: [&str; 5] = ["so11", "so22", "sl2r-adjoint", "sl2c-adjoint", "so2-rotation"];

/// Resolve a built-in group by name.
pub fn builtin(name: &str) -> Option<CompatibleGroup> {
    let spec = match name {
        "so11" => so11_spec(),
        "so22" => so22_spec(),
        "sl2r-adjoint" => sl2r_adjoint_spec(),
        "sl2c-adjoint" => sl2c_adjoint_spec(),
        "so2-rotation" => so2_spec(),
        _ => return None,
    };
    Some(spec.build().expect("built-in group must validate"))
}

/// Raw spec of a built-in (used by the CLI to echo resolved configs).
pub fn builtin_spec(name: &str) -> Option<GroupSpec> {
    match name {
        "so11" => Some(so11_spec()),
        "so22" => Some(so22_spec()),
        "sl2r-adjoint" => Some(sl2r_adjoint_spec()),
        "sl2c-adjoint" => Some(sl2c_adjoint_spec()),
        "so2-rotation" => Some(so2_spec()),
        _ => None,
    }
}

fn so11_spec() -> GroupSpec {
    GroupSpec::new("so11", 2).with_p(vec![DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])])
}

fn so2_spec() -> GroupSpec {
    GroupSpec::new("so2-rotation", 2).with_k(vec![DMatrix::from_row_slice(
        2,
        2,
        &[0., -1., 1., 0.],
    )])
}

/// SO(2,2) preserving diag(1,1,-1,-1): k = two block rotations, p = the four
/// symmetric off-block generators.
fn so22_spec() -> GroupSpec {
    let mut k = Vec::new();
    let mut kb = DMatrix::zeros(4, 4);
    kb[(0, 1)] = -1.0;
    kb[(1, 0)] = 1.0;
    k.push(kb);
    let mut kb = DMatrix::zeros(4, 4);
    kb[(2, 3)] = -1.0;
    kb[(3, 2)] = 1.0;
    k.push(kb);

    let mut p = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let mut m = DMatrix::zeros(4, 4);
            m[(i, 2 + j)] = 1.0;
            m[(2 + j, i)] = 1.0;
            p.push(m);
        }
    }

    // Non-identity component of K = S(O(2) x O(2)): simultaneous reflection
    // in both factors.
    let comp = DMatrix::from_diagonal(&DVector::from_row_slice(&[1., -1., 1., -1.]));

    // Discrete normalizer data: per-factor sign flips (inside K, used for
    // quotient-orbit clustering) and the factor swap k0, which normalizes
    // the group inside SL4 without belonging to it. k0 realizes the outer
    // identification of the two open strata.
    let flip1 = DMatrix::from_diagonal(&DVector::from_row_slice(&[-1., -1., 1., 1.]));
    let flip2 = DMatrix::from_diagonal(&DVector::from_row_slice(&[1., 1., -1., -1.]));
    let mut k0 = DMatrix::zeros(4, 4);
    k0[(0, 2)] = -1.0;
    k0[(1, 3)] = -1.0;
    k0[(2, 0)] = 1.0;
    k0[(3, 1)] = 1.0;

    GroupSpec::new("so22", 4)
        .with_k(k)
        .with_p(p)
        .with_component_reps(vec![comp])
        .with_normalizer_reps(vec![flip1, flip2, k0])
}

// ---------------------------------------------------------------------
// sl2(R) adjoint

/// Orthonormal basis of sl2(R) for tr(X Yᵀ): h/√2, s/√2, r/√2 with
/// h = diag(1,-1), s = [[0,1],[1,0]], r = [[0,-1],[1,0]].
fn sl2r_v_basis() -> [DMatrix<f64>; 3] {
    let c = 1.0 / 2f64.sqrt();
    [
        DMatrix::from_row_slice(2, 2, &[c, 0., 0., -c]),
        DMatrix::from_row_slice(2, 2, &[0., c, c, 0.]),
        DMatrix::from_row_slice(2, 2, &[0., -c, c, 0.]),
    ]
}

/// Coordinates of a traceless 2x2 matrix in the sl2(R) basis above.
pub fn sl2r_to_coords(m: &DMatrix<f64>) -> DVector<f64> {
    let basis = sl2r_v_basis();
    DVector::from_fn(3, |i, _| crate::linalg::frob_dot(m, &basis[i]))
}

/// Inverse of [`sl2r_to_coords`].
pub fn coords_to_sl2r(v: &DVector<f64>) -> DMatrix<f64> {
    let basis = sl2r_v_basis();
    let mut m = DMatrix::zeros(2, 2);
    for i in 0..3 {
        m += &basis[i] * v[i];
    }
    m
}

/// The 3x3 matrix of ad(x) (or of Ad(g) when `conjugate` is set) on sl2(R).
fn sl2r_op_matrix(x: &DMatrix<f64>, conjugate: bool) -> DMatrix<f64> {
    let basis = sl2r_v_basis();
    let mut out = DMatrix::zeros(3, 3);
    for (j, b) in basis.iter().enumerate() {
        let image = if conjugate {
            let xinv = x.clone().try_inverse().expect("invertible");
            x * b * xinv
        } else {
            x * b - b * x
        };
        out.set_column(j, &sl2r_to_coords(&image));
    }
    out
}

fn sl2r_adjoint_spec() -> GroupSpec {
    let r = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
    let h = DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]);
    let s = DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]);
    let k = vec![sl2r_op_matrix(&r, false)];
    let p = vec![sl2r_op_matrix(&h, false), sl2r_op_matrix(&s, false)];
    // Weyl reflection w = exp(pi/2 r), acting on sl2 by conjugation.
    let w = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
    let weyl = sl2r_op_matrix(&w, true);
    GroupSpec::new("sl2r-adjoint", 3)
        .with_k(k)
        .with_p(p)
        .with_normalizer_reps(vec![weyl])
}

// ---------------------------------------------------------------------
// sl2(C) adjoint, realified

fn cmat(re: [[f64; 2]; 2], im: [[f64; 2]; 2]) -> CMat {
    CMat::from_fn(2, 2, |i, j| Complex::new(re[i][j], im[i][j]))
}

/// Complex orthonormal frame of sl2(C) over R for Re tr(X Y*):
/// {h, ih, s, is, a, ia} / sqrt(2) with s = e+f, a = e-f.
fn sl2c_v_basis() -> Vec<CMat> {
    let z = [[0.0; 2]; 2];
    let h = cmat([[1., 0.], [0., -1.]], z);
    let s = cmat([[0., 1.], [1., 0.]], z);
    let a = cmat([[0., 1.], [-1., 0.]], z);
    let i = Complex::new(0.0, 1.0);
    let mut out = Vec::new();
    for b in [h, s, a] {
        out.push(b.clone() * Complex::new(1.0 / 2f64.sqrt(), 0.0));
        out.push(b * i * Complex::new(1.0 / 2f64.sqrt(), 0.0));
    }
    out
}

fn re_tr_adjoint_dot(x: &CMat, y: &CMat) -> f64 {
    // Re tr(x y*)
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += x[(i, j)] * y[(i, j)].conj();
        }
    }
    acc.re
}

/// Coordinates of a traceless complex 2x2 matrix in the realified basis.
pub fn sl2c_to_coords(m: &CMat) -> DVector<f64> {
    let basis = sl2c_v_basis();
    DVector::from_fn(6, |i, _| re_tr_adjoint_dot(m, &basis[i]))
}

/// Inverse of [`sl2c_to_coords`].
pub fn coords_to_sl2c(v: &DVector<f64>) -> CMat {
    let basis = sl2c_v_basis();
    let mut m = CMat::zeros(2, 2);
    for i in 0..6 {
        m += &basis[i] * Complex::new(v[i], 0.0);
    }
    m
}

fn sl2c_op_matrix(x: &CMat, conjugate: bool) -> DMatrix<f64> {
    let basis = sl2c_v_basis();
    let mut out = DMatrix::zeros(6, 6);
    for (j, b) in basis.iter().enumerate() {
        let image = if conjugate {
            let xinv = x.clone().try_inverse().expect("invertible");
            x * b * xinv
        } else {
            x * b - b * x
        };
        out.set_column(j, &sl2c_to_coords(&image));
    }
    out
}

fn sl2c_adjoint_spec() -> GroupSpec {
    let z = [[0.0; 2]; 2];
    let h = cmat([[1., 0.], [0., -1.]], z);
    let s = cmat([[0., 1.], [1., 0.]], z);
    let a = cmat([[0., 1.], [-1., 0.]], z);
    let i = Complex::new(0.0, 1.0);
    // su(2): ih, a, is; p = i su(2): h, s, ia.
    let k = vec![
        sl2c_op_matrix(&(h.clone() * i), false),
        sl2c_op_matrix(&a, false),
        sl2c_op_matrix(&(s.clone() * i), false),
    ];
    let p = vec![
        sl2c_op_matrix(&h, false),
        sl2c_op_matrix(&s, false),
        sl2c_op_matrix(&(a.clone() * i), false),
    ];
    let w = cmat([[0., -1.], [1., 0.]], z);
    let weyl = sl2c_op_matrix(&w, true);
    GroupSpec::new("sl2c-adjoint", 6)
        .with_k(k)
        .with_p(p)
        .with_normalizer_reps(vec![weyl])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_validate() {
        for name in BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            assert!(
                g.worst_residual() < 1e-12,
                "{name}: residual {}",
                g.worst_residual()
            );
        }
    }

    #[test]
    fn builtin_dimensions() {
        let g = builtin("so22").unwrap();
        assert_eq!((g.dim_v(), g.dim_k(), g.dim_p()), (4, 2, 4));
        let g = builtin("sl2r-adjoint").unwrap();
        assert_eq!((g.dim_v(), g.dim_k(), g.dim_p()), (3, 1, 2));
        let g = builtin("sl2c-adjoint").unwrap();
        assert_eq!((g.dim_v(), g.dim_k(), g.dim_p()), (6, 3, 3));
        let g = builtin("so11").unwrap();
        assert_eq!((g.dim_v(), g.dim_k(), g.dim_p()), (2, 0, 1));
    }

    #[test]
    fn sl2r_coords_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[0.3, 1.2, -0.7, -0.3]);
        let v = sl2r_to_coords(&m);
        let back = coords_to_sl2r(&v);
        assert!((m - back).norm() < 1e-14);
    }

    #[test]
    fn sl2c_coords_roundtrip() {
        let m = cmat([[0.5, -0.2], [1.1, -0.5]], [[0.9, 0.1], [-0.4, -0.9]]);
        let v = sl2c_to_coords(&m);
        let back = coords_to_sl2c(&v);
        let mut diff = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                diff += (m[(i, j)] - back[(i, j)]).norm_sqr();
            }
        }
        assert!(diff.sqrt() < 1e-14);
    }

    #[test]
    fn so22_bracket_of_p_lands_in_k() {
        // Expansion residual of [p_i, p_j] over the k basis stays tiny.
        let g = builtin("so22").unwrap();
        use crate::algebra::AlgebraElement;
        for i in 0..4 {
            for j in 0..4 {
                let mut ci = DVector::zeros(4);
                ci[i] = 1.0;
                let mut cj = DVector::zeros(4);
                cj[j] = 1.0;
                let a = AlgebraElement::from_p(2, ci);
                let b = AlgebraElement::from_p(2, cj);
                let (coeffs, resid) = g.bracket_coeffs(&a, &b);
                assert!(resid < 1e-12);
                assert!(coeffs.coeffs_p.norm() < 1e-12, "[p,p] must lie in k");
            }
        }
    }
}
