//! Isotropy subalgebras, θ-splittings, fingerprints, fixed spaces,
//! normalizer algebras, and numerical K-conjugacy testing.
//!
//! Subspaces of g are stored by orthonormal coefficient bases over the
//! group's g-basis (k-part coordinates first). At a minimal vector the
//! isotropy group is a closed compatible subgroup, so its algebra is
//! θ-stable and splits as k_x ⊕ p_x; away from minimal vectors θ-stability
//! may genuinely fail and is only reported, never assumed.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::{AlgebraElement, CompatibleGroup};
use crate::ksearch::{CompactSearch, KWitness, SearchOptions};
use crate::linalg;

/// Relative singular-value cutoff for rank decisions.
pub const ISO_TOL_REL: f64 = 1e-8;

/// Angle tolerance for θ-splitting a subspace into its k and p parts.
/// Looser than the rank cutoff: flow limits carry a tilt of the order of
/// the flow tolerance, far below any separation between classes.
pub const THETA_SPLIT_TOL: f64 = 1e-6;

/// A subspace of g, usually an isotropy or normalizer algebra.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    /// Orthonormal coefficient columns in R^{dim_g}.
    basis: DMatrix<f64>,
    dim_k: usize,
    dim_p: usize,
    theta_stable: bool,
}

impl Subalgebra {
    /// Wrap an orthonormal coefficient basis, computing the θ-splitting.
    pub fn from_coeff_basis(group: &CompatibleGroup, basis: DMatrix<f64>) -> Self {
        let dim_g = group.dim_g();
        assert_eq!(basis.nrows(), dim_g);
        let d = basis.ncols();
        // Coordinate spans of k and p inside R^{dim_g}.
        let mut k_span = DMatrix::zeros(dim_g, group.dim_k());
        for i in 0..group.dim_k() {
            k_span[(i, i)] = 1.0;
        }
        let mut p_span = DMatrix::zeros(dim_g, group.dim_p());
        for i in 0..group.dim_p() {
            p_span[(group.dim_k() + i, i)] = 1.0;
        }
        let dim_k = linalg::intersect_spans(&basis, &k_span, THETA_SPLIT_TOL).ncols();
        let dim_p = linalg::intersect_spans(&basis, &p_span, THETA_SPLIT_TOL).ncols();
        let theta_stable = dim_k + dim_p == d;
        Subalgebra {
            basis,
            dim_k,
            dim_p,
            theta_stable,
        }
    }

    /// The whole algebra g.
    pub fn full(group: &CompatibleGroup) -> Self {
        Subalgebra {
            basis: DMatrix::identity(group.dim_g(), group.dim_g()),
            dim_k: group.dim_k(),
            dim_p: group.dim_p(),
            theta_stable: true,
        }
    }

    /// The zero subalgebra.
    pub fn trivial(group: &CompatibleGroup) -> Self {
        Subalgebra {
            basis: DMatrix::zeros(group.dim_g(), 0),
            dim_k: 0,
            dim_p: 0,
            theta_stable: true,
        }
    }

    pub fn dim_total(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn dim_p(&self) -> usize {
        self.dim_p
    }

    pub fn theta_stable(&self) -> bool {
        self.theta_stable
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn elements(&self, group: &CompatibleGroup) -> Vec<AlgebraElement> {
        (0..self.dim_total())
            .map(|j| AlgebraElement::from_g_coeffs(&self.basis.column(j).into_owned(), group.dim_k()))
            .collect()
    }

    /// Orthonormal basis of the p-part (θ-stable subalgebras only).
    pub fn p_part(&self, group: &CompatibleGroup) -> Vec<AlgebraElement> {
        let dim_g = group.dim_g();
        let mut p_span = DMatrix::zeros(dim_g, group.dim_p());
        for i in 0..group.dim_p() {
            p_span[(group.dim_k() + i, i)] = 1.0;
        }
        let cols = linalg::intersect_spans(&self.basis, &p_span, THETA_SPLIT_TOL);
        (0..cols.ncols())
            .map(|j| AlgebraElement::from_g_coeffs(&cols.column(j).into_owned(), group.dim_k()))
            .collect()
    }

    /// Orthonormal basis of the k-part.
    pub fn k_part(&self, group: &CompatibleGroup) -> Vec<AlgebraElement> {
        let dim_g = group.dim_g();
        let mut k_span = DMatrix::zeros(dim_g, group.dim_k());
        for i in 0..group.dim_k() {
            k_span[(i, i)] = 1.0;
        }
        let cols = linalg::intersect_spans(&self.basis, &k_span, THETA_SPLIT_TOL);
        (0..cols.ncols())
            .map(|j| AlgebraElement::from_g_coeffs(&cols.column(j).into_owned(), group.dim_k()))
            .collect()
    }

    /// Frobenius distance between the projectors of two subalgebras.
    pub fn distance(&self, other: &Subalgebra) -> f64 {
        linalg::subspace_distance(&self.basis, &other.basis)
    }

    /// Subspace containment: every basis vector of `other` lies in self.
    pub fn contains(&self, other: &Subalgebra, tol: f64) -> bool {
        let p = linalg::projector(&self.basis);
        for j in 0..other.basis.ncols() {
            let v = other.basis.column(j).into_owned();
            if (&p * &v - &v).norm() > tol {
                return false;
            }
        }
        true
    }
}

/// Coarse conjugacy invariant compared before any geometric search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub dim_total: usize,
    pub dim_k: usize,
    pub dim_p: usize,
    /// dim V^h.
    pub fixed_dim: usize,
    /// dim g − dim_total: the dimension of orbits with this isotropy.
    pub orbit_dim: usize,
}

/// Nullspace of ξ ↦ ξ·v: the isotropy subalgebra g_v, θ-split.
pub fn isotropy_algebra(group: &CompatibleGroup, v: &DVector<f64>) -> Subalgebra {
    isotropy_algebra_with_floor(group, v, 0.0)
}

/// Isotropy with an absolute singular-value floor on top of the relative
/// cutoff. Flow limits carry leftover coordinates of size ~√flow_tol in
/// nullcone directions (the residual is quadratic there), so classifying a
/// limit point passes a floor of that scale to recover the rank drop.
pub fn isotropy_algebra_with_floor(
    group: &CompatibleGroup,
    v: &DVector<f64>,
    abs_floor: f64,
) -> Subalgebra {
    let a = group.action_matrix(v);
    let ns = linalg::nullspace_cols_floor(&a, ISO_TOL_REL, abs_floor);
    Subalgebra::from_coeff_basis(group, ns)
}

/// The absolute floor used when reading isotropy off a flow limit.
pub fn limit_floor(flow_tol: f64, v: &DVector<f64>) -> f64 {
    3.0 * flow_tol.sqrt() * (1.0 + v.norm())
}

/// Joint fixed space V^h of the realized subalgebra, as orthonormal columns.
///
/// Component representatives that normalize h contribute group-level fixing
/// constraints (c − I rows).
pub fn fixed_space(group: &CompatibleGroup, h: &Subalgebra) -> DMatrix<f64> {
    let n = group.dim_v();
    let mats: Vec<DMatrix<f64>> = h
        .elements(group)
        .iter()
        .map(|e| group.realize(e))
        .collect();
    let mut extra: Vec<DMatrix<f64>> = Vec::new();
    for c in group.component_reps() {
        if ad_matrix_preserves(group, c, h) {
            extra.push(c - DMatrix::identity(n, n));
        }
    }
    let rows = (mats.len() + extra.len()) * n;
    if rows == 0 {
        return DMatrix::identity(n, n);
    }
    let mut stacked = DMatrix::zeros(rows, n);
    for (i, m) in mats.iter().chain(extra.iter()).enumerate() {
        stacked.view_mut((i * n, 0), (n, n)).copy_from(m);
    }
    linalg::nullspace_cols(&stacked, ISO_TOL_REL)
}

/// Coarse invariant of (the class of) h.
pub fn fingerprint(group: &CompatibleGroup, h: &Subalgebra) -> Fingerprint {
    Fingerprint {
        dim_total: h.dim_total(),
        dim_k: h.dim_k(),
        dim_p: h.dim_p(),
        fixed_dim: fixed_space(group, h).ncols(),
        orbit_dim: group.dim_g() - h.dim_total(),
    }
}

/// The coefficient matrix of Ad(k) on g for an orthogonal k preserving g.
pub fn ad_matrix(group: &CompatibleGroup, k: &DMatrix<f64>) -> DMatrix<f64> {
    let dim_g = group.dim_g();
    let mut out = DMatrix::zeros(dim_g, dim_g);
    for j in 0..dim_g {
        let conj = k * group.g_gen(j) * k.transpose();
        let (coeffs, _) = group.project_matrix(&conj);
        out.set_column(j, &coeffs.g_coeffs());
    }
    out
}

fn ad_matrix_preserves(group: &CompatibleGroup, k: &DMatrix<f64>, h: &Subalgebra) -> bool {
    if h.dim_total() == 0 {
        return true;
    }
    let ad = ad_matrix(group, k);
    let moved = &ad * h.basis();
    linalg::subspace_distance(&moved, h.basis()) < 1e-8
}

/// Does the orthogonal matrix `k` normalize h (Ad(k)h = h as a subspace)?
pub fn normalizes(group: &CompatibleGroup, k: &DMatrix<f64>, h: &Subalgebra) -> bool {
    ad_matrix_preserves(group, k, h)
}

#[derive(Debug, Clone, Copy)]
pub struct ConjugacyOptions {
    /// Distance below which subalgebras count as conjugate.
    pub conj_tol: f64,
    pub starts: usize,
    pub nm_iters: usize,
    pub seed: u64,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions {
            conj_tol: 1e-6,
            starts: 32,
            nm_iters: 220,
            seed: 0,
        }
    }
}

/// Outcome of a conjugacy search: a witness when the optimum fell below
/// `conj_tol`, otherwise the best distance found (inconclusive searches
/// report as not conjugate, with the distance attached).
#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyOutcome {
    pub witness: Option<KWitness>,
    pub distance: f64,
    /// Whether the fingerprint pre-filter already decided the answer.
    pub fingerprint_mismatch: bool,
}

impl ConjugacyOutcome {
    pub fn conjugate(&self) -> bool {
        self.witness.is_some()
    }
}

fn conjugacy_objective<'a>(
    group: &'a CompatibleGroup,
    h1: &'a Subalgebra,
    h2: &'a Subalgebra,
) -> impl Fn(&DMatrix<f64>) -> f64 + 'a {
    let realized1: Vec<DMatrix<f64>> = h1
        .elements(group)
        .iter()
        .map(|e| group.realize(e))
        .collect();
    let p2 = linalg::projector(h2.basis());
    move |k: &DMatrix<f64>| {
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(realized1.len());
        for m in &realized1 {
            let conj = k * m * k.transpose();
            let (coeffs, _) = group.project_matrix(&conj);
            cols.push(coeffs.g_coeffs());
        }
        let moved = linalg::from_columns(group.dim_g(), &cols);
        (linalg::projector(&moved) - &p2).norm()
    }
}

/// Conjugacy search over an arbitrary compact conjugator set (generators
/// plus discrete branches). No fingerprint pre-filter beyond dimensions:
/// callers that have finer invariants compare them first.
pub(crate) fn conjugacy_search_custom(
    group: &CompatibleGroup,
    h1: &Subalgebra,
    h2: &Subalgebra,
    opts: &ConjugacyOptions,
    gens: &[DMatrix<f64>],
    comp_reps: &[DMatrix<f64>],
    outer_reps: &[DMatrix<f64>],
) -> ConjugacyOutcome {
    if h1.dim_total() != h2.dim_total() {
        return ConjugacyOutcome {
            witness: None,
            distance: h1.distance(h2),
            fingerprint_mismatch: true,
        };
    }
    let obj = conjugacy_objective(group, h1, h2);
    // Quick exit at the identity (common when merging samples from one
    // stratum or comparing a subalgebra with itself).
    let eye = DMatrix::identity(group.dim_v(), group.dim_v());
    let d0 = obj(&eye);
    if d0 < opts.conj_tol {
        return ConjugacyOutcome {
            witness: Some(KWitness::identity(gens.len())),
            distance: d0,
            fingerprint_mismatch: false,
        };
    }
    let search = CompactSearch::new(group.dim_v(), gens.to_vec(), comp_reps, outer_reps);
    let sopts = SearchOptions {
        starts: opts.starts,
        nm_iters: opts.nm_iters,
        seed: opts.seed,
        early_exit: opts.conj_tol * 1e-3,
        polish_below: 1e-2,
    };
    let (w, dist) = search.minimize(obj, &sopts);
    ConjugacyOutcome {
        witness: (dist < opts.conj_tol).then_some(w),
        distance: dist,
        fingerprint_mismatch: false,
    }
}

fn conjugacy_search_impl(
    group: &CompatibleGroup,
    h1: &Subalgebra,
    h2: &Subalgebra,
    opts: &ConjugacyOptions,
    outer_reps: &[DMatrix<f64>],
) -> ConjugacyOutcome {
    if fingerprint(group, h1) != fingerprint(group, h2) {
        return ConjugacyOutcome {
            witness: None,
            distance: h1.distance(h2),
            fingerprint_mismatch: true,
        };
    }
    conjugacy_search_custom(
        group,
        h1,
        h2,
        opts,
        group.k_basis(),
        group.component_reps(),
        outer_reps,
    )
}

/// Multi-start search for k ∈ K with Ad(k)h1 = h2 (chordal subspace
/// distance under `conj_tol`). Fingerprints are compared first.
pub fn k_conjugacy_search(
    group: &CompatibleGroup,
    h1: &Subalgebra,
    h2: &Subalgebra,
    opts: &ConjugacyOptions,
) -> ConjugacyOutcome {
    conjugacy_search_impl(group, h1, h2, opts, &[])
}

/// Conjugacy search that may additionally pre-compose with the supplied
/// normalizer/outer representatives. This realizes identifications coming
/// from a larger ambient group (e.g. an element normalizing G without
/// belonging to it).
pub fn extended_conjugacy_search(
    group: &CompatibleGroup,
    h1: &Subalgebra,
    h2: &Subalgebra,
    opts: &ConjugacyOptions,
) -> ConjugacyOutcome {
    conjugacy_search_impl(group, h1, h2, opts, group.normalizer_reps())
}

/// Normalizer algebra n = {ξ ∈ g : [ξ, h] ⊆ h}, computed as the nullspace
/// of the induced map into g/h. Always contains h.
pub fn normalizer_algebra(group: &CompatibleGroup, h: &Subalgebra) -> Subalgebra {
    let dim_g = group.dim_g();
    if h.dim_total() == 0 || h.dim_total() == dim_g {
        return Subalgebra::full(group);
    }
    let h_elts = h.elements(group);
    let p_h = linalg::projector(h.basis());
    let into_quotient = DMatrix::identity(dim_g, dim_g) - p_h;
    let rows = h.dim_total() * dim_g;
    let mut l = DMatrix::zeros(rows, dim_g);
    for j in 0..dim_g {
        let xi = AlgebraElement::from_g_coeffs(
            &DVector::from_fn(dim_g, |i, _| if i == j { 1.0 } else { 0.0 }),
            group.dim_k(),
        );
        for (bi, hb) in h_elts.iter().enumerate() {
            let (br, _) = group.bracket_coeffs(&xi, hb);
            let reduced = &into_quotient * br.g_coeffs();
            l.view_mut((bi * dim_g, j), (dim_g, 1)).copy_from(&reduced);
        }
    }
    let ns = linalg::nullspace_cols(&l, ISO_TOL_REL);
    Subalgebra::from_coeff_basis(group, ns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{builtin, sl2r_to_coords};

    #[test]
    fn isotropy_of_origin_is_everything() {
        let g = builtin("so22").unwrap();
        let h = isotropy_algebra(&g, &DVector::zeros(4));
        assert_eq!(h.dim_total(), 6);
        assert!(h.theta_stable());
    }

    #[test]
    fn so22_isotropy_of_e1_has_dim_3() {
        let g = builtin("so22").unwrap();
        let v = DVector::from_row_slice(&[1., 0., 0., 0.]);
        let h = isotropy_algebra(&g, &v);
        assert_eq!(h.dim_total(), 3);
        assert!(h.theta_stable());
        assert_eq!((h.dim_k(), h.dim_p()), (1, 2));
    }

    /// Independent centralizer oracle for the sl2(R) adjoint action: solve
    /// [x, v] = 0 over 2x2 traceless x directly.
    fn sl2r_centralizer_dim(v_mat: &DMatrix<f64>) -> usize {
        // x = [[a, b], [c, -a]]; [x,v] = 0 is linear in (a,b,c).
        let mut rows: Vec<f64> = Vec::new();
        let basis = [
            DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]),
            DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]),
            DMatrix::from_row_slice(2, 2, &[0., 0., 1., 0.]),
        ];
        for b in &basis {
            let br = b * v_mat - v_mat * b;
            rows.extend_from_slice(&[br[(0, 0)], br[(0, 1)], br[(1, 0)], br[(1, 1)]]);
        }
        let a = DMatrix::from_fn(4, 3, |i, j| rows[j * 4 + i]);
        linalg::nullspace_cols(&a, 1e-10).ncols()
    }

    #[test]
    fn sl2r_isotropy_dims_match_centralizer_oracle() {
        let g = builtin("sl2r-adjoint").unwrap();
        let hyp = DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]);
        let rot = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
        for (m, want_k, want_p) in [(hyp, 0usize, 1usize), (rot, 1, 0)] {
            let v = sl2r_to_coords(&m);
            let h = isotropy_algebra(&g, &v);
            assert_eq!(h.dim_total(), 1);
            assert_eq!(h.dim_total(), sl2r_centralizer_dim(&m));
            assert_eq!((h.dim_k(), h.dim_p()), (want_k, want_p));
        }
    }

    #[test]
    fn fixed_space_of_zero_subalgebra_is_v() {
        let g = builtin("so11").unwrap();
        let h = Subalgebra::trivial(&g);
        assert_eq!(fixed_space(&g, &h).ncols(), 2);
    }

    #[test]
    fn so22_fixed_space_of_e1_isotropy_is_the_ray_line() {
        let g = builtin("so22").unwrap();
        let v = DVector::from_row_slice(&[1., 0., 0., 0.]);
        let h = isotropy_algebra(&g, &v);
        let fix = fixed_space(&g, &h);
        assert_eq!(fix.ncols(), 1);
        let dir = fix.column(0).into_owned();
        assert!((dir[0].abs() - 1.0).abs() < 1e-10);
        assert!(dir.rows(1, 3).norm() < 1e-10);
    }

    #[test]
    fn sl2r_fixed_space_of_split_cartan_is_cartan_line() {
        let g = builtin("sl2r-adjoint").unwrap();
        let hmat = DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]);
        let v = sl2r_to_coords(&hmat);
        let h = isotropy_algebra(&g, &v);
        let fix = fixed_space(&g, &h);
        assert_eq!(fix.ncols(), 1);
        // The fixed line is the diagonal Cartan itself.
        let dir = fix.column(0).into_owned();
        let vn = &v / v.norm();
        assert!((dir.dot(&vn).abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fingerprints_follow_isotropy_examples() {
        let g = builtin("so22").unwrap();
        let v = DVector::from_row_slice(&[1., 0., 0., 0.]);
        let h = isotropy_algebra(&g, &v);
        let fp = fingerprint(&g, &h);
        assert_eq!(
            fp,
            Fingerprint {
                dim_total: 3,
                dim_k: 1,
                dim_p: 2,
                fixed_dim: 1,
                orbit_dim: 3
            }
        );
    }

    #[test]
    fn conjugacy_of_equal_subalgebras_is_identity() {
        let g = builtin("so22").unwrap();
        let v = DVector::from_row_slice(&[1., 0., 0., 0.]);
        let h = isotropy_algebra(&g, &v);
        let out = k_conjugacy_search(&g, &h, &h, &ConjugacyOptions::default());
        let w = out.witness.expect("conjugate");
        assert!(w.is_identity(1e-12));
    }

    #[test]
    fn so22_ray_isotropies_not_conjugate_in_k() {
        // Fixed lines live in different factors and K preserves the factor
        // norms; oracle below scans the K-torus directly.
        let g = builtin("so22").unwrap();
        let h1 = isotropy_algebra(&g, &DVector::from_row_slice(&[1., 0., 0., 0.]));
        let h2 = isotropy_algebra(&g, &DVector::from_row_slice(&[0., 0., 1., 0.]));
        let out = k_conjugacy_search(&g, &h1, &h2, &ConjugacyOptions::default());
        assert!(!out.conjugate(), "distance {}", out.distance);
        assert!(out.distance > 1e-3);

        // Exhaustive scan oracle over the 2-torus of K (coarse grid).
        let obj = conjugacy_objective(&g, &h1, &h2);
        let mut best = f64::INFINITY;
        let n = 60;
        for i in 0..n {
            for j in 0..n {
                let t1 = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
                let t2 = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
                let k = g.exp_k(&DVector::from_row_slice(&[t1, t2]));
                best = best.min(obj(&k));
                for c in g.component_reps() {
                    best = best.min(obj(&(&k * c)));
                }
            }
        }
        assert!(best > 0.5, "torus scan minimum {best}");
    }

    #[test]
    fn so22_ray_isotropies_conjugate_via_outer_swap() {
        let g = builtin("so22").unwrap();
        let h1 = isotropy_algebra(&g, &DVector::from_row_slice(&[1., 0., 0., 0.]));
        let h2 = isotropy_algebra(&g, &DVector::from_row_slice(&[0., 0., 1., 0.]));
        let out = extended_conjugacy_search(&g, &h1, &h2, &ConjugacyOptions::default());
        assert!(out.conjugate(), "distance {}", out.distance);
        let w = out.witness.unwrap();
        assert!(w.outer > 0, "must use an outer representative");
    }

    #[test]
    fn sl2r_cartans_differ_already_by_fingerprint() {
        let g = builtin("sl2r-adjoint").unwrap();
        let split = isotropy_algebra(
            &g,
            &sl2r_to_coords(&DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])),
        );
        let compact = isotropy_algebra(
            &g,
            &sl2r_to_coords(&DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.])),
        );
        let out = k_conjugacy_search(&g, &split, &compact, &ConjugacyOptions::default());
        assert!(out.fingerprint_mismatch);
        assert!(!out.conjugate());
    }

    #[test]
    fn conjugacy_search_symmetric_up_to_inversion() {
        let g = builtin("so22").unwrap();
        let h1 = isotropy_algebra(&g, &DVector::from_row_slice(&[1., 0., 0., 0.]));
        // Conjugate h1 by a K element to get a genuinely different h2.
        let k = g.exp_k(&DVector::from_row_slice(&[0.7, -0.4]));
        let ad = ad_matrix(&g, &k);
        let moved = crate::linalg::column_space(&(&ad * h1.basis()), 1e-10);
        let h2 = Subalgebra::from_coeff_basis(&g, moved);
        let o12 = k_conjugacy_search(&g, &h1, &h2, &ConjugacyOptions::default());
        let o21 = k_conjugacy_search(&g, &h2, &h1, &ConjugacyOptions::default());
        assert!(o12.conjugate() && o21.conjugate());
    }

    #[test]
    fn normalizer_of_full_algebra_is_full() {
        let g = builtin("so22").unwrap();
        let n = normalizer_algebra(&g, &Subalgebra::full(&g));
        assert_eq!(n.dim_total(), 6);
        let g2 = builtin("so11").unwrap();
        let n2 = normalizer_algebra(&g2, &Subalgebra::trivial(&g2));
        assert_eq!(n2.dim_total(), 1);
    }

    #[test]
    fn sl2r_split_cartan_is_self_normalizing() {
        // Direct 3x3 linear solve backs this: the torus algebra normalizes
        // only itself at algebra level.
        let g = builtin("sl2r-adjoint").unwrap();
        let h = isotropy_algebra(
            &g,
            &sl2r_to_coords(&DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])),
        );
        let n = normalizer_algebra(&g, &h);
        assert_eq!(n.dim_total(), 1);
        assert!(n.contains(&h, 1e-9));
        // Bracket closure of the result.
        let elts = n.elements(&g);
        for a in &elts {
            for b in &elts {
                let (br, resid) = g.bracket_coeffs(a, b);
                assert!(resid < 1e-10);
                let as_vec = br.g_coeffs();
                let p = linalg::projector(n.basis());
                assert!((&p * &as_vec - &as_vec).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn ad_equivariance_of_isotropy() {
        let g = builtin("so22").unwrap();
        let v = DVector::from_row_slice(&[0.9, 0.2, 0.1, -0.3]);
        let k = g.exp_k(&DVector::from_row_slice(&[0.35, -1.2]));
        let hv = isotropy_algebra(&g, &v);
        let hkv = isotropy_algebra(&g, &(&k * &v));
        let ad = ad_matrix(&g, &k);
        let moved = crate::linalg::column_space(&(&ad * hv.basis()), 1e-10);
        assert!(linalg::subspace_distance(&moved, hkv.basis()) < 1e-8);
    }
}
