//! Validated data model for compatible matrix groups.
//!
//! A group G = K exp(p) is stored through a matrix realization of its Lie
//! algebra g = k ⊕ p inside gl(V): a list of skew-symmetric generators for
//! k and symmetric generators for p, with the Cartan involution θ(ξ) = −ξᵀ
//! and K acting orthogonally on V. Finitely many discrete representatives
//! (components of K, and optional normalizer elements used by quotient
//! bookkeeping) complete the description.
//!
//! Complex representations are handled by realification before they reach
//! this module: skew-Hermitian/Hermitian become skew-symmetric/symmetric
//! and the Hermitian inner product becomes its real part.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{CoreError, Result, StructureAxiom};
use crate::linalg;

/// Raw description of a compatible group, as ingested from a config file or
/// assembled in code. `build` validates the structural axioms and produces
/// a [`CompatibleGroup`].
#[derive(Debug, Clone)]
pub struct GroupSpec {
    pub name: String,
    pub dim_v: usize,
    pub k_basis: Vec<DMatrix<f64>>,
    pub p_basis: Vec<DMatrix<f64>>,
    /// Coset representatives of the non-identity components of K.
    pub component_reps: Vec<DMatrix<f64>>,
    /// Discrete normalizer/outer representatives consumed by quotient
    /// clustering; orthogonal matrices whose conjugation preserves span(k)
    /// and span(p). They need not lie in G.
    pub normalizer_reps: Vec<DMatrix<f64>>,
    pub structure_tol: f64,
}

impl GroupSpec {
    pub fn new(name: impl Into<String>, dim_v: usize) -> Self {
        GroupSpec {
            name: name.into(),
            dim_v,
            k_basis: Vec::new(),
            p_basis: Vec::new(),
            component_reps: Vec::new(),
            normalizer_reps: Vec::new(),
            structure_tol: 1e-10,
        }
    }

    pub fn with_k(mut self, k: Vec<DMatrix<f64>>) -> Self {
        self.k_basis = k;
        self
    }

    pub fn with_p(mut self, p: Vec<DMatrix<f64>>) -> Self {
        self.p_basis = p;
        self
    }

    pub fn with_component_reps(mut self, reps: Vec<DMatrix<f64>>) -> Self {
        self.component_reps = reps;
        self
    }

    pub fn with_normalizer_reps(mut self, reps: Vec<DMatrix<f64>>) -> Self {
        self.normalizer_reps = reps;
        self
    }

    pub fn build(self) -> Result<CompatibleGroup> {
        build_group(self)
    }
}

/// An element ξ = Σ cᵏᵢ kᵢ + Σ cᵖⱼ pⱼ of g, stored by coefficients over the
/// group's orthonormalized bases.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub coeffs_k: DVector<f64>,
    pub coeffs_p: DVector<f64>,
}

impl AlgebraElement {
    pub fn zero(dim_k: usize, dim_p: usize) -> Self {
        AlgebraElement {
            coeffs_k: DVector::zeros(dim_k),
            coeffs_p: DVector::zeros(dim_p),
        }
    }

    pub fn from_k(coeffs_k: DVector<f64>, dim_p: usize) -> Self {
        AlgebraElement {
            coeffs_k,
            coeffs_p: DVector::zeros(dim_p),
        }
    }

    pub fn from_p(dim_k: usize, coeffs_p: DVector<f64>) -> Self {
        AlgebraElement {
            coeffs_k: DVector::zeros(dim_k),
            coeffs_p,
        }
    }

    /// Combined coefficient vector, k-part first.
    pub fn g_coeffs(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.coeffs_k.len() + self.coeffs_p.len());
        v.rows_mut(0, self.coeffs_k.len()).copy_from(&self.coeffs_k);
        v.rows_mut(self.coeffs_k.len(), self.coeffs_p.len())
            .copy_from(&self.coeffs_p);
        v
    }

    pub fn from_g_coeffs(c: &DVector<f64>, dim_k: usize) -> Self {
        AlgebraElement {
            coeffs_k: c.rows(0, dim_k).into_owned(),
            coeffs_p: c.rows(dim_k, c.len() - dim_k).into_owned(),
        }
    }

    /// Cartan involution on coefficients: fixes k, negates p.
    pub fn theta(&self) -> Self {
        AlgebraElement {
            coeffs_k: self.coeffs_k.clone(),
            coeffs_p: -&self.coeffs_p,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.coeffs_k.norm_squared() + self.coeffs_p.norm_squared()).sqrt()
    }
}

/// Largest per-check residual observed while validating a group.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StructureResiduals {
    pub grading: f64,
    pub bracket: f64,
    pub reps: f64,
}

impl StructureResiduals {
    pub fn worst(&self) -> f64 {
        self.grading.max(self.bracket).max(self.reps)
    }
}

/// A validated matrix realization of a real reductive group G = K exp(p)
/// acting on V = R^dim_v.
///
/// The stored bases are orthonormal for the trace inner product
/// ⟨A,B⟩ = tr(ABᵀ); raw input bases are orthonormalized during `build`.
/// All data is immutable after construction and every operation is a pure
/// function, so values can be shared freely across worker threads.
#[derive(Debug, Clone)]
pub struct CompatibleGroup {
    name: String,
    dim_v: usize,
    k_basis: Vec<DMatrix<f64>>,
    p_basis: Vec<DMatrix<f64>>,
    component_reps: Vec<DMatrix<f64>>,
    normalizer_reps: Vec<DMatrix<f64>>,
    structure_tol: f64,
    residuals: StructureResiduals,
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::EmptyResult(format!("non-finite entry in {what}")));
    }
    Ok(())
}

fn build_group(spec: GroupSpec) -> Result<CompatibleGroup> {
    let n = spec.dim_v;
    let tol = spec.structure_tol;
    let mut residuals = StructureResiduals::default();

    for (label, list) in [("k_basis", &spec.k_basis), ("p_basis", &spec.p_basis)] {
        for (i, m) in list.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(CoreError::DimensionMismatch {
                    what: format!("{label}[{i}]"),
                    got: m.nrows().max(m.ncols()),
                    expected: n,
                });
            }
            check_finite(m, label)?;
        }
    }

    // θ-grading: k skew, p symmetric.
    for (i, m) in spec.k_basis.iter().enumerate() {
        let r = (m + m.transpose()).norm();
        residuals.grading = residuals.grading.max(r);
        if r > tol * (1.0 + m.norm()) {
            return Err(CoreError::StructureViolation {
                axiom: StructureAxiom::KSkew,
                i,
                j: i,
                residual: r,
            });
        }
    }
    for (i, m) in spec.p_basis.iter().enumerate() {
        let r = (m - m.transpose()).norm();
        residuals.grading = residuals.grading.max(r);
        if r > tol * (1.0 + m.norm()) {
            return Err(CoreError::StructureViolation {
                axiom: StructureAxiom::PSymmetric,
                i,
                j: i,
                residual: r,
            });
        }
    }

    // Orthonormalize k and p separately (they are automatically orthogonal
    // to each other: skew ⟂ symmetric for the trace product).
    let k_vecs: Vec<DVector<f64>> = spec.k_basis.iter().map(linalg::vectorize).collect();
    let p_vecs: Vec<DVector<f64>> = spec.p_basis.iter().map(linalg::vectorize).collect();
    let k_onb = linalg::orthonormalize(&k_vecs, 1e-10);
    let p_onb = linalg::orthonormalize(&p_vecs, 1e-10);
    if k_onb.len() != spec.k_basis.len() || p_onb.len() != spec.p_basis.len() {
        return Err(CoreError::StructureViolation {
            axiom: StructureAxiom::LinearIndependence,
            i: k_onb.len(),
            j: p_onb.len(),
            residual: 0.0,
        });
    }
    let devec = |v: &DVector<f64>| DMatrix::from_column_slice(n, n, v.as_slice());
    let k_basis: Vec<DMatrix<f64>> = k_onb.iter().map(devec).collect();
    let p_basis: Vec<DMatrix<f64>> = p_onb.iter().map(devec).collect();

    let group = CompatibleGroup {
        name: spec.name,
        dim_v: n,
        k_basis,
        p_basis,
        component_reps: spec.component_reps,
        normalizer_reps: spec.normalizer_reps,
        structure_tol: tol,
        residuals,
    };
    group.validate_brackets_and_reps()
}

impl CompatibleGroup {
    fn validate_brackets_and_reps(mut self) -> Result<Self> {
        let tol = self.structure_tol;
        let mut res = self.residuals;

        // [k,k] ⊆ k, [k,p] ⊆ p, [p,p] ⊆ k.
        let pairs: [(&[DMatrix<f64>], &[DMatrix<f64>], bool); 3] = [
            (&self.k_basis, &self.k_basis, true),
            (&self.k_basis, &self.p_basis, false),
            (&self.p_basis, &self.p_basis, true),
        ];
        for (lhs, rhs, target_is_k) in pairs {
            for (i, a) in lhs.iter().enumerate() {
                for (j, b) in rhs.iter().enumerate() {
                    let br = a * b - b * a;
                    let r = self.span_residual(&br, target_is_k);
                    res.bracket = res.bracket.max(r);
                    if r > tol * (1.0 + a.norm() * b.norm()) {
                        return Err(CoreError::StructureViolation {
                            axiom: StructureAxiom::BracketClosure,
                            i,
                            j,
                            residual: r,
                        });
                    }
                }
            }
        }

        let n = self.dim_v;
        let reps: Vec<DMatrix<f64>> = self
            .component_reps
            .iter()
            .chain(self.normalizer_reps.iter())
            .cloned()
            .collect();
        for (i, c) in reps.iter().enumerate() {
            if c.nrows() != n || c.ncols() != n {
                return Err(CoreError::DimensionMismatch {
                    what: format!("rep[{i}]"),
                    got: c.nrows().max(c.ncols()),
                    expected: n,
                });
            }
            let r_orth = (c.transpose() * c - DMatrix::identity(n, n)).norm();
            res.reps = res.reps.max(r_orth);
            if r_orth > tol * (n as f64) {
                return Err(CoreError::StructureViolation {
                    axiom: StructureAxiom::RepOrthogonal,
                    i,
                    j: i,
                    residual: r_orth,
                });
            }
            for (j, (basis, is_k)) in [(&self.k_basis, true), (&self.p_basis, false)]
                .into_iter()
                .enumerate()
            {
                for m in basis.iter() {
                    let conj = c * m * c.transpose();
                    let r = self.span_residual(&conj, is_k);
                    res.reps = res.reps.max(r);
                    if r > tol * (1.0 + m.norm()) {
                        return Err(CoreError::StructureViolation {
                            axiom: StructureAxiom::RepAdInvariance,
                            i,
                            j,
                            residual: r,
                        });
                    }
                }
            }
        }

        self.residuals = res;
        Ok(self)
    }

    /// Distance of `m` from span(k) or span(p).
    fn span_residual(&self, m: &DMatrix<f64>, target_is_k: bool) -> f64 {
        let basis = if target_is_k { &self.k_basis } else { &self.p_basis };
        let mut rem = m.clone();
        for b in basis {
            let c = linalg::frob_dot(m, b);
            rem -= b * c;
        }
        rem.norm()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_k(&self) -> usize {
        self.k_basis.len()
    }

    pub fn dim_p(&self) -> usize {
        self.p_basis.len()
    }

    pub fn dim_g(&self) -> usize {
        self.dim_k() + self.dim_p()
    }

    pub fn structure_tol(&self) -> f64 {
        self.structure_tol
    }

    pub fn residuals(&self) -> StructureResiduals {
        self.residuals
    }

    /// Worst residual observed across all structure checks.
    pub fn worst_residual(&self) -> f64 {
        self.residuals.worst()
    }

    pub fn k_basis(&self) -> &[DMatrix<f64>] {
        &self.k_basis
    }

    pub fn p_basis(&self) -> &[DMatrix<f64>] {
        &self.p_basis
    }

    /// Generator i of g (k-part first, then p-part).
    pub fn g_gen(&self, i: usize) -> &DMatrix<f64> {
        if i < self.dim_k() {
            &self.k_basis[i]
        } else {
            &self.p_basis[i - self.dim_k()]
        }
    }

    pub fn component_reps(&self) -> &[DMatrix<f64>] {
        &self.component_reps
    }

    pub fn normalizer_reps(&self) -> &[DMatrix<f64>] {
        &self.normalizer_reps
    }

    /// Realize an algebra element as a dim_v × dim_v matrix.
    pub fn realize(&self, a: &AlgebraElement) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim_v, self.dim_v);
        for (c, b) in a.coeffs_k.iter().zip(&self.k_basis) {
            m += b * *c;
        }
        for (c, b) in a.coeffs_p.iter().zip(&self.p_basis) {
            m += b * *c;
        }
        m
    }

    /// Expand a matrix over the algebra basis; returns the coefficients and
    /// the residual left outside span(g).
    pub fn project_matrix(&self, m: &DMatrix<f64>) -> (AlgebraElement, f64) {
        let ck = DVector::from_fn(self.dim_k(), |i, _| linalg::frob_dot(m, &self.k_basis[i]));
        let cp = DVector::from_fn(self.dim_p(), |i, _| linalg::frob_dot(m, &self.p_basis[i]));
        let elt = AlgebraElement {
            coeffs_k: ck,
            coeffs_p: cp,
        };
        let resid = (m - self.realize(&elt)).norm();
        (elt, resid)
    }

    /// Matrix commutator of two realized elements.
    pub fn bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> DMatrix<f64> {
        let ma = self.realize(a);
        let mb = self.realize(b);
        &ma * &mb - &mb * &ma
    }

    /// Bracket expanded back over the basis, with the expansion residual.
    pub fn bracket_coeffs(&self, a: &AlgebraElement, b: &AlgebraElement) -> (AlgebraElement, f64) {
        self.project_matrix(&self.bracket(a, b))
    }

    /// Fundamental vector field: ξ_V(v) = ξ·v.
    pub fn act(&self, a: &AlgebraElement, v: &DVector<f64>) -> DVector<f64> {
        self.realize(a) * v
    }

    /// One-parameter flow exp(t·ξ)·v via the matrix exponential.
    pub fn exp_action(&self, a: &AlgebraElement, t: f64, v: &DVector<f64>) -> DVector<f64> {
        let m = self.realize(a) * t;
        m.exp() * v
    }

    /// exp(Σ θᵢ kᵢ): an element of the identity component of K.
    pub fn exp_k(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim_v, self.dim_v);
        for (c, b) in theta.iter().zip(&self.k_basis) {
            m += b * *c;
        }
        m.exp()
    }

    /// Matrix whose columns are Bᵢ·v over the g-basis (k-part first).
    pub fn action_matrix(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim_v, self.dim_g());
        for i in 0..self.dim_g() {
            m.set_column(i, &(self.g_gen(i) * v));
        }
        m
    }

    /// Realized matrices of the p-basis (used by flow code).
    pub(crate) fn p_mats(&self) -> &[DMatrix<f64>] {
        &self.p_basis
    }
}

/// Build a validated group from a raw description.
///
/// Reports the worst structure residual on success; on failure names the
/// violated axiom, the offending basis pair and the residual magnitude.
pub fn build(spec: GroupSpec) -> Result<CompatibleGroup> {
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn so11_spec() -> GroupSpec {
        GroupSpec::new("so11", 2).with_p(vec![DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])])
    }

    /// sl2(R) in its defining 2x2 realization: k = so(2), p = symmetric traceless.
    fn sl2_defining() -> CompatibleGroup {
        GroupSpec::new("sl2-defining", 2)
            .with_k(vec![DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.])])
            .with_p(vec![
                DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]),
                DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]),
            ])
            .build()
            .unwrap()
    }

    #[test]
    fn so11_builds_with_zero_residual() {
        let g = so11_spec().build().unwrap();
        assert_eq!(g.dim_k(), 0);
        assert_eq!(g.dim_p(), 1);
        assert_eq!(g.worst_residual(), 0.0);
    }

    #[test]
    fn non_symmetric_p_is_rejected() {
        let bad = GroupSpec::new("bad", 2)
            .with_p(vec![DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.])]);
        match bad.build() {
            Err(CoreError::StructureViolation { axiom, .. }) => {
                assert_eq!(axiom, StructureAxiom::PSymmetric)
            }
            other => panic!("expected structure violation, got {other:?}"),
        }
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let bad = GroupSpec::new("dep", 2).with_p(vec![
            DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]),
            DMatrix::from_row_slice(2, 2, &[2., 0., 0., -2.]),
        ]);
        match bad.build() {
            Err(CoreError::StructureViolation { axiom, .. }) => {
                assert_eq!(axiom, StructureAxiom::LinearIndependence)
            }
            other => panic!("expected linear dependence, got {other:?}"),
        }
    }

    #[test]
    fn bracket_antisymmetry() {
        let g = sl2_defining();
        let a = AlgebraElement::from_p(1, DVector::from_row_slice(&[0.3, -0.7]));
        let br = g.bracket(&a, &a);
        assert!(br.norm() < 1e-14);
    }

    #[test]
    fn sl2_e_f_bracket_is_h() {
        // e = [[0,1],[0,0]], f = [[0,0],[1,0]] expanded over the basis; the
        // commutator must come out as h = diag(1,-1) by hand multiplication.
        let g = sl2_defining();
        let e_mat = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let f_mat = DMatrix::from_row_slice(2, 2, &[0., 0., 1., 0.]);
        let (e, re) = g.project_matrix(&e_mat);
        let (f, rf) = g.project_matrix(&f_mat);
        assert!(re < 1e-14 && rf < 1e-14);
        let br = g.bracket(&e, &f);
        let h = DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]);
        assert!((br - h).norm() < 1e-14);
    }

    #[test]
    fn act_matches_matrix_product() {
        let g = so11_spec().build().unwrap();
        let xi = AlgebraElement::from_p(0, DVector::from_row_slice(&[2f64.sqrt()]));
        // realized xi = [[0,1],[1,0]] (basis normalization divides by sqrt2)
        let v = DVector::from_row_slice(&[1., 0.]);
        let out = g.act(&xi, &v);
        assert!((out - DVector::from_row_slice(&[0., 1.])).norm() < 1e-14);
        let zero = AlgebraElement::zero(0, 1);
        assert!(g.act(&zero, &v).norm() == 0.0);
    }

    #[test]
    fn act_is_derivative_of_exp_action() {
        let g = sl2_defining();
        let xi = AlgebraElement {
            coeffs_k: DVector::from_row_slice(&[0.4]),
            coeffs_p: DVector::from_row_slice(&[-0.3, 0.9]),
        };
        let v = DVector::from_row_slice(&[0.7, -1.2]);
        let t = 1e-6;
        let fd = (g.exp_action(&xi, t, &v) - &v) / t;
        let exact = g.act(&xi, &v);
        assert!((fd - exact).norm() < 1e-5);
    }

    #[test]
    fn exp_action_closed_form_cosh_sinh() {
        let g = so11_spec().build().unwrap();
        let xi = AlgebraElement::from_p(0, DVector::from_row_slice(&[2f64.sqrt()]));
        let v = DVector::from_row_slice(&[1., 0.]);
        for &t in &[0.0, 0.3, -1.7, 2.5] {
            let out = g.exp_action(&xi, t, &v);
            let expect = DVector::from_row_slice(&[t.cosh(), t.sinh()]);
            assert!((out - expect).norm() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn exp_action_group_property_and_inverse() {
        let g = sl2_defining();
        let xi = AlgebraElement {
            coeffs_k: DVector::from_row_slice(&[-0.8]),
            coeffs_p: DVector::from_row_slice(&[0.5, 0.2]),
        };
        let v = DVector::from_row_slice(&[1.5, 0.25]);
        let (s, t) = (0.6, -1.1);
        let a = g.exp_action(&xi, s + t, &v);
        let b = g.exp_action(&xi, s, &g.exp_action(&xi, t, &v));
        assert!((a - b).norm() < 1e-9);
        let back = g.exp_action(&xi, -t, &g.exp_action(&xi, t, &v));
        assert!((back - v).norm() < 1e-9);
    }

    #[test]
    fn k_flow_preserves_norm() {
        let g = sl2_defining();
        let xi = AlgebraElement::from_k(DVector::from_row_slice(&[1.3]), 2);
        let v = DVector::from_row_slice(&[0.3, 2.0]);
        for &t in &[0.5, -2.0, 7.0] {
            let out = g.exp_action(&xi, t, &v);
            assert!((out.norm() - v.norm()).abs() < 1e-10);
        }
    }
}
