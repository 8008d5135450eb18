//! Slice models at minimal vectors and splitting numbers.
//!
//! At a minimal vector x the tangent space splits as g·x ⊕ W with W a
//! G_x-invariant complement; since the isotropy algebra is θ-stable there,
//! the Euclidean orthocomplement of the orbit tangent already solves the
//! invariant-complement problem (it commutes with every g_x generator),
//! and the residual of that commutation is checked rather than assumed.
//! The splitting number at x counts the open G_x-isotropy strata of the
//! compressed action on W; strata of a linear representation are cones, so
//! the whole of W stands in for a small slice neighborhood.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::CompatibleGroup;
use crate::error::{CoreError, Result};
use crate::isotropy::{self, Fingerprint, Subalgebra};
use crate::kempfness::{self, FlowStatus};
use crate::linalg;
use crate::sample;
use crate::strata::{merge_items, CatalogOptions, MergeContext, MergeItem, StratumCatalog};

/// Options for slice construction and splitting-number sampling.
#[derive(Debug, Clone, Copy)]
pub struct SliceOptions {
    pub catalog: CatalogOptions,
    /// Invariance residual allowed for the complement (and compression
    /// bracket checks).
    pub slice_tol: f64,
    /// Sphere samples drawn in W for the slice stratification.
    pub slice_samples: usize,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions {
            catalog: CatalogOptions::default(),
            slice_tol: 1e-7,
            slice_samples: 400,
        }
    }
}

/// The slice data (G_x, W, compressed action) at a minimal vector.
#[derive(Debug, Clone)]
pub struct SliceModel {
    pub base: DVector<f64>,
    /// Orthonormal basis of g·x ⊆ V.
    pub orbit_tangent: DMatrix<f64>,
    /// Orthonormal basis of W, the invariant complement.
    pub complement: DMatrix<f64>,
    /// Isotropy subalgebra g_x (θ-stable at a minimal base).
    pub gx: Subalgebra,
    /// g-coefficient columns of the g_x basis used for compressions
    /// (k-part columns first).
    gx_cols: DMatrix<f64>,
    gx_dim_k: usize,
    /// Compressions of the g_x basis matrices to W, aligned with `gx_cols`.
    pub slice_mats: Vec<DMatrix<f64>>,
    /// Component representatives of K fixing the base, compressed to W.
    pub comp_reps_w: Vec<DMatrix<f64>>,
    /// Normalizer/outer representatives fixing the base, compressed to W.
    pub norm_reps_w: Vec<DMatrix<f64>>,
    /// Largest orbit-tangent component of g_x·W observed.
    pub invariance_residual: f64,
}

impl SliceModel {
    pub fn dim_w(&self) -> usize {
        self.complement.ncols()
    }

    /// Realized k-part generators of g_x (matrices on V), for conjugacy
    /// searches over K_x.
    pub fn kx_mats(&self, group: &CompatibleGroup) -> Vec<DMatrix<f64>> {
        self.gx
            .k_part(group)
            .iter()
            .map(|e| group.realize(e))
            .collect()
    }

    /// Compressed p-part generators (flow directions inside W).
    pub fn slice_p_mats(&self) -> Vec<DMatrix<f64>> {
        self.slice_mats[self.gx_dim_k..].to_vec()
    }
}

/// Build the slice model at a minimal vector x.
pub fn build_slice_model(
    group: &CompatibleGroup,
    x: &DVector<f64>,
    opts: &SliceOptions,
) -> Result<SliceModel> {
    let flow_tol = opts.catalog.flow.flow_tol;
    let residual = kempfness::gradient_map(group, x).norm();
    if residual > flow_tol {
        return Err(CoreError::NotMinimal {
            residual,
            tol: flow_tol,
        });
    }
    let n = group.dim_v();
    let action = group.action_matrix(x);
    let orbit_tangent = linalg::column_space(&action, isotropy::ISO_TOL_REL);
    let complement = if orbit_tangent.ncols() == 0 {
        DMatrix::identity(n, n)
    } else {
        linalg::nullspace_cols(&orbit_tangent.transpose(), isotropy::ISO_TOL_REL)
    };
    let gx = isotropy::isotropy_algebra(group, x);

    // g_x basis columns, k-part first, so compressed flow directions are
    // exactly the trailing p-part.
    let k_elems = gx.k_part(group);
    let p_elems = gx.p_part(group);
    let gx_dim_k = k_elems.len();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut slice_mats = Vec::new();
    let mut invariance_residual: f64 = 0.0;
    let w = &complement;
    for e in k_elems.iter().chain(p_elems.iter()) {
        cols.push(e.g_coeffs());
        let realized = group.realize(e);
        // W-invariance: the orbit-tangent component of h·W must vanish.
        if orbit_tangent.ncols() > 0 && w.ncols() > 0 {
            let hw = &realized * w;
            let leak = orbit_tangent.transpose() * &hw;
            invariance_residual = invariance_residual.max(leak.norm());
        }
        slice_mats.push(w.transpose() * &realized * w);
    }
    if invariance_residual > opts.slice_tol {
        return Err(CoreError::NoInvariantComplement {
            residual: invariance_residual,
            tol: opts.slice_tol,
        });
    }

    let fixes_base = |c: &DMatrix<f64>| (c * x - x).norm() <= 1e-8 * (1.0 + x.norm());
    let compress_rep = |c: &DMatrix<f64>| -> Option<DMatrix<f64>> {
        let cw = w.transpose() * c * w;
        let orth = (&cw.transpose() * &cw - DMatrix::identity(w.ncols(), w.ncols())).norm();
        (orth < 1e-8 * (1.0 + w.ncols() as f64)).then_some(cw)
    };
    let comp_reps_w: Vec<DMatrix<f64>> = group
        .component_reps()
        .iter()
        .filter(|c| fixes_base(c))
        .filter_map(compress_rep)
        .collect();
    let norm_reps_w: Vec<DMatrix<f64>> = group
        .normalizer_reps()
        .iter()
        .filter(|c| fixes_base(c))
        .filter_map(compress_rep)
        .collect();

    Ok(SliceModel {
        base: x.clone(),
        orbit_tangent,
        complement,
        gx,
        gx_cols: linalg::from_columns(group.dim_g(), &cols),
        gx_dim_k,
        slice_mats,
        comp_reps_w,
        norm_reps_w,
        invariance_residual,
    })
}

/// One G_x-isotropy stratum of the slice, with its isotropy lifted back to
/// a subalgebra of g.
#[derive(Debug, Clone)]
pub struct SliceStratum {
    pub rep: Subalgebra,
    pub fingerprint: Fingerprint,
    pub is_open: bool,
    pub is_nullcone_stratum: bool,
    pub count: usize,
    pub fraction: f64,
}

/// Splitting number with its evidence catalog.
#[derive(Debug, Clone)]
pub struct SplitEvidence {
    /// Number of open G_x-isotropy strata in the slice.
    pub n: usize,
    /// The minimal vector at which the slice was taken.
    pub base: Vec<f64>,
    pub dim_w: usize,
    pub strata: Vec<SliceStratum>,
    /// Raw per-sample statistics of the slice stratification.
    pub classified: usize,
    pub ambiguous: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SliceDims {
    pub orbit: usize,
    pub w: usize,
}

/// Stratify the compressed G_x-action on W over sphere samples and lift
/// the per-stratum isotropies into g.
pub(crate) fn slice_catalog(
    group: &CompatibleGroup,
    model: &SliceModel,
    opts: &SliceOptions,
    seed: u64,
) -> StratumCatalog {
    let w_dim = model.dim_w();
    let dim_gx = model.gx.dim_total();
    let p_mats = model.slice_p_mats();
    let flow_opts = opts.catalog.flow;

    let mut rng = sample::rng(seed, 0x51);
    let samples: Vec<DVector<f64>> = (0..opts.slice_samples)
        .map(|_| sample::unit_sphere(&mut rng, w_dim))
        .collect();

    // Classify in W: flow along compressed p-directions, then read the
    // isotropy inside g_x and lift it to g.
    let classify = |wv: &DVector<f64>| -> crate::error::Result<MergeItem> {
        let flow = kempfness::flow_with(&p_mats, wv, &flow_opts)?;
        let rep_point = flow.closed_orbit_representative(&flow_opts);
        let mut act = DMatrix::zeros(w_dim, dim_gx);
        for (j, s) in model.slice_mats.iter().enumerate() {
            act.set_column(j, &(s * &rep_point));
        }
        let floor = isotropy::limit_floor(flow_opts.flow_tol, &rep_point);
        let ns = linalg::nullspace_cols_floor(&act, isotropy::ISO_TOL_REL, floor);
        let lifted_cols = &model.gx_cols * &ns;
        let lifted = Subalgebra::from_coeff_basis(group, lifted_cols);
        // Slice-level fingerprint: fixed dimension measured inside W.
        let fixed_dim = fixed_dim_in_w(&model.slice_mats, &ns, w_dim);
        let fingerprint = Fingerprint {
            dim_total: lifted.dim_total(),
            dim_k: lifted.dim_k(),
            dim_p: lifted.dim_p(),
            fixed_dim,
            orbit_dim: dim_gx - lifted.dim_total(),
        };
        let wall_band = flow.f_limit > flow.null_tol(&flow_opts)
            && flow.f_limit <= opts.catalog.wall_tol * flow.f_start;
        Ok(MergeItem {
            isotropy: lifted,
            fingerprint,
            in_nullcone: flow.in_nullcone(&flow_opts),
            ambiguous: flow.status != FlowStatus::Minimal || wall_band,
            f_limit: flow.f_limit,
            residual: flow.residual,
            failed: false,
        })
    };

    let items: Vec<MergeItem> = samples
        .par_iter()
        .map(|wv| {
            classify(wv).unwrap_or_else(|_| MergeItem {
                isotropy: Subalgebra::trivial(group),
                fingerprint: Fingerprint {
                    dim_total: 0,
                    dim_k: 0,
                    dim_p: 0,
                    fixed_dim: 0,
                    orbit_dim: 0,
                },
                in_nullcone: false,
                ambiguous: false,
                f_limit: f64::NAN,
                residual: f64::NAN,
                failed: true,
            })
        })
        .collect();

    // Anchor: the stratum of the full isotropy (the origin of W).
    let anchor_rep = Subalgebra::from_coeff_basis(group, model.gx_cols.clone());
    let anchor_fixed = fixed_dim_in_w(
        &model.slice_mats,
        &DMatrix::identity(dim_gx, dim_gx),
        w_dim,
    );
    let anchor_fp = Fingerprint {
        dim_total: anchor_rep.dim_total(),
        dim_k: anchor_rep.dim_k(),
        dim_p: anchor_rep.dim_p(),
        fixed_dim: anchor_fixed,
        orbit_dim: 0,
    };

    // Merge under K_x: the identity component of the isotropy's compact
    // part plus any inherited discrete components.
    let mc = MergeContext {
        group,
        gens: model.kx_mats(group),
        comp_reps: group
            .component_reps()
            .iter()
            .filter(|c| (*c * &model.base - &model.base).norm() <= 1e-8 * (1.0 + model.base.norm()))
            .cloned()
            .collect(),
        conj: opts.catalog.conj,
    };
    merge_items(
        &items,
        &mc,
        Some((anchor_rep, anchor_fp)),
        opts.catalog.open_fraction_threshold,
        seed,
    )
}

/// Joint fixed dimension inside W of the g_x-coefficient columns `cols`.
fn fixed_dim_in_w(slice_mats: &[DMatrix<f64>], cols: &DMatrix<f64>, w_dim: usize) -> usize {
    if cols.ncols() == 0 || slice_mats.is_empty() {
        return w_dim;
    }
    let mut stack = DMatrix::zeros(cols.ncols() * w_dim, w_dim);
    for j in 0..cols.ncols() {
        let mut mat = DMatrix::zeros(w_dim, w_dim);
        for (i, s) in slice_mats.iter().enumerate() {
            mat += s * cols[(i, j)];
        }
        stack.view_mut((j * w_dim, 0), (w_dim, w_dim)).copy_from(&mat);
    }
    linalg::nullspace_cols(&stack, isotropy::ISO_TOL_REL).ncols()
}

/// The splitting number n(x): the count of open G_x-isotropy strata in the
/// slice at the minimal vector of x's fiber. Points off the minimal set
/// are flowed there first.
pub fn splitting_number(
    group: &CompatibleGroup,
    x: &DVector<f64>,
    opts: &SliceOptions,
) -> Result<SplitEvidence> {
    let flow_opts = opts.catalog.flow;
    let flow = kempfness::flow_to_minimal(group, x, &flow_opts)?;
    if flow.status != FlowStatus::Minimal {
        return Err(CoreError::FlowFailed(format!(
            "could not reach a minimal vector: status {:?}, residual {:.3e}",
            flow.status, flow.residual
        )));
    }
    let base = flow.closed_orbit_representative(&flow_opts);
    let model = build_slice_model(group, &base, opts)?;
    if model.dim_w() == 0 {
        // The slice is a single point: one stratum, open in the slice.
        return Ok(SplitEvidence {
            n: 1,
            base: base.as_slice().to_vec(),
            dim_w: 0,
            strata: Vec::new(),
            classified: 0,
            ambiguous: 0,
            failed: 0,
        });
    }
    let catalog = slice_catalog(group, &model, opts, opts.catalog.seed);
    let strata: Vec<SliceStratum> = catalog
        .entries
        .iter()
        .map(|e| SliceStratum {
            rep: e.rep.clone(),
            fingerprint: e.fingerprint,
            is_open: e.is_open,
            is_nullcone_stratum: e.is_nullcone_stratum,
            count: e.count,
            fraction: e.fraction,
        })
        .collect();
    let n = strata.iter().filter(|s| s.is_open).count();
    Ok(SplitEvidence {
        n,
        base: base.as_slice().to_vec(),
        dim_w: model.dim_w(),
        strata,
        classified: catalog.classified,
        ambiguous: catalog.ambiguous,
        failed: catalog.failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{builtin, sl2r_to_coords};

    #[test]
    fn slice_at_origin_is_whole_space() {
        let g = builtin("so22").unwrap();
        let model = build_slice_model(&g, &DVector::zeros(4), &SliceOptions::default()).unwrap();
        assert_eq!(model.orbit_tangent.ncols(), 0);
        assert_eq!(model.dim_w(), 4);
        assert_eq!(model.gx.dim_total(), 6);
        assert_eq!(model.slice_mats.len(), 6);
        // Compression at W = V is the representation itself.
        for (j, e) in model
            .gx
            .k_part(&g)
            .iter()
            .chain(model.gx.p_part(&g).iter())
            .enumerate()
        {
            let direct = g.realize(e);
            let moved = &model.complement * &model.slice_mats[j] * model.complement.transpose();
            assert!((direct - moved).norm() < 1e-12);
        }
    }

    #[test]
    fn so22_slice_at_ray_point() {
        // Orbit tangent dimension 3, slice line inside the fixed space.
        let g = builtin("so22").unwrap();
        let x = DVector::from_row_slice(&[1., 0., 0., 0.]);
        let model = build_slice_model(&g, &x, &SliceOptions::default()).unwrap();
        assert_eq!(model.orbit_tangent.ncols(), 3);
        assert_eq!(model.dim_w(), 1);
        let fix = isotropy::fixed_space(&g, &model.gx);
        let dir = model.complement.column(0).into_owned();
        let proj = &fix * (fix.transpose() * &dir);
        assert!((proj - &dir).norm() < 1e-9, "W must lie in the fixed space");
    }

    #[test]
    fn sl2r_slice_at_hyperbolic_point() {
        let g = builtin("sl2r-adjoint").unwrap();
        let x = sl2r_to_coords(&nalgebra::DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]));
        let model = build_slice_model(&g, &x, &SliceOptions::default()).unwrap();
        assert_eq!(model.orbit_tangent.ncols(), 2);
        assert_eq!(model.dim_w(), 1);
        // The slice line is the Cartan line through x.
        let dir = model.complement.column(0).into_owned();
        let xn = &x / x.norm();
        assert!((dir.dot(&xn).abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_minimal_base_is_rejected() {
        let g = builtin("so11").unwrap();
        let x = DVector::from_row_slice(&[2., 1.]);
        match build_slice_model(&g, &x, &SliceOptions::default()) {
            Err(CoreError::NotMinimal { .. }) => {}
            other => panic!("expected NotMinimal, got {other:?}"),
        }
    }

    #[test]
    fn compression_respects_brackets() {
        let g = builtin("so22").unwrap();
        let x = DVector::from_row_slice(&[1., 0., 0., 0.]);
        let model = build_slice_model(&g, &x, &SliceOptions::default()).unwrap();
        let elems: Vec<_> = model
            .gx
            .k_part(&g)
            .into_iter()
            .chain(model.gx.p_part(&g))
            .collect();
        let w = &model.complement;
        for a in &elems {
            for b in &elems {
                let br = g.bracket(a, b);
                let compressed_br = w.transpose() * &br * w;
                let ma = w.transpose() * g.realize(a) * w;
                let mb = w.transpose() * g.realize(b) * w;
                let commutator = &ma * &mb - &mb * &ma;
                assert!((compressed_br - commutator).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn splitting_number_so22_origin_is_two() {
        let g = builtin("so22").unwrap();
        let ev = splitting_number(&g, &DVector::zeros(4), &SliceOptions::default()).unwrap();
        assert_eq!(ev.n, 2, "strata: {:?}", ev.strata.len());
        assert_eq!(ev.dim_w, 4);
    }

    #[test]
    fn splitting_number_open_stratum_is_one() {
        let g = builtin("so22").unwrap();
        // Not minimal: flows into the fiber's minimal vector first.
        let v = DVector::from_row_slice(&[1.1, 0.4, 0.2, -0.3]);
        let ev = splitting_number(&g, &v, &SliceOptions::default()).unwrap();
        assert_eq!(ev.n, 1);
        assert_eq!(ev.dim_w, 1);
    }

    #[test]
    fn splitting_number_so11_origin_is_one() {
        // Two wedges share the trivial isotropy, hence one stratum.
        let g = builtin("so11").unwrap();
        let ev = splitting_number(&g, &DVector::zeros(2), &SliceOptions::default()).unwrap();
        assert_eq!(ev.n, 1);
    }

    #[test]
    fn splitting_number_invariant_under_base_k_move() {
        let g = builtin("sl2c-adjoint").unwrap();
        let x = crate::builtin::sl2c_to_coords(&nalgebra::DMatrix::from_fn(2, 2, |i, j| {
            use nalgebra::Complex;
            match (i, j) {
                (0, 0) => Complex::new(0.8, 0.3),
                (1, 1) => Complex::new(-0.8, -0.3),
                _ => Complex::new(0.0, 0.0),
            }
        }));
        let n0 = splitting_number(&g, &x, &SliceOptions::default()).unwrap().n;
        let k = g.exp_k(&DVector::from_row_slice(&[0.4, -0.9, 0.2]));
        let n1 = splitting_number(&g, &(&k * &x), &SliceOptions::default())
            .unwrap()
            .n;
        assert_eq!(n0, n1);
        assert_eq!(n0, 1);
    }

    #[test]
    fn transversality_witness() {
        // For g = exp(xi) with a component off g_x, g·(x+s) leaves x + W.
        let g = builtin("so22").unwrap();
        let x = DVector::from_row_slice(&[1., 0., 0., 0.]);
        let model = build_slice_model(&g, &x, &SliceOptions::default()).unwrap();
        let w = &model.complement;
        let s = w.column(0) * 0.05;
        let base_plus = &x + &s;
        let p_gx = linalg::projector(model.gx.basis());
        use crate::algebra::AlgebraElement;
        let mut rng = sample::rng(31, 9);
        let mut tried = 0;
        for _ in 0..12 {
            let coeffs = sample::gaussian_vector(&mut rng, g.dim_g());
            // Remove the g_x part, keep a small transverse direction.
            let transverse = &coeffs - &p_gx * &coeffs;
            if transverse.norm() < 1e-3 {
                continue;
            }
            let xi = AlgebraElement::from_g_coeffs(
                &(&transverse / transverse.norm() * 0.05),
                g.dim_k(),
            );
            let moved = g.exp_action(&xi, 1.0, &base_plus);
            // Distance from the affine slice x + W.
            let delta = &moved - &x;
            let in_w = w * (w.transpose() * &delta);
            let off = (&delta - &in_w).norm();
            assert!(
                off > 1e-6,
                "transverse move of size 0.05 stayed in the slice (off = {off:.3e})"
            );
            tried += 1;
        }
        assert!(tried > 0);
    }

    #[test]
    fn nullcone_decomposition_of_fixed_stratum() {
        // so(1,1) ⊕ trivial line on R^3: V^G is the third axis. Samples in
        // the full-isotropy stratum decompose as fixed part + nullcone
        // part: the component off V^G flows to zero.
        let mut p = DMatrix::zeros(3, 3);
        p[(0, 1)] = 1.0;
        p[(1, 0)] = 1.0;
        let g = crate::algebra::GroupSpec::new("so11-plus-line", 3)
            .with_p(vec![p])
            .build()
            .unwrap();
        let opts = SliceOptions::default();
        let flow_opts = opts.catalog.flow;
        let fix = isotropy::fixed_space(&g, &Subalgebra::full(&g));
        assert_eq!(fix.ncols(), 1);
        // The stratum is {v1 = ±v2} (fixed axis plus lightlike part), a
        // measure-zero wall: construct its points directly.
        let mut rng = sample::rng(7, 3);
        let mut checked = 0;
        for _ in 0..12 {
            let a = sample::normal(&mut rng);
            let c = sample::normal(&mut rng);
            let sign = if sample::normal(&mut rng) > 0.0 { 1.0 } else { -1.0 };
            let v = DVector::from_row_slice(&[a, sign * a, c]);
            let pc = crate::strata::classify_point(&g, &v, &opts.catalog).unwrap();
            assert_eq!(
                pc.isotropy.dim_total(),
                g.dim_g(),
                "wall point must land in the full-isotropy stratum"
            );
            let fixed_part = &fix * (fix.transpose() * &v);
            let rest = &v - &fixed_part;
            let flow = kempfness::flow_to_minimal(&g, &rest, &flow_opts).unwrap();
            assert!(
                flow.in_nullcone(&flow_opts),
                "non-fixed part must flow into the nullcone, f = {}",
                flow.f_limit
            );
            checked += 1;
        }
        assert!(checked > 0);
    }
}
