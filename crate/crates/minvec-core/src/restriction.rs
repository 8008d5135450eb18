//! Numerical verification of the restriction map between quotient models.
//!
//! Quotients are never materialized as topological spaces. Points of
//! X//G are K-orbit representatives of minimal vectors; points of
//! cl(X^{<H>})//N_G(H) are N_K(H)-orbit representatives inside M_{n_p},
//! the zero fiber of the normalizer gradient map on the fixed space of H.
//! The verified laws, on sampled points with residuals attached:
//!
//! * zero fiber: M_{n_p} = cl(X^{<H>}) ∩ M_p (both inclusions);
//! * surjectivity: M_p = K · M_{n_p} (witnessed transports);
//! * fiber law: the fiber of the induced map over π(m) has exactly n(m)
//!   points, counted two independent ways — clustered K-transports of m
//!   into M_{n_p} (tagged by genuinely-outer representatives, which
//!   realize identifications from a larger ambient group), and open
//!   isotropy strata of the slice at m belonging to the class of H.
//!
//! When the stratification has several open classes and no dense one, the
//! run automatically restricts to the closure of the largest open class,
//! for which a dense stratum exists again.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::CompatibleGroup;
use crate::error::{CoreError, Result};
use crate::isotropy::{
    self, conjugacy_search_custom, ConjugacyOptions, Subalgebra,
};
use crate::kempfness::{self, FlowStatus};
use crate::ksearch::{closure_reps, CompactSearch, KWitness, SearchOptions};
use crate::linalg;
use crate::sample;
use crate::slice::{self, SliceOptions};
use crate::strata::{self, StratumCatalog};

#[derive(Debug, Clone, Copy)]
pub struct RestrictionOptions {
    pub slice: SliceOptions,
    /// Samples for the stratum catalog that locates H.
    pub catalog_samples: usize,
    /// Accepted fixed-space samples requested.
    pub xh_count: usize,
    /// Minimal vectors tested for surjectivity.
    pub surj_count: usize,
    /// Interior fiber points tested against splitting numbers.
    pub fiber_interior_count: usize,
    /// Success threshold for transport searches.
    pub surj_tol: f64,
    /// Subspace distance under which an isotropy counts as equal to H.
    pub subspace_tol: f64,
    /// Distance under which two transported points fall into one
    /// normalizer orbit.
    pub cluster_tol: f64,
    pub seed: u64,
}

impl Default for RestrictionOptions {
    fn default() -> Self {
        RestrictionOptions {
            slice: SliceOptions::default(),
            catalog_samples: 1000,
            xh_count: 100,
            surj_count: 60,
            fiber_interior_count: 20,
            surj_tol: 1e-6,
            subspace_tol: 1e-7,
            cluster_tol: 1e-6,
            seed: 42,
        }
    }
}

/// Serializable summary of a subalgebra.
#[derive(Debug, Clone, Serialize)]
pub struct SubalgebraSummary {
    pub dim_total: usize,
    pub dim_k: usize,
    pub dim_p: usize,
    pub theta_stable: bool,
    pub fixed_dim: usize,
    pub orbit_dim: usize,
}

fn summarize(group: &CompatibleGroup, h: &Subalgebra) -> SubalgebraSummary {
    let fp = isotropy::fingerprint(group, h);
    SubalgebraSummary {
        dim_total: fp.dim_total,
        dim_k: h.dim_k(),
        dim_p: h.dim_p(),
        theta_stable: h.theta_stable(),
        fixed_dim: fp.fixed_dim,
        orbit_dim: fp.orbit_dim,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DenseSummary {
    /// A single open stratum existed already under plain K-conjugacy.
    pub found_plain: bool,
    /// Open classes were identified through outer representatives.
    pub via_outer: bool,
    /// No dense class existed; the run restricted to the largest one.
    pub restricted: bool,
    /// Catalog label ids of the class members.
    pub member_labels: Vec<usize>,
    pub class_fraction: f64,
    /// Conjugacy statements hold at identity-component level unless
    /// component representatives were supplied.
    pub component_caveat: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct XhSummary {
    pub requested: usize,
    pub accepted: usize,
    pub tested: usize,
    pub accepted_fraction: f64,
    pub rejected_isotropy: usize,
    pub rejected_not_closed: usize,
    pub rejected_flow_failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroFiberSummary {
    /// M_{n_p} ⊆ M_p direction.
    pub forward_count: usize,
    pub forward_max_residual: f64,
    pub forward_pass: bool,
    /// cl(X^{<H>}) ∩ M_p ⊆ M_{n_p} direction, on transported points.
    pub reverse_count: usize,
    pub reverse_max_residual: f64,
    pub reverse_pass: bool,
    /// Fixed-space samples with nonzero normalizer gradient, confirmed to
    /// also have nonzero full gradient (correctly excluded from M_{n_p}).
    pub excluded_controls: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRecord {
    pub theta: Vec<f64>,
    pub comp: usize,
    pub outer: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurjectivitySummary {
    pub tested: usize,
    pub transported: usize,
    pub skipped_off_space: usize,
    pub max_residual: f64,
    pub max_norm_deviation: f64,
    pub witnesses: Vec<WitnessRecord>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberRecord {
    pub point: Vec<f64>,
    pub at_origin: bool,
    /// Number of normalizer-orbit clusters of K-transports into M_{n_p}.
    pub fiber_count: usize,
    /// Open slice strata of the class of H at this point.
    pub splitting_number: usize,
    pub transport_solutions: usize,
    /// "Phi is not open here": more than one fiber point.
    pub phi_not_open_here: bool,
    /// Transport search found fewer clusters than the slice predicts; the
    /// count is then a lower bound.
    pub count_is_lower_bound: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestrictionReport {
    pub group: String,
    pub dense: DenseSummary,
    pub h: SubalgebraSummary,
    pub normalizer: SubalgebraSummary,
    pub n_p_dim: usize,
    pub xh: XhSummary,
    pub mnp_points: Vec<Vec<f64>>,
    pub zero_fiber: ZeroFiberSummary,
    pub surjectivity: SurjectivitySummary,
    pub fibers: Vec<FiberRecord>,
    pub density_sanity_fraction: f64,
    pub density_sanity_pass: bool,
    pub overall_pass: bool,
}

/// Components ⟨ξᵢ·v, v⟩ over the orthonormalized p-part of a subalgebra
/// (usually the normalizer algebra of H).
pub fn restricted_gradient(
    group: &CompatibleGroup,
    sub: &Subalgebra,
    v: &DVector<f64>,
) -> DVector<f64> {
    let mats: Vec<DMatrix<f64>> = sub
        .p_part(group)
        .iter()
        .map(|e| group.realize(e))
        .collect();
    kempfness::gradient_with(&mats, v)
}

/// Internal bundle of everything the verification stages share.
struct Context<'a> {
    group: &'a CompatibleGroup,
    opts: RestrictionOptions,
    h: Subalgebra,
    h_proj: DMatrix<f64>,
    n_alg: Subalgebra,
    n_p_mats: Vec<DMatrix<f64>>,
    n_k_mats: Vec<DMatrix<f64>>,
    /// Orthonormal basis of V^H.
    fixed: DMatrix<f64>,
    /// Discrete representatives normalizing H (inside K): closure set.
    n_reps: Vec<DMatrix<f64>>,
    /// Supplied representatives that do NOT normalize H: treated as outer
    /// sheet tags in fiber transport counting.
    outer_reps: Vec<DMatrix<f64>>,
    restricted: bool,
}

impl<'a> Context<'a> {
    fn isotropy_equals_h(&self, h: &Subalgebra) -> bool {
        h.dim_total() == self.h.dim_total() && h.distance(&self.h) < self.opts.subspace_tol
    }

    /// Extended conjugacy to H: plain K-search, pre-composed with outer
    /// representatives when needed.
    fn class_of_h(&self, other: &Subalgebra, seed: u64) -> bool {
        if isotropy::fingerprint(self.group, other) != isotropy::fingerprint(self.group, &self.h) {
            return false;
        }
        let opts = ConjugacyOptions {
            seed,
            ..self.opts.slice.catalog.conj
        };
        conjugacy_search_custom(
            self.group,
            other,
            &self.h,
            &opts,
            self.group.k_basis(),
            self.group.component_reps(),
            &self.outer_reps,
        )
        .conjugate()
    }

    /// Membership of a classified minimal vector in the run's space
    /// cl(I_[H]): its class is [H] or it lies under the nullcone threshold.
    fn in_run_space(&self, limit_isotropy: &Subalgebra, in_nullcone: bool, seed: u64) -> bool {
        if !self.restricted {
            return true;
        }
        in_nullcone || self.class_of_h(limit_isotropy, seed)
    }

    /// Fold a point of V^H by the discrete normalizer representatives:
    /// deterministic quotient representative for reports.
    fn canonical_rep(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut best = y.clone();
        for r in &self.n_reps {
            let cand = r * y;
            if lex_greater(&cand, &best) {
                best = cand;
            }
        }
        best
    }

    /// Are two points in one N_K(H)-orbit (searchable part)?
    fn n_equivalent(&self, y1: &DVector<f64>, y2: &DVector<f64>) -> bool {
        let scale = 1.0 + y1.norm();
        for r in &self.n_reps {
            let moved = r * y1;
            if self.n_k_mats.is_empty() {
                if (&moved - y2).norm() < self.opts.cluster_tol * scale {
                    return true;
                }
            } else {
                let search = CompactSearch::new(
                    self.group.dim_v(),
                    self.n_k_mats.clone(),
                    &[],
                    &[],
                );
                let (_, val) = search.minimize(
                    |k| (k * &moved - y2).norm(),
                    &SearchOptions {
                        starts: 8,
                        nm_iters: 200,
                        seed: 0xC1,
                        early_exit: self.opts.cluster_tol * scale * 0.1,
                        polish_below: 1e-2,
                    },
                );
                if val < self.opts.cluster_tol * scale {
                    return true;
                }
            }
        }
        false
    }
}

fn lex_greater(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        // Stabilize against roundoff-level ties.
        if (x - y).abs() > 1e-9 {
            return x > y;
        }
    }
    false
}

/// Sample the fixed space of H, keeping points whose isotropy equals H
/// exactly and whose orbit is closed. Returns (accepted, summary).
pub fn sample_xh(
    group: &CompatibleGroup,
    h: &Subalgebra,
    count: usize,
    seed: u64,
    opts: &RestrictionOptions,
) -> Result<(Vec<DVector<f64>>, XhSummary)> {
    let fixed = isotropy::fixed_space(group, h);
    let d = fixed.ncols();
    let mut rng = sample::rng(seed, 0x8a);
    let mut accepted = Vec::new();
    let mut tested = 0usize;
    let mut rejected_isotropy = 0usize;
    let mut rejected_not_closed = 0usize;
    let mut rejected_flow_failed = 0usize;
    let budget = if d == 0 { 1 } else { 20 * count.max(1) };
    for _ in 0..budget {
        if accepted.len() >= count {
            break;
        }
        let v = if d == 0 {
            DVector::zeros(group.dim_v())
        } else {
            &fixed * sample::gaussian_vector(&mut rng, d)
        };
        tested += 1;
        let hv = isotropy::isotropy_algebra(group, &v);
        if hv.dim_total() != h.dim_total() || hv.distance(h) >= opts.subspace_tol {
            rejected_isotropy += 1;
            continue;
        }
        match kempfness::orbit_status(group, &v, &opts.slice.catalog.flow) {
            Ok((st, _)) => {
                if st.kind == kempfness::OrbitKind::Closed {
                    accepted.push(v);
                } else {
                    rejected_not_closed += 1;
                }
            }
            Err(_) => rejected_flow_failed += 1,
        }
    }
    let summary = XhSummary {
        requested: count,
        accepted: accepted.len(),
        tested,
        accepted_fraction: if tested > 0 {
            accepted.len() as f64 / tested as f64
        } else {
            0.0
        },
        rejected_isotropy,
        rejected_not_closed,
        rejected_flow_failed,
    };
    if accepted.is_empty() {
        return Err(CoreError::EmptyResult(format!(
            "no fixed-space sample had isotropy H with a closed orbit \
             (tested {tested}: isotropy {rejected_isotropy}, \
             non-closed {rejected_not_closed}, flow {rejected_flow_failed})"
        )));
    }
    Ok((accepted, summary))
}

/// Locate the dense class [H] on a fresh stratum catalog: merge open
/// strata under extended conjugacy; restrict to the largest class when
/// several remain.
fn locate_dense_class(
    group: &CompatibleGroup,
    opts: &RestrictionOptions,
) -> Result<(StratumCatalog, DenseSummary, Subalgebra)> {
    let copts = opts.slice.catalog;
    let mut rng = sample::rng(opts.seed, 0xca);
    let samples: Vec<DVector<f64>> = (0..opts.catalog_samples)
        .map(|_| sample::unit_sphere(&mut rng, group.dim_v()))
        .collect();
    let catalog = strata::build_catalog(group, &samples, &copts);
    let open: Vec<usize> = catalog
        .entries
        .iter()
        .filter(|e| e.is_open)
        .map(|e| e.id)
        .collect();
    if open.is_empty() {
        return Err(CoreError::NoDenseStratum { open: 0 });
    }
    // Union open classes through extended conjugacy.
    let mut class_of: Vec<usize> = (0..open.len()).collect();
    for i in 0..open.len() {
        for j in (i + 1)..open.len() {
            if class_of[j] != j {
                continue;
            }
            let hi = &catalog.entries[open[i]].rep;
            let hj = &catalog.entries[open[j]].rep;
            let out = isotropy::extended_conjugacy_search(
                group,
                hi,
                hj,
                &ConjugacyOptions {
                    seed: opts.seed ^ ((i as u64) << 8) ^ (j as u64),
                    ..copts.conj
                },
            );
            if out.conjugate() {
                class_of[j] = class_of[i];
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (idx, &root) in class_of.iter().enumerate() {
        if root == idx {
            let members: Vec<usize> = (0..open.len())
                .filter(|&j| class_of[j] == root)
                .map(|j| open[j])
                .collect();
            classes.push(members);
        }
    }
    // Pick the dense class, or the largest when several survive.
    let fraction_of = |members: &Vec<usize>| -> f64 {
        members.iter().map(|&id| catalog.entries[id].fraction).sum()
    };
    classes.sort_by(|a, b| {
        fraction_of(b)
            .partial_cmp(&fraction_of(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a[0].cmp(&b[0]))
    });
    let chosen = classes[0].clone();
    let restricted = classes.len() > 1;
    let via_outer = chosen.len() > 1;
    let summary = DenseSummary {
        found_plain: open.len() == 1,
        via_outer,
        restricted,
        member_labels: chosen.clone(),
        class_fraction: fraction_of(&chosen),
        component_caveat: group.component_reps().is_empty(),
    };
    let h = catalog.entries[chosen[0]].rep.clone();
    Ok((catalog, summary, h))
}

fn build_context<'a>(
    group: &'a CompatibleGroup,
    opts: &RestrictionOptions,
    h: Subalgebra,
    restricted: bool,
) -> Context<'a> {
    let n_alg = isotropy::normalizer_algebra(group, &h);
    let n_p_mats: Vec<DMatrix<f64>> = n_alg
        .p_part(group)
        .iter()
        .map(|e| group.realize(e))
        .collect();
    let n_k_mats: Vec<DMatrix<f64>> = n_alg
        .k_part(group)
        .iter()
        .map(|e| group.realize(e))
        .collect();
    let fixed = isotropy::fixed_space(group, &h);
    let mut normalizing = Vec::new();
    let mut outer = Vec::new();
    for r in group
        .normalizer_reps()
        .iter()
        .chain(group.component_reps().iter())
    {
        if isotropy::normalizes(group, r, &h) {
            normalizing.push(r.clone());
        } else if !group.normalizer_reps().is_empty()
            && group.normalizer_reps().iter().any(|n| (n - r).norm() < 1e-12)
        {
            // A supplied normalizer representative that does not normalize
            // this H realizes an identification from a larger group.
            outer.push(r.clone());
        }
    }
    let n_reps = closure_reps(group.dim_v(), &normalizing, 64);
    Context {
        group,
        opts: *opts,
        h_proj: linalg::projector(h.basis()),
        h,
        n_alg,
        n_p_mats,
        n_k_mats,
        fixed,
        n_reps,
        outer_reps: outer,
        restricted,
    }
}

/// Flow the fixed-space samples under the normalizer action and keep the
/// limits that stay in X^{<H>}: quotient representatives inside M_{n_p}.
fn mnp_from_xh(ctx: &Context, xh: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let flow_opts = ctx.opts.slice.catalog.flow;
    let mut out: Vec<DVector<f64>> = Vec::new();
    for x in xh {
        let Ok(flow) = kempfness::flow_with(&ctx.n_p_mats, x, &flow_opts) else {
            continue;
        };
        if flow.status != FlowStatus::Minimal {
            continue;
        }
        let y = flow.limit_vector();
        let floor = isotropy::limit_floor(flow_opts.flow_tol, &y);
        let hy = isotropy::isotropy_algebra_with_floor(ctx.group, &y, floor);
        if !ctx.isotropy_equals_h(&hy) {
            continue;
        }
        let canon = ctx.canonical_rep(&y);
        if out
            .iter()
            .all(|seen| (seen - &canon).norm() > 1e-9 * (1.0 + canon.norm()))
        {
            out.push(canon);
        }
    }
    out
}

struct ZeroFiberInputs<'a> {
    mnp_points: &'a [DVector<f64>],
    transported: &'a [DVector<f64>],
    xh_samples: &'a [DVector<f64>],
}

/// Both directions of M_{n_p} = cl(X^{<H>}) ∩ M_p, recorded with residuals.
fn verify_zero_fiber(ctx: &Context, inputs: ZeroFiberInputs) -> ZeroFiberSummary {
    let tol = 10.0 * ctx.opts.slice.catalog.flow.flow_tol;
    let mut forward_max: f64 = 0.0;
    for y in inputs.mnp_points {
        forward_max = forward_max.max(kempfness::gradient_map(ctx.group, y).norm());
    }
    let forward_pass = forward_max <= tol;

    let mut reverse_max: f64 = 0.0;
    for y in inputs.transported {
        reverse_max = reverse_max.max(restricted_gradient(ctx.group, &ctx.n_alg, y).norm());
    }
    let reverse_pass = reverse_max <= tol;

    // Contrapositive control: fixed-space points visibly off M_{n_p} must
    // be off M_p too.
    let mut excluded = 0usize;
    for x in inputs.xh_samples {
        let scale = 1.0 + 2.0 * kempfness::value_f(x);
        if restricted_gradient(ctx.group, &ctx.n_alg, x).norm() > tol * scale {
            assert!(
                kempfness::gradient_map(ctx.group, x).norm() > tol,
                "point excluded from the normalizer zero fiber was minimal"
            );
            excluded += 1;
        }
    }

    ZeroFiberSummary {
        forward_count: inputs.mnp_points.len(),
        forward_max_residual: forward_max,
        forward_pass,
        reverse_count: inputs.transported.len(),
        reverse_max_residual: reverse_max,
        reverse_pass,
        excluded_controls: excluded,
        pass: forward_pass && reverse_pass,
    }
}

/// Transport objective: subspace distance of the isotropy to H plus the
/// normalizer-gradient residual (both vanish exactly on K·m ∩ M_{n_p}
/// when m lies over the stratum of H).
fn surjectivity_objective<'b>(
    ctx: &'b Context,
    m: &'b DVector<f64>,
    gm_proj: &'b DMatrix<f64>,
) -> impl Fn(&DMatrix<f64>) -> f64 + 'b {
    let scale = 1.0 + 2.0 * kempfness::value_f(m);
    move |k: &DMatrix<f64>| {
        let ad = isotropy::ad_matrix(ctx.group, k);
        let moved_proj = &ad * gm_proj * ad.transpose();
        let dist = (&moved_proj - &ctx.h_proj).norm();
        let y = k * m;
        let mu = restricted_gradient(ctx.group, &ctx.n_alg, &y).norm();
        dist + mu / scale
    }
}

struct SurjOutcome {
    summary: SurjectivitySummary,
    transported_points: Vec<DVector<f64>>,
}

/// M_p = K·M_{n_p}: transport each sampled minimal vector into the fixed
/// space with isotropy exactly H. Samples off the restricted run space are
/// skipped and flagged.
fn verify_surjectivity(ctx: &Context, mp_samples: &[(DVector<f64>, Subalgebra, bool)]) -> SurjOutcome {
    let mut witnesses = Vec::new();
    let mut transported_points = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut max_norm_dev: f64 = 0.0;
    let mut skipped = 0usize;
    let mut tested = 0usize;
    let mut transported = 0usize;
    for (idx, (m, iso, in_null)) in mp_samples.iter().enumerate() {
        let seed = ctx.opts.seed ^ 0x50f ^ ((idx as u64) << 8);
        if !ctx.in_run_space(iso, *in_null, seed) {
            skipped += 1;
            continue;
        }
        tested += 1;
        if *in_null {
            // The origin's fiber: the identity transport already works.
            witnesses.push(WitnessRecord {
                theta: vec![0.0; ctx.group.dim_k()],
                comp: 0,
                outer: 0,
                residual: 0.0,
            });
            transported += 1;
            transported_points.push(m.clone());
            continue;
        }
        let floor = isotropy::limit_floor(ctx.opts.slice.catalog.flow.flow_tol, m);
        let gm = isotropy::isotropy_algebra_with_floor(ctx.group, m, floor);
        let gm_proj = linalg::projector(gm.basis());
        let obj = surjectivity_objective(ctx, m, &gm_proj);
        let search = CompactSearch::new(
            ctx.group.dim_v(),
            ctx.group.k_basis().to_vec(),
            ctx.group.component_reps(),
            &ctx.outer_reps,
        );
        let (w, val) = search.minimize(
            &obj,
            &SearchOptions {
                starts: ctx.opts.slice.catalog.conj.starts,
                nm_iters: ctx.opts.slice.catalog.conj.nm_iters,
                seed,
                early_exit: ctx.opts.surj_tol * 1e-3,
                polish_below: 1e-2,
            },
        );
        max_residual = max_residual.max(val);
        if val < ctx.opts.surj_tol {
            let k = search.realize(&w);
            let y = &k * m;
            max_norm_dev = max_norm_dev.max((y.norm() - m.norm()).abs());
            transported += 1;
            transported_points.push(y);
            witnesses.push(WitnessRecord {
                theta: w.theta.clone(),
                comp: w.comp,
                outer: w.outer,
                residual: val,
            });
        }
    }
    let pass = tested > 0 && transported == tested;
    SurjOutcome {
        summary: SurjectivitySummary {
            tested,
            transported,
            skipped_off_space: skipped,
            max_residual,
            max_norm_deviation: max_norm_dev,
            witnesses,
            pass,
        },
        transported_points,
    }
}

/// Count the fiber of the induced map over π(m) two ways and compare.
fn phi_fiber_count(ctx: &Context, m: &DVector<f64>, at_origin: bool, seed: u64) -> FiberRecord {
    // Route 1: K-transports of m into M_{n_p}, clustered into normalizer
    // orbits; transports through genuinely-outer representatives count as
    // distinct sheets.
    let search = CompactSearch::new(
        ctx.group.dim_v(),
        ctx.group.k_basis().to_vec(),
        ctx.group.component_reps(),
        &ctx.outer_reps,
    );
    let scale = 1.0 + 2.0 * kempfness::value_f(m);
    let obj = |k: &DMatrix<f64>| {
        let y = k * m;
        let into_fixed = linalg::distance_to_span(&ctx.fixed, &y) / (1.0 + y.norm());
        let mu = kempfness::gradient_map(ctx.group, &y).norm() / scale;
        into_fixed + mu
    };
    let sols = search.collect_solutions(
        obj,
        ctx.opts.surj_tol,
        &SearchOptions {
            starts: ctx.opts.slice.catalog.conj.starts,
            nm_iters: ctx.opts.slice.catalog.conj.nm_iters,
            seed,
            early_exit: 0.0,
            polish_below: 1e-2,
        },
    );
    // Deduplicate by (sheet tag, point), then cluster under N_K(H).
    let mut tagged: Vec<(usize, DVector<f64>)> = Vec::new();
    for (w, _) in &sols {
        let y = search.realize(w) * m;
        if tagged
            .iter()
            .all(|(t, seen)| *t != w.outer || (seen - &y).norm() > 1e-7 * (1.0 + y.norm()))
        {
            tagged.push((w.outer, y));
        }
    }
    let mut clusters: Vec<(usize, DVector<f64>)> = Vec::new();
    for (tag, y) in &tagged {
        let known = clusters
            .iter()
            .any(|(t, rep)| t == tag && ctx.n_equivalent(rep, y));
        if !known {
            clusters.push((*tag, y.clone()));
        }
    }
    let fiber_count = clusters.len();

    // Route 2: open slice strata at m belonging to the class of H.
    let splitting = slice_splitting_in_class(ctx, m, seed);

    let pass = fiber_count == splitting;
    FiberRecord {
        point: m.as_slice().to_vec(),
        at_origin,
        fiber_count,
        splitting_number: splitting,
        transport_solutions: tagged.len(),
        phi_not_open_here: fiber_count > 1,
        count_is_lower_bound: fiber_count < splitting,
        pass,
    }
}

/// Open G_m-isotropy strata of the slice at m whose class is the class of
/// H under the available conjugations. On the run's space this is the
/// splitting number n(m).
fn slice_splitting_in_class(ctx: &Context, m: &DVector<f64>, seed: u64) -> usize {
    let Ok(model) = slice::build_slice_model(ctx.group, m, &ctx.opts.slice) else {
        return 0;
    };
    if model.dim_w() == 0 {
        return 1;
    }
    let catalog = slice::slice_catalog(ctx.group, &model, &ctx.opts.slice, seed ^ 0x51ce);
    let mut count = 0usize;
    for e in catalog.entries.iter().filter(|e| e.is_open) {
        if ctx.class_of_h(&e.rep, seed ^ 0xc0de ^ (e.id as u64)) {
            count += 1;
        }
    }
    count
}

/// Run the full verification pipeline for a group.
pub fn run_restriction(group: &CompatibleGroup, opts: &RestrictionOptions) -> Result<RestrictionReport> {
    let (_catalog, dense, h) = locate_dense_class(group, opts)?;
    let ctx = build_context(group, opts, h, dense.restricted);

    // Fixed-space samples with isotropy exactly H and closed orbits.
    let (xh_samples, xh_summary) = sample_xh(group, &ctx.h, opts.xh_count, opts.seed ^ 0x11, opts)?;
    let density_fraction = xh_summary.accepted_fraction;
    let density_pass = density_fraction > 0.9;

    // Quotient representatives inside M_{n_p}.
    let mnp_points = mnp_from_xh(&ctx, &xh_samples);

    // Minimal vectors from random starts, classified for membership.
    let flow_opts = opts.slice.catalog.flow;
    let mut rng = sample::rng(opts.seed, 0x3b);
    let mut mp_samples: Vec<(DVector<f64>, Subalgebra, bool)> = Vec::new();
    let mut attempts = 0usize;
    while mp_samples.len() < opts.surj_count && attempts < 20 * opts.surj_count {
        attempts += 1;
        let start = sample::gaussian_vector(&mut rng, group.dim_v());
        let Ok(flow) = kempfness::flow_to_minimal(group, &start, &flow_opts) else {
            continue;
        };
        if flow.status != FlowStatus::Minimal || flow.in_nullcone(&flow_opts) {
            continue;
        }
        let mlim = flow.limit_vector();
        let floor = isotropy::limit_floor(flow_opts.flow_tol, &mlim);
        let iso = isotropy::isotropy_algebra_with_floor(group, &mlim, floor);
        mp_samples.push((mlim, iso, false));
    }
    let surj = verify_surjectivity(&ctx, &mp_samples);

    let zero_fiber = verify_zero_fiber(
        &ctx,
        ZeroFiberInputs {
            mnp_points: &mnp_points,
            transported: &surj.transported_points,
            xh_samples: &xh_samples,
        },
    );

    // Fiber counts: the origin plus interior quotient representatives.
    let mut fibers = Vec::new();
    let origin = DVector::zeros(group.dim_v());
    fibers.push(phi_fiber_count(&ctx, &origin, true, opts.seed ^ 0xf1be));
    for (i, y) in mnp_points
        .iter()
        .filter(|y| y.norm() > 1e-8)
        .take(opts.fiber_interior_count)
        .enumerate()
    {
        fibers.push(phi_fiber_count(
            &ctx,
            y,
            false,
            opts.seed ^ 0xf1be ^ ((i as u64 + 1) << 12),
        ));
    }
    let fibers_pass = fibers.iter().all(|f| f.pass);

    let overall_pass = zero_fiber.pass && surj.summary.pass && fibers_pass && density_pass;
    Ok(RestrictionReport {
        group: group.name().to_string(),
        dense,
        h: summarize(group, &ctx.h),
        normalizer: summarize(group, &ctx.n_alg),
        n_p_dim: ctx.n_p_mats.len(),
        xh: xh_summary,
        mnp_points: mnp_points.iter().map(|v| v.as_slice().to_vec()).collect(),
        zero_fiber,
        surjectivity: surj.summary,
        fibers,
        density_sanity_fraction: density_fraction,
        density_sanity_pass: density_pass,
        overall_pass,
    })
}
