//! Classify points into isotropy strata and assemble stratum catalogs.
//!
//! A point's stratum is read off the closed orbit in its quotient fiber:
//! flow to a minimal vector, take the isotropy subalgebra there, and merge
//! labels across samples by K-conjugacy. Strata of a linear representation
//! are cones and the union over a sample set is disjoint by construction;
//! openness is detected by sample fraction together with maximal orbit
//! dimension, which is the honest desk-scale reading of the topological
//! characterization.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::CompatibleGroup;
use crate::error::Result;
use crate::isotropy::{self, conjugacy_search_custom, ConjugacyOptions, Fingerprint, Subalgebra};
use crate::kempfness::{self, FlowOptions, FlowResult, FlowStatus};

#[derive(Debug, Clone, Copy)]
pub struct CatalogOptions {
    pub flow: FlowOptions,
    pub conj: ConjugacyOptions,
    /// Minimum sample fraction for a stratum to count as open.
    pub open_fraction_threshold: f64,
    /// Samples whose limit value sits in (null_tol, wall_tol·f_start] are
    /// flagged boundary-ambiguous: flow near a wall converges to the wrong
    /// side's limit only within this tolerance band.
    pub wall_tol: f64,
    /// Register the origin's stratum (the full-isotropy / nullcone class)
    /// even when no sample lands on it.
    pub include_origin: bool,
    pub seed: u64,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        CatalogOptions {
            flow: FlowOptions::default(),
            conj: ConjugacyOptions::default(),
            open_fraction_threshold: 0.02,
            wall_tol: 1e-7,
            include_origin: true,
            seed: 42,
        }
    }
}

/// Everything classification learns about one point.
#[derive(Debug, Clone)]
pub struct PointClass {
    pub flow: FlowResult,
    /// Isotropy subalgebra at the closed-orbit representative of the fiber.
    pub isotropy: Subalgebra,
    pub fingerprint: Fingerprint,
    pub in_nullcone: bool,
    pub boundary_ambiguous: bool,
}

/// Flow to the fiber's minimal vector and read the isotropy stratum there.
/// Two points of one fiber receive K-conjugate subalgebras.
pub fn classify_point(
    group: &CompatibleGroup,
    v: &DVector<f64>,
    opts: &CatalogOptions,
) -> Result<PointClass> {
    let flow = kempfness::flow_to_minimal(group, v, &opts.flow)?;
    let rep_point = flow.closed_orbit_representative(&opts.flow);
    let floor = isotropy::limit_floor(opts.flow.flow_tol, &rep_point);
    let isotropy = isotropy::isotropy_algebra_with_floor(group, &rep_point, floor);
    let fingerprint = isotropy::fingerprint(group, &isotropy);
    let in_nullcone = flow.in_nullcone(&opts.flow);
    let wall_band =
        flow.f_limit > flow.null_tol(&opts.flow) && flow.f_limit <= opts.wall_tol * flow.f_start;
    let boundary_ambiguous = flow.status != FlowStatus::Minimal || wall_band;
    Ok(PointClass {
        flow,
        isotropy,
        fingerprint,
        in_nullcone,
        boundary_ambiguous,
    })
}

/// One discovered stratum class.
#[derive(Debug, Clone)]
pub struct StratumLabel {
    pub id: usize,
    /// Isotropy representative at the closed orbit of the defining fiber.
    pub rep: Subalgebra,
    pub fingerprint: Fingerprint,
    pub is_open: bool,
    pub is_nullcone_stratum: bool,
    /// Samples assigned (ambiguous ones excluded).
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleFlag {
    Ok,
    Boundary,
    Failed,
}

impl SampleFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleFlag::Ok => "ok",
            SampleFlag::Boundary => "boundary",
            SampleFlag::Failed => "failed",
        }
    }
}

/// Per-sample classification record, aligned with the input sample list.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub label: Option<usize>,
    pub f_limit: f64,
    pub residual: f64,
    pub in_nullcone: bool,
    pub flag: SampleFlag,
}

/// Registry of stratum classes discovered on a sample set.
#[derive(Debug, Clone)]
pub struct StratumCatalog {
    pub entries: Vec<StratumLabel>,
    pub records: Vec<SampleRecord>,
    pub sample_count: usize,
    /// Samples contributing to fractions.
    pub classified: usize,
    pub ambiguous: usize,
    pub failed: usize,
    pub seed: u64,
}

impl StratumCatalog {
    pub fn open_entries(&self) -> Vec<&StratumLabel> {
        self.entries.iter().filter(|e| e.is_open).collect()
    }

    pub fn entry(&self, id: usize) -> &StratumLabel {
        &self.entries[id]
    }
}

/// The conjugator set used to merge sample isotropies: generators of the
/// compact group doing the merging plus its discrete component branches.
pub(crate) struct MergeContext<'a> {
    pub group: &'a CompatibleGroup,
    pub gens: Vec<DMatrix<f64>>,
    pub comp_reps: Vec<DMatrix<f64>>,
    pub conj: ConjugacyOptions,
}

impl<'a> MergeContext<'a> {
    pub fn whole_group(group: &'a CompatibleGroup, conj: ConjugacyOptions) -> Self {
        MergeContext {
            group,
            gens: group.k_basis().to_vec(),
            comp_reps: group.component_reps().to_vec(),
            conj,
        }
    }

    /// Cheap pass used against every candidate entry: a conjugate pair is
    /// almost always witnessed within a few starts, while confirming a
    /// genuinely new class gets the full budget later.
    pub fn conjugate_fast(&self, h1: &Subalgebra, h2: &Subalgebra, seed: u64) -> bool {
        let opts = ConjugacyOptions {
            seed,
            starts: 6.min(self.conj.starts),
            nm_iters: 160.min(self.conj.nm_iters),
            ..self.conj
        };
        conjugacy_search_custom(self.group, h1, h2, &opts, &self.gens, &self.comp_reps, &[])
            .conjugate()
    }

    pub fn conjugate(&self, h1: &Subalgebra, h2: &Subalgebra, seed: u64) -> bool {
        let opts = ConjugacyOptions { seed, ..self.conj };
        conjugacy_search_custom(self.group, h1, h2, &opts, &self.gens, &self.comp_reps, &[])
            .conjugate()
    }
}

/// Classified sample ready for merging (shared between the group-level
/// catalog and slice catalogs, which merge under different compact groups).
pub(crate) struct MergeItem {
    pub isotropy: Subalgebra,
    pub fingerprint: Fingerprint,
    pub in_nullcone: bool,
    pub ambiguous: bool,
    pub f_limit: f64,
    pub residual: f64,
    pub failed: bool,
}

pub(crate) fn merge_items(
    items: &[MergeItem],
    mc: &MergeContext,
    anchor: Option<(Subalgebra, Fingerprint)>,
    open_fraction_threshold: f64,
    seed: u64,
) -> StratumCatalog {
    let mut entries: Vec<StratumLabel> = Vec::new();
    if let Some((rep, fingerprint)) = anchor {
        entries.push(StratumLabel {
            id: 0,
            rep,
            fingerprint,
            is_open: false,
            is_nullcone_stratum: true,
            count: 0,
            fraction: 0.0,
        });
    }

    let mut records = Vec::with_capacity(items.len());
    let mut classified = 0usize;
    let mut ambiguous = 0usize;
    let mut failed = 0usize;
    for (idx, item) in items.iter().enumerate() {
        if item.failed {
            failed += 1;
            records.push(SampleRecord {
                label: None,
                f_limit: item.f_limit,
                residual: item.residual,
                in_nullcone: item.in_nullcone,
                flag: SampleFlag::Failed,
            });
            continue;
        }
        let mut assigned = None;
        for e in &entries {
            if e.fingerprint == item.fingerprint {
                let merge_seed = seed ^ ((idx as u64) << 16) ^ (e.id as u64);
                if mc.conjugate_fast(&item.isotropy, &e.rep, merge_seed) {
                    assigned = Some(e.id);
                    break;
                }
            }
        }
        if assigned.is_none() {
            // Before registering a new class, re-check candidates with the
            // full search budget: a missed witness here would split one
            // stratum into two.
            for e in &entries {
                if e.fingerprint == item.fingerprint {
                    let merge_seed = seed ^ ((idx as u64) << 16) ^ (e.id as u64) ^ 0x5eed;
                    if mc.conjugate(&item.isotropy, &e.rep, merge_seed) {
                        assigned = Some(e.id);
                        break;
                    }
                }
            }
        }
        let id = assigned.unwrap_or_else(|| {
            let id = entries.len();
            entries.push(StratumLabel {
                id,
                rep: item.isotropy.clone(),
                fingerprint: item.fingerprint,
                is_open: false,
                is_nullcone_stratum: item.in_nullcone,
                count: 0,
                fraction: 0.0,
            });
            id
        });
        if item.ambiguous {
            ambiguous += 1;
            records.push(SampleRecord {
                label: Some(id),
                f_limit: item.f_limit,
                residual: item.residual,
                in_nullcone: item.in_nullcone,
                flag: SampleFlag::Boundary,
            });
        } else {
            classified += 1;
            entries[id].count += 1;
            records.push(SampleRecord {
                label: Some(id),
                f_limit: item.f_limit,
                residual: item.residual,
                in_nullcone: item.in_nullcone,
                flag: SampleFlag::Ok,
            });
        }
    }

    if classified > 0 {
        for e in &mut entries {
            e.fraction = e.count as f64 / classified as f64;
        }
    }
    // Openness: enough mass, and maximal orbit dimension among the classes
    // that have enough mass.
    let max_orbit_dim = entries
        .iter()
        .filter(|e| e.fraction >= open_fraction_threshold)
        .map(|e| e.fingerprint.orbit_dim)
        .max();
    if let Some(m) = max_orbit_dim {
        for e in &mut entries {
            e.is_open = e.fraction >= open_fraction_threshold && e.fingerprint.orbit_dim == m;
        }
    }

    StratumCatalog {
        entries,
        records,
        sample_count: items.len(),
        classified,
        ambiguous,
        failed,
        seed,
    }
}

pub(crate) fn class_to_item(res: Result<PointClass>, group: &CompatibleGroup) -> MergeItem {
    match res {
        Ok(pc) => MergeItem {
            isotropy: pc.isotropy,
            fingerprint: pc.fingerprint,
            in_nullcone: pc.in_nullcone,
            ambiguous: pc.boundary_ambiguous,
            f_limit: pc.flow.f_limit,
            residual: pc.flow.residual,
            failed: false,
        },
        Err(_) => MergeItem {
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
        },
    }
}

/// Classify every sample, merge labels by K-conjugacy, and detect open
/// strata. Per-sample flow failures are recorded, not fatal. Deterministic
/// for a fixed seed and sample order.
pub fn build_catalog(
    group: &CompatibleGroup,
    samples: &[DVector<f64>],
    opts: &CatalogOptions,
) -> StratumCatalog {
    let classes: Vec<Result<PointClass>> = samples
        .par_iter()
        .map(|v| classify_point(group, v, opts))
        .collect();
    let items: Vec<MergeItem> = classes
        .into_iter()
        .map(|res| class_to_item(res, group))
        .collect();

    let anchor = if opts.include_origin {
        let full = Subalgebra::full(group);
        let fp = isotropy::fingerprint(group, &full);
        Some((full, fp))
    } else {
        None
    };
    let mc = MergeContext::whole_group(group, opts.conj);
    merge_items(&items, &mc, anchor, opts.open_fraction_threshold, opts.seed)
}

/// The unique open stratum, when exactly one exists.
pub fn dense_stratum(catalog: &StratumCatalog) -> Option<&StratumLabel> {
    let open = catalog.open_entries();
    if open.len() == 1 {
        Some(open[0])
    } else {
        None
    }
}
