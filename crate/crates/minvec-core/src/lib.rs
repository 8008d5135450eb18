//! Numerical toolkit for actions of real reductive matrix groups
//! G = K exp(p) on finite-dimensional real inner-product spaces.
//!
//! The crate computes gradient maps and minimal vectors via descent flow,
//! isotropy subalgebras and their K-conjugacy classes, orbit-type stratum
//! catalogs over sample sets, slice models and splitting numbers, and
//! verifies the restriction map between quotient models on concrete
//! examples.

pub mod algebra;
pub mod builtin;
pub mod error;
pub mod isotropy;
pub mod kempfness;
pub mod ksearch;
pub mod linalg;
pub mod restriction;
pub mod sample;
pub mod slice;
pub mod strata;

pub use algebra::{AlgebraElement, CompatibleGroup, GroupSpec};
pub use error::{CoreError, Result};
pub use isotropy::{Fingerprint, Subalgebra};
pub use kempfness::{FlowOptions, FlowResult, FlowStatus, OrbitKind, OrbitStatus};
pub use ksearch::KWitness;
pub use strata::{StratumCatalog, StratumLabel};
