//! Accurate evaluation of polynomials near their zeros.
//!
//! Horner's method loses most of its significant bits near a zero. This crate
//! evaluates `P` through a nearby polynomial `P̂` and point `x̂` whose Horner
//! evaluation is exact in the working format, plus a small correction, so
//! that repeated evaluations near `x̂` cost one Horner pass each.
//!
//! All arithmetic is done in an emulated working format ([`FloatSpec`],
//! binary32 by default) with values carried in `f64`; `f64` error-free
//! transformations provide the reference.

pub mod accurate;
pub mod bench;
pub mod error;
pub mod fpbits;
pub mod hexfloat;
pub mod nearby;
pub mod poly;

pub use accurate::{deflate, eval_plan, polish_root, RootResult};
pub use error::{Error, Result};
pub use fpbits::FloatSpec;
pub use nearby::{build_plan, check_conditions, ConditionReport, NearbyPlan, PlanOptions};
pub use poly::{e_max, horner_eval, reference_eval, Polynomial};
