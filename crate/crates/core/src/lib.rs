//! Finite-dimensional dilation theory for frames, framings and
//! operator-valued measures.
//!
//! Every construction in this crate comes with a verifier: dilations report
//! their residuals, norms report their maximizing subsets, and sampled
//! estimates say that they are sampled.

pub mod dilation;
pub mod error;
pub mod frames;
pub mod framings;
pub mod linalg;
pub mod ovm;
pub mod rademacher;
pub mod rng;
pub mod samples;
pub mod subset;

pub use dilation::{BlockDilation, DilationTriple, NaimarkDilation, Representation};
pub use error::{Error, Result};
pub use frames::{Frame, FrameBounds, RankOneDecomposition, RieszDilation};
pub use framings::{Framing, RescalePlan, UnconditionalityReport};
pub use linalg::{Matrix, Scalar, Vector};
pub use ovm::{Ovm, OvmClassification};
pub use subset::SubsetMask;
