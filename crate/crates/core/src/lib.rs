//! Finsler geometry on truncated Taylor jets: sprays and curvature, Randers
//! data, S-curvature quantities, projective invariants and the
//! classification of polynomial vector fields.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod cubature;
pub mod deriv;
pub mod error;
pub mod geometry;
pub mod library;
pub mod linalg;
pub mod polynomial;
pub mod projective;
pub mod randers;
pub mod sample;
pub mod squantities;
pub mod tensor;

pub use deriv::{Jet, JetContext, ScalarField, TangentPoint};
pub use error::{Error, Result};
pub use geometry::{LocalGeometry, MetricModel};
pub use projective::PolyVectorField;
pub use randers::{RandersSpec, VolumeForm};
pub use sample::SampleConfig;
pub use tensor::{JetTensor, TensorValue};
