//! Numerical toolkit for a quasilinear elliptic system on the unit disk whose
//! solution `x/|x|` is discontinuous at the origin.
//!
//! The pointwise layer ([`tensor`], [`integrand`], [`singular`]) is generic
//! over the scalar type; quadrature, finite elements, the structure audit and
//! the regularity probes work in `f64`.

pub mod audit;
pub mod error;
pub mod fem;
pub mod integrand;
pub mod probes;
pub mod quadrature;
pub mod singular;
pub mod sum;
pub mod tensor;

pub use error::{Error, Result};
pub use integrand::{make_params, BumpCutoff, Cutoff, IntegrandParams, StructureBounds};
pub use tensor::{outer, v_map, v_map_mat, v_map_vec, Form4, Mat2, Scalar, Vec2};

pub type Vec2F64 = Vec2<f64>;
pub type Mat2F64 = Mat2<f64>;
pub type Form4F64 = Form4<f64>;
pub type ParamsF64 = IntegrandParams<f64>;

pub type Vec2F32 = Vec2<f32>;
pub type Mat2F32 = Mat2<f32>;
pub type Form4F32 = Form4<f32>;
pub type ParamsF32 = IntegrandParams<f32>;
