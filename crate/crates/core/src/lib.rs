//! Binary128 GEMM on a simulated systolic array.
//!
//! - [`quadfp`]: bit-exact IEEE 754 binary128 soft-float.
//! - [`matrix`]: column-major matrices with a leading dimension.
//! - [`systolic`]: functional + analytic model of a `P_R x P_C` systolic GEMM
//!   array with a memory tile in front of the feed stage.
//! - [`perfmodel`]: peak/achieved throughput, bandwidth requirement and
//!   ceiling, LU flop counts.
//! - [`rgemm`]: the 13-argument `Rgemm` entry point and the `E_L1` metric.
//! - [`lu`]: blocked LU factorisation driven through [`rgemm`].
//! - [`dispatch`]: the accelerator offload rule and call-trace replay.
//!
//! The crate is `no_std` (with `alloc`); enable the `std` feature for
//! `std::error::Error` impls.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]
// index loops mirror the textbook formulations
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod dispatch;
pub mod lu;
pub mod matrix;
pub mod perfmodel;
pub mod quadfp;
pub mod rgemm;
pub mod rng;
pub mod systolic;

pub use dispatch::{DispatchPolicy, GemmCallRecord};
pub use lu::{LuError, LuFactors, Pivoting};
pub use matrix::{MatView, Matrix, MatrixError, TransposeFlag};
pub use perfmodel::BoardSpec;
pub use quadfp::{MaddMode, QuadFloat};
pub use rgemm::{ArgumentError, GemmBackend};
pub use rng::SplitMix64;
pub use systolic::{ArrayConfig, ConfigError, SimReport};
