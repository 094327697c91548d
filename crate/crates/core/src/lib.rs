//! Bounded remainder sets for toral rotations built by lattice basis
//! exchange, and the bounded-distance map from cut-and-project sets to
//! lattices.
//!
//! ```
//! use brs_core::{construct, naive_returns, renormalized_returns, RotationContext};
//! use rug::Float;
//!
//! let ctx = RotationContext::from_decimal(&["0.6180339887498948482045868343656381177203"], 256)?;
//! let geom = construct(&ctx, &[1])?.geometry()?;
//! assert_eq!(renormalized_returns(&geom, 5)?.times(), [2, 5, 7, 10, 13]);
//! let x0 = [Float::new(256)];
//! assert_eq!(naive_returns(&geom, &x0, 5, 1000)?.times(), [2, 5, 7, 10, 13]);
//! # Ok::<(), brs_core::Error>(())
//! ```

pub mod cutproject;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod lattice;
pub mod real;
pub mod region;

pub use cutproject::{
    bd_pairing, fold_offset, gamma_shift, generate_points, BDPairing, PointSet, Scheme, SectionedScheme,
};
pub use dynamics::{
    hyperplane_points, naive_returns, remainder_trace, renormalized_returns, verify_rauzy, ConditionResult,
    RauzyReport, RemainderTrace, ReturnSequence,
};
pub use error::{Error, Result};
pub use lattice::{basis_determinant, embed, last, phys, LatticeVector, RotationContext};
pub use real::{DEFAULT_PRECISION, MIN_PRECISION, PRECISION_ENV};
pub use region::{
    check_conditions, construct, exchange_step, initial_basis, round_robin, ConditionReport, RegionGeometry,
    SpecialBasis,
};
pub use rug;
