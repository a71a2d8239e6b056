//! Numerical construction of higher-order `(L^p, Q)` mean zonoids and the
//! convex and star bodies around them.
//!
//! Everything here works on *oracles*: a convex body is known through its
//! support function, a membership test and a few derived queries (ray exits,
//! chords). Constructions such as the higher-order difference body `D^m(K)`,
//! the radial mean bodies `R_q^m K` and Steiner symmetrals compose those
//! oracles and are never materialized as meshes (the Steiner iteration in the
//! plane is the one exception, see [`steiner`]).
//!
//! Matrices in `M[n, m]` are identified with `R^{nm}` column by column, so a
//! flat slice of length `n * m` holds the columns `x_1, ..., x_m` back to back.
//!
//! The crate is `no_std` (with `alloc`). The `std` feature, on by default,
//! only switches shard execution to rayon; the numbers do not change.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod body;
pub mod error;
pub mod higher;
pub mod linalg;
pub mod measure;
mod par;
pub mod steiner;
pub mod table;
pub mod zonoid;

pub use body::{
    affine_image, membership, polar_radial, radial_eval, support_eval, Ball, ConvexBody, Ellipsoid,
    Facet, Polytope, QBody, QKind,
};
pub use error::{GeomError, Result};
pub use linalg::{pair, Dims, Mat};
pub use measure::{Estimate, RngPlan};
pub use table::SupportTable;
