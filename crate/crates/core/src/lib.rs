//! Linking probabilities of spider-web crossbar switching networks.
//!
//! The crate is organized bottom-up:
//!
//! * [`netgraph`]: the graphs `G(b, k, l)`, path enumeration and their symmetry maps.
//! * [`genfun`]: the path-intersection polynomials `phi_l(y)` via series division of a
//!   rational bivariate generating function.
//! * [`moments`]: first and second moments of the idle-path count and the derived bounds.
//! * [`asymptotics`]: two-pole residue evaluation of `phi_l(q)`.
//! * [`limits`]: critical vacancy probability, branching fixed point and related constants.
//! * [`simulate`]: exact enumeration and Monte-Carlo estimation over random link states.
//! * [`cli`]: the command-line surface (sweeps, oracle suites, reports).

// `!(x > y)` guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod genfun;
pub mod limits;
pub mod moments;
pub mod netgraph;
pub mod simulate;

pub use error::{Error, Result};
pub use netgraph::{Automorphism, Label, NetworkParams, PathDigits, VertexId};
