//! Simulation and verification toolkit for level-set percolation of the
//! Gaussian free field on Z^d.
//!
//! The crate provides, in rough dependency order:
//!
//! - [`lattice`]: geometry of Z^d (norms, balls, spheres, boundaries,
//!   connected components);
//! - [`potential`]: simple-random-walk potential theory (free and killed
//!   Green functions, hitting distributions, equilibrium measure, capacity)
//!   with quadrature, Monte Carlo and truncated-solve evaluators;
//! - [`gff`]: exact Gaussian free field samplers (dense Cholesky, sequential
//!   conditional, box-Markov) plus tail and extreme-value helpers;
//! - [`levelset`]: excursion sets, crossing events, and common-random-number
//!   Monte Carlo for percolation observables, including finite-size proxies
//!   for the two critical levels;
//! - [`renorm`]: deterministic, log-space evaluation of the two
//!   renormalization schemes (upper-bound crossing recursion and lower-bound
//!   good-site recursion) and their parameter chains;
//! - [`hypercube`]: embedded trees in the hypercube, stochastic-domination
//!   coupling checks, substantial/giant component detection, and good-event
//!   Monte Carlo;
//! - [`cli`]: experiment configuration, manifests and persistence behind the
//!   `gffp` binary.
//!
//! Every Monte Carlo routine takes an explicit master seed and derives one
//! counter-based stream per replica, so outputs are bit-reproducible across
//! runs and thread counts.

pub mod bessel;
pub mod cli;
pub mod constants;
pub mod error;
pub mod gff;
pub mod hypercube;
pub mod lattice;
pub mod levelset;
pub mod plot;
pub mod potential;
pub mod renorm;
pub mod rng;
pub mod stats;
pub mod unionfind;

pub use error::{Error, Result};
