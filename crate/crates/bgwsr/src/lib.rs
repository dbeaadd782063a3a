//! Bayesian geographically weighted sparse regression.
//!
//! A spatially varying coefficient model whose coefficients carry a fused
//! lasso prior over adjacent locations, with the adjacency bandwidth either
//! shared or sampled per location by Metropolis-Hastings. The crate also
//! ships frequentist GWR and Bayesian GWR baselines, a synthetic scenario
//! generator, and a replication benchmark harness.
//!
//! See the `book/` directory for a guided tour; the chapters double as doc
//! tests.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod io;
pub mod prediction;
pub mod rng;
pub mod sampler;
pub mod scenario;
pub mod spatial;

mod book;

pub use error::{Error, Result};
