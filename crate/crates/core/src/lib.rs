//! Solvers for cops-and-robber games on graphs.
//!
//! Four game variants are covered: the robber is adversarial or drunk
//! (a uniform random walk), and visible or invisible to the cops.
//! [`reachability`] gives the cop number, [`av`] the adversarial visible
//! capture time, [`dv`] and [`di`] the drunk visible and invisible expected
//! capture times, and [`cov`] their ratio, the cost of visibility, along
//! with the floorplan experiment harness.

pub mod av;
pub mod config;
pub mod cov;
pub mod di;
pub mod dv;
pub mod envgen;
pub mod error;
pub mod graph;
pub mod reachability;

pub use error::{Error, Result};
pub use graph::{Family, Graph};
