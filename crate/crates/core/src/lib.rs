//! Multi-robot collective perception: a deterministic simulator and benchmark
//! harness for comparing decision mechanisms (voter model, majority rule, two
//! hand-coded rules and evolved networks), with neuroevolution and Shapley
//! analysis of the evolved networks.

pub mod analysis;
pub mod comms;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod mechanisms;
pub mod robot;
pub mod simulation;
pub mod strategy;
pub mod world;

pub use error::{Error, Result};
