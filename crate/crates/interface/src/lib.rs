//! Command-line runner and HTTP service for the taxsim engine.

pub mod api;
pub mod cli;
pub mod error;
pub mod inputs;
pub mod render;
