//! Physics-informed extreme learning machine (PIELM) for the lateral response
//! of a pile to tunnelling-induced ground movement, with a finite-difference
//! benchmark and study drivers.

pub mod banded;
pub mod config;
pub mod elm;
pub mod error;
pub mod experiments;
pub mod fdm;
pub mod linalg;
pub mod physics;
pub mod pielm;
pub mod profile;

pub use error::{Error, Result};
