//! Exact computations with n-fold and infinity-fold vector bundles presented
//! by atlases over finite bases.

pub mod atlas;
pub mod bundle;
pub mod certificate;
pub mod cli;
pub mod corepull;
pub mod corpus;
pub mod cubecat;
pub mod error;
pub mod exactlin;
pub mod format;
pub mod gauge;
pub mod infbundle;
pub mod lift;
pub mod random;
pub mod report;
pub mod split;

pub use error::{Error, Result};
