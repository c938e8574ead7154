//! Auditing toolkit for IFC STEP Physical Files.

pub mod benchkit;
pub mod census;
pub mod cli;
pub mod geomcheck;
pub mod geomgen;
pub mod georef;
pub mod schema;
pub mod spf;
