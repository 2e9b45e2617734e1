pub mod checks;
pub mod coverage;
pub mod error;
pub mod field;
pub mod generator;
pub mod geometry;
pub mod harness;
pub mod qp;
pub mod safety;
pub mod vehicle;
