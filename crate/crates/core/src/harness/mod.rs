//! Scenario configuration, the simulation loop and its logs.

pub mod config;
pub mod log;
pub mod plots;
pub mod sim;

pub use config::{Fidelity, Mode, SimConfig};
pub use log::SimLog;
pub use sim::{run, Simulation};
