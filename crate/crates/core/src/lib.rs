//! Fluctuation theorems for heat exchange between two initially
//! correlated quantum systems.

pub mod bayesnet;
pub mod cli;
pub mod qcore;
pub mod qubit_example;
pub mod system;
pub mod thermo;
