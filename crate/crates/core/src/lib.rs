//! Quantum finite one-counter automata: construction, well-formedness
//! checks, measure-many and measure-once simulation, and the classical
//! one-counter baselines.

pub mod automaton;
pub mod basis;
pub mod classical;
pub mod cli;
pub mod dynamics;
pub mod transforms;
pub mod wellformed;
pub mod zoo;
