//! Simulation builtins, the assessment engine and the course content model
//! for the LabScript communication labs.

pub mod commsim;
pub mod exercise;
pub mod grader;
