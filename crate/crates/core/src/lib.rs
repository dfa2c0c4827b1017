//! Active target tracking with homotopic information gain.

pub mod topology;
pub mod trajectory;
pub mod vomp;
pub mod gmm;
pub mod gain;
pub mod planner;
pub mod harness;
