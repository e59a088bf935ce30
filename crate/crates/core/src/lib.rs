pub mod graph;
pub mod linalg;
pub mod models;
pub mod spectral;
pub mod game;
pub mod interventions;
pub mod concentration;
pub mod estimation;
pub mod harness;
