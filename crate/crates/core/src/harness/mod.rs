//! File formats, community detection, experiment sweeps and plotting.

pub mod community;
pub mod config;
pub mod experiment;
pub mod io;
pub mod plot;
