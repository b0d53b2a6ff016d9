pub mod config;
pub mod figures;
pub mod manifest;
pub mod observables;
pub mod selftest;
pub mod stats;
pub mod sweep;
