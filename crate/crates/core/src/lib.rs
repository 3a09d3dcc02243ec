pub mod benchmarks;
pub mod bits;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod normalization;
pub mod objective;
pub mod refpoints;
pub mod rng;
pub mod sorting;
