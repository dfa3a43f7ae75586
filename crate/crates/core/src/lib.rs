//! Euclidean uncapacitated facility location: LP rounding with clustering,
//! the JMS greedy, exact oracles and numeric checkers for the analysis.

pub mod augmentation;
pub mod clustering;
pub mod conditions;
pub mod error;
pub mod game;
pub mod generators;
pub mod geometry;
pub mod instance;
pub mod jms;
pub mod lp;
pub mod params;
pub mod rounding;
pub mod scalar;
pub mod verification;

pub use error::{Result, UflError};
pub use geometry::{distance, Point};
pub use instance::{Client, Facility, Instance};
pub use params::ParamSet;
pub use scalar::Scalar;

pub type Point32 = Point<f32>;
pub type Point64 = Point<f64>;
pub type Instance32 = Instance<f32>;
pub type Instance64 = Instance<f64>;
