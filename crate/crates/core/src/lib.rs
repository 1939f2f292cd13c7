pub mod analysis;
pub mod beltrami;
pub mod cli;
pub mod config;
pub mod constructions;
pub mod equivariant;
pub mod error;
pub mod fixtures;
pub mod group;
pub mod hull;
pub mod mobius;
pub mod scalar;
pub mod schottky;
pub mod util;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SpherePoint = mobius::SpherePoint<f64>;
pub type Cap = mobius::Cap<f64>;
pub type MobiusMap = mobius::MobiusMap<f64>;
pub type ChartBall = mobius::ChartBall<f64>;
pub type SchottkySet = schottky::SchottkySet<f64>;
pub type Region = schottky::Region<f64>;
pub type Ambient = schottky::Ambient<f64>;
pub type OrbitBall = group::OrbitBall<f64>;
pub type Coding = group::Coding<f64>;
pub type SetCopy = group::SetCopy<f64>;
pub type Hyperplane = hull::Hyperplane<f64>;
pub type HullDescription = hull::HullDescription<f64>;
