//! Desk-scale simulator of DC planar-magnetron sputter deposition.
//!
//! The process is split into four stages that can be run alone or chained:
//!
//! * [`plasma`]: charged-particle kinetics (θ-scheme push, Monte Carlo
//!   collisions, secondary emission) or a drift-diffusion fluid model, both
//!   producing the ion impacts on the target;
//! * [`sputter`]: table-driven yield and the energy/angle samplers of the
//!   ejected atoms;
//! * [`transport`]: neutral transport through the background gas with
//!   classical binary collisions on a choice of interatomic potentials;
//! * [`deposition`]: tallies of the arrivals on substrate, walls and shields.
//!
//! [`fields`] holds magnets, sheath and Poisson machinery, [`model`] the
//! shared types and configuration, and [`pipeline`] the stage orchestration.

pub mod deposition;
pub mod fields;
pub mod kinematics;
pub mod model;
pub mod pipeline;
pub mod plasma;
pub mod sputter;
pub mod stats;
pub mod transport;
pub mod units;

pub type Vec3 = nalgebra::Vector3<f64>;
