//! Shared domain types: species, particles, background gas, cross
//! sections, random streams and the run configuration.

mod config;
mod gas;
mod particle;
mod records;
mod rng;
mod species;
mod table;
mod xsec;

use std::path::PathBuf;

use thiserror::Error;

pub use config::*;
pub use gas::{Chamber, GasState, TemperatureField, TEMPERATURE_WINDOW_K};
pub use particle::{Particle, ParticleState, SpeciesId};
pub use records::{Arrival, EmittedAtom, IonImpact};
pub use rng::{derive_seed, RngStream};
pub use species::{Species, SpeciesKind};
pub use table::{parse_two_column_csv, read_two_column_csv, CsvTable, Table1D};
pub use xsec::{load_cross_sections, CollisionProcess, CrossSectionTable, CROSS_SECTION_HEADER};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("invalid table: {0}")]
    Table(String),
    #[error("unsupported collision process `{0}`")]
    UnsupportedProcess(String),
    #[error("invalid species `{name}`: {reason}")]
    InvalidSpecies { name: String, reason: String },
    #[error("invalid particle: {0}")]
    InvalidParticle(String),
    #[error("illegal particle state transition {from:?} -> {to:?}")]
    IllegalTransition { from: ParticleState, to: ParticleState },
    #[error("point ({}, {}, {}) lies outside the chamber", .0.x, .0.y, .0.z)]
    OutsideChamber(crate::Vec3),
}

impl ModelError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Invalid { field: field.into(), reason: reason.into() }
    }
}
