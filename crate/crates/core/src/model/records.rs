//! Records handed from one stage to the next.

use serde::{Deserialize, Serialize};

use crate::Vec3;

/// An ion striking the target plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonImpact {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// eV
    pub energy: f64,
    /// rad, from the target normal
    pub angle: f64,
    pub weight: f64,
}

impl IonImpact {
    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }
}

/// A sputtered atom leaving the target, or any neutral launched into the
/// transport stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmittedAtom {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub weight: f64,
}

impl EmittedAtom {
    pub fn new(position: Vec3, velocity: Vec3, weight: f64) -> Self {
        EmittedAtom {
            x: position.x,
            y: position.y,
            z: position.z,
            vx: velocity.x,
            vy: velocity.y,
            vz: velocity.z,
            weight,
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(self.vx, self.vy, self.vz)
    }
}

/// An atom absorbed by a chamber surface or removed through the pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    /// index of the emitted atom
    pub atom: u64,
    pub surface: String,
    pub cell: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub weight: f64,
    pub collisions: u32,
    pub thermalized: bool,
}

impl Arrival {
    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(self.vx, self.vy, self.vz)
    }
}
