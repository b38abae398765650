use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::Vec3;

/// Index of a species in the run's species list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpeciesId(pub u16);

/// Lifecycle of a particle. `Active` particles may become `Thermalized`;
/// `Absorbed` and `Escaped` are terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParticleState {
    Active,
    Thermalized,
    Absorbed,
    Escaped,
}

impl ParticleState {
    fn rank(self) -> u8 {
        match self {
            ParticleState::Active => 0,
            ParticleState::Thermalized => 1,
            ParticleState::Absorbed | ParticleState::Escaped => 2,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.rank() == 2
    }

    pub fn in_flight(self) -> bool {
        !self.is_terminal()
    }
}

/// A (macro-)particle. Position and velocity are stored in Cartesian
/// coordinates with `z` along the chamber axis; [`Particle::cylindrical`]
/// gives `(r, z, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub species: SpeciesId,
    pub position: Vec3,
    pub velocity: Vec3,
    pub weight: f64,
    state: ParticleState,
}

impl Particle {
    pub fn new(species: SpeciesId, position: Vec3, velocity: Vec3, weight: f64) -> Result<Self, ModelError> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(ModelError::InvalidParticle(format!("weight must be positive, got {weight}")));
        }
        if !position.iter().chain(velocity.iter()).all(|c| c.is_finite()) {
            return Err(ModelError::InvalidParticle("non-finite position or velocity".into()));
        }
        Ok(Particle { species, position, velocity, weight, state: ParticleState::Active })
    }

    pub fn state(&self) -> ParticleState {
        self.state
    }

    /// Moves the particle to `next`. Transitions never go backwards.
    pub fn transition(&mut self, next: ParticleState) -> Result<(), ModelError> {
        if next == self.state && !next.is_terminal() {
            return Ok(());
        }
        if next.rank() <= self.state.rank() {
            return Err(ModelError::IllegalTransition { from: self.state, to: next });
        }
        self.state = next;
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.state == ParticleState::Active
    }

    /// `(r, z, θ)` with `r ≥ 0` and `θ ∈ (-π, π]`.
    pub fn cylindrical(&self) -> (f64, f64, f64) {
        let p = &self.position;
        (p.x.hypot(p.y), p.z, p.y.atan2(p.x))
    }

    pub fn radius(&self) -> f64 {
        self.position.x.hypot(self.position.y)
    }

    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        0.5 * mass * self.velocity.norm_squared()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle() -> Particle {
        Particle::new(SpeciesId(0), Vec3::new(3.0, 4.0, 1.0), Vec3::zeros(), 1.0).unwrap()
    }

    #[test]
    fn cylindrical_coordinates() {
        let (r, z, th) = particle().cylindrical();
        assert_eq!(r, 5.0);
        assert_eq!(z, 1.0);
        assert!((th - (4.0f64).atan2(3.0)).abs() < 1e-15);
    }

    #[test]
    fn transitions_are_monotone() {
        let mut p = particle();
        p.transition(ParticleState::Thermalized).unwrap();
        assert!(p.transition(ParticleState::Active).is_err());
        p.transition(ParticleState::Absorbed).unwrap();
        assert!(p.transition(ParticleState::Escaped).is_err());
        assert!(p.transition(ParticleState::Absorbed).is_err());
    }

    #[test]
    fn rejects_non_positive_weight() {
        assert!(Particle::new(SpeciesId(0), Vec3::zeros(), Vec3::zeros(), 0.0).is_err());
        assert!(Particle::new(SpeciesId(0), Vec3::zeros(), Vec3::zeros(), -2.0).is_err());
    }
}
