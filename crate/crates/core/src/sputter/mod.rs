//! Target emission: table-driven sputtering yield and the energy and
//! direction samplers of the ejected atoms.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    derive_seed, read_two_column_csv, EmittedAtom, EnergySampler, IonImpact, ModelError, RngStream, SimConfig, Species,
    Table1D,
};
use crate::units::speed_from_ev;
use crate::Vec3;

pub const YIELD_HEADER: [&str; 2] = ["ion_energy_eV", "yield"];
pub const ANGLE_HEADER: [&str; 2] = ["angle_deg", "multiplier"];

#[derive(Debug, Error)]
pub enum SputterError {
    #[error("emission model: {0}")]
    Invalid(String),
    #[error("impact at z = {z} is not on the target plane z = {target}")]
    OffTarget { z: f64, target: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Maximum fraction of the ion energy transferable to a target atom at rest,
/// `κ = 4 M_ion M_atom / (M_ion + M_atom)²`.
pub fn kappa(m_ion: f64, m_atom: f64) -> f64 {
    4.0 * m_ion * m_atom / ((m_ion + m_atom) * (m_ion + m_atom))
}

/// Target material and the samplers built on it. Energies in eV.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionModel {
    pub target: Species,
    pub binding_energy: f64,
    yields: Table1D,
    /// incidence angle (deg) → multiplier
    angle: Option<Table1D>,
    pub kappa: f64,
    pub sampler: EnergySampler,
}

impl EmissionModel {
    pub fn new(
        target: Species,
        ion_mass: f64,
        binding_energy: f64,
        yields: Table1D,
        angle: Option<Table1D>,
    ) -> Result<Self, SputterError> {
        if !(binding_energy > 0.0 && binding_energy.is_finite()) {
            return Err(SputterError::Invalid(format!("binding energy must be positive, got {binding_energy}")));
        }
        let yields = yields.non_negative()?;
        let angle = angle.map(Table1D::non_negative).transpose()?;
        Ok(EmissionModel {
            kappa: kappa(ion_mass, target.mass),
            target,
            binding_energy,
            yields,
            angle,
            sampler: EnergySampler::InverseCdf,
        })
    }

    pub fn with_sampler(mut self, sampler: EnergySampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self, SputterError> {
        let s = &cfg.sputter;
        let table = |path: &Path, header| -> Result<Table1D, SputterError> {
            Ok(Table1D::new(read_two_column_csv(path, header)?.rows)?)
        };
        let yields = table(&s.yield_table, YIELD_HEADER)?;
        let angle = s.angle_table.as_deref().map(|p| table(p, ANGLE_HEADER)).transpose()?;
        Ok(EmissionModel::new(s.target.sputtered(), cfg.gas.element.mass(), s.binding_energy, yields, angle)?
            .with_sampler(s.energy_sampler))
    }

    /// Expected number of sputtered atoms per incident ion of `energy` (eV)
    /// arriving at `angle` (rad) from the normal.
    pub fn yield_lookup(&self, energy: f64, angle: f64) -> f64 {
        let f = self.angle.as_ref().map_or(1.0, |t| t.eval(angle.to_degrees()));
        self.yields.eval(energy) * f
    }

    /// Unnormalised `E/(E+E_b)²` (C = 1).
    pub fn thompson_density(&self, e: f64) -> f64 {
        if e <= 0.0 {
            return 0.0;
        }
        e / ((e + self.binding_energy) * (e + self.binding_energy))
    }

    /// `∫₀^E x/(x+E_b)² dx`, the normaliser of the density above.
    pub fn thompson_integral(&self, e: f64) -> f64 {
        let b = self.binding_energy;
        if e <= 0.0 {
            return 0.0;
        }
        ((e + b) / b).ln() + b / (e + b) - 1.0
    }

    /// `a = (κE_bom + E_b)/(κE_bom)`
    fn a(&self, e_bom: f64) -> f64 {
        let k = self.kappa * e_bom;
        (k + self.binding_energy) / k
    }

    /// Starting energy of an emitted atom from the closed-form inverse with
    /// cutoff `κ E_bom`.
    pub fn sample_emission_energy(&self, e_bom: f64, xi: f64) -> f64 {
        let s = xi.sqrt();
        s * self.binding_energy / (self.a(e_bom) - s)
    }

    /// Density of [`Self::sample_emission_energy`] for uniform `ξ`:
    /// `2a² E E_b/(E+E_b)³` on `[0, κE_bom]`.
    pub fn sampler_density(&self, e: f64, e_bom: f64) -> f64 {
        if e < 0.0 || e > self.kappa * e_bom {
            return 0.0;
        }
        let a = self.a(e_bom);
        let d = e + self.binding_energy;
        2.0 * a * a * e * self.binding_energy / (d * d * d)
    }

    /// CDF of the same, `a²E²/(E+E_b)²`.
    pub fn sampler_cdf(&self, e: f64, e_bom: f64) -> f64 {
        if e <= 0.0 {
            return 0.0;
        }
        if e >= self.kappa * e_bom {
            return 1.0;
        }
        let a = self.a(e_bom);
        let q = a * e / (e + self.binding_energy);
        q * q
    }

    /// Draw from `E/(E+E_b)²` truncated at `κE_bom` by inverting its CDF.
    pub fn sample_thompson(&self, e_bom: f64, xi: f64) -> f64 {
        let cut = self.kappa * e_bom;
        let target = xi * self.thompson_integral(cut);
        let (mut lo, mut hi) = (0.0, cut);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.thompson_integral(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * cut {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample_energy(&self, e_bom: f64, rng: &mut RngStream) -> f64 {
        let xi = rng.uniform();
        match self.sampler {
            EnergySampler::InverseCdf => self.sample_emission_energy(e_bom, xi),
            EnergySampler::Thompson => self.sample_thompson(e_bom, xi),
        }
    }
}

/// Polar angle `θ₀ = arcsin ξ_θ` and azimuth `φ₀ = 2π ξ_φ`.
pub fn emission_angles(xi_theta: f64, xi_phi: f64) -> (f64, f64) {
    (xi_theta.clamp(0.0, 1.0).asin(), TAU * xi_phi)
}

pub fn sample_emission_angles(rng: &mut RngStream) -> (f64, f64) {
    let a = rng.uniform();
    let b = rng.uniform();
    emission_angles(a, b)
}

/// Unit vector at `(θ, φ)` from `normal`.
pub fn direction_from(normal: &Vec3, theta: f64, phi: f64) -> Vec3 {
    let n = normal.normalize();
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    let (st, ct) = theta.min(FRAC_PI_2).sin_cos();
    n * ct + (e1 * phi.cos() + e2 * phi.sin()) * st
}

/// Emitted atoms for every impact. Impact `i` draws from stream `i` of the
/// sputter seed, so the result does not depend on the worker count.
/// Each impact is tried `samples` times with `weight / samples`.
pub fn emit_atoms(
    model: &EmissionModel,
    impacts: &[IonImpact],
    target_z: f64,
    seed: u64,
    samples: usize,
) -> Result<Vec<EmittedAtom>, SputterError> {
    let samples = samples.max(1);
    let seed = derive_seed(seed, "sputter");
    let per: Vec<Vec<EmittedAtom>> = impacts
        .par_iter()
        .enumerate()
        .map(|(i, imp)| {
            if (imp.z - target_z).abs() > 1e-9 * (1.0 + target_z.abs()) {
                return Err(SputterError::OffTarget { z: imp.z, target: target_z });
            }
            let mut rng = RngStream::new(seed, i as u64);
            let y = model.yield_lookup(imp.energy, imp.angle);
            let weight = imp.weight / samples as f64;
            let mut atoms = Vec::new();
            for _ in 0..samples {
                let whole = y.floor();
                let n = whole as usize + (rng.uniform() < y - whole) as usize;
                for _ in 0..n {
                    let e0 = model.sample_energy(imp.energy, &mut rng);
                    let (theta, phi) = sample_emission_angles(&mut rng);
                    let v = direction_from(&Vec3::z(), theta, phi) * speed_from_ev(e0, model.target.mass);
                    atoms.push(EmittedAtom::new(imp.position(), v, weight));
                }
            }
            Ok(atoms)
        })
        .collect::<Result<_, _>>()?;
    Ok(per.into_iter().flatten().collect())
}
