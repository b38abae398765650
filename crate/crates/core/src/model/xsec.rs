use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::table::{parse_two_column_csv, read_two_column_csv, CsvTable, Table1D};
use super::ModelError;
use crate::units::EV;

pub const CROSS_SECTION_HEADER: [&str; 2] = ["energy_eV", "sigma_m2"];

/// Collision processes with the background gas. Coulomb and ion–ion
/// collisions have no representation on purpose: they are never sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionProcess {
    Elastic,
    Ionization,
    Excitation,
    ChargeExchange,
}

impl CollisionProcess {
    pub const ALL: [CollisionProcess; 4] = [
        CollisionProcess::Elastic,
        CollisionProcess::Ionization,
        CollisionProcess::Excitation,
        CollisionProcess::ChargeExchange,
    ];

    pub fn is_inelastic(self) -> bool {
        matches!(self, CollisionProcess::Ionization | CollisionProcess::Excitation)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CollisionProcess::Elastic => "elastic",
            CollisionProcess::Ionization => "ionization",
            CollisionProcess::Excitation => "excitation",
            CollisionProcess::ChargeExchange => "charge-exchange",
        }
    }
}

impl fmt::Display for CollisionProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CollisionProcess {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "elastic" => Ok(CollisionProcess::Elastic),
            "ionization" | "ionisation" => Ok(CollisionProcess::Ionization),
            "excitation" => Ok(CollisionProcess::Excitation),
            "charge-exchange" | "cx" => Ok(CollisionProcess::ChargeExchange),
            other => Err(ModelError::UnsupportedProcess(other.to_string())),
        }
    }
}

/// Total cross section of one process as a function of projectile energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionTable {
    pub process: CollisionProcess,
    pub projectile: String,
    pub target: String,
    /// eV; zero for elastic and charge exchange.
    pub threshold_ev: f64,
    table: Table1D,
}

impl CrossSectionTable {
    /// `samples` are `(energy eV, σ m²)`.
    pub fn new(
        process: CollisionProcess,
        projectile: impl Into<String>,
        target: impl Into<String>,
        samples: Vec<(f64, f64)>,
        threshold_ev: Option<f64>,
    ) -> Result<Self, ModelError> {
        let table = Table1D::new(samples)?.non_negative()?;
        let threshold_ev = match (process.is_inelastic(), threshold_ev) {
            (false, _) => 0.0,
            (true, Some(t)) => t,
            (true, None) => table.xs()[0],
        };
        if !(threshold_ev >= 0.0) {
            return Err(ModelError::Table(format!("threshold must be non-negative, got {threshold_ev}")));
        }
        if let Some((e, s)) = table.pairs().find(|&(e, s)| e < threshold_ev && s > 0.0) {
            return Err(ModelError::Table(format!(
                "{process}: sigma = {s} at {e} eV lies below the {threshold_ev} eV threshold"
            )));
        }
        Ok(CrossSectionTable { process, projectile: projectile.into(), target: target.into(), threshold_ev, table })
    }

    pub fn from_csv_str(text: &str, process: CollisionProcess) -> Result<Self, ModelError> {
        Self::from_csv(parse_two_column_csv(text, CROSS_SECTION_HEADER)?, process)
    }

    fn from_csv(csv: CsvTable, process: CollisionProcess) -> Result<Self, ModelError> {
        if let Some(p) = csv.directive("process") {
            let declared: CollisionProcess = p.parse()?;
            if declared != process {
                return Err(ModelError::Table(format!("file declares process {declared}, requested {process}")));
            }
        }
        let threshold = csv
            .directive("threshold_eV")
            .map(|t| t.parse::<f64>().map_err(|e| ModelError::Parse(format!("threshold_eV: {e}"))))
            .transpose()?;
        let projectile = csv.directive("projectile").unwrap_or("e").to_string();
        let target = csv.directive("target").unwrap_or("Ar").to_string();
        Self::new(process, projectile, target, csv.rows, threshold)
    }

    /// σ in m² at projectile energy `energy_ev`.
    pub fn sigma(&self, energy_ev: f64) -> f64 {
        if self.process.is_inelastic() && energy_ev < self.threshold_ev {
            return 0.0;
        }
        self.table.eval(energy_ev)
    }

    /// Threshold in joules.
    pub fn threshold_j(&self) -> f64 {
        self.threshold_ev * EV
    }

    pub fn table(&self) -> &Table1D {
        &self.table
    }

    pub fn max_sigma(&self) -> f64 {
        self.table.max_y()
    }
}

/// Loads a cross-section CSV (`energy_eV,sigma_m2`, `#` comments). Optional
/// comment directives: `threshold_eV`, `projectile`, `target`, `process`.
pub fn load_cross_sections(path: &Path, process: CollisionProcess) -> Result<CrossSectionTable, ModelError> {
    CrossSectionTable::from_csv(read_two_column_csv(path, CROSS_SECTION_HEADER)?, process)
}

#[cfg(test)]
mod tests {
    use super::*;

    const AR_IONIZATION: &str = include_str!("../../../../data/cross_sections/e_ar_ionization.csv");

    #[test]
    fn midpoint_and_clamping() {
        let t = CrossSectionTable::new(CollisionProcess::Elastic, "e", "Ar", vec![(10.0, 1e-20), (100.0, 2e-20)], None)
            .unwrap();
        assert!((t.sigma(55.0) - 1.5e-20).abs() < 1e-34);
        assert_eq!(t.sigma(5.0), 1e-20);
    }

    #[test]
    fn ionization_threshold_from_file() {
        let t = CrossSectionTable::from_csv_str(AR_IONIZATION, CollisionProcess::Ionization).unwrap();
        // the threshold is declared in the file itself
        let declared: f64 = AR_IONIZATION
            .lines()
            .find_map(|l| l.strip_prefix("# threshold_eV:"))
            .unwrap()
            .trim()
            .parse()
            .unwrap();
        assert_eq!(t.threshold_ev, declared);
        assert_eq!(t.threshold_ev, 15.76);
        assert_eq!(t.sigma(10.0), 0.0);
        assert!(t.sigma(50.0) > 0.0);
    }

    #[test]
    fn rejects_invalid_tables() {
        let non_monotone = "energy_eV,sigma_m2\n10,1e-20\n5,1e-20\n";
        let negative = "energy_eV,sigma_m2\n10,-1e-20\n";
        let empty = "energy_eV,sigma_m2\n";
        for text in [non_monotone, negative, empty] {
            assert!(CrossSectionTable::from_csv_str(text, CollisionProcess::Elastic).is_err());
        }
        let below_thr = "# threshold_eV: 15\nenergy_eV,sigma_m2\n10,1e-21\n20,1e-20\n";
        assert!(CrossSectionTable::from_csv_str(below_thr, CollisionProcess::Ionization).is_err());
    }

    #[test]
    fn coulomb_process_is_not_representable() {
        assert!("coulomb".parse::<CollisionProcess>().is_err());
        assert!("ion-ion".parse::<CollisionProcess>().is_err());
        assert_eq!("charge_exchange".parse::<CollisionProcess>().unwrap(), CollisionProcess::ChargeExchange);
    }

    #[test]
    fn default_threshold_is_first_sample_for_inelastic() {
        let t = CrossSectionTable::new(CollisionProcess::Excitation, "e", "Ar", vec![(11.55, 1e-21), (20.0, 1e-20)], None)
            .unwrap();
        assert_eq!(t.threshold_ev, 11.55);
        assert_eq!(t.sigma(11.0), 0.0);
    }
}
