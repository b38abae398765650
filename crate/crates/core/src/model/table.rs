use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Piecewise-linear table with constant extrapolation beyond both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table1D {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if pairs.is_empty() {
            return Err(ModelError::Table("table is empty".into()));
        }
        for (i, w) in pairs.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::Table(format!(
                    "abscissae must be strictly increasing (row {}: {} after {})",
                    i + 2,
                    w[1].0,
                    w[0].0
                )));
            }
        }
        if let Some((x, y)) = pairs.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(ModelError::Table(format!("non-finite entry ({x}, {y})")));
        }
        let (xs, ys) = pairs.into_iter().unzip();
        Ok(Table1D { xs, ys })
    }

    pub fn non_negative(self) -> Result<Self, ModelError> {
        match self.ys.iter().position(|&y| y < 0.0) {
            Some(i) => Err(ModelError::Table(format!("negative value {} at x = {}", self.ys[i], self.xs[i]))),
            None => Ok(self),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // first index with xs[i] > x; 1 <= i <= n-1
        let i = self.xs.partition_point(|&xi| xi <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        self.ys[i - 1] + t * (self.ys[i] - self.ys[i - 1])
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn max_y(&self) -> f64 {
        self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }
}

/// Contents of a two-column CSV table: the data rows plus any
/// `# key: value` (or `# key = value`) directives found in comment lines.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub rows: Vec<(f64, f64)>,
    pub directives: Vec<(String, String)>,
}

impl CsvTable {
    pub fn directive(&self, key: &str) -> Option<&str> {
        self.directives.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Parses a two-column CSV whose header must equal `header`.
pub fn parse_two_column_csv(text: &str, header: [&str; 2]) -> Result<CsvTable, ModelError> {
    let mut directives = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':').or_else(|| rest.split_once('=')) {
                directives.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| ModelError::Parse(e.to_string()))?.clone();
    if found.len() != 2 || found.get(0) != Some(header[0]) || found.get(1) != Some(header[1]) {
        return Err(ModelError::Parse(format!(
            "expected header `{},{}`, found `{}`",
            header[0],
            header[1],
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| ModelError::Parse(e.to_string()))?;
        let num = |j: usize| -> Result<f64, ModelError> {
            rec.get(j)
                .ok_or_else(|| ModelError::Parse(format!("row {}: missing column {}", i + 1, j + 1)))?
                .parse::<f64>()
                .map_err(|e| ModelError::Parse(format!("row {}: {e}", i + 1)))
        };
        rows.push((num(0)?, num(1)?));
    }
    Ok(CsvTable { rows, directives })
}

pub fn read_two_column_csv(path: &Path, header: [&str; 2]) -> Result<CsvTable, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io { path: path.to_path_buf(), source: e })?;
    parse_two_column_csv(&text, header)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interpolation_and_clamping() {
        let t = Table1D::new(vec![(10.0, 1e-20), (100.0, 2e-20)]).unwrap();
        assert!((t.eval(55.0) - 1.5e-20).abs() < 1e-35);
        assert_eq!(t.eval(5.0), 1e-20);
        assert_eq!(t.eval(1e4), 2e-20);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Table1D::new(vec![]).is_err());
        assert!(Table1D::new(vec![(1.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(Table1D::new(vec![(2.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(Table1D::new(vec![(1.0, -1.0)]).unwrap().non_negative().is_err());
    }

    #[test]
    fn csv_header_comments_and_directives() {
        let text = "# threshold_eV: 15.76\n# target = Ar\nenergy_eV,sigma_m2\n15.76,0\n# inline comment\n20, 1e-21\n";
        let t = parse_two_column_csv(text, ["energy_eV", "sigma_m2"]).unwrap();
        assert_eq!(t.rows, vec![(15.76, 0.0), (20.0, 1e-21)]);
        assert_eq!(t.directive("threshold_eV"), Some("15.76"));
        assert_eq!(t.directive("target"), Some("Ar"));
        assert!(parse_two_column_csv("a,b\n1,2\n", ["energy_eV", "sigma_m2"]).is_err());
        assert!(parse_two_column_csv("energy_eV,sigma_m2\n1,x\n", ["energy_eV", "sigma_m2"]).is_err());
    }

    proptest! {
        #[test]
        fn exact_at_samples_and_bounded_between(
            ys in proptest::collection::vec(-10.0f64..10.0, 2..20),
            frac in 0.0f64..1.0,
        ) {
            let pairs: Vec<_> = ys.iter().enumerate().map(|(i, &y)| (i as f64 * 1.5, y)).collect();
            let t = Table1D::new(pairs.clone()).unwrap();
            for &(x, y) in &pairs {
                prop_assert_eq!(t.eval(x), y);
            }
            for w in pairs.windows(2) {
                let x = w[0].0 + frac * (w[1].0 - w[0].0);
                let v = t.eval(x);
                let (lo, hi) = (w[0].1.min(w[1].1), w[0].1.max(w[1].1));
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
