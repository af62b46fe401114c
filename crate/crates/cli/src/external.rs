//! Profiles read from a table of jets.

use std::path::Path;

use warped_soliton::profile::{ProfileJet, ScalarProfile};
use warped_soliton::{Error, Interval, ProfileTriple, Result};

use crate::error::CliError;

pub const COLUMNS: [&str; 10] = ["xi", "phi", "dphi", "ddphi", "f", "df", "ddf", "h", "dh", "ddh"];

/// Relative distance at which a query is matched to a table row.
pub const MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct JetTable {
    xi: Vec<f64>,
    jets: Vec<[ProfileJet<f64>; 3]>,
}

impl JetTable {
    pub fn from_rows(mut rows: Vec<(f64, [ProfileJet<f64>; 3])>) -> std::result::Result<Self, CliError> {
        if rows.is_empty() {
            return Err(CliError::Config("external profile: table has no rows".into()));
        }
        if rows.iter().any(|(x, _)| !x.is_finite()) {
            return Err(CliError::Config("external profile: non-finite xi".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CliError::Config("external profile: duplicate xi".into()));
        }
        let (xi, jets) = rows.into_iter().unzip();
        Ok(Self { xi, jets })
    }

    /// Reads a CSV with the columns in [`COLUMNS`], in any order; other columns are ignored.
    pub fn read_csv(path: &Path) -> std::result::Result<Self, CliError> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| CliError::Config(format!("external profile {}: {e}", path.display())))?;
        let headers = reader.headers()?.clone();
        let mut index = [0usize; 10];
        for (slot, name) in index.iter_mut().zip(COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| CliError::Config(format!("external profile {}: missing column `{name}`", path.display())))?;
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let mut v = [0.0; 10];
            for (out, &col) in v.iter_mut().zip(&index) {
                let cell = record.get(col).unwrap_or("").trim();
                *out = cell.parse().map_err(|_| {
                    CliError::Config(format!("external profile {}: row {}: cannot parse `{cell}`", path.display(), line + 1))
                })?;
            }
            let jet = |k: usize| ProfileJet::new(v[k], v[k + 1], v[k + 2]);
            rows.push((v[0], [jet(1), jet(4), jet(7)]));
        }
        Self::from_rows(rows)
    }

    pub fn xis(&self) -> &[f64] {
        &self.xi
    }

    fn row(&self, xi: f64) -> Option<usize> {
        let i = self.xi.partition_point(|&x| x < xi);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.xi.len())
            .find(|&j| (self.xi[j] - xi).abs() <= MATCH_TOLERANCE * xi.abs().max(1.0))
    }

    pub fn triple(self) -> ProfileTriple<f64> {
        let table = std::sync::Arc::new(self);
        let part = |which| -> std::sync::Arc<dyn ScalarProfile<f64>> { std::sync::Arc::new(Column { table: table.clone(), which }) };
        ProfileTriple::new(part(0), part(1), part(2), Interval::whole_line())
    }
}

struct Column {
    table: std::sync::Arc<JetTable>,
    which: usize,
}

impl ScalarProfile<f64> for Column {
    fn eval(&self, xi: f64) -> Result<ProfileJet<f64>> {
        self.table
            .row(xi)
            .map(|i| self.table.jets[i][self.which])
            .ok_or_else(|| Error::Domain(format!("no table row at xi = {xi}")))
    }

    fn contains(&self, xi: f64) -> bool {
        self.table.row(xi).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_matches_nearby_rows_only() {
        let j = ProfileJet::new(1.0, 0.0, 0.0);
        let t = JetTable::from_rows(vec![(0.5, [j; 3]), (-1.0, [j; 3]), (2.0, [j; 3])]).unwrap();
        assert_eq!(t.xis(), &[-1.0, 0.5, 2.0]);
        assert_eq!(t.row(0.5 + 1e-12), Some(1));
        assert_eq!(t.row(2.0 - 1e-12), Some(2));
        assert_eq!(t.row(0.6), None);
        let tr = t.triple();
        assert!(tr.eval(-1.0).is_ok());
        assert!(tr.eval(0.0).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let j = ProfileJet::new(1.0, 0.0, 0.0);
        assert!(JetTable::from_rows(vec![(0.5, [j; 3]), (0.5, [j; 3])]).is_err());
        assert!(JetTable::from_rows(vec![]).is_err());
    }
}
