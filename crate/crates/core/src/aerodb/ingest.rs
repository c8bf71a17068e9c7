use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::keys::CoefficientKey;
use super::uncertainty::{assign, UncertaintyModel};
use super::AeroError;
use crate::gp::Dataset;
use crate::io::Table;

/// Turns a coefficient table into a training set.
///
/// Input columns must be named after the key's signature (`alpha`, `beta`,
/// `delta`), followed by `y` and an optional `sigma`. Increment tables must be
/// exactly zero at zero deflection.
pub fn ingest_table(key: &CoefficientKey, table: &Table, model: UncertaintyModel) -> Result<Dataset, AeroError> {
    let expected: Vec<&str> = key.signature().iter().map(|i| i.column()).collect();
    let sigma = table.column_index("sigma");
    let y = table.column_index("y");
    let inputs: Vec<&str> = table
        .headers
        .iter()
        .enumerate()
        .filter(|(c, _)| Some(*c) != sigma && Some(*c) != y)
        .map(|(_, h)| h.as_str())
        .collect();
    let Some(y) = y.filter(|_| inputs == expected) else {
        return Err(AeroError::Columns {
            key: key.to_string(),
            expected: format!("{},y[,sigma]", expected.join(",")),
            found: table.headers.join(","),
        });
    };
    let cols: Vec<usize> = expected.iter().map(|n| table.column_index(n).expect("checked")).collect();
    let n = table.rows.len();
    let x = DMatrix::from_fn(n, cols.len(), |i, j| table.rows[i][cols[j]]);
    let out = DVector::from_iterator(n, table.rows.iter().map(|r| r[y]));
    if let Some(d) = key.delta_column() {
        if let Some(row) = (0..n).find(|&i| x[(i, d)] == 0.0 && out[i] != 0.0) {
            return Err(AeroError::NonzeroBaselineIncrement {
                key: key.to_string(),
                row: row + 1,
                value: out[row],
            });
        }
    }
    let explicit = sigma.map(|s| table.column(s));
    let sd = assign(model, &x, &out, key.delta_column(), explicit.as_deref())?;
    Dataset::new(x, out, DVector::from_vec(sd)).map_err(|e| AeroError::model(key, e))
}

/// Reads and ingests one CSV file.
pub fn ingest_file(key: &CoefficientKey, path: &Path, model: UncertaintyModel) -> Result<Dataset, crate::Error> {
    let table = crate::io::read_table(path)?;
    Ok(ingest_table(key, &table, model)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::read_table_from;

    fn table(text: &str) -> Table {
        read_table_from(text.as_bytes(), Path::new("mem")).unwrap()
    }

    #[test]
    fn columns_must_match_signature() {
        let k: CoefficientKey = "CL".parse().unwrap();
        let ok = ingest_table(&k, &table("alpha,beta,y\n0,0,0.2\n2,0,0.4\n"), UncertaintyModel::Wt).unwrap();
        assert_eq!(ok.len(), 2);
        assert!((ok.noise_sd()[0] - 0.05 * 0.2).abs() < 1e-15);
        let err = ingest_table(&k, &table("alpha,y\n0,0.2\n"), UncertaintyModel::Wt).unwrap_err();
        assert!(matches!(err, AeroError::Columns { .. }));
    }

    #[test]
    fn increments_vanish_at_zero_deflection() {
        let k: CoefficientKey = "Cl_aileron".parse().unwrap();
        let good = "alpha,beta,delta,y\n0,0,0,0\n0,0,10,0.01\n";
        assert!(ingest_table(&k, &table(good), UncertaintyModel::Avl).is_ok());
        let bad = "alpha,beta,delta,y\n0,0,0,0.001\n0,0,10,0.01\n";
        assert!(matches!(
            ingest_table(&k, &table(bad), UncertaintyModel::Avl),
            Err(AeroError::NonzeroBaselineIncrement { row: 1, .. })
        ));
    }

    #[test]
    fn explicit_sigma_column() {
        let k: CoefficientKey = "Clp".parse().unwrap();
        let d = ingest_table(&k, &table("alpha,y,sigma\n0,-0.5,0.01\n"), UncertaintyModel::Explicit).unwrap();
        assert_eq!(d.noise_sd()[0], 0.01);
        assert!(ingest_table(&k, &table("alpha,y\n0,-0.5\n"), UncertaintyModel::Explicit).is_err());
    }
}
