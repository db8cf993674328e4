//! Inverse-correlation diagonal (variance inflation factors).

use serde::Serialize;

use super::linalg::Cholesky;
use super::Design;
use crate::{Error, Result};

/// Correlations above this in absolute value are treated as exact.
pub const SINGULAR_R: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollinearityReport {
    pub names: Vec<String>,
    pub diagonal: Vec<f64>,
}

impl CollinearityReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.diagonal[j])
    }
}

/// Pearson correlation matrix of the design columns (row-major).
pub fn correlation_matrix(design: &Design) -> Result<Vec<f64>> {
    let p = design.cols();
    let n = design.rows() as f64;
    let means: Vec<f64> = (0..p).map(|j| design.column(j).sum::<f64>() / n).collect();
    let mut cov = vec![0.0; p * p];
    for i in 0..design.rows() {
        let row = design.row(i);
        for a in 0..p {
            let da = row[a] - means[a];
            for b in a..p {
                cov[a * p + b] += da * (row[b] - means[b]);
            }
        }
    }
    let sd: Vec<f64> = (0..p).map(|j| cov[j * p + j].sqrt()).collect();
    if let Some(j) = (0..p).find(|&j| !(sd[j] > 0.0)) {
        return Err(Error::ConstantPredictor(design.names[j].clone()));
    }
    let mut corr = vec![0.0; p * p];
    for a in 0..p {
        corr[a * p + a] = 1.0;
        for b in a + 1..p {
            let r = (cov[a * p + b] / (sd[a] * sd[b])).clamp(-1.0, 1.0);
            corr[a * p + b] = r;
            corr[b * p + a] = r;
        }
    }
    Ok(corr)
}

pub fn collinearity_diagonal(design: &Design) -> Result<CollinearityReport> {
    let p = design.cols();
    if p < 2 {
        return Err(Error::TooFewPredictors(p));
    }
    let corr = correlation_matrix(design)?;
    let worst = (0..p)
        .flat_map(|a| (a + 1..p).map(move |b| (a, b)))
        .max_by(|&(a, b), &(c, d)| corr[a * p + b].abs().total_cmp(&corr[c * p + d].abs()))
        .expect("at least one pair");
    let singular = || Error::SingularCorrelation {
        first: design.names[worst.0].clone(),
        second: design.names[worst.1].clone(),
        r: corr[worst.0 * p + worst.1],
    };
    if corr[worst.0 * p + worst.1].abs() > SINGULAR_R {
        return Err(singular());
    }
    let chol = Cholesky::factor(&corr, p, 1e-12).map_err(|_| singular())?;
    Ok(CollinearityReport {
        names: design.names.clone(),
        diagonal: chol.inverse_diagonal(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(cols: &[Vec<f64>]) -> Design {
        let n = cols[0].len();
        let x = (0..n).flat_map(|i| cols.iter().map(move |c| c[i])).collect();
        let names = (0..cols.len()).map(|j| format!("x{j}")).collect();
        Design::new(names, x, vec![false; n])
    }

    #[test]
    fn orthogonal_columns() {
        let a = vec![1.0, -1.0, 1.0, -1.0];
        let b = vec![1.0, 1.0, -1.0, -1.0];
        let r = collinearity_diagonal(&design(&[a, b])).unwrap();
        for v in r.diagonal {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_column_closed_form() {
        // VIF = 1 / (1 - r^2) for two predictors.
        let a: Vec<f64> = (0..50).map(|i| f64::from(i % 7)).collect();
        let b: Vec<f64> = (0..50).map(|i| f64::from(i % 7) + f64::from(i % 3)).collect();
        let d = design(&[a, b]);
        let corr = correlation_matrix(&d).unwrap();
        let r = collinearity_diagonal(&d).unwrap();
        let expect = 1.0 / (1.0 - corr[1] * corr[1]);
        assert!((r.diagonal[0] - expect).abs() < 1e-10);
        assert!(r.diagonal.iter().all(|&v| v >= 1.0));
    }

    #[test]
    fn duplicate_is_singular() {
        let a: Vec<f64> = (0..10).map(f64::from).collect();
        let doubled = a.iter().map(|v| v * 2.0).collect();
        let err = collinearity_diagonal(&design(&[a, doubled])).unwrap_err();
        assert!(matches!(err, Error::SingularCorrelation { ref first, ref second, .. } if first == "x0" && second == "x1"));
    }

    #[test]
    fn constant_and_too_few() {
        let a: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(matches!(
            collinearity_diagonal(&design(&[a.clone(), vec![2.0; 10]])),
            Err(Error::ConstantPredictor(ref n)) if n == "x1"
        ));
        assert!(matches!(collinearity_diagonal(&design(&[a])), Err(Error::TooFewPredictors(1))));
    }
}
