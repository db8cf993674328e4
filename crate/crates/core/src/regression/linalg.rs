//! Cholesky factorization for the small symmetric systems of the fitter
//! (at most a handful of predictors).

/// Lower-triangular factor of a symmetric positive-definite matrix, stored
/// row-major.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

/// Pivot `column` was not positive: that column is (numerically) a linear
/// combination of the earlier ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct NotPositiveDefinite {
    pub column: usize,
}

impl Cholesky {
    /// Factors `a` (row-major `n x n`). A pivot fails when it drops below
    /// `tol` times the original diagonal entry.
    pub fn factor(a: &[f64], n: usize, tol: f64) -> Result<Self, NotPositiveDefinite> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > tol * a[j * n + j].abs()) || d <= 0.0 {
                return Err(NotPositiveDefinite { column: j });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }

    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }

    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let inv = self.inverse();
        (0..self.n).map(|i| inv[i * self.n + i]).collect()
    }
}

/// Coefficients expressing column `j` of the Gram matrix `a` through columns
/// `0..j`, i.e. the solution of `a[..j, ..j] c = a[..j, j]`. Used to name the
/// columns a dependent column is built from.
pub(crate) fn dependence(a: &[f64], n: usize, j: usize) -> Vec<f64> {
    if j == 0 {
        return Vec::new();
    }
    let sub: Vec<f64> = (0..j)
        .flat_map(|r| (0..j).map(move |c| (r, c)))
        .map(|(r, c)| a[r * n + c])
        .collect();
    let rhs: Vec<f64> = (0..j).map(|r| a[r * n + j]).collect();
    match Cholesky::factor(&sub, j, 1e-12) {
        Ok(ch) => ch.solve(&rhs),
        Err(_) => vec![f64::NAN; j],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_inverts() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let ch = Cholesky::factor(&a, 3, 1e-12).unwrap();
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let row: f64 = (0..3).map(|k| a[i * 3 + k] * x[k]).sum();
            assert!((row - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        let inv = ch.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - f64::from(u8::from(i == j))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn detects_dependent_column() {
        // third column = first + second
        let a = [1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0];
        let err = Cholesky::factor(&a, 3, 1e-10).unwrap_err();
        assert_eq!(err.column, 2);
        let c = dependence(&a, 3, 2);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
    }
}
