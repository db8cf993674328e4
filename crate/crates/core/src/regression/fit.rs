//! Maximum-likelihood logistic regression by damped Newton iterations.

use serde::Serialize;
use statrs::function::erf::erfc;

use super::linalg::{dependence, Cholesky};
use super::Design;
use crate::{Error, Result};

/// Two-sided 95% normal quantile used for Wald intervals.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when every score component is below this in absolute value.
    pub score_tolerance: f64,
    /// Or when the log-likelihood changes by less than this, relatively.
    pub relative_loglik_tolerance: f64,
    /// Any |coefficient| above this is treated as separation.
    pub separation_limit: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            score_tolerance: 1e-8,
            relative_loglik_tolerance: 1e-10,
            separation_limit: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub odds_ratio: f64,
    /// 95% Wald interval on the odds-ratio scale.
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub z: f64,
    pub p_value: f64,
}

impl Coefficient {
    fn new(name: String, estimate: f64, std_error: f64) -> Self {
        let z = estimate / std_error;
        Self {
            name,
            estimate,
            std_error,
            odds_ratio: estimate.exp(),
            ci_lower: (estimate - Z95 * std_error).exp(),
            ci_upper: (estimate + Z95 * std_error).exp(),
            z,
            p_value: two_sided_p(z),
        }
    }

    /// 95% Wald interval on the log-odds scale.
    pub fn log_odds_ci(&self) -> (f64, f64) {
        (
            self.estimate - Z95 * self.std_error,
            self.estimate + Z95 * self.std_error,
        )
    }
}

pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub intercept: Coefficient,
    pub coefficients: Vec<Coefficient>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub pseudo_r2: f64,
    pub n_used: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Nagelkerke pseudo-R²: the Cox-Snell statistic rescaled to reach 1 at a
/// perfect fit.
pub fn pseudo_r2(log_likelihood: f64, null_log_likelihood: f64, n: usize) -> f64 {
    let n = n as f64;
    let cox_snell = 1.0 - (2.0 * (null_log_likelihood - log_likelihood) / n).exp();
    let max = 1.0 - (2.0 * null_log_likelihood / n).exp();
    if max <= 0.0 {
        0.0
    } else {
        (cox_snell / max).clamp(0.0, 1.0)
    }
}

/// Log-likelihood of the intercept-only model.
pub fn null_log_likelihood(y: &[bool]) -> f64 {
    let n = y.len() as f64;
    let n1 = y.iter().filter(|&&v| v).count() as f64;
    let n0 = n - n1;
    let mut ll = 0.0;
    if n1 > 0.0 {
        ll += n1 * (n1 / n).ln();
    }
    if n0 > 0.0 {
        ll += n0 * (n0 / n).ln();
    }
    ll
}

/// `ln(1 + e^eta)` without overflow.
fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Design with an intercept column prepended: `(n x (p + 1))` accessor.
struct Augmented<'a> {
    design: &'a Design,
    k: usize,
}

impl Augmented<'_> {
    fn row(&self, i: usize, out: &mut [f64]) {
        out[0] = 1.0;
        let p = self.k - 1;
        out[1..].copy_from_slice(&self.design.x[i * p..(i + 1) * p]);
    }

    fn name(&self, j: usize) -> String {
        if j == 0 {
            "Intercept".into()
        } else {
            self.design.names[j - 1].clone()
        }
    }

    fn log_likelihood(&self, beta: &[f64], row: &mut [f64]) -> f64 {
        let mut ll = 0.0;
        for i in 0..self.design.rows() {
            self.row(i, row);
            let eta = dot(beta, row);
            ll += if self.design.y[i] { eta } else { 0.0 } - softplus(eta);
        }
        ll
    }

    /// Score vector and observed information (row-major).
    fn derivatives(&self, beta: &[f64], row: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let mut score = vec![0.0; k];
        let mut info = vec![0.0; k * k];
        for i in 0..self.design.rows() {
            self.row(i, row);
            let p = sigmoid(dot(beta, row));
            let resid = f64::from(u8::from(self.design.y[i])) - p;
            let w = p * (1.0 - p);
            for a in 0..k {
                score[a] += resid * row[a];
                let wa = w * row[a];
                for b in a..k {
                    info[a * k + b] += wa * row[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                info[a * k + b] = info[b * k + a];
            }
        }
        (score, info)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks the design (with intercept) for full column rank.
pub fn check_rank(design: &Design) -> Result<()> {
    let aug = Augmented {
        design,
        k: design.names.len() + 1,
    };
    let k = aug.k;
    let mut gram = vec![0.0; k * k];
    let mut row = vec![0.0; k];
    for i in 0..design.rows() {
        aug.row(i, &mut row);
        for a in 0..k {
            for b in a..k {
                gram[a * k + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            gram[a * k + b] = gram[b * k + a];
        }
    }
    // Scale to unit diagonal so the pivot tolerance is relative.
    let scale: Vec<f64> = (0..k)
        .map(|j| {
            let d = gram[j * k + j];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let scaled: Vec<f64> = (0..k * k)
        .map(|ix| gram[ix] * scale[ix / k] * scale[ix % k])
        .collect();
    if let Some(j) = (0..k).find(|&j| scale[j] == 0.0) {
        return Err(Error::RankDeficient {
            column: aug.name(j),
            dependent_on: Vec::new(),
        });
    }
    match Cholesky::factor(&scaled, k, 1e-10) {
        Ok(_) => Ok(()),
        Err(e) => {
            let coeffs = dependence(&scaled, k, e.column);
            let dependent_on = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.abs() > 1e-6 || c.is_nan())
                .map(|(j, _)| aug.name(j))
                .collect();
            Err(Error::RankDeficient {
                column: aug.name(e.column),
                dependent_on,
            })
        }
    }
}

/// Fits `P(y = 1) = logistic(b0 + x·b)`. Standard errors come from the
/// inverse observed information at the estimate; p-values from two-sided
/// Wald tests.
pub fn fit_logistic(design: &Design, options: &FitOptions) -> Result<FitResult> {
    check_rank(design)?;
    let k = design.names.len() + 1;
    let aug = Augmented { design, k };
    let n = design.rows();
    let mut row = vec![0.0; k];

    let null_ll = null_log_likelihood(&design.y);
    let ybar = design.y.iter().filter(|&&v| v).count() as f64 / n as f64;
    let mut beta = vec![0.0; k];
    beta[0] = (ybar / (1.0 - ybar)).ln();
    let mut ll = aug.log_likelihood(&beta, &mut row);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        let (score, info) = aug.derivatives(&beta, &mut row);
        if score.iter().all(|g| g.abs() < options.score_tolerance) {
            converged = true;
            break;
        }
        iterations += 1;
        let chol = Cholesky::factor(&info, k, 1e-14).map_err(|e| Error::RankDeficient {
            column: aug.name(e.column),
            dependent_on: Vec::new(),
        })?;
        let step = chol.solve(&score);
        let mut t = 1.0;
        let (next, next_ll) = loop {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let cand_ll = aug.log_likelihood(&cand, &mut row);
            if cand_ll >= ll - 1e-12 * ll.abs() || t < 1e-10 {
                break (cand, cand_ll);
            }
            t *= 0.5;
        };
        if let Some(j) = (1..k).find(|&j| next[j].abs() > options.separation_limit) {
            return Err(Error::Separation {
                column: aug.name(j),
                limit: options.separation_limit,
            });
        }
        let change = (next_ll - ll).abs() / ll.abs().max(f64::MIN_POSITIVE);
        beta = next;
        ll = next_ll;
        if change < options.relative_loglik_tolerance {
            converged = true;
            break;
        }
    }

    let (_, info) = aug.derivatives(&beta, &mut row);
    let chol = Cholesky::factor(&info, k, 1e-14).map_err(|e| Error::RankDeficient {
        column: aug.name(e.column),
        dependent_on: Vec::new(),
    })?;
    let variances = chol.inverse_diagonal();
    let mut coefs: Vec<Coefficient> = (0..k)
        .map(|j| Coefficient::new(aug.name(j), beta[j], variances[j].sqrt()))
        .collect();
    let intercept = coefs.remove(0);
    Ok(FitResult {
        intercept,
        coefficients: coefs,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        pseudo_r2: pseudo_r2(ll, null_ll, n),
        n_used: n,
        converged,
        iterations,
    })
}
