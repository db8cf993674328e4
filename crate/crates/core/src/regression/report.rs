//! Delimited report tables: long per-model coefficient tables, the
//! discipline-by-predictor odds-ratio grid and collinearity diagonals.

use std::io::Write;

use super::{CollinearityReport, FitResult, ModelSpec};
use crate::Result;

/// Cells with a larger p-value are blanked in the grid.
pub const SIGNIFICANCE: f64 = 0.05;

/// One fitted (or failed) model with its diagnostics.
#[derive(Debug, Clone)]
pub struct ModelEntry {
    pub spec: ModelSpec,
    pub fit: std::result::Result<FitResult, String>,
    pub collinearity: Option<std::result::Result<CollinearityReport, String>>,
    pub dropped: usize,
}

/// `Sig.` column convention: p ≤ 0.001 prints as `0`.
pub fn format_sig(p: f64) -> String {
    if p <= 0.001 {
        "0".into()
    } else {
        format!("{p:.3}")
    }
}

fn status(fit: &FitResult) -> &'static str {
    if fit.converged {
        "ok"
    } else {
        "not converged"
    }
}

pub fn write_model_table<W: Write>(out: W, entries: &[&ModelEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "ptype", "scope", "n_used", "dropped", "pseudo_r2", "converged", "iterations",
        "variable", "b", "se", "exp_b", "ci_lower", "ci_upper", "sig", "status",
    ])
    .map_err(csv_err)?;
    for e in entries {
        let ptype = e.spec.ptype.as_str();
        let scope = e.spec.scope.to_string();
        let dropped = e.dropped.to_string();
        match &e.fit {
            Ok(fit) => {
                let head = [
                    ptype.to_string(),
                    scope.clone(),
                    fit.n_used.to_string(),
                    dropped.clone(),
                    format!("{:.6}", fit.pseudo_r2),
                    fit.converged.to_string(),
                    fit.iterations.to_string(),
                ];
                for c in &fit.coefficients {
                    let mut rec = head.to_vec();
                    rec.extend([
                        c.name.clone(),
                        format!("{:.6}", c.estimate),
                        format!("{:.6}", c.std_error),
                        format!("{:.6}", c.odds_ratio),
                        format!("{:.6}", c.ci_lower),
                        format!("{:.6}", c.ci_upper),
                        format_sig(c.p_value),
                        status(fit).into(),
                    ]);
                    w.write_record(&rec).map_err(csv_err)?;
                }
                let c = &fit.intercept;
                let (lo, hi) = c.log_odds_ci();
                let mut rec = head.to_vec();
                rec.extend([
                    c.name.clone(),
                    format!("{:.6}", c.estimate),
                    format!("{:.6}", c.std_error),
                    format!("{:.6}", c.odds_ratio),
                    format!("{lo:.6}"),
                    format!("{hi:.6}"),
                    format_sig(c.p_value),
                    format!("{}; CI on log-odds scale", status(fit)),
                ]);
                w.write_record(&rec).map_err(csv_err)?;
            }
            Err(msg) => {
                let mut rec = vec![ptype.to_string(), scope, String::new(), dropped];
                rec.extend(std::iter::repeat_n(String::new(), 10));
                rec.push(format!("failed: {msg}"));
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Grid of odds ratios: one row per predictor, one column per scope, in the
/// order of `entries`. Non-significant cells are blank; estimates from
/// unconverged fits are always printed and tagged `(NC)`.
pub fn write_model_grid<W: Write>(out: W, entries: &[&ModelEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["variable".to_string()];
    header.extend(entries.iter().map(|e| e.spec.scope.to_string()));
    w.write_record(&header).map_err(csv_err)?;

    let mut variables: Vec<String> = Vec::new();
    for e in entries {
        for label in e.spec.labels() {
            if !variables.contains(&label) {
                variables.push(label);
            }
        }
    }

    let mut n_row = vec!["N".to_string()];
    let mut r2_row = vec!["R2".to_string()];
    for e in entries {
        match &e.fit {
            Ok(fit) => {
                n_row.push(fit.n_used.to_string());
                r2_row.push(tag(format!("{:.3}", fit.pseudo_r2), fit));
            }
            Err(_) => {
                n_row.push("failed".into());
                r2_row.push(String::new());
            }
        }
    }
    w.write_record(&n_row).map_err(csv_err)?;
    w.write_record(&r2_row).map_err(csv_err)?;

    for v in &variables {
        let mut row = vec![v.clone()];
        for e in entries {
            let cell = match &e.fit {
                Ok(fit) => match fit.coefficient(v) {
                    Some(c) if !fit.converged => tag(format!("{:.3}", c.odds_ratio), fit),
                    Some(c) if c.p_value <= SIGNIFICANCE => format!("{:.3}", c.odds_ratio),
                    _ => String::new(),
                },
                Err(_) => String::new(),
            };
            row.push(cell);
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn tag(value: String, fit: &FitResult) -> String {
    if fit.converged {
        value
    } else {
        format!("{value} (NC)")
    }
}

pub fn write_collinearity_table<W: Write>(out: W, entries: &[&ModelEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ptype", "scope", "variable", "inverse_corr_diagonal", "status"])
        .map_err(csv_err)?;
    for e in entries {
        let ptype = e.spec.ptype.as_str();
        let scope = e.spec.scope.to_string();
        match &e.collinearity {
            Some(Ok(report)) => {
                for (name, v) in report.names.iter().zip(&report.diagonal) {
                    w.write_record([ptype, &scope, name, &format!("{v:.6}"), "ok"])
                        .map_err(csv_err)?;
                }
            }
            Some(Err(msg)) => {
                w.write_record([ptype, &scope, "", "", &format!("failed: {msg}")])
                    .map_err(csv_err)?;
            }
            None => {}
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::Io(io),
        other => crate::Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{ProductivityType, Stage};
    use crate::mobility::Scope;
    use crate::regression::{Coefficient, Side};

    fn coef(name: &str, b: f64, se: f64) -> Coefficient {
        let z = b / se;
        Coefficient {
            name: name.into(),
            estimate: b,
            std_error: se,
            odds_ratio: b.exp(),
            ci_lower: (b - 1.96 * se).exp(),
            ci_upper: (b + 1.96 * se).exp(),
            z,
            p_value: crate::regression::two_sided_p(z),
        }
    }

    fn entry(scope: &str, converged: bool, male_p_small: bool) -> ModelEntry {
        let spec = ModelSpec::standard(Side::Top, Stage::Mid, ProductivityType::P1, Scope::parse(scope));
        let male_se = if male_p_small { 0.01 } else { 0.2 };
        let coefficients = spec
            .labels()
            .into_iter()
            .map(|l| if l == "Male" { coef(&l, 0.25, male_se) } else { coef(&l, 2.4102, 0.01) })
            .collect();
        ModelEntry {
            spec,
            fit: Ok(FitResult {
                intercept: coef("Intercept", -3.5, 0.03),
                coefficients,
                log_likelihood: -10.0,
                null_log_likelihood: -20.0,
                pseudo_r2: 0.231,
                n_used: 100,
                converged,
                iterations: 6,
            }),
            collinearity: None,
            dropped: 3,
        }
    }

    #[test]
    fn sig_convention() {
        assert_eq!(format_sig(0.0005), "0");
        assert_eq!(format_sig(0.001), "0");
        assert_eq!(format_sig(0.049), "0.049");
    }

    #[test]
    fn grid_blanks_nonsignificant_and_tags_unconverged() {
        let a = entry("MED", true, false);
        let b = entry("PHYS", false, false);
        let c = entry("CHEM", true, true);
        let mut buf = Vec::new();
        write_model_grid(&mut buf, &[&a, &b, &c]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "variable,MED,PHYS,CHEM");
        assert_eq!(lines[1], "N,100,100,100");
        assert_eq!(lines[2], "R2,0.231,0.231 (NC),0.231");
        assert_eq!(lines[3], "Male,,1.284 (NC),1.284");
        assert!(lines.contains(&"Early Career Top Class,11.136,11.136 (NC),11.136"));
        assert!(!text.contains("Intercept"));
    }

    #[test]
    fn long_table_rows() {
        let a = entry("ALL", true, true);
        let mut failed = entry("BIO", true, true);
        failed.fit = Err("outcome is constant".into());
        let mut buf = Vec::new();
        write_model_table(&mut buf, &[&a, &failed]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 7 + 1);
        assert!(text.contains("Intercept"));
        assert!(text.contains("failed: outcome is constant"));
    }
}
