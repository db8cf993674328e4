//! Logistic models of top/bottom class membership at the mid and late
//! career stages, their reporting tables and collinearity diagnostics.

mod collinearity;
mod fit;
pub(crate) mod linalg;
mod report;

use std::fmt;

use serde::Serialize;

pub use collinearity::{collinearity_diagonal, CollinearityReport};
pub use fit::{
    check_rank, fit_logistic, null_log_likelihood, pseudo_r2, two_sided_p, Coefficient,
    FitOptions, FitResult, Z95,
};
pub use report::{
    format_sig, write_collinearity_table, write_model_grid, write_model_table, ModelEntry,
    SIGNIFICANCE,
};

use crate::classes::{Class, ClassTable, ProductivityType, Stage};
use crate::corpus::Gender;
use crate::mobility::Scope;
use crate::portfolio::AuthorPortfolio;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Top,
    Bottom,
}

impl Side {
    pub const ALL: [Side; 2] = [Side::Top, Side::Bottom];

    pub fn class(self) -> Class {
        match self {
            Side::Top => Class::Top,
            Side::Bottom => Class::Bottom,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Top => "top",
            Side::Bottom => "bottom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Predictor {
    Male,
    MeanFwci4y,
    IntlCollabRate,
    Ajpr(Stage),
    MedianTeamSize,
    Top200,
    /// Membership of the outcome's class at the stage before the target.
    PriorClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub side: Side,
    pub target: Stage,
    pub predictors: Vec<Predictor>,
    pub ptype: ProductivityType,
    pub scope: Scope,
}

impl ModelSpec {
    /// The reported predictor set: gender, FWCI 4y, collaboration rate,
    /// target-stage AJPR, team size, TOP200 (late only) and prior class.
    pub fn standard(side: Side, target: Stage, ptype: ProductivityType, scope: Scope) -> Self {
        let mut predictors = vec![
            Predictor::Male,
            Predictor::MeanFwci4y,
            Predictor::IntlCollabRate,
            Predictor::Ajpr(target),
            Predictor::MedianTeamSize,
        ];
        if target == Stage::Late {
            predictors.push(Predictor::Top200);
        }
        predictors.push(Predictor::PriorClass);
        Self {
            side,
            target,
            predictors,
            ptype,
            scope,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target == Stage::Early {
            return Err(Error::ModelSpec(format!(
                "{self}: target stage must be mid or late"
            )));
        }
        if self.predictors.is_empty() {
            return Err(Error::ModelSpec(format!("{self}: no predictors")));
        }
        for (i, p) in self.predictors.iter().enumerate() {
            if self.predictors[..i].contains(p) {
                return Err(Error::ModelSpec(format!(
                    "{self}: predictor `{}` listed twice",
                    self.label(*p)
                )));
            }
            if *p == Predictor::Top200 && self.target != Stage::Late {
                return Err(Error::ModelSpec(format!(
                    "{self}: TOP200 is only defined for late-career targets"
                )));
            }
        }
        Ok(())
    }

    pub fn prior_stage(&self) -> Stage {
        self.target.previous().unwrap_or(Stage::Early)
    }

    pub fn label(&self, p: Predictor) -> String {
        match p {
            Predictor::Male => "Male".into(),
            Predictor::MeanFwci4y => "FWCI 4y".into(),
            Predictor::IntlCollabRate => "International Collab. Rate".into(),
            Predictor::Ajpr(s) if s == self.target => "AJPR".into(),
            Predictor::Ajpr(s) => format!("AJPR {}", s.table_label()),
            Predictor::MedianTeamSize => "Median Team Size".into(),
            Predictor::Top200 => "TOP200".into(),
            Predictor::PriorClass => {
                let stage = match self.prior_stage() {
                    Stage::Early => "Early Career",
                    Stage::Mid => "Mid-Career",
                    Stage::Late => "Late Career",
                };
                let class = match self.side {
                    Side::Top => "Top",
                    Side::Bottom => "Bottom",
                };
                format!("{stage} {class} Class")
            }
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.predictors.iter().map(|&p| self.label(p)).collect()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{} {} {}",
            self.side.as_str(),
            self.target.as_str(),
            self.ptype,
            self.scope
        )
    }
}

/// Row-major predictor matrix (no intercept column) with a binary outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<bool>,
    /// Sample positions of the rows, when built from a sample.
    pub rows: Vec<usize>,
    /// Candidate rows dropped for an undefined predictor.
    pub dropped: usize,
}

impl Design {
    pub fn new(names: Vec<String>, x: Vec<f64>, y: Vec<bool>) -> Self {
        assert_eq!(x.len(), names.len() * y.len(), "design shape mismatch");
        Self {
            names,
            x,
            y,
            rows: Vec::new(),
            dropped: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.cols();
        &self.x[i * p..(i + 1) * p]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let p = self.cols();
        self.x.iter().skip(j).step_by(p).copied()
    }
}

fn indicator(b: bool) -> f64 {
    f64::from(u8::from(b))
}

/// Builds the design for `spec` over the sample positions in `members`.
/// `portfolios` and `classes` are aligned by sample position. Authors with
/// unknown gender or an undefined predictor are dropped.
pub fn build_design(
    spec: &ModelSpec,
    portfolios: &[AuthorPortfolio],
    classes: &ClassTable,
    members: &[usize],
) -> Result<Design> {
    spec.validate()?;
    let missing = |stage: Stage| {
        Error::ModelSpec(format!(
            "{spec}: no classes computed for {} at the {} stage",
            spec.ptype,
            stage.as_str()
        ))
    };
    let outcome = classes.get(spec.ptype, spec.target).ok_or_else(|| missing(spec.target))?;
    let prior = classes
        .get(spec.ptype, spec.prior_stage())
        .ok_or_else(|| missing(spec.prior_stage()))?;
    let target_class = spec.side.class();

    let p = spec.predictors.len();
    let mut x = Vec::with_capacity(members.len() * p);
    let mut y = Vec::with_capacity(members.len());
    let mut rows = Vec::with_capacity(members.len());
    let mut row = Vec::with_capacity(p);
    for &i in members {
        let a = &portfolios[i];
        row.clear();
        let complete = spec.predictors.iter().all(|pred| {
            let v = match pred {
                Predictor::Male => match a.gender {
                    Gender::Male => Some(1.0),
                    Gender::Female => Some(0.0),
                    Gender::Unknown => None,
                },
                Predictor::MeanFwci4y => a.mean_fwci4y,
                Predictor::IntlCollabRate => a.intl_collab_rate,
                Predictor::Ajpr(s) => a.ajpr(*s),
                Predictor::MedianTeamSize => Some(a.median_team_size),
                Predictor::Top200 => Some(indicator(a.top200)),
                Predictor::PriorClass => Some(indicator(prior[i] == target_class)),
            };
            v.map(|v| row.push(v)).is_some()
        });
        if complete {
            x.extend_from_slice(&row);
            y.push(outcome[i] == target_class);
            rows.push(i);
        }
    }
    let dropped = members.len() - rows.len();
    if y.is_empty() {
        return Err(Error::EmptyDesign(spec.to_string()));
    }
    if let Some(&first) = y.first() {
        if y.iter().all(|&v| v == first) {
            return Err(Error::ConstantOutcome {
                model: spec.to_string(),
                value: first,
            });
        }
    }
    Ok(Design {
        names: spec.labels(),
        x,
        y,
        rows,
        dropped,
    })
}
