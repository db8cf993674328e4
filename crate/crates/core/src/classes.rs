//! Career stages, the four productivity types, stage productivity and
//! 20/60/20 class assignment within discipline cohorts.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PublicationRecord};
use crate::portfolio::YearWindow;
use crate::symbols::Sym;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Early,
    Mid,
    Late,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Early, Stage::Mid, Stage::Late];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Calendar window of the stage. Publishing year `k` is calendar year
    /// `first_pub_year + k - 1`; early covers publishing years 5-14, mid
    /// 15-24, and late is the five years ending at the reference year.
    pub fn window(self, first_pub_year: i32, reference_year: i32) -> YearWindow {
        match self {
            Stage::Early => YearWindow {
                start: first_pub_year + 4,
                end: first_pub_year + 13,
            },
            Stage::Mid => YearWindow {
                start: first_pub_year + 14,
                end: first_pub_year + 23,
            },
            Stage::Late => YearWindow {
                start: reference_year - 4,
                end: reference_year,
            },
        }
    }

    pub fn window_years(self) -> i32 {
        match self {
            Stage::Early | Stage::Mid => 10,
            Stage::Late => 5,
        }
    }

    pub fn previous(self) -> Option<Stage> {
        match self {
            Stage::Early => None,
            Stage::Mid => Some(Stage::Early),
            Stage::Late => Some(Stage::Mid),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Early => "early",
            Stage::Mid => "mid",
            Stage::Late => "late",
        }
    }

    /// Row label in transition tables.
    pub fn table_label(self) -> &'static str {
        match self {
            Stage::Early => "Early career",
            Stage::Mid => "Mid-career",
            Stage::Late => "Late career",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProductivityType {
    P1,
    P2,
    P3,
    P4,
}

impl ProductivityType {
    pub const ALL: [ProductivityType; 4] = [
        ProductivityType::P1,
        ProductivityType::P2,
        ProductivityType::P3,
        ProductivityType::P4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Weighted by journal prestige (P1, P2).
    pub fn prestige_normalized(self) -> bool {
        matches!(self, ProductivityType::P1 | ProductivityType::P2)
    }

    /// Divided among co-authors (P2, P4).
    pub fn fractional(self) -> bool {
        matches!(self, ProductivityType::P2 | ProductivityType::P4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProductivityType::P1 => "P1",
            ProductivityType::P2 => "P2",
            ProductivityType::P3 => "P3",
            ProductivityType::P4 => "P4",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ProductivityType::P1 => "prestige-normalized, full counting",
            ProductivityType::P2 => "prestige-normalized, fractional counting",
            ProductivityType::P3 => "non-normalized, full counting",
            ProductivityType::P4 => "non-normalized, fractional counting",
        }
    }
}

impl fmt::Display for ProductivityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProductivityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(ProductivityType::P1),
            "P2" | "2" => Ok(ProductivityType::P2),
            "P3" | "3" => Ok(ProductivityType::P3),
            "P4" | "4" => Ok(ProductivityType::P4),
            _ => Err(format!("unknown productivity type '{s}' (expected P1-P4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Bottom,
    Middle,
    Top,
}

impl Class {
    /// Table order.
    pub const ALL: [Class; 3] = [Class::Bottom, Class::Middle, Class::Top];
    /// Flow order in Sankey output.
    pub const TOP_DOWN: [Class; 3] = [Class::Top, Class::Middle, Class::Bottom];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Bottom => "bottom",
            Class::Middle => "middle",
            Class::Top => "top",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Class::Bottom => "Bottom",
            Class::Middle => "Middle",
            Class::Top => "Top",
        }
    }
}

/// Weight of one publication under `ptype`. Non-qualifying document types
/// weigh 0, as do prestige-weighted publications without a journal.
pub fn publication_weight(corpus: &Corpus, p: &PublicationRecord, ptype: ProductivityType) -> f64 {
    if !p.doc_type.is_qualifying() {
        return 0.0;
    }
    let base = if ptype.prestige_normalized() {
        match corpus.journal_of(p) {
            Some(j) => f64::from(j.max_percentile()) / 100.0,
            None => return 0.0,
        }
    } else {
        1.0
    };
    if ptype.fractional() {
        base / p.team_size() as f64
    } else {
        base
    }
}

/// Publications per year in `window`; the second value counts qualifying
/// in-window publications that had no journal to weigh by.
pub fn annual_productivity(
    corpus: &Corpus,
    pubs: &[&PublicationRecord],
    window: YearWindow,
    ptype: ProductivityType,
) -> (f64, usize) {
    let mut sum = 0.0;
    let mut unresolved = 0;
    for p in pubs.iter().filter(|p| window.contains(p.year)) {
        if ptype.prestige_normalized() && p.doc_type.is_qualifying() && p.journal.is_none() {
            unresolved += 1;
        }
        sum += publication_weight(corpus, p, ptype);
    }
    (sum / f64::from(window.len()), unresolved)
}

/// Productivity of one author: `[ptype][stage]`.
pub type StageValues = [[f64; 3]; 4];

pub fn stage_values(
    corpus: &Corpus,
    pubs: &[&PublicationRecord],
    first_pub_year: i32,
) -> (StageValues, usize) {
    let mut values = [[0.0; 3]; 4];
    let mut unresolved = 0;
    for ptype in ProductivityType::ALL {
        for stage in Stage::ALL {
            let window = stage.window(first_pub_year, corpus.reference_year);
            let (v, u) = annual_productivity(corpus, pubs, window, ptype);
            values[ptype.index()][stage.index()] = v;
            if ptype == ProductivityType::P1 {
                unresolved += u;
            }
        }
    }
    (values, unresolved)
}

pub const MIN_COHORT: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CohortAssignment {
    pub classes: Vec<Class>,
    /// Fewer than [`MIN_COHORT`] members: everyone is middle.
    pub too_small: bool,
    pub q20: Option<f64>,
    pub q80: Option<f64>,
}

impl CohortAssignment {
    pub fn count(&self, class: Class) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }
}

/// 20/60/20 split. With ascending ranks 1..=N, `q20` is the value at rank
/// `max(1, floor(N/5))` and `q80` the value at rank `ceil(4N/5)`; bottom is
/// every value `<= q20`, top every value `> q80`. Ties at the lower cut join
/// the bottom class and ties at the upper cut stay out of the top class.
pub fn assign_classes(values: &[f64]) -> CohortAssignment {
    let n = values.len();
    if n < MIN_COHORT {
        return CohortAssignment {
            classes: vec![Class::Middle; n],
            too_small: true,
            q20: None,
            q80: None,
        };
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let low_rank = (n / 5).max(1);
    let high_rank = (4 * n).div_ceil(5);
    let q20 = sorted[low_rank - 1];
    let q80 = sorted[high_rank - 1];
    let classes = values
        .iter()
        .map(|&v| {
            if v <= q20 {
                Class::Bottom
            } else if v > q80 {
                Class::Top
            } else {
                Class::Middle
            }
        })
        .collect();
    CohortAssignment {
        classes,
        too_small: false,
        q20: Some(q20),
        q80: Some(q80),
    }
}

/// Class of every sampled author per productivity type and stage, with
/// cohorts formed by discipline.
#[derive(Debug, Clone)]
pub struct ClassTable {
    pub ptypes: Vec<ProductivityType>,
    /// `classes[ptype][stage][author]`, indexed by position in `ptypes`.
    classes: Vec<[Vec<Class>; 3]>,
    pub small_cohorts: Vec<CohortFlag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohortFlag {
    pub discipline: String,
    pub stage: Stage,
    pub ptype: ProductivityType,
    pub size: usize,
}

impl ClassTable {
    pub fn build(
        corpus: &Corpus,
        disciplines: &[Sym],
        values: &[StageValues],
        ptypes: &[ProductivityType],
    ) -> Self {
        let mut cohorts: BTreeMap<&str, (Sym, Vec<usize>)> = BTreeMap::new();
        for (i, &d) in disciplines.iter().enumerate() {
            cohorts
                .entry(corpus.name(d))
                .or_insert_with(|| (d, Vec::new()))
                .1
                .push(i);
        }
        let jobs: Vec<(usize, Stage, &str, &[usize])> = ptypes
            .iter()
            .enumerate()
            .flat_map(|(pi, _)| {
                Stage::ALL.into_iter().flat_map({
                    let cohorts = &cohorts;
                    move |s| cohorts.iter().map(move |(name, (_, m))| (pi, s, *name, m.as_slice()))
                })
            })
            .collect();
        let results: Vec<CohortAssignment> = jobs
            .par_iter()
            .map(|&(pi, stage, _, members)| {
                let pt = ptypes[pi];
                let cohort: Vec<f64> = members
                    .iter()
                    .map(|&i| values[i][pt.index()][stage.index()])
                    .collect();
                assign_classes(&cohort)
            })
            .collect();

        let n = disciplines.len();
        let mut classes: Vec<[Vec<Class>; 3]> = ptypes
            .iter()
            .map(|_| std::array::from_fn(|_| vec![Class::Middle; n]))
            .collect();
        let mut small_cohorts = Vec::new();
        for (&(pi, stage, name, members), result) in jobs.iter().zip(results) {
            if result.too_small {
                small_cohorts.push(CohortFlag {
                    discipline: name.to_owned(),
                    stage,
                    ptype: ptypes[pi],
                    size: members.len(),
                });
            }
            for (&i, c) in members.iter().zip(result.classes) {
                classes[pi][stage.index()][i] = c;
            }
        }
        Self {
            ptypes: ptypes.to_vec(),
            classes,
            small_cohorts,
        }
    }

    pub fn get(&self, ptype: ProductivityType, stage: Stage) -> Option<&[Class]> {
        let pi = self.ptypes.iter().position(|&p| p == ptype)?;
        Some(&self.classes[pi][stage.index()])
    }
}

/// Class dump: one JSON line per (author, stage, ptype); values carry six
/// decimals.
pub fn write_classes<W: Write>(
    mut out: W,
    author_ids: &[&str],
    disciplines: &[&str],
    values: &[StageValues],
    table: &ClassTable,
) -> std::io::Result<()> {
    for (i, id) in author_ids.iter().enumerate() {
        for &ptype in &table.ptypes {
            for stage in Stage::ALL {
                let class = table.get(ptype, stage).expect("ptype present")[i];
                writeln!(
                    out,
                    "{{\"author_id\":{},\"discipline\":{},\"stage\":\"{}\",\"ptype\":\"{}\",\"value\":{:.6},\"class\":\"{}\"}}",
                    serde_json::to_string(id)?,
                    serde_json::to_string(disciplines[i])?,
                    stage.as_str(),
                    ptype,
                    values[i][ptype.index()][stage.index()],
                    class.as_str()
                )?;
            }
        }
    }
    out.flush()
}
