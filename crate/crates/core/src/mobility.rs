//! Class-transition matrices between career stages, the four headline
//! mobility rates and SankeyMATIC export.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::classes::{Class, ProductivityType, Stage};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Scope {
    All,
    Discipline(String),
}

impl Scope {
    pub fn parse(s: &str) -> Self {
        if s.eq_ignore_ascii_case("all") {
            Scope::All
        } else {
            Scope::Discipline(s.to_owned())
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::All => f.write_str("ALL"),
            Scope::Discipline(d) => f.write_str(d),
        }
    }
}

/// Row percentage in tenths of a percent, rounded half away from zero.
/// Integer arithmetic keeps e.g. 36,373 / 65,023 at exactly 559.
pub fn percent_tenths(count: u64, size: u64) -> Option<u64> {
    (size > 0).then(|| (2000 * count + size) / (2 * size))
}

pub fn format_tenths(tenths: u64) -> String {
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// Counts indexed `[from_class][to_class]` in [`Class::ALL`] order.
pub type Counts = [[u64; 3]; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub from: Stage,
    pub to: Stage,
    pub ptype: ProductivityType,
    pub scope: Scope,
    pub counts: Counts,
}

impl TransitionMatrix {
    pub fn new(from: Stage, to: Stage, ptype: ProductivityType, scope: Scope, counts: Counts) -> Self {
        Self {
            from,
            to,
            ptype,
            scope,
            counts,
        }
    }

    pub fn count(&self, from: Class, to: Class) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn class_size(&self, from: Class) -> u64 {
        self.counts[from.index()].iter().sum()
    }

    pub fn class_sizes(&self) -> [u64; 3] {
        Class::ALL.map(|c| self.class_size(c))
    }

    /// Sizes of the target-stage classes (column sums).
    pub fn target_sizes(&self) -> [u64; 3] {
        Class::ALL.map(|to| Class::ALL.iter().map(|&from| self.count(from, to)).sum())
    }

    pub fn total(&self) -> u64 {
        self.class_sizes().iter().sum()
    }

    pub fn percent(&self, from: Class, to: Class) -> Option<f64> {
        let size = self.class_size(from);
        (size > 0).then(|| 100.0 * self.count(from, to) as f64 / size as f64)
    }

    pub fn percent_tenths(&self, from: Class, to: Class) -> Option<u64> {
        percent_tenths(self.count(from, to), self.class_size(from))
    }

    /// Cell-wise sum; both matrices must describe the same transition.
    pub fn accumulate(&mut self, other: &TransitionMatrix) {
        debug_assert_eq!((self.from, self.to, self.ptype), (other.from, other.to, other.ptype));
        for i in 0..3 {
            for j in 0..3 {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }

    pub fn rates(&self) -> MobilityRates {
        mobility_rates(self)
    }
}

/// Counts class flows for two aligned class columns (same author at the same
/// position).
pub fn transition_counts(from: &[Class], to: &[Class]) -> Result<Counts> {
    if from.len() != to.len() {
        return Err(Error::AuthorSetMismatch(format!(
            "{} authors in the source stage, {} in the target stage",
            from.len(),
            to.len()
        )));
    }
    let mut counts = [[0u64; 3]; 3];
    for (f, t) in from.iter().zip(to) {
        counts[f.index()][t.index()] += 1;
    }
    Ok(counts)
}

/// Transition matrix between two keyed class maps. Both maps must cover the
/// same authors.
pub fn transition_matrix<K: Ord + fmt::Debug>(
    classes_from: &BTreeMap<K, Class>,
    classes_to: &BTreeMap<K, Class>,
    from: Stage,
    to: Stage,
    ptype: ProductivityType,
    scope: Scope,
) -> Result<TransitionMatrix> {
    if classes_from.len() != classes_to.len()
        || classes_from.keys().zip(classes_to.keys()).any(|(a, b)| a != b)
    {
        let missing = classes_from
            .keys()
            .find(|k| !classes_to.contains_key(*k))
            .map(|k| format!("{k:?} has no target-stage class"))
            .or_else(|| {
                classes_to
                    .keys()
                    .find(|k| !classes_from.contains_key(*k))
                    .map(|k| format!("{k:?} has no source-stage class"))
            })
            .unwrap_or_default();
        return Err(Error::AuthorSetMismatch(missing));
    }
    let from_col: Vec<Class> = classes_from.values().copied().collect();
    let to_col: Vec<Class> = classes_to.values().copied().collect();
    let counts = transition_counts(&from_col, &to_col)?;
    Ok(TransitionMatrix::new(from, to, ptype, scope, counts))
}

/// Early career straight to late career.
pub fn two_stage_matrix<K: Ord + fmt::Debug>(
    classes_early: &BTreeMap<K, Class>,
    classes_late: &BTreeMap<K, Class>,
    ptype: ProductivityType,
    scope: Scope,
) -> Result<TransitionMatrix> {
    transition_matrix(classes_early, classes_late, Stage::Early, Stage::Late, ptype, scope)
}

/// Percentages of the four headline cells; `None` when the source class is
/// empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobilityRates {
    pub top_to_top: Option<f64>,
    pub bottom_to_bottom: Option<f64>,
    pub jumpers_up: Option<f64>,
    pub droppers_down: Option<f64>,
}

pub fn mobility_rates(m: &TransitionMatrix) -> MobilityRates {
    MobilityRates {
        top_to_top: m.percent(Class::Top, Class::Top),
        bottom_to_bottom: m.percent(Class::Bottom, Class::Bottom),
        jumpers_up: m.percent(Class::Bottom, Class::Top),
        droppers_down: m.percent(Class::Top, Class::Bottom),
    }
}

#[derive(Debug, Clone)]
pub struct SankeyLabels {
    pub stages: [String; 3],
    pub classes: [String; 3],
}

impl Default for SankeyLabels {
    fn default() -> Self {
        Self {
            stages: ["Early".into(), "Mid".into(), "Late".into()],
            classes: Class::ALL.map(|c| c.label().to_owned()),
        }
    }
}

impl SankeyLabels {
    fn node(&self, stage: Stage, class: Class) -> String {
        format!("{} {}", self.stages[stage.index()], self.classes[class.index()])
    }
}

/// SankeyMATIC flow lines `Source [pct] Target`, one per non-empty flow,
/// sources and targets each ordered top, middle, bottom.
pub fn sankey_export(matrices: &[TransitionMatrix], labels: &SankeyLabels) -> Result<String> {
    if let Some(first) = matrices.first() {
        if let Some(m) = matrices
            .iter()
            .find(|m| m.ptype != first.ptype || m.scope != first.scope)
        {
            return Err(Error::Config(format!(
                "sankey matrices must share ptype and scope: {}/{} vs {}/{}",
                first.ptype, first.scope, m.ptype, m.scope
            )));
        }
    }
    let mut out = String::new();
    for m in matrices {
        for from in Class::TOP_DOWN {
            for to in Class::TOP_DOWN {
                let count = m.count(from, to);
                if count == 0 {
                    continue;
                }
                let tenths = percent_tenths(count, m.class_size(from)).expect("non-empty row");
                out.push_str(&format!(
                    "{} [{}] {}\n",
                    labels.node(m.from, from),
                    format_tenths(tenths),
                    labels.node(m.to, to)
                ));
            }
        }
    }
    Ok(out)
}

/// Transition table: from stage, from class, to stage, to class, count,
/// class size, percent. When `summary` is set, class-size rows for that stage
/// (taken from the last matrix's targets) close the table.
pub fn write_transition_table<W: Write>(
    out: W,
    matrices: &[TransitionMatrix],
    summary: Option<Stage>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record([
        "from_stage",
        "from_class",
        "to_stage",
        "to_class",
        "count",
        "class_size",
        "percent",
    ])
    .map_err(csv_err)?;
    for m in matrices {
        for from in Class::ALL {
            for to in Class::ALL {
                let pct = m
                    .percent_tenths(from, to)
                    .map(format_tenths)
                    .unwrap_or_default();
                w.write_record([
                    m.from.table_label(),
                    from.label(),
                    m.to.table_label(),
                    to.label(),
                    &m.count(from, to).to_string(),
                    &m.class_size(from).to_string(),
                    &pct,
                ])
                .map_err(csv_err)?;
            }
        }
    }
    if let (Some(stage), Some(last)) = (summary, matrices.last()) {
        for (class, size) in Class::ALL.iter().zip(last.target_sizes()) {
            let pct = if size > 0 { "100" } else { "" };
            w.write_record([
                stage.table_label(),
                class.label(),
                "",
                "",
                &size.to_string(),
                &size.to_string(),
                pct,
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Class::*;

    fn m(counts: Counts) -> TransitionMatrix {
        TransitionMatrix::new(Stage::Early, Stage::Mid, ProductivityType::P1, Scope::All, counts)
    }

    #[test]
    fn published_percentages() {
        assert_eq!(percent_tenths(36_373, 65_023), Some(559));
        assert_eq!(percent_tenths(24_148, 65_023), Some(371));
        assert_eq!(percent_tenths(28_884, 64_923), Some(445));
        assert_eq!(format_tenths(559), "55.9");
        assert_eq!(format_tenths(1000), "100.0");
        assert_eq!(percent_tenths(1, 0), None);
    }

    #[test]
    fn half_rounds_away_from_zero() {
        // 1/16 = 6.25% -> 6.3, 1/80 = 1.25% -> 1.3
        assert_eq!(percent_tenths(1, 16), Some(63));
        assert_eq!(percent_tenths(1, 80), Some(13));
    }

    #[test]
    fn identical_maps_are_diagonal() {
        let classes: BTreeMap<u32, Class> =
            (0..30).map(|i| (i, Class::ALL[(i % 3) as usize])).collect();
        let t = transition_matrix(&classes, &classes, Stage::Early, Stage::Mid, ProductivityType::P1, Scope::All)
            .unwrap();
        for i in Class::ALL {
            for j in Class::ALL {
                assert_eq!(t.count(i, j) > 0, i == j);
            }
        }
        let r = t.rates();
        assert_eq!(
            (r.top_to_top, r.bottom_to_bottom, r.jumpers_up, r.droppers_down),
            (Some(100.0), Some(100.0), Some(0.0), Some(0.0))
        );
    }

    #[test]
    fn six_author_fixture_matches_enumeration() {
        let from: BTreeMap<&str, Class> =
            [("a", Top), ("b", Top), ("c", Middle), ("d", Bottom), ("e", Bottom), ("f", Middle)].into();
        let to: BTreeMap<&str, Class> =
            [("a", Top), ("b", Bottom), ("c", Top), ("d", Bottom), ("e", Middle), ("f", Middle)].into();
        let t = transition_matrix(&from, &to, Stage::Early, Stage::Mid, ProductivityType::P3, Scope::All)
            .unwrap();
        let mut expected = [[0u64; 3]; 3];
        for (k, f) in &from {
            expected[f.index()][to[k].index()] += 1;
        }
        assert_eq!(t.counts, expected);
        assert_eq!(t.class_sizes(), [2, 2, 2]);
        assert_eq!(t.total(), 6);
    }

    #[test]
    fn mismatched_author_sets() {
        let from: BTreeMap<&str, Class> = [("a", Top), ("b", Top)].into();
        let to: BTreeMap<&str, Class> = [("a", Top), ("c", Top)].into();
        let err = transition_matrix(&from, &to, Stage::Early, Stage::Mid, ProductivityType::P1, Scope::All)
            .unwrap_err();
        assert!(matches!(err, Error::AuthorSetMismatch(_)));
        assert!(transition_counts(&[Top], &[]).is_err());
    }

    #[test]
    fn empty_source_class_has_undefined_rate() {
        let t = m([[0, 0, 0], [1, 1, 1], [0, 1, 2]]);
        assert_eq!(t.rates().jumpers_up, None);
        assert_eq!(t.rates().bottom_to_bottom, None);
        assert!(t.rates().top_to_top.is_some());
    }

    #[test]
    fn sankey_identity_has_three_full_flows() {
        let t = m([[5, 0, 0], [0, 6, 0], [0, 0, 7]]);
        let text = sankey_export(&[t], &SankeyLabels::default()).unwrap();
        assert_eq!(
            text,
            "Early Top [100.0] Mid Top\nEarly Middle [100.0] Mid Middle\nEarly Bottom [100.0] Mid Bottom\n"
        );
    }

    #[test]
    fn sankey_rejects_mixed_ptypes() {
        let a = m([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        let mut b = a.clone();
        b.ptype = ProductivityType::P2;
        assert!(sankey_export(&[a, b], &SankeyLabels::default()).is_err());
    }

    #[test]
    fn transition_table_layout() {
        let t = m([[2, 1, 0], [1, 4, 1], [0, 1, 2]]);
        let mut buf = Vec::new();
        write_transition_table(&mut buf, &[t], Some(Stage::Mid)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 9 + 3);
        assert_eq!(lines[1], "Early career,Bottom,Mid-career,Bottom,2,3,66.7");
        assert_eq!(lines[10], "Mid-career,Bottom,,,3,3,100");
    }

    fn counts_strategy() -> impl Strategy<Value = Counts> {
        prop::array::uniform3(prop::array::uniform3(0u64..100_000))
    }

    proptest! {
        #[test]
        fn rows_account_and_round_to_100(counts in counts_strategy()) {
            let t = m(counts);
            for from in Class::ALL {
                let size = t.class_size(from);
                prop_assert_eq!(Class::ALL.iter().map(|&to| t.count(from, to)).sum::<u64>(), size);
                if size > 0 {
                    let sum: u64 = Class::ALL.iter().map(|&to| t.percent_tenths(from, to).unwrap()).sum();
                    prop_assert!((999..=1001).contains(&sum), "row sums to {} tenths", sum);
                }
            }
        }

        #[test]
        fn discipline_matrices_add_up(
            classes in prop::collection::vec((0usize..3, 0usize..3, 0usize..4), 1..300)
        ) {
            let from: Vec<Class> = classes.iter().map(|c| Class::ALL[c.0]).collect();
            let to: Vec<Class> = classes.iter().map(|c| Class::ALL[c.1]).collect();
            let all = m(transition_counts(&from, &to).unwrap());
            let mut summed = m([[0; 3]; 3]);
            for d in 0..4 {
                let pick = |col: &[Class]| -> Vec<Class> {
                    col.iter().zip(&classes).filter(|(_, c)| c.2 == d).map(|(x, _)| *x).collect()
                };
                summed.accumulate(&m(transition_counts(&pick(&from), &pick(&to)).unwrap()));
            }
            prop_assert_eq!(summed.counts, all.counts);
        }
    }
}
