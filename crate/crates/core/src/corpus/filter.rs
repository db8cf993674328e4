//! The sample-selection gates: country, discipline, nonoccasional status,
//! academic age and recent activity, evaluated in that fixed order.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AuthorPublications, Corpus};
use crate::portfolio;
use crate::symbols::Sym;
use crate::{Error, Result};

pub const OECD_COUNTRIES: [&str; 38] = [
    "AT", "AU", "BE", "CA", "CH", "CL", "CO", "CR", "CZ", "DE", "DK", "EE", "ES", "FI", "FR",
    "GB", "GR", "HU", "IE", "IL", "IS", "IT", "JP", "KR", "LT", "LU", "LV", "MX", "NL", "NO",
    "NZ", "PL", "PT", "SE", "SI", "SK", "TR", "US",
];

pub const STEMM_DISCIPLINES: [&str; 16] = [
    "AGRI", "BIO", "CHEM", "CHEMENG", "COMP", "EARTH", "ENER", "ENG", "ENVIR", "IMMU", "MATER",
    "MATH", "MED", "NEURO", "PHARM", "PHYS",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleFilterConfig {
    pub allowed_countries: BTreeSet<String>,
    pub allowed_disciplines: BTreeSet<String>,
    pub min_publications: u32,
    pub min_academic_age: i32,
    pub max_academic_age: i32,
    pub active_window_years: i32,
}

impl Default for SampleFilterConfig {
    fn default() -> Self {
        Self {
            allowed_countries: OECD_COUNTRIES.iter().map(|s| s.to_string()).collect(),
            allowed_disciplines: STEMM_DISCIPLINES.iter().map(|s| s.to_string()).collect(),
            min_publications: 3,
            min_academic_age: 25,
            max_academic_age: 50,
            active_window_years: 5,
        }
    }
}

impl SampleFilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_publications < 1 {
            return Err(Error::Config("min_publications must be at least 1".into()));
        }
        if self.min_academic_age <= 0 || self.min_academic_age > self.max_academic_age {
            return Err(Error::Config(format!(
                "academic age bounds must satisfy 0 < min <= max, got [{}, {}]",
                self.min_academic_age, self.max_academic_age
            )));
        }
        if self.active_window_years < 1 {
            return Err(Error::Config("active_window_years must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterGate {
    Country,
    Discipline,
    Nonoccasional,
    AcademicAge,
    Active,
}

impl FilterGate {
    pub const ORDER: [FilterGate; 5] = [
        FilterGate::Country,
        FilterGate::Discipline,
        FilterGate::Nonoccasional,
        FilterGate::AcademicAge,
        FilterGate::Active,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn describe(self) -> &'static str {
        match self {
            FilterGate::Country => "dominant country not allowed",
            FilterGate::Discipline => "dominant discipline not allowed or undetermined",
            FilterGate::Nonoccasional => "too few articles/conference papers",
            FilterGate::AcademicAge => "academic age out of range",
            FilterGate::Active => "no qualifying publication in active window",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub gate: FilterGate,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total: usize,
    pub gates: Vec<GateCount>,
    pub retained: usize,
}

impl FilterReport {
    pub fn removed(&self, gate: FilterGate) -> usize {
        self.gates
            .iter()
            .find(|g| g.gate == gate)
            .map_or(0, |g| g.removed)
    }

    pub fn removed_total(&self) -> usize {
        self.gates.iter().map(|g| g.removed).sum()
    }
}

impl fmt::Display for FilterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>10} {:>10}  reason", "gate", "removed", "remaining")?;
        writeln!(f, "{:<16} {:>10} {:>10}", "all authors", "", self.total)?;
        let mut remaining = self.total;
        for g in &self.gates {
            remaining -= g.removed;
            let name = serde_json::to_value(g.gate).expect("gate serializes");
            writeln!(
                f,
                "{:<16} {:>10} {:>10}  {}",
                name.as_str().unwrap_or_default(),
                g.removed,
                remaining,
                g.gate.describe()
            )?;
        }
        write!(f, "{:<16} {:>10} {:>10}", "retained", "", self.retained)
    }
}

#[derive(Debug, Clone)]
pub struct SampleSelection {
    /// Retained author positions, ordered by author id.
    pub retained: Vec<u32>,
    pub report: FilterReport,
}

impl SampleSelection {
    pub fn author_ids<'c>(&self, corpus: &'c Corpus) -> Vec<&'c str> {
        self.retained.iter().map(|&a| corpus.author_id(a)).collect()
    }
}

struct Allowed {
    countries: HashSet<Sym>,
    disciplines: HashSet<Sym>,
}

/// Applies the gates to every author in the corpus.
pub fn filter_sample(
    corpus: &Corpus,
    index: &AuthorPublications,
    config: &SampleFilterConfig,
) -> SampleSelection {
    let lookup = |names: &BTreeSet<String>| -> HashSet<Sym> {
        names.iter().filter_map(|n| corpus.symbols.lookup(n)).collect()
    };
    let allowed = Allowed {
        countries: lookup(&config.allowed_countries),
        disciplines: lookup(&config.allowed_disciplines),
    };
    let verdicts: Vec<Option<FilterGate>> = (0..corpus.authors.len() as u32)
        .into_par_iter()
        .map(|a| first_failing_gate(corpus, index, a, config, &allowed))
        .collect();

    let mut removed = [0usize; 5];
    let mut retained = Vec::new();
    for (a, verdict) in verdicts.iter().enumerate() {
        match verdict {
            Some(gate) => removed[gate.slot()] += 1,
            None => retained.push(a as u32),
        }
    }
    retained.sort_by(|&x, &y| corpus.author_id(x).cmp(corpus.author_id(y)));
    let report = FilterReport {
        total: corpus.authors.len(),
        gates: FilterGate::ORDER
            .iter()
            .map(|&gate| GateCount {
                gate,
                removed: removed[gate.slot()],
            })
            .collect(),
        retained: retained.len(),
    };
    SampleSelection { retained, report }
}

fn first_failing_gate(
    corpus: &Corpus,
    index: &AuthorPublications,
    author: u32,
    config: &SampleFilterConfig,
    allowed: &Allowed,
) -> Option<FilterGate> {
    let pubs: Vec<_> = index.iter(corpus, author).collect();
    let country = portfolio::author_country(corpus, author, &pubs);
    if !country.is_some_and(|c| allowed.countries.contains(&c)) {
        return Some(FilterGate::Country);
    }
    let discipline = portfolio::dominant_discipline(&corpus.symbols, &pubs);
    if !discipline.is_some_and(|d| allowed.disciplines.contains(&d)) {
        return Some(FilterGate::Discipline);
    }
    let qualifying = pubs.iter().filter(|p| p.doc_type.is_qualifying()).count();
    if qualifying < config.min_publications as usize {
        return Some(FilterGate::Nonoccasional);
    }
    let age = portfolio::academic_age(&pubs, corpus.reference_year)?;
    if age < config.min_academic_age || age > config.max_academic_age {
        return Some(FilterGate::AcademicAge);
    }
    let window_start = corpus.reference_year - config.active_window_years + 1;
    let active = pubs
        .iter()
        .any(|p| p.doc_type.is_qualifying() && p.year >= window_start);
    if !active {
        return Some(FilterGate::Active);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{author_line, journal_line, Gender, PublicationLine};

    struct Fixture {
        corpus: Corpus,
        n: usize,
    }

    impl Fixture {
        fn new() -> Self {
            let mut corpus = Corpus::new(2022);
            corpus.add_journal(journal_line("J", &[("MED", 50)])).unwrap();
            Fixture { corpus, n: 0 }
        }

        fn author(&mut self, id: &str) {
            self.corpus.add_author(author_line(id, Gender::Male, Some(0.9))).unwrap();
        }

        fn publish(&mut self, author: &str, year: i32, doc: &str, country: &str, refs: &[&str]) {
            self.n += 1;
            self.corpus
                .add_publication(PublicationLine {
                    pub_id: Some(format!("P{}", self.n)),
                    year: Some(year),
                    doc_type: Some(doc.into()),
                    author_ids: Some(vec![author.into()]),
                    affiliation_countries: vec![country.into()],
                    journal_id: Some("J".into()),
                    cited_ref_disciplines: refs.iter().map(|s| s.to_string()).collect(),
                    ..Default::default()
                })
                .unwrap();
        }

        /// An author that passes every gate with the default config.
        fn good(&mut self, id: &str) {
            self.author(id);
            for y in [1990, 2005, 2020] {
                self.publish(id, y, "article", "US", &["MED"]);
            }
        }

        fn run(&self) -> SampleSelection {
            let idx = self.corpus.author_publications();
            filter_sample(&self.corpus, &idx, &SampleFilterConfig::default())
        }
    }

    #[test]
    fn two_lifetime_articles_fail_nonoccasional() {
        let mut f = Fixture::new();
        f.author("A");
        f.publish("A", 1990, "article", "US", &["MED"]);
        f.publish("A", 2020, "article", "US", &["MED"]);
        f.publish("A", 2021, "other", "US", &["MED"]);
        let s = f.run();
        assert!(s.retained.is_empty());
        assert_eq!(s.report.removed(FilterGate::Nonoccasional), 1);
    }

    #[test]
    fn first_publication_in_reference_year_fails_age() {
        let mut f = Fixture::new();
        f.author("A");
        for _ in 0..3 {
            f.publish("A", 2022, "article", "US", &["MED"]);
        }
        let s = f.run();
        assert_eq!(s.report.removed(FilterGate::AcademicAge), 1);
    }

    #[test]
    fn five_author_fixture() {
        // good: G1, G2. Failures: C (non-OECD), D (non-STEMM refs), E (inactive).
        let mut f = Fixture::new();
        f.good("G1");
        f.good("G2");
        f.author("C");
        for y in [1990, 2005, 2020] {
            f.publish("C", y, "article", "CN", &["MED"]);
        }
        f.author("D");
        for y in [1990, 2005, 2020] {
            f.publish("D", y, "article", "US", &["ARTS"]);
        }
        f.author("E");
        for y in [1990, 2005, 2010] {
            f.publish("E", y, "article", "US", &["MED"]);
        }
        let s = f.run();
        assert_eq!(s.author_ids(&f.corpus), vec!["G1", "G2"]);
        assert_eq!(s.report.removed_total(), 3);
        assert_eq!(s.report.removed(FilterGate::Country), 1);
        assert_eq!(s.report.removed(FilterGate::Discipline), 1);
        assert_eq!(s.report.removed(FilterGate::Active), 1);
        assert_eq!(s.report.removed_total() + s.report.retained, s.report.total);
    }

    #[test]
    fn author_without_publications_fails_first_gate() {
        let mut f = Fixture::new();
        f.author("Z");
        let s = f.run();
        assert_eq!(s.report.removed(FilterGate::Country), 1);
    }

    #[test]
    fn config_validation() {
        let mut c = SampleFilterConfig::default();
        assert!(c.validate().is_ok());
        c.min_publications = 0;
        assert!(c.validate().is_err());
        c.min_publications = 3;
        c.min_academic_age = 60;
        assert!(c.validate().is_err());
    }

    #[test]
    fn oecd_and_stemm_lists() {
        let c = SampleFilterConfig::default();
        assert_eq!(c.allowed_countries.len(), 38);
        assert_eq!(c.allowed_disciplines.len(), 16);
    }
}
