//! Per-author lifetime attributes: academic age, dominant discipline,
//! country and institution, gender gate, collaboration metrics, field-weighted
//! citation impact and average journal percentile rank per career stage.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::classes::Stage;
use crate::corpus::{AuthorPublications, Corpus, Gender, PublicationRecord};
use crate::symbols::{Interner, Sym};

pub const GENDER_THRESHOLD: f64 = 0.85;
pub const TEAM_SIZE_CAP: usize = 10;
/// Citation window: publication year plus three following years.
pub const FWCI_SPAN_YEARS: i32 = 4;
pub const TOP_INSTITUTIONS: usize = 200;
pub const TOP_INSTITUTION_WINDOW_YEARS: i32 = 4;

pub fn academic_age(pubs: &[&PublicationRecord], reference_year: i32) -> Option<i32> {
    first_pub_year(pubs).map(|y| reference_year - y)
}

/// Earliest publication year over every document type.
pub fn first_pub_year(pubs: &[&PublicationRecord]) -> Option<i32> {
    pubs.iter().map(|p| p.year).min()
}

/// Most frequent code; ties go to the lexicographically smallest code name.
pub fn modal(symbols: &Interner, codes: impl IntoIterator<Item = Sym>) -> Option<Sym> {
    let mut counts: HashMap<Sym, usize> = HashMap::new();
    for c in codes {
        *counts.entry(c).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|(sa, ca), (sb, cb)| {
            ca.cmp(cb)
                .then_with(|| symbols.resolve(*sb).cmp(symbols.resolve(*sa)))
        })
        .map(|(s, _)| s)
}

pub fn dominant_discipline(symbols: &Interner, pubs: &[&PublicationRecord]) -> Option<Sym> {
    modal(
        symbols,
        pubs.iter().flat_map(|p| p.cited_ref_disciplines.iter().copied()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffiliationKind {
    Country,
    Institution,
}

pub fn dominant_affiliation(
    symbols: &Interner,
    pubs: &[&PublicationRecord],
    kind: AffiliationKind,
) -> Option<Sym> {
    let codes = pubs.iter().flat_map(|p| match kind {
        AffiliationKind::Country => p.countries.iter().copied(),
        AffiliationKind::Institution => p.institutions.iter().copied(),
    });
    modal(symbols, codes)
}

/// The author's country: an explicit override when the author record has
/// one, otherwise the modal affiliation country.
pub fn author_country(corpus: &Corpus, author: u32, pubs: &[&PublicationRecord]) -> Option<Sym> {
    corpus.authors[author as usize]
        .country_override
        .or_else(|| dominant_affiliation(&corpus.symbols, pubs, AffiliationKind::Country))
}

pub fn gender_gate(label: Gender, probability: Option<f64>, threshold: f64) -> Gender {
    match probability {
        Some(p) if label != Gender::Unknown && p >= threshold => label,
        _ => Gender::Unknown,
    }
}

/// Percentage of collaborative publications (two or more authors) that are
/// international (two or more affiliation countries). `None` when the author
/// has no collaborative publications.
pub fn intl_collab_rate(pubs: &[&PublicationRecord]) -> Option<f64> {
    let (collab, intl) = pubs
        .iter()
        .filter(|p| p.team_size() >= 2)
        .fold((0usize, 0usize), |(c, i), p| {
            (c + 1, i + usize::from(p.countries.len() >= 2))
        });
    (collab > 0).then(|| 100.0 * intl as f64 / collab as f64)
}

pub fn median_team_size(pubs: &[&PublicationRecord]) -> Option<f64> {
    let mut sizes: Vec<usize> = pubs
        .iter()
        .map(|p| p.team_size().min(TEAM_SIZE_CAP))
        .collect();
    median(&mut sizes)
}

fn median(values: &mut [usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    })
}

/// Mean four-year citation count per (discipline, publication year) cell,
/// computed from the corpus itself. A publication contributes once to every
/// discipline of its journal.
#[derive(Debug, Clone, Default)]
pub struct FieldBaseline {
    cells: HashMap<(Sym, i32), Cell>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    citations: u64,
    publications: u64,
}

impl FieldBaseline {
    pub fn mean(&self, discipline: Sym, year: i32) -> Option<f64> {
        self.cells
            .get(&(discipline, year))
            .map(|c| c.citations as f64 / c.publications as f64)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = ((Sym, i32), f64)> + '_ {
        self.cells
            .iter()
            .map(|(&k, c)| (k, c.citations as f64 / c.publications as f64))
    }
}

pub fn build_field_baseline(corpus: &Corpus) -> FieldBaseline {
    // Integer sums make the parallel reduction order-independent.
    let cells = corpus
        .publications
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<(Sym, i32), Cell>, p| {
            if let Some(journal) = corpus.journal_of(p) {
                let cites = p.citations_within(FWCI_SPAN_YEARS);
                for &(d, _) in &journal.percentiles {
                    let cell = acc.entry((d, p.year)).or_default();
                    cell.citations += cites;
                    cell.publications += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, c) in b {
                let cell = a.entry(k).or_default();
                cell.citations += c.citations;
                cell.publications += c.publications;
            }
            a
        });
    FieldBaseline { cells }
}

/// In-window citations over the baseline mean of one discipline cell.
pub fn fwci_ratio(p: &PublicationRecord, discipline: Sym, baseline: &FieldBaseline) -> Option<f64> {
    let mean = baseline.mean(discipline, p.year)?;
    (mean > 0.0).then(|| p.citations_within(FWCI_SPAN_YEARS) as f64 / mean)
}

/// Publication FWCI 4y: mean of the per-discipline ratios over the journal's
/// disciplines. `None` without a journal or when any cell baseline is absent
/// or zero.
pub fn fwci4y(corpus: &Corpus, p: &PublicationRecord, baseline: &FieldBaseline) -> Option<f64> {
    let journal = corpus.journal_of(p)?;
    let mut sum = 0.0;
    for &(d, _) in &journal.percentiles {
        sum += fwci_ratio(p, d, baseline)?;
    }
    Some(sum / journal.percentiles.len() as f64)
}

/// Author mean FWCI 4y plus the number of publications skipped for lack of a
/// usable baseline.
pub fn mean_fwci4y(
    corpus: &Corpus,
    pubs: &[&PublicationRecord],
    baseline: &FieldBaseline,
) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut skipped = 0usize;
    for p in pubs {
        if p.journal.is_none() {
            continue;
        }
        match fwci4y(corpus, p, baseline) {
            Some(v) => {
                sum += v;
                n += 1;
            }
            None => skipped += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), skipped)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn len(&self) -> i32 {
        self.end - self.start + 1
    }
}

/// Average journal percentile rank over the publications in `window`, each
/// journal contributing its highest per-discipline percentile.
pub fn ajpr(corpus: &Corpus, pubs: &[&PublicationRecord], window: YearWindow) -> Option<f64> {
    let (sum, n) = pubs
        .iter()
        .filter(|p| window.contains(p.year))
        .filter_map(|p| corpus.journal_of(p))
        .fold((0u64, 0u64), |(s, n), j| (s + u64::from(j.max_percentile()), n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

/// Institutions ranked by publication output over the last four years before
/// (and including) the reference year. Ranks are competition ranks, so every
/// institution tied at the cut-off is inside it.
#[derive(Debug, Clone, Default)]
pub struct InstitutionRanking {
    ranks: HashMap<Sym, usize>,
}

impl InstitutionRanking {
    pub fn build(corpus: &Corpus) -> Self {
        let first = corpus.reference_year - TOP_INSTITUTION_WINDOW_YEARS + 1;
        let mut output: HashMap<Sym, u64> = HashMap::new();
        for p in corpus
            .publications
            .iter()
            .filter(|p| p.year >= first && p.year <= corpus.reference_year)
        {
            for &i in &p.institutions {
                *output.entry(i).or_default() += 1;
            }
        }
        Self::from_output(output)
    }

    pub fn from_output(output: HashMap<Sym, u64>) -> Self {
        let mut counts: Vec<u64> = output.values().copied().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let ranks = output
            .into_iter()
            .map(|(sym, c)| (sym, 1 + counts.partition_point(|&x| x > c)))
            .collect();
        Self { ranks }
    }

    pub fn rank(&self, institution: Sym) -> Option<usize> {
        self.ranks.get(&institution).copied()
    }

    pub fn is_top(&self, institution: Option<Sym>, top_n: usize) -> bool {
        institution
            .and_then(|i| self.rank(i))
            .is_some_and(|r| r <= top_n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorPortfolio {
    pub author: u32,
    pub first_pub_year: i32,
    pub academic_age: i32,
    pub gender: Gender,
    pub dominant_discipline: Sym,
    pub dominant_country: Sym,
    pub dominant_institution: Option<Sym>,
    pub top200: bool,
    pub intl_collab_rate: Option<f64>,
    pub median_team_size: f64,
    pub mean_fwci4y: Option<f64>,
    pub ajpr_by_stage: [Option<f64>; 3],
}

impl AuthorPortfolio {
    pub fn ajpr(&self, stage: Stage) -> Option<f64> {
        self.ajpr_by_stage[stage.index()]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PortfolioCoverage {
    pub authors: usize,
    pub publications_without_journal: usize,
    pub fwci_skipped_publications: usize,
}

/// Shared, frozen inputs for per-author derivation.
pub struct PortfolioContext<'c> {
    pub corpus: &'c Corpus,
    pub index: &'c AuthorPublications,
    pub baseline: FieldBaseline,
    pub ranking: InstitutionRanking,
}

impl<'c> PortfolioContext<'c> {
    pub fn new(corpus: &'c Corpus, index: &'c AuthorPublications) -> Self {
        Self {
            corpus,
            index,
            baseline: build_field_baseline(corpus),
            ranking: InstitutionRanking::build(corpus),
        }
    }

    /// `None` when the author lacks publications, a discipline or a country.
    pub fn portfolio(&self, author: u32) -> Option<(AuthorPortfolio, PortfolioCoverage)> {
        let corpus = self.corpus;
        let pubs: Vec<&PublicationRecord> = self.index.iter(corpus, author).collect();
        let first_pub_year = first_pub_year(&pubs)?;
        let dominant_discipline = dominant_discipline(&corpus.symbols, &pubs)?;
        let dominant_country = author_country(corpus, author, &pubs)?;
        let dominant_institution =
            dominant_affiliation(&corpus.symbols, &pubs, AffiliationKind::Institution);
        let record = &corpus.authors[author as usize];
        let (mean_fwci4y, fwci_skipped) = mean_fwci4y(corpus, &pubs, &self.baseline);
        let mut ajpr_by_stage = [None; 3];
        for stage in Stage::ALL {
            let window = stage.window(first_pub_year, corpus.reference_year);
            ajpr_by_stage[stage.index()] = ajpr(corpus, &pubs, window);
        }
        let portfolio = AuthorPortfolio {
            author,
            first_pub_year,
            academic_age: corpus.reference_year - first_pub_year,
            gender: gender_gate(record.gender_label, record.gender_probability, GENDER_THRESHOLD),
            dominant_discipline,
            dominant_country,
            dominant_institution,
            top200: self.ranking.is_top(dominant_institution, TOP_INSTITUTIONS),
            intl_collab_rate: intl_collab_rate(&pubs),
            median_team_size: median_team_size(&pubs)?,
            mean_fwci4y,
            ajpr_by_stage,
        };
        let coverage = PortfolioCoverage {
            authors: 1,
            publications_without_journal: pubs.iter().filter(|p| p.journal.is_none()).count(),
            fwci_skipped_publications: fwci_skipped,
        };
        Some((portfolio, coverage))
    }

    /// Portfolios for `authors` in the given order; authors whose portfolio
    /// is undefined are dropped.
    pub fn portfolios(&self, authors: &[u32]) -> (Vec<AuthorPortfolio>, PortfolioCoverage) {
        let built: Vec<_> = authors.par_iter().filter_map(|&a| self.portfolio(a)).collect();
        let mut coverage = PortfolioCoverage::default();
        let mut out = Vec::with_capacity(built.len());
        for (p, c) in built {
            coverage.authors += c.authors;
            coverage.publications_without_journal += c.publications_without_journal;
            coverage.fwci_skipped_publications += c.fwci_skipped_publications;
            out.push(p);
        }
        (out, coverage)
    }
}

#[derive(Serialize)]
struct PortfolioLine<'a> {
    author_id: &'a str,
    first_pub_year: i32,
    academic_age: i32,
    gender: &'static str,
    dominant_discipline: &'a str,
    dominant_country: &'a str,
    dominant_institution: Option<&'a str>,
    top200: bool,
    intl_collab_rate: Option<f64>,
    median_team_size: f64,
    mean_fwci4y: Option<f64>,
    ajpr_by_stage: StageMap,
}

#[derive(Serialize)]
struct StageMap {
    #[serde(skip_serializing_if = "Option::is_none")]
    early: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mid: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    late: Option<f64>,
}

/// One JSON line per author, fields in [`AuthorPortfolio`] order.
pub fn write_portfolios<W: Write>(
    mut out: W,
    corpus: &Corpus,
    portfolios: &[AuthorPortfolio],
) -> std::io::Result<()> {
    for p in portfolios {
        let line = PortfolioLine {
            author_id: corpus.author_id(p.author),
            first_pub_year: p.first_pub_year,
            academic_age: p.academic_age,
            gender: p.gender.as_str(),
            dominant_discipline: corpus.name(p.dominant_discipline),
            dominant_country: corpus.name(p.dominant_country),
            dominant_institution: p.dominant_institution.map(|s| corpus.name(s)),
            top200: p.top200,
            intl_collab_rate: p.intl_collab_rate,
            median_team_size: p.median_team_size,
            mean_fwci4y: p.mean_fwci4y,
            ajpr_by_stage: StageMap {
                early: p.ajpr(Stage::Early),
                mid: p.ajpr(Stage::Mid),
                late: p.ajpr(Stage::Late),
            },
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
