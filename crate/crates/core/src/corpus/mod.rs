//! Corpus data model, ingest and the sample-selection filter chain.
//!
//! A [`Corpus`] owns three record tables (journals, authors, publications)
//! plus an [`Interner`] for the string codes they share. Publications refer
//! to journals and authors by their dense position in those tables, so every
//! reference in a constructed corpus is resolved by construction.

pub mod filter;
pub(crate) mod io;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::symbols::{Interner, Sym};

pub use filter::{filter_sample, FilterGate, OECD_COUNTRIES, STEMM_DISCIPLINES, FilterReport, SampleFilterConfig, SampleSelection};
pub use io::{
    parse_corpus, parse_corpus_files, write_corpus, write_corpus_files, write_rejects,
    AuthorLine, CorpusFiles, JournalLine, ParseOutcome, PublicationLine, Reject, SourceKind,
};

pub const MIN_YEAR: i32 = 1900;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    ConferencePaper,
    Other,
}

impl DocType {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "article" => Some(DocType::Article),
            "conference_paper" => Some(DocType::ConferencePaper),
            "other" => Some(DocType::Other),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::ConferencePaper => "conference_paper",
            DocType::Other => "other",
        }
    }

    /// Journal articles and conference papers count toward productivity and
    /// the nonoccasional gate; everything else is ingested but not counted.
    pub fn is_qualifying(self) -> bool {
        matches!(self, DocType::Article | DocType::ConferencePaper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
    Unknown,
}

impl Gender {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "female" => Some(Gender::Female),
            "male" => Some(Gender::Male),
            "unknown" => Some(Gender::Unknown),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    /// Positions in [`Corpus::authors`], in byline order.
    pub authors: Vec<u32>,
    pub countries: Vec<Sym>,
    pub institutions: Vec<Sym>,
    /// Position in [`Corpus::journals`].
    pub journal: Option<u32>,
    /// `(year, count)` sorted by year, years never before `self.year`.
    pub citations_by_year: Vec<(i32, u32)>,
    pub cited_ref_disciplines: Vec<Sym>,
}

impl PublicationRecord {
    /// Citations received in `[year, year + span - 1]`.
    pub fn citations_within(&self, span: i32) -> u64 {
        let last = self.year + span - 1;
        self.citations_by_year
            .iter()
            .filter(|(y, _)| *y <= last)
            .map(|&(_, c)| u64::from(c))
            .sum()
    }

    pub fn team_size(&self) -> usize {
        self.authors.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JournalRecord {
    pub journal_id: Sym,
    /// `(discipline, percentile)` sorted by discipline code.
    pub percentiles: Vec<(Sym, u8)>,
}

impl JournalRecord {
    /// Percentile in the discipline where the journal ranks highest.
    pub fn max_percentile(&self) -> u8 {
        self.percentiles.iter().map(|&(_, p)| p).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorRecord {
    pub author_id: Sym,
    pub gender_label: Gender,
    pub gender_probability: Option<f64>,
    pub country_override: Option<Sym>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub reference_year: i32,
    pub journals: Vec<JournalRecord>,
    pub authors: Vec<AuthorRecord>,
    pub publications: Vec<PublicationRecord>,
    pub symbols: Interner,
    journal_index: HashMap<Sym, u32>,
    author_index: HashMap<Sym, u32>,
    pub_ids: HashSet<String>,
}

impl Corpus {
    pub fn new(reference_year: i32) -> Self {
        Self {
            reference_year,
            journals: Vec::new(),
            authors: Vec::new(),
            publications: Vec::new(),
            symbols: Interner::new(),
            journal_index: HashMap::new(),
            author_index: HashMap::new(),
            pub_ids: HashSet::new(),
        }
    }

    pub fn name(&self, sym: Sym) -> &str {
        self.symbols.resolve(sym)
    }

    pub fn author_id(&self, author: u32) -> &str {
        self.name(self.authors[author as usize].author_id)
    }

    pub fn journal_id(&self, journal: u32) -> &str {
        self.name(self.journals[journal as usize].journal_id)
    }

    pub fn find_author(&self, author_id: &str) -> Option<u32> {
        let sym = self.symbols.lookup(author_id)?;
        self.author_index.get(&sym).copied()
    }

    pub fn find_journal(&self, journal_id: &str) -> Option<u32> {
        let sym = self.symbols.lookup(journal_id)?;
        self.journal_index.get(&sym).copied()
    }

    pub fn journal_of(&self, publication: &PublicationRecord) -> Option<&JournalRecord> {
        publication.journal.map(|j| &self.journals[j as usize])
    }

    /// Adds a journal, enforcing the journal invariants. Returns the reject
    /// reason on failure.
    pub fn add_journal(&mut self, line: JournalLine) -> Result<u32, String> {
        let id = line.journal_id.ok_or("missing journal_id")?;
        if id.is_empty() {
            return Err("empty journal_id".into());
        }
        let percentiles = line.percentiles.ok_or("missing percentiles")?;
        if percentiles.is_empty() {
            return Err("empty percentiles".into());
        }
        for (discipline, &p) in &percentiles {
            if !(0..=99).contains(&p) {
                return Err(format!(
                    "percentile {p} for discipline '{discipline}' outside [0, 99]"
                ));
            }
        }
        let sym = self.symbols.intern(&id);
        if self.journal_index.contains_key(&sym) {
            return Err(format!("duplicate journal_id '{id}'"));
        }
        let percentiles = percentiles
            .iter()
            .map(|(d, &p)| (self.symbols.intern(d), p as u8))
            .collect();
        let ix = self.journals.len() as u32;
        self.journals.push(JournalRecord {
            journal_id: sym,
            percentiles,
        });
        self.journal_index.insert(sym, ix);
        Ok(ix)
    }

    pub fn add_author(&mut self, line: AuthorLine) -> Result<u32, String> {
        let id = line.author_id.ok_or("missing author_id")?;
        if id.is_empty() {
            return Err("empty author_id".into());
        }
        let label = match line.gender_label.as_deref() {
            None => Gender::Unknown,
            Some(s) => Gender::parse(s).ok_or_else(|| format!("unknown gender_label '{s}'"))?,
        };
        if let Some(p) = line.gender_probability {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("gender_probability {p} outside [0, 1]"));
            }
        }
        if label != Gender::Unknown && line.gender_probability.is_none() {
            return Err(format!(
                "gender_probability required for gender_label '{}'",
                label.as_str()
            ));
        }
        let sym = self.symbols.intern(&id);
        if self.author_index.contains_key(&sym) {
            return Err(format!("duplicate author_id '{id}'"));
        }
        let country_override = line.country_override.as_deref().map(|c| self.symbols.intern(c));
        let ix = self.authors.len() as u32;
        self.authors.push(AuthorRecord {
            author_id: sym,
            gender_label: label,
            gender_probability: line.gender_probability,
            country_override,
        });
        self.author_index.insert(sym, ix);
        Ok(ix)
    }

    /// Adds a publication. Journal and author references must already be
    /// present.
    pub fn add_publication(&mut self, line: PublicationLine) -> Result<(), String> {
        let pub_id = line.pub_id.ok_or("missing pub_id")?;
        if pub_id.is_empty() {
            return Err("empty pub_id".into());
        }
        let year = line.year.ok_or("missing year")?;
        if !(MIN_YEAR..=self.reference_year).contains(&year) {
            return Err(format!(
                "year {year} outside [{MIN_YEAR}, {}]",
                self.reference_year
            ));
        }
        let doc_type = line.doc_type.as_deref().ok_or("missing doc_type")?;
        let doc_type =
            DocType::parse(doc_type).ok_or_else(|| format!("unknown doc_type '{doc_type}'"))?;
        let author_ids = line.author_ids.ok_or("missing author_ids")?;
        if author_ids.is_empty() {
            return Err("empty author_ids".into());
        }
        let mut authors = Vec::with_capacity(author_ids.len());
        for id in &author_ids {
            let ix = self
                .find_author(id)
                .ok_or_else(|| format!("unresolved author_id '{id}'"))?;
            if authors.contains(&ix) {
                return Err(format!("duplicate author_id '{id}' in author_ids"));
            }
            authors.push(ix);
        }
        let journal = match line.journal_id.as_deref() {
            None => None,
            Some(j) => Some(
                self.find_journal(j)
                    .ok_or_else(|| format!("unresolved journal_id '{j}'"))?,
            ),
        };
        if let Some((&first, _)) = line.citations_by_year.iter().next() {
            if first < year {
                return Err(format!(
                    "citation year {first} precedes publication year {year}"
                ));
            }
        }
        if self.pub_ids.contains(&pub_id) {
            return Err(format!("duplicate pub_id '{pub_id}'"));
        }
        let countries = intern_set(&mut self.symbols, &line.affiliation_countries);
        let institutions = intern_set(&mut self.symbols, &line.affiliation_institutions);
        let cited_ref_disciplines = line
            .cited_ref_disciplines
            .iter()
            .map(|d| self.symbols.intern(d))
            .collect();
        let citations_by_year = line.citations_by_year.into_iter().collect();
        self.pub_ids.insert(pub_id.clone());
        self.publications.push(PublicationRecord {
            pub_id,
            year,
            doc_type,
            authors,
            countries,
            institutions,
            journal,
            citations_by_year,
            cited_ref_disciplines,
        });
        Ok(())
    }

    /// Groups publication positions by author.
    pub fn author_publications(&self) -> AuthorPublications {
        AuthorPublications::build(self)
    }
}

fn intern_set(symbols: &mut Interner, values: &[String]) -> Vec<Sym> {
    let mut out: Vec<Sym> = Vec::with_capacity(values.len());
    for v in values {
        let sym = symbols.intern(v);
        if !out.contains(&sym) {
            out.push(sym);
        }
    }
    out
}

/// Compressed author → publications adjacency. Each author's list is in
/// ascending publication position, which is the fixed summation order used
/// by every per-author aggregate.
#[derive(Debug, Clone)]
pub struct AuthorPublications {
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl AuthorPublications {
    fn build(corpus: &Corpus) -> Self {
        let n = corpus.authors.len();
        let mut offsets = vec![0usize; n + 1];
        for p in &corpus.publications {
            for &a in &p.authors {
                offsets[a as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut items = vec![0u32; offsets[n]];
        for (pi, p) in corpus.publications.iter().enumerate() {
            for &a in &p.authors {
                let slot = &mut cursor[a as usize];
                items[*slot] = pi as u32;
                *slot += 1;
            }
        }
        Self { offsets, items }
    }

    pub fn of(&self, author: u32) -> &[u32] {
        let a = author as usize;
        &self.items[self.offsets[a]..self.offsets[a + 1]]
    }

    pub fn iter<'a, 'c: 'a>(
        &'a self,
        corpus: &'c Corpus,
        author: u32,
    ) -> impl Iterator<Item = &'c PublicationRecord> + 'a {
        self.of(author)
            .iter()
            .map(move |&p| &corpus.publications[p as usize])
    }
}

/// Convenience for fixtures and the generator: a journal line from borrowed
/// parts.
pub fn journal_line(journal_id: &str, percentiles: &[(&str, i64)]) -> JournalLine {
    JournalLine {
        journal_id: Some(journal_id.to_owned()),
        percentiles: Some(
            percentiles
                .iter()
                .map(|&(d, p)| (d.to_owned(), p))
                .collect::<BTreeMap<_, _>>(),
        ),
    }
}

pub fn author_line(author_id: &str, gender: Gender, probability: Option<f64>) -> AuthorLine {
    AuthorLine {
        author_id: Some(author_id.to_owned()),
        gender_label: Some(gender.as_str().to_owned()),
        gender_probability: probability,
        country_override: None,
    }
}
