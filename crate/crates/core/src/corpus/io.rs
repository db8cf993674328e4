//! JSON Lines ingest and serialization for the three corpus input files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::{Error, Result};

const CHUNK_LINES: usize = 16_384;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PublicationLine {
    #[serde(default)]
    pub pub_id: Option<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub doc_type: Option<String>,
    #[serde(default)]
    pub author_ids: Option<Vec<String>>,
    #[serde(default)]
    pub affiliation_countries: Vec<String>,
    #[serde(default)]
    pub affiliation_institutions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal_id: Option<String>,
    #[serde(default)]
    pub citations_by_year: BTreeMap<i32, u32>,
    #[serde(default)]
    pub cited_ref_disciplines: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JournalLine {
    #[serde(default)]
    pub journal_id: Option<String>,
    #[serde(default)]
    pub percentiles: Option<BTreeMap<String, i64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuthorLine {
    #[serde(default)]
    pub author_id: Option<String>,
    #[serde(default)]
    pub gender_label: Option<String>,
    #[serde(default)]
    pub gender_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country_override: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Publications,
    Journals,
    Authors,
}

/// One schema-violating input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line_no: usize,
    pub file: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct ParseOutcome {
    pub corpus: Corpus,
    pub rejects: Vec<Reject>,
}

#[derive(Debug, Clone)]
pub struct CorpusFiles {
    pub publications: PathBuf,
    pub journals: PathBuf,
    pub authors: PathBuf,
}

impl CorpusFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            publications: dir.join("publications.jsonl"),
            journals: dir.join("journals.jsonl"),
            authors: dir.join("authors.jsonl"),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 20, f))
        .map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })
}

/// Reads and validates the three input files. Journals and authors are read
/// before publications so that every publication reference can be resolved
/// as it arrives.
pub fn parse_corpus_files(files: &CorpusFiles, reference_year: i32) -> Result<ParseOutcome> {
    let journals = open(&files.journals)?;
    let authors = open(&files.authors)?;
    let pubs = open(&files.publications)?;
    let mut corpus = Corpus::new(reference_year);
    let mut rejects = Vec::new();
    let name = |p: &Path| p.display().to_string();
    read_journals(&mut corpus, journals, &name(&files.journals), &mut rejects)
        .map_err(|e| read_err(e, &files.journals))?;
    read_authors(&mut corpus, authors, &name(&files.authors), &mut rejects)
        .map_err(|e| read_err(e, &files.authors))?;
    read_publications(&mut corpus, pubs, &name(&files.publications), &mut rejects)
        .map_err(|e| read_err(e, &files.publications))?;
    Ok(ParseOutcome { corpus, rejects })
}

fn read_err(source: std::io::Error, path: &Path) -> Error {
    Error::Read {
        path: path.to_owned(),
        source,
    }
}

/// Stream-level entry point; `names` label the rejects report
/// (publications, journals, authors).
pub fn parse_corpus<P: BufRead, J: BufRead, A: BufRead>(
    publications: P,
    journals: J,
    authors: A,
    reference_year: i32,
) -> Result<ParseOutcome> {
    let mut corpus = Corpus::new(reference_year);
    let mut rejects = Vec::new();
    read_journals(&mut corpus, journals, "journals", &mut rejects)?;
    read_authors(&mut corpus, authors, "authors", &mut rejects)?;
    read_publications(&mut corpus, publications, "publications", &mut rejects)?;
    Ok(ParseOutcome { corpus, rejects })
}

pub(crate) fn read_journals<R: BufRead>(
    corpus: &mut Corpus,
    reader: R,
    file: &str,
    rejects: &mut Vec<Reject>,
) -> std::io::Result<()> {
    read_records(reader, file, rejects, None, |line| corpus.add_journal(line).map(drop))
}

pub(crate) fn read_authors<R: BufRead>(
    corpus: &mut Corpus,
    reader: R,
    file: &str,
    rejects: &mut Vec<Reject>,
) -> std::io::Result<()> {
    read_records(reader, file, rejects, None, |line| corpus.add_author(line).map(drop))
}

pub(crate) fn read_publications<R: BufRead>(
    corpus: &mut Corpus,
    reader: R,
    file: &str,
    rejects: &mut Vec<Reject>,
) -> std::io::Result<()> {
    read_records(reader, file, rejects, None, |line| corpus.add_publication(line))
}

/// Reads up to `limit` non-blank records (all when `None`). JSON decoding of
/// each chunk runs in parallel; records are then applied in file order so
/// the resulting corpus does not depend on the worker count.
pub(crate) fn read_records<R, T, F>(
    mut reader: R,
    file: &str,
    rejects: &mut Vec<Reject>,
    limit: Option<usize>,
    mut apply: F,
) -> std::io::Result<()>
where
    R: BufRead,
    T: for<'de> Deserialize<'de> + Send,
    F: FnMut(T) -> Result<(), String>,
{
    let mut line_no = 0usize;
    let mut taken = 0usize;
    let mut chunk: Vec<(usize, String)> = Vec::with_capacity(CHUNK_LINES);
    loop {
        chunk.clear();
        while chunk.len() < CHUNK_LINES && limit.is_none_or(|l| taken < l) {
            let mut buf = String::new();
            if reader.read_line(&mut buf)? == 0 {
                break;
            }
            line_no += 1;
            if buf.trim().is_empty() {
                continue;
            }
            taken += 1;
            chunk.push((line_no, buf));
        }
        if chunk.is_empty() {
            return Ok(());
        }
        let decoded: Vec<(usize, std::result::Result<T, String>)> = chunk
            .par_iter()
            .map(|(n, text)| {
                let parsed = serde_json::from_str::<T>(text)
                    .map_err(|e| format!("malformed record: {e}"));
                (*n, parsed)
            })
            .collect();
        for (n, parsed) in decoded {
            if let Err(reason) = parsed.and_then(&mut apply) {
                rejects.push(Reject {
                    line_no: n,
                    file: file.to_owned(),
                    reason,
                });
            }
        }
    }
}

impl Corpus {
    pub fn publication_line(&self, index: usize) -> PublicationLine {
        let p = &self.publications[index];
        PublicationLine {
            pub_id: Some(p.pub_id.clone()),
            year: Some(p.year),
            doc_type: Some(p.doc_type.as_str().to_owned()),
            author_ids: Some(p.authors.iter().map(|&a| self.author_id(a).to_owned()).collect()),
            affiliation_countries: p.countries.iter().map(|&s| self.name(s).to_owned()).collect(),
            affiliation_institutions: p
                .institutions
                .iter()
                .map(|&s| self.name(s).to_owned())
                .collect(),
            journal_id: p.journal.map(|j| self.journal_id(j).to_owned()),
            citations_by_year: p.citations_by_year.iter().copied().collect(),
            cited_ref_disciplines: p
                .cited_ref_disciplines
                .iter()
                .map(|&s| self.name(s).to_owned())
                .collect(),
        }
    }

    pub fn journal_line(&self, index: usize) -> JournalLine {
        let j = &self.journals[index];
        JournalLine {
            journal_id: Some(self.name(j.journal_id).to_owned()),
            percentiles: Some(
                j.percentiles
                    .iter()
                    .map(|&(d, p)| (self.name(d).to_owned(), i64::from(p)))
                    .collect(),
            ),
        }
    }

    pub fn author_line(&self, index: usize) -> AuthorLine {
        let a = &self.authors[index];
        AuthorLine {
            author_id: Some(self.name(a.author_id).to_owned()),
            gender_label: Some(a.gender_label.as_str().to_owned()),
            gender_probability: a.gender_probability,
            country_override: a.country_override.map(|s| self.name(s).to_owned()),
        }
    }
}

pub(crate) fn write_lines<W: Write, T: Serialize + Send>(
    mut out: W,
    n: usize,
    line: impl Fn(usize) -> T + Sync,
) -> std::io::Result<()> {
    const BLOCK: usize = 8_192;
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let block: Vec<Vec<u8>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut buf = serde_json::to_vec(&line(i)).expect("record serializes");
                buf.push(b'\n');
                buf
            })
            .collect();
        for b in block {
            out.write_all(&b)?;
        }
        start = end;
    }
    out.flush()
}

/// Writes the corpus in the same three-file schema the reader accepts.
pub fn write_corpus<P: Write, J: Write, A: Write>(
    corpus: &Corpus,
    publications: P,
    journals: J,
    authors: A,
) -> std::io::Result<()> {
    write_lines(journals, corpus.journals.len(), |i| corpus.journal_line(i))?;
    write_lines(authors, corpus.authors.len(), |i| corpus.author_line(i))?;
    write_lines(publications, corpus.publications.len(), |i| {
        corpus.publication_line(i)
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(|f| BufWriter::with_capacity(1 << 20, f))
        .map_err(|source| Error::Write {
            path: path.to_owned(),
            source,
        })
}

pub fn write_corpus_files(corpus: &Corpus, files: &CorpusFiles) -> Result<()> {
    let p = create(&files.publications)?;
    let j = create(&files.journals)?;
    let a = create(&files.authors)?;
    write_corpus(corpus, p, j, a)?;
    Ok(())
}

pub fn write_rejects<W: Write>(mut out: W, rejects: &[Reject]) -> std::io::Result<()> {
    for r in rejects {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
