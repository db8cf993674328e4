//! Corpus cache, end-to-end analysis and the output manifest.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classes::{stage_values, Class, ClassTable, ProductivityType, Stage, StageValues, write_classes};
use crate::corpus::io::{read_records, write_lines};
use crate::corpus::{
    filter_sample, AuthorLine, Corpus, FilterReport, JournalLine, PublicationLine, Reject,
    SampleFilterConfig,
};
use crate::mobility::{
    sankey_export, transition_counts, write_transition_table, SankeyLabels, Scope,
    TransitionMatrix,
};
use crate::portfolio::{write_portfolios, AuthorPortfolio, PortfolioContext, PortfolioCoverage};
use crate::regression::{
    build_design, collinearity_diagonal, fit_logistic, write_collinearity_table, write_model_grid,
    write_model_table, FitOptions, ModelEntry, ModelSpec, Side,
};
use crate::{Error, Result};

pub const CACHE_FORMAT: &str = "careerflow-cache";
pub const CACHE_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub version: u32,
    pub reference_year: i32,
    pub journals: usize,
    pub authors: usize,
    pub publications: usize,
    pub rejects: usize,
    pub filter: SampleFilterConfig,
    pub report: FilterReport,
}

/// Writes the validated corpus as one line-delimited file: a versioned
/// header line, then the journal, author and publication sections.
pub fn write_cache(
    path: &Path,
    corpus: &Corpus,
    filter: &SampleFilterConfig,
    report: &FilterReport,
    rejects: usize,
) -> Result<()> {
    let header = CacheHeader {
        format: CACHE_FORMAT.into(),
        version: CACHE_VERSION,
        reference_year: corpus.reference_year,
        journals: corpus.journals.len(),
        authors: corpus.authors.len(),
        publications: corpus.publications.len(),
        rejects,
        filter: filter.clone(),
        report: report.clone(),
    };
    let write_err = |source| Error::Write {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(write_err)?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    let run = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        serde_json::to_writer(&mut *out, &header)?;
        out.write_all(b"\n")?;
        write_lines(&mut *out, corpus.journals.len(), |i| corpus.journal_line(i))?;
        write_lines(&mut *out, corpus.authors.len(), |i| corpus.author_line(i))?;
        write_lines(&mut *out, corpus.publications.len(), |i| corpus.publication_line(i))?;
        out.flush()
    };
    run(&mut out).map_err(write_err)
}

pub fn read_cache(path: &Path) -> Result<(CacheHeader, Corpus)> {
    let read_err = |source| Error::Read {
        path: path.to_owned(),
        source,
    };
    let file = File::open(path).map_err(read_err)?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(read_err)?;
    let header: CacheHeader = serde_json::from_str(&first)
        .map_err(|e| Error::Cache(format!("{}: bad header: {e}", path.display())))?;
    if header.format != CACHE_FORMAT || header.version != CACHE_VERSION {
        return Err(Error::Cache(format!(
            "{}: expected {CACHE_FORMAT} v{CACHE_VERSION}, found {} v{}",
            path.display(),
            header.format,
            header.version
        )));
    }
    let mut corpus = Corpus::new(header.reference_year);
    let mut rejects: Vec<Reject> = Vec::new();
    let name = path.display().to_string();
    read_records(&mut reader, &name, &mut rejects, Some(header.journals), |l: JournalLine| {
        corpus.add_journal(l).map(drop)
    })
    .map_err(read_err)?;
    read_records(&mut reader, &name, &mut rejects, Some(header.authors), |l: AuthorLine| {
        corpus.add_author(l).map(drop)
    })
    .map_err(read_err)?;
    read_records(&mut reader, &name, &mut rejects, Some(header.publications), |l: PublicationLine| {
        corpus.add_publication(l)
    })
    .map_err(read_err)?;
    if let Some(r) = rejects.first() {
        return Err(Error::Cache(format!("{}: line {}: {}", name, r.line_no, r.reason)));
    }
    let counts = (corpus.journals.len(), corpus.authors.len(), corpus.publications.len());
    if counts != (header.journals, header.authors, header.publications) {
        return Err(Error::Cache(format!(
            "{name}: truncated (journals/authors/publications {counts:?}, header says ({}, {}, {}))",
            header.journals, header.authors, header.publications
        )));
    }
    Ok((header, corpus))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub filter: SampleFilterConfig,
    pub ptypes: Vec<ProductivityType>,
    /// Empty means the aggregate plus every discipline present in the sample.
    pub scopes: Vec<String>,
    pub regression: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            filter: SampleFilterConfig::default(),
            ptypes: ProductivityType::ALL.to_vec(),
            scopes: Vec::new(),
            regression: true,
        }
    }
}

impl AnalyzeConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if self.ptypes.is_empty() {
            return Err(Error::Config("at least one productivity type is required".into()));
        }
        Ok(())
    }

    fn ptypes(&self) -> Vec<ProductivityType> {
        let set: BTreeSet<ProductivityType> = self.ptypes.iter().copied().collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MobilitySummary {
    pub ptype: ProductivityType,
    pub scope: String,
    pub transition: String,
    pub sample: u64,
    pub top_to_top: Option<f64>,
    pub bottom_to_bottom: Option<f64>,
    pub jumpers_up: Option<f64>,
    pub droppers_down: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AnalysisSummary {
    pub report: FilterReport,
    pub sample: usize,
    pub coverage: PortfolioCoverage,
    pub mobility: Vec<MobilitySummary>,
    pub models: usize,
    pub failed_models: usize,
    pub manifest: Vec<ManifestEntry>,
}

/// Runs `f` on a dedicated pool of `workers` threads (0: rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| Error::Write {
            path: dir.to_owned(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_owned(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|source| Error::Write {
            path: path.clone(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(|source| Error::Write { path, source })?;
        self.written.push(name.to_owned());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_manifest(dir: &Path, files: &[String]) -> Result<Vec<ManifestEntry>> {
    let mut entries = files
        .iter()
        .map(|f| {
            Ok(ManifestEntry {
                path: f.clone(),
                sha256: sha256_file(&dir.join(f))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let mut text = String::new();
    for e in &entries {
        text.push_str(&serde_json::to_string(e).map_err(std::io::Error::from)?);
        text.push('\n');
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(|source| Error::Write { path, source })?;
    Ok(entries)
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|source| Error::Read {
        path: path.clone(),
        source,
    })?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l)
                .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
        })
        .collect()
}

/// Re-hashes every listed file.
pub fn verify_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let entries = read_manifest(dir)?;
    for e in &entries {
        let actual = sha256_file(&dir.join(&e.path))
            .map_err(|err| Error::Manifest(format!("{}: {err}", e.path)))?;
        if actual != e.sha256 {
            return Err(Error::Manifest(format!(
                "{}: hash {actual} does not match manifest {}",
                e.path, e.sha256
            )));
        }
    }
    Ok(entries)
}

fn scope_file(scope: &Scope) -> String {
    scope
        .to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn pct(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.1}")).unwrap_or_default()
}

/// The analysed sample: portfolios, stage values and classes aligned by
/// position (authors sorted by id).
struct Sample<'c> {
    corpus: &'c Corpus,
    portfolios: Vec<AuthorPortfolio>,
    values: Vec<StageValues>,
    classes: ClassTable,
}

impl Sample<'_> {
    fn discipline(&self, i: usize) -> &str {
        self.corpus.name(self.portfolios[i].dominant_discipline)
    }

    fn members(&self, scope: &Scope) -> Vec<usize> {
        (0..self.portfolios.len())
            .filter(|&i| match scope {
                Scope::All => true,
                Scope::Discipline(d) => self.discipline(i) == d,
            })
            .collect()
    }

    fn matrix(&self, ptype: ProductivityType, from: Stage, to: Stage, scope: &Scope, members: &[usize]) -> TransitionMatrix {
        let col = |stage| -> Vec<Class> {
            let all = self.classes.get(ptype, stage).expect("ptype computed");
            members.iter().map(|&i| all[i]).collect()
        };
        let counts = transition_counts(&col(from), &col(to)).expect("aligned columns");
        TransitionMatrix::new(from, to, ptype, scope.clone(), counts)
    }
}

/// Derives every output for `corpus` under `out_dir` and writes a verified
/// manifest. Runs on the current rayon pool; results do not depend on its
/// size.
pub fn analyze(corpus: &Corpus, config: &AnalyzeConfig, out_dir: &Path) -> Result<AnalysisSummary> {
    config.validate()?;
    let ptypes = config.ptypes();
    let mut out = Outputs::new(out_dir)?;

    let index = corpus.author_publications();
    let selection = filter_sample(corpus, &index, &config.filter);
    out.text("filter_report.txt", &format!("{}\n", selection.report))
        .map_err(|e| e.in_stage("filter"))?;

    let ctx = PortfolioContext::new(corpus, &index);
    let (portfolios, coverage) = ctx.portfolios(&selection.retained);
    let (values, unresolved): (Vec<StageValues>, Vec<usize>) = portfolios
        .par_iter()
        .map(|p| {
            let pubs: Vec<_> = index.iter(corpus, p.author).collect();
            stage_values(corpus, &pubs, p.first_pub_year)
        })
        .unzip();
    let disciplines: Vec<_> = portfolios.iter().map(|p| p.dominant_discipline).collect();
    let classes = ClassTable::build(corpus, &disciplines, &values, &ptypes);
    let sample = Sample {
        corpus,
        portfolios,
        values,
        classes,
    };

    out.write("portfolios.jsonl", |w| Ok(write_portfolios(w, corpus, &sample.portfolios)?))
        .map_err(|e| e.in_stage("portfolio"))?;
    let ids: Vec<&str> = sample.portfolios.iter().map(|p| corpus.author_id(p.author)).collect();
    let disc_names: Vec<&str> = (0..sample.portfolios.len()).map(|i| sample.discipline(i)).collect();
    out.write("classes.jsonl", |w| Ok(write_classes(w, &ids, &disc_names, &sample.values, &sample.classes)?))
        .map_err(|e| e.in_stage("classes"))?;

    let scopes: Vec<Scope> = if config.scopes.is_empty() {
        let present: BTreeSet<&str> = disc_names.iter().copied().collect();
        std::iter::once(Scope::All)
            .chain(present.into_iter().map(|d| Scope::Discipline(d.to_owned())))
            .collect()
    } else {
        config.scopes.iter().map(|s| Scope::parse(s)).collect()
    };
    let scoped: Vec<(Scope, Vec<usize>)> = scopes
        .into_iter()
        .map(|s| {
            let m = sample.members(&s);
            (s, m)
        })
        .filter(|(_, m)| !m.is_empty())
        .collect();

    let coverage_doc = serde_json::json!({
        "sample": sample.portfolios.len(),
        "rejected_by_filter": selection.report.removed_total(),
        "portfolio": coverage,
        "prestige_unresolved_publications": unresolved.iter().sum::<usize>(),
        "small_cohorts": sample.classes.small_cohorts,
        "scopes": scoped.iter().map(|(s, m)| serde_json::json!({"scope": s.to_string(), "authors": m.len()})).collect::<Vec<_>>(),
    });
    out.text("coverage.json", &format!("{:#}\n", coverage_doc))?;

    // Mobility.
    let labels = SankeyLabels::default();
    let mut mobility = Vec::new();
    let mobility_stage = |out: &mut Outputs, mobility: &mut Vec<MobilitySummary>| -> Result<()> {
        for &ptype in &ptypes {
            for (scope, members) in &scoped {
                let name = format!("{}_{}", ptype, scope_file(scope));
                let em = sample.matrix(ptype, Stage::Early, Stage::Mid, scope, members);
                let ml = sample.matrix(ptype, Stage::Mid, Stage::Late, scope, members);
                let el = sample.matrix(ptype, Stage::Early, Stage::Late, scope, members);
                out.write(&format!("transitions_{name}.csv"), |w| {
                    write_transition_table(w, &[em.clone(), ml.clone()], Some(Stage::Late))
                })?;
                out.write(&format!("two_stage_{name}.csv"), |w| {
                    write_transition_table(w, std::slice::from_ref(&el), Some(Stage::Late))
                })?;
                out.text(&format!("sankey_{name}.txt"), &sankey_export(&[em.clone(), ml.clone()], &labels)?)?;
                out.text(&format!("sankey_two_stage_{name}.txt"), &sankey_export(std::slice::from_ref(&el), &labels)?)?;
                for (label, m) in [("early-mid", &em), ("mid-late", &ml), ("early-late", &el)] {
                    let r = m.rates();
                    mobility.push(MobilitySummary {
                        ptype,
                        scope: scope.to_string(),
                        transition: label.into(),
                        sample: m.total(),
                        top_to_top: r.top_to_top,
                        bottom_to_bottom: r.bottom_to_bottom,
                        jumpers_up: r.jumpers_up,
                        droppers_down: r.droppers_down,
                    });
                }
            }
        }
        let mut text = String::from("ptype,scope,transition,n,top_to_top,bottom_to_bottom,jumpers_up,droppers_down\n");
        for m in mobility.iter() {
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                m.ptype,
                m.scope,
                m.transition,
                m.sample,
                pct(m.top_to_top),
                pct(m.bottom_to_bottom),
                pct(m.jumpers_up),
                pct(m.droppers_down)
            ));
        }
        out.text("mobility_rates.csv", &text)
    };
    mobility_stage(&mut out, &mut mobility).map_err(|e| e.in_stage("mobility"))?;

    // Regression.
    let mut models = 0;
    let mut failed_models = 0;
    if config.regression {
        let regression_stage = |out: &mut Outputs| -> Result<(usize, usize)> {
            let mut specs = Vec::new();
            for side in Side::ALL {
                for target in [Stage::Mid, Stage::Late] {
                    for &ptype in &ptypes {
                        for (scope, members) in &scoped {
                            specs.push((ModelSpec::standard(side, target, ptype, scope.clone()), members));
                        }
                    }
                }
            }
            let options = FitOptions::default();
            let entries: Vec<ModelEntry> = specs
                .par_iter()
                .map(|(spec, members)| {
                    match build_design(spec, &sample.portfolios, &sample.classes, members) {
                        Ok(design) => ModelEntry {
                            spec: spec.clone(),
                            fit: fit_logistic(&design, &options).map_err(|e| e.to_string()),
                            collinearity: Some(collinearity_diagonal(&design).map_err(|e| e.to_string())),
                            dropped: design.dropped,
                        },
                        Err(e) => ModelEntry {
                            spec: spec.clone(),
                            fit: Err(e.to_string()),
                            collinearity: None,
                            dropped: members.len(),
                        },
                    }
                })
                .collect();
            let failed = entries.iter().filter(|e| e.fit.is_err()).count();
            for side in Side::ALL {
                for target in [Stage::Mid, Stage::Late] {
                    let family: Vec<&ModelEntry> = entries
                        .iter()
                        .filter(|e| e.spec.side == side && e.spec.target == target)
                        .collect();
                    let stem = format!("{}_{}", side.as_str(), target.as_str());
                    out.write(&format!("regression_{stem}.csv"), |w| write_model_table(w, &family))?;
                    for &ptype in &ptypes {
                        let cells: Vec<&ModelEntry> =
                            family.iter().copied().filter(|e| e.spec.ptype == ptype).collect();
                        out.write(&format!("regression_grid_{stem}_{ptype}.csv"), |w| write_model_grid(w, &cells))?;
                        out.write(&format!("collinearity_{stem}_{ptype}.csv"), |w| {
                            write_collinearity_table(w, &cells)
                        })?;
                    }
                }
            }
            Ok((entries.len(), failed))
        };
        (models, failed_models) = regression_stage(&mut out).map_err(|e| e.in_stage("regression"))?;
    }

    let written = write_manifest(out_dir, &out.written).map_err(|e| e.in_stage("manifest"))?;
    let verified = verify_manifest(out_dir).map_err(|e| e.in_stage("manifest"))?;
    if verified != written {
        return Err(Error::Manifest("manifest changed while verifying".into()).in_stage("manifest"));
    }
    Ok(AnalysisSummary {
        report: selection.report,
        sample: sample.portfolios.len(),
        coverage,
        mobility,
        models,
        failed_models,
        manifest: written,
    })
}

/// Short textual digest of an analysis directory: mobility rates of the
/// aggregate scope and the headline odds ratios.
pub fn report_summary(dir: &Path) -> Result<String> {
    let entries = verify_manifest(dir)?;
    let mut text = format!("manifest verified: {} files\n", entries.len());
    let rates = fs::read_to_string(dir.join("mobility_rates.csv")).map_err(|source| Error::Read {
        path: dir.join("mobility_rates.csv"),
        source,
    })?;
    text.push_str("\nmobility (ALL):\n");
    text.push_str(&format!(
        "{:<5} {:<11} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "ptype", "transition", "n", "top>top", "bot>bot", "up", "down"
    ));
    for line in rates.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() == 8 && f[1] == "ALL" {
            text.push_str(&format!(
                "{:<5} {:<11} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
                f[0], f[2], f[3], f[4], f[5], f[6], f[7]
            ));
        }
    }
    let mut grids: Vec<&ManifestEntry> = entries
        .iter()
        .filter(|e| e.path.starts_with("regression_grid_"))
        .collect();
    grids.sort_by(|a, b| a.path.cmp(&b.path));
    for g in grids {
        let content = fs::read_to_string(dir.join(&g.path))?;
        let mut reader = csv::Reader::from_reader(content.as_bytes());
        let headers = reader.headers().map_err(|e| Error::Manifest(e.to_string()))?.clone();
        let Some(all_col) = headers.iter().position(|h| h == "ALL") else {
            continue;
        };
        text.push_str(&format!("\n{} (ALL):\n", g.path.trim_end_matches(".csv")));
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Manifest(e.to_string()))?;
            let value = rec.get(all_col).unwrap_or("");
            text.push_str(&format!("  {:<28} {}\n", &rec[0], if value.is_empty() { "n.s." } else { value }));
        }
    }
    Ok(text)
}
