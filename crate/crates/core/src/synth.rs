//! Seeded synthetic cohorts and corpora with controllable persistence.
//!
//! Every author draws from its own ChaCha stream selected by the author
//! index, so the output does not depend on how work is scheduled.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{assign_classes, Class, ProductivityType, Stage};
use crate::corpus::filter::{OECD_COUNTRIES, STEMM_DISCIPLINES};
use crate::corpus::{AuthorLine, Corpus, JournalLine, PublicationLine};
use crate::mobility::{transition_counts, Scope, TransitionMatrix};
use crate::regression::Design;
use crate::{Error, Result};

/// Discipline codes used after the STEMM list is exhausted.
pub const EXTRA_DISCIPLINES: [&str; 8] = [
    "ARTS", "BUS", "DEC", "ECON", "PSYCH", "SOC", "VET", "DENT",
];

const NON_OECD_COUNTRIES: [&str; 6] = ["BR", "CN", "EG", "IN", "RU", "ZA"];

/// Authors are spread over this many OECD countries (a prefix of the list).
const HOME_COUNTRIES: usize = 20;

const AUTHORS_PER_CHUNK: usize = 4096;

pub fn discipline_codes(n: usize) -> Result<Vec<&'static str>> {
    let all: Vec<&'static str> = STEMM_DISCIPLINES
        .iter()
        .chain(EXTRA_DISCIPLINES.iter())
        .copied()
        .collect();
    if n == 0 || n > all.len() {
        return Err(Error::Config(format!(
            "n_disciplines must be in [1, {}], got {n}",
            all.len()
        )));
    }
    Ok(all[..n].to_vec())
}

fn author_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).map_or(0, |d| d.sample(rng) as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    pub n_authors: usize,
    pub n_disciplines: usize,
    /// Stage-to-stage persistence of log productivity, in [0, 1].
    pub rho: f64,
    /// Spread of log ability across authors.
    pub sigma: f64,
    /// Stationary spread of stage-specific log productivity around ability.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            n_authors: 1000,
            n_disciplines: 1,
            rho: 0.7,
            sigma: 0.0,
            noise_sd: 0.5,
            seed: 1,
        }
    }
}

impl CohortConfig {
    pub fn validate(&self) -> Result<()> {
        discipline_codes(self.n_disciplines)?;
        if self.n_authors < 5 * self.n_disciplines {
            return Err(Error::Config(format!(
                "n_authors ({}) must be at least 5 x n_disciplines ({}) to form classifiable cohorts",
                self.n_authors, self.n_disciplines
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho {} outside [0, 1]", self.rho)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma {} must be >= 0", self.sigma)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Config(format!("noise_sd {} must be >= 0", self.noise_sd)));
        }
        Ok(())
    }
}

/// Latent ability and early/mid/late productivity per author.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    /// Discipline index per author (round robin).
    pub disciplines: Vec<usize>,
    pub ability: Vec<f64>,
    pub values: Vec<[f64; 3]>,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 20/60/20 classes per stage, cohorts formed by discipline.
    pub fn classes(&self, stage: Stage) -> Vec<Class> {
        let n_disc = self.disciplines.iter().max().map_or(0, |&d| d + 1);
        let mut out = vec![Class::Middle; self.len()];
        for d in 0..n_disc {
            let members: Vec<usize> = (0..self.len()).filter(|&i| self.disciplines[i] == d).collect();
            let values: Vec<f64> = members.iter().map(|&i| self.values[i][stage.index()]).collect();
            for (&i, c) in members.iter().zip(assign_classes(&values).classes) {
                out[i] = c;
            }
        }
        out
    }

    /// Class flows between two stages over the whole cohort. The matrix is
    /// labelled P1/ALL; cohort values carry no counting scheme.
    pub fn transitions(&self, from: Stage, to: Stage) -> TransitionMatrix {
        let counts = transition_counts(&self.classes(from), &self.classes(to))
            .expect("aligned class columns");
        TransitionMatrix::new(from, to, ProductivityType::P1, Scope::All, counts)
    }

    /// Early→mid and mid→late flows summed.
    pub fn pooled_transitions(&self) -> TransitionMatrix {
        let mut m = self.transitions(Stage::Early, Stage::Mid);
        let late = self.transitions(Stage::Mid, Stage::Late);
        for i in 0..3 {
            for j in 0..3 {
                m.counts[i][j] += late.counts[i][j];
            }
        }
        m
    }
}

fn cohort_author(config: &CohortConfig, rng: &mut ChaCha8Rng) -> (f64, [f64; 3]) {
    let log_a = config.sigma * normal(rng);
    let rho = config.rho;
    let innovation = config.noise_sd * (1.0 - rho * rho).max(0.0).sqrt();
    let mut log_v = [0.0; 3];
    log_v[0] = log_a + config.noise_sd * normal(rng);
    for s in 1..3 {
        log_v[s] = rho * log_v[s - 1] + (1.0 - rho) * log_a + innovation * normal(rng);
    }
    (log_a.exp(), log_v.map(f64::exp))
}

/// Stage values from a stationary log-space autoregression:
/// `log v1 = log a + τ·e1`,
/// `log v_s = ρ·log v_{s-1} + (1 - ρ)·log a + τ·sqrt(1 - ρ²)·e_s`
/// with `log a ~ N(0, σ²)` and standard normal `e`.
pub fn gen_cohort(config: &CohortConfig) -> Result<Cohort> {
    config.validate()?;
    let drawn: Vec<(f64, [f64; 3])> = (0..config.n_authors)
        .into_par_iter()
        .map(|i| {
            let mut rng = author_rng(config.seed, i as u64);
            cohort_author(config, &mut rng)
        })
        .collect();
    let (ability, values) = drawn.into_iter().unzip();
    Ok(Cohort {
        disciplines: (0..config.n_authors).map(|i| i % config.n_disciplines).collect(),
        ability,
        values,
    })
}

/// Pooled (early→mid plus mid→late) top→top percentage of a cohort.
pub fn simulated_persistence(config: &CohortConfig) -> Result<f64> {
    let m = gen_cohort(config)?.pooled_transitions();
    Ok(m.percent(Class::Top, Class::Top).unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub rho: f64,
    pub top_to_top: f64,
    pub bottom_to_bottom: f64,
    pub evaluations: usize,
}

/// Bisection on `rho` (all other settings from `base`, same seed at every
/// step) until the pooled top→top percentage is within `tolerance_pp` of
/// `target_pct`.
pub fn calibrate_persistence(
    target_pct: f64,
    base: &CohortConfig,
    tolerance_pp: f64,
) -> Result<Calibration> {
    let at = |rho: f64| -> Result<(f64, f64)> {
        let cfg = CohortConfig { rho, ..base.clone() };
        let m = gen_cohort(&cfg)?.pooled_transitions();
        Ok((
            m.percent(Class::Top, Class::Top).unwrap_or(0.0),
            m.percent(Class::Bottom, Class::Bottom).unwrap_or(0.0),
        ))
    };
    let done = |rho: f64, (top, bottom): (f64, f64), evaluations| Calibration {
        rho,
        top_to_top: top,
        bottom_to_bottom: bottom,
        evaluations,
    };
    let low = at(0.0)?;
    let high = at(1.0)?;
    if !(target_pct.is_finite() && target_pct >= low.0 - tolerance_pp && target_pct <= high.0 + tolerance_pp) {
        return Err(Error::CalibrationRange {
            target: target_pct,
            low: low.0,
            high: high.0,
        });
    }
    if (low.0 - target_pct).abs() <= tolerance_pp {
        return Ok(done(0.0, low, 2));
    }
    if (high.0 - target_pct).abs() <= tolerance_pp {
        return Ok(done(1.0, high, 2));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut evaluations = 2;
    let mut best = (f64::INFINITY, 0.0, low);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let rates = at(mid)?;
        evaluations += 1;
        let miss = (rates.0 - target_pct).abs();
        if miss < best.0 {
            best = (miss, mid, rates);
        }
        if miss <= tolerance_pp {
            return Ok(done(mid, rates, evaluations));
        }
        if rates.0 < target_pct {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Sampling noise can make the rate step over the band; report the
    // closest point found.
    Ok(done(best.1, best.2, evaluations))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub cohort: CohortConfig,
    pub reference_year: i32,
    pub min_academic_age: i32,
    pub max_academic_age: i32,
    /// Expected qualifying-or-not publications per year at stage value 1.
    pub pubs_per_year: f64,
    /// Rate multiplier for the first four publishing years.
    pub pre_early_factor: f64,
    /// Mean number of co-authors (Poisson).
    pub coauthors_mean: f64,
    /// Probability that a co-author is affiliated abroad.
    pub intl_probability: f64,
    /// Journal percentile shift per unit of log stage productivity.
    pub prestige_bias: f64,
    /// Mean yearly citations at percentile 50.
    pub citation_rate: f64,
    pub journals_per_discipline: usize,
    /// Share of journals ranked in a second discipline.
    pub second_discipline_share: f64,
    pub institutions_per_country: usize,
    pub non_oecd_share: f64,
    /// Share of authors without output in the last five years.
    pub inactive_share: f64,
    pub no_journal_share: f64,
    pub conference_share: f64,
    pub other_doc_share: f64,
    /// Probability a cited reference comes from the author's own discipline.
    pub own_discipline_citation: f64,
    /// External co-authors per (discipline, three-year bucket).
    pub coauthor_pool: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            cohort: CohortConfig::default(),
            reference_year: 2022,
            min_academic_age: 20,
            max_academic_age: 55,
            pubs_per_year: 0.5,
            pre_early_factor: 0.3,
            coauthors_mean: 2.5,
            intl_probability: 0.25,
            prestige_bias: 1.0,
            citation_rate: 1.5,
            journals_per_discipline: 100,
            second_discipline_share: 0.1,
            institutions_per_country: 50,
            non_oecd_share: 0.08,
            inactive_share: 0.03,
            no_journal_share: 0.03,
            conference_share: 0.10,
            other_doc_share: 0.05,
            own_discipline_citation: 0.8,
            coauthor_pool: 200,
        }
    }
}

impl CorpusConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.cohort.validate()?;
        let probabilities = [
            ("intl_probability", self.intl_probability),
            ("second_discipline_share", self.second_discipline_share),
            ("non_oecd_share", self.non_oecd_share),
            ("inactive_share", self.inactive_share),
            ("no_journal_share", self.no_journal_share),
            ("conference_share", self.conference_share),
            ("other_doc_share", self.other_doc_share),
            ("own_discipline_citation", self.own_discipline_citation),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} {p} outside [0, 1]")));
            }
        }
        if self.conference_share + self.other_doc_share > 1.0 {
            return Err(Error::Config("conference_share + other_doc_share exceeds 1".into()));
        }
        let rates = [
            ("pubs_per_year", self.pubs_per_year),
            ("pre_early_factor", self.pre_early_factor),
            ("coauthors_mean", self.coauthors_mean),
            ("prestige_bias", self.prestige_bias),
            ("citation_rate", self.citation_rate),
        ];
        for (name, r) in rates {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("{name} {r} must be a non-negative number")));
            }
        }
        if self.min_academic_age < 0 || self.min_academic_age > self.max_academic_age {
            return Err(Error::Config(format!(
                "academic age range [{}, {}] is empty",
                self.min_academic_age, self.max_academic_age
            )));
        }
        if self.reference_year - self.max_academic_age < crate::corpus::MIN_YEAR {
            return Err(Error::Config("reference_year too early for max_academic_age".into()));
        }
        if self.journals_per_discipline == 0 || self.institutions_per_country == 0 || self.coauthor_pool == 0 {
            return Err(Error::Config(
                "journals_per_discipline, institutions_per_country and coauthor_pool must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Generator ground truth, aligned with the core authors `A000001...`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusTruth {
    pub author_ids: Vec<String>,
    pub cohort: Cohort,
    pub academic_age: Vec<i32>,
    pub inactive: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub truth: CorpusTruth,
}

pub fn core_author_id(i: usize) -> String {
    format!("A{:06}", i + 1)
}

fn journal_id(discipline: &str, k: usize) -> String {
    format!("J{discipline}-{k:03}")
}

fn institution_id(country: &str, k: usize) -> String {
    format!("I{country}-{k:02}")
}

fn coauthor_id(discipline: &str, bucket: i32, k: usize) -> String {
    format!("X{discipline}-{bucket}-{k:03}")
}

/// Percentile of journal `k` of `n` within its discipline: spread over 0..=99.
fn journal_percentile(k: usize, n: usize) -> u8 {
    (k * 100 / n) as u8
}

struct Plan<'a> {
    config: &'a CorpusConfig,
    disciplines: Vec<&'static str>,
    homes: Vec<&'static str>,
    ref_year: i32,
}

impl Plan<'_> {
    fn bucket(&self, year: i32) -> i32 {
        (self.ref_year - year) / 3
    }

    fn journals(&self) -> Vec<JournalLine> {
        let cfg = self.config;
        let n = cfg.journals_per_discipline;
        let mut rng = author_rng(self.config.cohort.seed, u64::MAX);
        let mut out = Vec::new();
        for (d, code) in self.disciplines.iter().enumerate() {
            for k in 0..n {
                let mut percentiles = BTreeMap::new();
                percentiles.insert(code.to_string(), i64::from(journal_percentile(k, n)));
                if self.disciplines.len() > 1 && rng.random_bool(cfg.second_discipline_share) {
                    let other = self.disciplines[(d + 1) % self.disciplines.len()];
                    percentiles.insert(other.to_string(), rng.random_range(0..100));
                }
                out.push(JournalLine {
                    journal_id: Some(journal_id(code, k)),
                    percentiles: Some(percentiles),
                });
            }
        }
        out
    }

    fn coauthors(&self) -> Vec<AuthorLine> {
        let last_bucket = self.bucket(self.ref_year - self.config.max_academic_age);
        let mut out = Vec::new();
        for code in &self.disciplines {
            for b in 0..=last_bucket {
                for k in 0..self.config.coauthor_pool {
                    out.push(AuthorLine {
                        author_id: Some(coauthor_id(code, b, k)),
                        ..Default::default()
                    });
                }
            }
        }
        out
    }

    fn core_author(&self, i: usize, rng: &mut ChaCha8Rng) -> AuthorLine {
        let u: f64 = rng.random();
        let (label, probability) = if u < 0.05 {
            (None, None)
        } else {
            let label = if u < 0.75 { "male" } else { "female" };
            let p = if rng.random_bool(0.8) {
                rng.random_range(0.85..=1.0)
            } else {
                rng.random_range(0.5..0.85)
            };
            (Some(label.to_string()), Some((p * 1000.0_f64).round() / 1000.0))
        };
        AuthorLine {
            author_id: Some(core_author_id(i)),
            gender_label: label,
            gender_probability: probability,
            country_override: None,
        }
    }

    fn year_rate(&self, values: &[f64; 3], first: i32, year: i32) -> f64 {
        let k = year - first;
        let v = if k < 4 {
            self.config.pre_early_factor * values[0]
        } else if k < 14 {
            values[0]
        } else if k < 24 {
            values[1]
        } else {
            values[2]
        };
        self.config.pubs_per_year * v
    }

    fn stage_value(values: &[f64; 3], first: i32, year: i32) -> f64 {
        match year - first {
            k if k < 14 => values[0],
            k if k < 24 => values[1],
            _ => values[2],
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn publications(
        &self,
        i: usize,
        discipline: usize,
        values: &[f64; 3],
        first: i32,
        inactive: bool,
        home: &str,
        rng: &mut ChaCha8Rng,
    ) -> Vec<PublicationLine> {
        let cfg = self.config;
        let code = self.disciplines[discipline];
        let home_inst = institution_id(home, rng.random_range(0..cfg.institutions_per_country));
        let last_year = if inactive { self.ref_year - 5 } else { self.ref_year };
        let mut out = Vec::new();
        for year in first..=last_year.max(first) {
            let n = if year == first {
                1 + poisson(rng, self.year_rate(values, first, year))
            } else {
                poisson(rng, self.year_rate(values, first, year))
            };
            for _ in 0..n {
                let seq = out.len();
                out.push(self.publication(i, seq, code, discipline, values, first, year, home, &home_inst, rng));
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn publication(
        &self,
        i: usize,
        seq: usize,
        code: &str,
        discipline: usize,
        values: &[f64; 3],
        first: i32,
        year: i32,
        home: &str,
        home_inst: &str,
        rng: &mut ChaCha8Rng,
    ) -> PublicationLine {
        let cfg = self.config;
        let u: f64 = rng.random();
        let doc_type = if u < cfg.other_doc_share {
            "other"
        } else if u < cfg.other_doc_share + cfg.conference_share {
            "conference_paper"
        } else {
            "article"
        };

        let mut authors = vec![core_author_id(i)];
        let mut countries = vec![home.to_string()];
        let mut institutions = vec![home_inst.to_string()];
        let bucket = self.bucket(year);
        for _ in 0..poisson(rng, cfg.coauthors_mean) {
            let id = coauthor_id(code, bucket, rng.random_range(0..cfg.coauthor_pool));
            if authors.contains(&id) {
                continue;
            }
            authors.push(id);
            let country = if rng.random_bool(cfg.intl_probability) {
                let c = self.homes[rng.random_range(0..self.homes.len())];
                if c == home { NON_OECD_COUNTRIES[rng.random_range(0..NON_OECD_COUNTRIES.len())] } else { c }
            } else {
                home
            };
            countries.push(country.to_string());
            institutions.push(institution_id(country, rng.random_range(0..cfg.institutions_per_country)));
        }

        let (journal, pct) = if rng.random_bool(cfg.no_journal_share) {
            (None, 50.0)
        } else {
            let v = Self::stage_value(values, first, year);
            let target = 50.0 + cfg.prestige_bias * 20.0 * v.ln() + 15.0 * normal(rng);
            let n = cfg.journals_per_discipline;
            let k = ((target.clamp(0.0, 99.0) / 100.0) * n as f64).floor() as usize;
            let k = k.min(n - 1);
            (
                Some(journal_id(code, k)),
                f64::from(journal_percentile(k, n)),
            )
        };

        let mut citations_by_year = BTreeMap::new();
        let rate = cfg.citation_rate * (0.5 + pct / 100.0);
        for y in year..=(year + 4).min(self.ref_year) {
            let c = poisson(rng, rate);
            if c > 0 {
                citations_by_year.insert(y, c as u32);
            }
        }

        let refs = rng.random_range(1..=4);
        let cited_ref_disciplines = (0..refs)
            .map(|_| {
                if self.disciplines.len() == 1 || rng.random_bool(cfg.own_discipline_citation) {
                    code.to_string()
                } else {
                    let mut d = rng.random_range(0..self.disciplines.len() - 1);
                    if d >= discipline {
                        d += 1;
                    }
                    self.disciplines[d].to_string()
                }
            })
            .collect();

        PublicationLine {
            pub_id: Some(format!("P{:06}-{seq:04}", i + 1)),
            year: Some(year),
            doc_type: Some(doc_type.into()),
            author_ids: Some(authors),
            affiliation_countries: countries,
            affiliation_institutions: institutions,
            journal_id: journal,
            citations_by_year,
            cited_ref_disciplines,
        }
    }
}

struct GeneratedAuthor {
    line: AuthorLine,
    age: i32,
    inactive: bool,
    pubs: Vec<PublicationLine>,
}

/// Full synthetic corpus plus its ground truth. Core authors come first in
/// the author file, then the external co-author pool; external co-authors
/// publish within a single three-year bucket, so they never meet the age
/// and activity gates together.
pub fn gen_corpus(config: &CorpusConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let cohort = gen_cohort(&config.cohort)?;
    let plan = Plan {
        config,
        disciplines: discipline_codes(config.cohort.n_disciplines)?,
        homes: OECD_COUNTRIES[..HOME_COUNTRIES].to_vec(),
        ref_year: config.reference_year,
    };
    let mut corpus = Corpus::new(config.reference_year);
    let invalid = |what: &str, e: String| Error::Config(format!("generator produced an invalid {what}: {e}"));
    for j in plan.journals() {
        corpus.add_journal(j).map_err(|e| invalid("journal", e))?;
    }

    // Second stream family for corpus-level draws, disjoint from the cohort's.
    let stream_base = 1u64 << 40;
    let n = config.cohort.n_authors;
    let mut generated: Vec<GeneratedAuthor> = Vec::with_capacity(n);
    let mut pubs_all: Vec<Vec<PublicationLine>> = Vec::new();
    for start in (0..n).step_by(AUTHORS_PER_CHUNK) {
        let end = (start + AUTHORS_PER_CHUNK).min(n);
        let chunk: Vec<GeneratedAuthor> = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = author_rng(config.cohort.seed, stream_base + i as u64);
                let line = plan.core_author(i, &mut rng);
                let age = rng.random_range(config.min_academic_age..=config.max_academic_age);
                let inactive = rng.random_bool(config.inactive_share);
                let home = if rng.random_bool(config.non_oecd_share) {
                    NON_OECD_COUNTRIES[rng.random_range(0..NON_OECD_COUNTRIES.len())]
                } else {
                    plan.homes[rng.random_range(0..plan.homes.len())]
                };
                let first = config.reference_year - age;
                let pubs = plan.publications(
                    i,
                    cohort.disciplines[i],
                    &cohort.values[i],
                    first,
                    inactive,
                    home,
                    &mut rng,
                );
                GeneratedAuthor { line, age, inactive, pubs }
            })
            .collect();
        for mut g in chunk {
            pubs_all.push(std::mem::take(&mut g.pubs));
            generated.push(g);
        }
    }

    for g in &generated {
        corpus.add_author(g.line.clone()).map_err(|e| invalid("author", e))?;
    }
    for line in plan.coauthors() {
        corpus.add_author(line).map_err(|e| invalid("author", e))?;
    }
    for pubs in pubs_all {
        for p in pubs {
            corpus.add_publication(p).map_err(|e| invalid("publication", e))?;
        }
    }

    let truth = CorpusTruth {
        author_ids: (0..n).map(core_author_id).collect(),
        academic_age: generated.iter().map(|g| g.age).collect(),
        inactive: generated.iter().map(|g| g.inactive).collect(),
        cohort,
    };
    Ok(SynthCorpus { corpus, truth })
}

#[derive(Serialize)]
struct TruthLine<'a> {
    author_id: &'a str,
    discipline: &'a str,
    academic_age: i32,
    inactive: bool,
    ability: f64,
    stage_values: [f64; 3],
}

pub fn write_truth<W: std::io::Write>(mut out: W, truth: &CorpusTruth, n_disciplines: usize) -> Result<()> {
    let codes = discipline_codes(n_disciplines)?;
    for i in 0..truth.author_ids.len() {
        let line = TruthLine {
            author_id: &truth.author_ids[i],
            discipline: codes[truth.cohort.disciplines[i]],
            academic_age: truth.academic_age[i],
            inactive: truth.inactive[i],
            ability: truth.cohort.ability[i],
            stage_values: truth.cohort.values[i],
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Data drawn from a logistic model with known coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub n: usize,
    pub intercept: f64,
    /// One coefficient per predictor; predictor `j` is Bernoulli(0.5) for
    /// even `j` and standard normal for odd `j`, except that the last is
    /// Bernoulli(0.2) (a prior-class style indicator).
    pub beta: Vec<f64>,
    pub seed: u64,
}

pub fn gen_logistic(config: &LogisticConfig) -> Design {
    let p = config.beta.len();
    let rows: Vec<(Vec<f64>, bool)> = (0..config.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = author_rng(config.seed, i as u64);
            let x: Vec<f64> = (0..p)
                .map(|j| {
                    if j + 1 == p {
                        f64::from(u8::from(rng.random_bool(0.2)))
                    } else if j % 2 == 0 {
                        f64::from(u8::from(rng.random_bool(0.5)))
                    } else {
                        normal(&mut rng)
                    }
                })
                .collect();
            let eta = config.intercept + x.iter().zip(&config.beta).map(|(a, b)| a * b).sum::<f64>();
            let prob = 1.0 / (1.0 + (-eta).exp());
            let y = rng.random::<f64>() < prob;
            (x, y)
        })
        .collect();
    let names = (0..p).map(|j| format!("x{}", j + 1)).collect();
    let mut x = Vec::with_capacity(config.n * p);
    let mut y = Vec::with_capacity(config.n);
    for (row, outcome) in rows {
        x.extend(row);
        y.push(outcome);
    }
    Design::new(names, x, y)
}
