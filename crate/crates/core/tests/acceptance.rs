//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::collections::{BTreeMap, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};

use careerflow::classes::{assign_classes, Class, ProductivityType, Stage};
use careerflow::mobility::{format_tenths, sankey_export, transition_matrix, Scope, SankeyLabels, TransitionMatrix};
use careerflow::portfolio::{build_field_baseline, fwci_ratio};
use careerflow::regression::{collinearity_diagonal, fit_logistic, Design, FitOptions};
use careerflow::synth::{self, calibrate_persistence, gen_cohort, CohortConfig, CorpusConfig, LogisticConfig};
use careerflow::Error;

#[path = "support/table1.rs"]
mod table1;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("took {elapsed:.1?}, budget {budget:?}"))
}

fn stage(s: &str) -> Stage {
    match s {
        "Early" => Stage::Early,
        "Mid" => Stage::Mid,
        "Late" => Stage::Late,
        other => panic!("unknown stage {other}"),
    }
}

fn class(s: &str) -> Class {
    match s {
        "Bottom" => Class::Bottom,
        "Middle" => Class::Middle,
        "Top" => Class::Top,
        other => panic!("unknown class {other}"),
    }
}

/// Expands published counts into per-author class maps and runs them through
/// `transition_matrix`.
fn table1_matrix(from: Stage, ptype: ProductivityType) -> TransitionMatrix {
    let mut classes_from = BTreeMap::new();
    let mut classes_to = BTreeMap::new();
    let mut next = 0u32;
    let mut to = from;
    for (_, fc, ts, tc, cells) in table1::TRANSITIONS.iter().filter(|r| stage(r.0) == from) {
        to = stage(ts);
        for _ in 0..cells[ptype.index()].0 {
            classes_from.insert(next, class(fc));
            classes_to.insert(next, class(tc));
            next += 1;
        }
    }
    transition_matrix(&classes_from, &classes_to, from, to, ptype, Scope::All).unwrap()
}

fn c1_percentages() -> Check {
    let start = Instant::now();
    let p1 = table1_matrix(Stage::Early, ProductivityType::P1);
    let stated: Vec<String> = [(Class::Bottom, Class::Bottom), (Class::Bottom, Class::Top), (Class::Top, Class::Top), (Class::Top, Class::Bottom)]
        .iter()
        .map(|&(f, t)| format_tenths(p1.percent_tenths(f, t).unwrap()))
        .collect();
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(1))?;
    ensure(stated == ["55.9", "1.6", "60.2", "1.1"], || format!("P1 early->mid {}", stated.join("/")))?;

    let mut reproduced = 0;
    let mut mismatches = Vec::new();
    for ptype in ProductivityType::ALL {
        for from in [Stage::Early, Stage::Mid] {
            let m = table1_matrix(from, ptype);
            for (fs, fc, _, tc, cells) in table1::TRANSITIONS.iter().filter(|r| stage(r.0) == from) {
                let (count, size, printed) = cells[ptype.index()];
                let (fc, tc) = (class(fc), class(tc));
                ensure(m.class_size(fc) == size, || format!("{ptype} {fs} {fc:?}: class size {} vs {size}", m.class_size(fc)))?;
                ensure(m.count(fc, tc) == count, || format!("{ptype} {fs} {fc:?}->{tc:?}: count mismatch"))?;
                let got = format_tenths(m.percent_tenths(fc, tc).unwrap());
                if got == printed {
                    reproduced += 1;
                } else {
                    mismatches.push(format!("{ptype} {fs} {fc:?}->{tc:?} {count}/{size} = {got} vs printed {printed}"));
                }
            }
        }
    }
    Ok(format!(
        "P1 early->mid {} in {elapsed:.0?}; all types: {reproduced}/{} printed cells reproduced{}",
        stated.join("/"),
        reproduced + mismatches.len(),
        if mismatches.is_empty() { String::new() } else { format!(" (differs: {})", mismatches.join("; ")) }
    ))
}

fn c2_class_shares() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sizes: Vec<usize> = (5..10).chain((0..995).map(|_| rng.random_range(5..=10_000))).collect();

    for &n in &sizes {
        let mut values: Vec<f64> = (0..n).map(|i| i as f64 + rng.random::<f64>() * 0.5).collect();
        values.shuffle(&mut rng);
        let a = assign_classes(&values);
        let (bottom, top) = (a.count(Class::Bottom), a.count(Class::Top));
        ensure(bottom == n / 5 && top == n - (4 * n).div_ceil(5), || {
            format!("distinct N={n}: bottom {bottom}, top {top}")
        })?;
    }

    let (mut pooled_n, mut pooled_bottom, mut pooled_top) = (0usize, 0usize, 0usize);
    let mut share_holds = 0usize;
    for &n in &sizes {
        let lambda = rng.random_range(0.5..8.0);
        let pois = Poisson::new(lambda).unwrap();
        let values: Vec<f64> = (0..n).map(|_| pois.sample(&mut rng)).collect();
        let a = assign_classes(&values);
        let (bottom, top) = (a.count(Class::Bottom), a.count(Class::Top));
        ensure(bottom >= n / 5 && top <= n - (4 * n).div_ceil(5), || {
            format!("integer N={n}: bottom {bottom} below floor(0.2N) or top {top} above N-ceil(0.8N)")
        })?;
        if 5 * bottom >= n && 5 * top <= n {
            share_holds += 1;
        } else {
            // Only the floor in floor(0.2N) may pull a share under 20%.
            ensure(bottom == n / 5 && n % 5 != 0, || format!("integer N={n}: bottom share {bottom}/{n}"))?;
        }
        pooled_n += n;
        pooled_bottom += bottom;
        pooled_top += top;
    }
    ensure(5 * pooled_bottom >= pooled_n && 5 * pooled_top <= pooled_n, || {
        format!("pooled integer cohorts: bottom {pooled_bottom}, top {pooled_top} of {pooled_n}")
    })?;

    // A late-career style cohort: five-year publication counts per year,
    // heterogeneous rates.
    let n = 324_643;
    let rate = LogNormal::new(0.5, 0.8).unwrap();
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let r: f64 = rate.sample(&mut rng);
            Poisson::new(5.0 * r).unwrap().sample(&mut rng) / 5.0
        })
        .collect();
    let a = assign_classes(&values);
    let (bottom, top) = (a.count(Class::Bottom), a.count(Class::Top));
    ensure(5 * bottom >= n && 5 * top <= n, || format!("N={n}: bottom {bottom}, top {top}"))?;

    within_budget(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{} distinct cohorts exact; integer cohorts: directions hold in all, literal 20% shares in {share_holds}/{} (the rest sit exactly at floor(0.2N)), pooled bottom {:.2}% top {:.2}%; N={n}: bottom {bottom} / top {top} (published 72,877 / 63,937) in {:.1?}",
        sizes.len(),
        sizes.len(),
        100.0 * pooled_bottom as f64 / pooled_n as f64,
        100.0 * pooled_top as f64 / pooled_n as f64,
        start.elapsed()
    ))
}

fn c3_independence() -> Check {
    let start = Instant::now();
    let cohort = gen_cohort(&CohortConfig {
        n_authors: 100_000,
        n_disciplines: 1,
        rho: 0.0,
        seed: 3,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let profile = |c: Class| match c {
        Class::Middle => 60.0,
        _ => 20.0,
    };
    let mut worst: f64 = 0.0;
    for (from, to) in [(Stage::Early, Stage::Mid), (Stage::Mid, Stage::Late)] {
        let m = cohort.transitions(from, to);
        for fc in Class::ALL {
            for tc in Class::ALL {
                let p = m.percent(fc, tc).unwrap();
                worst = worst.max((p - profile(tc)).abs());
                ensure((p - profile(tc)).abs() <= 1.0, || format!("{from:?}->{to:?} {fc:?}->{tc:?} = {p:.2}%"))?;
            }
        }
    }
    within_budget(start.elapsed(), Duration::from_secs(60))?;
    let m = cohort.transitions(Stage::Early, Stage::Mid);
    Ok(format!(
        "max deviation {worst:.2} pp; top->top {:.2}%, jumpers-up {:.2}% in {:.1?}",
        m.percent(Class::Top, Class::Top).unwrap(),
        m.percent(Class::Bottom, Class::Top).unwrap(),
        start.elapsed()
    ))
}

fn c4_persistence() -> Check {
    let start = Instant::now();
    let base = CohortConfig {
        n_authors: 100_000,
        n_disciplines: 1,
        seed: 4,
        ..Default::default()
    };
    let cal = calibrate_persistence(60.0, &base, 0.5).map_err(|e| e.to_string())?;
    // Re-simulate independently of the calibration bookkeeping.
    let m = gen_cohort(&CohortConfig { rho: cal.rho, ..base }).unwrap().pooled_transitions();
    let top = m.percent(Class::Top, Class::Top).unwrap();
    let bottom = m.percent(Class::Bottom, Class::Bottom).unwrap();
    ensure((top - 60.0).abs() <= 1.0, || format!("rho* {:.4}: top->top {top:.2}%", cal.rho))?;
    ensure(bottom > 40.0 && bottom < 70.0, || format!("rho* {:.4}: bottom->bottom {bottom:.2}%", cal.rho))?;
    within_budget(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "rho* = {:.4} after {} evaluations; top->top {top:.2}%, bottom->bottom {bottom:.2}% in {:.1?}",
        cal.rho,
        cal.evaluations,
        start.elapsed()
    ))
}

fn c5_regression() -> Check {
    let start = Instant::now();
    let beta = vec![0.3, -0.2, 1.5, 2.41];
    let config = |seed| LogisticConfig { n: 50_000, intercept: -1.0, beta: beta.clone(), seed };
    let options = FitOptions::default();

    let fit = fit_logistic(&synth::gen_logistic(&config(5)), &options).map_err(|e| e.to_string())?;
    for (c, b) in fit.coefficients.iter().zip(&beta) {
        ensure((c.estimate - b).abs() <= 2.0 * c.std_error, || {
            format!("{}: {:.4} vs {b} (SE {:.4})", c.name, c.estimate, c.std_error)
        })?;
    }
    let largest = fit
        .coefficients
        .iter()
        .max_by(|a, b| a.odds_ratio.total_cmp(&b.odds_ratio))
        .unwrap();
    ensure(largest.name == "x4", || format!("largest odds ratio belongs to {}", largest.name))?;

    let reps = 200;
    let mut covered = vec![0usize; beta.len()];
    for r in 0..reps {
        let fit = fit_logistic(&synth::gen_logistic(&config(1000 + r)), &options).map_err(|e| e.to_string())?;
        for (j, (c, b)) in fit.coefficients.iter().zip(&beta).enumerate() {
            let truth = b.exp();
            if c.ci_lower <= truth && truth <= c.ci_upper {
                covered[j] += 1;
            }
        }
    }
    let coverage: Vec<f64> = covered.iter().map(|&c| 100.0 * c as f64 / reps as f64).collect();
    for (j, c) in coverage.iter().enumerate() {
        ensure((90.0..=99.0).contains(c), || format!("x{} coverage {c:.1}%", j + 1))?;
    }
    within_budget(start.elapsed(), Duration::from_secs(300))?;
    let estimates: Vec<String> = fit.coefficients.iter().map(|c| format!("{:.3}", c.estimate)).collect();
    let coverage: Vec<String> = coverage.iter().map(|c| format!("{c:.1}")).collect();
    Ok(format!(
        "b = ({}), largest OR {:.2} (x4); coverage % ({}) over {reps} reps in {:.1?}",
        estimates.join(", "),
        largest.odds_ratio,
        coverage.join(", "),
        start.elapsed()
    ))
}

fn c6_fwci() -> Check {
    let mut config = CorpusConfig::default();
    config.cohort.n_authors = 3000;
    config.cohort.n_disciplines = 4;
    config.cohort.seed = 6;
    let corpus = synth::gen_corpus(&config).map_err(|e| e.to_string())?.corpus;
    let baseline = build_field_baseline(&corpus);
    let mut cells: HashMap<_, (f64, usize)> = HashMap::new();
    let mut zero_cells = 0;
    for p in &corpus.publications {
        let Some(journal) = corpus.journal_of(p) else { continue };
        for &(d, _) in &journal.percentiles {
            match fwci_ratio(p, d, &baseline) {
                Some(r) => {
                    let cell = cells.entry((d, p.year)).or_default();
                    cell.0 += r;
                    cell.1 += 1;
                }
                None => zero_cells += 1,
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (&(d, year), &(sum, n)) in &cells {
        let mean = sum / n as f64;
        worst = worst.max((mean - 1.0).abs());
        ensure((mean - 1.0).abs() <= 1e-9, || format!("{} {year}: mean {mean}", corpus.name(d)))?;
    }
    Ok(format!(
        "{} cells, max |mean - 1| = {worst:.1e} ({zero_cells} publication-discipline pairs in zero-citation cells skipped)",
        cells.len()
    ))
}

/// Modified Gram-Schmidt on centred columns.
fn orthonormal_columns(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for _ in 0..p {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        for q in &cols {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    cols
}

fn design_from_columns(cols: &[Vec<f64>]) -> Design {
    let n = cols[0].len();
    let names = (0..cols.len()).map(|j| format!("v{}", j + 1)).collect();
    let x = (0..n).flat_map(|i| cols.iter().map(move |c| c[i])).collect();
    Design::new(names, x, (0..n).map(|i| i % 2 == 0).collect())
}

fn c7_collinearity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cols = orthonormal_columns(2000, 6, &mut rng);
    let report = collinearity_diagonal(&design_from_columns(&cols)).map_err(|e| e.to_string())?;
    let worst = report.diagonal.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-9, || format!("max |VIF - 1| = {worst:e}"))?;

    let mut dup = cols.clone();
    dup.push(cols[2].clone());
    match collinearity_diagonal(&design_from_columns(&dup)) {
        Err(e @ Error::SingularCorrelation { .. }) => Ok(format!("max |VIF - 1| = {worst:.1e}; duplicate column: {e}")),
        Err(e) => Err(format!("duplicate column raised the wrong error: {e}")),
        Ok(r) => Err(format!("duplicate column accepted: {:?}", r.diagonal)),
    }
}

fn careerflow(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_careerflow"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("careerflow {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn ingest(data: &Path, out: &Path, extra: &[&str]) -> Result<String, String> {
    let mut args = vec![
        "ingest",
        "--pubs",
        path_str(&data.join("publications.jsonl")),
        "--journals",
        path_str(&data.join("journals.jsonl")),
        "--authors",
        path_str(&data.join("authors.jsonl")),
        "--out",
        path_str(out),
        "--reference-year",
        "2022",
    ]
    .into_iter()
    .map(str::to_owned)
    .collect::<Vec<_>>();
    args.extend(extra.iter().map(|s| s.to_string()));
    careerflow(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn c8_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data");
    let cache_dir = dir.path().join("cache");
    careerflow(&["synth", "--out", path_str(&data), "--seed", "8", "--authors-n", "3000", "--disciplines-n", "4"])?;
    ingest(&data, &cache_dir, &[])?;
    let cache = cache_dir.join("corpus.cache.jsonl");
    let mut manifests = Vec::new();
    for workers in [1, 4, 8] {
        let out = dir.path().join(format!("out{workers}"));
        careerflow(&[
            "analyze",
            "--cache",
            path_str(&cache),
            "--out",
            path_str(&out),
            "--workers",
            &workers.to_string(),
        ])?;
        manifests.push(std::fs::read_to_string(out.join("manifest.jsonl")).map_err(|e| e.to_string())?);
    }
    ensure(manifests.iter().all(|m| *m == manifests[0]), || "manifests differ across worker counts".into())?;
    Ok(format!("{} files hashed identically for workers 1, 4, 8", manifests[0].lines().count()))
}

fn c9_sankey() -> Check {
    let golden = include_str!("fixtures/sankey_table1_p1.txt");
    let matrices = [
        table1_matrix(Stage::Early, ProductivityType::P1),
        table1_matrix(Stage::Mid, ProductivityType::P1),
    ];
    let got = sankey_export(&matrices, &SankeyLabels::default()).map_err(|e| e.to_string())?;
    if got == golden {
        Ok(format!("{} lines byte-exact, first `{}`", got.lines().count(), got.lines().next().unwrap_or("")))
    } else {
        let diff = got
            .lines()
            .zip(golden.lines())
            .find(|(a, b)| a != b)
            .map(|(a, b)| format!("`{a}` vs golden `{b}`"))
            .unwrap_or_else(|| format!("{} bytes vs golden {}", got.len(), golden.len()));
        Err(diff)
    }
}

fn c10_throughput() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    careerflow(&["synth", "--out", path_str(&data), "--seed", "10", "--authors-n", "100000", "--disciplines-n", "16"])?;
    let pubs = std::fs::read_to_string(data.join("publications.jsonl")).map_err(|e| e.to_string())?.lines().count();

    let start = Instant::now();
    ingest(&data, &out, &[])?;
    let ingest_time = start.elapsed();
    let summary = careerflow(&["analyze", "--out", path_str(&out)])?;
    let total = start.elapsed();
    within_budget(total, Duration::from_secs(120))?;
    let sample = summary.lines().find(|l| l.starts_with("sample:")).unwrap_or("").to_owned();
    Ok(format!(
        "{pubs} publications: ingest {ingest_time:.1?} + analyze {:.1?} = {total:.1?} ({sample})",
        total - ingest_time
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("percentage accounting vs published counts", c1_percentages),
        ("class-share property", c2_class_shares),
        ("independence baseline", c3_independence),
        ("persistence calibration", c4_persistence),
        ("regression recovery", c5_regression),
        ("FWCI normalization", c6_fwci),
        ("collinearity sanity", c7_collinearity),
        ("determinism across worker counts", c8_determinism),
        ("Sankey golden file", c9_sankey),
        ("throughput", c10_throughput),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
