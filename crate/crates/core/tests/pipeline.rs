use std::fs;

use careerflow::classes::ProductivityType;
use careerflow::corpus::{filter_sample, SampleFilterConfig};
use careerflow::pipeline::{analyze, read_cache, verify_manifest, with_workers, write_cache, AnalyzeConfig, CACHE_FORMAT};
use careerflow::synth::{gen_corpus, CorpusConfig};
use careerflow::Error;

fn corpus(seed: u64) -> careerflow::corpus::Corpus {
    let mut c = CorpusConfig::default();
    c.cohort.n_authors = 1200;
    c.cohort.n_disciplines = 2;
    c.cohort.seed = seed;
    gen_corpus(&c).unwrap().corpus
}

#[test]
fn cache_round_trip() {
    let corpus = corpus(1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let filter = SampleFilterConfig::default();
    let report = filter_sample(&corpus, &corpus.author_publications(), &filter).report;
    write_cache(&path, &corpus, &filter, &report, 3).unwrap();
    let (header, back) = read_cache(&path).unwrap();
    assert_eq!(header.format, CACHE_FORMAT);
    assert_eq!(header.rejects, 3);
    assert_eq!(header.report, report);
    assert_eq!(back, corpus);

    let text = fs::read_to_string(&path).unwrap();
    let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    fs::write(&path, truncated).unwrap();
    assert!(matches!(read_cache(&path), Err(Error::Cache(_))));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let corpus = corpus(2);
    let dir = tempfile::tempdir().unwrap();
    let config = AnalyzeConfig {
        ptypes: vec![ProductivityType::P2, ProductivityType::P3],
        ..Default::default()
    };
    let run = |workers: usize| {
        let out = dir.path().join(workers.to_string());
        with_workers(workers, || analyze(&corpus, &config, &out)).unwrap().unwrap()
    };
    let one = run(1);
    let three = run(3);
    assert_eq!(one.manifest, three.manifest);
    assert_eq!(one.sample, three.sample);
    assert!(one.models > 0);
    assert_eq!(verify_manifest(&dir.path().join("3")).unwrap(), three.manifest);
}

#[test]
fn tampered_output_fails_verification() {
    let corpus = corpus(3);
    let dir = tempfile::tempdir().unwrap();
    let config = AnalyzeConfig {
        ptypes: vec![ProductivityType::P1],
        regression: false,
        ..Default::default()
    };
    analyze(&corpus, &config, dir.path()).unwrap();
    fs::write(dir.path().join("sankey_P1_ALL.txt"), "tampered\n").unwrap();
    assert!(matches!(verify_manifest(dir.path()), Err(Error::Manifest(_))));
}
