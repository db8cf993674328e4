use careerflow::classes::{stage_values, ProductivityType, Stage};
use careerflow::corpus::{parse_corpus, Corpus, Gender, PublicationRecord};
use careerflow::portfolio::PortfolioContext;

const JOURNALS: &str = r#"{"journal_id":"J1","percentiles":{"MED":90}}
{"journal_id":"J2","percentiles":{"BIO":70,"MED":40}}
"#;

const AUTHORS: &str = r#"{"author_id":"A1","gender_label":"male","gender_probability":0.95}
{"author_id":"A2","gender_label":"female","gender_probability":0.6}
{"author_id":"A3","gender_label":"female","gender_probability":0.9}
"#;

const PUBS: &str = r#"{"pub_id":"P1","year":1990,"doc_type":"article","author_ids":["A1","A2"],"affiliation_countries":["US"],"affiliation_institutions":["I1"],"journal_id":"J1","citations_by_year":{"1990":2,"1992":2,"1995":10},"cited_ref_disciplines":["MED","BIO"]}
{"pub_id":"P2","year":1996,"doc_type":"article","author_ids":["A1"],"affiliation_countries":["US","JP"],"affiliation_institutions":["I1"],"journal_id":"J2","citations_by_year":{"1996":3},"cited_ref_disciplines":["BIO"]}
{"pub_id":"P3","year":2010,"doc_type":"conference_paper","author_ids":["A1","A3"],"affiliation_countries":["US"],"affiliation_institutions":["I2"],"journal_id":"J1","cited_ref_disciplines":["MED"]}
{"pub_id":"P4","year":2020,"doc_type":"article","author_ids":["A1","A2","A3"],"affiliation_countries":["US","JP"],"affiliation_institutions":["I1"],"journal_id":"J2","citations_by_year":{"2021":6},"cited_ref_disciplines":["MED"]}
{"pub_id":"P5","year":2021,"doc_type":"other","author_ids":["A1"],"affiliation_countries":["DE"],"affiliation_institutions":["I3"]}
{"pub_id":"P6","year":1990,"doc_type":"article","author_ids":["A3"],"affiliation_countries":["GB"],"affiliation_institutions":["I2"],"journal_id":"J1","cited_ref_disciplines":["CHEM"]}
"#;

fn fixture() -> Corpus {
    let out = parse_corpus(PUBS.as_bytes(), JOURNALS.as_bytes(), AUTHORS.as_bytes(), 2022).unwrap();
    assert!(out.rejects.is_empty(), "{:?}", out.rejects);
    out.corpus
}

#[test]
fn hand_computed_portfolio() {
    let corpus = fixture();
    let index = corpus.author_publications();
    let ctx = PortfolioContext::new(&corpus, &index);
    let a1 = corpus.find_author("A1").unwrap();
    let (p, coverage) = ctx.portfolio(a1).unwrap();

    assert_eq!(p.first_pub_year, 1990);
    assert_eq!(p.academic_age, 32);
    assert_eq!(p.gender, Gender::Male);
    assert_eq!(corpus.name(p.dominant_discipline), "MED");
    assert_eq!(corpus.name(p.dominant_country), "US");
    assert_eq!(p.dominant_institution.map(|i| corpus.name(i)), Some("I1"));
    assert!(p.top200);
    // Collaborative: P1, P3, P4; international among them: P4.
    assert!((p.intl_collab_rate.unwrap() - 100.0 / 3.0).abs() < 1e-12);
    // Team sizes 2, 1, 2, 3, 1.
    assert_eq!(p.median_team_size, 2.0);
    // (MED, 1990) mean (4 + 0) / 2 gives P1 a ratio of 2; P2 and P4 sit
    // alone in their cells; P3's cell has no citations.
    assert!((p.mean_fwci4y.unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert_eq!(coverage.fwci_skipped_publications, 1);
    assert_eq!(coverage.publications_without_journal, 1);
    assert_eq!(p.ajpr(Stage::Early), Some(70.0));
    assert_eq!(p.ajpr(Stage::Mid), Some(90.0));
    assert_eq!(p.ajpr(Stage::Late), Some(70.0));
}

#[test]
fn gender_below_threshold_is_unknown() {
    let corpus = fixture();
    let index = corpus.author_publications();
    let ctx = PortfolioContext::new(&corpus, &index);
    let (p, _) = ctx.portfolio(corpus.find_author("A2").unwrap()).unwrap();
    assert_eq!(p.gender, Gender::Unknown);
    let (p, _) = ctx.portfolio(corpus.find_author("A3").unwrap()).unwrap();
    assert_eq!(p.gender, Gender::Female);
    // A3 cites MED twice (P3, P4) and CHEM once.
    assert_eq!(corpus.name(p.dominant_discipline), "MED");
}

#[test]
fn four_productivity_types_in_the_late_window() {
    let corpus = fixture();
    let index = corpus.author_publications();
    let a1 = corpus.find_author("A1").unwrap();
    let pubs: Vec<&PublicationRecord> = index.iter(&corpus, a1).collect();
    let (values, unresolved) = stage_values(&corpus, &pubs, 1990);
    let late = |t: ProductivityType| values[t.index()][Stage::Late.index()];
    // Only P4 (70th percentile, three authors) qualifies in 2018-2022.
    assert!((late(ProductivityType::P1) - 0.7 / 5.0).abs() < 1e-12);
    assert!((late(ProductivityType::P2) - 0.7 / 3.0 / 5.0).abs() < 1e-12);
    assert!((late(ProductivityType::P3) - 1.0 / 5.0).abs() < 1e-12);
    assert!((late(ProductivityType::P4) - 1.0 / 15.0).abs() < 1e-12);
    // Early window 1994-2003 holds P2 alone: 0.7 over ten years.
    assert!((values[ProductivityType::P1.index()][Stage::Early.index()] - 0.07).abs() < 1e-12);
    assert_eq!(unresolved, 0);
}
