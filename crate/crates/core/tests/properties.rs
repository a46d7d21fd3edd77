mod support;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rpys_core::cluster::{self, ClusterAssignment, ClusterConfig};
use rpys_core::export::{self, CSV_CR_HEADER, CSV_GRAPH_HEADER};
use rpys_core::indicators::{self, compute_indicators, compute_indicators_with, TOP0_1, TOP1, TOP10};
use rpys_core::levenshtein::{levenshtein, levenshtein_bounded, levenshtein_similarity};
use rpys_core::model::normalize_raw;
use rpys_core::par::Execution;
use rpys_core::spectro::{median_deviation, tukey_peaks};
use rpys_core::synth::{synthetic_records, to_wos_text, SynthConfig};
use rpys_core::wos::{parse_cited_reference, parse_wos_file};
use rpys_core::{Analysis, CitingRecord, Dataset, Session, SessionOp, YearFilter};

use support::*;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn cr_parse_is_total_and_keeps_raw(s in "\\PC{0,80}") {
        let r = parse_cited_reference(&s);
        prop_assert_eq!(r.raw, s);
    }

    #[test]
    fn cr_parse_structured(
        author in "[A-Z][a-z]{1,8} [A-Z]{1,2}",
        year in 1000i32..=2100,
        source in "[A-CE-OQ-UW-Z][A-Z]{1,9}( [A-Z]{2,6})?",
        vol in proptest::option::of(1u32..500),
    ) {
        let mut raw = format!("{author}, {year}, {source}");
        if let Some(v) = vol {
            raw.push_str(&format!(", V{v}"));
        }
        let r = parse_cited_reference(&raw);
        prop_assert_eq!(r.first_author.as_deref(), Some(author.as_str()));
        prop_assert_eq!(r.rpy, Some(year));
        prop_assert_eq!(r.volume, vol.map(|v| v.to_string()));
    }

    #[test]
    fn wos_line_count_is_conserved(seed in any::<u64>(), per in 1usize..12) {
        let config = SynthConfig { distinct_refs: 60, refs_per_record: per, seed, ..SynthConfig::default() };
        let records = synthetic_records(&config);
        let text = to_wos_text(&records);
        let parsed = parse_wos_file(text.as_bytes()).unwrap();
        let lines = text.lines().filter(|l| l.starts_with("CR ") || l.starts_with("   ")).count();
        let got: usize = parsed.records.iter().map(|r| r.raw_cr_lines.len()).sum();
        prop_assert_eq!(got, lines);
        prop_assert_eq!(parsed.records, records);
    }

    #[test]
    fn levenshtein_matches_textbook(seed in any::<u64>()) {
        let mut rng = rng(seed);
        for _ in 0..20 {
            let (a, b) = random_pair(&mut rng);
            let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            let d = textbook_levenshtein(&a, &b);
            prop_assert_eq!(levenshtein(&ca, &cb), d);
            prop_assert_eq!(levenshtein(&cb, &ca), d);
            for max in [0usize, 1, 3, d.saturating_sub(1), d, d + 1, 70] {
                prop_assert_eq!(levenshtein_bounded(&ca, &cb, max), (d <= max).then_some(d));
            }
            prop_assert_eq!(levenshtein_similarity(&a, &b), levenshtein_similarity(&b, &a));
        }
    }

    #[test]
    fn clustering_matches_oracle(seed in any::<u64>(), threshold in 0.5f64..1.0, vol: bool, page: bool, doi: bool) {
        let mut rng = rng(seed);
        let ds = random_cluster_dataset(&mut rng, 120);
        let config = ClusterConfig { threshold, use_volume: vol, use_page: page, use_doi: doi };
        let seq = cluster::cluster_with(&ds, &config, Execution::Sequential).unwrap();
        let par = cluster::cluster_with(&ds, &config, Execution::Parallel).unwrap();
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(partition_of(&seq), oracle_partition(&ds, &config));
    }

    #[test]
    fn merge_conserves_mass_for_any_assignment(seed in any::<u64>(), k in 1u64..6) {
        use rand::Rng;
        let mut rng = rng(seed);
        let ds = random_cluster_dataset(&mut rng, 60);
        let cluster_of: BTreeMap<u64, u64> = ds.references.iter().map(|r| (r.cr_id, rng.random_range(0..k))).collect();
        let n_clusters = cluster_of.values().collect::<BTreeSet<_>>().len() as u64;
        let a = ClusterAssignment { cluster_of, n_clusters };
        let merged = cluster::merge(&ds, &a).unwrap();
        prop_assert_eq!(merged.references.len() as u64, n_clusters);
        let before: u64 = ds.references.iter().map(|r| r.n_cr).sum();
        let after: u64 = merged.references.iter().map(|r| r.n_cr).sum();
        prop_assert_eq!(before, after);
        prop_assert!(merged.references.iter().all(|r| r.cluster_id.is_none()));
        let mut years_before: BTreeMap<i32, u64> = BTreeMap::new();
        let mut years_after: BTreeMap<i32, u64> = BTreeMap::new();
        for r in &ds.references {
            for (&y, &c) in &r.counts_by_citing_year { *years_before.entry(y).or_default() += c; }
        }
        for r in &merged.references {
            for (&y, &c) in &r.counts_by_citing_year { *years_after.entry(y).or_default() += c; }
        }
        prop_assert_eq!(years_before, years_after);
    }

    #[test]
    fn ntop_matches_oracle_and_nests(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ds = random_count_dataset(&mut rng, 20, 5, 6);
        let rows = compute_indicators(&ds);
        prop_assert_eq!(&rows, &compute_indicators_with(&ds, Execution::Sequential));
        let years = ds.citing_years().len() as u32;
        for (p, pick) in [(TOP10, 0usize), (TOP1, 1), (TOP0_1, 2)] {
            let oracle = oracle_top_years(&ds, u64::from(p));
            for r in &rows {
                let got = [r.n_top10, r.n_top1, r.n_top0_1][pick];
                prop_assert_eq!(got as usize, oracle[&r.cr_id].len());
            }
        }
        let t10 = oracle_top_years(&ds, u64::from(TOP10));
        let t1 = oracle_top_years(&ds, u64::from(TOP1));
        let t01 = oracle_top_years(&ds, u64::from(TOP0_1));
        for r in &rows {
            prop_assert!(t01[&r.cr_id].is_subset(&t1[&r.cr_id]));
            prop_assert!(t1[&r.cr_id].is_subset(&t10[&r.cr_id]));
            prop_assert!(r.n_top10 <= r.n_pyears && r.n_pyears <= years);
        }
    }

    #[test]
    fn ntop_is_scale_invariant(seed in any::<u64>(), k in 2u64..5) {
        let mut rng = rng(seed);
        let ds = random_count_dataset(&mut rng, 12, 4, 4);
        let mut scaled = ds.clone();
        for r in &mut scaled.references {
            for c in r.counts_by_citing_year.values_mut() { *c *= k; }
            r.n_cr *= k;
        }
        let a: Vec<u32> = compute_indicators(&ds).iter().map(|r| r.n_top10).collect();
        let b: Vec<u32> = compute_indicators(&scaled).iter().map(|r| r.n_top10).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn perc_yr_partitions_unity(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ds = random_count_dataset(&mut rng, 20, 5, 9);
        let rows = compute_indicators(&ds);
        let mut sums: BTreeMap<i32, f64> = BTreeMap::new();
        for (r, row) in ds.references.iter().zip(&rows) {
            let p = row.perc_yr.unwrap();
            prop_assert!(p > 0.0 && p <= 1.0);
            prop_assert_eq!(p, indicators::perc_yr(&ds, r.cr_id).unwrap());
            *sums.entry(r.rpy().unwrap()).or_default() += p;
        }
        for s in sums.values() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn median_deviation_matches_oracle(series in proptest::collection::btree_map(1800i32..1900, 0u64..10_000, 1..60)) {
        let got = median_deviation(&series);
        let want = oracle_median_deviation(&series);
        prop_assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
        for (y, d) in &got {
            prop_assert!((d - want[y]).abs() <= 1e-9);
        }
    }

    #[test]
    fn median_deviation_translation_invariant(values in proptest::collection::vec(0u64..1000, 1..80), c in 1u64..500) {
        let a: BTreeMap<i32, u64> = values.iter().enumerate().map(|(i, &v)| (2000 + i as i32, v)).collect();
        let b: BTreeMap<i32, u64> = a.iter().map(|(&y, &v)| (y, v + c)).collect();
        prop_assert_eq!(median_deviation(&a), median_deviation(&b));
    }

    #[test]
    fn peak_flags_exceed_fence(values in proptest::collection::vec(-50.0f64..50.0, 0..40)) {
        let devs: BTreeMap<i32, f64> = values.iter().enumerate().map(|(i, &v)| (i as i32, v)).collect();
        let peaks = tukey_peaks(&devs);
        match rpys_core::spectro::upper_fence(&values) {
            None => prop_assert!(peaks.is_empty()),
            Some(f) => for (y, d) in &devs { prop_assert_eq!(peaks.contains(y), *d > f); },
        }
    }

    #[test]
    fn cre_round_trip_is_lossless(seed in any::<u64>(), step in 0usize..4) {
        let mut rng = rng(seed);
        let ds = random_cluster_dataset(&mut rng, 40);
        let mut session = Session::new(ds);
        let ops = [SessionOp::Cluster(ClusterConfig::default()), SessionOp::Merge, SessionOp::RemoveCr { lo: 0, hi: 1 }];
        for op in ops.iter().take(step) {
            if session.apply(op).is_err() { break; }
        }
        let bytes = export::encode_cre(&session);
        let back = export::decode_cre(&bytes).unwrap();
        prop_assert_eq!(&back, &session);
        prop_assert_eq!(export::encode_cre(&back), bytes);
    }

    #[test]
    fn csv_reparses_strictly(seed in any::<u64>(), weird in "[ ,\"a-z\\n]{0,12}") {
        let mut rng = rng(seed);
        let mut ds = random_cluster_dataset(&mut rng, 30);
        let trap = normalize_raw(&format!("Q{weird}, 2001, X"));
        ds = Dataset::build(
            ds.citing_records.into_iter().chain([CitingRecord { record_id: "T".into(), py: Some(2006), raw_cr_lines: vec![trap] }]).collect(),
            vec![], YearFilter::default(), YearFilter::default(), 0,
        ).unwrap();
        let analysis = Analysis::of(&ds).unwrap();
        let cr = export::csv_cr_bytes(&ds, &analysis).unwrap();
        prop_assert_eq!(&cr, &export::csv_cr_bytes(&ds, &analysis).unwrap());
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(&cr[..]);
        prop_assert_eq!(rdr.headers().unwrap(), CSV_CR_HEADER.as_slice());
        let raws: BTreeSet<String> = rdr.records().map(|r| r.unwrap()[0].to_string()).collect();
        let want: BTreeSet<String> = ds.references.iter().map(|r| r.raw().to_string()).collect();
        prop_assert_eq!(raws, want);
        prop_assert!(!cr.contains(&b'\r'));

        let graph = export::csv_graph_bytes(&ds, &analysis).unwrap();
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(&graph[..]);
        prop_assert_eq!(rdr.headers().unwrap(), CSV_GRAPH_HEADER.as_slice());
        prop_assert_eq!(rdr.records().count(), analysis.spectrogram.len());
    }

    #[test]
    fn remove_is_idempotent_and_conserves(seed in any::<u64>(), lo in 0u64..3, width in 0u64..3) {
        let mut rng = rng(seed);
        let mut ds = random_count_dataset(&mut rng, 20, 4, 5);
        let total: u64 = ds.references.iter().map(|r| r.n_cr).sum();
        prop_assert_eq!(total, ds.stats().total_nondistinct_crs);
        let _ = ds.remove_by_ncr(lo, lo + width);
        let once = ds.references.clone();
        let _ = ds.remove_by_ncr(lo, lo + width);
        prop_assert_eq!(&once, &ds.references);
        prop_assert!(ds.references.iter().all(|r| r.n_cr < lo || r.n_cr > lo + width));
    }
}

#[test]
fn spike_over_flat_noise_is_the_only_peak() {
    let mut rng = rng(11);
    for _ in 0..200 {
        let (series, spike) = spiked_series(&mut rng, 50);
        assert_eq!(tukey_peaks(&median_deviation(&series)), BTreeSet::from([spike]), "{series:?}");
    }
    let flat: BTreeMap<i32, u64> = (1950..2000).map(|y| (y, if y == 1977 { 100 } else { 0 })).collect();
    assert_eq!(tukey_peaks(&median_deviation(&flat)), BTreeSet::from([1977]));
}
