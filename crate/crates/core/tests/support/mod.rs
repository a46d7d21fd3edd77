//! Brute-force oracles and random dataset generators shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpys_core::cluster::{comparison_string, ClusterAssignment, ClusterConfig};
use rpys_core::{CitedReference, CitingRecord, CrId, Dataset, YearFilter};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Full-matrix edit distance.
pub fn textbook_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

pub fn random_string(rng: &mut ChaCha8Rng, alphabet: &[char], max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// Pair generator biased towards near-duplicates, where banding bugs show.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (String, String) {
    const SMALL: &[char] = &['a', 'b', 'c'];
    const WIDE: &[char] = &['a', 'e', 'x', 'z', ' ', '|', 'é', 'ß', '中', '1'];
    let alphabet = if rng.random_bool(0.5) { SMALL } else { WIDE };
    let a = random_string(rng, alphabet, 64);
    let b = if rng.random_bool(0.5) {
        random_string(rng, alphabet, 64)
    } else {
        mutate(rng, &a, alphabet, 6)
    };
    (a, b)
}

pub fn mutate(rng: &mut ChaCha8Rng, s: &str, alphabet: &[char], max_edits: usize) -> String {
    let mut v: Vec<char> = s.chars().collect();
    for _ in 0..rng.random_range(0..=max_edits) {
        let c = *alphabet.choose(rng).unwrap();
        match rng.random_range(0..3) {
            0 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v.remove(i);
            }
            1 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v[i] = c;
            }
            _ if v.len() < 64 => {
                let i = rng.random_range(0..=v.len());
                v.insert(i, c);
            }
            _ => {}
        }
    }
    v.into_iter().collect()
}

fn oracle_link(a: &CitedReference, b: &CitedReference, config: &ClusterConfig) -> bool {
    if a.rpy() != b.rpy() {
        return false;
    }
    if config.use_doi && a.parsed.dois.iter().any(|d| b.parsed.dois.contains(d)) {
        return true;
    }
    let clash = |x: &Option<String>, y: &Option<String>| matches!((x, y), (Some(p), Some(q)) if p != q);
    if config.use_volume && clash(&a.parsed.volume, &b.parsed.volume) {
        return false;
    }
    if config.use_page && clash(&a.parsed.page, &b.parsed.page) {
        return false;
    }
    let (sa, sb) = (comparison_string(&a.parsed), comparison_string(&b.parsed));
    let longest = sa.chars().count().max(sb.chars().count());
    let similarity = if longest == 0 {
        1.0
    } else {
        1.0 - textbook_levenshtein(&sa, &sb) as f64 / longest as f64
    };
    similarity >= config.threshold
}

/// Connected components of the all-pairs link relation, found by BFS.
pub fn oracle_partition(dataset: &Dataset, config: &ClusterConfig) -> BTreeSet<BTreeSet<CrId>> {
    let refs = &dataset.references;
    let n = refs.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if oracle_link(&refs[i], &refs[j], config) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = BTreeSet::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            comp.insert(refs[i].cr_id);
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        out.insert(comp);
    }
    out
}

pub fn partition_of(assignment: &ClusterAssignment) -> BTreeSet<BTreeSet<CrId>> {
    assignment.members().into_values().map(|m| m.into_iter().collect()).collect()
}

/// Window medians recomputed from scratch for every year.
pub fn oracle_median_deviation(series: &BTreeMap<i32, u64>) -> BTreeMap<i32, f64> {
    let (Some(&lo), Some(&hi)) = (series.keys().next(), series.keys().next_back()) else {
        return BTreeMap::new();
    };
    let at = |y: i32| series.get(&y).copied().unwrap_or(0) as f64;
    (lo..=hi)
        .map(|y| {
            let mut w: Vec<f64> = ((y - 2)..=(y + 2)).filter(|t| (lo..=hi).contains(t)).map(at).collect();
            w.sort_by(f64::total_cmp);
            let m = if w.len() % 2 == 1 {
                w[w.len() / 2]
            } else {
                (w[w.len() / 2 - 1] + w[w.len() / 2]) / 2.0
            };
            (y, at(y) - m)
        })
        .collect()
}

/// Per reference, the citing years in which it reaches the top `p_milli`
/// thousandths of a percent. A count qualifies when at least `r` of the
/// year's values are no larger than it, `r` being the nearest rank.
pub fn oracle_top_years(dataset: &Dataset, p_milli: u64) -> BTreeMap<CrId, BTreeSet<i32>> {
    let years: BTreeSet<i32> = dataset
        .references
        .iter()
        .flat_map(|r| r.counts_by_citing_year.iter().filter(|(_, &c)| c > 0).map(|(&y, _)| y))
        .collect();
    let mut out: BTreeMap<CrId, BTreeSet<i32>> =
        dataset.references.iter().map(|r| (r.cr_id, BTreeSet::new())).collect();
    for y in years {
        let values: Vec<u64> = dataset.references.iter().map(|r| r.count_in(y)).filter(|&c| c > 0).collect();
        let n = values.len() as u64;
        let keep = 100_000 - p_milli;
        let mut rank = 1;
        while 100_000 * rank < keep * n {
            rank += 1;
        }
        for r in &dataset.references {
            let c = r.count_in(y);
            if c > 0 && values.iter().filter(|&&v| v <= c).count() as u64 >= rank {
                out.get_mut(&r.cr_id).unwrap().insert(y);
            }
        }
    }
    out
}

pub fn records_from(lines: &[(String, Option<i32>)]) -> Vec<CitingRecord> {
    lines
        .iter()
        .enumerate()
        .map(|(i, (l, py))| CitingRecord { record_id: format!("R{i}"), py: *py, raw_cr_lines: vec![l.clone()] })
        .collect()
}

pub fn build(records: Vec<CitingRecord>) -> Dataset {
    Dataset::build(records, vec![], YearFilter::default(), YearFilter::default(), 0).unwrap()
}

const AUTHORS: &[&str] = &["SMITH J", "SMITH JA", "SMYTH J", "Li X", "LI XY", "NG A", "Garfield E"];
const SOURCES: &[&str] = &[
    "SCIENTOMETRICS",
    "SCIENTOMETRIC",
    "J INFORMETR",
    "J INFORMETRICS",
    "NATURE",
    "NATURE PHYS",
    "P NATL ACAD SCI USA",
    "P NATL ACAD SCI",
];

/// A reference string with a controlled amount of near-collision:
/// few authors, sources, years, volumes and DOIs.
pub fn random_cr(rng: &mut ChaCha8Rng) -> String {
    let mut author = AUTHORS.choose(rng).unwrap().to_string();
    let mut source = SOURCES.choose(rng).unwrap().to_string();
    if rng.random_bool(0.3) {
        author = mutate(rng, &author, &['A', 'E', 'S', ' ', '.'], 2);
    }
    if rng.random_bool(0.3) {
        source = mutate(rng, &source, &['A', 'I', 'N', 'S', ' ', '-'], 3);
    }
    let mut parts = Vec::new();
    if !author.trim().is_empty() {
        parts.push(author.trim().to_string());
    }
    if rng.random_bool(0.95) {
        parts.push(rng.random_range(2000..2003).to_string());
    }
    if !source.trim().is_empty() {
        parts.push(source.trim().to_string());
    }
    if rng.random_bool(0.7) {
        parts.push(format!("V{}", rng.random_range(1..4)));
    }
    if rng.random_bool(0.6) {
        parts.push(format!("P{}", rng.random_range(10..13)));
    }
    if rng.random_bool(0.3) {
        parts.push(format!("DOI 10.1000/{}", rng.random_range(0..5)));
    }
    parts.join(", ")
}

/// At most `max_refs` references, each cited one to three times.
pub fn random_cluster_dataset(rng: &mut ChaCha8Rng, max_refs: usize) -> Dataset {
    let target = rng.random_range(1..=max_refs);
    let mut strings: BTreeSet<String> = BTreeSet::new();
    let mut tries = 0;
    while strings.len() < target && tries < target * 20 {
        strings.insert(random_cr(rng));
        tries += 1;
    }
    let mut lines = Vec::new();
    for s in strings {
        for _ in 0..rng.random_range(1..=3) {
            lines.push((s.clone(), Some(rng.random_range(2005..2010))));
        }
    }
    build(records_from(&lines))
}

/// Small count matrices: up to `max_refs` references and `max_years`
/// citing years, counts 0..=max_count, every reference cited at least once.
pub fn random_count_dataset(rng: &mut ChaCha8Rng, max_refs: usize, max_years: i32, max_count: u64) -> Dataset {
    let n_refs = rng.random_range(1..=max_refs);
    let n_years = rng.random_range(1..=max_years);
    let mut lines = Vec::new();
    for i in 0..n_refs {
        let rpy = 1990 + rng.random_range(0..4);
        let raw = format!("Author{i} A, {rpy}, JOURNAL {i}");
        let mut any = false;
        for y in 0..n_years {
            let c = if rng.random_bool(0.4) { 0 } else { rng.random_range(1..=max_count) };
            for _ in 0..c {
                lines.push((raw.clone(), Some(2010 + y)));
            }
            any |= c > 0;
        }
        if !any {
            lines.push((raw, Some(2010)));
        }
    }
    build(records_from(&lines))
}

/// A period-3 background (b-1, b+1, b) has window median b everywhere, so
/// its deviations stay within ±2 and the fence sits at 4. A spike of at
/// least 50 is therefore the only year above it.
pub fn spiked_series(rng: &mut ChaCha8Rng, years: i32) -> (BTreeMap<i32, u64>, i32) {
    let base = rng.random_range(5..1000u64);
    let phase = rng.random_range(0..3);
    let pattern = [base - 1, base + 1, base];
    let spike = rng.random_range(1950..1950 + years);
    let height = rng.random_range(50..500);
    let series = (1950..1950 + years)
        .map(|y| (y, if y == spike { base + height } else { pattern[((y + phase) % 3) as usize] }))
        .collect();
    (series, spike)
}
