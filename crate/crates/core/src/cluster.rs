//! Variant clustering of cited references.
//!
//! Two references in the same RPY block link when they share a DOI (if
//! enabled) or when their comparison strings are similar enough and their
//! volume/page fields do not contradict each other. Clusters are the
//! connected components of that link relation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levenshtein::{levenshtein_bounded, max_distance_for};
use crate::model::{CitedReference, CrId, Dataset, ModelError, Operation};
use crate::par::{self, Execution};
use crate::union_find::UnionFind;
use crate::wos::RawCitedReference;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("clustering threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("cluster assignment does not partition the dataset's references")]
    AssignmentMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub threshold: f64,
    pub use_volume: bool,
    pub use_page: bool,
    pub use_doi: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { threshold: 0.75, use_volume: true, use_page: true, use_doi: false }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if (0.0..=1.0).contains(&self.threshold) {
            Ok(())
        } else {
            Err(ClusterError::InvalidThreshold(self.threshold))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub cluster_of: BTreeMap<CrId, u64>,
    pub n_clusters: u64,
}

impl ClusterAssignment {
    pub fn members(&self) -> BTreeMap<u64, Vec<CrId>> {
        let mut out: BTreeMap<u64, Vec<CrId>> = BTreeMap::new();
        for (&cr, &c) in &self.cluster_of {
            out.entry(c).or_default().push(cr);
        }
        out
    }
}

/// Lowercased first author and source, punctuation stripped, whitespace
/// collapsed, joined by `|`.
pub fn comparison_string(parsed: &RawCitedReference) -> String {
    fn clean(s: Option<&str>) -> String {
        let s: String = s
            .unwrap_or("")
            .to_lowercase()
            .chars()
            .filter(|c| c.is_alphanumeric() || c.is_whitespace())
            .collect();
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }
    format!("{}|{}", clean(parsed.first_author.as_deref()), clean(parsed.source.as_deref()))
}

/// Present-and-unequal is the only incompatible combination.
pub fn compatible(a: Option<&str>, b: Option<&str>) -> bool {
    !matches!((a, b), (Some(x), Some(y)) if x != y)
}

struct Prepared<'a> {
    chars: Vec<char>,
    volume: Option<&'a str>,
    page: Option<&'a str>,
    dois: &'a [String],
}

impl<'a> Prepared<'a> {
    fn new(r: &'a CitedReference) -> Self {
        Self {
            chars: comparison_string(&r.parsed).chars().collect(),
            volume: r.parsed.volume.as_deref(),
            page: r.parsed.page.as_deref(),
            dois: &r.parsed.dois,
        }
    }

    fn constraints_ok(&self, other: &Self, config: &ClusterConfig) -> bool {
        (!config.use_volume || compatible(self.volume, other.volume))
            && (!config.use_page || compatible(self.page, other.page))
    }
}

fn string_link(a: &Prepared, b: &Prepared, threshold: f64) -> bool {
    let longest = a.chars.len().max(b.chars.len());
    match max_distance_for(threshold, longest) {
        None => false,
        Some(max) => a.chars == b.chars || levenshtein_bounded(&a.chars, &b.chars, max).is_some(),
    }
}

/// Whether two references link directly under `config`, ignoring blocking.
pub fn links(a: &CitedReference, b: &CitedReference, config: &ClusterConfig) -> bool {
    let (pa, pb) = (Prepared::new(a), Prepared::new(b));
    if config.use_doi && pa.dois.iter().any(|d| pb.dois.contains(d)) {
        return true;
    }
    pa.constraints_ok(&pb, config) && string_link(&pa, &pb, config.threshold)
}

pub fn cluster(dataset: &Dataset, config: &ClusterConfig) -> Result<ClusterAssignment, ClusterError> {
    cluster_with(dataset, config, Execution::default())
}

pub fn cluster_with(
    dataset: &Dataset,
    config: &ClusterConfig,
    exec: Execution,
) -> Result<ClusterAssignment, ClusterError> {
    config.validate()?;
    dataset.ensure_non_empty()?;

    let prepared: Vec<Prepared> = par::map_collect(&dataset.references, exec, Prepared::new);

    let mut blocks: BTreeMap<Option<i32>, Vec<usize>> = BTreeMap::new();
    for (i, r) in dataset.references.iter().enumerate() {
        blocks.entry(r.rpy()).or_default().push(i);
    }
    let blocks: Vec<Vec<usize>> = blocks
        .into_values()
        .map(|mut members| {
            members.sort_by_key(|&i| (prepared[i].chars.len(), i));
            members
        })
        .collect();

    // One task per (block, row) so that a single dominant year still spreads.
    let rows: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, m)| (0..m.len()).map(move |k| (b, k)))
        .collect();

    let edges: Vec<(usize, usize)> = par::flat_map_collect(&rows, exec, |&(b, k)| {
        let members = &blocks[b];
        let i = members[k];
        let pi = &prepared[i];
        let mut out = Vec::new();
        for &j in &members[k + 1..] {
            let pj = &prepared[j];
            let longest = pj.chars.len();
            let Some(max) = max_distance_for(config.threshold, longest) else {
                continue;
            };
            if longest - pi.chars.len() > max {
                break;
            }
            if pi.constraints_ok(pj, config) && string_link_bounded(pi, pj, max) {
                out.push((i, j));
            }
        }
        out
    });

    let mut uf = UnionFind::new(dataset.references.len());
    for (a, b) in edges {
        uf.union(a, b);
    }
    if config.use_doi {
        for members in &blocks {
            let mut first_with: HashMap<&str, usize> = HashMap::new();
            for &i in members {
                for d in prepared[i].dois {
                    match first_with.get(d.as_str()) {
                        Some(&j) => {
                            uf.union(i, j);
                        }
                        None => {
                            first_with.insert(d, i);
                        }
                    }
                }
            }
        }
    }

    let (labels, n_clusters) = uf.labels();
    let cluster_of = dataset
        .references
        .iter()
        .zip(labels)
        .map(|(r, l)| (r.cr_id, l))
        .collect();
    Ok(ClusterAssignment { cluster_of, n_clusters })
}

fn string_link_bounded(a: &Prepared, b: &Prepared, max: usize) -> bool {
    a.chars == b.chars || levenshtein_bounded(&a.chars, &b.chars, max).is_some()
}

/// Records the assignment on the references and in the op log.
pub fn annotate(dataset: &mut Dataset, assignment: &ClusterAssignment, config: &ClusterConfig) {
    for r in &mut dataset.references {
        r.cluster_id = assignment.cluster_of.get(&r.cr_id).copied();
    }
    dataset.op_log.push(Operation::Cluster {
        threshold: config.threshold,
        volume: config.use_volume,
        page: config.use_page,
        doi: config.use_doi,
        n_clusters: assignment.n_clusters,
    });
}

/// Collapses each cluster into one reference with summed per-year counts.
/// Bibliographic fields come from the most cited member (ties: smallest raw).
pub fn merge(dataset: &Dataset, assignment: &ClusterAssignment) -> Result<Dataset, ClusterError> {
    let ids: BTreeSet<CrId> = dataset.references.iter().map(|r| r.cr_id).collect();
    if ids.len() != dataset.references.len()
        || assignment.cluster_of.len() != ids.len()
        || !assignment.cluster_of.keys().all(|k| ids.contains(k))
    {
        return Err(ClusterError::AssignmentMismatch);
    }

    let mut canonical: HashMap<u64, usize> = HashMap::new();
    for (i, r) in dataset.references.iter().enumerate() {
        let c = assignment.cluster_of[&r.cr_id];
        canonical
            .entry(c)
            .and_modify(|best| {
                let b = &dataset.references[*best];
                if r.n_cr > b.n_cr || (r.n_cr == b.n_cr && r.raw() < b.raw()) {
                    *best = i;
                }
            })
            .or_insert(i);
    }

    let mut merged: HashMap<u64, CitedReference> = canonical
        .iter()
        .map(|(&c, &i)| {
            let mut r = dataset.references[i].clone();
            r.counts_by_citing_year.clear();
            r.undated_count = 0;
            r.n_cr = 0;
            r.cluster_id = None;
            (c, r)
        })
        .collect();
    for r in &dataset.references {
        let m = merged.get_mut(&assignment.cluster_of[&r.cr_id]).expect("cluster present");
        for (&y, &n) in &r.counts_by_citing_year {
            *m.counts_by_citing_year.entry(y).or_insert(0) += n;
        }
        m.undated_count += r.undated_count;
        m.n_cr += r.n_cr;
    }

    let references: Vec<CitedReference> = dataset
        .references
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let c = assignment.cluster_of[&r.cr_id];
            (canonical[&c] == i).then(|| merged.remove(&c).expect("one canonical per cluster"))
        })
        .collect();

    let mut out = Dataset {
        citing_records: dataset.citing_records.clone(),
        references,
        rpy_filter: dataset.rpy_filter,
        py_filter: dataset.py_filter,
        max_cr: dataset.max_cr,
        op_log: dataset.op_log.clone(),
    };
    out.op_log.push(Operation::Merge {
        before: dataset.references.len() as u64,
        after: out.references.len() as u64,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::YearFilter;
    use crate::wos::CitingRecord;

    fn dataset(lines: &[(&str, i32)]) -> Dataset {
        let records = lines
            .iter()
            .enumerate()
            .map(|(i, (l, py))| CitingRecord {
                record_id: i.to_string(),
                py: Some(*py),
                raw_cr_lines: vec![l.to_string()],
            })
            .collect();
        Dataset::build(records, vec![], YearFilter::default(), YearFilter::default(), 0).unwrap()
    }

    #[test]
    fn comparison_string_shape() {
        let p = crate::wos::parse_cited_reference("Hirsch, J. E., 2005, P NATL ACAD SCI USA, V102");
        assert_eq!(comparison_string(&p), "hirsch j e|p natl acad sci usa");
        let p = crate::wos::parse_cited_reference("Priem J, 2010");
        assert_eq!(comparison_string(&p), "priem j|");
    }

    #[test]
    fn journal_suffix_variant_links() {
        let ds = dataset(&[
            ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569", 2010),
            ("HIRSCH JE, 2005, P NATL ACAD SCI, V102, P16569", 2011),
        ]);
        let sim = crate::levenshtein::levenshtein_similarity(
            &comparison_string(&ds.references[0].parsed),
            &comparison_string(&ds.references[1].parsed),
        );
        assert!((sim - (1.0 - 4.0 / 29.0)).abs() < 1e-12);
        let a = cluster(&ds, &ClusterConfig::default()).unwrap();
        assert_eq!(a.n_clusters, 1);
    }

    #[test]
    fn volume_conflict_blocks() {
        let ds = dataset(&[
            ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569", 2010),
            ("HIRSCH JE, 2005, P NATL ACAD SCI, V12, P16569", 2011),
        ]);
        assert_eq!(cluster(&ds, &ClusterConfig::default()).unwrap().n_clusters, 2);
        let loose = ClusterConfig { use_volume: false, ..Default::default() };
        assert_eq!(cluster(&ds, &loose).unwrap().n_clusters, 1);
    }

    #[test]
    fn missing_page_is_compatible() {
        let ds = dataset(&[
            ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569", 2010),
            ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102", 2011),
        ]);
        assert_eq!(cluster(&ds, &ClusterConfig::default()).unwrap().n_clusters, 1);
    }

    #[test]
    fn doi_override() {
        let ds = dataset(&[
            ("Smith A, 2005, SOME JOURNAL, V1, DOI 10.1/abc", 2010),
            ("Totally Different Q, 2005, ELSEWHERE, V9, DOI 10.1/ABC", 2011),
        ]);
        let off = cluster(&ds, &ClusterConfig::default()).unwrap();
        assert_eq!(off.n_clusters, 2);
        let on = cluster(&ds, &ClusterConfig { use_doi: true, ..Default::default() }).unwrap();
        assert_eq!(on.n_clusters, 1);
    }

    #[test]
    fn different_years_never_link() {
        let ds = dataset(&[("Egghe L, 2006, SCIENTOMETRICS", 2010), ("Egghe L, 2007, SCIENTOMETRICS", 2010)]);
        assert_eq!(cluster(&ds, &ClusterConfig::default()).unwrap().n_clusters, 2);
    }

    #[test]
    fn invalid_threshold() {
        let ds = dataset(&[("A, 2000, J", 2010)]);
        let bad = ClusterConfig { threshold: 1.5, ..Default::default() };
        assert!(matches!(cluster(&ds, &bad), Err(ClusterError::InvalidThreshold(_))));
    }

    #[test]
    fn merge_sums_counts() {
        let ds = dataset(&[
            ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569", 2007),
            ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569", 2007),
            ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569", 2007),
            ("HIRSCH JE, 2005, P NATL ACAD SCI, V102, P16569", 2009),
            ("HIRSCH JE, 2005, P NATL ACAD SCI, V102, P16569", 2009),
        ]);
        let a = cluster(&ds, &ClusterConfig::default()).unwrap();
        let merged = merge(&ds, &a).unwrap();
        assert_eq!(merged.references.len(), 1);
        let r = &merged.references[0];
        assert_eq!(r.counts_by_citing_year, BTreeMap::from([(2007, 3), (2009, 2)]));
        assert_eq!(r.n_cr, 5);
        assert_eq!(r.raw(), "HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569");
        assert_eq!(merged.op_log.last(), Some(&Operation::Merge { before: 2, after: 1 }));
    }

    #[test]
    fn merge_tie_prefers_smallest_raw() {
        let ds = dataset(&[("EGGHE L, 2006, SCIENTOMETRICS", 2007), ("EGGHE L, 2006, SCIENTOMETRIC", 2009)]);
        let a = cluster(&ds, &ClusterConfig::default()).unwrap();
        let merged = merge(&ds, &a).unwrap();
        assert_eq!(merged.references.len(), 1);
        assert_eq!(merged.references[0].raw(), "EGGHE L, 2006, SCIENTOMETRIC");
    }

    #[test]
    fn bare_p_segment_reads_as_page() {
        // "PNAS" alone matches the page marker, so these two conflict on page.
        let ds = dataset(&[("HIRSCH JE, 2005, PNAS USA", 2007), ("HIRSCH JE, 2005, PNAS", 2009)]);
        assert_eq!(ds.references[1].parsed.page.as_deref(), Some("NAS"));
        assert_eq!(cluster(&ds, &ClusterConfig::default()).unwrap().n_clusters, 2);
    }

    #[test]
    fn stale_assignment_rejected() {
        let mut ds = dataset(&[("A, 2000, J", 2010), ("B, 2001, K", 2010)]);
        let a = cluster(&ds, &ClusterConfig::default()).unwrap();
        ds.references.pop();
        assert_eq!(merge(&ds, &a).unwrap_err(), ClusterError::AssignmentMismatch);
    }
}
