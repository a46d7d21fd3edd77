//! Seeded synthetic corpora for benchmarks, load tests and demos.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::wos::CitingRecord;

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    /// Number of distinct reference strings to emit.
    pub distinct_refs: usize,
    /// Fraction of strings that are spelling variants of another work.
    pub variant_rate: f64,
    pub first_citing_year: i32,
    pub last_citing_year: i32,
    pub refs_per_record: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            distinct_refs: 1_000,
            variant_rate: 0.1,
            first_citing_year: 2007,
            last_citing_year: 2021,
            refs_per_record: 40,
            seed: 7,
        }
    }
}

const SYLLABLES: &[&str] = &[
    "ba", "ker", "son", "li", "ma", "ro", "ten", "vic", "hal", "dor", "ne", "sto", "ku", "wen",
    "ish", "ar", "bel", "mi", "tho", "gra", "zu", "pe", "lan", "owi", "ch", "fe", "ri", "an",
];
const WORDS: &[&str] = &[
    "J", "AM", "SOC", "INF", "SCI", "TECHNOL", "RES", "POLICY", "PHYS", "REV", "LETT", "NATURE",
    "SCIENTOMETRICS", "ANNU", "INT", "BIOL", "CHEM", "COMPUT", "MED", "EUR", "STAT", "ECON",
    "MANAG", "LIBR", "DOC", "QUANT", "STUD", "P", "NATL", "ACAD", "USA", "SYST", "MATH", "APPL",
];

struct Work {
    author: String,
    rpy: i32,
    source: String,
    volume: u32,
    page: u32,
}

impl Work {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let syl = rng.random_range(2..=4);
        let mut author: String = (0..syl).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        author[..1].make_ascii_uppercase();
        let initials: String = (0..rng.random_range(1..=2))
            .map(|_| (b'A' + rng.random_range(0..26u8)) as char)
            .collect();
        let n_words = rng.random_range(1..=4);
        let source = (0..n_words).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ");
        // Skewed towards recent years, as reference lists are.
        let age = (rng.random::<f64>().powi(3) * 120.0) as i32;
        Work {
            author: format!("{author} {initials}"),
            rpy: 2020 - age,
            source,
            volume: rng.random_range(1..400),
            page: rng.random_range(1..5000),
        }
    }

    fn render(&self) -> String {
        format!("{}, {}, {}, V{}, P{}", self.author, self.rpy, self.source, self.volume, self.page)
    }

    fn variant(&self, rng: &mut ChaCha8Rng, k: usize) -> String {
        match k % 4 {
            0 => format!("{}, DOI 10.{}/{}", self.render(), 1000 + self.volume, self.page),
            1 => self.render().to_uppercase(),
            2 => format!("{}, {}, {} X, V{}, P{}", self.author, self.rpy, self.source, self.volume, self.page),
            _ => {
                let mut author = self.author.clone();
                author.pop();
                let page = if rng.random_bool(0.5) { String::new() } else { format!(", P{}", self.page) };
                format!("{}, {}, {}, V{}{page}", author.trim_end(), self.rpy, self.source, self.volume)
            }
        }
    }
}

/// Distinct reference strings, variants included.
pub fn reference_strings(config: &SynthConfig) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(config.distinct_refs);
    let mut works: Vec<Work> = Vec::new();
    while out.len() < config.distinct_refs {
        let s = if !works.is_empty() && rng.random::<f64>() < config.variant_rate {
            let w = rng.random_range(0..works.len());
            let k = rng.random_range(0..4);
            works[w].variant(&mut rng, k)
        } else {
            let w = Work::random(&mut rng);
            let s = w.render();
            works.push(w);
            s
        };
        let s = crate::model::normalize_raw(&s);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Citing records covering every string at least once, with a heavy tail
/// of repeated citations.
pub fn synthetic_records(config: &SynthConfig) -> Vec<CitingRecord> {
    let strings = reference_strings(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut occurrences: Vec<usize> = Vec::new();
    for i in 0..strings.len() {
        let repeats = 1 + (rng.random::<f64>().powi(8) * 30.0) as usize;
        occurrences.extend(std::iter::repeat_n(i, repeats));
    }
    // Fisher-Yates keeps generation reproducible across platforms.
    for i in (1..occurrences.len()).rev() {
        let j = rng.random_range(0..=i);
        occurrences.swap(i, j);
    }
    occurrences
        .chunks(config.refs_per_record.max(1))
        .enumerate()
        .map(|(n, chunk)| CitingRecord {
            record_id: format!("SYN:{n:08}"),
            py: Some(rng.random_range(config.first_citing_year..=config.last_citing_year)),
            raw_cr_lines: chunk.iter().map(|&i| strings[i].clone()).collect(),
        })
        .collect()
}

/// Renders records in the plain-text export framing.
pub fn to_wos_text(records: &[CitingRecord]) -> String {
    let mut out = String::from("FN Clarivate Analytics Web of Science\nVR 1.0\n");
    for r in records {
        out.push_str("PT J\n");
        if let Some(py) = r.py {
            out.push_str(&format!("PY {py}\n"));
        }
        for (i, cr) in r.raw_cr_lines.iter().enumerate() {
            out.push_str(if i == 0 { "CR " } else { "   " });
            out.push_str(cr);
            out.push('\n');
        }
        out.push_str(&format!("UT {}\nER\n\n", r.record_id));
    }
    out.push_str("EF\n");
    out
}
