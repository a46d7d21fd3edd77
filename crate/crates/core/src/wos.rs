//! Web of Science plain-text export ingest.
//!
//! Records are framed by `PT` ... `ER`, fields use a two-character tag at
//! column 0 and continuation lines indented by at least two spaces. `EF`
//! terminates the file. Only `PY`, `UT` and `CR` are interpreted; every
//! other field is skipped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 2100;

/// One publication from a database export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitingRecord {
    pub record_id: String,
    pub py: Option<i32>,
    pub raw_cr_lines: Vec<String>,
}

/// A cited-reference line split into its bibliographic segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCitedReference {
    pub raw: String,
    pub first_author: Option<String>,
    pub rpy: Option<i32>,
    pub source: Option<String>,
    pub volume: Option<String>,
    pub page: Option<String>,
    pub dois: Vec<String>,
}

/// A record-level problem that did not stop parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WosParse {
    pub records: Vec<CitingRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("input is not valid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },
}

/// Parses an export with record ids of the form `#<ordinal>` when no `UT`
/// accession is present.
pub fn parse_wos_file(bytes: &[u8]) -> Result<WosParse, FormatError> {
    parse_wos_named("", bytes)
}

/// Like [`parse_wos_file`], with `source_name` used as the record id prefix
/// for records lacking an accession number.
pub fn parse_wos_named(source_name: &str, bytes: &[u8]) -> Result<WosParse, FormatError> {
    const BOM: &[u8] = b"\xEF\xBB\xBF";
    let (body, shift) = match bytes.strip_prefix(BOM) {
        Some(rest) => (rest, BOM.len()),
        None => (bytes, 0),
    };
    let text = std::str::from_utf8(body).map_err(|e| FormatError::InvalidUtf8 {
        offset: e.valid_up_to() + shift,
    })?;

    let mut out = WosParse::default();
    let mut current: Option<RecordBuilder> = None;
    let mut field: Option<String> = None;
    let mut ordinal = 0usize;

    for (idx, line) in text.split('\n').enumerate() {
        let lineno = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }

        if line.starts_with("  ") {
            match (&mut current, field.as_deref()) {
                (Some(rec), Some(tag)) => rec.push(tag, line.trim(), lineno, &mut out.diagnostics),
                _ => out.diagnostics.push(Diagnostic {
                    line: lineno,
                    message: "continuation line outside of a field".into(),
                }),
            }
            continue;
        }

        let (tag, value) = split_tag(line);
        match tag {
            "EF" => break,
            "PT" => {
                if let Some(rec) = current.take() {
                    out.diagnostics.push(Diagnostic {
                        line: lineno,
                        message: "PT before ER; previous record closed implicitly".into(),
                    });
                    out.records.push(rec.finish(source_name, ordinal));
                }
                ordinal += 1;
                current = Some(RecordBuilder::default());
                field = Some("PT".into());
            }
            "ER" => match current.take() {
                Some(rec) => {
                    out.records.push(rec.finish(source_name, ordinal));
                    field = None;
                }
                None => out.diagnostics.push(Diagnostic {
                    line: lineno,
                    message: "ER without matching PT".into(),
                }),
            },
            _ => match &mut current {
                Some(rec) => {
                    field = Some(tag.to_string());
                    rec.push(tag, value, lineno, &mut out.diagnostics);
                }
                None => {
                    // FN / VR headers and stray fields between records.
                    field = None;
                }
            },
        }
    }

    if let Some(rec) = current.take() {
        out.diagnostics.push(Diagnostic {
            line: text.lines().count(),
            message: "record not terminated by ER".into(),
        });
        out.records.push(rec.finish(source_name, ordinal));
    }
    Ok(out)
}

fn split_tag(line: &str) -> (&str, &str) {
    match line.char_indices().nth(2) {
        None => (line, ""),
        Some((pos, _)) => (&line[..pos], line[pos..].trim()),
    }
}

#[derive(Default)]
struct RecordBuilder {
    accession: Option<String>,
    py: Option<i32>,
    cr: Vec<String>,
}

impl RecordBuilder {
    fn push(&mut self, tag: &str, value: &str, line: usize, diags: &mut Vec<Diagnostic>) {
        match tag {
            "CR" => {
                if !value.is_empty() {
                    self.cr.push(value.to_string());
                }
            }
            "PY" => {
                self.py = parse_year(value);
                if self.py.is_none() {
                    diags.push(Diagnostic {
                        line,
                        message: format!("unparseable publication year {value:?}"),
                    });
                }
            }
            "UT" if !value.is_empty() => self.accession = Some(value.to_string()),
            _ => {}
        }
    }

    fn finish(self, source_name: &str, ordinal: usize) -> CitingRecord {
        CitingRecord {
            record_id: self
                .accession
                .unwrap_or_else(|| format!("{source_name}#{ordinal}")),
            py: self.py,
            raw_cr_lines: self.cr,
        }
    }
}

/// A standalone 4-digit year within [`MIN_YEAR`, `MAX_YEAR`].
pub fn parse_year(s: &str) -> Option<i32> {
    let s = s.trim();
    if s.len() != 4 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let y: i32 = s.parse().ok()?;
    (MIN_YEAR..=MAX_YEAR).contains(&y).then_some(y)
}

/// Splits a cited-reference string into author, year, source, volume, page
/// and DOI segments. Never fails; `raw` is kept verbatim.
pub fn parse_cited_reference(raw: &str) -> RawCitedReference {
    let segments = split_segments(raw);
    let year_pos = segments.iter().position(|s| parse_year(s).is_some());

    let (author_segs, rest, rpy) = match year_pos {
        Some(p) => (&segments[..p], &segments[p + 1..], parse_year(segments[p])),
        None if segments.is_empty() => (&segments[..0], &segments[..0], None),
        None => (&segments[..1], &segments[1..], None),
    };

    let mut source_parts: Vec<&str> = Vec::new();
    let mut volume = None;
    let mut page = None;
    let mut dois = Vec::new();
    let mut seen_marker = false;
    for seg in rest {
        if let Some(v) = marker_value(seg, 'V') {
            seen_marker = true;
            volume.get_or_insert_with(|| v.to_string());
        } else if let Some(p) = marker_value(seg, 'P') {
            seen_marker = true;
            page.get_or_insert_with(|| p.to_string());
        } else if let Some(d) = seg.strip_prefix("DOI ") {
            seen_marker = true;
            dois.extend(parse_dois(d));
        } else if !seen_marker {
            source_parts.push(seg);
        }
    }

    RawCitedReference {
        raw: raw.to_string(),
        first_author: join_nonempty(author_segs),
        rpy,
        source: join_nonempty(&source_parts),
        volume,
        page,
        dois,
    }
}

/// Splits on ", " outside square brackets.
fn split_segments(raw: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = raw.as_bytes();
    let mut depth = 0usize;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'[' => depth += 1,
            b']' => depth = depth.saturating_sub(1),
            b',' if depth == 0 && bytes.get(i + 1) == Some(&b' ') => {
                out.push(raw[start..i].trim());
                start = i + 2;
                i += 1;
            }
            _ => {}
        }
        i += 1;
    }
    out.push(raw[start..].trim());
    out.retain(|s| !s.is_empty());
    out
}

fn marker_value(seg: &str, marker: char) -> Option<&str> {
    let rest = seg.strip_prefix(marker)?;
    (!rest.is_empty() && rest.chars().all(|c| c.is_ascii_alphanumeric())).then_some(rest)
}

fn parse_dois(value: &str) -> Vec<String> {
    let value = value.trim();
    let inner = match value.strip_prefix('[') {
        Some(v) => v.strip_suffix(']').unwrap_or(v),
        None => value,
    };
    inner
        .split(',')
        .map(strip_annotations)
        .map(|d| d.to_lowercase())
        .filter(|d| d.contains('/'))
        .collect()
}

/// Drops parenthesised annotations such as `(I)` and surrounding space.
fn strip_annotations(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join("")
}

fn join_nonempty(parts: &[&str]) -> Option<String> {
    (!parts.is_empty()).then(|| parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_RECORDS: &str = "FN Clarivate Analytics Web of Science\nVR 1.0\n\
PT J\nAU Smith, A\nPY 2011\n\
CR Hirsch JE, 2005, P NATL ACAD SCI USA, V102, P16569, DOI 10.1073/pnas.0507655102\n   Egghe L, 2006, SCIENTOMETRICS, V69, P131\n\
UT WOS:000001\nER\n\
PT J\nPY 2012\nER\nEF\n";

    #[test]
    fn two_record_file() {
        let parsed = parse_wos_file(TWO_RECORDS.as_bytes()).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert!(parsed.diagnostics.is_empty());
        let first = &parsed.records[0];
        assert_eq!(first.py, Some(2011));
        assert_eq!(first.record_id, "WOS:000001");
        assert_eq!(
            first.raw_cr_lines,
            vec![
                "Hirsch JE, 2005, P NATL ACAD SCI USA, V102, P16569, DOI 10.1073/pnas.0507655102",
                "Egghe L, 2006, SCIENTOMETRICS, V69, P131"
            ]
        );
        assert_eq!(parsed.records[1].record_id, "#2");
        assert!(parsed.records[1].raw_cr_lines.is_empty());
    }

    #[test]
    fn crlf_and_bom() {
        let crlf = format!("\u{FEFF}{}", TWO_RECORDS.replace('\n', "\r\n"));
        let parsed = parse_wos_file(crlf.as_bytes()).unwrap();
        assert_eq!(parsed, parse_wos_file(TWO_RECORDS.as_bytes()).unwrap());
    }

    #[test]
    fn header_only_file() {
        let parsed = parse_wos_file(b"FN Clarivate\nVR 1.0\nEF\n").unwrap();
        assert!(parsed.records.is_empty());
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn unparseable_year_degrades() {
        let parsed = parse_wos_file(b"PT J\nPY abcd\nER\nEF\n").unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].py, None);
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(parsed.diagnostics[0].line, 2);
    }

    #[test]
    fn er_without_pt_is_collected() {
        let parsed = parse_wos_file(b"ER\nPT J\nPY 2001\nER\n").unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.diagnostics.len(), 1);
    }

    #[test]
    fn stops_at_ef() {
        let parsed = parse_wos_file(b"PT J\nER\nEF\nPT J\nER\n").unwrap();
        assert_eq!(parsed.records.len(), 1);
    }

    #[test]
    fn invalid_utf8_names_offset() {
        let err = parse_wos_file(b"PT J\nCR ab\xFF\n").unwrap_err();
        assert_eq!(err, FormatError::InvalidUtf8 { offset: 10 });
        let err = parse_wos_file(b"\xEF\xBB\xBFPT\xC0").unwrap_err();
        assert_eq!(err, FormatError::InvalidUtf8 { offset: 5 });
    }

    #[test]
    fn humanised_reference() {
        let r = parse_cited_reference("Hirsch, J. E., 2005, PNAS USA, V102, P16569, DOI 10.1073/pnas.0507655102");
        assert_eq!(r.first_author.as_deref(), Some("Hirsch, J. E."));
        assert_eq!(r.rpy, Some(2005));
        assert_eq!(r.source.as_deref(), Some("PNAS USA"));
        assert_eq!(r.volume.as_deref(), Some("102"));
        assert_eq!(r.page.as_deref(), Some("16569"));
        assert_eq!(r.dois, vec!["10.1073/pnas.0507655102"]);
    }

    #[test]
    fn non_source_reference() {
        let r = parse_cited_reference("Priem, J., 2010, Altmetrics Manifesto");
        assert_eq!(r.first_author.as_deref(), Some("Priem, J."));
        assert_eq!(r.rpy, Some(2010));
        assert_eq!(r.source.as_deref(), Some("Altmetrics Manifesto"));
        assert_eq!((r.volume, r.page), (None, None));
        assert!(r.dois.is_empty());
    }

    #[test]
    fn bracketed_doi_list() {
        let r = parse_cited_reference(
            "Newman, M. E. J., 2004, Phys. Rev. E, V69, DOI [10.1103/PhysRevE.69.026113, 10.1103/PhysRevE.69.066133]",
        );
        assert_eq!(r.volume.as_deref(), Some("69"));
        assert_eq!(
            r.dois,
            vec!["10.1103/physreve.69.026113", "10.1103/physreve.69.066133"]
        );
        let r = parse_cited_reference("Newman MEJ, 2004, PHYS REV E, V69, DOI [(I) 10.1103/PhysRevE.69.026113, 10.1103/PhysRevE.69.066133]");
        assert_eq!(r.dois[0], "10.1103/physreve.69.026113");
        assert_eq!(r.dois.len(), 2);
    }

    #[test]
    fn markers_are_case_sensitive() {
        let r = parse_cited_reference("Doe J, 1999, v12 journal, doi 10.1/x");
        assert_eq!(r.source.as_deref(), Some("v12 journal, doi 10.1/x"));
        assert!(r.volume.is_none());
        assert!(r.dois.is_empty());
    }

    #[test]
    fn no_year_keeps_raw() {
        let r = parse_cited_reference("[Anonymous], NATURE");
        assert_eq!(r.rpy, None);
        assert_eq!(r.first_author.as_deref(), Some("[Anonymous]"));
        assert_eq!(r.source.as_deref(), Some("NATURE"));
        assert_eq!(r.raw, "[Anonymous], NATURE");
    }

    #[test]
    fn markers_before_source_end_it() {
        let r = parse_cited_reference("Egghe L, 2006, SCIENTOMETRICS, V69, P131, EXTRA");
        assert_eq!(r.source.as_deref(), Some("SCIENTOMETRICS"));
        assert_eq!(r.page.as_deref(), Some("131"));
    }
}
