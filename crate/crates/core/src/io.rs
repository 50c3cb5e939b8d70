//! Flat-file formats: subset files, point lines, and MatrixMarket exports.
//!
//! Subset file layout:
//!
//! ```text
//! q 3 model pw-v1
//! 0
//! 5
//! 17
//! ```
//!
//! The header names q and the model version; the body is one 0-based index
//! into the canonical sorted point list of X per line. A set may instead open
//! with the literal sentinel `coords`, after which each line carries the six
//! base-p-encoded coordinates of a normalized point of X. Lines starting
//! with `#` are comments. A file may carry several sets, separated by blank
//! lines.

use crate::geometry::QuadraticSpace;
use crate::intriguing::PointSubset;
use crate::scheme::SchemeInstance;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Invalid { line: usize, msg: String },
    #[error("missing header line `q <value> model pw-v1`")]
    MissingHeader,
    #[error("header names q = {got}, expected q = {expected}")]
    WrongField { got: u32, expected: u32 },
}

fn invalid(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Invalid {
        line,
        msg: msg.into(),
    }
}

/// Renders a subset file with the canonical header.
pub fn format_subset(q: u32, set: &PointSubset) -> String {
    let mut out = String::new();
    writeln!(out, "q {q} model pw-v1").unwrap();
    for i in set.indices() {
        writeln!(out, "{i}").unwrap();
    }
    out
}

pub fn write_subset(path: &Path, q: u32, set: &PointSubset) -> io::Result<()> {
    fs::write(path, format_subset(q, set))
}

/// Renders several subsets into one stream, blank-line separated.
pub fn format_subset_stream(q: u32, sets: &[PointSubset]) -> String {
    let mut out = String::new();
    writeln!(out, "q {q} model pw-v1").unwrap();
    for (k, set) in sets.iter().enumerate() {
        if k > 0 {
            writeln!(out).unwrap();
        }
        for i in set.indices() {
            writeln!(out, "{i}").unwrap();
        }
    }
    out
}

/// Parses one or more subsets of X from the flat format. Every index is
/// range-checked and every coordinate line must be a normalized point of X.
pub fn parse_subsets(text: &str, space: &QuadraticSpace) -> Result<Vec<PointSubset>, ParseError> {
    let n = space.x_points().len();
    let mut lines = text.lines().enumerate().peekable();

    // header
    let mut header = None;
    for (idx, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        header = Some((idx + 1, line.to_string()));
        break;
    }
    let (hline, header) = header.ok_or(ParseError::MissingHeader)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "q" || parts[2] != "model" || parts[3] != "pw-v1" {
        return Err(invalid(hline, "expected header `q <value> model pw-v1`"));
    }
    let q: u32 = parts[1]
        .parse()
        .map_err(|_| invalid(hline, "q is not an integer"))?;
    if q != space.q() {
        return Err(ParseError::WrongField {
            got: q,
            expected: space.q(),
        });
    }

    let mut sets = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    let mut in_set = false;
    let mut coords_mode = false;
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if in_set {
                sets.push((lineno, std::mem::take(&mut current)));
                in_set = false;
                coords_mode = false;
            }
            continue;
        }
        if line == "coords" {
            if in_set {
                return Err(invalid(lineno, "`coords` sentinel must open a set"));
            }
            in_set = true;
            coords_mode = true;
            continue;
        }
        in_set = true;
        if coords_mode {
            let codes: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|_| invalid(lineno, "bad coordinate")))
                .collect::<Result<_, _>>()?;
            if codes.len() != 6 {
                return Err(invalid(lineno, "a point line carries six coordinates"));
            }
            let arr: [u32; 6] = codes.try_into().unwrap();
            let point = space
                .point_from_codes(arr)
                .map_err(|e| invalid(lineno, e.to_string()))?;
            if *point.coords() != arr {
                return Err(invalid(lineno, "point is not in normalized form"));
            }
            let x = space
                .x_index(&point)
                .ok_or_else(|| invalid(lineno, "point is not in X = Q \\ H"))?;
            current.push(x as u32);
        } else {
            let i: u32 = line
                .parse()
                .map_err(|_| invalid(lineno, "expected a point index"))?;
            if i as usize >= n {
                return Err(invalid(
                    lineno,
                    format!("index {i} out of range for |X| = {n}"),
                ));
            }
            current.push(i);
        }
    }
    if in_set {
        sets.push((0, current));
    }
    if sets.is_empty() {
        // a header-only file denotes the empty subset
        sets.push((0, Vec::new()));
    }

    sets.into_iter()
        .map(|(lineno, idx)| {
            PointSubset::from_indices(n, idx)
                .map_err(|e| invalid(lineno, e.to_string()))
        })
        .collect()
}

/// Parses exactly one subset; errors if the file holds none or several.
pub fn parse_single_subset(
    text: &str,
    space: &QuadraticSpace,
) -> Result<PointSubset, ParseError> {
    let mut sets = parse_subsets(text, space)?;
    match sets.len() {
        1 => Ok(sets.pop().unwrap()),
        0 => Err(invalid(0, "file contains no subset")),
        k => Err(invalid(0, format!("file contains {k} subsets, expected one"))),
    }
}

fn write_matrix_market<F>(path: &Path, n: usize, mut entry: F) -> io::Result<()>
where
    F: FnMut(usize, usize) -> i64,
{
    let mut triples = Vec::new();
    for u in 0..n {
        for w in 0..=u {
            let v = entry(u, w);
            if v != 0 {
                triples.push((u + 1, w + 1, v));
            }
        }
    }
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix coordinate integer symmetric")?;
    writeln!(f, "{} {} {}", n, n, triples.len())?;
    for (i, j, v) in triples {
        writeln!(f, "{i} {j} {v}")?;
    }
    f.flush()
}

/// Exports the relation matrices A0..A4 and the scaled idempotents E1s..E4s
/// in MatrixMarket coordinate format (lower triangle of each symmetric
/// matrix).
pub fn export_matrices(scheme: &SchemeInstance, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let n = scheme.n();
    for i in 0..5 {
        write_matrix_market(&dir.join(format!("A{i}")), n, |u, w| {
            i64::from(scheme.adjacency(i).get(u, w))
        })?;
    }
    for j in 1..5 {
        write_matrix_market(&dir.join(format!("E{j}s")), n, |u, w| {
            scheme.e_scaled(j, u, w)
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::field_build;

    fn space() -> QuadraticSpace {
        QuadraticSpace::build(field_build(3, 1).unwrap()).unwrap()
    }

    #[test]
    fn subset_round_trip() {
        let sp = space();
        let set = PointSubset::from_indices(72, [0, 7, 44, 71]).unwrap();
        let text = format_subset(3, &set);
        let parsed = parse_single_subset(&text, &sp).unwrap();
        assert_eq!(parsed, set);
    }

    #[test]
    fn stream_round_trip() {
        let sp = space();
        let a = PointSubset::from_indices(72, [0, 1]).unwrap();
        let b = PointSubset::from_indices(72, [3]).unwrap();
        let text = format_subset_stream(3, &[a.clone(), b.clone()]);
        let parsed = parse_subsets(&text, &sp).unwrap();
        assert_eq!(parsed, vec![a, b]);
    }

    #[test]
    fn coords_mode() {
        let sp = space();
        let p = sp.x_points()[10];
        let text = format!("q 3 model pw-v1\ncoords\n{p}\n");
        let parsed = parse_single_subset(&text, &sp).unwrap();
        assert_eq!(parsed.indices(), vec![10]);
    }

    #[test]
    fn parse_errors() {
        let sp = space();
        assert!(matches!(
            parse_subsets("q 4 model pw-v1\n1\n", &sp),
            Err(ParseError::WrongField { got: 4, expected: 3 })
        ));
        assert!(matches!(
            parse_subsets("q 3 model pw-v1\n99\n", &sp),
            Err(ParseError::Invalid { line: 2, .. })
        ));
        assert!(matches!(
            parse_subsets("q 3 model pw-v1\nabc\n", &sp),
            Err(ParseError::Invalid { .. })
        ));
        assert!(matches!(
            parse_subsets("# only a comment\n", &sp),
            Err(ParseError::MissingHeader)
        ));
        // non-normalized coordinates are rejected
        assert!(matches!(
            parse_subsets("q 3 model pw-v1\ncoords\n2 2 0 0 0 0\n", &sp),
            Err(ParseError::Invalid { .. })
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_tolerated() {
        let sp = space();
        let text = "# header comment\n\nq 3 model pw-v1\n# body comment\n5\n6\n";
        let parsed = parse_subsets(text, &sp).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].indices(), vec![5, 6]);
    }

    #[test]
    fn matrix_export_shape() {
        let scheme = crate::scheme::build_scheme_for_q(3, 1).unwrap();
        let dir = std::env::temp_dir().join("pwscheme_test_export");
        export_matrices(&scheme, &dir).unwrap();
        let a0 = fs::read_to_string(dir.join("A0")).unwrap();
        let mut lines = a0.lines();
        assert_eq!(
            lines.next().unwrap(),
            "%%MatrixMarket matrix coordinate integer symmetric"
        );
        assert_eq!(lines.next().unwrap(), "72 72 72"); // identity: 72 diagonal entries
        let e1 = fs::read_to_string(dir.join("E1s")).unwrap();
        assert!(e1.lines().count() > 2);
        fs::remove_dir_all(&dir).unwrap();
    }
}
