//! Plain-text probe and placement files.
//!
//! Probe files: `#` comment lines and blank lines are ignored; the first
//! data line is `<dim> <probelength>`, followed by exactly `dim²` lines, one
//! uppercase `ACGT` sequence each.
//!
//! Placement files: `dim` lines of `dim` space-separated 1-based probe ids,
//! with the same comment rules.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{BlmpError, Result};
use crate::placement::Placement;
use crate::probe::{Probe, ProbeId, ProbeSet};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn last_line(text: &str) -> usize {
    text.lines().count()
}

pub fn parse_probes(text: &str) -> Result<ProbeSet> {
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| {
        BlmpError::parse(last_line(text) + 1, "missing `<dim> <probelength>` header")
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_pos = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(|| {
            BlmpError::parse(
                hline,
                format!("{what} must be a positive integer, got {s:?}"),
            )
        })
    };
    let [dim, len] = fields[..] else {
        return Err(BlmpError::parse(
            hline,
            format!("header must be `<dim> <probelength>`, got {header:?}"),
        ));
    };
    let dim = parse_pos(dim, "dim")?;
    let len = parse_pos(len, "probelength")?;
    let expected = dim * dim;

    let mut probes = Vec::with_capacity(expected);
    for (line, seq) in lines {
        if probes.len() == expected {
            return Err(BlmpError::parse(
                line,
                format!("more than the {expected} probes declared for dim={dim}"),
            ));
        }
        let probe: Probe = seq.parse().map_err(|e: BlmpError| {
            BlmpError::parse(line, format!("probe {}: {e}", probes.len() + 1))
        })?;
        if probe.len() != len {
            return Err(BlmpError::parse(
                line,
                format!(
                    "probe {} has length {}, expected {len}",
                    probes.len() + 1,
                    probe.len()
                ),
            ));
        }
        probes.push(probe);
    }
    if probes.len() < expected {
        return Err(BlmpError::parse(
            last_line(text) + 1,
            format!(
                "expected {expected} probes for dim={dim}, found {} ({} missing)",
                probes.len(),
                expected - probes.len()
            ),
        ));
    }
    ProbeSet::new(dim, probes)
}

pub fn format_probes(sp: &ProbeSet) -> String {
    let mut out = format!("{} {}\n", sp.dim(), sp.probe_length());
    for p in sp.probes() {
        writeln!(out, "{p}").expect("writing to a String");
    }
    out
}

pub fn parse_placement(text: &str, sp: &ProbeSet) -> Result<Placement> {
    let dim = sp.dim();
    let n = sp.len();
    let mut grid = Vec::with_capacity(n);
    let mut seen = vec![0usize; n];
    let mut rows = 0;
    for (line, row) in data_lines(text) {
        rows += 1;
        if rows > dim {
            return Err(BlmpError::parse(line, format!("more than {dim} rows")));
        }
        let ids: Vec<&str> = row.split_whitespace().collect();
        if ids.len() != dim {
            return Err(BlmpError::parse(
                line,
                format!("row has {} entries, expected {dim}", ids.len()),
            ));
        }
        for tok in ids {
            let id: usize = tok
                .parse()
                .map_err(|_| BlmpError::parse(line, format!("not a probe index: {tok:?}")))?;
            if id == 0 || id > n {
                return Err(BlmpError::parse(
                    line,
                    format!("probe index {id} out of range 1..={n}"),
                ));
            }
            if seen[id - 1] != 0 {
                return Err(BlmpError::parse(
                    line,
                    format!(
                        "duplicate probe index {id} (first on line {})",
                        seen[id - 1]
                    ),
                ));
            }
            seen[id - 1] = line;
            grid.push(ProbeId::new(id as u32));
        }
    }
    if rows < dim {
        return Err(BlmpError::parse(
            last_line(text) + 1,
            format!("expected {dim} rows, found {rows}"),
        ));
    }
    Placement::from_grid(dim, grid)
}

pub fn format_placement(pl: &Placement) -> String {
    let mut out = String::new();
    for row in pl.rows() {
        let cells: Vec<String> = row.iter().map(|p| p.get().to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| BlmpError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| BlmpError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_probes_file(path: impl AsRef<Path>) -> Result<ProbeSet> {
    let path = path.as_ref();
    parse_probes(&read(path)?).map_err(|e| e.with_path(path))
}

pub fn write_probes_file(sp: &ProbeSet, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &format_probes(sp))
}

pub fn read_placement_file(path: impl AsRef<Path>, sp: &ProbeSet) -> Result<Placement> {
    let path = path.as_ref();
    parse_placement(&read(path)?, sp).map_err(|e| e.with_path(path))
}

pub fn write_placement_file(pl: &Placement, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &format_placement(pl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_probes;
    use crate::oracle::generate_probeset;
    use crate::placement::random_placement;
    use crate::rng::stream;

    fn line_of(e: BlmpError) -> usize {
        match e {
            BlmpError::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn probes_round_trip() {
        let sp = generate_probeset(5, 25, 3).unwrap();
        assert_eq!(parse_probes(&format_probes(&sp)).unwrap(), sp);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# two by two\n2 3\n\nACG\n# mid\nTTT\nAAA\nCCC\n";
        let sp = parse_probes(text).unwrap();
        assert_eq!(sp.dim(), 2);
        assert_eq!(sp.probe(ProbeId::new(2)).to_string(), "TTT");
    }

    #[test]
    fn probe_count_deficit() {
        let mut text = format_probes(&example_probes());
        text = text.lines().take(16).collect::<Vec<_>>().join("\n");
        let err = parse_probes(&text).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("found 15") && msg.contains("1 missing"),
            "{msg}"
        );
    }

    #[test]
    fn probe_errors_carry_line_numbers() {
        assert_eq!(line_of(parse_probes("# c\n2\nA\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_probes("x 3\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_probes("1 3\nACGT\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_probes("1 3\nACN\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_probes("1 3\nACG\nACG\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_probes("").unwrap_err()), 1);
    }

    #[test]
    fn placement_round_trip_and_errors() {
        let sp = example_probes();
        let pl = random_placement(&sp, &mut stream(5, 1));
        assert_eq!(parse_placement(&format_placement(&pl), &sp).unwrap(), pl);

        let bad = "1 2 3 4\n5 6 7 8\n9 10 11 12\n13 14 15 17\n";
        let e = parse_placement(bad, &sp).unwrap_err();
        assert!(e.to_string().contains("out of range"), "{e}");
        assert_eq!(line_of(e), 4);

        let dup = "1 2 3 4\n5 6 7 8\n9 10 11 12\n13 14 15 1\n";
        assert!(parse_placement(dup, &sp)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));

        let short = "1 2 3 4\n5 6 7 8\n9 10 11 12\n";
        assert!(parse_placement(short, &sp).is_err());
        let ragged = "1 2 3 4\n5 6 7 8\n9 10 11 12\n13 14 15\n";
        assert!(parse_placement(ragged, &sp).is_err());
    }
}
