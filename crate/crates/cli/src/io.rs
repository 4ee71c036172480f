//! CSV reading and writing. Every output file starts with a `#`-prefixed
//! metadata block recording the full command configuration, the seed,
//! and the artifact version, so re-running with the same metadata
//! reproduces the data rows bit-exactly (timings excluded). Readers skip
//! metadata lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use plexi_core::{FitnessMatrix, Orientation};

/// Ordered `key = value` pairs serialized as comment lines.
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut meta = Self::default();
        meta.push("command", command);
        meta.push("version", env!("CARGO_PKG_VERSION"));
        meta
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }
}

/// Writes metadata, a header line, and comma-joined data rows.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    metadata: &Metadata,
    header: &str,
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = metadata.render();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path.as_ref(), out)
        .with_context(|| format!("cannot write {}", path.as_ref().display()))?;
    Ok(())
}

fn data_lines(raw: &str) -> impl Iterator<Item = (usize, &str)> {
    raw.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty())
}

/// Reads a fitness matrix: header `case_0..case_{N-1}`, one row per
/// individual, values as decimal literals. Values are taken as already
/// maximize-oriented.
pub fn read_matrix_csv<P: AsRef<Path>>(path: P) -> Result<FitnessMatrix> {
    let path = path.as_ref();
    let raw =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = data_lines(&raw);
    let (_, header) = lines.next().context("matrix file has no header")?;
    let columns: Vec<&str> = header.split(',').collect();
    for (j, name) in columns.iter().enumerate() {
        if name.trim() != format!("case_{j}") {
            bail!(
                "{}: expected header column {} to be case_{j}, found {:?}",
                path.display(),
                j,
                name
            );
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines {
        let row = parse_float_row(line, line_no, path)?;
        if row.len() != columns.len() {
            bail!(
                "{}: row at line {} has {} values, expected {}",
                path.display(),
                line_no,
                row.len(),
                columns.len()
            );
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    FitnessMatrix::from_rows(&rows, Orientation::Maximize)
        .with_context(|| format!("{}: invalid matrix", path.display()))
}

/// Serializes a matrix body (header plus rows) for [`write_csv`].
pub fn matrix_rows(m: &FitnessMatrix) -> (String, Vec<Vec<String>>) {
    let header = (0..m.num_cases())
        .map(|j| format!("case_{j}"))
        .collect::<Vec<_>>()
        .join(",");
    let rows = m
        .rows()
        .map(|r| r.iter().map(|v| v.to_string()).collect())
        .collect();
    (header, rows)
}

/// Reads a regression dataset: header with feature columns followed by a
/// final target column named `y`.
pub fn read_dataset_csv<P: AsRef<Path>>(path: P) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let path = path.as_ref();
    let raw =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = data_lines(&raw);
    let (_, header) = lines.next().context("dataset file has no header")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 {
        bail!(
            "{}: need at least one feature column and the target column",
            path.display()
        );
    }
    if columns.last().map(|c| c.trim()) != Some("y") {
        bail!(
            "{}: last column must be the target column `y`, found {:?}",
            path.display(),
            columns.last().unwrap()
        );
    }
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    for (line_no, line) in lines {
        let mut row = parse_float_row(line, line_no, path)?;
        if row.len() != columns.len() {
            bail!(
                "{}: row at line {} has {} values, expected {}",
                path.display(),
                line_no,
                row.len(),
                columns.len()
            );
        }
        targets.push(row.pop().unwrap());
        features.push(row);
    }
    if features.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok((features, targets))
}

fn parse_float_row(line: &str, line_no: usize, path: &Path) -> Result<Vec<f64>> {
    line.split(',')
        .enumerate()
        .map(|(col, cell)| {
            cell.trim().parse::<f64>().with_context(|| {
                format!(
                    "{}: line {}, column {}: invalid number {:?}",
                    path.display(),
                    line_no,
                    col + 1,
                    cell
                )
            })
        })
        .collect()
}

/// FNV-1a over a parent multiset (order-insensitive); lets determinism
/// checks compare selections without recording every index.
pub fn parent_multiset_hash(parents: &[usize]) -> String {
    let mut sorted = parents.to_vec();
    sorted.sort_unstable();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for idx in sorted {
        for b in (idx as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}
