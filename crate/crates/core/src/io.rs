//! Trajectory CSV and kernel-representation text files.
//!
//! Trajectory CSV: one sample per row, `q` comma-separated reals, optional
//! header row (`v1,...,vq`). Kernel files: a first line `p q ell` followed by
//! `ell + 1` blocks of `p` lines with `q` whitespace-separated reals each,
//! block `i` holding `R_i`. Blank lines and `#` comments are ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::behaviors::{KernelRep, Trajectory};
use crate::error::{Error, Result};

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut samples: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(sample) => samples.push(sample),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parse(format!("row {}: {e}", line + 1)));
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Parse("trajectory file has no samples".into()));
    }
    Trajectory::from_samples(&samples).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_trajectory_csv(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Header `v1,...,vq` then one row per sample, floats in round-trip precision.
pub fn trajectory_csv(w: &Trajectory) -> String {
    let header: Vec<String> = (1..=w.q()).map(|i| format!("v{i}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for sample in w.samples() {
        let row: Vec<String> = sample.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_kernel(text: &str) -> Result<KernelRep> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .enumerate()
        .filter(|(_, l)| !l.is_empty());

    let numbers = |(n, line): (usize, &str)| -> Result<Vec<f64>> {
        line.split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: '{tok}' is not a number", n + 1)))
            })
            .collect()
    };

    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("kernel file is empty".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|tok| tok.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("line {}: expected 'p q ell'", n + 1)))?;
    let [p, q, ell] = dims[..] else {
        return Err(Error::Parse(format!("line {}: expected 'p q ell'", n + 1)));
    };

    let mut coeffs = Vec::with_capacity(ell + 1);
    for i in 0..=ell {
        let mut block = Vec::with_capacity(p * q);
        for _ in 0..p {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("R_{i} is truncated")))?;
            let at = line.0;
            let row = numbers(line)?;
            if row.len() != q {
                return Err(Error::Parse(format!(
                    "line {}: expected {q} entries, found {}",
                    at + 1,
                    row.len()
                )));
            }
            block.extend(row);
        }
        coeffs.push(DMatrix::from_row_slice(p, q, &block));
    }
    if let Some((n, _)) = lines.next() {
        return Err(Error::Parse(format!("line {}: unexpected trailing data", n + 1)));
    }
    KernelRep::new(coeffs).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_kernel(path: &Path) -> Result<KernelRep> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_kernel(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Serializes a kernel representation in the format read by [`parse_kernel`].
pub fn kernel_text(r: &KernelRep) -> String {
    let mut out = format!("{} {} {}\n", r.rows(), r.q(), r.degree());
    for c in r.coeffs() {
        for row in c.row_iter() {
            let vals: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&vals.join(" "));
            out.push('\n');
        }
    }
    out
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
