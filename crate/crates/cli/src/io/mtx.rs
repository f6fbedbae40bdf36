//! MatrixMarket coordinate format (`real`/`integer`, `general`/`symmetric`).

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use orderbound::SparseMatrix;

pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines();
    let banner = lines.next().context("empty MatrixMarket file")?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    ensure!(
        fields.len() == 5 && fields[0] == "%%matrixmarket" && fields[1] == "matrix" && fields[2] == "coordinate",
        "expected a '%%MatrixMarket matrix coordinate' banner, found {banner:?}"
    );
    ensure!(matches!(fields[3].as_str(), "real" | "integer"), "unsupported field type {:?}", fields[3]);
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => bail!("unsupported symmetry {other:?}"),
    };

    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size = body.next().context("missing size line")?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad size line {size:?}"))?;
    ensure!(dims.len() == 3, "size line needs 'rows cols nnz', found {size:?}");
    let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);

    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    for (k, line) in body.enumerate() {
        let mut it = line.split_whitespace();
        let (Some(r), Some(c), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
            bail!("entry {} is not 'row col value': {line:?}", k + 1);
        };
        let r: usize = r.parse().with_context(|| format!("bad row index in {line:?}"))?;
        let c: usize = c.parse().with_context(|| format!("bad column index in {line:?}"))?;
        let v: f64 = v.parse().with_context(|| format!("bad value in {line:?}"))?;
        ensure!(r >= 1 && c >= 1, "MatrixMarket indices are 1-based, found ({r}, {c})");
        triplets.push((r - 1, c - 1, v));
        if symmetric && r != c {
            triplets.push((c - 1, r - 1, v));
        }
    }
    let stored = if symmetric { triplets.iter().filter(|t| t.0 >= t.1).count() } else { triplets.len() };
    ensure!(stored == nnz, "header declares {nnz} entries, found {stored}");
    Ok(SparseMatrix::from_triplets(nrows, ncols, triplets)?)
}

/// Writes every stored entry, explicit zeros included, with round-trip precision.
pub fn format_matrix_market(a: &SparseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (r, c, v) in a.triplets() {
        let _ = writeln!(out, "{} {} {:e}", r + 1, c + 1, v);
    }
    out
}

pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix_market(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_matrix_market(path: &Path, a: &SparseMatrix) -> Result<()> {
    std::fs::write(path, format_matrix_market(a)).with_context(|| format!("writing {}", path.display()))
}
