//! Compressed-row sparse matrices with the handful of operations the
//! operator assembly needs: Kronecker products, block stacking, products and
//! forward substitution.
//!
//! Matrices are always finalized: column indices within a row are sorted,
//! duplicates have been summed and explicit zeros dropped.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use crate::error::{FdecError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` triplets before finalization.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    /// Panics if the index is out of bounds.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            row < self.nrows && col < self.ncols,
            "triplet ({row}, {col}) outside {}x{}",
            self.nrows,
            self.ncols
        );
        self.entries.push((row, col, value));
    }

    /// Sorts, sums duplicates and drops entries that end up exactly zero.
    pub fn finalize(mut self) -> SparseMatrix {
        self.entries
            .sort_unstable_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut rows = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            values.push(v);
        }
        let mut k = 0;
        for i in 0..rows.len() {
            if values[i] != 0.0 {
                rows[k] = rows[i];
                indices[k] = indices[i];
                values[k] = values[i];
                k += 1;
            }
        }
        rows.truncate(k);
        indices.truncate(k);
        values.truncate(k);
        for &r in &rows {
            indptr[r + 1] += 1;
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Square diagonal matrix. Zero entries are not stored.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut b = TripletBuilder::with_capacity(diag.len(), diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            b.push(i, i, d);
        }
        b.finalize()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut b = TripletBuilder::new(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(FdecError::DimensionMismatch {
                    op: "from_dense",
                    lhs: (nrows, ncols),
                    rhs: (i, row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                b.push(i, j, v);
            }
        }
        Ok(b.finalize())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.triplets() {
            b.push(j, i, v);
        }
        b.finalize()
    }

    pub fn scale(&self, s: f64) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for (i, j, v) in self.triplets() {
            b.push(i, j, v * s);
        }
        b.finalize()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(FdecError::DimensionMismatch {
                op: "mul_vec",
                lhs: self.shape(),
                rhs: (x.len(), 1),
            });
        }
        Ok((0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    /// Largest absolute entrywise difference; shapes must agree.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(FdecError::DimensionMismatch {
                op: "max_abs_diff",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (i, j, v) in self.triplets() {
            b.push(i, j, v);
        }
        for (i, j, v) in other.triplets() {
            b.push(i, j, -v);
        }
        Ok(b.finalize().values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.triplets().all(|(i, j, _)| j <= i)
    }

    /// Lower triangular, square, with every diagonal entry stored and > 0.
    pub fn check_lower_triangular_positive(&self) -> Result<()> {
        if self.nrows != self.ncols {
            return Err(FdecError::DimensionMismatch {
                op: "triangular check",
                lhs: self.shape(),
                rhs: (self.ncols, self.nrows),
            });
        }
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            if let Some(&j) = cols.last() {
                if j > i {
                    return Err(FdecError::NotTriangular { row: i, col: j });
                }
            }
            let d = match cols.last() {
                Some(&j) if j == i => vals[vals.len() - 1],
                _ => 0.0,
            };
            if !(d > 0.0) {
                return Err(FdecError::Singular { row: i, value: d });
            }
        }
        Ok(())
    }
}

/// Standard Kronecker product `A ⊗ B`.
pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    let nrows = a
        .nrows
        .checked_mul(b.nrows)
        .ok_or(FdecError::Overflow("kron rows"))?;
    let ncols = a
        .ncols
        .checked_mul(b.ncols)
        .ok_or(FdecError::Overflow("kron cols"))?;
    let nnz = a
        .nnz()
        .checked_mul(b.nnz())
        .ok_or(FdecError::Overflow("kron nnz"))?;
    // Rows of the product come out already sorted, so build CSR directly.
    let mut indptr = Vec::with_capacity(nrows + 1);
    let mut indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    indptr.push(0);
    for ia in 0..a.nrows {
        let (ca, va) = a.row(ia);
        for ib in 0..b.nrows {
            let (cb, vb) = b.row(ib);
            for (&ja, &x) in ca.iter().zip(va) {
                for (&jb, &y) in cb.iter().zip(vb) {
                    let v = x * y;
                    if v != 0.0 {
                        indices.push(ja * b.ncols + jb);
                        values.push(v);
                    }
                }
            }
            indptr.push(indices.len());
        }
    }
    Ok(SparseMatrix {
        nrows,
        ncols,
        indptr,
        indices,
        values,
    })
}

/// Kronecker product of a sequence, left to right.
pub fn kron_all(factors: &[&SparseMatrix]) -> Result<SparseMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| FdecError::InvalidArgument("kron of zero factors".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, f| kron(&acc, f))
}

pub fn matmul(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    if a.ncols != b.nrows {
        return Err(FdecError::DimensionMismatch {
            op: "matmul",
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }
    // Gustavson's row-by-row product with a dense accumulator.
    let mut acc = vec![0.0f64; b.ncols];
    let mut marker = vec![usize::MAX; b.ncols];
    let mut touched: Vec<usize> = Vec::new();
    let mut indptr = Vec::with_capacity(a.nrows + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for i in 0..a.nrows {
        touched.clear();
        let (ca, va) = a.row(i);
        for (&k, &x) in ca.iter().zip(va) {
            let (cb, vb) = b.row(k);
            for (&j, &y) in cb.iter().zip(vb) {
                if marker[j] != i {
                    marker[j] = i;
                    acc[j] = 0.0;
                    touched.push(j);
                }
                acc[j] += x * y;
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            if acc[j] != 0.0 {
                indices.push(j);
                values.push(acc[j]);
            }
        }
        indptr.push(indices.len());
    }
    Ok(SparseMatrix {
        nrows: a.nrows,
        ncols: b.ncols,
        indptr,
        indices,
        values,
    })
}

pub fn block_diag(blocks: &[&SparseMatrix]) -> SparseMatrix {
    let nrows = blocks.iter().map(|m| m.nrows).sum();
    let ncols = blocks.iter().map(|m| m.ncols).sum();
    let mut indptr = Vec::with_capacity(nrows + 1);
    let mut indices = Vec::with_capacity(blocks.iter().map(|m| m.nnz()).sum());
    let mut values = Vec::with_capacity(indices.capacity());
    indptr.push(0);
    let mut col_off = 0;
    for m in blocks {
        for i in 0..m.nrows {
            let (c, v) = m.row(i);
            indices.extend(c.iter().map(|&j| j + col_off));
            values.extend_from_slice(v);
            indptr.push(indices.len());
        }
        col_off += m.ncols;
    }
    SparseMatrix {
        nrows,
        ncols,
        indptr,
        indices,
        values,
    }
}

pub fn vstack(blocks: &[&SparseMatrix]) -> Result<SparseMatrix> {
    let ncols = blocks.first().map_or(0, |m| m.ncols);
    if let Some(bad) = blocks.iter().find(|m| m.ncols != ncols) {
        return Err(FdecError::DimensionMismatch {
            op: "vstack",
            lhs: (0, ncols),
            rhs: bad.shape(),
        });
    }
    let mut out = SparseMatrix::zeros(0, ncols);
    for m in blocks {
        let off = out.indices.len();
        out.indices.extend_from_slice(&m.indices);
        out.values.extend_from_slice(&m.values);
        out.indptr.extend(m.indptr[1..].iter().map(|&p| p + off));
        out.nrows += m.nrows;
    }
    Ok(out)
}

/// Computes `A · diag(d)^{-1}`.
pub fn scale_cols_by_inverse_diagonal(a: &SparseMatrix, d: &[f64]) -> Result<SparseMatrix> {
    if d.len() != a.ncols {
        return Err(FdecError::DimensionMismatch {
            op: "scale_cols_by_inverse_diagonal",
            lhs: a.shape(),
            rhs: (d.len(), d.len()),
        });
    }
    if let Some((index, &value)) = d.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(FdecError::ZeroDiagonal { index, value });
    }
    let mut out = a.clone();
    for (v, &j) in out.values.iter_mut().zip(&out.indices) {
        *v /= d[j];
    }
    Ok(out)
}

/// Forward substitution for `L x = b`.
pub fn lower_triangular_solve(l: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if l.nrows != l.ncols || b.len() != l.nrows {
        return Err(FdecError::DimensionMismatch {
            op: "lower_triangular_solve",
            lhs: l.shape(),
            rhs: (b.len(), 1),
        });
    }
    let mut x = vec![0.0; b.len()];
    for i in 0..l.nrows {
        let (cols, vals) = l.row(i);
        let mut s = b[i];
        let mut diag = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j < i {
                s -= v * x[j];
            } else if j == i {
                diag = v;
            } else {
                return Err(FdecError::NotTriangular { row: i, col: j });
            }
        }
        if !(diag > 0.0) {
            return Err(FdecError::Singular { row: i, value: diag });
        }
        x[i] = s / diag;
    }
    Ok(x)
}

/// Writes `row,col,value` triplets with a one-line header. Values use 17
/// significant digits so the file round-trips exactly.
pub fn to_triplet_csv(m: &SparseMatrix) -> String {
    let mut s = String::with_capacity(32 * m.nnz() + 16);
    s.push_str("row,col,value\n");
    for (i, j, v) in m.triplets() {
        let _ = writeln!(s, "{i},{j},{v:.16e}");
    }
    s
}

/// Parses the triplet CSV format. The shape must be supplied because the
/// format does not record trailing empty rows or columns.
pub fn from_triplet_csv<R: Read>(reader: R, nrows: usize, ncols: usize) -> Result<SparseMatrix> {
    let mut b = TripletBuilder::new(nrows, ncols);
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| FdecError::Parse(format!("line {}: {e}", lineno + 1)))?;
        let line = line.trim();
        if lineno == 0 {
            if line != "row,col,value" {
                return Err(FdecError::Parse(format!("unexpected header '{line}'")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(FdecError::Parse(format!("line {}: expected 3 fields", lineno + 1)));
        }
        let bad = |what: &str| FdecError::Parse(format!("line {}: bad {what}", lineno + 1));
        let i: usize = parts[0].parse().map_err(|_| bad("row"))?;
        let j: usize = parts[1].parse().map_err(|_| bad("col"))?;
        let v: f64 = parts[2].parse().map_err(|_| bad("value"))?;
        if i >= nrows || j >= ncols {
            return Err(FdecError::Parse(format!(
                "line {}: ({i}, {j}) outside {nrows}x{ncols}",
                lineno + 1
            )));
        }
        b.push(i, j, v);
    }
    Ok(b.finalize())
}
