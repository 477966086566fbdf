use rayon::prelude::*;

use super::LinalgError;

/// Square matrix in compressed sparse row form. Column indices are strictly
/// increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_offsets: (0..=dim).collect(),
            col_indices: (0..dim).collect(),
            values: vec![1.0; dim],
        }
    }

    /// Builds the matrix from per-row entry lists. Duplicate columns are
    /// summed; exact zeros off the diagonal are dropped.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self, LinalgError> {
        if rows.len() != dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        let mut row_offsets = Vec::with_capacity(dim + 1);
        let nnz_hint = rows.iter().map(Vec::len).sum();
        let mut col_indices = Vec::with_capacity(nnz_hint);
        let mut values = Vec::with_capacity(nnz_hint);
        row_offsets.push(0);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let start = col_indices.len();
            for (c, v) in row {
                if c >= dim {
                    return Err(LinalgError::IndexOutOfRange { row: r, col: c, dim });
                }
                if col_indices.len() > start && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            // drop explicit off-diagonal zeros
            let mut keep = start;
            for k in start..col_indices.len() {
                if values[k] != 0.0 || col_indices[k] == r {
                    col_indices[keep] = col_indices[k];
                    values[keep] = values[k];
                    keep += 1;
                }
            }
            col_indices.truncate(keep);
            values.truncate(keep);
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            dim,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut rows = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            if r >= dim {
                return Err(LinalgError::IndexOutOfRange { row: r, col: c, dim });
            }
            rows[r].push((c, v));
        }
        Self::from_rows(dim, rows)
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let dim = dense.len();
        let rows = dense
            .iter()
            .map(|row| {
                if row.len() != dim {
                    return Err(LinalgError::DimensionMismatch {
                        expected: dim,
                        found: row.len(),
                    });
                }
                Ok(row.iter().copied().enumerate().collect())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(dim, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Stored value at `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().with_min_len(4096).enumerate().for_each(|(r, out)| {
            let (cols, vals) = self.row(r);
            *out = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        });
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// `y = A^T x`.
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.fill(0.0);
        for (r, &xr) in x.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xr;
            }
        }
    }

    /// Sum of absolute values of row `r`.
    pub fn row_abs_sum(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v.abs()).sum()
    }

    /// Max row absolute sum, `||A||_inf`.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim).map(|r| self.row_abs_sum(r)).fold(0.0, f64::max)
    }

    /// Multiplies row `r` by `scale[r]`.
    pub fn scale_rows(&mut self, scale: &[f64]) {
        assert_eq!(scale.len(), self.dim);
        for (r, &s) in scale.iter().enumerate() {
            let span = self.row_offsets[r]..self.row_offsets[r + 1];
            for v in &mut self.values[span] {
                *v *= s;
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.dim]; self.dim];
        for (r, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        dense
    }

    /// Iterator over stored `(row, col, value)` entries in row order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }
}
