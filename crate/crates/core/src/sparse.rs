//! Compressed sparse row storage for the assembled systems.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    /// Sums duplicate entries; drops nothing else.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for r in 0..nrows {
            counts[r + 1] += counts[r];
        }
        let mut order = vec![(0u32, 0.0); triplets.len()];
        let mut next = counts.clone();
        for &(r, c, v) in triplets {
            order[next[r]] = (c as u32, v);
            next[r] += 1;
        }
        let mut b = CsrBuilder::new(ncols);
        for r in 0..nrows {
            let row = &mut order[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            b.push_row(merged);
        }
        b.finish()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[s.clone()]
            .iter()
            .zip(&self.values[s])
            .map(|(c, v)| (*c as usize, *v))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let s = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[s.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.values[s.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|r| self.get(r, r))
            .collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        for (r, out) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k] as usize];
            }
            *out = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// `y += Aᵀ x`.
    pub fn transpose_matvec_add(&self, x: &[f64], y: &mut [f64]) {
        for (r, xr) in x.iter().enumerate().take(self.nrows) {
            if *xr == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k] as usize] += self.values[k] * xr;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    /// Largest `|A − Aᵀ|` entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let mut m = faer::Mat::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn to_faer(&self) -> Result<faer::sparse::SparseColMat<usize, f64>> {
        // CSR of A is CSC of Aᵀ; callers pass symmetric matrices
        let t: Vec<faer::sparse::Triplet<usize, usize, f64>> = (0..self.nrows)
            .flat_map(|r| {
                self.row(r)
                    .map(move |(c, v)| faer::sparse::Triplet::new(r, c, v))
            })
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::Config(format!("sparse conversion: {e:?}")))
    }

    /// `row col value` lines, one-based indices.
    pub fn write_coordinate(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "% {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Appends rows in order.
#[derive(Debug)]
pub struct CsrBuilder {
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrBuilder {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Entries must have increasing columns.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (u32, f64)>) {
        for (c, v) in entries {
            self.col_idx.push(c);
            self.values.push(v);
        }
        self.row_ptr.push(self.col_idx.len());
    }

    pub fn finish(self) -> CsrMatrix {
        CsrMatrix {
            nrows: self.row_ptr.len() - 1,
            ncols: self.ncols,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            values: self.values,
        }
    }
}
