//! Compressed sparse row matrices over `Complex64`, built from triplets.

use num_complex::Complex64;

use super::dense::ColMat;

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Assemble a square matrix from coordinate triplets; duplicate entries
    /// are summed.
    pub fn from_triplets(n: usize, rows: &[u32], cols: &[u32], vals: &[Complex64]) -> Self {
        assert_eq!(rows.len(), cols.len());
        assert_eq!(rows.len(), vals.len());
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_unstable_by_key(|&k| (rows[k], cols[k]));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        for &k in &order {
            let (r, c, v) = (rows[k], cols[k], vals[k]);
            if !indices.is_empty()
                && indptr[r as usize + 1] > indptr[r as usize]
                && *indices.last().unwrap() == c
                && indptr[r as usize + 1] == indices.len()
            {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r as usize + 1] = indices.len();
            }
        }
        // make indptr cumulative over empty rows as well
        for i in 1..=n {
            if indptr[i] < indptr[i - 1] {
                indptr[i] = indptr[i - 1];
            }
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k] as usize];
            }
            *out = acc;
        }
    }

    /// `y = A x` column by column.
    pub fn matmat(&self, x: &ColMat, y: &mut ColMat) {
        assert_eq!(x.n, self.n);
        assert_eq!(y.n, self.n);
        assert_eq!(x.cols, y.cols);
        for j in 0..x.cols {
            let (xc, yc) = (x.col(j).to_vec(), y.col_mut(j));
            self.matvec(&xc, yc);
        }
    }

    /// Largest deviation from Hermitian symmetry, `max |A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut entries: Vec<(u32, u32, Complex64)> = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                entries.push((i as u32, self.indices[k], self.values[k]));
            }
        }
        let mut transposed: Vec<(u32, u32, Complex64)> =
            entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        transposed.sort_unstable_by_key(|&(r, c, _)| (r, c));
        // entries is already sorted by (row, col)
        let mut err = 0.0f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < entries.len() || j < transposed.len() {
            if i < entries.len()
                && j < transposed.len()
                && entries[i].0 == transposed[j].0
                && entries[i].1 == transposed[j].1
            {
                err = err.max((entries[i].2 - transposed[j].2).norm());
                i += 1;
                j += 1;
            } else if j >= transposed.len()
                || (i < entries.len() && (entries[i].0, entries[i].1) < (transposed[j].0, transposed[j].1))
            {
                err = err.max(entries[i].2.norm());
                i += 1;
            } else {
                err = err.max(transposed[j].2.norm());
                j += 1;
            }
        }
        err
    }

    /// Gershgorin upper bound on the spectral radius (max absolute row sum).
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.values[self.indptr[i]..self.indptr[i + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Coordinate-triplet text dump: one `row col re im` line per entry.
    pub fn write_triplets<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let v = self.values[k];
                writeln!(w, "{} {} {:.17e} {:.17e}", i, self.indices[k], v.re, v.im)?;
            }
        }
        Ok(())
    }
}
