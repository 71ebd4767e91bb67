//! Dense least squares by Householder QR.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("design has {rows} rows but {cols} columns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("response length {got} does not match {rows} design rows")]
    DimensionMismatch { rows: usize, got: usize },
    #[error("columns {0:?} are linear combinations of earlier columns")]
    RankDeficient(Vec<usize>),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Householder factorization `A = QR` of a tall matrix, stored compactly.
#[derive(Debug, Clone)]
pub struct Qr {
    /// Reflector vectors below the diagonal, `R` on and above it (column-major).
    packed: Vec<Vec<f64>>,
    r_diag: Vec<f64>,
    rows: usize,
}

impl Qr {
    /// Factorizes `a`. A column whose component orthogonal to the earlier
    /// columns is below `tol` times its own norm is reported as aliased.
    pub fn new(a: &Matrix, tol: f64) -> Result<Self, LinalgError> {
        let (m, n) = (a.rows, a.cols);
        if m < n {
            return Err(LinalgError::Underdetermined { rows: m, cols: n });
        }
        let mut cols: Vec<Vec<f64>> = (0..n).map(|c| a.column(c)).collect();
        let norms: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let mut r_diag = vec![0.0; n];
        let mut aliased = Vec::new();

        // p is the next pivot row; aliased columns do not consume one
        let mut p = 0;
        for k in 0..n {
            let tail_norm = cols[k][p..].iter().map(|x| x * x).sum::<f64>().sqrt();
            if tail_norm <= tol * norms[k].max(f64::MIN_POSITIVE) {
                aliased.push(k);
                continue;
            }
            let alpha = if cols[k][p] > 0.0 {
                -tail_norm
            } else {
                tail_norm
            };
            // v = x - alpha e1, scaled so that its leading entry is 1
            let v0 = cols[k][p] - alpha;
            for i in p + 1..m {
                cols[k][i] /= v0;
            }
            let beta = -v0 / alpha;
            r_diag[k] = alpha;
            for j in k + 1..n {
                let (left, right) = cols.split_at_mut(j);
                let v = &left[k];
                let x = &mut right[0];
                let dot = x[p] + (p + 1..m).map(|i| v[i] * x[i]).sum::<f64>();
                let s = beta * dot;
                x[p] -= s;
                for i in p + 1..m {
                    x[i] -= s * v[i];
                }
            }
            cols[k][p] = beta;
            p += 1;
        }
        if !aliased.is_empty() {
            return Err(LinalgError::RankDeficient(aliased));
        }
        Ok(Self {
            packed: cols,
            r_diag,
            rows: m,
        })
    }

    pub fn ncols(&self) -> usize {
        self.r_diag.len()
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.r_diag[i]
        } else {
            self.packed[j][i]
        }
    }

    /// Applies `Q^T` in place.
    fn apply_qt(&self, y: &mut [f64]) {
        for k in 0..self.ncols() {
            let v = &self.packed[k];
            let beta = v[k];
            let dot = y[k] + (k + 1..self.rows).map(|i| v[i] * y[i]).sum::<f64>();
            let s = beta * dot;
            y[k] -= s;
            for i in k + 1..self.rows {
                y[i] -= s * v[i];
            }
        }
    }

    /// Least-squares solution of `A x ≈ y`.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if y.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                rows: self.rows,
                got: y.len(),
            });
        }
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        let n = self.ncols();
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.r(i, j) * x[j]).sum();
            x[i] = (qty[i] - s) / self.r(i, i);
        }
        Ok(x)
    }

    /// Diagonal of `(A^T A)^{-1} = R^{-1} R^{-T}`.
    pub fn inverse_gram_diagonal(&self) -> Vec<f64> {
        let n = self.ncols();
        // columns of R^{-1}
        let mut rinv = vec![vec![0.0; n]; n];
        for c in 0..n {
            for i in (0..=c).rev() {
                let rhs = if i == c { 1.0 } else { 0.0 };
                let s: f64 = (i + 1..=c).map(|j| self.r(i, j) * rinv[c][j]).sum();
                rinv[c][i] = (rhs - s) / self.r(i, i);
            }
        }
        (0..n)
            .map(|i| (i..n).map(|c| rinv[c][i] * rinv[c][i]).sum())
            .collect()
    }
}

/// Least-squares coefficients of `A x ≈ y`.
pub fn lstsq(a: &Matrix, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Qr::new(a, 1e-10)?.solve(y)
}
