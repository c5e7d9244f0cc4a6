//! Dense row-major matrices and least squares via Householder QR with column pivoting.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Dimension(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `Xᵀ v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Least-squares solution with rank diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub rank: usize,
    /// Columns judged linearly dependent on earlier pivots; their coefficient is zero.
    pub dependent_columns: Vec<usize>,
}

impl LeastSquares {
    pub fn is_rank_deficient(&self) -> bool {
        !self.dependent_columns.is_empty()
    }
}

/// Minimises `‖Xβ − y‖²` using Householder QR with column pivoting.
///
/// At step `k` the remaining column with the largest trailing norm is swapped
/// into place (ties keep the lowest original index). A pivot whose
/// `|R[k][k]|` falls below `max(m, n) · ε · |R[0][0]|` ends the factorisation;
/// the remaining columns are treated as dependent and get a zero coefficient
/// (the basic solution).
pub fn least_squares(x: &Matrix, y: &[f64]) -> Result<LeastSquares> {
    let (m, n) = (x.rows, x.cols);
    if y.len() != m {
        return Err(Error::Dimension(format!("target has {} entries for {m} rows", y.len())));
    }
    if m < n {
        return Err(Error::Underdetermined { rows: m, cols: n });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("design matrix"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("target vector"));
    }

    // Column-major working copy: a[j][i].
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| x.get(i, j)).collect()).collect();
    let mut qty = y.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    let mut tol = 0.0;

    for k in 0..n {
        let norms: Vec<f64> = (k..n)
            .map(|j| a[j][k..].iter().map(|v| v * v).sum::<f64>())
            .collect();
        let mut best = 0;
        for (off, &v) in norms.iter().enumerate() {
            if v > norms[best] {
                best = off;
            }
        }
        let p = k + best;
        a.swap(k, p);
        perm.swap(k, p);

        let alpha = norms[best].sqrt();
        if k == 0 {
            tol = (m.max(n) as f64) * f64::EPSILON * alpha;
        }
        if alpha <= tol || alpha == 0.0 {
            break;
        }

        // Householder vector v = x + sign(x0)·‖x‖·e0, reflection H = I − 2vvᵀ/vᵀv.
        let col = &mut a[k];
        let r_kk = if col[k] >= 0.0 { -alpha } else { alpha };
        col[k] -= r_kk;
        let v: Vec<f64> = col[k..].to_vec();
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        col[k] = r_kk;
        for c in col[k + 1..].iter_mut() {
            *c = 0.0;
        }

        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vtv;
            for (t, vi) in target.iter_mut().zip(&v) {
                *t -= s * vi;
            }
        };
        for col in a.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut qty[k..]);
        rank = k + 1;
    }

    // Back substitution on the leading rank×rank block of R.
    let mut z = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = qty[i];
        for (j, zj) in z.iter().enumerate().skip(i + 1) {
            s -= a[j][i] * zj;
        }
        z[i] = s / a[i][i];
    }

    let mut coefficients = vec![0.0; n];
    for (k, zk) in z.into_iter().enumerate() {
        coefficients[perm[k]] = zk;
    }
    let mut dependent_columns: Vec<usize> = perm[rank..].to_vec();
    dependent_columns.sort_unstable();
    Ok(LeastSquares {
        coefficients,
        rank,
        dependent_columns,
    })
}

/// `‖Xᵀ(Xβ − y)‖∞ / (1 + ‖Xᵀy‖∞)`; near zero at a least-squares optimum.
pub fn normal_equation_residual(x: &Matrix, beta: &[f64], y: &[f64]) -> Result<f64> {
    let fitted = x.mul_vec(beta)?;
    let r: Vec<f64> = fitted.iter().zip(y).map(|(f, y)| f - y).collect();
    let xtr = x.tr_mul_vec(&r)?;
    let xty = x.tr_mul_vec(y)?;
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(inf(&xtr) / (1.0 + inf(&xty)))
}
