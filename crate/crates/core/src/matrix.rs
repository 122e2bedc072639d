//! Dense real matrices and the handful of decompositions the rest of the crate
//! leans on: singular values, the full SVD, and the spectral norms derived from
//! them.
//!
//! Entries are stored row-major. Every constructor rejects NaN and infinities,
//! so downstream code never has to re-check finiteness.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by matrix construction and decompositions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
    #[error("shape {rows}x{cols} needs {expected} entries, got {len}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
        len: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("operation undefined for the zero matrix")]
    ZeroMatrix,
    #[error("SVD did not converge: relative residual {residual:e}")]
    SvdNotConverged { residual: f64 },
    #[error("csv: {0}")]
    Csv(String),
}

/// Tolerances used to accept an SVD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdTolerances {
    /// Bound on `‖U·Uᵗ − I‖_F` and `‖V·Vᵗ − I‖_F`.
    pub tol_orth: f64,
    /// Bound on the relative Frobenius reconstruction error.
    pub tol_recon: f64,
}

impl Default for SvdTolerances {
    fn default() -> Self {
        Self {
            tol_orth: 1e-9,
            tol_recon: 1e-9,
        }
    }
}

/// A dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = MatrixError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        Matrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(MatrixError::Shape {
                rows,
                cols,
                expected: rows * cols,
                len: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(MatrixError::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(value.is_finite());
        let mut m = Self::zeros(rows, cols);
        m.data.fill(value);
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Builds a matrix from a closure. Panics if the closure yields a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
                m.data[i * cols + j] = v;
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(MatrixError::Shape {
                rows: r,
                cols: c,
                expected: r * c,
                len: r * c - c + bad.len(),
            });
        }
        Self::new(r, c, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(value.is_finite());
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Row-major view of the entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Matrix product. Panics on an inner-dimension mismatch.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for i in 0..self.rows {
            let dst = &mut out.data[i * oc..(i + 1) * oc];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self · otherᵗ`, computed without materialising the transpose.
    pub fn matmul_transpose(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                out.data[i * other.rows + j] = dot(a, other.row(j));
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵗ · x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Matrix {
        self.map(|x| c * x)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Matrix {
        let data: Vec<f64> = self.data.iter().map(|&x| f(x)).collect();
        assert!(data.iter().all(|x| x.is_finite()));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// The pairing `⟨A, B⟩ = Tr(A Bᵗ) = Σ a_ij b_ij`.
    pub fn inner(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        dot(&self.data, &other.data)
    }

    pub fn frobenius(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.rows).map(|i| norm2(self.row(i))).collect()
    }

    pub fn col_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &a) in sq.iter_mut().zip(self.row(i)) {
                *s += a * a;
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// `‖A·Aᵗ − I‖_F`, zero exactly when the rows are orthonormal.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = self.matmul_transpose(self);
        let mut acc = 0.0;
        for i in 0..g.rows {
            for j in 0..g.cols {
                let d = g.get(i, j) - if i == j { 1.0 } else { 0.0 };
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Reads comma-separated rows without a header.
    pub fn read_csv(reader: impl Read) -> Result<Matrix, MatrixError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| MatrixError::Csv(e.to_string()))?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| MatrixError::Csv(format!("bad entry {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Matrix::from_rows(&rows)
    }

    /// Writes the matrix as CSV with 17 significant digits, which round-trips every `f64`.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), MatrixError> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for i in 0..self.rows {
            wtr.write_record(self.row(i).iter().map(|x| format!("{x:.16e}")))
                .map_err(|e| MatrixError::Csv(e.to_string()))?;
        }
        wtr.flush().map_err(|e| MatrixError::Csv(e.to_string()))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Singular value decomposition `A = U · diag(σ) · Vᵗ` with `σ` sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdTriple {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> Matrix {
        let us = Matrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u.get(i, j) * self.sigma[j]
        });
        us.matmul_transpose(&self.v)
    }

    /// The orthogonal polar factor `U · Vᵗ`.
    pub fn polar(&self) -> Matrix {
        self.u.matmul_transpose(&self.v)
    }
}

/// SVD of a square matrix with default tolerances.
pub fn svd(a: &Matrix) -> Result<SvdTriple, MatrixError> {
    svd_with(a, SvdTolerances::default())
}

pub fn svd_with(a: &Matrix, tol: SvdTolerances) -> Result<SvdTriple, MatrixError> {
    let check = |t: &SvdTriple| {
        let scale = a.frobenius();
        let residual = t.reconstruct().sub(a).frobenius() / if scale > 0.0 { scale } else { 1.0 };
        let orth = t.u.orthogonality_residual().max(t.v.orthogonality_residual());
        (residual <= tol.tol_recon && orth <= tol.tol_orth, residual.max(orth))
    };
    let triple = svd_unverified(a)?;
    if check(&triple).0 {
        return Ok(triple);
    }
    let triple = jacobi_triple(a);
    match check(&triple) {
        (true, _) => Ok(triple),
        (false, residual) => Err(MatrixError::SvdNotConverged { residual }),
    }
}

// nalgebra's bidiagonal QR misbehaves on rank-deficient input when the
// convergence threshold is a bare machine epsilon; 5ε is its own default.
const SVD_EPS: f64 = 5.0 * f64::EPSILON;

/// Whether `Σσ²` matches `‖A‖²_F`, a cheap necessary condition that catches
/// the solver's occasional wrong answers on low-rank input.
fn energy_matches(a: &Matrix, sigma: &[f64]) -> bool {
    let f2 = a.frobenius().powi(2);
    let s2: f64 = sigma.iter().map(|s| s * s).sum();
    (f2 - s2).abs() <= 1e-10 * f2.max(f64::MIN_POSITIVE)
}

/// The SVD without the reconstruction and orthogonality checks, for inner
/// loops whose output is verified downstream.
pub(crate) fn svd_unverified(a: &Matrix) -> Result<SvdTriple, MatrixError> {
    require_square(a)?;
    let n = a.rows();
    let dec = a
        .to_nalgebra()
        .try_svd(true, true, SVD_EPS, 10_000)
        .ok_or(MatrixError::SvdNotConverged {
            residual: f64::INFINITY,
        })?;
    let (Some(u), Some(vt)) = (dec.u, dec.v_t) else {
        return Err(MatrixError::SvdNotConverged {
            residual: f64::INFINITY,
        });
    };
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal singular values keep the solver's order
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let sigma: Vec<f64> = order
        .iter()
        .map(|&k| dec.singular_values[k].max(0.0))
        .collect();
    if !energy_matches(a, &sigma) {
        return Ok(jacobi_triple(a));
    }
    let mut u = Matrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    let mut v = Matrix::from_fn(n, n, |i, j| vt[(order[j], i)]);
    complete_null_block(&mut u, &mut v, &sigma);
    Ok(SvdTriple { u, sigma, v })
}

/// The vectors for (numerically) zero singular values need not come out
/// orthonormal; rebuild that block as a completion of the others.
fn complete_null_block(u: &mut Matrix, v: &mut Matrix, sigma: &[f64]) {
    let floor = 1e-12 * sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().take_while(|&&s| s > floor).count();
    if rank < sigma.len() {
        complete_columns(u, rank);
        complete_columns(v, rank);
    }
}

/// One-sided (Hestenes) Jacobi on the columns of a `rows ≥ cols` matrix.
/// Returns left vectors (unnormalized, norm σ_j), right vectors, unsorted.
fn hestenes(cols: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    let k = cols.len();
    let mut v: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..k).map(|i| f64::from(u8::from(i == j))).collect())
        .collect();
    let rotate = |x: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64| {
        let (lo, hi) = x.split_at_mut(q);
        for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
            let (a, b) = (*xp, *xq);
            *xp = c * a - s * b;
            *xq = s * a + c * b;
        }
    };
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                rotate(cols, p, q, c, c * t);
                rotate(&mut v, p, q, c, c * t);
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

/// Jacobi fallback for a square matrix; slower but reliable on low rank.
fn jacobi_triple(a: &Matrix) -> SvdTriple {
    let n = a.rows();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let vcols = hestenes(&mut cols);
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let mut u = Matrix::from_fn(n, n, |i, j| {
        let k = order[j];
        if norms[k] > 0.0 {
            cols[k][i] / norms[k]
        } else {
            0.0
        }
    });
    let mut v = Matrix::from_fn(n, n, |i, j| vcols[order[j]][i]);
    complete_null_block(&mut u, &mut v, &sigma);
    SvdTriple { u, sigma, v }
}

/// Gram–Schmidt on columns `from..`, falling back to coordinate vectors when
/// a column is (nearly) dependent on its predecessors.
fn complete_columns(q: &mut Matrix, from: usize) {
    let n = q.rows();
    let mut basis: Vec<Vec<f64>> = (0..from).map(|j| q.col(j)).collect();
    let orthonormalize = |mut x: Vec<f64>, basis: &[Vec<f64>]| {
        for _ in 0..2 {
            for b in basis {
                let c = dot(&x, b);
                x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
            }
        }
        let len = norm2(&x);
        (len > 0.5).then(|| x.into_iter().map(|xi| xi / len).collect::<Vec<f64>>())
    };
    let mut coordinate = 0;
    for j in from..n {
        let mut next = orthonormalize(q.col(j), &basis);
        while next.is_none() && coordinate < n {
            let mut e = vec![0.0; n];
            e[coordinate] = 1.0;
            coordinate += 1;
            next = orthonormalize(e, &basis);
        }
        let col = next.expect("a coordinate vector completes the basis");
        for (i, x) in col.iter().enumerate() {
            q.set(i, j, *x);
        }
        basis.push(col);
    }
}

/// Singular values (descending) of any matrix, without forming `U` or `V`.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>, MatrixError> {
    let dec = a
        .to_nalgebra()
        .try_svd(false, false, SVD_EPS, 10_000)
        .ok_or(MatrixError::SvdNotConverged {
            residual: f64::INFINITY,
        })?;
    let mut s: Vec<f64> = dec.singular_values.iter().map(|x| x.max(0.0)).collect();
    if !energy_matches(a, &s) {
        let tall = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
        let mut cols: Vec<Vec<f64>> = (0..tall.cols()).map(|j| tall.col(j)).collect();
        hestenes(&mut cols);
        s = cols.iter().map(|c| norm2(c)).collect();
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `‖A‖₁`, the sum of singular values.
pub fn trace_norm(a: &Matrix) -> Result<f64, MatrixError> {
    require_square(a)?;
    Ok(singular_values(a)?.iter().sum())
}

/// `‖A‖_∞`, the largest singular value.
pub fn operator_norm(a: &Matrix) -> Result<f64, MatrixError> {
    require_square(a)?;
    Ok(singular_values(a)?[0])
}

/// `n · ‖A‖_∞ / ‖A‖₁`: one for a flat spectrum, `n` for a rank-one matrix.
pub fn flatness_ratio(a: &Matrix) -> Result<f64, MatrixError> {
    require_square(a)?;
    if a.is_zero() {
        return Err(MatrixError::ZeroMatrix);
    }
    let s = singular_values(a)?;
    let total: f64 = s.iter().sum();
    Ok(a.rows() as f64 * s[0] / total)
}

pub(crate) fn require_square(a: &Matrix) -> Result<(), MatrixError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(MatrixError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}
