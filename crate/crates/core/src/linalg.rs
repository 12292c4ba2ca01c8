//! Dense complex matrices and the thin QR factorization used by the detector.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::{Error, Result};

/// Pivots smaller than this are treated as a rank-deficient channel.
pub const RANK_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Column vector from a slice.
    pub fn column(values: &[Complex64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entries in row-major order.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                out[(r, c)] = (0..self.cols).map(|k| self[(r, k)] * other[(k, c)]).sum();
            }
        }
        Ok(out)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Euclidean (Frobenius) norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Thin QR factors `h = q r`.
///
/// `q` is `rows x cols` with orthonormal columns and `r` is `cols x cols`
/// upper triangular with a real, strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

/// Householder QR followed by phase normalization of the diagonal of `r`.
///
/// Requires `h.rows() >= h.cols()`. Fails with [`Error::RankDeficient`] when a
/// pivot falls below [`RANK_TOLERANCE`].
pub fn qr_decompose(h: &ComplexMatrix) -> Result<QrFactors> {
    let (m, n) = (h.rows(), h.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "QR needs rows >= cols, got {m}x{n}"
        )));
    }

    let mut a = h.clone();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);

    for k in 0..n {
        let norm_x = (k..m).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x < RANK_TOLERANCE {
            return Err(Error::RankDeficient {
                index: k,
                magnitude: norm_x,
            });
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        // alpha = -phase * |x| keeps v[0] = x0 - alpha away from cancellation.
        let alpha = -phase * norm_x;

        let mut v: Vec<Complex64> = (k..m).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let v_norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= v_norm;
        }

        // a[k.., k..] <- (I - 2 v v^H) a[k.., k..]
        for c in k..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * a[(k + i, c)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                a[(k + i, c)] -= *vi * dot * 2.0;
            }
        }
        a[(k, k)] = alpha;
        for i in k + 1..m {
            a[(i, k)] = ZERO;
        }
        reflectors.push(v);
    }

    // Thin Q: apply the reflectors in reverse to the first n columns of I.
    let mut q = ComplexMatrix::zeros(m, n);
    for i in 0..n {
        q[(i, i)] = ONE;
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        for c in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * q[(k + i, c)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                q[(k + i, c)] -= *vi * dot * 2.0;
            }
        }
    }

    let mut r = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = a[(i, j)];
        }
    }

    // Rotate row i of r and column i of q so that r[i][i] is real positive.
    for i in 0..n {
        let d = r[(i, i)];
        let mag = d.norm();
        if mag < RANK_TOLERANCE {
            return Err(Error::RankDeficient {
                index: i,
                magnitude: mag,
            });
        }
        let phase = d / mag;
        for j in i..n {
            r[(i, j)] *= phase.conj();
        }
        for row in 0..m {
            q[(row, i)] *= phase;
        }
        r[(i, i)] = Complex64::new(mag, 0.0);
    }

    Ok(QrFactors { q, r })
}

/// Computes `q^H y` for a column vector `y`.
pub fn rotate_received(q: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if y.cols() != 1 || y.rows() != q.rows() {
        return Err(Error::DimensionMismatch(format!(
            "received vector must be {}x1, got {}x{}",
            q.rows(),
            y.rows(),
            y.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(q.cols(), 1);
    for c in 0..q.cols() {
        out[(c, 0)] = (0..q.rows()).map(|r| q[(r, c)].conj() * y[(r, 0)]).sum();
    }
    Ok(out)
}
