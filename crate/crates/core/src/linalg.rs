//! Small dense complex linear algebra: just enough for per-link beamforming.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::Scalar;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds from row-major data; panics if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        Self { rows, cols, data }
    }

    /// Outer product `u vᴴ`.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        let data = u
            .iter()
            .flat_map(|&ui| v.iter().map(move |vj| ui * vj.conj()))
            .collect();
        Self::from_row_major(u.len(), v.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scale(&mut self, c: T) {
        for z in &mut self.data {
            *z = z.scale(c);
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    /// `Aᴴ y`.
    pub fn adjoint_mul_vec(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex::zero(); self.cols];
        for (i, yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * yi;
            }
        }
        out
    }

    /// `A Aᴴ` (rows × rows) when `left`, otherwise `Aᴴ A` (cols × cols).
    pub fn gram(&self, left: bool) -> Self {
        if left {
            let n = self.rows;
            let mut g = Self::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = self
                        .row(i)
                        .iter()
                        .zip(self.row(j))
                        .map(|(a, b)| a * b.conj())
                        .fold(Complex::zero(), |acc, z| acc + z);
                    g[(i, j)] = v;
                    g[(j, i)] = v.conj();
                }
            }
            g
        } else {
            let n = self.cols;
            let mut g = Self::zeros(n, n);
            for r in 0..self.rows {
                let row = self.row(r);
                for i in 0..n {
                    let ai = row[i].conj();
                    for j in i..n {
                        g[(i, j)] += ai * row[j];
                    }
                }
            }
            for i in 0..n {
                g[(i, i)].im = T::zero();
                for j in 0..i {
                    g[(i, j)] = g[(j, i)].conj();
                }
            }
            g
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Unconjugated `Σ aᵢ bᵢ`.
pub fn dot<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (x, y)| acc + x * y)
}

/// Hermitian inner product `aᴴ b`.
pub fn inner<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Rotates `v` so its first entry with non-negligible magnitude is real and
/// non-negative.
pub fn normalize_phase<T: Scalar>(v: &mut [Complex<T>]) {
    let scale = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if scale == T::zero() {
        return;
    }
    let thresh = scale * T::epsilon() * T::lit(16.0);
    if let Some(lead) = v.iter().find(|z| z.norm() > thresh).copied() {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// columns of a unitary matrix.
pub fn hermitian_eigen<T: Scalar>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "hermitian_eigen needs a square matrix");
    let mut a = a.clone();
    let mut v = CMatrix::identity(n);
    let total = a.frobenius_norm_sqr();

    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= total * T::epsilon() * T::epsilon() || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = a[(p, q)];
                let mag = g.norm();
                if mag == T::zero() {
                    continue;
                }
                // Phase step on index q makes a[p][q] real positive.
                let e = g / mag;
                for k in 0..n {
                    a[(k, q)] *= e.conj();
                    v[(k, q)] *= e.conj();
                }
                for k in 0..n {
                    a[(q, k)] *= e;
                }
                let apq = a[(p, q)].re;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp.scale(c) - akq.scale(s);
                    a[(k, q)] = akp.scale(s) + akq.scale(c);
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp.scale(c) - vkq.scale(s);
                    v[(k, q)] = vkp.scale(s) + vkq.scale(c);
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk.scale(c) - aqk.scale(s);
                    a[(q, k)] = apk.scale(s) + aqk.scale(c);
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    (values, vectors)
}

/// Largest singular value of `h` with its left and right singular vectors.
///
/// Works on the smaller of the two Gram matrices. Returns `None` for an
/// all-zero matrix.
pub fn dominant_singular_pair<T: Scalar>(
    h: &CMatrix<T>,
) -> Option<(T, Vec<Complex<T>>, Vec<Complex<T>>)> {
    if h.is_zero() {
        return None;
    }
    let left = h.rows() <= h.cols();
    let (values, vectors) = hermitian_eigen(&h.gram(left));
    let col: Vec<Complex<T>> = (0..vectors.rows()).map(|k| vectors[(k, 0)]).collect();
    let sigma = values[0].max(T::zero()).sqrt();
    let (u, v) = if left {
        let mut v = h.adjoint_mul_vec(&col);
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z = z.unscale(nv));
        (col, v)
    } else {
        let mut u = h.mul_vec(&col);
        let nu = norm(&u);
        u.iter_mut().for_each(|z| *z = z.unscale(nu));
        (u, col)
    };
    Some((sigma, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let mut m = CMatrix::<f64>::zeros(3, 3);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(5.0, 0.0);
        m[(2, 2)] = c(3.0, 0.0);
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals, vec![5.0, 3.0, 1.0]);
        assert_eq!(vecs[(1, 0)].norm(), 1.0);
    }

    #[test]
    fn eigen_of_2x2_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let m = CMatrix::from_row_major(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let x: Vec<_> = (0..2).map(|k| vecs[(k, 0)]).collect();
        let mx = m.mul_vec(&x);
        for (a, b) in mx.iter().zip(&x) {
            assert!((a - b * 3.0).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_pair_of_rank_one() {
        let u = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let v = vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)];
        let mut h = CMatrix::outer(&u, &v);
        h.scale(2.5);
        let (s, lu, rv) = dominant_singular_pair(&h).unwrap();
        assert!((s - 2.5).abs() < 1e-13);
        let g = inner(&lu, &h.mul_vec(&rv));
        assert!((g.norm() - 2.5).abs() < 1e-13);
    }

    #[test]
    fn zero_matrix_has_no_pair() {
        assert!(dominant_singular_pair(&CMatrix::<f64>::zeros(2, 3)).is_none());
    }

    #[test]
    fn phase_normalization_skips_leading_zeros() {
        let mut v = vec![c(0.0, 0.0), c(0.0, -2.0), c(1.0, 0.0)];
        normalize_phase(&mut v);
        assert_eq!(v[0], c(0.0, 0.0));
        assert!((v[1] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((v[2] - c(0.0, 1.0)).norm() < 1e-15);
    }
}
