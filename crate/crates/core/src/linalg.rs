//! Small dense complex linear algebra: matrix exponential and Hermitian spectra.

use std::ops::{Index, IndexMut};

use crate::scalar::{cone, czero, Real, C};

/// Square row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![czero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> C<T> {
        (0..self.n).fold(czero(), |a, i| a + self[(i, i)])
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| *x * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == czero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(czero(), |a, (m, x)| a + *m * *x)
            })
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).fold(T::zero(), |a, i| a + self.data[i * n + j].norm()))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest `|A - A†|` entry.
    pub fn hermiticity_error(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    a[x * n + col]
                        .norm()
                        .partial_cmp(&a[y * n + col].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    b.swap(col * n + j, pivot * n + j);
                }
            }
            let d = a[col * n + col];
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                if f == czero() {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] = a[row * n + j] - f * a[col * n + j];
                }
                for j in 0..n {
                    b[row * n + j] = b[row * n + j] - f * b[col * n + j];
                }
            }
        }
        for col in (0..n).rev() {
            let d = a[col * n + col];
            for j in 0..n {
                b[col * n + j] = b[col * n + j] / d;
            }
            for row in 0..col {
                let f = a[row * n + col];
                if f == czero() {
                    continue;
                }
                for j in 0..n {
                    b[row * n + j] = b[row * n + j] - f * b[col * n + j];
                }
            }
        }
        Self { n, data: b }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.n + j]
    }
}

const PADE_ORDER: usize = 8;

/// Matrix exponential by scaling and squaring with a diagonal `[8/8]` Padé
/// approximant. The scaled matrix has 1-norm at most 1/2, where the
/// truncation error of the approximant is far below double precision.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.dim();
    let norm = a.norm1();
    let half = T::lit(0.5);
    let mut squarings = 0i32;
    let mut scale = T::one();
    while norm * scale > half {
        scale = scale * half;
        squarings += 1;
    }
    let x = a.scale(C::new(scale, T::zero()));

    // c_j = (2q - j)! q! / ((2q)! j! (q - j)!)
    let q = PADE_ORDER;
    let mut coeffs = vec![T::one(); q + 1];
    for j in 1..=q {
        let num = T::from_usize_lossy(q + 1 - j);
        let den = T::from_usize_lossy(j * (2 * q + 1 - j));
        coeffs[j] = coeffs[j - 1] * num / den;
    }

    let mut numer = CMatrix::identity(n);
    let mut denom = CMatrix::identity(n);
    let mut power = CMatrix::identity(n);
    for (j, &cj) in coeffs.iter().enumerate().skip(1) {
        power = power.matmul(&x);
        let term = power.scale(C::new(cj, T::zero()));
        numer = numer.add(&term);
        let signed = if j % 2 == 1 {
            term.scale(C::new(-T::one(), T::zero()))
        } else {
            term
        };
        denom = denom.add(&signed);
    }
    let mut r = denom.solve(&numer);
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    r
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Uses cyclic Jacobi rotations on the real symmetric embedding
/// `[[Re H, -Im H], [Im H, Re H]]`, whose spectrum is that of `H` with every
/// eigenvalue doubled.
pub fn hermitian_eigenvalues<T: Real>(h: &CMatrix<T>) -> Vec<T> {
    let (mut a, m) = real_embedding(h);
    let mut ev = symmetric_jacobi(&mut a, m, None);
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev.chunks(2).map(|p| (p[0] + p[1]) * T::lit(0.5)).collect()
}

/// Decomposition `H = Σ_j w_j z_j z_j†` over unit vectors `z_j`.
///
/// Each real eigenvector `(u, v)` of the embedding maps to `z = u + i v`, and
/// every eigenvalue of `H` shows up twice with half weight, so the list has
/// twice the rank of `H`.
pub fn hermitian_ensemble<T: Real>(h: &CMatrix<T>) -> Vec<(T, Vec<C<T>>)> {
    let n = h.dim();
    let (mut a, m) = real_embedding(h);
    let mut v = vec![T::zero(); m * m];
    for i in 0..m {
        v[i * m + i] = T::one();
    }
    let ev = symmetric_jacobi(&mut a, m, Some(&mut v));
    ev.into_iter()
        .enumerate()
        .map(|(j, lam)| {
            let z = (0..n)
                .map(|i| C::new(v[i * m + j], v[(i + n) * m + j]))
                .collect();
            (lam * T::lit(0.5), z)
        })
        .collect()
}

fn real_embedding<T: Real>(h: &CMatrix<T>) -> (Vec<T>, usize) {
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    (a, m)
}

/// Cyclic Jacobi; rotations are accumulated into the columns of `vecs`.
fn symmetric_jacobi<T: Real>(a: &mut [T], m: usize, mut vecs: Option<&mut [T]>) -> Vec<T> {
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..m {
            diag = diag + a[i * m + i] * a[i * m + i];
            for j in 0..m {
                if i != j {
                    off = off + a[i * m + j] * a[i * m + j];
                }
            }
        }
        if off <= eps * eps * (diag + T::min_positive_value()) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate_columns(a, m, p, q, c, s);
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                if let Some(v) = vecs.as_deref_mut() {
                    rotate_columns(v, m, p, q, c, s);
                }
            }
        }
    }
    (0..m).map(|i| a[i * m + i]).collect()
}

fn rotate_columns<T: Real>(a: &mut [T], m: usize, p: usize, q: usize, c: T, s: T) {
    for k in 0..m {
        let akp = a[k * m + p];
        let akq = a[k * m + q];
        a[k * m + p] = c * akp - s * akq;
        a[k * m + q] = s * akp + c * akq;
    }
}
