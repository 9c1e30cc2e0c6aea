//! Small dense complex linear algebra.
//!
//! The simulator only ever manipulates M x M channel matrices with M <= 4
//! antennas (larger sizes work, they are just not tuned for), so everything
//! here is a straightforward dense implementation: row-major [`CMat`],
//! Cholesky factorization for the Hermitian positive definite interference
//! covariances, and a power iteration on H^H H for principal singular pairs.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("zero matrix has no principal singular pair")]
    ZeroMatrix,
}

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    m: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(m: usize) -> Self {
        CMat { m, data: vec![C64::new(0.0, 0.0); m * m] }
    }

    pub fn identity(m: usize) -> Self {
        let mut a = CMat::zeros(m);
        for i in 0..m {
            a.data[i * m + i] = C64::new(1.0, 0.0);
        }
        a
    }

    pub fn scaled_identity(m: usize, s: f64) -> Self {
        let mut a = CMat::zeros(m);
        for i in 0..m {
            a.data[i * m + i] = C64::new(s, 0.0);
        }
        a
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let m = rows.len();
        assert!(rows.iter().all(|r| r.len() == m), "rows must form a square matrix");
        let mut data = Vec::with_capacity(m * m);
        for r in rows {
            data.extend_from_slice(r);
        }
        CMat { m, data }
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut a = CMat::zeros(m);
        for i in 0..m {
            for j in 0..m {
                a.data[i * m + j] = f(i, j);
            }
        }
        a
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.m + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.m + j] = v;
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Overwrite with another matrix of the same dimension without allocating.
    #[inline]
    pub fn copy_from(&mut self, src: &CMat) {
        debug_assert_eq!(self.m, src.m);
        self.data.copy_from_slice(&src.data);
    }

    /// Reset every entry to zero.
    #[inline]
    pub fn zero_fill(&mut self) {
        self.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.m).map(|i| self.get(i, i)).sum()
    }

    /// out = A v
    pub fn mul_vec(&self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.m);
        debug_assert_eq!(out.len(), self.m);
        for i in 0..self.m {
            let row = &self.data[i * self.m..(i + 1) * self.m];
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(v.iter()) {
                acc += a * x;
            }
            out[i] = acc;
        }
    }

    /// out = A^H v
    pub fn herm_mul_vec(&self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.m);
        debug_assert_eq!(out.len(), self.m);
        for x in out.iter_mut() {
            *x = C64::new(0.0, 0.0);
        }
        for i in 0..self.m {
            let row = &self.data[i * self.m..(i + 1) * self.m];
            let vi = v[i];
            for (o, a) in out.iter_mut().zip(row.iter()) {
                *o += a.conj() * vi;
            }
        }
    }

    /// A += scale * v v^H for a real scale.
    pub fn add_scaled_outer(&mut self, v: &[C64], scale: f64) {
        debug_assert_eq!(v.len(), self.m);
        for i in 0..self.m {
            let vi = v[i] * scale;
            let row = &mut self.data[i * self.m..(i + 1) * self.m];
            for (r, vj) in row.iter_mut().zip(v.iter()) {
                *r += vi * vj.conj();
            }
        }
    }

    /// A += s I for a real shift.
    pub fn add_scaled_identity(&mut self, s: f64) {
        for i in 0..self.m {
            self.data[i * self.m + i] += s;
        }
    }

    /// Lower-triangular Cholesky factor of a Hermitian positive definite
    /// matrix, written into `l`.
    pub fn cholesky_into(&self, l: &mut CMat) -> Result<(), LinalgError> {
        let m = self.m;
        debug_assert_eq!(l.m, m);
        l.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for j in 0..m {
            let mut diag = self.get(j, j).re;
            for k in 0..j {
                diag -= l.get(j, k).norm_sqr();
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(LinalgError::NotPositiveDefinite);
            }
            let dj = diag.sqrt();
            l.set(j, j, C64::new(dj, 0.0));
            for i in (j + 1)..m {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, s / dj);
            }
        }
        Ok(())
    }

    pub fn cholesky(&self) -> Result<CMat, LinalgError> {
        let mut l = CMat::zeros(self.m);
        self.cholesky_into(&mut l)?;
        Ok(l)
    }
}

/// Solve A x = b given the Cholesky factor L of A (A = L L^H). `x` may alias `b`.
pub fn chol_solve(l: &CMat, b: &[C64], x: &mut [C64]) {
    let m = l.dim();
    debug_assert_eq!(b.len(), m);
    debug_assert_eq!(x.len(), m);
    // Forward: L y = b
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * x[k];
        }
        x[i] = s / l.get(i, i).re;
    }
    // Backward: L^H x = y
    for i in (0..m).rev() {
        let mut s = x[i];
        for k in (i + 1)..m {
            s -= l.get(k, i).conj() * x[k];
        }
        x[i] = s / l.get(i, i).re;
    }
}

/// A^{-1} from the Cholesky factor L of A, by solving for the basis vectors.
pub fn chol_inverse_into(l: &CMat, inv: &mut CMat) {
    let m = l.dim();
    debug_assert_eq!(inv.dim(), m);
    let mut e = vec![C64::new(0.0, 0.0); m];
    let mut col = vec![C64::new(0.0, 0.0); m];
    for j in 0..m {
        for (i, v) in e.iter_mut().enumerate() {
            *v = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        chol_solve(l, &e, &mut col);
        for i in 0..m {
            inv.set(i, j, col[i]);
        }
    }
}

/// trace(A^{-1}) given the Cholesky factor L of A.
///
/// Uses tr(A^{-1}) = ||L^{-1}||_F^2; the inverse factor is built column by
/// column with forward substitution.
pub fn chol_inverse_trace(l: &CMat) -> f64 {
    let m = l.dim();
    let mut col = vec![C64::new(0.0, 0.0); m];
    let mut tr = 0.0;
    for j in 0..m {
        for (i, c) in col.iter_mut().enumerate() {
            *c = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        for i in j..m {
            let mut s = col[i];
            for k in j..i {
                s -= l.get(i, k) * col[k];
            }
            col[i] = s / l.get(i, i).re;
        }
        for c in col.iter().skip(j) {
            tr += c.norm_sqr();
        }
    }
    tr
}

#[inline]
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
pub fn vec_norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Hermitian inner product a^H b.
#[inline]
pub fn vec_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalize(v: &mut [C64]) -> f64 {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Fix the phase so that the first component with magnitude above `tol`
/// is real and non-negative.
pub fn canonicalize_phase(v: &mut [C64], tol: f64) {
    for z in v.iter() {
        if z.norm() > tol {
            let phase = z / z.norm();
            let rot = phase.conj();
            for w in v.iter_mut() {
                *w *= rot;
            }
            return;
        }
    }
}

/// Dominant right singular pair of `h` by power iteration on H^H H.
///
/// Starts from the normalized all-ones vector, iterates to relative
/// tolerance `tol` on the eigenvalue estimate with a hard cap of `max_iter`
/// iterations, and returns `(sigma1, v1)` with the canonical phase rule of
/// [`canonicalize_phase`]. An exactly isotropic H^H H (multiple of the
/// identity, e.g. H = I) is tie-broken to the first basis vector.
pub fn power_iteration(h: &CMat, tol: f64, max_iter: usize) -> Result<(f64, Vec<C64>), LinalgError> {
    let m = h.dim();
    let norm = h.frobenius_norm();
    if norm == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }

    // H^H H, Hermitian PSD.
    let mut hh = CMat::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..m {
                s += h.get(k, i).conj() * h.get(k, j);
            }
            hh.set(i, j, s);
        }
    }

    // Degenerate isotropic spectrum: documented tie-break to e1.
    let mean_diag = hh.trace().re / m as f64;
    let mut iso_dev = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let expect = if i == j { C64::new(mean_diag, 0.0) } else { C64::new(0.0, 0.0) };
            iso_dev += (hh.get(i, j) - expect).norm_sqr();
        }
    }
    if iso_dev.sqrt() <= 1e-12 * mean_diag * (m as f64) {
        let mut v = vec![C64::new(0.0, 0.0); m];
        v[0] = C64::new(1.0, 0.0);
        return Ok((mean_diag.sqrt(), v));
    }

    let mut v = vec![C64::new(1.0, 0.0); m];
    normalize(&mut v);
    let mut w = vec![C64::new(0.0, 0.0); m];
    let mut lambda_prev = 0.0f64;
    for _ in 0..max_iter {
        hh.mul_vec(&v, &mut w);
        let lambda = vec_dot(&v, &w).re;
        std::mem::swap(&mut v, &mut w);
        let n = normalize(&mut v);
        if n == 0.0 {
            // start vector orthogonal to the dominant space; perturb
            v[0] = C64::new(1.0, 0.0);
            normalize(&mut v);
            continue;
        }
        if lambda > 0.0 && (lambda - lambda_prev).abs() <= tol * lambda {
            break;
        }
        lambda_prev = lambda;
    }
    // Final Rayleigh quotient for the eigenvalue estimate.
    hh.mul_vec(&v, &mut w);
    let lambda = vec_dot(&v, &w).re.max(0.0);
    canonicalize_phase(&mut v, 1e-14);
    Ok((lambda.sqrt(), v))
}
