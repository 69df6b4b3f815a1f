//! Dense complex matrices and the handful of kernels the formula machinery needs.
//!
//! Everything here targets small matrices (at most a few dozen rows), so the
//! algorithms favour accuracy and determinism over asymptotic speed:
//!
//! * [`expm`]: scaling and squaring around a degree-18 Taylor kernel.
//! * [`logm_near_identity`]: inverse scaling and squaring (Denman-Beavers square
//!   roots) followed by the Gregory series `log U = 2 atanh((U-I)(U+I)^-1)`.
//! * [`spectral_norm`]: largest singular value, computed from the full spectrum of `M^H M`.
//! * [`eigh`]: cyclic complex Jacobi for Hermitian matrices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

/// Tolerance used to accept a matrix as Hermitian before diagonalising it.
pub const HERMITIAN_TOL: f64 = 1e-10;

const TAYLOR_DEGREE: usize = 18;
const LOG_SERIES_RADIUS: f64 = 0.25;

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    /// Builds a matrix from row-major data, rejecting non-square or non-finite input.
    pub fn new(dim: usize, data: Vec<C<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("rows do not form a square matrix".into()));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[T]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| re(v)).collect()).collect())
    }

    pub fn from_diag(diag: &[C<T>]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![C::zero(); n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self::new(n, data)
    }

    /// Builds a matrix entry by entry; the closure must produce finite values.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![C::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C::one();
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Maximum absolute column sum; an upper bound on the spectral norm.
    pub fn norm_one(&self) -> T {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Max-entry deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: T) -> bool {
        self.scale(crate::scalar::im(T::one())).hermitian_defect() <= tol
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let d = n * m;
        let mut out = Self::zeros(d);
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                if a.is_zero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * d + j * m + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.dim, "vector length does not match matrix dimension");
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        Ok(self.matmul(rhs))
    }

    fn matmul(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let mut out = vec![C::zero(); n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let rk = &rhs.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(rk) {
                    *d = *d + a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        acc
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn combine(&self, rhs: &Self, f: impl Fn(C<T>, C<T>) -> C<T>) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a, T: Real> Mul<&'a CMatrix<T>> for &'a CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &'a CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        self.matmul(rhs)
    }
}

impl<'a, T: Real> Add<&'a CMatrix<T>> for &'a CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &'a CMatrix<T>) -> CMatrix<T> {
        self.combine(rhs, |a, b| a + b)
    }
}

impl<'a, T: Real> Sub<&'a CMatrix<T>> for &'a CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &'a CMatrix<T>) -> CMatrix<T> {
        self.combine(rhs, |a, b| a - b)
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn neg(self) -> CMatrix<T> {
        self.scale_real(-T::one())
    }
}

/// `AB - BA`.
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    a.check_dim(b)?;
    Ok(&a.matmul(b) - &b.matmul(a))
}

/// Matrix exponential.
pub fn expm<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("expm of a non-finite matrix".into()));
    }
    let n = m.dim();
    let norm = m.norm_one();
    let half = T::lit(0.5);
    let mut squarings = 0u32;
    if norm > half {
        squarings = (norm / half).log2().ceil().to_u32().unwrap_or(0);
    }
    let scaled = m.scale_real(T::one() / T::lit(2.0).powi(squarings as i32));
    let id = CMatrix::identity(n);
    // Horner form of sum_k X^k / k!
    let mut p = id.clone();
    for k in (1..=TAYLOR_DEGREE).rev() {
        p = &id + &scaled.matmul(&p).scale_real(T::one() / T::from_count(k));
    }
    for _ in 0..squarings {
        p = p.matmul(&p);
    }
    Ok(p)
}

/// Principal logarithm for matrices with `||U - I||_2 < 1`.
pub fn logm_near_identity<T: Real>(u: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !u.is_finite() {
        return Err(Error::InvalidInput("logm of a non-finite matrix".into()));
    }
    let n = u.dim();
    let id = CMatrix::identity(n);
    let dist = spectral_norm(&(u - &id));
    if !(dist < T::one()) {
        return Err(Error::OutOfDomain(format!(
            "logm_near_identity requires ||U - I|| < 1, got {dist}"
        )));
    }
    let mut v = u.clone();
    let mut roots = 0i32;
    while spectral_norm(&(&v - &id)) >= T::lit(LOG_SERIES_RADIUS) {
        v = sqrtm(&v)?;
        roots += 1;
        if roots > 16 {
            return Err(Error::OutOfDomain("square-root iteration did not approach identity".into()));
        }
    }
    let z = (&v - &id).matmul(&inverse(&(&v + &id))?);
    let z2 = z.matmul(&z);
    let mut term = z.clone();
    let mut acc = z;
    let tiny = T::epsilon() * T::lit(0.01);
    for j in 1..64 {
        term = term.matmul(&z2);
        let contrib = term.scale_real(T::one() / T::from_count(2 * j + 1));
        let size = contrib.norm_max();
        acc = &acc + &contrib;
        if size <= tiny * acc.norm_max().max(T::epsilon()) {
            break;
        }
    }
    Ok(acc.scale_real(T::lit(2.0) * T::lit(2.0).powi(roots)))
}

/// Principal square root by the Denman-Beavers iteration.
pub fn sqrtm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.dim();
    let mut y = a.clone();
    let mut z = CMatrix::identity(n);
    let half = T::lit(0.5);
    for _ in 0..64 {
        let yi = inverse(&y)?;
        let zi = inverse(&z)?;
        let y_next = (&y + &zi).scale_real(half);
        let z_next = (&z + &yi).scale_real(half);
        let step = (&y_next - &y).norm_max();
        y = y_next;
        z = z_next;
        if step <= T::epsilon() * T::lit(4.0) * y.norm_max() {
            return Ok(y);
        }
    }
    Err(Error::SolverFailure("Denman-Beavers square root did not converge".into()))
}

/// Inverse by Gaussian elimination with partial pivoting.
pub fn inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.dim();
    let mut m = a.data.clone();
    let mut inv = CMatrix::<T>::identity(n).data;
    let scale = a.norm_max().max(T::min_positive_value());
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .fold((col, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= T::epsilon() * scale * T::lit(1e-3) {
            return Err(Error::InvalidInput("matrix is singular to working precision".into()));
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let p = m[col * n + col].inv();
        for j in 0..n {
            m[col * n + j] = m[col * n + j] * p;
            inv[col * n + j] = inv[col * n + j] * p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                m[r * n + j] = m[r * n + j] - f * m[col * n + j];
                inv[r * n + j] = inv[r * n + j] - f * inv[col * n + j];
            }
        }
    }
    Ok(CMatrix { dim: n, data: inv })
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let gram = m.adjoint().matmul(m);
    let (mut vals, _) = jacobi_hermitian(gram, false);
    for v in vals.iter_mut() {
        *v = v.max(T::zero()).sqrt();
    }
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.dim() == 1 {
        return m.data[0].norm();
    }
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh<T> {
    /// Eigenvalues, ascending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> Eigh<T> {
    pub fn vector(&self, i: usize) -> Vec<C<T>> {
        self.vectors.column(i)
    }
}

/// Eigen-decomposition of a Hermitian matrix; the input is symmetrised as `(H + H^H)/2`.
pub fn eigh<T: Real>(h: &CMatrix<T>) -> Result<Eigh<T>> {
    let scale = T::one().max(h.norm_max());
    if h.hermitian_defect() > T::lit(HERMITIAN_TOL) * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (defect {})",
            h.hermitian_defect()
        )));
    }
    let sym = (h + &h.adjoint()).scale_real(T::lit(0.5));
    let n = sym.dim();
    let (values, vectors) = jacobi_hermitian(sym, true);
    let vectors = vectors.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let sorted_vals = order.iter().map(|&i| values[i]).collect();
    let mut sorted_vecs = CMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            sorted_vecs[(r, new_col)] = vectors[(r, old_col)];
        }
    }
    Ok(Eigh {
        values: sorted_vals,
        vectors: sorted_vecs,
    })
}

/// Cyclic Jacobi sweeps on a Hermitian matrix. Returns unsorted eigenvalues.
fn jacobi_hermitian<T: Real>(mut a: CMatrix<T>, want_vectors: bool) -> (Vec<T>, Option<CMatrix<T>>) {
    let n = a.dim();
    let mut v = want_vectors.then(|| CMatrix::identity(n));
    let total = a.frobenius();
    if total == T::zero() {
        return (vec![T::zero(); n], v);
    }
    let threshold = T::epsilon() * T::lit(0.5) * total;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag == T::zero() {
                    continue;
                }
                let phase = b / mag;
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (beta - alpha) / (T::lit(2.0) * mag);
                let t = if tau == T::zero() {
                    T::one()
                } else {
                    tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = t * cs;
                let pc = phase.conj();
                // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let j_pp = re(cs);
                let j_pq = re(sn);
                let j_qp = pc * (-sn);
                let j_qq = pc * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = re(a[(p, p)].re);
                a[(q, q)] = re(a[(q, q)].re);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * j_pp + vkq * j_qp;
                        v[(k, q)] = vkp * j_pq + vkq * j_qq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Solves a small dense real system; `None` when singular.
pub fn solve_real<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |m, &v| m.max(v.abs()))
        .max(T::min_positive_value());
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| {
            a[x][col]
                .abs()
                .partial_cmp(&a[y][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].abs() <= T::epsilon() * scale * T::lit(16.0) {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            let (upper, lower) = a.split_at_mut(r);
            for (v, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *v = *v - f * p;
            }
            b[r] = b[r] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s = ((i + 1)..n).fold(b[i], |s, k| s - a[i][k] * x[k]);
        x[i] = s / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// `sum_i conj(a_i) b_i`.
pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Pauli matrices and friends.
pub mod pauli {
    use super::CMatrix;
    use crate::scalar::{c, Real};

    pub fn identity<T: Real>() -> CMatrix<T> {
        CMatrix::identity(2)
    }

    pub fn x<T: Real>() -> CMatrix<T> {
        let (o, z) = (T::one(), T::zero());
        CMatrix::from_real_rows(&[&[z, o], &[o, z]]).expect("finite")
    }

    pub fn y<T: Real>() -> CMatrix<T> {
        let (o, z) = (T::one(), T::zero());
        CMatrix::from_rows(vec![vec![c(z, z), c(z, -o)], vec![c(z, o), c(z, z)]]).expect("finite")
    }

    pub fn z<T: Real>() -> CMatrix<T> {
        let (o, z) = (T::one(), T::zero());
        CMatrix::from_real_rows(&[&[o, z], &[z, -o]]).expect("finite")
    }

    /// `-i sigma`, the anti-Hermitian generator used in every rotation benchmark.
    pub fn minus_i<T: Real>(sigma: &CMatrix<T>) -> CMatrix<T> {
        sigma.scale(c(T::zero(), -T::one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, im};
    use std::f64::consts::PI;

    type M = CMatrix<f64>;

    fn close(a: &M, b: &M, tol: f64) -> bool {
        spectral_norm(&(a - b)) <= tol
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(M::new(2, vec![C::zero(); 3]).is_err());
        assert!(M::new(0, vec![]).is_err());
        assert!(M::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(M::from_rows(vec![vec![C::zero(), C::zero()], vec![C::zero()]]).is_err());
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm(&M::zeros(2)).unwrap();
        assert!(close(&e, &M::identity(2), 1e-15));
    }

    #[test]
    fn expm_of_diagonal() {
        let th = 0.3;
        let m = M::from_diag(&[im(-th), im(th)]).unwrap();
        let want = M::from_diag(&[c(th.cos(), -th.sin()), c(th.cos(), th.sin())]).unwrap();
        assert!(close(&expm(&m).unwrap(), &want, 1e-14));
    }

    #[test]
    fn expm_pauli_rotation() {
        let sx = pauli::x::<f64>();
        let m = sx.scale(im(-PI / 2.0));
        let want = sx.scale(im(-1.0));
        assert!(close(&expm(&m).unwrap(), &want, 1e-13));
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        // exp(diag(5, -3)) exercises several squarings
        let m = M::from_diag(&[c(5.0, 0.0), c(-3.0, 0.0)]).unwrap();
        let e = expm(&m).unwrap();
        assert!((e[(0, 0)].re - 5f64.exp()).abs() < 1e-11 * 5f64.exp());
        assert!((e[(1, 1)].re - (-3f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn logm_identity_and_diagonal() {
        let l = logm_near_identity(&M::identity(3)).unwrap();
        assert!(l.norm_max() < 1e-15);
        let u = M::from_diag(&[c(0.05f64.cos(), 0.05f64.sin()), c(0.05f64.cos(), -0.05f64.sin())]).unwrap();
        let want = M::from_diag(&[im(0.05), im(-0.05)]).unwrap();
        assert!(close(&logm_near_identity(&u).unwrap(), &want, 1e-14));
    }

    #[test]
    fn logm_needs_square_roots_for_moderate_distance() {
        // ||U - I|| = 2 sin(0.35) ~ 0.69, so at least one square root is taken
        let k = M::from_diag(&[im(0.7), im(-0.2)]).unwrap();
        let u = expm(&k).unwrap();
        assert!(close(&logm_near_identity(&u).unwrap(), &k, 1e-12));
    }

    #[test]
    fn logm_out_of_domain() {
        let u = M::from_diag(&[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(logm_near_identity(&u), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn spectral_norm_basics() {
        assert!((spectral_norm(&M::identity(2)) - 1.0).abs() < 1e-15);
        assert!((spectral_norm(&pauli::x::<f64>()) - 1.0).abs() < 1e-15);
        let d = M::from_diag(&[c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((spectral_norm(&d) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn commutator_pauli() {
        let (sx, sz, sy) = (pauli::x::<f64>(), pauli::z::<f64>(), pauli::y::<f64>());
        let got = commutator(&sx, &sz).unwrap();
        assert!(close(&got, &sy.scale(im(-2.0)), 1e-15));
        assert!(commutator(&sx, &sx).unwrap().norm_max() == 0.0);
        let d1 = M::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let d2 = M::from_diag(&[c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!(commutator(&d1, &d2).unwrap().norm_max() == 0.0);
        assert!(matches!(
            commutator(&M::identity(2), &M::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigh_diagonal_and_pauli_x() {
        let d = M::from_diag(&[c(2.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let e = eigh(&d).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);
        assert!((e.vector(0)[1].norm() - 1.0).abs() < 1e-15);

        let e = eigh(&pauli::x::<f64>()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vector(0);
        let s = 1.0 / 2f64.sqrt();
        assert!((v0[0].norm() - s).abs() < 1e-14);
        assert!((inner(&v0, &[c(s, 0.0), c(s, 0.0)])).norm() < 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn eigh_complex_hermitian_residuals() {
        let h = M::from_rows(vec![
            vec![c(1.0, 0.0), c(0.5, 0.3), c(0.0, -0.2)],
            vec![c(0.5, -0.3), c(-0.4, 0.0), c(0.1, 0.1)],
            vec![c(0.0, 0.2), c(0.1, -0.1), c(2.0, 0.0)],
        ])
        .unwrap();
        let e = eigh(&h).unwrap();
        for i in 0..3 {
            let v = e.vector(i);
            let hv = h.mul_vec(&v);
            let resid: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e.values[i]).norm_sqr()).sum();
            assert!(resid.sqrt() < 1e-12);
            for j in 0..3 {
                let o = inner(&v, &e.vector(j)).norm();
                assert!((o - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn inverse_and_singular() {
        let m = M::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let inv = inverse(&m).unwrap();
        assert!(close(&(&m * &inv), &M::identity(2), 1e-15));
        let s = M::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(inverse(&s).is_err());
    }

    #[test]
    fn powi_matches_repeated_product() {
        let m = M::from_real_rows(&[&[0.9, 0.1], &[-0.2, 1.0]]).unwrap();
        let mut acc = M::identity(2);
        for _ in 0..13 {
            acc = &acc * &m;
        }
        assert!(close(&m.powi(13), &acc, 1e-13));
    }

    #[test]
    fn solve_real_small_system() {
        let x = solve_real(vec![vec![2.0f64, 1.0], vec![1.0, -1.0]], vec![3.0, 0.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(solve_real(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn works_in_single_precision() {
        let m = pauli::x::<f32>().scale(im(-0.4f32));
        let u = expm(&m).unwrap();
        let back = logm_near_identity(&u).unwrap();
        assert!(spectral_norm(&(&back - &m)) < 1e-5);
    }
}
