//! Small dense complex matrices.
//!
//! Everything here is sized for Runge–Kutta stage counts (m ≤ 4 in practice),
//! so the algorithms favour clarity over blocking: Gaussian elimination with
//! partial pivoting, cyclic Jacobi for Hermitian spectra, and a shifted QR
//! iteration for the complex Schur form used by [`CMatrix::apply_fn`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use num_traits::Zero;

use crate::error::LinalgError;

pub type C64 = Complex64;

const EPS: f64 = f64::EPSILON;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.n {
            if i > 0 {
                f.write_str("; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        f.write_str("]")
    }
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from real row-major entries.
    ///
    /// Panics if `rows.len()` is not a perfect square.
    pub fn from_real(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n, "expected {n}x{n} entries");
        Self { n, data: rows.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Rank-one matrix `u vᵀ` (no conjugation).
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x.conj()).collect() }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).fold(C64::zero(), |acc, (a, x)| acc + a * x)
            })
            .collect()
    }

    /// `y += self * v`, without allocating.
    pub fn mul_vec_acc(&self, v: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *yi += row.iter().zip(v).fold(C64::zero(), |acc, (a, x)| acc + a * x);
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|x| x.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// LU factorisation with partial pivoting.
    pub fn lu(&self) -> Result<Lu, LinalgError> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, a[i * n + k].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > scale * EPS * 16.0) {
                return Err(LinalgError::Singular { pivot: k });
            }
            if p != k {
                let (top, bottom) = a.split_at_mut(p * n);
                top[k * n..(k + 1) * n].swap_with_slice(&mut bottom[..n]);
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= l * akj;
                }
            }
        }
        Ok(Lu { n, a, perm })
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let lu = self.lu()?;
        let mut inv = Self::zeros(self.n);
        let mut e = vec![C64::zero(); self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|x| *x = C64::zero());
            e[j] = C64::new(1.0, 0.0);
            let col = lu.solve(&e);
            for i in 0..self.n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
        Ok(self.lu()?.solve(b))
    }

    /// Eigenvalues of the Hermitian part `(S + S*)/2`, ascending.
    pub fn hermitian_part_eigenvalues(&self) -> Vec<f64> {
        let h = (self + &self.adjoint()).scale(C64::new(0.5, 0.0));
        hermitian_eigenvalues(&h)
    }

    /// Complex Schur decomposition `self = Q T Q*` with `T` upper triangular.
    pub fn schur(&self) -> Result<Schur, LinalgError> {
        complex_schur(self)
    }

    /// Evaluates the primary matrix function `f(self)`.
    ///
    /// Diagonalises through the Schur form when the eigenvector basis has
    /// condition number below `max_cond`; otherwise falls back to the
    /// Schur–Parlett recurrence on the triangular factor, with divided
    /// differences of clustered eigenvalues taken by contour quadrature.
    /// `min_re` is a left bound of `f`'s half-plane of analyticity, used to
    /// keep those contours inside the domain.
    pub fn apply_fn<E>(
        &self,
        f: &dyn Fn(C64) -> Result<C64, E>,
        max_cond: f64,
        min_re: f64,
    ) -> Result<MatFnResult, MatFnError<E>> {
        let schur = self.schur().map_err(MatFnError::Linalg)?;
        let n = self.n;
        if n == 1 {
            let v = f(schur.t[(0, 0)]).map_err(MatFnError::Eval)?;
            return Ok(MatFnResult { value: Self::diag(&[v]), cond: 1.0, used_schur_parlett: false });
        }
        let evals: Vec<C64> = (0..n).map(|i| schur.t[(i, i)]).collect();
        let fvals = evals.iter().map(|&z| f(z)).collect::<Result<Vec<_>, _>>().map_err(MatFnError::Eval)?;

        if let Some((v, vinv, cond)) = schur.eigenvectors() {
            if cond < max_cond {
                let mut fv = v.clone();
                for i in 0..n {
                    for j in 0..n {
                        fv[(i, j)] *= fvals[j];
                    }
                }
                return Ok(MatFnResult { value: &fv * &vinv, cond, used_schur_parlett: false });
            }
        }

        let ft = parlett(&schur.t, &fvals, f, min_re).map_err(MatFnError::Eval)?;
        let value = &(&schur.q * &ft) * &schur.q.adjoint();
        Ok(MatFnResult { value, cond: f64::INFINITY, used_schur_parlett: true })
    }
}

/// Output of [`CMatrix::apply_fn`].
#[derive(Clone, Debug)]
pub struct MatFnResult {
    pub value: CMatrix,
    /// Frobenius condition number of the eigenvector basis (∞ when the
    /// Schur–Parlett path was taken).
    pub cond: f64,
    pub used_schur_parlett: bool,
}

#[derive(Debug)]
pub enum MatFnError<E> {
    Linalg(LinalgError),
    Eval(E),
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                for j in 0..n {
                    out.data[i * n + j] += aik * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Packed LU factors from [`CMatrix::lu`].
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    a: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.a[i * n + k];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.a[i * n + k];
                let xk = x[k];
                x[i] -= u * xk;
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi, ascending.
///
/// Only the Hermitian part of the input is read (upper triangle mirrored),
/// so round-off asymmetry in the caller's construction is harmless.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.dim();
    let mut a = CMatrix::from_fn(n, |i, j| {
        if i == j {
            C64::new(h[(i, i)].re, 0.0)
        } else if i < j {
            (h[(i, j)] + h[(j, i)].conj()) * 0.5
        } else {
            (h[(j, i)] + h[(i, j)].conj()).conj() * 0.5
        }
    });
    let total = a.norm_fro();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= EPS * 0.5 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = -theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { -1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, -s], [s, c]] acting on columns p, q.
                let u = [[C64::new(c, 0.0), C64::new(-s, 0.0)], [phase.conj() * s, phase.conj() * c]];
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * u[0][0] + y * u[1][0];
                    a[(i, q)] = x * u[0][1] + y * u[1][1];
                }
                for j in 0..n {
                    let x = a[(p, j)];
                    let y = a[(q, j)];
                    a[(p, j)] = u[0][0].conj() * x + u[1][0].conj() * y;
                    a[(q, j)] = u[0][1].conj() * x + u[1][1].conj() * y;
                }
                a[(p, q)] = C64::zero();
                a[(q, p)] = C64::zero();
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

/// Complex Schur factors `A = Q T Q*`.
#[derive(Clone, Debug)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    /// Eigenvector basis `V` (unit columns), its inverse and `‖V‖_F‖V⁻¹‖_F`.
    /// `None` when the triangular back-substitution breaks down on a repeated
    /// eigenvalue.
    pub fn eigenvectors(&self) -> Option<(CMatrix, CMatrix, f64)> {
        let n = self.t.dim();
        let t = &self.t;
        let scale = t.max_abs().max(f64::MIN_POSITIVE);
        let mut vt = CMatrix::zeros(n);
        for k in 0..n {
            let lambda = t[(k, k)];
            vt[(k, k)] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut s = C64::zero();
                for j in i + 1..=k {
                    s += t[(i, j)] * vt[(j, k)];
                }
                let d = t[(i, i)] - lambda;
                if d.norm() <= scale * EPS * 64.0 {
                    return None;
                }
                vt[(i, k)] = -s / d;
            }
        }
        let mut v = &self.q * &vt;
        for k in 0..n {
            let nrm = (0..n).map(|i| v[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..n {
                v[(i, k)] /= nrm;
            }
        }
        let vinv = v.inverse().ok()?;
        let cond = v.norm_fro() * vinv.norm_fro() / n as f64;
        Some((v, vinv, cond))
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G·[x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, C64::zero());
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let nrm = ax.hypot(ay);
    let c = ax / nrm;
    let s = (x / ax) * y.conj() / nrm;
    (c, s)
}

fn complex_schur(a: &CMatrix) -> Result<Schur, LinalgError> {
    let n = a.dim();
    let mut t = a.clone();
    let mut q = CMatrix::identity(n);
    if n <= 1 {
        return Ok(Schur { q, t });
    }

    // Hessenberg reduction by Givens rotations.
    for k in 0..n.saturating_sub(2) {
        for i in (k + 2..n).rev() {
            let (c, s) = givens(t[(i - 1, k)], t[(i, k)]);
            rotate_rows(&mut t, i - 1, c, s, 0);
            rotate_cols(&mut t, i - 1, c, s, n);
            rotate_cols(&mut q, i - 1, c, s, n);
            t[(i, k)] = C64::zero();
        }
    }

    let norm = t.norm_fro().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if sub <= EPS * if diag > 0.0 { diag } else { norm } {
                t[(l, l - 1)] = C64::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(LinalgError::NoConvergence);
        }

        let mu = if iter % 11 == 10 {
            // exceptional shift
            t[(hi, hi)] + C64::new(t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };

        for k in l..=hi {
            t[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            rotate_rows(&mut t, k, c, s, k);
            t[(k + 1, k)] = C64::zero();
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let rows = (k + 2).min(hi + 1);
            rotate_cols(&mut t, k, c, s, rows);
            rotate_cols(&mut q, k, c, s, n);
        }
        for k in l..=hi {
            t[(k, k)] += mu;
        }
    }
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = C64::zero();
        }
    }
    Ok(Schur { q, t })
}

/// Rows `k, k+1` ← G · rows, for columns `from..n`.
fn rotate_rows(m: &mut CMatrix, k: usize, c: f64, s: C64, from: usize) {
    for j in from..m.dim() {
        let x = m[(k, j)];
        let y = m[(k + 1, j)];
        m[(k, j)] = x * c + s * y;
        m[(k + 1, j)] = -s.conj() * x + y * c;
    }
}

/// Columns `k, k+1` ← columns · G*, for rows `0..rows`.
fn rotate_cols(m: &mut CMatrix, k: usize, c: f64, s: C64, rows: usize) {
    for i in 0..rows {
        let x = m[(i, k)];
        let y = m[(i, k + 1)];
        m[(i, k)] = x * c + y * s.conj();
        m[(i, k + 1)] = -x * s + y * c;
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Schur–Parlett evaluation on an upper-triangular `t` via the path-sum
/// representation `F_ij = Σ T_{k0k1}…T_{k(p-1)kp} f[λ_k0,…,λ_kp]` over
/// increasing index paths from `i` to `j`.
fn parlett<E>(t: &CMatrix, fvals: &[C64], f: &dyn Fn(C64) -> Result<C64, E>, min_re: f64) -> Result<CMatrix, E> {
    let n = t.dim();
    let evals: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut out = CMatrix::zeros(n);
    for i in 0..n {
        out[(i, i)] = fvals[i];
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut acc = C64::zero();
            let mut path = vec![i];
            path_sum(t, &evals, fvals, f, min_re, &mut path, j, C64::new(1.0, 0.0), &mut acc)?;
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn path_sum<E>(
    t: &CMatrix,
    evals: &[C64],
    fvals: &[C64],
    f: &dyn Fn(C64) -> Result<C64, E>,
    min_re: f64,
    path: &mut Vec<usize>,
    target: usize,
    weight: C64,
    acc: &mut C64,
) -> Result<(), E> {
    let last = *path.last().expect("non-empty path");
    for next in last + 1..=target {
        let w = weight * t[(last, next)];
        if w == C64::zero() {
            continue;
        }
        path.push(next);
        if next == target {
            let pts: Vec<C64> = path.iter().map(|&k| evals[k]).collect();
            let vals: Vec<C64> = path.iter().map(|&k| fvals[k]).collect();
            *acc += w * divided_difference(&pts, &vals, f, min_re)?;
        } else {
            path_sum(t, evals, fvals, f, min_re, path, target, w, acc)?;
        }
        path.pop();
    }
    Ok(())
}

/// Divided difference `f[z_0, …, z_p]`. Uses the recursive definition for
/// well-separated nodes and the Cauchy integral
/// `(1/2πi) ∮ f(z) / Π(z - z_k) dz` (trapezoidal rule) for clusters.
fn divided_difference<E>(pts: &[C64], vals: &[C64], f: &dyn Fn(C64) -> Result<C64, E>, min_re: f64) -> Result<C64, E> {
    let p = pts.len();
    let scale = pts.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut min_gap = f64::INFINITY;
    for a in 0..p {
        for b in a + 1..p {
            min_gap = min_gap.min((pts[a] - pts[b]).norm());
        }
    }
    if min_gap > 1e-3 * scale {
        let mut table = vals.to_vec();
        for level in 1..p {
            for k in (level..p).rev() {
                table[k] = (table[k] - table[k - 1]) / (pts[k] - pts[k - level]);
            }
        }
        return Ok(table[p - 1]);
    }
    let center: C64 = pts.iter().sum::<C64>() / p as f64;
    let spread = pts.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let mut radius = (4.0 * spread).max(1e-2 * scale);
    if center.re - radius <= min_re {
        radius = 0.5 * (center.re - min_re).max(4.0 * spread);
    }
    let nodes = 64;
    let mut acc = C64::zero();
    for k in 0..nodes {
        let e = C64::from_polar(1.0, core::f64::consts::TAU * k as f64 / nodes as f64);
        let z = center + e * radius;
        let denom = pts.iter().fold(C64::new(1.0, 0.0), |d, &zk| d * (z - zk));
        acc += f(z)? * e * radius / denom;
    }
    Ok(acc / nodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverse_roundtrip() {
        let a = CMatrix::from_fn(3, |i, j| c((i * 3 + j) as f64 + 1.0, (i as f64) - (j as f64) * 0.5));
        let a = &a + &CMatrix::identity(3).scale(c(4.0, 0.0));
        let inv = a.inverse().unwrap();
        let err = (&(&a * &inv) - &CMatrix::identity(3)).norm_fro();
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = CMatrix::from_real(2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(a.inverse(), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn jacobi_matches_closed_form_2x2() {
        // [[2, 1+i], [1-i, 3]]: eigenvalues (5 ± sqrt(9))/2 = 1, 4
        let h = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(2.0, 0.0),
            (0, 1) => c(1.0, 1.0),
            (1, 0) => c(1.0, -1.0),
            _ => c(3.0, 0.0),
        });
        let ev = hermitian_eigenvalues(&h);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 4.0).abs() < 1e-14, "{ev:?}");
    }

    #[test]
    fn jacobi_trace_and_det_3x3() {
        let g = CMatrix::from_fn(3, |i, j| c((i + 2 * j) as f64 * 0.3 - 0.4, (i as f64 - j as f64) * 0.7));
        let h = (&g + &g.adjoint()).scale(c(0.5, 0.0));
        let ev = hermitian_eigenvalues(&h);
        let tr: f64 = ev.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-13);
        let fro: f64 = ev.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((fro - h.norm_fro()).abs() < 1e-13);
    }

    #[test]
    fn schur_reconstructs() {
        let a = CMatrix::from_fn(3, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 1.5, ((i + j) % 3) as f64 * 0.25));
        let s = a.schur().unwrap();
        let back = &(&s.q * &s.t) * &s.q.adjoint();
        assert!((&back - &a).norm_fro() < 1e-13 * a.norm_fro());
        let unit = (&(&s.q.adjoint() * &s.q) - &CMatrix::identity(3)).norm_fro();
        assert!(unit < 1e-14);
        for i in 1..3 {
            for j in 0..i {
                assert_eq!(s.t[(i, j)], C64::zero());
            }
        }
    }

    #[test]
    fn matrix_function_of_diagonalisable_matrix() {
        // f(z) = 1/z must reproduce the inverse.
        let a = CMatrix::from_real(2, &[3.0, 1.0, -9.0, 5.0]).scale(c(0.5, 0.0));
        let f = |z: C64| -> Result<C64, ()> { Ok(z.inv()) };
        let r = a.apply_fn(&f, 1e6, f64::NEG_INFINITY).unwrap();
        assert!(!r.used_schur_parlett);
        let err = (&r.value - &a.inverse().unwrap()).norm_fro();
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn matrix_function_of_jordan_block_uses_parlett() {
        // J = [[2, 1], [0, 2]] → exp(J) = e² [[1, 1], [0, 1]]
        let j = CMatrix::from_real(2, &[2.0, 1.0, 0.0, 2.0]);
        let f = |z: C64| -> Result<C64, ()> { Ok(z.exp()) };
        let r = j.apply_fn(&f, 1e6, f64::NEG_INFINITY).unwrap();
        assert!(r.used_schur_parlett);
        let e2 = 2f64.exp();
        let expect = CMatrix::from_real(2, &[e2, e2, 0.0, e2]);
        assert!((&r.value - &expect).norm_fro() < 1e-11 * e2, "{:?}", r.value);
    }

    #[test]
    fn parlett_agrees_with_diagonalisation() {
        let a = CMatrix::from_fn(3, |i, j| {
            c(((i * 5 + j * 2) % 7) as f64 * 0.3 + if i == j { 2.0 } else { 0.0 }, 0.1 * j as f64)
        });
        let f = |z: C64| -> Result<C64, ()> { Ok(C64::new(1.0, 0.0) + z.inv()) };
        let diag = a.apply_fn(&f, 1e6, 0.0).unwrap();
        let parl = a.apply_fn(&f, 0.0, 0.0).unwrap();
        assert!(parl.used_schur_parlett);
        assert!((&diag.value - &parl.value).norm_fro() < 1e-12);
    }
}
