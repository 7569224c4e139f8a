//! Dense complex linear algebra for the small (d <= 256) matrices used
//! throughout the crate.
//!
//! Two independent spectral routes are provided: a two-sided cyclic Jacobi
//! solver for Hermitian matrices ([`hermitian_eig`]) and a one-sided
//! (Hestenes) Jacobi iteration for singular values ([`singular_values`]).
//! Tests cross-check one against the other.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Relative tolerance for Hermitian symmetry and eigen-reconstruction.
pub const HERM_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const MAX_SWEEPS: usize = 100;

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
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

    /// Builds a matrix from row-major entries, rejecting wrong lengths,
    /// empty shapes and non-finite components.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix shape {rows}x{cols} has a zero dimension"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "entry ({}, {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// The rank-one matrix `|x><y|`.
    pub fn outer(x: &[Complex64], y: &[Complex64]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
    }

    /// Matrix unit `E_ij` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
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

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_slice_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z.scale(s)).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&z| math::abs(z)).fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.matmul_unchecked(rhs))
    }

    pub(crate) fn matmul_unchecked(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `A^dagger x` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    /// `<x, A y>` with the inner product antilinear in the first slot.
    pub fn sandwich(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        Self::from_fn(rows, cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    /// Largest entry modulus of `A - A^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max(math::abs(self[(i, j)] - self[(j, i)].conj()));
            }
        }
        worst
    }

    /// Upper bound on `||U^dagger U - Id||_inf`; exact whenever the
    /// returned value exceeds `tol`.
    pub fn unitarity_residual(&self, tol: f64) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut gram = self.adjoint().matmul_unchecked(self);
        for i in 0..self.rows {
            gram[(i, i)] -= ONE;
        }
        let frob = gram.frobenius_norm();
        if frob <= tol {
            frob
        } else {
            hermitian_spectral_radius(&gram)
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual(tol) <= tol
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(
                    (self.rows, self.cols),
                    (rhs.rows, rhs.cols),
                    "shape mismatch"
                );
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on incompatible shapes; use [`ComplexMatrix::matmul`] for a
    /// checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        self.matmul_unchecked(rhs)
    }
}

/// `tr(A^dagger B)`.
pub fn trace_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::InvalidInput(format!(
            "trace inner product needs equal shapes, got {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Spectral decomposition `A = sum_k lambda_k v_k v_k^dagger` of a
/// Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianEigen {
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`. Each vector has its
    /// largest-modulus component real and positive.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj() * *lambda;
                }
            }
        }
        out
    }

    /// Index of the eigenvalue of largest modulus; ties go to the most
    /// positive eigenvalue.
    pub fn dominant_index(&self) -> usize {
        let first = 0;
        let last = self.dim() - 1;
        // Eigenvalues are sorted, so the extreme modulus sits at an end.
        if self.eigenvalues[last].abs() > self.eigenvalues[first].abs() {
            last
        } else {
            first
        }
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// `(A + A^dagger)/2` after checking its asymmetry against [`HERM_TOL`].
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let defect = a.hermitian_defect();
    if defect > HERM_TOL * scale {
        return Err(Error::NotHermitian { residual: defect });
    }
    Ok(jacobi_eig(a))
}

/// Jacobi eigensolver on the symmetrized input, no validation.
pub(crate) fn jacobi_eig(a: &ComplexMatrix) -> HermitianEigen {
    let n = a.rows;
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(a[(i, i)].re, 0.0)
        } else {
            (a[(i, j)] + a[(j, i)].conj()).scale(0.5)
        }
    });
    let mut v = ComplexMatrix::identity(n);

    let total = m.frobenius_norm();
    if total > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum();
            if math::sqrt(off) <= 1e-16 * total {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate_hermitian(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<(f64, usize, usize)> = (0..n)
        .map(|k| {
            let col: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
            (m[(k, k)].re, lead_index(&col), k)
        })
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    // Near-degenerate runs are ordered by the position of the leading
    // component so repeated runs produce the same basis.
    let tie = 1e-12 * total.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (order[start].0 - order[end].0).abs() <= tie {
            end += 1;
        }
        order[start..end].sort_by_key(|x| (x.1, x.2));
        start = end;
    }

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for (lambda, _, k) in order {
        let mut col: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
        canonicalize_phase(&mut col);
        eigenvalues.push(lambda);
        eigenvectors.push(col);
    }
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

fn rotate_hermitian(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = m[(p, q)];
    let g_abs = math::abs(g);
    if g_abs == 0.0 {
        return;
    }
    let a = m[(p, p)].re;
    let b = m[(q, q)].re;
    if g_abs <= 1e-300 || g_abs < 1e-18 * (a.abs() + b.abs()) {
        m[(p, q)] = ZERO;
        m[(q, p)] = ZERO;
        return;
    }
    let zeta = (b - a) / (2.0 * g_abs);
    let t = if zeta == 0.0 {
        1.0
    } else {
        zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta))
    };
    let c = 1.0 / math::sqrt(1.0 + t * t);
    let s = t * c;
    let e = g.unscale(g_abs);
    let e_bar = e.conj();
    let n = m.rows;

    // m <- m J with J = [[c, s], [-s e_bar, c e_bar]] on (p, q).
    for k in 0..n {
        let x = m[(k, p)];
        let y = m[(k, q)];
        m[(k, p)] = x.scale(c) - y * e_bar.scale(s);
        m[(k, q)] = x.scale(s) + y * e_bar.scale(c);
    }
    // m <- J^dagger m
    for k in 0..n {
        let x = m[(p, k)];
        let y = m[(q, k)];
        m[(p, k)] = x.scale(c) - y * e.scale(s);
        m[(q, k)] = x.scale(s) + y * e.scale(c);
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(a - t * g_abs, 0.0);
    m[(q, q)] = Complex64::new(b + t * g_abs, 0.0);

    for k in 0..n {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x.scale(c) - y * e_bar.scale(s);
        v[(k, q)] = x.scale(s) + y * e_bar.scale(c);
    }
}

/// First index whose modulus is within round-off of the largest modulus.
fn lead_index(v: &[Complex64]) -> usize {
    let max = v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    v.iter()
        .position(|z| z.norm_sqr() >= max * (1.0 - 1e-10))
        .unwrap_or(0)
}

/// Rotates the global phase so the leading component is real positive.
fn canonicalize_phase(v: &mut [Complex64]) {
    let k = lead_index(v);
    let r = math::abs(v[k]);
    if r > 0.0 {
        let phase = v[k].conj().unscale(r);
        for z in v.iter_mut() {
            *z *= phase;
        }
        v[k] = Complex64::new(v[k].re, 0.0);
    }
}

/// Largest `|lambda|` of a Hermitian matrix.
pub(crate) fn hermitian_spectral_radius(a: &ComplexMatrix) -> f64 {
    let eig = jacobi_eig(a);
    let k = eig.dominant_index();
    eig.eigenvalues[k].abs()
}

/// Singular values in non-increasing order, computed by one-sided Jacobi
/// orthogonalization of the columns. Rectangular input is accepted.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    // Work on whichever orientation has fewer columns.
    let work = if a.cols > a.rows { a.adjoint() } else { a.clone() };
    let (m, n) = (work.rows, work.cols);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..m).map(|i| work[(i, j)]).collect()).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g_abs = math::abs(gamma);
                if g_abs <= 1e-15 * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g_abs);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                let e_bar = gamma.conj().unscale(g_abs);
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let h = *y * e_bar;
                    let xp = *x;
                    *x = xp.scale(c) - h.scale(s);
                    *y = xp.scale(s) + h.scale(c);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| math::sqrt(c.iter().map(|z| z.norm_sqr()).sum()))
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Exponent of a Schatten norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

impl SchattenP {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(SchattenP::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(SchattenP::Finite(p))
        } else {
            Err(Error::param("p", format!("Schatten exponent must lie in [1, inf], got {p}")))
        }
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            SchattenP::Infinity => SchattenP::Finite(1.0),
            SchattenP::Finite(1.0) => SchattenP::Infinity,
            SchattenP::Finite(p) => SchattenP::Finite(p / (p - 1.0)),
        }
    }
}

/// `(sum_i s_i(A)^p)^(1/p)`, or `max_i s_i(A)` for `p = inf`.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    let p = SchattenP::new(p)?;
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "Schatten norms are defined here for square matrices, got {}x{}",
            a.rows, a.cols
        )));
    }
    let sv = singular_values(a)?;
    Ok(schatten_from_singular_values(&sv, p))
}

pub fn schatten_from_singular_values(sv: &[f64], p: SchattenP) -> f64 {
    match p {
        SchattenP::Infinity => sv.iter().copied().fold(0.0, f64::max),
        SchattenP::Finite(1.0) => sv.iter().sum(),
        SchattenP::Finite(2.0) => math::sqrt(sv.iter().map(|s| s * s).sum()),
        SchattenP::Finite(p) => {
            let top = sv.iter().copied().fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            let sum: f64 = sv.iter().map(|s| math::powf(s / top, p)).sum();
            top * math::powf(sum, 1.0 / p)
        }
    }
}

/// Operator (Schatten-infinity) norm.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Householder QR of a square matrix: returns `(Q, R)` with `Q` unitary and
/// `R` upper triangular.
pub fn qr(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::InvalidInput("QR is implemented for square matrices".into()));
    }
    let n = a.rows;
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let norm = math::sqrt((k..n).map(|i| r[(i, k)].norm_sqr()).sum());
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let x0_abs = math::abs(x0);
        let phase = if x0_abs == 0.0 { ONE } else { x0.unscale(x0_abs) };
        let alpha = -phase.scale(norm);
        let mut v: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let v_norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if v_norm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z = z.unscale(v_norm);
        }
        // r <- (I - 2 v v^dagger) r on rows k..n
        for j in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * r[(k + t, j)]).sum();
            let f = dot.scale(2.0);
            for (t, vi) in v.iter().enumerate() {
                r[(k + t, j)] -= vi * f;
            }
        }
        // q <- q (I - 2 v v^dagger) on columns k..n
        for i in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| q[(i, k + t)] * vi).sum();
            let f = dot.scale(2.0);
            for (t, vi) in v.iter().enumerate() {
                q[(i, k + t)] -= f * vi.conj();
            }
        }
        for i in k + 1..n {
            r[(i, k)] = ZERO;
        }
    }
    Ok((q, r))
}

#[cfg(feature = "serde")]
mod wire {
    use alloc::vec::Vec;

    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::ComplexMatrix;

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct MatrixRepr {
        rows: usize,
        cols: usize,
        entries: Vec<[f64; 2]>,
    }

    impl Serialize for ComplexMatrix {
        fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
            MatrixRepr {
                rows: self.rows,
                cols: self.cols,
                entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
            }
            .serialize(serializer)
        }
    }

    impl<'de> Deserialize<'de> for ComplexMatrix {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
            let repr = MatrixRepr::deserialize(deserializer)?;
            let data = repr.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
            ComplexMatrix::from_vec(repr.rows, repr.cols, data).map_err(D::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let a = random_matrix(n, rng);
        (&a + &a.adjoint()).scale_real(0.5)
    }

    fn sigma1() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(ComplexMatrix::from_vec(2, 2, vec![c(0., 0.); 3]).is_err());
        assert!(ComplexMatrix::from_vec(1, 1, vec![c(f64::NAN, 0.)]).is_err());
        assert!(ComplexMatrix::from_vec(0, 1, vec![]).is_err());
    }

    #[test]
    fn singular_values_examples() {
        assert_eq!(singular_values(&ComplexMatrix::identity(3)).unwrap(), vec![1.0, 1.0, 1.0]);
        let sv = singular_values(&ComplexMatrix::from_real_diagonal(&[3.0, -1.0])).unwrap();
        assert_abs_diff_eq!(sv[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sv[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_values_reject_non_finite() {
        let mut a = ComplexMatrix::identity(2);
        a.data[1] = c(f64::INFINITY, 0.0);
        assert!(matches!(singular_values(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn schatten_examples() {
        assert_abs_diff_eq!(schatten_norm(&ComplexMatrix::identity(4), 1.0).unwrap(), 4.0, epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (u, _) = qr(&random_matrix(5, &mut rng)).unwrap();
        assert_abs_diff_eq!(schatten_norm(&u, f64::INFINITY).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(schatten_norm(&u, 0.5), Err(Error::InvalidParameter { .. })));
        assert!(schatten_norm(&u, f64::NAN).is_err());
    }

    #[test]
    fn schatten_two_is_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(6, &mut rng);
        assert_abs_diff_eq!(schatten_norm(&a, 2.0).unwrap(), a.frobenius_norm(), epsilon = 1e-12);
    }

    #[test]
    fn trace_inner_examples() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(trace_inner(&id, &id).unwrap(), c(3.0, 0.0));
        let e01 = ComplexMatrix::unit(2, 0, 1);
        let e10 = ComplexMatrix::unit(2, 1, 0);
        assert_eq!(trace_inner(&e01, &e10).unwrap(), c(0.0, 0.0));
        assert_eq!(trace_inner(&sigma1(), &sigma1()).unwrap(), c(2.0, 0.0));
        assert!(trace_inner(&id, &e01).is_err());
    }

    #[test]
    fn hermitian_eig_examples() {
        let e = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[2.0, -1.0, 0.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![2.0, 0.0, -1.0]);

        let e = hermitian_eig(&sigma1()).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eigenvalues[1], -1.0, epsilon = 1e-15);

        let x = [c(0.5, 0.0), c(0.5, 0.5), c(0.0, -0.5)];
        let e = hermitian_eig(&ComplexMatrix::outer(&x, &x)).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert!(e.eigenvalues[1..].iter().all(|l| l.abs() < 1e-14));
    }

    #[test]
    fn hermitian_eig_rejects_asymmetric() {
        let a = ComplexMatrix::unit(2, 0, 1);
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn hermitian_eig_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 5, 9, 16] {
            let a = random_hermitian(n, &mut rng);
            let e = hermitian_eig(&a).unwrap();
            let scale = operator_norm(&a).unwrap();
            let err = operator_norm(&(&e.reconstruct() - &a)).unwrap();
            assert!(err <= 1e-9 * scale, "n={n} err={err}");
            for i in 0..n {
                for j in 0..n {
                    let dot: Complex64 =
                        e.eigenvectors[i].iter().zip(&e.eigenvectors[j]).map(|(x, y)| x.conj() * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - c(want, 0.0)).norm_sqr().sqrt() < 1e-9);
                }
            }
            let tr: f64 = e.eigenvalues.iter().sum();
            assert_abs_diff_eq!(tr, a.trace().re, epsilon = 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn qr_is_unitary_times_triangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_matrix(7, &mut rng);
        let (q, r) = qr(&a).unwrap();
        assert!(q.unitarity_residual(1e-12) <= 1e-12);
        for i in 0..7 {
            for j in 0..i {
                assert_eq!(r[(i, j)], c(0.0, 0.0));
            }
        }
        assert!((&(&q * &r) - &a).max_abs() < 1e-13);
    }

    #[test]
    fn kron_matches_definition() {
        let a = sigma1();
        let b = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        assert_eq!(k[(0, 3)], c(1.0, 0.0));
        assert_eq!(k[(5, 2)], c(3.0, 0.0));
        assert_eq!(k[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn unitarity_residual_is_exact_above_tolerance() {
        let u = ComplexMatrix::identity(3).scale_real(1.01);
        assert_abs_diff_eq!(u.unitarity_residual(1e-9), 0.0201, epsilon = 1e-12);
    }
}
