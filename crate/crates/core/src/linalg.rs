//! Dense complex matrix kernel.
//!
//! Matrices are square, stored row-major as `Vec<Complex64>`. Sizes in this
//! crate stay at desk scale (side ≤ ~100), so everything is plain `O(n³)`
//! dense arithmetic.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::DensityMatrix;

pub type C64 = Complex64;

pub const HERMITICITY_TOLERANCE: f64 = 1e-9;
pub const PSD_TOLERANCE: f64 = 1e-9;
pub const EIG_RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Largest admissible imaginary part of `tr(ρO)`.
pub const EXPECTATION_IMAG_BOUND: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Dense square complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

/// Wire format: `{"dim": n, "re": [...], "im": [...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::BadShape { dim: j.dim, len: j.re.len().min(j.im.len()) });
        }
        let data = j.re.iter().zip(&j.im).map(|(&re, &im)| C64::new(re, im)).collect();
        ComplexMatrix::from_vec(j.dim, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            dim: m.dim,
            // `+ 0.0` turns −0.0 into 0.0
            re: m.data.iter().map(|z| z.re + 0.0).collect(),
            im: m.data.iter().map(|z| z.im + 0.0).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::BadShape { dim, len: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from rows. Panics if the rows are ragged; intended
    /// for literal constants.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), dim, "ragged matrix literal");
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.as_ref().iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag_real(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        assert_eq!(v.len(), w.len());
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * w[j].conj();
            }
        }
        m
    }

    /// Matrix unit `|row⟩⟨col|`.
    pub fn unit(dim: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(row, col)] = ONE;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `max_{i,j} |M_ij − conj(M_ji)|`
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum()).collect()
    }

    /// Frobenius distance `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Extracts the principal submatrix on `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let n = indices.len();
        let mut m = Self::zeros(n);
        for (r, &ir) in indices.iter().enumerate() {
            for (c, &ic) in indices.iter().enumerate() {
                m[(r, c)] = self[(ir, ic)];
            }
        }
        m
    }

    /// Reorders the basis so that new basis vector `i` is old basis vector
    /// `order[i]`.
    pub fn permute_basis(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: order.len() });
        }
        let mut seen = vec![false; self.dim];
        for &o in order {
            if o >= self.dim || seen[o] {
                return Err(Error::InvalidParameter(format!("not a permutation: {order:?}")));
            }
            seen[o] = true;
        }
        Ok(self.submatrix(order))
    }
}

fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    Ok(())
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

// The operator impls panic on dimension mismatch; fallible callers go
// through `matmul` or check dimensions first.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("dimension mismatch in mul")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Kronecker product: `(a⊗b)[(i·db+k),(j·db+l)] = a[i][j]·b[k][l]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Block-diagonal assembly.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if blocks.is_empty() {
        return Err(Error::InvalidParameter("direct sum of an empty block list".into()));
    }
    let n: usize = blocks.iter().map(|b| b.dim).sum();
    let mut out = ComplexMatrix::zeros(n);
    let mut offset = 0;
    for b in blocks {
        for r in 0..b.dim {
            for c in 0..b.dim {
                out[(offset + r, offset + c)] = b[(r, c)];
            }
        }
        offset += b.dim;
    }
    Ok(out)
}

/// `[a, b] = ab − ba`
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&a.matmul(b)? - &b.matmul(a)?)
}

/// `{a, b} = ab + ba`
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&a.matmul(b)? + &b.matmul(a)?)
}

/// Transpose on the second tensor factor of `C^dim_a ⊗ C^dim_b`.
pub fn partial_transpose(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    check_factorization(m, dim_a, dim_b)?;
    let mut out = ComplexMatrix::zeros(m.dim);
    for i in 0..dim_a {
        for j in 0..dim_a {
            for k in 0..dim_b {
                for l in 0..dim_b {
                    out[(i * dim_b + k, j * dim_b + l)] = m[(i * dim_b + l, j * dim_b + k)];
                }
            }
        }
    }
    Ok(out)
}

/// `tr_B`: reduced operator on the first factor.
pub fn partial_trace_b(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    check_factorization(m, dim_a, dim_b)?;
    let mut out = ComplexMatrix::zeros(dim_a);
    for i in 0..dim_a {
        for j in 0..dim_a {
            out[(i, j)] = (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum();
        }
    }
    Ok(out)
}

/// `tr_A`: reduced operator on the second factor.
pub fn partial_trace_a(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    check_factorization(m, dim_a, dim_b)?;
    let mut out = ComplexMatrix::zeros(dim_b);
    for k in 0..dim_b {
        for l in 0..dim_b {
            out[(k, l)] = (0..dim_a).map(|i| m[(i * dim_b + k, i * dim_b + l)]).sum();
        }
    }
    Ok(out)
}

fn check_factorization(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != m.dim {
        return Err(Error::DimensionMismatch { expected: dim_a * dim_b, found: m.dim });
    }
    Ok(())
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]])
}

/// `n·σ` for a real 3-vector.
pub fn bloch_operator(n: [f64; 3]) -> ComplexMatrix {
    let x = pauli_x().scale_real(n[0]);
    let y = pauli_y().scale_real(n[1]);
    let z = pauli_z().scale_real(n[2]);
    &(&x + &y) + &z
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(v: &[C64], w: &[C64]) -> C64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

/// Hermitian matrix (within `HERMITICITY_TOLERANCE · max(1, ‖M‖_F)`).
///
/// The stored matrix is symmetrised to `(M + M†)/2`, so it is exactly
/// Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let tolerance = HERMITICITY_TOLERANCE * m.frobenius_norm().max(1.0);
        let deviation = m.hermiticity_deviation();
        if deviation > tolerance {
            return Err(Error::NotHermitian { deviation, tolerance });
        }
        let sym = (&m + &m.adjoint()).scale_real(0.5);
        Ok(Self(sym))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn eigensystem(&self) -> EigenSystem {
        hermitian_eigensystem(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigensystem().values[0]
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        HermitianOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// Spectral decomposition with eigenvalues ascending and orthonormal
/// eigenvectors paired by index.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl EigenSystem {
    /// `Σ λ_i v_i v_i†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut m = ComplexMatrix::zeros(n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] += v[r] * v[c].conj() * lambda;
                }
            }
        }
        m
    }

    /// Projector onto the span of eigenvectors whose eigenvalue lies within
    /// `tol` of `lambda`.
    pub fn eigenprojector(&self, lambda: f64, tol: f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut p = ComplexMatrix::zeros(n);
        for (val, v) in self.values.iter().zip(&self.vectors) {
            if (val - lambda).abs() <= tol {
                p = &p + &ComplexMatrix::outer(v, v);
            }
        }
        p
    }
}

/// Full spectral decomposition by cyclic complex Jacobi rotations.
///
/// Deterministic for a fixed input: the sweep order is fixed and ties in
/// the final sort keep the original diagonal order.
pub fn hermitian_eigensystem(h: &HermitianOperator) -> EigenSystem {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|r| v[(r, i)]).collect()).collect();
    EigenSystem { values, vectors }
}

/// Annihilates `a[p][q]` with `U = diag(1, e^{-iφ}) · R(θ)` acting on the
/// `(p, q)` plane, where `a[p][q] = |a_pq| e^{iφ}`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let u00 = C64::new(c, 0.0);
    let u01 = C64::new(s, 0.0);
    let u10 = -phase.conj() * s;
    let u11 = phase.conj() * c;

    let n = a.dim;
    // A ← A U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u00 + akq * u10;
        a[(k, q)] = akp * u01 + akq * u11;
    }
    // A ← U† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u00.conj() * apk + u10.conj() * aqk;
        a[(q, k)] = u01.conj() * apk + u11.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V ← V U
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u00 + vkq * u10;
        v[(k, q)] = vkp * u01 + vkq * u11;
    }
}

/// Returns `(min λ ≥ −PSD_TOLERANCE·max(1, ‖h‖_F), min λ)`.
pub fn is_positive_semidefinite(h: &HermitianOperator) -> (bool, f64) {
    let min = h.min_eigenvalue();
    let bound = -PSD_TOLERANCE * h.matrix().frobenius_norm().max(1.0);
    (min >= bound, min)
}

/// `Re tr(ρ O)`, rejecting inputs whose trace has a non-negligible
/// imaginary part.
pub fn expectation(rho: &DensityMatrix, o: &HermitianOperator) -> Result<f64> {
    trace_product(rho.matrix(), o.matrix())
}

/// `Re tr(a b)` for Hermitian `a`, `b` without forming the product.
pub(crate) fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    let n = a.dim;
    let mut acc = ZERO;
    for r in 0..n {
        for c in 0..n {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    if acc.im.abs() > EXPECTATION_IMAG_BOUND {
        return Err(Error::ComplexExpectation(acc.im));
    }
    Ok(acc.re)
}
