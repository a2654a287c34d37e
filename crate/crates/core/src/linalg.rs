//! Dense complex linear algebra for the small matrices used by strategies,
//! measurements and moment computations.
//!
//! Matrices are row-major. Kronecker products use the layout
//! `(A ⊗ B)[(i*p + k), (j*q + l)] = A[i,j] * B[k,l]`, which matches
//! [`StateVector::kron`], so `(A ⊗ B)(u ⊗ v) = Au ⊗ Bv`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major entries; fails on length mismatch or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        ComplexMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Rank-one operator `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Orthogonal projection onto the line spanned by the unit vector `v`.
    pub fn projector(v: &StateVector) -> Self {
        Self::outer(v.amplitudes(), v.amplitudes())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius norm of `self - self*`.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    /// Frobenius norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &ComplexMatrix) -> f64 {
        (&(self * other) - &(other * self)).frobenius_norm()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = ComplexMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Hermitian sandwich `U * self * U*`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> ComplexMatrix {
        &(u * self) * &u.adjoint()
    }

    /// Interleaved `[re, im, re, im, ...]` row-major entries.
    pub fn to_interleaved(&self) -> Vec<f64> {
        self.data.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_interleaved(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != 2 * rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} interleaved values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        let data = values
            .chunks_exact(2)
            .map(|c| C64::new(c[0], c[1]))
            .collect();
        Self::from_vec(rows, cols, data)
    }

    /// Upper-left block copy into a larger zero matrix.
    pub fn direct_sum(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A unit vector in `ℂ^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

pub const STATE_NORM_TOL: f64 = 1e-9;

impl StateVector {
    /// Checks that the amplitudes have unit norm within `1e-9`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        let norm = norm(&amps);
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(StateVector { amps })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n = norm(&amps);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        Ok(StateVector {
            amps: amps.into_iter().map(|z| z / n).collect(),
        })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Standard basis vector `e_index` (0-based).
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        StateVector { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }

    /// `⟨self, other⟩`, linear in the second argument.
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// `⟨M s, s⟩`.
    pub fn expectation(&self, m: &ComplexMatrix) -> C64 {
        inner(&self.amps, &m.mul_vec(&self.amps))
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        self.amps.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_interleaved(values: &[f64]) -> Result<Self> {
        if !values.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(
                "odd number of interleaved amplitude values".into(),
            ));
        }
        Self::new(
            values
                .chunks_exact(2)
                .map(|c| C64::new(c[0], c[1]))
                .collect(),
        )
    }
}

/// `Σ conj(u_i) v_i`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Serialized form: interleaved re/im, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixData {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixData {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.to_interleaved(),
        }
    }
}

impl TryFrom<&MatrixData> for ComplexMatrix {
    type Error = Error;

    fn try_from(d: &MatrixData) -> Result<Self> {
        ComplexMatrix::from_interleaved(d.rows, d.cols, &d.entries)
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: ComplexMatrix,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies a real plane rotation that zeroes it. Only the
/// Hermitian part of the input is used.
pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    assert!(m.is_square(), "eigen-decomposition of a non-square matrix");
    let n = m.rows();
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    if scale > 0.0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r <= 1e-300 {
                        continue;
                    }
                    let phase = apq / r;
                    let alpha = a[(p, p)].re;
                    let beta = a[(q, q)].re;
                    let theta = 0.5 * (2.0 * r).atan2(alpha - beta);
                    let (s, c) = theta.sin_cos();
                    // G = diag(1, conj(phase)) * [[c, -s], [s, c]]
                    let g00 = C64::new(c, 0.0);
                    let g01 = C64::new(-s, 0.0);
                    let g10 = phase.conj() * s;
                    let g11 = phase.conj() * c;

                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * g00 + akq * g10;
                        a[(k, q)] = akp * g01 + akq * g11;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
                        a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
                    }
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * g00 + vkq * g10;
                        v[(k, q)] = vkp * g01 + vkq * g11;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

impl HermitianEigen {
    /// `V f(Λ) V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = self.vectors[(r, j)] * w;
                for c in 0..n {
                    out[(r, c)] += vr * self.vectors[(c, j)].conj();
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.values.len()).map(|r| self.vectors[(r, j)]).collect()
    }
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-tol, 0)` are clamped to zero; anything more negative is an error.
pub fn psd_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m);
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::Indefinite(min));
    }
    Ok(eig.apply(|x| x.max(0.0).sqrt()))
}

/// Largest singular value, from the spectrum of `M* M`.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let gram = &m.adjoint() * m;
    hermitian_eigen(&gram)
        .values
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

/// Outcome of [`power_iteration`].
#[derive(Debug, Clone)]
pub struct PowerIteration {
    pub value: f64,
    pub vector: Vec<C64>,
    pub iterations: usize,
}

/// Power iteration for the dominant eigenpair of a positive semidefinite
/// matrix, warm-started from `start`. Stops after `max_iters` or once
/// `‖Mv − λv‖ ≤ tol·λ`.
pub fn power_iteration(
    m: &ComplexMatrix,
    start: &[C64],
    max_iters: usize,
    tol: f64,
) -> PowerIteration {
    let mut v: Vec<C64> = start.to_vec();
    let n0 = norm(&v);
    if n0 == 0.0 {
        v = vec![ONE; m.rows()];
    }
    let n0 = norm(&v);
    v.iter_mut().for_each(|z| *z /= n0);

    let mut mv = m.mul_vec(&v);
    let mut lambda = inner(&v, &mv).re;
    let mut iterations = 0;
    while iterations < max_iters {
        let residual = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if lambda <= 0.0 || residual <= tol * lambda {
            break;
        }
        let nm = norm(&mv);
        if nm == 0.0 {
            break;
        }
        v = mv.iter().map(|z| z / nm).collect();
        mv = m.mul_vec(&v);
        lambda = inner(&v, &mv).re;
        iterations += 1;
    }
    PowerIteration {
        value: lambda,
        vector: v,
        iterations,
    }
}

fn complex_normal(rng: &mut Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix: i.i.d. entries with `E|z|² = 1`.
pub fn ginibre(dim: usize, rng: &mut Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary(dim: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut col: Vec<C64> = (0..dim).map(|i| g[(i, j)]).collect();
        // two passes keep the basis orthonormal to machine precision
        for _ in 0..2 {
            for prev in &cols {
                let proj = inner(prev, &col);
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= p * proj;
                }
            }
        }
        let n = norm(&col);
        col.iter_mut().for_each(|z| *z /= n);
        cols.push(col);
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Uniformly random unit vector.
pub fn random_state(dim: usize, rng: &mut Rng) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(s) = StateVector::normalized(amps) {
            return s;
        }
    }
}

/// Pauli X, the bit flip.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

/// Pauli Z, the phase flip.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}
