//! Dense complex Hermitian matrices and the spectral functions the quantum
//! solver is built on: eigendecomposition, exponential, logarithm and the
//! directional (Fréchet) derivative of the exponential.
//!
//! Everything here goes through one eigendecomposition. Spectral functions are
//! evaluated as `U·diag(f(k))·U†`, so their accuracy is tied to the accuracy of
//! [`eig`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A `dim × dim` complex Hermitian matrix, stored row-major.
///
/// The constructor checks Hermiticity and then stores the symmetrized matrix
/// `(A + A†)/2`, so diagonal entries are exactly real.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for row in self.entries.chunks(self.dim) {
            list.entry(&row.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>());
        }
        list.finish()
    }
}

impl HermitianMatrix {
    /// Builds a matrix from row-major entries, checking Hermiticity at the
    /// default tolerance.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(dim, entries, Tolerances::default().hermitian)
    }

    pub fn with_tolerance(dim: usize, entries: Vec<Complex64>, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DegenerateInput("matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DegenerateInput("matrix has non-finite entries"));
        }
        for i in 0..dim {
            for j in i..dim {
                let dev = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                if dev > tol {
                    return Err(Error::NotHermitian(dev, i, j));
                }
            }
        }
        Ok(Self::symmetrized(dim, entries))
    }

    /// Stores `(A + A†)/2` without checking how far `A` was from Hermitian.
    pub(crate) fn symmetrized(dim: usize, mut entries: Vec<Complex64>) -> Self {
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(entries[i * dim + i].re, 0.0);
            for j in (i + 1)..dim {
                let avg = (entries[i * dim + j] + entries[j * dim + i].conj()) * 0.5;
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DegenerateInput("matrix rows must form a square"));
        }
        Self::new(dim, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut entries = vec![ZERO; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(v, 0.0);
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn pauli_x() -> Self {
        Self::diagonal(&[0.0, 0.0]).with_entry(0, 1, ONE)
    }

    pub fn pauli_y() -> Self {
        Self::diagonal(&[0.0, 0.0]).with_entry(0, 1, Complex64::new(0.0, -1.0))
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    /// `|ψ⟩⟨ψ|` for the given (not necessarily normalized) vector.
    pub fn outer(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        Self::symmetrized(dim, entries)
    }

    /// Sets entry `(i, j)` and its mirror `(j, i)`.
    fn with_entry(mut self, i: usize, j: usize, z: Complex64) -> Self {
        self.entries[i * self.dim + j] = z;
        self.entries[j * self.dim + i] = z.conj();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.chunks(self.dim).map(<[_]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    /// `tr(A·B)`, which is real for Hermitian `A`, `B`.
    pub fn trace_product(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "trace_product dimension mismatch");
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.entries[i * n + j] * other.entries[j * n + i]).re;
            }
        }
        acc
    }

    /// Plain matrix product, row-major. Not Hermitian in general.
    pub fn matmul(&self, other: &Self) -> Vec<Complex64> {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        mul(self.dim, &self.entries, &other.entries)
    }

    /// `A²`, which stays Hermitian.
    pub fn square(&self) -> Self {
        Self::symmetrized(self.dim, self.matmul(self))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Conjugates by a unitary given row-major: returns `U†·A·U` (as raw entries).
    fn rotate_into(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        mul(n, &adjoint(n, u), &mul(n, &self.entries, u))
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_with(self, &Tolerances::default())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        HermitianMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        HermitianMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl Mul<&HermitianMatrix> for f64 {
    type Output = HermitianMatrix;
    fn mul(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        rhs.scale(self)
    }
}

pub(crate) fn mul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub(crate) fn adjoint(n: usize, a: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

/// Eigenvalues in ascending order with a unitary matrix of eigenvectors
/// (stored row-major, eigenvectors as columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Complex64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `j` of the eigenvector matrix.
    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|i| self.eigenvectors[i * n + j]).collect()
    }

    /// `U·diag(f(k))·U†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> HermitianMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let fk: Vec<f64> = self.eigenvalues.iter().map(|&k| f(k)).collect();
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for (a, &w) in fk.iter().enumerate() {
                    if w != 0.0 {
                        acc += u[i * n + a] * u[j * n + a].conj() * w;
                    }
                }
                out[i * n + j] = acc;
            }
        }
        HermitianMatrix::symmetrized(n, out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|k| k)
    }

    /// Largest elementwise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let g = mul(n, &adjoint(n, &self.eigenvectors), &self.eigenvectors);
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                err = err.max((g[i * n + j] - target).norm());
            }
        }
        err
    }

    /// Rotates a matrix into this eigenbasis: `U†·h·U`.
    pub fn to_eigenbasis(&self, h: &HermitianMatrix) -> Vec<Complex64> {
        h.rotate_into(&self.eigenvectors)
    }

    /// Rotates raw entries back out of the eigenbasis: `U·x·U†`.
    pub fn from_eigenbasis(&self, x: &[Complex64]) -> HermitianMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        HermitianMatrix::symmetrized(n, mul(n, u, &mul(n, x, &adjoint(n, u))))
    }
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies the
/// real symmetric Jacobi rotation that annihilates it.
pub fn eig_with(m: &HermitianMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    let n = m.dim;
    let mut a = m.entries.clone();
    let mut v = HermitianMatrix::identity(n).entries;

    let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = 4.0 * f64::EPSILON * frob;
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = frob == 0.0 || off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= tol.eig_max_sweeps {
            return Err(Error::NumericalFailure(sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let phase = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns p, q of the rotation J.
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                // A <- A·J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * jpp + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * jqq;
                }
                // A <- J†·A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
                // V <- V·J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * jpp + vkq * jqp;
                    v[k * n + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
        converged = off_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut eigenvectors = vec![ZERO; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

pub fn eig(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    eig_with(m, &Tolerances::default())
}

/// `exp(m)` through the eigendecomposition.
pub fn matrix_exp(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_exp_with(m, &Tolerances::default())
}

pub fn matrix_exp_with(m: &HermitianMatrix, tol: &Tolerances) -> Result<HermitianMatrix> {
    let e = eig_with(m, tol)?;
    exp_of_eig(&e, tol)
}

pub fn exp_of_eig(e: &EigenDecomposition, tol: &Tolerances) -> Result<HermitianMatrix> {
    let kmax = e.eigenvalues.last().copied().unwrap_or(0.0);
    if kmax > tol.exp_overflow {
        return Err(Error::Overflow(kmax));
    }
    Ok(e.map(f64::exp))
}

/// Principal logarithm of a positive semidefinite matrix.
///
/// Eigenvalues below `log_zero` map to 0 instead of `-inf`, so contractions
/// like `tr(ρ ln ρ)` follow the `0·ln 0 = 0` convention.
pub fn matrix_log(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_log_with(m, &Tolerances::default())
}

pub fn matrix_log_with(m: &HermitianMatrix, tol: &Tolerances) -> Result<HermitianMatrix> {
    let e = eig_with(m, tol)?;
    if let Some(&kmin) = e.eigenvalues.first() {
        if kmin < -tol.log_negative {
            return Err(Error::NotPositive(kmin));
        }
    }
    let zero = tol.log_zero;
    Ok(e.map(|k| if k < zero { 0.0 } else { k.ln() }))
}

/// Divided difference of `exp`: `(eˣ − eʸ)/(x − y)`, and `exp((x+y)/2)` when
/// the arguments are closer than `rel_tol·max(1, |x|, |y|)`.
pub fn exp_divided_difference(x: f64, y: f64, rel_tol: f64) -> f64 {
    let gap = x - y;
    if gap.abs() <= rel_tol * 1f64.max(x.abs()).max(y.abs()) {
        return (0.5 * (x + y)).exp();
    }
    if gap > 0.0 {
        y.exp() * gap.exp_m1() / gap
    } else {
        x.exp() * (-gap).exp_m1() / (-gap)
    }
}

/// Directional derivative `d/dt exp(m + t·h)` at `t = 0`.
pub fn frechet_exp_directional(m: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    frechet_exp_directional_with(m, h, &Tolerances::default())
}

pub fn frechet_exp_directional_with(
    m: &HermitianMatrix,
    h: &HermitianMatrix,
    tol: &Tolerances,
) -> Result<HermitianMatrix> {
    if m.dim != h.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            found: h.dim,
        });
    }
    let e = eig_with(m, tol)?;
    Ok(frechet_of_eig(&e, h, tol))
}

/// Fréchet derivative of `exp` at the matrix whose decomposition is `e`.
pub fn frechet_of_eig(e: &EigenDecomposition, h: &HermitianMatrix, tol: &Tolerances) -> HermitianMatrix {
    let n = e.dim();
    let mut hr = e.to_eigenbasis(h);
    let k = &e.eigenvalues;
    for a in 0..n {
        for b in 0..n {
            hr[a * n + b] *= exp_divided_difference(k[a], k[b], tol.divided_difference);
        }
    }
    e.from_eigenbasis(&hr)
}
