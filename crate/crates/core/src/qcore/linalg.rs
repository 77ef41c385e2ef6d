//! Dense complex matrix primitives: Kronecker products, Hermitian
//! eigendecomposition with deterministic ordering, propagators and polar
//! factors.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entrywise tolerance for Hermitian-flagged matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default cap on any Hilbert-space (or matrix side) dimension.
pub const DEFAULT_MAX_DIM: usize = 4096;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{-i x}`.
#[inline]
pub fn phase(x: f64) -> C64 {
    C64::new(x.cos(), -x.sin())
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product with the default size cap.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kron_limited(a, b, DEFAULT_MAX_DIM)
}

pub fn kron_limited(a: &CMatrix, b: &CMatrix, max_dim: usize) -> Result<CMatrix> {
    let rows = a.nrows().checked_mul(b.nrows()).unwrap_or(usize::MAX);
    let cols = a.ncols().checked_mul(b.ncols()).unwrap_or(usize::MAX);
    let largest = rows.max(cols);
    if largest > max_dim {
        return Err(Error::SizeOverflow {
            requested: largest,
            max: max_dim,
        });
    }
    Ok(a.kronecker(b))
}

/// Kronecker product of vectors (same layout as [`kron`]).
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max_ij |M - M^dagger|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Rejects matrices whose anti-Hermitian part exceeds `tol` (scaled by the
/// entry magnitude when that exceeds one).
pub fn ensure_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let dev = hermiticity_deviation(m);
    if dev > tol * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// `max_ij |U^dagger U - I|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let gram = u.adjoint() * u;
    max_abs(&(gram - identity(u.nrows())))
}

pub fn ensure_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation > tol {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0, |acc, &s| acc.max(s))
}

/// Eigensystem of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order; each eigenvector column has
/// its first component of modulus above `1e-10` made real and positive. Both
/// rules make the decomposition a deterministic function of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// `Q f(Lambda) Q^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let mut col = scaled.column_mut(k);
            col *= f(v);
        }
        scaled * self.vectors.adjoint()
    }
}

const PHASE_PIVOT: f64 = 1e-10;

/// Deterministic Hermitian eigendecomposition. The input is symmetrized
/// before decomposition; callers validate hermiticity separately.
pub fn eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .find(|z| z.norm() > PHASE_PIVOT)
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let rot = pivot.conj() / pivot.norm();
        for r in 0..n {
            vectors[(r, dst)] = col[r] * rot;
        }
    }
    HermitianEigen { values, vectors }
}

/// Eigenbasis of `primary` in which `secondary` is also diagonal, assuming
/// the two commute: degenerate blocks of `primary` (eigenvalues closer than
/// `degeneracy_tol`) are rotated to diagonalize `secondary`. Returns the
/// basis together with the eigenvalues of `primary`.
pub fn joint_eigenbasis(primary: &CMatrix, secondary: &CMatrix, degeneracy_tol: f64) -> HermitianEigen {
    let mut eig = eigh(primary);
    let n = eig.dim();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eig.values[start] - eig.values[end]).abs() <= degeneracy_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = eig.vectors.columns(start, end - start).into_owned();
            let projected = block.adjoint() * secondary * &block;
            let inner = eigh(&projected);
            let rotated = block * &inner.vectors;
            eig.vectors.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }
    eig
}

/// Cached eigendecomposition of a Hermitian generator `h`, yielding
/// `exp(-i h t)` for any `t`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch {
                context: "propagator generator",
                expected: h.nrows(),
                found: h.ncols(),
            });
        }
        ensure_hermitian(h, HERMITIAN_TOL)?;
        Ok(Self { eigen: eigh(h) })
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        self.eigen.map_spectrum(|e| phase(e * t))
    }

    /// `exp(-i h t) v` without forming the full unitary.
    pub fn apply(&self, t: f64, v: &CVector) -> CVector {
        let q = &self.eigen.vectors;
        let mut coeffs = q.ad_mul(v);
        for (z, &e) in coeffs.iter_mut().zip(&self.eigen.values) {
            *z *= phase(e * t);
        }
        q * coeffs
    }
}

/// `exp(-i h t)` via full eigendecomposition.
pub fn herm_propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(Propagator::new(h)?.unitary(t))
}

/// Unitary polar factor `U V^dagger` of `x = U S V^dagger`, the unitary
/// maximizing `Re tr(W^dagger x)`.
pub fn polar_unitary(x: &CMatrix) -> CMatrix {
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("requested left singular vectors");
    let v_t = svd.v_t.expect("requested right singular vectors");
    u * v_t
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}
