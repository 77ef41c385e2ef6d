//! State containers on the A⊗C⊗B layout and multipartite partial traces.

use alloc::format;
use alloc::vec::Vec;

use super::linalg::{c64, eigh, hermiticity_deviation, trace, CMatrix, CVector, DEFAULT_MAX_DIM};
use crate::error::{Error, Result};

/// Subsystem dimensions in the fixed order A, C, B.
///
/// The composite index of `|a, c, b⟩` is `a·(d_C·d_B) + c·d_B + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub a: usize,
    pub c: usize,
    pub b: usize,
}

impl Dims {
    pub fn new(a: usize, c: usize, b: usize) -> Result<Self> {
        Self::with_max(a, c, b, DEFAULT_MAX_DIM)
    }

    pub fn with_max(a: usize, c: usize, b: usize, max_total: usize) -> Result<Self> {
        if a < 2 || c < 2 || b < 2 {
            return Err(Error::InvalidDims(format!(
                "every subsystem needs dimension >= 2, got ({a}, {c}, {b})"
            )));
        }
        let total = a
            .checked_mul(c)
            .and_then(|x| x.checked_mul(b))
            .unwrap_or(usize::MAX);
        if total > max_total {
            return Err(Error::SizeOverflow {
                requested: total,
                max: max_total,
            });
        }
        Ok(Self { a, c, b })
    }

    pub fn total(&self) -> usize {
        self.a * self.c * self.b
    }

    pub fn ac(&self) -> usize {
        self.a * self.c
    }

    pub fn cb(&self) -> usize {
        self.c * self.b
    }

    pub fn factors(&self) -> [usize; 3] {
        [self.a, self.c, self.b]
    }

    #[inline]
    pub fn index(&self, a: usize, c: usize, b: usize) -> usize {
        a * self.c * self.b + c * self.b + b
    }
}

pub const SUBSYSTEM_A: usize = 0;
pub const SUBSYSTEM_C: usize = 1;
pub const SUBSYSTEM_B: usize = 2;

/// Tolerance on `| ‖ψ‖ − 1 |` for state vectors.
pub const STATE_NORM_TOL: f64 = 1e-10;

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { what: "state vector", norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm; rejects the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { what: "state vector", norm });
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[index] = c64(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// Wraps amplitudes known to be normalized by construction (unitary
    /// images of normalized states).
    pub(crate) fn from_unitary_image(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> super::linalg::C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Reduced state on `keep` computed directly from the amplitudes.
    pub fn reduced(&self, factors: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        reduced_from_pure(&self.amplitudes, factors, keep)
    }
}

/// Tolerances applied to density matrices.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
pub const DENSITY_MIN_EIGENVALUE: f64 = -1e-10;

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "not square ({}x{})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = hermiticity_deviation(&matrix);
        if dev > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {} + {}i", tr.re, tr.im)));
        }
        let min = eigh(&matrix).values.last().copied().unwrap_or(0.0);
        if min < DENSITY_MIN_EIGENVALUE {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = psi.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    /// Convex mixture `Σ p_k |ψ_k⟩⟨ψ_k|`.
    pub fn mixture(terms: &[(f64, StateVector)]) -> Result<Self> {
        let dim = terms.first().map(|(_, s)| s.dim()).ok_or_else(|| {
            Error::InvalidArgument("mixture needs at least one term".into())
        })?;
        let mut m = CMatrix::zeros(dim, dim);
        for (p, s) in terms {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "mixture",
                    expected: dim,
                    found: s.dim(),
                });
            }
            let v = s.amplitudes();
            m += (v * v.adjoint()).scale(*p);
        }
        Self::new(m)
    }

    /// Wraps outputs of trace-preserving operations on valid states.
    pub(crate) fn from_valid(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).values
    }
}

fn check_keep(factors: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace needs a non-empty keep set".into()));
    }
    let mut sorted: Vec<usize> = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::InvalidArgument(format!("duplicate factor in keep set {keep:?}")));
    }
    if let Some(&bad) = sorted.iter().find(|&&k| k >= factors.len()) {
        return Err(Error::InvalidArgument(format!(
            "factor index {bad} out of range for {} factors",
            factors.len()
        )));
    }
    Ok(sorted)
}

/// Splits every composite index into (kept index, traced index).
fn split_indices(factors: &[usize], keep: &[usize]) -> (usize, usize, Vec<(usize, usize)>) {
    let total: usize = factors.iter().product();
    let kept_dim: usize = keep.iter().map(|&k| factors[k]).product();
    let traced_dim = total / kept_dim;
    let mut map = Vec::with_capacity(total);
    let mut digits = alloc::vec![0usize; factors.len()];
    for _ in 0..total {
        let (mut ki, mut ti) = (0usize, 0usize);
        for (f, &d) in digits.iter().enumerate() {
            if keep.contains(&f) {
                ki = ki * factors[f] + d;
            } else {
                ti = ti * factors[f] + d;
            }
        }
        map.push((ki, ti));
        for f in (0..factors.len()).rev() {
            digits[f] += 1;
            if digits[f] < factors[f] {
                break;
            }
            digits[f] = 0;
        }
    }
    (kept_dim, traced_dim, map)
}

fn total_dim(factors: &[usize], found: usize) -> Result<usize> {
    let total = factors.iter().try_fold(1usize, |acc, &f| acc.checked_mul(f));
    match total {
        Some(t) if t == found && factors.iter().all(|&f| f > 0) => Ok(t),
        _ => Err(Error::DimensionMismatch {
            context: "partial trace factor product",
            expected: total.unwrap_or(usize::MAX),
            found,
        }),
    }
}

/// Partial trace of an arbitrary operator on `⊗ factors`, keeping `keep`
/// (kept factors stay in their original order).
pub fn partial_trace_operator(m: &CMatrix, factors: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "partial trace (square operator)",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    total_dim(factors, m.nrows())?;
    let keep = check_keep(factors, keep)?;
    let (kept_dim, traced_dim, map) = split_indices(factors, &keep);
    // inverse map: (kept, traced) -> composite
    let mut inverse = alloc::vec![0usize; kept_dim * traced_dim];
    for (idx, &(k, t)) in map.iter().enumerate() {
        inverse[k * traced_dim + t] = idx;
    }
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for r in 0..kept_dim {
        for c in 0..kept_dim {
            let mut acc = c64(0.0, 0.0);
            for t in 0..traced_dim {
                acc += m[(inverse[r * traced_dim + t], inverse[c * traced_dim + t])];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density operator of `rho` on the factors in `keep`.
pub fn partial_trace(rho: &DensityMatrix, factors: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_operator(rho.matrix(), factors, keep).map(DensityMatrix::from_valid)
}

/// Reduced state of a pure vector: reshape to (kept × traced) and form `M M†`.
pub fn reduced_from_pure(psi: &CVector, factors: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    total_dim(factors, psi.len())?;
    let keep = check_keep(factors, keep)?;
    let (kept_dim, traced_dim, map) = split_indices(factors, &keep);
    let mut reshaped = CMatrix::zeros(kept_dim, traced_dim);
    for (idx, &(k, t)) in map.iter().enumerate() {
        reshaped[(k, t)] = psi[idx];
    }
    Ok(DensityMatrix::from_valid(&reshaped * reshaped.adjoint()))
}

/// Applies `op` to the single factor `target` of `⊗ factors`.
pub fn apply_local(psi: &CVector, factors: &[usize], target: usize, op: &CMatrix) -> Result<CVector> {
    total_dim(factors, psi.len())?;
    if target >= factors.len() {
        return Err(Error::InvalidArgument(format!("factor index {target} out of range")));
    }
    let d = factors[target];
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "local operator",
            expected: d,
            found: op.nrows(),
        });
    }
    let inner: usize = factors[target + 1..].iter().product();
    let outer: usize = factors[..target].iter().product();
    let mut out = CVector::zeros(psi.len());
    for o in 0..outer {
        for i in 0..inner {
            for r in 0..d {
                let mut acc = c64(0.0, 0.0);
                for c in 0..d {
                    acc += op[(r, c)] * psi[(o * d + c) * inner + i];
                }
                out[(o * d + r) * inner + i] = acc;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{kron, max_abs};
    use crate::qcore::random::{random_state_vector, rng_from_seed};

    fn bell() -> StateVector {
        let s = 1.0 / 2f64.sqrt();
        StateVector::new(CVector::from_vec(alloc::vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)]))
            .unwrap()
    }

    #[test]
    fn dims_validation() {
        assert!(Dims::new(1, 2, 2).is_err());
        assert!(matches!(Dims::new(16, 16, 17), Err(Error::SizeOverflow { .. })));
        let d = Dims::new(2, 3, 4).unwrap();
        assert_eq!(d.index(1, 2, 3), 23);
    }

    #[test]
    fn product_state_trace_recovers_factor() {
        let mut rng = rng_from_seed(1);
        let a = DensityMatrix::from_pure(&StateVector::new(random_state_vector(2, &mut rng)).unwrap());
        let b = DensityMatrix::maximally_mixed(3);
        let rho = DensityMatrix::new(kron(a.matrix(), b.matrix()).unwrap()).unwrap();
        let ra = partial_trace(&rho, &[2, 3], &[0]).unwrap();
        assert!(max_abs(&(ra.matrix() - a.matrix())) < 1e-14);
        let rb = partial_trace(&rho, &[2, 3], &[1]).unwrap();
        assert!(max_abs(&(rb.matrix() - b.matrix())) < 1e-14);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&bell().density(), &[2, 2], &[0]).unwrap();
        assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = bell().density();
        assert!(matches!(partial_trace(&rho, &[2, 3], &[0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(partial_trace(&rho, &[2, 2], &[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(partial_trace(&rho, &[2, 2], &[2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pure_reduction_matches_operator_trace() {
        let mut rng = rng_from_seed(4);
        let psi = StateVector::new(random_state_vector(12, &mut rng)).unwrap();
        for keep in [&[0usize][..], &[1], &[2], &[0, 2], &[1, 2], &[0, 1]] {
            let a = psi.reduced(&[2, 3, 2], keep).unwrap();
            let b = partial_trace(&psi.density(), &[2, 3, 2], keep).unwrap();
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-14);
        }
    }

    #[test]
    fn keep_order_is_canonical() {
        let mut rng = rng_from_seed(6);
        let psi = StateVector::new(random_state_vector(12, &mut rng)).unwrap();
        let a = psi.reduced(&[2, 3, 2], &[2, 0]).unwrap();
        let b = psi.reduced(&[2, 3, 2], &[0, 2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c64(1.5, 0.0);
        m[(1, 1)] = c64(-0.5, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidDensityMatrix(_))));
    }

    #[test]
    fn apply_local_matches_kron() {
        let mut rng = rng_from_seed(10);
        let psi = random_state_vector(12, &mut rng);
        let g = crate::qcore::random::haar_unitary_with(3, &mut rng);
        let full = kron(&kron(&CMatrix::identity(2, 2), &g).unwrap(), &CMatrix::identity(2, 2)).unwrap();
        let direct = apply_local(&psi, &[2, 3, 2], 1, &g).unwrap();
        assert!((full * &psi - direct).norm() < 1e-14);
    }
}
