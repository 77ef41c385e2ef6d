//! DISD model instances: the five-term Hamiltonian with no direct A–B
//! coupling, the robustness block constraint on `h_cb`, and the product
//! initial state `Σ_i α_i |i⟩_A ⊗ |0⟩_C ⊗ |χ⟩_B`.

use alloc::format;

use crate::error::{Error, Result};
use crate::qcore::linalg::{
    c64, eigh, ensure_hermitian, hermitian_part, identity, kron, kron_vec, spectral_norm, CMatrix,
    CVector, HERMITIAN_TOL,
};
use crate::qcore::random::{
    gaussian_hermitian, mix_seed, random_hermitian, random_state_vector, rng_from_seed, tags, uniform_reals,
};
use crate::qcore::state::{Dims, StateVector, STATE_NORM_TOL};

/// Allowed deviation of a stored interaction shape from unit spectral norm.
pub const SHAPE_NORM_TOL: f64 = 1e-9;

/// Default threshold for [`validate_robustness`].
pub const ROBUSTNESS_TOL: f64 = 1e-12;

/// Spectral band of the robust-sector block `B₀` in canonical instances.
pub const ROBUST_BAND: (f64, f64) = (0.2, 1.0);

/// Spectral band of the orthogonal-sector block in canonical instances.
/// Disjoint from [`ROBUST_BAND`], so every canonical `h_cb` has a gap of at
/// least `0.4` between the robust sector and the rest of its spectrum.
pub const PERP_BAND: (f64, f64) = (-1.0, -0.2);

/// The five Hamiltonian terms, before coupling constants are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTerms {
    pub h_a: CMatrix,
    pub h_c: CMatrix,
    pub h_b: CMatrix,
    /// Interaction shape on A⊗C.
    pub h_ac: CMatrix,
    /// Interaction shape on C⊗B.
    pub h_cb: CMatrix,
}

impl ModelTerms {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            h_a: CMatrix::zeros(dims.a, dims.a),
            h_c: CMatrix::zeros(dims.c, dims.c),
            h_b: CMatrix::zeros(dims.b, dims.b),
            h_ac: CMatrix::zeros(dims.ac(), dims.ac()),
            h_cb: CMatrix::zeros(dims.cb(), dims.cb()),
        }
    }

    /// Rescales nonzero interaction shapes to unit spectral norm.
    pub fn normalize_shapes(mut self) -> Self {
        for m in [&mut self.h_ac, &mut self.h_cb] {
            let n = spectral_norm(m);
            if n > 0.0 {
                *m = m.unscale(n);
            }
        }
        self
    }
}

/// A validated model: Hermitian terms of the right shapes, unit-norm (or
/// zero) interaction shapes, `c1 > 0`, `c2 >= 0`.
///
/// The robustness constraint is not enforced here; it is checked where the
/// perturbative construction needs it, so generic explicit models can still
/// be propagated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    dims: Dims,
    terms: ModelTerms,
    c1: f64,
    c2: f64,
    robust_index: usize,
}

fn check_square(m: &CMatrix, dim: usize, context: &'static str) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: dim,
            found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

impl ModelSpec {
    pub fn new(dims: Dims, terms: ModelTerms, c1: f64, c2: f64, robust_index: usize) -> Result<Self> {
        check_square(&terms.h_a, dims.a, "h_a shape")?;
        check_square(&terms.h_c, dims.c, "h_c shape")?;
        check_square(&terms.h_b, dims.b, "h_b shape")?;
        check_square(&terms.h_ac, dims.ac(), "h_ac shape")?;
        check_square(&terms.h_cb, dims.cb(), "h_cb shape")?;
        for m in [&terms.h_a, &terms.h_c, &terms.h_b, &terms.h_ac, &terms.h_cb] {
            ensure_hermitian(m, HERMITIAN_TOL)?;
        }
        for (name, m) in [("h_ac", &terms.h_ac), ("h_cb", &terms.h_cb)] {
            let n = spectral_norm(m);
            if n != 0.0 && (n - 1.0).abs() > SHAPE_NORM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{name} must have spectral norm 1 (or be zero), found {n}"
                )));
            }
        }
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(Error::InvalidArgument(format!("c1 must be positive, got {c1}")));
        }
        if !(c2.is_finite() && c2 >= 0.0) {
            return Err(Error::InvalidArgument(format!("c2 must be non-negative, got {c2}")));
        }
        if robust_index >= dims.c {
            return Err(Error::InvalidArgument(format!(
                "robust index {robust_index} out of range for d_C = {}",
                dims.c
            )));
        }
        Ok(Self {
            dims,
            terms,
            c1,
            c2,
            robust_index,
        })
    }

    /// Same shapes, new coupling constants.
    pub fn with_couplings(&self, c1: f64, c2: f64) -> Result<Self> {
        Self::new(self.dims, self.terms.clone(), c1, c2, self.robust_index)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn terms(&self) -> &ModelTerms {
        &self.terms
    }

    pub fn h_a(&self) -> &CMatrix {
        &self.terms.h_a
    }

    pub fn h_c(&self) -> &CMatrix {
        &self.terms.h_c
    }

    pub fn h_b(&self) -> &CMatrix {
        &self.terms.h_b
    }

    pub fn h_ac(&self) -> &CMatrix {
        &self.terms.h_ac
    }

    pub fn h_cb(&self) -> &CMatrix {
        &self.terms.h_cb
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn robust_index(&self) -> usize {
        self.robust_index
    }

    /// `⟨0|_C h_ac |0⟩_C`, an operator on A (unscaled shape).
    pub fn a0_shape(&self) -> CMatrix {
        let (da, dc, r) = (self.dims.a, self.dims.c, self.robust_index);
        CMatrix::from_fn(da, da, |i, k| self.terms.h_ac[(i * dc + r, k * dc + r)])
    }

    /// `⟨0|_C h_cb |0⟩_C`, an operator on B (unscaled shape).
    pub fn b0_shape(&self) -> CMatrix {
        let (db, r) = (self.dims.b, self.robust_index);
        CMatrix::from_fn(db, db, |j, k| self.terms.h_cb[(r * db + j, r * db + k)])
    }
}

/// Outcome of [`validate_robustness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessReport {
    pub passed: bool,
    /// `max_{j ≠ 0, b, b'} |⟨j, b| h_cb |0, b'⟩|`.
    pub max_violation: f64,
}

/// Checks that `h_cb` cannot move C out of the robust state: every
/// cross-block `⟨j|h_cb|0⟩_C` (j ≠ robust index) must vanish within `tol`.
pub fn validate_robustness(h_cb: &CMatrix, dims: Dims, robust_index: usize, tol: f64) -> Result<RobustnessReport> {
    check_square(h_cb, dims.cb(), "h_cb shape")?;
    if robust_index >= dims.c {
        return Err(Error::InvalidArgument(format!(
            "robust index {robust_index} out of range for d_C = {}",
            dims.c
        )));
    }
    let db = dims.b;
    let mut max_violation: f64 = 0.0;
    for j in (0..dims.c).filter(|&j| j != robust_index) {
        for b in 0..db {
            for bp in 0..db {
                let lower = h_cb[(j * db + b, robust_index * db + bp)].norm();
                let upper = h_cb[(robust_index * db + bp, j * db + b)].norm();
                max_violation = max_violation.max(lower).max(upper);
            }
        }
    }
    Ok(RobustnessReport {
        passed: max_violation <= tol,
        max_violation,
    })
}

/// `Q diag(values) Q^dagger`, with `values` rescaled so the largest
/// magnitude is 1.
fn diagonal_in_basis(basis: &CMatrix, values: &[f64]) -> CMatrix {
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c64(if scale > 0.0 { v / scale } else { 0.0 }, 0.0)),
    ));
    hermitian_part(&(basis * d * basis.adjoint()))
}

/// Embeds `robust` (on B) and `perp` (on the C-sector orthogonal to the
/// robust index, tensored with B) into a block-diagonal operator on C⊗B.
fn block_cb(dims: Dims, robust_index: usize, robust: &CMatrix, perp: &CMatrix) -> CMatrix {
    let db = dims.b;
    let sector = |c: usize| if c < robust_index { c } else { c - 1 };
    let mut out = CMatrix::zeros(dims.cb(), dims.cb());
    for c in 0..dims.c {
        for cp in 0..dims.c {
            for b in 0..db {
                for bp in 0..db {
                    let v = match (c == robust_index, cp == robust_index) {
                        (true, true) => robust[(b, bp)],
                        (false, false) => perp[(sector(c) * db + b, sector(cp) * db + bp)],
                        _ => continue,
                    };
                    out[(c * db + b, cp * db + bp)] = v;
                }
            }
        }
    }
    out
}

/// Seeded instance of the canonical DISD family with robust index 0.
///
/// * `h_cb = |0⟩⟨0| ⊗ B₀ + P⊥ h⊥ P⊥` (robust by construction), with the
///   spectra of `B₀` and `h⊥` confined to [`ROBUST_BAND`] and [`PERP_BAND`];
/// * `h_ac` a generic Hermitian on A⊗C;
/// * `h_a` diagonal in the eigenbasis of `A₀ = ⟨0|h_ac|0⟩`;
/// * `h_c` with `|0⟩_C` as an eigenvector;
/// * `h_b` diagonal in the eigenbasis of `B₀`.
///
/// Every term is normalized to spectral norm 1. The random draws depend only
/// on `(dims, seed)`, so instances differing only in couplings share shapes.
pub fn build_canonical(dims: Dims, seed: u64, c1: f64, c2: f64) -> Result<ModelSpec> {
    let robust_index = 0;
    let stream = |tag| rng_from_seed(mix_seed(seed, tag, 0));

    let b_block = in_band(&random_hermitian(dims.b, &mut stream(tags::B_BLOCK)), ROBUST_BAND);
    let perp = in_band(
        &random_hermitian((dims.c - 1) * dims.b, &mut stream(tags::PERP_BLOCK)),
        PERP_BAND,
    );
    let raw_cb = block_cb(dims, robust_index, &b_block, &perp);
    let h_cb = raw_cb.unscale(spectral_norm(&raw_cb));

    let h_ac = random_hermitian(dims.ac(), &mut stream(tags::H_AC));

    let mut spec = ModelSpec {
        dims,
        terms: ModelTerms::zeros(dims),
        c1,
        c2,
        robust_index,
    };
    spec.terms.h_ac = h_ac;
    spec.terms.h_cb = h_cb;

    let a_basis = eigh(&spec.a0_shape()).vectors;
    spec.terms.h_a = diagonal_in_basis(&a_basis, &uniform_reals(dims.a, &mut stream(tags::H_A)));

    let b_basis = eigh(&spec.b0_shape()).vectors;
    spec.terms.h_b = diagonal_in_basis(&b_basis, &uniform_reals(dims.b, &mut stream(tags::H_B)));

    let mut c_rng = stream(tags::H_C);
    let lambda0 = uniform_reals(1, &mut c_rng)[0];
    let c_perp = gaussian_hermitian(dims.c - 1, &mut c_rng);
    let one = CMatrix::from_element(1, 1, c64(lambda0, 0.0));
    let c_dims = Dims {
        a: dims.a,
        c: dims.c,
        b: 1,
    };
    let raw_c = block_cb(c_dims, robust_index, &one, &c_perp);
    spec.terms.h_c = raw_c.unscale(spectral_norm(&raw_c));

    let ModelSpec { terms, .. } = spec;
    ModelSpec::new(dims, terms, c1, c2, robust_index)
}

/// Affine map of a norm-1 Hermitian `h` into the band `[lo, hi]`.
fn in_band(h: &CMatrix, (lo, hi): (f64, f64)) -> CMatrix {
    let n = h.nrows();
    h.scale((hi - lo) / 2.0) + identity(n).scale((hi + lo) / 2.0)
}

/// `H = h_a⊗I⊗I + I⊗h_c⊗I + I⊗I⊗h_b + c2·(h_ac⊗I_B) + c1·(I_A⊗h_cb)`.
pub fn assemble_hamiltonian(spec: &ModelSpec) -> Result<CMatrix> {
    let d = spec.dims;
    let (ia, ic, ib) = (identity(d.a), identity(d.c), identity(d.b));
    let t = &spec.terms;
    let mut h = kron(&kron(&t.h_a, &ic)?, &ib)?;
    h += kron(&kron(&ia, &t.h_c)?, &ib)?;
    h += kron(&kron(&ia, &ic)?, &t.h_b)?;
    h += kron(&t.h_ac, &ib)?.scale(spec.c2);
    h += kron(&ia, &t.h_cb)?.scale(spec.c1);
    Ok(h)
}

/// Amplitudes for the initial product state.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    alpha: CVector,
    chi: CVector,
    robust_index: usize,
}

impl InitialSpec {
    /// Requires `Σ|α_i|² = 1` and `‖χ‖ = 1` within `1e-10`.
    pub fn new(alpha: CVector, chi: CVector, robust_index: usize) -> Result<Self> {
        for (what, v) in [("alpha", &alpha), ("chi", &chi)] {
            let norm = v.norm();
            if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
                return Err(Error::NotNormalized { what, norm });
            }
        }
        Ok(Self {
            alpha,
            chi,
            robust_index,
        })
    }

    /// Rescales both factors to unit norm first.
    pub fn normalized(alpha: CVector, chi: CVector, robust_index: usize) -> Result<Self> {
        let alpha = StateVector::normalized(alpha)?.into_amplitudes();
        let chi = StateVector::normalized(chi)?.into_amplitudes();
        Self::new(alpha, chi, robust_index)
    }

    pub fn alpha(&self) -> &CVector {
        &self.alpha
    }

    pub fn chi(&self) -> &CVector {
        &self.chi
    }

    pub fn robust_index(&self) -> usize {
        self.robust_index
    }
}

/// Seeded random `α` and `χ` drawn from the `ALPHA` and `CHI` streams of
/// `seed`, with robust index 0.
pub fn random_initial(dims: Dims, seed: u64) -> InitialSpec {
    let alpha = random_state_vector(dims.a, &mut rng_from_seed(mix_seed(seed, tags::ALPHA, 0)));
    let chi = random_state_vector(dims.b, &mut rng_from_seed(mix_seed(seed, tags::CHI, 0)));
    InitialSpec::new(alpha, chi, 0).expect("sampled amplitudes are normalized")
}

/// `|Ψ⟩ = Σ_i α_i |i⟩_A ⊗ |0⟩_C ⊗ |χ⟩_B` in the A, C, B layout.
pub fn initial_state(init: &InitialSpec, dims: Dims) -> Result<StateVector> {
    if init.alpha.len() != dims.a {
        return Err(Error::DimensionMismatch {
            context: "alpha length",
            expected: dims.a,
            found: init.alpha.len(),
        });
    }
    if init.chi.len() != dims.b {
        return Err(Error::DimensionMismatch {
            context: "chi length",
            expected: dims.b,
            found: init.chi.len(),
        });
    }
    let robust = StateVector::basis(dims.c, init.robust_index)?;
    let psi = kron_vec(&kron_vec(&init.alpha, robust.amplitudes()), &init.chi);
    StateVector::new(psi)
}
