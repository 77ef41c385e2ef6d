//! Exact unitary evolution of the tripartite state and the perturbative
//! product-form approximation.
//!
//! The approximation treats `H₀ = c1·(I_A⊗h_cb)` as the unperturbed operator
//! and `V = c2·(h_ac⊗I_B)` as the perturbation. For the unperturbed level
//! `|i⟩_A ⊗ |0⟩_C ⊗ |j⟩_B` (with `|i⟩` an eigenvector of
//! `A₀ = ⟨0|h_ac|0⟩` and `|j⟩` an eigenvector of `B₀ = ⟨0|h_cb|0⟩`) the
//! state picks up the phases
//!
//! ```text
//! ⟨i|h_a|i⟩ + λ⁽¹⁾_i + λ₀ + E⁽⁰⁾_j + ⟨j|h_b|j⟩ + λ_ij
//! ```
//!
//! where `λ⁽¹⁾_i = c2·a_i` is the first-order shift, `λ₀ = ⟨0|h_c|0⟩`,
//! `E⁽⁰⁾_j = c1·b_j`, and `λ_ij` is the second-order Rayleigh–Schrödinger
//! correction. Because `λ_ij` depends on both `i` and `j`, the truncated
//! state is A–B correlated unless the table is `i`-independent.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{assemble_hamiltonian, initial_state, validate_robustness, InitialSpec, ModelSpec, ROBUSTNESS_TOL};
use crate::qcore::linalg::{c64, commutator, joint_eigenbasis, max_abs, phase, CMatrix, CVector, Propagator};
use crate::qcore::state::{Dims, StateVector};

/// Maximum tolerated `| ‖ψ(t)‖ − 1 |` before propagation is declared failed.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

/// Default tolerance on the commutation constraints checked by
/// [`perturbation_data`].
pub const COMMUTATOR_TOL: f64 = 1e-8;

/// Default gap tolerance, as a multiple of `c1`.
pub const GAP_TOL_FACTOR: f64 = 1e-8;

/// Eigenvalues of unit-norm shapes closer than this are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;

fn validate_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("times must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Uniform grid of `steps` points on `[0, t_max]`, both endpoints included.
pub fn uniform_times(t_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..steps)
            .map(|k| if k + 1 == steps { t_max } else { t_max * k as f64 / (steps - 1) as f64 })
            .collect(),
    }
}

/// States along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dims: Dims,
    times: Vec<f64>,
    states: Vec<StateVector>,
}

impl Trajectory {
    pub fn new(dims: Dims, times: Vec<f64>, states: Vec<StateVector>) -> Result<Self> {
        validate_times(&times)?;
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                context: "trajectory length",
                expected: times.len(),
                found: states.len(),
            });
        }
        if let Some(s) = states.iter().find(|s| s.dim() != dims.total()) {
            return Err(Error::DimensionMismatch {
                context: "trajectory state",
                expected: dims.total(),
                found: s.dim(),
            });
        }
        Ok(Self { dims, times, states })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &StateVector)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// Anything that maps an initial state and a time to a final state.
pub trait Dynamics {
    fn dims(&self) -> Dims;
    fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector>;
}

fn check_state_dim(dims: Dims, psi: &StateVector) -> Result<()> {
    if psi.dim() != dims.total() {
        return Err(Error::DimensionMismatch {
            context: "state dimension",
            expected: dims.total(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// Exact evolution under the assembled model Hamiltonian. The
/// eigendecomposition is computed once; the value is immutable and may be
/// shared between threads.
#[derive(Debug, Clone)]
pub struct Evolution {
    spec: ModelSpec,
    hamiltonian: CMatrix,
    propagator: Propagator,
}

impl Evolution {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let hamiltonian = assemble_hamiltonian(spec)?;
        let propagator = Propagator::new(&hamiltonian)?;
        Ok(Self {
            spec: spec.clone(),
            hamiltonian,
            propagator,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn energy(&self, psi: &StateVector) -> f64 {
        let v = psi.amplitudes();
        v.dotc(&(&self.hamiltonian * v)).re
    }

    /// `exp(−iHt)|ψ₀⟩`.
    pub fn state_at(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        check_state_dim(self.spec.dims(), psi0)?;
        let out = self.propagator.apply(t, psi0.amplitudes());
        let drift = (out.norm() - 1.0).abs();
        if !(drift <= NORM_DRIFT_TOL) {
            return Err(Error::NormDrift {
                drift,
                tol: NORM_DRIFT_TOL,
            });
        }
        Ok(StateVector::from_unitary_image(out))
    }

    pub fn propagate(&self, psi0: &StateVector, times: &[f64]) -> Result<Trajectory> {
        validate_times(times)?;
        let states = times
            .iter()
            .map(|&t| self.state_at(psi0, t))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.spec.dims(), times.to_vec(), states)
    }

    /// Phase-aligned distance between the exact state and the truncated
    /// product form at time `t`.
    pub fn residual_eq4(&self, init: &InitialSpec, pd: &PerturbationData, t: f64) -> Result<f64> {
        let approx = eq4_approx(&self.spec, init, pd, t)?;
        let psi0 = initial_state(init, self.spec.dims())?;
        let exact = self.state_at(&psi0, t)?;
        Ok(phase_aligned_distance(&exact, &approx))
    }
}

impl Dynamics for Evolution {
    fn dims(&self) -> Dims {
        self.spec.dims()
    }

    fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        self.state_at(psi0, t)
    }
}

/// A single global unitary applied once; the time label is ignored.
#[derive(Debug, Clone)]
pub struct OneShotUnitary {
    dims: Dims,
    unitary: CMatrix,
}

impl OneShotUnitary {
    pub fn new(dims: Dims, unitary: CMatrix) -> Result<Self> {
        if unitary.nrows() != dims.total() || unitary.ncols() != dims.total() {
            return Err(Error::DimensionMismatch {
                context: "one-shot unitary",
                expected: dims.total(),
                found: unitary.nrows(),
            });
        }
        crate::qcore::linalg::ensure_unitary(&unitary, 1e-9)?;
        Ok(Self { dims, unitary })
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }
}

impl Dynamics for OneShotUnitary {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn evolve(&self, psi0: &StateVector, _t: f64) -> Result<StateVector> {
        check_state_dim(self.dims, psi0)?;
        Ok(StateVector::from_unitary_image(&self.unitary * psi0.amplitudes()))
    }
}

/// `states[k] = exp(−iH t_k)|ψ₀⟩`.
pub fn propagate(spec: &ModelSpec, psi0: &StateVector, times: &[f64]) -> Result<Trajectory> {
    Evolution::new(spec)?.propagate(psi0, times)
}

/// `min_φ ‖a − e^{iφ} b‖`, which equals `√(2 − 2|⟨b|a⟩|)` for unit
/// vectors. Evaluated as the norm of the phase-aligned difference: the
/// closed form loses everything below ~1e-8 to cancellation.
pub fn phase_aligned_distance(a: &StateVector, b: &StateVector) -> f64 {
    let overlap = b.inner(a);
    let m = overlap.norm();
    let rot = if m > 0.0 { overlap / m } else { c64(1.0, 0.0) };
    (a.amplitudes() - b.amplitudes() * rot).norm()
}

/// A skipped near-zero denominator in the second-order sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapWarning {
    /// A level (index into the A₀ eigenbasis).
    pub i: usize,
    /// B level (index into the B₀ eigenbasis).
    pub j: usize,
    /// Index of the offending level in the orthogonal C-sector spectrum.
    pub level: usize,
    pub gap: f64,
}

/// Tolerances used by [`perturbation_data_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationOptions {
    /// Absolute gap below which a denominator is skipped; `None` means
    /// `1e-8 · c1`.
    pub gap_tol: Option<f64>,
    pub commutator_tol: f64,
    pub robustness_tol: f64,
}

impl Default for PerturbationOptions {
    fn default() -> Self {
        Self {
            gap_tol: None,
            commutator_tol: COMMUTATOR_TOL,
            robustness_tol: ROBUSTNESS_TOL,
        }
    }
}

/// Bases, phases and second-order corrections of the product form.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationData {
    dims: Dims,
    c1: f64,
    c2: f64,
    robust_index: usize,
    /// Columns `|i⟩_A`, eigenvectors of `A₀` (descending eigenvalue).
    pub a_basis: CMatrix,
    /// `λ⁽¹⁾_i = c2 · a_i`.
    pub lambda1: Vec<f64>,
    /// Columns `|j⟩_B`, eigenvectors of `B₀` (descending eigenvalue).
    pub b_basis: CMatrix,
    /// `E⁽⁰⁾_j = c1 · b_j`.
    pub e0: Vec<f64>,
    /// `⟨0|h_c|0⟩`.
    pub lambda0: f64,
    /// Row-major `d_A × d_B` table of `λ_ij`.
    pub lambda_i0j: Vec<f64>,
    /// `max |λ_ij|`.
    pub lambda_sup: f64,
    pub h_a_diag: Vec<f64>,
    pub h_b_diag: Vec<f64>,
    pub gap_warnings: Vec<GapWarning>,
}

impl PerturbationData {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.lambda_i0j[i * self.dims.b + j]
    }

    fn check_matches(&self, spec: &ModelSpec) -> Result<()> {
        if self.dims != spec.dims() {
            return Err(Error::PerturbationMismatch("dims"));
        }
        if self.c1 != spec.c1() || self.c2 != spec.c2() {
            return Err(Error::PerturbationMismatch("couplings"));
        }
        if self.robust_index != spec.robust_index() {
            return Err(Error::PerturbationMismatch("robust index"));
        }
        Ok(())
    }
}

pub fn perturbation_data(spec: &ModelSpec) -> Result<PerturbationData> {
    perturbation_data_with(spec, PerturbationOptions::default())
}

/// Validates the structural assumptions and computes the product-form data.
///
/// Requirements: robust `h_cb`; `h_a` commuting with `A₀`; `h_b` commuting
/// with `B₀`; `|0⟩_C` an eigenvector of `h_c`. Only levels in the C-sector
/// orthogonal to `|0⟩` enter the second-order sum: within the robust sector
/// `V` is diagonal in the chosen bases, so those terms vanish identically.
pub fn perturbation_data_with(spec: &ModelSpec, opts: PerturbationOptions) -> Result<PerturbationData> {
    let dims = spec.dims();
    let (da, dc, db) = (dims.a, dims.c, dims.b);
    let r = spec.robust_index();
    let (c1, c2) = (spec.c1(), spec.c2());

    let robust = validate_robustness(spec.h_cb(), dims, r, opts.robustness_tol)?;
    if !robust.passed {
        return Err(Error::RobustnessViolation {
            violation: robust.max_violation,
            tol: opts.robustness_tol,
        });
    }

    let a0 = spec.a0_shape();
    let b0 = spec.b0_shape();
    let check = |which, norm: f64| {
        if norm > opts.commutator_tol {
            Err(Error::CommutatorViolation {
                which,
                norm,
                tol: opts.commutator_tol,
            })
        } else {
            Ok(())
        }
    };
    check("max |[h_a, A0]|", max_abs(&commutator(spec.h_a(), &a0)))?;
    check("max |[h_b, B0]|", max_abs(&commutator(spec.h_b(), &b0)))?;
    let lambda0 = spec.h_c()[(r, r)].re;
    let leak = (0..dc)
        .filter(|&c| c != r)
        .fold(0.0f64, |acc, c| acc.max(spec.h_c()[(c, r)].norm()));
    check("max |<j|h_c|0>| (j != 0)", leak)?;

    let a_eig = joint_eigenbasis(&a0, spec.h_a(), DEGENERACY_TOL);
    let b_eig = joint_eigenbasis(&b0, spec.h_b(), DEGENERACY_TOL);
    let h_a_diag: Vec<f64> = (0..da)
        .map(|i| {
            let v = a_eig.vectors.column(i);
            v.dotc(&(spec.h_a() * v)).re
        })
        .collect();
    let h_b_diag: Vec<f64> = (0..db)
        .map(|j| {
            let v = b_eig.vectors.column(j);
            v.dotc(&(spec.h_b() * v)).re
        })
        .collect();

    // Orthogonal-sector block of h_cb and its eigensystem.
    let perp_c: Vec<usize> = (0..dc).filter(|&c| c != r).collect();
    let np = perp_c.len() * db;
    let perp_block = CMatrix::from_fn(np, np, |x, y| {
        let (cx, bx) = (perp_c[x / db], x % db);
        let (cy, by) = (perp_c[y / db], y % db);
        spec.h_cb()[(cx * db + bx, cy * db + by)]
    });
    let perp_eig = crate::qcore::linalg::eigh(&perp_block);

    let gap_tol = opts.gap_tol.unwrap_or(GAP_TOL_FACTOR * c1);
    let spread = {
        let all = b_eig.values.iter().chain(perp_eig.values.iter());
        let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        c1 * (hi - lo)
    };
    if c2 > 0.0 && spread < gap_tol {
        return Err(Error::DegenerateSpectrum { spread });
    }

    let mut lambda_i0j = alloc::vec![0.0; da * db];
    let mut gap_warnings = Vec::new();
    for i in 0..da {
        // X[a, c] = (h_ac (|i⟩ ⊗ |0⟩))[a·d_C + c]
        let mut seed = CVector::zeros(dims.ac());
        for a in 0..da {
            seed[a * dc + r] = a_eig.vectors[(a, i)];
        }
        let x = spec.h_ac() * seed;
        for j in 0..db {
            let mut acc = 0.0;
            for n in 0..np {
                let gap = c1 * (b_eig.values[j] - perp_eig.values[n]);
                // Φ[c] = Σ_b conj(φ_n[c, b]) ⟨b|j⟩ over orthogonal-sector c
                let mut y_norm_sqr = 0.0;
                for a in 0..da {
                    let mut y = c64(0.0, 0.0);
                    for (slot, &c) in perp_c.iter().enumerate() {
                        let mut phi = c64(0.0, 0.0);
                        for b in 0..db {
                            phi += perp_eig.vectors[(slot * db + b, n)].conj() * b_eig.vectors[(b, j)];
                        }
                        y += x[a * dc + c] * phi;
                    }
                    y_norm_sqr += y.norm_sqr();
                }
                if gap.abs() < gap_tol {
                    gap_warnings.push(GapWarning { i, j, level: n, gap });
                    continue;
                }
                acc += c2 * c2 * y_norm_sqr / gap;
            }
            lambda_i0j[i * db + j] = acc;
        }
    }
    let lambda_sup = lambda_i0j.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    Ok(PerturbationData {
        dims,
        c1,
        c2,
        robust_index: r,
        lambda1: a_eig.values.iter().map(|v| c2 * v).collect(),
        a_basis: a_eig.vectors,
        e0: b_eig.values.iter().map(|v| c1 * v).collect(),
        b_basis: b_eig.vectors,
        lambda0,
        lambda_i0j,
        lambda_sup,
        h_a_diag,
        h_b_diag,
        gap_warnings,
    })
}

/// The truncated product-form state at time `t` (the `O(ε)` remainder
/// dropped).
pub fn eq4_approx(spec: &ModelSpec, init: &InitialSpec, pd: &PerturbationData, t: f64) -> Result<StateVector> {
    pd.check_matches(spec)?;
    if init.robust_index() != spec.robust_index() {
        return Err(Error::PerturbationMismatch("initial robust index"));
    }
    let dims = spec.dims();
    if init.alpha().len() != dims.a || init.chi().len() != dims.b {
        return Err(Error::DimensionMismatch {
            context: "initial amplitudes",
            expected: dims.a + dims.b,
            found: init.alpha().len() + init.chi().len(),
        });
    }
    let alpha = pd.a_basis.ad_mul(init.alpha());
    let beta = pd.b_basis.ad_mul(init.chi());

    // coefficient matrix in the (|i⟩, |j⟩) basis
    let coeffs = CMatrix::from_fn(dims.a, dims.b, |i, j| {
        let energy =
            pd.h_a_diag[i] + pd.lambda1[i] + pd.lambda0 + pd.e0[j] + pd.h_b_diag[j] + pd.lambda(i, j);
        alpha[i] * beta[j] * phase(energy * t)
    });
    let ab = &pd.a_basis * coeffs * pd.b_basis.transpose();
    let mut psi = CVector::zeros(dims.total());
    let r = spec.robust_index();
    for a in 0..dims.a {
        for b in 0..dims.b {
            psi[dims.index(a, r, b)] = ab[(a, b)];
        }
    }
    Ok(StateVector::from_unitary_image(psi))
}

/// `min_φ ‖ψ_exact(t) − e^{iφ} ψ_approx(t)‖`.
pub fn residual_eq4(spec: &ModelSpec, init: &InitialSpec, pd: &PerturbationData, t: f64) -> Result<f64> {
    Evolution::new(spec)?.residual_eq4(init, pd, t)
}
