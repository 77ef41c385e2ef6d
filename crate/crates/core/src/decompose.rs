//! Sequential factorization `U = (I_A ⊗ W_CB)(V_AC ⊗ I_B)` of a global
//! unitary by alternating polar updates.
//!
//! The objective is the normalized trace fidelity
//! `F(V, W) = |tr((V⊗I)†(I⊗W)†U)| / D`, with `residual = 1 − F`. Holding
//! one factor fixed, the optimal other factor is the unitary polar factor of
//! a partial trace:
//!
//! * `V ← polar(tr_B((I⊗W)†U))`
//! * `W ← polar(tr_A(U(V⊗I)†))`
//!
//! so `F` never decreases. Restart 0 starts from `W = I`; restart `r ≥ 1`
//! starts from a Haar `W` drawn with `mix_seed(seed, RESTART, r)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::qcore::linalg::{ensure_unitary, identity, kron, polar_unitary, trace, CMatrix};
use crate::qcore::random::{haar_unitary, mix_seed, tags};
use crate::qcore::state::{partial_trace_operator, Dims};

/// Input unitarity tolerance, `‖U†U − I‖_max`.
pub const INPUT_UNITARY_TOL: f64 = 1e-9;

/// Residual at or below which the remaining restarts are skipped.
pub const EXACT_RESIDUAL: f64 = 1e-12;

/// Residual at or below which a unitary is reported as sequential.
pub const SEQUENTIAL_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Convergence threshold on the fidelity gain of one full iteration.
    pub tol: f64,
    pub seed: u64,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iters: 200,
            tol: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    /// `1 − F` evaluated on the returned factors.
    pub residual: f64,
    pub v_ac: CMatrix,
    pub w_cb: CMatrix,
    /// Iterations performed by the restart that produced the factors.
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    /// Fidelity after every half-step of the winning restart.
    pub fidelity_history: Vec<f64>,
}

impl DecompositionResult {
    pub fn is_sequential(&self) -> bool {
        self.residual <= SEQUENTIAL_THRESHOLD
    }
}

/// `(I_A ⊗ W)(V ⊗ I_B)`.
pub fn sequential_product(v_ac: &CMatrix, w_cb: &CMatrix, dims: Dims) -> Result<CMatrix> {
    check_square(v_ac, dims.ac(), "V factor")?;
    check_square(w_cb, dims.cb(), "W factor")?;
    Ok(kron(&identity(dims.a), w_cb)? * kron(v_ac, &identity(dims.b))?)
}

/// Seeded Haar factors `(V, W)` of a planted sequential unitary.
pub fn planted_factors(dims: Dims, seed: u64) -> (CMatrix, CMatrix) {
    (
        haar_unitary(dims.ac(), mix_seed(seed, tags::PLANT_V, 0)),
        haar_unitary(dims.cb(), mix_seed(seed, tags::PLANT_W, 0)),
    )
}

/// `(I_A ⊗ W)(V ⊗ I_B)` with seeded Haar `V` on A⊗C and `W` on C⊗B.
pub fn planted_sequential(dims: Dims, seed: u64) -> CMatrix {
    let (v, w) = planted_factors(dims, seed);
    sequential_product(&v, &w, dims).expect("factor shapes follow dims")
}

/// `|tr((V⊗I)†(I⊗W)†U)| / D`.
pub fn fidelity(u: &CMatrix, v_ac: &CMatrix, w_cb: &CMatrix, dims: Dims) -> Result<f64> {
    check_square(u, dims.total(), "unitary")?;
    let x = sequential_product(v_ac, w_cb, dims)?;
    Ok(x.dotc(u).norm() / dims.total() as f64)
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

struct Sweep {
    v: CMatrix,
    w: CMatrix,
    fidelity: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn alternate(u: &CMatrix, dims: Dims, w0: CMatrix, opts: &DecompositionOptions) -> Result<Sweep> {
    let d = dims.total() as f64;
    let (ia, ib) = (identity(dims.a), identity(dims.b));
    let mut w = w0;
    let mut v = identity(dims.ac());
    let mut history = Vec::new();
    let mut previous = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;

        let left = kron(&ia, &w)?.adjoint() * u;
        let env_v = partial_trace_operator(&left, &[dims.ac(), dims.b], &[0])?;
        v = polar_unitary(&env_v);
        history.push(trace(&(v.adjoint() * &env_v)).norm() / d);

        let right = u * kron(&v, &ib)?.adjoint();
        let env_w = partial_trace_operator(&right, &[dims.a, dims.cb()], &[1])?;
        w = polar_unitary(&env_w);
        let f = trace(&(w.adjoint() * &env_w)).norm() / d;
        history.push(f);

        if f - previous < opts.tol {
            converged = true;
            break;
        }
        previous = f;
    }
    let fidelity = fidelity(u, &v, &w, dims)?;
    Ok(Sweep {
        v,
        w,
        fidelity,
        iterations,
        converged,
        history,
    })
}

/// Best sequential approximation of `u` over `opts.restarts` alternating
/// runs. Errors if `u` is not unitary within [`INPUT_UNITARY_TOL`].
pub fn sequential_residual(u: &CMatrix, dims: Dims, opts: &DecompositionOptions) -> Result<DecompositionResult> {
    check_square(u, dims.total(), "unitary")?;
    ensure_unitary(u, INPUT_UNITARY_TOL)?;
    if opts.restarts == 0 || opts.max_iters == 0 {
        return Err(Error::InvalidArgument("restarts and max_iters must be at least 1".into()));
    }
    let mut best: Option<Sweep> = None;
    let mut restarts_used = 0;
    for r in 0..opts.restarts {
        let w0 = if r == 0 {
            identity(dims.cb())
        } else {
            haar_unitary(dims.cb(), mix_seed(opts.seed, tags::RESTART, r as u64))
        };
        let sweep = alternate(u, dims, w0, opts)?;
        restarts_used += 1;
        if best.as_ref().map_or(true, |b| sweep.fidelity > b.fidelity) {
            best = Some(sweep);
        }
        if best.as_ref().is_some_and(|b| 1.0 - b.fidelity <= EXACT_RESIDUAL) {
            break;
        }
    }
    let best = best.expect("at least one restart");
    Ok(DecompositionResult {
        residual: (1.0 - best.fidelity).clamp(0.0, 1.0),
        v_ac: best.v,
        w_cb: best.w,
        iterations: best.iterations,
        converged: best.converged,
        restarts_used,
        fidelity_history: best.history,
    })
}
