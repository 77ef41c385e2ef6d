//! Locality diagnostics on A and B: mutual information between the remote
//! subsystems, sampled signaling under local unitaries, and the onset time
//! of correlations.
//!
//! Signaling is probed by applying a Haar unitary `G` to the source factor
//! at `t = 0`, evolving both the modified and unmodified states, and taking
//! the trace distance between the target's reduced states. Sample `k` uses
//! the sub-seed `mix_seed(seed, SIGNAL, k)`, so the samples of a run with
//! `n` samples are a prefix of any run with more.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evolve::{Dynamics, Trajectory};
use crate::qcore::info::{mutual_information, trace_distance};
use crate::qcore::random::{haar_unitary, mix_seed, tags};
use crate::qcore::state::{apply_local, Dims, reduced_from_pure, StateVector, SUBSYSTEM_A, SUBSYSTEM_B};

/// Default number of sampled source unitaries.
pub const DEFAULT_SAMPLES: usize = 64;

/// Default mutual-information threshold for [`tau_estimate`], in bits.
pub const DEFAULT_THRESHOLD_BITS: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Unitary on B, observe A.
    BToA,
    /// Unitary on A, observe B.
    AToB,
}

impl Direction {
    /// `(source, target)` factor indices.
    pub fn factors(self) -> (usize, usize) {
        match self {
            Direction::BToA => (SUBSYSTEM_B, SUBSYSTEM_A),
            Direction::AToB => (SUBSYSTEM_A, SUBSYSTEM_B),
        }
    }
}

/// `I(A:B)` in bits of `tr_C |ψ(t)⟩⟨ψ(t)|` at each time of the trajectory.
pub fn mi_trajectory(traj: &Trajectory) -> Result<Vec<f64>> {
    let dims = traj.dims();
    let factors = dims.factors();
    traj.states()
        .iter()
        .map(|psi| {
            let rho_ab = reduced_from_pure(psi.amplitudes(), &factors, &[SUBSYSTEM_A, SUBSYSTEM_B])?;
            mutual_information(&rho_ab, dims.a, dims.b)
        })
        .collect()
}

/// Trace distance of the target's reduced state, at each time, between the
/// evolution of `psi0` and of `G|psi0⟩` for sample `k`.
pub fn signaling_sample<D: Dynamics + ?Sized>(
    dynamics: &D,
    psi0: &StateVector,
    times: &[f64],
    direction: Direction,
    seed: u64,
    k: u64,
) -> Result<Vec<f64>> {
    let dims = dynamics.dims();
    let factors = dims.factors();
    let (source, target) = direction.factors();
    let g = haar_unitary(factors[source], mix_seed(seed, tags::SIGNAL, k));
    let kicked = StateVector::normalized(apply_local(psi0.amplitudes(), &factors, source, &g)?)?;
    times
        .iter()
        .map(|&t| {
            let plain = dynamics.evolve(psi0, t)?;
            let moved = dynamics.evolve(&kicked, t)?;
            let rho = reduced_from_pure(plain.amplitudes(), &factors, &[target])?;
            let sigma = reduced_from_pure(moved.amplitudes(), &factors, &[target])?;
            trace_distance(&rho, &sigma)
        })
        .collect()
}

/// Elementwise maximum of equal-length series.
pub fn elementwise_max(series: impl IntoIterator<Item = Vec<f64>>) -> Vec<f64> {
    let mut out: Option<Vec<f64>> = None;
    for s in series {
        match out.as_mut() {
            None => out = Some(s),
            Some(acc) => {
                for (a, v) in acc.iter_mut().zip(s) {
                    *a = a.max(v);
                }
            }
        }
    }
    out.unwrap_or_default()
}

/// Per-time maximum over `n_samples` Haar unitaries on the source factor.
pub fn signaling_test<D: Dynamics + ?Sized>(
    dynamics: &D,
    psi0: &StateVector,
    times: &[f64],
    direction: Direction,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let samples = (0..n_samples as u64)
        .map(|k| signaling_sample(dynamics, psi0, times, direction, seed, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(elementwise_max(samples))
}

/// First time `mi` rises above `threshold_bits`, linearly interpolated
/// between the bracketing samples. `times[0]` if the series starts above.
pub fn tau_estimate(times: &[f64], mi: &[f64], threshold_bits: f64) -> Result<Option<f64>> {
    if !(threshold_bits > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold_bits}"
        )));
    }
    if times.len() != mi.len() {
        return Err(Error::DimensionMismatch {
            context: "tau estimate series",
            expected: times.len(),
            found: mi.len(),
        });
    }
    let Some(k) = mi.iter().position(|&m| m > threshold_bits) else {
        return Ok(None);
    };
    if k == 0 {
        return Ok(Some(times[0]));
    }
    let (t0, t1, m0, m1) = (times[k - 1], times[k], mi[k - 1], mi[k]);
    Ok(Some(t0 + (threshold_bits - m0) / (m1 - m0) * (t1 - t0)))
}

/// Signaling in both directions, mutual information and onset time on one
/// time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport {
    pub times: Vec<f64>,
    pub mi_ab_bits: Vec<f64>,
    pub signal_b_to_a: Vec<f64>,
    pub signal_a_to_b: Vec<f64>,
    pub tau_estimate: Option<f64>,
    pub threshold_bits: f64,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn locality_report<D: Dynamics + ?Sized>(
    dynamics: &D,
    psi0: &StateVector,
    times: &[f64],
    n_samples: usize,
    threshold_bits: f64,
    seed: u64,
) -> Result<LocalityReport> {
    let states = times
        .iter()
        .map(|&t| dynamics.evolve(psi0, t))
        .collect::<Result<Vec<_>>>()?;
    let traj = Trajectory::new(dynamics.dims(), times.to_vec(), states)?;
    let mi_ab_bits = mi_trajectory(&traj)?;
    let tau = tau_estimate(times, &mi_ab_bits, threshold_bits)?;
    Ok(LocalityReport {
        times: times.to_vec(),
        signal_b_to_a: signaling_test(dynamics, psi0, times, Direction::BToA, n_samples, seed)?,
        signal_a_to_b: signaling_test(dynamics, psi0, times, Direction::AToB, n_samples, seed)?,
        mi_ab_bits,
        tau_estimate: tau,
        threshold_bits,
        n_samples,
        seed,
    })
}

/// `I(A:CB)` in bits, used to confirm that A is decoupled.
pub fn mi_a_rest(psi: &StateVector, dims: Dims) -> Result<f64> {
    let rho = psi.density();
    mutual_information(&rho, dims.a, dims.cb())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{uniform_times, Evolution, OneShotUnitary};
    use crate::model::{build_canonical, initial_state, InitialSpec};
    use crate::qcore::linalg::{c64, CVector};
    use alloc::vec;

    fn setup(c2: f64) -> (Evolution, StateVector) {
        let dims = Dims::new(2, 2, 2).unwrap();
        let spec = build_canonical(dims, 5, 2.0, c2).unwrap();
        let alpha = CVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let chi = CVector::from_vec(vec![c64(0.8, 0.0), c64(0.6, 0.0)]);
        let psi0 = initial_state(&InitialSpec::new(alpha, chi, 0).unwrap(), dims).unwrap();
        (Evolution::new(&spec).unwrap(), psi0)
    }

    #[test]
    fn tau_interpolates() {
        assert_eq!(tau_estimate(&[0.0, 1.0], &[0.0, 0.02], 0.01).unwrap(), Some(0.5));
        assert_eq!(tau_estimate(&[0.0, 1.0], &[0.0, 0.005], 0.01).unwrap(), None);
        assert_eq!(tau_estimate(&[2.0, 3.0], &[0.5, 0.6], 0.01).unwrap(), Some(2.0));
        assert!(tau_estimate(&[0.0], &[0.0], 0.0).is_err());
        assert!(tau_estimate(&[0.0, 1.0], &[0.0], 0.01).is_err());
    }

    #[test]
    fn decoupled_a_has_no_correlations_or_signal() {
        let (evo, psi0) = setup(0.0);
        let times = uniform_times(20.0, 41);
        let traj = evo.propagate(&psi0, &times).unwrap();
        assert!(mi_trajectory(&traj).unwrap().iter().all(|&m| m <= 1e-10));
        let sig = signaling_test(&evo, &psi0, &times, Direction::BToA, 8, 1).unwrap();
        assert!(sig.iter().all(|&s| s <= 1e-10));
        for psi in traj.states() {
            assert!(mi_a_rest(psi, evo.dims()).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn coupled_model_signals_both_ways() {
        let (evo, psi0) = setup(0.5);
        let times = uniform_times(30.0, 31);
        let ba = signaling_test(&evo, &psi0, &times, Direction::BToA, 8, 2).unwrap();
        let ab = signaling_test(&evo, &psi0, &times, Direction::AToB, 8, 2).unwrap();
        assert!(ba[0] <= 1e-12 && ab[0] <= 1e-12);
        assert!(ba.iter().cloned().fold(0.0, f64::max) > 1e-3);
        assert!(ab.iter().cloned().fold(0.0, f64::max) > 1e-3);
    }

    #[test]
    fn more_samples_never_lower_the_maximum() {
        let (evo, psi0) = setup(0.5);
        let times = uniform_times(10.0, 11);
        let one = signaling_test(&evo, &psi0, &times, Direction::BToA, 1, 4).unwrap();
        let many = signaling_test(&evo, &psi0, &times, Direction::BToA, 6, 4).unwrap();
        assert!(one.iter().zip(&many).all(|(a, b)| a <= b));
    }

    #[test]
    fn global_phase_leaves_signal_unchanged() {
        let (evo, psi0) = setup(0.5);
        let rotated = StateVector::new(psi0.amplitudes() * c64(0.6, 0.8)).unwrap();
        let times = uniform_times(5.0, 6);
        let a = signaling_test(&evo, &psi0, &times, Direction::AToB, 3, 9).unwrap();
        let b = signaling_test(&evo, &rotated, &times, Direction::AToB, 3, 9).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn product_unitary_does_not_signal() {
        let dims = Dims::new(2, 2, 2).unwrap();
        let id = crate::qcore::linalg::identity(8);
        let dynamics = OneShotUnitary::new(dims, id).unwrap();
        let psi0 = StateVector::basis(8, 3).unwrap();
        let sig = signaling_test(&dynamics, &psi0, &[0.0], Direction::AToB, 4, 0).unwrap();
        assert!(sig[0] <= 1e-12);
    }

    #[test]
    fn zero_samples_rejected() {
        let (evo, psi0) = setup(0.1);
        assert!(signaling_test(&evo, &psi0, &[0.0], Direction::BToA, 0, 0).is_err());
    }
}
