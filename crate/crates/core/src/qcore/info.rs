//! Entropies and distances between quantum states, in bits.

use super::linalg::eigh;
#[allow(unused_imports)]
use num_traits::Float;
use super::state::{partial_trace, DensityMatrix};
use crate::error::{Error, Result};

/// Eigenvalues at or below this are treated as contributing nothing.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Shannon entropy (bits) of a spectrum, skipping entries `<= 1e-14`.
pub fn spectrum_entropy_bits(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * p.log2())
        .sum()
}

/// von Neumann entropy `-Σ p log₂ p` of the eigenvalues of `rho`.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy_bits(&rho.eigenvalues()).max(0.0)
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`, clamped at zero.
pub fn mutual_information(rho_ab: &DensityMatrix, d_a: usize, d_b: usize) -> Result<f64> {
    let expected = d_a.checked_mul(d_b).unwrap_or(usize::MAX);
    if rho_ab.dim() != expected {
        return Err(Error::DimensionMismatch {
            context: "mutual information",
            expected,
            found: rho_ab.dim(),
        });
    }
    let rho_a = partial_trace(rho_ab, &[d_a, d_b], &[0])?;
    let rho_b = partial_trace(rho_ab, &[d_a, d_b], &[1])?;
    let mi = vn_entropy(&rho_a) + vn_entropy(&rho_b) - vn_entropy(rho_ab);
    Ok(mi.max(0.0))
}

/// `½ Σ |eig(ρ − σ)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "trace distance",
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let diff = rho.matrix() - sigma.matrix();
    let d: f64 = eigh(&diff).values.iter().map(|v| v.abs()).sum::<f64>() * 0.5;
    Ok(d.clamp(0.0, 1.0))
}
