//! Seeded sampling: sub-seed derivation, Gaussian matrices, Haar unitaries,
//! random Hermitian shapes and random pure states.
//!
//! Every stochastic component draws from its own ChaCha20 stream whose seed
//! is [`mix_seed`]`(master, tag, index)`. The mix is two rounds of SplitMix64
//! finalization:
//!
//! ```text
//! s = splitmix64(master ^ splitmix64(tag)) ; s = splitmix64(s ^ index)
//! ```
//!
//! so streams for distinct `(tag, index)` pairs are decorrelated while a
//! stream never depends on how many other streams were drawn before it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::linalg::{c64, spectral_norm, CMatrix, CVector};

pub type SeededRng = ChaCha20Rng;

/// Component tags for [`mix_seed`], packed ASCII.
pub mod tags {
    pub const HAAR: u64 = 0x4841_4152; // "HAAR"
    pub const B_BLOCK: u64 = 0x4230_424c; // "B0BL"
    pub const PERP_BLOCK: u64 = 0x5045_5250; // "PERP"
    pub const H_AC: u64 = 0x4841_4300; // "HAC"
    pub const H_A: u64 = 0x4841_0000; // "HA"
    pub const H_C: u64 = 0x4843_0000; // "HC"
    pub const H_B: u64 = 0x4842_0000; // "HB"
    pub const ALPHA: u64 = 0x414c_5048; // "ALPH"
    pub const CHI: u64 = 0x4348_4900; // "CHI"
    pub const SIGNAL: u64 = 0x5349_474e; // "SIGN"
    pub const PLANT_V: u64 = 0x504c_5456; // "PLTV"
    pub const PLANT_W: u64 = 0x504c_5457; // "PLTW"
    pub const RESTART: u64 = 0x5253_5452; // "RSTR"
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for component `tag`, item `index`, under `master`.
#[inline]
pub fn mix_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(tag)) ^ index)
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut SeededRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix of i.i.d. standard complex Gaussians (real and imaginary parts
/// drawn row-major, real first).
pub fn complex_gaussian_matrix(rows: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let re = gaussian(rng);
            let im = gaussian(rng);
            m[(r, c)] = c64(re, im);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Ginibre matrix, with the phases of the
/// diagonal of R moved into Q.
pub fn haar_unitary_with(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let g = complex_gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let m = d.norm();
        let ph = if m > 0.0 { d / m } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= ph;
    }
    q
}

/// Haar unitary from its own seed; bitwise reproducible.
pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    haar_unitary_with(dim, &mut rng_from_seed(seed))
}

/// Unnormalized Gaussian Hermitian matrix `(G + G^dagger)/2`.
pub fn gaussian_hermitian(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let g = complex_gaussian_matrix(dim, dim, rng);
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

/// [`gaussian_hermitian`] rescaled to spectral norm 1.
pub fn random_hermitian(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let h = gaussian_hermitian(dim, rng);
    let norm = spectral_norm(&h);
    if norm > 0.0 {
        h.unscale(norm)
    } else {
        h
    }
}

/// `dim` reals drawn uniformly from `[-1, 1)`.
pub fn uniform_reals(dim: usize, rng: &mut SeededRng) -> alloc::vec::Vec<f64> {
    let dist = Uniform::new(-1.0f64, 1.0).expect("valid range");
    (0..dim).map(|_| dist.sample(rng)).collect()
}

/// Normalized random pure state (Gaussian direction).
pub fn random_state_vector(dim: usize, rng: &mut SeededRng) -> CVector {
    let v = CVector::from_iterator(dim, (0..dim).map(|_| {
        let re = gaussian(rng);
        let im = gaussian(rng);
        c64(re, im)
    }));
    let n = v.norm();
    v.unscale(n)
}
