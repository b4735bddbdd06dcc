//! Seeded band-limited random fields.
//!
//! Modes are drawn in a fixed lexicographic order over the integer cube
//! `[-K, K]^dim`, so the same seed gives the same continuum field on every
//! grid that resolves the envelope.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::field::{symmetrize, Reality, SpectralField, VectorField};
use crate::grid::Grid;

/// Gaussian envelope `exp(-|xi|^2 / xi0^2)` on the Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumProfile {
    pub xi0: f64,
}

impl SpectrumProfile {
    pub fn new(xi0: f64) -> Self {
        SpectrumProfile { xi0 }
    }

    /// A quarter of the Nyquist wavenumber.
    pub fn quarter_nyquist(grid: &Grid) -> Self {
        SpectrumProfile {
            xi0: 0.25 * grid.nyquist_wavenumber(),
        }
    }

    fn cutoff_index(&self, grid: &Grid) -> i64 {
        let k = (6.0 * self.xi0 / grid.dk()).ceil() as i64;
        k.clamp(1, grid.n() as i64 / 2 - 1)
    }
}

/// The generator behind every seeded draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws a zero-mean field with the given `L2` root-mean-square amplitude.
pub fn random_field<R: Rng + ?Sized>(
    grid: &Grid,
    rng: &mut R,
    profile: &SpectrumProfile,
    reality: Reality,
    amplitude: f64,
) -> SpectralField {
    let kmax = profile.cutoff_index(grid);
    let dk = grid.dk();
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let side = 2 * kmax + 1;
    let count = side.pow(grid.dim() as u32);
    for c in 0..count {
        let mut rem = c;
        let mut k = [0i64; 3];
        for ax in (0..grid.dim()).rev() {
            k[ax] = rem % side - kmax;
            rem /= side;
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if k == [0; 3] {
            continue;
        }
        let xi2 = dk * dk * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let env = (-xi2 / (profile.xi0 * profile.xi0)).exp();
        let flat = grid.flat([grid.position(k[0]), grid.position(k[1]), grid.position(k[2])]);
        coeffs[flat] = Complex64::new(re, im) * env;
    }
    if reality == Reality::Real {
        symmetrize(grid, &mut coeffs);
    }
    let f = SpectralField::from_coeffs_unchecked(*grid, coeffs, reality);
    let rms = f.l2_norm() / grid.volume().sqrt();
    if rms == 0.0 {
        f
    } else {
        f.scale(amplitude / rms)
    }
}

/// Real vector field with `dim` independent components of the given amplitude.
pub fn random_vector<R: Rng + ?Sized>(
    grid: &Grid,
    rng: &mut R,
    profile: &SpectrumProfile,
    amplitude: f64,
) -> VectorField {
    VectorField::from_components_unchecked(
        (0..grid.dim())
            .map(|_| random_field(grid, rng, profile, Reality::Real, amplitude))
            .collect(),
    )
}
