//! Reference models used by the test suite, the built-in checks, and the
//! bundled example configs. All are d = 3 gaussian models with m = 1/2 and
//! μ = 1 (so k_F = 1), which keeps the s-wave Fermi-surface coefficients at
//! the elementary value 𝔳 = g (1 − e⁻²)/√(2π) ≈ 0.3449 g.

use crate::model::{
    BandDispersion, InteractionMatrix, ModelInstance, PotentialFamily, RadialPotential,
};

fn band() -> BandDispersion {
    BandDispersion::new(0.5, 1.0).unwrap()
}

fn gaussian(strength: f64) -> RadialPotential {
    if strength == 0.0 {
        RadialPotential::zero()
    } else {
        RadialPotential::new(PotentialFamily::Gaussian, strength, 1.0).unwrap()
    }
}

fn two_band(g11: f64, g22: f64, g12: f64) -> ModelInstance {
    let entries = vec![gaussian(g11), gaussian(g12), gaussian(g12), gaussian(g22)];
    ModelInstance::new(3, vec![band(), band()], InteractionMatrix::new(2, entries).unwrap())
        .unwrap()
}

/// One attractive band; 𝔳₁₁ ≈ −0.690.
pub fn single_band_attractive() -> ModelInstance {
    ModelInstance::new(
        3,
        vec![band()],
        InteractionMatrix::new(1, vec![gaussian(-2.0)]).unwrap(),
    )
    .unwrap()
}

/// Two identical attractive bands with inter-band coupling: the degenerate
/// (linear-enhancement) regime. 𝔳₁₁ = 𝔳₂₂ ≈ −0.690, 𝔳₁₂ ≈ −0.276.
pub fn two_band_degenerate() -> ModelInstance {
    two_band(-2.0, -2.0, -0.8)
}

/// One dominant band (𝔳₁₁ ≈ −0.759 < 𝔳₂₂ ≈ −0.414) with coupling
/// 𝔳₁₂ ≈ −0.310: the quadratic-enhancement regime.
pub fn two_band_dominant() -> ModelInstance {
    two_band(-2.2, -1.2, -0.9)
}

/// Everything repulsive (𝔳₁₁ = 𝔳₂₂ ≈ +0.345, 𝔳₁₂ ≈ +0.517): normal at
/// κ = 0, superconducting once |κ| 𝔳₁₂ outweighs the diagonal repulsion.
pub fn two_band_repulsive() -> ModelInstance {
    two_band(1.0, 1.0, 1.5)
}

/// Two decoupled attractive bands (V^od ≡ 0).
pub fn two_band_decoupled() -> ModelInstance {
    two_band(-2.0, -1.2, 0.0)
}
