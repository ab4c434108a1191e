//! Physical model: band dispersions, radial interaction potentials, and the
//! validated n-band instance everything else consumes.
//!
//! Conventions: ħ = k_B = 1, and the Fourier transform carries the
//! (2π)^{-d/2} prefactor, `f̂(p) = (2π)^{-d/2} ∫ f(x) e^{-ip·x} dx`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface area of the unit sphere S^{d-1}.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("dimension {d} out of range"),
    }
}

/// One parabolic band: ε(p) = p²/(2m) − μ with m, μ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandDispersion {
    mass: f64,
    chemical_potential: f64,
}

impl BandDispersion {
    pub fn new(mass: f64, chemical_potential: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Invalid(format!("mass must be positive (got {mass})")));
        }
        if !(chemical_potential.is_finite() && chemical_potential > 0.0) {
            return Err(Error::Invalid(format!(
                "chemical potential must be positive (got {chemical_potential})"
            )));
        }
        Ok(Self { mass, chemical_potential })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn chemical_potential(&self) -> f64 {
        self.chemical_potential
    }

    /// ε(p) = p²/(2m) − μ for p ≥ 0.
    pub fn energy(&self, p: f64) -> f64 {
        debug_assert!(p >= 0.0);
        p * p / (2.0 * self.mass) - self.chemical_potential
    }

    /// k_F = sqrt(2 m μ); the zero of `energy`.
    pub fn fermi_momentum(&self) -> f64 {
        (2.0 * self.mass * self.chemical_potential).sqrt()
    }

    /// |∇ε| on the Fermi surface, i.e. k_F / m.
    pub fn fermi_velocity(&self) -> f64 {
        self.fermi_momentum() / self.mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialFamily {
    Gaussian,
    Exponential,
}

/// Radial two-body potential with a closed-form radial Fourier transform.
///
/// * gaussian:    V(x) = g · exp(−|x|²/(2 s²))
/// * exponential: V(x) = g · exp(−|x|/s)
///
/// Both families are real, reflection-symmetric, integrable, and decay faster
/// than any polynomial, so every pairwise second-moment cross integral is
/// finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialPotential {
    family: PotentialFamily,
    strength: f64,
    range: f64,
}

impl RadialPotential {
    pub fn new(family: PotentialFamily, strength: f64, range: f64) -> Result<Self> {
        if !strength.is_finite() {
            return Err(Error::Invalid(format!("potential strength must be finite (got {strength})")));
        }
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::Invalid(format!("potential range must be positive (got {range})")));
        }
        Ok(Self { family, strength, range })
    }

    /// The identically-zero potential.
    pub fn zero() -> Self {
        Self { family: PotentialFamily::Gaussian, strength: 0.0, range: 1.0 }
    }

    pub fn family(&self) -> PotentialFamily {
        self.family
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn is_zero(&self) -> bool {
        self.strength == 0.0
    }

    /// Position-space value V(r) at radius r ≥ 0.
    pub fn evaluate(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let s = self.range;
        match self.family {
            PotentialFamily::Gaussian => self.strength * (-r * r / (2.0 * s * s)).exp(),
            PotentialFamily::Exponential => self.strength * (-r / s).exp(),
        }
    }

    /// Radial Fourier transform V̂(r) in d dimensions under the
    /// (2π)^{-d/2} convention; even in r, so only r ≥ 0 is accepted.
    pub fn fourier(&self, d: usize, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let g = self.strength;
        let s = self.range;
        match self.family {
            PotentialFamily::Gaussian => g * s.powi(d as i32) * (-s * s * r * r / 2.0).exp(),
            PotentialFamily::Exponential => {
                let u = 1.0 + s * s * r * r;
                match d {
                    1 => g * (2.0 / PI).sqrt() * s / u,
                    2 => g * s * s / u.powf(1.5),
                    3 => g * (2.0 / PI).sqrt() * 2.0 * s.powi(3) / (u * u),
                    _ => panic!("dimension {d} out of range"),
                }
            }
        }
    }

    /// Radius beyond which |V(r)| is negligible at double precision;
    /// used to truncate radial quadratures.
    pub fn support_radius(&self) -> f64 {
        match self.family {
            PotentialFamily::Gaussian => 13.0 * self.range,
            PotentialFamily::Exponential => 60.0 * self.range,
        }
    }
}

/// Symmetric n×n grid of pair potentials; entry (a, b) couples bands a and b.
#[derive(Debug, Clone, Serialize)]
pub struct InteractionMatrix {
    n: usize,
    entries: Vec<RadialPotential>,
}

impl InteractionMatrix {
    pub fn new(n: usize, entries: Vec<RadialPotential>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Invalid(format!(
                "interaction matrix needs {} entries for n = {n} (got {})",
                n * n,
                entries.len()
            )));
        }
        let m = Self { n, entries };
        for a in 0..n {
            for b in (a + 1)..n {
                if m.entry(a, b) != m.entry(b, a) {
                    return Err(Error::InvalidInteraction {
                        a: a + 1,
                        b: b + 1,
                        reason: "entries (a,b) and (b,a) differ".into(),
                    });
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, a: usize, b: usize) -> &RadialPotential {
        &self.entries[a * self.n + b]
    }

    /// True if every off-diagonal entry is the zero potential.
    pub fn off_diagonal_is_zero(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| a == b || self.entry(a, b).is_zero()))
    }
}

/// Coupling prefactor of the scaled interaction λ V^d + κλ V^od for pair (a, b).
pub fn coupling_scale(lambda: f64, kappa: f64, a: usize, b: usize) -> f64 {
    if a == b {
        lambda
    } else {
        lambda * kappa
    }
}

/// Validated n-band system; immutable, safe to share across sweep workers.
#[derive(Debug, Clone, Serialize)]
pub struct ModelInstance {
    dimension: usize,
    bands: Vec<BandDispersion>,
    interactions: InteractionMatrix,
}

impl ModelInstance {
    pub fn new(
        dimension: usize,
        bands: Vec<BandDispersion>,
        interactions: InteractionMatrix,
    ) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidDimension(dimension));
        }
        if bands.is_empty() {
            return Err(Error::Invalid("at least one band is required".into()));
        }
        if interactions.n() != bands.len() {
            return Err(Error::Invalid(format!(
                "interaction matrix is {}x{} but there are {} bands",
                interactions.n(),
                interactions.n(),
                bands.len()
            )));
        }
        Ok(Self { dimension, bands, interactions })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn band(&self, a: usize) -> &BandDispersion {
        &self.bands[a]
    }

    pub fn bands(&self) -> &[BandDispersion] {
        &self.bands
    }

    pub fn interactions(&self) -> &InteractionMatrix {
        &self.interactions
    }

    pub fn max_chemical_potential(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.chemical_potential())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_fermi_momentum(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.fermi_momentum())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Declarative configuration
// ---------------------------------------------------------------------------

/// Declarative model description as read from a TOML file.
///
/// ```toml
/// dimension = 3
///
/// [[bands]]
/// mass = 0.5
/// mu = 1.0
///
/// [[interactions]]
/// pair = [1, 1]          # 1-based band indices
/// family = "gaussian"    # or "exponential"
/// strength = -2.0
/// range = 1.0
/// ```
///
/// Unspecified pairs default to the zero potential. Specifying (a, b) implies
/// (b, a); giving both with different parameters is rejected.
#[derive(Debug, Clone, Deserialize)]
pub struct ModelConfig {
    pub dimension: usize,
    pub bands: Vec<BandConfig>,
    #[serde(default)]
    pub interactions: Vec<InteractionConfig>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BandConfig {
    pub mass: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct InteractionConfig {
    /// 1-based (a, b) band pair.
    pub pair: [usize; 2],
    pub family: String,
    pub strength: f64,
    pub range: f64,
}

impl ModelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

fn parse_family(name: &str) -> Result<PotentialFamily> {
    match name {
        "gaussian" => Ok(PotentialFamily::Gaussian),
        "exponential" => Ok(PotentialFamily::Exponential),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// Validate a declarative description into a `ModelInstance`.
pub fn build_model(config: &ModelConfig) -> Result<ModelInstance> {
    if !(1..=3).contains(&config.dimension) {
        return Err(Error::InvalidDimension(config.dimension));
    }
    let n = config.bands.len();
    if n == 0 {
        return Err(Error::Invalid("at least one band is required".into()));
    }

    let mut bands = Vec::with_capacity(n);
    for (i, b) in config.bands.iter().enumerate() {
        let band = BandDispersion::new(b.mass, b.mu).map_err(|e| Error::InvalidBand {
            band: i + 1,
            reason: e.to_string(),
        })?;
        bands.push(band);
    }

    let mut entries = vec![None::<RadialPotential>; n * n];
    for ic in &config.interactions {
        let [pa, pb] = ic.pair;
        if pa == 0 || pb == 0 || pa > n || pb > n {
            return Err(Error::InvalidInteraction {
                a: pa,
                b: pb,
                reason: format!("band indices must lie in 1..={n}"),
            });
        }
        let family = parse_family(&ic.family)?;
        let pot = RadialPotential::new(family, ic.strength, ic.range).map_err(|e| {
            Error::InvalidInteraction { a: pa, b: pb, reason: e.to_string() }
        })?;
        let (a, b) = (pa - 1, pb - 1);
        for idx in [a * n + b, b * n + a] {
            match &entries[idx] {
                Some(existing) if *existing != pot => {
                    return Err(Error::InvalidInteraction {
                        a: pa,
                        b: pb,
                        reason: "conflicts with the previously specified (b,a) entry".into(),
                    });
                }
                _ => entries[idx] = Some(pot),
            }
        }
    }
    let entries: Vec<RadialPotential> =
        entries.into_iter().map(|e| e.unwrap_or_else(RadialPotential::zero)).collect();

    ModelInstance::new(config.dimension, bands, InteractionMatrix::new(n, entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_band_gaussian_has_unit_fermi_momentum() {
        let cfg = ModelConfig::from_toml_str(
            r#"
            dimension = 3
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[interactions]]
            pair = [1, 1]
            family = "gaussian"
            strength = -1.0
            range = 1.0
            "#,
        )
        .unwrap();
        let model = build_model(&cfg).unwrap();
        assert_eq!(model.n_bands(), 1);
        assert_relative_eq!(model.band(0).fermi_momentum(), 1.0);
    }

    #[test]
    fn omitted_transpose_entry_is_symmetrized() {
        let cfg = ModelConfig::from_toml_str(
            r#"
            dimension = 3
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[bands]]
            mass = 1.0
            mu = 2.0
            [[interactions]]
            pair = [1, 2]
            family = "gaussian"
            strength = -0.5
            range = 2.0
            "#,
        )
        .unwrap();
        let model = build_model(&cfg).unwrap();
        assert_eq!(model.interactions().entry(0, 1), model.interactions().entry(1, 0));
        assert!(model.interactions().entry(0, 0).is_zero());
    }

    #[test]
    fn negative_chemical_potential_names_the_band() {
        let cfg = ModelConfig::from_toml_str(
            r#"
            dimension = 3
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[bands]]
            mass = 0.5
            mu = -1.0
            "#,
        )
        .unwrap();
        let err = build_model(&cfg).unwrap_err();
        assert!(err.to_string().contains("band 2"), "got: {err}");
    }

    #[test]
    fn conflicting_symmetric_entries_are_rejected() {
        let cfg = ModelConfig::from_toml_str(
            r#"
            dimension = 2
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[interactions]]
            pair = [1, 2]
            family = "gaussian"
            strength = -0.5
            range = 1.0
            [[interactions]]
            pair = [2, 1]
            family = "gaussian"
            strength = -0.7
            range = 1.0
            "#,
        )
        .unwrap();
        assert!(build_model(&cfg).is_err());
    }

    #[test]
    fn unknown_family_and_bad_dimension_are_rejected() {
        let bad_family = ModelConfig::from_toml_str(
            r#"
            dimension = 3
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[interactions]]
            pair = [1, 1]
            family = "yukawa"
            strength = -1.0
            range = 1.0
            "#,
        )
        .unwrap();
        assert!(matches!(build_model(&bad_family), Err(Error::UnknownFamily(_))));

        let bad_dim = ModelConfig::from_toml_str(
            r#"
            dimension = 4
            [[bands]]
            mass = 0.5
            mu = 1.0
            "#,
        )
        .unwrap();
        assert!(matches!(build_model(&bad_dim), Err(Error::InvalidDimension(4))));
    }

    #[test]
    fn dispersion_evaluates_the_parabola() {
        let band = BandDispersion::new(0.5, 1.0).unwrap();
        assert_relative_eq!(band.energy(1.0), 0.0);
        assert_relative_eq!(band.energy(2.0), 3.0);
        let heavy = BandDispersion::new(2.0, 0.5).unwrap();
        assert_relative_eq!(heavy.energy(0.0), -0.5);
        // dispersion vanishes exactly at the Fermi momentum
        for band in [band, heavy, BandDispersion::new(1.7, 0.03).unwrap()] {
            assert_relative_eq!(band.energy(band.fermi_momentum()), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gaussian_fourier_closed_form() {
        let pot = RadialPotential::new(PotentialFamily::Gaussian, -1.0, 1.0).unwrap();
        assert_relative_eq!(pot.fourier(3, 2.0), -(-2.0f64).exp(), max_relative = 1e-15);
        for d in 1..=3 {
            let g = -0.7;
            let s = 1.3;
            let p = RadialPotential::new(PotentialFamily::Gaussian, g, s).unwrap();
            assert_relative_eq!(p.fourier(d, 0.0), g * s.powi(d as i32), max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_strength_transforms_to_zero() {
        for family in [PotentialFamily::Gaussian, PotentialFamily::Exponential] {
            let p = RadialPotential::new(family, 0.0, 2.0).unwrap();
            for d in 1..=3 {
                for r in [0.0, 0.5, 3.0, 11.0] {
                    assert_eq!(p.fourier(d, r), 0.0);
                }
            }
        }
    }

    #[test]
    fn kappa_zero_decouples_bands() {
        assert_eq!(coupling_scale(0.7, 0.0, 0, 1), 0.0);
        assert_eq!(coupling_scale(0.7, 0.0, 1, 1), 0.7);
    }
}
