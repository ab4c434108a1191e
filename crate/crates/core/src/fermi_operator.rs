//! The Fermi-surface interaction operator, channel by channel.
//!
//! For radial potentials and parabolic bands the operator block-diagonalizes
//! over angular-momentum channels; in channel ℓ it reduces to the n×n matrix
//!
//! ```text
//! M_ℓ(a,b) = 2 (2π)^{-d/2} |S^{d-1}| sqrt(m_a m_b) (k_a k_b)^{(d-2)/2} W_ℓ(k_a, k_b)
//! ```
//!
//! with W_ℓ the channel kernel of V_ab between the Fermi radii. Everything in
//! this module (intra-band minima, the trace identity, the linear/quadratic
//! enhancement constants) is built from these matrices.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{angular_average, channel_degeneracy, channel_projection, max_channel};
use crate::linalg;
use crate::model::{sphere_area, ModelInstance};
use crate::quad::gauss_legendre;

/// Relative gap below which the two smallest intra-band minima are treated
/// as exactly degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

fn channel_prefactor(model: &ModelInstance, a: usize, b: usize) -> f64 {
    let d = model.dimension() as f64;
    let (ba, bb) = (model.band(a), model.band(b));
    let (ka, kb) = (ba.fermi_momentum(), bb.fermi_momentum());
    2.0 * (2.0 * PI).powf(-d / 2.0)
        * sphere_area(model.dimension())
        * (ba.mass() * bb.mass()).sqrt()
        * (ka * kb).powf((d - 2.0) / 2.0)
}

/// Matrix element of the channel-ℓ Fermi-surface operator between bands a, b.
pub fn channel_element(model: &ModelInstance, a: usize, b: usize, ell: usize) -> Result<f64> {
    let d = model.dimension();
    let pot = *model.interactions().entry(a, b);
    if pot.is_zero() {
        return Ok(0.0);
    }
    let (ka, kb) = (model.band(a).fermi_momentum(), model.band(b).fermi_momentum());
    let w = channel_projection(d, ell, ka, kb, &|r| pot.fourier(d, r))?;
    Ok(channel_prefactor(model, a, b) * w)
}

/// ℓ = 0 Fermi-surface matrix element of V_ab computed the other way:
/// by radial quadrature of V against the plane-wave averages j_d.
pub fn v_coefficient(model: &ModelInstance, a: usize, b: usize) -> f64 {
    let d = model.dimension();
    let pot = *model.interactions().entry(a, b);
    if pot.is_zero() {
        return 0.0;
    }
    let (ba, bb) = (model.band(a), model.band(b));
    let (ka, kb) = (ba.fermi_momentum(), bb.fermi_momentum());
    let area = sphere_area(d);
    let prefactor = area * area
        * (2.0 * PI).powi(-(d as i32))
        * (4.0 * ba.mass() * bb.mass()).powf(d as f64 / 4.0)
        * (ba.chemical_potential() * bb.chemical_potential()).powf((d as f64 - 2.0) / 4.0);

    let r_max = pot.support_radius();
    let k_max = ka.max(kb);
    // panel short enough for both the potential scale and the j_d oscillation
    let width = pot.range().min(PI / k_max.max(1e-30)).min(r_max);
    let n_panels = (r_max / width).ceil() as usize;
    let (nodes, weights) = gauss_legendre(16);
    let mut acc = 0.0;
    for i in 0..n_panels {
        let lo = r_max * i as f64 / n_panels as f64;
        let hi = r_max * (i + 1) as f64 / n_panels as f64;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (lo + hi);
        for (x, w) in nodes.iter().zip(&weights) {
            let r = mid + half * x;
            acc += w
                * half
                * pot.evaluate(r)
                * angular_average(d, ka * r)
                * angular_average(d, kb * r)
                * r.powi(d as i32 - 1);
        }
    }
    prefactor * acc
}

/// One channel of the Fermi-surface operator: the n×n matrix (built from the
/// unscaled interaction) together with its eigendecomposition.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelSpectrum {
    pub ell: usize,
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Assemble channel ℓ of the Fermi-surface operator and diagonalize it.
pub fn channel_spectrum(model: &ModelInstance, ell: usize) -> Result<ChannelSpectrum> {
    let n = model.n_bands();
    let mut m = Array2::zeros((n, n));
    for a in 0..n {
        for b in a..n {
            let v = channel_element(model, a, b, ell)?;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    let eig = linalg::eigh(&m)?;
    Ok(ChannelSpectrum {
        ell,
        matrix: (0..n).map(|a| (0..n).map(|b| m[(a, b)]).collect()).collect(),
        eigenvalues: eig.values,
        eigenvectors: (0..n)
            .map(|j| eig.vectors.column(j).to_vec())
            .collect(),
    })
}

/// Channel matrices M_ℓ for ℓ = 0..=ell_max, with helpers for the scaled
/// operator V^d + κ V^od restricted to the Fermi surfaces.
#[derive(Debug, Clone)]
pub struct ChannelTable {
    pub dimension: usize,
    pub ell_max: usize,
    matrices: Vec<Array2<f64>>,
}

impl ChannelTable {
    pub fn matrix(&self, ell: usize) -> &Array2<f64> {
        &self.matrices[ell]
    }

    pub fn element(&self, ell: usize, a: usize, b: usize) -> f64 {
        self.matrices[ell][(a, b)]
    }

    /// Channel matrix with the off-diagonal part scaled by κ.
    pub fn scaled(&self, ell: usize, kappa: f64) -> Array2<f64> {
        let m = &self.matrices[ell];
        let mut out = m.clone();
        for ((a, b), v) in out.indexed_iter_mut() {
            if a != b {
                *v = kappa * m[(a, b)];
            }
        }
        out
    }

    /// inf spec(𝒱^d + κ 𝒱^od) over the tabulated channels.
    pub fn min_eigenvalue(&self, kappa: f64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for ell in 0..=self.ell_max {
            let w = linalg::eigvalsh(&self.scaled(ell, kappa))?;
            best = best.min(w[0]);
        }
        Ok(best)
    }
}

/// Tabulate channel matrices up to ell_max (clamped to the d = 1 range).
pub fn channel_table(model: &ModelInstance, ell_max: usize) -> Result<ChannelTable> {
    let ell_max = match max_channel(model.dimension()) {
        Some(cap) => ell_max.min(cap),
        None => ell_max,
    };
    let n = model.n_bands();
    let mut matrices = Vec::with_capacity(ell_max + 1);
    for ell in 0..=ell_max {
        let mut m = Array2::zeros((n, n));
        for a in 0..n {
            for b in a..n {
                let v = channel_element(model, a, b, ell)?;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        matrices.push(m);
    }
    Ok(ChannelTable { dimension: model.dimension(), ell_max, matrices })
}

/// Smallest intra-band channel value of band a over ℓ ≤ ell_max, with the
/// achieving channel.
pub fn intra_band_minimum(model: &ModelInstance, a: usize, ell_max: usize) -> Result<(f64, usize)> {
    let ell_max = match max_channel(model.dimension()) {
        Some(cap) => ell_max.min(cap),
        None => ell_max,
    };
    let mut best = f64::INFINITY;
    let mut best_ell = 0;
    for ell in 0..=ell_max {
        let v = channel_element(model, a, a, ell)?;
        if v < best {
            best = v;
            best_ell = ell;
        }
    }
    Ok((best, best_ell))
}

/// Degeneracy-weighted channel sum versus the closed-form trace of the
/// intra-band Fermi-surface operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceCheck {
    pub numeric: f64,
    pub analytic: f64,
}

pub fn trace_check(model: &ModelInstance, a: usize, ell_max: usize) -> Result<TraceCheck> {
    let d = model.dimension();
    let ell_max = match max_channel(d) {
        Some(cap) => ell_max.min(cap),
        None => ell_max,
    };
    let mut numeric = 0.0;
    for ell in 0..=ell_max {
        numeric += channel_degeneracy(d, ell) as f64 * channel_element(model, a, a, ell)?;
    }
    let band = model.band(a);
    let k = band.fermi_momentum();
    let analytic = 2.0
        * (2.0 * PI).powf(-(d as f64) / 2.0)
        * model.interactions().entry(a, a).fourier(d, 0.0)
        * band.mass()
        * k.powi(d as i32 - 2)
        * sphere_area(d);
    Ok(TraceCheck { numeric, analytic })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PerturbationBranch {
    /// Two or more bands share the minimal intra-band value: the enhancement
    /// is linear in |κ| with slopes A₁±.
    Degenerate,
    /// A unique strongest band: the enhancement is quadratic with constant A₂.
    UniqueMinimizer,
}

/// First/second-order response of inf spec(𝒱^d + κ 𝒱^od) at κ = 0, and the
/// derived enhancement constants.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationConstants {
    pub branch: PerturbationBranch,
    /// min_a 𝔢_a (dimensionless, in the operator's units).
    pub e_hat: f64,
    /// Bands attaining the minimum (within `DEGENERACY_TOL`).
    pub minimizing_bands: Vec<usize>,
    /// Ground channel ℓ of each minimizing band.
    pub ground_channels: Vec<usize>,
    pub u1_plus: f64,
    pub u1_minus: f64,
    pub u2: Option<f64>,
    pub a1_plus: f64,
    pub a1_minus: f64,
    pub a2: Option<f64>,
    /// Closed-form A₂ from the ℓ = 0 coefficients, available in the s-wave
    /// unique-minimizer setting as an independent cross-check.
    pub a2_closed_form: Option<f64>,
}

/// Compute the enhancement constants from the channel table.
///
/// Requires at least one attractive intra-band channel (min_a 𝔢_a < 0).
/// Bands whose minima agree within `DEGENERACY_TOL` (relative) are routed to
/// the degenerate branch.
pub fn perturbation_constants(model: &ModelInstance, ell_max: usize) -> Result<PerturbationConstants> {
    let n = model.n_bands();
    let d = model.dimension();
    let table = channel_table(model, ell_max)?;

    let mut minima = Vec::with_capacity(n);
    for a in 0..n {
        let mut best = f64::INFINITY;
        let mut best_ell = 0;
        for ell in 0..=table.ell_max {
            let v = table.element(ell, a, a);
            if v < best {
                best = v;
                best_ell = ell;
            }
        }
        minima.push((best, best_ell));
    }

    let e_hat = minima.iter().map(|&(v, _)| v).fold(f64::INFINITY, f64::min);
    if e_hat >= 0.0 {
        return Err(Error::Invalid(format!(
            "no attractive intra-band channel: min 𝔢_a = {e_hat:.6e} >= 0"
        )));
    }
    let tol = DEGENERACY_TOL * e_hat.abs();
    let minimizing: Vec<usize> =
        (0..n).filter(|&a| minima[a].0 <= e_hat + tol).collect();
    let ground_channels: Vec<usize> = minimizing.iter().map(|&a| minima[a].1).collect();

    let (branch, u1_plus, u1_minus, u2) = if minimizing.len() >= 2 {
        // joint ground space: states (band, m) for each minimizing band's
        // ground channel; inter-band coupling preserves (ℓ, m)
        let mut basis: Vec<(usize, usize, usize)> = Vec::new(); // (band, ell, m)
        for (&a, &ell) in minimizing.iter().zip(&ground_channels) {
            for m in 0..channel_degeneracy(d, ell) {
                basis.push((a, ell, m));
            }
        }
        let dim = basis.len();
        let mut g = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                let (a, la, ma) = basis[i];
                let (b, lb, mb) = basis[j];
                if a != b && la == lb && ma == mb {
                    g[(i, j)] = table.element(la, a, b);
                }
            }
        }
        let eigs = linalg::eigvalsh(&g)?;
        let lo = *eigs.first().unwrap();
        let hi = *eigs.last().unwrap();
        (PerturbationBranch::Degenerate, (-lo).max(0.0), hi.max(0.0), None)
    } else {
        let a_hat = minimizing[0];
        let ell_hat = ground_channels[0];
        let mut u2 = 0.0;
        for b in 0..n {
            if b == a_hat {
                continue;
            }
            let coupling = table.element(ell_hat, a_hat, b);
            let excited = table.element(ell_hat, b, b);
            u2 += coupling * coupling / (excited - e_hat);
        }
        (PerturbationBranch::UniqueMinimizer, 0.0, 0.0, Some(u2))
    };

    let e2 = e_hat * e_hat;
    let a2_closed_form = match branch {
        PerturbationBranch::UniqueMinimizer
            if ground_channels[0] == 0 =>
        {
            let a_hat = minimizing[0];
            let v_hat = v_coefficient(model, a_hat, a_hat);
            let mut sum = 0.0;
            for b in 0..n {
                if b == a_hat {
                    continue;
                }
                let vab = v_coefficient(model, a_hat, b);
                let vbb = v_coefficient(model, b, b);
                sum += vab * vab / (v_hat * v_hat * (v_hat - vbb).abs());
            }
            Some(sum)
        }
        _ => None,
    };

    Ok(PerturbationConstants {
        branch,
        e_hat,
        minimizing_bands: minimizing,
        ground_channels,
        u1_plus,
        u1_minus,
        u2,
        a1_plus: u1_plus / e2,
        a1_minus: u1_minus / e2,
        a2: u2.map(|u| u / e2),
        a2_closed_form,
    })
}

/// Closed-form minimal eigenvalue of the two-band ℓ = 0 channel matrix with
/// the off-diagonal coupling scaled by κ:
/// (𝔳₁₁+𝔳₂₂)/2 − sqrt(((𝔳₁₁−𝔳₂₂)/2)² + κ²𝔳₁₂²).
pub fn v_min_two_band(model: &ModelInstance, kappa: f64) -> Result<f64> {
    if model.n_bands() != 2 {
        return Err(Error::Invalid(format!(
            "two-band formula requires n = 2 (got n = {})",
            model.n_bands()
        )));
    }
    let v11 = v_coefficient(model, 0, 0);
    let v22 = v_coefficient(model, 1, 1);
    let v12 = v_coefficient(model, 0, 1);
    let mean = 0.5 * (v11 + v22);
    let half_gap = 0.5 * (v11 - v22);
    Ok(mean - (half_gap * half_gap + kappa * kappa * v12 * v12).sqrt())
}
