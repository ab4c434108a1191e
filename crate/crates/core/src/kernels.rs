//! Special-function kernels and quadrature grids: the angular average j_d,
//! the thermal symbol K_T, angular-momentum channel projections of radial
//! potentials, and momentum grids clustered at the Fermi surfaces.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{sphere_area, BandDispersion, ModelInstance};
use crate::quad::{cached_rule, gauss_legendre};
use crate::special::{legendre, sinc};

/// j_d(y): the normalized average of e^{i y p·e₁} over the unit sphere
/// S^{d-1}; real, even, and j_d(0) = 1.
pub fn angular_average(d: usize, y: f64) -> f64 {
    let y = y.abs();
    match d {
        1 => y.cos(),
        2 => libm::j0(y),
        3 => sinc(y),
        _ => panic!("dimension {d} out of range"),
    }
}

/// Number of angular-momentum states in channel ℓ for dimension d.
pub fn channel_degeneracy(d: usize, ell: usize) -> usize {
    match d {
        1 => 1,
        2 => {
            if ell == 0 {
                1
            } else {
                2
            }
        }
        3 => 2 * ell + 1,
        _ => panic!("dimension {d} out of range"),
    }
}

/// Largest meaningful channel index, if the dimension bounds it (d = 1 has
/// only the even/odd sectors).
pub fn max_channel(d: usize) -> Option<usize> {
    if d == 1 {
        Some(1)
    } else {
        None
    }
}

fn check_channel(d: usize, ell: usize) -> Result<()> {
    if let Some(max) = max_channel(d) {
        if ell > max {
            return Err(Error::ChannelOutOfRange { ell, d });
        }
    }
    Ok(())
}

/// K_T(ε) = ε / tanh(ε/2T), the thermal symbol of the linearized gap
/// operator; even in ε, ≥ max(|ε|, 2T), with the removable singularity at
/// ε = 0 evaluated as 2T.
pub fn kt_from_energy(energy: f64, temperature: f64) -> f64 {
    debug_assert!(temperature > 0.0);
    let x = energy / (2.0 * temperature);
    if x.abs() < 1e-4 {
        // x/tanh(x) = 1 + x²/3 − x⁴/45 + O(x⁶)
        let x2 = x * x;
        2.0 * temperature * (1.0 + x2 / 3.0 - x2 * x2 / 45.0)
    } else {
        energy / x.tanh()
    }
}

/// K_{T,a}(p) for one band.
pub fn kt_symbol(band: &BandDispersion, p: f64, temperature: f64) -> f64 {
    kt_from_energy(band.energy(p), temperature)
}

/// Projection of a radial momentum kernel V̂(|p − q|) onto angular channel ℓ
/// between spheres of radii p and q, normalized so a constant V̂ projects to
/// itself at ℓ = 0 and to zero for ℓ ≥ 1.
///
/// d = 3 uses Legendre weights, d = 2 Chebyshev/cosine weights, d = 1 the
/// parity split. Quadrature order starts at 64 and doubles until two
/// successive estimates agree to 1e-9 (relative to the kernel scale).
pub fn channel_projection<F: Fn(f64) -> f64>(
    d: usize,
    ell: usize,
    p: f64,
    q: f64,
    vhat: &F,
) -> Result<f64> {
    check_channel(d, ell)?;
    debug_assert!(p > 0.0 && q > 0.0);
    let near = vhat((p - q).abs());
    let far = vhat(p + q);
    if d == 1 {
        return Ok(match ell {
            0 => 0.5 * (near + far),
            _ => 0.5 * (near - far),
        });
    }

    let scale = near.abs().max(far.abs()).max(1e-300);
    let tol = 1e-9 * scale;
    let momentum = |t: f64| (p * p + q * q - 2.0 * p * q * t).max(0.0).sqrt();

    let estimate = |order: usize| -> f64 {
        match d {
            3 => {
                let (nodes, weights) = cached_rule(order);
                let mut acc = 0.0;
                for (t, w) in nodes.iter().zip(weights) {
                    acc += w * vhat(momentum(*t)) * legendre(ell, *t);
                }
                0.5 * acc
            }
            2 => {
                // midpoint rule in the angle; spectrally accurate for the
                // periodic analytic integrand
                let m = order;
                let h = PI / m as f64;
                let mut acc = 0.0;
                for j in 0..m {
                    let theta = (j as f64 + 0.5) * h;
                    acc += vhat(momentum(theta.cos())) * (ell as f64 * theta).cos();
                }
                acc * h / PI
            }
            _ => unreachable!(),
        }
    };

    let mut order = 64;
    let mut value = estimate(order);
    while order < 1024 {
        order *= 2;
        let refined = estimate(order);
        let disagreement = (refined - value).abs();
        value = refined;
        if disagreement <= tol {
            break;
        }
    }
    Ok(value)
}

/// Channel-ℓ kernel of the pair potential V_ab between momenta p and q.
pub fn channel_kernel(
    model: &ModelInstance,
    a: usize,
    b: usize,
    ell: usize,
    p: f64,
    q: f64,
) -> Result<f64> {
    let d = model.dimension();
    let pot = *model.interactions().entry(a, b);
    channel_projection(d, ell, p, q, &|r| pot.fourier(d, r))
}

/// Constant c_d = (2π)^{-d/2} |S^{d-1}| relating the channel kernel to the
/// radial Nyström kernel with measure p^{d-1} dp.
pub fn nystrom_prefactor(d: usize) -> f64 {
    (2.0 * PI).powf(-(d as f64) / 2.0) * sphere_area(d)
}

// ---------------------------------------------------------------------------
// Radial grids
// ---------------------------------------------------------------------------

/// Half-width (relative to k_F) of the region that gets geometric clustering.
const CLUSTER_EXTENT: f64 = 0.4;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridOptions {
    /// Target node budget per band; the actual count is at least this when
    /// the temperature demands more clustering levels.
    pub points_per_band: usize,
    /// UV cutoff as a multiple of the largest Fermi momentum.
    pub uv_cutoff_factor: f64,
    /// Density multiplier near the Fermi momentum (> 0); 1.0 resolves the
    /// thermal width T/v_F with the innermost panel.
    pub clustering_scale: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { points_per_band: 96, uv_cutoff_factor: 12.0, clustering_scale: 1.0 }
    }
}

/// Quadrature nodes/weights for one band; weights absorb the p^{d-1} dp
/// measure.
#[derive(Debug, Clone)]
pub struct BandGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Composite per-band momentum grid on (0, uv_cutoff), clustered at each
/// band's Fermi momentum tightly enough for temperatures down to
/// `design_temperature`. Immutable once built.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    bands: Vec<BandGrid>,
    offsets: Vec<usize>,
    band_of: Vec<usize>,
    pub dimension: usize,
    pub uv_cutoff: f64,
    pub design_temperature: f64,
}

impl RadialGrid {
    pub fn bands(&self) -> &[BandGrid] {
        &self.bands
    }

    pub fn band_grid(&self, a: usize) -> &BandGrid {
        &self.bands[a]
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn total_points(&self) -> usize {
        self.band_of.len()
    }

    /// Offset of band a's nodes in the flattened index.
    pub fn band_offset(&self, a: usize) -> usize {
        self.offsets[a]
    }

    /// Band owning each flattened index.
    pub fn band_of(&self) -> &[usize] {
        &self.band_of
    }

    /// (band, node, weight) in flattened order.
    pub fn flat_iter(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.bands.iter().enumerate().flat_map(|(a, bg)| {
            bg.nodes.iter().zip(&bg.weights).map(move |(&p, &w)| (a, p, w))
        })
    }

    /// Σ w_i per band; should equal ∫_0^Λ p^{d-1} dp = Λ^d / d.
    pub fn measure_sum(&self, a: usize) -> f64 {
        self.bands[a].weights.iter().sum()
    }
}

/// Build the composite grid for `model` at design temperature `temperature`.
/// The grid is valid for any evaluation temperature ≥ the design value.
pub fn build_grid(
    model: &ModelInstance,
    temperature: f64,
    opts: &GridOptions,
) -> Result<RadialGrid> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Grid(format!("design temperature must be positive (got {temperature})")));
    }
    if opts.points_per_band < 16 {
        return Err(Error::Grid(format!(
            "points_per_band must be at least 16 (got {})",
            opts.points_per_band
        )));
    }
    if !(opts.uv_cutoff_factor >= 4.0) {
        return Err(Error::Grid(format!(
            "uv_cutoff_factor must be at least 4 (got {})",
            opts.uv_cutoff_factor
        )));
    }
    if !(opts.clustering_scale > 0.0) {
        return Err(Error::Grid(format!(
            "clustering_scale must be positive (got {})",
            opts.clustering_scale
        )));
    }

    let d = model.dimension();
    let cutoff = opts.uv_cutoff_factor * model.max_fermi_momentum();
    let mut bands = Vec::with_capacity(model.n_bands());

    for (a, band) in model.bands().iter().enumerate() {
        let k = band.fermi_momentum();
        // width of the K_T^{-1} peak in momentum
        let width = temperature * band.mass() / k / opts.clustering_scale;
        let extent = CLUSTER_EXTENT * k;
        if width >= extent {
            return Err(Error::Grid(format!(
                "band {}: clustering panel degenerates (T/v_F = {width:.3e} exceeds \
                 {extent:.3e}); the temperature is too large for this bandwidth",
                a + 1
            )));
        }
        let levels = (extent / width).log2().ceil().max(1.0) as usize;

        // panel edges over (0, cutoff]
        let mut edges: Vec<f64> = vec![0.0, 0.5 * (k - extent), k - extent];
        for j in 1..=levels {
            edges.push(k - extent * 0.5f64.powi(j as i32));
        }
        edges.push(k);
        for j in (1..=levels).rev() {
            edges.push(k + extent * 0.5f64.powi(j as i32));
        }
        edges.push(k + extent);
        let mut b = k + extent;
        while b < cutoff {
            b = (2.0 * b).min(cutoff);
            edges.push(b);
        }

        let n_panels = edges.len() - 1;
        let order = (opts.points_per_band + n_panels - 1) / n_panels;
        let order = order.max(6);
        let (gl_nodes, gl_weights) = gauss_legendre(order);

        let mut nodes = Vec::with_capacity(order * n_panels);
        let mut weights = Vec::with_capacity(order * n_panels);
        for pair in edges.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[0] + pair[1]);
            for (x, w) in gl_nodes.iter().zip(&gl_weights) {
                let p = mid + half * x;
                nodes.push(p);
                weights.push(w * half * p.powi(d as i32 - 1));
            }
        }
        bands.push(BandGrid { nodes, weights });
    }

    let mut offsets = Vec::with_capacity(bands.len());
    let mut band_of = Vec::new();
    let mut acc = 0;
    for (a, bg) in bands.iter().enumerate() {
        offsets.push(acc);
        acc += bg.nodes.len();
        band_of.extend(std::iter::repeat(a).take(bg.nodes.len()));
    }

    Ok(RadialGrid {
        bands,
        offsets,
        band_of,
        dimension: d,
        uv_cutoff: cutoff,
        design_temperature: temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelConfig};
    use approx::assert_relative_eq;

    fn single_band() -> ModelInstance {
        let cfg = ModelConfig::from_toml_str(
            r#"
            dimension = 3
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[interactions]]
            pair = [1, 1]
            family = "gaussian"
            strength = -2.0
            range = 1.0
            "#,
        )
        .unwrap();
        build_model(&cfg).unwrap()
    }

    #[test]
    fn angular_average_at_zero_is_one() {
        for d in 1..=3 {
            assert_relative_eq!(angular_average(d, 0.0), 1.0);
        }
    }

    #[test]
    fn angular_average_closed_forms() {
        assert_relative_eq!(angular_average(3, PI), 0.0, epsilon = 1e-15);
        assert_relative_eq!(angular_average(1, PI), -1.0, epsilon = 1e-15);
        assert_relative_eq!(angular_average(3, 2.0), 2.0f64.sin() / 2.0, epsilon = 1e-15);
        // evenness
        for d in 1..=3 {
            for y in [0.3, 1.7, 9.2] {
                assert_eq!(angular_average(d, y), angular_average(d, -y));
            }
        }
    }

    #[test]
    fn kt_symbol_limits() {
        let band = BandDispersion::new(0.5, 1.0).unwrap();
        let t = 0.1;
        // removable singularity at the Fermi surface
        assert_relative_eq!(kt_symbol(&band, 1.0, t), 2.0 * t, max_relative = 1e-12);
        // ε = 2T
        assert_relative_eq!(
            kt_from_energy(2.0 * t, t),
            2.0 * t / 1.0f64.tanh(),
            max_relative = 1e-14
        );
        // tanh saturation at ε = 100 T
        assert_relative_eq!(kt_from_energy(100.0 * t, t), 100.0 * t, max_relative = 1e-8);
        // even in ε and bounded below by 2T
        for e in [-3.0, -0.5, -1e-6, 0.0, 1e-6, 0.5, 3.0] {
            assert_relative_eq!(kt_from_energy(e, t), kt_from_energy(-e, t), max_relative = 1e-14);
            assert!(kt_from_energy(e, t) >= 2.0 * t * (1.0 - 1e-15));
            assert!(kt_from_energy(e, t) >= e.abs());
        }
    }

    #[test]
    fn kt_symbol_monotone_in_temperature() {
        for e in [0.0, 1e-8, 1e-3, 0.3, 5.0] {
            let mut prev = 0.0;
            for i in 0..60 {
                let t = 1e-6 * 1.5f64.powi(i);
                let v = kt_from_energy(e, t);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn constant_kernel_projects_onto_s_wave_only() {
        let c = 0.37;
        let flat = |_r: f64| c;
        for d in 2..=3 {
            assert_relative_eq!(
                channel_projection(d, 0, 1.0, 1.3, &flat).unwrap(),
                c,
                max_relative = 1e-12
            );
            for ell in 1..=4 {
                assert!(channel_projection(d, ell, 1.0, 1.3, &flat).unwrap().abs() < 1e-12);
            }
        }
        assert_relative_eq!(channel_projection(1, 0, 1.0, 1.3, &flat).unwrap(), c);
        assert_relative_eq!(channel_projection(1, 1, 1.0, 1.3, &flat).unwrap(), 0.0);
        assert!(channel_projection(1, 2, 1.0, 1.3, &flat).is_err());
    }

    #[test]
    fn channel_kernel_is_pair_symmetric() {
        let cfg = ModelConfig::from_toml_str(
            r#"
            dimension = 3
            [[bands]]
            mass = 0.5
            mu = 1.0
            [[bands]]
            mass = 0.8
            mu = 0.6
            [[interactions]]
            pair = [1, 2]
            family = "exponential"
            strength = -1.1
            range = 0.7
            "#,
        )
        .unwrap();
        let model = build_model(&cfg).unwrap();
        for ell in [0usize, 1, 3] {
            let pq = channel_kernel(&model, 0, 1, ell, 0.9, 1.2).unwrap();
            let qp = channel_kernel(&model, 1, 0, ell, 1.2, 0.9).unwrap();
            assert_relative_eq!(pq, qp, max_relative = 1e-13);
        }
    }

    #[test]
    fn grid_measure_is_exact() {
        let model = single_band();
        let grid = build_grid(&model, 0.01, &GridOptions::default()).unwrap();
        let d = model.dimension() as f64;
        let exact = grid.uv_cutoff.powf(d) / d;
        assert_relative_eq!(grid.measure_sum(0), exact, max_relative = 1e-12);
    }

    #[test]
    fn grid_rejects_degenerate_clustering() {
        let model = single_band();
        // T of order the bandwidth: no resolvable thermal peak
        let err = build_grid(&model, 5.0, &GridOptions::default());
        assert!(err.is_err());
    }

    #[test]
    fn grid_rejects_bad_options() {
        let model = single_band();
        let mut opts = GridOptions::default();
        opts.points_per_band = 8;
        assert!(build_grid(&model, 0.01, &opts).is_err());
        let mut opts = GridOptions::default();
        opts.clustering_scale = 0.0;
        assert!(build_grid(&model, 0.01, &opts).is_err());
        assert!(build_grid(&model, -1.0, &GridOptions::default()).is_err());
    }

    #[test]
    fn grid_nodes_stay_inside_domain() {
        let model = single_band();
        let grid = build_grid(&model, 1e-5, &GridOptions::default()).unwrap();
        for (_, p, w) in grid.flat_iter() {
            assert!(p > 0.0 && p < grid.uv_cutoff);
            assert!(w > 0.0);
        }
    }
}
