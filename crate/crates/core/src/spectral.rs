//! The discretized Birman–Schwinger operator and everything spectral built on
//! it: minimum eigenvalues, the critical-temperature bisection, κ-thresholds,
//! and the singular/bounded split of the operator at low temperature.
//!
//! The operator is assembled in its symmetric congruent form
//! λ K_T^{-1/2} V K_T^{-1/2}, which is isospectral to λ V^{1/2} K_T^{-1} |V|^{1/2};
//! radial interactions never mix angular channels, so each channel ℓ is a
//! dense symmetric N×N matrix over the flattened per-band grid, with entry
//!
//! ```text
//! M[(a,i),(b,j)] = λ κ^{[a≠b]} c_d √(w_i w_j) W_ℓ(p_i, q_j) / √(K_{T,a}(p_i) K_{T,b}(q_j))
//! ```
//!
//! (weights carry the p^{d-1} dp measure, c_d = (2π)^{-d/2}|S^{d-1}|).
//! The critical temperature is the T where the minimum eigenvalue crosses −1.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{
    build_grid, channel_projection, kt_symbol, max_channel, nystrom_prefactor, GridOptions,
    RadialGrid,
};
use crate::linalg;
use crate::model::{coupling_scale, ModelInstance};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverOptions {
    /// Channels 0..=ell_max are scanned (d = 1 caps this at 1).
    pub ell_max: usize,
    /// Relative temperature width at which the bisection stops.
    pub bisect_tol: f64,
    /// Eigenvalue slack around the −1 crossing.
    pub eig_tol: f64,
    /// T_floor = factor × max μ; lower critical temperatures are reported
    /// categorically as "not found".
    pub temperature_floor_factor: f64,
    /// T_ceiling = factor × max μ for the initial bracket.
    pub temperature_ceiling_factor: f64,
    pub grid: GridOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            ell_max: 6,
            bisect_tol: 1e-6,
            eig_tol: 1e-9,
            temperature_floor_factor: 1e-9,
            temperature_ceiling_factor: 10.0,
            grid: GridOptions::default(),
        }
    }
}

impl SolverOptions {
    pub fn temperature_floor(&self, model: &ModelInstance) -> f64 {
        self.temperature_floor_factor * model.max_chemical_potential()
    }

    pub fn temperature_ceiling(&self, model: &ModelInstance) -> f64 {
        self.temperature_ceiling_factor * model.max_chemical_potential()
    }

    fn ell_cap(&self, model: &ModelInstance) -> usize {
        match max_channel(model.dimension()) {
            Some(cap) => self.ell_max.min(cap),
            None => self.ell_max,
        }
    }
}

/// Raw channel-ℓ kernel values W_ℓ(p_i, q_j) between all pairs of grid nodes
/// (temperature- and coupling-independent; reusable across a bisection).
pub struct ChannelKernels {
    pub ell: usize,
    raw: Array2<f64>,
}

impl ChannelKernels {
    pub fn raw(&self) -> &Array2<f64> {
        &self.raw
    }
}

/// Tabulate the channel-ℓ kernel between every pair of grid nodes.
pub fn channel_kernels(model: &ModelInstance, grid: &RadialGrid, ell: usize) -> Result<ChannelKernels> {
    let d = model.dimension();
    let n = grid.total_points();
    let flat: Vec<(usize, f64)> = grid.flat_iter().map(|(a, p, _)| (a, p)).collect();
    let mut raw = Array2::zeros((n, n));
    for i in 0..n {
        let (a, p) = flat[i];
        for j in i..n {
            let (b, q) = flat[j];
            let pot = *model.interactions().entry(a, b);
            let w = if pot.is_zero() {
                0.0
            } else {
                channel_projection(d, ell, p, q, &|r| pot.fourier(d, r))?
            };
            raw[(i, j)] = w;
            raw[(j, i)] = w;
        }
    }
    Ok(ChannelKernels { ell, raw })
}

/// One assembled channel of the Birman–Schwinger operator.
pub struct ChannelOperator {
    pub ell: usize,
    pub temperature: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub matrix: Array2<f64>,
}

/// Assemble from precomputed kernels (the hot path during bisection).
pub fn assemble_with_kernels(
    model: &ModelInstance,
    grid: &RadialGrid,
    kernels: &ChannelKernels,
    temperature: f64,
    lambda: f64,
    kappa: f64,
) -> Result<ChannelOperator> {
    if temperature < grid.design_temperature {
        return Err(Error::GridTemperatureMismatch {
            t: temperature,
            design: grid.design_temperature,
        });
    }
    let n = grid.total_points();
    let c_d = nystrom_prefactor(model.dimension());
    let band_of = grid.band_of();

    // √w / √K_T per flattened node
    let scale: Vec<f64> = grid
        .flat_iter()
        .map(|(a, p, w)| (w / kt_symbol(model.band(a), p, temperature)).sqrt())
        .collect();

    let raw = kernels.raw();
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let coupling = coupling_scale(lambda, kappa, band_of[i], band_of[j]);
            let v = coupling * c_d * scale[i] * scale[j] * raw[(i, j)];
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(ChannelOperator { ell: kernels.ell, temperature, lambda, kappa, matrix })
}

/// Assemble channel ℓ from scratch.
pub fn assemble_operator(
    model: &ModelInstance,
    grid: &RadialGrid,
    temperature: f64,
    lambda: f64,
    kappa: f64,
    ell: usize,
) -> Result<ChannelOperator> {
    let kernels = channel_kernels(model, grid, ell)?;
    assemble_with_kernels(model, grid, &kernels, temperature, lambda, kappa)
}

/// Smallest eigenvalue and eigenvector of an assembled channel.
pub fn min_eigenvalue(op: &ChannelOperator) -> Result<(f64, Vec<f64>)> {
    linalg::min_eigenpair(&op.matrix)
}

// ---------------------------------------------------------------------------
// Critical temperature
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub enum TcOutcome {
    Found { tc: f64 },
    /// min eig stayed above −1 for every channel down to the floor.
    NotFound { floor: f64, min_eig_at_floor: f64 },
}

impl TcOutcome {
    pub fn found(&self) -> Option<f64> {
        match self {
            TcOutcome::Found { tc } => Some(*tc),
            TcOutcome::NotFound { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint {
    pub channel: usize,
    pub temperature: f64,
    pub min_eig: f64,
}

/// Bracketing evidence around the located T_c: min eig below −1 just under
/// T_c and above −1 just over it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Certificate {
    pub t_below: f64,
    pub eig_below: f64,
    pub t_above: f64,
    pub eig_above: f64,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.eig_below < -1.0 && self.eig_above > -1.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TcResult {
    pub outcome: TcOutcome,
    pub bracket: Option<(f64, f64)>,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Channel achieving the largest T_c.
    pub channel: Option<usize>,
    pub iterations: usize,
    pub min_eig_at_tc: Option<f64>,
    pub grid_points: usize,
    pub certificate: Option<Certificate>,
}

/// Grid + kernel cache that rebuilds itself whenever an evaluation needs a
/// lower design temperature than the current grid provides.
pub(crate) struct Workspace<'m> {
    model: &'m ModelInstance,
    opts: SolverOptions,
    grid: RadialGrid,
    kernels: Vec<Option<ChannelKernels>>,
    floor: f64,
}

impl<'m> Workspace<'m> {
    pub(crate) fn new(model: &'m ModelInstance, opts: &SolverOptions, design: f64) -> Result<Self> {
        let grid = build_grid(model, design, &opts.grid)?;
        let floor = opts.temperature_floor(model);
        Ok(Self {
            model,
            opts: *opts,
            grid,
            kernels: (0..=opts.ell_cap(model)).map(|_| None).collect(),
            floor,
        })
    }

    /// Rebuild the grid (and drop cached kernels) if `t` undercuts the
    /// current design temperature.
    fn ensure_design(&mut self, t: f64) -> Result<()> {
        if t < self.grid.design_temperature {
            let design = (t / 16.0).max(0.05 * self.floor).min(t);
            self.grid = build_grid(self.model, design, &self.opts.grid)?;
            for slot in &mut self.kernels {
                *slot = None;
            }
        }
        Ok(())
    }

    fn build_kernels(&mut self, ell: usize) -> Result<()> {
        if self.kernels[ell].is_none() {
            self.kernels[ell] = Some(channel_kernels(self.model, &self.grid, ell)?);
        }
        Ok(())
    }

    pub(crate) fn min_eig(&mut self, ell: usize, t: f64, lambda: f64, kappa: f64) -> Result<f64> {
        self.ensure_design(t)?;
        self.build_kernels(ell)?;
        let kernels = self.kernels[ell].as_ref().unwrap();
        let op = assemble_with_kernels(self.model, &self.grid, kernels, t, lambda, kappa)?;
        Ok(linalg::eigvalsh(&op.matrix)?[0])
    }
}

/// Locate T_c(λ, κ): for each channel ℓ ≤ ell_max, bisect the minimum
/// eigenvalue of the assembled operator on −1 (it is nondecreasing in T),
/// and return the largest channel-wise critical temperature.
pub fn critical_temperature(
    model: &ModelInstance,
    lambda: f64,
    kappa: f64,
    opts: &SolverOptions,
) -> Result<TcResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Invalid(format!("lambda must be positive (got {lambda})")));
    }
    let floor = opts.temperature_floor(model);
    let ceiling = opts.temperature_ceiling(model);
    let ell_cap = opts.ell_cap(model);

    let initial_design = (0.01 * model.max_chemical_potential()).max(floor);
    let mut ws = Workspace::new(model, opts, initial_design)?;

    let mut trajectory = Vec::new();
    let mut iterations = 0usize;
    let mut best: Option<(f64, usize, (f64, f64), f64)> = None; // (tc, ell, bracket, eig_at_tc)
    let mut floor_eig: Option<f64> = None;

    for ell in 0..=ell_cap {
        let mut eval = |ws: &mut Workspace, t: f64, traj: &mut Vec<TrajectoryPoint>| -> Result<f64> {
            let e = ws.min_eig(ell, t, lambda, kappa)?;
            traj.push(TrajectoryPoint { channel: ell, temperature: t, min_eig: e });
            iterations += 1;
            Ok(e)
        };

        // a channel can only matter if it is still supercritical just above
        // the best T_c found so far
        let mut lo = if let Some((best_tc, _, _, _)) = best {
            let probe = best_tc * (1.0 + 4.0 * opts.bisect_tol);
            let e = eval(&mut ws, probe, &mut trajectory)?;
            if e >= -1.0 {
                continue;
            }
            probe
        } else {
            let e_ceiling = eval(&mut ws, ceiling, &mut trajectory)?;
            if e_ceiling < -1.0 - opts.eig_tol {
                return Err(Error::Bracket(format!(
                    "channel {ell}: min eig {e_ceiling:.6} is below -1 at the ceiling \
                     temperature {ceiling:.3e}; the couplings are too strong for this solver"
                )));
            }
            // descend in factors of 8 until supercritical or at the floor
            let mut t = ceiling;
            let mut found_lo = None;
            while t > floor {
                t = (t / 8.0).max(floor);
                let e = eval(&mut ws, t, &mut trajectory)?;
                if e < -1.0 {
                    found_lo = Some(t);
                    break;
                }
            }
            match found_lo {
                Some(t) => t,
                None => {
                    let e_floor = trajectory.last().unwrap().min_eig;
                    floor_eig = Some(floor_eig.map_or(e_floor, |v: f64| v.min(e_floor)));
                    continue;
                }
            }
        };

        // ascend to re-establish the upper end of the bracket
        let mut hi = lo;
        loop {
            hi = (hi * 8.0).min(ceiling);
            let e = eval(&mut ws, hi, &mut trajectory)?;
            if e >= -1.0 {
                break;
            }
            if hi >= ceiling {
                return Err(Error::Bracket(format!(
                    "channel {ell}: still supercritical at the ceiling temperature {ceiling:.3e}"
                )));
            }
            lo = hi;
        }

        // bisection in log T on the monotone min eigenvalue
        let mut eig_mid = f64::NAN;
        while hi / lo - 1.0 > opts.bisect_tol {
            let mid = (lo * hi).sqrt();
            let e = eval(&mut ws, mid, &mut trajectory)?;
            eig_mid = e;
            if e < -1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tc = (lo * hi).sqrt();

        match best {
            Some((best_tc, _, _, _)) if best_tc >= tc => {}
            _ => best = Some((tc, ell, (lo, hi), eig_mid)),
        }
    }

    let grid_points = ws.grid.total_points();
    match best {
        Some((tc, ell, bracket, eig_at_tc)) => {
            let delta = 2.0 * opts.bisect_tol * tc;
            let eig_below = ws.min_eig(ell, tc - delta, lambda, kappa)?;
            let eig_above = ws.min_eig(ell, tc + delta, lambda, kappa)?;
            iterations += 2;
            Ok(TcResult {
                outcome: TcOutcome::Found { tc },
                bracket: Some(bracket),
                trajectory,
                channel: Some(ell),
                iterations,
                min_eig_at_tc: Some(eig_at_tc),
                grid_points,
                certificate: Some(Certificate {
                    t_below: tc - delta,
                    eig_below,
                    t_above: tc + delta,
                    eig_above,
                }),
            })
        }
        None => Ok(TcResult {
            outcome: TcOutcome::NotFound {
                floor,
                min_eig_at_floor: floor_eig.unwrap_or(f64::NAN),
            },
            bracket: None,
            trajectory,
            channel: None,
            iterations,
            min_eig_at_tc: None,
            grid_points,
            certificate: None,
        }),
    }
}

// ---------------------------------------------------------------------------
// κ-thresholds and fixed-temperature probes
// ---------------------------------------------------------------------------

/// Reusable evaluator of κ ↦ min eig of the full operator (minimum over
/// channels) at one fixed temperature. The map is a minimum of concave
/// functions of κ, hence concave.
pub struct SpectralProbe<'m> {
    ws: Workspace<'m>,
    pub temperature: f64,
    pub lambda: f64,
    ell_cap: usize,
}

impl<'m> SpectralProbe<'m> {
    pub fn new(
        model: &'m ModelInstance,
        temperature: f64,
        lambda: f64,
        opts: &SolverOptions,
    ) -> Result<Self> {
        let mut ws = Workspace::new(model, opts, temperature)?;
        ws.ensure_design(temperature)?;
        Ok(Self { ws, temperature, lambda, ell_cap: opts.ell_cap(model) })
    }

    /// min over channels of the smallest eigenvalue at this temperature.
    pub fn min_eig(&mut self, kappa: f64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for ell in 0..=self.ell_cap {
            best = best.min(self.ws.min_eig(ell, self.temperature, self.lambda, kappa)?);
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub enum ThresholdOutcome {
    /// f(κ) crosses the tolerance band at this |κ|.
    Crossing(f64),
    /// No crossing found below the scan bound.
    NoCrossingWithin(f64),
    /// T_c(λ, 0) itself was not found; any κ ≠ 0 that produces
    /// superconductivity enhances it, so the threshold is 0 by convention.
    BaselineNormal,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaThresholds {
    pub minus: ThresholdOutcome,
    pub plus: ThresholdOutcome,
    pub tc_reference: Option<f64>,
    /// f(0) — how far the κ = 0 operator sits from the exact crossing; a
    /// measure of the solver slack inherited from the T_c bisection.
    pub f_at_zero: f64,
}

/// Locate the κ-interval on which T_c(λ, κ) = T_c(λ, 0): evaluates
/// f(κ) = min eig(T_c(λ,0); κ) + 1 (concave, f(0) ≈ 0) and finds its
/// zero-crossings on both sides by scan + bisection.
pub fn kappa_thresholds(
    model: &ModelInstance,
    lambda: f64,
    opts: &SolverOptions,
    kappa_scan_max: f64,
) -> Result<KappaThresholds> {
    let tc0 = critical_temperature(model, lambda, 0.0, opts)?;
    let Some(tc) = tc0.outcome.found() else {
        return Ok(KappaThresholds {
            minus: ThresholdOutcome::BaselineNormal,
            plus: ThresholdOutcome::BaselineNormal,
            tc_reference: None,
            f_at_zero: f64::NAN,
        });
    };

    let mut probe = SpectralProbe::new(model, tc, lambda, opts)?;
    let f0 = probe.min_eig(0.0)? + 1.0;
    let tol_f = (4.0 * f0.abs()).max(1e-5);

    let mut side = |sign: f64| -> Result<ThresholdOutcome> {
        let mut prev = 0.0;
        for j in (0..=12).rev() {
            let kappa = kappa_scan_max * 0.5f64.powi(j);
            let f = probe.min_eig(sign * kappa)? + 1.0;
            if f < -tol_f {
                // bisect the crossing inside (prev, kappa)
                let (mut lo, mut hi) = (prev, kappa);
                for _ in 0..40 {
                    if hi - lo <= 1e-3 * hi.max(1e-12) {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let fm = probe.min_eig(sign * mid)? + 1.0;
                    if fm < -tol_f {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(ThresholdOutcome::Crossing(0.5 * (lo + hi)));
            }
            prev = kappa;
        }
        Ok(ThresholdOutcome::NoCrossingWithin(kappa_scan_max))
    };

    let plus = side(1.0)?;
    let minus = side(-1.0)?;
    Ok(KappaThresholds { minus, plus, tc_reference: Some(tc), f_at_zero: f0 })
}

// ---------------------------------------------------------------------------
// Singular/bounded split
// ---------------------------------------------------------------------------

/// Check of the low-temperature structure of the Birman–Schwinger operator:
/// sandwiching K_T^{-1} = 2 log(T0/T) δ(ε) + M_T between the (κ-scaled,
/// λ-free) interaction V gives, per channel, a rank-≤n singular matrix built
/// from the kernel evaluated at the Fermi radii plus a remainder V M_T V
/// whose spectral norm should stay bounded uniformly as T → 0.
///
/// Returns the largest remainder norm over channels ℓ ≤ ell_max, i.e.
/// ‖B_T − λ log(T0/T) (singular part)‖ / λ for the V-sandwiched form.
pub fn singular_split_norm(
    model: &ModelInstance,
    grid: &RadialGrid,
    temperature: f64,
    lambda: f64,
    kappa: f64,
    t0: f64,
    ell_max: usize,
) -> Result<f64> {
    if temperature < grid.design_temperature {
        return Err(Error::GridTemperatureMismatch {
            t: temperature,
            design: grid.design_temperature,
        });
    }
    let _ = lambda; // the sandwiched remainder is linear in λ, which cancels
    let d = model.dimension();
    let n_bands = model.n_bands();
    let n = grid.total_points();
    let c_d = nystrom_prefactor(d);
    let band_of = grid.band_of();
    let flat: Vec<(usize, f64, f64)> = grid.flat_iter().collect();

    let log_factor = (t0 / temperature).ln();
    let ell_cap = match max_channel(d) {
        Some(cap) => ell_max.min(cap),
        None => ell_max,
    };

    let mut worst: f64 = 0.0;
    for ell in 0..=ell_cap {
        let kernels = channel_kernels(model, grid, ell)?;
        // κ-scaled kernel matrix A[i,j] = κ^{[a≠b]} c_d W_ℓ(p_i, p_j)
        let mut a = kernels.raw().clone();
        for ((i, j), v) in a.indexed_iter_mut() {
            *v *= coupling_scale(1.0, kappa, band_of[i], band_of[j]) * c_d;
        }

        // regular part: Σ_r A[i,r] (w_r / K(p_r)) A[r,j]
        let mut weighted = a.clone();
        for (r, col) in weighted.columns_mut().into_iter().enumerate() {
            let (band, p, w) = flat[r];
            let factor = w / kt_symbol(model.band(band), p, temperature);
            for v in col {
                *v *= factor;
            }
        }
        let mut remainder = weighted.dot(&a);

        // singular part: 2 Σ_c m_c k_c^{d-2} F[i,c] F[j,c] with
        // F[i,c] = κ^{[..]} c_d W_ℓ(p_i, k_c)
        let mut fermi = Array2::zeros((n, n_bands));
        for c in 0..n_bands {
            let kc = model.band(c).fermi_momentum();
            for i in 0..n {
                let (bi, p, _) = flat[i];
                let pot = *model.interactions().entry(bi, c);
                let w = if pot.is_zero() {
                    0.0
                } else {
                    channel_projection(d, ell, p, kc, &|r| pot.fourier(d, r))?
                };
                fermi[(i, c)] = coupling_scale(1.0, kappa, bi, c) * c_d * w;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for c in 0..n_bands {
                    let band = model.band(c);
                    let kc = band.fermi_momentum();
                    s += 2.0 * band.mass() * kc.powi(d as i32 - 2) * fermi[(i, c)] * fermi[(j, c)];
                }
                remainder[(i, j)] -= log_factor * s;
            }
        }

        // symmetrize with the quadrature weights
        for ((i, j), v) in remainder.indexed_iter_mut() {
            *v *= (flat[i].2 * flat[j].2).sqrt();
        }
        worst = worst.max(linalg::spectral_norm(&remainder)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    fn fast_opts() -> SolverOptions {
        let mut opts = SolverOptions::default();
        opts.grid.points_per_band = 48;
        opts.ell_max = 2;
        opts
    }

    #[test]
    fn zero_coupling_gives_zero_operator() {
        let model = presets::single_band_attractive();
        let grid = build_grid(&model, 0.01, &GridOptions::default()).unwrap();
        let op = assemble_operator(&model, &grid, 0.02, 0.0, 0.0, 0).unwrap();
        assert_eq!(op.matrix.iter().map(|v| v.abs()).fold(0.0, f64::max), 0.0);
        let (e, _) = min_eigenvalue(&op).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn assembled_operator_is_symmetric() {
        let model = presets::two_band_dominant();
        let grid = build_grid(&model, 0.01, &GridOptions { points_per_band: 32, ..Default::default() })
            .unwrap();
        let op = assemble_operator(&model, &grid, 0.02, 0.3, 0.4, 0).unwrap();
        let norm = op.matrix.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut asym: f64 = 0.0;
        for i in 0..op.matrix.nrows() {
            for j in 0..i {
                asym = asym.max((op.matrix[(i, j)] - op.matrix[(j, i)]).abs());
            }
        }
        assert!(asym <= 1e-14 * norm);
    }

    #[test]
    fn kappa_zero_is_block_diagonal() {
        let model = presets::two_band_dominant();
        let grid = build_grid(&model, 0.01, &GridOptions { points_per_band: 32, ..Default::default() })
            .unwrap();
        let op = assemble_operator(&model, &grid, 0.02, 0.3, 0.0, 0).unwrap();
        let n0 = grid.band_grid(0).nodes.len();
        for i in 0..n0 {
            for j in n0..grid.total_points() {
                assert_eq!(op.matrix[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn operator_rejects_temperatures_below_design() {
        let model = presets::single_band_attractive();
        let grid = build_grid(&model, 0.01, &GridOptions::default()).unwrap();
        assert!(matches!(
            assemble_operator(&model, &grid, 0.001, 0.3, 0.0, 0),
            Err(Error::GridTemperatureMismatch { .. })
        ));
    }

    #[test]
    fn min_eigenvalue_is_monotone_in_temperature() {
        let model = presets::single_band_attractive();
        let opts = fast_opts();
        let mut ws = Workspace::new(&model, &opts, 1e-4).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..8 {
            let t = 1e-4 * 4.0f64.powi(i);
            let e = ws.min_eig(0, t, 0.3, 0.0).unwrap();
            assert!(e >= prev - 1e-12, "min eig decreased: {e} < {prev} at T = {t}");
            prev = e;
        }
    }

    #[test]
    fn block_diagonal_tc_equals_best_single_band() {
        // at κ = 0 a two-band model decouples; T_c must match the better of
        // the two single-band computations run through the same code
        let model = presets::two_band_dominant();
        let opts = fast_opts();
        let tc_two = critical_temperature(&model, 0.3, 0.0, &opts).unwrap();

        let single = |g: f64| {
            let band = crate::model::BandDispersion::new(0.5, 1.0).unwrap();
            let pot =
                crate::model::RadialPotential::new(crate::model::PotentialFamily::Gaussian, g, 1.0)
                    .unwrap();
            let im = crate::model::InteractionMatrix::new(1, vec![pot]).unwrap();
            crate::model::ModelInstance::new(3, vec![band], im).unwrap()
        };
        let tc_a = critical_temperature(&single(-2.2), 0.3, 0.0, &opts).unwrap();
        let tc_b = critical_temperature(&single(-1.2), 0.3, 0.0, &opts).unwrap();

        let two = tc_two.outcome.found().unwrap();
        let best = tc_a
            .outcome
            .found()
            .unwrap()
            .max(tc_b.outcome.found().unwrap_or(0.0));
        assert_relative_eq!(two, best, max_relative = 4.0 * opts.bisect_tol);
    }

    #[test]
    fn certificate_brackets_the_crossing() {
        let model = presets::single_band_attractive();
        let opts = fast_opts();
        let res = critical_temperature(&model, 0.3, 0.0, &opts).unwrap();
        let cert = res.certificate.unwrap();
        assert!(cert.holds(), "certificate failed: {cert:?}");
        let (lo, hi) = res.bracket.unwrap();
        let tc = res.outcome.found().unwrap();
        assert!(lo <= tc && tc <= hi);
        assert!(hi / lo - 1.0 <= opts.bisect_tol * 1.001);
    }

    #[test]
    fn repulsive_model_reports_not_found() {
        let model = presets::two_band_repulsive();
        let opts = fast_opts();
        let res = critical_temperature(&model, 0.3, 0.0, &opts).unwrap();
        match res.outcome {
            TcOutcome::NotFound { min_eig_at_floor, .. } => {
                assert!(min_eig_at_floor > -1.0);
            }
            TcOutcome::Found { tc } => panic!("repulsive model found tc = {tc}"),
        }
    }

    #[test]
    fn lambda_must_be_positive() {
        let model = presets::single_band_attractive();
        assert!(critical_temperature(&model, 0.0, 0.0, &fast_opts()).is_err());
        assert!(critical_temperature(&model, -0.5, 0.0, &fast_opts()).is_err());
    }

    #[test]
    fn singular_split_is_lambda_free() {
        let model = presets::two_band_dominant();
        let grid = build_grid(&model, 1e-3, &GridOptions { points_per_band: 32, ..Default::default() })
            .unwrap();
        let t0 = model.max_chemical_potential();
        let a = singular_split_norm(&model, &grid, 1e-3, 0.1, 0.5, t0, 1).unwrap();
        let b = singular_split_norm(&model, &grid, 1e-3, 0.2, 0.5, t0, 1).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }
}
