//! Nonlinear multi-band gap equation in the s-wave sector, the BCS
//! free-energy difference between superconducting and normal states, and a
//! gap-side critical-temperature detector.
//!
//! The gap map on the radial grid is
//!
//! ```text
//! (G Δ)_a(p_i) = − Σ_b λ κ^{[a≠b]} c_d Σ_j w_j W₀^{ab}(p_i, q_j) Δ_b(q_j) / K^Δ_{T,b}(q_j)
//! ```
//!
//! with K^Δ(E) = E / tanh(E/2T) on the quasiparticle energy
//! E = sqrt(ε² + Δ²). Solutions are fixed points; Δ ≡ 0 is always one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{kt_from_energy, nystrom_prefactor, RadialGrid};
use crate::model::{coupling_scale, sphere_area, ModelInstance};
use crate::spectral::{channel_kernels, ChannelKernels, SolverOptions};

#[derive(Debug, Clone, Copy)]
pub struct GapOptions {
    /// Convergence: sup-norm defect ≤ gap_tol × max(‖Δ‖∞, T).
    pub gap_tol: f64,
    pub max_iterations: usize,
    /// Fixed-point damping factor β (new = (1−β) old + β map).
    pub damping: f64,
    /// Anderson mixing history depth; 0 disables acceleration.
    pub anderson_depth: usize,
    /// Restart with 10× the seed (up to max_restarts) when the iteration
    /// collapses to the trivial solution.
    pub expect_nontrivial: bool,
    pub max_restarts: usize,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-10,
            max_iterations: 2000,
            damping: 0.5,
            anderson_depth: 3,
            expect_nontrivial: false,
            max_restarts: 2,
        }
    }
}

/// Converged (or trivial) gap solution on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct GapSolution {
    pub temperature: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// Per-band gap values on the band's grid nodes.
    pub delta: Vec<Vec<f64>>,
    /// Final sup-norm defect ‖Δ − GΔ‖∞.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
}

impl GapSolution {
    pub fn max_gap(&self) -> f64 {
        self.delta
            .iter()
            .flat_map(|band| band.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }

    pub fn is_trivial(&self) -> bool {
        self.max_gap() < 1e-8 * self.temperature
    }

    fn flat(&self) -> Vec<f64> {
        self.delta.iter().flatten().copied().collect()
    }
}

struct GapMap<'a> {
    model: &'a ModelInstance,
    grid: &'a RadialGrid,
    kernels: &'a ChannelKernels,
    temperature: f64,
    lambda: f64,
    kappa: f64,
    /// ε_b(q_j) per flattened node.
    energies: Vec<f64>,
    c_d: f64,
}

impl<'a> GapMap<'a> {
    fn new(
        model: &'a ModelInstance,
        grid: &'a RadialGrid,
        kernels: &'a ChannelKernels,
        temperature: f64,
        lambda: f64,
        kappa: f64,
    ) -> Result<Self> {
        if kernels.ell != 0 {
            return Err(Error::Invalid(
                "the gap solver works in the s-wave sector and needs ℓ = 0 kernels".into(),
            ));
        }
        if temperature < grid.design_temperature {
            return Err(Error::GridTemperatureMismatch {
                t: temperature,
                design: grid.design_temperature,
            });
        }
        let energies = grid.flat_iter().map(|(a, p, _)| model.band(a).energy(p)).collect();
        Ok(Self {
            model,
            grid,
            kernels,
            temperature,
            lambda,
            kappa,
            energies,
            c_d: nystrom_prefactor(model.dimension()),
        })
    }

    fn len(&self) -> usize {
        self.energies.len()
    }

    /// α̂ = Δ / (2 K^Δ(E)) per node.
    fn pair_amplitude(&self, delta: &[f64]) -> Vec<f64> {
        self.energies
            .iter()
            .zip(delta)
            .map(|(&eps, &dv)| {
                let e = eps.hypot(dv);
                0.5 * dv / kt_from_energy(e, self.temperature)
            })
            .collect()
    }

    /// Apply the gap map to a flattened Δ.
    fn apply(&self, delta: &[f64]) -> Vec<f64> {
        let band_of = self.grid.band_of();
        let weights: Vec<f64> = self.grid.flat_iter().map(|(_, _, w)| w).collect();
        let raw = self.kernels.raw();
        // ratio_j = w_j Δ_j / K^Δ(E_j)
        let ratio: Vec<f64> = self
            .energies
            .iter()
            .zip(delta)
            .zip(&weights)
            .map(|((&eps, &dv), &w)| {
                let e = eps.hypot(dv);
                w * dv / kt_from_energy(e, self.temperature)
            })
            .collect();
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let bi = band_of[i];
            let row = raw.row(i);
            let mut acc = 0.0;
            for j in 0..n {
                let c = coupling_scale(self.lambda, self.kappa, bi, band_of[j]);
                acc += c * row[j] * ratio[j];
            }
            out[i] = -self.c_d * acc;
        }
        out
    }

    fn defect(&self, delta: &[f64]) -> f64 {
        self.apply(delta)
            .iter()
            .zip(delta)
            .map(|(g, d)| (g - d).abs())
            .fold(0.0, f64::max)
    }

    fn seed(&self, init: f64) -> Vec<f64> {
        let band_of = self.grid.band_of();
        self.energies
            .iter()
            .enumerate()
            .map(|(i, &eps)| {
                let mu = self.model.band(band_of[i]).chemical_potential();
                init * (-(eps / mu) * (eps / mu)).exp()
            })
            .collect()
    }
}

fn split_by_band(grid: &RadialGrid, flat: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.n_bands());
    let mut cursor = 0;
    for bg in grid.bands() {
        let len = bg.nodes.len();
        out.push(flat[cursor..cursor + len].to_vec());
        cursor += len;
    }
    out
}

/// Solve the s-wave gap equation by damped fixed-point iteration with
/// optional Anderson mixing. Returns the solution reached from the seed
/// `init · exp(−(ε/μ)²)`; Δ ≡ 0 with `converged = true` is a legitimate
/// outcome above the critical temperature.
pub fn solve_gap(
    model: &ModelInstance,
    grid: &RadialGrid,
    kernels: &ChannelKernels,
    temperature: f64,
    lambda: f64,
    kappa: f64,
    init: f64,
    opts: &GapOptions,
) -> Result<GapSolution> {
    if !(init > 0.0) {
        return Err(Error::Invalid(format!("init must be positive (got {init})")));
    }
    let map = GapMap::new(model, grid, kernels, temperature, lambda, kappa)?;
    let mut restarts = 0;
    let mut amplitude = init;
    let mut history = Vec::new();

    loop {
        let (delta, residual, iterations, converged) =
            iterate(&map, map.seed(amplitude), opts, &mut history);
        let sol = GapSolution {
            temperature,
            lambda,
            kappa,
            delta: split_by_band(grid, &delta),
            residual,
            iterations,
            converged,
            restarts,
        };
        if !converged {
            return Err(Error::GapNotConverged {
                iterations,
                residual,
                restarts,
                history,
            });
        }
        if sol.is_trivial() && opts.expect_nontrivial && restarts < opts.max_restarts {
            restarts += 1;
            amplitude *= 10.0;
            continue;
        }
        return Ok(sol);
    }
}

fn iterate(
    map: &GapMap,
    mut x: Vec<f64>,
    opts: &GapOptions,
    history: &mut Vec<f64>,
) -> (Vec<f64>, f64, usize, bool) {
    let n = x.len();
    let beta = opts.damping;
    let depth = opts.anderson_depth;
    let mut prev_x: Vec<Vec<f64>> = Vec::new();
    let mut prev_f: Vec<Vec<f64>> = Vec::new();
    // Anderson only after plain damping has the residual shrinking; from a
    // small seed below T_c the linear growth phase must play out first, or
    // the mixing solves the linearized system and lands on Δ ≡ 0.
    let mut decreasing_streak = 0usize;
    let mut anderson_active = false;
    let mut prev_residual = f64::INFINITY;

    for iter in 1..=opts.max_iterations {
        let g = map.apply(&x);
        let f: Vec<f64> = g.iter().zip(&x).map(|(g, x)| g - x).collect();
        let residual = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        history.push(residual);

        let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(map.temperature);
        if residual <= opts.gap_tol * scale {
            return (x, residual, iter, true);
        }

        if residual < prev_residual {
            decreasing_streak += 1;
            if decreasing_streak >= 2 {
                anderson_active = true;
            }
        } else {
            decreasing_streak = 0;
        }
        prev_residual = residual;

        let mut next: Vec<f64> = x.iter().zip(&f).map(|(x, f)| x + beta * f).collect();
        if depth > 0 && anderson_active && !prev_x.is_empty() {
            if let Some(correction) = anderson_step(&x, &f, &prev_x, &prev_f, beta) {
                next = correction;
            }
        }

        prev_x.push(x.clone());
        prev_f.push(f);
        if prev_x.len() > depth {
            prev_x.remove(0);
            prev_f.remove(0);
        }
        x = next;
        debug_assert_eq!(x.len(), n);
    }

    let residual = map.defect(&x);
    (x, residual, opts.max_iterations, false)
}

/// One Anderson(m) step: minimize ‖f_k − Σ γ_i (f_k − f_{k−i})‖ and combine
/// the corresponding damped iterates. Returns None when the normal equations
/// are too ill-conditioned to trust.
fn anderson_step(
    x: &[f64],
    f: &[f64],
    prev_x: &[Vec<f64>],
    prev_f: &[Vec<f64>],
    beta: f64,
) -> Option<Vec<f64>> {
    let m = prev_x.len();
    // difference vectors against each history entry (most recent last)
    let df: Vec<Vec<f64>> = prev_f
        .iter()
        .map(|fp| f.iter().zip(fp).map(|(a, b)| a - b).collect())
        .collect();
    // normal equations (m×m)
    let mut gram = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            gram[i][j] = dot(&df[i], &df[j]);
        }
        rhs[i] = dot(&df[i], f);
    }
    let gamma = solve_small(&mut gram, &mut rhs)?;

    let mut next: Vec<f64> = x.iter().zip(f).map(|(x, f)| x + beta * f).collect();
    for (i, g) in gamma.iter().enumerate() {
        let dxi: Vec<f64> = x.iter().zip(&prev_x[i]).map(|(a, b)| a - b).collect();
        for k in 0..next.len() {
            next[k] -= g * (dxi[k] + beta * df[i][k]);
        }
    }
    Some(next)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting for the tiny Anderson system.
fn solve_small(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..m {
            let factor = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for k in (row + 1)..m {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Sup-norm of Δ − GΔ for a candidate gap; zero exactly at discrete
/// solutions.
pub fn gap_defect(
    model: &ModelInstance,
    grid: &RadialGrid,
    kernels: &ChannelKernels,
    temperature: f64,
    lambda: f64,
    kappa: f64,
    delta: &[Vec<f64>],
) -> Result<f64> {
    let map = GapMap::new(model, grid, kernels, temperature, lambda, kappa)?;
    let flat: Vec<f64> = delta.iter().flatten().copied().collect();
    if flat.len() != map.len() {
        return Err(Error::Invalid(format!(
            "gap candidate has {} values but the grid has {} nodes",
            flat.len(),
            map.len()
        )));
    }
    Ok(map.defect(&flat))
}

/// Sup-norm of the Euler–Lagrange residual (K_T^Δ + V)α evaluated from the
/// pair amplitude α̂ = Δ/(2K^Δ) reconstructed from the solution.
pub fn euler_lagrange_residual(
    model: &ModelInstance,
    grid: &RadialGrid,
    kernels: &ChannelKernels,
    sol: &GapSolution,
) -> Result<f64> {
    let map = GapMap::new(model, grid, kernels, sol.temperature, sol.lambda, sol.kappa)?;
    let delta = sol.flat();
    if delta.len() != map.len() {
        return Err(Error::Invalid("gap grid mismatch".into()));
    }
    let alpha = map.pair_amplitude(&delta);
    let band_of = grid.band_of();
    let weights: Vec<f64> = grid.flat_iter().map(|(_, _, w)| w).collect();
    let raw = kernels.raw();
    let n = map.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        // K^Δ α = Δ/2 pointwise
        let mut el = 0.5 * delta[i];
        for j in 0..n {
            let c = coupling_scale(sol.lambda, sol.kappa, band_of[i], band_of[j]);
            el += c * map.c_d * weights[j] * raw[(i, j)] * alpha[j];
        }
        worst = worst.max(el.abs());
    }
    Ok(worst)
}

/// State fed to the free-energy evaluator.
pub enum TrialState<'a> {
    Normal,
    Superconducting(&'a GapSolution),
}

/// BCS free-energy density of `state` minus the normal state (Δ ≡ 0) at the
/// same temperature, with the difference formed integrand-wise so the UV
/// divergences of the individual terms cancel. Negative values mean the
/// superconducting state wins.
///
/// The kinetic-plus-entropy part per node reduces to
/// ε² (K_T(ε)⁻¹ − K^Δ(E)⁻¹)/2 − T (s(E) − s(|ε|)); the interaction term is
/// the quadratic form of the scaled pair potential against α̂ = Δ/(2K^Δ).
pub fn free_energy_density(
    model: &ModelInstance,
    grid: &RadialGrid,
    kernels: &ChannelKernels,
    temperature: f64,
    lambda: f64,
    kappa: f64,
    state: TrialState,
) -> Result<f64> {
    let map = GapMap::new(model, grid, kernels, temperature, lambda, kappa)?;
    let delta: Vec<f64> = match state {
        TrialState::Normal => vec![0.0; map.len()],
        TrialState::Superconducting(sol) => {
            let flat = sol.flat();
            if flat.len() != map.len() {
                return Err(Error::Invalid(format!(
                    "state has {} gap values but the grid has {} nodes",
                    flat.len(),
                    map.len()
                )));
            }
            if (sol.temperature - temperature).abs() > 1e-12 * temperature {
                return Err(Error::Invalid(format!(
                    "state was solved at T = {} but evaluated at T = {temperature}",
                    sol.temperature
                )));
            }
            flat
        }
    };

    let t = temperature;
    let area = sphere_area(model.dimension());
    let weights: Vec<f64> = grid.flat_iter().map(|(_, _, w)| w).collect();
    let band_of = grid.band_of();

    // entropy per node: s = ln(1+e^{-2x}) + 2x/(e^{2x}+1), x = E/2T
    let entropy = |e: f64| -> f64 {
        let x = e / (2.0 * t);
        if x > 350.0 {
            0.0
        } else {
            let w = (-2.0 * x).exp();
            (1.0 + w).ln() + 2.0 * x * w / (1.0 + w)
        }
    };

    let mut kinetic_entropy = 0.0;
    for (i, (&eps, &dv)) in map.energies.iter().zip(&delta).enumerate() {
        let e = eps.hypot(dv);
        let inv_k0 = 1.0 / kt_from_energy(eps, t);
        let inv_kd = 1.0 / kt_from_energy(e, t);
        let kinetic = 0.5 * eps * eps * (inv_k0 - inv_kd);
        let ent = entropy(e) - entropy(eps.abs());
        kinetic_entropy += weights[i] * (kinetic - t * ent);
    }

    let alpha = map.pair_amplitude(&delta);
    let raw = kernels.raw();
    let mut interaction = 0.0;
    let n = map.len();
    for i in 0..n {
        let wa_i = weights[i] * alpha[i];
        if wa_i == 0.0 {
            continue;
        }
        for j in 0..n {
            let c = coupling_scale(lambda, kappa, band_of[i], band_of[j]);
            interaction += c * map.c_d * wa_i * raw[(i, j)] * weights[j] * alpha[j];
        }
    }

    Ok(area * (kinetic_entropy + interaction))
}

/// Interaction energy evaluated through the shortcut valid at gap solutions,
/// −(1/2) ∫ Σ_a Δ_a α̂_a; used as a cross-check against the quadratic form.
pub fn interaction_energy_at_solution(
    model: &ModelInstance,
    grid: &RadialGrid,
    sol: &GapSolution,
) -> f64 {
    let area = sphere_area(model.dimension());
    let mut acc = 0.0;
    for (a, bg) in grid.bands().iter().enumerate() {
        for ((&p, &w), &dv) in bg.nodes.iter().zip(&bg.weights).zip(&sol.delta[a]) {
            let eps = model.band(a).energy(p);
            let e = eps.hypot(dv);
            let alpha = 0.5 * dv / kt_from_energy(e, sol.temperature);
            acc += w * dv * alpha;
        }
    }
    -0.5 * area * acc
}

// ---------------------------------------------------------------------------
// Gap-side critical temperature (triviality boundary)
// ---------------------------------------------------------------------------

/// Largest positive eigenvalue of the gap map linearized at Δ = 0, computed
/// by (shifted) power iteration on the symmetrized matrix. The trivial
/// solution stops being the attractor exactly when this crosses 1.
pub fn linearized_growth_rate(
    model: &ModelInstance,
    grid: &RadialGrid,
    kernels: &ChannelKernels,
    temperature: f64,
    lambda: f64,
    kappa: f64,
) -> Result<f64> {
    let op = crate::spectral::assemble_with_kernels(model, grid, kernels, temperature, lambda, kappa)?;
    let n = op.matrix.nrows();
    let s = &op.matrix; // growth matrix is −S; power-iterate on −S

    let apply = |v: &[f64], out: &mut [f64], shift: f64| {
        for i in 0..n {
            let row = s.row(i);
            let mut acc = 0.0;
            for j in 0..n {
                acc += -row[j] * v[j];
            }
            out[i] = acc + shift * v[i];
        }
    };

    let power = |shift: f64| -> Result<f64> {
        let mut v: Vec<f64> = grid
            .flat_iter()
            .map(|(a, p, _)| {
                let mu = model.band(a).chemical_potential();
                let eps = model.band(a).energy(p);
                ((-(eps / mu) * (eps / mu)).exp()).max(1e-6)
            })
            .collect();
        normalize(&mut v);
        let mut out = vec![0.0; n];
        let mut rho_prev = f64::NAN;
        let mut stable = 0;
        for _ in 0..20_000 {
            apply(&v, &mut out, shift);
            let rho = dot(&out, &v);
            std::mem::swap(&mut v, &mut out);
            normalize(&mut v);
            if (rho - rho_prev).abs() <= 1e-12 * rho.abs().max(1.0) {
                stable += 1;
                if stable >= 3 {
                    return Ok(rho);
                }
            } else {
                stable = 0;
            }
            rho_prev = rho;
        }
        Err(Error::Invalid("power iteration did not converge".into()))
    };

    let dominant = power(0.0)?;
    if dominant >= 0.0 {
        Ok(dominant)
    } else {
        // dominant mode is repulsive; shift to expose the largest positive one
        let shift = dominant.abs() + 1.0;
        Ok(power(shift)? - shift)
    }
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrivialityResult {
    pub tc: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub iterations: usize,
}

/// Critical temperature seen by the gap equation: the largest T at which the
/// trivial solution loses stability (growth rate = 1), found by the same
/// descend-then-bisect scheme as the spectral detector but driven entirely
/// by power iteration on the linearized gap map.
pub fn triviality_temperature(
    model: &ModelInstance,
    lambda: f64,
    kappa: f64,
    opts: &SolverOptions,
) -> Result<TrivialityResult> {
    let floor = opts.temperature_floor(model);
    let ceiling = opts.temperature_ceiling(model);
    let mut grid = crate::kernels::build_grid(
        model,
        (0.01 * model.max_chemical_potential()).max(floor),
        &opts.grid,
    )?;
    let mut kernels = channel_kernels(model, &grid, 0)?;
    let mut iterations = 0usize;

    let mut rate = |grid: &mut RadialGrid,
                    kernels: &mut ChannelKernels,
                    t: f64|
     -> Result<f64> {
        if t < grid.design_temperature {
            *grid = crate::kernels::build_grid(model, (t / 16.0).max(0.05 * floor).min(t), &opts.grid)?;
            *kernels = channel_kernels(model, grid, 0)?;
        }
        iterations += 1;
        linearized_growth_rate(model, grid, kernels, t, lambda, kappa)
    };

    // descend until the trivial state is unstable
    let mut t = ceiling;
    let mut lo = None;
    while t > floor {
        t = (t / 8.0).max(floor);
        if rate(&mut grid, &mut kernels, t)? > 1.0 {
            lo = Some(t);
            break;
        }
    }
    let Some(mut lo) = lo else {
        return Ok(TrivialityResult { tc: None, bracket: None, iterations });
    };
    let mut hi = (lo * 8.0).min(ceiling);

    while hi / lo - 1.0 > opts.bisect_tol {
        let mid = (lo * hi).sqrt();
        if rate(&mut grid, &mut kernels, mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TrivialityResult { tc: Some((lo * hi).sqrt()), bracket: Some((lo, hi)), iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_grid, GridOptions};
    use crate::presets;
    use approx::assert_relative_eq;

    fn setup(
        model: &ModelInstance,
        design_t: f64,
    ) -> (RadialGrid, ChannelKernels) {
        let grid = build_grid(
            model,
            design_t,
            &GridOptions { points_per_band: 48, ..Default::default() },
        )
        .unwrap();
        let kernels = channel_kernels(model, &grid, 0).unwrap();
        (grid, kernels)
    }

    #[test]
    fn zero_gap_is_a_fixed_point() {
        let model = presets::single_band_attractive();
        let (grid, kernels) = setup(&model, 1e-3);
        let zero = vec![vec![0.0; grid.band_grid(0).nodes.len()]];
        let defect = gap_defect(&model, &grid, &kernels, 0.01, 0.3, 0.0, &zero).unwrap();
        assert_eq!(defect, 0.0);
    }

    #[test]
    fn above_tc_converges_to_trivial() {
        let model = presets::single_band_attractive();
        let (grid, kernels) = setup(&model, 1e-3);
        // far above any critical temperature of this model
        let sol = solve_gap(&model, &grid, &kernels, 0.2, 0.3, 0.0, 1e-3, &GapOptions::default())
            .unwrap();
        assert!(sol.converged);
        assert!(sol.is_trivial(), "max gap {}", sol.max_gap());
    }

    #[test]
    fn lambda_scaling_invariance() {
        // solution at (λ, V) equals solution at (1, λV): rescale strengths
        let model = presets::single_band_attractive(); // strength −2
        let scaled = {
            let band = crate::model::BandDispersion::new(0.5, 1.0).unwrap();
            let pot = crate::model::RadialPotential::new(
                crate::model::PotentialFamily::Gaussian,
                -2.0 * 0.3,
                1.0,
            )
            .unwrap();
            crate::model::ModelInstance::new(
                3,
                vec![band],
                crate::model::InteractionMatrix::new(1, vec![pot]).unwrap(),
            )
            .unwrap()
        };
        let (grid_a, kernels_a) = setup(&model, 1e-4);
        let (grid_b, kernels_b) = setup(&scaled, 1e-4);
        let t = 2e-3;
        let a = solve_gap(&model, &grid_a, &kernels_a, t, 0.3, 0.0, 1e-3, &GapOptions::default())
            .unwrap();
        let b = solve_gap(&scaled, &grid_b, &kernels_b, t, 1.0, 0.0, 1e-3, &GapOptions::default())
            .unwrap();
        assert_relative_eq!(a.max_gap(), b.max_gap(), max_relative = 1e-9);
    }

    #[test]
    fn defect_of_converged_solution_is_within_tolerance() {
        let model = presets::single_band_attractive();
        let (grid, kernels) = setup(&model, 1e-4);
        let opts = GapOptions { expect_nontrivial: true, ..Default::default() };
        let t = 2e-3;
        let sol = solve_gap(&model, &grid, &kernels, t, 0.3, 0.0, 1e-4, &opts).unwrap();
        assert!(sol.converged);
        assert!(!sol.is_trivial());
        let defect =
            gap_defect(&model, &grid, &kernels, t, 0.3, 0.0, &sol.delta).unwrap();
        let scale = sol.max_gap().max(t);
        assert!(defect <= opts.gap_tol * scale * 1.01, "defect {defect}");
        // Euler–Lagrange residual is half the defect by construction
        let el = euler_lagrange_residual(&model, &grid, &kernels, &sol).unwrap();
        assert!(el <= 0.51 * defect + 1e-18, "el {el} vs defect {defect}");
    }

    #[test]
    fn free_energy_of_normal_state_is_zero() {
        let model = presets::single_band_attractive();
        let (grid, kernels) = setup(&model, 1e-3);
        let f = free_energy_density(&model, &grid, &kernels, 0.01, 0.3, 0.0, TrialState::Normal)
            .unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn interaction_routes_agree_at_solutions() {
        let model = presets::single_band_attractive();
        let (grid, kernels) = setup(&model, 1e-4);
        let t = 2e-3;
        let opts = GapOptions { expect_nontrivial: true, ..Default::default() };
        let sol = solve_gap(&model, &grid, &kernels, t, 0.3, 0.0, 1e-4, &opts).unwrap();
        assert!(!sol.is_trivial());
        // quadratic form against the shortcut −(1/2)∫Δα̂
        let map = GapMap::new(&model, &grid, &kernels, t, 0.3, 0.0).unwrap();
        let flat = sol.flat();
        let alpha = map.pair_amplitude(&flat);
        let weights: Vec<f64> = grid.flat_iter().map(|(_, _, w)| w).collect();
        let band_of = grid.band_of();
        let raw = kernels.raw();
        let mut quad = 0.0;
        for i in 0..flat.len() {
            for j in 0..flat.len() {
                let c = coupling_scale(0.3, 0.0, band_of[i], band_of[j]);
                quad += c * map.c_d * weights[i] * alpha[i] * raw[(i, j)] * weights[j] * alpha[j];
            }
        }
        quad *= sphere_area(3);
        let shortcut = interaction_energy_at_solution(&model, &grid, &sol);
        assert_relative_eq!(quad, shortcut, max_relative = 1e-6);
    }

    #[test]
    fn anderson_accelerates_but_agrees_with_plain_damping() {
        let model = presets::single_band_attractive();
        let (grid, kernels) = setup(&model, 1e-4);
        let t = 2e-3;
        let plain = GapOptions { anderson_depth: 0, expect_nontrivial: true, ..Default::default() };
        let mixed = GapOptions { anderson_depth: 3, expect_nontrivial: true, ..Default::default() };
        let a = solve_gap(&model, &grid, &kernels, t, 0.3, 0.0, 1e-4, &plain).unwrap();
        let b = solve_gap(&model, &grid, &kernels, t, 0.3, 0.0, 1e-4, &mixed).unwrap();
        assert_relative_eq!(a.max_gap(), b.max_gap(), max_relative = 1e-6);
        assert!(b.iterations <= a.iterations);
    }
}
