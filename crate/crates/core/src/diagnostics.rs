//! Built-in invariant checks behind the CLI `check` command: quick
//! self-contained verifications of the special functions, the closed-form
//! Fourier transforms, the trace identity, and grid convergence.

use serde::Serialize;

use crate::error::Result;
use crate::fermi_operator::trace_check;
use crate::kernels::{angular_average, build_grid, channel_kernel, kt_symbol, GridOptions};
use crate::model::{sphere_area, ModelInstance};
use crate::quad::panels_integral;

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&format!(
                "[{}] {}: {}\n",
                if item.passed { "PASS" } else { "FAIL" },
                item.name,
                item.detail
            ));
        }
        out
    }
}

/// Direct quadrature of the defining angular integral of j_d.
fn direct_angular_average(d: usize, y: f64) -> f64 {
    match d {
        1 => (y.cos() + (-y).cos()) / 2.0,
        2 => {
            // (1/π)∫₀^π cos(y sinθ) dθ, midpoint rule on the periodic integrand
            let m = 2048;
            let h = std::f64::consts::PI / m as f64;
            (0..m)
                .map(|j| {
                    let theta = (j as f64 + 0.5) * h;
                    (y * theta.sin()).cos()
                })
                .sum::<f64>()
                * h
                / std::f64::consts::PI
        }
        3 => {
            // (1/2)∫_{-1}^{1} cos(y t) dt by composite Simpson
            let m = 1 << 15;
            let h = 2.0 / m as f64;
            let f = |t: f64| (y * t).cos();
            let mut acc = f(-1.0) + f(1.0);
            for j in 1..m {
                let t = -1.0 + j as f64 * h;
                acc += if j % 2 == 1 { 4.0 } else { 2.0 } * f(t);
            }
            acc * h / 3.0 / 2.0
        }
        _ => unreachable!(),
    }
}

fn check_angular_average() -> CheckItem {
    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        for y in [0.1, 1.0, 10.0] {
            let err = (angular_average(d, y) - direct_angular_average(d, y)).abs();
            worst = worst.max(err);
        }
    }
    CheckItem {
        name: "angular-average-vs-direct-quadrature".into(),
        passed: worst <= 1e-10,
        detail: format!("worst abs err {worst:.3e} (tolerance 1e-10)"),
    }
}

fn check_fourier_closed_forms(model: &ModelInstance) -> CheckItem {
    let d = model.dimension();
    let n = model.n_bands();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for a in 0..n {
        for b in a..n {
            let pot = *model.interactions().entry(a, b);
            if pot.is_zero() {
                continue;
            }
            let r_max = pot.support_radius();
            // r sampled on [0, 10/range]
            for i in 0..=10 {
                let r = i as f64 / pot.range();
                let closed = pot.fourier(d, r);
                // V̂(r) = (2π)^{-d/2} |S^{d-1}| ∫ V(ρ) j_d(rρ) ρ^{d-1} dρ
                let panel = pot.range().min(std::f64::consts::PI / r.max(1e-9)).min(r_max);
                let n_panels = (r_max / panel).ceil() as usize;
                let edges: Vec<f64> =
                    (0..=n_panels).map(|k| r_max * k as f64 / n_panels as f64).collect();
                let integral = panels_integral(
                    &|rho: f64| {
                        pot.evaluate(rho) * angular_average(d, r * rho) * rho.powi(d as i32 - 1)
                    },
                    &edges,
                    16,
                );
                let direct =
                    (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) * sphere_area(d) * integral;
                let scale = closed.abs().max(pot.strength().abs() * 1e-8);
                worst = worst.max((closed - direct).abs() / scale);
                checked += 1;
            }
        }
    }
    CheckItem {
        name: "fourier-closed-form-vs-quadrature".into(),
        passed: worst <= 1e-8,
        detail: format!("worst rel err {worst:.3e} over {checked} samples (tolerance 1e-8)"),
    }
}

fn check_trace_identity(model: &ModelInstance) -> Result<CheckItem> {
    let mut worst: f64 = 0.0;
    for a in 0..model.n_bands() {
        let tc = trace_check(model, a, 32)?;
        if tc.analytic == 0.0 {
            continue;
        }
        worst = worst.max((tc.numeric - tc.analytic).abs() / tc.analytic.abs());
    }
    Ok(CheckItem {
        name: "trace-identity".into(),
        passed: worst <= 1e-4,
        detail: format!("worst rel err {worst:.3e} at ℓ_max = 32 (tolerance 1e-4)"),
    })
}

fn check_grid_convergence(model: &ModelInstance) -> Result<CheckItem> {
    let t = 0.01 * model.max_chemical_potential();
    let integral = |points: usize| -> Result<f64> {
        let grid = build_grid(model, t, &GridOptions { points_per_band: points, ..Default::default() })?;
        let bg = grid.band_grid(0);
        Ok(bg
            .nodes
            .iter()
            .zip(&bg.weights)
            .map(|(&p, &w)| w / kt_symbol(model.band(0), p, t))
            .sum())
    };
    let coarse = integral(96)?;
    let fine = integral(192)?;
    let finest = integral(384)?;
    let err_coarse = ((coarse - finest) / finest).abs();
    let err_fine = ((fine - finest) / finest).abs();
    Ok(CheckItem {
        name: "grid-kt-integral-convergence".into(),
        passed: err_coarse <= 1e-6 && err_fine <= err_coarse + 1e-13,
        detail: format!(
            "rel err {err_coarse:.3e} at 96 pts, {err_fine:.3e} at 192 pts vs 384-pt reference"
        ),
    })
}

fn check_kernel_symmetry(model: &ModelInstance) -> Result<CheckItem> {
    let n = model.n_bands();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for ell in 0..=2.min(if model.dimension() == 1 { 1 } else { 2 }) {
                let k1 = channel_kernel(model, a, b, ell, 0.8, 1.1)?;
                let k2 = channel_kernel(model, b, a, ell, 1.1, 0.8)?;
                worst = worst.max((k1 - k2).abs());
            }
        }
    }
    Ok(CheckItem {
        name: "channel-kernel-symmetry".into(),
        passed: worst <= 1e-12,
        detail: format!("worst |K_ab(p,q) − K_ba(q,p)| = {worst:.3e}"),
    })
}

/// Run the built-in invariant suite against a model.
pub fn run_builtin_checks(model: &ModelInstance) -> Result<CheckReport> {
    let items = vec![
        check_angular_average(),
        check_fourier_closed_forms(model),
        check_trace_identity(model)?,
        check_grid_convergence(model)?,
        check_kernel_symmetry(model)?,
    ];
    Ok(CheckReport { items })
}
