//! Turns critical-temperature sweeps into the asymptotic statements: linear
//! and quadratic enhancement fits against the perturbation constants, the
//! two-band closed-form prediction, and a machine-readable verdict report.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermi_operator::{
    perturbation_constants, v_min_two_band, PerturbationBranch, PerturbationConstants,
};
use crate::model::ModelInstance;
use crate::spectral::{critical_temperature, SolverOptions};

/// Agreement tolerances used by the report verdicts.
pub const LINEAR_AGREEMENT_TOL: f64 = 0.15;
pub const LINEAR_SIGN_SYMMETRY_TOL: f64 = 0.05;
pub const QUADRATIC_AGREEMENT_TOL: f64 = 0.15;
pub const TWO_BAND_AGREEMENT_TOL: f64 = 0.10;

/// One (λ, κ) → T_c data point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub kappa: f64,
    pub tc: Option<f64>,
    pub tc_ref: Option<f64>,
    /// λ·log(tc / tc_ref) when both temperatures were found.
    pub log_ratio: Option<f64>,
    pub min_eig_at_tc: Option<f64>,
    pub channel: Option<usize>,
    pub grid_points: usize,
    pub iterations: usize,
}

/// Sweep output plus any per-point hard failures (which leave no record).
#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<(f64, String)>,
}

/// Run T_c over a κ-grid at fixed λ with `workers` parallel workers.
/// A κ = 0 reference point is inserted when absent; records come back sorted
/// by κ regardless of completion order.
pub fn run_sweep(
    model: &ModelInstance,
    lambda: f64,
    kappas: &[f64],
    opts: &SolverOptions,
    workers: usize,
) -> Result<SweepOutcome> {
    if kappas.is_empty() {
        return Err(Error::Invalid("empty κ grid".into()));
    }
    let mut grid: Vec<f64> = kappas.to_vec();
    if !grid.iter().any(|&k| k == 0.0) {
        grid.push(0.0);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?;

    let results: Vec<(f64, std::result::Result<crate::spectral::TcResult, String>)> =
        pool.install(|| {
            grid.par_iter()
                .map(|&kappa| {
                    let res = critical_temperature(model, lambda, kappa, opts)
                        .map_err(|e| e.to_string());
                    (kappa, res)
                })
                .collect()
        });

    let tc_ref = results
        .iter()
        .find(|(k, _)| *k == 0.0)
        .and_then(|(_, r)| r.as_ref().ok())
        .and_then(|r| r.outcome.found());

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (kappa, res) in results {
        match res {
            Ok(tc_res) => {
                let tc = tc_res.outcome.found();
                let log_ratio = match (tc, tc_ref) {
                    (Some(t), Some(r)) => Some(lambda * (t / r).ln()),
                    _ => None,
                };
                records.push(SweepRecord {
                    lambda,
                    kappa,
                    tc,
                    tc_ref,
                    log_ratio,
                    min_eig_at_tc: tc_res.min_eig_at_tc,
                    channel: tc_res.channel,
                    grid_points: tc_res.grid_points,
                    iterations: tc_res.iterations,
                });
            }
            Err(msg) => failures.push((kappa, msg)),
        }
    }
    records.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    Ok(SweepOutcome { records, failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitBranch {
    /// λ·log-ratio against |κ| on κ > 0.
    LinearPlus,
    /// λ·log-ratio against |κ| on κ < 0.
    LinearMinus,
    /// λ·log-ratio against κ² on both signs.
    Quadratic,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnhancementFit {
    pub branch: FitBranch,
    /// Zero-intercept least-squares slope in |κ| or κ².
    pub slope: f64,
    /// |κ| window the fit used.
    pub fit_window: (f64, f64),
    /// RMS residual of the fit.
    pub residual_norm: f64,
    pub points_used: usize,
    /// Predicted constant (A₁± or A₂) when available.
    pub prediction: Option<f64>,
    /// |slope − prediction| / |prediction|.
    pub agreement: Option<f64>,
    /// For the quadratic branch: per-sign slopes (κ<0, κ>0) when both sides
    /// carry enough points; the law is even in κ, so they should agree.
    pub side_slopes: Option<(f64, f64)>,
}

fn zero_intercept_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let ss: f64 = points.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    (slope, (ss / points.len() as f64).sqrt())
}

/// Least-squares fit of λ·log-ratio against |κ| (linear branches) or κ²
/// (quadratic branch) with zero intercept, over records whose |κ| lies in
/// `window` and whose T_c was found.
pub fn fit_enhancement(
    records: &[SweepRecord],
    branch: FitBranch,
    window: (f64, f64),
    prediction: Option<f64>,
) -> Result<EnhancementFit> {
    let lambda = records.first().map(|r| r.lambda).unwrap_or(f64::NAN);
    if records.iter().any(|r| r.lambda != lambda) {
        return Err(Error::Invalid("fit requires a common λ across records".into()));
    }
    let usable = |r: &&SweepRecord| -> bool {
        let k = r.kappa.abs();
        r.log_ratio.is_some()
            && k >= window.0
            && k <= window.1
            && match branch {
                FitBranch::LinearPlus => r.kappa > 0.0,
                FitBranch::LinearMinus => r.kappa < 0.0,
                FitBranch::Quadratic => r.kappa != 0.0,
            }
    };
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(usable)
        .map(|r| {
            let x = match branch {
                FitBranch::Quadratic => r.kappa * r.kappa,
                _ => r.kappa.abs(),
            };
            (x, r.log_ratio.unwrap())
        })
        .collect();
    if points.len() < 5 {
        return Err(Error::Invalid(format!(
            "insufficient data on branch {branch:?}: {} usable records in window \
             [{}, {}], need at least 5",
            points.len(),
            window.0,
            window.1
        )));
    }
    let (slope, residual_norm) = zero_intercept_fit(&points);

    let side_slopes = if branch == FitBranch::Quadratic {
        let side = |sign: f64| -> Option<f64> {
            let pts: Vec<(f64, f64)> = records
                .iter()
                .filter(usable)
                .filter(|r| r.kappa * sign > 0.0)
                .map(|r| (r.kappa * r.kappa, r.log_ratio.unwrap()))
                .collect();
            (pts.len() >= 3).then(|| zero_intercept_fit(&pts).0)
        };
        side(-1.0).zip(side(1.0))
    } else {
        None
    };

    Ok(EnhancementFit {
        branch,
        slope,
        fit_window: window,
        residual_norm,
        points_used: points.len(),
        prediction,
        agreement: prediction.map(|p| (slope - p).abs() / p.abs()),
        side_slopes,
    })
}

/// Two-band closed-form prediction for T_c.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum TwoBandTc {
    Finite(f64),
    /// 𝔳_min(κ) ≥ 0: no weak-coupling superconductivity.
    Normal,
}

/// T_c predicted by T0_fit · exp(1/(λ 𝔳_min(κ))) for a two-band model.
pub fn two_band_prediction(
    model: &ModelInstance,
    lambda: f64,
    kappa: f64,
    t0_fit: f64,
) -> Result<TwoBandTc> {
    let vmin = v_min_two_band(model, kappa)?;
    if vmin >= 0.0 {
        return Ok(TwoBandTc::Normal);
    }
    Ok(TwoBandTc::Finite(t0_fit * (1.0 / (lambda * vmin)).exp()))
}

/// Calibrate the temperature scale T0_fit from one measured critical
/// temperature at (λ_ref, κ).
pub fn calibrate_t0(
    model: &ModelInstance,
    lambda_ref: f64,
    kappa: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let vmin = v_min_two_band(model, kappa)?;
    if vmin >= 0.0 {
        return Err(Error::Invalid(format!(
            "cannot calibrate: 𝔳_min({kappa}) = {vmin:.6} is not negative"
        )));
    }
    let res = critical_temperature(model, lambda_ref, kappa, opts)?;
    let tc = res.outcome.found().ok_or_else(|| {
        Error::Invalid(format!("cannot calibrate: T_c(λ={lambda_ref}, κ={kappa}) not found"))
    })?;
    Ok(tc * (-1.0 / (lambda_ref * vmin)).exp())
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ReportOptions {
    pub lambdas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub solver: SolverOptions,
    /// Channel cutoff for the perturbation constants.
    pub ell_max_constants: usize,
    pub workers: usize,
    /// κ used for the two-band closed-form check.
    pub two_band_kappa: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            lambdas: vec![0.4, 0.3, 0.25, 0.2],
            kappas: symmetric_kappa_grid(0.02, 0.2, 7),
            solver: SolverOptions::default(),
            ell_max_constants: 16,
            workers: 1,
            two_band_kappa: 0.3,
        }
    }
}

/// ±[lo, hi] with `per_side` points each, plus the κ = 0 reference.
pub fn symmetric_kappa_grid(lo: f64, hi: f64, per_side: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    for i in 0..per_side {
        let k = lo + (hi - lo) * i as f64 / (per_side - 1).max(1) as f64;
        out.push(k);
        out.push(-k);
    }
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub metric: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSweep {
    pub lambda: f64,
    pub records: Vec<SweepRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoBandRow {
    pub lambda: f64,
    pub measured_tc: f64,
    pub predicted_tc: f64,
    /// Relative error of λ·log T_c between prediction and measurement.
    pub rel_err_llog: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoBandReport {
    pub kappa: f64,
    pub lambda_ref: f64,
    pub t0_fit: f64,
    pub rows: Vec<TwoBandRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub monotonicity: Verdict,
    pub linear: Option<Verdict>,
    pub quadratic: Option<Verdict>,
    pub two_band: Option<Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub constants: Option<PerturbationConstants>,
    pub off_diagonal_coupled: bool,
    pub sweeps: Vec<LambdaSweep>,
    pub fits: Vec<EnhancementFit>,
    pub two_band: Option<TwoBandReport>,
    pub verdicts: Verdicts,
    /// Human-readable notes about skipped parts (partial reports are valid).
    pub gaps: Vec<String>,
}

/// Full pipeline: sweeps per λ, perturbation constants, branch fits, and the
/// two-band closed-form comparison, condensed into per-claim verdicts.
pub fn asymptotic_report(model: &ModelInstance, opts: &ReportOptions) -> Result<AsymptoticReport> {
    let mut gaps = Vec::new();

    let off_diagonal_coupled = !model.interactions().off_diagonal_is_zero();
    let constants = match perturbation_constants(model, opts.ell_max_constants) {
        Ok(pc) => Some(pc),
        Err(e) => {
            gaps.push(format!("perturbation constants unavailable: {e}"));
            None
        }
    };

    let mut sweeps = Vec::new();
    for &lambda in &opts.lambdas {
        let outcome = run_sweep(model, lambda, &opts.kappas, &opts.solver, opts.workers)?;
        for (kappa, msg) in &outcome.failures {
            gaps.push(format!("sweep point (λ={lambda}, κ={kappa}) failed: {msg}"));
        }
        sweeps.push(LambdaSweep { lambda, records: outcome.records });
    }

    // monotonicity: T_c(λ,κ) ≥ T_c(λ,0) up to solver slack, on every record
    let slack = 2.0 * opts.solver.bisect_tol;
    let mut worst_margin: f64 = 0.0;
    let mut violations = 0usize;
    let mut comparable = 0usize;
    for sweep in &sweeps {
        for r in &sweep.records {
            if let (Some(tc), Some(tc_ref)) = (r.tc, r.tc_ref) {
                comparable += 1;
                let margin = (tc_ref - tc) / tc_ref;
                worst_margin = worst_margin.max(margin);
                if tc < tc_ref * (1.0 - slack) {
                    violations += 1;
                }
            }
        }
    }
    let monotonicity = Verdict {
        pass: violations == 0 && comparable > 0,
        metric: worst_margin,
        detail: format!(
            "{violations} of {comparable} comparable points fell below the κ = 0 \
             reference by more than the solver slack {slack:.1e}; worst relative \
             shortfall {worst_margin:.3e}"
        ),
    };

    // branch fits on the smallest λ (weakest-coupling) sweep
    let mut fits = Vec::new();
    let mut linear = None;
    let mut quadratic = None;
    if let (Some(pc), Some(sweep)) = (
        constants.as_ref(),
        sweeps
            .iter()
            .min_by(|a, b| a.lambda.total_cmp(&b.lambda)),
    ) {
        let window = fit_window(&opts.kappas);
        match pc.branch {
            PerturbationBranch::Degenerate => {
                let plus = fit_enhancement(
                    &sweep.records,
                    FitBranch::LinearPlus,
                    window,
                    Some(pc.a1_plus),
                );
                let minus = fit_enhancement(
                    &sweep.records,
                    FitBranch::LinearMinus,
                    window,
                    Some(pc.a1_minus),
                );
                match (plus, minus) {
                    (Ok(p), Ok(m)) => {
                        let agreement = p.agreement.unwrap_or(f64::NAN).max(m.agreement.unwrap_or(f64::NAN));
                        let sign_split = (p.slope - m.slope).abs()
                            / (0.5 * (p.slope.abs() + m.slope.abs())).max(1e-300);
                        linear = Some(Verdict {
                            pass: agreement <= LINEAR_AGREEMENT_TOL
                                && sign_split <= LINEAR_SIGN_SYMMETRY_TOL,
                            metric: agreement,
                            detail: format!(
                                "slopes ({:.4}, {:.4}) vs predictions ({:.4}, {:.4}); \
                                 worst agreement {:.1}%, sign split {:.1}%",
                                m.slope,
                                p.slope,
                                pc.a1_minus,
                                pc.a1_plus,
                                agreement * 100.0,
                                sign_split * 100.0
                            ),
                        });
                        fits.push(p);
                        fits.push(m);
                    }
                    (p, m) => {
                        for r in [p, m].into_iter().flatten() {
                            fits.push(r);
                        }
                        gaps.push("linear fit skipped: insufficient usable records".into());
                    }
                }
            }
            PerturbationBranch::UniqueMinimizer => {
                match fit_enhancement(&sweep.records, FitBranch::Quadratic, window, pc.a2) {
                    Ok(fit) => {
                        let agreement = fit.agreement.unwrap_or(f64::NAN);
                        quadratic = Some(Verdict {
                            pass: agreement <= QUADRATIC_AGREEMENT_TOL,
                            metric: agreement,
                            detail: format!(
                                "slope {:.4} vs A₂ = {:.4}; agreement {:.1}%",
                                fit.slope,
                                pc.a2.unwrap_or(f64::NAN),
                                agreement * 100.0
                            ),
                        });
                        fits.push(fit);
                    }
                    Err(e) => gaps.push(format!("quadratic fit skipped: {e}")),
                }
            }
        }
    }

    // two-band closed form (n = 2 only)
    let mut two_band = None;
    let mut two_band_verdict = None;
    if model.n_bands() == 2 && off_diagonal_coupled {
        match two_band_check(model, opts) {
            Ok((report, verdict)) => {
                two_band = Some(report);
                two_band_verdict = Some(verdict);
            }
            Err(e) => gaps.push(format!("two-band check skipped: {e}")),
        }
    }

    Ok(AsymptoticReport {
        constants,
        off_diagonal_coupled,
        sweeps,
        fits,
        two_band,
        verdicts: Verdicts { monotonicity, linear, quadratic, two_band: two_band_verdict },
        gaps,
    })
}

fn fit_window(kappas: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &k in kappas {
        let a = k.abs();
        if a > 0.0 {
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    (lo, hi)
}

fn two_band_check(model: &ModelInstance, opts: &ReportOptions) -> Result<(TwoBandReport, Verdict)> {
    let mut lambdas = opts.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.reverse();
    if lambdas.len() < 2 {
        return Err(Error::Invalid("two-band check needs at least two λ values".into()));
    }
    let lambda_ref = lambdas[0];
    let kappa = opts.two_band_kappa;
    let t0_fit = calibrate_t0(model, lambda_ref, kappa, &opts.solver)?;

    let mut rows = Vec::new();
    for &lambda in &lambdas[1..] {
        let measured = critical_temperature(model, lambda, kappa, &opts.solver)?
            .outcome
            .found()
            .ok_or_else(|| Error::Invalid(format!("T_c(λ={lambda}, κ={kappa}) not found")))?;
        let predicted = match two_band_prediction(model, lambda, kappa, t0_fit)? {
            TwoBandTc::Finite(tc) => tc,
            TwoBandTc::Normal => {
                return Err(Error::Invalid("two-band prediction is categorically zero".into()))
            }
        };
        let rel_err = (lambda * predicted.ln() - lambda * measured.ln()).abs()
            / (lambda * measured.ln()).abs();
        rows.push(TwoBandRow { lambda, measured_tc: measured, predicted_tc: predicted, rel_err_llog: rel_err });
    }

    let decreasing = rows.windows(2).all(|w| w[1].rel_err_llog <= w[0].rel_err_llog * 1.001);
    let last_err = rows.last().map(|r| r.rel_err_llog).unwrap_or(f64::NAN);
    let verdict = Verdict {
        pass: decreasing && last_err <= TWO_BAND_AGREEMENT_TOL,
        metric: last_err,
        detail: format!(
            "relative error in λ·log T_c per λ: {:?}; monotone decrease: {decreasing}",
            rows.iter().map(|r| (r.lambda, r.rel_err_llog)).collect::<Vec<_>>()
        ),
    };
    Ok((
        TwoBandReport { kappa, lambda_ref, t0_fit, rows },
        verdict,
    ))
}

impl AsymptoticReport {
    /// Plain-text rendering for the CLI.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        push(&mut out, "asymptotic enhancement report".into());
        push(&mut out, "=============================".into());
        if let Some(pc) = &self.constants {
            push(&mut out, format!("branch: {:?}", pc.branch));
            push(
                &mut out,
                format!(
                    "e_hat = {:.6}, minimizing bands {:?}, ground channels {:?}",
                    pc.e_hat, pc.minimizing_bands, pc.ground_channels
                ),
            );
            push(
                &mut out,
                format!(
                    "A1+ = {:.6}, A1- = {:.6}, A2 = {}",
                    pc.a1_plus,
                    pc.a1_minus,
                    pc.a2.map_or("n/a".into(), |v| format!("{v:.6}")),
                ),
            );
        }
        for sweep in &self.sweeps {
            push(&mut out, format!("-- λ = {} ({} records)", sweep.lambda, sweep.records.len()));
            for r in &sweep.records {
                push(
                    &mut out,
                    format!(
                        "   κ = {:+.4}  tc = {}  λ·log-ratio = {}",
                        r.kappa,
                        r.tc.map_or("not found".into(), |t| format!("{t:.6e}")),
                        r.log_ratio.map_or("n/a".into(), |v| format!("{v:.6e}")),
                    ),
                );
            }
        }
        for fit in &self.fits {
            push(
                &mut out,
                format!(
                    "fit {:?}: slope = {:.6}, prediction = {}, agreement = {}, rms = {:.2e} ({} pts)",
                    fit.branch,
                    fit.slope,
                    fit.prediction.map_or("n/a".into(), |v| format!("{v:.6}")),
                    fit.agreement.map_or("n/a".into(), |v| format!("{:.2}%", v * 100.0)),
                    fit.residual_norm,
                    fit.points_used
                ),
            );
        }
        if let Some(tb) = &self.two_band {
            push(
                &mut out,
                format!("two-band closed form at κ = {} (T0_fit = {:.6e}):", tb.kappa, tb.t0_fit),
            );
            for row in &tb.rows {
                push(
                    &mut out,
                    format!(
                        "   λ = {:<5} measured = {:.6e}  predicted = {:.6e}  rel err(λ·log) = {:.3e}",
                        row.lambda, row.measured_tc, row.predicted_tc, row.rel_err_llog
                    ),
                );
            }
        }
        let verdict_line = |name: &str, v: &Option<Verdict>| match v {
            Some(v) => format!(
                "[{}] {name}: {}",
                if v.pass { "PASS" } else { "FAIL" },
                v.detail
            ),
            None => format!("[ -- ] {name}: not applicable"),
        };
        push(
            &mut out,
            format!(
                "[{}] monotonicity: {}",
                if self.verdicts.monotonicity.pass { "PASS" } else { "FAIL" },
                self.verdicts.monotonicity.detail
            ),
        );
        push(&mut out, verdict_line("linear", &self.verdicts.linear));
        push(&mut out, verdict_line("quadratic", &self.verdicts.quadratic));
        push(&mut out, verdict_line("two-band", &self.verdicts.two_band));
        for gap in &self.gaps {
            push(&mut out, format!("note: {gap}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic_records(slope: f64, lambda: f64, quadratic: bool) -> Vec<SweepRecord> {
        let mut records = Vec::new();
        for i in -6i32..=6 {
            let kappa = 0.03 * i as f64;
            let x = if quadratic { kappa * kappa } else { kappa.abs() };
            records.push(SweepRecord {
                lambda,
                kappa,
                tc: Some(1.0),
                tc_ref: Some(1.0),
                log_ratio: (kappa != 0.0).then_some(slope * x),
                min_eig_at_tc: None,
                channel: Some(0),
                grid_points: 0,
                iterations: 0,
            });
        }
        records
    }

    #[test]
    fn exact_linear_law_is_recovered() {
        let records = synthetic_records(0.37, 0.2, false);
        let fit =
            fit_enhancement(&records, FitBranch::LinearPlus, (0.0, 1.0), Some(0.37)).unwrap();
        assert_relative_eq!(fit.slope, 0.37, epsilon = 1e-12);
        assert!(fit.residual_norm < 1e-14);
        assert!(fit.agreement.unwrap() < 1e-12);
        let fit =
            fit_enhancement(&records, FitBranch::LinearMinus, (0.0, 1.0), Some(0.37)).unwrap();
        assert_relative_eq!(fit.slope, 0.37, epsilon = 1e-12);
    }

    #[test]
    fn exact_quadratic_law_is_recovered() {
        let records = synthetic_records(1.9, 0.2, true);
        let fit = fit_enhancement(&records, FitBranch::Quadratic, (0.0, 1.0), Some(1.9)).unwrap();
        assert_relative_eq!(fit.slope, 1.9, epsilon = 1e-12);
        let (lo, hi) = fit.side_slopes.unwrap();
        assert_relative_eq!(lo, hi, epsilon = 1e-12);
    }

    #[test]
    fn insufficient_data_is_rejected() {
        let records = synthetic_records(0.5, 0.2, false);
        assert!(fit_enhancement(&records, FitBranch::LinearPlus, (0.0, 0.04), None).is_err());
    }

    #[test]
    fn mixed_lambda_is_rejected() {
        let mut records = synthetic_records(0.5, 0.2, false);
        records[0].lambda = 0.3;
        assert!(fit_enhancement(&records, FitBranch::LinearPlus, (0.0, 1.0), None).is_err());
    }

    #[test]
    fn kappa_grid_contains_reference_and_both_signs() {
        let grid = symmetric_kappa_grid(0.02, 0.2, 7);
        assert!(grid.contains(&0.0));
        assert_eq!(grid.len(), 15);
        assert_eq!(grid.iter().filter(|&&k| k > 0.0).count(), 7);
        assert_eq!(grid.iter().filter(|&&k| k < 0.0).count(), 7);
    }
}
