//! `bcs` — critical temperatures, gap functions, and enhancement analysis
//! for multi-band BCS models from declarative TOML configs.

mod csv;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bcs_core::analysis::{
    asymptotic_report, run_sweep, symmetric_kappa_grid, ReportOptions, SweepRecord,
};
use bcs_core::diagnostics::run_builtin_checks;
use bcs_core::gap::{solve_gap, GapOptions};
use bcs_core::kernels::build_grid;
use bcs_core::model::{build_model, ModelConfig};
use bcs_core::spectral::{channel_kernels, critical_temperature, SolverOptions, TcOutcome};
use bcs_core::ModelInstance;

#[derive(Parser)]
#[command(name = "bcs", version, about = "multi-band BCS critical-temperature toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Model config (TOML).
    #[arg(long)]
    model: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Nodes per band (16..=2048).
    #[arg(long)]
    points_per_band: Option<usize>,
    /// Channel scan cutoff (0..=64).
    #[arg(long)]
    ell_max: Option<usize>,
    /// Relative temperature tolerance of the bisection (1e-9..=1e-2).
    #[arg(long)]
    bisect_tol: Option<f64>,
    /// UV cutoff as a multiple of the largest Fermi momentum (4..=64).
    #[arg(long)]
    uv_cutoff_factor: Option<f64>,
    /// Node-density multiplier near the Fermi surfaces (0.1..=100).
    #[arg(long)]
    clustering_scale: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Critical temperature at one (λ, κ).
    Tc {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
    },
    /// T_c over a κ-grid at fixed λ; emits the sweep CSV and plot data.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        lambda: f64,
        /// Inclusive linear range "lo:hi:count".
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        kappa_range: Option<KappaRange>,
        /// Explicit comma-separated κ list.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        kappa: Vec<f64>,
        /// Parallel workers (default: BCS_NUM_WORKERS or 1).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Solve the gap equation at one temperature and write the gap profile.
    Gap {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        /// Temperature (absolute, or a fraction of T_c with --relative-to-tc).
        #[arg(long)]
        temperature: f64,
        #[arg(long, default_value_t = false)]
        relative_to_tc: bool,
        /// Seed amplitude for the gap iteration.
        #[arg(long, default_value_t = 1e-3)]
        init: f64,
    },
    /// Fermi-surface channel constants and enhancement coefficients.
    Constants {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Full asymptotic report: sweeps, fits, verdicts.
    Report {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.3, 0.25, 0.2])]
        lambdas: Vec<f64>,
        /// κ window "lo:hi:count" applied symmetrically to both signs.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        kappa_window: Option<KappaRange>,
        /// κ for the two-band closed-form comparison.
        #[arg(long, default_value_t = 0.3)]
        two_band_kappa: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the built-in invariant suite (nonzero exit on failure).
    Check {
        /// Model config; defaults to a built-in reference model.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug)]
struct KappaRange {
    lo: f64,
    hi: f64,
    count: usize,
}

fn parse_range(s: &str) -> Result<KappaRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:count (got `{s}`)"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("bad count: {e}"))?;
    if count == 0 || hi < lo {
        return Err("need hi >= lo and count >= 1".into());
    }
    Ok(KappaRange { lo, hi, count })
}

impl KappaRange {
    fn expand(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        (0..self.count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; anything else is a config error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Tc { common, lambda, kappa } => cmd_tc(&common, lambda, kappa),
        Command::Sweep { common, lambda, kappa_range, kappa, workers } => {
            cmd_sweep(&common, lambda, kappa_range, kappa, workers)
        }
        Command::Gap { common, lambda, kappa, temperature, relative_to_tc, init } => {
            cmd_gap(&common, lambda, kappa, temperature, relative_to_tc, init)
        }
        Command::Constants { common } => cmd_constants(&common),
        Command::Report { common, lambdas, kappa_window, two_band_kappa, workers } => {
            cmd_report(&common, lambdas, kappa_window, two_band_kappa, workers)
        }
        Command::Check { model } => cmd_check(model.as_deref()),
    }
}

fn load_model(common: &CommonOpts) -> Result<ModelInstance, Box<dyn std::error::Error>> {
    let config = ModelConfig::from_path(&common.model)?;
    Ok(build_model(&config)?)
}

fn solver_options(common: &CommonOpts) -> Result<SolverOptions, String> {
    let mut opts = SolverOptions::default();
    if let Some(p) = common.points_per_band {
        if !(16..=2048).contains(&p) {
            return Err(format!("points-per-band {p} outside 16..=2048"));
        }
        opts.grid.points_per_band = p;
    }
    if let Some(l) = common.ell_max {
        if l > 64 {
            return Err(format!("ell-max {l} outside 0..=64"));
        }
        opts.ell_max = l;
    }
    if let Some(t) = common.bisect_tol {
        if !(1e-9..=1e-2).contains(&t) {
            return Err(format!("bisect-tol {t} outside 1e-9..=1e-2"));
        }
        opts.bisect_tol = t;
    }
    if let Some(f) = common.uv_cutoff_factor {
        if !(4.0..=64.0).contains(&f) {
            return Err(format!("uv-cutoff-factor {f} outside 4..=64"));
        }
        opts.grid.uv_cutoff_factor = f;
    }
    if let Some(c) = common.clustering_scale {
        if !(0.1..=100.0).contains(&c) {
            return Err(format!("clustering-scale {c} outside 0.1..=100"));
        }
        opts.grid.clustering_scale = c;
    }
    Ok(opts)
}

fn worker_count(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("BCS_NUM_WORKERS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .clamp(1, 256)
}

fn run_id(parts: &[String]) -> String {
    let mut hasher = DefaultHasher::new();
    for p in parts {
        p.hash(&mut hasher);
    }
    format!("{:016x}", hasher.finish())
}

/// Write atomically: temp file in the same directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn model_id(common: &CommonOpts) -> Result<String, std::io::Error> {
    std::fs::read_to_string(&common.model)
}

fn tc_value(outcome: &TcOutcome) -> String {
    match outcome {
        TcOutcome::Found { tc } => format!("{tc:.9e}"),
        TcOutcome::NotFound { floor, min_eig_at_floor } => {
            format!("not found above the floor {floor:.3e} (min eig there {min_eig_at_floor:.6})")
        }
    }
}

fn cmd_tc(
    common: &CommonOpts,
    lambda: f64,
    kappa: f64,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = load_model(common)?;
    let opts = solver_options(common)?;
    let id = run_id(&[model_id(common)?, format!("tc-{lambda}-{kappa}")]);
    let res = critical_temperature(&model, lambda, kappa, &opts)?;

    println!("tc: {}", tc_value(&res.outcome));
    if let Some(ell) = res.channel {
        println!("channel: {ell}");
    }
    if let Some(cert) = &res.certificate {
        println!(
            "certificate: min eig {:.9} at T = {:.6e}, {:.9} at T = {:.6e} ({})",
            cert.eig_below,
            cert.t_below,
            cert.eig_above,
            cert.t_above,
            if cert.holds() { "holds" } else { "VIOLATED" }
        );
    }
    println!("evaluations: {} on {} grid points", res.iterations, res.grid_points);

    let summary = serde_json::json!({
        "run_id": id,
        "command": "tc",
        "model": { "dimension": model.dimension(), "n_bands": model.n_bands() },
        "lambda": lambda,
        "kappa": kappa,
        "result": res,
    });
    let path = common.out.join(format!("tc_{id}.json"));
    write_atomic(&path, &serde_json::to_string_pretty(&summary)?)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn plot_file(records: &[SweepRecord]) -> String {
    let mut out = String::from("# kappa  lambda_log_ratio\n");
    for r in records {
        if let Some(lr) = r.log_ratio {
            out.push_str(&format!("{} {}\n", csv::float_field(r.kappa), csv::float_field(lr)));
        }
    }
    out
}

fn cmd_sweep(
    common: &CommonOpts,
    lambda: f64,
    kappa_range: Option<KappaRange>,
    kappa_list: Vec<f64>,
    workers: Option<usize>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = load_model(common)?;
    let opts = solver_options(common)?;
    let mut kappas = kappa_list;
    if let Some(range) = kappa_range {
        kappas.extend(range.expand());
    }
    if kappas.is_empty() {
        return Err("empty κ grid: pass --kappa-range or --kappa".into());
    }
    let workers = worker_count(workers);
    let id = run_id(&[model_id(common)?, format!("sweep-{lambda}"), format!("{kappas:?}")]);

    let outcome = run_sweep(&model, lambda, &kappas, &opts, workers)?;
    for (kappa, msg) in &outcome.failures {
        eprintln!("sweep point κ = {kappa} failed: {msg}");
    }

    let csv_path = common.out.join(format!("sweep_{id}.csv"));
    write_atomic(&csv_path, &csv::sweep_csv(&id, &model, &outcome.records))?;
    let plot_path = common.out.join(format!("plot_kappa_vs_llog_{id}.dat"));
    write_atomic(&plot_path, &plot_file(&outcome.records))?;

    let summary = serde_json::json!({
        "run_id": id,
        "command": "sweep",
        "model": { "dimension": model.dimension(), "n_bands": model.n_bands() },
        "lambda": lambda,
        "records": outcome.records,
        "failures": outcome.failures,
    });
    write_atomic(
        &common.out.join(format!("sweep_{id}.json")),
        &serde_json::to_string_pretty(&summary)?,
    )?;

    println!(
        "{} records ({} failures) -> {}",
        outcome.records.len(),
        outcome.failures.len(),
        csv_path.display()
    );
    Ok(if outcome.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_gap(
    common: &CommonOpts,
    lambda: f64,
    kappa: f64,
    temperature: f64,
    relative_to_tc: bool,
    init: f64,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = load_model(common)?;
    let opts = solver_options(common)?;
    let t = if relative_to_tc {
        let res = critical_temperature(&model, lambda, kappa, &opts)?;
        let tc = res.outcome.found().ok_or("cannot solve relative to T_c: T_c not found")?;
        println!("tc = {tc:.9e}; solving at T = {temperature} tc");
        temperature * tc
    } else {
        temperature
    };

    let grid = build_grid(&model, t, &opts.grid)?;
    let kernels = channel_kernels(&model, &grid, 0)?;
    let gap_opts =
        GapOptions { expect_nontrivial: relative_to_tc && temperature < 1.0, ..Default::default() };
    let sol = solve_gap(&model, &grid, &kernels, t, lambda, kappa, init, &gap_opts)?;

    println!(
        "gap solve at T = {t:.9e}: max gap {:.9e}, residual {:.3e}, {} iterations{}",
        sol.max_gap(),
        sol.residual,
        sol.iterations,
        if sol.is_trivial() { " (trivial)" } else { "" }
    );

    let id = run_id(&[model_id(common)?, format!("gap-{lambda}-{kappa}-{t}")]);
    let mut text = format!(
        "# T={} lambda={} kappa={} residual={} iterations={} converged={}\n",
        csv::float_field(sol.temperature),
        csv::float_field(sol.lambda),
        csv::float_field(sol.kappa),
        csv::float_field(sol.residual),
        sol.iterations,
        sol.converged
    );
    text.push_str("band,p,delta,epsilon,E\n");
    for (a, bg) in grid.bands().iter().enumerate() {
        for (&p, &dv) in bg.nodes.iter().zip(&sol.delta[a]) {
            let eps = model.band(a).energy(p);
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                a + 1,
                csv::float_field(p),
                csv::float_field(dv),
                csv::float_field(eps),
                csv::float_field(eps.hypot(dv)),
            ));
        }
    }
    let path = common.out.join(format!("gap_{id}.csv"));
    write_atomic(&path, &text)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_constants(common: &CommonOpts) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = load_model(common)?;
    let id = run_id(&[model_id(common)?, "constants".into()]);
    let n = model.n_bands();

    let mut v_matrix = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            v_matrix[a][b] = bcs_core::fermi_operator::v_coefficient(&model, a, b);
        }
    }
    println!("s-wave Fermi-surface coefficients v_ab:");
    for row in &v_matrix {
        println!("  {row:?}");
    }

    let mut minima = Vec::new();
    for a in 0..n {
        let (e, ell) = bcs_core::fermi_operator::intra_band_minimum(&model, a, 16)?;
        println!("band {}: e = {e:.9} at channel l = {ell}", a + 1);
        minima.push((e, ell));
    }

    let constants = match bcs_core::fermi_operator::perturbation_constants(&model, 16) {
        Ok(pc) => {
            println!("branch: {:?}", pc.branch);
            println!("A1+ = {:.9}, A1- = {:.9}", pc.a1_plus, pc.a1_minus);
            if let Some(a2) = pc.a2 {
                println!("A2 = {a2:.9}");
            }
            Some(pc)
        }
        Err(e) => {
            println!("perturbation constants unavailable: {e}");
            None
        }
    };

    let mut traces = Vec::new();
    for a in 0..n {
        traces.push(bcs_core::fermi_operator::trace_check(&model, a, 32)?);
    }

    let summary = serde_json::json!({
        "run_id": id,
        "command": "constants",
        "model": { "dimension": model.dimension(), "n_bands": model.n_bands() },
        "v_matrix": v_matrix,
        "intra_band_minima": minima,
        "constants": constants,
        "trace_checks": traces,
    });
    let path = common.out.join(format!("constants_{id}.json"));
    write_atomic(&path, &serde_json::to_string_pretty(&summary)?)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(
    common: &CommonOpts,
    lambdas: Vec<f64>,
    kappa_window: Option<KappaRange>,
    two_band_kappa: f64,
    workers: Option<usize>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = load_model(common)?;
    let solver = solver_options(common)?;
    let kappas = match kappa_window {
        Some(r) => symmetric_kappa_grid(r.lo, r.hi, r.count),
        None => symmetric_kappa_grid(0.02, 0.2, 7),
    };
    let opts = ReportOptions {
        lambdas,
        kappas,
        solver,
        ell_max_constants: 16,
        workers: worker_count(workers),
        two_band_kappa,
    };
    let id = run_id(&[model_id(common)?, format!("report-{:?}", opts.lambdas)]);

    let report = asymptotic_report(&model, &opts)?;
    let text = report.render_text();
    print!("{text}");

    write_atomic(&common.out.join(format!("report_{id}.txt")), &text)?;
    let summary = serde_json::json!({
        "run_id": id,
        "command": "report",
        "model": { "dimension": model.dimension(), "n_bands": model.n_bands() },
        "report": report,
    });
    write_atomic(
        &common.out.join(format!("report_{id}.json")),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    for sweep in &report.sweeps {
        let csv_path = common.out.join(format!("report_{id}_sweep_lambda{}.csv", sweep.lambda));
        write_atomic(&csv_path, &csv::sweep_csv(&id, &model, &sweep.records))?;
        let plot_path =
            common.out.join(format!("plot_kappa_vs_llog_{id}_lambda{}.dat", sweep.lambda));
        write_atomic(&plot_path, &plot_file(&sweep.records))?;
    }
    if let Some(tb) = &report.two_band {
        let mut dat = String::from("# lambda  lambda_log_tc_measured  lambda_log_tc_predicted\n");
        for row in &tb.rows {
            dat.push_str(&format!(
                "{} {} {}\n",
                csv::float_field(row.lambda),
                csv::float_field(row.lambda * row.measured_tc.ln()),
                csv::float_field(row.lambda * row.predicted_tc.ln()),
            ));
        }
        write_atomic(&common.out.join(format!("plot_lambda_vs_llogtc_{id}.dat")), &dat)?;
    }

    Ok(if report.gaps.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_check(model_path: Option<&Path>) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = match model_path {
        Some(p) => build_model(&ModelConfig::from_path(p)?)?,
        None => bcs_core::presets::two_band_dominant(),
    };
    let report = run_builtin_checks(&model)?;
    print!("{}", report.render_text());
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}
