//! `bpm-spdc`: phase-matching design, SHG spectra, pair-source simulation and
//! tag-stream analysis, each writing CSV artifacts.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 no phase-matching
//! solution, 3 simulation over its event cap.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use bpm_spdc_core::analysis::{AnalysisError, AnalysisReport, DEFAULT_SPAN_WINDOWS};
use bpm_spdc_core::dispersion::load_material;
use bpm_spdc_core::montecarlo::{read_tags, write_tags};
use bpm_spdc_core::phasematch::{
    linear_grid, solve_pm_angle, solve_pm_wavelength, tuning_rate, PhaseMatchSolution, ShgSpectrum,
};
use bpm_spdc_core::report::{histogram_csv, metrics_csv, shg_csv, solutions_csv, write_atomic, CsvHeader};
use bpm_spdc_core::{
    analyze, generate_tags, AnalysisOptions, DispersionError, PhaseMatchError, PropagationAngle, SimError,
    SourceModel, WaveguideConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "bpm-spdc", version, about = "Birefringent phase-matching design and photon-pair statistics")]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// RNG seed; overrides `[source] seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the degenerate type-1 condition; writes pm_solve.csv.
    PmSolve(PmSolveArgs),
    /// Normalized SHG spectrum on the first-harmonic axis; writes shg.csv.
    Shg(ShgArgs),
    /// Thermal tuning rate of the first-harmonic wavelength; writes tune.csv.
    Tune(TuneArgs),
    /// Simulate tags and analyze them; writes tags.txt, metrics.csv, histogram.csv.
    Simulate(SimulateArgs),
    /// Analyze an existing tag file; writes metrics.csv, histogram.csv.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolveMode {
    /// Fixed θ, solve for the pump wavelength.
    Wavelength,
    /// Fixed pump wavelength, solve for θ.
    Angle,
}

#[derive(Debug, Args)]
struct WaveguideOverrides {
    #[arg(long, value_name = "DEG")]
    theta_deg: Option<f64>,
    #[arg(long = "temperature-k", value_name = "K")]
    temperature_k: Option<f64>,
}

#[derive(Debug, Args)]
struct PmSolveArgs {
    #[arg(long, value_enum, default_value = "wavelength")]
    mode: SolveMode,
    /// Target pump wavelength for `--mode angle`.
    #[arg(long, value_name = "NM")]
    lambda_p_nm: Option<f64>,
    #[command(flatten)]
    waveguide: WaveguideOverrides,
}

#[derive(Debug, Args)]
struct ShgArgs {
    #[arg(long, value_name = "NM")]
    lambda_min_nm: f64,
    #[arg(long, value_name = "NM")]
    lambda_max_nm: f64,
    #[arg(long, value_name = "NM")]
    step_nm: f64,
    #[arg(long, value_name = "DEG")]
    theta_deg: Option<f64>,
    #[arg(long, value_name = "MM")]
    length_mm: Option<f64>,
    /// One or more temperatures; several write one shg_T<K>K.csv each.
    #[arg(long = "temperature-k", value_name = "K", value_delimiter = ',', num_args = 1..)]
    temperature_k: Vec<f64>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    /// Finite-difference temperature step.
    #[arg(long = "step-k", value_name = "K", default_value_t = 1.0)]
    step_k: f64,
    #[command(flatten)]
    waveguide: WaveguideOverrides,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_name = "S")]
    duration_s: Option<f64>,
    #[arg(long, value_name = "NS")]
    tau_ns: Option<f64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Tag file to analyze.
    #[arg(long, value_name = "PATH")]
    tags: PathBuf,
    #[arg(long, value_name = "NS")]
    tau_ns: Option<f64>,
}

/// A failure with its process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<DispersionError> for Failure {
    fn from(e: DispersionError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<PhaseMatchError> for Failure {
    fn from(e: PhaseMatchError) -> Self {
        Self {
            code: if e.is_no_solution() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Self {
            code: if matches!(e, SimError::ResourceCap { .. }) { 3 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Sim(e) => e.into(),
            other => Self::usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bpm-spdc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Loaded configuration plus the global overrides.
struct Context {
    config: Option<RunConfig>,
    seed: Option<u64>,
    out: PathBuf,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, Failure> {
        let config = cli.config.as_deref().map(RunConfig::load).transpose()?;
        let out = cli
            .out
            .clone()
            .or_else(|| config.as_ref().and_then(|c| c.output_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self {
            config,
            seed: cli.seed,
            out,
        })
    }

    fn config(&self) -> Result<&RunConfig, Failure> {
        self.config
            .as_ref()
            .ok_or_else(|| Failure::usage("this command needs --config"))
    }

    fn seed(&self) -> u64 {
        self.seed
            .or_else(|| self.config.as_ref().and_then(|c| c.source.as_ref()).map(|s| s.seed))
            .unwrap_or(0)
    }

    fn header(&self) -> CsvHeader {
        let raw = self.config.as_ref().map_or(&[][..], |c| &c.raw[..]);
        CsvHeader::new(raw, self.seed())
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| Failure::usage(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        write_atomic(&path, contents.as_bytes()).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    /// Waveguide from the config with command-line θ / T overrides.
    fn waveguide(&self, theta_deg: Option<f64>, temperature_k: Option<f64>) -> Result<WaveguideConfig, Failure> {
        let cfg = self.config()?;
        let section = cfg.require_waveguide()?;
        let mut material = load_material(cfg.require_material()?)?;
        if let Some(interp) = section.interpolation {
            material = material.with_interpolation(interp);
        }
        let theta = theta_deg.or(section.theta_deg).unwrap_or(90.0);
        let temperature = temperature_k
            .or(section.temperature_k)
            .unwrap_or_else(|| material.reference_temperature());
        let theta = PropagationAngle::from_degrees(theta)?;
        let mut wg = WaveguideConfig::new(Arc::new(material), theta, section.length_mm, temperature)?;
        wg.geometry = section.geometry.clone();
        Ok(wg)
    }

    fn source(&self) -> Result<SourceModel, Failure> {
        let mut model = self.config()?.require_source()?.clone();
        if let Some(seed) = self.seed {
            model.seed = seed;
        }
        Ok(model)
    }

    fn analysis_options(&self, model: Option<&SourceModel>, tau_ns: Option<f64>) -> Result<AnalysisOptions, Failure> {
        let mut opts = model.map(AnalysisOptions::for_model).unwrap_or_default();
        if let Some(ns) = tau_ns {
            opts.window_s = positive("--tau-ns", ns)? * 1e-9;
        }
        opts.histogram_span_s = DEFAULT_SPAN_WINDOWS * opts.window_s;
        if let Some(cfg) = &self.config {
            if let Some(span) = cfg.analysis.span_s {
                opts.histogram_span_s = span;
            }
            opts.baseline = cfg.analysis.baseline;
        }
        Ok(opts)
    }
}

fn positive(flag: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::usage(format!("{flag} must be a positive number, got {v}")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Context::new(&cli)?;
    match &cli.command {
        Command::PmSolve(args) => cmd_pm_solve(&ctx, args),
        Command::Shg(args) => cmd_shg(&ctx, args),
        Command::Tune(args) => cmd_tune(&ctx, args),
        Command::Simulate(args) => cmd_simulate(&ctx, args),
        Command::Analyze(args) => cmd_analyze(&ctx, args),
    }
}

fn cmd_pm_solve(ctx: &Context, args: &PmSolveArgs) -> Result<(), Failure> {
    let wg = ctx.waveguide(args.waveguide.theta_deg, args.waveguide.temperature_k)?;
    let solution = match args.mode {
        SolveMode::Wavelength => solve_pm_wavelength(&wg)?,
        SolveMode::Angle => {
            let lambda_p = args
                .lambda_p_nm
                .ok_or_else(|| Failure::usage("--mode angle needs --lambda-p-nm"))?;
            solve_pm_angle(&wg, positive("--lambda-p-nm", lambda_p)?)?
        }
    };
    print_solution(&solution);
    let path = ctx.write("pm_solve.csv", &solutions_csv(&ctx.header(), &[solution]))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn print_solution(s: &PhaseMatchSolution) {
    println!("theta        {:.6} deg", s.theta_deg);
    println!("temperature  {:.3} K", s.temperature_k);
    println!("lambda_p     {:.6} nm", s.lambda_p_nm);
    println!("lambda_s,i   {:.6} nm", s.lambda_s_nm);
    println!("n matched    {:.8}", s.matched_index);
    println!("residual dk  {:.3e} rad/mm", s.residual_delta_k);
}

fn cmd_shg(ctx: &Context, args: &ShgArgs) -> Result<(), Failure> {
    if !(args.lambda_min_nm.is_finite() && args.lambda_max_nm.is_finite() && args.lambda_min_nm < args.lambda_max_nm) {
        return Err(Failure::usage(format!(
            "--lambda-min-nm ({}) must be below --lambda-max-nm ({})",
            args.lambda_min_nm, args.lambda_max_nm
        )));
    }
    let step = positive("--step-nm", args.step_nm)?;
    let grid = linear_grid(args.lambda_min_nm, args.lambda_max_nm, step);
    let mut wg = ctx.waveguide(args.theta_deg, None)?;
    if let Some(l) = args.length_mm {
        wg = wg.with_length(positive("--length-mm", l)?)?;
    }
    let temperatures = if args.temperature_k.is_empty() {
        vec![wg.temperature_k()]
    } else {
        args.temperature_k.clone()
    };
    let header = ctx.header();
    for &t in &temperatures {
        let spectrum = ShgSpectrum::compute(&wg.with_temperature(t)?, &grid)?;
        let name = if temperatures.len() == 1 {
            "shg.csv".to_string()
        } else {
            format!("shg_T{t}K.csv")
        };
        let path = ctx.write(&name, &shg_csv(&header, &spectrum))?;
        println!("T = {t} K: peak at {:.4} nm, wrote {}", spectrum.peak_lambda_nm, path.display());
    }
    Ok(())
}

fn cmd_tune(ctx: &Context, args: &TuneArgs) -> Result<(), Failure> {
    let wg = ctx.waveguide(args.waveguide.theta_deg, args.waveguide.temperature_k)?;
    let rate = tuning_rate(&wg, positive("--step-k", args.step_k)?)?;
    let t = wg.temperature_k();
    let mut csv = ctx.header().line();
    csv.push_str("temperature_K,lambda_fh_nm\n");
    for (k, lambda) in rate.lambda_fh_nm.iter().enumerate() {
        let _ = writeln!(csv, "{},{lambda}", t + (k as f64 - 1.0) * rate.step_k);
    }
    println!("tuning rate  {:.6} nm/K (first harmonic)", rate.fh_nm_per_k);
    if rate.is_nonlinear() {
        eprintln!(
            "bpm-spdc: warning: curvature over ±{} K is {:.1}% of the slope",
            rate.step_k,
            100.0 * rate.nonlinearity
        );
    }
    let path = ctx.write("tune.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), Failure> {
    let mut model = ctx.source()?;
    if let Some(d) = args.duration_s {
        model.duration_s = positive("--duration-s", d)?;
    }
    if let Some(ns) = args.tau_ns {
        model.coincidence_window_s = positive("--tau-ns", ns)? * 1e-9;
    }
    println!("seed {}", model.seed);
    let stream = generate_tags(&model)?;
    let opts = ctx.analysis_options(Some(&model), None)?;
    let report = analyze(&stream, &opts)?;

    std::fs::create_dir_all(&ctx.out).map_err(|e| Failure::usage(format!("{}: {e}", ctx.out.display())))?;
    let tags = ctx.out.join("tags.txt");
    write_tags(&stream, &tags)?;
    println!("wrote {} ({} events)", tags.display(), stream.len());
    write_report(ctx, &report)
}

fn cmd_analyze(ctx: &Context, args: &AnalyzeArgs) -> Result<(), Failure> {
    let model = match &ctx.config {
        Some(cfg) => cfg.source.clone(),
        None => None,
    };
    let opts = ctx.analysis_options(model.as_ref(), args.tau_ns)?;
    let stream = read_tags(&args.tags).map_err(|e| match e {
        SimError::Parse { .. } => Failure::usage(format!("{}: {e}", args.tags.display())),
        other => other.into(),
    })?;
    let report = analyze(&stream, &opts)?;
    write_report(ctx, &report)
}

fn write_report(ctx: &Context, report: &AnalysisReport) -> Result<(), Failure> {
    let header = ctx.header();
    print!("{}", metrics_table(report));
    let m = ctx.write("metrics.csv", &metrics_csv(&header, report))?;
    let h = ctx.write("histogram.csv", &histogram_csv(&header, &report.histogram))?;
    println!("wrote {} and {}", m.display(), h.display());
    Ok(())
}

fn metrics_table(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let r = &report.rates;
    let _ = writeln!(out, "duration     {} s, window {} ns", r.duration_s, r.window_s * 1e9);
    for (name, v) in [
        ("C_s", r.c_s),
        ("C_i", r.c_i),
        ("C_si", r.c_si),
        ("C_si1", r.c_si1),
        ("C_si2", r.c_si2),
        ("C_si1i2", r.c_si1i2),
    ] {
        let _ = writeln!(out, "{name:<12} {v:.6e} Hz");
    }
    let m = &report.metrics;
    let car = m.car.clone().map(|c| {
        let flag = if c.lower_bound { " (lower bound)" } else { "" };
        format!("{:.6e} ± {:.2e}{flag}", c.value, c.sigma)
    });
    let rows = [
        ("PGR", m.pgr.clone().map(|e| format!("{:.6e} ± {:.2e} Hz", e.value, e.sigma))),
        ("brightness", m.brightness.clone().map(|e| format!("{:.6e} ± {:.2e} Hz/mW", e.value, e.sigma))),
        ("CAR", car),
        ("CAR x PGR", m.car_times_pgr().map(|e| format!("{:.6e} ± {:.2e} Hz", e.value, e.sigma))),
        ("eta_H s", m.eta_h_signal.clone().map(|e| format!("{:.6} ± {:.2e}", e.value, e.sigma))),
        ("eta_H i", m.eta_h_idler.clone().map(|e| format!("{:.6} ± {:.2e}", e.value, e.sigma))),
        ("g2_H(0)", m.g2h_zero.clone().map(|e| format!("{:.6} ± {:.2e}", e.value, e.sigma))),
        ("purity", m.purity.clone().map(|e| format!("{:.6} ± {:.2e}", e.value, e.sigma))),
    ];
    for (name, row) in rows {
        match row {
            Ok(text) => {
                let _ = writeln!(out, "{name:<12} {text}");
            }
            Err(e) => {
                let _ = writeln!(out, "{name:<12} {e}");
            }
        }
    }
    out
}
