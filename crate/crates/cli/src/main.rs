use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use apet::io::{atomic_write, write_csv, write_json, write_results, Cell, OutputFormat, Tabular};
use apet::network::{load_network_file, partition};
use apet::optimize::{
    geometric_grid, grid_sweep, linear_grid, optimize, temperature_sweep, ParameterBounds, SearchOptions, SimplexOptions,
    TemperatureModel,
};
use apet::spectral::{Lorentzian, NormalizedDensity};
use apet::transfer::{
    asymptotic_efficiency, bounce_efficiency, optimize_arrival, recombination_probability, ArrivalOptimum, ArrivalSearch,
    BounceParameters, PropagationTime,
};
use apet::units::{internal_to_ps, kappa_internal_to_ps, kappa_ps_to_internal, ps_to_internal};
use apet::{fmo, Error, ExcitonNetwork, Execution, ModelOptions, ParameterVector, ProfilePair, QuadratureWindow, RateOrdering};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Seed used by `optimize` when neither `--seed` nor the environment provides one.
const DEFAULT_SEED: u64 = 20_070_402;
const SEED_ENV: &str = "APET_SEED";

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "apet", version, about = "Resonant donor-acceptor energy transfer through a pigment network")]
struct Cli {
    /// Evaluate sequentially instead of on the rayon pool.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural constraints of a network.
    Validate(ModelArgs),
    /// Decay rates, shifts and emission densities on a frequency grid (CSV).
    Spectra(SpectraArgs),
    /// Overlap efficiency, renormalized frequencies and the resonance window (JSON).
    Resonance(ModelArgs),
    /// Optimal detection time and phase-limited transfer probability (JSON).
    Transfer(TransferArgs),
    /// Efficiency of repeated transfer attempts.
    Bounce(BounceArgs),
    /// Random search plus simplex refinement of the overlap efficiency.
    Optimize(OptimizeArgs),
    /// Overlap efficiency over a grid of sink coupling and sink energy (CSV).
    Sweep(SweepArgs),
    /// Overlap efficiency against temperature (CSV).
    Tempsweep(TempsweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Ordering {
    Ascending,
    Descending,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Network file (JSON); the bundled FMO monomer when omitted.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Decoherence rates in cm⁻¹, comma separated, sink rate last.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rates: Option<Vec<f64>>,
    /// Sink energy, cm⁻¹.
    #[arg(long, allow_hyphen_values = true, default_value_t = fmo::REFERENCE_SINK_ENERGY)]
    omega8: f64,
    /// Acceptor-sink coupling, cm⁻¹.
    #[arg(long, default_value_t = fmo::REFERENCE_SINK_COUPLING)]
    h28: f64,
    #[arg(long, value_enum, default_value = "descending")]
    ordering: Ordering,
    /// Integration window `lower:upper` in cm⁻¹.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Range>,
}

#[derive(Args)]
struct SpectraArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    /// Frequency range `lower:upper` of the grid; the integration window by default.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<Range>,
    /// CSV file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    /// Two identical Lorentzians.
    Matched,
    /// Donor and acceptor densities of the network.
    Fmo,
}

#[derive(Clone, Copy, ValueEnum)]
enum TauModel {
    Constant,
    Quadratic,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "matched")]
    source: Source,
    /// Lorentzian half width for `--source matched`, cm⁻¹.
    #[arg(long, default_value_t = 30.0)]
    gamma: f64,
    /// Lorentzian centre for `--source matched`, cm⁻¹.
    #[arg(long, allow_hyphen_values = true, default_value_t = 150.0)]
    omega0: f64,
    #[arg(long, value_enum, default_value = "constant")]
    tau_model: TauModel,
    /// Propagation time at resonance, ps.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Curvature of the propagation time, ps·cm²; optimized jointly when `--kappa-range` is given.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    kappa: f64,
    /// `lower:upper` in ps·cm². Defaults to ±1/γ³ for the quadratic model.
    #[arg(long, allow_hyphen_values = true)]
    kappa_range: Option<Range>,
    /// Detection-time bracket `lower:upper` in ps.
    #[arg(long, allow_hyphen_values = true)]
    t0_range: Option<Range>,
    /// Half width of the window for `--source matched`, in units of γ.
    #[arg(long, default_value_t = 200.0)]
    window_widths: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BounceArgs {
    /// Dissipation probability per attempt.
    #[arg(long)]
    p: f64,
    /// Recombination probability per flight.
    #[arg(long, required_unless_present_all = ["flight_ps", "recombination_ps"])]
    q: Option<f64>,
    /// Flight time, ps; with `--recombination-ps` replaces `--q`.
    #[arg(long, requires = "recombination_ps", conflicts_with = "q")]
    flight_ps: Option<f64>,
    /// Recombination time, ps.
    #[arg(long, requires = "flight_ps")]
    recombination_ps: Option<f64>,
    #[arg(long, default_value_t = 5)]
    n: u64,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// PRNG seed; falls back to $APET_SEED, then to a fixed default.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with `ParameterBounds`.
    #[arg(long)]
    bounds_file: Option<PathBuf>,
    #[arg(long, overrides_with = "no_refine")]
    refine: bool,
    #[arg(long, overrides_with = "refine")]
    no_refine: bool,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Simplex evaluation budget per refined candidate.
    #[arg(long, default_value_t = 2000)]
    refine_budget: usize,
    /// Receives `optimize.json` and `optimize_samples.csv`.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// `min:max:steps`, cm⁻¹.
    #[arg(long, default_value = "0:600:61")]
    h28_grid: Grid,
    /// `min:max:steps`, cm⁻¹.
    #[arg(long, allow_hyphen_values = true, default_value = "-500:0:51")]
    omega8_grid: Grid,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TempsweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 20.0)]
    tmin: f64,
    #[arg(long, default_value_t = 1000.0)]
    tmax: f64,
    #[arg(long, default_value_t = 41)]
    steps: usize,
    /// Temperature at which `--rates` hold, K.
    #[arg(long, default_value_t = TemperatureModel::DEFAULT_REFERENCE_TEMPERATURE)]
    tref: f64,
    /// Evenly spaced temperatures instead of geometric spacing.
    #[arg(long)]
    linear: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
struct Range {
    lower: f64,
    upper: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lower:upper, got {s:?}"))?;
        let lower: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let upper: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if lower >= upper || lower.is_nan() || upper.is_nan() {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Range { lower, upper })
    }
}

#[derive(Clone, Copy, Debug)]
struct Grid {
    min: f64,
    max: f64,
    steps: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected min:max:steps, got {s:?}"));
        };
        let min: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let max: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        let steps: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
        if steps == 0 || max < min {
            return Err(format!("empty grid {s:?}"));
        }
        Ok(Grid { min, max, steps })
    }
}

impl Grid {
    fn points(&self) -> Vec<f64> {
        linear_grid(self.min, self.max, self.steps)
    }
}

struct Context {
    execution: Execution,
}

impl ModelArgs {
    fn network(&self) -> apet::Result<ExcitonNetwork> {
        match &self.network {
            Some(path) => load_network_file(path),
            None => Ok(fmo::bundled_network()),
        }
    }

    fn parameters(&self) -> ParameterVector {
        let rates = self.rates.clone().unwrap_or_else(|| fmo::REFERENCE_RATES.to_vec());
        ParameterVector::new(rates, self.omega8, self.h28)
    }

    fn options(&self) -> apet::Result<ModelOptions> {
        let window = match self.window {
            Some(r) => Some(QuadratureWindow::new(r.lower, r.upper, 1e-9)?),
            None => None,
        };
        let ordering = match self.ordering {
            Ordering::Ascending => RateOrdering::Ascending,
            Ordering::Descending => RateOrdering::Descending,
        };
        Ok(ModelOptions { ordering, window })
    }

    fn profiles(&self) -> apet::Result<ProfilePair> {
        ProfilePair::build(&self.network()?, &self.parameters(), &self.options()?)
    }
}

/// CSV to `path`, or to stdout.
fn emit_csv<T: Tabular + Serialize>(records: &[T], path: Option<&Path>) -> apet::Result<()> {
    match path {
        Some(p) => write_results(p, records, OutputFormat::Csv),
        None => write_csv(&mut std::io::stdout().lock(), records),
    }
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> apet::Result<()> {
    match path {
        Some(p) => atomic_write(p, |out| write_json(out, value)),
        None => write_json(&mut std::io::stdout().lock(), value),
    }
}

fn validate(args: &ModelArgs) -> apet::Result<()> {
    let net = args.network()?;
    let params = args.parameters();
    // The sink is installed so its couplings are checked too.
    partition(&net, &params.sink()?)?;
    println!("{}: constraints satisfied", net.label());
    Ok(())
}

#[derive(Serialize)]
struct SpectraRow {
    omega: f64,
    gamma1: f64,
    gamma2: f64,
    delta1: f64,
    delta2: f64,
    f1: f64,
    f2: f64,
    sqrt_f1f2: f64,
}

impl Tabular for SpectraRow {
    fn header(&self) -> Vec<String> {
        ["omega", "gamma1", "gamma2", "delta1", "delta2", "f1", "f2", "sqrt_f1f2"].map(String::from).to_vec()
    }

    fn row(&self) -> Vec<Cell> {
        [self.omega, self.gamma1, self.gamma2, self.delta1, self.delta2, self.f1, self.f2, self.sqrt_f1f2]
            .map(Cell::Float)
            .to_vec()
    }
}

fn spectra(args: &SpectraArgs) -> apet::Result<()> {
    if args.points < 2 {
        return Err(Error::Parameter("--points must be at least 2".into()));
    }
    let pair = args.model.profiles()?;
    let norm = pair.normalized()?;
    let (lo, hi) = args.omega.map_or((pair.window.lower, pair.window.upper), |r| (r.lower, r.upper));
    let rows: Vec<SpectraRow> = linear_grid(lo, hi, args.points)
        .into_iter()
        .map(|omega| {
            use apet::spectral::Density;
            let (gamma1, delta1) = pair.donor.rate_and_shift(omega);
            let (gamma2, delta2) = pair.acceptor.rate_and_shift(omega);
            let (f1, f2) = (norm.donor.value(omega), norm.acceptor.value(omega));
            SpectraRow { omega, gamma1, gamma2, delta1, delta2, f1, f2, sqrt_f1f2: (f1 * f2).sqrt() }
        })
        .collect();
    emit_csv(&rows, args.output.as_deref())
}

fn resonance(args: &ModelArgs) -> apet::Result<()> {
    let analysis = args.profiles()?.analyze()?;
    emit_json(&analysis, None)
}

#[derive(Serialize)]
struct TransferReport {
    source: &'static str,
    /// ps
    t0_opt: f64,
    #[serde(rename = "P_opt")]
    p_opt: f64,
    #[serde(rename = "F")]
    f: f64,
    phase_factor: f64,
    /// ps·cm², when the quadratic model is used.
    kappa_opt: Option<f64>,
    resonance_frequency: f64,
    width: f64,
    unimodal: bool,
}

fn transfer(args: &TransferArgs, ctx: &Context) -> apet::Result<()> {
    let tau = ps_to_internal(args.tau);
    let propagation = match args.tau_model {
        TauModel::Constant => PropagationTime::Constant { tau },
        TauModel::Quadratic => PropagationTime::Quadratic { tau0: tau, kappa: kappa_ps_to_internal(args.kappa) },
    };
    let configure = |omega0: f64, width: f64| {
        let mut search = ArrivalSearch::new(omega0, width, propagation).with_execution(ctx.execution);
        if let Some(r) = args.t0_range {
            search = search.with_bracket(ps_to_internal(r.lower), ps_to_internal(r.upper));
        }
        if let TauModel::Quadratic = args.tau_model {
            let (lo, hi) = match args.kappa_range {
                Some(r) => (kappa_ps_to_internal(r.lower), kappa_ps_to_internal(r.upper)),
                None => ArrivalSearch::default_kappa_range(width),
            };
            search = search.with_kappa_range(lo, hi);
        }
        search
    };

    let (source, omega0, width, opt): (_, _, _, ArrivalOptimum) = match args.source {
        Source::Matched => {
            let line = Lorentzian::new(args.omega0, args.gamma)?;
            let half = args.window_widths * args.gamma;
            let window = QuadratureWindow::new(args.omega0 - half, args.omega0 + half, 1e-9)?;
            let f = NormalizedDensity::assume_normalized(line);
            let opt = optimize_arrival(&f, &f, &configure(args.omega0, args.gamma), &window)?;
            ("matched", args.omega0, args.gamma, opt)
        }
        Source::Fmo => {
            let pair = args.model.profiles()?;
            let norm = pair.normalized()?;
            let summary = pair.analyze()?.summary;
            let (omega0, width) = (summary.resonance_frequency, summary.effective_width);
            let opt = optimize_arrival(&norm.donor, &norm.acceptor, &configure(omega0, width), &pair.window)?;
            ("fmo", omega0, width, opt)
        }
    };
    let report = TransferReport {
        source,
        t0_opt: internal_to_ps(opt.arrival_time),
        p_opt: opt.probability,
        f: opt.overlap,
        phase_factor: opt.phase_factor,
        kappa_opt: opt.kappa.map(kappa_internal_to_ps),
        resonance_frequency: omega0,
        width,
        unimodal: opt.unimodal,
    };
    emit_json(&report, args.output.as_deref())
}

fn bounce(args: &BounceArgs) -> apet::Result<()> {
    let q = match (args.q, args.flight_ps, args.recombination_ps) {
        (Some(q), _, _) => q,
        (None, Some(flight), Some(rec)) => recombination_probability(flight, rec)?,
        _ => return Err(Error::Parameter("give --q or both --flight-ps and --recombination-ps".into())),
    };
    let bp = BounceParameters::new(args.p, q)?;
    let eta = bounce_efficiency(&bp, args.n);
    let limit = asymptotic_efficiency(&bp)?;
    println!("η({})={eta:.4}", args.n);
    println!("η(∞)={:.4}", limit.exact);
    println!("η(∞) first order={:.4}", limit.first_order);
    Ok(())
}

#[derive(Serialize)]
struct SeedInfo {
    value: u64,
    /// `flag`, `env:APET_SEED` or `default`.
    source: String,
}

fn resolve_seed(flag: Option<u64>) -> apet::Result<SeedInfo> {
    if let Some(value) = flag {
        return Ok(SeedInfo { value, source: "flag".into() });
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => {
            let value = s.trim().parse().map_err(|_| Error::Parameter(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
            Ok(SeedInfo { value, source: format!("env:{SEED_ENV}") })
        }
        Err(_) => Ok(SeedInfo { value: DEFAULT_SEED, source: "default".into() }),
    }
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    seed: SeedInfo,
    budget: usize,
    refine: bool,
    bounds: &'a ParameterBounds,
    failed_evaluations: usize,
    best: &'a apet::optimize::SearchRecord,
    top: &'a [apet::optimize::SearchRecord],
    refined: &'a [apet::optimize::SearchRecord],
}

fn run_optimize(args: &OptimizeArgs, ctx: &Context) -> apet::Result<()> {
    let net = args.model.network()?;
    let bounds: ParameterBounds = match &args.bounds_file {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => ParameterBounds::default(),
    };
    let seed = resolve_seed(args.seed)?;
    let refine = !args.no_refine;
    let options = SearchOptions {
        model: args.model.options()?,
        execution: ctx.execution,
        top_k: args.top_k,
        refine,
        simplex: SimplexOptions { max_evaluations: args.refine_budget, ..Default::default() },
    };
    let out = optimize(&net, &bounds, args.budget, seed.value, &options)?;
    std::fs::create_dir_all(&args.output_dir)?;
    write_results(args.output_dir.join("optimize_samples.csv"), &out.samples, OutputFormat::Csv)?;
    let best = &out.best;
    let report = OptimizeReport {
        seed,
        budget: args.budget,
        refine,
        bounds: &bounds,
        failed_evaluations: out.failed_evaluations,
        best,
        top: &out.top,
        refined: &out.refined,
    };
    atomic_write(args.output_dir.join("optimize.json"), |w| write_json(w, &report))?;
    let p = &best.parameters;
    println!(
        "F = {:.6} at omega8 = {:.2}, h28 = {:.2}, rates = {:?} (seed {} from {})",
        best.objective, p.sink_energy, p.sink_coupling, p.rates, report.seed.value, report.seed.source
    );
    Ok(())
}

fn sweep(args: &SweepArgs, ctx: &Context) -> apet::Result<()> {
    let net = args.model.network()?;
    let rates = args.model.parameters().rates;
    let grid =
        grid_sweep(&net, &args.h28_grid.points(), &args.omega8_grid.points(), &rates, &args.model.options()?, ctx.execution)?;
    emit_csv(&grid.cells(), args.output.as_deref())
}

fn tempsweep(args: &TempsweepArgs, ctx: &Context) -> apet::Result<()> {
    let net = args.model.network()?;
    let model = TemperatureModel::new(args.tref, args.model.parameters())?;
    if !(args.tmin > 0.0 && args.tmax >= args.tmin && args.steps > 0) {
        return Err(Error::Domain(format!("temperature grid {}..{} K with {} steps", args.tmin, args.tmax, args.steps)));
    }
    let temps = if args.linear {
        linear_grid(args.tmin, args.tmax, args.steps)
    } else {
        geometric_grid(args.tmin, args.tmax, args.steps)
    };
    let points = temperature_sweep(&net, &model, &temps, &args.model.options()?, ctx.execution)?;
    emit_csv(&points, args.output.as_deref())
}

fn run(cli: Cli) -> apet::Result<()> {
    let ctx = Context { execution: if cli.sequential { Execution::Sequential } else { Execution::Parallel } };
    match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Spectra(a) => spectra(a),
        Command::Resonance(a) => resonance(a),
        Command::Transfer(a) => transfer(a, &ctx),
        Command::Bounce(a) => bounce(a),
        Command::Optimize(a) => run_optimize(a, &ctx),
        Command::Sweep(a) => sweep(a, &ctx),
        Command::Tempsweep(a) => tempsweep(a, &ctx),
    }
}

/// Output closed early by the reader, as in `apet spectra | head`.
fn is_broken_pipe(e: &Error) -> bool {
    matches!(e, Error::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INPUT })
        }
    }
}
