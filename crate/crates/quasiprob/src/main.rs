//! Command-line front end: distribution export, quadrature moment recovery,
//! the simulated imperfect-detector experiment, and ordering inspection.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 validation failure (also
//! used by the argument parser). Every failure prints one machine-parsable
//! line `error: kind=<Kind> detail="…"` to standard error. All numeric
//! standard output carries 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use quasiprob::fock::{
    build_state, ladder_matrices, matrix_power, oracle_moment, squeezed_ladder,
    DensityMatrix, StateSpec,
};
use quasiprob::homodyne::{
    detector_params, reconstruct, sample_joint_counts, write_samples_csv, DetectorModel,
};
use quasiprob::moments::{expectation_from_g, photon_number_from_g};
use quasiprob::ordering::{
    expand_in_ordered_basis, ordered_monomial_matrix, ordering_terms, OrderingParams,
};
use quasiprob::phasespace::{
    integrate_moment, q_exact_grid, smooth, wigner_grid, write_csv, write_json,
    PhaseSpaceField, QuadratureGrid, SmoothingWidths,
};
use quasiprob::{Error, Result};

#[derive(Parser)]
#[command(
    name = "quasiprob",
    version,
    about = "Phase-space distributions, operator ordering, and simulated homodyne moment recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export a phase-space distribution (wigner, q, g, or husimi) to a file.
    Dist(DistArgs),
    /// Recover operator moments from a smoothed field by grid quadrature.
    Moments(MomentsArgs),
    /// Run the simulated imperfect-detector experiment end to end.
    Simulate(SimulateArgs),
    /// Print the ordering-rule expansion coefficients for {b†ⁿbᵐ}.
    Ordering(OrderingArgs),
}

#[derive(Args)]
struct StateArgs {
    /// State specifier: fock:N, coherent:A+Bi, cat:A+Bi,PHASE,
    /// thermal:MEAN, squeezed_vacuum:R
    #[arg(long, default_value = "fock:0")]
    state: String,

    /// Fock-space truncation dimension.
    #[arg(long, default_value_t = 64)]
    dim: usize,
}

impl StateArgs {
    fn build(&self) -> Result<DensityMatrix> {
        let spec: StateSpec = self.state.parse()?;
        build_state(&spec, self.dim)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Grid lower edge (both axes). Default −8, widened automatically with
    /// the smoothing width and state size unless set explicitly.
    #[arg(long)]
    grid_min: Option<f64>,

    /// Grid upper edge (both axes).
    #[arg(long)]
    grid_max: Option<f64>,

    /// Grid step.
    #[arg(long)]
    grid_step: Option<f64>,
}

impl GridArgs {
    /// Explicit flags win verbatim; otherwise pick a grid that holds the
    /// state's Fock reach plus eight smoothed standard deviations and clears
    /// the 6σ kernel guard.
    fn resolve(&self, rho: &DensityMatrix, sigma1: f64, sigma2: f64) -> Result<QuadratureGrid> {
        if self.grid_min.is_none() && self.grid_max.is_none() && self.grid_step.is_none() {
            let smax = sigma1.max(sigma2);
            let mut cum = 0.0;
            let mut occupied = rho.dim() - 1;
            for n in 0..rho.dim() {
                cum += rho.entries()[(n, n)].re;
                if cum >= 1.0 - 1e-12 {
                    occupied = n;
                    break;
                }
            }
            let reach = ((occupied + 1) as f64).sqrt();
            let half = 8.0f64
                .max(12.0 * smax)
                .max(reach + 8.0 * (0.25 + smax * smax).sqrt() + 0.5)
                .ceil();
            return QuadratureGrid::new(-half, half, 0.05);
        }
        QuadratureGrid::new(
            self.grid_min.unwrap_or(-8.0),
            self.grid_max.unwrap_or(8.0),
            self.grid_step.unwrap_or(0.05),
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichField {
    Wigner,
    Q,
    G,
    Husimi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    state: StateArgs,

    #[command(flatten)]
    grid: GridArgs,

    /// Which distribution to export.
    #[arg(long, value_enum)]
    which: WhichField,

    /// Detector efficiency on the α₁ quadrature (g only; pairs with --eta2).
    #[arg(long)]
    eta1: Option<f64>,

    /// Detector efficiency on the α₂ quadrature (g only; pairs with --eta1).
    #[arg(long)]
    eta2: Option<f64>,

    /// Smoothing width σ₁ (g: pairs with --sigma2; husimi: σ₂ = 1/(4σ₁)).
    #[arg(long)]
    sigma1: Option<f64>,

    /// Smoothing width σ₂.
    #[arg(long)]
    sigma2: Option<f64>,

    /// Output file format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,

    /// Output path (default field.csv / field.json by format).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    state: StateArgs,

    #[command(flatten)]
    grid: GridArgs,

    /// Detector efficiency on the α₁ quadrature.
    #[arg(long, default_value_t = 1.0)]
    eta1: f64,

    /// Detector efficiency on the α₂ quadrature.
    #[arg(long, default_value_t = 1.0)]
    eta2: f64,

    /// Target moments ⟨a†ⁿaᵐ⟩ as N,M pairs (n+m ≤ 4), e.g. --targets 1,1 2,2
    #[arg(long, required = true, num_args = 1.., value_name = "N,M")]
    targets: Vec<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    state: StateArgs,

    /// Detector efficiency on the α₁ quadrature.
    #[arg(long, default_value_t = 1.0)]
    eta1: f64,

    /// Detector efficiency on the α₂ quadrature.
    #[arg(long, default_value_t = 1.0)]
    eta2: f64,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    count: u64,

    /// Random seed (same seed → bit-identical run).
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Target moments ⟨a†ⁿaᵐ⟩ as N,M pairs (n+m ≤ 4).
    #[arg(long, num_args = 1.., value_name = "N,M", default_values = ["1,1", "2,2"])]
    targets: Vec<String>,

    /// Also write the drawn samples as CSV to this path.
    #[arg(long, value_name = "PATH")]
    emit_samples: Option<PathBuf>,
}

#[derive(Args)]
struct OrderingArgs {
    /// Power of b† in {b†ⁿbᵐ}.
    n: usize,

    /// Power of b in {b†ⁿbᵐ}.
    m: usize,

    /// Ordering parameter (negative; −1 is antinormal/Q ordering).
    #[arg(long, allow_negative_numbers = true)]
    s: f64,

    /// Verify the expansion as an operator identity and print the residual.
    #[arg(long)]
    check: bool,

    /// Matrix dimension for --check.
    #[arg(long, default_value_t = 32)]
    dim: usize,

    /// Squeeze parameter of the b-mode for --check.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    r: f64,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Dist(args) => cmd_dist(args),
        Command::Moments(args) => cmd_moments(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Ordering(args) => cmd_ordering(args),
    };
    match outcome {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: kind={} detail=\"{}\"", e.kind(), e);
            std::process::exit(if e.is_validation() { 2 } else { 1 });
        }
    }
}

/// Write one line to standard output, treating a closed pipe as success so
/// `quasiprob … | head` ends with the documented exit codes instead of a
/// panic. Every report printer goes through here.
fn emit(text: std::fmt::Arguments<'_>) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_fmt(text).and_then(|()| out.write_all(b"\n")) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Error::Io(e)),
    }
}

/// Parse one `N,M` target pair with the degree cap used everywhere.
fn parse_target(text: &str) -> Result<(usize, usize)> {
    let (n, m) = text
        .split_once(',')
        .ok_or_else(|| Error::InvalidArgument(format!("target `{text}` is not of the form N,M")))?;
    let parse = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|e| Error::InvalidArgument(format!("bad target component `{p}`: {e}")))
    };
    let (n, m) = (parse(n)?, parse(m)?);
    if n + m > 4 {
        return Err(Error::InvalidArgument(format!(
            "target ({n},{m}) has degree {} > 4",
            n + m
        )));
    }
    Ok((n, m))
}

fn parse_targets(texts: &[String]) -> Result<Vec<(usize, usize)>> {
    texts.iter().map(|t| parse_target(t)).collect()
}

/// The smoothing widths a dist invocation asks for, by flag set.
fn dist_widths(args: &DistArgs) -> Result<Option<SmoothingWidths>> {
    let forbid_widths = |which: &str| -> Result<()> {
        if args.eta1.is_some()
            || args.eta2.is_some()
            || args.sigma1.is_some()
            || args.sigma2.is_some()
        {
            return Err(Error::InvalidArgument(format!(
                "--which {which} takes no efficiency or width flags"
            )));
        }
        Ok(())
    };
    match args.which {
        WhichField::Wigner => {
            forbid_widths("wigner")?;
            Ok(None)
        }
        WhichField::Q => {
            forbid_widths("q")?;
            Ok(None)
        }
        WhichField::G => match (args.eta1, args.eta2, args.sigma1, args.sigma2) {
            (Some(e1), Some(e2), None, None) => {
                let d = detector_params(e1, e2, 1.0)?;
                Ok(Some(d.widths()?))
            }
            (None, None, Some(s1), Some(s2)) => Ok(Some(SmoothingWidths::new(s1, s2)?)),
            _ => Err(Error::InvalidArgument(
                "--which g needs --eta1 with --eta2, or --sigma1 with --sigma2".into(),
            )),
        },
        WhichField::Husimi => {
            if args.eta1.is_some() || args.eta2.is_some() {
                return Err(Error::InvalidArgument(
                    "--which husimi takes widths (--sigma1 [--sigma2]), not efficiencies".into(),
                ));
            }
            let s1 = args.sigma1.unwrap_or(0.5);
            if !(s1.is_finite() && s1 > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "husimi width must be positive, got {s1}"
                )));
            }
            let s2 = match args.sigma2 {
                Some(s2) => {
                    if (s1 * s2 - 0.25).abs() > 1e-12 {
                        return Err(Error::InvalidArgument(format!(
                            "husimi widths must satisfy σ₁σ₂ = 1/4, got {}",
                            s1 * s2
                        )));
                    }
                    s2
                }
                None => 0.25 / s1,
            };
            Ok(Some(SmoothingWidths::new(s1, s2)?))
        }
    }
}

fn cmd_dist(args: DistArgs) -> Result<()> {
    let rho = args.state.build()?;
    let widths = dist_widths(&args)?;
    let (s1, s2) = match (args.which, widths) {
        (WhichField::Wigner, _) => (0.0, 0.0),
        (WhichField::Q, _) => (0.5, 0.5),
        (_, Some(w)) => (w.sigma1(), w.sigma2()),
        _ => unreachable!("non-wigner/q variants always carry widths"),
    };
    let grid = args.grid.resolve(&rho, s1, s2)?;

    let field = match args.which {
        WhichField::Wigner => wigner_grid(&rho, grid)?,
        WhichField::Q => q_exact_grid(&rho, grid)?,
        WhichField::G | WhichField::Husimi => {
            let w = wigner_grid(&rho, grid)?;
            smooth(&w, widths.expect("g/husimi widths resolved above"))?
        }
    };

    let path = args.output.unwrap_or_else(|| {
        PathBuf::from(match args.format {
            OutputFormat::Csv => "field.csv",
            OutputFormat::Json => "field.json",
        })
    });
    let file = BufWriter::new(File::create(&path)?);
    match args.format {
        OutputFormat::Csv => write_csv(&field, file)?,
        OutputFormat::Json => write_json(&field, file)?,
    }
    emit(format_args!(
        "label={} normalization={:.16e} min={:.16e} physical={} path={}",
        field.label(),
        field.normalization(),
        field.min_value(),
        field.physical(),
        path.display()
    ))
}

#[derive(Serialize)]
struct MomentRow {
    target: (usize, usize),
    g_path_value: Complex64,
    oracle_value: Complex64,
    abs_error: f64,
}

/// Quadrature-path value of one ⟨a†ⁿaᵐ⟩ target from a smoothed field.
fn g_path_moment(
    field: &PhaseSpaceField,
    params: OrderingParams,
    dim: usize,
    n: usize,
    m: usize,
) -> Result<Complex64> {
    match (n, m) {
        // Degree zero: the distribution's own mass.
        (0, 0) => integrate_moment(field, 0, 0, params.r),
        // Photon number gets the closed-form route.
        (1, 1) => Ok(photon_number_from_g(field)?.value),
        _ => {
            let (annihilate, create) = ladder_matrices(dim);
            let op = matrix_power(&create, n) * matrix_power(&annihilate, m);
            let expansion = expand_in_ordered_basis(&op, params, dim, 4)?;
            Ok(expectation_from_g(field, &expansion)?.value)
        }
    }
}

fn cmd_moments(args: MomentsArgs) -> Result<()> {
    let targets = parse_targets(&args.targets)?;
    let detector: DetectorModel = detector_params(args.eta1, args.eta2, 1.0)?;
    let rho = args.state.build()?;
    let grid = args.grid.resolve(&rho, detector.sigma1, detector.sigma2)?;
    let w = wigner_grid(&rho, grid)?;
    let field = smooth(&w, detector.widths()?)?;
    let params = detector.ordering_params()?;

    let mut rows = Vec::with_capacity(targets.len());
    for (n, m) in targets {
        let g_path_value = g_path_moment(&field, params, rho.dim(), n, m)?;
        let oracle_value = oracle_moment(&rho, n, m)?;
        rows.push(MomentRow {
            target: (n, m),
            g_path_value,
            oracle_value,
            abs_error: (g_path_value - oracle_value).norm(),
        });
    }
    emit(format_args!(
        "{}",
        serde_json::to_string_pretty(&rows).map_err(|e| Error::Parse(e.to_string()))?
    ))
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let targets = parse_targets(&args.targets)?;
    let detector = detector_params(args.eta1, args.eta2, 1.0)?;
    let rho = args.state.build()?;
    let report = reconstruct(&rho, &detector, &targets, args.count, args.seed)?;
    if let Some(path) = &args.emit_samples {
        // Re-drawing with the same seed reproduces the exact set the report
        // used (sampling is deterministic).
        let set = sample_joint_counts(&rho, &detector, args.count, args.seed)?;
        write_samples_csv(&set, BufWriter::new(File::create(path)?))?;
    }
    emit(format_args!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?
    ))
}

fn cmd_ordering(args: OrderingArgs) -> Result<()> {
    let terms = ordering_terms(args.n, args.m, args.s)?;
    for (k, coefficient) in &terms {
        emit(format_args!("k={k} coefficient={coefficient:.16e}"))?;
    }
    if args.check {
        let params = OrderingParams::new(args.s, args.r)?;
        let ordered = ordered_monomial_matrix(args.n, args.m, params, args.dim)?;
        // Independent reconstruction: accumulate k!·C(n,k)·C(m,k) as the
        // running product Π_{i<k} (n−i)(m−i)/(i+1) instead of the factorial
        // formula, and assemble the b-power products directly.
        let b = squeezed_ladder(args.dim, args.r)?;
        let bdag = b.adjoint();
        let contraction = -(params.s + 1.0) / 2.0;
        let mut rebuilt = ordered.clone();
        rebuilt.fill(Complex64::new(0.0, 0.0));
        let mut comb = 1.0;
        for k in 0..=args.n.min(args.m) {
            if k > 0 {
                comb *= ((args.n - k + 1) * (args.m - k + 1)) as f64 / k as f64;
            }
            let coeff = comb * contraction.powi(k as i32);
            rebuilt += (matrix_power(&b, args.m - k) * matrix_power(&bdag, args.n - k))
                .scale(coeff);
        }
        // Compare away from the truncation edge: the top n+m rows/columns
        // feel the missing levels.
        let safe = args.dim - (args.n + args.m);
        let mut residual = 0.0f64;
        for i in 0..safe {
            for j in 0..safe {
                residual += (ordered[(i, j)] - rebuilt[(i, j)]).norm_sqr();
            }
        }
        let residual = residual.sqrt();
        emit(format_args!("residual={residual:.16e}"))?;
        if residual > 1e-9 {
            return Err(Error::NotInSpan { residual });
        }
    }
    Ok(())
}
