use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pixelproj::analysis::{
    adjointness_gap, convergence_study, estimate_operator_norm, Coupling, StudyOptions,
};
use pixelproj::io_formats::{
    export_pgm, read_sinogram, slope_comments, write_csv_records, write_image, write_sinogram, Array,
};
use pixelproj::phantoms::{rasterize_disc, rasterize_shepp_logan};
use pixelproj::solvers::{default_step_size, landweber, LandweberOptions};
use pixelproj::{
    AngleSet, DetectorGrid, FanGeometry, FanPair, Image, ImageGrid, JosephPair, ParallelPair, ProjectorPair,
};

/// Pixel-driven tomographic projectors and the experiments built on them.
///
/// All angles are in radians.
#[derive(Parser)]
#[command(name = "pixelproj", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parallel-beam forward projection of a phantom.
    Project(ProjectArgs),
    /// Parallel-beam backprojection of a stored sinogram.
    Backproject(BackprojectArgs),
    /// Fanbeam forward projection of a phantom.
    FanProject(FanProjectArgs),
    /// Fanbeam backprojection of a stored sinogram.
    FanBackproject(FanBackprojectArgs),
    /// Measure the relative adjointness gap of a projector pair.
    AdjointCheck(AdjointCheckArgs),
    /// Disc-phantom convergence study written as CSV.
    Convergence(ConvergenceArgs),
    /// Landweber iteration on self-generated Shepp-Logan data.
    Landweber(LandweberArgs),
    /// Power-iteration estimate of the operator norm.
    NormEstimate(NormEstimateArgs),
}

#[derive(Args)]
struct ImageArgs {
    /// Image size N or N,M.
    #[arg(long, value_parser = parse_size)]
    size: (usize, usize),
    /// Side length of the square the image fills.
    #[arg(long, default_value_t = 2.0)]
    image_width: f64,
}

#[derive(Args)]
struct AngleArgs {
    /// Number of equispaced angles.
    #[arg(long)]
    angles: Option<usize>,
    /// Limited-angle range a,b (inclusive); requires --angles.
    #[arg(long, value_parser = parse_pair, conflicts_with = "sparse")]
    angle_range: Option<(f64, f64)>,
    /// Explicit sparse angle list φ1,φ2,…
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sparse: Option<Vec<f64>>,
    /// Period of a full angle set.
    #[arg(long, value_enum)]
    full_period: Option<Period>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Period {
    Pi,
    #[value(name = "2pi")]
    TwoPi,
}

impl Period {
    fn value(self) -> f64 {
        match self {
            Period::Pi => PI,
            Period::TwoPi => 2.0 * PI,
        }
    }
}

#[derive(Args)]
struct FanArgs {
    /// Source radius R_E (> 1).
    #[arg(long, default_value_t = 3.0)]
    re: f64,
    /// Source-to-detector distance R (> R_E + 1).
    #[arg(long, default_value_t = 6.0)]
    rd: f64,
}

#[derive(Args)]
struct OutputArgs {
    /// Output path; metadata goes to <path>.json.
    #[arg(long)]
    out: PathBuf,
    /// Also write a 16-bit PGM preview.
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// shepp-logan or disc:<r>.
    #[arg(long, value_parser = parse_phantom)]
    phantom: Phantom,
    #[command(flatten)]
    image: ImageArgs,
    /// Detector cell count P.
    #[arg(long)]
    detectors: usize,
    /// Detector width.
    #[arg(long, default_value_t = 2.0)]
    detector_width: f64,
    #[command(flatten)]
    angles: AngleArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BackprojectArgs {
    /// Input sinogram.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    image: ImageArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FanProjectArgs {
    #[arg(long, value_parser = parse_phantom)]
    phantom: Phantom,
    #[command(flatten)]
    image: ImageArgs,
    #[arg(long)]
    detectors: usize,
    #[command(flatten)]
    angles: AngleArgs,
    #[command(flatten)]
    fan: FanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FanBackprojectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    image: ImageArgs,
    #[command(flatten)]
    fan: FanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Geometry {
    Parallel,
    Fan,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long, value_enum, default_value = "parallel")]
    geometry: Geometry,
    #[command(flatten)]
    image: ImageArgs,
    #[arg(long)]
    detectors: usize,
    #[command(flatten)]
    angles: AngleArgs,
    #[command(flatten)]
    fan: FanArgs,
}

#[derive(Args)]
struct AdjointCheckArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct NormEstimateArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CouplingArg {
    Linear,
    Quadratic,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long, value_enum)]
    coupling: CouplingArg,
    /// Ascending detector counts.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    p_list: Vec<usize>,
    /// Disc radius.
    #[arg(long, default_value_t = 0.6)]
    r: f64,
    #[arg(long, value_enum, default_value = "pi")]
    period: Period,
    /// Largest N·M·Q allowed for one configuration.
    #[arg(long, default_value_t = 1e10)]
    budget: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairKind {
    Pd,
    Jo,
}

#[derive(Args)]
struct LandweberArgs {
    #[arg(long, value_enum, default_value = "pd")]
    pair: PairKind,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 300)]
    size: usize,
    #[arg(long, default_value_t = 300)]
    detectors: usize,
    #[arg(long, default_value_t = 100)]
    angles: usize,
    /// Step size (default 0.9/σ² from 50 power iterations of the adjoint pair).
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV with one residual norm per iteration.
    #[arg(long)]
    out_residuals: PathBuf,
    #[arg(long)]
    out_image: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
enum Phantom {
    SheppLogan,
    Disc(f64),
}

fn parse_phantom(s: &str) -> Result<Phantom, String> {
    if s == "shepp-logan" {
        return Ok(Phantom::SheppLogan);
    }
    if let Some(r) = s.strip_prefix("disc:") {
        return r
            .parse()
            .map(Phantom::Disc)
            .map_err(|e| format!("bad disc radius `{r}`: {e}"));
    }
    Err(format!("unknown phantom `{s}`, expected shepp-logan or disc:<r>"))
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let parse = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("bad size `{p}`: {e}"));
    match parts.as_slice() {
        [n] => {
            let n = parse(n)?;
            Ok((n, n))
        }
        [n, m] => Ok((parse(n)?, parse(m)?)),
        _ => Err(format!("expected N or N,M, got `{s}`")),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, got `{s}`"))?;
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad angle `{p}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

impl ImageArgs {
    fn grid(&self) -> Result<ImageGrid> {
        Ok(ImageGrid::fitted(self.size.0, self.size.1, self.image_width)?)
    }
}

impl AngleArgs {
    fn build(&self, default_period: Period) -> Result<AngleSet> {
        if let Some(list) = &self.sparse {
            ensure!(
                self.angles.is_none_or(|q| q == list.len()),
                "--angles disagrees with the length of --sparse"
            );
            return Ok(AngleSet::sparse(list.clone())?);
        }
        let q = self.angles.context("--angles is required unless --sparse is given")?;
        if let Some((a, b)) = self.angle_range {
            ensure!(self.full_period.is_none(), "--full-period cannot be combined with --angle-range");
            return Ok(AngleSet::limited_uniform(q, a, b)?);
        }
        let period = self.full_period.unwrap_or(default_period).value();
        Ok(AngleSet::full_uniform(q, 0.0, period)?)
    }
}

impl FanArgs {
    fn geometry(&self, detectors: usize) -> Result<FanGeometry> {
        Ok(FanGeometry::new(self.re, self.rd, detectors)?)
    }
}

impl PairArgs {
    fn build(&self) -> Result<Box<dyn ProjectorPair>> {
        let grid = self.image.grid()?;
        Ok(match self.geometry {
            Geometry::Parallel => Box::new(ParallelPair::new(
                grid,
                DetectorGrid::unit(self.detectors)?,
                self.angles.build(Period::Pi)?,
            )),
            Geometry::Fan => Box::new(FanPair::new(
                grid,
                self.fan.geometry(self.detectors)?,
                self.angles.build(Period::TwoPi)?,
            )),
        })
    }
}

fn render(phantom: Phantom, grid: &ImageGrid) -> Result<Image> {
    Ok(match phantom {
        Phantom::SheppLogan => rasterize_shepp_logan(grid),
        Phantom::Disc(r) => rasterize_disc(grid, r)?,
    })
}

fn save(output: &OutputArgs, array: Array) -> Result<()> {
    match &array {
        Array::Image(image) => write_image(&output.out, image),
        Array::Sinogram(sino) => write_sinogram(&output.out, sino),
    }
    .with_context(|| format!("writing {}", output.out.display()))?;
    if let Some(pgm) = &output.pgm {
        export_pgm(pgm, &array).with_context(|| format!("writing {}", pgm.display()))?;
    }
    Ok(())
}

fn project(args: &ProjectArgs) -> Result<()> {
    let grid = args.image.grid()?;
    let pair = ParallelPair::new(
        grid,
        DetectorGrid::new(args.detectors, args.detector_width)?,
        args.angles.build(Period::Pi)?,
    );
    let sino = pair.forward(&render(args.phantom, &grid)?)?;
    save(&args.output, Array::Sinogram(sino))
}

fn backproject(args: &BackprojectArgs) -> Result<()> {
    let sino = read_sinogram(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    ensure!(sino.fan().is_none(), "{} is a fanbeam sinogram; use fan-backproject", args.input.display());
    let pair = ParallelPair::new(args.image.grid()?, *sino.detector(), sino.angles().clone());
    save(&args.output, Array::Image(pair.backward(&sino)?))
}

fn fan_project(args: &FanProjectArgs) -> Result<()> {
    let grid = args.image.grid()?;
    let pair = FanPair::new(grid, args.fan.geometry(args.detectors)?, args.angles.build(Period::TwoPi)?);
    let sino = pair.forward(&render(args.phantom, &grid)?)?;
    save(&args.output, Array::Sinogram(sino))
}

fn fan_backproject(args: &FanBackprojectArgs) -> Result<()> {
    let sino = read_sinogram(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    ensure!(sino.fan().is_some(), "{} is a parallel-beam sinogram; use backproject", args.input.display());
    let geometry = args.fan.geometry(sino.detector().count())?;
    let pair = FanPair::new(args.image.grid()?, geometry, sino.angles().clone());
    save(&args.output, Array::Image(pair.backward(&sino)?))
}

fn adjoint_check(args: &AdjointCheckArgs) -> Result<bool> {
    let pair = args.pair.build()?;
    let gap = adjointness_gap(pair.as_ref(), args.trials, args.seed)?;
    println!("{gap:e}");
    Ok(gap <= 1e-10)
}

fn norm_estimate(args: &NormEstimateArgs) -> Result<()> {
    let pair = args.pair.build()?;
    println!("{}", estimate_operator_norm(pair.as_ref(), args.iters, args.seed)?);
    Ok(())
}

fn convergence(args: &ConvergenceArgs) -> Result<()> {
    let coupling = match args.coupling {
        CouplingArg::Linear => Coupling::Linear,
        CouplingArg::Quadratic => Coupling::Quadratic,
    };
    let options = StudyOptions {
        radius: args.r,
        period: args.period.value(),
        budget: args.budget,
    };
    let study = convergence_study(&args.p_list, coupling, &options)?;
    write_csv_records(&args.out, &study.records, &slope_comments(&study))
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(slope) = study.fitted_slope {
        println!("fitted slope {slope:.4}");
    }
    Ok(())
}

fn run_landweber(args: &LandweberArgs) -> Result<()> {
    let grid = ImageGrid::square(args.size, 2.0)?;
    let detector = DetectorGrid::unit(args.detectors)?;
    let angles = AngleSet::half_turn(args.angles)?;
    let adjoint = ParallelPair::new(grid, detector, angles.clone());
    let omega = match args.omega {
        Some(omega) => omega,
        None => default_step_size(&adjoint, args.seed)?,
    };
    let pair: Box<dyn ProjectorPair> = match args.pair {
        PairKind::Pd => Box::new(adjoint),
        PairKind::Jo => Box::new(JosephPair::new(grid, detector, angles)),
    };
    // Data comes from the same forward operator the iteration uses.
    let data = pair.forward(&rasterize_shepp_logan(&grid))?;
    let (image, trace) = landweber(pair.as_ref(), &data, &LandweberOptions::new(omega, args.iters), None)?;

    let mut out = BufWriter::new(
        File::create(&args.out_residuals).with_context(|| format!("creating {}", args.out_residuals.display()))?,
    );
    writeln!(out, "k,residual")?;
    for (k, r) in trace.residual_norms.iter().enumerate() {
        writeln!(out, "{k},{r:e}")?;
    }
    writeln!(out, "# omega={omega:e}")?;
    out.flush()?;
    if let Some(path) = &args.out_image {
        write_image(path, &image).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        ensure!(t > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Project(args) => project(args)?,
        Command::Backproject(args) => backproject(args)?,
        Command::FanProject(args) => fan_project(args)?,
        Command::FanBackproject(args) => fan_backproject(args)?,
        Command::AdjointCheck(args) => return adjoint_check(args),
        Command::Convergence(args) => convergence(args)?,
        Command::Landweber(args) => run_landweber(args)?,
        Command::NormEstimate(args) => norm_estimate(args)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
