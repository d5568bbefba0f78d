//! `conebeam` command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error,
//! 3 numeric/geometry error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backprojector::backproject;
use crate::dataset::gtf::{
    read_gtf, read_projections, read_volume, write_projections, write_volume,
};
use crate::dataset::{
    build_dataset, export_learned, sample_seed, DatasetConfig, DEFAULT_SPLIT_RATIO,
};
use crate::error::Error;
use crate::geometry::{
    make_view_angles, ConeBeamGeometry, ViewAngleSet, ViewMode, GENERATED_VIEWS,
};
use crate::metrics::evaluate;
use crate::phantom::{ellipsoid_phantom, random_anatomy_phantom, EllipsoidSpec};
use crate::projector::forward_project;
use crate::recon::{
    normalized_gpi, sart_reconstruct, sart_reconstruct_from, view_sweep, view_sweep_dataset,
    ReconMethod, SartParams, SweepConfig, DEFAULT_SWEEP_COUNTS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "conebeam",
    version,
    about = "Cone-beam CT projection, back-projection and sparse-view reconstruction"
)]
pub struct Cli {
    /// Worker threads for the projection kernels (outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Geometry JSON document; overrides --preset.
    #[arg(long, global = true, value_name = "PATH")]
    pub geometry: Option<PathBuf>,

    /// Built-in geometry when no --geometry is given.
    #[arg(long, global = true, value_enum, default_value_t = Preset::Full)]
    pub preset: Preset,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 128³ volume at 2 mm, 192² detector at 2 mm.
    Full,
    /// 64³ volume at 4 mm, 96² detector at 4 mm.
    Desk,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a procedural phantom volume.
    Phantom(PhantomArgs),
    /// Forward-project a volume into DRRs.
    Project(ProjectArgs),
    /// Back-project projections into a geometry-preserving image.
    Backproject(BackprojectArgs),
    /// Build a synthetic dataset of phantoms and DRRs.
    Dataset(DatasetArgs),
    /// SART reconstruction from projections.
    Recon(ReconArgs),
    /// Reconstruction quality against the number of input views.
    Sweep(SweepArgs),
    /// Compare a prediction volume against a ground truth.
    Eval(EvalArgs),
    /// Write paired GPI / projection tensors for learned refinement.
    ExportLearned(ExportArgs),
    /// Print the active geometry as JSON.
    Geometry,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON list of ellipsoids instead of a random anatomy phantom.
    #[arg(long, value_name = "PATH")]
    pub specs: Option<PathBuf>,
    #[arg(long, short, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AngleArgs {
    /// Number of views (AP / AP+lateral / evenly spaced).
    #[arg(long, conflicts_with = "angles")]
    pub views: Option<usize>,
    /// Explicit comma-separated angles in degrees.
    #[arg(long, value_delimiter = ',', value_name = "DEG")]
    pub angles: Option<Vec<f64>>,
    /// Use the evenly spaced generated-view convention for --views.
    #[arg(long)]
    pub generated: bool,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long, value_name = "PATH")]
    pub volume: PathBuf,
    #[command(flatten)]
    pub angles: AngleArgs,
    #[arg(long, short, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BackprojectArgs {
    #[arg(long, value_name = "PATH")]
    pub projections: PathBuf,
    #[arg(long, short, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub input_views: usize,
    #[arg(long, default_value_t = GENERATED_VIEWS)]
    pub gen_views: usize,
    #[arg(long, default_value_t = DEFAULT_SPLIT_RATIO)]
    pub split: f64,
    /// Gaussian noise sigma added to the DRRs (intensity·mm).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Zero,
    Gpi,
}

#[derive(Debug, Args)]
pub struct SartArgs {
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1.0)]
    pub relaxation: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tv_weight: f64,
    #[arg(long, default_value_t = 10)]
    pub tv_steps: usize,
    /// Clamp the estimate at zero after every sweep.
    #[arg(long)]
    pub nonneg: bool,
}

impl SartArgs {
    fn params(&self) -> SartParams {
        SartParams {
            iterations: self.iterations,
            relaxation: self.relaxation,
            tv_weight: self.tv_weight,
            tv_steps: self.tv_steps,
            nonnegative: self.nonneg,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReconArgs {
    #[arg(long, value_name = "PATH")]
    pub projections: PathBuf,
    #[arg(long, value_enum, default_value_t = Init::Zero)]
    pub init: Init,
    #[command(flatten)]
    pub sart: SartArgs,
    #[arg(long, short, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated input view counts.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_COUNTS.to_vec())]
    pub views: Vec<usize>,
    /// gpi-only, gpi-sart or sart.
    #[arg(long, default_value = "gpi-sart")]
    pub method: String,
    /// Dataset manifest; its test split is swept. Without it, --samples
    /// phantoms are generated from --seed.
    #[arg(long, value_name = "PATH")]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    #[command(flatten)]
    pub sart: SartArgs,
    #[arg(long, short, value_name = "PATH")]
    pub out: PathBuf,
    /// Also write a gnuplot script plotting the CSV.
    #[arg(long, value_name = "PATH")]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted volume (GTF).
    pub pred: PathBuf,
    /// Ground-truth volume (GTF); sets the dynamic range.
    pub truth: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_name = "PATH")]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub input_views: usize,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

fn require_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(CliError::Usage(format!(
            "output directory {} does not exist",
            p.display()
        ))),
        _ => Ok(()),
    }
}

fn load_geometry(cli: &Cli) -> CliResult<ConeBeamGeometry> {
    match &cli.geometry {
        Some(path) => {
            require_file(path, "geometry file")?;
            let text = fs::read_to_string(path)
                .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            let g = serde_json::from_str(&text).map_err(|e| {
                // surface validation failures as geometry errors
                let msg = e.to_string();
                if msg.contains("invalid geometry") {
                    Error::Geometry(format!("{}: {msg}", path.display()))
                } else {
                    Error::json(format!("parsing {}", path.display()), e)
                }
            })?;
            Ok(g)
        }
        None => Ok(match cli.preset {
            Preset::Full => ConeBeamGeometry::default(),
            Preset::Desk => ConeBeamGeometry::desk(),
        }),
    }
}

fn angle_set(args: &AngleArgs) -> CliResult<ViewAngleSet> {
    match (&args.angles, args.views) {
        (Some(deg), _) => Ok(ViewAngleSet::from_degrees(deg)?),
        (None, Some(n)) => {
            let mode = if args.generated {
                ViewMode::Generated
            } else {
                ViewMode::Input
            };
            Ok(make_view_angles(n, mode)?)
        }
        (None, None) => Err(CliError::Usage(
            "one of --views or --angles is required".into(),
        )),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e).into())
}

fn run(cli: &Cli) -> CliResult<()> {
    let geom = load_geometry(cli)?;
    match &cli.command {
        Command::Geometry => {
            println!("{}", geom.to_json());
        }
        Command::Phantom(a) => {
            require_parent(&a.out)?;
            let vol = match &a.specs {
                Some(path) => {
                    require_file(path, "phantom spec file")?;
                    let text = fs::read_to_string(path)
                        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
                    let specs: Vec<EllipsoidSpec> = serde_json::from_str(&text)
                        .map_err(|e| Error::json(format!("parsing {}", path.display()), e))?;
                    ellipsoid_phantom(&specs, geom.volume)?
                }
                None => random_anatomy_phantom(a.seed, geom.volume)?,
            };
            write_volume(&a.out, &vol, None)?;
        }
        Command::Project(a) => {
            require_file(&a.volume, "volume")?;
            require_parent(&a.out)?;
            let angles = angle_set(&a.angles)?;
            let (vol, _) = read_volume(&a.volume, Some(geom.volume.spacing))?;
            if vol.grid.dims != geom.volume.dims {
                return Err(Error::Shape(format!(
                    "volume {} has shape (x,y,z) {:?} but the geometry expects {:?}",
                    a.volume.display(),
                    vol.grid.dims,
                    geom.volume.dims
                ))
                .into());
            }
            let p = forward_project(&vol, &geom, &angles)?;
            write_projections(&a.out, &p, None)?;
        }
        Command::Backproject(a) => {
            require_file(&a.projections, "projection file")?;
            require_parent(&a.out)?;
            let (p, _) = read_projections(&a.projections)?;
            let gpi = backproject(&p, &geom)?;
            write_volume(&a.out, &gpi, None)?;
        }
        Command::Dataset(a) => {
            let config = DatasetConfig {
                n_samples: a.samples,
                seed: a.seed,
                n_input_views: a.input_views,
                m_gen_views: a.gen_views,
                split_ratio: a.split,
                noise_sigma: a.noise,
            };
            require_parent(&a.out)?;
            let m = build_dataset(&config, &geom, &a.out)?;
            eprintln!(
                "wrote {} samples ({} train / {} test) to {}",
                m.samples.len(),
                m.n_train,
                m.n_test,
                a.out.display()
            );
        }
        Command::Recon(a) => {
            require_file(&a.projections, "projection file")?;
            require_parent(&a.out)?;
            let (p, _) = read_projections(&a.projections)?;
            let params = a.sart.params();
            let x = match a.init {
                Init::Zero => sart_reconstruct(&p, &geom, &params)?,
                Init::Gpi => sart_reconstruct_from(
                    normalized_gpi(&p, &geom)?,
                    &p,
                    &geom,
                    &params,
                    |_, _| {},
                )?,
            };
            write_volume(&a.out, &x, None)?;
        }
        Command::Sweep(a) => {
            require_parent(&a.out)?;
            if let Some(g) = &a.gnuplot {
                require_parent(g)?;
            }
            if a.views.is_empty() || a.views.contains(&0) {
                return Err(CliError::Usage("--views needs positive counts".into()));
            }
            let method: ReconMethod = a
                .method
                .parse()
                .map_err(|e: Error| CliError::Usage(e.to_string()))?;
            let config = SweepConfig {
                method,
                sart: a.sart.params(),
            };
            let report = match &a.dataset {
                Some(path) => {
                    require_file(path, "dataset manifest")?;
                    view_sweep_dataset(path, &a.views, &config)?
                }
                None => {
                    if a.samples == 0 {
                        return Err(CliError::Usage("--samples must be >= 1".into()));
                    }
                    let mut truths = Vec::with_capacity(a.samples);
                    let mut ids = Vec::with_capacity(a.samples);
                    for i in 0..a.samples {
                        let s = sample_seed(a.seed, i);
                        truths.push(random_anatomy_phantom(s, geom.volume)?);
                        ids.push(format!("seed_{s}"));
                    }
                    view_sweep(&truths, &ids, &geom, &a.views, &config)?
                }
            };
            write_text(&a.out, &report.to_csv())?;
            let mut sidecar = a.out.as_os_str().to_owned();
            sidecar.push(".json");
            let meta = serde_json::json!({
                "seed": a.seed,
                "dataset": a.dataset,
                "geometry": geom,
                "report": report,
            });
            write_text(
                Path::new(&sidecar),
                &(serde_json::to_string_pretty(&meta).unwrap() + "\n"),
            )?;
            if let Some(g) = &a.gnuplot {
                let name = a
                    .out
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                write_text(g, &report.gnuplot_script(&name))?;
            }
            eprint!("{}", report.to_table());
        }
        Command::Eval(a) => {
            require_file(&a.pred, "prediction")?;
            require_file(&a.truth, "ground truth")?;
            if let Some(o) = &a.out {
                require_parent(o)?;
            }
            let pred = read_gtf(&a.pred)?;
            let truth = read_gtf(&a.truth)?;
            if pred.dims != truth.dims {
                return Err(Error::Shape(format!(
                    "prediction {} has dims {:?}, truth {} has dims {:?}",
                    a.pred.display(),
                    pred.dims,
                    a.truth.display(),
                    truth.dims
                ))
                .into());
            }
            if truth.dims.len() != 3 {
                return Err(Error::Shape(format!(
                    "eval expects rank-3 (z, y, x) volumes, got dims {:?}",
                    truth.dims
                ))
                .into());
            }
            let dims = [truth.dims[2], truth.dims[1], truth.dims[0]];
            let report = evaluate(&pred.data, &truth.data, dims)?;
            let text = serde_json::to_string_pretty(&report).unwrap() + "\n";
            match &a.out {
                Some(o) => write_text(o, &text)?,
                None => print!("{text}"),
            }
        }
        Command::ExportLearned(a) => {
            require_file(&a.dataset, "dataset manifest")?;
            require_parent(&a.out)?;
            let m = export_learned(&a.dataset, a.input_views, &a.out)?;
            eprintln!(
                "exported {} samples to {}",
                m.samples.len(),
                a.out.display()
            );
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_DATA
            }
        }
    }
}
