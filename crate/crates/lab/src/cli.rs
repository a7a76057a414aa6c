//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a computation fails, 2 on usage errors.
//! Output files are staged under temporary names and renamed only once every
//! file of a command has been written; on failure the staged files are
//! removed and a `.failed` marker is left in the output directory.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use relacc_core::laws::{sigmoid_law, two_steps_law, LawError};
use relacc_core::meshgen::{generate_mesh, MeshParams};
use relacc_core::{solve_poisson, CgOptions, FemOptions, NormKind, ProblemCase};

use crate::experiment::{
    convergence_study, linear_grid, run_campaign, runge_h_grid, smooth_h_grid, CampaignConfig,
    ExperimentError, FemSolver,
};
use crate::formats::{
    fmt17, write_frequency_csv, write_laws_csv, write_mesh_dump, write_samples_csv,
    write_solution_dump,
};
use crate::svg::{comparison_svg, LawChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const FAILED_MARKER: &str = ".failed";

#[derive(Debug, Parser)]
#[command(
    name = "relacc",
    version,
    about = "Relative accuracy of P_k and P_m Lagrange elements on random meshes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo campaign: frequency of P_m beating P_k against both laws.
    Campaign(CampaignArgs),
    /// H1 errors on structured meshes and the fitted convergence rate.
    Convergence(ConvergenceArgs),
    /// Tabulate the two-steps and sigmoid laws for a given h*.
    Laws(LawsArgs),
    /// Write one generated mesh, and optionally a P_k solution on it.
    MeshDump(MeshDumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseName {
    Runge,
    Smooth,
    Patch,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    #[arg(long, value_enum)]
    pub case: CaseName,
    /// Peak sharpness of the Runge solution.
    #[arg(long, required_if_eq("case", "runge"))]
    pub alpha: Option<f64>,
    /// Degree of the harmonic polynomial for the patch case.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub patch_degree: u64,
}

impl CaseArgs {
    fn build(&self) -> Result<ProblemCase, CliError> {
        let case = match self.case {
            CaseName::Runge => ProblemCase::runge(self.alpha.unwrap_or(f64::NAN)),
            CaseName::Smooth => Ok(ProblemCase::smooth()),
            CaseName::Patch => ProblemCase::polynomial_patch(self.patch_degree as usize),
        };
        case.map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Quadrature degree used for assembly.
    #[arg(long)]
    pub quad_degree: Option<usize>,
    /// Relative residual target of the CG solver.
    #[arg(long, default_value_t = CgOptions::default().tol)]
    pub tol: f64,
    /// Measure the H1 seminorm instead of the full H1 norm.
    #[arg(long)]
    pub seminorm: bool,
}

impl SolverArgs {
    fn fem_options(&self) -> Result<FemOptions, CliError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(FemOptions {
            quad_degree: self.quad_degree,
            cg: CgOptions {
                tol: self.tol,
                ..CgOptions::default()
            },
        })
    }

    fn norm(&self) -> NormKind {
        if self.seminorm {
            NormKind::Seminorm
        } else {
            NormKind::Full
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, requires_all = ["h_max", "h_steps"], conflicts_with = "h_list")]
    pub h_min: Option<f64>,
    #[arg(long, requires_all = ["h_min", "h_steps"])]
    pub h_max: Option<f64>,
    #[arg(long, requires_all = ["h_min", "h_max"])]
    pub h_steps: Option<usize>,
    /// Comma-separated mesh sizes.
    #[arg(long, value_delimiter = ',')]
    pub h_list: Option<Vec<f64>>,
}

impl GridArgs {
    fn grid(&self) -> Option<Vec<f64>> {
        if let Some(list) = &self.h_list {
            return Some(list.clone());
        }
        match (self.h_min, self.h_max, self.h_steps) {
            (Some(lo), Some(hi), Some(n)) => Some(linear_grid(lo, hi, n)),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub k: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub m: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Meshes per mesh size and element.
    #[arg(long, default_value_t = CampaignConfig::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Vertex perturbation as a fraction of the grid spacing.
    #[arg(long, default_value_t = CampaignConfig::DEFAULT_JITTER)]
    pub jitter: f64,
    /// Smallest admissible triangle angle in degrees.
    #[arg(long, default_value_t = MeshParams::DEFAULT_MIN_ANGLE_DEG)]
    pub min_angle: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Law(s) drawn in the comparison plot.
    #[arg(long, value_enum, default_value_t = LawChoice::Both)]
    pub law: LawChoice,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write every error sample to samples.csv.
    #[arg(long)]
    pub emit_samples: bool,
    /// Also write comparison.svg.
    #[arg(long)]
    pub emit_svg: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub k: u64,
    /// Comma-separated, strictly decreasing mesh sizes.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    pub h_list: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LawsArgs {
    #[arg(long)]
    pub h_star: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub h_list: Vec<f64>,
    /// Directory for laws.csv; the table goes to standard output otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeshDumpArgs {
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = CampaignConfig::DEFAULT_JITTER)]
    pub jitter: f64,
    #[arg(long, default_value_t = MeshParams::DEFAULT_MIN_ANGLE_DEG)]
    pub min_angle: f64,
    /// Solve with P_k on the mesh and write solution.txt as well.
    #[arg(long, requires = "case", value_parser = clap::value_parser!(u64).range(1..=4))]
    pub k: Option<u64>,
    #[arg(long, value_enum)]
    pub case: Option<CaseName>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub patch_degree: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<crate::formats::FormatError> for CliError {
    fn from(e: crate::formats::FormatError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Campaign(a) => cmd_campaign(a, stdout),
        Command::Convergence(a) => cmd_convergence(a, stdout),
        Command::Laws(a) => cmd_laws(a, stdout),
        Command::MeshDump(a) => cmd_mesh_dump(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

/// Files of one command, written under `.<name>.tmp` and renamed together.
struct Staging {
    dir: PathBuf,
    staged: Vec<(PathBuf, PathBuf)>,
}

impl Staging {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        })
    }

    fn write<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut io::BufWriter<fs::File>) -> Result<(), CliError>,
    {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        self.staged.push((tmp.clone(), self.dir.join(name)));
        let mut file = io::BufWriter::new(fs::File::create(&tmp)?);
        fill(&mut file)?;
        file.flush()?;
        Ok(())
    }

    fn commit(self) -> Result<(), CliError> {
        for (tmp, dest) in &self.staged {
            fs::rename(tmp, dest)?;
        }
        let marker = self.dir.join(FAILED_MARKER);
        if marker.exists() {
            fs::remove_file(marker)?;
        }
        Ok(())
    }

    fn abort(self, error: &CliError) {
        for (tmp, _) in &self.staged {
            let _ = fs::remove_file(tmp);
        }
        let _ = fs::write(self.dir.join(FAILED_MARKER), format!("{}\n", error.message()));
    }
}

/// Runs `body` against a fresh staging area and commits or aborts it.
fn staged<F>(dir: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut Staging) -> Result<(), CliError>,
{
    let mut staging = Staging::new(dir)?;
    match body(&mut staging) {
        Ok(()) => staging.commit(),
        Err(e) => {
            staging.abort(&e);
            Err(e)
        }
    }
}

fn cmd_campaign(a: &CampaignArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let case = a.case.build()?;
    let grid = a.grid.grid().unwrap_or_else(|| match a.case.case {
        CaseName::Smooth => smooth_h_grid(),
        CaseName::Runge | CaseName::Patch => runge_h_grid(),
    });
    let mut config = CampaignConfig::new(case, a.k as usize, a.m as usize, grid)
        .with_trials(a.trials)
        .with_seed(a.seed);
    config.jitter = a.jitter;
    config.min_angle_deg = a.min_angle;
    config.fem = a.solver.fem_options()?;
    config.norm = a.solver.norm();
    config.threads = a.threads;
    config.validate()?;

    staged(&a.out, |staging| {
        let result = run_campaign(&config, &FemSolver)?;
        let table = &result.table;
        staging.write("frequencies.csv", |f| Ok(write_frequency_csv(f, &table.rows)?))?;
        if a.emit_samples {
            staging.write("samples.csv", |f| Ok(write_samples_csv(f, &result.samples)?))?;
        }
        if a.emit_svg {
            let title = format!(
                "{} case: P{} vs P{}, N = {}",
                config.case.name(),
                config.k,
                config.m,
                config.trials
            );
            let svg = comparison_svg(table, a.law, &title);
            staging.write("comparison.svg", |f| Ok(f.write_all(svg.as_bytes())?))?;
        }
        match table.h_star {
            Some(hs) => writeln!(stdout, "h_star_estimate={}", fmt17(hs))?,
            None => writeln!(stdout, "h_star_estimate=n/a")?,
        }
        writeln!(stdout, "coefficient_k{}={}", table.k, fmt17(table.coef_k.value))?;
        writeln!(stdout, "coefficient_m{}={}", table.m, fmt17(table.coef_m.value))?;
        writeln!(stdout, "failed_trials={}", result.failures.len())?;
        Ok(())
    })
}

fn cmd_convergence(a: &ConvergenceArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let case = a.case.build()?;
    let fem = a.solver.fem_options()?;
    if a.solver.seminorm {
        return Err(CliError::Usage(
            "--seminorm is only supported by the campaign command".into(),
        ));
    }
    let h_list = &a.h_list;
    if h_list.len() < 3
        || h_list.iter().any(|&h| !(h.is_finite() && h > 0.0))
        || h_list.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(CliError::Usage(
            "--h-list needs at least three positive, strictly decreasing mesh sizes".into(),
        ));
    }
    staged(&a.out, |staging| {
        let study = convergence_study(&case, a.k as usize, h_list, a.seed, &fem)?;
        let slope = study.slope.map_or_else(|| "n/a".to_string(), fmt17);
        staging.write("convergence.csv", |f| {
            let mut w = csv::Writer::from_writer(f);
            w.write_record(["h", "h_actual", "error", "slope"])
                .map_err(crate::formats::FormatError::from)?;
            for &(h, h_actual, error) in &study.points {
                w.write_record([fmt17(h), fmt17(h_actual), fmt17(error), slope.clone()])
                    .map_err(crate::formats::FormatError::from)?;
            }
            w.flush()?;
            Ok(())
        })?;
        writeln!(stdout, "slope={slope}")?;
        Ok(())
    })
}

fn cmd_laws(a: &LawsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let usage = |e: LawError| CliError::Usage(e.to_string());
    let rows = a
        .h_list
        .iter()
        .map(|&h| {
            Ok((
                h,
                two_steps_law(h, a.h_star).map_err(usage)?,
                sigmoid_law(h, a.h_star, a.k, a.m).map_err(usage)?,
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    match &a.out {
        Some(dir) => staged(dir, |staging| {
            staging.write("laws.csv", |f| Ok(write_laws_csv(f, &rows)?))
        }),
        None => Ok(write_laws_csv(stdout, &rows)?),
    }
}

fn cmd_mesh_dump(a: &MeshDumpArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let params = MeshParams::new(a.h, a.seed)
        .with_jitter(a.jitter)
        .with_min_angle(a.min_angle);
    params
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let case = match a.case {
        Some(name) => Some(
            CaseArgs {
                case: name,
                alpha: a.alpha,
                patch_degree: a.patch_degree,
            }
            .build()?,
        ),
        None => None,
    };
    staged(&a.out, |staging| {
        let mesh = generate_mesh(&params).map_err(|e| CliError::Runtime(e.to_string()))?;
        staging.write("mesh.txt", |f| Ok(write_mesh_dump(f, &mesh)?))?;
        if let (Some(k), Some(case)) = (a.k, &case) {
            let solution = solve_poisson(&mesh, k as usize, case, &FemOptions::default())
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            staging.write("solution.txt", |f| {
                Ok(write_solution_dump(f, solution.coefficients())?)
            })?;
        }
        writeln!(
            stdout,
            "vertices={} triangles={} h_actual={}",
            mesh.num_vertices(),
            mesh.num_triangles(),
            fmt17(mesh.h_actual())
        )?;
        Ok(())
    })
}
