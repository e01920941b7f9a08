//! Command-line front end: point evaluations, sweeps, verification batteries
//! and the one-dimensional reduction solver.

pub mod format;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use magkin::kinetic2d::{omega2d_bathtub_oracle, omega2d_closed};
use magkin::kinetic3d::{
    fermi_level, omega3d, omega3d_oracle, ClosedFormVariant, Omega3dMethod, CANONICAL_VARIANT, DEFAULT_FERMI_TOL,
};
use magkin::landau::sample_hermite_gauss;
use magkin::reduce1d::{self, Algorithm, BoundaryCondition, MinimizeOptions};
use magkin::verify::{self, Suite};
use magkin::wigner::{default_window_grid, wigner2d, WignerGrid};
use magkin::{GridSpec, MagneticField};
use serde_json::json;
use thiserror::Error;

use format::{round, sig};

pub const TOOL: &str = "magkin";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "magkin", version, about = "Kinetic energy densities of electron gases in a magnetic field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kinetic energy per unit area of the 2d gas.
    Omega2d {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        /// Also evaluate the bathtub sum and print the difference.
        #[arg(long)]
        oracle: bool,
    },
    /// Kinetic energy per unit volume of the 3d gas.
    Omega3d {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Canonical)]
        method: MethodArg,
    },
    /// Fermi level δ of the 3d gas.
    Fermi {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_FERMI_TOL)]
        tol: f64,
    },
    /// Sweep b or ρ and tabulate ω²ᵈ, ω³ᵈ, δ and the occupied levels as CSV.
    Scan {
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
        scale: ScaleArg,
        /// Fixed field when sweeping ρ.
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
        /// Fixed density when sweeping b.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded property batteries.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
    },
    /// Minimize the reduced 1d energy for a sampled density.
    Reduce1d {
        /// Two-column CSV `x,rho` with a header line and uniform x.
        #[arg(long)]
        density: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        b3: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b2: f64,
        #[arg(long, value_enum, default_value_t = BcArg::Dirichlet)]
        bc: BcArg,
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Dual)]
        algorithm: AlgorithmArg,
        #[arg(long)]
        max_iter: Option<usize>,
        /// JSON result file.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV `x,rho` of the density of the minimizer.
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Sample W_b(φ_m, φ_n) of two Hermite–Gauss functions as CSV `x1,x2,re,im`.
    Wigner {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        window: usize,
        #[arg(long, default_value_t = 0)]
        payload: usize,
        #[arg(long, default_value_t = 128)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Oracle,
    Prop,
    Proof,
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    B,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Wigner,
    Kinetic,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcArg {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Dual,
    Subgradient,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] magkin::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid input: {0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(magkin::Error::NoConvergence(_)) => 3,
            CliError::Core(magkin::Error::CrossCheck(_)) | CliError::Io(_) => 1,
            CliError::Core(_) | CliError::Input(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    VerifyFailed,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::VerifyFailed => 1,
            Outcome::NotConverged => 3,
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<Outcome> {
    match &cli.command {
        Command::Omega2d { b, rho, oracle } => cmd_omega2d(*b, *rho, *oracle, out),
        Command::Omega3d { b, rho, method } => cmd_omega3d(*b, *rho, *method, out),
        Command::Fermi { b, rho, tol } => cmd_fermi(*b, *rho, *tol, out),
        Command::Scan { param, from, to, steps, scale, b, rho, out: path } => {
            let spec = SweepSpec::new(*param, *from, *to, *steps, *scale, *b, *rho)?;
            let table = scan_csv(&spec)?;
            match path {
                Some(p) => write_file(p, table.as_bytes())?,
                None => out.write_all(table.as_bytes())?,
            }
            Ok(Outcome::Ok)
        }
        Command::Verify { suite, seed } => cmd_verify(*suite, *seed, out),
        Command::Reduce1d { density, b3, b2, bc, algorithm, max_iter, out: path, density_out } => {
            let args = ReduceArgs {
                density,
                b3: *b3,
                b2: *b2,
                bc: *bc,
                algorithm: *algorithm,
                max_iter: *max_iter,
                out: path,
                density_out: density_out.as_deref(),
            };
            cmd_reduce1d(&args, out)
        }
        Command::Wigner { b, window, payload, points, out: path } => {
            let grid = default_window_grid();
            let f = sample_hermite_gauss(*window, 1.0, grid)?;
            let g = sample_hermite_gauss(*payload, 1.0, grid)?;
            let wgrid = WignerGrid::covering(*b, &[(&f, &g)], *points)?;
            let w = wigner2d(&f, &g, *b, &wgrid)?;
            let mut buf = Vec::new();
            w.write_csv(&mut buf)?;
            match path {
                Some(p) => write_file(p, &buf)?,
                None => out.write_all(&buf)?,
            }
            Ok(Outcome::Ok)
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(bytes)?;
    w.flush()
}

fn cmd_omega2d(b: f64, rho: f64, oracle: bool, out: &mut dyn Write) -> CliResult<Outcome> {
    let r = omega2d_closed(b, rho)?;
    if oracle {
        let bath = omega2d_bathtub_oracle(b, rho)?;
        writeln!(out, "closed: {}", sig(r.omega))?;
        writeln!(out, "bathtub: {}", sig(bath))?;
        writeln!(out, "difference: {}", sig((r.omega - bath).abs()))?;
    } else {
        writeln!(out, "omega2d: {}", sig(r.omega))?;
    }
    writeln!(out, "filled_levels: {}", r.filled_levels)?;
    writeln!(out, "fractional_occupation: {}", sig(r.fractional_occupation))?;
    Ok(Outcome::Ok)
}

fn cmd_omega3d(b: f64, rho: f64, method: MethodArg, out: &mut dyn Write) -> CliResult<Outcome> {
    let m = match method {
        MethodArg::Oracle => Omega3dMethod::Oracle,
        MethodArg::Prop => Omega3dMethod::Closed(ClosedFormVariant::PropForm),
        MethodArg::Proof => Omega3dMethod::Closed(ClosedFormVariant::ProofForm),
        MethodArg::Canonical => Omega3dMethod::Closed(CANONICAL_VARIANT),
    };
    let r = omega3d(b, rho, m)?;
    writeln!(out, "method: {}", m.label())?;
    writeln!(out, "omega3d: {}", sig(r.omega))?;
    writeln!(out, "delta: {}", sig(r.fermi.delta))?;
    writeln!(out, "occupied_levels: {}", r.fermi.occupied_levels)?;
    if matches!(method, MethodArg::Prop | MethodArg::Proof) {
        let reference = omega3d_oracle(b, rho)?.omega;
        writeln!(out, "oracle: {}", sig(reference))?;
        for v in ClosedFormVariant::ALL {
            let value = omega3d(b, rho, Omega3dMethod::Closed(v))?.omega;
            let dev = if reference == 0.0 { value.abs() } else { (value - reference).abs() / reference.abs() };
            let verdict = if dev <= 1e-10 { "matches oracle" } else { "differs from oracle" };
            writeln!(out, "{}: {} ({verdict}, relative deviation {})", v.label(), sig(value), sig(dev))?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_fermi(b: f64, rho: f64, tol: f64, out: &mut dyn Write) -> CliResult<Outcome> {
    let s = fermi_level(b, rho, tol)?;
    writeln!(out, "delta: {}", sig(s.delta))?;
    writeln!(out, "residual: {}", sig(s.residual))?;
    writeln!(out, "occupied_levels: {}", s.occupied_levels)?;
    Ok(Outcome::Ok)
}

fn cmd_verify(suite: SuiteArg, seed: u64, out: &mut dyn Write) -> CliResult<Outcome> {
    let suite = match suite {
        SuiteArg::Wigner => Suite::Wigner,
        SuiteArg::Kinetic => Suite::Kinetic,
        SuiteArg::All => Suite::All,
    };
    let checks = verify::run_suite(suite, seed)?;
    let mut failed = 0;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {} (max deviation {}, tolerance {})", c.name, sig(c.max_deviation), sig(c.tolerance))?;
        failed += usize::from(!c.passed);
    }
    writeln!(out, "{} checks, {} failed (seed {seed})", checks.len(), failed)?;
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::VerifyFailed })
}

/// A one-parameter sweep with the other parameter held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: ParamArg,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub scale: ScaleArg,
    pub fixed: f64,
}

impl SweepSpec {
    pub fn new(
        param: ParamArg,
        from: f64,
        to: f64,
        steps: usize,
        scale: ScaleArg,
        b: Option<f64>,
        rho: Option<f64>,
    ) -> CliResult<Self> {
        if !(from.is_finite() && to.is_finite() && from < to) {
            return Err(CliError::Input(format!("need from < to, got from = {from}, to = {to}")));
        }
        if steps < 2 {
            return Err(CliError::Input(format!("need at least 2 steps, got {steps}")));
        }
        if scale == ScaleArg::Log && from <= 0.0 {
            return Err(CliError::Input("a log sweep needs from > 0".into()));
        }
        let fixed = match param {
            ParamArg::B => rho.ok_or_else(|| CliError::Input("sweeping b needs --rho".into()))?,
            ParamArg::Rho => b.ok_or_else(|| CliError::Input("sweeping rho needs --b".into()))?,
        };
        Ok(SweepSpec { param, from, to, steps, scale, fixed })
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    ScaleArg::Linear => self.from + t * (self.to - self.from),
                    ScaleArg::Log => (self.from.ln() + t * (self.to.ln() - self.from.ln())).exp(),
                }
            })
            .collect()
    }

    fn name(&self) -> (&'static str, &'static str) {
        match self.param {
            ParamArg::B => ("b", "rho"),
            ParamArg::Rho => ("rho", "b"),
        }
    }
}

/// The sweep as CSV text: `#` header lines, then
/// `param,omega2d,omega3d_canonical,delta,occupied_levels` rows in
/// parameter order.
pub fn scan_csv(spec: &SweepSpec) -> CliResult<String> {
    let (name, other) = spec.name();
    let scale = match spec.scale {
        ScaleArg::Linear => "linear",
        ScaleArg::Log => "log",
    };
    let mut s = String::new();
    s.push_str(&format!("# {TOOL} {VERSION} scan\n"));
    s.push_str(&format!(
        "# param={name} from={} to={} steps={} scale={scale} {other}={}\n",
        sig(spec.from),
        sig(spec.to),
        spec.steps,
        sig(spec.fixed)
    ));
    s.push_str(&format!(
        "# methods: omega2d=closed_form omega3d={} fermi_tol={}\n",
        CANONICAL_VARIANT.label(),
        sig(DEFAULT_FERMI_TOL)
    ));
    s.push_str("param,omega2d,omega3d_canonical,delta,occupied_levels\n");
    for x in spec.points() {
        let (b, rho) = match spec.param {
            ParamArg::B => (x, spec.fixed),
            ParamArg::Rho => (spec.fixed, x),
        };
        let w2 = omega2d_closed(b, rho)?.omega;
        let w3 = omega3d(b, rho, Omega3dMethod::Closed(CANONICAL_VARIANT))?;
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            sig(x),
            sig(w2),
            sig(w3.omega),
            sig(w3.fermi.delta),
            w3.fermi.occupied_levels
        ));
    }
    Ok(s)
}

/// Reads a two-column `x,rho` CSV with a header line.
pub fn read_density_csv(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut rho = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(CliError::Input(format!("row {} has {} columns, expected 2", line + 1, record.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Input(format!("row {}: cannot parse `{s}` as a number", line + 1)))
        };
        xs.push(parse(&record[0])?);
        rho.push(parse(&record[1])?);
    }
    Ok((xs, rho))
}

struct ReduceArgs<'a> {
    density: &'a Path,
    b3: f64,
    b2: f64,
    bc: BcArg,
    algorithm: AlgorithmArg,
    max_iter: Option<usize>,
    out: &'a Path,
    density_out: Option<&'a Path>,
}

fn cmd_reduce1d(args: &ReduceArgs, out: &mut dyn Write) -> CliResult<Outcome> {
    let (xs, rho) = read_density_csv(args.density)?;
    let grid = GridSpec::from_nodes(&xs)?;
    let field = MagneticField::new(0.0, args.b2, args.b3)?;
    let bc = match args.bc {
        BcArg::Dirichlet => BoundaryCondition::Dirichlet,
        BcArg::Periodic => BoundaryCondition::Periodic,
    };
    let mut opts = MinimizeOptions {
        algorithm: match args.algorithm {
            AlgorithmArg::Dual => Algorithm::Dual,
            AlgorithmArg::Subgradient => Algorithm::ProjectedSubgradient,
        },
        ..MinimizeOptions::default()
    };
    if let Some(m) = args.max_iter {
        opts.max_iter = m;
    }
    let result = reduce1d::minimize(&rho, grid, &field, bc, &opts)?;
    let e = &result.energy;
    let mu: Vec<f64> = result.density_matrix.eigenvalues().iter().map(|&m| round(m.max(0.0))).collect();
    let doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "params": {
            "density": args.density.display().to_string(),
            "points": xs.len(),
            "b2": args.b2,
            "b3": args.b3,
            "bc": match bc { BoundaryCondition::Dirichlet => "dirichlet", BoundaryCondition::Periodic => "periodic" },
            "algorithm": match opts.algorithm { Algorithm::Dual => "dual", Algorithm::ProjectedSubgradient => "subgradient" },
            "max_iter": opts.max_iter,
        },
        "energy": {
            "kinetic": round(e.kinetic),
            "spectral": round(e.spectral),
            "total": round(e.total),
        },
        "mu": mu,
        "constraint_violation": round(e.constraint_violation),
        "iterations": result.report.iterations,
        "converged": result.report.converged,
        "lower_bound": result.report.lower_bound.map(round),
        "relative_gap": result.report.relative_gap.map(round),
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.into()))?;
    text.push('\n');
    write_file(args.out, text.as_bytes())?;
    if let Some(path) = args.density_out {
        let mut csv_text = String::from("x,rho\n");
        for (x, r) in xs.iter().zip(result.density_matrix.density()) {
            csv_text.push_str(&format!("{},{}\n", sig(*x), sig(r)));
        }
        write_file(path, csv_text.as_bytes())?;
    }
    writeln!(out, "kinetic: {}", sig(e.kinetic))?;
    writeln!(out, "spectral: {}", sig(e.spectral))?;
    writeln!(out, "total: {}", sig(e.total))?;
    writeln!(out, "constraint_violation: {}", sig(e.constraint_violation))?;
    writeln!(out, "iterations: {}", result.report.iterations)?;
    writeln!(out, "converged: {}", result.report.converged)?;
    let mass = result.density_matrix.mass();
    if mass > 0.0 {
        writeln!(out, "mass: {}", sig(mass))?;
        writeln!(out, "energy_per_length: {}", sig(e.total / grid.length()))?;
        writeln!(out, "landau_capacity: {}", sig(args.b3 / (2.0 * PI)))?;
    }
    Ok(if result.report.converged { Outcome::Ok } else { Outcome::NotConverged })
}
