//! `latrel`: reliability analysis of lattice-polynomial system models.
//!
//! Exit status: 0 on success, 2 when the model fails to parse or validate,
//! 1 for usage errors and failed computations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use latrel::dsl::{parse_model_bytes, SystemModel};
use latrel::error::{Error, ParseError};
use latrel::format::sig12;
use latrel::lattice::{NormalForm, StructureForm, StructureForms};
use latrel::montecarlo::{simulate, SimulationConfig};
use latrel::quadrature::QuadConfig;
use latrel::{Analysis, LatticeExpr, TimeGrid};

#[derive(Parser)]
#[command(name = "latrel", version, about = "System reliability from lattice polynomial life functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and check that its structure is semicoherent.
    Validate(ModelArg),
    /// Print the minimal path sets, one per line.
    Paths(ModelArg),
    /// Print the minimal cut sets, one per line.
    Cuts(ModelArg),
    /// Print the nonzero Möbius coefficients as `subset,coefficient`.
    Mobius(ModelArg),
    /// Print the dual structure.
    Dual {
        #[command(flatten)]
        model: ModelArg,
        /// Print the truth table instead of an expression.
        #[arg(long)]
        table: bool,
    },
    /// Write the reliability curve as CSV.
    Reliability {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print `value,abs_error,diverged` for the mean time-to-failure.
    Mttf {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Monte Carlo estimate of the reliability curve as CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of sample partitions (results do not depend on it).
        #[arg(long)]
        partitions: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate all six forms of the structure function at a binary state.
    Forms {
        #[command(flatten)]
        model: ModelArg,
        /// Component states x1..xn as a string of 0s and 1s.
        #[arg(long)]
        state: String,
    },
}

#[derive(Args)]
struct ModelArg {
    /// Model file.
    model: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Time grid `start:stop:count`.
    #[arg(long, default_value = "0:5:51")]
    grid: String,
    /// Space the grid points logarithmically.
    #[arg(long)]
    log: bool,
}

#[derive(Args)]
struct TolArg {
    /// Absolute quadrature tolerance; defaults to $LATREL_TOL or 1e-9.
    #[arg(long)]
    tol: Option<f64>,
}

impl TolArg {
    fn config(&self) -> Result<QuadConfig, Failure> {
        let mut cfg = QuadConfig::from_env();
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::usage(format!("--tol must be positive, got {t}")));
            }
            cfg.abs_tol = t;
        }
        Ok(cfg)
    }
}

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

    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn from_error(path: &Path, e: Error) -> Self {
        match e {
            Error::Parse(p) => Self::invalid(located(path, &p)),
            Error::NotSemicoherent(_)
            | Error::Structure(_)
            | Error::Model(_)
            | Error::Distribution(_)
            | Error::TooManyUnits { .. }
            | Error::ConstantInBinary
            | Error::UnboundVariable(_) => Self::invalid(format!("{}: {e}", path.display())),
            other => Self::usage(format!("{}: {other}", path.display())),
        }
    }
}

fn located(path: &Path, e: &ParseError) -> String {
    let mut s = path.display().to_string();
    if let Some(line) = e.line {
        s.push_str(&format!(":{line}"));
    }
    if let Some(field) = &e.field {
        s.push_str(&format!(": {field}"));
    }
    format!("{s}: {} (byte {})", e.message, e.offset)
}

fn load(arg: &ModelArg) -> Result<SystemModel, Failure> {
    let bytes = fs::read(&arg.model).map_err(|e| Failure::usage(format!("{}: {e}", arg.model.display())))?;
    parse_model_bytes(&bytes).map_err(|e| Failure::invalid(located(&arg.model, &e)))
}

fn analysis(arg: &ModelArg, cfg: QuadConfig) -> Result<Analysis, Failure> {
    let model = load(arg)?;
    Analysis::new(&model, cfg).map_err(|e| Failure::from_error(&arg.model, e))
}

fn grid(args: &GridArgs) -> Result<TimeGrid, Failure> {
    TimeGrid::parse(&args.grid, args.log).map_err(|e| Failure::usage(format!("--grid: {e}")))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(arg) => {
            let model = load(&arg)?;
            let v = model.set_function().map_err(|e| Failure::from_error(&arg.model, e))?;
            if let Err(violation) = v.check_semicoherent() {
                return Err(Failure::invalid(format!(
                    "{}: not semicoherent: {violation}",
                    arg.model.display()
                )));
            }
            let pc = v.minimal_paths_cuts().map_err(|e| Failure::from_error(&arg.model, e))?;
            println!(
                "{}: semicoherent, {} components, {} minimal path sets, {} minimal cut sets, dependence {}",
                model.name,
                model.n,
                pc.paths.len(),
                pc.cuts.len(),
                model.dependence.kind()
            );
        }
        Command::Paths(arg) => print_sets(&arg, true)?,
        Command::Cuts(arg) => print_sets(&arg, false)?,
        Command::Mobius(arg) => {
            let a = analysis(&arg, QuadConfig::default())?;
            for (s, c) in a.mobius().nonzero() {
                println!("{},{c}", s.to_spaced());
            }
        }
        Command::Dual { model, table } => {
            let a = analysis(&model, QuadConfig::default())?;
            let dual = a.set_function().dual();
            if table {
                let bits: String = dual.table().iter().map(|&b| if b { '1' } else { '0' }).collect();
                println!("{bits}");
            } else {
                let e = LatticeExpr::from_set_function(&dual, NormalForm::Disjunctive)
                    .map_err(|e| Failure::from_error(&model.model, e))?;
                println!("{e}");
            }
        }
        Command::Reliability {
            model,
            grid: g,
            tol,
            output,
        } => {
            let a = analysis(&model, tol.config()?)?;
            let curve = a.curve(&grid(&g)?).map_err(|e| Failure::from_error(&model.model, e))?;
            emit(&output, &curve.to_csv())?;
        }
        Command::Mttf { model, tol } => {
            let a = analysis(&model, tol.config()?)?;
            let m = a.mttf().map_err(|e| Failure::from_error(&model.model, e))?;
            println!("{},{},{}", sig12(m.value), sig12(m.abs_error), m.diverged);
        }
        Command::Simulate {
            model,
            grid: g,
            samples,
            seed,
            partitions,
            output,
        } => {
            let m = load(&model)?;
            let mut cfg = SimulationConfig::new(samples, seed, grid(&g)?).map_err(|e| Failure::usage(e.to_string()))?;
            if let Some(p) = partitions {
                cfg = cfg.with_partitions(p);
            }
            let r = simulate(&m, &cfg).map_err(|e| Failure::from_error(&model.model, e))?;
            emit(&output, &r.to_csv())?;
            eprintln!(
                "seed={} samples={} mttf={} mttf_stderr={} clipped={}",
                r.seed,
                r.samples,
                sig12(r.mttf.estimate),
                sig12(r.mttf.stderr),
                r.clipped
            );
        }
        Command::Forms { model, state } => {
            let a = analysis(&model, QuadConfig::default())?;
            let n = a.model().n;
            if state.len() != n || !state.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Failure::usage(format!("--state needs {n} digits 0/1, got {state:?}")));
            }
            let x: Vec<bool> = state.bytes().map(|b| b == b'1').collect();
            let forms = StructureForms::new(a.set_function());
            for form in StructureForm::ALL {
                println!("{form},{}", u8::from(forms.eval_binary(&x, form)));
            }
        }
    }
    Ok(())
}

fn print_sets(arg: &ModelArg, paths: bool) -> Result<(), Failure> {
    let a = analysis(arg, QuadConfig::default())?;
    let pc = a
        .set_function()
        .minimal_paths_cuts()
        .map_err(|e| Failure::from_error(&arg.model, e))?;
    for s in if paths { pc.paths } else { pc.cuts } {
        println!("{}", s.to_spaced());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
