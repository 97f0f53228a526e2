//! `phaseplane`: equilibria, null-clines, portraits and parameter scans for
//! one- and two-dimensional autonomous systems.

mod report;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phaseplane::algebra2::{eigensystem, Vec2};
use phaseplane::corpus::{builtin_model, parse_model_file, serialize, ModelRecord};
use phaseplane::cycles::{continue_equilibrium, hopf_from_path};
use phaseplane::linsys::{classify_linear, general_solution, solve_ivp};
use phaseplane::phase1d::{build_phase_line, fold_scan_1d, Model1D};
use phaseplane::phase2d::{analyze_equilibria, extract_nullclines, Model2D};
use phaseplane::{Error, Mat2};
use serde::Serialize;
use sha2::{Digest, Sha256};

use report::{Report, ScanReport};

#[derive(Parser)]
#[command(name = "phaseplane", version, about = "Qualitative analysis of planar and scalar autonomous ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria with their linearization, and the null-clines.
    Analyze {
        #[command(flatten)]
        source: Source,
        /// Write the JSON report here (`-` for standard output).
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// SVG phase portrait of a planar model.
    Portrait {
        #[command(flatten)]
        source: Source,
        /// Output file; standard output when omitted.
        #[arg(short = 'o', value_name = "PATH")]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Trajectory start point `x,y`; may be repeated.
        #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
        start: Vec<Vec2>,
        /// Integration time for trajectories.
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
    },
    /// Phase line of a scalar model.
    Phaseline {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Parameter sweep locating a Hopf point (planar) or a fold (scalar).
    Scan {
        #[command(flatten)]
        source: Source,
        #[arg(long, required = true)]
        param: Option<String>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], required = true, allow_negative_numbers = true)]
        range: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, conflicts_with = "fold", required_unless_present = "fold")]
        hopf: bool,
        #[arg(long)]
        fold: bool,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Closed-form solution of `X' = A X` for `A = [[a, b], [c, d]]`.
    #[command(allow_negative_numbers = true)]
    Linsolve {
        #[command(flatten)]
        matrix: Matrix,
        /// Initial condition `x0,y0`.
        #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
        init: Option<Vec2>,
        /// Times at which to evaluate the solution; needs `--init`.
        #[arg(long = "at", value_name = "T", requires = "init")]
        at: Vec<f64>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Eigenvalues and eigenvectors of `[[a, b], [c, d]]`.
    #[command(allow_negative_numbers = true)]
    Eig {
        #[command(flatten)]
        matrix: Matrix,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Model file.
    #[arg(value_name = "FILE")]
    file: Option<PathBuf>,
    /// Built-in model name.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
}

#[derive(Args)]
struct Matrix {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Matrix {
    fn mat(&self) -> Mat2 {
        Mat2::new(self.a, self.b, self.c, self.d)
    }
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got '{s}'"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    Ok([num(x)?, num(y)?])
}

/// Failure with its exit status: 2 for bad input, 1 for analyses that ran
/// and failed.
enum Failure {
    Input(String),
    Analysis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Expr(_)
            | Error::Format { .. }
            | Error::UndeclaredIdentifier(_)
            | Error::UnknownModel { .. }
            | Error::ModelUnavailable { .. }
            | Error::UnknownParameter(_)
            | Error::InvalidArgument(_) => Failure::Input(e.to_string()),
            _ => Failure::Analysis(e.to_string()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

struct Loaded {
    record: ModelRecord,
    digest: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn load(source: &Source) -> Outcome<Loaded> {
    if let Some(name) = &source.builtin {
        let record = builtin_model(name)?;
        let digest = sha256_hex(serialize(&record).as_bytes());
        return Ok(Loaded { record, digest });
    }
    let path = source.file.as_ref().expect("clap requires a source");
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let record = parse_model_file(&text).map_err(|e| match Failure::from(e) {
        Failure::Input(m) | Failure::Analysis(m) => Failure::Input(format!("{}: {m}", path.display())),
    })?;
    Ok(Loaded { record, digest: sha256_hex(text.as_bytes()) })
}

fn planar(l: &Loaded) -> Outcome<&Model2D> {
    l.record.model_2d().ok_or_else(|| Failure::Input(format!("model '{}' is not two-dimensional", l.record.name)))
}

fn scalar(l: &Loaded) -> Outcome<&Model1D> {
    l.record.model_1d().ok_or_else(|| Failure::Input(format!("model '{}' is not one-dimensional", l.record.name)))
}

fn write_out(path: &Path, text: &str) -> Outcome {
    if path.as_os_str() == "-" {
        std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string()))
    } else {
        fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    write_out(path, &report::canonical_json(value))
}

fn analyze(source: &Source, json: Option<&Path>, grid: usize) -> Outcome {
    let loaded = load(source)?;
    let report = match &loaded.record.model {
        phaseplane::corpus::Model::TwoD(m) => {
            let eqs = analyze_equilibria(m)?;
            let clines = extract_nullclines(m, grid)?;
            Report::planar(&loaded.record, &eqs, &clines, grid, &loaded.digest)
        }
        phaseplane::corpus::Model::OneD(m) => Report::scalar(&loaded.record, &build_phase_line(m)?, &loaded.digest),
    };
    match json {
        Some(path) => write_json(path, &report),
        None => {
            print!("{}", report.text(&loaded.record));
            Ok(())
        }
    }
}

fn portrait(source: &Source, output: Option<&Path>, grid: usize, starts: &[Vec2], tmax: f64) -> Outcome {
    let loaded = load(source)?;
    let m = planar(&loaded)?;
    let doc = svg::portrait(&loaded.record.name, m, grid, starts, tmax)?;
    write_out(output.unwrap_or(Path::new("-")), &doc)
}

fn phaseline(source: &Source, json: Option<&Path>) -> Outcome {
    let loaded = load(source)?;
    let m = scalar(&loaded)?;
    let report = Report::scalar(&loaded.record, &build_phase_line(m)?, &loaded.digest);
    match json {
        Some(path) => write_json(path, &report),
        None => {
            print!("{}", report.text(&loaded.record));
            Ok(())
        }
    }
}

struct ScanArgs<'a> {
    param: &'a str,
    range: (f64, f64),
    steps: usize,
    hopf: bool,
    json: Option<&'a Path>,
}

fn scan(source: &Source, args: ScanArgs) -> Outcome {
    let loaded = load(source)?;
    let ScanArgs { param, range, steps, hopf, json } = args;
    let (table, failure) = if hopf {
        let m = planar(&loaded)?;
        let cont = continue_equilibrium(m, param, range, steps, None)?;
        match cont.lost_at {
            Some(value) => {
                let last_good = cont.path.last().map_or(range.0, |p| p.param);
                let err = Error::ContinuationLost { param: param.to_string(), value, last_good };
                (ScanReport::hopf(param, range, steps, &cont.path, None), Some(err))
            }
            None => {
                let found = hopf_from_path(m, param, range, cont.path.clone())?;
                (ScanReport::hopf(param, range, steps, &cont.path, found.as_ref()), None)
            }
        }
    } else {
        let m = scalar(&loaded)?;
        (ScanReport::fold(param, range, steps, fold_scan_1d(m, param, range, steps)?.as_ref()), None)
    };
    match json {
        Some(path) => write_json(path, &Report::scan(&loaded.record, table.clone(), &loaded.digest))?,
        None => print!("{}", table.text()),
    }
    match failure {
        Some(e) => Err(Failure::Analysis(e.to_string())),
        None => Ok(()),
    }
}

fn linsolve(a: Mat2, init: Option<Vec2>, at: &[f64], json: Option<&Path>) -> Outcome {
    let solution = general_solution(&a)?;
    let ivp = init.map(|x0| solve_ivp(&a, x0)).transpose()?;
    let values = match &ivp {
        Some(ivp) => at.iter().map(|&t| ivp.eval(t).map(|v| (t, v))).collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let r = report::LinearReport::new(&a, classify_linear(&a), &solution, ivp.as_ref(), &values);
    match json {
        Some(path) => write_json(path, &r),
        None => {
            print!("{}", r.text());
            Ok(())
        }
    }
}

fn eig(a: Mat2, json: Option<&Path>) -> Outcome {
    let es = eigensystem(&a)?;
    let r = report::EigenReport::new(&a, &es, classify_linear(&a));
    match json {
        Some(path) => write_json(path, &r),
        None => {
            print!("{}", r.text());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Analyze { source, json, grid } => analyze(&source, json.as_deref(), grid),
        Command::Portrait { source, output, grid, start, tmax } => {
            portrait(&source, output.as_deref(), grid, &start, tmax)
        }
        Command::Phaseline { source, json } => phaseline(&source, json.as_deref()),
        Command::Scan { source, param, range, steps, hopf, fold: _, json } => {
            let param = param.expect("clap requires --param");
            let args = ScanArgs { param: &param, range: (range[0], range[1]), steps, hopf, json: json.as_deref() };
            scan(&source, args)
        }
        Command::Linsolve { matrix, init, at, json } => linsolve(matrix.mat(), init, &at, json.as_deref()),
        Command::Eig { matrix, json } => eig(matrix.mat(), json.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(m)) => {
            eprintln!("analysis failed: {m}");
            ExitCode::from(1)
        }
    }
}
