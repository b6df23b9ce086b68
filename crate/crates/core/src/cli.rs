//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::compiler::{compile, CompiledCircuit};
use crate::decoder::{generate_ml_decoder, table_513, table_713};
use crate::error::Error;
use crate::pauli::Tableau;
use crate::plot::{line_chart, Chart};
use crate::rates::{fidelity_curve, grid, rate_curve, RateCurve, R_MAX};
use crate::scheduler::{build_multigraph, schedule_program, DEFAULT_EXACT_LIMIT};
use crate::sim::{csv_header, csv_row, simulate_exact, simulate_mc, NoiseModel, Protocol, SimResult, EXACT_CAP};
use crate::stabilizer::{code_distance, preset, standard_form};

pub const THREADS_ENV: &str = "DACOS_THREADS";
const ML_PRIOR: f64 = 0.01;

#[derive(Parser, Debug)]
#[command(name = "dacos", version, about = "Compile, schedule and simulate stabilizer-code purification protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a code and schedule its CZ gates.
    Compile(CompileArgs),
    /// Simulate the purification protocol of a code.
    Simulate(SimulateArgs),
    /// Tabulate or plot distillation rates.
    Rates(RatesArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct CodeSpec {
    /// Built-in code: iceberg<n>, five_one_three, steane.
    #[arg(long)]
    pub preset: Option<String>,
    /// Stabilizer file, one generator per line (e.g. XZZXI).
    #[arg(long)]
    pub code: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[command(flatten)]
    pub spec: CodeSpec,
    /// Output directory for circuit.json, program.json, graph.dot and layers.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: CodeSpec,
    /// Input depolarizing strengths (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with = "p_range")]
    pub p: Vec<f64>,
    /// Grid start:stop:points.
    #[arg(long)]
    pub p_range: Option<String>,
    /// Gate error strengths (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub q: Vec<f64>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = SimFormat::Csv)]
    pub format: SimFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RateSelection {
    All,
    Bounds,
    Recurrence,
    Ls,
    Sh,
    Best,
    Fidelity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RateFormat {
    Csv,
    Svg,
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    #[arg(long, default_value_t = 0.8)]
    pub pmax: f64,
    #[arg(long, default_value_t = 81)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = RateSelection::All)]
    pub protocol: RateSelection,
    /// Iceberg sizes for the LS / Sh / best columns (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 6])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = R_MAX)]
    pub r_max: usize,
    #[arg(long, value_enum, default_value_t = RateFormat::Csv)]
    pub format: RateFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::Cap { .. }) => 3,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Lib(e @ Error::Cap { .. }) => ("cap", e.to_string()),
            CliError::Lib(e) => ("config", e.to_string()),
            CliError::Io(m) => ("io", m.clone()),
        };
        json!({ "error": kind, "message": message }).to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// A loaded code with the tableau the circuit is compiled from.
pub struct LoadedCode {
    pub name: String,
    pub compile_tableau: Tableau,
    pub protocol: Protocol,
}

pub fn load_code(spec: &CodeSpec) -> CliResult<LoadedCode> {
    if let Some(name) = &spec.preset {
        let code = preset(name)?;
        let protocol = match code.name.as_str() {
            "five_one_three" => Protocol::OneWay(table_513()),
            "steane" => Protocol::OneWay(table_713()),
            _ => Protocol::TwoWay,
        };
        return Ok(LoadedCode { name: code.name.clone(), compile_tableau: code.compile_tableau(), protocol });
    }
    let path = spec.code.as_ref().ok_or_else(|| Error::Config("no code given".into()))?;
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let tableau = Tableau::parse(&text)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(LoadedCode { name, compile_tableau: tableau, protocol: Protocol::TwoWay })
}

/// Distance > 2 file codes get a generated maximum-likelihood decoder.
fn resolve_protocol(code: &LoadedCode, circ: &CompiledCircuit) -> CliResult<Protocol> {
    if code.protocol != Protocol::TwoWay || circ.k == 0 {
        return Ok(code.protocol.clone());
    }
    match code_distance(&code.compile_tableau)? {
        Some(d) if d > 2 => Ok(Protocol::OneWay(generate_ml_decoder(circ, ML_PRIOR)?)),
        _ => Ok(Protocol::TwoWay),
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut String) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            stdout.push_str(text);
            Ok(())
        }
    }
}

pub fn cmd_compile(args: &CompileArgs) -> CliResult<String> {
    let code = load_code(&args.spec)?;
    let circ = compile(&standard_form(&code.compile_tableau))?;
    let (program, layers) = schedule_program(&circ, args.exact_limit)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let files = [
            ("circuit.json", circ.to_json()),
            ("program.json", serde_json::to_string_pretty(&program).expect("plain data")),
            ("graph.dot", build_multigraph(&circ).to_dot()),
            ("layers.json", layers.to_json()),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(format!(
        "code={} n={} k={} cz={} layers={} schedule={}\n",
        code.name,
        circ.n,
        circ.k,
        circ.cz_count(),
        layers.ell(),
        if layers.exact { "exact" } else { "heuristic" }
    ))
}

fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Lib(Error::Config(format!("p-range must be start:stop:points, got {s:?}")));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let m: usize = parts[2].parse().map_err(|_| bad())?;
    if m == 0 || b < a {
        return Err(bad());
    }
    Ok(if m == 1 { vec![a] } else { (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect() })
}

fn sim_json(code: &str, noise: NoiseModel, r: &SimResult) -> serde_json::Value {
    json!({
        "code": code,
        "mode": if r.shots.is_some() { "mc" } else { "exact" },
        "p": noise.p,
        "q": noise.q,
        "shots": r.shots,
        "p_success": r.p_success,
        "fidelity_joint": r.fidelity_joint,
        "fidelity_reduced": r.fidelity_reduced,
        "correlators": r.correlators,
        "stderr": r.stderr,
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<String> {
    let ps = match &args.p_range {
        Some(r) => parse_range(r)?,
        None if args.p.is_empty() => return Err(Error::Config("give --p or --p-range".into()).into()),
        None => args.p.clone(),
    };
    let noises = ps
        .iter()
        .flat_map(|&p| args.q.iter().map(move |&q| NoiseModel::new(p, q)))
        .collect::<crate::Result<Vec<_>>>()?;
    let code = load_code(&args.spec)?;
    let circ = compile(&standard_form(&code.compile_tableau))?;
    let protocol = resolve_protocol(&code, &circ)?;

    let mut rows = Vec::with_capacity(noises.len());
    for noise in noises {
        let r = if noise.q == 0.0 && circ.n <= EXACT_CAP {
            simulate_exact(&circ, &protocol, noise.p)?
        } else {
            let shots = args.shots.ok_or_else(|| Error::Config("Monte Carlo runs need --shots".into()))?;
            let seed = args.seed.ok_or_else(|| Error::Config("Monte Carlo runs need --seed".into()))?;
            simulate_mc(&circ, &protocol, noise, shots, seed)?
        };
        rows.push((noise, r));
    }
    let body = match args.format {
        SimFormat::Csv => {
            let mut s = csv_header(circ.k) + "\n";
            for (noise, r) in &rows {
                s.push_str(&csv_row(&code.name, *noise, r));
                s.push('\n');
            }
            s
        }
        SimFormat::Json => {
            let v: Vec<_> = rows.iter().map(|(noise, r)| sim_json(&code.name, *noise, r)).collect();
            serde_json::to_string_pretty(&v).expect("plain data") + "\n"
        }
    };
    let mut stdout = String::new();
    emit(&args.out, &body, &mut stdout)?;
    Ok(stdout)
}

fn select(curve: RateCurve, keep: impl Fn(&str) -> bool) -> RateCurve {
    RateCurve {
        p: curve.p,
        columns: curve.columns.into_iter().filter(|(n, _)| keep(n)).collect(),
        meta: curve.meta.into_iter().filter(|(n, _)| keep(n)).collect(),
    }
}

pub fn cmd_rates(args: &RatesArgs) -> CliResult<String> {
    if !(0.0..=1.0).contains(&args.pmax) {
        return Err(Error::Probability(args.pmax).into());
    }
    if args.points == 0 {
        return Err(Error::Config("--points must be positive".into()).into());
    }
    let ps = grid(args.pmax, args.points);
    let curve = match args.protocol {
        RateSelection::Fidelity => fidelity_curve(&ps)?,
        sel => {
            let full = rate_curve(&ps, &args.n, args.r_max)?;
            select(full, |name| match sel {
                RateSelection::All | RateSelection::Fidelity => true,
                RateSelection::Bounds => name == "D_H" || name == "Rains",
                RateSelection::Recurrence => ["D_R", "D_M", "r_R", "r_M"].contains(&name),
                RateSelection::Ls => name.starts_with("D_LS_"),
                RateSelection::Sh => name.starts_with("D_Sh_best_"),
                RateSelection::Best => name.starts_with("D_best_") || name.starts_with("r_best_"),
            })
        }
    };
    let body = match args.format {
        RateFormat::Csv => curve.to_csv(),
        RateFormat::Svg => {
            let fid = args.protocol == RateSelection::Fidelity;
            let chart = Chart {
                title: if fid { "Output fidelity of one pair" } else { "Distillation rate" },
                x_label: "p",
                y_label: if fid { "F" } else { "D" },
                y_range: if fid { (0.25, 1.0) } else { (0.0, 1.0) },
            };
            line_chart(&chart, &curve.p, &curve.columns)
        }
    };
    let mut stdout = String::new();
    emit(&args.out, &body, &mut stdout)?;
    Ok(stdout)
}

pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rates(a) => cmd_rates(a),
    }
}

/// Sizes the global rayon pool from the environment; call once before any parallel work.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(format!("thread pool: {e}")))
}

/// Parses arguments, runs, and returns (exit code, stdout, stderr).
pub fn main_with_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (0, e.to_string(), String::new()),
                _ => {
                    let mut msg = String::new();
                    let _ = write!(msg, "{}", json!({ "error": "usage", "message": e.to_string().trim_end() }));
                    (2, String::new(), msg + "\n")
                }
            };
        }
    };
    match init_threads().and_then(|_| run(&cli)) {
        Ok(out) => (0, out, String::new()),
        Err(e) => (e.exit_code(), String::new(), e.to_json() + "\n"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("0.2:0.2:1").unwrap(), vec![0.2]);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("1:0:3").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Lib(Error::Cap { what: "x", n: 11, cap: 10 }).exit_code(), 3);
        assert_eq!(CliError::Lib(Error::EmptyCode).exit_code(), 2);
        let v: serde_json::Value = serde_json::from_str(&CliError::Lib(Error::EmptyCode).to_json()).unwrap();
        assert_eq!(v["error"], "config");
    }
}
