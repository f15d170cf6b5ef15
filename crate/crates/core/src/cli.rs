//! Command-line front end. Results go to stdout as one JSON object (schema 1)
//! or, for sweeps, as CSV. Exit codes: 0 success, 2 solver did not converge,
//! 1 bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::applications::{
    det_rate_to_ebit, ent_overhead_lower_bound, exact_ent_upper_bound, exact_key_upper_bound, key_overhead_lower_bound,
    sweep, BoundReport, SweepFamily, SweepMeasure, SweepRow, Task,
};
use crate::conic::Feasibility;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, trace_re, ComplexMatrix, HermitianOperator, C64};
use crate::measures::{
    e_max_u_with, e_min_u_with, e_rel_u, is_two_extendible, petz_alpha_u, unext_fidelity_with, MeasureOptions,
    MeasureResult,
};
use crate::states::{erased, isotropic, max_entangled, private_state, pure_from_schmidt, random_state, BipartiteState, Twist};

pub const SCHEMA: u32 = 1;
/// Largest d_A·d_B·d_B accepted (order of the extension variable).
pub const MAX_EXTENSION_ORDER: usize = 4096;
pub const TOL_ENV: &str = "UEXT_SOLVER_TOL";
pub const CSV_HEADER: [&str; 7] = ["param", "e_rel", "e_max", "e_min", "f_u", "overhead_rel", "overhead_ree"];

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Dims {
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
}

/// JSON state file: `matrix` is row-major with entries as `[re, im]`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct StateFile {
    pub dims: Dims,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn from_matrix(m: &ComplexMatrix, d_a: usize, d_b: usize, label: Option<String>) -> Self {
        let matrix = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { dims: Dims { a: d_a, b: d_b }, matrix, label }
    }

    pub fn from_state(rho: &BipartiteState, label: Option<String>) -> Self {
        Self::from_matrix(rho.matrix(), rho.d_a(), rho.d_b(), label)
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let n = self.dims.a * self.dims.b;
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("matrix must be {n}x{n} for dims {}x{}", self.dims.a, self.dims.b)));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| C64::new(self.matrix[i][j][0], self.matrix[i][j][1])))
    }

    /// Validates Hermiticity, positivity and unit trace.
    pub fn to_state(&self) -> Result<BipartiteState> {
        BipartiteState::new(HermitianOperator::new(self.matrix()?)?, self.dims.a, self.dims.b)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[derive(Parser, Debug)]
#[command(name = "unext", version, about = "Unextendible-entanglement measures and bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one measure on a state.
    Measure {
        #[arg(long, value_parser = ["emax", "emin", "fidelity", "rel", "petz"])]
        kind: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Tabulate measures and overhead bounds over a family grid as CSV.
    Sweep {
        #[arg(long, value_parser = ["isotropic", "erased"])]
        family: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Comma-separated values, or start:stop:count.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Comma-separated subset of rel,max,min,fidelity.
        #[arg(long, default_value = "rel,max,min,fidelity")]
        measures: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Decide two-extendibility; optionally write the symmetric extension.
    CheckExtendible {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Overhead and rate bounds.
    Bounds {
        #[arg(long, value_parser = ["key-overhead", "ent-overhead", "exact-key", "exact-ent", "det-rate"])]
        task: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Write a family state to a state file.
    Export {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    #[arg(long, conflicts_with = "family")]
    pub state: Option<PathBuf>,
    #[arg(long, value_parser = ["maxent", "isotropic", "erased", "pure-schmidt", "private"])]
    pub family: Option<String>,
    #[arg(long = "d")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated Schmidt coefficients.
    #[arg(long)]
    pub schmidt: Option<String>,
    /// Key dimension of a private state.
    #[arg(long = "key")]
    pub key: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("family '{family}' needs --{flag}")))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: '{t}'"))))
        .collect()
}

/// `a,b,c` or `start:stop:count` (inclusive endpoints).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid '{s}' is not start:stop:count")));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| Error::Parse(format!("bad grid start '{}'", parts[0])))?;
        let b: f64 = parts[1].trim().parse().map_err(|_| Error::Parse(format!("bad grid stop '{}'", parts[1])))?;
        let n: usize = parts[2].trim().parse().map_err(|_| Error::Parse(format!("bad grid count '{}'", parts[2])))?;
        return Ok(match n {
            0 => vec![],
            1 => vec![a],
            _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
        });
    }
    parse_list(s)
}

impl StateArgs {
    pub fn load(&self) -> Result<(BipartiteState, String)> {
        if let Some(path) = &self.state {
            let f = StateFile::load(path)?;
            let label = f.label.clone().unwrap_or_else(|| path.display().to_string());
            return Ok((f.to_state()?, label));
        }
        let Some(family) = self.family.as_deref() else {
            return Err(Error::InvalidParameter("give --state <file> or --family <name>".into()));
        };
        match family {
            "maxent" => {
                let d = need(self.dim, "d", family)?;
                Ok((max_entangled(d)?, format!("maxent d={d}")))
            }
            "isotropic" => {
                let d = need(self.dim, "d", family)?;
                let r = need(self.r, "r", family)?;
                Ok((isotropic(d, r)?, format!("isotropic d={d} r={r}")))
            }
            "erased" => {
                let eps = need(self.eps, "eps", family)?;
                Ok((erased(eps)?, format!("erased eps={eps}")))
            }
            "pure-schmidt" => {
                let coeffs = parse_list(need(self.schmidt.as_deref(), "schmidt", family)?)?;
                Ok((pure_from_schmidt(&coeffs, self.seed)?, format!("pure-schmidt {coeffs:?}")))
            }
            "private" => {
                let k = self.key.unwrap_or(2);
                let seed = self.seed.unwrap_or(0);
                let shield = random_state(4, 4, seed)?;
                let g = private_state(k, &shield, (2, 2), Twist::Random, Some(seed))?;
                Ok((g.state, format!("private K={k} seed={seed}")))
            }
            other => Err(Error::InvalidParameter(format!("unknown family '{other}'"))),
        }
    }
}

/// Rounds to 9 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return json!("nan");
    }
    if x.is_infinite() {
        return json!(if x > 0.0 { "inf" } else { "-inf" });
    }
    json!(round9(x))
}

fn round9(x: f64) -> f64 {
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// CSV cell: 9 significant digits, `inf`, or empty when not computed.
pub fn cell(x: Option<f64>) -> String {
    match x {
        None => String::new(),
        Some(v) if v.is_infinite() => if v > 0.0 { "inf" } else { "-inf" }.to_string(),
        Some(v) if v.is_nan() => "nan".to_string(),
        Some(v) => round9(v).to_string(),
    }
}

/// Measure options with the solver gap overridden by the environment, if set.
pub fn options_from_env() -> Result<MeasureOptions> {
    let mut opts = MeasureOptions::default();
    if let Ok(v) = std::env::var(TOL_ENV) {
        let t: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("{TOL_ENV}='{v}' is not a number")))?;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("{TOL_ENV} must lie in (0, 1), got {t}")));
        }
        opts.sdp_tol = t;
    }
    Ok(opts)
}

fn guard_dims(rho: &BipartiteState) -> Result<()> {
    let order = rho.d_a() * rho.d_b() * rho.d_b();
    if order > MAX_EXTENSION_ORDER {
        return Err(Error::InvalidParameter(format!(
            "extension order d_A·d_B·d_B = {order} exceeds {MAX_EXTENSION_ORDER}"
        )));
    }
    Ok(())
}

fn diagnostics(r: &MeasureResult, ms: f64) -> Value {
    let d = &r.diagnostics;
    json!({
        "converged": d.converged,
        "iterations": d.iterations,
        "gap": num(d.gap),
        "lower_bound": num(d.lower_bound),
        "upper_bound": num(d.upper_bound),
        "primal_residual": num(d.primal_residual),
        "runtime_ms": num(ms),
    })
}

fn record(command: &str, state: &str, body: Value) -> Value {
    let mut v = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "state": state,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn check_petz_alpha(alpha: Option<f64>) -> Result<f64> {
    let a = alpha.ok_or_else(|| Error::InvalidParameter("--kind petz needs --alpha".into()))?;
    if !(a > 0.0 && a <= 2.0) {
        return Err(Error::InvalidParameter(format!("Petz alpha = {a} outside (0, 2]")));
    }
    Ok(a)
}

fn cmd_measure(kind: &str, alpha: Option<f64>, sa: &StateArgs, out: &mut dyn Write) -> Result<i32> {
    let alpha = if kind == "petz" { Some(check_petz_alpha(alpha)?) } else { None };
    let (rho, label) = sa.load()?;
    guard_dims(&rho)?;
    let opts = options_from_env()?;
    let t = Instant::now();
    let r = match kind {
        "emax" => e_max_u_with(&rho, &opts)?,
        "emin" => e_min_u_with(&rho, &opts)?,
        "fidelity" => unext_fidelity_with(&rho, &opts)?,
        "rel" => e_rel_u(&rho, &opts)?,
        "petz" => petz_alpha_u(&rho, alpha.unwrap_or(1.0), &opts)?,
        other => return Err(Error::InvalidParameter(format!("unknown kind '{other}'"))),
    };
    let ms = elapsed_ms(t);
    let mut body = json!({ "kind": kind, "value": num(r.value), "diagnostics": diagnostics(&r, ms) });
    if let Some(a) = alpha {
        body["alpha"] = num(a);
    }
    if kind == "fidelity" {
        // The fidelity itself is raw; its bit-valued measure is −log₂ F^u.
        body["bits"] = num(if r.value > 0.0 { -r.value.log2() } else { f64::INFINITY });
    }
    writeln!(out, "{}", record("measure", &label, body))?;
    Ok(if r.diagnostics.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn write_csv(rows: &[SweepRow], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            cell(Some(r.param)),
            cell(r.e_rel),
            cell(r.e_max),
            cell(r.e_min),
            cell(r.f_u),
            cell(r.overhead_rel),
            cell(r.overhead_ree),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_measures(s: &str) -> Result<Vec<SweepMeasure>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "rel" => Ok(SweepMeasure::Rel),
            "max" => Ok(SweepMeasure::Max),
            "min" => Ok(SweepMeasure::Min),
            "fidelity" => Ok(SweepMeasure::Fidelity),
            _ => Err(Error::InvalidParameter(format!("unknown sweep measure '{t}'"))),
        })
        .collect()
}

fn cmd_sweep(
    family: &str,
    d: usize,
    grid: &str,
    measures: &str,
    dest: Option<&Path>,
    jobs: usize,
    out: &mut dyn Write,
) -> Result<i32> {
    let fam = match family {
        "isotropic" => {
            if d < 2 || d * d * d > MAX_EXTENSION_ORDER {
                return Err(Error::InvalidParameter(format!("isotropic dimension {d} out of range")));
            }
            SweepFamily::Isotropic { d }
        }
        _ => SweepFamily::Erased,
    };
    let grid = parse_grid(grid)?;
    let measures = parse_measures(measures)?;
    let opts = options_from_env()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let rows = pool.install(|| sweep(fam, &grid, &measures, &opts))?;
    match dest {
        Some(p) => write_csv(&rows, &mut std::fs::File::create(p)?)?,
        None => write_csv(&rows, out)?,
    }
    Ok(EXIT_OK)
}

fn cmd_check(sa: &StateArgs, cert: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let (rho, label) = sa.load()?;
    guard_dims(&rho)?;
    let t = Instant::now();
    let f = is_two_extendible(&rho)?;
    let ms = elapsed_ms(t);
    let mut body = json!({ "feasible": f.is_feasible(), "certificate_file": Value::Null, "runtime_ms": num(ms) });
    let code = match &f {
        Feasibility::Feasible { extension, residual } => {
            body["residual"] = num(*residual);
            if let Some(p) = cert {
                // Solver output is feasible to ~1e-8; renormalize so the file loads as a state.
                let h = hermitian_part(extension);
                let full = h.unscale(trace_re(&h));
                let d_b = rho.d_b();
                StateFile::from_matrix(&full, rho.d_a(), d_b * d_b, Some(format!("symmetric extension of {label} (A:BB')")))
                    .save(p)?;
                body["certificate_file"] = json!(p.display().to_string());
            }
            EXIT_OK
        }
        Feasibility::Infeasible => EXIT_OK,
        Feasibility::Indeterminate { primal_residual, dual_residual } => {
            body["primal_residual"] = num(*primal_residual);
            body["dual_residual"] = num(*dual_residual);
            EXIT_NOT_CONVERGED
        }
    };
    writeln!(out, "{}", record("check-extendible", &label, body))?;
    Ok(code)
}

fn cmd_bounds(task: &str, k: Option<usize>, m: Option<usize>, sa: &StateArgs, out: &mut dyn Write) -> Result<i32> {
    let task: Task = task.parse()?;
    let (rho, label) = sa.load()?;
    guard_dims(&rho)?;
    let opts = options_from_env()?;
    let t = Instant::now();
    let report: BoundReport = match task {
        Task::KeyOverhead => key_overhead_lower_bound(&rho, k.unwrap_or(1), &opts)?,
        Task::EntOverhead => ent_overhead_lower_bound(&rho, m.unwrap_or(1), &opts)?,
        Task::ExactKey => exact_key_upper_bound(&rho, &opts)?,
        Task::ExactEnt => exact_ent_upper_bound(&rho, &opts)?,
        Task::DetRate => {
            let v = det_rate_to_ebit(&rho)?;
            BoundReport { task, value: v, measure: "e_min_u", measure_value: v, state: label.clone(), converged: true }
        }
    };
    let ms = elapsed_ms(t);
    let body = json!({
        "task": report.task,
        "value": num(report.value),
        "measure": report.measure,
        "measure_value": num(report.measure_value),
        "converged": report.converged,
        "runtime_ms": num(ms),
    });
    writeln!(out, "{}", record("bounds", &label, body))?;
    Ok(if report.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Measure { kind, alpha, state } => cmd_measure(&kind, alpha, &state, out),
        Command::Sweep { family, d, grid, measures, out: dest, jobs } => {
            cmd_sweep(&family, d, &grid, &measures, dest.as_deref(), jobs, out)
        }
        Command::CheckExtendible { state, certificate } => cmd_check(&state, certificate.as_deref(), out),
        Command::Bounds { task, k, m, state } => cmd_bounds(&task, k, m, &state, out),
        Command::Export { state, out: path } => {
            let (rho, label) = state.load()?;
            StateFile::from_state(&rho, Some(label)).save(&path)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let _ = if code == EXIT_OK { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn nine_digits_and_inf() {
        assert_eq!(num(1.0 / 3.0), json!(0.333333333));
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(cell(Some(2.0)), "2");
        assert_eq!(cell(None), "");
    }
}
