//! `lpp2t` front end. Every artifact carries the full effective configuration:
//! a `config` object in JSON output, a leading `# config: {...}` line in CSV.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::finite_n::{finite_result, parse_rational, FiniteCase};
use crate::fredholm::{tracy_widom_f2, F2Grid, GridSpec};
use crate::lpp_sim::{last_passage_table, mc_joint_cdf, sample_weights, write_joint_csv, JointSpec};
use crate::scaling::TwoTimeParams;
use crate::twotime::{eval_k_form, eval_k_form_dual, eval_q_form, ContourSpec, TwoTimeResult};
use crate::verify::{run_criteria, Suite, VerifyOptions};
use crate::{Error, Result};

#[derive(Debug, Parser, Serialize)]
#[command(name = "lpp2t", version, about = "Two-time distribution of geometric last-passage percolation")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for artifacts.
    #[arg(long, global = true, env = "LPP2T_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Artifact file name inside the output directory (default: per command).
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// Seed for every random stream; recorded in all outputs.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Sample one weight field and its last-passage table.
    Simulate(SimulateArgs),
    /// Monte-Carlo joint CDF of the rescaled heights on a (ξ1, ξ2) grid.
    McTwoTime(McArgs),
    /// Tracy–Widom GUE distribution F2.
    F2(F2Args),
    /// Scaling-limit two-time distribution.
    Twotime(TwoTimeArgs),
    /// Exact finite-N probability P[G(m,n) < a, G(M,N) < A].
    Finite(FiniteArgs),
    /// Run acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Geometric parameter, decimal or rational ("1/4").
    #[arg(long, default_value = "0.5")]
    pub q: String,
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[arg(long, default_value = "0.25")]
    pub q: String,
    #[serde(rename = "T")]
    #[arg(long = "T", default_value_t = 100.0)]
    pub big_t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub t2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta2: f64,
    /// Comma-separated ξ1 values.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub xi1: Vec<f64>,
    /// Comma-separated ξ2 values.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub xi2: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct F2Args {
    /// One value gives a JSON artifact, several a CSV sweep.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub xi: Vec<f64>,
    #[arg(long, default_value_t = F2Grid::default().cutoff)]
    pub cutoff: f64,
    #[arg(long, default_value_t = F2Grid::default().nodes)]
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    /// det(I + K(u)) on L²(ℝ−)⊕L²(ℝ+).
    K,
    /// det(I + Q(u)) on L²(ℝ+)⊕L²(ℝ+).
    Q,
    /// K(1/u) at the α ↦ 1/α dual parameters.
    Dual,
}

#[derive(Debug, Args, Serialize)]
pub struct TwoTimeArgs {
    /// Comma-separated; more than one ξ1 or ξ2 value gives a CSV sweep.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub xi1: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta1: f64,
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub xi2: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = FormArg::K)]
    pub form: FormArg,
    /// Grid cutoff L.
    #[arg(long, default_value_t = GridSpec::default().cutoff)]
    pub cutoff: f64,
    /// Gauss–Legendre nodes per half-line.
    #[arg(long, default_value_t = GridSpec::default().nodes_per_side)]
    pub nodes: usize,
    /// u-contour radius r > 1.
    #[arg(long, default_value_t = ContourSpec::default().radius)]
    pub radius: f64,
    #[arg(long, default_value_t = ContourSpec::default().u_nodes)]
    pub u_nodes: usize,
    /// δ = max(η1, αΔη, 0) + margin.
    #[arg(long, default_value_t = crate::scaling::DEFAULT_DELTA_MARGIN)]
    pub delta_margin: f64,
    /// Include the per-u determinant trace in JSON output.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct FiniteArgs {
    /// Rational ("1/2") or decimal q; evaluated exactly.
    #[arg(long)]
    pub q: String,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[serde(rename = "M")]
    #[arg(long = "M")]
    pub big_m: usize,
    #[serde(rename = "N")]
    #[arg(long = "N")]
    pub big_n: usize,
    #[arg(long)]
    pub a: i64,
    #[serde(rename = "A")]
    #[arg(long = "A")]
    pub big_a: i64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Identities)]
    pub suite: Suite,
    /// Samples per T in the Monte-Carlo limit check.
    #[arg(long, default_value_t = VerifyOptions::default().mc_samples)]
    pub samples: u64,
    /// Samples per case in the finite-N vs Monte-Carlo check.
    #[arg(long, default_value_t = VerifyOptions::default().finite_mc_samples)]
    pub finite_samples: u64,
}

/// What a successful run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifact: PathBuf,
    pub summary: String,
    /// 0, or 3 when a verification criterion failed.
    pub exit_code: i32,
}

/// Parses `args`, runs, prints the summary, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(out) => {
            println!("{}", out.summary);
            out.exit_code
        }
        Err(e) => {
            eprintln!("lpp2t: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Domain("--threads must be at least 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    fs::create_dir_all(&cli.out_dir)?;
    let config = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "out_dir": cli.out_dir,
        "seed": cli.seed,
        "args": &cli.command,
    });
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a, config),
        Command::McTwoTime(a) => mc_two_time(cli, a, config),
        Command::F2(a) => f2(cli, a, config),
        Command::Twotime(a) => twotime(cli, a, config),
        Command::Finite(a) => finite(cli, a, config),
        Command::Verify(a) => verify(cli, a, config),
    }
}

fn artifact_path(cli: &Cli, default: &str) -> PathBuf {
    cli.out_dir.join(cli.output.as_deref().unwrap_or(default))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// A CSV file whose first line is `# config: <json>`.
fn csv_with_config(path: &Path, config: &Value) -> Result<BufWriter<File>> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# config: {}", serde_json::to_string(config)?)?;
    Ok(f)
}

/// q as f64 from "0.25" or "1/4".
fn parse_q(s: &str) -> Result<f64> {
    let q = parse_rational(s)?.to_f64().unwrap_or(f64::NAN);
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q = {s} must lie in (0, 1)")));
    }
    Ok(q)
}

fn simulate(cli: &Cli, a: &SimulateArgs, config: Value) -> Result<Outcome> {
    let q = parse_q(&a.q)?;
    let field = last_passage_table(sample_weights(q, a.m, a.n, cli.seed)?);
    let path = artifact_path(cli, "simulate.csv");
    let mut w = csv::Writer::from_writer(csv_with_config(&path, &config)?);
    w.write_record(["i", "j", "weight", "passage"])?;
    for i in 1..=a.m {
        for j in 1..=a.n {
            let (wt, g) = (field.weight(i, j)?, field.passage(i, j)?);
            w.write_record(&[i.to_string(), j.to_string(), wt.to_string(), g.to_string()])?;
        }
    }
    w.flush()?;
    let g = field.passage(a.m, a.n)?;
    Ok(Outcome { summary: format!("G({},{}) = {g}", a.m, a.n), artifact: path, exit_code: 0 })
}

fn mc_two_time(cli: &Cli, a: &McArgs, config: Value) -> Result<Outcome> {
    let spec = JointSpec { q: parse_q(&a.q)?, big_t: a.big_t, t1: a.t1, t2: a.t2, eta1: a.eta1, eta2: a.eta2 };
    let cells = mc_joint_cdf(spec, &a.xi1, &a.xi2, a.samples, cli.seed)?;
    let path = artifact_path(cli, "mc-two-time.csv");
    write_joint_csv(csv_with_config(&path, &config)?, &cells)?;
    let first = cells.first().map(|c| c.estimate);
    let summary = match first {
        Some(e) if cells.len() == 1 => format!("{} ± {}", e.value, e.std_error),
        _ => format!("{} cells written to {}", cells.len(), path.display()),
    };
    Ok(Outcome { summary, artifact: path, exit_code: 0 })
}

fn f2(cli: &Cli, a: &F2Args, config: Value) -> Result<Outcome> {
    let grid = F2Grid { cutoff: a.cutoff, nodes: a.nodes };
    let values = a.xi.iter().map(|&x| tracy_widom_f2(x, grid)).collect::<Result<Vec<_>>>()?;
    if let [v] = values[..] {
        let path = artifact_path(cli, "f2.json");
        write_json(&path, &json!({"config": config, "xi": a.xi[0], "value": v}))?;
        return Ok(Outcome { summary: format!("{v}"), artifact: path, exit_code: 0 });
    }
    let path = artifact_path(cli, "f2.csv");
    let mut w = csv::Writer::from_writer(csv_with_config(&path, &config)?);
    w.write_record(["xi", "f2"])?;
    for (x, v) in a.xi.iter().zip(&values) {
        w.write_record(&[x.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(Outcome {
        summary: format!("{} values written to {}", values.len(), path.display()),
        artifact: path,
        exit_code: 0,
    })
}

fn twotime_point(a: &TwoTimeArgs, xi1: f64, xi2: f64) -> Result<(TwoTimeParams, TwoTimeResult)> {
    let p = TwoTimeParams::from_scaled(xi1, a.eta1, xi2, a.eta2, a.alpha)?.with_delta_margin(a.delta_margin)?;
    let grid = GridSpec { cutoff: a.cutoff, nodes_per_side: a.nodes };
    let contour = ContourSpec { radius: a.radius, u_nodes: a.u_nodes, conjugate_symmetry: false };
    let r = match a.form {
        FormArg::K => eval_k_form(p, contour, grid)?,
        FormArg::Q => eval_q_form(p, contour, grid)?,
        FormArg::Dual => eval_k_form_dual(p, contour, grid)?,
    };
    Ok((p, r))
}

fn twotime(cli: &Cli, a: &TwoTimeArgs, config: Value) -> Result<Outcome> {
    if let ([xi1], [xi2]) = (&a.xi1[..], &a.xi2[..]) {
        let (p, mut r) = twotime_point(a, *xi1, *xi2)?;
        if !a.trace {
            r.diagnostics.trace.clear();
        }
        let path = artifact_path(cli, "twotime.json");
        write_json(
            &path,
            &json!({
                "config": config,
                "params": p,
                "value": r.value,
                "imag_residue": r.imag_residue,
                "grid": {"L": a.cutoff, "nodes": a.nodes},
                "contour": {"r": a.radius, "u_nodes": a.u_nodes},
                "diagnostics": r.diagnostics,
            }),
        )?;
        return Ok(Outcome { summary: format!("{}", r.value), artifact: path, exit_code: 0 });
    }
    let path = artifact_path(cli, "twotime.csv");
    let mut w = csv::Writer::from_writer(csv_with_config(&path, &config)?);
    w.write_record(["xi1", "xi2", "value", "imag_residue"])?;
    let mut count = 0;
    for &xi1 in &a.xi1 {
        for &xi2 in &a.xi2 {
            let (_, r) = twotime_point(a, xi1, xi2)?;
            w.write_record(&[xi1.to_string(), xi2.to_string(), r.value.to_string(), r.imag_residue.to_string()])?;
            count += 1;
        }
    }
    w.flush()?;
    Ok(Outcome { summary: format!("{count} values written to {}", path.display()), artifact: path, exit_code: 0 })
}

fn finite(cli: &Cli, a: &FiniteArgs, config: Value) -> Result<Outcome> {
    let case = FiniteCase::new(parse_rational(&a.q)?, a.m, a.n, a.big_m, a.big_n, a.a, a.big_a)?;
    let r = finite_result(&case)?;
    let path = artifact_path(cli, "finite.json");
    let mut out = serde_json::to_value(&r)?;
    out["config"] = config;
    write_json(&path, &out)?;
    Ok(Outcome { summary: r.p_exact, artifact: path, exit_code: 0 })
}

fn verify(cli: &Cli, a: &VerifyArgs, config: Value) -> Result<Outcome> {
    let options = VerifyOptions { mc_samples: a.samples, finite_mc_samples: a.finite_samples, seed: cli.seed };
    let report = run_criteria(a.suite, options, |r| eprintln!("{}", r.summary_line()));
    let path =
        artifact_path(cli, &format!("verify-{}.json", serde_json::to_value(a.suite)?.as_str().unwrap_or("suite")));
    let mut out = serde_json::to_value(&report)?;
    out["config"] = config;
    write_json(&path, &out)?;
    let failed: Vec<u32> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    let summary = if failed.is_empty() {
        format!("all {} criteria passed", report.criteria.len())
    } else {
        format!("failed criteria: {failed:?}")
    };
    Ok(Outcome { summary, artifact: path, exit_code: if failed.is_empty() { 0 } else { 3 } })
}
