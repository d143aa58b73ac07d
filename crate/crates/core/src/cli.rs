//! Command-line harness: single solves, convergence studies and condition
//! number sweeps, written as CSV.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::potential::evaluate_potential;
use crate::problems::{example_problem, reference_solution, ProblemSpec};
use crate::quadrature::QuadratureRule;
use crate::system::{assemble, SolverConfig};

pub const SOLVE_HEADER: &str =
    "example,m,c,epsilon,delta,cond_inf,psi_norm_inf,corner_mismatch,residual_inf,eval_x,eval_y,abs_error";
pub const SWEEP_HEADER: &str = "example,phi,m,cond_inf";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "corner-nystrom", version, about = "Nyström solver for Laplace problems on domains with a corner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one example at one m and report errors at the evaluation points.
    Solve(SolveArgs),
    /// Solve one example for every m in a list.
    Convergence(ConvergenceArgs),
    /// Condition numbers across interior angles for examples 4 and 5.
    CondSweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub example: u8,
    /// Override the example's c.
    #[arg(long)]
    pub c: Option<f64>,
    /// Override the example's epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Override the example's tangent-deviation bound.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Eliminate a_{2,0} and average the two corner rows.
    #[arg(long)]
    pub constrained: bool,
    /// CSV output path; stdout only when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    /// Evaluation point `x,y`; repeatable. Defaults to the example's points.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub eval: Vec<Vec2>,
    /// Write the quadrature rule as `k,node,weight`.
    #[arg(long)]
    pub dump_rule: Option<PathBuf>,
    /// Write `<prefix>_matrix.csv` and `<prefix>_rhs.csv`.
    #[arg(long)]
    pub dump_system: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated list of m values.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub m_list: Vec<usize>,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub eval: Vec<Vec2>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 128)]
    pub m: usize,
    /// Single angle; shorthand for a one-step sweep.
    #[arg(long, conflicts_with_all = ["phi_start", "phi_end", "phi_steps"])]
    pub phi: Option<f64>,
    #[arg(long)]
    pub phi_start: Option<f64>,
    #[arg(long)]
    pub phi_end: Option<f64>,
    #[arg(long)]
    pub phi_steps: Option<usize>,
}

fn parse_point(s: &str) -> std::result::Result<Vec2, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x in {s:?}: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y in {s:?}: {e}"))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(format!("non-finite point {s:?}"));
    }
    Ok(Vec2::new(x, y))
}

/// Error at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointError {
    pub point: Vec2,
    pub value: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub near_boundary: bool,
}

/// Wall time spent in each phase of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub setup: Duration,
    pub assemble: Duration,
    pub solve: Duration,
    pub evaluate: Duration,
}

/// Results of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub example: u8,
    pub m: usize,
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub constrained: bool,
    pub cond_inf: f64,
    pub psi_norm_inf: f64,
    pub corner_mismatch: f64,
    pub residual_inf: f64,
    pub errors: Vec<PointError>,
    pub timings: PhaseTimings,
}

impl ExperimentReport {
    /// CSV rows (no header), one per evaluation point.
    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let head = format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.example,
            self.m,
            self.c,
            self.epsilon,
            self.delta,
            self.cond_inf,
            self.psi_norm_inf,
            self.corner_mismatch,
            self.residual_inf
        );
        if self.errors.is_empty() {
            writeln!(out, "{head},,,")?;
        }
        for e in &self.errors {
            writeln!(
                out,
                "{head},{:.16e},{:.16e},{:.16e}",
                e.point.x, e.point.y, e.abs_error
            )?;
        }
        Ok(())
    }

    fn print_table<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "example {}  m = {}  c = {}  eps = {}  delta = {:e}{}",
            self.example,
            self.m,
            self.c,
            self.epsilon,
            self.delta,
            if self.constrained { "  (constrained)" } else { "" }
        )?;
        writeln!(out, "  cond_inf        {:.6}", self.cond_inf)?;
        writeln!(out, "  psi_norm_inf    {:.12e}", self.psi_norm_inf)?;
        writeln!(out, "  corner_mismatch {:.3e}", self.corner_mismatch)?;
        writeln!(out, "  residual_inf    {:.3e}", self.residual_inf)?;
        for e in &self.errors {
            writeln!(
                out,
                "  ({:>8}, {:>8})  u_m = {:>22.15e}  error = {:.3e}{}",
                e.point.x,
                e.point.y,
                e.value,
                e.abs_error,
                if e.near_boundary { "  [near boundary]" } else { "" }
            )?;
        }
        let t = &self.timings;
        writeln!(
            out,
            "  time: setup {:.3}s  assemble {:.3}s  solve {:.3}s  evaluate {:.3}s",
            t.setup.as_secs_f64(),
            t.assemble.as_secs_f64(),
            t.solve.as_secs_f64(),
            t.evaluate.as_secs_f64()
        )
    }
}

/// Inputs of one solve.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub example: u8,
    pub m: usize,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub constrained: bool,
    /// `false` bypasses the near-corner blend.
    pub modified: bool,
    /// Empty means the example's own points.
    pub eval: Vec<Vec2>,
    pub dump_rule: Option<PathBuf>,
    pub dump_system: Option<PathBuf>,
}

impl SolveOptions {
    pub fn new(example: u8, m: usize) -> Self {
        Self {
            example,
            m,
            c: None,
            epsilon: None,
            delta: None,
            constrained: false,
            modified: true,
            eval: Vec::new(),
            dump_rule: None,
            dump_system: None,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// split → kernels → assemble → solve → evaluate.
pub fn run_solve(opts: &SolveOptions) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let spec = example_problem(opts.example, None)?;
    let g = spec.boundary_data()?;
    let p = spec.default_params;
    let (c, epsilon, delta) = (
        opts.c.unwrap_or(p.c),
        opts.epsilon.unwrap_or(p.epsilon),
        opts.delta.unwrap_or(p.delta),
    );
    let config = SolverConfig::new(opts.m, c, epsilon)?
        .with_constrained(opts.constrained)
        .with_modified(opts.modified);
    let kset = spec.kernels(delta)?;
    let rule = QuadratureRule::lobatto(opts.m)?;
    if let Some(path) = &opts.dump_rule {
        let mut w = create(path)?;
        rule.write_csv(&mut w)?;
        w.flush()?;
    }
    let setup = t0.elapsed();

    let t1 = Instant::now();
    let sys = assemble(&kset, &rule, &config, &g)?;
    if let Some(prefix) = &opts.dump_system {
        let base = prefix.to_string_lossy();
        let mut w = create(Path::new(&format!("{base}_matrix.csv")))?;
        sys.write_matrix_csv(&mut w)?;
        w.flush()?;
        let mut w = create(Path::new(&format!("{base}_rhs.csv")))?;
        sys.write_rhs_csv(&mut w)?;
        w.flush()?;
    }
    let assemble_time = t1.elapsed();

    let t2 = Instant::now();
    let (sol, cond) = sys.solve_with_condition(true)?;
    let cond_inf = cond.unwrap_or(f64::NAN);
    let solve_time = t2.elapsed();

    let t3 = Instant::now();
    let psi_norm_inf = sol.psi_norm_inf();
    let points = if opts.eval.is_empty() {
        spec.eval_points.clone()
    } else {
        opts.eval.clone()
    };
    let errors = points
        .iter()
        .map(|&pt| point_error(&spec, &sol, pt))
        .collect::<Result<Vec<_>>>()?;
    let evaluate = t3.elapsed();

    Ok(ExperimentReport {
        example: opts.example,
        m: opts.m,
        c,
        epsilon,
        delta,
        constrained: opts.constrained,
        cond_inf,
        psi_norm_inf,
        corner_mismatch: sol.corner_mismatch,
        residual_inf: sol.residual_inf,
        errors,
        timings: PhaseTimings {
            setup,
            assemble: assemble_time,
            solve: solve_time,
            evaluate,
        },
    })
}

fn point_error(
    spec: &ProblemSpec,
    sol: &crate::system::NystromSolution,
    point: Vec2,
) -> Result<PointError> {
    let ev = evaluate_potential(sol, point)?;
    let reference = reference_solution(spec, point)?;
    Ok(PointError {
        point,
        value: ev.value,
        reference,
        abs_error: (ev.value - reference).abs(),
        near_boundary: ev.near_boundary,
    })
}

/// One report per m, in the order given.
pub fn run_convergence(base: &SolveOptions, m_list: &[usize]) -> Result<Vec<ExperimentReport>> {
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("--m-list must not be empty".into()));
    }
    m_list
        .iter()
        .map(|&m| {
            let mut o = base.clone();
            o.m = m;
            run_solve(&o)
        })
        .collect()
}

/// One row of a condition-number sweep; `cond_inf` is `None` when the angle
/// was rejected or the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub example: u8,
    pub phi: f64,
    pub m: usize,
    pub cond_inf: Option<f64>,
    pub message: Option<String>,
}

/// Inputs of a condition-number sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub example: u8,
    pub m: usize,
    pub phis: Vec<f64>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub constrained: bool,
}

/// `cond_inf(A_m)` of example 4 or 5 at a single interior angle.
pub fn family_condition(
    example: u8,
    phi: f64,
    m: usize,
    c: Option<f64>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    constrained: bool,
) -> Result<f64> {
    let spec = example_problem(example, Some(phi))?;
    let p = spec.default_params;
    let config = SolverConfig::new(m, c.unwrap_or(p.c), epsilon.unwrap_or(p.epsilon))?
        .with_constrained(constrained);
    let kset = spec.kernels(delta.unwrap_or(p.delta))?;
    let rule = QuadratureRule::lobatto(m)?;
    // The datum does not enter the matrix.
    let g = crate::system::BoundaryData::constant(0.0);
    assemble(&kset, &rule, &config, &g)?.condition_inf()
}

/// Equally spaced angles from `start` to `end` inclusive.
pub fn sweep_angles(start: f64, end: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("--phi-steps must be at least 1".into()));
    }
    if !(start.is_finite() && end.is_finite()) {
        return Err(Error::InvalidArgument("angle range must be finite".into()));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (end - start) / (steps - 1) as f64;
    Ok((0..steps).map(|k| start + h * k as f64).collect())
}

/// Rows come back in angle order; failed angles carry a message instead of a value.
pub fn run_cond_sweep(opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    if !matches!(opts.example, 4 | 5) {
        return Err(Error::InvalidArgument(
            "cond-sweep needs --example 4 or 5".into(),
        ));
    }
    // Validate m, c and epsilon once so that they are reported as usage errors.
    SolverConfig::new(opts.m, opts.c.unwrap_or(200.0), opts.epsilon.unwrap_or(0.1))?;
    Ok(opts
        .phis
        .par_iter()
        .map(|&phi| {
            let r = family_condition(
                opts.example,
                phi,
                opts.m,
                opts.c,
                opts.epsilon,
                opts.delta,
                opts.constrained,
            );
            match r {
                Ok(c) => SweepRow {
                    example: opts.example,
                    phi,
                    m: opts.m,
                    cond_inf: Some(c),
                    message: None,
                },
                Err(e) => {
                    warn!("phi = {phi}: skipped ({e})");
                    SweepRow {
                        example: opts.example,
                        phi,
                        m: opts.m,
                        cond_inf: None,
                        message: Some(e.to_string()),
                    }
                }
            }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        let cond = r.cond_inf.map_or("NaN".to_string(), |c| format!("{c:.16e}"));
        writeln!(out, "{},{:.16e},{},{cond}", r.example, r.phi, r.m)?;
    }
    Ok(())
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Unsupported(_) | Error::SmoothPoint { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn solve_options(common: &CommonArgs, m: usize, eval: &[Vec2]) -> SolveOptions {
    SolveOptions {
        c: common.c,
        epsilon: common.epsilon,
        delta: common.delta,
        constrained: common.constrained,
        eval: eval.to_vec(),
        ..SolveOptions::new(common.example, m)
    }
}

fn write_output(path: Option<&Path>, csv: &[u8]) -> Result<()> {
    if let Some(path) = path {
        let mut w = create(path)?;
        w.write_all(csv)?;
        w.flush()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Solve(a) => {
            let mut opts = solve_options(&a.common, a.m, &a.eval);
            opts.dump_rule = a.dump_rule.clone();
            opts.dump_system = a.dump_system.clone();
            let report = run_solve(&opts)?;
            report.print_table(&mut out)?;
            let mut csv = Vec::new();
            writeln!(csv, "{SOLVE_HEADER}")?;
            report.write_csv_rows(&mut csv)?;
            write_output(a.common.out.as_deref(), &csv)?;
        }
        Command::Convergence(a) => {
            let base = solve_options(&a.common, 0, &a.eval);
            let reports = run_convergence(&base, &a.m_list)?;
            let mut csv = Vec::new();
            writeln!(csv, "{SOLVE_HEADER}")?;
            for r in &reports {
                r.print_table(&mut out)?;
                r.write_csv_rows(&mut csv)?;
            }
            write_output(a.common.out.as_deref(), &csv)?;
        }
        Command::CondSweep(a) => {
            let phis = match (a.phi, a.phi_start, a.phi_end, a.phi_steps) {
                (Some(phi), ..) => vec![phi],
                (None, Some(s), Some(e), Some(n)) => sweep_angles(s, e, n)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "cond-sweep needs --phi or all of --phi-start, --phi-end, --phi-steps".into(),
                    ))
                }
            };
            let rows = run_cond_sweep(&SweepOptions {
                example: a.common.example,
                m: a.m,
                phis,
                c: a.common.c,
                epsilon: a.common.epsilon,
                delta: a.common.delta,
                constrained: a.common.constrained,
            })?;
            writeln!(out, "{:>4} {:>20} {:>6} {:>14}", "ex", "phi/pi", "m", "cond_inf")?;
            for r in &rows {
                match (r.cond_inf, &r.message) {
                    (Some(c), _) => writeln!(
                        out,
                        "{:>4} {:>20.15} {:>6} {:>14.6}",
                        r.example,
                        r.phi / std::f64::consts::PI,
                        r.m,
                        c
                    )?,
                    (None, msg) => writeln!(
                        out,
                        "{:>4} {:>20.15} {:>6} {:>14}  warning: {}",
                        r.example,
                        r.phi / std::f64::consts::PI,
                        r.m,
                        "NaN",
                        msg.as_deref().unwrap_or("")
                    )?,
                }
            }
            let mut csv = Vec::new();
            write_sweep_csv(&rows, &mut csv)?;
            write_output(a.common.out.as_deref(), &csv)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("-0.01,0").unwrap(), Vec2::new(-0.01, 0.0));
        assert_eq!(parse_point(" 0.5 , 2").unwrap(), Vec2::new(0.5, 2.0));
        assert!(parse_point("1").is_err());
        assert!(parse_point("a,1").is_err());
        assert!(parse_point("inf,1").is_err());
    }

    #[test]
    fn angles_are_inclusive() {
        let a = sweep_angles(1.0, 2.0, 3).unwrap();
        assert_eq!(a, vec![1.0, 1.5, 2.0]);
        assert_eq!(sweep_angles(1.0, 5.0, 1).unwrap(), vec![1.0]);
        assert!(sweep_angles(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "corner-nystrom",
            "solve",
            "--example",
            "1",
            "--m",
            "32",
            "--eval",
            "-0.01,0",
            "--eval",
            "0.4,0.8",
            "--constrained",
        ])
        .unwrap();
        match cli.command {
            Command::Solve(a) => {
                assert_eq!(a.m, 32);
                assert_eq!(a.eval.len(), 2);
                assert!(a.common.constrained);
            }
            _ => panic!("wrong subcommand"),
        }
        let cli = Cli::try_parse_from([
            "corner-nystrom",
            "convergence",
            "--example",
            "2",
            "--m-list",
            "64,128",
        ])
        .unwrap();
        match cli.command {
            Command::Convergence(a) => assert_eq!(a.m_list, vec![64, 128]),
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["corner-nystrom", "convergence", "--example", "2"]).is_err());
        assert!(Cli::try_parse_from([
            "corner-nystrom",
            "cond-sweep",
            "--example",
            "4",
            "--phi",
            "1",
            "--phi-start",
            "1"
        ])
        .is_err());
    }

    #[test]
    fn usage_errors_map_to_exit_two() {
        assert_eq!(run(["corner-nystrom", "solve"]), EXIT_USAGE);
        assert_eq!(run(["corner-nystrom", "solve", "--example", "9"]), EXIT_USAGE);
        assert_eq!(
            run(["corner-nystrom", "cond-sweep", "--example", "2", "--phi", "1"]),
            EXIT_USAGE
        );
        assert_eq!(exit_code(&Error::Singular { pivot: 0 }), EXIT_NUMERICAL);
    }
}
