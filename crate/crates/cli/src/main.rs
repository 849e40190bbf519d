//! Command-line front end: condition checks, exact and approximate counts,
//! convergence sweeps, and fixture generation.
//!
//! Exit codes: 0 success, 1 condition failure, 2 parse error, 3 work budget
//! exceeded.

mod report;

use clap::{Parser, Subcommand, ValueEnum};
use corrcount::count::CountError;
use corrcount::formats::{emit_lcol, emit_mrf_json, parse_lcol, parse_mrf_json, FormatError};
use corrcount::gen::GraphKind;
use corrcount::mrf::{gamma_condition, potts, potts_condition, PottsParams};
use corrcount::oracle::{ln_big, plan_elimination, Oracle, OracleError};
use corrcount::phi::{PhiConstants, PhiEngine};
use corrcount::{
    check_list_condition, compute_z, count_color, marginal_error_profile,
    mrf_marginal_error_profile, ColoringInstance, MrfInstance,
};
use report::{format_ms, sci_from_ln};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "corrcount",
    about = "Deterministic approximate counting of list colorings and MRF partition functions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Lcol,
    Mrf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the admissibility conditions for an instance file
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        #[arg(long, default_value_t = 20.0)]
        beta: f64,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Exact partition function via variable elimination
    Exact {
        file: PathBuf,
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Approximate count via the depth-truncated recursion
    Count {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        #[arg(long, default_value_t = 20.0)]
        beta: f64,
        /// Count even when the admissibility verdicts fail
        #[arg(long)]
        force: bool,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Depth sweep comparing the recursion against the exact oracle (CSV)
    Converge {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        #[arg(long, default_value_t = 20.0)]
        beta: f64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Generate a coloring instance file on standard output
    Gen {
        /// path, cycle, star, or random-triangle-free
        #[arg(long)]
        kind: String,
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        #[arg(long, default_value_t = 26)]
        q: usize,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        #[arg(long, default_value_t = 20.0)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a Potts MRF file from a graph file on standard output
    Potts {
        graph_file: PathBuf,
        #[arg(long)]
        q: usize,
        /// inverse temperature (negative is antiferromagnetic)
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
}

/// A failure plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::new(2, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::WidthTooLarge { .. } => 3,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<CountError> for Failure {
    fn from(e: CountError) -> Self {
        match e {
            CountError::ConditionViolated(_) => Failure::new(
                1,
                format!("{e} -- rerun with --force to count anyway"),
            ),
            CountError::Oracle(o) => o.into(),
            other => Failure::new(1, other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

enum Instance {
    Coloring(ColoringInstance),
    Mrf(MrfInstance),
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))
}

/// Loads an instance, inferring the kind from the extension
/// (`.lcol` / `.mrf.json` / `.json`) unless overridden.
fn load_instance(path: &Path, format: Option<FormatArg>) -> Result<Instance, Failure> {
    let name = path.to_string_lossy();
    let kind = match format {
        Some(f) => f,
        None if name.ends_with(".lcol") => FormatArg::Lcol,
        None if name.ends_with(".json") => FormatArg::Mrf,
        None => {
            return Err(Failure::new(
                2,
                format!("cannot infer format of {name}; pass --format"),
            ))
        }
    };
    let text = read_file(path)?;
    Ok(match kind {
        FormatArg::Lcol => Instance::Coloring(parse_lcol(&text)?),
        FormatArg::Mrf => Instance::Mrf(parse_mrf_json(&text)?),
    })
}

fn describe(instance: &Instance) -> String {
    match instance {
        Instance::Coloring(inst) => format!(
            "coloring, {} nodes, {} edges, q = {}, max degree {}",
            inst.node_count(),
            inst.graph().edge_count(),
            inst.q(),
            inst.graph().max_degree()
        ),
        Instance::Mrf(m) => format!(
            "mrf, {} nodes, {} edges, alphabet {}, max degree {}",
            m.node_count(),
            m.graph().edge_count(),
            m.alphabet(),
            m.graph().max_degree()
        ),
    }
}

/// Runs `body` inside a rayon pool of the requested size; `None` keeps the
/// default pool. Results are deterministic for every thread count.
fn with_threads<T>(threads: Option<usize>, body: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match threads {
        None => body(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(body),
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Check {
            file,
            alpha,
            beta,
            format,
        } => cmd_check(&file, alpha, beta, format),
        Command::Exact {
            file,
            budget,
            format,
        } => cmd_exact(&file, budget, format),
        Command::Count {
            file,
            depth,
            alpha,
            beta,
            force,
            threads,
            format,
        } => with_threads(threads, || cmd_count(&file, depth, alpha, beta, force, format)),
        Command::Converge {
            file,
            max_depth,
            alpha,
            beta,
            threads,
            budget,
            format,
        } => with_threads(threads, || {
            cmd_converge(&file, max_depth, alpha, beta, budget, format)
        }),
        Command::Gen {
            kind,
            nodes,
            max_degree,
            q,
            alpha,
            beta,
            seed,
        } => cmd_gen(&kind, nodes, max_degree, q, alpha, beta, seed),
        Command::Potts { graph_file, q, b } => cmd_potts(&graph_file, q, b),
    }
}

fn cmd_check(
    file: &Path,
    alpha: f64,
    beta: f64,
    format: Option<FormatArg>,
) -> Result<u8, Failure> {
    let start = Instant::now();
    let instance = load_instance(file, format)?;
    println!("command: check");
    println!("file: {}", file.display());
    println!("instance: {}", describe(&instance));
    let code = match &instance {
        Instance::Coloring(inst) => {
            if let Err(e) = inst.graph().validate() {
                println!("graph validation: FAIL ({e})");
                println!("verdict: fail");
                return Ok(1);
            }
            println!("graph validation: pass (simple, symmetric, triangle-free)");
            let report = check_list_condition(inst, alpha, beta);
            println!("alpha = {alpha}, beta = {beta}");
            println!(
                "list-size condition: {}",
                if report.list_size_ok { "pass" } else { "FAIL" }
            );
            println!(
                "beta condition: {} (lhs = {:.6})",
                if report.beta_ok { "pass" } else { "FAIL" },
                corrcount::beta_condition_lhs(alpha, beta)
            );
            match (report.epsilon0, report.epsilon) {
                (Some(e0), Some(e)) => println!("epsilon0 = {e0:.8}, epsilon = {e:.8}"),
                _ => println!("epsilon0, epsilon: not derivable at these parameters"),
            }
            if report.passes() {
                println!("verdict: pass");
                0
            } else if !report.beta_ok {
                println!("verdict: fail (beta condition failed)");
                1
            } else {
                println!("verdict: fail (list-size condition failed)");
                1
            }
        }
        Instance::Mrf(m) => {
            let report = gamma_condition(m);
            println!(
                "c_f = {:.9}, max degree = {}, alphabet = {}",
                report.c_f, report.delta_max, report.alphabet
            );
            println!(
                "gamma = {:.9} ({} 1): {}",
                report.gamma,
                if report.gamma < 1.0 { "<" } else { ">=" },
                if report.passes { "pass" } else { "FAIL" }
            );
            println!(
                "verdict: {}",
                if report.passes { "pass" } else { "fail" }
            );
            u8::from(!report.passes)
        }
    };
    println!("time: {}", format_ms(start.elapsed()));
    Ok(code)
}

fn cmd_exact(file: &Path, budget: u64, format: Option<FormatArg>) -> Result<u8, Failure> {
    let start = Instant::now();
    let instance = load_instance(file, format)?;
    let oracle = Oracle::with_budget(budget);
    println!("command: exact");
    println!("file: {}", file.display());
    println!("instance: {}", describe(&instance));
    match &instance {
        Instance::Coloring(inst) => {
            let plan = plan_elimination(inst.graph());
            let z = oracle.exact_z_coloring(inst)?;
            println!("induced width: {}", plan.induced_width);
            println!("Z = {z}");
            let ln = ln_big(&z);
            if ln.is_finite() {
                println!("log Z = {ln:.12}");
            }
        }
        Instance::Mrf(m) => {
            let plan = plan_elimination(m.graph());
            let log_z = oracle.exact_log_z_mrf(m)?;
            println!("induced width: {}", plan.induced_width);
            println!("Z = {}", sci_from_ln(log_z));
            println!("log Z = {log_z:.12}");
        }
    }
    println!("time: {}", format_ms(start.elapsed()));
    Ok(0)
}

fn cmd_count(
    file: &Path,
    depth: usize,
    alpha: f64,
    beta: f64,
    force: bool,
    format: Option<FormatArg>,
) -> Result<u8, Failure> {
    let start = Instant::now();
    let instance = load_instance(file, format)?;
    println!("command: count");
    println!("file: {}", file.display());
    println!("instance: {}", describe(&instance));
    match instance {
        Instance::Coloring(inst) => {
            if let Err(e) = inst.graph().validate() {
                if force {
                    println!("graph validation: FAIL ({e}), forced anyway");
                } else {
                    return Err(Failure::new(
                        1,
                        format!("{e} -- rerun with --force to count anyway"),
                    ));
                }
            }
            let constants = PhiConstants::derive_or_fallback(alpha, beta);
            if constants.derived.is_none() {
                println!(
                    "constants: not derivable at alpha = {alpha}, beta = {beta}; \
                     clamping at 1/beta only"
                );
            }
            let engine = PhiEngine::new(constants);
            let result = count_color(&inst, depth, &engine, force)?;
            print_count_result(&result, start);
        }
        Instance::Mrf(m) => {
            let result = compute_z(&m, depth)?;
            if let corrcount::RegimeReport::Mrf(rep) = &result.report {
                println!(
                    "gamma = {:.9}: {}",
                    rep.gamma,
                    if rep.passes {
                        "pass"
                    } else {
                        "FAIL (estimate carries no decay guarantee)"
                    }
                );
            }
            print_count_result(&result, start);
        }
    }
    Ok(0)
}

fn print_count_result(result: &corrcount::CountResult, start: Instant) {
    println!("depth used: {}", result.depth_used);
    println!("log Z_hat = {:.12}", result.log_z_hat);
    println!("Z_hat = {}", sci_from_ln(result.log_z_hat));
    match result.theoretical_error {
        Some(bound) => println!("theoretical |log Z_hat - log Z| bound: {bound:.6e}"),
        None => println!("theoretical error bound: not available out of regime"),
    }
    println!("steps: {}", result.steps.len());
    println!("time: {}", format_ms(start.elapsed()));
}

fn cmd_converge(
    file: &Path,
    max_depth: usize,
    alpha: f64,
    beta: f64,
    budget: u64,
    format: Option<FormatArg>,
) -> Result<u8, Failure> {
    let instance = load_instance(file, format)?;
    let oracle = Oracle::with_budget(budget);
    println!("d,max_abs_log_marginal_err,log_z_hat,rel_err_vs_exact,bound");
    match instance {
        Instance::Coloring(inst) => {
            let constants = PhiConstants::derive_or_fallback(alpha, beta);
            let engine = PhiEngine::new(constants);
            let profile = marginal_error_profile(&inst, &engine, max_depth, &oracle)?;
            let ln_exact = ln_big(&oracle.exact_z_coloring(&inst)?);
            for row in &profile {
                let result = count_color(&inst, row.depth, &engine, true)?;
                let rel = if ln_exact.is_finite() {
                    format!("{:.6e}", ((result.log_z_hat - ln_exact).exp() - 1.0).abs())
                } else {
                    String::new()
                };
                let bound = constants
                    .derived
                    .map(|c| {
                        format!(
                            "{:.6e}",
                            corrcount::theoretical_error_bound(
                                inst.q(),
                                inst.graph().max_degree(),
                                c.beta,
                                c.epsilon,
                                row.depth,
                                inst.graph().max_degree(),
                            )
                        )
                    })
                    .unwrap_or_default();
                println!(
                    "{},{:.6e},{:.12},{},{}",
                    row.depth, row.max_abs_log_error, result.log_z_hat, rel, bound
                );
            }
        }
        Instance::Mrf(m) => {
            let gamma = gamma_condition(&m);
            let profile = mrf_marginal_error_profile(&m, max_depth, &oracle)?;
            let ln_exact = oracle.exact_log_z_mrf(&m)?;
            for row in &profile {
                let result = compute_z(&m, row.depth)?;
                let rel = ((result.log_z_hat - ln_exact).exp() - 1.0).abs();
                let bound = if gamma.passes {
                    format!(
                        "{:.6e}",
                        corrcount::mrf_error_bound(
                            gamma.c_f,
                            m.c_phi(),
                            gamma.delta_max,
                            m.alphabet(),
                            gamma.gamma,
                            row.depth,
                        )
                    )
                } else {
                    String::new()
                };
                println!(
                    "{},{:.6e},{:.12},{:.6e},{}",
                    row.depth, row.max_abs_log_error, result.log_z_hat, rel, bound
                );
            }
        }
    }
    Ok(0)
}

fn cmd_gen(
    kind: &str,
    nodes: usize,
    max_degree: usize,
    q: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> Result<u8, Failure> {
    let kind: GraphKind = kind.parse().map_err(|e: String| Failure::new(2, e))?;
    let inst = corrcount::gen::generate_instance(kind, nodes, max_degree, q, alpha, beta, seed)
        .map_err(|e| Failure::new(1, e.to_string()))?;
    print!("{}", emit_lcol(&inst));
    Ok(0)
}

fn cmd_potts(graph_file: &Path, q: usize, b: f64) -> Result<u8, Failure> {
    let text = read_file(graph_file)?;
    let inst = parse_lcol(&text)?;
    let params = PottsParams::new(q, b).map_err(|e| Failure::new(2, e.to_string()))?;
    let m = potts(inst.graph(), &params);
    let delta = inst.graph().max_degree();
    let report = gamma_condition(&m);
    if potts_condition(q, delta, b) {
        eprintln!("passes (gamma = {:.6})", report.gamma);
    } else {
        eprintln!("fails (gamma = {:.6})", report.gamma);
    }
    print!("{}", emit_mrf_json(&m));
    Ok(0)
}
