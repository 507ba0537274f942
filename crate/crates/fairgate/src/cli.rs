//! Command-line surface: solve, sweep, simulate, stationary, gen, ingest.
//!
//! Exit codes: 0 on success, 1 on validation failures (bad parameters or
//! invalid input data), 2 on I/O failures. Commands that write files also
//! write a `<output>.manifest.json` recording parameters, input digests,
//! seeds, and every produced file.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fairgate_core::dynamics::{
    check_birth_death, check_growth_condition, contraction_factor, simulate,
    stationary_candidates, step, tv_distance,
};
use fairgate_core::genlab::{
    band_kernel, perturb_kernel, random_kernel, sample_band_params, GENERATOR_VERSION,
};
use fairgate_core::solver::{
    beta_e, beta_s, is_effective, is_fully_satisfactory, min_lambda_effective,
    min_lambda_satisfactory, normalize_orientation, solve_penalized, utility_max,
    DegenerateDisparity,
};
use fairgate_core::{Group, Penalty, PopulationState, QualificationGrid};

use crate::ingest::{load_population, IngestConfig, ZeroPolicy};
use crate::io::{
    read_kernel, read_population, sweep_table, to_json_bytes, trajectory_table, write_atomic,
    write_kernel, write_population, PopulationJson, SolutionJson,
};
use crate::manifest::RunManifest;
use crate::CliError;

#[derive(Parser)]
#[command(
    name = "fairgate",
    version,
    about = "Exact penalized-selection solver, regulatory thresholds, and population dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the penalized selection problem for one population
    Solve(SolveArgs),
    /// Sweep lambda and tabulate `lambda delta objective`
    Sweep(SweepArgs),
    /// Simulate the myopic dynamics and tabulate `t delta profit utility tv`
    Simulate(SimulateArgs),
    /// Contraction, birth-death, and stationary-state diagnostics of a kernel
    Stationary(StationaryArgs),
    /// Generate dynamics kernels
    Gen(GenArgs),
    /// Build a population JSON from a CSV table
    Ingest(IngestArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Population JSON file
    #[arg(long)]
    population: PathBuf,
    /// Penalty: linear | power:P | quadratic | hinge:T | exponential
    #[arg(long)]
    penalty: String,
    /// Penalty scale, >= 0
    #[arg(long)]
    lambda: f64,
    /// Write the solution JSON here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    population: PathBuf,
    /// Penalty: linear | power:P | quadratic | hinge:T | exponential
    #[arg(long)]
    penalty: String,
    /// Inclusive lambda grid as start:stop:step
    #[arg(long)]
    lambda_grid: String,
    /// Write the table here (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    population: PathBuf,
    #[arg(long)]
    kernel: PathBuf,
    /// Penalty: linear | power:P | quadratic | hinge:T | exponential
    #[arg(long)]
    penalty: String,
    #[arg(long)]
    lambda: f64,
    /// Number of steps to simulate
    #[arg(long)]
    t_max: usize,
    /// Early-stop threshold on the per-step total-variation change
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Write the trajectory table here (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final population state here
    #[arg(long)]
    final_state: Option<PathBuf>,
}

#[derive(Args)]
struct StationaryArgs {
    #[arg(long)]
    kernel: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    command: GenCommand,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Homogeneous band kernel from the chained-uniform parameter sampler
    Band {
        #[arg(long, env = "FAIRGATE_SEED")]
        seed: u64,
        /// Comma-separated qualification levels, e.g. --grid=-2,-1,2
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dense kernel with every row drawn uniformly from the simplex interior
    Random {
        #[arg(long, env = "FAIRGATE_SEED")]
        seed: u64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gaussian perturbation of an existing kernel
    Perturb {
        /// Kernel JSON to perturb
        #[arg(long)]
        kernel: PathBuf,
        /// Noise standard deviation
        #[arg(long)]
        sigma: f64,
        #[arg(long, env = "FAIRGATE_SEED")]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct IngestArgs {
    /// CSV file with a header row
    #[arg(long)]
    csv: PathBuf,
    /// Column holding the group label
    #[arg(long)]
    group_col: String,
    /// Raw labels mapped to group A
    #[arg(long, value_delimiter = ',')]
    group_a: Vec<String>,
    /// Raw labels mapped to group B (default: everything else)
    #[arg(long, value_delimiter = ',')]
    group_b: Option<Vec<String>>,
    /// Column holding the raw value
    #[arg(long)]
    value_col: String,
    /// Subtracted from raw values before binning
    #[arg(long, default_value_t = 2.95)]
    offset: f64,
    /// Width of the qualification bins
    #[arg(long, default_value_t = 0.1)]
    bin_width: f64,
    /// error | nudge:EPS, for rows whose qualification bins to zero
    #[arg(long, default_value = "error")]
    zero_policy: String,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Stationary(args) => cmd_stationary(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Ingest(args) => cmd_ingest(args),
    }
}

fn parse_penalty(spec: &str) -> Result<Penalty, CliError> {
    let (kind, param) = match spec.split_once(':') {
        Some((kind, param)) => (kind, Some(param)),
        None => (spec, None),
    };
    let parse_param = |what: &str| -> Result<f64, CliError> {
        let raw = param
            .ok_or_else(|| CliError::validation(format!("penalty {kind} needs a {what}, e.g. {kind}:0.5")))?;
        raw.parse()
            .map_err(|_| CliError::validation(format!("bad {what} {raw:?} in penalty {spec:?}")))
    };
    match kind {
        "linear" => Ok(Penalty::Linear),
        "quadratic" => Ok(Penalty::quadratic()),
        "power" => Ok(Penalty::power(parse_param("exponent")?)?),
        "hinge" => Ok(Penalty::hinge(parse_param("threshold")?)?),
        "exponential" | "exp" => Ok(Penalty::Exponential),
        _ => Err(CliError::validation(format!(
            "unknown penalty {spec:?}; use linear, power:P, quadratic, hinge:T, or exponential"
        ))),
    }
}

fn parse_lambda(lambda: f64) -> Result<f64, CliError> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(lambda)
    } else {
        Err(CliError::validation(format!("lambda must be finite and >= 0, got {lambda}")))
    }
}

fn parse_lambda_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(CliError::validation(format!(
            "lambda grid must be start:stop:step, got {spec:?}"
        )));
    };
    let parse = |raw: &str| -> Result<f64, CliError> {
        raw.parse()
            .map_err(|_| CliError::validation(format!("bad number {raw:?} in lambda grid")))
    };
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if step.is_nan() || step <= 0.0 {
        return Err(CliError::validation(format!("lambda grid step must be > 0, got {step}")));
    }
    if start < 0.0 {
        return Err(CliError::validation(format!("lambda grid must start at >= 0, got {start}")));
    }
    if (stop - start) / step > 1e7 {
        return Err(CliError::validation(format!(
            "lambda grid {spec:?} has more than 1e7 points"
        )));
    }
    let mut grid = Vec::new();
    let mut k = 0u64;
    loop {
        let value = start + k as f64 * step;
        if value > stop + step * 1e-9 {
            break;
        }
        grid.push(value);
        k += 1;
    }
    Ok(grid)
}

fn parse_grid(values: &[f64]) -> Result<QualificationGrid, CliError> {
    Ok(QualificationGrid::new(values.to_vec())?)
}

/// Rounds away float dust for the human-readable summary; files keep full
/// precision.
fn compact(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded = format!("{x:.12}");
    let trimmed = rounded.trim_end_matches('0').trim_end_matches('.');
    if trimmed == "-0" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

fn threshold_line(name: &str, value: Result<f64, DegenerateDisparity>) -> String {
    match value {
        Ok(v) => format!("{name} = {}", compact(v)),
        Err(_) => format!("{name} = undefined (delta_um = 0)"),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let state = read_population(&args.population)?;
    let penalty = parse_penalty(&args.penalty)?;
    let lambda = parse_lambda(args.lambda)?;
    let solution = solve_penalized(&state, &penalty, lambda);

    let (normalized, _) = normalize_orientation(&state);
    let um = utility_max(&normalized);
    println!("u_um = {}", compact(um.utility));
    println!("delta_um = {}", compact(um.delta));
    println!("{}", threshold_line("beta_e", beta_e(&state)));
    println!("{}", threshold_line("beta_s", beta_s(&state)));
    println!(
        "{}",
        threshold_line("min_lambda_effective", min_lambda_effective(&state, &penalty))
    );
    println!(
        "{}",
        threshold_line(
            "min_lambda_satisfactory",
            min_lambda_satisfactory(&state, &penalty)
        )
    );
    match is_effective(&state, &penalty, lambda) {
        Ok(effective) => println!("effective = {effective}"),
        Err(_) => println!("effective = undefined (delta_um = 0)"),
    }
    println!(
        "fully_satisfactory = {}",
        is_fully_satisfactory(&state, &penalty, lambda)
    );
    println!("delta = {}", compact(solution.delta));
    println!("objective = {}", compact(solution.objective));

    if let Some(out) = &args.out {
        write_atomic(out, &to_json_bytes(&SolutionJson::from(&solution)))?;
        let mut manifest = RunManifest::new("solve");
        manifest.parameter("penalty", &args.penalty);
        manifest.parameter("lambda", lambda);
        manifest.input(&args.population)?;
        manifest.output(out);
        manifest.write_beside(out)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let state = read_population(&args.population)?;
    let penalty = parse_penalty(&args.penalty)?;
    let grid = parse_lambda_grid(&args.lambda_grid)?;
    let rows: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|&lambda| {
            let solution = solve_penalized(&state, &penalty, lambda);
            (lambda, solution.delta, solution.objective)
        })
        .collect();
    let table = sweep_table(&rows);
    match &args.out {
        Some(out) => {
            write_atomic(out, table.as_bytes())?;
            let mut manifest = RunManifest::new("sweep");
            manifest.parameter("penalty", &args.penalty);
            manifest.parameter("lambda_grid", &args.lambda_grid);
            manifest.input(&args.population)?;
            manifest.output(out);
            manifest.write_beside(out)?;
        }
        None => print!("{table}"),
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let state = read_population(&args.population)?;
    let kernel = read_kernel(&args.kernel)?;
    let penalty = parse_penalty(&args.penalty)?;
    let lambda = parse_lambda(args.lambda)?;
    if args.tol.is_nan() || args.tol < 0.0 {
        return Err(CliError::validation(format!("tol must be >= 0, got {}", args.tol)));
    }
    let record = simulate(&state, &kernel, &penalty, lambda, args.t_max, args.tol)?;
    let table = trajectory_table(&record);

    if let Some(final_out) = &args.final_state {
        write_population(final_out, &record.final_state)?;
    }
    match &args.out {
        Some(out) => {
            write_atomic(out, table.as_bytes())?;
            let mut manifest = RunManifest::new("simulate");
            manifest.parameter("penalty", &args.penalty);
            manifest.parameter("lambda", lambda);
            manifest.parameter("t_max", args.t_max);
            manifest.parameter("tol", args.tol);
            manifest.input(&args.population)?;
            manifest.input(&args.kernel)?;
            manifest.output(out);
            if let Some(final_out) = &args.final_state {
                manifest.output(final_out);
            }
            manifest.write_beside(out)?;
        }
        None => {
            print!("{table}");
            let json = to_json_bytes(&PopulationJson::from(&record.final_state));
            print!("{}", String::from_utf8_lossy(&json));
        }
    }
    Ok(())
}

fn cmd_stationary(args: StationaryArgs) -> Result<(), CliError> {
    let kernel = read_kernel(&args.kernel)?;
    let contraction = contraction_factor(&kernel);
    println!("alpha = {}", contraction.alpha);
    println!("contraction_factor = {}", contraction.factor);
    println!("contraction_guaranteed = {}", contraction.guaranteed);
    let bd = check_birth_death(&kernel);
    println!("band_ok = {}", bd.band_ok);
    println!("monotone_ok = {}", bd.monotone_ok);
    println!("unique_stationary = {}", bd.unique_stationary);
    println!("growth_condition_ok = {}", check_growth_condition(&kernel));

    let candidates = stationary_candidates(&kernel);
    println!("stationary_candidates = {}", candidates.len());
    for (i, candidate) in candidates.iter().enumerate() {
        let state = PopulationState::new(
            kernel.grid().clone(),
            0.5,
            0.5,
            candidate.distribution.clone(),
            candidate.distribution.clone(),
        )?;
        let next = step(&state, &candidate.policy, &kernel)?;
        let residual = tv_distance(next.dist(Group::A), state.dist(Group::A))
            .max(tv_distance(next.dist(Group::B), state.dist(Group::B)));
        println!(
            "candidate {i}: residual = {residual:e} distribution = {:?}",
            candidate.distribution
        );
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    match args.command {
        GenCommand::Band { seed, grid, out } => {
            let grid = parse_grid(&grid)?;
            let params = sample_band_params(seed);
            let kernel = band_kernel(&params, &grid);
            write_kernel(&out, &kernel)?;
            let mut manifest = RunManifest::new("gen band");
            manifest.parameter("grid", format!("{:?}", grid.values()));
            manifest.parameter("q1_up", params.q1_up);
            manifest.parameter("q1_down", params.q1_down);
            manifest.parameter("q0_up", params.q0_up);
            manifest.parameter("q0_down", params.q0_down);
            manifest.seed(seed);
            manifest.generator_version = Some(GENERATOR_VERSION.to_string());
            manifest.output(&out);
            manifest.write_beside(&out)?;
        }
        GenCommand::Random { seed, grid, out } => {
            let grid = parse_grid(&grid)?;
            let kernel = random_kernel(seed, &grid);
            write_kernel(&out, &kernel)?;
            let mut manifest = RunManifest::new("gen random");
            manifest.parameter("grid", format!("{:?}", grid.values()));
            manifest.seed(seed);
            manifest.generator_version = Some(GENERATOR_VERSION.to_string());
            manifest.output(&out);
            manifest.write_beside(&out)?;
        }
        GenCommand::Perturb { kernel, sigma, seed, out } => {
            if !sigma.is_finite() || sigma < 0.0 {
                return Err(CliError::validation(format!(
                    "sigma must be finite and >= 0, got {sigma}"
                )));
            }
            let base = read_kernel(&kernel)?;
            let perturbed = perturb_kernel(&base, sigma, seed);
            write_kernel(&out, &perturbed)?;
            let mut manifest = RunManifest::new("gen perturb");
            manifest.parameter("sigma", sigma);
            manifest.seed(seed);
            manifest.generator_version = Some(GENERATOR_VERSION.to_string());
            manifest.input(&kernel)?;
            manifest.output(&out);
            manifest.write_beside(&out)?;
        }
    }
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<(), CliError> {
    let zero_policy: ZeroPolicy = args
        .zero_policy
        .parse()
        .map_err(CliError::Validation)?;
    if args.bin_width.is_nan() || args.bin_width <= 0.0 {
        return Err(CliError::validation(format!(
            "bin width must be > 0, got {}",
            args.bin_width
        )));
    }
    let config = IngestConfig {
        group_column: args.group_col.clone(),
        group_a_values: args.group_a.iter().cloned().collect(),
        group_b_values: args
            .group_b
            .as_ref()
            .map(|values| values.iter().cloned().collect::<BTreeSet<String>>()),
        value_column: args.value_col.clone(),
        offset: args.offset,
        bin_width: args.bin_width,
        zero_policy,
    };
    let state = load_population(&args.csv, &config)?;
    write_population(&args.out, &state)?;
    println!(
        "ingested {} levels; weight_a = {}",
        state.grid().len(),
        compact(state.weight(Group::A))
    );
    let mut manifest = RunManifest::new("ingest");
    manifest.parameter("group_col", &args.group_col);
    manifest.parameter("group_a", args.group_a.join(","));
    if let Some(group_b) = &args.group_b {
        manifest.parameter("group_b", group_b.join(","));
    }
    manifest.parameter("value_col", &args.value_col);
    manifest.parameter("offset", args.offset);
    manifest.parameter("bin_width", args.bin_width);
    manifest.parameter("zero_policy", &args.zero_policy);
    manifest.input(&args.csv)?;
    manifest.output(&args.out);
    manifest.write_beside(&args.out)?;
    Ok(())
}
