//! Command-line front end over the finblock library.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 computational cap exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use finblock::bounds::{edgeworth_third, q_bound};
use finblock::montecarlo::{estimate_term_scaling, verify_centralization};
use finblock::numerics::{ulp_diff, NeumaierSum};
use finblock::qalgebra::{centralized_q_density, optimal_alpha, scaling_q};
use finblock::report::{format_sig12, sweep_csv, Units};
use finblock::source::info_moments;
use finblock::spectrum::{binary_spectrum, exact_limit_detail, type_class_spectrum, Spectrum};
use finblock::{bound_sweep, BoundInputs, Error, McConfig, SourcePmf};

#[derive(Parser)]
#[command(name = "finblock", version, about = "Finite-blocklength source coding limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print source statistics: H1, varentropy, skewness moment, alpha, q_n
    Stats(CommonArgs),
    /// Emit the bound comparison table as CSV
    Sweep(CommonArgs),
    /// Run the centralization, identity, and slope checks
    Verify(CommonArgs),
    /// Compute the exact limit at a single blocklength (requires n-min = n-max)
    Exact(CommonArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Comma-separated symbol probabilities, e.g. "0.11,0.89"
    #[arg(long)]
    pmf: Option<String>,
    /// Target error probability, in (0,1)
    #[arg(long)]
    eps: Option<f64>,
    /// Smallest blocklength
    #[arg(long = "n-min")]
    n_min: Option<u64>,
    /// Largest blocklength
    #[arg(long = "n-max")]
    n_max: Option<u64>,
    /// Blocklength stride
    #[arg(long = "n-step")]
    n_step: Option<u64>,
    /// Deformation scale; defaults to T/(3V^2)
    #[arg(long)]
    alpha: Option<f64>,
    /// Monte Carlo seed
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<u64>,
    /// Output units: nats or bits
    #[arg(long)]
    units: Option<String>,
    /// Write output to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 2 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeCap { .. } => 3,
            _ => 2,
        };
        CliError { message: e.to_string(), code }
    }
}

struct RunConfig {
    pmf: SourcePmf,
    eps: f64,
    n_min: u64,
    n_max: u64,
    n_step: u64,
    alpha_override: Option<f64>,
    seed: u64,
    samples: u64,
    units: Units,
    out: Option<PathBuf>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("config key {key}: cannot parse {value:?}")))
}

/// Fills unset flags from a key=value file. Keys are the long flag names
/// with dashes removed; '#' starts a comment. Flags always win.
fn apply_config_file(path: &Path, args: &mut CommonArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", idx + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "pmf" => drop(args.pmf.get_or_insert_with(|| value.to_string())),
            "eps" => drop(args.eps.get_or_insert(parse_num(key, value)?)),
            "nmin" => drop(args.n_min.get_or_insert(parse_num(key, value)?)),
            "nmax" => drop(args.n_max.get_or_insert(parse_num(key, value)?)),
            "nstep" => drop(args.n_step.get_or_insert(parse_num(key, value)?)),
            "alpha" => drop(args.alpha.get_or_insert(parse_num(key, value)?)),
            "seed" => drop(args.seed.get_or_insert(parse_num(key, value)?)),
            "samples" => drop(args.samples.get_or_insert(parse_num(key, value)?)),
            "units" => drop(args.units.get_or_insert_with(|| value.to_string())),
            "out" => drop(args.out.get_or_insert_with(|| PathBuf::from(value))),
            other => return Err(CliError::usage(format!("config line {}: unknown key {other:?}", idx + 1))),
        }
    }
    Ok(())
}

fn resolve(mut args: CommonArgs) -> Result<RunConfig, CliError> {
    if let Some(path) = args.config.take() {
        apply_config_file(&path, &mut args)?;
    }
    let pmf = SourcePmf::parse(args.pmf.as_deref().unwrap_or("0.11,0.89"))?;
    let eps = args.eps.unwrap_or(0.01);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CliError::usage(format!("eps must lie in (0,1), got {eps}")));
    }
    let n_min = args.n_min.unwrap_or(20);
    let n_max = args.n_max.unwrap_or(200);
    if n_min < 1 || n_min > n_max {
        return Err(CliError::usage(format!("need 1 <= n-min <= n-max, got {n_min}..{n_max}")));
    }
    let n_step = args.n_step.unwrap_or(1);
    if n_step < 1 {
        return Err(CliError::usage("n-step must be at least 1"));
    }
    let units = Units::parse(args.units.as_deref().unwrap_or("nats"))?;
    Ok(RunConfig {
        pmf,
        eps,
        n_min,
        n_max,
        n_step,
        alpha_override: args.alpha,
        seed: args.seed.unwrap_or(42),
        samples: args.samples.unwrap_or(100_000),
        units,
        out: args.out,
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exact_spectrum(pmf: &SourcePmf, n: u64) -> finblock::Result<Spectrum> {
    if pmf.is_binary() {
        binary_spectrum(pmf.probs()[0], n)
    } else {
        type_class_spectrum(pmf, n)
    }
}

fn cmd_stats(cfg: &RunConfig) -> Result<(), CliError> {
    let moments = info_moments(&cfg.pmf, 6)?;
    let s = cfg.units.scale();
    let mut lines = Vec::new();
    lines.push(format!("alphabet_size {}", cfg.pmf.alphabet_size()));
    lines.push(format!("units {}", cfg.units.as_str()));
    lines.push(format!("h1 {}", format_sig12(moments.h1 * s)));
    lines.push(format!("varentropy {}", format_sig12(moments.varentropy * s * s)));
    lines.push(format!("third_central {}", format_sig12(moments.third_central * s * s * s)));
    for j in 2..=6usize {
        let mu = moments.central_moment(j).map_err(CliError::from)?;
        lines.push(format!("mu{j} {}", format_sig12(mu * s.powi(j as i32))));
    }
    // alpha carries units of 1/nats, so the bits conversion divides
    let alpha = match (cfg.alpha_override, moments.is_degenerate()) {
        (Some(a), _) => Some(a),
        (None, true) => None,
        (None, false) => Some(optimal_alpha(&moments)?.alpha),
    };
    match alpha {
        Some(a) => {
            lines.push(format!("alpha {}", format_sig12(a / s)));
            lines.push(format!("n_min {}", cfg.n_min));
            lines.push(format!("q_n_min {}", format_sig12(scaling_q(a, cfg.n_min).q())));
            lines.push(format!("n_max {}", cfg.n_max));
            lines.push(format!("q_n_max {}", format_sig12(scaling_q(a, cfg.n_max).q())));
        }
        None => {
            lines.push("degenerate source: varentropy is zero".to_string());
            lines.push("alpha undefined".to_string());
        }
    }
    emit(&cfg.out, &(lines.join("\n") + "\n"))
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let ns: Vec<u64> = (cfg.n_min..=cfg.n_max).step_by(cfg.n_step as usize).collect();
    let rows = bound_sweep(&cfg.pmf, cfg.eps, &ns, true, cfg.alpha_override)?;
    emit(&cfg.out, &sweep_csv(&rows, cfg.units))
}

fn cmd_exact(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.n_min != cfg.n_max {
        return Err(CliError::usage(format!(
            "exact needs a single blocklength; pass --n-min and --n-max equal (got {} and {})",
            cfg.n_min, cfg.n_max
        )));
    }
    let n = cfg.n_min;
    let spectrum = exact_spectrum(&cfg.pmf, n)?;
    let detail = exact_limit_detail(&spectrum, cfg.eps)?;
    let text = format!(
        "n {n}\nunits {}\nl_star {}\natom_index {}\ncumulative {}\n",
        cfg.units.as_str(),
        format_sig12(detail.value * cfg.units.scale()),
        detail.atom_index,
        format_sig12(detail.cumulative),
    );
    emit(&cfg.out, &text)
}

fn cmd_verify(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let moments = info_moments(&cfg.pmf, 3)?;
    if moments.is_degenerate() {
        println!("degenerate source: varentropy is zero, deformation checks need V > 0");
        println!("centralization: SKIP");
        println!("identity: SKIP");
        println!("slopes: SKIP");
        return Ok(ExitCode::SUCCESS);
    }
    if cfg.samples < 10_000 {
        return Err(CliError::usage(format!(
            "verify needs at least 10000 samples, got {}",
            cfg.samples
        )));
    }
    let alpha = match cfg.alpha_override {
        Some(a) => a,
        None => optimal_alpha(&moments)?.alpha,
    };
    let mut any_fail = false;

    // exact-spectrum expectation of the centralized density must sit on nH1;
    // Monte Carlo z-score stands in where the spectrum is capped
    let mut worst_rel = 0.0f64;
    let mut worst_z = 0.0f64;
    let mut centralization_fail: Option<String> = None;
    for n in [10u64, 50, 100, 200] {
        let q = scaling_q(alpha, n);
        match exact_spectrum(&cfg.pmf, n) {
            Ok(spectrum) => {
                let mut acc = NeumaierSum::default();
                for atom in spectrum.atoms() {
                    acc.add(atom.log_prob.exp() * centralized_q_density(atom.value, &cfg.pmf, n, &q)?);
                }
                let center = n as f64 * moments.h1;
                let rel = (acc.value() - center).abs() / center;
                worst_rel = worst_rel.max(rel);
                if rel > 1e-9 {
                    centralization_fail =
                        Some(format!("n={n}: relative drift {rel:.2e} exceeds 1e-9"));
                }
            }
            Err(Error::SizeCap { .. }) => {
                let mc = McConfig {
                    samples: cfg.samples,
                    seed: cfg.seed,
                    n_grid: vec![],
                    max_k: 3,
                    alpha,
                };
                let (_, z) = verify_centralization(&cfg.pmf, n, &mc)?;
                worst_z = worst_z.max(z.abs());
                if z.abs() > 4.0 {
                    centralization_fail = Some(format!("n={n}: sample mean z-score {z:.2}"));
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    match centralization_fail {
        None if worst_z > 0.0 => println!(
            "centralization: PASS (worst exact drift {worst_rel:.1e}, worst sampled z {worst_z:.2})"
        ),
        None => println!("centralization: PASS (worst relative drift {worst_rel:.1e}, threshold 1e-9)"),
        Some(why) => {
            any_fail = true;
            println!("centralization: FAIL ({why})");
        }
    }

    // q-bound vs third-order expansion, per blocklength
    let mut worst_ulp = 0u64;
    let mut identity_fail: Option<String> = None;
    for n in (cfg.n_min..=cfg.n_max).step_by(cfg.n_step as usize) {
        let inputs = BoundInputs::new(&moments, n, cfg.eps, alpha)?;
        let edge = edgeworth_third(&inputs)?;
        let qb = q_bound(&inputs);
        let gap = ulp_diff(edge, qb);
        worst_ulp = worst_ulp.max(gap);
        if gap > 4 && identity_fail.is_none() {
            identity_fail = Some(format!("n={n}: {gap} ulp between {edge} and {qb}"));
        }
    }
    match identity_fail {
        None => println!(
            "identity: PASS (max {worst_ulp} ulp over n in [{}, {}], threshold 4)",
            cfg.n_min, cfg.n_max
        ),
        Some(why) => {
            any_fail = true;
            println!("identity: FAIL ({why})");
        }
    }

    // sampled log-log slopes of the degree-k term magnitudes
    let mc = McConfig {
        samples: cfg.samples,
        seed: cfg.seed,
        n_grid: vec![16, 64, 256, 1024, 4096],
        max_k: 3,
        alpha,
    };
    let estimates = estimate_term_scaling(&cfg.pmf, &mc)?;
    let mut slope_fail = false;
    let detail: Vec<String> = estimates
        .iter()
        .map(|e| {
            if (e.slope - e.expected).abs() > 0.1 {
                slope_fail = true;
            }
            format!("k={} slope {:.3} target {:.1}", e.k, e.slope, e.expected)
        })
        .collect();
    if slope_fail {
        any_fail = true;
        println!("slopes: FAIL ({})", detail.join("; "));
    } else {
        println!("slopes: PASS ({})", detail.join("; "));
    }

    Ok(if any_fail { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Stats(args) => cmd_stats(&resolve(args)?).map(|_| ExitCode::SUCCESS),
        Command::Sweep(args) => cmd_sweep(&resolve(args)?).map(|_| ExitCode::SUCCESS),
        Command::Verify(args) => cmd_verify(&resolve(args)?),
        Command::Exact(args) => cmd_exact(&resolve(args)?).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
