//! `cbdec`: norm computations on instance files, the seeded verification
//! suite and solver timings.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input (file,
//! schema or flags), 3 solver failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use cbdec::cbmin::{self, SeeSawOptions};
use cbdec::error::Error;
use cbdec::instance::parse_instance;
use cbdec::report::{run_instance, RunOptions};
use cbdec::suite::{self, Fault, Profile, SuiteConfig};
use cbdec::testkit::{format_manifest, random_coefficients, SeededGenerator};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cbdec", version, about = "Decomposable and completely bounded norms of maps between matrix algebras")]
struct Cli {
    /// Worker threads; defaults to CBDEC_THREADS, then the number of CPUs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the norm described by an instance file.
    Norm {
        instance: PathBuf,
        /// See-saw stopping tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Auxiliary dimension for the see-saw.
        #[arg(long = "K", alias = "k")]
        k: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded verification suite.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Instances per family, overriding the profile.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value = "quick")]
        profile: String,
        /// Inject a regression (the see-saw drops the unit index) and expect failures.
        #[arg(long)]
        negative_control: bool,
        /// Write the instance manifest here.
        #[arg(long)]
        manifest_out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Time the factorization program and the see-saw over an (n, d) grid.
    Bench {
        /// Comma-separated `n x d` pairs, e.g. `3x2,4x3`.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        sizes: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Solver(_) | Error::NoConvergence { .. } => 3,
        _ => 2,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("cbdec: {msg}");
    ExitCode::from(code)
}

fn configure_threads(threads: Option<usize>) -> Result<(), String> {
    let n = match threads {
        Some(n) => Some(n),
        None => match std::env::var("CBDEC_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| format!("CBDEC_THREADS: not a number: {v:?}"))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err("threads: must be positive".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn write_output(out: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_norm(
    path: PathBuf,
    tol: Option<f64>,
    seed: Option<u64>,
    k: Option<usize>,
    restarts: Option<usize>,
    text: bool,
    out: Option<PathBuf>,
) -> ExitCode {
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) => return fail(2, format!("{}: {e}", path.display())),
    };
    let body = match std::str::from_utf8(&bytes) {
        Ok(s) => s,
        Err(_) => return fail(2, format!("{}: not UTF-8", path.display())),
    };
    let inst = match parse_instance(body) {
        Ok(i) => i,
        Err(e) => return fail(2, format!("{}: {e}", path.display())),
    };
    if k == Some(0) || restarts == Some(0) || tol.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
        return fail(2, "--K, --restarts and --tol must be positive");
    }
    let opts = RunOptions { k, restarts, seed, tol };
    let report = match run_instance(&inst, &bytes, &opts) {
        Ok(r) => r,
        Err(e) => return fail(exit_code_for(&e), e),
    };
    let rendered = if text {
        report.to_text()
    } else {
        let mut s = serde_json::to_string_pretty(&report.to_json()).expect("serializable");
        s.push('\n');
        s
    };
    match write_output(out.as_ref(), &rendered) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(2, format!("writing report: {e}")),
    }
}

fn cmd_verify(
    seed: u64,
    instances: Option<usize>,
    profile: &str,
    negative_control: bool,
    manifest_out: Option<PathBuf>,
    json: bool,
) -> ExitCode {
    let profile: Profile = match profile.parse() {
        Ok(p) => p,
        Err(e) => return fail(2, e),
    };
    if instances == Some(0) {
        return fail(2, "instances: must be positive");
    }
    let cfg = SuiteConfig {
        seed,
        profile,
        instances,
        fault: negative_control.then_some(Fault::DropUnitIndex),
    };
    if let Some(p) = &manifest_out {
        if let Err(e) = std::fs::write(p, format_manifest(&suite::manifest(&cfg))) {
            return fail(2, format!("{}: {e}", p.display()));
        }
    }
    let start = Instant::now();
    let report = suite::run_suite(&cfg);
    let elapsed = start.elapsed().as_secs_f64();
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        print!("{}", report.table());
        println!("digest {}", report.digest());
        println!("elapsed {elapsed:.1} s");
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        if negative_control {
            eprintln!("cbdec: negative control detected as expected");
        }
        ExitCode::from(1)
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (n, d) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("sizes: {s:?} is not of the form NxD"))?;
    let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&v| v > 0);
    match (parse(n), parse(d)) {
        (Some(n), Some(d)) if d <= 8 && n <= 16 => Ok((n, d)),
        _ => Err(format!("sizes: {s:?} needs 1 <= n <= 16 and 1 <= d <= 8")),
    }
}

fn cmd_bench(sizes: &[String], seed: u64) -> ExitCode {
    if sizes.is_empty() {
        return fail(2, "sizes: at least one NxD pair is required");
    }
    let grid = match sizes.iter().map(|s| parse_size(s)).collect::<Result<Vec<_>, _>>() {
        Ok(g) => g,
        Err(e) => return fail(2, e),
    };
    println!(
        "{:>3} {:>3}  {:>10} {:>10}  {:>12} {:>12}",
        "n", "d", "sdp_ms", "seesaw_ms", "upper", "lower"
    );
    for (n, d) in grid {
        let x = random_coefficients(&mut SeededGenerator::new(seed), n, d);
        let t0 = Instant::now();
        let f = match cbmin::min_norm_factorization_sdp(&x) {
            Ok(f) => f,
            Err(e) => return fail(exit_code_for(&e), e),
        };
        let t1 = Instant::now();
        let opts = SeeSawOptions {
            seed,
            ..Default::default()
        };
        let s = match cbmin::seesaw_min_norm(&x, &opts) {
            Ok(s) => s,
            Err(e) => return fail(exit_code_for(&e), e),
        };
        let t2 = Instant::now();
        println!(
            "{n:>3} {d:>3}  {:>10.1} {:>10.1}  {:>12.9} {:>12.9}",
            (t1 - t0).as_secs_f64() * 1e3,
            (t2 - t1).as_secs_f64() * 1e3,
            f.value,
            s.lower_bound
        );
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.threads) {
        return fail(2, e);
    }
    match cli.command {
        Command::Norm {
            instance,
            tol,
            seed,
            k,
            restarts,
            json: _,
            text,
            out,
        } => cmd_norm(instance, tol, seed, k, restarts, text, out),
        Command::Verify {
            seed,
            instances,
            profile,
            negative_control,
            manifest_out,
            json,
        } => cmd_verify(seed, instances, &profile, negative_control, manifest_out, json),
        Command::Bench { sizes, seed } => cmd_bench(&sizes, seed),
    }
}
