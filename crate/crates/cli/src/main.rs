//! `seeplab` - batch runner for the groundwater-mound free-boundary
//! solvers.
//!
//! ```text
//! seeplab <problem> [--config FILE] [--key value ...]
//! ```
//!
//! Problems: dipole, drainage, flood-drain, eigen, sweep,
//! validate-similarity, analyze. Flags override config-file values;
//! results land in the `--out` directory (default `out`). Exit codes:
//! 0 success, 2 configuration error, 3 numerical instability,
//! 4 convergence failure.

// Validation uses `!(x > 0.0)` so NaN fails the checks too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod runner;

use std::process::ExitCode;

use config::{parse_file, parse_flags, resolve, Problem};

const USAGE: &str = "usage: seeplab <problem> [--config FILE] [--key value ...]
problems: dipole | drainage | flood-drain | eigen | sweep | validate-similarity | analyze
common flags: --ratio R | --kappa1 K --delta D | --grid-n N | --cfl C
              --t-start T0 --t-end T1 --snapshots t1,t2,... --out DIR
problem flags: --flux Q0|MULTIPLIER (drainage, flood-drain)
               --beta B (validate-similarity)
               --ratios r1,r2,... (sweep)";

fn fail(code: i32, kind: &str, message: &str) -> ExitCode {
    eprintln!("error: code={code} kind={kind} message=\"{message}\"");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(problem_name) = args.first() else {
        eprintln!("{USAGE}");
        return fail(2, "config", "missing problem name");
    };
    if problem_name == "--help" || problem_name == "-h" || problem_name == "help" {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let Some(problem) = Problem::parse(problem_name) else {
        return fail(2, "config", &format!("unknown problem '{problem_name}'"));
    };

    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(e) => return fail(2, "config", &e.0),
    };

    // config file entries first, flags after, so flags win
    let mut assignments = Vec::new();
    for (key, value, origin) in &flags {
        if key == "config" {
            match parse_file(std::path::Path::new(value)) {
                Ok(entries) => assignments.extend(entries),
                Err(e) => return fail(2, "config", &e.0),
            }
        } else {
            let _ = origin;
        }
    }
    assignments.extend(flags.into_iter().filter(|(k, _, _)| k != "config"));

    let cfg = match resolve(problem, assignments) {
        Ok(cfg) => cfg,
        Err(e) => return fail(2, "config", &e.0),
    };

    match runner::run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.exit_code(), e.kind(), e.message()),
    }
}
