//! Batch front end: reads JSON inputs, writes CSV/JSON outputs and a run
//! manifest per command.

mod commands;
mod failure;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::manifest::{RunManifest, Settings};

#[derive(Parser, Debug)]
#[command(name = "multislit", version, about = "Multi-slit radial Loewner evolution toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Boundary tolerance of slit maps.
    #[arg(long, global = true)]
    tol_map: Option<f64>,
    /// Local error target of the flow integrator.
    #[arg(long, global = true)]
    tol_ode: Option<f64>,
    /// Residual target of Laplace fits in multiply connected domains.
    #[arg(long, global = true)]
    tol_lap: Option<f64>,
    /// Maximum dyadic refinement depth of capacity profiles.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reparametrize input hulls by capacity before use.
    #[arg(long, global = true)]
    reparam: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Move marked points along the forward flow.
    Forward {
        /// Initial domain, marked points and optional horizon.
        config: PathBuf,
        driving: PathBuf,
        out: PathBuf,
    },
    /// Regenerate the slit curves from driving data.
    TraceHull {
        /// Initial domain and optional horizon.
        config: PathBuf,
        driving: PathBuf,
        out: PathBuf,
        /// Number of output times on the horizon.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Capacities, weights and driving functions of a hull.
    Extract {
        config: PathBuf,
        out: PathBuf,
        /// Number of profile times on the horizon.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Sample the kernel of a circularly slit disk.
    Kernel {
        domain: PathBuf,
        /// Boundary point as `re,im`.
        #[arg(allow_hyphen_values = true)]
        zeta: String,
        /// JSON list of `[re, im]` sample points.
        grid: PathBuf,
        out: PathBuf,
    },
    /// Rewrite a hull in capacity parametrization.
    Reparam { config: PathBuf, out: PathBuf },
    /// Run the invariant checks.
    Verify {
        /// Print the checks without running them.
        #[arg(long)]
        list: bool,
        /// JSON list of hulls in capacity parametrization replacing the
        /// randomized fixtures.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Comma-separated check identifiers (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Directory for the report and manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Forward { .. } => "forward",
            Command::TraceHull { .. } => "trace-hull",
            Command::Extract { .. } => "extract",
            Command::Kernel { .. } => "kernel",
            Command::Reparam { .. } => "reparam",
            Command::Verify { .. } => "verify",
        }
    }

    fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Forward { out, .. }
            | Command::TraceHull { out, .. }
            | Command::Extract { out, .. }
            | Command::Kernel { out, .. }
            | Command::Reparam { out, .. } => Some(out),
            Command::Verify { out, .. } => out.as_ref(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let g = &cli.global;
    if let Some(n) = g.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let settings = Settings::new(g.tol_map, g.tol_ode, g.tol_lap, g.depth);
    let mut manifest = RunManifest::new(cli.command.name(), settings, g.threads);
    let start = Instant::now();
    let mut out = cli.command.out().map(|d| io::OutputDir::create(d));
    let result = match &mut out {
        Some(Err(e)) => Err(e.clone()),
        Some(Ok(dir)) => commands::run(&cli.command, g, &mut manifest, Some(dir)),
        None => commands::run(&cli.command, g, &mut manifest, None),
    };
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    let code = match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}: {}", f.kind, f.message);
            let code = f.code();
            manifest.fail(f);
            code
        }
    };
    if let Some(Ok(dir)) = &mut out {
        manifest.outputs = dir.files.clone();
        if let Err(e) = dir.json_untracked("manifest.json", &manifest) {
            eprintln!("error: {}", e.message);
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_parse_after_the_command() {
        let cli = Cli::try_parse_from(["multislit", "kernel", "d.json", "-1,0", "g.json", "out", "--tol-lap", "1e-7"]).unwrap();
        assert_eq!(cli.global.tol_lap, Some(1e-7));
        assert!(matches!(cli.command, Command::Kernel { ref zeta, .. } if zeta == "-1,0"));
    }
}
