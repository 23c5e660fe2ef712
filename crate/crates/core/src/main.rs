use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cosmoboltz_core::config::{preset, RunConfig, PRESETS};
use cosmoboltz_core::runner::{self, exit_code_for, resolve_out_dir, EXIT_CONFIG};
use cosmoboltz_core::Error;

#[derive(Parser)]
#[command(name = "cosmoboltz", version, about = "Boltzmann soft-potential decay experiments on an expanding background")]
struct Cli {
    /// Worker threads (0 lets the pool decide).
    #[arg(long, global = true, env = "COSMOBOLTZ_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Source {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Solve, evolve and analyse one configuration.
    Run(Source),
    /// Run the Cartesian product of the config's sweep lists.
    Sweep(Source),
    /// Operator-bound probes only.
    Probe(Source),
    /// Check a configuration and print it normalized.
    Validate(Source),
    /// List the bundled presets.
    Presets,
}

fn load(src: &Source) -> cosmoboltz_core::Result<RunConfig> {
    match (&src.config, &src.preset) {
        (Some(path), None) => RunConfig::from_file(path),
        (None, Some(name)) => preset(name),
        _ => Err(Error::Config("give exactly one of --config and --preset".into())),
    }
}

fn dispatch(verb: &Verb) -> cosmoboltz_core::Result<i32> {
    let src = match verb {
        Verb::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            return Ok(0);
        }
        Verb::Run(s) | Verb::Sweep(s) | Verb::Probe(s) | Verb::Validate(s) => s,
    };
    let cfg = load(src)?;
    let out = resolve_out_dir(&cfg, src.out.as_deref());
    match verb {
        Verb::Run(_) => {
            let o = runner::run_to_dir(&cfg, &out)?;
            let r = &o.report;
            println!("{}: {} (regime {}, {} steps)", cfg.name, r.status, r.regime.name(), r.steps);
            if let Some(v) = &r.verdict {
                let fitted = v.exponent_fitted.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into());
                println!("  exponent predicted {:.4}, fitted {fitted}", v.exponent_predicted);
            }
            if let Some(note) = &r.verdict_note {
                println!("  {note}");
            }
            println!("  artifacts in {}", out.display());
            Ok(r.exit_code)
        }
        Verb::Sweep(_) => {
            let s = runner::sweep(&cfg, &out)?;
            for r in &s.runs {
                let regime = r.regime.map(|g| g.name()).unwrap_or("?");
                println!("{}: {} (regime {regime}, exit {})", r.name, r.status, r.exit_code);
            }
            println!("summary in {}", out.display());
            Ok(s.exit_code)
        }
        Verb::Probe(_) => {
            let p = runner::probe(&cfg, &out)?;
            for k in &p.k_bound {
                println!("K bound theta={}: {:.4e}", k.theta, k.max_ratio);
            }
            for c in &p.weighted_lower_bound {
                println!("C_k k={}: {:.4e}", c.k, c.c_k);
            }
            println!("probe report in {}", out.join("probe.json").display());
            Ok(0)
        }
        Verb::Validate(_) => {
            print!("{}", cfg.to_toml()?);
            Ok(0)
        }
        Verb::Presets => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let code = match dispatch(&cli.verb) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
