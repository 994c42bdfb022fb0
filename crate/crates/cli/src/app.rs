//! Command-line parsing and the run loop shared by every subcommand.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cert::{emit_certificate, write_atomic};
use crate::config::{ConfigFile, Params, Suite, SuiteConfig};
use crate::suites::{run_suite, SuiteOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "indeplab", version, about = "Exact certificates for finite independence and shattering claims")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Shattering, extraction, census and counting suites.
    Indep {
        #[arg(value_parser = ["sauer", "equal-split", "half", "census", "regular"])]
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Build, check and audit the Toeplitz construction.
    Toeplitz {
        #[arg(value_parser = ["build", "indep", "eval"])]
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Subshift density and measure suites.
    Dynamics {
        #[arg(value_parser = ["not-ie", "sum"])]
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Embedding, extraction and simplex-net suites.
    Banach {
        #[arg(value_parser = ["chain"])]
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run the suites listed in a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// List suite names accepted in config files.
    List,
}

#[derive(Args, Debug, Default)]
struct Output {
    /// Print certificates to stdout.
    #[arg(long)]
    json: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    window: Option<u64>,
    /// Inclusive integer range `LO..HI`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    range: Option<[i64; 2]>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for certificates and artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file for the suite table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Largest number of objects an exhaustive loop may visit.
    #[arg(long)]
    exact_cap: Option<u64>,
    #[command(flatten)]
    output: Output,
}

fn parse_range(s: &str) -> Result<[i64; 2], String> {
    let (a, b) = s.split_once("..").or_else(|| s.split_once(',')).ok_or("expected LO..HI")?;
    let lo = a.trim().parse::<i64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<i64>().map_err(|e| e.to_string())?;
    Ok([lo, hi])
}

fn suite_named(group: &str, name: &str) -> Suite {
    match (group, name) {
        ("indep", "sauer") => Suite::Sauer,
        ("indep", "equal-split") => Suite::EqualSplit,
        ("indep", "half") => Suite::Half,
        ("indep", "census") => Suite::Census,
        ("indep", "regular") => Suite::Regular,
        ("toeplitz", "build") => Suite::ToeplitzBuild,
        ("toeplitz", "indep") => Suite::ToeplitzIndep,
        ("toeplitz", "eval") => Suite::ToeplitzEval,
        ("dynamics", "not-ie") => Suite::NotIe,
        ("dynamics", "sum") => Suite::Sum,
        _ => Suite::BanachChain,
    }
}

impl Flags {
    fn into_config(self, suite: Suite) -> (SuiteConfig, Output) {
        let mut cfg = SuiteConfig::new(suite);
        cfg.params = Params {
            n: self.n,
            sizes: None,
            k: self.k,
            tau: self.tau,
            delta: self.delta,
            depth: self.depth,
            window: self.window,
            range: self.range,
            trials: self.trials,
        };
        cfg.seed = self.seed;
        if let Some(c) = self.exact_cap {
            cfg.exactness_caps.enumeration = c;
        }
        cfg.out = self.out;
        cfg.csv = self.csv;
        (cfg, self.output)
    }
}

/// Writes the certificate, table and artifacts the config asks for.
pub fn write_outputs(cfg: &SuiteConfig, out: &SuiteOutput) -> std::io::Result<()> {
    if let Some(dir) = &cfg.out {
        emit_certificate(&out.certificate, &dir.join(format!("{}.json", cfg.suite.name())))?;
        for (name, body) in &out.artifacts {
            write_atomic(&dir.join(name), body.as_bytes())?;
        }
    }
    if let Some(path) = &cfg.csv {
        write_atomic(path, out.table.to_csv().as_bytes())?;
    }
    Ok(())
}

fn install_threads(threads: Option<usize>) -> Result<(), String> {
    let Some(t) = threads else { return Ok(()) };
    if t == 0 {
        return Err("--threads must be positive".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| e.to_string())?;
    Ok(())
}

fn run_configs(configs: Vec<SuiteConfig>, output: &Output) -> i32 {
    if let Err(e) = install_threads(output.threads) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    for cfg in &configs {
        if let Err(e) = cfg.validate() {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    let mut code = EXIT_OK;
    let stdout = std::io::stdout();
    for cfg in &configs {
        let start = Instant::now();
        let out = match run_suite(cfg) {
            Ok(o) => o,
            Err(e) if e.is_usage() => {
                eprintln!("error: {}: {e}", cfg.suite.name());
                return EXIT_USAGE;
            }
            Err(e) => {
                eprintln!("FAIL {}: {e}", cfg.suite.name());
                code = EXIT_FAILED;
                continue;
            }
        };
        let ms = start.elapsed().as_millis();
        if let Err(e) = write_outputs(cfg, &out) {
            eprintln!("error: writing outputs for {}: {e}", cfg.suite.name());
            return EXIT_FAILED;
        }
        if output.json {
            let mut lock = stdout.lock();
            let _ = lock.write_all(out.certificate.canonical_json().as_bytes());
        }
        let cert = &out.certificate;
        match &cert.failure {
            None => eprintln!("PASS {} ({} ms)", cert.claim, ms),
            Some(f) => {
                eprintln!("FAIL {} ({} ms): {f}", cert.claim, ms);
                code = EXIT_FAILED;
            }
        }
    }
    code
}

fn load_config(path: &Path) -> Result<Vec<SuiteConfig>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: ConfigFile = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let suites = file.into_suites();
    if suites.is_empty() {
        return Err(format!("{}: no suites listed", path.display()));
    }
    Ok(suites)
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Indep { suite, flags } => single("indep", &suite, flags),
        Command::Toeplitz { suite, flags } => single("toeplitz", &suite, flags),
        Command::Dynamics { suite, flags } => single("dynamics", &suite, flags),
        Command::Banach { suite, flags } => single("banach", &suite, flags),
        Command::Run { config, output } => match load_config(&config) {
            Ok(cfgs) => run_configs(cfgs, &output),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Command::List => {
            for s in Suite::ALL {
                println!("{}", s.name());
            }
            EXIT_OK
        }
    }
}

fn single(group: &str, name: &str, flags: Flags) -> i32 {
    let (cfg, output) = flags.into_config(suite_named(group, name));
    run_configs(vec![cfg], &output)
}
