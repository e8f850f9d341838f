use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use mfp_agent::service::{run_repl, run_script, Config, Server, TranscriptScript};
use mfp_agent::Resources;

#[derive(Parser)]
#[command(name = "mfp-agent", version, about = "Conversational agent for a simulated multifunction printer")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Device manifest replacing the built-in one.
    #[arg(long, global = true)]
    device: Option<PathBuf>,
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,
    #[arg(long, global = true)]
    knowledge: Option<PathBuf>,
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    /// Options named per spoken list chunk.
    #[arg(long, global = true)]
    chunk_size: Option<usize>,
    /// Copies at or above which a job needs the unusual-request confirmation.
    #[arg(long, global = true)]
    quantity_threshold: Option<u32>,
    /// Estimated sheets at or above which a job needs the unusual-request confirmation.
    #[arg(long, global = true)]
    sheet_threshold: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    profile_dir: Option<PathBuf>,
    /// Milliseconds per simulator step; 0 stops the clock.
    #[arg(long, global = true)]
    tick_ms: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Accept client connections speaking the envelope protocol.
    Serve {
        #[arg(long)]
        listen: Option<String>,
        /// Share one simulated device between all sessions.
        #[arg(long)]
        shared_device: bool,
    },
    /// Talk to the agent in the terminal.
    Repl {
        /// Profile whose defaults are loaded and saved.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Replay transcript scripts; directories are searched for `*.script`.
    Check {
        #[arg(required = true)]
        scripts: Vec<PathBuf>,
        /// Write each run's transcript and envelope log here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print only the summary line per script.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Load the manifests, cross-check them and report catalog size.
    ValidateManifests,
}

impl Overrides {
    fn config(&self) -> Result<Config, String> {
        let mut c = match &self.config {
            Some(path) => Config::load(path).map_err(|e| e.to_string())?,
            None => Config::default(),
        };
        let set = |target: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                *target = v.clone();
            }
        };
        set(&mut c.manifests.device, &self.device);
        set(&mut c.manifests.grammar, &self.grammar);
        set(&mut c.manifests.knowledge, &self.knowledge);
        set(&mut c.manifests.templates, &self.templates);
        set(&mut c.profile_dir, &self.profile_dir);
        c.dialog.chunk_size = self.chunk_size.unwrap_or(c.dialog.chunk_size);
        c.dialog.quantity_threshold = self.quantity_threshold.unwrap_or(c.dialog.quantity_threshold);
        c.dialog.sheet_threshold = self.sheet_threshold.unwrap_or(c.dialog.sheet_threshold);
        c.seed = self.seed.unwrap_or(c.seed);
        c.tick_ms = self.tick_ms.unwrap_or(c.tick_ms);
        if c.dialog.chunk_size == 0 {
            return Err("chunk_size must be at least 1".into());
        }
        Ok(c)
    }
}

fn script_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .map_err(|e| format!("{}: {e}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "script"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

fn check(resources: &Resources, config: &Config, inputs: &[PathBuf], out: Option<&Path>, quiet: bool) -> Result<bool, String> {
    let started = Instant::now();
    let paths = script_paths(inputs)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let mut passed = 0;
    for path in &paths {
        let script = TranscriptScript::load(path).map_err(|e| e.to_string())?;
        let report = run_script(&script, resources, config);
        if quiet {
            println!("{}", report.to_string().lines().next().unwrap_or_default());
        } else {
            print!("{report}");
        }
        if let Some(dir) = out {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            let write = |ext: &str, text: &str| {
                let p = dir.join(format!("{stem}.{ext}"));
                std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))
            };
            write("transcript.ndjson", &report.transcript)?;
            write("envelopes.ndjson", &report.envelopes)?;
        }
        passed += usize::from(report.passed());
    }
    println!("{passed}/{} scripts passed in {:.2?}", paths.len(), started.elapsed());
    Ok(passed == paths.len())
}

fn validate(config: &Config) -> Result<bool, String> {
    let started = Instant::now();
    let resources = Resources::load(&config.manifests).map_err(|e| e.to_string())?;
    let report = resources.report();
    println!("{report}");
    let problems = report.scale_problems();
    for p in &problems {
        println!("problem: {p}");
    }
    println!("manifests {} in {:.2?}", if problems.is_empty() { "ok" } else { "FAILED" }, started.elapsed());
    Ok(problems.is_empty())
}

fn run(cli: Cli) -> Result<bool, String> {
    let mut config = cli.overrides.config()?;
    if let Command::ValidateManifests = cli.command {
        return validate(&config);
    }
    let resources = Resources::load(&config.manifests).map_err(|e| e.to_string())?;
    match cli.command {
        Command::Serve { listen, shared_device } => {
            config.listen = listen.unwrap_or(config.listen);
            config.shared_device |= shared_device;
            let server = Server::bind(resources, config).map_err(|e| e.to_string())?;
            eprintln!("listening on {}", server.local_addr().map_err(|e| e.to_string())?);
            server.run().map_err(|e| e.to_string())?;
            Ok(true)
        }
        Command::Repl { profile } => {
            eprintln!("Type /help for commands, /quit to leave.");
            let stdin = std::io::stdin().lock();
            run_repl(resources, &config, profile.as_deref(), stdin, std::io::stdout()).map_err(|e| e.to_string())?;
            Ok(true)
        }
        Command::Check { scripts, out, quiet } => check(&resources, &config, &scripts, out.as_deref(), quiet),
        Command::ValidateManifests => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
