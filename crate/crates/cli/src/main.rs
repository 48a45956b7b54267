use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mvnlab_cli::{output, Command, ExperimentConfig, ExperimentRegistry, Overrides, EXIT_FAILURE, EXIT_INPUT, EXIT_PASS};

#[derive(Parser)]
#[command(name = "mvnlab", version, about = "Property experiments on finite von Neumann algebras")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// *-algebra laws on random or given operators
    OpsCheck(Overrides),
    /// srt/set/measure/sot convergence on bundled families
    TopologyCompare(Overrides),
    /// Trotter product formula error rates
    Trotter(Overrides),
    /// Nelson commutator formula errors
    Nelson(Overrides),
    /// Closure of Lie(G) under sum, scaling and bracket
    LieClosure(Overrides),
    /// Kronecker laws, coherence and the algebra/ring functors
    TensorLaws(Overrides),
    /// Local injectivity of exp near zero
    ExpInjectivity(Overrides),
    /// Run whatever command the --config file names
    Run(Overrides),
    /// List commands and the library suites behind them
    List,
}

fn log(level: &str, module: &str, message: &str) {
    eprintln!("{level}: {module}: {message}");
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("MVNLAB_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("MVNLAB_THREADS must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err("MVNLAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        log("ERROR", "cli", &e);
        return ExitCode::from(EXIT_INPUT);
    }
    let registry = ExperimentRegistry::standard();
    let (command, flags) = match cli.command {
        Cmd::OpsCheck(f) => (Some(Command::OpsCheck), f),
        Cmd::TopologyCompare(f) => (Some(Command::TopologyCompare), f),
        Cmd::Trotter(f) => (Some(Command::Trotter), f),
        Cmd::Nelson(f) => (Some(Command::Nelson), f),
        Cmd::LieClosure(f) => (Some(Command::LieClosure), f),
        Cmd::TensorLaws(f) => (Some(Command::TensorLaws), f),
        Cmd::ExpInjectivity(f) => (Some(Command::ExpInjectivity), f),
        Cmd::Run(f) => (None, f),
        Cmd::List => {
            for c in registry.commands() {
                let e = registry.get(c).expect("listed command is registered");
                println!("{:<18} {}", c.name(), e.suites().join(", "));
            }
            return ExitCode::from(EXIT_PASS);
        }
    };
    let outcome = ExperimentConfig::resolve(command, flags).and_then(|cfg| {
        let outcome = registry.run(&cfg)?;
        let written = output::emit(&outcome.tables, cfg.out.as_deref())?;
        Ok((outcome, written))
    });
    match outcome {
        Ok((outcome, written)) => {
            for (module, note) in &outcome.notes {
                log("INFO", module, note);
            }
            for p in written {
                log("INFO", "output", &format!("wrote {}", p.display()));
            }
            if outcome.pass {
                ExitCode::from(EXIT_PASS)
            } else {
                log("ERROR", "cli", "property check failed");
                ExitCode::from(EXIT_FAILURE)
            }
        }
        Err(e) => {
            log("ERROR", e.module(), &e.to_string());
            ExitCode::from(e.exit_code())
        }
    }
}
