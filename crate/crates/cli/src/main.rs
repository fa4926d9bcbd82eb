use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use armlift::commands::{self, Output};

const SCHEMAS: &str = "\
Input schemas (JSON; angles in radians). Any JSON argument may be a file path or inline JSON.
  arm:           {\"lengths\": [1.0, 1.0, 1.0], \"dim\": 2}            (dim defaults to 2)
  configuration: {\"angles\": [0.0, 1.047, -1.047]}                   (planar)
                 {\"vectors\": [[1,0,0], [0,1,0]]}                     (any dimension)
  curve:         {\"segments\": [ ... ]} with consecutive segments joined, each one of
                 {\"type\": \"polyline\", \"points\": [[x,y], ...], \"times\": [0, ...]}   (times local to the segment)
                 {\"type\": \"arc\", \"center\": [x,y], \"radius\": r, \"start_angle\": a, \"end_angle\": b, \"duration\": T}
                 {\"type\": \"square_loop\", \"corner\": [x,y], \"side\": s}                 (unit speed, counterclockwise)

Exit codes: 0 ok, 1 input error, 2 near-critical abort, 3 tracking divergence.";

#[derive(Parser)]
#[command(name = "armlift", version, about = "Horizontal lifting and geometry of articulated arms", after_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lift a curve horizontally; trajectory as CSV, drift summary as JSON.
    Lift {
        #[arg(long)]
        arm: String,
        #[arg(long)]
        curve: String,
        #[arg(long)]
        q0: String,
        /// Largest integration step.
        #[arg(long)]
        h: Option<f64>,
        /// CSV destination; partial output is written on abort.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether one configuration reaches another horizontally.
    Reachable {
        #[arg(long)]
        arm: String,
        #[arg(long)]
        z0: String,
        #[arg(long)]
        z1: String,
    },
    /// Critical points of the product map on the fiber over b, unit-length planar arm.
    Census {
        m: usize,
        b: f64,
    },
    /// Square-loop holonomy at a configuration.
    Holonomy {
        #[arg(long)]
        arm: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0.05)]
        side: f64,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Moebius invariants of a configuration.
    Invariants {
        #[arg(long)]
        arm: String,
        #[arg(long)]
        config: String,
    },
    /// Critical values |Σ ±a_i| of the arm map.
    CriticalRadii {
        #[arg(long)]
        arm: String,
    },
    /// Run the live steering service.
    Serve {
        /// TOML configuration; ARMLIFT_STEER_CONFIG is used otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
    },
}

/// A file's contents when `arg` names one, otherwise `arg` itself.
fn json_arg(arg: &str) -> Result<String, Output> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Output {
        stdout: String::new(),
        stderr: format!("{{\"error\": \"invalid_input\", \"message\": \"{arg}: {e}\", \"code\": 1}}\n"),
        code: 1,
    })
}

fn run(cmd: Command) -> Result<Output, Output> {
    Ok(match cmd {
        Command::Lift { arm, curve, q0, h, out } => {
            commands::cmd_lift(&json_arg(&arm)?, &json_arg(&curve)?, &json_arg(&q0)?, h, out.as_deref())
        }
        Command::Reachable { arm, z0, z1 } => commands::cmd_reachable(&json_arg(&arm)?, &json_arg(&z0)?, &json_arg(&z1)?),
        Command::Census { m, b } => commands::cmd_census(m, b),
        Command::Holonomy { arm, q, side, h } => commands::cmd_holonomy(&json_arg(&arm)?, &json_arg(&q)?, side, h),
        Command::Invariants { arm, config } => commands::cmd_invariants(&json_arg(&arm)?, &json_arg(&config)?),
        Command::CriticalRadii { arm } => commands::cmd_critical_radii(&json_arg(&arm)?),
        Command::Serve { config, port } => return serve(config, port),
    })
}

fn serve(config: Option<PathBuf>, port: Option<u16>) -> Result<Output, Output> {
    let fail = |message: String| Output { stdout: String::new(), stderr: format!("{message}\n"), code: 1 };
    let mut cfg = armlift_steer::ServiceConfig::load(config.as_deref()).map_err(|e| fail(e.to_string()))?;
    if let Some(p) = port {
        cfg.port = p;
    }
    eprintln!("listening on {}", cfg.address());
    let rt = tokio::runtime::Runtime::new().map_err(|e| fail(e.to_string()))?;
    rt.block_on(armlift_steer::serve(cfg)).map_err(|e| fail(e.to_string()))?;
    Ok(Output { stdout: String::new(), stderr: String::new(), code: 0 })
}

fn main() -> ExitCode {
    let out = run(Cli::parse().command).unwrap_or_else(|e| e);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
