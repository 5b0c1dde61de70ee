use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use surfweave::allocate::AllocationMode;
use surfweave::arch::Architecture;
use surfweave::circuit::circuit_for;
use surfweave::driver::{rows_to_csv, simulate, sweep, sweep_svg, synth, threshold_from_rows, SweepConfig};
use surfweave::sim::NoiseModel;
use surfweave::{Error, Result};

#[derive(Parser)]
#[command(name = "surfweave", version, about = "Synthesize rotated surface codes onto sparse device graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Device architecture utilities.
    Arch {
        #[command(subcommand)]
        command: ArchCommand,
    },
    /// Run the synthesis pipeline and print its report.
    Synth {
        #[command(flatten)]
        code: CodeArgs,
        /// Directory for device, layout, schedule and report files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metric tables over several architectures.
    Report {
        /// Restrict to one architecture (default: all standard configurations).
        #[arg(long)]
        arch: Option<Architecture>,
        #[arg(long)]
        mode: Option<AllocationMode>,
        #[arg(long, default_value_t = 5)]
        distance: usize,
        /// Write the reports as a JSON array.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print one cycle (or one stabilizer's circuit) as layered gate text.
    ExportCircuit {
        #[command(flatten)]
        code: CodeArgs,
        /// Export a single stabilizer measurement instead of the whole cycle.
        #[arg(long)]
        stabilizer: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo logical error rate of the memory experiment.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 0.001)]
        p_gate: f64,
        #[arg(long, default_value_t = surfweave::sim::DEFAULT_P_IDLE)]
        p_idle: f64,
        /// Cycles per shot (default: the distance).
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the result as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Logical error curves over a p_gate grid; writes CSV and SVG.
    Sweep {
        #[arg(long, default_value_t = Architecture::Square)]
        arch: Architecture,
        #[arg(long, default_value_t = AllocationMode::Pair3)]
        mode: AllocationMode,
        /// JSON file: {"p_gate": [...], "shots": n, "seed": s, "distances": [3, 5]}.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured shot count.
        #[arg(long)]
        shots: Option<u64>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output prefix; `<out>.csv` and `<out>.svg` are written.
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ArchCommand {
    /// Generate a rectangular device patch.
    Gen {
        #[arg(long)]
        arch: Architecture,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long, default_value_t = Architecture::Square)]
    arch: Architecture,
    #[arg(long, default_value_t = 3)]
    distance: usize,
    #[arg(long, default_value_t = AllocationMode::Pair3)]
    mode: AllocationMode,
}

/// Architectures and modes reported by default.
const STANDARD: [(Architecture, AllocationMode); 6] = [
    (Architecture::Square, AllocationMode::Pair3),
    (Architecture::Square, AllocationMode::Center4),
    (Architecture::HeavySquare, AllocationMode::Pair3),
    (Architecture::HeavySquare, AllocationMode::Center4),
    (Architecture::Hexagon, AllocationMode::Pair3),
    (Architecture::HeavyHexagon, AllocationMode::Pair3),
];

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Arch { command: ArchCommand::Gen { arch, rows, cols, out } } => {
            let g = arch.generate(rows, cols)?;
            emit(out.as_deref(), &g.to_json())
        }
        Command::Synth { code, out } => {
            let s = synth(code.arch, code.distance, code.mode)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                s.graph.save(dir.join("device.json"))?;
                std::fs::write(dir.join("layout.json"), s.layout.to_json())?;
                std::fs::write(
                    dir.join("schedule.json"),
                    serde_json::to_string_pretty(&s.schedule).expect("schedule serializes") + "\n",
                )?;
                std::fs::write(dir.join("report.json"), s.report.to_json())?;
            }
            print!("{}", s.report.to_text());
            Ok(())
        }
        Command::Report { arch, mode, distance, out } => {
            let configs: Vec<(Architecture, AllocationMode)> = STANDARD
                .into_iter()
                .filter(|&(a, m)| arch.is_none_or(|x| x == a) && mode.is_none_or(|x| x == m))
                .collect();
            let configs = if configs.is_empty() {
                vec![(arch.unwrap_or(Architecture::Square), mode.unwrap_or_default())]
            } else {
                configs
            };
            println!(
                "{:<14} {:<8} {:>7} {:>6} {:>7} {:>4} {:>6} {:>7} {:>8} {:>6}",
                "arch", "mode", "bridge", "cnot", "depth", "tot", "total", "data%", "bridge%", "unused%"
            );
            let mut reports = Vec::new();
            for (a, m) in configs {
                let r = synth(a, distance, m)?.report;
                let (x, u) = (&r.x_averages, &r.utilization);
                println!(
                    "{:<14} {:<8} {:>7.2} {:>6.2} {:>7.2} {:>4} {:>6} {:>7.1} {:>8.1} {:>6.1}",
                    a.as_str(),
                    m.as_str(),
                    x.bridge_qubits,
                    x.cnot_count,
                    x.depth,
                    r.total_cycle_time,
                    u.total,
                    u.data_pct,
                    u.bridge_pct,
                    u.unused_pct
                );
                reports.push(r);
            }
            if let Some(p) = out {
                std::fs::write(p, serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n")?;
            }
            Ok(())
        }
        Command::ExportCircuit { code, stabilizer, out } => {
            let s = synth(code.arch, code.distance, code.mode)?;
            let text = match stabilizer {
                None => s.export_cycle()?,
                Some(id) => {
                    let rect = s
                        .layout
                        .syndrome_rects
                        .get(id)
                        .ok_or_else(|| Error::InvalidArgument(format!("no stabilizer {id}")))?;
                    let choice = s
                        .schedule
                        .partitions
                        .iter()
                        .flatten()
                        .find(|e| s.tasks[e.task].id == id)
                        .map_or(0, |e| e.choice);
                    circuit_for(rect, choice)?.to_text()
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Simulate { code, p_gate, p_idle, rounds, shots, seed, out } => {
            let s = synth(code.arch, code.distance, code.mode)?;
            let r = simulate(&s, NoiseModel::new(p_gate, p_idle)?, rounds, shots, seed)?;
            println!(
                "arch {} mode {} distance {} p_gate {} p_idle {} shots {} seed {}",
                code.arch, code.mode, code.distance, p_gate, p_idle, shots, seed
            );
            println!(
                "logical_errors {} rate {:.6e} ci95 [{:.6e}, {:.6e}]",
                r.logical_errors, r.rate, r.ci_low, r.ci_high
            );
            if let Some(p) = out {
                std::fs::write(p, serde_json::to_string_pretty(&r).expect("result serializes") + "\n")?;
            }
            Ok(())
        }
        Command::Sweep { arch, mode, config, shots, seed, out } => {
            let mut cfg = SweepConfig::from_json(&std::fs::read_to_string(&config)?)?;
            cfg.shots = shots.unwrap_or(cfg.shots);
            cfg.seed = seed.unwrap_or(cfg.seed);
            let rows = sweep(arch, mode, &cfg);
            for r in &rows {
                if let Err(e) = &r.result {
                    eprintln!("d={} p={}: {e}", r.distance, r.p_gate);
                }
            }
            let csv = rows_to_csv(&rows);
            std::fs::write(out.with_extension("csv"), &csv)?;
            std::fs::write(out.with_extension("svg"), sweep_svg(&rows))?;
            print!("{csv}");
            if cfg.distances.len() >= 2 && cfg.p_gate.iter().all(|&p| p > 0.0) {
                match threshold_from_rows(&rows) {
                    Ok(t) => println!("threshold: {}", serde_json::to_string(&t).expect("estimate serializes")),
                    Err(e) => eprintln!("threshold: {e}"),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_infeasible() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
