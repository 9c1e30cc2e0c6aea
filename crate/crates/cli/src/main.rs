//! Command-line front end for the mimocast simulator.

use clap::{Parser, Subcommand};
use mimocast::bounds;
use mimocast::harness::{
    self, build_topology_context, parse_config, run_realization, sinr_threshold, CellKey, Mode,
    SimulationConfig,
};
use mimocast::netgraph::{format_links, format_topology};
use mimocast::scheduler::format_schedule;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mimocast", about = "Connectivity-oriented STDMA scheduling simulator for MIMO ad hoc multicast networks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a topology and print the node table, links and ICG summary
    Topology {
        #[arg(long, default_value_t = 30)]
        nodes: usize,
        #[arg(long, default_value_t = 25.0)]
        side: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[arg(long, default_value_t = 0.5)]
        min_sep: f64,
    },
    /// Schedule a single frame and dump the slot assignment
    Schedule {
        /// Config file (key = value); defaults apply for missing keys
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        slots: usize,
        #[arg(long, default_value_t = 0.04)]
        gamma: f64,
        #[arg(long, default_value = "ocsi")]
        mode: String,
        /// Realization index to draw channels for
        #[arg(long, default_value_t = 0)]
        realization: usize,
    },
    /// Run the full Monte Carlo sweep and emit CSV
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Emit analytic bound curves as CSV
    Bounds {
        /// Curve family: cdf | pdf | network
        #[arg(long, default_value = "cdf")]
        curve: String,
        /// Antenna count (1, 2 or 4; cdf also accepts other values)
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 40.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Config file for the `network` curve (topology + thresholds)
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<SimulationConfig, String> {
    match path {
        None => Ok(SimulationConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_config(&text).map_err(|e| e.to_string())
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => fs::write(p, content).map_err(|e| format!("{}: {e}", p.display())),
    }
}

fn run() -> Result<(), String> {
    match Cli::parse().command {
        Command::Topology { nodes, side, seed, source, min_sep } => {
            let mut config = SimulationConfig::default();
            config.n_nodes = nodes;
            config.area_side = side;
            config.seed = seed;
            config.source = source;
            config.min_separation = min_sep;
            let ctx = build_topology_context(&config).map_err(|e| e.to_string())?;
            print!("{}", format_topology(&ctx.topology));
            print!("{}", format_links(&ctx.tree));
            let all = vec![true; ctx.tree.n_links()];
            println!("max_collision_degree\t{}", ctx.icg.max_collision_degree(&all));
            Ok(())
        }
        Command::Schedule { config, m, slots, gamma, mode, realization } => {
            let mut cfg = load_config(&config)?;
            cfg.m_list = vec![m];
            cfg.n_slots_list = vec![slots];
            cfg.gammas = vec![gamma];
            let mode = Mode::parse(&mode).map_err(|e| e.to_string())?;
            let ctx = build_topology_context(&cfg).map_err(|e| e.to_string())?;
            let key = CellKey { m, n_slots: slots, gamma, mode };

            // re-run the scheduling part of the pipeline verbosely
            let threshold = sinr_threshold(cfg.c_req, slots);
            println!("sinr_threshold\t{threshold:.8e}");
            let outcome = run_realization(&cfg, &ctx, &key, realization).map_err(|e| e.to_string())?;
            if outcome.restart {
                println!("restart\ttrue\t(not enough slots; retry with more)");
                return Ok(());
            }
            match schedule_frame(&cfg, &ctx, &key, realization) {
                Ok(text) => print!("{text}"),
                Err(e) => return Err(e),
            }
            let successes = outcome.success.iter().filter(|&&s| s).count();
            println!("links_meeting_threshold\t{successes}/{}", ctx.tree.n_links());
            println!(
                "sum_power\t{:.8e}",
                outcome.powers.iter().sum::<f64>()
            );
            Ok(())
        }
        Command::Sweep { config, out, workers } => {
            let mut cfg = load_config(&Some(config))?;
            if workers > 0 {
                cfg.workers = workers;
            }
            let result = harness::run_sweep(&cfg).map_err(|e| e.to_string())?;
            emit(&out, &harness::sweep_to_csv(&result))
        }
        Command::Bounds { curve, m, lambda_max, points, config, out } => {
            let content = match curve.as_str() {
                "cdf" => {
                    let mut s = String::from("lambda,cdf\n");
                    for i in 0..=points {
                        let l = lambda_max * i as f64 / points as f64;
                        s.push_str(&format!("{l:.8e},{:.8e}\n", bounds::max_eig_cdf(m, l)));
                    }
                    s
                }
                "pdf" => {
                    let mut s = String::from("lambda,pdf\n");
                    for i in 0..=points {
                        let l = lambda_max * i as f64 / points as f64;
                        s.push_str(&format!("{l:.8e},{:.8e}\n", bounds::max_eig_pdf(m, l)));
                    }
                    s
                }
                "network" => {
                    let cfg = load_config(&config)?;
                    let ctx = build_topology_context(&cfg).map_err(|e| e.to_string())?;
                    let mut s = String::from("m,n_slots,sinr_threshold,conn_upper_bound,power_lower_bound\n");
                    for &mm in &cfg.m_list {
                        for &ns in &cfg.n_slots_list {
                            let t = sinr_threshold(cfg.c_req, ns);
                            let lambda_min: Vec<f64> = ctx
                                .link_distances
                                .iter()
                                .map(|d| t * d.powf(cfg.alpha) * cfg.noise_power / cfg.p_max())
                                .collect();
                            let worst = lambda_min.iter().cloned().fold(0.0, f64::max);
                            let lmax = cfg.lambda_max.max(1.0001 * worst);
                            let inputs = bounds::BoundInputs::new(mm, lambda_min, lmax, ns)
                                .map_err(|e| e.to_string())?;
                            let ub = bounds::connectivity_upper_bound(&inputs);
                            let pb = if matches!(mm, 1 | 2 | 4) {
                                bounds::network_power_lower_bound(
                                    &inputs,
                                    t,
                                    &ctx.link_distances,
                                    cfg.alpha,
                                    cfg.noise_power,
                                )
                                .map_err(|e| e.to_string())?
                            } else {
                                f64::NAN
                            };
                            s.push_str(&format!("{mm},{ns},{t:.8e},{ub:.8e},{pb:.8e}\n"));
                        }
                    }
                    s
                }
                other => return Err(format!("unknown curve '{other}' (use cdf, pdf or network)")),
            };
            emit(&out, &content)
        }
    }
}

/// Reconstruct and print the schedule for one realization (mirrors the
/// scheduling stage of the pipeline).
fn schedule_frame(
    cfg: &SimulationConfig,
    ctx: &harness::TopologyContext,
    key: &CellKey,
    realization: usize,
) -> Result<String, String> {
    use mimocast::beamopt::SlotObjective;
    use mimocast::channel::{principal_pair, sample_estimated_channels};
    use mimocast::rng::substream;
    use mimocast::scheduler::{qualify_active_set, schedule, ScheduleOutcome, SchedulerInput};

    let n = ctx.tree.n_links();
    let gamma_eff = if key.mode == Mode::Gpcsi { 0.0 } else { key.gamma };
    let seed = substream(cfg.seed, &[0x4348, realization as u64]);
    let estimated = sample_estimated_channels(n, key.m, seed);
    let mut principal = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    for k in 0..n {
        let pair = principal_pair(estimated.get(k, k)).map_err(|e| e.to_string())?;
        gains.push(pair.sigma1 * pair.sigma1 * ctx.path_gain[k * n + k]);
        principal.push(pair.v1);
    }
    let threshold = sinr_threshold(cfg.c_req, key.n_slots);
    let active = qualify_active_set(&gains, cfg.p_max(), threshold, cfg.noise_power);
    let objective = match key.mode {
        Mode::MaxThroughput => SlotObjective::SumRate,
        _ => SlotObjective::Connectivity,
    };
    let input = SchedulerInput {
        active: &active,
        icg: &ctx.icg,
        n_slots: key.n_slots,
        channels: &estimated,
        path_gain: &ctx.path_gain,
        gains: &gains,
        principal: &principal,
        gamma: gamma_eff,
        sinr_threshold: threshold,
        p_max: cfg.p_max(),
        noise_power: cfg.noise_power,
        objective,
        params: &cfg.opt,
    };
    let mut out = format!("active_links\t{}/{n}\n", active.len());
    match schedule(&input).map_err(|e| e.to_string())? {
        ScheduleOutcome::Scheduled(s) => out.push_str(&format_schedule(&s)),
        ScheduleOutcome::Restart => out.push_str("restart\ttrue\n"),
    }
    Ok(out)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
