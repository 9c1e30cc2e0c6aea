//! Monte Carlo experiment runner.
//!
//! A sweep walks the grid (M, N_s, gamma, mode) over a fixed seeded
//! topology. Each realization draws fresh estimated channels, qualifies and
//! schedules the links on that estimate, evolves the channels to their
//! realized values, optionally re-optimizes per slot (LPCSI), runs power
//! control, and records per-link success flags, powers and achieved rates.
//! Aggregated cells carry the analytic connectivity and power bounds for
//! the same threshold so simulated and limiting curves land in one table.
//!
//! Realizations are independent work items parallelized with per-index
//! derived seeds; aggregation folds them in index order, so the emitted CSV
//! is byte-identical for any worker count.

use crate::beamopt::{optimize_slot, OptimizerParams, SlotObjective, SlotProblem};
use crate::bounds::{self, BoundInputs};
use crate::channel::{evolve_channels, principal_pair, sample_estimated_channels, ChannelSet};
use crate::linalg::C64;
use crate::netgraph::{
    build_icg, build_routing_tree, generate_topology_with, InterferenceCollisionGraph,
    RoutingTree, Topology, TopologyParams,
};
use crate::powerctl::{power_control_slot, PowerControlParams};
use crate::rng::substream;
use crate::scheduler::{qualify_active_set, schedule, ScheduleOutcome, SchedulerInput};
use crate::sinr::{sinr_exact, LinkContext, SlotChannels, SlotGeometry};
use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

const STREAM_CHANNELS: u64 = 0x4348;
const STREAM_TOPOLOGY: u64 = 0x544f;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Net(#[from] crate::netgraph::NetError),
    #[error(transparent)]
    Sched(#[from] crate::scheduler::SchedError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Bounds(#[from] crate::bounds::BoundsError),
}

/// CSI regime of a sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Outdated global CSI drives scheduling; links transmit as scheduled.
    Ocsi,
    /// As OCSI, then each slot re-optimizes on its true local CSI.
    Lpcsi,
    /// Perfect global CSI: gamma = 0 and the exact SINR in the objective.
    Gpcsi,
    /// Comparison baseline: throughput objective instead of connectivity,
    /// no power minimization.
    MaxThroughput,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Ocsi => "ocsi",
            Mode::Lpcsi => "lpcsi",
            Mode::Gpcsi => "gpcsi",
            Mode::MaxThroughput => "maxthroughput",
        }
    }

    pub fn parse(s: &str) -> Result<Mode, HarnessError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ocsi" => Ok(Mode::Ocsi),
            "lpcsi" => Ok(Mode::Lpcsi),
            "gpcsi" => Ok(Mode::Gpcsi),
            "maxthroughput" | "max_throughput" => Ok(Mode::MaxThroughput),
            other => Err(HarnessError::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full experiment description. Everything that influences the numbers
/// lives here; `workers` only controls execution.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n_nodes: usize,
    pub area_side: f64,
    pub alpha: f64,
    pub noise_power: f64,
    pub p_max_db: f64,
    pub c_req: f64,
    pub gammas: Vec<f64>,
    pub n_slots_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub modes: Vec<Mode>,
    pub realizations: usize,
    pub seed: u64,
    pub n_a: usize,
    pub n_b: usize,
    pub min_separation: f64,
    pub source: usize,
    pub lambda_max: f64,
    pub opt: OptimizerParams,
    /// Thread count for realization parallelism; 0 = library default.
    pub workers: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_nodes: 30,
            area_side: 25.0,
            alpha: 2.0,
            noise_power: 1.0,
            p_max_db: 25.0,
            c_req: 0.9,
            gammas: vec![0.01, 0.04],
            n_slots_list: vec![3, 4, 5, 6, 7, 8],
            m_list: vec![4],
            modes: vec![Mode::Ocsi, Mode::Gpcsi],
            realizations: 300,
            seed: 1,
            n_a: 3,
            n_b: 2,
            min_separation: 0.5,
            source: 0,
            lambda_max: 40.0,
            opt: OptimizerParams::default(),
            workers: 0,
        }
    }
}

impl SimulationConfig {
    pub fn p_max(&self) -> f64 {
        10f64.powf(self.p_max_db / 10.0)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.c_req <= 0.0 {
            return Err(HarnessError::Config("c_req must be positive".into()));
        }
        if self.realizations == 0 {
            return Err(HarnessError::Config("realizations must be at least 1".into()));
        }
        if self.gammas.iter().any(|&g| !(0.0..1.0).contains(&g)) {
            return Err(HarnessError::Config("every gamma must lie in [0, 1)".into()));
        }
        if self.n_slots_list.iter().any(|&s| s == 0) {
            return Err(HarnessError::Config("n_slots entries must be at least 1".into()));
        }
        if self.m_list.iter().any(|&m| m == 0) {
            return Err(HarnessError::Config("m entries must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(HarnessError::Config("at least one mode required".into()));
        }
        Ok(())
    }
}

/// SINR threshold that sustains rate c_req with N_s slots per frame.
pub fn sinr_threshold(c_req: f64, n_slots: usize) -> f64 {
    assert!(c_req > 0.0 && n_slots >= 1);
    (n_slots as f64 * c_req).exp2() - 1.0
}

/// Geometry shared by every cell of a sweep.
#[derive(Debug, Clone)]
pub struct TopologyContext {
    pub topology: Topology,
    pub tree: RoutingTree,
    pub icg: InterferenceCollisionGraph,
    /// 1/d^alpha between tx of link i and rx of link k (row i, column k);
    /// infinite for the tx==rx node coincidences of colliding pairs, which
    /// never share a slot.
    pub path_gain: Vec<f64>,
    /// d_kk per link.
    pub link_distances: Vec<f64>,
}

pub fn build_topology_context(config: &SimulationConfig) -> Result<TopologyContext, HarnessError> {
    let params = TopologyParams {
        n_nodes: config.n_nodes,
        area_side: config.area_side,
        seed: substream(config.seed, &[STREAM_TOPOLOGY]),
        source: config.source,
        min_separation: config.min_separation,
    };
    let topology = generate_topology_with(&params)?;
    let tree = build_routing_tree(&topology);
    let icg = build_icg(&tree);
    let n = tree.n_links();
    let mut path_gain = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let d = topology.distance(tree.links[i].tx, tree.links[k].rx);
            path_gain[i * n + k] = if d > 0.0 { d.powf(-config.alpha) } else { f64::INFINITY };
        }
    }
    let link_distances = tree.links.iter().map(|l| l.distance).collect();
    Ok(TopologyContext { topology, tree, icg, path_gain, link_distances })
}

/// One sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub m: usize,
    pub n_slots: usize,
    pub gamma: f64,
    pub mode: Mode,
}

/// Per-realization raw outcome.
#[derive(Debug, Clone)]
pub struct RealizationOutcome {
    pub success: Vec<bool>,
    pub powers: Vec<f64>,
    /// Achieved per-link rate log2(1 + SINR) / N_s (zero when muted).
    pub rates: Vec<f64>,
    pub restart: bool,
}

/// Run the full pipeline for one realization of one cell.
pub fn run_realization(
    config: &SimulationConfig,
    ctx: &TopologyContext,
    cell: &CellKey,
    realization: usize,
) -> Result<RealizationOutcome, HarnessError> {
    let n = ctx.tree.n_links();
    let all_fail = |restart: bool| RealizationOutcome {
        success: vec![false; n],
        powers: vec![0.0; n],
        rates: vec![0.0; n],
        restart,
    };

    let gamma_eff = if cell.mode == Mode::Gpcsi { 0.0 } else { cell.gamma };
    let channel_seed = substream(config.seed, &[STREAM_CHANNELS, realization as u64]);
    let estimated = sample_estimated_channels(n, cell.m, channel_seed);

    // Per-link principal pairs and channel gains from the estimates.
    let mut principal = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    for k in 0..n {
        let pair = principal_pair(estimated.get(k, k))?;
        gains.push(pair.sigma1 * pair.sigma1 * ctx.path_gain[k * n + k]);
        principal.push(pair.v1);
    }

    let threshold = sinr_threshold(config.c_req, cell.n_slots);
    let p_max = config.p_max();
    let active = qualify_active_set(&gains, p_max, threshold, config.noise_power);
    if active.is_empty() {
        return Ok(all_fail(false));
    }

    let objective = match cell.mode {
        Mode::MaxThroughput => SlotObjective::SumRate,
        _ => SlotObjective::Connectivity,
    };
    let input = SchedulerInput {
        active: &active,
        icg: &ctx.icg,
        n_slots: cell.n_slots,
        channels: &estimated,
        path_gain: &ctx.path_gain,
        gains: &gains,
        principal: &principal,
        gamma: gamma_eff,
        sinr_threshold: threshold,
        p_max,
        noise_power: config.noise_power,
        objective,
        params: &config.opt,
    };
    let sched = match schedule(&input)? {
        ScheduleOutcome::Scheduled(s) => s,
        ScheduleOutcome::Restart => return Ok(all_fail(true)),
    };

    let realized: ChannelSet = evolve_channels(&estimated, gamma_eff, channel_seed)?;

    let mut powers = vec![0.0; n];
    let mut sinrs = vec![0.0; n];
    for color in 0..cell.n_slots {
        let members = &sched.state.members[color];
        if members.is_empty() {
            continue;
        }
        let k = members.len();
        let slot_channels = SlotChannels::from_realized(&realized, members);
        let mut pg = Vec::with_capacity(k * k);
        for &i in members {
            for &j in members {
                pg.push(ctx.path_gain[i * n + j]);
            }
        }
        let geom = SlotGeometry::new(pg, k, config.noise_power);

        let mut slot_t: Vec<Vec<C64>> = members
            .iter()
            .map(|&l| sched.beamformers[l].clone().expect("scheduled link has a beamformer"))
            .collect();
        let mut slot_p: Vec<f64> = members.iter().map(|&l| sched.powers[l]).collect();

        // A link alone in its slot enters power control from full power
        // rather than from the zero-margin closed form: the control loop
        // walks it down to the threshold it actually sees, instead of
        // muting it whenever the realized channel lands below the estimate.
        if cell.mode != Mode::MaxThroughput && k == 1 {
            slot_p[0] = p_max;
        }

        if cell.mode == Mode::Lpcsi {
            // Local perfect CSI: redo the slot's beamformer/power design on
            // the channels it will actually see.
            let init: Vec<Vec<C64>> = members
                .iter()
                .map(|&l| principal_pair(realized.realized(l, l)).map(|p| p.v1))
                .collect::<Result<_, _>>()?;
            let problem = SlotProblem {
                channels: &slot_channels,
                geom: &geom,
                gamma: 0.0,
                sinr_threshold: threshold,
                p_max,
                objective,
                init_beamformers: &init,
                params: &config.opt,
            };
            let sol = optimize_slot(&problem).map_err(crate::scheduler::SchedError::from)?;
            slot_t = sol.beamformers;
            slot_p = sol.powers;
        }

        if cell.mode == Mode::MaxThroughput {
            // No power minimization: measure the SINRs as transmitted.
            for (idx, &l) in members.iter().enumerate() {
                let link_ctx = LinkContext { rx: idx, powers: &slot_p, beamformers: &slot_t, geom: &geom };
                sinrs[l] = sinr_exact(&link_ctx, &slot_channels);
                powers[l] = slot_p[idx];
            }
        } else {
            let params = PowerControlParams { n_a: config.n_a, n_b: config.n_b, sinr_threshold: threshold };
            let res = power_control_slot(&slot_channels, &geom, &slot_t, &slot_p, &params);
            for (idx, &l) in members.iter().enumerate() {
                powers[l] = res.powers[idx];
                sinrs[l] = res.sinr[idx];
            }
        }
    }

    let mut success = vec![false; n];
    let mut rates = vec![0.0; n];
    for l in 0..n {
        if powers[l] > 0.0 {
            success[l] = sinrs[l] >= threshold * (1.0 - 1e-9);
            rates[l] = (1.0 + sinrs[l]).log2() / cell.n_slots as f64;
        }
    }
    Ok(RealizationOutcome { success, powers, rates, restart: false })
}

/// Aggregated metrics for one cell.
#[derive(Debug, Clone)]
pub struct MetricRecord {
    pub connectivity_product: f64,
    pub connectivity_joint: f64,
    /// Mean over realizations of sum_k P_k / N_s.
    pub avg_sum_power: f64,
    /// Mean over realizations of sum_k P_k.
    pub avg_sum_power_unnormalized: f64,
    /// Mean over realizations of (successful links) * C_req.
    pub avg_throughput: f64,
    /// Mean over realizations of sum_k log2(1 + SINR_k) / N_s.
    pub avg_sum_rate: f64,
    pub restarts: usize,
    pub realizations: usize,
    /// Empirical per-link success rates (diagnostic).
    pub link_success_rates: Vec<f64>,
}

/// Fold realization outcomes into a cell record.
pub fn aggregate(
    outcomes: &[RealizationOutcome],
    n_links: usize,
    c_req: f64,
    n_slots: usize,
) -> MetricRecord {
    assert!(!outcomes.is_empty());
    let r = outcomes.len() as f64;
    let mut link_success = vec![0.0; n_links];
    let mut joint = 0.0;
    let mut sum_power = 0.0;
    let mut throughput = 0.0;
    let mut sum_rate = 0.0;
    let mut restarts = 0;
    for out in outcomes {
        let mut all = true;
        let mut successes = 0;
        for l in 0..n_links {
            if out.success[l] {
                link_success[l] += 1.0;
                successes += 1;
            } else {
                all = false;
            }
        }
        if all {
            joint += 1.0;
        }
        sum_power += out.powers.iter().sum::<f64>();
        throughput += successes as f64 * c_req;
        sum_rate += out.rates.iter().sum::<f64>();
        if out.restart {
            restarts += 1;
        }
    }
    for s in link_success.iter_mut() {
        *s /= r;
    }
    MetricRecord {
        connectivity_product: link_success.iter().product(),
        connectivity_joint: joint / r,
        avg_sum_power: sum_power / r / n_slots as f64,
        avg_sum_power_unnormalized: sum_power / r,
        avg_throughput: throughput / r,
        avg_sum_rate: sum_rate / r,
        restarts,
        realizations: outcomes.len(),
        link_success_rates: link_success,
    }
}

/// One row of the sweep output.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub key: CellKey,
    pub sinr_threshold: f64,
    pub metrics: MetricRecord,
    pub conn_upper_bound: f64,
    /// NaN when no closed-form power bound exists for this M.
    pub power_lower_bound: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: SimulationConfig,
    pub cells: Vec<CellResult>,
}

/// Gammas explored for a mode: GPCSI collapses the gamma axis to zero.
fn gammas_for(config: &SimulationConfig, mode: Mode) -> Vec<f64> {
    match mode {
        Mode::Gpcsi => vec![0.0],
        _ => config.gammas.clone(),
    }
}

/// Run every cell of the configured grid.
pub fn run_sweep(config: &SimulationConfig) -> Result<SweepResult, HarnessError> {
    config.validate()?;
    let ctx = build_topology_context(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;

    let mut cells = Vec::new();
    for &m in &config.m_list {
        for &n_slots in &config.n_slots_list {
            for &mode in &config.modes {
                for gamma in gammas_for(config, mode) {
                    let key = CellKey { m, n_slots, gamma, mode };
                    let cell = run_cell(config, &ctx, &key, &pool)?;
                    cells.push(cell);
                }
            }
        }
    }
    Ok(SweepResult { config: clean_config(config), cells })
}

/// Run one cell of the grid (exposed for targeted experiments and tests).
pub fn run_cell(
    config: &SimulationConfig,
    ctx: &TopologyContext,
    key: &CellKey,
    pool: &rayon::ThreadPool,
) -> Result<CellResult, HarnessError> {
    use rayon::prelude::*;
    let outcomes: Result<Vec<_>, _> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|r| run_realization(config, ctx, key, r))
            .collect()
    });
    let outcomes = outcomes?;
    let metrics = aggregate(&outcomes, ctx.tree.n_links(), config.c_req, key.n_slots);

    let threshold = sinr_threshold(config.c_req, key.n_slots);
    let lambda_min: Vec<f64> = ctx
        .link_distances
        .iter()
        .map(|d| threshold * d.powf(config.alpha) * config.noise_power / config.p_max())
        .collect();
    let max_min = lambda_min.iter().cloned().fold(0.0, f64::max);
    let lambda_max = config.lambda_max.max(1.0001 * max_min);
    let inputs = BoundInputs::new(key.m, lambda_min, lambda_max, key.n_slots)?;
    let conn_upper_bound = bounds::connectivity_upper_bound(&inputs);
    let power_lower_bound = if matches!(key.m, 1 | 2 | 4) {
        bounds::network_power_lower_bound(
            &inputs,
            threshold,
            &ctx.link_distances,
            config.alpha,
            config.noise_power,
        )?
    } else {
        f64::NAN
    };

    Ok(CellResult { key: *key, sinr_threshold: threshold, metrics, conn_upper_bound, power_lower_bound })
}

/// Strip execution-only fields so equal experiments echo equal configs.
fn clean_config(config: &SimulationConfig) -> SimulationConfig {
    let mut c = config.clone();
    c.workers = 0;
    c
}

fn fmt_f(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_list_f(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f(x)).collect::<Vec<_>>().join(",")
}

/// Provenance header: every effective experiment parameter (worker count
/// excluded on purpose; it cannot influence the numbers).
pub fn config_header(config: &SimulationConfig) -> String {
    let mut s = String::new();
    s.push_str("# mimocast sweep\n");
    s.push_str(&format!("# n_nodes = {}\n", config.n_nodes));
    s.push_str(&format!("# area_side = {}\n", fmt_f(config.area_side)));
    s.push_str(&format!("# alpha = {}\n", fmt_f(config.alpha)));
    s.push_str(&format!("# noise_power = {}\n", fmt_f(config.noise_power)));
    s.push_str(&format!("# p_max_db = {}\n", fmt_f(config.p_max_db)));
    s.push_str(&format!("# c_req = {}\n", fmt_f(config.c_req)));
    s.push_str(&format!("# gamma = {}\n", fmt_list_f(&config.gammas)));
    s.push_str(&format!(
        "# n_slots = {}\n",
        config.n_slots_list.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    ));
    s.push_str(&format!(
        "# m = {}\n",
        config.m_list.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    ));
    s.push_str(&format!(
        "# modes = {}\n",
        config.modes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
    ));
    s.push_str(&format!("# realizations = {}\n", config.realizations));
    s.push_str(&format!("# seed = {}\n", config.seed));
    s.push_str(&format!("# n_a = {}\n", config.n_a));
    s.push_str(&format!("# n_b = {}\n", config.n_b));
    s.push_str(&format!("# min_separation = {}\n", fmt_f(config.min_separation)));
    s.push_str(&format!("# source = {}\n", config.source));
    s.push_str(&format!("# lambda_max = {}\n", fmt_f(config.lambda_max)));
    s.push_str(&format!("# beta_schedule = {}\n", fmt_list_f(&config.opt.beta_factors)));
    s.push_str(&format!("# max_stage_iters = {}\n", config.opt.max_stage_iters));
    s.push_str(&format!("# grad_tol = {}\n", fmt_f(config.opt.grad_tol)));
    s.push_str(&format!("# fd_step_rel = {}\n", fmt_f(config.opt.fd_step_rel)));
    s.push_str(&format!("# p_floor_rel = {}\n", fmt_f(config.opt.p_floor_rel)));
    s
}

pub const CSV_COLUMNS: &str = "m,n_slots,gamma,mode,sinr_threshold,connectivity_product,connectivity_joint,avg_sum_power,avg_sum_power_unnormalized,avg_throughput,avg_sum_rate,conn_upper_bound,power_lower_bound,restarts,realizations";

/// Render the sweep as CSV with the provenance header. Floats carry nine
/// significant digits.
pub fn sweep_to_csv(result: &SweepResult) -> String {
    let mut s = config_header(&result.config);
    s.push_str(CSV_COLUMNS);
    s.push('\n');
    for cell in &result.cells {
        let m = &cell.metrics;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.key.m,
            cell.key.n_slots,
            fmt_f(cell.key.gamma),
            cell.key.mode,
            fmt_f(cell.sinr_threshold),
            fmt_f(m.connectivity_product),
            fmt_f(m.connectivity_joint),
            fmt_f(m.avg_sum_power),
            fmt_f(m.avg_sum_power_unnormalized),
            fmt_f(m.avg_throughput),
            fmt_f(m.avg_sum_rate),
            fmt_f(cell.conn_upper_bound),
            fmt_f(cell.power_lower_bound),
            m.restarts,
            m.realizations,
        ));
    }
    s
}

pub fn write_csv<W: Write>(result: &SweepResult, w: &mut W) -> io::Result<()> {
    w.write_all(sweep_to_csv(result).as_bytes())
}

/// Parse the flat `key = value` config format. Unknown keys are rejected;
/// missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<SimulationConfig, HarnessError> {
    let mut config = SimulationConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(HarnessError::Config(format!(
                "line {}: expected 'key = value', got '{raw}'",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| HarnessError::Config(format!("line {}: {what}", lineno + 1));
        match key {
            "n_nodes" => config.n_nodes = parse_num(value).map_err(|e| bad(&e))?,
            "area_side" => config.area_side = parse_num(value).map_err(|e| bad(&e))?,
            "alpha" => config.alpha = parse_num(value).map_err(|e| bad(&e))?,
            "noise_power" => config.noise_power = parse_num(value).map_err(|e| bad(&e))?,
            "p_max_db" => config.p_max_db = parse_num(value).map_err(|e| bad(&e))?,
            "c_req" => config.c_req = parse_num(value).map_err(|e| bad(&e))?,
            "gamma" => config.gammas = parse_list(value).map_err(|e| bad(&e))?,
            "n_slots" => config.n_slots_list = parse_list(value).map_err(|e| bad(&e))?,
            "m" => config.m_list = parse_list(value).map_err(|e| bad(&e))?,
            "modes" => {
                config.modes = value
                    .split(',')
                    .map(Mode::parse)
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "realizations" => config.realizations = parse_num(value).map_err(|e| bad(&e))?,
            "seed" => config.seed = parse_num(value).map_err(|e| bad(&e))?,
            "n_a" => config.n_a = parse_num(value).map_err(|e| bad(&e))?,
            "n_b" => config.n_b = parse_num(value).map_err(|e| bad(&e))?,
            "min_separation" => config.min_separation = parse_num(value).map_err(|e| bad(&e))?,
            "source" => config.source = parse_num(value).map_err(|e| bad(&e))?,
            "lambda_max" => config.lambda_max = parse_num(value).map_err(|e| bad(&e))?,
            "workers" => config.workers = parse_num(value).map_err(|e| bad(&e))?,
            "beta_schedule" => config.opt.beta_factors = parse_list(value).map_err(|e| bad(&e))?,
            "max_stage_iters" => config.opt.max_stage_iters = parse_num(value).map_err(|e| bad(&e))?,
            "grad_tol" => config.opt.grad_tol = parse_num(value).map_err(|e| bad(&e))?,
            "fd_step_rel" => config.opt.fd_step_rel = parse_num(value).map_err(|e| bad(&e))?,
            "p_floor_rel" => config.opt.p_floor_rel = parse_num(value).map_err(|e| bad(&e))?,
            other => {
                return Err(HarnessError::Config(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    config.validate()?;
    Ok(config)
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("could not parse '{value}'"))
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(|v| v.trim())
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| format!("could not parse list item '{v}'")))
        .collect()
}
