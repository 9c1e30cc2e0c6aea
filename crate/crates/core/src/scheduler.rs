//! Priority-ordered greedy slot assignment.
//!
//! Active links are colored one at a time in decreasing scheduling priority
//! S_P = C_D W + 1/g (collision degree first, then inverse channel gain).
//! For each link the colors split into: unavailable (a colliding neighbor
//! sits there), free (empty), and constraint (occupied purely by interfering
//! neighbors). A link joins a constraint color only after a joint
//! beamformer/power re-optimization of that color's members shows the move
//! costs nothing by the slot objective; otherwise it takes the smallest free
//! color with the closed-form singleton power. When neither option exists
//! the frame cannot be scheduled with this many slots and the caller must
//! retry with a larger slot count.

use crate::beamopt::{optimize_slot, BeamoptError, OptimizerParams, SlotObjective, SlotProblem, SlotSolution};
use crate::channel::EstimatedChannels;
use crate::linalg::C64;
use crate::netgraph::InterferenceCollisionGraph;
use crate::sinr::{SlotChannels, SlotGeometry};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchedError {
    #[error("slot count must be at least 1")]
    NoSlots,
    #[error(transparent)]
    Beamopt(#[from] BeamoptError),
}

/// Per-frame coloring bookkeeping.
#[derive(Debug, Clone)]
pub struct ColorState {
    pub n_slots: usize,
    /// Member link ids per color.
    pub members: Vec<Vec<usize>>,
    /// Assigned color per link id (None = unassigned / inactive).
    pub color_of: Vec<Option<usize>>,
    /// P_C: committed sum transmit power per color.
    pub sum_power: Vec<f64>,
    /// N_C: committed count of links failing the threshold per color.
    pub failing: Vec<usize>,
    /// Committed sum rate per color (throughput objective bookkeeping).
    pub sum_rate: Vec<f64>,
}

impl ColorState {
    pub fn new(n_links: usize, n_slots: usize) -> Self {
        ColorState {
            n_slots,
            members: vec![Vec::new(); n_slots],
            color_of: vec![None; n_links],
            sum_power: vec![0.0; n_slots],
            failing: vec![0; n_slots],
            sum_rate: vec![0.0; n_slots],
        }
    }
}

/// Color classification for one unassigned link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorSets {
    /// D_F: colors with no members.
    pub free: Vec<usize>,
    /// D_C: occupied colors whose members all merely interfere.
    pub constraint: Vec<usize>,
    /// D_U: colors holding at least one colliding neighbor.
    pub unavailable: Vec<usize>,
    /// D_I: colors holding at least one interfering neighbor.
    pub interfering: Vec<usize>,
}

/// Classify every color for `link` against the current assignment:
/// D_F = C - (D_I u D_U), D_C = D_I - (D_I n D_U).
pub fn color_sets(link: usize, state: &ColorState, icg: &InterferenceCollisionGraph) -> ColorSets {
    let mut free = Vec::new();
    let mut constraint = Vec::new();
    let mut unavailable = Vec::new();
    let mut interfering = Vec::new();
    for color in 0..state.n_slots {
        let members = &state.members[color];
        if members.is_empty() {
            free.push(color);
            continue;
        }
        let collides = members.iter().any(|&l| icg.is_colliding(link, l));
        let interferes = members.iter().any(|&l| icg.is_interfering(link, l));
        if collides {
            unavailable.push(color);
        }
        if interferes {
            interfering.push(color);
        }
        if interferes && !collides {
            constraint.push(color);
        }
    }
    ColorSets { free, constraint, unavailable, interfering }
}

/// Active-set qualification: a link can only meet the threshold at all if
/// P_max g_k >= SINR_t sigma^2 (interference-free, maximum power).
pub fn qualify_active_set(
    gains: &[f64],
    p_max: f64,
    sinr_threshold: f64,
    noise_power: f64,
) -> Vec<usize> {
    gains
        .iter()
        .enumerate()
        .filter(|(_, &g)| p_max * g >= sinr_threshold * noise_power)
        .map(|(k, _)| k)
        .collect()
}

/// Scheduling priority S_P = C_D W + 1/g.
pub fn scheduling_priority(collision_degree: usize, gain: f64, w: f64) -> f64 {
    collision_degree as f64 * w + 1.0 / gain
}

/// Priority constant W = 1.01 max_k 1/g_k over the active links.
pub fn priority_weight(gains: &[f64], active: &[usize]) -> f64 {
    1.01 * active.iter().map(|&k| 1.0 / gains[k]).fold(0.0, f64::max)
}

/// Inputs for one frame's scheduling pass.
pub struct SchedulerInput<'a> {
    /// Qualified link ids (subset of 0..n_links).
    pub active: &'a [usize],
    pub icg: &'a InterferenceCollisionGraph,
    pub n_slots: usize,
    /// Estimated channels for all ordered link pairs.
    pub channels: &'a EstimatedChannels,
    /// Path gain 1/d_ij^alpha for all ordered link pairs (n_links x n_links).
    pub path_gain: &'a [f64],
    /// Estimated channel gains g_k = sigma_k1^2 / d_kk^alpha.
    pub gains: &'a [f64],
    /// Principal right singular vectors of the own-link channel estimates.
    pub principal: &'a [Vec<C64>],
    pub gamma: f64,
    pub sinr_threshold: f64,
    pub p_max: f64,
    pub noise_power: f64,
    pub objective: SlotObjective,
    pub params: &'a OptimizerParams,
}

/// Successful schedule: the coloring plus committed beamformers and powers.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub state: ColorState,
    pub beamformers: Vec<Option<Vec<C64>>>,
    pub powers: Vec<f64>,
    /// Scheduling freedom F_k observed when each link was colored
    /// (diagnostic only; the algorithm never reads it).
    pub freedom: Vec<usize>,
    pub priorities: Vec<f64>,
}

/// Outcome of a scheduling attempt.
#[derive(Debug, Clone)]
pub enum ScheduleOutcome {
    Scheduled(Schedule),
    /// Not enough colors to separate the colliding links under the greedy
    /// order; retry with a larger slot count.
    Restart,
}

fn n_links_of(input: &SchedulerInput) -> usize {
    input.icg.n_links()
}

/// Solve the joint beamformer/power problem for `links` sharing one color.
fn solve_color(input: &SchedulerInput, links: &[usize]) -> Result<SlotSolution, SchedError> {
    let n = n_links_of(input);
    let k = links.len();
    let channels = SlotChannels::from_estimated(input.channels, links);
    let mut pg = Vec::with_capacity(k * k);
    for &i in links {
        for &j in links {
            pg.push(input.path_gain[i * n + j]);
        }
    }
    let geom = SlotGeometry::new(pg, k, input.noise_power);
    let init: Vec<Vec<C64>> = links.iter().map(|&l| input.principal[l].clone()).collect();
    let problem = SlotProblem {
        channels: &channels,
        geom: &geom,
        gamma: input.gamma,
        sinr_threshold: input.sinr_threshold,
        p_max: input.p_max,
        objective: input.objective,
        init_beamformers: &init,
        params: input.params,
    };
    Ok(optimize_slot(&problem)?)
}

/// Greedy priority-ordered coloring of the active links.
pub fn schedule(input: &SchedulerInput) -> Result<ScheduleOutcome, SchedError> {
    if input.n_slots == 0 {
        return Err(SchedError::NoSlots);
    }
    let n = n_links_of(input);
    let mut state = ColorState::new(n, input.n_slots);
    let mut beamformers: Vec<Option<Vec<C64>>> = vec![None; n];
    let mut powers = vec![0.0; n];
    let mut freedom = vec![0usize; n];
    let mut priorities = vec![0.0; n];

    let mut active_mask = vec![false; n];
    for &k in input.active {
        active_mask[k] = true;
    }
    let w = priority_weight(input.gains, input.active);
    let mut order: Vec<usize> = input.active.to_vec();
    for &k in input.active {
        let cd = input.icg.collision_degree(k, &active_mask);
        priorities[k] = scheduling_priority(cd, input.gains[k], w);
    }
    // Highest priority first; ties broken by lower link id.
    order.sort_by(|&a, &b| {
        priorities[b]
            .partial_cmp(&priorities[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    for &m in &order {
        let sets = color_sets(m, &state, input.icg);
        freedom[m] = input.n_slots - sets.unavailable.len();

        if sets.constraint.is_empty() {
            let Some(&color) = sets.free.first() else {
                return Ok(ScheduleOutcome::Restart);
            };
            assign_singleton(input, &mut state, &mut beamformers, &mut powers, m, color);
            continue;
        }

        // Evaluate each constraint color with link m added.
        let mut best: Option<(usize, f64, f64, SlotSolution, Vec<usize>)> = None;
        for &color in &sets.constraint {
            let mut links = state.members[color].clone();
            links.push(m);
            let sol = solve_color(input, &links)?;
            let (delta_obj, delta_power) = match input.objective {
                SlotObjective::Connectivity => {
                    let failing = links.len() - sol.cleared(input.sinr_threshold);
                    let delta_n = failing as f64 - state.failing[color] as f64;
                    (delta_n, sol.sum_power() - state.sum_power[color])
                }
                SlotObjective::SumRate => {
                    // Larger rate gain is better; negate so the generic
                    // "minimize" comparison below applies.
                    let delta_rate = sol.sum_rate() - state.sum_rate[color];
                    (-delta_rate, sol.sum_power() - state.sum_power[color])
                }
            };
            let better = match &best {
                None => true,
                Some((bc, bobj, bpow, _, _)) => {
                    delta_obj < bobj - 1e-12
                        || (delta_obj <= bobj + 1e-12
                            && (delta_power < bpow - 1e-12
                                || (delta_power <= bpow + 1e-12 && color < *bc)))
                }
            };
            if better {
                best = Some((color, delta_obj, delta_power, sol, links));
            }
        }
        let (color, delta_obj, _dp, sol, links) = best.expect("constraint set was non-empty");

        let join = match input.objective {
            // Join when no link is lost by the move (negative = strictly
            // better: the re-optimization rescued a previously failing one).
            SlotObjective::Connectivity => sets.free.is_empty() || delta_obj <= 0.0,
            // Join when sharing adds at least the rate the link would earn
            // alone on a fresh color at full power.
            SlotObjective::SumRate => {
                let solo_rate = (1.0
                    + input.p_max * input.gains[m] / input.noise_power)
                    .log2();
                sets.free.is_empty() || -delta_obj >= solo_rate
            }
        };

        if join {
            for (idx, &l) in links.iter().enumerate() {
                beamformers[l] = Some(sol.beamformers[idx].clone());
                powers[l] = sol.powers[idx];
                state.color_of[l] = Some(color);
            }
            state.members[color] = links.clone();
            state.sum_power[color] = sol.sum_power();
            state.failing[color] = links.len() - sol.cleared(input.sinr_threshold);
            state.sum_rate[color] = sol.sum_rate();
        } else {
            let color = *sets.free.first().expect("free set checked above");
            assign_singleton(input, &mut state, &mut beamformers, &mut powers, m, color);
        }
    }

    Ok(ScheduleOutcome::Scheduled(Schedule { state, beamformers, powers, freedom, priorities }))
}

fn assign_singleton(
    input: &SchedulerInput,
    state: &mut ColorState,
    beamformers: &mut [Option<Vec<C64>>],
    powers: &mut [f64],
    link: usize,
    color: usize,
) {
    // Fresh colors carry the closed-form threshold power under the
    // connectivity objective (the bookkeeping that later Delta-P
    // comparisons read); throughput scheduling transmits flat out.
    let p = match input.objective {
        SlotObjective::Connectivity => {
            input.sinr_threshold * input.noise_power / input.gains[link]
        }
        SlotObjective::SumRate => input.p_max,
    };
    state.members[color].push(link);
    state.color_of[link] = Some(color);
    state.sum_power[color] = p;
    state.failing[color] = 0;
    state.sum_rate[color] = match input.objective {
        SlotObjective::Connectivity => (1.0 + input.sinr_threshold).log2(),
        SlotObjective::SumRate => {
            (1.0 + input.p_max * input.gains[link] / input.noise_power).log2()
        }
    };
    beamformers[link] = Some(input.principal[link].clone());
    powers[link] = p;
}

/// Plain-text dump of a schedule: per-link color plus per-color members.
pub fn format_schedule(schedule: &Schedule) -> String {
    let mut out = String::from("link\tcolor\tpower\n");
    for (link, color) in schedule.state.color_of.iter().enumerate() {
        if let Some(c) = color {
            out.push_str(&format!("{link}\t{c}\t{:.8e}\n", schedule.powers[link]));
        }
    }
    out.push_str("color\tmembers\n");
    for (c, members) in schedule.state.members.iter().enumerate() {
        let list: Vec<String> = members.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("{c}\t[{}]\n", list.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qualification_boundary_is_inclusive() {
        let gains = [1.0, 0.5, 2.0];
        // P_max g = threshold exactly for link 0.
        let active = qualify_active_set(&gains, 10.0, 10.0, 1.0);
        assert_eq!(active, vec![0, 2]);
        // huge gains admit everything
        let active = qualify_active_set(&gains, 1e9, 10.0, 1.0);
        assert_eq!(active, vec![0, 1, 2]);
    }

    #[test]
    fn priority_arithmetic() {
        assert_eq!(scheduling_priority(0, 1.0, 10.0), 1.0);
        assert_eq!(scheduling_priority(3, 0.5, 10.0), 32.0);
    }

    #[test]
    fn priority_orders_by_collision_degree_first() {
        let mut rng = crate::rng::Rng::new(3);
        for _ in 0..200 {
            let gains: Vec<f64> = (0..6).map(|_| 0.05 + rng.next_f64() * 10.0).collect();
            let active: Vec<usize> = (0..6).collect();
            let w = priority_weight(&gains, &active);
            for k in 0..6 {
                for l in 0..6 {
                    let (cd_k, cd_l) = (2usize, 1usize);
                    let sp_k = scheduling_priority(cd_k, gains[k], w);
                    let sp_l = scheduling_priority(cd_l, gains[l], w);
                    assert!(sp_k > sp_l, "higher collision degree must dominate");
                }
            }
        }
    }

    #[test]
    fn color_set_identities() {
        use crate::netgraph::{build_icg, Link, RoutingTree};
        // Links: 0 = (0->1), 1 = (1->2), 2 = (0->3). 0 collides with both
        // (chain with 1, shared tx with 2); 1 and 2 interfere.
        let tree = RoutingTree {
            links: vec![
                Link { id: 0, tx: 0, rx: 1, distance: 1.0 },
                Link { id: 1, tx: 1, rx: 2, distance: 1.0 },
                Link { id: 2, tx: 0, rx: 3, distance: 1.0 },
            ],
            parent: vec![None, Some(0), Some(1), Some(0)],
            source: 0,
        };
        let icg = build_icg(&tree);

        // nothing colored: everything free
        let state = ColorState::new(3, 3);
        let sets = color_sets(0, &state, &icg);
        assert_eq!(sets.free, vec![0, 1, 2]);
        assert!(sets.constraint.is_empty());

        // colliding neighbor (link 2, shares tx with 0) on color 1
        let mut state = ColorState::new(3, 3);
        state.members[1].push(2);
        state.color_of[2] = Some(1);
        let sets = color_sets(0, &state, &icg);
        assert_eq!(sets.unavailable, vec![1]);
        assert_eq!(sets.free, vec![0, 2]);
        assert!(sets.constraint.is_empty());

        // interfering neighbor (2) on color 0, colliding neighbor (0) on 1,
        // from link 1's perspective: D_I = {0}, D_U = {1}, D_C = {0}, D_F = {2}
        let mut state = ColorState::new(3, 3);
        state.members[0].push(2);
        state.color_of[2] = Some(0);
        state.members[1].push(0);
        state.color_of[0] = Some(1);
        let sets = color_sets(1, &state, &icg);
        assert_eq!(sets.interfering, vec![0]);
        assert_eq!(sets.unavailable, vec![1]);
        assert_eq!(sets.constraint, vec![0]);
        assert_eq!(sets.free, vec![2]);
    }
}
