//! Timing probe: schedules one frame per (m, n_slots) pair and reports how
//! much optimizer work it took.

use mimocast::beamopt::{optimize_slot, SlotObjective, SlotProblem};
use mimocast::channel::{principal_pair, sample_estimated_channels};
use mimocast::harness::{build_topology_context, sinr_threshold, SimulationConfig};
use mimocast::rng::substream;
use mimocast::sinr::{SlotChannels, SlotGeometry};
use std::time::Instant;

fn main() {
    let mut config = SimulationConfig::default();
    config.c_req = 0.9;
    let ctx = build_topology_context(&config).unwrap();
    let n = ctx.tree.n_links();

    for &(m, n_slots, gamma) in &[(4usize, 3usize, 0.04f64), (4, 5, 0.04), (2, 5, 0.04), (1, 5, 0.04)] {
        let seed = substream(config.seed, &[0x4348, 0]);
        let est = sample_estimated_channels(n, m, seed);
        let mut principal = Vec::new();
        let mut gains = Vec::new();
        for k in 0..n {
            let pair = principal_pair(est.get(k, k)).unwrap();
            gains.push(pair.sigma1 * pair.sigma1 * ctx.path_gain[k * n + k]);
            principal.push(pair.v1);
        }
        let threshold = sinr_threshold(config.c_req, n_slots);

        // mimic a mid-schedule constraint-color solve with K links
        for k_links in [4usize, 7, 10] {
            let links: Vec<usize> = (0..n).step_by(3).take(k_links).collect();
            let channels = SlotChannels::from_estimated(&est, &links);
            let mut pg = Vec::new();
            for &i in &links {
                for &j in &links {
                    pg.push(ctx.path_gain[i * n + j].min(1e6));
                }
            }
            let geom = SlotGeometry::new(pg, links.len(), 1.0);
            let init: Vec<_> = links.iter().map(|&l| principal[l].clone()).collect();
            let problem = SlotProblem {
                channels: &channels,
                geom: &geom,
                gamma,
                sinr_threshold: threshold,
                p_max: config.p_max(),
                objective: SlotObjective::Connectivity,
                init_beamformers: &init,
                params: &config.opt,
            };
            let start = Instant::now();
            let sol = optimize_slot(&problem).unwrap();
            let dt = start.elapsed().as_secs_f64();
            println!(
                "m={m} n_slots={n_slots} K={k_links}: {:.1} ms, iters={:?}, cleared={}/{}",
                dt * 1e3,
                sol.stage_iters,
                sol.cleared(threshold),
                k_links
            );
        }
    }
}
