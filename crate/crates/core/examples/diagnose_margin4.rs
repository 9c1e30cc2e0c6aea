//! Margin diagnosis for the M=4, N_s=5, gamma=0.04 cell: per-link bound
//! margin over the threshold at the committed powers, solo/shared split of
//! the realized failures.

use mimocast::beamopt::SlotObjective;
use mimocast::channel::{evolve_channels, principal_pair, sample_estimated_channels};
use mimocast::harness::*;
use mimocast::rng::substream;
use mimocast::scheduler::*;
use mimocast::sinr::{expected_sinr_lower_bound, sinr_exact, LinkContext, SlotChannels, SlotGeometry};

fn main() {
    let mut config = SimulationConfig::default();
    config.c_req = 0.9;
    config.seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let ctx = build_topology_context(&config).unwrap();
    let n = ctx.tree.n_links();
    let (m, n_slots, gamma) = (4usize, 5usize, 0.04f64);
    let threshold = sinr_threshold(config.c_req, n_slots);

    let mut bound_margins: Vec<f64> = Vec::new();
    let mut real_margins: Vec<f64> = Vec::new();
    let mut fails_solo = 0;
    let mut fails_shared = 0;
    let mut solo_count = 0;
    for r in 0..60u64 {
        let seed = substream(config.seed, &[0x4348, r]);
        let est = sample_estimated_channels(n, m, seed);
        let mut principal = Vec::new();
        let mut gains = Vec::new();
        for k in 0..n {
            let pair = principal_pair(est.get(k, k)).unwrap();
            gains.push(pair.sigma1 * pair.sigma1 * ctx.path_gain[k * n + k]);
            principal.push(pair.v1);
        }
        let active = qualify_active_set(&gains, config.p_max(), threshold, 1.0);
        let input = SchedulerInput {
            active: &active,
            icg: &ctx.icg,
            n_slots,
            channels: &est,
            path_gain: &ctx.path_gain,
            gains: &gains,
            principal: &principal,
            gamma,
            sinr_threshold: threshold,
            p_max: config.p_max(),
            noise_power: 1.0,
            objective: SlotObjective::Connectivity,
            params: &config.opt,
        };
        let ScheduleOutcome::Scheduled(s) = schedule(&input).unwrap() else { continue };
        let realized = evolve_channels(&est, gamma, seed).unwrap();
        for color in 0..n_slots {
            let members = &s.state.members[color];
            if members.is_empty() { continue; }
            let k = members.len();
            let ch_est = SlotChannels::from_estimated(&est, members);
            let ch_real = SlotChannels::from_realized(&realized, members);
            let mut pg = Vec::new();
            for &i in members { for &j in members { pg.push(ctx.path_gain[i * n + j]); } }
            let geom = SlotGeometry::new(pg, k, 1.0);
            let t: Vec<_> = members.iter().map(|&l| s.beamformers[l].clone().unwrap()).collect();
            let p: Vec<f64> = members.iter().map(|&l| s.powers[l]).collect();
            for idx in 0..k {
                let cx = LinkContext { rx: idx, powers: &p, beamformers: &t, geom: &geom };
                let b = expected_sinr_lower_bound(&cx, &ch_est, gamma).unwrap();
                let sr = sinr_exact(&cx, &ch_real);
                bound_margins.push(b / threshold);
                real_margins.push(sr / threshold);
                if k == 1 { solo_count += 1; }
                if sr < threshold {
                    if k == 1 { fails_solo += 1; } else { fails_shared += 1; }
                }
            }
        }
    }
    let total = real_margins.len();
    let pct = |v: &mut Vec<f64>, q: f64| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[(q * total as f64) as usize]
    };
    println!("links={total} solo={solo_count} fails(solo)={fails_solo} fails(shared)={fails_shared}");
    println!(
        "bound/T:    p02={:.3} p10={:.3} p25={:.3} p50={:.3}",
        pct(&mut bound_margins, 0.02), pct(&mut bound_margins, 0.10),
        pct(&mut bound_margins, 0.25), pct(&mut bound_margins, 0.50)
    );
    println!(
        "realized/T: p02={:.3} p10={:.3} p25={:.3} p50={:.3}  frac_below={:.4}",
        pct(&mut real_margins, 0.02), pct(&mut real_margins, 0.10),
        pct(&mut real_margins, 0.25), pct(&mut real_margins, 0.50),
        real_margins.iter().filter(|&&x| x < 1.0).count() as f64 / total as f64
    );
}
