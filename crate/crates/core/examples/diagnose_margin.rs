//! Margin diagnosis: for one OCSI M=1 realization, how far above the
//! threshold does each link's bound sit after scheduling, how many links are
//! alone in their color, and where does the realized SINR land?

use mimocast::beamopt::SlotObjective;
use mimocast::channel::{evolve_channels, principal_pair, sample_estimated_channels};
use mimocast::harness::*;
use mimocast::rng::substream;
use mimocast::scheduler::*;
use mimocast::sinr::{sinr_exact, LinkContext, SlotChannels, SlotGeometry};

fn main() {
    let mut config = SimulationConfig::default();
    config.c_req = 0.1;
    let ctx = build_topology_context(&config).unwrap();
    let n = ctx.tree.n_links();
    let (m, n_slots, gamma) = (1usize, 5usize, 0.04f64);

    let mut solo = 0;
    let mut fail_solo = 0;
    let mut fail_shared = 0;
    let mut margins: Vec<f64> = Vec::new();
    for r in 0..40u64 {
        let seed = substream(config.seed, &[0x4348, r]);
        let est = sample_estimated_channels(n, m, seed);
        let mut principal = Vec::new();
        let mut gains = Vec::new();
        for k in 0..n {
            let pair = principal_pair(est.get(k, k)).unwrap();
            gains.push(pair.sigma1 * pair.sigma1 * ctx.path_gain[k * n + k]);
            principal.push(pair.v1);
        }
        let threshold = sinr_threshold(config.c_req, n_slots);
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
            let ch = SlotChannels::from_realized(&realized, members);
            let mut pg = Vec::new();
            for &i in members { for &j in members { pg.push(ctx.path_gain[i * n + j]); } }
            let geom = SlotGeometry::new(pg, k, 1.0);
            let t: Vec<_> = members.iter().map(|&l| s.beamformers[l].clone().unwrap()).collect();
            let p: Vec<f64> = members.iter().map(|&l| s.powers[l]).collect();
            for (idx, &_l) in members.iter().enumerate() {
                let cx = LinkContext { rx: idx, powers: &p, beamformers: &t, geom: &geom };
                let sr = sinr_exact(&cx, &ch);
                let ratio = sr / threshold;
                margins.push(ratio);
                if k == 1 { solo += 1; if ratio < 1.0 { fail_solo += 1; } }
                else if ratio < 1.0 { fail_shared += 1; }
            }
        }
    }
    let total = margins.len();
    margins.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("links: {total}, solo: {solo} (fail {fail_solo}), shared fails: {fail_shared}");
    println!(
        "realized SINR / T percentiles: p05={:.2} p25={:.2} p50={:.2} p75={:.2}",
        margins[total / 20], margins[total / 4], margins[total / 2], margins[3 * total / 4]
    );
    let below: usize = margins.iter().filter(|&&x| x < 1.0).count();
    println!("fraction below threshold at scheduled powers: {:.3}", below as f64 / total as f64);
}
