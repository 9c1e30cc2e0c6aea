//! Per-link diagnosis of the M=1 cell: which links fail under OCSI, and
//! were they scheduled alone or shared?

use mimocast::harness::*;

fn main() {
    let mut config = SimulationConfig::default();
    config.c_req = 0.1;
    config.gammas = vec![0.04];
    config.m_list = vec![1];
    config.realizations = 60;
    let ctx = build_topology_context(&config).unwrap();
    let n = ctx.tree.n_links();

    for mode in [Mode::Ocsi, Mode::Gpcsi] {
        let key = CellKey { m: 1, n_slots: 5, gamma: 0.04, mode };
        let outcomes: Vec<_> = (0..config.realizations)
            .map(|r| run_realization(&config, &ctx, &key, r).unwrap())
            .collect();
        let rec = aggregate(&outcomes, n, config.c_req, 5);
        println!("mode {mode}: product={:.4}", rec.connectivity_product);
        let mut rates: Vec<(usize, f64, f64)> = rec
            .link_success_rates
            .iter()
            .enumerate()
            .map(|(l, &s)| (l, s, ctx.link_distances[l]))
            .collect();
        rates.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for &(l, s, d) in rates.iter().take(8) {
            println!("  link {l:2} success={s:.3} d={d:.2}");
        }
    }
}
