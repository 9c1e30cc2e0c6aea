//! Survey topology seeds: total squared link length governs the M=1
//! interference-free connectivity scale.

use mimocast::harness::{build_topology_context, SimulationConfig};

fn main() {
    println!("seed  sum_d2  max_d2  maxCD  U_B1(ns5,c0.1)  U_B4(ns5,c0.9)");
    for seed in 1..=60u64 {
        let mut config = SimulationConfig::default();
        config.seed = seed;
        let ctx = match build_topology_context(&config) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let sum_d2: f64 = ctx.link_distances.iter().map(|d| d * d).sum();
        let max_d2 = ctx.link_distances.iter().map(|d| d * d).fold(0.0, f64::max);
        let all = vec![true; ctx.tree.n_links()];
        let max_cd = ctx.icg.max_collision_degree(&all);
        let p_max = 316.227766;
        let t1 = 2.0f64.powf(5.0 * 0.1) - 1.0;
        let ub1 = (-t1 * sum_d2 / p_max).exp();
        let t4 = 2.0f64.powf(5.0 * 0.9) - 1.0;
        let ub4: f64 = ctx
            .link_distances
            .iter()
            .map(|d| 1.0 - mimocast::bounds::cdf_m4(t4 * d * d / p_max))
            .product();
        println!("{seed:4}  {sum_d2:6.0}  {max_d2:6.1}  {max_cd}  {ub1:.3}  {ub4:.3}");
    }
}
