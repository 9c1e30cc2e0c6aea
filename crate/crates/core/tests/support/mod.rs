//! Shared oracles for the integration tests. Everything here is
//! deliberately independent of the library's computational paths: the
//! eigenvalue oracle uses inertia bisection instead of power iteration, the
//! quadrature oracle integrates the closed-form densities numerically, and
//! the MST oracle enumerates every spanning tree.

#![allow(dead_code)]

use mimocast::linalg::{C64, CMat};

/// Largest eigenvalue of a Hermitian matrix by inertia bisection: the
/// number of eigenvalues below x equals the number of negative pivots in
/// the LDL^H factorization of A - xI.
pub fn hermitian_max_eigenvalue(a: &CMat) -> f64 {
    let m = a.dim();
    // Gershgorin upper bound.
    let mut hi = 0.0f64;
    for i in 0..m {
        let mut row = 0.0;
        for j in 0..m {
            row += a.get(i, j).norm();
        }
        hi = hi.max(row);
    }
    let mut lo = -hi;
    let scale = hi.max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let below = eigenvalues_below(a, mid);
        if below >= m {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn eigenvalues_below(a: &CMat, x: f64) -> usize {
    let m = a.dim();
    // LDL^H with the shift; a zero pivot gets nudged.
    let mut l = vec![C64::new(0.0, 0.0); m * m];
    let mut d = vec![0.0f64; m];
    for j in 0..m {
        let mut dj = a.get(j, j).re - x;
        for k in 0..j {
            dj -= l[j * m + k].norm_sqr() * d[k];
        }
        if dj == 0.0 {
            dj = 1e-300;
        }
        d[j] = dj;
        for i in (j + 1)..m {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * m + k] * d[k] * l[j * m + k].conj();
            }
            l[i * m + j] = s / dj;
        }
    }
    d.iter().filter(|&&v| v < 0.0).count()
}

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

/// Minimum spanning tree total length by exhaustive enumeration of all
/// n^(n-2) labelled trees through Pruefer sequences (n <= 8).
pub fn brute_force_mst_total(positions: &[(f64, f64)]) -> f64 {
    let n = positions.len();
    assert!((2..=8).contains(&n));
    let dist = |a: usize, b: usize| {
        let (xa, ya) = positions[a];
        let (xb, yb) = positions[b];
        ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt()
    };
    if n == 2 {
        return dist(0, 1);
    }
    let seq_len = n - 2;
    let total = (n as u64).pow(seq_len as u32);
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; seq_len];
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = (c % n as u64) as usize;
            c /= n as u64;
        }
        // decode Pruefer sequence
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut length = 0.0;
        let mut deg = degree.clone();
        for &s in &seq {
            let leaf = (0..n).find(|&v| deg[v] == 1).unwrap();
            length += dist(leaf, s);
            deg[leaf] = usize::MAX; // used
            deg[s] -= 1;
        }
        let mut last: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
        assert_eq!(last.len(), 2);
        length += dist(last.pop().unwrap(), last.pop().unwrap());
        if length < best {
            best = length;
        }
    }
    best
}

/// Does any assignment of `n_slots` colors to the links avoid putting a
/// colliding pair on the same color? Exhaustive over n_slots^n_links.
pub fn collision_feasible_coloring_exists(
    icg: &mimocast::netgraph::InterferenceCollisionGraph,
    n_slots: usize,
) -> bool {
    let n = icg.n_links();
    assert!(n <= 8, "exhaustive oracle limited to small link counts");
    let total = (n_slots as u64).pow(n as u32);
    'outer: for code in 0..total {
        let mut colors = vec![0usize; n];
        let mut c = code;
        for slot in colors.iter_mut() {
            *slot = (c % n_slots as u64) as usize;
            c /= n_slots as u64;
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if colors[a] == colors[b] && icg.is_colliding(a, b) {
                    continue 'outer;
                }
            }
        }
        return true;
    }
    false
}

/// Mean and standard error of a sample.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unit-norm complex vector drawn from a seeded generator.
pub fn random_unit_vec(m: usize, rng: &mut mimocast::rng::Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..m).map(|_| rng.next_cn01()).collect();
    mimocast::linalg::normalize(&mut v);
    v
}

// ---------------------------------------------------------------------------
// Two-link grid-search oracle for the slot optimizer
// ---------------------------------------------------------------------------

use mimocast::beamopt::{optimize_slot, OptimizerParams, SlotObjective, SlotProblem, SlotSolution};
use mimocast::channel::{principal_pair, sample_estimated_channels, EstimatedChannels};
use mimocast::linalg::vec_dot;
use mimocast::rng::Rng;
use mimocast::sinr::{SlotChannels, SlotGeometry};

/// Exhaustive grid oracle for a two-link M=2 slot at gamma = 0.
///
/// Beamformers are parametrized per vector as t(theta, phi) =
/// [cos theta, sin theta e^{i phi}] (global phase dropped, 64 points per
/// angle), powers on a 32-level grid. Returns the best achievable cleared
/// count and the best sigmoid objective at the solver's final beta.
pub struct GridOracle {
    pub best_count: usize,
    pub best_objective: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn grid_oracle(
    est: &EstimatedChannels,
    pg: &[f64; 4],
    noise: f64,
    threshold: f64,
    p_max: f64,
    beta: f64,
) -> GridOracle {
    let angle_steps = 64usize;
    let power_levels: Vec<f64> = (1..=32).map(|j| p_max * j as f64 / 32.0).collect();

    // Effective vectors per grid beamformer: u_k = H_kk t_k, v_k = H_kj t_k.
    struct Eff {
        n_own: f64,   // ||H_kk t||^2
        n_x: f64,     // ||H_kj t||^2
        own: [C64; 2],
        cross: [C64; 2],
    }
    let mut eff = [Vec::new(), Vec::new()];
    for link in 0..2 {
        let other = 1 - link;
        let h_own = est.get(link, link);
        let h_cross = est.get(link, other);
        for a in 0..angle_steps {
            let theta = (a as f64 / (angle_steps - 1) as f64) * std::f64::consts::FRAC_PI_2;
            for b in 0..angle_steps {
                let phi = b as f64 / angle_steps as f64 * std::f64::consts::TAU;
                let t = [
                    C64::new(theta.cos(), 0.0),
                    C64::from_polar(theta.sin(), phi),
                ];
                let mut own = [C64::new(0.0, 0.0); 2];
                let mut cross = [C64::new(0.0, 0.0); 2];
                for r in 0..2 {
                    for c in 0..2 {
                        own[r] += h_own.get(r, c) * t[c];
                        cross[r] += h_cross.get(r, c) * t[c];
                    }
                }
                eff[link].push(Eff {
                    n_own: own.iter().map(|z| z.norm_sqr()).sum(),
                    n_x: cross.iter().map(|z| z.norm_sqr()).sum(),
                    own,
                    cross,
                });
            }
        }
    }

    // SINR_1(p1, p2) = p1 pg00 (n1/s - c |u1^H v2|^2 / (s (s + c n_v2))),
    // c = p2 pg10; symmetrically for link 2.
    let sig = |x: f64| 1.0 / (1.0 + (-beta * (x - threshold)).clamp(-700.0, 700.0).exp());
    let p_lo = power_levels[0];
    let mut best_count = 0usize;
    let mut best_obj = f64::NEG_INFINITY;
    for e1 in &eff[0] {
        for e2 in &eff[1] {
            let ip1 = vec_dot(&e1.own, &e2.cross).norm_sqr(); // |u1^H (H21 t2)|^2
            let ip2 = vec_dot(&e2.own, &e1.cross).norm_sqr();
            let b1 = |p1: f64, p2: f64| {
                let c = p2 * pg[2]; // gain(1 -> 0)
                p1 * pg[0] * (e1.n_own / noise - c * ip1 / (noise * (noise + c * e2.n_x)))
            };
            let b2 = |p1: f64, p2: f64| {
                let c = p1 * pg[1]; // gain(0 -> 1)
                p2 * pg[3] * (e2.n_own / noise - c * ip2 / (noise * (noise + c * e1.n_x)))
            };

            // Upper bound on the pair's objective over the power grid:
            // b1 max at (p_max, p_lo), b2 max at (p_lo, p_max).
            let ub = sig(b1(p_max, p_lo)) + sig(b2(p_lo, p_max));
            let count2 = grid_pair_feasible(&power_levels, threshold, &b1, &b2);
            if count2 {
                best_count = best_count.max(2);
            } else if b1(p_max, p_lo) >= threshold || b2(p_lo, p_max) >= threshold {
                best_count = best_count.max(1);
            }
            if ub <= best_obj {
                continue;
            }
            for &p1 in &power_levels {
                for &p2 in &power_levels {
                    let obj = sig(b1(p1, p2)) + sig(b2(p1, p2));
                    if obj > best_obj {
                        best_obj = obj;
                    }
                }
            }
        }
    }
    GridOracle { best_count, best_objective: best_obj }
}

/// Least-fixed-point search for a jointly feasible pair on the power grid.
pub fn grid_pair_feasible(
    levels: &[f64],
    threshold: f64,
    b1: &dyn Fn(f64, f64) -> f64,
    b2: &dyn Fn(f64, f64) -> f64,
) -> bool {
    let mut i1 = 0usize;
    let mut i2 = 0usize;
    for _ in 0..(2 * levels.len() + 2) {
        let mut moved = false;
        while i1 < levels.len() && b1(levels[i1], levels[i2]) < threshold {
            i1 += 1;
            moved = true;
        }
        if i1 >= levels.len() {
            return false;
        }
        while i2 < levels.len() && b2(levels[i1], levels[i2]) < threshold {
            i2 += 1;
            moved = true;
        }
        if i2 >= levels.len() {
            return false;
        }
        if !moved {
            return true;
        }
    }
    false
}

pub fn two_link_grid_instance(seed: u64) -> (SlotSolution, GridOracle, f64) {
    let est = sample_estimated_channels(2, 2, seed);
    let links = [0usize, 1];
    let ch = SlotChannels::from_estimated(&est, &links);
    let mut rng = Rng::new(seed ^ 0xabcd);
    // own-link distances ~1-2 m, cross distances ~2-5 m
    let d00 = 1.0 + rng.next_range(1.0);
    let d11 = 1.0 + rng.next_range(1.0);
    let d01 = 2.0 + rng.next_range(3.0);
    let d10 = 2.0 + rng.next_range(3.0);
    let pg = [d00.powi(-2), d01.powi(-2), d10.powi(-2), d11.powi(-2)];
    let noise = 1.0;
    let p_max = 31.6;
    // threshold at a level that keeps both one- and two-link outcomes in play
    let g0 = principal_pair(est.get(0, 0)).unwrap().sigma1.powi(2) * pg[0];
    let g1 = principal_pair(est.get(1, 1)).unwrap().sigma1.powi(2) * pg[3];
    let threshold = 0.35 * p_max * g0.min(g1);
    let geom = SlotGeometry::new(pg.to_vec(), 2, noise);
    let init = vec![
        principal_pair(est.get(0, 0)).unwrap().v1,
        principal_pair(est.get(1, 1)).unwrap().v1,
    ];
    let params = OptimizerParams::default();
    let problem = SlotProblem {
        channels: &ch,
        geom: &geom,
        gamma: 0.0,
        sinr_threshold: threshold,
        p_max,
        objective: SlotObjective::Connectivity,
        init_beamformers: &init,
        params: &params,
    };
    let sol = optimize_slot(&problem).unwrap();
    let beta = 16.0 / threshold;
    let oracle = grid_oracle(&est, &pg, noise, threshold, p_max, beta);
    (sol, oracle, threshold)
}

