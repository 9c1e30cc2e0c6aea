//! Joint beamformer / power optimization for the links sharing one slot.
//!
//! The slot objective is either the sigmoid-smoothed count of links whose
//! expected-SINR lower bound clears the threshold (connectivity scheduling)
//! or the sum of log2(1 + bound) terms (throughput scheduling). Both are
//! maximized with projected gradient ascent over the concatenated real
//! parametrization of the beamformers (2M reals each) and the powers, with
//! central-difference gradients. The sigmoid sharpness beta follows an
//! increasing continuation schedule; each stage starts from the previous
//! stage's iterate and never decreases its own objective.
//!
//! Beamformers are initialized with the principal singular vectors of the
//! own-link channels and powers at P_max. After every accepted step each
//! beamformer is renormalized and each power clamped to its box, so every
//! iterate is feasible.

use crate::linalg::{chol_inverse_into, chol_inverse_trace, chol_solve, normalize, vec_dot, vec_norm_sqr, C64, CMat};
use crate::sinr::{SlotChannels, SlotGeometry};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BeamoptError {
    #[error("objective became non-finite at beta stage {stage}, iteration {iter}")]
    NonFiniteObjective { stage: usize, iter: usize },
    #[error("slot problem is empty")]
    EmptySlot,
}

/// Which quantity a slot solve maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotObjective {
    /// Sigmoid-smoothed count of links whose bound clears the threshold.
    Connectivity,
    /// sum_k log2(1 + bound_k); beta plays no role for this objective.
    SumRate,
}

/// Projected-gradient and continuation controls.
#[derive(Debug, Clone)]
pub struct OptimizerParams {
    /// Sigmoid sharpness factors; effective beta = factor / SINR_t.
    pub beta_factors: Vec<f64>,
    pub max_stage_iters: usize,
    pub grad_tol: f64,
    /// Relative central-difference step.
    pub fd_step_rel: f64,
    /// Power floor as a fraction of P_max.
    pub p_floor_rel: f64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        OptimizerParams {
            // The final sharpness sets how much bound margin survives above
            // the threshold (roughly a few / beta); 16 leaves the ~20%
            // headroom that keeps scheduled links robust to realized-channel
            // deviations at the gamma levels of interest.
            beta_factors: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            max_stage_iters: 300,
            grad_tol: 1e-6,
            fd_step_rel: 1e-6,
            p_floor_rel: 1e-6,
        }
    }
}

/// One slot's optimization inputs. `channels` and `geom` are restricted to
/// the co-active links; the caller guarantees no colliding pair is present.
pub struct SlotProblem<'a> {
    pub channels: &'a SlotChannels<'a>,
    pub geom: &'a SlotGeometry,
    pub gamma: f64,
    pub sinr_threshold: f64,
    pub p_max: f64,
    pub objective: SlotObjective,
    /// Initial transmit beamformers (principal singular vectors).
    pub init_beamformers: &'a [Vec<C64>],
    pub params: &'a OptimizerParams,
}

/// Result of a slot solve.
#[derive(Debug, Clone)]
pub struct SlotSolution {
    pub beamformers: Vec<Vec<C64>>,
    pub powers: Vec<f64>,
    /// Final-stage objective value.
    pub objective: f64,
    /// Per-link bound (or exact SINR at gamma = 0) at the solution.
    pub bounds: Vec<f64>,
    /// Per-stage objective trace: (stage-initial, stage-final).
    pub stage_trace: Vec<(f64, f64)>,
    /// Iterations consumed per stage.
    pub stage_iters: Vec<usize>,
}

impl SlotSolution {
    /// Number of links whose bound clears the threshold (sharp indicator).
    pub fn cleared(&self, threshold: f64) -> usize {
        self.bounds.iter().filter(|&&b| b >= threshold).count()
    }

    pub fn sum_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn sum_rate(&self) -> f64 {
        self.bounds.iter().map(|&b| (1.0 + b).log2()).sum()
    }
}

/// Sigmoid relaxation of the threshold indicator, guarded against overflow.
pub fn sigmoid_indicator(x: f64, threshold: f64, beta: f64) -> f64 {
    debug_assert!(beta > 0.0);
    let arg = (-beta * (x - threshold)).clamp(-700.0, 700.0);
    1.0 / (1.0 + arg.exp())
}

/// Per-link cache for one receiver: covariance, factorization, explicit
/// inverse, the solved own-channel vector, quadratic form and inverse
/// trace. Rebuilt in full on accepted steps; the finite-difference loop
/// patches bounds through rank-one inverse updates against these caches.
struct RxCache {
    a: CMat,
    chol: CMat,
    inv: CMat,
    /// w = A^{-1} h with h the own effective channel.
    w: Vec<C64>,
    quad: f64,
    tr_inv: f64,
}

/// Incremental objective evaluator over the raw (t, p) state.
struct Evaluator<'a> {
    k: usize,
    gamma: f64,
    threshold: f64,
    objective: SlotObjective,
    channels: &'a SlotChannels<'a>,
    geom: &'a SlotGeometry,
    t: Vec<Vec<C64>>,
    p: Vec<f64>,
    /// v[i * k + j] = H_ij t_i.
    v: Vec<Vec<C64>>,
    /// u[i * k + j] = A_j^{-1} v[i * k + j].
    u: Vec<Vec<C64>>,
    rx: Vec<RxCache>,
    bounds: Vec<f64>,
    solve_buf: Vec<C64>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a SlotProblem<'a>, t: Vec<Vec<C64>>, p: Vec<f64>) -> Self {
        let k = problem.geom.k;
        let m = problem.channels.m;
        let mut ev = Evaluator {
            k,
            gamma: problem.gamma,
            threshold: problem.sinr_threshold,
            objective: problem.objective,
            channels: problem.channels,
            geom: problem.geom,
            t,
            p,
            v: vec![vec![C64::new(0.0, 0.0); m]; k * k],
            u: vec![vec![C64::new(0.0, 0.0); m]; k * k],
            rx: (0..k)
                .map(|_| RxCache {
                    a: CMat::zeros(m),
                    chol: CMat::zeros(m),
                    inv: CMat::zeros(m),
                    w: vec![C64::new(0.0, 0.0); m],
                    quad: 0.0,
                    tr_inv: 0.0,
                })
                .collect(),
            bounds: vec![0.0; k],
            solve_buf: vec![C64::new(0.0, 0.0); m],
        };
        ev.rebuild();
        ev
    }

    /// Overwrite the state in place (no allocation) and recompute caches.
    fn set_state(&mut self, t: &[Vec<C64>], p: &[f64]) {
        for (dst, src) in self.t.iter_mut().zip(t.iter()) {
            dst.copy_from_slice(src);
        }
        self.p.copy_from_slice(p);
        self.rebuild();
    }

    fn rebuild(&mut self) {
        let k = self.k;
        for i in 0..k {
            for j in 0..k {
                self.channels.get(i, j).mul_vec(&self.t[i], &mut self.v[i * k + j]);
            }
        }
        for j in 0..k {
            let (quad, tr_inv) = {
                let cache = &mut self.rx[j];
                let mut interf = 0.0;
                cache.a.zero_fill();
                for i in 0..k {
                    if i == j {
                        continue;
                    }
                    let c = self.p[i] * self.geom.gain(i, j);
                    interf += c;
                    cache.a.add_scaled_outer(&self.v[i * k + j], (1.0 - self.gamma) * c);
                }
                cache.a.add_scaled_identity(self.gamma * interf + self.geom.noise_power);
                cache
                    .a
                    .cholesky_into(&mut cache.chol)
                    .expect("covariance with positive noise is positive definite");
                chol_inverse_into(&cache.chol, &mut cache.inv);
                let h = &self.v[j * k + j];
                cache.inv.mul_vec(h, &mut cache.w);
                let quad = vec_dot(h, &cache.w).re.max(0.0);
                let tr_inv = if self.gamma > 0.0 { chol_inverse_trace(&cache.chol) } else { 0.0 };
                cache.quad = quad;
                cache.tr_inv = tr_inv;
                (quad, tr_inv)
            };
            // pair solves u_ij = A_j^{-1} v_ij feed the rank-one updates
            for i in 0..k {
                if i == j {
                    continue;
                }
                let cache = &self.rx[j];
                cache.inv.mul_vec(&self.v[i * k + j], &mut self.solve_buf);
                self.u[i * k + j].copy_from_slice(&self.solve_buf);
            }
            self.bounds[j] = self.bound_from_parts(j, self.p[j], quad, tr_inv);
        }
    }

    #[inline]
    fn bound_from_parts(&self, j: usize, pj: f64, quad: f64, tr_inv: f64) -> f64 {
        pj * self.geom.gain(j, j) * ((1.0 - self.gamma) * quad + self.gamma * tr_inv)
    }

    #[inline]
    fn score(&self, bound: f64, beta: f64) -> f64 {
        match self.objective {
            SlotObjective::Connectivity => sigmoid_indicator(bound, self.threshold, beta),
            SlotObjective::SumRate => (1.0 + bound.max(0.0)).log2(),
        }
    }

    fn objective_value(&self, beta: f64) -> f64 {
        self.bounds.iter().map(|&b| self.score(b, beta)).sum()
    }

    /// Sigmoid slope per link at the current bounds; links whose slope is
    /// numerically zero cannot move the gradient and are skipped inside the
    /// finite-difference loop.
    fn live_mask(&self, beta: f64, live: &mut [bool]) {
        match self.objective {
            SlotObjective::Connectivity => {
                for (j, &b) in self.bounds.iter().enumerate() {
                    let sg = sigmoid_indicator(b, self.threshold, beta);
                    live[j] = beta * sg * (1.0 - sg) >= 1e-14;
                }
            }
            SlotObjective::SumRate => live.iter_mut().for_each(|l| *l = true),
        }
    }

    /// Partial objective over the `live` links with link `i`'s beamformer
    /// replaced by `ti` (raw, possibly non-unit: the objective extends
    /// smoothly off the sphere). Dead links contribute a constant that
    /// cancels in central differences.
    ///
    /// Replacing the beamformer swaps one rank-one term of each other
    /// receiver's covariance, so the quadratic forms and traces come from
    /// two Sherman-Morrison updates against the cached inverses; a Cholesky
    /// rebuild backs the rare ill-conditioned removal up.
    fn objective_with_t(&self, i: usize, ti: &[C64], beta: f64, live: &[bool], scratch: &mut Scratch) -> f64 {
        let k = self.k;
        let mut total = 0.0;
        for j in 0..k {
            if !live[j] {
                continue;
            }
            let bound = if j == i {
                self.channels.get(i, i).mul_vec(ti, &mut scratch.vnew);
                self.rx[i].inv.mul_vec(&scratch.vnew, &mut scratch.x);
                let quad = vec_dot(&scratch.vnew, &scratch.x).re.max(0.0);
                self.bound_from_parts(i, self.p[i], quad, self.rx[i].tr_inv)
            } else {
                let c = (1.0 - self.gamma) * self.p[i] * self.geom.gain(i, j);
                self.channels.get(i, j).mul_vec(ti, &mut scratch.vnew);
                let cache = &self.rx[j];
                let v_old = &self.v[i * k + j];
                let u_old = &self.u[i * k + j];
                // add the new term: B = A + c v' v'^H
                cache.inv.mul_vec(&scratch.vnew, &mut scratch.x); // a = A^{-1} v'
                let a = &scratch.x;
                let d1 = 1.0 + c * vec_dot(&scratch.vnew, a).re;
                let beta1 = vec_dot(&scratch.vnew, &cache.w);
                let q_b = cache.quad - c * beta1.norm_sqr() / d1;
                let tr_b = if self.gamma > 0.0 {
                    cache.tr_inv - c * vec_norm_sqr(a) / d1
                } else {
                    0.0
                };
                // remove the old term: A' = B - c v v^H
                let s1 = vec_dot(a, v_old); // v'^H A^{-1} v_old
                for (bv, (u, av)) in scratch.bv.iter_mut().zip(u_old.iter().zip(a.iter())) {
                    *bv = u - av * (c * s1 / d1);
                }
                let d2 = 1.0 - c * vec_dot(v_old, &scratch.bv).re;
                if d2 > 1e-9 {
                    let bh_dot = {
                        // v_old^H B^{-1} h = v_old^H (w - (c beta1 / d1) a)
                        vec_dot(v_old, &cache.w) - vec_dot(v_old, a) * (c * beta1 / d1)
                    };
                    let quad = (q_b + c * bh_dot.norm_sqr() / d2).max(0.0);
                    let tr = if self.gamma > 0.0 {
                        tr_b + c * vec_norm_sqr(&scratch.bv) / d2
                    } else {
                        0.0
                    };
                    self.bound_from_parts(j, self.p[j], quad, tr)
                } else {
                    // near-singular removal: rebuild this receiver honestly
                    scratch.a.copy_from(&cache.a);
                    scratch.a.add_scaled_outer(&scratch.vnew, c);
                    scratch.a.add_scaled_outer(v_old, -c);
                    if scratch.a.cholesky_into(&mut scratch.l).is_err() {
                        return f64::NEG_INFINITY;
                    }
                    let h = &self.v[j * k + j];
                    chol_solve(&scratch.l, h, &mut scratch.x2);
                    let quad = vec_dot(h, &scratch.x2).re.max(0.0);
                    let tr = if self.gamma > 0.0 { chol_inverse_trace(&scratch.l) } else { 0.0 };
                    self.bound_from_parts(j, self.p[j], quad, tr)
                }
            };
            total += self.score(bound, beta);
        }
        total
    }

    /// Partial objective over the `live` links with link `i`'s power
    /// replaced by `pi`.
    fn objective_with_p(&self, i: usize, pi: f64, beta: f64, live: &[bool], scratch: &mut Scratch) -> f64 {
        let k = self.k;
        let mut total = 0.0;
        for j in 0..k {
            if !live[j] {
                continue;
            }
            let bound = if j == i {
                self.bound_from_parts(i, pi, self.rx[i].quad, self.rx[i].tr_inv)
            } else {
                let dp = pi - self.p[i];
                let g = self.geom.gain(i, j);
                scratch.a.copy_from(&self.rx[j].a);
                scratch.a.add_scaled_outer(&self.v[i * k + j], (1.0 - self.gamma) * dp * g);
                scratch.a.add_scaled_identity(self.gamma * dp * g);
                if scratch.a.cholesky_into(&mut scratch.l).is_err() {
                    return f64::NEG_INFINITY;
                }
                let h = &self.v[j * k + j];
                chol_solve(&scratch.l, h, &mut scratch.x);
                let quad = vec_dot(h, &scratch.x).re.max(0.0);
                let tr = if self.gamma > 0.0 { chol_inverse_trace(&scratch.l) } else { 0.0 };
                self.bound_from_parts(j, self.p[j], quad, tr)
            };
            total += self.score(bound, beta);
        }
        total
    }
}

struct Scratch {
    a: CMat,
    l: CMat,
    vnew: Vec<C64>,
    x: Vec<C64>,
    x2: Vec<C64>,
    bv: Vec<C64>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Scratch {
            a: CMat::zeros(m),
            l: CMat::zeros(m),
            vnew: vec![C64::new(0.0, 0.0); m],
            x: vec![C64::new(0.0, 0.0); m],
            x2: vec![C64::new(0.0, 0.0); m],
            bv: vec![C64::new(0.0, 0.0); m],
        }
    }
}

/// Jointly optimize beamformers and powers for one slot.
pub fn optimize_slot(problem: &SlotProblem) -> Result<SlotSolution, BeamoptError> {
    let k = problem.geom.k;
    if k == 0 {
        return Err(BeamoptError::EmptySlot);
    }
    let m = problem.channels.m;
    assert_eq!(problem.init_beamformers.len(), k);

    let mut t: Vec<Vec<C64>> = problem.init_beamformers.to_vec();
    for ti in t.iter_mut() {
        normalize(ti);
    }
    let p = vec![problem.p_max; k];

    // Interference-free slot: the initial point is already optimal for both
    // objectives (bound linear in own power, maximal along the principal
    // direction), so skip the gradient machinery.
    if k == 1 {
        let ev = Evaluator::new(problem, t.clone(), p.clone());
        let beta = final_beta(problem);
        let obj = ev.objective_value(beta);
        if !obj.is_finite() {
            return Err(BeamoptError::NonFiniteObjective { stage: 0, iter: 0 });
        }
        return Ok(SlotSolution {
            beamformers: t,
            powers: p,
            objective: obj,
            bounds: ev.bounds.clone(),
            stage_trace: vec![(obj, obj)],
            stage_iters: vec![0],
        });
    }

    let stages: Vec<f64> = match problem.objective {
        SlotObjective::Connectivity => problem
            .params
            .beta_factors
            .iter()
            .map(|f| f / problem.sinr_threshold)
            .collect(),
        // The sum-rate objective is already smooth; run a single stage.
        SlotObjective::SumRate => vec![1.0],
    };

    // Optimize over normalized coordinates: beamformer components and
    // p_tilde = P / P_max. Beamformer coordinates only exist for m > 1
    // (a scalar beamformer is a pure phase, which the bound ignores).
    let t_dim = if m > 1 { 2 * m } else { 0 };
    let dim = k * t_dim + k;
    let mut ev = Evaluator::new(problem, t.clone(), p.clone());
    let mut probe = Evaluator::new(problem, t, p);
    let mut scratch = Scratch::new(m);
    let mut grad = vec![0.0; dim];
    let mut stage_trace = Vec::with_capacity(stages.len());
    let mut stage_iters = Vec::with_capacity(stages.len());

    for (stage, &beta) in stages.iter().enumerate() {
        let mut obj = ev.objective_value(beta);
        if !obj.is_finite() {
            return Err(BeamoptError::NonFiniteObjective { stage, iter: 0 });
        }
        let stage_start = obj;
        let mut iters_used = 0;
        let mut stale_iters = 0;
        let mut live = vec![true; k];
        // Spectral (Barzilai-Borwein) step memory.
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut x = vec![0.0; dim];
        for iter in 0..problem.params.max_stage_iters {
            iters_used = iter + 1;
            // Central-difference gradient in the normalized coordinates.
            ev.live_mask(beta, &mut live);
            let mut gnorm_sq = 0.0;
            for i in 0..k {
                if t_dim > 0 {
                    for c in 0..m {
                        for reim in 0..2 {
                            let base = if reim == 0 { ev.t[i][c].re } else { ev.t[i][c].im };
                            let h = problem.params.fd_step_rel * base.abs().max(1.0);
                            let mut ti = ev.t[i].clone();
                            bump(&mut ti, c, reim, h);
                            let up = ev.objective_with_t(i, &ti, beta, &live, &mut scratch);
                            bump(&mut ti, c, reim, -2.0 * h);
                            let dn = ev.objective_with_t(i, &ti, beta, &live, &mut scratch);
                            let g = (up - dn) / (2.0 * h);
                            grad[i * t_dim + 2 * c + reim] = g;
                            gnorm_sq += g * g;
                        }
                    }
                }
                let ptilde = ev.p[i] / problem.p_max;
                let h = problem.params.fd_step_rel * ptilde.abs().max(1.0);
                let up = ev.objective_with_p(i, (ptilde + h) * problem.p_max, beta, &live, &mut scratch);
                let dn = ev.objective_with_p(i, (ptilde - h) * problem.p_max, beta, &live, &mut scratch);
                let g = (up - dn) / (2.0 * h);
                grad[k * t_dim + i] = g;
                gnorm_sq += g * g;
            }
            let gnorm = gnorm_sq.sqrt();
            if gnorm < problem.params.grad_tol {
                break;
            }

            flatten(&ev, t_dim, problem.p_max, &mut x);
            let mut step = match &prev {
                None => 0.25 / gnorm,
                Some((xp, gp)) => {
                    // Spectral step |s.s / s.y| from the last move.
                    let mut ss = 0.0;
                    let mut sy = 0.0;
                    for d in 0..dim {
                        let s = x[d] - xp[d];
                        ss += s * s;
                        sy += s * (grad[d] - gp[d]);
                    }
                    if sy.abs() > 1e-300 && ss > 0.0 {
                        (ss / sy).abs().clamp(1e-9, 1e2 / gnorm)
                    } else {
                        0.25 / gnorm
                    }
                }
            };

            // Monotone backtracking along the raw gradient with projection
            // (renormalize beamformers, clamp powers).
            let mut accepted = false;
            let mut improvement = 0.0;
            let mut trial_t = ev.t.clone();
            let mut trial_p = ev.p.clone();
            for _ in 0..60 {
                for i in 0..k {
                    if t_dim > 0 {
                        for c in 0..m {
                            let gr = grad[i * t_dim + 2 * c];
                            let gi = grad[i * t_dim + 2 * c + 1];
                            trial_t[i][c] = ev.t[i][c] + C64::new(step * gr, step * gi);
                        }
                        normalize(&mut trial_t[i]);
                    } else {
                        trial_t[i].clone_from(&ev.t[i]);
                    }
                    let g = grad[k * t_dim + i];
                    let ptilde = (ev.p[i] / problem.p_max + step * g)
                        .clamp(problem.params.p_floor_rel, 1.0);
                    trial_p[i] = ptilde * problem.p_max;
                }
                probe.set_state(&trial_t, &trial_p);
                let trial_obj = probe.objective_value(beta);
                if !trial_obj.is_finite() {
                    return Err(BeamoptError::NonFiniteObjective { stage, iter });
                }
                if trial_obj > obj {
                    std::mem::swap(&mut ev, &mut probe);
                    improvement = trial_obj - obj;
                    obj = trial_obj;
                    accepted = true;
                    break;
                }
                step *= 0.5;
                if step * gnorm < 1e-14 {
                    break;
                }
            }
            if !accepted {
                break; // no improving step exists at this resolution
            }
            prev = Some((x.clone(), grad.clone()));
            // Improvements far below the decision scale add nothing; two in
            // a row means the stage has converged for scheduling purposes.
            if improvement < 1e-6 * (1.0 + obj.abs()) {
                stale_iters += 1;
                if stale_iters >= 2 {
                    break;
                }
            } else {
                stale_iters = 0;
            }
        }
        stage_trace.push((stage_start, obj));
        stage_iters.push(iters_used);
    }

    let beta = final_beta(problem);
    let objective = ev.objective_value(beta);
    Ok(SlotSolution {
        beamformers: ev.t.clone(),
        powers: ev.p.clone(),
        objective,
        bounds: ev.bounds.clone(),
        stage_trace,
        stage_iters,
    })
}

fn final_beta(problem: &SlotProblem) -> f64 {
    match problem.objective {
        SlotObjective::Connectivity => {
            problem.params.beta_factors.last().copied().unwrap_or(16.0) / problem.sinr_threshold
        }
        SlotObjective::SumRate => 1.0,
    }
}

/// Pack the evaluator state into the normalized coordinate vector
/// (beamformer re/im pairs, then p_tilde = P / P_max).
fn flatten(ev: &Evaluator, t_dim: usize, p_max: f64, x: &mut [f64]) {
    let k = ev.k;
    if t_dim > 0 {
        let m = t_dim / 2;
        for i in 0..k {
            for c in 0..m {
                x[i * t_dim + 2 * c] = ev.t[i][c].re;
                x[i * t_dim + 2 * c + 1] = ev.t[i][c].im;
            }
        }
    }
    for i in 0..k {
        x[k * t_dim + i] = ev.p[i] / p_max;
    }
}

#[inline]
fn bump(v: &mut [C64], component: usize, reim: usize, delta: f64) {
    if reim == 0 {
        v[component].re += delta;
    } else {
        v[component].im += delta;
    }
}
