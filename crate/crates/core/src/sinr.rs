//! Receive-side SINR: interference covariance, the optimal receive
//! beamformer, the exact SINR quadratic form, and the Jensen lower bound on
//! the conditional expected SINR under outdated CSI.
//!
//! All operations work on a slot view: the set of co-active links, their
//! transmit powers and beamformers, the path gains 1/d_ik^alpha between
//! every transmitter/receiver pair in the slot, and the channel matrices
//! restricted to those pairs.

use crate::channel::{ChannelSet, EstimatedChannels};
use crate::linalg::{chol_inverse_trace, chol_solve, vec_dot, C64, CMat};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SinrError {
    #[error("gamma = 1 leaves the estimate with no information; the bound is undefined")]
    GammaOne,
    #[error("gamma must lie in [0, 1), got {0}")]
    BadGamma(f64),
    #[error("interference covariance was not positive definite")]
    SingularCovariance,
}

/// Channel matrices restricted to the ordered pairs of one slot.
/// Entry (i, j) is the channel from slot member i's transmitter to slot
/// member j's receiver.
pub struct SlotChannels<'a> {
    pub k: usize,
    pub m: usize,
    mats: Vec<&'a CMat>,
}

impl<'a> SlotChannels<'a> {
    pub fn from_estimated(est: &'a EstimatedChannels, links: &[usize]) -> Self {
        let k = links.len();
        let mut mats = Vec::with_capacity(k * k);
        for &i in links {
            for &j in links {
                mats.push(est.get(i, j));
            }
        }
        SlotChannels { k, m: est.m, mats }
    }

    pub fn from_realized(set: &'a ChannelSet, links: &[usize]) -> Self {
        let k = links.len();
        let mut mats = Vec::with_capacity(k * k);
        for &i in links {
            for &j in links {
                mats.push(set.realized(i, j));
            }
        }
        SlotChannels { k, m: set.m, mats }
    }

    pub fn from_matrices(mats: Vec<&'a CMat>, k: usize) -> Self {
        assert_eq!(mats.len(), k * k);
        let m = mats[0].dim();
        SlotChannels { k, m, mats }
    }

    #[inline]
    pub fn get(&self, tx_member: usize, rx_member: usize) -> &CMat {
        self.mats[tx_member * self.k + rx_member]
    }
}

/// Path gains and noise power for one slot.
#[derive(Debug, Clone)]
pub struct SlotGeometry {
    pub k: usize,
    /// 1/d_ij^alpha, row = transmitting member, column = receiving member.
    path_gain: Vec<f64>,
    pub noise_power: f64,
}

impl SlotGeometry {
    pub fn new(path_gain: Vec<f64>, k: usize, noise_power: f64) -> Self {
        assert_eq!(path_gain.len(), k * k);
        assert!(noise_power > 0.0);
        SlotGeometry { k, path_gain, noise_power }
    }

    #[inline]
    pub fn gain(&self, tx_member: usize, rx_member: usize) -> f64 {
        self.path_gain[tx_member * self.k + rx_member]
    }
}

/// Everything needed to evaluate one link's SINR inside a slot.
pub struct LinkContext<'a> {
    /// Index of the link of interest within the slot arrays.
    pub rx: usize,
    pub powers: &'a [f64],
    pub beamformers: &'a [Vec<C64>],
    pub geom: &'a SlotGeometry,
}

/// Q_k = sum_{i != k} (P_i / d_ik^alpha) (H_ik t_i)(H_ik t_i)^H + sigma^2 I.
pub fn interference_covariance(ctx: &LinkContext, channels: &SlotChannels) -> CMat {
    let m = channels.m;
    let mut q = CMat::scaled_identity(m, ctx.geom.noise_power);
    let mut v = vec![C64::new(0.0, 0.0); m];
    for i in 0..ctx.geom.k {
        if i == ctx.rx || ctx.powers[i] == 0.0 {
            continue;
        }
        channels.get(i, ctx.rx).mul_vec(&ctx.beamformers[i], &mut v);
        q.add_scaled_outer(&v, ctx.powers[i] * ctx.geom.gain(i, ctx.rx));
    }
    q
}

/// Optimal receive beamformer w = Q^{-1} H_kk t_k (any positive scaling of
/// the returned vector leaves the SINR unchanged).
pub fn receive_beamformer(q: &CMat, effective_channel: &[C64]) -> Result<Vec<C64>, SinrError> {
    let l = q.cholesky().map_err(|_| SinrError::SingularCovariance)?;
    let mut w = vec![C64::new(0.0, 0.0); q.dim()];
    chol_solve(&l, effective_channel, &mut w);
    Ok(w)
}

/// Exact SINR of Eq.-form (P_k/d_kk^alpha) t^H H^H Q^{-1} H t, evaluated on
/// whichever channel set the slot view carries.
pub fn sinr_exact(ctx: &LinkContext, channels: &SlotChannels) -> f64 {
    let m = channels.m;
    let q = interference_covariance(ctx, channels);
    let l = q.cholesky().expect("covariance with positive noise power is positive definite");
    let mut h = vec![C64::new(0.0, 0.0); m];
    channels.get(ctx.rx, ctx.rx).mul_vec(&ctx.beamformers[ctx.rx], &mut h);
    let mut x = vec![C64::new(0.0, 0.0); m];
    chol_solve(&l, &h, &mut x);
    let quad = vec_dot(&h, &x).re.max(0.0);
    ctx.powers[ctx.rx] * ctx.geom.gain(ctx.rx, ctx.rx) * quad
}

/// Jensen lower bound on E{SINR_k | estimated channels} for correlation
/// coefficient gamma:
///
///   (P_k/d_kk^a) [ (1-g) t^H He^H A^{-1} He t + g tr(A^{-1}) ],
///   A = (g sum_i P_i/d_ik^a + s^2) I + (1-g) sum_i (P_i/d_ik^a)(He_ik t_i)(.)^H.
///
/// At gamma = 0 this coincides exactly with [`sinr_exact`] evaluated on the
/// estimated channels.
pub fn expected_sinr_lower_bound(
    ctx: &LinkContext,
    estimated: &SlotChannels,
    gamma: f64,
) -> Result<f64, SinrError> {
    if gamma == 1.0 {
        return Err(SinrError::GammaOne);
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(SinrError::BadGamma(gamma));
    }
    let m = estimated.m;
    let mut interf_power = 0.0;
    let mut a = CMat::zeros(m);
    let mut v = vec![C64::new(0.0, 0.0); m];
    for i in 0..ctx.geom.k {
        if i == ctx.rx || ctx.powers[i] == 0.0 {
            continue;
        }
        let c = ctx.powers[i] * ctx.geom.gain(i, ctx.rx);
        interf_power += c;
        estimated.get(i, ctx.rx).mul_vec(&ctx.beamformers[i], &mut v);
        a.add_scaled_outer(&v, (1.0 - gamma) * c);
    }
    a.add_scaled_identity(gamma * interf_power + ctx.geom.noise_power);
    let l = a.cholesky().map_err(|_| SinrError::SingularCovariance)?;

    let mut h = vec![C64::new(0.0, 0.0); m];
    estimated.get(ctx.rx, ctx.rx).mul_vec(&ctx.beamformers[ctx.rx], &mut h);
    let mut x = vec![C64::new(0.0, 0.0); m];
    chol_solve(&l, &h, &mut x);
    let quad = vec_dot(&h, &x).re.max(0.0);

    let own = ctx.powers[ctx.rx] * ctx.geom.gain(ctx.rx, ctx.rx);
    let trace_term = if gamma > 0.0 { gamma * chol_inverse_trace(&l) } else { 0.0 };
    Ok(own * ((1.0 - gamma) * quad + trace_term))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_estimated_channels;
    use crate::linalg::normalize;
    use crate::rng::Rng;

    fn unit_vec(m: usize, rng: &mut Rng) -> Vec<C64> {
        let mut v: Vec<C64> = (0..m).map(|_| rng.next_cn01()).collect();
        normalize(&mut v);
        v
    }

    fn uniform_geometry(k: usize, noise: f64) -> SlotGeometry {
        SlotGeometry::new(vec![1.0; k * k], k, noise)
    }

    #[test]
    fn covariance_reduces_to_noise() {
        let est = sample_estimated_channels(1, 2, 3);
        let ch = SlotChannels::from_estimated(&est, &[0]);
        let geom = uniform_geometry(1, 2.5);
        let t = vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]];
        let ctx = LinkContext { rx: 0, powers: &[4.0], beamformers: &t, geom: &geom };
        let q = interference_covariance(&ctx, &ch);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 2.5 } else { 0.0 };
                assert!((q.get(i, j) - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_power_interferer_is_invisible() {
        let est = sample_estimated_channels(2, 2, 4);
        let ch = SlotChannels::from_estimated(&est, &[0, 1]);
        let geom = uniform_geometry(2, 1.0);
        let mut rng = Rng::new(1);
        let t = vec![unit_vec(2, &mut rng), unit_vec(2, &mut rng)];
        let ctx = LinkContext { rx: 0, powers: &[1.0, 0.0], beamformers: &t, geom: &geom };
        let q = interference_covariance(&ctx, &ch);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((q.get(i, j) - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matched_filter_under_white_interference() {
        let est = sample_estimated_channels(1, 3, 9);
        let ch = SlotChannels::from_estimated(&est, &[0]);
        let mut rng = Rng::new(2);
        let t = vec![unit_vec(3, &mut rng)];
        let geom = uniform_geometry(1, 0.7);
        let ctx = LinkContext { rx: 0, powers: &[1.0], beamformers: &t, geom: &geom };
        let q = interference_covariance(&ctx, &ch);
        let mut h = vec![C64::new(0.0, 0.0); 3];
        ch.get(0, 0).mul_vec(&t[0], &mut h);
        let w = receive_beamformer(&q, &h).unwrap();
        // w must be proportional to h when Q = sigma^2 I.
        let scale = w[0] / h[0];
        for (a, b) in w.iter().zip(h.iter()) {
            assert!((a - b * scale).norm() < 1e-12);
        }
    }

    #[test]
    fn scalar_reduction_no_interference() {
        let est = sample_estimated_channels(1, 1, 12);
        let ch = SlotChannels::from_estimated(&est, &[0]);
        let noise = 1.3;
        let pg = 1.0 / 5.0f64.powi(2);
        let geom = SlotGeometry::new(vec![pg], 1, noise);
        let t = vec![vec![C64::new(1.0, 0.0)]];
        let ctx = LinkContext { rx: 0, powers: &[2.0], beamformers: &t, geom: &geom };
        let h = ch.get(0, 0).get(0, 0);
        let expect = 2.0 * pg * h.norm_sqr() / noise;
        assert!((sinr_exact(&ctx, &ch) - expect).abs() < 1e-14);
    }

    #[test]
    fn bound_gamma_zero_equals_exact_on_estimates() {
        let est = sample_estimated_channels(3, 2, 21);
        let links = [0usize, 1, 2];
        let ch = SlotChannels::from_estimated(&est, &links);
        let mut rng = Rng::new(5);
        let t: Vec<Vec<C64>> = (0..3).map(|_| unit_vec(2, &mut rng)).collect();
        let geom = uniform_geometry(3, 1.0);
        let powers = [3.0, 1.5, 0.8];
        for rx in 0..3 {
            let ctx = LinkContext { rx, powers: &powers, beamformers: &t, geom: &geom };
            let exact = sinr_exact(&ctx, &ch);
            let bound = expected_sinr_lower_bound(&ctx, &ch, 0.0).unwrap();
            assert!((exact - bound).abs() <= 1e-12 * exact.max(1.0), "{exact} vs {bound}");
        }
    }

    #[test]
    fn bound_scalar_formula_no_interference() {
        let est = sample_estimated_channels(1, 1, 33);
        let ch = SlotChannels::from_estimated(&est, &[0]);
        let pg = 0.25;
        let geom = SlotGeometry::new(vec![pg], 1, 1.0);
        let t = vec![vec![C64::new(1.0, 0.0)]];
        let p = 2.0;
        let ctx = LinkContext { rx: 0, powers: &[p], beamformers: &t, geom: &geom };
        let gamma = 0.04;
        let h2 = ch.get(0, 0).get(0, 0).norm_sqr();
        let expect = p * pg * (0.96 * h2 + 0.04);
        let bound = expected_sinr_lower_bound(&ctx, &ch, gamma).unwrap();
        assert!((bound - expect).abs() < 1e-14, "{bound} vs {expect}");
    }

    #[test]
    fn bound_rejects_gamma_one() {
        let est = sample_estimated_channels(1, 2, 3);
        let ch = SlotChannels::from_estimated(&est, &[0]);
        let geom = uniform_geometry(1, 1.0);
        let t = vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]];
        let ctx = LinkContext { rx: 0, powers: &[1.0], beamformers: &t, geom: &geom };
        assert_eq!(expected_sinr_lower_bound(&ctx, &ch, 1.0).unwrap_err(), SinrError::GammaOne);
    }

    #[test]
    fn sinr_invariant_to_beamformer_phase() {
        let est = sample_estimated_channels(2, 2, 8);
        let ch = SlotChannels::from_estimated(&est, &[0, 1]);
        let mut rng = Rng::new(3);
        let t: Vec<Vec<C64>> = (0..2).map(|_| unit_vec(2, &mut rng)).collect();
        let geom = uniform_geometry(2, 1.0);
        let powers = [2.0, 5.0];
        let ctx = LinkContext { rx: 0, powers: &powers, beamformers: &t, geom: &geom };
        let base = sinr_exact(&ctx, &ch);
        let phase = C64::from_polar(1.0, 1.234);
        let rotated: Vec<Vec<C64>> =
            t.iter().map(|v| v.iter().map(|z| z * phase).collect()).collect();
        let ctx2 = LinkContext { rx: 0, powers: &powers, beamformers: &rotated, geom: &geom };
        let with_phase = sinr_exact(&ctx2, &ch);
        assert!((base - with_phase).abs() < 1e-12 * base.max(1.0));
    }
}
