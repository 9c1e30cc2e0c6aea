//! MIMO channel sampling and the first-order Markov outdated-CSI model.
//!
//! One channel matrix exists for every ordered link pair (i, k): the matrix
//! between the transmitter of link i and the receiver of link k. Entries are
//! i.i.d. CN(0, 1). The realized channel during transmission relates to the
//! estimate through
//!
//!   H = sqrt(1 - gamma) H^e + sqrt(gamma) E,
//!
//! with E an independent CN(0, 1) perturbation and gamma in [0, 1]. Each
//! (purpose, pair) combination draws from its own derived RNG stream, so
//! sampling order and parallelism cannot change the result.

use crate::linalg::{power_iteration, C64, CMat, LinalgError};
use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("gamma must lie in [0, 1], got {0}")]
    BadGamma(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Estimated channels H^e for all ordered link pairs.
#[derive(Debug, Clone)]
pub struct EstimatedChannels {
    pub n_links: usize,
    pub m: usize,
    mats: Vec<CMat>,
}

impl EstimatedChannels {
    #[inline]
    pub fn get(&self, tx_link: usize, rx_link: usize) -> &CMat {
        &self.mats[tx_link * self.n_links + rx_link]
    }
}

/// Estimated and realized channels plus the perturbations tying them together.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub n_links: usize,
    pub m: usize,
    pub gamma: f64,
    estimated: Vec<CMat>,
    perturbation: Vec<CMat>,
    realized: Vec<CMat>,
}

impl ChannelSet {
    #[inline]
    pub fn estimated(&self, tx_link: usize, rx_link: usize) -> &CMat {
        &self.estimated[tx_link * self.n_links + rx_link]
    }

    #[inline]
    pub fn perturbation(&self, tx_link: usize, rx_link: usize) -> &CMat {
        &self.perturbation[tx_link * self.n_links + rx_link]
    }

    #[inline]
    pub fn realized(&self, tx_link: usize, rx_link: usize) -> &CMat {
        &self.realized[tx_link * self.n_links + rx_link]
    }
}

/// Principal right singular pair of a channel matrix.
#[derive(Debug, Clone)]
pub struct SingularPair {
    pub sigma1: f64,
    pub v1: Vec<C64>,
}

const STREAM_ESTIMATE: u64 = 1;
const STREAM_PERTURB: u64 = 2;

fn sample_matrix(rng: &mut Rng, m: usize) -> CMat {
    let mut h = CMat::zeros(m);
    for i in 0..m {
        for j in 0..m {
            h.set(i, j, rng.next_cn01());
        }
    }
    h
}

/// Draw H^e for all ordered link pairs; pair (i, k) uses the stream
/// `(seed, ESTIMATE, i, k)`.
pub fn sample_estimated_channels(n_links: usize, m: usize, seed: u64) -> EstimatedChannels {
    assert!(n_links >= 1 && m >= 1);
    let mut mats = Vec::with_capacity(n_links * n_links);
    for i in 0..n_links {
        for k in 0..n_links {
            let mut rng = Rng::from_stream(seed, &[STREAM_ESTIMATE, i as u64, k as u64]);
            mats.push(sample_matrix(&mut rng, m));
        }
    }
    EstimatedChannels { n_links, m, mats }
}

/// Draw perturbations and form the realized channels for the given gamma.
pub fn evolve_channels(
    estimated: &EstimatedChannels,
    gamma: f64,
    seed: u64,
) -> Result<ChannelSet, ChannelError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ChannelError::BadGamma(gamma));
    }
    let n = estimated.n_links;
    let m = estimated.m;
    let w_est = (1.0 - gamma).sqrt();
    let w_pert = gamma.sqrt();
    let mut perturbation = Vec::with_capacity(n * n);
    let mut realized = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            let mut rng = Rng::from_stream(seed, &[STREAM_PERTURB, i as u64, k as u64]);
            let e = sample_matrix(&mut rng, m);
            let he = estimated.get(i, k);
            let h = CMat::from_fn(m, |r, c| w_est * he.get(r, c) + w_pert * e.get(r, c));
            perturbation.push(e);
            realized.push(h);
        }
    }
    Ok(ChannelSet {
        n_links: n,
        m,
        gamma,
        estimated: estimated.mats.clone(),
        perturbation,
        realized,
    })
}

/// Dominant singular value and right singular vector of `h`, phase-fixed so
/// the first non-negligible component of v1 is real non-negative.
pub fn principal_pair(h: &CMat) -> Result<SingularPair, ChannelError> {
    let (sigma1, v1) = power_iteration(h, 1e-12, 200)?;
    Ok(SingularPair { sigma1, v1 })
}

/// Debug dump of a channel set: one line per pair with the matrix entries.
pub fn format_channel_set(set: &ChannelSet) -> String {
    let mut out = String::from("tx_link\trx_link\tentries (re,im)\n");
    for i in 0..set.n_links {
        for k in 0..set.n_links {
            let h = set.realized(i, k);
            out.push_str(&format!("{i}\t{k}"));
            for r in 0..set.m {
                for c in 0..set.m {
                    let z = h.get(r, c);
                    out.push_str(&format!("\t({:.6e},{:.6e})", z.re, z.im));
                }
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_estimated_channels(3, 2, 99);
        let b = sample_estimated_channels(3, 2, 99);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(a.get(i, k).data(), b.get(i, k).data());
            }
        }
        let c = sample_estimated_channels(3, 2, 100);
        assert_ne!(a.get(0, 0).data(), c.get(0, 0).data());
    }

    #[test]
    fn gamma_zero_keeps_estimates_bitwise() {
        let est = sample_estimated_channels(2, 4, 5);
        let set = evolve_channels(&est, 0.0, 5).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(set.realized(i, k).data(), est.get(i, k).data());
            }
        }
    }

    #[test]
    fn gamma_out_of_range_rejected() {
        let est = sample_estimated_channels(2, 2, 5);
        assert_eq!(evolve_channels(&est, -0.1, 5).unwrap_err(), ChannelError::BadGamma(-0.1));
        assert_eq!(evolve_channels(&est, 1.5, 5).unwrap_err(), ChannelError::BadGamma(1.5));
    }

    #[test]
    fn markov_identity_reconstructs_bitwise() {
        let est = sample_estimated_channels(3, 2, 17);
        let gamma = 0.04;
        let set = evolve_channels(&est, gamma, 17).unwrap();
        let (we, wp) = ((1.0 - gamma).sqrt(), gamma.sqrt());
        for i in 0..3 {
            for k in 0..3 {
                let he = set.estimated(i, k);
                let e = set.perturbation(i, k);
                let h = set.realized(i, k);
                for r in 0..2 {
                    for c in 0..2 {
                        let rebuilt = we * he.get(r, c) + wp * e.get(r, c);
                        assert_eq!(rebuilt, h.get(r, c));
                    }
                }
            }
        }
    }

    #[test]
    fn principal_pair_diag_and_tiebreak() {
        let h = CMat::from_rows(&[
            vec![C64::new(3.0, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ]);
        let p = principal_pair(&h).unwrap();
        assert!((p.sigma1 - 3.0).abs() < 1e-10);
        assert!((p.v1[0] - C64::new(1.0, 0.0)).norm() < 1e-8);

        let id = CMat::identity(2);
        let p = principal_pair(&id).unwrap();
        assert!((p.sigma1 - 1.0).abs() < 1e-12);
        assert!((p.v1[0] - C64::new(1.0, 0.0)).norm() < 1e-12);

        assert!(principal_pair(&CMat::zeros(2)).is_err());
    }

    #[test]
    fn singular_value_dominates_random_directions() {
        let est = sample_estimated_channels(1, 4, 31);
        let h = est.get(0, 0);
        let p = principal_pair(h).unwrap();
        let norm: f64 = p.v1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let mut hv = vec![C64::new(0.0, 0.0); 4];
        h.mul_vec(&p.v1, &mut hv);
        let hv_norm: f64 = hv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((hv_norm - p.sigma1).abs() < 1e-9);

        let mut rng = Rng::new(7);
        for _ in 0..200 {
            let mut u: Vec<C64> = (0..4).map(|_| rng.next_cn01()).collect();
            crate::linalg::normalize(&mut u);
            let mut hu = vec![C64::new(0.0, 0.0); 4];
            h.mul_vec(&u, &mut hu);
            let n = hu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(n <= p.sigma1 + 1e-9);
        }
    }

    #[test]
    fn sigma_trace_bracket() {
        // sigma_1^2 between trace/M and trace for sampled matrices.
        for seed in 0..40 {
            let est = sample_estimated_channels(1, 4, seed);
            let h = est.get(0, 0);
            let tr: f64 = h.data().iter().map(|z| z.norm_sqr()).sum();
            let p = principal_pair(h).unwrap();
            let s2 = p.sigma1 * p.sigma1;
            assert!(s2 <= tr + 1e-9 && s2 >= tr / 4.0 - 1e-9, "s2={s2} tr={tr}");
        }
    }
}
