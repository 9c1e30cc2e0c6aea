//! Iterative local power control within one slot.
//!
//! Receivers measure the exact SINR on the realized channels and tell any
//! transmitter sitting above the threshold to scale its power down by the
//! excess ratio. Reductions shrink the interference seen by everyone else,
//! so the pass repeats N_a times; links still below the threshold are then
//! declared in outage and muted, and N_b further reduction passes squeeze
//! the survivors. Updates within a pass use the powers as of the start of
//! the pass, which makes the result independent of the member order.

use crate::linalg::C64;
use crate::sinr::{sinr_exact, LinkContext, SlotChannels, SlotGeometry};

/// Iteration counts and threshold for the power control loop.
#[derive(Debug, Clone, Copy)]
pub struct PowerControlParams {
    /// Reduction passes before outage detection.
    pub n_a: usize,
    /// Further reduction passes after muting outage links.
    pub n_b: usize,
    pub sinr_threshold: f64,
}

impl PowerControlParams {
    pub fn new(sinr_threshold: f64) -> Self {
        PowerControlParams { n_a: 3, n_b: 2, sinr_threshold }
    }
}

/// Relative dead-band around the threshold: links within it are left alone
/// instead of being churned by vanishing corrections.
const DEAD_BAND: f64 = 1e-9;

/// Result of one slot's power control.
#[derive(Debug, Clone)]
pub struct PowerControlResult {
    /// Final per-member transmit powers (0 for muted links).
    pub powers: Vec<f64>,
    /// Members muted by the outage rule.
    pub outage: Vec<bool>,
    /// Exact SINRs at the final powers.
    pub sinr: Vec<f64>,
}

fn measure_all(
    channels: &SlotChannels,
    geom: &SlotGeometry,
    beamformers: &[Vec<C64>],
    powers: &[f64],
    out: &mut [f64],
) {
    for rx in 0..geom.k {
        if powers[rx] == 0.0 {
            out[rx] = 0.0;
            continue;
        }
        let ctx = LinkContext { rx, powers, beamformers, geom };
        out[rx] = sinr_exact(&ctx, channels);
    }
}

/// Run the reduction / outage / reduction loop for one slot.
///
/// `channels` must be the realized channels restricted to the slot members;
/// beamformers stay fixed throughout. Powers never increase, and a link
/// whose SINR has reached the threshold can only gain margin afterwards as
/// its interferers reduce or mute.
pub fn power_control_slot(
    channels: &SlotChannels,
    geom: &SlotGeometry,
    beamformers: &[Vec<C64>],
    initial_powers: &[f64],
    params: &PowerControlParams,
) -> PowerControlResult {
    let k = geom.k;
    assert_eq!(initial_powers.len(), k);
    assert_eq!(beamformers.len(), k);
    let threshold = params.sinr_threshold;
    let mut powers = initial_powers.to_vec();
    let mut sinr = vec![0.0; k];
    let mut outage = vec![false; k];

    let reduction_pass = |powers: &mut Vec<f64>, sinr: &mut Vec<f64>| {
        measure_all(channels, geom, beamformers, powers, sinr);
        let snapshot = powers.clone();
        for rx in 0..k {
            if snapshot[rx] > 0.0 && sinr[rx] > threshold * (1.0 + DEAD_BAND) {
                powers[rx] = snapshot[rx] / (sinr[rx] / threshold);
            }
        }
    };

    for _ in 0..params.n_a {
        reduction_pass(&mut powers, &mut sinr);
    }

    // Outage rule: mute anything still below the threshold.
    measure_all(channels, geom, beamformers, &powers, &mut sinr);
    for rx in 0..k {
        if powers[rx] == 0.0 || sinr[rx] < threshold * (1.0 - DEAD_BAND) {
            powers[rx] = 0.0;
            outage[rx] = true;
        }
    }

    for _ in 0..params.n_b {
        reduction_pass(&mut powers, &mut sinr);
    }

    measure_all(channels, geom, beamformers, &powers, &mut sinr);
    PowerControlResult { powers, outage, sinr }
}
