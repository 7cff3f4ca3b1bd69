//! Reproducible channel power gains and received-SNR plumbing.
//!
//! Noise power is normalized to 1 everywhere, so a transmit power `P`
//! over a power gain `g` arrives as received SNR `alpha = P * g`, and
//! SNR values quoted in dB convert as `alpha = 10^(dB/10)`.
//!
//! Rayleigh fading is represented directly by its exponential power gain;
//! the complex amplitude is never materialized because only power gains
//! enter any SINR in this crate.
//!
//! Randomness is organized as a tree of [`RngStream`] nodes. A stream is
//! a `(master_seed, stream_id)` pair; equal pairs reproduce the same
//! sample sequence bit-for-bit, and sibling streams are statistically
//! independent. Engines derive one stream per trial/slot from the trial
//! index, which makes every result independent of worker count and
//! execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("rayleigh mean gain must be > 0, got {0}")]
    NonPositiveMeanGain(f64),
    #[error("deterministic fading needs at least one fixed gain")]
    EmptyGainList,
    #[error("channel gains must be finite and >= 0, got {0}")]
    InvalidGain(f64),
}

/// Statistical model for a user's channel power gain.
#[derive(Debug, Clone, PartialEq)]
pub enum FadingModel {
    /// I.i.d. exponential power gains with mean `mean_gain`.
    Rayleigh { mean_gain: f64 },
    /// Cycles through a fixed gain list; consumes no randomness.
    Deterministic { gains: Vec<f64> },
}

impl FadingModel {
    pub fn rayleigh(mean_gain: f64) -> Result<Self, ChannelError> {
        if !(mean_gain > 0.0) || !mean_gain.is_finite() {
            return Err(ChannelError::NonPositiveMeanGain(mean_gain));
        }
        Ok(FadingModel::Rayleigh { mean_gain })
    }

    pub fn deterministic(gains: Vec<f64>) -> Result<Self, ChannelError> {
        if gains.is_empty() {
            return Err(ChannelError::EmptyGainList);
        }
        if let Some(&bad) = gains.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(ChannelError::InvalidGain(bad));
        }
        Ok(FadingModel::Deterministic { gains })
    }

    pub(crate) fn validate(&self) -> Result<(), ChannelError> {
        match self {
            FadingModel::Rayleigh { mean_gain } => {
                if !(*mean_gain > 0.0) || !mean_gain.is_finite() {
                    return Err(ChannelError::NonPositiveMeanGain(*mean_gain));
                }
            }
            FadingModel::Deterministic { gains } => {
                if gains.is_empty() {
                    return Err(ChannelError::EmptyGainList);
                }
                if let Some(&bad) = gains.iter().find(|g| !g.is_finite() || **g < 0.0) {
                    return Err(ChannelError::InvalidGain(bad));
                }
            }
        }
        Ok(())
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer; a bijection on u64.
fn scramble(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Named position in the deterministic RNG tree.
///
/// For a fixed parent, distinct `substream` children never collide, so a
/// derivation like `root.substream(point).substream(trial)` assigns every
/// (point, trial) pair its own independent generator regardless of how
/// trials are scheduled across workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream `child` under this node. Folds the parent pair into a
    /// new master seed (injective in the parent's stream id) and adopts
    /// `child` as the stream id.
    pub fn substream(&self, child: u64) -> RngStream {
        RngStream {
            master_seed: scramble(self.master_seed ^ scramble(self.stream_id ^ GOLDEN)),
            stream_id: child,
        }
    }

    /// Instantiates the generator at this node.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws `n` channel power gains from `model`.
///
/// Rayleigh gains are sampled by inversion, exactly one `f64` draw per
/// gain (fixed draw count keeps common-random-number schemes aligned).
/// Deterministic models cycle their fixed list and consume no randomness.
pub fn sample_gains<R: Rng>(
    model: &FadingModel,
    rng: &mut R,
    n: usize,
) -> Result<Vec<f64>, ChannelError> {
    assert!(n >= 1, "sample_gains needs n >= 1");
    model.validate()?;
    let out = match model {
        FadingModel::Rayleigh { mean_gain } => (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                -mean_gain * (1.0 - u).ln()
            })
            .collect(),
        FadingModel::Deterministic { gains } => (0..n).map(|i| gains[i % gains.len()]).collect(),
    };
    Ok(out)
}

/// Received SNR of a transmission: `alpha = transmit_power * gain`
/// (noise power normalized to 1).
pub fn to_received_snr(transmit_power: f64, gain: f64) -> f64 {
    assert!(
        transmit_power.is_finite() && transmit_power >= 0.0,
        "transmit power must be finite and >= 0, got {transmit_power}"
    );
    assert!(
        gain.is_finite() && gain >= 0.0,
        "gain must be finite and >= 0, got {gain}"
    );
    transmit_power * gain
}

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-slot channel state for the users sharing one resource block.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRealization {
    gains: Vec<f64>,
    received_snr: Vec<f64>,
}

impl LinkRealization {
    /// Builds the realization from per-user gains and transmit powers.
    pub fn new(gains: Vec<f64>, transmit_powers: &[f64]) -> Self {
        assert_eq!(
            gains.len(),
            transmit_powers.len(),
            "gains and powers must align"
        );
        let received_snr = gains
            .iter()
            .zip(transmit_powers)
            .map(|(&g, &p)| to_received_snr(p, g))
            .collect();
        LinkRealization {
            gains,
            received_snr,
        }
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn received_snr(&self) -> &[f64] {
        &self.received_snr
    }
}
