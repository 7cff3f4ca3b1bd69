//! QoS-driven downlink clustering and minimal power allocation.
//!
//! Two user classes share each two-user downlink NOMA cluster: an IoT
//! sensor with a latency/reliability-constrained short-packet demand, and
//! a broadband user with a plain rate target. The sensor is always
//! decoded first (at both receivers), so it never waits on a SIC stage;
//! that requires its partner to have the *stronger* channel, which drives
//! the pairing rule.
//!
//! The sensor's SINR demand is the max-rate requirement: the larger of
//! the plain successful-decoding threshold `2^(b/n) - 1` and the SINR at
//! which the finite-blocklength rate [`fb_rate`] reaches `b/n`. Given
//! both demands, [`q_pa`] allocates the unique minimal power split that
//! meets them with equality, and [`maximize_connectivity`] admits
//! clusters cheapest-first under a total power budget (which maximizes
//! the admitted count).

use thiserror::Error;

use crate::sic::sinr_threshold;
use crate::stats::inv_q;

#[derive(Debug, Error, PartialEq)]
pub enum DownlinkError {
    #[error("decoding error probability must be in (0, 0.5), got {0}")]
    InvalidErrorProbability(f64),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("infeasible cluster: {0}")]
    Infeasible(String),
}

/// Short-packet IoT sensor demand. Blocklength stands in for the latency
/// budget, the decoding error probability for reliability.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorProfile {
    pub payload_bits: f64,
    pub blocklength: u64,
    pub decoding_error: f64,
    pub channel_gain: f64,
}

impl SensorProfile {
    pub fn validate(&self) -> Result<(), DownlinkError> {
        if !(self.decoding_error > 0.0 && self.decoding_error < 0.5) {
            return Err(DownlinkError::InvalidErrorProbability(self.decoding_error));
        }
        if self.blocklength < 1 {
            return Err(DownlinkError::InvalidProfile(
                "blocklength must be >= 1".into(),
            ));
        }
        if !(self.payload_bits >= 1.0) {
            return Err(DownlinkError::InvalidProfile(
                "payload must be >= 1 bit".into(),
            ));
        }
        if !self.channel_gain.is_finite() || self.channel_gain < 0.0 {
            return Err(DownlinkError::InvalidProfile(
                "gain must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Broadband user demand: a plain rate target.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadbandProfile {
    pub target_rate: f64,
    pub channel_gain: f64,
}

impl BroadbandProfile {
    pub fn validate(&self) -> Result<(), DownlinkError> {
        if !(self.target_rate > 0.0) {
            return Err(DownlinkError::InvalidProfile(
                "target rate must be > 0".into(),
            ));
        }
        if !self.channel_gain.is_finite() || self.channel_gain < 0.0 {
            return Err(DownlinkError::InvalidProfile(
                "gain must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Normal-approximation achievable rate at blocklength `n` and decoding
/// error `delta`:
///
/// ```text
/// R = log2(1 + gamma) - sqrt(V / n) * Qinv(delta) * log2(e),
/// V = 1 - 1 / (1 + gamma)^2
/// ```
///
/// clamped at zero from below.
pub fn fb_rate(gamma: f64, blocklength: u64, delta: f64) -> Result<f64, DownlinkError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(DownlinkError::InvalidErrorProbability(delta));
    }
    assert!(
        gamma >= 0.0 && gamma.is_finite(),
        "SINR must be finite and >= 0"
    );
    assert!(blocklength >= 1, "blocklength must be >= 1");
    let capacity = (1.0 + gamma).log2();
    let dispersion = 1.0 - 1.0 / ((1.0 + gamma) * (1.0 + gamma));
    let penalty =
        (dispersion / blocklength as f64).sqrt() * inv_q(delta) * std::f64::consts::LOG2_E;
    Ok((capacity - penalty).max(0.0))
}

/// Smallest SINR at which the sensor's demand is met: the max of the
/// plain threshold `2^(b/n) - 1` and the finite-blocklength requirement,
/// found by bisection to a 1e-9 relative tolerance.
pub fn required_sensor_sinr(
    payload_bits: f64,
    blocklength: u64,
    delta: f64,
) -> Result<f64, DownlinkError> {
    if !(payload_bits >= 1.0) {
        return Err(DownlinkError::InvalidProfile(
            "payload must be >= 1 bit".into(),
        ));
    }
    let target = payload_bits / blocklength as f64;
    let sdr = sinr_threshold(target).expect("target > 0");
    // fb_rate(sdr) < target for any finite n, so sdr brackets from below.
    let mut lo = sdr;
    let mut hi = (sdr + 1.0) * 2.0;
    while fb_rate(hi, blocklength, delta)? < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(DownlinkError::Infeasible(
                "no finite SINR meets the demand".into(),
            ));
        }
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if fb_rate(mid, blocklength, delta)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(sdr))
}

/// A sensor/broadband pairing by index into the input lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterPair {
    pub sensor: usize,
    pub broadband: usize,
}

/// [`pair_users`] output: pairs plus whoever could not be clustered.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<ClusterPair>,
    pub unpaired_sensors: Vec<usize>,
    pub unpaired_broadbands: Vec<usize>,
}

/// Greedy clustering: sensors in descending gain order each take the
/// *weakest* still-available broadband user whose gain strictly exceeds
/// theirs (ties in gain broken by index). Keeping strong broadband
/// partners in reserve lets weaker sensors still find a match.
pub fn pair_users(sensors: &[SensorProfile], broadbands: &[BroadbandProfile]) -> Pairing {
    let mut sensor_order: Vec<usize> = (0..sensors.len()).collect();
    sensor_order.sort_by(|&a, &b| {
        sensors[b]
            .channel_gain
            .partial_cmp(&sensors[a].channel_gain)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut available: Vec<usize> = (0..broadbands.len()).collect();
    available.sort_by(|&a, &b| {
        broadbands[a]
            .channel_gain
            .partial_cmp(&broadbands[b].channel_gain)
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut pairs = Vec::new();
    let mut unpaired_sensors = Vec::new();
    for &s in &sensor_order {
        let gain = sensors[s].channel_gain;
        match available
            .iter()
            .position(|&b| broadbands[b].channel_gain > gain)
        {
            Some(pos) => pairs.push(ClusterPair {
                sensor: s,
                broadband: available.remove(pos),
            }),
            None => unpaired_sensors.push(s),
        }
    }
    pairs.sort_by_key(|p| p.sensor);
    unpaired_sensors.sort_unstable();
    Pairing {
        pairs,
        unpaired_sensors,
        unpaired_broadbands: available,
    }
}

/// Minimal power split for one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p_sensor: f64,
    pub p_broadband: f64,
    pub required_total: f64,
}

/// Minimal powers meeting both QoS demands with the sensor decoded
/// first at both receivers:
///
/// ```text
/// p_b = eps_b / g_b
/// p_s = eps_s * (p_b * g_s + 1) / g_s
/// ```
///
/// Both constraints bind (up to a 1e-9 relative safety factor so the
/// boundary SINRs round up rather than down in floating point). The
/// broadband receiver's first-stage decoding of the sensor signal is
/// implied by `g_b > g_s`; it is re-checked numerically and reported as
/// infeasible rather than assumed.
pub fn q_pa(
    sensor_gain: f64,
    broadband_gain: f64,
    eps_sensor: f64,
    eps_broadband: f64,
) -> Result<PowerSplit, DownlinkError> {
    assert!(
        eps_sensor > 0.0 && eps_broadband > 0.0,
        "SINR thresholds must be > 0"
    );
    if !(sensor_gain > 0.0) {
        return Err(DownlinkError::Infeasible(format!(
            "sensor gain must be > 0, got {sensor_gain}"
        )));
    }
    if !(broadband_gain > sensor_gain) {
        return Err(DownlinkError::Infeasible(format!(
            "broadband gain {broadband_gain} must exceed sensor gain {sensor_gain}"
        )));
    }
    const SAFETY: f64 = 1.0 + 1e-9;
    let p_broadband = eps_broadband / broadband_gain * SAFETY;
    let p_sensor = eps_sensor * (p_broadband * sensor_gain + 1.0) / sensor_gain * SAFETY;

    let first_stage_at_broadband = p_sensor * broadband_gain / (1.0 + p_broadband * broadband_gain);
    if first_stage_at_broadband < eps_sensor {
        return Err(DownlinkError::Infeasible(format!(
            "broadband receiver cannot decode the sensor stage: SINR {first_stage_at_broadband} < {eps_sensor}"
        )));
    }
    Ok(PowerSplit {
        p_sensor,
        p_broadband,
        required_total: p_sensor + p_broadband,
    })
}

/// A fully planned cluster: members, gains, and its minimal power split.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPlan {
    pub sensor: usize,
    pub broadband: usize,
    pub sensor_gain: f64,
    pub broadband_gain: f64,
    pub eps_sensor: f64,
    pub eps_broadband: f64,
    pub split: PowerSplit,
}

/// Pairs the populations and allocates minimal powers per cluster.
pub fn plan_clusters(
    sensors: &[SensorProfile],
    broadbands: &[BroadbandProfile],
) -> Result<(Vec<ClusterPlan>, Pairing), DownlinkError> {
    for s in sensors {
        s.validate()?;
    }
    for b in broadbands {
        b.validate()?;
    }
    let pairing = pair_users(sensors, broadbands);
    let mut plans = Vec::with_capacity(pairing.pairs.len());
    for pair in &pairing.pairs {
        let s = &sensors[pair.sensor];
        let b = &broadbands[pair.broadband];
        let eps_sensor = required_sensor_sinr(s.payload_bits, s.blocklength, s.decoding_error)?;
        let eps_broadband = sinr_threshold(b.target_rate).expect("rate validated");
        let split = q_pa(s.channel_gain, b.channel_gain, eps_sensor, eps_broadband)?;
        plans.push(ClusterPlan {
            sensor: pair.sensor,
            broadband: pair.broadband,
            sensor_gain: s.channel_gain,
            broadband_gain: b.channel_gain,
            eps_sensor,
            eps_broadband,
            split,
        });
    }
    Ok((plans, pairing))
}

/// Admits clusters cheapest-first under the total power budget and
/// returns the admitted indices in ascending order. Ascending-cost
/// greed is optimal for maximizing the admitted *count* under a sum
/// constraint.
pub fn maximize_connectivity(clusters: &[ClusterPlan], power_budget: f64) -> Vec<usize> {
    assert!(power_budget >= 0.0, "budget must be >= 0");
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by(|&a, &b| {
        clusters[a]
            .split
            .required_total
            .partial_cmp(&clusters[b].split.required_total)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut admitted = Vec::new();
    let mut spent = 0.0;
    for idx in order {
        let cost = clusters[idx].split.required_total;
        if spent + cost <= power_budget {
            spent += cost;
            admitted.push(idx);
        } else {
            break;
        }
    }
    admitted.sort_unstable();
    admitted
}
