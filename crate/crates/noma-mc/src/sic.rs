//! Successive interference cancellation for an uplink NOMA cluster.
//!
//! Three decoding-order policies are supported for a two-user cluster of
//! one *primary* user (a QoS-constrained sensor) and one *secondary*
//! user (a broadband user):
//!
//! - **CSI-based**: the user with the larger received SNR is decoded
//!   first.
//! - **QoS-based**: the primary user is always decoded first.
//! - **Hybrid**: the secondary user is decoded first only when its
//!   received SNR exceeds the primary's interference tolerance
//!   `tau = alpha_p / eps_p - 1`, i.e. exactly when decoding the primary
//!   first would violate the primary's own QoS. Both fixed orders suffer
//!   an outage error floor at high SNR; the hybrid order removes it when
//!   `eps_p * eps_s <= 1`.
//!
//! [`decode`] executes the sequential cancellation itself: the user at
//! stage `k` sees every not-yet-cancelled user as interference, a stage
//! succeeds when its SINR reaches the user's threshold, and a stage
//! failure fails every later stage (no partial cancellation).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SicError {
    #[error("target rate must be >= 0, got {0}")]
    NegativeRate(f64),
    #[error("SINR threshold must be > 0, got {0}")]
    NonPositiveThreshold(f64),
    #[error("cluster must contain exactly one primary user, found {0}")]
    PrimaryCount(usize),
}

/// QoS role of a user within a two-user cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Primary,
    Secondary,
}

/// Per-user traffic demand and transmit configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLoad {
    /// Target rate in bits/s/Hz.
    pub target_rate: f64,
    pub role: Role,
    /// Linear transmit power.
    pub transmit_power: f64,
}

impl UserLoad {
    pub fn new(target_rate: f64, role: Role, transmit_power: f64) -> Self {
        assert!(target_rate > 0.0, "target rate must be > 0");
        assert!(transmit_power >= 0.0, "transmit power must be >= 0");
        UserLoad {
            target_rate,
            role,
            transmit_power,
        }
    }

    /// SINR threshold implied by the target rate; always recomputed from
    /// the rate so the two can never disagree.
    pub fn sinr_threshold(&self) -> f64 {
        sinr_threshold(self.target_rate).expect("rate validated at construction")
    }
}

/// Which rule resolves the SIC decoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodingPolicy {
    CsiBased,
    QosBased,
    Hybrid,
}

impl DecodingPolicy {
    pub const ALL: [DecodingPolicy; 3] = [
        DecodingPolicy::CsiBased,
        DecodingPolicy::QosBased,
        DecodingPolicy::Hybrid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DecodingPolicy::CsiBased => "csi_based",
            DecodingPolicy::QosBased => "qos_based",
            DecodingPolicy::Hybrid => "hybrid",
        }
    }
}

impl std::fmt::Display for DecodingPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one sequential decoding pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingOutcome {
    /// User indices in decoding order (`order[0]` decoded first).
    pub order: Vec<usize>,
    /// SINR seen at each stage, assuming all earlier cancellations held.
    pub stage_sinr: Vec<f64>,
    /// Per-user success flags, indexed by user (not by stage).
    pub success: Vec<bool>,
    /// Hybrid diagnostic: the primary's interference tolerance, when the
    /// order came from the hybrid rule. May be negative.
    pub tolerance: Option<f64>,
}

impl DecodingOutcome {
    pub fn with_tolerance(mut self, tau: f64) -> Self {
        self.tolerance = Some(tau);
        self
    }

    /// Success flag of the user decoded at `stage`.
    pub fn stage_success(&self, stage: usize) -> bool {
        self.success[self.order[stage]]
    }
}

/// Shannon SINR threshold for a target rate: `eps = 2^R - 1`.
pub fn sinr_threshold(target_rate: f64) -> Result<f64, SicError> {
    if !(target_rate >= 0.0) {
        return Err(SicError::NegativeRate(target_rate));
    }
    Ok(target_rate.exp2() - 1.0)
}

/// SINR of a decoding stage: signal over noise plus remaining
/// co-channel interference (noise normalized to 1).
pub fn stage_sinr(alpha_target: f64, interference_sum: f64) -> f64 {
    assert!(alpha_target >= 0.0, "received SNR must be >= 0");
    assert!(interference_sum >= 0.0, "interference must be >= 0");
    alpha_target / (1.0 + interference_sum)
}

/// CSI-based order: descending received SNR, ties broken by lower user
/// index first.
pub fn resolve_order_csi(alphas: &[f64]) -> Vec<usize> {
    assert!(
        alphas.iter().all(|a| a.is_finite()),
        "received SNRs must be finite"
    );
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&a, &b| alphas[b].partial_cmp(&alphas[a]).unwrap());
    order
}

/// QoS-based order: the single primary user is decoded first.
pub fn resolve_order_qos(roles: &[Role]) -> Result<Vec<usize>, SicError> {
    let primaries: Vec<usize> = roles
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == Role::Primary)
        .map(|(i, _)| i)
        .collect();
    if primaries.len() != 1 {
        return Err(SicError::PrimaryCount(primaries.len()));
    }
    let mut order = vec![primaries[0]];
    order.extend((0..roles.len()).filter(|i| *i != primaries[0]));
    Ok(order)
}

/// How much interference the primary user can absorb while still meeting
/// its QoS: `tau = alpha_p / eps_p - 1`. Negative means none.
pub fn interference_tolerance(alpha_primary: f64, eps_primary: f64) -> Result<f64, SicError> {
    if !(eps_primary > 0.0) {
        return Err(SicError::NonPositiveThreshold(eps_primary));
    }
    assert!(alpha_primary >= 0.0, "received SNR must be >= 0");
    Ok(alpha_primary / eps_primary - 1.0)
}

/// Hybrid order over a (primary, secondary) pair, with the primary at
/// index 0. The secondary is decoded first only when its received SNR
/// exceeds the primary's interference tolerance; at the boundary
/// `alpha_s == tau` the primary's QoS survives the interference, so the
/// primary stays first.
pub fn resolve_order_hybrid(
    alpha_primary: f64,
    alpha_secondary: f64,
    eps_primary: f64,
) -> [usize; 2] {
    assert!(eps_primary > 0.0, "primary threshold must be > 0");
    let tau = alpha_primary / eps_primary - 1.0;
    if alpha_secondary <= tau {
        [0, 1]
    } else {
        [1, 0]
    }
}

/// Resolves the order for a (primary, secondary) pair under `policy`.
/// Index 0 is the primary user.
pub fn resolve_order(policy: DecodingPolicy, alphas: [f64; 2], eps_primary: f64) -> Vec<usize> {
    match policy {
        DecodingPolicy::CsiBased => resolve_order_csi(&alphas),
        DecodingPolicy::QosBased => vec![0, 1],
        DecodingPolicy::Hybrid => resolve_order_hybrid(alphas[0], alphas[1], eps_primary).to_vec(),
    }
}

/// Executes sequential SIC decoding.
///
/// `order` must be a permutation of the user indices; `alphas` and
/// `eps` are per-user received SNRs and SINR thresholds. The user at
/// stage `k` sees interference from every user not yet cancelled; a
/// stage succeeds when its SINR reaches the user's threshold, and a
/// failed stage fails all later stages.
pub fn decode(order: &[usize], alphas: &[f64], eps: &[f64]) -> DecodingOutcome {
    let n = alphas.len();
    assert_eq!(eps.len(), n, "thresholds must align with received SNRs");
    assert_eq!(order.len(), n, "order must cover every user");
    {
        let mut seen = vec![false; n];
        for &u in order {
            assert!(
                u < n && !seen[u],
                "order must be a permutation of user indices"
            );
            seen[u] = true;
        }
    }

    let mut remaining: f64 = alphas.iter().sum();
    let mut stage_sinrs = Vec::with_capacity(n);
    let mut success = vec![false; n];
    let mut chain_alive = true;
    for &user in order {
        remaining -= alphas[user];
        let sinr = stage_sinr(alphas[user], remaining.max(0.0));
        stage_sinrs.push(sinr);
        if chain_alive && sinr >= eps[user] {
            success[user] = true;
        } else {
            chain_alive = false;
        }
    }

    DecodingOutcome {
        order: order.to_vec(),
        stage_sinr: stage_sinrs,
        success,
        tolerance: None,
    }
}
