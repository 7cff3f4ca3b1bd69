//! Semi-grant-free uplink access over orthogonal resource blocks.
//!
//! Each ORB is owned by one grant-based (GB) user; a population of
//! potential grant-free users (PGFUs) contends opportunistically.
//!
//! **Single-ORB protocol** ([`run_single_orb_slot`]): the base station
//! observes the GB user's realized SNR and broadcasts a threshold. A
//! delay-tolerant GB user announces both a minimal received power (MTP)
//! and a per-user maximal tolerance to interference (MTI); a
//! delay-sensitive GB user announces the MTI only. Grant-free users whose
//! received power clears the MTP are decoded *before* the GB user (if
//! several qualify, only the strongest is decoded and the rest collide);
//! users under the MTI cap are decoded *after* the GB user. The
//! worst-case MTI splits the GB user's interference tolerance over all K
//! PGFUs, so admitted interference can never break the GB user's QoS;
//! the average-active mode divides by `ceil(rho * K)` instead and trades
//! that guarantee for throughput.
//!
//! **Multi-ORB contention** ([`run_multi_orb_slot`]): active users pick
//! ORBs uniformly at random and each cluster serves at most one GF user
//! on top of its GB owner. A lone arrival is decoded with the hybrid SIC
//! rule. Two or more arrivals collide, unless a [`PowerPool`] is in use
//! and exactly one arrival occupies the highest occupied power level, in
//! which case that user survives and the rest remain as interference.
//! [`AcbPolicy`] barring thins the offered load before ORB selection.
//!
//! Every slot consumes randomness through fixed per-purpose substreams
//! (see the `stream_purpose` constants) with a fixed draw count per
//! PGFU, so different variants run on common random numbers and results
//! never depend on worker count.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{sample_gains, to_received_snr, ChannelError, FadingModel, RngStream};
use crate::sic::{decode, interference_tolerance, sinr_threshold, SicError};
use crate::stats::{mean_ci_from_totals, z_for_confidence};

/// Children of a slot stream, one per source of randomness. Each purpose
/// draws a fixed count per slot (see module docs), which keeps common
/// random numbers aligned across access variants.
pub mod stream_purpose {
    pub const GB_GAINS: u64 = 0;
    pub const GF_GAINS: u64 = 1;
    pub const ACTIVATION: u64 = 2;
    pub const ORB_CHOICE: u64 = 3;
    pub const POWER: u64 = 4;
    pub const ACB: u64 = 5;
}

#[derive(Debug, Error)]
pub enum SemiGfError {
    #[error("PGFU count must be >= 1")]
    ZeroPgfus,
    #[error("average-active MTI needs activation probability in (0, 1], got {0}")]
    InvalidActivationForAverage(f64),
    #[error("invalid power pool: {0}")]
    InvalidPool(String),
    #[error("barring factor must be in [0, 1], got {0}")]
    InvalidBarringFactor(f64),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Sic(#[from] SicError),
}

/// Latency class of a grant-based user; decides which thresholds the
/// base station broadcasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayClass {
    Sensitive,
    Tolerant,
}

/// The grant-based owner of one ORB.
#[derive(Debug, Clone)]
pub struct GbUser {
    /// Target rate in bits/s/Hz.
    pub target_rate: f64,
    pub delay_class: DelayClass,
    /// Linear transmit power.
    pub transmit_power: f64,
    pub orb_id: usize,
    pub fading: FadingModel,
}

impl GbUser {
    pub fn new(
        target_rate: f64,
        delay_class: DelayClass,
        transmit_power: f64,
        orb_id: usize,
        fading: FadingModel,
    ) -> Self {
        assert!(target_rate > 0.0, "GB target rate must be > 0");
        assert!(transmit_power >= 0.0, "GB transmit power must be >= 0");
        GbUser {
            target_rate,
            delay_class,
            transmit_power,
            orb_id,
            fading,
        }
    }

    pub fn sinr_threshold(&self) -> f64 {
        sinr_threshold(self.target_rate).expect("rate validated at construction")
    }
}

/// The contending grant-free population.
#[derive(Debug, Clone)]
pub struct GfPopulation {
    /// Number of potential grant-free users (K).
    pub count: usize,
    /// Per-slot activation probability (rho).
    pub activation_prob: f64,
    /// Transmit powers are drawn uniformly from this linear range when no
    /// power pool is in force.
    pub power_range: (f64, f64),
    pub fading: FadingModel,
    /// Target rate in bits/s/Hz.
    pub target_rate: f64,
}

impl GfPopulation {
    pub fn validate(&self) -> Result<(), SemiGfError> {
        if self.count < 1 {
            return Err(SemiGfError::ZeroPgfus);
        }
        if !(0.0..=1.0).contains(&self.activation_prob) {
            return Err(SemiGfError::InvalidScenario(format!(
                "activation probability must be in [0, 1], got {}",
                self.activation_prob
            )));
        }
        let (lo, hi) = self.power_range;
        if !(0.0 <= lo && lo <= hi) || !hi.is_finite() {
            return Err(SemiGfError::InvalidScenario(format!(
                "power range must satisfy 0 <= min <= max, got [{lo}, {hi}]"
            )));
        }
        if !(self.target_rate > 0.0) {
            return Err(SemiGfError::InvalidScenario(
                "GF target rate must be > 0".into(),
            ));
        }
        self.fading.validate()?;
        Ok(())
    }
}

/// Threshold pair a base station announces for one ORB. Delay-sensitive
/// GB users never announce an MTP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadcastThreshold {
    /// Minimal received power qualifying a GF user for decoding *before*
    /// the GB user.
    pub mtp: Option<f64>,
    /// Per-user received-power cap qualifying a GF user for decoding
    /// *after* the GB user.
    pub mti: Option<f64>,
}

/// How the MTI splits the GB user's interference tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtiMode {
    /// Divide by all K PGFUs; admitted interference can never break the
    /// GB user's QoS.
    WorstCase,
    /// Divide by the expected number of active users, `ceil(rho * K)`.
    AverageActive,
}

/// Per-user interference cap: the GB user's total tolerance
/// `max(0, alpha_gb / eps_gb - 1)` split equally over the accounted
/// user count.
pub fn compute_mti(
    alpha_gb: f64,
    eps_gb: f64,
    mode: MtiMode,
    k: usize,
    rho: f64,
) -> Result<f64, SemiGfError> {
    if k == 0 {
        return Err(SemiGfError::ZeroPgfus);
    }
    assert!(eps_gb > 0.0, "GB threshold must be > 0");
    assert!(alpha_gb >= 0.0, "GB received SNR must be >= 0");
    let tau = (alpha_gb / eps_gb - 1.0).max(0.0);
    let denom = match mode {
        MtiMode::WorstCase => k as f64,
        MtiMode::AverageActive => {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(SemiGfError::InvalidActivationForAverage(rho));
            }
            // Tiny offset so a product like 0.2 * 5 that rounds a hair
            // above its exact value does not ceil to the next integer.
            ((rho * k as f64) - 1e-9).ceil().max(1.0)
        }
    };
    Ok(tau / denom)
}

/// Minimal GF received power that decodes over the GB user's signal at
/// the first SIC stage: `eps_gf * (alpha_gb + 1)`.
pub fn compute_mtp(alpha_gb: f64, eps_gf: f64) -> f64 {
    assert!(eps_gf > 0.0, "GF threshold must be > 0");
    assert!(alpha_gb >= 0.0, "GB received SNR must be >= 0");
    eps_gf * (alpha_gb + 1.0)
}

impl BroadcastThreshold {
    /// Thresholds the base station announces for a realized GB SNR.
    pub fn announce(
        delay_class: DelayClass,
        alpha_gb: f64,
        eps_gb: f64,
        eps_gf: f64,
        mode: MtiMode,
        k: usize,
        rho: f64,
    ) -> Result<Self, SemiGfError> {
        let mti = Some(compute_mti(alpha_gb, eps_gb, mode, k, rho)?);
        let mtp = match delay_class {
            DelayClass::Tolerant => Some(compute_mtp(alpha_gb, eps_gf)),
            DelayClass::Sensitive => None,
        };
        Ok(BroadcastThreshold { mtp, mti })
    }
}

/// Layered target receive powers for multi-ORB power control, strictly
/// decreasing and SIC-separable: every level is decodable treating all
/// lower levels as interference.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPool {
    levels: Vec<f64>,
}

impl PowerPool {
    /// Validates `levels` (strictly decreasing, positive) for a GF
    /// threshold `eps_gf`.
    pub fn new(levels: Vec<f64>, eps_gf: f64) -> Result<Self, SemiGfError> {
        assert!(eps_gf > 0.0, "GF threshold must be > 0");
        if levels.is_empty() {
            return Err(SemiGfError::InvalidPool("needs at least one level".into()));
        }
        if levels.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(SemiGfError::InvalidPool(
                "levels must be finite and > 0".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] <= w[1]) {
            return Err(SemiGfError::InvalidPool(
                "levels must be strictly decreasing".into(),
            ));
        }
        for j in 0..levels.len() {
            let below: f64 = levels[j + 1..].iter().sum();
            if levels[j] / (1.0 + below) < eps_gf {
                return Err(SemiGfError::InvalidPool(format!(
                    "level {j} ({}) is not decodable over the {} lower levels at eps {eps_gf}",
                    levels[j],
                    levels.len() - j - 1
                )));
            }
        }
        Ok(PowerPool { levels })
    }

    /// Builds `n_levels` separable levels bottom-up with a multiplicative
    /// margin over the exact separability boundary.
    pub fn layered(eps_gf: f64, margin: f64, n_levels: usize) -> Self {
        assert!(eps_gf > 0.0 && margin > 1.0 && n_levels >= 1);
        let mut asc = Vec::with_capacity(n_levels);
        let mut below = 0.0;
        for _ in 0..n_levels {
            let level = margin * eps_gf * (1.0 + below);
            asc.push(level);
            below += level;
        }
        asc.reverse();
        PowerPool::new(asc, eps_gf).expect("layered construction is separable by margin")
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// A grant-free user's pick from the power pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolAssignment {
    /// Index into the pool's (descending) level list.
    pub level: usize,
    /// Channel-inversion transmit power `level / gain`.
    pub transmit_power: f64,
}

/// Picks a uniformly random pool level whose channel-inversion power
/// fits under `p_max`; `None` when no level is affordable.
///
/// Always consumes exactly one draw so pool and plain-power variants
/// stay stream-aligned.
pub fn apply_power_pool<R: Rng>(
    gain: f64,
    pool: &PowerPool,
    p_max: f64,
    rng: &mut R,
) -> Option<PoolAssignment> {
    assert!(gain > 0.0, "gain must be > 0");
    assert!(p_max >= 0.0, "power cap must be >= 0");
    let u: f64 = rng.random();
    let budget = p_max * gain;
    // Levels are descending, so the affordable ones form a suffix.
    let start = pool.levels.partition_point(|l| *l > budget);
    let feasible = pool.levels.len() - start;
    if feasible == 0 {
        return None;
    }
    let level = start + ((u * feasible as f64) as usize).min(feasible - 1);
    Some(PoolAssignment {
        level,
        transmit_power: pool.levels[level] / gain,
    })
}

/// Access class barring: each user transmits with probability `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcbPolicy {
    pub barring_factor: f64,
}

impl AcbPolicy {
    pub fn new(barring_factor: f64) -> Result<Self, SemiGfError> {
        if !(0.0..=1.0).contains(&barring_factor) {
            return Err(SemiGfError::InvalidBarringFactor(barring_factor));
        }
        Ok(AcbPolicy { barring_factor })
    }

    /// Barring factor that matches the expected offered load `rho * K` to
    /// the `m` available clusters.
    pub fn load_matched(orbs: usize, rho: f64, k: usize) -> Self {
        let offered = rho * k as f64;
        let q = if offered > 0.0 {
            (orbs as f64 / offered).min(1.0)
        } else {
            1.0
        };
        AcbPolicy { barring_factor: q }
    }
}

/// Retains each listed user independently with probability `q`; one draw
/// per entry, so the permitted set at `q` is a subset of the permitted
/// set at any `q' >= q` under shared randomness.
pub fn apply_acb<R: Rng>(active: &[usize], policy: &AcbPolicy, rng: &mut R) -> Vec<usize> {
    let q = policy.barring_factor;
    assert!((0.0..=1.0).contains(&q), "barring factor must be in [0, 1]");
    active
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < q)
        .collect()
}

/// I.i.d. uniform ORB choice per listed user; returns one ORB index per
/// entry. One draw per user.
pub fn assign_orbs_random<R: Rng>(users: &[usize], m: usize, rng: &mut R) -> Vec<usize> {
    assert!(m >= 1, "need at least one ORB");
    users
        .iter()
        .map(|_| {
            let u: f64 = rng.random();
            ((u * m as f64) as usize).min(m - 1)
        })
        .collect()
}

/// Outcome of one access slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotResult {
    pub served_gf: usize,
    pub served_gb: usize,
    /// Contention collision events (per ORB, not per user).
    pub collisions: usize,
    /// Per-ORB GB outage flag.
    pub gb_outage: Vec<bool>,
}

impl SlotResult {
    pub fn served_total(&self) -> usize {
        self.served_gf + self.served_gb
    }
}

/// One slot of the single-ORB protocol: threshold broadcast, qualified
/// GF transmissions, and sequential decoding.
///
/// Decode order is `[strongest MTP user?] -> GB -> MTI users by falling
/// received power`, with every other transmitting MTP qualifier appended
/// after them: those users are collision losers — never served — but
/// their signals still interfere with every earlier stage.
pub fn run_single_orb_slot(
    gb: &GbUser,
    pop: &GfPopulation,
    mti_mode: MtiMode,
    slot: &RngStream,
) -> Result<SlotResult, SemiGfError> {
    pop.validate()?;
    gb.fading.validate()?;
    let eps_gb = gb.sinr_threshold();
    let eps_gf = sinr_threshold(pop.target_rate)?;
    let k = pop.count;

    let g_gb = sample_gains(
        &gb.fading,
        &mut slot.substream(stream_purpose::GB_GAINS).rng(),
        1,
    )?[0];
    let alpha_gb = to_received_snr(gb.transmit_power, g_gb);
    let threshold = BroadcastThreshold::announce(
        gb.delay_class,
        alpha_gb,
        eps_gb,
        eps_gf,
        mti_mode,
        k,
        pop.activation_prob,
    )?;

    let gains = sample_gains(
        &pop.fading,
        &mut slot.substream(stream_purpose::GF_GAINS).rng(),
        k,
    )?;
    let mut act_rng = slot.substream(stream_purpose::ACTIVATION).rng();
    let mut pow_rng = slot.substream(stream_purpose::POWER).rng();
    let (p_lo, p_hi) = pop.power_range;

    let mut received = Vec::with_capacity(k);
    let mut active = Vec::with_capacity(k);
    for (user, &gain) in gains.iter().enumerate() {
        let is_active = act_rng.random::<f64>() < pop.activation_prob;
        let power = p_lo + (p_hi - p_lo) * pow_rng.random::<f64>();
        received.push(to_received_snr(power, gain));
        if is_active {
            active.push(user);
        }
    }

    // Qualification: MTP preferred when both thresholds hold.
    let mut mtp_q: Vec<usize> = Vec::new();
    let mut mti_q: Vec<usize> = Vec::new();
    for &u in &active {
        if threshold.mtp.is_some_and(|floor| received[u] >= floor) {
            mtp_q.push(u);
        } else if threshold.mti.is_some_and(|cap| received[u] <= cap) {
            mti_q.push(u);
        }
    }
    let strongest_mtp = mtp_q.iter().copied().reduce(|best, u| {
        if received[u] > received[best] {
            u
        } else {
            best
        }
    });
    mti_q.sort_by(|&a, &b| {
        received[b]
            .partial_cmp(&received[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    // Cluster index 0 is the GB user; transmitters follow in decode
    // order, MTP losers last (interference only).
    let mut alphas = vec![alpha_gb];
    let mut eps = vec![eps_gb];
    let mut order = Vec::new();
    if strongest_mtp.is_some() {
        order.push(1);
    }
    order.push(0);
    if let Some(s) = strongest_mtp {
        alphas.push(received[s]);
        eps.push(eps_gf);
    }
    for &u in &mti_q {
        alphas.push(received[u]);
        eps.push(eps_gf);
        order.push(alphas.len() - 1);
    }
    let served_cutoff = alphas.len();
    for &u in mtp_q.iter().filter(|u| Some(**u) != strongest_mtp) {
        alphas.push(received[u]);
        eps.push(eps_gf);
        order.push(alphas.len() - 1);
    }

    let outcome = decode(&order, &alphas, &eps);
    let served_gb = usize::from(outcome.success[0]);
    let served_gf = (1..served_cutoff).filter(|&i| outcome.success[i]).count();

    Ok(SlotResult {
        served_gf,
        served_gb,
        collisions: usize::from(mtp_q.len() >= 2),
        gb_outage: vec![!outcome.success[0]],
    })
}

/// Multi-ORB access variant.
#[derive(Debug, Clone)]
pub enum AccessVariant {
    /// Grant-based users only; no GF contention.
    GbOnly,
    /// Uncontrolled GF transmit power drawn from the population range.
    Plain,
    /// Channel-inversion onto pool levels.
    PowerPool(PowerPool),
    /// Power pool plus access class barring.
    PowerPoolAcb(PowerPool, AcbPolicy),
}

impl AccessVariant {
    pub fn name(&self) -> &'static str {
        match self {
            AccessVariant::GbOnly => "gb_only",
            AccessVariant::Plain => "plain",
            AccessVariant::PowerPool(_) => "power_pool",
            AccessVariant::PowerPoolAcb(..) => "power_pool_acb",
        }
    }
}

struct Arrival {
    received: f64,
    level: Option<usize>,
}

/// Decodes one ORB cluster: the GB owner, at most one servable GF
/// arrival, and the remaining arrivals as undecodable interference.
/// Order between the GB user and the survivor follows the hybrid rule
/// with the residual interference included in the GB user's stage.
fn decode_orb_cluster(
    alpha_gb: f64,
    eps_gb: f64,
    eps_gf: f64,
    survivor: Option<f64>,
    tail: &[f64],
) -> (bool, bool) {
    let mut alphas = vec![alpha_gb];
    let mut eps = vec![eps_gb];
    let mut order = Vec::with_capacity(2 + tail.len());
    match survivor {
        None => order.push(0),
        Some(alpha_gf) => {
            alphas.push(alpha_gf);
            eps.push(eps_gf);
            let i_rest: f64 = tail.iter().sum();
            let tau = interference_tolerance(alpha_gb, eps_gb).expect("eps_gb > 0");
            if alpha_gf + i_rest <= tau {
                order.extend([0, 1]);
            } else {
                order.extend([1, 0]);
            }
        }
    }
    for &a in tail {
        alphas.push(a);
        eps.push(eps_gf);
        order.push(alphas.len() - 1);
    }
    let outcome = decode(&order, &alphas, &eps);
    (outcome.success[0], survivor.is_some() && outcome.success[1])
}

/// One slot of multi-ORB semi-grant-free access.
///
/// `gb_users[i]` must own ORB `i`; `m` is the ORB count. Active GF users
/// (after barring, for the ACB variant) choose ORBs uniformly at random;
/// each ORB then resolves its arrivals according to `variant` and the
/// cluster is decoded with at most two served users (GB + one GF).
pub fn run_multi_orb_slot(
    gb_users: &[GbUser],
    pop: &GfPopulation,
    m: usize,
    variant: &AccessVariant,
    slot: &RngStream,
) -> Result<SlotResult, SemiGfError> {
    if m < 1 || gb_users.len() != m {
        return Err(SemiGfError::InvalidScenario(format!(
            "need one GB user per ORB: m={m}, gb_users={}",
            gb_users.len()
        )));
    }
    if gb_users.iter().enumerate().any(|(i, gb)| gb.orb_id != i) {
        return Err(SemiGfError::InvalidScenario(
            "GB users must be indexed by ORB".into(),
        ));
    }
    pop.validate()?;
    let eps_gf = sinr_threshold(pop.target_rate)?;
    let k = pop.count;

    let mut gb_rng = slot.substream(stream_purpose::GB_GAINS).rng();
    let mut alpha_gb = Vec::with_capacity(m);
    for gb in gb_users {
        gb.fading.validate()?;
        let g = sample_gains(&gb.fading, &mut gb_rng, 1)?[0];
        alpha_gb.push(to_received_snr(gb.transmit_power, g));
    }

    let gains = sample_gains(
        &pop.fading,
        &mut slot.substream(stream_purpose::GF_GAINS).rng(),
        k,
    )?;
    let mut act_rng = slot.substream(stream_purpose::ACTIVATION).rng();
    let active: Vec<usize> = (0..k)
        .filter(|_| act_rng.random::<f64>() < pop.activation_prob)
        .collect();

    // Every PGFU draws an ORB and a power value regardless of activity,
    // so all variants at a given (seed, slot) share their randomness.
    let all_users: Vec<usize> = (0..k).collect();
    let orb_of = assign_orbs_random(
        &all_users,
        m,
        &mut slot.substream(stream_purpose::ORB_CHOICE).rng(),
    );
    let mut pow_rng = slot.substream(stream_purpose::POWER).rng();
    let (p_lo, p_hi) = pop.power_range;
    let pool = match variant {
        AccessVariant::PowerPool(pool) | AccessVariant::PowerPoolAcb(pool, _) => Some(pool),
        _ => None,
    };
    let mut offer: Vec<Option<Arrival>> = Vec::with_capacity(k);
    for &gain in &gains {
        match pool {
            Some(pool) => {
                offer.push(
                    apply_power_pool(gain, pool, p_hi, &mut pow_rng).map(|a| Arrival {
                        received: pool.levels()[a.level],
                        level: Some(a.level),
                    }),
                );
            }
            None => {
                let power = p_lo + (p_hi - p_lo) * pow_rng.random::<f64>();
                offer.push(Some(Arrival {
                    received: to_received_snr(power, gain),
                    level: None,
                }));
            }
        }
    }

    let permitted: Vec<usize> = match variant {
        AccessVariant::GbOnly => Vec::new(),
        AccessVariant::Plain | AccessVariant::PowerPool(_) => active,
        AccessVariant::PowerPoolAcb(_, acb) => {
            apply_acb(&active, acb, &mut slot.substream(stream_purpose::ACB).rng())
        }
    };

    let mut by_orb: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &u in &permitted {
        if offer[u].is_some() {
            by_orb[orb_of[u]].push(u);
        }
    }

    let mut served_gf = 0;
    let mut served_gb = 0;
    let mut collisions = 0;
    let mut gb_outage = Vec::with_capacity(m);
    for (orb, gb) in gb_users.iter().enumerate() {
        let eps_gb = gb.sinr_threshold();
        let arrivals = &by_orb[orb];
        let rx = |u: usize| offer[u].as_ref().expect("transmitting").received;

        let (survivor, tail): (Option<usize>, Vec<usize>) = match arrivals.len() {
            0 => (None, Vec::new()),
            1 => (Some(arrivals[0]), Vec::new()),
            _ => match pool {
                None => {
                    collisions += 1;
                    (None, arrivals.clone())
                }
                Some(_) => {
                    let top = arrivals
                        .iter()
                        .filter_map(|&u| offer[u].as_ref().unwrap().level)
                        .min()
                        .expect("pool arrivals carry levels");
                    let mut at_top = arrivals
                        .iter()
                        .filter(|&&u| offer[u].as_ref().unwrap().level == Some(top));
                    match (at_top.next(), at_top.next()) {
                        (Some(&winner), None) => (
                            Some(winner),
                            arrivals.iter().copied().filter(|&u| u != winner).collect(),
                        ),
                        _ => {
                            collisions += 1;
                            (None, arrivals.clone())
                        }
                    }
                }
            },
        };

        let tail_rx: Vec<f64> = tail.iter().map(|&u| rx(u)).collect();
        let (gb_ok, gf_ok) =
            decode_orb_cluster(alpha_gb[orb], eps_gb, eps_gf, survivor.map(rx), &tail_rx);
        served_gb += usize::from(gb_ok);
        served_gf += usize::from(gf_ok);
        gb_outage.push(!gb_ok);
    }

    Ok(SlotResult {
        served_gf,
        served_gb,
        collisions,
        gb_outage,
    })
}

/// A multi-ORB experiment configuration.
#[derive(Debug, Clone)]
pub struct MultiOrbScenario {
    pub gb_users: Vec<GbUser>,
    pub population: GfPopulation,
    pub variant: AccessVariant,
}

impl MultiOrbScenario {
    pub fn orbs(&self) -> usize {
        self.gb_users.len()
    }
}

/// Mean served users per slot with a normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityEstimate {
    pub mean_served: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub slots: u64,
}

/// Average connectivity (served GB + GF users per slot) over independent
/// slots; one stream per slot, so any worker layout gives identical
/// results.
pub fn connectivity(
    scenario: &MultiOrbScenario,
    slots: u64,
    stream: &RngStream,
) -> Result<ConnectivityEstimate, SemiGfError> {
    if slots < 1 {
        return Err(SemiGfError::InvalidScenario("slots must be >= 1".into()));
    }
    // Validate once; per-slot failures past this point are bugs.
    run_multi_orb_slot(
        &scenario.gb_users,
        &scenario.population,
        scenario.orbs(),
        &scenario.variant,
        &stream.substream(0),
    )?;

    let (sum, sum_sq) = (0..slots)
        .into_par_iter()
        .fold(
            || (0u64, 0u64),
            |(s, s2), slot| {
                let result = run_multi_orb_slot(
                    &scenario.gb_users,
                    &scenario.population,
                    scenario.orbs(),
                    &scenario.variant,
                    &stream.substream(slot),
                )
                .expect("scenario validated");
                let served = result.served_total() as u64;
                (s + served, s2 + served * served)
            },
        )
        .reduce(|| (0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));

    let (mean, lo, hi) = mean_ci_from_totals(sum, sum_sq, slots, z_for_confidence(0.95));
    Ok(ConnectivityEstimate {
        mean_served: mean,
        ci_low: lo,
        ci_high: hi,
        slots,
    })
}
