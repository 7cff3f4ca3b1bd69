//! Monte Carlo outage estimation over SNR sweeps.
//!
//! [`estimate_outage`] counts, per user, the fraction of channel
//! realizations in which sequential SIC decoding misses the user's target
//! rate, and attaches Wilson 95% intervals. [`snr_sweep`] runs a whole
//! transmit-power grid, deriving one RNG stream per (point, trial) so the
//! result is independent of worker count and identical across runs.
//!
//! Because the per-trial stream depends only on the seed, point, and
//! trial index (never on the decoding policy), sweeps with different
//! policies on the same seed share their channel realizations exactly.
//! That makes policy comparisons common-random-number comparisons, and
//! per-realization facts (hybrid never loses a user that a fixed order
//! serves) transfer to the counts without statistical slack.
//!
//! [`asymptotic_floor_oracle`] is an independent check on the high-SNR
//! behaviour: it samples gains only and evaluates the transmit-power
//! limit of the failure events, where stage-1 SINRs collapse to gain
//! ratios and post-cancellation stages cannot fail. Fixed decoding orders
//! keep a positive failure probability in this limit (the outage error
//! floor); the hybrid order drives it to zero when `eps_p * eps_s <= 1`.

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{db_to_linear, sample_gains, ChannelError, FadingModel, RngStream};
use crate::sic::{decode, resolve_order, sinr_threshold, DecodingPolicy, SicError};
use crate::stats::{wilson_interval, z_for_confidence};

#[derive(Debug, Error)]
pub enum OutageError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Sic(#[from] SicError),
    #[error("floor detection needs >= 3 points spanning >= 20 dB, got {points} points over {span_db} dB")]
    InsufficientSpan { points: usize, span_db: f64 },
    #[error("user index {0} out of range")]
    UserIndex(usize),
}

/// Binomial outage estimate with a Wilson 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub failures: u64,
    pub trials: u64,
}

impl OutageEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, z_for_confidence(0.95));
        OutageEstimate {
            p_hat: failures as f64 / trials as f64,
            ci_low,
            ci_high,
            failures,
            trials,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// Outage estimates for one operating point: per user, plus the first
/// SIC stage on its own (whichever user was decoded first that trial).
#[derive(Debug, Clone, PartialEq)]
pub struct OutageReport {
    pub users: Vec<OutageEstimate>,
    pub first_stage: OutageEstimate,
}

/// Configuration of one outage sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Transmit SNR grid in dB, strictly increasing. Both users transmit
    /// at the grid power.
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    /// Target rates in bits/s/Hz, `[primary, secondary]`.
    pub rates: [f64; 2],
    pub policy: DecodingPolicy,
    pub fading: [FadingModel; 2],
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), OutageError> {
        if self.snr_grid_db.is_empty() {
            return Err(OutageError::InvalidSpec("snr grid must be nonempty".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OutageError::InvalidSpec(
                "snr grid must be strictly increasing".into(),
            ));
        }
        if self.trials_per_point < 1 {
            return Err(OutageError::InvalidSpec("trials ≥ 1 required".into()));
        }
        if self.rates.iter().any(|r| !(*r > 0.0)) {
            return Err(OutageError::InvalidSpec("target rates must be > 0".into()));
        }
        for f in &self.fading {
            f.validate()?;
        }
        Ok(())
    }
}

/// One grid point of an [`OutageCurve`].
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub report: OutageReport,
}

/// Outage estimates for one policy over a full SNR grid; every cell of
/// the (snr, user) grid is present.
#[derive(Debug, Clone)]
pub struct OutageCurve {
    policy: DecodingPolicy,
    points: Vec<CurvePoint>,
}

impl OutageCurve {
    pub fn new(policy: DecodingPolicy, points: Vec<CurvePoint>) -> Result<Self, OutageError> {
        if points.is_empty() {
            return Err(OutageError::InvalidSpec("curve must have points".into()));
        }
        if points.windows(2).any(|w| w[0].snr_db >= w[1].snr_db) {
            return Err(OutageError::InvalidSpec(
                "curve points must have strictly increasing SNR".into(),
            ));
        }
        let users = points[0].report.users.len();
        if users == 0 || points.iter().any(|p| p.report.users.len() != users) {
            return Err(OutageError::InvalidSpec(
                "every curve point must carry the same nonzero user count".into(),
            ));
        }
        Ok(OutageCurve { policy, points })
    }

    pub fn policy(&self) -> DecodingPolicy {
        self.policy
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn user_count(&self) -> usize {
        self.points[0].report.users.len()
    }
}

#[derive(Clone, Copy, Default)]
struct TrialCounts {
    user_fail: [u64; 2],
    stage1_fail: u64,
}

impl TrialCounts {
    fn merge(self, other: TrialCounts) -> TrialCounts {
        TrialCounts {
            user_fail: [
                self.user_fail[0] + other.user_fail[0],
                self.user_fail[1] + other.user_fail[1],
            ],
            stage1_fail: self.stage1_fail + other.stage1_fail,
        }
    }

    fn report(self, trials: u64) -> OutageReport {
        OutageReport {
            users: self
                .user_fail
                .iter()
                .map(|&f| OutageEstimate::from_counts(f, trials))
                .collect(),
            first_stage: OutageEstimate::from_counts(self.stage1_fail, trials),
        }
    }
}

fn validate_point(
    policy: DecodingPolicy,
    rates: [f64; 2],
    fading: &[FadingModel; 2],
    trials: u64,
) -> Result<[f64; 2], OutageError> {
    if trials < 1 {
        return Err(OutageError::InvalidSpec("trials ≥ 1 required".into()));
    }
    if rates.iter().any(|r| !(*r > 0.0)) {
        return Err(OutageError::InvalidSpec("target rates must be > 0".into()));
    }
    for f in fading {
        f.validate()?;
    }
    let _ = policy;
    Ok([sinr_threshold(rates[0])?, sinr_threshold(rates[1])?])
}

/// Estimates per-user outage for a (primary, secondary) cluster at fixed
/// transmit powers. One stream per trial; trials may run on any number
/// of workers without changing a single count.
pub fn estimate_outage(
    policy: DecodingPolicy,
    rates: [f64; 2],
    powers: [f64; 2],
    fading: &[FadingModel; 2],
    trials: u64,
    stream: &RngStream,
) -> Result<OutageReport, OutageError> {
    let eps = validate_point(policy, rates, fading, trials)?;
    if powers.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(OutageError::InvalidSpec(
            "powers must be finite and >= 0".into(),
        ));
    }

    let counts = (0..trials)
        .into_par_iter()
        .fold(TrialCounts::default, |acc, trial| {
            let mut rng = stream.substream(trial).rng();
            let g0 = sample_gains(&fading[0], &mut rng, 1).expect("validated")[0];
            let g1 = sample_gains(&fading[1], &mut rng, 1).expect("validated")[0];
            let alphas = [powers[0] * g0, powers[1] * g1];
            let order = resolve_order(policy, alphas, eps[0]);
            let outcome = decode(&order, &alphas, &eps);
            acc.merge(TrialCounts {
                user_fail: [
                    u64::from(!outcome.success[0]),
                    u64::from(!outcome.success[1]),
                ],
                stage1_fail: u64::from(!outcome.stage_success(0)),
            })
        })
        .reduce(TrialCounts::default, TrialCounts::merge);

    Ok(counts.report(trials))
}

/// Runs the sweep: one [`estimate_outage`] call per grid point, with the
/// point stream derived from `(master_seed, point index)`.
pub fn snr_sweep(spec: &SweepSpec) -> Result<OutageCurve, OutageError> {
    spec.validate()?;
    let root = RngStream::new(spec.master_seed, 0);
    let mut points = Vec::with_capacity(spec.snr_grid_db.len());
    for (idx, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let power = db_to_linear(snr_db);
        let report = estimate_outage(
            spec.policy,
            spec.rates,
            [power, power],
            &spec.fading,
            spec.trials_per_point,
            &root.substream(idx as u64),
        )?;
        points.push(CurvePoint { snr_db, report });
    }
    OutageCurve::new(spec.policy, points)
}

/// Gain-only Monte Carlo of the transmit-power limit of the outage
/// events. All received SNRs scale as `P * g` with `P -> infinity`:
/// the stage-1 SINR collapses to the gain ratio `g_first / g_second`,
/// and a post-cancellation stage can only fail on a zero gain.
///
/// This is an independent oracle for the error floor: it never invokes
/// [`decode`] or finite-SNR arithmetic.
pub fn asymptotic_floor_oracle(
    policy: DecodingPolicy,
    rates: [f64; 2],
    fading: &[FadingModel; 2],
    trials: u64,
    stream: &RngStream,
) -> Result<OutageReport, OutageError> {
    let eps = validate_point(policy, rates, fading, trials)?;

    let counts = (0..trials)
        .into_par_iter()
        .fold(TrialCounts::default, |acc, trial| {
            let mut rng = stream.substream(trial).rng();
            let g0 = sample_gains(&fading[0], &mut rng, 1).expect("validated")[0];
            let g1 = sample_gains(&fading[1], &mut rng, 1).expect("validated")[0];
            let g = [g0, g1];
            // Decoding order in the limit. Hybrid decodes the primary
            // first iff eps_p * g_s < g_p (the tau comparison with the
            // noise term scaled away); equal powers reduce the CSI rule
            // to a gain comparison with the same index tie-break.
            let (first, second) = match policy {
                DecodingPolicy::CsiBased => {
                    if g[0] >= g[1] {
                        (0, 1)
                    } else {
                        (1, 0)
                    }
                }
                DecodingPolicy::QosBased => (0, 1),
                DecodingPolicy::Hybrid => {
                    if eps[0] * g[1] < g[0] {
                        (0, 1)
                    } else {
                        (1, 0)
                    }
                }
            };
            let stage1_fail =
                g[first] < eps[first] * g[second] || (g[first] == 0.0 && eps[first] > 0.0);
            let mut fail = [false; 2];
            fail[first] = stage1_fail;
            fail[second] = stage1_fail || (g[second] == 0.0 && eps[second] > 0.0);
            acc.merge(TrialCounts {
                user_fail: [u64::from(fail[0]), u64::from(fail[1])],
                stage1_fail: u64::from(stage1_fail),
            })
        })
        .reduce(TrialCounts::default, TrialCounts::merge);

    Ok(counts.report(trials))
}

/// Verdict of [`detect_floor`].
#[derive(Debug, Clone, PartialEq)]
pub enum FloorVerdict {
    /// The curve has flattened onto a positive floor (reported value is
    /// the mean of the last two decade-separated estimates).
    Floored(f64),
    /// Each 10 dB decade at the top of the grid at least halves the
    /// outage estimate.
    Decaying,
    /// Neither criterion holds (e.g. confidence intervals too wide).
    Inconclusive,
}

/// Classifies the high-SNR tail of a curve for one user.
///
/// Floored: the last two decade-separated estimates have overlapping
/// confidence intervals and both exceed 10x the final interval width.
/// Decaying: every decade step down the chain at least halves the
/// estimate. Anything else is reported as inconclusive rather than
/// silently forced into a class. Thresholds are detection parameters of
/// this rig, not physical claims.
pub fn detect_floor(curve: &OutageCurve, user: usize) -> Result<FloorVerdict, OutageError> {
    if user >= curve.user_count() {
        return Err(OutageError::UserIndex(user));
    }
    let pts = curve.points();
    let span = pts.last().unwrap().snr_db - pts[0].snr_db;
    if pts.len() < 3 || span < 20.0 {
        return Err(OutageError::InsufficientSpan {
            points: pts.len(),
            span_db: span,
        });
    }

    // Walk decade-separated indices down from the top of the grid.
    let mut chain = vec![pts.len() - 1];
    loop {
        let cur = *chain.last().unwrap();
        let target = pts[cur].snr_db - 10.0 + 1e-9;
        match pts[..cur].iter().rposition(|p| p.snr_db <= target) {
            Some(i) => chain.push(i),
            None => break,
        }
    }

    let est = |i: usize| &pts[chain[i]].report.users[user];
    let (a, b) = (est(0), est(1));
    let w = a.ci_width();
    let overlap = a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
    if overlap && a.p_hat > 10.0 * w && b.p_hat > 10.0 * w {
        return Ok(FloorVerdict::Floored(0.5 * (a.p_hat + b.p_hat)));
    }
    let halves_each_decade = (1..chain.len()).all(|i| est(i - 1).p_hat <= est(i).p_hat / 2.0);
    if halves_each_decade {
        Ok(FloorVerdict::Decaying)
    } else {
        Ok(FloorVerdict::Inconclusive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(g: f64) -> FadingModel {
        FadingModel::deterministic(vec![g]).unwrap()
    }

    fn rayleigh_pair() -> [FadingModel; 2] {
        [
            FadingModel::rayleigh(1.0).unwrap(),
            FadingModel::rayleigh(1.0).unwrap(),
        ]
    }

    #[test]
    fn deterministic_channel_gives_exact_outage() {
        let stream = RngStream::new(1, 0);
        let report = estimate_outage(
            DecodingPolicy::QosBased,
            [1.0, 1.0],
            [1.0, 1.0],
            &[det(4.0), det(2.0)],
            100,
            &stream,
        )
        .unwrap();
        assert_eq!(report.users[0].p_hat, 0.0);
        assert_eq!(report.users[1].p_hat, 0.0);

        let report = estimate_outage(
            DecodingPolicy::QosBased,
            [1.0, 1.0],
            [1.0, 1.0],
            &[det(1.0), det(2.0)],
            100,
            &stream,
        )
        .unwrap();
        assert_eq!(report.users[0].p_hat, 1.0);
        assert_eq!(report.users[1].p_hat, 1.0);
    }

    #[test]
    fn qos_primary_outage_at_high_snr_near_half() {
        // At 60 dB with unit thresholds the stage-1 event converges on
        // P(g0 < g1) = 1/2 for i.i.d. exponential gains.
        let p = db_to_linear(60.0);
        let report = estimate_outage(
            DecodingPolicy::QosBased,
            [1.0, 1.0],
            [p, p],
            &rayleigh_pair(),
            1_000_000,
            &RngStream::new(7, 0),
        )
        .unwrap();
        assert!(
            (report.users[0].p_hat - 0.5).abs() < 0.01,
            "primary outage {}",
            report.users[0].p_hat
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let stream = RngStream::new(0, 0);
        assert!(estimate_outage(
            DecodingPolicy::QosBased,
            [1.0, 1.0],
            [1.0, 1.0],
            &rayleigh_pair(),
            0,
            &stream
        )
        .is_err());
        assert!(estimate_outage(
            DecodingPolicy::QosBased,
            [0.0, 1.0],
            [1.0, 1.0],
            &rayleigh_pair(),
            10,
            &stream
        )
        .is_err());
        let spec = SweepSpec {
            snr_grid_db: vec![10.0, 10.0],
            trials_per_point: 1,
            rates: [1.0, 1.0],
            policy: DecodingPolicy::Hybrid,
            fading: rayleigh_pair(),
            master_seed: 0,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sweep_single_point_matches_estimate() {
        let spec = SweepSpec {
            snr_grid_db: vec![0.0],
            trials_per_point: 1,
            rates: [1.0, 1.0],
            policy: DecodingPolicy::QosBased,
            fading: [det(4.0), det(2.0)],
            master_seed: 3,
        };
        let curve = snr_sweep(&spec).unwrap();
        let direct = estimate_outage(
            spec.policy,
            spec.rates,
            [1.0, 1.0],
            &spec.fading,
            1,
            &RngStream::new(3, 0).substream(0),
        )
        .unwrap();
        assert_eq!(curve.points()[0].report, direct);
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = SweepSpec {
            snr_grid_db: vec![0.0, 20.0, 40.0],
            trials_per_point: 20_000,
            rates: [1.0, 0.5],
            policy: DecodingPolicy::Hybrid,
            fading: rayleigh_pair(),
            master_seed: 11,
        };
        let a = snr_sweep(&spec).unwrap();
        let b = snr_sweep(&spec).unwrap();
        for (pa, pb) in a.points().iter().zip(b.points()) {
            assert_eq!(pa.report, pb.report);
        }
    }

    #[test]
    fn counts_do_not_depend_on_worker_count() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                estimate_outage(
                    DecodingPolicy::Hybrid,
                    [1.0, 0.5],
                    [100.0, 100.0],
                    &rayleigh_pair(),
                    100_000,
                    &RngStream::new(5, 0),
                )
                .unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn hybrid_never_counts_more_failures_than_fixed_orders() {
        // Shared (seed, point, trial) streams make this an exact count
        // comparison, not a statistical one.
        let seed = 99;
        let sweep = |policy| {
            snr_sweep(&SweepSpec {
                snr_grid_db: vec![0.0, 20.0, 40.0],
                trials_per_point: 50_000,
                rates: [1.0, 1.0],
                policy,
                fading: rayleigh_pair(),
                master_seed: seed,
            })
            .unwrap()
        };
        let hybrid = sweep(DecodingPolicy::Hybrid);
        for fixed in [
            sweep(DecodingPolicy::CsiBased),
            sweep(DecodingPolicy::QosBased),
        ] {
            for (h, f) in hybrid.points().iter().zip(fixed.points()) {
                for u in 0..2 {
                    assert!(
                        h.report.users[u].failures <= f.report.users[u].failures,
                        "user {u} at {} dB under {:?}",
                        h.snr_db,
                        fixed.policy()
                    );
                }
            }
        }
    }

    #[test]
    fn floor_oracle_matches_closed_forms() {
        let stream = RngStream::new(21, 0);
        // QoS floor: P(g_p < eps * g_s) = eps / (1 + eps) = 1/2 at eps = 1.
        let qos = asymptotic_floor_oracle(
            DecodingPolicy::QosBased,
            [1.0, 1.0],
            &rayleigh_pair(),
            1_000_000,
            &stream,
        )
        .unwrap();
        assert!(
            (qos.users[0].p_hat - 0.5).abs() < 0.005,
            "qos floor {}",
            qos.users[0].p_hat
        );

        // CSI stage-1 floor: P(g_max / g_min < c) = (c-1)/(c+1) = 1/2 at c = 3.
        let csi = asymptotic_floor_oracle(
            DecodingPolicy::CsiBased,
            [2.0, 2.0],
            &rayleigh_pair(),
            1_000_000,
            &stream,
        )
        .unwrap();
        assert!(
            (csi.first_stage.p_hat - 0.5).abs() < 0.005,
            "csi stage-1 floor {}",
            csi.first_stage.p_hat
        );

        // Hybrid with eps_p * eps_s < 1 has no secondary floor.
        let hybrid = asymptotic_floor_oracle(
            DecodingPolicy::Hybrid,
            [1.0, 0.5],
            &rayleigh_pair(),
            1_000_000,
            &stream,
        )
        .unwrap();
        assert!(
            hybrid.users[1].p_hat < 0.001,
            "hybrid secondary floor {}",
            hybrid.users[1].p_hat
        );
    }

    #[test]
    fn finite_snr_estimate_agrees_with_floor_oracle() {
        let stream = RngStream::new(13, 0);
        let p = db_to_linear(60.0);
        let finite = estimate_outage(
            DecodingPolicy::QosBased,
            [1.0, 1.0],
            [p, p],
            &rayleigh_pair(),
            200_000,
            &stream,
        )
        .unwrap();
        let limit = asymptotic_floor_oracle(
            DecodingPolicy::QosBased,
            [1.0, 1.0],
            &rayleigh_pair(),
            200_000,
            &stream.substream(1),
        )
        .unwrap();
        let gap = (finite.users[0].p_hat - limit.users[0].p_hat).abs();
        assert!(gap < 3.0 * finite.users[0].ci_width(), "gap {gap}");
    }

    fn synthetic_curve(values: &[(f64, u64, u64)]) -> OutageCurve {
        // (snr_db, failures, trials) for a single-user curve; the second
        // user mirrors the first so the report has two users.
        let points = values
            .iter()
            .map(|&(snr_db, fails, trials)| CurvePoint {
                snr_db,
                report: OutageReport {
                    users: vec![
                        OutageEstimate::from_counts(fails, trials),
                        OutageEstimate::from_counts(fails, trials),
                    ],
                    first_stage: OutageEstimate::from_counts(fails, trials),
                },
            })
            .collect();
        OutageCurve::new(DecodingPolicy::QosBased, points).unwrap()
    }

    #[test]
    fn detects_floor_on_constant_curve() {
        let curve = synthetic_curve(&[
            (20.0, 500_000, 1_000_000),
            (30.0, 500_100, 1_000_000),
            (40.0, 499_900, 1_000_000),
        ]);
        match detect_floor(&curve, 0).unwrap() {
            FloorVerdict::Floored(v) => assert!((v - 0.5).abs() < 0.001),
            other => panic!("expected floored, got {other:?}"),
        }
    }

    #[test]
    fn detects_decay_on_decade_curve() {
        let curve = synthetic_curve(&[
            (20.0, 100_000, 1_000_000),
            (30.0, 10_000, 1_000_000),
            (40.0, 1_000, 1_000_000),
        ]);
        assert_eq!(detect_floor(&curve, 0).unwrap(), FloorVerdict::Decaying);
    }

    #[test]
    fn wide_intervals_are_inconclusive() {
        // 30 trials per point: intervals far wider than a tenth of p-hat,
        // and the estimates neither halve per decade nor stay flat.
        let curve = synthetic_curve(&[(20.0, 12, 30), (30.0, 8, 30), (40.0, 5, 30)]);
        assert_eq!(detect_floor(&curve, 0).unwrap(), FloorVerdict::Inconclusive);
    }

    #[test]
    fn floor_detection_needs_span() {
        let curve = synthetic_curve(&[(20.0, 1, 10), (25.0, 1, 10), (30.0, 1, 10)]);
        assert!(matches!(
            detect_floor(&curve, 0),
            Err(OutageError::InsufficientSpan { .. })
        ));
        assert!(matches!(
            detect_floor(&curve, 5),
            Err(OutageError::UserIndex(5))
        ));
    }
}
