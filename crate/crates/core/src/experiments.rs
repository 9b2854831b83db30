//! Sweep harnesses for the two headline studies, with deterministic CSV
//! output.
//!
//! The relay sweep measures best-route throughput as a function of the
//! number of relays, by Monte Carlo over sampled rate tables, and attaches
//! an exhaustive-enumeration oracle wherever the joint outcome space stays
//! under [`ENUMERATION_GUARD`].
//!
//! The ratio sweep runs the packet engine twice per grid point of
//! `a = target_per_2 / target_per_1` (adaptive and uniform allocation, same
//! seed and link conditions) and emits one row per (coordinate, scheme).
//!
//! Sweep points are independent and run in parallel; every point derives
//! its own child seed from the spec seed, so results do not depend on the
//! number of worker threads.

use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::{
    closed_form_split, expected_errors, uniform_split, MobileProfile, MobileSlot, TrafficClass,
};
use crate::channel::{effective_per, LinkModel};
use crate::coop_route::{
    default_relay_rates, default_sd_rates, sample_table, select_route, tx_time, RateMbps,
    RouteError,
};
use crate::engine::{
    self, default_estimator_window, default_initial_per_estimate,
    default_packet_bits as engine_default_packet_bits, default_per_floor, default_seed,
    AllocatorKind, ConfigError, RetransmissionMode, SimConfig, SimResult,
};

/// Hard cap on the joint outcome count of the enumeration oracle.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("enumeration would visit more than {limit} outcomes")]
    ComplexityGuard { limit: u128 },
    #[error("relay_counts must be non-empty, sorted ascending and distinct")]
    BadRelayCounts,
    #[error("samples_per_point must be >= 1")]
    ZeroSamples,
    #[error("ratio a must be positive and finite, got {0}")]
    BadRatio(f64),
    #[error("link PER must lie in [0, 1], got {0}")]
    BadLinkPer(f64),
    #[error("target_per_anchor must lie in (0, 1] and a * anchor must stay <= 1 (a = {a})")]
    BadTargetAnchor { a: f64 },
    #[error("a_values must not be empty")]
    EmptyRatioGrid,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("no rows to write")]
    EmptyRows,
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Spec of the throughput-vs-relay-count study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaySweepSpec {
    #[serde(default = "default_relay_counts")]
    pub relay_counts: Vec<u32>,
    #[serde(default = "default_samples_per_point")]
    pub samples_per_point: u64,
    #[serde(default = "default_packet_bits")]
    pub packet_bits: u32,
    #[serde(default = "default_sd_rates")]
    pub sd_rates: Vec<RateMbps>,
    #[serde(default = "default_relay_rates")]
    pub sr_rates: Vec<RateMbps>,
    #[serde(default = "default_relay_rates")]
    pub rd_rates: Vec<RateMbps>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for RelaySweepSpec {
    fn default() -> Self {
        RelaySweepSpec {
            relay_counts: default_relay_counts(),
            samples_per_point: default_samples_per_point(),
            packet_bits: default_packet_bits(),
            sd_rates: default_sd_rates(),
            sr_rates: default_relay_rates(),
            rd_rates: default_relay_rates(),
            seed: default_seed(),
        }
    }
}

fn default_relay_counts() -> Vec<u32> {
    (0..=8).collect()
}
fn default_samples_per_point() -> u64 {
    100_000
}
fn default_packet_bits() -> u32 {
    engine_default_packet_bits()
}

/// Spec of the adaptive-vs-uniform study over the target ratio `a`.
///
/// Both link PERs default to equal 5.5e-4 so the allocator's response to
/// `a` is isolated from link asymmetry. Mobile 1's target PER is anchored;
/// each grid value of `a` then fixes mobile 2's target to `a * anchor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSweepSpec {
    #[serde(default = "default_a_values")]
    pub a_values: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_link_per")]
    pub link_per: [f64; 2],
    #[serde(default = "default_target_anchor")]
    pub target_per_anchor: f64,
    pub duration_bursts: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_packet_bits")]
    pub packet_bits: u32,
    #[serde(default = "default_rd_rate")]
    pub rd_rate: [RateMbps; 2],
    #[serde(default = "default_estimator_window")]
    pub estimator_window_bursts: u32,
    #[serde(default = "default_per_floor")]
    pub per_floor: f64,
    #[serde(default = "default_initial_per_estimate")]
    pub initial_per_estimate: f64,
    #[serde(default)]
    pub retransmission: RetransmissionMode,
}

fn default_a_values() -> Vec<f64> {
    log_spaced(21, 0.25, 4.0)
}
fn default_k() -> u32 {
    10
}
fn default_link_per() -> [f64; 2] {
    [5.5e-4, 5.5e-4]
}
fn default_target_anchor() -> f64 {
    5e-4
}
fn default_rd_rate() -> [RateMbps; 2] {
    [RateMbps::R11, RateMbps::R11]
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(n >= 1 && lo > 0.0 && hi >= lo);
    if n == 1 {
        return vec![lo];
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Which sweep a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Relays,
    Ratio,
    Run,
}

impl std::fmt::Display for SweepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepKind::Relays => write!(f, "relays"),
            SweepKind::Ratio => write!(f, "ratio"),
            SweepKind::Run => write!(f, "run"),
        }
    }
}

/// One output row. Fields that do not apply to a sweep are `None` and
/// serialize as empty CSV fields (the relay sweep fills only the Monte
/// Carlo throughput in `goodput1_bps` and the enumeration oracle).
///
/// For engine rows, `n1`/`n2` hold the scheme's planned continuous split
/// evaluated at the configured link PERs (the uniform plan is its integer
/// counts); measured quantities come from the simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub sweep: SweepKind,
    pub coordinate: f64,
    pub scheme: AllocatorKind,
    pub n1: Option<f64>,
    pub n2: Option<f64>,
    pub goodput1_bps: Option<f64>,
    pub goodput2_bps: Option<f64>,
    pub per1_measured: Option<f64>,
    pub per2_measured: Option<f64>,
    pub delay1_s: Option<f64>,
    pub delay2_s: Option<f64>,
    pub expected_errors: Option<f64>,
    /// Fraction of bursts whose plan violated at least one target margin
    /// at the estimates used.
    pub violations: Option<f64>,
    pub oracle_value: Option<f64>,
}

pub const CSV_HEADER: &str = "sweep,coordinate,scheme,n1,n2,goodput1_bps,goodput2_bps,\
per1_measured,per2_measured,delay1_s,delay2_s,expected_errors,violations,oracle_value";

fn format_number(value: f64) -> String {
    // 9 significant digits, deterministic byte output.
    format!("{value:.8e}")
}

fn format_field(value: Option<f64>) -> String {
    value.map(format_number).unwrap_or_default()
}

/// Serialize rows in the documented column order: UTF-8, LF line endings,
/// numbers with 9 significant digits. Refuses an empty row set.
pub fn render_csv(rows: &[MetricsRow]) -> Result<String, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::EmptyRows);
    }
    let mut out = String::with_capacity(rows.len() * 160 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            row.sweep.to_string(),
            format_number(row.coordinate),
            row.scheme.to_string(),
            format_field(row.n1),
            format_field(row.n2),
            format_field(row.goodput1_bps),
            format_field(row.goodput2_bps),
            format_field(row.per1_measured),
            format_field(row.per2_measured),
            format_field(row.delay1_s),
            format_field(row.delay2_s),
            format_field(row.expected_errors),
            format_field(row.violations),
            format_field(row.oracle_value),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Render and write rows to `path`; IO failures carry the path.
pub fn write_csv(rows: &[MetricsRow], path: &Path) -> Result<(), ExperimentError> {
    let body = render_csv(rows)?;
    fs::write(path, body).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Exact expected best-route throughput (bits/s) by exhaustive enumeration
/// of every joint rate assignment, all equiprobable.
pub fn expected_throughput_oracle(
    n_relays: u32,
    packet_bits: u32,
    sd_rates: &[RateMbps],
    sr_rates: &[RateMbps],
    rd_rates: &[RateMbps],
) -> Result<f64, ExperimentError> {
    if sd_rates.is_empty() || sr_rates.is_empty() || rd_rates.is_empty() {
        return Err(RouteError::EmptyDistribution.into());
    }
    let pair_count = (sr_rates.len() * rd_rates.len()) as u128;
    let mut outcomes = sd_rates.len() as u128;
    for _ in 0..n_relays {
        outcomes = outcomes.saturating_mul(pair_count);
        if outcomes > ENUMERATION_GUARD {
            return Err(ExperimentError::ComplexityGuard {
                limit: ENUMERATION_GUARD,
            });
        }
    }

    let bits = u64::from(packet_bits);
    let pair_times: Vec<f64> = sr_rates
        .iter()
        .flat_map(|&sr| {
            rd_rates
                .iter()
                .map(move |&rd| tx_time(bits, sr) + tx_time(bits, rd))
        })
        .collect();
    let direct_times: Vec<f64> = sd_rates.iter().map(|&r| tx_time(bits, r)).collect();

    // The guard above caps pair_count^n_relays at 1e7, so u64 cannot overflow.
    let combos = (pair_count as u64).pow(n_relays);
    let mut sum = 0.0f64;
    for combo in 0..combos {
        // Decode the relay assignment in mixed radix and take the fastest
        // two-hop time in it.
        let mut best_relay = f64::INFINITY;
        let mut rest = combo;
        for _ in 0..n_relays {
            let digit = (rest % pair_count as u64) as usize;
            rest /= pair_count as u64;
            if pair_times[digit] < best_relay {
                best_relay = pair_times[digit];
            }
        }
        for &direct in &direct_times {
            let best = direct.min(best_relay);
            sum += bits as f64 / best;
        }
    }
    Ok(sum / (combos as f64 * direct_times.len() as f64))
}

/// Monte Carlo mean best-route throughput plus the enumeration oracle for
/// each relay count. A `ComplexityGuard` on the oracle leaves the oracle
/// field empty instead of failing the sweep.
pub fn run_relay_sweep(spec: &RelaySweepSpec) -> Result<Vec<MetricsRow>, ExperimentError> {
    if spec.relay_counts.is_empty() || spec.relay_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::BadRelayCounts);
    }
    if spec.samples_per_point == 0 {
        return Err(ExperimentError::ZeroSamples);
    }
    if spec.sd_rates.is_empty() || spec.sr_rates.is_empty() || spec.rd_rates.is_empty() {
        return Err(RouteError::EmptyDistribution.into());
    }

    let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed);
    let points: Vec<(u32, u64)> = spec
        .relay_counts
        .iter()
        .map(|&n| (n, seeder.next_u64()))
        .collect();

    points
        .into_par_iter()
        .map(|(n_relays, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bits = u64::from(spec.packet_bits);
            let mut sum = 0.0f64;
            for _ in 0..spec.samples_per_point {
                let table = sample_table(
                    n_relays,
                    &mut rng,
                    &spec.sd_rates,
                    &spec.sr_rates,
                    &spec.rd_rates,
                )?;
                let choice = select_route(&table, bits);
                sum += bits as f64 / choice.total_time_s;
            }
            let monte_carlo = sum / spec.samples_per_point as f64;
            let oracle = match expected_throughput_oracle(
                n_relays,
                spec.packet_bits,
                &spec.sd_rates,
                &spec.sr_rates,
                &spec.rd_rates,
            ) {
                Ok(value) => Some(value),
                Err(ExperimentError::ComplexityGuard { .. }) => None,
                Err(other) => return Err(other),
            };
            Ok(MetricsRow {
                sweep: SweepKind::Relays,
                coordinate: f64::from(n_relays),
                scheme: AllocatorKind::Adaptive,
                n1: None,
                n2: None,
                goodput1_bps: Some(monte_carlo),
                goodput2_bps: None,
                per1_measured: None,
                per2_measured: None,
                delay1_s: None,
                delay2_s: None,
                expected_errors: None,
                violations: None,
                oracle_value: oracle,
            })
        })
        .collect()
}

/// Engine configuration for one grid point of the ratio sweep.
///
/// The mobile with the larger target PER carries real-time traffic and
/// transmits first; at `a == 1` both slots are real-time and slot 1 keeps
/// priority.
pub fn ratio_point_config(
    spec: &RatioSweepSpec,
    a: f64,
    allocator: AllocatorKind,
    seed: u64,
) -> Result<SimConfig, ExperimentError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(ExperimentError::BadRatio(a));
    }
    for per in spec.link_per {
        if !(0.0..=1.0).contains(&per) {
            return Err(ExperimentError::BadLinkPer(per));
        }
    }
    let target1 = spec.target_per_anchor;
    let target2 = a * target1;
    if !(target1 > 0.0 && target1 <= 1.0 && target2 <= 1.0) {
        return Err(ExperimentError::BadTargetAnchor { a });
    }
    let (class1, class2, priority1, priority2) = if target2 > target1 {
        (TrafficClass::NonRealTime, TrafficClass::RealTime, 1, 0)
    } else if target2 < target1 {
        (TrafficClass::RealTime, TrafficClass::NonRealTime, 0, 1)
    } else {
        (TrafficClass::RealTime, TrafficClass::RealTime, 0, 1)
    };
    Ok(SimConfig {
        burst_len_k: spec.k,
        profiles: [
            MobileProfile {
                id: 1,
                class: class1,
                target_per: target1,
                priority: priority1,
            },
            MobileProfile {
                id: 2,
                class: class2,
                target_per: target2,
                priority: priority2,
            },
        ],
        link_models: [
            LinkModel::FixedPer {
                per: spec.link_per[0],
            },
            LinkModel::FixedPer {
                per: spec.link_per[1],
            },
        ],
        rd_rate: spec.rd_rate,
        packet_bits: spec.packet_bits,
        allocator,
        retransmission: spec.retransmission,
        estimator_window_bursts: spec.estimator_window_bursts,
        per_floor: spec.per_floor,
        initial_per_estimate: spec.initial_per_estimate,
        duration_bursts: spec.duration_bursts,
        seed,
    })
}

/// The scheme's planned continuous split at the true link PERs: the closed
/// form for the adaptive scheme (uniform fallback when both PERs are zero),
/// the integer counts for the uniform scheme.
fn planned_split(config: &SimConfig, scheme: AllocatorKind) -> (f64, f64) {
    let per1 = effective_per(&config.link_models[0]);
    let per2 = effective_per(&config.link_models[1]);
    let winner = if config.profiles[0].priority < config.profiles[1].priority {
        MobileSlot::Mobile1
    } else {
        MobileSlot::Mobile2
    };
    let a = config.profiles[1].target_per / config.profiles[0].target_per;
    match scheme {
        AllocatorKind::Adaptive => match closed_form_split(per1, per2, a, config.burst_len_k) {
            Ok(split) => split,
            Err(_) => {
                let counts = uniform_split(config.burst_len_k, winner);
                (f64::from(counts.n1), f64::from(counts.n2))
            }
        },
        AllocatorKind::Uniform => {
            let counts = uniform_split(config.burst_len_k, winner);
            (f64::from(counts.n1), f64::from(counts.n2))
        }
    }
}

/// Build the output row for one finished engine run.
pub fn metrics_row_from_run(
    sweep: SweepKind,
    coordinate: f64,
    config: &SimConfig,
    result: &SimResult,
) -> MetricsRow {
    let per1 = effective_per(&config.link_models[0]);
    let per2 = effective_per(&config.link_models[1]);
    let (n1, n2) = planned_split(config, config.allocator);
    let violating = result
        .burst_trace
        .iter()
        .filter(|row| row.margin1 <= 0.0 || row.margin2 <= 0.0)
        .count();
    let violations = if result.burst_trace.is_empty() {
        0.0
    } else {
        violating as f64 / result.burst_trace.len() as f64
    };
    MetricsRow {
        sweep,
        coordinate,
        scheme: config.allocator,
        n1: Some(n1),
        n2: Some(n2),
        goodput1_bps: Some(result.mobiles[0].goodput_bits_per_s),
        goodput2_bps: Some(result.mobiles[1].goodput_bits_per_s),
        per1_measured: Some(result.mobiles[0].measured_per),
        per2_measured: Some(result.mobiles[1].measured_per),
        delay1_s: Some(result.mobiles[0].mean_delay_s),
        delay2_s: Some(result.mobiles[1].mean_delay_s),
        expected_errors: Some(expected_errors(n1, n2, per1, per2)),
        violations: Some(violations),
        oracle_value: None,
    }
}

/// Run the engine twice (adaptive, uniform) per grid value of `a` with a
/// shared per-point seed, and emit the paired rows.
pub fn run_ratio_sweep(spec: &RatioSweepSpec) -> Result<Vec<MetricsRow>, ExperimentError> {
    if spec.a_values.is_empty() {
        return Err(ExperimentError::EmptyRatioGrid);
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed);
    let points: Vec<(f64, u64)> = spec
        .a_values
        .iter()
        .map(|&a| (a, seeder.next_u64()))
        .collect();

    let nested: Vec<[MetricsRow; 2]> = points
        .into_par_iter()
        .map(|(a, seed)| {
            let mut rows = Vec::with_capacity(2);
            for scheme in [AllocatorKind::Adaptive, AllocatorKind::Uniform] {
                let config = ratio_point_config(spec, a, scheme, seed)?;
                let result = engine::run(&config)?;
                rows.push(metrics_row_from_run(SweepKind::Ratio, a, &config, &result));
            }
            let uniform = rows.pop().expect("two rows");
            let adaptive = rows.pop().expect("two rows");
            Ok([adaptive, uniform])
        })
        .collect::<Result<_, ExperimentError>>()?;

    Ok(nested.into_iter().flatten().collect())
}
