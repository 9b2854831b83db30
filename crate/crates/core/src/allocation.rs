//! Burst-sharing allocation between two mobiles.
//!
//! A burst of `k` packets is split into `n1 + n2 = k` from the current link
//! PER estimates and the target ratio `a = target_per_2 / target_per_1`:
//!
//! ```text
//! n1 = k *     per2 / (a * per1 + per2)
//! n2 = k * a * per1 / (a * per1 + per2)
//! ```
//!
//! The continuous split is integerized by rounding half toward the priority
//! mobile. [`brute_force_optimum`] solves the underlying integer program
//! (`max n1 + n2` subject to `n1 * per1 < t1`, `n2 * per2 < t2`,
//! `n1 + n2 <= k`) by exhaustive enumeration and serves as an independent
//! oracle: the closed form is compared against it but never replaced by it.
//!
//! The closed-form plan is used even when it violates the individual
//! constraints; [`constraint_report`] exposes the margins as metrics only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AllocationError {
    /// `a * per1 + per2 == 0`. Both links look perfect; the caller should
    /// fall back to [`uniform_split`].
    #[error("degenerate denominator: a*per1 + per2 == 0")]
    DegenerateDenominator,
}

/// Traffic type of a mobile's current data. In a scenario mixing both
/// classes, every real-time target PER must strictly exceed every
/// non-real-time target PER (real-time traffic trades reliability for
/// bandwidth and delay).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficClass {
    RealTime,
    NonRealTime,
}

/// One destination mobile as seen by the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobileProfile {
    pub id: u32,
    pub class: TrafficClass,
    /// Target PER for the current data type, in `(0, 1]`.
    pub target_per: f64,
    /// Transmission rank within a burst; the lower value goes first.
    /// Priorities must be distinct within a scenario.
    pub priority: i32,
}

/// Which of the two mobile slots a value refers to. Slot 1 carries `per1`,
/// `target_per_1` and `n1`; slot 2 the corresponding `*2` quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobileSlot {
    Mobile1,
    Mobile2,
}

/// A link PER estimate as fed to the allocator: floored away from zero so a
/// momentarily spotless link cannot starve the other mobile or zero the
/// closed-form denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEstimate {
    pub per: f64,
}

impl LinkEstimate {
    pub fn floored(raw: f64, floor: f64) -> Self {
        Self { per: raw.max(floor) }
    }
}

/// Ratio of the two target PERs, `a = target_per_2 / target_per_1`.
/// Always recomputed from the profiles, never stored independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRatio {
    a: f64,
}

impl TargetRatio {
    pub fn from_profiles(mobile1: &MobileProfile, mobile2: &MobileProfile) -> Self {
        Self::from_targets(mobile1.target_per, mobile2.target_per)
    }

    pub fn from_targets(target_per_1: f64, target_per_2: f64) -> Self {
        Self {
            a: target_per_2 / target_per_1,
        }
    }

    pub fn value(&self) -> f64 {
        self.a
    }
}

/// Integer packet counts of one burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub n1: u32,
    pub n2: u32,
}

impl SplitCounts {
    pub fn total(&self) -> u32 {
        self.n1 + self.n2
    }
}

/// The continuous closed-form split of a `k`-packet burst.
///
/// Returns `(n1_real, n2_real)` with `n1_real + n2_real = k` up to
/// floating-point rounding. Errors when `a * per1 + per2 == 0`, in which
/// case the caller applies the uniform fallback.
pub fn closed_form_split(
    per1: f64,
    per2: f64,
    a: f64,
    k: u32,
) -> Result<(f64, f64), AllocationError> {
    debug_assert!(per1 >= 0.0 && per2 >= 0.0 && a > 0.0 && k >= 1);
    let denom = a * per1 + per2;
    if denom == 0.0 {
        return Err(AllocationError::DegenerateDenominator);
    }
    let kf = f64::from(k);
    Ok((kf * per2 / denom, kf * a * per1 / denom))
}

/// Round the continuous `n1` to integer counts. Halves go toward the
/// priority mobile; the total is preserved exactly (`n2 = k - n1`).
pub fn integerize(n1_real: f64, k: u32, priority_winner: MobileSlot) -> SplitCounts {
    debug_assert!((0.0..=f64::from(k)).contains(&n1_real));
    let rounded = match priority_winner {
        MobileSlot::Mobile1 => (n1_real + 0.5).floor(),
        MobileSlot::Mobile2 => (n1_real - 0.5).ceil(),
    };
    let n1 = (rounded.max(0.0) as u32).min(k);
    SplitCounts { n1, n2: k - n1 }
}

/// The non-adaptive baseline: `ceil(k/2)` packets to the priority mobile,
/// `floor(k/2)` to the other.
pub fn uniform_split(k: u32, priority_winner: MobileSlot) -> SplitCounts {
    let larger = k.div_ceil(2);
    let smaller = k / 2;
    match priority_winner {
        MobileSlot::Mobile1 => SplitCounts {
            n1: larger,
            n2: smaller,
        },
        MobileSlot::Mobile2 => SplitCounts {
            n1: smaller,
            n2: larger,
        },
    }
}

/// Result of the exhaustive integer optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceOptimum {
    pub n1: u32,
    pub n2: u32,
    pub objective: u32,
    /// False only if even `(0, 0)` violates a constraint, which cannot
    /// happen for strictly positive targets. Kept for interface symmetry.
    pub feasible: bool,
}

/// Enumerate every pair `(n1, n2)` with `n1 + n2 <= k`, `n1 * per1 < t1`
/// and `n2 * per2 < t2`, and return a maximizer of `n1 + n2`.
///
/// Ties are broken by the larger worst-case margin
/// `min(t1 - n1*per1, t2 - n2*per2)`, then by the larger `n1`.
pub fn brute_force_optimum(per1: f64, per2: f64, t1: f64, t2: f64, k: u32) -> BruteForceOptimum {
    let mut best: Option<(u32, f64, u32, u32)> = None;
    for n1 in 0..=k {
        if f64::from(n1) * per1 >= t1 {
            continue;
        }
        for n2 in 0..=(k - n1) {
            if f64::from(n2) * per2 >= t2 {
                continue;
            }
            let margin1 = t1 - f64::from(n1) * per1;
            let margin2 = t2 - f64::from(n2) * per2;
            let candidate = (n1 + n2, margin1.min(margin2), n1, n2);
            let beats = match best {
                None => true,
                Some((obj, margin, bn1, _)) => {
                    candidate.0 > obj
                        || (candidate.0 == obj && candidate.1 > margin)
                        || (candidate.0 == obj && candidate.1 == margin && candidate.2 > bn1)
                }
            };
            if beats {
                best = Some(candidate);
            }
        }
    }
    match best {
        Some((objective, _, n1, n2)) => BruteForceOptimum {
            n1,
            n2,
            objective,
            feasible: true,
        },
        None => BruteForceOptimum {
            n1: 0,
            n2: 0,
            objective: 0,
            feasible: false,
        },
    }
}

/// Expected number of errored packets in one burst for the given (possibly
/// fractional) counts: `n1*per1 + n2*per2`.
pub fn expected_errors(n1: f64, n2: f64, per1: f64, per2: f64) -> f64 {
    n1 * per1 + n2 * per2
}

/// Per-mobile slack of the constraint system for a concrete plan. Used for
/// metrics only; a plan is never rejected for violating a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub margin1: f64,
    pub margin2: f64,
    pub satisfied1: bool,
    pub satisfied2: bool,
}

pub fn constraint_report(
    counts: SplitCounts,
    per1: f64,
    per2: f64,
    t1: f64,
    t2: f64,
) -> ConstraintReport {
    let load1 = f64::from(counts.n1) * per1;
    let load2 = f64::from(counts.n2) * per2;
    ConstraintReport {
        margin1: t1 - load1,
        margin2: t2 - load2,
        satisfied1: load1 < t1,
        satisfied2: load2 < t2,
    }
}

/// Number of packets of a concrete plan that fit under the per-mobile
/// constraints, with each share truncated to its feasible maximum. This is
/// the quantity the brute-force objective dominates.
pub fn constraint_satisfying_packets(
    counts: SplitCounts,
    per1: f64,
    per2: f64,
    t1: f64,
    t2: f64,
) -> u32 {
    fn truncate(n: u32, per: f64, t: f64) -> u32 {
        (0..=n).rev().find(|&m| f64::from(m) * per < t).unwrap_or(0)
    }
    truncate(counts.n1, per1, t1) + truncate(counts.n2, per2, t2)
}

/// A fully ordered burst: counts plus the mobile-id sequence transmitted,
/// the priority mobile's block first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BurstPlan {
    pub k: u32,
    pub counts: SplitCounts,
    pub order: Vec<u32>,
}

impl BurstPlan {
    pub fn new(counts: SplitCounts, id1: u32, id2: u32, priority_winner: MobileSlot) -> Self {
        let k = counts.total();
        let mut order = Vec::with_capacity(k as usize);
        let blocks = match priority_winner {
            MobileSlot::Mobile1 => [(id1, counts.n1), (id2, counts.n2)],
            MobileSlot::Mobile2 => [(id2, counts.n2), (id1, counts.n1)],
        };
        for (id, n) in blocks {
            order.extend(std::iter::repeat(id).take(n as usize));
        }
        BurstPlan { k, counts, order }
    }
}
