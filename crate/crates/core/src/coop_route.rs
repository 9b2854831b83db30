//! Rate tables over direct and two-hop relay routes, and selection of the
//! minimum-transmission-time route.
//!
//! Transmission time is pure air time (payload bits over rate, no preambles,
//! ACKs or contention); a two-hop route decodes and forwards whole packets,
//! so its time is the sum of the two hop times.

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error("{0} Mbit/s is not an 802.11b rate (expected 1, 2, 5.5 or 11)")]
    InvalidRate(f64),
    #[error("rate distribution must not be empty")]
    EmptyDistribution,
    #[error("duplicate relay id {0} in route table")]
    DuplicateRelayId(u32),
}

/// A data rate from the 802.11b set: 1, 2, 5.5 or 11 Mbit/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMbps {
    R1,
    R2,
    R5_5,
    R11,
}

impl RateMbps {
    pub const ALL: [RateMbps; 4] = [RateMbps::R1, RateMbps::R2, RateMbps::R5_5, RateMbps::R11];

    pub fn mbps(self) -> f64 {
        match self {
            RateMbps::R1 => 1.0,
            RateMbps::R2 => 2.0,
            RateMbps::R5_5 => 5.5,
            RateMbps::R11 => 11.0,
        }
    }

    pub fn bits_per_s(self) -> f64 {
        self.mbps() * 1e6
    }
}

impl TryFrom<f64> for RateMbps {
    type Error = RouteError;

    fn try_from(value: f64) -> Result<Self, RouteError> {
        RateMbps::ALL
            .into_iter()
            .find(|r| r.mbps() == value)
            .ok_or(RouteError::InvalidRate(value))
    }
}

impl Serialize for RateMbps {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.mbps())
    }
}

impl<'de> Deserialize<'de> for RateMbps {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        RateMbps::try_from(value).map_err(D::Error::custom)
    }
}

/// Default source-destination rate distribution: the whole 802.11b set.
pub fn default_sd_rates() -> Vec<RateMbps> {
    RateMbps::ALL.to_vec()
}

/// Default relay-hop rate distribution: the 802.11b rates between 5 and
/// 11 Mbit/s, i.e. {5.5, 11}.
pub fn default_relay_rates() -> Vec<RateMbps> {
    vec![RateMbps::R5_5, RateMbps::R11]
}

/// Two-hop route through one relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayRoute {
    pub relay_id: u32,
    pub sr_rate: RateMbps,
    pub rd_rate: RateMbps,
}

/// Per-source table of candidate routes to one destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoopTable {
    pub direct_rate: RateMbps,
    pub relays: Vec<RelayRoute>,
}

impl CoopTable {
    /// Build a table, rejecting duplicate relay ids.
    pub fn new(direct_rate: RateMbps, relays: Vec<RelayRoute>) -> Result<Self, RouteError> {
        let mut seen = std::collections::HashSet::new();
        for relay in &relays {
            if !seen.insert(relay.relay_id) {
                return Err(RouteError::DuplicateRelayId(relay.relay_id));
            }
        }
        Ok(CoopTable {
            direct_rate,
            relays,
        })
    }
}

/// Route selected for a transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Direct,
    ViaRelay { relay_id: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteChoice {
    pub route: Route,
    pub total_time_s: f64,
}

/// Air time of one `bits`-bit packet at the given rate.
pub fn tx_time(bits: u64, rate: RateMbps) -> f64 {
    debug_assert!(bits >= 1);
    bits as f64 / rate.bits_per_s()
}

/// Transmission time over a two-hop route: store-and-forward, no pipelining.
pub fn two_hop_time(route: &RelayRoute, bits: u64) -> f64 {
    tx_time(bits, route.sr_rate) + tx_time(bits, route.rd_rate)
}

/// Pick the minimum-time route. Ties prefer Direct, then the lowest relay id.
pub fn select_route(table: &CoopTable, bits: u64) -> RouteChoice {
    let mut best = RouteChoice {
        route: Route::Direct,
        total_time_s: tx_time(bits, table.direct_rate),
    };
    for relay in &table.relays {
        let time = two_hop_time(relay, bits);
        let beats = time < best.total_time_s
            || (time == best.total_time_s
                && match best.route {
                    Route::Direct => false,
                    Route::ViaRelay { relay_id } => relay.relay_id < relay_id,
                });
        if beats {
            best = RouteChoice {
                route: Route::ViaRelay {
                    relay_id: relay.relay_id,
                },
                total_time_s: time,
            };
        }
    }
    best
}

/// Draw a route table from the given rate distributions. The draw order is
/// fixed: direct rate first, then each relay's sr and rd rate in turn.
pub fn sample_table<R: Rng + ?Sized>(
    n_relays: u32,
    rng: &mut R,
    sd_rates: &[RateMbps],
    sr_rates: &[RateMbps],
    rd_rates: &[RateMbps],
) -> Result<CoopTable, RouteError> {
    if sd_rates.is_empty() || sr_rates.is_empty() || rd_rates.is_empty() {
        return Err(RouteError::EmptyDistribution);
    }
    fn pick<R: Rng + ?Sized>(rng: &mut R, set: &[RateMbps]) -> RateMbps {
        set[rng.random_range(0..set.len())]
    }
    let direct_rate = pick(rng, sd_rates);
    let relays = (0..n_relays)
        .map(|relay_id| {
            let sr_rate = pick(rng, sr_rates);
            let rd_rate = pick(rng, rd_rates);
            RelayRoute {
                relay_id,
                sr_rate,
                rd_rate,
            }
        })
        .collect();
    Ok(CoopTable {
        direct_rate,
        relays,
    })
}
