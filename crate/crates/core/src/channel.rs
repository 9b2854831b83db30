//! Link error models and reproducible packet outcome draws.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// How a relay-to-mobile link produces packet errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkModel {
    /// Directly configured packet error rate in `[0, 1]`.
    FixedPer { per: f64 },
    /// 16-QAM over an AWGN channel. Convolutional coding is folded in as a
    /// configurable SNR offset instead of simulating encode/decode.
    AwgnQam16 {
        snr_db: f64,
        packet_bits: u32,
        coding_gain_db: f64,
    },
}

/// Outcome of one packet transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PacketOutcome {
    Delivered,
    Errored,
}

/// Gaussian tail function `Q(x) = P(N(0,1) > x)`.
fn q_func(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Symbol error probability of square 16-QAM at a linear per-symbol SNR,
/// using the standard approximation `3 Q(sqrt(snr/5)) (1 - (3/4) Q(sqrt(snr/5)))`.
pub fn qam16_symbol_error(snr_linear: f64) -> f64 {
    debug_assert!(snr_linear >= 0.0);
    let q = q_func((snr_linear / 5.0).sqrt());
    (3.0 * q * (1.0 - 0.75 * q)).clamp(0.0, 1.0)
}

/// Packet error rate of a `bits`-bit packet under independent bit errors:
/// `1 - (1 - ber)^bits`, evaluated through `ln_1p`/`exp_m1` so small `ber`
/// does not cancel.
pub fn per_from_ber(ber: f64, bits: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&ber));
    // ber = 1 gives ln_1p(-1) = -inf and exp_m1(-inf) = -1, i.e. per = 1.
    -f64::exp_m1(f64::from(bits) * f64::ln_1p(-ber))
}

/// Operating PER of a link model.
///
/// `FixedPer` passes through; `AwgnQam16` maps SNR (plus coding gain) to a
/// symbol error rate, approximates the Gray-mapped bit error rate as SER/4
/// (4 bits per symbol), and folds the packet length in.
pub fn effective_per(model: &LinkModel) -> f64 {
    match *model {
        LinkModel::FixedPer { per } => per,
        LinkModel::AwgnQam16 {
            snr_db,
            packet_bits,
            coding_gain_db,
        } => {
            let snr_linear = 10f64.powf((snr_db + coding_gain_db) / 10.0);
            let ber = qam16_symbol_error(snr_linear) / 4.0;
            per_from_ber(ber, packet_bits)
        }
    }
}

/// Bernoulli packet outcome. Consumes exactly one generator draw so that a
/// transmission schedule maps to a fixed position in the random stream.
pub fn draw_outcome<R: Rng + ?Sized>(per: f64, rng: &mut R) -> PacketOutcome {
    debug_assert!((0.0..=1.0).contains(&per));
    if rng.random::<f64>() < per {
        PacketOutcome::Errored
    } else {
        PacketOutcome::Delivered
    }
}
