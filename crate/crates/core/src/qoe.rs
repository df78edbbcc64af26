//! Logarithmic QoE.
//!
//! The QoE of a scene is `Σ_n k_n · ln(c_n)` where `c_n` is the rendering
//! capacity of object `n` in K units (1 K = 960×480 pixels) and `k_n` is its
//! connection coefficient: attention × downlink rate × (1 − uplink BER).

use alloc::format;

use crate::{Error, Result};

/// Pixels in one K of rendering resolution (960 × 480).
pub const PIXELS_PER_K: u64 = 960 * 480;

/// Per-user link quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Bits per second.
    pub downlink_rate: f64,
    /// Uplink bit-error probability.
    pub uplink_ber: f64,
}

impl LinkParams {
    pub fn new(downlink_rate: f64, uplink_ber: f64) -> Result<Self> {
        if !(downlink_rate > 0.0 && downlink_rate.is_finite()) {
            return Err(Error::Config(format!(
                "downlink rate must be positive, got {downlink_rate}"
            )));
        }
        if !(0.0..1.0).contains(&uplink_ber) {
            return Err(Error::Config(format!(
                "uplink BER must lie in [0, 1), got {uplink_ber}"
            )));
        }
        Ok(Self {
            downlink_rate,
            uplink_ber,
        })
    }

    /// `downlink_rate × (1 − uplink_ber)`, shared by every object of a user.
    pub fn factor(&self) -> f64 {
        self.downlink_rate * (1.0 - self.uplink_ber)
    }
}

pub fn connection_coefficient(attention: f64, link: &LinkParams) -> f64 {
    attention * link.factor()
}

/// QoE of a scene rendered at `capacities` (K units).
///
/// Fails with [`Error::Domain`] if any capacity is ≤ 1 K, and with
/// [`Error::Config`] on length mismatch or non-positive weights.
pub fn qoe(weights: &[f64], capacities: &[f64], link: &LinkParams) -> Result<f64> {
    if weights.is_empty() || weights.len() != capacities.len() {
        return Err(Error::Config(format!(
            "{} weights for {} capacities",
            weights.len(),
            capacities.len()
        )));
    }
    let mut total = 0.0;
    for (&w, &c) in weights.iter().zip(capacities) {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Config(format!("attention weight {w} is not positive")));
        }
        if !(c > 1.0) {
            return Err(Error::Domain(format!(
                "capacity {c} K gives a non-positive log term"
            )));
        }
        total += connection_coefficient(w, link) * libm::log(c);
    }
    Ok(total)
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    libm::pow(10.0, dbw / 10.0)
}

/// Gaussian tail probability `Q(x) = ½·erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// A deliberately simple link model: single-stream SINR with a
/// `min(tx, rx)` antenna gain and power-law path loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub distance_m: f64,
    pub path_loss_exponent: f64,
    /// Total co-channel interference power.
    pub interference_w: f64,
    /// Noise power spectral density.
    pub noise_psd_w_per_hz: f64,
    pub tx_antennas: u32,
    pub rx_antennas: u32,
    /// SINR used for the uplink BER; `None` reuses the downlink SINR.
    pub uplink_sinr: Option<f64>,
}

impl ChannelConfig {
    /// Reference scenario: 6 transmit and 7 receive antennas, 10 m link with
    /// path-loss exponent 2, three interference paths totalling 1 dBW, 10 W
    /// transmit power over 1 MHz with −174 dBm/Hz thermal noise.
    pub fn reference() -> Self {
        Self {
            bandwidth_hz: 1.0e6,
            tx_power_w: 10.0,
            distance_m: 10.0,
            path_loss_exponent: 2.0,
            interference_w: dbw_to_watts(1.0),
            noise_psd_w_per_hz: dbw_to_watts(-204.0),
            tx_antennas: 6,
            rx_antennas: 7,
            uplink_sinr: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_power_w", self.tx_power_w),
            ("distance_m", self.distance_m),
            ("interference_w", self.interference_w),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.path_loss_exponent >= 1.0 && self.path_loss_exponent.is_finite()) {
            return Err(Error::Config("path_loss_exponent must be >= 1".into()));
        }
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::Config("antenna counts must be >= 1".into()));
        }
        if let Some(s) = self.uplink_sinr {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Config("uplink_sinr must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Received power before the antenna gain, as a fraction of transmit
    /// power: `d^(−α)`.
    pub fn path_gain(&self) -> f64 {
        libm::pow(self.distance_m, -self.path_loss_exponent)
    }

    pub fn sinr(&self) -> f64 {
        let gain = f64::from(self.tx_antennas.min(self.rx_antennas));
        let signal = self.tx_power_w * self.path_gain() * gain;
        signal / (self.interference_w + self.noise_psd_w_per_hz * self.bandwidth_hz)
    }
}

/// Downlink rate `B·log2(1 + SINR)` and uplink BER `Q(√(2·SINR_up))`.
pub fn link_from_channel(cfg: &ChannelConfig) -> Result<LinkParams> {
    cfg.validate()?;
    let sinr = cfg.sinr();
    let rate = cfg.bandwidth_hz * libm::log2(1.0 + sinr);
    let ber = q_function(libm::sqrt(2.0 * cfg.uplink_sinr.unwrap_or(sinr)));
    LinkParams::new(rate, ber)
}
