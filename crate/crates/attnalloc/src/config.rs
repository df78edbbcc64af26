//! TOML configuration. Every key is optional; missing keys take the
//! defaults printed by `attnalloc --print-config`.

use crate::{Error, Result};
use attnalloc_core::experiment::{ExperimentConfig, LinkSource, SweepRange};
use attnalloc_core::predict::FitConfig;
use attnalloc_core::qoe::{dbw_to_watts, ChannelConfig, LinkParams};
use attnalloc_core::world::WorldConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub world: WorldSection,
    pub fit: FitSection,
    pub link: LinkSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSection {
    pub num_users: usize,
    pub num_objects: usize,
    pub num_images: usize,
    pub num_groups: usize,
    pub latent_rank: usize,
    pub interest_noise: f64,
    pub interest_gain: f64,
    pub interest_offset: f64,
    pub group_bias: f64,
    pub popularity_exponent: f64,
    pub min_objects_per_image: usize,
    pub max_objects_per_image: usize,
    pub image_height: u32,
    pub image_width: u32,
    pub gaze_noise: f64,
}

impl Default for WorldSection {
    fn default() -> Self {
        let w = WorldConfig::default();
        Self {
            num_users: w.num_users,
            num_objects: w.num_objects,
            num_images: w.num_images,
            num_groups: w.num_groups,
            latent_rank: w.latent_rank,
            interest_noise: w.interest_noise,
            interest_gain: w.interest_gain,
            interest_offset: w.interest_offset,
            group_bias: w.group_bias,
            popularity_exponent: w.popularity_exponent,
            min_objects_per_image: w.min_objects_per_image,
            max_objects_per_image: w.max_objects_per_image,
            image_height: w.image_height,
            image_width: w.image_width,
            gaze_noise: w.gaze_noise,
        }
    }
}

impl WorldSection {
    pub fn to_config(&self) -> WorldConfig {
        WorldConfig {
            num_users: self.num_users,
            num_objects: self.num_objects,
            num_images: self.num_images,
            num_groups: self.num_groups,
            latent_rank: self.latent_rank,
            interest_noise: self.interest_noise,
            interest_gain: self.interest_gain,
            interest_offset: self.interest_offset,
            group_bias: self.group_bias,
            popularity_exponent: self.popularity_exponent,
            min_objects_per_image: self.min_objects_per_image,
            max_objects_per_image: self.max_objects_per_image,
            image_height: self.image_height,
            image_width: self.image_width,
            gaze_noise: self.gaze_noise,
        }
    }
}

/// Training recipe. The fitting seed is derived from the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub factors: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    pub init_scale: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        let f = FitConfig::default();
        Self {
            factors: f.factors,
            learning_rate: f.learning_rate,
            regularization: f.regularization,
            epochs: f.epochs,
            init_scale: f.init_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkMode {
    /// Rate and BER computed from the channel keys.
    Channel,
    /// `downlink_rate` and `uplink_ber` used as given.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub mode: LinkMode,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub distance_m: f64,
    pub path_loss_exponent: f64,
    pub interference_dbw: f64,
    pub interference_paths: u32,
    /// When true `interference_dbw` is the power of each path, otherwise
    /// the total over all paths.
    pub interference_per_path: bool,
    pub noise_psd_dbw_per_hz: f64,
    pub tx_antennas: u32,
    pub rx_antennas: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uplink_sinr: Option<f64>,
    pub downlink_rate: f64,
    pub uplink_ber: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        let c = ChannelConfig::reference();
        Self {
            mode: LinkMode::Channel,
            bandwidth_hz: c.bandwidth_hz,
            tx_power_w: c.tx_power_w,
            distance_m: c.distance_m,
            path_loss_exponent: c.path_loss_exponent,
            interference_dbw: 1.0,
            interference_paths: 3,
            interference_per_path: false,
            noise_psd_dbw_per_hz: -204.0,
            tx_antennas: c.tx_antennas,
            rx_antennas: c.rx_antennas,
            uplink_sinr: c.uplink_sinr,
            downlink_rate: 1.0e6,
            uplink_ber: 0.0,
        }
    }
}

impl LinkSection {
    pub fn to_source(&self) -> Result<LinkSource> {
        Ok(match self.mode {
            LinkMode::Direct => LinkSource::Direct(LinkParams::new(self.downlink_rate, self.uplink_ber)?),
            LinkMode::Channel => {
                if self.interference_paths == 0 {
                    return Err(Error::Format("interference_paths must be >= 1".into()));
                }
                let mut interference_w = dbw_to_watts(self.interference_dbw);
                if self.interference_per_path {
                    interference_w *= f64::from(self.interference_paths);
                }
                LinkSource::Channel(ChannelConfig {
                    bandwidth_hz: self.bandwidth_hz,
                    tx_power_w: self.tx_power_w,
                    distance_m: self.distance_m,
                    path_loss_exponent: self.path_loss_exponent,
                    interference_w,
                    noise_psd_w_per_hz: dbw_to_watts(self.noise_psd_dbw_per_hz),
                    tx_antennas: self.tx_antennas,
                    rx_antennas: self.rx_antennas,
                    uplink_sinr: self.uplink_sinr,
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
    pub floor_k: f64,
    pub budget_factor_k: f64,
    pub sweep_start_k: f64,
    pub sweep_end_k: f64,
    pub sweep_step_k: f64,
    pub sweep_user: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        Self {
            seed: e.seed,
            floor_k: e.floor_k,
            budget_factor_k: e.budget_factor_k,
            sweep_start_k: e.sweep.start,
            sweep_end_k: e.sweep.end,
            sweep_step_k: e.sweep.step,
            sweep_user: e.sweep_user,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    /// Builds and validates the experiment configuration.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let e = &self.experiment;
        let f = &self.fit;
        let config = ExperimentConfig {
            world: self.world.to_config(),
            seed: e.seed,
            fit: FitConfig {
                factors: f.factors,
                learning_rate: f.learning_rate,
                regularization: f.regularization,
                epochs: f.epochs,
                init_scale: f.init_scale,
                seed: 0,
            },
            link: self.link.to_source()?,
            floor_k: e.floor_k,
            budget_factor_k: e.budget_factor_k,
            sweep: SweepRange {
                start: e.sweep_start_k,
                end: e.sweep_end_k,
                step: e.sweep_step_k,
            },
            sweep_user: e.sweep_user,
        };
        config.validate()?;
        Ok(config)
    }
}
