//! End-to-end comparison of allocation schemes.
//!
//! For every user the harness builds a scene (the objects seen in a random
//! share of one randomly chosen group's images), predicts the user's
//! attention to each scene object with a model fitted on everyone's sparse
//! history, and compares three allocations of `n_objects × budget_factor` K:
//!
//! - uniform: every object gets the same capacity;
//! - aware: water-filling on the predicted levels;
//! - oracle: water-filling on the true raw attention values.
//!
//! All three are scored with the true raw attention values, so the oracle is
//! an upper bound for the other two.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::allocator::{allocate_uniform, allocate_weighted, AllocationProblem};
use crate::attention::{ground_truth, GroundTruth};
use crate::predict::{fit_mf, FactorModel, FitConfig};
use crate::qoe::{link_from_channel, qoe, ChannelConfig, LinkParams};
use crate::records::SparseAttentionRecords;
use crate::rng::{self, Domain};
use crate::sparsify::{sample_indices, sparsify_all, MAX_RETAIN_PERCENT, MIN_RETAIN_PERCENT};
use crate::world::{generate_world, World, WorldConfig};
use crate::{Error, ImageId, ObjectId, Result, UserId};

pub const DEFAULT_FLOOR_K: f64 = 15.0;
pub const DEFAULT_BUDGET_FACTOR_K: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkSource {
    Channel(ChannelConfig),
    Direct(LinkParams),
}

impl LinkSource {
    pub fn resolve(&self) -> Result<LinkParams> {
        match self {
            LinkSource::Channel(cfg) => link_from_channel(cfg),
            LinkSource::Direct(link) => LinkParams::new(link.downlink_rate, link.uplink_ber),
        }
    }
}

/// Inclusive range of per-object budget factors, in K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for SweepRange {
    fn default() -> Self {
        Self {
            start: 16.0,
            end: 40.0,
            step: 2.0,
        }
    }
}

impl SweepRange {
    pub fn factors(&self) -> Vec<f64> {
        if !(self.step > 0.0) || self.end < self.start {
            return Vec::new();
        }
        let count = libm::floor((self.end - self.start) / self.step + 1e-9) as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    /// Master seed; world, histories, scenes and fitting all derive from it.
    pub seed: u64,
    /// Training recipe. Its `seed` field is replaced by one derived from the
    /// master seed.
    pub fit: FitConfig,
    pub link: LinkSource,
    pub floor_k: f64,
    /// Total budget per user is `n_objects × budget_factor_k`.
    pub budget_factor_k: f64,
    pub sweep: SweepRange,
    /// User whose scene is swept when no other user is given.
    pub sweep_user: UserId,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            seed: 7,
            fit: FitConfig::default(),
            link: LinkSource::Channel(ChannelConfig::reference()),
            floor_k: DEFAULT_FLOOR_K,
            budget_factor_k: DEFAULT_BUDGET_FACTOR_K,
            sweep: SweepRange::default(),
            sweep_user: 2,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.fit.validate()?;
        self.link.resolve()?;
        if !(self.floor_k > 1.0 && self.floor_k.is_finite()) {
            return Err(Error::Config("floor_k must exceed 1 K".into()));
        }
        if !(self.budget_factor_k > self.floor_k && self.budget_factor_k.is_finite()) {
            return Err(Error::Config(format!(
                "budget_factor_k ({}) must exceed floor_k ({})",
                self.budget_factor_k, self.floor_k
            )));
        }
        let factors = self.sweep.factors();
        if factors.is_empty() {
            return Err(Error::Config("sweep range is empty".into()));
        }
        if factors.iter().any(|&f| f <= self.floor_k) {
            return Err(Error::Config("every sweep budget factor must exceed floor_k".into()));
        }
        if self.sweep_user >= self.world.num_users {
            return Err(Error::Config("sweep_user is not a user of the world".into()));
        }
        Ok(())
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            seed: rng::derive_seed(self.seed, Domain::Fit),
            ..self.fit.clone()
        }
    }
}

/// A user's evaluation scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub group: usize,
    pub images: Vec<ImageId>,
    /// Distinct objects shown, ascending.
    pub objects: Vec<ObjectId>,
}

/// Draws the scene for `user`: one random group, a random 30 to 70% of its
/// images, and every object they show.
pub fn scene_for_user(world: &World, seed: u64, user: UserId) -> Result<Scene> {
    if user >= world.num_users() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: user,
            len: world.num_users(),
        });
    }
    let mut rng = rng::substream(seed, Domain::Scene, user as u64);
    let nonempty: Vec<usize> = (0..world.num_groups())
        .filter(|&g| !world.group_images(g).is_empty())
        .collect();
    let group = nonempty[rng.gen_range(0..nonempty.len() as u32) as usize];
    let pool = world.group_images(group);
    let percent = rng.gen_range(MIN_RETAIN_PERCENT..=MAX_RETAIN_PERCENT) as usize;
    let keep = ((pool.len() * percent + 50) / 100).max(1);
    let mut images: Vec<ImageId> = sample_indices(&mut rng, pool.len(), keep)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    images.sort_unstable();
    let mut present = alloc::vec![false; world.num_objects()];
    for &id in &images {
        for &(o, _) in &world.images()[id].composition {
            present[o] = true;
        }
    }
    let objects = (0..world.num_objects()).filter(|&o| present[o]).collect();
    Ok(Scene {
        group,
        images,
        objects,
    })
}

/// QoE of the three schemes for one scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneQoe {
    pub uniform: f64,
    pub aware: f64,
    pub oracle: f64,
}

impl SceneQoe {
    pub fn improvement_pct(&self) -> f64 {
        improvement_pct(self.uniform, self.aware)
    }
}

pub fn improvement_pct(uniform: f64, aware: f64) -> f64 {
    (aware - uniform) / uniform * 100.0
}

/// Allocates `true_weights.len() × budget_factor` K three ways and scores
/// each allocation with `true_weights`.
pub fn compare_allocations(
    true_weights: &[f64],
    predicted_weights: &[f64],
    link: &LinkParams,
    budget_factor: f64,
    floor: f64,
) -> Result<SceneQoe> {
    if true_weights.len() != predicted_weights.len() {
        return Err(Error::Config("true and predicted weights differ in length".into()));
    }
    let n = true_weights.len();
    let budget = n as f64 * budget_factor;
    let uniform = allocate_uniform(n, budget, floor)?;
    let aware = allocate_weighted(&AllocationProblem::new(
        predicted_weights.to_vec(),
        budget,
        floor,
    )?)?;
    let oracle = allocate_weighted(&AllocationProblem::new(true_weights.to_vec(), budget, floor)?)?;
    Ok(SceneQoe {
        uniform: qoe(true_weights, &uniform.capacities, link)?,
        aware: qoe(true_weights, &aware.capacities, link)?,
        oracle: qoe(true_weights, &oracle.capacities, link)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserReport {
    pub user: UserId,
    pub n_objects: usize,
    pub qoe_uniform: f64,
    pub qoe_aware: f64,
    pub qoe_oracle: f64,
    pub improvement_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub max_improvement_pct: f64,
    pub min_improvement_pct: f64,
    pub mean_improvement_pct: f64,
}

impl Aggregate {
    pub fn from_reports(reports: &[UserReport]) -> Option<Self> {
        if reports.is_empty() {
            return None;
        }
        let values = reports.iter().map(|r| r.improvement_pct);
        Some(Self {
            max_improvement_pct: values.clone().fold(f64::NEG_INFINITY, f64::max),
            min_improvement_pct: values.clone().fold(f64::INFINITY, f64::min),
            mean_improvement_pct: values.sum::<f64>() / reports.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    /// Sorted by user id.
    pub reports: Vec<UserReport>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub budget_factor_k: f64,
    pub mean_improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub users: Vec<UserId>,
    /// Strictly increasing in budget factor.
    pub points: Vec<SweepPoint>,
}

/// Everything the per-user runs share: world, truth, histories, fitted model.
#[derive(Debug, Clone)]
pub struct ExperimentContext {
    pub config: ExperimentConfig,
    pub world: World,
    pub truth: GroundTruth,
    pub records: SparseAttentionRecords,
    pub model: FactorModel,
    pub link: LinkParams,
}

impl ExperimentContext {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let world = generate_world(&config.world, config.seed)?;
        let truth = ground_truth(&world);
        let records = sparsify_all(&world, config.seed)?;
        let model = fit_mf(&records, &config.fit_config())?;
        let link = config.link.resolve()?;
        Ok(Self {
            config: config.clone(),
            world,
            truth,
            records,
            model,
            link,
        })
    }

    pub fn scene(&self, user: UserId) -> Result<Scene> {
        scene_for_user(&self.world, self.config.seed, user)
    }

    /// Runs one user at the configured budget factor.
    pub fn run_user(&self, user: UserId) -> Result<UserReport> {
        self.run_user_at(user, self.config.budget_factor_k)
    }

    pub fn run_user_at(&self, user: UserId, budget_factor: f64) -> Result<UserReport> {
        let scene = self.scene(user)?;
        let truth: Vec<f64> = scene
            .objects
            .iter()
            .map(|&o| self.truth.value(user, o))
            .collect();
        let predicted = self.model.predict_scene(user, &scene.objects)?;
        let q = compare_allocations(
            &truth,
            &predicted,
            &self.link,
            budget_factor,
            self.config.floor_k,
        )?;
        Ok(UserReport {
            user,
            n_objects: scene.objects.len(),
            qoe_uniform: q.uniform,
            qoe_aware: q.aware,
            qoe_oracle: q.oracle,
            improvement_pct: q.improvement_pct(),
        })
    }

    pub fn run_all(&self) -> Result<ExperimentSummary> {
        let reports = (0..self.world.num_users())
            .map(|u| self.run_user(u))
            .collect::<Result<Vec<_>>>()?;
        let aggregate = Aggregate::from_reports(&reports).expect("worlds have users");
        Ok(ExperimentSummary { reports, aggregate })
    }

    /// Sweeps the configured budget factors; each point averages the
    /// improvement over `users`.
    pub fn run_sweep(&self, users: &[UserId]) -> Result<SweepReport> {
        if users.is_empty() {
            return Err(Error::Config("sweep needs at least one user".into()));
        }
        let mut points = Vec::new();
        for factor in self.config.sweep.factors() {
            let mut total = 0.0;
            for &u in users {
                total += self.run_user_at(u, factor)?.improvement_pct;
            }
            points.push(SweepPoint {
                budget_factor_k: factor,
                mean_improvement_pct: total / users.len() as f64,
            });
        }
        Ok(SweepReport {
            users: users.to_vec(),
            points,
        })
    }
}

pub fn run_user_experiment(config: &ExperimentConfig, user: UserId) -> Result<UserReport> {
    ExperimentContext::prepare(config)?.run_user(user)
}

pub fn run_all(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    ExperimentContext::prepare(config)?.run_all()
}

pub fn run_sweep(config: &ExperimentConfig, user: UserId) -> Result<SweepReport> {
    ExperimentContext::prepare(config)?.run_sweep(&[user])
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
