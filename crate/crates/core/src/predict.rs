//! Attention prediction from sparse records.
//!
//! Users and objects are embedded in a shared `f`-dimensional latent space;
//! a predicted level is `mu + b_u + b_o + <p_u, q_o>`, clamped to `[1, 5]`
//! only when read out. Parameters are fit by stochastic gradient descent on
//! the observed entries with L2 regularization. The regularization step is
//! applied proximally (`x ← (x + η·g) / (1 + η·λ)`), which is stable for any
//! `λ`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::attention::GroundTruthLevels;
use crate::records::SparseAttentionRecords;
use crate::rng::{self, Domain};
use crate::{Error, ObjectId, Result, UserId};

pub const LEVEL_FLOOR: f64 = 1.0;
pub const LEVEL_CEIL: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Latent dimension `f`.
    pub factors: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    /// Factors start uniform in `±0.05 · init_scale`.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            factors: 6,
            learning_rate: 0.01,
            regularization: 0.05,
            epochs: 200,
            init_scale: 1.0,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.factors == 0 {
            return Err(Error::Config("factors must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::Config("regularization must be non-negative".into()));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config("init_scale must be positive".into()));
        }
        Ok(())
    }
}

/// An observed rating on an arbitrary real scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: UserId,
    pub object: ObjectId,
    pub value: f64,
}

/// Anything that scores `(user, object)` pairs on the level scale.
pub trait Predictor {
    fn predict(&self, user: UserId, object: ObjectId) -> Result<f64>;
}

/// Fitted latent-factor model. Factor matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub num_users: usize,
    pub num_objects: usize,
    pub factors: usize,
    pub mu: f64,
    pub user_bias: Vec<f64>,
    pub object_bias: Vec<f64>,
    pub user_factors: Vec<f64>,
    pub object_factors: Vec<f64>,
}

impl FactorModel {
    /// Checks dimensions and finiteness, e.g. after loading from a file.
    pub fn validate(&self) -> Result<()> {
        if self.factors == 0 {
            return Err(Error::Config("model has zero latent factors".into()));
        }
        let shapes = [
            (self.user_bias.len(), self.num_users),
            (self.object_bias.len(), self.num_objects),
            (self.user_factors.len(), self.num_users * self.factors),
            (self.object_factors.len(), self.num_objects * self.factors),
        ];
        if shapes.iter().any(|(got, want)| got != want) {
            return Err(Error::Config("model arrays do not match its dimensions".into()));
        }
        let finite = core::iter::once(&self.mu)
            .chain(&self.user_bias)
            .chain(&self.object_bias)
            .chain(&self.user_factors)
            .chain(&self.object_factors)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("model contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn user_vector(&self, user: UserId) -> &[f64] {
        &self.user_factors[user * self.factors..(user + 1) * self.factors]
    }

    pub fn object_vector(&self, object: ObjectId) -> &[f64] {
        &self.object_factors[object * self.factors..(object + 1) * self.factors]
    }

    /// Unclamped score.
    pub fn predict_raw(&self, user: UserId, object: ObjectId) -> Result<f64> {
        self.check(user, object)?;
        Ok(self.score(user, object))
    }

    /// Score clamped to `[1, 5]`.
    pub fn predict(&self, user: UserId, object: ObjectId) -> Result<f64> {
        self.predict_raw(user, object)
            .map(|s| s.clamp(LEVEL_FLOOR, LEVEL_CEIL))
    }

    /// Clamped scores for a scene, in input order. Every weight is at least 1.
    pub fn predict_scene(&self, user: UserId, objects: &[ObjectId]) -> Result<Vec<f64>> {
        if objects.is_empty() {
            return Err(Error::Config("scene has no objects".into()));
        }
        objects.iter().map(|&o| self.predict(user, o)).collect()
    }

    pub fn user_factor_norm(&self) -> f64 {
        libm::sqrt(self.user_factors.iter().map(|v| v * v).sum())
    }

    pub fn object_factor_norm(&self) -> f64 {
        libm::sqrt(self.object_factors.iter().map(|v| v * v).sum())
    }

    fn score(&self, user: UserId, object: ObjectId) -> f64 {
        let dot: f64 = self
            .user_vector(user)
            .iter()
            .zip(self.object_vector(object))
            .map(|(a, b)| a * b)
            .sum();
        self.mu + self.user_bias[user] + self.object_bias[object] + dot
    }

    fn check(&self, user: UserId, object: ObjectId) -> Result<()> {
        if user >= self.num_users {
            return Err(Error::IndexOutOfRange {
                what: "user",
                index: user,
                len: self.num_users,
            });
        }
        if object >= self.num_objects {
            return Err(Error::IndexOutOfRange {
                what: "object",
                index: object,
                len: self.num_objects,
            });
        }
        Ok(())
    }
}

impl Predictor for FactorModel {
    fn predict(&self, user: UserId, object: ObjectId) -> Result<f64> {
        FactorModel::predict(self, user, object)
    }
}

/// A fitted model plus the mean squared training error of each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub model: FactorModel,
    pub epoch_loss: Vec<f64>,
}

/// Fits a factor model to attention records.
pub fn fit_mf(records: &SparseAttentionRecords, config: &FitConfig) -> Result<FactorModel> {
    fit_mf_traced(records, config).map(|t| t.model)
}

pub fn fit_mf_traced(records: &SparseAttentionRecords, config: &FitConfig) -> Result<FitTrace> {
    let ratings: Vec<Rating> = records
        .iter()
        .map(|(user, object, level)| Rating {
            user,
            object,
            value: level.as_f64(),
        })
        .collect();
    fit_ratings(&ratings, records.num_users(), records.num_objects(), config)
}

/// Fits a factor model to real-valued ratings.
///
/// Ratings are sorted by `(user, object)` before training, so the result
/// depends only on the rating set and the config.
pub fn fit_ratings(
    ratings: &[Rating],
    num_users: usize,
    num_objects: usize,
    config: &FitConfig,
) -> Result<FitTrace> {
    config.validate()?;
    if ratings.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut data = ratings.to_vec();
    data.sort_by_key(|r| (r.user, r.object));
    for r in &data {
        if r.user >= num_users || r.object >= num_objects {
            return Err(Error::IndexOutOfRange {
                what: if r.user >= num_users { "user" } else { "object" },
                index: if r.user >= num_users { r.user } else { r.object },
                len: if r.user >= num_users { num_users } else { num_objects },
            });
        }
        if !r.value.is_finite() {
            return Err(Error::Config("rating value is not finite".into()));
        }
    }

    let f = config.factors;
    let mut rng = rng::substream(config.seed, Domain::Fit, 0);
    let half = 0.05 * config.init_scale;
    let mut init = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-half..=half)).collect() };
    let user_factors = init(num_users * f);
    let object_factors = init(num_objects * f);
    let mu = data.iter().map(|r| r.value).sum::<f64>() / data.len() as f64;
    let mut model = FactorModel {
        num_users,
        num_objects,
        factors: f,
        mu,
        user_bias: vec![0.0; num_users],
        object_bias: vec![0.0; num_objects],
        user_factors,
        object_factors,
    };

    let lr = config.learning_rate;
    let shrink = 1.0 / (1.0 + lr * config.regularization);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_loss = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for &i in &order {
            let Rating {
                user, object, value, ..
            } = data[i];
            let err = value - model.score(user, object);
            sse += err * err;
            let bu = &mut model.user_bias[user];
            *bu = (*bu + lr * err) * shrink;
            let bo = &mut model.object_bias[object];
            *bo = (*bo + lr * err) * shrink;
            let p = &mut model.user_factors[user * f..(user + 1) * f];
            let q = &mut model.object_factors[object * f..(object + 1) * f];
            for (pk, qk) in p.iter_mut().zip(q.iter_mut()) {
                let (pu, qo) = (*pk, *qk);
                *pk = (pu + lr * err * qo) * shrink;
                *qk = (qo + lr * err * pu) * shrink;
            }
        }
        epoch_loss.push(sse / data.len() as f64);
    }
    Ok(FitTrace { model, epoch_loss })
}

/// Mean-imputation baseline: `mu + (user mean − mu) + (object mean − mu)`,
/// with unobserved components dropped, clamped to `[1, 5]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub mu: f64,
    pub user_means: Vec<Option<f64>>,
    pub object_means: Vec<Option<f64>>,
}

impl BaselineModel {
    pub fn predict(&self, user: UserId, object: ObjectId) -> Result<f64> {
        let u = self.user_means.get(user).ok_or(Error::IndexOutOfRange {
            what: "user",
            index: user,
            len: self.user_means.len(),
        })?;
        let o = self.object_means.get(object).ok_or(Error::IndexOutOfRange {
            what: "object",
            index: object,
            len: self.object_means.len(),
        })?;
        let mut score = self.mu;
        if let Some(m) = u {
            score += m - self.mu;
        }
        if let Some(m) = o {
            score += m - self.mu;
        }
        Ok(score.clamp(LEVEL_FLOOR, LEVEL_CEIL))
    }
}

impl Predictor for BaselineModel {
    fn predict(&self, user: UserId, object: ObjectId) -> Result<f64> {
        BaselineModel::predict(self, user, object)
    }
}

pub fn fit_baseline(records: &SparseAttentionRecords) -> Result<BaselineModel> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut user_sum = vec![(0.0, 0usize); records.num_users()];
    let mut object_sum = vec![(0.0, 0usize); records.num_objects()];
    let mut total = 0.0;
    for (u, o, level) in records.iter() {
        let v = level.as_f64();
        total += v;
        user_sum[u].0 += v;
        user_sum[u].1 += 1;
        object_sum[o].0 += v;
        object_sum[o].1 += 1;
    }
    let mean = |(s, n): (f64, usize)| if n == 0 { None } else { Some(s / n as f64) };
    Ok(BaselineModel {
        mu: total / records.len() as f64,
        user_means: user_sum.into_iter().map(mean).collect(),
        object_means: object_sum.into_iter().map(mean).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    pub count: usize,
}

/// RMSE and MAE of `predictor` against `truth` over the `mask` pairs.
pub fn evaluate<P: Predictor + ?Sized>(
    predictor: &P,
    truth: &GroundTruthLevels,
    mask: &[(UserId, ObjectId)],
) -> Result<Metrics> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut se = 0.0;
    let mut ae = 0.0;
    for &(u, o) in mask {
        let err = predictor.predict(u, o)? - truth.try_get(u, o)?.as_f64();
        se += err * err;
        ae += libm::fabs(err);
    }
    let n = mask.len() as f64;
    Ok(Metrics {
        rmse: libm::sqrt(se / n),
        mae: ae / n,
        count: mask.len(),
    })
}

/// Held-out pairs: cells of `truth` with no record, sampled per user.
///
/// With `per_user = None` every unobserved cell is returned; otherwise at
/// most that many per user, drawn from a per-user stream of `seed`. Output is
/// sorted by `(user, object)`.
pub fn holdout_mask(
    records: &SparseAttentionRecords,
    truth: &GroundTruthLevels,
    per_user: Option<usize>,
    seed: u64,
) -> Vec<(UserId, ObjectId)> {
    let mut mask = Vec::new();
    for user in 0..truth.num_users() {
        let mut candidates: Vec<ObjectId> = (0..truth.num_objects())
            .filter(|&o| !records.contains(user, o))
            .collect();
        if let Some(cap) = per_user {
            if candidates.len() > cap {
                let mut rng = rng::substream(seed, Domain::Holdout, user as u64);
                let mut picked: Vec<ObjectId> =
                    crate::sparsify::sample_indices(&mut rng, candidates.len(), cap)
                        .into_iter()
                        .map(|i| candidates[i])
                        .collect();
                picked.sort_unstable();
                candidates = picked;
            }
        }
        mask.extend(candidates.into_iter().map(|o| (user, o)));
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::Level;

    fn records_from(n_users: usize, n_obj: usize, cells: &[(usize, usize, i64)]) -> SparseAttentionRecords {
        let mut r = SparseAttentionRecords::new(n_users, n_obj);
        for &(u, o, l) in cells {
            r.insert(u, o, Level::new(l).unwrap()).unwrap();
        }
        r
    }

    fn zero_model(mu: f64) -> FactorModel {
        FactorModel {
            num_users: 2,
            num_objects: 3,
            factors: 1,
            mu,
            user_bias: vec![0.0; 2],
            object_bias: vec![0.0; 3],
            user_factors: vec![0.0; 2],
            object_factors: vec![0.0; 3],
        }
    }

    #[test]
    fn zero_model_predicts_mu() {
        let m = zero_model(3.0);
        for u in 0..2 {
            for o in 0..3 {
                assert_eq!(m.predict(u, o).unwrap(), 3.0);
            }
        }
    }

    #[test]
    fn clamp_rule() {
        assert_eq!(zero_model(7.2).predict(0, 0).unwrap(), 5.0);
        assert_eq!(zero_model(-0.4).predict(1, 2).unwrap(), 1.0);
        assert_eq!(zero_model(7.2).predict_raw(0, 0).unwrap(), 7.2);
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(
            zero_model(3.0).predict(2, 0),
            Err(Error::IndexOutOfRange { what: "user", .. })
        ));
        assert!(matches!(
            zero_model(3.0).predict(0, 3),
            Err(Error::IndexOutOfRange { what: "object", .. })
        ));
    }

    #[test]
    fn predict_scene_order_and_duplicates() {
        let mut m = zero_model(3.0);
        m.object_bias = vec![-1.0, 0.5, 4.0];
        let w = m.predict_scene(0, &[2, 0, 2, 1]).unwrap();
        assert_eq!(w, vec![5.0, 2.0, 5.0, 3.5]);
        assert_eq!(m.predict_scene(1, &[1]).unwrap(), vec![m.predict(1, 1).unwrap()]);
        assert!(m.predict_scene(0, &[]).is_err());
    }

    #[test]
    fn constant_records_fit_constant() {
        let mut cells = Vec::new();
        for u in 0..8 {
            for o in 0..10 {
                if (u + o) % 3 != 0 {
                    cells.push((u, o, 3));
                }
            }
        }
        let records = records_from(8, 10, &cells);
        let config = FitConfig {
            regularization: 0.0,
            ..FitConfig::default()
        };
        let model = fit_mf(&records, &config).unwrap();
        for (u, o, _) in records.iter() {
            assert!((model.predict(u, o).unwrap() - 3.0).abs() < 0.1);
        }
    }

    #[test]
    fn empty_records_rejected() {
        let records = SparseAttentionRecords::new(2, 2);
        assert_eq!(fit_mf(&records, &FitConfig::default()), Err(Error::EmptyRecords));
        assert_eq!(fit_baseline(&records), Err(Error::EmptyRecords));
    }

    #[test]
    fn fit_is_deterministic() {
        let cells: Vec<(usize, usize, i64)> = (0..40)
            .map(|i| ((i % 5, (i * 7) % 11), 1 + (i as i64 * 3) % 5))
            .collect::<alloc::collections::BTreeMap<_, _>>()
            .into_iter()
            .map(|((u, o), l)| (u, o, l))
            .collect();
        let records = records_from(5, 11, &cells);
        let a = fit_mf(&records, &FitConfig::default()).unwrap();
        let b = fit_mf(&records, &FitConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn heavy_regularization_collapses_factors() {
        let cells: Vec<(usize, usize, i64)> = (0..6)
            .flat_map(|u| (0..6).map(move |o| (u, o, 1 + ((u * o) % 5) as i64)))
            .collect();
        let records = records_from(6, 6, &cells);
        let config = FitConfig {
            regularization: 1e6,
            ..FitConfig::default()
        };
        let model = fit_mf(&records, &config).unwrap();
        assert!(model.user_factor_norm() < 1e-3);
        assert!(model.object_factor_norm() < 1e-3);
        for u in 0..6 {
            assert!((model.predict_raw(u, 0).unwrap() - model.mu).abs() < 1e-3);
        }
    }

    #[test]
    fn baseline_means() {
        let single = fit_baseline(&records_from(3, 3, &[(1, 1, 4)])).unwrap();
        assert_eq!(single.mu, 4.0);
        for u in 0..3 {
            for o in 0..3 {
                assert_eq!(single.predict(u, o).unwrap(), 4.0);
            }
        }
        let two = fit_baseline(&records_from(3, 3, &[(0, 0, 1), (0, 1, 5)])).unwrap();
        assert_eq!(two.user_means[0], Some(3.0));
        assert_eq!(two.user_means[2], None);
        // Unobserved user and object fall back to mu.
        assert_eq!(two.predict(2, 2).unwrap(), two.mu);
    }

    #[test]
    fn metrics_trivial_cases() {
        let truth = GroundTruthLevels::new(1, 3, vec![Level::MAX; 3]).unwrap();
        let mask = [(0, 0), (0, 1), (0, 2)];
        let mut perfect = zero_model(5.0);
        perfect.num_users = 1;
        perfect.user_bias.truncate(1);
        perfect.user_factors.truncate(1);
        let m = evaluate(&perfect, &truth, &mask).unwrap();
        assert_eq!((m.rmse, m.mae), (0.0, 0.0));
        let mut three = perfect.clone();
        three.mu = 3.0;
        let m = evaluate(&three, &truth, &mask).unwrap();
        assert_eq!((m.rmse, m.mae), (2.0, 2.0));
        assert_eq!(evaluate(&three, &truth, &[]), Err(Error::EmptyMask));
    }

    #[test]
    fn holdout_excludes_observed() {
        let records = records_from(2, 4, &[(0, 1, 2), (1, 0, 3), (1, 3, 4)]);
        let truth = GroundTruthLevels::new(2, 4, vec![Level::MID; 8]).unwrap();
        let all = holdout_mask(&records, &truth, None, 0);
        assert_eq!(all, vec![(0, 0), (0, 2), (0, 3), (1, 1), (1, 2)]);
        let capped = holdout_mask(&records, &truth, Some(1), 0);
        assert_eq!(capped.len(), 2);
        assert!(capped.iter().all(|p| all.contains(p)));
    }
}
