//! Attention values and attention levels.
//!
//! A user's attention value for an object is the gaze mass the user put on
//! the object's pixels, summed over every occurrence, divided by the total
//! pixel count of those occurrences. Values are then binned per user into
//! five equal-frequency levels.

use alloc::vec;
use alloc::vec::Vec;

use crate::records::Level;
use crate::world::World;
use crate::{Error, ImageId, ObjectId, Result, UserId};

/// Attention from explicit `(gaze_mass, pixel_count)` occurrences.
///
/// Returns [`Error::AbsentObject`] (with object id 0) when there are no
/// occurrences or they cover zero pixels.
pub fn attention_from_gaze(occurrences: &[(f64, u32)]) -> Result<f64> {
    let pixels: u64 = occurrences.iter().map(|&(_, px)| u64::from(px)).sum();
    if pixels == 0 {
        return Err(Error::AbsentObject { object: 0 });
    }
    let gaze: f64 = occurrences.iter().map(|&(g, _)| g).sum();
    Ok(gaze / pixels as f64)
}

/// Attention of `user` to `object` over the images in `subset`.
///
/// Gaze mass of one occurrence is `interest × pixels × gaze_factor`. The
/// interest term is factored out of the sum, so with gaze noise off the
/// value equals the user's interest exactly.
pub fn attention_value(
    world: &World,
    user: UserId,
    subset: &[ImageId],
    object: ObjectId,
) -> Result<f64> {
    check_user(world, user)?;
    if object >= world.num_objects() {
        return Err(Error::IndexOutOfRange {
            what: "object",
            index: object,
            len: world.num_objects(),
        });
    }
    let mut pixels = 0u64;
    let mut weighted = 0.0;
    for &id in subset {
        let image = image(world, id)?;
        if let Some(px) = image.pixels_of(object) {
            pixels += u64::from(px);
            weighted += f64::from(px) * world.gaze_factor(user, id, object);
        }
    }
    if pixels == 0 {
        return Err(Error::AbsentObject { object });
    }
    Ok(world.interest().get(user, object) * (weighted / pixels as f64))
}

/// Attention values of every object present in `subset`, ascending by object.
///
/// Accumulates occurrences in subset order, giving results identical to
/// calling [`attention_value`] per object.
pub fn attention_values(
    world: &World,
    user: UserId,
    subset: &[ImageId],
) -> Result<Vec<(ObjectId, f64)>> {
    check_user(world, user)?;
    let n = world.num_objects();
    let mut pixels = vec![0u64; n];
    let mut weighted = vec![0.0f64; n];
    for &id in subset {
        let image = image(world, id)?;
        for &(object, px) in &image.composition {
            pixels[object] += u64::from(px);
            weighted[object] += f64::from(px) * world.gaze_factor(user, id, object);
        }
    }
    let interest = world.interest().row(user);
    Ok((0..n)
        .filter(|&o| pixels[o] > 0)
        .map(|o| (o, interest[o] * (weighted[o] / pixels[o] as f64)))
        .collect())
}

fn check_user(world: &World, user: UserId) -> Result<()> {
    if user >= world.num_users() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: user,
            len: world.num_users(),
        });
    }
    Ok(())
}

fn image(world: &World, id: ImageId) -> Result<&crate::world::SceneImage> {
    world.image(id).ok_or(Error::IndexOutOfRange {
        what: "image",
        index: id,
        len: world.images().len(),
    })
}

/// Bins one user's raw values into levels 1..=5.
///
/// With at least five distinct values this is equal-frequency binning over
/// the order `(value, object_id)`: the item at sorted position `p` of `n`
/// gets level `1 + ⌊5p/n⌋`. With 2..=4 distinct values the dense rank `r` of
/// `d` is spread over the scale as `1 + round(4r/(d-1))`. A constant list is
/// all level 3. Output order follows the input.
pub fn quantize_levels(raw: &[(ObjectId, f64)]) -> Vec<(ObjectId, Level)> {
    let n = raw.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw[a]
            .1
            .total_cmp(&raw[b].1)
            .then(raw[a].0.cmp(&raw[b].0))
    });
    let mut dense = vec![0usize; n];
    let mut distinct = 1usize;
    for w in 1..n {
        if raw[order[w]].1 != raw[order[w - 1]].1 {
            distinct += 1;
        }
        dense[order[w]] = distinct - 1;
    }

    let mut levels = vec![Level::MID; n];
    if distinct >= 5 {
        for (pos, &idx) in order.iter().enumerate() {
            levels[idx] = Level::new(1 + (5 * pos / n) as i64).expect("1..=5");
        }
    } else if distinct > 1 {
        let span = (distinct - 1) as f64;
        for idx in 0..n {
            let scaled = libm::round(4.0 * dense[idx] as f64 / span) as i64;
            levels[idx] = Level::new(1 + scaled).expect("1..=5");
        }
    }
    raw.iter().zip(levels).map(|(&(o, _), l)| (o, l)).collect()
}

/// Dense raw attention values and levels computed over every image.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    num_users: usize,
    num_objects: usize,
    values: Vec<f64>,
    levels: GroundTruthLevels,
}

impl GroundTruth {
    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    /// Raw (pre-quantization) attention value.
    pub fn value(&self, user: UserId, object: ObjectId) -> f64 {
        self.values[user * self.num_objects + object]
    }

    pub fn values_row(&self, user: UserId) -> &[f64] {
        &self.values[user * self.num_objects..(user + 1) * self.num_objects]
    }

    pub fn levels(&self) -> &GroundTruthLevels {
        &self.levels
    }

    pub fn into_levels(self) -> GroundTruthLevels {
        self.levels
    }
}

/// Dense `num_users × num_objects` matrix of attention levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthLevels {
    num_users: usize,
    num_objects: usize,
    levels: Vec<Level>,
}

impl GroundTruthLevels {
    pub fn new(num_users: usize, num_objects: usize, levels: Vec<Level>) -> Result<Self> {
        if levels.len() != num_users * num_objects {
            return Err(Error::Config(alloc::format!(
                "level matrix has {} entries, expected {}",
                levels.len(),
                num_users * num_objects
            )));
        }
        Ok(Self {
            num_users,
            num_objects,
            levels,
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    pub fn get(&self, user: UserId, object: ObjectId) -> Level {
        self.levels[user * self.num_objects + object]
    }

    pub fn try_get(&self, user: UserId, object: ObjectId) -> Result<Level> {
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
        Ok(self.get(user, object))
    }

    /// `(user, object, level)` for every cell, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (UserId, ObjectId, Level)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, &l)| (i / self.num_objects, i % self.num_objects, l))
    }
}

/// Attention over all images for every `(user, object)`, quantized per user.
pub fn ground_truth(world: &World) -> GroundTruth {
    let n_users = world.num_users();
    let n_obj = world.num_objects();
    let all: Vec<ImageId> = (0..world.images().len()).collect();
    let mut values = vec![0.0; n_users * n_obj];
    let mut levels = vec![Level::MID; n_users * n_obj];
    for user in 0..n_users {
        // A valid world shows every object in some image, so each row is full.
        let raw = attention_values(world, user, &all).expect("ids come from the world");
        debug_assert_eq!(raw.len(), n_obj);
        for &(o, v) in &raw {
            values[user * n_obj + o] = v;
        }
        for (o, level) in quantize_levels(&raw) {
            levels[user * n_obj + o] = level;
        }
    }
    GroundTruth {
        num_users: n_users,
        num_objects: n_obj,
        values,
        levels: GroundTruthLevels {
            num_users: n_users,
            num_objects: n_obj,
            levels,
        },
    }
}

pub fn ground_truth_levels(world: &World) -> GroundTruthLevels {
    ground_truth(world).into_levels()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_world, InterestMatrix, ObjectCatalog, SceneImage, WorldConfig, WorldParts};
    use alloc::vec;

    fn levels_of(values: &[f64]) -> Vec<u8> {
        let raw: Vec<(ObjectId, f64)> = values.iter().copied().enumerate().collect();
        quantize_levels(&raw).iter().map(|(_, l)| l.get()).collect()
    }

    /// Independent reference: position by counting strictly smaller
    /// `(value, id)` keys, then `1 + 5·pos/n`.
    fn reference_rank_bins(values: &[f64]) -> Vec<u8> {
        let n = values.len();
        (0..n)
            .map(|i| {
                let pos = (0..n)
                    .filter(|&j| values[j] < values[i] || (values[j] == values[i] && j < i))
                    .count();
                (1 + 5 * pos / n) as u8
            })
            .collect()
    }

    #[test]
    fn worked_example_ratio() {
        let v = attention_from_gaze(&[(20.0, 100), (30.0, 300), (40.0, 200)]).unwrap();
        assert_eq!(v, 0.15);
    }

    #[test]
    fn full_attention_is_one() {
        assert_eq!(attention_from_gaze(&[(250.0, 250)]).unwrap(), 1.0);
        assert!(attention_from_gaze(&[]).is_err());
    }

    #[test]
    fn quantize_one_per_quintile() {
        assert_eq!(levels_of(&[0.1, 0.2, 0.3, 0.4, 0.5]), vec![1, 2, 3, 4, 5]);
        assert_eq!(levels_of(&[0.5, 0.1, 0.4, 0.2, 0.3]), vec![5, 1, 4, 2, 3]);
    }

    #[test]
    fn quantize_constant_is_mid() {
        assert_eq!(levels_of(&[0.7; 9]), vec![3; 9]);
        assert_eq!(levels_of(&[0.2]), vec![3]);
        assert!(quantize_levels(&[]).is_empty());
    }

    #[test]
    fn quantize_equal_pairs_matches_reference() {
        let values = [0.9, 0.1, 0.5, 0.3, 0.7, 0.1, 0.9, 0.3, 0.5, 0.7];
        let got = levels_of(&values);
        assert_eq!(got, reference_rank_bins(&values));
        // In value order: 1,1,2,2,3,3,4,4,5,5.
        let mut pairs: Vec<(f64, u8)> = values.iter().copied().zip(got).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let in_order: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        assert_eq!(in_order, vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5]);
    }

    #[test]
    fn quantize_few_distinct_values_spread() {
        assert_eq!(levels_of(&[0.2, 0.8, 0.2]), vec![1, 5, 1]);
        assert_eq!(levels_of(&[0.1, 0.2, 0.3, 0.1]), vec![1, 3, 5, 1]);
        assert_eq!(levels_of(&[0.4, 0.3, 0.2, 0.1]), vec![5, 4, 2, 1]);
    }

    fn hand_world(interest_row: Vec<f64>, images: Vec<Vec<(ObjectId, u32)>>, gaze_noise: f64) -> World {
        let n_obj = interest_row.len();
        World::from_parts(WorldParts {
            catalog: ObjectCatalog::numbered(n_obj),
            images: images
                .into_iter()
                .enumerate()
                .map(|(id, composition)| SceneImage {
                    id,
                    group: id % 2,
                    composition,
                })
                .collect(),
            interest: InterestMatrix::new(1, n_obj, interest_row).unwrap(),
            num_groups: 2,
            pixel_budget: 360 * 640,
            gaze_noise,
            gaze_seed: 99,
        })
        .unwrap()
    }

    #[test]
    fn constant_interest_recovered_exactly() {
        let c = 0.3719;
        let world = hand_world(
            vec![c, c],
            vec![vec![(0, 100), (1, 7)], vec![(0, 300)], vec![(0, 200), (1, 13)]],
            0.0,
        );
        for subset in [vec![0], vec![1, 2], vec![0, 1, 2], vec![2, 0]] {
            assert_eq!(attention_value(&world, 0, &subset, 0).unwrap(), c);
        }
        assert_eq!(
            attention_value(&world, 0, &[1], 1),
            Err(Error::AbsentObject { object: 1 })
        );
    }

    #[test]
    fn bulk_matches_single_with_noise() {
        let world = generate_world(
            &WorldConfig {
                gaze_noise: 0.2,
                num_images: 60,
                ..WorldConfig::default()
            },
            4,
        )
        .unwrap();
        let subset: Vec<ImageId> = (0..60).step_by(3).collect();
        for (o, v) in attention_values(&world, 5, &subset).unwrap() {
            assert_eq!(attention_value(&world, 5, &subset, o).unwrap(), v);
        }
    }

    #[test]
    fn increasing_interest_gives_nondecreasing_levels() {
        let perm = [4usize, 0, 7, 2, 9, 1, 8, 3, 6, 5];
        let mut row = vec![0.0; 10];
        for (rank, &o) in perm.iter().enumerate() {
            row[o] = 0.05 + 0.09 * rank as f64;
        }
        let images = (0..10).map(|o| vec![(o, 50 + o as u32)]).collect();
        let world = hand_world(row, images, 0.0);
        let gt = ground_truth_levels(&world);
        let ordered: Vec<u8> = perm.iter().map(|&o| gt.get(0, o).get()).collect();
        assert!(ordered.windows(2).all(|w| w[0] <= w[1]), "{ordered:?}");
    }

    #[test]
    fn minimal_world_ground_truth_is_mid() {
        let config = WorldConfig {
            num_users: 1,
            num_objects: 1,
            num_images: 1,
            ..WorldConfig::default()
        };
        let world = generate_world(&config, 0).unwrap();
        assert_eq!(ground_truth_levels(&world).get(0, 0), Level::MID);
    }

    #[test]
    fn default_ground_truth_shape() {
        let world = generate_world(&WorldConfig::default(), 7).unwrap();
        let gt = ground_truth(&world);
        assert_eq!(gt.levels().iter().count(), 30 * 96);
        for user in 0..30 {
            let mut counts = [0usize; 5];
            for o in 0..96 {
                counts[gt.levels().get(user, o).get() as usize - 1] += 1;
            }
            // 96 distinct values binned into quintiles: 19 or 20 per level.
            assert!(counts.iter().all(|&c| c == 19 || c == 20), "{counts:?}");
        }
    }
}
