//! Sparse history records.
//!
//! A user is assumed to have joined a random number (2 to 4) of the service
//! groups and to have seen a random share (30% to 70%) of each joined
//! group's images. Attention values are recomputed over only those images
//! and quantized per user, which leaves the objects the user never saw
//! without a record.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::attention::{attention_values, quantize_levels};
use crate::records::SparseAttentionRecords;
use crate::rng::{self, Domain};
use crate::world::World;
use crate::{Error, ImageId, Result, UserId};

pub const MIN_SERVICES: u32 = 2;
pub const MAX_SERVICES: u32 = 4;
pub const MIN_RETAIN_PERCENT: u32 = 30;
pub const MAX_RETAIN_PERCENT: u32 = 70;

const MAX_ATTEMPTS: u32 = 64;

/// The random choices behind one user's sparse history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryDraw {
    /// Number of service groups joined.
    pub services: u32,
    /// Percent of each joined group's images that were seen.
    pub retain_percent: u32,
    /// Joined groups, in draw order.
    pub groups: Vec<usize>,
    /// Number of images available in the joined groups.
    pub available_images: usize,
    /// Seen images, ascending.
    pub images: Vec<ImageId>,
    /// Which substream produced the draw (0 unless a draw came out empty).
    pub attempt: u32,
}

impl HistoryDraw {
    pub fn retained_fraction(&self) -> f64 {
        if self.available_images == 0 {
            0.0
        } else {
            self.images.len() as f64 / self.available_images as f64
        }
    }
}

/// Draws a sample of `amount` distinct indices in `0..len`, in draw order.
pub(crate) fn sample_indices<R: Rng>(rng: &mut R, len: usize, amount: usize) -> Vec<usize> {
    index::sample(rng, len, amount).into_vec()
}

/// Draws groups and images for `user`. Deterministic in `(seed, user)`.
pub fn draw_history(world: &World, user: UserId, seed: u64) -> Result<HistoryDraw> {
    let groups = world.num_groups();
    if groups < 2 {
        return Err(Error::Config(
            "sparse histories need a world with at least 2 groups".into(),
        ));
    }
    if user >= world.num_users() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: user,
            len: world.num_users(),
        });
    }
    let max_services = MAX_SERVICES.min(groups as u32);
    let members: Vec<Vec<ImageId>> = (0..groups).map(|g| world.group_images(g)).collect();
    for attempt in 0..MAX_ATTEMPTS {
        let stream = (user as u64) | (u64::from(attempt) << 40);
        let mut rng = rng::substream(seed, Domain::Sparsify, stream);
        let services = rng.gen_range(MIN_SERVICES..=max_services);
        let retain_percent = rng.gen_range(MIN_RETAIN_PERCENT..=MAX_RETAIN_PERCENT);
        let chosen: Vec<usize> = sample_indices(&mut rng, groups, services as usize);
        let mut images = Vec::new();
        let mut available = 0;
        for &g in &chosen {
            let pool = &members[g];
            available += pool.len();
            // Round half up: keep = ⌊(len·pct + 50) / 100⌋.
            let keep = (pool.len() * retain_percent as usize + 50) / 100;
            for i in sample_indices(&mut rng, pool.len(), keep) {
                images.push(pool[i]);
            }
        }
        if images.is_empty() {
            continue;
        }
        images.sort_unstable();
        return Ok(HistoryDraw {
            services,
            retain_percent,
            groups: chosen,
            available_images: available,
            images,
            attempt,
        });
    }
    Err(Error::SparsifyExhausted {
        user,
        attempts: MAX_ATTEMPTS,
    })
}

/// Sparse records for one user together with the draw that produced them.
pub fn sparsify_detailed(
    world: &World,
    user: UserId,
    seed: u64,
) -> Result<(HistoryDraw, SparseAttentionRecords)> {
    let draw = draw_history(world, user, seed)?;
    let raw = attention_values(world, user, &draw.images)?;
    let mut records = SparseAttentionRecords::new(world.num_users(), world.num_objects());
    for (object, level) in quantize_levels(&raw) {
        records.insert(user, object, level)?;
    }
    Ok((draw, records))
}

/// Sparse records for one user.
pub fn sparsify(world: &World, user: UserId, seed: u64) -> Result<SparseAttentionRecords> {
    sparsify_detailed(world, user, seed).map(|(_, r)| r)
}

/// Sparse records for every user of the world, merged.
pub fn sparsify_all(world: &World, seed: u64) -> Result<SparseAttentionRecords> {
    let mut all = SparseAttentionRecords::new(world.num_users(), world.num_objects());
    for user in 0..world.num_users() {
        all.merge(&sparsify(world, user, seed)?)?;
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::attention_value;
    use crate::world::{generate_world, WorldConfig};

    fn default_world() -> World {
        generate_world(&WorldConfig::default(), 7).unwrap()
    }

    #[test]
    fn draw_ranges_and_subset() {
        let world = default_world();
        for seed in 0..50 {
            let (draw, records) = sparsify_detailed(&world, 3, seed).unwrap();
            assert!((2..=4).contains(&draw.services));
            assert!((30..=70).contains(&draw.retain_percent));
            assert_eq!(draw.groups.len(), draw.services as usize);
            let f = draw.retained_fraction();
            assert!((0.29..=0.71).contains(&f), "{f}");
            let mut present = alloc::vec![false; world.num_objects()];
            for &id in &draw.images {
                assert!(draw.groups.contains(&world.image(id).unwrap().group));
                for &(o, _) in &world.image(id).unwrap().composition {
                    present[o] = true;
                }
            }
            for (u, o, _) in records.iter() {
                assert_eq!(u, 3);
                assert!(present[o]);
            }
            assert_eq!(records.len(), present.iter().filter(|p| **p).count());
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let world = default_world();
        assert_eq!(sparsify(&world, 0, 9).unwrap(), sparsify(&world, 0, 9).unwrap());
        assert_ne!(sparsify(&world, 0, 9).unwrap(), sparsify(&world, 0, 10).unwrap());
    }

    #[test]
    fn records_are_sparse() {
        let world = default_world();
        let sparse_users = (0..world.num_users())
            .filter(|&u| sparsify(&world, u, 1).unwrap().len() < world.num_objects())
            .count();
        assert!(sparse_users >= 25, "{sparse_users}");
    }

    #[test]
    fn raw_values_match_ground_truth_when_all_occurrences_seen() {
        // An object whose every occurrence lies in the retained images gets
        // the same raw value as over the whole image set.
        let world = default_world();
        let all: Vec<ImageId> = (0..world.images().len()).collect();
        let (draw, _) = sparsify_detailed(&world, 2, 5).unwrap();
        for o in 0..world.num_objects() {
            let occurrences: Vec<ImageId> = world
                .images()
                .iter()
                .filter(|img| img.pixels_of(o).is_some())
                .map(|img| img.id)
                .collect();
            if occurrences.iter().all(|id| draw.images.contains(id)) {
                assert_eq!(
                    attention_value(&world, 2, &draw.images, o).unwrap(),
                    attention_value(&world, 2, &all, o).unwrap()
                );
            }
        }
        // Also exercise the noisy path on a hand-picked retained superset.
        let noisy = generate_world(
            &WorldConfig {
                gaze_noise: 0.3,
                ..WorldConfig::default()
            },
            7,
        )
        .unwrap();
        let o = 17;
        let occ: Vec<ImageId> = noisy
            .images()
            .iter()
            .filter(|img| img.pixels_of(o).is_some())
            .map(|img| img.id)
            .collect();
        let mut superset = occ.clone();
        superset.extend([0usize, 1, 2].iter().filter(|i| !occ.contains(i)));
        superset.sort_unstable();
        assert_eq!(
            attention_value(&noisy, 4, &superset, o).unwrap(),
            attention_value(&noisy, 4, &all, o).unwrap()
        );
    }

    #[test]
    fn expected_retained_images_at_upper_corner() {
        // Among draws with 4 services at 70%, exactly 4·200·0.7 = 560 images.
        let world = default_world();
        let mut seen = 0;
        for seed in 0..400 {
            let draw = draw_history(&world, 0, seed).unwrap();
            if draw.services == 4 && draw.retain_percent == 70 {
                assert_eq!(draw.images.len(), 560);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn single_group_world_rejected() {
        let world = generate_world(
            &WorldConfig {
                num_groups: 1,
                ..WorldConfig::default()
            },
            1,
        )
        .unwrap();
        assert!(matches!(sparsify(&world, 0, 0), Err(Error::Config(_))));
    }
}
