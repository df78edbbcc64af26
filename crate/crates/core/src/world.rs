//! Synthetic attention world.
//!
//! A world holds an object catalog, scene images split into same-style
//! groups, and a dense user × object interest matrix. Interest follows a
//! low-rank latent model squashed into `(0, 1]` with multiplicative noise, so
//! the attention levels derived from it are learnable by matrix
//! factorization. Each group over-represents its own disjoint slice of the
//! catalog, which makes the service groups genuinely different, and a
//! Zipf-like base popularity leaves rare objects unseen in partial histories.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::rng::{self, Domain};
use crate::{Error, ImageId, ObjectId, Result, UserId};

pub const DEFAULT_IMAGE_HEIGHT: u32 = 360;
pub const DEFAULT_IMAGE_WIDTH: u32 = 640;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub num_users: usize,
    pub num_objects: usize,
    pub num_images: usize,
    pub num_groups: usize,
    /// Rank of the latent interest model.
    pub latent_rank: usize,
    /// Multiplicative interest noise half-width; factors lie in `[1-η, 1+η]`.
    pub interest_noise: f64,
    /// Slope applied to the unit-variance latent score before the logistic.
    pub interest_gain: f64,
    /// Shift applied to the latent score before the logistic. Negative values
    /// make high interest rare.
    pub interest_offset: f64,
    /// Sampling weight multiplier for objects favoured by an image's group.
    pub group_bias: f64,
    /// Exponent of the Zipf-like base object popularity (0 = uniform).
    pub popularity_exponent: f64,
    pub min_objects_per_image: usize,
    pub max_objects_per_image: usize,
    pub image_height: u32,
    pub image_width: u32,
    /// Half-width of the per-occurrence gaze noise; 0 means gaze mass is
    /// exactly interest × pixel count.
    pub gaze_noise: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            num_users: 30,
            num_objects: 96,
            num_images: 1000,
            num_groups: 5,
            latent_rank: 6,
            interest_noise: 0.1,
            interest_gain: 2.0,
            interest_offset: -1.5,
            group_bias: 3.0,
            popularity_exponent: 2.0,
            min_objects_per_image: 3,
            max_objects_per_image: 12,
            image_height: DEFAULT_IMAGE_HEIGHT,
            image_width: DEFAULT_IMAGE_WIDTH,
            gaze_noise: 0.0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_users", self.num_users),
            ("num_objects", self.num_objects),
            ("num_images", self.num_images),
            ("num_groups", self.num_groups),
            ("latent_rank", self.latent_rank),
            ("min_objects_per_image", self.min_objects_per_image),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.max_objects_per_image < self.min_objects_per_image {
            return Err(Error::Config(
                "max_objects_per_image must be >= min_objects_per_image".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.interest_noise) {
            return Err(Error::Config("interest_noise must lie in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.gaze_noise) {
            return Err(Error::Config("gaze_noise must lie in [0, 1)".into()));
        }
        if !(self.group_bias >= 1.0 && self.group_bias.is_finite()) {
            return Err(Error::Config("group_bias must be a finite value >= 1".into()));
        }
        if !(self.popularity_exponent >= 0.0 && self.popularity_exponent.is_finite()) {
            return Err(Error::Config("popularity_exponent must be finite and >= 0".into()));
        }
        if !(self.interest_gain.is_finite() && self.interest_offset.is_finite()) {
            return Err(Error::Config("interest gain and offset must be finite".into()));
        }
        let pixels = u64::from(self.image_height) * u64::from(self.image_width);
        let most = self.max_objects_per_image.min(self.num_objects) as u64;
        if pixels < 4 * most {
            return Err(Error::Config("image too small for the object count".into()));
        }
        Ok(())
    }

    pub fn pixel_budget(&self) -> u64 {
        u64::from(self.image_height) * u64::from(self.image_width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectCatalog {
    labels: Vec<String>,
}

impl ObjectCatalog {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidWorld("object catalog is empty".into()));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidWorld(format!("object {i} has an empty label")));
            }
            if labels[..i].contains(label) {
                return Err(Error::InvalidWorld(format!("duplicate object label {label:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// `object_00`, `object_01`, ...
    pub fn numbered(count: usize) -> Self {
        let width = if count > 100 { 3 } else { 2 };
        let labels = (0..count).map(|i| format!("object_{i:0width$}")).collect();
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// One segmented scene image: which objects it shows and how many pixels each
/// covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneImage {
    pub id: ImageId,
    pub group: usize,
    pub composition: Vec<(ObjectId, u32)>,
}

impl SceneImage {
    pub fn pixels_of(&self, object: ObjectId) -> Option<u32> {
        self.composition
            .iter()
            .find(|(o, _)| *o == object)
            .map(|&(_, px)| px)
    }

    pub fn total_pixels(&self) -> u64 {
        self.composition.iter().map(|&(_, px)| u64::from(px)).sum()
    }
}

/// Dense row-major `num_users × num_objects` interest in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterestMatrix {
    num_users: usize,
    num_objects: usize,
    values: Vec<f64>,
}

impl InterestMatrix {
    pub fn new(num_users: usize, num_objects: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_users * num_objects {
            return Err(Error::InvalidWorld(format!(
                "interest matrix has {} entries, expected {}",
                values.len(),
                num_users * num_objects
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(Error::InvalidWorld(format!("interest value {v} outside (0, 1]")));
        }
        Ok(Self {
            num_users,
            num_objects,
            values,
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    pub fn get(&self, user: UserId, object: ObjectId) -> f64 {
        self.values[user * self.num_objects + object]
    }

    pub fn row(&self, user: UserId) -> &[f64] {
        &self.values[user * self.num_objects..(user + 1) * self.num_objects]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Ground truth for the simulation. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    catalog: ObjectCatalog,
    images: Vec<SceneImage>,
    interest: InterestMatrix,
    num_groups: usize,
    pixel_budget: u64,
    gaze_noise: f64,
    gaze_seed: u64,
}

/// Raw parts of a world, as read from or written to an interchange file.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldParts {
    pub catalog: ObjectCatalog,
    pub images: Vec<SceneImage>,
    pub interest: InterestMatrix,
    pub num_groups: usize,
    pub pixel_budget: u64,
    pub gaze_noise: f64,
    pub gaze_seed: u64,
}

impl World {
    /// Assembles a world from parts, checking every structural invariant.
    pub fn from_parts(parts: WorldParts) -> Result<Self> {
        let WorldParts {
            catalog,
            images,
            interest,
            num_groups,
            pixel_budget,
            gaze_noise,
            gaze_seed,
        } = parts;
        let n_obj = catalog.len();
        if interest.num_objects() != n_obj {
            return Err(Error::InvalidWorld(format!(
                "interest matrix covers {} objects, catalog has {n_obj}",
                interest.num_objects()
            )));
        }
        if interest.num_users() == 0 {
            return Err(Error::InvalidWorld("world has no users".into()));
        }
        if images.is_empty() || num_groups == 0 {
            return Err(Error::InvalidWorld("world needs images and groups".into()));
        }
        if !(0.0..1.0).contains(&gaze_noise) {
            return Err(Error::InvalidWorld("gaze_noise outside [0, 1)".into()));
        }
        let mut seen = vec![false; n_obj];
        for (idx, image) in images.iter().enumerate() {
            if image.id != idx {
                return Err(Error::InvalidWorld(format!(
                    "image at position {idx} has id {}",
                    image.id
                )));
            }
            if image.group >= num_groups {
                return Err(Error::InvalidWorld(format!(
                    "image {idx} belongs to group {} of {num_groups}",
                    image.group
                )));
            }
            if image.composition.is_empty() {
                return Err(Error::InvalidWorld(format!("image {idx} has no objects")));
            }
            for (k, &(object, px)) in image.composition.iter().enumerate() {
                if object >= n_obj {
                    return Err(Error::InvalidWorld(format!(
                        "image {idx} references unknown object {object}"
                    )));
                }
                if px == 0 {
                    return Err(Error::InvalidWorld(format!(
                        "image {idx} gives object {object} zero pixels"
                    )));
                }
                if image.composition[..k].iter().any(|&(o, _)| o == object) {
                    return Err(Error::InvalidWorld(format!(
                        "image {idx} lists object {object} twice"
                    )));
                }
                seen[object] = true;
            }
            if image.total_pixels() > pixel_budget {
                return Err(Error::InvalidWorld(format!(
                    "image {idx} covers more than {pixel_budget} pixels"
                )));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidWorld(format!(
                "object {missing} appears in no image"
            )));
        }
        Ok(Self {
            catalog,
            images,
            interest,
            num_groups,
            pixel_budget,
            gaze_noise,
            gaze_seed,
        })
    }

    pub fn into_parts(self) -> WorldParts {
        WorldParts {
            catalog: self.catalog,
            images: self.images,
            interest: self.interest,
            num_groups: self.num_groups,
            pixel_budget: self.pixel_budget,
            gaze_noise: self.gaze_noise,
            gaze_seed: self.gaze_seed,
        }
    }

    pub fn catalog(&self) -> &ObjectCatalog {
        &self.catalog
    }

    pub fn images(&self) -> &[SceneImage] {
        &self.images
    }

    pub fn image(&self, id: ImageId) -> Option<&SceneImage> {
        self.images.get(id)
    }

    pub fn interest(&self) -> &InterestMatrix {
        &self.interest
    }

    pub fn num_users(&self) -> usize {
        self.interest.num_users()
    }

    pub fn num_objects(&self) -> usize {
        self.catalog.len()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn pixel_budget(&self) -> u64 {
        self.pixel_budget
    }

    pub fn gaze_noise(&self) -> f64 {
        self.gaze_noise
    }

    pub fn gaze_seed(&self) -> u64 {
        self.gaze_seed
    }

    /// Image ids of one group, ascending.
    pub fn group_images(&self, group: usize) -> Vec<ImageId> {
        self.images
            .iter()
            .filter(|img| img.group == group)
            .map(|img| img.id)
            .collect()
    }

    /// Multiplier applied to `interest × pixels` to get the gaze mass of one
    /// occurrence. Exactly 1 when gaze noise is off.
    pub fn gaze_factor(&self, user: UserId, image: ImageId, object: ObjectId) -> f64 {
        if self.gaze_noise == 0.0 {
            return 1.0;
        }
        let u = rng::hash_unit(self.gaze_seed, user as u64, image as u64, object as u64);
        1.0 + self.gaze_noise * (2.0 * u - 1.0)
    }
}

/// Group that owns image `index` when `n` images are split into `groups`
/// contiguous blocks of (near) equal size.
pub fn group_of(index: usize, n: usize, groups: usize) -> usize {
    index * groups / n
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Builds a world deterministically from `seed`.
pub fn generate_world(config: &WorldConfig, seed: u64) -> Result<World> {
    config.validate()?;
    let mut rng = rng::substream(seed, Domain::World, 0);
    let n_obj = config.num_objects;
    let n_users = config.num_users;
    let groups = config.num_groups;
    let rank = config.latent_rank;

    // Latent interest: unit-variance uniform factors, score scaled to unit variance.
    let half_width = libm::sqrt(3.0);
    let mut draw_factors = |rows: usize| -> Vec<f64> {
        (0..rows * rank)
            .map(|_| rng.gen_range(-half_width..half_width))
            .collect()
    };
    let user_factors = draw_factors(n_users);
    let object_factors = draw_factors(n_obj);
    let norm = 1.0 / libm::sqrt(rank as f64);
    let mut interest = Vec::with_capacity(n_users * n_obj);
    for u in 0..n_users {
        let p = &user_factors[u * rank..(u + 1) * rank];
        for o in 0..n_obj {
            let q = &object_factors[o * rank..(o + 1) * rank];
            let score: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() * norm;
            let base = logistic(config.interest_gain * score + config.interest_offset);
            let noise = if config.interest_noise > 0.0 {
                1.0 + rng.gen_range(-config.interest_noise..=config.interest_noise)
            } else {
                1.0
            };
            interest.push((base * noise).clamp(f64::MIN_POSITIVE, 1.0));
        }
    }
    let interest = InterestMatrix::new(n_users, n_obj, interest)?;

    // Base popularity follows a seeded permutation of the catalog so rarity
    // is unrelated to object ids and group membership.
    let mut popularity_rank: Vec<usize> = (0..n_obj).collect();
    for i in (1..n_obj).rev() {
        let j = rng.gen_range(0..=i as u32) as usize;
        popularity_rank.swap(i, j);
    }
    let base_weight: Vec<f64> = popularity_rank
        .iter()
        .map(|&r| libm::pow(1.0 + r as f64, -config.popularity_exponent))
        .collect();

    let budget = config.pixel_budget();
    let min_k = config.min_objects_per_image.min(n_obj);
    let max_k = config.max_objects_per_image.min(n_obj);
    let mut images = Vec::with_capacity(config.num_images);
    let mut weights = vec![0.0; n_obj];
    let mut chosen: Vec<ObjectId> = Vec::with_capacity(max_k);
    for id in 0..config.num_images {
        let group = group_of(id, config.num_images, groups);
        for (o, w) in weights.iter_mut().enumerate() {
            let bias = if o % groups == group { config.group_bias } else { 1.0 };
            *w = base_weight[o] * bias;
        }
        let k = rng.gen_range(min_k as u32..=max_k as u32) as usize;
        chosen.clear();
        // Weighted sampling without replacement.
        for _ in 0..k {
            let total: f64 = weights.iter().sum();
            let mut target = rng.gen_range(0.0..total);
            let mut pick = n_obj - 1;
            for (o, &w) in weights.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = o;
                    break;
                }
                target -= w;
            }
            while weights[pick] == 0.0 {
                pick -= 1;
            }
            weights[pick] = 0.0;
            chosen.push(pick);
        }
        let coverage = rng.gen_range(0.5..0.95);
        let shares: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let share_total: f64 = shares.iter().sum();
        let composition = chosen
            .iter()
            .zip(&shares)
            .map(|(&o, &s)| {
                let px = libm::floor(budget as f64 * coverage * s / share_total) as u32;
                (o, px.max(1))
            })
            .collect();
        images.push(SceneImage {
            id,
            group,
            composition,
        });
    }

    // Every object must occur somewhere; place any missing one into an image
    // of the group that favours it, taking pixels from that image's largest
    // object.
    let mut present = vec![false; n_obj];
    for img in &images {
        for &(o, _) in &img.composition {
            present[o] = true;
        }
    }
    for object in 0..n_obj {
        if present[object] {
            continue;
        }
        let home = object % groups;
        let candidates: Vec<ImageId> = images
            .iter()
            .filter(|img| img.group == home)
            .map(|img| img.id)
            .collect();
        let target = if candidates.is_empty() {
            rng.gen_range(0..images.len() as u32) as usize
        } else {
            candidates[rng.gen_range(0..candidates.len() as u32) as usize]
        };
        let image = &mut images[target];
        let free = budget - image.total_pixels();
        let largest = image
            .composition
            .iter_mut()
            .max_by_key(|(_, px)| *px)
            .expect("images are never empty");
        let px = if largest.1 >= 2 {
            let give = largest.1 / 2;
            largest.1 -= give;
            give
        } else if free >= 1 {
            1
        } else {
            return Err(Error::Config("no pixel room to place every object".into()));
        };
        image.composition.push((object, px));
        present[object] = true;
    }

    let catalog = ObjectCatalog::numbered(n_obj);
    let gaze_seed = rng::derive_seed(seed, Domain::Gaze);
    World::from_parts(WorldParts {
        catalog,
        images,
        interest,
        num_groups: groups,
        pixel_budget: budget,
        gaze_noise: config.gaze_noise,
        gaze_seed,
    })
}
