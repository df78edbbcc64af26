use super::{check_version, open, save_with};
use crate::Result;
use attnalloc_core::world::{InterestMatrix, ObjectCatalog, SceneImage, World, WorldParts};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const WORLD_VERSION: &str = "uoal-sim/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldFile {
    version: String,
    num_users: usize,
    num_objects: usize,
    num_groups: usize,
    pixel_budget: u64,
    gaze_noise: f64,
    gaze_seed: u64,
    catalog: Vec<String>,
    images: Vec<ImageEntry>,
    /// Row-major, users by objects.
    interest: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageEntry {
    id: usize,
    group: usize,
    composition: Vec<(usize, u32)>,
}

pub fn write_world<W: Write>(mut w: W, world: &World) -> Result<()> {
    let file = WorldFile {
        version: WORLD_VERSION.to_owned(),
        num_users: world.num_users(),
        num_objects: world.num_objects(),
        num_groups: world.num_groups(),
        pixel_budget: world.pixel_budget(),
        gaze_noise: world.gaze_noise(),
        gaze_seed: world.gaze_seed(),
        catalog: world.catalog().labels().to_vec(),
        images: world
            .images()
            .iter()
            .map(|img| ImageEntry {
                id: img.id,
                group: img.group,
                composition: img.composition.clone(),
            })
            .collect(),
        interest: world.interest().values().to_vec(),
    };
    serde_json::to_writer(&mut w, &file)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_world<R: Read>(r: R) -> Result<World> {
    let file: WorldFile = serde_json::from_reader(r)?;
    check_version(&file.version, WORLD_VERSION)?;
    let parts = WorldParts {
        catalog: ObjectCatalog::new(file.catalog)?,
        images: file
            .images
            .into_iter()
            .map(|e| SceneImage {
                id: e.id,
                group: e.group,
                composition: e.composition,
            })
            .collect(),
        interest: InterestMatrix::new(file.num_users, file.num_objects, file.interest)?,
        num_groups: file.num_groups,
        pixel_budget: file.pixel_budget,
        gaze_noise: file.gaze_noise,
        gaze_seed: file.gaze_seed,
    };
    Ok(World::from_parts(parts)?)
}

pub fn save_world(path: &Path, world: &World) -> Result<()> {
    save_with(path, |w| write_world(w, world))
}

pub fn load_world(path: &Path) -> Result<World> {
    read_world(open(path)?)
}
