use super::{check_version, open, save_with};
use crate::Result;
use attnalloc_core::predict::FactorModel;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const MODEL_VERSION: &str = "attn-mf/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: String,
    num_users: usize,
    num_objects: usize,
    factors: usize,
    mu: f64,
    user_bias: Vec<f64>,
    object_bias: Vec<f64>,
    /// Row-major, `num_users × factors`.
    user_factors: Vec<f64>,
    /// Row-major, `num_objects × factors`.
    object_factors: Vec<f64>,
}

pub fn write_model<W: Write>(mut w: W, model: &FactorModel) -> Result<()> {
    let file = ModelFile {
        version: MODEL_VERSION.to_owned(),
        num_users: model.num_users,
        num_objects: model.num_objects,
        factors: model.factors,
        mu: model.mu,
        user_bias: model.user_bias.clone(),
        object_bias: model.object_bias.clone(),
        user_factors: model.user_factors.clone(),
        object_factors: model.object_factors.clone(),
    };
    serde_json::to_writer_pretty(&mut w, &file)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_model<R: Read>(r: R) -> Result<FactorModel> {
    let file: ModelFile = serde_json::from_reader(r)?;
    check_version(&file.version, MODEL_VERSION)?;
    let model = FactorModel {
        num_users: file.num_users,
        num_objects: file.num_objects,
        factors: file.factors,
        mu: file.mu,
        user_bias: file.user_bias,
        object_bias: file.object_bias,
        user_factors: file.user_factors,
        object_factors: file.object_factors,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(path: &Path, model: &FactorModel) -> Result<()> {
    save_with(path, |w| write_model(w, model))
}

pub fn load_model(path: &Path) -> Result<FactorModel> {
    read_model(open(path)?)
}
