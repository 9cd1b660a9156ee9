//! JSON model files. Every number is written with 17 significant digits so
//! a reload reproduces each parameter bit for bit.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use super::{EnsembleModel, MlpModel, RbfModel};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    mlp: MlpSection,
    rbf: RbfSection,
    threshold: f64,
}

#[derive(Serialize, Deserialize)]
struct MlpSection {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RbfSection {
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    output_weights: Vec<f64>,
    bias: f64,
}

struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn model_to_json(model: &EnsembleModel) -> Result<String> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        mlp: MlpSection {
            layer_sizes: model.mlp.layer_sizes().to_vec(),
            weights: model.mlp.weights().to_vec(),
            biases: model.mlp.biases().to_vec(),
        },
        rbf: RbfSection {
            centers: model.rbf.centers().to_vec(),
            widths: model.rbf.widths().to_vec(),
            output_weights: model.rbf.output_weights().to_vec(),
            bias: model.rbf.bias(),
        },
        threshold: model.threshold,
    };
    let params = file
        .mlp
        .weights
        .iter()
        .flatten()
        .flatten()
        .chain(file.mlp.biases.iter().flatten())
        .chain(file.rbf.centers.iter().flatten())
        .chain(&file.rbf.widths)
        .chain(&file.rbf.output_weights)
        .chain([&file.rbf.bias, &file.threshold]);
    if params.into_iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("model has non-finite parameters".into()));
    }
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    file.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn model_from_json(text: &str) -> Result<EnsembleModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::CorruptModel(format!(
            "unsupported format_version {}",
            file.format_version
        )));
    }
    let corrupt = |e: Error| Error::CorruptModel(e.to_string());
    let mlp = MlpModel::from_parts(&file.mlp.layer_sizes, file.mlp.weights, file.mlp.biases).map_err(corrupt)?;
    let rbf =
        RbfModel::new(file.rbf.centers, file.rbf.widths, file.rbf.output_weights, file.rbf.bias).map_err(corrupt)?;
    let mut model = EnsembleModel::new(mlp, rbf).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if !file.threshold.is_finite() {
        return Err(Error::CorruptModel("non-finite threshold".into()));
    }
    model.threshold = file.threshold;
    Ok(model)
}

pub fn save_model(model: &EnsembleModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EnsembleModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
