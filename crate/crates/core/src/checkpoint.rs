//! Single-file JSON model checkpoints.
//!
//! Floats are written in shortest round-trip form and parsed back exactly,
//! so save → load reproduces every parameter bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, write_string, Error, Result};
use crate::kg::KnowledgeGraph;
use crate::pipeline::TrainConfig;
use crate::rcnn::RcnnModel;
use crate::selector::SelectorParams;

pub const FORMAT: &str = "kgqa-model";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub dim: usize,
    /// Relation names by id; must match the graph the model is used with.
    pub relations: Vec<String>,
    /// Word-vector file used in training, as given on the command line.
    pub word_vectors: Option<String>,
    pub config: TrainConfig,
    pub rcnn: RcnnModel,
    pub selector: SelectorParams,
}

impl ModelFile {
    pub fn new(
        kg: &KnowledgeGraph,
        config: TrainConfig,
        rcnn: RcnnModel,
        selector: SelectorParams,
        word_vectors: Option<String>,
    ) -> Self {
        Self {
            format: FORMAT.to_string(),
            version: VERSION,
            seed: config.selector_training.seed,
            dim: selector.output_dim(),
            relations: kg.relation_names().to_vec(),
            word_vectors,
            config,
            rcnn,
            selector,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ModelFile = serde_json::from_str(text)?;
        if model.format != FORMAT {
            return Err(Error::Input(format!("not a model file (format `{}`)", model.format)));
        }
        if model.version != VERSION {
            return Err(Error::Input(format!(
                "model version {} is not supported (expected {VERSION})",
                model.version
            )));
        }
        Ok(model)
    }

    /// Fails unless the graph has exactly the relations the model was trained on.
    pub fn check_graph(&self, kg: &KnowledgeGraph) -> Result<()> {
        if kg.relation_names() != self.relations.as_slice() {
            return Err(Error::Config(format!(
                "model relations {:?} differ from graph relations {:?}",
                self.relations,
                kg.relation_names()
            )));
        }
        Ok(())
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &ModelFile) -> Result<()> {
    write_string(path, &model.to_json()?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    ModelFile::from_json(&read_to_string(path)?)
}
