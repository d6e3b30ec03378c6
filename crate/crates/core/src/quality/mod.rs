//! OER quality prediction: the property random forest with its alternate
//! models, the metadata model, and the threshold filter.

mod filter;
mod forest;
mod metadata;
mod properties;
mod registry;
pub mod training_data;
pub mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use filter::{quality_filter, FilterOutcome, RemovalReason, RemovedRecord, DEFAULT_QUALITY_THRESHOLD};
pub use forest::{
    binary_metrics, predict_proba, train_forest, Dataset, FeatureSource, ForestModel, ForestParams, TrainingMetrics,
};
pub use metadata::{
    metadata_completeness_score, metadata_feature_names, CompletenessWeights, MetadataFeatures, MetadataRecord,
    MetadataTable, COMPLETENESS, METADATA_FIELDS,
};
pub use properties::{PropertyFeatures, PropertyTable, OPTIONAL_PROPERTY_FEATURES, PROPERTY_FEATURES};
pub use registry::{lattice_subsets, select_alternate_model, train_property_registry, ModelRegistry};

use crate::error::{Error, Result};
use crate::fsutil::{read_json, write_json_atomic};
use crate::model::OerRecord;
use crate::scalar::Scalar;

/// `(quality_meta, quality_prop)` for one record.
pub fn quality_scores<T: Scalar>(
    oer: &OerRecord,
    prop_registry: &ModelRegistry<T>,
    meta_model: &ForestModel<T>,
    weights: &CompletenessWeights,
) -> Result<(T, T)> {
    let unscorable = |e: Error| Error::Unscorable(oer.id.clone(), e.to_string());
    let md = MetadataFeatures::new(MetadataRecord::from_record(oer), weights)?;
    let quality_meta = predict_proba(meta_model, &md).map_err(unscorable)?;
    let props = PropertyFeatures::from_record(oer).map_err(unscorable)?;
    let model = select_alternate_model(prop_registry, &props.available()).map_err(unscorable)?;
    let quality_prop = predict_proba(model, &props).map_err(unscorable)?;
    Ok((quality_meta, quality_prop))
}

/// Both trained quality models plus the completeness weights the metadata
/// model was trained with.
///
/// On disk: `<dir>/properties.json` holds the [`ModelRegistry`],
/// `<dir>/metadata.json` holds `{ "completeness_weights": [...], "model": {...} }`.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityModels<T> {
    pub properties: ModelRegistry<T>,
    pub metadata: ForestModel<T>,
    pub completeness_weights: CompletenessWeights,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct MetadataFile<T> {
    completeness_weights: CompletenessWeights,
    model: ForestModel<T>,
}

impl<T: Scalar> QualityModels<T> {
    pub fn train(
        properties: &PropertyTable<T>,
        metadata: &MetadataTable,
        weights: CompletenessWeights,
        params: &ForestParams,
    ) -> Result<Self> {
        weights.validate()?;
        let registry = train_property_registry(properties, params)?;
        let meta = train_forest(&metadata.to_dataset(&weights)?, params)?;
        Ok(QualityModels { properties: registry, metadata: meta, completeness_weights: weights })
    }

    pub fn score(&self, oer: &OerRecord) -> Result<(T, T)> {
        quality_scores(oer, &self.properties, &self.metadata, &self.completeness_weights)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json_atomic(&dir.join("properties.json"), &self.properties)?;
        let file = MetadataFile { completeness_weights: self.completeness_weights, model: self.metadata.clone() };
        write_json_atomic(&dir.join("metadata.json"), &file)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let properties: ModelRegistry<T> = read_json(&dir.join("properties.json"))?;
        properties.validate()?;
        let file: MetadataFile<T> = read_json(&dir.join("metadata.json"))?;
        file.model.validate()?;
        file.completeness_weights.validate()?;
        if file.model.feature_set != metadata_feature_names() {
            return Err(Error::InvalidModel(format!(
                "metadata model features {:?} do not match the metadata schema",
                file.model.feature_set
            )));
        }
        Ok(QualityModels { properties, metadata: file.model, completeness_weights: file.completeness_weights })
    }
}
