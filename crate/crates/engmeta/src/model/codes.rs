use std::sync::OnceLock;

use serde::Deserialize;

/// The closed list of processing-step types.
pub const STEP_TYPES: [&str; 4] = ["data generation", "post processing", "analysis", "visualization"];

/// Supported file checksum algorithms and their hex digest lengths.
pub const CHECKSUM_ALGORITHMS: [(&str, usize); 2] = [("MD5", 32), ("SHA-256", 64)];

const BUNDLED: &str = include_str!("../../data/codelists.toml");

/// Controlled vocabularies checked by validation, loaded from an editable
/// TOML table (`data/codelists.toml` is bundled).
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CodeLists {
    pub role: Vec<String>,
    pub title_type: Vec<String>,
    pub description_type: Vec<String>,
    pub date_type: Vec<String>,
    pub related_identifier_type: Vec<String>,
    pub relation_type: Vec<String>,
    pub resource_type_general: Vec<String>,
    pub funder_identifier_type: Vec<String>,
}

impl CodeLists {
    pub fn bundled() -> &'static CodeLists {
        static CODES: OnceLock<CodeLists> = OnceLock::new();
        CODES.get_or_init(|| CodeLists::from_toml(BUNDLED).expect("bundled code lists parse"))
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

pub fn checksum_length(algorithm: &str) -> Option<usize> {
    CHECKSUM_ALGORITHMS.iter().find(|(a, _)| *a == algorithm).map(|(_, n)| *n)
}
