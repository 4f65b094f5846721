//! Stage one: per-column role probabilities and candidate selection.

mod candidates;
pub mod forest;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{column_features, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::ingest::EventLog;
use crate::roles::{Combo, Role};

pub use candidates::{select_candidates, Candidate, CandidateSet, DEFAULT_TIE_EPSILON};
pub use forest::{DecisionTree, Hyperparameters, TreeNode};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training corpus has no {kind} examples for role {role}")]
    MissingClass { role: Role, kind: &'static str },
    #[error("model schema mismatch: {0}")]
    Schema(String),
    #[error("model I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid hyperparameters: {0}")]
    Hyperparameters(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingEntry {
    pub features: FeatureVector,
    /// At most one role per column; `None` is a negative for all three.
    pub role: Option<Role>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingCorpus {
    pub entries: Vec<TrainingEntry>,
    pub provenance: Vec<String>,
}

impl TrainingCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Featurize the first `n_rows` rows of every column of a labeled log.
    pub fn add_log(&mut self, log: &EventLog, labels: &Combo, n_rows: usize) {
        let log = log.truncated(n_rows);
        for column in log.columns() {
            let features = column_features(&column.cells).expect("log has rows");
            self.entries.push(TrainingEntry {
                features,
                role: labels.role_of(&column.name),
            });
        }
        self.provenance.push(log.source().to_string());
    }

    pub fn positives(&self, role: Role) -> usize {
        self.entries.iter().filter(|e| e.role == Some(role)).count()
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.entries.is_empty() {
            return Err(ClassifierError::EmptyCorpus);
        }
        for role in Role::ALL {
            let pos = self.positives(role);
            if pos == 0 {
                return Err(ClassifierError::MissingClass { role, kind: "positive" });
            }
            if pos == self.entries.len() {
                return Err(ClassifierError::MissingClass { role, kind: "negative" });
            }
        }
        Ok(())
    }
}

/// Probability of a column playing each role. The three values are independent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RoleProbabilities {
    pub case: f64,
    pub activity: f64,
    pub timestamp: f64,
}

impl RoleProbabilities {
    pub fn get(&self, role: Role) -> f64 {
        match role {
            Role::Case => self.case,
            Role::Activity => self.activity,
            Role::Timestamp => self.timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProbabilities {
    pub column: String,
    pub probabilities: RoleProbabilities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forests {
    pub case: Vec<DecisionTree>,
    pub activity: Vec<DecisionTree>,
    pub timestamp: Vec<DecisionTree>,
}

impl Forests {
    pub fn get(&self, role: Role) -> &[DecisionTree] {
        match role {
            Role::Case => &self.case,
            Role::Activity => &self.activity,
            Role::Timestamp => &self.timestamp,
        }
    }
}

/// Three binary random forests sharing one feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleModel {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
    pub forests: Forests,
}

impl RoleModel {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(ClassifierError::Schema(format!(
                "schema_version {} (expected {MODEL_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.feature_names.len() != FEATURE_COUNT
            || self.feature_names.iter().zip(FEATURE_NAMES).any(|(a, b)| a != b)
        {
            return Err(ClassifierError::Schema(format!(
                "feature names {:?} do not match {:?}",
                self.feature_names, FEATURE_NAMES
            )));
        }
        for role in Role::ALL {
            let trees = self.forests.get(role);
            if trees.is_empty() {
                return Err(ClassifierError::Schema(format!("forest for {role} is empty")));
            }
            if !trees.iter().all(DecisionTree::is_well_formed) {
                return Err(ClassifierError::Schema(format!("malformed tree in {role} forest")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let model: RoleModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Train one forest per role. Identical corpus, hyperparameters and seed give an identical model.
pub fn train(corpus: &TrainingCorpus, hyper: &Hyperparameters, seed: u64) -> Result<RoleModel, ClassifierError> {
    corpus.validate()?;
    hyper.validate().map_err(ClassifierError::Hyperparameters)?;
    let rows: Vec<forest::Row> = corpus.entries.iter().map(|e| e.features.to_array()).collect();
    let mut per_role: BTreeMap<Role, Vec<DecisionTree>> = BTreeMap::new();
    for role in Role::ALL {
        let labels: Vec<bool> = corpus.entries.iter().map(|e| e.role == Some(role)).collect();
        let trees = forest::train_forest(&rows, &labels, hyper, seed, role.index() as u64);
        per_role.insert(role, trees);
    }
    let model = RoleModel {
        schema_version: MODEL_SCHEMA_VERSION,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        seed,
        hyperparameters: *hyper,
        forests: Forests {
            case: per_role.remove(&Role::Case).unwrap_or_default(),
            activity: per_role.remove(&Role::Activity).unwrap_or_default(),
            timestamp: per_role.remove(&Role::Timestamp).unwrap_or_default(),
        },
    };
    Ok(model)
}

/// Tree-vote fraction per role.
pub fn predict(model: &RoleModel, fv: &FeatureVector) -> RoleProbabilities {
    let row = fv.to_array();
    RoleProbabilities {
        case: forest::vote_fraction(&model.forests.case, &row),
        activity: forest::vote_fraction(&model.forests.activity, &row),
        timestamp: forest::vote_fraction(&model.forests.timestamp, &row),
    }
}
