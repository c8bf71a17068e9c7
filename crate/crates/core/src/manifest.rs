//! Fitting manifests (TOML) and serialized model files (JSON).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aerodb::{
    ingest_file, CoefficientKey, DatabaseModel, DatabaseRecord, GridSpec, MassProperties, ReferenceGeometry,
    UncertaintyModel,
};
use crate::gp::{BasisSpec, OptimizerConfig};
use crate::io::read_dataset;
use crate::mfgp::{LevelSpec, MfgpModel, MfgpRecord};
use crate::Error;

/// Optimizer settings of a manifest. The seed has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub seed: u64,
    pub starts: Option<usize>,
    pub max_evals: Option<usize>,
}

impl OptimizerSection {
    fn config(&self, seed: u64) -> OptimizerConfig {
        let d = OptimizerConfig::default();
        OptimizerConfig {
            seed,
            starts: self.starts.unwrap_or(d.starts),
            max_evals: self.max_evals.unwrap_or(d.max_evals),
            ..d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateLevel {
    pub fidelity: usize,
    pub csv: PathBuf,
    #[serde(default = "one")]
    pub basis_degree: usize,
    #[serde(default)]
    pub trend_degree: usize,
    /// Overrides the manifest-wide optimizer seed for this level.
    pub seed: Option<u64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatabaseLevel {
    pub fidelity: usize,
    pub csv: PathBuf,
    pub uncertainty: UncertaintyModel,
    #[serde(default)]
    pub basis_degree: usize,
    #[serde(default)]
    pub trend_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub key: CoefficientKey,
    pub level: Vec<DatabaseLevel>,
}

/// What to fit: a standalone surrogate or a whole aircraft database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Manifest {
    Surrogate {
        optimizer: OptimizerSection,
        level: Vec<SurrogateLevel>,
    },
    Database {
        optimizer: OptimizerSection,
        #[serde(default)]
        grid: GridSpec,
        #[serde(default)]
        reference: ReferenceGeometry,
        #[serde(default)]
        mass: MassProperties,
        coefficient: Vec<CoefficientEntry>,
    },
}

impl Manifest {
    pub fn parse(text: &str, path: &Path) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config {
            path: path.display().to_string(),
            msg: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::io::IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Fits the manifest; relative CSV paths are resolved against `dir`.
    pub fn fit(&self, dir: &Path) -> Result<FittedModel, Error> {
        match self {
            Manifest::Surrogate { optimizer, level } => fit_surrogate(optimizer, level, dir),
            Manifest::Database {
                optimizer,
                grid,
                reference,
                mass,
                coefficient,
            } => {
                let fitted: Result<Vec<(CoefficientKey, MfgpModel)>, Error> = coefficient
                    .par_iter()
                    .map(|entry| {
                        let cfg = optimizer.config(optimizer.seed);
                        let mut specs = Vec::with_capacity(entry.level.len());
                        let mut levels: Vec<&DatabaseLevel> = entry.level.iter().collect();
                        levels.sort_by_key(|l| l.fidelity);
                        for l in levels {
                            let data = ingest_file(&entry.key, &dir.join(&l.csv), l.uncertainty)?;
                            specs.push(LevelSpec {
                                fidelity: l.fidelity,
                                data,
                                basis: BasisSpec::new(l.basis_degree),
                                trend: BasisSpec::new(l.trend_degree),
                                optimizer: cfg.clone(),
                            });
                        }
                        let m = MfgpModel::build(specs).map_err(|e| crate::aerodb::AeroError::model(&entry.key, e))?;
                        Ok((entry.key, m))
                    })
                    .collect();
                let mut db = DatabaseModel::new(*reference, *mass, grid.clone());
                for (k, m) in fitted? {
                    db.insert(k, m)?;
                }
                Ok(FittedModel::Database(db))
            }
        }
    }
}

fn fit_surrogate(optimizer: &OptimizerSection, levels: &[SurrogateLevel], dir: &Path) -> Result<FittedModel, Error> {
    let mut levels: Vec<&SurrogateLevel> = levels.iter().collect();
    levels.sort_by_key(|l| l.fidelity);
    let mut inputs: Option<Vec<String>> = None;
    let mut specs = Vec::with_capacity(levels.len());
    for l in levels {
        let path = dir.join(&l.csv);
        let (names, data) = read_dataset(&path)?;
        match &inputs {
            Some(prev) if *prev != names => {
                return Err(Error::Config {
                    path: path.display().to_string(),
                    msg: format!("input columns {names:?} differ from {prev:?}"),
                })
            }
            _ => inputs = Some(names),
        }
        specs.push(LevelSpec {
            fidelity: l.fidelity,
            data,
            basis: BasisSpec::new(l.basis_degree),
            trend: BasisSpec::new(l.trend_degree),
            optimizer: optimizer.config(l.seed.unwrap_or(optimizer.seed)),
        });
    }
    let model = MfgpModel::build(specs)?;
    Ok(FittedModel::Surrogate {
        inputs: inputs.unwrap_or_default(),
        model,
    })
}

#[derive(Debug, Clone)]
pub enum FittedModel {
    Surrogate { inputs: Vec<String>, model: MfgpModel },
    Database(DatabaseModel),
}

/// JSON form of a [`FittedModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Surrogate { inputs: Vec<String>, model: MfgpRecord },
    Database(DatabaseRecord),
}

impl From<&FittedModel> for ModelFile {
    fn from(m: &FittedModel) -> Self {
        match m {
            FittedModel::Surrogate { inputs, model } => ModelFile::Surrogate {
                inputs: inputs.clone(),
                model: model.into(),
            },
            FittedModel::Database(db) => ModelFile::Database(db.into()),
        }
    }
}

impl TryFrom<ModelFile> for FittedModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self, Error> {
        Ok(match f {
            ModelFile::Surrogate { inputs, model } => FittedModel::Surrogate {
                inputs,
                model: model.try_into()?,
            },
            ModelFile::Database(r) => FittedModel::Database(r.try_into()?),
        })
    }
}

impl FittedModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile::from(self)).expect("model records serialize")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, Error> {
        let f: ModelFile = serde_json::from_str(text).map_err(|e| Error::Config {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        f.try_into()
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::io::IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json()).map_err(|source| {
            crate::io::IoError::File {
                path: path.to_path_buf(),
                source,
            }
            .into()
        })
    }
}

/// Database manifest text listing one single-level table per key.
pub fn database_manifest_text(
    seed: u64,
    starts: usize,
    grid: &GridSpec,
    tables: &BTreeMap<CoefficientKey, (PathBuf, UncertaintyModel)>,
) -> String {
    let coefficient = tables
        .iter()
        .map(|(key, (csv, uncertainty))| CoefficientEntry {
            key: *key,
            level: vec![DatabaseLevel {
                fidelity: 1,
                csv: csv.clone(),
                uncertainty: *uncertainty,
                basis_degree: 0,
                trend_degree: 0,
            }],
        })
        .collect();
    let m = Manifest::Database {
        optimizer: OptimizerSection {
            seed,
            starts: Some(starts),
            max_evals: None,
        },
        grid: grid.clone(),
        reference: ReferenceGeometry::default(),
        mass: MassProperties::default(),
        coefficient,
    };
    toml::to_string(&m).expect("manifest serializes")
}
