//! Project files: factor declarations, significance, one influence source and
//! options, stored as JSON.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::{normalize_dim, read_opinion_csv, MeanAggregator, OpinionAggregator, OpinionMatrix};
use crate::matrix::SquareMatrix;
use crate::model::{
    validate_system, validate_with_dim, DirectInfluenceMatrix, Factor, FactorId, FactorSystem, Level,
    NormalizedInfluenceMatrix, SignificanceVector,
};
use crate::relation::{ClosureScale, EdgeMask, ThresholdRule, TotalRelationMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_goal")]
    pub goal: String,
    pub factors: Vec<FactorDecl>,
    pub nsig: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sig: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opinions: Option<Vec<OpinionSource>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ndim: Option<NdimSource>,
    #[serde(default)]
    pub options: ProjectOptions,
}

fn default_goal() -> String {
    "goal".to_owned()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorDecl {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub accessible: bool,
    pub level: LevelSpec,
    #[serde(default)]
    pub excluded: bool,
}

/// `{"block": 2, "sublevel": 1}` or a label such as `"II-A"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelSpec {
    Numeric { block: u32, sublevel: u32 },
    Label(String),
}

impl LevelSpec {
    pub fn resolve(&self) -> Result<Level> {
        match self {
            LevelSpec::Numeric { block, sublevel } => Ok(Level::new(*block, *sublevel)),
            LevelSpec::Label(s) => s.parse(),
        }
    }
}

/// A CSV file (path relative to the project file) or an inline matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpinionSource {
    File(String),
    Inline { expert: String, entries: Vec<Vec<i64>> },
}

/// Dense rows, or sparse `(from, to, value)` entries with zeros elsewhere.
/// A `partial` matrix is exempt from the row-sum check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NdimSource {
    Dense(Vec<Vec<f64>>),
    Sparse {
        #[serde(default)]
        partial: bool,
        entries: Vec<SparseEntry>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub from: String,
    pub to: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expert_weights: Option<Vec<f64>>,
    pub threshold_rule: ThresholdRule,
    pub peap_gating: bool,
    pub within_block_propagation: bool,
    pub total_effort: f64,
    pub trm_scale: ClosureScale,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        Self {
            expert_weights: None,
            threshold_rule: ThresholdRule::MeanHalfStd,
            peap_gating: false,
            within_block_propagation: false,
            total_effort: 1.0,
            trm_scale: ClosureScale::MaxRowSum,
        }
    }
}

/// A loaded and validated project.
#[derive(Clone, Debug)]
pub struct Project {
    pub file: ProjectFile,
    pub system: FactorSystem,
    pub nsig: SignificanceVector,
    pub ndim: NormalizedInfluenceMatrix,
    /// Present when the influence source was opinions or a DIM.
    pub dim: Option<DirectInfluenceMatrix>,
    pub options: ProjectOptions,
}

impl Project {
    /// Builds the bundle from a parsed file. Opinion file references are
    /// resolved against `base_dir`.
    pub fn from_file(file: ProjectFile, base_dir: &Path) -> Result<Self> {
        let factors = file
            .factors
            .iter()
            .map(|d| {
                Ok(Factor {
                    id: FactorId::new(d.id.clone()),
                    name: if d.name.is_empty() { d.id.clone() } else { d.name.clone() },
                    accessible: d.accessible,
                    level: d.level.resolve()?,
                    excluded: d.excluded,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let system = FactorSystem::new(factors, file.goal.clone())?;

        let mut nsig = SignificanceVector::new(
            file.nsig.iter().map(|(k, v)| (FactorId::new(k.clone()), *v)).collect(),
        );
        nsig.raw = file
            .sig
            .as_ref()
            .map(|m| m.iter().map(|(k, v)| (FactorId::new(k.clone()), *v)).collect());

        let sources = [file.opinions.is_some(), file.dim.is_some(), file.ndim.is_some()];
        match sources.iter().filter(|s| **s).count() {
            1 => {}
            0 => return Err(Error::Project("no influence source: give one of `opinions`, `dim`, `ndim`".into())),
            _ => return Err(Error::Project("conflicting influence sources: give exactly one of `opinions`, `dim`, `ndim`".into())),
        }

        let (dim, ndim) = if let Some(opinions) = &file.opinions {
            let matrices = opinions
                .iter()
                .enumerate()
                .map(|(k, src)| load_opinion(src, k, &system, base_dir))
                .collect::<Result<Vec<_>>>()?;
            let aggregator = MeanAggregator {
                weights: file.options.expert_weights.clone(),
            };
            let dim = aggregator.aggregate(&matrices)?;
            if dim.0.dim() != system.len() {
                return Err(Error::DimensionMismatch(format!(
                    "opinion matrices are {0}x{0}, system has {1} factors",
                    dim.0.dim(),
                    system.len()
                )));
            }
            let ndim = normalize_dim(&dim);
            (Some(dim), ndim)
        } else if let Some(rows) = &file.dim {
            let dim = DirectInfluenceMatrix(SquareMatrix::from_rows(rows)?);
            let ndim = normalize_dim(&dim);
            (Some(dim), ndim)
        } else {
            let src = file.ndim.as_ref().expect("checked above");
            (None, build_ndim(src, &system)?)
        };

        let mut report = validate_system(&system, &nsig, &ndim);
        if let Some(d) = &dim {
            for v in validate_with_dim(&system, &nsig, d).violations {
                if !report.violations.contains(&v) {
                    report.violations.push(v);
                }
            }
        }
        report.into_result()?;

        let options = file.options.clone();
        if !(options.total_effort > 0.0) {
            return Err(Error::Project("`total_effort` must be positive".into()));
        }
        Ok(Self {
            file,
            system,
            nsig,
            ndim,
            dim,
            options,
        })
    }

    pub fn id(&self) -> &str {
        self.file.name.as_deref().unwrap_or("project")
    }

    /// Matrix fed to the closure: the DIM when known, else the N-DIM.
    pub fn relation_source(&self) -> &SquareMatrix {
        self.dim.as_ref().map(|d| &d.0).unwrap_or_else(|| self.ndim.matrix())
    }

    pub fn total_relation(&self) -> Result<TotalRelationMatrix> {
        TotalRelationMatrix::compute(self.relation_source(), self.options.trm_scale, self.options.threshold_rule)
    }

    /// Significant edges when gating is on, `None` otherwise.
    pub fn gate(&self) -> Result<Option<EdgeMask>> {
        if self.options.peap_gating {
            Ok(Some(self.total_relation()?.significant))
        } else {
            Ok(None)
        }
    }
}

fn load_opinion(src: &OpinionSource, k: usize, system: &FactorSystem, base_dir: &Path) -> Result<OpinionMatrix> {
    match src {
        OpinionSource::Inline { expert, entries } => OpinionMatrix::new(expert.clone(), entries.clone()),
        OpinionSource::File(rel) => {
            let path = base_dir.join(rel);
            let expert = Path::new(rel)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("expert{}", k + 1));
            let (ids, m) = read_opinion_csv(std::fs::File::open(&path)?, &expert)?;
            reorder_to_system(&ids, m, system)
        }
    }
}

/// Reorders a CSV-labelled opinion matrix into system order.
fn reorder_to_system(ids: &[FactorId], m: OpinionMatrix, system: &FactorSystem) -> Result<OpinionMatrix> {
    if ids.len() != system.len() {
        return Err(Error::DimensionMismatch(format!(
            "opinion matrix of `{}` has {} factors, system has {}",
            m.expert,
            ids.len(),
            system.len()
        )));
    }
    let mut pos = Vec::with_capacity(ids.len());
    for f in system.factors() {
        let p = ids
            .iter()
            .position(|id| *id == f.id)
            .ok_or_else(|| Error::Project(format!("opinion matrix of `{}` lacks factor `{}`", m.expert, f.id)))?;
        pos.push(p);
    }
    let entries = pos
        .iter()
        .map(|&i| pos.iter().map(|&j| i64::from(m.get(i, j))).collect())
        .collect();
    OpinionMatrix::new(m.expert, entries)
}

fn build_ndim(src: &NdimSource, system: &FactorSystem) -> Result<NormalizedInfluenceMatrix> {
    match src {
        NdimSource::Dense(rows) => Ok(NormalizedInfluenceMatrix::from_precomputed(
            SquareMatrix::from_rows(rows)?,
            false,
        )),
        NdimSource::Sparse { partial, entries } => {
            let mut m = SquareMatrix::zeros(system.len());
            for e in entries {
                let i = system.require_index(&e.from)?;
                let j = system.require_index(&e.to)?;
                m[(i, j)] = e.value;
            }
            Ok(NormalizedInfluenceMatrix::from_precomputed(m, *partial))
        }
    }
}

pub fn parse_project(text: &str, base_dir: &Path) -> Result<Project> {
    let file: ProjectFile = serde_json::from_str(text)?;
    Project::from_file(file, base_dir)
}

/// Reads, builds and validates a project file.
pub fn load_project(path: impl AsRef<Path>) -> Result<Project> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_project(&text, &base)
}

/// Writes the file form of a project. Numbers keep full precision.
pub fn save_project(file: &ProjectFile, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
