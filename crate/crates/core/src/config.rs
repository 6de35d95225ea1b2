//! Run configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backends::{
    stub_classifier, stub_decomposer, stub_generator, Decomposer, Ensemble, Generator, RemoteClassifier,
    RemoteDecomposer, RemoteGenerator, ScriptedClassifier, SharedClassifier,
};
use crate::construct::SplitName;
use crate::error::{Error, Result};
use crate::evaluate::EvalOptions;
use crate::types::PipelineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Stub,
    /// Lookup table from a JSON file (classifiers only).
    Scripted,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSpec {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub model: Option<String>,
    /// Table file for `scripted`.
    pub table: Option<PathBuf>,
}

impl BackendSpec {
    pub fn stub() -> Self {
        Self::default()
    }

    pub fn scripted(table: impl Into<PathBuf>) -> Self {
        Self {
            kind: BackendKind::Scripted,
            table: Some(table.into()),
            ..Self::default()
        }
    }

    fn remote_parts(&self, role: &str) -> Result<(String, String, Option<String>)> {
        let url = self
            .endpoint
            .clone()
            .filter(|u| !u.trim().is_empty())
            .ok_or_else(|| Error::BackendUnavailable(format!("{role}: remote backend has no endpoint")))?;
        let key = match &self.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::BackendUnavailable(format!("{role}: environment variable {var} is not set"))
            })?),
            None => None,
        };
        let name = self.model.clone().unwrap_or_else(|| format!("remote-{role}"));
        Ok((name, url, key))
    }

    pub fn classifier(&self, workdir: &Path) -> Result<SharedClassifier> {
        Ok(match self.kind {
            BackendKind::Stub => Arc::new(stub_classifier()),
            BackendKind::Scripted => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::Config("scripted classifier needs `table`".into()))?;
                Arc::new(ScriptedClassifier::from_json_file(&resolve(workdir, table))?)
            }
            BackendKind::Remote => {
                let (name, url, key) = self.remote_parts("classifier")?;
                Arc::new(RemoteClassifier::new(&name, &url, key)?)
            }
        })
    }

    pub fn decomposer(&self) -> Result<Box<dyn Decomposer>> {
        Ok(match self.kind {
            BackendKind::Stub => Box::new(stub_decomposer()),
            BackendKind::Scripted => return Err(Error::Config("decomposer cannot be scripted".into())),
            BackendKind::Remote => {
                let (name, url, key) = self.remote_parts("decomposer")?;
                Box::new(RemoteDecomposer::new(&name, &url, key)?)
            }
        })
    }

    pub fn generator(&self) -> Result<Box<dyn Generator>> {
        Ok(match self.kind {
            BackendKind::Stub => Box::new(stub_generator()),
            BackendKind::Scripted => return Err(Error::Config("generator cannot be scripted".into())),
            BackendKind::Remote => {
                let (name, url, key) = self.remote_parts("generator")?;
                Box::new(RemoteGenerator::new(&name, &url, key)?)
            }
        })
    }
}

/// Which construction branches run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Branches {
    pub entailment: bool,
    pub neutral: bool,
    pub retrieval: bool,
    pub contradiction: bool,
    pub generation: bool,
}

impl Default for Branches {
    fn default() -> Self {
        Self {
            entailment: true,
            neutral: true,
            retrieval: true,
            contradiction: true,
            generation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub classifier: BackendSpec,
    #[serde(default)]
    pub decomposer: BackendSpec,
    #[serde(default)]
    pub generator: BackendSpec,
    /// Validation panel for generated rewrites; empty means the classifier alone.
    #[serde(default)]
    pub ensemble: Vec<BackendSpec>,
    #[serde(default)]
    pub branches: Branches,
    /// Sentence-level JSON Lines to build atomic triplets from.
    pub input: PathBuf,
    /// Optional sentence-level file turned into the grouped test split.
    #[serde(default)]
    pub test_input: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default = "default_split")]
    pub split: SplitName,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub eval: EvalOptions,
}

fn default_split() -> SplitName {
    SplitName::Train
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        if self.split == SplitName::Test {
            return Err(Error::Config("`split` must be train or validation".into()));
        }
        if self.eval.max_stratum == 0 {
            return Err(Error::Config("eval.max_stratum must be at least 1".into()));
        }
        Ok(())
    }

    /// The generation panel, defaulting to the main classifier.
    pub fn ensemble(&self, workdir: &Path, classifier: &SharedClassifier) -> Result<Ensemble> {
        if self.ensemble.is_empty() {
            return Ensemble::new(vec![classifier.clone()]);
        }
        Ensemble::new(
            self.ensemble
                .iter()
                .map(|s| s.classifier(workdir))
                .collect::<Result<_>>()?,
        )
    }
}

/// `path` if absolute, else `workdir/path`.
pub fn resolve(workdir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        workdir.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_json_str(r#"{"input":"in.jsonl","output_dir":"out"}"#).unwrap();
        assert_eq!(cfg.pipeline, PipelineConfig::default());
        assert_eq!(cfg.classifier.kind, BackendKind::Stub);
        assert_eq!(cfg.split, SplitName::Train);
        assert!(cfg.branches.generation);
        assert_eq!(cfg.eval.max_stratum, 5);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_json_str(r#"{"input":"i","output_dir":"o","seeed":1}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"input":"i","output_dir":"o","pipeline":{"tau":1}}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"input":"i","output_dir":"o","generator":{"url":"x"}}"#).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_json_str(r#"{"input":"i","output_dir":"o","pipeline":{"tau_e":1.5}}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"input":"i","output_dir":"o","split":"test"}"#).is_err());
    }

    #[test]
    fn remote_without_endpoint_is_unavailable() {
        let spec = BackendSpec {
            kind: BackendKind::Remote,
            ..BackendSpec::default()
        };
        let err = spec.generator().err().unwrap();
        assert!(err.is_backend());
    }

    #[test]
    fn remote_with_missing_key_is_unavailable() {
        let spec = BackendSpec {
            kind: BackendKind::Remote,
            endpoint: Some("http://127.0.0.1:9".into()),
            api_key_env: Some("ATOMIC_NLI_SURELY_UNSET_KEY".into()),
            ..BackendSpec::default()
        };
        assert!(matches!(spec.classifier(Path::new(".")), Err(Error::BackendUnavailable(_))));
    }

    #[test]
    fn resolve_is_relative_to_workdir() {
        assert_eq!(resolve(Path::new("/w"), Path::new("a/b")), PathBuf::from("/w/a/b"));
        assert_eq!(resolve(Path::new("/w"), Path::new("/abs")), PathBuf::from("/abs"));
    }
}
