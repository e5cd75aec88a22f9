//! Run configuration shared by the command-line tools.
//!
//! Settings come from up to three layers: built-in defaults, an optional
//! TOML file, and command-line flags. Later layers win, so a flag always
//! overrides the file and the file always overrides a default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::detector::Aggregation;
use crate::error::{Error, Result};
use crate::params::HyperParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub window_length: usize,
    pub stride: usize,
    pub clusters: usize,
    pub fuzziness: f64,
    pub weight_exponent: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
    pub normalize: bool,
    pub model_out: PathBuf,
    pub scores_out: PathBuf,
    pub c_grid: Vec<usize>,
    pub m_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            window_length: 16,
            stride: 1,
            clusters: 10,
            fuzziness: 1.7,
            weight_exponent: 2.0,
            epsilon: 1e-6,
            max_iters: 100,
            seed: 0,
            aggregation: Aggregation::Mean,
            normalize: true,
            model_out: PathBuf::from("model.json"),
            scores_out: PathBuf::from("scores.csv"),
            c_grid: vec![10, 20, 30, 40, 50],
            m_grid: vec![1.1, 1.4, 1.7, 2.0],
            q_grid: vec![-10.0, -8.0, -6.0, -4.0, -2.0, 2.0, 4.0, 6.0, 8.0, 10.0],
        }
    }
}

/// One layer of settings; anything absent falls through to the layer below.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub input: Option<PathBuf>,
    pub window_length: Option<usize>,
    pub stride: Option<usize>,
    pub clusters: Option<usize>,
    pub fuzziness: Option<f64>,
    pub weight_exponent: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub aggregation: Option<String>,
    pub normalize: Option<bool>,
    pub model_out: Option<PathBuf>,
    pub scores_out: Option<PathBuf>,
    pub c_grid: Option<Vec<usize>>,
    pub m_grid: Option<Vec<f64>>,
    pub q_grid: Option<Vec<f64>>,
}

impl ConfigLayer {
    pub fn from_toml_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

impl RunConfig {
    /// Apply defaults, then the file layer, then the flag layer, and
    /// validate the result. Weight exponents inside [0, 1] are dropped from
    /// the grid rather than rejected, since the default arithmetic grid
    /// passes through that band.
    pub fn resolve(file: Option<ConfigLayer>, flags: ConfigLayer) -> Result<Self> {
        let mut config = Self::default();
        for layer in file.into_iter().chain(std::iter::once(flags)) {
            config.apply(layer)?;
        }
        config.q_grid.retain(|&q| !(0.0..=1.0).contains(&q));
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, layer: ConfigLayer) -> Result<()> {
        if let Some(v) = layer.input {
            self.input = Some(v);
        }
        if let Some(v) = layer.window_length {
            self.window_length = v;
        }
        if let Some(v) = layer.stride {
            self.stride = v;
        }
        if let Some(v) = layer.clusters {
            self.clusters = v;
        }
        if let Some(v) = layer.fuzziness {
            self.fuzziness = v;
        }
        if let Some(v) = layer.weight_exponent {
            self.weight_exponent = v;
        }
        if let Some(v) = layer.epsilon {
            self.epsilon = v;
        }
        if let Some(v) = layer.max_iters {
            self.max_iters = v;
        }
        if let Some(v) = layer.seed {
            self.seed = v;
        }
        if let Some(v) = layer.aggregation {
            self.aggregation = v.parse()?;
        }
        if let Some(v) = layer.normalize {
            self.normalize = v;
        }
        if let Some(v) = layer.model_out {
            self.model_out = v;
        }
        if let Some(v) = layer.scores_out {
            self.scores_out = v;
        }
        if let Some(v) = layer.c_grid {
            self.c_grid = v;
        }
        if let Some(v) = layer.m_grid {
            self.m_grid = v;
        }
        if let Some(v) = layer.q_grid {
            self.q_grid = v;
        }
        Ok(())
    }

    /// The hyperparameters a single fit would use.
    pub fn params(&self) -> HyperParams {
        HyperParams {
            clusters: self.clusters,
            fuzziness: self.fuzziness,
            weight_exponent: self.weight_exponent,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            ..HyperParams::default()
        }
    }

    fn validate(&self) -> Result<()> {
        self.params().validated()?;
        if self.window_length < 2 {
            return Err(Error::InvalidWindow(self.window_length));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        if self.c_grid.is_empty() || self.m_grid.is_empty() || self.q_grid.is_empty() {
            return Err(Error::Config("parameter grids cannot be empty".into()));
        }
        for &c in &self.c_grid {
            HyperParams {
                clusters: c,
                ..self.params()
            }
            .validated()?;
        }
        for &m in &self.m_grid {
            HyperParams {
                fuzziness: m,
                ..self.params()
            }
            .validated()?;
        }
        for &q in &self.q_grid {
            HyperParams {
                weight_exponent: q,
                ..self.params()
            }
            .validated()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_cleanly() {
        let config = RunConfig::resolve(None, ConfigLayer::default()).unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.m_grid, vec![1.1, 1.4, 1.7, 2.0]);
        assert_eq!(config.c_grid, vec![10, 20, 30, 40, 50]);
        assert!(!config.q_grid.iter().any(|&q| (0.0..=1.0).contains(&q)));
    }

    #[test]
    fn flags_override_the_file() {
        let file: ConfigLayer = toml::from_str(
            r#"
            window_length = 32
            clusters = 7
            seed = 5
            aggregation = "max"
            "#,
        )
        .unwrap();
        let flags = ConfigLayer {
            clusters: Some(9),
            ..ConfigLayer::default()
        };
        let config = RunConfig::resolve(Some(file), flags).unwrap();
        assert_eq!(config.window_length, 32);
        assert_eq!(config.clusters, 9);
        assert_eq!(config.seed, 5);
        assert_eq!(config.aggregation, Aggregation::Max);
    }

    #[test]
    fn forbidden_exponents_are_dropped_from_the_grid() {
        let flags = ConfigLayer {
            q_grid: Some(vec![-2.0, 0.0, 0.5, 1.0, 3.0]),
            ..ConfigLayer::default()
        };
        let config = RunConfig::resolve(None, flags).unwrap();
        assert_eq!(config.q_grid, vec![-2.0, 3.0]);

        let all_forbidden = ConfigLayer {
            q_grid: Some(vec![0.0, 0.5]),
            ..ConfigLayer::default()
        };
        assert!(RunConfig::resolve(None, all_forbidden).is_err());
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for flags in [
            ConfigLayer {
                fuzziness: Some(1.0),
                ..ConfigLayer::default()
            },
            ConfigLayer {
                weight_exponent: Some(0.5),
                ..ConfigLayer::default()
            },
            ConfigLayer {
                stride: Some(0),
                ..ConfigLayer::default()
            },
            ConfigLayer {
                window_length: Some(1),
                ..ConfigLayer::default()
            },
            ConfigLayer {
                m_grid: Some(vec![2.5]),
                ..ConfigLayer::default()
            },
            ConfigLayer {
                aggregation: Some("median".into()),
                ..ConfigLayer::default()
            },
        ] {
            assert!(RunConfig::resolve(None, flags).is_err());
        }
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let parsed: std::result::Result<ConfigLayer, _> = toml::from_str("window_size = 16");
        assert!(parsed.is_err());
    }
}
