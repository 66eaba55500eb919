//! `key = value` run configuration files.

use std::collections::BTreeSet;

use yeastloc_core::{BayesConfig, Dataset, FeatureStatus, PipelineConfig};

use crate::CliError;

pub const KEYS: [&str; 13] = [
    "feature_order",
    "hidden_sizes",
    "learning_rate",
    "momentum",
    "max_epochs",
    "mse_threshold",
    "shuffle",
    "seed",
    "mlp_seed",
    "train_seed",
    "train_subsets",
    "test_subsets",
    "pseudo_count",
];

/// Values read from a config file. Unset fields keep the pipeline defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub feature_order: Option<Vec<String>>,
    pub hidden_sizes: Option<Vec<usize>>,
    pub learning_rate: Option<f64>,
    pub momentum: Option<f64>,
    pub max_epochs: Option<usize>,
    pub mse_threshold: Option<f64>,
    pub shuffle: Option<bool>,
    pub mlp_seed: Option<u64>,
    pub train_seed: Option<u64>,
    pub train_subsets: Option<BTreeSet<u8>>,
    pub test_subsets: Option<BTreeSet<u8>>,
    pub pseudo_count: Option<f64>,
}

fn list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>, ()> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ()))
        .collect()
}

impl RunConfig {
    /// Parses config text; `origin` prefixes diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| CliError::parse(format!("{origin}:{}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |_| err(format!("invalid value {value:?} for {key}"));
            match key {
                "feature_order" => cfg.feature_order = Some(list(value).map_err(bad)?),
                "hidden_sizes" => cfg.hidden_sizes = Some(list(value).map_err(bad)?),
                "learning_rate" => cfg.learning_rate = Some(value.parse().map_err(|_| bad(()))?),
                "momentum" => cfg.momentum = Some(value.parse().map_err(|_| bad(()))?),
                "max_epochs" => cfg.max_epochs = Some(value.parse().map_err(|_| bad(()))?),
                "mse_threshold" => cfg.mse_threshold = Some(value.parse().map_err(|_| bad(()))?),
                "shuffle" => cfg.shuffle = Some(value.parse().map_err(|_| bad(()))?),
                "seed" => {
                    let s: u64 = value.parse().map_err(|_| bad(()))?;
                    cfg.mlp_seed = Some(s);
                    cfg.train_seed = Some(s);
                }
                "mlp_seed" => cfg.mlp_seed = Some(value.parse().map_err(|_| bad(()))?),
                "train_seed" => cfg.train_seed = Some(value.parse().map_err(|_| bad(()))?),
                "train_subsets" => {
                    cfg.train_subsets = Some(list(value).map_err(bad)?.into_iter().collect())
                }
                "test_subsets" => {
                    cfg.test_subsets = Some(list(value).map_err(bad)?.into_iter().collect())
                }
                "pseudo_count" => cfg.pseudo_count = Some(value.parse().map_err(|_| bad(()))?),
                other => return Err(err(format!("unknown config key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    /// Resolves against `d`. Without an explicit feature order, every
    /// non-redundant feature of the dataset is used in definition order.
    pub fn pipeline(&self, d: &Dataset) -> Result<PipelineConfig, CliError> {
        let feature_order = match &self.feature_order {
            Some(order) => order.clone(),
            None => d
                .features
                .iter()
                .filter(|f| f.status != FeatureStatus::Redundant)
                .map(|f| f.name.clone())
                .collect(),
        };
        let mut p = PipelineConfig::with_features(&feature_order);
        if let Some(h) = &self.hidden_sizes {
            p.mlp.hidden_sizes = h.clone();
        }
        if let Some(s) = self.mlp_seed {
            p.mlp.seed = s;
        }
        if let Some(v) = self.learning_rate {
            p.train.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            p.train.momentum = v;
        }
        if let Some(v) = self.max_epochs {
            p.train.max_epochs = v;
        }
        if let Some(v) = self.mse_threshold {
            p.train.mse_threshold = v;
        }
        if let Some(v) = self.shuffle {
            p.train.shuffle = v;
        }
        if let Some(v) = self.train_seed {
            p.train.seed = v;
        }
        if let Some(v) = &self.train_subsets {
            p.train_subsets = v.clone();
        }
        if let Some(v) = &self.test_subsets {
            p.test_subsets = v.clone();
        }
        if let Some(v) = self.pseudo_count {
            p.bayes = BayesConfig::new(v).map_err(CliError::domain)?;
        }
        p.validate().map_err(CliError::domain)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "# run\nfeature_order = MIT1, PI\nhidden_sizes = 16,8\nlearning_rate = 0.1\n\
                    momentum = 0.5\nmax_epochs = 20\nmse_threshold = 1e-3\nshuffle = true\n\
                    seed = 9\ntrain_seed = 4\ntrain_subsets = 0,1,2\ntest_subsets = 3\n\
                    pseudo_count = 0.001\n";
        let c = RunConfig::parse(text, "run.cfg").unwrap();
        assert_eq!(c.feature_order, Some(vec!["MIT1".into(), "PI".into()]));
        assert_eq!(c.hidden_sizes, Some(vec![16, 8]));
        assert_eq!(c.mlp_seed, Some(9));
        assert_eq!(c.train_seed, Some(4));
        assert_eq!(c.test_subsets, Some(BTreeSet::from([3])));
        let p = c.pipeline(&Dataset::default()).unwrap();
        assert_eq!(p.train.max_epochs, 20);
        assert!(p.train.shuffle);
        assert_eq!(p.bayes.pseudo_count(), 0.001);
        assert_eq!(KEYS.len(), 13);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::parse("learning_rat = 0.1\n", "run.cfg").unwrap_err();
        assert!(e.message.contains("learning_rat"));
        assert!(e.message.starts_with("run.cfg:1:"));
        assert_eq!(e.code, 2);
    }

    #[test]
    fn values_are_validated() {
        assert!(RunConfig::parse("momentum = fast\n", "c").is_err());
        let c = RunConfig::parse("momentum = 1.5\nfeature_order = A\n", "c").unwrap();
        assert_eq!(c.pipeline(&Dataset::default()).unwrap_err().code, 1);
        let c = RunConfig::parse("train_subsets = 0,6\nfeature_order = A\n", "c").unwrap();
        assert!(c.pipeline(&Dataset::default()).is_err());
    }

    #[test]
    fn trailing_comments_are_ignored() {
        let c = RunConfig::parse("seed = 4   # both seeds\n  # whole line\n", "t").unwrap();
        assert_eq!(c.mlp_seed, Some(4));
        assert_eq!(c.train_seed, Some(4));
    }
}
