//! Flat `key = value` run configuration with dotted keys.
//!
//! ```text
//! # direct comparison at desk scale
//! study = direct_comparison
//! sizes = 20:100:10
//! replicates = 200
//! models = erdos_renyi, bernoulli
//! model.bernoulli.p = 0.2
//! adjust.families = erdos_renyi, bernoulli
//! adjust.n_m = 30
//! ```
//!
//! Model blocks use `model.<name>.<param>`; a name that is not one of the
//! default datasets needs a `model.<name>.family` key.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::adjust::Allocation;
use crate::error::{Error, Result};
use crate::fitting::ComponentFamily;
use crate::generators::{
    HierBernoulliSpec, HierMarkovSpec, KRule, McmcConfig, ModelSpec, ThetaDraw,
};
use crate::stats::{AplConvention, ClosenessMode};

use super::{default_models, HierDatasets, NamedModel, Study, StudyConfig};

/// Parsed key-value pairs in file order, later keys overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<KeyValues> {
        let mut kv = KeyValues::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            kv.set_line(line)
                .map_err(|msg| Error::InvalidParameter(format!("config line {}: {msg}", i + 1)))?;
        }
        Ok(kv)
    }

    fn set_line(&mut self, line: &str) -> std::result::Result<(), String> {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("expected `key = value`, got `{line}`"))?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(format!("invalid key `{k}`"));
        }
        self.entries.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    /// Applies `key=value` overrides on top of the parsed file.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            self.set_line(o.as_ref()).map_err(Error::InvalidParameter)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    Error::InvalidParameter(format!("invalid value `{v}` for `{key}`"))
                })
            })
            .transpose()
    }
}

fn list(v: &str) -> Vec<&str> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn floats(key: &str, v: &str) -> Result<Vec<f64>> {
    list(v)
        .into_iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("invalid number `{s}` in `{key}`")))
        })
        .collect()
}

fn triple(key: &str, v: &str) -> Result<[f64; 3]> {
    floats(key, v)?
        .try_into()
        .map_err(|_| Error::InvalidParameter(format!("`{key}` needs three comma-separated values")))
}

/// `20,40,60` or `lo:hi:step`.
pub fn parse_sizes(v: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidParameter(format!("invalid size list `{v}`"));
    let sizes: Vec<usize> =
        if let [lo, hi, step] = v.split(':').map(str::trim).collect::<Vec<_>>()[..] {
            let (lo, hi, step): (usize, usize, usize) = (
                lo.parse().map_err(|_| bad())?,
                hi.parse().map_err(|_| bad())?,
                step.parse().map_err(|_| bad())?,
            );
            if step == 0 || lo > hi {
                return Err(bad());
            }
            (lo..=hi).step_by(step).collect()
        } else {
            list(v)
                .into_iter()
                .map(|s| s.parse().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "direct_comparison" | "direct" => Ok(Study::DirectComparison),
            "adjustment_study" | "adjustment" => Ok(Study::AdjustmentStudy),
            "feature_detection" | "feature" => Ok(Study::FeatureDetection),
            "user_data" => Ok(Study::UserData),
            _ => Err(Error::InvalidParameter(format!("unknown study `{s}`"))),
        }
    }
}

fn parse_enum<T: serde::de::DeserializeOwned>(key: &str, v: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(v.replace('-', "_")))
        .map_err(|_| Error::InvalidParameter(format!("invalid value `{v}` for `{key}`")))
}

/// `per_nodes:5` or `fixed:4`.
pub fn parse_k_rule(v: &str) -> Result<KRule> {
    let bad = || Error::InvalidParameter(format!("invalid k_rule `{v}`"));
    let (kind, num) = v.split_once(':').ok_or_else(bad)?;
    let num: usize = num.trim().parse().map_err(|_| bad())?;
    match kind.trim() {
        "per_nodes" if num > 0 => Ok(KRule::PerNodes(num)),
        "fixed" if num > 0 => Ok(KRule::Fixed(num)),
        _ => Err(bad()),
    }
}

fn parse_theta_draw(v: &str) -> Result<ThetaDraw> {
    match v.split_once(':') {
        Some(("per_dataset", s)) => Ok(ThetaDraw::PerDataset {
            seed: s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("invalid theta_draw `{v}`")))?,
        }),
        _ => match v {
            "per_network" => Ok(ThetaDraw::PerNetwork),
            "pinned" => Ok(ThetaDraw::Pinned),
            _ => Err(Error::InvalidParameter(format!("invalid theta_draw `{v}`"))),
        },
    }
}

/// Builds a model from `model.<name>.*` keys, starting from `base` when the
/// family is unchanged.
fn model_from_keys(name: &str, kv: &KeyValues, base: Option<ModelSpec>) -> Result<ModelSpec> {
    let key = |p: &str| format!("model.{name}.{p}");
    let num = |p: &str| -> Result<Option<f64>> { kv.parsed::<f64>(&key(p)) };
    let family = kv.get(&key("family")).map(|f| f.replace('-', "_"));
    let base = match (&family, base) {
        (Some(f), Some(b)) if *f == b.family_name() => Some(b),
        (None, b) => b,
        _ => None,
    };
    let family = family
        .or_else(|| base.map(|b| b.family_name().to_string()))
        .ok_or_else(|| Error::InvalidParameter(format!("model `{name}` needs a family")))?;

    let mut mcmc = match base {
        Some(ModelSpec::MarkovErgm { mcmc, .. }) => mcmc,
        Some(ModelSpec::HierMarkov(h)) => h.mcmc,
        _ => McmcConfig::default(),
    };
    if let Some(b) = kv.parsed::<u64>(&key("mcmc.burn_in"))? {
        mcmc.burn_in = Some(b);
    }
    if let Some(s) = kv.parsed::<u64>(&key("mcmc.spacing"))? {
        mcmc.spacing = Some(s);
    }
    let k_rule = kv.get(&key("k_rule")).map(parse_k_rule).transpose()?;
    let theta_draw = kv
        .get(&key("theta_draw"))
        .map(parse_theta_draw)
        .transpose()?;
    let alpha = num("alpha")?;
    let missing = |p: &str| Error::InvalidParameter(format!("model `{name}` needs `{}`", key(p)));

    let spec = match family.as_str() {
        "erdos_renyi" => ModelSpec::ErdosRenyi,
        "bernoulli" => {
            let old = match base {
                Some(ModelSpec::Bernoulli { p }) => Some(p),
                _ => None,
            };
            ModelSpec::Bernoulli {
                p: num("p")?.or(old).ok_or_else(|| missing("p"))?,
            }
        }
        "offset_bernoulli" => {
            let old = match base {
                Some(ModelSpec::OffsetBernoulli { theta_deg }) => Some(theta_deg),
                _ => None,
            };
            let theta_deg = match (num("theta_deg")?, num("mean_degree")?) {
                (Some(t), _) => t,
                (None, Some(d)) => d.ln(),
                (None, None) => old.ok_or_else(|| missing("theta_deg"))?,
            };
            ModelSpec::OffsetBernoulli { theta_deg }
        }
        "markov_ergm" => {
            let old = match base {
                Some(ModelSpec::MarkovErgm { theta, .. }) => Some(theta),
                _ => None,
            };
            let theta = match kv.get(&key("theta")) {
                Some(v) => triple(&key("theta"), v)?,
                None => old.ok_or_else(|| missing("theta"))?,
            };
            ModelSpec::MarkovErgm { theta, mcmc }
        }
        "hier_bernoulli" => {
            let old = match base {
                Some(ModelSpec::HierBernoulli(h)) => Some(h),
                _ => None,
            };
            let mu_within = match (num("mu_within")?, num("p_within")?) {
                (Some(m), _) => m,
                (None, Some(p)) => crate::generators::logit(p),
                (None, None) => old
                    .map(|h| h.mu_within)
                    .ok_or_else(|| missing("p_within"))?,
            };
            ModelSpec::HierBernoulli(HierBernoulliSpec {
                mu_within,
                p_btw: num("p_btw")?
                    .or(old.map(|h| h.p_btw))
                    .ok_or_else(|| missing("p_btw"))?,
                alpha: alpha.or(old.map(|h| h.alpha)).unwrap_or(10.0),
                k_rule: k_rule.or(old.map(|h| h.k_rule)).unwrap_or_default(),
                theta_draw: theta_draw.or(old.map(|h| h.theta_draw)).unwrap_or_default(),
            })
        }
        "hier_markov" => {
            let old = match base {
                Some(ModelSpec::HierMarkov(h)) => Some(h),
                _ => None,
            };
            let mu_within = match kv.get(&key("theta")) {
                Some(v) => triple(&key("theta"), v)?,
                None => old.map(|h| h.mu_within).ok_or_else(|| missing("theta"))?,
            };
            ModelSpec::HierMarkov(HierMarkovSpec {
                mu_within,
                p_btw: num("p_btw")?
                    .or(old.map(|h| h.p_btw))
                    .ok_or_else(|| missing("p_btw"))?,
                alpha: alpha.or(old.map(|h| h.alpha)).unwrap_or(10.0),
                k_rule: k_rule.or(old.map(|h| h.k_rule)).unwrap_or_default(),
                theta_draw: theta_draw.or(old.map(|h| h.theta_draw)).unwrap_or_default(),
                mcmc,
            })
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown model family `{other}`"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

const KNOWN: &[&str] = &[
    "study",
    "seed",
    "sizes",
    "replicates",
    "models",
    "input",
    "closeness",
    "apl",
    "adjust.families",
    "adjust.family",
    "adjust.n_m",
    "adjust.n_s",
    "adjust.allocation",
    "adjust.hier_datasets",
    "gibbs.sweeps",
    "gibbs.burn_in",
    "gibbs.k_max_rule",
    "gibbs.concentration",
    "feature.p_btw",
    "feature.family",
    "simulate.model",
];

const MODEL_PARAMS: &[&str] = &[
    "family",
    "p",
    "theta_deg",
    "mean_degree",
    "theta",
    "mu_within",
    "p_within",
    "p_btw",
    "alpha",
    "k_rule",
    "theta_draw",
    "mcmc.burn_in",
    "mcmc.spacing",
];

/// Rejects keys that no consumer reads, so typos do not pass silently.
pub fn check_keys(kv: &KeyValues) -> Result<()> {
    for k in kv.keys() {
        let ok = KNOWN.contains(&k)
            || k.strip_prefix("model.")
                .and_then(|rest| rest.split_once('.'))
                .is_some_and(|(_, p)| MODEL_PARAMS.contains(&p));
        if !ok {
            return Err(Error::InvalidParameter(format!("unknown config key `{k}`")));
        }
    }
    Ok(())
}

/// Named models referenced by `models`, or every default dataset plus any
/// extra `model.<name>` block.
pub fn models_from_keys(kv: &KeyValues) -> Result<Vec<NamedModel>> {
    let defaults = default_models();
    let mut names: Vec<String> = match kv.get("models") {
        Some(v) => list(v).into_iter().map(String::from).collect(),
        None => defaults.iter().map(|m| m.name.clone()).collect(),
    };
    if kv.get("models").is_none() {
        for k in kv.keys() {
            if let Some((name, _)) = k.strip_prefix("model.").and_then(|r| r.split_once('.')) {
                if !names.iter().any(|n| n == name) {
                    names.push(name.to_string());
                }
            }
        }
    }
    if names.is_empty() {
        return Err(Error::InvalidParameter("`models` is empty".into()));
    }
    names
        .into_iter()
        .map(|name| {
            let base = defaults.iter().find(|m| m.name == name).map(|m| m.spec);
            let spec = model_from_keys(&name, kv, base)?;
            Ok(NamedModel { name, spec })
        })
        .collect()
}

impl StudyConfig {
    /// Defaults for `study` overridden by `kv`.
    pub fn from_keys(kv: &KeyValues, study: Option<Study>) -> Result<StudyConfig> {
        check_keys(kv)?;
        let study = match (study, kv.parsed::<Study>("study")?) {
            (Some(s), _) | (None, Some(s)) => s,
            (None, None) => return Err(Error::InvalidParameter("no study selected".into())),
        };
        let mut cfg = StudyConfig::full(study);
        if let Some(v) = kv.get("sizes") {
            cfg.sizes = parse_sizes(v)?;
        }
        if let Some(r) = kv.parsed("replicates")? {
            cfg.replicates = r;
        }
        if let Some(s) = kv.parsed("seed")? {
            cfg.master_seed = s;
        }
        if kv.get("models").is_some() || kv.keys().any(|k| k.starts_with("model.")) {
            cfg.models = models_from_keys(kv)?;
        }
        if let Some(v) = kv.get("adjust.families").or(kv.get("adjust.family")) {
            cfg.families = list(v)
                .into_iter()
                .map(ComponentFamily::from_str)
                .collect::<Result<_>>()?;
        }
        if let Some(v) = kv.parsed("adjust.n_m")? {
            cfg.n_m = v;
        }
        if let Some(v) = kv.parsed("adjust.n_s")? {
            cfg.n_s = v;
        }
        if let Some(v) = kv.get("adjust.allocation") {
            cfg.allocation = parse_enum::<Allocation>("adjust.allocation", v)?;
        }
        if let Some(v) = kv.get("adjust.hier_datasets") {
            cfg.hier_datasets = if v == "all" {
                HierDatasets::All
            } else {
                HierDatasets::Named(list(v).into_iter().map(String::from).collect())
            };
        }
        if let Some(v) = kv.parsed("gibbs.sweeps")? {
            cfg.gibbs.sweeps = v;
        }
        if let Some(v) = kv.parsed("gibbs.burn_in")? {
            cfg.gibbs.burn_in_sweeps = v;
        }
        if let Some(v) = kv.get("gibbs.k_max_rule") {
            cfg.gibbs.k_max_rule = parse_k_rule(v)?;
        }
        if let Some(v) = kv.parsed("gibbs.concentration")? {
            cfg.gibbs.concentration = v;
        }
        if let Some(v) = kv.get("closeness") {
            cfg.conventions.closeness = parse_enum::<ClosenessMode>("closeness", v)?;
        }
        if let Some(v) = kv.get("apl") {
            cfg.conventions.apl = parse_enum::<AplConvention>("apl", v)?;
        }
        if let Some(v) = kv.get("feature.p_btw") {
            let p = floats("feature.p_btw", v)?;
            cfg.feature_p_btw = p
                .try_into()
                .map_err(|_| Error::InvalidParameter("`feature.p_btw` needs two values".into()))?;
        }
        if let Some(v) = kv.get("feature.family") {
            cfg.feature_family = v.parse()?;
        }
        if let Some(v) = kv.get("input") {
            cfg.input = Some(v.into());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut kv =
            KeyValues::parse("# c\nstudy = direct\nsizes = 20:40:10\n\nreplicates=5\n").unwrap();
        kv.apply_overrides(&["replicates = 7"]).unwrap();
        let cfg = StudyConfig::from_keys(&kv, None).unwrap();
        assert_eq!(cfg.study, Study::DirectComparison);
        assert_eq!(cfg.sizes, vec![20, 30, 40]);
        assert_eq!(cfg.replicates, 7);
        assert_eq!(cfg.models.len(), 6);
    }

    #[test]
    fn model_blocks() {
        let kv = KeyValues::parse(
            "models = bernoulli, dense\nmodel.bernoulli.p = 0.3\nmodel.dense.family = bernoulli\nmodel.dense.p = 0.9\n",
        )
        .unwrap();
        let m = models_from_keys(&kv).unwrap();
        assert_eq!(m[0].spec, ModelSpec::Bernoulli { p: 0.3 });
        assert_eq!(m[1].name, "dense");
        assert_eq!(m[1].spec, ModelSpec::Bernoulli { p: 0.9 });

        let kv =
            KeyValues::parse("model.markov_ergm.mcmc.burn_in = 10\nmodels = markov_ergm").unwrap();
        match models_from_keys(&kv).unwrap()[0].spec {
            ModelSpec::MarkovErgm { theta, mcmc } => {
                assert_eq!(theta, ModelSpec::FLORENTINE_THETA);
                assert_eq!(mcmc.burn_in, Some(10));
            }
            ref other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KeyValues::parse("no equals sign").is_err());
        let kv = KeyValues::parse("study = direct\nadjust.nm = 3").unwrap();
        assert!(StudyConfig::from_keys(&kv, None).is_err());
        assert!(parse_sizes("40:20:10").is_err());
        assert!(parse_sizes("20,x").is_err());
        let kv = KeyValues::parse("models = mystery").unwrap();
        assert!(models_from_keys(&kv).is_err());
    }
}
