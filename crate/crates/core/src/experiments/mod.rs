//! Scripted simulation studies.
//!
//! - [`run_direct_comparison`]: how each unadjusted statistic's distribution
//!   moves with network size under six generative models
//! - [`run_adjustment_study`]: the same datasets after standardization with
//!   each component family
//! - [`run_feature_detection`]: whether adjustment keeps a between-block
//!   density difference visible
//! - [`run_user_data`]: the analysis pattern for an observed collection
//!
//! Every study can write its artifacts to a directory together with a
//! `manifest.json` holding the configuration and a SHA-256 of each file.

pub mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adjust::{run_adjustment, AdjustConfig, AdjustmentOutcome, Allocation};
use crate::compare::{
    build_report, ks_two_sample, AndersonDarling, ComparisonReport, Quartiles, SampleGroup,
};
use crate::error::{Error, Result};
use crate::fitting::{ComponentFamily, GibbsConfig};
use crate::generators::{
    logit, HierBernoulliSpec, HierMarkovSpec, KRule, McmcConfig, ModelSpec, ThetaDraw,
};
use crate::graph::Graph;
use crate::report::{self, fmt_float, fmt_opt, RawStatRow};
use crate::rng::SeedTree;
use crate::stats::{compute_all, Conventions, StatisticKind};
use crate::{io, svg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    DirectComparison,
    AdjustmentStudy,
    FeatureDetection,
    UserData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedModel {
    pub name: String,
    pub spec: ModelSpec,
}

/// The six generative datasets of the direct comparison.
pub fn default_models() -> Vec<NamedModel> {
    let named = |name: &str, spec| NamedModel {
        name: name.into(),
        spec,
    };
    vec![
        named("erdos_renyi", ModelSpec::ErdosRenyi),
        named("bernoulli", ModelSpec::Bernoulli { p: 0.2 }),
        named(
            "offset_bernoulli",
            ModelSpec::OffsetBernoulli {
                theta_deg: 3f64.ln(),
            },
        ),
        named(
            "markov_ergm",
            ModelSpec::MarkovErgm {
                theta: ModelSpec::FLORENTINE_THETA,
                mcmc: McmcConfig::default(),
            },
        ),
        named(
            "hier_bernoulli",
            ModelSpec::HierBernoulli(HierBernoulliSpec {
                mu_within: logit(0.2),
                p_btw: 0.1,
                alpha: 10.0,
                k_rule: KRule::PerNodes(5),
                theta_draw: ThetaDraw::PerNetwork,
            }),
        ),
        named(
            "hier_markov",
            ModelSpec::HierMarkov(HierMarkovSpec {
                mu_within: ModelSpec::FLORENTINE_THETA,
                p_btw: 0.25,
                alpha: 10.0,
                k_rule: KRule::PerNodes(5),
                theta_draw: ThetaDraw::PerNetwork,
                mcmc: McmcConfig::default(),
            }),
        ),
    ]
}

/// Datasets that also receive the (expensive) hierarchical Bernoulli
/// adjustment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierDatasets {
    All,
    Named(Vec<String>),
}

impl HierDatasets {
    fn includes(&self, name: &str) -> bool {
        match self {
            HierDatasets::All => true,
            HierDatasets::Named(v) => v.iter().any(|n| n == name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study: Study,
    pub sizes: Vec<usize>,
    /// Replicates per size.
    pub replicates: usize,
    pub models: Vec<NamedModel>,
    pub families: Vec<ComponentFamily>,
    pub n_m: usize,
    pub n_s: usize,
    pub allocation: Allocation,
    pub hier_datasets: HierDatasets,
    pub gibbs: GibbsConfig,
    pub conventions: Conventions,
    pub master_seed: u64,
    /// Between-block tie probabilities of the two feature-detection variants.
    pub feature_p_btw: [f64; 2],
    pub feature_family: ComponentFamily,
    /// Collection for the user-data study.
    pub input: Option<PathBuf>,
}

impl StudyConfig {
    /// Full-scale settings.
    pub fn full(study: Study) -> StudyConfig {
        StudyConfig {
            study,
            sizes: (20..=100).step_by(10).collect(),
            replicates: if study == Study::FeatureDetection {
                250
            } else {
                200
            },
            models: default_models(),
            families: ComponentFamily::ALL.to_vec(),
            n_m: 30,
            n_s: 1000,
            allocation: Allocation::Balanced,
            hier_datasets: HierDatasets::Named(vec!["hier_bernoulli".into(), "hier_markov".into()]),
            gibbs: GibbsConfig::default(),
            conventions: Conventions::default(),
            master_seed: crate::rng::DEFAULT_SEED,
            feature_p_btw: [0.10, 0.25],
            feature_family: ComponentFamily::Bernoulli,
            input: None,
        }
    }

    /// Reduced settings that finish in seconds.
    pub fn smoke(study: Study) -> StudyConfig {
        let mut cfg = StudyConfig::full(study);
        cfg.sizes = vec![20, 40];
        cfg.replicates = 20;
        cfg.n_m = 10;
        cfg.n_s = 200;
        cfg.gibbs.sweeps = 300;
        cfg.gibbs.burn_in_sweeps = 100;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.study != Study::UserData {
            if self.sizes.is_empty() || self.sizes.contains(&0) {
                return bad("sizes must be a nonempty list of positive integers");
            }
            if self.replicates == 0 {
                return bad("replicates must be at least 1");
            }
        }
        if self.models.is_empty() {
            return bad("no models configured");
        }
        let mut names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("model names must be unique");
        }
        if self.n_m == 0 || self.n_s == 0 {
            return bad("N_M and N_S must be positive");
        }
        if !self.feature_p_btw.iter().all(|p| (0.0..=1.0).contains(p)) {
            return bad("feature.p_btw values must lie in [0, 1]");
        }
        for m in &self.models {
            m.spec.validate()?;
        }
        self.gibbs.validate()
    }

    fn adjust_config(&self, family: ComponentFamily) -> AdjustConfig {
        AdjustConfig {
            family,
            n_m: self.n_m,
            n_s: self.n_s,
            allocation: self.allocation,
            gibbs: self.gibbs,
            conventions: self.conventions,
        }
    }
}

/// Simulated graphs of one model, ordered by size then replicate.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<(String, Graph)>,
}

/// Graph id used in file names and CSV rows.
pub fn graph_id(model: &str, n: usize, replicate: usize) -> String {
    format!("{model}_n{n}_r{replicate}")
}

/// Replicate `r` at size `n` of `model` always comes from the same substream,
/// whatever other sizes or models are simulated alongside.
pub fn simulate_dataset(
    model: &NamedModel,
    sizes: &[usize],
    replicates: usize,
    seeds: &SeedTree,
) -> Dataset {
    let jobs: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    let tag = format!("dataset:{}", model.name);
    let graphs = crate::par::map_indexed(jobs.len(), |i| {
        let (n, r) = jobs[i];
        let mut rng = seeds.stream(&tag, &[n as u64, r as u64]);
        (graph_id(&model.name, n, r), model.spec.sample(n, &mut rng))
    });
    Dataset {
        name: model.name.clone(),
        graphs,
    }
}

/// All statistics for each graph, one row per (graph, statistic).
pub fn raw_stat_rows(
    dataset: &str,
    graphs: &[(String, Graph)],
    conventions: Conventions,
) -> Vec<RawStatRow> {
    let sets = crate::par::map_indexed(graphs.len(), |i| compute_all(&graphs[i].1, conventions));
    graphs
        .iter()
        .zip(sets)
        .flat_map(|((id, g), set)| {
            set.iter()
                .map(|v| RawStatRow {
                    dataset: dataset.to_string(),
                    graph_id: id.clone(),
                    n: g.node_count(),
                    statistic: v.kind,
                    value: v.value,
                    defined: v.defined,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Comparison report per statistic; `None` where fewer than two sizes have
/// defined values.
pub fn reports_by_statistic(rows: &[RawStatRow]) -> Vec<(StatisticKind, Option<ComparisonReport>)> {
    StatisticKind::ALL
        .iter()
        .map(|&k| (k, build_report(k, &report::groups_by_size(rows, k)).ok()))
        .collect()
}

fn adjusted_rows(dataset: &str, outcome: &AdjustmentOutcome) -> Vec<RawStatRow> {
    outcome
        .adjusted
        .iter()
        .map(|a| RawStatRow {
            dataset: dataset.to_string(),
            graph_id: a.graph_id.clone(),
            n: a.n,
            statistic: a.statistic,
            value: a.z,
            defined: a.defined,
        })
        .collect()
}

/// Files written by a study, with their checksums.
pub struct Artifacts {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl Artifacts {
    pub fn new(root: &Path) -> Result<Artifacts> {
        fs::create_dir_all(root)?;
        Ok(Artifacts {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.written
            .insert(rel.to_string(), hex(&Sha256::digest(bytes)));
        Ok(())
    }

    pub fn write_with<F>(&mut self, rel: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(rel, &buf)
    }

    /// Writes `manifest.json`. No timestamps or host details are recorded so
    /// equal runs give equal manifests.
    pub fn finish(self, config: &impl Serialize, extra: serde_json::Value) -> Result<PathBuf> {
        let manifest = serde_json::json!({
            "tool": "netnorm",
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "notes": extra,
            "artifacts": self.written,
        });
        let path = self.root.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_histograms(
    art: &mut Artifacts,
    prefix: &str,
    title: &str,
    groups: &[SampleGroup],
) -> Result<()> {
    const BINS: usize = 20;
    let all = groups.iter().flat_map(|g| g.values.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let mut rows = Vec::new();
    if lo.is_finite() {
        let width = if hi > lo {
            (hi - lo) / BINS as f64
        } else {
            1.0
        };
        for g in groups {
            let mut counts = [0usize; BINS];
            for v in &g.values {
                counts[(((v - lo) / width) as usize).min(BINS - 1)] += 1;
            }
            for (b, c) in counts.iter().enumerate() {
                rows.push(vec![
                    g.label.to_string(),
                    fmt_float(lo + b as f64 * width),
                    fmt_float(lo + (b + 1) as f64 * width),
                    c.to_string(),
                ]);
            }
        }
    }
    art.write_with(&format!("histograms/{prefix}.csv"), |w| {
        report::write_table(w, &["n", "bin_lo", "bin_hi", "count"], &rows)
    })?;
    let panels: Vec<(String, Vec<f64>)> = groups
        .iter()
        .map(|g| (format!("n = {}", g.label), g.values.clone()))
        .collect();
    art.write(
        &format!("figures/hist_{prefix}.svg"),
        svg::histograms(title, &panels, BINS).as_bytes(),
    )
}

// ---------------------------------------------------------------------------
// direct comparison

#[derive(Debug, Clone)]
pub struct DirectComparisonResult {
    /// Per model, per statistic.
    pub reports: Vec<(String, Vec<(StatisticKind, Option<ComparisonReport>)>)>,
}

impl DirectComparisonResult {
    pub fn ad(&self, model: &str, stat: StatisticKind) -> Option<AndersonDarling> {
        self.reports
            .iter()
            .find(|(m, _)| m == model)?
            .1
            .iter()
            .find(|(k, _)| *k == stat)?
            .1
            .as_ref()
            .map(|r| r.ad)
    }
}

fn ad_table_rows(
    result: &[(String, Vec<(StatisticKind, Option<ComparisonReport>)>)],
    raw: bool,
) -> Vec<Vec<String>> {
    StatisticKind::ALL
        .iter()
        .enumerate()
        .map(|(si, k)| {
            let mut row = vec![k.name().to_string()];
            row.extend(result.iter().map(|(_, reps)| {
                fmt_opt(
                    reps[si]
                        .1
                        .as_ref()
                        .map(|r| if raw { r.ad.raw } else { r.ad.standardized }),
                )
            }));
            row
        })
        .collect()
}

pub fn run_direct_comparison(
    cfg: &StudyConfig,
    out: Option<&Path>,
) -> Result<DirectComparisonResult> {
    cfg.validate()?;
    if cfg.sizes.len() < 2 {
        return Err(Error::Precondition(
            "direct comparison needs at least two sizes".into(),
        ));
    }
    let seeds = SeedTree::new(cfg.master_seed);
    let mut art = out.map(Artifacts::new).transpose()?;
    let mut all_rows = Vec::new();
    let mut reports = Vec::new();
    for model in &cfg.models {
        let ds = simulate_dataset(model, &cfg.sizes, cfg.replicates, &seeds);
        let rows = raw_stat_rows(&ds.name, &ds.graphs, cfg.conventions);
        let reps = reports_by_statistic(&rows);
        if let Some(art) = art.as_mut() {
            for (k, rep) in &reps {
                let prefix = format!("{}_{}", model.name, k.name());
                if let Some(rep) = rep {
                    art.write_with(&format!("ks_heatmaps/{prefix}.csv"), |w| {
                        report::write_ks_matrix(w, rep)
                    })?;
                    let svg = svg::heatmap(
                        &format!("KS: {} ({})", k.label(), model.name),
                        &rep.labels,
                        &rep.ks_matrix,
                        1.0,
                    );
                    art.write(&format!("figures/ks_{prefix}.svg"), svg.as_bytes())?;
                }
                let groups = report::groups_by_size(&rows, *k);
                write_histograms(
                    art,
                    &prefix,
                    &format!("{} ({})", k.label(), model.name),
                    &groups,
                )?;
            }
            let flat: Vec<ComparisonReport> = reps.iter().filter_map(|r| r.1.clone()).collect();
            art.write_with(&format!("reports/{}.csv", model.name), |w| {
                report::write_comparison_reports(w, &flat)
            })?;
        }
        all_rows.extend(rows);
        reports.push((model.name.clone(), reps));
    }
    if let Some(mut art) = art {
        art.write_with("raw_stats.csv", |w| report::write_raw_stats(w, &all_rows))?;
        let mut header = vec!["statistic"];
        header.extend(cfg.models.iter().map(|m| m.name.as_str()));
        art.write_with("ad_table.csv", |w| {
            report::write_table(w, &header, &ad_table_rows(&reports, false))
        })?;
        art.write_with("ad_table_raw.csv", |w| {
            report::write_table(w, &header, &ad_table_rows(&reports, true))
        })?;
        art.finish(
            cfg,
            serde_json::json!({
                "ad_table": "standardized k-sample Anderson-Darling statistic; ad_table_raw.csv holds A2",
                "thresholds": {
                    "erdos_renyi_degree_cent_ad_band": [550.0, 850.0],
                    "degree_cent_over_density_ad_ratio_min": 3.0,
                },
            }),
        )?;
    }
    Ok(DirectComparisonResult { reports })
}

// ---------------------------------------------------------------------------
// adjustment study

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdRow {
    pub dataset: String,
    /// `None` for the unadjusted statistic.
    pub method: Option<ComponentFamily>,
    pub statistic: StatisticKind,
    pub ad: Option<AndersonDarling>,
}

impl AdRow {
    pub fn method_name(&self) -> &'static str {
        self.method.map_or("unadjusted", ComponentFamily::name)
    }

    /// `1 / A²`, the bar height of the reciprocal-AD chart.
    pub fn reciprocal(&self) -> Option<f64> {
        self.ad.map(|a| 1.0 / a.raw).filter(|v| v.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct AdjustmentStudyResult {
    pub rows: Vec<AdRow>,
    pub outcomes: Vec<(String, ComponentFamily, AdjustmentOutcome)>,
}

impl AdjustmentStudyResult {
    pub fn ad(
        &self,
        dataset: &str,
        method: Option<ComponentFamily>,
        stat: StatisticKind,
    ) -> Option<AndersonDarling> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.method == method && r.statistic == stat)?
            .ad
    }
}

fn write_outcome(
    art: &mut Artifacts,
    dir: &str,
    dataset: &str,
    outcome: &AdjustmentOutcome,
) -> Result<()> {
    art.write(
        &format!("{dir}/components.json"),
        (serde_json::to_string_pretty(&outcome.mixture)? + "\n").as_bytes(),
    )?;
    art.write_with(&format!("{dir}/reference.csv"), |w| {
        report::write_reference(w, &outcome.summaries)
    })?;
    art.write_with(&format!("{dir}/adjusted.csv"), |w| {
        report::write_adjusted(w, dataset, &outcome.adjusted)
    })
}

pub fn run_adjustment_study(
    cfg: &StudyConfig,
    out: Option<&Path>,
) -> Result<AdjustmentStudyResult> {
    cfg.validate()?;
    if cfg.sizes.len() < 2 {
        return Err(Error::Precondition(
            "adjustment study needs at least two sizes".into(),
        ));
    }
    let seeds = SeedTree::new(cfg.master_seed);
    let mut art = out.map(Artifacts::new).transpose()?;
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    let mut all_raw = Vec::new();
    for model in &cfg.models {
        let ds = simulate_dataset(model, &cfg.sizes, cfg.replicates, &seeds);
        let raw = raw_stat_rows(&ds.name, &ds.graphs, cfg.conventions);
        for (k, rep) in reports_by_statistic(&raw) {
            rows.push(AdRow {
                dataset: ds.name.clone(),
                method: None,
                statistic: k,
                ad: rep.map(|r| r.ad),
            });
        }
        for &family in &cfg.families {
            if family == ComponentFamily::HierBernoulli && !cfg.hier_datasets.includes(&ds.name) {
                continue;
            }
            let sub = seeds.child(&format!("adjust:{}:{}", ds.name, family.name()), &[]);
            let outcome = run_adjustment(&ds.graphs, &cfg.adjust_config(family), &sub)?;
            for (k, rep) in reports_by_statistic(&adjusted_rows(&ds.name, &outcome)) {
                rows.push(AdRow {
                    dataset: ds.name.clone(),
                    method: Some(family),
                    statistic: k,
                    ad: rep.map(|r| r.ad),
                });
            }
            if let Some(art) = art.as_mut() {
                write_outcome(
                    art,
                    &format!("adjusted/{}/{}", ds.name, family.name()),
                    &ds.name,
                    &outcome,
                )?;
            }
            outcomes.push((ds.name.clone(), family, outcome));
        }
        all_raw.extend(raw);
    }

    if let Some(mut art) = art {
        art.write_with("raw_stats.csv", |w| report::write_raw_stats(w, &all_raw))?;
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.dataset.clone(),
                    r.method_name().to_string(),
                    r.statistic.name().to_string(),
                    fmt_opt(r.ad.map(|a| a.standardized)),
                    fmt_opt(r.ad.map(|a| a.raw)),
                    fmt_opt(r.reciprocal()),
                ]
            })
            .collect();
        art.write_with("adjustment_ad.csv", |w| {
            report::write_table(
                w,
                &[
                    "dataset",
                    "method",
                    "statistic",
                    "ad_stat",
                    "ad_raw",
                    "reciprocal_ad",
                ],
                &table,
            )
        })?;
        for model in &cfg.models {
            let methods: Vec<Option<ComponentFamily>> = std::iter::once(None)
                .chain(cfg.families.iter().copied().map(Some))
                .filter(|m| {
                    rows.iter()
                        .any(|r| r.dataset == model.name && r.method == *m)
                })
                .collect();
            let cats: Vec<String> = StatisticKind::ALL
                .iter()
                .map(|k| k.label().to_string())
                .collect();
            let series: Vec<(String, Vec<f64>)> = methods
                .iter()
                .map(|m| {
                    let vals = StatisticKind::ALL
                        .iter()
                        .map(|&k| {
                            rows.iter()
                                .find(|r| {
                                    r.dataset == model.name && r.method == *m && r.statistic == k
                                })
                                .and_then(AdRow::reciprocal)
                                .unwrap_or(f64::NAN)
                        })
                        .collect();
                    (
                        m.map_or("unadjusted", ComponentFamily::name).to_string(),
                        vals,
                    )
                })
                .collect();
            let svg = svg::bar_chart(
                &format!("1 / AD ({})", model.name),
                &cats,
                &series,
                Some(0.10),
            );
            art.write(
                &format!("figures/reciprocal_ad_{}.svg", model.name),
                svg.as_bytes(),
            )?;
        }
        art.finish(
            cfg,
            serde_json::json!({
                "reciprocal_ad": "1 / A2 (unstandardized), uncapped; figures cap bars at 0.10",
                "thresholds": {
                    "erdos_renyi_on_erdos_renyi_min_ad_ratio": 5.0,
                },
            }),
        )?;
    }
    Ok(AdjustmentStudyResult { rows, outcomes })
}

// ---------------------------------------------------------------------------
// feature detection

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureKs {
    pub statistic: StatisticKind,
    pub n: usize,
    pub raw: Option<f64>,
    pub adjusted: Option<f64>,
    /// Defined values per variant, raw then adjusted.
    pub counts: [usize; 4],
}

#[derive(Debug, Clone)]
pub struct FeatureDetectionResult {
    pub variants: [String; 2],
    pub ks: Vec<FeatureKs>,
    pub outcome: AdjustmentOutcome,
}

impl FeatureDetectionResult {
    pub fn ks_at(&self, stat: StatisticKind, n: usize) -> Option<&FeatureKs> {
        self.ks.iter().find(|k| k.statistic == stat && k.n == n)
    }
}

/// The two hierarchical Markov variants, built from the configured
/// `hier_markov` model (or the default one) with `p_btw` replaced.
pub fn feature_variants(cfg: &StudyConfig) -> Result<[NamedModel; 2]> {
    let base = cfg
        .models
        .iter()
        .chain(default_models().iter())
        .find_map(|m| match m.spec {
            ModelSpec::HierMarkov(h) => Some(h),
            _ => None,
        })
        .ok_or_else(|| Error::InvalidParameter("no hierarchical Markov model available".into()))?;
    Ok(cfg.feature_p_btw.map(|p| NamedModel {
        name: format!("hier_markov_pbtw{p:.2}"),
        spec: ModelSpec::HierMarkov(HierMarkovSpec { p_btw: p, ..base }),
    }))
}

pub fn run_feature_detection(
    cfg: &StudyConfig,
    out: Option<&Path>,
) -> Result<FeatureDetectionResult> {
    cfg.validate()?;
    let seeds = SeedTree::new(cfg.master_seed);
    let variants = feature_variants(cfg)?;
    let data: Vec<Dataset> = variants
        .iter()
        .map(|m| simulate_dataset(m, &cfg.sizes, cfg.replicates, &seeds))
        .collect();
    // one adjustment over the pooled collection, so both variants are
    // measured against the same reference
    let pooled: Vec<(String, Graph)> = data.iter().flat_map(|d| d.graphs.iter().cloned()).collect();
    let sub = seeds.child("feature-adjust", &[]);
    let outcome = run_adjustment(&pooled, &cfg.adjust_config(cfg.feature_family), &sub)?;

    // values[variant][raw=0/adjusted=1] keyed by (stat, n)
    type Cell = BTreeMap<(StatisticKind, usize), Vec<f64>>;
    let mut cells: [[Cell; 2]; 2] = Default::default();
    let n_per_variant = data[0].graphs.len() * StatisticKind::ALL.len();
    for (idx, o) in outcome.observations.iter().enumerate() {
        let v = usize::from(idx >= n_per_variant);
        if let Some(x) = o.value.get() {
            cells[v][0].entry((o.value.kind, o.n)).or_default().push(x);
        }
    }
    for (idx, a) in outcome.adjusted.iter().enumerate() {
        let v = usize::from(idx >= n_per_variant);
        if a.defined {
            cells[v][1].entry((a.statistic, a.n)).or_default().push(a.z);
        }
    }
    let empty = Vec::new();
    let get = |v: usize, adj: usize, k: StatisticKind, n: usize| {
        cells[v][adj].get(&(k, n)).unwrap_or(&empty)
    };

    let mut ks = Vec::new();
    let mut quart_rows = Vec::new();
    for &k in &StatisticKind::ALL {
        for &n in &cfg.sizes {
            let pair = |adj| ks_two_sample(get(0, adj, k, n), get(1, adj, k, n)).ok();
            ks.push(FeatureKs {
                statistic: k,
                n,
                raw: pair(0),
                adjusted: pair(1),
                counts: [
                    get(0, 0, k, n).len(),
                    get(1, 0, k, n).len(),
                    get(0, 1, k, n).len(),
                    get(1, 1, k, n).len(),
                ],
            });
            for (adj, label) in [(0, "raw"), (1, "adjusted")] {
                for (v, variant) in variants.iter().enumerate() {
                    if let Some(q) = Quartiles::from_values(get(v, adj, k, n)) {
                        quart_rows.push((k, n, variant.name.clone(), label, q));
                    }
                }
            }
        }
    }

    if let Some(root) = out {
        let mut art = Artifacts::new(root)?;
        let mut raw_rows = Vec::new();
        for d in &data {
            raw_rows.extend(raw_stat_rows(&d.name, &d.graphs, cfg.conventions));
        }
        art.write_with("raw_stats.csv", |w| report::write_raw_stats(w, &raw_rows))?;
        write_outcome(
            &mut art,
            &format!("adjusted/pooled/{}", cfg.feature_family.name()),
            "pooled",
            &outcome,
        )?;
        let table: Vec<Vec<String>> = quart_rows
            .iter()
            .map(|(k, n, variant, label, q)| {
                vec![
                    k.name().to_string(),
                    n.to_string(),
                    variant.clone(),
                    label.to_string(),
                    fmt_float(q.min),
                    fmt_float(q.q1),
                    fmt_float(q.median),
                    fmt_float(q.q3),
                    fmt_float(q.max),
                ]
            })
            .collect();
        art.write_with("feature_quartiles.csv", |w| {
            report::write_table(
                w,
                &[
                    "statistic",
                    "n",
                    "variant",
                    "form",
                    "min",
                    "q1",
                    "median",
                    "q3",
                    "max",
                ],
                &table,
            )
        })?;
        let table: Vec<Vec<String>> = ks
            .iter()
            .map(|f| {
                vec![
                    f.statistic.name().to_string(),
                    f.n.to_string(),
                    fmt_opt(f.raw),
                    fmt_opt(f.adjusted),
                ]
            })
            .collect();
        art.write_with("feature_ks.csv", |w| {
            report::write_table(w, &["statistic", "n", "ks_raw", "ks_adjusted"], &table)
        })?;
        for &k in &StatisticKind::ALL {
            for label in ["raw", "adjusted"] {
                let boxes: Vec<(String, Quartiles)> = quart_rows
                    .iter()
                    .filter(|r| r.0 == k && r.3 == label)
                    .map(|r| {
                        (
                            format!("n{} {}", r.1, r.2.trim_start_matches("hier_markov_")),
                            r.4,
                        )
                    })
                    .collect();
                let svg = svg::boxplot(&format!("{} ({label})", k.label()), &boxes);
                art.write(
                    &format!("figures/boxplot_{}_{label}.svg", k.name()),
                    svg.as_bytes(),
                )?;
            }
        }
        art.finish(
            cfg,
            serde_json::json!({
                "variants": variants.iter().map(|v| v.name.clone()).collect::<Vec<_>>(),
                "adjustment": "one mixture fitted to the pooled collection of both variants",
                "thresholds": {
                    "adjusted_over_raw_density_ks_min": 0.8,
                    "density_ks_at_largest_n_exceeds": "two-sample KS critical value at alpha = 0.01",
                },
            }),
        )?;
    }
    let [a, b] = variants;
    Ok(FeatureDetectionResult {
        variants: [a.name, b.name],
        ks,
        outcome,
    })
}

// ---------------------------------------------------------------------------
// user data

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Fitted change over the observed size range relative to the mean.
    pub relative_change: f64,
}

/// Ordinary least squares; `None` when every `x` is equal.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let relative_change = if my != 0.0 {
        slope * (hi - lo) / my
    } else {
        f64::NAN
    };
    Some(LineFit {
        intercept: my - slope * mx,
        slope,
        relative_change,
    })
}

#[derive(Debug, Clone)]
pub struct UserDataResult {
    pub density_fit: Option<LineFit>,
    pub mean_degree_fit: Option<LineFit>,
    /// Family whose invariant (density or mean degree) is flatter in `n`.
    pub recommendation: ComponentFamily,
    /// `(statistic, method, r)`; method `None` is the unadjusted statistic.
    pub correlations: Vec<(StatisticKind, Option<ComponentFamily>, Option<f64>)>,
    pub outcomes: Vec<(ComponentFamily, AdjustmentOutcome)>,
}

fn rank_of(values: &[Option<f64>]) -> Vec<Option<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .unwrap()
            .total_cmp(&values[a].unwrap())
            .then(a.cmp(&b))
    });
    let mut ranks = vec![None; values.len()];
    for (r, &i) in idx.iter().enumerate() {
        ranks[i] = Some(r + 1);
    }
    ranks
}

/// Reads `cfg.input` and runs [`run_user_data_on`].
pub fn run_user_data(cfg: &StudyConfig, out: Option<&Path>) -> Result<UserDataResult> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("user-data study needs `input`".into()))?;
    let collection = io::read_graphs(input)?;
    run_user_data_on(cfg, &collection, out)
}

pub fn run_user_data_on(
    cfg: &StudyConfig,
    collection: &[(String, Graph)],
    out: Option<&Path>,
) -> Result<UserDataResult> {
    cfg.validate()?;
    if collection.len() < 2 {
        return Err(Error::Precondition(
            "user-data analysis needs at least two graphs".into(),
        ));
    }
    let seeds = SeedTree::new(cfg.master_seed);
    let raw = raw_stat_rows("user", collection, cfg.conventions);

    let dens: Vec<(f64, f64)> = collection
        .iter()
        .map(|(_, g)| {
            (
                g.node_count() as f64,
                if g.dyad_count() > 0 {
                    g.edge_count() as f64 / g.dyad_count() as f64
                } else {
                    0.0
                },
            )
        })
        .collect();
    let degs: Vec<(f64, f64)> = collection
        .iter()
        .map(|(_, g)| {
            (
                g.node_count() as f64,
                2.0 * g.edge_count() as f64 / g.node_count() as f64,
            )
        })
        .collect();
    let density_fit = fit_line(&dens);
    let mean_degree_fit = fit_line(&degs);
    let recommendation = match (density_fit, mean_degree_fit) {
        (Some(d), Some(m)) if m.relative_change.abs() < d.relative_change.abs() => {
            ComponentFamily::OffsetBernoulli
        }
        _ => ComponentFamily::Bernoulli,
    };

    let mut outcomes = Vec::new();
    for &family in &cfg.families {
        let sub = seeds.child(&format!("adjust:user:{}", family.name()), &[]);
        outcomes.push((
            family,
            run_adjustment(collection, &cfg.adjust_config(family), &sub)?,
        ));
    }

    let mut correlations = Vec::new();
    let corr = |rows: &[RawStatRow], k: StatisticKind| {
        let pts: Vec<(usize, f64)> = rows
            .iter()
            .filter(|r| r.statistic == k && r.defined)
            .map(|r| (r.n, r.value))
            .collect();
        crate::compare::pearson_with_n(&pts)
    };
    let adjusted: Vec<Vec<RawStatRow>> = outcomes
        .iter()
        .map(|(_, o)| adjusted_rows("user", o))
        .collect();
    for &k in &StatisticKind::ALL {
        correlations.push((k, None, corr(&raw, k)));
        for ((family, _), rows) in outcomes.iter().zip(&adjusted) {
            correlations.push((k, Some(*family), corr(rows, k)));
        }
    }

    if let Some(root) = out {
        let mut art = Artifacts::new(root)?;
        art.write_with("raw_stats.csv", |w| report::write_raw_stats(w, &raw))?;
        for (family, o) in &outcomes {
            write_outcome(&mut art, &format!("adjusted/{}", family.name()), "user", o)?;
        }
        let scatter_rows: Vec<Vec<String>> = collection
            .iter()
            .zip(dens.iter().zip(&degs))
            .map(|((id, g), (d, m))| {
                vec![
                    id.clone(),
                    g.node_count().to_string(),
                    fmt_float(d.1),
                    fmt_float(m.1),
                ]
            })
            .collect();
        art.write_with("size_scatter.csv", |w| {
            report::write_table(
                w,
                &["graph_id", "n", "density", "mean_degree"],
                &scatter_rows,
            )
        })?;
        let fit_row = |name: &str, f: Option<LineFit>| {
            vec![
                name.to_string(),
                fmt_opt(f.map(|f| f.intercept)),
                fmt_opt(f.map(|f| f.slope)),
                fmt_opt(f.map(|f| f.relative_change)),
            ]
        };
        let mut fits = vec![
            fit_row("density", density_fit),
            fit_row("mean_degree", mean_degree_fit),
        ];
        fits.push(vec![
            "recommendation".into(),
            recommendation.name().into(),
            String::new(),
            String::new(),
        ]);
        art.write_with("size_trends.csv", |w| {
            report::write_table(
                w,
                &["quantity", "intercept", "slope", "relative_change"],
                &fits,
            )
        })?;
        art.write(
            "figures/density_vs_n.svg",
            svg::scatter(
                "Density vs size",
                "n",
                "density",
                &dens,
                density_fit.map(|f| (f.intercept, f.slope)),
            )
            .as_bytes(),
        )?;
        art.write(
            "figures/mean_degree_vs_n.svg",
            svg::scatter(
                "Mean degree vs size",
                "n",
                "mean degree",
                &degs,
                mean_degree_fit.map(|f| (f.intercept, f.slope)),
            )
            .as_bytes(),
        )?;
        let corr_rows: Vec<Vec<String>> = correlations
            .iter()
            .map(|(k, m, r)| {
                vec![
                    k.name().to_string(),
                    m.map_or("unadjusted", ComponentFamily::name).to_string(),
                    fmt_opt(*r),
                ]
            })
            .collect();
        art.write_with("correlations.csv", |w| {
            report::write_table(w, &["statistic", "method", "pearson_r"], &corr_rows)
        })?;

        // rank of every graph by raw value and by each adjusted value
        let mut header = vec![
            "statistic".to_string(),
            "graph_id".into(),
            "n".into(),
            "raw".into(),
            "raw_rank".into(),
        ];
        for (f, _) in &outcomes {
            header.push(format!("z_{}", f.name()));
            header.push(format!("rank_{}", f.name()));
        }
        let mut rank_rows = Vec::new();
        for &k in &StatisticKind::ALL {
            let pick = |rows: &[RawStatRow]| -> Vec<Option<f64>> {
                rows.iter()
                    .filter(|r| r.statistic == k)
                    .map(|r| r.defined.then_some(r.value))
                    .collect()
            };
            let raw_vals = pick(&raw);
            let adj_vals: Vec<Vec<Option<f64>>> = adjusted.iter().map(|rows| pick(rows)).collect();
            let raw_rank = rank_of(&raw_vals);
            let adj_rank: Vec<Vec<Option<usize>>> = adj_vals.iter().map(|v| rank_of(v)).collect();
            for (i, (id, g)) in collection.iter().enumerate() {
                let mut row = vec![
                    k.name().to_string(),
                    id.clone(),
                    g.node_count().to_string(),
                    fmt_opt(raw_vals[i]),
                    raw_rank[i].map_or("NA".into(), |r| r.to_string()),
                ];
                for (v, r) in adj_vals.iter().zip(&adj_rank) {
                    row.push(fmt_opt(v[i]));
                    row.push(r[i].map_or("NA".into(), |r| r.to_string()));
                }
                rank_rows.push(row);
            }
        }
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        art.write_with("ranks.csv", |w| {
            report::write_table(w, &header_refs, &rank_rows)
        })?;
        art.finish(
            cfg,
            serde_json::json!({
                "recommendation": recommendation.name(),
                "graphs": collection.len(),
            }),
        )?;
    }
    Ok(UserDataResult {
        density_fit,
        mean_degree_fit,
        recommendation,
        correlations,
        outcomes,
    })
}
