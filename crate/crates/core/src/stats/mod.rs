//! Graph-level statistics: Freeman centralizations (raw and normalized),
//! transitivity, average path length and density.
//!
//! Every statistic reports a [`StatisticValue`] carrying a `defined` flag so
//! that 0/0 cases can be excluded from aggregates instead of imputed.

mod census;
mod paths;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use census::{subgraph_census, Census};
pub(crate) use paths::PathSummary;
pub use paths::{all_pairs_shortest_paths, DistanceMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    DegreeCent,
    DegreeCentNorm,
    BetweennessCent,
    BetweennessCentNorm,
    ClosenessCent,
    ClosenessCentNorm,
    Transitivity,
    AvgPathLength,
    Density,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 9] = [
        StatisticKind::DegreeCent,
        StatisticKind::DegreeCentNorm,
        StatisticKind::BetweennessCent,
        StatisticKind::BetweennessCentNorm,
        StatisticKind::ClosenessCent,
        StatisticKind::ClosenessCentNorm,
        StatisticKind::Transitivity,
        StatisticKind::AvgPathLength,
        StatisticKind::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::DegreeCent => "degree_cent",
            StatisticKind::DegreeCentNorm => "degree_cent_norm",
            StatisticKind::BetweennessCent => "betweenness_cent",
            StatisticKind::BetweennessCentNorm => "betweenness_cent_norm",
            StatisticKind::ClosenessCent => "closeness_cent",
            StatisticKind::ClosenessCentNorm => "closeness_cent_norm",
            StatisticKind::Transitivity => "transitivity",
            StatisticKind::AvgPathLength => "avg_path_length",
            StatisticKind::Density => "density",
        }
    }

    /// Short human label for figures and tables.
    pub fn label(self) -> &'static str {
        match self {
            StatisticKind::DegreeCent => "Deg. Cent.",
            StatisticKind::DegreeCentNorm => "Deg. Cent. (Norm.)",
            StatisticKind::BetweennessCent => "Betw. Cent.",
            StatisticKind::BetweennessCentNorm => "Betw. Cent. (Norm.)",
            StatisticKind::ClosenessCent => "Clo. Cent.",
            StatisticKind::ClosenessCentNorm => "Clo. Cent. (Norm.)",
            StatisticKind::Transitivity => "Transitivity",
            StatisticKind::AvgPathLength => "Avg. Path Length",
            StatisticKind::Density => "Density",
        }
    }

    pub fn is_normalized_centralization(self) -> bool {
        matches!(
            self,
            StatisticKind::DegreeCentNorm
                | StatisticKind::BetweennessCentNorm
                | StatisticKind::ClosenessCentNorm
        )
    }

    /// Raw counterpart of a normalized centralization (identity otherwise).
    pub fn raw_counterpart(self) -> StatisticKind {
        match self {
            StatisticKind::DegreeCentNorm => StatisticKind::DegreeCent,
            StatisticKind::BetweennessCentNorm => StatisticKind::BetweennessCent,
            StatisticKind::ClosenessCentNorm => StatisticKind::ClosenessCent,
            other => other,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatisticKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown statistic '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub kind: StatisticKind,
    pub value: f64,
    pub defined: bool,
}

impl StatisticValue {
    pub fn defined(kind: StatisticKind, value: f64) -> Self {
        StatisticValue {
            kind,
            value,
            defined: true,
        }
    }

    pub fn undefined(kind: StatisticKind) -> Self {
        StatisticValue {
            kind,
            value: f64::NAN,
            defined: false,
        }
    }

    /// `Some(value)` when defined.
    pub fn get(&self) -> Option<f64> {
        self.defined.then_some(self.value)
    }
}

/// How closeness treats pairs with no connecting path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosenessMode {
    /// Unreachable pairs count as distance `n`.
    #[default]
    CapN,
    /// Computed on the largest connected component only.
    LargestComponent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AplConvention {
    /// Mean distance over ordered reachable pairs.
    #[default]
    MeanReachablePairs,
    /// `(1/(n-1)) * sum_i sum_{j != i} d_ij`; connected graphs only.
    SumOverNMinusOne,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub closeness: ClosenessMode,
    pub apl: AplConvention,
}

/// Freeman centralization `sum_j (max_i s(i) - s(j))`.
pub fn freeman(scores: &[f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores.iter().map(|&s| max - s).sum()
}

/// Maximum degree centralization over graphs on `n` nodes (the star).
pub fn degree_denominator(n: usize) -> f64 {
    ((n - 1) * (n - 2)) as f64
}

/// Maximum betweenness centralization on `n` nodes with unordered pair
/// counting (the star).
pub fn betweenness_denominator(n: usize) -> f64 {
    ((n - 1) * (n - 1) * (n - 2)) as f64 / 2.0
}

/// Maximum closeness centralization on `n` nodes for `s(i) = 1 / sum_j d_ij`
/// (the star): `(n-2)/(2n-3)`.
pub fn closeness_denominator(n: usize) -> f64 {
    (n - 2) as f64 / (2 * n - 3) as f64
}

fn check_normalizable(n: usize, normalized: bool) -> Result<()> {
    if normalized && n < 3 {
        return Err(Error::Precondition(format!(
            "normalized centralization needs n >= 3 (got {n})"
        )));
    }
    Ok(())
}

fn centralization(
    kind: StatisticKind,
    scores: &[f64],
    normalized: bool,
    denominator: impl Fn(usize) -> f64,
) -> StatisticValue {
    if scores.is_empty() {
        return StatisticValue::undefined(kind);
    }
    let raw = freeman(scores);
    if normalized {
        StatisticValue::defined(kind, raw / denominator(scores.len()))
    } else {
        StatisticValue::defined(kind, raw)
    }
}

pub fn degree_scores(g: &Graph) -> Vec<f64> {
    g.degrees().into_iter().map(|d| d as f64).collect()
}

pub fn degree_centralization(g: &Graph, normalized: bool) -> Result<StatisticValue> {
    check_normalizable(g.node_count(), normalized)?;
    let kind = if normalized {
        StatisticKind::DegreeCentNorm
    } else {
        StatisticKind::DegreeCent
    };
    Ok(centralization(
        kind,
        &degree_scores(g),
        normalized,
        degree_denominator,
    ))
}

/// Vertex betweenness with unordered source/target pairs.
pub fn betweenness_scores(g: &Graph) -> Vec<f64> {
    PathSummary::compute(g).betweenness
}

pub fn betweenness_centralization(g: &Graph, normalized: bool) -> Result<StatisticValue> {
    check_normalizable(g.node_count(), normalized)?;
    Ok(betweenness_from(&PathSummary::compute(g), normalized))
}

fn betweenness_from(paths: &PathSummary, normalized: bool) -> StatisticValue {
    let kind = if normalized {
        StatisticKind::BetweennessCentNorm
    } else {
        StatisticKind::BetweennessCent
    };
    centralization(
        kind,
        &paths.betweenness,
        normalized,
        betweenness_denominator,
    )
}

/// `1 / sum_{j != i} d_ij` with unreachable pairs at distance `n`.
/// Empty for `n < 2`.
pub fn closeness_scores_capped(g: &Graph) -> Vec<f64> {
    closeness_scores_from(g.node_count(), &PathSummary::compute(g))
}

fn closeness_scores_from(n: usize, paths: &PathSummary) -> Vec<f64> {
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .map(|i| {
            let missing = (n - 1 - paths.reach_count[i]) as u64;
            1.0 / (paths.reach_sum[i] + missing * n as u64) as f64
        })
        .collect()
}

fn largest_component(g: &Graph) -> Vec<usize> {
    // first-found wins ties, i.e. the component with the smallest node
    let mut best: Vec<usize> = Vec::new();
    for comp in g.components() {
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best
}

pub fn closeness_centralization(
    g: &Graph,
    normalized: bool,
    mode: ClosenessMode,
) -> Result<StatisticValue> {
    check_normalizable(g.node_count(), normalized)?;
    Ok(closeness_from(
        g,
        &PathSummary::compute(g),
        normalized,
        mode,
    ))
}

fn closeness_from(
    g: &Graph,
    paths: &PathSummary,
    normalized: bool,
    mode: ClosenessMode,
) -> StatisticValue {
    let kind = if normalized {
        StatisticKind::ClosenessCentNorm
    } else {
        StatisticKind::ClosenessCent
    };
    match mode {
        ClosenessMode::CapN => centralization(
            kind,
            &closeness_scores_from(g.node_count(), paths),
            normalized,
            closeness_denominator,
        ),
        ClosenessMode::LargestComponent => {
            let comp = largest_component(g);
            if comp.len() < 2 || (normalized && comp.len() < 3) {
                return StatisticValue::undefined(kind);
            }
            // within a component every other member is reachable
            let scores: Vec<f64> = comp
                .iter()
                .map(|&i| 1.0 / paths.reach_sum[i] as f64)
                .collect();
            centralization(kind, &scores, normalized, closeness_denominator)
        }
    }
}

/// `3 * triangles / two_stars`; undefined without 2-stars.
pub fn transitivity(g: &Graph) -> StatisticValue {
    transitivity_from(&subgraph_census(g))
}

fn transitivity_from(c: &Census) -> StatisticValue {
    if c.two_stars == 0 {
        StatisticValue::undefined(StatisticKind::Transitivity)
    } else {
        StatisticValue::defined(
            StatisticKind::Transitivity,
            3.0 * c.triangles as f64 / c.two_stars as f64,
        )
    }
}

pub fn average_path_length(g: &Graph, convention: AplConvention) -> StatisticValue {
    apl_from(g.node_count(), &PathSummary::compute(g), convention)
}

fn apl_from(n: usize, paths: &PathSummary, convention: AplConvention) -> StatisticValue {
    let kind = StatisticKind::AvgPathLength;
    let total: u64 = paths.reach_sum.iter().sum();
    let pairs: usize = paths.reach_count.iter().sum();
    match convention {
        AplConvention::MeanReachablePairs => {
            if pairs == 0 {
                StatisticValue::undefined(kind)
            } else {
                StatisticValue::defined(kind, total as f64 / pairs as f64)
            }
        }
        AplConvention::SumOverNMinusOne => {
            if n < 2 || pairs != n * (n - 1) {
                StatisticValue::undefined(kind)
            } else {
                StatisticValue::defined(kind, total as f64 / (n - 1) as f64)
            }
        }
    }
}

pub fn density(g: &Graph) -> StatisticValue {
    if g.node_count() < 2 {
        StatisticValue::undefined(StatisticKind::Density)
    } else {
        StatisticValue::defined(
            StatisticKind::Density,
            g.edge_count() as f64 / g.dyad_count() as f64,
        )
    }
}

/// All nine statistics for one graph, indexed by [`StatisticKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticSet {
    values: [StatisticValue; 9],
}

impl StatisticSet {
    pub fn get(&self, kind: StatisticKind) -> StatisticValue {
        self.values[kind.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = StatisticValue> + '_ {
        self.values.iter().copied()
    }

    pub fn all_defined(&self) -> bool {
        self.values.iter().all(|v| v.defined)
    }
}

/// Computes every statistic from one shared path sweep.
pub fn compute_all(g: &Graph, conv: Conventions) -> StatisticSet {
    let n = g.node_count();
    let paths = PathSummary::compute(g);
    let census = subgraph_census(g);
    let degrees = degree_scores(g);
    let can_norm = n >= 3;

    let norm_or_undef = |v: &dyn Fn() -> StatisticValue, kind| {
        if can_norm {
            v()
        } else {
            StatisticValue::undefined(kind)
        }
    };

    let values = [
        centralization(
            StatisticKind::DegreeCent,
            &degrees,
            false,
            degree_denominator,
        ),
        norm_or_undef(
            &|| {
                centralization(
                    StatisticKind::DegreeCentNorm,
                    &degrees,
                    true,
                    degree_denominator,
                )
            },
            StatisticKind::DegreeCentNorm,
        ),
        betweenness_from(&paths, false),
        norm_or_undef(
            &|| betweenness_from(&paths, true),
            StatisticKind::BetweennessCentNorm,
        ),
        closeness_from(g, &paths, false, conv.closeness),
        norm_or_undef(
            &|| closeness_from(g, &paths, true, conv.closeness),
            StatisticKind::ClosenessCentNorm,
        ),
        transitivity_from(&census),
        apl_from(n, &paths, conv.apl),
        density(g),
    ];
    debug_assert!(values.iter().enumerate().all(|(i, v)| v.kind.index() == i));
    StatisticSet { values }
}
