//! Mixture-model standardization of network statistics.
//!
//! 1. Pick `N_M` observed networks at random and fit the chosen component
//!    family to each.
//! 2. For every distinct observed size, simulate `N_S` reference graphs split
//!    across the fitted components, compute every statistic, and keep the
//!    sample mean and standard deviation.
//! 3. Report each observed statistic as a z-score against the reference at
//!    its own size.
//!
//! With the Erdős–Rényi family step 1 is skipped: the single component is
//! `p = 0.5` and the reference does not depend on the data.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{fit_family, ComponentFamily, FittedParams, GibbsConfig};
use crate::graph::Graph;
use crate::rng::SeedTree;
use crate::stats::{compute_all, Conventions, StatisticKind, StatisticValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponents {
    pub family: ComponentFamily,
    pub components: Vec<FittedParams>,
    /// Indices into the observed collection, parallel to `components`.
    /// Empty for the Erdős–Rényi family.
    pub source_ids: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub size: usize,
    pub statistic: StatisticKind,
    pub mean: f64,
    pub sd: f64,
    pub simulated_count: usize,
    pub dropped_undefined: usize,
}

/// One observed statistic value to standardize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub graph_id: String,
    pub n: usize,
    pub value: StatisticValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedValue {
    pub graph_id: String,
    pub n: usize,
    pub statistic: StatisticKind,
    pub z: f64,
    pub defined: bool,
}

/// How `N_S` reference draws are split across `N_M` components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// `N_S` must be a multiple of `N_M`.
    Strict,
    /// `floor(N_S / N_M)` each, the remainder one extra to the first components.
    #[default]
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustConfig {
    pub family: ComponentFamily,
    pub n_m: usize,
    pub n_s: usize,
    pub allocation: Allocation,
    pub gibbs: GibbsConfig,
    pub conventions: Conventions,
}

impl Default for AdjustConfig {
    fn default() -> Self {
        AdjustConfig {
            family: ComponentFamily::Bernoulli,
            n_m: 30,
            n_s: 1000,
            allocation: Allocation::Balanced,
            gibbs: GibbsConfig::default(),
            conventions: Conventions::default(),
        }
    }
}

/// `n_m` distinct indices out of `0..total`, ascending.
pub fn select_components(total: usize, n_m: usize, seeds: &SeedTree) -> Result<Vec<usize>> {
    if n_m == 0 || n_m > total {
        return Err(Error::Precondition(format!(
            "N_M = {n_m} must be between 1 and the collection size {total}"
        )));
    }
    let mut ids = index::sample(&mut seeds.stream("select", &[]), total, n_m).into_vec();
    ids.sort_unstable();
    Ok(ids)
}

/// Draw count per component.
pub fn allocate_draws(n_s: usize, components: usize, allocation: Allocation) -> Result<Vec<usize>> {
    if components == 0 {
        return Err(Error::Precondition("no mixture components".into()));
    }
    if n_s == 0 {
        return Err(Error::Precondition("N_S must be positive".into()));
    }
    let base = n_s / components;
    let extra = n_s % components;
    if allocation == Allocation::Strict && extra != 0 {
        return Err(Error::Precondition(format!(
            "N_S = {n_s} is not divisible by N_M = {components}"
        )));
    }
    Ok((0..components)
        .map(|j| base + usize::from(j < extra))
        .collect())
}

/// Fits the component family to the selected graphs.
pub fn fit_components(
    graphs: &[Graph],
    cfg: &AdjustConfig,
    seeds: &SeedTree,
) -> Result<MixtureComponents> {
    if cfg.family == ComponentFamily::ErdosRenyi {
        return Ok(MixtureComponents {
            family: cfg.family,
            components: vec![FittedParams::ErdosRenyi],
            source_ids: Vec::new(),
        });
    }
    let ids = select_components(graphs.len(), cfg.n_m, seeds)?;
    let fits = crate::par::map_indexed(ids.len(), |j| {
        let mut rng = seeds.stream("fit", &[j as u64]);
        fit_family(cfg.family, &graphs[ids[j]], &cfg.gibbs, &mut rng)
    });
    let components = fits
        .into_iter()
        .enumerate()
        .map(|(j, f)| {
            f.map_err(|e| Error::Precondition(format!("component {j} (graph {}): {e}", ids[j])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixtureComponents {
        family: cfg.family,
        components,
        source_ids: ids,
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let len = values.len();
    if len == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / len as f64;
    if len < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (len - 1) as f64).sqrt())
}

/// Reference moments for every statistic at each distinct size.
///
/// Draw `d` of component `j` at size `n` uses substream
/// `("reference", [j, n, d])`, so a size's summary does not depend on which
/// other sizes are requested.
pub fn build_reference(
    mixture: &MixtureComponents,
    sizes: &[usize],
    n_s: usize,
    allocation: Allocation,
    conventions: Conventions,
    seeds: &SeedTree,
) -> Result<Vec<ReferenceSummary>> {
    let unique: BTreeSet<usize> = sizes.iter().copied().collect();
    if unique.is_empty() {
        return Err(Error::Precondition(
            "no sizes to build a reference for".into(),
        ));
    }
    let counts = allocate_draws(n_s, mixture.components.len(), allocation)?;
    let models: Vec<_> = mixture
        .components
        .iter()
        .map(FittedParams::reference_model)
        .collect();
    for (j, m) in models.iter().enumerate() {
        m.validate()
            .map_err(|e| Error::Precondition(format!("component {j}: {e}")))?;
    }

    let mut jobs: Vec<(usize, usize, usize)> = Vec::with_capacity(unique.len() * n_s);
    for &n in &unique {
        for (j, &c) in counts.iter().enumerate() {
            jobs.extend((0..c).map(|d| (n, j, d)));
        }
    }
    let sets = crate::par::map_indexed(jobs.len(), |idx| {
        let (n, j, d) = jobs[idx];
        let mut rng = seeds.stream("reference", &[j as u64, n as u64, d as u64]);
        compute_all(&models[j].sample(n, &mut rng), conventions)
    });

    let mut out = Vec::with_capacity(unique.len() * StatisticKind::ALL.len());
    let mut start = 0;
    for &n in &unique {
        let block = &sets[start..start + n_s];
        start += n_s;
        for kind in StatisticKind::ALL {
            let values: Vec<f64> = block.iter().filter_map(|s| s.get(kind).get()).collect();
            let (mean, sd) = mean_sd(&values);
            out.push(ReferenceSummary {
                size: n,
                statistic: kind,
                mean,
                sd,
                simulated_count: values.len(),
                dropped_undefined: n_s - values.len(),
            });
        }
    }
    Ok(out)
}

/// `z = (value - mean) / sd` against the reference at the observation's size.
/// Undefined when the observation is undefined or the reference has zero
/// spread.
pub fn adjust(
    observations: &[Observation],
    summaries: &[ReferenceSummary],
) -> Result<Vec<AdjustedValue>> {
    let lookup: BTreeMap<(usize, StatisticKind), &ReferenceSummary> = summaries
        .iter()
        .map(|s| ((s.size, s.statistic), s))
        .collect();
    observations
        .iter()
        .map(|o| {
            let kind = o.value.kind;
            let r = lookup.get(&(o.n, kind)).ok_or_else(|| {
                Error::Precondition(format!("no reference summary for n = {}, {kind}", o.n))
            })?;
            let ok = o.value.defined && r.simulated_count > 0 && r.sd > 0.0 && r.sd.is_finite();
            Ok(AdjustedValue {
                graph_id: o.graph_id.clone(),
                n: o.n,
                statistic: kind,
                z: if ok {
                    (o.value.value - r.mean) / r.sd
                } else {
                    f64::NAN
                },
                defined: ok,
            })
        })
        .collect()
}

/// Output of a full adjustment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentOutcome {
    pub mixture: MixtureComponents,
    pub summaries: Vec<ReferenceSummary>,
    pub observations: Vec<Observation>,
    pub adjusted: Vec<AdjustedValue>,
}

/// Observed statistics for each `(graph_id, graph)`.
pub fn observe(collection: &[(String, Graph)], conventions: Conventions) -> Vec<Observation> {
    let sets = crate::par::map_indexed(collection.len(), |i| {
        compute_all(&collection[i].1, conventions)
    });
    collection
        .iter()
        .zip(sets)
        .flat_map(|((id, g), set)| {
            let n = g.node_count();
            set.iter()
                .map(|value| Observation {
                    graph_id: id.clone(),
                    n,
                    value,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Select, fit, simulate references for the distinct sizes, standardize.
pub fn run_adjustment(
    collection: &[(String, Graph)],
    cfg: &AdjustConfig,
    seeds: &SeedTree,
) -> Result<AdjustmentOutcome> {
    if collection.is_empty() {
        return Err(Error::Precondition("empty collection".into()));
    }
    // fail fast on allocation before any fitting
    let n_comp = if cfg.family == ComponentFamily::ErdosRenyi {
        1
    } else {
        cfg.n_m
    };
    allocate_draws(cfg.n_s, n_comp, cfg.allocation).map_err(|e| e.in_stage("reference"))?;

    let graphs: Vec<Graph> = collection.iter().map(|(_, g)| g.clone()).collect();
    let mixture = fit_components(&graphs, cfg, seeds).map_err(|e| e.in_stage("fit"))?;
    let sizes: Vec<usize> = graphs.iter().map(Graph::node_count).collect();
    let summaries = build_reference(
        &mixture,
        &sizes,
        cfg.n_s,
        cfg.allocation,
        cfg.conventions,
        seeds,
    )
    .map_err(|e| e.in_stage("reference"))?;
    let observations = observe(collection, cfg.conventions);
    let adjusted = adjust(&observations, &summaries).map_err(|e| e.in_stage("adjust"))?;
    Ok(AdjustmentOutcome {
        mixture,
        summaries,
        observations,
        adjusted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(n: usize, v: f64) -> Observation {
        Observation {
            graph_id: "g".into(),
            n,
            value: StatisticValue::defined(StatisticKind::Density, v),
        }
    }

    fn summary(n: usize, mean: f64, sd: f64) -> ReferenceSummary {
        ReferenceSummary {
            size: n,
            statistic: StatisticKind::Density,
            mean,
            sd,
            simulated_count: 10,
            dropped_undefined: 0,
        }
    }

    #[test]
    fn z_scores() {
        let s = [summary(20, 0.3, 0.05)];
        let out = adjust(&[obs(20, 0.3), obs(20, 0.4)], &s).unwrap();
        assert_eq!(out[0].z, 0.0);
        assert!((out[1].z - 2.0).abs() < 1e-12);
        assert!(adjust(&[obs(30, 0.3)], &s).is_err());
    }

    #[test]
    fn degenerate_reference_is_undefined() {
        let out = adjust(&[obs(20, 0.3)], &[summary(20, 0.3, 0.0)]).unwrap();
        assert!(!out[0].defined);
        assert!(out[0].z.is_nan());
        let undefined = Observation {
            value: StatisticValue::undefined(StatisticKind::Density),
            ..obs(20, 0.0)
        };
        assert!(!adjust(&[undefined], &[summary(20, 0.3, 0.1)]).unwrap()[0].defined);
    }

    #[test]
    fn allocation_rules() {
        assert_eq!(
            allocate_draws(990, 30, Allocation::Strict).unwrap(),
            vec![33; 30]
        );
        assert!(allocate_draws(1000, 30, Allocation::Strict).is_err());
        let b = allocate_draws(1000, 30, Allocation::Balanced).unwrap();
        assert_eq!(b.iter().sum::<usize>(), 1000);
        assert_eq!(b[0], 34);
        assert_eq!(b[29], 33);
    }

    #[test]
    fn selection() {
        let t = SeedTree::new(1);
        assert_eq!(select_components(5, 5, &t).unwrap(), vec![0, 1, 2, 3, 4]);
        let one = select_components(1800, 1, &t).unwrap();
        assert_eq!(one.len(), 1);
        let many = select_components(1800, 30, &t).unwrap();
        assert_eq!(many.len(), 30);
        assert!(many.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(many, select_components(1800, 30, &t).unwrap());
        assert!(select_components(3, 4, &t).is_err());
        assert!(select_components(3, 0, &t).is_err());
    }

    #[test]
    fn sample_sd_uses_n_minus_one() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
