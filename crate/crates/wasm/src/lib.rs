//! Browser bindings: simulate one graph and measure it, trace a statistic's
//! reference distribution across sizes, and standardize a single value.
//!
//! Every export returns a JSON string; errors surface as JS exceptions.

use netnorm_core::compare::Quartiles;
use netnorm_core::experiments::{default_models, NamedModel};
use netnorm_core::generators::ModelSpec;
use netnorm_core::rng::SeedTree;
use netnorm_core::stats::{compute_all, Conventions};
use netnorm_core::{svg, StatisticKind};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_N: usize = 400;
const MAX_DRAWS: usize = 5000;

fn model(name: &str, p: Option<f64>) -> Result<ModelSpec, String> {
    let spec = match (name, p) {
        ("bernoulli", Some(p)) => ModelSpec::Bernoulli { p },
        _ => default_models()
            .into_iter()
            .find(|m| m.name == name)
            .map(|m: NamedModel| m.spec)
            .ok_or_else(|| format!("unknown model `{name}`"))?,
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn check_n(n: usize) -> Result<(), String> {
    if (1..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must be between 1 and {MAX_N}"))
    }
}

fn stats_json(g: &netnorm_core::Graph) -> Value {
    let set = compute_all(g, Conventions::default());
    set.iter()
        .map(|v| {
            (
                v.kind.name().to_string(),
                v.get().map_or(Value::Null, Value::from),
            )
        })
        .collect::<serde_json::Map<_, _>>()
        .into()
}

/// One graph with its edge list and all nine statistics.
pub fn simulate_graph(name: &str, p: Option<f64>, n: usize, seed: u64) -> Result<String, String> {
    check_n(n)?;
    let spec = model(name, p)?;
    let g = spec.sample(n, &mut SeedTree::new(seed).stream("demo", &[n as u64]));
    Ok(json!({
        "n": n,
        "edges": g.edge_list(),
        "stats": stats_json(&g),
    })
    .to_string())
}

/// Quartiles, mean and sd of one statistic at each size, plus a boxplot.
pub fn reference_by_size(
    name: &str,
    p: Option<f64>,
    sizes: &[usize],
    draws: usize,
    statistic: &str,
    seed: u64,
) -> Result<String, String> {
    let spec = model(name, p)?;
    let kind: StatisticKind = statistic
        .parse()
        .map_err(|e: netnorm_core::Error| e.to_string())?;
    if !(2..=MAX_DRAWS).contains(&draws) {
        return Err(format!("draws must be between 2 and {MAX_DRAWS}"));
    }
    if sizes.is_empty() {
        return Err("no sizes given".into());
    }
    let seeds = SeedTree::new(seed);
    let mut rows = Vec::new();
    let mut boxes = Vec::new();
    for &n in sizes {
        check_n(n)?;
        let values: Vec<f64> = (0..draws)
            .filter_map(|d| {
                let g = spec.sample(
                    n,
                    &mut seeds.stream("demo-reference", &[n as u64, d as u64]),
                );
                compute_all(&g, Conventions::default()).get(kind).get()
            })
            .collect();
        let (mean, sd) = mean_sd(&values);
        let q = Quartiles::from_values(&values);
        if let Some(q) = q {
            boxes.push((format!("n={n}"), q));
        }
        rows.push(json!({
            "n": n,
            "mean": mean,
            "sd": sd,
            "defined": values.len(),
            "quartiles": q,
        }));
    }
    Ok(json!({
        "statistic": kind.name(),
        "rows": rows,
        "svg": svg::boxplot(&format!("{} under {name}", kind.label()), &boxes),
    })
    .to_string())
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// z-score of `value` against `draws` reference graphs of size `n`.
pub fn standardize(
    name: &str,
    p: Option<f64>,
    n: usize,
    statistic: &str,
    value: f64,
    draws: usize,
    seed: u64,
) -> Result<String, String> {
    if !value.is_finite() {
        return Err("value must be a finite number".into());
    }
    let out: Value =
        serde_json::from_str(&reference_by_size(name, p, &[n], draws, statistic, seed)?)
            .map_err(|e| e.to_string())?;
    let row = &out["rows"][0];
    let z = match (row["mean"].as_f64(), row["sd"].as_f64()) {
        (Some(m), Some(s)) if s > 0.0 => Some((value - m) / s),
        _ => None,
    };
    Ok(json!({ "n": n, "mean": row["mean"], "sd": row["sd"], "z": z }).to_string())
}

fn p_opt(p: f64) -> Option<f64> {
    p.is_finite().then_some(p)
}

/// `p` is only used by the `bernoulli` model; pass NaN for its default.
#[wasm_bindgen(js_name = simulateGraph)]
pub fn simulate_graph_js(model: &str, p: f64, n: usize, seed: u64) -> Result<String, JsValue> {
    simulate_graph(model, p_opt(p), n, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = referenceBySize)]
pub fn reference_by_size_js(
    model: &str,
    p: f64,
    sizes: Vec<usize>,
    draws: usize,
    statistic: &str,
    seed: u64,
) -> Result<String, JsValue> {
    reference_by_size(model, p_opt(p), &sizes, draws, statistic, seed)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = standardize)]
pub fn standardize_js(
    model: &str,
    p: f64,
    n: usize,
    statistic: &str,
    value: f64,
    draws: usize,
    seed: u64,
) -> Result<String, JsValue> {
    standardize(model, p_opt(p), n, statistic, value, draws, seed)
        .map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_reports_stats() {
        let out: Value =
            serde_json::from_str(&simulate_graph("bernoulli", Some(1.0), 5, 1).unwrap()).unwrap();
        assert_eq!(out["edges"].as_array().unwrap().len(), 10);
        assert_eq!(out["stats"]["density"], 1.0);
        assert!(simulate_graph("nope", None, 5, 1).is_err());
        assert!(simulate_graph("bernoulli", Some(2.0), 5, 1).is_err());
        assert!(simulate_graph("erdos_renyi", None, 0, 1).is_err());
    }

    #[test]
    fn reference_and_z() {
        let out: Value = serde_json::from_str(
            &reference_by_size("bernoulli", Some(0.2), &[20, 40], 200, "density", 3).unwrap(),
        )
        .unwrap();
        let rows = out["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[1]["mean"].as_f64().unwrap() - 0.2).abs() < 0.01);
        assert!(out["svg"].as_str().unwrap().starts_with("<svg"));

        let z: Value = serde_json::from_str(
            &standardize("bernoulli", Some(0.2), 40, "density", 0.2, 200, 3).unwrap(),
        )
        .unwrap();
        assert!(z["z"].as_f64().unwrap().abs() < 0.5);
        assert!(standardize("bernoulli", Some(0.2), 40, "density", f64::NAN, 200, 3).is_err());
        assert!(reference_by_size("bernoulli", None, &[20], 200, "nonsense", 3).is_err());
    }
}
