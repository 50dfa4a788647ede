use netnorm_core::adjust::{
    adjust, build_reference, fit_components, observe, run_adjustment, AdjustConfig, Allocation,
    MixtureComponents, Observation, ReferenceSummary,
};
use netnorm_core::fitting::{ComponentFamily, FittedParams};
use netnorm_core::generators::gen_bernoulli;
use netnorm_core::rng::SeedTree;
use netnorm_core::stats::{degree_denominator, Conventions};
use netnorm_core::{Graph, StatisticKind, StatisticValue};

fn collection(sizes: &[usize], per_size: usize, p: f64, seed: u64) -> Vec<(String, Graph)> {
    let tree = SeedTree::new(seed);
    sizes
        .iter()
        .flat_map(|&n| (0..per_size).map(move |r| (n, r)))
        .map(|(n, r)| {
            (
                format!("g_n{n}_r{r}"),
                gen_bernoulli(n, p, &mut tree.stream("data", &[n as u64, r as u64])),
            )
        })
        .collect()
}

fn cfg(family: ComponentFamily, n_m: usize, n_s: usize) -> AdjustConfig {
    AdjustConfig {
        family,
        n_m,
        n_s,
        ..AdjustConfig::default()
    }
}

fn bernoulli_mixture(p: f64, m: usize) -> MixtureComponents {
    MixtureComponents {
        family: ComponentFamily::Bernoulli,
        components: vec![
            FittedParams::Bernoulli {
                theta_edge: (p / (1.0 - p)).ln(),
                p,
                clamped: false
            };
            m
        ],
        source_ids: (0..m).collect(),
    }
}

fn summary(s: &[ReferenceSummary], n: usize, k: StatisticKind) -> &ReferenceSummary {
    s.iter().find(|r| r.size == n && r.statistic == k).unwrap()
}

#[test]
fn bernoulli_reference_density_moments() {
    let s = build_reference(
        &bernoulli_mixture(0.2, 30),
        &[100],
        1000,
        Allocation::Balanced,
        Conventions::default(),
        &SeedTree::new(1),
    )
    .unwrap();
    let d = summary(&s, 100, StatisticKind::Density);
    let sd = (0.2f64 * 0.8 / 4950.0).sqrt();
    assert_eq!(d.simulated_count + d.dropped_undefined, 1000);
    assert!(
        (d.mean - 0.2).abs() < 3.0 * sd / 1000f64.sqrt(),
        "{}",
        d.mean
    );
    assert!((d.sd / sd - 1.0).abs() < 0.1, "sd {} vs {sd}", d.sd);
}

#[test]
fn single_component_is_plain_model_reference() {
    let one = bernoulli_mixture(0.3, 1);
    let s = build_reference(
        &one,
        &[25],
        100,
        Allocation::Strict,
        Conventions::default(),
        &SeedTree::new(2),
    )
    .unwrap();
    let d = summary(&s, 25, StatisticKind::Density);
    assert_eq!(d.simulated_count, 100);
    assert!((d.mean - 0.3).abs() < 0.02);
}

#[test]
fn location_scale_leaves_z_unchanged() {
    let data = collection(&[20, 35], 15, 0.25, 3);
    let out = run_adjustment(
        &data,
        &cfg(ComponentFamily::Bernoulli, 10, 200),
        &SeedTree::new(3),
    )
    .unwrap();
    // density -> mean degree, a = n - 1 at each fixed n
    let scale = |n: usize| (n - 1) as f64;
    let obs: Vec<Observation> = out
        .observations
        .iter()
        .filter(|o| o.value.kind == StatisticKind::Density)
        .map(|o| Observation {
            value: StatisticValue::defined(StatisticKind::Density, o.value.value * scale(o.n)),
            ..o.clone()
        })
        .collect();
    let sums: Vec<ReferenceSummary> = out
        .summaries
        .iter()
        .map(|s| ReferenceSummary {
            mean: s.mean * scale(s.size),
            sd: s.sd * scale(s.size),
            ..*s
        })
        .collect();
    let z = adjust(&obs, &sums).unwrap();
    let base: Vec<_> = out
        .adjusted
        .iter()
        .filter(|a| a.statistic == StatisticKind::Density)
        .collect();
    assert_eq!(z.len(), base.len());
    for (a, b) in z.iter().zip(base) {
        assert!((a.z - b.z).abs() < 1e-12, "{} vs {}", a.z, b.z);
    }
}

#[test]
fn ranks_preserved_within_size() {
    let data = collection(&[30], 25, 0.2, 4);
    let out = run_adjustment(
        &data,
        &cfg(ComponentFamily::Bernoulli, 10, 200),
        &SeedTree::new(4),
    )
    .unwrap();
    for k in StatisticKind::ALL {
        let mut pairs: Vec<(f64, f64)> = out
            .observations
            .iter()
            .zip(&out.adjusted)
            .filter(|(o, a)| o.value.kind == k && a.defined)
            .map(|(o, a)| (o.value.value, a.z))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1), "{k}");
    }
}

#[test]
fn unique_size_reference_equals_per_graph_rebuild() {
    let data: Vec<(String, Graph)> = collection(&[20, 30, 20, 30, 20], 1, 0.3, 5)
        .into_iter()
        .enumerate()
        .map(|(i, (id, g))| (format!("{id}_{i}"), g))
        .collect();
    let seeds = SeedTree::new(5);
    let c = cfg(ComponentFamily::Bernoulli, 3, 60);
    let graphs: Vec<Graph> = data.iter().map(|d| d.1.clone()).collect();
    let mixture = fit_components(&graphs, &c, &seeds).unwrap();
    let sizes: Vec<usize> = graphs.iter().map(Graph::node_count).collect();
    let shared =
        build_reference(&mixture, &sizes, c.n_s, c.allocation, c.conventions, &seeds).unwrap();
    let observations = observe(&data, c.conventions);
    let together = adjust(&observations, &shared).unwrap();
    for (i, (id, g)) in data.iter().enumerate() {
        let own = build_reference(
            &mixture,
            &[g.node_count()],
            c.n_s,
            c.allocation,
            c.conventions,
            &seeds,
        )
        .unwrap();
        let mine: Vec<Observation> = observations
            .iter()
            .filter(|o| &o.graph_id == id)
            .cloned()
            .collect();
        let z = adjust(&mine, &own).unwrap();
        assert_eq!(z, together[i * 9..(i + 1) * 9], "graph {id}");
    }
}

#[test]
fn normalized_and_raw_centralizations_share_z() {
    let data = collection(&[20, 40, 60], 10, 0.2, 6);
    let out = run_adjustment(
        &data,
        &cfg(ComponentFamily::Bernoulli, 10, 300),
        &SeedTree::new(6),
    )
    .unwrap();
    let pairs = [
        (StatisticKind::DegreeCent, StatisticKind::DegreeCentNorm),
        (
            StatisticKind::BetweennessCent,
            StatisticKind::BetweennessCentNorm,
        ),
        (
            StatisticKind::ClosenessCent,
            StatisticKind::ClosenessCentNorm,
        ),
    ];
    for (raw, norm) in pairs {
        let zr: Vec<f64> = out
            .adjusted
            .iter()
            .filter(|a| a.statistic == raw)
            .map(|a| a.z)
            .collect();
        let zn: Vec<f64> = out
            .adjusted
            .iter()
            .filter(|a| a.statistic == norm)
            .map(|a| a.z)
            .collect();
        for (a, b) in zr.iter().zip(&zn) {
            assert!(
                (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                "{raw}: {a} vs {b}"
            );
        }
    }
    let s = summary(&out.summaries, 40, StatisticKind::DegreeCentNorm);
    let r = summary(&out.summaries, 40, StatisticKind::DegreeCent);
    assert!((s.mean * degree_denominator(40) - r.mean).abs() < 1e-9 * r.mean);
}

#[test]
fn reproducible_and_er_skips_fitting() {
    let data = collection(&[20, 30], 6, 0.5, 7);
    let er = cfg(ComponentFamily::ErdosRenyi, 30, 100);
    let a = run_adjustment(&data, &er, &SeedTree::new(7)).unwrap();
    let b = run_adjustment(&data, &er, &SeedTree::new(7)).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a.summaries).unwrap(),
        serde_json::to_string(&b.summaries).unwrap()
    );
    // N_M = 30 exceeds the 12 graphs, but ER never selects components
    assert_eq!(a.mixture.components, vec![FittedParams::ErdosRenyi]);
    assert!(a.mixture.source_ids.is_empty());
    let d = summary(&a.summaries, 30, StatisticKind::Density);
    assert!((d.mean - 0.5).abs() < 0.01);
}

#[test]
fn preconditions_name_their_stage() {
    let data = collection(&[20], 5, 0.2, 8);
    let e = run_adjustment(
        &data,
        &cfg(ComponentFamily::Bernoulli, 6, 60),
        &SeedTree::new(8),
    )
    .unwrap_err();
    assert!(e.to_string().contains("fit"), "{e}");
    let strict = AdjustConfig {
        allocation: Allocation::Strict,
        ..cfg(ComponentFamily::Bernoulli, 3, 100)
    };
    let e = run_adjustment(&data, &strict, &SeedTree::new(8)).unwrap_err();
    assert!(
        e.to_string().contains("reference") && e.to_string().contains("divisible"),
        "{e}"
    );
}
