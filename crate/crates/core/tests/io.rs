use std::path::Path;

use netnorm_core::experiments::default_models;
use netnorm_core::io::{format_bipartite, format_edge_list, parse_edge_lists, read_collection};
use netnorm_core::rng::SeedTree;
use netnorm_core::BipartiteGraph;
use rand::Rng;

fn brute_force_check(b: &BipartiteGraph) {
    let g = b.project_one_mode().unwrap();
    for u in 0..b.n_left() {
        for v in 0..b.n_left() {
            let shared = u != v
                && (0..b.n_right())
                    .any(|r| b.edges().contains(&(u, r)) && b.edges().contains(&(v, r)));
            assert_eq!(g.has_edge(u, v), shared, "{u}-{v} in {:?}", b.edges());
        }
    }
}

#[test]
fn projection_exhaustive_3x3() {
    for code in 0u32..1 << 9 {
        let edges = (0..9)
            .filter(|b| code >> b & 1 == 1)
            .map(|b| (b / 3, b % 3));
        brute_force_check(&BipartiteGraph::new(3, 3, edges).unwrap());
    }
}

#[test]
fn projection_random_up_to_ten_left() {
    let tree = SeedTree::new(9);
    for r in 0..500u64 {
        let mut rng = tree.stream("bip", &[r]);
        let (nl, nr) = (rng.random_range(1..=10), rng.random_range(1..=8));
        let p: f64 = rng.random();
        let edges: Vec<(usize, usize)> = (0..nl)
            .flat_map(|l| (0..nr).map(move |r| (l, r)))
            .filter(|_| rng.random_bool(p))
            .collect();
        let b = BipartiteGraph::new(nl, nr, edges).unwrap();
        brute_force_check(&b);
        let back = parse_edge_lists(&format_bipartite(&b), Path::new("b.txt")).unwrap();
        assert_eq!(back[0].graph().unwrap(), b.project_one_mode().unwrap());
    }
}

#[test]
fn simulated_graphs_round_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("netnorm-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree = SeedTree::new(10);
    let mut written = Vec::new();
    for (i, m) in default_models().iter().enumerate() {
        let g = m.spec.sample(15 + i, &mut tree.stream("rt", &[i as u64]));
        std::fs::write(dir.join(format!("{}.edges", m.name)), format_edge_list(&g)).unwrap();
        written.push((m.name.clone(), g));
    }
    std::fs::write(dir.join("manifest.json"), "{}").unwrap();
    written.sort_by(|a, b| a.0.cmp(&b.0));
    let back = read_collection(&dir).unwrap();
    assert_eq!(back.len(), written.len());
    for (l, (name, g)) in back.iter().zip(&written) {
        assert_eq!(&l.id, name);
        assert_eq!(&l.graph().unwrap(), g);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
