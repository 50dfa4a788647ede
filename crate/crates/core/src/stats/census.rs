use serde::{Deserialize, Serialize};

use crate::graph::Graph;

/// Edge, 2-star and triangle counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub edges: u64,
    pub two_stars: u64,
    pub triangles: u64,
}

impl Census {
    /// Componentwise `self - before` as signed values.
    pub fn delta(&self, before: &Census) -> [i64; 3] {
        [
            self.edges as i64 - before.edges as i64,
            self.two_stars as i64 - before.two_stars as i64,
            self.triangles as i64 - before.triangles as i64,
        ]
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [
            self.edges as f64,
            self.two_stars as f64,
            self.triangles as f64,
        ]
    }
}

pub fn subgraph_census(g: &Graph) -> Census {
    let mut two_stars = 0u64;
    let mut tri_corners = 0u64;
    for i in 0..g.node_count() {
        let d = g.degree(i) as u64;
        two_stars += d * d.saturating_sub(1) / 2;
    }
    for (i, j) in g.edge_list() {
        tri_corners += g.common_neighbors(i, j) as u64;
    }
    Census {
        edges: g.edge_count() as u64,
        two_stars,
        // each triangle is seen once per edge
        triangles: tri_corners / 3,
    }
}
