//! Random graph generators: Bernoulli-family models, Markov ERGMs sampled by
//! Metropolis tie toggling, and block-structured (hierarchical) variants.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Membership};
use crate::rng::SeedTree;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Starting graph for a Markov chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Empty,
    /// Bernoulli draw at density `logistic(theta_edge)`.
    #[default]
    BernoulliMatch,
}

/// Metropolis chain settings. `None` selects the size-dependent defaults
/// `burn_in = 20 n^2` and `spacing = n^2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub burn_in: Option<u64>,
    pub spacing: Option<u64>,
    #[serde(default)]
    pub initial: InitialState,
}

impl McmcConfig {
    pub fn burn_in_for(&self, n: usize) -> u64 {
        self.burn_in.unwrap_or(20 * (n * n) as u64)
    }

    pub fn spacing_for(&self, n: usize) -> u64 {
        self.spacing.unwrap_or(((n * n) as u64).max(1))
    }

    fn validate(&self) -> Result<()> {
        if self.spacing == Some(0) {
            return Err(Error::InvalidParameter("mcmc spacing must be >= 1".into()));
        }
        Ok(())
    }
}

/// Rule for the number of blocks in hierarchical models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `K = round(n / nodes_per_block)`, at least 1.
    PerNodes(usize),
    Fixed(usize),
}

impl Default for KRule {
    fn default() -> Self {
        KRule::PerNodes(5)
    }
}

impl KRule {
    pub fn blocks_for(&self, n: usize) -> usize {
        match *self {
            KRule::PerNodes(per) => ((n as f64 / per as f64).round() as usize).max(1),
            KRule::Fixed(k) => k.max(1),
        }
    }
}

/// How within-block parameters are obtained from their Normal(mu, I) prior.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ThetaDraw {
    /// Fresh draw for every simulated network.
    #[default]
    PerNetwork,
    /// One draw shared by every network generated with this seed.
    PerDataset { seed: u64 },
    /// No prior noise: `theta_within = mu`.
    Pinned,
}

impl ThetaDraw {
    fn draw<R: Rng + ?Sized, const D: usize>(&self, mu: [f64; D], rng: &mut R) -> [f64; D] {
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        match *self {
            ThetaDraw::Pinned => mu,
            ThetaDraw::PerNetwork => mu.map(|m| m + std.sample(rng)),
            ThetaDraw::PerDataset { seed } => {
                let mut r = SeedTree::new(seed).stream("theta-within", &[]);
                mu.map(|m| m + std.sample(&mut r))
            }
        }
    }
}

fn default_alpha() -> f64 {
    10.0
}

/// Hierarchical Bernoulli: within-block tie log-odds `mu_within` (plus prior
/// noise), between-block probability `p_btw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierBernoulliSpec {
    pub mu_within: f64,
    pub p_btw: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub k_rule: KRule,
    #[serde(default)]
    pub theta_draw: ThetaDraw,
}

/// Hierarchical Markov ERGM: Markov ERGM inside blocks with parameters drawn
/// around `mu_within`, Bernoulli(`p_btw`) between blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierMarkovSpec {
    pub mu_within: [f64; 3],
    pub p_btw: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub k_rule: KRule,
    #[serde(default)]
    pub theta_draw: ThetaDraw,
    #[serde(default)]
    pub mcmc: McmcConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ModelSpec {
    ErdosRenyi,
    Bernoulli {
        p: f64,
    },
    OffsetBernoulli {
        theta_deg: f64,
    },
    MarkovErgm {
        theta: [f64; 3],
        #[serde(default)]
        mcmc: McmcConfig,
    },
    HierBernoulli(HierBernoulliSpec),
    HierMarkov(HierMarkovSpec),
}

impl ModelSpec {
    /// Fitted Markov parameters of the Florentine marriage network.
    pub const FLORENTINE_THETA: [f64; 3] = [-1.55, -0.05, 0.25];

    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::ErdosRenyi => "erdos_renyi",
            ModelSpec::Bernoulli { .. } => "bernoulli",
            ModelSpec::OffsetBernoulli { .. } => "offset_bernoulli",
            ModelSpec::MarkovErgm { .. } => "markov_ergm",
            ModelSpec::HierBernoulli(_) => "hier_bernoulli",
            ModelSpec::HierMarkov(_) => "hier_markov",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64, what: &str| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{what} = {p} not in [0, 1]"
                )))
            }
        };
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match self {
            ModelSpec::ErdosRenyi => Ok(()),
            ModelSpec::Bernoulli { p } => prob(*p, "p"),
            ModelSpec::OffsetBernoulli { theta_deg } => {
                if theta_deg.is_nan() {
                    Err(Error::InvalidParameter("theta_deg is NaN".into()))
                } else {
                    Ok(())
                }
            }
            ModelSpec::MarkovErgm { theta, mcmc } => {
                for t in theta {
                    finite(*t, "theta")?;
                }
                mcmc.validate()
            }
            ModelSpec::HierBernoulli(h) => {
                finite(h.mu_within, "mu_within")?;
                prob(h.p_btw, "p_btw")?;
                check_alpha(h.alpha)
            }
            ModelSpec::HierMarkov(h) => {
                for t in h.mu_within {
                    finite(t, "mu_within")?;
                }
                prob(h.p_btw, "p_btw")?;
                check_alpha(h.alpha)?;
                h.mcmc.validate()
            }
        }
    }

    /// One graph on `n` nodes.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Graph {
        match *self {
            ModelSpec::ErdosRenyi => gen_erdos_renyi(n, rng),
            ModelSpec::Bernoulli { p } => gen_bernoulli(n, p, rng),
            ModelSpec::OffsetBernoulli { theta_deg } => gen_offset_bernoulli(n, theta_deg, rng),
            ModelSpec::MarkovErgm { theta, mcmc } => gen_markov_ergm(n, theta, &mcmc, rng),
            ModelSpec::HierBernoulli(ref h) => gen_hier_bernoulli(n, h, rng),
            ModelSpec::HierMarkov(ref h) => gen_hier_markov(n, h, rng),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must be > 0"
        )))
    }
}

/// Every dyad independently present with probability `p`.
pub fn gen_bernoulli<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                g.toggle(i, j);
            }
        }
    }
    g
}

pub fn gen_erdos_renyi<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Graph {
    gen_bernoulli(n, 0.5, rng)
}

/// Tie probability of the mean-degree-preserving model on `n` nodes.
pub fn offset_tie_probability(n: usize, theta_deg: f64) -> f64 {
    logistic(theta_deg - (n as f64).ln())
}

/// Bernoulli graph with tie log-odds `theta_deg + log(1/n)`.
pub fn gen_offset_bernoulli<R: Rng + ?Sized>(n: usize, theta_deg: f64, rng: &mut R) -> Graph {
    gen_bernoulli(n, offset_tie_probability(n, theta_deg), rng)
}

/// Change in (edges, 2-stars, triangles) from toggling dyad `{i, j}`.
pub fn ergm_change_stats(g: &Graph, i: usize, j: usize) -> Result<[i64; 3]> {
    if i == j {
        return Err(Error::SelfLoop(i));
    }
    let n = g.node_count();
    if i >= n || j >= n {
        return Err(Error::NodeOutOfRange { node: i.max(j), n });
    }
    Ok(change_stats(g, i, j))
}

#[inline]
fn change_stats(g: &Graph, i: usize, j: usize) -> [i64; 3] {
    let di = g.degree(i) as i64;
    let dj = g.degree(j) as i64;
    let cn = g.common_neighbors(i, j) as i64;
    if g.has_edge(i, j) {
        [-1, -(di - 1 + dj - 1), -cn]
    } else {
        [1, di + dj, cn]
    }
}

/// Metropolis sampler for the Markov ERGM with uniform dyad-toggle proposals.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    theta: [f64; 3],
    state: Graph,
    proposals: u64,
    accepted: u64,
}

impl MarkovChain {
    pub fn new<R: Rng + ?Sized>(
        n: usize,
        theta: [f64; 3],
        init: InitialState,
        rng: &mut R,
    ) -> Self {
        let state = match init {
            InitialState::Empty => Graph::empty(n),
            InitialState::BernoulliMatch => gen_bernoulli(n, logistic(theta[0]), rng),
        };
        MarkovChain {
            theta,
            state,
            proposals: 0,
            accepted: 0,
        }
    }

    pub fn state(&self) -> &Graph {
        &self.state
    }

    pub fn into_state(self) -> Graph {
        self.state
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    /// Runs `steps` toggle proposals. The dyad is an ordered pair drawn
    /// uniformly; `i == j` is a null move, which keeps the chain aperiodic
    /// when every toggle would be accepted (e.g. at theta = 0).
    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        let n = self.state.node_count();
        if n < 2 {
            return;
        }
        for _ in 0..steps {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            self.proposals += 1;
            if i == j {
                continue;
            }
            let d = change_stats(&self.state, i, j);
            let log_ratio: f64 = self.theta.iter().zip(d).map(|(t, dh)| t * dh as f64).sum();
            // min(1, e^r): accept outright when r >= 0
            if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
                self.state.toggle(i, j);
                self.accepted += 1;
            }
        }
    }
}

/// One Markov ERGM draw after `burn_in` proposals.
pub fn gen_markov_ergm<R: Rng + ?Sized>(
    n: usize,
    theta: [f64; 3],
    cfg: &McmcConfig,
    rng: &mut R,
) -> Graph {
    let mut chain = MarkovChain::new(n, theta, cfg.initial, rng);
    chain.run(cfg.burn_in_for(n), rng);
    chain.into_state()
}

/// `draws` retained states from one chain, `spacing` proposals apart.
pub fn markov_ergm_draws<R: Rng + ?Sized>(
    n: usize,
    theta: [f64; 3],
    cfg: &McmcConfig,
    draws: usize,
    rng: &mut R,
) -> Vec<Graph> {
    let mut chain = MarkovChain::new(n, theta, cfg.initial, rng);
    chain.run(cfg.burn_in_for(n), rng);
    let spacing = cfg.spacing_for(n);
    let mut out = Vec::with_capacity(draws);
    for d in 0..draws {
        if d > 0 {
            chain.run(spacing, rng);
        }
        out.push(chain.state().clone());
    }
    out
}

/// `pi ~ Dirichlet(alpha 1_K)`, then nodes assigned i.i.d. from `pi`.
pub fn sample_membership<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Membership> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::InvalidParameter(
            "block count must be at least 1".into(),
        ));
    }
    if k == 1 {
        return Membership::new(vec![0; n], 1);
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let weights: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let assignment = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            for (b, w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    return b;
                }
            }
            k - 1
        })
        .collect();
    Membership::new(assignment, k)
}

/// Hierarchical Bernoulli graph with freshly drawn membership.
pub fn gen_hier_bernoulli<R: Rng + ?Sized>(
    n: usize,
    spec: &HierBernoulliSpec,
    rng: &mut R,
) -> Graph {
    let k = spec.k_rule.blocks_for(n);
    let z = sample_membership(n, k, spec.alpha, rng).expect("validated spec");
    let [theta_w] = spec.theta_draw.draw([spec.mu_within], rng);
    hier_bernoulli_given(&z, logistic(theta_w), spec.p_btw, rng)
}

/// Hierarchical Bernoulli graph conditional on a membership.
pub fn hier_bernoulli_given<R: Rng + ?Sized>(
    z: &Membership,
    p_within: f64,
    p_btw: f64,
    rng: &mut R,
) -> Graph {
    let n = z.assignment().len();
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if z.block_of(i) == z.block_of(j) {
                p_within
            } else {
                p_btw
            };
            if rng.random::<f64>() < p {
                g.toggle(i, j);
            }
        }
    }
    g
}

/// Hierarchical Markov ERGM graph with freshly drawn membership.
pub fn gen_hier_markov<R: Rng + ?Sized>(n: usize, spec: &HierMarkovSpec, rng: &mut R) -> Graph {
    let k = spec.k_rule.blocks_for(n);
    let z = sample_membership(n, k, spec.alpha, rng).expect("validated spec");
    let theta_w = spec.theta_draw.draw(spec.mu_within, rng);
    hier_markov_given(&z, theta_w, spec.p_btw, &spec.mcmc, rng)
}

pub fn hier_markov_given<R: Rng + ?Sized>(
    z: &Membership,
    theta_w: [f64; 3],
    p_btw: f64,
    mcmc: &McmcConfig,
    rng: &mut R,
) -> Graph {
    let n = z.assignment().len();
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if z.block_of(i) != z.block_of(j) && rng.random::<f64>() < p_btw {
                g.toggle(i, j);
            }
        }
    }
    for members in z.blocks() {
        if members.len() < 2 {
            continue;
        }
        let block = gen_markov_ergm(members.len(), theta_w, mcmc, rng);
        for (a, b) in block.edge_list() {
            g.insert(members[a], members[b]);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::stats::subgraph_census;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn bernoulli_limits() {
        let mut r = rng(1);
        assert_eq!(gen_bernoulli(30, 0.0, &mut r).edge_count(), 0);
        assert_eq!(gen_bernoulli(30, 1.0, &mut r), Graph::complete(30));
    }

    #[test]
    fn bernoulli_density() {
        let mut r = rng(2);
        let n = 100;
        let reps = 200;
        let dens: Vec<f64> = (0..reps)
            .map(|_| gen_bernoulli(n, 0.2, &mut r).edge_count() as f64 / 4950.0)
            .collect();
        let mean = dens.iter().sum::<f64>() / reps as f64;
        let se = (0.2 * 0.8 / 4950.0 / reps as f64).sqrt();
        assert!((mean - 0.2).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn er_single_dyad_and_determinism() {
        let mut r = rng(3);
        let draws = 10_000;
        let hits = (0..draws)
            .filter(|_| gen_erdos_renyi(2, &mut r).edge_count() == 1)
            .count() as f64;
        let se = (0.25 / draws as f64).sqrt();
        assert!((hits / draws as f64 - 0.5).abs() < 3.0 * se);

        let a = gen_erdos_renyi(40, &mut rng(9));
        let b = gen_erdos_renyi(40, &mut rng(9));
        assert_eq!(a, b);
    }

    #[test]
    fn offset_limits_and_probability() {
        assert!(offset_tie_probability(20, -30.0) < 1e-9);
        assert_eq!(gen_offset_bernoulli(50, -30.0, &mut rng(4)).edge_count(), 0);
        let p = offset_tie_probability(20, 3f64.ln());
        assert!((p - 3.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn change_stats_examples() {
        assert_eq!(
            ergm_change_stats(&Graph::empty(3), 0, 1).unwrap(),
            [1, 0, 0]
        );
        assert_eq!(ergm_change_stats(&Graph::path(3), 0, 2).unwrap(), [1, 2, 1]);
        assert_eq!(
            ergm_change_stats(&Graph::complete(3), 0, 1).unwrap(),
            [-1, -2, -1]
        );
        assert!(ergm_change_stats(&Graph::empty(3), 1, 1).is_err());
    }

    #[test]
    fn change_stats_match_recount() {
        let mut r = rng(5);
        for _ in 0..500 {
            let n = r.random_range(2..12);
            let g = gen_bernoulli(n, r.random(), &mut r);
            let i = r.random_range(0..n);
            let j = (i + r.random_range(1..n)) % n;
            let before = subgraph_census(&g);
            let mut h = g.clone();
            h.toggle(i, j);
            let after = subgraph_census(&h);
            assert_eq!(ergm_change_stats(&g, i, j).unwrap(), after.delta(&before));
        }
    }

    #[test]
    fn zero_theta_is_uniform_density() {
        let mut r = rng(6);
        let n = 30;
        let reps = 100;
        let cfg = McmcConfig::default();
        let mean = (0..reps)
            .map(|_| gen_markov_ergm(n, [0.0; 3], &cfg, &mut r).edge_count() as f64 / 435.0)
            .sum::<f64>()
            / reps as f64;
        let se = (0.25 / 435.0 / reps as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn membership_cases() {
        let z = sample_membership(10, 1, 10.0, &mut rng(7)).unwrap();
        assert!(z.assignment().iter().all(|&b| b == 0));
        let a = sample_membership(50, 4, 10.0, &mut rng(8)).unwrap();
        let b = sample_membership(50, 4, 10.0, &mut rng(8)).unwrap();
        assert_eq!(a, b);
        assert!(sample_membership(5, 0, 10.0, &mut rng(8)).is_err());
        assert!(sample_membership(5, 2, 0.0, &mut rng(8)).is_err());
    }

    #[test]
    fn k_rule() {
        assert_eq!(KRule::default().blocks_for(20), 4);
        assert_eq!(KRule::default().blocks_for(2), 1);
        assert_eq!(KRule::default().blocks_for(100), 20);
        assert_eq!(KRule::Fixed(0).blocks_for(100), 1);
    }

    #[test]
    fn hier_markov_single_block_is_markov() {
        let spec = HierMarkovSpec {
            mu_within: [0.0; 3],
            p_btw: 1.0,
            alpha: 10.0,
            k_rule: KRule::Fixed(1),
            theta_draw: ThetaDraw::Pinned,
            mcmc: McmcConfig::default(),
        };
        // p_btw = 1 would add every between-block tie; with K = 1 there are none
        let mut r = rng(10);
        let mean = (0..60)
            .map(|_| gen_hier_markov(20, &spec, &mut r).edge_count() as f64 / 190.0)
            .sum::<f64>()
            / 60.0;
        assert!((mean - 0.5).abs() < 0.05, "{mean}");
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::Bernoulli { p: 1.5 }.validate().is_err());
        assert!(ModelSpec::MarkovErgm {
            theta: [f64::NAN, 0.0, 0.0],
            mcmc: McmcConfig::default()
        }
        .validate()
        .is_err());
        let bad_mcmc = McmcConfig {
            spacing: Some(0),
            ..Default::default()
        };
        assert!(ModelSpec::MarkovErgm {
            theta: [0.0; 3],
            mcmc: bad_mcmc
        }
        .validate()
        .is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec = ModelSpec::MarkovErgm {
            theta: ModelSpec::FLORENTINE_THETA,
            mcmc: McmcConfig::default(),
        };
        let js = serde_json::to_value(spec).unwrap();
        assert_eq!(js["family"], "markov_ergm");
        let back: ModelSpec = serde_json::from_value(js).unwrap();
        assert_eq!(back, spec);
    }
}
