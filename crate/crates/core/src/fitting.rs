//! Estimators for the mixture component families.
//!
//! Bernoulli and offset-Bernoulli fits are closed form. The hierarchical
//! Bernoulli fit is a collapsed Gibbs sampler over block memberships with
//! conjugate Beta priors on the within- and between-block tie probabilities
//! and a truncated stick-breaking prior on block weights.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{logit, HierBernoulliSpec, KRule, ModelSpec, ThetaDraw};
use crate::graph::Graph;

/// Families usable as mixture components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentFamily {
    ErdosRenyi,
    Bernoulli,
    OffsetBernoulli,
    HierBernoulli,
}

impl ComponentFamily {
    pub const ALL: [ComponentFamily; 4] = [
        ComponentFamily::ErdosRenyi,
        ComponentFamily::Bernoulli,
        ComponentFamily::OffsetBernoulli,
        ComponentFamily::HierBernoulli,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentFamily::ErdosRenyi => "erdos_renyi",
            ComponentFamily::Bernoulli => "bernoulli",
            ComponentFamily::OffsetBernoulli => "offset_bernoulli",
            ComponentFamily::HierBernoulli => "hier_bernoulli",
        }
    }
}

impl std::str::FromStr for ComponentFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        ComponentFamily::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown component family '{s}'")))
    }
}

/// Sampler trace summary for a hierarchical fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsDiagnostics {
    pub sweeps: usize,
    pub burn_in_sweeps: usize,
    pub k_max: usize,
    /// Occupied-block count after every sweep.
    pub occupancy: Vec<u16>,
    pub initial_log_posterior: f64,
    /// Highest log posterior among retained samples.
    pub best_log_posterior: f64,
    pub best_assignment: Vec<usize>,
    pub prior: String,
}

/// Parameter estimates for one observed network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedParams {
    ErdosRenyi,
    Bernoulli {
        theta_edge: f64,
        p: f64,
        clamped: bool,
    },
    OffsetBernoulli {
        theta_deg: f64,
        p: f64,
        n: usize,
        clamped: bool,
    },
    HierBernoulli {
        p_within: f64,
        p_btw: f64,
        k: usize,
        n: usize,
        diagnostics: Box<GibbsDiagnostics>,
    },
}

impl FittedParams {
    pub fn family(&self) -> ComponentFamily {
        match self {
            FittedParams::ErdosRenyi => ComponentFamily::ErdosRenyi,
            FittedParams::Bernoulli { .. } => ComponentFamily::Bernoulli,
            FittedParams::OffsetBernoulli { .. } => ComponentFamily::OffsetBernoulli,
            FittedParams::HierBernoulli { .. } => ComponentFamily::HierBernoulli,
        }
    }

    /// Generative model used to simulate reference graphs from this fit.
    /// Hierarchical fits keep the fitted block count and pin the within-block
    /// log-odds; memberships are redrawn per graph with `alpha = 10`.
    pub fn reference_model(&self) -> ModelSpec {
        match *self {
            FittedParams::ErdosRenyi => ModelSpec::ErdosRenyi,
            FittedParams::Bernoulli { p, .. } => ModelSpec::Bernoulli { p },
            FittedParams::OffsetBernoulli { theta_deg, .. } => {
                ModelSpec::OffsetBernoulli { theta_deg }
            }
            FittedParams::HierBernoulli {
                p_within, p_btw, k, ..
            } => ModelSpec::HierBernoulli(HierBernoulliSpec {
                mu_within: logit(p_within),
                p_btw,
                alpha: 10.0,
                k_rule: KRule::Fixed(k),
                theta_draw: ThetaDraw::Pinned,
            }),
        }
    }

    pub fn is_clamped(&self) -> bool {
        match self {
            FittedParams::Bernoulli { clamped, .. }
            | FittedParams::OffsetBernoulli { clamped, .. } => *clamped,
            _ => false,
        }
    }
}

/// Observed density with the half-dyad clamp; returns `(p, clamped)`.
fn clamped_density(g: &Graph) -> Result<(f64, bool)> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "fitting needs n >= 2 (got {n})"
        )));
    }
    let dyads = g.dyad_count() as f64;
    let p = g.edge_count() as f64 / dyads;
    let eps = 1.0 / (2.0 * dyads);
    if p < eps {
        Ok((eps, true))
    } else if p > 1.0 - eps {
        Ok((1.0 - eps, true))
    } else {
        Ok((p, false))
    }
}

pub fn fit_bernoulli(g: &Graph) -> Result<FittedParams> {
    let (p, clamped) = clamped_density(g)?;
    Ok(FittedParams::Bernoulli {
        theta_edge: logit(p),
        p,
        clamped,
    })
}

pub fn fit_offset_bernoulli(g: &Graph) -> Result<FittedParams> {
    let (p, clamped) = clamped_density(g)?;
    let n = g.node_count();
    Ok(FittedParams::OffsetBernoulli {
        theta_deg: logit(p) + (n as f64).ln(),
        p,
        n,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub sweeps: usize,
    pub burn_in_sweeps: usize,
    /// Truncation level as a function of `n`.
    pub k_max_rule: KRule,
    /// Beta(a, b) prior shared by the within and between tie probabilities.
    pub beta_prior: (f64, f64),
    /// Stick-breaking concentration.
    pub concentration: f64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            sweeps: 2000,
            burn_in_sweeps: 500,
            k_max_rule: KRule::PerNodes(5),
            beta_prior: (1.0, 1.0),
            concentration: 10.0,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.beta_prior;
        if self.sweeps <= self.burn_in_sweeps {
            return Err(Error::InvalidParameter(
                "gibbs sweeps must exceed burn-in sweeps".into(),
            ));
        }
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(
                "beta prior parameters must be > 0".into(),
            ));
        }
        if !(self.concentration > 0.0) {
            return Err(Error::InvalidParameter("concentration must be > 0".into()));
        }
        Ok(())
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Sufficient statistics of a partition: within/between edge and pair counts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct BlockCounts {
    within_edges: f64,
    within_pairs: f64,
    between_edges: f64,
    between_pairs: f64,
}

impl BlockCounts {
    fn of(g: &Graph, z: &[usize]) -> Self {
        let n = g.node_count();
        let mut c = BlockCounts::default();
        for i in 0..n {
            for j in (i + 1)..n {
                let e = f64::from(u8::from(g.has_edge(i, j)));
                if z[i] == z[j] {
                    c.within_pairs += 1.0;
                    c.within_edges += e;
                } else {
                    c.between_pairs += 1.0;
                    c.between_edges += e;
                }
            }
        }
        c
    }

    fn log_marginal(&self, a: f64, b: f64) -> f64 {
        ln_beta(
            a + self.within_edges,
            b + self.within_pairs - self.within_edges,
        ) + ln_beta(
            a + self.between_edges,
            b + self.between_pairs - self.between_edges,
        ) - 2.0 * ln_beta(a, b)
    }

    fn posterior_means(&self, a: f64, b: f64) -> (f64, f64) {
        (
            (a + self.within_edges) / (a + b + self.within_pairs),
            (a + self.between_edges) / (a + b + self.between_pairs),
        )
    }
}

/// Log probability of block sizes under a truncated stick-breaking prior
/// with `V_k ~ Beta(1, gamma)` (weights integrated out).
fn log_stick_prior(sizes: &[usize], gamma: f64) -> f64 {
    let k = sizes.len();
    let mut tail: usize = sizes.iter().sum();
    let mut lp = 0.0;
    for &nk in &sizes[..k.saturating_sub(1)] {
        tail -= nk;
        lp += ln_beta(1.0 + nk as f64, gamma + tail as f64) - ln_beta(1.0, gamma);
    }
    lp
}

/// Joint log posterior (up to a constant) of a membership vector.
pub fn hier_log_posterior(g: &Graph, z: &[usize], k_max: usize, cfg: &GibbsConfig) -> f64 {
    let (a, b) = cfg.beta_prior;
    let mut sizes = vec![0; k_max];
    for &b in z {
        sizes[b] += 1;
    }
    BlockCounts::of(g, z).log_marginal(a, b) + log_stick_prior(&sizes, cfg.concentration)
}

/// Collapsed Gibbs fit of the hierarchical Bernoulli model.
///
/// Estimates are Rao–Blackwellized posterior means of the within and
/// between tie probabilities over retained sweeps; the block count is the
/// posterior mode of the number of occupied blocks.
pub fn fit_hier_bernoulli<R: Rng + ?Sized>(
    g: &Graph,
    cfg: &GibbsConfig,
    rng: &mut R,
) -> Result<FittedParams> {
    cfg.validate()?;
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "fitting needs n >= 2 (got {n})"
        )));
    }
    let k_max = cfg.k_max_rule.blocks_for(n);
    let (a, b) = cfg.beta_prior;
    let gamma = cfg.concentration;

    let mut z: Vec<usize> = (0..n).map(|_| rng.random_range(0..k_max)).collect();
    let mut sizes = vec![0usize; k_max];
    for &blk in &z {
        sizes[blk] += 1;
    }
    let mut counts = BlockCounts::of(g, &z);
    let degrees = g.degrees();
    let initial_log_posterior = counts.log_marginal(a, b) + log_stick_prior(&sizes, gamma);

    let mut links = vec![0usize; k_max];
    let mut logw = vec![0.0f64; k_max];
    let mut occupancy = Vec::with_capacity(cfg.sweeps);
    let mut k_hist = vec![0usize; k_max + 1];
    let (mut sum_w, mut sum_b) = (0.0, 0.0);
    let mut best_log_posterior = f64::NEG_INFINITY;
    let mut best_assignment = z.clone();

    for sweep in 0..cfg.sweeps {
        for i in 0..n {
            links.fill(0);
            for j in g.neighbors(i) {
                links[z[j]] += 1;
            }
            let deg = degrees[i] as f64;
            let old = z[i];
            sizes[old] -= 1;
            let own = links[old] as f64;
            counts.within_edges -= own;
            counts.within_pairs -= sizes[old] as f64;
            counts.between_edges -= deg - own;
            counts.between_pairs -= (n - 1 - sizes[old]) as f64;

            // stick-breaking predictive: E[V_k] prod_{l<k} (1 - E[V_l])
            let mut tail: usize = n - 1;
            let mut log_rest = 0.0;
            for k in 0..k_max {
                let nk = sizes[k];
                tail -= nk;
                let log_prior = if k + 1 == k_max {
                    log_rest
                } else {
                    let denom = 1.0 + gamma + (nk + tail) as f64;
                    let lp = log_rest + ((1.0 + nk as f64) / denom).ln();
                    log_rest += ((gamma + tail as f64) / denom).ln();
                    lp
                };
                let e = links[k] as f64;
                let cand = BlockCounts {
                    within_edges: counts.within_edges + e,
                    within_pairs: counts.within_pairs + nk as f64,
                    between_edges: counts.between_edges + deg - e,
                    between_pairs: counts.between_pairs + (n - 1 - nk) as f64,
                };
                logw[k] = log_prior
                    + ln_beta(
                        a + cand.within_edges,
                        b + cand.within_pairs - cand.within_edges,
                    )
                    + ln_beta(
                        a + cand.between_edges,
                        b + cand.between_pairs - cand.between_edges,
                    );
            }
            let new = sample_log_weights(&logw, rng);

            z[i] = new;
            let e = links[new] as f64;
            counts.within_edges += e;
            counts.within_pairs += sizes[new] as f64;
            counts.between_edges += deg - e;
            counts.between_pairs += (n - 1 - sizes[new]) as f64;
            sizes[new] += 1;
        }

        let occupied = sizes.iter().filter(|&&s| s > 0).count();
        occupancy.push(occupied as u16);
        if sweep >= cfg.burn_in_sweeps {
            let (pw, pb) = counts.posterior_means(a, b);
            sum_w += pw;
            sum_b += pb;
            k_hist[occupied] += 1;
            let lp = counts.log_marginal(a, b) + log_stick_prior(&sizes, gamma);
            if lp > best_log_posterior {
                best_log_posterior = lp;
                best_assignment.clone_from(&z);
            }
        }
    }

    let kept = (cfg.sweeps - cfg.burn_in_sweeps) as f64;
    // ties resolve to the smaller block count
    let k_hat = k_hist
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|&(_, c)| *c)
        .map(|(k, _)| k)
        .unwrap_or(1)
        .max(1);

    Ok(FittedParams::HierBernoulli {
        p_within: sum_w / kept,
        p_btw: sum_b / kept,
        k: k_hat,
        n,
        diagnostics: Box::new(GibbsDiagnostics {
            sweeps: cfg.sweeps,
            burn_in_sweeps: cfg.burn_in_sweeps,
            k_max,
            occupancy,
            initial_log_posterior,
            best_log_posterior,
            best_assignment,
            prior: "beta-bernoulli conjugate, truncated stick-breaking".into(),
        }),
    })
}

fn sample_log_weights<R: Rng + ?Sized>(logw: &[f64], rng: &mut R) -> usize {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logw.iter().map(|&l| (l - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &l) in logw.iter().enumerate() {
        u -= (l - max).exp();
        if u < 0.0 {
            return k;
        }
    }
    logw.len() - 1
}

/// Fits `family` to `g`. The Erdős–Rényi family has nothing to estimate.
pub fn fit_family<R: Rng + ?Sized>(
    family: ComponentFamily,
    g: &Graph,
    gibbs: &GibbsConfig,
    rng: &mut R,
) -> Result<FittedParams> {
    match family {
        ComponentFamily::ErdosRenyi => Ok(FittedParams::ErdosRenyi),
        ComponentFamily::Bernoulli => fit_bernoulli(g),
        ComponentFamily::OffsetBernoulli => fit_offset_bernoulli(g),
        ComponentFamily::HierBernoulli => fit_hier_bernoulli(g, gibbs, rng),
    }
}
