//! Distribution comparison across network sizes.
//!
//! - two-sample Kolmogorov–Smirnov distance between empirical CDFs
//! - k-sample Anderson–Darling statistic in the Scholz–Stephens midrank form
//!   (valid with ties), together with its standardized version
//!   `(A² - (k - 1)) / sigma`
//! - Pearson correlation of a statistic with network size

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::StatisticKind;

/// Defined statistic values observed at one network size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGroup {
    pub label: usize,
    pub values: Vec<f64>,
    /// Values excluded because the statistic was undefined.
    #[serde(default)]
    pub dropped: usize,
}

impl SampleGroup {
    pub fn new(label: usize, values: Vec<f64>) -> Self {
        SampleGroup {
            label,
            values,
            dropped: 0,
        }
    }

    /// Builds a group from optional values, counting the `None`s.
    pub fn from_optional<I: IntoIterator<Item = Option<f64>>>(label: usize, values: I) -> Self {
        let mut out = SampleGroup::new(label, Vec::new());
        for v in values {
            match v {
                Some(x) => out.values.push(x),
                None => out.dropped += 1,
            }
        }
        out
    }
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("sample contains NaN".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |F_x(x) - F_y(x)|` with right-continuous empirical CDFs.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Precondition("KS needs two nonempty samples".into()));
    }
    let xs = sorted(x)?;
    let ys = sorted(y)?;
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        // step past every copy of t in both samples before comparing
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        sup = sup.max((i as f64 / nx - j as f64 / ny).abs());
    }
    Ok(sup)
}

/// k-sample Anderson–Darling statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AndersonDarling {
    /// Midrank `A²_akN`; its null expectation is about `k - 1`.
    pub raw: f64,
    /// `(raw - (k - 1)) / sigma_N`.
    pub standardized: f64,
    pub k: usize,
    pub total: usize,
}

/// Null variance of `A²_kN` for group sizes `sizes`.
fn ad_null_variance(sizes: &[usize]) -> f64 {
    let k = sizes.len() as f64;
    let n_total: usize = sizes.iter().sum();
    let n = n_total as f64;
    let h_cap: f64 = sizes.iter().map(|&s| 1.0 / s as f64).sum();
    let h: f64 = (1..n_total).map(|i| 1.0 / i as f64).sum();
    // g = sum_{i=1}^{N-2} sum_{j=i+1}^{N-1} 1 / ((N - i) j)
    let mut g = 0.0;
    let mut tail = 0.0; // sum_{j=i+1}^{N-1} 1/j, built from the top down
    for i in (1..n_total.saturating_sub(1)).rev() {
        tail += 1.0 / (i + 1) as f64;
        g += tail / (n - i as f64);
    }
    let a = (4.0 * g - 6.0) * (k - 1.0) + (10.0 - 6.0 * g) * h_cap;
    let b = (2.0 * g - 4.0) * k * k + 8.0 * h * k + (2.0 * g - 14.0 * h - 4.0) * h_cap - 8.0 * h
        + 4.0 * g
        - 6.0;
    let c = (6.0 * h + 2.0 * g - 2.0) * k * k
        + (4.0 * h - 4.0 * g + 6.0) * k
        + (2.0 * h - 6.0) * h_cap
        + 4.0 * h;
    let d = (2.0 * h + 6.0) * k * k - 4.0 * h * k;
    (a * n.powi(3) + b * n * n + c * n + d) / ((n - 1.0) * (n - 2.0) * (n - 3.0))
}

/// Scholz–Stephens k-sample Anderson–Darling statistic (midrank version for
/// ties). Groups must be nonempty; at least two are required.
pub fn ad_k_sample(groups: &[&[f64]]) -> Result<AndersonDarling> {
    if groups.len() < 2 {
        return Err(Error::Precondition(
            "Anderson-Darling needs at least two groups".into(),
        ));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Precondition(
            "Anderson-Darling group is empty".into(),
        ));
    }
    let sorted_groups: Vec<Vec<f64>> = groups.iter().map(|g| sorted(g)).collect::<Result<_>>()?;
    let mut pooled: Vec<f64> = sorted_groups.iter().flatten().copied().collect();
    pooled.sort_by(f64::total_cmp);
    let n_total = pooled.len();
    let n = n_total as f64;

    // distinct pooled values and their multiplicities
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &v in &pooled {
        match distinct.last_mut() {
            Some((x, c)) if *x == v => *c += 1,
            _ => distinct.push((v, 1)),
        }
    }

    let mut raw = 0.0;
    for g in &sorted_groups {
        let ni = g.len() as f64;
        let mut below = 0usize; // pooled count strictly below current value
        let mut pos = 0usize; // group count strictly below current value
        let mut inner = 0.0;
        for &(z, l) in &distinct {
            let mut equal = 0usize;
            while pos + equal < g.len() && g[pos + equal] == z {
                equal += 1;
            }
            let lj = l as f64;
            let b = below as f64 + lj / 2.0;
            let m = pos as f64 + equal as f64 / 2.0;
            let denom = b * (n - b) - n * lj / 4.0;
            if denom > 0.0 {
                inner += lj * (n * m - b * ni).powi(2) / denom;
            }
            below += l;
            pos += equal;
        }
        raw += inner / ni;
    }
    raw *= (n - 1.0) / (n * n);

    let k = groups.len();
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let var = if n_total > 3 {
        ad_null_variance(&sizes)
    } else {
        f64::NAN
    };
    let standardized = (raw - (k as f64 - 1.0)) / var.sqrt();
    Ok(AndersonDarling {
        raw,
        standardized,
        k,
        total: n_total,
    })
}

/// Pearson product-moment correlation; `None` when either coordinate has
/// zero variance or fewer than two points are given.
pub fn pearson(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation of statistic values with network size.
pub fn pearson_with_n(values: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values.iter().map(|&(n, v)| (n as f64, v)).collect();
    pearson(&pts)
}

/// Pairwise KS matrix, Anderson–Darling and size correlation for one
/// statistic over size groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub statistic: StatisticKind,
    pub labels: Vec<usize>,
    /// Row-major `labels.len()²` matrix.
    pub ks_matrix: Vec<f64>,
    pub ad: AndersonDarling,
    pub pearson_r: Option<f64>,
    pub group_sizes: Vec<usize>,
    pub dropped: Vec<usize>,
}

impl ComparisonReport {
    pub fn ks(&self, a: usize, b: usize) -> f64 {
        self.ks_matrix[a * self.labels.len() + b]
    }
}

pub fn build_report(statistic: StatisticKind, groups: &[SampleGroup]) -> Result<ComparisonReport> {
    let groups: Vec<&SampleGroup> = groups.iter().filter(|g| !g.values.is_empty()).collect();
    if groups.len() < 2 {
        return Err(Error::Precondition(format!(
            "{statistic}: comparison needs at least two nonempty size groups"
        )));
    }
    let k = groups.len();
    let cells: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| ((a + 1)..k).map(move |b| (a, b)))
        .collect();
    let values = crate::par::map_indexed(cells.len(), |c| {
        let (a, b) = cells[c];
        ks_two_sample(&groups[a].values, &groups[b].values)
    });
    let mut ks_matrix = vec![0.0; k * k];
    for (&(a, b), v) in cells.iter().zip(values) {
        let v = v?;
        ks_matrix[a * k + b] = v;
        ks_matrix[b * k + a] = v;
    }
    let slices: Vec<&[f64]> = groups.iter().map(|g| g.values.as_slice()).collect();
    let ad = ad_k_sample(&slices)?;
    let points: Vec<(usize, f64)> = groups
        .iter()
        .flat_map(|g| g.values.iter().map(move |&v| (g.label, v)))
        .collect();
    Ok(ComparisonReport {
        statistic,
        labels: groups.iter().map(|g| g.label).collect(),
        ks_matrix,
        ad,
        pearson_r: pearson_with_n(&points),
        group_sizes: groups.iter().map(|g| g.values.len()).collect(),
        dropped: groups.iter().map(|g| g.dropped).collect(),
    })
}

/// Five-number summary with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    pub fn from_values(values: &[f64]) -> Option<Quartiles> {
        if values.is_empty() {
            return None;
        }
        let v = sorted(values).ok()?;
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Quartiles {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Two-sample KS critical value `c(alpha) sqrt((n+m)/(nm))` from the
/// asymptotic Kolmogorov distribution.
pub fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n * m) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        let q = Quartiles::from_values(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(
            (q.min, q.q1, q.median, q.q3, q.max),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
        let q = Quartiles::from_values(&[1.0, 2.0]).unwrap();
        assert_eq!((q.q1, q.median), (1.25, 1.5));
        assert!(Quartiles::from_values(&[]).is_none());
    }

    #[test]
    fn ks_examples() {
        assert_eq!(
            ks_two_sample(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap(),
            0.0
        );
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(
            ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap(),
            0.25
        );
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn ad_matches_reference_implementation() {
        // values from an independent (NumPy/SciPy) implementation of the midrank statistic
        let a = [1.0, 3.0, 3.0, 7.0, 9.0];
        let b = [2.0, 3.0, 5.0, 8.0];
        let c = [4.0, 6.0, 6.0, 10.0, 11.0, 12.0];
        let ad = ad_k_sample(&[&a, &b, &c]).unwrap();
        assert!(
            (ad.raw - 2.786_981_615_678_097_3).abs() < 1e-12,
            "{}",
            ad.raw
        );
        assert!(
            (ad.standardized - 0.856_435_285_686_466_5).abs() < 1e-9,
            "{}",
            ad.standardized
        );
    }

    #[test]
    fn ad_separated_exceeds_identical() {
        let same = ad_k_sample(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]).unwrap();
        let apart = ad_k_sample(&[&[1.0, 2.0, 3.0], &[101.0, 102.0, 103.0]]).unwrap();
        assert!(apart.raw > same.raw);
        assert!(apart.standardized > same.standardized);
    }

    #[test]
    fn ad_preconditions() {
        assert!(ad_k_sample(&[&[1.0]]).is_err());
        assert!(ad_k_sample(&[&[1.0], &[]]).is_err());
    }

    #[test]
    fn pearson_cases() {
        let lin: Vec<(usize, f64)> = (0..5)
            .map(|i| (20 + 10 * i, 3.0 * i as f64 + 1.0))
            .collect();
        assert!((pearson_with_n(&lin).unwrap() - 1.0).abs() < 1e-12);
        let flat: Vec<(usize, f64)> = (0..5).map(|i| (20 + 10 * i, 0.3)).collect();
        assert_eq!(pearson_with_n(&flat), None);
        assert_eq!(pearson_with_n(&[(3, 1.0)]), None);
    }

    #[test]
    fn report_structure() {
        let groups: Vec<SampleGroup> = (0..9)
            .map(|i| SampleGroup::new(20 + 10 * i, vec![1.0, 2.0, 3.0]))
            .collect();
        let r = build_report(StatisticKind::Density, &groups).unwrap();
        assert_eq!(r.ks_matrix.len(), 81);
        assert!(r.ks_matrix.iter().all(|&v| v == 0.0));
        assert!(build_report(StatisticKind::Density, &groups[..1]).is_err());
    }

    #[test]
    fn critical_value_1pct() {
        let c = ks_critical_value(0.01, 500, 500);
        assert!((c - 1.627_624 * (2.0f64 / 500.0).sqrt()).abs() < 1e-6);
    }
}
