//! Studentized range distribution and Tukey's HSD for balanced designs.

use alloc::vec::Vec;

use super::special::{gauss_legendre, integrate, ln_gamma, normal_cdf, normal_pdf};
use super::StatsError;

const NODES: usize = 16;
const Z_LIMIT: f64 = 8.5;
const INNER_PANELS: usize = 17;
const OUTER_PANELS: usize = 24;
/// Above this the studentizing scale is treated as known.
const DF_INFINITE: f64 = 1e5;

/// Precomputed inner quadrature: nodes with `φ(z)` and `Φ(z)`.
struct RangeRule {
    z: Vec<f64>,
    weight: Vec<f64>,
    cdf: Vec<f64>,
}

impl RangeRule {
    fn new(rule: &(Vec<f64>, Vec<f64>)) -> Self {
        let h = 2.0 * Z_LIMIT / INNER_PANELS as f64;
        let mut z = Vec::with_capacity(INNER_PANELS * NODES);
        let mut weight = Vec::with_capacity(INNER_PANELS * NODES);
        for p in 0..INNER_PANELS {
            let mid = -Z_LIMIT + (p as f64 + 0.5) * h;
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let zi = mid + 0.5 * h * x;
                z.push(zi);
                weight.push(0.5 * h * w * normal_pdf(zi));
            }
        }
        let cdf = z.iter().map(|&zi| normal_cdf(zi)).collect();
        Self { z, weight, cdf }
    }

    /// `P(range of k standard normals <= w)`.
    fn range_cdf(&self, w: f64, k: usize) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..self.z.len() {
            let d = self.cdf[i] - normal_cdf(self.z[i] - w);
            if d > 0.0 {
                total += self.weight[i] * libm::pow(d, (k - 1) as f64);
            }
        }
        (k as f64 * total).min(1.0)
    }
}

/// Log-density of `S = sqrt(χ²_ν / ν)`.
fn ln_scale_density(s: f64, nu: f64) -> f64 {
    let h = 0.5 * nu;
    core::f64::consts::LN_2 + h * libm::log(h) - ln_gamma(h) + (nu - 1.0) * libm::log(s) - h * s * s
}

/// CDF of the studentized range `Q` for `k` means and `df` error degrees of
/// freedom.
pub fn ptukey(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2 && df > 0.0);
    if q <= 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    let rule = gauss_legendre(NODES);
    let inner = RangeRule::new(&rule);
    if df > DF_INFINITE {
        return inner.range_cdf(q, k);
    }
    let sd = 1.0 / libm::sqrt(2.0 * df);
    let lo = (1.0 - 12.0 * sd).max(0.0);
    let hi = 1.0 + 12.0 * sd;
    let p = integrate(
        |s| libm::exp(ln_scale_density(s, df)) * inner.range_cdf(q * s, k),
        lo,
        hi,
        OUTER_PANELS,
        &rule,
    );
    p.clamp(0.0, 1.0)
}

/// Quantile of the studentized range: the `q` with `ptukey(q, k, df) = p`.
pub fn qtukey(p: f64, k: usize, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let f = |q: f64| ptukey(q, k, df) - p;
    let (mut a, mut fa) = (0.0, -p);
    let mut b = 2.0;
    let mut fb = f(b);
    while fb < 0.0 {
        a = b;
        fa = fb;
        b *= 2.0;
        fb = f(b);
    }
    // Illinois regula falsi.
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < 1e-10 {
            return c;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else {
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        b = c;
        fb = fc;
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairComparison {
    pub a: usize,
    pub b: usize,
    /// `mean_a - mean_b`.
    pub mean_diff: f64,
    pub significant: bool,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TukeyResult {
    pub means: Vec<f64>,
    /// All pairs `a < b` in lexicographic order.
    pub pairs: Vec<PairComparison>,
    /// Group indices from lowest to highest mean; ties keep input order.
    pub ranking: Vec<usize>,
    pub mse: f64,
    pub df: usize,
    pub q_critical: f64,
    /// Minimum significant difference, `q_critical * sqrt(mse / m)`.
    pub hsd: f64,
}

impl TukeyResult {
    /// Rank of each group, 1 being the lowest mean.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = alloc::vec![0; self.ranking.len()];
        for (r, &g) in self.ranking.iter().enumerate() {
            ranks[g] = r + 1;
        }
        ranks
    }
}

pub fn tukey_hsd(groups: &[&[f64]], alpha: f64) -> Result<TukeyResult, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    if let Some(i) = groups.iter().position(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup(i));
    }
    let m = groups[0].len();
    if let Some(g) = groups.iter().find(|g| g.len() != m) {
        return Err(StatsError::Unbalanced(m, g.len()));
    }
    let df = k * m - k;
    if df == 0 {
        return Err(StatsError::NoResidualDf);
    }
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / m as f64)
        .collect();
    let sse: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, mu)| g.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>())
        .sum();
    let mse = sse / df as f64;
    let se = libm::sqrt(mse / m as f64);
    let q_critical = qtukey(1.0 - alpha, k, df as f64);
    let hsd = q_critical * se;

    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let mean_diff = means[a] - means[b];
            let d = mean_diff.abs();
            let p_value = if se > 0.0 {
                1.0 - ptukey(d / se, k, df as f64)
            } else if d > 0.0 {
                0.0
            } else {
                1.0
            };
            pairs.push(PairComparison {
                a,
                b,
                mean_diff,
                significant: d > hsd,
                p_value,
            });
        }
    }
    let mut ranking: Vec<usize> = (0..k).collect();
    ranking.sort_by(|&a, &b| means[a].total_cmp(&means[b]));

    Ok(TukeyResult {
        means,
        pairs,
        ranking,
        mse,
        df,
        q_critical,
        hsd,
    })
}
