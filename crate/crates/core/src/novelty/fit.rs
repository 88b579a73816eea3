use crate::ingest::Corpus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("fit undefined: corpus has fewer than two distinct tags")]
    Degenerate,
}

/// Distinct-tag count after `n` annotations, sampled at log-spaced `n`
/// (about `points_per_decade` per factor of ten) and always ending at the
/// total annotation count.
pub fn dictionary_growth(corpus: &Corpus, points_per_decade: usize) -> Vec<(u64, u64)> {
    let total = corpus.annotation_count() as u64;
    let checkpoints = log_checkpoints(1, total, points_per_decade);
    growth_at(corpus, &checkpoints)
}

fn log_checkpoints(start: u64, end: u64, per_decade: usize) -> Vec<u64> {
    if end == 0 {
        return Vec::new();
    }
    let start = start.clamp(1, end);
    let per_decade = per_decade.max(1) as f64;
    let steps = ((end as f64 / start as f64).log10() * per_decade).ceil() as usize;
    let mut out: Vec<u64> = (0..=steps)
        .map(|k| ((start as f64) * 10f64.powf(k as f64 / per_decade)).round() as u64)
        .map(|n| n.clamp(start, end))
        .collect();
    out.push(end);
    out.dedup();
    out
}

fn growth_at(corpus: &Corpus, checkpoints: &[u64]) -> Vec<(u64, u64)> {
    let mut seen = vec![false; corpus.tags().len()];
    let mut distinct = 0u64;
    let mut n = 0u64;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    'posts: for post in corpus.posts() {
        for &t in &post.tags {
            n += 1;
            if !seen[t.index()] {
                seen[t.index()] = true;
                distinct += 1;
            }
            while next.peek() == Some(&&n) {
                out.push((n, distinct));
                next.next();
            }
            if next.peek().is_none() {
                break 'posts;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeapsOptions {
    /// Leading fraction of annotations excluded from the fit.
    pub skip_fraction: f64,
    pub points_per_decade: usize,
}

impl Default for HeapsOptions {
    fn default() -> Self {
        Self { skip_fraction: 0.01, points_per_decade: 20 }
    }
}

/// `distinct ≈ exp(intercept) · annotations^beta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeapsFit {
    pub beta: f64,
    pub intercept: f64,
    /// Annotation-count range `[start, end]` covered by the fit.
    pub range: (u64, u64),
    /// RMS of the natural-log residuals.
    pub residual: f64,
    pub points: usize,
    /// Set when the range spans fewer than two decades.
    pub low_confidence: bool,
}

/// Least-squares Heaps exponent on log-log axes over the tail range.
pub fn heaps_fit(corpus: &Corpus, opts: &HeapsOptions) -> Result<HeapsFit, FitError> {
    if corpus.tags().len() < 2 {
        return Err(FitError::Degenerate);
    }
    let total = corpus.annotation_count() as u64;
    let start = ((opts.skip_fraction.clamp(0.0, 1.0) * total as f64).ceil() as u64).max(1);
    let checkpoints = log_checkpoints(start, total, opts.points_per_decade);
    let curve = growth_at(corpus, &checkpoints);
    if curve.len() < 2 {
        return Err(FitError::Degenerate);
    }
    let xs: Vec<f64> = curve.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = curve.iter().map(|&(_, d)| (d as f64).ln()).collect();
    let (beta, intercept) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - beta * x).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let range = (curve[0].0, curve[curve.len() - 1].0);
    Ok(HeapsFit {
        beta,
        intercept,
        range,
        residual,
        points: curve.len(),
        low_confidence: (range.1 as f64 / range.0 as f64) < 100.0 * (1.0 - 1e-12),
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q + k)^(-s)` for `s > 1`, `q > 0`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    // B_{2j} / (2j)!
    const COEFFS: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    let n = if q < 12.0 { (12.0 - q).ceil() as usize } else { 0 };
    let mut sum: f64 = (0..n).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + n as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut pow = a.powf(-s - 1.0);
    for (j, c) in COEFFS.iter().enumerate() {
        let term = c * rising * pow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        pow /= a * a;
    }
    sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZipfOptions {
    /// Smallest frequency included in the power-law tail.
    pub f_min: u64,
    /// Kolmogorov–Smirnov distance above which the fit is flagged poor.
    pub max_ks: f64,
    /// Tails with fewer tags are flagged poor.
    pub min_tail: usize,
    /// Vocabularies with fewer distinct tags are flagged low-confidence.
    pub min_tags: usize,
}

impl Default for ZipfOptions {
    fn default() -> Self {
        Self { f_min: 10, max_ks: 0.1, min_tail: 50, min_tags: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZipfFit {
    /// `(rank, frequency)`, rank 1 = most frequent; ties ordered by tag ID.
    pub rank_frequency: Vec<(u64, u64)>,
    /// MLE exponent of `P(f) ∝ f^(-exponent)` for `f ≥ f_min`; `None` if the
    /// tail has fewer than two tags.
    pub exponent: Option<f64>,
    pub stderr: Option<f64>,
    pub f_min: u64,
    pub tail_tags: usize,
    pub ks_distance: Option<f64>,
    pub low_confidence: bool,
    pub poor_fit: bool,
}

const ALPHA_LO: f64 = 1.0 + 1e-4;
const ALPHA_HI: f64 = 15.0;

/// Rank-frequency table and discrete power-law MLE of the tag-frequency
/// distribution above `f_min`.
pub fn zipf_fit(corpus: &Corpus, opts: &ZipfOptions) -> ZipfFit {
    let mut freq = vec![0u64; corpus.tags().len()];
    for p in corpus.posts() {
        for &t in &p.tags {
            freq[t.index()] += 1;
        }
    }
    let mut order: Vec<usize> = (0..freq.len()).collect();
    order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
    let rank_frequency = order.iter().enumerate().map(|(r, &i)| (r as u64 + 1, freq[i])).collect();

    let f_min = opts.f_min.max(1);
    let mut tail: Vec<u64> = freq.iter().copied().filter(|&f| f >= f_min).collect();
    tail.sort_unstable();
    let low_confidence = freq.len() < opts.min_tags;
    let (exponent, stderr, ks) = if tail.len() >= 2 {
        let a = discrete_power_law_mle(&tail, f_min);
        let se = (a - 1.0) / (tail.len() as f64).sqrt();
        (Some(a), Some(se), Some(ks_distance(&tail, f_min, a)))
    } else {
        (None, None, None)
    };
    let poor_fit = tail.len() < opts.min_tail.max(2) || ks.map_or(true, |d| d > opts.max_ks);
    ZipfFit {
        rank_frequency,
        exponent,
        stderr,
        f_min,
        tail_tags: tail.len(),
        ks_distance: ks,
        low_confidence,
        poor_fit,
    }
}

/// Maximizes `-n ln ζ(a, x_min) - a Σ ln x` (convex in `a`) by golden section.
fn discrete_power_law_mle(xs: &[u64], x_min: u64) -> f64 {
    let n = xs.len() as f64;
    let sum_ln: f64 = xs.iter().map(|&x| (x as f64).ln()).sum();
    let q = x_min as f64;
    let nll = |a: f64| n * hurwitz_zeta(a, q).ln() + a * sum_ln;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (ALPHA_LO, ALPHA_HI);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (nll(c), nll(d));
    while hi - lo > 1e-10 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = nll(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = nll(d);
        }
    }
    (lo + hi) / 2.0
}

/// Max CDF gap between the sorted sample and the fitted discrete power law.
fn ks_distance(sorted: &[u64], x_min: u64, a: f64) -> f64 {
    let n = sorted.len() as f64;
    let norm = hurwitz_zeta(a, x_min as f64);
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let emp_cdf = j as f64 / n;
        let model_cdf = 1.0 - hurwitz_zeta(a, v as f64 + 1.0) / norm;
        worst = worst.max((emp_cdf - model_cdf).abs());
        i = j;
    }
    worst
}
