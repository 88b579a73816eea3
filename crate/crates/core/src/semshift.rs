//! Tag meaning and its drift.
//!
//! The meaning of tag `k` in week `t` is the distribution `f_k(t)` of the
//! other tags that appear in the same posts as `k` that week. Drift is the
//! Jensen–Shannon divergence between two weeks' distributions, with base-2
//! logarithms so that it lies in `[0, 1]`.
//!
//! ```
//! use tagevo::ingest::TagId;
//! use tagevo::semshift::{jsd, WeightedDistribution};
//!
//! let p = WeightedDistribution::from_weights([(TagId(0), 1.0)]).unwrap();
//! let q = WeightedDistribution::from_weights([(TagId(0), 1.0), (TagId(1), 1.0)]).unwrap();
//! assert!((jsd(&p, &q) - 0.311278).abs() < 1e-6);
//! assert_eq!(jsd(&p, &p), 0.0);
//! ```

use crate::ingest::{BucketWidth, Corpus, TagId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Tolerance on the total mass of a distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("weights must be finite and non-negative")]
    InvalidWeight,
    #[error("distribution has no positive mass")]
    Empty,
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("tag {0:?} appears twice")]
    DuplicateTag(TagId),
}

/// Sparse probability distribution over tags. Entries are sorted by tag,
/// strictly positive, and sum to 1 within [`NORMALIZATION_TOLERANCE`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedDistribution {
    entries: Vec<(TagId, f64)>,
}

impl WeightedDistribution {
    /// Normalizes non-negative weights. Zero weights are dropped; repeated
    /// tags are summed.
    pub fn from_weights(weights: impl IntoIterator<Item = (TagId, f64)>) -> Result<Self, DistributionError> {
        let mut acc: BTreeMap<TagId, f64> = BTreeMap::new();
        for (t, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(DistributionError::InvalidWeight);
            }
            *acc.entry(t).or_default() += w;
        }
        let total: f64 = acc.values().sum();
        if total <= 0.0 {
            return Err(DistributionError::Empty);
        }
        Ok(Self {
            entries: acc.into_iter().filter(|&(_, w)| w > 0.0).map(|(t, w)| (t, w / total)).collect(),
        })
    }

    /// Takes probabilities as given, rejecting anything not normalized.
    pub fn from_probabilities(probs: impl IntoIterator<Item = (TagId, f64)>) -> Result<Self, DistributionError> {
        let mut entries: Vec<(TagId, f64)> = Vec::new();
        for (t, p) in probs {
            if !p.is_finite() || p < 0.0 {
                return Err(DistributionError::InvalidWeight);
            }
            if p > 0.0 {
                entries.push((t, p));
            }
        }
        entries.sort_by_key(|&(t, _)| t);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(DistributionError::DuplicateTag(w[0].0));
        }
        let total: f64 = entries.iter().map(|&(_, p)| p).sum();
        if entries.is_empty() {
            return Err(DistributionError::Empty);
        }
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(DistributionError::NotNormalized(total));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(TagId, f64)] {
        &self.entries
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn prob(&self, tag: TagId) -> f64 {
        self.entries
            .binary_search_by_key(&tag, |&(t, _)| t)
            .map_or(0.0, |i| self.entries[i].1)
    }
}

/// Jensen–Shannon divergence in bits, `[KL(p‖m) + KL(q‖m)] / 2` with
/// `m = (p + q) / 2`. Symmetric bit-for-bit and clamped to `[0, 1]`.
pub fn jsd(p: &WeightedDistribution, q: &WeightedDistribution) -> f64 {
    let (a, b) = (&p.entries, &q.entries);
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < a.len() || j < b.len() {
        let (pi, qi) = match (a.get(i), b.get(j)) {
            (Some(&(ta, pa)), Some(&(tb, pb))) if ta == tb => {
                i += 1;
                j += 1;
                (pa, pb)
            }
            (Some(&(ta, pa)), Some(&(tb, _))) if ta < tb => {
                i += 1;
                (pa, 0.0)
            }
            (Some(&(_, pa)), None) => {
                i += 1;
                (pa, 0.0)
            }
            (_, Some(&(_, pb))) => {
                j += 1;
                (0.0, pb)
            }
            (None, None) => unreachable!(),
        };
        sum += kl_term(pi, qi) + kl_term(qi, pi);
    }
    (0.5 * sum).clamp(0.0, 1.0)
}

// x · log2(x / m) with m the midpoint of x and y; 0 when x = 0.
#[inline]
fn kl_term(x: f64, y: f64) -> f64 {
    if x > 0.0 {
        x * (2.0 * x / (x + y)).log2()
    } else {
        0.0
    }
}

/// How a week's co-occurrences are weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoWeighting {
    /// Every co-present tag occurrence counts 1.
    #[default]
    Tokens,
    /// Every post containing `k` contributes unit mass, split evenly over
    /// its other tags.
    PerPost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Co-tags whose share of the week's co-occurrences is below this are dropped.
    pub min_share: f64,
    pub weighting: CoWeighting,
    pub width: BucketWidth,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { min_share: 0.01, weighting: CoWeighting::Tokens, width: BucketWidth::Week }
    }
}

/// `f_k(t)` for one week.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeekProfile {
    /// `k` does not occur in the week.
    Absent,
    /// `k` occurs, but never with another tag (or every co-tag was filtered).
    Empty,
    Profile(WeightedDistribution),
}

fn accumulate(counts: &mut BTreeMap<TagId, f64>, tags: &[TagId], tag: TagId, weighting: CoWeighting) {
    let others = tags.len() - 1;
    if others == 0 {
        return;
    }
    let w = match weighting {
        CoWeighting::Tokens => 1.0,
        CoWeighting::PerPost => 1.0 / others as f64,
    };
    for &t in tags {
        if t != tag {
            *counts.entry(t).or_default() += w;
        }
    }
}

fn finish(counts: BTreeMap<TagId, f64>, min_share: f64) -> WeekProfile {
    let total: f64 = counts.values().sum();
    if total <= 0.0 {
        return WeekProfile::Empty;
    }
    let kept = counts.into_iter().filter(|&(_, c)| c / total >= min_share);
    match WeightedDistribution::from_weights(kept) {
        Ok(d) => WeekProfile::Profile(d),
        Err(_) => WeekProfile::Empty,
    }
}

/// Co-occurrence distribution of `tag` in bucket `week`.
pub fn cooccurrence_distribution(corpus: &Corpus, tag: TagId, week: u32, opts: &ProfileOptions) -> WeekProfile {
    let mut present = false;
    let mut counts = BTreeMap::new();
    for post in &corpus.posts()[corpus.bucket_range(week, opts.width)] {
        if post.tags.binary_search(&tag).is_ok() {
            present = true;
            accumulate(&mut counts, &post.tags, tag, opts.weighting);
        }
    }
    if present {
        finish(counts, opts.min_share)
    } else {
        WeekProfile::Absent
    }
}

/// Profiles of `tag` for every week in which it occurs, in week order.
pub fn weekly_profiles(corpus: &Corpus, tag: TagId, opts: &ProfileOptions) -> Vec<(u32, WeekProfile)> {
    let mut weeks: BTreeMap<u32, BTreeMap<TagId, f64>> = BTreeMap::new();
    for post in corpus.posts() {
        if post.tags.binary_search(&tag).is_ok() {
            let w = corpus.bucket_of_time(post.time, opts.width);
            accumulate(weeks.entry(w).or_default(), &post.tags, tag, opts.weighting);
        }
    }
    weeks.into_iter().map(|(w, c)| (w, finish(c, opts.min_share))).collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemshiftError {
    #[error("tag has {usable} usable week(s); at least 2 are needed")]
    InsufficientHistory { usable: usize },
}

/// Pairwise divergence between all usable weekly profiles of one tag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JsdMatrix {
    pub tag: TagId,
    /// Weeks with a non-empty profile; row/column labels.
    pub weeks: Vec<u32>,
    /// Weeks where the tag occurred but had an empty profile.
    pub excluded_weeks: Vec<u32>,
    values: Vec<f64>,
}

impl JsdMatrix {
    pub fn len(&self) -> usize {
        self.weeks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weeks.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.weeks.len() + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.weeks.len().max(1))
    }

    /// Largest entry among rows and columns whose week is `>= week`.
    pub fn block_max_from(&self, week: u32) -> f64 {
        let start = self.weeks.partition_point(|&w| w < week);
        let mut m: f64 = 0.0;
        for i in start..self.len() {
            for j in start..self.len() {
                m = m.max(self.get(i, j));
            }
        }
        m
    }
}

fn usable_profiles(corpus: &Corpus, tag: TagId, opts: &ProfileOptions) -> (Vec<(u32, WeightedDistribution)>, Vec<u32>) {
    let mut usable = Vec::new();
    let mut excluded = Vec::new();
    for (w, p) in weekly_profiles(corpus, tag, opts) {
        match p {
            WeekProfile::Profile(d) => usable.push((w, d)),
            _ => excluded.push(w),
        }
    }
    (usable, excluded)
}

pub fn jsd_matrix(corpus: &Corpus, tag: TagId, opts: &ProfileOptions) -> Result<JsdMatrix, SemshiftError> {
    let (profiles, excluded_weeks) = usable_profiles(corpus, tag, opts);
    let n = profiles.len();
    if n < 2 {
        return Err(SemshiftError::InsufficientHistory { usable: n });
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = jsd(&profiles[i].1, &profiles[j].1);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(JsdMatrix {
        tag,
        weeks: profiles.iter().map(|&(w, _)| w).collect(),
        excluded_weeks,
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsecutivePoint {
    pub from_week: u32,
    pub to_week: u32,
    pub jsd: f64,
    /// The two weeks are not adjacent: inactive or empty weeks lie between.
    pub gap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsecutiveSeries {
    pub tag: TagId,
    pub points: Vec<ConsecutivePoint>,
    pub excluded_weeks: Vec<u32>,
}

impl ConsecutiveSeries {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.jsd).collect()
    }
}

/// Divergence between each pair of successive usable weeks.
pub fn consecutive_jsd(corpus: &Corpus, tag: TagId, opts: &ProfileOptions) -> Result<ConsecutiveSeries, SemshiftError> {
    let (profiles, excluded_weeks) = usable_profiles(corpus, tag, opts);
    if profiles.len() < 2 {
        return Err(SemshiftError::InsufficientHistory { usable: profiles.len() });
    }
    let points = profiles
        .windows(2)
        .map(|w| ConsecutivePoint {
            from_week: w[0].0,
            to_week: w[1].0,
            jsd: jsd(&w[0].1, &w[1].1),
            gap: w[1].0 > w[0].0 + 1,
        })
        .collect();
    Ok(ConsecutiveSeries { tag, points, excluded_weeks })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRule {
    /// Trailing window length, in series points.
    pub window: usize,
    /// Mean threshold; spikes are values above twice this.
    pub threshold: f64,
}

impl Default for DriftRule {
    fn default() -> Self {
        Self { window: 8, threshold: 0.3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftClass {
    Converging,
    Wandering,
    Insufficient,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftReport {
    pub class: DriftClass,
    pub trailing_mean: Option<f64>,
    pub trailing_spikes: usize,
    pub total_spikes: usize,
}

/// Converging when the trailing window is calm (mean below the threshold and
/// no spike); wandering otherwise.
pub fn classify_drift(series: &[f64], rule: &DriftRule) -> DriftReport {
    let spike = 2.0 * rule.threshold;
    let total_spikes = series.iter().filter(|&&v| v > spike).count();
    if rule.window == 0 || series.len() < rule.window {
        return DriftReport { class: DriftClass::Insufficient, trailing_mean: None, trailing_spikes: 0, total_spikes };
    }
    let tail = &series[series.len() - rule.window..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let trailing_spikes = tail.iter().filter(|&&v| v > spike).count();
    let class = if mean < rule.threshold && trailing_spikes == 0 {
        DriftClass::Converging
    } else {
        DriftClass::Wandering
    };
    DriftReport { class, trailing_mean: Some(mean), trailing_spikes, total_spikes }
}

/// The `n` most frequent tags, ties broken by tag ID.
pub fn top_tags(corpus: &Corpus, n: usize) -> Vec<TagId> {
    let mut freq = vec![0u64; corpus.tags().len()];
    for p in corpus.posts() {
        for &t in &p.tags {
            freq[t.index()] += 1;
        }
    }
    let mut ids: Vec<TagId> = corpus.tags().ids().collect();
    ids.sort_by(|a, b| freq[b.index()].cmp(&freq[a.index()]).then(a.cmp(b)));
    ids.truncate(n);
    ids
}

/// Drift summary for one tag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TagDrift {
    pub tag: TagId,
    pub series: Option<ConsecutiveSeries>,
    pub report: DriftReport,
}

/// Consecutive series and classification for each tag, computed in parallel.
/// Output order follows `tags`.
pub fn drift_for_tags(corpus: &Corpus, tags: &[TagId], opts: &ProfileOptions, rule: &DriftRule) -> Vec<TagDrift> {
    tags.par_iter()
        .map(|&tag| match consecutive_jsd(corpus, tag, opts) {
            Ok(series) => {
                let report = classify_drift(&series.values(), rule);
                TagDrift { tag, series: Some(series), report }
            }
            Err(_) => TagDrift { tag, series: None, report: classify_drift(&[], rule) },
        })
        .collect()
}
