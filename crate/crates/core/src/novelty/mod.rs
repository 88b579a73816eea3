//! Novelty statistics over a [`Corpus`].
//!
//! A tag is *new* in the post that first uses it; a post is *novel* if it
//! contains at least one new tag. A tag pair is *pairwise-novel* in the first
//! post where the two tags co-occur, whether or not either tag is new. "First"
//! follows corpus post order, also inside a bucket.

mod fit;

pub use fit::{
    dictionary_growth, heaps_fit, hurwitz_zeta, zipf_fit, FitError, HeapsFit, HeapsOptions, ZipfFit, ZipfOptions,
};

use crate::ingest::{BucketWidth, Corpus, TagId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::ops::Range;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoveltyBucket {
    pub bucket: u32,
    pub posts: u64,
    /// Posts containing at least one first-ever tag.
    pub novel_posts: u64,
    pub new_tags: u64,
    /// `novel_posts / posts`, or 0 for an empty bucket.
    pub proportion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoveltySeries {
    pub width: BucketWidth,
    pub buckets: Vec<NoveltyBucket>,
}

impl NoveltySeries {
    pub fn proportions(&self) -> Vec<f64> {
        self.buckets.iter().map(|b| b.proportion).collect()
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-bucket single-tag novelty.
pub fn single_novelty_series(corpus: &Corpus, width: BucketWidth) -> NoveltySeries {
    let n = corpus.bucket_count(width);
    let mut buckets: Vec<NoveltyBucket> = (0..n as u32)
        .map(|bucket| NoveltyBucket { bucket, posts: 0, novel_posts: 0, new_tags: 0, proportion: 0.0 })
        .collect();
    let table = corpus.tags();
    for (i, post) in corpus.posts().iter().enumerate() {
        let b = &mut buckets[corpus.bucket_of_time(post.time, width) as usize];
        b.posts += 1;
        let new = post.tags.iter().filter(|&&t| table.first_post(t) == i).count() as u64;
        b.new_tags += new;
        if new > 0 {
            b.novel_posts += 1;
        }
    }
    for b in &mut buckets {
        b.proportion = ratio(b.novel_posts, b.posts);
    }
    NoveltySeries { width, buckets }
}

/// First co-occurrence of an unordered tag pair (`a < b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairEvent {
    pub post: usize,
    pub a: TagId,
    pub b: TagId,
}

fn pair_key(a: TagId, b: TagId) -> u64 {
    ((a.0 as u64) << 32) | b.0 as u64
}

/// Every first-time pair, in corpus order.
pub fn first_pair_events(corpus: &Corpus) -> Vec<PairEvent> {
    let mut seen: HashSet<u64> = HashSet::new();
    let mut events = Vec::new();
    for (i, post) in corpus.posts().iter().enumerate() {
        // Post tags are sorted, so (x, y) with x before y has x < y.
        for (j, &a) in post.tags.iter().enumerate() {
            for &b in &post.tags[j + 1..] {
                if seen.insert(pair_key(a, b)) {
                    events.push(PairEvent { post: i, a, b });
                }
            }
        }
    }
    events
}

fn pairs_in(n: usize) -> u64 {
    (n * n.saturating_sub(1) / 2) as u64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairNoveltyBucket {
    pub bucket: u32,
    pub posts: u64,
    /// Unordered pairs summed over posts, `n(n-1)/2` each.
    pub pairs: u64,
    pub novel_pairs: u64,
    /// `novel_pairs / pairs`, or 0 when the bucket has no pairs.
    pub proportion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairNoveltySeries {
    pub width: BucketWidth,
    pub buckets: Vec<PairNoveltyBucket>,
}

impl PairNoveltySeries {
    pub fn proportions(&self) -> Vec<f64> {
        self.buckets.iter().map(|b| b.proportion).collect()
    }
}

/// Per-bucket pairwise (combinatorial) novelty.
pub fn pairwise_novelty_series(corpus: &Corpus, width: BucketWidth) -> PairNoveltySeries {
    let n = corpus.bucket_count(width);
    let mut buckets: Vec<PairNoveltyBucket> = (0..n as u32)
        .map(|bucket| PairNoveltyBucket { bucket, posts: 0, pairs: 0, novel_pairs: 0, proportion: 0.0 })
        .collect();
    for post in corpus.posts() {
        let b = &mut buckets[corpus.bucket_of_time(post.time, width) as usize];
        b.posts += 1;
        b.pairs += pairs_in(post.tags.len());
    }
    for ev in first_pair_events(corpus) {
        buckets[corpus.bucket_of(ev.post, width) as usize].novel_pairs += 1;
    }
    for b in &mut buckets {
        b.proportion = ratio(b.novel_pairs, b.pairs);
    }
    PairNoveltySeries { width, buckets }
}

/// How pair-birth counts are turned into probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BirthNormalization {
    /// Divide by all pair co-usages inside the observation window.
    #[default]
    Window,
    /// Each row sums to 1 (rows without events stay 0).
    Row,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairBirthOptions {
    /// Width of the birth buckets, also used to express `window`.
    pub width: BucketWidth,
    /// Observation buckets whose posts are counted; `None` means all.
    pub window: Option<Range<u32>>,
    pub normalization: BirthNormalization,
}

impl Default for PairBirthOptions {
    fn default() -> Self {
        Self { width: BucketWidth::Week, window: None, normalization: BirthNormalization::Window }
    }
}

/// Probability that a first-time pair joins tags born in buckets `(y, x)`.
///
/// Symmetric: an event between birth buckets `i != j` adds its mass to
/// both `(i, j)` and `(j, i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairBirthMatrix {
    pub size: usize,
    pub normalization: BirthNormalization,
    /// First-time pair events inside the window.
    pub events: u64,
    /// All pair co-usages inside the window.
    pub co_usages: u64,
    cells: BTreeMap<(u32, u32), f64>,
}

impl PairBirthMatrix {
    pub fn get(&self, y: u32, x: u32) -> f64 {
        self.cells.get(&(y, x)).copied().unwrap_or(0.0)
    }

    /// Non-zero cells in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.size]; self.size];
        for (&(y, x), &v) in &self.cells {
            m[y as usize][x as usize] = v;
        }
        m
    }
}

/// Pair events counted by [`pair_birth_matrix`] for these options.
pub fn pair_birth_events(corpus: &Corpus, opts: &PairBirthOptions) -> Vec<PairEvent> {
    let in_window = |post: usize| match &opts.window {
        Some(w) => w.contains(&corpus.bucket_of(post, opts.width)),
        None => true,
    };
    first_pair_events(corpus).into_iter().filter(|e| in_window(e.post)).collect()
}

pub fn pair_birth_matrix(corpus: &Corpus, opts: &PairBirthOptions) -> PairBirthMatrix {
    let range = match &opts.window {
        Some(w) => {
            let lo = corpus.bucket_range(w.start, opts.width).start;
            let hi = if w.end == 0 { lo } else { corpus.bucket_range(w.end - 1, opts.width).end.max(lo) };
            lo..hi
        }
        None => 0..corpus.posts().len(),
    };
    let co_usages: u64 = corpus.posts()[range].iter().map(|p| pairs_in(p.tags.len())).sum();

    let mut counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let events = pair_birth_events(corpus, opts);
    let mut size = 0;
    for ev in &events {
        let ba = corpus.birth_bucket(ev.a, opts.width);
        let bb = corpus.birth_bucket(ev.b, opts.width);
        size = size.max(ba.max(bb) as usize + 1);
        *counts.entry((ba, bb)).or_default() += 1;
        if ba != bb {
            *counts.entry((bb, ba)).or_default() += 1;
        }
    }

    let cells = match opts.normalization {
        BirthNormalization::Window => counts
            .into_iter()
            .map(|(k, c)| (k, ratio(c, co_usages)))
            .collect(),
        BirthNormalization::Row => {
            let mut row_sums: BTreeMap<u32, u64> = BTreeMap::new();
            for (&(y, _), &c) in &counts {
                *row_sums.entry(y).or_default() += c;
            }
            counts
                .into_iter()
                .map(|((y, x), c)| ((y, x), ratio(c, row_sums[&y])))
                .collect()
        }
    };
    PairBirthMatrix {
        size,
        normalization: opts.normalization,
        events: events.len() as u64,
        co_usages,
        cells,
    }
}
