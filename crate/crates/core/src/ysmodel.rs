//! Yule–Simon tag-stream generators.
//!
//! The original process emits one token per step: with probability `alpha`
//! a brand-new tag, otherwise a copy of a uniformly chosen past token, which
//! is the same as choosing a tag with probability proportional to how often
//! it has been used so far (preferential attachment).
//!
//! The set-based variant emits a whole post per step. Each slot of the post
//! innovates or copies independently, in the same way, so a post can be a
//! novel *combination* of old tags without containing any new tag.
//!
//! ```
//! use tagevo::ysmodel::{generate_set_sequence, SetSize, YsConfig};
//!
//! let cfg = YsConfig { alpha: 0.2, steps: 50, set_size: SetSize::Constant(3), seed: 7, ..Default::default() };
//! let a = generate_set_sequence(&cfg).unwrap();
//! let b = generate_set_sequence(&cfg).unwrap();
//! assert_eq!(a.posts, b.posts);
//! assert_eq!(a.posts.len(), 50);
//! ```

use crate::ingest::{BucketWidth, Corpus, CorpusBuilder, Grouping, TagId};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum YsError {
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("steps must be at least 1")]
    NoSteps,
    #[error("set sizes must be positive integers with positive total weight")]
    SetSize,
    #[error("the single-token process needs a constant set size of 1")]
    NotSingleToken,
    #[error("cannot draw from an empty occurrence pool")]
    EmptyPool,
}

/// Distribution of post sizes for the set-based generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSize {
    Constant(usize),
    /// `(size, weight)` pairs, e.g. the per-post size histogram of a real corpus.
    Histogram(Vec<(usize, u64)>),
}

impl Default for SetSize {
    fn default() -> Self {
        SetSize::Constant(3)
    }
}

impl SetSize {
    /// Empirical post-size histogram of `corpus`.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
        for p in corpus.posts() {
            *hist.entry(p.tags.len()).or_default() += 1;
        }
        SetSize::Histogram(hist.into_iter().collect())
    }

    fn validate(&self) -> Result<(), YsError> {
        match self {
            SetSize::Constant(0) => Err(YsError::SetSize),
            SetSize::Constant(_) => Ok(()),
            SetSize::Histogram(h) => {
                if h.iter().any(|&(s, _)| s == 0) || h.iter().map(|&(_, w)| w).sum::<u64>() == 0 {
                    Err(YsError::SetSize)
                } else {
                    Ok(())
                }
            }
        }
    }
}

enum SizeSampler {
    Constant(usize),
    Weighted(Vec<usize>, WeightedIndex<u64>),
}

impl SizeSampler {
    fn new(s: &SetSize) -> Self {
        match s {
            SetSize::Constant(k) => SizeSampler::Constant(*k),
            SetSize::Histogram(h) => {
                let sizes = h.iter().map(|&(s, _)| s).collect();
                let index = WeightedIndex::new(h.iter().map(|&(_, w)| w)).expect("validated histogram");
                SizeSampler::Weighted(sizes, index)
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            SizeSampler::Constant(k) => *k,
            SizeSampler::Weighted(sizes, index) => sizes[index.sample(rng)],
        }
    }
}

/// Generator parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YsConfig {
    /// Probability that a slot introduces a brand-new tag.
    pub alpha: f64,
    /// Number of steps (tokens for the original process, posts for the set process).
    pub steps: usize,
    pub set_size: SetSize,
    pub seed: u64,
    /// Re-draw copies that collide with a tag already in the current post.
    pub distinct_within_set: bool,
    /// Re-draw budget per slot; a slot that still collides is dropped.
    pub max_redraws: u32,
}

impl Default for YsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            steps: 1000,
            set_size: SetSize::Constant(3),
            seed: 0,
            distinct_within_set: true,
            max_redraws: 32,
        }
    }
}

impl YsConfig {
    /// One token per step.
    pub fn single(alpha: f64, steps: usize, seed: u64) -> Self {
        Self {
            alpha,
            steps,
            set_size: SetSize::Constant(1),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), YsError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(YsError::Alpha(self.alpha));
        }
        if self.steps == 0 {
            return Err(YsError::NoSteps);
        }
        self.set_size.validate()
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Every token emitted so far. Drawing a uniform past token is a draw
/// proportional to per-tag counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OccurrencePool {
    counts: Vec<u64>,
    tokens: Vec<TagId>,
}

impl OccurrencePool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pool pre-filled with one token of each given tag.
    pub fn seeded(tags: &[TagId]) -> Self {
        let mut pool = Self::new();
        for &t in tags {
            pool.push(t);
        }
        pool
    }

    pub fn push(&mut self, tag: TagId) {
        if tag.index() >= self.counts.len() {
            self.counts.resize(tag.index() + 1, 0);
        }
        self.counts[tag.index()] += 1;
        self.tokens.push(tag);
    }

    pub fn total(&self) -> u64 {
        self.tokens.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn count(&self, tag: TagId) -> u64 {
        self.counts.get(tag.index()).copied().unwrap_or(0)
    }

    /// Number of distinct tags with a positive count.
    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Smallest ID not yet present in the pool's ID range.
    fn id_bound(&self) -> u32 {
        self.counts.len() as u32
    }
}

/// Tag drawn with probability proportional to its count in `pool`.
pub fn preferential_draw<R: Rng + ?Sized>(pool: &OccurrencePool, rng: &mut R) -> Result<TagId, YsError> {
    if pool.tokens.is_empty() {
        return Err(YsError::EmptyPool);
    }
    Ok(pool.tokens[rng.gen_range(0..pool.tokens.len())])
}

/// Output of the single-token process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<TagId>,
    pub innovations: u64,
}

impl TokenSequence {
    /// One post per token, for feeding into [`to_corpus`].
    pub fn into_posts(self) -> Vec<Vec<TagId>> {
        self.tokens.into_iter().map(|t| vec![t]).collect()
    }
}

/// Original Yule–Simon process. Step 0 always innovates without consuming
/// randomness; each later step draws one Bernoulli(`alpha`) and, on failure,
/// one uniform past-token index.
pub fn generate_sequence(config: &YsConfig) -> Result<TokenSequence, YsError> {
    config.validate()?;
    if config.set_size != SetSize::Constant(1) {
        return Err(YsError::NotSingleToken);
    }
    let mut rng = config.rng();
    let mut pool = OccurrencePool::new();
    let mut next = 0u32;
    let mut innovations = 0;
    for _ in 0..config.steps {
        let tag = if pool.is_empty() || rng.gen_bool(config.alpha) {
            innovations += 1;
            next += 1;
            TagId(next - 1)
        } else {
            preferential_draw(&pool, &mut rng)?
        };
        pool.push(tag);
    }
    Ok(TokenSequence {
        tokens: pool.tokens,
        innovations,
    })
}

/// Output of the set-based process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSequence {
    /// Tags of each post in slot order.
    pub posts: Vec<Vec<TagId>>,
    pub innovations: u64,
    /// Slots dropped after exhausting their re-draw budget.
    pub truncated_slots: u64,
    pub truncated_posts: u64,
}

/// Set-based Yule–Simon process with an empty initial pool.
pub fn generate_set_sequence(config: &YsConfig) -> Result<SetSequence, YsError> {
    generate_set_sequence_from(config, OccurrencePool::new())
}

/// Set-based Yule–Simon process continuing from `pool`. New tags get IDs
/// above every ID already in the pool.
///
/// Tokens of a post join the pool only once the post is complete, so a post
/// never copies from itself. A slot innovates when the pool is empty.
pub fn generate_set_sequence_from(config: &YsConfig, mut pool: OccurrencePool) -> Result<SetSequence, YsError> {
    config.validate()?;
    let mut rng = config.rng();
    let sizes = SizeSampler::new(&config.set_size);
    let mut next = pool.id_bound();
    let mut out = SetSequence {
        posts: Vec::with_capacity(config.steps),
        innovations: 0,
        truncated_slots: 0,
        truncated_posts: 0,
    };
    for _ in 0..config.steps {
        let size = sizes.sample(&mut rng);
        let mut post: Vec<TagId> = Vec::with_capacity(size);
        let mut dropped = 0;
        for _ in 0..size {
            if pool.is_empty() || rng.gen_bool(config.alpha) {
                post.push(TagId(next));
                next += 1;
                out.innovations += 1;
                continue;
            }
            let mut chosen = None;
            for _ in 0..=config.max_redraws {
                let t = preferential_draw(&pool, &mut rng)?;
                if !config.distinct_within_set || !post.contains(&t) {
                    chosen = Some(t);
                    break;
                }
            }
            match chosen {
                Some(t) => post.push(t),
                None => dropped += 1,
            }
        }
        if dropped > 0 {
            out.truncated_slots += dropped;
            out.truncated_posts += 1;
        }
        for &t in &post {
            pool.push(t);
        }
        out.posts.push(post);
    }
    Ok(out)
}

/// How synthetic posts are attributed to users.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserAssignment {
    Single,
    RoundRobin(u32),
}

impl Default for UserAssignment {
    fn default() -> Self {
        UserAssignment::Single
    }
}

pub fn tag_name(tag: TagId) -> String {
    format!("ys-tag-{}", tag.0)
}

/// Turns generated posts into a [`Corpus`]: post `i` gets time `i`, item
/// `ys-item-<i>` and a user from `users`; tag `n` is named `ys-tag-<n>`.
pub fn to_corpus(posts: &[Vec<TagId>], users: UserAssignment, width: BucketWidth) -> Corpus {
    let bound = posts.iter().flatten().map(|t| t.0 + 1).max().unwrap_or(0);
    let names: Vec<String> = (0..bound).map(|n| tag_name(TagId(n))).collect();
    let mut b = CorpusBuilder::new();
    let mut tags: Vec<&str> = Vec::new();
    for (i, post) in posts.iter().enumerate() {
        tags.clear();
        tags.extend(post.iter().map(|t| names[t.index()].as_str()));
        let user = match users {
            UserAssignment::Single => 0,
            UserAssignment::RoundRobin(n) => i as u32 % n.max(1),
        };
        b.push(i as i64, &format!("ys-item-{i}"), &format!("ys-user-{user}"), &tags);
    }
    b.build(width, Grouping::Exact)
}
