//! Annotation-log ingestion.
//!
//! A log is a flat list of `(time, item, user, tag)` rows. Ingestion turns it
//! into a [`Corpus`]: rows are sorted by time, grouped into posts (one
//! submission and its co-occurring tag set), and tags are interned into dense
//! integer IDs assigned in first-occurrence order.
//!
//! ```
//! use tagevo::ingest::{parse_annotation_log, BucketWidth, ParseOptions};
//!
//! let log = "0\ti1\tu1\tCactus\n0\ti1\tu1\tdesk\n86400\ti2\tu1\tcactus\n";
//! let (corpus, report) = parse_annotation_log(log.as_bytes(), &ParseOptions::default()).unwrap();
//! assert_eq!(report.rows_kept, 3);
//! assert_eq!(corpus.posts().len(), 2);
//! assert_eq!(corpus.tags().len(), 2);
//! assert_eq!(corpus.bucket_of(1, BucketWidth::Day), 1);
//! ```

mod cache;
mod normalize;
mod parse;
mod tsv;

pub use cache::{read_cache, write_cache, CacheError, CorpusMeta, CACHE_MAGIC, CACHE_VERSION};
pub use normalize::{normalize_tag, NormalizeError, TagNormalization};
pub use parse::{
    parse_annotation_log, parse_time, ColumnConfig, ParseError, ParseOptions, ParseReport,
    RecordError, RecordErrorKind,
};
pub use tsv::write_tsv;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

/// Dense tag identifier. IDs are assigned in first-occurrence order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TagId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemId(pub u32);

impl TagId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub const SECONDS_PER_DAY: u64 = 86_400;
pub const SECONDS_PER_WEEK: u64 = 7 * SECONDS_PER_DAY;

/// Width of the time buckets used to aggregate posts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BucketWidth {
    Day,
    Week,
    Seconds(u64),
}

impl BucketWidth {
    pub fn seconds(self) -> u64 {
        match self {
            BucketWidth::Day => SECONDS_PER_DAY,
            BucketWidth::Week => SECONDS_PER_WEEK,
            BucketWidth::Seconds(s) => s.max(1),
        }
    }
}

impl Default for BucketWidth {
    fn default() -> Self {
        BucketWidth::Week
    }
}

impl fmt::Display for BucketWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BucketWidth::Day => f.write_str("day"),
            BucketWidth::Week => f.write_str("week"),
            BucketWidth::Seconds(s) => write!(f, "{s}s"),
        }
    }
}

impl FromStr for BucketWidth {
    type Err = String;

    /// Accepts `day`, `week`, or a positive number of seconds (`3600` or `3600s`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "day" | "daily" => Ok(BucketWidth::Day),
            "week" | "weekly" => Ok(BucketWidth::Week),
            other => {
                let digits = other.strip_suffix('s').unwrap_or(other);
                match digits.parse::<u64>() {
                    Ok(0) | Err(_) => Err(format!("invalid bucket width `{s}`")),
                    Ok(n) => Ok(BucketWidth::Seconds(n)),
                }
            }
        }
    }
}

/// How rows are grouped into posts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// Same item, user and exact timestamp.
    Exact,
    /// Same item and user, within this many seconds of the post's first row.
    Window(u64),
    /// Explicit post-ID column.
    PostId,
}

impl Default for Grouping {
    fn default() -> Self {
        Grouping::Exact
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grouping::Exact => f.write_str("exact"),
            Grouping::Window(s) => write!(f, "window:{s}"),
            Grouping::PostId => f.write_str("post-id"),
        }
    }
}

impl FromStr for Grouping {
    type Err = String;

    /// Accepts `exact`, `post-id`, or `window:<seconds>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "exact" => Ok(Grouping::Exact),
            "post-id" | "post_id" | "postid" => Ok(Grouping::PostId),
            _ => t
                .strip_prefix("window:")
                .and_then(|n| n.parse().ok())
                .map(Grouping::Window)
                .ok_or_else(|| format!("invalid grouping `{s}` (exact, post-id or window:<seconds>)")),
        }
    }
}

/// Bidirectional string interner with dense `u32` keys.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StringTable {
    strings: Vec<String>,
    index: HashMap<String, u32>,
}

impl StringTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_owned());
        self.index.insert(s.to_owned(), id);
        id
    }

    pub fn get(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub fn resolve(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &str> {
        self.strings.iter().map(String::as_str)
    }

    pub(crate) fn from_strings(strings: Vec<String>) -> Option<Self> {
        let mut index = HashMap::with_capacity(strings.len());
        for (i, s) in strings.iter().enumerate() {
            if index.insert(s.clone(), i as u32).is_some() {
                return None;
            }
        }
        Some(Self { strings, index })
    }
}

/// Interned tags with the index of the first post that used each one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TagTable {
    names: StringTable,
    first_post: Vec<u32>,
}

impl TagTable {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<TagId> {
        self.names.get(name).map(TagId)
    }

    pub fn name(&self, id: TagId) -> &str {
        self.names.resolve(id.0)
    }

    /// Index (in corpus order) of the earliest post containing `id`.
    pub fn first_post(&self, id: TagId) -> usize {
        self.first_post[id.index()] as usize
    }

    pub fn names(&self) -> impl ExactSizeIterator<Item = &str> {
        self.names.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = TagId> {
        (0..self.len() as u32).map(TagId)
    }
}

/// One submission: the distinct tags one user attached to one item at one time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Post {
    pub time: i64,
    pub user: UserId,
    pub item: ItemId,
    /// Sorted, duplicate-free, never empty.
    pub tags: Vec<TagId>,
}

/// Time-ordered posts with their interned vocabulary. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    posts: Vec<Post>,
    tags: TagTable,
    users: StringTable,
    items: StringTable,
    width: BucketWidth,
    epoch: i64,
    grouping: Grouping,
}

impl Corpus {
    pub fn empty(width: BucketWidth, grouping: Grouping) -> Self {
        Self {
            posts: Vec::new(),
            tags: TagTable::default(),
            users: StringTable::new(),
            items: StringTable::new(),
            width,
            epoch: 0,
            grouping,
        }
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn tags(&self) -> &TagTable {
        &self.tags
    }

    pub fn users(&self) -> &StringTable {
        &self.users
    }

    pub fn items(&self) -> &StringTable {
        &self.items
    }

    pub fn user_name(&self, user: UserId) -> &str {
        self.users.resolve(user.0)
    }

    pub fn item_name(&self, item: ItemId) -> &str {
        self.items.resolve(item.0)
    }

    pub fn user_id(&self, name: &str) -> Option<UserId> {
        self.users.get(name).map(UserId)
    }

    /// Default bucket width recorded at ingestion.
    pub fn width(&self) -> BucketWidth {
        self.width
    }

    /// Time of the earliest post; bucket 0 starts here.
    pub fn epoch(&self) -> i64 {
        self.epoch
    }

    pub fn grouping(&self) -> Grouping {
        self.grouping
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Same corpus, different default bucket width.
    pub fn with_width(mut self, width: BucketWidth) -> Self {
        self.width = width;
        self
    }

    /// Total number of kept annotations (sum of post sizes).
    pub fn annotation_count(&self) -> usize {
        self.posts.iter().map(|p| p.tags.len()).sum()
    }

    pub fn bucket_of_time(&self, time: i64, width: BucketWidth) -> u32 {
        ((time - self.epoch).max(0) as u64 / width.seconds()) as u32
    }

    pub fn bucket_of(&self, post: usize, width: BucketWidth) -> u32 {
        self.bucket_of_time(self.posts[post].time, width)
    }

    /// Number of buckets spanned by the corpus (last bucket + 1), 0 when empty.
    pub fn bucket_count(&self, width: BucketWidth) -> usize {
        match self.posts.last() {
            Some(p) => self.bucket_of_time(p.time, width) as usize + 1,
            None => 0,
        }
    }

    /// Post indices falling in `bucket`.
    pub fn bucket_range(&self, bucket: u32, width: BucketWidth) -> Range<usize> {
        let w = width.seconds() as i64;
        let start_t = self.epoch + bucket as i64 * w;
        let end_t = start_t + w;
        let lo = self.posts.partition_point(|p| p.time < start_t);
        let hi = self.posts.partition_point(|p| p.time < end_t);
        lo..hi
    }

    /// Bucket of the first post that used `tag`.
    pub fn birth_bucket(&self, tag: TagId, width: BucketWidth) -> u32 {
        self.bucket_of(self.tags.first_post(tag), width)
    }

    /// Per-bucket post counts and their running total.
    pub fn bucket_series(&self, width: BucketWidth) -> BucketSeries {
        let mut counts = vec![0u64; self.bucket_count(width)];
        for p in &self.posts {
            counts[self.bucket_of_time(p.time, width) as usize] += 1;
        }
        let cumulative = counts
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        BucketSeries { counts, cumulative }
    }
}

/// Post counts per bucket, plus the cumulative curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BucketSeries {
    pub counts: Vec<u64>,
    pub cumulative: Vec<u64>,
}

/// Builds a [`Corpus`] from already-grouped posts given as strings.
///
/// Posts are stably sorted by time; tags, users and items are interned in
/// first-occurrence order over the sorted posts.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    tag_names: StringTable,
    user_names: StringTable,
    item_names: StringTable,
    posts: Vec<RawPost>,
}

#[derive(Debug)]
pub(crate) struct RawPost {
    pub time: i64,
    pub item: u32,
    pub user: u32,
    /// Provisional tag IDs in input order; may contain duplicates.
    pub tags: Vec<u32>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one post. Tags that are empty after trimming are ignored; a post
    /// left without tags is dropped. Returns whether the post was kept.
    pub fn push<S: AsRef<str>>(&mut self, time: i64, item: &str, user: &str, tags: &[S]) -> bool {
        let tags: Vec<u32> = tags
            .iter()
            .map(|t| t.as_ref())
            .filter(|t| !t.trim().is_empty())
            .map(|t| self.tag_names.intern(t))
            .collect();
        if tags.is_empty() {
            return false;
        }
        let item = self.item_names.intern(item);
        let user = self.user_names.intern(user);
        self.posts.push(RawPost { time, item, user, tags });
        true
    }

    pub fn build(self, width: BucketWidth, grouping: Grouping) -> Corpus {
        assemble(
            self.posts,
            &self.tag_names,
            &self.user_names,
            &self.item_names,
            width,
            grouping,
        )
    }
}

/// Canonicalizes provisional posts into a [`Corpus`].
pub(crate) fn assemble(
    mut raw: Vec<RawPost>,
    tag_names: &StringTable,
    user_names: &StringTable,
    item_names: &StringTable,
    width: BucketWidth,
    grouping: Grouping,
) -> Corpus {
    if !raw.windows(2).all(|w| w[0].time <= w[1].time) {
        raw.sort_by_key(|p| p.time);
    }
    const UNSET: u32 = u32::MAX;
    let mut tag_map = vec![UNSET; tag_names.len()];
    let mut user_map = vec![UNSET; user_names.len()];
    let mut item_map = vec![UNSET; item_names.len()];
    let mut tags = TagTable::default();
    let mut users = StringTable::new();
    let mut items = StringTable::new();

    let mut posts = Vec::with_capacity(raw.len());
    for (idx, rp) in raw.into_iter().enumerate() {
        let mut ids = Vec::with_capacity(rp.tags.len());
        for prov in rp.tags {
            let slot = &mut tag_map[prov as usize];
            if *slot == UNSET {
                *slot = tags.names.intern(tag_names.resolve(prov));
                tags.first_post.push(idx as u32);
            }
            ids.push(TagId(*slot));
        }
        ids.sort_unstable();
        ids.dedup();
        let u = &mut user_map[rp.user as usize];
        if *u == UNSET {
            *u = users.intern(user_names.resolve(rp.user));
        }
        let it = &mut item_map[rp.item as usize];
        if *it == UNSET {
            *it = items.intern(item_names.resolve(rp.item));
        }
        posts.push(Post {
            time: rp.time,
            user: UserId(*u),
            item: ItemId(*it),
            tags: ids,
        });
    }
    let epoch = posts.first().map_or(0, |p| p.time);
    Corpus {
        posts,
        tags,
        users,
        items,
        width,
        epoch,
        grouping,
    }
}

/// Per-bucket post counts and cumulative counts for `corpus` at `width`.
pub fn bucket_series(corpus: &Corpus, width: BucketWidth) -> BucketSeries {
    corpus.bucket_series(width)
}
