//! Columnar binary cache for a parsed [`Corpus`].
//!
//! All integers are little-endian.
//!
//! ```text
//! CACHE   := MAGIC VERSION HEADER TABLE(tags) TABLE(users) TABLE(items) POSTS
//! MAGIC   := "TAGEVOC\0"
//! VERSION := u32
//! HEADER  := width_kind:u8 width_secs:u64 epoch:i64 grouping_kind:u8 grouping_arg:u64
//! TABLE   := count:u64 (len:u32 utf8-bytes)*
//! POSTS   := n:u64 time:i64[n] user:u32[n] item:u32[n] offset:u64[n+1] tag:u32[offset[n]]
//! ```
//!
//! Tag first-post indices are not stored; they are recomputed on load and the
//! first-occurrence ordering of tag IDs is validated.

use super::{BucketWidth, Corpus, Grouping, ItemId, Post, StringTable, TagId, TagTable, UserId};
use serde::{Deserialize, Serialize};
use std::io::{self, Read, Write};
use thiserror::Error;

pub const CACHE_MAGIC: &[u8; 8] = b"TAGEVOC\0";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a corpus cache (bad magic)")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    Version(u32),
    #[error("corrupt cache: {0}")]
    Corrupt(&'static str),
}

/// Sidecar summary written next to a cache file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub format_version: u32,
    pub posts: u64,
    pub annotations: u64,
    pub distinct_tags: u64,
    pub users: u64,
    pub items: u64,
    pub bucket_width: BucketWidth,
    pub bucket_seconds: u64,
    pub epoch: i64,
    pub grouping: Grouping,
}

impl CorpusMeta {
    pub fn of(corpus: &Corpus) -> Self {
        Self {
            format_version: CACHE_VERSION,
            posts: corpus.posts().len() as u64,
            annotations: corpus.annotation_count() as u64,
            distinct_tags: corpus.tags().len() as u64,
            users: corpus.users().len() as u64,
            items: corpus.items().len() as u64,
            bucket_width: corpus.width(),
            bucket_seconds: corpus.width().seconds(),
            epoch: corpus.epoch(),
            grouping: corpus.grouping(),
        }
    }
}

pub fn write_cache<W: Write>(corpus: &Corpus, mut w: W) -> io::Result<()> {
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    let (wk, ws) = match corpus.width() {
        BucketWidth::Day => (0u8, 0u64),
        BucketWidth::Week => (1, 0),
        BucketWidth::Seconds(s) => (2, s),
    };
    w.write_all(&[wk])?;
    w.write_all(&ws.to_le_bytes())?;
    w.write_all(&corpus.epoch().to_le_bytes())?;
    let (gk, ga) = match corpus.grouping() {
        Grouping::Exact => (0u8, 0u64),
        Grouping::Window(s) => (1, s),
        Grouping::PostId => (2, 0),
    };
    w.write_all(&[gk])?;
    w.write_all(&ga.to_le_bytes())?;

    write_table(&mut w, corpus.tags().names())?;
    write_table(&mut w, corpus.users().iter())?;
    write_table(&mut w, corpus.items().iter())?;

    let posts = corpus.posts();
    w.write_all(&(posts.len() as u64).to_le_bytes())?;
    for p in posts {
        w.write_all(&p.time.to_le_bytes())?;
    }
    for p in posts {
        w.write_all(&p.user.0.to_le_bytes())?;
    }
    for p in posts {
        w.write_all(&p.item.0.to_le_bytes())?;
    }
    let mut offset = 0u64;
    w.write_all(&offset.to_le_bytes())?;
    for p in posts {
        offset += p.tags.len() as u64;
        w.write_all(&offset.to_le_bytes())?;
    }
    for p in posts {
        for t in &p.tags {
            w.write_all(&t.0.to_le_bytes())?;
        }
    }
    w.flush()
}

fn write_table<'a, W: Write>(w: &mut W, strings: impl ExactSizeIterator<Item = &'a str>) -> io::Result<()> {
    w.write_all(&(strings.len() as u64).to_le_bytes())?;
    for s in strings {
        w.write_all(&(s.len() as u32).to_le_bytes())?;
        w.write_all(s.as_bytes())?;
    }
    Ok(())
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], CacheError> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(eof)?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8, CacheError> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn i64(&mut self) -> Result<i64, CacheError> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }
    fn table(&mut self) -> Result<StringTable, CacheError> {
        let n = self.u64()? as usize;
        let mut strings = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            let len = self.u32()? as usize;
            let mut buf = vec![0u8; len];
            self.inner.read_exact(&mut buf).map_err(eof)?;
            strings.push(String::from_utf8(buf).map_err(|_| CacheError::Corrupt("non-utf8 string"))?);
        }
        StringTable::from_strings(strings).ok_or(CacheError::Corrupt("duplicate interned string"))
    }
}

fn eof(e: io::Error) -> CacheError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        CacheError::Corrupt("truncated")
    } else {
        CacheError::Io(e)
    }
}

pub fn read_cache<R: Read>(r: R) -> Result<Corpus, CacheError> {
    let mut c = Cursor { inner: io::BufReader::new(r) };
    let magic: [u8; 8] = c.bytes().map_err(|_| CacheError::BadMagic)?;
    if &magic != CACHE_MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = c.u32()?;
    if version != CACHE_VERSION {
        return Err(CacheError::Version(version));
    }
    let width = match (c.u8()?, c.u64()?) {
        (0, _) => BucketWidth::Day,
        (1, _) => BucketWidth::Week,
        (2, s) if s > 0 => BucketWidth::Seconds(s),
        _ => return Err(CacheError::Corrupt("bucket width")),
    };
    let epoch = c.i64()?;
    let grouping = match (c.u8()?, c.u64()?) {
        (0, _) => Grouping::Exact,
        (1, s) => Grouping::Window(s),
        (2, _) => Grouping::PostId,
        _ => return Err(CacheError::Corrupt("grouping")),
    };
    let tag_names = c.table()?;
    let users = c.table()?;
    let items = c.table()?;

    let n = c.u64()? as usize;
    let mut times = Vec::with_capacity(n.min(1 << 28));
    for _ in 0..n {
        times.push(c.i64()?);
    }
    let mut user_ids = Vec::with_capacity(times.len());
    for _ in 0..n {
        let u = c.u32()?;
        if u as usize >= users.len() {
            return Err(CacheError::Corrupt("user id out of range"));
        }
        user_ids.push(UserId(u));
    }
    let mut item_ids = Vec::with_capacity(times.len());
    for _ in 0..n {
        let i = c.u32()?;
        if i as usize >= items.len() {
            return Err(CacheError::Corrupt("item id out of range"));
        }
        item_ids.push(ItemId(i));
    }
    let mut offsets = Vec::with_capacity(times.len() + 1);
    for _ in 0..=n {
        offsets.push(c.u64()?);
    }
    if offsets[0] != 0 || offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CacheError::Corrupt("post offsets"));
    }

    let mut first_post: Vec<u32> = Vec::with_capacity(tag_names.len());
    let mut posts = Vec::with_capacity(n);
    for i in 0..n {
        let len = (offsets[i + 1] - offsets[i]) as usize;
        let mut tags = Vec::with_capacity(len);
        for _ in 0..len {
            let t = c.u32()?;
            if t as usize >= tag_names.len() {
                return Err(CacheError::Corrupt("tag id out of range"));
            }
            if t as usize == first_post.len() {
                first_post.push(i as u32);
            } else if t as usize > first_post.len() {
                return Err(CacheError::Corrupt("tag ids not in first-occurrence order"));
            }
            tags.push(TagId(t));
        }
        if tags.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CacheError::Corrupt("post tags not sorted"));
        }
        posts.push(Post {
            time: times[i],
            user: user_ids[i],
            item: item_ids[i],
            tags,
        });
    }
    if first_post.len() != tag_names.len() {
        return Err(CacheError::Corrupt("unused tag in table"));
    }
    if posts.windows(2).any(|w| w[1].time < w[0].time) || posts.first().is_some_and(|p| p.time != epoch) {
        return Err(CacheError::Corrupt("post times"));
    }
    Ok(Corpus {
        posts,
        tags: TagTable {
            names: tag_names,
            first_post,
        },
        users,
        items,
        width,
        epoch,
        grouping,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::CorpusBuilder;

    fn sample() -> Corpus {
        let mut b = CorpusBuilder::new();
        b.push(100, "i1", "u1", &["a", "b"]);
        b.push(200, "i2", "u2", &["b", "c", "ü"]);
        b.push(200, "i1", "u1", &["a"]);
        b.build(BucketWidth::Seconds(50), Grouping::Window(10))
    }

    #[test]
    fn cache_round_trip() {
        let c = sample();
        let mut buf = Vec::new();
        write_cache(&c, &mut buf).unwrap();
        assert_eq!(&buf[..8], CACHE_MAGIC);
        let back = read_cache(&buf[..]).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_foreign_and_truncated_input() {
        assert!(matches!(read_cache(&b"0\ti\tu\ta\n"[..]), Err(CacheError::BadMagic)));
        let mut buf = Vec::new();
        write_cache(&sample(), &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_cache(&buf[..]), Err(CacheError::Corrupt(_))));
    }

    #[test]
    fn rejects_future_version() {
        let mut buf = Vec::new();
        write_cache(&sample(), &mut buf).unwrap();
        buf[8..12].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(read_cache(&buf[..]), Err(CacheError::Version(99))));
    }

    #[test]
    fn meta_counts() {
        let m = CorpusMeta::of(&sample());
        assert_eq!(m.posts, 3);
        assert_eq!(m.annotations, 6);
        assert_eq!(m.distinct_tags, 4);
        assert_eq!(m.bucket_seconds, 50);
        assert_eq!(m.epoch, 100);
    }
}
