use super::normalize::{normalize_str, TagNormalization};
use super::{assemble, BucketWidth, Corpus, Grouping, RawPost, StringTable};
use chrono::{DateTime, NaiveDate, NaiveDateTime};
use flate2::bufread::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Read};
use thiserror::Error;

/// Column layout of a delimiter-separated annotation log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnConfig {
    pub delimiter: u8,
    pub time: usize,
    pub item: usize,
    pub user: usize,
    pub tag: usize,
    /// Explicit post identifier, required for [`Grouping::PostId`].
    pub post: Option<usize>,
    pub has_header: bool,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        Self {
            delimiter: b'\t',
            time: 0,
            item: 1,
            user: 2,
            tag: 3,
            post: None,
            has_header: false,
        }
    }
}

impl ColumnConfig {
    fn min_columns(&self) -> usize {
        let m = self.time.max(self.item).max(self.user).max(self.tag);
        self.post.map_or(m, |p| m.max(p)) + 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOptions {
    pub columns: ColumnConfig,
    pub normalization: TagNormalization,
    pub grouping: Grouping,
    pub width: BucketWidth,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("i/o error while reading annotation log: {0}")]
    Io(#[from] io::Error),
    #[error("post-id grouping requires a post column")]
    MissingPostColumn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordErrorKind {
    MissingColumns,
    InvalidUtf8,
    BadTimestamp,
    EmptyTag,
}

/// A skipped row, by 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordError {
    pub line: u64,
    pub kind: RecordErrorKind,
}

/// Row accounting for one parse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub rows_read: u64,
    pub rows_kept: u64,
    pub skipped_missing_columns: u64,
    pub skipped_invalid_utf8: u64,
    pub skipped_bad_timestamp: u64,
    pub skipped_empty_tag: u64,
    /// The first few skipped rows, for diagnostics.
    pub sample_errors: Vec<RecordError>,
}

const MAX_SAMPLE_ERRORS: usize = 100;

impl ParseReport {
    pub fn rows_skipped(&self) -> u64 {
        self.skipped_missing_columns
            + self.skipped_invalid_utf8
            + self.skipped_bad_timestamp
            + self.skipped_empty_tag
    }

    fn skip(&mut self, line: u64, kind: RecordErrorKind) {
        match kind {
            RecordErrorKind::MissingColumns => self.skipped_missing_columns += 1,
            RecordErrorKind::InvalidUtf8 => self.skipped_invalid_utf8 += 1,
            RecordErrorKind::BadTimestamp => self.skipped_bad_timestamp += 1,
            RecordErrorKind::EmptyTag => self.skipped_empty_tag += 1,
        }
        if self.sample_errors.len() < MAX_SAMPLE_ERRORS {
            self.sample_errors.push(RecordError { line, kind });
        }
    }
}

/// Integer epoch seconds, RFC 3339, or a naive ISO-8601 date/datetime read as UTC.
pub fn parse_time(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

struct Row {
    time: i64,
    item: u32,
    user: u32,
    tag: u32,
    post: u32,
}

/// Reads an annotation log (plain or gzip) into a [`Corpus`].
///
/// Malformed rows are skipped and counted in the returned [`ParseReport`];
/// only I/O failures and inconsistent options are errors.
pub fn parse_annotation_log<R: Read>(input: R, opts: &ParseOptions) -> Result<(Corpus, ParseReport), ParseError> {
    if opts.grouping == Grouping::PostId && opts.columns.post.is_none() {
        return Err(ParseError::MissingPostColumn);
    }
    let mut reader = BufReader::with_capacity(1 << 20, input);
    let gz = {
        let head = reader.fill_buf()?;
        head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b
    };
    if gz {
        let decoded = BufReader::with_capacity(1 << 20, MultiGzDecoder::new(reader));
        parse_lines(decoded, opts)
    } else {
        parse_lines(reader, opts)
    }
}

fn parse_lines<R: BufRead>(mut reader: R, opts: &ParseOptions) -> Result<(Corpus, ParseReport), ParseError> {
    let cols = &opts.columns;
    let min_cols = cols.min_columns();
    let mut report = ParseReport::default();
    let mut tags = StringTable::new();
    let mut users = StringTable::new();
    let mut items = StringTable::new();
    let mut posts_keys = StringTable::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut spans: Vec<(usize, usize)> = Vec::with_capacity(min_cols.max(4));

    let mut buf = Vec::with_capacity(256);
    let mut line_no = 0u64;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let mut line = buf.as_slice();
        if let Some(rest) = line.strip_suffix(b"\n") {
            line = rest;
        }
        if let Some(rest) = line.strip_suffix(b"\r") {
            line = rest;
        }
        if line_no == 1 && cols.has_header {
            continue;
        }
        if line.is_empty() {
            continue;
        }
        report.rows_read += 1;

        spans.clear();
        let mut start = 0;
        for (i, &b) in line.iter().enumerate() {
            if b == cols.delimiter {
                spans.push((start, i));
                start = i + 1;
            }
        }
        spans.push((start, line.len()));
        if spans.len() < min_cols {
            report.skip(line_no, RecordErrorKind::MissingColumns);
            continue;
        }
        let text = |i: usize| std::str::from_utf8(&line[spans[i].0..spans[i].1]).ok();
        let (Some(time_s), Some(item_s), Some(user_s), Some(tag_s)) =
            (text(cols.time), text(cols.item), text(cols.user), text(cols.tag))
        else {
            report.skip(line_no, RecordErrorKind::InvalidUtf8);
            continue;
        };
        let post_s = match cols.post {
            Some(p) => match text(p) {
                Some(s) => Some(s),
                None => {
                    report.skip(line_no, RecordErrorKind::InvalidUtf8);
                    continue;
                }
            },
            None => None,
        };
        let Some(time) = parse_time(time_s) else {
            report.skip(line_no, RecordErrorKind::BadTimestamp);
            continue;
        };
        let Some(tag) = normalize_str(tag_s, opts.normalization) else {
            report.skip(line_no, RecordErrorKind::EmptyTag);
            continue;
        };
        report.rows_kept += 1;
        rows.push(Row {
            time,
            item: items.intern(item_s),
            user: users.intern(user_s),
            tag: tags.intern(&tag),
            post: post_s.map_or(0, |s| posts_keys.intern(s)),
        });
    }

    if rows.is_empty() {
        return Ok((Corpus::empty(opts.width, opts.grouping), report));
    }
    if !rows.windows(2).all(|w| w[0].time <= w[1].time) {
        rows.sort_by_key(|r| r.time);
    }
    let raw = group_rows(rows, opts.grouping);
    let corpus = assemble(raw, &tags, &users, &items, opts.width, opts.grouping);
    Ok((corpus, report))
}

fn group_rows(rows: Vec<Row>, grouping: Grouping) -> Vec<RawPost> {
    let mut posts: Vec<RawPost> = Vec::new();
    match grouping {
        Grouping::Exact => {
            let mut open: HashMap<(u32, u32), usize> = HashMap::new();
            let mut current_time = None;
            for r in rows {
                if current_time != Some(r.time) {
                    open.clear();
                    current_time = Some(r.time);
                }
                let idx = *open.entry((r.item, r.user)).or_insert_with(|| {
                    posts.push(RawPost { time: r.time, item: r.item, user: r.user, tags: Vec::new() });
                    posts.len() - 1
                });
                posts[idx].tags.push(r.tag);
            }
        }
        Grouping::Window(window) => {
            let mut open: HashMap<(u32, u32), usize> = HashMap::new();
            for r in rows {
                let key = (r.item, r.user);
                match open.get(&key) {
                    Some(&idx) if (r.time - posts[idx].time) as u64 <= window => {
                        posts[idx].tags.push(r.tag);
                    }
                    _ => {
                        posts.push(RawPost { time: r.time, item: r.item, user: r.user, tags: vec![r.tag] });
                        open.insert(key, posts.len() - 1);
                    }
                }
            }
        }
        Grouping::PostId => {
            // Post identity comes from the column; time, item and user from its first row.
            let mut open: HashMap<u32, usize> = HashMap::new();
            for r in rows {
                let idx = *open.entry(r.post).or_insert_with(|| {
                    posts.push(RawPost { time: r.time, item: r.item, user: r.user, tags: Vec::new() });
                    posts.len() - 1
                });
                posts[idx].tags.push(r.tag);
            }
        }
    }
    posts
}
