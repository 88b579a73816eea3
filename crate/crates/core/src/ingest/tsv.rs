use super::Corpus;
use std::io::{self, Write};

/// Writes `corpus` as a four-column TSV (`time item user tag`), one row per
/// annotation, in corpus order. Reading it back with exact grouping yields
/// the same corpus.
pub fn write_tsv<W: Write>(corpus: &Corpus, mut out: W) -> io::Result<()> {
    for post in corpus.posts() {
        let item = clean(corpus.item_name(post.item));
        let user = clean(corpus.user_name(post.user));
        for &tag in &post.tags {
            writeln!(out, "{}\t{}\t{}\t{}", post.time, item, user, clean(corpus.tags().name(tag)))?;
        }
    }
    out.flush()
}

// Field separators inside a value would corrupt the row structure.
fn clean(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains(['\t', '\n', '\r']) {
        s.replace(['\t', '\n', '\r'], " ").into()
    } else {
        s.into()
    }
}
