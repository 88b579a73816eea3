use crate::args::{Format, InputArgs};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{self, Cursor, Read, Write};
use std::path::{Path, PathBuf};
use tagevo::ingest::{parse_annotation_log, read_cache, ParseError, ParseReport, CACHE_MAGIC};
use tagevo::{BucketWidth, Corpus};
use tempfile::NamedTempFile;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Input(_) => "input",
            CliError::Output(_) => "output",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) | CliError::Output(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

struct Hashing<R> {
    inner: R,
    hasher: Sha256,
    bytes: u64,
}

impl<R: Read> Read for Hashing<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub format: &'static str,
    pub bytes: u64,
    pub sha256: String,
}

pub struct Loaded {
    pub corpus: Corpus,
    pub report: Option<ParseReport>,
    pub digest: InputDigest,
}

fn open(path: &str) -> Result<Box<dyn Read>, CliError> {
    if path == "-" {
        Ok(Box::new(io::stdin().lock()))
    } else {
        File::open(path)
            .map(|f| Box::new(f) as Box<dyn Read>)
            .map_err(|e| CliError::Input(format!("cannot open {path}: {e}")))
    }
}

/// Reads a binary cache or an annotation log (plain or gzipped), hashing
/// every input byte.
pub fn load(input: &InputArgs, width: BucketWidth) -> Result<Loaded, CliError> {
    let opts = input.parse_options(width).map_err(CliError::Config)?;
    let mut src = Hashing { inner: open(&input.input)?, hasher: Sha256::new(), bytes: 0 };
    let in_err = |e: io::Error| CliError::Input(format!("reading {}: {e}", input.input));

    let mut head = Vec::with_capacity(CACHE_MAGIC.len());
    (&mut src).take(CACHE_MAGIC.len() as u64).read_to_end(&mut head).map_err(in_err)?;
    let is_cache = head == CACHE_MAGIC;
    let (corpus, report) = {
        let stream = Cursor::new(head).chain(&mut src);
        if is_cache {
            let c = read_cache(stream).map_err(|e| CliError::Input(format!("{}: {e}", input.input)))?;
            (c, None)
        } else {
            let (c, r) = parse_annotation_log(stream, &opts).map_err(|e| match e {
                ParseError::Io(e) => in_err(e),
                e => CliError::Config(e.to_string()),
            })?;
            (c, Some(r))
        }
    };
    io::copy(&mut src, &mut io::sink()).map_err(in_err)?;
    let digest = InputDigest {
        path: input.input.clone(),
        format: if is_cache { "cache" } else { "tsv" },
        bytes: src.bytes,
        sha256: format!("{:x}", src.hasher.finalize()),
    };
    Ok(Loaded { corpus, report, digest })
}

/// Files written by one run. Each file appears atomically (temp file in the
/// same directory, then rename); `rollback` removes everything written so far.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let fail = |e: &dyn std::fmt::Display| CliError::Output(format!("writing {}: {e}", target.display()));
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(|e| fail(&e))?;
        {
            let mut w = io::BufWriter::new(tmp.as_file_mut());
            f(&mut w).map_err(|e| fail(&e))?;
            w.flush().map_err(|e| fail(&e))?;
        }
        tmp.persist(&target).map_err(|e| fail(&e.error))?;
        self.written.push(target);
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")
        })
    }

    /// Writes `rows` as `<stem>.csv` or `<stem>.json`.
    pub fn table<T: Serialize>(&mut self, stem: &str, format: Format, rows: &[T]) -> Result<(), CliError> {
        let name = format!("{stem}.{}", format.extension());
        match format {
            Format::Json => self.json(&name, rows),
            Format::Csv => self.write_with(&name, |w| {
                let mut out = csv::Writer::from_writer(w);
                for r in rows {
                    out.serialize(r).map_err(io::Error::other)?;
                }
                out.flush()
            }),
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    pub fn rollback(&mut self) {
        for p in self.written.drain(..) {
            let _ = std::fs::remove_file(p);
        }
    }
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    pub config_file: Option<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub parse_report: Option<&'a ParseReport>,
}
