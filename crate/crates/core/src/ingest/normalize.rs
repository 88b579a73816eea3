use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

/// Which canonicalization steps to apply to raw tag strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagNormalization {
    pub trim: bool,
    pub case_fold: bool,
    /// Unicode canonical composition (NFC).
    pub compose: bool,
}

impl Default for TagNormalization {
    fn default() -> Self {
        Self {
            trim: true,
            case_fold: true,
            compose: true,
        }
    }
}

impl TagNormalization {
    /// Keep tags byte-for-byte.
    pub fn verbatim() -> Self {
        Self {
            trim: false,
            case_fold: false,
            compose: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("tag is not valid UTF-8 (byte offset {0})")]
    InvalidUtf8(usize),
}

/// Canonical form of a raw tag, or `None` when nothing is left (skip).
pub fn normalize_tag(raw: &[u8], opts: TagNormalization) -> Result<Option<String>, NormalizeError> {
    let s = std::str::from_utf8(raw).map_err(|e| NormalizeError::InvalidUtf8(e.valid_up_to()))?;
    Ok(normalize_str(s, opts))
}

pub(crate) fn normalize_str(s: &str, opts: TagNormalization) -> Option<String> {
    let s = if opts.trim { s.trim() } else { s };
    if s.is_empty() {
        return None;
    }
    let out = if s.is_ascii() {
        if opts.case_fold {
            s.to_ascii_lowercase()
        } else {
            s.to_owned()
        }
    } else {
        let composed: String = if opts.compose && is_nfc_quick(s.chars()) != IsNormalized::Yes {
            s.nfc().collect()
        } else {
            s.to_owned()
        };
        if opts.case_fold {
            // Lowercasing can decompose; recompose afterwards.
            let lower = composed.to_lowercase();
            if opts.compose {
                lower.nfc().collect()
            } else {
                lower
            }
        } else {
            composed
        }
    };
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}
