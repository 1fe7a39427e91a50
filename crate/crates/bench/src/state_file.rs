//! Canonical state JSON and the state hash.
//!
//! Canonical form sorts object keys and prints every float in scientific
//! notation with 17 significant digits, so equal states always produce
//! byte-identical text.

use std::fmt::Write as _;

use pilecore::PilingState;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum StateFileError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported state version {0}")]
    Version(u32),
    #[error("invalid state: {0}")]
    Invalid(String),
    #[error("state contains a non-finite number")]
    NonFinite,
}

fn write_value(out: &mut String, v: &Value) -> Result<(), StateFileError> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                let f = n.as_f64().ok_or(StateFileError::NonFinite)?;
                if !f.is_finite() {
                    return Err(StateFileError::NonFinite);
                }
                write!(out, "{f:.16e}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's map is ordered by key unless `preserve_order` is on
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                write_value(out, item)?;
            }
            out.push('}');
        }
    }
    Ok(())
}

fn canonical(value: &Value) -> Result<String, StateFileError> {
    let mut out = String::new();
    write_value(&mut out, value)?;
    Ok(out)
}

pub fn to_canonical_json(state: &PilingState) -> Result<String, StateFileError> {
    let value = serde_json::to_value(state).map_err(|_| StateFileError::NonFinite)?;
    canonical(&value)
}

/// Hash of everything in the state except the epoch counter, so a
/// round-trip that restores the content restores the hash.
pub fn state_hash(state: &PilingState) -> u64 {
    let mut value = serde_json::to_value(state).expect("state serializes");
    value.as_object_mut().unwrap().remove("epoch");
    let text = canonical(&value).expect("states hold finite numbers only");
    let digest = Sha256::digest(text.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn format_hash(hash: u64) -> String {
    format!("{hash:016x}")
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses and validates a state file. Optional bookkeeping fields may be
/// left out; they are rebuilt from the items and piles.
pub fn from_json(text: &str) -> Result<PilingState, StateFileError> {
    let mut state: PilingState = serde_json::from_str(text).map_err(|e| StateFileError::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    if state.version != pilecore::STATE_VERSION {
        return Err(StateFileError::Version(state.version));
    }
    state.finish_load().map_err(StateFileError::Invalid)?;
    Ok(state)
}
