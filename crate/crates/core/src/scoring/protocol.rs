//! Validation of raw backend replies.
//!
//! Replies must be strict JSON. A single surrounding markdown code fence is
//! tolerated and stripped before parsing; nothing else is repaired.

use serde_json::Value;
use thiserror::Error;

use super::TaskBreakdown;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("reply is not valid JSON: {0}")]
    NotJson(String),
    #[error("expected a JSON array")]
    NotArray,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("element {0} is not an integer")]
    NotInteger(usize),
    #[error("element {index} = {value} is outside 0..=100")]
    OutOfRange { index: usize, value: String },
    #[error("element {0} is not a string")]
    NotString(usize),
    #[error("schema: {0}")]
    Schema(String),
    #[error("similarity is not a number in [-1, 1]")]
    BadSimilarity,
}

/// Removes one markdown code fence (with optional language tag) around the
/// reply, if present.
pub fn strip_code_fence(reply: &str) -> &str {
    let trimmed = reply.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let Some(body) = rest.strip_suffix("```") else {
        return trimmed;
    };
    // drop the language tag line
    match body.find('\n') {
        Some(nl) if !body[..nl].contains(['[', '{']) => body[nl + 1..].trim(),
        _ => body.trim(),
    }
}

fn parse_json(reply: &str) -> Result<Value, ProtocolError> {
    serde_json::from_str(strip_code_fence(reply)).map_err(|e| ProtocolError::NotJson(e.to_string()))
}

fn parse_array(reply: &str, expected: usize) -> Result<Vec<Value>, ProtocolError> {
    let Value::Array(values) = parse_json(reply)? else {
        return Err(ProtocolError::NotArray);
    };
    if values.len() != expected {
        return Err(ProtocolError::WrongLength { expected, got: values.len() });
    }
    Ok(values)
}

/// An array of exactly `expected` integers in 0..=100.
pub fn parse_score_reply(reply: &str, expected: usize) -> Result<Vec<u8>, ProtocolError> {
    parse_array(reply, expected)?
        .iter()
        .enumerate()
        .map(|(index, v)| {
            let Value::Number(n) = v else {
                return Err(ProtocolError::NotInteger(index));
            };
            if let Some(u) = n.as_u64() {
                u8::try_from(u)
                    .ok()
                    .filter(|s| *s <= 100)
                    .ok_or(ProtocolError::OutOfRange { index, value: n.to_string() })
            } else if n.as_i64().is_some() {
                Err(ProtocolError::OutOfRange { index, value: n.to_string() })
            } else {
                Err(ProtocolError::NotInteger(index))
            }
        })
        .collect()
}

/// An array of exactly `expected` strings.
pub fn parse_label_reply(reply: &str, expected: usize) -> Result<Vec<String>, ProtocolError> {
    parse_array(reply, expected)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::String(s) => Ok(s.trim().to_string()),
            _ => Err(ProtocolError::NotString(i)),
        })
        .collect()
}

/// The five-key breakdown object; unknown or missing keys are rejected.
pub fn parse_breakdown_reply(reply: &str) -> Result<TaskBreakdown, ProtocolError> {
    let value = parse_json(reply)?;
    if !value.is_object() {
        return Err(ProtocolError::Schema("breakdown must be a JSON object".into()));
    }
    let breakdown: TaskBreakdown =
        serde_json::from_value(value).map_err(|e| ProtocolError::Schema(e.to_string()))?;
    if breakdown.entity.trim().is_empty() {
        return Err(ProtocolError::Schema("entity must be non-empty".into()));
    }
    Ok(breakdown)
}

/// A bare cosine similarity.
pub fn parse_similarity_reply(reply: &str) -> Result<f64, ProtocolError> {
    match parse_json(reply)? {
        Value::Number(n) => n
            .as_f64()
            .filter(|x| (-1.0..=1.0).contains(x))
            .ok_or(ProtocolError::BadSimilarity),
        _ => Err(ProtocolError::BadSimilarity),
    }
}
