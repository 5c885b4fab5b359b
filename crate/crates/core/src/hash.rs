//! Content hashes of configurations.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Key-sorted compact JSON. `serde_json::Value` keeps object keys in a
/// sorted map, so the text does not depend on field or key order.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&v)?)
}

/// Hex SHA-256 of raw bytes.
pub fn bytes_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over `blob <len>\0<canonical json>`, hex encoded, as git hashes
/// a blob.
pub fn content_hash<T: Serialize>(value: &T) -> Result<String> {
    let body = canonical_json(value)?;
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_order_does_not_matter() {
        let a: serde_json::Value = serde_json::from_str(r#"{"n": 3, "gamma": 0.05, "nested": {"x": 1, "y": 2}}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"nested": {"y": 2, "x": 1}, "gamma": 0.05, "n": 3}"#).unwrap();
        assert_eq!(content_hash(&a).unwrap(), content_hash(&b).unwrap());
        assert_eq!(content_hash(&a).unwrap().len(), 64);
    }

    #[test]
    fn empty_blob_matches_reference() {
        // sha256("blob 2\0{}")
        let v = serde_json::json!({});
        let h = content_hash(&v).unwrap();
        let mut r = Sha256::new();
        r.update(b"blob 2\0{}");
        let expected: String = r.finalize().iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(h, expected);
    }
}
