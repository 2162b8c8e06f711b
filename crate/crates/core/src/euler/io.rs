//! Endpoint population files and run metadata.
//!
//! Binary layout (little endian): 8-byte magic, `d: u64`, `N: u64`, `t: f64`,
//! then `d` columns of `N` `f64` values each.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ensure, Error, Result};

pub const BINARY_MAGIC: [u8; 8] = *b"SEPOP001";

/// Writes a row-major `N × d` population observed at time `t`.
pub fn write_binary<W: Write>(mut w: W, samples: &[f64], d: usize, t: f64) -> Result<()> {
    ensure(d >= 1 && samples.len() % d == 0, "samples", || "length must be a multiple of d".into())?;
    let n = samples.len() / d;
    w.write_all(&BINARY_MAGIC)?;
    w.write_all(&(d as u64).to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(n * 8);
    for c in 0..d {
        buf.clear();
        for i in 0..n {
            buf.extend_from_slice(&samples[i * d + c].to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a population; returns `(row-major samples, d, t)`.
pub fn read_binary<R: Read>(mut r: R) -> Result<(Vec<f64>, usize, f64)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != BINARY_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let t = f64::from_le_bytes(word);
    if d == 0 || d > 64 {
        return Err(Error::Format(format!("implausible dimension {d}")));
    }
    let mut samples = vec![0.0; n * d];
    for c in 0..d {
        for i in 0..n {
            r.read_exact(&mut word)?;
            samples[i * d + c] = f64::from_le_bytes(word);
        }
    }
    Ok((samples, d, t))
}

/// CSV with header `x0,...,x{d-1}`; values printed round-trip exact.
pub fn write_csv<W: Write>(mut w: W, samples: &[f64], d: usize) -> Result<()> {
    ensure(d >= 1 && samples.len() % d == 0, "samples", || "length must be a multiple of d".into())?;
    let head: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    writeln!(w, "{}", head.join(","))?;
    for row in samples.chunks(d) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Git-style content hash: SHA-256 of `"blob <len>\0" ++ bytes` of the
/// compact JSON encoding (keys sorted).
pub fn content_hash(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values serialize");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(&bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: serde_json::Value,
    pub drift: serde_json::Value,
    pub drift_hash: String,
    pub dim: usize,
    pub paths: usize,
    pub times: Vec<f64>,
}

impl RunMetadata {
    pub fn for_run(run: &super::EulerRun) -> Self {
        RunMetadata {
            config: serde_json::to_value(&run.config).expect("config serializes"),
            drift: run.drift.clone(),
            drift_hash: content_hash(&run.drift),
            dim: run.dim,
            paths: run.config.paths,
            times: run.times.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_roundtrip() {
        let s: Vec<f64> = (0..30).map(|i| (i as f64).sin() * 1e300_f64.powf((i % 3) as f64 / 3.0)).collect();
        let mut buf = Vec::new();
        write_binary(&mut buf, &s, 3, 0.75).unwrap();
        assert_eq!(buf.len(), 32 + 30 * 8);
        let (back, d, t) = read_binary(&buf[..]).unwrap();
        assert_eq!((d, t), (3, 0.75));
        assert_eq!(back, s);
        buf[0] = b'X';
        assert!(read_binary(&buf[..]).is_err());
    }

    #[test]
    fn hash_is_git_blob_style() {
        // `printf '{}' | git hash-object --stdin` style framing, SHA-256 variant
        let h = content_hash(&serde_json::json!({}));
        let mut want = Sha256::new();
        want.update(b"blob 2\0{}");
        let want: String = want.finalize().iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(h, want);
    }
}
