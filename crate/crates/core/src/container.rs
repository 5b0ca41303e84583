//! On-disk container for a [`Message`].
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "SHUF" | version: u16 | payload | crc32(payload): u32
//! payload = tail word count: u32 | tail words: u16 each, oldest first | head: u64
//! ```

use crate::ans::Message;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SHUF";
pub const VERSION: u16 = 1;

pub fn serialize(m: &Message) -> Vec<u8> {
    let tail = m.tail();
    let mut payload = Vec::with_capacity(12 + 2 * tail.len());
    payload.extend_from_slice(&(tail.len() as u32).to_le_bytes());
    for w in tail {
        payload.extend_from_slice(&w.to_le_bytes());
    }
    payload.extend_from_slice(&m.head().to_le_bytes());

    let mut out = Vec::with_capacity(payload.len() + 10);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out
}

pub fn deserialize(bytes: &[u8]) -> Result<Message> {
    let bad = |what: &str| Error::Format(what.to_string());
    if bytes.len() < 6 + 4 + 8 + 4 {
        return Err(bad("truncated container"));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("missing SHUF magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let payload = &bytes[6..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().expect("4 bytes"));
    if crc32fast::hash(payload) != stored {
        return Err(bad("checksum mismatch"));
    }
    let count = u32::from_le_bytes(payload[..4].try_into().expect("4 bytes")) as usize;
    if payload.len() != 4 + 2 * count + 8 {
        return Err(bad("length does not match word count"));
    }
    let tail = payload[4..4 + 2 * count]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    let head = u64::from_le_bytes(payload[4 + 2 * count..].try_into().expect("8 bytes"));
    Message::from_parts(head, tail)
}
