//! Messages over a `q`-ary alphabet and the indexed segmentation used by the
//! noiseless codecs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{DecodeError, Error, Result};

/// A string of symbols in `[0, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    q: u8,
    symbols: Vec<u8>,
}

impl Message {
    pub fn new(q: u8, symbols: Vec<u8>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size must be at least 2, got {q}")));
        }
        if let Some(bad) = symbols.iter().find(|&&s| s >= q) {
            return Err(Error::InvalidArgument(format!("symbol {bad} outside alphabet of size {q}")));
        }
        Ok(Message { q, symbols })
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.symbols
    }

    /// Hex form `<len>:<hex>`. Binary messages are packed MSB first into bytes;
    /// larger alphabets use one byte per symbol.
    pub fn to_hex(&self) -> String {
        let bytes = if self.q == 2 {
            self.symbols
                .chunks(8)
                .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
                .collect()
        } else {
            self.symbols.clone()
        };
        format!("{}:{}", self.symbols.len(), hex::encode(bytes))
    }

    pub fn from_hex(q: u8, text: &str) -> Result<Self> {
        let (len, digits) = text
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Format("message must look like <len>:<hex>".into()))?;
        let len: usize = len
            .parse()
            .map_err(|_| Error::Format(format!("bad message length {len:?}")))?;
        let bytes = hex::decode(digits).map_err(|e| Error::Format(format!("bad hex: {e}")))?;
        let symbols = if q == 2 {
            if bytes.len() != len.div_ceil(8) {
                return Err(Error::Format(format!(
                    "{len} bits need {} bytes, got {}",
                    len.div_ceil(8),
                    bytes.len()
                )));
            }
            let bits: Vec<u8> = bytes
                .iter()
                .flat_map(|&byte| (0..8).map(move |i| (byte >> (7 - i)) & 1))
                .collect();
            if bits[len..].iter().any(|&b| b != 0) {
                return Err(Error::Format("nonzero padding bits in message".into()));
            }
            bits[..len].to_vec()
        } else {
            if bytes.len() != len {
                return Err(Error::Format(format!("expected {len} symbol bytes, got {}", bytes.len())));
            }
            bytes
        };
        Message::new(q, symbols).map_err(|e| Error::Format(e.to_string()))
    }

    /// Random message of the given length from a seeded generator.
    pub fn random(q: u8, len: usize, rng: &mut impl rand::Rng) -> Result<Self> {
        let symbols = (0..len).map(|_| rng.gen_range(0..q.max(2))).collect();
        Message::new(q, symbols)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Parses binary messages in hex form.
impl FromStr for Message {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Message::from_hex(2, s)
    }
}

/// Number of base-`q` digits needed to write every index in `1..=parts`.
pub fn index_width(parts: usize, q: u8) -> usize {
    let q = q as usize;
    let mut width = 0;
    let mut reach = 1usize;
    while reach <= parts {
        width += 1;
        reach = reach.saturating_mul(q);
    }
    width
}

/// Layout of a message cut into `parts` equal segments, each followed by its
/// 1-based index in `width` base-`q` digits (most significant first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct IndexedLayout {
    pub q: u8,
    pub parts: usize,
    pub segment_len: usize,
    pub width: usize,
}

impl IndexedLayout {
    pub fn payload_len(&self) -> usize {
        self.segment_len + self.width
    }

    pub fn message_len(&self) -> usize {
        self.parts * self.segment_len
    }

    pub fn split(&self, msg: &Message) -> Result<Vec<Vec<u8>>> {
        if msg.q() != self.q {
            return Err(Error::InvalidArgument(format!(
                "message alphabet {} does not match code alphabet {}",
                msg.q(),
                self.q
            )));
        }
        if msg.len() != self.message_len() {
            return Err(Error::InvalidArgument(format!(
                "message has {} symbols, expected {}",
                msg.len(),
                self.message_len()
            )));
        }
        Ok(msg
            .symbols()
            .chunks(self.segment_len)
            .enumerate()
            .map(|(i, seg)| {
                let mut part = seg.to_vec();
                part.extend(self.index_digits(i + 1));
                part
            })
            .collect())
    }

    fn index_digits(&self, index: usize) -> Vec<u8> {
        let q = self.q as usize;
        let mut digits = vec![0u8; self.width];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % q) as u8;
            rest /= q;
        }
        digits
    }

    /// 1-based index stored in a payload's suffix.
    pub fn index_of(&self, payload: &[u8]) -> usize {
        payload[self.segment_len..]
            .iter()
            .fold(0usize, |acc, &d| acc * self.q as usize + d as usize)
    }

    /// Reassembles the message from payloads in any order, with repeats allowed.
    pub fn join<'a>(
        &self,
        payloads: impl IntoIterator<Item = &'a [u8]>,
    ) -> std::result::Result<Message, DecodeError> {
        let mut segments: BTreeMap<usize, &[u8]> = BTreeMap::new();
        for payload in payloads {
            if payload.len() != self.payload_len() {
                return Err(DecodeError::CorruptFragment(format!(
                    "payload length {} differs from {}",
                    payload.len(),
                    self.payload_len()
                )));
            }
            let index = self.index_of(payload);
            if index == 0 || index > self.parts {
                return Err(DecodeError::CorruptFragment(format!(
                    "part index {index} outside 1..={}",
                    self.parts
                )));
            }
            let segment = &payload[..self.segment_len];
            if let Some(previous) = segments.insert(index, segment) {
                if previous != segment {
                    return Err(DecodeError::CorruptFragment(format!(
                        "part {index} appears with two different payloads"
                    )));
                }
            }
        }
        if let Some(missing) = (1..=self.parts).find(|i| !segments.contains_key(i)) {
            return Err(DecodeError::IllegalFragment(format!("part {missing} not present")));
        }
        let symbols = segments.values().flat_map(|s| s.iter().copied()).collect();
        Ok(Message::new(self.q, symbols).expect("segments hold valid symbols"))
    }
}
