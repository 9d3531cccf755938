//! Binary forensic code that also tolerates up to `delta` bit flips anywhere
//! in the codeword.
//!
//! Non-zero units get a full border of ones and carry one slice of a
//! substitution-correcting code for the sliced channel in their interior.
//! Decoding aligns on the lowest-weight `d x d` window, which stays on a
//! color-0 unit as long as `2 delta < d`.

use std::collections::BTreeMap;

use crate::codec2d::{complete_units, CodeParams2D};
use crate::error::{infeasible, DecodeError, Error, Result};
use crate::grid::BitGrid2D;
use crate::message::Message;

/// A code whose codewords are unordered sets of equal-length binary strings
/// and which corrects a bounded number of symbol substitutions across them.
pub trait SlicedCodec {
    /// Number of slices `Q`.
    fn slice_count(&self) -> usize;
    /// Length `L` of every slice.
    fn slice_len(&self) -> usize;
    /// Total substitutions `K` the decoder corrects.
    fn budget(&self) -> usize;
    /// Message length in bits.
    fn message_len(&self) -> usize;
    /// Produces `Q` distinct slices.
    fn encode(&self, msg: &Message) -> Result<Vec<Vec<u8>>>;
    /// Recovers the message from `Q` slices in any order.
    fn decode(&self, slices: &[Vec<u8>]) -> Result<Message, DecodeError>;
    /// Position of a (possibly corrupted) slice within the codeword, if the
    /// codec can tell.
    fn slice_index(&self, slice: &[u8]) -> Option<usize>;
}

/// Reference sliced codec built from repetition: each slice starts with its
/// index with every bit repeated `2K + 1` times, and each message bit is
/// stored `2K + 1` times spread over the slice payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepetitionCodec {
    slices: usize,
    slice_len: usize,
    budget: usize,
    index_width: usize,
    message_len: usize,
}

impl RepetitionCodec {
    pub fn new(slices: usize, slice_len: usize, budget: usize) -> Result<Self> {
        if slices == 0 {
            return Err(Error::InvalidArgument("need at least one slice".into()));
        }
        let copies = 2 * budget + 1;
        let index_width = slices.max(2).next_power_of_two().trailing_zeros() as usize;
        let index_bits = index_width * copies;
        if index_bits >= slice_len {
            return Err(infeasible(
                "index bits < L",
                format!("{index_bits} index bits in slices of length {slice_len}"),
            ));
        }
        let message_len = slices * (slice_len - index_bits) / copies;
        if message_len < 1 {
            return Err(infeasible(
                "k >= 1",
                format!("Q={slices}, L={slice_len}, K={budget} leaves no message bits"),
            ));
        }
        Ok(RepetitionCodec {
            slices,
            slice_len,
            budget,
            index_width,
            message_len,
        })
    }

    fn copies(&self) -> usize {
        2 * self.budget + 1
    }

    fn index_bits(&self) -> usize {
        self.index_width * self.copies()
    }

    fn data_len(&self) -> usize {
        self.slice_len - self.index_bits()
    }

    fn majority(&self, bits: impl Iterator<Item = u8>) -> u8 {
        let ones = bits.filter(|&b| b != 0).count();
        u8::from(2 * ones > self.copies())
    }
}

impl SlicedCodec for RepetitionCodec {
    fn slice_count(&self) -> usize {
        self.slices
    }

    fn slice_len(&self) -> usize {
        self.slice_len
    }

    fn budget(&self) -> usize {
        self.budget
    }

    fn message_len(&self) -> usize {
        self.message_len
    }

    fn encode(&self, msg: &Message) -> Result<Vec<Vec<u8>>> {
        if msg.q() != 2 || msg.len() != self.message_len {
            return Err(Error::InvalidArgument(format!(
                "expected a binary message of {} bits, got {} symbols over q={}",
                self.message_len,
                msg.len(),
                msg.q()
            )));
        }
        let (k, copies, data_len) = (self.message_len, self.copies(), self.data_len());
        let mut stream = vec![0u8; self.slices * data_len];
        for copy in 0..copies {
            stream[copy * k..(copy + 1) * k].copy_from_slice(msg.symbols());
        }
        let slices = (0..self.slices)
            .map(|s| {
                let mut slice = Vec::with_capacity(self.slice_len);
                for bit in (0..self.index_width).rev() {
                    slice.extend(std::iter::repeat_n(((s >> bit) & 1) as u8, copies));
                }
                slice.extend_from_slice(&stream[s * data_len..(s + 1) * data_len]);
                slice
            })
            .collect();
        Ok(slices)
    }

    fn decode(&self, slices: &[Vec<u8>]) -> Result<Message, DecodeError> {
        if slices.len() != self.slices {
            return Err(DecodeError::CorruptionExceedsBudget(format!(
                "expected {} slices, got {}",
                self.slices,
                slices.len()
            )));
        }
        let mut ordered: Vec<Option<&[u8]>> = vec![None; self.slices];
        for slice in slices {
            let index = self.slice_index(slice).ok_or_else(|| {
                DecodeError::CorruptionExceedsBudget("slice index unreadable".into())
            })?;
            if ordered[index].replace(&slice[self.index_bits()..]).is_some() {
                return Err(DecodeError::CorruptionExceedsBudget(format!(
                    "two slices claim index {index}"
                )));
            }
        }
        let stream: Vec<u8> = ordered.into_iter().flat_map(|s| s.expect("all indices present").iter().copied()).collect();
        let k = self.message_len;
        let bits = (0..k)
            .map(|b| self.majority((0..self.copies()).map(|copy| stream[copy * k + b])))
            .collect();
        Ok(Message::new(2, bits).expect("majority yields bits"))
    }

    fn slice_index(&self, slice: &[u8]) -> Option<usize> {
        if slice.len() != self.slice_len {
            return None;
        }
        let copies = self.copies();
        let index = slice[..self.index_bits()]
            .chunks(copies)
            .fold(0usize, |acc, group| (acc << 1) | self.majority(group.iter().copied()) as usize);
        (index < self.slices).then_some(index)
    }
}

/// Which sliced-codec redundancy profile to validate against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CodecProfile {
    /// The shipped repetition codec.
    #[default]
    Reference,
    /// The parameter requirement of a near-optimal sliced-channel code.
    Optimal,
}

/// Whether `L' + 4K L' + 2K log2(4K L') <= L` with `L' = 3 log2 Q + 4K^2 + 2`.
pub fn optimal_profile_feasible(slices: usize, slice_len: usize, budget: usize) -> bool {
    let k = budget as f64;
    let inner = 3.0 * (slices.max(1) as f64).log2() + 4.0 * k * k + 2.0;
    let log_term = if budget == 0 { 0.0 } else { 2.0 * k * (4.0 * k * inner).log2() };
    inner + 4.0 * k * inner + log_term <= slice_len as f64
}

/// Parameters of the flip-tolerant code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobustParams {
    pub base: CodeParams2D,
    /// Flip budget `delta`.
    pub delta: usize,
    pub profile: CodecProfile,
    pub codec: RepetitionCodec,
}

impl RobustParams {
    pub fn validate(base: CodeParams2D, delta: usize, profile: CodecProfile) -> Result<Self> {
        if base.q != 2 {
            return Err(infeasible("q == 2", format!("q={}", base.q)));
        }
        let d = base.unit;
        if 2 * delta >= d {
            return Err(infeasible("2 delta < d", format!("delta={delta}, d={d}")));
        }
        let slices = base.colors - 1;
        let slice_len = (d - 2) * (d - 2);
        if slice_len == 0 {
            return Err(infeasible("L > 0", format!("d={d}")));
        }
        if profile == CodecProfile::Optimal && !optimal_profile_feasible(slices, slice_len, delta) {
            return Err(infeasible(
                "L' + 4KL' + 2K log(4KL') <= L",
                format!("Q={slices}, L={slice_len}, K={delta}"),
            ));
        }
        let codec = RepetitionCodec::new(slices, slice_len, delta)?;
        Ok(RobustParams {
            base,
            delta,
            profile,
            codec,
        })
    }

    /// Number of slices `Q = m' - 1`.
    pub fn slices(&self) -> usize {
        self.codec.slice_count()
    }

    /// Slice length `L = (d - 2)^2`.
    pub fn slice_len(&self) -> usize {
        self.codec.slice_len()
    }

    pub fn message_len(&self) -> usize {
        self.codec.message_len()
    }

    /// Rate `k / M` achieved with the reference codec.
    pub fn achieved_rate(&self) -> f64 {
        self.message_len() as f64 / self.base.min_area as f64
    }
}

pub fn validate_params_robust(base: CodeParams2D, delta: usize, profile: CodecProfile) -> Result<RobustParams> {
    RobustParams::validate(base, delta, profile)
}

fn is_border(d: usize, r: usize, c: usize) -> bool {
    r == 0 || c == 0 || r == d - 1 || c == d - 1
}

/// Encodes with the reference codec.
pub fn encode_robust(params: &RobustParams, msg: &Message) -> Result<BitGrid2D> {
    encode_robust_with(&params.base, &params.codec, msg)
}

/// Encodes with any sliced codec whose slices fill a unit interior.
pub fn encode_robust_with(base: &CodeParams2D, codec: &impl SlicedCodec, msg: &Message) -> Result<BitGrid2D> {
    let d = base.unit;
    if codec.slice_count() != base.colors - 1 || codec.slice_len() != (d - 2) * (d - 2) {
        return Err(Error::InvalidArgument(format!(
            "codec shape Q={}, L={} does not match {} colors of side {d}",
            codec.slice_count(),
            codec.slice_len(),
            base.colors
        )));
    }
    let mut slices = codec.encode(msg)?;
    slices.sort();
    let interior = d - 2;
    BitGrid2D::from_fn(base.n, base.n, 2, |r, c| {
        let color = crate::codec2d::color_unchecked(base.colors, r / d, c / d);
        let (ur, uc) = (r % d, c % d);
        match color {
            0 => 0,
            _ if is_border(d, ur, uc) => 1,
            _ => slices[color - 1][(ur - 1) * interior + uc - 1],
        }
    })
}

/// Lexicographically smallest `(top, left)` among the `d x d` windows of
/// minimum Hamming weight.
pub fn find_min_weight_square(frag: &BitGrid2D, d: usize) -> Result<(usize, usize)> {
    if d == 0 || frag.rows() < d || frag.cols() < d {
        return Err(Error::InvalidArgument(format!(
            "{}x{} fragment has no {d}x{d} window",
            frag.rows(),
            frag.cols()
        )));
    }
    let prefix = frag.prefix();
    let mut best = (usize::MAX, 0, 0);
    for top in 0..=frag.rows() - d {
        for left in 0..=frag.cols() - d {
            let weight = prefix.rect_sum_unchecked(top, left, d, d);
            if weight < best.0 {
                best = (weight, top, left);
                if weight == 0 {
                    return Ok((top, left));
                }
            }
        }
    }
    Ok((best.1, best.2))
}

pub fn decode_robust(params: &RobustParams, frag: &BitGrid2D) -> Result<Message, DecodeError> {
    decode_robust_with(&params.base, &params.codec, frag)
}

/// Decodes a legal fragment holding at most `K` flips.
///
/// Units whose border is mostly zero are treated as (corrupted) color-0 units.
/// The remaining units are grouped by the slice index the codec reads from
/// their interior, and one representative per index goes to the codec.
pub fn decode_robust_with(
    base: &CodeParams2D,
    codec: &impl SlicedCodec,
    frag: &BitGrid2D,
) -> Result<Message, DecodeError> {
    if !base.is_legal(frag.rows(), frag.cols()) {
        return Err(DecodeError::IllegalFragment(format!(
            "{}x{} fragment needs area >= {} and sides >= {}",
            frag.rows(),
            frag.cols(),
            base.min_area,
            base.min_side
        )));
    }
    if frag.q() != 2 {
        return Err(DecodeError::CorruptFragment(format!("fragment alphabet {} is not binary", frag.q())));
    }
    let d = base.unit;
    let (top, left) = find_min_weight_square(frag, d).map_err(|e| DecodeError::IllegalFragment(e.to_string()))?;
    let border_len = 4 * d - 4;
    let mut representatives: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
    for cells in complete_units(frag, d, top % d, left % d) {
        let mut border_weight = 0;
        let mut interior = Vec::with_capacity((d - 2) * (d - 2));
        for r in 0..d {
            for c in 0..d {
                let v = cells[r * d + c];
                if is_border(d, r, c) {
                    border_weight += usize::from(v != 0);
                } else {
                    interior.push(v);
                }
            }
        }
        if 2 * border_weight < border_len {
            continue;
        }
        if let Some(index) = codec.slice_index(&interior) {
            representatives.entry(index).or_insert(interior);
        }
    }
    if representatives.len() < codec.slice_count() {
        return Err(DecodeError::IllegalFragment(format!(
            "found {} of {} slices",
            representatives.len(),
            codec.slice_count()
        )));
    }
    let slices: Vec<Vec<u8>> = representatives.into_values().collect();
    codec.decode(&slices).map_err(|e| match e {
        DecodeError::CorruptionExceedsBudget(_) => e,
        other => DecodeError::CorruptionExceedsBudget(other.to_string()),
    })
}
