//! Forensic code over `n x n` matrices: any legal rectangular fragment (area
//! at least `M`, both sides at least `h`) determines the message.
//!
//! The codeword is tiled by `d x d` units colored with `m' = m/4` colors so
//! that every legal fragment sees every color. Color-0 units are all zero and
//! serve as alignment markers; every other unit carries one indexed part of
//! the message with its four corners set to 1.

use std::collections::BTreeSet;

use crate::discrepancy::bit_reverse;
use crate::error::{infeasible, out_of_range, DecodeError, Error, Result};
use crate::grid::BitGrid2D;
use crate::message::{index_width, IndexedLayout, Message};

/// Derived parameters of the 2D code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams2D {
    pub q: u8,
    /// Codeword side length.
    pub n: usize,
    /// Minimum fragment area `M`.
    pub min_area: usize,
    /// Minimum fragment side `h`.
    pub min_side: usize,
    /// Unit side `d`.
    pub unit: usize,
    /// Color budget `m`, a power of two.
    pub m: usize,
    /// Number of colors `m' = m/4`.
    pub colors: usize,
    /// Payload symbols per unit, `d^2 - 4`.
    pub payload_len: usize,
    /// Symbols used by each part's index suffix.
    pub index_width: usize,
    /// Message length `k`.
    pub message_len: usize,
}

/// Largest `d` with `3d - 1 <= h`.
pub(crate) fn unit_side_for(min_side: usize) -> usize {
    (min_side + 1) / 3
}

impl CodeParams2D {
    /// Derives `d`, `m` and the message length from `(q, M, h)`. When `n` is
    /// omitted it defaults to `d * m`.
    pub fn derive(q: u8, n: Option<usize>, min_area: usize, min_side: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size must be at least 2, got {q}")));
        }
        if min_area < 1 || min_side < 2 {
            return Err(Error::InvalidArgument(format!(
                "need M >= 1 and h >= 2, got M={min_area}, h={min_side}"
            )));
        }
        let d = unit_side_for(min_side);
        if d < 3 {
            return Err(infeasible("d >= 3", format!("h={min_side} gives d={d}")));
        }
        let fits = |m: usize| -> bool {
            (4 * d - 1)
                .checked_mul(m.checked_mul(d).and_then(|v| v.checked_add(2 * d - 1)).unwrap_or(usize::MAX))
                .is_some_and(|need| need <= min_area)
        };
        let mut m = 0usize;
        let mut candidate = 1usize;
        while fits(candidate) {
            m = candidate;
            match candidate.checked_mul(2) {
                Some(next) => candidate = next,
                None => break,
            }
        }
        if m < 8 {
            return Err(infeasible(
                "m >= 8",
                format!("M={min_area} with d={d} allows only m={m}"),
            ));
        }
        let colors = m / 4;
        let n = n.unwrap_or(d * m);
        if n == 0 || !n.is_multiple_of(d) || !(n / d).is_multiple_of(colors) {
            return Err(infeasible(
                "d | n and m' | n/d",
                format!("n={n}, d={d}, m'={colors}"),
            ));
        }
        let payload_len = d * d - 4;
        let width = index_width(colors - 1, q);
        if payload_len <= width {
            return Err(infeasible(
                "k >= 1",
                format!("unit payload {payload_len} cannot hold a {width}-symbol index"),
            ));
        }
        Ok(CodeParams2D {
            q,
            n,
            min_area,
            min_side,
            unit: d,
            m,
            colors,
            payload_len,
            index_width: width,
            message_len: (colors - 1) * (payload_len - width),
        })
    }

    /// Number of units along each side of the codeword.
    pub fn units_per_side(&self) -> usize {
        self.n / self.unit
    }

    pub(crate) fn layout(&self) -> IndexedLayout {
        IndexedLayout {
            q: self.q,
            parts: self.colors - 1,
            segment_len: self.payload_len - self.index_width,
            width: self.index_width,
        }
    }

    /// Whether an `rows x cols` fragment meets the area and side requirements.
    pub fn is_legal(&self, rows: usize, cols: usize) -> bool {
        rows.saturating_mul(cols) >= self.min_area && rows.min(cols) >= self.min_side
    }
}

pub fn derive_params_2d(q: u8, n: Option<usize>, min_area: usize, min_side: usize) -> Result<CodeParams2D> {
    CodeParams2D::derive(q, n, min_area, min_side)
}

/// Color of unit `(i, j)`: `(j - bit_reverse(i mod m')) mod m'`.
pub fn color(params: &CodeParams2D, i: usize, j: usize) -> Result<usize> {
    let units = params.units_per_side();
    if i >= units || j >= units {
        return Err(out_of_range("unit", format!("({i}, {j}) outside {units}x{units} unit grid")));
    }
    Ok(color_unchecked(params.colors, i, j))
}

pub(crate) fn color_unchecked(colors: usize, i: usize, j: usize) -> usize {
    let bits = colors.trailing_zeros();
    let reversed = bit_reverse((i % colors) as u64, bits).expect("i mod m' fits") as usize;
    (j % colors + colors - reversed) % colors
}

/// Cuts the message into `m' - 1` indexed payloads of length `d^2 - 4`.
pub fn split_message(params: &CodeParams2D, msg: &Message) -> Result<Vec<Vec<u8>>> {
    params.layout().split(msg)
}

pub fn join_message<'a>(
    params: &CodeParams2D,
    payloads: impl IntoIterator<Item = &'a [u8]>,
) -> Result<Message, DecodeError> {
    params.layout().join(payloads)
}

fn is_corner(d: usize, r: usize, c: usize) -> bool {
    (r == 0 || r == d - 1) && (c == 0 || c == d - 1)
}

/// Places a payload in a `d x d` unit: corners set to 1, payload row-major
/// in the remaining cells.
pub fn pack_unit(params: &CodeParams2D, payload: &[u8]) -> Result<BitGrid2D> {
    let d = params.unit;
    if d < 3 {
        return Err(infeasible("d >= 3", format!("d={d}")));
    }
    if payload.len() != params.payload_len {
        return Err(Error::InvalidArgument(format!(
            "payload has {} symbols, expected {}",
            payload.len(),
            params.payload_len
        )));
    }
    let mut symbols = payload.iter().copied();
    BitGrid2D::from_fn(d, d, params.q, |r, c| {
        if is_corner(d, r, c) {
            1
        } else {
            symbols.next().expect("payload length checked")
        }
    })
}

/// Inverse of [`pack_unit`]. Fails when a corner is not 1.
pub fn unpack_unit(params: &CodeParams2D, unit: &BitGrid2D) -> Result<Vec<u8>, DecodeError> {
    let d = params.unit;
    if unit.rows() != d || unit.cols() != d {
        return Err(DecodeError::CorruptFragment(format!(
            "unit is {}x{}, expected {d}x{d}",
            unit.rows(),
            unit.cols()
        )));
    }
    unpack_cells(d, unit.cells())
}

fn unpack_cells(d: usize, cells: &[u8]) -> Result<Vec<u8>, DecodeError> {
    let mut payload = Vec::with_capacity(d * d - 4);
    for r in 0..d {
        for c in 0..d {
            let v = cells[r * d + c];
            if is_corner(d, r, c) {
                if v != 1 {
                    return Err(DecodeError::CorruptFragment("unit corner is not set".into()));
                }
            } else {
                payload.push(v);
            }
        }
    }
    Ok(payload)
}

/// Encodes a message of length `k` into an `n x n` codeword.
pub fn encode2d(params: &CodeParams2D, msg: &Message) -> Result<BitGrid2D> {
    let units: Vec<BitGrid2D> = split_message(params, msg)?
        .iter()
        .map(|p| pack_unit(params, p))
        .collect::<Result<_>>()?;
    let d = params.unit;
    BitGrid2D::from_fn(params.n, params.n, params.q, |r, c| {
        match color_unchecked(params.colors, r / d, c / d) {
            0 => 0,
            color => units[color - 1].get(r % d, c % d),
        }
    })
}

/// Lexicographically smallest `(top, left)` of an all-zero `d x d` window.
pub fn find_zero_square(frag: &BitGrid2D, d: usize) -> Result<(usize, usize), DecodeError> {
    if d == 0 || frag.rows() < d || frag.cols() < d {
        return Err(DecodeError::NoZeroSquare(d));
    }
    let prefix = frag.prefix();
    for top in 0..=frag.rows() - d {
        for left in 0..=frag.cols() - d {
            if prefix.rect_sum_unchecked(top, left, d, d) == 0 {
                return Ok((top, left));
            }
        }
    }
    Err(DecodeError::NoZeroSquare(d))
}

/// Cells of every complete `d x d` unit whose grid is anchored at
/// `(row_offset, col_offset)`, in row-major unit order.
pub(crate) fn complete_units(frag: &BitGrid2D, d: usize, row_offset: usize, col_offset: usize) -> Vec<Vec<u8>> {
    let mut units = Vec::new();
    let mut top = row_offset;
    while top + d <= frag.rows() {
        let mut left = col_offset;
        while left + d <= frag.cols() {
            let mut cells = Vec::with_capacity(d * d);
            for r in top..top + d {
                cells.extend_from_slice(&frag.row(r)[left..left + d]);
            }
            units.push(cells);
            left += d;
        }
        top += d;
    }
    units
}

/// Recovers the message from a single legal fragment.
pub fn decode2d(params: &CodeParams2D, frag: &BitGrid2D) -> Result<Message, DecodeError> {
    if !params.is_legal(frag.rows(), frag.cols()) {
        return Err(DecodeError::IllegalFragment(format!(
            "{}x{} fragment needs area >= {} and sides >= {}",
            frag.rows(),
            frag.cols(),
            params.min_area,
            params.min_side
        )));
    }
    if frag.q() != params.q {
        return Err(DecodeError::CorruptFragment(format!(
            "fragment alphabet {} differs from code alphabet {}",
            frag.q(),
            params.q
        )));
    }
    let d = params.unit;
    let (top, left) = find_zero_square(frag, d)?;
    let distinct: BTreeSet<Vec<u8>> = complete_units(frag, d, top % d, left % d).into_iter().collect();
    if distinct.len() < params.colors {
        return Err(DecodeError::IllegalFragment(format!(
            "found {} distinct units, need {}",
            distinct.len(),
            params.colors
        )));
    }
    if distinct.len() > params.colors {
        return Err(DecodeError::CorruptFragment(format!(
            "found {} distinct units, expected {}",
            distinct.len(),
            params.colors
        )));
    }
    let payloads = distinct
        .iter()
        .filter(|cells| cells.iter().any(|&v| v != 0))
        .map(|cells| unpack_cells(d, cells))
        .collect::<Result<Vec<_>, _>>()?;
    join_message(params, payloads.iter().map(Vec::as_slice))
}

/// Unit-grid dimensions `(x, y)` with `x * y = m` such that any `a x b`
/// legal fragment contains a complete `(x + 1) x (y + 1)` grid of units.
pub fn unit_grid_witness(params: &CodeParams2D, a: usize, b: usize) -> Result<(usize, usize)> {
    if !params.is_legal(a, b) {
        return Err(Error::InvalidArgument(format!("{a}x{b} is not a legal fragment")));
    }
    let (d, m) = (params.unit, params.m);
    let (x, y) = if a < 4 * d - 1 {
        (1, m)
    } else if a < (m + 2) * d {
        let mut x = 2;
        while x * 2 <= m && (2 * x + 2) * d - 1 <= a {
            x *= 2;
        }
        (x, m / x)
    } else {
        (m, 1)
    };
    // `x + 1` complete units fit along a side of length `(x + 2)d - 1` at any offset
    if a < (x + 2) * d - 1 || b < (y + 2) * d - 1 {
        return Err(Error::NoWitness(format!(
            "({x}, {y}) unit grid does not fit in {a}x{b}"
        )));
    }
    Ok((x, y))
}
