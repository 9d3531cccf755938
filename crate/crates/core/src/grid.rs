//! Dense 2D and 3D symbol arrays with cached prefix sums and a compact file format.
//!
//! 2D grids are stored row-major; 3D grids are stored x-major, then y, then z
//! (`index = (x * dim_y + y) * dim_z + z`). Every other module relies on these
//! linearizations.
//!
//! File layout (fragments use the same format as codewords):
//!
//! ```text
//! FC2D <q> <rows> <cols>\n<payload>
//! FC3D <q> <dim_x> <dim_y> <dim_z>\n<payload>
//! ```
//!
//! For `q = 2` the 2D payload is packed 8 cells per byte, MSB first, each row
//! padded to a byte boundary; the 3D payload is the linearized bit stream
//! packed MSB first and padded once at the end. For `q > 2` every symbol takes
//! one byte. Padding bits must be zero.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{out_of_range, Error, Result};

/// Upper bound on the number of cells a grid file may declare.
pub const MAX_FILE_CELLS: usize = 1 << 32;

fn check_q(q: u8) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!(
            "alphabet size must be at least 2, got {q}"
        )));
    }
    Ok(())
}

fn check_symbols(cells: &[u8], q: u8) -> Result<()> {
    if let Some(pos) = cells.iter().position(|&v| v >= q) {
        return Err(Error::InvalidArgument(format!(
            "cell {pos} holds symbol {} outside alphabet of size {q}",
            cells[pos]
        )));
    }
    Ok(())
}

/// A dense `rows x cols` array of symbols in `[0, q)`.
#[derive(Debug)]
pub struct BitGrid2D {
    rows: usize,
    cols: usize,
    q: u8,
    cells: Vec<u8>,
    prefix: OnceLock<PrefixSum2D>,
}

impl Clone for BitGrid2D {
    fn clone(&self) -> Self {
        BitGrid2D {
            rows: self.rows,
            cols: self.cols,
            q: self.q,
            cells: self.cells.clone(),
            prefix: OnceLock::new(),
        }
    }
}

impl PartialEq for BitGrid2D {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.q == other.q
            && self.cells == other.cells
    }
}

impl Eq for BitGrid2D {}

impl BitGrid2D {
    pub fn from_cells(rows: usize, cols: usize, q: u8, cells: Vec<u8>) -> Result<Self> {
        check_q(q)?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidArgument("grid dimensions overflow".into()))?;
        if cells.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} cells for a {rows}x{cols} grid, got {}",
                cells.len()
            )));
        }
        check_symbols(&cells, q)?;
        Ok(BitGrid2D {
            rows,
            cols,
            q,
            cells,
            prefix: OnceLock::new(),
        })
    }

    pub fn zeros(rows: usize, cols: usize, q: u8) -> Result<Self> {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidArgument("grid dimensions overflow".into()))?;
        Self::from_cells(rows, cols, q, vec![0; len])
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        q: u8,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut cells = Vec::with_capacity(rows.saturating_mul(cols));
        for r in 0..rows {
            for c in 0..cols {
                cells.push(f(r, c));
            }
        }
        Self::from_cells(rows, cols, q, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<u8> {
        self.cells
    }

    /// Cell at `(row, col)`. Panics when out of bounds, like slice indexing.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        assert!(row < self.rows && col < self.cols, "cell ({row}, {col}) outside grid");
        self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    /// Number of nonzero cells.
    pub fn weight(&self) -> usize {
        self.cells.iter().filter(|&&v| v != 0).count()
    }

    fn check_window(&self, top: usize, left: usize, height: usize, width: usize) -> Result<()> {
        let fits = height > 0
            && width > 0
            && top.checked_add(height).is_some_and(|b| b <= self.rows)
            && left.checked_add(width).is_some_and(|r| r <= self.cols);
        if !fits {
            return Err(out_of_range(
                "window",
                format!(
                    "{height}x{width} at ({top}, {left}) does not fit in {}x{} grid",
                    self.rows, self.cols
                ),
            ));
        }
        Ok(())
    }

    /// Copies out a sub-grid. The result carries no record of where it came from.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        self.check_window(top, left, height, width)?;
        let mut cells = Vec::with_capacity(height * width);
        for r in top..top + height {
            let start = r * self.cols + left;
            cells.extend_from_slice(&self.cells[start..start + width]);
        }
        Self::from_cells(height, width, self.q, cells)
    }

    /// Prefix sums of nonzero cells, built on first use.
    pub fn prefix(&self) -> &PrefixSum2D {
        self.prefix.get_or_init(|| PrefixSum2D::new(self))
    }

    /// Number of nonzero cells inside the window.
    pub fn window_weight(&self, top: usize, left: usize, height: usize, width: usize) -> Result<usize> {
        self.prefix().rect_sum(top, left, height, width)
    }

    /// Returns a copy with each listed cell advanced by one modulo `q`
    /// (a bit flip when `q = 2`).
    pub fn toggled(&self, positions: &[(usize, usize)]) -> Result<Self> {
        let mut cells = self.cells.clone();
        for &(r, c) in positions {
            if r >= self.rows || c >= self.cols {
                return Err(out_of_range(
                    "cell",
                    format!("({r}, {c}) outside {}x{} grid", self.rows, self.cols),
                ));
            }
            let v = &mut cells[r * self.cols + c];
            *v = (*v + 1) % self.q;
        }
        Self::from_cells(self.rows, self.cols, self.q, cells)
    }

    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidArgument(format!(
                "cannot compare {}x{} grid with {}x{} grid",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .filter(|(a, b)| a != b)
            .count())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("FC2D {} {} {}\n", self.q, self.rows, self.cols).into_bytes();
        if self.q == 2 {
            for r in 0..self.rows {
                out.extend(pack_bits(self.row(r)));
            }
        } else {
            out.extend_from_slice(&self.cells);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (fields, payload) = parse_header(bytes, "FC2D", 3)?;
        let (q, rows, cols) = (fields[0], fields[1], fields[2]);
        let q = header_q(q)?;
        let total = declared_cells(&[rows, cols])?;
        let cells = if q == 2 {
            let row_bytes = cols.div_ceil(8);
            expect_len(payload.len(), rows * row_bytes)?;
            let mut cells = Vec::with_capacity(total);
            for chunk in payload.chunks(row_bytes) {
                cells.extend(unpack_bits(chunk, cols)?);
            }
            cells
        } else {
            expect_len(payload.len(), total)?;
            payload.to_vec()
        };
        check_payload_symbols(&cells, q)?;
        Self::from_cells(rows, cols, q, cells)
    }
}

/// Inclusive cumulative counts of nonzero cells of a 2D grid.
#[derive(Debug, Clone)]
pub struct PrefixSum2D {
    rows: usize,
    cols: usize,
    // (rows + 1) x (cols + 1), first row and column are zero
    sums: Vec<u32>,
}

impl PrefixSum2D {
    pub fn new(grid: &BitGrid2D) -> Self {
        let (rows, cols) = (grid.rows, grid.cols);
        let stride = cols + 1;
        let mut sums = vec![0u32; (rows + 1) * stride];
        for r in 0..rows {
            let mut run = 0u32;
            for c in 0..cols {
                run += u32::from(grid.cells[r * cols + c] != 0);
                sums[(r + 1) * stride + c + 1] = sums[r * stride + c + 1] + run;
            }
        }
        PrefixSum2D { rows, cols, sums }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Count of nonzero cells in `[top, top+height) x [left, left+width)`.
    pub fn rect_sum(&self, top: usize, left: usize, height: usize, width: usize) -> Result<usize> {
        let fits = top.checked_add(height).is_some_and(|b| b <= self.rows)
            && left.checked_add(width).is_some_and(|r| r <= self.cols);
        if !fits {
            return Err(out_of_range(
                "window",
                format!(
                    "{height}x{width} at ({top}, {left}) does not fit in {}x{} grid",
                    self.rows, self.cols
                ),
            ));
        }
        Ok(self.rect_sum_unchecked(top, left, height, width))
    }

    #[inline]
    pub(crate) fn rect_sum_unchecked(&self, top: usize, left: usize, height: usize, width: usize) -> usize {
        let s = self.cols + 1;
        let (b, r) = (top + height, left + width);
        (self.sums[b * s + r] + self.sums[top * s + left] - self.sums[top * s + r] - self.sums[b * s + left])
            as usize
    }
}

/// A dense `dim_x x dim_y x dim_z` array of symbols in `[0, q)`.
#[derive(Debug)]
pub struct BitGrid3D {
    dims: [usize; 3],
    q: u8,
    cells: Vec<u8>,
    prefix: OnceLock<PrefixSum3D>,
}

impl Clone for BitGrid3D {
    fn clone(&self) -> Self {
        BitGrid3D {
            dims: self.dims,
            q: self.q,
            cells: self.cells.clone(),
            prefix: OnceLock::new(),
        }
    }
}

impl PartialEq for BitGrid3D {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.q == other.q && self.cells == other.cells
    }
}

impl Eq for BitGrid3D {}

impl BitGrid3D {
    pub fn from_cells(dims: [usize; 3], q: u8, cells: Vec<u8>) -> Result<Self> {
        check_q(q)?;
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "grid dimensions must be positive, got {dims:?}"
            )));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidArgument("grid dimensions overflow".into()))?;
        if cells.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} cells for a {dims:?} grid, got {}",
                cells.len()
            )));
        }
        check_symbols(&cells, q)?;
        Ok(BitGrid3D {
            dims,
            q,
            cells,
            prefix: OnceLock::new(),
        })
    }

    pub fn zeros(dims: [usize; 3], q: u8) -> Result<Self> {
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidArgument("grid dimensions overflow".into()))?;
        Self::from_cells(dims, q, vec![0; len])
    }

    pub fn from_fn(dims: [usize; 3], q: u8, mut f: impl FnMut(usize, usize, usize) -> u8) -> Result<Self> {
        let mut cells = Vec::with_capacity(dims.iter().product());
        for x in 0..dims[0] {
            for y in 0..dims[1] {
                for z in 0..dims[2] {
                    cells.push(f(x, y, z));
                }
            }
        }
        Self::from_cells(dims, q, cells)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.dims[1] + y) * self.dims[2] + z
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> u8 {
        assert!(
            x < self.dims[0] && y < self.dims[1] && z < self.dims[2],
            "cell ({x}, {y}, {z}) outside grid"
        );
        self.cells[self.index(x, y, z)]
    }

    pub fn weight(&self) -> usize {
        self.cells.iter().filter(|&&v| v != 0).count()
    }

    fn check_box(&self, origin: [usize; 3], extent: [usize; 3]) -> Result<()> {
        let fits = (0..3).all(|a| {
            extent[a] > 0 && origin[a].checked_add(extent[a]).is_some_and(|e| e <= self.dims[a])
        });
        if !fits {
            return Err(out_of_range(
                "box",
                format!("{extent:?} at {origin:?} does not fit in {:?} grid", self.dims),
            ));
        }
        Ok(())
    }

    pub fn crop(&self, origin: [usize; 3], extent: [usize; 3]) -> Result<Self> {
        self.check_box(origin, extent)?;
        let mut cells = Vec::with_capacity(extent.iter().product());
        for x in origin[0]..origin[0] + extent[0] {
            for y in origin[1]..origin[1] + extent[1] {
                let start = self.index(x, y, origin[2]);
                cells.extend_from_slice(&self.cells[start..start + extent[2]]);
            }
        }
        Self::from_cells(extent, self.q, cells)
    }

    pub fn prefix(&self) -> &PrefixSum3D {
        self.prefix.get_or_init(|| PrefixSum3D::new(self))
    }

    pub fn box_weight(&self, origin: [usize; 3], extent: [usize; 3]) -> Result<usize> {
        self.prefix().box_sum(origin, extent)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let [x, y, z] = self.dims;
        let mut out = format!("FC3D {} {x} {y} {z}\n", self.q).into_bytes();
        if self.q == 2 {
            out.extend(pack_bits(&self.cells));
        } else {
            out.extend_from_slice(&self.cells);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (fields, payload) = parse_header(bytes, "FC3D", 4)?;
        let q = header_q(fields[0])?;
        let dims = [fields[1], fields[2], fields[3]];
        let total = declared_cells(&dims)?;
        let cells = if q == 2 {
            expect_len(payload.len(), total.div_ceil(8))?;
            unpack_bits(payload, total)?
        } else {
            expect_len(payload.len(), total)?;
            payload.to_vec()
        };
        check_payload_symbols(&cells, q)?;
        Self::from_cells(dims, q, cells)
    }
}

/// Inclusive cumulative counts of nonzero cells of a 3D grid.
#[derive(Debug, Clone)]
pub struct PrefixSum3D {
    dims: [usize; 3],
    sums: Vec<u32>,
}

impl PrefixSum3D {
    pub fn new(grid: &BitGrid3D) -> Self {
        let [dx, dy, dz] = grid.dims;
        let (sy, sz) = (dy + 1, dz + 1);
        let at = |x: usize, y: usize, z: usize| (x * sy + y) * sz + z;
        let mut sums = vec![0u32; (dx + 1) * sy * sz];
        for x in 1..=dx {
            for y in 1..=dy {
                for z in 1..=dz {
                    let v = u32::from(grid.cells[grid.index(x - 1, y - 1, z - 1)] != 0);
                    // inclusion-exclusion over the seven lower neighbours
                    sums[at(x, y, z)] = v + sums[at(x - 1, y, z)] + sums[at(x, y - 1, z)] + sums[at(x, y, z - 1)]
                        - sums[at(x - 1, y - 1, z)]
                        - sums[at(x - 1, y, z - 1)]
                        - sums[at(x, y - 1, z - 1)]
                        + sums[at(x - 1, y - 1, z - 1)];
                }
            }
        }
        PrefixSum3D {
            dims: grid.dims,
            sums,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn box_sum(&self, origin: [usize; 3], extent: [usize; 3]) -> Result<usize> {
        let fits = (0..3).all(|a| origin[a].checked_add(extent[a]).is_some_and(|e| e <= self.dims[a]));
        if !fits {
            return Err(out_of_range(
                "box",
                format!("{extent:?} at {origin:?} does not fit in {:?} grid", self.dims),
            ));
        }
        Ok(self.box_sum_unchecked(origin, extent))
    }

    #[inline]
    pub(crate) fn box_sum_unchecked(&self, origin: [usize; 3], extent: [usize; 3]) -> usize {
        let (sy, sz) = (self.dims[1] + 1, self.dims[2] + 1);
        let at = |x: usize, y: usize, z: usize| self.sums[(x * sy + y) * sz + z] as i64;
        let [x0, y0, z0] = origin;
        let (x1, y1, z1) = (x0 + extent[0], y0 + extent[1], z0 + extent[2]);
        (at(x1, y1, z1) - at(x0, y1, z1) - at(x1, y0, z1) - at(x1, y1, z0)
            + at(x0, y0, z1)
            + at(x0, y1, z0)
            + at(x1, y0, z0)
            - at(x0, y0, z0)) as usize
    }
}

/// Either kind of grid, as found in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyGrid {
    TwoD(BitGrid2D),
    ThreeD(BitGrid3D),
}

impl AnyGrid {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(b"FC2D ") {
            BitGrid2D::from_bytes(bytes).map(AnyGrid::TwoD)
        } else if bytes.starts_with(b"FC3D ") {
            BitGrid3D::from_bytes(bytes).map(AnyGrid::ThreeD)
        } else {
            Err(Error::Format("unknown magic, expected FC2D or FC3D".into()))
        }
    }
}

pub fn write_grid2d(path: impl AsRef<Path>, grid: &BitGrid2D) -> Result<()> {
    fs::write(path, grid.to_bytes())?;
    Ok(())
}

pub fn read_grid2d(path: impl AsRef<Path>) -> Result<BitGrid2D> {
    BitGrid2D::from_bytes(&fs::read(path)?)
}

pub fn write_grid3d(path: impl AsRef<Path>, grid: &BitGrid3D) -> Result<()> {
    fs::write(path, grid.to_bytes())?;
    Ok(())
}

pub fn read_grid3d(path: impl AsRef<Path>) -> Result<BitGrid3D> {
    BitGrid3D::from_bytes(&fs::read(path)?)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<AnyGrid> {
    AnyGrid::from_bytes(&fs::read(path)?)
}

fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)))
        })
        .collect()
}

fn unpack_bits(bytes: &[u8], count: usize) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(count);
    for (i, &byte) in bytes.iter().enumerate() {
        for j in 0..8 {
            let bit = (byte >> (7 - j)) & 1;
            if i * 8 + j < count {
                bits.push(bit);
            } else if bit != 0 {
                return Err(Error::Format("nonzero padding bit".into()));
            }
        }
    }
    Ok(bits)
}

fn parse_header<'a>(bytes: &'a [u8], magic: &str, n_fields: usize) -> Result<(Vec<usize>, &'a [u8])> {
    let nl = bytes
        .iter()
        .take(256)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let line = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::Format("header is not ASCII".into()))?;
    let mut tokens = line.split(' ');
    if tokens.next() != Some(magic) {
        return Err(Error::Format(format!("expected magic {magic}")));
    }
    let fields = tokens
        .map(|t| {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Format(format!("bad header field {t:?}")));
            }
            t.parse::<usize>()
                .map_err(|_| Error::Format(format!("dimension overflow in header field {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if fields.len() != n_fields {
        return Err(Error::Format(format!(
            "expected {n_fields} header fields after {magic}, got {}",
            fields.len()
        )));
    }
    Ok((fields, &bytes[nl + 1..]))
}

fn header_q(q: usize) -> Result<u8> {
    match u8::try_from(q) {
        Ok(q) if q >= 2 => Ok(q),
        _ => Err(Error::Format(format!("alphabet size {q} outside [2, 255]"))),
    }
}

fn declared_cells(dims: &[usize]) -> Result<usize> {
    if dims.contains(&0) {
        return Err(Error::Format(format!("degenerate dimensions {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= MAX_FILE_CELLS)
        .ok_or_else(|| Error::Format(format!("dimension overflow: {dims:?}")))
}

fn expect_len(got: usize, want: usize) -> Result<()> {
    match got.cmp(&want) {
        std::cmp::Ordering::Less => Err(Error::Format(format!(
            "truncated payload: {got} of {want} bytes"
        ))),
        std::cmp::Ordering::Greater => Err(Error::Format(format!(
            "{} trailing bytes after payload",
            got - want
        ))),
        std::cmp::Ordering::Equal => Ok(()),
    }
}

fn check_payload_symbols(cells: &[u8], q: u8) -> Result<()> {
    check_symbols(cells, q).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rng: &mut ChaCha8Rng, rows: usize, cols: usize, q: u8) -> BitGrid2D {
        BitGrid2D::from_fn(rows, cols, q, |_, _| rng.gen_range(0..q)).unwrap()
    }

    #[test]
    fn crop_full_extent_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_grid(&mut rng, 5, 7, 2);
        assert_eq!(g.crop(0, 0, 5, 7).unwrap(), g);
    }

    #[test]
    fn crop_single_cell() {
        let g = BitGrid2D::from_cells(2, 2, 2, vec![1, 0, 0, 0]).unwrap();
        assert_eq!(g.crop(0, 0, 1, 1).unwrap().cells(), &[1]);
    }

    #[test]
    fn crop_identity_pattern_lower_right() {
        let g = BitGrid2D::from_fn(3, 3, 2, |r, c| u8::from(r == c)).unwrap();
        let sub = g.crop(1, 1, 2, 2).unwrap();
        assert_eq!(sub.cells(), &[1, 0, 0, 1]);
    }

    #[test]
    fn crop_out_of_bounds_rejected() {
        let g = BitGrid2D::zeros(4, 4, 2).unwrap();
        assert!(matches!(g.crop(3, 0, 2, 1), Err(Error::OutOfRange { .. })));
        assert!(matches!(g.crop(0, 0, 0, 1), Err(Error::OutOfRange { .. })));
        assert!(g.crop(usize::MAX, 0, 2, 1).is_err());
    }

    #[test]
    fn window_weight_basics() {
        let z = BitGrid2D::zeros(6, 6, 2).unwrap();
        assert_eq!(z.window_weight(1, 2, 3, 3).unwrap(), 0);
        let ones = BitGrid2D::from_fn(4, 4, 2, |_, _| 1).unwrap();
        assert_eq!(ones.window_weight(1, 1, 2, 2).unwrap(), 4);
        assert!(ones.window_weight(3, 3, 2, 2).is_err());
    }

    #[test]
    fn window_weight_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_grid(&mut rng, 8, 8, 2);
        for top in 0..=5 {
            for left in 0..=5 {
                let naive = (top..top + 3)
                    .flat_map(|r| (left..left + 3).map(move |c| (r, c)))
                    .filter(|&(r, c)| g.get(r, c) != 0)
                    .count();
                assert_eq!(g.window_weight(top, left, 3, 3).unwrap(), naive);
            }
        }
    }

    #[test]
    fn file_size_for_24x24_codeword() {
        let g = BitGrid2D::zeros(24, 24, 2).unwrap();
        let header = "FC2D 2 24 24\n".len();
        assert_eq!(g.to_bytes().len(), header + (24 * 24usize).div_ceil(8));
    }

    #[test]
    fn packed_rows_are_msb_first_and_padded() {
        let g = BitGrid2D::from_cells(2, 3, 2, vec![1, 0, 1, 0, 1, 1]).unwrap();
        let bytes = g.to_bytes();
        assert_eq!(&bytes[b"FC2D 2 2 3\n".len()..], &[0b1010_0000, 0b0110_0000]);
    }

    #[test]
    fn degenerate_and_malformed_headers_rejected() {
        assert!(matches!(BitGrid2D::from_bytes(b"FC2D 2 0 4\n"), Err(Error::Format(_))));
        assert!(matches!(BitGrid2D::from_bytes(b"FC2D 1 1 1\n\x00"), Err(Error::Format(_))));
        assert!(matches!(BitGrid2D::from_bytes(b"FC2X 2 1 1\n\x00"), Err(Error::Format(_))));
        assert!(matches!(BitGrid2D::from_bytes(b"FC2D 2 1\n\x00"), Err(Error::Format(_))));
        assert!(matches!(BitGrid2D::from_bytes(b"FC2D 2 -1 1\n\x00"), Err(Error::Format(_))));
        assert!(matches!(
            BitGrid2D::from_bytes(b"FC2D 2 99999999999999999999 1\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            BitGrid2D::from_bytes(b"FC2D 2 4294967296 4294967296\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(BitGrid3D::from_bytes(b"FC3D 2 1 0 1\n"), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_and_trailing_payload_rejected() {
        let bytes = BitGrid2D::zeros(4, 9, 2).unwrap().to_bytes();
        let err = BitGrid2D::from_bytes(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(err.to_string().contains("truncated"));
        let mut long = bytes.clone();
        long.push(0);
        assert!(BitGrid2D::from_bytes(&long).is_err());
    }

    #[test]
    fn nonzero_padding_and_bad_symbols_rejected() {
        assert!(BitGrid2D::from_bytes(b"FC2D 2 1 3\n\x01").is_err());
        assert!(BitGrid2D::from_bytes(b"FC2D 3 1 2\n\x00\x03").is_err());
    }

    #[test]
    fn prefix3d_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = BitGrid3D::from_fn([5, 4, 6], 2, |_, _, _| rng.gen_range(0..2)).unwrap();
        for x0 in 0..5 {
            for y0 in 0..4 {
                for z0 in 0..6 {
                    let ext = [5 - x0, (4 - y0).min(2), (6 - z0).min(3)];
                    let mut naive = 0;
                    for x in x0..x0 + ext[0] {
                        for y in y0..y0 + ext[1] {
                            for z in z0..z0 + ext[2] {
                                naive += usize::from(g.get(x, y, z) != 0);
                            }
                        }
                    }
                    assert_eq!(g.box_weight([x0, y0, z0], ext).unwrap(), naive);
                }
            }
        }
    }

    #[test]
    fn crop3d_picks_the_right_cells() {
        let g = BitGrid3D::from_fn([3, 3, 3], 4, |x, y, z| ((x + 2 * y + 3 * z) % 4) as u8).unwrap();
        let c = g.crop([1, 0, 2], [2, 3, 1]).unwrap();
        assert_eq!(c.dims(), [2, 3, 1]);
        for x in 0..2 {
            for y in 0..3 {
                assert_eq!(c.get(x, y, 0), g.get(x + 1, y, 2));
            }
        }
        assert!(g.crop([2, 0, 0], [2, 1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn window_weight_equals_naive(
            rows in 1usize..12, cols in 1usize..12, seed in any::<u64>(),
            t in 0usize..12, l in 0usize..12, h in 1usize..12, w in 1usize..12,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, rows, cols, 3);
            let got = g.window_weight(t, l, h, w);
            if t + h <= rows && l + w <= cols {
                let naive = (t..t + h)
                    .flat_map(|r| (l..l + w).map(move |c| (r, c)))
                    .filter(|&(r, c)| g.get(r, c) != 0)
                    .count();
                prop_assert_eq!(got.unwrap(), naive);
            } else {
                prop_assert!(got.is_err());
            }
        }

        #[test]
        fn crop_composes(
            seed in any::<u64>(),
            (t1, l1, h1, w1) in (0usize..4, 0usize..4, 1usize..7, 1usize..7),
            (t2, l2, h2, w2) in (0usize..4, 0usize..4, 1usize..4, 1usize..4),
        ) {
            prop_assume!(t2 + h2 <= h1 && l2 + w2 <= w1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, 10, 10, 2);
            let twice = g.crop(t1, l1, h1, w1).unwrap().crop(t2, l2, h2, w2).unwrap();
            prop_assert_eq!(twice, g.crop(t1 + t2, l1 + l2, h2, w2).unwrap());
        }

        #[test]
        fn file_roundtrip_2d(rows in 1usize..20, cols in 1usize..20, q in 2u8..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_grid(&mut rng, rows, cols, q);
            prop_assert_eq!(BitGrid2D::from_bytes(&g.to_bytes()).unwrap(), g);
        }

        #[test]
        fn file_roundtrip_3d(x in 1usize..7, y in 1usize..7, z in 1usize..7, q in 2u8..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = BitGrid3D::from_fn([x, y, z], q, |_, _, _| rng.gen_range(0..q)).unwrap();
            prop_assert_eq!(BitGrid3D::from_bytes(&g.to_bytes()).unwrap(), g.clone());
            prop_assert_eq!(AnyGrid::from_bytes(&g.to_bytes()).unwrap(), AnyGrid::ThreeD(g));
        }
    }

    #[test]
    fn file_roundtrip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let g = BitGrid2D::from_fn(9, 13, 2, |r, c| ((r * c) % 2) as u8).unwrap();
        let p = dir.path().join("g.fc2d");
        write_grid2d(&p, &g).unwrap();
        assert_eq!(read_grid2d(&p).unwrap(), g);
        assert_eq!(read_grid(&p).unwrap(), AnyGrid::TwoD(g));
    }
}
