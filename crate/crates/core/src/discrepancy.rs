//! Bit reversal, Van der Corput and Halton-Hammersley point families, and
//! exact largest-empty-rectangle / largest-empty-box oracles.
//!
//! Points occupy integer cells: a point `(x, y)` blocks the cell
//! `[x, x+1) x [y, y+1)`, and rectangles are half-open cell ranges.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{out_of_range, Error, Result};

/// Per-axis limit of [`largest_empty_rect`].
pub const RECT_ORACLE_MAX_SIDE: usize = 256;
/// Total cell limit of [`largest_empty_box`].
pub const BOX_ORACLE_MAX_CELLS: usize = 1 << 20;

/// Reverses the low `width` bits of `value`.
pub fn bit_reverse(value: u64, width: u32) -> Result<u64> {
    if width > 64 || (width < 64 && value >> width != 0) {
        return Err(out_of_range(
            "bit_reverse input",
            format!("{value} does not fit in {width} bits"),
        ));
    }
    if width == 0 {
        return Ok(0);
    }
    Ok(value.reverse_bits() >> (64 - width))
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|f: &u32| f * f <= p).all(|f| !p.is_multiple_of(f))
}

/// Radical inverse of `value` in base `base`: the base-`base` digits of
/// `value` mirrored behind the radix point, as an exact fraction.
pub fn radical_inverse(value: u64, base: u32) -> Result<Ratio<u128>> {
    if !is_prime(base) {
        return Err(Error::InvalidArgument(format!("radical inverse base {base} is not prime")));
    }
    let base = u128::from(base);
    let (mut rest, mut numer, mut denom) = (u128::from(value), 0u128, 1u128);
    while rest > 0 {
        numer = numer * base + rest % base;
        denom *= base;
        rest /= base;
    }
    Ok(Ratio::new(numer, denom))
}

fn log2_exact(w: usize, what: &'static str) -> Result<u32> {
    if w == 0 || !w.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("{what} must be a power of two, got {w}")));
    }
    Ok(w.trailing_zeros())
}

fn is_power_of_three(mut w: usize) -> bool {
    while w > 1 && w.is_multiple_of(3) {
        w /= 3;
    }
    w == 1
}

/// A set of distinct integer points inside `[0, width) x [0, height)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet2D {
    width: usize,
    height: usize,
    points: BTreeSet<(usize, usize)>,
}

impl PointSet2D {
    pub fn from_points(
        width: usize,
        height: usize,
        points: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (x, y) in points {
            if x >= width || y >= height {
                return Err(out_of_range(
                    "point",
                    format!("({x}, {y}) outside {width}x{height} box"),
                ));
            }
            if !set.insert((x, y)) {
                return Err(Error::InvalidArgument(format!("duplicate point ({x}, {y})")));
            }
        }
        Ok(PointSet2D { width, height, points: set })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.points.contains(&(x, y))
    }

    /// Points in ascending `(x, y)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.points.iter().copied()
    }

    /// Plain-text form: a `bounds W H` line, then one `x y` line per point in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = format!("bounds {} {}\n", self.width, self.height);
        for (x, y) in self.iter() {
            writeln!(out, "{x} {y}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let bounds = parse_numbers(lines.next().unwrap_or(""), "bounds", 2)?;
        let points = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_numbers(l, "", 2).map(|v| (v[0], v[1])))
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(bounds[0], bounds[1], points)
    }
}

/// A set of distinct integer points inside a `dims[0] x dims[1] x dims[2]` box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet3D {
    dims: [usize; 3],
    points: BTreeSet<(usize, usize, usize)>,
}

impl PointSet3D {
    pub fn from_points(
        dims: [usize; 3],
        points: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (x, y, z) in points {
            if x >= dims[0] || y >= dims[1] || z >= dims[2] {
                return Err(out_of_range(
                    "point",
                    format!("({x}, {y}, {z}) outside {dims:?} box"),
                ));
            }
            if !set.insert((x, y, z)) {
                return Err(Error::InvalidArgument(format!("duplicate point ({x}, {y}, {z})")));
            }
        }
        Ok(PointSet3D { dims, points: set })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: usize, y: usize, z: usize) -> bool {
        self.points.contains(&(x, y, z))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.points.iter().copied()
    }

    pub fn to_text(&self) -> String {
        let [x, y, z] = self.dims;
        let mut out = format!("bounds {x} {y} {z}\n");
        for (x, y, z) in self.iter() {
            writeln!(out, "{x} {y} {z}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let bounds = parse_numbers(lines.next().unwrap_or(""), "bounds", 3)?;
        let points = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_numbers(l, "", 3).map(|v| (v[0], v[1], v[2])))
            .collect::<Result<Vec<_>>>()?;
        Self::from_points([bounds[0], bounds[1], bounds[2]], points)
    }
}

fn parse_numbers(line: &str, keyword: &str, count: usize) -> Result<Vec<usize>> {
    let mut tokens = line.split_whitespace();
    if !keyword.is_empty() && tokens.next() != Some(keyword) {
        return Err(Error::Format(format!("expected `{keyword}` line, got {line:?}")));
    }
    let values = tokens
        .map(|t| t.parse::<usize>().map_err(|_| Error::Format(format!("bad number {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != count {
        return Err(Error::Format(format!("expected {count} numbers in {line:?}")));
    }
    Ok(values)
}

/// The `w` Van der Corput set `{(k, bit_reverse(k)) : 0 <= k < w}`.
pub fn vdc_set(w: usize) -> Result<PointSet2D> {
    let bits = log2_exact(w, "Van der Corput size")?;
    let points = (0..w).map(|k| (k, bit_reverse(k as u64, bits).expect("k < w") as usize));
    PointSet2D::from_points(w, w, points)
}

fn shift_vdc(w: usize, y_shift: usize, x_shift: usize) -> Result<PointSet2D> {
    let base = vdc_set(w)?;
    PointSet2D::from_points(w, w, base.iter().map(|(x, y)| ((x + x_shift) % w, (y + y_shift) % w)))
}

/// Van der Corput set cyclically shifted by `y_shift` along y, then `x_shift`
/// along x. Shifts of `w` or more are reduced modulo `w` (logged at warn level).
pub fn vdc_shifted(w: usize, y_shift: usize, x_shift: usize) -> Result<PointSet2D> {
    log2_exact(w, "Van der Corput size")?;
    if y_shift >= w || x_shift >= w {
        log::warn!("vdc shift ({y_shift}, {x_shift}) reduced modulo {w}");
    }
    shift_vdc(w, y_shift % w, x_shift % w)
}

/// Like [`vdc_shifted`] but rejects shifts outside `[0, w)`.
pub fn vdc_shifted_strict(w: usize, y_shift: usize, x_shift: usize) -> Result<PointSet2D> {
    log2_exact(w, "Van der Corput size")?;
    if y_shift >= w || x_shift >= w {
        return Err(out_of_range("shift", format!("({y_shift}, {x_shift}) not below {w}")));
    }
    shift_vdc(w, y_shift, x_shift)
}

/// Copies of the `w` Van der Corput set on every `w x w` tile of a `z x z`
/// box, the whole pattern then shifted cyclically by `y_shift` along y.
pub fn vdc_tiled(w: usize, z: usize, y_shift: usize) -> Result<PointSet2D> {
    let base = vdc_set(w)?;
    if z == 0 || !z.is_multiple_of(w) {
        return Err(Error::InvalidArgument(format!("tiled extent {z} is not a multiple of {w}")));
    }
    if y_shift >= w {
        return Err(out_of_range("shift", format!("{y_shift} not below {w}")));
    }
    let tiles = z / w;
    let points = (0..tiles).flat_map(|tx| {
        let base = &base;
        (0..tiles).flat_map(move |ty| {
            base.iter()
                .map(move |(x, y)| (x + tx * w, (y + ty * w + y_shift) % z))
        })
    });
    PointSet2D::from_points(z, z, points)
}

fn hh_points(w1: usize, w3: usize, floor: bool) -> Result<Vec<(usize, usize, usize)>> {
    log2_exact(w1, "Halton-Hammersley x extent")?;
    if w3 == 0 {
        return Err(Error::InvalidArgument("Halton-Hammersley z extent must be positive".into()));
    }
    let scale = |k: usize, base: u32, w: usize| -> Result<usize> {
        let scaled = radical_inverse(k as u64, base)? * Ratio::from_integer(w as u128);
        if !floor && !scaled.fract().is_zero() {
            return Err(Error::InvalidArgument(format!(
                "{w} * radical_inverse({k}, {base}) = {scaled} is not an integer"
            )));
        }
        Ok(scaled.to_integer() as usize)
    };
    (0..w1)
        .map(|k| Ok((k, scale(k, 2, w1)?, scale(k, 3, w3)?)))
        .collect()
}

/// Scaled Halton-Hammersley set `{(k, w1 * phi_2(k), w3 * phi_3(k)) : k < w1}`.
/// Requires `w3` to be a power of three large enough for integral coordinates.
pub fn hh_set(w1: usize, w3: usize) -> Result<PointSet3D> {
    if !is_power_of_three(w3) {
        return Err(Error::InvalidArgument(format!("{w3} is not a power of three")));
    }
    PointSet3D::from_points([w1, w1, w3], hh_points(w1, w3, false)?)
}

/// Like [`hh_set`] but accepts any positive `w3`, rounding the z coordinate
/// down. Equal to [`hh_set`] whenever the latter succeeds.
pub fn hh_set_floor(w1: usize, w3: usize) -> Result<PointSet3D> {
    PointSet3D::from_points([w1, w1, w3], hh_points(w1, w3, true)?)
}

/// [`hh_set`] cyclically shifted by `y_shift` along y and `z_shift` along z.
pub fn hh_shifted(w1: usize, w3: usize, y_shift: usize, z_shift: usize) -> Result<PointSet3D> {
    let base = hh_set(w1, w3)?;
    if y_shift >= w1 || z_shift >= w3 {
        return Err(out_of_range(
            "shift",
            format!("({y_shift}, {z_shift}) not below ({w1}, {w3})"),
        ));
    }
    PointSet3D::from_points(
        [w1, w1, w3],
        base.iter().map(|(x, y, z)| (x, (y + y_shift) % w1, (z + z_shift) % w3)),
    )
}

/// Copies of [`hh_set`] on every `w1 x w1 x w3` tile of a `v1 x v1 x v2` box,
/// then shifted cyclically by `y_shift` along y and `z_shift` along z.
pub fn hh_tiled(
    w1: usize,
    w3: usize,
    v1: usize,
    v2: usize,
    y_shift: usize,
    z_shift: usize,
) -> Result<PointSet3D> {
    let base = hh_set(w1, w3)?;
    if v1 == 0 || v2 == 0 || !v1.is_multiple_of(w1) || !v2.is_multiple_of(w3) {
        return Err(Error::InvalidArgument(format!(
            "tiled extents ({v1}, {v2}) are not multiples of ({w1}, {w3})"
        )));
    }
    if y_shift >= w1 || z_shift >= w3 {
        return Err(out_of_range(
            "shift",
            format!("({y_shift}, {z_shift}) not below ({w1}, {w3})"),
        ));
    }
    let mut points = Vec::with_capacity((v1 / w1) * (v1 / w1) * (v2 / w3) * w1);
    for tx in 0..v1 / w1 {
        for ty in 0..v1 / w1 {
            for tz in 0..v2 / w3 {
                points.extend(base.iter().map(|(x, y, z)| {
                    (
                        x + tx * w1,
                        (y + ty * w1 + y_shift) % v1,
                        (z + tz * w3 + z_shift) % v2,
                    )
                }));
            }
        }
    }
    PointSet3D::from_points([v1, v1, v2], points)
}

/// Half-open cell rectangle `[x, x+width) x [y, y+height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

/// Half-open cell box starting at `origin` with side lengths `extent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cuboid {
    pub origin: [usize; 3],
    pub extent: [usize; 3],
}

impl Cuboid {
    pub fn volume(&self) -> usize {
        self.extent.iter().product()
    }
}

/// Largest point-free rectangle of a point set, with one maximizing witness
/// (`None` when every cell is occupied).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyRect {
    pub area: usize,
    pub witness: Option<Rect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyBox {
    pub volume: usize,
    pub witness: Option<Cuboid>,
}

/// Largest empty rectangle inside a histogram: returns `(area, left, width, height)`.
fn largest_in_histogram(heights: &[usize], stack: &mut Vec<usize>) -> (usize, usize, usize, usize) {
    let mut best = (0, 0, 0, 0);
    stack.clear();
    for i in 0..=heights.len() {
        let current = heights.get(i).copied().unwrap_or(0);
        while let Some(&top) = stack.last() {
            if heights[top] < current {
                break;
            }
            stack.pop();
            let left = stack.last().map_or(0, |&s| s + 1);
            let area = heights[top] * (i - left);
            if area > best.0 {
                best = (area, left, i - left, heights[top]);
            }
        }
        stack.push(i);
    }
    best
}

/// Largest empty axis-parallel rectangle in a `rows x cols` blocked mask
/// (row-major): `(area, row, col, height, width)`.
fn largest_empty_in_mask(blocked: &[bool], rows: usize, cols: usize) -> (usize, usize, usize, usize, usize) {
    let mut heights = vec![0usize; cols];
    let mut stack = Vec::with_capacity(cols + 1);
    let mut best = (0, 0, 0, 0, 0);
    for r in 0..rows {
        for (c, h) in heights.iter_mut().enumerate() {
            *h = if blocked[r * cols + c] { 0 } else { *h + 1 };
        }
        let (area, left, width, height) = largest_in_histogram(&heights, &mut stack);
        if area > best.0 {
            best = (area, r + 1 - height, left, height, width);
        }
    }
    best
}

/// Exact area of the largest point-free integer rectangle inside the bounding
/// box of `points`. Bounds are limited to [`RECT_ORACLE_MAX_SIDE`] per axis.
pub fn largest_empty_rect(points: &PointSet2D) -> Result<EmptyRect> {
    let (w, h) = (points.width, points.height);
    if w > RECT_ORACLE_MAX_SIDE || h > RECT_ORACLE_MAX_SIDE {
        return Err(Error::OracleLimit(format!(
            "{w}x{h} box exceeds {RECT_ORACLE_MAX_SIDE} per axis"
        )));
    }
    let mut blocked = vec![false; w * h];
    for (x, y) in points.iter() {
        blocked[x * h + y] = true;
    }
    let (area, x, y, width, height) = largest_empty_in_mask(&blocked, w, h);
    Ok(EmptyRect {
        area,
        witness: (area > 0).then_some(Rect { x, y, width, height }),
    })
}

/// Exact volume of the largest point-free integer box inside the bounding box
/// of `points`. The box may hold at most [`BOX_ORACLE_MAX_CELLS`] cells.
pub fn largest_empty_box(points: &PointSet3D) -> Result<EmptyBox> {
    let [dx, dy, dz] = points.dims;
    let cells = dx.checked_mul(dy).and_then(|v| v.checked_mul(dz));
    if cells.is_none_or(|c| c > BOX_ORACLE_MAX_CELLS) {
        return Err(Error::OracleLimit(format!(
            "{dx}x{dy}x{dz} box exceeds {BOX_ORACLE_MAX_CELLS} cells"
        )));
    }
    let plane = dy * dz;
    let mut occupied = vec![false; dx * plane];
    for (x, y, z) in points.iter() {
        occupied[x * plane + y * dz + z] = true;
    }
    let mut best = EmptyBox { volume: 0, witness: None };
    let mut blocked = vec![false; plane];
    for x0 in 0..dx {
        blocked.fill(false);
        for x1 in x0..dx {
            for (b, &o) in blocked.iter_mut().zip(&occupied[x1 * plane..(x1 + 1) * plane]) {
                *b |= o;
            }
            let (area, y, z, ey, ez) = largest_empty_in_mask(&blocked, dy, dz);
            // widening the slab only removes empty cells
            if area == 0 {
                break;
            }
            let volume = area * (x1 - x0 + 1);
            if volume > best.volume {
                best = EmptyBox {
                    volume,
                    witness: Some(Cuboid {
                        origin: [x0, y, z],
                        extent: [x1 - x0 + 1, ey, ez],
                    }),
                };
            }
        }
    }
    Ok(best)
}
