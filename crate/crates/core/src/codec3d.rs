//! Forensic code over `n x n x n'` cuboids. Units are `d x d x d` cubes
//! colored by shifted Halton-Hammersley sets with `ab/24` colors; color-0
//! cubes are all zero, every other cube carries an indexed message part with
//! its eight corners set to 1.

use std::collections::BTreeSet;

use num_rational::Ratio;

use crate::codec2d::unit_side_for;
use crate::discrepancy::radical_inverse;
use crate::error::{infeasible, out_of_range, DecodeError, Error, Result};
use crate::grid::BitGrid3D;
use crate::message::{index_width, IndexedLayout, Message};

/// Smallest `e` with `3^e >= 2^c`.
pub fn ceil_log3_pow2(c: u32) -> u32 {
    let target = 1u128 << c;
    let mut e = 0;
    let mut power = 1u128;
    while power < target {
        power *= 3;
        e += 1;
    }
    e
}

/// Derived parameters of the 3D code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams3D {
    pub q: u8,
    /// Extent along x and y.
    pub n: usize,
    /// Extent along z.
    pub n_prime: usize,
    pub min_volume: usize,
    pub min_side: usize,
    /// Unit side `d`.
    pub unit: usize,
    /// Dyadic exponent `c`, with `a = 2^c`.
    pub exponent: u32,
    pub a: usize,
    /// Smallest power of three not below `a`.
    pub b: usize,
    /// Number of colors `ab/24`.
    pub colors: usize,
    /// Payload symbols per unit, `d^3 - 8`.
    pub payload_len: usize,
    pub index_width: usize,
    pub message_len: usize,
}

impl CodeParams3D {
    /// Derives the largest `d` and then the largest `c` admitted by `(M, h)`.
    /// Extents default to `n = a d` and `n' = b d`.
    pub fn derive(
        q: u8,
        min_volume: usize,
        min_side: usize,
        n: Option<usize>,
        n_prime: Option<usize>,
    ) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size must be at least 2, got {q}")));
        }
        if min_volume < 1 || min_side < 2 {
            return Err(Error::InvalidArgument(format!(
                "need M >= 1 and h >= 2, got M={min_volume}, h={min_side}"
            )));
        }
        let d = unit_side_for(min_side);
        if d < 3 {
            return Err(infeasible("d >= 3", format!("h={min_side} gives d={d}")));
        }
        let need = |c: u32| -> Option<u128> {
            let ab = (1u128 << c) * 3u128.pow(ceil_log3_pow2(c));
            let d = d as u128;
            let side = (3 * d - 1).checked_pow(2)?;
            side.checked_mul((ab + 1).checked_mul(d)?.checked_add(d - 1)?)
        };
        let mut exponent = None;
        for c in 0..40 {
            match need(c) {
                Some(v) if v <= min_volume as u128 => exponent = Some(c),
                _ => break,
            }
        }
        let exponent = match exponent {
            Some(c) if c >= 3 => c,
            other => {
                return Err(infeasible(
                    "c >= 3",
                    format!("M={min_volume} with d={d} allows c={other:?}"),
                ))
            }
        };
        let a = 1usize << exponent;
        let b = 3usize.pow(ceil_log3_pow2(exponent));
        let colors = (a / 8) * (b / 3);
        let n = n.unwrap_or(a * d);
        let n_prime = n_prime.unwrap_or(b * d);
        if n == 0 || n_prime == 0 || !n.is_multiple_of(a * d) || !n_prime.is_multiple_of(b * d) {
            return Err(infeasible(
                "ad | n and bd | n'",
                format!("n={n}, n'={n_prime}, a={a}, b={b}, d={d}"),
            ));
        }
        let payload_len = d * d * d - 8;
        let width = index_width(colors - 1, q);
        if payload_len <= width {
            return Err(infeasible(
                "k >= 1",
                format!("unit payload {payload_len} cannot hold a {width}-symbol index"),
            ));
        }
        Ok(CodeParams3D {
            q,
            n,
            n_prime,
            min_volume,
            min_side,
            unit: d,
            exponent,
            a,
            b,
            colors,
            payload_len,
            index_width: width,
            message_len: (colors - 1) * (payload_len - width),
        })
    }

    /// Unit counts along x, y and z.
    pub fn unit_dims(&self) -> [usize; 3] {
        [self.n / self.unit, self.n / self.unit, self.n_prime / self.unit]
    }

    /// Side lengths `(a/8, b/3)` of the small coloring grid.
    pub fn small_grid(&self) -> (usize, usize) {
        (self.a / 8, self.b / 3)
    }

    pub(crate) fn layout(&self) -> IndexedLayout {
        IndexedLayout {
            q: self.q,
            parts: self.colors - 1,
            segment_len: self.payload_len - self.index_width,
            width: self.index_width,
        }
    }

    pub fn is_legal(&self, dims: [usize; 3]) -> bool {
        let volume = dims.iter().try_fold(1usize, |acc, &v| acc.checked_mul(v));
        volume.is_none_or(|v| v >= self.min_volume) && dims.iter().all(|&v| v >= self.min_side)
    }
}

pub fn derive_params_3d(
    q: u8,
    min_volume: usize,
    min_side: usize,
    n: Option<usize>,
    n_prime: Option<usize>,
) -> Result<CodeParams3D> {
    CodeParams3D::derive(q, min_volume, min_side, n, n_prime)
}

/// Per-residue coordinates `(w1 phi_2(x), w3 phi_3(x))` of the unshifted small set.
struct Coloring {
    w1: usize,
    w3: usize,
    offsets: Vec<(usize, usize)>,
}

impl Coloring {
    fn new(params: &CodeParams3D) -> Self {
        let (w1, w3) = params.small_grid();
        let scaled = |k: usize, base: u32, w: usize| -> usize {
            let v = radical_inverse(k as u64, base).expect("prime base") * Ratio::from_integer(w as u128);
            debug_assert!(v.is_integer());
            v.to_integer() as usize
        };
        let offsets = (0..w1).map(|k| (scaled(k, 2, w1), scaled(k, 3, w3))).collect();
        Coloring { w1, w3, offsets }
    }

    fn color(&self, i: usize, j: usize, l: usize) -> usize {
        let (y0, z0) = self.offsets[i % self.w1];
        let d1 = (j % self.w1 + self.w1 - y0) % self.w1;
        let d2 = (l % self.w3 + self.w3 - z0) % self.w3;
        d1 * self.w3 + d2
    }
}

/// Color of unit `(i, j, l)`: `d1 * (b/3) + d2` for the shift `(d1, d2)`
/// whose small Halton-Hammersley set holds the unit's residue.
pub fn color3d(params: &CodeParams3D, i: usize, j: usize, l: usize) -> Result<usize> {
    let [ux, uy, uz] = params.unit_dims();
    if i >= ux || j >= uy || l >= uz {
        return Err(out_of_range(
            "unit",
            format!("({i}, {j}, {l}) outside {ux}x{uy}x{uz} unit grid"),
        ));
    }
    Ok(Coloring::new(params).color(i, j, l))
}

fn is_corner(d: usize, x: usize, y: usize, z: usize) -> bool {
    [x, y, z].iter().all(|&v| v == 0 || v == d - 1)
}

/// Places a payload in a `d x d x d` unit: the eight corners set to 1, the
/// payload in `(x, y, z)` order over the remaining cells.
pub fn pack_unit3d(params: &CodeParams3D, payload: &[u8]) -> Result<BitGrid3D> {
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
    BitGrid3D::from_fn([d, d, d], params.q, |x, y, z| {
        if is_corner(d, x, y, z) {
            1
        } else {
            symbols.next().expect("payload length checked")
        }
    })
}

pub fn unpack_unit3d(params: &CodeParams3D, unit: &BitGrid3D) -> Result<Vec<u8>, DecodeError> {
    let d = params.unit;
    if unit.dims() != [d, d, d] {
        return Err(DecodeError::CorruptFragment(format!(
            "unit is {:?}, expected a cube of side {d}",
            unit.dims()
        )));
    }
    unpack_cells(d, unit.cells())
}

fn unpack_cells(d: usize, cells: &[u8]) -> Result<Vec<u8>, DecodeError> {
    let mut payload = Vec::with_capacity(d * d * d - 8);
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                let v = cells[(x * d + y) * d + z];
                if is_corner(d, x, y, z) {
                    if v != 1 {
                        return Err(DecodeError::CorruptFragment("unit corner is not set".into()));
                    }
                } else {
                    payload.push(v);
                }
            }
        }
    }
    Ok(payload)
}

pub fn split_message_3d(params: &CodeParams3D, msg: &Message) -> Result<Vec<Vec<u8>>> {
    params.layout().split(msg)
}

pub fn encode3d(params: &CodeParams3D, msg: &Message) -> Result<BitGrid3D> {
    let units: Vec<BitGrid3D> = split_message_3d(params, msg)?
        .iter()
        .map(|p| pack_unit3d(params, p))
        .collect::<Result<_>>()?;
    let coloring = Coloring::new(params);
    let d = params.unit;
    BitGrid3D::from_fn([params.n, params.n, params.n_prime], params.q, |x, y, z| {
        match coloring.color(x / d, y / d, z / d) {
            0 => 0,
            c => units[c - 1].get(x % d, y % d, z % d),
        }
    })
}

/// Lexicographically smallest origin of an all-zero `d x d x d` window.
pub fn find_zero_cube(frag: &BitGrid3D, d: usize) -> Result<[usize; 3], DecodeError> {
    let dims = frag.dims();
    if d == 0 || dims.iter().any(|&v| v < d) {
        return Err(DecodeError::NoZeroSquare(d));
    }
    let prefix = frag.prefix();
    for x in 0..=dims[0] - d {
        for y in 0..=dims[1] - d {
            for z in 0..=dims[2] - d {
                if prefix.box_sum_unchecked([x, y, z], [d, d, d]) == 0 {
                    return Ok([x, y, z]);
                }
            }
        }
    }
    Err(DecodeError::NoZeroSquare(d))
}

fn complete_units(frag: &BitGrid3D, d: usize, offset: [usize; 3]) -> Vec<Vec<u8>> {
    let dims = frag.dims();
    let starts = |axis: usize| (offset[axis]..).step_by(d).take_while(move |s| s + d <= dims[axis]);
    let mut units = Vec::new();
    for x0 in starts(0) {
        for y0 in starts(1) {
            for z0 in starts(2) {
                let mut cells = Vec::with_capacity(d * d * d);
                for x in x0..x0 + d {
                    for y in y0..y0 + d {
                        let start = (x * dims[1] + y) * dims[2] + z0;
                        cells.extend_from_slice(&frag.cells()[start..start + d]);
                    }
                }
                units.push(cells);
            }
        }
    }
    units
}

pub fn decode3d(params: &CodeParams3D, frag: &BitGrid3D) -> Result<Message, DecodeError> {
    if !params.is_legal(frag.dims()) {
        return Err(DecodeError::IllegalFragment(format!(
            "{:?} fragment needs volume >= {} and sides >= {}",
            frag.dims(),
            params.min_volume,
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
    let origin = find_zero_cube(frag, d)?;
    let offset = origin.map(|v| v % d);
    let (w1, _) = params.small_grid();
    if w1 > 1 {
        return decode_at(params, frag, offset);
    }
    // With a single-column small grid the color depends only on the z unit
    // index, so zero units fill whole xy planes and a zero cube fixes only
    // the z offset. Try every xy offset and require all valid ones to agree.
    let mut found: Option<Message> = None;
    let mut last_err = None;
    for ox in 0..d {
        for oy in 0..d {
            match decode_at(params, frag, [ox, oy, offset[2]]) {
                Ok(msg) => match &found {
                    Some(prev) if *prev != msg => {
                        return Err(DecodeError::CorruptFragment("ambiguous unit alignment".into()));
                    }
                    _ => found = Some(msg),
                },
                Err(e) => last_err = Some(e),
            }
        }
    }
    found.ok_or_else(|| last_err.unwrap_or(DecodeError::NoZeroSquare(d)))
}

fn decode_at(params: &CodeParams3D, frag: &BitGrid3D, offset: [usize; 3]) -> Result<Message, DecodeError> {
    let d = params.unit;
    let distinct: BTreeSet<Vec<u8>> = complete_units(frag, d, offset).into_iter().collect();
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
    params.layout().join(payloads.iter().map(Vec::as_slice))
}

/// Unit-grid dimensions `(x, y, z)` with `xyz = ab` such that an
/// `alpha x beta x gamma` fragment contains a complete `(x+1) x (y+1) x (z+1)`
/// grid of units. Searches divisor triples of `ab`; fails with
/// [`Error::NoWitness`] when none fits.
pub fn unit_grid_witness_3d(
    params: &CodeParams3D,
    alpha: usize,
    beta: usize,
    gamma: usize,
) -> Result<(usize, usize, usize)> {
    if !params.is_legal([alpha, beta, gamma]) {
        return Err(Error::InvalidArgument(format!(
            "{alpha}x{beta}x{gamma} is not a legal fragment"
        )));
    }
    let d = params.unit;
    let ab = params.a * params.b;
    let fits = |units: usize, side: usize| (units + 2) * d - 1 <= side;
    for x in (1..=ab).filter(|x| ab.is_multiple_of(*x)) {
        if !fits(x, alpha) {
            break;
        }
        let rest = ab / x;
        for y in (1..=rest).filter(|y| rest.is_multiple_of(*y)) {
            if !fits(y, beta) {
                break;
            }
            if fits(rest / y, gamma) {
                return Ok((x, y, rest / y));
            }
        }
    }
    Err(Error::NoWitness(format!(
        "no divisor triple of {ab} fits in {alpha}x{beta}x{gamma} with d={d}"
    )))
}
