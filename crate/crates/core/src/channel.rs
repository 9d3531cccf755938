//! Adversarial channel: breaking codewords into pieces, picking a legal
//! fragment, and injecting a bounded number of symbol flips.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{out_of_range, Error, Result};
use crate::grid::BitGrid2D;

pub fn is_legal_2d(a: usize, b: usize, min_area: usize, min_side: usize) -> bool {
    a.saturating_mul(b) >= min_area && a.min(b) >= min_side
}

pub fn is_legal_3d(alpha: usize, beta: usize, gamma: usize, min_volume: usize, min_side: usize) -> bool {
    alpha.saturating_mul(beta).saturating_mul(gamma) >= min_volume && alpha.min(beta).min(gamma) >= min_side
}

/// Axis-parallel rectangle of cells within a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CropRect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl CropRect {
    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.top && row < self.top + self.height && col >= self.left && col < self.left + self.width
    }

    pub fn apply(&self, grid: &BitGrid2D) -> Result<BitGrid2D> {
        grid.crop(self.top, self.left, self.height, self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FragmentMode {
    /// Repeated straight cuts through randomly chosen pieces.
    Guillotine,
    /// A single given crop, handed over unchanged.
    FixedCrop(CropRect),
    /// A seeded pick among the legal crops of minimum area.
    WorstCaseEnumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FragmentationPlan {
    pub seed: u64,
    pub mode: FragmentMode,
    pub max_cuts: usize,
}

/// Result of breaking a codeword: where every piece lies, and the one legal
/// fragment passed on to the decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragmentation {
    pub pieces: Vec<CropRect>,
    pub selected_region: CropRect,
    pub selected: BitGrid2D,
}

/// Splits a `rows x cols` rectangle with up to `max_cuts` guillotine cuts.
/// The pieces tile the rectangle exactly.
pub fn guillotine_pieces(rows: usize, cols: usize, max_cuts: usize, rng: &mut impl Rng) -> Vec<CropRect> {
    let mut pieces = vec![CropRect { top: 0, left: 0, height: rows, width: cols }];
    for _ in 0..max_cuts {
        let splittable: Vec<usize> = (0..pieces.len())
            .filter(|&i| pieces[i].height > 1 || pieces[i].width > 1)
            .collect();
        let Some(&chosen) = splittable.choose(rng) else {
            break;
        };
        let piece = pieces[chosen];
        let horizontal = match (piece.height > 1, piece.width > 1) {
            (true, true) => rng.gen_bool(0.5),
            (tall, _) => tall,
        };
        let (first, second) = if horizontal {
            let at = rng.gen_range(1..piece.height);
            (
                CropRect { height: at, ..piece },
                CropRect { top: piece.top + at, height: piece.height - at, ..piece },
            )
        } else {
            let at = rng.gen_range(1..piece.width);
            (
                CropRect { width: at, ..piece },
                CropRect { left: piece.left + at, width: piece.width - at, ..piece },
            )
        };
        pieces[chosen] = first;
        pieces.push(second);
    }
    pieces
}

/// Breaks `grid` according to `plan` and selects one legal fragment. The
/// selected grid carries no position information.
pub fn fragment(
    grid: &BitGrid2D,
    plan: &FragmentationPlan,
    min_area: usize,
    min_side: usize,
) -> Result<Fragmentation> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let (pieces, selected_region) = match plan.mode {
        FragmentMode::FixedCrop(rect) => (vec![rect], rect),
        FragmentMode::Guillotine => {
            let pieces = guillotine_pieces(grid.rows(), grid.cols(), plan.max_cuts, &mut rng);
            let legal: Vec<CropRect> = pieces
                .iter()
                .copied()
                .filter(|p| is_legal_2d(p.height, p.width, min_area, min_side))
                .collect();
            let chosen = *legal.choose(&mut rng).ok_or_else(|| {
                Error::NoLegalFragment(format!(
                    "none of {} pieces has area >= {min_area} and sides >= {min_side}",
                    pieces.len()
                ))
            })?;
            (pieces, chosen)
        }
        FragmentMode::WorstCaseEnumeration => {
            let mut smallest: Vec<CropRect> = Vec::new();
            for crop in enumerate_legal_crops_in(grid.rows(), grid.cols(), min_area, min_side) {
                match smallest.first().map(|s| crop.area().cmp(&s.area())) {
                    Some(std::cmp::Ordering::Greater) => {}
                    Some(std::cmp::Ordering::Equal) => smallest.push(crop),
                    _ => smallest = vec![crop],
                }
            }
            let chosen = *smallest.choose(&mut rng).ok_or_else(|| {
                Error::NoLegalFragment(format!(
                    "{}x{} grid has no crop with area >= {min_area} and sides >= {min_side}",
                    grid.rows(),
                    grid.cols()
                ))
            })?;
            (vec![chosen], chosen)
        }
    };
    let selected = selected_region.apply(grid)?;
    Ok(Fragmentation {
        pieces,
        selected_region,
        selected,
    })
}

/// Every legal crop of an `n x n` grid, ordered by `(top, left, height, width)`.
pub fn enumerate_legal_crops(n: usize, min_area: usize, min_side: usize) -> impl Iterator<Item = CropRect> {
    enumerate_legal_crops_in(n, n, min_area, min_side)
}

/// Every legal crop of a `rows x cols` grid, ordered by `(top, left, height, width)`.
pub fn enumerate_legal_crops_in(
    rows: usize,
    cols: usize,
    min_area: usize,
    min_side: usize,
) -> impl Iterator<Item = CropRect> {
    let side = min_side.max(1);
    (0..rows).flat_map(move |top| {
        (0..cols).flat_map(move |left| {
            (side..=rows - top).flat_map(move |height| {
                (side..=cols - left)
                    .filter(move |&width| height * width >= min_area)
                    .map(move |width| CropRect { top, left, height, width })
            })
        })
    })
}

/// `count` legal crops of a `rows x cols` grid drawn with a seeded generator:
/// legal extents uniformly, then a uniform position.
pub fn sample_legal_crops(
    rows: usize,
    cols: usize,
    min_area: usize,
    min_side: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<CropRect>> {
    let extents: Vec<(usize, usize)> = (min_side.max(1)..=rows)
        .flat_map(|h| (min_side.max(1)..=cols).map(move |w| (h, w)))
        .filter(|&(h, w)| h * w >= min_area)
        .collect();
    if extents.is_empty() {
        return Err(Error::NoLegalFragment(format!("{rows}x{cols} grid has no legal crop")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let (height, width) = *extents.choose(&mut rng).expect("nonempty");
            CropRect {
                top: rng.gen_range(0..=rows - height),
                left: rng.gen_range(0..=cols - width),
                height,
                width,
            }
        })
        .collect())
}

/// `count` legal boxes `(origin, extent)` inside a cuboid of the given dims,
/// drawn like [`sample_legal_crops`].
pub fn sample_legal_boxes(
    dims: [usize; 3],
    min_volume: usize,
    min_side: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<([usize; 3], [usize; 3])>> {
    let side = min_side.max(1);
    let mut extents = Vec::new();
    for ex in side..=dims[0] {
        for ey in side..=dims[1] {
            for ez in side..=dims[2] {
                if ex * ey * ez >= min_volume {
                    extents.push([ex, ey, ez]);
                }
            }
        }
    }
    if extents.is_empty() {
        return Err(Error::NoLegalFragment(format!("{dims:?} cuboid has no legal box")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let extent = *extents.choose(&mut rng).expect("nonempty");
            let origin = [0, 1, 2].map(|a| rng.gen_range(0..=dims[a] - extent[a]));
            (origin, extent)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipStrategy {
    /// Uniformly random distinct cells.
    Random,
    /// Cells of one all-zero unit of side `unit` (unit-aligned in the grid).
    ConcentrateOnZeroUnit { unit: usize },
    /// Border cells of one nonzero unit of side `unit`.
    ConcentrateOnBorders { unit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipBudget {
    pub delta: usize,
    pub strategy: FlipStrategy,
    pub seed: u64,
    /// Restricts flips to this rectangle (whole grid when `None`).
    pub region: Option<CropRect>,
}

/// Aligned units of side `d` lying fully inside `region`, split by whether they are all zero.
fn aligned_units(grid: &BitGrid2D, d: usize, region: CropRect) -> (Vec<CropRect>, Vec<CropRect>) {
    let (mut zero, mut nonzero) = (Vec::new(), Vec::new());
    let first = |start: usize| start.div_ceil(d) * d;
    let mut top = first(region.top);
    while top + d <= region.top + region.height {
        let mut left = first(region.left);
        while left + d <= region.left + region.width {
            let unit = CropRect { top, left, height: d, width: d };
            if grid.prefix().rect_sum_unchecked(top, left, d, d) == 0 {
                zero.push(unit);
            } else {
                nonzero.push(unit);
            }
            left += d;
        }
        top += d;
    }
    (zero, nonzero)
}

/// Advances `min(delta, available)` cells by one modulo `q` and reports the
/// flipped positions in ascending order.
pub fn inject_flips(grid: &BitGrid2D, budget: &FlipBudget) -> Result<(BitGrid2D, Vec<(usize, usize)>)> {
    let region = budget.region.unwrap_or(CropRect {
        top: 0,
        left: 0,
        height: grid.rows(),
        width: grid.cols(),
    });
    if region.top + region.height > grid.rows() || region.left + region.width > grid.cols() {
        return Err(out_of_range("flip region", format!("{region:?} outside grid")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let candidates: Vec<(usize, usize)> = match budget.strategy {
        FlipStrategy::Random => (region.top..region.top + region.height)
            .flat_map(|r| (region.left..region.left + region.width).map(move |c| (r, c)))
            .collect(),
        FlipStrategy::ConcentrateOnZeroUnit { unit } | FlipStrategy::ConcentrateOnBorders { unit } => {
            if unit == 0 {
                return Err(Error::InvalidArgument("unit side must be positive".into()));
            }
            let (zero, nonzero) = aligned_units(grid, unit, region);
            let on_borders = matches!(budget.strategy, FlipStrategy::ConcentrateOnBorders { .. });
            let pool = if on_borders { nonzero } else { zero };
            match pool.choose(&mut rng) {
                None => Vec::new(),
                Some(u) => (u.top..u.top + unit)
                    .flat_map(|r| (u.left..u.left + unit).map(move |c| (r, c)))
                    .filter(|&(r, c)| {
                        !on_borders
                            || r == u.top
                            || c == u.left
                            || r == u.top + unit - 1
                            || c == u.left + unit - 1
                    })
                    .collect(),
            }
        }
    };
    let count = budget.delta.min(candidates.len());
    let mut positions: Vec<(usize, usize)> = index::sample(&mut rng, candidates.len(), count)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    positions.sort_unstable();
    Ok((grid.toggled(&positions)?, positions))
}
