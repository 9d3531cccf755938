//! Self-check suites runnable from the command line. Each check reports a
//! name, a verdict and a short measurement.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{enumerate_legal_crops, inject_flips, sample_legal_boxes, CropRect, FlipBudget, FlipStrategy};
use crate::codec2d::{color, decode2d, encode2d, unit_grid_witness, CodeParams2D};
use crate::codec3d::{color3d, decode3d, encode3d, CodeParams3D};
use crate::discrepancy::{
    hh_set, hh_shifted, hh_tiled, largest_empty_box, largest_empty_rect, vdc_shifted, vdc_tiled,
};
use crate::error::{Error, Result};
use crate::message::Message;
use crate::rates::appendix_inequality_holds;
use crate::robust::{decode_robust, encode_robust, validate_params_robust, CodecProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Discrepancy,
    Lemmas,
    Roundtrip,
    Robust,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Discrepancy, Suite::Lemmas, Suite::Roundtrip, Suite::Robust];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrepancy" => Ok(Suite::Discrepancy),
            "lemmas" => Ok(Suite::Lemmas),
            "roundtrip" => Ok(Suite::Roundtrip),
            "robust" => Ok(Suite::Robust),
            other => Err(Error::InvalidArgument(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn check(name: &str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name: name.into(), passed, detail },
        Err(e) => CheckResult { name: name.into(), passed: false, detail: format!("error: {e}") },
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckResult> {
    match suite {
        Suite::Discrepancy => discrepancy_checks(),
        Suite::Lemmas => lemma_checks(),
        Suite::Roundtrip => roundtrip_checks(seed),
        Suite::Robust => robust_checks(seed),
    }
}

fn discrepancy_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(check(
        "vdc empty rectangles below 4w",
        (|| {
            let mut worst = Vec::new();
            for w in [2usize, 4, 8, 16, 32, 64] {
                let mut max = 0;
                for i in [0, 1, w / 2, w - 1] {
                    for j in [0, 1, w / 2, w - 1] {
                        max = max.max(largest_empty_rect(&vdc_shifted(w, i, j)?)?.area);
                    }
                }
                worst.push((w, max));
            }
            let ok = worst.iter().all(|&(w, a)| a < 4 * w);
            Ok((ok, format!("{worst:?}")))
        })(),
    ));
    out.push(check(
        "tiled vdc empty rectangles below 4w",
        (|| {
            let mut ok = true;
            let mut worst = Vec::new();
            for w in [2usize, 4, 8, 16] {
                for z in [2 * w, 4 * w] {
                    let max = (0..w)
                        .map(|s| Ok(largest_empty_rect(&vdc_tiled(w, z, s)?)?.area))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .max()
                        .unwrap_or(0);
                    ok &= max < 4 * w;
                    worst.push((w, z, max));
                }
            }
            Ok((ok, format!("{worst:?}")))
        })(),
    ));
    out.push(check(
        "hh shifts partition the box",
        (|| {
            let (w1, w3) = (8, 9);
            let mut seen = std::collections::BTreeSet::new();
            let mut disjoint = true;
            for d1 in 0..w1 {
                for d2 in 0..w3 {
                    for p in hh_shifted(w1, w3, d1, d2)?.iter() {
                        disjoint &= seen.insert(p);
                    }
                }
            }
            Ok((disjoint && seen.len() == w1 * w1 * w3, format!("{} points covered", seen.len())))
        })(),
    ));
    out.push(check(
        "hh empty boxes below 24 w1 w3",
        (|| {
            let mut ok = true;
            let mut worst = Vec::new();
            for (w1, w3) in [(2usize, 3usize), (4, 9), (8, 9)] {
                for v1 in [w1, 2 * w1] {
                    for v2 in [w3, 2 * w3] {
                        let vol = largest_empty_box(&hh_tiled(w1, w3, v1, v2, 0, 0)?)?.volume;
                        ok &= vol < 24 * w1 * w3;
                        worst.push((w1, w3, v1, v2, vol));
                    }
                }
            }
            let single = largest_empty_box(&hh_set(16, 27)?)?.volume;
            ok &= single < 24 * 16 * 27;
            Ok((ok, format!("{worst:?}; hh(16,27) {single}")))
        })(),
    ));
    out
}

fn lemma_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(check(
        "adjacent units differ in color",
        (|| {
            let p = CodeParams2D::derive(2, None, 11 * (33 * 3 + 2), 8)?;
            let u = p.units_per_side();
            let mut ok = true;
            for i in 0..u {
                for j in 0..u {
                    let c = color(&p, i, j)?;
                    if i + 1 < u {
                        ok &= color(&p, i + 1, j)? != c;
                    }
                    if j + 1 < u {
                        ok &= color(&p, i, j + 1)? != c;
                    }
                }
            }
            Ok((ok, format!("m'={} on {u}x{u} units", p.colors)))
        })(),
    ));
    out.push(check(
        "unit-grid witness for every legal size",
        (|| {
            let mut count = 0;
            for (d, m) in [(3usize, 8usize), (3, 16), (5, 16)] {
                let area = (4 * d - 1) * ((m + 1) * d + d - 1);
                let p = CodeParams2D::derive(2, None, area, 3 * d - 1)?;
                let limit = (m + 4) * d;
                for a in p.min_side..=limit {
                    for b in p.min_side..=limit {
                        if p.is_legal(a, b) {
                            let (x, y) = unit_grid_witness(&p, a, b)?;
                            if x * y != p.m {
                                return Ok((false, format!("({x}, {y}) at {a}x{b}")));
                            }
                            count += 1;
                        }
                    }
                }
            }
            Ok((true, format!("{count} sizes")))
        })(),
    ));
    out.push(check(
        "appendix inequality",
        Ok({
            let ok = (1..=64u64).all(|d| (1..=12u32).all(|p| (1..=p).all(|i| appendix_inequality_holds(d, p, i))));
            (ok, "d <= 64, p <= 12".into())
        }),
    ));
    out.push(check(
        "3D color classes are tiled hh sets",
        (|| {
            let p = CodeParams3D::derive(2, 14144, 8, None, None)?;
            let (w1, w3) = p.small_grid();
            let [ux, _, uz] = p.unit_dims();
            let mut ok = true;
            for d1 in 0..w1 {
                for d2 in 0..w3 {
                    for (i, j, l) in hh_tiled(w1, w3, ux, uz, d1, d2)?.iter() {
                        ok &= color3d(&p, i, j, l)? == d1 * w3 + d2;
                    }
                }
            }
            Ok((ok, format!("{} colors", p.colors)))
        })(),
    ));
    out
}

fn roundtrip_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    out.push(check(
        "2D decode over every legal crop (d=3, m=8)",
        (|| {
            let p = CodeParams2D::derive(2, None, 319, 8)?;
            let msg = Message::random(2, p.message_len, &mut rng)?;
            let cw = encode2d(&p, &msg)?;
            let mut total = 0;
            let mut failures = 0;
            for crop in enumerate_legal_crops(p.n, p.min_area, p.min_side) {
                total += 1;
                if decode2d(&p, &crop.apply(&cw)?).ok() != Some(msg.clone()) {
                    failures += 1;
                }
            }
            Ok((failures == 0, format!("{total} crops, {failures} failures")))
        })(),
    ));
    out.push(check(
        "3D decode over sampled legal crops (d=3, a=8, b=9)",
        (|| {
            let p = CodeParams3D::derive(2, 14144, 8, None, None)?;
            let msg = Message::random(2, p.message_len, &mut rng)?;
            let cw = encode3d(&p, &msg)?;
            let boxes = sample_legal_boxes([p.n, p.n, p.n_prime], p.min_volume, p.min_side, 200, seed)?;
            let mut failures = 0;
            for (origin, extent) in &boxes {
                if decode3d(&p, &cw.crop(*origin, *extent)?).ok() != Some(msg.clone()) {
                    failures += 1;
                }
            }
            Ok((failures == 0, format!("{} crops, {failures} failures", boxes.len())))
        })(),
    ));
    out
}

fn robust_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![check(
        "single flips anywhere (d=5, m'=4, delta=1)",
        (|| {
            let base = CodeParams2D::derive(2, None, 19 * 89, 14)?;
            let p = validate_params_robust(base, 1, CodecProfile::Reference)?;
            let msg = Message::random(2, p.message_len(), &mut rng)?;
            let cw = encode_robust(&p, &msg)?;
            let crop = CropRect { top: 3, left: 2, height: 23, width: 74 };
            let mut failures = 0;
            for r in 0..cw.rows() {
                for c in 0..cw.cols() {
                    let flipped = cw.toggled(&[(r, c)])?;
                    if decode_robust(&p, &crop.apply(&flipped)?).ok() != Some(msg.clone()) {
                        failures += 1;
                    }
                }
            }
            let budget = FlipBudget {
                delta: 1,
                strategy: FlipStrategy::ConcentrateOnZeroUnit { unit: 5 },
                seed,
                region: Some(crop),
            };
            let (targeted, _) = inject_flips(&cw, &budget)?;
            if decode_robust(&p, &crop.apply(&targeted)?).ok() != Some(msg.clone()) {
                failures += 1;
            }
            Ok((failures == 0, format!("{} flip positions, {failures} failures", cw.rows() * cw.cols())))
        })(),
    )]
}
