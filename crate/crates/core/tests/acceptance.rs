//! Acceptance gate: eleven criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p forensic-core --test acceptance -- --nocapture`
//! to see the report.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use forensic_core::channel::{
    enumerate_legal_crops, inject_flips, is_legal_3d, sample_legal_boxes, sample_legal_crops, CropRect, FlipBudget,
    FlipStrategy,
};
use forensic_core::codec2d::{color, decode2d, encode2d, CodeParams2D};
use forensic_core::codec3d::{decode3d, encode3d, CodeParams3D};
use forensic_core::discrepancy::{
    hh_set, hh_set_floor, hh_shifted, largest_empty_box, largest_empty_rect, vdc_set, vdc_shifted, vdc_tiled,
    PointSet3D,
};
use forensic_core::rates::{
    appendix_inequality_holds, emit_table, lll_existence_bound, rate_2d, sphere_packing_bound, CodeShape,
    LllExponent, PayloadVariant, TableColors, TableId,
};
use forensic_core::robust::{
    decode_robust, encode_robust, find_min_weight_square, validate_params_robust, CodecProfile, RepetitionCodec,
    SlicedCodec,
};
use forensic_core::{DecodeError, Message};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn vdc_bounds() -> Outcome {
    let mut summary = Vec::new();
    for w in [2usize, 4, 8, 16, 32, 64] {
        let plain = largest_empty_rect(&vdc_set(w).map_err(err)?).map_err(err)?.area;
        ensure(plain < 4 * w, || format!("vdc_set({w}) empty area {plain}"))?;
        let mut worst = plain;
        let shifts: BTreeSet<usize> = [0, 1, w / 2, w - 1].into_iter().collect();
        for &i in &shifts {
            for &j in &shifts {
                let area = largest_empty_rect(&vdc_shifted(w, i, j).map_err(err)?).map_err(err)?.area;
                ensure(area < 4 * w, || format!("vdc_shifted({w},{i},{j}) empty area {area}"))?;
                worst = worst.max(area);
            }
        }
        summary.push(format!("w={w}:{worst}"));
    }
    for w in [2usize, 4, 8, 16] {
        for z in [2 * w, 4 * w] {
            for s in 0..w {
                let area = largest_empty_rect(&vdc_tiled(w, z, s).map_err(err)?).map_err(err)?.area;
                ensure(area < 4 * w, || format!("vdc_tiled({w},{z},{s}) empty area {area}"))?;
            }
        }
    }
    Ok(format!("max empty areas {}", summary.join(" ")))
}

fn partitions() -> Outcome {
    for w in [2usize, 4, 8, 16, 32, 64] {
        let mut seen = BTreeSet::new();
        for i in 0..w {
            for p in vdc_shifted(w, i, 0).map_err(err)?.iter() {
                ensure(seen.insert(p), || format!("vdc w={w}: point {p:?} repeated"))?;
            }
        }
        let all: BTreeSet<_> = (0..w).flat_map(|x| (0..w).map(move |y| (x, y))).collect();
        ensure(seen == all, || format!("vdc w={w}: shifts miss cells"))?;
    }
    for (w1, w3) in [(1usize, 3usize), (2, 9), (4, 9), (16, 27)] {
        let mut seen = BTreeSet::new();
        for d1 in 0..w1 {
            for d2 in 0..w3 {
                for p in hh_shifted(w1, w3, d1, d2).map_err(err)?.iter() {
                    ensure(seen.insert(p), || format!("hh ({w1},{w3}): point {p:?} repeated"))?;
                }
            }
        }
        let all: BTreeSet<_> = (0..w1)
            .flat_map(|x| (0..w1).flat_map(move |y| (0..w3).map(move |z| (x, y, z))))
            .collect();
        ensure(seen == all, || format!("hh ({w1},{w3}): shifts miss cells"))?;
    }
    Ok("vdc w<=64 and hh (1,3),(2,9),(4,9),(16,27) partition exactly".into())
}

fn shifted_floor_hh(w1: usize, w3: usize, d1: usize, d2: usize) -> Result<PointSet3D, String> {
    let base = hh_set_floor(w1, w3).map_err(err)?;
    PointSet3D::from_points(
        [w1, w1, w3],
        base.iter().map(|(x, y, z)| (x, (y + d1) % w1, (z + d2) % w3)),
    )
    .map_err(err)
}

fn hh_empty_box() -> Outcome {
    // 32 * phi_3(k) is fractional for k >= 27, so the 32x32x27 instance uses floored z coordinates
    let mut volumes = Vec::new();
    for d1 in 0..2 {
        for d2 in 0..2 {
            let v = largest_empty_box(&shifted_floor_hh(32, 27, d1, d2)?).map_err(err)?.volume;
            // both the tight 24 w1 w3 figure and the looser 32 w1 w3 one
            ensure(v <= 20736, || format!("hh(32,27) shift ({d1},{d2}): {v} > 20736"))?;
            ensure(v < 27648, || format!("hh(32,27) shift ({d1},{d2}): {v} >= 27648"))?;
            volumes.push(v);
        }
    }
    let exact = largest_empty_box(&hh_set(32, 81).map_err(err)?).map_err(err)?.volume;
    ensure(exact <= 24 * 32 * 81, || format!("hh(32,81): {exact}"))?;
    Ok(format!("hh(32,27) volumes {volumes:?} <= 20736; hh(32,81) {exact} <= 62208"))
}

fn params_with(d: usize, m: usize, n: Option<usize>) -> Result<CodeParams2D, String> {
    CodeParams2D::derive(2, n, (4 * d - 1) * ((m + 1) * d + d - 1), 3 * d - 1).map_err(err)
}

fn coloring_is_vdc() -> Outcome {
    let mut checked = 0;
    for colors in [2usize, 4, 8] {
        for units in [colors, 2 * colors, 4 * colors] {
            let p = params_with(3, 4 * colors, Some(3 * units))?;
            for r in 0..colors {
                let class: BTreeSet<(usize, usize)> = (0..units)
                    .flat_map(|i| (0..units).map(move |j| (i, j)))
                    .filter(|&(i, j)| color(&p, i, j).unwrap() == r)
                    .collect();
                let tiled: BTreeSet<_> = vdc_tiled(colors, units, r).map_err(err)?.iter().collect();
                ensure(class == tiled, || format!("m'={colors}, n/d={units}, color {r} differs"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} color classes equal tiled vdc sets"))
}

fn zero_square_uniqueness() -> Outcome {
    let mut windows = 0usize;
    for d in [3usize, 4, 5] {
        let p = params_with(d, 16, None)?;
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..100 {
            let msg = Message::random(2, p.message_len, &mut rng).map_err(err)?;
            let cw = encode2d(&p, &msg).map_err(err)?;
            let cells = cw.cells();
            let n = p.n;
            for top in 0..=n - d {
                for left in 0..=n - d {
                    let zero = (top..top + d).all(|r| cells[r * n + left..r * n + left + d].iter().all(|&v| v == 0));
                    if zero {
                        windows += 1;
                        let aligned = top % d == 0 && left % d == 0;
                        ensure(aligned && color(&p, top / d, left / d).unwrap() == 0, || {
                            format!("d={d}: zero window at ({top},{left}) is not a color-0 unit")
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!("{windows} zero windows, all on color-0 units"))
}

fn roundtrip_2d() -> Outcome {
    let p = CodeParams2D::derive(2, None, 319, 8).map_err(err)?;
    ensure((p.unit, p.m, p.n) == (3, 8, 24), || format!("unexpected params {p:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut crops = 0;
    for _ in 0..3 {
        let msg = Message::random(2, p.message_len, &mut rng).map_err(err)?;
        let cw = encode2d(&p, &msg).map_err(err)?;
        crops = 0;
        for crop in enumerate_legal_crops(p.n, p.min_area, p.min_side) {
            let got = decode2d(&p, &crop.apply(&cw).map_err(err)?);
            ensure(got.as_ref() == Ok(&msg), || format!("crop {crop:?}: {got:?}"))?;
            crops += 1;
        }
    }
    Ok(format!("{crops} legal crops x 3 messages decoded"))
}

fn table_reproduction() -> Outcome {
    let table1: [(usize, usize, usize, usize, f64); 8] = [
        (1024, 14, 5, 8, 0.022461),
        (2048, 14, 5, 16, 0.031370),
        (8192, 26, 9, 16, 0.028350),
        (16384, 11, 4, 256, 0.030849),
        (65536, 14, 5, 512, 0.031028),
        (262144, 155, 52, 16, 0.030904),
        (1048576, 68, 23, 256, 0.031304),
        (4194304, 626, 209, 16, 0.031241),
    ];
    let table2: [(usize, usize, usize, usize, f64); 5] = [
        (100045, 41, 14, 128, 0.057958),
        (1000825, 131, 44, 128, 0.059689),
        (9973111, 104, 35, 2048, 0.062100),
        (99053215, 116, 39, 16384, 0.062219),
        (971469531, 182, 61, 65536, 0.062448),
    ];
    let table3: [(usize, usize, usize, usize, usize, f64); 6] = [
        (209935, 11, 4, 16, 27, 0.004203745),
        (425124, 14, 5, 16, 27, 0.004515184),
        (752267, 17, 6, 16, 27, 0.004608089),
        (1836159, 23, 8, 16, 27, 0.004628419),
        (2639780, 26, 9, 16, 27, 0.004616867),
        (5082084, 14, 5, 64, 81, 0.004621950),
    ];
    for (id, expected) in [(TableId::Planar, &table1[..]), (TableId::PlanarTight, &table2[..])] {
        let table = emit_table(id).map_err(err)?;
        ensure(table.rows.len() == expected.len(), || format!("{id:?} row count"))?;
        for (row, &(m_area, h, d, m, rate)) in table.rows.iter().zip(expected) {
            ensure(
                (row.min_area, row.min_side, row.unit, row.colors) == (m_area, h, d, TableColors::M(m)),
                || format!("{id:?} row M={m_area}: got {row:?}"),
            )?;
            ensure((row.rate - rate).abs() < 1e-6, || format!("{id:?} M={m_area}: rate {}", row.rate))?;
        }
    }
    let table = emit_table(TableId::Spatial).map_err(err)?;
    ensure(table.rows.len() == table3.len(), || "table 3 row count".into())?;
    for (row, &(m_vol, h, d, a, b, rate)) in table.rows.iter().zip(&table3) {
        ensure(
            (row.min_area, row.min_side, row.unit, row.colors) == (m_vol, h, d, TableColors::AB(a, b)),
            || format!("table 3 row M={m_vol}: got {row:?}"),
        )?;
        ensure((row.rate - rate).abs() < 1e-8, || format!("table 3 M={m_vol}: rate {}", row.rate))?;
    }
    Ok("19 rows match (tables 1-3)".into())
}

fn roundtrip_3d() -> Outcome {
    let p = CodeParams3D::derive(2, 14144, 8, None, None).map_err(err)?;
    ensure((p.unit, p.a, p.b, p.n, p.n_prime) == (3, 8, 9, 24, 27), || format!("unexpected params {p:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let msg = Message::random(2, p.message_len, &mut rng).map_err(err)?;
    let cw = encode3d(&p, &msg).map_err(err)?;
    let dims = [p.n, p.n, p.n_prime];
    let mut boxes = sample_legal_boxes(dims, p.min_volume, p.min_side, 240, 8).map_err(err)?;
    for extent in [[24, 23, 26], [23, 24, 26], [24, 24, 25], [23, 23, 27], [24, 24, 27]] {
        for x in 0..=dims[0] - extent[0] {
            for z in 0..=dims[2] - extent[2] {
                boxes.push(([x, 0, z], extent));
            }
        }
    }
    for (origin, extent) in &boxes {
        let frag = cw.crop(*origin, *extent).map_err(err)?;
        let got = decode3d(&p, &frag);
        ensure(got.as_ref() == Ok(&msg), || format!("box {origin:?}+{extent:?}: {got:?}"))?;
    }
    // side-8 slabs cannot reach the minimum volume inside a 24x24x27 codeword
    let mut slabs = 0;
    for extent in [[8, 24, 27], [24, 8, 27], [24, 24, 8]] {
        ensure(!is_legal_3d(extent[0], extent[1], extent[2], p.min_volume, p.min_side), || {
            format!("{extent:?} unexpectedly legal")
        })?;
        let frag = cw.crop([0, 0, 0], extent).map_err(err)?;
        ensure(matches!(decode3d(&p, &frag), Err(DecodeError::IllegalFragment(_))), || {
            format!("slab {extent:?} not rejected")
        })?;
        slabs += 1;
    }
    Ok(format!("{} legal boxes decoded, {slabs} illegal side-8 slabs rejected", boxes.len()))
}

fn flip_sweep(codec: &RepetitionCodec) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(codec.slice_len() as u64);
    let mut count = 0;
    for _ in 0..8 {
        let msg = Message::random(2, codec.message_len(), &mut rng).map_err(err)?;
        let slices = codec.encode(&msg).map_err(err)?;
        for s in 0..slices.len() {
            for pos in 0..codec.slice_len() {
                let mut noisy = slices.clone();
                noisy[s][pos] ^= 1;
                noisy.rotate_left(s);
                let got = codec.decode(&noisy);
                ensure(got.as_ref() == Ok(&msg), || format!("slice {s} pos {pos}: {got:?}"))?;
                count += 1;
            }
        }
    }
    Ok(count)
}

fn robust_codec() -> Outcome {
    let mut swept = 0;
    for (q, l) in [(2, 16), (3, 25)] {
        swept += flip_sweep(&RepetitionCodec::new(q, l, 1).map_err(err)?)?;
    }

    let base = params_with(5, 16, None)?;
    let p = validate_params_robust(base, 1, CodecProfile::Reference).map_err(err)?;
    let msg = Message::random(2, p.message_len(), &mut ChaCha8Rng::seed_from_u64(95)).map_err(err)?;
    let cw = encode_robust(&p, &msg).map_err(err)?;
    let crop = CropRect { top: 3, left: 2, height: 23, width: 74 };
    ensure(base.is_legal(crop.height, crop.width), || "fixed crop is not legal".into())?;
    for r in 0..cw.rows() {
        for c in 0..cw.cols() {
            let frag = crop.apply(&cw.toggled(&[(r, c)]).map_err(err)?).map_err(err)?;
            let (top, left) = find_min_weight_square(&frag, 5).map_err(err)?;
            let (row, col) = (top + crop.top, left + crop.left);
            ensure(row % 5 == 0 && col % 5 == 0 && color(&base, row / 5, col / 5).unwrap() == 0, || {
                format!("flip ({r},{c}): min-weight window at ({row},{col})")
            })?;
            let got = decode_robust(&p, &frag);
            ensure(got.as_ref() == Ok(&msg), || format!("flip ({r},{c}): {got:?}"))?;
        }
    }

    let base = params_with(6, 16, None)?;
    let p = validate_params_robust(base, 2, CodecProfile::Reference).map_err(err)?;
    ensure(2 * p.delta < base.unit, || "alignment margin".into())?;
    let mut trials = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(96);
    for strategy in [
        FlipStrategy::ConcentrateOnZeroUnit { unit: base.unit },
        FlipStrategy::ConcentrateOnBorders { unit: base.unit },
    ] {
        let crops = sample_legal_crops(base.n, base.n, base.min_area, base.min_side, 1000, trials as u64)
            .map_err(err)?;
        for (i, crop) in crops.into_iter().enumerate() {
            let msg = Message::random(2, p.message_len(), &mut rng).map_err(err)?;
            let cw = encode_robust(&p, &msg).map_err(err)?;
            let budget = FlipBudget { delta: 2, strategy, seed: i as u64, region: Some(crop) };
            let (noisy, positions) = inject_flips(&cw, &budget).map_err(err)?;
            ensure(positions.len() == 2, || format!("{strategy:?}: only {} flips placed", positions.len()))?;
            let got = decode_robust(&p, &crop.apply(&noisy).map_err(err)?);
            ensure(got.as_ref() == Ok(&msg), || format!("{strategy:?} crop {crop:?} flips {positions:?}: {got:?}"))?;
            trials += 1;
        }
    }
    Ok(format!(
        "{swept} codec flips, {} codeword flips (d=5), {trials} adversarial trials (d=6, delta=2)",
        cw.rows() * cw.cols()
    ))
}

fn bounds() -> Outcome {
    ensure(sphere_packing_bound(2, 319, 0) == 1.0, || "sphere bound at delta=0 is not 1".into())?;
    let mut last = 0.0;
    let mut final_value = 0.0;
    for t in 10..=20u32 {
        let m = 1usize << t;
        let b = lll_existence_bound(2, m, m, 0, LllExponent::OneAndHalf);
        let expected = 1.0 - 5.0 * f64::from(t) / m as f64;
        ensure((b - expected).abs() < 1e-9, || format!("t={t}: {b} vs {expected}"))?;
        ensure(b > last, || format!("t={t}: not increasing"))?;
        last = b;
        final_value = b;
    }
    ensure(final_value >= 0.99, || format!("final bound {final_value}"))?;
    for (id, variant) in [(TableId::Planar, PayloadVariant::MinusTwo), (TableId::PlanarTight, PayloadVariant::MinusFour)] {
        for &(m, h) in id.inputs() {
            let r = rate_2d(m, h, 2, variant).map_err(err)?;
            ensure(matches!(r.shape, CodeShape::TwoD(..)), || "shape".into())?;
            ensure(r.rate_real <= r.sphere_bound, || format!("M={m}: rate above sphere bound"))?;
        }
    }
    Ok(format!("lll bound at t=20: {final_value:.6}"))
}

fn appendix_inequality() -> Outcome {
    let mut count = 0;
    for d in 1..=64u64 {
        for p in 1..=12u32 {
            for i in 1..=p {
                // independent evaluation in i128
                let (d2, pw) = (d as i128, |e: u32| 1i128 << e);
                let lhs = ((pw(i) + 1) * d2 + d2 - 1) * ((pw(p + 1 - i) + 1) * d2 + d2 - 1);
                let rhs = (4 * d2 - 1) * ((pw(p) + 1) * d2 + d2 - 1);
                ensure(lhs <= rhs, || format!("violated at d={d} p={p} i={i}"))?;
                ensure(appendix_inequality_holds(d, p, i), || format!("library disagrees at d={d} p={p} i={i}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} cases"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("discrepancy bounds", vdc_bounds),
        ("partition lemmas", partitions),
        ("hh empty-box bound", hh_empty_box),
        ("coloring equals tiled vdc", coloring_is_vdc),
        ("zero-square uniqueness", zero_square_uniqueness),
        ("2D round trip over every legal crop", roundtrip_2d),
        ("table reproduction", table_reproduction),
        ("3D round trip", roundtrip_3d),
        ("robust codec", robust_codec),
        ("bounds", bounds),
        ("appendix inequality", appendix_inequality),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, run)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let outcome = run();
                    (outcome, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| (Err("panicked".into()), 0.0)))
            .collect()
    });
    let mut failed = Vec::new();
    for (i, ((name, _), (outcome, secs))) in criteria.iter().zip(&results).enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
