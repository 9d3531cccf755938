//! Code rates, reference parameter tables and information-theoretic bounds.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::codec2d::CodeParams2D;
use crate::codec3d::CodeParams3D;
use crate::error::Result;

/// Payload length per unit used in the 2D rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadVariant {
    /// `d^2 - 2` symbols per unit.
    MinusTwo,
    /// `d^2 - 4` symbols per unit (the four-corner layout the codec uses).
    MinusFour,
}

impl PayloadVariant {
    fn overhead(self) -> f64 {
        match self {
            PayloadVariant::MinusTwo => 2.0,
            PayloadVariant::MinusFour => 4.0,
        }
    }
}

/// Exponent of `M` in the local-lemma existence bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LllExponent {
    OneAndHalf,
    OneAndQuarter,
}

impl LllExponent {
    pub fn value(self) -> f64 {
        match self {
            LllExponent::OneAndHalf => 1.5,
            LllExponent::OneAndQuarter => 1.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CodeShape {
    TwoD(CodeParams2D, PayloadVariant),
    ThreeD(CodeParams3D),
}

/// Message length and rate of a parameter choice, with real-valued index
/// overhead (`k_real`) and with the codec's integer index width (`k_integer`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub shape: CodeShape,
    pub k_real: f64,
    pub rate_real: f64,
    pub k_integer: usize,
    pub rate_integer: f64,
    /// Sphere-packing upper bound at zero flips.
    pub sphere_bound: f64,
    /// Local-lemma existence bound at zero flips (2D only, `n = d m`).
    pub lll_bound: Option<f64>,
}

fn log_q(value: f64, q: u8) -> f64 {
    value.ln() / f64::from(q).ln()
}

/// 2D rate `(m/4 - 1)(d^2 - x - log_q(m/4 - 1)) / M`.
pub fn rate_2d(min_area: usize, min_side: usize, q: u8, variant: PayloadVariant) -> Result<RateReport> {
    let params = CodeParams2D::derive(q, None, min_area, min_side)?;
    let parts = (params.colors - 1) as f64;
    let d = params.unit as f64;
    let k_real = parts * (d * d - variant.overhead() - log_q(parts, q));
    let m = min_area as f64;
    Ok(RateReport {
        shape: CodeShape::TwoD(params, variant),
        k_real,
        rate_real: k_real / m,
        k_integer: params.message_len,
        rate_integer: params.message_len as f64 / m,
        sphere_bound: sphere_packing_bound(q, min_area, 0),
        lll_bound: Some(lll_existence_bound(q, params.n, min_area, 0, LllExponent::OneAndHalf)),
    })
}

/// 3D rate `(ab/24 - 1)(d^3 - 8 - log_q(ab/24 - 1)) / M`.
pub fn rate_3d(min_volume: usize, min_side: usize, q: u8) -> Result<RateReport> {
    let params = CodeParams3D::derive(q, min_volume, min_side, None, None)?;
    let parts = (params.colors - 1) as f64;
    let d = params.unit as f64;
    let k_real = parts * (d * d * d - 8.0 - log_q(parts, q));
    let m = min_volume as f64;
    Ok(RateReport {
        shape: CodeShape::ThreeD(params),
        k_real,
        rate_real: k_real / m,
        k_integer: params.message_len,
        rate_integer: params.message_len as f64 / m,
        sphere_bound: sphere_packing_bound(q, min_volume, 0),
        lll_bound: None,
    })
}

/// Lower bound on the 2D rate obtained by replacing `M` with its largest
/// value for the derived `(d, m)`: `(m/4-1)(d^2-4-log_q(m/4-1)) / ((4d-1)(2md+2d-1))`.
pub fn rate_2d_lower_bound(min_area: usize, min_side: usize, q: u8) -> Result<f64> {
    let params = CodeParams2D::derive(q, None, min_area, min_side)?;
    let (d, m) = (params.unit as f64, params.m as f64);
    let parts = (params.colors - 1) as f64;
    Ok(parts * (d * d - 4.0 - log_q(parts, q)) / ((4.0 * d - 1.0) * (2.0 * m * d + 2.0 * d - 1.0)))
}

/// Natural log of a positive big integer.
fn big_ln(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 64 {
        return value.to_f64().expect("fits in f64 range").ln();
    }
    let shift = bits - 53;
    let top = (value >> shift).to_f64().expect("53 bits fit");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `sum_{i <= delta} C(M, i) (q - 1)^i`, exactly.
pub fn hamming_ball_size(q: u8, len: usize, delta: usize) -> BigUint {
    let mut term = BigUint::one();
    let mut total = BigUint::one();
    let base = BigUint::from(q.saturating_sub(1));
    for i in 0..delta.min(len) {
        term = term * (len - i) * &base / (i + 1);
        total += &term;
    }
    total
}

/// Sphere-packing upper bound `(M - log_q |ball(delta)|) / M` on the rate of
/// any code whose fragments have area `M` and tolerate `delta` flips.
pub fn sphere_packing_bound(q: u8, min_area: usize, delta: usize) -> f64 {
    let m = min_area as f64;
    let ball = hamming_ball_size(q, min_area, delta);
    (m - big_ln(&ball) / f64::from(q).ln()) / m
}

/// Existence bound `(M - 2 log_q(M^e n) - log_q |ball(delta)|) / M`, clamped at zero.
pub fn lll_existence_bound(q: u8, n: usize, min_area: usize, delta: usize, exponent: LllExponent) -> f64 {
    let m = min_area as f64;
    let lnq = f64::from(q).ln();
    let union = exponent.value() * m.ln() + (n as f64).ln();
    let ball = big_ln(&hamming_ball_size(q, min_area, delta));
    ((m - 2.0 * union / lnq - ball / lnq) / m).max(0.0)
}

/// Whether `((2^i+1)d+d-1)((2^(p+1-i)+1)d+d-1) <= (4d-1)((2^p+1)d+d-1)`.
pub fn appendix_inequality_holds(d: u64, p: u32, i: u32) -> bool {
    let d = u128::from(d);
    let side = |units: u128| (units + 1) * d + d - 1;
    side(1 << i) * side(1 << (p + 1 - i)) <= (4 * d - 1) * side(1 << p)
}

/// Which reference table to regenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    /// 2D rates with `d^2 - 2` payload.
    Planar,
    /// 2D rates with `d^2 - 4` payload at `M = (4d-1)((m+1)d+d-1)`.
    PlanarTight,
    /// 3D rates.
    Spatial,
}

impl TableId {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(TableId::Planar),
            2 => Some(TableId::PlanarTight),
            3 => Some(TableId::Spatial),
            _ => None,
        }
    }

    /// The `(M, h)` inputs of the table.
    pub fn inputs(self) -> &'static [(usize, usize)] {
        match self {
            TableId::Planar => &[
                (1024, 14),
                (2048, 14),
                (8192, 26),
                (16384, 11),
                (65536, 14),
                (262_144, 155),
                (1_048_576, 68),
                (4_194_304, 626),
            ],
            TableId::PlanarTight => &[
                (100_045, 41),
                (1_000_825, 131),
                (9_973_111, 104),
                (99_053_215, 116),
                (971_469_531, 182),
            ],
            TableId::Spatial => &[
                (209_935, 11),
                (425_124, 14),
                (752_267, 17),
                (1_836_159, 23),
                (2_639_780, 26),
                (5_082_084, 14),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub min_area: usize,
    pub min_side: usize,
    pub unit: usize,
    /// `m` for 2D tables, `(a, b)` for the 3D table.
    pub colors: TableColors,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableColors {
    M(usize),
    AB(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub id: TableId,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn to_text(&self) -> String {
        let spatial = self.id == TableId::Spatial;
        let mut out = if spatial {
            format!("{:>12} {:>5} {:>5} {:>5} {:>5} {:>12}\n", "M", "h", "d", "a", "b", "rate")
        } else {
            format!("{:>12} {:>5} {:>5} {:>7} {:>10}\n", "M", "h", "d", "m", "rate")
        };
        for row in &self.rows {
            let line = match row.colors {
                TableColors::AB(a, b) => format!(
                    "{:>12} {:>5} {:>5} {:>5} {:>5} {:>12.9}",
                    row.min_area, row.min_side, row.unit, a, b, row.rate
                ),
                TableColors::M(m) => format!(
                    "{:>12} {:>5} {:>5} {:>7} {:>10.6}",
                    row.min_area, row.min_side, row.unit, m, row.rate
                ),
            };
            writeln!(out, "{line}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.id == TableId::Spatial { "M,h,d,a,b,rate\n" } else { "M,h,d,m,rate\n" });
        for row in &self.rows {
            let line = match row.colors {
                TableColors::AB(a, b) => format!("{},{},{},{a},{b},{:.9}", row.min_area, row.min_side, row.unit, row.rate),
                TableColors::M(m) => format!("{},{},{},{m},{:.6}", row.min_area, row.min_side, row.unit, row.rate),
            };
            writeln!(out, "{line}").expect("writing to a String cannot fail");
        }
        out
    }
}

/// Regenerates a reference table from its `(M, h)` inputs (binary alphabet).
pub fn emit_table(id: TableId) -> Result<Table> {
    let rows = id
        .inputs()
        .iter()
        .map(|&(min_area, min_side)| {
            let report = match id {
                TableId::Planar => rate_2d(min_area, min_side, 2, PayloadVariant::MinusTwo)?,
                TableId::PlanarTight => rate_2d(min_area, min_side, 2, PayloadVariant::MinusFour)?,
                TableId::Spatial => rate_3d(min_area, min_side, 2)?,
            };
            let (unit, colors) = match report.shape {
                CodeShape::TwoD(p, _) => (p.unit, TableColors::M(p.m)),
                CodeShape::ThreeD(p) => (p.unit, TableColors::AB(p.a, p.b)),
            };
            Ok(TableRow {
                min_area,
                min_side,
                unit,
                colors,
                rate: report.rate_real,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Table { id, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_2d_examples() {
        let r = rate_2d(1024, 14, 2, PayloadVariant::MinusTwo).unwrap();
        assert!((r.rate_real - 0.022461).abs() < 1e-6);
        let r = rate_2d(100_045, 41, 2, PayloadVariant::MinusFour).unwrap();
        assert!((r.rate_real - 0.057958).abs() < 1e-6);
        let r = rate_2d(65536, 14, 2, PayloadVariant::MinusTwo).unwrap();
        assert!((r.rate_real - 0.031028).abs() < 1e-6);
        assert!(r.rate_integer <= r.rate_real);
        assert!(r.rate_real <= r.sphere_bound);
    }

    #[test]
    fn rate_3d_examples() {
        for (m, h, expected) in [
            (209_935, 11, 0.004203745),
            (5_082_084, 14, 0.004621950),
            (425_124, 14, 0.004515184),
        ] {
            let r = rate_3d(m, h, 2).unwrap();
            assert!((r.rate_real - expected).abs() < 1e-8, "{m}: {}", r.rate_real);
        }
    }

    #[test]
    fn sphere_bound_examples() {
        assert_eq!(sphere_packing_bound(2, 100, 0), 1.0);
        assert!((sphere_packing_bound(2, 8, 1) - (8.0 - 9f64.log2()) / 8.0).abs() < 1e-12);
        let mut last = 1.0;
        for delta in 0..20 {
            let b = sphere_packing_bound(3, 50, delta);
            assert!(b <= last);
            last = b;
        }
    }

    #[test]
    fn ball_size_is_exact() {
        assert_eq!(hamming_ball_size(2, 8, 1), BigUint::from(9u32));
        assert_eq!(hamming_ball_size(3, 4, 2), BigUint::from(1u32 + 8 + 24));
        assert_eq!(hamming_ball_size(2, 10, 10), BigUint::from(1024u32));
    }

    #[test]
    fn big_log_matches_small_values() {
        let v = BigUint::from(1u128 << 100);
        assert!((big_ln(&v) - 100.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn lll_examples() {
        assert!((lll_existence_bound(2, 64, 64, 0, LllExponent::OneAndHalf) - 0.53125).abs() < 1e-12);
        assert_eq!(lll_existence_bound(2, 1 << 20, 4, 0, LllExponent::OneAndHalf), 0.0);
        for delta in 0..5 {
            assert!(
                lll_existence_bound(2, 100, 400, delta, LllExponent::OneAndQuarter)
                    <= sphere_packing_bound(2, 400, delta)
            );
        }
    }

    #[test]
    fn appendix_inequality() {
        for d in 1..=64 {
            for p in 1..=12 {
                for i in 1..=p {
                    assert!(appendix_inequality_holds(d, p, i), "d={d} p={p} i={i}");
                }
            }
        }
    }

    #[test]
    fn table_rows_and_formats() {
        let t = emit_table(TableId::Planar).unwrap();
        let row = t.rows.iter().find(|r| r.min_area == 262_144).unwrap();
        assert_eq!((row.unit, row.colors), (52, TableColors::M(16)));
        assert!((row.rate - 0.030904).abs() < 1e-6);
        assert!(t.to_csv().starts_with("M,h,d,m,rate\n1024,14,5,8,0.022461\n"));
        let t = emit_table(TableId::PlanarTight).unwrap();
        let row = t.rows.iter().find(|r| r.min_area == 9_973_111).unwrap();
        assert_eq!((row.unit, row.colors), (35, TableColors::M(2048)));
        assert!((row.rate - 0.062100).abs() < 1e-6);
        let t = emit_table(TableId::Spatial).unwrap();
        let row = t.rows.iter().find(|r| r.min_area == 2_639_780).unwrap();
        assert_eq!(row.colors, TableColors::AB(16, 27));
        assert!((row.rate - 0.004616867).abs() < 1e-8);
        assert!(t.to_text().lines().count() == 7);
        assert!(TableId::from_number(4).is_none());
    }
}
