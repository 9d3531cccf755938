//! Rate tables and bounds through the public API.

use forensic_core::rates::{emit_table, hamming_ball_size, rate_2d, rate_2d_lower_bound, PayloadVariant, TableId};

#[test]
fn csv_has_header_and_one_line_per_row() {
    for (id, header) in [
        (TableId::Planar, "M,h,d,m,rate"),
        (TableId::PlanarTight, "M,h,d,m,rate"),
        (TableId::Spatial, "M,h,d,a,b,rate"),
    ] {
        let table = emit_table(id).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(header));
        assert_eq!(lines.count(), table.rows.len());
        assert_eq!(emit_table(id).unwrap().to_text(), table.to_text());
    }
}

#[test]
fn lower_bound_stays_below_rate() {
    for &(m, h) in TableId::PlanarTight.inputs() {
        let report = rate_2d(m, h, 2, PayloadVariant::MinusFour).unwrap();
        let lower = rate_2d_lower_bound(m, h, 2).unwrap();
        assert!(lower <= report.rate_real + 1e-12, "M={m}: {lower} > {}", report.rate_real);
    }
}

#[test]
fn hamming_ball_counts() {
    // 1 + 10 + 45 words within distance 2 of a binary word of length 10
    assert_eq!(hamming_ball_size(2, 10, 2).to_string(), "56");
}
