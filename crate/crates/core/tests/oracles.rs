//! Cross-checks of the empty-rectangle and empty-box oracles against
//! brute-force enumeration on small random point sets.

use proptest::prelude::*;

use forensic_core::discrepancy::{
    hh_set, largest_empty_box, largest_empty_rect, vdc_set, PointSet2D, PointSet3D,
};

fn brute_rect(points: &PointSet2D) -> usize {
    let (w, h) = (points.width(), points.height());
    let mut best = 0;
    for x in 0..w {
        for y in 0..h {
            for x_end in x + 1..=w {
                for y_end in y + 1..=h {
                    let area = (x_end - x) * (y_end - y);
                    if area > best && !points.iter().any(|(px, py)| (x..x_end).contains(&px) && (y..y_end).contains(&py)) {
                        best = area;
                    }
                }
            }
        }
    }
    best
}

fn brute_box(points: &PointSet3D) -> usize {
    let dims = points.dims();
    let mut best = 0;
    for x in 0..dims[0] {
        for y in 0..dims[1] {
            for z in 0..dims[2] {
                for x_end in x + 1..=dims[0] {
                    for y_end in y + 1..=dims[1] {
                        for z_end in z + 1..=dims[2] {
                            let volume = (x_end - x) * (y_end - y) * (z_end - z);
                            let hit = points.iter().any(|(px, py, pz)| {
                                (x..x_end).contains(&px) && (y..y_end).contains(&py) && (z..z_end).contains(&pz)
                            });
                            if volume > best && !hit {
                                best = volume;
                            }
                        }
                    }
                }
            }
        }
    }
    best
}

fn point_set_2d() -> impl Strategy<Value = PointSet2D> {
    (1usize..=12, 1usize..=12)
        .prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::btree_set((0..w, 0..h), 0..=w * h / 2)))
        .prop_map(|(w, h, pts)| PointSet2D::from_points(w, h, pts).unwrap())
}

fn point_set_3d() -> impl Strategy<Value = PointSet3D> {
    (1usize..=5, 1usize..=5, 1usize..=5)
        .prop_flat_map(|(a, b, c)| {
            (Just([a, b, c]), prop::collection::btree_set((0..a, 0..b, 0..c), 0..=a * b * c / 3))
        })
        .prop_map(|(dims, pts)| PointSet3D::from_points(dims, pts).unwrap())
}

proptest! {
    #[test]
    fn rect_oracle_matches_brute_force(points in point_set_2d()) {
        let found = largest_empty_rect(&points).unwrap();
        prop_assert_eq!(found.area, brute_rect(&points));
        if let Some(r) = found.witness {
            prop_assert_eq!(r.area(), found.area);
            prop_assert!(r.x + r.width <= points.width() && r.y + r.height <= points.height());
            prop_assert!(!points.iter().any(|(x, y)| (r.x..r.x + r.width).contains(&x) && (r.y..r.y + r.height).contains(&y)));
        }
    }

    #[test]
    fn box_oracle_matches_brute_force(points in point_set_3d()) {
        let found = largest_empty_box(&points).unwrap();
        prop_assert_eq!(found.volume, brute_box(&points));
        if let Some(b) = found.witness {
            prop_assert_eq!(b.volume(), found.volume);
            let inside = |p: [usize; 3]| (0..3).all(|k| (b.origin[k]..b.origin[k] + b.extent[k]).contains(&p[k]));
            prop_assert!(!points.iter().any(|(x, y, z)| inside([x, y, z])));
        }
    }
}

#[test]
fn vdc_oracle_matches_brute_force() {
    for w in [2, 4, 8] {
        let set = vdc_set(w).unwrap();
        assert_eq!(largest_empty_rect(&set).unwrap().area, brute_rect(&set), "w={w}");
    }
}

#[test]
fn hh_oracle_matches_brute_force() {
    for (w1, w3) in [(1, 3), (2, 3), (2, 9), (4, 9)] {
        let set = hh_set(w1, w3).unwrap();
        assert_eq!(largest_empty_box(&set).unwrap().volume, brute_box(&set), "({w1},{w3})");
    }
}

#[test]
fn point_set_text_round_trip() {
    let set = vdc_set(16).unwrap();
    assert_eq!(PointSet2D::from_text(&set.to_text()).unwrap(), set);
    let set = hh_set(4, 9).unwrap();
    assert_eq!(PointSet3D::from_text(&set.to_text()).unwrap(), set);
}
