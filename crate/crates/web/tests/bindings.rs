use hamdd_web::{dot_for, evolve_rows, landscape_counts, MAX_SITES};

#[test]
fn landscape_has_one_count_per_grid_point() {
    let c = landscape_counts("ising", 6, 1, 5).unwrap();
    assert_eq!(c.len(), 25);
    // middle column: no two-site rotation
    for i in 0..5 {
        assert_eq!(c[i * 5 + 2], 6);
    }
    assert!(landscape_counts("spinglass", 6, 1, 5).is_err());
    assert!(landscape_counts("ising", 6, 0, 5).is_err());
    assert!(landscape_counts("ising", MAX_SITES + 1, 1, 5).is_err());
}

#[test]
fn series_rows_are_triples() {
    let r = evolve_rows("ising", 5, 1.0, 0.001, 0, 0.1, 10, "sxsx(0,4)").unwrap();
    assert_eq!(r.len(), 3 * 11);
    assert_eq!(&r[..3], &[0.0, 0.0, 5.0]);
    let g = evolve_rows("spinglass", 8, 0.0, 0.0, 7, 0.1, 2, "sz(3)").unwrap();
    assert_eq!(g.len(), 9);
    assert!(evolve_rows("ising", 5, 1.0, 0.0, 0, 0.1, 2, "sz(9)").is_err());
    assert!(evolve_rows("ising", 5, 1.0, 0.0, 0, -0.1, 2, "sz(0)").is_err());
}

#[test]
fn dot_export() {
    let d = dot_for("rxx pi/2").unwrap();
    assert_eq!(d.matches("shape=circle").count(), 3);
    assert!(dot_for("cat 3").is_err());
}
