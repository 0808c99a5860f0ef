//! Clebsch-Gordan coefficients and dipole ratios against a hand-copied
//! Condon-Shortley table for 1/2 x 1.

use qubit_scatter::angular::{clebsch_gordan, HalfInt};
use qubit_scatter::levels::dipole_ratio;

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

/// `(2*m1, q, 2*J, 2*M, <1/2 m1; 1 q | J M>)`, from the standard table for
/// `1 x 1/2` with the ordering exchange phase `(-1)^{1 + 1/2 - J}` applied.
fn table() -> Vec<(i32, i32, i32, i32, f64)> {
    let third = (1.0f64 / 3.0).sqrt();
    let two_thirds = (2.0f64 / 3.0).sqrt();
    vec![
        (1, 1, 3, 3, 1.0),
        (-1, 1, 3, 1, third),
        (1, 0, 3, 1, two_thirds),
        (-1, 0, 3, -1, two_thirds),
        (1, -1, 3, -1, third),
        (-1, -1, 3, -3, 1.0),
        (-1, 1, 1, 1, -two_thirds),
        (1, 0, 1, 1, third),
        (-1, 0, 1, -1, -third),
        (1, -1, 1, -1, two_thirds),
    ]
}

#[test]
fn matches_published_table() {
    for (m1, q, j, m, expected) in table() {
        let got = clebsch_gordan(h(1), h(m1), h(2), h(2 * q), h(j), h(m));
        assert!((got - expected).abs() < 1e-14, "<1/2 {m1}/2; 1 {q} | {j}/2 {m}/2> = {got}, table {expected}");
    }
}

#[test]
fn every_other_entry_vanishes() {
    let listed = table();
    for m1 in [-1, 1] {
        for q in -1..=1 {
            for j in [1, 3] {
                for m in (-j..=j).step_by(2) {
                    if listed.iter().any(|e| e.0 == m1 && e.1 == q && e.2 == j && e.3 == m) {
                        continue;
                    }
                    assert_eq!(clebsch_gordan(h(1), h(m1), h(2), h(2 * q), h(j), h(m)), 0.0);
                }
            }
        }
    }
}

#[test]
fn orthonormal_columns() {
    // sum over (m1, q) of CG(J M) CG(J' M') = delta
    for (j, m) in [(3, 1), (1, 1), (3, -1), (1, -1)] {
        for (jp, mp) in [(3, 1), (1, 1), (3, -1), (1, -1)] {
            let mut dot = 0.0;
            for m1 in [-1, 1] {
                for q in -1..=1 {
                    dot += clebsch_gordan(h(1), h(m1), h(2), h(2 * q), h(j), h(m))
                        * clebsch_gordan(h(1), h(m1), h(2), h(2 * q), h(jp), h(mp));
                }
            }
            let expected = if (j, m) == (jp, mp) { 1.0 } else { 0.0 };
            assert!((dot - expected).abs() < 1e-14);
        }
    }
}

#[test]
fn dipole_ratio_examples() {
    assert!((dipole_ratio(h(1), h(3), h(3), 1) - 1.0).abs() < 1e-15);
    assert!((dipole_ratio(h(-1), h(3), h(1), 1) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    // signed value from the table: <1/2 +1/2; 1 -1 | 1/2 -1/2> = +sqrt(2/3)
    assert!((dipole_ratio(h(1), h(1), h(-1), -1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    // forbidden: projection mismatch, |MJ| > J, |lambda| > 1
    assert_eq!(dipole_ratio(h(1), h(3), h(1), 1), 0.0);
    assert_eq!(dipole_ratio(h(1), h(1), h(3), 1), 0.0);
    assert_eq!(dipole_ratio(h(1), h(3), h(5), 2), 0.0);
}

#[test]
fn line_strength_sum_rule() {
    let strength = |m: i32, j: i32| -> f64 {
        let mut s = 0.0;
        for lambda in -1..=1 {
            let mj = m + 2 * lambda;
            s += dipole_ratio(h(m), h(j), h(mj), lambda).powi(2);
        }
        s
    };
    let up = strength(1, 1) + strength(1, 3);
    let down = strength(-1, 1) + strength(-1, 3);
    assert!((up - down).abs() < 1e-12);
    // D2 : D1 line strength is 2 : 1
    assert!((strength(1, 3) / strength(1, 1) - 2.0).abs() < 1e-12);
}
