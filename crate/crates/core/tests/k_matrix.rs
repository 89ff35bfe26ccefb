use mra_core::engine::{assess_k_invertibility, build_k_matrix, extract_tsr_coefficients, Filter, ParityConvention};
use mra_core::models::counterexample::counterexample_filter;
use mra_core::models::make_haar_line_model;
use mra_core::Complex64;

struct GoldenRow {
    radius: usize,
    smallest: f64,
    condition: f64,
}

fn golden() -> Vec<GoldenRow> {
    let text = include_str!("golden/k_matrix_haar.csv");
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            GoldenRow {
                radius: f[0].parse().unwrap(),
                smallest: f[1].parse().unwrap(),
                condition: f[2].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn haar_k_matrix_matches_golden_svd() {
    let m = make_haar_line_model(4, 16).unwrap();
    let sys = extract_tsr_coefficients(&m.phi, m.pair.clone(), -3..=4).unwrap();
    let rows = golden();
    let radii: Vec<usize> = rows.iter().map(|r| r.radius).collect();
    let floor = rows.iter().map(|r| r.smallest).fold(f64::INFINITY, f64::min) * (1.0 - 1e-9);
    let rep = assess_k_invertibility(&sys.h, &radii, ParityConvention::ColumnParity, floor).unwrap();
    assert!(rep.numerically_invertible);
    for (p, g) in rep.probes.iter().zip(&rows) {
        assert_eq!(p.radius, g.radius);
        assert!((p.smallest_singular_value - g.smallest).abs() < 1e-12);
        assert!((p.condition_estimate - g.condition).abs() < 1e-10);
    }
}

#[test]
fn zero_filter_control_is_not_invertible() {
    let zero = Filter::from_real(0, &[0.0, 0.0]);
    let rep = assess_k_invertibility(&zero, &[2, 4, 8], ParityConvention::ColumnParity, 0.5).unwrap();
    assert!(!rep.numerically_invertible);
    assert_eq!(rep.min_singular_value, 0.0);
}

#[test]
fn counterexample_k_matrix_matches_double_loop_fill() {
    let h = counterexample_filter();
    let m = 5usize;
    let k = build_k_matrix(&h, m, ParityConvention::ColumnParity).unwrap();
    let tap = |n: i64| if (0..4).contains(&n) { h.coeffs[n as usize] } else { Complex64::new(0.0, 0.0) };
    for l in -(m as i64)..=m as i64 {
        for n in -(m as i64)..=m as i64 {
            let expected = if n % 2 == 0 {
                tap(l - n)
            } else {
                tap(n - l) * (-1f64).powi((l - 1) as i32)
            };
            assert_eq!(k.entry(l, n), expected, "({l}, {n})");
        }
    }
}
