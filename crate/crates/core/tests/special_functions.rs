mod common;

use std::f64::consts::PI;

use common::bessel_oracle::{self, RationalArg};
use common::cases::{seeded_rational_points, wronskian_lattice};
use common::within;
use num_complex::Complex64;
use quasires::special::{cyl_all, cyl_j, cyl_seq, cyl_y};
use quasires::Error;

#[test]
fn exact_series_oracle_j_and_y() {
    let points = seeded_rational_points(1000);
    let mut worst_j: f64 = 0.0;
    let mut worst_y: f64 = 0.0;
    for &(n, arg) in &points {
        let w = arg.to_c64();
        let j_ref = bessel_oracle::bessel_j(n, arg);
        let j = cyl_j(n, w).unwrap();
        assert!(within(j, j_ref, 1e-10, 1e-12), "J_{n}({w}): {j} vs {j_ref}");
        worst_j = worst_j.max((j - j_ref).norm() / j_ref.norm());
        if arg.im_num == 0 && arg.re_num <= 0 {
            continue;
        }
        match cyl_y(n, w) {
            Ok(y) => {
                let y_ref = bessel_oracle::bessel_y(n, arg);
                assert!(within(y, y_ref, 1e-10, 1e-12), "Y_{n}({w}): {y} vs {y_ref}");
                worst_y = worst_y.max((y - y_ref).norm() / y_ref.norm());
            }
            Err(Error::Overflow(_)) => {}
            Err(e) => panic!("Y_{n}({w}): {e}"),
        }
    }
    eprintln!("worst relative error: J {worst_j:e}, Y {worst_y:e}");
}

#[test]
fn oracle_reproduces_textbook_values() {
    let one = RationalArg { re_num: 1, im_num: 0, den: 1 };
    assert!((bessel_oracle::bessel_j(0, one).re - 0.765_197_686_557_966_55).abs() < 1e-16);
    assert!((bessel_oracle::bessel_y(0, one).re - 0.088_256_964_215_676_96).abs() < 1e-16);
}

fn reference_rows() -> Vec<(u32, Complex64, Complex64, Complex64)> {
    let text = include_str!("data/bessel_reference.csv");
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            (
                f[0] as u32,
                Complex64::new(f[1], f[2]),
                Complex64::new(f[3], f[4]),
                Complex64::new(f[5], f[6]),
            )
        })
        .collect()
}

#[test]
fn arbitrary_precision_reference_large_arguments() {
    for (m, w, j_ref, y_ref) in reference_rows() {
        let v = cyl_all(m, w).unwrap();
        assert!(within(v.j, j_ref, 1e-10, 1e-12), "J_{m}({w}): {} vs {j_ref}", v.j);
        assert!(within(v.y, y_ref, 1e-10, 1e-12), "Y_{m}({w}): {} vs {y_ref}", v.y);
    }
}

#[test]
fn order_three_complex_argument() {
    let v = cyl_all(3, Complex64::new(2.0, 0.5)).unwrap();
    let j_ref = Complex64::new(0.118_408_351_851_126_014_4, 0.081_640_449_379_048_345_78);
    let y_ref = Complex64::new(-0.919_145_628_107_648_870_2, 0.442_450_942_487_491_532_3);
    assert!((v.j - j_ref).norm() <= 1e-10 * j_ref.norm());
    assert!((v.y - y_ref).norm() <= 1e-10 * y_ref.norm());
}

#[test]
fn wronskian_on_lattice() {
    let lattice = wronskian_lattice();
    let mut checked = 0usize;
    for &w in &lattice {
        // one sequence per argument covers every order up to 200
        let seq = match cyl_seq(200, w) {
            Ok(s) => Some(s),
            Err(Error::Overflow(_)) => None,
            Err(e) => panic!("{w}: {e}"),
        };
        for m in (0..=200u32).step_by(7) {
            let (j0, j1, y0, y1) = match &seq {
                Some(s) => (s.j(m), s.j(m + 1), s.y(m), s.y(m + 1)),
                None => match cyl_seq(m, w) {
                    Ok(s) => (s.j(m), s.j(m + 1), s.y(m), s.y(m + 1)),
                    Err(Error::Overflow(_)) => continue,
                    Err(e) => panic!("{w}: {e}"),
                },
            };
            let a = j1 * y0;
            let b = j0 * y1;
            let defect = (a - b - 2.0 / (PI * w)).norm();
            assert!(
                defect <= 1e-10 * (1.0 + a.norm() + b.norm()),
                "m={m} w={w}: defect {defect:e}"
            );
            checked += 1;
        }
    }
    assert!(checked > 3000, "only {checked} lattice points checked");
}

#[test]
fn dtn_imaginary_part_identity() {
    for m in 0..=100u32 {
        for i in 0..=20 {
            let x = 0.5 + 49.5 * i as f64 / 20.0;
            let v = match cyl_all(m, Complex64::new(x, 0.0)) {
                Ok(v) => v,
                Err(Error::Overflow(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let lhs = (v.h1p * v.h1.conj()).im;
            let rhs = 2.0 / (PI * x);
            assert!((lhs - rhs).abs() <= 1e-10 * rhs, "m={m} x={x}: {lhs} vs {rhs}");
        }
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn j_parity(re in 0.0f64..300.0, im in -20.0f64..20.0, m in 0u32..120) {
            let w = Complex64::new(re, im);
            let a = cyl_j(m, w).unwrap();
            let b = cyl_j(m, -w).unwrap();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((b - sign * a).norm() <= 1e-12 * a.norm() + f64::MIN_POSITIVE);
        }

        #[test]
        fn derivative_recurrence(re in 0.2f64..100.0, im in -5.0f64..5.0, m in 1u32..60) {
            let w = Complex64::new(re, im);
            let v = cyl_all(m, w);
            prop_assume!(v.is_ok());
            let v = v.unwrap();
            let lower = cyl_j(m - 1, w).unwrap();
            let upper = cyl_j(m + 1, w).unwrap();
            let expect = (lower - upper) * 0.5;
            prop_assert!((v.jp - expect).norm() <= 1e-10 * (lower.norm() + upper.norm()) + 1e-300);
            prop_assert_eq!(v.h1, v.j + Complex64::i() * v.y);
        }
    }
}
