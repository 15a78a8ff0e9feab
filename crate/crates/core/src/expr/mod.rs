//! Symbolic expressions: real fields in `(x1, x2)` and analytic functions of `z`.

mod complex;
mod parse;
mod scalar;

pub use complex::{schwarzian, CNode, ComplexExpr};
pub use parse::{parse_complex, parse_complex_constant, parse_scalar};
pub use scalar::{Func, Node, ScalarExpr};

/// A point `(x1, x2)`.
pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("parse error at {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("unknown identifier '{name}' at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("evaluation outside the domain at ({}, {}): {detail}", point[0], point[1])]
    Domain { point: Point, detail: String },
}

/// Randomized equality: compares the two expressions at `n` points drawn from
/// the box `[lo, hi]^2`, to relative tolerance `tol`. Points where either side
/// is not finite are skipped; at least half must be usable.
pub fn equivalent(a: &ScalarExpr, b: &ScalarExpr, lo: f64, hi: f64, n: usize, tol: f64, seed: u64) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut used = 0;
    for _ in 0..n {
        let p = [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
        let (u, v) = (a.eval(p), b.eval(p));
        if !u.is_finite() || !v.is_finite() {
            continue;
        }
        used += 1;
        if (u - v).abs() > tol * u.abs().max(v.abs()).max(1.0) {
            return false;
        }
    }
    used * 2 >= n
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn leaf() -> impl Strategy<Value = ScalarExpr> {
        prop_oneof![
            Just(ScalarExpr::x1()),
            Just(ScalarExpr::x2()),
            (-5i64..6).prop_map(ScalarExpr::int),
            (1i64..5, 2i64..5).prop_map(|(p, q)| ScalarExpr::ratio(p, q)),
            (-2.0f64..2.0).prop_map(ScalarExpr::constant),
        ]
    }

    fn expr() -> impl Strategy<Value = ScalarExpr> {
        leaf().prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), 0i64..4).prop_map(|(a, n)| a.powi(n)),
                inner.clone().prop_map(|a| a.sin()),
                inner.clone().prop_map(|a| a.cos()),
                inner.clone().prop_map(|a| a.exp()),
                inner.clone().prop_map(|a| (a.powi(2) + ScalarExpr::one()).ln()),
                (inner.clone(), inner).prop_map(|(a, b)| ScalarExpr::atan2(&a, &(b.powi(2) + ScalarExpr::one()))),
            ]
        })
    }

    fn central_diff(e: &ScalarExpr, p: Point, axis: usize) -> f64 {
        let h = 1e-5;
        let mut a = p;
        let mut b = p;
        a[axis] += h;
        b[axis] -= h;
        (e.eval(a) - e.eval(b)) / (2.0 * h)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn print_parse_round_trip(e in expr()) {
            let text = e.to_string();
            let back = parse_scalar(&text).unwrap();
            prop_assert!(equivalent(&e, &back, -1.5, 1.5, 64, 1e-9, 3), "{} vs {}", text, back);
        }

        #[test]
        fn derivative_matches_finite_difference(e in expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
            for axis in 0..2 {
                let d = e.diff(axis).eval([x, y]);
                let fd = central_diff(&e, [x, y], axis);
                if d.is_finite() && fd.is_finite() && d.abs() < 1e6 {
                    prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{} axis {}: {} vs {}", e, axis, d, fd);
                }
            }
        }

        #[test]
        fn mixed_partials_commute(e in expr()) {
            let a = e.diff(0).diff(1);
            let b = e.diff(1).diff(0);
            prop_assert!(equivalent(&a, &b, -1.0, 1.0, 64, 1e-9, 5));
        }

        #[test]
        fn realify_is_consistent(p in -3.0f64..3.0, re in 0.2f64..1.5, im in -1.5f64..1.5) {
            let w = ComplexExpr::z().powf(p) + ComplexExpr::z().exp();
            let (u, v) = w.realify();
            let z = num_complex::Complex64::new(re, im);
            let val = w.eval(z);
            prop_assert!((u.eval([re, im]) - val.re).abs() <= 1e-9 * val.norm().max(1.0));
            prop_assert!((v.eval([re, im]) - val.im).abs() <= 1e-9 * val.norm().max(1.0));
        }
    }
}
