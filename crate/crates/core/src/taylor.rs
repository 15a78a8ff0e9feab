//! Truncated bivariate Taylor polynomials, used to push derivatives through
//! compositions such as `w(x) = M(x) U(s(x))` when `U` is only known through
//! its derivatives at one point.

use crate::expr::{Point, ScalarExpr};
use crate::jet::{JetCoord, JetPoint};

/// Coefficients `c[a][b]` of `h1^a h2^b`, `a + b <= order`.
#[derive(Clone, Debug)]
pub struct Taylor2 {
    order: usize,
    c: Vec<Vec<f64>>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl Taylor2 {
    pub fn zero(order: usize) -> Self {
        Taylor2 {
            order,
            c: (0..=order).map(|a| vec![0.0; order + 1 - a]).collect(),
        }
    }

    pub fn constant(order: usize, v: f64) -> Self {
        let mut t = Self::zero(order);
        t.c[0][0] = v;
        t
    }

    /// Expansion of a symbolic field around `x`.
    pub fn of_expr(e: &ScalarExpr, x: Point, order: usize) -> Self {
        let mut t = Self::zero(order);
        for a in 0..=order {
            let mut ea = e.diff_n(a, 0);
            for b in 0..=(order - a) {
                t.c[a][b] = ea.eval(x) / (factorial(a) * factorial(b));
                ea = ea.diff(1);
            }
        }
        t
    }

    pub fn value(&self) -> f64 {
        self.c[0][0]
    }

    pub fn add(&self, o: &Taylor2) -> Taylor2 {
        let mut t = self.clone();
        for a in 0..=self.order {
            for b in 0..=(self.order - a) {
                t.c[a][b] += o.c[a][b];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Taylor2 {
        let mut t = self.clone();
        t.c.iter_mut().flatten().for_each(|v| *v *= s);
        t
    }

    pub fn mul(&self, o: &Taylor2) -> Taylor2 {
        let n = self.order;
        let mut t = Self::zero(n);
        for a1 in 0..=n {
            for b1 in 0..=(n - a1) {
                let u = self.c[a1][b1];
                if u == 0.0 {
                    continue;
                }
                let rest = n - a1 - b1;
                for a2 in 0..=rest {
                    for b2 in 0..=(rest - a2) {
                        t.c[a1 + a2][b1 + b2] += u * o.c[a2][b2];
                    }
                }
            }
        }
        t
    }

    /// `F(self)` where `derivs[n] = F^(n)(self.value())`.
    pub fn compose(&self, derivs: &[f64]) -> Taylor2 {
        let n = self.order;
        let mut delta = self.clone();
        delta.c[0][0] = 0.0;
        let mut out = Self::constant(n, derivs[0]);
        let mut pw = Self::constant(n, 1.0);
        for (k, d) in derivs.iter().enumerate().take(n + 1).skip(1) {
            pw = pw.mul(&delta);
            out = out.add(&pw.scale(d / factorial(k)));
        }
        out
    }

    /// Jet values `d^(k) / dx1^(k-j) dx2^j` at the expansion point.
    pub fn to_jet(&self, x: Point) -> JetPoint {
        let mut p = JetPoint::new(x, self.order);
        for k in 0..=self.order {
            for j in 0..=k {
                let a = k - j;
                p.set(JetCoord::new(k, j), self.c[a][j] * factorial(a) * factorial(j));
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;

    #[test]
    fn composition_matches_symbolic_chain_rule() {
        let s = parse_scalar("x1*x2^2 + sin(x1)").unwrap();
        let x = [0.4, 0.9];
        let s0 = s.eval(x);
        // F = exp, all derivatives equal exp(s0)
        let derivs = vec![s0.exp(); 5];
        let t = Taylor2::of_expr(&s, x, 4).compose(&derivs);
        let jet = t.to_jet(x);
        let w = s.exp();
        let exact = JetPoint::of_function(&w, x, 4);
        for (a, b) in jet.values.iter().zip(&exact.values) {
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn product_of_expansions() {
        let f = parse_scalar("cosh(x1) + x2").unwrap();
        let g = parse_scalar("x1^3*x2").unwrap();
        let x = [0.7, -0.2];
        let t = Taylor2::of_expr(&f, x, 4).mul(&Taylor2::of_expr(&g, x, 4));
        let exact = JetPoint::of_function(&(&f * &g), x, 4);
        for (a, b) in t.to_jet(x).values.iter().zip(&exact.values) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
