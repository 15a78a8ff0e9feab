//! Analytic expressions in the complex variable `z = x1 + i x2`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;

use super::scalar::ScalarExpr;

#[derive(Clone, Debug)]
pub enum CNode {
    Const(Complex64),
    Z,
    Add(Vec<ComplexExpr>),
    Mul(Vec<ComplexExpr>),
    Recip(ComplexExpr),
    /// Principal branch power with a real exponent.
    Pow(ComplexExpr, f64),
    Exp(ComplexExpr),
    /// Principal branch logarithm.
    Ln(ComplexExpr),
}

#[derive(Clone)]
pub struct ComplexExpr(Arc<CNode>);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl ComplexExpr {
    fn make(n: CNode) -> Self {
        ComplexExpr(Arc::new(n))
    }

    pub fn node(&self) -> &CNode {
        &self.0
    }

    pub fn z() -> Self {
        Self::make(CNode::Z)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::make(CNode::Const(c))
    }

    pub fn real(v: f64) -> Self {
        Self::constant(Complex64::new(v, 0.0))
    }

    pub fn i() -> Self {
        Self::constant(Complex64::new(0.0, 1.0))
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self.node() {
            CNode::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(ZERO)
    }

    pub fn add_all(items: Vec<ComplexExpr>) -> Self {
        let mut c = ZERO;
        let mut terms = Vec::new();
        for it in items {
            match it.node() {
                CNode::Const(v) => c += v,
                CNode::Add(v) => {
                    for t in v {
                        match t.node() {
                            CNode::Const(w) => c += w,
                            _ => terms.push(t.clone()),
                        }
                    }
                }
                _ => terms.push(it),
            }
        }
        if c != ZERO {
            terms.insert(0, Self::constant(c));
        }
        match terms.len() {
            0 => Self::constant(ZERO),
            1 => terms.pop().unwrap(),
            _ => Self::make(CNode::Add(terms)),
        }
    }

    pub fn mul_all(items: Vec<ComplexExpr>) -> Self {
        let mut c = ONE;
        let mut fs = Vec::new();
        for it in items {
            match it.node() {
                CNode::Const(v) => c *= v,
                CNode::Mul(v) => {
                    for t in v {
                        match t.node() {
                            CNode::Const(w) => c *= w,
                            _ => fs.push(t.clone()),
                        }
                    }
                }
                _ => fs.push(it),
            }
        }
        if c == ZERO {
            return Self::constant(ZERO);
        }
        if c != ONE || fs.is_empty() {
            fs.insert(0, Self::constant(c));
        }
        match fs.len() {
            1 => fs.pop().unwrap(),
            _ => Self::make(CNode::Mul(fs)),
        }
    }

    pub fn neg(&self) -> Self {
        Self::mul_all(vec![Self::real(-1.0), self.clone()])
    }

    pub fn recip(&self) -> Self {
        match self.node() {
            CNode::Const(c) => Self::constant(c.inv()),
            CNode::Recip(a) => a.clone(),
            _ => Self::make(CNode::Recip(self.clone())),
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        if p == 0.0 {
            return Self::constant(ONE);
        }
        if p == 1.0 {
            return self.clone();
        }
        if p == -1.0 {
            return self.recip();
        }
        match self.node() {
            CNode::Const(c) => Self::constant(c.powf(p)),
            _ => Self::make(CNode::Pow(self.clone(), p)),
        }
    }

    pub fn exp(&self) -> Self {
        match self.node() {
            CNode::Const(c) => Self::constant(c.exp()),
            _ => Self::make(CNode::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        match self.node() {
            CNode::Const(c) => Self::constant(c.ln()),
            _ => Self::make(CNode::Ln(self.clone())),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self.node() {
            CNode::Const(c) => *c,
            CNode::Z => z,
            CNode::Add(v) => v.iter().map(|e| e.eval(z)).sum(),
            CNode::Mul(v) => v.iter().map(|e| e.eval(z)).product(),
            CNode::Recip(a) => a.eval(z).inv(),
            CNode::Pow(a, p) => {
                let b = a.eval(z);
                if p.fract() == 0.0 && p.abs() <= 64.0 {
                    b.powi(*p as i32)
                } else {
                    b.powf(*p)
                }
            }
            CNode::Exp(a) => a.eval(z).exp(),
            CNode::Ln(a) => a.eval(z).ln(),
        }
    }

    /// Complex derivative d/dz.
    pub fn diff(&self) -> Self {
        match self.node() {
            CNode::Const(_) => Self::constant(ZERO),
            CNode::Z => Self::constant(ONE),
            CNode::Add(v) => Self::add_all(v.iter().map(|e| e.diff()).collect()),
            CNode::Mul(v) => {
                let mut terms = Vec::new();
                for i in 0..v.len() {
                    let d = v[i].diff();
                    if d.is_zero() {
                        continue;
                    }
                    let fs = v
                        .iter()
                        .enumerate()
                        .map(|(j, f)| if i == j { d.clone() } else { f.clone() })
                        .collect();
                    terms.push(Self::mul_all(fs));
                }
                Self::add_all(terms)
            }
            CNode::Recip(a) => Self::mul_all(vec![Self::real(-1.0), a.diff(), a.powf(-2.0)]),
            CNode::Pow(a, p) => Self::mul_all(vec![Self::real(*p), a.powf(p - 1.0), a.diff()]),
            CNode::Exp(a) => Self::mul_all(vec![self.clone(), a.diff()]),
            CNode::Ln(a) => Self::mul_all(vec![a.diff(), a.recip()]),
        }
    }

    /// Real and imaginary parts as real expressions in `x1`, `x2`.
    /// Non-integral powers and logarithms go through the polar form.
    pub fn realify(&self) -> (ScalarExpr, ScalarExpr) {
        match self.node() {
            CNode::Const(c) => (ScalarExpr::constant(c.re), ScalarExpr::constant(c.im)),
            CNode::Z => (ScalarExpr::x1(), ScalarExpr::x2()),
            CNode::Add(v) => {
                let parts: Vec<_> = v.iter().map(|e| e.realify()).collect();
                (
                    ScalarExpr::add_all(parts.iter().map(|p| p.0.clone()).collect()),
                    ScalarExpr::add_all(parts.iter().map(|p| p.1.clone()).collect()),
                )
            }
            CNode::Mul(v) => {
                let mut acc = (ScalarExpr::one(), ScalarExpr::zero());
                for e in v {
                    acc = cmul(&acc, &e.realify());
                }
                acc
            }
            CNode::Recip(a) => crecip(&a.realify()),
            CNode::Pow(a, p) => {
                let ab = a.realify();
                if p.fract() == 0.0 && p.abs() <= 8.0 {
                    let n = *p as i64;
                    let base = if n < 0 { crecip(&ab) } else { ab };
                    let mut acc = (ScalarExpr::one(), ScalarExpr::zero());
                    for _ in 0..n.abs() {
                        acc = cmul(&acc, &base);
                    }
                    return acc;
                }
                let (re, im) = ab;
                let r2 = &re.powi(2) + &im.powi(2);
                let theta = ScalarExpr::atan2(&im, &re);
                let modulus = match exact_half(*p) {
                    Some(h) => r2.powr(h),
                    None => (ScalarExpr::constant(p / 2.0) * r2.ln()).exp(),
                };
                let arg = ScalarExpr::constant(*p) * theta;
                (&modulus * &arg.cos(), &modulus * &arg.sin())
            }
            CNode::Exp(a) => {
                let (re, im) = a.realify();
                let m = re.exp();
                (&m * &im.cos(), &m * &im.sin())
            }
            CNode::Ln(a) => {
                let (re, im) = a.realify();
                let r2 = &re.powi(2) + &im.powi(2);
                (ScalarExpr::ratio(1, 2) * r2.ln(), ScalarExpr::atan2(&im, &re))
            }
        }
    }

    /// Substitute an expression for `z`.
    pub fn compose(&self, inner: &ComplexExpr) -> Self {
        match self.node() {
            CNode::Const(_) => self.clone(),
            CNode::Z => inner.clone(),
            CNode::Add(v) => Self::add_all(v.iter().map(|e| e.compose(inner)).collect()),
            CNode::Mul(v) => Self::mul_all(v.iter().map(|e| e.compose(inner)).collect()),
            CNode::Recip(a) => a.compose(inner).recip(),
            CNode::Pow(a, p) => a.compose(inner).powf(*p),
            CNode::Exp(a) => a.compose(inner).exp(),
            CNode::Ln(a) => a.compose(inner).ln(),
        }
    }
}

/// `p/2` as a small exact rational, if it is one.
fn exact_half(p: f64) -> Option<Rational64> {
    for den in 1..=12i64 {
        let n = p * den as f64;
        if (n - n.round()).abs() < 1e-14 && n.abs() < 1e6 {
            return Some(Rational64::new(n.round() as i64, 2 * den));
        }
    }
    None
}

fn cmul(a: &(ScalarExpr, ScalarExpr), b: &(ScalarExpr, ScalarExpr)) -> (ScalarExpr, ScalarExpr) {
    (&(&a.0 * &b.0) - &(&a.1 * &b.1), &(&a.0 * &b.1) + &(&a.1 * &b.0))
}

fn crecip(a: &(ScalarExpr, ScalarExpr)) -> (ScalarExpr, ScalarExpr) {
    let den = (&a.0.powi(2) + &a.1.powi(2)).recip();
    (&a.0 * &den, -(&a.1 * &den))
}

/// Schwarzian-type combination `(w''/w')' - (1/2)(w''/w')^2`.
pub fn schwarzian(w: &ComplexExpr) -> ComplexExpr {
    let d1 = w.diff();
    let d2 = d1.diff();
    let q = ComplexExpr::mul_all(vec![d2, d1.recip()]);
    ComplexExpr::add_all(vec![
        q.diff(),
        ComplexExpr::mul_all(vec![ComplexExpr::real(-0.5), q.powf(2.0)]),
    ])
}

macro_rules! cbinop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<ComplexExpr> for ComplexExpr {
            type Output = ComplexExpr;
            fn $m(self, rhs: ComplexExpr) -> ComplexExpr {
                let f: fn(ComplexExpr, ComplexExpr) -> ComplexExpr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<&ComplexExpr> for &ComplexExpr {
            type Output = ComplexExpr;
            fn $m(self, rhs: &ComplexExpr) -> ComplexExpr {
                let f: fn(ComplexExpr, ComplexExpr) -> ComplexExpr = $body;
                f(self.clone(), rhs.clone())
            }
        }
    };
}

cbinop!(Add, add, |a, b| ComplexExpr::add_all(vec![a, b]));
cbinop!(Sub, sub, |a, b| ComplexExpr::add_all(vec![a, b.neg()]));
cbinop!(Mul, mul, |a, b| ComplexExpr::mul_all(vec![a, b]));
cbinop!(Div, div, |a, b| ComplexExpr::mul_all(vec![a, b.recip()]));

impl fmt::Display for ComplexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            CNode::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", fmt_real(c.re))
                } else if c.re == 0.0 {
                    write!(f, "{}*i", fmt_real(c.im))
                } else {
                    write!(f, "({}{}{}*i)", fmt_real(c.re), if c.im < 0.0 { "" } else { "+" }, fmt_real(c.im))
                }
            }
            CNode::Z => write!(f, "z"),
            CNode::Add(v) => {
                write!(f, "(")?;
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            CNode::Mul(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            CNode::Recip(a) => write!(f, "(1/({a}))"),
            CNode::Pow(a, p) => write!(f, "({a})^({})", fmt_real(*p)),
            CNode::Exp(a) => write!(f, "exp({a})"),
            CNode::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

fn fmt_real(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl fmt::Debug for ComplexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexExpr({self})")
    }
}
