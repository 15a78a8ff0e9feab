//! Real expression trees over the independent variables `x1`, `x2`.
//!
//! Nodes are immutable and shared through `Arc`. The smart constructors fold
//! exact rational constants, flatten sums and products, merge like terms and
//! like powers; nothing beyond that is attempted. Floating constants are kept
//! as written.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ExprError, Point};

/// Unary elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    /// Real (signed) cube root.
    Cbrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Cbrt => "cbrt",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Ln => {
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Cbrt => v.cbrt(),
        }
    }
}

/// Expression node. Negation is represented as a product with the rational −1.
#[derive(Clone, Debug)]
pub enum Node {
    Rational(Rational64),
    Float(f64),
    /// 0 for `x1`, 1 for `x2`.
    Var(u8),
    Add(Vec<ScalarExpr>),
    Mul(Vec<ScalarExpr>),
    Pow(ScalarExpr, Rational64),
    Unary(Func, ScalarExpr),
    Atan2(ScalarExpr, ScalarExpr),
}

struct Inner {
    node: Node,
    hash: u64,
    deriv: [OnceLock<ScalarExpr>; 2],
}

#[derive(Clone)]
pub struct ScalarExpr(Arc<Inner>);

fn mix(h: u64, v: u64) -> u64 {
    let mut x = h ^ v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^ (x >> 33)
}

fn node_hash(node: &Node) -> u64 {
    match node {
        Node::Rational(r) => mix(mix(1, *r.numer() as u64), *r.denom() as u64),
        Node::Float(f) => mix(2, f.to_bits()),
        Node::Var(i) => mix(3, *i as u64),
        Node::Add(v) => v.iter().fold(4, |h, e| mix(h, e.hash())),
        Node::Mul(v) => v.iter().fold(5, |h, e| mix(h, e.hash())),
        Node::Pow(b, e) => mix(mix(mix(6, b.hash()), *e.numer() as u64), *e.denom() as u64),
        Node::Unary(f, a) => mix(mix(7, *f as u64), a.hash()),
        Node::Atan2(a, b) => mix(mix(8, a.hash()), b.hash()),
    }
}

fn checked_add(a: Rational64, b: Rational64) -> Option<Rational64> {
    let n = (*a.numer() as i128) * (*b.denom() as i128) + (*b.numer() as i128) * (*a.denom() as i128);
    let d = (*a.denom() as i128) * (*b.denom() as i128);
    from_i128(n, d)
}

fn checked_mul(a: Rational64, b: Rational64) -> Option<Rational64> {
    let n = (*a.numer() as i128) * (*b.numer() as i128);
    let d = (*a.denom() as i128) * (*b.denom() as i128);
    from_i128(n, d)
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn from_i128(n: i128, d: i128) -> Option<Rational64> {
    if d == 0 {
        return None;
    }
    let g = gcd(n, d).max(1);
    let (mut n, mut d) = (n / g, d / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    let n = i64::try_from(n).ok()?;
    let d = i64::try_from(d).ok()?;
    Some(Rational64::new_raw(n, d))
}

fn rational_pow(b: Rational64, e: i64) -> Option<Rational64> {
    if e.unsigned_abs() > 64 {
        return None;
    }
    if b.is_zero() && e < 0 {
        return None;
    }
    let mut acc = Rational64::one();
    for _ in 0..e.unsigned_abs() {
        acc = checked_mul(acc, b)?;
    }
    if e < 0 {
        acc = acc.recip();
    }
    Some(acc)
}

fn rat_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl ScalarExpr {
    fn make(node: Node) -> Self {
        let hash = node_hash(&node);
        ScalarExpr(Arc::new(Inner {
            node,
            hash,
            deriv: [OnceLock::new(), OnceLock::new()],
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn hash(&self) -> u64 {
        self.0.hash
    }

    // ---- leaves -------------------------------------------------------------

    pub fn rational(r: Rational64) -> Self {
        Self::make(Node::Rational(r))
    }

    pub fn int(n: i64) -> Self {
        Self::rational(Rational64::from_integer(n))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::rational(Rational64::new(p, q))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// Floating constant. Integral values become exact rationals.
    pub fn constant(v: f64) -> Self {
        if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 {
            Self::int(v as i64)
        } else {
            Self::make(Node::Float(v))
        }
    }

    pub fn x1() -> Self {
        Self::make(Node::Var(0))
    }

    pub fn x2() -> Self {
        Self::make(Node::Var(1))
    }

    /// Variable by axis index (0 or 1).
    pub fn var(axis: usize) -> Self {
        assert!(axis < 2, "axis out of range");
        Self::make(Node::Var(axis as u8))
    }

    // ---- queries --------------------------------------------------------------

    pub fn as_rational(&self) -> Option<Rational64> {
        match self.node() {
            Node::Rational(r) => Some(*r),
            _ => None,
        }
    }

    /// Value if the expression is a literal constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self.node() {
            Node::Rational(r) => Some(rat_f64(*r)),
            Node::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Rational(r) if r.is_zero())
            || matches!(self.node(), Node::Float(f) if *f == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Rational(r) if r.is_one())
    }

    /// True if no variable occurs in the expression.
    pub fn is_constant(&self) -> bool {
        match self.node() {
            Node::Rational(_) | Node::Float(_) => true,
            Node::Var(_) => false,
            Node::Add(v) | Node::Mul(v) => v.iter().all(|e| e.is_constant()),
            Node::Pow(b, _) => b.is_constant(),
            Node::Unary(_, a) => a.is_constant(),
            Node::Atan2(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    // ---- arithmetic -------------------------------------------------------------

    pub fn add_all(items: Vec<ScalarExpr>) -> Self {
        let mut flat = Vec::with_capacity(items.len());
        for it in items {
            match it.node() {
                Node::Add(v) => flat.extend(v.iter().cloned()),
                _ => flat.push(it),
            }
        }
        let mut rconst = Rational64::zero();
        // like-term table: rest -> accumulated coefficient
        let mut order: Vec<ScalarExpr> = Vec::new();
        let mut coefs: Vec<Rational64> = Vec::new();
        let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut extra: Vec<ScalarExpr> = Vec::new();
        for it in flat {
            if let Node::Rational(r) = it.node() {
                match checked_add(rconst, *r) {
                    Some(s) => rconst = s,
                    None => extra.push(it.clone()),
                }
                continue;
            }
            let (c, rest) = split_coefficient(&it);
            let slot = index
                .get(&rest.hash())
                .and_then(|ids| ids.iter().copied().find(|&i| order[i] == rest));
            match slot {
                Some(i) => match checked_add(coefs[i], c) {
                    Some(s) => coefs[i] = s,
                    None => extra.push(it.clone()),
                },
                None => {
                    index.entry(rest.hash()).or_default().push(order.len());
                    order.push(rest);
                    coefs.push(c);
                }
            }
        }
        let mut terms: Vec<ScalarExpr> = Vec::new();
        for (rest, c) in order.into_iter().zip(coefs) {
            if c.is_zero() {
                continue;
            }
            if c.is_one() {
                terms.push(rest);
            } else {
                terms.push(Self::mul_all(vec![Self::rational(c), rest]));
            }
        }
        terms.extend(extra);
        terms.sort_by_key(sort_key);
        if !rconst.is_zero() {
            terms.insert(0, Self::rational(rconst));
        }
        match terms.len() {
            0 => Self::zero(),
            1 => terms.pop().unwrap(),
            _ => Self::make(Node::Add(terms)),
        }
    }

    pub fn mul_all(items: Vec<ScalarExpr>) -> Self {
        let mut flat = Vec::with_capacity(items.len());
        for it in items {
            match it.node() {
                Node::Mul(v) => flat.extend(v.iter().cloned()),
                _ => flat.push(it),
            }
        }
        let mut coef = Rational64::one();
        let mut floats: Vec<ScalarExpr> = Vec::new();
        let mut bases: Vec<ScalarExpr> = Vec::new();
        let mut exps: Vec<Rational64> = Vec::new();
        let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
        for it in flat {
            match it.node() {
                Node::Rational(r) => {
                    if r.is_zero() {
                        return Self::zero();
                    }
                    match checked_mul(coef, *r) {
                        Some(p) => coef = p,
                        None => floats.push(Self::make(Node::Float(rat_f64(*r)))),
                    }
                    continue;
                }
                Node::Float(f) => {
                    if *f == 0.0 {
                        return Self::zero();
                    }
                    floats.push(it.clone());
                    continue;
                }
                _ => {}
            }
            let (base, e) = match it.node() {
                Node::Pow(b, e) => (b.clone(), *e),
                _ => (it.clone(), Rational64::one()),
            };
            let slot = index
                .get(&base.hash())
                .and_then(|ids| ids.iter().copied().find(|&i| bases[i] == base));
            match slot {
                Some(i) => match checked_add(exps[i], e) {
                    Some(s) => exps[i] = s,
                    None => floats.push(it.clone()),
                },
                None => {
                    index.entry(base.hash()).or_default().push(bases.len());
                    bases.push(base);
                    exps.push(e);
                }
            }
        }
        let mut factors: Vec<ScalarExpr> = floats;
        for (b, e) in bases.into_iter().zip(exps) {
            if e.is_zero() {
                continue;
            }
            let p = Self::pow_raw(b, e);
            match p.node() {
                Node::Rational(r) => match checked_mul(coef, *r) {
                    Some(c) => coef = c,
                    None => factors.push(p.clone()),
                },
                Node::Mul(v) => factors.extend(v.iter().cloned()),
                _ => factors.push(p),
            }
        }
        if coef.is_zero() {
            return Self::zero();
        }
        factors.sort_by_key(sort_key);
        if !coef.is_one() || factors.is_empty() {
            factors.insert(0, Self::rational(coef));
        }
        match factors.len() {
            1 => factors.pop().unwrap(),
            _ => Self::make(Node::Mul(factors)),
        }
    }

    pub fn neg(&self) -> Self {
        Self::mul_all(vec![Self::int(-1), self.clone()])
    }

    pub fn recip(&self) -> Self {
        self.powr(Rational64::from_integer(-1))
    }

    /// Power with a rational exponent.
    pub fn powr(&self, e: Rational64) -> Self {
        Self::mul_all(vec![Self::pow_raw(self.clone(), e)])
    }

    pub fn powi(&self, e: i64) -> Self {
        self.powr(Rational64::from_integer(e))
    }

    pub fn sqrt(&self) -> Self {
        self.powr(Rational64::new(1, 2))
    }

    fn pow_raw(b: ScalarExpr, e: Rational64) -> Self {
        if e.is_zero() {
            return Self::one();
        }
        if e.is_one() {
            return b;
        }
        let integral = e.is_integer();
        match b.node() {
            Node::Rational(r) if integral => {
                if let Some(v) = rational_pow(*r, e.to_integer()) {
                    return Self::rational(v);
                }
            }
            Node::Pow(inner, f) if integral => {
                if let Some(p) = checked_mul(*f, e) {
                    return Self::pow_raw(inner.clone(), p);
                }
            }
            Node::Mul(fs) if integral => {
                return Self::mul_all(fs.iter().map(|f| Self::pow_raw(f.clone(), e)).collect());
            }
            _ => {}
        }
        Self::make(Node::Pow(b, e))
    }

    pub fn func(f: Func, a: ScalarExpr) -> Self {
        if let Some(v) = a.as_rational() {
            if v.is_zero() {
                match f {
                    Func::Exp | Func::Cos | Func::Cosh => return Self::one(),
                    Func::Sin | Func::Sinh | Func::Cbrt => return Self::zero(),
                    Func::Ln => {}
                }
            }
            if v.is_one() && f == Func::Ln {
                return Self::zero();
            }
        }
        Self::make(Node::Unary(f, a))
    }

    pub fn exp(&self) -> Self {
        Self::func(Func::Exp, self.clone())
    }
    pub fn ln(&self) -> Self {
        Self::func(Func::Ln, self.clone())
    }
    pub fn sin(&self) -> Self {
        Self::func(Func::Sin, self.clone())
    }
    pub fn cos(&self) -> Self {
        Self::func(Func::Cos, self.clone())
    }
    pub fn sinh(&self) -> Self {
        Self::func(Func::Sinh, self.clone())
    }
    pub fn cosh(&self) -> Self {
        Self::func(Func::Cosh, self.clone())
    }
    pub fn cbrt(&self) -> Self {
        Self::func(Func::Cbrt, self.clone())
    }

    /// `atan2(y, x)`.
    pub fn atan2(y: &ScalarExpr, x: &ScalarExpr) -> Self {
        Self::make(Node::Atan2(y.clone(), x.clone()))
    }

    // ---- evaluation -------------------------------------------------------------

    /// Evaluate at a point. Domain violations produce NaN.
    pub fn eval(&self, p: Point) -> f64 {
        match self.node() {
            Node::Rational(r) => rat_f64(*r),
            Node::Float(f) => *f,
            Node::Var(i) => p[*i as usize],
            Node::Add(v) => v.iter().map(|e| e.eval(p)).sum(),
            Node::Mul(v) => v.iter().map(|e| e.eval(p)).product(),
            Node::Pow(b, e) => {
                let bv = b.eval(p);
                if e.is_integer() {
                    match e.to_i32() {
                        Some(n) => bv.powi(n),
                        None => bv.powf(rat_f64(*e)),
                    }
                } else if bv < 0.0 {
                    f64::NAN
                } else {
                    bv.powf(rat_f64(*e))
                }
            }
            Node::Unary(f, a) => f.apply(a.eval(p)),
            Node::Atan2(a, b) => a.eval(p).atan2(b.eval(p)),
        }
    }

    /// Evaluate, reporting non-finite results as a domain error.
    pub fn try_eval(&self, p: Point) -> Result<f64, ExprError> {
        let v = self.eval(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain {
                point: p,
                detail: format!("{self} is not finite here"),
            })
        }
    }

    /// Value together with a magnitude scale: sums contribute the sum of the
    /// absolute values of their terms. Used to judge cancellation.
    pub fn eval_with_scale(&self, p: Point) -> (f64, f64) {
        match self.node() {
            Node::Add(v) => {
                let mut s = 0.0;
                let mut m = 0.0;
                for e in v {
                    let (a, b) = e.eval_with_scale(p);
                    s += a;
                    m += b;
                }
                (s, m)
            }
            Node::Mul(v) => {
                let mut s = 1.0;
                let mut m = 1.0;
                for e in v {
                    let (a, b) = e.eval_with_scale(p);
                    s *= a;
                    m *= b;
                }
                (s, m)
            }
            _ => {
                let v = self.eval(p);
                (v, v.abs())
            }
        }
    }

    // ---- calculus -------------------------------------------------------------

    /// Exact partial derivative along axis 0 (`x1`) or 1 (`x2`).
    pub fn diff(&self, axis: usize) -> Self {
        if let Some(d) = self.0.deriv[axis].get() {
            return d.clone();
        }
        let d = self.diff_uncached(axis);
        let _ = self.0.deriv[axis].set(d.clone());
        d
    }

    /// Mixed derivative: `a` times along `x1`, `b` times along `x2`.
    pub fn diff_n(&self, a: usize, b: usize) -> Self {
        let mut e = self.clone();
        for _ in 0..a {
            e = e.diff(0);
        }
        for _ in 0..b {
            e = e.diff(1);
        }
        e
    }

    fn diff_uncached(&self, axis: usize) -> Self {
        match self.node() {
            Node::Rational(_) | Node::Float(_) => Self::zero(),
            Node::Var(i) => {
                if *i as usize == axis {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(v) => Self::add_all(v.iter().map(|e| e.diff(axis)).collect()),
            Node::Mul(v) => {
                let mut terms = Vec::new();
                for i in 0..v.len() {
                    let d = v[i].diff(axis);
                    if d.is_zero() {
                        continue;
                    }
                    let mut fs: Vec<ScalarExpr> = Vec::with_capacity(v.len());
                    for (j, f) in v.iter().enumerate() {
                        fs.push(if i == j { d.clone() } else { f.clone() });
                    }
                    terms.push(Self::mul_all(fs));
                }
                Self::add_all(terms)
            }
            Node::Pow(b, e) => {
                let db = b.diff(axis);
                if db.is_zero() {
                    return Self::zero();
                }
                Self::mul_all(vec![
                    Self::rational(*e),
                    Self::pow_raw(b.clone(), e - Rational64::one()),
                    db,
                ])
            }
            Node::Unary(f, a) => {
                let da = a.diff(axis);
                if da.is_zero() {
                    return Self::zero();
                }
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Ln => a.recip(),
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Sinh => a.cosh(),
                    Func::Cosh => a.sinh(),
                    Func::Cbrt => Self::mul_all(vec![Self::ratio(1, 3), self.powi(-2)]),
                };
                Self::mul_all(vec![outer, da])
            }
            Node::Atan2(y, x) => {
                let dy = y.diff(axis);
                let dx = x.diff(axis);
                let num = Self::add_all(vec![
                    Self::mul_all(vec![x.clone(), dy]),
                    Self::mul_all(vec![Self::int(-1), y.clone(), dx]),
                ]);
                let den = Self::add_all(vec![y.powi(2), x.powi(2)]);
                Self::mul_all(vec![num, den.recip()])
            }
        }
    }

    /// Substitute expressions for `x1` and `x2`.
    pub fn compose(&self, subs: &[ScalarExpr; 2]) -> Self {
        let mut memo: HashMap<usize, ScalarExpr> = HashMap::new();
        self.compose_memo(subs, &mut memo)
    }

    fn compose_memo(&self, subs: &[ScalarExpr; 2], memo: &mut HashMap<usize, ScalarExpr>) -> Self {
        let key = Arc::as_ptr(&self.0) as usize;
        if let Some(e) = memo.get(&key) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Rational(_) | Node::Float(_) => self.clone(),
            Node::Var(i) => subs[*i as usize].clone(),
            Node::Add(v) => Self::add_all(v.iter().map(|e| e.compose_memo(subs, memo)).collect()),
            Node::Mul(v) => Self::mul_all(v.iter().map(|e| e.compose_memo(subs, memo)).collect()),
            Node::Pow(b, e) => b.compose_memo(subs, memo).powr(*e),
            Node::Unary(f, a) => Self::func(*f, a.compose_memo(subs, memo)),
            Node::Atan2(a, b) => Self::atan2(&a.compose_memo(subs, memo), &b.compose_memo(subs, memo)),
        };
        memo.insert(key, out.clone());
        out
    }

    /// Number of nodes (shared nodes counted once per occurrence).
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Rational(_) | Node::Float(_) | Node::Var(_) => 1,
            Node::Add(v) | Node::Mul(v) => 1 + v.iter().map(|e| e.size()).sum::<usize>(),
            Node::Pow(b, _) => 1 + b.size(),
            Node::Unary(_, a) => 1 + a.size(),
            Node::Atan2(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Render with custom names for the two variables.
    pub fn display_with<'a>(&'a self, names: [&'a str; 2]) -> impl fmt::Display + 'a {
        Named { e: self, names }
    }
}

fn split_coefficient(e: &ScalarExpr) -> (Rational64, ScalarExpr) {
    if let Node::Mul(v) = e.node() {
        if let Node::Rational(r) = v[0].node() {
            let rest: Vec<ScalarExpr> = v[1..].to_vec();
            let rest = if rest.len() == 1 {
                rest.into_iter().next().unwrap()
            } else {
                ScalarExpr::make(Node::Mul(rest))
            };
            return (*r, rest);
        }
    }
    (Rational64::one(), e.clone())
}

fn sort_key(e: &ScalarExpr) -> (u8, u64, u64) {
    match e.node() {
        Node::Rational(_) => (0, 0, e.hash()),
        Node::Float(_) => (1, 0, e.hash()),
        Node::Var(i) => (2, *i as u64, 0),
        Node::Pow(b, _) => match b.node() {
            Node::Var(i) => (2, *i as u64, 1),
            _ => (3, 0, e.hash()),
        },
        _ => (3, 0, e.hash()),
    }
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.hash() != other.hash() {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Rational(a), Node::Rational(b)) => a == b,
            (Node::Float(a), Node::Float(b)) => a.to_bits() == b.to_bits(),
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a == b,
            (Node::Pow(a, e), Node::Pow(b, f)) => e == f && a == b,
            (Node::Unary(f, a), Node::Unary(g, b)) => f == g && a == b,
            (Node::Atan2(a, b), Node::Atan2(c, d)) => a == c && b == d,
            _ => false,
        }
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

impl From<f64> for ScalarExpr {
    fn from(v: f64) -> Self {
        ScalarExpr::constant(v)
    }
}

impl From<i64> for ScalarExpr {
    fn from(v: i64) -> Self {
        ScalarExpr::int(v)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                let f: fn(ScalarExpr, ScalarExpr) -> ScalarExpr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                let f: fn(ScalarExpr, ScalarExpr) -> ScalarExpr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$tr<f64> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: f64) -> ScalarExpr {
                let f: fn(ScalarExpr, ScalarExpr) -> ScalarExpr = $body;
                f(self, ScalarExpr::constant(rhs))
            }
        }
        impl std::ops::$tr<f64> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: f64) -> ScalarExpr {
                let f: fn(ScalarExpr, ScalarExpr) -> ScalarExpr = $body;
                f(self.clone(), ScalarExpr::constant(rhs))
            }
        }
    };
}

binop!(Add, add, |a, b| ScalarExpr::add_all(vec![a, b]));
binop!(Sub, sub, |a, b| ScalarExpr::add_all(vec![a, b.neg()]));
binop!(Mul, mul, |a, b| ScalarExpr::mul_all(vec![a, b]));
binop!(Div, div, |a, b| ScalarExpr::mul_all(vec![a, b.recip()]));

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(&self)
    }
}

impl std::ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}

// ---- printing ------------------------------------------------------------------

struct Named<'a> {
    e: &'a ScalarExpr,
    names: [&'a str; 2],
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.e, 0, &self.names)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0, &["x1", "x2"])
    }
}

// precedence: 0 top, 1 sum, 2 product, 3 unary minus, 4 power base
fn prec(e: &ScalarExpr) -> u8 {
    match e.node() {
        Node::Add(_) => 1,
        Node::Mul(v) => {
            let neg = matches!(v[0].node(), Node::Rational(r) if r.is_negative());
            if neg {
                1
            } else {
                2
            }
        }
        Node::Rational(r) => {
            if r.is_negative() {
                1
            } else if r.is_integer() {
                5
            } else {
                2
            }
        }
        Node::Float(v) => {
            if *v < 0.0 {
                1
            } else {
                5
            }
        }
        Node::Pow(_, e) => {
            if e.is_negative() {
                2
            } else {
                4
            }
        }
        _ => 5,
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: Rational64) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_float(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    let s = format!("{v:?}");
    if s.contains('e') {
        write!(f, "{v}")
    } else {
        write!(f, "{s}")
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, ctx: u8, names: &[&str; 2]) -> fmt::Result {
    if prec(e) <= ctx {
        write!(f, "(")?;
        write_bare(f, e, names)?;
        return write!(f, ")");
    }
    write_bare(f, e, names)
}

fn write_bare(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, names: &[&str; 2]) -> fmt::Result {
    match e.node() {
        Node::Rational(r) => write_rational(f, *r),
        Node::Float(v) => write_float(f, *v),
        Node::Var(i) => write!(f, "{}", names[*i as usize]),
        Node::Add(v) => {
            for (i, t) in v.iter().enumerate() {
                if i == 0 {
                    write_expr(f, t, 0, names)?;
                    continue;
                }
                let (c, rest) = split_coefficient(t);
                if c.is_negative() {
                    write!(f, " - ")?;
                    let pos = ScalarExpr::mul_all(vec![ScalarExpr::rational(-c), rest]);
                    write_expr(f, &pos, 1, names)?;
                } else if let Node::Float(x) = t.node() {
                    if *x < 0.0 {
                        write!(f, " - ")?;
                        write_float(f, -*x)?;
                    } else {
                        write!(f, " + ")?;
                        write_float(f, *x)?;
                    }
                } else {
                    write!(f, " + ")?;
                    write_expr(f, t, 1, names)?;
                }
            }
            Ok(())
        }
        Node::Mul(v) => {
            let mut fs: &[ScalarExpr] = v;
            if let Node::Rational(r) = v[0].node() {
                if *r == Rational64::from_integer(-1) {
                    write!(f, "-")?;
                    fs = &v[1..];
                    if fs.len() == 1 {
                        return write_expr(f, &fs[0], 2, names);
                    }
                }
            }
            let num: Vec<&ScalarExpr> = fs
                .iter()
                .filter(|x| !matches!(x.node(), Node::Pow(_, e) if e.is_negative()))
                .collect();
            let den: Vec<ScalarExpr> = fs
                .iter()
                .filter_map(|x| match x.node() {
                    Node::Pow(b, e) if e.is_negative() => Some(ScalarExpr::pow_raw(b.clone(), -*e)),
                    _ => None,
                })
                .collect();
            if num.is_empty() {
                write!(f, "1")?;
            }
            for (i, x) in num.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                let c = if i == 0 { 1 } else { 2 };
                write_expr(f, x, c, names)?;
            }
            if !den.is_empty() {
                write!(f, "/")?;
                if den.len() == 1 {
                    write_expr(f, &den[0], 2, names)?;
                } else {
                    write!(f, "(")?;
                    for (i, x) in den.iter().enumerate() {
                        if i > 0 {
                            write!(f, "*")?;
                        }
                        write_expr(f, x, 2, names)?;
                    }
                    write!(f, ")")?;
                }
            }
            Ok(())
        }
        Node::Pow(b, ex) => {
            if ex.is_negative() {
                write!(f, "1/")?;
                return write_expr(f, &ScalarExpr::pow_raw(b.clone(), -*ex), 2, names);
            }
            write_expr(f, b, 4, names)?;
            if ex.is_integer() {
                write!(f, "^{}", ex.numer())
            } else {
                write!(f, "^({}/{})", ex.numer(), ex.denom())
            }
        }
        Node::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, 0, names)?;
            write!(f, ")")
        }
        Node::Atan2(a, b) => {
            write!(f, "atan2(")?;
            write_expr(f, a, 0, names)?;
            write!(f, ", ")?;
            write_expr(f, b, 0, names)?;
            write!(f, ")")
        }
    }
}
