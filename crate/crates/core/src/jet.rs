//! Polynomials in the jet coordinates of one dependent variable `w(x1, x2)`.
//!
//! A coordinate `(k, j)` stands for the symmetric derivative of total order
//! `k` with `j` differentiations along `x2`: `(0,0)` is `w`, `(3,1)` is
//! `w_112`. Expressions are sums of monomials (sorted multisets of
//! coordinates) with `ScalarExpr` coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;

use crate::expr::{Point, ScalarExpr};

/// Default highest derivative order tracked.
pub const DEFAULT_MAX_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetCoord {
    pub k: u8,
    pub j: u8,
}

impl JetCoord {
    pub fn new(k: usize, j: usize) -> Self {
        assert!(j <= k, "jet coordinate ({k},{j}) has j > k");
        JetCoord { k: k as u8, j: j as u8 }
    }

    pub fn w() -> Self {
        JetCoord { k: 0, j: 0 }
    }

    /// One more derivative along `axis` (0 for `x1`, 1 for `x2`).
    pub fn shifted(self, axis: usize) -> Self {
        JetCoord {
            k: self.k + 1,
            j: self.j + axis as u8,
        }
    }

    /// Flat index in a [`JetPoint`].
    pub fn index(self) -> usize {
        let k = self.k as usize;
        k * (k + 1) / 2 + self.j as usize
    }

    /// Subscript string, e.g. `112` for `(3,1)`.
    pub fn subscript(self) -> String {
        let mut s = "1".repeat((self.k - self.j) as usize);
        s.push_str(&"2".repeat(self.j as usize));
        s
    }
}

impl fmt::Display for JetCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 0 {
            write!(f, "w")
        } else {
            write!(f, "w_{}", self.subscript())
        }
    }
}

/// Binomial coefficient as `f64`-exact integer.
pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("jet order overflow: order {order} exceeds the maximum {max}")]
    OrderOverflow { order: usize, max: usize },
}

type Monomial = Vec<JetCoord>;

#[derive(Clone)]
pub struct JetExpr {
    terms: BTreeMap<Monomial, ScalarExpr>,
    max_order: usize,
}

impl JetExpr {
    pub fn zero() -> Self {
        JetExpr {
            terms: BTreeMap::new(),
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    pub fn constant(c: ScalarExpr) -> Self {
        let mut e = Self::zero();
        e.push(Vec::new(), c);
        e
    }

    pub fn coord(k: usize, j: usize) -> Self {
        let mut e = Self::zero();
        e.push(vec![JetCoord::new(k, j)], ScalarExpr::one());
        e
    }

    pub fn w() -> Self {
        Self::coord(0, 0)
    }

    /// Single monomial with the given coordinates and coefficient.
    pub fn monomial(coords: &[JetCoord], c: ScalarExpr) -> Self {
        let mut e = Self::zero();
        let mut m = coords.to_vec();
        m.sort();
        e.push(m, c);
        e
    }

    pub fn with_max_order(mut self, k: usize) -> Self {
        self.max_order = k;
        self
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn push(&mut self, m: Monomial, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = &*old + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[JetCoord], &ScalarExpr)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial with exactly these coordinates.
    pub fn coefficient(&self, coords: &[JetCoord]) -> ScalarExpr {
        let mut m = coords.to_vec();
        m.sort();
        self.terms.get(&m).cloned().unwrap_or_else(ScalarExpr::zero)
    }

    /// Highest derivative order present (0 if only `w` or no coordinates).
    pub fn order(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|m| m.iter().map(|c| c.k as usize))
            .max()
            .unwrap_or(0)
    }

    /// Highest polynomial degree in the jet coordinates.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &ScalarExpr) -> Self {
        let mut out = Self::zero().with_max_order(self.max_order);
        if c.is_zero() {
            return out;
        }
        for (m, d) in &self.terms {
            out.push(m.clone(), d * c);
        }
        out
    }

    pub fn scale_f(&self, c: f64) -> Self {
        self.scale(&ScalarExpr::constant(c))
    }

    pub fn add(&self, other: &JetExpr) -> Self {
        let mut out = self.clone();
        out.max_order = self.max_order.max(other.max_order);
        for (m, c) in &other.terms {
            out.push(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &JetExpr) -> Self {
        self.add(&other.scale(&ScalarExpr::int(-1)))
    }

    pub fn mul(&self, other: &JetExpr) -> Self {
        let mut out = Self::zero().with_max_order(self.max_order.max(other.max_order));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                m.extend_from_slice(m2);
                m.sort();
                out.push(m, c1 * c2);
            }
        }
        out
    }

    pub fn sum(items: impl IntoIterator<Item = JetExpr>) -> Self {
        let mut out = Self::zero();
        for it in items {
            out.max_order = out.max_order.max(it.max_order);
            for (m, c) in it.terms {
                out.push(m, c);
            }
        }
        out
    }

    /// Total derivative `D_axis`.
    pub fn total_derivative(&self, axis: usize) -> Result<Self, JetError> {
        let mut out = Self::zero().with_max_order(self.max_order);
        for (m, c) in &self.terms {
            out.push(m.clone(), c.diff(axis));
            for i in 0..m.len() {
                if i > 0 && m[i] == m[i - 1] {
                    continue;
                }
                let mult = m.iter().filter(|&&x| x == m[i]).count();
                let s = m[i].shifted(axis);
                if s.k as usize > self.max_order {
                    return Err(JetError::OrderOverflow {
                        order: s.k as usize,
                        max: self.max_order,
                    });
                }
                let mut nm = m.clone();
                nm[i] = s;
                nm.sort();
                out.push(nm, c * (mult as f64));
            }
        }
        Ok(out)
    }

    /// `D_1^a D_2^b` applied to the expression.
    pub fn total_derivative_n(&self, a: usize, b: usize) -> Result<Self, JetError> {
        let mut e = self.clone();
        for _ in 0..a {
            e = e.total_derivative(0)?;
        }
        for _ in 0..b {
            e = e.total_derivative(1)?;
        }
        Ok(e)
    }

    /// Total derivative when the jet coordinates are derivatives with respect
    /// to new variables `y(x)`: `jac[axis][beta] = dy^beta/dx^axis`.
    pub fn total_derivative_chain(&self, axis: usize, jac: &[[ScalarExpr; 2]; 2]) -> Result<Self, JetError> {
        let mut out = Self::zero().with_max_order(self.max_order);
        for (m, c) in &self.terms {
            out.push(m.clone(), c.diff(axis));
            for i in 0..m.len() {
                if i > 0 && m[i] == m[i - 1] {
                    continue;
                }
                let mult = m.iter().filter(|&&x| x == m[i]).count();
                for (beta, dy) in jac[axis].iter().enumerate() {
                    if dy.is_zero() {
                        continue;
                    }
                    let s = m[i].shifted(beta);
                    if s.k as usize > self.max_order {
                        return Err(JetError::OrderOverflow {
                            order: s.k as usize,
                            max: self.max_order,
                        });
                    }
                    let mut nm = m.clone();
                    nm[i] = s;
                    nm.sort();
                    out.push(nm, &(c * dy) * (mult as f64));
                }
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to one jet coordinate.
    pub fn partial(&self, coord: JetCoord) -> Self {
        let mut out = Self::zero().with_max_order(self.max_order);
        for (m, c) in &self.terms {
            let mult = m.iter().filter(|&&x| x == coord).count();
            if mult == 0 {
                continue;
            }
            let pos = m.iter().position(|&x| x == coord).unwrap();
            let mut nm = m.clone();
            nm.remove(pos);
            out.push(nm, c * (mult as f64));
        }
        out
    }

    /// Partial derivative with respect to an ordered index tuple
    /// `w_{a1 a2 ... ak}` under the symmetric convention, i.e.
    /// `(1/C(k,j)) d/dw_(k,j)`.
    pub fn partial_symmetric(&self, coord: JetCoord) -> Self {
        let b = binomial(coord.k as usize, coord.j as usize);
        self.partial(coord).scale(&ScalarExpr::ratio(1, b))
    }

    /// Replace every jet coordinate by the corresponding derivative of `w`.
    pub fn substitute_function(&self, w: &ScalarExpr) -> ScalarExpr {
        let mut cache: HashMap<JetCoord, ScalarExpr> = HashMap::new();
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut fs = vec![c.clone()];
            for &jc in m {
                let d = cache
                    .entry(jc)
                    .or_insert_with(|| w.diff_n((jc.k - jc.j) as usize, jc.j as usize))
                    .clone();
                fs.push(d);
            }
            parts.push(ScalarExpr::mul_all(fs));
        }
        ScalarExpr::add_all(parts)
    }

    pub fn eval(&self, p: &JetPoint) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.eval(p.x) * m.iter().map(|jc| p.get(*jc)).product::<f64>())
            .sum()
    }

    /// Value and a magnitude scale (sum of absolute term magnitudes).
    pub fn eval_with_scale(&self, p: &JetPoint) -> (f64, f64) {
        let mut v = 0.0;
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let (cv, cs) = c.eval_with_scale(p.x);
            let jv: f64 = m.iter().map(|jc| p.get(*jc)).product();
            v += cv * jv;
            s += cs * jv.abs();
        }
        (v, s)
    }

    /// Drop monomials whose coefficient vanishes (relative to its own term
    /// magnitudes) at every sample point.
    pub fn prune_zeros(&self, points: &[Point], tol: f64) -> Self {
        let mut out = Self::zero().with_max_order(self.max_order);
        for (m, c) in &self.terms {
            let vanishes = points.iter().all(|&p| {
                let (v, s) = c.eval_with_scale(p);
                v.is_finite() && v.abs() <= tol * s.max(1e-300)
            });
            if !vanishes {
                out.push(m.clone(), c.clone());
            }
        }
        out
    }

    /// Apply a map to every coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Self {
        let mut out = Self::zero().with_max_order(self.max_order);
        for (m, c) in &self.terms {
            out.push(m.clone(), f(c));
        }
        out
    }
}

/// Euler operator `E(L) = sum_(k,j) (-1)^k D_1^(k-j) D_2^j dL/dw_(k,j)`,
/// summed over canonical coordinates.
pub fn euler_operator(l: &JetExpr) -> Result<JetExpr, JetError> {
    let ord = l.order();
    let mut parts = Vec::new();
    for k in 0..=ord {
        for j in 0..=k {
            let p = l.partial(JetCoord::new(k, j));
            if p.is_zero() {
                continue;
            }
            let d = p.total_derivative_n(k - j, j)?;
            parts.push(if k % 2 == 1 { d.scale_f(-1.0) } else { d });
        }
    }
    Ok(JetExpr::sum(parts))
}

impl fmt::Display for JetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let coords: Vec<String> = m.iter().map(|jc| jc.to_string()).collect();
            if coords.is_empty() {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{}", coords.join("*"))?;
            } else {
                write!(f, "({c})*{}", coords.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for JetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetExpr({self})")
    }
}

impl std::ops::Add for &JetExpr {
    type Output = JetExpr;
    fn add(self, rhs: &JetExpr) -> JetExpr {
        JetExpr::add(self, rhs)
    }
}

impl std::ops::Sub for &JetExpr {
    type Output = JetExpr;
    fn sub(self, rhs: &JetExpr) -> JetExpr {
        JetExpr::sub(self, rhs)
    }
}

impl std::ops::Mul for &JetExpr {
    type Output = JetExpr;
    fn mul(self, rhs: &JetExpr) -> JetExpr {
        JetExpr::mul(self, rhs)
    }
}

/// A point of jet space: base point plus values for all coordinates up to
/// some order.
#[derive(Clone, Debug)]
pub struct JetPoint {
    pub x: Point,
    pub values: Vec<f64>,
}

impl JetPoint {
    pub fn new(x: Point, max_order: usize) -> Self {
        let n = (max_order + 1) * (max_order + 2) / 2;
        JetPoint { x, values: vec![0.0; n] }
    }

    pub fn get(&self, c: JetCoord) -> f64 {
        self.values[c.index()]
    }

    pub fn set(&mut self, c: JetCoord, v: f64) {
        self.values[c.index()] = v;
    }

    /// Random point with every coordinate (base point included) drawn from
    /// `[-2, -0.5] U [0.5, 2]`.
    pub fn random<R: Rng>(rng: &mut R, max_order: usize) -> Self {
        let mut draw = || {
            let m = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        };
        let x = [draw(), draw()];
        let mut p = JetPoint::new(x, max_order);
        for v in p.values.iter_mut() {
            *v = draw();
        }
        p
    }

    /// Jet of a concrete function at `x`.
    pub fn of_function(w: &ScalarExpr, x: Point, max_order: usize) -> Self {
        let mut p = JetPoint::new(x, max_order);
        for k in 0..=max_order {
            for j in 0..=k {
                p.set(JetCoord::new(k, j), w.diff_n(k - j, j).eval(x));
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;
    use rand::SeedableRng;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn coordinate_index_is_dense() {
        let mut seen = vec![];
        for k in 0..=4 {
            for j in 0..=k {
                seen.push(JetCoord::new(k, j).index());
            }
        }
        assert_eq!(seen, (0..15).collect::<Vec<_>>());
    }

    #[test]
    fn total_derivative_of_product() {
        // D_1 (x2 * w * w_1) = x2 (w_1^2 + w w_11)
        let e = JetExpr::monomial(&[JetCoord::new(0, 0), JetCoord::new(1, 0)], ScalarExpr::x2());
        let d = e.total_derivative(0).unwrap();
        let x2 = ScalarExpr::x2();
        assert_eq!(d.coefficient(&[JetCoord::new(1, 0), JetCoord::new(1, 0)]), x2);
        assert_eq!(d.coefficient(&[JetCoord::new(0, 0), JetCoord::new(2, 0)]), x2);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn total_derivatives_commute() {
        let e = JetExpr::monomial(&[JetCoord::new(1, 1), JetCoord::new(2, 0)], parse_scalar("x1*sin(x2)").unwrap());
        let a = e.total_derivative(0).unwrap().total_derivative(1).unwrap();
        let b = e.total_derivative(1).unwrap().total_derivative(0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = JetPoint::random(&mut rng, 8);
            assert!(rel_close(a.eval(&p), b.eval(&p), 1e-12));
        }
    }

    #[test]
    fn order_overflow_is_reported() {
        let e = JetExpr::coord(3, 1).with_max_order(3);
        assert_eq!(
            e.total_derivative(0).unwrap_err(),
            JetError::OrderOverflow { order: 4, max: 3 }
        );
    }

    #[test]
    fn euler_annihilates_divergence() {
        // L = D_1(x2 w w_2) + D_2(w_1^2) is a total divergence
        let a = JetExpr::monomial(&[JetCoord::new(0, 0), JetCoord::new(1, 1)], ScalarExpr::x2());
        let b = JetExpr::monomial(&[JetCoord::new(1, 0), JetCoord::new(1, 0)], ScalarExpr::one());
        let l = a.total_derivative(0).unwrap().add(&b.total_derivative(1).unwrap());
        let e = euler_operator(&l).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p = JetPoint::random(&mut rng, 8);
            assert!(e.eval(&p).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_of_mixed_second_order() {
        // L = 1/2 w_12^2  =>  E(L) = D_1 D_2 (w_12) = w_1122
        let l = JetExpr::monomial(&[JetCoord::new(2, 1), JetCoord::new(2, 1)], ScalarExpr::ratio(1, 2));
        let e = euler_operator(&l).unwrap();
        assert_eq!(e.coefficient(&[JetCoord::new(4, 2)]), ScalarExpr::one());
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn substitution_matches_jet_evaluation() {
        let w = parse_scalar("exp(x1)*cos(2*x2) + x1^3*x2").unwrap();
        let e = JetExpr::monomial(&[JetCoord::new(2, 1), JetCoord::new(1, 0)], ScalarExpr::x1())
            .add(&JetExpr::coord(4, 3));
        let s = e.substitute_function(&w);
        let x = [0.3, -0.7];
        let jp = JetPoint::of_function(&w, x, 5);
        assert!(rel_close(s.eval(x), e.eval(&jp), 1e-13));
    }

    #[test]
    fn symmetric_partial_weights() {
        let e = JetExpr::coord(2, 1).scale_f(2.0).mul(&JetExpr::w());
        let p = e.partial_symmetric(JetCoord::new(2, 1));
        assert_eq!(p.coefficient(&[JetCoord::w()]), ScalarExpr::one());
    }
}
