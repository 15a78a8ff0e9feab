//! Point-symmetry generators `X = xi^mu d_mu + (sigma w + u) d_w`, the
//! determining equations for `D[w] = 0`, the multiplier `lambda`, the
//! variational criterion and one-parameter flows.

use std::fmt;

use nalgebra::DMatrix;

use crate::expr::{Point, ScalarExpr};
use crate::jet::{binomial, JetError, JetExpr};
use crate::operator::Operator4;
use crate::verify::ode::{dopri5, OdeError, OdeOptions};
use crate::verify::{SampleSet, VerifyReport};

/// Structural identities (exact up to rounding).
pub const STRUCTURAL_TOL: f64 = 1e-9;
/// Solutions transported by numerically integrated flows.
pub const FLOW_TOL: f64 = 1e-8;
/// Finite-difference cross-checks.
pub const FD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymmetryError {
    #[error("leading coefficients vanish; lambda is undetermined")]
    NoLeadingTerm,
    #[error("no lambda fits the fourth-order equations (residual {residual:e} at {point:?})")]
    InconsistentLambda { residual: f64, point: Point },
    #[error("flow failed: {0}")]
    Flow(#[from] OdeError),
    #[error("symbolic transport needs affine xi, constant sigma and u = 0: {0}")]
    NotAffine(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Clone, Debug)]
pub struct VectorField {
    pub xi1: ScalarExpr,
    pub xi2: ScalarExpr,
    pub sigma: ScalarExpr,
    pub u: ScalarExpr,
}

impl VectorField {
    pub fn new(xi1: ScalarExpr, xi2: ScalarExpr, sigma: ScalarExpr) -> Self {
        VectorField {
            xi1,
            xi2,
            sigma,
            u: ScalarExpr::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::new(ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::zero())
    }

    /// `X0 = w d_w`.
    pub fn x0() -> Self {
        Self::new(ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::one())
    }

    /// `X_u = u d_w`.
    pub fn solution(u: ScalarExpr) -> Self {
        VectorField {
            u,
            ..Self::zero()
        }
    }

    pub fn translation(axis: usize) -> Self {
        let mut x = Self::zero();
        if axis == 0 {
            x.xi1 = ScalarExpr::one();
        } else {
            x.xi2 = ScalarExpr::one();
        }
        x
    }

    pub fn xi(&self) -> [ScalarExpr; 2] {
        [self.xi1.clone(), self.xi2.clone()]
    }

    pub fn divergence(&self) -> ScalarExpr {
        self.xi1.diff(0) + self.xi2.diff(1)
    }

    pub fn plus(&self, o: &VectorField) -> Self {
        VectorField {
            xi1: &self.xi1 + &o.xi1,
            xi2: &self.xi2 + &o.xi2,
            sigma: &self.sigma + &o.sigma,
            u: &self.u + &o.u,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.scaled_expr(&ScalarExpr::constant(c))
    }

    pub fn scaled_expr(&self, c: &ScalarExpr) -> Self {
        VectorField {
            xi1: &self.xi1 * c,
            xi2: &self.xi2 * c,
            sigma: &self.sigma * c,
            u: &self.u * c,
        }
    }

    /// `Q = sigma w + u - xi^mu w_mu`.
    pub fn characteristic(&self) -> JetExpr {
        JetExpr::sum([
            JetExpr::w().scale(&self.sigma),
            JetExpr::constant(self.u.clone()),
            JetExpr::coord(1, 0).scale(&-&self.xi1),
            JetExpr::coord(1, 1).scale(&-&self.xi2),
        ])
    }

    /// `Some(c)` when the field is `c X0` on the samples.
    pub fn trivial_multiple(&self, samples: &SampleSet) -> Option<f64> {
        let mut c = None;
        for &p in &samples.points {
            if self.xi1.eval(p).abs() > 1e-12 || self.xi2.eval(p).abs() > 1e-12 || self.u.eval(p).abs() > 1e-12 {
                return None;
            }
            let s = self.sigma.eval(p);
            match c {
                None => c = Some(s),
                Some(c0) if (s - c0).abs() > 1e-12 * c0.abs().max(1.0) => return None,
                _ => {}
            }
        }
        c
    }

    fn component_values(&self, samples: &SampleSet) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * samples.len());
        for &p in &samples.points {
            for e in [&self.xi1, &self.xi2, &self.sigma, &self.u] {
                out.push(e.eval(p));
            }
        }
        out
    }

    /// `Some(c)` with `self = c * other` on the samples (relative tolerance
    /// `tol`); generators are compared projectively this way.
    pub fn proportional_to(&self, other: &VectorField, samples: &SampleSet, tol: f64) -> Option<f64> {
        let a = self.component_values(samples);
        let b = other.component_values(samples);
        let bb: f64 = b.iter().map(|v| v * v).sum();
        if bb == 0.0 {
            return None;
        }
        let c = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / bb;
        let scale = a.iter().chain(&b).fold(1.0f64, |m, v| m.max(v.abs()));
        let ok = a.iter().zip(&b).all(|(x, y)| (x - c * y).abs() <= tol * scale);
        (ok && c != 0.0).then_some(c)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi1 = {}, xi2 = {}, sigma = {}", self.xi1, self.xi2, self.sigma)?;
        if !self.u.is_zero() {
            write!(f, ", u = {}", self.u)?;
        }
        Ok(())
    }
}

/// Every index tuple of length `n` over `{0, 1}`.
fn tuples(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << n).map(|m| (0..n).map(|i| (m >> i) & 1).collect()).collect()
}

fn dn(e: &ScalarExpr, idx: &[usize]) -> ScalarExpr {
    let b = idx.iter().filter(|&&i| i == 1).count();
    e.diff_n(idx.len() - b, b)
}

/// Free indices `(1..1, 2..2)` with `j` twos.
fn canonical(n: usize, j: usize) -> Vec<usize> {
    let mut v = vec![0; n - j];
    v.extend(std::iter::repeat_n(1, j));
    v
}

#[derive(Clone, Debug)]
pub struct Component {
    /// Number of free indices.
    pub order: usize,
    /// Number of free indices equal to 2.
    pub j: usize,
    pub expr: ScalarExpr,
    pub max_abs: f64,
}

impl Component {
    pub fn label(&self) -> String {
        let idx: String = canonical(self.order, self.j).iter().map(|i| char::from(b'1' + *i as u8)).collect();
        if idx.is_empty() {
            "order 0".to_string()
        } else {
            format!("order {} [{}]", self.order, idx)
        }
    }
}

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub components: Vec<Component>,
    pub lambda: ScalarExpr,
    pub max_abs: f64,
    pub worst_point: Option<Point>,
    pub tolerance: f64,
    pub pass: bool,
}

impl SymmetryReport {
    pub fn worst_component(&self) -> Option<&Component> {
        self.components.iter().max_by(|a, b| a.max_abs.total_cmp(&b.max_abs))
    }
}

/// Component of the determining system with free indices `f`:
///
/// ```text
/// sum_{m>n} C(m,n) A^{f mu..} sigma_{,mu..}
///   - sum_{m>=n} C(m,m-n+1)/n sum_p A^{f\p mu..} xi^{f_p}_{,mu..}
///   + xi^mu A^f_{,mu} + (sigma - lambda) A^f
/// ```
///
/// which for `n = 4..0` is the familiar five-level system (the `3/2` in the
/// second-order level is `C(3,2)/2`).
fn component_expr(op: &Operator4, x: &VectorField, lambda: &ScalarExpr, f: &[usize]) -> ScalarExpr {
    let n = f.len();
    let xi = x.xi();
    let mut parts = Vec::new();
    for m in (n + 1)..=4 {
        let w = binomial(m, n) as f64;
        for mu in tuples(m - n) {
            let mut idx = f.to_vec();
            idx.extend(&mu);
            let a = op.tensor(&idx);
            if a.is_zero() {
                continue;
            }
            parts.push(a * &dn(&x.sigma, &mu) * w);
        }
    }
    if n > 0 {
        for m in n..=4 {
            let k = m - n + 1;
            let w = binomial(m, k) as f64 / n as f64;
            for p in 0..n {
                let mut rest: Vec<usize> = f.to_vec();
                let target = rest.remove(p);
                for mu in tuples(k) {
                    let mut idx = rest.clone();
                    idx.extend(&mu);
                    let a = op.tensor(&idx);
                    if a.is_zero() {
                        continue;
                    }
                    parts.push(a * &dn(&xi[target], &mu) * (-w));
                }
            }
        }
    }
    let af = op.tensor(f);
    for (mu, xm) in xi.iter().enumerate() {
        parts.push(xm * &af.diff(mu));
    }
    parts.push(&(&x.sigma - lambda) * af);
    ScalarExpr::add_all(parts)
}

/// Relative residual of an expression at a point: `|value| / max(1, scale)`.
pub(crate) fn scaled_residual(e: &ScalarExpr, p: Point) -> f64 {
    let (v, s) = e.eval_with_scale(p);
    let r = v.abs() / s.max(1.0);
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Evaluates all fifteen components of the determining system on the
/// samples. `x.u` is ignored: the inhomogeneous part decouples.
pub fn determining_residuals(
    op: &Operator4,
    x: &VectorField,
    lambda: &ScalarExpr,
    samples: &SampleSet,
    tol: f64,
) -> SymmetryReport {
    let mut components = Vec::new();
    let mut max_abs: f64 = 0.0;
    let mut worst_point = None;
    for n in (0..=4).rev() {
        for j in 0..=n {
            let expr = component_expr(op, x, lambda, &canonical(n, j));
            let mut cmax: f64 = 0.0;
            for &p in &samples.points {
                let r = scaled_residual(&expr, p);
                if r > cmax {
                    cmax = r;
                }
                if r > max_abs || worst_point.is_none() {
                    max_abs = max_abs.max(r);
                    worst_point = Some(p);
                }
            }
            components.push(Component {
                order: n,
                j,
                expr,
                max_abs: cmax,
            });
        }
    }
    SymmetryReport {
        components,
        lambda: lambda.clone(),
        max_abs,
        worst_point,
        tolerance: tol,
        pass: max_abs <= tol,
    }
}

/// `pr X(D[w]) - lambda D[w]`, built directly from total derivatives. Its
/// coefficient on `w_(k,j)` is `C(k,j)` times the matching component of the
/// determining system.
pub fn symmetry_condition(op: &Operator4, x: &VectorField, lambda: &ScalarExpr) -> Result<JetExpr, JetError> {
    let q = JetExpr::sum([
        JetExpr::w().scale(&x.sigma),
        JetExpr::coord(1, 0).scale(&-&x.xi1),
        JetExpr::coord(1, 1).scale(&-&x.xi2),
    ]);
    let d = op.apply();
    let mut parts = Vec::new();
    for k in 0..=4 {
        for j in 0..=k {
            let c = op.applied(k, j);
            if c.is_zero() {
                continue;
            }
            parts.push(q.total_derivative_n(k - j, j)?.scale(&c));
        }
    }
    parts.push(d.total_derivative(0)?.scale(&x.xi1));
    parts.push(d.total_derivative(1)?.scale(&x.xi2));
    parts.push(d.scale(&-lambda));
    Ok(JetExpr::sum(parts))
}

/// Plate principal part `c (1, 0, 1/3, 0, 1)` with no third-order terms.
fn has_plate_principal(op: &Operator4) -> bool {
    let a = op.slot(4, 0);
    let Some(c) = a.as_constant() else { return false };
    c != 0.0
        && op.slot(4, 4).as_constant() == Some(c)
        && op.slot(4, 2).as_constant().is_some_and(|v| (3.0 * v - c).abs() <= 1e-15 * c.abs())
        && op.slot(4, 1).is_zero()
        && op.slot(4, 3).is_zero()
        && (0..4).all(|j| op.slot(3, j).is_zero())
}

/// Rod principal part `gamma w_1111` only.
fn has_rod_principal(op: &Operator4) -> bool {
    op.slot(4, 0).as_constant().is_some_and(|c| c != 0.0)
        && (1..=4).all(|j| op.slot(4, j).is_zero())
        && (0..4).all(|j| op.slot(3, j).is_zero())
}

/// Multiplier `lambda` in `pr X(D[w]) = lambda D[w]`.
///
/// Plate operators use `sigma - 2 div xi` and rod operators
/// `sigma - 4 xi^1_{,1}`. Anything else gets the weighted least-squares fit
/// to the five fourth-order components, which must then be consistent on the
/// samples.
pub fn infer_lambda(op: &Operator4, x: &VectorField, samples: &SampleSet) -> Result<ScalarExpr, SymmetryError> {
    if has_plate_principal(op) {
        return Ok(&x.sigma - &(x.divergence() * 2.0));
    }
    if has_rod_principal(op) {
        return Ok(&x.sigma - &(x.xi1.diff(0) * 4.0));
    }
    let mut num = Vec::new();
    let mut den = Vec::new();
    let zero = ScalarExpr::zero();
    for j in 0..=4 {
        let f = canonical(4, j);
        let a = op.tensor(&f);
        if a.is_zero() {
            continue;
        }
        let w = binomial(4, j) as f64;
        let b = component_expr(op, x, &zero, &f);
        num.push(a * &b * w);
        den.push(a * a * w);
    }
    if den.is_empty() {
        return Err(SymmetryError::NoLeadingTerm);
    }
    let lambda = ScalarExpr::add_all(num) / ScalarExpr::add_all(den);
    for &p in &samples.points {
        for j in 0..=4 {
            let e = component_expr(op, x, &lambda, &canonical(4, j));
            let r = scaled_residual(&e, p);
            if r > STRUCTURAL_TOL {
                return Err(SymmetryError::InconsistentLambda { residual: r, point: p });
            }
        }
    }
    Ok(lambda)
}

/// Coefficient vectors of the symmetries inside `span{basis}`: right
/// singular vectors of the stacked determining residuals whose singular value
/// vanishes relative to the largest. `lambda` must be linear in the field.
pub fn symmetries_in_span(
    op: &Operator4,
    basis: &[VectorField],
    samples: &SampleSet,
    lambda: impl Fn(&VectorField) -> ScalarExpr,
) -> Vec<Vec<f64>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|x| {
            let rep = determining_residuals(op, x, &lambda(x), samples, STRUCTURAL_TOL);
            let mut v = Vec::new();
            for c in &rep.components {
                for &p in &samples.points {
                    v.push(c.expr.eval(p));
                }
            }
            v
        })
        .collect();
    let rows = cols[0].len();
    let m = DMatrix::from_fn(rows, basis.len(), |i, j| cols[j][i]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max().max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= 1e-9 * smax)
        .map(|(i, _)| vt.row(i).iter().copied().collect())
        .collect()
}

/// `sigma + div xi + lambda` on the samples; zero iff the symmetry is
/// variational (for `D` self-adjoint).
pub fn is_variational(x: &VectorField, lambda: &ScalarExpr, samples: &SampleSet, tol: f64) -> VerifyReport {
    let e = &(&x.sigma + &x.divergence()) + lambda;
    VerifyReport::from_points(samples.points.iter().map(|&p| (p, e.eval(p))), tol)
}

/// Variational defect `sigma + div xi + lambda` as an expression.
pub fn variational_defect(x: &VectorField, lambda: &ScalarExpr) -> ScalarExpr {
    &(&x.sigma + &x.divergence()) + lambda
}

/// Point `(x, w)` moved along `X` for parameter `eps`:
/// `dx/de = xi(x)`, `dw/de = sigma(x) w + u(x)`.
pub fn flow(x: &VectorField, eps: f64, p: Point, w: f64) -> Result<(Point, f64), SymmetryError> {
    let opts = OdeOptions::default();
    let traj = dopri5(
        |_, y, dy| {
            let q = [y[0], y[1]];
            dy[0] = x.xi1.eval(q);
            dy[1] = x.xi2.eval(q);
            dy[2] = x.sigma.eval(q) * y[2] + x.u.eval(q);
        },
        0.0,
        &[p[0], p[1], w],
        eps,
        opts,
    )?;
    let y = traj.last();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFinite { t: eps }.into());
    }
    Ok(([y[0], y[1]], y[2]))
}

/// Value at `target` of the image of the solution `w` under the flow of `X`
/// for parameter `eps`.
pub fn transport_value(x: &VectorField, eps: f64, w: &ScalarExpr, target: Point) -> Result<f64, SymmetryError> {
    let (src, _) = flow(x, -eps, target, 0.0)?;
    let (_, val) = flow(x, eps, src, w.eval(src))?;
    Ok(val)
}

/// Closed-form image of `w` under the flow of an affine field with constant
/// `sigma` and `u = 0`. The affine preimage map is found by flowing three
/// points backwards.
pub fn transport_solution(x: &VectorField, eps: f64, w: &ScalarExpr, samples: &SampleSet) -> Result<ScalarExpr, SymmetryError> {
    if !x.u.is_zero() {
        return Err(SymmetryError::NotAffine("u is not zero".into()));
    }
    for &p in &samples.points {
        for (name, e) in [("xi1", &x.xi1), ("xi2", &x.xi2)] {
            for (a, b) in [(2, 0), (1, 1), (0, 2)] {
                if e.diff_n(a, b).eval(p).abs() > 1e-12 {
                    return Err(SymmetryError::NotAffine(format!("{name} is not affine")));
                }
            }
        }
        if x.sigma.diff(0).eval(p).abs() > 1e-12 || x.sigma.diff(1).eval(p).abs() > 1e-12 {
            return Err(SymmetryError::NotAffine("sigma is not constant".into()));
        }
    }
    let (c, m0) = flow(x, -eps, [0.0, 0.0], 1.0)?;
    let (e1, _) = flow(x, -eps, [1.0, 0.0], 1.0)?;
    let (e2, _) = flow(x, -eps, [0.0, 1.0], 1.0)?;
    let y1 = ScalarExpr::x1();
    let y2 = ScalarExpr::x2();
    let pre = |i: usize| {
        ScalarExpr::add_all(vec![
            ScalarExpr::constant(c[i]),
            &y1 * (e1[i] - c[i]),
            &y2 * (e2[i] - c[i]),
        ])
    };
    let composed = w.compose(&[pre(0), pre(1)]);
    Ok(composed * (1.0 / m0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;
    use crate::jet::{JetCoord, JetPoint};
    use crate::verify::Domain;
    use rand::SeedableRng;

    fn p(s: &str) -> ScalarExpr {
        parse_scalar(s).unwrap()
    }

    fn field(a: &str, b: &str, s: &str) -> VectorField {
        VectorField::new(p(a), p(b), p(s))
    }

    fn samples() -> SampleSet {
        SampleSet::new(&Domain::default(), 40, 3)
    }

    fn beam() -> Operator4 {
        Operator4::from_applied(|k, j| match (k, j) {
            (4, 0) => ScalarExpr::one(),
            (2, 2) => ScalarExpr::one(),
            _ => ScalarExpr::zero(),
        })
    }

    #[test]
    fn characteristic_examples() {
        let q = VectorField::x0().characteristic();
        assert_eq!(q.to_string(), JetExpr::w().to_string());
        let y3 = field("x1", "2*x2", "0");
        let jp = JetPoint::random(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1), 2);
        let expect = -(jp.x[0] * jp.get(JetCoord::new(1, 0)) + 2.0 * jp.x[1] * jp.get(JetCoord::new(1, 1)));
        assert!((y3.characteristic().eval(&jp) - expect).abs() < 1e-12);
        assert!((VectorField::solution(p("x1")).characteristic().eval(&jp) - jp.x[0]).abs() < 1e-12);
    }

    #[test]
    fn biharmonic_scaling_and_inversion_like_fields() {
        let op = Operator4::biharmonic();
        let s = samples();
        let x4 = field("x1", "x2", "0");
        let lam = infer_lambda(&op, &x4, &s).unwrap();
        assert!((lam.eval([1.0, 1.0]) + 4.0).abs() < 1e-14);
        assert!(determining_residuals(&op, &x4, &lam, &s, STRUCTURAL_TOL).pass);
        let x5 = field("2*x1*x2", "-(x1^2 - x2^2)", "2*x2");
        let lam = infer_lambda(&op, &x5, &s).unwrap();
        let rep = determining_residuals(&op, &x5, &lam, &s, STRUCTURAL_TOL);
        assert!(rep.pass, "{}", rep.max_abs);
        assert_eq!(rep.components.len(), 15);
    }

    #[test]
    fn beam_rejects_shear_field() {
        let op = beam();
        let s = samples();
        let x = field("x2", "0", "0");
        let lam = infer_lambda(&op, &x, &s).unwrap();
        assert!(!determining_residuals(&op, &x, &lam, &s, STRUCTURAL_TOL).pass);
    }

    #[test]
    fn generic_least_squares_matches_shortcut() {
        // principal part (1,0,1/3,0,1) disguised by a factor x1^0 + 0
        let mut op = Operator4::biharmonic();
        op.set_slot(4, 0, p("1 + 0*x1"));
        op.set_slot(1, 0, p("0*x2"));
        let x = field("2*x1*x2", "-(x1^2 - x2^2)", "2*x2");
        let s = samples();
        let lam = infer_lambda(&op, &x, &s).unwrap();
        for &pt in &s.points {
            let shortcut = (&x.sigma - &(x.divergence() * 2.0)).eval(pt);
            assert!((lam.eval(pt) - shortcut).abs() < 1e-10);
        }
    }

    #[test]
    fn lambda_inconsistency_reported() {
        let op = beam().add(&Operator4::from_applied(|k, j| {
            if (k, j) == (4, 4) {
                ScalarExpr::one()
            } else {
                ScalarExpr::zero()
            }
        }));
        let x = field("x1", "2*x2", "0");
        assert!(matches!(
            infer_lambda(&op, &x, &samples()),
            Err(SymmetryError::InconsistentLambda { .. })
        ));
    }

    #[test]
    fn commutator_agrees_with_components() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let op = Operator4::random_polynomial(&mut rng, 1);
        let x = VectorField::new(
            crate::operator::random_polynomial(&mut rng, 2),
            crate::operator::random_polynomial(&mut rng, 2),
            crate::operator::random_polynomial(&mut rng, 1),
        );
        let lam = crate::operator::random_polynomial(&mut rng, 1);
        let s = symmetry_condition(&op, &x, &lam).unwrap();
        let pts = [[0.7, -1.2], [1.5, 0.6], [-0.9, 1.1]];
        for n in 0..=4 {
            for j in 0..=n {
                let comp = component_expr(&op, &x, &lam, &canonical(n, j));
                let coef = s.coefficient(&[JetCoord::new(n, j)]);
                for pt in pts {
                    let a = coef.eval(pt);
                    let b = comp.eval(pt) * binomial(n, j) as f64;
                    assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "({n},{j}) {a} vs {b}");
                }
            }
        }
        // no fifth-order terms survive
        for k in 5..=5 {
            for j in 0..=k {
                assert!(pts.iter().all(|&pt| s.coefficient(&[JetCoord::new(k, j)]).eval(pt).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn variational_examples() {
        let s = samples();
        let r = is_variational(&VectorField::x0(), &ScalarExpr::one(), &s, STRUCTURAL_TOL);
        assert!(!r.pass && (r.max_abs - 2.0).abs() < 1e-12);
        let r = is_variational(&VectorField::solution(p("x1")), &ScalarExpr::zero(), &s, STRUCTURAL_TOL);
        assert!(r.pass);
    }

    #[test]
    fn trivial_and_proportional() {
        let s = samples();
        assert_eq!(VectorField::x0().scaled(3.0).trivial_multiple(&s), Some(3.0));
        assert_eq!(field("x1", "0", "1").trivial_multiple(&s), None);
        let a = field("x1", "2*x2", "0");
        let c = a.scaled(-2.5).proportional_to(&a, &s, 1e-12).unwrap();
        assert!((c + 2.5).abs() < 1e-12);
        assert!(field("x1", "x2", "0").proportional_to(&a, &s, 1e-9).is_none());
    }

    #[test]
    fn flows() {
        let ((a, b), w) = {
            let (q, w) = flow(&VectorField::translation(0), 0.7, [0.2, 0.3], 1.5).unwrap();
            ((q[0], q[1]), w)
        };
        assert!((a - 0.9).abs() < 1e-12 && (b - 0.3).abs() < 1e-12 && (w - 1.5).abs() < 1e-12);
        let (q, _) = flow(&field("x1", "x2", "0"), 0.5, [1.0, -2.0], 0.0).unwrap();
        assert!((q[0] - 0.5f64.exp()).abs() < 1e-9 && (q[1] + 2.0 * 0.5f64.exp()).abs() < 1e-9);
        let x5 = field("2*x1*x2", "-(x1^2 - x2^2)", "2*x2");
        let (q1, w1) = flow(&x5, 0.1, [0.8, 0.4], 1.0).unwrap();
        let (q2, w2) = flow(&x5, 0.05, [0.8, 0.4], 1.0).unwrap();
        let (q3, w3) = flow(&x5, 0.05, q2, w2).unwrap();
        assert!((q1[0] - q3[0]).abs() < 1e-9 && (q1[1] - q3[1]).abs() < 1e-9 && (w1 - w3).abs() < 1e-9);
    }

    #[test]
    fn transported_beam_solution_still_solves() {
        let op = beam();
        let s = samples();
        let w = p("cos(x1 - x2)");
        for x in [VectorField::translation(0), VectorField::translation(1), field("x1", "2*x2", "0")] {
            let t = transport_solution(&x, 0.3, &w, &s).unwrap();
            let r = op.apply_to(&t);
            for &pt in &s.points {
                assert!(r.eval(pt).abs() < FLOW_TOL);
                let direct = transport_value(&x, 0.3, &w, pt).unwrap();
                assert!((direct - t.eval(pt)).abs() < FLOW_TOL);
            }
        }
    }
}
